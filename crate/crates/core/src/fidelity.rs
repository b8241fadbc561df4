//! Closed-form channel noise and the decoherence timing budget.
//!
//! All times are seconds and all rates hertz. A link of length `d` km has
//! propagation delay `d / c`; its photon loss probability is
//! `1 - (1 - p_init)·10^(-α d / 10)`, and a qubit exposed for `Δt` seconds
//! to a noise rate `R` is hit with probability `1 - exp(-Δt R)`.
//!
//! Path fidelity uses Werner states: each link contributes
//! `w = (1 - p_depo)(1 - p_deph)` with `Δt` its propagation delay, swapping
//! multiplies the parameters, and `F = (1 + 3w) / 4`. Loss is heralded, so it
//! does not enter `F`; it only decides whether a link is entangled at all.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default speed of light in fiber, km/s.
pub const C_FIBER_KM_PER_S: f64 = 200_000.0;
/// Default qubit decoherence deadline, s.
pub const DEFAULT_DEADLINE_S: f64 = 1.46;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum FidelityError {
    #[error("{what} must be finite and non-negative")]
    Negative { what: &'static str },
    #[error("{what} must be a probability in [0, 1]")]
    NotAProbability { what: &'static str },
    #[error("fiber speed must be finite and positive")]
    BadSpeed,
    #[error("a path needs at least one link")]
    EmptyPath,
    #[error("deadline must be finite and positive")]
    BadDeadline,
}

fn non_negative(v: f64, what: &'static str) -> Result<f64, FidelityError> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(FidelityError::Negative { what })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParams {
    pub p_init: f64,
    pub alpha_db_per_km: f64,
    pub r_deph_hz: f64,
    pub r_depo_hz: f64,
    #[serde(default = "default_c")]
    pub c_fiber_km_per_s: f64,
}

fn default_c() -> f64 {
    C_FIBER_KM_PER_S
}

impl Default for ChannelParams {
    /// A noiseless, lossless channel.
    fn default() -> Self {
        Self {
            p_init: 0.0,
            alpha_db_per_km: 0.0,
            r_deph_hz: 0.0,
            r_depo_hz: 0.0,
            c_fiber_km_per_s: C_FIBER_KM_PER_S,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<(), FidelityError> {
        if !(0.0..=1.0).contains(&self.p_init) {
            return Err(FidelityError::NotAProbability { what: "p_init" });
        }
        non_negative(self.alpha_db_per_km, "alpha_db_per_km")?;
        non_negative(self.r_deph_hz, "r_deph_hz")?;
        non_negative(self.r_depo_hz, "r_depo_hz")?;
        if !(self.c_fiber_km_per_s.is_finite() && self.c_fiber_km_per_s > 0.0) {
            return Err(FidelityError::BadSpeed);
        }
        Ok(())
    }
}

/// Seconds for light to cross `distance_km` of fiber at `c_km_per_s`.
pub fn propagation_delay(distance_km: f64, c_km_per_s: f64) -> Result<f64, FidelityError> {
    non_negative(distance_km, "distance")?;
    if !(c_km_per_s.is_finite() && c_km_per_s > 0.0) {
        return Err(FidelityError::BadSpeed);
    }
    Ok(distance_km / c_km_per_s)
}

/// Probability that the photon of a `d_km` link is lost.
pub fn loss_probability(p: &ChannelParams, d_km: f64) -> Result<f64, FidelityError> {
    p.validate()?;
    non_negative(d_km, "distance")?;
    // 1 - 10^(-αd/10) written with expm1 so small attenuations keep precision.
    let attenuated = -(-p.alpha_db_per_km * d_km / 10.0 * std::f64::consts::LN_10).exp_m1();
    Ok((p.p_init + (1.0 - p.p_init) * attenuated).clamp(0.0, 1.0))
}

fn exposure(rate_hz: f64, dt_s: f64) -> Result<f64, FidelityError> {
    non_negative(rate_hz, "rate")?;
    non_negative(dt_s, "time")?;
    Ok((-(-dt_s * rate_hz).exp_m1()).clamp(0.0, 1.0))
}

pub fn dephasing_probability(r_deph_hz: f64, dt_s: f64) -> Result<f64, FidelityError> {
    exposure(r_deph_hz, dt_s)
}

pub fn depolarizing_probability(r_depo_hz: f64, dt_s: f64) -> Result<f64, FidelityError> {
    exposure(r_depo_hz, dt_s)
}

/// Werner parameter of one link.
pub fn link_werner(p: &ChannelParams, d_km: f64) -> Result<f64, FidelityError> {
    p.validate()?;
    let dt = propagation_delay(d_km, p.c_fiber_km_per_s)?;
    Ok((1.0 - depolarizing_probability(p.r_depo_hz, dt)?) * (1.0 - dephasing_probability(p.r_deph_hz, dt)?))
}

/// Fidelity of the end-to-end pair after swapping along links of the given
/// lengths.
pub fn end_to_end_fidelity(path_distances_km: &[f64], p: &ChannelParams) -> Result<f64, FidelityError> {
    if path_distances_km.is_empty() {
        return Err(FidelityError::EmptyPath);
    }
    let mut w = 1.0;
    for &d in path_distances_km {
        w *= link_werner(p, d)?;
    }
    Ok((1.0 + 3.0 * w) / 4.0)
}

/// Durations of the four phases between entanglement and use, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingBudget {
    pub t_entangle_s: f64,
    pub t_report_s: f64,
    pub t_route_s: f64,
    pub t_dispatch_s: f64,
    pub deadline_s: f64,
}

impl Default for TimingBudget {
    fn default() -> Self {
        Self {
            t_entangle_s: 0.0,
            t_report_s: 0.0,
            t_route_s: 0.0,
            t_dispatch_s: 0.0,
            deadline_s: DEFAULT_DEADLINE_S,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub within_deadline: bool,
    pub total_s: f64,
    pub slack_s: f64,
}

pub fn timing_budget(b: &TimingBudget) -> Result<TimingReport, FidelityError> {
    let total_s = non_negative(b.t_entangle_s, "t_entangle_s")?
        + non_negative(b.t_report_s, "t_report_s")?
        + non_negative(b.t_route_s, "t_route_s")?
        + non_negative(b.t_dispatch_s, "t_dispatch_s")?;
    if !(b.deadline_s.is_finite() && b.deadline_s > 0.0) {
        return Err(FidelityError::BadDeadline);
    }
    Ok(TimingReport {
        within_deadline: total_s < b.deadline_s,
        total_s,
        slack_s: b.deadline_s - total_s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn delays() {
        assert_eq!(propagation_delay(0.0, C_FIBER_KM_PER_S).unwrap(), 0.0);
        assert!(close(propagation_delay(20.0, C_FIBER_KM_PER_S).unwrap(), 1.0e-4, 1e-15));
        // 300000 / 1.44 rounds to the default.
        assert_eq!((300_000.0_f64 / 1.44 / 1e5).round() * 1e5, 200_000.0);
        assert!(propagation_delay(-1.0, C_FIBER_KM_PER_S).is_err());
        assert!(propagation_delay(1.0, 0.0).is_err());
    }

    #[test]
    fn loss_edge_cases() {
        let mut p = ChannelParams::default();
        assert_eq!(loss_probability(&p, 50.0).unwrap(), 0.0);
        p.p_init = 1.0;
        p.alpha_db_per_km = 0.2;
        assert_eq!(loss_probability(&p, 0.0).unwrap(), 1.0);
        assert_eq!(loss_probability(&p, 30.0).unwrap(), 1.0);
        p.p_init = 0.05;
        p.alpha_db_per_km = 0.025;
        let expect = 1.0 - 0.95 * 10f64.powf(-0.05);
        assert!(close(loss_probability(&p, 20.0).unwrap(), expect, 1e-14));
        assert!((expect - 0.153312).abs() < 1e-6);
        p.p_init = 1.5;
        assert!(loss_probability(&p, 1.0).is_err());
    }

    #[test]
    fn noise_probabilities() {
        assert_eq!(dephasing_probability(1e6, 0.0).unwrap(), 0.0);
        assert_eq!(dephasing_probability(0.0, 3.0).unwrap(), 0.0);
        assert!(close(
            dephasing_probability(1e6, 1e-6).unwrap(),
            1.0 - (-1.0f64).exp(),
            1e-15
        ));
        assert!(close(
            depolarizing_probability(100.0, 1e-4).unwrap(),
            1.0 - (-0.01f64).exp(),
            1e-14
        ));
        assert!(depolarizing_probability(1000.0, 1e-4).unwrap() > depolarizing_probability(100.0, 1e-4).unwrap());
        assert!(depolarizing_probability(-1.0, 1.0).is_err());
    }

    #[test]
    fn fidelity_composition() {
        let clean = ChannelParams::default();
        assert_eq!(end_to_end_fidelity(&[20.0; 5], &clean).unwrap(), 1.0);
        let noisy = ChannelParams {
            r_deph_hz: 1000.0,
            r_depo_hz: 1000.0,
            ..clean
        };
        let one = end_to_end_fidelity(&[20.0], &noisy).unwrap();
        let two = end_to_end_fidelity(&[20.0, 20.0], &noisy).unwrap();
        assert!(two < one && one < 1.0);
        let w = (-0.1f64).exp() * (-0.1f64).exp();
        assert!(close(one, (1.0 + 3.0 * w) / 4.0, 1e-15));
        assert_eq!(end_to_end_fidelity(&[], &noisy), Err(FidelityError::EmptyPath));
    }

    #[test]
    fn deadlines() {
        let ok = timing_budget(&TimingBudget {
            t_entangle_s: 0.3,
            t_route_s: 0.7170,
            ..TimingBudget::default()
        })
        .unwrap();
        assert!(ok.within_deadline);
        assert!(close(ok.total_s, 1.017, 1e-12));
        let idle = timing_budget(&TimingBudget::default()).unwrap();
        assert!(idle.within_deadline && idle.slack_s == 1.46);
        let late = timing_budget(&TimingBudget {
            t_entangle_s: 0.77,
            t_route_s: 0.7170,
            ..TimingBudget::default()
        })
        .unwrap();
        assert!(!late.within_deadline);
        assert!(close(late.total_s, 1.487, 1e-12));
    }

    #[test]
    fn params_json_names() {
        let p: ChannelParams =
            serde_json::from_str(r#"{"p_init":0.05,"alpha_db_per_km":0.025,"r_deph_hz":10,"r_depo_hz":20}"#).unwrap();
        assert_eq!(p.c_fiber_km_per_s, C_FIBER_KM_PER_S);
        assert!(serde_json::from_str::<ChannelParams>(r#"{"p_init":0}"#).is_err());
    }
}
