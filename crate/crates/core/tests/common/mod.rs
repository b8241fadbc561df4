#![allow(dead_code)]

use merr::rng::rng_from_seed;
use merr::{MerrInstance, NetworkGraph};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn data(rel: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(rel)
}

/// Shape of a random instance family.
#[derive(Debug, Clone, Copy)]
pub struct Family {
    pub nodes: (usize, usize),
    pub edge_p: f64,
    pub demands: (usize, usize),
    pub l_max: (u32, u32),
}

pub const SMALL: Family = Family {
    nodes: (3, 8),
    edge_p: 0.4,
    demands: (1, 3),
    l_max: (1, 5),
};

pub const MEDIUM: Family = Family {
    nodes: (4, 14),
    edge_p: 0.35,
    demands: (1, 7),
    l_max: (1, 8),
};

/// G(n, p) graph on nodes `n0..` with demands between distinct node pairs.
pub fn random_instance(fam: Family, seed: u64) -> MerrInstance {
    let mut rng = rng_from_seed(seed);
    let n = rng.gen_range(fam.nodes.0..=fam.nodes.1);
    let names: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(fam.edge_p) {
                edges.push((names[a].clone(), names[b].clone(), None));
            }
        }
    }
    let g = NetworkGraph::new(names.iter().cloned(), &edges).unwrap();
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    pairs.shuffle(&mut rng);
    let k = rng.gen_range(fam.demands.0..=fam.demands.1).min(pairs.len());
    let demands: Vec<(&str, &str)> = pairs[..k]
        .iter()
        .map(|&(a, b)| {
            if rng.gen_bool(0.5) {
                (names[a].as_str(), names[b].as_str())
            } else {
                (names[b].as_str(), names[a].as_str())
            }
        })
        .collect();
    let l_max = rng.gen_range(fam.l_max.0..=fam.l_max.1);
    MerrInstance::new(g, &demands, l_max).unwrap()
}
