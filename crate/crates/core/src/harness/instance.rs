use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_json, HarnessError};
use crate::topology::{Demand, EdgeListDoc, MerrInstance};

/// On-disk instance: `{"graph": <edge list>, "demands": [["s", "d"], ...], "l_max": 8}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub graph: EdgeListDoc,
    pub demands: Vec<(String, String)>,
    pub l_max: u32,
}

impl InstanceDoc {
    pub fn into_instance(self) -> Result<MerrInstance, HarnessError> {
        let (graph, warnings) = self.graph.into_graph()?;
        for w in &warnings {
            log::warn!("{w}");
        }
        Ok(MerrInstance::new(graph, &self.demands, self.l_max)?)
    }

    pub fn from_instance(inst: &MerrInstance) -> Self {
        Self {
            graph: EdgeListDoc::from_graph(&inst.graph),
            demands: inst
                .demands
                .iter()
                .map(|Demand { source, dest, .. }| (source.to_string(), dest.to_string()))
                .collect(),
            l_max: inst.l_max,
        }
    }
}

pub fn read_instance(path: &Path) -> Result<MerrInstance, HarnessError> {
    read_json::<InstanceDoc>(path)?.into_instance()
}

pub fn write_instance(inst: &MerrInstance) -> String {
    serde_json::to_string_pretty(&InstanceDoc::from_instance(inst)).expect("instance serializes")
}
