use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{GraphBuilder, NetworkGraph, TopologyError, TopologyWarning};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TopologyFormat {
    #[serde(rename = "edge-list-json", alias = "json")]
    EdgeListJson,
    #[serde(rename = "graphml")]
    GraphMl,
}

impl TopologyFormat {
    /// Guess from a file extension: `.graphml`/`.xml` is GraphML, anything
    /// else edge-list JSON.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("graphml") || ext.eq_ignore_ascii_case("xml") => {
                TopologyFormat::GraphMl
            }
            _ => TopologyFormat::EdgeListJson,
        }
    }

    fn name(self) -> &'static str {
        match self {
            TopologyFormat::EdgeListJson => "edge-list-json",
            TopologyFormat::GraphMl => "graphml",
        }
    }
}

impl FromStr for TopologyFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "edge-list-json" | "json" => Ok(TopologyFormat::EdgeListJson),
            "graphml" => Ok(TopologyFormat::GraphMl),
            other => Err(format!(
                "unknown topology format `{other}` (expected edge-list-json or graphml)"
            )),
        }
    }
}

/// On-disk edge-list document:
/// `{"nodes": ["a", ...], "edges": [{"u": "a", "v": "b", "distance_km": 20.0}, ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeListDoc {
    pub nodes: Vec<String>,
    pub edges: Vec<EdgeRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub u: String,
    pub v: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_km: Option<f64>,
}

impl EdgeListDoc {
    pub fn into_graph(self) -> Result<(NetworkGraph, Vec<TopologyWarning>), TopologyError> {
        let mut b = GraphBuilder::default();
        for n in self.nodes {
            b.add_node(n)?;
        }
        for (i, e) in self.edges.iter().enumerate() {
            b.add_edge(&e.u, &e.v, e.distance_km, || format!("edges[{i}]"))?;
        }
        Ok(b.build())
    }

    pub fn from_graph(g: &NetworkGraph) -> Self {
        Self {
            nodes: g.nodes().iter().map(|n| n.as_str().to_string()).collect(),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeRecord {
                    u: e.u.as_str().to_string(),
                    v: e.v.as_str().to_string(),
                    distance_km: Some(e.distance_km),
                })
                .collect(),
        }
    }
}

pub fn to_edge_list_json(g: &NetworkGraph) -> String {
    serde_json::to_string_pretty(&EdgeListDoc::from_graph(g)).expect("edge list serializes")
}

/// Parses a topology and returns it with any non-fatal warnings.
pub fn read_topology<R: Read>(
    mut source: R,
    format: TopologyFormat,
) -> Result<(NetworkGraph, Vec<TopologyWarning>), TopologyError> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    match format {
        TopologyFormat::EdgeListJson => {
            let doc: EdgeListDoc = serde_json::from_str(&text).map_err(|e| TopologyError::Parse {
                format: format.name(),
                location: format!("line {} column {}", e.line(), e.column()),
                message: e.to_string(),
            })?;
            doc.into_graph()
        }
        TopologyFormat::GraphMl => parse_graphml(&text),
    }
}

/// Parses a topology, logging warnings (duplicate edges) through `log`.
pub fn load_topology<R: Read>(source: R, format: TopologyFormat) -> Result<NetworkGraph, TopologyError> {
    let (g, warnings) = read_topology(source, format)?;
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(g)
}

// Only node ids and edge endpoints are read; keys, data and graph attributes
// are skipped. Edges are taken as undirected whatever `edgedefault` says.
fn parse_graphml(text: &str) -> Result<(NetworkGraph, Vec<TopologyWarning>), TopologyError> {
    let doc = roxmltree::Document::parse(text).map_err(|e| TopologyError::Parse {
        format: "graphml",
        location: format!("line {} column {}", e.pos().row, e.pos().col),
        message: e.to_string(),
    })?;
    let loc = |node: roxmltree::Node| {
        let pos = doc.text_pos_at(node.range().start);
        format!("line {} column {}", pos.row, pos.col)
    };
    let attr = |node: roxmltree::Node, name: &str| {
        node.attribute(name)
            .map(str::to_string)
            .ok_or_else(|| TopologyError::Parse {
                format: "graphml",
                location: loc(node),
                message: format!("<{}> without `{name}` attribute", node.tag_name().name()),
            })
    };

    let graph = doc
        .descendants()
        .find(|n| n.has_tag_name("graph"))
        .ok_or_else(|| TopologyError::Parse {
            format: "graphml",
            location: "document".into(),
            message: "no <graph> element".into(),
        })?;

    let mut b = GraphBuilder::default();
    for node in graph.children().filter(|n| n.has_tag_name("node")) {
        b.add_node(attr(node, "id")?)?;
    }
    for edge in graph.children().filter(|n| n.has_tag_name("edge")) {
        let (s, t) = (attr(edge, "source")?, attr(edge, "target")?);
        b.add_edge(&s, &t, None, || loc(edge))?;
    }
    Ok(b.build())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_edge_list() {
        let src = r#"{"nodes": ["a", "b"], "edges": [{"u": "a", "v": "b"}]}"#;
        let g = load_topology(src.as_bytes(), TopologyFormat::EdgeListJson).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (2, 1));
        assert_eq!(g.edges()[0].distance_km, 20.0);
    }

    #[test]
    fn edge_list_errors_carry_location() {
        let src = r#"{"nodes": ["a", "b"], "edges": [{"u": "a", "v": "b"}, {"u": "b", "v": "b"}]}"#;
        let err = load_topology(src.as_bytes(), TopologyFormat::EdgeListJson).unwrap_err();
        assert!(err.to_string().contains("edges[1]"), "{err}");

        let src = r#"{"nodes": ["a"], "edges": [{"u": "a", "v": "x"}]}"#;
        let err = load_topology(src.as_bytes(), TopologyFormat::EdgeListJson).unwrap_err();
        assert!(matches!(err, TopologyError::UnknownNode { .. }));

        let err = load_topology("{\"nodes\": [".as_bytes(), TopologyFormat::EdgeListJson).unwrap_err();
        assert!(matches!(err, TopologyError::Parse { .. }));
    }

    #[test]
    fn graphml_subset() {
        let src = r#"<?xml version="1.0"?>
<graphml xmlns="http://graphml.graphdrawing.org/xmlns">
  <key attr.name="label" attr.type="string" for="node" id="d1"/>
  <graph edgedefault="undirected">
    <node id="0"><data key="d1">Amsterdam</data></node>
    <node id="1"/>
    <node id="2"/>
    <edge source="0" target="1"/>
    <edge source="1" target="0"/>
    <edge source="2" target="1"><data key="d9">x</data></edge>
  </graph>
</graphml>"#;
        let (g, warnings) = read_topology(src.as_bytes(), TopologyFormat::GraphMl).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (3, 2));
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].to_string().contains("line 9"), "{}", warnings[0]);
    }

    #[test]
    fn graphml_self_loop_reports_line() {
        let src = "<graphml><graph>\n<node id=\"a\"/>\n<edge source=\"a\" target=\"a\"/>\n</graph></graphml>";
        let err = read_topology(src.as_bytes(), TopologyFormat::GraphMl).unwrap_err();
        assert!(matches!(err, TopologyError::SelfLoop { ref location, .. } if location.starts_with("line 3")));
    }

    #[test]
    fn format_from_path() {
        use std::path::Path;
        assert_eq!(
            TopologyFormat::from_path(Path::new("x/Surfnet.graphml")),
            TopologyFormat::GraphMl
        );
        assert_eq!(
            TopologyFormat::from_path(Path::new("x.json")),
            TopologyFormat::EdgeListJson
        );
        assert_eq!("graphml".parse::<TopologyFormat>(), Ok(TopologyFormat::GraphMl));
        assert!("csv".parse::<TopologyFormat>().is_err());
    }
}
