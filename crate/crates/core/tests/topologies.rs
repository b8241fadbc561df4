mod common;

use std::fs::File;
use std::io::BufReader;

use common::data;
use merr::topology::{bfs_hops, generate_demands, load_topology, sample_reduced_network, EdgeMask, TopologyFormat};
use merr::NetworkGraph;

fn zoo(name: &str) -> NetworkGraph {
    let file = File::open(data(&format!("topologies/{name}.graphml"))).unwrap();
    load_topology(BufReader::new(file), TopologyFormat::GraphMl).unwrap()
}

#[test]
fn zoo_sizes() {
    let s = zoo("Surfnet");
    assert_eq!((s.node_count(), s.edge_count()), (50, 68));
    let u = zoo("UsCarrier");
    assert_eq!((u.node_count(), u.edge_count()), (158, 189));
}

#[test]
fn thinning_keeps_about_p_of_the_edges() {
    let g = zoo("UsCarrier");
    let kept = sample_reduced_network(&g, 0.5, 7).unwrap();
    assert_eq!(kept.node_count(), g.node_count());
    assert!(kept.edges().iter().all(|e| g.edges().contains(e)));
    // Binomial(189, 0.5): mean 94.5, sd 6.9.
    let k = kept.edge_count() as f64;
    assert!((k - 94.5).abs() < 4.0 * 6.9, "{k}");
    assert_eq!(sample_reduced_network(&g, 0.5, 7).unwrap(), kept);
    assert_eq!(sample_reduced_network(&g, 1.0, 7).unwrap(), g);
    assert_eq!(sample_reduced_network(&g, 0.0, 7).unwrap().edge_count(), 0);
}

#[test]
fn demands_respect_the_hop_filter() {
    let g = zoo("Surfnet");
    let all = EdgeMask::all(&g);
    for seed in 0..20 {
        let demands = generate_demands(&g, 20, 4, seed).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for d in &demands {
            assert!(d.source < d.dest);
            let (s, t) = (
                g.index_of(d.source.as_str()).unwrap(),
                g.index_of(d.dest.as_str()).unwrap(),
            );
            let hops = bfs_hops(&g, &all, s)[t].unwrap();
            assert!((1..=4).contains(&hops));
            assert!(seen.insert((s, t)));
        }
    }
    assert!(generate_demands(&g, 5000, 8, 0).is_err());
}
