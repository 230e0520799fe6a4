//! Seeded synthetic network generator: random trees with a fraction of
//! chord edges, a handful of compressors, optional node elevations and
//! randomly placed withdrawals. Used for solver scale tests and for the
//! large-network study when real network data is unavailable.

use crate::network::{EdgeSpec, EdgeSpecKind, Network, Node, NodeKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub nodes: usize,
    /// Extra (chord) edges as a fraction of the node count.
    pub chord_fraction: f64,
    /// Number of tree edges converted into compressors.
    pub compressors: usize,
    pub seed: u64,
    /// Slack pressure at the root node, Pa.
    pub slack_pressure: f64,
    /// Fraction of non-slack nodes carrying a nonzero injection.
    pub demand_fraction: f64,
    /// Injection magnitude bound, kg/s. Withdrawals and supplies are drawn
    /// symmetrically from this range.
    pub max_injection: f64,
    /// Node elevations drawn uniformly from this range, m. Equal bounds
    /// produce a horizontal network with no elevation data.
    pub elevation_range: (f64, f64),
    /// Pipe length range, m.
    pub length_range: (f64, f64),
    /// Pipe diameter range, m.
    pub diameter_range: (f64, f64),
    /// Friction factor range.
    pub friction_range: (f64, f64),
}

impl SynthConfig {
    /// Horizontal ideal-gas test network of the given size.
    pub fn horizontal(nodes: usize, compressors: usize, seed: u64) -> Self {
        Self {
            nodes,
            chord_fraction: 0.10,
            compressors,
            seed,
            slack_pressure: 7e6,
            demand_fraction: 0.25,
            max_injection: 220.0 / (nodes as f64).sqrt(),
            elevation_range: (0.0, 0.0),
            length_range: (3_000.0, 15_000.0),
            diameter_range: (0.6, 1.1),
            friction_range: (0.01, 0.02),
        }
    }

    /// Mountainous large-network configuration with elevations up to 3 km.
    pub fn mountainous(nodes: usize, compressors: usize, seed: u64) -> Self {
        Self {
            elevation_range: (0.0, 3_000.0),
            ..Self::horizontal(nodes, compressors, seed)
        }
    }
}

/// Generates a connected network from the configuration; deterministic for
/// a given config and seed.
pub fn generate(cfg: &SynthConfig) -> Network {
    assert!(cfg.nodes >= 2, "a network needs at least two nodes");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.nodes;

    let elevations: Vec<Option<f64>> = (0..n)
        .map(|_| {
            let (lo, hi) = cfg.elevation_range;
            if hi > lo {
                Some(rng.random_range(lo..hi))
            } else {
                None
            }
        })
        .collect();

    let mut nodes = Vec::with_capacity(n);
    for (i, elevation) in elevations.iter().enumerate() {
        let kind = if i == 0 {
            NodeKind::Slack {
                pressure: cfg.slack_pressure,
            }
        } else if rng.random_bool(cfg.demand_fraction) {
            NodeKind::NonSlack {
                injection: rng.random_range(-cfg.max_injection..cfg.max_injection),
            }
        } else {
            NodeKind::NonSlack { injection: 0.0 }
        };
        nodes.push(Node {
            id: format!("n{i}"),
            kind,
            elevation: *elevation,
        });
    }

    // Random recursive tree: node i attaches to a uniform predecessor.
    let mut edges = Vec::new();
    let mut tree_edges = Vec::new();
    for i in 1..n {
        let parent = rng.random_range(0..i);
        // Randomized declaration orientation exercises both flow signs.
        let (from, to) = if rng.random_bool(0.5) {
            (parent, i)
        } else {
            (i, parent)
        };
        tree_edges.push(edges.len());
        edges.push((from, to));
    }
    let chords = ((n as f64) * cfg.chord_fraction).round() as usize;
    for _ in 0..chords {
        loop {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if a != b {
                edges.push((a, b));
                break;
            }
        }
    }

    // Turn a few tree edges into compressors, boosting away from the root
    // half the time to mimic mid-line recompression.
    let mut compressor_slots = std::collections::HashSet::new();
    let count = cfg.compressors.min(tree_edges.len());
    while compressor_slots.len() < count {
        let pick = tree_edges[rng.random_range(0..tree_edges.len())];
        compressor_slots.insert(pick);
    }

    let specs = edges
        .iter()
        .enumerate()
        .map(|(k, &(from, to))| {
            let kind = if compressor_slots.contains(&k) {
                EdgeSpecKind::Compressor {
                    ratio: rng.random_range(1.02..1.25),
                }
            } else {
                EdgeSpecKind::Pipe {
                    length: rng.random_range(cfg.length_range.0..cfg.length_range.1),
                    diameter: rng.random_range(cfg.diameter_range.0..cfg.diameter_range.1),
                    area: None,
                    friction: rng.random_range(cfg.friction_range.0..cfg.friction_range.1),
                    sin_theta: None,
                }
            };
            EdgeSpec {
                id: format!("e{k}"),
                from: format!("n{from}"),
                to: format!("n{to}"),
                kind,
            }
        })
        .collect();

    Network::new(nodes, specs).expect("generated ids are consistent")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Network;

    #[test]
    fn generated_networks_are_structurally_valid() {
        for seed in 0..4 {
            let net = generate(&SynthConfig::horizontal(50, 2, seed));
            let diags = net.validate();
            assert!(!Network::has_fatal(&diags), "{diags:?}");
            assert_eq!(net.node_count(), 50);
            assert_eq!(net.compressor_count(), 2);
            // 49 tree edges + 5 chords.
            assert_eq!(net.edge_count(), 54);
        }
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let a = generate(&SynthConfig::mountainous(30, 1, 9));
        let b = generate(&SynthConfig::mountainous(30, 1, 9));
        assert_eq!(a, b);
    }

    #[test]
    fn mountainous_networks_carry_elevations_and_inclines() {
        let net = generate(&SynthConfig::mountainous(40, 1, 3));
        assert!(net.nodes().iter().all(|n| n.elevation.is_some()));
        let inclined = net
            .edges()
            .iter()
            .filter_map(|e| e.pipe_params())
            .filter(|p| p.sin_theta != 0.0)
            .count();
        assert!(inclined > 0);
    }
}
