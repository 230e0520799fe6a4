//! Property tests for the structural invariants: EoS inversion, document
//! round trips, and the orientation symmetry of the pipe solution operator.

use gasnet::eos::{EosKind, EosModel, ScaledEos};
use gasnet::io::{MetaSection, NetworkFile};
use gasnet::network::{EdgeSpec, EdgeSpecKind, Network, Node, NodeKind};
use gasnet::pipe::{self, PipeGeometry, TermToggles};
use gasnet::rk::StepControl;
use gasnet::studies::Histogram;
use proptest::prelude::*;

proptest! {
    /// CNGA pressure -> density -> pressure is the identity on the positive
    /// branch across the whole operating envelope.
    #[test]
    fn cnga_pressure_density_round_trip(
        p in 1e3..1e8f64,
        t in 250.0..330.0f64,
        gsg in 0.55..0.8f64,
    ) {
        let model = EosModel::cnga(518.3, t, gsg, 101_350.0).unwrap();
        let back = model.pressure(model.density(p).unwrap()).unwrap();
        prop_assert!((back - p).abs() / p < 1e-10);
    }

    /// Density is strictly increasing in pressure for both models.
    #[test]
    fn density_is_monotone_in_pressure(
        p in 1e3..9.9e7f64,
        ideal in any::<bool>(),
    ) {
        let model = EosModel::with_defaults(if ideal { EosKind::Ideal } else { EosKind::Cnga });
        prop_assert!(model.density(p * 1.01).unwrap() > model.density(p).unwrap());
        prop_assert!(model.drho_dp(p).unwrap() > 0.0);
    }

    /// Integrating to the outlet and back with reversed flow and incline
    /// recovers the inlet pressure: the declared edge orientation carries no
    /// physics.
    #[test]
    fn pipe_integration_is_orientation_symmetric(
        p_in in 0.8..1.2f64,
        f in 0.1..0.8f64,
        sin_theta in -0.05..0.05f64,
        drop in 0.05..0.3f64,
        inertia in any::<bool>(),
    ) {
        let eu = 40.0;
        let r1_hat = 1e-4;
        let geom = PipeGeometry {
            length: 1.0,
            diameter: 1.0,
            area: 1.0,
            friction: 1.0,
            sin_theta,
            r1: r1_hat * eu,
            r2: 2.0 / eu,
            beta: drop / (2.0 * r1_hat * f * f),
        };
        let eos = ScaledEos { model: EosModel::ideal(1.0, 1.0).unwrap(), p0: eu, rho0: 1.0 };
        let toggles = TermToggles { gravity: true, inertia };
        let ctrl = StepControl::with_tolerance(1e-10, 1e-12);
        let there = pipe::integrate_pressure(p_in, f, &geom, &eos, toggles, &ctrl).unwrap();
        let reversed = PipeGeometry { sin_theta: -sin_theta, ..geom };
        let back = pipe::integrate_pressure(
            there.outlet_pressure(), -f, &reversed, &eos, toggles, &ctrl,
        ).unwrap();
        prop_assert!((back.outlet_pressure() - p_in).abs() < 1e-8);
    }

    /// Histograms integrate to one and their cumulative column ends at one.
    #[test]
    fn histogram_density_integrates_to_one(
        values in prop::collection::vec(0.0..10.0f64, 1..200),
        bins in 1usize..40,
    ) {
        let h = Histogram::from_values(&values, bins);
        let area: f64 = h
            .density
            .iter()
            .enumerate()
            .map(|(k, d)| d * (h.edges[k + 1] - h.edges[k]))
            .sum();
        prop_assert!((area - 1.0).abs() < 1e-9);
        prop_assert!((h.cumulative.last().unwrap() - 1.0).abs() < 1e-12);
    }
}

/// Strategy for small random networks: a path backbone with extra edges,
/// mixed slack/junction nodes and occasional compressors.
fn network_strategy() -> impl Strategy<Value = Network> {
    (
        2usize..8,
        prop::collection::vec(-200.0..200.0f64, 8),
        prop::collection::vec(0.0..1500.0f64, 8),
        prop::collection::vec(any::<bool>(), 8),
        1_000.0..80_000.0f64,
    )
        .prop_map(|(n, injections, elevations, with_elev, length)| {
            let nodes: Vec<Node> = (0..n)
                .map(|i| Node {
                    id: format!("n{i}"),
                    kind: if i == 0 {
                        NodeKind::Slack { pressure: 5e6 }
                    } else {
                        NodeKind::NonSlack {
                            injection: injections[i],
                        }
                    },
                    elevation: with_elev[i].then(|| elevations[i]),
                })
                .collect();
            let edges: Vec<EdgeSpec> = (1..n)
                .map(|i| EdgeSpec {
                    id: format!("e{i}"),
                    from: format!("n{}", i - 1),
                    to: format!("n{i}"),
                    kind: if i % 3 == 2 {
                        EdgeSpecKind::Compressor { ratio: 1.1 }
                    } else {
                        EdgeSpecKind::Pipe {
                            length,
                            diameter: 0.8,
                            area: None,
                            friction: 0.015,
                            sin_theta: Some(0.01),
                        }
                    },
                })
                .collect();
            Network::new(nodes, edges).unwrap()
        })
}

proptest! {
    /// Writing a network document and reading it back reproduces every node
    /// and edge, including derived inclines and default areas.
    #[test]
    fn network_document_round_trip(net in network_strategy()) {
        let file = NetworkFile::from_network(&net, MetaSection::default());
        let text = file.to_toml_string().unwrap();
        let back = NetworkFile::from_str_toml(&text).unwrap().build().unwrap();
        prop_assert_eq!(net.nodes(), back.network.nodes());
        for edge in net.edges() {
            let twin = back.network.edges().iter().find(|e| e.id == edge.id).unwrap();
            prop_assert_eq!(&edge.kind, &twin.kind);
            prop_assert_eq!(
                &net.nodes()[edge.from].id,
                &back.network.nodes()[twin.from].id
            );
        }
    }
}
