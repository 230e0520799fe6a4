//! Nondimensionalization: nominal scales, the dimensionless groups of the
//! momentum balance, and conversion of networks between SI and
//! nondimensional form.
//!
//! With nominal length `L0`, velocity `v0`, pressure `p0` and density `rho0`
//! (nominal area fixed at 1 m^2 so `f0 = rho0 v0`), the groups are
//!
//! ```text
//! M  = v0 / c0          Eu = p0 / (rho0 c0^2)      Fr = v0 / sqrt(g L0)
//! R1 = M^2 / (Eu A^2)   R2 = M^2 / (Eu Fr^2)       beta = lambda / (2 D)
//! ```
//!
//! where `A` and `D` are the nondimensional area and diameter. `R2` does not
//! depend on `v0`: `M^2 / Fr^2 = g L0 / c0^2`.

use crate::eos::{EosError, EosModel, ScaledEos};
use crate::network::{EdgeKind, Network, NodeKind};
use crate::pipe::PipeGeometry;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Standard acceleration of gravity, m/s^2.
pub const GRAVITY: f64 = 9.80665;
/// Standard-condition pressure used for the default nominal density, Pa.
pub const STANDARD_PRESSURE: f64 = 101_325.0;

#[derive(Debug, Error)]
pub enum ScaleError {
    #[error("nominal {name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("network has no pipe to derive the nominal length from")]
    NoPipes,
    #[error("network has no slack node to derive the nominal pressure from")]
    NoSlack,
    #[error(transparent)]
    Eos(#[from] EosError),
}

/// Nominal quantities (subscript 0) fixing the nondimensionalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NominalScales {
    /// m
    pub length: f64,
    /// m/s
    pub velocity: f64,
    /// Pa
    pub pressure: f64,
    /// kg/m^3
    pub density: f64,
    /// m/s, sound speed of the active EoS at the nominal density.
    pub sound_speed: f64,
    /// m^2 (always 1).
    pub area: f64,
    /// kg/s, `rho0 * v0 * A0`.
    pub mass_flow: f64,
}

impl NominalScales {
    pub fn new(
        length: f64,
        velocity: f64,
        pressure: f64,
        density: f64,
        model: &EosModel,
    ) -> Result<Self, ScaleError> {
        for (name, value) in [
            ("length", length),
            ("velocity", velocity),
            ("pressure", pressure),
            ("density", density),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ScaleError::NonPositive { name, value });
            }
        }
        let area = 1.0;
        Ok(Self {
            length,
            velocity,
            pressure,
            density,
            sound_speed: model.sound_speed(density)?,
            area,
            mass_flow: density * velocity * area,
        })
    }

    pub fn groups(&self) -> DimensionlessGroups {
        let mach = self.velocity / self.sound_speed;
        let euler = self.pressure / (self.density * self.sound_speed * self.sound_speed);
        let froude = self.velocity / (GRAVITY * self.length).sqrt();
        DimensionlessGroups { mach, euler, froude }
    }

    pub fn scaled_eos(&self, model: &EosModel) -> ScaledEos {
        ScaledEos {
            model: *model,
            p0: self.pressure,
            rho0: self.density,
        }
    }
}

/// The dimensionless groups parameterizing the momentum balance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessGroups {
    pub mach: f64,
    pub euler: f64,
    pub froude: f64,
}

impl DimensionlessGroups {
    /// `R1 = M^2 / (Eu A^2)` for a pipe of nondimensional area `area_bar`.
    pub fn r1(&self, area_bar: f64) -> f64 {
        self.mach * self.mach / (self.euler * area_bar * area_bar)
    }

    /// `R2 = M^2 / (Eu Fr^2)`.
    pub fn r2(&self) -> f64 {
        self.mach * self.mach / (self.euler * self.froude * self.froude)
    }

    /// `beta = lambda / (2 D)` with `D` the nondimensional diameter.
    pub fn beta(friction: f64, diameter_bar: f64) -> f64 {
        friction / (2.0 * diameter_bar)
    }

    /// `(R1, R2, beta)` for one pipe.
    pub fn pipe_groups(&self, area_bar: f64, diameter_bar: f64, friction: f64) -> (f64, f64, f64) {
        (
            self.r1(area_bar),
            self.r2(),
            Self::beta(friction, diameter_bar),
        )
    }

    /// Assembles the full nondimensional geometry record for one pipe.
    pub fn pipe_geometry(
        &self,
        length_bar: f64,
        diameter_bar: f64,
        area_bar: f64,
        friction: f64,
        sin_theta: f64,
    ) -> PipeGeometry {
        let (r1, r2, beta) = self.pipe_groups(area_bar, diameter_bar, friction);
        PipeGeometry {
            length: length_bar,
            diameter: diameter_bar,
            area: area_bar,
            friction,
            sin_theta,
            r1,
            r2,
            beta,
        }
    }
}

/// Optional overrides for the nominal scales, as read from a network file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NominalConfig {
    pub length: Option<f64>,
    pub velocity: Option<f64>,
    pub pressure: Option<f64>,
    pub density: Option<f64>,
}

impl NominalConfig {
    /// Resolves the scales against a network: the nominal length defaults to
    /// the longest pipe, the pressure to the first slack node, the density
    /// to the EoS value at standard conditions, and the velocity to 1 m/s.
    pub fn resolve(&self, net: &Network, model: &EosModel) -> Result<NominalScales, ScaleError> {
        let length = match self.length {
            Some(l) => l,
            None => net.longest_pipe_length().ok_or(ScaleError::NoPipes)?,
        };
        let pressure = match self.pressure {
            Some(p) => p,
            None => net.first_slack().ok_or(ScaleError::NoSlack)?.1,
        };
        let density = match self.density {
            Some(d) => d,
            None => model.density(STANDARD_PRESSURE)?,
        };
        NominalScales::new(length, self.velocity.unwrap_or(1.0), pressure, density, model)
    }
}

/// A network rendered nondimensional, with per-pipe groups attached.
#[derive(Debug, Clone)]
pub struct ScaledNetwork {
    /// Same topology as the source network, all values nondimensional.
    pub net: Network,
    pub scales: NominalScales,
    pub groups: DimensionlessGroups,
    pub eos: ScaledEos,
    /// Pipe geometry per edge, `None` for compressors; aligned with
    /// `net.edges()`.
    geometries: Vec<Option<PipeGeometry>>,
}

impl ScaledNetwork {
    pub fn geometry(&self, edge: usize) -> Option<&PipeGeometry> {
        self.geometries[edge].as_ref()
    }
}

/// Renders a dimensional network nondimensional under the given scales.
pub fn scale_network(net: &Network, scales: &NominalScales, model: &EosModel) -> ScaledNetwork {
    let groups = scales.groups();
    let nodes = net
        .nodes()
        .iter()
        .map(|n| crate::network::Node {
            id: n.id.clone(),
            kind: match n.kind {
                NodeKind::Slack { pressure } => NodeKind::Slack {
                    pressure: pressure / scales.pressure,
                },
                NodeKind::NonSlack { injection } => NodeKind::NonSlack {
                    injection: injection / scales.mass_flow,
                },
            },
            elevation: n.elevation.map(|z| z / scales.length),
        })
        .collect();
    let edges: Vec<_> = net
        .edges()
        .iter()
        .map(|e| crate::network::Edge {
            id: e.id.clone(),
            from: e.from,
            to: e.to,
            kind: match &e.kind {
                EdgeKind::Pipe(p) => EdgeKind::Pipe(crate::network::PipeParams {
                    length: p.length / scales.length,
                    diameter: p.diameter / scales.length,
                    area: p.area / scales.area,
                    friction: p.friction,
                    sin_theta: p.sin_theta,
                }),
                EdgeKind::Compressor { ratio } => EdgeKind::Compressor { ratio: *ratio },
            },
        })
        .collect();
    let geometries = edges
        .iter()
        .map(|e| match &e.kind {
            EdgeKind::Pipe(p) => Some(groups.pipe_geometry(
                p.length,
                p.diameter,
                p.area,
                p.friction,
                p.sin_theta,
            )),
            EdgeKind::Compressor { .. } => None,
        })
        .collect();
    ScaledNetwork {
        net: Network::from_parts(nodes, edges),
        scales: *scales,
        groups,
        eos: scales.scaled_eos(model),
        geometries,
    }
}

/// Inverse of [`scale_network`]; the round trip is the identity up to
/// floating-point rounding.
pub fn unscale_network(scaled: &ScaledNetwork) -> Network {
    let scales = &scaled.scales;
    let nodes = scaled
        .net
        .nodes()
        .iter()
        .map(|n| crate::network::Node {
            id: n.id.clone(),
            kind: match n.kind {
                NodeKind::Slack { pressure } => NodeKind::Slack {
                    pressure: pressure * scales.pressure,
                },
                NodeKind::NonSlack { injection } => NodeKind::NonSlack {
                    injection: injection * scales.mass_flow,
                },
            },
            elevation: n.elevation.map(|z| z * scales.length),
        })
        .collect();
    let edges = scaled
        .net
        .edges()
        .iter()
        .map(|e| crate::network::Edge {
            id: e.id.clone(),
            from: e.from,
            to: e.to,
            kind: match &e.kind {
                EdgeKind::Pipe(p) => EdgeKind::Pipe(crate::network::PipeParams {
                    length: p.length * scales.length,
                    diameter: p.diameter * scales.length,
                    area: p.area * scales.area,
                    friction: p.friction,
                    sin_theta: p.sin_theta,
                }),
                EdgeKind::Compressor { ratio } => EdgeKind::Compressor { ratio: *ratio },
            },
        })
        .collect();
    Network::from_parts(nodes, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::DEFAULT_GAS_CONSTANT;
    use crate::network::{EdgeSpec, EdgeSpecKind, Node};

    fn ideal() -> EosModel {
        EosModel::ideal(DEFAULT_GAS_CONSTANT, 288.706).unwrap()
    }

    #[test]
    fn mass_flow_scale_is_density_times_velocity() {
        // rho0 chosen so the ideal sound speed is 400 m/s: any rho works.
        let model = EosModel::ideal(400.0, 400.0).unwrap();
        let s = NominalScales::new(1e5, 1.0, 5e6, 2.5, &model).unwrap();
        assert_eq!(s.mass_flow, 2.5);
        assert_eq!(s.area, 1.0);
        assert!((s.sound_speed - 400.0).abs() < 1e-12);
    }

    #[test]
    fn r2_does_not_depend_on_the_nominal_velocity() {
        let model = ideal();
        let a = NominalScales::new(1e5, 1.0, 5e6, 0.7, &model).unwrap();
        let b = NominalScales::new(1e5, 2.0, 5e6, 0.7, &model).unwrap();
        let (ga, gb) = (a.groups(), b.groups());
        assert!((gb.mach / ga.mach - 2.0).abs() < 1e-14);
        assert!((gb.froude / ga.froude - 2.0).abs() < 1e-14);
        assert!((ga.r2() - gb.r2()).abs() / ga.r2() < 1e-14);
    }

    #[test]
    fn yamal_groups_match_independent_evaluation() {
        // L0 = 122 km, p0 = 8.8 MPa, v0 = f/rho0 with f = 400 kg/s, ideal
        // EoS, nominal density at standard conditions. All values evaluated
        // independently from the definitions.
        let model = ideal();
        let rho0 = model.density(STANDARD_PRESSURE).unwrap();
        let v0 = 400.0 / rho0;
        let s = NominalScales::new(122_000.0, v0, 8.8e6, rho0, &model).unwrap();
        let g = s.groups();
        assert!((g.mach - 1.5270803476757975).abs() < 1e-12);
        assert!((g.euler - 86.84924747100914).abs() < 1e-10);
        assert!((g.froude - 0.5400576773242294).abs() < 1e-13);
        let area = std::f64::consts::PI * 1.422_f64.powi(2) / 4.0;
        let (r1, r2, beta) = g.pipe_groups(area, 1.422 / 122_000.0, 0.03);
        assert!((r1 - 0.010645831017250081).abs() < 1e-14);
        assert!((r2 - 0.09206136883816346).abs() < 1e-14);
        assert!((beta - 1286.9198312236288).abs() < 1e-9);
    }

    #[test]
    fn doubling_the_area_quarters_r1() {
        let model = ideal();
        let g = NominalScales::new(1e5, 1.0, 5e6, 0.7, &model).unwrap().groups();
        assert!((g.r1(2.0) - g.r1(1.0) / 4.0).abs() < 1e-16);
    }

    #[test]
    fn frictionless_pipe_has_zero_beta() {
        assert_eq!(DimensionlessGroups::beta(0.0, 0.5), 0.0);
    }

    fn sample_network() -> Network {
        Network::new(
            vec![
                Node {
                    id: "a".into(),
                    kind: NodeKind::Slack { pressure: 6e6 },
                    elevation: Some(120.0),
                },
                Node {
                    id: "b".into(),
                    kind: NodeKind::NonSlack { injection: -35.0 },
                    elevation: Some(480.0),
                },
                Node {
                    id: "c".into(),
                    kind: NodeKind::NonSlack { injection: 0.0 },
                    elevation: None,
                },
            ],
            vec![
                EdgeSpec {
                    id: "p1".into(),
                    from: "a".into(),
                    to: "b".into(),
                    kind: EdgeSpecKind::Pipe {
                        length: 40_000.0,
                        diameter: 0.8,
                        area: None,
                        friction: 0.015,
                        sin_theta: None,
                    },
                },
                EdgeSpec {
                    id: "c1".into(),
                    from: "b".into(),
                    to: "c".into(),
                    kind: EdgeSpecKind::Compressor { ratio: 1.25 },
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn scaling_round_trip_is_the_identity() {
        let net = sample_network();
        let model = ideal();
        let scales = NominalConfig::default().resolve(&net, &model).unwrap();
        let scaled = scale_network(&net, &scales, &model);
        let back = unscale_network(&scaled);
        assert_eq!(net.node_count(), back.node_count());
        for (orig, round) in net.nodes().iter().zip(back.nodes()) {
            assert_eq!(orig.id, round.id);
            match (orig.kind, round.kind) {
                (NodeKind::Slack { pressure: a }, NodeKind::Slack { pressure: b }) => {
                    assert!((a - b).abs() <= 1e-12 * a.abs())
                }
                (NodeKind::NonSlack { injection: a }, NodeKind::NonSlack { injection: b }) => {
                    assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0))
                }
                _ => panic!("node kind changed in the round trip"),
            }
        }
        for (orig, round) in net.edges().iter().zip(back.edges()) {
            match (orig.pipe_params(), round.pipe_params()) {
                (Some(a), Some(b)) => {
                    assert!((a.length - b.length).abs() <= 1e-12 * a.length);
                    assert!((a.diameter - b.diameter).abs() <= 1e-12 * a.diameter);
                    assert!((a.area - b.area).abs() <= 1e-12 * a.area);
                    assert_eq!(a.friction, b.friction);
                    assert_eq!(a.sin_theta, b.sin_theta);
                }
                (None, None) => {}
                _ => panic!("edge kind changed in the round trip"),
            }
        }
    }

    #[test]
    fn nominal_pressure_maps_to_unity() {
        let net = sample_network();
        let model = ideal();
        let scales = NominalConfig::default().resolve(&net, &model).unwrap();
        let scaled = scale_network(&net, &scales, &model);
        match scaled.net.nodes()[0].kind {
            NodeKind::Slack { pressure } => assert!((pressure - 1.0).abs() < 1e-15),
            _ => unreachable!(),
        }
    }

    #[test]
    fn default_nominal_length_is_the_longest_pipe() {
        let net = sample_network();
        let model = ideal();
        let scales = NominalConfig::default().resolve(&net, &model).unwrap();
        assert_eq!(scales.length, 40_000.0);
        let scaled = scale_network(&net, &scales, &model);
        assert_eq!(scaled.geometry(0).unwrap().length, 1.0);
        assert!(scaled.geometry(1).is_none());
    }

    #[test]
    fn identity_scales_leave_values_unchanged() {
        let net = sample_network();
        // Unit scales: the nondimensional values equal the SI ones.
        let model = EosModel::ideal(1.0, 1.0).unwrap();
        let scales = NominalScales::new(1.0, 1.0, 1.0, 1.0, &model).unwrap();
        let scaled = scale_network(&net, &scales, &model);
        let p = scaled.net.edges()[0].pipe_params().unwrap();
        let q = net.edges()[0].pipe_params().unwrap();
        assert_eq!(p.length, q.length);
        assert_eq!(p.diameter, q.diameter);
        match scaled.net.nodes()[0].kind {
            NodeKind::Slack { pressure } => assert_eq!(pressure, 6e6),
            _ => unreachable!(),
        }
    }

    #[test]
    fn non_positive_nominal_is_rejected() {
        let model = ideal();
        assert!(matches!(
            NominalScales::new(0.0, 1.0, 1.0, 1.0, &model),
            Err(ScaleError::NonPositive { name: "length", .. })
        ));
    }
}
