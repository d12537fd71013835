//! Group mobility for a formation of UAV groups.
//!
//! Leaders follow a Gauss-Markov process over speed, azimuth and elevation.
//! Ordinary nodes are re-drawn every tick at a random point of a ball of
//! radius `group_radius` centred on their leader's new position. Plain
//! Gauss-Markov (every node independent) and reference-point group mobility
//! (every node offset from a virtual reference point) are provided as
//! baselines.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Vec3;
use crate::rng::{SeedTree, Stream};

#[derive(Debug, Error, PartialEq)]
pub enum MobilityError {
    #[error("invalid mobility parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },
}

/// How the length of a random offset inside the group ball is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadialLaw {
    /// `d = R * U^(1/3)`: offsets are uniform over the ball's volume.
    #[default]
    Volume,
    /// `d = R * U`: offset length uniform on `[0, R]`.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MobilityParams {
    /// Memory factor in `[0, 1]`.
    pub alpha: f64,
    /// m/s
    pub mean_speed: f64,
    /// radians
    pub mean_azimuth: f64,
    /// radians
    pub mean_elevation: f64,
    pub sigma_speed: f64,
    pub sigma_azimuth: f64,
    pub sigma_elevation: f64,
    /// Seconds between two updates.
    pub tick: f64,
    /// Radius of the ball ordinary nodes are scattered in, meters.
    pub group_radius: f64,
    pub radial_law: RadialLaw,
}

impl Default for MobilityParams {
    fn default() -> Self {
        MobilityParams::marching()
    }
}

impl MobilityParams {
    /// Leader parameters of the reference marching scenario: 200 m/s mean
    /// speed, memory 0.5, heading 0, deviations (0, 0.2, 0.02).
    pub fn marching() -> Self {
        MobilityParams {
            alpha: 0.5,
            mean_speed: 200.0,
            mean_azimuth: 0.0,
            mean_elevation: 0.0,
            sigma_speed: 0.0,
            sigma_azimuth: 0.2,
            sigma_elevation: 0.02,
            tick: 0.1,
            group_radius: 100.0,
            radial_law: RadialLaw::Volume,
        }
    }

    pub fn validate(&self) -> Result<(), MobilityError> {
        let bad = |field, reason: &str| {
            Err(MobilityError::InvalidParam {
                field,
                reason: reason.to_string(),
            })
        };
        let finite = [
            ("alpha", self.alpha),
            ("mean_speed", self.mean_speed),
            ("mean_azimuth", self.mean_azimuth),
            ("mean_elevation", self.mean_elevation),
            ("sigma_speed", self.sigma_speed),
            ("sigma_azimuth", self.sigma_azimuth),
            ("sigma_elevation", self.sigma_elevation),
            ("tick", self.tick),
            ("group_radius", self.group_radius),
        ];
        for (field, v) in finite {
            if !v.is_finite() {
                return bad(field, "must be finite");
            }
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad("alpha", "must lie in [0, 1]");
        }
        if self.mean_speed < 0.0 {
            return bad("mean_speed", "must be >= 0");
        }
        for (field, v) in [
            ("sigma_speed", self.sigma_speed),
            ("sigma_azimuth", self.sigma_azimuth),
            ("sigma_elevation", self.sigma_elevation),
        ] {
            if v < 0.0 {
                return bad(field, "must be >= 0");
            }
        }
        if self.tick <= 0.0 {
            return bad("tick", "must be > 0");
        }
        if self.group_radius <= 0.0 {
            return bad("group_radius", "must be > 0");
        }
        Ok(())
    }
}

/// Kinematic state of a Gauss-Markov mover.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeaderState {
    pub position: Vec3,
    /// m/s, never negative.
    pub speed: f64,
    pub azimuth: f64,
    pub elevation: f64,
}

impl LeaderState {
    /// A mover at `position` travelling with the mean kinematics.
    pub fn at_mean(position: Vec3, params: &MobilityParams) -> Self {
        LeaderState {
            position,
            speed: params.mean_speed,
            azimuth: params.mean_azimuth,
            elevation: params.mean_elevation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Leader,
    Ordinary,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Leader => "leader",
            Role::Ordinary => "ordinary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeState {
    pub node_id: u32,
    pub group_id: u32,
    pub role: Role,
    pub position: Vec3,
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> f64 {
    // Always consume a draw so stream positions do not depend on sigma.
    let z: f64 = Normal::new(0.0, 1.0).expect("unit normal").sample(rng);
    z * sigma
}

/// Keeps `angle` within `(center - pi, center + pi]`.
fn wrap_around(angle: f64, center: f64) -> f64 {
    let offset = angle - center;
    if offset > -PI && offset <= PI {
        return angle;
    }
    let mut wrapped = (offset + PI).rem_euclid(TAU) - PI;
    if wrapped <= -PI {
        wrapped += TAU;
    }
    center + wrapped
}

/// One Gauss-Markov update.
///
/// The position moves with the kinematics held *before* the update; the
/// kinematics then relax toward their means with memory `alpha`.
pub fn step_leader<R: Rng + ?Sized>(
    state: &LeaderState,
    params: &MobilityParams,
    rng: &mut R,
) -> LeaderState {
    let a = params.alpha;
    let noise = (1.0 - a * a).max(0.0).sqrt();
    let kappa = gaussian(rng, params.sigma_speed);
    let rho = gaussian(rng, params.sigma_azimuth);
    let zeta = gaussian(rng, params.sigma_elevation);

    let speed = a * state.speed + (1.0 - a) * params.mean_speed + noise * kappa;
    let azimuth = a * state.azimuth + (1.0 - a) * params.mean_azimuth + noise * rho;
    let elevation = a * state.elevation + (1.0 - a) * params.mean_elevation + noise * zeta;

    let displacement = Vec3::from_spherical(state.speed * params.tick, state.azimuth, state.elevation);

    LeaderState {
        position: state.position + displacement,
        speed: speed.max(0.0),
        azimuth: wrap_around(azimuth, params.mean_azimuth),
        elevation: elevation.clamp(-FRAC_PI_2, FRAC_PI_2),
    }
}

/// Independent Gauss-Markov mover; identical law to [`step_leader`].
pub fn step_gm_baseline<R: Rng + ?Sized>(
    state: &LeaderState,
    params: &MobilityParams,
    rng: &mut R,
) -> LeaderState {
    step_leader(state, params, rng)
}

/// Random offset inside the group ball: azimuth uniform on `[0, 2pi)`,
/// elevation uniform on `[-pi/2, pi/2]`, length per `params.radial_law`.
pub fn ball_offset<R: Rng + ?Sized>(params: &MobilityParams, rng: &mut R) -> Vec3 {
    let u: f64 = rng.random();
    let gamma = rng.random::<f64>() * TAU;
    let delta = rng.random_range(-FRAC_PI_2..=FRAC_PI_2);
    let d = match params.radial_law {
        RadialLaw::Volume => params.group_radius * u.cbrt(),
        RadialLaw::Linear => params.group_radius * u,
    };
    Vec3::from_spherical(d, gamma, delta)
}

/// Position of an ordinary node once its leader has moved to `leader_new`.
pub fn step_ordinary<R: Rng + ?Sized>(leader_new: Vec3, params: &MobilityParams, rng: &mut R) -> Vec3 {
    leader_new + ball_offset(params, rng)
}

/// Every member of a reference-point group gets a fresh offset from the
/// group's reference point.
pub fn step_rpg_baseline<R: Rng + ?Sized>(
    reference: Vec3,
    members: usize,
    params: &MobilityParams,
    rng: &mut R,
) -> Vec<Vec3> {
    (0..members).map(|_| reference + ball_offset(params, rng)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MobilityModel {
    /// Gauss-Markov leaders, ordinary nodes scattered around them.
    Gmg,
    /// Every node an independent Gauss-Markov mover.
    Gm,
    /// Every node scattered around a Gauss-Markov reference point.
    Rpg,
}

impl MobilityModel {
    pub const ALL: [MobilityModel; 3] = [MobilityModel::Gmg, MobilityModel::Gm, MobilityModel::Rpg];

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.as_str() == s)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MobilityModel::Gmg => "gmg",
            MobilityModel::Gm => "gm",
            MobilityModel::Rpg => "rpg",
        }
    }
}

/// Groups start line abreast, perpendicular to the mean heading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormationLayout {
    pub groups: usize,
    pub nodes_per_group: usize,
    /// Distance between neighbouring group centres, meters.
    pub group_spacing: f64,
}

impl FormationLayout {
    pub fn node_count(&self) -> usize {
        self.groups * self.nodes_per_group
    }

    pub fn group_of(&self, node: usize) -> usize {
        node / self.nodes_per_group
    }

    /// The first node of every group is its leader.
    pub fn leader_of(&self, group: usize) -> usize {
        group * self.nodes_per_group
    }

    pub fn is_leader(&self, node: usize) -> bool {
        node.is_multiple_of(self.nodes_per_group)
    }
}

/// All node positions of a formation, advanced tick by tick.
#[derive(Debug, Clone)]
pub struct Formation {
    model: MobilityModel,
    params: MobilityParams,
    layout: FormationLayout,
    seeds: SeedTree,
    tick: u64,
    /// Gauss-Markov state per group (GMG leaders, RPG reference points).
    anchors: Vec<LeaderState>,
    /// Gauss-Markov state per node (GM only).
    movers: Vec<LeaderState>,
    positions: Vec<Vec3>,
}

impl Formation {
    pub fn new(
        model: MobilityModel,
        params: MobilityParams,
        layout: FormationLayout,
        seeds: SeedTree,
    ) -> Result<Self, MobilityError> {
        params.validate()?;
        if layout.groups == 0 || layout.nodes_per_group == 0 {
            return Err(MobilityError::InvalidParam {
                field: "layout",
                reason: "needs at least one group with one node".into(),
            });
        }
        if !layout.group_spacing.is_finite() || layout.group_spacing < 0.0 {
            return Err(MobilityError::InvalidParam {
                field: "group_spacing",
                reason: "must be finite and >= 0".into(),
            });
        }
        let lateral = Vec3::new(-params.mean_azimuth.sin(), params.mean_azimuth.cos(), 0.0);
        let anchors: Vec<LeaderState> = (0..layout.groups)
            .map(|g| {
                let s = g as f64 * layout.group_spacing;
                LeaderState::at_mean(Vec3::new(lateral.x * s, lateral.y * s, 0.0), &params)
            })
            .collect();

        let n = layout.node_count();
        let mut positions = Vec::with_capacity(n);
        for node in 0..n {
            let g = layout.group_of(node);
            let centre = anchors[g].position;
            let p = if model != MobilityModel::Rpg && layout.is_leader(node) {
                centre
            } else {
                let mut rng = seeds.stream(Stream::Placement, node as u64, 0);
                step_ordinary(centre, &params, &mut rng)
            };
            positions.push(p);
        }
        let movers = match model {
            MobilityModel::Gm => positions.iter().map(|&p| LeaderState::at_mean(p, &params)).collect(),
            _ => Vec::new(),
        };
        Ok(Formation {
            model,
            params,
            layout,
            seeds,
            tick: 0,
            anchors,
            movers,
            positions,
        })
    }

    pub fn model(&self) -> MobilityModel {
        self.model
    }

    pub fn params(&self) -> &MobilityParams {
        &self.params
    }

    pub fn layout(&self) -> &FormationLayout {
        &self.layout
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    /// Point a group coheres around: the leader under GMG, the reference
    /// point under RPG, the leader's own position under GM.
    pub fn anchor(&self, group: usize) -> Vec3 {
        match self.model {
            MobilityModel::Gm => self.positions[self.layout.leader_of(group)],
            _ => self.anchors[group].position,
        }
    }

    pub fn node_states(&self) -> Vec<NodeState> {
        self.positions
            .iter()
            .enumerate()
            .map(|(i, &position)| NodeState {
                node_id: i as u32,
                group_id: self.layout.group_of(i) as u32,
                role: if self.layout.is_leader(i) { Role::Leader } else { Role::Ordinary },
                position,
            })
            .collect()
    }

    /// Advances every node by one tick.
    pub fn advance(&mut self) {
        let next = self.tick + 1;
        let layout = self.layout;
        match self.model {
            MobilityModel::Gmg => {
                for g in 0..layout.groups {
                    let leader = layout.leader_of(g);
                    let mut rng = self.seeds.stream(Stream::Reference, g as u64, next);
                    self.anchors[g] = step_leader(&self.anchors[g], &self.params, &mut rng);
                    self.positions[leader] = self.anchors[g].position;
                }
                for node in 0..layout.node_count() {
                    if layout.is_leader(node) {
                        continue;
                    }
                    let centre = self.anchors[layout.group_of(node)].position;
                    let mut rng = self.seeds.stream(Stream::Mobility, node as u64, next);
                    self.positions[node] = step_ordinary(centre, &self.params, &mut rng);
                }
            }
            MobilityModel::Gm => {
                for (node, mover) in self.movers.iter_mut().enumerate() {
                    let mut rng = self.seeds.stream(Stream::Mobility, node as u64, next);
                    *mover = step_gm_baseline(mover, &self.params, &mut rng);
                    self.positions[node] = mover.position;
                }
            }
            MobilityModel::Rpg => {
                for g in 0..layout.groups {
                    let mut rng = self.seeds.stream(Stream::Reference, g as u64, next);
                    self.anchors[g] = step_leader(&self.anchors[g], &self.params, &mut rng);
                    let mut rng = self.seeds.stream(Stream::Mobility, g as u64, next);
                    let members =
                        step_rpg_baseline(self.anchors[g].position, layout.nodes_per_group, &self.params, &mut rng);
                    let first = layout.leader_of(g);
                    self.positions[first..first + layout.nodes_per_group].copy_from_slice(&members);
                }
            }
        }
        self.tick = next;
    }

    /// Largest distance between any node and its group's anchor.
    pub fn max_anchor_offset(&self) -> f64 {
        (0..self.layout.node_count())
            .map(|i| self.positions[i].distance(self.anchor(self.layout.group_of(i))))
            .fold(0.0, f64::max)
    }
}

pub const TRACE_HEADER: &str = "tick,node_id,group_id,role,x,y,z";

/// Appends one trace record per node for the formation's current tick.
pub fn write_trace_rows(out: &mut String, formation: &Formation) {
    write_state_rows(out, formation.tick(), &formation.node_states());
}

pub fn write_state_rows(out: &mut String, tick: u64, states: &[NodeState]) {
    for s in states {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            tick,
            s.node_id,
            s.group_id,
            s.role.as_str(),
            s.position.x,
            s.position.y,
            s.position.z
        );
    }
}

/// One parsed row of a mobility trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub tick: u64,
    pub node: NodeState,
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceRow>, String> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 {
            if line != TRACE_HEADER {
                return Err(format!("unexpected trace header `{line}`"));
            }
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(format!("line {}: expected 7 fields", lineno + 1));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| format!("line {}: {e}", lineno + 1));
        let int = |s: &str| s.parse::<u64>().map_err(|e| format!("line {}: {e}", lineno + 1));
        let role = match f[3] {
            "leader" => Role::Leader,
            "ordinary" => Role::Ordinary,
            other => return Err(format!("line {}: bad role `{other}`", lineno + 1)),
        };
        rows.push(TraceRow {
            tick: int(f[0])?,
            node: NodeState {
                node_id: int(f[1])? as u32,
                group_id: int(f[2])? as u32,
                role,
                position: Vec3::new(num(f[4])?, num(f[5])?, num(f[6])?),
            },
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SimRng;
    use rand::SeedableRng;

    fn rng(seed: u64) -> SimRng {
        SimRng::seed_from_u64(seed)
    }

    fn still(alpha: f64) -> MobilityParams {
        MobilityParams {
            alpha,
            sigma_speed: 0.0,
            sigma_azimuth: 0.0,
            sigma_elevation: 0.0,
            ..MobilityParams::marching()
        }
    }

    #[test]
    fn alpha_one_freezes_kinematics() {
        let p = MobilityParams { alpha: 1.0, sigma_speed: 30.0, ..MobilityParams::marching() };
        let s0 = LeaderState { position: Vec3::ZERO, speed: 123.0, azimuth: 0.3, elevation: -0.1 };
        let mut s = s0;
        let mut r = rng(1);
        for _ in 0..50 {
            s = step_leader(&s, &p, &mut r);
            assert_eq!(s.speed, s0.speed);
            assert_eq!(s.azimuth, s0.azimuth);
            assert_eq!(s.elevation, s0.elevation);
        }
    }

    #[test]
    fn half_memory_speed_update() {
        let p = still(0.5);
        let s = LeaderState { position: Vec3::ZERO, speed: 100.0, azimuth: 0.0, elevation: 0.0 };
        let next = step_leader(&s, &p, &mut rng(2));
        assert_eq!(next.speed, 150.0);
    }

    #[test]
    fn position_uses_pre_update_kinematics() {
        let p = MobilityParams { tick: 1.0, ..still(0.5) };
        let s = LeaderState { position: Vec3::ZERO, speed: 200.0, azimuth: 0.0, elevation: 0.0 };
        let next = step_leader(&s, &p, &mut rng(3));
        assert_eq!(next.position, Vec3::new(200.0, 0.0, 0.0));
        let s = LeaderState { speed: 50.0, ..s };
        let next = step_leader(&s, &p, &mut rng(3));
        assert_eq!(next.position.x, 50.0);
    }

    #[test]
    fn negative_speed_is_clamped() {
        let p = MobilityParams { sigma_speed: 1.0e4, ..MobilityParams::marching() };
        let mut s = LeaderState::at_mean(Vec3::ZERO, &p);
        let mut r = rng(4);
        for _ in 0..200 {
            s = step_leader(&s, &p, &mut r);
            assert!(s.speed >= 0.0);
        }
    }

    #[test]
    fn azimuth_stays_in_window_around_mean() {
        let p = MobilityParams { sigma_azimuth: 5.0, ..MobilityParams::marching() };
        let mut s = LeaderState::at_mean(Vec3::ZERO, &p);
        let mut r = rng(5);
        for _ in 0..500 {
            s = step_leader(&s, &p, &mut r);
            assert!(s.azimuth > p.mean_azimuth - PI && s.azimuth <= p.mean_azimuth + PI);
            assert!(s.elevation.abs() <= FRAC_PI_2);
        }
    }

    #[test]
    fn wrap_examples() {
        assert!((wrap_around(3.0 * PI / 2.0, 0.0) + PI / 2.0).abs() < 1e-12);
        assert_eq!(wrap_around(0.25, 0.0), 0.25);
        assert!((wrap_around(-3.5 * PI, 0.0) - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn gm_free_relaxation_moves_at_mean() {
        let p = MobilityParams { alpha: 0.0, tick: 1.0, ..still(0.0) };
        let mut s = LeaderState { position: Vec3::ZERO, speed: 10.0, azimuth: 1.0, elevation: 0.2 };
        s = step_gm_baseline(&s, &p, &mut rng(6));
        for k in 0..10 {
            let before = s.position;
            s = step_gm_baseline(&s, &p, &mut rng(6 + k));
            assert_eq!(s.speed, p.mean_speed);
            assert_eq!(s.azimuth, p.mean_azimuth);
            assert!((s.position - before).distance(Vec3::new(p.mean_speed, 0.0, 0.0)) < 1e-9);
        }
    }

    #[test]
    fn offsets_stay_in_ball() {
        for law in [RadialLaw::Volume, RadialLaw::Linear] {
            let p = MobilityParams { radial_law: law, group_radius: 37.0, ..MobilityParams::marching() };
            let mut r = rng(7);
            let centre = Vec3::new(5.0, -3.0, 9.0);
            for _ in 0..10_000 {
                assert!(step_ordinary(centre, &p, &mut r).distance(centre) <= 37.0 + 1e-9);
            }
        }
    }

    #[test]
    fn tiny_radius_collapses_onto_leader() {
        let p = MobilityParams { group_radius: 1e-12, ..MobilityParams::marching() };
        let centre = Vec3::new(100.0, 200.0, 300.0);
        let q = step_ordinary(centre, &p, &mut rng(8));
        assert!(q.distance(centre) <= 1e-12);
    }

    #[test]
    fn rpg_members_within_two_radii() {
        let p = MobilityParams { group_radius: 50.0, ..MobilityParams::marching() };
        let mut r = rng(9);
        for _ in 0..200 {
            let pts = step_rpg_baseline(Vec3::ZERO, 6, &p, &mut r);
            for a in &pts {
                assert!(a.norm() <= 50.0 + 1e-9);
                for b in &pts {
                    assert!(a.distance(*b) <= 100.0 + 1e-9);
                }
            }
        }
    }

    #[test]
    fn validation_rejects_bad_values() {
        let ok = MobilityParams::marching();
        assert!(ok.validate().is_ok());
        assert!(MobilityParams { alpha: 1.5, ..ok }.validate().is_err());
        assert!(MobilityParams { tick: 0.0, ..ok }.validate().is_err());
        assert!(MobilityParams { group_radius: 0.0, ..ok }.validate().is_err());
        assert!(MobilityParams { sigma_azimuth: -0.1, ..ok }.validate().is_err());
        assert!(MobilityParams { mean_speed: f64::NAN, ..ok }.validate().is_err());
    }

    #[test]
    fn formation_is_deterministic_and_cohesive() {
        let layout = FormationLayout { groups: 3, nodes_per_group: 4, group_spacing: 150.0 };
        for model in [MobilityModel::Gmg, MobilityModel::Rpg, MobilityModel::Gm] {
            let mut a = Formation::new(model, MobilityParams::marching(), layout, SeedTree::new(11)).unwrap();
            let mut b = a.clone();
            for _ in 0..100 {
                a.advance();
                b.advance();
                assert_eq!(a.positions(), b.positions());
                if model != MobilityModel::Gm {
                    assert!(a.max_anchor_offset() <= a.params().group_radius + 1e-9);
                }
            }
        }
    }

    #[test]
    fn gmg_leaders_sit_on_anchor() {
        let layout = FormationLayout { groups: 2, nodes_per_group: 3, group_spacing: 150.0 };
        let mut f = Formation::new(MobilityModel::Gmg, MobilityParams::marching(), layout, SeedTree::new(1)).unwrap();
        for _ in 0..10 {
            f.advance();
            for g in 0..2 {
                assert_eq!(f.positions()[layout.leader_of(g)], f.anchor(g));
            }
        }
        let states = f.node_states();
        assert_eq!(states.iter().filter(|s| s.role == Role::Leader).count(), 2);
    }

    #[test]
    fn trace_round_trips() {
        let layout = FormationLayout { groups: 2, nodes_per_group: 3, group_spacing: 150.0 };
        let mut f = Formation::new(MobilityModel::Gmg, MobilityParams::marching(), layout, SeedTree::new(3)).unwrap();
        let mut text = format!("{TRACE_HEADER}\n");
        write_trace_rows(&mut text, &f);
        f.advance();
        write_trace_rows(&mut text, &f);
        let rows = parse_trace(&text).unwrap();
        assert_eq!(rows.len(), 12);
        assert_eq!(rows[11].tick, 1);
        assert_eq!(rows[11].node.position, f.positions()[5]);
    }
}
