//! Open-loop manipulation sequences as phase lists.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fold_geometry::FrictionMode;
use crate::sim::GripperModel;

const MARGIN: f64 = 1.0 * std::f64::consts::PI / 180.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanKind {
    #[serde(alias = "translation")]
    Translate,
    #[serde(alias = "rotation")]
    Rotate,
}

impl FromStr for PlanKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "translate" | "translation" => Ok(PlanKind::Translate),
            "rotate" | "rotation" => Ok(PlanKind::Rotate),
            _ => Err(Error::Parse(format!("unknown plan `{s}` (translate|rotate)"))),
        }
    }
}

impl fmt::Display for PlanKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlanKind::Translate => "translate",
            PlanKind::Rotate => "rotate",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Distal,
    Proximal,
    Clockwise,
    Counterclockwise,
}

impl Direction {
    pub fn opposite(self) -> Self {
        match self {
            Direction::Distal => Direction::Proximal,
            Direction::Proximal => Direction::Distal,
            Direction::Clockwise => Direction::Counterclockwise,
            Direction::Counterclockwise => Direction::Clockwise,
        }
    }

    pub fn is_translation(self) -> bool {
        matches!(self, Direction::Distal | Direction::Proximal)
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "distal" => Ok(Direction::Distal),
            "proximal" => Ok(Direction::Proximal),
            "clockwise" | "cw" => Ok(Direction::Clockwise),
            "counterclockwise" | "ccw" => Ok(Direction::Counterclockwise),
            _ => Err(Error::Parse(format!("unknown direction `{s}`"))),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Distal => "distal",
            Direction::Proximal => "proximal",
            Direction::Clockwise => "clockwise",
            Direction::Counterclockwise => "counterclockwise",
        })
    }
}

/// Friction modes to set, then drive angles to reach (rad).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    #[serde(default)]
    pub label: String,
    pub mode_left: FrictionMode,
    pub mode_right: FrictionMode,
    pub target_theta_left: f64,
    pub target_theta_right: f64,
}

impl Phase {
    fn new(label: &str, modes: [FrictionMode; 2], target: f64) -> Self {
        Self {
            label: label.into(),
            mode_left: modes[0],
            mode_right: modes[1],
            target_theta_left: target,
            target_theta_right: target,
        }
    }

    pub fn modes(&self) -> [FrictionMode; 2] {
        [self.mode_left, self.mode_right]
    }

    pub fn target(&self) -> [f64; 2] {
        [self.target_theta_left, self.target_theta_right]
    }

    fn swap_modes(&self) -> Self {
        Self { mode_left: self.mode_right, mode_right: self.mode_left, ..self.clone() }
    }

    fn negate(&self) -> Self {
        Self {
            target_theta_left: -self.target_theta_right,
            target_theta_right: -self.target_theta_left,
            ..self.swap_modes()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManipulationPlan {
    pub kind: PlanKind,
    pub direction: Direction,
    pub cycles: u32,
    /// Drive angles the plan starts from and every cycle returns to.
    #[serde(default)]
    pub start: [f64; 2],
    /// All phases, cycles already expanded.
    pub phases: Vec<Phase>,
}

use FrictionMode::{Hf, Lf};

/// Distal/proximal translation: grasp with the right finger slippery, rotate
/// clockwise to the limit, swap modes, rotate counter-clockwise to the limit,
/// swap back and return clockwise to the start.
pub fn build_translation_plan(g: &GripperModel, direction: Direction, cycles: u32) -> Result<ManipulationPlan> {
    check_cycles(cycles)?;
    let max = g.angle_limits[1] - MARGIN;
    let min = g.angle_limits[0] + MARGIN;
    let cycle = vec![
        Phase::new("grasp", [Hf, Lf], 0.0),
        Phase::new("rotate-cw", [Hf, Lf], min),
        Phase::new("rotate-ccw", [Lf, Hf], max),
        Phase::new("return-cw", [Hf, Lf], 0.0),
    ];
    let distal = expand(PlanKind::Translate, Direction::Distal, cycles, cycle);
    match direction {
        Direction::Distal => Ok(distal),
        Direction::Proximal => Ok(reverse_plan(&distal)),
        d => Err(Error::Plan(format!("translation direction must be distal or proximal, got {d}"))),
    }
}

/// Rotation: grasp with the right finger slippery and pre-slide clockwise
/// over half the clockwise range, rotate counter-clockwise to the limit with
/// both fingers sticky, make the left finger slippery and return.
pub fn build_rotation_plan(g: &GripperModel, direction: Direction, cycles: u32) -> Result<ManipulationPlan> {
    check_cycles(cycles)?;
    let max = g.angle_limits[1] - MARGIN;
    let min = g.angle_limits[0] + MARGIN;
    let cycle = vec![
        Phase::new("grasp-preslide", [Hf, Lf], 0.5 * min),
        Phase::new("rotate-ccw", [Hf, Hf], max),
        Phase::new("return-cw", [Lf, Hf], 0.0),
    ];
    let cw = expand(PlanKind::Rotate, Direction::Clockwise, cycles, cycle);
    match direction {
        Direction::Clockwise => Ok(cw),
        Direction::Counterclockwise => Ok(reverse_plan(&cw)),
        d => Err(Error::Plan(format!("rotation direction must be clockwise or counterclockwise, got {d}"))),
    }
}

pub fn build_plan(g: &GripperModel, kind: PlanKind, direction: Direction, cycles: u32) -> Result<ManipulationPlan> {
    match kind {
        PlanKind::Translate => build_translation_plan(g, direction, cycles),
        PlanKind::Rotate => build_rotation_plan(g, direction, cycles),
    }
}

fn check_cycles(cycles: u32) -> Result<()> {
    if cycles == 0 {
        return Err(Error::Plan("cycles must be at least 1".into()));
    }
    Ok(())
}

fn expand(kind: PlanKind, direction: Direction, cycles: u32, cycle: Vec<Phase>) -> ManipulationPlan {
    let phases = (0..cycles).flat_map(|_| cycle.iter().cloned()).collect();
    ManipulationPlan { kind, direction, cycles, start: [0.0; 2], phases }
}

/// The plan driving the object the opposite way.
///
/// A translation plan gets its left/right mode schedule mirrored. A rotation
/// plan is mirrored about the finger axis: modes swap sides and every finger
/// rotation changes sense.
pub fn reverse_plan(p: &ManipulationPlan) -> ManipulationPlan {
    let phases = match p.kind {
        PlanKind::Translate => p.phases.iter().map(Phase::swap_modes).collect(),
        PlanKind::Rotate => p.phases.iter().map(Phase::negate).collect(),
    };
    let start = match p.kind {
        PlanKind::Translate => p.start,
        PlanKind::Rotate => [-p.start[1], -p.start[0]],
    };
    ManipulationPlan { kind: p.kind, direction: p.direction.opposite(), cycles: p.cycles, start, phases }
}

impl ManipulationPlan {
    pub fn cycle_len(&self) -> usize {
        if self.cycles == 0 {
            0
        } else {
            self.phases.len() / self.cycles as usize
        }
    }

    /// Checks targets against the gripper limits and that every cycle ends
    /// at the start angles.
    pub fn validate(&self, g: &GripperModel) -> Result<()> {
        if self.cycles == 0 {
            return Err(Error::Plan("cycles must be at least 1".into()));
        }
        if self.phases.len() % self.cycles as usize != 0 {
            return Err(Error::Plan("phase count is not a whole number of cycles".into()));
        }
        let [lo, hi] = g.angle_limits;
        for (i, ph) in self.phases.iter().enumerate() {
            for t in ph.target() {
                if !(t >= lo - 1e-12 && t <= hi + 1e-12) {
                    return Err(Error::Plan(format!(
                        "phase {i} target {:.3}° outside [{:.3}°, {:.3}°]",
                        t.to_degrees(),
                        lo.to_degrees(),
                        hi.to_degrees()
                    )));
                }
            }
        }
        for s in self.start {
            if !(s >= lo && s <= hi) {
                return Err(Error::Plan("start angle outside limits".into()));
            }
        }
        let n = self.cycle_len();
        if n > 0 {
            for c in 0..self.cycles as usize {
                let last = &self.phases[(c + 1) * n - 1];
                if (last.target()[0] - self.start[0]).abs() > 1e-12 || (last.target()[1] - self.start[1]).abs() > 1e-12 {
                    return Err(Error::Plan(format!("cycle {c} does not return to the start angles")));
                }
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::{Catalogue, SurfacePreset};
    use crate::sim::Fidelity;

    fn gripper() -> GripperModel {
        let s = SurfacePreset::OvfMedium.spec();
        GripperModel::new(s.clone(), s, Fidelity::FlatEquivalent, &Catalogue::default()).unwrap()
    }

    #[test]
    fn translation_schedule() {
        let g = gripper();
        let p = build_translation_plan(&g, Direction::Distal, 1).unwrap();
        assert_eq!(p.phases.len(), 4);
        let modes: Vec<_> = p.phases.iter().map(|ph| ph.modes()).collect();
        assert_eq!(modes, vec![[Hf, Lf], [Hf, Lf], [Lf, Hf], [Hf, Lf]]);
        assert!(p.phases[1].target_theta_left < 0.0 && p.phases[2].target_theta_left > 0.0);
        p.validate(&g).unwrap();
    }

    #[test]
    fn cycles_repeat() {
        let g = gripper();
        let one = build_translation_plan(&g, Direction::Distal, 1).unwrap();
        let two = build_translation_plan(&g, Direction::Distal, 2).unwrap();
        assert_eq!(two.phases[..4], one.phases[..]);
        assert_eq!(two.phases[4..], one.phases[..]);
    }

    #[test]
    fn proximal_mirrors_modes() {
        let g = gripper();
        let d = build_translation_plan(&g, Direction::Distal, 1).unwrap();
        let p = build_translation_plan(&g, Direction::Proximal, 1).unwrap();
        for (a, b) in d.phases.iter().zip(&p.phases) {
            assert_eq!(a.mode_left, b.mode_right);
            assert_eq!(a.mode_right, b.mode_left);
            assert_eq!(a.target(), b.target());
        }
        assert_eq!(reverse_plan(&d), p);
    }

    #[test]
    fn rotation_schedule() {
        let g = gripper();
        let p = build_rotation_plan(&g, Direction::Clockwise, 1).unwrap();
        assert_eq!(p.phases.len(), 3);
        assert_eq!(p.phases[1].modes(), [Hf, Hf]);
        assert_eq!(p.phases[2].modes(), [Lf, Hf]);
        let half = 0.5 * (g.angle_limits[0] + MARGIN);
        assert!((p.phases[0].target_theta_left - half).abs() < 1e-12);
        p.validate(&g).unwrap();
        let r = build_rotation_plan(&g, Direction::Counterclockwise, 1).unwrap();
        assert_eq!(r.phases[2].modes(), [Hf, Lf]);
        assert!(r.phases[1].target_theta_left < 0.0);
    }

    #[test]
    fn zero_cycles_rejected() {
        assert!(build_translation_plan(&gripper(), Direction::Distal, 0).is_err());
    }

    #[test]
    fn wrong_direction_rejected() {
        assert!(build_translation_plan(&gripper(), Direction::Clockwise, 1).is_err());
        assert!(build_rotation_plan(&gripper(), Direction::Distal, 1).is_err());
    }

    #[test]
    fn toml_round_trip() {
        let p = build_rotation_plan(&gripper(), Direction::Counterclockwise, 2).unwrap();
        assert_eq!(ManipulationPlan::from_toml(&p.to_toml().unwrap()).unwrap(), p);
    }
}
