use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::gripper::{Fidelity, GripperModel};
use super::object::{Pose2, RigidObject2D, Shape};
use super::world::{grasp, WorldState};
use crate::error::{Error, Result};
use crate::fold_geometry::FrictionMode;
use crate::materials::{Catalogue, SurfacePreset, SurfaceSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SurfaceChoice {
    Preset(SurfacePreset),
    Spec(SurfaceSpec),
}

impl SurfaceChoice {
    pub fn spec(&self) -> SurfaceSpec {
        match self {
            SurfaceChoice::Preset(p) => p.spec(),
            SurfaceChoice::Spec(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectConfig {
    pub shape: Shape,
    pub width: f64,
    /// Lateral offset from the gripper centre line (mm).
    #[serde(default)]
    pub x: f64,
    /// Distance of the object centre from the pivot line (mm); defaults to
    /// the middle of the finger surface.
    #[serde(default)]
    pub axial: Option<f64>,
    #[serde(default)]
    pub yaw_deg: f64,
}

/// Optional changes to the default gripper. Angles in degrees.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GripperOverrides {
    pub pivot_separation: Option<f64>,
    pub finger_surface_length: Option<f64>,
    pub surface_start: Option<f64>,
    pub nominal_gap: Option<f64>,
    pub angle_limit_deg: Option<f64>,
    pub max_closure_deg: Option<f64>,
    pub grip_reserve_deg: Option<f64>,
    pub squeeze_stiffness: Option<f64>,
    pub squeeze_preload: Option<f64>,
    pub step_cap_deg: Option<f64>,
    pub switch_ramp_step: Option<f64>,
    pub contact_margin: Option<f64>,
    pub align_tol_deg: Option<f64>,
}

/// Uniform initial-pose jitter half-widths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Jitter {
    pub translation_mm: f64,
    pub rotation_deg: f64,
}

impl Default for Jitter {
    fn default() -> Self {
        Self { translation_mm: 1.0, rotation_deg: 1.0 }
    }
}

impl Jitter {
    pub fn none() -> Self {
        Self { translation_mm: 0.0, rotation_deg: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub fidelity: Fidelity,
    pub left_surface: SurfaceChoice,
    pub right_surface: SurfaceChoice,
    pub object: ObjectConfig,
    #[serde(default)]
    pub gripper: GripperOverrides,
    #[serde(default)]
    pub jitter: Jitter,
}

impl Scenario {
    pub fn new(surface: SurfacePreset, object: ObjectConfig) -> Self {
        Self {
            seed: 0,
            fidelity: Fidelity::FlatEquivalent,
            left_surface: SurfaceChoice::Preset(surface),
            right_surface: SurfaceChoice::Preset(surface),
            object,
            gripper: GripperOverrides::default(),
            jitter: Jitter::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn gripper(&self, catalogue: &Catalogue) -> Result<GripperModel> {
        let mut g = GripperModel::new(self.left_surface.spec(), self.right_surface.spec(), self.fidelity, catalogue)?;
        let o = &self.gripper;
        let deg = f64::to_radians;
        if let Some(v) = o.pivot_separation {
            let gap = g.nominal_gap();
            g.pivot_separation = v;
            g.mount_offset = 0.5 * (v - gap);
        }
        if let Some(v) = o.finger_surface_length {
            g.finger_surface_length = v;
        }
        if let Some(v) = o.surface_start {
            g.surface_start = v;
        }
        if let Some(v) = o.nominal_gap {
            g = g.with_nominal_gap(v)?;
        }
        if let Some(v) = o.angle_limit_deg {
            g.angle_limits = [-deg(v), deg(v)];
        }
        if let Some(v) = o.max_closure_deg {
            g.max_closure = deg(v);
        }
        if let Some(v) = o.grip_reserve_deg {
            g.grip_reserve = deg(v);
        }
        if let Some(v) = o.squeeze_stiffness {
            g.squeeze_stiffness = v;
        }
        if let Some(v) = o.squeeze_preload {
            g.squeeze_preload = v;
        }
        if let Some(v) = o.step_cap_deg {
            g.step_cap = deg(v);
        }
        if let Some(v) = o.switch_ramp_step {
            g.switch_ramp_step = v;
        }
        if let Some(v) = o.contact_margin {
            g.contact_margin = v;
        }
        if let Some(v) = o.align_tol_deg {
            g.align_tol = deg(v);
        }
        g.validate()?;
        Ok(g)
    }

    /// Object at its nominal pose.
    pub fn object(&self, g: &GripperModel) -> Result<RigidObject2D> {
        let o = &self.object;
        let axial = o.axial.unwrap_or(g.surface_start + 0.5 * g.finger_surface_length);
        RigidObject2D::new(o.shape, o.width, Pose2::new(o.x, -axial, o.yaw_deg.to_radians()))
    }

    /// Object pose for `trial`, jittered from a per-trial seeded stream.
    pub fn jittered_object(&self, g: &GripperModel, trial: u64) -> Result<RigidObject2D> {
        let mut obj = self.object(g)?;
        let j = self.jitter;
        if j.translation_mm == 0.0 && j.rotation_deg == 0.0 {
            return Ok(obj);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial);
        let mut u = || -> f64 { rng.random_range(-1.0..=1.0) };
        obj.pose.x += j.translation_mm * u();
        obj.pose.y += j.translation_mm * u();
        obj.pose.yaw += j.rotation_deg.to_radians() * u();
        Ok(obj)
    }

    /// Grasped start state for `trial` with the fingers at `drive`.
    pub fn initial_world(
        &self,
        g: &GripperModel,
        trial: u64,
        modes: [FrictionMode; 2],
        drive: [f64; 2],
    ) -> Result<WorldState> {
        let obj = self.jittered_object(g, trial)?;
        let w = WorldState::new(g, obj, modes).with_drive(drive[0], drive[1]);
        grasp(g, &w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = r#"
seed = 7
fidelity = "profiled"
left_surface = "ovf-medium"
right_surface = "constant-lf"

[object]
shape = "square"
width = 50.0

[jitter]
translation_mm = 0.5
rotation_deg = 0.0
"#;

    #[test]
    fn parses_presets() {
        let s = Scenario::from_toml(TEXT).unwrap();
        assert_eq!(s.left_surface, SurfaceChoice::Preset(SurfacePreset::OvfMedium));
        assert_eq!(s.fidelity, Fidelity::Profiled);
        let g = s.gripper(&Catalogue::default()).unwrap();
        assert!((g.nominal_gap() - 50.0).abs() < 1e-12);
        assert_eq!(Scenario::from_toml(&s.to_toml().unwrap()).unwrap(), s);
    }

    #[test]
    fn jitter_is_seeded_and_bounded() {
        let s = Scenario::from_toml(TEXT).unwrap();
        let g = s.gripper(&Catalogue::default()).unwrap();
        let a = s.jittered_object(&g, 3).unwrap();
        let b = s.jittered_object(&g, 3).unwrap();
        let c = s.jittered_object(&g, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let nominal = s.object(&g).unwrap();
        assert!((a.pose.x - nominal.pose.x).abs() <= 0.5);
        assert_eq!(a.pose.yaw, nominal.pose.yaw);
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(Scenario::from_toml(&format!("{TEXT}\nbogus = 1\n")).is_err());
    }
}
