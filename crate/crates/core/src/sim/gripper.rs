use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::object::{perp, rotate, Vec2};
use crate::error::{Error, Result};
use crate::fold_geometry::{cross_section, FaceLabel, FrictionMode};
use crate::materials::{surface_mu, Catalogue, MaterialFinish, SurfaceSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fidelity {
    #[default]
    FlatEquivalent,
    Profiled,
}

impl FromStr for Fidelity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flat_equivalent" | "flat" => Ok(Fidelity::FlatEquivalent),
            "profiled" => Ok(Fidelity::Profiled),
            _ => Err(Error::Parse(format!("unknown fidelity `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];

    pub fn index(self) -> usize {
        match self {
            Side::Left => 0,
            Side::Right => 1,
        }
    }

    /// +1 when a positive (counter-clockwise) rotation closes this finger.
    pub fn closing_sign(self) -> f64 {
        match self {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

/// Friction coefficient of one finger in each mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeMu {
    pub hf: f64,
    pub lf: f64,
}

impl ModeMu {
    pub fn get(&self, mode: FrictionMode) -> f64 {
        match mode {
            FrictionMode::Hf => self.hf,
            FrictionMode::Lf => self.lf,
        }
    }
}

/// Two-finger gripper. Fingers hang from pivots at `(±pivot_separation/2, 0)`
/// and point along −y at zero angle; angles are counter-clockwise positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GripperModel {
    pub pivot_separation: f64,
    pub finger_surface_length: f64,
    /// Distance from the pivot to the proximal end of the contact surface,
    /// along the finger.
    pub surface_start: f64,
    /// Lateral offset from pivot to the contact surface plane in the
    /// surface's reference mode (high friction for folding surfaces).
    pub mount_offset: f64,
    /// Drive angle limits `[min, max]` (rad), shared by both fingers.
    pub angle_limits: [f64; 2],
    /// Largest grip closure the fingers can add on top of the drive angle (rad).
    pub max_closure: f64,
    /// Closure commanded beyond first grip load, held back by the load cap
    /// so the fingers keep following the object (rad).
    pub grip_reserve: f64,
    /// Penalty stiffness (N/mm).
    pub squeeze_stiffness: f64,
    /// Grip penetration (mm); the grip yields rather than squeeze further.
    pub squeeze_preload: f64,
    pub left_surface: SurfaceSpec,
    pub right_surface: SurfaceSpec,
    pub fidelity: Fidelity,
    /// Largest finger rotation per step (rad).
    pub step_cap: f64,
    /// Largest surface offset change per step while switching (mm).
    pub switch_ramp_step: f64,
    /// Features closer than this are reported as (open) contacts (mm).
    pub contact_margin: f64,
    /// Face alignment tolerance for planar contacts (rad).
    pub align_tol: f64,
    pub counterface: MaterialFinish,
    pub left_mu: ModeMu,
    pub right_mu: ModeMu,
}

impl GripperModel {
    pub fn new(left: SurfaceSpec, right: SurfaceSpec, fidelity: Fidelity, catalogue: &Catalogue) -> Result<Self> {
        let counterface = MaterialFinish::abs();
        let mu = |s: &SurfaceSpec| -> Result<ModeMu> {
            let get = |m: FrictionMode| surface_mu(catalogue, s, s.effective_mode(m), &counterface);
            Ok(ModeMu { hf: get(FrictionMode::Hf)?, lf: get(FrictionMode::Lf)? })
        };
        let g = Self {
            pivot_separation: 80.0,
            finger_surface_length: 140.0,
            surface_start: 5.0,
            mount_offset: 15.0,
            angle_limits: [-25f64.to_radians(), 25f64.to_radians()],
            max_closure: 50f64.to_radians(),
            grip_reserve: 10f64.to_radians(),
            squeeze_stiffness: 10.0,
            squeeze_preload: 1.0,
            left_mu: mu(&left)?,
            right_mu: mu(&right)?,
            left_surface: left,
            right_surface: right,
            fidelity,
            step_cap: 0.5f64.to_radians(),
            switch_ramp_step: 0.25,
            contact_margin: 1.0,
            align_tol: 0.5f64.to_radians(),
            counterface,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn with_nominal_gap(mut self, gap: f64) -> Result<Self> {
        self.mount_offset = 0.5 * (self.pivot_separation - gap);
        self.validate()?;
        Ok(self)
    }

    pub fn nominal_gap(&self) -> f64 {
        self.pivot_separation - 2.0 * self.mount_offset
    }

    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if !(self.nominal_gap() > 0.0) {
            bad.push(format!("nominal gap {} must be positive", self.nominal_gap()));
        }
        if !(self.squeeze_stiffness > 0.0) {
            bad.push("squeeze_stiffness must be positive".into());
        }
        if !(self.squeeze_preload > 0.0) {
            bad.push("squeeze_preload must be positive".into());
        }
        if !(self.finger_surface_length > 0.0) {
            bad.push("finger_surface_length must be positive".into());
        }
        if !(self.angle_limits[0] < self.angle_limits[1]) {
            bad.push("angle_limits must be increasing".into());
        }
        if !(self.grip_reserve >= 0.0) {
            bad.push("grip_reserve must be non-negative".into());
        }
        if !(self.step_cap > 0.0 && self.switch_ramp_step > 0.0) {
            bad.push("step sizes must be positive".into());
        }
        for s in [&self.left_surface, &self.right_surface] {
            if let Some(f) = s.fold() {
                crate::fold_geometry::validate_params(f, false)?;
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Kinematic(bad.join("; ")))
        }
    }

    pub fn surface(&self, side: Side) -> &SurfaceSpec {
        match side {
            Side::Left => &self.left_surface,
            Side::Right => &self.right_surface,
        }
    }

    pub fn mu(&self, side: Side, mode: FrictionMode) -> f64 {
        match side {
            Side::Left => self.left_mu.get(mode),
            Side::Right => self.right_mu.get(mode),
        }
    }

    pub fn pivot(&self, side: Side) -> Vec2 {
        let half = 0.5 * self.pivot_separation;
        match side {
            Side::Left => Vec2::new(-half, 0.0),
            Side::Right => Vec2::new(half, 0.0),
        }
    }

    /// Limits on the actual finger angle: drive limits widened by the
    /// largest grip closure.
    pub fn finger_limits(&self) -> [f64; 2] {
        let c = 0.5 * self.max_closure;
        [self.angle_limits[0] - c, self.angle_limits[1] + c]
    }

    /// Distance from the backing plane to the surface plane in the
    /// reference mode.
    fn backing(&self, side: Side) -> Result<f64> {
        let s = self.surface(side);
        let reference = s.effective_mode(FrictionMode::Hf);
        Ok(self.mount_offset - s.height(reference)?)
    }

    /// Surface profile in finger coordinates `(u, v)`: `u` runs distally
    /// from the proximal end of the surface, `v` is height above the backing.
    pub fn profile(&self, side: Side, mode: FrictionMode) -> Result<Profile> {
        let s = self.surface(side);
        let mode = s.effective_mode(mode);
        let len = self.finger_surface_length;
        match (self.fidelity, s.fold()) {
            (Fidelity::Profiled, Some(fold)) => {
                let cs = cross_section(fold, mode)?;
                let h = cs.height();
                let unit = 6;
                let steps: Vec<([f64; 2], [f64; 2], FaceLabel)> = cs.segments().take(unit).collect();
                let period = cs.period;
                let mut pts = vec![Vec2::new(0.0, h)];
                let mut labels = Vec::new();
                let mut x0 = 0.0;
                'tile: loop {
                    for &(a, b, lab) in &steps {
                        let (ua, ub) = (x0 + a[0], x0 + b[0]);
                        if ua >= len {
                            break 'tile;
                        }
                        if ub > len {
                            // Clip the last face at the end of the finger.
                            let f = (len - ua) / (ub - ua);
                            pts.push(Vec2::new(len, a[1] + f * (b[1] - a[1])));
                            labels.push(lab);
                            break 'tile;
                        }
                        if ub == ua && b[1] == a[1] {
                            continue;
                        }
                        pts.push(Vec2::new(ub, b[1]));
                        labels.push(lab);
                    }
                    x0 += period;
                }
                Ok(Profile { points: pts, labels, height: h })
            }
            _ => {
                let h = s.height(mode)?;
                Ok(Profile {
                    points: vec![Vec2::new(0.0, h), Vec2::new(len, h)],
                    labels: vec![FaceLabel::exposed(mode)],
                    height: h,
                })
            }
        }
    }
}

/// Surface polyline in finger coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub points: Vec<Vec2>,
    pub labels: Vec<FaceLabel>,
    /// Height of the topmost faces above the backing.
    pub height: f64,
}

/// One placed finger surface.
#[derive(Debug, Clone, PartialEq)]
pub struct FingerSurface {
    pub side: Side,
    pub pivot: Vec2,
    pub angle: f64,
    pub mode: FrictionMode,
    pub mu: f64,
    /// Unit vector along the finger, pointing to the tip.
    pub axis: Vec2,
    /// Unit vector normal to the backing, pointing at the other finger.
    pub inward: Vec2,
    /// Backing distance from the pivot line plus the switching offset.
    pub base_offset: f64,
    pub surface_start: f64,
    pub profile: Profile,
}

impl FingerSurface {
    pub fn to_world(&self, local: &Vec2) -> Vec2 {
        self.pivot + self.axis * (self.surface_start + local.x) + self.inward * (self.base_offset + local.y)
    }

    pub fn to_local(&self, p: &Vec2) -> Vec2 {
        let d = p - self.pivot;
        Vec2::new(d.dot(&self.axis) - self.surface_start, d.dot(&self.inward) - self.base_offset)
    }

    pub fn world_points(&self) -> Vec<Vec2> {
        self.profile.points.iter().map(|p| self.to_world(p)).collect()
    }

    /// Velocity of a surface-fixed point `p` per unit finger rotation.
    pub fn rotation_velocity(&self, p: &Vec2) -> Vec2 {
        perp(&(p - self.pivot))
    }

    /// Height of the profile at `u`, `None` past the ends.
    pub fn height_at(&self, u: f64) -> Option<f64> {
        let pts = &self.profile.points;
        if u < pts[0].x || u > pts[pts.len() - 1].x {
            return None;
        }
        let mut best: Option<f64> = None;
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if (a.x - b.x).abs() < 1e-12 {
                if (u - a.x).abs() < 1e-12 {
                    best = Some(best.map_or(a.y.max(b.y), |h: f64| h.max(a.y.max(b.y))));
                }
                continue;
            }
            let (lo, hi) = (a.x.min(b.x), a.x.max(b.x));
            if u >= lo && u <= hi {
                let h = a.y + (u - a.x) / (b.x - a.x) * (b.y - a.y);
                best = Some(best.map_or(h, |x: f64| x.max(h)));
            }
        }
        best
    }
}

/// Finger geometry for actual angles `theta` and modes. `offsets` shift each
/// surface along its inward normal (used while a mode switch ramps in).
pub fn forward_kinematics(
    g: &GripperModel,
    theta: [f64; 2],
    modes: [FrictionMode; 2],
    offsets: [f64; 2],
) -> Result<[FingerSurface; 2]> {
    let lim = g.finger_limits();
    for side in Side::BOTH {
        let t = theta[side.index()];
        if !(t >= lim[0] - 1e-12 && t <= lim[1] + 1e-12) {
            return Err(Error::Kinematic(format!(
                "{side} finger angle {:.3}° outside [{:.3}°, {:.3}°]",
                t.to_degrees(),
                lim[0].to_degrees(),
                lim[1].to_degrees()
            )));
        }
    }
    let make = |side: Side| -> Result<FingerSurface> {
        let i = side.index();
        let angle = theta[i];
        let axis = rotate(&Vec2::new(0.0, -1.0), angle);
        let inward = rotate(&Vec2::new(side.closing_sign(), 0.0), angle);
        let mode = g.surface(side).effective_mode(modes[i]);
        Ok(FingerSurface {
            side,
            pivot: g.pivot(side),
            angle,
            mode,
            mu: g.mu(side, mode),
            axis,
            inward,
            base_offset: g.backing(side)? + offsets[i],
            surface_start: g.surface_start,
            profile: g.profile(side, mode)?,
        })
    };
    Ok([make(Side::Left)?, make(Side::Right)?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fold_geometry::{delta_h, FoldParameters};
    use approx::assert_abs_diff_eq;

    fn ovf() -> SurfaceSpec {
        SurfaceSpec::ovf(FoldParameters::with_faces(5.0, 5.0, 30f64.to_radians(), 5))
    }

    fn gap_at(fs: &[FingerSurface; 2], u: f64) -> f64 {
        let h = fs[0].profile.height;
        let a = fs[0].to_world(&Vec2::new(u, h));
        let h = fs[1].profile.height;
        let b = fs[1].to_world(&Vec2::new(u, h));
        (b - a).norm()
    }

    #[test]
    fn parallel_gap_is_nominal() {
        let g = GripperModel::new(ovf(), SurfaceSpec::constant_low(), Fidelity::FlatEquivalent, &Catalogue::default())
            .unwrap();
        let hf = [FrictionMode::Hf; 2];
        let fs = forward_kinematics(&g, [0.0, 0.0], hf, [0.0; 2]).unwrap();
        assert_abs_diff_eq!(gap_at(&fs, 40.0), g.nominal_gap(), epsilon = 1e-9);
        assert_abs_diff_eq!(g.nominal_gap(), 50.0, epsilon = 1e-12);
    }

    #[test]
    fn switching_moves_surface_by_delta_h() {
        let g = GripperModel::new(ovf(), ovf(), Fidelity::FlatEquivalent, &Catalogue::default()).unwrap();
        let a = forward_kinematics(&g, [0.0, 0.0], [FrictionMode::Hf; 2], [0.0; 2]).unwrap();
        let b = forward_kinematics(&g, [0.0, 0.0], [FrictionMode::Hf, FrictionMode::Lf], [0.0; 2]).unwrap();
        let dh = delta_h(g.right_surface.fold().unwrap()).unwrap();
        assert_abs_diff_eq!(gap_at(&a, 30.0) - gap_at(&b, 30.0), dh, epsilon = 1e-9);
    }

    #[test]
    fn co_rotation_gap_is_even_in_angle() {
        let g = GripperModel::new(ovf(), ovf(), Fidelity::FlatEquivalent, &Catalogue::default()).unwrap();
        let mid = 0.5 * g.finger_surface_length;
        let gap = |t: f64| {
            let fs = forward_kinematics(&g, [t, t], [FrictionMode::Hf; 2], [0.0; 2]).unwrap();
            gap_at(&fs, mid)
        };
        assert_abs_diff_eq!(gap(0.2), gap(-0.2), epsilon = 1e-9);
        assert_abs_diff_eq!(gap(0.0), g.nominal_gap(), epsilon = 1e-9);
    }

    #[test]
    fn out_of_limit_angle_is_rejected() {
        let g = GripperModel::new(ovf(), ovf(), Fidelity::FlatEquivalent, &Catalogue::default()).unwrap();
        let r = forward_kinematics(&g, [1.0, 0.0], [FrictionMode::Hf; 2], [0.0; 2]);
        assert!(matches!(r, Err(Error::Kinematic(_))));
    }

    #[test]
    fn profiled_tiles_full_length() {
        let g = GripperModel::new(ovf(), ovf(), Fidelity::Profiled, &Catalogue::default()).unwrap();
        for mode in [FrictionMode::Hf, FrictionMode::Lf] {
            let p = g.profile(Side::Left, mode).unwrap();
            assert_abs_diff_eq!(p.points.last().unwrap().x, g.finger_surface_length, epsilon = 1e-9);
            assert!(p.points.windows(2).all(|w| w[1].x >= w[0].x - 1e-12));
            assert_eq!(p.labels.len() + 1, p.points.len());
        }
    }
}
