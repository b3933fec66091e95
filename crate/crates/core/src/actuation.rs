//! Folding the surface between modes: actuation travel, a lumped
//! hinge-spring force profile, and the mode-switch state machine.
//!
//! The fold is parametrised by the fold angle `psi` in `[0, alpha]`. Every
//! unit carries two hinges that each bend by `psi`, so the stored energy is
//! `E = N * kappa * psi^2`. The horizontal contraction of the surface is
//!
//! ```text
//! x(psi) = N * (m * (sin(alpha) - sin(alpha - psi)) + (k - l) * (1 - cos(psi)))
//! ```
//!
//! which reaches the full fold travel at `psi = alpha`. The actuation force
//! is `F = dE/dx = (dE/dpsi) / (dx/dpsi)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fold_geometry::{validate_params, FoldParameters, FrictionMode};

/// Peak folding force used to calibrate the hinge stiffness (N), for the
/// 30° medium-density surface.
pub const REFERENCE_PEAK_FORCE: f64 = 2.67;

/// Horizontal contraction of the whole surface from the flat (high-friction)
/// state to the folded (low-friction) state (mm).
pub fn fold_travel(p: &FoldParameters) -> Result<f64> {
    validate_params(p, false)?;
    Ok(displacement_at(p, p.alpha))
}

/// Contraction after folding by `psi` (mm).
pub fn displacement_at(p: &FoldParameters, psi: f64) -> f64 {
    let n = p.n_units as f64;
    n * (p.m * (p.alpha.sin() - (p.alpha - psi).sin()) + (p.k() - p.l) * (1.0 - psi.cos()))
}

fn displacement_rate(p: &FoldParameters, psi: f64) -> f64 {
    let n = p.n_units as f64;
    n * (p.m * (p.alpha - psi).cos() + (p.k() - p.l) * psi.sin())
}

/// Elastic energy stored in all hinges after folding by `psi` (N·mm).
pub fn fold_energy(p: &FoldParameters, kappa: f64, psi: f64) -> f64 {
    p.n_units as f64 * kappa * psi * psi
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldForceProfile {
    pub displacement: Vec<f64>,
    pub force: Vec<f64>,
    /// Fold angle at each sample (rad).
    pub angle: Vec<f64>,
    pub kappa: f64,
}

impl FoldForceProfile {
    pub fn peak(&self) -> f64 {
        self.force.iter().copied().fold(0.0, f64::max)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["displacement_mm", "force_N"])?;
        for (x, f) in self.displacement.iter().zip(&self.force) {
            out.write_record([x.to_string(), f.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Samples the actuation force over the full fold with hinge stiffness
/// `kappa` (N·mm/rad).
pub fn fold_force_profile(p: &FoldParameters, kappa: f64, samples: usize) -> Result<FoldForceProfile> {
    validate_params(p, false)?;
    if !(kappa > 0.0) {
        return Err(Error::Domain(format!("kappa must be positive, got {kappa}")));
    }
    if samples < 2 {
        return Err(Error::Domain("need at least 2 samples".into()));
    }
    let n = p.n_units as f64;
    let mut displacement = Vec::with_capacity(samples);
    let mut force = Vec::with_capacity(samples);
    let mut angle = Vec::with_capacity(samples);
    for i in 0..samples {
        let psi = p.alpha * i as f64 / (samples - 1) as f64;
        let rate = displacement_rate(p, psi);
        if rate <= 0.0 {
            return Err(Error::Domain(format!(
                "fold contraction is not monotone at psi = {psi:.4} rad (k much shorter than l)"
            )));
        }
        displacement.push(displacement_at(p, psi));
        force.push(2.0 * n * kappa * psi / rate);
        angle.push(psi);
    }
    Ok(FoldForceProfile { displacement, force, angle, kappa })
}

/// Hinge stiffness whose force profile peaks at `target_peak_force`.
pub fn calibrate_kappa(p: &FoldParameters, target_peak_force: f64) -> Result<f64> {
    if !(target_peak_force > 0.0) {
        return Err(Error::Calibration(format!("target force must be positive, got {target_peak_force}")));
    }
    let travel = fold_travel(p)?;
    if !(travel.abs() > 1e-12) {
        return Err(Error::Calibration("fold has zero travel".into()));
    }
    // Force is linear in kappa, so one unit-stiffness evaluation suffices.
    let unit = fold_force_profile(p, 1.0, 201).map_err(|e| Error::Calibration(e.to_string()))?;
    let peak = unit.peak();
    if !(peak > 0.0) {
        return Err(Error::Calibration("unit-stiffness profile has no positive force".into()));
    }
    Ok(target_peak_force / peak)
}

/// The reference surface used for calibration: l = k = 5 mm, 30°, N = 5.
pub fn reference_fold() -> FoldParameters {
    FoldParameters::with_faces(5.0, 5.0, 30f64.to_radians(), 5)
}

/// Hinge stiffness calibrated on [`reference_fold`] (N·mm/rad).
pub fn default_kappa() -> f64 {
    calibrate_kappa(&reference_fold(), REFERENCE_PEAK_FORCE).expect("reference fold is valid")
}

/// Friction-mode state of one folding surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSwitchState {
    pub current: FrictionMode,
    pub pending: Option<FrictionMode>,
    /// Time a switch takes (s).
    pub switch_time: f64,
    pub elapsed: f64,
}

impl ModeSwitchState {
    pub fn new(current: FrictionMode) -> Self {
        Self { current, pending: None, switch_time: 0.0, elapsed: 0.0 }
    }

    pub fn with_switch_time(mut self, switch_time: f64) -> Self {
        self.switch_time = switch_time.max(0.0);
        self
    }

    pub fn switching(&self) -> bool {
        self.pending.is_some()
    }

    /// Lets `dt` seconds pass; completes a pending switch once its time is up.
    pub fn advance(mut self, dt: f64) -> Self {
        if let Some(target) = self.pending {
            self.elapsed += dt;
            if self.elapsed >= self.switch_time {
                self.current = target;
                self.pending = None;
                self.elapsed = 0.0;
            }
        }
        self
    }

    /// Time left until the pending switch completes.
    pub fn remaining(&self) -> f64 {
        if self.switching() {
            (self.switch_time - self.elapsed).max(0.0)
        } else {
            0.0
        }
    }
}

/// Starts a switch to `target`. Switching to the current mode is a no-op.
pub fn switch_mode(state: ModeSwitchState, target: FrictionMode) -> Result<ModeSwitchState> {
    if let Some(pending) = state.pending {
        return Err(Error::Sequencing(format!(
            "switch to {target} requested while switching {} -> {pending}",
            state.current
        )));
    }
    if state.current == target {
        return Ok(state);
    }
    Ok(ModeSwitchState { pending: Some(target), elapsed: 0.0, ..state })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fold(alpha_deg: f64) -> FoldParameters {
        FoldParameters::with_faces(5.0, 5.0, alpha_deg.to_radians(), 5)
    }

    #[test]
    fn travel_grows_with_alpha() {
        let t: Vec<f64> = [10.0, 20.0, 30.0].iter().map(|&a| fold_travel(&fold(a)).unwrap()).collect();
        assert!(t[0] < t[1] && t[1] < t[2]);
    }

    #[test]
    fn travel_vanishes_as_alpha_goes_to_zero() {
        let t = fold_travel(&fold(1e-6)).unwrap();
        assert!(t.abs() < 1e-6);
    }

    #[test]
    fn force_starts_at_zero_and_is_monotone_in_x() {
        let prof = fold_force_profile(&fold(30.0), 5.0, 50).unwrap();
        assert_eq!(prof.force[0], 0.0);
        assert!(prof.displacement.windows(2).all(|w| w[1] > w[0]));
        assert!(prof.force.iter().all(|&f| f >= 0.0));
    }

    #[test]
    fn calibration_hits_reference_peak() {
        let kappa = default_kappa();
        let prof = fold_force_profile(&reference_fold(), kappa, 201).unwrap();
        assert_relative_eq!(prof.peak(), REFERENCE_PEAK_FORCE, max_relative = 1e-9);
    }

    #[test]
    fn calibration_is_linear_in_target() {
        let p = fold(20.0);
        let a = calibrate_kappa(&p, 1.0).unwrap();
        let b = calibrate_kappa(&p, 2.0).unwrap();
        assert_relative_eq!(b, 2.0 * a, max_relative = 1e-12);
        assert!(calibrate_kappa(&p, 0.0).is_err());
    }

    #[test]
    fn rejects_bad_kappa() {
        assert!(fold_force_profile(&fold(30.0), 0.0, 10).is_err());
    }

    #[test]
    fn switch_round_trip() {
        let s = ModeSwitchState::new(FrictionMode::Hf);
        let s = switch_mode(s, FrictionMode::Lf).unwrap();
        assert!(s.switching());
        assert!(switch_mode(s, FrictionMode::Hf).is_err());
        let s = s.advance(0.0);
        assert_eq!(s.current, FrictionMode::Lf);
        let s = switch_mode(s, FrictionMode::Hf).unwrap().advance(0.0);
        assert_eq!(s.current, FrictionMode::Hf);
        assert_eq!(switch_mode(s, FrictionMode::Hf).unwrap(), s);
    }

    #[test]
    fn switch_waits_for_latency() {
        let s = ModeSwitchState::new(FrictionMode::Hf).with_switch_time(0.5);
        let s = switch_mode(s, FrictionMode::Lf).unwrap().advance(0.2);
        assert!(s.switching());
        assert_relative_eq!(s.remaining(), 0.3, epsilon = 1e-12);
        let s = s.advance(0.3);
        assert_eq!(s.current, FrictionMode::Lf);
        assert!(!s.switching());
    }
}
