//! Planar quasi-static simulation of the two-finger gripper.

mod contact;
mod gripper;
mod object;
mod scenario;
mod solver;
mod world;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use contact::{detect_contacts, Contact, ContactKind, MAX_CONTACTS_PER_FINGER};
pub use gripper::{forward_kinematics, Fidelity, FingerSurface, GripperModel, ModeMu, Profile, Side};
pub use object::{closest_on_segment, cross, perp, rotate, Pose2, RigidObject2D, Shape, Vec2};
pub use scenario::{GripperOverrides, Jitter, ObjectConfig, Scenario, SurfaceChoice};
pub use solver::{
    solve, ContactMode, ContactOutcome, GripLaw, GripState, Problem, Solution, SolveFailure, SolverContact, SLIP_TOL,
    TOL,
};
pub use world::{grasp, move_to, resolve_step, switch_modes, ContactReport, StepDiagnostics, WorldState};

use crate::error::{Error, Result};
use crate::fold_geometry::FrictionMode;
use crate::plans::ManipulationPlan;

/// One logged state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    pub theta_left: f64,
    pub theta_right: f64,
    pub mode_left: FrictionMode,
    pub mode_right: FrictionMode,
    pub pose: Pose2,
    /// Plan phase the step belongs to; `None` for the initial state.
    pub phase: Option<usize>,
    pub diagnostics: StepDiagnostics,
}

impl StepRecord {
    fn new(w: &WorldState, phase: Option<usize>, diagnostics: StepDiagnostics) -> Self {
        Self {
            step: w.step_index,
            theta_left: w.theta_left,
            theta_right: w.theta_right,
            mode_left: w.mode_left,
            mode_right: w.mode_right,
            pose: w.object.pose,
            phase,
            diagnostics,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrajectoryLog {
    pub records: Vec<StepRecord>,
}

pub const TRAJECTORY_HEADER: [&str; 10] = [
    "step",
    "theta_left_rad",
    "theta_right_rad",
    "mode_left",
    "mode_right",
    "obj_x_mm",
    "obj_y_mm",
    "obj_yaw_rad",
    "n_contacts",
    "contact_labels",
];

impl TrajectoryLog {
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn first(&self) -> Option<&StepRecord> {
        self.records.first()
    }

    pub fn last(&self) -> Option<&StepRecord> {
        self.records.last()
    }

    /// Total snagging contacts over all steps.
    pub fn snag_count(&self) -> usize {
        self.records.iter().map(|r| r.diagnostics.snags()).sum()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(TRAJECTORY_HEADER)?;
        for r in &self.records {
            out.write_record([
                r.step.to_string(),
                r.theta_left.to_string(),
                r.theta_right.to_string(),
                r.mode_left.to_string(),
                r.mode_right.to_string(),
                r.pose.x.to_string(),
                r.pose.y.to_string(),
                r.pose.yaw.to_string(),
                r.diagnostics.contacts.len().to_string(),
                r.diagnostics.labels(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn initial_record(g: &GripperModel, w: &WorldState) -> Result<StepRecord> {
    let contacts = w.contacts(g)?;
    let diag = StepDiagnostics {
        step_index: w.step_index,
        max_penetration: contacts.iter().map(|c| c.penetration()).fold(0.0, f64::max),
        contacts: contacts
            .iter()
            .map(|c| ContactReport {
                finger: c.finger,
                kind: c.kind,
                mode: ContactMode::Separate,
                gap: c.gap(),
                mu: c.mu,
                normal_force: 0.0,
                tangential_force: 0.0,
                slip: 0.0,
                snag: c.snag,
            })
            .collect(),
        ..Default::default()
    };
    Ok(StepRecord::new(w, None, diag))
}

/// Runs `plan` from `initial`, returning whatever was logged and the error
/// that stopped the run, if any.
pub fn run_plan_partial(
    g: &GripperModel,
    initial: &WorldState,
    plan: &ManipulationPlan,
) -> (TrajectoryLog, Option<Error>) {
    let (log, _, err) = run_plan_from(g, initial, plan);
    (log, err)
}

/// Like [`run_plan_partial`] but also returns the last accepted state, so
/// plans can be chained.
pub fn run_plan_from(
    g: &GripperModel,
    initial: &WorldState,
    plan: &ManipulationPlan,
) -> (TrajectoryLog, WorldState, Option<Error>) {
    let mut log = TrajectoryLog::default();
    let mut w = initial.clone();
    match initial_record(g, initial) {
        Ok(r) => log.records.push(r),
        Err(e) => return (log, w, Some(e)),
    }
    if let Err(e) = plan.validate(g) {
        return (log, w, Some(e));
    }
    for (i, phase) in plan.phases.iter().enumerate() {
        let context = |step: u64| format!("phase {i} ({}) at step {step}", phase.label);
        let switched = switch_modes(g, &w, phase.modes());
        let steps = match switched {
            Ok(s) => s,
            Err(e) => {
                let step = w.step_index + 1;
                return (log, w, Some(Error::InPhase { context: context(step), source: Box::new(e) }));
            }
        };
        for (nw, d) in steps {
            log.records.push(StepRecord::new(&nw, Some(i), d));
            w = nw;
        }
        // Step one at a time so a jam keeps the states before it.
        let target = phase.target();
        loop {
            let delta = [target[0] - w.drive[0], target[1] - w.drive[1]];
            if delta[0] == 0.0 && delta[1] == 0.0 {
                break;
            }
            let n = (delta[0].abs().max(delta[1].abs()) / g.step_cap).ceil().max(1.0);
            let (dl, dr) = if n <= 1.0 { (delta[0], delta[1]) } else { (delta[0] / n, delta[1] / n) };
            match resolve_step(g, &w, dl, dr) {
                Ok((mut nw, d)) => {
                    if n <= 1.0 {
                        nw.drive = target;
                        nw.sync_angles();
                    }
                    log.records.push(StepRecord::new(&nw, Some(i), d));
                    w = nw;
                }
                Err(e) => {
                    let step = w.step_index + 1;
                    return (log, w, Some(Error::InPhase { context: context(step), source: Box::new(e) }));
                }
            }
        }
    }
    (log, w, None)
}

pub fn run_plan(g: &GripperModel, initial: &WorldState, plan: &ManipulationPlan) -> Result<TrajectoryLog> {
    match run_plan_partial(g, initial, plan) {
        (log, None) => Ok(log),
        (_, Some(e)) => Err(e),
    }
}

/// Checks friction-cone, dissipation and penetration bounds at every logged
/// step. Returns one message per violation.
pub fn check_invariants(g: &GripperModel, log: &TrajectoryLog) -> Vec<String> {
    let ftol = TOL * g.squeeze_stiffness;
    let mut bad = Vec::new();
    for r in &log.records {
        let d = &r.diagnostics;
        if d.max_penetration > g.squeeze_preload + 1e-6 {
            bad.push(format!("step {}: penetration {} mm", r.step, d.max_penetration));
        }
        for c in &d.contacts {
            let (fn_, ft) = (c.normal_force, c.tangential_force);
            let ok = match c.mode {
                ContactMode::Separate => fn_.abs() <= ftol && ft.abs() <= ftol,
                ContactMode::Stick => fn_ >= -ftol && ft.abs() <= c.mu * fn_ + ftol,
                ContactMode::SlidePos | ContactMode::SlideNeg => {
                    (ft.abs() - c.mu * fn_).abs() <= ftol && ft * c.slip <= ftol
                }
            };
            if !ok {
                bad.push(format!("step {}: {} f_n={fn_} f_t={ft} slip={}", r.step, c.label(), c.slip));
            }
        }
    }
    bad
}
