use std::fmt;

use serde::{Deserialize, Serialize};

use super::contact::{detect_contacts, Contact, ContactKind};
use super::gripper::{forward_kinematics, FingerSurface, GripperModel, Side};
use super::object::{Pose2, RigidObject2D};
use super::solver::{solve, ContactMode, GripLaw, GripState, Problem, SolveFailure, SolverContact};
use crate::actuation::{switch_mode, ModeSwitchState};
use crate::error::{Error, Result};
use crate::fold_geometry::FrictionMode;

/// Gripper and object state between steps.
///
/// Each finger angle is its drive angle plus the grip closure, minus half
/// the current grip yield: `θ_L = d_L + c_L − y/2`, `θ_R = d_R − c_R + y/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub theta_left: f64,
    pub theta_right: f64,
    pub mode_left: FrictionMode,
    pub mode_right: FrictionMode,
    pub object: RigidObject2D,
    pub step_index: u64,
    /// Commanded (servo) angles.
    pub drive: [f64; 2],
    /// Grip closure added on top of the drive angles.
    pub closure: [f64; 2],
    pub grip_yield: f64,
    /// Surface offsets of an ongoing mode switch (mm).
    pub offsets: [f64; 2],
    pub switch_state: [ModeSwitchState; 2],
}

impl WorldState {
    pub fn new(g: &GripperModel, object: RigidObject2D, modes: [FrictionMode; 2]) -> Self {
        let eff = [
            g.surface(Side::Left).effective_mode(modes[0]),
            g.surface(Side::Right).effective_mode(modes[1]),
        ];
        let mut w = Self {
            theta_left: 0.0,
            theta_right: 0.0,
            mode_left: eff[0],
            mode_right: eff[1],
            object,
            step_index: 0,
            drive: [0.0; 2],
            closure: [0.0; 2],
            grip_yield: 0.0,
            offsets: [0.0; 2],
            switch_state: [ModeSwitchState::new(eff[0]), ModeSwitchState::new(eff[1])],
        };
        w.sync_angles();
        w
    }

    pub fn with_drive(mut self, left: f64, right: f64) -> Self {
        self.drive = [left, right];
        self.sync_angles();
        self
    }

    pub fn modes(&self) -> [FrictionMode; 2] {
        [self.mode_left, self.mode_right]
    }

    pub fn theta(&self) -> [f64; 2] {
        [self.theta_left, self.theta_right]
    }

    pub fn switching(&self) -> bool {
        self.switch_state.iter().any(|s| s.switching())
    }

    fn finger_angles(&self, closure: [f64; 2], grip_yield: f64) -> [f64; 2] {
        [
            self.drive[0] + closure[0] - 0.5 * grip_yield,
            self.drive[1] - closure[1] + 0.5 * grip_yield,
        ]
    }

    pub(crate) fn sync_angles(&mut self) {
        let t = self.finger_angles(self.closure, self.grip_yield);
        self.theta_left = t[0];
        self.theta_right = t[1];
    }

    pub fn surfaces(&self, g: &GripperModel) -> Result<[FingerSurface; 2]> {
        forward_kinematics(g, self.theta(), self.modes(), self.offsets)
    }

    pub fn contacts(&self, g: &GripperModel) -> Result<Vec<Contact>> {
        Ok(detect_contacts(&self.surfaces(g)?, &self.object, g.contact_margin, g.align_tol))
    }
}

/// Summary of one contact after a step. Forces in newtons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactReport {
    pub finger: Side,
    pub kind: ContactKind,
    pub mode: ContactMode,
    pub gap: f64,
    pub mu: f64,
    pub normal_force: f64,
    pub tangential_force: f64,
    pub slip: f64,
    pub snag: bool,
}

impl ContactReport {
    pub fn label(&self) -> String {
        format!("{}:{}/{}", &self.finger.to_string()[..1].to_uppercase(), self.kind, self.mode)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub step_index: u64,
    pub contacts: Vec<ContactReport>,
    pub grip: Option<GripState>,
    pub hypotheses: usize,
    pub consistent: usize,
    /// Deepest geometric penetration after the step (mm).
    pub max_penetration: f64,
    /// Extra grip opening applied after the step to respect the load cap (rad).
    pub relief: f64,
    pub switching: bool,
    pub message: Option<String>,
}

impl StepDiagnostics {
    pub fn labels(&self) -> String {
        self.contacts.iter().map(|c| c.label()).collect::<Vec<_>>().join(";")
    }

    /// Loaded contacts caught below the top faces.
    pub fn snags(&self) -> usize {
        self.contacts.iter().filter(|c| c.snag && c.mode != ContactMode::Separate).count()
    }
}

impl fmt::Display for StepDiagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "step {}: {} contacts [{}], {} hypotheses, {} consistent",
            self.step_index,
            self.contacts.len(),
            self.labels(),
            self.hypotheses,
            self.consistent
        )?;
        if let Some(m) = &self.message {
            write!(f, " ({m})")?;
        }
        Ok(())
    }
}

/// Prescribed motion over one step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct Motion {
    drive: [f64; 2],
    closure: [f64; 2],
    offsets: [f64; 2],
}

const GRIP_LEVER: f64 = 50.0;

fn rotation_sign(side: Side) -> f64 {
    side.closing_sign()
}

fn contact_reports(contacts: &[Contact], sol: Option<&super::solver::Solution>, k_n: f64) -> Vec<ContactReport> {
    contacts
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let o = sol.map(|s| &s.contacts[i]);
            ContactReport {
                finger: c.finger,
                kind: c.kind,
                mode: o.map_or(ContactMode::Separate, |o| o.mode),
                gap: c.gap(),
                mu: c.mu,
                normal_force: o.map_or(0.0, |o| k_n * o.total_normal()),
                tangential_force: o.map_or(0.0, |o| k_n * o.tangential_force),
                slip: o.map_or(0.0, |o| o.slip),
                snag: c.snag,
            }
        })
        .collect()
}

fn side_loads(contacts: &[Contact]) -> ([f64; 2], f64) {
    let mut load = [0.0; 2];
    let mut deepest = 0.0f64;
    for c in contacts {
        for &gap in &c.gaps {
            let p = (-gap).max(0.0);
            load[c.finger.index()] += p;
            deepest = deepest.max(p);
        }
    }
    (load, deepest)
}

fn advance(g: &GripperModel, w: &WorldState, m: Motion) -> Result<(WorldState, StepDiagnostics)> {
    let surfaces = w.surfaces(g)?;
    let contacts = detect_contacts(&surfaces, &w.object, g.contact_margin, g.align_tol);
    let mut diag = StepDiagnostics { step_index: w.step_index + 1, switching: w.switching(), ..Default::default() };

    let center = w.object.pose.position();
    let mut problem = Problem {
        contacts: Vec::with_capacity(contacts.len()),
        center,
        char_length: w.object.char_length(),
        grip: Some(GripLaw {
            yield_now: w.grip_yield,
            cap: g.squeeze_preload,
            max_recover: g.step_cap,
            lever: GRIP_LEVER,
        }),
    };
    for c in &contacts {
        let fs = &surfaces[c.finger.index()];
        let i = c.finger.index();
        let dtheta = m.drive[i] + rotation_sign(c.finger) * m.closure[i];
        let dyield = -0.5 * rotation_sign(c.finger);
        let drive = c
            .points
            .iter()
            .map(|p| fs.rotation_velocity(p) * dtheta + fs.inward * m.offsets[i])
            .collect();
        let yield_dir = c.points.iter().map(|p| fs.rotation_velocity(p) * dyield).collect();
        problem.contacts.push(SolverContact {
            points: c.points.clone(),
            penetration: c.gaps.iter().map(|g| -g).collect(),
            normal: c.normal,
            mu: c.mu,
            drive,
            yield_dir,
            side: Some(i),
        });
    }

    let sol = match solve(&problem) {
        Ok(s) => s,
        Err(SolveFailure::NonFinite) => {
            return Err(Error::Degenerate(format!("non-finite contact data at step {}", diag.step_index)));
        }
        Err(SolveFailure::NoConsistent { hypotheses }) => {
            diag.contacts = contact_reports(&contacts, None, g.squeeze_stiffness);
            diag.hypotheses = hypotheses;
            diag.message = Some("no consistent contact-mode hypothesis".into());
            return Err(Error::Jammed(Box::new(diag)));
        }
    };

    let mut next = w.clone();
    let [dx, dy, dw] = sol.twist;
    next.object.pose = Pose2::new(w.object.pose.x + dx, w.object.pose.y + dy, w.object.pose.yaw + dw);
    for i in 0..2 {
        next.drive[i] += m.drive[i];
        next.closure[i] += m.closure[i];
        next.offsets[i] += m.offsets[i];
    }
    next.grip_yield = (w.grip_yield + sol.yield_change).max(0.0);
    next.step_index += 1;
    next.sync_angles();

    diag.relief = relieve(g, &mut next)?;
    let after = next.contacts(g)?;
    let (_, deepest) = side_loads(&after);
    diag.max_penetration = deepest;
    diag.contacts = contact_reports(&contacts, Some(&sol), g.squeeze_stiffness);
    diag.grip = Some(sol.grip);
    diag.hypotheses = sol.hypotheses;
    diag.consistent = sol.consistent;
    Ok((next, diag))
}

/// Opens the grip until no side carries more than the load cap.
/// Linearised steps can overshoot the cap by second-order terms.
fn relieve(g: &GripperModel, w: &mut WorldState) -> Result<f64> {
    let cap = g.squeeze_preload;
    let over = |w: &WorldState, extra: f64| -> Result<bool> {
        let mut t = w.clone();
        t.grip_yield += extra;
        t.sync_angles();
        let (load, _) = side_loads(&t.contacts(g)?);
        Ok(load.iter().any(|&l| l > cap))
    };
    if !over(w, 0.0)? {
        return Ok(0.0);
    }
    let mut hi = 1e-6;
    while over(w, hi)? {
        hi *= 2.0;
        if hi > g.max_closure {
            return Err(Error::Kinematic("grip cannot open far enough to release the load".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if over(w, mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    w.grip_yield += hi;
    w.sync_angles();
    Ok(hi)
}

/// Advances the world by one finger step of `(Δθ_left, Δθ_right)`.
pub fn resolve_step(g: &GripperModel, w: &WorldState, d_left: f64, d_right: f64) -> Result<(WorldState, StepDiagnostics)> {
    let cap = g.step_cap * (1.0 + 1e-9);
    if d_left.abs() > cap || d_right.abs() > cap {
        return Err(Error::Kinematic(format!(
            "step ({:.4}°, {:.4}°) exceeds the {:.4}° cap",
            d_left.to_degrees(),
            d_right.to_degrees(),
            g.step_cap.to_degrees()
        )));
    }
    if w.switching() {
        return Err(Error::Sequencing("finger step requested during a mode switch".into()));
    }
    let lim = g.angle_limits;
    for (d, dd) in w.drive.iter().zip([d_left, d_right]) {
        let t = d + dd;
        if !(t >= lim[0] - 1e-12 && t <= lim[1] + 1e-12) {
            return Err(Error::Kinematic(format!("drive angle {:.3}° outside limits", t.to_degrees())));
        }
    }
    advance(g, w, Motion { drive: [d_left, d_right], ..Default::default() })
}

/// Closes each finger onto the object, held in place, until that side
/// carries the grip load cap, then commands the grip reserve beyond that.
pub fn grasp(g: &GripperModel, w: &WorldState) -> Result<WorldState> {
    let half = 0.5 * g.max_closure;
    let mut out = w.clone();
    out.grip_yield = 0.0;
    let load_at = |base: &WorldState, side: Side, c: f64| -> Result<f64> {
        let mut t = base.clone();
        t.closure[side.index()] = c;
        t.sync_angles();
        let (load, _) = side_loads(&t.contacts(g)?);
        Ok(load[side.index()])
    };
    for side in Side::BOTH {
        if load_at(&out, side, -half)? > 0.0 {
            return Err(Error::Kinematic(format!("object does not fit: {side} finger touches it fully open")));
        }
        if load_at(&out, side, half)? < g.squeeze_preload {
            return Err(Error::Kinematic(format!("{side} finger cannot reach the object")));
        }
        let (mut lo, mut hi) = (-half, half);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if load_at(&out, side, mid)? < g.squeeze_preload {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        out.closure[side.index()] = lo;
        out.sync_angles();
    }
    for c in &mut out.closure {
        *c += 0.5 * g.grip_reserve;
    }
    out.grip_yield = g.grip_reserve;
    out.sync_angles();
    Ok(out)
}

/// Switches both fingers to `modes`, ramping each new surface in from the
/// height of the old one. Returns the intermediate states.
pub fn switch_modes(
    g: &GripperModel,
    w: &WorldState,
    modes: [FrictionMode; 2],
) -> Result<Vec<(WorldState, StepDiagnostics)>> {
    let mut next = w.clone();
    let mut start = [0.0; 2];
    let mut any = false;
    for side in Side::BOTH {
        let i = side.index();
        let s = g.surface(side);
        let target = s.effective_mode(modes[i]);
        let current = next.modes()[i];
        if target == current {
            continue;
        }
        any = true;
        next.switch_state[i] = switch_mode(next.switch_state[i], target)?;
        start[i] = s.height(current)? - s.height(target)? + next.offsets[i];
        next.offsets[i] = start[i];
        match side {
            Side::Left => next.mode_left = target,
            Side::Right => next.mode_right = target,
        }
    }
    if !any {
        return Ok(Vec::new());
    }
    let n = start
        .iter()
        .map(|s| (s.abs() / g.switch_ramp_step).ceil() as usize)
        .max()
        .unwrap_or(0)
        .max(1);
    for st in &mut next.switch_state {
        *st = st.with_switch_time(n as f64);
    }
    let mut out = Vec::with_capacity(n);
    let mut cur = next;
    for k in 0..n {
        let mut m = Motion::default();
        for i in 0..2 {
            // Land exactly on zero at the last sub-step.
            let remaining = cur.offsets[i];
            m.offsets[i] = if k + 1 == n { -remaining } else { -start[i] / n as f64 };
        }
        let (mut nx, diag) = advance(g, &cur, m)?;
        for st in &mut nx.switch_state {
            *st = st.advance(1.0);
        }
        if k + 1 == n {
            nx.offsets = [0.0; 2];
        }
        out.push((nx.clone(), diag));
        cur = nx;
    }
    Ok(out)
}

/// Rotates the fingers to drive targets in steps no larger than the cap.
pub fn move_to(
    g: &GripperModel,
    w: &WorldState,
    target: [f64; 2],
) -> Result<Vec<(WorldState, StepDiagnostics)>> {
    let delta = [target[0] - w.drive[0], target[1] - w.drive[1]];
    let n = (delta[0].abs().max(delta[1].abs()) / g.step_cap).ceil() as usize;
    let mut out = Vec::with_capacity(n);
    let mut cur = w.clone();
    for k in 0..n {
        let (dl, dr) = if k + 1 == n {
            (target[0] - cur.drive[0], target[1] - cur.drive[1])
        } else {
            (delta[0] / n as f64, delta[1] / n as f64)
        };
        let (mut nx, diag) = resolve_step(g, &cur, dl, dr)?;
        if k + 1 == n {
            nx.drive = target;
            nx.sync_angles();
        }
        out.push((nx.clone(), diag));
        cur = nx;
    }
    Ok(out)
}
