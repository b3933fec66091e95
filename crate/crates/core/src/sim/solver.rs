//! Quasi-static contact resolution by contact-mode enumeration.
//!
//! Normal forces are penalty forces `k_n * penetration`; all quantities are
//! kept in penetration units (force / k_n). A hypothesis fixes, per contact,
//! which points stay closed and whether the contact sticks or slides in
//! either direction, and optionally which side of the grip yields. Each
//! hypothesis gives a linear system for the object twist, solved in the
//! weighted minimum-norm sense; consistent hypotheses compete on twist norm.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::object::{cross, perp, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactMode {
    Separate,
    Stick,
    /// Object slides along `+tangent` relative to the finger.
    SlidePos,
    SlideNeg,
}

impl ContactMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ContactMode::Separate => "separate",
            ContactMode::Stick => "stick",
            ContactMode::SlidePos => "slide+",
            ContactMode::SlideNeg => "slide-",
        }
    }

    pub fn is_slide(self) -> bool {
        matches!(self, ContactMode::SlidePos | ContactMode::SlideNeg)
    }
}

impl fmt::Display for ContactMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One contact as seen by the solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverContact {
    pub points: Vec<Vec2>,
    /// Current penetration at each point (mm, negative when open).
    pub penetration: Vec<f64>,
    /// Unit normal into the object.
    pub normal: Vec2,
    pub mu: f64,
    /// Prescribed finger-surface displacement over the step at each point.
    pub drive: Vec<Vec2>,
    /// Surface displacement per unit grip yield at each point.
    pub yield_dir: Vec<Vec2>,
    /// Grip side (0 or 1) the contact loads, if any.
    pub side: Option<usize>,
}

impl SolverContact {
    pub fn center(&self) -> Vec2 {
        self.points.iter().sum::<Vec2>() / self.points.len() as f64
    }

    fn mean(v: &[Vec2]) -> Vec2 {
        v.iter().sum::<Vec2>() / v.len() as f64
    }
}

/// Force-capped grip: the fingers hold position until the normal load on a
/// side reaches `cap`, then open (`yield` grows) instead of squeezing more.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GripLaw {
    /// Current yield (rad, ≥ 0).
    pub yield_now: f64,
    /// Load cap per side (mm of penetration).
    pub cap: f64,
    /// Largest yield recovery per step (rad).
    pub max_recover: f64,
    /// Length converting yield to millimetres in the norm.
    pub lever: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub contacts: Vec<SolverContact>,
    /// Object reference point for rotations.
    pub center: Vec2,
    pub char_length: f64,
    pub grip: Option<GripLaw>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GripState {
    Free,
    Hold,
    Yield,
}

/// Resolved state of one contact.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactOutcome {
    pub mode: ContactMode,
    /// Normal force at each point after the step (penetration units).
    pub normal_force: Vec<f64>,
    /// Tangential force along the contact tangent (penetration units).
    pub tangential_force: f64,
    /// Object slip relative to the finger along the tangent (mm).
    pub slip: f64,
}

impl ContactOutcome {
    pub fn total_normal(&self) -> f64 {
        self.normal_force.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// Object translation (mm) and rotation (rad) over the step.
    pub twist: [f64; 3],
    pub yield_change: f64,
    pub grip: GripState,
    pub contacts: Vec<ContactOutcome>,
    pub hypotheses: usize,
    pub consistent: usize,
}

impl Solution {
    pub fn weighted_norm(&self, char_length: f64) -> f64 {
        let [x, y, w] = self.twist;
        (x * x + y * y + (w * char_length).powi(2)).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveFailure {
    NoConsistent { hypotheses: usize },
    NonFinite,
}

/// Consistency tolerance in penetration units (mm).
pub const TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tangential {
    Stick,
    Slide(f64),
}

#[derive(Debug, Clone)]
struct Choice {
    closed: Vec<bool>,
    tangential: Option<Tangential>,
}

fn options(c: &SolverContact) -> Vec<Choice> {
    let n = c.points.len();
    let subsets: Vec<Vec<bool>> = if n == 1 {
        vec![vec![true]]
    } else {
        vec![vec![true, true], vec![true, false], vec![false, true]]
    };
    let mut out = Vec::new();
    for s in subsets {
        for t in [Tangential::Stick, Tangential::Slide(1.0), Tangential::Slide(-1.0)] {
            out.push(Choice { closed: s.clone(), tangential: Some(t) });
        }
    }
    out.push(Choice { closed: vec![false; n], tangential: None });
    out
}

/// Affine expression `coef · z + k` in the hypothesis unknowns.
#[derive(Debug, Clone)]
struct Aff {
    coef: Vec<f64>,
    k: f64,
}

impl Aff {
    fn zero(n: usize) -> Self {
        Self { coef: vec![0.0; n], k: 0.0 }
    }

    fn add(&mut self, o: &Aff, s: f64) {
        for (a, b) in self.coef.iter_mut().zip(&o.coef) {
            *a += s * b;
        }
        self.k += s * o.k;
    }

    fn eval(&self, z: &DVector<f64>) -> f64 {
        self.coef.iter().zip(z.iter()).map(|(a, b)| a * b).sum::<f64>() + self.k
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum GripHyp {
    Free,
    Hold,
    Yield(usize),
}

struct Layout {
    n: usize,
    dy: Option<usize>,
    ft: Vec<Option<usize>>,
}

fn build_layout(choices: &[&Choice], grip: GripHyp) -> Layout {
    let mut n = 3;
    let dy = if let GripHyp::Yield(_) = grip {
        n += 1;
        Some(n - 1)
    } else {
        None
    };
    let ft = choices
        .iter()
        .map(|c| {
            if c.tangential == Some(Tangential::Stick) {
                n += 1;
                Some(n - 1)
            } else {
                None
            }
        })
        .collect();
    Layout { n, dy, ft }
}

struct Evaluated {
    z: DVector<f64>,
    dy: f64,
    outcomes: Vec<ContactOutcome>,
}

fn evaluate(p: &Problem, choices: &[&Choice], grip: GripHyp) -> Option<Evaluated> {
    let lay = build_layout(choices, grip);
    let n = lay.n;
    let l = p.char_length;
    let lever = p.grip.map_or(1.0, |g| g.lever);
    let fixed_dy = match (grip, p.grip) {
        (GripHyp::Hold, Some(g)) => -g.yield_now.min(g.max_recover),
        _ => 0.0,
    };

    // Penetration after the step at each point, as affine expressions.
    let pen_after = |c: &SolverContact, j: usize| -> Aff {
        let mut a = Aff::zero(n);
        let r = c.points[j] - p.center;
        let nn = c.normal;
        a.coef[0] = -nn.x;
        a.coef[1] = -nn.y;
        a.coef[2] = -cross(&r, &nn) / l;
        a.k = c.penetration[j] + c.drive[j].dot(&nn) + fixed_dy * c.yield_dir[j].dot(&nn);
        if let Some(i) = lay.dy {
            a.coef[i] = c.yield_dir[j].dot(&nn) / lever;
        }
        a
    };
    let slip_of = |c: &SolverContact| -> Aff {
        let mut a = Aff::zero(n);
        let rc = c.center() - p.center;
        let t = perp(&c.normal);
        a.coef[0] = t.x;
        a.coef[1] = t.y;
        a.coef[2] = cross(&rc, &t) / l;
        let d = SolverContact::mean(&c.drive);
        let e = SolverContact::mean(&c.yield_dir);
        a.k = -(d.dot(&t) + fixed_dy * e.dot(&t));
        if let Some(i) = lay.dy {
            a.coef[i] = -e.dot(&t) / lever;
        }
        a
    };

    let mut fx = Aff::zero(n);
    let mut fy = Aff::zero(n);
    let mut mz = Aff::zero(n);
    let mut eqs: Vec<Aff> = Vec::new();
    let mut side_load = [Aff::zero(n), Aff::zero(n)];
    let mut normals: Vec<Vec<Aff>> = Vec::with_capacity(choices.len());
    let mut tangentials: Vec<Aff> = Vec::with_capacity(choices.len());
    let mut slips: Vec<Aff> = Vec::with_capacity(choices.len());

    for (ci, (c, ch)) in p.contacts.iter().zip(choices).enumerate() {
        let t = perp(&c.normal);
        let pens: Vec<Aff> = (0..c.points.len()).map(|j| pen_after(c, j)).collect();
        let mut total = Aff::zero(n);
        for (j, pa) in pens.iter().enumerate() {
            if ch.closed[j] {
                total.add(pa, 1.0);
                let r = c.points[j] - p.center;
                fx.add(pa, c.normal.x);
                fy.add(pa, c.normal.y);
                mz.add(pa, cross(&r, &c.normal) / l);
            }
        }
        if let Some(s) = c.side {
            side_load[s].add(&total, 1.0);
        }
        let slip = slip_of(c);
        let mut ft = Aff::zero(n);
        match ch.tangential {
            Some(Tangential::Stick) => {
                ft.coef[lay.ft[ci].unwrap()] = 1.0;
                eqs.push(slip.clone());
            }
            Some(Tangential::Slide(sign)) => ft.add(&total, -sign * c.mu),
            None => {}
        }
        let rc = c.center() - p.center;
        fx.add(&ft, t.x);
        fy.add(&ft, t.y);
        mz.add(&ft, cross(&rc, &t) / l);
        normals.push(pens);
        tangentials.push(ft);
        slips.push(slip);
    }
    eqs.push(fx);
    eqs.push(fy);
    eqs.push(mz);
    if let (GripHyp::Yield(s), Some(g)) = (grip, p.grip) {
        let mut e = side_load[s].clone();
        e.k -= g.cap;
        eqs.push(e);
    }

    let m = eqs.len();
    let a = DMatrix::from_fn(m, n, |i, j| eqs[i].coef[j]);
    let b = DVector::from_iterator(m, eqs.iter().map(|e| -e.k));
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let z = svd.solve(&b, 1e-12 * smax.max(1.0)).ok()?;
    let resid = (&a * &z - &b).norm();
    if !(resid <= 1e-9 * (1.0 + b.norm())) || z.iter().any(|v| !v.is_finite()) {
        return None;
    }

    // Inequalities.
    let mut outcomes = Vec::with_capacity(choices.len());
    for (ci, (c, ch)) in p.contacts.iter().zip(choices).enumerate() {
        let mut fn_pts = Vec::with_capacity(c.points.len());
        for (j, pa) in normals[ci].iter().enumerate() {
            let v = pa.eval(&z);
            if ch.closed[j] {
                if v < -TOL {
                    return None;
                }
                fn_pts.push(v.max(0.0));
            } else {
                if v > TOL {
                    return None;
                }
                fn_pts.push(0.0);
            }
        }
        let total: f64 = fn_pts.iter().sum();
        let ft = tangentials[ci].eval(&z);
        let slip = slips[ci].eval(&z);
        match ch.tangential {
            Some(Tangential::Stick) => {
                if ft.abs() > c.mu * total + TOL {
                    return None;
                }
            }
            Some(Tangential::Slide(sign)) => {
                if sign * slip < -TOL {
                    return None;
                }
            }
            None => {}
        }
        outcomes.push(ContactOutcome { mode: ContactMode::Separate, normal_force: fn_pts, tangential_force: ft, slip });
    }
    let dy = match lay.dy {
        Some(i) => z[i] / lever,
        None => fixed_dy,
    };
    if let Some(g) = p.grip {
        let loads = [side_load[0].eval(&z), side_load[1].eval(&z)];
        match grip {
            GripHyp::Hold | GripHyp::Free => {
                if loads.iter().any(|&x| x > g.cap + TOL) {
                    return None;
                }
            }
            GripHyp::Yield(s) => {
                if g.yield_now + dy < -TOL / lever || loads[1 - s] > g.cap + TOL {
                    return None;
                }
            }
        }
    }
    Some(Evaluated { z, dy, outcomes })
}

/// Slip below this counts as sticking when labelling (mm).
pub const SLIP_TOL: f64 = 1e-9;

fn label(o: &mut ContactOutcome) {
    o.mode = if o.total_normal() <= TOL {
        ContactMode::Separate
    } else if o.slip.abs() <= SLIP_TOL {
        ContactMode::Stick
    } else if o.slip > 0.0 {
        ContactMode::SlidePos
    } else {
        ContactMode::SlideNeg
    };
}

/// Enumerates contact-mode hypotheses and returns the consistent one with
/// the smallest weighted twist norm; ties keep the first in enumeration order.
pub fn solve(p: &Problem) -> Result<Solution, SolveFailure> {
    let finite = p.contacts.iter().all(|c| {
        c.normal.iter().all(|v| v.is_finite())
            && c.penetration.iter().all(|v| v.is_finite())
            && c.drive.iter().all(|d| d.iter().all(|v| v.is_finite()))
    });
    if !finite || !p.center.iter().all(|v| v.is_finite()) {
        return Err(SolveFailure::NonFinite);
    }
    let grips: Vec<GripHyp> = match p.grip {
        None => vec![GripHyp::Free],
        Some(_) => vec![GripHyp::Hold, GripHyp::Yield(0), GripHyp::Yield(1)],
    };
    if p.contacts.is_empty() {
        let dy = p.grip.map_or(0.0, |g| -g.yield_now.min(g.max_recover));
        return Ok(Solution {
            twist: [0.0; 3],
            yield_change: dy,
            grip: if p.grip.is_some() { GripState::Hold } else { GripState::Free },
            contacts: Vec::new(),
            hypotheses: 1,
            consistent: 1,
        });
    }
    let opts: Vec<Vec<Choice>> = p.contacts.iter().map(options).collect();
    let mut idx = vec![0usize; opts.len()];
    let mut best: Option<(f64, Evaluated, GripHyp)> = None;
    let mut tried = 0usize;
    let mut consistent = 0usize;
    loop {
        let choices: Vec<&Choice> = idx.iter().zip(&opts).map(|(&i, o)| &o[i]).collect();
        for &gh in &grips {
            // A yielding side must carry load.
            if let GripHyp::Yield(s) = gh {
                let loaded = p
                    .contacts
                    .iter()
                    .zip(&choices)
                    .any(|(c, ch)| c.side == Some(s) && ch.closed.iter().any(|&x| x));
                if !loaded {
                    continue;
                }
            }
            tried += 1;
            if let Some(ev) = evaluate(p, &choices, gh) {
                consistent += 1;
                let norm = (ev.z[0].powi(2) + ev.z[1].powi(2) + ev.z[2].powi(2)).sqrt();
                let better = match &best {
                    None => true,
                    Some((bn, _, _)) => norm < bn - 1e-12 * (1.0 + bn),
                };
                if better {
                    best = Some((norm, ev, gh));
                }
            }
        }
        // Odometer over contact options.
        let mut k = 0;
        loop {
            if k == idx.len() {
                return finish(p, best, tried, consistent);
            }
            idx[k] += 1;
            if idx[k] < opts[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn finish(
    p: &Problem,
    best: Option<(f64, Evaluated, GripHyp)>,
    tried: usize,
    consistent: usize,
) -> Result<Solution, SolveFailure> {
    let Some((_, ev, gh)) = best else {
        return Err(SolveFailure::NoConsistent { hypotheses: tried });
    };
    let mut contacts = ev.outcomes;
    contacts.iter_mut().for_each(label);
    Ok(Solution {
        twist: [ev.z[0], ev.z[1], ev.z[2] / p.char_length],
        yield_change: ev.dy,
        grip: match gh {
            GripHyp::Free => GripState::Free,
            GripHyp::Hold => GripState::Hold,
            GripHyp::Yield(_) => GripState::Yield,
        },
        contacts,
        hypotheses: tried,
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn point(p: Vec2, n: Vec2, pen: f64, mu: f64, drive: Vec2) -> SolverContact {
        SolverContact {
            points: vec![p],
            penetration: vec![pen],
            normal: n,
            mu,
            drive: vec![drive],
            yield_dir: vec![Vec2::zeros()],
            side: None,
        }
    }

    #[test]
    fn no_contacts_no_motion() {
        let p = Problem { contacts: vec![], center: Vec2::zeros(), char_length: 25.0, grip: None };
        assert_eq!(solve(&p).unwrap().twist, [0.0; 3]);
    }

    #[test]
    fn squeezed_object_between_frictionless_fingers_does_not_slide() {
        // Both fingers move tangentially; zero friction transmits nothing.
        let c = vec![
            point(Vec2::new(-25.0, 0.0), Vec2::new(1.0, 0.0), 0.5, 0.0, Vec2::new(0.0, -0.3)),
            point(Vec2::new(25.0, 0.0), Vec2::new(-1.0, 0.0), 0.5, 0.0, Vec2::new(0.0, -0.3)),
        ];
        let p = Problem { contacts: c, center: Vec2::zeros(), char_length: 25.0, grip: None };
        let s = solve(&p).unwrap();
        assert!(s.twist[1].abs() < 1e-6, "{:?}", s.twist);
    }

    fn line(x: f64, n: Vec2, pen: f64, mu: f64, drive: Vec2) -> SolverContact {
        SolverContact {
            points: vec![Vec2::new(x, -20.0), Vec2::new(x, 20.0)],
            penetration: vec![pen, pen],
            normal: n,
            mu,
            drive: vec![drive, drive],
            yield_dir: vec![Vec2::zeros(); 2],
            side: None,
        }
    }

    #[test]
    fn sticky_finger_drags_object_over_slippery_one() {
        let d = Vec2::new(0.0, -0.2);
        let c = vec![
            line(-25.0, Vec2::new(1.0, 0.0), 0.5, 0.77, d),
            line(25.0, Vec2::new(-1.0, 0.0), 0.5, 0.08, -d),
        ];
        let p = Problem { contacts: c, center: Vec2::zeros(), char_length: 25.0, grip: None };
        let s = solve(&p).unwrap();
        assert_eq!(s.contacts[0].mode, ContactMode::Stick, "{s:?}");
        assert!(s.twist[1] < -0.1);
        assert!(s.contacts[1].mode.is_slide());
        // Friction at the sliding contact is at the cone edge.
        let o = &s.contacts[1];
        assert_abs_diff_eq!(o.tangential_force.abs(), 0.08 * o.total_normal(), epsilon = 1e-9);
    }

    #[test]
    fn single_pushing_contact_pushes() {
        let c = vec![point(Vec2::new(-25.0, 0.0), Vec2::new(1.0, 0.0), 0.0, 0.5, Vec2::new(0.3, 0.0))];
        let p = Problem { contacts: c, center: Vec2::zeros(), char_length: 25.0, grip: None };
        let s = solve(&p).unwrap();
        assert_abs_diff_eq!(s.twist[0], 0.3, epsilon = 1e-9);
        assert_eq!(s.contacts[0].mode, ContactMode::Separate);
    }
}
