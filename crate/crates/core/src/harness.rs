//! Benchmark sweep over surfaces, objects and plans.

use std::fmt;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::materials::{Catalogue, SurfacePreset};
use crate::plans::{build_plan, Direction, PlanKind};
use crate::sim::{
    run_plan_partial, Fidelity, GripperModel, GripperOverrides, Jitter, ObjectConfig, Scenario, Shape, SurfaceChoice, TrajectoryLog,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchConfig {
    pub surfaces: Vec<SurfacePreset>,
    pub objects: Vec<ObjectConfig>,
    pub trials: u32,
    pub seed: u64,
    pub plans: Vec<PlanKind>,
    pub cycles: u32,
    pub fidelity: Fidelity,
    pub jitter: Jitter,
    pub gripper: GripperOverrides,
}

pub fn default_objects() -> Vec<ObjectConfig> {
    let obj = |shape, width| ObjectConfig { shape, width, x: 0.0, axial: None, yaw_deg: 0.0 };
    vec![
        obj(Shape::Square, 40.0),
        obj(Shape::Square, 50.0),
        obj(Shape::Square, 60.0),
        obj(Shape::Square, 70.0),
        obj(Shape::Circle, 50.0),
        obj(Shape::RegularHexagon, 50.0),
        obj(Shape::EquilateralTriangle, 50.0),
    ]
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            surfaces: SurfacePreset::ALL.to_vec(),
            objects: default_objects(),
            trials: 5,
            seed: 0,
            plans: vec![PlanKind::Translate, PlanKind::Rotate],
            cycles: 1,
            fidelity: Fidelity::FlatEquivalent,
            jitter: Jitter::default(),
            gripper: GripperOverrides::default(),
        }
    }
}

impl BenchConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn scenario(&self, surface: SurfacePreset, object: &ObjectConfig) -> Scenario {
        Scenario {
            seed: self.seed,
            fidelity: self.fidelity,
            left_surface: SurfaceChoice::Preset(surface),
            right_surface: SurfaceChoice::Preset(surface),
            object: object.clone(),
            gripper: self.gripper.clone(),
            jitter: self.jitter,
        }
    }
}

/// Direction each plan kind runs in during a bench.
pub fn bench_direction(kind: PlanKind) -> Direction {
    match kind {
        PlanKind::Translate => Direction::Distal,
        PlanKind::Rotate => Direction::Clockwise,
    }
}

/// Net (translation mm along the start finger axis, rotation deg).
pub fn net_metrics(log: &TrajectoryLog) -> (f64, f64) {
    let (Some(a), Some(b)) = (log.first(), log.last()) else {
        return (0.0, 0.0);
    };
    let axis = {
        let (sl, cl) = a.theta_left.sin_cos();
        let (sr, cr) = a.theta_right.sin_cos();
        let (x, y) = (sl + sr, -(cl + cr));
        let n = x.hypot(y);
        (x / n, y / n)
    };
    let translation = (b.pose.x - a.pose.x) * axis.0 + (b.pose.y - a.pose.y) * axis.1;
    let mut yaw = a.pose.yaw;
    let mut prev = a.pose.yaw;
    for r in &log.records[1..] {
        let mut d = r.pose.yaw - prev;
        d = (d + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
        yaw += d;
        prev = r.pose.yaw;
    }
    (translation, (yaw - a.pose.yaw).to_degrees())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub translation: f64,
    pub rotation: f64,
    pub jammed: bool,
    pub snags: usize,
    pub steps: usize,
}

/// Runs one trial, returning the gripper, the log and the error that cut it
/// short, if any. A grasp that fails (object does not fit, fingers cannot
/// reach it) counts as a jam with an empty log; configuration errors are
/// returned.
pub fn simulate_trial(
    scenario: &Scenario,
    kind: PlanKind,
    cycles: u32,
    trial: u64,
    catalogue: &Catalogue,
) -> Result<(GripperModel, TrajectoryLog, Option<Error>)> {
    let g = scenario.gripper(catalogue)?;
    let plan = build_plan(&g, kind, bench_direction(kind), cycles)?;
    let w = match scenario.initial_world(&g, trial, plan.phases[0].modes(), plan.start) {
        Ok(w) => w,
        Err(e @ Error::Kinematic(_)) => return Ok((g, TrajectoryLog::default(), Some(e))),
        Err(e) => return Err(e),
    };
    let (log, err) = run_plan_partial(&g, &w, &plan);
    Ok((g, log, err))
}

pub fn run_trial(scenario: &Scenario, kind: PlanKind, cycles: u32, trial: u64, catalogue: &Catalogue) -> Result<TrialOutcome> {
    let (_, log, err) = simulate_trial(scenario, kind, cycles, trial, catalogue)?;
    let (translation, rotation) = net_metrics(&log);
    Ok(TrialOutcome { translation, rotation, jammed: err.is_some(), snags: log.snag_count(), steps: log.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub surface: SurfacePreset,
    pub object: String,
    pub plan: PlanKind,
    /// Trials that ran to completion; statistics cover only these.
    pub trials: usize,
    pub mean_translation: f64,
    pub std_translation: f64,
    pub mean_rotation: f64,
    pub std_rotation: f64,
    pub jams: usize,
    pub snags: usize,
}

pub const BENCH_HEADER: [&str; 10] = [
    "surface",
    "object",
    "plan",
    "trials",
    "mean_translation_mm",
    "std_translation_mm",
    "mean_rotation_deg",
    "std_rotation_deg",
    "jams",
    "snags",
];

pub struct ObjectLabel<'a>(pub &'a ObjectConfig);

impl fmt::Display for ObjectLabel<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0.shape, self.0.width)
    }
}

/// Mean and sample standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn summarize(surface: SurfacePreset, object: &ObjectConfig, plan: PlanKind, outs: &[TrialOutcome]) -> BenchResult {
    let done: Vec<&TrialOutcome> = outs.iter().filter(|o| !o.jammed).collect();
    let t: Vec<f64> = done.iter().map(|o| o.translation).collect();
    let r: Vec<f64> = done.iter().map(|o| o.rotation).collect();
    let (mean_translation, std_translation) = mean_std(&t);
    let (mean_rotation, std_rotation) = mean_std(&r);
    BenchResult {
        surface,
        object: ObjectLabel(object).to_string(),
        plan,
        trials: done.len(),
        mean_translation,
        std_translation,
        mean_rotation,
        std_rotation,
        jams: outs.iter().filter(|o| o.jammed).count(),
        snags: outs.iter().map(|o| o.snags).sum(),
    }
}

/// Runs every (surface, object, plan) case for all trials in parallel.
/// Rows come back in config order regardless of scheduling.
pub fn run_bench(cfg: &BenchConfig, catalogue: &Catalogue) -> Result<Vec<BenchResult>> {
    if cfg.trials == 0 || cfg.cycles == 0 {
        return Err(Error::Domain("trials and cycles must be positive".into()));
    }
    let mut cases = Vec::new();
    for &s in &cfg.surfaces {
        for o in &cfg.objects {
            for &p in &cfg.plans {
                cases.push((s, o, p));
            }
        }
    }
    let jobs: Vec<(usize, u64)> =
        (0..cases.len()).flat_map(|c| (0..u64::from(cfg.trials)).map(move |t| (c, t))).collect();
    let outs: Vec<TrialOutcome> = jobs
        .par_iter()
        .map(|&(c, t)| {
            let (s, o, p) = cases[c];
            run_trial(&cfg.scenario(s, o), p, cfg.cycles, t, catalogue)
        })
        .collect::<Result<_>>()?;
    Ok(cases
        .iter()
        .zip(outs.chunks(cfg.trials as usize))
        .map(|(&(s, o, p), chunk)| summarize(s, o, p, chunk))
        .collect())
}

pub fn write_bench_csv<W: Write>(rows: &[BenchResult], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(BENCH_HEADER)?;
    for r in rows {
        out.write_record([
            r.surface.to_string(),
            r.object.clone(),
            r.plan.to_string(),
            r.trials.to_string(),
            r.mean_translation.to_string(),
            r.std_translation.to_string(),
            r.mean_rotation.to_string(),
            r.std_rotation.to_string(),
            r.jams.to_string(),
            r.snags.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Largest |mean translation| of the constant-friction surfaces on `object`
/// under `plan`.
pub fn constant_baseline(rows: &[BenchResult], object: &str, plan: PlanKind) -> Option<f64> {
    rows.iter()
        .filter(|r| r.object == object && r.plan == plan)
        .filter(|r| matches!(r.surface, SurfacePreset::ConstantLf | SurfacePreset::ConstantHf))
        .map(|r| r.mean_translation.abs())
        .reduce(f64::max)
}
