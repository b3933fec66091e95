//! Parametric model of the origami variable-friction fold pattern.
//!
//! A fold unit is described by the low-friction face length `l`, the
//! high/low length ratio `R` (so the high-friction face is `k = R·l`), the
//! folding angle `alpha`, the folding-layer thickness `t`, the limiting-face
//! length `m` and the number of units `N` along one surface.
//!
//! ```text
//! h_HF = 2t + l·sin(alpha) + m·cos(alpha)
//! h_LF = k·sin(alpha) + h_HF / cos(alpha)
//! Δh   = h_LF − h_HF
//! ```

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};

/// Fabrication bounds on the folding angle (rad).
pub const ALPHA_BOUNDS: (f64, f64) = (0.175, 0.785);
/// Fabrication bounds on the low-friction face length (mm).
pub const L_BOUNDS: (f64, f64) = (3.0, 10.0);
/// Folding-layer thickness used for every fabricated surface (mm).
pub const DEFAULT_T: f64 = 0.3;
/// Limiting-face length used for every fabricated surface (mm).
pub const DEFAULT_M: f64 = 2.0;

/// Which face of the fold is exposed as the outermost contact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrictionMode {
    /// Flat state: high-friction faces on top.
    Hf,
    /// Folded state: low-friction faces on top.
    Lf,
}

impl FrictionMode {
    pub fn other(self) -> Self {
        match self {
            FrictionMode::Hf => FrictionMode::Lf,
            FrictionMode::Lf => FrictionMode::Hf,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FrictionMode::Hf => "HF",
            FrictionMode::Lf => "LF",
        }
    }
}

impl fmt::Display for FrictionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FrictionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hf" | "high" => Ok(FrictionMode::Hf),
            "lf" | "low" => Ok(FrictionMode::Lf),
            _ => Err(Error::Parse(format!("unknown friction mode `{s}`"))),
        }
    }
}

/// Parameters of one fold pattern. `k` and `beta` are derived on demand so
/// they can never disagree with `l`, `ratio` and `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldParameters {
    /// Low-friction face length (mm).
    pub l: f64,
    /// High/low face length ratio `R`.
    pub ratio: f64,
    /// Folding angle (rad).
    pub alpha: f64,
    /// Folding-layer thickness (mm).
    pub t: f64,
    /// Limiting-face length (mm).
    pub m: f64,
    /// Pattern density `N`.
    pub n_units: u32,
}

impl FoldParameters {
    pub fn new(l: f64, ratio: f64, alpha: f64, t: f64, m: f64, n_units: u32) -> Self {
        Self { l, ratio, alpha, t, m, n_units }
    }

    /// Pattern with explicit face lengths `l` and `k`.
    pub fn with_faces(l: f64, k: f64, alpha: f64, n_units: u32) -> Self {
        Self::new(l, k / l, alpha, DEFAULT_T, DEFAULT_M, n_units)
    }

    /// High-friction face length.
    pub fn k(&self) -> f64 {
        self.ratio * self.l
    }

    /// Low-friction offset angle, `pi/2 - alpha`.
    pub fn beta(&self) -> f64 {
        FRAC_PI_2 - self.alpha
    }

    pub fn alpha_deg(&self) -> f64 {
        self.alpha.to_degrees()
    }
}

/// Checks `p` and returns it unchanged, or every violated constraint.
///
/// Non-positive lengths, a non-positive or non-acute folding angle, a
/// non-positive ratio and a zero unit count are always rejected. With
/// `strict_bounds` the fabrication box on `alpha` and `l` is enforced
/// as well.
pub fn validate_params(p: &FoldParameters, strict_bounds: bool) -> Result<FoldParameters> {
    let mut v = Vec::new();
    let mut hard = |field: &'static str, ok: bool, message: &str| {
        if !ok {
            v.push(Violation { field, message: message.to_string(), hard: true });
        }
    };
    hard("l", p.l > 0.0 && p.l.is_finite(), "l must be positive");
    hard("R", p.ratio > 0.0 && p.ratio.is_finite(), "R must be positive");
    hard("alpha", p.alpha > 0.0, "alpha must be positive");
    hard("alpha", p.alpha < FRAC_PI_2 && p.alpha.is_finite(), "alpha must be below pi/2");
    hard("t", p.t > 0.0 && p.t.is_finite(), "t must be positive");
    hard("m", p.m > 0.0 && p.m.is_finite(), "m must be positive");
    hard("n_units", p.n_units >= 1, "n_units must be at least 1");

    if strict_bounds {
        let (amin, amax) = ALPHA_BOUNDS;
        if p.alpha > 0.0 && p.alpha < amin {
            v.push(soft("alpha", format!("alpha below {amin} rad")));
        }
        if p.alpha > amax && p.alpha < FRAC_PI_2 {
            v.push(soft("alpha", format!("alpha above {amax} rad")));
        }
        let (lmin, lmax) = L_BOUNDS;
        if p.l > 0.0 && p.l < lmin {
            v.push(soft("l", format!("l below {lmin} mm")));
        }
        if p.l > lmax {
            v.push(soft("l", format!("l above {lmax} mm")));
        }
    }

    if v.is_empty() {
        Ok(*p)
    } else {
        Err(Error::Validation(v))
    }
}

fn soft(field: &'static str, message: String) -> Violation {
    Violation { field, message, hard: false }
}

/// Structure thickness in high-friction mode (mm).
pub fn thickness_high(p: &FoldParameters) -> f64 {
    2.0 * p.t + p.l * p.alpha.sin() + p.m * p.alpha.cos()
}

/// Structure thickness in low-friction mode (mm).
pub fn thickness_low(p: &FoldParameters) -> Result<f64> {
    if !(p.alpha.abs() < FRAC_PI_2) {
        return Err(Error::Domain(format!(
            "alpha = {} rad: sec(alpha) is singular at or beyond pi/2",
            p.alpha
        )));
    }
    Ok(p.k() * p.alpha.sin() + thickness_high(p) / p.alpha.cos())
}

/// Thickness change between the two modes, `h_LF - h_HF` (mm).
pub fn delta_h(p: &FoldParameters) -> Result<f64> {
    Ok(thickness_low(p)? - thickness_high(p))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThicknessReport {
    pub h_hf: f64,
    pub h_lf: f64,
    pub delta_h: f64,
}

pub fn thickness_report(p: &FoldParameters) -> Result<ThicknessReport> {
    let h_hf = thickness_high(p);
    let h_lf = thickness_low(p)?;
    Ok(ThicknessReport { h_hf, h_lf, delta_h: h_lf - h_hf })
}

/// Thickness of the structure in `mode`.
pub fn thickness(p: &FoldParameters, mode: FrictionMode) -> Result<f64> {
    match mode {
        FrictionMode::Hf => Ok(thickness_high(p)),
        FrictionMode::Lf => thickness_low(p),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceLabel {
    HighFriction,
    LowFriction,
    Limiting,
    Hinge,
}

impl FaceLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            FaceLabel::HighFriction => "high_friction",
            FaceLabel::LowFriction => "low_friction",
            FaceLabel::Limiting => "limiting",
            FaceLabel::Hinge => "hinge",
        }
    }

    /// Label of the face that is on top in `mode`.
    pub fn exposed(mode: FrictionMode) -> Self {
        match mode {
            FrictionMode::Hf => FaceLabel::HighFriction,
            FrictionMode::Lf => FaceLabel::LowFriction,
        }
    }
}

/// Height-field profile of a folded surface. `x` runs along the surface,
/// `y` is the height above the finger backing.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossSection {
    pub mode: FrictionMode,
    pub vertices: Vec<[f64; 2]>,
    /// Label of segment `i`, which runs from `vertices[i]` to `vertices[i + 1]`.
    pub face_labels: Vec<FaceLabel>,
    pub period: f64,
    pub total_length: f64,
}

impl CrossSection {
    pub fn segments(&self) -> impl Iterator<Item = ([f64; 2], [f64; 2], FaceLabel)> + '_ {
        self.vertices
            .windows(2)
            .zip(&self.face_labels)
            .map(|(w, &lab)| (w[0], w[1], lab))
    }

    pub fn height(&self) -> f64 {
        let (lo, hi) = self
            .vertices
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v[1]), hi.max(v[1])));
        hi - lo
    }

    /// Indices of the segments lying at the maximum height.
    pub fn top_segments(&self) -> Vec<usize> {
        let top = self.vertices.iter().map(|v| v[1]).fold(f64::NEG_INFINITY, f64::max);
        self.segments()
            .enumerate()
            .filter(|(_, (a, b, _))| a[1] == top && b[1] == top)
            .map(|(i, _)| i)
            .collect()
    }
}

/// One fold unit, as (dx, dy, label) steps starting at the left edge of the
/// exposed face. The unit starts and ends at full height.
fn unit_steps(p: &FoldParameters, mode: FrictionMode) -> Result<(f64, Vec<(f64, f64, FaceLabel)>)> {
    let (sa, ca) = p.alpha.sin_cos();
    let k = p.k();
    let steps = match mode {
        FrictionMode::Hf => {
            let h = thickness_high(p);
            vec![
                (k, 0.0, FaceLabel::HighFriction),
                (0.0, -p.t, FaceLabel::Hinge),
                (p.m * sa, -p.m * ca, FaceLabel::Limiting),
                (p.l * ca, -p.l * sa, FaceLabel::LowFriction),
                (0.0, -p.t, FaceLabel::Hinge),
                (0.0, h, FaceLabel::Limiting),
            ]
        }
        FrictionMode::Lf => {
            let h = thickness_low(p)?;
            // The flexible hinges take up whatever height the rigid faces do not.
            let hinge = 0.5 * (h - p.m - k * sa);
            vec![
                (p.l, 0.0, FaceLabel::LowFriction),
                (0.0, -hinge, FaceLabel::Hinge),
                (0.0, -p.m, FaceLabel::Limiting),
                (k * ca, -k * sa, FaceLabel::HighFriction),
                (0.0, -hinge, FaceLabel::Hinge),
                (0.0, h, FaceLabel::Limiting),
            ]
        }
    };
    let h = thickness(p, mode)?;
    Ok((h, steps))
}

/// Generates the labelled profile of `p` in `mode`.
pub fn cross_section(p: &FoldParameters, mode: FrictionMode) -> Result<CrossSection> {
    validate_params(p, false)?;
    let (h, steps) = unit_steps(p, mode)?;
    let period: f64 = steps.iter().map(|s| s.0).sum();

    let n = p.n_units as usize;
    let mut vertices = Vec::with_capacity(n * steps.len() + 1);
    let mut face_labels = Vec::with_capacity(n * steps.len());
    vertices.push([0.0, h]);
    for u in 0..n {
        let x0 = u as f64 * period;
        let (mut x, mut y) = (x0, h);
        for (i, &(dx, dy, label)) in steps.iter().enumerate() {
            x += dx;
            y += dy;
            // Pin the bottom and top of each unit exactly so the extent is exact.
            if i == steps.len() - 2 {
                y = 0.0;
            }
            if i == steps.len() - 1 {
                x = x0 + period;
                y = h;
            }
            if i == 0 {
                y = h;
            }
            vertices.push([x, y]);
            face_labels.push(label);
        }
    }
    Ok(CrossSection {
        mode,
        vertices,
        face_labels,
        period,
        total_length: period * n as f64,
    })
}

/// Horizontal opening between consecutive exposed faces in `mode` (mm),
/// measured on a generated profile.
pub fn valley_gap(p: &FoldParameters, mode: FrictionMode) -> Result<f64> {
    let mut two = *p;
    two.n_units = p.n_units.max(2);
    let cs = cross_section(&two, mode)?;
    let tops = cs.top_segments();
    let end_of_first = cs.vertices[tops[0] + 1][0];
    let start_of_second = cs.vertices[tops[1]][0];
    Ok(start_of_second - end_of_first)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCell {
    pub alpha: f64,
    pub l: f64,
    pub delta_h: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub alpha_steps: usize,
    pub l_steps: usize,
    /// Row-major: `cells[i * l_steps + j]` has the `i`-th alpha and `j`-th l.
    pub cells: Vec<SweepCell>,
}

impl SweepGrid {
    pub fn at(&self, i: usize, j: usize) -> &SweepCell {
        &self.cells[i * self.l_steps + j]
    }

    pub fn min_cell(&self) -> &SweepCell {
        self.cells
            .iter()
            .min_by(|a, b| a.delta_h.total_cmp(&b.delta_h))
            .expect("grid is never empty")
    }
}

fn linspace(lo: f64, hi: f64, steps: usize, name: &str) -> Result<Vec<f64>> {
    if !(lo <= hi) {
        return Err(Error::Domain(format!("empty {name} range [{lo}, {hi}]")));
    }
    if lo == hi {
        return Ok(vec![lo]);
    }
    if steps < 2 {
        return Err(Error::Domain(format!("{name} range needs at least 2 steps")));
    }
    let d = (hi - lo) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| if i == steps - 1 { hi } else { lo + d * i as f64 })
        .collect())
}

/// Evaluates Δh over an `alpha × l` grid with `ratio`, `t` and `m` fixed.
pub fn sweep_design_space(
    alpha_range: (f64, f64),
    l_range: (f64, f64),
    ratio: f64,
    t: f64,
    m: f64,
    steps: usize,
) -> Result<SweepGrid> {
    let alphas = linspace(alpha_range.0, alpha_range.1, steps, "alpha")?;
    let ls = linspace(l_range.0, l_range.1, steps, "l")?;
    for (a, l) in [(alphas[0], ls[0]), (*alphas.last().unwrap(), *ls.last().unwrap())] {
        validate_params(&FoldParameters::new(l, ratio, a, t, m, 1), false)?;
    }
    let cells = alphas
        .par_iter()
        .flat_map_iter(|&alpha| {
            ls.iter().map(move |&l| {
                let p = FoldParameters::new(l, ratio, alpha, t, m, 1);
                SweepCell { alpha, l, delta_h: delta_h(&p).expect("alpha validated below pi/2") }
            })
        })
        .collect();
    Ok(SweepGrid { alpha_steps: alphas.len(), l_steps: ls.len(), cells })
}

/// On-disk parameter file. Exactly one of `alpha_rad` / `alpha_deg` is given.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub l_mm: f64,
    #[serde(rename = "R", default = "one")]
    pub ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_rad: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_deg: Option<f64>,
    #[serde(default = "default_t")]
    pub t_mm: f64,
    #[serde(default = "default_m")]
    pub m_mm: f64,
    pub n_units: u32,
}

fn one() -> f64 {
    1.0
}
fn default_t() -> f64 {
    DEFAULT_T
}
fn default_m() -> f64 {
    DEFAULT_M
}

impl ParamsFile {
    pub fn to_params(&self) -> Result<FoldParameters> {
        let alpha = match (self.alpha_rad, self.alpha_deg) {
            (Some(r), None) => r,
            (None, Some(d)) => d.to_radians(),
            (Some(_), Some(_)) => {
                return Err(Error::Parse("give alpha_rad or alpha_deg, not both".into()))
            }
            (None, None) => return Err(Error::Parse("missing alpha_rad or alpha_deg".into())),
        };
        Ok(FoldParameters::new(self.l_mm, self.ratio, alpha, self.t_mm, self.m_mm, self.n_units))
    }
}

impl From<&FoldParameters> for ParamsFile {
    fn from(p: &FoldParameters) -> Self {
        Self {
            l_mm: p.l,
            ratio: p.ratio,
            alpha_rad: Some(p.alpha),
            alpha_deg: None,
            t_mm: p.t,
            m_mm: p.m,
            n_units: p.n_units,
        }
    }
}

pub fn parse_params(text: &str) -> Result<FoldParameters> {
    let f: ParamsFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    f.to_params()
}

pub fn load_params(path: &Path) -> Result<FoldParameters> {
    parse_params(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn deg(d: f64) -> f64 {
        d.to_radians()
    }

    #[test]
    fn validate_accepts_medium_density_surface() {
        let p = FoldParameters::new(5.0, 1.0, deg(30.0), 0.3, 2.0, 5);
        assert!(validate_params(&p, true).is_ok());
        assert_abs_diff_eq!(p.k(), 5.0);
        assert_abs_diff_eq!(p.beta() + p.alpha, FRAC_PI_2);
    }

    #[test]
    fn strict_rejects_short_low_face() {
        let p = FoldParameters::new(2.0, 1.0, deg(30.0), 0.3, 2.0, 5);
        let Err(Error::Validation(v)) = validate_params(&p, true) else { panic!() };
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].message, "l below 3 mm");
        assert!(validate_params(&p, false).is_ok());
    }

    #[test]
    fn zero_alpha_is_a_hard_error() {
        let p = FoldParameters::new(5.0, 1.0, 0.0, 0.3, 2.0, 5);
        for strict in [false, true] {
            let Err(Error::Validation(v)) = validate_params(&p, strict) else { panic!() };
            assert!(v.iter().any(|x| x.hard && x.message == "alpha must be positive"));
        }
    }

    #[test]
    fn every_violation_is_reported() {
        let p = FoldParameters::new(-1.0, 1.0, deg(60.0), 0.0, -2.0, 0);
        let Err(Error::Validation(v)) = validate_params(&p, true) else { panic!() };
        let fields: Vec<_> = v.iter().map(|x| x.field).collect();
        assert!(fields.contains(&"l"));
        assert!(fields.contains(&"t"));
        assert!(fields.contains(&"m"));
        assert!(fields.contains(&"n_units"));
        assert!(fields.contains(&"alpha"));
    }

    #[test]
    fn thickness_values() {
        let p = FoldParameters::new(5.0, 1.0, deg(30.0), 0.3, 2.0, 5);
        // 0.6 + 2.5 + 2 cos 30°
        assert_abs_diff_eq!(thickness_high(&p), 4.832, epsilon = 5e-4);
        assert_abs_diff_eq!(thickness_low(&p).unwrap(), 8.080, epsilon = 5e-4);
        let q = FoldParameters::with_faces(3.0, 8.0, deg(30.0), 5);
        assert_abs_diff_eq!(thickness_high(&q), 3.832, epsilon = 5e-4);
        assert_abs_diff_eq!(thickness_low(&q).unwrap(), 8.425, epsilon = 5e-4);
    }

    #[test]
    fn degenerate_thicknesses_vanish() {
        let p = FoldParameters::new(5.0, 0.0, 0.0, 0.0, 0.0, 1);
        assert_eq!(thickness_high(&p), 0.0);
        assert_eq!(thickness_low(&p).unwrap(), 0.0);
    }

    #[test]
    fn thickness_low_rejects_right_angle() {
        let p = FoldParameters::new(5.0, 1.0, FRAC_PI_2, 0.3, 2.0, 1);
        assert!(matches!(thickness_low(&p), Err(Error::Domain(_))));
        assert!(matches!(delta_h(&p), Err(Error::Domain(_))));
    }

    #[test]
    fn published_delta_h() {
        let cases = [(3.0, 8.0, 4.59), (5.0, 5.0, 3.25), (9.6, 9.6, 5.90), (4.0, 4.0, 2.67)];
        for (l, k, want) in cases {
            let p = FoldParameters::with_faces(l, k, deg(30.0), 5);
            assert_abs_diff_eq!(delta_h(&p).unwrap(), want, epsilon = 0.01);
        }
    }

    #[test]
    fn cross_section_extents_and_tops() {
        let p = FoldParameters::new(5.0, 1.0, deg(30.0), 0.3, 2.0, 5);
        let hf = cross_section(&p, FrictionMode::Hf).unwrap();
        assert_abs_diff_eq!(hf.height(), thickness_high(&p), epsilon = 1e-9);
        let tops = hf.top_segments();
        assert_eq!(tops.len(), 5);
        for i in tops {
            assert_eq!(hf.face_labels[i], FaceLabel::HighFriction);
            let (a, b) = (hf.vertices[i], hf.vertices[i + 1]);
            assert_abs_diff_eq!(b[0] - a[0], 5.0, epsilon = 1e-12);
        }
        let lf = cross_section(&p, FrictionMode::Lf).unwrap();
        assert_abs_diff_eq!(lf.height(), thickness_low(&p).unwrap(), epsilon = 1e-9);
        for i in lf.top_segments() {
            assert_eq!(lf.face_labels[i], FaceLabel::LowFriction);
            assert_eq!(lf.vertices[i][1], lf.vertices[i + 1][1]);
        }
    }

    #[test]
    fn cross_section_is_periodic_and_monotone() {
        let mut p = FoldParameters::new(5.0, 1.0, deg(30.0), 0.3, 2.0, 1);
        let one = cross_section(&p, FrictionMode::Lf).unwrap();
        p.n_units = 3;
        let three = cross_section(&p, FrictionMode::Lf).unwrap();
        assert_abs_diff_eq!(three.total_length, 3.0 * one.total_length, epsilon = 1e-12);
        assert!(three.vertices.windows(2).all(|w| w[1][0] >= w[0][0]));
        assert_eq!(cross_section(&p, FrictionMode::Lf).unwrap(), three);
    }

    #[test]
    fn valley_gap_shrinks_with_density() {
        let dense = FoldParameters::with_faces(4.0, 4.0, deg(30.0), 8);
        let sparse = FoldParameters::with_faces(9.6, 9.6, deg(30.0), 3);
        assert!(
            valley_gap(&dense, FrictionMode::Lf).unwrap()
                < valley_gap(&sparse, FrictionMode::Lf).unwrap()
        );
    }

    #[test]
    fn sweep_single_point_and_empty_range() {
        let g = sweep_design_space((0.5, 0.5), (5.0, 5.0), 1.0, 0.3, 2.0, 10).unwrap();
        assert_eq!(g.cells.len(), 1);
        let p = FoldParameters::new(5.0, 1.0, 0.5, 0.3, 2.0, 1);
        assert_eq!(g.cells[0].delta_h, delta_h(&p).unwrap());
        assert!(sweep_design_space((0.6, 0.5), (3.0, 10.0), 1.0, 0.3, 2.0, 10).is_err());
    }

    #[test]
    fn params_file_accepts_degrees_or_radians() {
        let a = parse_params("l_mm = 5\nR = 1\nalpha_deg = 30\nt_mm = 0.3\nm_mm = 2\nn_units = 5\n")
            .unwrap();
        let b = parse_params(&format!("l_mm = 5\nalpha_rad = {}\nn_units = 5\n", deg(30.0))).unwrap();
        assert_abs_diff_eq!(a.alpha, b.alpha, epsilon = 1e-15);
        assert_eq!(a.m, b.m);
        assert!(parse_params("l_mm = 5\nn_units = 5\n").is_err());
        assert!(parse_params("l_mm = 5\nalpha_deg = 30\nalpha_rad = 0.5\nn_units = 5\n").is_err());
    }
}
