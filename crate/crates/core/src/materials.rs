//! Friction coefficients against an ABS counterface and per-surface
//! friction resolution.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fold_geometry::{self, FoldParameters, FrictionMode};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Material {
    Petg,
    Abs,
    Pla,
    Ecoflex0010,
    Ecoflex0020,
    Ecoflex0030,
    Custom(String),
}

impl Material {
    pub fn is_thermoplastic(&self) -> bool {
        matches!(self, Material::Petg | Material::Abs | Material::Pla)
    }

    pub fn is_silicone(&self) -> bool {
        matches!(self, Material::Ecoflex0010 | Material::Ecoflex0020 | Material::Ecoflex0030)
    }
}

impl fmt::Display for Material {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Material::Petg => f.write_str("PETG"),
            Material::Abs => f.write_str("ABS"),
            Material::Pla => f.write_str("PLA"),
            Material::Ecoflex0010 => f.write_str("Ecoflex00_10"),
            Material::Ecoflex0020 => f.write_str("Ecoflex00_20"),
            Material::Ecoflex0030 => f.write_str("Ecoflex00_30"),
            Material::Custom(name) => write!(f, "custom:{name}"),
        }
    }
}

impl FromStr for Material {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .chars()
            .filter(|c| !matches!(c, '_' | '-' | ' '))
            .collect::<String>()
            .to_ascii_lowercase();
        Ok(match norm.as_str() {
            "petg" => Material::Petg,
            "abs" => Material::Abs,
            "pla" => Material::Pla,
            "ecoflex0010" => Material::Ecoflex0010,
            "ecoflex0020" => Material::Ecoflex0020,
            "ecoflex0030" => Material::Ecoflex0030,
            _ => match s.strip_prefix("custom:") {
                Some(name) if !name.is_empty() => Material::Custom(name.to_string()),
                _ => return Err(Error::Parse(format!("unknown material `{s}`"))),
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Finish {
    Smooth,
    Planar,
    Ridged,
    Checkered,
    None,
}

impl fmt::Display for Finish {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Finish::Smooth => "smooth",
            Finish::Planar => "planar",
            Finish::Ridged => "ridged",
            Finish::Checkered => "checkered",
            Finish::None => "none",
        })
    }
}

impl FromStr for Finish {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "smooth" => Finish::Smooth,
            "planar" => Finish::Planar,
            "ridged" => Finish::Ridged,
            "checkered" => Finish::Checkered,
            "none" | "" => Finish::None,
            _ => return Err(Error::Parse(format!("unknown finish `{s}`"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "MaterialFinishRepr", into = "MaterialFinishRepr")]
pub struct MaterialFinish {
    pub material: Material,
    pub finish: Finish,
}

#[derive(Serialize, Deserialize)]
struct MaterialFinishRepr {
    material: String,
    #[serde(default)]
    finish: String,
}

impl TryFrom<MaterialFinishRepr> for MaterialFinish {
    type Error = Error;

    fn try_from(r: MaterialFinishRepr) -> Result<Self> {
        MaterialFinish::new(r.material.parse()?, r.finish.parse()?)
    }
}

impl From<MaterialFinish> for MaterialFinishRepr {
    fn from(m: MaterialFinish) -> Self {
        Self { material: m.material.to_string(), finish: m.finish.to_string() }
    }
}

impl MaterialFinish {
    /// Builds a pairing, rejecting finishes the material cannot carry.
    /// Thermoplastics are sanded smooth; silicones are cast planar, ridged or
    /// checkered.
    pub fn new(material: Material, finish: Finish) -> Result<Self> {
        let ok = if material.is_thermoplastic() {
            matches!(finish, Finish::Smooth | Finish::None)
        } else if material.is_silicone() {
            matches!(finish, Finish::Planar | Finish::Ridged | Finish::Checkered)
        } else {
            true
        };
        if !ok {
            return Err(Error::Parse(format!("{material} cannot carry a {finish} finish")));
        }
        Ok(Self { material, finish })
    }

    pub fn abs() -> Self {
        Self { material: Material::Abs, finish: Finish::Smooth }
    }

    pub fn ecoflex_10_checkered() -> Self {
        Self { material: Material::Ecoflex0010, finish: Finish::Checkered }
    }

    /// Key used in the catalogue; `none` and `smooth` are the same finish on
    /// a thermoplastic.
    fn key(&self) -> (Material, Finish) {
        let finish = if self.material.is_thermoplastic() { Finish::Smooth } else { self.finish };
        (self.material.clone(), finish)
    }
}

impl fmt::Display for MaterialFinish {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.material, self.finish)
    }
}

/// Coefficients of friction against ABS. Immutable once built.
#[derive(Debug, Clone)]
pub struct Catalogue {
    entries: BTreeMap<(Material, Finish), f64>,
}

impl Default for Catalogue {
    fn default() -> Self {
        use Finish::*;
        use Material::*;
        let table = [
            (Petg, Smooth, 0.08),
            (Abs, Smooth, 0.08),
            (Pla, Smooth, 0.08),
            (Ecoflex0010, Planar, 0.63),
            (Ecoflex0010, Ridged, 0.72),
            (Ecoflex0010, Checkered, 0.77),
            (Ecoflex0020, Planar, 0.57),
            (Ecoflex0020, Ridged, 0.55),
            (Ecoflex0020, Checkered, 0.64),
            (Ecoflex0030, Planar, 0.52),
            (Ecoflex0030, Ridged, 0.54),
            (Ecoflex0030, Checkered, 0.61),
        ];
        Self { entries: table.into_iter().map(|(m, f, mu)| ((m, f), mu)).collect() }
    }
}

#[derive(Debug, Deserialize)]
struct OverrideRow {
    material: String,
    finish: String,
    mu: f64,
}

impl Catalogue {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (MaterialFinish, f64)> + '_ {
        self.entries
            .iter()
            .map(|((m, f), &mu)| (MaterialFinish { material: m.clone(), finish: *f }, mu))
    }

    /// Returns a copy with rows from an override CSV (`material,finish,mu`)
    /// replacing or extending the table.
    pub fn with_overrides_csv<R: std::io::Read>(&self, reader: R) -> Result<Self> {
        let mut out = self.clone();
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        for row in rdr.deserialize() {
            let row: OverrideRow = row?;
            let mf = MaterialFinish::new(row.material.parse()?, row.finish.parse()?)?;
            check_mu(row.mu)?;
            out.entries.insert(mf.key(), row.mu);
        }
        Ok(out)
    }

    pub fn with_overrides_file(&self, path: &Path) -> Result<Self> {
        self.with_overrides_csv(std::fs::File::open(path)?)
    }

    /// Tabulated coefficient of `surface` sliding on `counterface`. Only ABS
    /// counterfaces were measured.
    pub fn mu_lookup(&self, counterface: &MaterialFinish, surface: &MaterialFinish) -> Result<f64> {
        if counterface.material != Material::Abs {
            return Err(Error::Lookup(format!(
                "no data for counterface {counterface}; supply a mu override"
            )));
        }
        self.entries
            .get(&surface.key())
            .copied()
            .ok_or_else(|| Error::Lookup(format!("no coefficient for {surface} on ABS")))
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu <= 2.0 {
        Ok(())
    } else {
        Err(Error::Lookup(format!("coefficient {mu} outside (0, 2]")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SurfaceKind {
    /// Single-material pad exposing one mode only.
    Constant { mode: FrictionMode },
    /// Folding surface exposing both modes.
    Ovf { fold: FoldParameters },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuOverride {
    pub lf: f64,
    pub hf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSpec {
    #[serde(flatten)]
    pub kind: SurfaceKind,
    pub low_material: MaterialFinish,
    pub high_material: MaterialFinish,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_override: Option<MuOverride>,
}

impl SurfaceSpec {
    /// Sanded ABS pad.
    pub fn constant_low() -> Self {
        Self {
            kind: SurfaceKind::Constant { mode: FrictionMode::Lf },
            low_material: MaterialFinish::abs(),
            high_material: MaterialFinish::ecoflex_10_checkered(),
            mu_override: None,
        }
    }

    /// Checkered Ecoflex 00-10 pad.
    pub fn constant_high() -> Self {
        Self { kind: SurfaceKind::Constant { mode: FrictionMode::Hf }, ..Self::constant_low() }
    }

    /// Folding surface with ABS low-friction faces and checkered Ecoflex
    /// 00-10 high-friction faces.
    pub fn ovf(fold: FoldParameters) -> Self {
        Self { kind: SurfaceKind::Ovf { fold }, ..Self::constant_low() }
    }

    pub fn fold(&self) -> Option<&FoldParameters> {
        match &self.kind {
            SurfaceKind::Ovf { fold } => Some(fold),
            SurfaceKind::Constant { .. } => None,
        }
    }

    pub fn modes(&self) -> &'static [FrictionMode] {
        match self.kind {
            SurfaceKind::Constant { mode: FrictionMode::Hf } => &[FrictionMode::Hf],
            SurfaceKind::Constant { mode: FrictionMode::Lf } => &[FrictionMode::Lf],
            SurfaceKind::Ovf { .. } => &[FrictionMode::Hf, FrictionMode::Lf],
        }
    }

    pub fn supports(&self, mode: FrictionMode) -> bool {
        self.modes().contains(&mode)
    }

    /// The mode the surface actually shows when `requested` is commanded.
    /// Constant pads ignore commands.
    pub fn effective_mode(&self, requested: FrictionMode) -> FrictionMode {
        match self.kind {
            SurfaceKind::Constant { mode } => mode,
            SurfaceKind::Ovf { .. } => requested,
        }
    }

    /// Surface height above the finger backing in `mode` (mm). Constant pads
    /// are modelled as zero-thickness.
    pub fn height(&self, mode: FrictionMode) -> Result<f64> {
        match &self.kind {
            SurfaceKind::Constant { .. } => Ok(0.0),
            SurfaceKind::Ovf { fold } => fold_geometry::thickness(fold, mode),
        }
    }

    pub fn label(&self) -> String {
        match &self.kind {
            SurfaceKind::Constant { mode } => format!("constant-{}", mode.as_str().to_lowercase()),
            SurfaceKind::Ovf { fold } => {
                format!("ovf-l{}-k{}-n{}", fold.l, fold.k(), fold.n_units)
            }
        }
    }
}

/// Coefficient of friction of `s` in `mode` against `counterface`.
pub fn surface_mu(
    catalogue: &Catalogue,
    s: &SurfaceSpec,
    mode: FrictionMode,
    counterface: &MaterialFinish,
) -> Result<f64> {
    if !s.supports(mode) {
        return Err(Error::Mode { mode: mode.to_string(), kind: s.label() });
    }
    let mu = match (s.mu_override, mode) {
        (Some(o), FrictionMode::Lf) => o.lf,
        (Some(o), FrictionMode::Hf) => o.hf,
        (None, FrictionMode::Lf) => catalogue.mu_lookup(counterface, &s.low_material)?,
        (None, FrictionMode::Hf) => catalogue.mu_lookup(counterface, &s.high_material)?,
    };
    check_mu(mu)?;
    Ok(mu)
}

/// The six finger surfaces of the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurfacePreset {
    ConstantLf,
    ConstantHf,
    OvfWeighted,
    OvfMedium,
    OvfLow,
    OvfHigh,
}

impl SurfacePreset {
    pub const ALL: [SurfacePreset; 6] = [
        SurfacePreset::ConstantLf,
        SurfacePreset::ConstantHf,
        SurfacePreset::OvfWeighted,
        SurfacePreset::OvfMedium,
        SurfacePreset::OvfLow,
        SurfacePreset::OvfHigh,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SurfacePreset::ConstantLf => "constant-lf",
            SurfacePreset::ConstantHf => "constant-hf",
            SurfacePreset::OvfWeighted => "ovf-weighted",
            SurfacePreset::OvfMedium => "ovf-medium",
            SurfacePreset::OvfLow => "ovf-low",
            SurfacePreset::OvfHigh => "ovf-high",
        }
    }

    /// Fold parameters of the folding presets (α = 30°, t = 0.3, m = 2).
    pub fn fold(self) -> Option<FoldParameters> {
        let a = 30f64.to_radians();
        match self {
            SurfacePreset::ConstantLf | SurfacePreset::ConstantHf => None,
            SurfacePreset::OvfWeighted => Some(FoldParameters::with_faces(3.0, 8.0, a, 5)),
            SurfacePreset::OvfMedium => Some(FoldParameters::with_faces(5.0, 5.0, a, 5)),
            SurfacePreset::OvfLow => Some(FoldParameters::with_faces(9.6, 9.6, a, 3)),
            SurfacePreset::OvfHigh => Some(FoldParameters::with_faces(4.0, 4.0, a, 8)),
        }
    }

    pub fn spec(self) -> SurfaceSpec {
        match self {
            SurfacePreset::ConstantLf => SurfaceSpec::constant_low(),
            SurfacePreset::ConstantHf => SurfaceSpec::constant_high(),
            _ => SurfaceSpec::ovf(self.fold().unwrap()),
        }
    }
}

impl fmt::Display for SurfacePreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SurfacePreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SurfacePreset::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown surface preset `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mf(m: Material, f: Finish) -> MaterialFinish {
        MaterialFinish::new(m, f).unwrap()
    }

    #[test]
    fn presets_round_trip_names() {
        for p in SurfacePreset::ALL {
            assert_eq!(p.as_str().parse::<SurfacePreset>().unwrap(), p);
        }
        let dh = fold_geometry::delta_h(&SurfacePreset::OvfWeighted.fold().unwrap()).unwrap();
        assert!((dh - 4.59).abs() < 0.01);
    }

    #[test]
    fn table_values() {
        let c = Catalogue::default();
        let abs = MaterialFinish::abs();
        assert_eq!(c.len(), 12);
        assert_eq!(c.mu_lookup(&abs, &abs).unwrap(), 0.08);
        assert_eq!(c.mu_lookup(&abs, &mf(Material::Ecoflex0010, Finish::Checkered)).unwrap(), 0.77);
        assert_eq!(c.mu_lookup(&abs, &mf(Material::Ecoflex0030, Finish::Ridged)).unwrap(), 0.54);
        assert_eq!(c.mu_lookup(&abs, &mf(Material::Pla, Finish::None)).unwrap(), 0.08);
    }

    #[test]
    fn checkered_beats_planar() {
        let c = Catalogue::default();
        let abs = MaterialFinish::abs();
        for m in [Material::Ecoflex0010, Material::Ecoflex0020, Material::Ecoflex0030] {
            let p = c.mu_lookup(&abs, &mf(m.clone(), Finish::Planar)).unwrap();
            let ch = c.mu_lookup(&abs, &mf(m, Finish::Checkered)).unwrap();
            assert!(ch >= p);
        }
    }

    #[test]
    fn highest_entry_is_checkered_ecoflex_10() {
        let c = Catalogue::default();
        let (best, _) = c.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        assert_eq!(best, MaterialFinish::ecoflex_10_checkered());
    }

    #[test]
    fn unknown_counterface_or_pair_fails() {
        let c = Catalogue::default();
        let pla = mf(Material::Pla, Finish::Smooth);
        assert!(matches!(c.mu_lookup(&pla, &pla), Err(Error::Lookup(_))));
        let custom = mf(Material::Custom("felt".into()), Finish::None);
        assert!(matches!(c.mu_lookup(&MaterialFinish::abs(), &custom), Err(Error::Lookup(_))));
    }

    #[test]
    fn finish_must_suit_material() {
        assert!(MaterialFinish::new(Material::Abs, Finish::Checkered).is_err());
        assert!(MaterialFinish::new(Material::Ecoflex0020, Finish::Smooth).is_err());
    }

    #[test]
    fn overrides_extend_the_table() {
        let csv = "material,finish,mu\ncustom:felt,none,0.3\nABS,smooth,0.1\n";
        let c = Catalogue::default().with_overrides_csv(csv.as_bytes()).unwrap();
        let abs = MaterialFinish::abs();
        assert_eq!(c.mu_lookup(&abs, &abs).unwrap(), 0.1);
        let felt = mf(Material::Custom("felt".into()), Finish::None);
        assert_eq!(c.mu_lookup(&abs, &felt).unwrap(), 0.3);
        let bad = "material,finish,mu\nABS,smooth,3.0\n";
        assert!(Catalogue::default().with_overrides_csv(bad.as_bytes()).is_err());
    }

    #[test]
    fn surface_modes() {
        let c = Catalogue::default();
        let abs = MaterialFinish::abs();
        let fold = FoldParameters::with_faces(5.0, 5.0, 30f64.to_radians(), 5);
        let s = SurfaceSpec::ovf(fold);
        assert_eq!(surface_mu(&c, &s, FrictionMode::Hf, &abs).unwrap(), 0.77);
        assert_eq!(surface_mu(&c, &s, FrictionMode::Lf, &abs).unwrap(), 0.08);

        let hi = SurfaceSpec::constant_high();
        assert_eq!(surface_mu(&c, &hi, FrictionMode::Hf, &abs).unwrap(), 0.77);
        assert!(matches!(surface_mu(&c, &hi, FrictionMode::Lf, &abs), Err(Error::Mode { .. })));

        let mut o = s.clone();
        o.mu_override = Some(MuOverride { lf: 0.1, hf: 0.5 });
        assert_eq!(surface_mu(&c, &o, FrictionMode::Hf, &abs).unwrap(), 0.5);
        assert_eq!(surface_mu(&c, &o, FrictionMode::Lf, &abs).unwrap(), 0.1);
    }

    #[test]
    fn surface_spec_toml_round_trip() {
        let fold = FoldParameters::with_faces(3.0, 8.0, 30f64.to_radians(), 5);
        for s in [SurfaceSpec::ovf(fold), SurfaceSpec::constant_low()] {
            let text = toml::to_string(&s).unwrap();
            let back: SurfaceSpec = toml::from_str(&text).unwrap();
            assert_eq!(back, s);
        }
    }
}
