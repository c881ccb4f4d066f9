//! JSON scenario documents: parsing, validation and conversion into model
//! inputs.
//!
//! Lengths are in metres; seeds, pair numbers and transmissions are unitless.

use std::fs::File;
use std::path::{Path, PathBuf};

use pdcsim_core::correlations::ParamGrid;
use pdcsim_core::gaussian::ModeParams;
use pdcsim_core::ghost::{centered_grid, EvalGrids, GhostGeometry, KernelProfile, QGrid, SampledObject, Variant};
use serde::Deserialize;
use serde_json::Value;

use crate::fast::Method;
use crate::io::read_object;

/// A validation failure, tagged with the dotted path of the offending field.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{field}: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl ToString) -> Self {
        Self { field: field.into(), message: message.to_string() }
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

/// A parsed scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub experiment: Experiment,
    pub output_dir: Option<PathBuf>,
    /// Seeds the randomly drawn property checks.
    pub seed: u64,
    /// Directory that relative input paths are resolved against.
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    SeparabilitySweep(SweepConfig),
    NrfSweep(SweepConfig),
    OracleValidate(OracleConfig),
    GhostImage(GhostConfig),
    GhostDiffraction(GhostConfig),
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::SeparabilitySweep(_) => "separability-sweep",
            Self::NrfSweep(_) => "nrf-sweep",
            Self::OracleValidate(_) => "oracle-validate",
            Self::GhostImage(_) => "ghost-image",
            Self::GhostDiffraction(_) => "ghost-diffraction",
        }
    }
}

/// One grid axis: `{"list": [..]}`, `{"linspace": {start, stop, num}}` or
/// `{"logspace": {start, stop, num}}`. Both ranges include their endpoints;
/// `logspace` takes the endpoint values themselves, not exponents.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum Axis {
    List(Vec<f64>),
    Linspace(Range),
    Logspace(Range),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub num: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Self::List(v) => v.clone(),
            Self::Linspace(r) => r.spaced(|s| r.start + s * (r.stop - r.start)),
            Self::Logspace(r) => r.spaced(|s| r.start * (r.stop / r.start).powf(s)),
        }
    }

    fn check(&self, field: &str, min: f64, max: f64) -> Result<Vec<f64>> {
        match self {
            Self::List(v) if v.is_empty() => {
                return Err(ConfigError::new(format!("{field}.list"), "must not be empty"))
            }
            Self::Linspace(r) | Self::Logspace(r) if r.num == 0 => {
                return Err(ConfigError::new(format!("{field}.num"), "must be at least 1"))
            }
            Self::Logspace(r) if !(r.start > 0.0 && r.stop > 0.0) => {
                return Err(ConfigError::new(format!("{field}.logspace"), "endpoints must be positive"))
            }
            _ => {}
        }
        let values = self.values();
        for (i, &v) in values.iter().enumerate() {
            if !(v.is_finite() && v >= min && v <= max) {
                let range = if max == f64::MAX {
                    format!("must be finite and at least {min}")
                } else {
                    format!("must lie in [{min}, {max}]")
                };
                return Err(ConfigError::new(format!("{field}[{i}]"), format!("{v}: {range}")));
            }
        }
        Ok(values)
    }
}

impl Range {
    fn spaced(&self, at: impl Fn(f64) -> f64) -> Vec<f64> {
        if self.num == 1 {
            return vec![self.start];
        }
        let last = (self.num - 1) as f64;
        let mut v: Vec<f64> = (0..self.num).map(|i| at(i as f64 / last)).collect();
        v[self.num - 1] = self.stop;
        v
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub mu_t: Axis,
    pub mu_r: Axis,
    pub n_pdc: Axis,
    #[serde(default)]
    pub phi: f64,
}

/// Inputs of the separability and NRF sweeps.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub grid: GridConfig,
    /// Arm transmissions; `[1]` when absent.
    #[serde(default)]
    pub tau: Option<Axis>,
    /// Number of extra random parameter draws checked, seeded by `seed`.
    #[serde(default)]
    pub random_checks: usize,
}

impl SweepConfig {
    pub fn param_grid(&self) -> Result<ParamGrid> {
        if !self.grid.phi.is_finite() {
            return Err(ConfigError::new("grid.phi", "must be finite"));
        }
        Ok(ParamGrid {
            mu_t: self.grid.mu_t.check("grid.mu_t", 0.0, f64::MAX)?,
            mu_r: self.grid.mu_r.check("grid.mu_r", 0.0, f64::MAX)?,
            n_pdc: self.grid.n_pdc.check("grid.n_pdc", 0.0, f64::MAX)?,
            phi: self.grid.phi,
        })
    }

    pub fn taus(&self) -> Result<Vec<f64>> {
        let taus = match &self.tau {
            Some(axis) => axis.check("tau", 0.0, 1.0)?,
            None => vec![1.0],
        };
        if let Some(i) = taus.iter().position(|&t| t == 0.0) {
            return Err(ConfigError::new(format!("tau[{i}]"), "must be positive"));
        }
        Ok(taus)
    }
}

/// Single-pair comparison of the Fock-space oracle with the closed forms.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub mu_t: f64,
    pub mu_r: f64,
    pub n_pdc: f64,
    #[serde(default)]
    pub phi: f64,
    /// Defaults to a cutoff derived from the largest mean photon number.
    #[serde(default)]
    pub cutoff: Option<usize>,
    #[serde(default = "default_oracle_tolerance")]
    pub tolerance: f64,
}

fn default_oracle_tolerance() -> f64 {
    1e-6
}

impl OracleConfig {
    pub fn params(&self) -> Result<ModeParams> {
        pair(self.mu_t, self.mu_r, self.n_pdc, self.phi, "")
    }

    pub fn check(&self) -> Result<()> {
        self.params()?;
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(ConfigError::new("tolerance", "must be positive"));
        }
        if self.cutoff == Some(0) {
            return Err(ConfigError::new("cutoff", "must be positive"));
        }
        Ok(())
    }
}

fn pair(mu_t: f64, mu_r: f64, n_pdc: f64, phi: f64, prefix: &str) -> Result<ModeParams> {
    for (name, v) in [("mu_t", mu_t), ("mu_r", mu_r), ("n_pdc", n_pdc), ("phi", phi)] {
        if !v.is_finite() {
            return Err(ConfigError::new(format!("{prefix}{name}"), "must be finite"));
        }
        if name != "phi" && v < 0.0 {
            return Err(ConfigError::new(format!("{prefix}{name}"), "must be non-negative"));
        }
    }
    ModeParams::from_npdc(mu_t, mu_r, n_pdc, phi).map_err(|e| ConfigError::new(prefix.trim_end_matches('.'), e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantConfig {
    ObjectPlane,
    FourierLens,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub lambda: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub f_r: f64,
    /// Required for the Fourier-lens variant only.
    #[serde(default)]
    pub f_t: Option<f64>,
    pub variant: VariantConfig,
}

impl GeometryConfig {
    pub fn build(&self) -> Result<GhostGeometry> {
        for (name, v) in [("lambda", self.lambda), ("d1", self.d1), ("d2", self.d2), ("d3", self.d3), ("f_r", self.f_r)]
        {
            positive(&format!("geometry.{name}"), v)?;
        }
        let (variant, f_t) = match self.variant {
            VariantConfig::ObjectPlane => (Variant::ObjectPlane, self.f_t.unwrap_or(1.0)),
            VariantConfig::FourierLens => {
                let f = self
                    .f_t
                    .ok_or_else(|| ConfigError::new("geometry.f_t", "required for the fourier-lens variant"))?;
                (Variant::FourierLens, f)
            }
        };
        positive("geometry.f_t", f_t)?;
        GhostGeometry::new(self.lambda, self.d1, self.d2, self.d3, self.f_r, f_t, variant)
            .map_err(|e| ConfigError::new("geometry", e))
    }
}

fn positive(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::new(field, format!("must be finite and positive (got {v})")))
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ObjectConfig {
    SingleSlit {
        width: f64,
    },
    /// Two slits whose centres are `separation` apart.
    DoubleSlit {
        width: f64,
        separation: f64,
    },
    /// `count` slits at pitch `period`, centred on zero.
    Grating {
        width: f64,
        period: f64,
        count: usize,
    },
    /// Columns `x, re, im`; a relative path is resolved against the config file.
    Csv {
        path: PathBuf,
    },
}

impl ObjectConfig {
    /// Open intervals of a generated object, `None` for a loaded one.
    pub fn apertures(&self) -> Option<Vec<(f64, f64)>> {
        match *self {
            Self::SingleSlit { width } => Some(vec![(-0.5 * width, 0.5 * width)]),
            Self::DoubleSlit { width, separation } => {
                let (h, w) = (0.5 * separation, 0.5 * width);
                Some(vec![(-h - w, -h + w), (h - w, h + w)])
            }
            Self::Grating { width, period, count } => {
                let first = -0.5 * (count as f64 - 1.0) * period;
                Some(
                    (0..count).map(|i| first + i as f64 * period).map(|c| (c - 0.5 * width, c + 0.5 * width)).collect(),
                )
            }
            Self::Csv { .. } => None,
        }
    }

    /// Narrowest feature of a generated object.
    pub fn feature(&self) -> Option<f64> {
        match *self {
            Self::SingleSlit { width } | Self::DoubleSlit { width, .. } | Self::Grating { width, .. } => Some(width),
            Self::Csv { .. } => None,
        }
    }

    fn check(&self) -> Result<()> {
        match *self {
            Self::SingleSlit { width } => {
                positive("object.width", width)?;
            }
            Self::DoubleSlit { width, separation } => {
                positive("object.width", width)?;
                if !(separation.is_finite() && separation >= width) {
                    return Err(ConfigError::new("object.separation", "must be at least the slit width"));
                }
            }
            Self::Grating { width, period, count } => {
                positive("object.width", width)?;
                if !(period.is_finite() && period >= width) {
                    return Err(ConfigError::new("object.period", "must be at least the slit width"));
                }
                if count == 0 {
                    return Err(ConfigError::new("object.count", "must be positive"));
                }
            }
            Self::Csv { .. } => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    pub mu_t: f64,
    pub mu_r: f64,
    pub n_pdc: f64,
    #[serde(default)]
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProfileConfig {
    /// Same pair for every q.
    Constant {
        mu_t: f64,
        mu_r: f64,
        n_pdc: f64,
        #[serde(default)]
        phi: f64,
    },
    /// Phase-matching profile; `n_pdc` is the value at `q = 0` and
    /// `bandwidth` (m²) scales `q²` inside the sinc.
    Sinc {
        mu_t: f64,
        mu_r: f64,
        n_pdc: f64,
        #[serde(default)]
        phi: f64,
        bandwidth: f64,
    },
    /// One entry per q mode, `2 n_half + 1` in ascending q.
    PerMode { modes: Vec<PairConfig> },
}

impl ProfileConfig {
    pub fn build(&self) -> Result<KernelProfile> {
        Ok(match self {
            Self::Constant { mu_t, mu_r, n_pdc, phi } => {
                KernelProfile::Constant(pair(*mu_t, *mu_r, *n_pdc, *phi, "profile.")?)
            }
            Self::Sinc { mu_t, mu_r, n_pdc, phi, bandwidth } => {
                if !(bandwidth.is_finite() && *bandwidth >= 0.0) {
                    return Err(ConfigError::new("profile.bandwidth", "must be finite and non-negative"));
                }
                KernelProfile::Sinc { base: pair(*mu_t, *mu_r, *n_pdc, *phi, "profile.")?, bandwidth: *bandwidth }
            }
            Self::PerMode { modes } => KernelProfile::PerMode(
                modes
                    .iter()
                    .enumerate()
                    .map(|(i, m)| pair(m.mu_t, m.mu_r, m.n_pdc, m.phi, &format!("profile.modes[{i}].")))
                    .collect::<Result<_>>()?,
            ),
        })
    }
}

/// Ghost-imaging and ghost-diffraction inputs.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GhostConfig {
    pub geometry: GeometryConfig,
    pub object: ObjectConfig,
    pub profile: ProfileConfig,
    /// The q grid has `2 n_half + 1` modes.
    #[serde(default = "default_n_half")]
    pub n_half: usize,
    /// Object samples for generated objects.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Object sampling step; a sixteenth of the narrowest feature when absent.
    #[serde(default)]
    pub dx: Option<f64>,
    /// Diffraction q spacing; derived from the narrowest feature when absent.
    #[serde(default)]
    pub dq: Option<f64>,
    #[serde(default)]
    pub method: MethodConfig,
    /// Lower bound on the normalized cross-correlation with the expected profile.
    #[serde(default)]
    pub min_ncc: Option<f64>,
}

fn default_n_half() -> usize {
    512
}

fn default_samples() -> usize {
    513
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodConfig {
    #[default]
    Auto,
    Direct,
    Fft,
}

impl From<MethodConfig> for Method {
    fn from(m: MethodConfig) -> Self {
        match m {
            MethodConfig::Auto => Method::Auto,
            MethodConfig::Direct => Method::Direct,
            MethodConfig::Fft => Method::Fft,
        }
    }
}

/// Everything a ghost scenario evaluates.
#[derive(Debug, Clone)]
pub struct GhostSetup {
    pub geometry: GhostGeometry,
    pub object: SampledObject,
    pub profile: KernelProfile,
    pub grids: EvalGrids,
}

impl GhostConfig {
    fn object(&self, base_dir: &Path) -> Result<SampledObject> {
        self.object.check()?;
        if let ObjectConfig::Csv { path } = &self.object {
            if self.dx.is_some() {
                return Err(ConfigError::new("dx", "the sampling of a csv object comes from the file"));
            }
            let full = base_dir.join(path);
            let file =
                File::open(&full).map_err(|e| ConfigError::new("object.path", format!("{}: {e}", full.display())))?;
            return read_object(file).map_err(|e| ConfigError::new("object.path", e));
        }
        let feature = self.object.feature().expect("generated object");
        let dx = positive("dx", self.dx.unwrap_or(feature / 16.0))?;
        if self.samples < 2 {
            return Err(ConfigError::new("samples", "need at least two object samples"));
        }
        let x = centered_grid(self.samples, dx);
        let half = 0.5 * (x[x.len() - 1] - x[0]);
        let apertures = self.object.apertures().expect("generated object");
        if apertures.iter().any(|&(lo, hi)| lo < -half || hi > half) {
            return Err(ConfigError::new("samples", "object extends beyond the sampled window"));
        }
        SampledObject::from_apertures(&x, &apertures).map_err(|e| ConfigError::new("object", e))
    }

    fn min_ncc_checked(&self) -> Result<()> {
        match self.min_ncc {
            Some(v) if !(v.is_finite() && (-1.0..=1.0).contains(&v)) => {
                Err(ConfigError::new("min_ncc", "must lie in [-1, 1]"))
            }
            _ => Ok(()),
        }
    }

    /// Inputs for the imaging configuration.
    pub fn imaging(&self, base_dir: &Path) -> Result<GhostSetup> {
        self.min_ncc_checked()?;
        if self.dq.is_some() {
            return Err(ConfigError::new("dq", "the imaging q grid is fixed by the object sampling"));
        }
        let geometry = self.geometry.build()?;
        pdcsim_core::ghost::check_image_config(&geometry).map_err(|e| ConfigError::new("geometry.f_r", e))?;
        let object = self.object(base_dir)?;
        if object.len() > 2 * self.n_half + 1 {
            return Err(ConfigError::new("n_half", "the q grid needs at least as many modes as object samples"));
        }
        let profile = self.profile.build()?;
        let grids = EvalGrids::imaging(&geometry, &object, self.n_half).map_err(|e| ConfigError::new("n_half", e))?;
        profile.amplitudes(&grids.q).map_err(|e| ConfigError::new("profile", e))?;
        self.method_checked(&geometry, &grids)?;
        Ok(GhostSetup { geometry, object, profile, grids })
    }

    /// Inputs for the diffraction configuration.
    pub fn diffraction(&self, base_dir: &Path) -> Result<GhostSetup> {
        self.min_ncc_checked()?;
        let geometry = self.geometry.build()?;
        pdcsim_core::ghost::check_diffraction_config(&geometry).map_err(|e| {
            let field = if geometry.variant == Variant::ObjectPlane { "geometry.variant" } else { "geometry.f_r" };
            ConfigError::new(field, e)
        })?;
        let object = self.object(base_dir)?;
        let q = match (self.dq, self.object.feature()) {
            (Some(dq), _) => QGrid::new(self.n_half, positive("dq", dq)?),
            (None, Some(feature)) => QGrid::for_feature(feature, self.n_half),
            (None, None) => return Err(ConfigError::new("dq", "required for csv objects")),
        }
        .map_err(|e| ConfigError::new("dq", e))?;
        let profile = self.profile.build()?;
        profile.amplitudes(&q).map_err(|e| ConfigError::new("profile", e))?;
        let grids = EvalGrids::diffraction(&geometry, q).map_err(|e| ConfigError::new("n_half", e))?;
        self.method_checked(&geometry, &grids)?;
        Ok(GhostSetup { geometry, object, profile, grids })
    }

    fn method_checked(&self, geometry: &GhostGeometry, grids: &EvalGrids) -> Result<()> {
        if self.method == MethodConfig::Fft && !crate::fast::fft_applicable(geometry, grids) {
            return Err(ConfigError::new("method", "fft needs the object-plane variant in the imaging configuration"));
        }
        Ok(())
    }
}

fn body<T: serde::de::DeserializeOwned>(doc: Value) -> Result<T> {
    serde_path_to_error::deserialize(doc).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { "(document)".to_string() } else { path };
        ConfigError::new(field, e.into_inner())
    })
}

impl ScenarioConfig {
    /// Parses a scenario document. `base_dir` anchors relative input paths.
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let mut doc: Value = serde_json::from_str(text).map_err(|e| ConfigError::new("(document)", e))?;
        let map = doc.as_object_mut().ok_or_else(|| ConfigError::new("(document)", "expected a JSON object"))?;
        let output_dir = match map.remove("output_dir") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(PathBuf::from(s)),
            Some(_) => return Err(ConfigError::new("output_dir", "must be a string")),
        };
        let seed = match map.remove("seed") {
            None | Some(Value::Null) => 0,
            Some(v) => v.as_u64().ok_or_else(|| ConfigError::new("seed", "must be a non-negative integer"))?,
        };
        let kind = match map.remove("kind") {
            Some(Value::String(k)) => k,
            Some(_) => return Err(ConfigError::new("kind", "must be a string")),
            None => return Err(ConfigError::new("kind", "missing")),
        };
        let experiment = match kind.as_str() {
            "separability-sweep" => Experiment::SeparabilitySweep(body(doc)?),
            "nrf-sweep" => Experiment::NrfSweep(body(doc)?),
            "oracle-validate" => Experiment::OracleValidate(body(doc)?),
            "ghost-image" => Experiment::GhostImage(body(doc)?),
            "ghost-diffraction" => Experiment::GhostDiffraction(body(doc)?),
            other => return Err(ConfigError::new("kind", format!("unknown experiment `{other}`"))),
        };
        let config = Self { experiment, output_dir, seed, base_dir: base_dir.to_path_buf() };
        config.validate()?;
        Ok(config)
    }

    /// Reads and parses a scenario file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("(file)", format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, &base)
    }

    /// Checks every kind-specific requirement without running anything.
    pub fn validate(&self) -> Result<()> {
        match &self.experiment {
            Experiment::SeparabilitySweep(s) | Experiment::NrfSweep(s) => {
                s.param_grid()?.points().map_err(|e| ConfigError::new("grid", e))?;
                s.taus()?;
            }
            Experiment::OracleValidate(o) => o.check()?,
            Experiment::GhostImage(g) => {
                g.imaging(&self.base_dir)?;
            }
            Experiment::GhostDiffraction(g) => {
                g.diffraction(&self.base_dir)?;
            }
        }
        Ok(())
    }
}
