//! Run configuration and kernel description files (JSON or TOML, chosen by
//! extension).

use std::fs;
use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};
use volspec_core::kernels::families::{FieldFamily, ProfileFamily};
use volspec_core::kernels::{KernelComponent, StructuredKernel};
use volspec_core::quadrature::make_grid;
use volspec_core::spectral::SearchWindow;
use volspec_core::{Complex64, Grid, Profile, TriangularField};

use crate::error::{CliError, CliResult};
use crate::io::{read_field, read_profile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Forward,
    Spectrum,
    Invert,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Forward => "forward",
            Command::Spectrum => "spectrum",
            Command::Invert => "invert",
            Command::Verify => "verify",
        }
    }
}

/// One sampled or closed-form function.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Source {
    Samples {
        path: PathBuf,
    },
    Analytic {
        family: String,
        coeffs: Vec<f64>,
        #[serde(default)]
        imag: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentConfig {
    pub r: Source,
    pub p: Source,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub m0: Source,
    #[serde(default)]
    pub components: Vec<ComponentConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl WindowConfig {
    pub fn to_window(self) -> CliResult<SearchWindow> {
        SearchWindow::new(self.re_min, self.re_max, self.im_min, self.im_max)
            .map_err(|_| CliError::Config("window needs re_min < re_max and im_min < im_max".into()))
    }
}

/// Numerical knobs; every field falls back to the library default.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub picard_tol: Option<f64>,
    pub max_terms: Option<usize>,
    pub cell_size: Option<f64>,
    pub min_cell: Option<f64>,
    pub boundary_rel_tol: Option<f64>,
    pub newton_tol: Option<f64>,
    pub residual_tol: Option<f64>,
    pub b_tol: Option<f64>,
    pub lm_max_iter: Option<usize>,
    pub lm_xtol: Option<f64>,
    pub lm_ftol: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    /// Extra grids `2N, 4N, …` combined by Richardson extrapolation.
    #[serde(default)]
    pub richardson_levels: usize,
    /// `[re_points, im_points]` of an optional `|Δ|` table.
    pub heatmap: Option<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum InitConfig {
    /// `"zeros"` or `"random"`.
    Policy(String),
    /// One vector per stage.
    Values(Vec<Vec<f64>>),
}

impl Default for InitConfig {
    fn default() -> Self {
        InitConfig::Policy("zeros".into())
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvertSection {
    /// Spectrum files; more than one runs the stage-by-stage recovery.
    pub targets: Vec<PathBuf>,
    /// Component recovered in single-target mode.
    #[serde(default)]
    pub component: usize,
    pub d: usize,
    pub mu: Option<f64>,
    #[serde(default = "default_basis")]
    pub basis: String,
    #[serde(default = "default_domain")]
    pub domain: String,
    #[serde(default)]
    pub init: InitConfig,
    /// Known profiles, one per stage, for reporting the recovery error.
    #[serde(default)]
    pub reference: Vec<Source>,
}

fn default_basis() -> String {
    "chebyshev".into()
}

fn default_domain() -> String {
    "real".into()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub grid_n: Option<usize>,
    pub kernel_path: Option<PathBuf>,
    pub kernel: Option<KernelConfig>,
    /// Second kernel of a pair (`verify`); defaults to the first.
    pub kernel_tilde_path: Option<PathBuf>,
    pub kernel_tilde: Option<KernelConfig>,
    pub window: Option<WindowConfig>,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Spectral parameters as `[re, im]` pairs.
    pub lambdas: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    pub invert: Option<InvertSection>,
}

fn parse_text<T: DeserializeOwned>(path: &Path, text: &str) -> CliResult<T> {
    let toml_file = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
    if toml_file {
        toml::from_str(text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    } else {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::Config(format!("{}: file not found", path.display())),
        _ => CliError::io(path, e),
    })
}

/// A parsed run configuration with the directory its relative paths refer to
/// and the hash of its bytes.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub base_dir: PathBuf,
    pub sha256: String,
}

impl LoadedConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = read_text(path)?;
        let config = parse_text(path, &text)?;
        let digest = Sha256::digest(text.as_bytes());
        Ok(LoadedConfig {
            config,
            base_dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
            sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
        })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        resolve(&self.base_dir, p)
    }

    pub fn kernel(&self) -> CliResult<KernelModel> {
        self.load_kernel(self.config.kernel.as_ref(), self.config.kernel_path.as_deref(), "kernel")?
            .ok_or_else(|| CliError::Config("one of `kernel` or `kernel_path` is required".into()))
    }

    /// The second kernel of a pair, or `None` when the config names none.
    pub fn kernel_tilde(&self) -> CliResult<Option<KernelModel>> {
        self.load_kernel(
            self.config.kernel_tilde.as_ref(),
            self.config.kernel_tilde_path.as_deref(),
            "kernel_tilde",
        )
    }

    fn load_kernel(&self, inline: Option<&KernelConfig>, path: Option<&Path>, what: &str) -> CliResult<Option<KernelModel>> {
        match (inline, path) {
            (Some(_), Some(_)) => Err(CliError::Config(format!("give either `{what}` or `{what}_path`, not both"))),
            (Some(k), None) => KernelModel::from_config(k, &self.base_dir).map(Some),
            (None, Some(p)) => {
                let full = self.resolve(p);
                let text = read_text(&full)?;
                let k: KernelConfig = parse_text(&full, &text)?;
                let dir = full.parent().map(Path::to_path_buf).unwrap_or_default();
                KernelModel::from_config(&k, &dir).map(Some)
            }
            (None, None) => Ok(None),
        }
    }

    pub fn lambdas(&self) -> Vec<Complex64> {
        match &self.config.lambdas {
            Some(list) => list.iter().map(|&[re, im]| Complex64::new(re, im)).collect(),
            None => vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(-2.0, 0.5)],
        }
    }
}

pub(crate) fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldData {
    Analytic(FieldFamily),
    Samples(TriangularField),
}

impl FieldData {
    fn load(src: &Source, dir: &Path) -> CliResult<Self> {
        Ok(match src {
            Source::Samples { path } => FieldData::Samples(read_field(&resolve(dir, path))?),
            Source::Analytic { family, coeffs, imag } => {
                FieldData::Analytic(FieldFamily::from_coeffs(family, coeffs, imag.as_deref())?)
            }
        })
    }

    fn grid(&self) -> Option<Grid> {
        match self {
            FieldData::Samples(f) => Some(*f.grid()),
            FieldData::Analytic(_) => None,
        }
    }

    fn sample(&self, grid: Grid) -> TriangularField {
        match self {
            FieldData::Analytic(f) => f.sample(grid),
            FieldData::Samples(f) => f.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileData {
    Analytic(ProfileFamily),
    Samples(Profile),
}

impl ProfileData {
    pub fn load(src: &Source, dir: &Path) -> CliResult<Self> {
        Ok(match src {
            Source::Samples { path } => ProfileData::Samples(read_profile(&resolve(dir, path))?),
            Source::Analytic { family, coeffs, imag } => {
                ProfileData::Analytic(ProfileFamily::from_coeffs(family, coeffs, imag.as_deref())?)
            }
        })
    }

    fn grid(&self) -> Option<Grid> {
        match self {
            ProfileData::Samples(p) => Some(*p.grid()),
            ProfileData::Analytic(_) => None,
        }
    }

    /// Samples on `grid`; sample files must already live on it.
    pub fn sample(&self, grid: Grid) -> CliResult<Profile> {
        match self {
            ProfileData::Analytic(f) => Ok(f.sample(grid)),
            ProfileData::Samples(p) if *p.grid() == grid => Ok(p.clone()),
            ProfileData::Samples(p) => Err(CliError::Config(format!(
                "profile samples have {} intervals, the run uses {}",
                p.grid().n_intervals(),
                grid.n_intervals()
            ))),
        }
    }
}

/// A kernel description that can be sampled on a grid: closed-form parts on
/// any grid, sample files only on their own.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelModel {
    pub m0: FieldData,
    pub components: Vec<(FieldData, ProfileData)>,
}

impl KernelModel {
    pub fn from_config(config: &KernelConfig, dir: &Path) -> CliResult<Self> {
        let model = KernelModel {
            m0: FieldData::load(&config.m0, dir)?,
            components: config
                .components
                .iter()
                .map(|c| Ok((FieldData::load(&c.r, dir)?, ProfileData::load(&c.p, dir)?)))
                .collect::<CliResult<_>>()?,
        };
        model.fixed_grid()?;
        Ok(model)
    }

    /// The grid imposed by sample files, if any.
    pub fn fixed_grid(&self) -> CliResult<Option<Grid>> {
        let grids = std::iter::once(self.m0.grid())
            .chain(self.components.iter().flat_map(|(r, p)| [r.grid(), p.grid()]))
            .flatten();
        let mut found: Option<Grid> = None;
        for g in grids {
            match found {
                Some(f) if f != g => {
                    return Err(CliError::Config(format!(
                        "sample files disagree on the grid: {} vs {} intervals",
                        f.n_intervals(),
                        g.n_intervals()
                    )))
                }
                _ => found = Some(g),
            }
        }
        Ok(found)
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self.fixed_grid(), Ok(None))
    }

    /// Picks the run grid from an override, the config, or the sample files.
    pub fn resolve_grid(&self, requested: Option<usize>) -> CliResult<Grid> {
        match (self.fixed_grid()?, requested) {
            (Some(g), Some(n)) if g.n_intervals() != n => Err(CliError::Config(format!(
                "grid_n = {n} conflicts with sample files on {} intervals",
                g.n_intervals()
            ))),
            (Some(g), _) => Ok(g),
            (None, Some(n)) => Ok(make_grid(n)?),
            (None, None) => Err(CliError::Config("grid_n is required for closed-form kernels".into())),
        }
    }

    pub fn sample(&self, grid: Grid) -> CliResult<StructuredKernel> {
        if let Some(g) = self.fixed_grid()? {
            if g != grid {
                return Err(CliError::Config(format!(
                    "kernel samples have {} intervals, the run uses {}",
                    g.n_intervals(),
                    grid.n_intervals()
                )));
            }
        }
        let components = self
            .components
            .iter()
            .map(|(r, p)| Ok(KernelComponent::new(r.sample(grid), p.sample(grid)?)?))
            .collect::<CliResult<Vec<_>>>()?;
        Ok(StructuredKernel::new(self.m0.sample(grid), components)?)
    }

    /// `M(x,x) = M₀(x,x) + Σ Rⱼ(x,x)Pⱼ(0)` for closed-form kernels.
    pub fn diagonal(&self, x: f64) -> Option<Complex64> {
        let mut sum = match &self.m0 {
            FieldData::Analytic(f) => f.eval(x, x),
            FieldData::Samples(_) => return None,
        };
        for (r, p) in &self.components {
            match (r, p) {
                (FieldData::Analytic(r), ProfileData::Analytic(p)) => sum += r.eval(x, x) * p.eval(0.0),
                _ => return None,
            }
        }
        Some(sum)
    }
}

/// `∫₀^{x_i} f` at every node by five-point Gauss–Legendre on each interval.
pub fn cumulative_integral(grid: Grid, f: impl Fn(f64) -> Complex64) -> Vec<Complex64> {
    const NODES: [f64; 5] = [
        -0.906_179_845_938_664,
        -0.538_469_310_105_683,
        0.0,
        0.538_469_310_105_683,
        0.906_179_845_938_664,
    ];
    const WEIGHTS: [f64; 5] = [
        0.236_926_885_056_189_1,
        0.478_628_670_499_366_5,
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
    ];
    let half = 0.5 * grid.step();
    let mut out = Vec::with_capacity(grid.len());
    let mut acc = Complex64::new(0.0, 0.0);
    out.push(acc);
    for i in 1..grid.len() {
        let mid = 0.5 * (grid.node(i - 1) + grid.node(i));
        for (u, w) in NODES.iter().zip(WEIGHTS) {
            acc += f(mid + half * u) * (w * half);
        }
        out.push(acc);
    }
    out
}
