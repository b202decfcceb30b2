use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use volspec_core::inverse::{
    recover_profile, recover_sequential, verify_green_identity, verify_profile_pairing, verify_z_decomposition,
    BasisKind, InverseProblem, InverseSettings, LmOptions, ParamDomain, ProfileBasis, RecoveryReport,
};
use volspec_core::kernels::require_b_nonvanishing;
use volspec_core::quadrature::make_grid;
use volspec_core::spectral::{
    eval_e_direct, eval_e_via_g, eval_psi, find_zeros, CharacteristicFunction, EntireFunction, Eigenvalue, RootStatus,
    SearchWindow, Spectrum, SpectrumOptions,
};
use volspec_core::transform::{compute_g, PicardOptions, TransformKernel};
use volspec_core::{Complex64, Error as CoreError, Grid, TriangularField, I};

use crate::config::{cumulative_integral, Command, InitConfig, KernelModel, LoadedConfig, ProfileData, WindowConfig};
use crate::error::{exit, CliError, CliResult};
use crate::io::{write_field, write_json, write_profile, write_table};

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct RunArgs {
    pub config: PathBuf,
    pub grid_n: Option<usize>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config_sha256: String,
    pub grid_n: usize,
    pub h: f64,
}

struct Run {
    command: Command,
    loaded: LoadedConfig,
    args: RunArgs,
}

impl Run {
    fn provenance(&self, grid: Grid) -> Provenance {
        Provenance {
            tool: "volspec",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command.name(),
            config_sha256: self.loaded.sha256.clone(),
            grid_n: grid.n_intervals(),
            h: grid.step(),
        }
    }

    fn requested_n(&self) -> Option<usize> {
        self.args.grid_n.or(self.loaded.config.grid_n)
    }

    fn out_dir(&self) -> CliResult<PathBuf> {
        let dir = match (&self.args.out, &self.loaded.config.output_dir) {
            (Some(d), _) => d.clone(),
            (None, Some(d)) => self.loaded.resolve(d),
            (None, None) => PathBuf::from("volspec-out"),
        };
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(dir)
    }

    fn picard(&self) -> PicardOptions {
        let t = &self.loaded.config.tolerances;
        let d = PicardOptions::default();
        PicardOptions {
            tol: t.picard_tol.or(d.tol),
            max_terms: t.max_terms.unwrap_or(d.max_terms),
        }
    }

    fn search(&self) -> SpectrumOptions {
        let t = &self.loaded.config.tolerances;
        let d = SpectrumOptions::default();
        SpectrumOptions {
            cell_size: t.cell_size.unwrap_or(d.cell_size),
            min_cell: t.min_cell.unwrap_or(d.min_cell),
            boundary_rel_tol: t.boundary_rel_tol.unwrap_or(d.boundary_rel_tol),
            newton_tol: t.newton_tol.unwrap_or(d.newton_tol),
            residual_tol: t.residual_tol.or(d.residual_tol),
            ..d
        }
    }

    fn lm(&self) -> LmOptions {
        let t = &self.loaded.config.tolerances;
        let d = LmOptions::default();
        LmOptions {
            max_iter: t.lm_max_iter.unwrap_or(d.max_iter),
            xtol: t.lm_xtol.unwrap_or(d.xtol),
            ftol: t.lm_ftol.unwrap_or(d.ftol),
            ..d
        }
    }

    fn window(&self) -> CliResult<SearchWindow> {
        self.loaded
            .config
            .window
            .ok_or_else(|| CliError::Config("`window` is required for this command".into()))?
            .to_window()
    }
}

/// Runs one command and returns the process exit code. Artifacts written
/// before a numerical failure are kept.
pub fn run(command: Command, args: RunArgs) -> CliResult<i32> {
    let loaded = LoadedConfig::load(&args.config)?;
    if let Some(declared) = loaded.config.command {
        if declared != command {
            return Err(CliError::Config(format!(
                "config is for `{}`, invoked as `{}`",
                declared.name(),
                command.name()
            )));
        }
    }
    let run = Run { command, loaded, args };
    match command {
        Command::Forward => forward(&run),
        Command::Spectrum => spectrum(&run),
        Command::Invert => invert(&run),
        Command::Verify => verify(&run),
    }
}

/// `∫₀ˣ M(t,t) dt` at every node: closed form when available, else the
/// trapezoid rule on the sampled diagonal.
fn diagonal_oracle(model: &KernelModel, m: &TriangularField) -> (&'static str, Vec<Complex64>) {
    let grid = *m.grid();
    if model.diagonal(0.0).is_some() {
        let exact = cumulative_integral(grid, |x| model.diagonal(x).expect("closed-form kernel"));
        ("analytic", exact)
    } else {
        let diag = m.diagonal();
        let h = grid.step();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut out = vec![acc];
        for w in diag.windows(2) {
            acc += (w[0] + w[1]) * (0.5 * h);
            out.push(acc);
        }
        ("trapezoid", out)
    }
}

/// `max |G(x,x) − i∫₀ˣ M(t,t)dt|` and where it occurs.
fn diagonal_residual(model: &KernelModel, m: &TriangularField, g: &TransformKernel) -> (&'static str, f64, f64) {
    let (oracle, integral) = diagonal_oracle(model, m);
    let grid = *m.grid();
    let mut worst = (0.0, 0.0);
    for (i, (gd, want)) in g.g().diagonal().iter().zip(&integral).enumerate() {
        let r = (gd - I * want).norm();
        if r > worst.0 {
            worst = (r, grid.node(i));
        }
    }
    (oracle, worst.0, worst.1)
}

#[derive(Serialize)]
struct GSidecar {
    provenance: Provenance,
    tol: f64,
    iterations: usize,
    term_norms: Vec<f64>,
}

#[derive(Serialize)]
struct DiagonalReport {
    provenance: Provenance,
    oracle: &'static str,
    max_residual: f64,
    at_x: f64,
    /// `max |G(x, 0)|`, zero by construction.
    boundary_max: f64,
}

fn forward(run: &Run) -> CliResult<i32> {
    let model = run.loaded.kernel()?;
    let grid = model.resolve_grid(run.requested_n())?;
    let m = model.sample(grid)?.assemble();
    let out = run.out_dir()?;
    let g = compute_g(&m, &run.picard())?;
    write_field(&out.join("g.csv"), g.g())?;
    write_json(
        &out.join("g.json"),
        &GSidecar {
            provenance: run.provenance(grid),
            tol: g.tol(),
            iterations: g.iterations(),
            term_norms: g.term_norms().to_vec(),
        },
    )?;
    let (oracle, max_residual, at_x) = diagonal_residual(&model, &m, &g);
    let boundary_max = (0..grid.len()).map(|i| g.g().get(i, 0).norm()).fold(0.0, f64::max);
    write_json(
        &out.join("diagonal.json"),
        &DiagonalReport {
            provenance: run.provenance(grid),
            oracle,
            max_residual,
            at_x,
            boundary_max,
        },
    )?;
    let lambdas = run.loaded.lambdas();
    let rows = lambdas.iter().flat_map(|&lambda| {
        let e = eval_e_via_g(&g, lambda);
        e.into_iter()
            .enumerate()
            .map(move |(i, v)| vec![lambda.re, lambda.im, grid.node(i), v.re, v.im])
    });
    write_table(&out.join("e_samples.csv"), &["lambda_re", "lambda_im", "x", "re", "im"], rows)?;
    Ok(exit::SUCCESS)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenRecord {
    pub re: f64,
    pub im: f64,
    #[serde(default = "one")]
    pub multiplicity: u32,
    #[serde(default)]
    pub residual: f64,
    #[serde(default)]
    pub status: Option<String>,
}

fn one() -> u32 {
    1
}

#[derive(Serialize)]
struct SpectrumReport {
    provenance: Provenance,
    window: WindowConfig,
    h: f64,
    richardson_levels: usize,
    total_count: u32,
    eigenvalues: Vec<EigenRecord>,
}

/// The fields of a spectrum file needed to use it as inversion data.
#[derive(Debug, Deserialize)]
pub struct SpectrumInput {
    pub window: WindowConfig,
    #[serde(default)]
    pub h: f64,
    pub eigenvalues: Vec<EigenRecord>,
}

impl SpectrumInput {
    pub fn load(path: &Path) -> CliResult<Spectrum> {
        let text = fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => CliError::Config(format!("{}: file not found", path.display())),
            _ => CliError::io(path, e),
        })?;
        let input: SpectrumInput =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let eigenvalues = input
            .eigenvalues
            .iter()
            .map(|r| {
                if r.multiplicity == 0 {
                    return Err(CliError::Config(format!("{}: multiplicity must be positive", path.display())));
                }
                Ok(Eigenvalue {
                    value: Complex64::new(r.re, r.im),
                    multiplicity: r.multiplicity,
                    residual: r.residual,
                    status: RootStatus::Simple,
                })
            })
            .collect::<CliResult<Vec<_>>>()?;
        Ok(Spectrum::from_eigenvalues(eigenvalues, input.window.to_window()?, input.h))
    }
}

fn status_name(s: RootStatus) -> &'static str {
    match s {
        RootStatus::Simple => "simple",
        RootStatus::Cluster => "cluster",
        RootStatus::Unconverged => "unconverged",
    }
}

fn spectrum(run: &Run) -> CliResult<i32> {
    let window = run.window()?;
    let model = run.loaded.kernel()?;
    let grid = model.resolve_grid(run.requested_n())?;
    let levels = run.loaded.config.spectrum.richardson_levels;
    if levels > 0 && !model.is_analytic() {
        return Err(CliError::Config(
            "richardson_levels needs a closed-form kernel that can be resampled on finer grids".into(),
        ));
    }
    let kernels = (0..=levels)
        .map(|k| {
            let g = make_grid(grid.n_intervals() << k)?;
            Ok(compute_g(&model.sample(g)?.assemble(), &run.picard())?)
        })
        .collect::<CliResult<Vec<_>>>()?;
    let delta = CharacteristicFunction::richardson(&kernels)?;
    let out = run.out_dir()?;
    if let Some([nr, ni]) = run.loaded.config.spectrum.heatmap {
        if nr < 2 || ni < 2 {
            return Err(CliError::Config("heatmap needs at least 2 points per axis".into()));
        }
        let rows = (0..ni).flat_map(|b| {
            let delta = &delta;
            (0..nr).map(move |a| {
                let re = window.re_min + (window.re_max - window.re_min) * a as f64 / (nr - 1) as f64;
                let im = window.im_min + (window.im_max - window.im_min) * b as f64 / (ni - 1) as f64;
                vec![re, im, delta.value(Complex64::new(re, im)).norm()]
            })
        });
        write_table(&out.join("heatmap.csv"), &["re", "im", "abs_delta"], rows)?;
    }
    let found = find_zeros(&delta, &window, &run.search())?;
    write_json(
        &out.join("spectrum.json"),
        &SpectrumReport {
            provenance: run.provenance(grid),
            window: run.loaded.config.window.expect("checked above"),
            h: found.h,
            richardson_levels: levels,
            total_count: found.total_count,
            eigenvalues: found
                .eigenvalues
                .iter()
                .map(|e| EigenRecord {
                    re: e.value.re,
                    im: e.value.im,
                    multiplicity: e.multiplicity,
                    residual: e.residual,
                    status: Some(status_name(e.status).into()),
                })
                .collect(),
        },
    )?;
    Ok(exit::SUCCESS)
}

#[derive(Serialize)]
struct StageRecord {
    component: usize,
    converged: bool,
    iterations: usize,
    residual_norm: f64,
    underdetermined: bool,
    target_count: u32,
    history: Vec<f64>,
    params: Vec<f64>,
    sup_error: Option<f64>,
}

#[derive(Serialize)]
struct RecoveryFile {
    provenance: Provenance,
    seed: Option<u64>,
    basis: &'static str,
    d: usize,
    mu: Option<f64>,
    converged: bool,
    failed_stage: Option<usize>,
    stages: Vec<StageRecord>,
}

fn invert(run: &Run) -> CliResult<i32> {
    let section = run
        .loaded
        .config
        .invert
        .as_ref()
        .ok_or_else(|| CliError::Config("`invert` section is required".into()))?;
    let model = run.loaded.kernel()?;
    let grid = model.resolve_grid(run.requested_n())?;
    let kernel = model.sample(grid)?;
    if section.targets.is_empty() {
        return Err(CliError::Config("`invert.targets` lists no spectrum files".into()));
    }
    let targets = section
        .targets
        .iter()
        .map(|p| SpectrumInput::load(&run.loaded.resolve(p)))
        .collect::<CliResult<Vec<_>>>()?;
    let sequential = targets.len() > 1;
    let components: Vec<usize> = if sequential {
        (0..targets.len()).collect()
    } else {
        vec![section.component]
    };
    if components.iter().any(|&c| c >= kernel.components().len()) {
        return Err(CliError::Config("the kernel has fewer components than the inversion needs".into()));
    }
    let kind = match section.basis.as_str() {
        "chebyshev" => BasisKind::Chebyshev,
        "linear" => BasisKind::PiecewiseLinear,
        other => return Err(CliError::Config(format!("unknown basis `{other}`"))),
    };
    let domain = match section.domain.as_str() {
        "real" => ParamDomain::Real,
        "complex" => ParamDomain::Complex,
        other => return Err(CliError::Config(format!("unknown parameter domain `{other}`"))),
    };
    let mut settings = InverseSettings::new(ProfileBasis::new(kind, grid, section.d)?);
    settings.domain = domain;
    settings.mu = section.mu;
    settings.picard = run.picard();
    settings.b_tol = run.loaded.config.tolerances.b_tol;
    for &c in &components {
        require_b_nonvanishing(&kernel.components()[c].r, settings.b_tol)?;
    }

    let n_params = settings.n_params();
    let inits: Vec<Vec<f64>> = match &section.init {
        InitConfig::Policy(p) if p == "zeros" => vec![vec![0.0; n_params]; targets.len()],
        InitConfig::Policy(p) if p == "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(run.args.seed.unwrap_or(0));
            (0..targets.len())
                .map(|_| (0..n_params).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect()
        }
        InitConfig::Policy(p) => return Err(CliError::Config(format!("unknown init policy `{p}`"))),
        InitConfig::Values(v) => {
            if v.len() != targets.len() || v.iter().any(|x| x.len() != n_params) {
                return Err(CliError::Config(format!(
                    "`init` needs {} vectors of {n_params} values",
                    targets.len()
                )));
            }
            v.clone()
        }
    };
    let references = if section.reference.is_empty() {
        Vec::new()
    } else if section.reference.len() == targets.len() {
        section
            .reference
            .iter()
            .map(|s| ProfileData::load(s, &run.loaded.base_dir)?.sample(grid))
            .collect::<CliResult<Vec<_>>>()?
    } else {
        return Err(CliError::Config("`reference` needs one profile per target".into()));
    };

    let lm = run.lm();
    let (reports, failure): (Vec<RecoveryReport>, Option<(usize, CoreError)>) = if sequential {
        match recover_sequential(&kernel, &targets, &settings, &inits, &lm) {
            Ok(r) => (r, None),
            Err(e) => (e.partial, Some((e.stage, e.cause))),
        }
    } else {
        let problem = InverseProblem::new(kernel.clone(), components[0], targets[0].clone(), settings.clone())?;
        (vec![recover_profile(&problem, &inits[0], &lm)?], None)
    };

    let out = run.out_dir()?;
    let stages = reports
        .iter()
        .enumerate()
        .map(|(k, r)| {
            Ok(StageRecord {
                component: components[k],
                converged: r.converged,
                iterations: r.iterations,
                residual_norm: r.residual_norm,
                underdetermined: r.underdetermined,
                target_count: targets[k].multiplicity_sum(),
                history: r.history.clone(),
                params: r.params.clone(),
                sup_error: match references.get(k) {
                    Some(p) => Some(r.recovered.sup_distance(p)?),
                    None => None,
                },
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let converged = failure.is_none() && reports.iter().all(|r| r.converged);
    write_json(
        &out.join("recovery.json"),
        &RecoveryFile {
            provenance: run.provenance(grid),
            seed: run.args.seed,
            basis: section_basis_name(kind),
            d: section.d,
            mu: section.mu,
            converged,
            failed_stage: failure.as_ref().map(|f| f.0),
            stages,
        },
    )?;
    for (k, r) in reports.iter().enumerate() {
        let name = if sequential { format!("profile_{}.csv", k + 1) } else { "profile.csv".into() };
        write_profile(&out.join(name), &r.recovered)?;
    }
    match failure {
        Some((_, cause @ CoreError::Stage { .. })) => Err(CliError::Numerical(cause.to_string())),
        Some((_, cause)) => Err(cause.into()),
        None if converged => Ok(exit::SUCCESS),
        None => Ok(exit::NUMERICAL),
    }
}

fn section_basis_name(kind: BasisKind) -> &'static str {
    match kind {
        BasisKind::Chebyshev => "chebyshev",
        BasisKind::PiecewiseLinear => "linear",
    }
}

#[derive(Serialize)]
struct CheckRecord {
    name: &'static str,
    status: &'static str,
    /// Largest residual over the λ samples, one entry per grid.
    residuals: Vec<Option<f64>>,
    order: Option<f64>,
}

#[derive(Serialize)]
struct VerifyReport {
    provenance: Provenance,
    grids: Vec<usize>,
    lambdas: Vec<[f64; 2]>,
    checks: Vec<CheckRecord>,
}

/// `log₂` of the residual ratio between consecutive grids, when both sit
/// above roundoff.
fn observed_order(r: &[Option<f64>]) -> Option<f64> {
    match r {
        [Some(a), Some(b)] if *a > 1e-13 && *b > 1e-13 => Some((a / b).log2()),
        _ => None,
    }
}

fn verify(run: &Run) -> CliResult<i32> {
    let model = run.loaded.kernel()?;
    let model_tilde = run.loaded.kernel_tilde()?.unwrap_or_else(|| model.clone());
    let grid = model.resolve_grid(run.requested_n())?;
    let grid_tilde = model_tilde.resolve_grid(Some(grid.n_intervals()))?;
    if grid != grid_tilde {
        return Err(CliError::Config("the two kernels live on different grids".into()));
    }
    let lambdas = run.loaded.lambdas();
    let mut grids = vec![grid];
    if model.is_analytic() && model_tilde.is_analytic() {
        grids.push(make_grid(2 * grid.n_intervals())?);
    }
    let names = ["diagonal", "duality", "green_identity", "profile_pairing", "z_decomposition"];
    let mut table: Vec<Vec<Option<f64>>> = vec![Vec::new(); names.len()];
    for &g in &grids {
        let sk = model.sample(g)?;
        let sk_tilde = model_tilde.sample(g)?;
        let m = sk.assemble();
        let m_tilde = sk_tilde.assemble();
        let n = g.n_intervals();
        let tk = compute_g(&m, &run.picard())?;
        table[0].push(Some(diagonal_residual(&model, &m, &tk).1));
        let mut duality: f64 = 0.0;
        let mut green: f64 = 0.0;
        let mut relation: Option<f64> = Some(0.0);
        for &lambda in &lambdas {
            let e = eval_e_direct(&m, lambda);
            let psi = eval_psi(&m, lambda);
            duality = duality.max((e[n] - psi[0]).norm());
            green = green.max(verify_green_identity(&m, &m_tilde, lambda)?);
            relation = match (relation, verify_profile_pairing(&sk, &sk_tilde, lambda)) {
                (Some(acc), Ok(v)) => Some(acc.max(v)),
                (_, Err(CoreError::InvalidArgument(_))) | (None, _) => None,
                (_, Err(e)) => return Err(e.into()),
            };
        }
        table[1].push(Some(duality));
        table[2].push(Some(green));
        table[3].push(relation);
        table[4].push(match sk.components().first() {
            Some(c) => Some(verify_z_decomposition(&c.r, &m, &m_tilde, &lambdas, &run.picard())?),
            None => None,
        });
    }
    let checks = names
        .iter()
        .zip(table)
        .map(|(&name, residuals)| CheckRecord {
            name,
            status: if residuals.iter().all(Option::is_some) { "ok" } else { "skipped" },
            order: observed_order(&residuals),
            residuals,
        })
        .collect();
    let out = run.out_dir()?;
    write_json(
        &out.join("verify.json"),
        &VerifyReport {
            provenance: run.provenance(grid),
            grids: grids.iter().map(Grid::n_intervals).collect(),
            lambdas: lambdas.iter().map(|l| [l.re, l.im]).collect(),
            checks,
        },
    )?;
    Ok(exit::SUCCESS)
}
