//! Recovery of convolution profiles from spectra, and numerical checks of
//! the Green-identity chain relating two kernels.
//!
//! The unknown profile is represented by its values at `d` basis points and
//! expanded onto the grid. The misfit is `Δ_P` (and, for multiple targets, its
//! derivatives) evaluated at the target eigenvalues, minimized by
//! Levenberg–Marquardt with a forward-difference Jacobian.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::kernels::{require_b_nonvanishing, truncate_kernel, StructuredKernel};
use crate::quadrature::{trapezoid_by, Grid, Profile, TriangularField};
use crate::spectral::{char_delta_derivative, eval_e_direct, eval_psi, eval_z, Spectrum};
use crate::transform::{assemble_z_kernel, compute_g, reflected_kernel, PicardOptions};
use crate::{Error, Result, I};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    /// Polynomial interpolation through Chebyshev–Lobatto points.
    Chebyshev,
    /// Piecewise-linear interpolation through equispaced points.
    PiecewiseLinear,
}

/// Linear map from `d` values at basis points to a profile on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileBasis {
    kind: BasisKind,
    grid: Grid,
    points: Vec<f64>,
    /// `(N+1) × d`; row `i` gives the weights of node `x_i`.
    matrix: DMatrix<f64>,
}

impl ProfileBasis {
    pub fn new(kind: BasisKind, grid: Grid, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArgument("a profile basis needs at least 2 points"));
        }
        if d > grid.len() {
            return Err(Error::InvalidArgument("more basis points than grid nodes"));
        }
        let points: Vec<f64> = match kind {
            BasisKind::Chebyshev => (0..d)
                .map(|k| {
                    if k == 0 {
                        0.0
                    } else if k == d - 1 {
                        PI
                    } else {
                        0.5 * PI * (1.0 - (k as f64 * PI / (d - 1) as f64).cos())
                    }
                })
                .collect(),
            BasisKind::PiecewiseLinear => (0..d)
                .map(|k| if k == d - 1 { PI } else { PI * k as f64 / (d - 1) as f64 })
                .collect(),
        };
        let mut matrix = DMatrix::zeros(grid.len(), d);
        for i in 0..grid.len() {
            let x = grid.node(i);
            match kind {
                BasisKind::Chebyshev => barycentric_row(&points, x, |k, w| matrix[(i, k)] = w),
                BasisKind::PiecewiseLinear => {
                    let k = points.partition_point(|&p| p <= x).clamp(1, d - 1);
                    let (a, b) = (points[k - 1], points[k]);
                    let s = (x - a) / (b - a);
                    matrix[(i, k - 1)] = 1.0 - s;
                    matrix[(i, k)] = s;
                }
            }
        }
        Ok(ProfileBasis {
            kind,
            grid,
            points,
            matrix,
        })
    }

    pub fn chebyshev(grid: Grid, d: usize) -> Result<Self> {
        Self::new(BasisKind::Chebyshev, grid, d)
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Profile on the grid from values at the basis points.
    pub fn expand(&self, coeffs: &[Complex64]) -> Result<Profile> {
        if coeffs.len() != self.dim() {
            return Err(Error::InvalidArgument("coefficient count differs from basis dimension"));
        }
        let values = (0..self.grid.len())
            .map(|i| {
                (0..self.dim())
                    .map(|k| coeffs[k] * self.matrix[(i, k)])
                    .sum()
            })
            .collect();
        Profile::from_values(self.grid, values)
    }

    /// Values of `f` at the basis points.
    pub fn sample<F: FnMut(f64) -> Complex64>(&self, f: F) -> Vec<Complex64> {
        self.points.iter().copied().map(f).collect()
    }
}

/// Barycentric weights of the Chebyshev–Lobatto interpolant at `x`.
fn barycentric_row(points: &[f64], x: f64, mut put: impl FnMut(usize, f64)) {
    let d = points.len();
    if let Some(k) = points.iter().position(|&p| (p - x).abs() <= 4.0 * f64::EPSILON * PI) {
        put(k, 1.0);
        return;
    }
    let weight = |k: usize| {
        let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        if k == 0 || k == d - 1 {
            0.5 * sign
        } else {
            sign
        }
    };
    let total: f64 = (0..d).map(|k| weight(k) / (x - points[k])).sum();
    for k in 0..d {
        put(k, weight(k) / (x - points[k]) / total);
    }
}

/// Whether the unknown profile is real or complex valued.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParamDomain {
    #[default]
    Real,
    /// Parameters are `[re₀ … re_{d−1}, im₀ … im_{d−1}]`.
    Complex,
}

/// Everything about an inversion except the data and the kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseSettings {
    pub basis: ProfileBasis,
    pub domain: ParamDomain,
    /// Second-difference penalty weight; `None` picks `1e-6` when the target
    /// has fewer than twice as many eigenvalues as parameters and `0`
    /// otherwise.
    pub mu: Option<f64>,
    pub picard: PicardOptions,
    /// Threshold for the `B ≠ 0` check; `None` uses the default.
    pub b_tol: Option<f64>,
}

impl InverseSettings {
    pub fn new(basis: ProfileBasis) -> Self {
        InverseSettings {
            basis,
            domain: ParamDomain::Real,
            mu: None,
            picard: PicardOptions::default(),
            b_tol: None,
        }
    }

    pub fn n_params(&self) -> usize {
        match self.domain {
            ParamDomain::Real => self.basis.dim(),
            ParamDomain::Complex => 2 * self.basis.dim(),
        }
    }

    /// Basis coefficients encoded as a parameter vector.
    pub fn params_from_coeffs(&self, coeffs: &[Complex64]) -> Vec<f64> {
        match self.domain {
            ParamDomain::Real => coeffs.iter().map(|c| c.re).collect(),
            ParamDomain::Complex => coeffs.iter().map(|c| c.re).chain(coeffs.iter().map(|c| c.im)).collect(),
        }
    }

    fn coeffs(&self, params: &[f64]) -> Result<Vec<Complex64>> {
        if params.len() != self.n_params() {
            return Err(Error::InvalidArgument("parameter count differs from the problem dimension"));
        }
        let d = self.basis.dim();
        Ok(match self.domain {
            ParamDomain::Real => params.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            ParamDomain::Complex => (0..d).map(|k| Complex64::new(params[k], params[d + k])).collect(),
        })
    }

    pub fn expand(&self, params: &[f64]) -> Result<Profile> {
        self.basis.expand(&self.coeffs(params)?)
    }
}

/// Recovery of component `unknown` of `kernel` from the spectrum `target`;
/// every other part of `kernel` is taken as known.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseProblem {
    kernel: StructuredKernel,
    unknown: usize,
    target: Spectrum,
    settings: InverseSettings,
}

impl InverseProblem {
    /// Fails with [`Error::ConditionViolated`] when `B` of the unknown
    /// component's `R` vanishes on `(0, π]`.
    pub fn new(kernel: StructuredKernel, unknown: usize, target: Spectrum, settings: InverseSettings) -> Result<Self> {
        let component = kernel.components().get(unknown).ok_or(Error::IndexOutOfRange {
            index: unknown,
            len: kernel.components().len(),
        })?;
        kernel.grid().ensure_same(settings.basis.grid())?;
        require_b_nonvanishing(&component.r, settings.b_tol)?;
        Ok(InverseProblem {
            kernel,
            unknown,
            target,
            settings,
        })
    }

    pub fn kernel(&self) -> &StructuredKernel {
        &self.kernel
    }

    pub fn target(&self) -> &Spectrum {
        &self.target
    }

    pub fn settings(&self) -> &InverseSettings {
        &self.settings
    }

    pub fn n_params(&self) -> usize {
        self.settings.n_params()
    }

    /// Fewer target eigenvalues (with multiplicity) than parameters.
    pub fn underdetermined(&self) -> bool {
        (self.target.multiplicity_sum() as usize) < self.n_params()
    }

    pub fn effective_mu(&self) -> f64 {
        self.settings.mu.unwrap_or({
            if (self.target.multiplicity_sum() as usize) < 2 * self.n_params() {
                1e-6
            } else {
                0.0
            }
        })
    }

    fn kernel_with(&self, params: &[f64]) -> Result<StructuredKernel> {
        let mut kernel = self.kernel.clone();
        kernel.set_profile(self.unknown, self.settings.expand(params)?)?;
        Ok(kernel)
    }

    /// Misfit followed by the penalty rows, flattened to reals.
    fn augmented_residual(&self, params: &[f64]) -> Result<Vec<f64>> {
        let misfit = spectrum_residual(params, self)?;
        let mut out: Vec<f64> = misfit.iter().flat_map(|c| [c.re, c.im]).collect();
        let mu = self.effective_mu();
        if mu > 0.0 {
            let scale = (2.0 * mu).sqrt();
            let d = self.settings.basis.dim();
            for block in params.chunks(d) {
                out.extend(block.windows(3).map(|w| scale * (w[0] - 2.0 * w[1] + w[2])));
            }
        }
        Ok(out)
    }
}

/// `Δ_P` and its derivatives at the target eigenvalues: an eigenvalue of
/// multiplicity `m` contributes `Δ, Δ′, …, Δ^{(m−1)}`.
pub fn spectrum_residual(params: &[f64], problem: &InverseProblem) -> Result<Vec<Complex64>> {
    let kernel = problem.kernel_with(params)?;
    if problem.target.eigenvalues.is_empty() {
        return Ok(Vec::new());
    }
    let g = compute_g(&kernel.assemble(), &problem.settings.picard)?;
    Ok(problem
        .target
        .eigenvalues
        .iter()
        .flat_map(|ev| (0..ev.multiplicity).map(move |k| (ev.value, k)))
        .map(|(nu, k)| char_delta_derivative(&g, nu, k))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Stop when a step is shorter than `xtol · (1 + |p|)`.
    pub xtol: f64,
    /// Stop when the residual norm falls below this.
    pub ftol: f64,
    pub initial_damping: f64,
    /// Relative forward-difference step.
    pub fd_step: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iter: 50,
            xtol: 1e-10,
            ftol: 1e-13,
            initial_damping: 1e-3,
            fd_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Residual norm at the start and after every accepted step.
    pub history: Vec<f64>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Levenberg–Marquardt on `½‖r(p)‖²` with Marquardt scaling. A residual
/// evaluation that fails during a trial step is treated as a rejected step.
pub fn levenberg_marquardt<F>(mut residual: F, init: &[f64], opts: &LmOptions) -> Result<LmOutcome>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let n = init.len();
    let mut p = init.to_vec();
    let mut r = residual(&p)?;
    let mut f = norm(&r);
    let mut history = vec![f];
    let mut damping = opts.initial_damping;
    let mut iterations = 0;
    let finish = |p: Vec<f64>, f: f64, iterations, converged, history| {
        Ok(LmOutcome {
            params: p,
            residual_norm: f,
            iterations,
            converged,
            history,
        })
    };
    if f < opts.ftol || n == 0 {
        return finish(p, f, 0, true, history);
    }
    while iterations < opts.max_iter {
        let m = r.len();
        let mut jac = DMatrix::zeros(m, n);
        for k in 0..n {
            let step = opts.fd_step * (1.0 + p[k].abs());
            let mut q = p.clone();
            q[k] += step;
            let rq = residual(&q)?;
            for row in 0..m {
                jac[(row, k)] = (rq[row] - r[row]) / step;
            }
        }
        let normal = jac.transpose() * &jac;
        let gradient = jac.transpose() * DVector::from_column_slice(&r);
        let diag_max = normal.diagonal().max();
        let floor = 1e-12 * diag_max.max(f64::MIN_POSITIVE);
        let mut accepted = false;
        for _ in 0..40 {
            let mut lhs = normal.clone();
            for k in 0..n {
                lhs[(k, k)] += damping * normal[(k, k)] + floor;
            }
            let delta = match lhs.clone().cholesky() {
                Some(ch) => ch.solve(&(-&gradient)),
                None => match lhs.lu().solve(&(-&gradient)) {
                    Some(s) => s,
                    None => {
                        damping *= 4.0;
                        continue;
                    }
                },
            };
            if delta.norm() <= opts.xtol * (1.0 + norm(&p)) {
                return finish(p, f, iterations, true, history);
            }
            let trial: Vec<f64> = p.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
            match residual(&trial) {
                Ok(rt) if norm(&rt) < f => {
                    p = trial;
                    r = rt;
                    f = norm(&r);
                    damping = (damping / 3.0).max(1e-12);
                    accepted = true;
                    break;
                }
                _ => damping *= 4.0,
            }
        }
        if !accepted {
            return finish(p, f, iterations, false, history);
        }
        iterations += 1;
        history.push(f);
        if f < opts.ftol {
            return finish(p, f, iterations, true, history);
        }
    }
    finish(p, f, iterations, false, history)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryReport {
    pub recovered: Profile,
    pub params: Vec<f64>,
    /// Norm of the misfit plus penalty rows at `params`.
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<f64>,
    pub underdetermined: bool,
}

pub fn recover_profile(problem: &InverseProblem, init: &[f64], opts: &LmOptions) -> Result<RecoveryReport> {
    if init.len() != problem.n_params() {
        return Err(Error::InvalidArgument("initial guess length differs from the problem dimension"));
    }
    let outcome = levenberg_marquardt(|p| problem.augmented_residual(p), init, opts)?;
    Ok(RecoveryReport {
        recovered: problem.settings.expand(&outcome.params)?,
        params: outcome.params,
        residual_norm: outcome.residual_norm,
        iterations: outcome.iterations,
        converged: outcome.converged,
        history: outcome.history,
        underdetermined: problem.underdetermined(),
    })
}

/// A stage of [`recover_sequential`] failed.
#[derive(Debug, Clone, PartialEq)]
pub struct SequentialError {
    /// Zero-based index of the failing stage.
    pub stage: usize,
    /// Reports of the stages that ran, including an unconverged final one.
    pub partial: Vec<RecoveryReport>,
    pub cause: Error,
}

/// Recovers the profiles of `kernel` one at a time: stage `k` fits
/// component `k` to `spectra[k]`, the spectrum of the kernel truncated to its
/// first `k + 1` components, with earlier profiles frozen at their recovered
/// values. Profiles already present in `kernel` are ignored.
pub fn recover_sequential(
    kernel: &StructuredKernel,
    spectra: &[Spectrum],
    settings: &InverseSettings,
    inits: &[Vec<f64>],
    opts: &LmOptions,
) -> core::result::Result<Vec<RecoveryReport>, SequentialError> {
    let fail = |stage, partial: &Vec<RecoveryReport>, cause| SequentialError {
        stage,
        partial: partial.clone(),
        cause,
    };
    let mut reports: Vec<RecoveryReport> = Vec::new();
    if spectra.len() > kernel.components().len() {
        return Err(fail(0, &reports, Error::InvalidArgument("more spectra than kernel components")));
    }
    if inits.len() != spectra.len() {
        return Err(fail(0, &reports, Error::InvalidArgument("need one initial guess per spectrum")));
    }
    for (stage, target) in spectra.iter().enumerate() {
        let run = || -> Result<RecoveryReport> {
            let mut stage_kernel = truncate_kernel(kernel, stage + 1)?;
            for (k, done) in reports.iter().enumerate() {
                stage_kernel.set_profile(k, done.recovered.clone())?;
            }
            let problem = InverseProblem::new(stage_kernel, stage, target.clone(), settings.clone())?;
            recover_profile(&problem, &inits[stage], opts)
        };
        match run() {
            Ok(report) if report.converged => reports.push(report),
            Ok(report) => {
                reports.push(report);
                return Err(fail(
                    stage,
                    &reports,
                    Error::Stage {
                        stage,
                        reason: "optimizer did not converge",
                    },
                ));
            }
            Err(e) => return Err(fail(stage, &reports, e)),
        }
    }
    Ok(reports)
}

/// `∫₀^π ψ(x) ∫₀ˣ D(x,t) ẽ(t) dt dx` by nested trapezoid sums.
fn bilinear(psi: &[Complex64], d: &TriangularField, e: &[Complex64]) -> Complex64 {
    let n = d.grid().n_intervals();
    let h = d.grid().step();
    trapezoid_by(0, n, h, |i| psi[i] * trapezoid_by(0, i, h, |j| d.get(i, j) * e[j]))
}

/// `|LHS − RHS|` of the Green identity
/// `∬ ψ (M − M̃) ẽ = i (ẽ(π) − ψ(0))`, with `ψ` from `m` and `ẽ` from
/// `m_tilde`.
pub fn verify_green_identity(m: &TriangularField, m_tilde: &TriangularField, lambda: Complex64) -> Result<f64> {
    m.grid().ensure_same(m_tilde.grid())?;
    let n = m.grid().n_intervals();
    let psi = eval_psi(m, lambda);
    let e_tilde = eval_e_direct(m_tilde, lambda);
    let lhs = bilinear(&psi, &m.sub(m_tilde)?, &e_tilde);
    let rhs = I * (e_tilde[n] - psi[0]);
    Ok((lhs - rhs).norm())
}

/// Compares the two forms of the pairing between the profile difference and
/// the solutions: `Σⱼ ∫₀^π (Pⱼ − P̃ⱼ)(π−x) zⱼ(x) dx` against
/// `∬ ψ Σⱼ Rⱼ(x,t)(Pⱼ − P̃ⱼ)(x−t) ẽ(t)`. The kernels must share `M₀` and
/// every `Rⱼ`.
pub fn verify_profile_pairing(kernel: &StructuredKernel, kernel_tilde: &StructuredKernel, lambda: Complex64) -> Result<f64> {
    kernel.grid().ensure_same(kernel_tilde.grid())?;
    if kernel.m0() != kernel_tilde.m0() {
        return Err(Error::InvalidArgument("kernels must share the same M0"));
    }
    if kernel.components().len() != kernel_tilde.components().len()
        || kernel
            .components()
            .iter()
            .zip(kernel_tilde.components())
            .any(|(a, b)| a.r != b.r)
    {
        return Err(Error::InvalidArgument("kernels must share the same R factors"));
    }
    let grid = *kernel.grid();
    let n = grid.n_intervals();
    let h = grid.step();
    let m = kernel.assemble();
    let m_tilde = kernel_tilde.assemble();
    let psi = eval_psi(&m, lambda);
    let e_tilde = eval_e_direct(&m_tilde, lambda);
    let mut via_z = Complex64::new(0.0, 0.0);
    let mut structured = TriangularField::zeros(grid);
    for (a, b) in kernel.components().iter().zip(kernel_tilde.components()) {
        let dp: Vec<Complex64> = a.p.values().iter().zip(b.p.values()).map(|(x, y)| x - y).collect();
        let z = eval_z(&a.r, &m, &m_tilde, lambda)?;
        via_z += trapezoid_by(0, n, h, |i| dp[n - i] * z[i]);
        let term = TriangularField::from_index_fn(grid, |i, j| a.r.get(i, j) * dp[i - j]);
        structured.add_assign(&term)?;
    }
    let direct = bilinear(&psi, &structured, &e_tilde);
    Ok((via_z - direct).norm())
}

/// Largest deviation over nodes and `lambdas` between `z` computed directly
/// and its representation `B(x)e^{−iλx} + ∫₀ˣ K(x,t)e^{−iλt} dt`, with `w`
/// from `m`, `ẽ` from `m_tilde` and `(B, K)` from [`assemble_z_kernel`].
pub fn verify_z_decomposition(
    r: &TriangularField,
    m: &TriangularField,
    m_tilde: &TriangularField,
    lambdas: &[Complex64],
    picard: &PicardOptions,
) -> Result<f64> {
    let k1 = compute_g(&reflected_kernel(m), picard)?;
    let k2 = compute_g(m_tilde, picard)?;
    let (b, k) = assemble_z_kernel(k1.g(), k2.g(), r)?;
    let grid = *r.grid();
    let h = grid.step();
    let mut worst: f64 = 0.0;
    for &lambda in lambdas {
        let z = eval_z(r, m, m_tilde, lambda)?;
        let waves: Vec<Complex64> = grid.nodes().iter().map(|&t| (-I * lambda * t).exp()).collect();
        for (i, zi) in z.iter().enumerate() {
            let repr = b.get(i) * waves[i] + trapezoid_by(0, i, h, |j| k.get(i, j) * waves[j]);
            worst = worst.max((zi - repr).norm());
        }
    }
    Ok(worst)
}
