//! The transformation operator
//!
//! ```text
//! e(x,λ) = exp(−iλx) + ∫₀ˣ G(x,t) exp(−iλt) dt
//! ```
//!
//! with `G = Σₙ Gₙ` built by successive approximations:
//!
//! ```text
//! G₁(x,t)   = i ∫_{x−t}^{x} M(s, t+s−x) ds
//! Gₙ₊₁(x,t) = i ∫_{x−t}^{x} ds ∫_{t+s−x}^{s} M(s,τ) Gₙ(τ, t+s−x) dτ
//! ```
//!
//! Substituting `u = t + s − x` turns the recursion into
//! `Gₙ₊₁(x,t) = i ∫₀ᵗ H(x−t+u, u) du` with `H(s,u) = ∫ᵤˢ M(s,τ) Gₙ(τ,u) dτ`.
//! `H` is one triangular sweep (O(N³)) and the outer integral runs along the
//! diagonals of `H`, so each term costs O(N³) instead of O(N⁴). Both
//! integrals are the same nested trapezoid sums as the direct formula.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::kernels::compute_b;
use crate::quadrature::{trapezoid_by, Profile, TriangularField};
use crate::{Error, Result, I};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    /// Absolute stopping threshold on `sup |Gₙ|`; `None` means
    /// `1e-12 · (1 + sup |G₁|)`.
    pub tol: Option<f64>,
    pub max_terms: usize,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions {
            tol: None,
            max_terms: 60,
        }
    }
}

/// The kernel `G` together with its convergence record.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformKernel {
    g: TriangularField,
    term_norms: Vec<f64>,
    iterations: usize,
    tol: f64,
}

impl TransformKernel {
    pub fn g(&self) -> &TriangularField {
        &self.g
    }

    /// `sup |Gₙ|` for every computed term, the last one below `tol`.
    pub fn term_norms(&self) -> &[f64] {
        &self.term_norms
    }

    /// Number of terms with `sup |Gₙ| ≥ tol` that went into the sum.
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// `G(π, t_j)`, all that `Δ(λ)` needs.
    pub fn boundary_row(&self) -> &[Complex64] {
        self.g.row(self.g.grid().n_intervals())
    }
}

/// Diagonal trapezoid: `out(d+j, j) = i·h·∫₀^{t_j} f(d+k, k)` for every
/// diagonal offset `d`. The `j = 0` column is exactly zero.
fn diagonal_integral(f: &TriangularField) -> TriangularField {
    let grid = *f.grid();
    let n = grid.n_intervals();
    let h = grid.step();
    let mut out = TriangularField::zeros(grid);
    for d in 0..=n {
        let first = f.get(d, 0);
        let mut cum = first;
        for j in 1..=n - d {
            let last = f.get(d + j, j);
            cum += last;
            out.set(d + j, j, I * h * (cum - (first + last) * 0.5));
        }
    }
    out
}

pub fn picard_g1(m: &TriangularField) -> TriangularField {
    diagonal_integral(m)
}

pub fn picard_step(m: &TriangularField, g_n: &TriangularField) -> Result<TriangularField> {
    m.grid().ensure_same(g_n.grid())?;
    let grid = *m.grid();
    let h = grid.step();
    let mut inner = TriangularField::zeros(grid);
    let mut acc: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); grid.len()];
    for s in 1..grid.len() {
        let m_row = m.row(s);
        let acc = &mut acc[..=s];
        acc.fill(Complex64::new(0.0, 0.0));
        // acc[u] = Σ_{τ=u}^{s} M(s,τ) Gₙ(τ,u); Gₙ(τ,u) = 0 is never read for u > τ.
        for (tau, &m_val) in m_row.iter().enumerate() {
            for (a, &gv) in acc[..=tau].iter_mut().zip(g_n.row(tau)) {
                *a += m_val * gv;
            }
        }
        let m_ss = m_row[s];
        let g_row = g_n.row(s);
        let h_row = inner.row_mut(s);
        for u in 0..s {
            h_row[u] = (acc[u] - (m_row[u] * g_n.get(u, u) + m_ss * g_row[u]) * 0.5) * h;
        }
    }
    Ok(diagonal_integral(&inner))
}

/// Sums the successive approximations until `sup |Gₙ| < tol`.
pub fn compute_g(m: &TriangularField, opts: &PicardOptions) -> Result<TransformKernel> {
    if opts.max_terms == 0 {
        return Err(Error::InvalidArgument("max_terms must be at least 1"));
    }
    let mut term = picard_g1(m);
    let first_norm = term.sup_norm();
    let tol = opts.tol.unwrap_or(1e-12 * (1.0 + first_norm));
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("Picard tolerance must be positive"));
    }
    let mut g = term.clone();
    let mut term_norms = vec![first_norm];
    let mut norm = first_norm;
    while norm >= tol {
        if term_norms.len() >= opts.max_terms {
            return Err(Error::PicardNotConverged {
                terms: term_norms.len(),
                last_norm: norm,
                tol,
            });
        }
        term = picard_step(m, &term)?;
        norm = term.sup_norm();
        g.add_assign(&term)?;
        term_norms.push(norm);
    }
    let iterations = term_norms.len() - 1;
    Ok(TransformKernel {
        g,
        term_norms,
        iterations,
        tol,
    })
}

/// `m_w(x,t) = M(π − t, π − x)`, the kernel of the forward problem solved by
/// `w(x,λ) = ψ(π − x, λ)`.
pub fn reflected_kernel(m: &TriangularField) -> TriangularField {
    let n = m.grid().n_intervals();
    TriangularField::from_index_fn(*m.grid(), |i, j| m.get(n - j, n - i))
}

/// The pair `(B, K)` with
/// `z(x,λ) = B(x) e^{−iλx} + ∫₀ˣ K(x,t) e^{−iλt} dt`, where `k1` represents
/// `w`, `k2` represents `ẽ` and `r` is the factor `R` of the structured part.
///
/// `K` collects three contributions, with `σ` the exponent variable:
///
/// ```text
/// K₁ term:  ∫_{x−σ}^{x}  R(π−t, x−t) K₁(t, t+σ−x) dt
/// K₂ term:  ∫_{0}^{σ}    R(π−t, x−t) K₂(x−t, σ−t) dt
/// K₁K₂ term: ∫_{0}^{x}   R(π−t, x−t) ∫ K₁(t,τ) K₂(x−t, σ−τ) dτ dt
/// ```
///
/// where the inner `τ` range is `[max(0, σ−(x−t)), min(t, σ)]`.
pub fn assemble_z_kernel(
    k1: &TriangularField,
    k2: &TriangularField,
    r: &TriangularField,
) -> Result<(Profile, TriangularField)> {
    k1.grid().ensure_same(k2.grid())?;
    k1.grid().ensure_same(r.grid())?;
    let grid = *r.grid();
    let n = grid.n_intervals();
    let h = grid.step();
    let b = compute_b(r);

    let mut k = TriangularField::zeros(grid);
    let mut conv = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut bilinear = vec![Complex64::new(0.0, 0.0); grid.len()];
    for i in 0..=n {
        // Σ over t of R(π−t, x_i−t)·(K₁(t,·) ⋆ K₂(x_i−t,·)), trapezoid in t.
        bilinear[..=i].fill(Complex64::new(0.0, 0.0));
        for tk in 0..=i {
            let wt = if i == 0 {
                0.0
            } else if tk == 0 || tk == i {
                0.5 * h
            } else {
                h
            };
            if wt == 0.0 {
                continue;
            }
            let rv = r.get(n - tk, i - tk) * wt;
            if rv == Complex64::new(0.0, 0.0) {
                continue;
            }
            let (a, bb) = (tk, i - tk);
            truncated_convolution(k1.row(a), k2.row(bb), h, &mut conv[..=i]);
            for (acc, c) in bilinear[..=i].iter_mut().zip(&conv[..=i]) {
                *acc += rv * c;
            }
        }
        let row = k.row_mut(i);
        for j in 0..=i {
            let first = trapezoid_by(i - j, i, h, |t| r.get(n - t, i - t) * k1.get(t, t + j - i));
            let second = trapezoid_by(0, j, h, |t| r.get(n - t, i - t) * k2.get(i - t, j - t));
            row[j] = first + second + bilinear[j];
        }
    }
    Ok((b, k))
}

/// `out[σ] = trapezoid over τ ∈ [max(0, σ−b), min(a, σ)] of f[τ]·g[σ−τ]`
/// for `σ = 0..=a+b`, where `f` has `a+1` samples and `g` has `b+1`.
fn truncated_convolution(f: &[Complex64], g: &[Complex64], h: f64, out: &mut [Complex64]) {
    let a = f.len() - 1;
    let b = g.len() - 1;
    for (sigma, o) in out.iter_mut().enumerate() {
        let lo = sigma.saturating_sub(b);
        let hi = a.min(sigma);
        *o = if hi <= lo {
            Complex64::new(0.0, 0.0)
        } else {
            let mut acc = (f[lo] * g[sigma - lo] + f[hi] * g[sigma - hi]) * 0.5;
            for tau in lo + 1..hi {
                acc += f[tau] * g[sigma - tau];
            }
            acc * h
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{make_grid, Grid};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// Direct O(N⁴) nested trapezoid of the Gₙ₊₁ recursion, no change of
    /// variables.
    fn naive_step(m: &TriangularField, g: &TriangularField) -> TriangularField {
        let grid = *m.grid();
        let h = grid.step();
        TriangularField::from_index_fn(grid, |i, j| {
            let outer = trapezoid_by(i - j, i, h, |s| {
                let shift = j + s - i;
                trapezoid_by(shift, s, h, |tau| m.get(s, tau) * g.get(tau, shift))
            });
            I * outer
        })
    }

    fn naive_g1(m: &TriangularField) -> TriangularField {
        let grid = *m.grid();
        let h = grid.step();
        TriangularField::from_index_fn(grid, |i, j| I * trapezoid_by(i - j, i, h, |s| m.get(s, j + s - i)))
    }

    fn smooth_kernel(grid: Grid) -> TriangularField {
        TriangularField::from_fn(grid, |x, t| Complex64::new((x - 2.0 * t).cos() + 0.3 * x * t, 0.2 * t.sin()))
    }

    #[test]
    fn g1_examples() {
        let g = make_grid(20).unwrap();
        assert_eq!(picard_g1(&TriangularField::zeros(g)).sup_norm(), 0.0);
        let g1 = picard_g1(&TriangularField::constant(g, c(1.0)));
        for i in 0..g.len() {
            assert_eq!(g1.get(i, 0), c(0.0));
            for j in 0..=i {
                assert!((g1.get(i, j) - I * g.node(j)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn g2_constant_kernel_closed_form() {
        // m ≡ 1: G₂(x,t) = −(x − t) t² / 2
        let g = make_grid(40).unwrap();
        let m = TriangularField::constant(g, c(1.0));
        let g2 = picard_step(&m, &picard_g1(&m)).unwrap();
        for i in 0..g.len() {
            for j in 0..=i {
                let (x, t) = (g.node(i), g.node(j));
                assert!((g2.get(i, j) - c(-(x - t) * t * t / 2.0)).norm() < 1e-12, "({i},{j})");
            }
        }
    }

    #[test]
    fn fast_recursion_matches_naive_nested_trapezoid() {
        let g = make_grid(14).unwrap();
        let m = smooth_kernel(g);
        let g1 = picard_g1(&m);
        assert!(g1.sup_distance(&naive_g1(&m)).unwrap() < 1e-13);
        let fast = picard_step(&m, &g1).unwrap();
        let slow = naive_step(&m, &g1);
        assert!(fast.sup_distance(&slow).unwrap() < 1e-13);
        let fast3 = picard_step(&m, &fast).unwrap();
        assert!(fast3.sup_distance(&naive_step(&m, &slow)).unwrap() < 1e-13);
    }

    #[test]
    fn step_with_zero_term_is_zero() {
        let g = make_grid(10).unwrap();
        let m = smooth_kernel(g);
        let out = picard_step(&m, &TriangularField::zeros(g)).unwrap();
        assert_eq!(out.sup_norm(), 0.0);
        let out = picard_step(&m, &picard_g1(&m)).unwrap();
        for i in 0..g.len() {
            assert_eq!(out.get(i, 0), c(0.0));
        }
    }

    #[test]
    fn step_rejects_grid_mismatch() {
        let m = TriangularField::zeros(make_grid(4).unwrap());
        let gn = TriangularField::zeros(make_grid(6).unwrap());
        assert!(picard_step(&m, &gn).is_err());
    }

    #[test]
    fn zero_kernel_has_no_terms() {
        let g = make_grid(16).unwrap();
        let tk = compute_g(&TriangularField::zeros(g), &PicardOptions::default()).unwrap();
        assert_eq!(tk.iterations(), 0);
        assert_eq!(tk.g().sup_norm(), 0.0);
    }

    #[test]
    fn constant_kernel_diagonal() {
        let g = make_grid(64).unwrap();
        let tk = compute_g(&TriangularField::constant(g, c(1.0)), &PicardOptions::default()).unwrap();
        for i in 0..g.len() {
            assert!((tk.g().get(i, i) - I * g.node(i)).norm() < 1e-12);
            assert_eq!(tk.g().get(i, 0), c(0.0));
        }
        assert!(tk.iterations() > 3);
    }

    #[test]
    fn diagonal_matches_trapezoid_of_kernel_diagonal() {
        let g = make_grid(50).unwrap();
        let m = smooth_kernel(g);
        let tk = compute_g(&m, &PicardOptions::default()).unwrap();
        let diag = m.diagonal();
        for i in 0..g.len() {
            let want = I * crate::quadrature::integrate_nodes(&diag, &g, 0, i).unwrap();
            assert!((tk.g().get(i, i) - want).norm() < 1e-12);
        }
    }

    #[test]
    fn term_norms_decay_and_extra_terms_change_little() {
        let g = make_grid(40).unwrap();
        let m = TriangularField::from_real_fn(g, |x, t| 2.0 + x - t);
        let tk = compute_g(&m, &PicardOptions::default()).unwrap();
        let norms = tk.term_norms();
        assert!(*norms.last().unwrap() < tk.tol());
        // eventually monotone: from the peak onwards
        let peak = norms
            .iter()
            .enumerate()
            .fold((0, 0.0), |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc })
            .0;
        for w in norms[peak..].windows(2) {
            assert!(w[1] < w[0]);
        }
        for v in &norms[..norms.len() - 1] {
            assert!(*v > 0.0);
        }
        let tighter = compute_g(
            &m,
            &PicardOptions {
                tol: Some(tk.tol() * 1e-3),
                max_terms: 120,
            },
        )
        .unwrap();
        assert!(tk.g().sup_distance(tighter.g()).unwrap() < tk.tol());
    }

    #[test]
    fn reports_non_convergence() {
        let g = make_grid(16).unwrap();
        let m = TriangularField::constant(g, c(5.0));
        let err = compute_g(&m, &PicardOptions { tol: None, max_terms: 3 }).unwrap_err();
        assert!(matches!(err, Error::PicardNotConverged { terms: 3, .. }));
    }

    #[test]
    fn grid_convergence_is_second_order() {
        let run = |n: usize| compute_g(&smooth_kernel(make_grid(n).unwrap()), &PicardOptions::default()).unwrap();
        let (a, b, cc) = (run(20), run(40), run(80));
        let d1 = b.g().coarsen().unwrap().sup_distance(a.g()).unwrap();
        let d2 = cc.g().coarsen().unwrap().sup_distance(b.g()).unwrap();
        let ratio = d1 / d2;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn reflection() {
        let g = make_grid(12).unwrap();
        let cst = TriangularField::constant(g, c(1.7));
        assert_eq!(reflected_kernel(&cst), cst);
        let m = smooth_kernel(g);
        assert_eq!(reflected_kernel(&reflected_kernel(&m)), m);
        let mx = TriangularField::from_real_fn(g, |x, _| x);
        let w = reflected_kernel(&mx);
        for i in 0..g.len() {
            for j in 0..=i {
                assert!((w.get(i, j).re - (core::f64::consts::PI - g.node(j))).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn z_kernel_trivial_cases() {
        let g = make_grid(16).unwrap();
        let r = TriangularField::from_real_fn(g, |x, t| 1.0 + x * t);
        let zero = TriangularField::zeros(g);
        let (b, k) = assemble_z_kernel(&zero, &zero, &r).unwrap();
        assert_eq!(k.sup_norm(), 0.0);
        assert_eq!(b, compute_b(&r));

        let k1 = smooth_kernel(g);
        let (b, k) = assemble_z_kernel(&k1, &k1, &zero).unwrap();
        assert_eq!(b.sup_norm(), 0.0);
        assert_eq!(k.sup_norm(), 0.0);

        assert!(assemble_z_kernel(&zero, &TriangularField::zeros(make_grid(8).unwrap()), &r).is_err());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
        #[test]
        fn recursion_is_linear(s in -3.0f64..3.0, phase in 0.0f64..3.0) {
            let g = make_grid(10).unwrap();
            let m = TriangularField::from_fn(g, |x, t| Complex64::new((x + phase * t).sin(), x));
            let mut ms = m.clone();
            ms.scale(c(s));
            let g1 = picard_g1(&m);
            let mut g1s = g1.clone();
            g1s.scale(c(s));
            proptest::prop_assert!(picard_g1(&ms).sup_distance(&g1s).unwrap() < 1e-12);
            let step = picard_step(&m, &g1).unwrap();
            let mut step_s = step.clone();
            step_s.scale(c(s));
            proptest::prop_assert!(picard_step(&m, &g1s).unwrap().sup_distance(&step_s).unwrap() < 1e-12);
        }
    }
}
