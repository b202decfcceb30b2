//! Solutions of the forward and adjoint problems, the characteristic
//! function `Δ(λ) = e(π, λ)` and its zeros.
//!
//! Two independent routes compute `e(x,λ)`: marching the Volterra equation
//! directly ([`eval_e_direct`]) and integrating against the transformation
//! kernel ([`eval_e_via_g`]). They agree to O(h²).

mod roots;

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::quadrature::{trapezoid_by, TriangularField};
use crate::transform::TransformKernel;
use crate::{Error, Result, I};

pub use roots::{
    find_spectrum, find_zeros, winding_number, Eigenvalue, RootStatus, SearchWindow, Spectrum, SpectrumOptions,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `exp(rate · x_j)` for `j = 0..=n`. A running product, re-anchored with a
/// direct `exp` every 32 steps.
fn exp_table(rate: Complex64, h: f64, n: usize) -> Vec<Complex64> {
    let q = (rate * h).exp();
    let mut out = Vec::with_capacity(n + 1);
    let mut cur = Complex64::new(1.0, 0.0);
    for j in 0..=n {
        if j % 32 == 0 {
            cur = (rate * (h * j as f64)).exp();
        }
        out.push(cur);
        cur *= q;
    }
    out
}

/// `e(x_i, λ)` by marching
/// `e(x) = e^{−iλx} + i ∫₀ˣ e^{−iλ(x−t)} ∫₀ᵗ M(t,τ) e(τ) dτ dt`.
/// The trapezoid self-term at each node is linear in `e(x_i)` and is solved
/// exactly.
pub fn eval_e_direct(m: &TriangularField, lambda: Complex64) -> Vec<Complex64> {
    let grid = *m.grid();
    let n = grid.n_intervals();
    let h = grid.step();
    let plane = exp_table(-I * lambda, h, n);
    let q = (-I * lambda * h).exp();

    let mut e = vec![ZERO; n + 1];
    let mut inner = vec![ZERO; n + 1];
    e[0] = Complex64::new(1.0, 0.0);
    let mut shifted = ZERO;
    for i in 1..=n {
        shifted = q * (shifted + inner[i - 1]);
        let row = m.row(i);
        let mut known = row[0] * e[0] * 0.5;
        for k in 1..i {
            known += row[k] * e[k];
        }
        known *= h;
        let denom = Complex64::new(1.0, 0.0) - I * (0.25 * h * h) * row[i];
        e[i] = (plane[i] + I * h * (shifted + known * 0.5)) / denom;
        inner[i] = known + row[i] * e[i] * (0.5 * h);
    }
    e
}

/// `e(x_i, λ) = e^{−iλx_i} + ∫₀^{x_i} G(x_i,t) e^{−iλt} dt`.
pub fn eval_e_via_g(g: &TransformKernel, lambda: Complex64) -> Vec<Complex64> {
    let field = g.g();
    let grid = *field.grid();
    let n = grid.n_intervals();
    let h = grid.step();
    let plane = exp_table(-I * lambda, h, n);
    (0..=n)
        .map(|i| {
            let row = field.row(i);
            plane[i] + trapezoid_by(0, i, h, |j| row[j] * plane[j])
        })
        .collect()
}

/// `ψ(x_i, λ)` for `−iψ' + ∫ₓ^π M(t,x) ψ(t) dt = λψ`, `ψ(π) = 1`, by
/// marching backwards from `π` through
/// `ψ(x) = e^{iλ(x−π)} + i ∫ₓ^π e^{iλ(x−s)} ∫ₛ^π M(t,s) ψ(t) dt ds`.
pub fn eval_psi(m: &TriangularField, lambda: Complex64) -> Vec<Complex64> {
    let grid = *m.grid();
    let n = grid.n_intervals();
    let h = grid.step();
    // e^{iλ(x_i − π)} = e^{−iλ(π − x_i)}
    let back = exp_table(-I * lambda, h, n);
    let q = (-I * lambda * h).exp();

    let mut psi = vec![ZERO; n + 1];
    let mut tail = vec![ZERO; n + 1];
    psi[n] = Complex64::new(1.0, 0.0);
    let mut shifted = ZERO;
    for i in (0..n).rev() {
        shifted = q * (shifted + tail[i + 1]);
        let mut known = m.get(n, i) * psi[n] * 0.5;
        for k in i + 1..n {
            known += m.get(k, i) * psi[k];
        }
        known *= h;
        let m_ii = m.get(i, i);
        let denom = Complex64::new(1.0, 0.0) - I * (0.25 * h * h) * m_ii;
        psi[i] = (back[n - i] + I * h * (shifted + known * 0.5)) / denom;
        tail[i] = known + m_ii * psi[i] * (0.5 * h);
    }
    psi
}

/// `w(x_i, λ) = ψ(π − x_i, λ)`.
pub fn eval_w(m: &TriangularField, lambda: Complex64) -> Vec<Complex64> {
    let mut w = eval_psi(m, lambda);
    w.reverse();
    w
}

/// `z(x_i, λ) = ∫₀^{x_i} R(π−t, x_i−t) w(t,λ) ẽ(x_i−t,λ) dt` with `w` from
/// `m` and `ẽ` from `m_tilde`.
pub fn eval_z(
    r: &TriangularField,
    m: &TriangularField,
    m_tilde: &TriangularField,
    lambda: Complex64,
) -> Result<Vec<Complex64>> {
    r.grid().ensure_same(m.grid())?;
    r.grid().ensure_same(m_tilde.grid())?;
    let n = r.grid().n_intervals();
    let h = r.grid().step();
    let w = eval_w(m, lambda);
    let e_tilde = eval_e_direct(m_tilde, lambda);
    Ok((0..=n)
        .map(|i| trapezoid_by(0, i, h, |k| r.get(n - k, i - k) * w[k] * e_tilde[i - k]))
        .collect())
}

/// `Δ(λ) = e(π, λ)` from the transformation kernel.
pub fn char_delta(g: &TransformKernel, lambda: Complex64) -> Complex64 {
    char_delta_derivative(g, lambda, 0)
}

/// `Δ'(λ) = −iπ e^{−iλπ} + ∫₀^π (−it) G(π,t) e^{−iλt} dt`.
pub fn char_delta_prime(g: &TransformKernel, lambda: Complex64) -> Complex64 {
    char_delta_derivative(g, lambda, 1)
}

/// `Δ⁽ᵏ⁾(λ)`, differentiating under the integral sign.
pub fn char_delta_derivative(g: &TransformKernel, lambda: Complex64, order: u32) -> Complex64 {
    let h = g.g().grid().step();
    boundary_derivative(g.boundary_row(), h, lambda, order)
}

fn boundary_derivative(row: &[Complex64], h: f64, lambda: Complex64, order: u32) -> Complex64 {
    let n = row.len() - 1;
    let plane = exp_table(-I * lambda, h, n);
    let weight = |t: f64| (-I * t).powu(order);
    let lead = weight(PI) * plane[n];
    let nodes = |j: usize| if j == n { PI } else { PI * j as f64 / n as f64 };
    lead + trapezoid_by(0, n, h, |j| weight(nodes(j)) * row[j] * plane[j])
}

/// An entire function whose zeros are sought.
pub trait EntireFunction {
    /// `f⁽ᵏ⁾(λ)`.
    fn derivative(&self, lambda: Complex64, order: u32) -> Complex64;

    fn value(&self, lambda: Complex64) -> Complex64 {
        self.derivative(lambda, 0)
    }

    /// Grid step the function was discretized with, recorded in spectra.
    fn step(&self) -> f64 {
        0.0
    }
}

impl EntireFunction for TransformKernel {
    fn derivative(&self, lambda: Complex64, order: u32) -> Complex64 {
        char_delta_derivative(self, lambda, order)
    }

    fn step(&self) -> f64 {
        self.g().grid().step()
    }
}

/// `Δ(λ)` as a weighted combination of characteristic functions computed on
/// nested grids `N, 2N, 4N, …`. With one level this is the plain
/// characteristic function; with more levels the weights cancel the leading
/// `h², h⁴, …` terms of the trapezoid error expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicFunction {
    levels: Vec<Level>,
    base_step: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct Level {
    weight: f64,
    step: f64,
    row: Vec<Complex64>,
}

impl CharacteristicFunction {
    pub fn new(g: &TransformKernel) -> Self {
        CharacteristicFunction {
            levels: vec![Level {
                weight: 1.0,
                step: g.g().grid().step(),
                row: g.boundary_row().to_vec(),
            }],
            base_step: g.g().grid().step(),
        }
    }

    /// Richardson extrapolation over kernels on grids `N·2ᵏ`, coarsest first.
    pub fn richardson(kernels: &[TransformKernel]) -> Result<Self> {
        let first = kernels.first().ok_or(Error::InvalidArgument("need at least one kernel"))?;
        let base_n = first.g().grid().n_intervals();
        for (k, g) in kernels.iter().enumerate() {
            if g.g().grid().n_intervals() != base_n << k {
                return Err(Error::GridMismatch {
                    expected: base_n << k,
                    found: g.g().grid().n_intervals(),
                });
            }
        }
        let weights = richardson_weights(kernels.len());
        Ok(CharacteristicFunction {
            levels: kernels
                .iter()
                .zip(weights)
                .map(|(g, weight)| Level {
                    weight,
                    step: g.g().grid().step(),
                    row: g.boundary_row().to_vec(),
                })
                .collect(),
            base_step: first.g().grid().step(),
        })
    }

    pub fn levels(&self) -> usize {
        self.levels.len()
    }
}

impl EntireFunction for CharacteristicFunction {
    fn derivative(&self, lambda: Complex64, order: u32) -> Complex64 {
        self.levels
            .iter()
            .map(|l| boundary_derivative(&l.row, l.step, lambda, order) * l.weight)
            .sum()
    }

    fn step(&self) -> f64 {
        self.base_step
    }
}

/// Weights `w_k` such that `Σ w_k F(h/2ᵏ)` removes the error terms
/// `h², …, h^{2(L−1)}` from an even expansion in `h`.
pub fn richardson_weights(levels: usize) -> Vec<f64> {
    // table[k] holds the coefficient vector of the current column entry k
    let mut table: Vec<Vec<f64>> = (0..levels)
        .map(|k| {
            let mut v = vec![0.0; levels];
            v[k] = 1.0;
            v
        })
        .collect();
    for col in 1..levels {
        let factor = 4f64.powi(col as i32);
        for k in (col..levels).rev() {
            let prev = table[k - 1].clone();
            for (c, p) in table[k].iter_mut().zip(prev) {
                *c = (factor * *c - p) / (factor - 1.0);
            }
        }
    }
    table.pop().unwrap_or_default()
}
