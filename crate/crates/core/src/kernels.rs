//! Convolution-structured kernels
//!
//! ```text
//! M(x,t) = M₀(x,t) + Σⱼ Rⱼ(x,t) Pⱼ(x − t),   j = 1..p,
//! ```
//!
//! their truncations `M_k` (first `k` components) and the weight
//! `B(x) = ∫₀ˣ R(π − t, x − t) dt` whose non-vanishing on `(0, π]` makes the
//! profile `P` recoverable from the spectrum.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::quadrature::{trapezoid_by, Grid, Profile, TriangularField};
use crate::{Error, Result};

/// Largest supported number of components `p`.
pub const MAX_COMPONENTS: usize = 8;

/// One term `R(x,t) P(x − t)`, stored factored.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelComponent {
    pub r: TriangularField,
    pub p: Profile,
}

impl KernelComponent {
    pub fn new(r: TriangularField, p: Profile) -> Result<Self> {
        r.grid().ensure_same(p.grid())?;
        Ok(KernelComponent { r, p })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructuredKernel {
    m0: TriangularField,
    components: Vec<KernelComponent>,
}

impl StructuredKernel {
    pub fn new(m0: TriangularField, components: Vec<KernelComponent>) -> Result<Self> {
        if components.len() > MAX_COMPONENTS {
            return Err(Error::TooManyComponents {
                count: components.len(),
                max: MAX_COMPONENTS,
            });
        }
        for c in &components {
            m0.grid().ensure_same(c.r.grid())?;
            m0.grid().ensure_same(c.p.grid())?;
        }
        Ok(StructuredKernel { m0, components })
    }

    /// A kernel with no convolution part.
    pub fn plain(m0: TriangularField) -> Self {
        StructuredKernel {
            m0,
            components: Vec::new(),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.m0.grid()
    }

    pub fn m0(&self) -> &TriangularField {
        &self.m0
    }

    pub fn components(&self) -> &[KernelComponent] {
        &self.components
    }

    /// Replaces the profile of component `index`.
    pub fn set_profile(&mut self, index: usize, p: Profile) -> Result<()> {
        self.m0.grid().ensure_same(p.grid())?;
        let len = self.components.len();
        let c = self
            .components
            .get_mut(index)
            .ok_or(Error::IndexOutOfRange { index, len })?;
        c.p = p;
        Ok(())
    }

    pub fn assemble(&self) -> TriangularField {
        let mut m = self.m0.clone();
        for c in &self.components {
            add_component(&mut m, &c.r, &c.p);
        }
        m
    }
}

/// Adds `r(x,t) p(x − t)` to `m`. `x_i − t_j` is the node `x_{i−j}`, so the
/// profile is read directly without interpolation.
pub(crate) fn add_component(m: &mut TriangularField, r: &TriangularField, p: &Profile) {
    let pv = p.values();
    for i in 0..m.grid().len() {
        let rr = r.row(i);
        for (j, v) in m.row_mut(i).iter_mut().enumerate() {
            *v += rr[j] * pv[i - j];
        }
    }
}

pub fn assemble_kernel(sk: &StructuredKernel) -> TriangularField {
    sk.assemble()
}

/// `M_k`: the same `M₀` and the first `k` components.
pub fn truncate_kernel(sk: &StructuredKernel, k: usize) -> Result<StructuredKernel> {
    if k > sk.components.len() {
        return Err(Error::IndexOutOfRange {
            index: k,
            len: sk.components.len(),
        });
    }
    Ok(StructuredKernel {
        m0: sk.m0.clone(),
        components: sk.components[..k].to_vec(),
    })
}

/// `B(x_i) = ∫₀^{x_i} R(π − t, x_i − t) dt`. Both arguments are nodes and
/// `x_i − t ≤ π − t`, so every sample lies inside the triangle.
pub fn compute_b(r: &TriangularField) -> Profile {
    let grid = *r.grid();
    let n = grid.n_intervals();
    let h = grid.step();
    let values = (0..=n)
        .map(|i| trapezoid_by(0, i, h, |k| r.get(n - k, i - k)))
        .collect();
    Profile::from_values(grid, values).expect("one value per node")
}

/// Default threshold for [`check_b_nonvanishing`]: `1e-8 · max |B|`.
pub fn default_b_tol(b: &Profile) -> f64 {
    1e-8 * b.sup_norm()
}

/// True iff `|B| > tol` on the piecewise-linear interpolant of `B` over
/// `(0, π]`. A sign change between two nodes counts as vanishing.
pub fn check_b_nonvanishing(b: &Profile, tol: f64) -> bool {
    first_vanishing_node(b, tol).is_none()
}

pub(crate) fn first_vanishing_node(b: &Profile, tol: f64) -> Option<usize> {
    let v = b.values();
    (1..v.len()).find(|&i| {
        if !(v[i].norm() > tol) {
            return true;
        }
        // distance from the origin to the segment [v[i-1], v[i]], skipping
        // the first interval where B(0) = 0 by construction
        i >= 2 && segment_distance(v[i - 1], v[i]) <= tol
    })
}

fn segment_distance(a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return a.norm();
    }
    let s = (-(a.re * d.re + a.im * d.im) / len2).clamp(0.0, 1.0);
    (a + d * s).norm()
}

/// Computes `B` for `r` and fails with [`Error::ConditionViolated`] at the
/// first node where it vanishes.
pub fn require_b_nonvanishing(r: &TriangularField, tol: Option<f64>) -> Result<Profile> {
    let b = compute_b(r);
    let tol = tol.unwrap_or_else(|| default_b_tol(&b));
    match first_vanishing_node(&b, tol) {
        None => Ok(b),
        Some(i) => Err(Error::ConditionViolated {
            x: b.grid().node(i),
            value: b.get(i).norm(),
        }),
    }
}

/// Analytic families used to build kernels from configuration.
pub mod families {
    use super::*;

    /// `coeff · x^x_pow · t^t_pow`
    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct Monomial2 {
        pub coeff: Complex64,
        pub x_pow: i32,
        pub t_pow: i32,
    }

    /// `coeff · cos(x_freq·x + t_freq·t + phase)`
    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct Harmonic2 {
        pub coeff: Complex64,
        pub x_freq: f64,
        pub t_freq: f64,
        pub phase: f64,
    }

    /// Closed-form function on the triangle.
    #[derive(Debug, Clone, PartialEq)]
    pub enum FieldFamily {
        Constant(Complex64),
        Polynomial(Vec<Monomial2>),
        Trigonometric(Vec<Harmonic2>),
    }

    impl FieldFamily {
        /// Parses a flat coefficient list: one value for `constant`, triples
        /// `[c, p, q]` for `polynomial`, quadruples `[c, a, b, φ]` for
        /// `trigonometric`. `imag`, when given, supplies the imaginary part of
        /// each leading coefficient.
        pub fn from_coeffs(family: &str, coeffs: &[f64], imag: Option<&[f64]>) -> Result<Self> {
            let im = |k: usize| imag.and_then(|v| v.get(k).copied()).unwrap_or(0.0);
            match family {
                "constant" => {
                    if coeffs.len() != 1 {
                        return Err(Error::InvalidArgument("constant family takes one coefficient"));
                    }
                    Ok(FieldFamily::Constant(Complex64::new(coeffs[0], im(0))))
                }
                "polynomial" => {
                    if !coeffs.len().is_multiple_of(3) {
                        return Err(Error::InvalidArgument("polynomial field coefficients come in [c, p, q] triples"));
                    }
                    let mut terms = Vec::new();
                    for (k, c) in coeffs.chunks(3).enumerate() {
                        terms.push(Monomial2 {
                            coeff: Complex64::new(c[0], im(k)),
                            x_pow: exponent(c[1])?,
                            t_pow: exponent(c[2])?,
                        });
                    }
                    Ok(FieldFamily::Polynomial(terms))
                }
                "trigonometric" => {
                    if !coeffs.len().is_multiple_of(4) {
                        return Err(Error::InvalidArgument("trigonometric field coefficients come in [c, a, b, phase] quadruples"));
                    }
                    Ok(FieldFamily::Trigonometric(
                        coeffs
                            .chunks(4)
                            .enumerate()
                            .map(|(k, c)| Harmonic2 {
                                coeff: Complex64::new(c[0], im(k)),
                                x_freq: c[1],
                                t_freq: c[2],
                                phase: c[3],
                            })
                            .collect(),
                    ))
                }
                _ => Err(Error::InvalidArgument("unknown field family")),
            }
        }

        pub fn eval(&self, x: f64, t: f64) -> Complex64 {
            match self {
                FieldFamily::Constant(c) => *c,
                FieldFamily::Polynomial(terms) => terms
                    .iter()
                    .map(|m| m.coeff * x.powi(m.x_pow) * t.powi(m.t_pow))
                    .sum(),
                FieldFamily::Trigonometric(terms) => terms
                    .iter()
                    .map(|m| m.coeff * (m.x_freq * x + m.t_freq * t + m.phase).cos())
                    .sum(),
            }
        }

        pub fn sample(&self, grid: Grid) -> TriangularField {
            TriangularField::from_fn(grid, |x, t| self.eval(x, t))
        }
    }

    /// `coeff · cos(freq·x + phase)`
    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct Harmonic1 {
        pub coeff: Complex64,
        pub freq: f64,
        pub phase: f64,
    }

    /// Closed-form function on `[0, π]`.
    #[derive(Debug, Clone, PartialEq)]
    pub enum ProfileFamily {
        Constant(Complex64),
        /// Coefficients of `1, x, x², …`.
        Polynomial(Vec<Complex64>),
        Trigonometric(Vec<Harmonic1>),
    }

    impl ProfileFamily {
        /// Flat coefficients: `[c]`, `[c₀, c₁, …]`, or triples `[c, ω, φ]`.
        pub fn from_coeffs(family: &str, coeffs: &[f64], imag: Option<&[f64]>) -> Result<Self> {
            let im = |k: usize| imag.and_then(|v| v.get(k).copied()).unwrap_or(0.0);
            match family {
                "constant" => {
                    if coeffs.len() != 1 {
                        return Err(Error::InvalidArgument("constant family takes one coefficient"));
                    }
                    Ok(ProfileFamily::Constant(Complex64::new(coeffs[0], im(0))))
                }
                "polynomial" => {
                    if coeffs.is_empty() {
                        return Err(Error::InvalidArgument("polynomial profile needs at least one coefficient"));
                    }
                    Ok(ProfileFamily::Polynomial(
                        coeffs.iter().enumerate().map(|(k, &c)| Complex64::new(c, im(k))).collect(),
                    ))
                }
                "trigonometric" => {
                    if !coeffs.len().is_multiple_of(3) {
                        return Err(Error::InvalidArgument("trigonometric profile coefficients come in [c, freq, phase] triples"));
                    }
                    Ok(ProfileFamily::Trigonometric(
                        coeffs
                            .chunks(3)
                            .enumerate()
                            .map(|(k, c)| Harmonic1 {
                                coeff: Complex64::new(c[0], im(k)),
                                freq: c[1],
                                phase: c[2],
                            })
                            .collect(),
                    ))
                }
                _ => Err(Error::InvalidArgument("unknown profile family")),
            }
        }

        pub fn eval(&self, x: f64) -> Complex64 {
            match self {
                ProfileFamily::Constant(c) => *c,
                ProfileFamily::Polynomial(cs) => cs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c),
                ProfileFamily::Trigonometric(terms) => {
                    terms.iter().map(|m| m.coeff * (m.freq * x + m.phase).cos()).sum()
                }
            }
        }

        pub fn sample(&self, grid: Grid) -> Profile {
            Profile::from_fn(grid, |x| self.eval(x))
        }
    }

    fn exponent(v: f64) -> Result<i32> {
        if v >= 0.0 && v.fract() == 0.0 && v <= 64.0 {
            Ok(v as i32)
        } else {
            Err(Error::InvalidArgument("polynomial exponents must be small non-negative integers"))
        }
    }
}
