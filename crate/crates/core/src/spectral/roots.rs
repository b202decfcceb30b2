//! Zeros of an entire function inside a rectangle: argument-principle
//! subdivision followed by Newton polishing.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::EntireFunction;
use crate::transform::TransformKernel;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchWindow {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl SearchWindow {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let w = SearchWindow {
            re_min,
            re_max,
            im_min,
            im_max,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.re_min, self.re_max, self.im_min, self.im_max]
            .iter()
            .all(|v| v.is_finite());
        if finite && self.re_min < self.re_max && self.im_min < self.im_max {
            Ok(())
        } else {
            Err(Error::InvalidWindow)
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.re_min <= z.re && z.re <= self.re_max && self.im_min <= z.im && z.im <= self.im_max
    }

    fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    /// Corners in counter-clockwise order starting at the lower left.
    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }

    fn expanded(&self, margin: f64) -> SearchWindow {
        SearchWindow {
            re_min: self.re_min - margin,
            re_max: self.re_max + margin,
            im_min: self.im_min - margin,
            im_max: self.im_max + margin,
        }
    }

    fn split(&self, fraction: f64) -> (SearchWindow, SearchWindow) {
        if self.width() >= self.height() {
            let cut = self.re_min + fraction * self.width();
            (
                SearchWindow { re_max: cut, ..*self },
                SearchWindow { re_min: cut, ..*self },
            )
        } else {
            let cut = self.im_min + fraction * self.height();
            (
                SearchWindow { im_max: cut, ..*self },
                SearchWindow { im_min: cut, ..*self },
            )
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootStatus {
    /// Newton converged to a simple zero inside its cell.
    Simple,
    /// Newton with multiplicity `m` converged to a point where the first
    /// derivative also vanishes.
    Cluster,
    /// Newton did not converge; the value is the center of the final cell.
    Unconverged,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenvalue {
    pub value: Complex64,
    pub multiplicity: u32,
    /// `|Δ(value)|`.
    pub residual: f64,
    pub status: RootStatus,
}

/// Zeros found inside a window, counted with multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<Eigenvalue>,
    pub window: SearchWindow,
    /// Winding number of `Δ` around the window boundary.
    pub total_count: u32,
    /// Grid step of the characteristic function.
    pub h: f64,
}

impl Spectrum {
    /// A spectrum given directly by its values (for instance read from a
    /// file). `total_count` is the sum of multiplicities.
    pub fn from_eigenvalues(mut eigenvalues: Vec<Eigenvalue>, window: SearchWindow, h: f64) -> Self {
        sort_eigenvalues(&mut eigenvalues);
        let total_count = eigenvalues.iter().map(|e| e.multiplicity).sum();
        Spectrum {
            eigenvalues,
            window,
            total_count,
            h,
        }
    }

    pub fn empty(window: SearchWindow) -> Self {
        Spectrum {
            eigenvalues: Vec::new(),
            window,
            total_count: 0,
            h: 0.0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn multiplicity_sum(&self) -> u32 {
        self.eigenvalues.iter().map(|e| e.multiplicity).sum()
    }
}

fn sort_eigenvalues(list: &mut [Eigenvalue]) {
    list.sort_by(|a, b| match a.value.re.total_cmp(&b.value.re) {
        Ordering::Equal => a.value.im.total_cmp(&b.value.im),
        other => other,
    });
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    /// Cells whose longer side is at most this size are handed to Newton.
    pub cell_size: f64,
    /// Below this size a cell that still fails Newton is reported as is.
    pub min_cell: f64,
    /// Initial contour sampling density (points per unit length).
    pub samples_per_unit: f64,
    /// Maximum bisection depth of a single contour segment.
    pub max_refine_depth: u32,
    /// A contour is rejected where `|f| < boundary_rel_tol · max |f|` on it.
    pub boundary_rel_tol: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Residual bound for polished roots; `None` means
    /// `1e-10 · max |f|` on the window boundary.
    pub residual_tol: Option<f64>,
    /// A multiplicity-`m` candidate is accepted as a cluster when
    /// `|f'| ≤ defect_tol · |f''| · cell size`.
    pub defect_tol: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            cell_size: 0.5,
            min_cell: 1e-9,
            samples_per_unit: 16.0,
            max_refine_depth: 40,
            boundary_rel_tol: 1e-12,
            newton_tol: 1e-13,
            newton_max_iter: 60,
            residual_tol: None,
            defect_tol: 1e-6,
        }
    }
}

/// Spectrum of the characteristic function built from one transformation
/// kernel.
pub fn find_spectrum(g: &TransformKernel, window: &SearchWindow, opts: &SpectrumOptions) -> Result<Spectrum> {
    find_zeros(g, window, opts)
}

struct Contour {
    winding: i64,
    max_abs: f64,
}

/// Winding number of `f` around the boundary of `window`.
pub fn winding_number<F: EntireFunction + ?Sized>(f: &F, window: &SearchWindow, opts: &SpectrumOptions) -> Result<i64> {
    window.validate()?;
    contour(f, window, opts).map(|c| c.winding)
}

fn contour<F: EntireFunction + ?Sized>(f: &F, window: &SearchWindow, opts: &SpectrumOptions) -> Result<Contour> {
    let mut density = opts.samples_per_unit;
    for _ in 0..4 {
        let corners = window.corners();
        let mut edges: Vec<(Vec<Complex64>, Vec<Complex64>)> = Vec::with_capacity(4);
        let mut max_abs: f64 = 0.0;
        for k in 0..4 {
            let (a, b) = (corners[k], corners[(k + 1) % 4]);
            let count = ((b - a).norm() * density).ceil().max(4.0) as usize;
            let points: Vec<Complex64> = (0..=count).map(|s| a + (b - a) * (s as f64 / count as f64)).collect();
            let values: Vec<Complex64> = points.iter().map(|z| f.value(*z)).collect();
            for v in &values {
                max_abs = max_abs.max(v.norm());
            }
            edges.push((points, values));
        }
        let floor = opts.boundary_rel_tol * max_abs;
        let mut total = 0.0;
        for (points, values) in &edges {
            for (z, v) in points.iter().zip(values) {
                if !(v.norm() > floor) {
                    return Err(Error::BoundaryNearZero {
                        point: *z,
                        value: v.norm(),
                    });
                }
            }
            for k in 0..points.len() - 1 {
                total += segment_phase(f, points[k], values[k], points[k + 1], values[k + 1], floor, 0, opts)?;
            }
        }
        let turns = total / (2.0 * PI);
        let nearest = turns.round();
        if (turns - nearest).abs() < 0.1 {
            return Ok(Contour {
                winding: nearest as i64,
                max_abs,
            });
        }
        density *= 2.0;
    }
    Err(Error::PhaseTracking {
        point: window.corners()[0],
    })
}

#[allow(clippy::too_many_arguments)]
fn segment_phase<F: EntireFunction + ?Sized>(
    f: &F,
    z0: Complex64,
    f0: Complex64,
    z1: Complex64,
    f1: Complex64,
    floor: f64,
    depth: u32,
    opts: &SpectrumOptions,
) -> Result<f64> {
    let step = (f1 / f0).arg();
    if step.abs() < FRAC_PI_2 {
        return Ok(step);
    }
    if depth >= opts.max_refine_depth {
        return Err(Error::PhaseTracking { point: z0 });
    }
    let zm = (z0 + z1) * 0.5;
    let fm = f.value(zm);
    if !(fm.norm() > floor) {
        return Err(Error::BoundaryNearZero {
            point: zm,
            value: fm.norm(),
        });
    }
    Ok(segment_phase(f, z0, f0, zm, fm, floor, depth + 1, opts)?
        + segment_phase(f, zm, fm, z1, f1, floor, depth + 1, opts)?)
}

/// Newton iteration `z ← z − m f/f'`. Returns the limit when the step falls
/// below tolerance.
fn newton<F: EntireFunction + ?Sized>(f: &F, start: Complex64, multiplicity: u32, opts: &SpectrumOptions) -> Option<Complex64> {
    let mut z = start;
    for _ in 0..opts.newton_max_iter {
        let v = f.value(z);
        if v == Complex64::new(0.0, 0.0) {
            return Some(z);
        }
        let d = f.derivative(z, 1);
        if d == Complex64::new(0.0, 0.0) || !d.is_finite() {
            return None;
        }
        let step = v / d * multiplicity as f64;
        if !step.is_finite() {
            return None;
        }
        z -= step;
        if step.norm() <= opts.newton_tol * (1.0 + z.norm()) {
            return Some(z);
        }
    }
    None
}

const SPLIT_FRACTIONS: [f64; 7] = [0.5, 0.47, 0.53, 0.43, 0.57, 0.39, 0.61];

/// All zeros of `f` inside `window`, with multiplicities summing to the
/// winding number of the window boundary.
pub fn find_zeros<F: EntireFunction + ?Sized>(f: &F, window: &SearchWindow, opts: &SpectrumOptions) -> Result<Spectrum> {
    window.validate()?;
    let outer = contour(f, window, opts)?;
    if outer.winding < 0 {
        return Err(Error::PhaseTracking {
            point: window.corners()[0],
        });
    }
    let residual_tol = opts.residual_tol.unwrap_or(1e-10 * outer.max_abs);
    let mut found = Vec::new();
    let mut stack = vec![(*window, outer.winding as u32)];
    while let Some((cell, w)) = stack.pop() {
        if w == 0 {
            continue;
        }
        let size = cell.width().max(cell.height());
        if size <= opts.cell_size {
            if let Some(root) = polish(f, &cell, w, size, opts) {
                let residual = f.value(root).norm();
                let status = if w == 1 { RootStatus::Simple } else { RootStatus::Cluster };
                let status = if residual <= residual_tol { status } else { RootStatus::Unconverged };
                found.push(Eigenvalue {
                    value: root,
                    multiplicity: w,
                    residual,
                    status,
                });
                continue;
            }
            if size <= opts.min_cell {
                let center = cell.center();
                found.push(Eigenvalue {
                    value: center,
                    multiplicity: w,
                    residual: f.value(center).norm(),
                    status: RootStatus::Unconverged,
                });
                continue;
            }
        }
        let mut children = None;
        let mut last_err = None;
        for fraction in SPLIT_FRACTIONS {
            let (a, b) = cell.split(fraction);
            match (contour(f, &a, opts), contour(f, &b, opts)) {
                (Ok(ca), Ok(cb)) if ca.winding >= 0 && cb.winding >= 0 && (ca.winding + cb.winding) as u32 == w => {
                    children = Some([(a, ca.winding as u32), (b, cb.winding as u32)]);
                    break;
                }
                (Err(e), _) | (_, Err(e)) => last_err = Some(e),
                _ => {}
            }
        }
        match children {
            // second child pushed first so the lower-left half is processed first
            Some([a, b]) => {
                stack.push(b);
                stack.push(a);
            }
            None => {
                return Err(last_err.unwrap_or(Error::PhaseTracking { point: cell.center() }));
            }
        }
    }
    sort_eigenvalues(&mut found);
    Ok(Spectrum {
        eigenvalues: found,
        window: *window,
        total_count: outer.winding as u32,
        h: f.step(),
    })
}

fn polish<F: EntireFunction + ?Sized>(
    f: &F,
    cell: &SearchWindow,
    w: u32,
    size: f64,
    opts: &SpectrumOptions,
) -> Option<Complex64> {
    let root = newton(f, cell.center(), w, opts)?;
    let slack = 1e-9 * (1.0 + root.norm());
    if !cell.expanded(slack).contains(root) {
        return None;
    }
    if w >= 2 {
        let d1 = f.derivative(root, 1).norm();
        let d2 = f.derivative(root, 2).norm();
        if d1 > opts.defect_tol * d2 * size {
            return None;
        }
    }
    Some(root)
}
