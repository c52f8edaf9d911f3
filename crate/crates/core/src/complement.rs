//! The complement function F(z) = −conj(f(1/conj z)), analytic outside the
//! unit circle, Cauchy-integral checks of a recovered model against boundary
//! data, and the Hilbert transform on a truncated line.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::boundary::{fourier_modes, BoundarySamples};
use crate::error::{Error, Result};
use crate::series::{complex_pow, SingularityKind, SingularityModel};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplementTerm {
    /// conj(M).
    pub magnitude: Complex64,
    /// conj(z_j).
    pub outer_location: Complex64,
    pub order: f64,
}

impl ComplementTerm {
    /// The interior singular point 1/conj(z_j).
    pub fn inner_point(&self) -> Complex64 {
        self.outer_location.inv()
    }
}

/// F(z) = −Σ conj(M_j) (conj(z_j) − 1/z)^{k_j} − conj(offset).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplementModel {
    pub terms: Vec<ComplementTerm>,
    /// −conj(offset of f).
    pub constant: Complex64,
    /// Singular points of F, all inside the unit circle.
    pub interior_points: Vec<Complex64>,
}

/// Termwise map of an algebraic model to its complement.
pub fn complement_from_model(model: &SingularityModel) -> Result<ComplementModel> {
    model.validate()?;
    let mut terms = Vec::new();
    let mut interior_points = Vec::new();
    let mut origin = false;
    for t in model.terms() {
        let SingularityKind::Algebraic { order } = t.kind else {
            return Err(Error::UnsupportedKind);
        };
        if !t.is_polynomial() {
            interior_points.push(t.location.conj().inv());
        }
        // (1 − a/z)^k grows like z^{−k} at the origin unless k is a non-positive integer.
        if order.fract() != 0.0 || order > 0.0 {
            origin = true;
        }
        terms.push(ComplementTerm { magnitude: t.magnitude.conj(), outer_location: t.location.conj(), order });
    }
    if origin {
        interior_points.push(Complex64::new(0.0, 0.0));
    }
    Ok(ComplementModel { terms, constant: -model.constant_offset.conj(), interior_points })
}

impl ComplementModel {
    /// F(z) for z ≠ 0. Each term is evaluated as −conj(L)(1 − 1/(z conj z_j))^k
    /// with L = M z_j^k. This agrees with −conj(f) on the circle branch by
    /// branch and keeps every cut on the segment from 0 to 1/conj(z_j).
    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        let mut total = self.constant;
        for t in &self.terms {
            let integer = t.order.fract() == 0.0;
            if z.norm() == 0.0 {
                if integer && t.order <= 0.0 {
                    // (1 − a/z)^{−m} → 0 as z → 0.
                    continue;
                }
                return Err(Error::AtSingularity { point: z });
            }
            let ratio = (z * t.outer_location).inv();
            let w = Complex64::new(1.0, 0.0) - ratio;
            if w.norm() <= 1e-15 && (t.order < 0.0 || !integer) {
                return Err(Error::AtSingularity { point: z });
            }
            if !integer && w.re <= 0.0 && w.im.abs() <= 1e-14 * ratio.norm() {
                return Err(Error::OnBranchCut { point: z });
            }
            let strength = t.magnitude * complex_pow(t.outer_location, t.order);
            total -= strength * complex_pow(w, t.order);
        }
        Ok(total)
    }

    /// Samples of F on the default boundary grid.
    pub fn trace(&self, m: usize) -> Result<BoundarySamples> {
        let mut values = Vec::with_capacity(m);
        for j in 0..m {
            let theta = -std::f64::consts::PI + TAU * j as f64 / m as f64;
            values.push(self.evaluate(Complex64::from_polar(1.0, theta))?);
        }
        BoundarySamples::new(values)
    }
}

/// Boundary values of the complement, −conj(f), from those of f.
pub fn complement_trace(samples: &BoundarySamples) -> Result<BoundarySamples> {
    BoundarySamples::with_start(samples.values().iter().map(|v| -v.conj()).collect(), samples.theta0())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CauchyMode {
    /// |z| < 1: the integral reproduces f(z).
    Interior,
    /// |z| > 1: the integral vanishes.
    Exterior,
    /// |z| = 1: principal value, normalized by 1/(πi) so that it reproduces f(z).
    BoundaryPV,
}

fn trapezoid(samples: &BoundarySamples, z: Complex64) -> Result<Complex64> {
    let m = samples.len();
    let points: Vec<Complex64> = (0..m).map(|j| Complex64::from_polar(1.0, samples.theta(j))).collect();
    let distance = points.iter().map(|t| (t - z).norm()).fold(f64::INFINITY, f64::min);
    if distance < TAU / m as f64 {
        return Err(Error::TooCloseToContour { point: z, distance });
    }
    // dt = i t dθ turns (1/2πi)∮ f/(t − z) dt into the mean of f t/(t − z).
    let sum: Complex64 = samples.values().iter().zip(&points).map(|(f, t)| f * t / (t - z)).sum();
    Ok(sum / m as f64)
}

/// (1/2πi)∮ f(t)/(t − z) dt counterclockwise over the unit circle.
///
/// Interior and exterior points use the trapezoid rule on the sample grid.
/// The boundary principal value is taken in Fourier space: it multiplies
/// the mode e^{inθ} by sgn(n) (with sgn 0 = 1), which is exact for
/// band-limited data.
pub fn cauchy_integral(samples: &BoundarySamples, z: Complex64, mode: CauchyMode) -> Result<Complex64> {
    let r = z.norm();
    match mode {
        CauchyMode::Interior if r < 1.0 => trapezoid(samples, z),
        CauchyMode::Exterior if r > 1.0 => trapezoid(samples, z),
        CauchyMode::BoundaryPV if (r - 1.0).abs() <= 1e-12 => {
            let m = samples.len();
            let modes = fourier_modes(samples);
            let total = modes
                .iter()
                .enumerate()
                .map(|(j, a)| {
                    let n = if j <= m / 2 { j as i64 } else { j as i64 - m as i64 };
                    let sign = match n {
                        _ if n.unsigned_abs() as usize * 2 == m => 0.0,
                        n if n >= 0 => 1.0,
                        _ => -1.0,
                    };
                    a * sign * z.powi(n as i32)
                })
                .sum();
            Ok(total)
        }
        _ => Err(Error::WrongSide { point: z }),
    }
}

/// (1/2πi)∮ F(t)/(t − z) dt taken clockwise, for boundary samples of a
/// function F analytic outside the circle.
///
/// By Cauchy's theorem on the exterior this is −F(∞) for |z| < 1 and
/// F(z) − F(∞) for |z| > 1. For a complement F(∞) = −conj(f(0)), so both
/// reduce to the textbook 0 and F(z) exactly when f(0) = 0.
pub fn complement_cauchy_integral(samples: &BoundarySamples, z: Complex64) -> Result<Complex64> {
    if (z.norm() - 1.0).abs() <= 1e-12 {
        return Err(Error::WrongSide { point: z });
    }
    Ok(-trapezoid(samples, z)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LineHilbertMode {
    /// H[sin] = cos.
    Classical,
    /// The negation of the classical transform.
    Complement,
}

/// Hilbert transform of samples on a grid symmetric about 0, by periodic
/// embedding with period N·h. Exact for data periodic on that period;
/// otherwise trust only the central half of the grid.
pub fn line_hilbert(x: &[f64], v: &[f64], mode: LineHilbertMode) -> Result<Vec<f64>> {
    let n = x.len();
    if n < 4 || v.len() != n {
        return Err(Error::AsymmetricGrid);
    }
    let h = (x[n - 1] - x[0]) / (n - 1) as f64;
    let tol = 1e-9 * (x[n - 1] - x[0]).abs();
    let symmetric = h > 0.0
        && (0..n).all(|j| (x[j] - (x[0] + h * j as f64)).abs() <= tol && (x[j] + x[n - 1 - j]).abs() <= tol);
    if !symmetric {
        return Err(Error::AsymmetricGrid);
    }
    let mut buf: Vec<Complex64> = v.iter().map(|&a| Complex64::new(a, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let sign = match mode {
        LineHilbertMode::Classical => 1.0,
        LineHilbertMode::Complement => -1.0,
    };
    for (j, b) in buf.iter_mut().enumerate() {
        // i·sgn(frequency); the mean and the Nyquist bin are dropped.
        let sgn = match (j * 2).cmp(&n) {
            _ if j == 0 => 0.0,
            std::cmp::Ordering::Less => 1.0,
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Greater => -1.0,
        };
        *b *= Complex64::new(0.0, sign * sgn);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    Ok(buf.iter().map(|b| b.re / n as f64).collect())
}
