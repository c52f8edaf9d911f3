//! Boundary samples on the unit circle, their Fourier coefficients and the
//! circular Hilbert transform.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::series::{evaluate_model, CoefficientSeries, SingularityModel};

/// Values on the equispaced grid θ_j = θ_0 + 2πj/M, M even and ≥ 8.
///
/// The default grid starts at θ_0 = −π.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundarySamples {
    values: Vec<Complex64>,
    theta0: f64,
}

impl BoundarySamples {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        Self::with_start(values, -PI)
    }

    pub fn with_start(values: Vec<Complex64>, theta0: f64) -> Result<Self> {
        let m = values.len();
        if m < 8 || !m.is_multiple_of(2) {
            return Err(Error::BadGrid { reason: format!("{m} samples") });
        }
        if let Some(index) = values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { values, theta0 })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Accepts explicit angles, which must be equispaced with step 2π/M.
    pub fn from_grid(thetas: &[f64], values: Vec<Complex64>) -> Result<Self> {
        if thetas.len() != values.len() {
            return Err(Error::BadGrid { reason: "angle and value counts differ".into() });
        }
        let m = thetas.len();
        if m < 8 {
            return Err(Error::BadGrid { reason: format!("{m} samples") });
        }
        let step = TAU / m as f64;
        for (j, &t) in thetas.iter().enumerate() {
            if (t - thetas[0] - step * j as f64).abs() > 1e-9 {
                return Err(Error::BadGrid { reason: format!("angle {j} is off the equispaced grid") });
            }
        }
        Self::with_start(values, thetas[0])
    }

    /// Samples `f` on the default grid.
    pub fn from_fn(m: usize, mut f: impl FnMut(f64) -> Complex64) -> Result<Self> {
        let values = (0..m).map(|j| f(-PI + TAU * j as f64 / m as f64)).collect();
        Self::new(values)
    }

    /// Boundary trace f(e^{iθ}) of a model.
    pub fn trace_model(model: &SingularityModel, m: usize) -> Result<Self> {
        let mut values = Vec::with_capacity(m);
        for j in 0..m {
            let theta = -PI + TAU * j as f64 / m as f64;
            values.push(evaluate_model(model, Complex64::from_polar(1.0, theta))?);
        }
        Self::new(values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn theta(&self, j: usize) -> f64 {
        self.theta0 + TAU * j as f64 / self.len() as f64
    }

    pub fn is_real(&self, rel_tol: f64) -> bool {
        let scale = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        self.values.iter().all(|v| v.im.abs() <= rel_tol * scale)
    }
}

/// Map a DFT bin to its signed frequency in (−M/2, M/2].
fn signed_index(j: usize, m: usize) -> i64 {
    if j <= m / 2 {
        j as i64
    } else {
        j as i64 - m as i64
    }
}

/// All trapezoid-rule Fourier coefficients, indexed by DFT bin: slot j holds
/// the coefficient of e^{i n θ} with n = j for j ≤ M/2 and n = j − M above.
pub fn fourier_modes(samples: &BoundarySamples) -> Vec<Complex64> {
    let m = samples.len();
    let mut buf = samples.values.clone();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let scale = 1.0 / m as f64;
    buf.iter()
        .enumerate()
        .map(|(j, v)| {
            let n = signed_index(j, m) as f64;
            v * scale * Complex64::from_polar(1.0, -n * samples.theta0)
        })
        .collect()
}

/// c_n = (1/M) Σ_j f(θ_j) e^{−inθ_j} for n = 0..=n_max.
pub fn fourier_coefficients(samples: &BoundarySamples, n_max: usize) -> Result<CoefficientSeries> {
    let m = samples.len();
    if n_max + 1 > m / 2 {
        return Err(Error::AliasingBound { requested: n_max + 1, samples: m });
    }
    let modes = fourier_modes(samples);
    CoefficientSeries::new(modes[..=n_max].to_vec())
}

/// Apply the multiplier `factor(n)` to every Fourier mode.
fn apply_multiplier(samples: &BoundarySamples, factor: impl Fn(i64) -> Complex64) -> Vec<Complex64> {
    let m = samples.len();
    let mut buf = samples.values.clone();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(m).process(&mut buf);
    for (j, v) in buf.iter_mut().enumerate() {
        *v *= factor(signed_index(j, m));
    }
    planner.plan_fft_inverse(m).process(&mut buf);
    let scale = 1.0 / m as f64;
    buf.iter().map(|v| v * scale).collect()
}

/// Multiplier i·sgn(n), with the mean and the Nyquist mode removed.
pub(crate) fn hilbert_multiplier(n: i64, m: usize) -> Complex64 {
    if n == 0 || n.unsigned_abs() as usize * 2 == m {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::new(0.0, n.signum() as f64)
    }
}

/// Conjugate function on the circle: sin nθ → cos nθ, cos nθ → −sin nθ.
///
/// The mean of the input is discarded, so the output has zero mean.
pub fn circular_hilbert(v: &BoundarySamples) -> Result<BoundarySamples> {
    if !v.is_real(1e-12) {
        return Err(Error::NotReal);
    }
    let m = v.len();
    let out = apply_multiplier(v, |n| hilbert_multiplier(n, m));
    BoundarySamples::with_start(out.iter().map(|u| Complex64::new(u.re, 0.0)).collect(), v.theta0)
}

/// Boundary values f = (a0 + H[v − mean v]) + i v from the imaginary part
/// alone. `a0` is the mean of the real part, which `v` does not determine.
pub fn hilbert_complete(v: &BoundarySamples, a0: f64) -> Result<BoundarySamples> {
    // Im f keeps the mean of v, so Im c_0 = mean(v).
    let u = circular_hilbert(v)?;
    let values = u
        .values
        .iter()
        .zip(&v.values)
        .map(|(u, v)| Complex64::new(a0 + u.re, v.re))
        .collect();
    BoundarySamples::with_start(values, v.theta0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{synthesize_series, Singularity};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_mode() {
        let s = BoundarySamples::from_fn(16, |t| Complex64::from_polar(1.0, t)).unwrap();
        let cs = fourier_coefficients(&s, 3).unwrap();
        let expect = [0.0, 1.0, 0.0, 0.0];
        for (v, e) in cs.as_slice().iter().zip(expect) {
            assert!((v - c(e, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn constant_plus_second_mode() {
        let s = BoundarySamples::from_fn(16, |t| c(2.0, 0.0) + Complex64::from_polar(1.0, 2.0 * t)).unwrap();
        let cs = fourier_coefficients(&s, 3).unwrap();
        let expect = [2.0, 0.0, 1.0, 0.0];
        for (v, e) in cs.as_slice().iter().zip(expect) {
            assert!((v - c(e, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn pole_trace_gives_geometric_coefficients() {
        let m = SingularityModel::single(Singularity::algebraic(-1.0, c(2.0, 0.0), c(2.0, 0.0)));
        let s = BoundarySamples::trace_model(&m, 256).unwrap();
        let cs = fourier_coefficients(&s, 20).unwrap();
        for (n, v) in cs.as_slice().iter().enumerate() {
            assert!((v - c(0.5f64.powi(n as i32), 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn aliasing_bound_and_grid_checks() {
        let s = BoundarySamples::from_fn(16, |_| c(1.0, 0.0)).unwrap();
        assert!(fourier_coefficients(&s, 7).is_ok());
        assert!(matches!(fourier_coefficients(&s, 8), Err(Error::AliasingBound { .. })));
        assert!(BoundarySamples::new(vec![c(0.0, 0.0); 6]).is_err());
        assert!(BoundarySamples::new(vec![c(0.0, 0.0); 9]).is_err());
        let mut thetas: Vec<f64> = (0..8).map(|j| TAU * j as f64 / 8.0).collect();
        thetas[3] += 0.01;
        assert!(BoundarySamples::from_grid(&thetas, vec![c(0.0, 0.0); 8]).is_err());
    }

    #[test]
    fn shifted_grid_gives_same_coefficients() {
        let f = |t: f64| c(1.0, 0.0) + Complex64::from_polar(0.5, t) + Complex64::from_polar(0.25, 3.0 * t);
        let thetas: Vec<f64> = (0..32).map(|j| 0.3 + TAU * j as f64 / 32.0).collect();
        let s = BoundarySamples::from_grid(&thetas, thetas.iter().map(|&t| f(t)).collect()).unwrap();
        let cs = fourier_coefficients(&s, 4).unwrap();
        let expect = [1.0, 0.5, 0.0, 0.25, 0.0];
        for (v, e) in cs.as_slice().iter().zip(expect) {
            assert!((v - c(e, 0.0)).norm() < 1e-14);
        }
    }

    fn real_fn(m: usize, f: impl Fn(f64) -> f64) -> BoundarySamples {
        BoundarySamples::from_fn(m, |t| c(f(t), 0.0)).unwrap()
    }

    fn max_diff(a: &BoundarySamples, f: impl Fn(f64) -> f64) -> f64 {
        (0..a.len()).map(|j| (a.values()[j].re - f(a.theta(j))).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn hilbert_examples() {
        let u = circular_hilbert(&real_fn(64, f64::sin)).unwrap();
        assert!(max_diff(&u, f64::cos) < 1e-13);

        let u = circular_hilbert(&real_fn(64, |_| 0.0)).unwrap();
        assert!(max_diff(&u, |_| 0.0) == 0.0);

        let v = real_fn(64, |t| (3.0 * t).sin() - 0.5 * (2.0 * t).cos());
        let u = circular_hilbert(&v).unwrap();
        assert!(max_diff(&u, |t| (3.0 * t).cos() + 0.5 * (2.0 * t).sin()) < 1e-13);
    }

    #[test]
    fn hilbert_rejects_complex_input() {
        let s = BoundarySamples::from_fn(16, |t| Complex64::from_polar(1.0, t)).unwrap();
        assert!(matches!(circular_hilbert(&s), Err(Error::NotReal)));
    }

    #[test]
    fn completion_examples() {
        let f = hilbert_complete(&real_fn(32, f64::sin), 0.0).unwrap();
        for j in 0..f.len() {
            assert!((f.values()[j] - Complex64::from_polar(1.0, f.theta(j))).norm() < 1e-14);
        }
        let f = hilbert_complete(&real_fn(32, |_| 0.0), 7.0).unwrap();
        assert!(f.values().iter().all(|v| *v == c(7.0, 0.0)));
    }

    #[test]
    fn completion_recovers_pole_coefficients() {
        let model = SingularityModel::single(Singularity::algebraic(-1.0, c(1.5, 0.0), c(3.0, 0.0)));
        let trace = BoundarySamples::trace_model(&model, 256).unwrap();
        let v = BoundarySamples::from_real(&trace.values().iter().map(|f| f.im).collect::<Vec<_>>()).unwrap();
        let a0 = trace.values().iter().map(|f| f.re).sum::<f64>() / 256.0;
        let f = hilbert_complete(&v, a0).unwrap();
        let got = fourier_coefficients(&f, 30).unwrap();
        let want = synthesize_series(&model, 30).unwrap();
        for (g, w) in got.as_slice().iter().zip(want.as_slice()) {
            assert!((g - w).norm() < 1e-8);
        }
    }
}
