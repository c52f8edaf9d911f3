//! Angular position of a conjugate singularity pair on the circle of
//! convergence, from the sign runs of real coefficients.
//!
//! If a_n behaves like cos(nα)/n, the j-th sign change happens near index
//! (j − 1/2)π/α, so jπ divided by the number of terms in the first j runs
//! tends to α.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::{CoefficientSeries, ZERO_GUARD};

/// Imaginary parts up to this fraction of max|c| still count as real.
pub const REAL_TOL: f64 = 1e-10;
/// Entries up to this fraction of max|a| count as zero.
pub const SIGN_ZERO_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignRunProfile {
    /// Lengths of the complete runs, in order.
    pub runs: Vec<usize>,
    /// jπ / (N_1 + … + N_j) for each complete run j.
    pub alpha_estimates: Vec<f64>,
    pub alpha: f64,
    /// Change between the last two estimates.
    pub convergence_spread: f64,
    /// max |a_n|^{1/n} over the last quarter of the sequence.
    pub root_test: Option<f64>,
    /// Set when the root test is more than 10% away from 1.
    pub radius_warning: bool,
}

/// Run analysis of c_1, c_2, … (c_0 is ignored).
///
/// A zero entry joins the run that follows it, so each run length counts the
/// indices up to its last nonzero term. The final run is incomplete and is
/// left out of the estimate.
pub fn sign_runs(series: &CoefficientSeries) -> Result<SignRunProfile> {
    if !series.is_real(REAL_TOL) {
        return Err(Error::NotReal);
    }
    series.require_len(2)?;
    let a: Vec<f64> = series.as_slice()[1..].iter().map(|c| c.re).collect();
    let scale = a.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let zero = SIGN_ZERO_TOL * scale;

    let mut runs = Vec::new();
    let mut current: Option<bool> = None;
    let mut len = 0;
    let mut pending = 0;
    for &v in &a {
        if v.abs() <= zero {
            pending += 1;
            continue;
        }
        let positive = v > 0.0;
        match current {
            Some(s) if s == positive => len += pending + 1,
            Some(_) => {
                runs.push(len);
                len = pending + 1;
            }
            None => len = pending + 1,
        }
        current = Some(positive);
        pending = 0;
    }

    let root_test = root_test(&a);
    let radius_warning = root_test.is_some_and(|r| (r - 1.0).abs() > 0.1);

    if runs.is_empty() {
        return match current {
            Some(true) => Ok(SignRunProfile {
                runs,
                alpha_estimates: Vec::new(),
                alpha: 0.0,
                convergence_spread: 0.0,
                root_test,
                radius_warning,
            }),
            _ => Err(Error::NoCompleteRun),
        };
    }
    let mut total = 0;
    let alpha_estimates: Vec<f64> = runs
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            total += n;
            ((j + 1) as f64 * PI / total as f64).clamp(0.0, PI)
        })
        .collect();
    let alpha = *alpha_estimates.last().unwrap_or(&0.0);
    let convergence_spread = match alpha_estimates.len() {
        0 | 1 => 0.0,
        n => (alpha_estimates[n - 1] - alpha_estimates[n - 2]).abs(),
    };
    Ok(SignRunProfile { runs, alpha_estimates, alpha, convergence_spread, root_test, radius_warning })
}

fn root_test(a: &[f64]) -> Option<f64> {
    let start = a.len() - a.len() / 4;
    a.iter()
        .enumerate()
        .skip(start)
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, v)| v.abs().powf(1.0 / (i + 1) as f64))
        .reduce(f64::max)
}

/// Rescale a_n → a_n ρ^n so that a detected radius of convergence ρ becomes 1.
///
/// ρ is the reciprocal of the root test max |a_n|^{1/n} over the last quarter
/// of c_1, c_2, …. Returns the rescaled series and ρ.
pub fn normalize_radius(series: &CoefficientSeries) -> Result<(CoefficientSeries, f64)> {
    series.require_len(8)?;
    let c = series.as_slice();
    let moduli: Vec<f64> = c[1..].iter().map(|v| v.norm()).collect();
    let rho = root_test(&moduli).ok_or(Error::NoCompleteRun)?.recip();
    let scaled = c.iter().enumerate().map(|(n, v)| v * rho.powi(n as i32)).collect();
    Ok((CoefficientSeries::new(scaled)?, rho))
}

/// Coefficients of log f by the formal power series recurrence.
pub fn log_transform(series: &CoefficientSeries) -> Result<CoefficientSeries> {
    let c = series.as_slice();
    if c.is_empty() || c[0].norm() <= ZERO_GUARD * series.max_abs() || c[0].norm() == 0.0 {
        return Err(Error::ZeroConstantTerm);
    }
    let inv = c[0].inv();
    let mut b = vec![Complex64::new(0.0, 0.0); c.len()];
    b[0] = c[0].ln();
    for n in 1..c.len() {
        let acc: Complex64 = (1..n).map(|m| b[m] * c[n - m] * m as f64).sum();
        b[n] = (c[n] - acc / n as f64) * inv;
    }
    CoefficientSeries::new(b)
}

/// Coefficients of exp g, the inverse of [`log_transform`].
pub fn exp_transform(series: &CoefficientSeries) -> Result<CoefficientSeries> {
    let b = series.as_slice();
    if b.is_empty() {
        return CoefficientSeries::new(Vec::new());
    }
    let mut f = vec![Complex64::new(0.0, 0.0); b.len()];
    f[0] = b[0].exp();
    for n in 1..b.len() {
        let acc: Complex64 = (1..=n).map(|m| b[m] * f[n - m] * m as f64).sum();
        f[n] = acc / n as f64;
    }
    CoefficientSeries::new(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(f: impl Fn(usize) -> f64, len: usize) -> CoefficientSeries {
        CoefficientSeries::from_real(&(0..len).map(|n| if n == 0 { 0.0 } else { f(n) }).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn all_positive_gives_zero_angle() {
        let p = sign_runs(&series(|n| 1.0 / n as f64, 200)).unwrap();
        assert_eq!(p.alpha, 0.0);
        assert!(p.runs.is_empty());
    }

    #[test]
    fn alternating_gives_pi() {
        let p = sign_runs(&series(|n| (-1f64).powi(n as i32) / n as f64, 200)).unwrap();
        assert!(p.runs.iter().all(|&r| r == 1));
        assert_eq!(p.alpha, PI);
    }

    #[test]
    fn quarter_turn_interlaces_in_pairs() {
        let p = sign_runs(&series(|n| (n as f64 * PI / 2.0).cos() / n as f64, 200)).unwrap();
        assert!(p.runs.iter().all(|&r| r == 2), "{:?}", &p.runs[..6]);
        assert!((p.alpha - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn all_negative_has_no_complete_run() {
        assert!(matches!(sign_runs(&series(|n| -1.0 / n as f64, 50)), Err(Error::NoCompleteRun)));
    }

    #[test]
    fn complex_input_rejected() {
        let s = CoefficientSeries::new(vec![Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.5)]).unwrap();
        assert!(matches!(sign_runs(&s), Err(Error::NotReal)));
    }

    #[test]
    fn seventh_turn() {
        let alpha = PI / 7.0;
        let p = sign_runs(&series(|n| (n as f64 * alpha).cos() / n as f64, 2001)).unwrap();
        assert!((p.alpha - alpha).abs() < 5e-3);
        assert!(!p.radius_warning);
    }

    #[test]
    fn geometric_log() {
        let b = log_transform(&CoefficientSeries::from_real(&[1.0; 20]).unwrap()).unwrap();
        assert!(b.as_slice()[0].norm() < 1e-15);
        for n in 1..20 {
            assert!((b.as_slice()[n].re - 1.0 / n as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn log_of_one_is_zero() {
        let mut v = vec![0.0; 10];
        v[0] = 1.0;
        let b = log_transform(&CoefficientSeries::from_real(&v).unwrap()).unwrap();
        assert!(b.as_slice().iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn zero_constant_rejected() {
        let s = CoefficientSeries::from_real(&[0.0, 1.0, 2.0]).unwrap();
        assert!(matches!(log_transform(&s), Err(Error::ZeroConstantTerm)));
    }

    #[test]
    fn radius_normalization() {
        let s = CoefficientSeries::from_real(&(0..400).map(|n| (n as f64 * 0.9).cos() * 0.5f64.powi(n)).collect::<Vec<_>>())
            .unwrap();
        let p = sign_runs(&s).unwrap();
        assert!(p.radius_warning);
        let (scaled, rho) = normalize_radius(&s).unwrap();
        assert!((rho - 2.0).abs() < 0.1, "{rho}");
        assert!(!sign_runs(&scaled).unwrap().radius_warning);
    }
}
