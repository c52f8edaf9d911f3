//! Domb–Sykes extrapolation of the ratios R_n against x = 1/(n+1), and
//! resolution of several singularities at distinct radii by peeling them off
//! one at a time, nearest first.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{complex_median, lstsq, median};
use crate::series::{
    term_coefficients, CoefficientSeries, RatioSequence, Singularity, SingularityKind, SingularityModel, Slot,
};
use crate::single::snap_order;

/// Fewest ratio points a fit accepts.
pub const MIN_FIT_POINTS: usize = 6;
const MIN_SELECT_POINTS: usize = 12;
/// Relative intercept change below which a window counts as settled.
pub const WINDOW_TOL: f64 = 1e-7;
const IMAG_TOL: f64 = 1e-8;

/// Rational fit R(x) = (p0 + p1 x)/(1 + q1 x).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DombSykesFit {
    pub p0: f64,
    pub p1: f64,
    pub q1: f64,
    pub window_start: usize,
    pub window_end: usize,
    pub intercept: f64,
    /// dR/dx at x = 0.
    pub slope0: f64,
    pub k_est: f64,
    pub z_est: f64,
    /// RMS misfit of R over the window.
    pub fit_residual: f64,
    /// A straight line (q1 = 0) fits within twice the rational misfit.
    pub straight: bool,
}

impl DombSykesFit {
    pub fn eval(&self, x: f64) -> f64 {
        (self.p0 + self.p1 * x) / (1.0 + self.q1 * x)
    }
}

fn window_points(ratios: &RatioSequence, window_start: usize, window_end: usize) -> Result<Vec<(usize, f64)>> {
    let raw: Vec<(usize, Complex64)> = ratios
        .defined_r()
        .filter(|&(n, _)| n >= window_start && n < window_end)
        .collect();
    if raw.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientWindow { available: raw.len(), needed: MIN_FIT_POINTS });
    }
    if raw.iter().any(|(_, r)| r.im.abs() > IMAG_TOL * r.norm()) {
        return Err(Error::OscillatingRatios);
    }
    let positive = raw[0].1.re > 0.0;
    if raw.iter().any(|(_, r)| (r.re > 0.0) != positive) {
        return Err(Error::OscillatingRatios);
    }
    Ok(raw.into_iter().map(|(n, r)| (n, r.re)).collect())
}

fn abscissa(n: usize) -> f64 {
    1.0 / (n as f64 + 1.0)
}

/// Solves R(1 + q1 x) = p0 + p1 x in weighted least squares, then twice more
/// with rows scaled by 1/(1 + q1 x) so the misfit approaches the misfit in R.
fn rational_fit(points: &[(usize, f64)], weighted: bool) -> Option<(f64, f64, f64)> {
    let weight = |n: usize| if weighted { (n as f64 + 1.0).powi(4) } else { 1.0 };
    let mut q1 = 0.0;
    let mut sol = (0.0, 0.0, 0.0);
    for _ in 0..3 {
        let a = nalgebra::DMatrix::from_fn(points.len(), 3, |i, j| {
            let (n, r) = points[i];
            let x = abscissa(n);
            let s = weight(n) / (1.0 + q1 * x);
            s * [1.0, x, -x * r][j]
        });
        let b = nalgebra::DVector::from_iterator(
            points.len(),
            points.iter().map(|&(n, r)| weight(n) / (1.0 + q1 * abscissa(n)) * r),
        );
        let y = lstsq(&a, &b)?;
        sol = (y[0], y[1], y[2]);
        q1 = y[2];
    }
    Some(sol)
}

fn line_fit(points: &[(usize, f64)], weighted: bool) -> Option<(f64, f64)> {
    let weight = |n: usize| if weighted { (n as f64 + 1.0).powi(4) } else { 1.0 };
    let a = nalgebra::DMatrix::from_fn(points.len(), 2, |i, j| weight(points[i].0) * [1.0, abscissa(points[i].0)][j]);
    let b = nalgebra::DVector::from_iterator(points.len(), points.iter().map(|&(n, r)| weight(n) * r));
    let y = lstsq(&a, &b)?;
    Some((y[0], y[1]))
}

fn rms(points: &[(usize, f64)], f: impl Fn(f64) -> f64) -> f64 {
    (points.iter().map(|&(n, r)| (r - f(abscissa(n))).powi(2)).sum::<f64>() / points.len() as f64).sqrt()
}

fn fit_window(ratios: &RatioSequence, window_start: usize, window_end: usize, weighted: bool) -> Result<DombSykesFit> {
    let points = window_points(ratios, window_start, window_end)?;
    let (p0, p1, q1) = rational_fit(&points, weighted).ok_or(Error::IllConditioned)?;
    let (l0, l1) = line_fit(&points, weighted).ok_or(Error::IllConditioned)?;
    let fit_residual = rms(&points, |x| (p0 + p1 * x) / (1.0 + q1 * x));
    let line_residual = rms(&points, |x| l0 + l1 * x);
    // The absolute floor keeps exact data, where both misfits are rounding
    // noise, from flipping the verdict at random.
    let straight = line_residual <= 2.0 * fit_residual + 1e-12 * p0.abs();
    let slope0 = p1 - p0 * q1;
    Ok(DombSykesFit {
        p0,
        p1,
        q1,
        window_start,
        window_end: points.last().map_or(window_end, |p| p.0 + 1),
        intercept: p0,
        slope0,
        k_est: -1.0 - slope0 / p0,
        z_est: 1.0 / p0,
        fit_residual,
        straight,
    })
}

/// Fits every defined R_n with n ≥ `window_start`.
///
/// Rows are scaled by (n+1)⁴ so that the far end of the window, where the
/// next singularity's influence has decayed, dominates.
pub fn domb_sykes_fit(ratios: &RatioSequence, window_start: usize) -> Result<DombSykesFit> {
    fit_window(ratios, window_start.max(1), ratios.r_end(), true)
}

/// Smallest window start whose intercept agrees with the fit over the upper
/// half of the same window to [`WINDOW_TOL`] relative. Falls back to N/2.
pub fn select_window(ratios: &RatioSequence) -> Result<usize> {
    let first = ratios.start_index.max(1);
    let end = ratios.r_end();
    let available = ratios.defined_r().filter(|&(n, _)| n >= first).count();
    if available < MIN_SELECT_POINTS {
        return Err(Error::InsufficientWindow { available, needed: MIN_SELECT_POINTS });
    }
    for start in first..end.saturating_sub(2 * MIN_FIT_POINTS) {
        let half = start + (end - start) / 2;
        let (Ok(full), Ok(upper)) = (fit_window(ratios, start, end, false), fit_window(ratios, half, end, false))
        else {
            continue;
        };
        if (full.intercept - upper.intercept).abs() < WINDOW_TOL * full.intercept.abs() {
            return Ok(start);
        }
    }
    Ok((first + end) / 2)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MagnitudeEstimate {
    pub magnitude: Complex64,
    /// Largest relative deviation of a tail estimate from the median.
    pub spread: f64,
    /// Spread above 10%: the next singularity is still felt in the tail.
    pub unstable: bool,
}

/// Median of c_n / u_n over the tail, where u_n are the unit-magnitude
/// coefficients of the term. Order k = 0 is read as a logarithmic term.
pub fn estimate_magnitude(series: &CoefficientSeries, k: f64, z1: Complex64) -> Result<MagnitudeEstimate> {
    let kind = if k == 0.0 { SingularityKind::Logarithmic } else { SingularityKind::Algebraic { order: k } };
    estimate_kind_magnitude(series, kind, z1, series.len())
}

fn estimate_kind_magnitude(
    series: &CoefficientSeries,
    kind: SingularityKind,
    z1: Complex64,
    end: usize,
) -> Result<MagnitudeEstimate> {
    const TAIL_MIN: usize = 8;
    // c_0 carries the constant offset, so it never enters the tail.
    let usable = end.min(series.len()).saturating_sub(1);
    if usable < TAIL_MIN {
        return Err(Error::TooShort { needed: TAIL_MIN + 1, got: end.min(series.len()) });
    }
    let tail = (usable / 4).max(TAIL_MIN);
    let unit = term_coefficients(&Singularity { kind, location: z1, magnitude: Complex64::new(1.0, 0.0) }, usable);
    let estimates: Vec<Complex64> = (usable + 1 - tail..=usable)
        .filter(|&n| unit[n].norm() > 0.0)
        .map(|n| series.as_slice()[n] / unit[n])
        .collect();
    if estimates.is_empty() {
        return Err(Error::IllConditioned);
    }
    let magnitude = complex_median(&estimates);
    let spread = estimates.iter().map(|e| (e - magnitude).norm()).fold(0.0, f64::max) / magnitude.norm();
    Ok(MagnitudeEstimate { magnitude, spread, unstable: spread > 0.1 || spread.is_nan() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PeelTermination {
    ResidualBelowTolerance,
    /// The last stage was a straight Domb–Sykes line and left nothing behind.
    StraightLineFinal,
    StageCap,
    /// No trustworthy coefficients remain for another fit.
    Exhausted,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeelStage {
    pub fit: DombSykesFit,
    pub singularity: Singularity,
    pub magnitude_spread: f64,
    pub magnitude_unstable: bool,
    /// Number of leading coefficients trusted for this stage's fit.
    pub trusted_len: usize,
    /// max |c_n|, n ≥ 1, after this stage's term is subtracted.
    pub residual_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeelTrace {
    pub stages: Vec<PeelStage>,
    pub terminated_by: PeelTermination,
    /// Error code of the attempted stage that ended an `Exhausted` run.
    pub stopped_on: Option<&'static str>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeelOptions {
    /// Stop once the residual is below this fraction of max|c_n|.
    pub residual_tol: f64,
    pub stage_cap: usize,
    /// Fixed window start; chosen per stage by [`select_window`] when `None`.
    pub window: Option<usize>,
    pub snap_tol: f64,
}

impl Default for PeelOptions {
    fn default() -> Self {
        Self { residual_tol: 1e-8, stage_cap: 8, window: None, snap_tol: 0.05 }
    }
}

/// Factors by which a residual coefficient must exceed its accumulated error
/// bound to be used in a fit, strictest first.
const SIGNIFICANCE: [f64; 3] = [1e8, 1e6, 1e3];
/// Shortest run worth keeping the strict cutoff for: enough for window selection.
const PREFERRED_LEN: usize = MIN_SELECT_POINTS + 2;

fn residual_norm(c: &[Complex64]) -> f64 {
    c.iter().skip(1).map(|v| v.norm()).fold(0.0, f64::max)
}

/// R_n over a run of coefficients already known to stand clear of their
/// error bounds. The global zero guard would cut a decaying residual short.
fn trusted_ratios(c: &[Complex64]) -> RatioSequence {
    RatioSequence {
        start_index: 0,
        r: c.windows(2).map(|w| Slot::Value(w[1] / w[0])).collect(),
        d: c.windows(3).map(|w| Slot::Value(w[2] * w[0] / (w[1] * w[1]))).collect(),
    }
}

struct StageFit {
    fit: DombSykesFit,
    singularity: Singularity,
    magnitude: MagnitudeEstimate,
    /// Relative scatter of the per-order location estimates.
    z_scatter: f64,
}

fn fit_stage(current: &CoefficientSeries, opts: &PeelOptions) -> Result<StageFit> {
    let ratios = trusted_ratios(current.as_slice());
    let start = match opts.window {
        Some(w) => w,
        // Too short to compare halves: fit the whole range.
        None if current.len() < MIN_SELECT_POINTS + 2 => 1,
        None => select_window(&ratios)?,
    };
    let fit = domb_sykes_fit(&ratios, start)?;

    let snapped = snap_order(fit.k_est, opts.snap_tol);
    let (kind, k) = if snapped == 0.0 {
        (SingularityKind::Logarithmic, 0.0)
    } else if (snapped - fit.k_est).abs() <= opts.snap_tol {
        (SingularityKind::Algebraic { order: snapped }, snapped)
    } else {
        (SingularityKind::Algebraic { order: fit.k_est }, fit.k_est)
    };
    // Location from R_n = (n − k)/((n + 1) z) over the upper half of the window.
    let upper = fit.window_start + (fit.window_end - fit.window_start) / 2;
    let z_values: Vec<f64> = ratios
        .defined_r()
        .filter(|&(n, _)| n >= upper && n < fit.window_end)
        .map(|(n, r)| (n as f64 - k) / ((n as f64 + 1.0) * r.re))
        .collect();
    let z = median(&z_values);
    let z_scatter = z_values.iter().map(|v| (v - z).abs()).fold(0.0, f64::max) / z.abs();
    let location = Complex64::new(z, 0.0);
    if location.norm() <= 1.0 {
        return Err(Error::InsideContour { location });
    }
    let magnitude = estimate_kind_magnitude(current, kind, location, current.len())?;
    let singularity = Singularity { kind, location, magnitude: magnitude.magnitude };
    Ok(StageFit { fit, singularity, magnitude, z_scatter })
}

/// Resolve singularities at distinct radii, nearest first: fit, subtract
/// the fitted term's full series, repeat on what is left.
///
/// Each subtraction grows a per-coefficient error bound from rounding and
/// from the scatter of the stage's location and magnitude estimates. Later
/// stages only fit the leading run of coefficients that stand clear of it.
/// Once one stage has been accepted, a stage that cannot be fitted, lands no
/// farther out than its predecessor, or fails to shrink the residual ends the
/// run as `Exhausted` instead of failing it.
pub fn peel(series: &CoefficientSeries, opts: PeelOptions) -> Result<(SingularityModel, PeelTrace)> {
    if !series.is_real(1e-10) {
        return Err(Error::NotReal);
    }
    series.require_len(MIN_SELECT_POINTS + 2)?;
    let n_max = series.len() - 1;
    let scale = residual_norm(series.as_slice());
    let mut residual: Vec<Complex64> = series.as_slice().to_vec();
    let mut err: Vec<f64> = residual.iter().map(|c| f64::EPSILON * c.norm()).collect();
    let mut stages: Vec<PeelStage> = Vec::new();
    let mut stopped_on = None;

    let terminated_by = loop {
        if stages.len() == opts.stage_cap {
            break PeelTermination::StageCap;
        }
        let trusted_at = |factor: f64| {
            1 + residual
                .iter()
                .zip(&err)
                .skip(1)
                .take_while(|(c, e)| c.norm() > factor * **e && c.norm() > 0.0)
                .count()
        };
        // The fit leans on the far end of its window, so prefer a strict
        // cutoff and relax it only when too few coefficients survive.
        let trusted_len = SIGNIFICANCE
            .iter()
            .map(|&f| trusted_at(f))
            .find(|&len| len >= PREFERRED_LEN)
            .unwrap_or_else(|| trusted_at(SIGNIFICANCE[SIGNIFICANCE.len() - 1]));

        let attempt = CoefficientSeries::new(residual[..trusted_len].to_vec()).and_then(|current| {
            let stage = fit_stage(&current, &opts)?;
            let stage_no = stages.len() + 1;
            if stages.last().is_some_and(|s| stage.singularity.location.norm() <= s.singularity.location.norm()) {
                return Err(Error::PeelStalled { stage: stage_no });
            }
            let coeffs = term_coefficients(&stage.singularity, n_max);
            let next: Vec<Complex64> = residual.iter().zip(&coeffs).map(|(r, t)| r - t).collect();
            let norm = residual_norm(&next);
            if norm >= stages.last().map_or(scale, |s| s.residual_norm) {
                return Err(Error::PeelStalled { stage: stage_no });
            }
            Ok((stage, coeffs, next, norm))
        });
        let (stage, coeffs, next, norm) = match attempt {
            Ok(v) => v,
            Err(e) if !stages.is_empty() => {
                stopped_on = Some(e.code());
                break PeelTermination::Exhausted;
            }
            Err(e) => return Err(e),
        };

        let m_scatter = if stage.magnitude.unstable { 0.1 } else { stage.magnitude.spread };
        for (n, t) in coeffs.iter().enumerate() {
            err[n] += t.norm() * (2.0 * f64::EPSILON + m_scatter + n as f64 * stage.z_scatter);
        }
        residual = next;
        stages.push(PeelStage {
            fit: stage.fit,
            singularity: stage.singularity,
            magnitude_spread: stage.magnitude.spread,
            magnitude_unstable: stage.magnitude.unstable,
            trusted_len,
            residual_norm: norm,
        });
        if norm <= opts.residual_tol * scale {
            break if stages.len() > 1 && stage.fit.straight {
                PeelTermination::StraightLineFinal
            } else {
                PeelTermination::ResidualBelowTolerance
            };
        }
    };

    let terms = stages.iter().map(|s| s.singularity).collect();
    let offset = residual[0];
    Ok((SingularityModel::new(terms, offset), PeelTrace { stages, terminated_by, stopped_on }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{compute_ratios, synthesize_series};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// Ratios of two log terms at 1.1 and 1.1/λ with magnitudes 1 and 2.
    fn two_log_ratios(lambda: f64, n_max: usize) -> RatioSequence {
        let model = SingularityModel::new(
            vec![Singularity::logarithmic(c(1.1), c(1.0)), Singularity::logarithmic(c(1.1 / lambda), c(2.0))],
            c(0.0),
        );
        compute_ratios(&synthesize_series(&model, n_max).unwrap()).unwrap()
    }

    #[test]
    fn single_pole_fit_is_flat() {
        let s = synthesize_series(&SingularityModel::single(Singularity::algebraic(-1.0, c(2.0), c(2.0))), 40).unwrap();
        let fit = domb_sykes_fit(&compute_ratios(&s).unwrap(), 1).unwrap();
        assert!((fit.p0 - 0.5).abs() < 1e-14);
        assert!(fit.slope0.abs() < 1e-12);
        assert!((fit.k_est + 1.0).abs() < 1e-12);
        assert!((fit.z_est - 2.0).abs() < 1e-12);
        assert!(fit.fit_residual < 1e-12);
        assert!(fit.straight);
        assert_eq!(select_window(&compute_ratios(&s).unwrap()).unwrap(), 1);
    }

    #[test]
    fn two_log_intercept() {
        for lambda in [0.125, 0.4, 0.8] {
            let fit = domb_sykes_fit(&two_log_ratios(lambda, 101), 20).unwrap();
            assert!((fit.intercept - 0.9091).abs() < 5e-4, "{lambda}: {fit:?}");
            assert!(fit.k_est.abs() < 0.02, "{lambda}: {fit:?}");
            assert!((fit.z_est - 1.1).abs() < 1e-3);
        }
    }

    #[test]
    fn window_selection() {
        let w04 = select_window(&two_log_ratios(0.4, 101)).unwrap();
        assert!((12..=30).contains(&w04), "{w04}");
        let w0125 = select_window(&two_log_ratios(0.125, 101)).unwrap();
        let w08 = select_window(&two_log_ratios(0.8, 101)).unwrap();
        assert!(w08 > w0125, "{w0125} {w08}");
    }

    #[test]
    fn fractional_order_round_trip() {
        let term = Singularity::algebraic(0.5, c(1.3), c(1.0));
        let s = synthesize_series(&SingularityModel::single(term), 100).unwrap();
        let fit = domb_sykes_fit(&compute_ratios(&s).unwrap(), 10).unwrap();
        assert!((fit.k_est - 0.5).abs() < 1e-3);
        assert!((fit.z_est - 1.3).abs() < 1e-3);
    }

    #[test]
    fn alternating_ratios_rejected() {
        let s = CoefficientSeries::from_real(&(0..30).map(|n| if n % 3 == 0 { 1.0 } else { -0.5 }).collect::<Vec<_>>()).unwrap();
        assert!(matches!(domb_sykes_fit(&compute_ratios(&s).unwrap(), 1), Err(Error::OscillatingRatios)));
    }

    #[test]
    fn short_window_rejected() {
        let s = CoefficientSeries::from_real(&[1.0, 0.5, 0.25, 0.125, 0.0625]).unwrap();
        assert!(matches!(domb_sykes_fit(&compute_ratios(&s).unwrap(), 1), Err(Error::InsufficientWindow { .. })));
    }

    #[test]
    fn exact_pole_magnitude() {
        let s = synthesize_series(&SingularityModel::single(Singularity::algebraic(-1.0, c(2.0), c(2.0))), 40).unwrap();
        let m = estimate_magnitude(&s, -1.0, c(2.0)).unwrap();
        assert!((m.magnitude - c(2.0)).norm() < 1e-10);
        assert!(!m.unstable);
    }

    #[test]
    fn single_term_peels_in_one_stage() {
        let s = synthesize_series(&SingularityModel::single(Singularity::algebraic(-1.0, c(1.7), c(0.8))), 60).unwrap();
        let (model, trace) = peel(&s, PeelOptions::default()).unwrap();
        assert_eq!(trace.stages.len(), 1);
        assert_eq!(trace.terminated_by, PeelTermination::ResidualBelowTolerance);
        assert!((model.terms()[0].location - c(1.7)).norm() < 1e-10);
    }

    #[test]
    fn two_logs_peel() {
        let model = SingularityModel::new(
            vec![Singularity::logarithmic(c(1.1), c(1.0)), Singularity::logarithmic(c(2.75), c(2.0))],
            c(0.0),
        );
        let s = synthesize_series(&model, 100).unwrap();
        let (found, trace) = peel(&s, PeelOptions::default()).unwrap();
        assert_eq!(trace.stages.len(), 2, "{trace:?}");
        assert!((trace.stages[1].fit.intercept - 0.36364).abs() < 5e-4);
        assert!((found.terms()[0].magnitude - c(1.0)).norm() < 2e-2);
        assert!((found.terms()[1].magnitude - c(2.0)).norm() < 2e-2);
        assert!(found.terms().iter().all(Singularity::is_logarithmic));
    }

    #[test]
    fn three_logs_peel_in_order() {
        let truth = [(1.2, 1.0), (1.8, 2.0), (2.9, 1.0)];
        let model = SingularityModel::new(
            truth.iter().map(|&(z, m)| Singularity::logarithmic(c(z), c(m))).collect(),
            c(0.0),
        );
        let s = synthesize_series(&model, 200).unwrap();
        let (found, trace) = peel(&s, PeelOptions::default()).unwrap();
        assert_eq!(found.terms().len(), 3, "{trace:#?}");
        for (t, &(z, m)) in found.terms().iter().zip(&truth) {
            assert!((t.location.re - z).abs() < 5e-3, "{t:?}");
            assert!((t.magnitude.re - m).abs() < 2e-2, "{t:?}");
        }
    }
}
