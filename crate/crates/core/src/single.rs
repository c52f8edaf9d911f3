//! Single-singularity recovery from coefficient ratios.
//!
//! For one term `M (z_1 − z)^k` the ratios obey R_n = (n − k)/((n + 1) z_1),
//! so D_n = R_{n+1}/R_n isolates k and R_n then gives z_1.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{complex_median, median, spread};
use crate::series::{complex_pow, compute_ratios, CoefficientSeries, RatioSequence, Singularity, SingularityKind};

pub use crate::series::regenerate_residual;

/// Guard on |n + 1 − (n + 2) D_n|.
pub const DENOMINATOR_GUARD: f64 = 1e-12;

#[derive(Clone, Copy, Debug)]
pub struct SingleOptions {
    /// Relative spread below which the per-order estimates count as consistent.
    pub consistency_tol: f64,
    /// Snapping tolerance; `None` disables snapping.
    pub snap_tol: Option<f64>,
}

impl Default for SingleOptions {
    fn default() -> Self {
        Self { consistency_tol: 2e-2, snap_tol: Some(0.05) }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SingleSolveDiagnostics {
    pub k_of_n: Vec<(usize, Complex64)>,
    pub z1_of_n: Vec<(usize, Complex64)>,
    pub spread_k: f64,
    pub spread_z: f64,
    pub consistent: bool,
    pub raw: Singularity,
    pub snapped: Option<Singularity>,
    /// Resynthesis residual of the reported estimate (snapped when available).
    pub resynthesis_residual: f64,
}

/// k(n) and z_1(n) at one order, or `None` when a ratio is missing or the
/// denominator is below the guard.
pub fn order_estimate(ratios: &RatioSequence, n: usize) -> Option<(Complex64, Complex64)> {
    let (d, r) = (ratios.d(n)?, ratios.r(n)?);
    let nf = n as f64;
    let den = (nf + 1.0) - (nf + 2.0) * d;
    if den.norm() < DENOMINATOR_GUARD {
        return None;
    }
    let k = nf + (nf + 1.0) / den;
    let z = (nf - k) / ((nf + 1.0) * r);
    Some((k, z))
}

/// z_1(n) for a given order k.
fn location_at(ratios: &RatioSequence, n: usize, k: f64) -> Option<Complex64> {
    let r = ratios.r(n)?;
    let nf = n as f64;
    Some((nf - k) / ((nf + 1.0) * r))
}

fn magnitude_from_c0(c0: Complex64, k: f64, z: Complex64) -> Complex64 {
    if k == 0.0 {
        c0 / z.ln()
    } else {
        c0 * complex_pow(z, -k)
    }
}

fn singularity(k: f64, z: Complex64, m: Complex64) -> Singularity {
    if k == 0.0 {
        Singularity::logarithmic(z, m)
    } else {
        Singularity::algebraic(k, z, m)
    }
}

pub fn solve_single(series: &CoefficientSeries, opts: SingleOptions) -> Result<(Singularity, SingleSolveDiagnostics)> {
    series.require_len(5)?;
    let ratios = compute_ratios(series)?;
    let mut k_of_n = Vec::new();
    let mut z1_of_n = Vec::new();
    for n in 1..series.len() - 2 {
        if let Some((k, z)) = order_estimate(&ratios, n) {
            k_of_n.push((n, k));
            z1_of_n.push((n, z));
        }
    }
    if k_of_n.is_empty() {
        return Err(Error::IllConditioned);
    }
    let ks: Vec<Complex64> = k_of_n.iter().map(|p| p.1).collect();
    let zs: Vec<Complex64> = z1_of_n.iter().map(|p| p.1).collect();
    let k_raw = median(&ks.iter().map(|k| k.re).collect::<Vec<_>>());
    let z_raw = complex_median(&zs);
    if z_raw.norm() <= 1.0 {
        return Err(Error::InsideContour { location: z_raw });
    }
    let c0 = series.as_slice()[0];
    let raw = Singularity::algebraic(k_raw, z_raw, c0 * complex_pow(z_raw, -k_raw));
    let spread_k = spread(&ks);
    let spread_z = spread(&zs);
    let consistent = spread_k < opts.consistency_tol && spread_z < opts.consistency_tol * z_raw.norm();

    let snapped = opts.snap_tol.map(|tol| {
        let k = snap_order(k_raw, tol);
        // Re-derive the location at the snapped order before rounding it.
        let z = if k == k_raw {
            z_raw
        } else {
            let at_k: Vec<Complex64> = k_of_n.iter().filter_map(|&(n, _)| location_at(&ratios, n, k)).collect();
            complex_median(&at_k)
        };
        let z = snap_location(z, tol);
        singularity(k, z, magnitude_from_c0(c0, k, z))
    });

    let reported = snapped.unwrap_or(raw);
    let model = crate::series::SingularityModel::single(reported);
    let resynthesis_residual = regenerate_residual(&model, series).unwrap_or(f64::INFINITY);
    let diagnostics = SingleSolveDiagnostics {
        k_of_n,
        z1_of_n,
        spread_k,
        spread_z,
        consistent,
        raw,
        snapped,
        resynthesis_residual,
    };
    Ok((reported, diagnostics))
}

/// Nearest p/q with q ≤ 4, accepted when within `tol / q`.
///
/// Finer fractions need a closer match, so e.g. −0.72 does not snap to −3/4
/// at tol = 0.05.
pub fn snap_order(k: f64, tol: f64) -> f64 {
    let mut best: Option<(f64, f64)> = None;
    for q in 1..=4 {
        let qf = q as f64;
        let cand = (k * qf).round() / qf;
        let dist = (k - cand).abs();
        if dist <= tol / qf && best.is_none_or(|(_, d)| dist < d) {
            best = Some((cand, dist));
        }
    }
    match best {
        // Adding +0 turns a −0 candidate into 0.
        Some((cand, _)) => cand + 0.0,
        None => k,
    }
}

/// Round each component to three decimals when that moves it by at most `tol`.
pub fn snap_location(z: Complex64, tol: f64) -> Complex64 {
    let snap = |x: f64| {
        let r = (x * 1000.0).round() / 1000.0;
        if (x - r).abs() <= tol {
            r + 0.0
        } else {
            x
        }
    };
    Complex64::new(snap(z.re), snap(z.im))
}

/// Snap order and location; an order snapped to 0 becomes logarithmic.
/// The magnitude is carried over unchanged.
pub fn snap_parameters(raw: Singularity, tol: f64) -> Singularity {
    let location = snap_location(raw.location, tol);
    match raw.kind {
        SingularityKind::Logarithmic => Singularity { location, ..raw },
        SingularityKind::Algebraic { order } => singularity(snap_order(order, tol), location, raw.magnitude),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OrderSensitivity {
    pub n: usize,
    pub k_bound: f64,
    pub z_bound: f64,
}

/// First-order bounds on the change of k(n) and z_1(n) when each of
/// c_n, c_{n+1}, c_{n+2} moves by up to `eps` in modulus.
pub fn sensitivity(series: &CoefficientSeries, eps: f64) -> Result<Vec<OrderSensitivity>> {
    series.require_len(5)?;
    let base = compute_ratios(series)?;
    let orders: Vec<usize> = (1..series.len() - 2).filter(|&n| order_estimate(&base, n).is_some()).collect();
    if orders.is_empty() {
        return Err(Error::IllConditioned);
    }
    let c = series.as_slice();
    let estimate_with = |n: usize, j: usize, delta: Complex64| -> Option<(Complex64, Complex64)> {
        let mut window = vec![Complex64::new(0.0, 0.0); n + 3];
        window[..n + 3].copy_from_slice(&c[..n + 3]);
        window[j] += delta;
        let s = CoefficientSeries::new(window).ok()?;
        order_estimate(&compute_ratios(&s).ok()?, n)
    };
    let mut out = Vec::with_capacity(orders.len());
    for n in orders {
        let (mut kb, mut zb) = (0.0, 0.0);
        if eps > 0.0 {
            let h = 1e-6 * c[n..n + 3].iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
            for j in n..n + 3 {
                // k(n) and z_1(n) are rational in the coefficients, so the
                // real-direction difference gives the complex derivative.
                let delta = Complex64::new(h, 0.0);
                let (Some(p), Some(m)) = (estimate_with(n, j, delta), estimate_with(n, j, -delta)) else {
                    return Err(Error::IllConditioned);
                };
                kb += eps * (p.0 - m.0).norm() / (2.0 * h);
                zb += eps * (p.1 - m.1).norm() / (2.0 * h);
            }
        }
        out.push(OrderSensitivity { n, k_bound: kb, z_bound: zb });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{synthesize_series, SingularityModel};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const PERTURBED_POLE: [f64; 6] = [2.0, 1.999895, 1.333415, 0.889123, 0.592593, 0.395062];

    /// k(n), z_1(n) written out directly from the coefficients.
    fn oracle(c: &[f64], n: usize) -> (f64, f64) {
        let nf = n as f64;
        let d = c[n + 2] * c[n] / (c[n + 1] * c[n + 1]);
        let k = nf + (nf + 1.0) / (nf + 1.0 - (nf + 2.0) * d);
        (k, (nf - k) * c[n] / ((nf + 1.0) * c[n + 1]))
    }

    #[test]
    fn perturbed_pole_orders_match_direct_arithmetic() {
        let s = CoefficientSeries::from_real(&PERTURBED_POLE).unwrap();
        let (_, diag) = solve_single(&s, SingleOptions::default()).unwrap();
        assert_eq!(diag.k_of_n.len(), 3);
        for (n, k) in &diag.k_of_n {
            let (ko, _) = oracle(&PERTURBED_POLE, *n);
            assert!((k.re - ko).abs() < 1e-13);
        }
        assert!((diag.k_of_n[0].1.re + 0.9994700608641982).abs() < 1e-12);
    }

    #[test]
    fn perturbed_pole_snaps_to_simple_pole() {
        let s = CoefficientSeries::from_real(&PERTURBED_POLE).unwrap();
        let (sing, diag) = solve_single(&s, SingleOptions::default()).unwrap();
        assert_eq!(sing.kind, SingularityKind::Algebraic { order: -1.0 });
        assert_eq!(sing.location, c(1.5, 0.0));
        assert_eq!(sing.magnitude, c(3.0, 0.0));
        assert!(diag.consistent);
    }

    #[test]
    fn geometric_series_is_exact() {
        let s = CoefficientSeries::from_real(&(0..7).map(|n| 0.5f64.powi(n)).collect::<Vec<_>>()).unwrap();
        let (_, diag) = solve_single(&s, SingleOptions { snap_tol: None, ..Default::default() }).unwrap();
        assert!((diag.raw.order() + 1.0).abs() < 1e-14);
        assert!((diag.raw.location - c(2.0, 0.0)).norm() < 1e-14);
        assert!((diag.raw.magnitude - c(2.0, 0.0)).norm() < 1e-14);
        assert!(diag.spread_k < 1e-14 && diag.spread_z < 1e-14);
    }

    #[test]
    fn complex_branch_point_round_trip() {
        let truth = Singularity::algebraic(0.5, c(1.2, 0.5), c(3.0, -1.0));
        let s = synthesize_series(&SingularityModel::single(truth), 12).unwrap();
        let (_, diag) = solve_single(&s, SingleOptions { snap_tol: None, ..Default::default() }).unwrap();
        assert!((diag.raw.order() - 0.5).abs() < 1e-8 * 0.5);
        assert!((diag.raw.location - truth.location).norm() < 1e-8 * truth.location.norm());
        assert!((diag.raw.magnitude - truth.magnitude).norm() < 1e-8 * truth.magnitude.norm());
    }

    #[test]
    fn interior_location_is_rejected() {
        let s = CoefficientSeries::from_real(&(0..7).map(|n| 2f64.powi(n)).collect::<Vec<_>>()).unwrap();
        assert!(matches!(solve_single(&s, SingleOptions::default()), Err(Error::InsideContour { .. })));
    }

    #[test]
    fn snapping_examples() {
        assert_eq!(snap_order(-0.999823, 0.05), -1.0);
        assert_eq!(snap_order(-0.72, 0.05), -0.72);
        assert_eq!(snap_order(-0.72, 0.2), -0.75);
        assert_eq!(snap_order(-1.0, 1e-9), -1.0);
        assert_eq!(snap_order(0.49, 0.05), 0.5);
        assert_eq!(snap_order(-0.01, 0.05).to_bits(), 0.0f64.to_bits());
        let s = snap_parameters(Singularity::algebraic(0.003, c(1.1004, 0.0), c(1.0, 0.0)), 0.05);
        assert!(s.is_logarithmic());
        assert_eq!(s.location, c(1.1, 0.0));
    }

    #[test]
    fn sensitivity_examples() {
        let s = CoefficientSeries::from_real(&PERTURBED_POLE).unwrap();
        let b = sensitivity(&s, 2.35e-4).unwrap();
        assert!(b[0].k_bound > 1e-4 && b[0].k_bound < 1e-2, "{:?}", b[0]);
        assert!(b[0].k_bound > (-0.999823f64 + 1.0).abs());
        assert!(sensitivity(&s, 0.0).unwrap().iter().all(|o| o.k_bound == 0.0 && o.z_bound == 0.0));

        // Geometric series at n = 1: |∂k/∂c_1| + |∂k/∂c_2| + |∂k/∂c_3| = 12 + 48 + 48.
        let g = CoefficientSeries::from_real(&(0..7).map(|n| 0.5f64.powi(n)).collect::<Vec<_>>()).unwrap();
        let b = sensitivity(&g, 1e-6).unwrap();
        assert!((b[0].k_bound - 108e-6).abs() < 1e-9, "{:?}", b[0]);
        let half = sensitivity(&g, 0.5e-6).unwrap();
        assert!((half[0].k_bound - 0.5 * b[0].k_bound).abs() < 1e-12);
    }

    #[test]
    fn residual_examples() {
        let s = CoefficientSeries::from_real(&PERTURBED_POLE).unwrap();
        let model = SingularityModel::single(Singularity::algebraic(-1.0, c(1.5, 0.0), c(3.0, 0.0)));
        let r = regenerate_residual(&model, &s).unwrap();
        assert!((r - (1.999895 - 4.0 / 3.0) / 2.0).abs() < 1e-12);
        // Listed c_{n+1} tracks the pole's c_n: the data runs one index late.
        let pole = crate::series::synthesize_series(&model, 5).unwrap();
        for n in 1..5 {
            assert!((PERTURBED_POLE[n + 1] - pole.as_slice()[n].re).abs() < 1e-3);
        }
    }

    #[test]
    fn residual_grows_with_location_error() {
        let truth = SingularityModel::single(Singularity::algebraic(-1.0, c(1.5, 0.0), c(3.0, 0.0)));
        let s = synthesize_series(&truth, 20).unwrap();
        assert!(regenerate_residual(&truth, &s).unwrap() < 1e-14);
        let mut last = 0.0;
        for step in 1..=10 {
            let dz = 0.01 * step as f64;
            let m = SingularityModel::single(Singularity::algebraic(-1.0, c(1.5 + dz, 0.0), c(3.0, 0.0)));
            let r = regenerate_residual(&m, &s).unwrap();
            assert!(r > last);
            last = r;
        }
    }
}
