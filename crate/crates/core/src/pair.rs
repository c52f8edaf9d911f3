//! Two-singularity recovery: equal orders by elimination to a cubic in k,
//! independent orders by damped Newton on the ratio relations.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{cubic_through, damped_newton, poly_roots, NewtonOptions};
use crate::series::{
    compute_ratios, fit_magnitudes, regenerate_residual, synthesize_series, CoefficientSeries, RatioSequence, Singularity,
    SingularityKind, SingularityModel,
};
use crate::single::{solve_single, SingleOptions};

/// Orders closer to zero than this are treated as logarithmic.
const LOG_ORDER_TOL: f64 = 1e-7;
/// Relative distance from the real axis below which a location is put on it.
const AXIS_SNAP: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PairRoute {
    EqualOrder,
    General,
}

/// G_n on both branches at one order.
///
/// `mismatch` compares (n − 1 − k_1) G_n(k_1, z_1) with (n − 1 − k_2) G_n(k_2, z_2),
/// which agree for any two-term data; for equal orders it reduces to the
/// relative difference of the G values themselves.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GConsistency {
    pub n: usize,
    pub g1: Complex64,
    pub g2: Complex64,
    pub difference: f64,
    pub mismatch: f64,
    pub verification: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairSolveResult {
    /// Ordered by |location|.
    pub singularities: [Singularity; 2],
    pub constant_offset: Complex64,
    pub route: PairRoute,
    pub g_consistency: Vec<GConsistency>,
    pub resynthesis_residual: f64,
    /// Real roots of the order cubic at the base order (equal-order route only).
    pub real_roots: Vec<f64>,
    /// How many candidates passed verification before the best was picked.
    pub accepted_candidates: usize,
}

impl PairSolveResult {
    pub fn model(&self) -> SingularityModel {
        SingularityModel::new(self.singularities.to_vec(), self.constant_offset)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PairOptions {
    /// Relative tolerance for G-equality at the verification orders.
    pub g_tol: f64,
    pub start_budget: usize,
    pub newton: NewtonOptions,
}

impl Default for PairOptions {
    fn default() -> Self {
        Self { g_tol: 1e-6, start_budget: 32, newton: NewtonOptions::default() }
    }
}

/// c̃_{n+1} = ((k − n)/((n + 1) z_2)) c_n + c_{n+1}; element j holds c̃_{j+1}.
pub fn tilde_coefficients(series: &CoefficientSeries, k: f64, z2: Complex64) -> Result<Vec<Complex64>> {
    series.require_len(3)?;
    let c = series.as_slice();
    Ok((0..c.len() - 1)
        .map(|n| {
            let nf = n as f64;
            (k - nf) / ((nf + 1.0) * z2) * c[n] + c[n + 1]
        })
        .collect())
}

/// G_n(k, z) = ((n+1) R_n z − (n − k)) / (z ((n − 1 − k)/(n R_{n−1}) − z)).
pub fn g_function(k: f64, z: Complex64, ratios: &RatioSequence, n: usize) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::MissingRatio { index: 0 });
    }
    let (r_prev, r) = (ratios.require_r(n - 1)?, ratios.require_r(n)?);
    let nf = n as f64;
    let num = (nf + 1.0) * r * z - (nf - k);
    let den = z * ((nf - 1.0 - k) / (nf * r_prev) - z);
    if den.norm() <= 1e-14 * (1.0 + num.norm()) {
        return Err(Error::IllConditioned);
    }
    Ok(num / den)
}

/// Smallest share min_j |t_{j,m}| / |c_m| over m = n − 1 ..= n + 1, per order n.
fn term_shares(series: &CoefficientSeries, pair: &[Singularity; 2]) -> Option<Vec<f64>> {
    let len = series.len();
    let parts: Vec<CoefficientSeries> = pair
        .iter()
        .map(|s| synthesize_series(&SingularityModel::single(*s), len - 1))
        .collect::<Result<_>>()
        .ok()?;
    let c = series.as_slice();
    let share = |m: usize| {
        parts.iter().map(|p| p.as_slice()[m].norm() / c[m].norm()).fold(f64::INFINITY, f64::min)
    };
    Some((0..len).map(|n| if n == 0 || n + 1 >= len { 0.0 } else { share(n - 1).min(share(n)).min(share(n + 1)) }).collect())
}

/// G_n compares ratios that carry both terms, so it is only checked where the
/// weaker term still stands this far above rounding.
const RESOLVABLE_SHARE: f64 = 1e-5;

fn g_table(ratios: &RatioSequence, pair: &[Singularity; 2], verify_from: usize, shares: &[f64]) -> Vec<GConsistency> {
    let mut out = Vec::new();
    for n in 1..ratios.r_end() {
        let (k1, k2) = (pair[0].order(), pair[1].order());
        let (Ok(g1), Ok(g2)) = (
            g_function(k1, pair[0].location, ratios, n),
            g_function(k2, pair[1].location, ratios, n),
        ) else {
            continue;
        };
        let nf = n as f64;
        let (w1, w2) = (g1 * (nf - 1.0 - k1), g2 * (nf - 1.0 - k2));
        let scale = w1.norm().max(w2.norm());
        let mismatch = if scale > 0.0 { (w1 - w2).norm() / scale } else { 0.0 };
        let verification = n >= verify_from && shares.get(n).is_some_and(|&s| s >= RESOLVABLE_SHARE);
        out.push(GConsistency { n, g1, g2, difference: (g1 - g2).norm(), mismatch, verification });
    }
    out
}

fn kind_for(k: f64) -> SingularityKind {
    if k.abs() < LOG_ORDER_TOL {
        SingularityKind::Logarithmic
    } else {
        SingularityKind::Algebraic { order: k }
    }
}

/// Fit magnitudes for ordered (k, z) pairs and verify; `None` when the
/// verification orders are missing or G-equality fails.
fn finish(
    series: &CoefficientSeries,
    ratios: &RatioSequence,
    params: [(f64, Complex64); 2],
    route: PairRoute,
    verify_from: usize,
    g_tol: f64,
) -> Option<PairSolveResult> {
    // A location within rounding of the real axis is put on it, so that the
    // principal branch of z^k is taken from the upper side of the cut.
    let mut params = params.map(|(k, z)| {
        if z.im.abs() <= AXIS_SNAP * z.norm() {
            (k, Complex64::new(z.re, 0.0))
        } else {
            (k, z)
        }
    });
    if params[0].1.norm() > params[1].1.norm() {
        params.swap(0, 1);
    }
    if params.iter().any(|p| p.1.norm() <= 1.0 || p.1.norm().is_nan() || !p.0.is_finite()) {
        return None;
    }
    let shapes = params.map(|(k, z)| (kind_for(k), z));
    let any_log = shapes.iter().any(|s| matches!(s.0, SingularityKind::Logarithmic));
    let orders: &[usize] = if any_log { &[1, 2] } else { &[0, 1] };
    let model = fit_magnitudes(series, &shapes, orders).ok()?;
    let terms = model.terms();
    // fit_magnitudes re-sorts; keep the |z| order established above.
    let singularities = if terms[0].location == shapes[0].1 { [terms[0], terms[1]] } else { [terms[1], terms[0]] };
    let shares = term_shares(series, &singularities)?;
    let g_consistency = g_table(ratios, &singularities, verify_from, &shares);
    let checks: Vec<&GConsistency> = g_consistency.iter().filter(|g| g.verification).collect();
    if checks.is_empty() || checks.iter().any(|g| g.mismatch > g_tol || g.mismatch.is_nan()) {
        return None;
    }
    let resynthesis_residual = regenerate_residual(&model, series).ok()?;
    Some(PairSolveResult {
        singularities,
        constant_offset: model.constant_offset,
        route,
        g_consistency,
        resynthesis_residual,
        real_roots: Vec::new(),
        accepted_candidates: 1,
    })
}

fn pick_best(mut found: Vec<PairSolveResult>) -> Option<PairSolveResult> {
    found.sort_by(|a, b| {
        a.resynthesis_residual.total_cmp(&b.resynthesis_residual).then_with(|| {
            let key = |r: &PairSolveResult| {
                [r.singularities[0].order(), r.singularities[1].order(), r.singularities[0].location.re, r.singularities[1].location.re]
            };
            key(a).partial_cmp(&key(b)).unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    found.into_iter().next()
}

/// Numerator and denominator of z_1 z_2 = A(n, k) from the ratio relation
/// (n+1) R_n z_1 z_2 − (n − k)(z_1 + z_2) + (n − k)(n − k − 1)/(n R_{n−1}) = 0
/// taken at n and n + 1.
fn product_parts(r: &[Complex64], n: usize, k: f64) -> (Complex64, Complex64) {
    // r[i] = R_{n-1+i}
    let nf = n as f64;
    let num = (nf - k) / ((nf + 1.0) * r[1]) - (nf - k - 1.0) / (nf * r[0]);
    let den = (nf + 1.0) * r[1] / (nf - k) - (nf + 2.0) * r[2] / (nf + 1.0 - k);
    (num, den)
}

/// The order equation A(n, k) = A(n + 1, k) with denominators cleared; a cubic in k.
fn cleared_order_equation(r: &[Complex64], n: usize, k: f64) -> Complex64 {
    let nf = n as f64;
    let num = |m: usize, k: f64| {
        let mf = m as f64;
        (mf - k) / ((mf + 1.0) * r[m + 1 - n]) - (mf - k - 1.0) / (mf * r[m - n])
    };
    let den_cleared = |m: usize, k: f64| {
        let mf = m as f64;
        (mf + 1.0) * (mf + 1.0 - k) * r[m + 1 - n] - (mf + 2.0) * (mf - k) * r[m + 2 - n]
    };
    num(n, k) * (nf - k) * den_cleared(n + 1, k) - num(n + 1, k) * (nf + 2.0 - k) * den_cleared(n, k)
}

/// Cubic coefficients (ascending in k) of the cleared order equation at base order `n`.
pub fn equal_order_cubic(ratios: &RatioSequence, n: usize) -> Result<[Complex64; 4]> {
    if n == 0 {
        return Err(Error::MissingRatio { index: 0 });
    }
    let r: Vec<Complex64> = (n - 1..=n + 2).map(|i| ratios.require_r(i)).collect::<Result<_>>()?;
    let xs = [-1.5, -0.5, 0.5, 1.5];
    Ok(cubic_through(xs, xs.map(|k| cleared_order_equation(&r, n, k))))
}

#[derive(Debug)]
struct EqualOrderCandidate {
    k: f64,
    z: Option<[Complex64; 2]>,
}

fn equal_order_candidates(ratios: &RatioSequence, n: usize) -> Result<Vec<EqualOrderCandidate>> {
    let cubic = equal_order_cubic(ratios, n)?;
    let r: Vec<Complex64> = (n - 1..=n + 1).map(|i| ratios.require_r(i)).collect::<Result<_>>()?;
    let nf = n as f64;
    let real_ratios = r.iter().all(|v| v.im == 0.0);
    let mut out = Vec::new();
    for root in poly_roots(&cubic) {
        if root.im.abs() > 1e-6 * root.re.abs().max(1.0) {
            continue;
        }
        let k = root.re;
        let (pn, pd) = product_parts(&r, n, k);
        let mut product = pn / pd;
        let mut sum = ((nf + 1.0) * r[1] * product + (nf - k) * (nf - k - 1.0) / (nf * r[0])) / (nf - k);
        if real_ratios {
            // Real data: the locations are real or a conjugate pair.
            product.im = 0.0;
            sum.im = 0.0;
        }
        let b = sum / 2.0;
        let disc = b * b - product;
        let z = if disc.norm() <= 1e-12 * b.norm_sqr() || !disc.re.is_finite() {
            None
        } else {
            let s = disc.sqrt();
            Some([b - s, b + s])
        };
        out.push(EqualOrderCandidate { k, z });
    }
    Ok(out)
}

/// Two singularities sharing one order k.
pub fn solve_equal_order(series: &CoefficientSeries, opts: PairOptions) -> Result<PairSolveResult> {
    series.require_len(6)?;
    let ratios = compute_ratios(series)?;
    let mut degenerate = false;
    let mut last_err = None;
    // Base order 2 skips R_0, which a logarithmic pair's constant term spoils.
    for n0 in [1, 2] {
        let candidates = match equal_order_candidates(&ratios, n0) {
            Ok(c) => c,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        let real_roots: Vec<f64> = candidates.iter().map(|c| c.k).collect();
        let mut found = Vec::new();
        for cand in candidates {
            match cand.z {
                None => degenerate = true,
                Some([z1, z2]) => {
                    let params = [(cand.k, z1), (cand.k, z2)];
                    if let Some(res) = finish(series, &ratios, params, PairRoute::EqualOrder, n0 + 3, opts.g_tol) {
                        found.push(res);
                    }
                }
            }
        }
        let accepted = found.len();
        if let Some(mut best) = pick_best(found) {
            best.real_roots = real_roots;
            best.accepted_candidates = accepted;
            return Ok(best);
        }
    }
    if degenerate {
        return Err(Error::DegenerateDiscriminant);
    }
    match last_err {
        Some(Error::MissingRatio { .. }) if ratios.r_end() < 5 => Err(last_err.unwrap()),
        _ => Err(Error::NoRealRoot),
    }
}

/// Residual of the general two-order relation at order n for x = (k_1, k_2, z_1, z_2).
fn general_relation(x: &[Complex64], r_prev: Complex64, r: Complex64, n: usize) -> Complex64 {
    let (k1, k2, z1, z2) = (x[0], x[1], x[2], x[3]);
    let nf = n as f64;
    let lhs = (z1 - z2) / ((k2 - nf + 1.0) * z1 - (k1 - nf + 1.0) * z2);
    let inner = ((k2 - nf) + (nf + 1.0) * r * z2) / (nf * z2 - (nf - k2 - 1.0) / r_prev);
    lhs - (1.0 + nf * z1 / (k1 - nf + 1.0) * inner)
}

fn finite(v: &[Complex64]) -> bool {
    v.iter().all(|c| c.re.is_finite() && c.im.is_finite())
}

/// Starting points from a three-term recurrence fitted to the data.
///
/// Two-term data satisfies Σ_{j=0..2} p_j(n) c_{n+j} = 0 with cubic p_j:
/// the roots of p_0 contain k_1 and k_2, and the leading coefficients give
/// z_1 z_2 and z_1 + z_2.
fn recurrence_starts(series: &CoefficientSeries) -> Vec<[Complex64; 4]> {
    let c = series.as_slice();
    let rows = c.len().saturating_sub(2);
    if rows < 12 {
        return Vec::new();
    }
    let scale_n = c.len() as f64;
    let mut a = DMatrix::<Complex64>::zeros(rows, 12);
    for n in 0..rows {
        let m = (n as f64 + 1.0) / scale_n;
        for j in 0..3 {
            for d in 0..4 {
                a[(n, 4 * j + d)] = c[n + j] * m.powi(d as i32);
            }
        }
        let norm = a.row(n).norm();
        if norm > 0.0 {
            a.row_mut(n).scale_mut(1.0 / norm);
        }
    }
    let svd = a.svd(false, true);
    let Some(v_t) = svd.v_t else { return Vec::new() };
    let idx = svd.singular_values.imin();
    let v: Vec<Complex64> = v_t.row(idx).iter().map(|x| x.conj()).collect();
    // Polynomials in m = n + 1, ascending.
    let poly = |j: usize| -> Vec<Complex64> { (0..4).map(|d| v[4 * j + d] / scale_n.powi(d as i32)).collect() };
    let (p0, p1, p2) = (poly(0), poly(1), poly(2));
    if p0[3].norm() == 0.0 {
        return Vec::new();
    }
    let product = p2[3] / p0[3];
    let sum = -p1[3] / p0[3];
    let disc = (sum * sum - 4.0 * product).sqrt();
    let zs = [(sum - disc) / 2.0, (sum + disc) / 2.0];
    let roots0: Vec<Complex64> = poly_roots(&p0).into_iter().map(|m| m - 1.0).collect();
    let roots2: Vec<Complex64> = poly_roots(&p2).into_iter().map(|m| m - 1.0).collect();
    if roots0.len() != 3 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for rho in roots2 {
        let target = rho - 1.0;
        let drop = (0..3)
            .min_by(|&a, &b| (roots0[a] - target).norm().total_cmp(&(roots0[b] - target).norm()))
            .unwrap_or(0);
        let ks: Vec<Complex64> = (0..3).filter(|&i| i != drop).map(|i| roots0[i]).collect();
        for (ka, kb) in [(ks[0], ks[1]), (ks[1], ks[0])] {
            let x = [ka, kb, zs[0], zs[1]];
            if finite(&x) && !out.iter().any(|y: &[Complex64; 4]| (0..4).all(|i| (y[i] - x[i]).norm() < 1e-9)) {
                out.push(x);
            }
        }
    }
    out
}

fn perturbation_starts(series: &CoefficientSeries) -> Vec<[Complex64; 4]> {
    let (k, z) = match solve_single(series, SingleOptions { snap_tol: None, ..Default::default() }) {
        Ok((s, _)) => (s.order(), s.location),
        Err(_) => {
            let c = series.as_slice();
            let n = c.len() - 2;
            (-1.0, c[n] / c[n + 1])
        }
    };
    let mut out = Vec::new();
    for factor in [1.6, 2.5, 1.25, 4.0] {
        for (dk1, dk2) in [(0.0, 0.0), (0.5, -0.5), (-0.5, 0.5), (0.0, -1.0), (0.0, 1.0), (-1.0, 0.0), (1.0, 0.0), (0.3, 0.7)] {
            out.push([
                Complex64::new(k + dk1, 0.0),
                Complex64::new(k + dk2, 0.0),
                z,
                z * factor,
            ]);
        }
    }
    out
}

/// Two singularities with independent orders.
///
/// `init` is an optional starting guess (k_1, k_2, z_1, z_2).
pub fn solve_general_pair(
    series: &CoefficientSeries,
    init: Option<[Complex64; 4]>,
    opts: PairOptions,
) -> Result<PairSolveResult> {
    series.require_len(7)?;
    let ratios = compute_ratios(series)?;
    let r: Vec<Complex64> = (0..=4).map(|i| ratios.require_r(i)).collect::<Result<_>>()?;
    ratios.require_r(5)?;
    let system = |x: &[Complex64]| -> Option<Vec<Complex64>> {
        let f: Vec<Complex64> = (1..=4).map(|n| general_relation(x, r[n - 1], r[n], n)).collect();
        finite(&f).then_some(f)
    };

    let equal = solve_equal_order(series, opts).ok();
    let mut starts: Vec<[Complex64; 4]> = Vec::new();
    starts.extend(init);
    starts.extend(recurrence_starts(series));
    if let Some(eq) = &equal {
        let [a, b] = eq.singularities;
        starts.push([a.order(), b.order(), 0.0, 0.0].map(|v| Complex64::new(v, 0.0)));
        let last = starts.len() - 1;
        starts[last][2] = a.location;
        starts[last][3] = b.location;
    }
    starts.extend(perturbation_starts(series));
    starts.truncate(opts.start_budget);

    let mut found = Vec::new();
    for x0 in &starts {
        let Some(x) = damped_newton(system, x0, opts.newton) else { continue };
        let real = |v: Complex64| v.im.abs() <= 1e-6 * v.re.abs().max(1.0);
        if !real(x[0]) || !real(x[1]) {
            continue;
        }
        let params = [(x[0].re, x[2]), (x[1].re, x[3])];
        if let Some(res) = finish(series, &ratios, params, PairRoute::General, 5, opts.g_tol) {
            let done = res.resynthesis_residual < 1e-12;
            found.push(res);
            if done {
                break;
            }
        }
    }
    let accepted = found.len();
    match pick_best(found) {
        Some(mut best) => {
            best.accepted_candidates = accepted;
            Ok(best)
        }
        None => match equal {
            Some(eq) => Err(Error::SymmetryDegenerate(Box::new(eq))),
            None => Err(Error::NonConvergence { starts: starts.len() }),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::synthesize_series;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn two_poles(n_max: usize) -> CoefficientSeries {
        let m = SingularityModel::new(
            vec![
                Singularity::algebraic(-1.0, c(2.0, 0.0), c(2.0, 0.0)),
                Singularity::algebraic(-1.0, c(3.0, 0.0), c(9.0, 0.0)),
            ],
            c(0.0, 0.0),
        );
        synthesize_series(&m, n_max).unwrap()
    }

    #[test]
    fn tilde_direct_formula() {
        let s = CoefficientSeries::from_real(&[1.0, 0.0, 0.0]).unwrap();
        let t = tilde_coefficients(&s, 1.0, c(2.0, 0.0)).unwrap();
        assert!((t[0] - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn tilde_removes_second_pole() {
        let t = tilde_coefficients(&two_poles(10), -1.0, c(3.0, 0.0)).unwrap();
        for j in 1..t.len() {
            assert!((t[j] / t[j - 1] - c(0.5, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn tilde_on_single_term_follows_ratio_law() {
        let (k, z1) = (-0.5, c(1.7, 0.0));
        let s = synthesize_series(&SingularityModel::single(Singularity::algebraic(k, z1, c(1.0, 0.0))), 10).unwrap();
        let t = tilde_coefficients(&s, k, c(2.4, 0.0)).unwrap();
        // t[j] = c̃_{j+1}; its ratio follows the single-term law at order j+1.
        for j in 1..t.len() {
            let n = j as f64;
            assert!((t[j] / t[j - 1] - (n - k) / ((n + 1.0) * z1)).norm() < 1e-13);
        }
    }

    #[test]
    fn g_values_on_two_poles() {
        let ratios = compute_ratios(&two_poles(8)).unwrap();
        let expect = [-1.0 / 3.0, -0.5, -2.0 / 3.0, -5.0 / 6.0];
        for (i, e) in expect.iter().enumerate() {
            let n = i + 1;
            let g1 = g_function(-1.0, c(2.0, 0.0), &ratios, n).unwrap();
            let g2 = g_function(-1.0, c(3.0, 0.0), &ratios, n).unwrap();
            assert!((g1 - c(*e, 0.0)).norm() < 1e-12, "G_{n} = {g1}");
            assert!((g2 - c(*e, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn g_on_single_pole_matches_its_closed_form() {
        // With R_n = (n − k)/((n+1) z_1), G_n(k, z) = −(n − k)/(z z_1) for every z.
        let (k, z1) = (-1.5, c(1.8, 0.3));
        let s = synthesize_series(&SingularityModel::single(Singularity::algebraic(k, z1, c(1.0, 0.0))), 10).unwrap();
        let ratios = compute_ratios(&s).unwrap();
        let z = c(2.5, -0.4);
        for n in 1..8 {
            let g = g_function(k, z, &ratios, n).unwrap();
            assert!((g + (n as f64 - k) / (z * z1)).norm() < 1e-12);
        }
    }

    #[test]
    fn equal_order_on_two_poles() {
        let s = two_poles(5);
        let res = solve_equal_order(&s, PairOptions::default()).unwrap();
        assert_eq!(res.route, PairRoute::EqualOrder);
        let [a, b] = res.singularities;
        assert!((a.order() + 1.0).abs() < 1e-10 && (b.order() + 1.0).abs() < 1e-10);
        assert!((a.location - c(2.0, 0.0)).norm() < 1e-9);
        assert!((b.location - c(3.0, 0.0)).norm() < 1e-9);
        assert!((a.magnitude - c(2.0, 0.0)).norm() < 1e-8);
        assert!((b.magnitude - c(9.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn equal_order_cubic_has_one_real_root() {
        let ratios = compute_ratios(&two_poles(5)).unwrap();
        let roots = poly_roots(&equal_order_cubic(&ratios, 1).unwrap());
        let real: Vec<_> = roots.iter().filter(|r| r.im.abs() < 1e-8).collect();
        assert_eq!(real.len(), 1);
        assert!((real[0].re + 1.0).abs() < 1e-10);
    }

    #[test]
    fn equal_order_logs() {
        let m = SingularityModel::new(
            vec![Singularity::logarithmic(c(1.5, 0.0), c(1.0, 0.0)), Singularity::logarithmic(c(2.5, 0.0), c(1.0, 0.0))],
            c(0.0, 0.0),
        );
        let s = synthesize_series(&m, 12).unwrap();
        let res = solve_equal_order(&s, PairOptions::default()).unwrap();
        let [a, b] = res.singularities;
        assert!(a.is_logarithmic() && b.is_logarithmic());
        assert!((a.location - c(1.5, 0.0)).norm() < 1e-6);
        assert!((b.location - c(2.5, 0.0)).norm() < 1e-6);
        assert!((a.magnitude - c(1.0, 0.0)).norm() < 1e-6);
        assert!((b.magnitude - c(1.0, 0.0)).norm() < 1e-6);
        assert!(res.constant_offset.norm() < 1e-6);
    }

    #[test]
    fn equal_order_on_single_term_is_flagged() {
        let s = synthesize_series(&SingularityModel::single(Singularity::algebraic(-0.5, c(1.6, 0.0), c(1.0, 0.0))), 12).unwrap();
        match solve_equal_order(&s, PairOptions::default()) {
            Err(Error::DegenerateDiscriminant) | Err(Error::NoRealRoot) => {}
            Ok(res) => {
                let [a, b] = res.singularities;
                assert!((a.location - b.location).norm() < 1e-6, "{res:?}");
            }
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn general_pair_on_two_poles() {
        let res = solve_general_pair(&two_poles(12), None, PairOptions::default()).unwrap();
        let [a, b] = res.singularities;
        assert!((a.order() + 1.0).abs() < 1e-8 && (b.order() + 1.0).abs() < 1e-8);
        assert!((a.location - c(2.0, 0.0)).norm() < 1e-8);
        assert!((b.location - c(3.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn general_pair_distinct_orders() {
        let m = SingularityModel::new(
            vec![
                Singularity::algebraic(-0.5, c(1.4, 0.0), c(1.0, 0.0)),
                Singularity::algebraic(-2.0, c(2.2, 0.0), c(0.3, 0.0)),
            ],
            c(0.0, 0.0),
        );
        let s = synthesize_series(&m, 16).unwrap();
        let res = solve_general_pair(&s, None, PairOptions::default()).unwrap();
        let [a, b] = res.singularities;
        assert!((a.order() + 0.5).abs() < 1e-6, "{res:?}");
        assert!((b.order() + 2.0).abs() < 1e-6);
        assert!((a.location - c(1.4, 0.0)).norm() < 1e-6);
        assert!((b.location - c(2.2, 0.0)).norm() < 1e-6);
        assert!((a.magnitude - c(1.0, 0.0)).norm() < 1e-6);
        assert!((b.magnitude - c(0.3, 0.0)).norm() < 1e-6);
        assert!(res.g_consistency.iter().filter(|g| g.verification).all(|g| g.mismatch < 1e-8));
    }
}
