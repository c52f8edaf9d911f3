//! Small numerical kernels shared by the solvers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Median of a non-empty slice (mean of the middle pair for even length).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Componentwise median of complex values.
pub fn complex_median(values: &[Complex64]) -> Complex64 {
    let re: Vec<f64> = values.iter().map(|v| v.re).collect();
    let im: Vec<f64> = values.iter().map(|v| v.im).collect();
    Complex64::new(median(&re), median(&im))
}

/// Largest pairwise distance within a set.
pub fn spread(values: &[Complex64]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            worst = worst.max((a - b).norm());
        }
    }
    worst
}

pub fn horner(coeffs: &[Complex64], x: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(ZERO, |acc, &c| acc * x + c)
}

/// Roots of Σ coeffs[i] xⁱ. Leading coefficients below `1e-14` of the
/// largest are dropped first, so a degenerate cubic yields fewer roots.
pub fn poly_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Vec::new();
    }
    let mut deg = coeffs.len() - 1;
    while deg > 0 && coeffs[deg].norm() <= 1e-14 * scale {
        deg -= 1;
    }
    if deg == 0 {
        return Vec::new();
    }
    let monic: Vec<Complex64> = coeffs[..=deg].iter().map(|c| c / coeffs[deg]).collect();
    let deriv: Vec<Complex64> = (1..=deg).map(|i| monic[i] * i as f64).collect();

    // Aberth–Ehrlich from points on a circle of the Cauchy radius.
    let radius = 1.0 + monic[..deg].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|i| Complex64::from_polar(0.5 * radius, 0.4 + std::f64::consts::TAU * i as f64 / deg as f64))
        .collect();
    for _ in 0..500 {
        let mut moved: f64 = 0.0;
        for i in 0..deg {
            let p = horner(&monic, z[i]);
            let dp = horner(&deriv, z[i]);
            if p == ZERO {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..deg).filter(|&j| j != i).map(|j| ONE / (z[i] - z[j])).sum();
            let step = ratio / (ONE - ratio * repulsion);
            if step.re.is_finite() && step.im.is_finite() {
                z[i] -= step;
                moved = moved.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

/// Monomial coefficients (ascending) of the cubic through four points.
pub fn cubic_through(xs: [f64; 4], ys: [Complex64; 4]) -> [Complex64; 4] {
    // Newton divided differences, then expand the nested form.
    let mut dd = ys;
    for level in 1..4 {
        for i in (level..4).rev() {
            dd[i] = (dd[i] - dd[i - 1]) / (xs[i] - xs[i - level]);
        }
    }
    let mut poly = [ZERO; 4];
    poly[0] = dd[3];
    for (deg, i) in (0..3).rev().enumerate() {
        // poly <- poly * (x - xs[i]) + dd[i]
        let mut next = [ZERO; 4];
        for j in 0..=deg {
            next[j + 1] += poly[j];
            next[j] -= poly[j] * xs[i];
        }
        next[0] += dd[i];
        poly = next;
    }
    poly
}

/// Settings for [`damped_newton`].
#[derive(Clone, Copy, Debug)]
pub struct NewtonOptions {
    pub max_iter: usize,
    pub max_halvings: usize,
    pub step_tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { max_iter: 200, max_halvings: 20, step_tol: 1e-12 }
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Damped Newton for a holomorphic square system F(x) = 0.
///
/// The Jacobian is formed by central differences along the real axis, which
/// for a holomorphic map gives the complex derivative. Returns `None` when an
/// iteration cannot decrease ‖F‖ or the iteration cap is hit.
pub fn damped_newton<F>(f: F, x0: &[Complex64], opts: NewtonOptions) -> Option<Vec<Complex64>>
where
    F: Fn(&[Complex64]) -> Option<Vec<Complex64>>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x)?;
    for _ in 0..opts.max_iter {
        let mut jac = DMatrix::<Complex64>::zeros(fx.len(), n);
        for j in 0..n {
            let h = 1e-7 * (1.0 + x[j].norm());
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let (fp, fm) = (f(&xp)?, f(&xm)?);
            for i in 0..fx.len() {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        let rhs = DVector::from_iterator(fx.len(), fx.iter().map(|v| -v));
        let step = jac.lu().solve(&rhs)?;
        let current = norm(&fx);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<Complex64> = x.iter().zip(step.iter()).map(|(a, d)| a + d * t).collect();
            if let Some(ft) = f(&trial) {
                let tn = norm(&ft);
                if tn.is_finite() && (tn < current || tn == 0.0) {
                    accepted = Some((trial, ft));
                    break;
                }
            }
            t *= 0.5;
        }
        let step_norm = t * step.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        match accepted {
            Some((trial, ft)) => {
                x = trial;
                fx = ft;
                if step_norm < opts.step_tol * (1.0 + norm(&x)) || norm(&fx) == 0.0 {
                    return Some(x);
                }
            }
            None => {
                // No decrease possible: converged only if the full step is already negligible.
                let full = step.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                return if full < 1e3 * opts.step_tol * (1.0 + norm(&x)) { Some(x) } else { None };
            }
        }
    }
    None
}

/// Least-squares solution of a real system by SVD with relative truncation.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    if !a.iter().chain(b.iter()).all(|v| v.is_finite()) {
        return None;
    }
    // Column scaling keeps the truncation threshold meaningful.
    let scales: Vec<f64> = (0..a.ncols())
        .map(|j| {
            let s = a.column(j).norm();
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    let mut scaled = a.clone();
    for (j, s) in scales.iter().enumerate() {
        scaled.column_mut(j).scale_mut(1.0 / s);
    }
    let svd = scaled.svd(true, true);
    let smax = svd.singular_values.max();
    let mut y = svd.solve(b, smax * 1e-13).ok()?;
    for (j, s) in scales.iter().enumerate() {
        y[j] /= s;
    }
    Some(y)
}

/// Complex least squares by SVD with relative truncation.
pub fn complex_lstsq(a: &DMatrix<Complex64>, b: &DVector<Complex64>) -> Option<DVector<Complex64>> {
    if !a.iter().chain(b.iter()).all(|v| v.re.is_finite() && v.im.is_finite()) {
        return None;
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    svd.solve(b, smax * 1e-14).ok()
}
