//! Value types, generalized binomial coefficients, the direct-problem
//! synthesizer and coefficient ratios.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative magnitude below which a coefficient is treated as zero when it
/// would otherwise be used as a divisor.
pub const ZERO_GUARD: f64 = 1e-13;

/// Taylor coefficients c_0..c_N of a function analytic in the unit disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct CoefficientSeries {
    coefficients: Vec<Complex64>,
}

impl CoefficientSeries {
    pub fn new(coefficients: Vec<Complex64>) -> Result<Self> {
        if let Some(index) = coefficients
            .iter()
            .position(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { coefficients })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn get(&self, n: usize) -> Option<Complex64> {
        self.coefficients.get(n).copied()
    }

    pub fn max_abs(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// True when every imaginary part is within `rel_tol * max|c|`.
    pub fn is_real(&self, rel_tol: f64) -> bool {
        let bound = rel_tol * self.max_abs();
        self.coefficients.iter().all(|c| c.im.abs() <= bound)
    }

    /// The first `len` coefficients (or all of them if fewer).
    pub fn truncated(&self, len: usize) -> Self {
        let len = len.min(self.len());
        Self { coefficients: self.coefficients[..len].to_vec() }
    }

    pub fn require_len(&self, needed: usize) -> Result<()> {
        if self.len() < needed {
            return Err(Error::TooShort { needed, got: self.len() });
        }
        Ok(())
    }
}

impl TryFrom<Vec<Complex64>> for CoefficientSeries {
    type Error = Error;
    fn try_from(v: Vec<Complex64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<CoefficientSeries> for Vec<Complex64> {
    fn from(s: CoefficientSeries) -> Self {
        s.coefficients
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SingularityKind {
    /// `M (z_j - z)^k`.
    Algebraic { order: f64 },
    /// `M log(z_j - z)`; behaves as order 0 in the ratio laws.
    Logarithmic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Singularity {
    #[serde(flatten)]
    pub kind: SingularityKind,
    pub location: Complex64,
    pub magnitude: Complex64,
}

impl Singularity {
    pub fn algebraic(order: f64, location: Complex64, magnitude: Complex64) -> Self {
        Self { kind: SingularityKind::Algebraic { order }, location, magnitude }
    }

    pub fn logarithmic(location: Complex64, magnitude: Complex64) -> Self {
        Self { kind: SingularityKind::Logarithmic, location, magnitude }
    }

    /// The exponent k, with logarithms reported as 0.
    pub fn order(&self) -> f64 {
        match self.kind {
            SingularityKind::Algebraic { order } => order,
            SingularityKind::Logarithmic => 0.0,
        }
    }

    pub fn is_logarithmic(&self) -> bool {
        matches!(self.kind, SingularityKind::Logarithmic)
    }

    /// A non-negative integer order makes the term a polynomial.
    pub fn is_polynomial(&self) -> bool {
        match self.kind {
            SingularityKind::Algebraic { order } => order >= 0.0 && order.fract() == 0.0,
            SingularityKind::Logarithmic => false,
        }
    }

    /// `L = M z^k`, the coefficient of `(1 - z/z_j)^k` (principal branch).
    pub fn strength(&self) -> Complex64 {
        match self.kind {
            SingularityKind::Algebraic { order } => self.magnitude * complex_pow(self.location, order),
            SingularityKind::Logarithmic => self.magnitude,
        }
    }
}

/// `w^k` on the principal branch, exact repeated multiplication for integer k.
pub(crate) fn complex_pow(w: Complex64, k: f64) -> Complex64 {
    if k.fract() == 0.0 && k.abs() <= i32::MAX as f64 {
        w.powi(k as i32)
    } else {
        w.powf(k)
    }
}

/// A finite sum of singular terms plus a constant, kept sorted by |location|.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawModel")]
pub struct SingularityModel {
    terms: Vec<Singularity>,
    #[serde(default)]
    pub constant_offset: Complex64,
}

#[derive(Deserialize)]
struct RawModel {
    #[serde(default)]
    terms: Vec<Singularity>,
    #[serde(default)]
    constant_offset: Complex64,
}

impl From<RawModel> for SingularityModel {
    fn from(raw: RawModel) -> Self {
        Self::new(raw.terms, raw.constant_offset)
    }
}

impl SingularityModel {
    pub fn new(mut terms: Vec<Singularity>, constant_offset: Complex64) -> Self {
        terms.sort_by(|a, b| a.location.norm().total_cmp(&b.location.norm()));
        Self { terms, constant_offset }
    }

    pub fn single(term: Singularity) -> Self {
        Self::new(vec![term], Complex64::new(0.0, 0.0))
    }

    pub fn terms(&self) -> &[Singularity] {
        &self.terms
    }

    pub fn push(&mut self, term: Singularity) {
        self.terms.push(term);
        self.terms.sort_by(|a, b| a.location.norm().total_cmp(&b.location.norm()));
    }

    pub fn validate(&self) -> Result<()> {
        for t in &self.terms {
            if t.location.norm() <= 1.0 || t.location.norm().is_nan() {
                return Err(Error::InsideContour { location: t.location });
            }
        }
        Ok(())
    }
}

/// γ_n(k) = k(k−1)···(k−n+1)/n!, by running product.
pub fn gamma_binomial(k: f64, n: usize) -> f64 {
    let mut g = 1.0;
    for m in 0..n {
        g *= (k - m as f64) / (m as f64 + 1.0);
    }
    g
}

/// Coefficients of a single term, before the model's constant offset.
pub(crate) fn term_coefficients(term: &Singularity, n_max: usize) -> Vec<Complex64> {
    let z = term.location;
    let mut out = vec![Complex64::new(0.0, 0.0); n_max + 1];
    match term.kind {
        SingularityKind::Algebraic { order } => {
            let w = -z.inv();
            let mut t = term.strength();
            for (n, slot) in out.iter_mut().enumerate() {
                *slot = t;
                t *= w * ((order - n as f64) / (n as f64 + 1.0));
            }
        }
        SingularityKind::Logarithmic => {
            out[0] = term.magnitude * z.ln();
            let zi = z.inv();
            let mut p = Complex64::new(1.0, 0.0);
            for (n, slot) in out.iter_mut().enumerate().skip(1) {
                p *= zi;
                *slot = -term.magnitude * p / n as f64;
            }
        }
    }
    out
}

/// Taylor coefficients c_0..c_N of the model.
pub fn synthesize_series(model: &SingularityModel, n_max: usize) -> Result<CoefficientSeries> {
    model.validate()?;
    let mut c = vec![Complex64::new(0.0, 0.0); n_max + 1];
    c[0] = model.constant_offset;
    for term in model.terms() {
        for (acc, t) in c.iter_mut().zip(term_coefficients(term, n_max)) {
            *acc += t;
        }
    }
    CoefficientSeries::new(c)
}

/// Closed-form value of the model at `z`.
///
/// Terms are evaluated as `L (1 − z/z_j)^k` and `M (log z_j + log(1 − z/z_j))`,
/// which puts every branch cut on the ray `{s z_j : s ≥ 1}`.
pub fn evaluate_model(model: &SingularityModel, z: Complex64) -> Result<Complex64> {
    let mut total = model.constant_offset;
    for term in model.terms() {
        let ratio = z / term.location;
        let w = Complex64::new(1.0, 0.0) - ratio;
        if w.norm() <= 1e-15 {
            return Err(Error::AtSingularity { point: z });
        }
        let integer = matches!(term.kind, SingularityKind::Algebraic { order } if order.fract() == 0.0);
        if !integer && w.re <= 0.0 && w.im.abs() <= 1e-14 * ratio.norm() {
            return Err(Error::OnBranchCut { point: z });
        }
        total += match term.kind {
            SingularityKind::Algebraic { order } => term.strength() * complex_pow(w, order),
            SingularityKind::Logarithmic => term.magnitude * (term.location.ln() + w.ln()),
        };
    }
    Ok(total)
}

/// Why a ratio slot holds no value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AbsentReason {
    /// The divisor c_index fell below the zero guard.
    ZeroDivisor { index: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Slot {
    Value(Complex64),
    Absent(AbsentReason),
}

impl Slot {
    pub fn value(&self) -> Option<Complex64> {
        match *self {
            Slot::Value(v) => Some(v),
            Slot::Absent(_) => None,
        }
    }
}

/// R_n = c_{n+1}/c_n and D_n = c_{n+2} c_n / c_{n+1}², indexed from `start_index`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioSequence {
    pub start_index: usize,
    pub r: Vec<Slot>,
    pub d: Vec<Slot>,
}

impl RatioSequence {
    pub fn r(&self, n: usize) -> Option<Complex64> {
        n.checked_sub(self.start_index)
            .and_then(|i| self.r.get(i))
            .and_then(Slot::value)
    }

    pub fn d(&self, n: usize) -> Option<Complex64> {
        n.checked_sub(self.start_index)
            .and_then(|i| self.d.get(i))
            .and_then(Slot::value)
    }

    pub fn require_r(&self, n: usize) -> Result<Complex64> {
        self.r(n).ok_or(Error::MissingRatio { index: n })
    }

    /// One past the last index with an R slot.
    pub fn r_end(&self) -> usize {
        self.start_index + self.r.len()
    }

    /// (n, R_n) for every defined slot.
    pub fn defined_r(&self) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.r
            .iter()
            .enumerate()
            .filter_map(move |(i, s)| s.value().map(|v| (i + self.start_index, v)))
    }
}

/// Ratios of the full series starting at n = 0.
pub fn compute_ratios(series: &CoefficientSeries) -> Result<RatioSequence> {
    compute_ratios_from(series, 0)
}

/// Ratios R_n, D_n for n ≥ `start_index`.
pub fn compute_ratios_from(series: &CoefficientSeries, start_index: usize) -> Result<RatioSequence> {
    series.require_len(3)?;
    let c = series.as_slice();
    let guard = ZERO_GUARD * series.max_abs();
    let usable = |n: usize| c[n].norm() >= guard && c[n].norm() > 0.0;
    let len = c.len();
    let r = (start_index..len.saturating_sub(1))
        .map(|n| {
            if usable(n) {
                Slot::Value(c[n + 1] / c[n])
            } else {
                Slot::Absent(AbsentReason::ZeroDivisor { index: n })
            }
        })
        .collect();
    let d = (start_index..len.saturating_sub(2))
        .map(|n| {
            if usable(n + 1) {
                Slot::Value(c[n + 2] * c[n] / (c[n + 1] * c[n + 1]))
            } else {
                Slot::Absent(AbsentReason::ZeroDivisor { index: n + 1 })
            }
        })
        .collect();
    Ok(RatioSequence { start_index, r, d })
}

/// Least-squares magnitudes for terms of known kind and location, matched
/// on the listed coefficient orders. When order 0 is not among them the
/// constant offset absorbs whatever c_0 the terms leave unexplained.
pub fn fit_magnitudes(
    series: &CoefficientSeries,
    shapes: &[(SingularityKind, Complex64)],
    orders: &[usize],
) -> Result<SingularityModel> {
    let top = orders.iter().copied().max().unwrap_or(0);
    series.require_len(top + 1)?;
    let unit: Vec<Vec<Complex64>> = shapes
        .iter()
        .map(|&(kind, location)| {
            term_coefficients(&Singularity { kind, location, magnitude: Complex64::new(1.0, 0.0) }, top)
        })
        .collect();
    let a = nalgebra::DMatrix::from_fn(orders.len(), shapes.len(), |i, j| unit[j][orders[i]]);
    let b = nalgebra::DVector::from_iterator(orders.len(), orders.iter().map(|&n| series.as_slice()[n]));
    let m = crate::numeric::complex_lstsq(&a, &b).ok_or(Error::IllConditioned)?;
    let terms: Vec<Singularity> = shapes
        .iter()
        .zip(m.iter())
        .map(|(&(kind, location), &magnitude)| Singularity { kind, location, magnitude })
        .collect();
    let offset = if orders.contains(&0) {
        Complex64::new(0.0, 0.0)
    } else {
        series.as_slice()[0] - m.iter().zip(&unit).map(|(mj, u)| mj * u[0]).sum::<Complex64>()
    };
    Ok(SingularityModel::new(terms, offset))
}

/// Largest coefficient mismatch between the model and the data, relative to
/// max|c|, over the shared index range.
pub fn regenerate_residual(model: &SingularityModel, series: &CoefficientSeries) -> Result<f64> {
    if series.is_empty() {
        return Ok(0.0);
    }
    let synth = synthesize_series(model, series.len() - 1)?;
    Ok(max_relative_mismatch(synth.as_slice(), series.as_slice()))
}

pub(crate) fn max_relative_mismatch(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = b.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let worst = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        worst
    } else {
        worst / scale
    }
}
