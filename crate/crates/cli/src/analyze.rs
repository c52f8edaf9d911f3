//! The automatic analysis: single term, equal-order pair, general pair, then
//! peeling, stopping at the first accepted model.

use std::fmt::Write;

use num_complex::Complex64;
use serde::Serialize;
use singularity_core::asymptotic::{peel, PeelOptions, PeelTrace};
use singularity_core::pair::{solve_equal_order, solve_general_pair, PairOptions, PairSolveResult};
use singularity_core::series::{
    fit_magnitudes, regenerate_residual, CoefficientSeries, Singularity, SingularityKind, SingularityModel,
};
use singularity_core::sign_pattern::{sign_runs, SignRunProfile, REAL_TOL};
use singularity_core::single::{snap_parameters, solve_single, SingleOptions, SingleSolveDiagnostics};
use singularity_core::Error;

use crate::io::{fmt, sig12};

pub const REPORT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug)]
pub struct AnalyzeOptions {
    pub snap_tol: f64,
    /// Largest resynthesis residual, relative to max|c|, for acceptance.
    pub residual_tol: f64,
    pub window: Option<usize>,
    pub stages: usize,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self { snap_tol: 0.05, residual_tol: 1e-6, window: None, stages: 8 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InputDigest {
    pub source: String,
    /// `coefficients`, `samples` or `imaginary-part`.
    pub format: &'static str,
    pub coefficient_count: usize,
    pub real: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Single,
    EqualOrder,
    GeneralPair,
    Peel,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageVerdict {
    pub stage: Stage,
    /// `accepted`, `rejected:inconsistent` or `rejected:error(Code)`.
    pub verdict: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RecoveredModel {
    pub raw: SingularityModel,
    pub raw_residual: f64,
    pub snapped: Option<SingularityModel>,
    pub snapped_residual: Option<f64>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Diagnostics {
    pub single: Option<SingleSolveDiagnostics>,
    pub pair: Option<PairSolveResult>,
    pub peel: Option<PeelTrace>,
    pub sign_runs: Option<SignRunProfile>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub report_version: u32,
    pub input: InputDigest,
    pub pipeline: Vec<StageVerdict>,
    pub accepted_stage: Option<Stage>,
    pub model: Option<RecoveredModel>,
    /// Residual of the model that passed acceptance.
    pub resynthesis_residual: Option<f64>,
    pub diagnostics: Diagnostics,
    pub warnings: Vec<String>,
}

impl AnalysisReport {
    /// The snapped model when one was accepted, else the raw one.
    pub fn reported_model(&self) -> Option<&SingularityModel> {
        self.model.as_ref().map(|m| m.snapped.as_ref().unwrap_or(&m.raw))
    }
}

fn rejected(e: &Error) -> String {
    format!("rejected:error({})", e.code())
}

/// Snap each term and refit the magnitudes to the data.
fn snapped_refit(model: &SingularityModel, series: &CoefficientSeries, tol: f64) -> Option<(SingularityModel, f64)> {
    let shapes: Vec<(SingularityKind, Complex64)> = model
        .terms()
        .iter()
        .map(|t| {
            let s = snap_parameters(*t, tol);
            (s.kind, s.location)
        })
        .collect();
    if shapes.iter().zip(model.terms()).all(|(s, t)| s.0 == t.kind && s.1 == t.location) {
        return None;
    }
    // A log term's c_0 mixes with the offset, so leave c_0 to the offset.
    let first = usize::from(shapes.iter().any(|s| matches!(s.0, SingularityKind::Logarithmic)));
    let orders: Vec<usize> = (first..series.len()).collect();
    let refit = fit_magnitudes(series, &shapes, &orders).ok()?;
    let residual = regenerate_residual(&refit, series).ok()?;
    Some((refit, residual))
}

struct Candidate {
    model: RecoveredModel,
    residual: f64,
}

impl RecoveredModel {
    fn new(raw: SingularityModel, raw_residual: f64) -> Self {
        Self { raw, raw_residual, snapped: None, snapped_residual: None }
    }

    fn acceptance_residual(&self) -> f64 {
        self.snapped_residual.unwrap_or(self.raw_residual)
    }
}

/// Attach a snapped model only if it still reproduces the data.
fn keep_snapped(
    mut model: RecoveredModel,
    snapped: Option<(SingularityModel, f64)>,
    tol: f64,
    warnings: &mut Vec<String>,
) -> RecoveredModel {
    match snapped {
        Some((s, r)) if r <= tol => {
            model.snapped = Some(s);
            model.snapped_residual = Some(r);
        }
        Some((_, r)) => warnings.push(format!("snapped model dropped: residual {} exceeds the threshold", fmt(r))),
        None => {}
    }
    model
}

fn pair_candidate(res: &PairSolveResult, series: &CoefficientSeries, opts: &AnalyzeOptions, warnings: &mut Vec<String>) -> Candidate {
    let raw = res.model();
    let snapped = snapped_refit(&raw, series, opts.snap_tol);
    let model = keep_snapped(RecoveredModel::new(raw, res.resynthesis_residual), snapped, opts.residual_tol, warnings);
    Candidate { residual: model.acceptance_residual(), model }
}

pub fn analyze(series: &CoefficientSeries, input: InputDigest, opts: AnalyzeOptions) -> AnalysisReport {
    let mut pipeline = Vec::new();
    let mut diagnostics = Diagnostics::default();
    let mut warnings = Vec::new();
    let mut accepted: Option<(Stage, Candidate)> = None;
    let tol = opts.residual_tol;
    let verdict = |residual: f64| if residual <= tol { "accepted".to_owned() } else { "rejected:inconsistent".to_owned() };

    if input.real {
        match sign_runs(series) {
            Ok(profile) => {
                if profile.radius_warning {
                    warnings.push(format!(
                        "root test {:.6} is not near 1: the radius of convergence is not the unit circle",
                        profile.root_test.unwrap_or(f64::NAN)
                    ));
                }
                diagnostics.sign_runs = Some(profile);
            }
            Err(e) => warnings.push(format!("sign-run analysis: {e}")),
        }
    }

    // Stage 1: one term.
    match solve_single(series, SingleOptions { snap_tol: Some(opts.snap_tol), ..Default::default() }) {
        Ok((_, diag)) => {
            let raw = SingularityModel::single(diag.raw);
            let raw_residual = regenerate_residual(&raw, series).unwrap_or(f64::INFINITY);
            let snapped = diag.snapped.map(|s| (SingularityModel::single(s), diag.resynthesis_residual));
            let mut notes = Vec::new();
            let model = keep_snapped(RecoveredModel::new(raw, raw_residual), snapped, tol, &mut notes);
            let residual = model.acceptance_residual();
            let v = if diag.consistent { verdict(residual) } else { "rejected:inconsistent".to_owned() };
            if v == "accepted" {
                warnings.extend(notes);
                accepted = Some((Stage::Single, Candidate { model, residual }));
            }
            pipeline.push(StageVerdict { stage: Stage::Single, verdict: v });
            diagnostics.single = Some(diag);
        }
        Err(e) => pipeline.push(StageVerdict { stage: Stage::Single, verdict: rejected(&e) }),
    }

    // Stages 2 and 3: two terms.
    let pair_opts = PairOptions::default();
    for stage in [Stage::EqualOrder, Stage::GeneralPair] {
        if accepted.is_some() {
            break;
        }
        let result = match stage {
            Stage::EqualOrder => solve_equal_order(series, pair_opts),
            _ => solve_general_pair(series, None, pair_opts),
        };
        match result {
            Ok(res) => {
                let mut notes = Vec::new();
                let cand = pair_candidate(&res, series, &opts, &mut notes);
                let v = verdict(cand.residual);
                if v == "accepted" {
                    warnings.extend(notes);
                    accepted = Some((stage, cand));
                }
                pipeline.push(StageVerdict { stage, verdict: v });
                diagnostics.pair = Some(res);
            }
            Err(e) => {
                if let Error::SymmetryDegenerate(eq) = &e {
                    warnings.push(format!(
                        "general pair collapsed onto equal orders (k = {})",
                        sig12(eq.singularities[0].order())
                    ));
                }
                pipeline.push(StageVerdict { stage, verdict: rejected(&e) });
            }
        }
    }

    // Stage 4: peeling, real data only.
    if accepted.is_none() {
        let peel_opts =
            PeelOptions { residual_tol: tol, stage_cap: opts.stages, window: opts.window, snap_tol: opts.snap_tol };
        let result = if input.real { peel(series, peel_opts) } else { Err(Error::NotReal) };
        match result {
            Ok((model, trace)) => {
                let residual = regenerate_residual(&model, series).unwrap_or(f64::INFINITY);
                let v = verdict(residual);
                if v == "accepted" {
                    accepted = Some((Stage::Peel, Candidate { model: RecoveredModel::new(model, residual), residual }));
                }
                if let Some(code) = trace.stopped_on {
                    warnings.push(format!("peeling stopped after {} stage(s): {code}", trace.stages.len()));
                }
                pipeline.push(StageVerdict { stage: Stage::Peel, verdict: v });
                diagnostics.peel = Some(trace);
            }
            Err(e) => pipeline.push(StageVerdict { stage: Stage::Peel, verdict: rejected(&e) }),
        }
    }

    let (accepted_stage, model, resynthesis_residual) = match accepted {
        Some((stage, cand)) => {
            assert!(cand.residual <= tol, "accepted model exceeds the residual threshold");
            (Some(stage), Some(cand.model), Some(cand.residual))
        }
        None => (None, None, None),
    };
    AnalysisReport {
        report_version: REPORT_VERSION,
        input,
        pipeline,
        accepted_stage,
        model,
        resynthesis_residual,
        diagnostics,
        warnings,
    }
}

pub fn is_real(series: &CoefficientSeries) -> bool {
    series.is_real(REAL_TOL)
}

fn fmt_c(z: Complex64) -> String {
    let im = sig12(z.im);
    if im == 0.0 {
        fmt(z.re)
    } else if im < 0.0 {
        format!("{}-{}i", fmt(z.re), fmt(-im))
    } else {
        format!("{}+{}i", fmt(z.re), fmt(im))
    }
}

fn describe(t: &Singularity) -> String {
    match t.kind {
        SingularityKind::Algebraic { order } => format!(
            "M (z_j - z)^k   k = {}   z_j = {}   M = {}",
            fmt(order),
            fmt_c(t.location),
            fmt_c(t.magnitude)
        ),
        SingularityKind::Logarithmic => {
            format!("M log(z_j - z)   z_j = {}   M = {}", fmt_c(t.location), fmt_c(t.magnitude))
        }
    }
}

/// Human-readable summary.
pub fn render_text(report: &AnalysisReport) -> String {
    let mut out = String::new();
    let i = &report.input;
    let _ = writeln!(
        out,
        "input: {} ({}, {} coefficients, {})",
        i.source,
        i.format,
        i.coefficient_count,
        if i.real { "real" } else { "complex" }
    );
    for s in &report.pipeline {
        let _ = writeln!(out, "  {:<13} {}", serde_json::to_value(s.stage).unwrap().as_str().unwrap_or(""), s.verdict);
    }
    match (&report.model, report.reported_model()) {
        (Some(m), Some(reported)) => {
            let label = if m.snapped.is_some() { "snapped" } else { "raw" };
            let _ = writeln!(out, "model ({label}):");
            for t in reported.terms() {
                let _ = writeln!(out, "  {}", describe(t));
            }
            let _ = writeln!(out, "  constant offset = {}", fmt_c(reported.constant_offset));
            let _ = writeln!(out, "resynthesis residual: {}", fmt(report.resynthesis_residual.unwrap_or(f64::NAN)));
        }
        _ => {
            let _ = writeln!(out, "no model accepted");
        }
    }
    if let Some(p) = &report.diagnostics.sign_runs {
        let _ = writeln!(out, "sign runs: alpha = {} over {} complete runs", fmt(p.alpha), p.runs.len());
    }
    for w in &report.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}
