//! Domb–Sykes plot data: R_n against 1/(n+1) with the fitted curve, one
//! table per peeling stage.

use std::fmt::Write;

use num_complex::Complex64;
use singularity_core::asymptotic::{peel, DombSykesFit, PeelOptions, PeelTrace};
use singularity_core::series::{synthesize_series, CoefficientSeries, SingularityModel};

use crate::io::{fmt, sig12};

pub const HEADER: [&str; 4] = ["n", "inv_n", "R_n", "fit_R"];

#[derive(Clone, Debug)]
pub struct StagePlot {
    pub stage: usize,
    pub fit: DombSykesFit,
    pub metadata: Vec<(String, String)>,
    /// Rows of (n, 1/(n+1), R_n, fit_R).
    pub rows: Vec<Vec<f64>>,
}

/// Peel `series` and tabulate the ratios each stage was fitted to.
pub fn stage_plots(series: &CoefficientSeries, opts: PeelOptions) -> singularity_core::Result<(Vec<StagePlot>, PeelTrace)> {
    let (_, trace) = peel(series, opts)?;
    let n_max = series.len() - 1;
    let mut residual: Vec<Complex64> = series.as_slice().to_vec();
    let mut plots = Vec::new();
    for (i, stage) in trace.stages.iter().enumerate() {
        let rows = (0..stage.trusted_len.saturating_sub(1))
            .filter_map(|n| {
                let r = (residual[n + 1] / residual[n]).re;
                let x = 1.0 / (n as f64 + 1.0);
                r.is_finite().then(|| vec![n as f64, x, r, stage.fit.eval(x)])
            })
            .collect();
        let s = &stage.singularity;
        let metadata = vec![
            ("stage".into(), (i + 1).to_string()),
            ("window".into(), format!("{}..{}", stage.fit.window_start, stage.fit.window_end)),
            ("intercept".into(), fmt(stage.fit.intercept)),
            ("slope".into(), fmt(stage.fit.slope0)),
            ("k_est".into(), fmt(stage.fit.k_est)),
            ("z_est".into(), fmt(stage.fit.z_est)),
            ("fit_residual".into(), fmt(stage.fit.fit_residual)),
            ("order".into(), if s.is_logarithmic() { "log".into() } else { fmt(s.order()) }),
            ("location".into(), fmt(s.location.re)),
            ("magnitude".into(), fmt(s.magnitude.re)),
        ];
        plots.push(StagePlot { stage: i + 1, fit: stage.fit, metadata, rows });

        let term = synthesize_series(&SingularityModel::single(stage.singularity), n_max)?;
        for (r, t) in residual.iter_mut().zip(term.as_slice()) {
            *r -= t;
        }
    }
    Ok((plots, trace))
}

/// Scatter of R_n with the fitted curve, axes 1/(n+1) and R_n.
pub fn render_svg(plot: &StagePlot) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const PAD: f64 = 60.0;
    let xs: Vec<f64> = plot.rows.iter().map(|r| r[1]).collect();
    let mut ys: Vec<f64> = plot.rows.iter().map(|r| r[2]).collect();
    let x_max = xs.iter().copied().fold(0.0, f64::max).max(1e-12);
    let curve: Vec<(f64, f64)> = (0..=100).map(|i| x_max * i as f64 / 100.0).map(|x| (x, plot.fit.eval(x))).collect();
    ys.extend(curve.iter().map(|p| p.1));
    let y_min = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let y_max = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let y_span = if y_max > y_min { y_max - y_min } else { 1.0 };
    let (y_lo, y_hi) = (y_min - 0.05 * y_span, y_max + 0.05 * y_span);
    let px = |x: f64| PAD + (W - 2.0 * PAD) * x / x_max;
    let py = |y: f64| H - PAD - (H - 2.0 * PAD) * (y - y_lo) / (y_hi - y_lo);

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<path d="M{l},{t} L{l},{b} L{r},{b}" fill="none" stroke="black"/>"#,
        l = PAD,
        t = PAD,
        b = H - PAD,
        r = W - PAD
    );
    for i in 0..=4 {
        let x = x_max * i as f64 / 4.0;
        let y = y_lo + (y_hi - y_lo) * i as f64 / 4.0;
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, px(x), H - PAD + 18.0, sig12(x) as f32);
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, PAD - 6.0, py(y) + 4.0, sig12(y) as f32);
    }
    let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">1/(n+1)</text>"#, W / 2.0, H - 15.0);
    let _ = writeln!(
        svg,
        r#"<text x="15" y="{:.1}" text-anchor="middle" transform="rotate(-90 15 {:.1})">R_n</text>"#,
        H / 2.0,
        H / 2.0
    );
    let path: Vec<String> = curve.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
    let _ = writeln!(svg, r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#, path.join(" "));
    for r in &plot.rows {
        let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="black"/>"#, px(r[1]), py(r[2]));
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="end">stage {}: R(0) = {}</text>"#,
        W - PAD,
        PAD - 10.0,
        plot.stage,
        sig12(plot.fit.intercept)
    );
    svg.push_str("</svg>\n");
    svg
}
