//! Execution of each command into checks and artifacts.

use std::collections::BTreeSet;

use nalgebra::Matrix2;
use num_complex::Complex64;
use reslab::counterexamples::{prescribe_trace_formula_set, CounterexampleSeries, RotationSpec, SeriesKind, StepSet};
use reslab::entire::{check_global_trace_formula, check_local_trace_formula, FiniteZeros, HorseshoeShells};
use reslab::gevrey::{
    build_band_partition, cone_distance_check, cone_hyperbolicity_check, fourier_decay_check,
    gevrey_condition_check, ConeFamily, DecayVerdict, GevreyProfile, MAX_DERIVATIVE_ORDER,
};
use reslab::horseshoe::{default_cutoff, HorseshoeModel};
use reslab::nuclear::{
    diagonal_det_coefficients, fit_stretched_bound, ruse_coefficients, stretched_cutoff,
    SingularValueModel, Verdict,
};
use reslab::series::{det_from_traces, traces_from_det, TraceSequence};
use reslab::shift::{shift_traces, zeta_inverse_series};
use reslab::textio::format_f64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::spec::{
    CounterexampleParams, DetParams, ExperimentSpec, GevreyParams, NuclearParams, Params,
    ProfileKind, ResonanceParams, TraceCheckParams, ZetaParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Undetermined,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Undetermined => "UNDETERMINED",
        }
    }
}

/// One verdict with its governing tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub status: Status,
    pub tolerance: Option<f64>,
    pub detail: String,
}

impl CheckLine {
    fn new(name: &str, status: Status, tolerance: Option<f64>, detail: String) -> Self {
        Self {
            name: name.to_string(),
            status,
            tolerance,
            detail,
        }
    }

    pub fn line(&self) -> String {
        match self.tolerance {
            Some(t) => format!("{} {} (tol {t:e}): {}", self.status.label(), self.name, self.detail),
            None => format!("{} {}: {}", self.status.label(), self.name, self.detail),
        }
    }
}

/// Everything a run produces before anything touches the disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub checks: Vec<CheckLine>,
    pub csv: Option<String>,
    pub data: Value,
}

/// CSV text from a header and rows of preformatted cells.
fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn execute(spec: &ExperimentSpec, tol: Option<f64>) -> anyhow::Result<RunOutput> {
    match &spec.params {
        Params::Zeta(p) => zeta(p, tol.or(p.tol).unwrap_or(1e-10)),
        Params::Det(p) => det(p, tol.or(p.tol).unwrap_or(1e-10)),
        Params::Resonances(p) => resonances(p, tol.or(p.tol).unwrap_or(1e-12)),
        Params::TraceCheck(p) => trace_check(p, tol.or(p.tol).unwrap_or(1e-12)),
        Params::Counterexample(p) => counterexample(p, tol.or(p.tol).unwrap_or(0.0)),
        Params::Nuclear(p) => nuclear(p, tol.or(p.tol).unwrap_or(1e-14)),
        Params::Gevrey(p) => gevrey(p, spec.seed, tol.or(p.tol).unwrap_or(1e-12)),
    }
}

fn zeta(p: &ZetaParams, tol: f64) -> anyhow::Result<RunOutput> {
    let closed = zeta_inverse_series(&p.weight, p.order)?;
    let orbit_order = p.orbit_order.unwrap_or(p.order.min(12)).min(p.order);
    let mut checks = Vec::new();
    let mut orbit_coeffs = Vec::new();
    if orbit_order > 0 {
        let orbit = det_from_traces(&shift_traces(&p.weight, orbit_order)?, orbit_order)?;
        let worst = (0..=orbit_order)
            .map(|n| (closed.coeff(n) - orbit.coeff(n)).norm())
            .fold(0.0, f64::max);
        checks.push(CheckLine::new(
            "zeta.orbit-route",
            Status::from_bool(worst <= tol),
            Some(tol),
            format!("closed form vs orbit sums to degree {orbit_order}, max error {worst:.3e}"),
        ));
        orbit_coeffs = orbit.coeffs().to_vec();
    }
    let rows = closed.coeffs().iter().enumerate().map(|(n, c)| {
        let (ore, oim) = orbit_coeffs
            .get(n)
            .map_or((String::new(), String::new()), |o| (format_f64(o.re), format_f64(o.im)));
        vec![n.to_string(), format_f64(c.re), format_f64(c.im), ore, oim]
    });
    let csv = csv_text(&["n", "re", "im", "re_orbit", "im_orbit"], rows)?;
    let data = json!({
        "order": p.order,
        "orbit_order": orbit_order,
        "coefficients": closed.coeffs().iter().map(|&c| complex_json(c)).collect::<Vec<_>>(),
    });
    Ok(RunOutput { checks, csv: Some(csv), data })
}

fn det(p: &DetParams, tol: f64) -> anyhow::Result<RunOutput> {
    let model = HorseshoeModel::new(p.weight.clone(), p.cutoff)?;
    let expanded = model.determinant(p.order)?;
    let via_traces = model.determinant_from_traces(p.order)?;
    let worst = (0..=p.order)
        .map(|n| (expanded.coeff(n) - via_traces.coeff(n)).norm() / expanded.coeff(n).norm().max(1.0))
        .fold(0.0, f64::max);
    let truncation = model.truncation_bound(&expanded)?;
    let checks = vec![CheckLine::new(
        "det.product-routes",
        Status::from_bool(worst <= tol),
        Some(tol),
        format!(
            "direct expansion vs trace domain to degree {}, max scaled error {worst:.3e}; omitted factors bound {truncation:.3e}",
            p.order
        ),
    )];
    let rows = expanded
        .coeffs()
        .iter()
        .enumerate()
        .map(|(n, c)| vec![n.to_string(), format_f64(c.re), format_f64(c.im)]);
    let csv = csv_text(&["n", "re", "im"], rows)?;
    let data = json!({
        "cutoff": p.cutoff,
        "order": p.order,
        "truncation_bound": truncation,
        "coefficients": expanded.coeffs().iter().map(|&c| complex_json(c)).collect::<Vec<_>>(),
    });
    Ok(RunOutput { checks, csv: Some(csv), data })
}

fn resonances(p: &ResonanceParams, tol: f64) -> anyhow::Result<RunOutput> {
    let cutoff = p.cutoff.unwrap_or_else(|| default_cutoff(p.radius, tol));
    let model = HorseshoeModel::new(p.weight.clone(), cutoff)?;
    let set = model.resonances(p.radius, tol, p.zeta_order)?;
    let count = model.zero_count(p.radius)?;
    let total = set.total_multiplicity();
    let listed: Vec<String> = set
        .zeros()
        .iter()
        .map(|z| format!("({}, {})", format_zero(z.zero), z.multiplicity))
        .collect();
    let checks = vec![CheckLine::new(
        "resonances.contour-count",
        Status::from_bool(count == total as i64),
        Some(tol),
        format!(
            "{} in |z| <= {}: argument principle {count}, multiplicities {total}",
            if listed.is_empty() { "resonance set empty".to_string() } else { listed.join(" ") },
            p.radius
        ),
    )];
    let mut buf = Vec::new();
    set.write_csv(&mut buf)?;
    let data = json!({ "cutoff": cutoff, "contour_count": count, "resonances": set });
    Ok(RunOutput { checks, csv: Some(String::from_utf8(buf)?), data })
}

/// Real zeros print as plain numbers, others as `re+imi`.
fn format_zero(z: Complex64) -> String {
    if z.im.abs() <= 1e-12 * z.norm() {
        format!("{:.10}", z.re)
    } else {
        format!("{:.10}{:+.10}i", z.re, z.im)
    }
}

fn trace_check(p: &TraceCheckParams, tol: f64) -> anyhow::Result<RunOutput> {
    let model = HorseshoeModel::new(p.weight.clone(), p.cutoff)?;
    let set = model.resonances(p.radius, tol, p.zeta_order)?;
    let zeros: Vec<Complex64> = set
        .zeros()
        .iter()
        .flat_map(|z| std::iter::repeat(z.zero).take(z.multiplicity))
        .collect();
    let traces = model.flat_traces(p.n_max)?;
    let local = check_local_trace_formula(&traces, &zeros, p.radius, p.n_max)?;
    let resonance_text = if set.is_empty() {
        "resonance set empty".to_string()
    } else {
        format!("{} resonances counted with multiplicity", set.total_multiplicity())
    };
    let slope = local
        .slope
        .map_or("no resolved residual beyond rounding".to_string(), |s| format!("residual slope {s:.4}"));
    let mut checks = vec![CheckLine::new(
        "trace-check.local",
        Status::from_bool(local.passes),
        Some(tol),
        format!(
            "{resonance_text}; local formula {} ({slope} at radius {})",
            if local.passes { "PASS" } else { "FAIL" },
            p.radius
        ),
    )];
    let mut global = Vec::new();
    if p.global_steps > 0 {
        let traces = model.flat_traces(p.global_steps)?;
        for n in 1..=p.global_steps {
            let step = check_global_trace_formula(&traces, &HorseshoeShells, n, 1 << 16)?;
            checks.push(CheckLine::new(
                &format!("trace-check.global.{n}"),
                Status::from_bool(step.passes),
                None,
                format!(
                    "partial sum {:.12e} against a_{n} = {:.12e}, tail {:.3e}",
                    step.partial_sum.re,
                    traces.get(n).unwrap().re,
                    step.tail_bound.unwrap_or(f64::NAN)
                ),
            ));
            global.push(step);
        }
    }
    let mut buf = Vec::new();
    local.write_csv(&mut buf)?;
    let data = json!({ "resonances": set, "local": local, "global": global });
    Ok(RunOutput { checks, csv: Some(String::from_utf8(buf)?), data })
}

fn counterexample(p: &CounterexampleParams, tol: f64) -> anyhow::Result<RunOutput> {
    let rotation = RotationSpec::golden(p.step.max(p.max_step).max(8))?;
    let start = if p.kind == SeriesKind::Logarithmic { 2 } else { 0 };
    let series = CounterexampleSeries::new(p.kind, start, rotation)?;
    let mut cuts = p.cuts.clone();
    cuts.sort_unstable();
    let mut running = 0.0;
    let mut m = start;
    let mut rows = Vec::new();
    let mut sums = Vec::new();
    for &cut in &cuts {
        while m < cut {
            running += series.inverse_zero(m).norm().powi(p.step as i32);
            m += 1;
        }
        let signed = series.trace(p.step, cut)?;
        rows.push(vec![
            cut.to_string(),
            format_f64(running),
            format_f64(signed.value.re),
            format_f64(signed.value.im),
            format_f64(signed.tail_bound),
        ]);
        sums.push((running, signed));
    }
    let overlap = sums.iter().all(|(_, a)| sums.iter().all(|(_, b)| a.overlaps(b)));
    let growth: Vec<f64> = sums.windows(2).map(|w| w[1].0 - w[0].0).collect();
    let mut checks = vec![CheckLine::new(
        "counterexample.signed-cauchy",
        Status::from_bool(overlap),
        None,
        format!("signed partial sums at {cuts:?} agree within their tails: {overlap}"),
    )];
    if !growth.is_empty() {
        checks.push(CheckLine::new(
            "counterexample.absolute-growth",
            Status::from_bool(growth.iter().all(|&g| g > tol)),
            Some(tol),
            format!("absolute partial sums grow by {growth:.1?} between cuts"),
        ));
    }
    let mut data = json!({
        "kind": p.kind,
        "step": p.step,
        "cuts": cuts,
        "absolute_sums": sums.iter().map(|s| s.0).collect::<Vec<_>>(),
        "signed_sums": sums.iter().map(|s| &s.1).collect::<Vec<_>>(),
    });
    if let Some(set) = &p.trace_set {
        let (check, detail) = trace_set_check(set, p.max_step)?;
        checks.push(check);
        data["trace_set"] = detail;
    }
    let csv = csv_text(&["cut", "abs_sum", "re_signed", "im_signed", "tail_bound"], rows)?;
    Ok(RunOutput { checks, csv: Some(csv), data })
}

fn trace_set_check(set: &BTreeSet<usize>, max_step: usize) -> anyhow::Result<(CheckLine, Value)> {
    let prescribed = prescribe_trace_formula_set(&StepSet::Finite(set.clone()), 0.1, 4.0)?;
    let zeta = zeta_inverse_series(&prescribed.realised.weight, max_step)?;
    let traces: TraceSequence = traces_from_det(&zeta)?;
    let zeros = FiniteZeros(vec![Complex64::new(0.5, 0.0)]);
    let mut passing = Vec::new();
    for n in 1..=max_step {
        if check_global_trace_formula(&traces, &zeros, n, 16)?.passes {
            passing.push(n);
        }
    }
    let expected: Vec<usize> = set.iter().copied().filter(|&n| n <= max_step).collect();
    let check = CheckLine::new(
        "counterexample.trace-set",
        Status::from_bool(passing == expected),
        None,
        format!("global formula holds on steps {passing:?} of 1..={max_step}, prescribed {expected:?}"),
    );
    let detail = json!({
        "alphas": prescribed.realised.alphas,
        "scale": prescribed.scale,
        "passing_steps": passing,
    });
    Ok((check, detail))
}

fn nuclear(p: &NuclearParams, tol: f64) -> anyhow::Result<RunOutput> {
    let ruse = ruse_coefficients(p.theta, p.beta, p.order)?;
    let count = stretched_cutoff(p.theta, p.beta)?;
    let model = SingularValueModel::closed_form(1.0, p.theta, p.beta, count)?;
    let diagonal = diagonal_det_coefficients(&model, p.order)?;
    let worst = (0..=p.order)
        .map(|n| (diagonal.coeff(n).norm() - ruse[n]).abs())
        .fold(0.0, f64::max);
    let exponent = p.exponent.unwrap_or(1.0 + p.beta);
    let fit = fit_stretched_bound(&ruse[1..], exponent)?;
    let fit_status = match fit.verdict {
        Verdict::Pass => Status::Pass,
        Verdict::Fail => Status::Fail,
        Verdict::Undetermined => Status::Undetermined,
    };
    let checks = vec![
        CheckLine::new(
            "nuclear.diagonal",
            Status::from_bool(worst <= tol),
            Some(tol),
            format!("diagonal determinant vs elementary symmetric sums, max error {worst:.3e}"),
        ),
        CheckLine::new(
            "nuclear.stretched-fit",
            fit_status,
            None,
            format!(
                "hypothesis exponent {exponent}, free exponent {:.4}, R^2 {:.4}",
                fit.free_exponent, fit.r_squared
            ),
        ),
    ];
    let rows = (0..=p.order).map(|n| vec![n.to_string(), format_f64(ruse[n]), format_f64(diagonal.coeff(n).norm())]);
    let csv = csv_text(&["n", "coefficient", "diagonal"], rows)?;
    let data = json!({ "theta": p.theta, "beta": p.beta, "coefficients": ruse, "fit": fit });
    Ok(RunOutput { checks, csv: Some(csv), data })
}

fn gevrey(p: &GevreyParams, seed: Option<u64>, tol: f64) -> anyhow::Result<RunOutput> {
    let mut checks = Vec::new();
    let mut data = json!({});
    let mut csv = None;
    if let Some(profile) = &p.profile {
        let f = match profile.family {
            ProfileKind::Gaussian => GevreyProfile::gaussian(profile.sigma.unwrap_or(2.0))?,
            ProfileKind::Bump => GevreyProfile::bump(profile.exponent.unwrap_or(1.0))?,
            ProfileKind::Indicator => GevreyProfile::indicator()?,
        };
        let condition = gevrey_condition_check(&f, MAX_DERIVATIVE_ORDER)?;
        let decay = fourier_decay_check(&f)?;
        let expect_gevrey = profile.family != ProfileKind::Indicator;
        // the indicator is the control: its derivative bound must fail
        checks.push(CheckLine::new(
            "gevrey.derivatives",
            Status::from_bool(condition.passes == expect_gevrey),
            None,
            match condition.radius {
                Some(r) => format!("derivative bounds hold with R = {r:.4}"),
                None => format!("derivative bound fails at order {:?}", condition.failed_order),
            },
        ));
        let (status, detail) = match decay.verdict {
            DecayVerdict::Pass => (Status::Pass, format!("fitted exponent {:.4}", decay.fitted_exponent)),
            DecayVerdict::Fail => (Status::Fail, format!("fitted exponent {:.4} below {:.4}", decay.fitted_exponent, decay.threshold)),
            DecayVerdict::Undetermined => (Status::Undetermined, format!("only {} points over {:.2} decades", decay.points, decay.decades)),
            // algebraic decay is the expected outcome for a non-Gevrey profile
            DecayVerdict::NonGevrey => (
                Status::from_bool(!expect_gevrey),
                format!("not Gevrey: algebraic tail slope {:.3}", decay.tail_slope),
            ),
        };
        checks.push(CheckLine::new("gevrey.fourier-decay", status, None, detail));
        data["condition"] = serde_json::to_value(&condition)?;
        data["decay"] = serde_json::to_value(&decay)?;
    }
    if let Some(part) = &p.partition {
        let extent = (part.bands as f64 + 1.0).powf(part.alpha) + 1.0;
        let bands = build_band_partition(part.alpha, part.bands, extent)?;
        let r = &bands.report;
        checks.push(CheckLine::new(
            "gevrey.partition",
            Status::from_bool(r.max_sum_error <= tol && r.supports_ok),
            Some(tol),
            format!(
                "sum error {:.1e} over {} grid points, supports ok {}, at most {} bands overlap",
                r.max_sum_error, r.grid_points, r.supports_ok, r.max_overlap
            ),
        ));
        let mut header = vec!["rho".to_string()];
        header.extend((0..=part.bands).map(|n| format!("psi_{n}")));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows = bands.table(part.stride).into_iter().map(|row| row.into_iter().map(format_f64).collect());
        csv = Some(csv_text(&header, rows)?);
        data["partition"] = serde_json::to_value(r)?;
    }
    if let Some(cd) = &p.cone_distance {
        let seed = seed.ok_or_else(|| anyhow::anyhow!("seed required for cone sampling"))?;
        let report = cone_distance_check(cd.plus.into(), cd.minus.into(), cd.samples, seed)?;
        checks.push(CheckLine::new(
            "gevrey.cone-distance",
            Status::from_bool(report.violations == 0),
            Some(1e-9),
            format!(
                "mu {:.6}, min ratio {:.6} over {} samples, {} violations",
                report.mu, report.min_ratio, report.samples, report.violations
            ),
        ));
        data["cone_distance"] = serde_json::to_value(&report)?;
    }
    if let Some(h) = &p.hyperbolicity {
        let m = h.matrix;
        let matrix = Matrix2::new(m[0][0], m[0][1], m[1][0], m[1][1]);
        let cones = ConeFamily::nested(0.0, 4, 2.0, 2.0, 1.2, 0.6)?;
        let report = cone_hyperbolicity_check(&matrix, &cones, &cones, h.samples)?;
        checks.push(CheckLine::new(
            "gevrey.cone-hyperbolicity",
            Status::from_bool(report.holds()),
            None,
            format!(
                "inclusion {}, expansion {} ({:.4}), contraction {} ({:.4}), lambda {:.4}",
                report.inclusion,
                report.expansion,
                report.expansion_factor,
                report.contraction,
                report.contraction_factor,
                report.lambda
            ),
        ));
        data["hyperbolicity"] = serde_json::to_value(&report)?;
    }
    Ok(RunOutput { checks, csv, data })
}
