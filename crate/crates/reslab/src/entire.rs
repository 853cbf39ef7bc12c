//! Entire-function diagnostics: zero ordering, order and genus estimates,
//! Weierstrass factors, trace-formula checks and Jensen counting.

use std::cmp::Ordering;
use std::f64::consts::{LN_2, PI};
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::fit_line;
use crate::horseshoe::{shell_multiplicity, shell_scale, truncation_reliability_radius};
use crate::series::{PowerSeries, TraceSequence};
use crate::textio::format_f64;

/// Default largest exponent tried by [`estimate_genus`].
pub const DEFAULT_P_MAX: usize = 8;

/// Expands zeros by multiplicity and sorts them by modulus, then by
/// principal argument among equal moduli.
pub fn order_zeros(zeros: &[(Complex64, usize)]) -> Result<Vec<Complex64>> {
    if zeros.iter().any(|(z, _)| z.norm() == 0.0) {
        return Err(Error::Domain("zero at the origin".into()));
    }
    let mut out: Vec<Complex64> = zeros
        .iter()
        .flat_map(|&(z, m)| std::iter::repeat(z).take(m))
        .collect();
    out.sort_by(|a, b| match a.norm().total_cmp(&b.norm()) {
        Ordering::Equal => a.arg().total_cmp(&b.arg()),
        other => other,
    });
    Ok(out)
}

/// Coefficient-based order estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderEstimate {
    pub order: f64,
    /// Set when the series has too few nonzero coefficients, as for a
    /// polynomial of low degree; the order is then reported as 0.
    pub degenerate: bool,
    pub points: usize,
}

/// Estimates the order from `q_n = n ln n / ln(1/|b_n|)`.
///
/// The values over the top quartile of usable indices are regressed on
/// `1 / ln n` and the intercept is taken as the limit, since `q_n` for
/// functions of positive order approaches it at that rate.
pub fn estimate_order_from_coeffs(series: &PowerSeries) -> Result<OrderEstimate> {
    let usable: Vec<(f64, f64)> = series
        .coeffs()
        .iter()
        .enumerate()
        .skip(2)
        .filter(|(_, b)| b.norm() > 0.0 && b.norm() < 1.0)
        .map(|(n, b)| {
            let n = n as f64;
            (n, n * n.ln() / (-b.norm().ln()))
        })
        .collect();
    if usable.len() < 10 {
        return Ok(OrderEstimate {
            order: 0.0,
            degenerate: true,
            points: usable.len(),
        });
    }
    let top = &usable[3 * usable.len() / 4..];
    let xs: Vec<f64> = top.iter().map(|(n, _)| 1.0 / n.ln()).collect();
    let ys: Vec<f64> = top.iter().map(|(_, q)| *q).collect();
    let fit = fit_line(&xs, &ys)?;
    Ok(OrderEstimate {
        order: fit.intercept.max(0.0),
        degenerate: false,
        points: top.len(),
    })
}

/// Growth-based order diagnostic: slope of `ln ln M(R)` against `ln R`,
/// where `ln M(R)` is the largest sampled `ln |f|` on `|z| = R`.
pub fn order_from_growth<F>(log_abs: F, radii: &[f64]) -> Result<f64>
where
    F: Fn(Complex64) -> f64,
{
    let samples = 1024;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &r in radii {
        let top = (0..samples)
            .map(|k| log_abs(Complex64::from_polar(r, 2.0 * PI * k as f64 / samples as f64)))
            .fold(f64::NEG_INFINITY, f64::max);
        if top > 0.0 {
            xs.push(r.ln());
            ys.push(top.ln());
        }
    }
    Ok(fit_line(&xs, &ys)?.slope)
}

/// `E(u, p) = (1 - u) exp(Σ_{k=1}^p u^k / k)`.
pub fn weierstrass_factor(u: Complex64, p: usize) -> Complex64 {
    let mut power = Complex64::new(1.0, 0.0);
    let mut s = Complex64::new(0.0, 0.0);
    for k in 1..=p {
        power *= u;
        s += power / k as f64;
    }
    (Complex64::new(1.0, 0.0) - u) * s.exp()
}

/// Taylor coefficients of `Π_m E(z / z_m, p)` to degree `order`.
pub fn weierstrass_product_series(zeros: &[Complex64], p: usize, order: usize) -> Result<PowerSeries> {
    // log E(u, p) = -Σ_{k>p} u^k / k, so the product has traces Σ_m z_m^{-k} for k > p
    let values = (1..=order)
        .map(|k| {
            if k <= p {
                Complex64::new(0.0, 0.0)
            } else {
                zeros.iter().map(|z| z.inv().powu(k as u32)).sum()
            }
        })
        .collect();
    crate::series::det_from_traces(&TraceSequence::exact(values), order)
}

/// Outcome of a horizon-bounded convergence test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convergence {
    Convergent,
    Divergent,
    Undetermined,
}

/// Partial sums of `Σ |z_m|^{-s}` on a doubling grid and the verdict read
/// from their increments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentData {
    pub exponent: f64,
    /// `(M, S_M)` pairs with `M` doubling.
    pub partial_sums: Vec<(usize, f64)>,
    pub verdict: Convergence,
}

/// Doubling test on `Σ |z_m|^{-exponent}` over the first `horizon` moduli.
///
/// Increments `S_{2M} - S_M` that shrink by a factor below 0.9 at each of
/// the last three doublings read as convergent; increments that do not
/// shrink at all read as divergent. The grid must span three decades.
pub fn convergence_by_doubling(moduli: &[f64], exponent: f64) -> ExponentData {
    let mut partial = Vec::new();
    let mut s = 0.0;
    let mut next = 16usize;
    for (i, &r) in moduli.iter().enumerate() {
        s += r.powf(-exponent);
        if i + 1 == next {
            partial.push((next, s));
            next *= 2;
        }
    }
    let verdict = doubling_verdict(&partial);
    ExponentData {
        exponent,
        partial_sums: partial,
        verdict,
    }
}

fn doubling_verdict(partial: &[(usize, f64)]) -> Convergence {
    if partial.len() < 4 || partial.last().unwrap().0 < 1000 * partial[0].0 {
        return Convergence::Undetermined;
    }
    let inc: Vec<f64> = partial.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let ratios: Vec<f64> = inc
        .windows(2)
        .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 })
        .collect();
    let last = &ratios[ratios.len().saturating_sub(3)..];
    let total = partial.last().unwrap().1;
    if inc.last().copied().unwrap_or(0.0) <= f64::EPSILON * total
        || last.iter().all(|&q| q < 0.9)
    {
        Convergence::Convergent
    } else if last.iter().all(|&q| q >= 0.97) {
        Convergence::Divergent
    } else {
        Convergence::Undetermined
    }
}

/// Genus verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Genus {
    Finite(usize),
    /// Divergent for every exponent up to the stated `p_max`.
    InfiniteUpTo(usize),
    Undetermined,
}

/// Order and genus estimates with the supporting partial sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderGenusReport {
    pub order_estimate: Option<OrderEstimate>,
    pub genus_estimate: Genus,
    pub convergence_exponent_data: Vec<ExponentData>,
}

/// Smallest `p ≤ p_max` with `Σ |z_m|^{-(p+1)}` convergent over the first
/// `horizon` zeros, provided every smaller `p` is divergent.
pub fn estimate_genus<I>(zeros: I, horizon: usize, p_max: usize) -> Result<OrderGenusReport>
where
    I: IntoIterator<Item = Complex64>,
{
    let moduli: Vec<f64> = zeros.into_iter().take(horizon).map(|z| z.norm()).collect();
    if moduli.len() < 50 {
        return Err(Error::InsufficientData {
            needed: 50,
            available: moduli.len(),
        });
    }
    if moduli.iter().any(|&r| r == 0.0) {
        return Err(Error::Domain("zero at the origin".into()));
    }
    let data: Vec<ExponentData> = (0..=p_max)
        .map(|p| convergence_by_doubling(&moduli, (p + 1) as f64))
        .collect();
    let mut genus = Genus::InfiniteUpTo(p_max);
    for (p, d) in data.iter().enumerate() {
        match d.verdict {
            Convergence::Divergent => continue,
            Convergence::Convergent => {
                genus = Genus::Finite(p);
                break;
            }
            Convergence::Undetermined => {
                genus = Genus::Undetermined;
                break;
            }
        }
    }
    Ok(OrderGenusReport {
        order_estimate: None,
        genus_estimate: genus,
        convergence_exponent_data: data,
    })
}

/// One row of the local trace formula residual table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalResidual {
    pub n: usize,
    pub residual: Complex64,
    /// `|e_n| r^n`.
    pub scaled: f64,
    /// False when `|e_n|` is within the error bound of `a_n`, so that the
    /// residual carries no information.
    pub resolved: bool,
}

/// Residuals `e_n = a_n - Σ_{|z_m| < r} z_m^{-n}` and their decay verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalTraceReport {
    pub radius: f64,
    pub rows: Vec<LocalResidual>,
    /// Slope of `ln(|e_n| r^n)` against `n` over resolved residuals, absent
    /// when fewer than two are resolved.
    pub slope: Option<f64>,
    pub passes: bool,
}

impl LocalTraceReport {
    /// CSV with columns `n, re_e, im_e, e_scaled, resolved`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "n,re_e,im_e,e_scaled,resolved")?;
        for row in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                row.n,
                format_f64(row.residual.re),
                format_f64(row.residual.im),
                format_f64(row.scaled),
                row.resolved
            )?;
        }
        Ok(())
    }
}

/// Checks that `e_n r^n` decays geometrically for `n = 1..=n_max`, where
/// `r` is a zero modulus avoided by every zero.
///
/// Residuals within the error bound of their trace are left out of the fit;
/// when none remain the check passes, as for a determinant without zeros.
pub fn check_local_trace_formula(
    traces: &TraceSequence,
    zeros: &[Complex64],
    radius: f64,
    n_max: usize,
) -> Result<LocalTraceReport> {
    if traces.len() < n_max {
        return Err(Error::InsufficientData {
            needed: n_max,
            available: traces.len(),
        });
    }
    let eps = crate::horseshoe::CLUSTER_EPS;
    if let Some(z) = zeros.iter().find(|z| (z.norm() - radius).abs() <= eps * radius) {
        return Err(Error::Precondition(format!(
            "zero {z} lies on the circle of radius {radius}; try radius {}",
            radius * (1.0 + 1e3 * eps)
        )));
    }
    let inner: Vec<Complex64> = zeros.iter().filter(|z| z.norm() < radius).copied().collect();
    let rows: Vec<LocalResidual> = (1..=n_max)
        .map(|n| {
            let s: Complex64 = inner.iter().map(|z| z.inv().powu(n as u32)).sum();
            let e = traces.get(n).unwrap() - s;
            LocalResidual {
                n,
                residual: e,
                scaled: e.norm() * radius.powi(n as i32),
                resolved: e.norm() > traces.tail_bounds()[n - 1],
            }
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.resolved && r.scaled > 0.0)
        .map(|r| (r.n as f64, r.scaled.ln()))
        .unzip();
    let slope = if xs.len() >= 2 {
        Some(fit_line(&xs, &ys)?.slope)
    } else {
        None
    };
    let passes = slope.map_or(true, |s| s < 0.0);
    Ok(LocalTraceReport {
        radius,
        rows,
        slope,
        passes,
    })
}

/// An ordered zero sequence that can be sampled by index, with an optional
/// bound on the tails of `Σ |z_m|^{-n}`.
pub trait ZeroFamily {
    /// The `m`-th zero in the ordering, zero-based; `None` past the end of a
    /// finite family.
    fn zero(&self, m: usize) -> Option<Complex64>;

    /// Bound on `Σ_{m ≥ consumed} |z_m|^{-n}`, or `None` when no analytic
    /// bound is available.
    fn tail_bound(&self, n: usize, consumed: usize) -> Option<f64>;
}

/// Finitely many zeros, as for a polynomial; the tail past the end is 0.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteZeros(pub Vec<Complex64>);

impl ZeroFamily for FiniteZeros {
    fn zero(&self, m: usize) -> Option<Complex64> {
        self.0.get(m).copied()
    }

    fn tail_bound(&self, n: usize, consumed: usize) -> Option<f64> {
        Some(
            self.0
                .iter()
                .skip(consumed)
                .map(|z| z.norm().powi(-(n as i32)))
                .sum(),
        )
    }
}

/// Zeros `4^{k+2}/2` with multiplicity `C(k+3,3)` of the unweighted
/// horseshoe determinant, shell by shell.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HorseshoeShells;

impl HorseshoeShells {
    fn locate(m: usize) -> (usize, usize) {
        let mut k = 0;
        let mut start = 0usize;
        loop {
            let size = shell_multiplicity(k) as usize;
            if m < start + size {
                return (k, m - start);
            }
            start += size;
            k += 1;
        }
    }
}

impl ZeroFamily for HorseshoeShells {
    fn zero(&self, m: usize) -> Option<Complex64> {
        let (k, _) = Self::locate(m);
        Some(Complex64::new(0.5 / shell_scale(k), 0.0))
    }

    fn tail_bound(&self, n: usize, consumed: usize) -> Option<f64> {
        let (k, offset) = Self::locate(consumed);
        let unit = |k: usize| (2.0 * shell_scale(k)).powi(n as i32);
        let rest_of_shell = (shell_multiplicity(k) as usize - offset) as f64 * unit(k);
        Some(rest_of_shell + 2f64.powi(n as i32) * crate::horseshoe::omitted_weight(n, k))
    }
}

/// Verdict for one step of the global trace formula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalStep {
    pub n: usize,
    pub abs_convergence: Convergence,
    pub partial_sum: Complex64,
    /// `None` when the family has no analytic tail bound.
    pub tail_bound: Option<f64>,
    pub matches_a_n: bool,
    pub passes: bool,
}

/// Both trace formula checks for one system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFormulaReport {
    pub global: Vec<GlobalStep>,
    pub local: Option<LocalTraceReport>,
}

/// Global trace formula at step `n` over the first `horizon` zeros.
///
/// Passes when `Σ |z_m|^{-n}` reads as convergent and `a_n` lies within the
/// tail bound plus the trace's own error bound of the partial sum.
pub fn check_global_trace_formula<F: ZeroFamily + ?Sized>(
    traces: &TraceSequence,
    family: &F,
    n: usize,
    horizon: usize,
) -> Result<GlobalStep> {
    let a_n = traces.get(n).ok_or(Error::InsufficientData {
        needed: n,
        available: traces.len(),
    })?;
    let trace_tail = traces.tail_bounds()[n - 1];
    let mut partial = Complex64::new(0.0, 0.0);
    let mut moduli = Vec::new();
    let mut abs_sum = 0.0;
    let mut consumed = 0;
    while consumed < horizon {
        match family.zero(consumed) {
            Some(z) => {
                let w = z.inv().powu(n as u32);
                partial += w;
                abs_sum += w.norm();
                moduli.push(z.norm());
                consumed += 1;
            }
            None => break,
        }
    }
    let finite_and_exhausted = family.zero(consumed).is_none();
    let abs_convergence = if finite_and_exhausted {
        Convergence::Convergent
    } else {
        convergence_by_doubling(&moduli, n as f64).verdict
    };
    let tail_bound = family.tail_bound(n, consumed);
    // a priori bound for recursive summation of `consumed` terms
    let slack = (consumed + 64) as f64 * f64::EPSILON * (abs_sum + a_n.norm()) + trace_tail;
    let matches_a_n = match tail_bound {
        Some(t) => (a_n - partial).norm() <= t + slack,
        None => false,
    };
    Ok(GlobalStep {
        n,
        abs_convergence,
        partial_sum: partial,
        tail_bound,
        matches_a_n,
        passes: matches_a_n && abs_convergence == Convergence::Convergent,
    })
}

/// Jensen-type upper bound `ceil((2/ln 2) sup_{|z|=2/r} log⁺|f|)` on the
/// number of zeros with `|z| < 1/r`, sampled at 4096 points.
pub fn jensen_bound<F>(log_abs: F, r: f64) -> u64
where
    F: Fn(Complex64) -> f64,
{
    let samples = 4096;
    let radius = 2.0 / r;
    let top = (0..samples)
        .map(|k| log_abs(Complex64::from_polar(radius, 2.0 * PI * k as f64 / samples as f64)))
        .fold(0.0, f64::max);
    (2.0 / LN_2 * top).ceil() as u64
}

/// [`jensen_bound`] applied to a truncated series, which must be reliable on
/// `|z| = 2/r`.
pub fn jensen_count(series: &PowerSeries, r: f64) -> Result<u64> {
    let reliable = truncation_reliability_radius(series, 1e-12);
    if 2.0 / r > reliable {
        return Err(Error::Precondition(format!(
            "circle of radius {} exceeds the certified radius {reliable:.6e}",
            2.0 / r
        )));
    }
    Ok(jensen_bound(|z| series.eval(z).norm().ln(), r))
}
