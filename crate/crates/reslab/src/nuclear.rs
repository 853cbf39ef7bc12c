//! Coefficient bounds for determinants of operators with stretched
//! exponential singular values, and the counting arguments behind them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::entire::jensen_bound;
use crate::error::{Error, Result};
use crate::fit::{fit_line, fit_power_exponent};
use crate::series::PowerSeries;

/// Tail below which the closed-form sequence is truncated.
pub const TAIL_FLOOR: f64 = 1e-15;

/// Least `R²` accepted by the decay and growth fits.
pub const MIN_R_SQUARED: f64 = 0.98;

/// Singular values, either `C θ^{m^{1/β}}` for `m ≥ 1` or listed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum SingularValueModel {
    ClosedForm {
        scale: f64,
        theta: f64,
        beta: f64,
        count: usize,
    },
    Explicit { values: Vec<Complex64> },
}

impl SingularValueModel {
    pub fn closed_form(scale: f64, theta: f64, beta: f64, count: usize) -> Result<Self> {
        if !(scale > 0.0) || !(theta > 0.0 && theta < 1.0) || !(beta > 0.0) {
            return Err(Error::InvalidParameter(
                "closed form needs scale > 0, 0 < theta < 1, beta > 0".into(),
            ));
        }
        Ok(Self::ClosedForm {
            scale,
            theta,
            beta,
            count,
        })
    }

    /// Listed values, which must have non-increasing modulus.
    pub fn explicit(values: Vec<Complex64>) -> Result<Self> {
        if values.windows(2).any(|w| w[1].norm() > w[0].norm()) {
            return Err(Error::InvalidParameter("moduli must be non-increasing".into()));
        }
        Ok(Self::Explicit { values })
    }

    pub fn values(&self) -> Vec<Complex64> {
        match self {
            Self::ClosedForm {
                scale,
                theta,
                beta,
                count,
            } => stretched_sequence(*theta, *beta, *count)
                .into_iter()
                .map(|x| Complex64::new(scale * x, 0.0))
                .collect(),
            Self::Explicit { values } => values.clone(),
        }
    }
}

/// `θ^{m^{1/β}}` for `m = 1..=count`.
pub fn stretched_sequence(theta: f64, beta: f64, count: usize) -> Vec<f64> {
    (1..=count)
        .map(|m| theta.powf((m as f64).powf(1.0 / beta)))
        .collect()
}

/// Number of terms after which `Σ_{m>M} θ^{m^{1/β}}` drops below
/// [`TAIL_FLOOR`], judged by a geometric majorant of the remaining terms.
pub fn stretched_cutoff(theta: f64, beta: f64) -> Result<usize> {
    if !(theta > 0.0 && theta < 1.0) || !(beta > 0.0) {
        return Err(Error::InvalidParameter("need 0 < theta < 1 and beta > 0".into()));
    }
    let term = |m: usize| theta.powf((m as f64).powf(1.0 / beta));
    for m in 1..10_000_000 {
        let (a, b) = (term(m), term(m + 1));
        // for beta > 1 the ratios grow towards 1 and the geometric majorant
        // is not a bound, so the integral tail is required as well
        let tail = if b < a { b / (1.0 - b / a) } else { f64::INFINITY };
        if tail < TAIL_FLOOR && (beta <= 1.0 || integral_tail(theta, beta, m) < TAIL_FLOOR) {
            return Ok(m);
        }
    }
    Err(Error::Resource("stretched sequence decays too slowly".into()))
}

// ∫_M^∞ θ^{x^{1/β}} dx = β Γ(β, M^{1/β} ln(1/θ)) / ln(1/θ)^β
fn integral_tail(theta: f64, beta: f64, m: usize) -> f64 {
    let lam = -theta.ln();
    let x = (m as f64).powf(1.0 / beta) * lam;
    beta * statrs::function::gamma::gamma_ui(beta, x) / lam.powf(beta)
}

/// Coefficients of `Π_m (1 + θ^{m^{1/β}} z)` up to degree `order`, with
/// the product truncated once the omitted tail is below [`TAIL_FLOOR`].
///
/// The `n`-th coefficient is `Σ_{m_1<…<m_n} θ^{Σ m_j^{1/β}}`.
pub fn ruse_coefficients(theta: f64, beta: f64, order: usize) -> Result<Vec<f64>> {
    let count = stretched_cutoff(theta, beta)?;
    Ok(elementary_symmetric(&stretched_sequence(theta, beta, count), order))
}

fn elementary_symmetric(xs: &[f64], order: usize) -> Vec<f64> {
    let mut e = vec![0.0; order + 1];
    e[0] = 1.0;
    for &x in xs {
        for n in (1..=order).rev() {
            e[n] += x * e[n - 1];
        }
    }
    e
}

/// Coefficients of `Π_m (1 - λ_m z)` up to degree `order`.
pub fn diagonal_det_coefficients(model: &SingularValueModel, order: usize) -> Result<PowerSeries> {
    let mut b = vec![Complex64::new(0.0, 0.0); order + 1];
    b[0] = Complex64::new(1.0, 0.0);
    for lam in model.values() {
        for n in (1..=order).rev() {
            let prev = b[n - 1];
            b[n] -= lam * prev;
        }
    }
    PowerSeries::new(b)
}

/// Three-way verdict of a fit-based check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Undetermined,
}

/// Fit of `ln|a_n| = ln M - D n^q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StretchedFit {
    /// `D` at the hypothesised exponent.
    pub decay: f64,
    pub r_squared: f64,
    pub hypothesis: f64,
    /// Exponent maximising `R²` over `[0.25, 6]`.
    pub free_exponent: f64,
    pub verdict: Verdict,
}

fn stretched_r2(ns: &[f64], logs: &[f64], q: f64) -> Result<(f64, f64)> {
    let xs: Vec<f64> = ns.iter().map(|n| n.powf(q)).collect();
    let fit = fit_line(&xs, logs)?;
    Ok((-fit.slope, fit.r_squared))
}

/// Regresses `ln|a_n|` on `n^{exponent}` over the nonzero values, `n`
/// starting at 1, and fits the exponent freely.
pub fn fit_stretched_bound(values: &[f64], exponent: f64) -> Result<StretchedFit> {
    let (ns, logs): (Vec<f64>, Vec<f64>) = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > 0.0 && v.is_finite())
        .map(|(i, v)| ((i + 1) as f64, v.abs().ln()))
        .unzip();
    let span = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - logs.iter().copied().fold(f64::INFINITY, f64::min);
    let (decay, r_squared) = if ns.len() >= 2 {
        stretched_r2(&ns, &logs, exponent)?
    } else {
        (f64::NAN, 0.0)
    };
    if ns.len() < 10 || span < 3.0 * std::f64::consts::LN_10 {
        return Ok(StretchedFit {
            decay,
            r_squared,
            hypothesis: exponent,
            free_exponent: f64::NAN,
            verdict: Verdict::Undetermined,
        });
    }
    let (q, _) = fit_power_exponent(&ns, &logs, 0.25, 6.0)?;
    let verdict = if decay > 0.0 && r_squared >= MIN_R_SQUARED {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(StretchedFit {
        decay,
        r_squared,
        hypothesis: exponent,
        free_exponent: q,
        verdict,
    })
}

/// One row of [`preced_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecedRow {
    pub r: f64,
    /// `r ∫_{ln r}^∞ e^{-u} u^β du`.
    pub integral: f64,
    pub ratio: f64,
    pub error_estimate: f64,
}

/// Table of [`preced_check`] with its verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecedReport {
    pub beta: f64,
    pub rows: Vec<PrecedRow>,
    /// Ratios are non-increasing in `r`, hence bounded by the first.
    pub bounded: bool,
}

/// Evaluates `r ∫_{ln r}^∞ e^{-u} u^β du / (ln r)^β` for each `r ≥ 2`.
///
/// With `v = u - ln r` the integral is `∫_0^∞ e^{-v} (v + ln r)^β dv`,
/// computed by double-exponential quadrature on `[0, 50β + 40]` plus the
/// incomplete gamma tail.
pub fn preced_check(beta: f64, radii: &[f64]) -> Result<PrecedReport> {
    if !(beta >= 0.0) {
        return Err(Error::InvalidParameter("beta must be non-negative".into()));
    }
    let mut sorted = radii.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut rows = Vec::with_capacity(sorted.len());
    for r in sorted {
        if !(r >= 2.0) {
            return Err(Error::Precondition(format!("radius {r} below 2")));
        }
        let l = r.ln();
        let cut = 50.0 * beta + 40.0;
        let breaks = [0.0, 1.0, 4.0, 16.0, cut];
        let (mut body, mut error_estimate) = (0.0, 0.0);
        for w in breaks.windows(2) {
            let out = quadrature::integrate(|v| (-v).exp() * (v + l).powf(beta), w[0], w[1], 1e-15);
            body += out.integral;
            error_estimate += out.error_estimate;
        }
        let tail = l.exp() * statrs::function::gamma::gamma_ui(beta + 1.0, cut + l);
        let integral = body + tail;
        if !(error_estimate <= 1e-10 * integral) {
            return Err(Error::Convergence(format!("quadrature error {error_estimate:e} at r = {r}")));
        }
        rows.push(PrecedRow {
            r,
            integral,
            ratio: integral / l.powf(beta),
            error_estimate,
        });
    }
    let bounded = rows
        .windows(2)
        .all(|w| w[1].ratio <= w[0].ratio * (1.0 + 1e-10))
        && rows.iter().all(|row| row.ratio.is_finite());
    Ok(PrecedReport { beta, rows, bounded })
}

/// Constants `a_m ≤ C θ^{m^{1/β}}` derived from a counting bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayCertificate {
    /// Least `M` with `#{m : a_m ≥ ε} ≤ M ln(1/ε)^β` at every sampled `ε`.
    pub counting_constant: f64,
    pub theta: f64,
    pub scale: f64,
}

/// Checks `#{m : a_m ≥ ε} ≤ M ln(1/ε)^β` over `ε` ranging through the
/// sequence values below `1/e`, then returns `θ = exp(-M^{-1/β})` and the
/// least `C` with `a_m ≤ C θ^{m^{1/β}}` for every given `m ≥ 1`.
///
/// The counting hypothesis is judged violated, with the offending `ε` as
/// witness, when the ratio `count / ln(1/ε)^β` at counts above `√n` exceeds
/// twice its maximum at counts up to `√n`, for `n` sampled values.
pub fn counting_to_decay(seq: &[f64], beta: f64) -> Result<DecayCertificate> {
    if seq.windows(2).any(|w| w[1] > w[0]) || seq.iter().any(|a| !(*a > 0.0)) {
        return Err(Error::Precondition("sequence must be positive and non-increasing".into()));
    }
    let samples: Vec<(f64, f64)> = seq
        .iter()
        .enumerate()
        .filter(|(_, &a)| a < (-1.0f64).exp())
        .map(|(i, &a)| (a, (i + 1) as f64 / (1.0 / a).ln().powf(beta)))
        .collect();
    if samples.len() < 4 {
        return Err(Error::InsufficientData {
            needed: 4,
            available: samples.len(),
        });
    }
    let half = ((samples.len() as f64).sqrt().ceil() as usize).max(2);
    let head = samples[..half].iter().map(|s| s.1).fold(0.0, f64::max);
    let (witness, tail) = samples[half..]
        .iter()
        .copied()
        .fold((f64::NAN, 0.0), |acc, s| if s.1 > acc.1 { s } else { acc });
    if tail > 2.0 * head {
        return Err(Error::Precondition(format!(
            "counting bound fails: count/ln(1/ε)^β grows to {tail:.3e} at ε = {witness:.3e}"
        )));
    }
    let counting_constant = head.max(tail);
    let theta = (-counting_constant.powf(-1.0 / beta)).exp();
    let scale = seq
        .iter()
        .enumerate()
        .map(|(i, a)| a / theta.powf(((i + 1) as f64).powf(1.0 / beta)))
        .fold(1.0, f64::max);
    Ok(DecayCertificate {
        counting_constant,
        theta,
        scale,
    })
}

/// Growth and zero-counting exponents of an entire function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub radii: Vec<f64>,
    /// `max_{|z|=R} ln|f(z)|`.
    pub log_max_modulus: Vec<f64>,
    /// Slope of `ln ln M(R)` against `ln ln R`.
    pub growth_exponent: f64,
    pub growth_r_squared: f64,
    pub counting_radii: Vec<f64>,
    /// Jensen bounds on the number of zeros with `|z| < 1/r`.
    pub counts: Vec<u64>,
    /// Slope of `ln N(r)` against `ln |ln r|`.
    pub counting_exponent: f64,
    /// `max_r N(r) / |ln r|^{1+β}`.
    pub counting_ratio: f64,
    /// True when fewer radii were usable than requested.
    pub truncated: bool,
}

/// Samples `ln M(R)` on the given radii and Jensen bounds at `r = 2/R`'
/// counterparts, then fits both exponents.
pub fn growth_and_counting<F>(log_abs: F, radii: &[f64], counting_radii: &[f64], beta: f64) -> Result<GrowthReport>
where
    F: Fn(Complex64) -> f64,
{
    let samples = 2048;
    let log_max_modulus: Vec<f64> = radii
        .iter()
        .map(|&r| {
            (0..samples)
                .map(|k| log_abs(Complex64::from_polar(r, 2.0 * std::f64::consts::PI * k as f64 / samples as f64)))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let (gx, gy): (Vec<f64>, Vec<f64>) = radii
        .iter()
        .zip(&log_max_modulus)
        .filter(|(r, m)| **r > std::f64::consts::E && **m > 0.0)
        .map(|(r, m)| (r.ln().ln(), m.ln()))
        .unzip();
    let growth = fit_line(&gx, &gy)?;
    let counts: Vec<u64> = counting_radii.iter().map(|&r| jensen_bound(&log_abs, r)).collect();
    let (cx, cy): (Vec<f64>, Vec<f64>) = counting_radii
        .iter()
        .zip(&counts)
        .filter(|(r, n)| **r < 1.0 / std::f64::consts::E && **n > 0)
        .map(|(r, n)| (r.ln().abs().ln(), (*n as f64).ln()))
        .unzip();
    let counting = fit_line(&cx, &cy)?;
    let counting_ratio = counting_radii
        .iter()
        .zip(&counts)
        .map(|(r, &n)| n as f64 / r.ln().abs().powf(1.0 + beta))
        .fold(0.0, f64::max);
    Ok(GrowthReport {
        radii: radii.to_vec(),
        log_max_modulus,
        growth_exponent: growth.slope,
        growth_r_squared: growth.r_squared,
        counting_radii: counting_radii.to_vec(),
        counts,
        counting_exponent: counting.slope,
        counting_ratio,
        truncated: false,
    })
}

/// [`growth_and_counting`] for a truncated series, keeping only radii
/// inside its certified region: `R` for growth and `2/r` for counting.
pub fn growth_and_counting_check(series: &PowerSeries, radii: &[f64], counting_radii: &[f64], beta: f64) -> Result<GrowthReport> {
    let fit = fit_stretched_bound(
        &series.coeffs()[1..].iter().map(|c| c.norm()).collect::<Vec<_>>(),
        1.0 + 1.0 / beta,
    )?;
    if fit.verdict == Verdict::Fail {
        return Err(Error::Precondition(format!(
            "coefficients do not decay like exp(-D n^{{{}}})",
            1.0 + 1.0 / beta
        )));
    }
    let reliable = crate::horseshoe::truncation_reliability_radius(series, 1e-12);
    let kept: Vec<f64> = radii.iter().copied().filter(|&r| r <= reliable).collect();
    let kept_counting: Vec<f64> = counting_radii.iter().copied().filter(|&r| 2.0 / r <= reliable).collect();
    let mut report = growth_and_counting(|z| series.eval(z).norm().ln(), &kept, &kept_counting, beta)?;
    report.truncated = kept.len() < radii.len() || kept_counting.len() < counting_radii.len();
    Ok(report)
}

/// Log-spaced values from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1).max(1) as f64))
        .collect()
}
