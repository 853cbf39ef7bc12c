//! Determinants whose trace formulas converge only conditionally, and
//! weights prescribing where the global trace formula holds.
//!
//! The rotation angle is stored as a 64-bit fixed-point fraction so that
//! phases `frac(m n θ)` are exact for every index, however large.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::horseshoe::{shell_multiplicity, shell_scale};
use crate::series::{det_from_traces, PowerSeries, TraceSequence};
use crate::shift::WeightSpec;
use crate::textio::format_f64;

const TWO_POW_64: f64 = 18446744073709551616.0;

/// Number of circle samples used for Cauchy coefficients.
pub const CIRCLE_SAMPLES: usize = 1 << 12;

/// Number of `h` coefficients emitted by the constructions.
pub const EMITTED_COEFFS: usize = 40;

/// Taylor order used for the series whose tails determine `h`.
const EXPANSION_ORDER: usize = 4 * EMITTED_COEFFS;

/// Largest exponent `j` tried for start indices `2^j`.
pub const START_EXPONENT_CAP: u32 = 64;

/// An irrational-looking rotation `θ` with a certified Diophantine constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationSpec {
    theta: f64,
    fixed: u64,
    constant: f64,
    verified_horizon: usize,
}

impl RotationSpec {
    /// Certifies `n² |1 - e^{2πinθ}| ≥ c` for `1 ≤ n ≤ horizon`.
    pub fn new(theta: f64, horizon: usize) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidParameter(format!("theta {theta} not in (0, 1)")));
        }
        let fixed = (theta * TWO_POW_64).round() as u64;
        let mut spec = Self {
            theta,
            fixed,
            constant: 0.0,
            verified_horizon: horizon,
        };
        spec.constant = spec.scan_constant(horizon)?;
        Ok(spec)
    }

    /// The fractional part of the golden ratio, `(√5 - 1) / 2`.
    pub fn golden(horizon: usize) -> Result<Self> {
        Self::new((5f64.sqrt() - 1.0) / 2.0, horizon)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn verified_horizon(&self) -> usize {
        self.verified_horizon
    }

    /// `frac(k θ)` computed exactly on the fixed-point angle.
    pub fn phase(&self, k: u64) -> f64 {
        k.wrapping_mul(self.fixed) as f64 / TWO_POW_64
    }

    /// `e^{2πi m n θ}`.
    pub fn rotation(&self, m: u64, n: usize) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI * self.phase(m.wrapping_mul(n as u64)))
    }

    /// `|1 - e^{2πinθ}|`.
    pub fn gap(&self, n: usize) -> f64 {
        (Complex64::new(1.0, 0.0) - self.rotation(1, n)).norm()
    }

    fn scan_constant(&self, horizon: usize) -> Result<f64> {
        if horizon == 0 {
            return Err(Error::InvalidParameter("horizon must be at least 1".into()));
        }
        let mut best = f64::INFINITY;
        for n in 1..=horizon {
            if self.phase(n as u64) == 0.0 {
                return Err(Error::Domain(format!(
                    "rotation by {} is periodic with period {n}",
                    self.theta
                )));
            }
            best = best.min((n * n) as f64 * self.gap(n));
        }
        Ok(best)
    }

    fn check_step(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.verified_horizon {
            return Err(Error::Precondition(format!(
                "step {n} outside the certified range 1..={}",
                self.verified_horizon
            )));
        }
        Ok(())
    }
}

/// `min_{1≤n≤H} n² |1 - e^{2πinθ}|`.
pub fn diophantine_constant(theta: f64, horizon: usize) -> Result<f64> {
    Ok(RotationSpec::new(theta, horizon)?.constant)
}

/// A partial sum with a bound on the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifiedSum {
    pub value: Complex64,
    pub tail_bound: f64,
}

impl CertifiedSum {
    /// True when the two enclosures intersect.
    pub fn overlaps(&self, other: &Self) -> bool {
        (self.value - other.value).norm() <= self.tail_bound + other.tail_bound
    }
}

/// Summation by parts: `Σ_{m<horizon} b_m c_m` with tail bound
/// `2 M c_horizon`, where `M` bounds every partial sum of `b` and `c` is
/// positive and decreasing.
pub fn abel_sum<B, C>(b: B, c: C, partial_bound: f64, horizon: usize) -> Result<CertifiedSum>
where
    B: Fn(usize) -> Complex64,
    C: Fn(usize) -> f64,
{
    let mut value = Complex64::new(0.0, 0.0);
    let mut prev = f64::INFINITY;
    for m in 0..=horizon {
        let cm = c(m);
        if !(cm > 0.0) || cm > prev {
            return Err(Error::Precondition(format!(
                "weights not positive and decreasing at index {m}"
            )));
        }
        prev = cm;
        if m < horizon {
            value += b(m) * cm;
        }
    }
    Ok(CertifiedSum {
        value,
        tail_bound: 2.0 * partial_bound * c(horizon),
    })
}

/// The two conditional-convergence constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeriesKind {
    /// Inverse zeros `e^{2πimθ} / ln m`, all of distinct modulus.
    #[serde(rename = "a")]
    Logarithmic,
    /// Inverse zeros `e^{2πimθ} / ln(k(m) + 2)`, constant modulus on the
    /// factorial blocks `k! < m ≤ (k+1)!`.
    #[serde(rename = "b")]
    Factorial,
}

/// Block index: 0 for `m ≤ 1`, otherwise the `k` with `k! < m ≤ (k+1)!`.
pub fn block_index(m: u64) -> usize {
    let mut k = 1usize;
    let mut upper = 2u64;
    if m <= 1 {
        return 0;
    }
    while m > upper {
        k += 1;
        upper = upper.saturating_mul(k as u64 + 1);
    }
    k
}

/// First index of block `k`.
pub fn block_start(k: usize) -> u64 {
    if k == 0 {
        0
    } else {
        (1..=k as u64).product::<u64>() + 1
    }
}

/// Traces `a_n = Σ_{m ≥ start} u_m^n` of one of the constructions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleSeries {
    pub kind: SeriesKind,
    pub start: u64,
    pub rotation: RotationSpec,
}

impl CounterexampleSeries {
    pub fn new(kind: SeriesKind, start: u64, rotation: RotationSpec) -> Result<Self> {
        if kind == SeriesKind::Logarithmic && start < 2 {
            return Err(Error::InvalidParameter("logarithmic series starts at m ≥ 2".into()));
        }
        Ok(Self { kind, start, rotation })
    }

    fn log_modulus(&self, m: u64) -> f64 {
        match self.kind {
            SeriesKind::Logarithmic => (m as f64).ln(),
            SeriesKind::Factorial => (block_index(m) as f64 + 2.0).ln(),
        }
    }

    /// `u_m = e^{2πimθ} / ℓ(m)`; the zeros of the determinant are `1/u_m`.
    pub fn inverse_zero(&self, m: u64) -> Complex64 {
        self.rotation.rotation(m, 1) / self.log_modulus(m)
    }

    /// Zeros `1/u_m` for `start ≤ m < end`, in index order.
    pub fn zeros(&self, end: u64) -> Vec<Complex64> {
        (self.start..end).map(|m| self.inverse_zero(m).inv()).collect()
    }

    /// `Σ_{start ≤ m < m0} u_m^n` with the summation-by-parts bound
    /// `(4/c) n² / ℓ(m0)^n` on the rest, `ℓ` the log modulus.
    pub fn trace(&self, n: usize, m0: u64) -> Result<CertifiedSum> {
        self.rotation.check_step(n)?;
        if m0 < self.start.max(2) {
            return Err(Error::Precondition(format!("truncation {m0} below the start index")));
        }
        let value = (self.start..m0)
            .map(|m| self.rotation.rotation(m, n) * self.log_modulus(m).powi(-(n as i32)))
            .sum();
        let tail_bound =
            4.0 / self.rotation.constant * (n * n) as f64 * self.log_modulus(m0).powi(-(n as i32));
        Ok(CertifiedSum { value, tail_bound })
    }

    /// Like [`trace`](Self::trace) with the first summation-by-parts term of
    /// the tail added, leaving a second-order remainder.
    ///
    /// For the logarithmic kind, `Σ_{m≥m0} w^m g_m = (w^{m0} g_{m0} - R)/(1-w)`
    /// with `|R| ≤ 4 (g_{m0} - g_{m0+1}) / |1-w|` by convexity of `g`. For
    /// the factorial kind the current block is summed in closed form.
    pub fn trace_refined(&self, n: usize, m0: u64) -> Result<CertifiedSum> {
        self.rotation.check_step(n)?;
        if m0 < self.start.max(3) {
            return Err(Error::Precondition(format!("truncation {m0} below the start index")));
        }
        let one = Complex64::new(1.0, 0.0);
        let w = self.rotation.rotation(1, n);
        let gap = (one - w).norm();
        let head = self.trace_head(n, m0);
        match self.kind {
            SeriesKind::Logarithmic => {
                let l = (m0 as f64).ln();
                let g = l.powi(-(n as i32));
                let lead = self.rotation.rotation(m0, n) * g / (one - w);
                // g_m - g_{m+1} ≤ -g'(m) = n / (m ln(m)^{n+1})
                let step = n as f64 / (m0 as f64 * l.powi(n as i32 + 1));
                Ok(CertifiedSum {
                    value: head + lead,
                    tail_bound: 4.0 * step / (gap * gap),
                })
            }
            SeriesKind::Factorial => {
                let k = block_index(m0);
                let end = block_start(k + 1);
                let g = ((k as f64) + 2.0).ln().powi(-(n as i32));
                let block = (self.rotation.rotation(m0, n) - self.rotation.rotation(end, n)) * g
                    / (one - w);
                let next = ((k as f64) + 3.0).ln().powi(-(n as i32));
                Ok(CertifiedSum {
                    value: head + block,
                    tail_bound: 4.0 * next / gap,
                })
            }
        }
    }

    fn trace_head(&self, n: usize, m0: u64) -> Complex64 {
        (self.start..m0)
            .map(|m| self.rotation.rotation(m, n) * self.log_modulus(m).powi(-(n as i32)))
            .sum()
    }
}

/// `h` coefficients produced by a construction, with the governing bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealisedWeight {
    pub weight: WeightSpec,
    pub alphas: Vec<f64>,
    /// `max_ℓ |α_ℓ| ρ^ℓ`.
    pub max_scaled_alpha: f64,
    /// Bound on the change of `max_ℓ |α_ℓ| ρ^ℓ` from uncertain inputs.
    pub uncertainty: f64,
    pub eps: f64,
    pub rho: f64,
}

/// Output of [`realise_as_h`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealisedCounterexample {
    pub realised: RealisedWeight,
    pub start: u64,
    /// Symmetrized traces `a_n + conj(a_n)` of the scaled-out factor.
    pub symmetric_traces: Vec<f64>,
    pub lambda: f64,
    /// `f(1)` of the constructed function; the construction targets `-1`.
    pub value_at_one: f64,
}

const TRACE_TERMS: usize = 64;
const EXPLICIT_TERMS: u64 = 4096;

/// Realises a construction as `1 - 2z - z(1-z)h(z)` with
/// `|α_ℓ| ≤ eps / ρ^ℓ` for the first [`EMITTED_COEFFS`] coefficients.
///
/// Start indices `2^j` are tried in increasing order up to
/// [`START_EXPONENT_CAP`].
pub fn realise_as_h(
    kind: SeriesKind,
    rotation: RotationSpec,
    eps: f64,
    rho: f64,
) -> Result<RealisedCounterexample> {
    check_eps_rho(eps, rho)?;
    if rotation.verified_horizon < TRACE_TERMS {
        return Err(Error::Precondition(format!(
            "rotation certified to {} steps, {TRACE_TERMS} needed",
            rotation.verified_horizon
        )));
    }
    let mut best = f64::INFINITY;
    for j in 1..=START_EXPONENT_CAP {
        let start = if j == 64 { u64::MAX - EXPLICIT_TERMS } else { 1u64 << j };
        let series = CounterexampleSeries::new(kind, start.max(2), rotation)?;
        let m0 = series.start + EXPLICIT_TERMS;
        if series.log_modulus(series.start) <= 1.5 * rho {
            continue;
        }
        let mut values = Vec::with_capacity(TRACE_TERMS);
        let mut tails = Vec::with_capacity(TRACE_TERMS);
        for n in 1..=TRACE_TERMS {
            let t = series.trace_refined(n, m0)?;
            values.push(2.0 * t.value.re);
            tails.push(2.0 * t.tail_bound);
        }
        // omitted steps, from the first-order bound on |a_n|
        let ratio = rho / series.log_modulus(series.start);
        let truncation: f64 = (TRACE_TERMS + 1..TRACE_TERMS + 200)
            .map(|n| 8.0 / rotation.constant * n as f64 * ratio.powi(n as i32))
            .sum();
        match realise_from_traces(&values, &tails, truncation, eps, rho) {
            Ok((realised, lambda, value_at_one)) => {
                return Ok(RealisedCounterexample {
                    realised,
                    start: series.start,
                    symmetric_traces: values,
                    lambda,
                    value_at_one,
                })
            }
            Err(Error::Truncation { bound, .. }) => best = best.min(bound),
            Err(e) => return Err(e),
        }
    }
    Err(Error::Convergence(format!(
        "no start index up to 2^{START_EXPONENT_CAP} meets the bound; best max |α_ℓ| ρ^ℓ = {best:e}"
    )))
}

fn check_eps_rho(eps: f64, rho: f64) -> Result<()> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    if !(rho >= 2.0) {
        return Err(Error::InvalidParameter("rho must be at least 2".into()));
    }
    Ok(())
}

/// The Cauchy-coefficient step of the construction, from the symmetrized
/// traces `s_n` of `f̃ = exp(-Σ s_n z^n / n)`.
///
/// Returns the weight, `λ = f̃(1)/(1 + f̃(1))` and `f(1)` for
/// `f = (1 - z/λ) f̃`. Fails with [`Error::Truncation`] when the bound is
/// missed.
pub fn realise_from_traces(
    traces: &[f64],
    trace_tails: &[f64],
    truncation: f64,
    eps: f64,
    rho: f64,
) -> Result<(RealisedWeight, f64, f64)> {
    check_eps_rho(eps, rho)?;
    let log_f = |z: Complex64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &s) in traces.iter().enumerate().rev() {
            acc = acc * z + s / (i + 1) as f64;
        }
        -acc * z
    };
    let perturb = |r: f64| -> f64 {
        trace_tails
            .iter()
            .enumerate()
            .map(|(i, t)| t * r.powi(i as i32 + 1) / (i + 1) as f64)
            .sum::<f64>()
            + truncation
    };
    let one = Complex64::new(1.0, 0.0);
    let f1 = log_f(one).exp().re;
    if !(f1.is_finite() && f1 != 0.0 && f1 != -1.0) {
        return Err(Error::Domain(format!("f̃(1) = {f1} admits no λ")));
    }
    let lambda = f1 / (1.0 + f1);
    let mut buf: Vec<Complex64> = (0..CIRCLE_SAMPLES)
        .map(|j| {
            let z = Complex64::from_polar(rho, 2.0 * PI * j as f64 / CIRCLE_SAMPLES as f64);
            let h = (log_f(z).exp() - 1.0) / z - (f1 - 1.0);
            h / (one - z)
        })
        .collect();
    let sup_f = (0..256)
        .map(|j| log_f(Complex64::from_polar(rho, 2.0 * PI * j as f64 / 256.0)).exp().norm())
        .fold(0.0, f64::max);
    FftPlanner::new().plan_fft_forward(CIRCLE_SAMPLES).process(&mut buf);
    let scaled_beta: Vec<f64> = buf
        .iter()
        .take(EMITTED_COEFFS + 1)
        .map(|x| x.re / CIRCLE_SAMPLES as f64)
        .collect();
    // β_ℓ = scaled_beta[ℓ] / ρ^ℓ
    let beta = |l: usize| scaled_beta[l] / rho.powi(l as i32);
    let mut alphas = Vec::with_capacity(EMITTED_COEFFS);
    alphas.push(-(beta(0) + (f1 * f1 - 1.0) / f1));
    for l in 0..EMITTED_COEFFS - 1 {
        // coefficients of -G(z)(1 - z/λ)
        alphas.push(-(beta(l + 1) - beta(l) / lambda));
    }
    let max_scaled_alpha = alphas
        .iter()
        .enumerate()
        .map(|(l, a)| a.abs() * rho.powi(l as i32))
        .fold(0.0, f64::max);
    let delta_circle = sup_f * (perturb(rho).exp() - 1.0);
    let delta_one = f1.abs() * (perturb(1.0).exp() - 1.0);
    let delta_g = (delta_circle / rho + delta_one) / (rho - 1.0);
    let uncertainty = delta_g * (1.0 + rho / lambda.abs()) + delta_one * (1.0 + 1.0 / (f1 * f1));
    if max_scaled_alpha + uncertainty > eps {
        return Err(Error::Truncation {
            bound: max_scaled_alpha + uncertainty,
            tol: eps,
        });
    }
    let weight = WeightSpec::explicit(alphas.iter().map(|&a| Complex64::new(a, 0.0)).collect())?;
    let value_at_one = (1.0 - 1.0 / lambda) * f1;
    Ok((
        RealisedWeight {
            weight,
            alphas,
            max_scaled_alpha,
            uncertainty,
            eps,
            rho,
        },
        lambda,
        value_at_one,
    ))
}

/// `h` coefficients of `1 - 2z - z(1-z)h(z) = f(z)` from the Taylor
/// coefficients of `f`, which must satisfy `f(0) = 1` and `f(1) = -1`.
///
/// With `g = (f - 1 + 2z)/z`, `h_ℓ = -Σ_{j≤ℓ} g_j = Σ_{j>ℓ} g_j` because
/// `g(1) = 0`. The suffix form is used: prefix sums would carry the rounding
/// residue of `g(1)` into every coefficient, which the `ρ^ℓ` scaling then
/// amplifies.
fn h_from_f(f: &PowerSeries, count: usize) -> Vec<Complex64> {
    let g = |j: usize| f.coeff(j + 1) + if j == 0 { 2.0 } else { 0.0 };
    let top = f.order();
    let mut suffix = vec![Complex64::new(0.0, 0.0); top + 1];
    for j in (0..top).rev() {
        suffix[j] = suffix[j + 1] + g(j);
    }
    (0..count).map(|l| suffix[l + 1]).collect()
}

/// Coefficients of `(1 - slope z) f(z)`, same order as `f`.
fn linear_times(f: &PowerSeries, slope: f64) -> Result<PowerSeries> {
    PowerSeries::new(
        (0..=f.order())
            .map(|i| f.coeff(i) - if i > 0 { slope * f.coeff(i - 1) } else { Complex64::new(0.0, 0.0) })
            .collect(),
    )
}

fn scaled_max(alphas: &[Complex64], rho: f64) -> f64 {
    alphas
        .iter()
        .enumerate()
        .map(|(l, a)| a.norm() * rho.powi(l as i32))
        .fold(0.0, f64::max)
}

/// A set of positive integers described finitely.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "values")]
pub enum StepSet {
    Finite(BTreeSet<usize>),
    /// Every positive integer except the listed ones.
    Cofinite(BTreeSet<usize>),
    /// `n` with `n mod period` among the residues.
    Periodic { period: usize, residues: BTreeSet<usize> },
}

impl StepSet {
    pub fn contains(&self, n: usize) -> bool {
        match self {
            StepSet::Finite(s) => s.contains(&n),
            StepSet::Cofinite(s) => !s.contains(&n),
            StepSet::Periodic { period, residues } => residues.contains(&(n % period)),
        }
    }

    /// Start of a final segment contained in the set, if any.
    fn final_segment(&self) -> Option<usize> {
        match self {
            StepSet::Finite(_) => None,
            StepSet::Cofinite(s) => Some(s.iter().max().map_or(1, |m| m + 1)),
            StepSet::Periodic { period, residues } => {
                ((0..*period).all(|r| residues.contains(&r))).then_some(1)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            StepSet::Finite(s) | StepSet::Cofinite(s) if s.contains(&0) => {
                Err(Error::InvalidParameter("steps start at 1".into()))
            }
            StepSet::Periodic { period: 0, .. } => {
                Err(Error::InvalidParameter("period must be positive".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Output of [`prescribe_trace_formula_set`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrescribedTraceSet {
    pub realised: RealisedWeight,
    /// Taylor coefficients `q_1, q_2, ...` of `Q`; `q_n = 0` exactly on the
    /// set.
    pub q_coeffs: Vec<f64>,
    pub scale: f64,
    pub polynomial_branch: bool,
}

/// Coefficients `q_1..q_len` of an entire `Q` with `Q(0) = Q(1) = 0` and
/// `q_n = 0` exactly for `n` in the set.
pub fn trace_set_q_coeffs(set: &StepSet, len: usize) -> Result<(Vec<f64>, bool)> {
    set.validate()?;
    if let Some(end) = set.final_segment() {
        let outside: Vec<usize> = (1..end).filter(|&n| !set.contains(n)).collect();
        let mut q = vec![0.0; len];
        match outside.len() {
            0 => {}
            1 => {
                return Err(Error::InvalidParameter(format!(
                    "cannot leave only step {} outside: the coefficients of Q sum to Q(1) = 0",
                    outside[0]
                )))
            }
            k => {
                for (i, &n) in outside.iter().enumerate() {
                    let v = if i + 1 == k { -((k - 1) as f64) } else { 1.0 };
                    if n <= len {
                        q[n - 1] = v;
                    }
                }
            }
        }
        return Ok((q, true));
    }
    // Q = z(1-z) Σ b_n z^n, so q_1 = b_0 and q_{n+1} = b_n - b_{n-1}
    let next_outside = |n: usize| (n..).find(|&l| !set.contains(l + 2)).unwrap();
    let reciprocal_factorial = |l: usize| 1.0 / (1..=l + 1).map(|j| j as f64).product::<f64>();
    let mut b = Vec::with_capacity(len);
    b.push(if set.contains(1) { 0.0 } else { reciprocal_factorial(next_outside(0)) });
    for n in 1..len {
        let v = if set.contains(n + 1) {
            b[n - 1]
        } else {
            reciprocal_factorial(next_outside(n))
        };
        b.push(v);
    }
    let mut q = Vec::with_capacity(len);
    q.push(b[0]);
    for n in 1..len {
        q.push(b[n] - b[n - 1]);
    }
    Ok((q, false))
}

/// Weight whose determinant `(1 - 2z) e^{a Q(z)}` satisfies the global trace
/// formula at step `n` exactly when `n` is in the set.
pub fn prescribe_trace_formula_set(set: &StepSet, eps: f64, rho: f64) -> Result<PrescribedTraceSet> {
    check_eps_rho(eps, rho)?;
    let len = EXPANSION_ORDER;
    let (q, polynomial_branch) = trace_set_q_coeffs(set, len)?;
    let mut scale = 1.0;
    for _ in 0..200 {
        let traces: Vec<Complex64> = q
            .iter()
            .enumerate()
            .map(|(i, &v)| Complex64::new(-((i + 1) as f64) * scale * v, 0.0))
            .collect();
        let exp_q = det_from_traces(&TraceSequence::exact(traces), len)?;
        let f = linear_times(&exp_q, 2.0)?;
        let alphas = h_from_f(&f, EMITTED_COEFFS);
        let max_scaled_alpha = scaled_max(&alphas, rho);
        if max_scaled_alpha <= eps {
            let real: Vec<f64> = alphas.iter().map(|a| a.re).collect();
            return Ok(PrescribedTraceSet {
                realised: RealisedWeight {
                    weight: WeightSpec::explicit(real.iter().map(|&a| a.into()).collect())?,
                    alphas: real,
                    max_scaled_alpha,
                    uncertainty: 0.0,
                    eps,
                    rho,
                },
                q_coeffs: q,
                scale,
                polynomial_branch,
            });
        }
        scale /= 2.0;
    }
    Err(Error::Convergence("no scale meets the coefficient bound".into()))
}

/// Sampled target counting function `N0(r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountingTable {
    pub radii: Vec<f64>,
    pub counts: Vec<f64>,
}

impl CountingTable {
    pub fn from_fn<F: Fn(f64) -> f64>(radii: Vec<f64>, f: F) -> Self {
        let counts = radii.iter().map(|&r| f(r)).collect();
        Self { radii, counts }
    }

    fn validate(&self) -> Result<()> {
        if self.radii.is_empty() || self.radii.len() != self.counts.len() {
            return Err(Error::InvalidParameter("counting table is empty or ragged".into()));
        }
        if self.radii.iter().any(|r| !(*r > 0.0)) || self.counts.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("counting table has invalid entries".into()));
        }
        Ok(())
    }
}

/// Real zero sequences for [`prescribe_zero_density`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "values")]
pub enum ZeroLaw {
    /// `z_m = e^{√m}`.
    ExpSqrt,
    /// Increasing positive zeros.
    Explicit(Vec<f64>),
}

impl ZeroLaw {
    fn zeros_up_to(&self, limit: f64) -> Result<Vec<f64>> {
        match self {
            ZeroLaw::ExpSqrt => Ok((0..)
                .map(|m| (m as f64).sqrt().exp())
                .take_while(|&z| z <= limit)
                .collect()),
            ZeroLaw::Explicit(z) => {
                if z.windows(2).any(|w| w[1] < w[0]) || z.iter().any(|x| !(*x > 0.0)) {
                    return Err(Error::InvalidParameter("zeros must be positive and increasing".into()));
                }
                Ok(z.iter().copied().take_while(|&x| x <= limit).collect())
            }
        }
    }
}

/// Counts at one sampled radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensitySample {
    pub r: f64,
    pub target: f64,
    /// Zeros of `f` with modulus below `1/(16 r)`.
    pub zeta_count: u64,
    /// Zeros of the horseshoe determinant with modulus below `1/r`.
    pub determinant_count: u64,
}

/// Output of [`prescribe_zero_density`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrescribedDensity {
    pub realised: RealisedWeight,
    pub first_index: usize,
    pub zeros: Vec<f64>,
    pub genus_exponents: Vec<usize>,
    pub samples: Vec<DensitySample>,
    /// `min_r determinant_count / N0(r)` over samples with positive target.
    pub margin: f64,
}

/// Exponent of the Weierstrass factor attached to the `m`-th zero; the
/// factors satisfy `|E(z, p) - 1| ≤ 2^{-p}` on `|z| ≤ 1/2`.
pub fn factor_exponent(m: usize) -> usize {
    (2.0 * ((m + 2) as f64).log2()).ceil() as usize
}

/// Weight whose inverse zeta function is `(1 - z/λ) P(z)` with
/// `P(z) = Π_{m≥m0} E(z/z_m, p_m)` and `λ = P(1)/(1 + P(1))`, so that the
/// value is 1 at 0 and -1 at 1. The first index `m0` is raised until
/// `|α_ℓ| ≤ eps/ρ^ℓ`.
pub fn prescribe_zero_density(
    table: &CountingTable,
    law: &ZeroLaw,
    eps: f64,
    rho: f64,
    m0_cap: usize,
) -> Result<PrescribedDensity> {
    check_eps_rho(eps, rho)?;
    table.validate()?;
    let r_min = table.radii.iter().copied().fold(f64::INFINITY, f64::min);
    let zeros = law.zeros_up_to(1.0 / r_min)?;
    let order = EXPANSION_ORDER;
    let mut best = f64::INFINITY;
    for m0 in 0..=m0_cap.min(zeros.len()) {
        if zeros[m0..].first().is_some_and(|&z| z <= 1.0) {
            continue;
        }
        let kept = &zeros[m0..];
        let exps: Vec<usize> = (m0..zeros.len()).map(factor_exponent).collect();
        let traces: Vec<Complex64> = (1..=order)
            .map(|k| {
                let s: f64 = kept
                    .iter()
                    .zip(&exps)
                    .filter(|(_, &p)| p < k)
                    .map(|(z, _)| z.powi(-(k as i32)))
                    .sum();
                Complex64::new(s, 0.0)
            })
            .collect();
        let product = det_from_traces(&TraceSequence::exact(traces), order)?;
        let at_one: f64 = kept
            .iter()
            .zip(&exps)
            .map(|(&z, &p)| crate::entire::weierstrass_factor(Complex64::new(1.0 / z, 0.0), p).re)
            .product();
        let lambda = at_one / (1.0 + at_one);
        let f = linear_times(&product, 1.0 / lambda)?;
        let alphas = h_from_f(&f, EMITTED_COEFFS);
        let scaled = scaled_max(&alphas, rho);
        best = best.min(scaled);
        if scaled <= eps {
            let samples = density_samples(table, lambda, kept);
            let margin = samples
                .iter()
                .filter(|s| s.target > 0.0)
                .map(|s| s.determinant_count as f64 / s.target)
                .fold(f64::INFINITY, f64::min);
            let real: Vec<f64> = alphas.iter().map(|a| a.re).collect();
            return Ok(PrescribedDensity {
                realised: RealisedWeight {
                    weight: WeightSpec::explicit(real.iter().map(|&a| a.into()).collect())?,
                    alphas: real,
                    max_scaled_alpha: scaled,
                    uncertainty: 0.0,
                    eps,
                    rho,
                },
                first_index: m0,
                zeros: kept.to_vec(),
                genus_exponents: exps,
                samples,
                margin,
            });
        }
    }
    Err(Error::Convergence(format!(
        "first index capped at {m0_cap}; best max |α_ℓ| ρ^ℓ = {best:e}"
    )))
}

fn density_samples(table: &CountingTable, lambda: f64, zeros: &[f64]) -> Vec<DensitySample> {
    let zeta_zeros: Vec<f64> = std::iter::once(lambda).chain(zeros.iter().copied()).collect();
    table
        .radii
        .iter()
        .zip(&table.counts)
        .map(|(&r, &target)| {
            let zeta_count = zeta_zeros.iter().filter(|&&z| z < 1.0 / (16.0 * r)).count() as u64;
            let mut determinant_count = 0;
            let mut k = 0;
            while shell_scale(k) / r > zeta_zeros[0].min(1.0) {
                let bound = shell_scale(k) / r;
                determinant_count +=
                    shell_multiplicity(k) * zeta_zeros.iter().filter(|&&z| z < bound).count() as u64;
                k += 1;
            }
            DensitySample {
                r,
                target,
                zeta_count,
                determinant_count,
            }
        })
        .collect()
}

/// Jump data for one factorial block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockJump {
    pub block: usize,
    /// The step whose divergence this block is arranged to witness.
    pub witness_step: usize,
    /// Indices of the block whose phase lands in `[0, ε]`.
    pub count: usize,
    /// Real part of the reordered partial sum gain after those indices.
    pub jump: f64,
    pub lower_bound: f64,
    pub holds: bool,
}

/// Natural and reordered partial sums of `Σ u_m^n` for the factorial
/// construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReorderDemo {
    pub step: usize,
    pub natural: Vec<Complex64>,
    pub reordered: Vec<Complex64>,
    pub jumps: Vec<BlockJump>,
    /// Every natural-order increment after a block start stays within the
    /// summation-by-parts bound.
    pub natural_within_bounds: bool,
}

impl ReorderDemo {
    /// CSV with columns `m, re_s, im_s, order`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "m,re_s,im_s,order")?;
        for (tag, traj) in [("natural", &self.natural), ("reordered", &self.reordered)] {
            for (m, s) in traj.iter().enumerate() {
                writeln!(out, "{m},{},{},{tag}", format_f64(s.re), format_f64(s.im))?;
            }
        }
        Ok(())
    }
}

/// Width of the phase window; `cos(2π x) ≥ 1/2` on `[0, 1/6]`.
pub const PHASE_WINDOW: f64 = 1.0 / 6.0;

/// Enumeration `1, 1, 2, 1, 2, 3, ...` hitting every positive integer
/// infinitely often.
pub fn witness_step(block: usize) -> usize {
    let mut k = block;
    let mut group = 1;
    while k >= group {
        k -= group;
        group += 1;
    }
    k + 1
}

pub const MAX_DEMO_BLOCKS: usize = 8;

/// Builds both trajectories over blocks `0..=k_max`.
pub fn reorder_divergence_demo(step: usize, k_max: usize, rotation: RotationSpec) -> Result<ReorderDemo> {
    if step == 0 {
        return Err(Error::InvalidParameter("step must be positive".into()));
    }
    if k_max > MAX_DEMO_BLOCKS {
        return Err(Error::Resource(format!("at most {MAX_DEMO_BLOCKS} blocks")));
    }
    let series = CounterexampleSeries::new(SeriesKind::Factorial, 0, rotation)?;
    let end = block_start(k_max + 1);
    let term = |m: u64| series.inverse_zero(m).powu(step as u32);
    let mut natural = Vec::with_capacity(end as usize);
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 0..end {
        acc += term(m);
        natural.push(acc);
    }
    let mut reordered = Vec::with_capacity(end as usize);
    let mut jumps = Vec::new();
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..=k_max {
        let witness = witness_step(k);
        let (first, rest): (Vec<u64>, Vec<u64>) = (block_start(k)..block_start(k + 1))
            .partition(|&m| rotation.phase(m.wrapping_mul(witness as u64)) <= PHASE_WINDOW);
        let before = acc;
        for (i, &m) in first.iter().chain(&rest).enumerate() {
            acc += term(m);
            reordered.push(acc);
            if i + 1 == first.len() && witness == step {
                let jump = acc.re - before.re;
                let lower_bound =
                    first.len() as f64 / (2.0 * ((k + 2) as f64).ln().powi(step as i32));
                jumps.push(BlockJump {
                    block: k,
                    witness_step: witness,
                    count: first.len(),
                    jump,
                    lower_bound,
                    holds: jump >= lower_bound * (1.0 - 1e-12),
                });
            }
        }
        if first.is_empty() && witness == step {
            jumps.push(BlockJump {
                block: k,
                witness_step: witness,
                count: 0,
                jump: 0.0,
                lower_bound: 0.0,
                holds: true,
            });
        }
    }
    let gap = rotation.gap(step);
    let mut natural_within_bounds = true;
    for k in 0..=k_max {
        let s = block_start(k) as usize;
        let base = if s == 0 { Complex64::new(0.0, 0.0) } else { natural[s - 1] };
        let g = ((k + 2) as f64).ln().powi(-(step as i32));
        let bound = 4.0 * g / gap;
        let worst = natural[s..].iter().map(|x| (x - base).norm()).fold(0.0, f64::max);
        natural_within_bounds &= worst <= bound * (1.0 + 1e-9);
    }
    Ok(ReorderDemo {
        step,
        natural,
        reordered,
        jumps,
        natural_within_bounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::traces_from_det;
    use crate::shift::zeta_inverse_series;
    use approx::assert_abs_diff_eq;

    fn golden() -> RotationSpec {
        RotationSpec::golden(10_000).unwrap()
    }

    #[test]
    fn rational_rotation_is_rejected() {
        assert!(matches!(diophantine_constant(0.5, 2), Err(Error::Domain(_))));
        assert!(diophantine_constant(0.5, 1).is_ok());
    }

    #[test]
    fn golden_constant_stabilizes() {
        let small = diophantine_constant(golden().theta(), 10).unwrap();
        let large = golden().constant();
        assert!(large > 0.0);
        assert!(large <= small);
        assert_abs_diff_eq!(large, diophantine_constant(golden().theta(), 1000).unwrap(), epsilon = 1e-12);
        // the scan at small horizons is attained at n = 1
        assert_abs_diff_eq!(small, golden().gap(1), epsilon = 1e-12);
    }

    #[test]
    fn fixed_point_phase_is_exact_for_huge_indices() {
        let r = golden();
        let big = 1u64 << 60;
        let a = r.phase(big);
        let b = r.phase(big - 1);
        let d = (a - b - r.phase(1)).rem_euclid(1.0);
        assert!(d < 1e-15 || d > 1.0 - 1e-15);
    }

    #[test]
    fn abel_alternating_harmonic() {
        let s = abel_sum(
            |m| Complex64::new(if m % 2 == 0 { 1.0 } else { -1.0 }, 0.0),
            |m| 1.0 / (m + 1) as f64,
            1.0,
            10_000,
        )
        .unwrap();
        assert!((s.value.re - 2f64.ln()).abs() <= s.tail_bound);
        assert!(s.value.norm() <= 2.0);
    }

    #[test]
    fn abel_rotation_tail_shrinks() {
        let r = golden();
        let bound = 2.0 / r.gap(1);
        let run = |h| {
            abel_sum(|m| r.rotation(m as u64, 1), |m| 1.0 / ((m + 2) as f64).ln(), bound, h).unwrap()
        };
        let (a, b) = (run(1000), run(100_000));
        assert!(b.tail_bound < a.tail_bound);
        assert!(a.overlaps(&b));
    }

    #[test]
    fn abel_rejects_increasing_weights() {
        assert!(abel_sum(|_| Complex64::new(1.0, 0.0), |m| m as f64 + 1.0, 1.0, 3).is_err());
    }

    #[test]
    fn block_layout() {
        assert_eq!(block_index(0), 0);
        assert_eq!(block_index(1), 0);
        assert_eq!(block_index(2), 1);
        assert_eq!(block_index(3), 2);
        assert_eq!(block_index(6), 2);
        assert_eq!(block_index(7), 3);
        assert_eq!(block_start(3), 7);
        assert_eq!(block_start(4), 25);
    }

    #[test]
    fn truncations_overlap() {
        let s = CounterexampleSeries::new(SeriesKind::Logarithmic, 2, golden()).unwrap();
        let a = s.trace(4, 1_000_000).unwrap();
        let b = s.trace(4, 2_000_000).unwrap();
        assert!(a.overlaps(&b));
        assert_abs_diff_eq!(
            a.tail_bound,
            4.0 / golden().constant() * 16.0 / 1e6f64.ln().powi(4),
            epsilon = 1e-15
        );
        let r = s.trace_refined(4, 1_000_000).unwrap();
        assert!(r.tail_bound < a.tail_bound);
        assert!(r.overlaps(&a) && r.overlaps(&b));
    }

    #[test]
    fn factorial_kind_refinement_overlaps() {
        let s = CounterexampleSeries::new(SeriesKind::Factorial, 0, golden()).unwrap();
        let a = s.trace(1, 100).unwrap();
        let b = s.trace_refined(1, 100).unwrap();
        let c = s.trace(1, 5041).unwrap();
        assert!(a.overlaps(&b) && b.overlaps(&c));
    }

    #[test]
    fn degenerate_traces_give_zero_weight() {
        let (w, lambda, at_one) = realise_from_traces(&[0.0; 8], &[0.0; 8], 0.0, 0.1, 4.0).unwrap();
        assert!(w.alphas.iter().all(|a| a.abs() < 1e-15));
        assert_abs_diff_eq!(lambda, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(at_one, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn realised_counterexample_meets_bound() {
        let out = realise_as_h(SeriesKind::Logarithmic, golden(), 0.1, 4.0).unwrap();
        let r = &out.realised;
        assert!(r.max_scaled_alpha + r.uncertainty <= 0.1);
        for (l, a) in r.alphas.iter().enumerate() {
            assert!(a.abs() <= 0.1 / 4f64.powi(l as i32));
            assert!(*a != -1.0);
        }
        assert_abs_diff_eq!(out.value_at_one, -1.0, epsilon = 1e-8);
        // the inverse zeta series reproduces the traces of (1 - z/λ) f̃
        let zeta = zeta_inverse_series(&r.weight, 12).unwrap();
        let t = traces_from_det(&zeta).unwrap();
        for n in 1..=12 {
            let expected = out.symmetric_traces[n - 1] + out.lambda.powi(-(n as i32));
            assert!((t.get(n).unwrap().re - expected).abs() <= 1e-9 * expected.abs().max(1.0), "{n}");
        }
    }

    #[test]
    fn trace_set_recursion() {
        let (q, poly) = trace_set_q_coeffs(&StepSet::Finite([2].into()), 8).unwrap();
        assert!(!poly);
        assert!(q[0] != 0.0 && q[1] == 0.0 && q[2] != 0.0);
        let (q, _) = trace_set_q_coeffs(&StepSet::Finite(BTreeSet::new()), 12).unwrap();
        assert!(q.iter().all(|&v| v != 0.0));
        let (q, _) = trace_set_q_coeffs(&StepSet::Finite([2, 4].into()), 12).unwrap();
        for n in 1..=12 {
            assert_eq!(q[n - 1] == 0.0, n == 2 || n == 4, "{n}");
        }
    }

    #[test]
    fn trace_set_everything_is_zero_weight() {
        let p = prescribe_trace_formula_set(&StepSet::Cofinite(BTreeSet::new()), 0.1, 4.0).unwrap();
        assert!(p.polynomial_branch);
        assert!(p.realised.alphas.iter().all(|&a| a == 0.0));
    }

    #[test]
    fn trace_set_single_exception_is_impossible() {
        assert!(trace_set_q_coeffs(&StepSet::Cofinite([3].into()), 8).is_err());
        let (q, _) = trace_set_q_coeffs(&StepSet::Cofinite([3, 5].into()), 8).unwrap();
        assert_eq!(q.iter().sum::<f64>(), 0.0);
        assert!(q[2] != 0.0 && q[4] != 0.0);
    }

    #[test]
    fn prescribed_weight_meets_bound_and_traces() {
        let p = prescribe_trace_formula_set(&StepSet::Finite([2, 4].into()), 0.1, 4.0).unwrap();
        assert!(p.realised.max_scaled_alpha <= 0.1);
        let zeta = zeta_inverse_series(&p.realised.weight, 8).unwrap();
        let t = traces_from_det(&zeta).unwrap();
        for n in 1..=8 {
            // traces of (1 - 2z) e^{aQ} are 2^n - n a q_n
            let expected = 2f64.powi(n as i32) - n as f64 * p.scale * p.q_coeffs[n - 1];
            assert_abs_diff_eq!(t.get(n).unwrap().re, expected, epsilon = 1e-9);
        }
    }

    #[test]
    fn zero_density_trivial_target() {
        let table = CountingTable::from_fn(vec![1e-2, 1e-4, 1e-6], |_| 0.0);
        let p = prescribe_zero_density(&table, &ZeroLaw::ExpSqrt, 0.1, 4.0, 64).unwrap();
        assert!(p.realised.max_scaled_alpha <= 0.1);
    }

    #[test]
    fn zero_density_log_target() {
        let radii: Vec<f64> = (2..=8).map(|e| 10f64.powi(-e)).collect();
        let table = CountingTable::from_fn(radii, |r: f64| r.ln().abs());
        let p = prescribe_zero_density(&table, &ZeroLaw::ExpSqrt, 0.1, 4.0, 64).unwrap();
        for s in &p.samples {
            assert!(s.determinant_count as f64 > s.target, "{s:?}");
        }
        // the zeta count grows like ln(1/16r)^2 while the target grows like ln(1/r)
        let ratios: Vec<f64> = p.samples.iter().map(|s| s.target / s.zeta_count.max(1) as f64).collect();
        assert!(ratios.last().unwrap() < &ratios[0]);
        // inverse zeta series reproduces f near the origin
        let zeta = zeta_inverse_series(&p.realised.weight, 6).unwrap();
        assert_abs_diff_eq!(zeta.coeff(0).re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn witness_enumeration() {
        let v: Vec<usize> = (0..10).map(witness_step).collect();
        assert_eq!(v, vec![1, 1, 2, 1, 2, 3, 1, 2, 3, 4]);
    }

    #[test]
    fn reorder_demo_jumps() {
        let d = reorder_divergence_demo(1, 8, golden()).unwrap();
        assert!(d.jumps.iter().all(|j| j.holds));
        // small blocks hold too few indices for monotone growth; the bound
        // at the last witnessing block dominates all earlier ones
        let bounds: Vec<f64> = d.jumps.iter().map(|j| j.lower_bound).collect();
        let last = *bounds.last().unwrap();
        assert!(bounds[..bounds.len() - 1].iter().all(|&b| 10.0 * b < last), "{bounds:?}");
        assert!(d.natural_within_bounds);
        assert_eq!(d.natural.len(), d.reordered.len());
        // both orders cover the same terms
        let (a, b) = (d.natural.last().unwrap(), d.reordered.last().unwrap());
        assert!((a - b).norm() < 1e-8 * a.norm().max(1.0));
    }

    #[test]
    fn reorder_demo_cap() {
        assert!(reorder_divergence_demo(1, 9, golden()).is_err());
    }
}
