//! Weighted full shift on two symbols.
//!
//! The weight is built from a coefficient sequence `α_k` through the ratios
//! `β_0 = 1 + α_0`, `β_m = (1 + α_m) / (1 + α_{m-1})`. A point whose
//! forward itinerary starts with `0^m 1` gets weight `β_m`, the all-zero
//! point gets weight 1.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{PowerSeries, TraceSequence};

/// Largest period enumerated by default.
pub const DEFAULT_ENUMERATION_CAP: usize = 24;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Closed-form coefficient generators.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    /// `α_k = -2 - Σ_{l=1}^{k+1} (iπ)^l / l!`, which makes the inverse zeta
    /// function equal to `exp(iπz)`.
    Rien,
    /// Taylor coefficients of `amplitude * ln(1 + z / radius)`.
    Log { amplitude: f64, radius: f64 },
}

impl Generator {
    fn alpha(&self, k: usize) -> Complex64 {
        match *self {
            Generator::Rien => {
                let ipi = Complex64::new(0.0, std::f64::consts::PI);
                let mut term = ONE;
                let mut sum = ZERO;
                for l in 1..=k + 1 {
                    term = term * ipi / l as f64;
                    sum += term;
                }
                -sum - 2.0
            }
            Generator::Log { amplitude, radius } => {
                if k == 0 {
                    ZERO
                } else {
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    Complex64::new(
                        amplitude * sign / (k as f64 * radius.powi(k as i32)),
                        0.0,
                    )
                }
            }
        }
    }

    /// `α_k - α_{k-1}` in closed form, avoiding the cancellation of
    /// subtracting two nearly equal partial sums.
    fn alpha_increment(&self, k: usize) -> Complex64 {
        match *self {
            Generator::Rien => {
                let ipi = Complex64::new(0.0, std::f64::consts::PI);
                let mut term = ONE;
                for l in 1..=k + 1 {
                    term = term * ipi / l as f64;
                }
                -term
            }
            Generator::Log { .. } => self.alpha(k) - self.alpha(k - 1),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Generator::Rien => "rien",
            Generator::Log { .. } => "log",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Source {
    Explicit(Vec<Complex64>),
    Named(Generator),
}

/// Coefficient sequence `α_0, α_1, ...` defining the shift weight.
///
/// Explicit lists describe a polynomial `h`: coefficients past the end of
/// the list are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightSpecRepr", into = "WeightSpecRepr")]
pub struct WeightSpec {
    source: Source,
    positive: bool,
}

impl WeightSpec {
    /// Explicit coefficients. Rejects any `α_k = -1`.
    pub fn explicit(alpha: Vec<Complex64>) -> Result<Self> {
        let spec = Self {
            source: Source::Explicit(alpha),
            positive: false,
        };
        spec.validate(spec.explicit_len().unwrap_or(0))?;
        Ok(spec)
    }

    /// The zero sequence, giving the unweighted shift.
    pub fn zero() -> Self {
        Self {
            source: Source::Explicit(Vec::new()),
            positive: false,
        }
    }

    pub fn generator(generator: Generator) -> Result<Self> {
        if let Generator::Log { radius, .. } = generator {
            if !(radius > 0.0) {
                return Err(Error::InvalidParameter("log radius must be positive".into()));
            }
        }
        Ok(Self {
            source: Source::Named(generator),
            positive: false,
        })
    }

    pub fn rien() -> Self {
        Self {
            source: Source::Named(Generator::Rien),
            positive: false,
        }
    }

    /// Requires every coefficient to be a real number above -1, checked on
    /// the first `check_len` coefficients for generators.
    pub fn with_positive(mut self, check_len: usize) -> Result<Self> {
        self.positive = true;
        self.validate(self.explicit_len().unwrap_or(check_len))?;
        Ok(self)
    }

    pub fn is_positive(&self) -> bool {
        self.positive
    }

    fn explicit_len(&self) -> Option<usize> {
        match &self.source {
            Source::Explicit(a) => Some(a.len()),
            Source::Named(_) => None,
        }
    }

    /// Checks the coefficient constraints on `α_0..α_{len-1}`.
    pub fn validate(&self, len: usize) -> Result<()> {
        for k in 0..len {
            let a = self.alpha(k);
            if a == -ONE {
                return Err(Error::Domain(format!("coefficient {k} equals -1")));
            }
            if self.positive && !(a.im == 0.0 && a.re > -1.0) {
                return Err(Error::Domain(format!(
                    "coefficient {k} = {a} is not a real number above -1"
                )));
            }
        }
        Ok(())
    }

    /// The coefficient `α_k`.
    pub fn alpha(&self, k: usize) -> Complex64 {
        match &self.source {
            Source::Explicit(a) => a.get(k).copied().unwrap_or(ZERO),
            Source::Named(g) => g.alpha(k),
        }
    }

    /// `α_k - α_{k-1}` for `k ≥ 1`.
    pub fn alpha_increment(&self, k: usize) -> Complex64 {
        match &self.source {
            Source::Named(g) => g.alpha_increment(k),
            Source::Explicit(_) => self.alpha(k) - self.alpha(k - 1),
        }
    }

    pub fn alphas(&self, len: usize) -> Vec<Complex64> {
        (0..len).map(|k| self.alpha(k)).collect()
    }

    /// A copy with `α_k` replaced, as an explicit list of length at least
    /// `len`.
    pub fn with_alpha(&self, k: usize, value: Complex64, len: usize) -> Result<Self> {
        let mut a = self.alphas(len.max(k + 1));
        a[k] = value;
        let mut spec = Self::explicit(a)?;
        spec.positive = self.positive;
        Ok(spec)
    }
}

/// Serialized form of a [`WeightSpec`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightSpecRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<serde_json::Map<String, serde_json::Value>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    positive: bool,
}

impl TryFrom<WeightSpecRepr> for WeightSpec {
    type Error = Error;

    fn try_from(r: WeightSpecRepr) -> Result<Self> {
        let spec = match (r.alpha, r.generator) {
            (Some(alpha), None) => {
                if r.params.is_some() {
                    return Err(Error::InvalidParameter(
                        "params only apply to generators".into(),
                    ));
                }
                Self::explicit(alpha.iter().map(|p| Complex64::new(p[0], p[1])).collect())?
            }
            (None, Some(name)) => {
                let params = r.params.unwrap_or_default();
                let num = |key: &str, default: Option<f64>| -> Result<f64> {
                    match params.get(key) {
                        Some(v) => v.as_f64().ok_or_else(|| {
                            Error::InvalidParameter(format!("param {key} must be a number"))
                        }),
                        None => default.ok_or_else(|| {
                            Error::InvalidParameter(format!("missing param {key}"))
                        }),
                    }
                };
                let generator = match name.as_str() {
                    "rien" => {
                        if !params.is_empty() {
                            return Err(Error::InvalidParameter(
                                "generator rien takes no params".into(),
                            ));
                        }
                        Generator::Rien
                    }
                    "log" => {
                        if let Some(k) = params.keys().find(|k| *k != "a" && *k != "rho") {
                            return Err(Error::InvalidParameter(format!("unknown param {k}")));
                        }
                        Generator::Log {
                            amplitude: num("a", None)?,
                            radius: num("rho", None)?,
                        }
                    }
                    other => {
                        return Err(Error::InvalidParameter(format!("unknown generator {other}")))
                    }
                };
                Self::generator(generator)?
            }
            _ => {
                return Err(Error::InvalidParameter(
                    "exactly one of alpha or generator is required".into(),
                ))
            }
        };
        if r.positive {
            spec.with_positive(DEFAULT_ENUMERATION_CAP + 1)
        } else {
            Ok(spec)
        }
    }
}

impl From<WeightSpec> for WeightSpecRepr {
    fn from(s: WeightSpec) -> Self {
        let mut repr = WeightSpecRepr {
            alpha: None,
            generator: None,
            params: None,
            positive: s.positive,
        };
        match s.source {
            Source::Explicit(a) => repr.alpha = Some(a.iter().map(|c| [c.re, c.im]).collect()),
            Source::Named(g) => {
                repr.generator = Some(g.name().to_string());
                if let Generator::Log { amplitude, radius } = g {
                    let mut m = serde_json::Map::new();
                    m.insert("a".into(), amplitude.into());
                    m.insert("rho".into(), radius.into());
                    repr.params = Some(m);
                }
            }
        }
        repr
    }
}

/// The ratios `β_0..β_{len-1}`.
pub fn beta_from_alpha(spec: &WeightSpec, len: usize) -> Result<Vec<Complex64>> {
    spec.validate(len)?;
    Ok((0..len)
        .map(|m| {
            if m == 0 {
                ONE + spec.alpha(0)
            } else {
                (ONE + spec.alpha(m)) / (ONE + spec.alpha(m - 1))
            }
        })
        .collect())
}

/// Weighted sum over the `2^n` points of period `n`, with the default cap.
pub fn flat_trace_shift(spec: &WeightSpec, n: usize) -> Result<Complex64> {
    flat_trace_shift_capped(spec, n, DEFAULT_ENUMERATION_CAP)
}

/// Weighted sum over period-`n` points, refusing periods above `cap`.
pub fn flat_trace_shift_capped(spec: &WeightSpec, n: usize, cap: usize) -> Result<Complex64> {
    Ok(flat_trace_shift_bounded(spec, n, cap)?.0)
}

/// Weighted sum over period-`n` points together with a bound on its
/// rounding error, `(n + terms per chunk + chunks) ε Σ |weights|` for the
/// products and the two levels of recursive summation.
pub fn flat_trace_shift_bounded(spec: &WeightSpec, n: usize, cap: usize) -> Result<(Complex64, f64)> {
    if n == 0 {
        return Err(Error::Precondition("period must be at least 1".into()));
    }
    if n > cap.min(63) {
        return Err(Error::Resource(format!(
            "period {n} exceeds the enumeration cap {cap}"
        )));
    }
    let beta = beta_from_alpha(spec, n)?;
    let words: u64 = 1 << n;
    const CHUNK: u64 = 1 << 14;
    let chunks = words.div_ceil(CHUNK);
    let partial: Vec<(Complex64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(words);
            let mut runs = vec![0usize; n];
            (start..end)
                .map(|w| word_weight(w, n, &beta, &mut runs))
                .fold((ZERO, 0.0), |(s, a), w| (s + w, a + w.norm()))
        })
        .collect();
    let (sum, abs) = partial
        .into_iter()
        .fold((ZERO, 0.0), |(s, a), (ps, pa)| (s + ps, a + pa));
    let depth = (n as u64 + CHUNK.min(words) + chunks) as f64;
    Ok((sum, depth * f64::EPSILON * abs))
}

/// `Π_j G(σ^j w)` for the periodic word with bits `w` of length `n`.
fn word_weight(w: u64, n: usize, beta: &[Complex64], runs: &mut [usize]) -> Complex64 {
    if w == 0 {
        return ONE;
    }
    let bit = |j: usize| (w >> (j % n)) & 1 == 1;
    // zeros run length starting at each position, scanning backwards from a 1
    let anchor = (0..n).find(|&j| bit(j)).unwrap();
    let mut run = 0;
    for step in 0..n {
        let j = (anchor + n - step) % n;
        if bit(j) {
            run = 0;
        } else {
            run += 1;
        }
        runs[j] = run;
    }
    runs.iter().map(|&m| beta[m]).product()
}

/// All flat traces `a_1..a_len` of the shift.
pub fn shift_traces(spec: &WeightSpec, len: usize) -> Result<TraceSequence> {
    let values = (1..=len)
        .map(|n| flat_trace_shift(spec, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(TraceSequence::exact(values))
}

/// The `(N+1) x (N+1)` transition matrix of the truncated weighted graph.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    entries: DMatrix<Complex64>,
}

impl TransitionMatrix {
    pub fn new(spec: &WeightSpec, size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::Precondition("matrix size must be positive".into()));
        }
        let beta = beta_from_alpha(spec, size)?;
        let mut m = DMatrix::from_element(size + 1, size + 1, ZERO);
        for i in 0..size {
            m[(0, i)] = beta[i];
            m[(i + 1, i)] = beta[i];
        }
        m[(0, size)] = ONE;
        m[(size, size)] = ONE;
        Ok(Self { entries: m })
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn trace_of_power(&self, k: u32) -> Complex64 {
        self.entries.pow(k).trace()
    }
}

/// `tr(P_N^k)`, valid as a flat-trace oracle when `N > k`.
pub fn matrix_trace_oracle(spec: &WeightSpec, size: usize, power: usize) -> Result<Complex64> {
    if size <= power {
        return Err(Error::Precondition(format!(
            "matrix size {size} must exceed the power {power}"
        )));
    }
    if power == 0 {
        return Err(Error::Precondition("power must be at least 1".into()));
    }
    Ok(TransitionMatrix::new(spec, size)?.trace_of_power(power as u32))
}

/// Closed form `(1 - z)(1 - Σ_{k<N} (1 + α_k) z^{k+1})` truncated at degree
/// `N`.
pub fn zeta_inverse_series(spec: &WeightSpec, order: usize) -> Result<PowerSeries> {
    spec.validate(order)?;
    // coefficient n ≥ 2 of the product is α_{n-2} - α_{n-1}
    let mut out = vec![ZERO; order + 1];
    out[0] = ONE;
    if order >= 1 {
        out[1] = -(spec.alpha(0) + 2.0);
    }
    for n in 2..=order {
        out[n] = -spec.alpha_increment(n - 1);
    }
    PowerSeries::new(out)
}

/// Pointwise value of the inverse zeta function `1 - 2w - w(1-w)h(w)` from
/// the closed form of `h`.
///
/// Explicit coefficient lists give a polynomial; `rien` gives `exp(iπw)`;
/// `log` uses the principal logarithm and is only meaningful for
/// `|w| < radius`.
pub fn zeta_inverse_value(spec: &WeightSpec, w: Complex64) -> Complex64 {
    let linear = ONE - w * 2.0;
    match &spec.source {
        Source::Explicit(alpha) => {
            let h = alpha.iter().rev().fold(ZERO, |acc, &a| acc * w + a);
            linear - w * (ONE - w) * h
        }
        Source::Named(Generator::Rien) => (w * Complex64::new(0.0, std::f64::consts::PI)).exp(),
        Source::Named(Generator::Log { amplitude, radius }) => {
            let h = (ONE + w / *radius).ln() * *amplitude;
            linear - w * (ONE - w) * h
        }
    }
}

/// Radius of the disk on which [`zeta_inverse_value`] is analytic, infinite
/// for entire cases.
pub fn zeta_inverse_analytic_radius(spec: &WeightSpec) -> f64 {
    match &spec.source {
        Source::Named(Generator::Log { radius, .. }) => *radius,
        _ => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::det_from_traces;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_weight_gives_unit_ratios() {
        let b = beta_from_alpha(&WeightSpec::zero(), 5).unwrap();
        assert!(b.iter().all(|&x| x == ONE));
    }

    #[test]
    fn ratios_from_short_list() {
        let s = WeightSpec::explicit(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let b = beta_from_alpha(&s, 2).unwrap();
        assert_eq!(b, vec![c(2.0, 0.0), c(0.5, 0.0)]);
    }

    #[test]
    fn rien_first_ratio() {
        let b = beta_from_alpha(&WeightSpec::rien(), 1).unwrap();
        assert!((b[0] - c(-1.0, -std::f64::consts::PI)).norm() < 1e-15);
    }

    #[test]
    fn minus_one_is_rejected() {
        assert!(WeightSpec::explicit(vec![c(0.0, 0.0), c(-1.0, 0.0)]).is_err());
    }

    #[test]
    fn positive_flag_rejects_complex() {
        let s = WeightSpec::explicit(vec![c(0.1, 0.1)]).unwrap();
        assert!(s.with_positive(1).is_err());
        let s = WeightSpec::explicit(vec![c(-0.5, 0.0)]).unwrap();
        assert!(s.with_positive(1).is_ok());
    }

    #[test]
    fn telescoping_product() {
        let s = WeightSpec::explicit(vec![c(0.3, -0.2), c(-0.4, 0.1), c(0.2, 0.45)]).unwrap();
        let b = beta_from_alpha(&s, 3).unwrap();
        let mut p = ONE;
        for k in 0..3 {
            p *= b[k];
            assert!((p - (ONE + s.alpha(k))).norm() < 1e-13);
        }
    }

    #[test]
    fn unweighted_traces_count_points() {
        for n in 1..=10 {
            let t = flat_trace_shift(&WeightSpec::zero(), n).unwrap();
            assert_eq!(t, c(2f64.powi(n as i32), 0.0));
        }
    }

    #[test]
    fn period_one_is_two_plus_first_coefficient() {
        let s = WeightSpec::explicit(vec![c(0.25, -0.75)]).unwrap();
        assert!((flat_trace_shift(&s, 1).unwrap() - c(2.25, -0.75)).norm() < 1e-15);
    }

    #[test]
    fn rien_traces() {
        let s = WeightSpec::rien();
        let t1 = flat_trace_shift(&s, 1).unwrap();
        assert!((t1 - c(0.0, -std::f64::consts::PI)).norm() < 1e-12);
        for n in 2..=6 {
            assert!(flat_trace_shift(&s, n).unwrap().norm() < 1e-10, "n = {n}");
        }
    }

    #[test]
    fn period_above_cap_is_refused() {
        assert!(matches!(
            flat_trace_shift_capped(&WeightSpec::zero(), 5, 4),
            Err(Error::Resource(_))
        ));
        assert!(matches!(
            flat_trace_shift(&WeightSpec::zero(), 25),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn matrix_oracle_unweighted() {
        assert!((matrix_trace_oracle(&WeightSpec::zero(), 5, 3).unwrap() - c(8.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn matrix_trace_first_power() {
        let s = WeightSpec::explicit(vec![c(1.0, 0.0)]).unwrap();
        let t = matrix_trace_oracle(&s, 4, 1).unwrap();
        assert!((t - c(3.0, 0.0)).norm() < 1e-14);
        assert!((flat_trace_shift(&s, 1).unwrap() - c(3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn matrix_oracle_needs_large_size() {
        assert!(matches!(
            matrix_trace_oracle(&WeightSpec::zero(), 3, 3),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn matrix_layout() {
        let s = WeightSpec::explicit(vec![c(1.0, 0.0), c(3.0, 0.0)]).unwrap();
        let m = TransitionMatrix::new(&s, 2).unwrap();
        let e = m.entries();
        assert_eq!(e[(0, 0)], c(2.0, 0.0));
        assert_eq!(e[(0, 1)], c(2.0, 0.0));
        assert_eq!(e[(0, 2)], ONE);
        assert_eq!(e[(1, 0)], c(2.0, 0.0));
        assert_eq!(e[(2, 1)], c(2.0, 0.0));
        assert_eq!(e[(2, 2)], ONE);
        assert_eq!(e[(1, 1)], ZERO);
    }

    #[test]
    fn closed_form_unweighted() {
        let z = zeta_inverse_series(&WeightSpec::zero(), 8).unwrap();
        assert_eq!(z.coeff(0), ONE);
        assert_eq!(z.coeff(1), c(-2.0, 0.0));
        for n in 2..=8 {
            assert_eq!(z.coeff(n), ZERO);
        }
    }

    #[test]
    fn closed_form_constant_perturbation() {
        let s = WeightSpec::explicit(vec![c(0.7, 0.0)]).unwrap();
        let z = zeta_inverse_series(&s, 5).unwrap();
        assert_abs_diff_eq!(z.coeff(1).re, -2.7, epsilon = 1e-15);
        assert_abs_diff_eq!(z.coeff(2).re, 0.7, epsilon = 1e-15);
        assert_eq!(z.coeff(3), ZERO);
    }

    #[test]
    fn rien_closed_form_is_exponential() {
        let z = zeta_inverse_series(&WeightSpec::rien(), 12).unwrap();
        let ipi = c(0.0, std::f64::consts::PI);
        let mut term = ONE;
        for n in 0..=12 {
            if n > 0 {
                term = term * ipi / n as f64;
            }
            assert!((z.coeff(n) - term).norm() < 1e-9, "n = {n}");
        }
    }

    #[test]
    fn two_routes_agree_for_log_generator() {
        let s = WeightSpec::generator(Generator::Log {
            amplitude: 0.5,
            radius: 2.0,
        })
        .unwrap();
        let closed = zeta_inverse_series(&s, 10).unwrap();
        let orbit = det_from_traces(&shift_traces(&s, 10).unwrap(), 10).unwrap();
        for n in 0..=10 {
            assert!((closed.coeff(n) - orbit.coeff(n)).norm() < 1e-10);
        }
    }

    #[test]
    fn pointwise_value_matches_series() {
        let specs = [
            WeightSpec::explicit(vec![c(0.3, 0.1), c(-0.2, 0.0), c(0.1, -0.4)]).unwrap(),
            WeightSpec::rien(),
            WeightSpec::generator(Generator::Log {
                amplitude: 0.7,
                radius: 2.0,
            })
            .unwrap(),
        ];
        let w = c(0.3, -0.4);
        for s in &specs {
            let series = zeta_inverse_series(s, 60).unwrap();
            assert!((series.eval(w) - zeta_inverse_value(s, w)).norm() < 1e-12);
        }
    }

    #[test]
    fn log_generator_coefficients() {
        let g = Generator::Log {
            amplitude: 2.0,
            radius: 0.5,
        };
        assert_eq!(g.alpha(0), ZERO);
        assert_abs_diff_eq!(g.alpha(1).re, 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.alpha(2).re, -4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.alpha(3).re, 16.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn json_forms() {
        let s: WeightSpec = serde_json::from_str(r#"{"alpha": [[0.5, 0.0], [0.0, 0.25]]}"#).unwrap();
        assert_eq!(s.alpha(1), c(0.0, 0.25));
        let s: WeightSpec = serde_json::from_str(r#"{"generator": "rien"}"#).unwrap();
        assert_eq!(s, WeightSpec::rien());
        let s: WeightSpec =
            serde_json::from_str(r#"{"generator": "log", "params": {"a": 1.0, "rho": 3.0}}"#).unwrap();
        let back: WeightSpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(s, back);
        assert!(serde_json::from_str::<WeightSpec>(r#"{"alpha": [], "extra": 1}"#).is_err());
        assert!(serde_json::from_str::<WeightSpec>(r#"{"generator": "nope"}"#).is_err());
        assert!(serde_json::from_str::<WeightSpec>(r#"{"alpha": [[-1.0, 0.0]]}"#).is_err());
    }
}
