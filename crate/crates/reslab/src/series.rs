//! Truncated complex power series and the exp/log link between trace
//! sequences and determinants.
//!
//! A determinant `d(z) = exp(-Σ a_n z^n / n)` is stored as its Taylor
//! coefficients `b_0 = 1, b_1, ..., b_N`. The traces `a_n` live in a
//! [`TraceSequence`] together with a per-entry absolute error bound.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truncated power series `b_0 + b_1 z + ... + b_N z^N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSeries {
    coeffs: Vec<Complex64>,
}

impl PowerSeries {
    /// Builds a series from its coefficients. At least one coefficient is
    /// required and all of them must be finite.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter("empty coefficient list".into()));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Domain("non-finite coefficient".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// The constant series 1 truncated at `order`.
    pub fn one(order: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); order + 1];
        coeffs[0] = Complex64::new(1.0, 0.0);
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn coeff(&self, n: usize) -> Complex64 {
        self.coeffs.get(n).copied().unwrap_or_default()
    }

    /// True when the constant term is exactly one.
    pub fn is_normalized(&self) -> bool {
        self.coeffs[0] == Complex64::new(1.0, 0.0)
    }

    /// Drops or zero-pads coefficients so the order becomes `order`.
    pub fn truncate(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order + 1, Complex64::new(0.0, 0.0));
        Self { coeffs }
    }

    /// Cauchy product truncated at the smaller of the two orders.
    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let coeffs = (0..=order)
            .map(|n| (0..=n).map(|k| self.coeffs[k] * other.coeffs[n - k]).sum())
            .collect();
        Self { coeffs }
    }

    /// Horner evaluation of the truncated polynomial.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Coefficients of `f(c z)`.
    pub fn scale_argument(&self, c: f64) -> Self {
        let mut p = 1.0;
        let coeffs = self
            .coeffs
            .iter()
            .map(|&b| {
                let out = b * p;
                p *= c;
                out
            })
            .collect();
        Self { coeffs }
    }

    /// `self^m` by repeated squaring, truncated at the current order.
    pub fn pow(&self, mut m: u64) -> Self {
        let mut result = Self::one(self.order());
        let mut base = self.clone();
        while m > 0 {
            if m & 1 == 1 {
                result = result.mul(&base);
            }
            m >>= 1;
            if m > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Expands `Π_j (1 - z / z_j)` to degree `order`.
    pub fn from_zeros(zeros: &[Complex64], order: usize) -> Result<Self> {
        let mut out = Self::one(order);
        for &zj in zeros {
            if zj.norm() == 0.0 {
                return Err(Error::Domain("zero at the origin".into()));
            }
            let factor = {
                let mut c = vec![Complex64::new(0.0, 0.0); order + 1];
                c[0] = Complex64::new(1.0, 0.0);
                if order >= 1 {
                    c[1] = -zj.inv();
                }
                Self { coeffs: c }
            };
            out = out.mul(&factor);
        }
        Ok(out)
    }
}

/// Flat-trace values `a_1..a_N` with absolute error bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSequence {
    values: Vec<Complex64>,
    tail_bounds: Vec<f64>,
}

impl TraceSequence {
    /// Pairs values with bounds. Lengths must agree and bounds must be
    /// non-negative.
    pub fn new(values: Vec<Complex64>, tail_bounds: Vec<f64>) -> Result<Self> {
        if values.len() != tail_bounds.len() {
            return Err(Error::InvalidParameter(format!(
                "{} values but {} bounds",
                values.len(),
                tail_bounds.len()
            )));
        }
        if tail_bounds.iter().any(|b| !(*b >= 0.0)) {
            return Err(Error::InvalidParameter("negative or NaN tail bound".into()));
        }
        Ok(Self {
            values,
            tail_bounds,
        })
    }

    /// Values known exactly (zero tail bounds).
    pub fn exact(values: Vec<Complex64>) -> Self {
        let tail_bounds = vec![0.0; values.len()];
        Self {
            values,
            tail_bounds,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn tail_bounds(&self) -> &[f64] {
        &self.tail_bounds
    }

    /// The trace `a_n`, one-based.
    pub fn get(&self, n: usize) -> Option<Complex64> {
        n.checked_sub(1).and_then(|i| self.values.get(i).copied())
    }

    /// Termwise sum, keeping the shorter length and adding bounds.
    pub fn add(&self, other: &Self) -> Self {
        let len = self.len().min(other.len());
        Self {
            values: (0..len).map(|i| self.values[i] + other.values[i]).collect(),
            tail_bounds: (0..len)
                .map(|i| self.tail_bounds[i] + other.tail_bounds[i])
                .collect(),
        }
    }
}

/// Coefficients of `exp(-Σ a_n z^n / n)` up to degree `order`.
///
/// ```
/// use num_complex::Complex64;
/// use reslab::series::{det_from_traces, TraceSequence};
///
/// let traces = TraceSequence::exact((1..=4).map(|n| Complex64::new(2f64.powi(n), 0.0)).collect());
/// let det = det_from_traces(&traces, 4).unwrap();
/// assert!((det.coeff(1) + 2.0).norm() < 1e-14);
/// assert!(det.coeff(2).norm() < 1e-14);
/// ```
pub fn det_from_traces(traces: &TraceSequence, order: usize) -> Result<PowerSeries> {
    if traces.len() < order {
        return Err(Error::InsufficientData {
            needed: order,
            available: traces.len(),
        });
    }
    let a = traces.values();
    let mut b = Vec::with_capacity(order + 1);
    b.push(Complex64::new(1.0, 0.0));
    for n in 1..=order {
        let s: Complex64 = (1..=n).map(|k| a[k - 1] * b[n - k]).sum();
        b.push(-s / n as f64);
    }
    PowerSeries::new(b)
}

/// Inverse of [`det_from_traces`]: the traces `a_1..a_N` of a normalized
/// series.
pub fn traces_from_det(series: &PowerSeries) -> Result<TraceSequence> {
    if !series.is_normalized() {
        return Err(Error::Normalization(format!("{}", series.coeff(0))));
    }
    let b = series.coeffs();
    let order = series.order();
    let mut a: Vec<Complex64> = Vec::with_capacity(order);
    for n in 1..=order {
        let s: Complex64 = (1..n).map(|k| a[k - 1] * b[n - k]).sum();
        a.push(-b[n] * n as f64 - s);
    }
    Ok(TraceSequence::exact(a))
}

/// Coefficients of `Π_k f(c_k z)^{m_k}` up to degree `order`, computed in the
/// trace domain: the traces of the product are `a_n Σ_k m_k c_k^n`.
pub fn scaled_power_product(
    f: &PowerSeries,
    scales: &[f64],
    exponents: &[u64],
    order: usize,
) -> Result<PowerSeries> {
    if scales.len() != exponents.len() {
        return Err(Error::InvalidParameter(
            "scales and exponents differ in length".into(),
        ));
    }
    if let Some(c) = scales.iter().find(|c| !(**c > 0.0)) {
        return Err(Error::Domain(format!("scale {c} is not positive")));
    }
    let base = traces_from_det(&f.truncate(order))?;
    let values = base
        .values()
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let n = (i + 1) as i32;
            let weight: f64 = scales
                .iter()
                .zip(exponents)
                .map(|(&c, &m)| m as f64 * c.powi(n))
                .sum();
            a * weight
        })
        .collect();
    det_from_traces(&TraceSequence::exact(values), order)
}

/// Same product as [`scaled_power_product`], expanded by truncated Cauchy
/// products of the factors `f(c_k z)` raised by repeated squaring.
///
/// The trace-domain recursion measures coefficient errors against
/// `max |a_k b_{n-k}|`, which swamps coefficients far below the geometric
/// scale of the first trace. Direct expansion keeps them accurate when the
/// factors have no internal cancellation, so it serves as the primary route
/// and the trace-domain one as its cross-check.
pub fn scaled_power_product_expanded(
    f: &PowerSeries,
    scales: &[f64],
    exponents: &[u64],
    order: usize,
) -> Result<PowerSeries> {
    if scales.len() != exponents.len() {
        return Err(Error::InvalidParameter(
            "scales and exponents differ in length".into(),
        ));
    }
    if let Some(c) = scales.iter().find(|c| !(**c > 0.0)) {
        return Err(Error::Domain(format!("scale {c} is not positive")));
    }
    if !f.is_normalized() {
        return Err(Error::Normalization(format!("{}", f.coeff(0))));
    }
    let base = f.truncate(order);
    let mut out = PowerSeries::one(order);
    for (&c, &m) in scales.iter().zip(exponents) {
        out = out.mul(&base.scale_argument(c).pow(m));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn geometric_traces_give_linear_factor() {
        let t = TraceSequence::exact((1..=6).map(|n| c(2f64.powi(n), 0.0)).collect());
        let d = det_from_traces(&t, 6).unwrap();
        assert_eq!(d.coeff(0), c(1.0, 0.0));
        assert_abs_diff_eq!(d.coeff(1).re, -2.0, epsilon = 1e-14);
        for n in 2..=6 {
            assert!(d.coeff(n).norm() < 1e-12);
        }
    }

    #[test]
    fn single_trace_gives_exponential() {
        let mut v = vec![c(0.0, 0.0); 8];
        v[0] = c(0.0, -std::f64::consts::PI);
        let d = det_from_traces(&TraceSequence::exact(v), 8).unwrap();
        let ipi = c(0.0, std::f64::consts::PI);
        let mut expected = c(1.0, 0.0);
        for n in 0..=8 {
            if n > 0 {
                expected = expected * ipi / n as f64;
            }
            assert!((d.coeff(n) - expected).norm() < 1e-13);
        }
    }

    #[test]
    fn unit_traces_give_one_minus_z() {
        let d = det_from_traces(&TraceSequence::exact(vec![c(1.0, 0.0); 5]), 5).unwrap();
        assert_abs_diff_eq!(d.coeff(1).re, -1.0, epsilon = 1e-15);
        for n in 2..=5 {
            assert!(d.coeff(n).norm() < 1e-15);
        }
    }

    #[test]
    fn too_few_traces_is_an_error() {
        let t = TraceSequence::exact(vec![c(1.0, 0.0); 3]);
        assert!(matches!(
            det_from_traces(&t, 4),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn lucas_traces() {
        let s = PowerSeries::from_real(&[1.0, -1.0, -1.0, 0.0, 0.0, 0.0]).unwrap();
        let t = traces_from_det(&s).unwrap();
        // power sums of the reciprocal zeros of 1 - z - z^2, i.e. of phi and -1/phi
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        for n in 1..=5 {
            let lucas = phi.powi(n as i32) + (-1.0 / phi).powi(n as i32);
            assert_abs_diff_eq!(t.get(n).unwrap().re, lucas, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(t.get(1).unwrap().re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.get(2).unwrap().re, 3.0, epsilon = 1e-15);
    }

    #[test]
    fn unnormalized_series_is_rejected() {
        let s = PowerSeries::from_real(&[2.0, 1.0]).unwrap();
        assert!(matches!(traces_from_det(&s), Err(Error::Normalization(_))));
    }

    #[test]
    fn square_of_linear_factor() {
        let f = PowerSeries::from_real(&[1.0, -2.0]).unwrap();
        let p = scaled_power_product(&f, &[1.0], &[2], 2).unwrap();
        assert_abs_diff_eq!(p.coeff(1).re, -4.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.coeff(2).re, 4.0, epsilon = 1e-14);
    }

    #[test]
    fn halved_argument() {
        let f = PowerSeries::from_real(&[1.0, -1.0]).unwrap();
        let p = scaled_power_product(&f, &[0.5], &[1], 3).unwrap();
        assert_abs_diff_eq!(p.coeff(1).re, -0.5, epsilon = 1e-15);
        assert!(p.coeff(2).norm() < 1e-15 && p.coeff(3).norm() < 1e-15);
    }

    #[test]
    fn horseshoe_style_product_first_coefficient() {
        // Σ_k C(k+3,3) 4^{-k} = (3/4)^{-4} = 256/81, times 2/16
        let f = PowerSeries::from_real(&[1.0, -2.0]).unwrap();
        let kmax = 40;
        let scales: Vec<f64> = (0..=kmax).map(|k| 4f64.powi(-(k + 2))).collect();
        let exps: Vec<u64> = (0..=kmax as u64)
            .map(|k| (k + 1) * (k + 2) * (k + 3) / 6)
            .collect();
        let p = scaled_power_product(&f, &scales, &exps, 3).unwrap();
        assert_abs_diff_eq!(p.coeff(1).re, -32.0 / 81.0, epsilon = 1e-13);
    }

    #[test]
    fn expanded_and_trace_routes_agree() {
        let f = PowerSeries::new(vec![c(1.0, 0.0), c(-1.5, 0.5), c(0.25, -0.75), c(0.1, 0.0)]).unwrap();
        let scales = [0.5, 0.2, 0.05];
        let exps = [1, 3, 6];
        let a = scaled_power_product(&f, &scales, &exps, 8).unwrap();
        let b = scaled_power_product_expanded(&f, &scales, &exps, 8).unwrap();
        for n in 0..=8 {
            assert!((a.coeff(n) - b.coeff(n)).norm() < 1e-13);
        }
    }

    #[test]
    fn power_by_squaring() {
        let f = PowerSeries::from_real(&[1.0, 1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let p = f.pow(5);
        for (n, binom) in [1.0, 5.0, 10.0, 10.0, 5.0, 1.0].iter().enumerate() {
            assert_eq!(p.coeff(n).re, *binom);
        }
    }

    #[test]
    fn non_positive_scale_is_rejected() {
        let f = PowerSeries::from_real(&[1.0, -2.0]).unwrap();
        assert!(matches!(
            scaled_power_product(&f, &[0.5, 0.0], &[1, 1], 2),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn trace_sequence_rejects_negative_bounds() {
        assert!(TraceSequence::new(vec![c(1.0, 0.0)], vec![-1.0]).is_err());
        assert!(TraceSequence::new(vec![c(1.0, 0.0)], vec![]).is_err());
    }
}
