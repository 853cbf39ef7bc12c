//! Linear horseshoe with expansion 4 in two unstable and two stable
//! directions.
//!
//! The hyperbolic factor `1/|det(I - L^n)|` is the same at every periodic
//! point, so flat traces are shift orbit sums times that factor, and the
//! dynamical determinant is the product `Π_k ζ⁻¹(c_k z)^{m_k}` with
//! `c_k = 4^{-(k+2)}` and `m_k = (k+1)(k+2)(k+3)/6`.

use std::cmp::Ordering;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::{self, AberthConfig};
use crate::series::{scaled_power_product, scaled_power_product_expanded, PowerSeries, TraceSequence};
use crate::shift::{
    flat_trace_shift, flat_trace_shift_bounded, zeta_inverse_analytic_radius, zeta_inverse_series, zeta_inverse_value,
    WeightSpec, DEFAULT_ENUMERATION_CAP,
};
use crate::textio::format_f64;

/// Expansion rate of the linear map on the horseshoe.
pub const EXPANSION: f64 = 4.0;

/// Relative clustering threshold for simple zeros.
pub const CLUSTER_EPS: f64 = 1e-6;

/// `16^n / (4^n - 1)^4`, the value of `1/|det(I - L^n)|`.
pub fn det_weight_factor(n: usize) -> f64 {
    let q = EXPANSION.powi(n as i32);
    (q * q) / (q - 1.0).powi(4)
}

/// Partial sum `16^{-n} Σ_{k≤K} C(k+3,3) 4^{-nk}` of the expansion of
/// [`det_weight_factor`].
pub fn det_weight_factor_partial(n: usize, cutoff: usize) -> f64 {
    (0..=cutoff)
        .map(|k| shell_multiplicity(k) as f64 * shell_scale(k).powi(n as i32))
        .sum()
}

/// Bound `C(K+4, 3) 4^{-n(K+1)}` on the relative error of
/// [`det_weight_factor_partial`], from `C(K+1+j+3, 3) ≤ C(K+4, 3) C(j+3, 3)`.
pub fn weight_factor_relative_tail(n: usize, cutoff: usize) -> f64 {
    shell_multiplicity(cutoff + 1) as f64 * EXPANSION.powi(-((n * (cutoff + 1)) as i32))
}

/// Multiplicity `C(k+3, 3)` of the `k`-th product factor.
pub fn shell_multiplicity(k: usize) -> u64 {
    let k = k as u64;
    (k + 1) * (k + 2) * (k + 3) / 6
}

/// Argument scale `4^{-(k+2)}` of the `k`-th product factor.
pub fn shell_scale(k: usize) -> f64 {
    EXPANSION.powi(-(k as i32 + 2))
}

/// `Σ_{k>K} m_k c_k^n`, the part of the weight factor dropped by a cutoff.
pub fn omitted_weight(n: usize, cutoff: usize) -> f64 {
    let mut total = 0.0;
    for k in cutoff + 1.. {
        let term = shell_multiplicity(k) as f64 * shell_scale(k).powi(n as i32);
        total += term;
        if term <= f64::EPSILON * total * 1e-3 || k > cutoff + 2000 {
            break;
        }
    }
    total
}

/// Weighted horseshoe with a finite number of determinant factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorseshoeModel {
    weight: WeightSpec,
    product_cutoff: usize,
}

impl HorseshoeModel {
    pub fn new(weight: WeightSpec, product_cutoff: usize) -> Result<Self> {
        if product_cutoff < 1 {
            return Err(Error::InvalidParameter("product cutoff must be at least 1".into()));
        }
        Ok(Self {
            weight,
            product_cutoff,
        })
    }

    /// Model whose cutoff is the smallest `K` with
    /// `m_K · 2 · 4^{-(K+2)} · radius < tol`.
    pub fn with_default_cutoff(weight: WeightSpec, radius: f64, tol: f64) -> Result<Self> {
        Self::new(weight, default_cutoff(radius, tol))
    }

    pub fn weight(&self) -> &WeightSpec {
        &self.weight
    }

    pub fn product_cutoff(&self) -> usize {
        self.product_cutoff
    }

    pub fn scales(&self) -> Vec<f64> {
        (0..=self.product_cutoff).map(shell_scale).collect()
    }

    pub fn multiplicities(&self) -> Vec<u64> {
        (0..=self.product_cutoff).map(shell_multiplicity).collect()
    }

    /// Flat trace at period `n`: shift orbit sum times the hyperbolic
    /// factor.
    pub fn flat_trace(&self, n: usize) -> Result<Complex64> {
        Ok(flat_trace_shift(&self.weight, n)? * det_weight_factor(n))
    }

    /// Flat traces `a_1..a_len`, each with the rounding bound of its orbit
    /// enumeration as error bound.
    pub fn flat_traces(&self, len: usize) -> Result<TraceSequence> {
        let (values, bounds): (Vec<Complex64>, Vec<f64>) = (1..=len)
            .map(|n| {
                let (t, err) = flat_trace_shift_bounded(&self.weight, n, DEFAULT_ENUMERATION_CAP)?;
                let factor = det_weight_factor(n);
                Ok((t * factor, err * factor + t.norm() * factor * 4.0 * f64::EPSILON))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .unzip();
        TraceSequence::new(values, bounds)
    }

    /// Flat traces of the truncated product, `t_n Σ_{k≤K} m_k c_k^n`, where
    /// `t_n` are the shift traces read off the closed-form inverse zeta
    /// series. Tail bounds hold the contribution of the omitted factors.
    pub fn product_traces(&self, len: usize) -> Result<TraceSequence> {
        let zeta = zeta_inverse_series(&self.weight, len)?;
        let shift = crate::series::traces_from_det(&zeta)?;
        let values = shift
            .values()
            .iter()
            .enumerate()
            .map(|(i, &t)| t * det_weight_factor_partial(i + 1, self.product_cutoff))
            .collect();
        let tails = shift
            .values()
            .iter()
            .enumerate()
            .map(|(i, &t)| t.norm() * omitted_weight(i + 1, self.product_cutoff))
            .collect();
        TraceSequence::new(values, tails)
    }

    /// Taylor coefficients of `Π_{k≤K} ζ⁻¹(c_k z)^{m_k}` to degree `order`,
    /// by direct expansion of the factors.
    pub fn determinant(&self, order: usize) -> Result<PowerSeries> {
        let zeta = zeta_inverse_series(&self.weight, order)?;
        scaled_power_product_expanded(&zeta, &self.scales(), &self.multiplicities(), order)
    }

    /// The same product computed in the trace domain, `exp(-Σ a_n z^n / n)`
    /// with `a_n = t_n Σ_k m_k c_k^n`.
    pub fn determinant_from_traces(&self, order: usize) -> Result<PowerSeries> {
        let zeta = zeta_inverse_series(&self.weight, order)?;
        scaled_power_product(&zeta, &self.scales(), &self.multiplicities(), order)
    }

    /// As [`Self::determinant`], failing when the omitted factors may move
    /// some coefficient by more than `tol`.
    pub fn determinant_checked(&self, order: usize, tol: f64) -> Result<PowerSeries> {
        let det = self.determinant(order)?;
        let bound = self.truncation_bound(&det)?;
        if bound > tol {
            return Err(Error::Truncation { bound, tol });
        }
        Ok(det)
    }

    /// Majorant for the change in the first `order` determinant coefficients
    /// caused by the factors with index above the cutoff.
    pub fn truncation_bound(&self, det: &PowerSeries) -> Result<f64> {
        let order = det.order();
        let zeta = zeta_inverse_series(&self.weight, order)?;
        let shift = crate::series::traces_from_det(&zeta)?;
        let x: f64 = shift
            .values()
            .iter()
            .enumerate()
            .map(|(i, t)| t.norm() * omitted_weight(i + 1, self.product_cutoff) / (i + 1) as f64)
            .sum();
        let top = det.coeffs().iter().map(|b| b.norm()).fold(0.0, f64::max);
        Ok(x * x.exp() * top)
    }

    /// Value of the truncated product at `z` from the closed-form inverse
    /// zeta function.
    pub fn determinant_value(&self, z: Complex64) -> Complex64 {
        self.scales()
            .iter()
            .zip(self.multiplicities())
            .map(|(&c, m)| zeta_inverse_value(&self.weight, z * c).powu(m as u32))
            .product()
    }

    /// `log |d(z)|` summed factor by factor, safe where the product itself
    /// would overflow.
    pub fn log_abs_determinant(&self, z: Complex64) -> f64 {
        self.scales()
            .iter()
            .zip(self.multiplicities())
            .map(|(&c, m)| m as f64 * zeta_inverse_value(&self.weight, z * c).norm().ln())
            .sum()
    }

    /// Number of determinant zeros in `|z| < radius` by the argument
    /// principle, computed factor by factor.
    pub fn zero_count(&self, radius: f64) -> Result<i64> {
        self.check_analytic(radius)?;
        let mut total = 0;
        for (c, m) in self.scales().into_iter().zip(self.multiplicities()) {
            let w = roots::winding_number(
                |u| zeta_inverse_value(&self.weight, u),
                Complex64::new(0.0, 0.0),
                c * radius,
            )?;
            total += w * m as i64;
        }
        Ok(total)
    }

    fn check_analytic(&self, radius: f64) -> Result<()> {
        let limit = zeta_inverse_analytic_radius(&self.weight) / shell_scale(0);
        if radius >= limit {
            return Err(Error::Domain(format!(
                "determinant is not analytic on |z| = {radius}, singular at radius {limit}"
            )));
        }
        Ok(())
    }

    /// Zeros of the truncated determinant in `|z| < radius`.
    ///
    /// Zeros of the inverse zeta function are located with
    /// [`find_resonances`] on its series of degree `zeta_order`, then mapped
    /// to `w / c_k` with multiplicity multiplied by `m_k`. The total is
    /// checked against [`Self::zero_count`].
    pub fn resonances(&self, radius: f64, tol: f64, zeta_order: usize) -> Result<ResonanceSet> {
        self.check_analytic(radius)?;
        let zeta = zeta_inverse_series(&self.weight, zeta_order)?;
        let options = ResonanceOptions {
            aberth: AberthConfig {
                tol,
                ..AberthConfig::default()
            },
            ..ResonanceOptions::default()
        };
        let closed_form = |u: Complex64| zeta_inverse_value(&self.weight, u);
        let base = find_resonances_validated(
            &zeta,
            shell_scale(0) * radius,
            &options,
            Some(&closed_form),
        )?;
        let mut zeros = Vec::new();
        for (c, m) in self.scales().into_iter().zip(self.multiplicities()) {
            for r in base.zeros() {
                let z = r.zero / c;
                let modulus = z.norm();
                if (modulus - radius).abs() <= CLUSTER_EPS * radius {
                    return Err(Error::BoundaryAmbiguity { radius });
                }
                if modulus < radius {
                    zeros.push(Resonance {
                        zero: z,
                        multiplicity: r.multiplicity * m as usize,
                    });
                }
            }
        }
        let found: usize = zeros.iter().map(|r| r.multiplicity).sum();
        let contour = self.zero_count(radius)?;
        if contour < 0 || contour as usize != found {
            return Err(Error::CountMismatch {
                contour: contour.max(0) as usize,
                found,
            });
        }
        ResonanceSet::new(zeros, radius)
    }
}

/// Smallest cutoff `K` with `m_K · 2 · 4^{-(K+2)} · radius < tol`.
pub fn default_cutoff(radius: f64, tol: f64) -> usize {
    (1..)
        .find(|&k| shell_multiplicity(k) as f64 * 2.0 * shell_scale(k) * radius < tol)
        .unwrap()
}

/// A determinant zero and its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    pub zero: Complex64,
    pub multiplicity: usize,
}

impl Resonance {
    /// The resonance `1/z`.
    pub fn lambda(&self) -> Complex64 {
        self.zero.inv()
    }
}

/// Ordered determinant zeros certified inside a radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceSet {
    zeros: Vec<Resonance>,
    reliability_radius: f64,
    /// Root-finder candidates discarded by an independent local check.
    #[serde(default)]
    rejected_candidates: usize,
}

impl ResonanceSet {
    /// Sorts by modulus, breaking near-ties by principal argument, and
    /// checks the radius and multiplicity invariants.
    pub fn new(mut zeros: Vec<Resonance>, reliability_radius: f64) -> Result<Self> {
        if !(reliability_radius > 0.0) {
            return Err(Error::InvalidParameter("reliability radius must be positive".into()));
        }
        if let Some(r) = zeros
            .iter()
            .find(|r| r.multiplicity == 0 || !(r.zero.norm() < reliability_radius))
        {
            return Err(Error::InvalidParameter(format!(
                "zero {} with multiplicity {} violates the set invariants",
                r.zero, r.multiplicity
            )));
        }
        zeros.sort_by(|a, b| a.zero.norm().total_cmp(&b.zero.norm()));
        let mut start = 0;
        while start < zeros.len() {
            let base = zeros[start].zero.norm();
            let mut end = start + 1;
            while end < zeros.len() && zeros[end].zero.norm() - base <= 1e-12 * base {
                end += 1;
            }
            zeros[start..end].sort_by(|a, b| {
                a.zero
                    .arg()
                    .partial_cmp(&b.zero.arg())
                    .unwrap_or(Ordering::Equal)
            });
            start = end;
        }
        Ok(Self {
            zeros,
            reliability_radius,
            rejected_candidates: 0,
        })
    }

    pub fn rejected_candidates(&self) -> usize {
        self.rejected_candidates
    }

    pub fn zeros(&self) -> &[Resonance] {
        &self.zeros
    }

    pub fn reliability_radius(&self) -> f64 {
        self.reliability_radius
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    /// Zeros counted with multiplicity.
    pub fn total_multiplicity(&self) -> usize {
        self.zeros.iter().map(|r| r.multiplicity).sum()
    }

    /// `#{resonances λ with |λ| > r}`, counted with multiplicity.
    pub fn count_above(&self, r: f64) -> usize {
        self.zeros
            .iter()
            .filter(|z| z.lambda().norm() > r)
            .map(|z| z.multiplicity)
            .sum()
    }

    /// Writes the CSV form: a comment line with the reliability radius, a
    /// column header, then one row per zero.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# reliability_radius={}", format_f64(self.reliability_radius))?;
        writeln!(out, "re_z,im_z,multiplicity,re_lambda,im_lambda")?;
        for r in &self.zeros {
            let l = r.lambda();
            writeln!(
                out,
                "{},{},{},{},{}",
                format_f64(r.zero.re),
                format_f64(r.zero.im),
                r.multiplicity,
                format_f64(l.re),
                format_f64(l.im)
            )?;
        }
        Ok(())
    }
}

/// Options for [`find_resonances_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceOptions {
    pub aberth: AberthConfig,
    pub cluster_eps: f64,
    /// Relative size allowed for the last coefficients on the contour.
    pub truncation_tol: f64,
    /// Treat the series as an exact polynomial and skip the tail check.
    pub exact_polynomial: bool,
}

impl Default for ResonanceOptions {
    fn default() -> Self {
        Self {
            aberth: AberthConfig::default(),
            cluster_eps: CLUSTER_EPS,
            truncation_tol: 1e-12,
            exact_polynomial: false,
        }
    }
}

/// Largest radius at which the last two coefficients stay below
/// `tol` times the largest term, or infinity for a series whose last
/// coefficient is exactly zero.
pub fn truncation_reliability_radius(series: &PowerSeries, tol: f64) -> f64 {
    let b = series.coeffs();
    let n = series.order();
    if n == 0 || b[n].norm() == 0.0 {
        return f64::INFINITY;
    }
    let ratio = |r: f64| {
        let log_terms: Vec<f64> = b
            .iter()
            .enumerate()
            .map(|(i, c)| c.norm().ln() + i as f64 * r.ln())
            .collect();
        let top = log_terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let tail = log_terms[n.saturating_sub(1)..]
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        tail - top
    };
    let target = tol.ln();
    if ratio(f64::MIN_POSITIVE.sqrt()) > target {
        return 0.0;
    }
    let (mut lo, mut hi) = (f64::MIN_POSITIVE.sqrt(), 1.0);
    while ratio(hi) <= target && hi < 1e300 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if ratio(mid) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Zeros with `|z| < radius` of a normalized series, found by Aberth–Ehrlich
/// iteration on the truncated polynomial and validated by a contour count.
pub fn find_resonances(series: &PowerSeries, radius: f64, tol: f64) -> Result<ResonanceSet> {
    let options = ResonanceOptions {
        aberth: AberthConfig {
            tol,
            ..AberthConfig::default()
        },
        ..ResonanceOptions::default()
    };
    find_resonances_with(series, radius, &options)
}

pub fn find_resonances_with(
    series: &PowerSeries,
    radius: f64,
    options: &ResonanceOptions,
) -> Result<ResonanceSet> {
    find_resonances_validated(series, radius, options, None)
}

/// As [`find_resonances_with`], optionally checking against an independent
/// evaluator of the same function that is better conditioned on the circle
/// than the truncated polynomial.
///
/// With an evaluator, the contour count uses it, and every candidate zero is
/// certified by its winding number on a small circle. Candidates with zero
/// local winding are rounding artefacts of the polynomial and are dropped;
/// their number is kept in [`ResonanceSet::rejected_candidates`].
pub fn find_resonances_validated(
    series: &PowerSeries,
    radius: f64,
    options: &ResonanceOptions,
    evaluator: Option<&dyn Fn(Complex64) -> Complex64>,
) -> Result<ResonanceSet> {
    if !series.is_normalized() {
        return Err(Error::Normalization(format!("{}", series.coeff(0))));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter("radius must be positive".into()));
    }
    if !options.exact_polynomial {
        let reliable = truncation_reliability_radius(series, options.truncation_tol);
        if radius > reliable {
            return Err(Error::Precondition(format!(
                "radius {radius} exceeds the truncation reliability radius {reliable:.6e}"
            )));
        }
    }
    let coeffs = series.coeffs();
    let found = roots::aberth(coeffs, options.aberth)?;
    if !found.converged {
        return Err(Error::Convergence(format!(
            "root finder stopped after {} iterations",
            found.iterations
        )));
    }
    let mut clusters = roots::cluster_roots(&found.roots, options.cluster_eps);
    roots::refine_clusters(coeffs, &mut clusters);
    let inside: Vec<&roots::ZeroCluster> = clusters
        .iter()
        .filter(|cl| {
            let modulus = cl.center.norm();
            let margin = (cl.spread + options.cluster_eps * radius).max(options.cluster_eps * modulus);
            modulus < radius + margin
        })
        .collect();
    if inside.iter().any(|cl| {
        let modulus = cl.center.norm();
        let margin = (cl.spread + options.cluster_eps * radius).max(options.cluster_eps * modulus);
        (modulus - radius).abs() <= margin
    }) {
        return Err(Error::BoundaryAmbiguity { radius });
    }
    let mut zeros = Vec::new();
    let mut rejected = 0;
    for cl in &inside {
        let multiplicity = match evaluator {
            None => cl.multiplicity as i64,
            Some(f) => {
                let gap = clusters
                    .iter()
                    .filter(|o| o.center != cl.center)
                    .map(|o| (o.center - cl.center).norm())
                    .fold(f64::INFINITY, f64::min);
                let local = (0.5 * gap)
                    .min(0.25 * cl.center.norm().max(f64::MIN_POSITIVE))
                    .min(0.9 * (radius - cl.center.norm()))
                    .max(4.0 * cl.spread);
                roots::winding_number(f, cl.center, local)?
            }
        };
        if multiplicity <= 0 {
            rejected += cl.multiplicity;
            continue;
        }
        zeros.push(Resonance {
            zero: cl.center,
            multiplicity: multiplicity as usize,
        });
    }
    let found_count: usize = zeros.iter().map(|r| r.multiplicity).sum();
    let contour = match evaluator {
        None => roots::polynomial_winding(coeffs, radius)?,
        Some(f) => roots::winding_number(f, Complex64::new(0.0, 0.0), radius)?,
    };
    if contour < 0 || contour as usize != found_count {
        return Err(Error::CountMismatch {
            contour: contour.max(0) as usize,
            found: found_count,
        });
    }
    let mut set = ResonanceSet::new(zeros, radius)?;
    set.rejected_candidates = rejected;
    Ok(set)
}

/// `N(r)` for the unweighted horseshoe, counted shell by shell: the zeros
/// `4^{k+2}/2` have multiplicity `m_k`, so this is the number of resonances
/// `2 · 4^{-(k+2)}` above `r`.
pub fn unweighted_counting(r: f64) -> u64 {
    (0..)
        .take_while(|&k| 2.0 * shell_scale(k) > r)
        .map(shell_multiplicity)
        .sum()
}

/// Radius of convergence estimated from the ratio of the last two nonzero
/// coefficients.
pub fn coefficient_ratio_radius(series: &PowerSeries) -> Option<f64> {
    let b = series.coeffs();
    let n = series.order();
    (1..=n)
        .rev()
        .find(|&i| b[i].norm() > 0.0 && b[i - 1].norm() > 0.0)
        .map(|i| b[i - 1].norm() / b[i].norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::det_from_traces;
    use crate::shift::Generator;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn weight_factor_values() {
        assert_relative_eq!(det_weight_factor(1), 16.0 / 81.0, max_relative = 1e-15);
        assert_relative_eq!(det_weight_factor(2), 256.0 / 50625.0, max_relative = 1e-15);
    }

    #[test]
    fn weight_factor_series_converges() {
        assert!((det_weight_factor_partial(1, 30) - det_weight_factor(1)).abs() < 1e-15);
        for n in 1..4 {
            for cutoff in [2, 5, 10] {
                let rel = (det_weight_factor_partial(n, cutoff) - det_weight_factor(n)).abs()
                    / det_weight_factor(n);
                assert!(rel <= weight_factor_relative_tail(n, cutoff), "n={n} K={cutoff}");
            }
        }
    }

    #[test]
    fn weight_factor_tail_at_two_terms() {
        // (4/3)^4 = 256/81 against 1 + 4/4 + 10/16
        let rel = 1.0 - (1.0 + 1.0 + 0.625) * 81.0 / 256.0;
        assert_relative_eq!(
            (det_weight_factor(1) - det_weight_factor_partial(1, 2)) / det_weight_factor(1),
            rel,
            max_relative = 1e-13
        );
        assert!(rel > 4f64.powi(-2));
    }

    #[test]
    fn omitted_weight_completes_partial_sum() {
        for n in 1..5 {
            let total = det_weight_factor_partial(n, 3) + omitted_weight(n, 3);
            assert_relative_eq!(total, det_weight_factor(n), max_relative = 1e-14);
        }
    }

    #[test]
    fn unweighted_flat_traces() {
        let m = HorseshoeModel::new(WeightSpec::zero(), 8).unwrap();
        assert_relative_eq!(m.flat_trace(1).unwrap().re, 32.0 / 81.0, max_relative = 1e-15);
        assert_relative_eq!(m.flat_trace(2).unwrap().re, 1024.0 / 50625.0, max_relative = 1e-15);
    }

    #[test]
    fn determinant_first_coefficient() {
        let m = HorseshoeModel::new(WeightSpec::zero(), 30).unwrap();
        let d = m.determinant(1).unwrap();
        assert_relative_eq!(d.coeff(1).re, -32.0 / 81.0, max_relative = 1e-13);
    }

    #[test]
    fn determinant_matches_direct_expansion() {
        let m = HorseshoeModel::new(WeightSpec::zero(), 3).unwrap();
        let d = m.determinant(6).unwrap();
        let mut direct = PowerSeries::one(6);
        for k in 0..=3 {
            for _ in 0..shell_multiplicity(k) {
                let f = PowerSeries::from_real(&[1.0, -2.0 * shell_scale(k), 0.0, 0.0, 0.0, 0.0, 0.0])
                    .unwrap();
                direct = direct.mul(&f);
            }
        }
        for n in 0..=6 {
            assert!((d.coeff(n) - direct.coeff(n)).norm() < 1e-12);
        }
    }

    #[test]
    fn product_and_orbit_routes_agree() {
        let spec = WeightSpec::explicit(vec![c(0.3, -0.1), c(-0.2, 0.25), c(0.1, 0.0)]).unwrap();
        let m = HorseshoeModel::new(spec, 40).unwrap();
        let orbit = det_from_traces(&m.flat_traces(12).unwrap(), 12).unwrap();
        let product = m.determinant(12).unwrap();
        for n in 0..=12 {
            assert!((orbit.coeff(n) - product.coeff(n)).norm() < 1e-9);
        }
    }

    #[test]
    fn expanded_and_trace_domain_determinants_agree() {
        let spec = WeightSpec::explicit(vec![c(0.2, 0.1), c(-0.3, 0.0)]).unwrap();
        let m = HorseshoeModel::new(spec, 10).unwrap();
        let a = m.determinant(10).unwrap();
        let b = m.determinant_from_traces(10).unwrap();
        for n in 0..=10 {
            assert!((a.coeff(n) - b.coeff(n)).norm() < 1e-12);
        }
    }

    #[test]
    fn truncation_check_reports_bound() {
        let m = HorseshoeModel::new(WeightSpec::zero(), 1).unwrap();
        assert!(matches!(
            m.determinant_checked(4, 1e-12),
            Err(Error::Truncation { .. })
        ));
        let m = HorseshoeModel::new(WeightSpec::zero(), 30).unwrap();
        assert!(m.determinant_checked(4, 1e-12).is_ok());
    }

    #[test]
    fn linear_factor_zero() {
        let s = PowerSeries::from_real(&[1.0, -2.0, 0.0]).unwrap();
        let r = find_resonances(&s, 1.0, 1e-12).unwrap();
        assert_eq!(r.zeros().len(), 1);
        assert!((r.zeros()[0].zero - c(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(r.zeros()[0].multiplicity, 1);
    }

    #[test]
    fn series_route_small_radius() {
        let m = HorseshoeModel::new(WeightSpec::zero(), 6).unwrap();
        let d = m.determinant(40).unwrap();
        let r = find_resonances(&d, 40.0, 1e-12).unwrap();
        let z = r.zeros();
        assert_eq!(z.len(), 2, "{z:?}");
        assert_eq!((z[0].multiplicity, z[1].multiplicity), (1, 4));
        assert!((z[0].zero - c(8.0, 0.0)).norm() < 1e-10 * 8.0);
        assert!((z[1].zero - c(32.0, 0.0)).norm() < 1e-6 * 32.0);
    }

    #[test]
    fn series_route_refuses_unreliable_radius() {
        let m = HorseshoeModel::new(WeightSpec::zero(), 6).unwrap();
        let d = m.determinant(40).unwrap();
        assert!(matches!(
            find_resonances(&d, 150.0, 1e-12),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn product_route_recovers_three_shells() {
        let m = HorseshoeModel::new(WeightSpec::zero(), 6).unwrap();
        let r = m.resonances(150.0, 1e-12, 40).unwrap();
        let z = r.zeros();
        assert_eq!(z.len(), 3);
        for (res, (target, mult)) in z.iter().zip([(8.0, 1), (32.0, 4), (128.0, 10)]) {
            assert!((res.zero - c(target, 0.0)).norm() < 1e-8 * target);
            assert_eq!(res.multiplicity, mult);
        }
    }

    #[test]
    fn rien_determinant_has_no_zeros() {
        let m = HorseshoeModel::new(WeightSpec::rien(), 6).unwrap();
        assert_eq!(m.zero_count(100.0).unwrap(), 0);
        let r = m.resonances(100.0, 1e-12, 96).unwrap();
        assert!(r.is_empty(), "{r:?}");
    }

    #[test]
    fn resonance_sum_reproduces_first_trace() {
        let m = HorseshoeModel::new(WeightSpec::zero(), 12).unwrap();
        let r = m.resonances(4f64.powi(13), 1e-12, 8).unwrap();
        let mut previous = 0.0;
        for shells in 1..=12 {
            let cut = 4f64.powi(-(shells as i32 + 1));
            let sum: f64 = r
                .zeros()
                .iter()
                .filter(|z| z.lambda().norm() > cut)
                .map(|z| z.multiplicity as f64 * z.lambda().re)
                .sum();
            assert!(sum > previous);
            previous = sum;
            let residual = 32.0 / 81.0 - sum;
            assert!(residual >= -1e-14 && residual <= 2.0 * omitted_weight(1, shells - 1) + 1e-14);
        }
    }

    #[test]
    fn counting_function_shells() {
        assert_eq!(unweighted_counting(0.2), 0);
        assert_eq!(unweighted_counting(0.1), 1);
        assert_eq!(unweighted_counting(0.05), 1);
        assert_eq!(unweighted_counting(0.03), 5);
        assert_eq!(unweighted_counting(0.005), 15);
    }

    #[test]
    fn log_generator_radius_of_convergence() {
        let spec = WeightSpec::generator(Generator::Log {
            amplitude: 0.5,
            radius: 0.25,
        })
        .unwrap();
        let m = HorseshoeModel::new(spec, 30).unwrap();
        let d = m.determinant(60).unwrap();
        let est = coefficient_ratio_radius(&d).unwrap();
        assert!((est / 4.0 - 1.0).abs() < 0.05, "{est}");
    }

    #[test]
    fn ordering_breaks_ties_by_argument() {
        let zeros = vec![
            Resonance { zero: c(0.0, 2.0), multiplicity: 1 },
            Resonance { zero: c(0.0, -2.0), multiplicity: 1 },
            Resonance { zero: c(1.0, 0.0), multiplicity: 2 },
        ];
        let s = ResonanceSet::new(zeros, 3.0).unwrap();
        assert_eq!(s.zeros()[0].zero, c(1.0, 0.0));
        assert_eq!(s.zeros()[1].zero, c(0.0, -2.0));
        assert_eq!(s.zeros()[2].zero, c(0.0, 2.0));
    }

    #[test]
    fn set_rejects_zero_outside_radius() {
        let z = vec![Resonance { zero: c(5.0, 0.0), multiplicity: 1 }];
        assert!(ResonanceSet::new(z, 4.0).is_err());
    }

    #[test]
    fn csv_layout() {
        let z = vec![Resonance { zero: c(8.0, 0.0), multiplicity: 1 }];
        let s = ResonanceSet::new(z, 40.0).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# reliability_radius=4.0000000000000000e1"));
        assert_eq!(lines[1], "re_z,im_z,multiplicity,re_lambda,im_lambda");
        assert!(lines[2].starts_with("8.0000000000000000e0,0.0000000000000000e0,1,1.2500000000000000e-1"));
    }
}
