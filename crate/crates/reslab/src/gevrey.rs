//! Gevrey regularity at desk scale: derivative bounds and Fourier decay of
//! test profiles, the thin-band frequency partition, the anisotropic weight
//! built on cones, and finite checks of cone hyperbolicity for linear maps.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{fit_line, fit_power_exponent};

/// Test functions with known regularity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum ProfileFamily {
    /// `exp(-x²/2)`, real-analytic.
    Gaussian,
    /// `exp(-x^{-a} - (1-x)^{-a})` on `(0, 1)`, zero elsewhere; Gevrey of
    /// class `1 + 1/a`.
    Bump { exponent: f64 },
    /// Indicator of `[-1/2, 1/2]`, not even continuous.
    Indicator,
}

/// A profile sampled on `2^log2_size` uniform points of `[-extent, extent)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevreyProfile {
    pub family: ProfileFamily,
    pub sigma: f64,
    pub log2_size: u32,
    pub extent: f64,
}

impl GevreyProfile {
    pub fn new(family: ProfileFamily, sigma: f64, log2_size: u32, extent: f64) -> Result<Self> {
        if !(sigma > 1.0) {
            return Err(Error::InvalidParameter(format!("sigma must exceed 1, got {sigma}")));
        }
        if !(4..=24).contains(&log2_size) {
            return Err(Error::InvalidParameter(format!("grid exponent {log2_size} outside 4..=24")));
        }
        if let ProfileFamily::Bump { exponent } = family {
            if !(exponent > 0.0) {
                return Err(Error::InvalidParameter("bump exponent must be positive".into()));
            }
        }
        let profile = Self {
            family,
            sigma,
            log2_size,
            extent,
        };
        if !(extent > 1.0) {
            return Err(Error::InvalidParameter("extent must exceed 1".into()));
        }
        if family != ProfileFamily::Indicator {
            let edge = profile.eval(-extent).abs().max(profile.eval(extent).abs());
            if edge >= 1e-14 {
                return Err(Error::Precondition(format!(
                    "profile is {edge:e} at the grid edge, widen the extent"
                )));
            }
        }
        Ok(profile)
    }

    /// Gaussian on `[-40, 40)` with `2^20` samples.
    pub fn gaussian(sigma: f64) -> Result<Self> {
        Self::new(ProfileFamily::Gaussian, sigma, 20, 40.0)
    }

    /// Bump of class `1 + 1/a` on `[-8, 8)` with `2^20` samples.
    pub fn bump(exponent: f64) -> Result<Self> {
        Self::new(ProfileFamily::Bump { exponent }, 1.0 + 1.0 / exponent, 20, 8.0)
    }

    /// Indicator control on `[-8, 8)` with `2^20` samples, tested at class 2.
    pub fn indicator() -> Result<Self> {
        Self::new(ProfileFamily::Indicator, 2.0, 20, 8.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.family {
            ProfileFamily::Gaussian => (-x * x / 2.0).exp(),
            ProfileFamily::Bump { exponent } => {
                if x <= 0.0 || x >= 1.0 {
                    0.0
                } else {
                    (-x.powf(-exponent) - (1.0 - x).powf(-exponent)).exp()
                }
            }
            ProfileFamily::Indicator => {
                if x.abs() < 0.5 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Taylor coefficients `f^{(m)}(x)/m!` for `m ≤ order`, by exponentiating
    /// the Taylor series of the exponent.
    pub fn taylor(&self, x: f64, order: usize) -> Result<Vec<f64>> {
        let exponent_series = match self.family {
            ProfileFamily::Gaussian => {
                let mut g = vec![0.0; order + 1];
                g[0] = -x * x / 2.0;
                if order >= 1 {
                    g[1] = -x;
                }
                if order >= 2 {
                    g[2] = -0.5;
                }
                g
            }
            ProfileFamily::Bump { exponent } => {
                if x <= 0.0 || x >= 1.0 {
                    return Ok(vec![0.0; order + 1]);
                }
                let mut g = vec![0.0; order + 1];
                let mut binom = 1.0;
                for (k, gk) in g.iter_mut().enumerate() {
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    *gk = -binom * (x.powf(-exponent - k as f64) + sign * (1.0 - x).powf(-exponent - k as f64));
                    binom *= (-exponent - k as f64) / (k as f64 + 1.0);
                }
                g
            }
            ProfileFamily::Indicator => {
                return Err(Error::Domain("the indicator has no classical derivative".into()));
            }
        };
        Ok(exp_series(&exponent_series))
    }

    fn samples(&self, log2_size: u32) -> Vec<Complex64> {
        let size = 1usize << log2_size;
        let step = 2.0 * self.extent / size as f64;
        (0..size)
            .into_par_iter()
            .map(|k| Complex64::new(self.eval(-self.extent + step * k as f64), 0.0))
            .collect()
    }

    /// `|f̂(ξ_k)| / |f̂(0)|` at `ξ_k = π k / extent`, `k = 0..=N/2`.
    fn normalised_spectrum(&self, log2_size: u32) -> Vec<f64> {
        let mut buf = self.samples(log2_size);
        FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
        let peak = buf[0].norm();
        buf[..=buf.len() / 2].iter().map(|c| c.norm() / peak).collect()
    }
}

// exp of a power series: e_k = (1/k) Σ_{j=1..k} j g_j e_{k-j}
fn exp_series(g: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; g.len()];
    e[0] = g[0].exp();
    for k in 1..g.len() {
        e[k] = (1..=k).map(|j| j as f64 * g[j] * e[k - j]).sum::<f64>() / k as f64;
    }
    e
}

/// Outcome of [`gevrey_condition_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GevreyConditionReport {
    pub sigma: f64,
    /// `sup |f^{(m)}|` on the grid for `m = 0..=max_order`; empty when the
    /// profile has no classical derivative.
    pub sup_norms: Vec<f64>,
    /// `max(sup |f|, sup |f'|)`.
    pub constant: f64,
    /// Least `R` on the grid `10^{k/200}` with
    /// `sup |f^{(m)}| ≤ C R^m m^{σm}` for every order.
    pub radius: Option<f64>,
    /// First order at which no `R ≤ 10^6` works.
    pub failed_order: Option<usize>,
    pub passes: bool,
}

/// Largest derivative order accepted by [`gevrey_condition_check`].
pub const MAX_DERIVATIVE_ORDER: usize = 12;

/// Checks `sup |f^{(m)}| ≤ C R^m m^{σm}` for `m ≤ max_order` with exact
/// derivatives sampled on a grid covering the support.
pub fn gevrey_condition_check(profile: &GevreyProfile, max_order: usize) -> Result<GevreyConditionReport> {
    if max_order > MAX_DERIVATIVE_ORDER || max_order == 0 {
        return Err(Error::InvalidParameter(format!(
            "derivative order must be in 1..={MAX_DERIVATIVE_ORDER}"
        )));
    }
    let grid: Vec<f64> = match profile.family {
        ProfileFamily::Gaussian => (0..=4800).map(|k| -12.0 + 24.0 * k as f64 / 4800.0).collect(),
        ProfileFamily::Bump { .. } => (1..4000).map(|k| k as f64 / 4000.0).collect(),
        ProfileFamily::Indicator => {
            return Ok(GevreyConditionReport {
                sigma: profile.sigma,
                sup_norms: vec![1.0],
                constant: 1.0,
                radius: None,
                failed_order: Some(1),
                passes: false,
            });
        }
    };
    let mut sup_norms = vec![0.0f64; max_order + 1];
    let rows: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|&x| profile.taylor(x, max_order))
        .collect::<Result<_>>()?;
    for row in rows {
        let mut factorial = 1.0;
        for (m, c) in row.iter().enumerate() {
            if m > 0 {
                factorial *= m as f64;
            }
            sup_norms[m] = sup_norms[m].max((c * factorial).abs());
        }
    }
    let constant = sup_norms[0].max(sup_norms[1]);
    let sigma = profile.sigma;
    // log of the budget C R^m m^{σm}
    let holds = |r: f64, m: usize| {
        let mf = m as f64;
        let log_budget = constant.ln() + mf * r.ln() + if m == 0 { 0.0 } else { sigma * mf * mf.ln() };
        sup_norms[m] == 0.0 || sup_norms[m].ln() <= log_budget + 1e-12
    };
    let radius = (0..=1200)
        .map(|k| 10f64.powf(k as f64 / 200.0))
        .find(|&r| (0..=max_order).all(|m| holds(r, m)));
    let failed_order = match radius {
        Some(_) => None,
        None => (0..=max_order).find(|&m| !holds(1e6, m)),
    };
    Ok(GevreyConditionReport {
        sigma,
        sup_norms,
        constant,
        radius,
        failed_order,
        passes: radius.is_some(),
    })
}

/// Verdict of [`fourier_decay_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayVerdict {
    Pass,
    Fail,
    Undetermined,
    /// The transform never reaches the fitting floor before the Nyquist
    /// frequency, which is algebraic rather than stretched exponential decay.
    NonGevrey,
}

/// Fitted decay `|f̂(ξ)| ≈ A exp(-D |ξ|^q)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    /// `q̂`; zero for profiles flagged [`DecayVerdict::NonGevrey`].
    pub fitted_exponent: f64,
    pub r_squared: f64,
    pub points: usize,
    pub decades: f64,
    /// `(1/σ)(1 - 0.15)`.
    pub threshold: f64,
    /// Largest change of the fitted spectrum when the grid is doubled.
    pub aliasing: f64,
    /// Log-log slope of the envelope over its last decade of frequencies.
    pub tail_slope: f64,
    pub verdict: DecayVerdict,
}

/// Spectrum values kept by the decay fit.
pub const FIT_WINDOW: (f64, f64) = (1e-12, 1e-2);

/// Fits the decay of the monotone envelope of `|f̂|` over the window where
/// it lies in [`FIT_WINDOW`], relative to `|f̂(0)|`.
pub fn fourier_decay_check(profile: &GevreyProfile) -> Result<DecayReport> {
    let spectrum = profile.normalised_spectrum(profile.log2_size);
    let step = PI / profile.extent;
    let mut envelope = spectrum.clone();
    for k in (0..envelope.len() - 1).rev() {
        envelope[k] = envelope[k].max(envelope[k + 1]);
    }
    let last = envelope.len() - 1;
    let tail_slope = {
        let lo = last / 10;
        let xs = [((lo as f64) * step).ln(), ((last as f64) * step).ln()];
        (envelope[last].max(1e-300).ln() - envelope[lo].max(1e-300).ln()) / (xs[1] - xs[0])
    };
    let threshold = 0.85 / profile.sigma;
    if envelope[last] > FIT_WINDOW.0 {
        return Ok(DecayReport {
            fitted_exponent: 0.0,
            r_squared: 0.0,
            points: 0,
            decades: 0.0,
            threshold,
            aliasing: f64::NAN,
            tail_slope,
            verdict: DecayVerdict::NonGevrey,
        });
    }
    let window: Vec<usize> = (1..envelope.len())
        .filter(|&k| envelope[k] >= FIT_WINDOW.0 && envelope[k] <= FIT_WINDOW.1)
        .collect();
    let finer = profile.normalised_spectrum(profile.log2_size + 1);
    let aliasing = window
        .iter()
        .map(|&k| (spectrum[k] - finer[k]).abs())
        .fold(0.0, f64::max);
    if aliasing > 1e-12 {
        return Err(Error::Convergence(format!(
            "spectrum changes by {aliasing:e} when the grid is doubled"
        )));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = window.iter().map(|&k| (k as f64 * step, envelope[k].ln())).unzip();
    let decades = if ys.is_empty() {
        0.0
    } else {
        (ys[0] - ys[ys.len() - 1]) / std::f64::consts::LN_10
    };
    if xs.len() < 10 || decades < 4.0 {
        return Ok(DecayReport {
            fitted_exponent: f64::NAN,
            r_squared: 0.0,
            points: xs.len(),
            decades,
            threshold,
            aliasing,
            tail_slope,
            verdict: DecayVerdict::Undetermined,
        });
    }
    let (q, fit) = fit_power_exponent(&xs, &ys, 0.05, 4.0)?;
    let verdict = if fit.slope < 0.0 && q >= threshold {
        DecayVerdict::Pass
    } else {
        DecayVerdict::Fail
    };
    Ok(DecayReport {
        fitted_exponent: q,
        r_squared: fit.r_squared,
        points: xs.len(),
        decades,
        threshold,
        aliasing,
        tail_slope,
        verdict,
    })
}

/// Smooth cutoff equal to 1 on `(-∞, 1/2]` and 0 on `[1, ∞)`, joined by a
/// quintic smoothstep.
pub fn cutoff(s: f64) -> f64 {
    if s <= 0.5 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        let u = 2.0 * (s - 0.5);
        1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
    }
}

/// Unit-width version of [`cutoff`]: 1 below `lo`, 0 above `hi`.
fn ramp(x: f64, lo: f64, hi: f64) -> f64 {
    cutoff(0.5 + 0.5 * (x - lo) / (hi - lo))
}

/// Radial bands `ψ_n = χ_{n+1} - χ_n` with `χ_n(ξ) = χ(|ξ| - n^α)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandPartition {
    pub alpha: f64,
    /// Largest retained band index.
    pub bands: usize,
    pub extent: f64,
    pub spacing: f64,
    pub report: PartitionReport,
}

/// Grid verification of a [`BandPartition`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionReport {
    /// `max |Σ_n ψ_n - 1|` over grid radii covered by the retained bands.
    pub max_sum_error: f64,
    pub covered_radius: f64,
    pub supports_ok: bool,
    pub max_overlap: usize,
    pub grid_points: usize,
}

/// Radial grid spacing, fine enough to resolve each half-unit transition.
pub const RADIAL_SPACING: f64 = 1.0 / 64.0;

impl BandPartition {
    pub fn chi(&self, n: i64, rho: f64) -> f64 {
        if n <= 0 {
            0.0
        } else {
            cutoff(rho - (n as f64).powf(self.alpha))
        }
    }

    pub fn psi(&self, n: usize, rho: f64) -> f64 {
        if n == 0 {
            self.chi(1, rho)
        } else {
            self.chi(n as i64 + 1, rho) - self.chi(n as i64, rho)
        }
    }

    /// `χ_{n+2} - χ_{n-1}`, equal to 1 wherever `ψ_n` is nonzero.
    pub fn psi_tilde(&self, n: usize, rho: f64) -> f64 {
        self.chi(n as i64 + 2, rho) - self.chi(n as i64 - 1, rho)
    }

    /// Radii where `ψ_n` may be nonzero.
    pub fn support(&self, n: usize) -> (f64, f64) {
        if n == 0 {
            (0.0, 2.0)
        } else {
            ((n as f64).powf(self.alpha) + 0.5, (n as f64 + 1.0).powf(self.alpha) + 1.0)
        }
    }

    /// Radii where `ψ̃_n` may be nonzero.
    pub fn tilde_support(&self, n: usize) -> (f64, f64) {
        let lo = if n >= 2 { (n as f64 - 1.0).powf(self.alpha) + 0.5 } else { 0.0 };
        (lo, (n as f64 + 2.0).powf(self.alpha) + 1.0)
    }

    /// Band whose nominal annulus `[n^α, (n+1)^α)` contains `rho`.
    pub fn band_of(&self, rho: f64) -> usize {
        let mut n = rho.powf(1.0 / self.alpha).floor() as usize;
        while n > 0 && (n as f64).powf(self.alpha) > rho {
            n -= 1;
        }
        while ((n + 1) as f64).powf(self.alpha) <= rho {
            n += 1;
        }
        n
    }

    /// Indices and values of the nonzero bands at `rho`.
    pub fn active(&self, rho: f64) -> Vec<(usize, f64)> {
        let centre = self.band_of(rho);
        (centre.saturating_sub(1)..=(centre + 1).min(self.bands))
            .map(|n| (n, self.psi(n, rho)))
            .filter(|(_, v)| *v != 0.0)
            .collect()
    }

    pub fn grid(&self) -> Vec<f64> {
        let count = (self.extent / self.spacing).floor() as usize;
        (0..=count).map(|k| k as f64 * self.spacing).collect()
    }

    /// Rows `(|ξ|, ψ_0, …, ψ_N)` sampled every `stride` grid points.
    pub fn table(&self, stride: usize) -> Vec<Vec<f64>> {
        self.grid()
            .into_iter()
            .step_by(stride.max(1))
            .map(|rho| {
                std::iter::once(rho)
                    .chain((0..=self.bands).map(|n| self.psi(n, rho)))
                    .collect()
            })
            .collect()
    }
}

/// Builds bands `0..=bands` on the radial grid `[0, extent]` and verifies
/// the partition of unity and the support bounds.
pub fn build_band_partition(alpha: f64, bands: usize, extent: f64) -> Result<BandPartition> {
    if !(alpha > 1.0) || bands == 0 {
        return Err(Error::InvalidParameter("need alpha > 1 and at least one band".into()));
    }
    let needed = (bands as f64 + 1.0).powf(alpha) + 1.0;
    if extent < needed {
        return Err(Error::Precondition(format!(
            "grid extent {extent} below {needed}, the outer edge of band {bands}"
        )));
    }
    let mut partition = BandPartition {
        alpha,
        bands,
        extent,
        spacing: RADIAL_SPACING,
        report: PartitionReport {
            max_sum_error: 0.0,
            covered_radius: (bands as f64 + 1.0).powf(alpha) + 0.5,
            supports_ok: true,
            max_overlap: 0,
            grid_points: 0,
        },
    };
    let grid = partition.grid();
    let p = &partition;
    let (max_sum_error, supports_ok, max_overlap) = grid
        .par_iter()
        .map(|&rho| {
            let mut sum = 0.0;
            let mut overlap = 0;
            let mut ok = true;
            for n in 0..=p.bands {
                let v = p.psi(n, rho);
                if v != 0.0 {
                    overlap += 1;
                    let (lo, hi) = if n == 0 {
                        (0.0, 2.0)
                    } else {
                        ((n as f64).powf(alpha), (n as f64 + 1.0).powf(alpha) + 1.0)
                    };
                    ok &= rho >= lo && rho <= hi;
                }
                sum += v;
            }
            let err = if rho <= p.report.covered_radius { (sum - 1.0).abs() } else { 0.0 };
            (err, ok, overlap)
        })
        .reduce(
            || (0.0, true, 0),
            |a, b| (a.0.max(b.0), a.1 && b.1, a.2.max(b.2)),
        );
    partition.report.max_sum_error = max_sum_error;
    partition.report.supports_ok = supports_ok;
    partition.report.max_overlap = max_overlap;
    partition.report.grid_points = grid.len();
    if max_sum_error > 1e-12 || !supports_ok {
        return Err(Error::Precondition(format!(
            "partition check failed: sum error {max_sum_error:e}, supports ok {supports_ok}"
        )));
    }
    Ok(partition)
}

/// Distance between the lines through angles `a` and `b`, in `[0, π/2]`.
pub fn line_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

/// Symmetric double sector `{ξ : line_gap(arg ξ, centre) ≤ half_angle}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    pub centre: f64,
    pub half_angle: f64,
}

impl Sector {
    pub fn contains(&self, v: Vector2<f64>) -> bool {
        v.norm() == 0.0 || line_gap(v.y.atan2(v.x), self.centre) <= self.half_angle + 1e-12
    }
}

/// Nested planar cones `C_0 = ℝ² ⊃ C_1 ⊃ … ⊃ C_r` around a common axis,
/// the smooth angular partition `φ_0, …, φ_r` and the weight exponents
/// `t_0, …, t_r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeFamily {
    pub axis: f64,
    /// `γ_1 > … > γ_r`, half-angles of `C_1, …, C_r`.
    pub half_angles: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Checks `t_0 > 0 > t_1 > … > t_r`, `t_r > ν t_{r-1}` and
/// `t_{i+1} < (2/a) t_i` for `i ≤ r - 2`.
pub fn check_weight_exponents(weights: &[f64], nu: f64, a: f64) -> Result<()> {
    let r = weights.len().checked_sub(1).filter(|&r| r >= 2).ok_or_else(|| {
        Error::InvalidParameter("need at least three weight exponents".into())
    })?;
    if !(weights[0] > 0.0 && weights[1] < 0.0) || weights.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter(
            "weights must satisfy t_0 > 0 > t_1 > … > t_r".into(),
        ));
    }
    if !(weights[r] > nu * weights[r - 1]) {
        return Err(Error::InvalidParameter(format!("t_r must exceed ν t_(r-1) with ν = {nu}")));
    }
    if let Some(i) = (0..=r - 2).find(|&i| !(weights[i + 1] < 2.0 / a * weights[i])) {
        return Err(Error::InvalidParameter(format!("t_{} must be below (2/a) t_{i}", i + 1)));
    }
    Ok(())
}

/// Weights `1, -0.1, -0.1 q, …` with `q = 1.25 max(1, 2/a)`, closed by
/// `t_r = t_{r-1} (1 + ν)/2`.
pub fn default_weight_exponents(r: usize, nu: f64, a: f64) -> Result<Vec<f64>> {
    if r < 2 || !(nu > 1.0) || !(a > 0.0) {
        return Err(Error::InvalidParameter("need r ≥ 2, ν > 1 and a > 0".into()));
    }
    let q = 1.25 * (2.0 / a).max(1.0);
    let mut t = vec![1.0, -0.1];
    while t.len() < r {
        let last = t[t.len() - 1];
        t.push(last * q);
    }
    let last = t[r - 1];
    t.push(last * (1.0 + nu) / 2.0);
    check_weight_exponents(&t, nu, a)?;
    Ok(t)
}

impl ConeFamily {
    pub fn new(axis: f64, half_angles: Vec<f64>, weights: Vec<f64>, nu: f64, a: f64) -> Result<Self> {
        if half_angles.len() < 2 {
            return Err(Error::InvalidParameter("need at least two cones".into()));
        }
        let nested = half_angles[0] < FRAC_PI_2
            && half_angles[half_angles.len() - 1] > 0.0
            && half_angles.windows(2).all(|w| w[1] < w[0]);
        if !nested {
            return Err(Error::InvalidParameter(
                "half-angles must decrease strictly inside (0, π/2)".into(),
            ));
        }
        if weights.len() != half_angles.len() + 1 {
            return Err(Error::InvalidParameter("need one weight exponent per cone".into()));
        }
        check_weight_exponents(&weights, nu, a)?;
        Ok(Self {
            axis,
            half_angles,
            weights,
        })
    }

    /// Cones with `tan γ_i = first_slope · ratio^{1-i}`.
    pub fn nested(axis: f64, r: usize, first_slope: f64, ratio: f64, nu: f64, a: f64) -> Result<Self> {
        let half_angles = (0..r)
            .map(|i| (first_slope * ratio.powi(-(i as i32))).atan())
            .collect();
        Self::new(axis, half_angles, default_weight_exponents(r, nu, a)?, nu, a)
    }

    pub fn r(&self) -> usize {
        self.half_angles.len()
    }

    /// `γ_i` with `γ_0 = π/2` and `γ_{r+1} = 0`.
    pub fn gamma(&self, i: usize) -> f64 {
        match i {
            0 => FRAC_PI_2,
            i if i <= self.r() => self.half_angles[i - 1],
            _ => 0.0,
        }
    }

    pub fn cone(&self, i: usize) -> Sector {
        Sector {
            centre: self.axis,
            half_angle: self.gamma(i),
        }
    }

    /// Angle between `ξ` and the axis line.
    pub fn offset(&self, v: Vector2<f64>) -> f64 {
        line_gap(v.y.atan2(v.x), self.axis)
    }

    // s_i is 1 near the axis and drops to 0 across the middle fifth of
    // (γ_{i+2}, γ_{i+1}), so φ_i = s_{i-1} - s_i stays inside C_i and away
    // from C_{i+2}
    fn step_interval(&self, i: usize) -> (f64, f64) {
        let (inner, outer) = (self.gamma(i + 2), self.gamma(i + 1));
        let g = outer - inner;
        (inner + 0.4 * g, inner + 0.6 * g)
    }

    fn step(&self, i: usize, offset: f64) -> f64 {
        let (lo, hi) = self.step_interval(i);
        ramp(offset, lo, hi)
    }

    /// `φ_i` as a function of the angle to the axis.
    pub fn phi(&self, i: usize, offset: f64) -> f64 {
        let r = self.r();
        let outer = if i == 0 { 1.0 } else { self.step(i - 1, offset) };
        let inner = if i == r { 0.0 } else { self.step(i, offset) };
        outer - inner
    }

    /// Angles to the axis where `φ_i` may be nonzero.
    pub fn phi_support(&self, i: usize) -> (f64, f64) {
        let lo = if i == self.r() { 0.0 } else { self.step_interval(i).0 };
        let hi = if i == 0 { FRAC_PI_2 } else { self.step_interval(i - 1).1 };
        (lo, hi)
    }

    /// Support of `φ̃_i`, equal to 1 on the support of `φ_i`, still inside
    /// `C_i` and away from `C_{i+2}`.
    pub fn phi_tilde_support(&self, i: usize) -> (f64, f64) {
        let lo = if i == self.r() {
            0.0
        } else {
            let (inner, outer) = (self.gamma(i + 2), self.gamma(i + 1));
            inner + 0.2 * (outer - inner)
        };
        let hi = if i == 0 {
            FRAC_PI_2
        } else {
            let (inner, outer) = (self.gamma(i + 1), self.gamma(i));
            inner + 0.8 * (outer - inner)
        };
        (lo, hi)
    }
}

/// Frequency profile `f̂(ρ, θ) = exp(-(ρ - ρ_0)²/(2 s²)) (1 + b cos(k(θ - θ_0)))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralTestFunction {
    pub centre: f64,
    pub width: f64,
    pub harmonic: u32,
    pub amplitude: f64,
    pub phase: f64,
}

impl SpectralTestFunction {
    pub fn radial(&self, rho: f64) -> f64 {
        (-(rho - self.centre).powi(2) / (2.0 * self.width * self.width)).exp()
    }

    pub fn angular(&self, theta: f64) -> f64 {
        1.0 + self.amplitude * (self.harmonic as f64 * (theta - self.phase)).cos()
    }

    /// Five profiles spread over `[0, rho_max]` with varied angular shapes.
    pub fn defaults(rho_max: f64) -> Vec<Self> {
        [
            (0.0, 0.02, 0, 0.0, 0.0),
            (0.05, 0.01, 2, 0.5, 0.0),
            (0.2, 0.05, 2, 0.9, 0.7),
            (0.45, 0.08, 4, 0.3, 0.2),
            (0.7, 0.05, 1, 0.6, 1.0),
        ]
        .into_iter()
        .map(|(c, w, k, b, p)| Self {
            centre: c * rho_max,
            width: w * rho_max,
            harmonic: k,
            amplitude: b,
            phase: p,
        })
        .collect()
    }
}

/// Constants relating the weight to the band decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    /// Per band `n ≥ 1`, `max e^{|t_i (|ξ|^{1/α} - n)|}` over its support.
    pub fine_constants: Vec<f64>,
    /// Per band, `max(S/w², w²/S)` over its annulus, with
    /// `S = Σ e^{2 t_i n} ψ_{n,i}²`.
    pub sandwich_by_band: Vec<f64>,
    pub sandwich_constant: f64,
    /// `max/min` of [`Self::sandwich_by_band`] over bands `1..=12`.
    pub sandwich_spread: f64,
    /// `max |Σ ψ_{n,i} - 1|` over the covered grid.
    pub unity_error: f64,
    pub max_radial_overlap: usize,
    pub max_angular_overlap: usize,
    /// `Σ (e^{t_i n} ‖ψ_{n,i}(D) f‖)² / ∫ |f̂|² w²` per test function.
    pub ratios: Vec<f64>,
    pub ratios_within: bool,
}

const ANGULAR_SAMPLES: usize = 513;
const CIRCLE_SAMPLES: usize = 4096;

/// Measures the constants relating `w(ξ)` to the band sums.
pub fn weight_and_equivalence(
    cones: &ConeFamily,
    bands: &BandPartition,
    tests: &[SpectralTestFunction],
) -> Result<EquivalenceReport> {
    let r = cones.r();
    let alpha = bands.alpha;
    let t = &cones.weights;
    let covered = bands.report.covered_radius;
    let rho_max = (bands.bands as f64 + 1.0).powf(alpha);

    let fine_constants: Vec<f64> = (1..=bands.bands)
        .map(|n| {
            let (lo, hi) = bands.support(n);
            let dev = (lo.powf(1.0 / alpha) - n as f64)
                .abs()
                .max((hi.powf(1.0 / alpha) - n as f64).abs());
            t.iter().map(|ti| (ti.abs() * dev).exp()).fold(1.0, f64::max)
        })
        .collect();

    let offsets: Vec<f64> = (0..ANGULAR_SAMPLES)
        .map(|k| FRAC_PI_2 * k as f64 / (ANGULAR_SAMPLES - 1) as f64)
        .collect();
    let phis: Vec<Vec<f64>> = offsets
        .iter()
        .map(|&d| (0..=r).map(|i| cones.phi(i, d)).collect())
        .collect();
    let max_angular_overlap = phis
        .iter()
        .map(|row| row.iter().filter(|v| **v != 0.0).count())
        .max()
        .unwrap_or(0);
    let angular_unity = phis
        .iter()
        .map(|row| (row.iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);

    let stride = 4;
    let radii: Vec<f64> = bands.grid().into_iter().step_by(stride).filter(|&p| p < rho_max).collect();
    let per_radius: Vec<(usize, f64, usize, f64)> = radii
        .par_iter()
        .map(|&rho| {
            let active = bands.active(rho);
            let psi0 = bands.psi(0, rho);
            let growth: Vec<f64> = t.iter().map(|ti| (ti * rho.powf(1.0 / alpha)).exp()).collect();
            let mut worst = 1.0f64;
            let mut unity = 0.0f64;
            for phi in &phis {
                let w = psi0 + (1.0 - psi0) * phi.iter().zip(&growth).map(|(p, g)| p * g).sum::<f64>();
                let mut s = psi0 * psi0 / (r as f64 + 1.0);
                let mut total = psi0;
                for &(n, v) in active.iter().filter(|(n, _)| *n >= 1) {
                    s += v * v * phi.iter().zip(t).map(|(p, ti)| (2.0 * ti * n as f64).exp() * p * p).sum::<f64>();
                    total += v * phi.iter().sum::<f64>();
                }
                let ratio = s / (w * w);
                worst = worst.max(ratio).max(1.0 / ratio);
                if rho <= covered {
                    unity = unity.max((total - 1.0).abs());
                }
            }
            (bands.band_of(rho), worst, active.len(), unity)
        })
        .collect();
    let mut sandwich_by_band = vec![1.0f64; bands.bands + 1];
    let mut max_radial_overlap = 0;
    let mut unity_error = angular_unity;
    for &(n, worst, overlap, unity) in &per_radius {
        sandwich_by_band[n.min(bands.bands)] = sandwich_by_band[n.min(bands.bands)].max(worst);
        max_radial_overlap = max_radial_overlap.max(overlap);
        unity_error = unity_error.max(unity);
    }
    let sandwich_constant = sandwich_by_band.iter().copied().fold(1.0, f64::max);
    let upper = bands.bands.min(12);
    let stable = &sandwich_by_band[1..=upper];
    let sandwich_spread = stable.iter().copied().fold(0.0, f64::max) / stable.iter().copied().fold(f64::INFINITY, f64::min);

    let ratios = tests
        .iter()
        .map(|f| band_norm_ratio(cones, bands, f, rho_max))
        .collect::<Vec<f64>>();
    let tol = 1.0 + 1e-9;
    let ratios_within = ratios
        .iter()
        .all(|q| q.is_finite() && *q <= sandwich_constant * tol && *q * sandwich_constant * tol >= 1.0);
    Ok(EquivalenceReport {
        fine_constants,
        sandwich_by_band,
        sandwich_constant,
        sandwich_spread,
        unity_error,
        max_radial_overlap,
        max_angular_overlap,
        ratios,
        ratios_within,
    })
}

// Both norms of a separable profile split into radial and angular integrals.
fn band_norm_ratio(cones: &ConeFamily, bands: &BandPartition, f: &SpectralTestFunction, rho_max: f64) -> f64 {
    let r = cones.r();
    let t = &cones.weights;
    let alpha = bands.alpha;
    let dtheta = 2.0 * PI / CIRCLE_SAMPLES as f64;
    let mut angular_total = 0.0;
    let mut angular_single = vec![0.0; r + 1];
    let mut angular_pair = vec![vec![0.0; r + 1]; r + 1];
    for k in 0..CIRCLE_SAMPLES {
        let theta = k as f64 * dtheta;
        let amp = f.angular(theta).powi(2) * dtheta;
        let offset = line_gap(theta, cones.axis);
        let phi: Vec<f64> = (0..=r).map(|i| cones.phi(i, offset)).collect();
        angular_total += amp;
        for i in 0..=r {
            angular_single[i] += amp * phi[i];
            for j in 0..=r {
                angular_pair[i][j] += amp * phi[i] * phi[j];
            }
        }
    }
    let h = bands.spacing;
    let count = (rho_max / h).floor() as usize;
    let mut bands_sq = vec![0.0; bands.bands + 1];
    let mut low = 0.0;
    let mut mixed = vec![0.0; r + 1];
    let mut high = vec![vec![0.0; r + 1]; r + 1];
    for k in 0..=count {
        let rho = k as f64 * h;
        let weight = if k == 0 || k == count { 0.5 } else { 1.0 } * h * rho * f.radial(rho).powi(2);
        if weight == 0.0 {
            continue;
        }
        let psi0 = bands.psi(0, rho);
        for (n, v) in bands.active(rho) {
            bands_sq[n] += weight * v * v;
        }
        let growth: Vec<f64> = t.iter().map(|ti| (ti * rho.powf(1.0 / alpha)).exp()).collect();
        low += weight * psi0 * psi0;
        for i in 0..=r {
            mixed[i] += weight * 2.0 * psi0 * (1.0 - psi0) * growth[i];
            for j in 0..=r {
                high[i][j] += weight * (1.0 - psi0).powi(2) * growth[i] * growth[j];
            }
        }
    }
    let band_side = bands_sq[0] * angular_total / (r as f64 + 1.0)
        + (1..=bands.bands)
            .map(|n| {
                bands_sq[n]
                    * (0..=r)
                        .map(|i| (2.0 * t[i] * n as f64).exp() * angular_pair[i][i])
                        .sum::<f64>()
            })
            .sum::<f64>();
    let weight_side = low * angular_total
        + (0..=r).map(|i| mixed[i] * angular_single[i]).sum::<f64>()
        + (0..=r)
            .flat_map(|i| (0..=r).map(move |j| (i, j)))
            .map(|(i, j)| high[i][j] * angular_pair[i][j])
            .sum::<f64>();
    band_side / weight_side
}

/// Outcome of [`cone_distance_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeDistanceReport {
    /// `min(d(C_+ ∩ S¹, C_-), d(C_- ∩ S¹, C_+))`.
    pub mu: f64,
    pub min_ratio: f64,
    pub samples: usize,
    pub violations: usize,
}

/// Samples `ξ ∈ C_+`, `η ∈ C_-` and checks `|ξ - η| ≥ μ max(|ξ|, |η|)`.
pub fn cone_distance_check(plus: Sector, minus: Sector, samples: usize, seed: u64) -> Result<ConeDistanceReport> {
    let gap = line_gap(plus.centre, minus.centre) - plus.half_angle - minus.half_angle;
    if !(gap > 0.0) {
        return Err(Error::Precondition("cones are not transverse, μ = 0".into()));
    }
    // a unit vector at angle φ ≤ π/2 from a cone is at distance sin φ from it
    let mu = gap.min(FRAC_PI_2).sin();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |s: Sector, rng: &mut ChaCha8Rng| {
        let theta = s.centre + rng.gen_range(-s.half_angle..=s.half_angle) + if rng.gen_bool(0.5) { PI } else { 0.0 };
        let rho = rng.gen_range(0.0..10.0);
        Vector2::new(rho * theta.cos(), rho * theta.sin())
    };
    let mut min_ratio = f64::INFINITY;
    let mut violations = 0;
    for _ in 0..samples {
        let xi = draw(plus, &mut rng);
        let eta = draw(minus, &mut rng);
        let scale = xi.norm().max(eta.norm());
        if scale == 0.0 {
            continue;
        }
        let ratio = (xi - eta).norm() / scale;
        min_ratio = min_ratio.min(ratio);
        if ratio < mu * (1.0 - 1e-9) {
            violations += 1;
        }
    }
    Ok(ConeDistanceReport {
        mu,
        min_ratio,
        samples,
        violations,
    })
}

/// Outcome of [`cone_hyperbolicity_check`] for the transpose `ᵀA`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicityReport {
    /// `ᵀA(C_i) ⊆ C'_{min(i+2, r)}` for every `i ≥ 1`.
    pub inclusion: bool,
    /// `min |ᵀA ξ|/|ξ|` over `C_{r-1}`.
    pub expansion_factor: f64,
    /// `min |ξ|/|ᵀA ξ|` over `ξ` with `ᵀA ξ ∉ C'_2`.
    pub contraction_factor: f64,
    pub expansion: bool,
    pub contraction: bool,
    /// Largest `Λ` certified by the samples.
    pub lambda: f64,
}

impl HyperbolicityReport {
    pub fn holds(&self) -> bool {
        self.inclusion && self.expansion && self.contraction
    }
}

fn direction(theta: f64) -> Vector2<f64> {
    Vector2::new(theta.cos(), theta.sin())
}

/// Samples the unit circle and tests the three cone conditions for `ᵀA`
/// from `source` to `target`.
pub fn cone_hyperbolicity_check(
    matrix: &Matrix2<f64>,
    source: &ConeFamily,
    target: &ConeFamily,
    samples: usize,
) -> Result<HyperbolicityReport> {
    let r = source.r();
    if target.r() != r {
        return Err(Error::InvalidParameter("cone families differ in size".into()));
    }
    let inverse = matrix
        .try_inverse()
        .ok_or_else(|| Error::InvalidParameter("matrix is singular".into()))?;
    let map = matrix.transpose();
    let in_cone = |i: usize| -> Vec<Vector2<f64>> {
        let gamma = source.gamma(i);
        (0..=samples)
            .flat_map(|k| {
                let d = gamma * k as f64 / samples as f64;
                [direction(source.axis + d), direction(source.axis - d)]
            })
            .collect()
    };
    let inclusion = (1..=r).all(|i| {
        let limit = target.gamma((i + 2).min(r));
        in_cone(i).iter().all(|u| target.offset(map * u) <= limit + 1e-12)
    });
    let expansion_factor = in_cone(r - 1)
        .iter()
        .map(|u| (map * u).norm())
        .fold(f64::INFINITY, f64::min);
    let boundary = target.gamma(2);
    let inverse_map = inverse.transpose();
    let mut outside: Vec<Vector2<f64>> = (0..2 * samples)
        .map(|k| direction(PI * k as f64 / (2 * samples) as f64))
        .filter(|u| target.offset(map * u) > boundary)
        .collect();
    // preimages of the edges of C'_2 bound the excluded set
    for edge in [target.axis + boundary, target.axis - boundary] {
        let u = inverse_map * direction(edge);
        outside.push(u / u.norm());
    }
    let contraction_factor = outside
        .iter()
        .map(|u| 1.0 / (map * u).norm())
        .fold(f64::INFINITY, f64::min);
    let lambda = expansion_factor.min(contraction_factor);
    Ok(HyperbolicityReport {
        inclusion,
        expansion_factor,
        contraction_factor,
        expansion: expansion_factor > 1.0,
        contraction: contraction_factor > 1.0,
        lambda,
    })
}

/// `ν = (1 + Λ^{1/α})/2` and `a = 0.9 ‖ᵀA^{-1}‖^{-1/α}`, the constants
/// governing which band pairs may leak.
pub fn leak_constants(matrix: &Matrix2<f64>, lambda: f64, alpha: f64) -> Result<(f64, f64)> {
    if !(lambda > 1.0) {
        return Err(Error::Precondition(format!("Λ = {lambda} is not above 1")));
    }
    let inverse = matrix
        .try_inverse()
        .ok_or_else(|| Error::InvalidParameter("matrix is singular".into()))?
        .transpose();
    let norm = inverse.svd(false, false).singular_values.max();
    Ok(((1.0 + lambda.powf(1.0 / alpha)) / 2.0, 0.9 * norm.powf(-1.0 / alpha)))
}

/// Annulus `ρ_lo ≤ |ξ| ≤ ρ_hi` intersected with `δ_lo ≤ offset(ξ) ≤ δ_hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct AnnularSector {
    axis: f64,
    rho: (f64, f64),
    offset: (f64, f64),
}

impl AnnularSector {
    fn contains(&self, p: Vector2<f64>) -> bool {
        let rho = p.norm();
        let d = line_gap(p.y.atan2(p.x), self.axis);
        rho >= self.rho.0 && rho <= self.rho.1 && d >= self.offset.0 && d <= self.offset.1
    }

    fn edge_angles(&self) -> [f64; 8] {
        let (lo, hi) = self.offset;
        let a = self.axis;
        [a + lo, a - lo, a + hi, a - hi, a + PI + lo, a + PI - lo, a + PI + hi, a + PI - hi]
    }

    fn distance(&self, p: Vector2<f64>) -> f64 {
        let rho = p.norm();
        let d = line_gap(p.y.atan2(p.x), self.axis);
        if d >= self.offset.0 && d <= self.offset.1 {
            return (self.rho.0 - rho).max(rho - self.rho.1).max(0.0);
        }
        self.edge_angles()
            .iter()
            .map(|&theta| {
                let u = direction(theta);
                let s = p.dot(&u).clamp(self.rho.0, self.rho.1);
                (p - u * s).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn boundary(&self, per_piece: usize) -> Vec<Vector2<f64>> {
        let mut out = Vec::new();
        let (lo, hi) = self.offset;
        for base in [self.axis, self.axis + PI] {
            for sign in [1.0, -1.0] {
                for k in 0..=per_piece {
                    let s = k as f64 / per_piece as f64;
                    let theta = base + sign * (lo + (hi - lo) * s);
                    out.push(direction(theta) * self.rho.0);
                    out.push(direction(theta) * self.rho.1);
                    let radius = self.rho.0 + (self.rho.1 - self.rho.0) * s;
                    out.push(direction(base + sign * lo) * radius);
                    out.push(direction(base + sign * hi) * radius);
                }
            }
        }
        out
    }
}

/// Parameters of [`band_leak_distance_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeakConfig {
    pub nu: f64,
    pub a: f64,
    /// Pairs with `max(n, l)` at most this are not tested.
    pub threshold: usize,
}

/// Outcome of [`band_leak_distance_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum LeakOutcome {
    NotApplicable { reason: String },
    Measured { distance: f64, scale: f64, ratio: f64 },
}

/// Whether `(l, j) ↪ (n, i)`: a high-regularity block feeding a lower one.
pub fn leaks_into(r: usize, config: &LeakConfig, (n, i): (usize, usize), (l, j): (usize, usize)) -> bool {
    let (n, l) = (n as f64, l as f64);
    if i == 0 && j == 0 {
        l >= config.nu * n
    } else if i + 1 >= r && j + 1 >= r {
        n >= config.nu * l
    } else if i > j && j + 2 <= r {
        n >= config.a / 2.0 * l
    } else {
        false
    }
}

/// Distance from `supp ψ_{Θ',n,i}` to `ᵀA(supp ψ̃_{Θ,l,j})`, by exact
/// distances from densely sampled boundary points of the image.
#[allow(clippy::too_many_arguments)]
pub fn band_leak_distance_check(
    matrix: &Matrix2<f64>,
    source: &ConeFamily,
    target: &ConeFamily,
    bands: &BandPartition,
    config: &LeakConfig,
    (n, i): (usize, usize),
    (l, j): (usize, usize),
) -> Result<LeakOutcome> {
    let r = source.r();
    if i > r || j > r {
        return Err(Error::InvalidParameter(format!("cone index above r = {r}")));
    }
    if leaks_into(r, config, (n, i), (l, j)) {
        return Ok(LeakOutcome::NotApplicable {
            reason: format!("({l},{j}) ↪ ({n},{i})"),
        });
    }
    if n.max(l) <= config.threshold {
        return Ok(LeakOutcome::NotApplicable {
            reason: format!("max(n, l) ≤ {}", config.threshold),
        });
    }
    let target_set = AnnularSector {
        axis: target.axis,
        rho: bands.support(n),
        offset: if n == 0 { (0.0, FRAC_PI_2) } else { target.phi_support(i) },
    };
    let source_set = AnnularSector {
        axis: source.axis,
        rho: bands.tilde_support(l),
        offset: if l == 0 { (0.0, FRAC_PI_2) } else { source.phi_tilde_support(j) },
    };
    let map = matrix.transpose();
    let back = map
        .try_inverse()
        .ok_or_else(|| Error::InvalidParameter("matrix is singular".into()))?;
    let overlapping = target_set.boundary(64).iter().any(|p| source_set.contains(back * p));
    let distance = if overlapping {
        0.0
    } else {
        source_set
            .boundary(4096)
            .par_iter()
            .map(|q| target_set.distance(map * q))
            .reduce(|| f64::INFINITY, f64::min)
    };
    let scale = (n.max(l) as f64).powf(bands.alpha);
    Ok(LeakOutcome::Measured {
        distance,
        scale,
        ratio: distance / scale,
    })
}

/// Log-log slope of `ys` against `xs`, used for reporting trends.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    Ok(fit_line(&lx, &ly)?.slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn hyperbolic() -> Matrix2<f64> {
        Matrix2::new(4.0, 0.0, 0.0, 0.25)
    }

    fn family(nu: f64, a: f64) -> ConeFamily {
        ConeFamily::nested(0.0, 4, 2.0, 2.0, nu, a).unwrap()
    }

    #[test]
    fn cutoff_profile() {
        assert_eq!(cutoff(0.5), 1.0);
        assert_eq!(cutoff(1.0), 0.0);
        assert_abs_diff_eq!(cutoff(0.75), 0.5, epsilon = 1e-15);
        assert!(cutoff(0.6) > cutoff(0.7));
    }

    #[test]
    fn gaussian_taylor_matches_hermite() {
        let p = GevreyProfile::gaussian(2.0).unwrap();
        let c = p.taylor(0.7, 4).unwrap();
        let f = (-0.49f64 / 2.0).exp();
        // f'' = (x² - 1) f, f'''' = (x⁴ - 6x² + 3) f
        assert_abs_diff_eq!(c[2] * 2.0, (0.49 - 1.0) * f, epsilon = 1e-14);
        assert_abs_diff_eq!(c[4] * 24.0, (0.7f64.powi(4) - 6.0 * 0.49 + 3.0) * f, epsilon = 1e-14);
    }

    #[test]
    fn bump_taylor_matches_closed_derivative() {
        let p = GevreyProfile::bump(1.0).unwrap();
        let x: f64 = 0.3;
        let c = p.taylor(x, 2).unwrap();
        let f = p.eval(x);
        // f' = f (x^{-2} - (1-x)^{-2}) for a = 1
        let g1 = x.powi(-2) - (1.0 - x).powi(-2);
        let g2 = -2.0 * x.powi(-3) - 2.0 * (1.0 - x).powi(-3);
        assert_abs_diff_eq!(c[0], f, epsilon = 1e-17);
        assert!((c[1] - f * g1).abs() < 1e-14 * (f * g1).abs());
        assert!((2.0 * c[2] - f * (g1 * g1 + g2)).abs() < 1e-13 * f.abs());
    }

    #[test]
    fn gevrey_condition_examples() {
        let g = gevrey_condition_check(&GevreyProfile::gaussian(2.0).unwrap(), 12).unwrap();
        assert!(g.passes);
        assert!(g.radius.unwrap() <= 2.0);
        let b = gevrey_condition_check(&GevreyProfile::bump(1.0).unwrap(), 8).unwrap();
        assert!(b.passes, "{b:?}");
        let i = gevrey_condition_check(&GevreyProfile::indicator().unwrap(), 4).unwrap();
        assert!(!i.passes);
        assert_eq!(i.failed_order, Some(1));
    }

    #[test]
    fn decay_of_gaussian() {
        let r = fourier_decay_check(&GevreyProfile::gaussian(2.0).unwrap()).unwrap();
        assert_eq!(r.verdict, DecayVerdict::Pass);
        assert!(r.fitted_exponent >= 1.9, "{r:?}");
    }

    #[test]
    fn decay_of_bump() {
        let r = fourier_decay_check(&GevreyProfile::bump(1.0).unwrap()).unwrap();
        assert_eq!(r.verdict, DecayVerdict::Pass);
        assert!((0.42..=0.58).contains(&r.fitted_exponent), "{r:?}");
    }

    #[test]
    fn indicator_is_flagged() {
        let r = fourier_decay_check(&GevreyProfile::indicator().unwrap()).unwrap();
        assert_eq!(r.verdict, DecayVerdict::NonGevrey);
        assert!(r.tail_slope > -1.5, "{r:?}");
    }

    #[test]
    fn profile_rejects_short_extent() {
        assert!(GevreyProfile::new(ProfileFamily::Gaussian, 2.0, 12, 4.0).is_err());
        assert!(GevreyProfile::new(ProfileFamily::Gaussian, 1.0, 12, 40.0).is_err());
    }

    #[test]
    fn partition_examples() {
        let alpha = 3.5;
        let p = build_band_partition(alpha, 6, 7.0f64.powf(alpha) + 1.0).unwrap();
        assert!(p.report.max_sum_error <= 1e-12);
        assert!(p.report.max_overlap <= 2);
        for rho in p.grid() {
            if p.psi(3, rho) != 0.0 {
                assert!(rho >= 3.0f64.powf(alpha) && rho <= 4.0f64.powf(alpha) + 1.0);
            }
            if p.psi(0, rho) != 0.0 {
                assert!(rho <= 2.0);
            }
            if p.psi(3, rho) != 0.0 {
                assert_eq!(p.psi_tilde(3, rho), 1.0);
            }
        }
        assert!(build_band_partition(alpha, 6, 100.0).is_err());
    }

    #[test]
    fn weight_constraints() {
        assert!(check_weight_exponents(&[0.0, 0.0, 0.0], 1.2, 0.6).is_err());
        let t = default_weight_exponents(4, 1.2, 0.6).unwrap();
        assert_eq!(t.len(), 5);
        assert!(check_weight_exponents(&[1.0, -1.0, -1.1], 1.2, 0.6).is_ok());
        assert!(check_weight_exponents(&[1.0, -1.0, -1.5], 1.2, 0.6).is_err());
    }

    #[test]
    fn angular_partition() {
        let c = family(1.2, 0.6);
        for k in 0..=1000 {
            let d = FRAC_PI_2 * k as f64 / 1000.0;
            let sum: f64 = (0..=4).map(|i| c.phi(i, d)).sum();
            assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-14);
            for i in 0..=4 {
                let v = c.phi(i, d);
                assert!(v >= 0.0);
                if v > 0.0 {
                    let (lo, hi) = c.phi_support(i);
                    assert!(d >= lo && d <= hi);
                    assert!(d < c.gamma(i) || i == 0);
                    assert!(d > c.gamma(i + 2) || i + 2 > 4);
                }
            }
        }
    }

    #[test]
    fn opposite_axes_distance() {
        let plus = Sector { centre: 0.0, half_angle: 0.0 };
        let minus = Sector { centre: FRAC_PI_2, half_angle: 0.0 };
        let r = cone_distance_check(plus, minus, 10_000, 1).unwrap();
        assert_abs_diff_eq!(r.mu, 1.0, epsilon = 1e-15);
        assert_eq!(r.violations, 0);
        assert!(r.min_ratio >= 1.0 - 1e-12);
    }

    #[test]
    fn separated_sectors_distance() {
        let plus = Sector { centre: 0.0, half_angle: 0.5 };
        let minus = Sector { centre: 0.5 + 0.5236 + 0.4, half_angle: 0.4 };
        let r = cone_distance_check(plus, minus, 100_000, 7).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.min_ratio >= r.mu * (1.0 - 1e-9));
        let touching = Sector { centre: 0.9, half_angle: 0.4 };
        assert!(cone_distance_check(plus, touching, 10, 1).is_err());
    }

    #[test]
    fn hyperbolic_map_passes() {
        let c = family(1.2, 0.6);
        let r = cone_hyperbolicity_check(&hyperbolic(), &c, &c, 2000).unwrap();
        assert!(r.holds(), "{r:?}");
        assert!(r.lambda > 1.5);
        assert_abs_diff_eq!(r.contraction_factor, (257.0f64 / 32.0).sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn controls_fail() {
        let c = family(1.2, 0.6);
        let id = cone_hyperbolicity_check(&Matrix2::identity(), &c, &c, 500).unwrap();
        assert!(!id.expansion);
        let rot = Matrix2::new(0.0, -1.0, 1.0, 0.0);
        let rr = cone_hyperbolicity_check(&rot, &c, &c, 500).unwrap();
        assert!(!rr.inclusion);
    }

    #[test]
    fn leak_relation_and_distances() {
        let alpha = 3.5;
        let c0 = family(1.2, 0.6);
        let report = cone_hyperbolicity_check(&hyperbolic(), &c0, &c0, 2000).unwrap();
        let (nu, a) = leak_constants(&hyperbolic(), report.lambda, alpha).unwrap();
        let c = family(nu, a);
        let bands = build_band_partition(alpha, 20, 21.0f64.powf(alpha) + 1.0).unwrap();
        let cfg = LeakConfig { nu, a, threshold: 4 };
        let na = band_leak_distance_check(&hyperbolic(), &c, &c, &bands, &cfg, (6, 0), (18, 0)).unwrap();
        assert!(matches!(na, LeakOutcome::NotApplicable { .. }));
        let mut ratios = Vec::new();
        for k in 4..10 {
            match band_leak_distance_check(&hyperbolic(), &c, &c, &bands, &cfg, (2 * k, 0), (k, 0)).unwrap() {
                LeakOutcome::Measured { ratio, .. } => ratios.push(ratio),
                other => panic!("{other:?}"),
            }
        }
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().copied().fold(0.0, f64::max);
        assert!(lo > 0.0 && hi / lo < 2.0, "{ratios:?}");
        let cross = band_leak_distance_check(&hyperbolic(), &c, &c, &bands, &cfg, (10, 0), (10, 2)).unwrap();
        match cross {
            LeakOutcome::Measured { ratio, .. } => assert!(ratio > 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sandwich_constants() {
        let alpha = 3.5;
        let c = family(1.17, 0.6);
        let bands = build_band_partition(alpha, 12, 13.0f64.powf(alpha) + 1.0).unwrap();
        let tests = SpectralTestFunction::defaults(13.0f64.powf(alpha));
        let r = weight_and_equivalence(&c, &bands, &tests).unwrap();
        assert!(r.unity_error <= 1e-12, "{}", r.unity_error);
        assert!(r.max_radial_overlap <= 2 && r.max_angular_overlap <= 2);
        assert!(r.sandwich_constant.is_finite());
        assert!(r.sandwich_spread < 2.0, "{:?}", r.sandwich_by_band);
        assert!(r.ratios_within, "{:?} vs {}", r.ratios, r.sandwich_constant);
        assert!(r.fine_constants.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    }
}
