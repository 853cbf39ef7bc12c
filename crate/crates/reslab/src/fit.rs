//! Least-squares line fits used by the decay and growth diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Result of fitting `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Ordinary least squares on finite pairs. Needs at least two distinct x.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    let pairs: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(&x, &y)| (x, y))
        .collect();
    let n = pairs.len() as f64;
    if pairs.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            available: pairs.len(),
        });
    }
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pairs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pairs.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LineFit {
        slope,
        intercept,
        r_squared,
        points: pairs.len(),
    })
}

/// Fit through the origin, `y = slope * x`.
pub fn fit_proportional(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    let pairs: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(&x, &y)| (x, y))
        .collect();
    let sxx: f64 = pairs.iter().map(|p| p.0 * p.0).sum();
    if pairs.is_empty() || sxx == 0.0 {
        return Err(Error::InsufficientData {
            needed: 1,
            available: 0,
        });
    }
    let slope = pairs.iter().map(|p| p.0 * p.1).sum::<f64>() / sxx;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / pairs.len() as f64;
    let ss_res: f64 = pairs.iter().map(|p| (p.1 - slope * p.0).powi(2)).sum();
    let ss_tot: f64 = pairs.iter().map(|p| (p.1 - my).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(LineFit {
        slope,
        intercept: 0.0,
        r_squared,
        points: pairs.len(),
    })
}

/// Exponent `q` in `[lo, hi]` maximising the `R²` of `y` regressed on
/// `x^q`, with the fit at that exponent. Scans a grid of 0.025 then
/// refines by pattern search to 1e-6, which stays reliable on flat optima.
pub fn fit_power_exponent(xs: &[f64], ys: &[f64], lo: f64, hi: f64) -> Result<(f64, LineFit)> {
    let at = |q: f64| -> Result<LineFit> {
        let powered: Vec<f64> = xs.iter().map(|x| x.powf(q)).collect();
        fit_line(&powered, ys)
    };
    let steps = ((hi - lo) / 0.025).ceil().max(1.0) as usize;
    let mut best = (f64::NEG_INFINITY, lo);
    for i in 0..=steps {
        let q = (lo + 0.025 * i as f64).min(hi);
        let r2 = at(q)?.r_squared;
        if r2 > best.0 {
            best = (r2, q);
        }
    }
    let mut q = best.1;
    let mut here = best.0;
    let mut step = 0.0125;
    while step > 1e-6 {
        let up = if q + step <= hi { at(q + step)?.r_squared } else { f64::NEG_INFINITY };
        let down = if q - step >= lo { at(q - step)?.r_squared } else { f64::NEG_INFINITY };
        if up > here && up >= down {
            q += step;
            here = up;
        } else if down > here {
            q -= step;
            here = down;
        } else {
            step /= 2.0;
        }
    }
    Ok((q, at(q)?))
}
