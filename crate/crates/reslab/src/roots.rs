//! Polynomial zeros by Aberth–Ehrlich iteration, winding numbers by the
//! argument principle, and grouping of nearby zeros into multiplicities.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Settings for [`aberth`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AberthConfig {
    pub max_iter: usize,
    /// Relative backward-error target on the polynomial residual.
    pub tol: f64,
}

impl Default for AberthConfig {
    fn default() -> Self {
        Self {
            max_iter: 200,
            tol: 1e-12,
        }
    }
}

/// Residual at which a root is accepted outright, a few units of roundoff.
const RESIDUAL_FLOOR: f64 = 16.0 * f64::EPSILON;

/// Output of [`aberth`].
#[derive(Debug, Clone, PartialEq)]
pub struct Roots {
    pub roots: Vec<Complex64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Degree after dropping exactly-zero leading coefficients.
pub fn effective_degree(coeffs: &[Complex64]) -> usize {
    coeffs
        .iter()
        .rposition(|c| c.norm() != 0.0)
        .unwrap_or(0)
}

/// `(p(z), p'(z), Σ |b_n| |z|^n)` by Horner.
fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64, f64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    let r = z.norm();
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
        scale = scale * r + c.norm();
    }
    (p, dp, scale)
}

/// Newton correction `p(z)/p'(z)` and the relative residual, using the
/// reversed polynomial outside the unit disk to avoid overflow.
fn newton_step(coeffs: &[Complex64], z: Complex64) -> (Complex64, f64) {
    let d = coeffs.len() - 1;
    if z.norm() <= 1.0 {
        let (p, dp, s) = horner(coeffs, z);
        (p / dp, p.norm() / s)
    } else {
        let u = z.inv();
        let rev: Vec<Complex64> = coeffs.iter().rev().copied().collect();
        let (q, dq, s) = horner(&rev, u);
        let denom = u * (Complex64::new(d as f64, 0.0) - u * dq / q);
        (denom.inv(), q.norm() / s)
    }
}

/// Starting points on circles read off the Newton polygon of the
/// coefficient moduli.
fn initial_guesses(coeffs: &[Complex64]) -> Vec<Complex64> {
    let d = coeffs.len() - 1;
    let pts: Vec<(usize, f64)> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(i, c)| (i, c.norm().ln()))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            let cross = (x2 as f64 - x1 as f64) * (p.1 - y1) - (y2 - y1) * (p.0 as f64 - x1 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut out = Vec::with_capacity(d);
    for w in hull.windows(2) {
        let (i, yi) = w[0];
        let (j, yj) = w[1];
        let count = j - i;
        let radius = ((yi - yj) / count as f64).exp();
        for k in 0..count {
            let angle = 2.0 * PI * k as f64 / count as f64 + 2.0 * PI * i as f64 / d as f64 + 0.4;
            out.push(Complex64::from_polar(radius, angle));
        }
    }
    out
}

/// All zeros of the polynomial `Σ b_n z^n` (ascending coefficients).
///
/// Zero coefficients at the top are dropped; zeros at the origin are
/// returned exactly.
pub fn aberth(coeffs: &[Complex64], config: AberthConfig) -> Result<Roots> {
    let d = effective_degree(coeffs);
    let low = coeffs.iter().position(|c| c.norm() != 0.0).unwrap_or(0);
    if coeffs.iter().all(|c| c.norm() == 0.0) {
        return Err(Error::Domain("zero polynomial".into()));
    }
    let mut roots = vec![Complex64::new(0.0, 0.0); low];
    let reduced: Vec<Complex64> = coeffs[low..=d].to_vec();
    let n = reduced.len() - 1;
    if n == 0 {
        return Ok(Roots {
            roots,
            iterations: 0,
            converged: true,
        });
    }
    if n == 1 {
        roots.push(-reduced[0] / reduced[1]);
        return Ok(Roots {
            roots,
            iterations: 0,
            converged: true,
        });
    }
    let mut z = initial_guesses(&reduced);
    let mut done = vec![false; n];
    let mut converged_residual = vec![false; n];
    let mut iterations = 0;
    while iterations < config.max_iter && done.iter().any(|d| !d) {
        iterations += 1;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (ratio, residual) = newton_step(&reduced, z[i]);
            if residual <= RESIDUAL_FLOOR {
                done[i] = true;
                continue;
            }
            if !ratio.re.is_finite() || !ratio.im.is_finite() {
                continue;
            }
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.re.is_finite() && step.im.is_finite() {
                z[i] -= step;
                if step.norm() <= config.tol * z[i].norm() {
                    done[i] = true;
                }
            }
            if residual <= config.tol {
                converged_residual[i] = true;
            }
        }
    }
    roots.extend(z);
    Ok(Roots {
        roots,
        iterations,
        converged: done.iter().zip(&converged_residual).all(|(&d, &r)| d || r),
    })
}

/// Winding number of `f` around the origin along `|z - center| = radius`.
///
/// Sampling is refined until every step turns by less than a quarter turn
/// and two successive resolutions agree.
pub fn winding_number<F>(f: F, center: Complex64, radius: f64) -> Result<i64>
where
    F: Fn(Complex64) -> Complex64,
{
    let mut samples = 256usize;
    let mut previous: Option<i64> = None;
    while samples <= 1 << 20 {
        let mut total = 0.0;
        let mut smooth = true;
        let first = f(center + Complex64::from_polar(radius, 0.0));
        if first.norm() == 0.0 || !first.re.is_finite() {
            return Err(Error::BoundaryAmbiguity { radius });
        }
        let mut last = first;
        for k in 1..=samples {
            let theta = 2.0 * PI * k as f64 / samples as f64;
            let value = if k == samples {
                first
            } else {
                f(center + Complex64::from_polar(radius, theta))
            };
            if value.norm() == 0.0 || !value.re.is_finite() || !value.im.is_finite() {
                return Err(Error::BoundaryAmbiguity { radius });
            }
            let step = (value / last).arg();
            if step.abs() > PI / 4.0 {
                smooth = false;
            }
            total += step;
            last = value;
        }
        let count = (total / (2.0 * PI)).round() as i64;
        if smooth {
            if previous == Some(count) {
                return Ok(count);
            }
            previous = Some(count);
        }
        samples *= 2;
    }
    Err(Error::Convergence(format!(
        "winding number on radius {radius} did not stabilise"
    )))
}

/// Winding number of a polynomial on `|z| = radius`, evaluated with
/// coefficients rescaled to the circle so nothing overflows.
pub fn polynomial_winding(coeffs: &[Complex64], radius: f64) -> Result<i64> {
    let d = effective_degree(coeffs);
    let mut scaled: Vec<Complex64> = Vec::with_capacity(d + 1);
    let mut log_scale = Vec::with_capacity(d + 1);
    for (n, c) in coeffs[..=d].iter().enumerate() {
        log_scale.push(if c.norm() > 0.0 {
            c.norm().ln() + n as f64 * radius.ln()
        } else {
            f64::NEG_INFINITY
        });
    }
    let top = log_scale.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for (n, c) in coeffs[..=d].iter().enumerate() {
        if c.norm() > 0.0 {
            scaled.push(c / c.norm() * (log_scale[n] - top).exp());
        } else {
            scaled.push(Complex64::new(0.0, 0.0));
        }
    }
    winding_number(
        |u| {
            scaled
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * u + c)
        },
        Complex64::new(0.0, 0.0),
        1.0,
    )
}

/// A zero together with its multiplicity and the spread of the raw roots
/// merged into it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroCluster {
    pub center: Complex64,
    pub multiplicity: usize,
    pub spread: f64,
}

/// Groups roots into multiple zeros.
///
/// A set of `m` roots is merged when its diameter is at most
/// `cluster_eps^(1/m)` times the modulus of its centroid, matching the
/// `eps^(1/m)` splitting of an `m`-fold zero under a relative perturbation of
/// size `eps`. The largest admissible group around each seed wins.
pub fn cluster_roots(roots: &[Complex64], cluster_eps: f64) -> Vec<ZeroCluster> {
    let mut order: Vec<usize> = (0..roots.len()).collect();
    order.sort_by(|&a, &b| roots[a].norm().total_cmp(&roots[b].norm()));
    let mut used = vec![false; roots.len()];
    let mut out = Vec::new();
    for &seed in &order {
        if used[seed] {
            continue;
        }
        let mut neighbours: Vec<usize> = (0..roots.len()).filter(|&j| !used[j] && j != seed).collect();
        neighbours.sort_by(|&a, &b| {
            (roots[a] - roots[seed])
                .norm()
                .total_cmp(&(roots[b] - roots[seed]).norm())
        });
        let mut best = vec![seed];
        let mut group = vec![seed];
        for &j in &neighbours {
            group.push(j);
            let m = group.len();
            let centroid: Complex64 = group.iter().map(|&i| roots[i]).sum::<Complex64>() / m as f64;
            let diameter = group
                .iter()
                .flat_map(|&a| group.iter().map(move |&b| (a, b)))
                .map(|(a, b)| (roots[a] - roots[b]).norm())
                .fold(0.0, f64::max);
            let scale = centroid.norm().max(f64::MIN_POSITIVE);
            if diameter <= cluster_eps.powf(1.0 / m as f64) * scale {
                best = group.clone();
            }
            if (roots[j] - roots[seed]).norm() > scale {
                break;
            }
        }
        for &i in &best {
            used[i] = true;
        }
        let m = best.len();
        let center: Complex64 = best.iter().map(|&i| roots[i]).sum::<Complex64>() / m as f64;
        let spread = best
            .iter()
            .map(|&i| (roots[i] - center).norm())
            .fold(0.0, f64::max);
        out.push(ZeroCluster {
            center,
            multiplicity: m,
            spread,
        });
    }
    out
}

/// Coefficients of the `order`-th derivative.
pub fn derivative(coeffs: &[Complex64], order: usize) -> Vec<Complex64> {
    let mut d = coeffs.to_vec();
    for _ in 0..order {
        if d.len() <= 1 {
            return vec![Complex64::new(0.0, 0.0)];
        }
        d = d
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, &c)| c * n as f64)
            .collect();
    }
    d
}

/// Moves each cluster centre onto the simple zero of `p^(m-1)` nearest to
/// it. The centroid of a split `m`-fold zero is only accurate to the
/// splitting radius, while the zero of the derivative is well conditioned.
pub fn refine_clusters(coeffs: &[Complex64], clusters: &mut [ZeroCluster]) {
    for cl in clusters.iter_mut().filter(|c| c.multiplicity > 1) {
        let q = derivative(coeffs, cl.multiplicity - 1);
        if q.len() < 2 {
            continue;
        }
        let reach = 2.0 * cl.spread + f64::EPSILON * cl.center.norm();
        let mut z = cl.center;
        for _ in 0..60 {
            let (step, _) = newton_step(&q, z);
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            z -= step;
            if step.norm() <= 4.0 * f64::EPSILON * z.norm() {
                break;
            }
        }
        if (z - cl.center).norm() <= reach {
            cl.center = z;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn expand(zeros: &[Complex64]) -> Vec<Complex64> {
        let mut p = vec![c(1.0, 0.0)];
        for &z in zeros {
            let mut next = vec![c(0.0, 0.0); p.len() + 1];
            for (i, &a) in p.iter().enumerate() {
                next[i] -= a * z;
                next[i + 1] += a;
            }
            p = next;
        }
        p
    }

    #[test]
    fn linear_root() {
        let r = aberth(&[c(1.0, 0.0), c(-2.0, 0.0)], AberthConfig::default()).unwrap();
        assert_eq!(r.roots, vec![c(0.5, 0.0)]);
    }

    #[test]
    fn simple_roots_recovered() {
        let zeros = [c(1.0, 0.0), c(-2.0, 1.0), c(0.5, -0.5), c(3.0, 3.0), c(-0.25, 0.0)];
        let r = aberth(&expand(&zeros), AberthConfig::default()).unwrap();
        assert!(r.converged);
        for z in zeros {
            let best = r.roots.iter().map(|x| (x - z).norm()).fold(f64::MAX, f64::min);
            assert!(best < 1e-12, "{z}: {best}");
        }
    }

    #[test]
    fn widely_spread_roots() {
        let zeros: Vec<Complex64> = (0..12).map(|k| c(2f64.powi(k) * 0.1, 0.0)).collect();
        let r = aberth(&expand(&zeros), AberthConfig::default()).unwrap();
        for z in &zeros {
            let best = r.roots.iter().map(|x| (x - z).norm() / z.norm()).fold(f64::MAX, f64::min);
            assert!(best < 1e-9, "{z}: {best}");
        }
    }

    #[test]
    fn origin_roots_are_exact() {
        let r = aberth(&[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)], AberthConfig::default()).unwrap();
        assert_eq!(r.roots.iter().filter(|z| z.norm() == 0.0).count(), 2);
    }

    #[test]
    fn winding_counts_enclosed_roots() {
        let p = expand(&[c(0.5, 0.0), c(0.0, 2.0), c(-3.0, 0.0)]);
        assert_eq!(polynomial_winding(&p, 1.0).unwrap(), 1);
        assert_eq!(polynomial_winding(&p, 2.5).unwrap(), 2);
        assert_eq!(polynomial_winding(&p, 10.0).unwrap(), 3);
    }

    #[test]
    fn winding_of_exponential_is_zero() {
        let w = winding_number(|z| (z * c(0.0, PI)).exp(), c(0.0, 0.0), 6.0).unwrap();
        assert_eq!(w, 0);
    }

    #[test]
    fn quadruple_root_is_grouped() {
        let zeros = [c(8.0, 0.0), c(32.0, 0.0), c(32.0, 0.0), c(32.0, 0.0), c(32.0, 0.0)];
        let r = aberth(&expand(&zeros), AberthConfig::default()).unwrap();
        let mut clusters = cluster_roots(&r.roots, 1e-6);
        refine_clusters(&expand(&zeros), &mut clusters);
        assert_eq!(clusters.len(), 2);
        assert_eq!(clusters[0].multiplicity, 1);
        assert_eq!(clusters[1].multiplicity, 4);
        assert!((clusters[1].center - c(32.0, 0.0)).norm() < 1e-9 * 32.0, "{clusters:?} {r:?}");
    }

    #[test]
    fn close_but_distinct_roots_stay_apart() {
        let roots = [c(1.0, 0.0), c(1.01, 0.0)];
        assert_eq!(cluster_roots(&roots, 1e-6).len(), 2);
    }
}
