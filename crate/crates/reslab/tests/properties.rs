//! Property tests for the invariants of each module.

use num_complex::Complex64;
use proptest::prelude::*;
use reslab::counterexamples::{CounterexampleSeries, RotationSpec, SeriesKind};
use reslab::entire::jensen_count;
use reslab::gevrey::{build_band_partition, ConeFamily};
use reslab::horseshoe::HorseshoeModel;
use reslab::nuclear::{counting_to_decay, diagonal_det_coefficients, ruse_coefficients, stretched_sequence, SingularValueModel};
use reslab::series::{det_from_traces, traces_from_det, PowerSeries, TraceSequence};
use reslab::shift::{flat_trace_shift, matrix_trace_oracle, shift_traces, zeta_inverse_series, WeightSpec};
use reslab::textio::format_f64;

fn complex(bound: f64) -> impl Strategy<Value = Complex64> {
    (0.0..bound, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

fn normalized_series(max_order: usize) -> impl Strategy<Value = PowerSeries> {
    prop::collection::vec(complex(1.0), 1..=max_order).prop_map(|tail| {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        c.extend(tail);
        PowerSeries::new(c).unwrap()
    })
}

fn small_weight(len: usize) -> impl Strategy<Value = WeightSpec> {
    prop::collection::vec(complex(0.5), 0..=len).prop_map(|a| WeightSpec::explicit(a).unwrap())
}

fn scale(s: &PowerSeries) -> f64 {
    s.coeffs().iter().map(|c| c.norm()).fold(1.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn traces_and_determinant_round_trip(s in normalized_series(16)) {
        let back = det_from_traces(&traces_from_det(&s).unwrap(), s.order()).unwrap();
        let tol = 1e-12 * scale(&s) * 10f64.powi(s.order() as i32 / 4);
        for n in 0..=s.order() {
            prop_assert!((back.coeff(n) - s.coeff(n)).norm() <= tol, "n = {}", n);
        }
    }

    #[test]
    fn traces_of_product_add(f in normalized_series(10), g in normalized_series(10)) {
        let order = f.order().min(g.order());
        let (f, g) = (f.truncate(order), g.truncate(order));
        let tf = traces_from_det(&f).unwrap();
        let tg = traces_from_det(&g).unwrap();
        let tfg = traces_from_det(&f.mul(&g)).unwrap();
        for n in 1..=order {
            let sum = tf.get(n).unwrap() + tg.get(n).unwrap();
            prop_assert!((tfg.get(n).unwrap() - sum).norm() <= 1e-9 * sum.norm().max(1.0));
        }
    }

    #[test]
    fn power_sums_rebuild_the_product(zeros in prop::collection::vec((0.1f64..3.0, 0.0..std::f64::consts::TAU), 1..=10)) {
        let zeros: Vec<Complex64> = zeros.into_iter().map(|(r, t)| Complex64::from_polar(r, t)).collect();
        let order = 10;
        let traces = TraceSequence::exact(
            (1..=order).map(|n| zeros.iter().map(|z| z.inv().powu(n as u32)).sum()).collect(),
        );
        let rebuilt = det_from_traces(&traces, order).unwrap();
        let direct = PowerSeries::from_zeros(&zeros, order).unwrap();
        // the identities cancel terms as large as the n-th power of the inverse modulus sum
        let inverse_sum: f64 = zeros.iter().map(|z| 1.0 / z.norm()).sum();
        for n in 0..=order {
            let tol = 1e-10 * scale(&direct).max(inverse_sum.max(1.0).powi(n as i32));
            prop_assert!((rebuilt.coeff(n) - direct.coeff(n)).norm() <= tol, "n = {}: {} vs {}", n, rebuilt.coeff(n), direct.coeff(n));
        }
    }

    #[test]
    fn matrix_traces_equal_orbit_sums(spec in small_weight(12), size in 2usize..=10) {
        for power in 1..size {
            let m = matrix_trace_oracle(&spec, size, power).unwrap();
            let o = flat_trace_shift(&spec, power).unwrap();
            prop_assert!((m - o).norm() <= 1e-10 * o.norm().max(1e-300));
        }
    }

    #[test]
    fn zeta_inverse_two_routes(spec in small_weight(12), order in 1usize..=10) {
        let closed = zeta_inverse_series(&spec, order).unwrap();
        let orbit = det_from_traces(&shift_traces(&spec, order).unwrap(), order).unwrap();
        for n in 0..=order {
            prop_assert!((closed.coeff(n) - orbit.coeff(n)).norm() <= 1e-10);
        }
    }

    #[test]
    fn positive_weights_give_positive_traces(alpha in prop::collection::vec(-0.95f64..2.0, 0..=10), n in 1usize..=10) {
        let spec = WeightSpec::explicit(alpha.iter().map(|&a| a.into()).collect()).unwrap();
        let t = flat_trace_shift(&spec, n).unwrap();
        prop_assert!(t.re > 0.0);
        prop_assert!(t.im == 0.0);
    }

    #[test]
    fn trace_ignores_later_coefficients(
        alpha in prop::collection::vec(complex(0.5), 12),
        n in 1usize..=10,
        bump in complex(0.4),
    ) {
        let base = WeightSpec::explicit(alpha.clone()).unwrap();
        let mut changed = alpha;
        for a in changed.iter_mut().skip(n) {
            *a += bump;
        }
        let changed = WeightSpec::explicit(changed).unwrap();
        prop_assert_eq!(flat_trace_shift(&base, n).unwrap(), flat_trace_shift(&changed, n).unwrap());
    }

    #[test]
    fn horseshoe_determinant_two_routes(spec in small_weight(4), cutoff in 1usize..=6, order in 1usize..=12) {
        let m = HorseshoeModel::new(spec, cutoff).unwrap();
        let a = m.determinant(order).unwrap();
        let b = m.determinant_from_traces(order).unwrap();
        for n in 0..=order {
            prop_assert!((a.coeff(n) - b.coeff(n)).norm() <= 1e-9 * a.coeff(n).norm().max(1.0));
        }
    }

    #[test]
    fn jensen_bound_dominates_count(
        zeros in prop::collection::vec((1.5f64..20.0, 0.0..std::f64::consts::TAU), 1..=6),
        r in 0.06f64..0.5,
    ) {
        let zeros: Vec<Complex64> = zeros.into_iter().map(|(m, t)| Complex64::from_polar(m, t)).collect();
        // padding past the degree shows the series is exactly a polynomial
        let series = PowerSeries::from_zeros(&zeros, zeros.len() + 8).unwrap();
        let exact = zeros.iter().filter(|z| z.norm() < 1.0 / r).count() as u64;
        prop_assert!(jensen_count(&series, r).unwrap() >= exact);
    }

    #[test]
    fn truncated_traces_overlap(step in 1usize..=3, a in 200u64..5_000, b in 5_000u64..50_000) {
        let s = CounterexampleSeries::new(SeriesKind::Logarithmic, 2, RotationSpec::golden(4).unwrap()).unwrap();
        let x = s.trace(step, a).unwrap();
        let y = s.trace(step, b).unwrap();
        prop_assert!(x.overlaps(&y));
    }

    #[test]
    fn dominated_models_have_dominated_coefficients(
        factors in prop::collection::vec((0.0f64..=1.0, any::<bool>()), 30),
    ) {
        let (theta, beta) = (0.5, 1.0);
        let bound = stretched_sequence(theta, beta, factors.len());
        // running minimum keeps the moduli non-increasing and below the bound
        let mut modulus = f64::INFINITY;
        let values = factors
            .iter()
            .zip(&bound)
            .map(|(&(f, negative), &b)| {
                modulus = modulus.min(f * b);
                Complex64::new(if negative { -modulus } else { modulus }, 0.0)
            })
            .collect();
        let model = SingularValueModel::explicit(values).unwrap();
        let d = diagonal_det_coefficients(&model, 12).unwrap();
        let r = ruse_coefficients(theta, beta, 12).unwrap();
        for n in 0..=12 {
            prop_assert!(d.coeff(n).norm() <= r[n] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn decay_certificate_reverifies(theta in 0.2f64..0.8, beta in 1.0f64..2.5) {
        let a = stretched_sequence(theta, beta, 300);
        let cert = counting_to_decay(&a, beta).unwrap();
        for (i, &x) in a.iter().enumerate() {
            prop_assert!(x <= cert.scale * cert.theta.powf(((i + 1) as f64).powf(1.0 / beta)) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn numbers_round_trip_through_text(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(format_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn weights_round_trip_through_json(spec in small_weight(6)) {
        let text = serde_json::to_string(&spec).unwrap();
        prop_assert_eq!(serde_json::from_str::<WeightSpec>(&text).unwrap(), spec);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bands_partition_unity(alpha in 1.5f64..4.0, bands in 1usize..=8) {
        let p = build_band_partition(alpha, bands, (bands as f64 + 1.0).powf(alpha) + 1.0).unwrap();
        prop_assert!(p.report.max_sum_error <= 1e-12);
        prop_assert!(p.report.max_overlap <= 2);
        prop_assert!(p.report.supports_ok);
    }

    #[test]
    fn at_most_four_cutoffs_meet(rho in 0.0f64..500.0, offset in 0.0f64..std::f64::consts::FRAC_PI_2) {
        let p = build_band_partition(3.5, 5, 6f64.powf(3.5) + 1.0).unwrap();
        let cones = ConeFamily::nested(0.0, 4, 2.0, 2.0, 1.2, 0.6).unwrap();
        let radial = p.active(rho).len();
        let angular: Vec<f64> = (0..=4).map(|i| cones.phi(i, offset)).collect();
        let sum: f64 = angular.iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
        prop_assert!(radial <= 2);
        prop_assert!(radial * angular.iter().filter(|&&v| v != 0.0).count() <= 4);
    }
}
