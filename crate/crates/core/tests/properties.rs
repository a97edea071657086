mod common;

use common::*;
use proptest::prelude::*;
use stochorder::game::outcome;
use stochorder::moments::raw_moments;
use stochorder::ordering::lk_log_distance;
use stochorder::risk::OutcomeMixture;
use stochorder::*;

fn gumbel_params() -> impl Strategy<Value = (f64, f64)> {
    (0.0f64..40.0, 0.3f64..3.0)
}

fn simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, n).prop_map(|v| {
        let s: f64 = v.iter().sum();
        let mut out: Vec<f64> = v.iter().map(|x| x / s).collect();
        let head: f64 = out[..out.len() - 1].iter().sum();
        *out.last_mut().unwrap() = 1.0 - head;
        out
    })
}

fn pair_of_simplices() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..6, 1usize..6).prop_flat_map(|(n, m)| (simplex(n), simplex(m)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn compare_is_antisymmetric((a1, b1) in gumbel_params(), (a2, b2) in gumbel_params()) {
        let d1 = truncated(LossDistribution::gumbel(a1, b1).unwrap());
        let d2 = truncated(LossDistribution::gumbel(a2, b2).unwrap());
        let cfg = OrderingConfig::default();
        let ab = compare(&d1, &d2, &cfg);
        let ba = compare(&d2, &d1, &cfg);
        prop_assert_eq!(ab.relation, ba.relation.flipped());
    }

    #[test]
    fn compare_is_reflexive((a, b) in gumbel_params()) {
        let d = truncated(LossDistribution::gumbel(a, b).unwrap());
        prop_assert_eq!(compare(&d, &d, &OrderingConfig::default()).relation, Relation::Equivalent);
    }

    #[test]
    fn shifting_right_is_worse((a, b) in gumbel_params(), shift in 0.05f64..5.0) {
        let d1 = truncated(LossDistribution::gumbel(a, b).unwrap());
        let d2 = truncated(LossDistribution::gumbel(a + shift, b).unwrap());
        prop_assert_eq!(compare(&d1, &d2, &OrderingConfig::default()).relation, Relation::FirstPreferred);
    }

    #[test]
    fn lyapunov_log_convexity((a, b) in gumbel_params()) {
        // k -> ln E[Y^k] is convex
        let d = truncated(LossDistribution::gumbel(a, b).unwrap());
        let s = moment_sequence(&d, 32).unwrap();
        for k in 2..32 {
            let c = s.log_moment(k - 1) + s.log_moment(k + 1) - 2.0 * s.log_moment(k);
            prop_assert!(c >= -1e-9 * s.log_moment(k).abs().max(1.0), "k={} c={}", k, c);
        }
    }

    #[test]
    fn mixing_stays_between_cells((a1, b1) in gumbel_params(), (a2, b2) in gumbel_params(), w in 0.0f64..1.0) {
        let d1 = truncated(LossDistribution::gumbel(a1, b1).unwrap());
        let d2 = truncated(LossDistribution::gumbel(a2, b2).unwrap());
        let off = d1.ess_inf().min(d2.ess_inf()).min(0.0).abs();
        let s1 = moment_sequence_at(&d1, 16, off).unwrap();
        let s2 = moment_sequence_at(&d2, 16, off).unwrap();
        let mix = mix_moments(&[&s1, &s2], &[w, 1.0 - w]).unwrap();
        for k in 1..=16 {
            let (lo, hi) = (s1.log_moment(k).min(s2.log_moment(k)), s1.log_moment(k).max(s2.log_moment(k)));
            let tol = 1e-12 * hi.abs().max(1.0);
            prop_assert!(mix.log_moment(k) >= lo - tol && mix.log_moment(k) <= hi + tol);
        }
        let one = mix_moments(&[&s1, &s2], &[1.0, 0.0]).unwrap();
        prop_assert!(lk_log_distance(&one, &s1) < 1e-12);
    }

    #[test]
    fn quantile_inverts_cdf((a, b) in gumbel_params(), alpha in 0.01f64..0.99) {
        let d = LossDistribution::gumbel(a, b).unwrap();
        prop_assert!((d.cdf(d.quantile(alpha)) - alpha).abs() < 1e-6);
        let t = truncated(d);
        prop_assert!((t.cdf(t.quantile(alpha)) - alpha).abs() < 1e-6);
    }

    #[test]
    fn truncation_keeps_almost_all_mass((a, b) in gumbel_params(), e in 4u32..12) {
        let delta = 10f64.powi(-(e as i32));
        let d = LossDistribution::gumbel(a, b).unwrap();
        let t = d.truncate(&TruncationPolicy::with_delta(delta)).unwrap();
        let s = t.support();
        let kept = d.cdf(s.hi) - d.cdf(s.lo);
        prop_assert!((1.0 - kept) <= delta * (1.0 + 1e-6));
    }

    #[test]
    fn copula_marginals_are_recovered((p, q) in pair_of_simplices()) {
        let table = CopulaTable::from_fn(17, |u, v| u * v / (1.0 - 0.5 * (1.0 - u) * (1.0 - v))).unwrap();
        for c in [Copula2::Product, Copula2::Min, Copula2::Tabulated(table.clone())] {
            let w = joint_weights(&c, &p, &q).unwrap();
            for (a, b) in w.row_sums().iter().zip(&p).chain(w.col_sums().iter().zip(&q)) {
                prop_assert!((a - b).abs() < 1e-10);
            }
            prop_assert!(w.as_slice().iter().all(|x| *x >= 0.0));
        }
    }

    #[test]
    fn scalar_outcome_is_bilinear(a in prop::collection::vec(1u8..10, 4), p in simplex(2), q in simplex(2)) {
        let m = vec![vec![a[0] as f64, a[1] as f64], vec![a[2] as f64, a[3] as f64]];
        let g = point_game(&m);
        let v = outcome(&g, &p, &q).unwrap();
        let want: f64 = (0..2).map(|i| (0..2).map(|j| p[i] * m[i][j] * q[j]).sum::<f64>()).sum();
        prop_assert!((v.mean() - want).abs() < 1e-9 * want);
        let mix = mixed_payoff(&g, &p, &q).unwrap();
        prop_assert!((mix.mean() - want).abs() < 1e-9 * want);
    }

    #[test]
    fn mixture_quantiles_are_monotone(p in simplex(2), q in simplex(2), x in 0.02f64..0.48) {
        let g = gumbel_pennies();
        let mix = OutcomeMixture::new(&g, &p, &q).unwrap();
        let (lo, hi) = (mix.quantile(x), mix.quantile(1.0 - x));
        prop_assert!(lo <= hi);
        prop_assert!((mix.cdf(lo) - x).abs() < 1e-9);
    }
}

#[test]
fn uniform_maximum_degenerates() {
    // the chance that n independent rounds all stay below the 99% point
    let u = LossDistribution::uniform(1.0, 2.0).unwrap();
    let x = u.quantile(0.99);
    let c = u.cdf(x);
    assert!((c - 0.99).abs() < 1e-12);
    let first = (1..5000).find(|n| c.powi(*n) < 1e-4).unwrap();
    assert_eq!(first, 917);
}

#[test]
fn raw_moments_agree_with_shifted_sequence() {
    let d = truncated(LossDistribution::gumbel(6.27294, 2.20532).unwrap());
    let s = moment_sequence(&d, 8).unwrap();
    let a = s.raw_moments(5);
    let b = raw_moments(&d, 5).unwrap();
    for k in 0..5 {
        assert!((a[k] - b[k]).abs() <= 1e-8 * b[k].abs().max(1.0), "k={k}: {} vs {}", a[k], b[k]);
    }
}
