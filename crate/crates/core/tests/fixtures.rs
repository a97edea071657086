mod common;

use common::*;
use stochorder::gamefile::{parse_game_str, spec_from_game, spec_from_multi, to_json};
use stochorder::quadrature::{integrate_scalar, QuadratureConfig};
use stochorder::risk::{plot_rows, OutcomeMixture, DEFAULT_QUANTILES, PLOT_POINTS};
use stochorder::*;

#[test]
fn shipped_gumbel_fixture_loads() {
    let lg = parse_game(&fixture("gumbel_2x2.json")).unwrap();
    let g = lg.game().unwrap();
    assert_eq!((g.rows(), g.cols()), (2, 2));
    let m1 = moments::raw_moments(g.compact_cell(0, 0), 1).unwrap()[0];
    assert!((m1 - 30.0).abs() <= 0.005, "{m1}");
    assert_eq!(g.row_labels().unwrap()[1], "monitor");
}

#[test]
fn every_fixture_round_trips() {
    for name in ["gumbel_2x2.json", "point_2x2.json", "uniform_1x1.json", "parity_1x2.json", "two_goals.json"] {
        let a = parse_game(&fixture(name)).unwrap();
        let text = match &a.model {
            Model::Game(g) => to_json(&spec_from_game(g)),
            Model::Multi(m) => to_json(&spec_from_multi(m)),
        };
        let b = parse_game_str(&text, None).unwrap();
        match (&a.model, &b.model) {
            (Model::Game(x), Model::Game(y)) => assert_eq!(x, y, "{name}"),
            (Model::Multi(x), Model::Multi(y)) => {
                assert!(x.goals().iter().zip(y.goals()).all(|(g, h)| g == h), "{name}")
            }
            _ => panic!("{name}: model kind changed"),
        }
    }
}

#[test]
fn example_pairs_through_the_oracle() {
    let cfg = OracleConfig::default();
    let pairs = [
        (LossDistribution::gumbel(31.0063, 1.74346), LossDistribution::gumbel(32.0063, 1.74346), Relation::FirstPreferred),
        (LossDistribution::gumbel(6.27294, 2.20532), LossDistribution::gumbel(6.19073, 2.06288), Relation::SecondPreferred),
        (LossDistribution::gamma(260.345, 0.0373929), LossDistribution::weibull(20.0, 10.0), Relation::SecondPreferred),
    ];
    for (a, b, want) in pairs {
        assert_eq!(oracle_compare(&a.unwrap(), &b.unwrap(), &cfg).relation, want);
    }
}

#[test]
fn uniform_report() {
    let lg = parse_game(&fixture("uniform_1x1.json")).unwrap();
    let g = lg.game().unwrap();
    let r = solve_zero_sum(g, &lg.solver).unwrap();
    let rep = compile_report(g, &r, &DEFAULT_QUANTILES).unwrap();
    assert!((rep.expected_loss - 1.5).abs() < 1e-9);
    assert!((rep.variance - 1.0 / 12.0).abs() < 1e-9);
    assert!((rep.quantile_bounds[0].1 - 1.05).abs() < 1e-9);
    assert!((rep.quantile_bounds[1].1 - 1.95).abs() < 1e-9);
}

#[test]
fn point_game_report() {
    let lg = parse_game(&fixture("point_2x2.json")).unwrap();
    let g = lg.game().unwrap();
    let r = solve_zero_sum(g, &lg.solver).unwrap();
    let rep = compile_report(g, &r, &DEFAULT_QUANTILES).unwrap();
    assert!((rep.expected_loss - 2.5).abs() < 0.02, "{}", rep.expected_loss);
    let (q05, q95) = (rep.quantile_bounds[0].1, rep.quantile_bounds[1].1);
    assert!(q05 <= rep.expected_loss && rep.expected_loss <= q95);
}

#[test]
fn gumbel_report_matches_quadrature() {
    let lg = parse_game(&fixture("gumbel_2x2.json")).unwrap();
    let g = lg.game().unwrap();
    let r = solve_zero_sum(g, &lg.solver).unwrap();
    let rep = compile_report(g, &r, &DEFAULT_QUANTILES).unwrap();
    // independent mean: integrate the mixture survival function
    let mix = OutcomeMixture::new(g, r.p_star.probs(), r.q_star.probs()).unwrap();
    let (lo, hi) = mix.support();
    let tail = integrate_scalar(|x| 1.0 - mix.cdf(x), lo, hi, 64, QuadratureConfig::default());
    let mean = lo + tail;
    assert!((rep.expected_loss - mean).abs() < 1e-6, "{} vs {mean}", rep.expected_loss);
    assert!((rep.expected_loss - r.saddle_payoff.mean()).abs() <= 1e-9 * mean);
    assert!((rep.variance - r.saddle_payoff.variance()).abs() <= 1e-9 * rep.variance);
    let (q05, q95) = (rep.quantile_bounds[0].1, rep.quantile_bounds[1].1);
    assert!(q05 <= rep.expected_loss && rep.expected_loss <= q95);
}

#[test]
fn plot_data_is_normalized_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["gumbel_2x2.json", "point_2x2.json", "uniform_1x1.json"] {
        let lg = parse_game(&fixture(name)).unwrap();
        let g = lg.game().unwrap();
        let r = solve_zero_sum(g, &lg.solver).unwrap();
        let mix = OutcomeMixture::new(g, r.p_star.probs(), r.q_star.probs()).unwrap();
        let rows = plot_rows(&mix);
        assert_eq!(rows.len(), PLOT_POINTS);
        let area: f64 = rows.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0)).sum();
        assert!((area - 1.0).abs() < 1e-6, "{name}: {area}");
        assert!(rows.windows(2).all(|w| w[1].2 >= w[0].2), "{name}: cdf not monotone");

        let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
        emit_plot_data(g, &r, &a).unwrap();
        emit_plot_data(g, &r, &b).unwrap();
        let text = std::fs::read_to_string(&a).unwrap();
        assert_eq!(text, std::fs::read_to_string(&b).unwrap());
        assert!(text.starts_with("x,density,cdf\n"));
        assert!(!text.contains('\r'));
        assert_eq!(text.lines().count(), PLOT_POINTS + 1);
    }
}

#[test]
fn two_goal_fixture_solves() {
    let lg = parse_game(&fixture("two_goals.json")).unwrap();
    let mg = lg.multi().unwrap();
    let r = solve_mgss(mg, &lg.solver, &[0.5, 0.5]).unwrap();
    assert!(r.converged);
    assert_eq!(r.assurance.len(), 2);
    let rep = compile_mgss_report(mg, &r, &DEFAULT_QUANTILES).unwrap();
    assert_eq!(rep.per_goal.len(), 2);
    for goal in &rep.per_goal {
        assert!(goal.quantile_bounds[0].1 <= goal.quantile_bounds[1].1);
    }
}

#[test]
fn parity_fixture_is_incomparable() {
    let lg = parse_game(&fixture("parity_1x2.json")).unwrap();
    let g = lg.game().unwrap();
    assert_eq!(g.incomparable_cells(), vec![((0, 0), (0, 1))]);
    assert!(matches!(solve_zero_sum(g, &lg.solver), Err(Error::IncomparablePayoffs(0, 1))));
}

#[test]
fn classical_games_match_the_grid_oracle() {
    let cfg = OracleConfig::default();
    for (a, eq) in unique_integer_games(5, 2, 5).into_iter().chain(unique_integer_games(55, 3, 3)) {
        let g = point_game(&a);
        let o = oracle_equilibrium(&g, &cfg).unwrap();
        let res = cfg.resolution_for(a.len());
        let scale = a.iter().flatten().fold(0.0f64, |m, x| m.max(*x));
        assert!((o.value.mean() - eq.value).abs() <= res * scale, "{:?}: {} vs {}", a, o.value.mean(), eq.value);
    }
}

#[test]
fn solver_is_not_beaten_by_the_grid_oracle() {
    let cfg = OracleConfig::default();
    let ord = OrderingConfig::default();
    let games = [
        ("gumbel", gumbel_pennies()),
        ("point", point_game(&[vec![3.0, 1.0], vec![2.0, 4.0]])),
        ("mixed", mixed_3x3()),
    ];
    for (name, g) in games {
        let r = solve_zero_sum(&g, &SolverConfig::default()).unwrap();
        let o = oracle_equilibrium(&g, &cfg).unwrap();
        let rel = ordering::compare_sequences(&r.assurance, &o.value, &ord).unwrap().relation;
        let close = ordering::lk_log_distance(&r.assurance, &o.value) < 0.01;
        assert!(rel != Relation::SecondPreferred || close, "{name}: {rel:?}");
    }
}

#[test]
fn mixed_game_settles_on_the_optimal_row() {
    let r = solve_zero_sum(&mixed_3x3(), &SolverConfig::default()).unwrap();
    assert_eq!(r.p_star.probs(), &[1.0, 0.0, 0.0]);
    assert!(r.polished);
}
