mod common;

use proptest::prelude::*;
use shbsim::continuous::{
    optimal_nondisclosure_wage, realize_outcome, run_continuous_pair, run_skew_cell, screening_profit,
    skewness_sweep, ContinuousSpec, ScreeningContext, SkewFamily, TabulatedPrior, DEFAULT_PANELS,
};
use shbsim::config::DEFAULT_SEED;
use shbsim::dist::ContinuousWageDist;
use shbsim::econ::{candidate_menus, Enquiry, MatchEnv, MatchState, Preferences, ScheduleLabel};
use shbsim::metrics::{ByGender, CellResult, Gender, MetricField};
use shbsim::population::{run_scenario_pair, PopulationSpec};

fn prefs() -> Preferences {
    Preferences::new(0.5).unwrap()
}

/// A match and a right-skewed prior on [1, 8] like the defaults.
fn default_case() -> (ScreeningContext, ContinuousWageDist) {
    let fam = SkewFamily::default();
    let prior = fam.prior(0.8).unwrap();
    let ctx = ScreeningContext::new(&prefs(), 30.0, 0.1, 30.0, 0.53, 0.52, (fam.w_min, fam.w_max)).unwrap();
    (ctx, prior)
}

#[test]
fn doubling_the_table_changes_profit_by_under_a_millionth() {
    let (ctx, prior) = default_case();
    let coarse = TabulatedPrior::new(&prior, DEFAULT_PANELS).unwrap();
    let fine = TabulatedPrior::new(&prior, 2 * DEFAULT_PANELS).unwrap();
    for i in 0..=20 {
        let w0 = ctx.z_new * i as f64 / 20.0;
        let a = screening_profit(&ctx, &coarse, w0).unwrap();
        let b = screening_profit(&ctx, &fine, w0).unwrap();
        let exact = screening_profit(&ctx, &prior, w0).unwrap();
        assert!((a - b).abs() <= 1e-6 * b.abs().max(1e-12), "w0={w0}: {a} vs {b}");
        assert!((b - exact).abs() <= 1e-6 * exact.abs().max(1e-12), "w0={w0}: {b} vs {exact}");
    }
}

#[test]
fn zero_offer_profit_is_the_disclosure_integral() {
    let (ctx, prior) = default_case();
    // in quantile space the integrand stays bounded even where the density is not
    let top = prior.cdf(ctx.w_feasible.min(prior.w_max));
    let own: f64 = common::composite_gl(0.0, top, 200)
        .into_iter()
        .map(|(u, k)| k * (ctx.z_new - ctx.disclose_wage(prior.quantile(u))))
        .sum();
    let p = screening_profit(&ctx, &prior, 0.0).unwrap();
    assert!((p - own).abs() < 1e-6 * own, "{p} vs {own}");
}

#[test]
fn two_point_limit_prices_the_separating_menu() {
    // default base match of the two-type model
    let env = MatchEnv::new(8.0, 0.1, 8.0, 1.0, 2.0).unwrap();
    let (c1, c0, f) = (1.0, 0.4, 0.6);
    let prior = ContinuousWageDist::new(1.0, 2.0, 1e-4 * (1.0 - f), 1e-4 * f).unwrap();
    let ctx = ScreeningContext::new(&prefs(), env.z, env.c, env.z_new, c1, c0, (1.0, 2.0)).unwrap();
    let menus = candidate_menus(&prefs(), &env, f, c1, c0).unwrap();
    let sep = menus.iter().find(|m| m.schedule.label == ScheduleLabel::Separating).unwrap();
    let w0 = env.reservation(&prefs(), env.w_low, c0).unwrap();
    assert!((w0 - sep.schedule.w_nondisclose).abs() < 1e-12);
    // the continuous prior puts no mass exactly at w_low, so offer a hair above it
    let p = screening_profit(&ctx, &prior, w0 * (1.0 + 1e-9)).unwrap();
    assert!((p - sep.profit).abs() < 1e-3, "{p} vs {}", sep.profit);
}

#[test]
fn concentrated_prior_pays_the_withhold_reservation() {
    let prior = ContinuousWageDist::new(1.0, 3.0, 1e5, 1e5).unwrap();
    let ctx = ScreeningContext::new(&prefs(), 8.0, 0.1, 8.0, 0.5, 0.2, (1.0, 3.0)).unwrap();
    let s = optimal_nondisclosure_wage(&ctx, &prior);
    let want = ctx.k_withhold * 2.0;
    assert!((s.w_nondisclose_opt - want).abs() < 0.02 * want, "{} vs {want}", s.w_nondisclose_opt);
    assert!(s.disclosure_rate < 0.5);
}

#[test]
fn default_interior_solution_beats_an_exhaustive_grid() {
    let (ctx, prior) = default_case();
    let s = optimal_nondisclosure_wage(&ctx, &prior);
    let n = 10_000;
    let grid_best = (0..=n)
        .map(|i| screening_profit(&ctx, &prior, ctx.z_new * i as f64 / n as f64).unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    let rel = (s.expected_profit - grid_best) / grid_best;
    assert!(rel > -1e-4 && rel < 1e-4, "optimizer {} vs grid {grid_best}", s.expected_profit);
    assert!(s.disclosure_rate > 0.0 && s.disclosure_rate < 1.0, "{}", s.disclosure_rate);
    assert!(s.w_nondisclose_opt >= 0.0 && s.w_nondisclose_opt <= ctx.z_new);
}

#[test]
fn ban_lowers_disclosure_and_equal_priors_leave_no_gap_after_it() {
    let spec = ContinuousSpec { n_per_gender: 600, panels: 4_096, ..ContinuousSpec::default() };
    let m = run_continuous_pair(&spec).unwrap().metrics().unwrap();
    assert!(m.post.get(MetricField::Disclosure).unwrap() < m.pre.get(MetricField::Disclosure).unwrap());

    let same = ContinuousSpec { prior: ByGender::both(spec.prior.male), ..spec };
    let m = run_continuous_pair(&same).unwrap().metrics().unwrap();
    assert_eq!(m.post.get(MetricField::FemalePremium), Some(0.0));
    assert_eq!(m.post.get(MetricField::DisclosureGenderGap), Some(0.0));
}

#[test]
fn unreachable_skewness_is_flagged() {
    let spec = ContinuousSpec { n_per_gender: 50, panels: 1_024, ..ContinuousSpec::default() };
    let r = run_skew_cell(&spec, &SkewFamily::default(), 5.0, 0.3, 1).unwrap();
    assert!(matches!(r, CellResult::Flagged(_)));
    let r = run_skew_cell(&spec, &SkewFamily::default(), -0.2, 0.3, 1).unwrap();
    assert!(matches!(r, CellResult::Flagged(_)));
}

#[test]
fn collapsed_prior_replicates_the_two_wage_population() {
    let f = 0.6;
    let pop = PopulationSpec {
        n_per_gender: 3_000,
        f_low: ByGender::both(f),
        w_low: 1.0,
        w_high: 2.0,
        ..PopulationSpec::default()
    };
    let prior = ContinuousWageDist::new(1.0, 2.0, 1e-4 * (1.0 - f), 1e-4 * f).unwrap();
    let cont = ContinuousSpec {
        n_per_gender: pop.n_per_gender,
        eta: pop.eta,
        prior: ByGender::both(prior),
        heterogeneity: pop.heterogeneity,
        seed: pop.seed,
        panels: DEFAULT_PANELS,
    };
    let a = run_scenario_pair(&pop).unwrap().metrics().unwrap();
    let b = run_continuous_pair(&cont).unwrap().metrics().unwrap();
    let n = pop.n_per_gender as f64;
    for field in [MetricField::DisclosureFemale, MetricField::DisclosureMale, MetricField::AcceptanceFemale] {
        let (x, y) = (a.pre.get(field).unwrap(), b.pre.get(field).unwrap());
        // three binomial standard errors at the larger of the two rates
        let se = (x.max(y) * (1.0 - x.max(y)) / n).sqrt().max(1.0 / n);
        assert!((x - y).abs() <= 3.0 * se, "{}: {x} vs {y}", field.name());
    }
}

#[test]
fn default_skew_sweep_region_signs() {
    let mu: Vec<f64> = (0..11).map(|i| 0.05 + 0.08 * i as f64).collect();
    let grid = skewness_sweep(&ContinuousSpec::default(), &SkewFamily::default(), &mu, &mu, DEFAULT_SEED).unwrap();
    let mut region = 0;
    for cell in &grid.cells {
        let Some(m) = cell.metrics() else { continue };
        if cell.x == cell.y {
            assert_eq!(m.post.get(MetricField::FemalePremium), Some(0.0));
        }
        if !m.observations.all_six() {
            continue;
        }
        assert!(m.delta.get(MetricField::CorrWWnew).unwrap() < 0.0, "corr effect at {} {}", cell.x, cell.y);
        if cell.x > cell.y {
            region += 1;
            assert!(m.pre.get(MetricField::FemalePremium).unwrap() < 0.0);
            assert!(m.delta.get(MetricField::FemalePremium).unwrap() > 0.0);
        }
    }
    assert!(region > 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn optimizer_matches_a_fine_grid(
        a in 0.5f64..6.0, b in 0.5f64..6.0, zr in 1.0f64..3.0, znr in 0.6f64..1.6,
        c0 in 0.0f64..0.3, gap in 0.01f64..0.5,
    ) {
        let prior = ContinuousWageDist::new(1.0, 4.0, a, b).unwrap();
        let z = 4.0 * zr;
        let ctx = ScreeningContext::new(&prefs(), z, 0.1, z * znr, c0 + gap, c0, (1.0, 4.0)).unwrap();
        let s = optimal_nondisclosure_wage(&ctx, &prior);
        let n = 4_000;
        let grid_best = (0..=n)
            .map(|i| screening_profit(&ctx, &prior, ctx.z_new * i as f64 / n as f64).unwrap())
            .fold(0.0f64, f64::max);
        prop_assert!(s.expected_profit >= grid_best - 1e-4 * grid_best.max(1e-9));
        prop_assert!(s.w_nondisclose_opt >= 0.0 && s.w_nondisclose_opt <= ctx.z_new);
    }

    #[test]
    fn cutoff_separates_withholders(w in 1.0f64..4.0, c0 in 0.0f64..0.3, gap in 0.01f64..0.5) {
        let prior = ContinuousWageDist::new(1.0, 4.0, 2.0, 3.0).unwrap();
        let ctx = ScreeningContext::new(&prefs(), 12.0, 0.1, 12.0, c0 + gap, c0, (1.0, 4.0)).unwrap();
        let s = optimal_nondisclosure_wage(&ctx, &prior);
        let m = MatchState::new(w, 12.0, 0.1, 12.0, Enquiry::NotAsked).unwrap();
        let out = realize_outcome(&ctx, &s, &m).unwrap();
        let cut = ctx.cutoff(s.w_nondisclose_opt);
        // stay away from the knife edge where ties decide
        prop_assume!((w - cut).abs() > 1e-6 * cut.abs().max(1.0));
        prop_assert_eq!(!out.disclosed && out.accepted, w < cut);
    }

    #[test]
    fn disclosure_falls_as_disclosing_gets_costlier(c0 in 0.0f64..0.3, gap in 0.01f64..0.4, bump in 0.01f64..0.3) {
        let prior = ContinuousWageDist::new(1.0, 4.0, 1.5, 3.0).unwrap();
        let rate = |c1: f64| {
            let ctx = ScreeningContext::new(&prefs(), 12.0, 0.1, 12.0, c1, c0, (1.0, 4.0)).unwrap();
            optimal_nondisclosure_wage(&ctx, &prior).disclosure_rate
        };
        prop_assert!(rate(c0 + gap + bump) <= rate(c0 + gap) + 1e-9);
    }
}

#[test]
fn gender_specific_priors_give_gender_specific_draws() {
    let spec = ContinuousSpec { n_per_gender: 100, panels: 1_024, ..ContinuousSpec::default() };
    let pair = run_continuous_pair(&spec).unwrap();
    let mean = |g| {
        let v: Vec<f64> = pair.pre.iter().filter(|d| d.gender == g).map(|d| d.w).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    // identical means by construction, so sample means sit close together
    assert!((mean(Gender::Female) - mean(Gender::Male)).abs() < 0.5);
}
