//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints exactly one PASS/FAIL line; the process fails if any criterion does.

mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use common::{bisect, piecewise_integral, rng, uniform, TwoType};
use shbsim::config::{AxisSpec, Mode, RunConfig, DEFAULT_SEED};
use shbsim::continuous::{
    optimal_nondisclosure_wage, skewness_sweep, ContinuousSpec, ScreeningContext, SkewFamily,
};
use shbsim::dist::ContinuousWageDist;
use shbsim::econ::{
    expected_profit, firm_two_type_solve, threshold_f, Enquiry, MatchEnv, PsychicCosts,
    TwoTypeParams, WageType, worker_best_response,
};
use shbsim::harness::run;
use shbsim::metrics::{compute_metrics, Gender, MetricField, MetricGrid};
use shbsim::population::{
    run_scenario, run_scenario_pair, sample_costs_coupled, simulate_worker, sweep_fl_grid, Heterogeneity,
    PopulationSpec, Scenario, WorkerDraw,
};
use shbsim::theory::{
    c_low_female, check_prop2_many, prop3_bounds, sample_draws, sample_prop2_draws, BaseParams, DrawRanges,
    Prop2Grid,
};

// Tolerances and budgets, fixed here rather than tuned per run.
const PROFIT_RTOL: f64 = 1e-4;
const THRESHOLD_ATOL: f64 = 1e-9;
const C_BAR_ATOL: f64 = 1e-4;
const MC_SE: f64 = 3.0;
const COLLAPSE_ATOL: f64 = 1e-3;
const BUDGET_1: Duration = Duration::from_secs(10);
const BUDGET_2: Duration = Duration::from_secs(30);
const BUDGET_3: Duration = Duration::from_secs(120);

type Verdict = Result<String, String>;

fn check(ok: bool, msg: String) -> Result<(), String> {
    if ok { Ok(()) } else { Err(msg) }
}

fn fl_axis() -> Vec<f64> {
    (0..21).map(|i| 0.025 + 0.0475 * i as f64).collect()
}

fn criterion_1() -> Verdict {
    let bases = sample_draws(&DrawRanges::default(), 200, 101).map_err(|e| e.to_string())?;
    let mut r = rng(7);
    let fs: Vec<f64> = bases.iter().map(|_| uniform(&mut r, 0.02, 0.98)).collect();

    // solver side, timed on its own
    let start = Instant::now();
    let mut solved = Vec::new();
    for (b, &f) in bases.iter().zip(&fs) {
        let prefs = b.prefs();
        let env = b.env().map_err(|e| e.to_string())?;
        let costs = PsychicCosts::new(b.c11, b.c11, b.c10, b.c00).map_err(|e| e.to_string())?;
        let mut profits = [0.0; 2];
        for (k, e) in [Enquiry::Asked, Enquiry::NotAsked].into_iter().enumerate() {
            let p = TwoTypeParams::new(prefs, env, f, costs, e).map_err(|e| e.to_string())?;
            let s = firm_two_type_solve(&p).map_err(|e| e.to_string())?;
            profits[k] = expected_profit(&p, &s).map_err(|e| e.to_string())?;
        }
        let t1 = threshold_f(&prefs, &env, b.c11, b.c10).map_err(|e| e.to_string())?;
        let t0 = threshold_f(&prefs, &env, b.c11, b.c00).map_err(|e| e.to_string())?;
        solved.push((profits, t1, t0));
    }
    let elapsed = start.elapsed();

    let mut worst = 0.0f64;
    for (i, ((b, &f), (profits, t1, t0))) in bases.iter().zip(&fs).zip(&solved).enumerate() {
        for (k, (c1, c0)) in [(b.c11, b.c10), (b.c11, b.c00)].into_iter().enumerate() {
            let oracle = TwoType {
                eta: b.eta,
                w_low: b.w_low,
                w_high: b.w_high,
                z: b.z,
                c: b.c,
                z_new: b.z_new,
                c_disclose: c1,
                c_withhold: c0,
                f_low: f,
            };
            let q = oracle.brute_force_profit(1000);
            let rel = (profits[k] - q).abs() / q.abs().max(1e-12);
            worst = worst.max(rel);
            check(rel <= PROFIT_RTOL, format!("draw {i} e={}: solver {} vs brute force {q}", 1 - k, profits[k]))?;
            let t = if k == 0 { t1 } else { t0 };
            check(
                !t.degenerate && t.value > 0.0 && t.value < 1.0,
                format!("draw {i}: threshold {t:?} outside (0, 1)"),
            )?;
            let tb = oracle.threshold_by_bisection();
            check(
                (t.value - tb).abs() <= THRESHOLD_ATOL,
                format!("draw {i}: threshold {} vs bisection {tb}", t.value),
            )?;
        }
        if b.c10 > b.c00 {
            check(t1.value < t0.value, format!("draw {i}: f1 = {} not below f0 = {}", t1.value, t0.value))?;
        }
    }
    check(elapsed < BUDGET_1, format!("solver took {elapsed:?}"))?;
    Ok(format!("200 draws x 2 enquiry states, worst relative profit gap {worst:.2e}, solver {elapsed:.2?}"))
}

/// Refusal cost at which a separated low earner's wage equals the unasked
/// pooling wage, from the oracle's own reservation wages.
fn c_bar_oracle(b: &BaseParams) -> f64 {
    let t = |cost| TwoType {
        eta: b.eta,
        w_low: b.w_low,
        w_high: b.w_high,
        z: b.z,
        c: b.c,
        z_new: b.z_new,
        c_disclose: b.c11,
        c_withhold: cost,
        f_low: 0.5,
    };
    let pooled = t(b.c00).reservation(b.w_high, b.c00);
    bisect(b.c00, b.c00 + 10.0, 200, |c10| t(c10).reservation(b.w_low, c10) >= pooled)
}

fn criterion_2() -> Verdict {
    let bases = sample_prop2_draws(&DrawRanges::default(), 50, 202).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let report = check_prop2_many(&bases, &Prop2Grid::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check(report.passed, format!("{} violations, first {:?}", report.violations.len(), report.violations.first()))?;

    let mut worst = 0.0f64;
    for (i, b) in bases.iter().enumerate() {
        let q = |name: &str| report.quantities.iter().find(|q| q.draw == i && q.name == name).map(|q| q.value);
        let (Some(c_bar), Some(flip)) = (q("c_bar"), q("c_bar_sign_flip")) else {
            return Err(format!("config {i}: no c_bar sign flip recorded"));
        };
        let oracle = c_bar_oracle(b);
        worst = worst.max((c_bar - flip).abs()).max((c_bar - oracle).abs());
        check((c_bar - flip).abs() <= C_BAR_ATOL, format!("config {i}: c_bar {c_bar} vs sign flip {flip}"))?;
        check((c_bar - oracle).abs() <= C_BAR_ATOL, format!("config {i}: c_bar {c_bar} vs oracle {oracle}"))?;
    }
    check(elapsed < BUDGET_2, format!("took {elapsed:?}"))?;
    Ok(format!(
        "50 configurations, {} points, worst c_bar mismatch {worst:.1e}, {elapsed:.2?}",
        report.parameter_draws
    ))
}

fn all_six_cells(grid: &MetricGrid) -> Vec<(f64, f64, &shbsim::metrics::CellMetrics)> {
    grid.cells
        .iter()
        .filter_map(|c| c.metrics().filter(|m| m.observations.all_six()).map(|m| (c.x, c.y, m)))
        .collect()
}

fn criterion_3(grid: &MetricGrid, elapsed: Duration) -> Verdict {
    let cells = all_six_cells(grid);
    check(!cells.is_empty(), "no cell meets all six observations".into())?;
    for &(ff, fm, _) in &cells {
        check(fm < ff, format!("all-six cell outside f_M < f_F: f_F={ff}, f_M={fm}"))?;
    }
    check(elapsed < BUDGET_3, format!("sweep took {elapsed:?}"))?;

    // stylized regime: point-mass heterogeneity inside the admissible region
    let base = BaseParams::default();
    let c_low = c_low_female(&base).map_err(|e| e.to_string())?;
    let c10f = 0.5 * (base.c10_male + c_low);
    let bounds = prop3_bounds(&base, c10f).map_err(|e| e.to_string())?.ok_or("no f_bar root".to_string())?;
    let ff = 0.5 * (bounds.f_bar + bounds.f_tilde_0f);
    let fm = 0.5 * bounds.f_tilde_1m;
    let spec = PopulationSpec {
        n_per_gender: 2_000,
        eta: base.eta,
        w_low: base.w_low,
        w_high: base.w_high,
        f_low: shbsim::metrics::ByGender::new(ff, fm),
        heterogeneity: Heterogeneity::degenerate(
            base.z, base.c, base.z_new, base.c11, c10f, base.c10_male, base.c00, 0.5,
        ),
        ..PopulationSpec::default()
    };
    let m = run_scenario_pair(&spec).and_then(|p| p.metrics()).map_err(|e| e.to_string())?;
    let level = m.post.get(MetricField::FemaleWageGapLevel);
    let log = m.post.get(MetricField::FemalePremium);
    check(level == Some(0.0) && log == Some(0.0), format!("stylized post gap {level:?} / {log:?}"))?;
    let pre = m.pre.get(MetricField::FemaleWageGapLevel).unwrap_or(f64::NAN);
    check(pre != 0.0, "stylized pre gap is also zero; regime not exercised".into())?;
    Ok(format!(
        "{} of 441 cells meet all six, all with f_M < f_F, sweep {elapsed:.2?}; stylized post gap exactly 0 (pre {pre:.4})",
        cells.len()
    ))
}

/// Per-gender population expectations by quadrature: `[disclosure,
/// acceptance, wage, log wage]`. Every draw dimension is integrated in
/// quantile space; the cost dimension is split where the outcome changes.
fn quadrature_means(spec: &PopulationSpec, g: Gender) -> [f64; 4] {
    let h = &spec.heterogeneity;
    let f = *spec.f_low.get(g);
    let p = *h.p_enquiry.get(g);
    let prefs = spec.prefs();
    let nodes = common::composite_gl(0.0, 1.0, 2);
    let mut total = [0.0; 4];
    for &(uz, wz) in &nodes {
        for &(uc, wc) in &nodes {
            for &(un, wn) in &nodes {
                let weight = wz * wc * wn;
                let piece = piecewise_integral(64, |u| {
                    let costs = sample_costs_coupled(&h.costs, g, u).expect("valid u");
                    let mut sig = Vec::with_capacity(4);
                    let mut v = [0.0; 4];
                    for (e, pe) in [(Enquiry::Asked, p), (Enquiry::NotAsked, 1.0 - p)] {
                        for (t, pt) in [(WageType::Low, f), (WageType::High, 1.0 - f)] {
                            let draw = WorkerDraw {
                                index: 0,
                                gender: g,
                                wage_type: t,
                                w: spec.wage(t),
                                z: h.z.quantile(uz),
                                c: h.c.quantile(uc),
                                z_new: h.z_new.quantile(un),
                                e,
                                costs,
                                prior_low: f,
                                label: None,
                                outcome: None,
                            };
                            let (label, out) = simulate_worker(&prefs, spec.w_low, spec.w_high, &draw).expect("solvable");
                            sig.push((label, out.disclosed, out.accepted));
                            let w = out.realized_wage(draw.w);
                            let k = pe * pt;
                            v[0] += k * out.disclosed as u8 as f64;
                            v[1] += k * out.accepted as u8 as f64;
                            v[2] += k * w;
                            v[3] += k * w.ln();
                        }
                    }
                    (sig, v)
                });
                for k in 0..4 {
                    total[k] += weight * piece[k];
                }
            }
        }
    }
    total
}

fn criterion_4() -> Verdict {
    // (a) point-mass heterogeneity reproduces the two-type schedules exactly
    let base = BaseParams::default();
    let mut compared = 0usize;
    for &f in &[0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95] {
        let spec = PopulationSpec {
            n_per_gender: 400,
            f_low: shbsim::metrics::ByGender::both(f),
            eta: base.eta,
            w_low: base.w_low,
            w_high: base.w_high,
            heterogeneity: Heterogeneity::degenerate(
                base.z, base.c, base.z_new, base.c11, base.c10, base.c10_male, base.c00, 0.5,
            ),
            ..PopulationSpec::default()
        };
        let draws = run_scenario(&spec, Scenario::PreShb).map_err(|e| e.to_string())?;
        let env = MatchEnv::new(base.z, base.c, base.z_new, base.w_low, base.w_high).map_err(|e| e.to_string())?;
        for d in &draws {
            let params = TwoTypeParams::new(base.prefs(), env, f, d.costs, d.e).map_err(|e| e.to_string())?;
            let s = firm_two_type_solve(&params).map_err(|e| e.to_string())?;
            let want = worker_best_response(&params.prefs, &params.match_state(d.wage_type), &d.costs, &s, d.wage_type)
                .map_err(|e| e.to_string())?;
            check(
                d.label == Some(s.label) && d.outcome == Some(want),
                format!("f={f}, worker {}: {:?}/{:?} vs {:?}/{want:?}", d.index, d.label, d.outcome, s.label),
            )?;
            compared += 1;
        }
    }

    // (b) default heterogeneity: Monte Carlo means against quadrature
    let spec = PopulationSpec { n_per_gender: 100_000, ..PopulationSpec::default() };
    let draws = run_scenario(&spec, Scenario::PreShb).map_err(|e| e.to_string())?;
    let recs: Vec<_> = draws.iter().filter_map(WorkerDraw::record).collect();
    let m = compute_metrics(&recs).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for g in Gender::BOTH {
        let quad = quadrature_means(&spec, g);
        let mine: Vec<_> = recs.iter().filter(|r| r.gender == g).collect();
        let n = mine.len() as f64;
        let columns: [Box<dyn Fn(&&shbsim::metrics::OutcomeRecord) -> f64>; 4] = [
            Box::new(|r| r.outcome.disclosed as u8 as f64),
            Box::new(|r| r.outcome.accepted as u8 as f64),
            Box::new(|r| r.wage_new()),
            Box::new(|r| r.wage_new().ln()),
        ];
        let fields = match g {
            Gender::Female => [
                MetricField::DisclosureFemale,
                MetricField::AcceptanceFemale,
                MetricField::MeanWageFemale,
                MetricField::MeanLogWageFemale,
            ],
            Gender::Male => [
                MetricField::DisclosureMale,
                MetricField::AcceptanceMale,
                MetricField::MeanWageMale,
                MetricField::MeanLogWageMale,
            ],
        };
        for k in 0..4 {
            let xs: Vec<f64> = mine.iter().map(&columns[k]).collect();
            let mean = xs.iter().sum::<f64>() / n;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let se = (var / n).sqrt();
            let reported = m.get(fields[k]).ok_or("undefined metric".to_string())?;
            check((reported - mean).abs() <= 1e-12 * mean.abs().max(1.0), format!("{} aggregation", fields[k].name()))?;
            let z = if se > 0.0 { (mean - quad[k]).abs() / se } else if mean == quad[k] { 0.0 } else { f64::INFINITY };
            // a zero-variance column must match to rounding
            let z = if se == 0.0 && (mean - quad[k]).abs() < 1e-9 { 0.0 } else { z };
            worst = worst.max(z);
            check(z <= MC_SE, format!("{}: MC {mean} vs quadrature {} ({z:.2} SE)", fields[k].name(), quad[k]))?;
        }
    }
    Ok(format!("{compared} point-mass workers exact; 8 population means within {worst:.2} SE of quadrature"))
}

fn criterion_5() -> Verdict {
    let costs = PopulationSpec::default().heterogeneity.costs;
    let n = 100_000;
    let mut r = rng(505);
    // columns: c11, c10 female, c10 male, c00
    let mut cols: [Vec<f64>; 4] = Default::default();
    for _ in 0..n {
        let u = loop {
            let u = uniform(&mut r, 0.0, 1.0);
            if u > 0.0 {
                break u;
            }
        };
        let fem = sample_costs_coupled(&costs, Gender::Female, u).map_err(|e| e.to_string())?;
        let male = sample_costs_coupled(&costs, Gender::Male, u).map_err(|e| e.to_string())?;
        check(fem.c11 == male.c11 && fem.c00 == male.c00, "shared marginals differ by gender".into())?;
        let row = [fem.c11, fem.c10, male.c10, fem.c00];
        check(
            row.windows(2).all(|w| w[0] >= w[1]),
            format!("per-worker ordering fails at u={u}: {row:?}"),
        )?;
        for k in 0..4 {
            cols[k].push(row[k]);
        }
    }
    for c in cols.iter_mut() {
        c.sort_by(f64::total_cmp);
    }
    let lo = cols[3][0];
    let hi = cols[0][n - 1];
    let ecdf = |c: &Vec<f64>, x: f64| c.partition_point(|&v| v <= x) as f64 / n as f64;
    let points = 2_000;
    for i in 0..=points {
        let x = lo + (hi - lo) * i as f64 / points as f64;
        let f = [ecdf(&cols[0], x), ecdf(&cols[1], x), ecdf(&cols[2], x), ecdf(&cols[3], x)];
        check(f.windows(2).all(|w| w[0] <= w[1]), format!("empirical CDFs out of order at {x}: {f:?}"))?;
    }
    Ok(format!("{n} draws ordered per worker; empirical CDFs ordered at {} points", points + 1))
}

/// Both low-earner shares inside this band count as the interior.
const INTERIOR: (f64, f64) = (0.2, 0.8);

fn criterion_6(grid: &MetricGrid) -> Verdict {
    let inside = |f: f64| (INTERIOR.0..=INTERIOR.1).contains(&f);
    let all = all_six_cells(grid);
    let cells: Vec<_> = all.iter().copied().filter(|&(ff, fm, _)| inside(ff) && inside(fm)).collect();
    check(!cells.is_empty(), "no interior all-six cells".into())?;
    let d = |m: &shbsim::metrics::CellMetrics, f: MetricField| m.delta.get(f).unwrap_or(f64::NAN);
    for &(ff, fm, m) in &cells {
        let at = format!("f_F={ff}, f_M={fm}");
        use MetricField::*;
        check(d(m, DisclosureFemale) < 0.0, format!("{at}: female disclosure effect {}", d(m, DisclosureFemale)))?;
        check(d(m, DisclosureMale) < 0.0, format!("{at}: male disclosure effect {}", d(m, DisclosureMale)))?;
        check(d(m, FemalePremium) > 0.0, format!("{at}: premium effect {}", d(m, FemalePremium)))?;
        check(d(m, SdWages) < 0.0, format!("{at}: SD effect {}", d(m, SdWages)))?;
        check(d(m, CorrWWnew) < 0.0, format!("{at}: corr effect {}", d(m, CorrWWnew)))?;
        check(d(m, MeanWageBelowMedian) > 0.0, format!("{at}: low-earner wage effect {}", d(m, MeanWageBelowMedian)))?;
        check(d(m, MeanWage) <= 0.0, format!("{at}: mean wage effect {}", d(m, MeanWage)))?;
    }
    Ok(format!(
        "all seven signs hold in each of {} interior all-six cells ({} all-six cells overall)",
        cells.len(),
        all.len()
    ))
}

fn criterion_7() -> Verdict {
    // (a) a Beta prior piling onto the two endpoints recovers the two-type profit
    let base = BaseParams::default();
    let prefs = base.prefs();
    let env = base.env().map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    let mut cases = 0;
    for &f in &[0.1, 0.3, 0.5, 0.7, 0.9] {
        for (c1, c0) in [(base.c11, base.c10), (base.c11, base.c00), (base.c11, base.c10_male)] {
            let s = 1e-4;
            let prior = ContinuousWageDist::new(base.w_low, base.w_high, s * (1.0 - f), s * f).map_err(|e| e.to_string())?;
            let ctx = ScreeningContext::new(&prefs, base.z, base.c, base.z_new, c1, c0, (base.w_low, base.w_high))
                .map_err(|e| e.to_string())?;
            let sol = optimal_nondisclosure_wage(&ctx, &prior);
            // unasked costs carry (c1, c0); the refusal cost is a placeholder
            let costs = PsychicCosts::new(c1, c1, 0.5 * (c0 + c1), c0).map_err(|e| e.to_string())?;
            let params = TwoTypeParams::new(prefs, env, f, costs, Enquiry::NotAsked).map_err(|e| e.to_string())?;
            let two = expected_profit(&params, &firm_two_type_solve(&params).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            let gap = (sol.expected_profit - two).abs();
            worst = worst.max(gap);
            cases += 1;
            check(gap <= COLLAPSE_ATOL, format!("f={f}, costs ({c1}, {c0}): continuous {} vs two-type {two}", sol.expected_profit))?;
        }
    }

    // (b) skewness sweep at defaults
    let mu: Vec<f64> = (0..11).map(|i| 0.05 + 0.08 * i as f64).collect();
    let grid = skewness_sweep(&ContinuousSpec::default(), &SkewFamily::default(), &mu, &mu, DEFAULT_SEED)
        .map_err(|e| e.to_string())?;
    let cells = all_six_cells(&grid);
    let region: Vec<_> = cells.iter().filter(|(x, y, _)| x > y).collect();
    check(!region.is_empty(), format!("no all-six cell with mu_F > mu_M ({} all-six cells overall)", cells.len()))?;
    Ok(format!(
        "{cases} collapsed priors within {worst:.1e} profit; {} of 121 skew cells meet all six with mu_F > mu_M",
        region.len()
    ))
}

fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).expect("readable") {
            let p = entry.expect("entry").path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&p).expect("readable"));
            }
        }
    }
    out
}

fn small_config(mode: Mode) -> RunConfig {
    let mut cfg = RunConfig::new(mode);
    cfg.seed = 99;
    cfg.write_workers = true;
    cfg.population.n_per_gender = 1_500;
    cfg.continuous.n_per_gender = 200;
    cfg.continuous.panels = 2_048;
    cfg.props.prop1_draws = 20;
    cfg.props.prop2_draws = 5;
    let span = |a, b, n| AxisSpec::Span { start: a, stop: b, points: n };
    cfg.sweep_fl.female = span(0.1, 0.9, 5);
    cfg.sweep_fl.male = span(0.1, 0.9, 4);
    cfg.sweep_corr.female = span(-0.5, 0.5, 3);
    cfg.sweep_corr.male = span(-0.5, 0.5, 3);
    cfg.sweep_skew.female = span(0.1, 0.7, 3);
    cfg.sweep_skew.male = span(0.1, 0.7, 2);
    cfg
}

fn criterion_8() -> Verdict {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut files = 0;
    for mode in Mode::ALL {
        let mut first = small_config(mode);
        first.threads = Some(1);
        let a = tmp.path().join(format!("{}-a", mode.name()));
        run(&first, &a, false).map_err(|e| format!("{}: {e}", mode.name()))?;

        // re-execute from the manifest on a different pool size
        let mut again = RunConfig::load(&a.join("manifest.json")).map_err(|e| e.to_string())?;
        again.threads = Some(3);
        let b = tmp.path().join(format!("{}-b", mode.name()));
        run(&again, &b, false).map_err(|e| format!("{}: {e}", mode.name()))?;

        let (ta, tb) = (read_tree(&a), read_tree(&b));
        check(
            ta.keys().eq(tb.keys()),
            format!("{}: file sets differ: {:?} vs {:?}", mode.name(), ta.keys(), tb.keys()),
        )?;
        for (name, bytes) in &ta {
            check(&tb[name] == bytes, format!("{}: {name} differs", mode.name()))?;
        }
        files += ta.len();
    }
    Ok(format!("{} modes, {files} files byte-identical at 1 and 3 threads", Mode::ALL.len()))
}

fn report(n: usize, start: Instant, v: &Verdict) -> bool {
    let t = start.elapsed();
    match v {
        Ok(msg) => println!("criterion {n}: PASS ({msg}) [{t:.2?}]"),
        Err(msg) => println!("criterion {n}: FAIL ({msg}) [{t:.2?}]"),
    }
    v.is_ok()
}

fn main() {
    // `cargo test -- --list` and filters are not meaningful here
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut ok = true;
    let t = Instant::now();
    ok &= report(1, t, &criterion_1());
    let t = Instant::now();
    ok &= report(2, t, &criterion_2());

    let t = Instant::now();
    let template = PopulationSpec { n_per_gender: 10_000, ..PopulationSpec::default() };
    let sweep = sweep_fl_grid(&template, &fl_axis(), &fl_axis(), DEFAULT_SEED);
    let sweep_time = t.elapsed();
    let (v3, v6) = match &sweep {
        Ok(grid) => (criterion_3(grid, sweep_time), criterion_6(grid)),
        Err(e) => (Err(e.to_string()), Err(e.to_string())),
    };
    ok &= report(3, t, &v3);
    let t = Instant::now();
    ok &= report(4, t, &criterion_4());
    let t = Instant::now();
    ok &= report(5, t, &criterion_5());
    ok &= report(6, Instant::now(), &v6);
    let t = Instant::now();
    ok &= report(7, t, &criterion_7());
    let t = Instant::now();
    ok &= report(8, t, &criterion_8());

    if !ok {
        std::process::exit(1);
    }
}
