//! Continuous initial-wage priors: the firm's optimal non-disclosure wage
//! against a prior `G`, with disclosers paid their own reservation wage,
//! and populations and skewness sweeps built on it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dist::{ContinuousWageDist, TruncatedNormal};
use crate::econ::{best_response_to_offers, Enquiry, MatchState, Preferences, WorkerOutcome, PROFIT_TOL, WAGE_RTOL};
use crate::error::{domain, invalid, Error, Result};
use crate::metrics::{
    build_grid, compute_metrics, Axis, ByGender, CellMetrics, CellResult, Gender, MetricGrid, OutcomeRecord,
};
use crate::numerics::{bisect, golden_section_max, GaussLegendre};
use crate::population::{Heterogeneity, IndexUniforms, Scenario, SharedSamplers};

/// What the firm's screening problem needs from a wage prior.
pub trait WagePrior: Sync {
    fn support(&self) -> (f64, f64);
    fn cdf(&self, w: f64) -> f64;
    /// `∫_lo^hi w dG(w)`.
    fn partial_mean(&self, lo: f64, hi: f64) -> f64;
    fn quantile(&self, u: f64) -> f64;
}

impl WagePrior for ContinuousWageDist {
    fn support(&self) -> (f64, f64) {
        (self.w_min, self.w_max)
    }

    fn cdf(&self, w: f64) -> f64 {
        ContinuousWageDist::cdf(self, w)
    }

    /// Integration by parts keeps the integrand bounded even when the
    /// density is singular at the endpoints.
    fn partial_mean(&self, lo: f64, hi: f64) -> f64 {
        let lo = lo.max(self.w_min);
        let hi = hi.min(self.w_max);
        if hi <= lo {
            return 0.0;
        }
        let area = GaussLegendre::order_256().integrate(lo, hi, |w| self.cdf(w));
        hi * self.cdf(hi) - lo * self.cdf(lo) - area
    }

    fn quantile(&self, u: f64) -> f64 {
        ContinuousWageDist::quantile(self, u)
    }
}

pub const DEFAULT_PANELS: usize = 16_384;

/// Piecewise-linear CDF through exact CDF values on a uniform grid, with
/// the first moment tabulated consistently. Lookups are O(1).
#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedPrior {
    w_min: f64,
    h: f64,
    cdf: Vec<f64>,
    moment: Vec<f64>,
}

impl TabulatedPrior {
    pub fn new(dist: &ContinuousWageDist, panels: usize) -> Result<Self> {
        dist.validate()?;
        if panels < 2 {
            return invalid(format!("need at least 2 panels, got {panels}"));
        }
        let h = dist.width() / panels as f64;
        let mut cdf: Vec<f64> = (0..=panels).map(|k| dist.cdf(dist.w_min + k as f64 * h)).collect();
        cdf[0] = 0.0;
        cdf[panels] = 1.0;
        for k in 1..=panels {
            cdf[k] = cdf[k].max(cdf[k - 1]);
        }
        let mut moment = vec![0.0; panels + 1];
        for k in 0..panels {
            let mid = dist.w_min + (k as f64 + 0.5) * h;
            moment[k + 1] = moment[k] + (cdf[k + 1] - cdf[k]) * mid;
        }
        Ok(TabulatedPrior { w_min: dist.w_min, h, cdf, moment })
    }

    fn panels(&self) -> usize {
        self.cdf.len() - 1
    }

    fn w_max(&self) -> f64 {
        self.w_min + self.h * self.panels() as f64
    }

    /// Panel index and offset into it; `None` outside the support.
    #[inline]
    fn locate(&self, w: f64) -> Option<(usize, f64)> {
        if w <= self.w_min || w >= self.w_max() {
            return None;
        }
        let k = (((w - self.w_min) / self.h) as usize).min(self.panels() - 1);
        Some((k, w - (self.w_min + k as f64 * self.h)))
    }

    #[inline]
    fn moment_at(&self, w: f64) -> f64 {
        match self.locate(w) {
            None if w <= self.w_min => 0.0,
            None => self.moment[self.panels()],
            Some((k, dx)) => {
                let x0 = self.w_min + k as f64 * self.h;
                let density = (self.cdf[k + 1] - self.cdf[k]) / self.h;
                self.moment[k] + density * dx * (x0 + 0.5 * dx)
            }
        }
    }
}

impl WagePrior for TabulatedPrior {
    fn support(&self) -> (f64, f64) {
        (self.w_min, self.w_max())
    }

    #[inline]
    fn cdf(&self, w: f64) -> f64 {
        match self.locate(w) {
            None if w <= self.w_min => 0.0,
            None => 1.0,
            Some((k, dx)) => self.cdf[k] + (self.cdf[k + 1] - self.cdf[k]) * dx / self.h,
        }
    }

    fn partial_mean(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        self.moment_at(hi) - self.moment_at(lo)
    }

    fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        // first node with cdf >= u
        let k = self.cdf.partition_point(|&g| g < u);
        if k == 0 {
            return self.w_min;
        }
        let (g0, g1) = (self.cdf[k - 1], self.cdf[k]);
        let x0 = self.w_min + (k - 1) as f64 * self.h;
        if g1 <= g0 {
            return x0;
        }
        x0 + self.h * (u - g0) / (g1 - g0)
    }
}

/// Per-match constants of the screening problem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScreeningContext {
    pub prefs: Preferences,
    pub z: f64,
    pub c: f64,
    pub z_new: f64,
    pub c_disclose: f64,
    pub c_withhold: f64,
    /// Disclose-reservation wage per unit of initial wage.
    pub k_disclose: f64,
    /// Withhold-reservation wage per unit of initial wage.
    pub k_withhold: f64,
    /// Largest initial wage whose disclose-reservation is within `z_new`.
    pub w_feasible: f64,
}

impl ScreeningContext {
    /// `support` bounds the bisection for the feasibility boundary.
    pub fn new(
        prefs: &Preferences,
        z: f64,
        c: f64,
        z_new: f64,
        c_disclose: f64,
        c_withhold: f64,
        support: (f64, f64),
    ) -> Result<Self> {
        if !(z > 0.0 && z_new > 0.0 && c.is_finite()) {
            return invalid(format!("screening needs z, z_new > 0, got z={z}, z_new={z_new}"));
        }
        if !(c_disclose >= c_withhold) {
            return invalid(format!("disclosure cost {c_disclose} below withholding cost {c_withhold}"));
        }
        // Reservation wages are proportional to w under log utility.
        let k_disclose = prefs.reservation_wage(1.0, z, c, z_new, c_disclose)?;
        let k_withhold = prefs.reservation_wage(1.0, z, c, z_new, c_withhold)?;
        let (lo, hi) = support;
        let gap = |w: f64| prefs.reservation_wage(w, z, c, z_new, c_disclose).map_or(f64::NAN, |r| r - z_new);
        let w_feasible = if gap(hi) <= 0.0 {
            hi
        } else if gap(lo) > 0.0 {
            0.0
        } else {
            bisect(lo, hi, 1e-12 * hi, gap)
        };
        Ok(ScreeningContext {
            prefs: *prefs,
            z,
            c,
            z_new,
            c_disclose,
            c_withhold,
            k_disclose,
            k_withhold,
            w_feasible,
        })
    }

    /// Initial wage at which withholding at `w0` and the outside option tie.
    pub fn cutoff(&self, w0: f64) -> f64 {
        if w0 > 0.0 {
            w0 / self.k_withhold
        } else {
            f64::NEG_INFINITY
        }
    }

    pub fn disclose_wage(&self, w: f64) -> f64 {
        self.k_disclose * w
    }
}

/// Expected profit of non-disclosure wage `w0` when disclosers are paid
/// their own disclose-reservation wage wherever that is within `z_new`.
pub fn screening_profit(ctx: &ScreeningContext, prior: &impl WagePrior, w0: f64) -> Result<f64> {
    if !(w0 >= 0.0 && w0 <= ctx.z_new * (1.0 + WAGE_RTOL)) {
        return domain(format!("w0 must lie in [0, {}], got {w0}", ctx.z_new));
    }
    Ok(profit_unchecked(ctx, prior, w0))
}

#[inline]
fn profit_unchecked(ctx: &ScreeningContext, prior: &impl WagePrior, w0: f64) -> f64 {
    let (w_min, w_max) = prior.support();
    let w_star = ctx.cutoff(w0);
    let g_star = prior.cdf(w_star);
    let withhold = g_star * (ctx.z_new - w0);
    let lo = w_star.max(w_min);
    let hi = ctx.w_feasible.min(w_max);
    let disclose = if hi > lo {
        ctx.z_new * (prior.cdf(hi) - prior.cdf(lo)) - ctx.k_disclose * prior.partial_mean(lo, hi)
    } else {
        0.0
    };
    withhold + disclose
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScreeningSolution {
    pub w_nondisclose_opt: f64,
    pub cutoff_w_star: f64,
    pub expected_profit: f64,
    pub disclosure_rate: f64,
    /// Mass above the cutoff whose disclose-reservation exceeds `z_new`.
    pub exclusion_rate: f64,
    /// Nobody is hired: no non-disclosure offer and no disclosure offers.
    pub hire_none: bool,
}

const COARSE_POINTS: usize = 200;
const REFINE_STARTS: usize = 3;
pub const WAGE_TOL: f64 = 1e-6;

fn summarize(ctx: &ScreeningContext, prior: &impl WagePrior, w0: f64, profit: f64) -> ScreeningSolution {
    let (w_min, w_max) = prior.support();
    let w_star = ctx.cutoff(w0);
    let lo = w_star.max(w_min);
    let hi = ctx.w_feasible.min(w_max);
    let disclosure_rate = if hi > lo { prior.cdf(hi) - prior.cdf(lo) } else { 0.0 };
    let exclusion_rate = 1.0 - prior.cdf(lo.max(ctx.w_feasible));
    ScreeningSolution {
        w_nondisclose_opt: w0,
        cutoff_w_star: w_star.max(w_min).min(w_max),
        expected_profit: profit,
        disclosure_rate,
        exclusion_rate,
        hire_none: false,
    }
}

/// Coarse grid over `[0, z_new]`, then golden-section refinement from the
/// best local maxima; compared against hiring nobody.
pub fn optimal_nondisclosure_wage(ctx: &ScreeningContext, prior: &impl WagePrior) -> ScreeningSolution {
    let zn = ctx.z_new;
    let step = zn / (COARSE_POINTS - 1) as f64;
    let grid: Vec<(f64, f64)> = (0..COARSE_POINTS)
        .map(|i| {
            let w0 = i as f64 * step;
            (w0, profit_unchecked(ctx, prior, w0))
        })
        .collect();

    let mut peaks: Vec<usize> = (0..COARSE_POINTS)
        .filter(|&i| {
            let v = grid[i].1;
            (i == 0 || v >= grid[i - 1].1) && (i + 1 == COARSE_POINTS || v >= grid[i + 1].1)
        })
        .collect();
    peaks.sort_by(|&a, &b| grid[b].1.total_cmp(&grid[a].1).then(a.cmp(&b)));
    peaks.truncate(REFINE_STARTS);

    let mut best = grid.iter().copied().fold((0.0, f64::NEG_INFINITY), |acc, p| if p.1 > acc.1 { p } else { acc });
    for &i in &peaks {
        let a = (i as f64 - 1.0).max(0.0) * step;
        let b = ((i + 1) as f64 * step).min(zn);
        let m = golden_section_max(a, b, WAGE_TOL, |w0| profit_unchecked(ctx, prior, w0));
        if m.value > best.1 {
            best = (m.x, m.value);
        }
    }

    // Flat stretches (every offer below the bottom worker's reservation
    // earns the same) resolve to their highest wage.
    let flat = |w0: f64| profit_unchecked(ctx, prior, w0) >= best.1 - 1e-12 * best.1.abs().max(1.0);
    if let Some(j) = grid.iter().position(|&(w0, _)| w0 > best.0 && !flat(w0)) {
        let (mut lo, mut hi) = (grid[j - 1].0.max(best.0), grid[j].0);
        if flat(lo) {
            while hi - lo > 1e-3 * WAGE_TOL * hi.max(1.0) {
                let mid = 0.5 * (lo + hi);
                if flat(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            best = (lo, profit_unchecked(ctx, prior, lo));
        }
    }

    if best.1 <= PROFIT_TOL {
        let (w_min, _) = prior.support();
        return ScreeningSolution {
            w_nondisclose_opt: 0.0,
            cutoff_w_star: w_min,
            expected_profit: 0.0,
            disclosure_rate: 0.0,
            exclusion_rate: 1.0,
            hire_none: true,
        };
    }
    summarize(ctx, prior, best.0, best.1)
}

/// The worker's response to the solved schedule given their actual wage.
pub fn realize_outcome(ctx: &ScreeningContext, sol: &ScreeningSolution, m: &MatchState) -> Result<WorkerOutcome> {
    let disclose_offer = if !sol.hire_none && m.w <= ctx.w_feasible {
        ctx.prefs.reservation_wage(m.w, m.z, m.c, m.z_new, ctx.c_disclose)?
    } else {
        0.0
    };
    best_response_to_offers(&ctx.prefs, m, ctx.c_disclose, ctx.c_withhold, sol.w_nondisclose_opt, disclose_offer)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContinuousSpec {
    pub n_per_gender: usize,
    pub eta: f64,
    pub prior: ByGender<ContinuousWageDist>,
    pub heterogeneity: Heterogeneity,
    pub seed: u64,
    /// Resolution of the tabulated priors used by the simulator.
    pub panels: usize,
}

/// Mean at a quarter of the support; skewness swept around it.
pub const DEFAULT_MEAN_FRAC: f64 = 0.3;

impl Default for ContinuousSpec {
    fn default() -> Self {
        let family = SkewFamily::default();
        let prior = |skew| family.prior(skew).expect("reachable");
        // outside options scaled up so every initial wage on the support is employable
        let z = TruncatedNormal { mean: 30.0, sd: 3.0, lower: 21.0, upper: 39.0 };
        ContinuousSpec {
            n_per_gender: 2_000,
            eta: 0.5,
            prior: ByGender::new(prior(0.8), prior(0.3)),
            heterogeneity: Heterogeneity { z, z_new: z, ..Heterogeneity::default() },
            seed: 20_240_602,
            panels: DEFAULT_PANELS,
        }
    }
}

impl ContinuousSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_per_gender == 0 {
            return invalid("n_per_gender must be positive");
        }
        if self.panels < 2 {
            return invalid("panels must be at least 2");
        }
        Preferences::new(self.eta)?;
        let mut top: f64 = 0.0;
        for g in Gender::BOTH {
            let d = self.prior.get(g);
            d.validate()?;
            top = top.max(d.w_max);
        }
        self.heterogeneity.validate(top)
    }

    pub fn prefs(&self) -> Preferences {
        Preferences { eta: self.eta }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuousDraw {
    pub index: usize,
    pub gender: Gender,
    pub w: f64,
    pub z: f64,
    pub c: f64,
    pub z_new: f64,
    pub e: Enquiry,
    pub c_disclose: f64,
    pub c_withhold: f64,
    pub solution: ScreeningSolution,
    pub outcome: WorkerOutcome,
}

impl ContinuousDraw {
    pub fn record(&self) -> OutcomeRecord {
        OutcomeRecord { gender: self.gender, asked: self.e.is_asked(), w_initial: self.w, outcome: self.outcome }
    }
}

struct Base {
    index: usize,
    gender: Gender,
    w: f64,
    z: f64,
    c: f64,
    z_new: f64,
    drawn_e: Enquiry,
    costs: crate::econ::PsychicCosts,
}

fn sample_base(spec: &ContinuousSpec, priors: &ByGender<TabulatedPrior>) -> Result<Vec<Base>> {
    let h = &spec.heterogeneity;
    let s = SharedSamplers::new(h);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let uniforms: Vec<IndexUniforms> = (0..spec.n_per_gender).map(|_| IndexUniforms::draw(&mut rng)).collect();
    let mut out = Vec::with_capacity(2 * spec.n_per_gender);
    for g in Gender::BOTH {
        let p = *h.p_enquiry.get(g);
        let prior = priors.get(g);
        for (index, u) in uniforms.iter().enumerate() {
            out.push(Base {
                index,
                gender: g,
                w: prior.quantile(u.wage),
                z: s.z.quantile(u.z),
                c: s.c.quantile(u.c),
                z_new: s.z_new.quantile(u.z_new),
                drawn_e: Enquiry::from_indicator(u.enquiry < p),
                costs: s.costs(g, u.cost)?,
            });
        }
    }
    Ok(out)
}

fn solve_draw(prefs: &Preferences, prior: &TabulatedPrior, b: &Base, e: Enquiry) -> Result<ContinuousDraw> {
    let (c1, c0) = b.costs.for_enquiry(e);
    let ctx = ScreeningContext::new(prefs, b.z, b.c, b.z_new, c1, c0, prior.support())?;
    let solution = optimal_nondisclosure_wage(&ctx, prior);
    let m = MatchState { w: b.w, z: b.z, c: b.c, z_new: b.z_new, e };
    let outcome = realize_outcome(&ctx, &solution, &m)?;
    Ok(ContinuousDraw {
        index: b.index,
        gender: b.gender,
        w: b.w,
        z: b.z,
        c: b.c,
        z_new: b.z_new,
        e,
        c_disclose: c1,
        c_withhold: c0,
        solution,
        outcome,
    })
}

fn tabulate(spec: &ContinuousSpec) -> Result<ByGender<TabulatedPrior>> {
    Ok(ByGender::new(
        TabulatedPrior::new(&spec.prior.female, spec.panels)?,
        TabulatedPrior::new(&spec.prior.male, spec.panels)?,
    ))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContinuousPair {
    pub pre: Vec<ContinuousDraw>,
    pub post: Vec<ContinuousDraw>,
}

impl ContinuousPair {
    pub fn metrics(&self) -> Result<CellMetrics> {
        let recs = |d: &[ContinuousDraw]| d.iter().map(ContinuousDraw::record).collect::<Vec<_>>();
        CellMetrics::new(compute_metrics(&recs(&self.pre))?, compute_metrics(&recs(&self.post))?)
    }
}

/// Both scenarios on common random numbers. A worker not asked before the
/// ban faces the same problem after it, so that solution is reused.
pub fn run_continuous_pair(spec: &ContinuousSpec) -> Result<ContinuousPair> {
    spec.validate()?;
    let priors = tabulate(spec)?;
    let prefs = spec.prefs();
    let base = sample_base(spec, &priors)?;
    let mut pre = Vec::with_capacity(base.len());
    let mut post = Vec::with_capacity(base.len());
    for b in &base {
        let prior = priors.get(b.gender);
        let after = solve_draw(&prefs, prior, b, Enquiry::NotAsked)?;
        let before = if b.drawn_e.is_asked() { solve_draw(&prefs, prior, b, Enquiry::Asked)? } else { after };
        pre.push(before);
        post.push(after);
    }
    Ok(ContinuousPair { pre, post })
}

pub fn simulate_continuous_scenario(spec: &ContinuousSpec, scenario: Scenario) -> Result<Vec<ContinuousDraw>> {
    spec.validate()?;
    let priors = tabulate(spec)?;
    let prefs = spec.prefs();
    sample_base(spec, &priors)?
        .iter()
        .map(|b| solve_draw(&prefs, priors.get(b.gender), b, scenario.enquiry(b.drawn_e)))
        .collect()
}

/// Support and mean held fixed while skewness varies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SkewFamily {
    pub w_min: f64,
    pub w_max: f64,
    pub mean_frac: f64,
}

impl Default for SkewFamily {
    fn default() -> Self {
        SkewFamily { w_min: 1.0, w_max: 8.0, mean_frac: DEFAULT_MEAN_FRAC }
    }
}

impl SkewFamily {
    pub fn prior(&self, skewness: f64) -> Result<ContinuousWageDist> {
        ContinuousWageDist::from_mean_skewness(self.w_min, self.w_max, self.mean_frac, skewness)
    }
}

pub const AXIS_MU_F: &str = "mu_F";
pub const AXIS_MU_M: &str = "mu_M";

pub fn run_skew_cell(template: &ContinuousSpec, family: &SkewFamily, mu_f: f64, mu_m: f64, seed: u64) -> Result<CellResult> {
    let (pf, pm) = match (family.prior(mu_f), family.prior(mu_m)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return Ok(CellResult::Flagged(e.to_string())),
    };
    let spec = ContinuousSpec { prior: ByGender::new(pf, pm), seed, ..*template };
    run_continuous_pair(&spec)?.metrics().map(CellResult::Metrics)
}

/// Sweep over prior skewness per gender; female values on the x axis.
/// Unreachable skewness values are flagged per cell.
pub fn skewness_sweep(
    template: &ContinuousSpec,
    family: &SkewFamily,
    mu_female: &[f64],
    mu_male: &[f64],
    master_seed: u64,
) -> Result<MetricGrid> {
    if !(family.w_min > 0.0 && family.w_min < family.w_max) {
        return Err(Error::Grid(format!("bad support [{}, {}]", family.w_min, family.w_max)));
    }
    build_grid(
        Axis::new(AXIS_MU_F, mu_female)?,
        Axis::new(AXIS_MU_M, mu_male)?,
        master_seed,
        |x, y, seed| run_skew_cell(template, family, x, y, seed),
    )
}
