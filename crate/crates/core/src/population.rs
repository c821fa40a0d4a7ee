//! Heterogeneous two-wage populations: sampling, per-match solving, the
//! pre/post ban scenario pair and the parameter sweeps built on it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dist::{check_quantile_dominance, norm_cdf, norm_quantile, TnQuantile, TruncatedNormal};
use crate::econ::{
    best_response_to_offers, solve_with_prior, Enquiry, MatchEnv, MatchState, Preferences,
    PsychicCosts, ScheduleLabel, WageType, WorkerOutcome,
};
use crate::error::{invalid, Result};
use crate::metrics::{
    build_grid, compute_metrics, Axis, ByGender, CellMetrics, CellResult, Gender, MetricGrid,
    OutcomeRecord,
};

/// Marginals of the four psychic costs. Comonotone coupling turns their
/// quantile ordering into a per-worker ordering.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CostDistributions {
    /// Cost of disclosing, asked or not.
    pub disclose: TruncatedNormal,
    pub refuse_female: TruncatedNormal,
    pub refuse_male: TruncatedNormal,
    /// Cost of withholding when not asked.
    pub unasked: TruncatedNormal,
}

impl Default for CostDistributions {
    fn default() -> Self {
        CostDistributions {
            disclose: TruncatedNormal { mean: 0.53, sd: 0.02, lower: 0.5, upper: 0.56 },
            refuse_female: TruncatedNormal { mean: 0.52, sd: 0.02, lower: 0.49, upper: 0.556 },
            // nearly uniform; the top quantiles come within a hair of the
            // disclosure cost, so a few men separate even at tiny f_low
            refuse_male: TruncatedNormal { mean: 0.3, sd: 1.0, lower: 0.1, upper: 0.552 },
            unasked: TruncatedNormal { mean: 0.05, sd: 0.01, lower: 0.02, upper: 0.08 },
        }
    }
}

impl CostDistributions {
    /// Every marginal must be valid with non-negative support, and each link
    /// of the chain disclose > refuse(F) > refuse(M) > unasked must hold
    /// quantile by quantile.
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("disclose", &self.disclose),
            ("refuse_female", &self.refuse_female),
            ("refuse_male", &self.refuse_male),
            ("unasked", &self.unasked),
        ];
        for (name, d) in named {
            d.validate()?;
            if d.lower < 0.0 {
                return invalid(format!("{name} cost support must be non-negative, lower = {}", d.lower));
            }
        }
        check_quantile_dominance(&self.disclose, &self.refuse_female, "disclose over refuse_female")?;
        check_quantile_dominance(&self.refuse_female, &self.refuse_male, "refuse_female over refuse_male")?;
        check_quantile_dominance(&self.refuse_male, &self.unasked, "refuse_male over unasked")?;
        Ok(())
    }

    pub fn refuse(&self, g: Gender) -> &TruncatedNormal {
        match g {
            Gender::Female => &self.refuse_female,
            Gender::Male => &self.refuse_male,
        }
    }

    fn samplers(&self) -> CostSamplers {
        CostSamplers {
            disclose: self.disclose.sampler(),
            refuse: ByGender::new(self.refuse_female.sampler(), self.refuse_male.sampler()),
            unasked: self.unasked.sampler(),
        }
    }
}

#[derive(Clone, Copy)]
struct CostSamplers {
    disclose: TnQuantile,
    refuse: ByGender<TnQuantile>,
    unasked: TnQuantile,
}

impl CostSamplers {
    fn costs(&self, g: Gender, u: f64) -> Result<PsychicCosts> {
        let c1 = self.disclose.quantile(u);
        PsychicCosts::new(c1, c1, self.refuse.get(g).quantile(u), self.unasked.quantile(u))
    }
}

/// Comonotone cost draw: all four marginals evaluated at the same `u`.
pub fn sample_costs_coupled(costs: &CostDistributions, gender: Gender, u: f64) -> Result<PsychicCosts> {
    if !(u > 0.0 && u < 1.0) {
        return invalid(format!("coupling uniform must lie in (0, 1), got {u}"));
    }
    costs.samplers().costs(gender, u)
}

/// Distributions shared by both genders apart from the refusal cost.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Heterogeneity {
    pub z: TruncatedNormal,
    pub c: TruncatedNormal,
    pub z_new: TruncatedNormal,
    pub costs: CostDistributions,
    /// Pre-ban probability of being asked.
    pub p_enquiry: ByGender<f64>,
}

impl Default for Heterogeneity {
    fn default() -> Self {
        Heterogeneity {
            z: TruncatedNormal { mean: 5.0, sd: 0.5, lower: 3.5, upper: 6.5 },
            c: TruncatedNormal { mean: 0.1, sd: 0.03, lower: 0.04, upper: 0.16 },
            z_new: TruncatedNormal { mean: 5.0, sd: 0.5, lower: 3.5, upper: 6.5 },
            costs: CostDistributions::default(),
            p_enquiry: ByGender::both(0.35),
        }
    }
}

impl Heterogeneity {
    /// Every distribution collapsed onto a single point.
    pub fn degenerate(z: f64, c: f64, z_new: f64, c11: f64, c10f: f64, c10m: f64, c00: f64, p: f64) -> Self {
        Heterogeneity {
            z: TruncatedNormal::point(z),
            c: TruncatedNormal::point(c),
            z_new: TruncatedNormal::point(z_new),
            costs: CostDistributions {
                disclose: TruncatedNormal::point(c11),
                refuse_female: TruncatedNormal::point(c10f),
                refuse_male: TruncatedNormal::point(c10m),
                unasked: TruncatedNormal::point(c00),
            },
            p_enquiry: ByGender::both(p),
        }
    }

    /// `z_floor` is the largest initial wage the population can hold.
    pub fn validate(&self, z_floor: f64) -> Result<()> {
        for (name, d) in [("z", &self.z), ("c", &self.c), ("z_new", &self.z_new)] {
            d.validate().map_err(|e| crate::Error::InvalidParams(format!("{name}: {e}")))?;
        }
        if self.z.lower < z_floor {
            return invalid(format!(
                "z support must lie above the top initial wage {z_floor}, lower = {}",
                self.z.lower
            ));
        }
        if !(self.z_new.lower > 0.0) {
            return invalid(format!("z_new support must be positive, lower = {}", self.z_new.lower));
        }
        for g in Gender::BOTH {
            let p = *self.p_enquiry.get(g);
            if !(0.0..=1.0).contains(&p) {
                return invalid(format!("p_enquiry for {} must lie in [0, 1], got {p}", g.code()));
            }
        }
        self.costs.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PopulationSpec {
    pub n_per_gender: usize,
    pub eta: f64,
    pub w_low: f64,
    pub w_high: f64,
    pub f_low: ByGender<f64>,
    /// Latent correlation between initial wage and `z`.
    #[serde(default)]
    pub rho_wz: ByGender<f64>,
    pub heterogeneity: Heterogeneity,
    pub seed: u64,
}

impl Default for PopulationSpec {
    fn default() -> Self {
        PopulationSpec {
            n_per_gender: 10_000,
            eta: 0.5,
            w_low: 1.0,
            w_high: 2.0,
            f_low: ByGender::new(0.5, 0.2),
            rho_wz: ByGender::both(0.0),
            heterogeneity: Heterogeneity::default(),
            seed: 20_240_601,
        }
    }
}

impl PopulationSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_per_gender == 0 {
            return invalid("n_per_gender must be positive");
        }
        Preferences::new(self.eta)?;
        if !(0.0 < self.w_low && self.w_low < self.w_high && self.w_high.is_finite()) {
            return invalid(format!("need 0 < w_low < w_high, got {} and {}", self.w_low, self.w_high));
        }
        for g in Gender::BOTH {
            let f = *self.f_low.get(g);
            if !(0.0..=1.0).contains(&f) {
                return invalid(format!("f_low for {} must lie in [0, 1], got {f}", g.code()));
            }
            let rho = *self.rho_wz.get(g);
            if !(rho > -1.0 && rho < 1.0) {
                return invalid(format!("rho_wz for {} must lie in (-1, 1), got {rho}", g.code()));
            }
        }
        self.heterogeneity.validate(self.w_high)
    }

    pub fn prefs(&self) -> Preferences {
        Preferences { eta: self.eta }
    }

    pub fn wage(&self, t: WageType) -> f64 {
        match t {
            WageType::Low => self.w_low,
            WageType::High => self.w_high,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    PreShb,
    PostShb,
}

impl Scenario {
    pub fn enquiry(self, drawn: Enquiry) -> Enquiry {
        match self {
            Scenario::PreShb => drawn,
            Scenario::PostShb => Enquiry::NotAsked,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkerDraw {
    pub index: usize,
    pub gender: Gender,
    pub wage_type: WageType,
    pub w: f64,
    pub z: f64,
    pub c: f64,
    pub z_new: f64,
    pub e: Enquiry,
    pub costs: PsychicCosts,
    /// The firm's probability that this worker is a low earner.
    pub prior_low: f64,
    pub label: Option<ScheduleLabel>,
    pub outcome: Option<WorkerOutcome>,
}

impl WorkerDraw {
    pub fn record(&self) -> Option<OutcomeRecord> {
        Some(OutcomeRecord {
            gender: self.gender,
            asked: self.e.is_asked(),
            w_initial: self.w,
            outcome: self.outcome?,
        })
    }
}

/// Uniform on the open interval (0, 1) from 53 random bits.
pub(crate) fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Uniforms for one worker index, shared by the female and male worker at
/// that index so symmetric inputs produce identical halves.
#[derive(Clone, Copy, Debug)]
pub(crate) struct IndexUniforms {
    pub wage: f64,
    pub z: f64,
    pub c: f64,
    pub z_new: f64,
    pub enquiry: f64,
    pub cost: f64,
}

impl IndexUniforms {
    pub(crate) fn draw(rng: &mut ChaCha8Rng) -> Self {
        IndexUniforms {
            wage: open_unit(rng),
            z: open_unit(rng),
            c: open_unit(rng),
            z_new: open_unit(rng),
            enquiry: open_unit(rng),
            cost: open_unit(rng),
        }
    }
}

pub(crate) struct SharedSamplers {
    pub z: TnQuantile,
    pub c: TnQuantile,
    pub z_new: TnQuantile,
    costs: CostSamplers,
}

impl SharedSamplers {
    pub(crate) fn new(h: &Heterogeneity) -> Self {
        SharedSamplers {
            z: h.z.sampler(),
            c: h.c.sampler(),
            z_new: h.z_new.sampler(),
            costs: h.costs.samplers(),
        }
    }

    pub(crate) fn costs(&self, g: Gender, u: f64) -> Result<PsychicCosts> {
        self.costs.costs(g, u)
    }
}

/// Copula split of the binary wage: low iff the latent score falls at or
/// below `Φ⁻¹(f)`. Returns `(is_low, firm prior given z)`.
fn wage_and_prior(f: f64, rho: f64, u_wage: f64, u_z: f64) -> (bool, f64) {
    if rho == 0.0 {
        return (u_wage <= f, f);
    }
    let t = norm_quantile(f);
    let s = norm_quantile(u_z);
    let scale = (1.0 - rho * rho).sqrt();
    let latent = rho * s + scale * norm_quantile(u_wage);
    let prior = if t.is_infinite() { f } else { norm_cdf((t - rho * s) / scale) };
    (latent <= t, prior)
}

/// Draws both genders' workers, females first. Enquiry status is the
/// pre-ban draw; outcomes are left empty.
pub fn sample_population(spec: &PopulationSpec) -> Result<Vec<WorkerDraw>> {
    spec.validate()?;
    let h = &spec.heterogeneity;
    let s = SharedSamplers::new(h);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n_per_gender;
    let uniforms: Vec<IndexUniforms> = (0..n).map(|_| IndexUniforms::draw(&mut rng)).collect();

    let mut out = Vec::with_capacity(2 * n);
    for g in Gender::BOTH {
        let f = *spec.f_low.get(g);
        let rho = *spec.rho_wz.get(g);
        let p = *h.p_enquiry.get(g);
        for (index, u) in uniforms.iter().enumerate() {
            let (is_low, prior_low) = wage_and_prior(f, rho, u.wage, u.z);
            let wage_type = if is_low { WageType::Low } else { WageType::High };
            out.push(WorkerDraw {
                index,
                gender: g,
                wage_type,
                w: spec.wage(wage_type),
                z: s.z.quantile(u.z),
                c: s.c.quantile(u.c),
                z_new: s.z_new.quantile(u.z_new),
                e: Enquiry::from_indicator(u.enquiry < p),
                costs: s.costs(g, u.cost)?,
                prior_low,
                label: None,
                outcome: None,
            });
        }
    }
    Ok(out)
}

/// Solves the firm's menu for this match at the firm's prior, then the
/// worker's response given the realized wage.
pub fn simulate_worker(
    prefs: &Preferences,
    w_low: f64,
    w_high: f64,
    draw: &WorkerDraw,
) -> Result<(ScheduleLabel, WorkerOutcome)> {
    let env = MatchEnv::new(draw.z, draw.c, draw.z_new, w_low, w_high)?;
    let (c1, c0) = draw.costs.for_enquiry(draw.e);
    let menu = solve_with_prior(prefs, &env, draw.prior_low, c1, c0)?;
    let m = MatchState { w: draw.w, z: draw.z, c: draw.c, z_new: draw.z_new, e: draw.e };
    let s = menu.schedule;
    let outcome = best_response_to_offers(
        prefs,
        &m,
        c1,
        c0,
        s.w_nondisclose,
        s.disclosure_offer(draw.wage_type),
    )?;
    Ok((s.label, outcome))
}

fn simulate_all(spec: &PopulationSpec, draws: &mut [WorkerDraw], scenario: Scenario) -> Result<()> {
    let prefs = spec.prefs();
    for d in draws.iter_mut() {
        d.e = scenario.enquiry(d.e);
        let (label, outcome) = simulate_worker(&prefs, spec.w_low, spec.w_high, d)?;
        d.label = Some(label);
        d.outcome = Some(outcome);
    }
    Ok(())
}

pub fn run_scenario(spec: &PopulationSpec, scenario: Scenario) -> Result<Vec<WorkerDraw>> {
    let mut draws = sample_population(spec)?;
    simulate_all(spec, &mut draws, scenario)?;
    Ok(draws)
}

/// Both scenarios on common random numbers; only enquiry status differs.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioPair {
    pub pre: Vec<WorkerDraw>,
    pub post: Vec<WorkerDraw>,
}

impl ScenarioPair {
    pub fn records(draws: &[WorkerDraw]) -> Vec<OutcomeRecord> {
        draws.iter().filter_map(WorkerDraw::record).collect()
    }

    pub fn metrics(&self) -> Result<CellMetrics> {
        CellMetrics::new(
            compute_metrics(&Self::records(&self.pre))?,
            compute_metrics(&Self::records(&self.post))?,
        )
    }
}

pub fn run_scenario_pair(spec: &PopulationSpec) -> Result<ScenarioPair> {
    let mut pre = sample_population(spec)?;
    let mut post = pre.clone();
    simulate_all(spec, &mut pre, Scenario::PreShb)?;
    simulate_all(spec, &mut post, Scenario::PostShb)?;
    Ok(ScenarioPair { pre, post })
}

pub const AXIS_F_LOW_F: &str = "f_low_F";
pub const AXIS_F_LOW_M: &str = "f_low_M";
pub const AXIS_RHO_F: &str = "rho_wz_F";
pub const AXIS_RHO_M: &str = "rho_wz_M";

/// Sweep over `(f_low_F, f_low_M)`; female values on the x axis.
pub fn sweep_fl_grid(template: &PopulationSpec, f_female: &[f64], f_male: &[f64], master_seed: u64) -> Result<MetricGrid> {
    for &f in f_female.iter().chain(f_male) {
        if !(f > 0.0 && f < 1.0) {
            return Err(crate::Error::Grid(format!("f_low grid values must lie in (0, 1), got {f}")));
        }
    }
    template.validate()?;
    build_grid(
        Axis::new(AXIS_F_LOW_F, f_female)?,
        Axis::new(AXIS_F_LOW_M, f_male)?,
        master_seed,
        |x, y, seed| run_fl_cell(template, x, y, seed),
    )
}

pub fn run_fl_cell(template: &PopulationSpec, f_female: f64, f_male: f64, seed: u64) -> Result<CellResult> {
    let spec = PopulationSpec { f_low: ByGender::new(f_female, f_male), seed, ..*template };
    run_scenario_pair(&spec)?.metrics().map(CellResult::Metrics)
}

pub fn run_corr_cell(template: &PopulationSpec, rho_female: f64, rho_male: f64, seed: u64) -> Result<CellResult> {
    let spec = PopulationSpec { rho_wz: ByGender::new(rho_female, rho_male), seed, ..*template };
    if let Err(e) = spec.validate() {
        return Ok(CellResult::Flagged(e.to_string()));
    }
    run_scenario_pair(&spec)?.metrics().map(CellResult::Metrics)
}

/// Sweep over the latent wage–output correlation per gender.
pub fn sweep_corr(template: &PopulationSpec, rho_female: &[f64], rho_male: &[f64], master_seed: u64) -> Result<MetricGrid> {
    template.validate()?;
    build_grid(
        Axis::new(AXIS_RHO_F, rho_female)?,
        Axis::new(AXIS_RHO_M, rho_male)?,
        master_seed,
        |x, y, seed| run_corr_cell(template, x, y, seed),
    )
}
