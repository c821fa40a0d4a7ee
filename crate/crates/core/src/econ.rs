//! Closed-form economics of the two-type disclosure game.
//!
//! A worker employed at `(w, z)` receives a utility shock `c`, meets a new
//! firm with output `z_new`, and chooses whether to disclose `w` and whether
//! to accept. The firm commits to a non-disclosure wage and a disclosure
//! wage per initial-wage type before seeing the choice.

use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Result};

/// Absolute tolerance used when comparing utilities.
pub const UTILITY_TOL: f64 = 1e-9;
/// Absolute tolerance used when comparing expected profits.
pub const PROFIT_TOL: f64 = 1e-9;
/// Relative tolerance used when comparing wages.
pub const WAGE_RTOL: f64 = 1e-9;

/// Flow utility `u(w, z) = ln(w) - eta * ln(z)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Preferences {
    pub eta: f64,
}

impl Default for Preferences {
    fn default() -> Self {
        Preferences { eta: 0.5 }
    }
}

impl Preferences {
    pub fn new(eta: f64) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0) {
            return invalid(format!("eta must be positive, got {eta}"));
        }
        Ok(Preferences { eta })
    }

    pub fn utility(&self, w: f64, z: f64) -> Result<f64> {
        if !(w > 0.0) || !(z > 0.0) {
            return domain(format!("utility needs w > 0 and z > 0, got w={w}, z={z}"));
        }
        Ok(w.ln() - self.eta * z.ln())
    }

    pub fn inverse_utility(&self, v: f64, z: f64) -> Result<f64> {
        if !(z > 0.0) || !v.is_finite() {
            return domain(format!("inverse utility needs z > 0 and finite v, got v={v}, z={z}"));
        }
        Ok((v + self.eta * z.ln()).exp())
    }

    /// Partial derivative of utility in the wage argument.
    pub fn marginal_utility(&self, w: f64, z: f64) -> Result<f64> {
        if !(w > 0.0) || !(z > 0.0) {
            return domain(format!("marginal utility needs w > 0 and z > 0, got w={w}, z={z}"));
        }
        Ok(1.0 / w)
    }

    /// New wage at which accepting (net of `cost`) matches the outside
    /// option `u(w, z) - c`.
    pub fn reservation_wage(&self, w: f64, z: f64, c: f64, z_new: f64, cost: f64) -> Result<f64> {
        let outside = self.utility(w, z)? - c;
        self.inverse_utility(outside + cost, z_new)
    }

    /// Derivative of [`Preferences::reservation_wage`] with respect to `w`.
    pub fn reservation_wage_slope(
        &self,
        w: f64,
        z: f64,
        c: f64,
        z_new: f64,
        cost: f64,
    ) -> Result<f64> {
        let r = self.reservation_wage(w, z, c, z_new, cost)?;
        Ok(self.marginal_utility(w, z)? / self.marginal_utility(r, z_new)?)
    }
}

/// Whether the prospective employer asks for salary history.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Enquiry {
    NotAsked,
    Asked,
}

impl Enquiry {
    pub fn from_indicator(asked: bool) -> Self {
        if asked {
            Enquiry::Asked
        } else {
            Enquiry::NotAsked
        }
    }

    pub fn is_asked(self) -> bool {
        self == Enquiry::Asked
    }
}

/// Psychic costs `c_ed`, `e` = enquiry, `d` = disclosure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsychicCosts {
    pub c11: f64,
    pub c01: f64,
    pub c10: f64,
    pub c00: f64,
}

impl PsychicCosts {
    /// Requires `c11 = c01 > c10 > c00 >= 0`.
    pub fn new(c11: f64, c01: f64, c10: f64, c00: f64) -> Result<Self> {
        let all_finite = [c11, c01, c10, c00].iter().all(|c| c.is_finite());
        if !all_finite {
            return invalid("psychic costs must be finite");
        }
        if c11 != c01 {
            return invalid(format!("c11 ({c11}) must equal c01 ({c01})"));
        }
        if !(c11 > c10 && c10 > c00 && c00 >= 0.0) {
            return invalid(format!(
                "psychic costs must satisfy c11 > c10 > c00 >= 0, got c11={c11}, c10={c10}, c00={c00}"
            ));
        }
        Ok(PsychicCosts { c11, c01, c10, c00 })
    }

    /// Shorthand for the common case `c11 = c01 = disclose`.
    pub fn ordered(disclose: f64, refuse: f64, unasked: f64) -> Result<Self> {
        Self::new(disclose, disclose, refuse, unasked)
    }

    /// `(c_e1, c_e0)` for the given enquiry status.
    pub fn for_enquiry(&self, e: Enquiry) -> (f64, f64) {
        match e {
            Enquiry::Asked => (self.c11, self.c10),
            Enquiry::NotAsked => (self.c01, self.c00),
        }
    }
}

/// One worker's match: initial wage and output, shock, new output, enquiry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchState {
    pub w: f64,
    pub z: f64,
    pub c: f64,
    pub z_new: f64,
    pub e: Enquiry,
}

impl MatchState {
    pub fn new(w: f64, z: f64, c: f64, z_new: f64, e: Enquiry) -> Result<Self> {
        if !(w > 0.0) || !(z >= w) || !(z_new > 0.0) || !c.is_finite() {
            return invalid(format!(
                "match needs w > 0, z >= w, z_new > 0, got w={w}, z={z}, z_new={z_new}, c={c}"
            ));
        }
        Ok(MatchState { w, z, c, z_new, e })
    }
}

/// Everything about a two-type match the firm sees except the prior and costs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchEnv {
    pub z: f64,
    pub c: f64,
    pub z_new: f64,
    pub w_low: f64,
    pub w_high: f64,
}

impl MatchEnv {
    pub fn new(z: f64, c: f64, z_new: f64, w_low: f64, w_high: f64) -> Result<Self> {
        let env = MatchEnv { z, c, z_new, w_low, w_high };
        env.validate()?;
        Ok(env)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.w_low && self.w_low < self.w_high && self.w_high <= self.z) {
            return invalid(format!(
                "need 0 < w_low < w_high <= z, got w_low={}, w_high={}, z={}",
                self.w_low, self.w_high, self.z
            ));
        }
        if !(self.z_new > 0.0) || !self.c.is_finite() {
            return invalid(format!("need z_new > 0 and finite c, got z_new={}, c={}", self.z_new, self.c));
        }
        Ok(())
    }

    pub fn reservation(&self, prefs: &Preferences, w: f64, cost: f64) -> Result<f64> {
        prefs.reservation_wage(w, self.z, self.c, self.z_new, cost)
    }

    pub fn wage(&self, t: WageType) -> f64 {
        match t {
            WageType::Low => self.w_low,
            WageType::High => self.w_high,
        }
    }
}

/// Which of the two support points a worker earned.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WageType {
    Low,
    High,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoTypeParams {
    pub prefs: Preferences,
    pub env: MatchEnv,
    pub f_low: f64,
    pub costs: PsychicCosts,
    pub e: Enquiry,
}

impl TwoTypeParams {
    pub fn new(
        prefs: Preferences,
        env: MatchEnv,
        f_low: f64,
        costs: PsychicCosts,
        e: Enquiry,
    ) -> Result<Self> {
        env.validate()?;
        if !(f_low > 0.0 && f_low < 1.0) {
            return domain(format!("f_low must lie in (0, 1), got {f_low}"));
        }
        Ok(TwoTypeParams { prefs, env, f_low, costs, e })
    }

    /// `(c_e1, c_e0)` at this match's enquiry status.
    pub fn action_costs(&self) -> (f64, f64) {
        self.costs.for_enquiry(self.e)
    }

    pub fn match_state(&self, t: WageType) -> MatchState {
        MatchState {
            w: self.env.wage(t),
            z: self.env.z,
            c: self.env.c,
            z_new: self.env.z_new,
            e: self.e,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleLabel {
    Pooling,
    Separating,
    HireHighOnly,
    HireLowOnly,
    HireNone,
}

impl ScheduleLabel {
    pub const ALL: [ScheduleLabel; 5] = [
        ScheduleLabel::Pooling,
        ScheduleLabel::Separating,
        ScheduleLabel::HireHighOnly,
        ScheduleLabel::HireLowOnly,
        ScheduleLabel::HireNone,
    ];

    /// Expected `(disclosed, accepted)` for each wage type under this label.
    pub fn expected_response(self, t: WageType) -> (bool, bool) {
        use ScheduleLabel::*;
        match (self, t) {
            (Pooling, _) => (false, true),
            (Separating, WageType::Low) => (false, true),
            (Separating, WageType::High) => (true, true),
            (HireHighOnly, WageType::Low) => (false, false),
            (HireHighOnly, WageType::High) => (true, true),
            (HireLowOnly, WageType::Low) => (false, true),
            (HireLowOnly, WageType::High) => (false, false),
            (HireNone, _) => (false, false),
        }
    }
}

/// The firm's committed offers. An offer of 0 means "no job".
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WageSchedule {
    pub w_nondisclose: f64,
    pub w_disclose_low: f64,
    pub w_disclose_high: f64,
    pub label: ScheduleLabel,
}

impl WageSchedule {
    pub fn disclosure_offer(&self, t: WageType) -> f64 {
        match t {
            WageType::Low => self.w_disclose_low,
            WageType::High => self.w_disclose_high,
        }
    }

    fn offers(&self) -> [f64; 3] {
        [self.w_nondisclose, self.w_disclose_low, self.w_disclose_high]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkerOutcome {
    pub disclosed: bool,
    pub accepted: bool,
    /// New wage; `None` when the worker stays at the old match.
    pub wage_new: Option<f64>,
}

impl WorkerOutcome {
    /// Wage earned in period 2: the new wage, or the retained old wage.
    pub fn realized_wage(&self, w_old: f64) -> f64 {
        self.wage_new.unwrap_or(w_old)
    }
}

fn accept_value(prefs: &Preferences, offer: f64, z_new: f64, cost: f64) -> f64 {
    if offer > 0.0 {
        prefs.utility(offer, z_new).map(|u| u - cost).unwrap_or(f64::NEG_INFINITY)
    } else {
        f64::NEG_INFINITY
    }
}

/// Best response to a withhold offer and the offer the worker would get by
/// disclosing their own wage.
///
/// Near-ties (within [`UTILITY_TOL`]) go to the earlier option in the order
/// withhold-accept, disclose-accept, reject.
pub fn best_response_to_offers(
    prefs: &Preferences,
    m: &MatchState,
    cost_disclose: f64,
    cost_withhold: f64,
    withhold_offer: f64,
    disclose_offer: f64,
) -> Result<WorkerOutcome> {
    let outside = prefs.utility(m.w, m.z)? - m.c;
    let options = [
        (accept_value(prefs, withhold_offer, m.z_new, cost_withhold), false, true, withhold_offer),
        (accept_value(prefs, disclose_offer, m.z_new, cost_disclose), true, true, disclose_offer),
        (outside, false, false, 0.0),
    ];
    let best = options.iter().map(|o| o.0).fold(f64::NEG_INFINITY, f64::max);
    let &(_, disclosed, accepted, wage) = options
        .iter()
        .find(|o| o.0 >= best - UTILITY_TOL)
        .expect("outside option is finite");
    Ok(WorkerOutcome {
        disclosed,
        accepted,
        wage_new: accepted.then_some(wage),
    })
}

pub fn worker_best_response(
    prefs: &Preferences,
    m: &MatchState,
    costs: &PsychicCosts,
    schedule: &WageSchedule,
    t: WageType,
) -> Result<WorkerOutcome> {
    let (c_disclose, c_withhold) = costs.for_enquiry(m.e);
    best_response_to_offers(
        prefs,
        m,
        c_disclose,
        c_withhold,
        schedule.w_nondisclose,
        schedule.disclosure_offer(t),
    )
}

/// One priced menu considered by the firm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateMenu {
    pub schedule: WageSchedule,
    pub profit: f64,
    pub feasible: bool,
}

/// Prices every menu at the relevant reservation wages. `prior_low` may be
/// any probability in `[0, 1]`.
pub fn candidate_menus(
    prefs: &Preferences,
    env: &MatchEnv,
    prior_low: f64,
    c_disclose: f64,
    c_withhold: f64,
) -> Result<[CandidateMenu; 5]> {
    let zn = env.z_new;
    let f = prior_low;
    let low_withhold = env.reservation(prefs, env.w_low, c_withhold)?;
    let high_withhold = env.reservation(prefs, env.w_high, c_withhold)?;
    let high_disclose = env.reservation(prefs, env.w_high, c_disclose)?;

    let menu = |label, w0: f64, w1l: f64, w1h: f64, profit: f64| {
        let schedule = WageSchedule {
            w_nondisclose: w0,
            w_disclose_low: w1l,
            w_disclose_high: w1h,
            label,
        };
        let feasible = schedule.offers().iter().all(|&o| o <= zn * (1.0 + WAGE_RTOL));
        CandidateMenu { schedule, profit, feasible }
    };

    use ScheduleLabel::*;
    Ok([
        menu(Pooling, high_withhold, high_withhold, high_withhold, zn - high_withhold),
        menu(
            Separating,
            low_withhold,
            low_withhold,
            high_disclose,
            f * (zn - low_withhold) + (1.0 - f) * (zn - high_disclose),
        ),
        menu(HireHighOnly, 0.0, 0.0, high_disclose, (1.0 - f) * (zn - high_disclose)),
        menu(HireLowOnly, low_withhold, low_withhold, 0.0, f * (zn - low_withhold)),
        menu(HireNone, 0.0, 0.0, 0.0, 0.0),
    ])
}

/// Profit-maximizing feasible menu for an arbitrary prior in `[0, 1]`.
/// Profit ties within [`PROFIT_TOL`] go to the earlier label in
/// [`ScheduleLabel::ALL`].
pub fn solve_with_prior(
    prefs: &Preferences,
    env: &MatchEnv,
    prior_low: f64,
    c_disclose: f64,
    c_withhold: f64,
) -> Result<CandidateMenu> {
    if !(0.0..=1.0).contains(&prior_low) {
        return domain(format!("prior must lie in [0, 1], got {prior_low}"));
    }
    let menus = candidate_menus(prefs, env, prior_low, c_disclose, c_withhold)?;
    let top = menus
        .iter()
        .filter(|m| m.feasible)
        .map(|m| m.profit)
        .fold(f64::NEG_INFINITY, f64::max);
    // HireNone is always feasible, so `find` cannot fail.
    Ok(*menus
        .iter()
        .find(|m| m.feasible && m.profit >= top - PROFIT_TOL)
        .expect("HireNone is feasible"))
}

pub fn firm_two_type_solve(params: &TwoTypeParams) -> Result<WageSchedule> {
    if !(params.f_low > 0.0 && params.f_low < 1.0) {
        return domain(format!("f_low must lie in (0, 1), got {}", params.f_low));
    }
    let (c1, c0) = params.action_costs();
    Ok(solve_with_prior(&params.prefs, &params.env, params.f_low, c1, c0)?.schedule)
}

/// Expected profit of any schedule, evaluated through worker best responses.
pub fn expected_profit(params: &TwoTypeParams, schedule: &WageSchedule) -> Result<f64> {
    let mut total = 0.0;
    for (t, weight) in [(WageType::Low, params.f_low), (WageType::High, 1.0 - params.f_low)] {
        let m = params.match_state(t);
        let out = worker_best_response(&params.prefs, &m, &params.costs, schedule, t)?;
        if let Some(w) = out.wage_new {
            total += weight * (params.env.z_new - w);
        }
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub value: f64,
    /// Set when disclosure is costless relative to withholding.
    pub degenerate: bool,
}

/// Fraction of low earners at which pooling and separating earn the same
/// profit: `(R_H1 - R_H0) / (R_H1 - R_L0)`.
pub fn threshold_f(
    prefs: &Preferences,
    env: &MatchEnv,
    c_disclose: f64,
    c_withhold: f64,
) -> Result<Threshold> {
    env.validate()?;
    if c_disclose < c_withhold {
        return invalid(format!(
            "disclosure cost {c_disclose} below withholding cost {c_withhold}"
        ));
    }
    let low_withhold = env.reservation(prefs, env.w_low, c_withhold)?;
    let high_withhold = env.reservation(prefs, env.w_high, c_withhold)?;
    let high_disclose = env.reservation(prefs, env.w_high, c_disclose)?;
    let premium = high_disclose - high_withhold;
    if premium <= WAGE_RTOL * high_withhold {
        return Ok(Threshold { value: 0.0, degenerate: true });
    }
    Ok(Threshold {
        value: premium / (high_disclose - low_withhold),
        degenerate: false,
    })
}
