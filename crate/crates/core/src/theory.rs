//! Numeric verifiers for the three two-type propositions and the existence
//! scan over `(f_low_F, f_low_M)`.
//!
//! Clause checks use strict inequalities with tolerance [`CLAUSE_TOL`].
//! Comparisons that land inside the tolerance band are listed under
//! `boundary` rather than passed silently.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::econ::{
    best_response_to_offers, candidate_menus, solve_with_prior, threshold_f, CandidateMenu, Enquiry, MatchEnv,
    MatchState, Preferences, ScheduleLabel, WageSchedule, WageType, PROFIT_TOL,
};
use crate::error::{invalid, Result};
use crate::metrics::{CellResult, MetricGrid};
use crate::numerics::bisect;
use crate::population::{open_unit, sweep_fl_grid, PopulationSpec};

pub const CLAUSE_TOL: f64 = 1e-9;
const ROOT_TOL: f64 = 1e-13;

/// Parameters of a single two-type match.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaseParams {
    pub eta: f64,
    pub w_low: f64,
    pub w_high: f64,
    pub z: f64,
    pub c: f64,
    pub z_new: f64,
    /// Disclosure cost, asked or not.
    pub c11: f64,
    /// Refusal cost when asked; scanned by [`check_prop2`].
    pub c10: f64,
    /// Men's refusal cost in [`check_prop3`]; the women's value is scanned.
    pub c10_male: f64,
    pub c00: f64,
}

impl Default for BaseParams {
    fn default() -> Self {
        BaseParams {
            eta: 0.5,
            w_low: 1.0,
            w_high: 2.0,
            z: 8.0,
            c: 0.1,
            z_new: 8.0,
            c11: 1.0,
            c10: 0.4,
            c10_male: 0.2,
            c00: 0.05,
        }
    }
}

impl BaseParams {
    pub fn validate(&self) -> Result<()> {
        Preferences::new(self.eta)?;
        self.env()?;
        let costs = [self.c11, self.c10, self.c10_male, self.c00];
        if !costs.iter().all(|c| c.is_finite()) {
            return invalid("costs must be finite");
        }
        if !(self.c11 > self.c10 && self.c10 >= self.c00 && self.c00 >= 0.0) {
            return invalid(format!(
                "need c11 > c10 >= c00 >= 0, got c11={}, c10={}, c00={}",
                self.c11, self.c10, self.c00
            ));
        }
        if !(self.c11 > self.c10_male && self.c10_male > self.c00) {
            return invalid(format!(
                "need c11 > c10_male > c00, got c11={}, c10_male={}, c00={}",
                self.c11, self.c10_male, self.c00
            ));
        }
        Ok(())
    }

    pub fn prefs(&self) -> Preferences {
        Preferences { eta: self.eta }
    }

    pub fn env(&self) -> Result<MatchEnv> {
        MatchEnv::new(self.z, self.c, self.z_new, self.w_low, self.w_high)
    }

    /// Refusal cost at which a separated low earner is paid exactly the
    /// unasked pooling wage.
    pub fn c_bar(&self) -> Result<f64> {
        let env = self.env()?;
        let prefs = self.prefs();
        let pooled = env.reservation(&prefs, self.w_high, self.c00)?;
        let low = env.reservation(&prefs, self.w_low, self.c00)?;
        Ok(self.c00 + (pooled / low).ln())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub draw: usize,
    pub clause: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub draw: usize,
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropositionReport {
    pub proposition_id: u8,
    pub parameter_draws: usize,
    pub violations: Vec<Violation>,
    /// Comparisons that fell within tolerance of equality.
    pub boundary: Vec<Violation>,
    pub flags: Vec<String>,
    pub quantities: Vec<Quantity>,
    pub passed: bool,
}

impl PropositionReport {
    fn new(proposition_id: u8) -> Self {
        PropositionReport {
            proposition_id,
            parameter_draws: 0,
            violations: Vec::new(),
            boundary: Vec::new(),
            flags: Vec::new(),
            quantities: Vec::new(),
            passed: true,
        }
    }

    fn finish(mut self) -> Self {
        self.passed = self.violations.is_empty();
        self
    }

    fn violate(&mut self, draw: usize, clause: String) {
        self.violations.push(Violation { draw, clause });
    }

    fn quantity(&mut self, draw: usize, name: &str, value: f64) {
        self.quantities.push(Quantity { draw, name: name.to_string(), value });
    }

    /// Records `a > b`: a pass, a boundary hit, or a violation.
    fn greater(&mut self, draw: usize, clause: &str, a: f64, b: f64) {
        if a > b + CLAUSE_TOL {
            return;
        }
        let entry = format!("{clause}: {a} vs {b}");
        if (a - b).abs() <= CLAUSE_TOL {
            self.boundary.push(Violation { draw, clause: entry });
        } else {
            self.violate(draw, entry);
        }
    }

    fn equal(&mut self, draw: usize, clause: &str, a: f64, b: f64) {
        if (a - b).abs() > CLAUSE_TOL {
            self.violate(draw, format!("{clause}: {a} != {b}"));
        }
    }

    fn label(&mut self, draw: usize, clause: &str, got: ScheduleLabel, want: ScheduleLabel) {
        if got != want {
            self.violate(draw, format!("{clause}: {got:?}, expected {want:?}"));
        }
    }
}

/// Two-type game at one `(c_e1, c_e0)` pair.
struct Game {
    prefs: Preferences,
    env: MatchEnv,
    c1: f64,
    c0: f64,
    e: Enquiry,
}

/// Disclosure probability and expected new wage per type under a schedule.
#[derive(Clone, Copy, Debug)]
struct Play {
    label: ScheduleLabel,
    disclose: [bool; 2],
    wage: [f64; 2],
}

impl Play {
    fn disclosure_rate(&self, f: f64) -> f64 {
        f * self.disclose[0] as u8 as f64 + (1.0 - f) * self.disclose[1] as u8 as f64
    }

    fn mean_wage(&self, f: f64) -> f64 {
        if self.wage[0] == self.wage[1] {
            // pooled: no mixing, so no rounding
            return self.wage[0];
        }
        f * self.wage[0] + (1.0 - f) * self.wage[1]
    }
}

impl Game {
    fn new(base: &BaseParams, c1: f64, c0: f64, e: Enquiry) -> Result<Self> {
        Ok(Game { prefs: base.prefs(), env: base.env()?, c1, c0, e })
    }

    fn threshold(&self) -> Result<f64> {
        Ok(threshold_f(&self.prefs, &self.env, self.c1, self.c0)?.value)
    }

    fn menus(&self, f: f64) -> Result<[CandidateMenu; 5]> {
        candidate_menus(&self.prefs, &self.env, f, self.c1, self.c0)
    }

    /// Both pooling and separating menus respect `z_new`.
    fn interior_feasible(&self, f: f64) -> Result<bool> {
        let m = self.menus(f)?;
        Ok(m[0].feasible && m[1].feasible)
    }

    fn play(&self, schedule: &WageSchedule) -> Result<Play> {
        let mut disclose = [false; 2];
        let mut wage = [0.0; 2];
        for (i, t) in [WageType::Low, WageType::High].into_iter().enumerate() {
            let w = self.env.wage(t);
            let m = MatchState { w, z: self.env.z, c: self.env.c, z_new: self.env.z_new, e: self.e };
            let out = best_response_to_offers(
                &self.prefs,
                &m,
                self.c1,
                self.c0,
                schedule.w_nondisclose,
                schedule.disclosure_offer(t),
            )?;
            disclose[i] = out.disclosed;
            wage[i] = out.realized_wage(w);
        }
        Ok(Play { label: schedule.label, disclose, wage })
    }

    fn solve(&self, f: f64) -> Result<Play> {
        let menu = solve_with_prior(&self.prefs, &self.env, f, self.c1, self.c0)?;
        self.play(&menu.schedule)
    }

    /// Play under a specific candidate menu regardless of optimality.
    fn play_menu(&self, f: f64, label: ScheduleLabel) -> Result<Play> {
        let menus = self.menus(f)?;
        let menu = menus.iter().find(|m| m.schedule.label == label).expect("every label is priced");
        self.play(&menu.schedule)
    }

    /// Width of the tie band in `f` around the threshold.
    fn tie_band(&self, f: f64) -> Result<f64> {
        let m = self.menus(f)?;
        let slope = (m[1].schedule.w_disclose_high - m[1].schedule.w_nondisclose).abs();
        Ok(2.0 * PROFIT_TOL / slope.max(f64::MIN_POSITIVE))
    }
}

fn interior(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| lo + (hi - lo) * i as f64 / (n + 1) as f64).collect()
}

fn e_code(e: Enquiry) -> u8 {
    e.is_asked() as u8
}

fn prop1_point(report: &mut PropositionReport, draw: usize, base: &BaseParams, f: f64, e: Enquiry) -> Result<()> {
    let c0 = if e.is_asked() { base.c10 } else { base.c00 };
    let game = Game::new(base, base.c11, c0, e)?;
    let th = game.threshold()?;
    let at = format!("f_low={f}, e={}", e_code(e));
    if !(th > 0.0 && th < 1.0) {
        report.violate(draw, format!("threshold in (0,1) ({at}): {th}"));
    }
    if !game.interior_feasible(f)? {
        report.flags.push(format!("draw {draw}: pooling or separating menu infeasible ({at})"));
        return Ok(());
    }
    let play = game.solve(f)?;
    let band = game.tie_band(f)?;
    if f > th + band {
        report.label(draw, &format!("clause 1 ({at})"), play.label, ScheduleLabel::Separating);
        if play.disclose != [false, true] {
            report.violate(draw, format!("clause 1 ({at}): disclosure {:?}", play.disclose));
        }
    } else {
        let clause = if f < th - band { "clause 2" } else { "clause 2 boundary" };
        report.label(draw, &format!("{clause} ({at})"), play.label, ScheduleLabel::Pooling);
        if play.disclose != [false, false] {
            report.violate(draw, format!("{clause} ({at}): disclosure {:?}", play.disclose));
        }
        if f >= th - band {
            report.boundary.push(Violation { draw, clause: format!("f_low at threshold {th} ({at})") });
        }
    }
    Ok(())
}

fn prop1_clause3(report: &mut PropositionReport, draw: usize, base: &BaseParams) -> Result<()> {
    let t1 = Game::new(base, base.c11, base.c10, Enquiry::Asked)?.threshold()?;
    let t0 = Game::new(base, base.c11, base.c00, Enquiry::NotAsked)?.threshold()?;
    report.quantity(draw, "f_tilde_1", t1);
    report.quantity(draw, "f_tilde_0", t0);
    report.greater(draw, "clause 3 (f_tilde_0 > f_tilde_1)", t0, t1);
    Ok(())
}

/// Checks the first proposition at each `f_low` of the grid for one enquiry
/// status; each grid point is a draw.
pub fn check_prop1(base: &BaseParams, f_grid: &[f64], e: Enquiry) -> Result<PropositionReport> {
    base.validate()?;
    let mut report = PropositionReport::new(1);
    for (draw, &f) in f_grid.iter().enumerate() {
        if !(f > 0.0 && f < 1.0) {
            return invalid(format!("f_low grid values must lie in (0, 1), got {f}"));
        }
        prop1_point(&mut report, draw, base, f, e)?;
    }
    report.parameter_draws = f_grid.len();
    prop1_clause3(&mut report, 0, base)?;
    Ok(report.finish())
}

/// `n` interior points of `(0, 1)`.
pub fn default_f_grid(n: usize) -> Vec<f64> {
    interior(0.0, 1.0, n)
}

/// Log-uniform sampling range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogRange {
    pub lo: f64,
    pub hi: f64,
}

impl LogRange {
    const fn new(lo: f64, hi: f64) -> Self {
        LogRange { lo, hi }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !(self.lo > 0.0 && self.lo <= self.hi && self.hi.is_finite()) {
            return invalid(format!("range {name} must satisfy 0 < lo <= hi, got [{}, {}]", self.lo, self.hi));
        }
        Ok(())
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        let (a, b) = (self.lo.ln(), self.hi.ln());
        (a + (b - a) * open_unit(rng)).exp()
    }
}

/// Ranges for random parameter draws. Every quantity is drawn log-uniformly.
///
/// `c10 = c00 + c10_gap`, `c11 = c10 + c11_gap` and
/// `c10_male = c00 + c10_gap / 2`. `z = z_ratio * w_high`, and `z_new` is
/// `z_new_headroom` times the highest reservation wage so every menu is
/// feasible. `eta` must stay below 1 for that construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DrawRanges {
    pub eta: LogRange,
    pub w_low: LogRange,
    pub wage_ratio: LogRange,
    pub z_ratio: LogRange,
    pub c: LogRange,
    pub c00: LogRange,
    pub c10_gap: LogRange,
    pub c11_gap: LogRange,
    pub z_new_headroom: LogRange,
}

impl Default for DrawRanges {
    fn default() -> Self {
        DrawRanges {
            eta: LogRange::new(0.2, 0.8),
            w_low: LogRange::new(0.5, 2.0),
            wage_ratio: LogRange::new(1.2, 4.0),
            z_ratio: LogRange::new(1.0, 2.0),
            c: LogRange::new(0.01, 0.3),
            c00: LogRange::new(0.01, 0.3),
            c10_gap: LogRange::new(0.02, 0.6),
            c11_gap: LogRange::new(0.02, 0.6),
            z_new_headroom: LogRange::new(1.2, 3.0),
        }
    }
}

impl DrawRanges {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("eta", self.eta),
            ("w_low", self.w_low),
            ("wage_ratio", self.wage_ratio),
            ("z_ratio", self.z_ratio),
            ("c", self.c),
            ("c00", self.c00),
            ("c10_gap", self.c10_gap),
            ("c11_gap", self.c11_gap),
            ("z_new_headroom", self.z_new_headroom),
        ];
        for (name, r) in named {
            r.validate(name)?;
        }
        if self.eta.hi >= 1.0 {
            return invalid("eta range must stay below 1");
        }
        if self.wage_ratio.lo <= 1.0 || self.z_ratio.lo < 1.0 || self.z_new_headroom.lo <= 1.0 {
            return invalid("wage_ratio and z_new_headroom must exceed 1 and z_ratio must be at least 1");
        }
        Ok(())
    }

    fn draw(&self, rng: &mut ChaCha8Rng, c11_above_c_bar: bool) -> BaseParams {
        let eta = self.eta.draw(rng);
        let w_low = self.w_low.draw(rng);
        let w_high = w_low * self.wage_ratio.draw(rng);
        let z = w_high * self.z_ratio.draw(rng);
        let c = self.c.draw(rng);
        let c00 = self.c00.draw(rng);
        let c10_gap = self.c10_gap.draw(rng);
        let c10 = c00 + c10_gap;
        let c11_gap = self.c11_gap.draw(rng);
        let c11 = if c11_above_c_bar {
            c00 + (w_high / w_low).ln() + c11_gap
        } else {
            c10 + c11_gap
        };
        let headroom = self.z_new_headroom.draw(rng);
        // z_new = headroom * w_high * (z_new / z)^eta * e^(c11 - c), solved for z_new
        let z_new = (headroom * w_high * z.powf(-eta) * (c11 - c).exp()).powf(1.0 / (1.0 - eta));
        // the scanned c10 of the wider-c11 shape can overshoot c11; pull it inside
        let c10 = if c10 < c11 { c10 } else { 0.5 * (c00 + c11) };
        BaseParams { eta, w_low, w_high, z, c, z_new, c11, c10, c10_male: 0.5 * (c00 + c10), c00 }
    }
}

/// Reproducible random base configurations.
pub fn sample_draws(ranges: &DrawRanges, n: usize, seed: u64) -> Result<Vec<BaseParams>> {
    ranges.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| ranges.draw(&mut rng, false)).collect())
}

/// Like [`sample_draws`] but with `c11` placed above the refusal-cost bound
/// so the low-earner wage comparison can change sign.
pub fn sample_prop2_draws(ranges: &DrawRanges, n: usize, seed: u64) -> Result<Vec<BaseParams>> {
    ranges.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| ranges.draw(&mut rng, true)).collect())
}

/// First proposition over random base configurations, both enquiry statuses;
/// the draw index is the configuration index.
pub fn check_prop1_random(ranges: &DrawRanges, n: usize, seed: u64, f_grid: &[f64]) -> Result<PropositionReport> {
    check_prop1_many(&sample_draws(ranges, n, seed)?, f_grid)
}

pub fn check_prop1_many(bases: &[BaseParams], f_grid: &[f64]) -> Result<PropositionReport> {
    let mut report = PropositionReport::new(1);
    for (draw, base) in bases.iter().enumerate() {
        base.validate()?;
        for &f in f_grid {
            for e in [Enquiry::Asked, Enquiry::NotAsked] {
                prop1_point(&mut report, draw, base, f, e)?;
            }
        }
        prop1_clause3(&mut report, draw, base)?;
    }
    report.parameter_draws = bases.len();
    Ok(report.finish())
}

/// Grid sizes for [`check_prop2`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Prop2Grid {
    pub c10_points: usize,
    pub f_points: usize,
    pub regime_points: usize,
}

impl Default for Prop2Grid {
    fn default() -> Self {
        Prop2Grid { c10_points: 9, f_points: 9, regime_points: 5 }
    }
}

struct Prop2Games {
    asked: Game,
    unasked: Game,
}

impl Prop2Games {
    fn new(base: &BaseParams, c10: f64) -> Result<Self> {
        Ok(Prop2Games {
            asked: Game::new(base, base.c11, c10, Enquiry::Asked)?,
            unasked: Game::new(base, base.c11, base.c00, Enquiry::NotAsked)?,
        })
    }

    fn thresholds(&self) -> Result<(f64, f64)> {
        Ok((self.asked.threshold()?, self.unasked.threshold()?))
    }

    fn feasible(&self, f: f64) -> Result<bool> {
        Ok(self.asked.interior_feasible(f)? && self.unasked.interior_feasible(f)?)
    }

    /// Low earner's new wage asked minus unasked at the midpoint of the
    /// threshold interval.
    fn low_wage_gap(&self) -> Result<f64> {
        let (t1, t0) = self.thresholds()?;
        let f = 0.5 * (t1 + t0);
        Ok(self.asked.solve(f)?.wage[0] - self.unasked.solve(f)?.wage[0])
    }
}

fn prop2_interior(
    report: &mut PropositionReport,
    draw: usize,
    games: &Prop2Games,
    f: f64,
    c10: f64,
    c_bar: f64,
) -> Result<()> {
    let at = format!("c10={c10}, f_low={f}");
    let p1 = games.asked.solve(f)?;
    let p0 = games.unasked.solve(f)?;
    report.label(draw, &format!("clause 1 e=1 ({at})"), p1.label, ScheduleLabel::Separating);
    report.label(draw, &format!("clause 1 e=0 ({at})"), p0.label, ScheduleLabel::Pooling);
    let (d1, d0) = (p1.disclosure_rate(f), p0.disclosure_rate(f));
    report.greater(draw, &format!("clause 2 ({at})"), d1, d0);
    report.equal(draw, &format!("clause 2 rate e=1 ({at})"), d1, 1.0 - f);
    report.equal(draw, &format!("clause 2 rate e=0 ({at})"), d0, 0.0);
    report.greater(draw, &format!("clause 3 ({at})"), p1.wage[1], p0.wage[1]);
    if c10 < c_bar {
        report.greater(draw, &format!("clause 4 ({at})"), p0.wage[0], p1.wage[0]);
    } else {
        report.greater(draw, &format!("clause 4 reversed ({at})"), p1.wage[0], p0.wage[0]);
    }
    Ok(())
}

/// Second proposition for one base configuration: interior clauses over a
/// `(c10, f_low)` grid, then the complementary regimes, then the location
/// of the low-earner sign flip in `c10`.
pub fn check_prop2(base: &BaseParams, grid: &Prop2Grid) -> Result<PropositionReport> {
    let mut report = PropositionReport::new(2);
    let mut draw = 0;
    prop2_into(&mut report, &mut draw, base, grid, 0)?;
    report.parameter_draws = draw;
    Ok(report.finish())
}

/// Quantities are tagged with `config`; every evaluated point advances `draw`.
fn prop2_into(
    report: &mut PropositionReport,
    draw: &mut usize,
    base: &BaseParams,
    grid: &Prop2Grid,
    config: usize,
) -> Result<()> {
    base.validate()?;
    let c_bar = base.c_bar()?;
    report.quantity(config, "c_bar", c_bar);
    let c_top = c_bar.min(base.c11);

    let mut point = |report: &mut PropositionReport, c10: f64, f: f64, kind: u8| -> Result<()> {
        let games = Prop2Games::new(base, c10)?;
        if !games.feasible(f)? {
            report.flags.push(format!("config {config}: menu infeasible at c10={c10}, f_low={f}"));
            return Ok(());
        }
        let d = *draw;
        *draw += 1;
        match kind {
            0 => prop2_interior(report, d, &games, f, c10, c_bar),
            _ => {
                let at = format!("c10={c10}, f_low={f}");
                let p1 = games.asked.solve(f)?;
                let p0 = games.unasked.solve(f)?;
                let want = if kind == 1 { ScheduleLabel::Pooling } else { ScheduleLabel::Separating };
                let name = if kind == 1 { "regime f below f_tilde_1" } else { "regime f above f_tilde_0" };
                report.label(d, &format!("{name} e=1 ({at})"), p1.label, want);
                report.label(d, &format!("{name} e=0 ({at})"), p0.label, want);
                report.equal(d, &format!("{name} disclosure ({at})"), p1.disclosure_rate(f), p0.disclosure_rate(f));
                Ok(())
            }
        }
    };

    for &c10 in &interior(base.c00, c_top, grid.c10_points) {
        let (t1, t0) = Prop2Games::new(base, c10)?.thresholds()?;
        if !(t1 < t0) {
            report.flags.push(format!("config {config}: empty threshold interval at c10={c10}"));
            continue;
        }
        for &f in &interior(t1, t0, grid.f_points) {
            point(report, c10, f, 0)?;
        }
        for &f in &interior(0.0, t1, grid.regime_points) {
            point(report, c10, f, 1)?;
        }
        for &f in &interior(t0, 1.0, grid.regime_points) {
            point(report, c10, f, 2)?;
        }
    }
    if base.c11 > c_bar {
        for &c10 in &interior(c_bar, base.c11, grid.regime_points) {
            let (t1, t0) = Prop2Games::new(base, c10)?.thresholds()?;
            point(report, c10, 0.5 * (t1 + t0), 0)?;
        }
        let gap = |c10: f64| Prop2Games::new(base, c10).and_then(|g| g.low_wage_gap()).unwrap_or(f64::NAN);
        // at c10 = c00 the two games coincide, so stay strictly inside
        let lo = base.c00 + 1e-3 * (c_bar - base.c00);
        let hi = base.c11 - 1e-3 * (base.c11 - c_bar);
        if gap(lo) < 0.0 && gap(hi) > 0.0 {
            report.quantity(config, "c_bar_sign_flip", bisect(lo, hi, ROOT_TOL, gap));
        } else {
            report.flags.push(format!("config {config}: low-earner wage gap does not change sign in c10"));
        }
    } else {
        report.flags.push(format!(
            "config {config}: c11 = {} does not exceed c_bar = {c_bar}; no sign flip to locate",
            base.c11
        ));
    }
    Ok(())
}

/// Second proposition over a set of base configurations.
pub fn check_prop2_many(bases: &[BaseParams], grid: &Prop2Grid) -> Result<PropositionReport> {
    let mut report = PropositionReport::new(2);
    let mut draw = 0;
    for (config, base) in bases.iter().enumerate() {
        prop2_into(&mut report, &mut draw, base, grid, config)?;
    }
    report.parameter_draws = draw;
    Ok(report.finish())
}

/// Grid sizes for [`check_prop3`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Prop3Grid {
    pub c10_points: usize,
    pub f_points: usize,
}

impl Default for Prop3Grid {
    fn default() -> Self {
        Prop3Grid { c10_points: 5, f_points: 3 }
    }
}

/// Games faced by each gender when asked and when not asked.
struct GenderGames {
    female_asked: Game,
    male_asked: Game,
    unasked: Game,
}

impl GenderGames {
    fn new(base: &BaseParams, c10_female: f64) -> Result<Self> {
        Ok(GenderGames {
            female_asked: Game::new(base, base.c11, c10_female, Enquiry::Asked)?,
            male_asked: Game::new(base, base.c11, base.c10_male, Enquiry::Asked)?,
            unasked: Game::new(base, base.c11, base.c00, Enquiry::NotAsked)?,
        })
    }

    /// Asked-scenario mean wage gap (female minus male) with women under
    /// the separating menu and men under pooling.
    fn asked_gap(&self, f_female: f64, f_male: f64) -> Result<f64> {
        let fem = self.female_asked.play_menu(f_female, ScheduleLabel::Separating)?;
        let male = self.male_asked.play_menu(f_male, ScheduleLabel::Pooling)?;
        Ok(fem.mean_wage(f_female) - male.mean_wage(f_male))
    }

    /// Female low-earner share at which the asked gap closes.
    fn f_bar(&self) -> Result<Option<f64>> {
        let gap = |f: f64| self.asked_gap(f, 0.5).unwrap_or(f64::NAN);
        let (lo, hi) = (1e-12, 1.0 - 1e-12);
        if gap(lo) > 0.0 && gap(hi) < 0.0 {
            Ok(Some(bisect(lo, hi, ROOT_TOL, gap)))
        } else {
            Ok(None)
        }
    }
}

/// Derived thresholds of the third proposition for a given women's refusal
/// cost.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prop3Bounds {
    pub f_tilde_1m: f64,
    pub f_bar: f64,
    pub f_tilde_0f: f64,
}

pub fn prop3_bounds(base: &BaseParams, c10_female: f64) -> Result<Option<Prop3Bounds>> {
    let games = GenderGames::new(base, c10_female)?;
    let f_tilde_1m = games.male_asked.threshold()?;
    let f_tilde_0f = games.unasked.threshold()?;
    Ok(games.f_bar()?.map(|f_bar| Prop3Bounds { f_tilde_1m, f_bar, f_tilde_0f }))
}

/// Upper bound on the women's refusal cost: the smaller of the cost where
/// `f_bar` reaches `f_tilde_0F`, `c_bar`, and `c11`.
pub fn c_low_female(base: &BaseParams) -> Result<f64> {
    let cap = base.c_bar()?.min(base.c11);
    let slack = |c: f64| {
        prop3_bounds(base, c)
            .ok()
            .flatten()
            .map(|b| b.f_bar - b.f_tilde_0f)
            .unwrap_or(f64::NAN)
    };
    let (lo, hi) = (base.c10_male, cap - 1e-12);
    if slack(hi) <= 0.0 {
        return Ok(cap);
    }
    Ok(bisect(lo, hi, ROOT_TOL, slack))
}

fn prop3_point(
    report: &mut PropositionReport,
    draw: usize,
    games: &GenderGames,
    f_female: f64,
    f_male: f64,
    c10_female: f64,
) -> Result<()> {
    let at = format!("c10_F={c10_female}, f_low_F={f_female}, f_low_M={f_male}");
    let f1 = games.female_asked.solve(f_female)?;
    let m1 = games.male_asked.solve(f_male)?;
    let f0 = games.unasked.solve(f_female)?;
    let m0 = games.unasked.solve(f_male)?;
    report.label(draw, &format!("clause 1 female e=1 ({at})"), f1.label, ScheduleLabel::Separating);
    report.label(draw, &format!("clause 1 male e=1 ({at})"), m1.label, ScheduleLabel::Pooling);
    report.label(draw, &format!("clause 1 female e=0 ({at})"), f0.label, ScheduleLabel::Pooling);
    report.label(draw, &format!("clause 1 male e=0 ({at})"), m0.label, ScheduleLabel::Pooling);

    let (df1, dm1) = (f1.disclosure_rate(f_female), m1.disclosure_rate(f_male));
    let (df0, dm0) = (f0.disclosure_rate(f_female), m0.disclosure_rate(f_male));
    report.greater(draw, &format!("clause 2 ({at})"), df1, dm1);
    let (asked, unasked) = (0.5 * (df1 + dm1), 0.5 * (df0 + dm0));
    report.greater(draw, &format!("clause 3 ({at})"), asked, unasked);
    report.equal(draw, &format!("clause 3 unasked rate ({at})"), unasked, 0.0);

    report.greater(draw, &format!("clause 4 female ({at})"), f0.wage[0], f1.wage[0]);
    report.greater(draw, &format!("clause 4 male ({at})"), m1.wage[0], m0.wage[0]);
    report.greater(draw, &format!("clause 5 female ({at})"), f1.wage[1], f0.wage[1]);
    report.greater(draw, &format!("clause 5 male ({at})"), m1.wage[1], m0.wage[1]);

    let gap1 = f1.mean_wage(f_female) - m1.mean_wage(f_male);
    let gap0 = f0.mean_wage(f_female) - m0.mean_wage(f_male);
    report.greater(draw, &format!("clause 6 ({at})"), gap0, gap1);
    // both genders face the same unasked pooling wage
    if f0.wage != m0.wage || gap0 != 0.0 {
        report.violate(draw, format!("unasked gap not exactly zero ({at}): {gap0}"));
    }
    Ok(())
}

/// Third proposition for one base configuration, scanning the women's
/// refusal cost over `(c10_male, c_low_F)` and both low-earner shares over
/// their admissible intervals.
pub fn check_prop3(base: &BaseParams, grid: &Prop3Grid) -> Result<PropositionReport> {
    base.validate()?;
    let mut report = PropositionReport::new(3);
    let c_low = c_low_female(base)?;
    report.quantity(0, "c_low_F", c_low);
    if !(c_low > base.c10_male) {
        report.flags.push(format!("ordering unsatisfiable: c_low_F = {c_low} <= c10_male = {}", base.c10_male));
        return Ok(report.finish());
    }
    let mut draw = 0;
    for &c10f in &interior(base.c10_male, c_low, grid.c10_points) {
        let games = GenderGames::new(base, c10f)?;
        let Some(bounds) = prop3_bounds(base, c10f)? else {
            report.flags.push(format!("no f_bar root at c10_F={c10f}"));
            continue;
        };
        report.quantity(draw, "f_tilde_1M", bounds.f_tilde_1m);
        report.quantity(draw, "f_bar", bounds.f_bar);
        report.quantity(draw, "f_tilde_0F", bounds.f_tilde_0f);
        if !(bounds.f_tilde_1m < bounds.f_bar && bounds.f_bar < bounds.f_tilde_0f) {
            report.flags.push(format!("ordering unsatisfiable at c10_F={c10f}: {bounds:?}"));
            continue;
        }
        for &fm in &interior(0.0, bounds.f_tilde_1m, grid.f_points) {
            for &ff in &interior(bounds.f_bar, bounds.f_tilde_0f, grid.f_points) {
                let feasible = games.female_asked.interior_feasible(ff)?
                    && games.male_asked.interior_feasible(fm)?
                    && games.unasked.interior_feasible(ff)?
                    && games.unasked.interior_feasible(fm)?;
                if !feasible {
                    report.flags.push(format!("menu infeasible at c10_F={c10f}, f_low_F={ff}, f_low_M={fm}"));
                    continue;
                }
                prop3_point(&mut report, draw, &games, ff, fm, c10f)?;
                draw += 1;
            }
        }
    }
    report.parameter_draws = draw;
    Ok(report.finish())
}

/// One cell of the existence scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExistenceCell {
    #[serde(rename = "f_low_F")]
    pub f_low_female: f64,
    #[serde(rename = "f_low_M")]
    pub f_low_male: f64,
    pub observations_met: [bool; 6],
}

impl ExistenceCell {
    pub fn all_six(&self) -> bool {
        self.observations_met.iter().all(|&b| b)
    }
}

/// Observation flags per cell of an `(f_low_F, f_low_M)` sweep. Flagged
/// cells report no observation as met.
pub fn existence_from_grid(grid: &MetricGrid) -> Vec<ExistenceCell> {
    grid.cells
        .iter()
        .map(|cell| ExistenceCell {
            f_low_female: cell.x,
            f_low_male: cell.y,
            observations_met: match &cell.result {
                CellResult::Metrics(m) => m.observations.0,
                CellResult::Flagged(_) => [false; 6],
            },
        })
        .collect()
}

pub fn find_existence_region(
    template: &PopulationSpec,
    f_female: &[f64],
    f_male: &[f64],
    master_seed: u64,
) -> Result<Vec<ExistenceCell>> {
    Ok(existence_from_grid(&sweep_fl_grid(template, f_female, f_male, master_seed)?))
}
