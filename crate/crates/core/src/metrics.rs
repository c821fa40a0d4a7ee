//! Population estimands: disclosure rates, wage levels, gaps, dispersion and
//! wage persistence, plus the six pre/post observations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::econ::WorkerOutcome;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Female,
    Male,
}

impl Gender {
    pub const BOTH: [Gender; 2] = [Gender::Female, Gender::Male];

    pub fn code(self) -> &'static str {
        match self {
            Gender::Female => "F",
            Gender::Male => "M",
        }
    }
}

/// A value per gender.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ByGender<T> {
    pub female: T,
    pub male: T,
}

impl<T> ByGender<T> {
    pub fn new(female: T, male: T) -> Self {
        ByGender { female, male }
    }

    pub fn get(&self, g: Gender) -> &T {
        match g {
            Gender::Female => &self.female,
            Gender::Male => &self.male,
        }
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> ByGender<U> {
        ByGender { female: f(&self.female), male: f(&self.male) }
    }
}

impl<T: Clone> ByGender<T> {
    pub fn both(v: T) -> Self {
        ByGender { female: v.clone(), male: v }
    }
}

/// What the metrics need to know about one simulated worker.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub gender: Gender,
    pub asked: bool,
    pub w_initial: f64,
    pub outcome: WorkerOutcome,
}

impl OutcomeRecord {
    pub fn wage_new(&self) -> f64 {
        self.outcome.realized_wage(self.w_initial)
    }
}

/// A proportion with its denominator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rate {
    pub hits: u64,
    pub total: u64,
}

impl Rate {
    fn add(&mut self, hit: bool) {
        self.total += 1;
        self.hits += hit as u64;
    }

    pub fn value(&self) -> Option<f64> {
        (self.total > 0).then(|| self.hits as f64 / self.total as f64)
    }
}

/// A summary statistic with the number of observations behind it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub value: Option<f64>,
    pub n: u64,
}

#[derive(Default)]
struct MeanAcc {
    sum: f64,
    n: u64,
}

impl MeanAcc {
    fn add(&mut self, x: f64) {
        self.sum += x;
        self.n += 1;
    }

    fn stat(&self) -> Stat {
        Stat { value: (self.n > 0).then(|| self.sum / self.n as f64), n: self.n }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioMetrics {
    pub n_workers: u64,
    pub disclosure: Rate,
    pub disclosure_female: Rate,
    pub disclosure_male: Rate,
    pub disclosure_asked: Rate,
    pub disclosure_not_asked: Rate,
    pub disclosure_asked_female: Rate,
    pub disclosure_asked_male: Rate,
    /// Split at the own-gender median initial wage.
    pub disclosure_above_median: Rate,
    pub disclosure_below_median: Rate,
    pub acceptance_female: Rate,
    pub acceptance_male: Rate,
    pub mean_log_wage_female: Stat,
    pub mean_log_wage_male: Stat,
    pub mean_wage: Stat,
    pub mean_wage_female: Stat,
    pub mean_wage_male: Stat,
    pub mean_wage_above_median: Stat,
    pub mean_wage_below_median: Stat,
    /// Population standard deviation of period-2 wages.
    pub sd_wages: Stat,
    /// Pearson correlation of initial and new wage among acceptors.
    pub corr_w_wnew: Stat,
}

/// Scalar fields of [`ScenarioMetrics`], in CSV column order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MetricField {
    Disclosure,
    DisclosureFemale,
    DisclosureMale,
    DisclosureGenderGap,
    DisclosureAsked,
    DisclosureNotAsked,
    DisclosureAskGap,
    DisclosureAskedFemale,
    DisclosureAskedMale,
    DisclosureAboveMedian,
    DisclosureBelowMedian,
    AcceptanceFemale,
    AcceptanceMale,
    MeanLogWageFemale,
    MeanLogWageMale,
    FemalePremium,
    MeanWage,
    MeanWageFemale,
    MeanWageMale,
    FemaleWageGapLevel,
    MeanWageAboveMedian,
    MeanWageBelowMedian,
    SdWages,
    CorrWWnew,
}

impl MetricField {
    pub const ALL: [MetricField; 24] = [
        MetricField::Disclosure,
        MetricField::DisclosureFemale,
        MetricField::DisclosureMale,
        MetricField::DisclosureGenderGap,
        MetricField::DisclosureAsked,
        MetricField::DisclosureNotAsked,
        MetricField::DisclosureAskGap,
        MetricField::DisclosureAskedFemale,
        MetricField::DisclosureAskedMale,
        MetricField::DisclosureAboveMedian,
        MetricField::DisclosureBelowMedian,
        MetricField::AcceptanceFemale,
        MetricField::AcceptanceMale,
        MetricField::MeanLogWageFemale,
        MetricField::MeanLogWageMale,
        MetricField::FemalePremium,
        MetricField::MeanWage,
        MetricField::MeanWageFemale,
        MetricField::MeanWageMale,
        MetricField::FemaleWageGapLevel,
        MetricField::MeanWageAboveMedian,
        MetricField::MeanWageBelowMedian,
        MetricField::SdWages,
        MetricField::CorrWWnew,
    ];

    pub fn name(self) -> &'static str {
        use MetricField::*;
        match self {
            Disclosure => "disclosure",
            DisclosureFemale => "disclosure_female",
            DisclosureMale => "disclosure_male",
            DisclosureGenderGap => "disclosure_gender_gap",
            DisclosureAsked => "disclosure_asked",
            DisclosureNotAsked => "disclosure_not_asked",
            DisclosureAskGap => "disclosure_ask_gap",
            DisclosureAskedFemale => "disclosure_asked_female",
            DisclosureAskedMale => "disclosure_asked_male",
            DisclosureAboveMedian => "disclosure_above_median",
            DisclosureBelowMedian => "disclosure_below_median",
            AcceptanceFemale => "acceptance_female",
            AcceptanceMale => "acceptance_male",
            MeanLogWageFemale => "mean_log_wage_female",
            MeanLogWageMale => "mean_log_wage_male",
            FemalePremium => "female_premium",
            MeanWage => "mean_wage",
            MeanWageFemale => "mean_wage_female",
            MeanWageMale => "mean_wage_male",
            FemaleWageGapLevel => "female_wage_gap_level",
            MeanWageAboveMedian => "mean_wage_above_median",
            MeanWageBelowMedian => "mean_wage_below_median",
            SdWages => "sd_wages",
            CorrWWnew => "corr_w_wnew",
        }
    }

    pub fn from_name(name: &str) -> Option<MetricField> {
        Self::ALL.iter().copied().find(|f| f.name() == name)
    }
}

fn diff(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    Some(a? - b?)
}

impl ScenarioMetrics {
    pub fn get(&self, field: MetricField) -> Option<f64> {
        use MetricField::*;
        match field {
            Disclosure => self.disclosure.value(),
            DisclosureFemale => self.disclosure_female.value(),
            DisclosureMale => self.disclosure_male.value(),
            DisclosureGenderGap => diff(self.disclosure_female.value(), self.disclosure_male.value()),
            DisclosureAsked => self.disclosure_asked.value(),
            DisclosureNotAsked => self.disclosure_not_asked.value(),
            DisclosureAskGap => diff(self.disclosure_asked.value(), self.disclosure_not_asked.value()),
            DisclosureAskedFemale => self.disclosure_asked_female.value(),
            DisclosureAskedMale => self.disclosure_asked_male.value(),
            DisclosureAboveMedian => self.disclosure_above_median.value(),
            DisclosureBelowMedian => self.disclosure_below_median.value(),
            AcceptanceFemale => self.acceptance_female.value(),
            AcceptanceMale => self.acceptance_male.value(),
            MeanLogWageFemale => self.mean_log_wage_female.value,
            MeanLogWageMale => self.mean_log_wage_male.value,
            FemalePremium => diff(self.mean_log_wage_female.value, self.mean_log_wage_male.value),
            MeanWage => self.mean_wage.value,
            MeanWageFemale => self.mean_wage_female.value,
            MeanWageMale => self.mean_wage_male.value,
            FemaleWageGapLevel => diff(self.mean_wage_female.value, self.mean_wage_male.value),
            MeanWageAboveMedian => self.mean_wage_above_median.value,
            MeanWageBelowMedian => self.mean_wage_below_median.value,
            SdWages => self.sd_wages.value,
            CorrWWnew => self.corr_w_wnew.value,
        }
    }

    pub fn female_premium(&self) -> Option<f64> {
        self.get(MetricField::FemalePremium)
    }
}

/// Elementwise `post - pre` over [`MetricField::ALL`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsDelta {
    pub values: Vec<Option<f64>>,
}

impl MetricsDelta {
    pub fn get(&self, field: MetricField) -> Option<f64> {
        let idx = MetricField::ALL.iter().position(|&f| f == field).expect("known field");
        self.values[idx]
    }
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

/// Upper-half membership: `w > median`, or `w >= median` when no wage
/// lies strictly above the median (two-point supports with ties).
fn upper_half_rule(wages: &[f64], m: f64) -> impl Fn(f64) -> bool {
    let strict_nonempty = wages.iter().any(|&w| w > m);
    move |w| if strict_nonempty { w > m } else { w >= m }
}

pub fn compute_metrics(records: &[OutcomeRecord]) -> Result<ScenarioMetrics> {
    if records.is_empty() {
        return Err(Error::InvalidParams("cannot compute metrics of an empty population".into()));
    }

    let mut upper_rule: Vec<Box<dyn Fn(f64) -> bool>> = Vec::new();
    for g in Gender::BOTH {
        let mut ws: Vec<f64> = records.iter().filter(|r| r.gender == g).map(|r| r.w_initial).collect();
        let m = median(&mut ws).unwrap_or(f64::INFINITY);
        upper_rule.push(Box::new(upper_half_rule(&ws, m)));
    }
    let is_upper = |r: &OutcomeRecord| match r.gender {
        Gender::Female => upper_rule[0](r.w_initial),
        Gender::Male => upper_rule[1](r.w_initial),
    };

    let mut disclosure = Rate::default();
    let mut by_gender = [Rate::default(); 2];
    let mut asked = Rate::default();
    let mut not_asked = Rate::default();
    let mut asked_by_gender = [Rate::default(); 2];
    let mut above = Rate::default();
    let mut below = Rate::default();
    let mut acceptance = [Rate::default(); 2];
    let mut log_wage = [MeanAcc::default(), MeanAcc::default()];
    let mut wage = MeanAcc::default();
    let mut wage_by_gender = [MeanAcc::default(), MeanAcc::default()];
    let mut wage_above = MeanAcc::default();
    let mut wage_below = MeanAcc::default();

    for r in records {
        let gi = r.gender as usize;
        let d = r.outcome.disclosed;
        let w_new = r.wage_new();
        disclosure.add(d);
        by_gender[gi].add(d);
        if r.asked {
            asked.add(d);
            asked_by_gender[gi].add(d);
        } else {
            not_asked.add(d);
        }
        acceptance[gi].add(r.outcome.accepted);
        log_wage[gi].add(w_new.ln());
        wage.add(w_new);
        wage_by_gender[gi].add(w_new);
        if is_upper(r) {
            above.add(d);
            wage_above.add(w_new);
        } else {
            below.add(d);
            wage_below.add(w_new);
        }
    }

    let mean_all = wage.stat();
    let sd_wages = {
        let mu = mean_all.value.expect("non-empty");
        let var = records.iter().map(|r| (r.wage_new() - mu).powi(2)).sum::<f64>() / records.len() as f64;
        Stat { value: Some(var.sqrt()), n: records.len() as u64 }
    };

    let corr_w_wnew = {
        let acc: Vec<(f64, f64)> = records
            .iter()
            .filter_map(|r| r.outcome.wage_new.map(|wn| (r.w_initial, wn)))
            .collect();
        Stat { value: pearson(&acc), n: acc.len() as u64 }
    };

    Ok(ScenarioMetrics {
        n_workers: records.len() as u64,
        disclosure,
        disclosure_female: by_gender[0],
        disclosure_male: by_gender[1],
        disclosure_asked: asked,
        disclosure_not_asked: not_asked,
        disclosure_asked_female: asked_by_gender[0],
        disclosure_asked_male: asked_by_gender[1],
        disclosure_above_median: above,
        disclosure_below_median: below,
        acceptance_female: acceptance[0],
        acceptance_male: acceptance[1],
        mean_log_wage_female: log_wage[0].stat(),
        mean_log_wage_male: log_wage[1].stat(),
        mean_wage: mean_all,
        mean_wage_female: wage_by_gender[0].stat(),
        mean_wage_male: wage_by_gender[1].stat(),
        mean_wage_above_median: wage_above.stat(),
        mean_wage_below_median: wage_below.stat(),
        sd_wages,
        corr_w_wnew,
    })
}

/// Pearson correlation; undefined for fewer than two points or zero variance.
pub fn pearson(pairs: &[(f64, f64)]) -> Option<f64> {
    if pairs.len() < 2 {
        return None;
    }
    let n = pairs.len() as f64;
    let (mx, my) = pairs.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (mx / n, my / n);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for &(x, y) in pairs {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    // relative guard against round-off variance in constant columns
    let tiny = |s: f64, m: f64| s <= 1e-24 * n * (1.0 + m * m);
    if tiny(sxx, mx) || tiny(syy, my) {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

pub fn diff_scenarios(pre: &ScenarioMetrics, post: &ScenarioMetrics) -> Result<MetricsDelta> {
    if pre.n_workers != post.n_workers {
        return Err(Error::Mismatch(format!(
            "pre has {} workers, post has {}",
            pre.n_workers, post.n_workers
        )));
    }
    Ok(MetricsDelta {
        values: MetricField::ALL.iter().map(|&f| diff(post.get(f), pre.get(f))).collect(),
    })
}

/// Margin for every strict inequality in the observation checks.
pub const OBSERVATION_TOL: f64 = 1e-9;

/// The six pre/post observations, in order:
/// 1. some workers withhold before the ban;
/// 2. disclosure is higher among asked than among not-asked workers;
/// 3. when asked, women disclose more than men;
/// 4. disclosure is higher above the median initial wage than below;
/// 5. the ban lowers overall disclosure;
/// 6. women earn less than men before the ban and the ban narrows the gap
///    (mean log wages).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observations(pub [bool; 6]);

impl Observations {
    pub fn evaluate(pre: &ScenarioMetrics, post: &ScenarioMetrics) -> Observations {
        let gt = |a: Option<f64>, b: Option<f64>| matches!((a, b), (Some(a), Some(b)) if a > b + OBSERVATION_TOL);
        use MetricField::*;
        let gap_pre = pre.get(FemalePremium);
        let gap_post = post.get(FemalePremium);
        Observations([
            gt(Some(1.0), pre.get(Disclosure)),
            gt(pre.get(DisclosureAsked), pre.get(DisclosureNotAsked)),
            gt(pre.get(DisclosureAskedFemale), pre.get(DisclosureAskedMale)),
            gt(pre.get(DisclosureAboveMedian), pre.get(DisclosureBelowMedian)),
            gt(pre.get(Disclosure), post.get(Disclosure)),
            gt(Some(0.0), gap_pre) && gt(gap_post, gap_pre),
        ])
    }

    pub fn all_six(&self) -> bool {
        self.0.iter().all(|&b| b)
    }
}

/// Pre and post metrics of one parameter cell with their difference.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellMetrics {
    pub pre: ScenarioMetrics,
    pub post: ScenarioMetrics,
    pub delta: MetricsDelta,
    pub observations: Observations,
}

impl CellMetrics {
    pub fn new(pre: ScenarioMetrics, post: ScenarioMetrics) -> Result<Self> {
        let delta = diff_scenarios(&pre, &post)?;
        let observations = Observations::evaluate(&pre, &post);
        Ok(CellMetrics { pre, post, delta, observations })
    }
}

/// A computed cell, or the reason it could not be computed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellResult {
    Metrics(CellMetrics),
    Flagged(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(name: &str, values: &[f64]) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Grid(format!("axis {name} needs at least one finite value")));
        }
        Ok(Axis { name: name.to_string(), values: values.to_vec() })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub ix: usize,
    pub iy: usize,
    pub x: f64,
    pub y: f64,
    pub seed: u64,
    pub result: CellResult,
}

impl GridCell {
    pub fn metrics(&self) -> Option<&CellMetrics> {
        match &self.result {
            CellResult::Metrics(m) => Some(m),
            CellResult::Flagged(_) => None,
        }
    }
}

/// Which of a cell's three metric sets a field is read from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stage {
    Pre,
    Post,
    Delta,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::Pre, Stage::Post, Stage::Delta];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Pre => "pre",
            Stage::Post => "post",
            Stage::Delta => "delta",
        }
    }
}

/// Cells stored row-major with `x` varying slowest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricGrid {
    pub x: Axis,
    pub y: Axis,
    pub cells: Vec<GridCell>,
}

impl MetricGrid {
    pub fn validate(&self) -> Result<()> {
        let (nx, ny) = (self.x.values.len(), self.y.values.len());
        if self.cells.len() != nx * ny {
            return Err(Error::Grid(format!("{} cells for a {nx}x{ny} grid", self.cells.len())));
        }
        for (k, c) in self.cells.iter().enumerate() {
            if (c.ix, c.iy) != (k / ny, k % ny) {
                return Err(Error::Grid(format!("cell {k} sits at ({}, {})", c.ix, c.iy)));
            }
        }
        Ok(())
    }

    pub fn cell(&self, ix: usize, iy: usize) -> &GridCell {
        &self.cells[ix * self.y.values.len() + iy]
    }

    pub fn value(&self, cell: &GridCell, stage: Stage, field: MetricField) -> Option<f64> {
        let m = cell.metrics()?;
        match stage {
            Stage::Pre => m.pre.get(field),
            Stage::Post => m.post.get(field),
            Stage::Delta => m.delta.get(field),
        }
    }
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of the cell at row-major position `index`.
pub fn cell_seed(master: u64, index: usize) -> u64 {
    master ^ splitmix64(index as u64)
}

/// Evaluates every cell in parallel. Results depend only on each cell's
/// position and seed, never on scheduling.
pub fn build_grid(
    x: Axis,
    y: Axis,
    master_seed: u64,
    cell: impl Fn(f64, f64, u64) -> Result<CellResult> + Sync,
) -> Result<MetricGrid> {
    build_grid_cells(x, y, master_seed, |ix, iy, xv, yv, seed| {
        Ok(GridCell { ix, iy, x: xv, y: yv, seed, result: cell(xv, yv, seed)? })
    })
}

/// Like [`build_grid`], but the callback produces the whole cell, so it can
/// serve it from a cache.
pub fn build_grid_cells(
    x: Axis,
    y: Axis,
    master_seed: u64,
    cell: impl Fn(usize, usize, f64, f64, u64) -> Result<GridCell> + Sync,
) -> Result<MetricGrid> {
    let ny = y.values.len();
    let n = x.values.len() * ny;
    let cells = (0..n)
        .into_par_iter()
        .map(|k| {
            let (ix, iy) = (k / ny, k % ny);
            cell(ix, iy, x.values[ix], y.values[iy], cell_seed(master_seed, k))
        })
        .collect::<Result<Vec<_>>>()?;
    let grid = MetricGrid { x, y, cells };
    grid.validate()?;
    Ok(grid)
}
