//! Orchestration: runs one configured mode and writes its artifacts.
//!
//! Every data file (CSV, JSON) depends only on the resolved configuration,
//! so re-running a manifest reproduces it byte for byte at any thread count.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use flate2::write::GzEncoder;
use flate2::Compression;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::config::{ConfigError, Mode, RunConfig};
use crate::continuous::{run_continuous_pair, run_skew_cell, ContinuousDraw, ContinuousSpec, AXIS_MU_F, AXIS_MU_M};
use crate::econ::{
    best_response_to_offers, candidate_menus, solve_with_prior, threshold_f, MatchState, WageType, WorkerOutcome,
};
use crate::heatmap::render_heatmap;
use crate::metrics::{
    build_grid_cells, cell_seed, Axis, CellResult, GridCell, MetricField, MetricGrid, Stage,
};
use crate::population::{
    run_corr_cell, run_fl_cell, run_scenario_pair, PopulationSpec, WorkerDraw, AXIS_F_LOW_F, AXIS_F_LOW_M,
    AXIS_RHO_F, AXIS_RHO_M,
};
use crate::theory::{
    check_prop1_many, check_prop2_many, check_prop3, default_f_grid, existence_from_grid, sample_draws,
    sample_prop2_draws, PropositionReport,
};

/// Bumped whenever metrics.csv columns change.
pub const CSV_SCHEMA_VERSION: u32 = 1;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SHBSIM_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "shbsim-out";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] crate::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl HarnessError {
    /// Process exit code: 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            _ => 1,
        }
    }
}

type HResult<T> = std::result::Result<T, HarnessError>;

fn io<T>(path: &Path, r: std::io::Result<T>) -> HResult<T> {
    r.map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    /// Files written, relative to `out_dir`, in write order.
    pub files: Vec<PathBuf>,
    /// `Some` in check-props mode.
    pub checks_passed: Option<bool>,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        match self.checks_passed {
            Some(false) => 3,
            _ => 0,
        }
    }
}

/// Output directory: explicit choice, then the environment, then a fixed
/// default.
pub fn resolve_out_dir(explicit: Option<&Path>) -> PathBuf {
    match explicit {
        Some(p) => p.to_path_buf(),
        None => std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
    }
}

fn git_describe() -> String {
    std::process::Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".to_string())
}

struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn path(&mut self, rel: &str) -> HResult<PathBuf> {
        let p = self.dir.join(rel);
        if let Some(parent) = p.parent() {
            io(parent, fs::create_dir_all(parent))?;
        }
        self.files.push(PathBuf::from(rel));
        Ok(p)
    }

    fn bytes(&mut self, rel: &str, data: &[u8]) -> HResult<()> {
        let p = self.path(rel)?;
        io(&p, fs::write(&p, data))
    }

    fn json(&mut self, rel: &str, value: &impl Serialize) -> HResult<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.bytes(rel, s.as_bytes())
    }
}

/// Shortest round-trip decimal, or `NA`.
fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

/// Column names of metrics.csv for the given axis names.
pub fn metrics_header(x_name: &str, y_name: &str) -> Vec<String> {
    let mut h: Vec<String> =
        ["cell", "ix", "iy", x_name, y_name, "seed", "status"].iter().map(|s| s.to_string()).collect();
    for stage in Stage::ALL {
        for f in MetricField::ALL {
            h.push(format!("{}_{}", stage.name(), f.name()));
        }
    }
    h.extend((1..=6).map(|i| format!("obs{i}")));
    h.push("all_six".into());
    h.push("flag".into());
    h
}

/// One row per cell, in grid order.
pub fn metrics_csv(grid: &MetricGrid) -> HResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(metrics_header(&grid.x.name, &grid.y.name))?;
    for (k, cell) in grid.cells.iter().enumerate() {
        let mut row =
            vec![k.to_string(), cell.ix.to_string(), cell.iy.to_string(), cell.x.to_string(), cell.y.to_string()];
        row.push(cell.seed.to_string());
        match &cell.result {
            CellResult::Metrics(m) => {
                row.push("ok".into());
                for stage in Stage::ALL {
                    for f in MetricField::ALL {
                        row.push(fmt_opt(grid.value(cell, stage, f)));
                    }
                }
                row.extend(m.observations.0.iter().map(|b| b.to_string()));
                row.push(m.observations.all_six().to_string());
                row.push(String::new());
            }
            CellResult::Flagged(reason) => {
                row.push("flagged".into());
                row.extend(std::iter::repeat_n("NA".to_string(), 3 * MetricField::ALL.len() + 7));
                row.push(reason.clone());
            }
        }
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| HarnessError::Io { path: PathBuf::from("metrics.csv"), source: e.into_error() })
}

fn gzip(data: &[u8]) -> HResult<Vec<u8>> {
    // mtime stays zero, so the archive is reproducible
    let mut enc = GzEncoder::new(Vec::new(), Compression::default());
    io(Path::new("<gzip>"), enc.write_all(data))?;
    io(Path::new("<gzip>"), enc.finish())
}

fn outcome_fields(o: &Option<WorkerOutcome>, w: f64) -> [String; 3] {
    match o {
        Some(o) => [o.disclosed.to_string(), o.accepted.to_string(), o.realized_wage(w).to_string()],
        None => ["NA".into(), "NA".into(), "NA".into()],
    }
}

pub fn population_workers_csv(draws: &[WorkerDraw]) -> HResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "index", "gender", "wage_type", "w", "z", "c", "z_new", "asked", "c11", "c10", "c00", "prior_low", "label",
        "disclosed", "accepted", "w_new",
    ])?;
    for d in draws {
        let label = d.label.map_or_else(|| "NA".to_string(), |l| format!("{l:?}"));
        let wt = match d.wage_type {
            WageType::Low => "low",
            WageType::High => "high",
        };
        let [disc, acc, wn] = outcome_fields(&d.outcome, d.w);
        w.write_record([
            d.index.to_string(),
            d.gender.code().to_string(),
            wt.to_string(),
            d.w.to_string(),
            d.z.to_string(),
            d.c.to_string(),
            d.z_new.to_string(),
            d.e.is_asked().to_string(),
            d.costs.c11.to_string(),
            d.costs.c10.to_string(),
            d.costs.c00.to_string(),
            d.prior_low.to_string(),
            label,
            disc,
            acc,
            wn,
        ])?;
    }
    w.into_inner().map_err(|e| HarnessError::Io { path: PathBuf::from("workers.csv"), source: e.into_error() })
}

pub fn continuous_workers_csv(draws: &[ContinuousDraw]) -> HResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "index", "gender", "w", "z", "c", "z_new", "asked", "c_disclose", "c_withhold", "w_nondisclose", "cutoff",
        "disclosed", "accepted", "w_new",
    ])?;
    for d in draws {
        let [disc, acc, wn] = outcome_fields(&Some(d.outcome), d.w);
        w.write_record([
            d.index.to_string(),
            d.gender.code().to_string(),
            d.w.to_string(),
            d.z.to_string(),
            d.c.to_string(),
            d.z_new.to_string(),
            d.e.is_asked().to_string(),
            d.c_disclose.to_string(),
            d.c_withhold.to_string(),
            d.solution.w_nondisclose_opt.to_string(),
            d.solution.cutoff_w_star.to_string(),
            disc,
            acc,
            wn,
        ])?;
    }
    w.into_inner().map_err(|e| HarnessError::Io { path: PathBuf::from("workers.csv"), source: e.into_error() })
}

/// Per-cell cache under `<out>/cells`, keyed by the resolved config.
struct CellCache {
    dir: PathBuf,
    resume: bool,
}

impl CellCache {
    fn open(out: &Path, cfg: &RunConfig, resume: bool) -> HResult<Self> {
        let dir = out.join("cells");
        io(&dir, fs::create_dir_all(&dir))?;
        let fp_path = dir.join("config.json");
        let fingerprint = serde_json::to_string_pretty(cfg)?;
        let same = fs::read_to_string(&fp_path).is_ok_and(|s| s == fingerprint);
        if !same {
            // stale cells from another configuration must not be reused
            for entry in io(&dir, fs::read_dir(&dir))? {
                let p = io(&dir, entry)?.path();
                if p.extension().is_some_and(|x| x == "json") {
                    io(&p, fs::remove_file(&p))?;
                }
            }
            io(&fp_path, fs::write(&fp_path, &fingerprint))?;
        }
        Ok(CellCache { dir, resume: resume && same })
    }

    fn get_or(
        &self,
        ix: usize,
        iy: usize,
        x: f64,
        y: f64,
        seed: u64,
        compute: impl FnOnce() -> crate::Result<CellResult>,
    ) -> HResult<GridCell> {
        let path = self.dir.join(format!("cell_{ix:03}_{iy:03}.json"));
        if self.resume {
            if let Some(c) = fs::read_to_string(&path).ok().and_then(|s| serde_json::from_str::<GridCell>(&s).ok()) {
                if (c.ix, c.iy, c.x, c.y, c.seed) == (ix, iy, x, y, seed) {
                    return Ok(c);
                }
            }
        }
        let cell = GridCell { ix, iy, x, y, seed, result: compute()? };
        io(&path, fs::write(&path, serde_json::to_string(&cell)?))?;
        Ok(cell)
    }
}

fn sweep(
    cache: &CellCache,
    x: Axis,
    y: Axis,
    seed: u64,
    cell: impl Fn(f64, f64, u64) -> crate::Result<CellResult> + Sync,
) -> HResult<MetricGrid> {
    let first_err = std::sync::Mutex::new(None);
    let grid = build_grid_cells(x, y, seed, |ix, iy, xv, yv, s| {
        cache.get_or(ix, iy, xv, yv, s, || cell(xv, yv, s)).map_err(|e| {
            let msg = e.to_string();
            first_err.lock().expect("poisoned").get_or_insert(e);
            crate::Error::Grid(msg)
        })
    });
    if let Some(e) = first_err.into_inner().expect("poisoned") {
        return Err(e);
    }
    Ok(grid?)
}

fn emit_grid(w: &mut Writer, grid: &MetricGrid) -> HResult<()> {
    w.bytes("metrics.csv", &metrics_csv(grid)?)?;
    for stage in Stage::ALL {
        for f in MetricField::ALL {
            let svg = render_heatmap(grid, stage, f)?;
            w.bytes(&format!("heatmaps/{}_{}.svg", stage.name(), f.name()), svg.as_bytes())?;
        }
    }
    Ok(())
}

fn emit_population_workers(w: &mut Writer, spec: &PopulationSpec) -> HResult<()> {
    let pair = run_scenario_pair(spec)?;
    w.bytes("workers_pre.csv.gz", &gzip(&population_workers_csv(&pair.pre)?)?)?;
    w.bytes("workers_post.csv.gz", &gzip(&population_workers_csv(&pair.post)?)?)
}

/// Fixes the seeds of the per-module specs to the master seed.
pub fn resolve(cfg: &RunConfig) -> RunConfig {
    let mut r = cfg.clone();
    r.population.seed = r.seed;
    r.continuous.seed = r.seed;
    r
}

/// Runs the configured mode, writing into `out`. `resume` reuses per-cell
/// results of an interrupted sweep with the same configuration.
pub fn run(cfg: &RunConfig, out: &Path, resume: bool) -> HResult<RunSummary> {
    cfg.validate().map_err(|(section, message)| ConfigError {
        source: "config".into(),
        line: None,
        column: None,
        message: format!("[{section}] {message}"),
    })?;
    let cfg = resolve(cfg);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build()?;
    io(out, fs::create_dir_all(out))?;
    pool.install(|| run_in_pool(&cfg, out, resume))
}

fn run_in_pool(cfg: &RunConfig, out: &Path, resume: bool) -> HResult<RunSummary> {
    let mut w = Writer { dir: out.to_path_buf(), files: Vec::new() };
    let mut checks_passed = None;
    let seed = cfg.seed;
    match cfg.mode {
        Mode::TwoType => two_type(&mut w, cfg)?,
        Mode::CheckProps => {
            let reports = check_props(cfg)?;
            checks_passed = Some(reports.iter().all(|r| r.passed));
            w.json("propositions.json", &reports)?;
        }
        Mode::SweepFl => {
            let cache = CellCache::open(out, cfg, resume)?;
            let g = &cfg.sweep_fl;
            let template = &cfg.population;
            let grid = sweep(
                &cache,
                Axis::new(AXIS_F_LOW_F, &g.female.values())?,
                Axis::new(AXIS_F_LOW_M, &g.male.values())?,
                seed,
                |x, y, s| run_fl_cell(template, x, y, s),
            )?;
            emit_grid(&mut w, &grid)?;
            w.json("existence.json", &existence_from_grid(&grid))?;
            if cfg.write_workers {
                emit_population_workers(&mut w, template)?;
            }
        }
        Mode::SweepCorr => {
            let cache = CellCache::open(out, cfg, resume)?;
            let g = &cfg.sweep_corr;
            let template = &cfg.population;
            let grid = sweep(
                &cache,
                Axis::new(AXIS_RHO_F, &g.female.values())?,
                Axis::new(AXIS_RHO_M, &g.male.values())?,
                seed,
                |x, y, s| run_corr_cell(template, x, y, s),
            )?;
            emit_grid(&mut w, &grid)?;
            if cfg.write_workers {
                emit_population_workers(&mut w, template)?;
            }
        }
        Mode::SweepSkew => {
            let cache = CellCache::open(out, cfg, resume)?;
            let sk = &cfg.sweep_skew;
            let template = &cfg.continuous;
            let grid = sweep(
                &cache,
                Axis::new(AXIS_MU_F, &sk.female.values())?,
                Axis::new(AXIS_MU_M, &sk.male.values())?,
                seed,
                |x, y, s| run_skew_cell(template, &sk.family, x, y, s),
            )?;
            emit_grid(&mut w, &grid)?;
        }
        Mode::ContinuousRun => continuous_run(&mut w, &cfg.continuous, cfg.write_workers)?,
    }
    let manifest = json!({
        "tool": "shbsim",
        "version": env!("CARGO_PKG_VERSION"),
        "git_describe": git_describe(),
        "csv_schema": CSV_SCHEMA_VERSION,
        "mode": cfg.mode.name(),
        "seed": seed,
        "config": cfg,
        "outputs": w.files.clone(),
    });
    w.json("manifest.json", &manifest)?;
    Ok(RunSummary { out_dir: out.to_path_buf(), files: w.files, checks_passed })
}

fn two_type(w: &mut Writer, cfg: &RunConfig) -> HResult<()> {
    let t = &cfg.two_type;
    let b = &t.base;
    let (prefs, env) = (b.prefs(), b.env()?);
    let c0 = if t.enquiry.is_asked() { b.c10 } else { b.c00 };
    let threshold = threshold_f(&prefs, &env, b.c11, c0)?;
    let menus = candidate_menus(&prefs, &env, t.f_low, b.c11, c0)?;
    let best = solve_with_prior(&prefs, &env, t.f_low, b.c11, c0)?;
    let respond = |wt: WageType| -> crate::Result<WorkerOutcome> {
        let m = MatchState { w: env.wage(wt), z: env.z, c: env.c, z_new: env.z_new, e: t.enquiry };
        best_response_to_offers(&prefs, &m, b.c11, c0, best.schedule.w_nondisclose, best.schedule.disclosure_offer(wt))
    };
    let doc = json!({
        "params": b,
        "f_low": t.f_low,
        "enquiry": t.enquiry,
        "threshold": threshold,
        "schedule": best.schedule,
        "expected_profit": best.profit,
        "candidates": menus,
        "responses": { "low": respond(WageType::Low)?, "high": respond(WageType::High)? },
    });
    w.json("two_type.json", &doc)
}

/// The three proposition reports for the `props` section. The first two
/// add random configurations to the base; the third checks the base only.
pub fn check_props(cfg: &RunConfig) -> crate::Result<Vec<PropositionReport>> {
    let p = &cfg.props;
    let f_grid = default_f_grid(p.f_grid_points);
    let mut bases1 = vec![p.base];
    bases1.extend(sample_draws(&p.ranges, p.prop1_draws, cell_seed(cfg.seed, 1))?);
    let mut bases2 = vec![p.base];
    bases2.extend(sample_prop2_draws(&p.ranges, p.prop2_draws, cell_seed(cfg.seed, 2))?);
    Ok(vec![
        check_prop1_many(&bases1, &f_grid)?,
        check_prop2_many(&bases2, &p.prop2_grid)?,
        check_prop3(&p.base, &p.prop3_grid)?,
    ])
}

fn continuous_run(w: &mut Writer, spec: &ContinuousSpec, workers: bool) -> HResult<()> {
    let pair = run_continuous_pair(spec)?;
    let m = pair.metrics()?;
    let grid = MetricGrid {
        x: Axis::new(AXIS_MU_F, &[spec.prior.female.skewness()])?,
        y: Axis::new(AXIS_MU_M, &[spec.prior.male.skewness()])?,
        cells: vec![GridCell {
            ix: 0,
            iy: 0,
            x: spec.prior.female.skewness(),
            y: spec.prior.male.skewness(),
            seed: spec.seed,
            result: CellResult::Metrics(m.clone()),
        }],
    };
    emit_grid(w, &grid)?;
    // one screening solution per (scenario, gender, enquiry) group
    let mut solutions = Vec::new();
    for (scenario, draws) in [("pre", &pair.pre), ("post", &pair.post)] {
        let mut seen = std::collections::BTreeSet::new();
        for d in draws.iter() {
            let key = (d.gender, d.e.is_asked());
            if seen.insert(key) {
                solutions.push(json!({
                    "scenario": scenario,
                    "gender": d.gender,
                    "asked": d.e.is_asked(),
                    "example_worker": d.index,
                    "solution": d.solution,
                }));
            }
        }
    }
    w.json("continuous.json", &json!({ "metrics": m, "example_solutions": solutions }))?;
    if workers {
        w.bytes("workers_pre.csv.gz", &gzip(&continuous_workers_csv(&pair.pre)?)?)?;
        w.bytes("workers_post.csv.gz", &gzip(&continuous_workers_csv(&pair.post)?)?)?;
    }
    Ok(())
}
