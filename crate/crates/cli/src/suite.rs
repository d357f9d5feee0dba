//! Seeded benchmark suites and result tables.
//!
//! A suite file lists (task, mode, trials, base_seed) entries; every trial
//! runs a synchronous episode seeded `base_seed + trial_index`, so a suite
//! is reproducible bit for bit. Completion statistics follow the
//! convention of reporting mean ± std over successful trials only, next
//! to a separate success count.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use hsmpc::log::write_jsonl;
use hsmpc::{
    run_episode, run_episode_flat, EpisodeOutcome, EpisodeResult, RolloutEngine, TaskConfig,
    TaskId, TimingStats,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerMode {
    Hierarchical,
    Flat,
}

impl fmt::Display for ControllerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ControllerMode::Hierarchical => "hierarchical",
            ControllerMode::Flat => "flat",
        })
    }
}

impl std::str::FromStr for ControllerMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hierarchical" | "hier" => Ok(ControllerMode::Hierarchical),
            "flat" => Ok(ControllerMode::Flat),
            other => Err(format!("unknown mode `{other}` (hier|flat)")),
        }
    }
}

/// Inline per-entry tweaks on top of the task's config file or defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EntryOverrides {
    pub time_limit: Option<f64>,
    pub samples: Option<usize>,
    pub elites: Option<usize>,
    pub knots: Option<usize>,
    pub noise_lo: Option<f64>,
    pub noise_hi: Option<f64>,
    pub goal: Option<[f64; 2]>,
    pub log_steps: Option<bool>,
    pub weights: BTreeMap<String, f64>,
}

impl EntryOverrides {
    pub fn apply(&self, cfg: &mut TaskConfig) {
        if let Some(v) = self.time_limit {
            cfg.episode.time_limit = v;
        }
        if let Some(v) = self.samples {
            cfg.cem.samples = v;
        }
        if let Some(v) = self.elites {
            cfg.cem.elites = v;
        }
        if let Some(v) = self.knots {
            cfg.spline.knots = v;
        }
        if let Some(v) = self.noise_lo {
            cfg.spline.noise_lo = v;
        }
        if let Some(v) = self.noise_hi {
            cfg.spline.noise_hi = v;
        }
        if let Some(v) = self.goal {
            cfg.episode.goal = v;
        }
        if let Some(v) = self.log_steps {
            cfg.episode.log_steps = v;
        }
        for (name, value) in &self.weights {
            cfg.cost.weights.insert(name.clone(), *value);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub task: TaskId,
    #[serde(default = "default_mode")]
    pub mode: ControllerMode,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// Optional per-task config file, resolved relative to the suite file.
    #[serde(default)]
    pub config: Option<PathBuf>,
    #[serde(default)]
    pub overrides: EntryOverrides,
}

fn default_mode() -> ControllerMode {
    ControllerMode::Hierarchical
}

fn default_trials() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSuite {
    pub entries: Vec<SuiteEntry>,
}

impl BenchmarkSuite {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        let mut suite: BenchmarkSuite = toml::from_str(&text)
            .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        // Per-task config paths are relative to the suite file.
        if let Some(dir) = path.parent() {
            for entry in &mut suite.entries {
                if let Some(cfg) = &entry.config {
                    if cfg.is_relative() {
                        entry.config = Some(dir.join(cfg));
                    }
                }
            }
        }
        if suite.entries.is_empty() {
            anyhow::bail!("{}: suite has no entries", path.display());
        }
        for e in &suite.entries {
            if e.trials == 0 {
                anyhow::bail!("{}: entry {} has zero trials", path.display(), e.task);
            }
        }
        Ok(suite)
    }
}

/// Quantize to 1e-6 so the fixed six-decimal CSV format round-trips the
/// in-memory value exactly.
fn q6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub task: String,
    pub mode: ControllerMode,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Mean completion time over successful trials (s); absent when none.
    pub mean_completion_s: Option<f64>,
    pub std_completion_s: Option<f64>,
    pub time_limit_s: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

const CSV_HEADER: &str =
    "task,mode,trials,successes,success_rate,mean_completion_s,std_completion_s,time_limit_s";

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or(String::new(), |v| format!("{v:.6}"))
}

impl ResultTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{:.6},{},{},{:.6}\n",
                r.task,
                r.mode,
                r.trials,
                r.successes,
                r.success_rate,
                fmt_opt(r.mean_completion_s),
                fmt_opt(r.std_completion_s),
                r.time_limit_s,
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> anyhow::Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| anyhow::anyhow!("empty CSV"))?;
        if header != CSV_HEADER {
            anyhow::bail!("unexpected CSV header: {header}");
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 8 {
                anyhow::bail!("line {}: expected 8 fields, got {}", i + 2, fields.len());
            }
            let parse_opt = |s: &str| -> anyhow::Result<Option<f64>> {
                if s.is_empty() {
                    Ok(None)
                } else {
                    Ok(Some(s.parse()?))
                }
            };
            rows.push(ResultRow {
                task: fields[0].to_owned(),
                mode: fields[1].parse().map_err(|e| anyhow::anyhow!("{e}"))?,
                trials: fields[2].parse()?,
                successes: fields[3].parse()?,
                success_rate: fields[4].parse()?,
                mean_completion_s: parse_opt(fields[5])?,
                std_completion_s: parse_opt(fields[6])?,
                time_limit_s: fields[7].parse()?,
            });
        }
        Ok(Self { rows })
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    /// Parallel trials; each episode itself runs serially.
    pub workers: usize,
    /// Override every entry's mode.
    pub mode: Option<ControllerMode>,
    /// Override every entry's base seed.
    pub seed: Option<u64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            out_dir: None,
            workers: 0,
            mode: None,
            seed: None,
        }
    }
}

pub fn entry_config(entry: &SuiteEntry) -> anyhow::Result<TaskConfig> {
    let mut cfg = match &entry.config {
        Some(path) => TaskConfig::load(path).map_err(|e| anyhow::anyhow!("{e}"))?,
        None => TaskConfig::for_task(entry.task),
    };
    cfg.task = entry.task;
    entry.overrides.apply(&mut cfg);
    Ok(cfg)
}

fn run_trial(cfg: &TaskConfig, mode: ControllerMode, seed: u64) -> hsmpc::Result<EpisodeResult> {
    // One serial engine per trial keeps trial-level parallelism
    // deterministic and the per-episode timing well defined.
    let engine = RolloutEngine::new(1);
    match mode {
        ControllerMode::Hierarchical => run_episode(cfg, &engine, seed),
        ControllerMode::Flat => run_episode_flat(cfg, &engine, seed),
    }
}

fn aggregate(entry_task: TaskId, mode: ControllerMode, cfg: &TaskConfig, episodes: &[EpisodeResult]) -> ResultRow {
    let trials = episodes.len();
    let successes: Vec<&EpisodeResult> = episodes
        .iter()
        .filter(|e| e.outcome == EpisodeOutcome::Success)
        .collect();
    let n_succ = successes.len();
    let (mean, std) = if n_succ > 0 {
        let mean = successes.iter().map(|e| e.completion_time).sum::<f64>() / n_succ as f64;
        let var = successes
            .iter()
            .map(|e| (e.completion_time - mean).powi(2))
            .sum::<f64>()
            / n_succ as f64;
        (Some(q6(mean)), Some(q6(var.sqrt())))
    } else {
        (None, None)
    };
    ResultRow {
        task: entry_task.as_str().to_owned(),
        mode,
        trials,
        successes: n_succ,
        success_rate: q6(n_succ as f64 / trials as f64),
        mean_completion_s: mean,
        std_completion_s: std,
        time_limit_s: q6(cfg.episode.time_limit),
    }
}

/// Run every entry of a suite and aggregate per-entry rows. Individual
/// episode failures count as non-success and never abort the suite.
pub fn run_benchmark(suite: &BenchmarkSuite, opts: &RunOptions) -> anyhow::Result<ResultTable> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| anyhow::anyhow!("thread pool: {e}"))?;

    if let Some(dir) = &opts.out_dir {
        fs::create_dir_all(dir.join("episodes"))?;
    }

    let mut table = ResultTable::default();
    let mut mode_timing: BTreeMap<String, Vec<TimingStats>> = BTreeMap::new();

    for entry in &suite.entries {
        let mode = opts.mode.unwrap_or(entry.mode);
        let base_seed = opts.seed.unwrap_or(entry.base_seed);
        let cfg = entry_config(entry)?;

        let episodes: Vec<EpisodeResult> = pool.install(|| {
            (0..entry.trials)
                .into_par_iter()
                .map(|i| {
                    let seed = base_seed + i as u64;
                    match run_trial(&cfg, mode, seed) {
                        Ok(ep) => ep,
                        Err(e) => {
                            // Planner-level errors count as a failed episode.
                            eprintln!("episode seed {seed} failed: {e}");
                            EpisodeResult {
                                outcome: EpisodeOutcome::Failure,
                                completion_time: 0.0,
                                steps: 0,
                                seed,
                                log: Vec::new(),
                                plan_history: Vec::new(),
                                timing: TimingStats::default(),
                            }
                        }
                    }
                })
                .collect()
        });

        if let Some(dir) = &opts.out_dir {
            for ep in &episodes {
                if !ep.log.is_empty() {
                    let path = dir.join("episodes").join(format!(
                        "{}_{}_seed{}.jsonl",
                        entry.task, mode, ep.seed
                    ));
                    write_jsonl(&path, &ep.log).map_err(|e| anyhow::anyhow!("{e}"))?;
                }
            }
        }

        mode_timing
            .entry(mode.to_string())
            .or_default()
            .extend(episodes.iter().map(|e| e.timing.clone()));
        table.rows.push(aggregate(entry.task, mode, &cfg, &episodes));
    }

    if let Some(dir) = &opts.out_dir {
        fs::write(dir.join("results.csv"), table.to_csv())?;
        fs::write(dir.join("results.json"), serde_json::to_string_pretty(&table)?)?;
        let timing: BTreeMap<String, TimingStats> = mode_timing
            .into_iter()
            .map(|(mode, stats)| (mode, pool_timing(&stats)))
            .collect();
        fs::write(dir.join("timing.json"), serde_json::to_string_pretty(&timing)?)?;
    }
    Ok(table)
}

/// Pool per-episode batch timing into one suite-level row.
fn pool_timing(stats: &[TimingStats]) -> TimingStats {
    let total: usize = stats.iter().map(|s| s.count).sum();
    if total == 0 {
        return TimingStats::default();
    }
    let mean = stats
        .iter()
        .map(|s| s.mean_ms * s.count as f64)
        .sum::<f64>()
        / total as f64;
    let second_moment = stats
        .iter()
        .map(|s| (s.std_ms * s.std_ms + s.mean_ms * s.mean_ms) * s.count as f64)
        .sum::<f64>()
        / total as f64;
    TimingStats {
        mean_ms: mean,
        std_ms: (second_moment - mean * mean).max(0.0).sqrt(),
        count: total,
    }
}
