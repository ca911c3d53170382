//! Experiment configuration: a flat text file of `key = value` lines.
//!
//! `#` starts a comment, blank lines are ignored, keys may appear once and
//! unknown keys are rejected. Values marked "or `auto`" below are resolved
//! by the harness before any run; the resolved copy is written next to the
//! results.
//!
//! | key | value | default |
//! |-----|-------|---------|
//! | `problem` | `drsvm`, `drpo`, `synthetic-max` | required |
//! | `data` | LIBSVM file (drsvm) or returns CSV (drpo) | synthetic data |
//! | `test_data` | LIBSVM file for accuracy | |
//! | `test_fraction` | hold out this fraction of `data` for accuracy | |
//! | `n_features` | fixed LIBSVM dimension | largest index |
//! | `csv_header` | `true`/`false` | `true` |
//! | `date_column` | first CSV column is a label | `false` |
//! | `tau`, `eps_hat`, `kappa_hat` | DRSVM parameters | `0.005`, `0.1`, `1` |
//! | `gamma1`, `gamma2` | DRPO parameters | `0.1`, `1.1` |
//! | `synthetic_n`, `synthetic_margin` | synthetic DRSVM size and margin | `200`, `0.2` |
//! | `synthetic_q`, `synthetic_d` | synthetic DRPO days/assets, or random synthetic-max pieces/dimension | `50`, `3` (drpo) |
//! | `data_seed` | seed for synthetic data and splits | `0` |
//! | `epsilon` | target accuracy | `0.01` |
//! | `mu0` | initial smoothing parameter | `1` |
//! | `mode` | `diminishing` or `fixed` | `diminishing` |
//! | `mu_fixed` | smoothing parameter in fixed mode, or `auto` = `epsilon / (4 kappa)` | `auto` |
//! | `batch_size` | integer or `auto` | `1` |
//! | `batch_candidates` | comma list | `1,10,100,1000,2000,3000` |
//! | `pilot_time` | seconds per pilot run | `2` |
//! | `pilot_sfo` | SFO cap per pilot in deterministic mode | `20000` |
//! | `pilots_per_candidate` | integer | `5` |
//! | `seeds` | `A..B` (half-open) or comma list | `0..5` |
//! | `solver` | `ssag` or `subgrad` | `ssag` |
//! | `subgrad_step` | step constant `c` in `c / sqrt(k)`, or `auto` | `auto` |
//! | `subgrad_batch` | baseline batch size | `batch_size` |
//! | `max_sfo` | integer, `auto` = `m N`, or `none` | `auto` |
//! | `max_iters` | integer, `auto` = `N`, or `none` | `none` |
//! | `max_time` | seconds or `none` | `none` |
//! | `stop_on_gap` | stop when `objective - reference <= epsilon` | `false` |
//! | `reference` | number, `auto` (long baseline run, cached) or `none` | `none` |
//! | `reference_iters` | iterations of the reference run | `10000` |
//! | `sigma_sq` | number or `auto` | `auto` |
//! | `sigma_points` | sample points for `auto` | `100` |
//! | `sigma_draws` | draws per point, or `auto` = `max(2, ceil(samples / 100))` | `auto` |
//! | `log_every` | integer or `auto` | `auto` |
//! | `deterministic` | no timing columns, no time caps | `false` |
//! | `out` | output directory | `results` |

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Setting<T> {
    Auto,
    None,
    Value(T),
}

impl<T: fmt::Display> fmt::Display for Setting<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Setting::Auto => write!(f, "auto"),
            Setting::None => write!(f, "none"),
            Setting::Value(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Drsvm,
    Drpo,
    SyntheticMax,
}

impl ProblemKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProblemKind::Drsvm => "drsvm",
            ProblemKind::Drpo => "drpo",
            ProblemKind::SyntheticMax => "synthetic-max",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Ssag,
    Subgrad,
}

impl SolverKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverKind::Ssag => "ssag",
            SolverKind::Subgrad => "subgrad",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    Diminishing,
    Fixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub data: Option<PathBuf>,
    pub test_data: Option<PathBuf>,
    pub test_fraction: Option<f64>,
    pub n_features: Option<usize>,
    pub csv_header: bool,
    pub date_column: bool,
    pub tau: f64,
    pub eps_hat: f64,
    pub kappa_hat: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub synthetic_n: usize,
    pub synthetic_margin: f64,
    pub synthetic_q: Option<usize>,
    pub synthetic_d: Option<usize>,
    pub data_seed: u64,
    pub epsilon: f64,
    pub mu0: f64,
    pub mode: ModeKind,
    pub mu_fixed: Setting<f64>,
    pub batch_size: Setting<usize>,
    pub batch_candidates: Vec<usize>,
    pub pilot_time: f64,
    pub pilot_sfo: u64,
    pub pilots_per_candidate: usize,
    pub seeds: Vec<u64>,
    pub solver: SolverKind,
    pub subgrad_step: Setting<f64>,
    pub subgrad_batch: Option<usize>,
    pub max_sfo: Setting<u64>,
    pub max_iters: Setting<u64>,
    pub max_time: Option<f64>,
    pub stop_on_gap: bool,
    pub reference: Setting<f64>,
    pub reference_iters: u64,
    pub sigma_sq: Setting<f64>,
    pub sigma_points: usize,
    pub sigma_draws: Setting<usize>,
    pub log_every: Setting<u64>,
    pub deterministic: bool,
    pub out: PathBuf,
}

const KEYS: &[&str] = &[
    "problem",
    "data",
    "test_data",
    "test_fraction",
    "n_features",
    "csv_header",
    "date_column",
    "tau",
    "eps_hat",
    "kappa_hat",
    "gamma1",
    "gamma2",
    "synthetic_n",
    "synthetic_margin",
    "synthetic_q",
    "synthetic_d",
    "data_seed",
    "epsilon",
    "mu0",
    "mode",
    "mu_fixed",
    "batch_size",
    "batch_candidates",
    "pilot_time",
    "pilot_sfo",
    "pilots_per_candidate",
    "seeds",
    "solver",
    "subgrad_step",
    "subgrad_batch",
    "max_sfo",
    "max_iters",
    "max_time",
    "stop_on_gap",
    "reference",
    "reference_iters",
    "sigma_sq",
    "sigma_points",
    "sigma_draws",
    "log_every",
    "deterministic",
    "out",
];

impl ExperimentConfig {
    /// Defaults for everything except the problem.
    pub fn new(problem: ProblemKind) -> Self {
        ExperimentConfig {
            problem,
            data: None,
            test_data: None,
            test_fraction: None,
            n_features: None,
            csv_header: true,
            date_column: false,
            tau: 0.005,
            eps_hat: 0.1,
            kappa_hat: 1.0,
            gamma1: 0.1,
            gamma2: 1.1,
            synthetic_n: 200,
            synthetic_margin: 0.2,
            synthetic_q: None,
            synthetic_d: None,
            data_seed: 0,
            epsilon: 0.01,
            mu0: 1.0,
            mode: ModeKind::Diminishing,
            mu_fixed: Setting::Auto,
            batch_size: Setting::Value(1),
            batch_candidates: vec![1, 10, 100, 1000, 2000, 3000],
            pilot_time: 2.0,
            pilot_sfo: 20_000,
            pilots_per_candidate: 5,
            seeds: (0..5).collect(),
            solver: SolverKind::Ssag,
            subgrad_step: Setting::Auto,
            subgrad_batch: None,
            max_sfo: Setting::Auto,
            max_iters: Setting::None,
            max_time: None,
            stop_on_gap: false,
            reference: Setting::None,
            reference_iters: 10_000,
            sigma_sq: Setting::Auto,
            sigma_points: 100,
            sigma_draws: Setting::Auto,
            log_every: Setting::Auto,
            deterministic: false,
            out: PathBuf::from("results"),
        }
    }

    /// Parses config text. Relative data paths are kept as written.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(Error::Config(format!("line {}: unknown key `{k}`", i + 1)));
            }
            if map.insert(k, (i + 1, v)).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key `{k}`", i + 1)));
            }
        }
        let problem = match map.remove("problem") {
            Some((_, "drsvm")) => ProblemKind::Drsvm,
            Some((_, "drpo")) => ProblemKind::Drpo,
            Some((_, "synthetic-max")) => ProblemKind::SyntheticMax,
            Some((l, v)) => return Err(Error::Config(format!("line {l}: unknown problem `{v}`"))),
            None => return Err(Error::Config("missing key `problem`".into())),
        };
        let mut c = ExperimentConfig::new(problem);
        for (k, (line, v)) in map {
            c.set(k, v).map_err(|e| Error::Config(format!("line {line}: `{k}`: {e}")))?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut c = Self::parse(&text)?;
        // data paths are relative to the config file
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut c.data, &mut c.test_data].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(c)
    }

    fn set(&mut self, key: &str, v: &str) -> std::result::Result<(), String> {
        match key {
            "data" => self.data = Some(PathBuf::from(v)),
            "test_data" => self.test_data = Some(PathBuf::from(v)),
            "test_fraction" => self.test_fraction = Some(num(v)?),
            "n_features" => self.n_features = Some(num(v)?),
            "csv_header" => self.csv_header = flag(v)?,
            "date_column" => self.date_column = flag(v)?,
            "tau" => self.tau = num(v)?,
            "eps_hat" => self.eps_hat = num(v)?,
            "kappa_hat" => self.kappa_hat = num(v)?,
            "gamma1" => self.gamma1 = num(v)?,
            "gamma2" => self.gamma2 = num(v)?,
            "synthetic_n" => self.synthetic_n = num(v)?,
            "synthetic_margin" => self.synthetic_margin = num(v)?,
            "synthetic_q" => self.synthetic_q = Some(num(v)?),
            "synthetic_d" => self.synthetic_d = Some(num(v)?),
            "data_seed" => self.data_seed = num(v)?,
            "epsilon" => self.epsilon = num(v)?,
            "mu0" => self.mu0 = num(v)?,
            "mode" => {
                self.mode = match v {
                    "diminishing" => ModeKind::Diminishing,
                    "fixed" => ModeKind::Fixed,
                    _ => return Err(format!("expected `diminishing` or `fixed`, got `{v}`")),
                }
            }
            "mu_fixed" => self.mu_fixed = setting(v)?,
            "batch_size" => self.batch_size = setting(v)?,
            "batch_candidates" => self.batch_candidates = list(v)?,
            "pilot_time" => self.pilot_time = num(v)?,
            "pilot_sfo" => self.pilot_sfo = num(v)?,
            "pilots_per_candidate" => self.pilots_per_candidate = num(v)?,
            "seeds" => self.seeds = parse_seeds(v)?,
            "solver" => {
                self.solver = match v {
                    "ssag" => SolverKind::Ssag,
                    "subgrad" => SolverKind::Subgrad,
                    _ => return Err(format!("expected `ssag` or `subgrad`, got `{v}`")),
                }
            }
            "subgrad_step" => self.subgrad_step = setting(v)?,
            "subgrad_batch" => self.subgrad_batch = Some(num(v)?),
            "max_sfo" => self.max_sfo = setting(v)?,
            "max_iters" => self.max_iters = setting(v)?,
            "max_time" => self.max_time = if v == "none" { None } else { Some(num(v)?) },
            "stop_on_gap" => self.stop_on_gap = flag(v)?,
            "reference" => self.reference = setting(v)?,
            "reference_iters" => self.reference_iters = num(v)?,
            "sigma_sq" => self.sigma_sq = setting(v)?,
            "sigma_points" => self.sigma_points = num(v)?,
            "sigma_draws" => self.sigma_draws = setting(v)?,
            "log_every" => self.log_every = setting(v)?,
            "deterministic" => self.deterministic = flag(v)?,
            "out" => self.out = PathBuf::from(v),
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.seeds.is_empty() {
            return bad("no seeds listed".into());
        }
        for (name, v) in [("epsilon", self.epsilon), ("mu0", self.mu0), ("eps_hat", self.eps_hat), ("kappa_hat", self.kappa_hat)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("`{name}` must be positive, got {v}"));
            }
        }
        if !(self.tau >= 0.0) {
            return bad(format!("`tau` must be nonnegative, got {}", self.tau));
        }
        if let Setting::Value(mu) = self.mu_fixed {
            if !(mu > 0.0) {
                return bad(format!("`mu_fixed` must be positive, got {mu}"));
            }
        }
        if self.batch_size == Setting::None || self.batch_size == Setting::Value(0) {
            return bad("`batch_size` must be a positive integer or auto".into());
        }
        if self.batch_candidates.is_empty() || self.batch_candidates.contains(&0) {
            return bad("`batch_candidates` must be a nonempty list of positive integers".into());
        }
        if self.pilots_per_candidate == 0 || !(self.pilot_time > 0.0) || self.pilot_sfo == 0 {
            return bad("pilot settings must be positive".into());
        }
        if self.subgrad_batch == Some(0) {
            return bad("`subgrad_batch` must be positive".into());
        }
        if let Some(f) = self.test_fraction {
            if !(f > 0.0 && f < 1.0) {
                return bad(format!("`test_fraction` must lie in (0, 1), got {f}"));
            }
            if self.test_data.is_some() {
                return bad("`test_fraction` and `test_data` are exclusive".into());
            }
        }
        if self.sigma_points == 0 || self.sigma_draws == Setting::Value(0) || self.sigma_draws == Setting::Value(1) {
            return bad("sigma estimation needs points >= 1 and draws >= 2".into());
        }
        if matches!(self.sigma_sq, Setting::Value(s) if !(s >= 0.0)) {
            return bad("`sigma_sq` must be nonnegative".into());
        }
        if matches!(self.subgrad_step, Setting::None) || matches!(self.subgrad_step, Setting::Value(c) if !(c > 0.0)) {
            return bad("`subgrad_step` must be positive or auto".into());
        }
        if self.log_every == Setting::None || self.log_every == Setting::Value(0) {
            return bad("`log_every` must be positive or auto".into());
        }
        if self.max_time.is_some_and(|t| !(t > 0.0)) {
            return bad("`max_time` must be positive".into());
        }
        if self.stop_on_gap && self.reference == Setting::None {
            return bad("`stop_on_gap` needs a `reference`".into());
        }
        if self.max_sfo == Setting::None
            && self.max_iters == Setting::None
            && (self.max_time.is_none() || self.deterministic)
            && !self.stop_on_gap
        {
            return bad("no stopping criterion: set max_sfo, max_iters, max_time or stop_on_gap".into());
        }
        Ok(())
    }

    /// Serializes the config with every key present.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| s.push_str(&format!("{k} = {v}\n"));
        put("problem", self.problem.as_str().into());
        if let Some(p) = &self.data {
            put("data", p.display().to_string());
        }
        if let Some(p) = &self.test_data {
            put("test_data", p.display().to_string());
        }
        if let Some(f) = self.test_fraction {
            put("test_fraction", f.to_string());
        }
        if let Some(n) = self.n_features {
            put("n_features", n.to_string());
        }
        put("csv_header", self.csv_header.to_string());
        put("date_column", self.date_column.to_string());
        put("tau", self.tau.to_string());
        put("eps_hat", self.eps_hat.to_string());
        put("kappa_hat", self.kappa_hat.to_string());
        put("gamma1", self.gamma1.to_string());
        put("gamma2", self.gamma2.to_string());
        put("synthetic_n", self.synthetic_n.to_string());
        put("synthetic_margin", self.synthetic_margin.to_string());
        if let Some(q) = self.synthetic_q {
            put("synthetic_q", q.to_string());
        }
        if let Some(d) = self.synthetic_d {
            put("synthetic_d", d.to_string());
        }
        put("data_seed", self.data_seed.to_string());
        put("epsilon", self.epsilon.to_string());
        put("mu0", self.mu0.to_string());
        put("mode", if self.mode == ModeKind::Fixed { "fixed" } else { "diminishing" }.into());
        put("mu_fixed", self.mu_fixed.to_string());
        put("batch_size", self.batch_size.to_string());
        put("batch_candidates", join(&self.batch_candidates));
        put("pilot_time", self.pilot_time.to_string());
        put("pilot_sfo", self.pilot_sfo.to_string());
        put("pilots_per_candidate", self.pilots_per_candidate.to_string());
        put("seeds", join(&self.seeds));
        put("solver", self.solver.as_str().into());
        put("subgrad_step", self.subgrad_step.to_string());
        if let Some(m) = self.subgrad_batch {
            put("subgrad_batch", m.to_string());
        }
        put("max_sfo", self.max_sfo.to_string());
        put("max_iters", self.max_iters.to_string());
        put("max_time", self.max_time.map_or("none".into(), |t| t.to_string()));
        put("stop_on_gap", self.stop_on_gap.to_string());
        put("reference", self.reference.to_string());
        put("reference_iters", self.reference_iters.to_string());
        put("sigma_sq", self.sigma_sq.to_string());
        put("sigma_points", self.sigma_points.to_string());
        put("sigma_draws", self.sigma_draws.to_string());
        put("log_every", self.log_every.to_string());
        put("deterministic", self.deterministic.to_string());
        put("out", self.out.display().to_string());
        s
    }
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn num<T: FromStr>(v: &str) -> std::result::Result<T, String> {
    v.parse().map_err(|_| format!("cannot parse `{v}`"))
}

fn flag(v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got `{v}`")),
    }
}

fn setting<T: FromStr>(v: &str) -> std::result::Result<Setting<T>, String> {
    match v {
        "auto" => Ok(Setting::Auto),
        "none" => Ok(Setting::None),
        _ => num(v).map(Setting::Value),
    }
}

fn list<T: FromStr>(v: &str) -> std::result::Result<Vec<T>, String> {
    v.split(',').map(|s| num(s.trim())).collect()
}

/// `A..B` (half-open range) or a comma list.
pub fn parse_seeds(v: &str) -> std::result::Result<Vec<u64>, String> {
    let v = v.trim();
    if v.is_empty() {
        return Ok(Vec::new());
    }
    if let Some((a, b)) = v.split_once("..") {
        let a: u64 = num(a.trim())?;
        let b: u64 = num(b.trim())?;
        return Ok((a..b).collect());
    }
    list(v)
}
