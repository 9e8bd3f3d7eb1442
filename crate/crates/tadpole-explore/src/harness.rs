//! Experiment runner: random instance generation, ratio sweeps, oracle
//! cross-checks, and CSV emission.
//!
//! Every experiment is fully determined by its config and master seed:
//! trial `t` draws from a ChaCha stream derived from `(seed, t)`, so runs
//! reproduce byte for byte, whether executed sequentially or in parallel.
//! With the default `parallel` feature trials run on the rayon pool;
//! [`run_experiment_seq`] is the sequential fallback and produces the
//! identical row list.

use std::fs;
use std::path::PathBuf;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::seq::index::sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use thiserror::Error;

use crate::adversary::{adversary_game, lb_ratio_bound, verify_case_accounting};
use crate::advice::{
    advise_2bit, advise_cycle, advise_tadpole, explore_2bit, explore_cycle_with_advice,
    explore_tadpole_with_advice, log2_ceil,
};
use crate::explorers::{greedy_explore, Dfs, Explorer, Greedy, RandomWalk};
use crate::fog::Session;
use crate::graph::{
    cost_to_string, decompose_tadpole, make_cycle, make_tadpole, Cost, Graph, VertexId, Weight,
};
use crate::oracle::{brute_force_opt, opt_cost_cycle, opt_cost_tadpole};

pub const CSV_HEADER: &str = "trial,instance,start,explorer,cost,opt,ratio,bound,pass";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },
    #[error("missing required config key `{0}`")]
    MissingKey(&'static str),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("trial {trial} failed: {reason}")]
    Trial { trial: usize, reason: String },
}

/// What a run measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Random weighted tadpoles, greedy vs the closed-form optimum;
    /// passes when cost <= 2 * opt, exactly.
    FuzzGreedy,
    /// Adversary games for every configured k and explorer; passes when
    /// the measured ratio reaches the guaranteed bound and the case books
    /// verify.
    AdversarySweep,
    /// Advice schemes on random cycles and tadpoles; passes on exact
    /// optimality with the exact bit budget.
    AdviceCheck,
    /// Closed forms vs the subset-DP brute force on small instances.
    OracleCheck,
}

impl Mode {
    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "fuzz-greedy" => Some(Mode::FuzzGreedy),
            "adversary-sweep" => Some(Mode::AdversarySweep),
            "advice-check" => Some(Mode::AdviceCheck),
            "oracle-check" => Some(Mode::OracleCheck),
            _ => None,
        }
    }
}

/// Uniform rational weights p/q with p in [1, max_numer], q in
/// [1, max_denom].
#[derive(Debug, Clone, Copy)]
pub struct WeightDist {
    pub max_numer: u32,
    pub max_denom: u32,
}

impl WeightDist {
    pub fn sample(&self, rng: &mut impl Rng) -> Weight {
        let p = rng.gen_range(1..=self.max_numer.max(1)) as i64;
        let q = rng.gen_range(1..=self.max_denom.max(1)) as i64;
        Weight::new(p, q).expect("positive by construction")
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub trials: usize,
    pub seed: u64,
    pub i_range: (usize, usize),
    pub j_range: (usize, usize),
    pub n_range: (usize, usize),
    pub weights: WeightDist,
    pub k_values: Vec<usize>,
    pub random_seeds: usize,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(mode: Mode) -> ExperimentConfig {
        ExperimentConfig {
            mode,
            trials: 100,
            seed: 42,
            i_range: (3, 12),
            j_range: (1, 6),
            n_range: (3, 12),
            weights: WeightDist {
                max_numer: 10,
                max_denom: 4,
            },
            k_values: vec![4, 10],
            random_seeds: 3,
            output: None,
        }
    }
}

/// One measured data point. Costs and ratios are exact; the CSV rendering
/// is the only place decimals appear.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultRow {
    pub trial: usize,
    pub instance: String,
    pub start: VertexId,
    pub explorer: String,
    pub cost: Cost,
    pub opt: Cost,
    pub ratio: Cost,
    pub bound: Cost,
    pub pass: bool,
}

impl ResultRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.trial,
            self.instance,
            self.start,
            self.explorer,
            cost_to_string(&self.cost),
            cost_to_string(&self.opt),
            decimal6(&self.ratio),
            decimal6(&self.bound),
            self.pass
        )
    }
}

/// Renders an exact rational to 6 decimal places (display only; never used
/// in comparisons).
pub fn decimal6(c: &Cost) -> String {
    let scaled = (c * BigRational::from_integer(1_000_000.into())).round();
    let scaled = scaled.to_integer();
    let million = BigInt::from(1_000_000);
    let sign = if scaled.is_negative() { "-" } else { "" };
    let abs = scaled.abs();
    let int = &abs / &million;
    let frac = &abs % &million;
    format!("{sign}{int}.{frac:06}")
}

pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out
}

/// Per-trial RNG: one ChaCha stream per (seed, trial) pair, so trials are
/// independent and order-insensitive.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Draws a random tadpole with uniform part sizes and i.i.d. weights.
pub fn random_tadpole(
    rng: &mut impl Rng,
    i_range: (usize, usize),
    j_range: (usize, usize),
    dist: &WeightDist,
) -> Graph {
    let i = rng.gen_range(i_range.0.max(3)..=i_range.1.max(i_range.0.max(3)));
    let j = rng.gen_range(j_range.0.max(1)..=j_range.1.max(j_range.0.max(1)));
    let weights = (0..i + j).map(|_| dist.sample(rng)).collect();
    make_tadpole(i, j, weights).expect("sampled parameters are valid")
}

pub fn random_cycle(rng: &mut impl Rng, n_range: (usize, usize), dist: &WeightDist) -> Graph {
    let n = rng.gen_range(n_range.0.max(3)..=n_range.1.max(n_range.0.max(3)));
    let weights = (0..n).map(|_| dist.sample(rng)).collect();
    make_cycle(n, weights).expect("sampled parameters are valid")
}

/// Every start vertex for small instances, otherwise `sample_size` drawn
/// without replacement. Coverage per start matters: the guarantees hold
/// for each starting vertex separately.
pub fn select_starts(
    rng: &mut impl Rng,
    g: &Graph,
    exhaustive_upto: usize,
    sample_size: usize,
) -> Vec<VertexId> {
    let ids: Vec<VertexId> = g.vertices().collect();
    if ids.len() <= exhaustive_upto {
        return ids;
    }
    let mut picked: Vec<VertexId> = sample(rng, ids.len(), sample_size.min(ids.len()))
        .into_iter()
        .map(|i| ids[i])
        .collect();
    picked.sort();
    picked
}

fn tadpole_label(g: &Graph) -> String {
    match decompose_tadpole(g) {
        Ok(d) => format!("T(i={};j={})", d.cycle_len, d.stem_len),
        Err(_) => format!("G(n={})", g.vertex_count()),
    }
}

fn trial_count(cfg: &ExperimentConfig) -> usize {
    match cfg.mode {
        Mode::AdversarySweep => cfg.k_values.len() * (2 + cfg.random_seeds),
        _ => cfg.trials,
    }
}

fn trial_rows(cfg: &ExperimentConfig, trial: usize) -> Result<Vec<ResultRow>, HarnessError> {
    let mut rng = trial_rng(cfg.seed, trial);
    let fail = |reason: String| HarnessError::Trial { trial, reason };
    match cfg.mode {
        Mode::FuzzGreedy => {
            let g = random_tadpole(&mut rng, cfg.i_range, cfg.j_range, &cfg.weights);
            let d = decompose_tadpole(&g).expect("constructor output is a tadpole");
            let opt = opt_cost_tadpole(&d).cost;
            let instance = tadpole_label(&g);
            let bound = Cost::from_integer(2.into());
            let starts = select_starts(&mut rng, &g, 12, 5);
            let mut rows = Vec::with_capacity(starts.len());
            for start in starts {
                let mut session =
                    Session::new(g.clone(), start).map_err(|e| fail(e.to_string()))?;
                let tour = greedy_explore(&mut session).map_err(|e| fail(e.to_string()))?;
                let ratio = &tour.total_cost / &opt;
                let pass = tour.total_cost <= &bound * &opt;
                rows.push(ResultRow {
                    trial,
                    instance: instance.clone(),
                    start,
                    explorer: "greedy".into(),
                    cost: tour.total_cost,
                    opt: opt.clone(),
                    ratio,
                    bound: bound.clone(),
                    pass,
                });
            }
            Ok(rows)
        }
        Mode::AdversarySweep => {
            let per_k = 2 + cfg.random_seeds;
            let k = cfg.k_values[trial / per_k];
            let slot = trial % per_k;
            let (name, mut explorer): (String, Box<dyn Explorer>) = match slot {
                0 => ("greedy".into(), Box::new(Greedy::new())),
                1 => ("dfs".into(), Box::new(Dfs::new())),
                s => {
                    let seed = (s - 2) as u64;
                    (format!("random:{seed}"), Box::new(RandomWalk::new(seed)))
                }
            };
            let result = adversary_game(explorer.as_mut(), k).map_err(|e| fail(e.to_string()))?;
            let bound = lb_ratio_bound(k, 0, 0).expect("k >= 4 by config");
            let books_ok = verify_case_accounting(&result).is_ok();
            let pass = books_ok && result.ratio >= bound;
            Ok(vec![ResultRow {
                trial,
                instance: format!("ADV(k={k};case={})", result.case),
                start: result.start,
                explorer: name,
                cost: result.explorer_cost,
                opt: result.opt_cost,
                ratio: result.ratio,
                bound,
                pass,
            }])
        }
        Mode::AdviceCheck => {
            let mut rows = Vec::with_capacity(2);
            let one = Cost::from_integer(1.into());

            // Cycle: every third trial forces the skip shape, every third
            // an exact tie, the rest are plain random.
            let n = rng.gen_range(cfg.n_range.0.max(3)..=cfg.n_range.1.max(cfg.n_range.0.max(3)));
            let mut weights: Vec<Weight> = (0..n).map(|_| cfg.weights.sample(&mut rng)).collect();
            match trial % 3 {
                0 => {
                    let rest: Cost = weights[1..]
                        .iter()
                        .fold(Cost::zero(), |acc, w| acc + w.as_ratio());
                    weights[0] = Weight::from_ratio(rest + &one).unwrap();
                }
                1 => {
                    let rest: Cost = weights[1..]
                        .iter()
                        .fold(Cost::zero(), |acc, w| acc + w.as_ratio());
                    weights[0] = Weight::from_ratio(rest).unwrap();
                }
                _ => {}
            }
            let g = make_cycle(n, weights).expect("n >= 3");
            let start = VertexId(rng.gen_range(0..n as u32));
            let advice = advise_cycle(&g, start).map_err(|e| fail(e.to_string()))?;
            let opt = opt_cost_cycle(&g).expect("cycle by construction").cost;
            let mut session = Session::new(g.clone(), start).map_err(|e| fail(e.to_string()))?;
            let tour =
                explore_cycle_with_advice(&mut session, &advice).map_err(|e| fail(e.to_string()))?;
            let pass = tour.total_cost == opt && advice.len() == log2_ceil(n);
            rows.push(ResultRow {
                trial,
                instance: format!("C(n={n})"),
                start,
                explorer: "advice:cycle".into(),
                cost: tour.total_cost.clone(),
                opt: opt.clone(),
                ratio: &tour.total_cost / &opt,
                bound: one.clone(),
                pass,
            });

            // Tadpole, same flavor rotation on the cycle part.
            let g = random_tadpole(&mut rng, cfg.i_range, cfg.j_range, &cfg.weights);
            let d = decompose_tadpole(&g).expect("tadpole");
            let g = if trial.is_multiple_of(3) {
                let mut weights: Vec<Weight> = d
                    .cycle_edges
                    .iter()
                    .chain(d.stem_edges.iter())
                    .map(|(_, _, w)| w.clone())
                    .collect();
                let rest: Cost = weights[1..d.cycle_len]
                    .iter()
                    .fold(Cost::zero(), |acc, w| acc + w.as_ratio());
                weights[0] = Weight::from_ratio(rest + &one).unwrap();
                make_tadpole(d.cycle_len, d.stem_len, weights).expect("valid")
            } else {
                g
            };
            let d = decompose_tadpole(&g).expect("tadpole");
            let n = g.vertex_count();
            let start = *select_starts(&mut rng, &g, 0, 1).first().unwrap();
            let advice = advise_tadpole(&g, start).map_err(|e| fail(e.to_string()))?;
            let opt = opt_cost_tadpole(&d).cost;
            let mut session = Session::new(g.clone(), start).map_err(|e| fail(e.to_string()))?;
            let tour = explore_tadpole_with_advice(&mut session, &advice)
                .map_err(|e| fail(e.to_string()))?;
            let pass = tour.total_cost == opt && advice.len() == log2_ceil(n) + 1;
            rows.push(ResultRow {
                trial,
                instance: tadpole_label(&g),
                start,
                explorer: "advice:tadpole".into(),
                cost: tour.total_cost.clone(),
                opt: opt.clone(),
                ratio: &tour.total_cost / &opt,
                bound: one,
                pass,
            });
            Ok(rows)
        }
        Mode::OracleCheck => {
            let one = Cost::from_integer(1.into());
            let mut rows = Vec::with_capacity(2);
            // Keep instances within the brute-force budget.
            let i = rng.gen_range(3..=cfg.i_range.1.clamp(3, 10));
            let j = rng.gen_range(1..=cfg.j_range.1.clamp(1, 11 - i));
            let weights = (0..i + j).map(|_| cfg.weights.sample(&mut rng)).collect();
            let g = make_tadpole(i, j, weights).expect("valid");
            let d = decompose_tadpole(&g).expect("tadpole");
            let closed = opt_cost_tadpole(&d);
            let brute = brute_force_opt(&g).expect("within the size cap");
            rows.push(ResultRow {
                trial,
                instance: format!("T(i={i};j={j})"),
                start: VertexId(0),
                explorer: format!("oracle:{}", closed.shape.label()),
                cost: closed.cost.clone(),
                opt: brute.clone(),
                ratio: &closed.cost / &brute,
                bound: one.clone(),
                pass: closed.cost == brute,
            });

            let n = rng.gen_range(3..=cfg.n_range.1.clamp(3, 11));
            let weights = (0..n).map(|_| cfg.weights.sample(&mut rng)).collect();
            let g = make_cycle(n, weights).expect("valid");
            let closed = opt_cost_cycle(&g).expect("cycle");
            let brute = brute_force_opt(&g).expect("within the size cap");
            rows.push(ResultRow {
                trial,
                instance: format!("C(n={n})"),
                start: VertexId(0),
                explorer: format!("oracle:{}", closed.shape.label()),
                cost: closed.cost.clone(),
                opt: brute.clone(),
                ratio: &closed.cost / &brute,
                bound: one,
                pass: closed.cost == brute,
            });
            Ok(rows)
        }
    }
}

fn finalize(
    cfg: &ExperimentConfig,
    nested: Vec<Vec<ResultRow>>,
) -> Result<Vec<ResultRow>, HarnessError> {
    let rows: Vec<ResultRow> = nested.into_iter().flatten().collect();
    if let Some(path) = &cfg.output {
        fs::write(path, rows_to_csv(&rows)).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    Ok(rows)
}

/// Runs every trial (on the rayon pool when the `parallel` feature is on),
/// writes the CSV when an output path is configured, and returns the rows
/// ordered by trial index.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, HarnessError> {
    let n = trial_count(cfg);
    #[cfg(feature = "parallel")]
    let nested: Result<Vec<Vec<ResultRow>>, HarnessError> =
        (0..n).into_par_iter().map(|t| trial_rows(cfg, t)).collect();
    #[cfg(not(feature = "parallel"))]
    let nested: Result<Vec<Vec<ResultRow>>, HarnessError> =
        (0..n).map(|t| trial_rows(cfg, t)).collect();
    finalize(cfg, nested?)
}

/// Sequential twin of [`run_experiment`]; always available, produces the
/// identical rows, and anchors the benchmark comparison.
pub fn run_experiment_seq(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, HarnessError> {
    let n = trial_count(cfg);
    let nested: Result<Vec<Vec<ResultRow>>, HarnessError> =
        (0..n).map(|t| trial_rows(cfg, t)).collect();
    finalize(cfg, nested?)
}

/// Parses the `key = value` config format (one pair per line, `#`
/// comments). Unknown keys are rejected; `mode` is required.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, HarnessError> {
    let mut mode: Option<Mode> = None;
    let mut pairs: Vec<(usize, String, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| HarnessError::Config {
            line: idx + 1,
            reason: "expected `key = value`".into(),
        })?;
        pairs.push((idx + 1, key.trim().to_string(), value.trim().to_string()));
    }
    for (line, key, value) in &pairs {
        if key == "mode" {
            mode = Some(Mode::parse(value).ok_or_else(|| HarnessError::Config {
                line: *line,
                reason: format!("unknown mode `{value}`"),
            })?);
        }
    }
    let mode = mode.ok_or(HarnessError::MissingKey("mode"))?;
    let mut cfg = ExperimentConfig::new(mode);
    for (line, key, value) in pairs {
        let bad = |reason: String| HarnessError::Config { line, reason };
        let parse_usize =
            |v: &str| v.parse::<usize>().map_err(|_| bad(format!("bad integer `{v}`")));
        match key.as_str() {
            "mode" => {}
            "trials" => cfg.trials = parse_usize(&value)?,
            "seed" => {
                cfg.seed = value
                    .parse::<u64>()
                    .map_err(|_| bad(format!("bad seed `{value}`")))?
            }
            "i_min" => cfg.i_range.0 = parse_usize(&value)?,
            "i_max" => cfg.i_range.1 = parse_usize(&value)?,
            "j_min" => cfg.j_range.0 = parse_usize(&value)?,
            "j_max" => cfg.j_range.1 = parse_usize(&value)?,
            "n_min" => cfg.n_range.0 = parse_usize(&value)?,
            "n_max" => cfg.n_range.1 = parse_usize(&value)?,
            "weight_max_numer" => cfg.weights.max_numer = parse_usize(&value)? as u32,
            "weight_max_denom" => cfg.weights.max_denom = parse_usize(&value)? as u32,
            "random_seeds" => cfg.random_seeds = parse_usize(&value)?,
            "k_values" => {
                cfg.k_values = value
                    .split(',')
                    .map(|v| parse_usize(v.trim()))
                    .collect::<Result<Vec<_>, _>>()?;
            }
            "output" => cfg.output = Some(PathBuf::from(value)),
            other => return Err(bad(format!("unknown key `{other}`"))),
        }
    }
    Ok(cfg)
}

/// Looks up the 2-bit advice explorer wrapper so the CLI can run it by
/// name alongside the plain explorers.
pub fn run_named_explorer(
    g: &Graph,
    start: VertexId,
    name: &str,
) -> Result<(crate::fog::Tour, Vec<crate::fog::MoveEvent>), String> {
    let mut session = Session::new(g.clone(), start).map_err(|e| e.to_string())?;
    let tour = if let Some(scheme) = name.strip_prefix("advice:") {
        match scheme {
            "cycle" => {
                let advice = advise_cycle(g, start).map_err(|e| e.to_string())?;
                explore_cycle_with_advice(&mut session, &advice).map_err(|e| e.to_string())?
            }
            "tadpole" => {
                let advice = advise_tadpole(g, start).map_err(|e| e.to_string())?;
                explore_tadpole_with_advice(&mut session, &advice).map_err(|e| e.to_string())?
            }
            "2bit" => {
                let advice =
                    advise_2bit(g, start, &mut Greedy::new()).map_err(|e| e.to_string())?;
                explore_2bit(&mut session, &advice, &mut Greedy::new())
                    .map_err(|e| e.to_string())?
            }
            other => return Err(format!("unknown advice scheme `{other}`")),
        }
    } else {
        let mut explorer = crate::explorers::explorer_by_name(name)
            .ok_or_else(|| format!("unknown explorer `{name}`"))?;
        crate::explorers::run_explorer(&mut session, explorer.as_mut(), None)
            .map_err(|e| e.to_string())?
    };
    Ok((tour, session.trace().to_vec()))
}
