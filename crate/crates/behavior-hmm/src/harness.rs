//! Experiment front end: generate runs, train per-behavior models, run
//! online recognition over event or position streams, and evaluate
//! recognition quality against ground truth as CSV + JSON summaries.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::hmm::{baum_welch_train, HmmError, HmmModel, ObservationSequence, TrainConfig};
use crate::normalizer::{NormalizerError, DEFAULT_NODE_BUDGET};
use crate::perception::{
    events_from_positions, NoiseParams, ObservationEvent, PerceptionError, QuantizerConfig,
};
use crate::recognizer::{
    load_behavior_set, BehaviorModel, BehaviorSet, RecognizerError,
};
use crate::simulator::{
    build_behavior_path, simulate_run, BehaviorKind, BehaviorTemplate, Direction, RunConfig,
    SimError, SimRun,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Validation(String),
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl HarnessError {
    /// CLI contract: 0 success, 1 validation, 2 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Validation(_) => 1,
            HarnessError::Io { .. } => 2,
        }
    }

    fn io(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
        move |source| HarnessError::Io { path: path.to_path_buf(), source }
    }
}

macro_rules! from_validation {
    ($($ty:ty),*) => {$(
        impl From<$ty> for HarnessError {
            fn from(err: $ty) -> Self {
                HarnessError::Validation(err.to_string())
            }
        }
    )*};
}

from_validation!(HmmError, NormalizerError, PerceptionError, SimError);

impl From<RecognizerError> for HarnessError {
    fn from(err: RecognizerError) -> Self {
        match err {
            RecognizerError::Io { path, source } => HarnessError::Io { path, source },
            other => HarnessError::Validation(other.to_string()),
        }
    }
}

/// Stable per-purpose seed streams derived from one master seed, so
/// training and evaluation randomness never overlap.
pub fn derive_seed(master: u64, stream: &str, index: u64) -> u64 {
    let mut h = master ^ 0x9e3779b97f4a7c15;
    for byte in stream.bytes() {
        h = (h ^ byte as u64).wrapping_mul(0x100000001b3);
    }
    h = h.wrapping_add(index.wrapping_mul(0xbf58476d1ce4e5b9));
    // splitmix64 finalizer
    h = (h ^ (h >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94d049bb133111eb);
    h ^ (h >> 31)
}

fn default_behaviors() -> Vec<String> {
    BehaviorKind::ALL.iter().map(|k| k.name().to_string()).collect()
}

fn default_runs_per_behavior() -> usize {
    10
}

fn default_training_runs() -> usize {
    50
}

/// Everything `eval` needs, loadable from a JSON file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_behaviors")]
    pub behaviors: Vec<String>,
    #[serde(default = "default_runs_per_behavior")]
    pub runs_per_behavior: usize,
    #[serde(default = "default_training_runs")]
    pub training_runs_per_behavior: usize,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub quantizer: QuantizerConfig,
    #[serde(default)]
    pub noise: NoiseParams,
    #[serde(default)]
    pub train: TrainConfig,
}

impl ExperimentConfig {
    pub fn with_output_dir(output_dir: PathBuf) -> Self {
        ExperimentConfig {
            behaviors: default_behaviors(),
            runs_per_behavior: default_runs_per_behavior(),
            training_runs_per_behavior: default_training_runs(),
            seed: 0,
            output_dir,
            quantizer: QuantizerConfig::default(),
            noise: NoiseParams::default(),
            train: TrainConfig::default(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(HarnessError::io(path))?;
        let config: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| HarnessError::Validation(format!("bad config {}: {e}", path.display())))?;
        if config.runs_per_behavior == 0 {
            return Err(HarnessError::Validation("runs_per_behavior must be >= 1".into()));
        }
        Ok(config)
    }

    pub fn models_dir(&self) -> PathBuf {
        self.output_dir.join("models")
    }
}

/// Simulates `count` randomized runs of one behavior into run directories.
pub fn cmd_simulate(
    behavior: &str,
    count: usize,
    seed: u64,
    out: &Path,
) -> Result<Vec<PathBuf>, HarnessError> {
    let kind: BehaviorKind = behavior.parse()?;
    let mut dirs = Vec::with_capacity(count);
    for index in 0..count {
        let mut config = RunConfig::randomized(derive_seed(seed, "simulate", index as u64));
        // Alternate traversal direction so a corpus of any size covers both
        // directions evenly; a coin flip would skew the trained emission
        // masses toward whichever direction came up more often.
        config.direction = if index % 2 == 0 { Direction::Ccw } else { Direction::Cw };
        let run = simulate_kind(kind, &config)?;
        let dir = out.join(format!("run_{index:03}"));
        run.save(&dir)?;
        dirs.push(dir);
    }
    Ok(dirs)
}

fn simulate_kind(kind: BehaviorKind, config: &RunConfig) -> Result<SimRun, HarnessError> {
    let template = BehaviorTemplate::standard(kind);
    let path = build_behavior_path(&template, config);
    Ok(simulate_run(kind, &path, config)?)
}

pub struct TrainReport {
    pub behavior: BehaviorModel,
    pub log_likelihood_trace: Vec<f64>,
    pub warnings: Vec<String>,
    pub sequences: usize,
}

/// Pipes every run directory under `runs_dir` through perception, trains a
/// left-to-right HMM with Baum-Welch, builds the normalizer table to the
/// behavior's nominal length, and writes the behavior model file.
pub fn cmd_train(
    behavior: &str,
    runs_dir: &Path,
    states: usize,
    out: &Path,
    quantizer: &QuantizerConfig,
    noise: &NoiseParams,
    train: &TrainConfig,
) -> Result<TrainReport, HarnessError> {
    let kind: BehaviorKind = behavior.parse()?;
    let template = BehaviorTemplate::standard(kind);
    let t_nominal = template.t_nominal();
    let n_states = if states == 0 { t_nominal } else { states };

    let mut run_dirs: Vec<PathBuf> = fs::read_dir(runs_dir)
        .map_err(HarnessError::io(runs_dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("measurements.csv").is_file())
        .collect();
    run_dirs.sort();
    if run_dirs.is_empty() {
        return Err(HarnessError::Validation(format!(
            "no run directories with measurements.csv under {}",
            runs_dir.display()
        )));
    }

    let mut sequences = Vec::with_capacity(run_dirs.len());
    let mut skip_warnings = Vec::new();
    for dir in &run_dirs {
        let samples = crate::simulator::load_measurements(&dir.join("measurements.csv"))?;
        let events = events_from_positions(&samples, *noise, *quantizer)?;
        if events.is_empty() {
            // A heavily degraded run (e.g. the smallest scales under the
            // noisiest draws) can blur every turn together; drop it rather
            // than aborting training on the healthy majority.
            skip_warnings.push(format!(
                "run {} produced zero observation events; skipped",
                dir.display()
            ));
            continue;
        }
        sequences.push((net_turn(&events), events_to_sequence(&events, Some(kind.name().to_string()))?));
    }
    if sequences.is_empty() {
        return Err(HarnessError::Validation(format!(
            "every run under {} produced zero observation events",
            runs_dir.display()
        )));
    }

    // A closed loop can be traversed in either direction; reversal reverses
    // the turn order and mirrors every symbol, producing a genuinely
    // different sequence. Mixing both directions into one left-to-right HMM
    // smears every state's emissions, so split the corpus by measured net
    // turn and train one sharp model per direction. Recognition scores a
    // stream under both and keeps the better orientation.
    let (ccw, cw): (Vec<_>, Vec<_>) = sequences.into_iter().partition(|(net, _)| *net >= 0.0);
    let mut ccw: Vec<ObservationSequence> = ccw.into_iter().map(|(_, s)| s).collect();
    let mut cw: Vec<ObservationSequence> = cw.into_iter().map(|(_, s)| s).collect();
    if ccw.is_empty() {
        std::mem::swap(&mut ccw, &mut cw);
    }
    let n_sequences = ccw.len() + cw.len();

    let init = HmmModel::left_to_right(n_states, quantizer.n_bins, train.seed)?;
    let outcome = baum_welch_train(&ccw, &init, train)?;
    let mut model =
        BehaviorModel::from_hmm(kind.name(), outcome.model, t_nominal, DEFAULT_NODE_BUDGET)?;
    let mut warnings = skip_warnings;
    warnings.extend(outcome.warnings);
    if !cw.is_empty() {
        let reverse_outcome = baum_welch_train(&cw, &init, train)?;
        model = model.attach_reverse_hmm(reverse_outcome.model, DEFAULT_NODE_BUDGET)?;
        warnings.extend(reverse_outcome.warnings.into_iter().map(|w| format!("reverse: {w}")));
    }
    model.save(out)?;
    Ok(TrainReport {
        behavior: model,
        log_likelihood_trace: outcome.log_likelihood_trace,
        warnings,
        sequences: n_sequences,
    })
}

/// Total signed turn over a run; its sign gives the traversal direction of
/// a closed loop (+360 counter-clockwise, -360 clockwise).
fn net_turn(events: &[ObservationEvent]) -> f64 {
    events.iter().map(|e| e.turn_angle).sum()
}

fn events_to_sequence(
    events: &[ObservationEvent],
    label: Option<String>,
) -> Result<ObservationSequence, HarnessError> {
    Ok(ObservationSequence::new(
        events.iter().map(|e| e.symbol).collect(),
        events.iter().map(|e| e.timestamp).collect(),
        label,
    )?)
}

pub enum RecognizeInput<'a> {
    /// JSON Lines, one `{"t": seconds, "sym": symbol}` object per line.
    Events(&'a Path),
    /// CSV with header `t,x,y`; perception runs first.
    Positions(&'a Path),
}

/// Streams events through a recognition session, writing one report line
/// per event. Returns the number of reports written.
pub fn cmd_recognize(
    models: &Path,
    input: RecognizeInput<'_>,
    out: &Path,
    quantizer: &QuantizerConfig,
    noise: &NoiseParams,
) -> Result<usize, HarnessError> {
    let set = load_behavior_set(models)?;
    let events: Vec<(f64, usize)> = match input {
        RecognizeInput::Events(path) => read_event_stream(path)?,
        RecognizeInput::Positions(path) => {
            let samples = crate::simulator::load_measurements(path)?;
            events_from_positions(&samples, *noise, *quantizer)?
                .into_iter()
                .map(|e| (e.timestamp, e.symbol))
                .collect()
        }
    };
    let mut session = set.start_session();
    let mut file = fs::File::create(out).map_err(HarnessError::io(out))?;
    for &(time, symbol) in &events {
        let report = session.step(time, symbol)?;
        writeln!(file, "{}", report.to_json_line()).map_err(HarnessError::io(out))?;
    }
    Ok(events.len())
}

/// Parses the recognizer's JSON Lines event format, failing with the line
/// number on the first malformed record.
pub fn read_event_stream(path: &Path) -> Result<Vec<(f64, usize)>, HarnessError> {
    let text = fs::read_to_string(path).map_err(HarnessError::io(path))?;
    let mut events = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: serde_json::Value = serde_json::from_str(line).map_err(|e| {
            HarnessError::Validation(format!("{}:{}: {e}", path.display(), idx + 1))
        })?;
        let t = parsed.get("t").and_then(serde_json::Value::as_f64);
        let sym = parsed.get("sym").and_then(serde_json::Value::as_u64);
        match (t, sym) {
            (Some(t), Some(sym)) => events.push((t, sym as usize)),
            _ => {
                return Err(HarnessError::Validation(format!(
                    "{}:{}: expected {{\"t\": seconds, \"sym\": int}}",
                    path.display(),
                    idx + 1
                )))
            }
        }
    }
    Ok(events)
}

/// Writes perception events in the recognizer's JSON Lines format.
pub fn write_event_stream(path: &Path, events: &[ObservationEvent]) -> Result<(), HarnessError> {
    let mut text = String::new();
    for e in events {
        text.push_str(&json!({"t": e.timestamp, "sym": e.symbol}).to_string());
        text.push('\n');
    }
    fs::write(path, text).map_err(HarnessError::io(path))
}

/// One eval.csv row: the state of recognition at one event of one run.
#[derive(Debug, Clone)]
pub struct EvalRecord {
    pub true_behavior: String,
    pub run: usize,
    pub t_event: usize,
    pub percent_executed: f64,
    pub likelihoods: Vec<f64>,
    pub argmax: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct BehaviorSummary {
    pub runs: usize,
    pub locked_runs: usize,
    /// Runs where the true behavior was the argmax from the first event on.
    pub first_event_lock_fraction: f64,
    /// Lock-in percent averaged over all runs; a run that never locks
    /// counts as 1.0.
    pub mean_lock_in: f64,
    pub worst_lock_in: f64,
    pub lock_in_points: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalSummary {
    pub seed: u64,
    pub runs_per_behavior: usize,
    pub lock_in_definition: String,
    pub per_behavior: BTreeMap<String, BehaviorSummary>,
    pub overall_fraction_locked_by_40_percent: f64,
    pub behaviors_with_mean_lock_in_at_most_25_percent: usize,
    pub behaviors_locked_at_first_event_in_majority: usize,
    /// Mean L of the true behavior in fixed 5% percent-executed bins.
    pub true_likelihood_curves: BTreeMap<String, Vec<Option<f64>>>,
}

/// Simulates fresh randomized runs per behavior (seed stream disjoint from
/// training), recognizes each online, and writes `eval.csv` and
/// `summary.json` under the configured output directory.
pub fn cmd_eval(config: &ExperimentConfig) -> Result<EvalSummary, HarnessError> {
    let set = load_behavior_set(&config.models_dir())?;
    let names: Vec<String> = set.names().iter().map(|s| s.to_string()).collect();
    for behavior in &config.behaviors {
        if !names.iter().any(|n| n == behavior) {
            return Err(HarnessError::Validation(format!(
                "no trained model file for behavior '{behavior}' in {}",
                config.models_dir().display()
            )));
        }
    }

    let mut behaviors = config.behaviors.clone();
    behaviors.sort();
    let mut records: Vec<EvalRecord> = Vec::new();
    let mut lock_ins: BTreeMap<String, Vec<Option<f64>>> = BTreeMap::new();
    let mut first_locks: BTreeMap<String, usize> = BTreeMap::new();

    for behavior in &behaviors {
        let kind: BehaviorKind = behavior.parse()?;
        for run_idx in 0..config.runs_per_behavior {
            let seed = derive_seed(config.seed, &format!("eval-{behavior}"), run_idx as u64);
            let run_config = RunConfig::randomized(seed);
            let run = simulate_kind(kind, &run_config)?;
            let events = events_from_positions(&run.measurements, config.noise, config.quantizer)?;

            let mut session = set.start_session();
            let mut run_records = Vec::with_capacity(events.len());
            for event in &events {
                let report = session.step(event.timestamp, event.symbol)?;
                let percent = run.fraction_executed_at(event.timestamp).min(1.0);
                run_records.push(EvalRecord {
                    true_behavior: behavior.clone(),
                    run: run_idx,
                    t_event: report.t_event,
                    percent_executed: percent,
                    likelihoods: report.likelihoods.clone(),
                    argmax: report.argmax.clone(),
                });
            }

            let lock_in = lock_in_point(&run_records, behavior);
            lock_ins.entry(behavior.clone()).or_default().push(lock_in);
            let from_first = !run_records.is_empty()
                && run_records.iter().all(|r| &r.argmax == behavior);
            if from_first {
                *first_locks.entry(behavior.clone()).or_default() += 1;
            }
            records.extend(run_records);
        }
    }

    fs::create_dir_all(&config.output_dir).map_err(HarnessError::io(&config.output_dir))?;
    write_eval_csv(&config.output_dir.join("eval.csv"), &names, &records)?;

    let mut per_behavior = BTreeMap::new();
    for behavior in &behaviors {
        let points = lock_ins.remove(behavior).unwrap_or_default();
        let locked_runs = points.iter().filter(|p| p.is_some()).count();
        let effective: Vec<f64> = points.iter().map(|p| p.unwrap_or(1.0)).collect();
        let mean = effective.iter().sum::<f64>() / effective.len().max(1) as f64;
        let worst = effective.iter().cloned().fold(0.0, f64::max);
        per_behavior.insert(
            behavior.clone(),
            BehaviorSummary {
                runs: points.len(),
                locked_runs,
                first_event_lock_fraction: *first_locks.get(behavior).unwrap_or(&0) as f64
                    / points.len().max(1) as f64,
                mean_lock_in: mean,
                worst_lock_in: worst,
                lock_in_points: points,
            },
        );
    }

    let all_points: Vec<f64> = per_behavior
        .values()
        .flat_map(|s| s.lock_in_points.iter().map(|p| p.unwrap_or(1.0)))
        .collect();
    let locked_by_40 =
        all_points.iter().filter(|&&p| p <= 0.40).count() as f64 / all_points.len().max(1) as f64;
    let mean_le_25 = per_behavior.values().filter(|s| s.mean_lock_in <= 0.25).count();
    let first_majority = per_behavior
        .values()
        .filter(|s| s.first_event_lock_fraction > 0.5)
        .count();

    let summary = EvalSummary {
        seed: config.seed,
        runs_per_behavior: config.runs_per_behavior,
        lock_in_definition:
            "smallest percent_executed at which the true behavior becomes and remains the argmax of L; eval.csv holds the raw per-event records for looser readings"
                .to_string(),
        per_behavior,
        overall_fraction_locked_by_40_percent: locked_by_40,
        behaviors_with_mean_lock_in_at_most_25_percent: mean_le_25,
        behaviors_locked_at_first_event_in_majority: first_majority,
        true_likelihood_curves: binned_curves(&records, &behaviors, &names),
    };
    let summary_path = config.output_dir.join("summary.json");
    fs::write(
        &summary_path,
        serde_json::to_string_pretty(&summary).expect("serializable"),
    )
    .map_err(HarnessError::io(&summary_path))?;
    Ok(summary)
}

/// Smallest percent_executed at which the true behavior becomes and remains
/// the argmax; `None` when that never happens (including zero-event runs).
fn lock_in_point(records: &[EvalRecord], true_behavior: &str) -> Option<f64> {
    let mut lock: Option<f64> = None;
    for record in records {
        if record.argmax == true_behavior {
            if lock.is_none() {
                lock = Some(record.percent_executed);
            }
        } else {
            lock = None;
        }
    }
    lock
}

fn write_eval_csv(
    path: &Path,
    model_names: &[String],
    records: &[EvalRecord],
) -> Result<(), HarnessError> {
    let mut text = String::from("behavior,run,t_event,percent_executed");
    for name in model_names {
        text.push_str(&format!(",L_{name}"));
    }
    text.push_str(",argmax\n");
    for r in records {
        text.push_str(&format!(
            "{},{},{},{}",
            r.true_behavior, r.run, r.t_event, r.percent_executed
        ));
        for l in &r.likelihoods {
            text.push_str(&format!(",{l}"));
        }
        text.push_str(&format!(",{}\n", r.argmax));
    }
    fs::write(path, text).map_err(HarnessError::io(path))
}

/// Mean L of the true behavior in 20 fixed 5%-wide percent-executed bins.
fn binned_curves(
    records: &[EvalRecord],
    behaviors: &[String],
    model_names: &[String],
) -> BTreeMap<String, Vec<Option<f64>>> {
    let mut curves = BTreeMap::new();
    for behavior in behaviors {
        let Some(col) = model_names.iter().position(|n| n == behavior) else {
            continue;
        };
        let mut sums = vec![0.0; 20];
        let mut counts = vec![0usize; 20];
        for r in records.iter().filter(|r| &r.true_behavior == behavior) {
            let bin = ((r.percent_executed / 0.05) as usize).min(19);
            sums[bin] += r.likelihoods[col];
            counts[bin] += 1;
        }
        curves.insert(
            behavior.clone(),
            sums.iter()
                .zip(&counts)
                .map(|(&s, &c)| if c > 0 { Some(s / c as f64) } else { None })
                .collect(),
        );
    }
    curves
}

/// End-to-end pipeline: simulate training data, train all behavior models,
/// then evaluate. Training and evaluation seed streams are disjoint.
pub fn run_full_experiment(config: &ExperimentConfig) -> Result<EvalSummary, HarnessError> {
    let models_dir = config.models_dir();
    fs::create_dir_all(&models_dir).map_err(HarnessError::io(&models_dir))?;
    for behavior in &config.behaviors {
        let kind: BehaviorKind = behavior.parse()?;
        let runs_dir = config.output_dir.join("training").join(behavior);
        for index in 0..config.training_runs_per_behavior {
            let seed = derive_seed(config.seed, &format!("train-{behavior}"), index as u64);
            let mut run_config = RunConfig::randomized(seed);
            // Even direction coverage, as in cmd_simulate.
            run_config.direction =
                if index % 2 == 0 { Direction::Ccw } else { Direction::Cw };
            let run = simulate_kind(kind, &run_config)?;
            run.save(&runs_dir.join(format!("run_{index:03}")))?;
        }
        cmd_train(
            behavior,
            &runs_dir,
            0,
            &models_dir.join(format!("{behavior}.json")),
            &config.quantizer,
            &config.noise,
            &config.train,
        )?;
    }
    cmd_eval(config)
}

/// Loads the behavior set a session factory would use; exposed for tools
/// and tests that need direct access.
pub fn load_models(config: &ExperimentConfig) -> Result<BehaviorSet, HarnessError> {
    Ok(load_behavior_set(&config.models_dir())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_streams_are_disjoint() {
        let mut seen = std::collections::HashSet::new();
        for i in 0..100 {
            assert!(seen.insert(derive_seed(42, "train-rectangle", i)));
            assert!(seen.insert(derive_seed(42, "eval-rectangle", i)));
            assert!(seen.insert(derive_seed(42, "train-triangle", i)));
        }
    }

    #[test]
    fn simulate_writes_distinct_runs() {
        let dir = tempfile::tempdir().unwrap();
        let dirs = cmd_simulate("rectangle", 3, 7, dir.path()).unwrap();
        assert_eq!(dirs.len(), 3);
        let a = fs::read_to_string(dirs[0].join("measurements.csv")).unwrap();
        let b = fs::read_to_string(dirs[1].join("measurements.csv")).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn simulate_same_seed_is_identical() {
        let dir1 = tempfile::tempdir().unwrap();
        let dir2 = tempfile::tempdir().unwrap();
        cmd_simulate("triangle", 2, 9, dir1.path()).unwrap();
        cmd_simulate("triangle", 2, 9, dir2.path()).unwrap();
        for run in ["run_000", "run_001"] {
            let a = fs::read_to_string(dir1.path().join(run).join("measurements.csv")).unwrap();
            let b = fs::read_to_string(dir2.path().join(run).join("measurements.csv")).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn simulate_rejects_unknown_behavior() {
        let dir = tempfile::tempdir().unwrap();
        let err = cmd_simulate("heptagon", 1, 0, dir.path()).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("hourglass"));
    }

    #[test]
    fn event_stream_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        let events = vec![
            ObservationEvent { timestamp: 1.0, symbol: 2, turn_angle: 88.0 },
            ObservationEvent { timestamp: 3.5, symbol: 6, turn_angle: -91.0 },
        ];
        write_event_stream(&path, &events).unwrap();
        let parsed = read_event_stream(&path).unwrap();
        assert_eq!(parsed, vec![(1.0, 2), (3.5, 6)]);

        fs::write(&path, "{\"t\": 1.0, \"sym\": 2}\nnot json\n").unwrap();
        let err = read_event_stream(&path).unwrap_err();
        assert!(err.to_string().contains(":2:"), "{err}");
    }
}
