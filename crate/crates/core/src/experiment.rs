//! Repeated protocol runs and the accuracy/cost comparison tables.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::comm::Party;
use crate::datagen::{generate, preset, Partition, SyntheticSpec, Truth};
use crate::error::{Error, Result};
use crate::libsvm::{infer_dim, read_libsvm};
use crate::opt::{
    mwu_lp_solve, simplex_solve, stream_to_distributed, two_party_lp, LinearProgram, MultipassConfig, MultipassLp,
    MultipassStatus, MwuLpConfig, StreamAdapterConfig,
};
use crate::protocols::{run_naive, MwuConfig, Protocol, ProtocolResult};
use crate::sampling::rng_for;
use crate::types::WeightedDataset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSource {
    Preset { name: String },
    Manifest { path: PathBuf },
    /// One file per party, or a single file split at random among `parties`.
    Libsvm { paths: Vec<PathBuf>, dim: Option<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub protocols: Vec<Protocol>,
    pub data: DataSource,
    pub epsilon: f64,
    pub rho: f64,
    pub c: f64,
    /// Overrides the party count of a preset, or splits a single file.
    pub parties: Option<usize>,
    pub trials: usize,
    pub seed: u64,
    pub sample_size: Option<usize>,
    pub rounds: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            protocols: vec![Protocol::MwuEmp],
            data: DataSource::Preset { name: "synthetic1".into() },
            epsilon: 0.05,
            rho: crate::protocols::DEFAULT_RHO,
            c: crate::protocols::DEFAULT_C,
            parties: None,
            trials: 10,
            seed: 0,
            sample_size: None,
            rounds: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Manifest(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidInput("trials must be at least 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidInput(format!("epsilon must lie in (0,1), got {}", self.epsilon)));
        }
        if self.protocols.is_empty() {
            return Err(Error::InvalidInput("no protocol selected".into()));
        }
        if self.parties == Some(0) {
            return Err(Error::InvalidInput("party count must be positive".into()));
        }
        self.mwu_config(Protocol::Mwu, 0).validate()
    }

    pub fn dataset_name(&self) -> String {
        match &self.data {
            DataSource::Preset { name } => name.clone(),
            DataSource::Manifest { path } => path_stem(path),
            DataSource::Libsvm { paths, .. } => paths.first().map(|p| path_stem(p)).unwrap_or_default(),
        }
    }

    /// Protocol settings for trial seed `seed`.
    pub fn mwu_config(&self, protocol: Protocol, seed: u64) -> MwuConfig {
        let base = match protocol {
            Protocol::Mwu | Protocol::MwuEmp => MwuConfig::empirical(self.epsilon),
            _ => MwuConfig::new(self.epsilon),
        };
        MwuConfig {
            rho: self.rho,
            c: self.c,
            sample_size_per_round: self.sample_size.unwrap_or(base.sample_size_per_round),
            rounds_override: self.rounds.or(base.rounds_override),
            seed,
            ..base
        }
    }
}

fn path_stem(p: &std::path::Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Spec of a synthetic source, with the trial seed and party override applied.
fn synthetic_spec(cfg: &ExperimentConfig, seed: u64) -> Result<Option<SyntheticSpec>> {
    let spec = match &cfg.data {
        DataSource::Preset { name } => preset(name, seed)?,
        DataSource::Manifest { path } => SyntheticSpec::read_manifest(path)?.with_seed(seed),
        DataSource::Libsvm { .. } => return Ok(None),
    };
    Ok(Some(match cfg.parties {
        Some(k) => SyntheticSpec { parties: k, ..spec },
        None => spec,
    }))
}

/// Loads or generates the party datasets for one trial.
pub fn load_parties(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<WeightedDataset>> {
    if let Some(spec) = synthetic_spec(cfg, seed)? {
        return Ok(generate(&spec)?.parties);
    }
    let DataSource::Libsvm { paths, dim } = &cfg.data else { unreachable!("synthetic sources handled above") };
    if paths.is_empty() {
        return Err(Error::InvalidInput("no data files given".into()));
    }
    let dim = match dim {
        Some(d) => *d,
        None => paths.iter().map(infer_dim).collect::<Result<Vec<_>>>()?.into_iter().max().unwrap_or(0),
    };
    let sets = paths.iter().map(|p| read_libsvm(p, dim)).collect::<Result<Vec<_>>>()?;
    match (sets.len(), cfg.parties) {
        (1, Some(k)) if k > 1 => split_random(&sets[0], k, seed),
        _ => Ok(sets),
    }
}

fn split_random(ds: &WeightedDataset, k: usize, seed: u64) -> Result<Vec<WeightedDataset>> {
    let mut order: Vec<usize> = (0..ds.len()).collect();
    order.shuffle(&mut rng_for(seed, 3));
    let mut out = Vec::with_capacity(k);
    let (base, extra) = (ds.len() / k, ds.len() % k);
    let mut it = order.into_iter();
    for j in 0..k {
        let pts = it.by_ref().take(base + usize::from(j < extra)).map(|i| ds.point(i).clone()).collect();
        out.push(WeightedDataset::from_points(ds.dim(), pts)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub dataset: String,
    pub protocol: String,
    pub k: usize,
    pub d: usize,
    pub epsilon: f64,
    pub trials: usize,
    pub acc_mean: f64,
    pub acc_std: f64,
    pub words_mean: f64,
    /// Mean words over MwuEmp's mean words, when MwuEmp was run.
    pub words_vs_mwuemp: Option<f64>,
    pub rounds_mean: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct TrialStat {
    accuracy: f64,
    words: f64,
    rounds: f64,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn run_trial(cfg: &ExperimentConfig, trial: usize) -> Result<(usize, usize, Vec<TrialStat>)> {
    let seed = cfg.seed.wrapping_add(trial as u64);
    let parties = Party::from_datasets(load_parties(cfg, seed)?);
    let (k, d) = (parties.len(), parties[0].data.dim());
    let needs_reference = cfg.protocols.iter().any(|p| matches!(p, Protocol::MwuEmp | Protocol::MaxMarg));
    let naive: Option<ProtocolResult> =
        if needs_reference { Some(run_naive(&parties, &cfg.mwu_config(Protocol::Naive, seed))?) } else { None };
    let mut stats = Vec::with_capacity(cfg.protocols.len());
    for &p in &cfg.protocols {
        let mut mc = cfg.mwu_config(p, seed);
        mc.accuracy_reference = naive.as_ref().map(|r| r.train_accuracy);
        let r = match (p, &naive) {
            (Protocol::Naive, Some(n)) => n.clone(),
            _ => p.run(&parties, &mc)?,
        };
        stats.push(TrialStat {
            accuracy: r.train_accuracy,
            words: r.ledger.total_words() as f64,
            rounds: r.rounds_used as f64,
        });
    }
    Ok((k, d, stats))
}

/// Runs every configured protocol for `trials` trials (seeds `seed + i`) in parallel.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let trials: Vec<_> = (0..cfg.trials).into_par_iter().map(|t| run_trial(cfg, t)).collect::<Result<_>>()?;
    let (k, d) = (trials[0].0, trials[0].1);
    let mut rows: Vec<ResultRow> = cfg
        .protocols
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let column = |f: fn(&TrialStat) -> f64| trials.iter().map(|t| f(&t.2[j])).collect::<Vec<_>>();
            let (acc_mean, acc_std) = mean_std(&column(|s| s.accuracy));
            ResultRow {
                dataset: cfg.dataset_name(),
                protocol: p.name().into(),
                k,
                d,
                epsilon: cfg.epsilon,
                trials: cfg.trials,
                acc_mean,
                acc_std,
                words_mean: mean_std(&column(|s| s.words)).0,
                words_vs_mwuemp: None,
                rounds_mean: mean_std(&column(|s| s.rounds)).0,
                seed: cfg.seed,
            }
        })
        .collect();
    normalize(&mut rows);
    Ok(rows)
}

fn normalize(rows: &mut [ResultRow]) {
    let reference = rows.iter().find(|r| r.protocol == Protocol::MwuEmp.name()).map(|r| r.words_mean);
    if let Some(m) = reference.filter(|m| *m > 0.0) {
        for r in rows.iter_mut() {
            r.words_vs_mwuemp = Some(r.words_mean / m);
        }
    }
}

pub const CSV_HEADER: [&str; 12] = [
    "dataset",
    "protocol",
    "k",
    "d",
    "epsilon",
    "trials",
    "acc_mean",
    "acc_std",
    "words_mean",
    "words_vs_mwuemp",
    "rounds_mean",
    "seed",
];

fn row_fields(r: &ResultRow) -> Vec<String> {
    vec![
        r.dataset.clone(),
        r.protocol.clone(),
        r.k.to_string(),
        r.d.to_string(),
        r.epsilon.to_string(),
        r.trials.to_string(),
        format!("{:.6}", r.acc_mean),
        format!("{:.6}", r.acc_std),
        format!("{:.2}", r.words_mean),
        r.words_vs_mwuemp.map(|v| format!("{v:.4}")).unwrap_or_default(),
        format!("{:.2}", r.rounds_mean),
        r.seed.to_string(),
    ]
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(row_fields(r))?;
    }
    w.flush()?;
    Ok(())
}

/// Accuracy in percent with the standard deviation, and cost relative to MwuEmp.
pub fn markdown_table(rows: &[ResultRow]) -> String {
    let mut s = String::from("| dataset | protocol | k | d | acc % (std) | words | vs MwuEmp | rounds |\n");
    s.push_str("|---|---|---|---|---|---|---|---|\n");
    for r in rows {
        let ratio = r.words_vs_mwuemp.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {:.2} ({:.1}) | {:.0} | {} | {:.1} |",
            r.dataset,
            r.protocol,
            r.k,
            r.d,
            100.0 * r.acc_mean,
            100.0 * r.acc_std,
            r.words_mean,
            ratio,
            r.rounds_mean
        );
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Dim,
    Size,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Dim => "d",
            SweepAxis::Size => "n_per_party",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub value: usize,
    pub row: ResultRow,
}

fn resize(v: &mut Vec<f64>, dim: usize) {
    v.resize(dim, 0.0);
}

/// Copy of a synthetic spec in `dim` dimensions (means padded with zeros or truncated).
pub fn with_dim(spec: &SyntheticSpec, dim: usize) -> SyntheticSpec {
    let mut s = spec.clone();
    s.dim = dim;
    for c in &mut s.mixture {
        resize(&mut c.mean, dim);
    }
    if let Some(Truth { normal, .. }) = &mut s.truth {
        resize(normal, dim);
        if normal.iter().all(|v| *v == 0.0) {
            normal[0] = 1.0;
        }
    }
    if let Partition::ByHalfspace { direction: Some(v) } = &mut s.partition {
        resize(v, dim);
    }
    s
}

/// Copy of a synthetic spec with about `per_party` points per party, mixture proportions kept.
pub fn with_size(spec: &SyntheticSpec, per_party: usize) -> SyntheticSpec {
    let mut s = spec.clone();
    let total = spec.total_points().max(1);
    for c in &mut s.mixture {
        c.count = c.count * per_party * spec.parties / total;
    }
    s
}

/// Runs the experiment once per sweep value on a synthetic source.
pub fn compare_scaling(cfg: &ExperimentConfig, axis: SweepAxis, values: &[usize]) -> Result<Vec<SweepRow>> {
    if values.is_empty() || values.contains(&0) || values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("sweep values must be positive and increasing".into()));
    }
    let base = synthetic_spec(cfg, cfg.seed)?
        .ok_or_else(|| Error::InvalidInput("sweeps need a synthetic data source".into()))?;
    let dir = tempdir_for_sweep()?;
    let mut out = Vec::new();
    for &v in values {
        let spec = match axis {
            SweepAxis::Dim => with_dim(&base, v),
            SweepAxis::Size => with_size(&base, v),
        };
        let path = dir.join(format!("{}-{v}.toml", axis.name()));
        spec.write_manifest(&path)?;
        let step = ExperimentConfig { data: DataSource::Manifest { path: path.clone() }, parties: None, ..cfg.clone() };
        let result = run_experiment(&step);
        std::fs::remove_file(&path)?;
        for mut row in result? {
            row.dataset = base.name.clone();
            out.push(SweepRow { axis, value: v, row });
        }
    }
    let _ = std::fs::remove_dir(&dir);
    Ok(out)
}

fn tempdir_for_sweep() -> Result<PathBuf> {
    let dir = std::env::temp_dir().join(format!("distlearn-sweep-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sweep", "value"].into_iter().chain(CSV_HEADER))?;
    for r in rows {
        w.write_record([r.axis.name().to_string(), r.value.to_string()].into_iter().chain(row_fields(&r.row)))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpMode {
    /// Single-process multiplicative weights.
    Mwu,
    /// Two parties: constraints at one, box and objective at the other.
    TwoParty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub z_guess: f64,
    pub iterations: usize,
    pub min_slack: f64,
    pub words: u64,
}

/// Solves at the exact optimum level found by the simplex.
pub fn run_lp(lp: &LinearProgram, mode: LpMode, cfg: &MwuLpConfig) -> Result<LpRow> {
    let z = simplex_solve(lp)?.value;
    let (sol, words) = match mode {
        LpMode::Mwu => (mwu_lp_solve(lp, z, cfg)?, 0),
        LpMode::TwoParty => {
            let solver = LinearProgram { constraints: Vec::new(), ..lp.clone() };
            let (s, ledger) = two_party_lp(&solver, &lp.constraints, z, cfg)?;
            (s, ledger.total_words())
        }
    };
    Ok(LpRow { z_guess: sol.z_guess, iterations: sol.iterations, min_slack: sol.min_slack, words })
}

pub fn write_lp_csv<W: Write>(rows: &[LpRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["z_guess", "iterations", "min_slack", "words"])?;
    for r in rows {
        w.write_record([r.z_guess.to_string(), r.iterations.to_string(), r.min_slack.to_string(), r.words.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreamLpRow {
    pub n: usize,
    pub violated: usize,
    pub passes: usize,
    pub store_words: usize,
    pub words: u64,
}

/// Multipass LP over the constraints split into `parties` contiguous runs.
pub fn run_stream_lp(lp: &LinearProgram, parties: usize, passes: usize, epsilon: f64, seed: u64) -> Result<StreamLpRow> {
    if parties == 0 {
        return Err(Error::InvalidInput("party count must be positive".into()));
    }
    let cfg = MultipassConfig {
        objective: lp.objective.clone(),
        lower: lp.lower.clone(),
        upper: lp.upper.clone(),
        ..MultipassConfig::new(lp.dim(), epsilon, seed)
    };
    let n = lp.len();
    let parts: Vec<Vec<_>> = (0..parties)
        .map(|j| lp.constraints[j * n / parties..(j + 1) * n / parties].to_vec())
        .collect();
    let adapter = StreamAdapterConfig { store_words: cfg.store_words(), passes, players: parties };
    let run = stream_to_distributed(|| MultipassLp::new(cfg.clone()).expect("validated config"), &parts, &adapter)?;
    let out = run.output;
    match out.status {
        MultipassStatus::Done => Ok(StreamLpRow {
            n,
            violated: out.violated,
            passes: out.passes_used,
            store_words: cfg.store_words(),
            words: run.ledger.total_words(),
        }),
        MultipassStatus::Infeasible => Err(Error::Infeasible),
        _ => Err(Error::PassBudgetExhausted {
            passes,
            violated: out.violated,
            target: (epsilon * n as f64).floor() as usize,
        }),
    }
}

pub fn write_stream_lp_csv<W: Write>(rows: &[StreamLpRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "violated", "passes", "store_words", "words"])?;
    for r in rows {
        w.write_record([r.n, r.violated, r.passes, r.store_words, r.words as usize].map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::naive_words;

    fn small(protocols: Vec<Protocol>, trials: usize) -> ExperimentConfig {
        ExperimentConfig {
            protocols,
            data: DataSource::Preset { name: "adversarial".into() },
            trials,
            seed: 3,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn mwuemp_is_the_unit_of_cost() {
        let rows = run_experiment(&small(vec![Protocol::Voting, Protocol::MwuEmp, Protocol::Naive], 2)).unwrap();
        assert_eq!(rows[1].words_vs_mwuemp, Some(1.0));
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.k == 2 && r.d == 10 && r.trials == 2));
    }

    #[test]
    fn single_trial_has_zero_std() {
        let rows = run_experiment(&small(vec![Protocol::RandEmp], 1)).unwrap();
        assert_eq!(rows[0].acc_std, 0.0);
        assert_eq!(rows[0].words_vs_mwuemp, None);
    }

    #[test]
    fn naive_matches_full_data_learner() {
        let cfg = small(vec![Protocol::Naive], 1);
        let parties = Party::from_datasets(load_parties(&cfg, 3).unwrap());
        let full = run_naive(&parties, &cfg.mwu_config(Protocol::Naive, 3)).unwrap();
        let rows = run_experiment(&cfg).unwrap();
        assert_eq!(rows[0].acc_mean, full.train_accuracy);
        assert_eq!(rows[0].words_mean, naive_words(&parties) as f64);
    }

    #[test]
    fn output_is_reproducible() {
        let cfg = small(vec![Protocol::Voting, Protocol::Rand, Protocol::MwuEmp], 3);
        let render = |rows: &[ResultRow]| {
            let mut buf = Vec::new();
            write_csv(rows, &mut buf).unwrap();
            String::from_utf8(buf).unwrap()
        };
        let a = render(&run_experiment(&cfg).unwrap());
        assert_eq!(a, render(&run_experiment(&cfg).unwrap()));
        assert!(a.starts_with(&CSV_HEADER.join(",")));
        assert!(markdown_table(&run_experiment(&cfg).unwrap()).contains("| mwuemp |"));
    }

    #[test]
    fn invalid_configs() {
        assert!(run_experiment(&ExperimentConfig { trials: 0, ..small(vec![Protocol::Naive], 1) }).is_err());
        assert!(run_experiment(&ExperimentConfig { epsilon: 1.0, ..small(vec![Protocol::Naive], 1) }).is_err());
        let unknown = ExperimentConfig { data: DataSource::Preset { name: "nope".into() }, ..small(vec![Protocol::Naive], 1) };
        assert!(run_experiment(&unknown).is_err());
    }

    #[test]
    fn sweeps_follow_closed_forms() {
        let cfg = ExperimentConfig { protocols: vec![Protocol::Naive, Protocol::Voting, Protocol::Mwu], trials: 1, rounds: Some(3), ..small(vec![], 1) };
        let dims = compare_scaling(&cfg, SweepAxis::Dim, &[4, 8]).unwrap();
        let words = |rows: &[SweepRow], p: &str, v: usize| {
            rows.iter().find(|r| r.row.protocol == p && r.value == v).unwrap().row.words_mean
        };
        assert_eq!(words(&dims, "naive", 8) / words(&dims, "naive", 4), 9.0 / 5.0);
        let sizes = compare_scaling(&cfg, SweepAxis::Size, &[200, 400]).unwrap();
        assert_eq!(words(&sizes, "voting", 200), words(&sizes, "voting", 400));
        assert_eq!(words(&sizes, "mwu", 200), words(&sizes, "mwu", 400));
        assert_eq!(words(&sizes, "naive", 400), 2.0 * words(&sizes, "naive", 200));
        assert!(compare_scaling(&cfg, SweepAxis::Dim, &[8, 4]).is_err());
    }

    #[test]
    fn config_file_round_trip() {
        let cfg = small(vec![Protocol::Naive, Protocol::KPartyMwu], 4);
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg);
        let partial = ExperimentConfig::from_toml("trials = 2\nprotocols = [\"voting\"]\n").unwrap();
        assert_eq!((partial.trials, partial.epsilon), (2, 0.05));
    }

    #[test]
    fn libsvm_source_splits_one_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.svm");
        let g = generate(&preset("guarantee", 1).unwrap()).unwrap();
        crate::libsvm::write_libsvm(&g.parties[0], &path).unwrap();
        let cfg = ExperimentConfig {
            data: DataSource::Libsvm { paths: vec![path], dim: None },
            parties: Some(3),
            ..small(vec![Protocol::Voting], 1)
        };
        let parts = load_parties(&cfg, 0).unwrap();
        assert_eq!(parts.iter().map(WeightedDataset::len).sum::<usize>(), 2000);
        assert_eq!(parts.len(), 3);
        assert_eq!(run_experiment(&cfg).unwrap()[0].dataset, "d");
    }

    #[test]
    fn lp_rows() {
        let lp = LinearProgram::parse("2 2\n1 0 0.2\n0 1 0.3\n1 1\n0 0\n1 1\n").unwrap();
        let cfg = MwuLpConfig::new(0.2);
        let mono = run_lp(&lp, LpMode::Mwu, &cfg).unwrap();
        let two = run_lp(&lp, LpMode::TwoParty, &cfg).unwrap();
        assert_eq!(mono.words, 0);
        assert_eq!(two.words, two.iterations as u64 * 5);
        assert!((mono.z_guess - 0.5).abs() < 1e-12);
        let s = run_stream_lp(&lp, 2, 4, 0.5, 1).unwrap();
        assert_eq!(s.words, (2 * 4 * s.store_words) as u64);
    }
}
