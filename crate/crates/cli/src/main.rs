use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use distlearn::datagen::{generate, preset, SyntheticSpec};
use distlearn::experiment::{
    compare_scaling, markdown_table, run_experiment, run_lp, run_stream_lp, write_csv, write_lp_csv,
    write_stream_lp_csv, write_sweep_csv, DataSource, ExperimentConfig, LpMode, SweepAxis,
};
use distlearn::libsvm::write_libsvm;
use distlearn::opt::{LinearProgram, MwuLpConfig};
use distlearn::protocols::Protocol;
use serde::Deserialize;

#[derive(Parser)]
#[command(name = "distlearn", version, about = "Distributed learning protocols with exact word accounting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset as one LIBSVM file per party plus its manifest.
    Generate(Opts),
    /// Run the selected protocols and print the result table.
    Run(Opts),
    /// Run every classification protocol side by side.
    Compare(Opts),
    /// Repeat a run over increasing dimensions or party sizes.
    Sweep(Opts),
    /// Solve an LP file with the MWU solver, alone or split between two parties.
    Lp(Opts),
    /// Solve an LP file with the multipass algorithm over a k-party stream.
    StreamLp(Opts),
}

/// Every option is also a key of the `--config` TOML file; flags win.
#[derive(Args, Deserialize, Default, Clone)]
#[serde(default, deny_unknown_fields)]
struct Opts {
    /// Protocol names, comma separated.
    #[arg(long, value_delimiter = ',')]
    protocol: Option<Vec<String>>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    parties: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// LIBSVM files (one per party), a dataset manifest, or an LP file.
    #[arg(long, value_delimiter = ',')]
    data: Option<Vec<PathBuf>>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    sweep_dim: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    sweep_size: Option<Vec<usize>>,
    /// Samples per party and round for the MWU protocols.
    #[arg(long)]
    sample_size: Option<usize>,
    #[arg(long)]
    rounds: Option<usize>,
    /// Pass budget for `stream-lp`.
    #[arg(long)]
    passes: Option<usize>,
    /// Also print the table as Markdown.
    #[arg(long)]
    #[serde(default)]
    markdown: bool,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

macro_rules! prefer_flags {
    ($flags:expr, $file:expr, $($f:ident),*) => {
        Opts { $($f: $flags.$f.or($file.$f),)* markdown: $flags.markdown || $file.markdown, config: None }
    };
}

impl Opts {
    fn merged(self) -> Result<Opts, Failure> {
        let Some(path) = &self.config else { return Ok(self) };
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        let file: Opts = toml::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        Ok(prefer_flags!(
            self, file, protocol, epsilon, rho, c, parties, trials, seed, data, preset, out, sweep_dim, sweep_size,
            sample_size, rounds, passes
        ))
    }
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Runtime(String),
}

impl Failure {
    fn config(e: distlearn::Error) -> Self {
        Failure::Config(e.to_string())
    }

    fn runtime(e: impl std::fmt::Display) -> Self {
        Failure::Runtime(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Solver {
    Classify(Protocol),
    Lp(LpMode),
    StreamLp,
}

impl FromStr for Solver {
    type Err = distlearn::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "lp_mwu" => Ok(Solver::Lp(LpMode::Mwu)),
            "lp_twoparty" => Ok(Solver::Lp(LpMode::TwoParty)),
            "stream_lp" => Ok(Solver::StreamLp),
            _ => s.parse().map(Solver::Classify),
        }
    }
}

fn solvers(opts: &Opts) -> Result<Vec<Solver>, Failure> {
    opts.protocol
        .iter()
        .flatten()
        .map(|s| s.trim().parse().map_err(Failure::config))
        .collect()
}

fn data_source(opts: &Opts) -> Result<DataSource, Failure> {
    match (&opts.data, &opts.preset) {
        (Some(_), Some(_)) => Err(Failure::Config("give either --data or --preset, not both".into())),
        (None, name) => {
            let name = name.clone().unwrap_or_else(|| ExperimentConfig::default().dataset_name());
            preset(&name, 0).map_err(Failure::config)?;
            Ok(DataSource::Preset { name })
        }
        (Some(paths), None) if paths.len() == 1 && paths[0].extension().is_some_and(|e| e == "toml") => {
            Ok(DataSource::Manifest { path: paths[0].clone() })
        }
        (Some(paths), None) => Ok(DataSource::Libsvm { paths: paths.clone(), dim: None }),
    }
}

fn experiment(opts: &Opts, default: &[Protocol]) -> Result<ExperimentConfig, Failure> {
    let mut protocols = Vec::new();
    for s in solvers(opts)? {
        match s {
            Solver::Classify(p) => protocols.push(p),
            _ => return Err(Failure::Config("LP solvers run with the `lp` and `stream-lp` commands".into())),
        }
    }
    if protocols.is_empty() {
        protocols = default.to_vec();
    }
    let base = ExperimentConfig::default();
    let cfg = ExperimentConfig {
        protocols,
        data: data_source(opts)?,
        epsilon: opts.epsilon.unwrap_or(base.epsilon),
        rho: opts.rho.unwrap_or(base.rho),
        c: opts.c.unwrap_or(base.c),
        parties: opts.parties,
        trials: opts.trials.unwrap_or(base.trials),
        seed: opts.seed.unwrap_or(base.seed),
        sample_size: opts.sample_size,
        rounds: opts.rounds,
    };
    cfg.validate().map_err(Failure::config)?;
    Ok(cfg)
}

fn output(opts: &Opts) -> Result<Box<dyn Write>, Failure> {
    Ok(match &opts.out {
        Some(p) => Box::new(File::create(p).map_err(|e| Failure::runtime(format!("{}: {e}", p.display())))?),
        None => Box::new(io::stdout()),
    })
}

fn cmd_generate(opts: &Opts) -> Result<(), Failure> {
    let dir = opts.out.clone().ok_or_else(|| Failure::Config("generate needs --out <dir>".into()))?;
    let seed = opts.seed.unwrap_or(0);
    let spec = match &opts.data {
        Some(paths) if paths.len() == 1 => SyntheticSpec::read_manifest(&paths[0]).map_err(Failure::config)?.with_seed(seed),
        Some(_) => return Err(Failure::Config("generate takes one manifest".into())),
        None => preset(opts.preset.as_deref().unwrap_or("synthetic1"), seed).map_err(Failure::config)?,
    };
    let spec = SyntheticSpec { parties: opts.parties.unwrap_or(spec.parties), ..spec };
    spec.validate().map_err(Failure::config)?;
    let data = generate(&spec).map_err(Failure::runtime)?;
    std::fs::create_dir_all(&dir).map_err(Failure::runtime)?;
    spec.write_manifest(dir.join("manifest.toml")).map_err(Failure::runtime)?;
    for (j, part) in data.parties.iter().enumerate() {
        write_libsvm(part, dir.join(format!("party{}.svm", j + 1))).map_err(Failure::runtime)?;
    }
    eprintln!("wrote {} parties, {} points to {}", spec.parties, spec.total_points(), dir.display());
    Ok(())
}

fn cmd_run(opts: &Opts, default: &[Protocol]) -> Result<(), Failure> {
    let cfg = experiment(opts, default)?;
    let rows = run_experiment(&cfg).map_err(Failure::runtime)?;
    write_csv(&rows, output(opts)?).map_err(Failure::runtime)?;
    if opts.markdown {
        print!("{}", markdown_table(&rows));
    }
    Ok(())
}

fn cmd_sweep(opts: &Opts) -> Result<(), Failure> {
    let (axis, values) = match (&opts.sweep_dim, &opts.sweep_size) {
        (Some(v), None) => (SweepAxis::Dim, v),
        (None, Some(v)) => (SweepAxis::Size, v),
        _ => return Err(Failure::Config("sweep needs exactly one of --sweep-dim or --sweep-size".into())),
    };
    if values.is_empty() || values.contains(&0) || values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Failure::Config("sweep values must be positive and increasing".into()));
    }
    let cfg = experiment(opts, &[Protocol::Naive, Protocol::Voting, Protocol::MwuEmp])?;
    if matches!(cfg.data, DataSource::Libsvm { .. }) {
        return Err(Failure::Config("sweeps need a preset or a dataset manifest".into()));
    }
    let rows = compare_scaling(&cfg, axis, values).map_err(Failure::runtime)?;
    write_sweep_csv(&rows, output(opts)?).map_err(Failure::runtime)?;
    if opts.markdown {
        for v in values {
            println!("\n{} = {v}\n", axis.name());
            let at: Vec<_> = rows.iter().filter(|r| r.value == *v).map(|r| r.row.clone()).collect();
            print!("{}", markdown_table(&at));
        }
    }
    Ok(())
}

fn read_lp(opts: &Opts) -> Result<LinearProgram, Failure> {
    let path: &Path = match opts.data.as_deref() {
        Some([p]) => p,
        _ => return Err(Failure::Config("LP commands need one --data <file>".into())),
    };
    let text = std::fs::read_to_string(path).map_err(|e| Failure::runtime(format!("{}: {e}", path.display())))?;
    LinearProgram::parse(&text).map_err(|e| Failure::runtime(format!("{}: {e}", path.display())))
}

fn epsilon(opts: &Opts) -> Result<f64, Failure> {
    let eps = opts.epsilon.unwrap_or(0.05);
    if eps > 0.0 && eps < 1.0 {
        Ok(eps)
    } else {
        Err(Failure::Config(format!("epsilon must lie in (0,1), got {eps}")))
    }
}

fn cmd_lp(opts: &Opts) -> Result<(), Failure> {
    let mode = match solvers(opts)?.as_slice() {
        [] | [Solver::Lp(LpMode::Mwu)] => LpMode::Mwu,
        [Solver::Lp(m)] => *m,
        _ => return Err(Failure::Config("lp takes --protocol lp_mwu or lp_twoparty".into())),
    };
    let cfg = MwuLpConfig::new(epsilon(opts)?);
    let lp = read_lp(opts)?;
    let row = run_lp(&lp, mode, &cfg).map_err(Failure::runtime)?;
    write_lp_csv(&[row], output(opts)?).map_err(Failure::runtime)
}

fn cmd_stream_lp(opts: &Opts) -> Result<(), Failure> {
    if !matches!(solvers(opts)?.as_slice(), [] | [Solver::StreamLp]) {
        return Err(Failure::Config("stream-lp takes only --protocol stream_lp".into()));
    }
    let eps = epsilon(opts)?;
    let parties = opts.parties.unwrap_or(2);
    let passes = opts.passes.unwrap_or(10);
    if parties == 0 || passes == 0 {
        return Err(Failure::Config("parties and passes must be positive".into()));
    }
    let lp = read_lp(opts)?;
    let row = run_stream_lp(&lp, parties, passes, eps, opts.seed.unwrap_or(0)).map_err(Failure::runtime)?;
    write_stream_lp_csv(&[row], output(opts)?).map_err(Failure::runtime)
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Generate(o) => cmd_generate(&o.merged()?),
        Command::Run(o) => cmd_run(&o.merged()?, &[Protocol::MwuEmp]),
        Command::Compare(o) => cmd_run(&o.merged()?, &Protocol::ALL),
        Command::Sweep(o) => cmd_sweep(&o.merged()?),
        Command::Lp(o) => cmd_lp(&o.merged()?),
        Command::StreamLp(o) => cmd_stream_lp(&o.merged()?),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
