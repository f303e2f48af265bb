//! Multipass sample-and-prune LP for a stream of halfspace constraints.
//!
//! The first pass reservoir-samples `s₀` constraints and solves them exactly.
//! Every later pass counts the constraints the current point violates and
//! reservoir-samples up to `s₀` of them; if too many were violated the
//! sample joins the working set (capped at `4s₀`, oldest rows dropped first)
//! and the point is recomputed. A pass that counts at most `εn` violators
//! certifies the point, after which further passes change nothing.
//!
//! The whole state, including the position of the random stream, lives in
//! a `u64` store, so handing the store between players reproduces the
//! single-process run bit for bit.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::opt::lp::{simplex_solve, Constraint, LinearProgram};
use crate::opt::stream::StreamingAlgorithm;
use crate::sampling::rng_for;

const HEADER_WORDS: usize = 11;
const STREAM_ID: u64 = 0x5_7e_a3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultipassStatus {
    Sampling,
    Checking,
    Done,
    Infeasible,
    EmptyStream,
}

impl MultipassStatus {
    fn code(self) -> u64 {
        match self {
            Self::Sampling => 0,
            Self::Checking => 1,
            Self::Done => 2,
            Self::Infeasible => 3,
            Self::EmptyStream => 4,
        }
    }

    fn from_code(c: u64) -> Result<Self> {
        Ok(match c {
            0 => Self::Sampling,
            1 => Self::Checking,
            2 => Self::Done,
            3 => Self::Infeasible,
            4 => Self::EmptyStream,
            _ => return Err(Error::InvalidInput(format!("corrupt store: status code {c}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultipassConfig {
    pub dim: usize,
    pub epsilon: f64,
    /// `s₀`; defaults to `25d²`.
    pub sample_size: usize,
    /// Objective minimized on the working set; zero means any feasible point.
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub seed: u64,
}

impl MultipassConfig {
    /// Unit box `[-1, 1]ᵈ`, zero objective, `s₀ = 25d²`.
    pub fn new(dim: usize, epsilon: f64, seed: u64) -> Self {
        Self {
            dim,
            epsilon,
            sample_size: 25 * dim * dim,
            objective: vec![0.0; dim],
            lower: vec![-1.0; dim],
            upper: vec![1.0; dim],
            seed,
        }
    }

    pub fn working_cap(&self) -> usize {
        4 * self.sample_size
    }

    /// Words needed for the store: header, point, working set and reservoir.
    pub fn store_words(&self) -> usize {
        HEADER_WORDS + self.dim + (self.working_cap() + self.sample_size) * (self.dim + 1)
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.sample_size == 0 {
            return Err(Error::InvalidInput("dimension and sample size must be positive".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::InvalidInput(format!("epsilon must lie in (0,1], got {}", self.epsilon)));
        }
        for v in [&self.objective, &self.lower, &self.upper] {
            if v.len() != self.dim {
                return Err(Error::DimensionMismatch { expected: self.dim, found: v.len() });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultipassOutcome {
    pub status: MultipassStatus,
    pub x: Option<Vec<f64>>,
    /// Violators counted by the most recent checking pass.
    pub violated: usize,
    pub n: usize,
    /// Pass on which the point was certified (0 if not yet).
    pub passes_used: usize,
    pub working_set: usize,
}

/// Streaming state of the sample-and-prune LP.
#[derive(Debug, Clone)]
pub struct MultipassLp {
    cfg: MultipassConfig,
    rng: ChaCha8Rng,
    status: MultipassStatus,
    pass: u64,
    seen: u64,
    n: u64,
    violators: u64,
    last_violated: u64,
    passes_used: u64,
    x: Option<Vec<f64>>,
    working: Vec<Constraint>,
    reservoir: Vec<Constraint>,
}

fn violates(c: &Constraint, x: &[f64]) -> bool {
    c.slack(x) < -1e-9 * (1.0 + c.rhs.abs())
}

impl MultipassLp {
    pub fn new(cfg: MultipassConfig) -> Result<Self> {
        cfg.validate()?;
        let rng = rng_for(cfg.seed, STREAM_ID);
        Ok(Self {
            cfg,
            rng,
            status: MultipassStatus::Sampling,
            pass: 0,
            seen: 0,
            n: 0,
            violators: 0,
            last_violated: 0,
            passes_used: 0,
            x: None,
            working: Vec::new(),
            reservoir: Vec::new(),
        })
    }

    pub fn config(&self) -> &MultipassConfig {
        &self.cfg
    }

    pub fn status(&self) -> MultipassStatus {
        self.status
    }

    fn offer(&mut self, c: &Constraint, count: u64) {
        let s0 = self.cfg.sample_size;
        if (count as usize) < s0 {
            self.reservoir.push(c.clone());
        } else {
            let j = self.rng.random_range(0..=count);
            if (j as usize) < s0 {
                self.reservoir[j as usize] = c.clone();
            }
        }
    }

    fn solve_working(&mut self) {
        let lp = LinearProgram {
            constraints: self.working.clone(),
            objective: self.cfg.objective.clone(),
            lower: self.cfg.lower.clone(),
            upper: self.cfg.upper.clone(),
        };
        match simplex_solve(&lp) {
            Ok(s) => {
                self.x = Some(s.x);
                self.status = MultipassStatus::Checking;
            }
            Err(_) => {
                self.x = None;
                self.status = MultipassStatus::Infeasible;
            }
        }
    }

    fn target(&self) -> u64 {
        (self.cfg.epsilon * self.n as f64).floor() as u64
    }
}

fn push_rows(out: &mut Vec<u64>, rows: &[Constraint]) {
    for c in rows {
        out.extend(c.coeffs.iter().map(|v| v.to_bits()));
        out.push(c.rhs.to_bits());
    }
}

fn read_rows(words: &[u64], count: usize, d: usize) -> Vec<Constraint> {
    words
        .chunks_exact(d + 1)
        .take(count)
        .map(|w| Constraint::new(w[..d].iter().map(|&b| f64::from_bits(b)).collect(), f64::from_bits(w[d])))
        .collect()
}

impl StreamingAlgorithm for MultipassLp {
    type Item = Constraint;
    type Output = MultipassOutcome;

    fn declared_store_words(&self) -> usize {
        self.cfg.store_words()
    }

    fn consume(&mut self, c: &Constraint) {
        match self.status {
            MultipassStatus::Sampling => {
                let seen = self.seen;
                self.offer(c, seen);
            }
            MultipassStatus::Checking => {
                let x = self.x.as_deref().expect("checking passes have a point");
                if violates(c, x) {
                    let count = self.violators;
                    self.violators += 1;
                    self.offer(c, count);
                }
            }
            _ => return,
        }
        self.seen += 1;
    }

    fn finish_pass(&mut self) {
        self.pass += 1;
        match self.status {
            MultipassStatus::Sampling => {
                self.n = self.seen;
                if self.n == 0 {
                    self.status = MultipassStatus::EmptyStream;
                } else {
                    self.working = std::mem::take(&mut self.reservoir);
                    self.solve_working();
                }
            }
            MultipassStatus::Checking => {
                self.last_violated = self.violators;
                if self.violators <= self.target() {
                    self.status = MultipassStatus::Done;
                    self.passes_used = self.pass;
                    self.reservoir.clear();
                } else {
                    self.working.append(&mut self.reservoir);
                    let cap = self.cfg.working_cap();
                    if self.working.len() > cap {
                        self.working.drain(..self.working.len() - cap);
                    }
                    self.solve_working();
                }
            }
            _ => {}
        }
        self.seen = 0;
        self.violators = 0;
    }

    fn extract_store(&self) -> Vec<u64> {
        let d = self.cfg.dim;
        let pos = self.rng.get_word_pos();
        let mut out = vec![
            self.status.code(),
            self.pass,
            self.seen,
            self.n,
            self.violators,
            self.last_violated,
            self.passes_used,
            pos as u64,
            (pos >> 64) as u64,
            self.working.len() as u64,
            self.reservoir.len() as u64,
        ];
        match &self.x {
            Some(x) => out.extend(x.iter().map(|v| v.to_bits())),
            None => out.extend(std::iter::repeat_n(f64::NAN.to_bits(), d)),
        }
        push_rows(&mut out, &self.working);
        push_rows(&mut out, &self.reservoir);
        out
    }

    fn restore(&mut self, s: &[u64]) -> Result<()> {
        let d = self.cfg.dim;
        if s.len() < HEADER_WORDS + d {
            return Err(Error::InvalidInput("corrupt store: too short".into()));
        }
        let (w, r) = (s[9] as usize, s[10] as usize);
        if s.len() < HEADER_WORDS + d + (w + r) * (d + 1) {
            return Err(Error::InvalidInput("corrupt store: truncated rows".into()));
        }
        self.status = MultipassStatus::from_code(s[0])?;
        self.pass = s[1];
        self.seen = s[2];
        self.n = s[3];
        self.violators = s[4];
        self.last_violated = s[5];
        self.passes_used = s[6];
        self.rng.set_word_pos(s[7] as u128 | (s[8] as u128) << 64);
        let x: Vec<f64> = s[HEADER_WORDS..HEADER_WORDS + d].iter().map(|&b| f64::from_bits(b)).collect();
        self.x = if x.iter().all(|v| v.is_nan()) { None } else { Some(x) };
        let rows = &s[HEADER_WORDS + d..];
        self.working = read_rows(rows, w, d);
        self.reservoir = read_rows(&rows[w * (d + 1)..], r, d);
        Ok(())
    }

    fn output(&self) -> MultipassOutcome {
        MultipassOutcome {
            status: self.status,
            x: self.x.clone(),
            violated: self.last_violated as usize,
            n: self.n as usize,
            passes_used: self.passes_used as usize,
            working_set: self.working.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultipassResult {
    pub x: Vec<f64>,
    pub violated: usize,
    pub passes: usize,
    pub peak_store_words: usize,
}

/// Streams `constraints` until a point violating at most `εn` of them is
/// certified, or `max_passes` is spent.
pub fn multipass_lp_violate(constraints: &[Constraint], cfg: &MultipassConfig, max_passes: usize) -> Result<MultipassResult> {
    let mut alg = MultipassLp::new(cfg.clone())?;
    if let Some(c) = constraints.iter().find(|c| c.coeffs.len() != cfg.dim) {
        return Err(Error::DimensionMismatch { expected: cfg.dim, found: c.coeffs.len() });
    }
    let budget = cfg.store_words();
    let mut peak = 0;
    for _ in 0..max_passes {
        for c in constraints {
            alg.consume(c);
        }
        alg.finish_pass();
        let out = alg.output();
        let words = alg.extract_store().len();
        if words > budget {
            return Err(Error::StoreOverflow { declared: budget, actual: words });
        }
        peak = peak.max(words);
        match out.status {
            MultipassStatus::Done => {
                return Ok(MultipassResult {
                    x: out.x.expect("certified point"),
                    violated: out.violated,
                    passes: out.passes_used,
                    peak_store_words: peak,
                })
            }
            MultipassStatus::Infeasible => return Err(Error::Infeasible),
            MultipassStatus::EmptyStream => return Err(Error::InvalidInput("empty constraint stream".into())),
            _ => {}
        }
    }
    let target = (cfg.epsilon * constraints.len() as f64).floor() as usize;
    let violated = alg.output().violated;
    Err(Error::PassBudgetExhausted { passes: max_passes, violated, target })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opt::stream::{run_monolithic, stream_to_distributed, StreamAdapterConfig};

    /// Random halfspaces through a neighbourhood of a hidden interior point.
    fn feasible_stream(seed: u64, n: usize, d: usize) -> Vec<Constraint> {
        let mut rng = rng_for(seed, 77);
        let x0: Vec<f64> = (0..d).map(|_| rng.random_range(-0.5..0.5)).collect();
        (0..n)
            .map(|_| {
                let a: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                let b = crate::types::dot(&a, &x0) - rng.random_range(0.0..0.5);
                Constraint::new(a, b)
            })
            .collect()
    }

    fn brute_violations(cs: &[Constraint], x: &[f64]) -> usize {
        cs.iter().filter(|c| c.coeffs.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() < c.rhs - 1e-9 * (1.0 + c.rhs.abs())).count()
    }

    #[test]
    fn identical_constraints_take_two_passes() {
        let cs = vec![Constraint::new(vec![1.0, 1.0], 0.5); 40];
        let r = multipass_lp_violate(&cs, &MultipassConfig::new(2, 0.05, 1), 10).unwrap();
        assert_eq!(r.passes, 2);
        assert_eq!(r.violated, 0);
    }

    #[test]
    fn epsilon_one_accepts_first_solution() {
        let cs = feasible_stream(3, 300, 2);
        let mut cfg = MultipassConfig::new(2, 1.0, 5);
        cfg.sample_size = 3;
        let r = multipass_lp_violate(&cs, &cfg, 10).unwrap();
        assert_eq!(r.passes, 2);
    }

    #[test]
    fn five_hundred_halfspaces_in_the_plane() {
        for seed in 0..5 {
            let cs = feasible_stream(seed, 500, 2);
            let mut cfg = MultipassConfig::new(2, 0.05, seed);
            cfg.sample_size = 50;
            let r = multipass_lp_violate(&cs, &cfg, 20).unwrap();
            let brute = brute_violations(&cs, &r.x);
            assert_eq!(brute, r.violated);
            assert!(brute <= 25, "seed {seed}: {brute}");
            assert!(r.peak_store_words <= cfg.store_words());
        }
    }

    #[test]
    fn passes_after_certification_change_nothing() {
        let cs = feasible_stream(9, 200, 3);
        let cfg = MultipassConfig::new(3, 0.1, 2);
        let a = run_monolithic(MultipassLp::new(cfg.clone()).unwrap(), &cs, 8);
        let b = run_monolithic(MultipassLp::new(cfg).unwrap(), &cs, 12);
        assert_eq!(a.status, MultipassStatus::Done);
        assert_eq!(a, b);
    }

    #[test]
    fn infeasible_sample_is_reported() {
        let cs = vec![Constraint::new(vec![1.0], 0.5), Constraint::new(vec![-1.0], 0.5)];
        let err = multipass_lp_violate(&cs, &MultipassConfig::new(1, 0.1, 0), 5).unwrap_err();
        assert!(matches!(err, Error::Infeasible));
    }

    #[test]
    fn distributed_run_is_bit_identical() {
        let cs = feasible_stream(4, 240, 2);
        let mut cfg = MultipassConfig::new(2, 0.02, 11);
        cfg.sample_size = 20;
        let passes = 6;
        let mono = run_monolithic(MultipassLp::new(cfg.clone()).unwrap(), &cs, passes);
        let parts: Vec<Vec<Constraint>> = [0..17, 17..100, 100..101, 101..240].into_iter().map(|r| cs[r].to_vec()).collect();
        let adapter = StreamAdapterConfig { store_words: cfg.store_words(), passes, players: 4 };
        let run = stream_to_distributed(|| MultipassLp::new(cfg.clone()).unwrap(), &parts, &adapter).unwrap();
        assert_eq!(run.ledger.total_words(), (4 * passes * cfg.store_words()) as u64);
        let bits = |o: &MultipassOutcome| o.x.as_ref().map(|x| x.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        assert_eq!(bits(&run.output), bits(&mono));
        assert_eq!(run.output.violated, mono.violated);
        assert_eq!(run.output.passes_used, mono.passes_used);
    }
}
