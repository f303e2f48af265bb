//! Soft-ε LP solving by multiplicative weights, plus its two-party protocol.
//!
//! With the objective level `z*` fixed, each iteration weights the hard
//! constraints by `pᵢ ∝ exp(−ε·mᵢ/(2ρ²))`, where `mᵢ` is the running sum of
//! `Aᵢx − bᵢ` and `ρ` the width, asks an oracle for a point of the soft set
//! `P ∩ {gᵀx = z*}` satisfying the single aggregated constraint
//! `Σ pᵢAᵢx ≥ Σ pᵢbᵢ`, and returns the average iterate. After
//! `4ρ² ln n / ε²` iterations every hard constraint holds to within `ε`.

use crate::comm::{Message, Network, Payload};
use crate::comm::CommLedger;
use crate::error::{Error, Result};
use crate::opt::lp::{lp_width, Constraint, LinearProgram};
use crate::opt::simplex::InequalityLp;
use crate::types::dot;

/// Relative tolerance on `gᵀx = z*` inside the oracle.
pub const OBJECTIVE_TOL: f64 = 5e-10;

/// Iteration multiplier that makes the soft-ε guarantee provable.
pub const DEFAULT_ITERATION_MULTIPLIER: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MwuLpConfig {
    pub epsilon: f64,
    /// Constant in front of `ρ² ln n / ε²`.
    pub iteration_multiplier: f64,
    /// Overrides the interval-arithmetic width when set.
    pub width: Option<f64>,
}

impl MwuLpConfig {
    pub fn new(epsilon: f64) -> Self {
        Self { epsilon, iteration_multiplier: DEFAULT_ITERATION_MULTIPLIER, width: None }
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidInput(format!("epsilon must lie in (0,1), got {}", self.epsilon)));
        }
        if !(self.iteration_multiplier > 0.0) {
            return Err(Error::InvalidInput("iteration multiplier must be positive".into()));
        }
        if let Some(w) = self.width {
            if !(w >= 1.0 && w.is_finite()) {
                return Err(Error::InvalidInput("width must be a finite value ≥ 1".into()));
            }
        }
        Ok(())
    }
}

/// `max(1, ceil(multiplier · ρ² · ln n / ε²))`.
pub fn iteration_count(width: f64, n: usize, epsilon: f64, multiplier: f64) -> usize {
    let t = (multiplier * width * width * (n.max(1) as f64).ln() / (epsilon * epsilon)).ceil();
    (t as usize).max(1)
}

/// Running state of the weight-keeping side.
#[derive(Debug, Clone, PartialEq)]
pub struct MwuLpState {
    /// `mᵢ(t) = Σ_{τ ≤ t} (Aᵢx(τ) − bᵢ)`.
    pub mistakes: Vec<f64>,
    /// Current weights, scaled so the largest is 1.
    pub probabilities: Vec<f64>,
    pub iterates: Vec<Vec<f64>>,
    pub rho_lp: f64,
    pub z_star_guess: f64,
    epsilon: f64,
}

impl MwuLpState {
    pub fn new(n: usize, rho_lp: f64, z_star_guess: f64, epsilon: f64) -> Self {
        Self {
            mistakes: vec![0.0; n],
            probabilities: vec![1.0; n],
            iterates: Vec::new(),
            rho_lp,
            z_star_guess,
            epsilon,
        }
    }

    /// Multiplicative step applied to the mistake totals.
    pub fn step(&self) -> f64 {
        self.epsilon / (2.0 * self.rho_lp * self.rho_lp)
    }

    fn refresh_probabilities(&mut self) {
        let floor = self.mistakes.iter().copied().fold(f64::INFINITY, f64::min);
        let step = self.step();
        for (p, m) in self.probabilities.iter_mut().zip(&self.mistakes) {
            *p = (-step * (m - floor)).exp();
        }
    }

    /// The single constraint `Σ pᵢAᵢx ≥ Σ pᵢbᵢ`, as `d` coefficients followed by the rhs.
    pub fn aggregate(&self, constraints: &[Constraint]) -> Vec<f64> {
        let d = constraints.first().map_or(0, |c| c.coeffs.len());
        let mut agg = vec![0.0; d + 1];
        for (c, p) in constraints.iter().zip(&self.probabilities) {
            for (a, v) in agg.iter_mut().zip(&c.coeffs) {
                *a += p * v;
            }
            agg[d] += p * c.rhs;
        }
        agg
    }

    pub fn record(&mut self, x: Vec<f64>, constraints: &[Constraint]) {
        for (m, c) in self.mistakes.iter_mut().zip(constraints) {
            *m += c.slack(&x);
        }
        self.iterates.push(x);
        self.refresh_probabilities();
    }

    pub fn average(&self) -> Vec<f64> {
        let Some(first) = self.iterates.first() else { return Vec::new() };
        let t = self.iterates.len() as f64;
        let mut sum = vec![0.0; first.len()];
        for x in &self.iterates {
            for (s, v) in sum.iter_mut().zip(x) {
                *s += v;
            }
        }
        sum.into_iter().map(|s| s / t).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MwuLpSolution {
    pub x_bar: Vec<f64>,
    pub z_guess: f64,
    pub iterations: usize,
    pub rho_lp: f64,
    /// `minᵢ (Aᵢx̄ − bᵢ)` over the weighted constraints.
    pub min_slack: f64,
    pub objective: f64,
    pub state: MwuLpState,
}

/// Finds a point of `box ∩ {gᵀx ≈ z} ∩ own constraints` maximizing the
/// aggregate `aᵀx`, and checks it meets `aᵀx ≥ β`.
///
/// Maximizing the aggregate rather than adding it as a row makes the
/// feasibility verdict insensitive to how tightly the halfspace binds.
fn oracle(soft: &LinearProgram, z: f64, aggregate: &[f64]) -> Result<Vec<f64>> {
    let d = soft.dim();
    let (coeffs, rhs) = aggregate.split_at(d);
    let rhs = rhs[0];
    let mut lp = InequalityLp::with_capacity(coeffs.iter().map(|v| -v).collect(), soft.len() + 2 * d + 2);
    soft.push_box(&mut lp);
    for c in &soft.constraints {
        lp.push_row(&c.coeffs, c.rhs);
    }
    let tol = OBJECTIVE_TOL * z.abs().max(1.0);
    let neg_g: Vec<f64> = soft.objective.iter().map(|v| -v).collect();
    lp.push_row(&soft.objective, z - tol);
    lp.push_row(&neg_g, -z - tol);
    let v = match lp.solve() {
        Ok(v) => v,
        Err(Error::Infeasible) => return Err(Error::GuessInfeasible { z }),
        Err(e) => return Err(e),
    };
    let scale = 1.0 + rhs.abs() + coeffs.iter().map(|c| c.abs()).sum::<f64>();
    if dot(coeffs, &v.x) < rhs - 1e-9 * scale {
        return Err(Error::GuessInfeasible { z });
    }
    Ok(v.x)
}

fn resolve_width(soft: &LinearProgram, weighted: &[Constraint], z: f64, cfg: &MwuLpConfig) -> Result<f64> {
    if let Some(w) = cfg.width {
        return Ok(w);
    }
    let probe = LinearProgram { constraints: weighted.to_vec(), ..soft.clone() };
    lp_width(&probe, z)
}

fn finish(soft: &LinearProgram, weighted: &[Constraint], z: f64, state: MwuLpState) -> MwuLpSolution {
    let x_bar = state.average();
    let min_slack = weighted.iter().map(|c| c.slack(&x_bar)).fold(f64::INFINITY, f64::min);
    MwuLpSolution {
        objective: soft.objective_value(&x_bar),
        iterations: state.iterates.len(),
        rho_lp: state.rho_lp,
        z_guess: z,
        min_slack,
        x_bar,
        state,
    }
}

/// Soft-ε solution at objective level `z_star`, or [`Error::GuessInfeasible`].
pub fn mwu_lp_solve(lp: &LinearProgram, z_star: f64, cfg: &MwuLpConfig) -> Result<MwuLpSolution> {
    cfg.validate()?;
    if lp.is_empty() {
        return Err(Error::InvalidInput("need at least one hard constraint".into()));
    }
    let soft = LinearProgram { constraints: Vec::new(), ..lp.clone() };
    let rho = resolve_width(&soft, &lp.constraints, z_star, cfg)?;
    let t = iteration_count(rho, lp.len(), cfg.epsilon, cfg.iteration_multiplier);
    let mut state = MwuLpState::new(lp.len(), rho, z_star, cfg.epsilon);
    for _ in 0..t {
        let agg = state.aggregate(&lp.constraints);
        let x = oracle(&soft, z_star, &agg)?;
        state.record(x, &lp.constraints);
    }
    Ok(finish(&soft, &lp.constraints, z_star, state))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub solution: MwuLpSolution,
    /// Every guess tried, with whether it was accepted.
    pub probes: Vec<(f64, bool)>,
}

/// Bisects the objective level over `[lo, hi]` and keeps the smallest accepted guess.
///
/// The upper end is probed first; the search stops once the bracket is no
/// wider than `tol`, so it makes `1 + ceil(log₂((hi − lo)/tol))` probes.
pub fn lp_binary_search(lp: &LinearProgram, cfg: &MwuLpConfig, range: (f64, f64), tol: f64) -> Result<SearchOutcome> {
    let (mut lo, mut hi) = range;
    if !(lo <= hi) || !(tol > 0.0) {
        return Err(Error::InvalidInput("need lo ≤ hi and a positive tolerance".into()));
    }
    let mut probes = Vec::new();
    let mut best = match mwu_lp_solve(lp, hi, cfg) {
        Ok(s) => {
            probes.push((hi, true));
            s
        }
        Err(Error::GuessInfeasible { .. }) => return Err(Error::BracketExhausted { lo: range.0, hi: range.1 }),
        Err(e) => return Err(e),
    };
    while hi - lo > tol {
        let mid = lo + (hi - lo) / 2.0;
        match mwu_lp_solve(lp, mid, cfg) {
            Ok(s) => {
                probes.push((mid, true));
                best = s;
                hi = mid;
            }
            Err(Error::GuessInfeasible { .. }) => {
                probes.push((mid, false));
                lo = mid;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(SearchOutcome { solution: best, probes })
}

/// Party holding the soft set and its own exact constraints.
pub const LP_SOLVER_PARTY: usize = 1;
/// Party holding the weighted hard constraints.
pub const LP_WEIGHT_PARTY: usize = 2;

/// Two-party protocol: the weight keeper sends the aggregated constraint
/// (`d + 1` words) and the solver answers with its iterate (`d` words).
///
/// `solver_side` carries the box, the objective and any constraints the
/// solver enforces exactly; `weighted` are the constraints held by the
/// other party. Both know the box and `z_star`, so the width and the
/// iteration count need no messages.
pub fn two_party_lp(
    solver_side: &LinearProgram,
    weighted: &[Constraint],
    z_star: f64,
    cfg: &MwuLpConfig,
) -> Result<(MwuLpSolution, CommLedger)> {
    cfg.validate()?;
    if weighted.is_empty() {
        return Err(Error::InvalidInput("the weight-keeping party needs at least one constraint".into()));
    }
    let d = solver_side.dim();
    if let Some(c) = weighted.iter().find(|c| c.coeffs.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, found: c.coeffs.len() });
    }
    let rho = resolve_width(solver_side, weighted, z_star, cfg)?;
    let t = iteration_count(rho, weighted.len(), cfg.epsilon, cfg.iteration_multiplier);
    let mut net = Network::new(2, None);
    let mut state = MwuLpState::new(weighted.len(), rho, z_star, cfg.epsilon);
    for _ in 0..t {
        net.begin_round();
        let agg = state.aggregate(weighted);
        net.send(Message::new(LP_WEIGHT_PARTY, LP_SOLVER_PARTY, Payload::Scalars(agg)))?;
        let Payload::Scalars(received) = net.expect(LP_WEIGHT_PARTY, LP_SOLVER_PARTY) else {
            unreachable!("aggregate travels as scalars")
        };
        let x = oracle(solver_side, z_star, &received)?;
        net.send(Message::new(LP_SOLVER_PARTY, LP_WEIGHT_PARTY, Payload::Scalars(x)))?;
        let Payload::Scalars(x) = net.expect(LP_SOLVER_PARTY, LP_WEIGHT_PARTY) else {
            unreachable!("iterate travels as scalars")
        };
        state.record(x, weighted);
    }
    Ok((finish(solver_side, weighted, z_star, state), net.into_ledger()))
}
