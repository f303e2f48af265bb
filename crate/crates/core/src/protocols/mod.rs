//! Classification protocols: weighted sampling for two and `k` parties,
//! and the baselines it is compared against.
//!
//! Party 1 (`A` in the two-party case) is the coordinator. Every round it
//! trains on its own data plus all samples received so far, sends the
//! hypothesis to the other parties, and they multiply the weight of every
//! point it gets wrong by `1 + ρ` before sending back a weighted sample.
//! The final classifier is the majority vote of the per-round hypotheses.

mod baselines;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::comm::{CommLedger, CostClass, Message, Network, Party, PartyId, Payload};
use crate::error::{Error, Result};
use crate::learner::{train_report, LearnerConfig, LearnerMode};
use crate::sampling::{proportional_allocation_with, rng_for, round_sample_size, weighted_sample_indices};
use crate::types::{accuracy, weighted_error, LabeledPoint, LinearClassifier, MajorityEnsemble, WeightedDataset};

pub use baselines::{
    naive_words, rand_sample_size, run_maxmarg, run_naive, run_rand, run_randemp, run_voting, RANDEMP_FACTOR,
};

pub const DEFAULT_RHO: f64 = 0.75;
pub const DEFAULT_C: f64 = 0.2;
pub const DEFAULT_SAMPLE_SIZE: usize = 100;

/// Stream id of the coordinator's allocation draws; workers use their party id.
const ALLOCATION_STREAM: u64 = 0;

/// `ceil(5 · log₂(1/ε))`.
pub fn theory_rounds(epsilon: f64) -> usize {
    (5.0 * (1.0 / epsilon).log2()).ceil() as usize
}

/// `ceil(5 · log₂(1/ε) · log₂log₂(1/ε))`, the round count used in experiments.
pub fn empirical_rounds(epsilon: f64) -> usize {
    let l = (1.0 / epsilon).log2();
    (5.0 * l * l.log2().max(1.0)).ceil() as usize
}

/// How the per-round sample is split among the non-coordinators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Allocation {
    /// `s` draws in total, split by each party's share of the total weight.
    Proportional,
    /// Every party sends `s` points drawn from its own weights.
    PerParty,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MwuConfig {
    pub epsilon: f64,
    pub rho: f64,
    pub c: f64,
    pub sample_size_per_round: usize,
    pub rounds_override: Option<usize>,
    pub early_stop: bool,
    /// Accuracy the early stop and MaxMarg aim at, times `1 − ε`; 1 when unset.
    pub accuracy_reference: Option<f64>,
    pub allocation: Allocation,
    pub learner: LearnerConfig,
    pub seed: u64,
}

impl MwuConfig {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            rho: DEFAULT_RHO,
            c: DEFAULT_C,
            sample_size_per_round: DEFAULT_SAMPLE_SIZE,
            rounds_override: None,
            early_stop: false,
            accuracy_reference: None,
            allocation: Allocation::Proportional,
            learner: LearnerConfig::best_effort(),
            seed: 0,
        }
    }

    /// Sample size `25d·log₂log₂(1/ε)` per round and a strictly separating learner.
    pub fn guarantee(epsilon: f64, dim: usize) -> Self {
        Self {
            sample_size_per_round: round_sample_size(dim, epsilon, 1.0),
            learner: LearnerConfig::hard(),
            ..Self::new(epsilon)
        }
    }

    /// Settings of the experimental comparison: 100 samples per party,
    /// the longer empirical round count.
    pub fn empirical(epsilon: f64) -> Self {
        Self {
            rounds_override: Some(empirical_rounds(epsilon)),
            allocation: Allocation::PerParty,
            ..Self::new(epsilon)
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn rounds(&self) -> usize {
        self.rounds_override.unwrap_or_else(|| theory_rounds(self.epsilon))
    }

    pub fn target_accuracy(&self) -> f64 {
        (1.0 - self.epsilon) * self.accuracy_reference.unwrap_or(1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let open = |v: f64| v > 0.0 && v < 1.0;
        if !open(self.epsilon) {
            return Err(Error::InvalidInput(format!("epsilon must lie in (0,1), got {}", self.epsilon)));
        }
        if !open(self.rho) {
            return Err(Error::InvalidInput(format!("rho must lie in (0,1), got {}", self.rho)));
        }
        if !open(self.c) {
            return Err(Error::InvalidInput(format!("c must lie in (0,1), got {}", self.c)));
        }
        if self.sample_size_per_round == 0 {
            return Err(Error::InvalidInput("sample size per round must be positive".into()));
        }
        if self.rounds_override == Some(0) {
            return Err(Error::InvalidInput("round count must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolResult {
    pub ensemble: MajorityEnsemble,
    /// Unweighted accuracy on the union of all parties' data.
    pub train_accuracy: f64,
    /// Weighted error of each round's hypothesis on the non-coordinator points.
    pub per_round_weighted_error: Vec<f64>,
    /// Total non-coordinator weight before round 1 and after every round.
    pub potential_trace: Vec<f64>,
    /// How often each non-coordinator point was misclassified, in party order.
    pub mistake_counts: Vec<u32>,
    pub final_weights: Vec<f64>,
    pub ledger: CommLedger,
    pub rounds_used: usize,
    /// Rounds whose training set could not be separated.
    pub inseparable_rounds: usize,
}

impl ProtocolResult {
    fn single(classifier: LinearClassifier, parties: &[Party], ledger: CommLedger, rounds: usize) -> Self {
        let ensemble = MajorityEnsemble::single(classifier);
        Self::from_ensemble(ensemble, parties, ledger, rounds)
    }

    fn from_ensemble(ensemble: MajorityEnsemble, parties: &[Party], ledger: CommLedger, rounds: usize) -> Self {
        let train_accuracy = accuracy(&ensemble, parties.iter().map(|p| &p.data));
        Self {
            ensemble,
            train_accuracy,
            per_round_weighted_error: Vec::new(),
            potential_trace: Vec::new(),
            mistake_counts: Vec::new(),
            final_weights: Vec::new(),
            ledger,
            rounds_used: rounds,
            inseparable_rounds: 0,
        }
    }
}

/// Outcome of checking a run against the potential argument.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialCheck {
    /// Rounds with weighted error `≤ c` checked for `φᵗ⁺¹ ≤ (1 + cρ)φᵗ`.
    pub checked_rounds: usize,
    pub growth_violations: usize,
    /// Points misclassified by at least half the rounds.
    pub majority_misclassified: usize,
    /// `|S|·(1+ρ)^{⌈T/2⌉} ≤ φᵀ`.
    pub majority_bound_holds: bool,
}

pub fn check_potential(result: &ProtocolResult, rho: f64, c: f64) -> PotentialCheck {
    let phi = &result.potential_trace;
    let mut checked = 0;
    let mut violations = 0;
    for (t, &err) in result.per_round_weighted_error.iter().enumerate() {
        if err <= c && t + 1 < phi.len() {
            checked += 1;
            if phi[t + 1] > phi[t] * (1.0 + c * rho) * (1.0 + 1e-12) {
                violations += 1;
            }
        }
    }
    let half = result.rounds_used.div_ceil(2) as u32;
    let s = result.mistake_counts.iter().filter(|&&m| m >= half).count();
    let last = phi.last().copied().unwrap_or(0.0);
    PotentialCheck {
        checked_rounds: checked,
        growth_violations: violations,
        majority_misclassified: s,
        majority_bound_holds: s as f64 * (1.0 + rho).powi(half as i32) <= last,
    }
}

fn check_parties(parties: &[Party], min: usize) -> Result<usize> {
    let dim = check_shapes(parties, min)?;
    if parties.iter().any(|p| p.data.is_empty()) {
        return Err(Error::EmptyDataset);
    }
    Ok(dim)
}

/// Equal dimensions, a nonempty coordinator and at least one nonempty worker.
fn check_shapes(parties: &[Party], min: usize) -> Result<usize> {
    if parties.len() < min {
        return Err(Error::InvalidInput(format!("need at least {min} parties, got {}", parties.len())));
    }
    let dim = parties[0].data.dim();
    if let Some(p) = parties.iter().find(|p| p.data.dim() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, found: p.data.dim() });
    }
    if parties[0].data.is_empty() || (parties.len() > 1 && parties[1..].iter().all(|p| p.data.is_empty())) {
        return Err(Error::EmptyDataset);
    }
    Ok(dim)
}

/// Trains with the configured learner; an inseparable set in hard mode is
/// counted and retrained best-effort.
fn train_round(train: &WeightedDataset, cfg: &MwuConfig, round: usize, inseparable: &mut usize) -> Result<LinearClassifier> {
    let learner = cfg.learner.with_seed(cfg.seed.wrapping_add(round as u64));
    match train_report(train, &learner) {
        Ok(t) => Ok(t.classifier),
        Err(Error::Inseparable { .. }) if learner.mode == LearnerMode::HardSeparating => {
            *inseparable += 1;
            let fallback = LearnerConfig { mode: LearnerMode::BestEffort, ..learner };
            Ok(train_report(train, &fallback)?.classifier)
        }
        Err(e) => Err(e),
    }
}

/// Multiplies the weight of every misclassified point by `1 + ρ`.
fn reweight(ds: &mut WeightedDataset, h: &LinearClassifier, rho: f64, counts: &mut [u32]) {
    for i in 0..ds.len() {
        if h.predict(&ds.point(i).coords) != ds.point(i).label {
            ds.scale_weight(i, 1.0 + rho);
            counts[i] += 1;
        }
    }
}

fn take_points(payload: Payload) -> Vec<LabeledPoint> {
    match payload {
        Payload::Points(p) => p,
        other => unreachable!("expected points, got {other:?}"),
    }
}

fn take_classifier(payload: Payload) -> LinearClassifier {
    match payload {
        Payload::Classifier(c) => c,
        other => unreachable!("expected a classifier, got {other:?}"),
    }
}

/// Two-party weighted sampling between `a` (trains) and `b` (keeps weights).
pub fn run_two_party(a: &Party, b: &Party, cfg: &MwuConfig) -> Result<ProtocolResult> {
    cfg.validate()?;
    let pair = [a.clone(), b.clone()];
    let dim = check_parties(&pair, 2)?;
    let (ida, idb): (PartyId, PartyId) = (1, 2);
    let mut net = Network::new(2, Some(dim));
    let mut train = a.data.unweighted();
    let mut weights = b.data.unweighted();
    let mut counts = vec![0u32; weights.len()];
    let mut rng = rng_for(cfg.seed, idb as u64);
    let mut members = Vec::new();
    let mut errors = Vec::new();
    let mut phi = vec![weights.total_weight()];
    let mut inseparable = 0;

    for t in 0..cfg.rounds() {
        net.begin_round();
        let h = train_round(&train, cfg, t, &mut inseparable)?;
        net.send(Message::new(ida, idb, Payload::Classifier(h)))?;
        let h = take_classifier(net.expect(ida, idb));
        errors.push(weighted_error(&h, &weights)?);
        reweight(&mut weights, &h, cfg.rho, &mut counts);
        phi.push(weights.total_weight());
        let idx = weighted_sample_indices(&weights, cfg.sample_size_per_round, &mut rng)?;
        let sample = idx.into_iter().map(|i| weights.point(i).clone()).collect();
        net.send(Message::new(idb, ida, Payload::Points(sample)))?;
        train.extend_from(take_points(net.expect(idb, ida)))?;
        members.push(h);
        if cfg.early_stop {
            let e = MajorityEnsemble::new(members.clone())?;
            net.send(Message::control(idb, ida, Payload::Scalar(mistakes(&e, &b.data) as f64)))?;
            net.expect(idb, ida);
            if accuracy(&e, [&a.data, &b.data]) >= cfg.target_accuracy() {
                break;
            }
        }
    }
    let rounds = members.len();
    let mut result = ProtocolResult::from_ensemble(MajorityEnsemble::new(members)?, &pair, net.into_ledger(), rounds);
    result.per_round_weighted_error = errors;
    result.potential_trace = phi;
    result.mistake_counts = counts;
    result.final_weights = weights.weights().to_vec();
    result.inseparable_rounds = inseparable;
    Ok(result)
}

fn mistakes(e: &MajorityEnsemble, ds: &WeightedDataset) -> usize {
    ds.points().iter().filter(|p| e.predict(&p.coords) != p.label).count()
}

/// `k`-party weighted sampling coordinated by party 1.
///
/// Workers may hold no data; they then contribute nothing to the samples.
///
/// With proportional allocation and `k > 2` each worker reports its total
/// weight and is told its sample count every round; these `2(k−1)` scalars
/// are metered as control traffic.
pub fn run_k_party(parties: &[Party], cfg: &MwuConfig) -> Result<ProtocolResult> {
    cfg.validate()?;
    let dim = check_shapes(parties, 2)?;
    let k = parties.len();
    let coord: PartyId = 1;
    let workers: Vec<PartyId> = (2..=k).collect();
    let mut net = Network::new(k, Some(dim));
    let mut train = parties[0].data.unweighted();
    let mut weights: Vec<WeightedDataset> = parties[1..].iter().map(|p| p.data.unweighted()).collect();
    let mut counts: Vec<Vec<u32>> = weights.iter().map(|w| vec![0; w.len()]).collect();
    let mut rngs: Vec<_> = workers.iter().map(|&id| rng_for(cfg.seed, id as u64)).collect();
    let mut alloc_rng = rng_for(cfg.seed, ALLOCATION_STREAM);
    let potential = |w: &[WeightedDataset]| w.iter().map(WeightedDataset::total_weight).sum::<f64>();
    let mut members = Vec::new();
    let mut errors = Vec::new();
    let mut phi = vec![potential(&weights)];
    let mut inseparable = 0;
    let s = cfg.sample_size_per_round;

    for t in 0..cfg.rounds() {
        net.begin_round();
        let h = train_round(&train, cfg, t, &mut inseparable)?;
        net.broadcast(coord, workers.iter().copied(), &Payload::Classifier(h.clone()), CostClass::Protocol)?;
        let (mut wrong, mut total) = (0.0, 0.0);
        for (j, &id) in workers.iter().enumerate() {
            let h = take_classifier(net.expect(coord, id));
            let w = &weights[j];
            if w.is_empty() {
                continue;
            }
            wrong += weighted_error(&h, w)? * w.total_weight();
            total += w.total_weight();
            reweight(&mut weights[j], &h, cfg.rho, &mut counts[j]);
        }
        errors.push(wrong / total);
        phi.push(potential(&weights));

        let shares = match cfg.allocation {
            Allocation::PerParty => weights.iter().map(|w| if w.is_empty() { 0 } else { s }).collect(),
            Allocation::Proportional if workers.len() == 1 => vec![s],
            Allocation::Proportional => {
                for (j, &id) in workers.iter().enumerate() {
                    net.send(Message::control(id, coord, Payload::Scalar(weights[j].total_weight())))?;
                }
                let totals: Vec<f64> = workers
                    .iter()
                    .map(|&id| match net.expect(id, coord) {
                        Payload::Scalar(v) => v,
                        other => unreachable!("expected a weight, got {other:?}"),
                    })
                    .collect();
                let alloc = proportional_allocation_with(&totals, s, &mut alloc_rng)?;
                for (j, &id) in workers.iter().enumerate() {
                    net.send(Message::control(coord, id, Payload::Scalar(alloc[j] as f64)))?;
                    net.expect(coord, id);
                }
                alloc
            }
        };
        for (j, &id) in workers.iter().enumerate() {
            if shares[j] == 0 {
                continue;
            }
            let idx = weighted_sample_indices(&weights[j], shares[j], &mut rngs[j])?;
            let sample = idx.into_iter().map(|i| weights[j].point(i).clone()).collect();
            net.send(Message::new(id, coord, Payload::Points(sample)))?;
            train.extend_from(take_points(net.expect(id, coord)))?;
        }
        members.push(h);
        if cfg.early_stop {
            let e = MajorityEnsemble::new(members.clone())?;
            for (j, &id) in workers.iter().enumerate() {
                net.send(Message::control(id, coord, Payload::Scalar(mistakes(&e, &parties[j + 1].data) as f64)))?;
                net.expect(id, coord);
            }
            if accuracy(&e, parties.iter().map(|p| &p.data)) >= cfg.target_accuracy() {
                break;
            }
        }
    }
    let rounds = members.len();
    let mut result = ProtocolResult::from_ensemble(MajorityEnsemble::new(members)?, parties, net.into_ledger(), rounds);
    result.per_round_weighted_error = errors;
    result.potential_trace = phi;
    result.mistake_counts = counts.concat();
    result.final_weights = weights.iter().flat_map(|w| w.weights().iter().copied()).collect();
    result.inseparable_rounds = inseparable;
    Ok(result)
}

/// Weighted sampling with every party sending its own sample each round.
pub fn run_mwu(parties: &[Party], cfg: &MwuConfig) -> Result<ProtocolResult> {
    run_k_party(parties, &MwuConfig { allocation: Allocation::PerParty, early_stop: false, ..*cfg })
}

/// [`run_mwu`] stopped as soon as the ensemble reaches the target training accuracy.
pub fn run_mwuemp(parties: &[Party], cfg: &MwuConfig) -> Result<ProtocolResult> {
    run_k_party(parties, &MwuConfig { allocation: Allocation::PerParty, early_stop: true, ..*cfg })
}

/// Closed-form protocol words of [`run_mwu`]: `((d+1)s + (d+1))(k−1)` per round.
pub fn mwu_words(k: usize, dim: usize, sample_size: usize, rounds: usize) -> u64 {
    let (k, d, s, t) = (k as u64, dim as u64, sample_size as u64, rounds as u64);
    ((d + 1) * s + (d + 1)) * (k - 1) * t
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Naive,
    Voting,
    Rand,
    RandEmp,
    MaxMarg,
    Mwu,
    MwuEmp,
    #[serde(rename = "kparty_mwu")]
    KPartyMwu,
}

impl Protocol {
    pub const ALL: [Protocol; 8] = [
        Protocol::Naive,
        Protocol::Voting,
        Protocol::Rand,
        Protocol::RandEmp,
        Protocol::MaxMarg,
        Protocol::Mwu,
        Protocol::MwuEmp,
        Protocol::KPartyMwu,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Naive => "naive",
            Protocol::Voting => "voting",
            Protocol::Rand => "rand",
            Protocol::RandEmp => "randemp",
            Protocol::MaxMarg => "maxmarg",
            Protocol::Mwu => "mwu",
            Protocol::MwuEmp => "mwuemp",
            Protocol::KPartyMwu => "kparty_mwu",
        }
    }

    pub fn run(self, parties: &[Party], cfg: &MwuConfig) -> Result<ProtocolResult> {
        match self {
            Protocol::Naive => run_naive(parties, cfg),
            Protocol::Voting => run_voting(parties, cfg),
            Protocol::Rand => run_rand(parties, cfg),
            Protocol::RandEmp => run_randemp(parties, cfg),
            Protocol::MaxMarg => run_maxmarg(parties, cfg),
            Protocol::Mwu => run_mwu(parties, cfg),
            Protocol::MwuEmp => run_mwuemp(parties, cfg),
            Protocol::KPartyMwu => run_k_party(parties, cfg),
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('-', "_");
        Protocol::ALL
            .into_iter()
            .find(|p| p.name() == key)
            .ok_or_else(|| Error::UnknownProtocol(s.to_string()))
    }
}
