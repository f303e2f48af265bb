//! Baselines: ship everything, vote, uniform samples, and support-point exchange.

use std::collections::HashSet;

use rand::Rng;

use super::{check_parties, take_points, MwuConfig, ProtocolResult};
use crate::comm::{CostClass, Message, Network, Party, PartyId, Payload};
use crate::error::Result;
use crate::learner::{support_set, train};
use crate::sampling::{rng_for, sample_size, SampleSizeParams};
use crate::types::{accuracy, LabeledPoint, MajorityEnsemble, WeightedDataset};

/// Points per worker in the cheap uniform-sampling baseline, as a multiple of `d`.
pub const RANDEMP_FACTOR: usize = 9;

/// `(d+1) Σᵢ₌₂ᵏ |Dᵢ|`.
pub fn naive_words(parties: &[Party]) -> u64 {
    parties.iter().skip(1).map(|p| (p.data.dim() as u64 + 1) * p.data.len() as u64).sum()
}

/// Uniform sample per worker: the ε-net size for VC dimension `d`, constant 1.
pub fn rand_sample_size(epsilon: f64, dim: usize) -> Result<usize> {
    sample_size(&SampleSizeParams::new(epsilon, dim))
}

/// Every worker sends all its points; the coordinator trains on the union.
pub fn run_naive(parties: &[Party], cfg: &MwuConfig) -> Result<ProtocolResult> {
    let dim = check_parties(parties, 1)?;
    let mut net = Network::new(parties.len(), Some(dim));
    net.begin_round();
    let mut all = parties[0].data.unweighted();
    for p in &parties[1..] {
        net.send(Message::new(p.id, 1, Payload::Points(p.data.points().to_vec())))?;
        all.extend_from(take_points(net.expect(p.id, 1)))?;
    }
    let h = train(&all, &cfg.learner.with_seed(cfg.seed))?;
    Ok(ProtocolResult::single(h, parties, net.into_ledger(), 1))
}

/// Every party trains locally; workers send their classifiers and all `k` vote.
pub fn run_voting(parties: &[Party], cfg: &MwuConfig) -> Result<ProtocolResult> {
    let dim = check_parties(parties, 1)?;
    let mut net = Network::new(parties.len(), Some(dim));
    net.begin_round();
    let learner = cfg.learner.with_seed(cfg.seed);
    let mut members = vec![train(&parties[0].data.unweighted(), &learner)?];
    for p in &parties[1..] {
        let h = train(&p.data.unweighted(), &learner)?;
        net.send(Message::new(p.id, 1, Payload::Classifier(h)))?;
        match net.expect(p.id, 1) {
            Payload::Classifier(h) => members.push(h),
            other => unreachable!("expected a classifier, got {other:?}"),
        }
    }
    Ok(ProtocolResult::from_ensemble(MajorityEnsemble::new(members)?, parties, net.into_ledger(), 1))
}

fn uniform_sample_run(parties: &[Party], cfg: &MwuConfig, per_worker: usize) -> Result<ProtocolResult> {
    let dim = check_parties(parties, 1)?;
    let mut net = Network::new(parties.len(), Some(dim));
    net.begin_round();
    let mut all = parties[0].data.unweighted();
    for p in &parties[1..] {
        let mut rng = rng_for(cfg.seed, p.id as u64);
        let n = p.data.len();
        let sample: Vec<LabeledPoint> = (0..per_worker).map(|_| p.data.point(rng.random_range(0..n)).clone()).collect();
        net.send(Message::new(p.id, 1, Payload::Points(sample)))?;
        all.extend_from(take_points(net.expect(p.id, 1)))?;
    }
    let h = train(&all, &cfg.learner.with_seed(cfg.seed))?;
    Ok(ProtocolResult::single(h, parties, net.into_ledger(), 1))
}

/// Each worker sends an ε-net-sized uniform sample (with replacement).
pub fn run_rand(parties: &[Party], cfg: &MwuConfig) -> Result<ProtocolResult> {
    cfg.validate()?;
    let dim = check_parties(parties, 1)?;
    uniform_sample_run(parties, cfg, rand_sample_size(cfg.epsilon, dim)?)
}

/// Each worker sends `9d` uniform points.
pub fn run_randemp(parties: &[Party], cfg: &MwuConfig) -> Result<ProtocolResult> {
    let dim = check_parties(parties, 1)?;
    uniform_sample_run(parties, cfg, RANDEMP_FACTOR * dim)
}

/// Own points of `own` that are support points of `h` on `own ∪ extra`.
fn own_support(own: &WeightedDataset, extra: &[LabeledPoint], cfg: &MwuConfig, round: usize) -> Result<Vec<usize>> {
    let mut set = own.unweighted();
    set.extend_from(extra.iter().cloned())?;
    let h = train(&set, &cfg.learner.with_seed(cfg.seed.wrapping_add(round as u64)))?;
    Ok(support_set(&set, &h, cfg.learner.margin_tolerance)?.into_iter().filter(|&i| i < own.len()).collect())
}

/// Iterative exchange of maximum-margin support points.
///
/// Each round the coordinator sends its support points to every worker and
/// each worker answers with its own, everyone training on what they have
/// received. Stops once the coordinator's classifier reaches the target
/// accuracy, once the words spent reach the cost of shipping everything, or
/// once a round brings nobody a point they had not already seen.
pub fn run_maxmarg(parties: &[Party], cfg: &MwuConfig) -> Result<ProtocolResult> {
    cfg.validate()?;
    let dim = check_parties(parties, 1)?;
    let k = parties.len();
    let workers: Vec<PartyId> = (2..=k).collect();
    let budget = naive_words(parties);
    let mut net = Network::new(k, Some(dim));
    let coord = &parties[0].data;
    let mut at_coord: Vec<LabeledPoint> = Vec::new();
    let mut at_coord_seen: HashSet<(usize, usize)> = HashSet::new();
    let mut at_worker_seen: HashSet<usize> = HashSet::new();
    let learner = |r: usize| cfg.learner.with_seed(cfg.seed.wrapping_add(r as u64));
    let mut train_set = coord.unweighted();
    let mut h = train(&train_set, &learner(0))?;
    let mut rounds = 0;
    if k == 1 {
        return Ok(ProtocolResult::single(h, parties, net.into_ledger(), rounds));
    }

    loop {
        rounds += 1;
        net.begin_round();
        let sp1 = own_support(coord, &at_coord, cfg, rounds)?;
        let fresh_down = sp1.iter().any(|i| !at_worker_seen.contains(i));
        at_worker_seen.extend(sp1.iter().copied());
        let down = Payload::Points(sp1.iter().map(|&i| coord.point(i).clone()).collect());
        net.broadcast(1, workers.iter().copied(), &down, CostClass::Protocol)?;
        let mut fresh_up = false;
        for (j, &id) in workers.iter().enumerate() {
            net.expect(1, id);
            let own = &parties[j + 1].data;
            let spi = own_support(own, &coord_points(coord, &at_worker_seen), cfg, rounds)?;
            let pts: Vec<LabeledPoint> = spi.iter().map(|&i| own.point(i).clone()).collect();
            net.send(Message::new(id, 1, Payload::Points(pts)))?;
            let got = take_points(net.expect(id, 1));
            for (&i, p) in spi.iter().zip(got) {
                if at_coord_seen.insert((j, i)) {
                    fresh_up = true;
                    at_coord.push(p);
                }
            }
        }
        train_set = coord.unweighted();
        train_set.extend_from(at_coord.iter().cloned())?;
        h = train(&train_set, &learner(rounds))?;
        let acc = accuracy(&MajorityEnsemble::single(h.clone()), parties.iter().map(|p| &p.data));
        if acc >= cfg.target_accuracy() || net.ledger().total_words() >= budget || !(fresh_down || fresh_up) {
            break;
        }
    }
    Ok(ProtocolResult::single(h, parties, net.into_ledger(), rounds))
}

fn coord_points(coord: &WeightedDataset, seen: &HashSet<usize>) -> Vec<LabeledPoint> {
    let mut idx: Vec<usize> = seen.iter().copied().collect();
    idx.sort_unstable();
    idx.into_iter().map(|i| coord.point(i).clone()).collect()
}
