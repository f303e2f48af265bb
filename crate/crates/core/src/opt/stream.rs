//! Running a multipass streaming algorithm across `k` players.
//!
//! Players take turns feeding their share of the stream through the
//! algorithm and pass the working store along; the store of `s` words goes
//! round the ring once per pass, so `r` passes cost `k·r·s` words. The hand-off
//! from the last player back to the first is charged too, since it either
//! starts the next pass or returns the final state to the first player.

use crate::comm::{CommLedger, Message, Network, Payload};
use crate::error::{Error, Result};

/// A streaming algorithm whose whole state fits in a word store.
pub trait StreamingAlgorithm {
    type Item;
    type Output;

    /// Upper bound on [`extract_store`](Self::extract_store) length.
    fn declared_store_words(&self) -> usize;

    fn consume(&mut self, item: &Self::Item);

    /// Called once at the end of every pass over the full stream.
    fn finish_pass(&mut self);

    fn extract_store(&self) -> Vec<u64>;

    /// Replaces the state with a store produced by `extract_store`,
    /// possibly followed by zero padding.
    fn restore(&mut self, store: &[u64]) -> Result<()>;

    fn output(&self) -> Self::Output;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamAdapterConfig {
    /// Words of working storage `s`; every hand-off is charged this much.
    pub store_words: usize,
    pub passes: usize,
    pub players: usize,
}

impl StreamAdapterConfig {
    fn validate(&self) -> Result<()> {
        if self.store_words == 0 || self.passes == 0 || self.players == 0 {
            return Err(Error::InvalidInput("store size, passes and players must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreamRun<O> {
    pub output: O,
    pub ledger: CommLedger,
    /// Largest store observed at any hand-off.
    pub peak_store_words: usize,
    pub handoffs: usize,
}

/// Runs `r` passes of the algorithm over the concatenation of `parts`,
/// with part `j` held by player `j + 1`.
pub fn stream_to_distributed<A, F>(
    init: F,
    parts: &[Vec<A::Item>],
    cfg: &StreamAdapterConfig,
) -> Result<StreamRun<A::Output>>
where
    A: StreamingAlgorithm,
    F: Fn() -> A,
{
    cfg.validate()?;
    let k = cfg.players;
    if parts.len() != k {
        return Err(Error::InvalidInput(format!("{k} players but {} stream parts", parts.len())));
    }
    let declared = init().declared_store_words();
    if declared > cfg.store_words {
        return Err(Error::StoreOverflow { declared: cfg.store_words, actual: declared });
    }
    let mut net = Network::new(k, None);
    let mut store: Option<Vec<u64>> = None;
    let mut peak = 0;
    let mut handoffs = 0;
    for _ in 0..cfg.passes {
        net.begin_round();
        for (j, items) in parts.iter().enumerate() {
            let mut alg = init();
            if let Some(s) = &store {
                alg.restore(s)?;
            }
            for item in items {
                alg.consume(item);
            }
            if j + 1 == k {
                alg.finish_pass();
            }
            let mut words = alg.extract_store();
            if words.len() > cfg.store_words {
                return Err(Error::StoreOverflow { declared: cfg.store_words, actual: words.len() });
            }
            peak = peak.max(words.len());
            if k > 1 {
                words.resize(cfg.store_words, 0);
                let (from, to) = (j + 1, (j + 1) % k + 1);
                net.send(Message::new(from, to, Payload::Store(words)))?;
                let Payload::Store(received) = net.expect(from, to) else {
                    unreachable!("stores travel as stores")
                };
                words = received;
                handoffs += 1;
            }
            store = Some(words);
        }
    }
    let mut last = init();
    if let Some(s) = &store {
        last.restore(s)?;
    }
    Ok(StreamRun { output: last.output(), ledger: net.into_ledger(), peak_store_words: peak, handoffs })
}

/// Runs `passes` passes over `items` in a single process.
pub fn run_monolithic<A: StreamingAlgorithm>(mut alg: A, items: &[A::Item], passes: usize) -> A::Output {
    for _ in 0..passes {
        for item in items {
            alg.consume(item);
        }
        alg.finish_pass();
    }
    alg.output()
}
