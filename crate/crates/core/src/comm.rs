//! In-memory message passing between parties with a word-exact ledger.
//!
//! Costs follow the word model: a point in `d` dimensions is `d + 1` words
//! (coordinates plus label), a hyperplane is `d + 1` words (normal plus
//! offset), a scalar is one word and an opaque store is as long as it says.
//! Messages marked [`CostClass::Control`] (dataset sizes, weight totals,
//! per-party sample counts) are metered in a separate column so protocol
//! totals line up with their closed-form costs.

use std::collections::{BTreeMap, VecDeque};
use std::io::Write;

use crate::error::{Error, Result};
use crate::types::{LabeledPoint, LinearClassifier, WeightedDataset};

pub type PartyId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Coordinator,
    Worker,
}

#[derive(Debug, Clone)]
pub struct Party {
    pub id: PartyId,
    pub data: WeightedDataset,
    pub role: Role,
}

impl Party {
    pub fn new(id: PartyId, data: WeightedDataset, role: Role) -> Self {
        Self { id, data, role }
    }

    /// Party 1 coordinates, everyone else works. Ids are 1-based.
    pub fn from_datasets(datasets: Vec<WeightedDataset>) -> Vec<Party> {
        datasets
            .into_iter()
            .enumerate()
            .map(|(i, data)| {
                let role = if i == 0 { Role::Coordinator } else { Role::Worker };
                Party::new(i + 1, data, role)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Points(Vec<LabeledPoint>),
    Classifier(LinearClassifier),
    Scalar(f64),
    Scalars(Vec<f64>),
    Store(Vec<u64>),
}

impl Payload {
    /// Words needed to transmit this payload.
    pub fn word_cost(&self) -> u64 {
        match self {
            Payload::Points(points) => points.iter().map(|p| p.dim() as u64 + 1).sum(),
            Payload::Classifier(c) => c.dim() as u64 + 1,
            Payload::Scalar(_) => 1,
            Payload::Scalars(v) => v.len() as u64,
            Payload::Store(words) => words.len() as u64,
        }
    }

    fn check_dim(&self, dim: Option<usize>) -> Result<()> {
        let Some(expected) = dim else { return Ok(()) };
        let found = match self {
            Payload::Points(points) => points.iter().map(|p| p.dim()).find(|&d| d != expected),
            Payload::Classifier(c) => Some(c.dim()).filter(|&d| d != expected),
            _ => None,
        };
        match found {
            Some(found) => Err(Error::DimensionMismatch { expected, found }),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CostClass {
    #[default]
    Protocol,
    Control,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub sender: PartyId,
    pub receiver: PartyId,
    pub payload: Payload,
    pub class: CostClass,
}

impl Message {
    pub fn new(sender: PartyId, receiver: PartyId, payload: Payload) -> Self {
        Self { sender, receiver, payload, class: CostClass::Protocol }
    }

    pub fn control(sender: PartyId, receiver: PartyId, payload: Payload) -> Self {
        Self { sender, receiver, payload, class: CostClass::Control }
    }

    pub fn word_cost(&self) -> u64 {
        self.payload.word_cost()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Receipt {
    /// Position of the message in the sender→receiver channel.
    pub sequence: u64,
    pub words: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LedgerEntry {
    pub round: usize,
    pub sender: PartyId,
    pub receiver: PartyId,
    pub words: u64,
    pub class: CostClass,
}

/// Word counts for a simulation. Only ever grows.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CommLedger {
    total_words: u64,
    control_words: u64,
    per_round: Vec<u64>,
    per_pair: BTreeMap<(PartyId, PartyId), u64>,
    entries: Vec<LedgerEntry>,
}

impl CommLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Protocol words, excluding control traffic.
    pub fn total_words(&self) -> u64 {
        self.total_words
    }

    pub fn control_words(&self) -> u64 {
        self.control_words
    }

    /// Protocol plus control words.
    pub fn all_words(&self) -> u64 {
        self.total_words + self.control_words
    }

    /// Protocol words indexed by round; slot 0 holds traffic sent before the first round.
    pub fn per_round(&self) -> &[u64] {
        &self.per_round
    }

    pub fn per_pair(&self) -> &BTreeMap<(PartyId, PartyId), u64> {
        &self.per_pair
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    /// Control words charged in `round`.
    pub fn control_in_round(&self, round: usize) -> u64 {
        self.entries
            .iter()
            .filter(|e| e.round == round && e.class == CostClass::Control)
            .map(|e| e.words)
            .sum()
    }

    fn ensure_round(&mut self, round: usize) {
        if self.per_round.len() <= round {
            self.per_round.resize(round + 1, 0);
        }
    }

    fn charge(&mut self, entry: LedgerEntry) {
        self.ensure_round(entry.round);
        match entry.class {
            CostClass::Protocol => {
                self.total_words += entry.words;
                self.per_round[entry.round] += entry.words;
                *self.per_pair.entry((entry.sender, entry.receiver)).or_insert(0) += entry.words;
            }
            CostClass::Control => self.control_words += entry.words,
        }
        self.entries.push(entry);
    }

    /// Writes one CSV row per message:
    /// `run_id,protocol,round,sender,receiver,words,control_words`.
    pub fn write_csv<W: Write>(&self, out: W, run_id: &str, protocol: &str, header: bool) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        if header {
            w.write_record(["run_id", "protocol", "round", "sender", "receiver", "words", "control_words"])?;
        }
        for e in &self.entries {
            let (words, control) = match e.class {
                CostClass::Protocol => (e.words, 0),
                CostClass::Control => (0, e.words),
            };
            w.write_record([
                run_id.to_string(),
                protocol.to_string(),
                e.round.to_string(),
                e.sender.to_string(),
                e.receiver.to_string(),
                words.to_string(),
                control.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reliable, per-pair FIFO channels between parties `1..=k`, metered by a ledger.
#[derive(Debug, Clone)]
pub struct Network {
    parties: usize,
    dim: Option<usize>,
    round: usize,
    ledger: CommLedger,
    channels: BTreeMap<(PartyId, PartyId), VecDeque<Payload>>,
    sent: BTreeMap<(PartyId, PartyId), u64>,
}

impl Network {
    /// `dim`, when given, is enforced on every point and classifier payload.
    pub fn new(parties: usize, dim: Option<usize>) -> Self {
        Self {
            parties,
            dim,
            round: 0,
            ledger: CommLedger::new(),
            channels: BTreeMap::new(),
            sent: BTreeMap::new(),
        }
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn round(&self) -> usize {
        self.round
    }

    /// Starts the next round; rounds are numbered from 1 once started.
    pub fn begin_round(&mut self) -> usize {
        self.round += 1;
        self.ledger.ensure_round(self.round);
        self.round
    }

    pub fn ledger(&self) -> &CommLedger {
        &self.ledger
    }

    pub fn into_ledger(self) -> CommLedger {
        self.ledger
    }

    fn check_party(&self, id: PartyId) -> Result<()> {
        if id == 0 || id > self.parties {
            return Err(Error::UnknownParty(id));
        }
        Ok(())
    }

    pub fn send(&mut self, msg: Message) -> Result<Receipt> {
        self.check_party(msg.sender)?;
        self.check_party(msg.receiver)?;
        if msg.sender == msg.receiver {
            return Err(Error::SelfSend(msg.sender));
        }
        msg.payload.check_dim(self.dim)?;
        let words = msg.word_cost();
        self.ledger.charge(LedgerEntry {
            round: self.round,
            sender: msg.sender,
            receiver: msg.receiver,
            words,
            class: msg.class,
        });
        let key = (msg.sender, msg.receiver);
        let seq = self.sent.entry(key).or_insert(0);
        let sequence = *seq;
        *seq += 1;
        self.channels.entry(key).or_default().push_back(msg.payload);
        Ok(Receipt { sequence, words })
    }

    /// Sends the same payload from `from` to every party in `to`.
    pub fn broadcast(
        &mut self,
        from: PartyId,
        to: impl IntoIterator<Item = PartyId>,
        payload: &Payload,
        class: CostClass,
    ) -> Result<Vec<Receipt>> {
        to.into_iter()
            .map(|r| self.send(Message { sender: from, receiver: r, payload: payload.clone(), class }))
            .collect()
    }

    /// Next undelivered payload on the `from → to` channel.
    pub fn recv(&mut self, from: PartyId, to: PartyId) -> Option<Payload> {
        self.channels.get_mut(&(from, to)).and_then(VecDeque::pop_front)
    }

    /// Receives a message that the protocol logic guarantees is present.
    pub(crate) fn expect(&mut self, from: PartyId, to: PartyId) -> Payload {
        self.recv(from, to).expect("protocol step delivered no message")
    }
}
