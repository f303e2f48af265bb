//! Synthetic Gaussian-mixture datasets and their partition across parties.

use std::path::Path;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::rng_for;
use crate::types::{dot, Label, LabeledPoint, LinearClassifier, WeightedDataset};

const POINT_STREAM: u64 = 1;
const TRUTH_STREAM: u64 = 2;
const PARTITION_STREAM: u64 = 3;

/// Default separation margin for separable mode.
pub const DEFAULT_GAMMA: f64 = 0.05;

/// An isotropic Gaussian `N(mean, scale²·I)` contributing `count` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub mean: Vec<f64>,
    pub scale: f64,
    pub count: usize,
    /// Label of the component's points; ignored in separable mode.
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Partition {
    /// Shuffle, then deal contiguous chunks of (nearly) equal size.
    Random,
    /// Component `j` goes to party `j mod k`.
    ByCluster,
    /// Sort by projection on `direction` (default the first axis) and cut
    /// into `k` contiguous slabs.
    ByHalfspace { direction: Option<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub name: String,
    pub dim: usize,
    pub parties: usize,
    pub mixture: Vec<Component>,
    /// Relabel by a ground-truth hyperplane and enforce the margin.
    pub separable: bool,
    pub gamma: f64,
    /// Ground truth in separable mode; random when absent.
    pub truth: Option<Truth>,
    pub partition: Partition,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedData {
    pub parties: Vec<WeightedDataset>,
    /// Mixture component of every point, per party.
    pub components: Vec<Vec<usize>>,
    pub truth: Option<LinearClassifier>,
}

impl GeneratedData {
    pub fn total_points(&self) -> usize {
        self.parties.iter().map(WeightedDataset::len).sum()
    }
}

impl SyntheticSpec {
    pub fn total_points(&self) -> usize {
        self.mixture.iter().map(|c| c.count).sum()
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.parties == 0 {
            return Err(Error::InvalidInput("dimension and party count must be positive".into()));
        }
        if self.mixture.is_empty() {
            return Err(Error::InvalidInput("mixture needs at least one component".into()));
        }
        for c in &self.mixture {
            if c.mean.len() != self.dim {
                return Err(Error::DimensionMismatch { expected: self.dim, found: c.mean.len() });
            }
            if !(c.scale >= 0.0 && c.scale.is_finite()) {
                return Err(Error::InvalidInput(format!("component scale must be finite and ≥ 0, got {}", c.scale)));
            }
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidInput(format!("margin must be finite and ≥ 0, got {}", self.gamma)));
        }
        if let Some(t) = &self.truth {
            if t.normal.len() != self.dim {
                return Err(Error::DimensionMismatch { expected: self.dim, found: t.normal.len() });
            }
        }
        if let Partition::ByHalfspace { direction: Some(v) } = &self.partition {
            if v.len() != self.dim {
                return Err(Error::DimensionMismatch { expected: self.dim, found: v.len() });
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Manifest(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Manifest(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn write_manifest(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_toml()?)?;
        Ok(())
    }

    pub fn read_manifest(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

fn gaussian(mean: &[f64], scale: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    mean.iter()
        .map(|m| {
            let z: f64 = StandardNormal.sample(rng);
            m + scale * z
        })
        .collect()
}

fn truth_for(spec: &SyntheticSpec) -> Result<LinearClassifier> {
    if let Some(t) = &spec.truth {
        return LinearClassifier::new(t.normal.clone(), t.offset);
    }
    let mut rng = rng_for(spec.seed, TRUTH_STREAM);
    loop {
        let normal = gaussian(&vec![0.0; spec.dim], 1.0, &mut rng);
        let norm = dot(&normal, &normal).sqrt();
        if norm > 1e-12 {
            return LinearClassifier::new(normal.iter().map(|v| v / norm).collect(), 0.0);
        }
    }
}

/// Draws the mixture and splits it among `spec.parties` parties.
pub fn generate(spec: &SyntheticSpec) -> Result<GeneratedData> {
    spec.validate()?;
    let truth = if spec.separable { Some(truth_for(spec)?) } else { None };
    let mut rng = rng_for(spec.seed, POINT_STREAM);
    let mut points: Vec<(usize, LabeledPoint)> = Vec::with_capacity(spec.total_points());
    for (j, comp) in spec.mixture.iter().enumerate() {
        let limit = 100 * comp.count.max(1);
        let mut draws = 0;
        let mut kept = 0;
        while kept < comp.count {
            if draws == limit {
                return Err(Error::RejectionLimit { draws, target: comp.count });
            }
            draws += 1;
            let x = gaussian(&comp.mean, comp.scale, &mut rng);
            let label = match &truth {
                None => comp.label,
                Some(h) => {
                    let s = h.score(&x);
                    if s.abs() / h.norm() < spec.gamma {
                        continue;
                    }
                    Label::from_sign(s)
                }
            };
            points.push((j, LabeledPoint::new(x, label)));
            kept += 1;
        }
    }
    let assignment = partition(spec, &points)?;
    let mut parties = Vec::with_capacity(spec.parties);
    let mut components = Vec::with_capacity(spec.parties);
    for idx in assignment {
        components.push(idx.iter().map(|&i| points[i].0).collect());
        let pts = idx.iter().map(|&i| points[i].1.clone()).collect();
        parties.push(WeightedDataset::from_points(spec.dim, pts)?);
    }
    Ok(GeneratedData { parties, components, truth })
}

fn chunks(order: Vec<usize>, k: usize) -> Vec<Vec<usize>> {
    let (base, extra) = (order.len() / k, order.len() % k);
    let mut out = Vec::with_capacity(k);
    let mut it = order.into_iter();
    for j in 0..k {
        out.push(it.by_ref().take(base + usize::from(j < extra)).collect());
    }
    out
}

fn partition(spec: &SyntheticSpec, points: &[(usize, LabeledPoint)]) -> Result<Vec<Vec<usize>>> {
    let k = spec.parties;
    let mut order: Vec<usize> = (0..points.len()).collect();
    Ok(match &spec.partition {
        Partition::Random => {
            order.shuffle(&mut rng_for(spec.seed, PARTITION_STREAM));
            chunks(order, k)
        }
        Partition::ByCluster => {
            let mut out = vec![Vec::new(); k];
            for (i, (j, _)) in points.iter().enumerate() {
                out[j % k].push(i);
            }
            out
        }
        Partition::ByHalfspace { direction } => {
            let mut e1 = vec![0.0; spec.dim];
            e1[0] = 1.0;
            let dir = direction.as_ref().unwrap_or(&e1);
            let proj: Vec<f64> = points.iter().map(|(_, p)| dot(dir, &p.coords)).collect();
            order.sort_by(|&a, &b| proj[a].total_cmp(&proj[b]).then(a.cmp(&b)));
            chunks(order, k)
        }
    })
}

fn axis(dim: usize, pairs: &[(usize, f64)]) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    for &(i, x) in pairs {
        v[i] = x;
    }
    v
}

/// Two Gaussians at `±μ` on the first axis, dealt out at random.
fn easy(name: &str, k: usize, per_party: usize, dim: usize, seed: u64) -> SyntheticSpec {
    let half = k * per_party / 2;
    let comp = |sign: f64, label| Component { mean: axis(dim, &[(0, 2.4 * sign)]), scale: 1.0, count: half, label };
    SyntheticSpec {
        name: name.into(),
        dim,
        parties: k,
        mixture: vec![comp(1.0, Label::Positive), comp(-1.0, Label::Negative)],
        separable: false,
        gamma: 0.0,
        truth: None,
        partition: Partition::Random,
        seed,
    }
}

/// Each party owns a positive and a negative cluster side by side along the
/// first axis, so its own data is separable along that axis, while the
/// union is separated (up to noise) only by the sign of the second.
fn slabs(name: &str, k: usize, per_party: usize, dim: usize, scale: f64, seed: u64) -> SyntheticSpec {
    let mut mixture = Vec::with_capacity(2 * k);
    for j in 0..k {
        let centre = 20.0 * j as f64;
        let flip = if j % 2 == 0 { 1.0 } else { -1.0 };
        for (dx, label) in [(-3.0 * flip, Label::Positive), (3.0 * flip, Label::Negative)] {
            mixture.push(Component {
                mean: axis(dim, &[(0, centre + dx), (1, label.sign())]),
                scale,
                count: per_party / 2,
                label,
            });
        }
    }
    SyntheticSpec {
        name: name.into(),
        dim,
        parties: k,
        mixture,
        separable: false,
        gamma: 0.0,
        truth: None,
        partition: Partition::ByHalfspace { direction: None },
        seed,
    }
}

/// Names accepted by [`preset`].
pub const PRESETS: [&str; 8] =
    ["synthetic1", "synthetic2", "synthetic3", "synthetic4", "synthetic5", "synthetic6", "adversarial", "guarantee"];

/// Built-in dataset specs.
///
/// `synthetic1`–`synthetic6` have the sizes of the published benchmark
/// (50 dimensions, 5000 or 8500 balanced points per party); 1 and 4 are
/// dealt at random, the others split into slabs that defeat local voting.
/// `adversarial` is a small separable two-party instance of the slab layout
/// and `guarantee` a separable 5-dimensional mixture with margin 0.05.
pub fn preset(name: &str, seed: u64) -> Result<SyntheticSpec> {
    Ok(match name {
        "synthetic1" => easy(name, 2, 5000, 50, seed),
        "synthetic2" => slabs(name, 2, 5000, 50, 0.5, seed),
        "synthetic3" => slabs(name, 2, 8500, 50, 0.52, seed),
        "synthetic4" => easy(name, 4, 5000, 50, seed),
        "synthetic5" => slabs(name, 4, 5000, 50, 0.5, seed),
        "synthetic6" => slabs(name, 4, 8500, 50, 0.52, seed),
        "adversarial" => SyntheticSpec {
            separable: true,
            gamma: DEFAULT_GAMMA,
            truth: Some(Truth { normal: axis(10, &[(1, 1.0)]), offset: 0.0 }),
            ..slabs(name, 2, 1000, 10, 0.25, seed)
        },
        "guarantee" => {
            let dim = 5;
            let means = [[-6.0, 1.5, 0.0, 0.0, 0.0], [-2.0, -1.5, 1.0, 0.0, 0.0], [2.0, 1.5, -1.0, 0.0, 0.0], [6.0, -1.5, 0.0, 0.0, 0.0]];
            SyntheticSpec {
                name: name.into(),
                dim,
                parties: 2,
                mixture: means
                    .iter()
                    .map(|m| Component { mean: m.to_vec(), scale: 1.5, count: 1000, label: Label::Positive })
                    .collect(),
                separable: true,
                gamma: DEFAULT_GAMMA,
                truth: None,
                partition: Partition::ByHalfspace { direction: None },
                seed,
            }
        }
        other => return Err(Error::InvalidInput(format!("unknown preset `{other}` (known: {})", PRESETS.join(", ")))),
    })
}
