//! Linear separator training.
//!
//! The separating learner maximizes the margin `δ` subject to
//! `yᵢ(⟨w, xᵢ⟩ + b) ≥ δ` and `‖w‖∞ ≤ 1`, solved exactly with the dense
//! simplex. On separable data the result has zero training error. When the
//! optimum `δ` is not positive the data cannot be separated; best-effort
//! mode then falls back to a weighted pocket perceptron seeded with the
//! min-max-violation hyperplane from the same linear program.

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opt::simplex::InequalityLp;
use crate::sampling::{rng_for, weighted_sample_indices};
use crate::types::{dot, weighted_error, Label, LinearClassifier, WeightedDataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerMode {
    HardSeparating,
    BestEffort,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    /// Perceptron epochs in best-effort mode.
    pub max_iterations: usize,
    /// Relative slack used when collecting points at the minimum margin.
    pub margin_tolerance: f64,
    pub mode: LearnerMode,
    pub seed: u64,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self { max_iterations: 100, margin_tolerance: 1e-6, mode: LearnerMode::BestEffort, seed: 0 }
    }
}

impl LearnerConfig {
    pub fn hard() -> Self {
        Self { mode: LearnerMode::HardSeparating, ..Self::default() }
    }

    pub fn best_effort() -> Self {
        Self::default()
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trained {
    pub classifier: LinearClassifier,
    /// Optimal margin of the separating program (`≤ 0` when inseparable).
    pub margin: f64,
    pub separable: bool,
}

pub fn train(ds: &WeightedDataset, cfg: &LearnerConfig) -> Result<LinearClassifier> {
    train_report(ds, cfg).map(|t| t.classifier)
}

pub fn train_report(ds: &WeightedDataset, cfg: &LearnerConfig) -> Result<Trained> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if cfg.margin_tolerance <= 0.0 {
        return Err(Error::InvalidInput("margin tolerance must be positive".into()));
    }
    if let Some(label) = single_label(ds) {
        return Ok(Trained { classifier: constant_classifier(ds, label), margin: f64::INFINITY, separable: true });
    }
    let (candidate, margin) = max_margin(ds)?;
    let scale = 1.0 + ds.points().iter().flat_map(|p| &p.coords).fold(0.0f64, |m, v| m.max(v.abs()));
    let separable = margin > 1e-9 * scale;
    if separable {
        if let Some(classifier) = candidate {
            return Ok(Trained { classifier, margin, separable });
        }
    }
    match cfg.mode {
        LearnerMode::HardSeparating => Err(Error::Inseparable { margin }),
        LearnerMode::BestEffort => {
            let classifier = pocket_perceptron(ds, candidate, cfg)?;
            Ok(Trained { classifier, margin, separable: false })
        }
    }
}

fn single_label(ds: &WeightedDataset) -> Option<Label> {
    let first = ds.point(0).label;
    ds.points().iter().all(|p| p.label == first).then_some(first)
}

/// Hyperplane `x₁ = const` with every point strictly on the `label` side.
fn constant_classifier(ds: &WeightedDataset, label: Label) -> LinearClassifier {
    let firsts = ds.points().iter().map(|p| p.coords[0]);
    let mut normal = vec![0.0; ds.dim()];
    normal[0] = 1.0;
    let offset = match label {
        Label::Positive => 1.0 - firsts.fold(f64::INFINITY, f64::min),
        Label::Negative => -1.0 - firsts.fold(f64::NEG_INFINITY, f64::max),
    };
    LinearClassifier::new(normal, offset).expect("unit normal")
}

/// Solves the max-margin program. Identical points are collapsed first.
fn max_margin(ds: &WeightedDataset) -> Result<(Option<LinearClassifier>, f64)> {
    let d = ds.dim();
    let nvars = d + 2;
    let mut objective = vec![0.0; nvars];
    objective[d + 1] = -1.0;
    let mut lp = InequalityLp::with_capacity(objective, ds.len() + 2 * d + 1);
    let mut seen = HashSet::with_capacity(ds.len());
    let mut row = vec![0.0; nvars];
    for p in ds.points() {
        let key: Vec<u64> = p.coords.iter().map(|v| v.to_bits()).chain([p.label.value() as u64]).collect();
        if !seen.insert(key) {
            continue;
        }
        let y = p.label.sign();
        for (r, x) in row.iter_mut().zip(&p.coords) {
            *r = y * x;
        }
        row[d] = y;
        row[d + 1] = -1.0;
        lp.push_row(&row, 0.0);
    }
    for j in 0..d {
        lp.push_bounds(j, -1.0, 1.0);
    }
    lp.push_bounds(d + 1, f64::NEG_INFINITY, 1.0);
    let v = lp.solve()?;
    let margin = v.x[d + 1];
    let normal = v.x[..d].to_vec();
    let classifier = if normal.iter().any(|w| w.abs() > 1e-12) {
        LinearClassifier::new(normal, v.x[d]).ok()
    } else {
        None
    };
    Ok((classifier, margin))
}

fn pocket_perceptron(
    ds: &WeightedDataset,
    start: Option<LinearClassifier>,
    cfg: &LearnerConfig,
) -> Result<LinearClassifier> {
    let d = ds.dim();
    let mut rng = rng_for(cfg.seed, 0x1ea7);
    let (mut w, mut b) = match &start {
        Some(c) => (c.normal().to_vec(), c.offset()),
        None => {
            let mut w = vec![0.0; d];
            w[0] = 1.0;
            (w, 0.0)
        }
    };
    let mut best = LinearClassifier::new(w.clone(), b)?;
    let mut best_err = weighted_error(&best, ds)?;
    let n = ds.len();
    for _ in 0..cfg.max_iterations {
        if best_err == 0.0 {
            break;
        }
        let order = weighted_sample_indices(ds, n, &mut rng)?;
        let step = 1.0 / (1.0 + rng.random::<f64>());
        for i in order {
            let p = ds.point(i);
            let y = p.label.sign();
            if y * (dot(&w, &p.coords) + b) <= 0.0 {
                for (wj, xj) in w.iter_mut().zip(&p.coords) {
                    *wj += step * y * xj;
                }
                b += step * y;
            }
        }
        if let Ok(c) = LinearClassifier::new(w.clone(), b) {
            let err = weighted_error(&c, ds)?;
            if err < best_err {
                best_err = err;
                best = c;
            }
        }
    }
    Ok(best)
}

/// Normalized margin `y(⟨w,x⟩+b)/‖w‖` of every point; negative means misclassified.
pub fn margins(ds: &WeightedDataset, c: &LinearClassifier) -> Result<Vec<f64>> {
    if ds.dim() != c.dim() {
        return Err(Error::DimensionMismatch { expected: c.dim(), found: ds.dim() });
    }
    let norm = c.norm();
    Ok(ds
        .points()
        .iter()
        .map(|p| {
            let m = p.label.sign() * c.score(&p.coords) / norm;
            if c.predict(&p.coords) == p.label {
                m.max(0.0)
            } else {
                m.min(-f64::MIN_POSITIVE)
            }
        })
        .collect())
}

/// Smallest normalized margin over correctly classified points.
pub fn min_margin(ds: &WeightedDataset, c: &LinearClassifier) -> Result<Option<f64>> {
    Ok(margins(ds, c)?.into_iter().filter(|m| *m >= 0.0).min_by(f64::total_cmp))
}

/// Indices of points within `tol` of the minimum margin, plus every misclassified point.
pub fn support_set(ds: &WeightedDataset, c: &LinearClassifier, tol: f64) -> Result<Vec<usize>> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let m = margins(ds, c)?;
    let floor = m.iter().copied().filter(|v| *v >= 0.0).min_by(f64::total_cmp);
    Ok((0..m.len())
        .filter(|&i| m[i] < 0.0 || floor.is_some_and(|f| m[i] <= f + tol))
        .collect())
}
