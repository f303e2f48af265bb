//! Points, weighted datasets and linear classifiers shared by every protocol.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Total weight above which a dataset's weights are rescaled to mean 1.
pub const RENORMALIZE_THRESHOLD: f64 = 1e300;

/// Binary class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    /// `+1` for positive, `-1` for negative.
    pub fn value(self) -> i8 {
        match self {
            Label::Negative => -1,
            Label::Positive => 1,
        }
    }

    pub fn sign(self) -> f64 {
        f64::from(self.value())
    }

    pub fn from_sign(value: f64) -> Label {
        if value > 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn flip(self) -> Label {
        match self {
            Label::Negative => Label::Positive,
            Label::Positive => Label::Negative,
        }
    }
}

impl TryFrom<i64> for Label {
    type Error = Error;

    fn try_from(value: i64) -> Result<Self> {
        match value {
            1 => Ok(Label::Positive),
            -1 => Ok(Label::Negative),
            other => Err(Error::InvalidInput(format!("label must be +1 or -1, got {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPoint {
    pub coords: Vec<f64>,
    pub label: Label,
}

impl LabeledPoint {
    pub fn new(coords: Vec<f64>, label: Label) -> Self {
        Self { coords, label }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Points of one dimension with a nonnegative weight per point.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDataset {
    dim: usize,
    points: Vec<LabeledPoint>,
    weights: Vec<f64>,
}

impl WeightedDataset {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        Ok(Self { dim, points: Vec::new(), weights: Vec::new() })
    }

    /// Builds a dataset where every point has weight 1.
    pub fn from_points(dim: usize, points: Vec<LabeledPoint>) -> Result<Self> {
        let weights = vec![1.0; points.len()];
        Self::with_weights(dim, points, weights)
    }

    pub fn with_weights(dim: usize, points: Vec<LabeledPoint>, weights: Vec<f64>) -> Result<Self> {
        let mut ds = Self::new(dim)?;
        if points.len() != weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        for (p, w) in points.into_iter().zip(weights) {
            ds.push_weighted(p, w)?;
        }
        Ok(ds)
    }

    pub fn push(&mut self, point: LabeledPoint) -> Result<()> {
        self.push_weighted(point, 1.0)
    }

    pub fn push_weighted(&mut self, point: LabeledPoint, weight: f64) -> Result<()> {
        if point.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: point.dim() });
        }
        if !(weight >= 0.0 && weight.is_finite()) {
            return Err(Error::InvalidInput(format!("weight must be finite and nonnegative, got {weight}")));
        }
        self.points.push(point);
        self.weights.push(weight);
        Ok(())
    }

    pub fn extend_from(&mut self, points: impl IntoIterator<Item = LabeledPoint>) -> Result<()> {
        for p in points {
            self.push(p)?;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[LabeledPoint] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn point(&self, i: usize) -> &LabeledPoint {
        &self.points[i]
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Multiplies the weight of point `i` by `factor`.
    pub fn scale_weight(&mut self, i: usize, factor: f64) {
        self.weights[i] *= factor;
    }

    /// Rescales weights to mean 1 when the total exceeds [`RENORMALIZE_THRESHOLD`].
    ///
    /// Returns the factor the weights were divided by (1 when untouched).
    pub fn renormalize_if_needed(&mut self) -> f64 {
        let total = self.total_weight();
        if total <= RENORMALIZE_THRESHOLD || self.is_empty() {
            return 1.0;
        }
        let divisor = total / self.len() as f64;
        for w in &mut self.weights {
            *w /= divisor;
        }
        divisor
    }

    /// Same points with every weight reset to 1.
    pub fn unweighted(&self) -> Self {
        Self { dim: self.dim, points: self.points.clone(), weights: vec![1.0; self.len()] }
    }

    pub fn into_points(self) -> Vec<LabeledPoint> {
        self.points
    }

    /// Concatenates datasets of equal dimension, keeping weights.
    pub fn union<'a>(dim: usize, parts: impl IntoIterator<Item = &'a WeightedDataset>) -> Result<Self> {
        let mut out = Self::new(dim)?;
        for part in parts {
            if part.dim != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: part.dim });
            }
            out.points.extend(part.points.iter().cloned());
            out.weights.extend_from_slice(&part.weights);
        }
        Ok(out)
    }
}

/// Hyperplane classifier `sign(<normal, x> + offset)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearClassifier {
    normal: Vec<f64>,
    offset: f64,
}

impl LinearClassifier {
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self> {
        if normal.is_empty() {
            return Err(Error::InvalidInput("classifier normal must have positive dimension".into()));
        }
        if normal.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidInput("classifier normal must not be all zero".into()));
        }
        if !offset.is_finite() || normal.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("classifier coefficients must be finite".into()));
        }
        Ok(Self { normal, offset })
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    /// Signed distance scaled by `‖normal‖`: `<normal, x> + offset`.
    pub fn score(&self, coords: &[f64]) -> f64 {
        debug_assert_eq!(coords.len(), self.normal.len());
        dot(&self.normal, coords) + self.offset
    }

    /// Predicted label; points exactly on the hyperplane are positive.
    pub fn predict(&self, coords: &[f64]) -> Label {
        if self.score(coords) >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    /// Same hyperplane with all coefficients multiplied by `alpha > 0`.
    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::InvalidInput("scale factor must be positive".into()));
        }
        Self::new(self.normal.iter().map(|v| v * alpha).collect(), self.offset * alpha)
    }

    pub fn norm(&self) -> f64 {
        dot(&self.normal, &self.normal).sqrt()
    }
}

/// Majority vote over a nonempty list of hyperplanes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorityEnsemble {
    members: Vec<LinearClassifier>,
}

impl MajorityEnsemble {
    pub fn new(members: Vec<LinearClassifier>) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(Error::InvalidInput("ensemble must have at least one member".into()));
        };
        let dim = first.dim();
        if let Some(bad) = members.iter().find(|m| m.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.dim() });
        }
        Ok(Self { members })
    }

    pub fn single(c: LinearClassifier) -> Self {
        Self { members: vec![c] }
    }

    pub fn members(&self) -> &[LinearClassifier] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    /// Number of members voting positive.
    pub fn positive_votes(&self, coords: &[f64]) -> usize {
        self.members.iter().filter(|m| m.predict(coords) == Label::Positive).count()
    }

    /// Majority label; an exact tie goes to negative.
    pub fn predict(&self, coords: &[f64]) -> Label {
        let pos = self.positive_votes(coords);
        if 2 * pos > self.members.len() {
            Label::Positive
        } else {
            Label::Negative
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

pub fn classify(c: &LinearClassifier, p: &LabeledPoint) -> Result<Label> {
    check_dim(c.dim(), p.dim())?;
    Ok(c.predict(&p.coords))
}

pub fn ensemble_classify(e: &MajorityEnsemble, p: &LabeledPoint) -> Result<Label> {
    check_dim(e.dim(), p.dim())?;
    Ok(e.predict(&p.coords))
}

/// Fraction of the dataset's weight that `c` misclassifies.
pub fn weighted_error(c: &LinearClassifier, ds: &WeightedDataset) -> Result<f64> {
    weighted_error_by(ds, c.dim(), |x| c.predict(x))
}

pub fn ensemble_weighted_error(e: &MajorityEnsemble, ds: &WeightedDataset) -> Result<f64> {
    weighted_error_by(ds, e.dim(), |x| e.predict(x))
}

fn weighted_error_by(ds: &WeightedDataset, dim: usize, predict: impl Fn(&[f64]) -> Label) -> Result<f64> {
    check_dim(dim, ds.dim())?;
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let total = ds.total_weight();
    if !(total > 0.0) {
        return Err(Error::ZeroWeight);
    }
    let wrong: f64 = ds
        .points()
        .iter()
        .zip(ds.weights())
        .filter(|(p, _)| predict(&p.coords) != p.label)
        .map(|(_, w)| w)
        .sum();
    Ok(wrong / total)
}

/// Unweighted accuracy of an ensemble over several datasets taken together.
pub fn accuracy<'a>(e: &MajorityEnsemble, parts: impl IntoIterator<Item = &'a WeightedDataset>) -> f64 {
    let (mut right, mut total) = (0usize, 0usize);
    for ds in parts {
        for p in ds.points() {
            total += 1;
            if e.predict(&p.coords) == p.label {
                right += 1;
            }
        }
    }
    if total == 0 {
        return 0.0;
    }
    right as f64 / total as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(coords: &[f64], label: i64) -> LabeledPoint {
        LabeledPoint::new(coords.to_vec(), Label::try_from(label).unwrap())
    }

    fn clf(normal: &[f64], offset: f64) -> LinearClassifier {
        LinearClassifier::new(normal.to_vec(), offset).unwrap()
    }

    #[test]
    fn classify_examples() {
        let c = clf(&[1.0, 0.0], 0.0);
        assert_eq!(classify(&c, &pt(&[2.0, 5.0], 1)).unwrap(), Label::Positive);
        assert_eq!(classify(&c, &pt(&[-3.0, 1.0], 1)).unwrap(), Label::Negative);
        let boundary = clf(&[1.0, 1.0], -2.0);
        assert_eq!(classify(&boundary, &pt(&[1.0, 1.0], -1)).unwrap(), Label::Positive);
    }

    #[test]
    fn classify_rejects_dimension_mismatch() {
        let c = clf(&[1.0, 0.0], 0.0);
        assert!(matches!(
            classify(&c, &pt(&[1.0], 1)),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn zero_normal_rejected() {
        assert!(LinearClassifier::new(vec![0.0, 0.0], 1.0).is_err());
        assert!(MajorityEnsemble::new(vec![]).is_err());
    }

    #[test]
    fn ensemble_vote_examples() {
        let pos = clf(&[1.0], 0.0);
        let neg = clf(&[-1.0], 0.0);
        let x = pt(&[1.0], 1);
        let three = MajorityEnsemble::new(vec![pos.clone(), pos.clone(), neg.clone()]).unwrap();
        assert_eq!(ensemble_classify(&three, &x).unwrap(), Label::Positive);
        let tie = MajorityEnsemble::new(vec![pos.clone(), neg.clone()]).unwrap();
        assert_eq!(ensemble_classify(&tie, &x).unwrap(), Label::Negative);
        let mut members = vec![pos; 12];
        members.extend(vec![neg; 10]);
        let big = MajorityEnsemble::new(members).unwrap();
        assert_eq!(big.positive_votes(&x.coords), 12);
        assert_eq!(ensemble_classify(&big, &x).unwrap(), Label::Positive);
    }

    #[test]
    fn weighted_error_examples() {
        let c = clf(&[1.0], 0.0);
        let ds = WeightedDataset::from_points(1, vec![pt(&[1.0], 1), pt(&[-1.0], -1)]).unwrap();
        assert_eq!(weighted_error(&c, &ds).unwrap(), 0.0);

        let half = WeightedDataset::from_points(1, vec![pt(&[1.0], 1), pt(&[-1.0], 1)]).unwrap();
        assert_eq!(weighted_error(&c, &half).unwrap(), 0.5);

        let skewed =
            WeightedDataset::with_weights(1, vec![pt(&[1.0], 1), pt(&[-1.0], 1)], vec![1.0, 3.0]).unwrap();
        assert_eq!(weighted_error(&c, &skewed).unwrap(), 0.75);
    }

    #[test]
    fn weighted_error_needs_weight() {
        let c = clf(&[1.0], 0.0);
        let empty = WeightedDataset::new(1).unwrap();
        assert!(matches!(weighted_error(&c, &empty), Err(Error::EmptyDataset)));
        let zero = WeightedDataset::with_weights(1, vec![pt(&[1.0], 1)], vec![0.0]).unwrap();
        assert!(matches!(weighted_error(&c, &zero), Err(Error::ZeroWeight)));
    }

    #[test]
    fn dataset_rejects_bad_weights_and_dims() {
        let mut ds = WeightedDataset::new(2).unwrap();
        assert!(ds.push(pt(&[1.0], 1)).is_err());
        assert!(ds.push_weighted(pt(&[1.0, 2.0], 1), -1.0).is_err());
        assert!(ds.push_weighted(pt(&[1.0, 2.0], 1), f64::NAN).is_err());
        assert!(WeightedDataset::new(0).is_err());
    }

    #[test]
    fn renormalization_preserves_ratios() {
        let mut ds =
            WeightedDataset::with_weights(1, vec![pt(&[1.0], 1), pt(&[2.0], 1)], vec![1e300, 3e300]).unwrap();
        let divisor = ds.renormalize_if_needed();
        assert!(divisor > 1.0);
        assert!((ds.total_weight() - 2.0).abs() < 1e-12);
        assert!((ds.weights()[1] / ds.weights()[0] - 3.0).abs() < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn coords(d: usize) -> impl Strategy<Value = Vec<f64>> {
            prop::collection::vec(-100.0f64..100.0, d)
        }

        proptest! {
            #[test]
            fn classify_is_scale_invariant(
                normal in coords(3).prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 1e-3)),
                offset in -50.0f64..50.0,
                x in coords(3),
                alpha in 1e-3f64..1e3,
            ) {
                let c = clf(&normal, offset);
                let p = LabeledPoint::new(x, Label::Positive);
                // Scaling can only flip a label when the score is within rounding of zero.
                prop_assume!(c.score(&p.coords).abs() > 1e-9 * (1.0 + offset.abs()) * 1e3);
                let scaled = c.scaled(alpha).unwrap();
                prop_assert_eq!(classify(&c, &p).unwrap(), classify(&scaled, &p).unwrap());
            }

            #[test]
            fn single_member_ensemble_matches_classifier(
                normal in coords(2).prop_filter("nonzero", |v| v.iter().any(|x| *x != 0.0)),
                offset in -50.0f64..50.0,
                x in coords(2),
            ) {
                let c = clf(&normal, offset);
                let e = MajorityEnsemble::single(c.clone());
                let p = LabeledPoint::new(x, Label::Negative);
                prop_assert_eq!(classify(&c, &p).unwrap(), ensemble_classify(&e, &p).unwrap());
            }

            #[test]
            fn equal_weights_give_plain_error_rate(
                xs in prop::collection::vec((-10.0f64..10.0, any::<bool>()), 1..40),
                w in 0.1f64..10.0,
            ) {
                let c = clf(&[1.0], -0.5);
                let points: Vec<_> = xs
                    .iter()
                    .map(|&(x, pos)| LabeledPoint::new(vec![x], if pos { Label::Positive } else { Label::Negative }))
                    .collect();
                let wrong = points.iter().filter(|p| c.predict(&p.coords) != p.label).count();
                let ds = WeightedDataset::with_weights(1, points.clone(), vec![w; points.len()]).unwrap();
                let err = weighted_error(&c, &ds).unwrap();
                prop_assert!((err - wrong as f64 / points.len() as f64).abs() < 1e-12);
            }
        }
    }
}
