//! Online learners for halfspaces through the origin.
//!
//! Both learners start from the bias direction (everything positive), store
//! every example they are fed, and after each mistake keep correcting until
//! the hypothesis is consistent with the stored examples or a correction
//! cap is hit. Inputs are scaled to unit length, which does not change the
//! halfspace they constrain.

use serde::{Deserialize, Serialize};

use crate::numerics::eigen::Matrix;

/// Contract for the densifier's halfspace learner.
pub trait OnlineLearner {
    /// `+1` when the current weights give a nonnegative score.
    fn predict(&self, v: &[f64]) -> i8;
    /// Feeds a labelled example. Returns whether it was a mistake.
    fn update(&mut self, v: &[f64], label: i8) -> bool;
    fn mistakes(&self) -> usize;
    /// Current weight vector.
    fn weights(&self) -> &[f64];
    /// Whether the weights label every stored example correctly.
    fn is_consistent(&self) -> bool;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnerKind {
    Ellipsoid,
    Perceptron,
}

fn unit(v: &[f64]) -> Option<Vec<f64>> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (norm > 0.0 && norm.is_finite()).then(|| v.iter().map(|x| x / norm).collect())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn score_sign(w: &[f64], v: &[f64]) -> i8 {
    if dot(w, v) >= 0.0 {
        1
    } else {
        -1
    }
}

fn bias_start(m: usize) -> Vec<f64> {
    let mut w = vec![0.0; m];
    w[m - 1] = 1.0;
    w
}

/// Stored examples, with the scan for the first one the weights get wrong.
#[derive(Clone, Debug, Default)]
struct Memory {
    examples: Vec<(Vec<f64>, i8)>,
}

impl Memory {
    fn first_violation(&self, w: &[f64]) -> Option<usize> {
        self.examples.iter().position(|(v, l)| score_sign(w, v) != *l)
    }
}

/// Initial radius of the weight-space ball; contains every unit target
/// together with a margin ball around it.
pub const ELLIPSOID_RADIUS: f64 = 3.0;

/// Central-cut ellipsoid method over weight space. Predicts with the
/// center; each correction cuts through the center.
#[derive(Clone, Debug)]
pub struct EllipsoidLearner {
    center: Vec<f64>,
    shape: Matrix,
    memory: Memory,
    mistakes: usize,
    cuts: usize,
    max_cuts: usize,
}

impl EllipsoidLearner {
    /// `margin` is the separation floor `ρ` used to cap total cuts.
    pub fn new(m: usize, margin: f64) -> Self {
        let r2 = ELLIPSOID_RADIUS * ELLIPSOID_RADIUS;
        let shape = (0..m).map(|i| (0..m).map(|j| if i == j { r2 } else { 0.0 }).collect()).collect();
        EllipsoidLearner {
            center: bias_start(m),
            shape,
            memory: Memory::default(),
            mistakes: 0,
            cuts: 0,
            max_cuts: Self::mistake_bound(m, margin),
        }
    }

    /// Cuts needed before the ellipsoid is smaller than a radius-`margin`
    /// ball: each central cut shrinks volume by at least `e^{−1/(2(m+1))}`.
    pub fn mistake_bound(m: usize, margin: f64) -> usize {
        let m = m as f64;
        (2.0 * (m + 1.0) * m * (ELLIPSOID_RADIUS / margin).ln()).ceil() as usize
    }

    pub fn cuts(&self) -> usize {
        self.cuts
    }

    /// Keeps the half `{w : label·v·(w − c) ≥ 0}`.
    fn cut(&mut self, v: &[f64], label: i8) -> bool {
        let m = self.center.len() as f64;
        let a: Vec<f64> = v.iter().map(|x| -(label as f64) * x).collect();
        let pa: Vec<f64> = self.shape.iter().map(|row| dot(row, &a)).collect();
        let apa = dot(&a, &pa);
        if !(apa > 1e-300) || self.cuts >= self.max_cuts {
            return false;
        }
        let b: Vec<f64> = pa.iter().map(|x| x / apa.sqrt()).collect();
        for (c, bi) in self.center.iter_mut().zip(&b) {
            *c -= bi / (m + 1.0);
        }
        let scale = m * m / (m * m - 1.0);
        let k = 2.0 / (m + 1.0);
        for (i, row) in self.shape.iter_mut().enumerate() {
            for (j, p) in row.iter_mut().enumerate() {
                *p = scale * (*p - k * b[i] * b[j]);
            }
        }
        self.cuts += 1;
        true
    }
}

impl OnlineLearner for EllipsoidLearner {
    fn predict(&self, v: &[f64]) -> i8 {
        score_sign(&self.center, v)
    }

    fn update(&mut self, v: &[f64], label: i8) -> bool {
        let Some(v) = unit(v) else { return false };
        let mistake = self.predict(&v) != label;
        self.memory.examples.push((v, label));
        if !mistake {
            return false;
        }
        self.mistakes += 1;
        while let Some(i) = self.memory.first_violation(&self.center) {
            let (v, l) = self.memory.examples[i].clone();
            if !self.cut(&v, l) {
                break;
            }
        }
        true
    }

    fn mistakes(&self) -> usize {
        self.mistakes
    }

    fn weights(&self) -> &[f64] {
        &self.center
    }

    fn is_consistent(&self) -> bool {
        self.memory.first_violation(&self.center).is_none()
    }
}

/// Perceptron with the same consistency pass; total corrections are at
/// most `4/ρ² + 2/ρ` on data with margin `ρ`.
#[derive(Clone, Debug)]
pub struct PerceptronLearner {
    w: Vec<f64>,
    memory: Memory,
    mistakes: usize,
    corrections: usize,
    max_corrections: usize,
}

impl PerceptronLearner {
    pub fn new(m: usize, margin: f64) -> Self {
        PerceptronLearner {
            w: bias_start(m),
            memory: Memory::default(),
            mistakes: 0,
            corrections: 0,
            max_corrections: Self::mistake_bound(margin),
        }
    }

    pub fn mistake_bound(margin: f64) -> usize {
        (4.0 / (margin * margin) + 2.0 / margin).ceil() as usize
    }

    pub fn corrections(&self) -> usize {
        self.corrections
    }
}

impl OnlineLearner for PerceptronLearner {
    fn predict(&self, v: &[f64]) -> i8 {
        score_sign(&self.w, v)
    }

    fn update(&mut self, v: &[f64], label: i8) -> bool {
        let Some(v) = unit(v) else { return false };
        let mistake = self.predict(&v) != label;
        self.memory.examples.push((v, label));
        if !mistake {
            return false;
        }
        self.mistakes += 1;
        while let Some(i) = self.memory.first_violation(&self.w) {
            if self.corrections >= self.max_corrections {
                break;
            }
            let (v, l) = &self.memory.examples[i];
            for (wi, vi) in self.w.iter_mut().zip(v) {
                *wi += *l as f64 * vi;
            }
            self.corrections += 1;
        }
        true
    }

    fn mistakes(&self) -> usize {
        self.mistakes
    }

    fn weights(&self) -> &[f64] {
        &self.w
    }

    fn is_consistent(&self) -> bool {
        self.memory.first_violation(&self.w).is_none()
    }
}

/// Builds the chosen learner behind the trait.
pub fn make_learner(kind: LearnerKind, m: usize, margin: f64) -> Box<dyn OnlineLearner> {
    match kind {
        LearnerKind::Ellipsoid => Box::new(EllipsoidLearner::new(m, margin)),
        LearnerKind::Perceptron => Box::new(PerceptronLearner::new(m, margin)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn starts_all_positive() {
        let e = EllipsoidLearner::new(4, 0.01);
        assert_eq!(e.predict(&[-5.0, 3.0, 0.0, 1.0]), 1);
        let p = PerceptronLearner::new(4, 0.01);
        assert_eq!(p.predict(&[-5.0, 3.0, 0.0, 1.0]), 1);
    }

    #[test]
    fn correct_prediction_is_not_a_mistake() {
        let mut e = EllipsoidLearner::new(3, 0.01);
        assert!(!e.update(&[0.0, 0.0, 1.0], 1));
        assert!(e.update(&[1.0, 0.0, 0.5], -1));
        assert_eq!(e.mistakes(), 1);
        assert!(e.is_consistent());
    }
}
