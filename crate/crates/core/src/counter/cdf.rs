//! Sparsified CDFs with a certified multiplicative error.
//!
//! A [`CompressedCdf`] is a lower step function `G` for a true CDF `F` with
//! `G(t) ≤ F(t) ≤ c·G(t)` everywhere, where `c = (1+ε_step)^steps`.
//! Sparsifying a step function keeps a breakpoint only when its cumulative
//! value exceeds the last kept one by more than a factor `1+ε_step`; the
//! mass of dropped breakpoints slides right onto the next kept one, which
//! can only lower the CDF, and by at most that factor. Convolving with an
//! exact pmf preserves both inequalities, so the factors compound.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

/// Terms this many nats below the running cumulative mass are skipped; their
/// total effect is far below any error budget in use.
const NEGLIGIBLE_NATS: f64 = 45.0;

#[derive(Clone, Debug, PartialEq)]
pub struct CompressedCdf {
    values: Vec<f64>,
    ln_cums: Vec<f64>,
    ln_err: f64,
    steps: usize,
}

struct HeapItem {
    value: f64,
    row: usize,
    col: usize,
}

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then(self.row.cmp(&other.row))
            .then(self.col.cmp(&other.col))
    }
}

fn ln_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

/// Streams (value, ln mass) atoms in ascending value order and emits the
/// sparsified cumulative breakpoints.
struct Sparsifier {
    ln_ratio: f64,
    values: Vec<f64>,
    ln_cums: Vec<f64>,
    pending: Option<f64>,
    ln_run: f64,
}

impl Sparsifier {
    fn new(eps_step: f64) -> Self {
        Sparsifier {
            ln_ratio: eps_step.ln_1p(),
            values: Vec::new(),
            ln_cums: Vec::new(),
            pending: None,
            ln_run: f64::NEG_INFINITY,
        }
    }

    fn push(&mut self, value: f64, ln_mass: f64) {
        if let Some(v) = self.pending {
            if value != v {
                self.close(v, false);
            }
        }
        self.pending = Some(value);
        if ln_mass > self.ln_run - NEGLIGIBLE_NATS {
            self.ln_run = ln_add(self.ln_run, ln_mass);
        }
    }

    fn close(&mut self, v: f64, last: bool) {
        if self.ln_run == f64::NEG_INFINITY {
            return;
        }
        let keep = match self.ln_cums.last() {
            None => true,
            Some(&prev) => self.ln_run > prev + if last { 0.0 } else { self.ln_ratio },
        };
        if keep {
            self.values.push(v);
            self.ln_cums.push(self.ln_run);
        }
    }

    fn finish(mut self) -> (Vec<f64>, Vec<f64>) {
        if let Some(v) = self.pending.take() {
            self.close(v, true);
        }
        (self.values, self.ln_cums)
    }
}

impl CompressedCdf {
    /// Exact CDF of a pmf given as ascending `(value, ln probability)`.
    pub fn from_log_pmf(pmf: &[(f64, f64)]) -> Self {
        let mut ln_cum = f64::NEG_INFINITY;
        let mut values = Vec::with_capacity(pmf.len());
        let mut ln_cums = Vec::with_capacity(pmf.len());
        for &(v, lp) in pmf {
            ln_cum = ln_add(ln_cum, lp);
            if lp == f64::NEG_INFINITY {
                continue;
            }
            values.push(v);
            ln_cums.push(ln_cum);
        }
        CompressedCdf { values, ln_cums, ln_err: 0.0, steps: 0 }
    }

    /// The point mass at zero (the distribution of an empty sum).
    pub fn unit() -> Self {
        CompressedCdf { values: vec![0.0], ln_cums: vec![0.0], ln_err: 0.0, steps: 0 }
    }

    /// Drops breakpoints whose cumulative value is within `1+eps_step` of the
    /// previously kept one. The final breakpoint always survives.
    pub fn sparsify(&self, eps_step: f64) -> Self {
        let mut s = Sparsifier::new(eps_step);
        let mut prev = f64::NEG_INFINITY;
        for (&v, &c) in self.values.iter().zip(&self.ln_cums) {
            // Feed increments so the sparsifier's running sum reproduces `c`.
            s.push(v, increment(c, prev));
            s.ln_run = c;
            prev = c;
        }
        let (values, ln_cums) = s.finish();
        CompressedCdf { values, ln_cums, ln_err: self.ln_err + eps_step.ln_1p(), steps: self.steps + 1 }
    }

    /// Convolves with an exact pmf (ascending `(value, ln p)`) and sparsifies
    /// in one streaming pass over the pairwise sums.
    pub fn convolve(&self, pmf: &[(f64, f64)], eps_step: f64) -> Self {
        let atoms: Vec<(f64, f64)> = {
            let mut prev = f64::NEG_INFINITY;
            self.values
                .iter()
                .zip(&self.ln_cums)
                .map(|(&v, &c)| {
                    let inc = increment(c, prev);
                    prev = c;
                    (v, inc)
                })
                .collect()
        };
        let pmf: Vec<(f64, f64)> = pmf.iter().copied().filter(|a| a.1 > f64::NEG_INFINITY).collect();
        let (rows, cols) = if atoms.len() <= pmf.len() { (&atoms, &pmf) } else { (&pmf, &atoms) };

        let mut s = Sparsifier::new(eps_step);
        if !rows.is_empty() && !cols.is_empty() {
            let mut heap: BinaryHeap<Reverse<HeapItem>> = rows
                .iter()
                .enumerate()
                .map(|(row, r)| Reverse(HeapItem { value: r.0 + cols[0].0, row, col: 0 }))
                .collect();
            while let Some(Reverse(item)) = heap.pop() {
                s.push(item.value, rows[item.row].1 + cols[item.col].1);
                let col = item.col + 1;
                if col < cols.len() {
                    heap.push(Reverse(HeapItem { value: rows[item.row].0 + cols[col].0, row: item.row, col }));
                }
            }
        }
        let (values, ln_cums) = s.finish();
        CompressedCdf { values, ln_cums, ln_err: self.ln_err + eps_step.ln_1p(), steps: self.steps + 1 }
    }

    /// ln G(t); `-∞` below the first breakpoint.
    pub fn ln_at(&self, t: f64) -> f64 {
        let i = self.values.partition_point(|&v| v <= t);
        if i == 0 {
            f64::NEG_INFINITY
        } else {
            self.ln_cums[i - 1]
        }
    }

    /// ln G(θ − shift), deciding each breakpoint by `v + shift ≤ θ` so the
    /// comparison is exact whenever the sums are.
    pub fn ln_at_shifted(&self, shift: f64, theta: f64) -> f64 {
        let i = self.values.partition_point(|&v| v + shift <= theta);
        if i == 0 {
            f64::NEG_INFINITY
        } else {
            self.ln_cums[i - 1]
        }
    }

    /// ln c, where `G ≤ F ≤ c·G`.
    pub fn ln_err(&self) -> f64 {
        self.ln_err
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(value, ln cumulative)` anchors in ascending order.
    pub fn anchors(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().copied().zip(self.ln_cums.iter().copied())
    }

    /// ln of the total mass (the last cumulative value).
    pub fn ln_total(&self) -> f64 {
        self.ln_cums.last().copied().unwrap_or(f64::NEG_INFINITY)
    }
}

/// ln(e^c − e^prev) for prev < c.
fn increment(c: f64, prev: f64) -> f64 {
    if prev == f64::NEG_INFINITY {
        c
    } else {
        c + (-(prev - c).exp_m1()).ln()
    }
}
