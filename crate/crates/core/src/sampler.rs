//! Counting-to-sampling by recursive bisection of grid boxes, the exact
//! continuous lift of grid samples, and the end-to-end PTF sampler.
//!
//! At every node the first coordinate whose range holds more than one grid
//! point is split at its index midpoint. The branch is chosen with
//! probability proportional to the *joint* mass `w_b·η_b`, where `w_b` is the
//! exact Gaussian mass of half `b` and `η_b` the estimated acceptance
//! probability inside it. With `η` accurate to `1±δ`, every leaf probability
//! is within `1 ± 2δ·depth` of the exact conditional law.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::counter::cdf::CompressedCdf;
use crate::counter::engine::{coordinate_pmfs, count_with_floor, default_floor, prepare, PtfCountConfig};
use crate::error::{Error, Result};
use crate::grid::{value_at, CoordinateBox, GridSpec, IndexRange};
use crate::numerics::normal::truncated_normal_sample;
use crate::numerics::Rng;
use crate::quadform::{DecoupledConstraint, QuadraticForm};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub eps: f64,
    /// Accuracy of each counting call, `ε / (2·log₂|A|)`.
    pub delta: f64,
    /// Hard bound on bisection depth, `⌈log₂|A|⌉ + n`.
    pub max_depth: usize,
}

impl SamplerConfig {
    pub fn new(eps: f64, spec: &GridSpec) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::InvalidParameter(format!("eps must lie in (0, 1], got {eps}")));
        }
        let log2 = spec.total_points().log2();
        let delta = if log2 > 0.0 { eps / (2.0 * log2) } else { eps };
        Ok(SamplerConfig { eps, delta, max_depth: log2.ceil() as usize + spec.n })
    }
}

/// Splits a range at index `lo + ⌈len/2⌉` so both halves are nonempty.
pub fn bisect(r: IndexRange) -> (IndexRange, IndexRange) {
    let mid = r.lo + r.len().div_ceil(2);
    (IndexRange::new(r.lo, mid - 1), IndexRange::new(mid, r.hi))
}

/// Supplies `ln(w·η)` for boxes of the bisection shape: coordinates before
/// `prefix.len()` fixed, the next one restricted to `range`, the rest free.
/// Values are defined up to a factor shared by all boxes with the same prefix.
pub trait BoxOracle {
    fn ln_joint(&mut self, prefix: &[usize], range: IndexRange) -> Result<f64>;
}

/// Runs the general box-conditional counter on each query.
pub struct GeneralOracle<'a> {
    dc: &'a DecoupledConstraint,
    spec: &'a GridSpec,
    delta: f64,
}

impl<'a> GeneralOracle<'a> {
    pub fn new(dc: &'a DecoupledConstraint, spec: &'a GridSpec, delta: f64) -> Self {
        GeneralOracle { dc, spec, delta }
    }

    fn make_box(&self, prefix: &[usize], range: IndexRange) -> CoordinateBox {
        let mut ranges: Vec<IndexRange> = prefix.iter().map(|&k| IndexRange::new(k, k)).collect();
        ranges.push(range);
        ranges.resize(self.spec.n, self.spec.full_range());
        CoordinateBox { ranges }
    }
}

impl BoxOracle for GeneralOracle<'_> {
    fn ln_joint(&mut self, prefix: &[usize], range: IndexRange) -> Result<f64> {
        let bx = self.make_box(prefix, range);
        let r = count_with_floor(self.dc, self.spec, &bx, self.delta, 0.0)?;
        Ok(self.spec.log_range_mass(range) + r.log_estimate)
    }
}

const CACHE_LIMIT: usize = 512;

/// Specialized counter for bisection-shaped boxes. Precomputes compressed
/// CDFs of every suffix sum `Σ_{i>j} Yᵢ` at accuracy δ, so a query costs one
/// CDF lookup per grid index of the split coordinate.
pub struct SuffixOracle {
    theta: f64,
    values: Vec<Vec<f64>>,
    ln_mass: Vec<f64>,
    suffix: Vec<CompressedCdf>,
    cache: HashMap<(usize, u64), Vec<f64>>,
}

impl SuffixOracle {
    pub fn new(dc: &DecoupledConstraint, spec: &GridSpec, delta: f64) -> Result<Self> {
        let n = spec.n;
        let pmfs = coordinate_pmfs(dc, spec, &spec.full_box())?;
        let step = delta / (2.0 * n as f64);
        // The last suffix is a single exact pmf and needs no compression.
        let mut suffix = vec![CompressedCdf::unit(); n];
        if n >= 2 {
            suffix[n - 2] = CompressedCdf::from_log_pmf(&pmfs[n - 1]);
        }
        for j in (0..n.saturating_sub(2)).rev() {
            suffix[j] = suffix[j + 1].convolve(&pmfs[j + 1], step);
        }
        let k = spec.points();
        let values = (0..n)
            .map(|j| (0..k).map(|i| value_at(dc.lambda[j], dc.mu[j], spec.point(i))).collect())
            .collect();
        let ln_mass = (0..k).map(|i| spec.log_range_mass(IndexRange::new(i, i))).collect();
        Ok(SuffixOracle { theta: dc.theta, values, ln_mass, suffix, cache: HashMap::new() })
    }

    fn terms(&mut self, prefix: &[usize]) -> &Vec<f64> {
        let j = prefix.len();
        let shift: f64 = prefix.iter().enumerate().fold(0.0, |s, (i, &k)| s + self.values[i][k]);
        if self.cache.len() >= CACHE_LIMIT {
            self.cache.clear();
        }
        let key = (j, shift.to_bits());
        if !self.cache.contains_key(&key) {
            let cdf = &self.suffix[j];
            let terms = self.values[j]
                .iter()
                .zip(&self.ln_mass)
                .map(|(&y, &m)| {
                    let g = cdf.ln_at_shifted(shift + y, self.theta);
                    if g == f64::NEG_INFINITY {
                        g
                    } else {
                        m + (g + 0.5 * cdf.ln_err()).min(0.0)
                    }
                })
                .collect();
            self.cache.insert(key, terms);
        }
        &self.cache[&key]
    }
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

impl BoxOracle for SuffixOracle {
    fn ln_joint(&mut self, prefix: &[usize], range: IndexRange) -> Result<f64> {
        let terms = self.terms(prefix);
        Ok(log_sum_exp(&terms[range.lo..=range.hi]))
    }
}

/// A bisection state: fixed prefix indices and the range of the next coordinate.
#[derive(Clone, Debug)]
struct Node {
    prefix: Vec<usize>,
    range: IndexRange,
    depth: usize,
}

impl Node {
    fn root(spec: &GridSpec) -> Node {
        Node { prefix: Vec::with_capacity(spec.n), range: spec.full_range(), depth: 0 }.settle(spec)
    }

    /// Moves singleton ranges into the prefix.
    fn settle(mut self, spec: &GridSpec) -> Node {
        while self.prefix.len() < spec.n && self.range.is_singleton() {
            self.prefix.push(self.range.lo);
            self.range = spec.full_range();
        }
        self
    }

    fn is_leaf(&self, spec: &GridSpec) -> bool {
        self.prefix.len() == spec.n
    }

    fn child(&self, range: IndexRange, spec: &GridSpec) -> Node {
        Node { prefix: self.prefix.clone(), range, depth: self.depth + 1 }.settle(spec)
    }
}

/// Branch log-weights `(ln J₀, ln J₁)` and the two child nodes.
fn split<O: BoxOracle>(node: &Node, spec: &GridSpec, oracle: &mut O) -> Result<[(f64, Node); 2]> {
    let (r0, r1) = bisect(node.range);
    let j0 = oracle.ln_joint(&node.prefix, r0)?;
    let j1 = oracle.ln_joint(&node.prefix, r1)?;
    if j0 == f64::NEG_INFINITY && j1 == f64::NEG_INFINITY {
        return Err(Error::AllBranchesZero { depth: node.depth });
    }
    Ok([(j0, node.child(r0, spec)), (j1, node.child(r1, spec))])
}

/// `Pr[branch 0]` from the two log joint weights.
fn p_first(j0: f64, j1: f64) -> f64 {
    if j1 == f64::NEG_INFINITY {
        1.0
    } else if j0 == f64::NEG_INFINITY {
        0.0
    } else {
        1.0 / (1.0 + (j1 - j0).exp())
    }
}

/// Draws grid indices from the discretized Gaussian conditioned on the
/// constraint, using `oracle` for every counting call.
pub fn sample_grid_point_with<O: BoxOracle>(
    spec: &GridSpec,
    cfg: &SamplerConfig,
    oracle: &mut O,
    rng: &mut Rng,
) -> Result<Vec<usize>> {
    let mut node = Node::root(spec);
    while !node.is_leaf(spec) {
        if node.depth >= cfg.max_depth {
            return Err(Error::DepthExceeded { max_depth: cfg.max_depth });
        }
        let [(j0, n0), (j1, n1)] = split(&node, spec, oracle)?;
        node = if rng.uniform() < p_first(j0, j1) { n0 } else { n1 };
    }
    Ok(node.prefix)
}

/// ln of the estimated acceptance probability of the whole grid.
pub fn ln_total<O: BoxOracle>(spec: &GridSpec, oracle: &mut O) -> Result<f64> {
    oracle.ln_joint(&[], spec.full_range())
}

fn check_floor(ln_p: f64, n: usize) -> Result<()> {
    let floor = default_floor(n);
    if ln_p < floor.ln() {
        return Err(Error::BelowFloor { estimate: ln_p.exp(), floor });
    }
    Ok(())
}

/// One grid sample (as indices) from the discretized Gaussian conditioned
/// on `Σ λᵢκᵢ² + μᵢκᵢ ≤ θ`.
pub fn sample_grid_point(dc: &DecoupledConstraint, spec: &GridSpec, cfg: &SamplerConfig, rng: &mut Rng) -> Result<Vec<usize>> {
    let mut oracle = SuffixOracle::new(dc, spec, cfg.delta)?;
    check_floor(ln_total(spec, &mut oracle)?, spec.n)?;
    sample_grid_point_with(spec, cfg, &mut oracle, rng)
}

/// A leaf of the bisection tree with its output probability.
#[derive(Clone, Debug, PartialEq)]
pub struct Leaf {
    pub point: Vec<usize>,
    pub prob: f64,
    pub depth: usize,
}

/// The exact output law of the sampler, by visiting every branch.
pub fn enumerate_sampler_distribution_with<O: BoxOracle>(
    spec: &GridSpec,
    cfg: &SamplerConfig,
    oracle: &mut O,
) -> Result<Vec<Leaf>> {
    let size = spec.total_points();
    if size > 1e5 {
        return Err(Error::GridTooLarge { size, limit: 1e5 });
    }
    let mut leaves = Vec::new();
    let mut stack = vec![(Node::root(spec), 1.0f64)];
    while let Some((node, p)) = stack.pop() {
        if node.is_leaf(spec) {
            leaves.push(Leaf { point: node.prefix, prob: p, depth: node.depth });
            continue;
        }
        if node.depth >= cfg.max_depth {
            return Err(Error::DepthExceeded { max_depth: cfg.max_depth });
        }
        let [(j0, n0), (j1, n1)] = split(&node, spec, oracle)?;
        let p0 = p_first(j0, j1);
        if p0 < 1.0 {
            stack.push((n1, p * (1.0 - p0)));
        }
        if p0 > 0.0 {
            stack.push((n0, p * p0));
        }
    }
    leaves.sort_by(|a, b| a.point.cmp(&b.point));
    Ok(leaves)
}

pub fn enumerate_sampler_distribution(dc: &DecoupledConstraint, spec: &GridSpec, cfg: &SamplerConfig) -> Result<Vec<Leaf>> {
    let mut oracle = SuffixOracle::new(dc, spec, cfg.delta)?;
    enumerate_sampler_distribution_with(spec, cfg, &mut oracle)
}

/// Lifts grid indices to a point whose coordinates are independent standard
/// normals restricted to their owning cells.
pub fn lift_to_continuous(indices: &[usize], spec: &GridSpec, rng: &mut Rng) -> Result<Vec<f64>> {
    indices
        .iter()
        .map(|&k| truncated_normal_sample(spec.cell_lower(k), spec.cell_upper(k), rng))
        .collect()
}

/// Options for [`PtfSampler`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PtfSampleConfig {
    pub count: PtfCountConfig,
    /// Resample until the original polynomial is nonnegative.
    pub exact_filter: bool,
    pub max_retries: usize,
}

impl Default for PtfSampleConfig {
    fn default() -> Self {
        PtfSampleConfig { count: PtfCountConfig::default(), exact_filter: false, max_retries: 100 }
    }
}

enum Mode {
    Everything,
    Grid { rounded: DecoupledConstraint, spec: GridSpec, cfg: SamplerConfig, oracle: Box<SuffixOracle> },
}

/// Reusable sampler for `N(0, I)` conditioned on `q(x) ≥ 0`: decouple,
/// normalize, round, bisect on the grid, lift, rotate back.
pub struct PtfSampler {
    q: QuadraticForm,
    mode: Mode,
    opts: PtfSampleConfig,
    rounding_slack: f64,
}

/// One output point in original coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PtfSample {
    pub x: Vec<f64>,
    pub filtered: bool,
}

impl PtfSampler {
    pub fn new(q: &QuadraticForm, eps: f64, opts: &PtfSampleConfig) -> Result<Self> {
        let rounding = opts.count.rounding()?;
        let (mode, rounding_slack) = match prepare(q, &rounding) {
            Err(Error::ConstantPolynomial { accepts: true }) => (Mode::Everything, 0.0),
            Err(Error::ConstantPolynomial { accepts: false }) => {
                return Err(Error::BelowFloor { estimate: 0.0, floor: default_floor(q.n) });
            }
            Err(e) => return Err(e),
            Ok((normalized, rounded)) => {
                let spec = opts.count.grid(q.n, eps)?;
                let cfg = SamplerConfig::new(eps, &spec)?;
                let mut oracle = Box::new(SuffixOracle::new(&rounded, &spec, cfg.delta)?);
                let floor = opts.count.floor.unwrap_or_else(|| default_floor(q.n));
                let ln_p = ln_total(&spec, oracle.as_mut())?;
                if ln_p < floor.ln() {
                    return Err(Error::BelowFloor { estimate: ln_p.exp(), floor });
                }
                let slack = normalized.perturbation_slack(&rounded);
                (Mode::Grid { rounded, spec, cfg, oracle }, slack)
            }
        };
        Ok(PtfSampler { q: q.clone(), mode, opts: *opts, rounding_slack })
    }

    /// Bound on the bias introduced by coefficient rounding.
    pub fn rounding_slack(&self) -> f64 {
        self.rounding_slack
    }

    /// The rounded decoupled constraint, if the polynomial is not constant.
    pub fn rounded(&self) -> Option<&DecoupledConstraint> {
        match &self.mode {
            Mode::Grid { rounded, .. } => Some(rounded),
            Mode::Everything => None,
        }
    }

    pub fn grid(&self) -> Option<&GridSpec> {
        match &self.mode {
            Mode::Grid { spec, .. } => Some(spec),
            Mode::Everything => None,
        }
    }

    fn draw_once(&mut self, rng: &mut Rng) -> Result<Vec<f64>> {
        match &mut self.mode {
            Mode::Everything => Ok((0..self.q.n).map(|_| rng.standard_normal()).collect()),
            Mode::Grid { rounded, spec, cfg, oracle } => {
                let k = sample_grid_point_with(spec, cfg, oracle.as_mut(), rng)?;
                let y = lift_to_continuous(&k, spec, rng)?;
                Ok(rounded.to_original(&y))
            }
        }
    }

    pub fn sample(&mut self, rng: &mut Rng) -> Result<PtfSample> {
        if !self.opts.exact_filter {
            return Ok(PtfSample { x: self.draw_once(rng)?, filtered: false });
        }
        for _ in 0..self.opts.max_retries {
            let x = self.draw_once(rng)?;
            if self.q.sign_at(&x)? == 1 {
                return Ok(PtfSample { x, filtered: true });
            }
        }
        Err(Error::FilterExhausted { retries: self.opts.max_retries })
    }
}

/// Convenience wrapper drawing a single point.
pub fn sample_ptf_gaussian(q: &QuadraticForm, eps: f64, rng: &mut Rng, exact_filter: bool) -> Result<PtfSample> {
    let opts = PtfSampleConfig { exact_filter, ..Default::default() };
    PtfSampler::new(q, eps, &opts)?.sample(rng)
}
