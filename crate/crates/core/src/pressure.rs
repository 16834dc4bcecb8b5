//! Birkhoff-weighted partition sums Delta_n(c, s) over the preimage tree of
//! alpha, and topological-pressure estimators built from them.
//!
//! Determinism contract: leaf terms are combined by a fixed-shape balanced
//! pairwise summation over a fixed chunking of the tree, so the result is
//! bit-identical no matter how many threads evaluate the chunks.

use num_complex::Complex64;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::coding::{self, DyadicWord, TreeNode, MAX_DEPTH};
use crate::dynamics::{self, Parameter};
use crate::error::{Error, Result};

/// The tree is split on the first `CHUNK_BITS` letters (capped by the depth);
/// chunk count is independent of thread count.
const CHUNK_BITS: u32 = 8;

/// One pressure evaluation at a given depth and exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureSample {
    pub n: u32,
    pub s: f64,
    /// Natural log of Delta_n.
    pub log_delta: f64,
    /// log_delta / n.
    pub p_raw: f64,
    /// log Delta_n - log Delta_{n-1}; absent at n = 1.
    pub p_ratio: Option<f64>,
}

/// Balanced pairwise summation with a fixed shape: pushing 2^m values yields
/// the perfect-binary-tree sum regardless of how the pushes are grouped.
#[derive(Debug, Clone, Default)]
pub struct PairwiseSum {
    levels: Vec<Option<f64>>,
}

impl PairwiseSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, mut x: f64) {
        for slot in self.levels.iter_mut() {
            match slot.take() {
                Some(y) => x += y,
                None => {
                    *slot = Some(x);
                    return;
                }
            }
        }
        self.levels.push(Some(x));
    }

    pub fn finish(&self) -> f64 {
        self.levels.iter().flatten().sum()
    }
}

/// Sum over prefixes p of log(2 |xi(c, p)|) = n log 2 + sum Re r(prefix).
pub fn birkhoff_logsum(param: &Parameter, word: &DyadicWord) -> Result<f64> {
    let ln2 = std::f64::consts::LN_2;
    let bits = word.bits();
    let mut node = TreeNode::first(param, bits[0]).map_err(|e| coding::attach_word(e, &bits[..1]))?;
    let mut acc = ln2 + node.r.re;
    for (k, &b) in bits.iter().enumerate().skip(1) {
        node = node.child(param, b).map_err(|e| coding::attach_word(e, &bits[..=k]))?;
        acc += ln2 + node.r.re;
    }
    Ok(acc)
}

/// Sums of the shifted leaf terms exp(-s * sum ln|xi(prefix)|) at depth n and
/// depth n-1; the n*log2 part of the Birkhoff sum is pulled out analytically.
struct ChunkSums {
    leaf: PairwiseSum,
    parent: PairwiseSum,
}

fn chunk_sums(param: &Parameter, s: f64, n: u32, chunk: u64, chunk_bits: u32) -> Result<ChunkSums> {
    let mut bits = Vec::with_capacity(n as usize);
    let first_bit = if chunk_bits == 0 {
        unreachable!("chunk_bits >= 1 whenever chunks are used")
    } else {
        ((chunk >> (chunk_bits - 1)) & 1) as u8
    };
    bits.push(first_bit);
    let mut node = TreeNode::first(param, first_bit).map_err(|e| coding::attach_word(e, &bits))?;
    let mut excess = node.r.re;
    for k in 1..chunk_bits {
        let bit = ((chunk >> (chunk_bits - 1 - k)) & 1) as u8;
        bits.push(bit);
        node = node.child(param, bit).map_err(|e| coding::attach_word(e, &bits))?;
        excess += node.r.re;
    }
    // chunk_bits <= n - 1 always, so every chunk holds 2^(n-chunk_bits)
    // leaves and 2^(n-1-chunk_bits) depth-(n-1) nodes, both powers of two
    let mut sums = ChunkSums { leaf: PairwiseSum::new(), parent: PairwiseSum::new() };
    descend(param, s, &node, excess, n - chunk_bits, &mut bits, &mut sums)?;
    Ok(sums)
}

fn descend(
    param: &Parameter,
    s: f64,
    node: &TreeNode,
    excess: f64,
    remaining: u32,
    bits: &mut Vec<u8>,
    sums: &mut ChunkSums,
) -> Result<()> {
    if remaining == 1 {
        sums.parent.push((-s * excess).exp());
    }
    for bit in 0u8..2 {
        bits.push(bit);
        let next = node.child(param, bit).map_err(|e| coding::attach_word(e, bits))?;
        let acc = excess + next.r.re;
        if remaining == 1 {
            sums.leaf.push((-s * acc).exp());
        } else {
            descend(param, s, &next, acc, remaining - 1, bits, sums)?;
        }
        bits.pop();
    }
    Ok(())
}

/// log Delta_n and log Delta_{n-1} from one traversal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaPair {
    pub log_delta: f64,
    pub log_delta_prev: Option<f64>,
}

fn combine(chunks: Vec<ChunkSums>, s: f64, n: u32) -> DeltaPair {
    let ln2 = std::f64::consts::LN_2;
    let mut leaf = PairwiseSum::new();
    let mut parent = PairwiseSum::new();
    for ch in chunks {
        leaf.push(ch.leaf.finish());
        parent.push(ch.parent.finish());
    }
    let log_delta = leaf.finish().ln() - s * (n as f64) * ln2;
    let log_delta_prev = if n >= 2 {
        Some(parent.finish().ln() - s * ((n - 1) as f64) * ln2)
    } else {
        None
    };
    DeltaPair { log_delta, log_delta_prev }
}

fn delta_chunk_bits(n: u32) -> u32 {
    CHUNK_BITS.min(n.saturating_sub(1)).max(1)
}

/// The n = 1 tree has two leaves and one parent level (alpha itself, with an
/// empty Birkhoff sum); handled directly.
fn delta_pair_depth_one(param: &Parameter, s: f64) -> Result<DeltaPair> {
    let ln2 = std::f64::consts::LN_2;
    let mut leaf = PairwiseSum::new();
    for bit in 0u8..2 {
        let node = TreeNode::first(param, bit).map_err(|e| coding::attach_word(e, &[bit]))?;
        leaf.push((-s * node.r.re).exp());
    }
    Ok(DeltaPair { log_delta: leaf.finish().ln() - s * ln2, log_delta_prev: None })
}

/// Evaluate the pair sequentially, single thread, same reduction shape.
pub fn delta_pair_seq(param: &Parameter, s: f64, n: u32) -> Result<DeltaPair> {
    assert!(n >= 1 && n <= MAX_DEPTH);
    if n == 1 {
        return delta_pair_depth_one(param, s);
    }
    let k = delta_chunk_bits(n);
    let chunks = (0u64..1 << k)
        .map(|i| chunk_sums(param, s, n, i, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(combine(chunks, s, n))
}

/// Evaluate the pair, chunks in parallel when the `parallel` feature is on.
/// Bit-identical to [`delta_pair_seq`] for every thread count.
pub fn delta_pair(param: &Parameter, s: f64, n: u32) -> Result<DeltaPair> {
    assert!(n >= 1 && n <= MAX_DEPTH);
    if n == 1 {
        return delta_pair_depth_one(param, s);
    }
    #[cfg(feature = "parallel")]
    {
        let k = delta_chunk_bits(n);
        let chunks = (0u64..1 << k)
            .into_par_iter()
            .map(|i| chunk_sums(param, s, n, i, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(combine(chunks, s, n))
    }
    #[cfg(not(feature = "parallel"))]
    {
        delta_pair_seq(param, s, n)
    }
}

/// log Delta_n(c, s).
pub fn delta_n(param: &Parameter, s: f64, n: u32) -> Result<f64> {
    Ok(delta_pair(param, s, n)?.log_delta)
}

/// (1/n) log Delta_n: the raw pressure estimate at depth n.
pub fn pressure_raw(param: &Parameter, s: f64, n: u32) -> Result<f64> {
    Ok(delta_n(param, s, n)? / n as f64)
}

/// log Delta_n - log Delta_{n-1}: the ratio pressure estimate, converging
/// geometrically when Delta_n grows like C lambda^n.
pub fn pressure_ratio(param: &Parameter, s: f64, n: u32) -> Result<f64> {
    assert!(n >= 2, "ratio estimator needs n >= 2");
    let pair = delta_pair(param, s, n)?;
    Ok(pair.log_delta - pair.log_delta_prev.expect("n >= 2"))
}

pub fn pressure_sample(param: &Parameter, s: f64, n: u32) -> Result<PressureSample> {
    let pair = delta_pair(param, s, n)?;
    Ok(PressureSample {
        n,
        s,
        log_delta: pair.log_delta,
        p_raw: pair.log_delta / n as f64,
        p_ratio: pair.log_delta_prev.map(|prev| pair.log_delta - prev),
    })
}

const NEWTON_MAX_STEPS: usize = 60;

/// f^n(z) and the derivative (f^n)'(z) along the orbit.
fn iterate_with_derivative(param: &Parameter, z: Complex64, n: u32) -> (Complex64, Complex64) {
    let mut w = z;
    let mut dw = Complex64::new(1.0, 0.0);
    for _ in 0..n {
        dw = 2.0 * w * dw;
        w = w * w + param.c();
    }
    (w, dw)
}

/// Newton refinement of a root of f^n(z) - z from a seed.
fn newton_periodic(param: &Parameter, n: u32, seed: Complex64) -> Option<Complex64> {
    let mut z = seed;
    for _ in 0..NEWTON_MAX_STEPS {
        let (w, dw) = iterate_with_derivative(param, z, n);
        let denom = dw - Complex64::new(1.0, 0.0);
        if denom.norm() < 1e-300 {
            return None;
        }
        let step = (w - z) / denom;
        z -= step;
        if step.norm() <= 1e-14 * z.norm().max(1.0) {
            return Some(z);
        }
    }
    None
}

/// Accept a candidate only if it is a genuine repelling period-n point.
fn validate_periodic(param: &Parameter, n: u32, z: Complex64) -> bool {
    let (w, dw) = iterate_with_derivative(param, z, n);
    (w - z).norm() <= 1e-9 * z.norm().max(1.0) && dw.norm() > 1.0
}

/// The point coded by a word: at c = 0 it is the exact angle-doubling
/// periodic point exp(2 pi i m / (2^n - 1)) with m the word read as binary;
/// for c != 0 that point is followed to the target parameter in small
/// continuation steps, re-polished by Newton on f^n(z) - z at each step.
fn coded_periodic_point(param: &Parameter, word: &DyadicWord, n: u32) -> Option<Complex64> {
    let c = param.c();
    let m = word.bits().iter().fold(0u64, |a, &b| a * 2 + b as u64);
    let theta = 2.0 * std::f64::consts::PI * m as f64 / ((1u64 << n) - 1) as f64;
    let mut z = Complex64::from_polar(1.0, theta);
    // step count keeps each move well inside the ~pi/2^n Newton basin
    let steps = ((2.0 * c.norm() * (1u64 << n) as f64).ceil() as usize).max(8);
    for j in 1..=steps {
        let t = j as f64 / steps as f64;
        let pj = Parameter::forced(c * t);
        z = newton_periodic(&pj, n, z)?;
    }
    Some(z)
}

fn periodic_point_for_word(param: &Parameter, word: &DyadicWord, n: u32) -> Result<Complex64> {
    match coded_periodic_point(param, word, n) {
        Some(p) if validate_periodic(param, n, p) => Ok(p),
        _ => Err(Error::NoConvergence { word: word.clone() }),
    }
}

/// Period-n points coded by words, one per word in lexicographic order.
///
/// Direct iteration of the inverse-branch composition
/// g_{eps_1} o ... o g_{eps_n} from alpha fails to converge for the many
/// cut-straddling words whose composition has no fixed point (it settles
/// into a two-cycle across the branch cut), and where it does converge the
/// limits do not cover Fix f^n. The points are therefore obtained by
/// continuation from the exact angle-doubling points of c = 0, which yields
/// every period-n point exactly once except for the single binary-expansion
/// collision (the all-zeros and all-ones words both code alpha).
pub fn periodic_points(param: &Parameter, n: u32) -> Result<Vec<Complex64>> {
    assert!(n >= 1 && n <= 16);
    let words: Vec<DyadicWord> = DyadicWord::all_of_length(n).collect();
    #[cfg(feature = "parallel")]
    {
        words
            .par_iter()
            .map(|w| periodic_point_for_word(param, w, n))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        words
            .iter()
            .map(|w| periodic_point_for_word(param, w, n))
            .collect()
    }
}

/// Pressure estimated over coded period-n points: (1/n) log sum over points
/// of exp(-s sum_{k<n} log 2|f^k z|). Cross-check estimator only; itinerary
/// collisions double-count O(1)-many points.
pub fn pressure_periodic(param: &Parameter, s: f64, n: u32) -> Result<f64> {
    let ln2 = std::f64::consts::LN_2;
    let points = periodic_points(param, n)?;
    let mut sum = PairwiseSum::new();
    for z0 in points {
        let mut z = z0;
        let mut excess = 0.0;
        for _ in 0..n {
            excess += z.norm().ln();
            z = dynamics::apply(param, z);
        }
        sum.push((-s * excess).exp());
    }
    let log_sum = sum.finish().ln() - s * (n as f64) * ln2;
    Ok(log_sum / n as f64)
}
