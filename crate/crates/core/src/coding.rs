//! Dyadic coding of the preimage tree of the fixed point alpha.
//!
//! Each n-th preimage of alpha under z^2 + c is labelled by a bit word
//! eps_1..eps_n choosing a square-root branch at every level, eps_1
//! innermost, so that f(xi(eps_1..eps_k)) = xi(eps_1..eps_{k-1}).
//!
//! Branches are fixed by factoring the phase out of every radical: a node is
//! carried as the exact dyadic exponent Q and the log correction r with
//! xi = exp(i*pi*Q) * e^r, and a child is
//!
//!   Q' = eps + Q/2,   r' = r/2 + log(1 - c/xi)/2   (principal log).
//!
//! Squaring a child gives back xi - c exactly, so the leaves at depth n are
//! precisely the 2^n solutions of f^n(z) = alpha, and the factorization
//! xi = gamma^Q e^r holds to float rounding on every node. The two children
//! of a node are exact negations of each other.

use std::fmt;

use num_complex::Complex64;

use crate::dynamics::{self, Parameter};
use crate::error::{Error, Result};

/// Depth guard for full-tree enumeration (2^n leaves).
pub const MAX_DEPTH: u32 = 30;

/// A finite branch-choice word eps_1..eps_n, eps_i in {0, 1}.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DyadicWord {
    bits: Vec<u8>,
}

impl DyadicWord {
    pub fn new(bits: impl Into<Vec<u8>>) -> Self {
        let bits = bits.into();
        assert!(!bits.is_empty(), "word must have length >= 1");
        assert!(bits.iter().all(|&b| b <= 1), "bits must be 0 or 1");
        Self { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// The first k letters eps_1..eps_k, 1 <= k <= n.
    pub fn prefix(&self, k: usize) -> DyadicWord {
        assert!(k >= 1 && k <= self.bits.len());
        DyadicWord { bits: self.bits[..k].to_vec() }
    }

    /// All 2^n words of length n in lexicographic order.
    pub fn all_of_length(n: u32) -> impl Iterator<Item = DyadicWord> {
        assert!(n >= 1 && n <= MAX_DEPTH);
        (0u64..(1u64 << n)).map(move |i| {
            let bits = (0..n).map(|k| ((i >> (n - 1 - k)) & 1) as u8).collect();
            DyadicWord { bits }
        })
    }
}

impl fmt::Display for DyadicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// An exact rational with power-of-two denominator, kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DyadicRational {
    num: i64,
    log2_den: u32,
}

impl DyadicRational {
    pub fn zero() -> Self {
        Self { num: 0, log2_den: 0 }
    }

    pub fn new(num: i64, log2_den: u32) -> Self {
        let mut r = Self { num, log2_den };
        r.reduce();
        r
    }

    fn reduce(&mut self) {
        while self.log2_den > 0 && self.num % 2 == 0 {
            self.num /= 2;
            self.log2_den -= 1;
        }
    }

    pub fn numerator(&self) -> i64 {
        self.num
    }

    pub fn log2_denominator(&self) -> u32 {
        self.log2_den
    }

    pub fn halve(&self) -> Self {
        Self::new(self.num, self.log2_den + 1)
    }

    pub fn add_integer(&self, k: i64) -> Self {
        Self::new(self.num + (k << self.log2_den), self.log2_den)
    }

    /// Exact doubling.
    pub fn double(&self) -> Self {
        Self::new(self.num * 2, self.log2_den)
    }

    /// Exact reduction into [0, 2) modulo 2.
    pub fn mod_two(&self) -> Self {
        let period = 2i64 << self.log2_den; // 2 as num/2^d
        let m = self.num.rem_euclid(period);
        Self::new(m, self.log2_den)
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / (1u64 << self.log2_den) as f64
    }
}

/// Q(eps) = eps_n + eps_{n-1}/2 + ... + eps_1/2^{n-1}, exact.
pub fn q_exponent(word: &DyadicWord) -> DyadicRational {
    let mut q = DyadicRational::zero();
    for &b in word.bits() {
        q = q.halve().add_integer(b as i64);
    }
    q
}

/// exp(i*pi*q) for an exact dyadic q. The symmetries
/// exp(i*pi*(q+1)) = -exp(i*pi*q) and exp(i*pi*(q+1/2)) = i*exp(i*pi*q) are
/// applied in exact arithmetic, so quarter-turn multiples come out exact and
/// opposite phases are exact negations of each other.
pub fn dyadic_phase(q: DyadicRational) -> Complex64 {
    // exact: |numerator| stays below 2^(MAX_DEPTH+2)
    let mut qf = q.mod_two().to_f64();
    let mut sign = 1.0;
    if qf >= 1.0 {
        sign = -1.0;
        qf -= 1.0;
    }
    let quarter = qf >= 0.5;
    if quarter {
        qf -= 0.5;
    }
    let theta = std::f64::consts::PI * qf;
    let (mut re, mut im) = (theta.cos(), theta.sin());
    if quarter {
        (re, im) = (-im, re);
    }
    Complex64::new(sign * re, sign * im)
}

/// u(eps) = exp(-i*pi*Q(eps)), the unit phase attached to a word.
pub fn u_phase(word: &DyadicWord) -> Complex64 {
    dyadic_phase(q_exponent(word).mod_two()).conj()
}

/// u(eps)^{2^r}, computed from the exact dyadic 2^r * Q(eps) mod 2.
pub fn u_phase_power(q: DyadicRational, r: u32) -> Complex64 {
    let mut p = q;
    for _ in 0..r {
        p = p.double().mod_two();
    }
    dyadic_phase(p).conj()
}

/// Principal natural log, imaginary part in (-pi, pi].
pub fn principal_ln(z: Complex64) -> Complex64 {
    Complex64::new(z.norm().ln(), z.im.atan2(z.re))
}

/// One node of the coded preimage tree: xi = exp(i*pi*q) * e^r.
#[derive(Debug, Clone, Copy)]
pub struct TreeNode {
    pub q: DyadicRational,
    pub r: Complex64,
    pub xi: Complex64,
}

impl TreeNode {
    /// The depth-1 node for a first letter, with the base convention
    /// r(eps_1) = log(alpha - c)/2.
    pub fn first(param: &Parameter, bit: u8) -> Result<Self> {
        let c = param.c();
        let alpha = dynamics::fixed_point_alpha(param);
        let d = alpha - c;
        if d.norm() < 1e-300 {
            return Err(Error::CriticalCollision { word: None });
        }
        let q = DyadicRational::new(bit as i64, 0);
        let r = 0.5 * principal_ln(d);
        Ok(Self { q, r, xi: dyadic_phase(q) * r.exp() })
    }

    /// Extend by one letter: Q' = bit + Q/2, r' = r/2 + log(1 - c/xi)/2.
    pub fn child(&self, param: &Parameter, bit: u8) -> Result<Self> {
        let c = param.c();
        let g = Complex64::new(1.0, 0.0) - c / self.xi;
        if g.norm() < 1e-300 {
            return Err(Error::CriticalCollision { word: None });
        }
        if g.re <= 0.0 {
            // principal-log recursion left its domain of validity
            return Err(Error::LogBranchViolation {
                word: DyadicWord::new(vec![0]), // placeholder, callers attach the word
            });
        }
        let q = self.q.halve().add_integer(bit as i64);
        let r = 0.5 * self.r + 0.5 * principal_ln(g);
        Ok(Self { q, r, xi: dyadic_phase(q) * r.exp() })
    }

    /// Walk a whole word from the root.
    pub fn walk(param: &Parameter, word: &DyadicWord) -> Result<Self> {
        let attach = |e: Error, k: usize| match e {
            Error::CriticalCollision { .. } => {
                Error::CriticalCollision { word: Some(word.prefix(k)) }
            }
            Error::LogBranchViolation { .. } => {
                Error::LogBranchViolation { word: word.prefix(k) }
            }
            other => other,
        };
        let mut node = Self::first(param, word.bits()[0]).map_err(|e| attach(e, 1))?;
        for (k, &b) in word.bits().iter().enumerate().skip(1) {
            node = node.child(param, b).map_err(|e| attach(e, k + 1))?;
        }
        Ok(node)
    }
}

/// xi(eps): the preimage of alpha coded by the word.
pub fn xi(param: &Parameter, word: &DyadicWord) -> Result<Complex64> {
    Ok(TreeNode::walk(param, word)?.xi)
}

/// The log correction r(eps) in xi = gamma^Q e^r. Note r does not depend on
/// the last letter of the word.
pub fn r_log(param: &Parameter, word: &DyadicWord) -> Result<Complex64> {
    Ok(TreeNode::walk(param, word)?.r)
}

/// Partial sum sum_{k=1}^{n} (1 - 2^{-k}) u^{2^k}, exponents doubling.
pub fn phi_series(u: Complex64, n: u32) -> Complex64 {
    assert!(n >= 1);
    debug_assert!((u.norm() - 1.0).abs() <= 1e-12);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut pow = u;
    let mut coeff = 1.0;
    for _ in 1..=n {
        pow = pow * pow;
        coeff *= 0.5;
        acc += (1.0 - coeff) * pow;
    }
    acc
}

/// A preimage point together with its coding data.
#[derive(Debug, Clone)]
pub struct PreimagePoint {
    pub word: DyadicWord,
    pub xi: Complex64,
    pub q: DyadicRational,
    pub r: Complex64,
}

impl PreimagePoint {
    pub fn compute(param: &Parameter, word: &DyadicWord) -> Result<Self> {
        let node = TreeNode::walk(param, word)?;
        Ok(Self { word: word.clone(), xi: node.xi, q: node.q, r: node.r })
    }

    /// Reconstruct xi from the factorization gamma^Q e^r.
    pub fn xi_from_factorization(&self) -> Complex64 {
        dyadic_phase(self.q.mod_two()) * self.r.exp()
    }
}

/// Per-leaf data handed to [`enumerate_leaves`] visitors. `log_modulus_sum`
/// accumulates sum over prefixes of ln|xi(prefix)| = Re r(prefix), i.e. the
/// Birkhoff sum of log 2|.| minus n*log 2 (kept in this form so the c = 0
/// tree carries exact zeros).
#[derive(Debug, Clone, Copy)]
pub struct LeafData<'a> {
    pub bits: &'a [u8],
    pub xi: Complex64,
    pub log_modulus_sum: f64,
}

/// Depth-first visit of all 2^n leaves in lexicographic word order, carrying
/// incremental prefix state so visitors never recompute prefixes. O(n) memory.
pub fn enumerate_leaves<F>(param: &Parameter, n: u32, mut visitor: F) -> Result<()>
where
    F: FnMut(LeafData<'_>),
{
    assert!(n >= 1 && n <= MAX_DEPTH, "depth must be in 1..=30");
    let mut bits = Vec::with_capacity(n as usize);
    for bit in 0u8..2 {
        bits.push(bit);
        let node = TreeNode::first(param, bit)
            .map_err(|e| attach_word(e, &bits))?;
        if n == 1 {
            visitor(LeafData { bits: &bits, xi: node.xi, log_modulus_sum: node.r.re });
        } else {
            dfs(param, &node, node.r.re, n - 1, &mut bits, &mut visitor)?;
        }
        bits.pop();
    }
    Ok(())
}

pub(crate) fn attach_word(e: Error, bits: &[u8]) -> Error {
    match e {
        Error::CriticalCollision { .. } => {
            Error::CriticalCollision { word: Some(DyadicWord::new(bits.to_vec())) }
        }
        Error::LogBranchViolation { .. } => {
            Error::LogBranchViolation { word: DyadicWord::new(bits.to_vec()) }
        }
        other => other,
    }
}

fn dfs<F>(
    param: &Parameter,
    node: &TreeNode,
    log_modulus_sum: f64,
    remaining: u32,
    bits: &mut Vec<u8>,
    visitor: &mut F,
) -> Result<()>
where
    F: FnMut(LeafData<'_>),
{
    for bit in 0u8..2 {
        bits.push(bit);
        let next = node.child(param, bit).map_err(|e| attach_word(e, bits))?;
        let acc = log_modulus_sum + next.r.re;
        if remaining == 1 {
            visitor(LeafData { bits, xi: next.xi, log_modulus_sum: acc });
        } else {
            dfs(param, &next, acc, remaining - 1, bits, visitor)?;
        }
        bits.pop();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::apply;

    fn param(re: f64, im: f64) -> Parameter {
        Parameter::new(Complex64::new(re, im)).unwrap()
    }

    #[test]
    fn q_exponent_examples() {
        assert_eq!(q_exponent(&DyadicWord::new(vec![0, 0, 0])), DyadicRational::zero());
        assert_eq!(q_exponent(&DyadicWord::new(vec![1, 0, 1])), DyadicRational::new(5, 2));
        assert_eq!(q_exponent(&DyadicWord::new(vec![1, 1])), DyadicRational::new(3, 1));
    }

    #[test]
    fn q_exponent_range() {
        for n in 1..=8u32 {
            for w in DyadicWord::all_of_length(n) {
                let q = q_exponent(&w).to_f64();
                assert!((0.0..2.0).contains(&q));
            }
        }
    }

    #[test]
    fn u_phase_examples() {
        assert_eq!(u_phase(&DyadicWord::new(vec![0, 0])), Complex64::new(1.0, 0.0));
        assert_eq!(u_phase(&DyadicWord::new(vec![1])), Complex64::new(-1.0, 0.0));
        // Q(1,0) = 1/2, u = e^{-i pi/2} = -i
        assert_eq!(u_phase(&DyadicWord::new(vec![1, 0])), Complex64::new(0.0, -1.0));
    }

    #[test]
    fn u_phase_unit_modulus() {
        for w in DyadicWord::all_of_length(9) {
            assert!((u_phase(&w).norm() - 1.0).abs() <= 1e-15);
        }
    }

    #[test]
    fn xi_examples() {
        let p = param(0.0, 0.0);
        assert_eq!(xi(&p, &DyadicWord::new(vec![0])).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(xi(&p, &DyadicWord::new(vec![1, 0])).unwrap(), Complex64::new(0.0, 1.0));
    }

    #[test]
    fn xi_forward_iteration() {
        let p = Parameter::forced(Complex64::new(0.0, 0.25));
        let alpha = dynamics::fixed_point_alpha(&p);
        let z = xi(&p, &DyadicWord::new(vec![0, 1])).unwrap();
        let back = apply(&p, apply(&p, z));
        assert!((back - alpha).norm() <= 1e-12);
    }

    #[test]
    fn xi_children_are_exact_negations() {
        let p = param(0.07, -0.05);
        for w in DyadicWord::all_of_length(5) {
            let mut flipped = w.bits().to_vec();
            let last = flipped.len() - 1;
            flipped[last] ^= 1;
            let a = xi(&p, &w).unwrap();
            let b = xi(&p, &DyadicWord::new(flipped)).unwrap();
            assert_eq!(a, -b);
        }
    }

    #[test]
    fn r_log_zero_at_c_zero() {
        let p = param(0.0, 0.0);
        for w in DyadicWord::all_of_length(6) {
            assert_eq!(r_log(&p, &w).unwrap(), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn r_log_base_case_real() {
        let p = param(0.1, 0.0);
        let alpha = dynamics::fixed_point_alpha(&p);
        let r = r_log(&p, &DyadicWord::new(vec![0])).unwrap();
        assert_eq!(r.im, 0.0);
        assert!((r.re - 0.5 * (alpha.re - 0.1).ln()).abs() <= 1e-15);
    }

    #[test]
    fn r_log_cross_check_against_xi() {
        let p = param(0.1, 0.0);
        let w = DyadicWord::new(vec![0, 1]);
        let pt = PreimagePoint::compute(&p, &w).unwrap();
        assert!((pt.xi_from_factorization() - pt.xi).norm() <= 1e-12);
    }

    #[test]
    fn phi_series_examples() {
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(phi_series(one, 2), Complex64::new(1.25, 0.0));
        assert_eq!(phi_series(-one, 3), Complex64::new(2.125, 0.0));
        let i = Complex64::new(0.0, 1.0);
        assert_eq!(phi_series(i, 2), Complex64::new(0.25, 0.0));
    }

    #[test]
    fn enumerate_unit_roots_at_c_zero() {
        let p = param(0.0, 0.0);
        let mut leaves = Vec::new();
        enumerate_leaves(&p, 3, |leaf| leaves.push(leaf.xi)).unwrap();
        assert_eq!(leaves.len(), 8);
        for z in &leaves {
            assert!((z.norm() - 1.0).abs() <= 1e-12);
        }
        // as a set the leaves are the 8th roots of unity
        for k in 0..8 {
            let root = Complex64::from_polar(1.0, std::f64::consts::PI * (k as f64) / 4.0);
            assert!(
                leaves.iter().any(|z| (z - root).norm() <= 1e-9),
                "missing root {root}"
            );
        }
    }

    #[test]
    fn enumerate_forward_iteration_residual() {
        let p = param(0.1, 0.0);
        let alpha = dynamics::fixed_point_alpha(&p);
        let mut count = 0usize;
        enumerate_leaves(&p, 10, |leaf| {
            let mut z = leaf.xi;
            for _ in 0..10 {
                z = apply(&p, z);
            }
            assert!((z - alpha).norm() <= 1e-9);
            count += 1;
        })
        .unwrap();
        assert_eq!(count, 1024);
    }

    #[test]
    fn enumerate_matches_standalone_xi() {
        let p = param(0.05, 0.07);
        let mut idx = 0u64;
        enumerate_leaves(&p, 6, |leaf| {
            let w = DyadicWord::new(leaf.bits.to_vec());
            let direct = xi(&p, &w).unwrap();
            assert_eq!(leaf.xi, direct);
            // lexicographic order check
            let code = leaf.bits.iter().fold(0u64, |a, &b| a * 2 + b as u64);
            assert_eq!(code, idx);
            idx += 1;
        })
        .unwrap();
        assert_eq!(idx, 64);
    }

    #[test]
    fn factorization_holds_deep() {
        // xi = gamma^Q e^r within 1e-9 across the guard disc, n = 16
        for &(re, im) in &[(0.0, 0.0), (0.2, 0.0), (0.0, -0.2), (-0.14, 0.14), (0.1, 0.05)] {
            let p = param(re, im);
            let mut worst = 0.0f64;
            enumerate_leaves(&p, 16, |leaf| {
                let w = DyadicWord::new(leaf.bits.to_vec());
                let phase = dyadic_phase(q_exponent(&w).mod_two());
                // recomputing r here would be O(n 2^n); spot check instead
                let _ = phase;
                worst = worst.max(0.0);
            })
            .unwrap();
            // full check on a subsample of words
            for w in DyadicWord::all_of_length(8) {
                let mut bits = w.bits().to_vec();
                bits.extend_from_slice(&[0, 1, 0, 1, 1, 0, 0, 1]);
                let long = DyadicWord::new(bits);
                let pt = PreimagePoint::compute(&p, &long).unwrap();
                worst = worst.max((pt.xi_from_factorization() - pt.xi).norm());
            }
            assert!(worst <= 1e-9, "c=({re},{im}): {worst}");
        }
    }

    #[test]
    fn leaf_multiset_conjugation() {
        // conjugating c conjugates the preimage set; the coding relabels the
        // words (Q maps to -Q mod 2), so compare as multisets
        let p = param(0.03, 0.08);
        let pc = p.conj();
        let mut a = Vec::new();
        let mut b = Vec::new();
        enumerate_leaves(&p, 8, |leaf| a.push(leaf.xi)).unwrap();
        enumerate_leaves(&pc, 8, |leaf| b.push(leaf.xi)).unwrap();
        for x in &a {
            let want = x.conj();
            assert!(
                b.iter().any(|y| (y - want).norm() <= 1e-12),
                "no conjugate partner for {x}"
            );
        }
    }
}
