//! Dimension from the pressure equation: bisect s -> P(s) = 0 using the
//! ratio estimator at increasing depths, extrapolate, and compare against
//! the small-|c| asymptotic 1 + |c|^2/(4 log 2) and its beta refinement.

use num_complex::Complex64;

use crate::dynamics::{self, Parameter};
use crate::error::{Error, Result};
use crate::pressure;

const LN2: f64 = std::f64::consts::LN_2;

/// Initial s-bracket: a quasi-circle dimension lies in [1, 2), with margin.
const BRACKET: (f64, f64) = (0.5, 2.0);
/// Widest bracket tried before giving up.
const BRACKET_MAX: (f64, f64) = (0.25, 4.0);

#[derive(Debug, Clone)]
pub struct DimensionReport {
    pub c: Complex64,
    /// Bowen root of the ratio-estimator pressure at each depth.
    pub roots_by_n: Vec<(u32, f64)>,
    /// Aitken-extrapolated root (falls back to the deepest root).
    pub s_star: f64,
    pub beta: f64,
    pub ruelle_value: f64,
    /// |s_star - ruelle_value|.
    pub residual: f64,
    pub bracket: (f64, f64),
    pub tolerance: f64,
}

/// 1 + |c|^2 / (4 log 2), the asymptotic with its o(|c|^2) term dropped.
pub fn ruelle_asymptotic(param: &Parameter) -> f64 {
    1.0 + param.c().norm_sqr() / (4.0 * LN2)
}

/// The positive root of (|c|^2/4)(1+beta)^2 - beta log 2 = 0 that is
/// continuous at c = 0 (the smaller one). Exceeds |c|^2/(4 log 2) for c != 0.
pub fn beta_quadratic(param: &Parameter) -> Result<f64> {
    let q = param.c().norm_sqr() / 4.0;
    if q == 0.0 {
        return Ok(0.0);
    }
    let disc = (LN2 - 2.0 * q).powi(2) - 4.0 * q * q;
    if disc < 0.0 {
        return Err(Error::NoRealRoot);
    }
    // the two roots multiply to 1; this form of the smaller one avoids the
    // catastrophic cancellation of the textbook formula at small q
    Ok(2.0 * q / ((LN2 - 2.0 * q) + disc.sqrt()))
}

/// Falconer's dimension bounds 2 log 2 / log(4(|c| +/- sqrt(2|c|))) for
/// |c| above (5 + 2 sqrt 6)/4; returned as (lower, upper).
pub fn large_c_bounds(param: &Parameter) -> Result<(f64, f64)> {
    let m = param.c().norm();
    if m <= dynamics::large_c_threshold() {
        return Err(Error::OutOfRange { modulus: m });
    }
    let root = (2.0 * m).sqrt();
    let lower = 2.0 * LN2 / (4.0 * (m + root)).ln();
    let upper = 2.0 * LN2 / (4.0 * (m - root)).ln();
    Ok((lower, upper))
}

/// Bisect the monotone-decreasing map s -> pressure_ratio(c, s, n) to a
/// bracket of width `tol`.
fn bisect_root(param: &Parameter, n: u32, tol: f64) -> Result<(f64, (f64, f64))> {
    let f = |s: f64| pressure::pressure_ratio(param, s, n);
    let (mut lo, mut hi) = BRACKET;
    let mut flo = f(lo)?;
    let mut fhi = f(hi)?;
    if !(flo > 0.0 && fhi < 0.0) {
        (lo, hi) = BRACKET_MAX;
        flo = f(lo)?;
        fhi = f(hi)?;
        if !(flo > 0.0 && fhi < 0.0) {
            return Err(Error::BracketFailure { lo, hi });
        }
    }
    let bracket = (lo, hi);
    // slack for float noise in the tree sums when checking monotonicity
    let slack = 1e-9 * (1.0 + flo.abs() + fhi.abs());
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // bracket narrower than float spacing
        }
        let fmid = f(mid)?;
        if fmid > flo + slack || fmid < fhi - slack {
            return Err(Error::NonMonotone);
        }
        if fmid > 0.0 {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
            fhi = fmid;
        }
    }
    Ok((0.5 * (lo + hi), bracket))
}

/// Aitken delta-squared extrapolation of the last three terms; None when the
/// second difference is too small to divide by.
fn aitken(s: &[f64]) -> Option<f64> {
    let k = s.len();
    if k < 3 {
        return None;
    }
    let (a, b, c) = (s[k - 3], s[k - 2], s[k - 1]);
    let denom = c - 2.0 * b + a;
    let d = c - b;
    if denom.abs() <= 1e-14 * (1.0 + c.abs()) {
        return None;
    }
    Some(c - d * d / denom)
}

/// Solve Bowen's equation: bisect the ratio-estimator pressure in s at every
/// depth 4..=n_max, then extrapolate the root sequence.
pub fn solve_dimension(param: &Parameter, n_max: u32, tol: f64) -> Result<DimensionReport> {
    assert!(n_max >= 4, "need n_max >= 4");
    assert!(tol > 0.0);
    let mut roots_by_n = Vec::with_capacity((n_max - 3) as usize);
    let mut bracket = BRACKET;
    for n in 4..=n_max {
        let (root, br) = bisect_root(param, n, tol)?;
        bracket = br;
        roots_by_n.push((n, root));
    }
    let seq: Vec<f64> = roots_by_n.iter().map(|&(_, s)| s).collect();
    let s_star = aitken(&seq).unwrap_or_else(|| *seq.last().expect("nonempty"));
    let ruelle_value = ruelle_asymptotic(param);
    let beta = beta_quadratic(param).unwrap_or(f64::NAN);
    Ok(DimensionReport {
        c: param.c(),
        roots_by_n,
        s_star,
        beta,
        ruelle_value,
        residual: (s_star - ruelle_value).abs(),
        bracket,
        tolerance: tol,
    })
}
