//! Independent dimension oracle: sample the Julia set by randomized inverse
//! iteration and fit a box-counting slope to log N(delta) vs log(1/delta).

use std::collections::HashSet;

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{self, Parameter};
use crate::error::{Error, Result};

/// Identifier of the PRNG driving the branch choices, recorded in metadata.
pub const RNG_ALGORITHM: &str = "chacha8";

#[derive(Debug, Clone)]
pub struct PointCloud {
    pub points: Vec<Complex64>,
    pub c: Complex64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct BoxCountEstimate {
    pub scales: Vec<f64>,
    pub counts: Vec<u64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Inverse-iteration sampler: from alpha, repeatedly apply a random inverse
/// branch; drop the first `burn_in` iterates, keep the next `count`.
/// Deterministic for a fixed seed.
pub fn sample_julia(param: &Parameter, count: usize, burn_in: usize, seed: u64) -> Result<PointCloud> {
    assert!(count >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z = dynamics::fixed_point_alpha(param);
    let mut points = Vec::with_capacity(count);
    for i in 0..burn_in + count {
        let bit = (rng.next_u32() & 1) as u8;
        z = dynamics::inverse_branch(param, z, bit)?;
        if i >= burn_in {
            points.push(z);
        }
    }
    Ok(PointCloud { points, c: param.c(), seed })
}

/// Escape-radius membership proxy: the forward orbit stays within
/// R = max(2, |c|) for at least `iters` steps.
pub fn stays_bounded(param: &Parameter, z0: Complex64, iters: usize) -> bool {
    let r = param.c().norm().max(2.0);
    let mut z = z0;
    for _ in 0..iters {
        if z.norm() > r {
            return false;
        }
        z = dynamics::apply(param, z);
    }
    true
}

/// Count occupied delta-boxes per scale (grid anchored at the origin) and
/// least-squares fit log N against log(1/delta).
pub fn box_dimension(cloud: &PointCloud, scales: &[f64]) -> Result<BoxCountEstimate> {
    assert!(!scales.is_empty());
    assert!(!cloud.points.is_empty());
    assert!(scales.iter().all(|&d| d > 0.0));

    let counts: Vec<u64> = scales.iter().map(|&d| count_boxes(&cloud.points, d)).collect();
    if counts.iter().all(|&n| n == 1) {
        return Err(Error::DegenerateFit);
    }

    // least squares of y = log N(delta) on x = log(1/delta)
    let xs: Vec<f64> = scales.iter().map(|&d| (1.0 / d).ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&n| (n as f64).ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(BoxCountEstimate {
        scales: scales.to_vec(),
        counts,
        slope,
        intercept,
        r_squared,
    })
}

fn count_boxes(points: &[Complex64], delta: f64) -> u64 {
    let mut boxes: HashSet<(i64, i64)> = HashSet::new();
    for z in points {
        boxes.insert(((z.re / delta).floor() as i64, (z.im / delta).floor() as i64));
    }
    boxes.len() as u64
}
