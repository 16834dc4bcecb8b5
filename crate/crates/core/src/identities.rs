//! Executable checks of the algebraic identities behind the pressure
//! expansion: exact phase halving of the dyadic exponents, cancellation of
//! pure-phase sums, orthogonality and the Re-squared identity for the mixed
//! second-order terms, and the gamma^Q e^r factorization of xi.

use num_complex::Complex64;

use crate::coding::{q_exponent, u_phase_power, DyadicWord};
use crate::dynamics::Parameter;
use crate::error::Result;
use crate::{coding, dynamics};

/// One identity's outcome: the worst residual observed and its allowed bound.
#[derive(Debug, Clone)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub residual: f64,
    pub bound: f64,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.residual <= self.bound
    }
}

#[derive(Debug, Clone)]
pub struct IdentityReport {
    pub c: Complex64,
    pub n: u32,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(IdentityCheck::passed)
    }
}

/// 2*Q(eps) == Q(eps|_{n-1}) (mod 2), exact on dyadic rationals.
pub fn phase_halving_exact(n: u32) -> bool {
    DyadicWord::all_of_length(n).all(|w| {
        let parent = w.prefix(w.len() - 1);
        q_exponent(&w).double().mod_two() == q_exponent(&parent).mod_two()
    })
}

/// max over 1 <= r <= n-1 of |sum_eps u(eps)^{2^r}|.
pub fn pure_phase_cancellation(n: u32) -> f64 {
    let qs: Vec<_> = DyadicWord::all_of_length(n).map(|w| q_exponent(&w)).collect();
    (1..n)
        .map(|r| {
            qs.iter()
                .map(|&q| u_phase_power(q, r))
                .sum::<Complex64>()
                .norm()
        })
        .fold(0.0, f64::max)
}

/// max over 1 <= r < l <= n-1 of |sum_eps Re(c u^{2^r}) Re(c u^{2^l})|.
pub fn orthogonality(c: Complex64, n: u32) -> f64 {
    let qs: Vec<_> = DyadicWord::all_of_length(n).map(|w| q_exponent(&w)).collect();
    let mut worst = 0.0f64;
    for r in 1..n.saturating_sub(1) {
        for l in (r + 1)..n {
            let s: f64 = qs
                .iter()
                .map(|&q| {
                    (c * u_phase_power(q, r)).re * (c * u_phase_power(q, l)).re
                })
                .sum();
            worst = worst.max(s.abs());
        }
    }
    worst
}

/// Residual of sum_eps Re(c u^{2^r})^2 against its closed form:
/// 2^n |c|^2 / 2 for r < n-1, 2^n (|c|^2 + Re c^2)/2 for r in {n-1, n}.
pub fn re_squared(c: Complex64, n: u32) -> f64 {
    let qs: Vec<_> = DyadicWord::all_of_length(n).map(|w| q_exponent(&w)).collect();
    let pow = (1u64 << n) as f64;
    let mut worst = 0.0f64;
    for r in 1..=n {
        let s: f64 = qs.iter().map(|&q| (c * u_phase_power(q, r)).re.powi(2)).sum();
        let expected = if r < n - 1 {
            0.5 * pow * c.norm_sqr()
        } else {
            0.5 * pow * (c.norm_sqr() + (c * c).re)
        };
        worst = worst.max((s - expected).abs());
    }
    worst
}

/// max over all tree nodes of the factorization defect: both
/// |gamma^Q e^r - xi| (the representation reproduces the stored point) and
/// |xi^2 - (xi_parent - c)| (the point really is a preimage of its parent).
pub fn factorization_residual(param: &Parameter, n: u32) -> Result<f64> {
    let c = param.c();
    let alpha = dynamics::fixed_point_alpha(param);
    let mut worst = 0.0f64;
    let mut stack: Vec<(coding::TreeNode, Complex64, u32)> = Vec::new();
    for bit in [1u8, 0] {
        stack.push((coding::TreeNode::first(param, bit)?, alpha, 1));
    }
    while let Some((node, parent, depth)) = stack.pop() {
        let phase = coding::dyadic_phase(node.q.mod_two());
        let rebuilt = (phase * node.r.exp() - node.xi).norm();
        let square = (node.xi * node.xi - (parent - c)).norm();
        worst = worst.max(rebuilt).max(square);
        if depth < n {
            for bit in [1u8, 0] {
                stack.push((node.child(param, bit)?, node.xi, depth + 1));
            }
        }
    }
    Ok(worst)
}

/// Run the full suite at a given parameter and depth.
pub fn run_suite(param: &Parameter, n: u32) -> Result<IdentityReport> {
    assert!(n >= 2 && n <= 12, "identity suite depth must be in 2..=12");
    let c = param.c();
    let pow = (1u64 << n) as f64;
    let checks = vec![
        IdentityCheck {
            name: "phase_halving",
            residual: if phase_halving_exact(n) { 0.0 } else { 1.0 },
            bound: 0.0,
        },
        IdentityCheck {
            name: "pure_phase_cancellation",
            residual: pure_phase_cancellation(n),
            bound: 1e-12 * pow,
        },
        IdentityCheck {
            name: "orthogonality",
            residual: orthogonality(c, n),
            bound: 1e-12 * pow * c.norm_sqr().max(f64::MIN_POSITIVE),
        },
        IdentityCheck {
            name: "re_squared",
            residual: re_squared(c, n),
            bound: 1e-12 * pow * c.norm_sqr().max(f64::MIN_POSITIVE),
        },
        IdentityCheck {
            name: "xi_factorization",
            residual: factorization_residual(param, n)?,
            bound: 1e-9,
        },
    ];
    Ok(IdentityReport { c, n, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_halving_all_depths() {
        for n in 2..=12 {
            assert!(phase_halving_exact(n), "failed at n={n}");
        }
    }

    #[test]
    fn cancellation_all_depths() {
        for n in 2..=12u32 {
            let worst = pure_phase_cancellation(n);
            assert!(worst <= 1e-12 * (1u64 << n) as f64, "n={n}: {worst}");
        }
    }

    #[test]
    fn orthogonality_on_circle_grid() {
        for k in 0..8 {
            let theta = std::f64::consts::PI * (k as f64) / 4.0;
            let c = Complex64::from_polar(0.1, theta);
            for n in 3..=10u32 {
                let worst = orthogonality(c, n);
                let bound = 1e-12 * (1u64 << n) as f64 * c.norm_sqr();
                assert!(worst <= bound, "n={n} k={k}: {worst} > {bound}");
            }
        }
    }

    #[test]
    fn re_squared_on_circle_grid() {
        for k in 0..8 {
            let theta = std::f64::consts::PI * (k as f64) / 4.0;
            let c = Complex64::from_polar(0.1, theta);
            for n in 3..=10u32 {
                let worst = re_squared(c, n);
                let bound = 1e-12 * (1u64 << n) as f64 * c.norm_sqr();
                assert!(worst <= bound, "n={n} k={k}: {worst} > {bound}");
            }
        }
    }

    #[test]
    fn factorization_on_c_grid() {
        for &(re, im) in &[(0.0, 0.0), (0.1, 0.0), (0.0, 0.1), (-0.14, 0.05), (0.05, -0.19)] {
            let p = Parameter::new(Complex64::new(re, im)).unwrap();
            let worst = factorization_residual(&p, 16).unwrap();
            assert!(worst <= 1e-9, "c=({re},{im}): {worst}");
        }
    }

    #[test]
    fn phi_series_tracks_summed_r_logs() {
        // Unrolling the r recursion to first order in c gives
        //   Re sum_k r(eps|_{n-k})
        //     = -Re(c Phi_n(u(eps))) - Re(c) (1 - 2^{-n}) + O(n^2 |c|^2);
        // the constant collects the u^{2^n} = 1 tail of every prefix.
        let cs = [Complex64::new(1e-3, 0.0), Complex64::new(0.0, 1e-3)];
        for c in cs {
            let p = Parameter::new(c).unwrap();
            for n in 2..=10u32 {
                let bound = 10.0 * (n as f64).powi(2) * c.norm_sqr();
                let tail = 1.0 - 0.5f64.powi(n as i32);
                for w in DyadicWord::all_of_length(n) {
                    let mut sum = Complex64::new(0.0, 0.0);
                    for k in 1..=w.len() {
                        sum += crate::coding::r_log(&p, &w.prefix(k)).unwrap();
                    }
                    let phi = crate::coding::phi_series(crate::coding::u_phase(&w), n);
                    let resid = (sum.re + (c * phi).re + c.re * tail).abs();
                    assert!(resid <= bound, "n={n} w={w}: {resid} > {bound}");
                }
            }
        }
    }

    #[test]
    fn suite_passes_at_reference_parameter() {
        let p = Parameter::new(Complex64::new(0.1, 0.0)).unwrap();
        let report = run_suite(&p, 10).unwrap();
        assert!(report.all_passed(), "{:?}", report.checks);
    }

    #[test]
    fn suite_exact_dyadic_identities_at_c_zero() {
        let p = Parameter::new(Complex64::new(0.0, 0.0)).unwrap();
        let report = run_suite(&p, 10).unwrap();
        let halving = &report.checks[0];
        assert_eq!(halving.residual, 0.0);
        assert!(report.all_passed());
    }
}
