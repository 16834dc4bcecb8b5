//! Primitives for the quadratic map z -> z^2 + c: the forward map, its
//! derivative modulus 2|z|, the repelling fixed point alpha, and the two
//! square-root inverse branches selected by a bit.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Guard on |c| inside which the dyadic coding is treated as valid.
pub const QUASI_CIRCLE_GUARD: f64 = 0.20;

/// Threshold (5 + 2*sqrt(6))/4 above which the Falconer bounds apply.
pub fn large_c_threshold() -> f64 {
    (5.0 + 2.0 * 6.0_f64.sqrt()) / 4.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    QuasiCircle,
    LargeC,
    Forced,
}

/// The parameter c of z^2 + c, tagged with the regime it was admitted under.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parameter {
    c: Complex64,
    regime: Regime,
}

impl Parameter {
    /// Admit c if it falls in the quasi-circle or large-|c| regime.
    pub fn new(c: Complex64) -> Result<Self> {
        let modulus = c.norm();
        if modulus <= QUASI_CIRCLE_GUARD {
            Ok(Self { c, regime: Regime::QuasiCircle })
        } else if modulus > large_c_threshold() {
            Ok(Self { c, regime: Regime::LargeC })
        } else {
            Err(Error::RegimeViolation { modulus, guard: QUASI_CIRCLE_GUARD })
        }
    }

    /// Admit any finite c, bypassing the regime guard.
    pub fn forced(c: Complex64) -> Self {
        Self { c, regime: Regime::Forced }
    }

    pub fn c(&self) -> Complex64 {
        self.c
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn conj(&self) -> Self {
        Self { c: self.c.conj(), regime: self.regime }
    }
}

/// The forward map z^2 + c.
pub fn apply(param: &Parameter, z: Complex64) -> Complex64 {
    z * z + param.c
}

/// |f'(z)| = 2|z|.
pub fn derivative_modulus(z: Complex64) -> f64 {
    2.0 * z.norm()
}

/// Principal complex square root, branch cut on the negative real axis,
/// argument of the result in (-pi/2, pi/2].
///
/// Hand-rolled from the half-angle formulas so that conjugating the input
/// conjugates the output bit for bit.
pub fn principal_sqrt(z: Complex64) -> Complex64 {
    let (re, im) = (z.re, z.im);
    if re == 0.0 && im == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let m = re.hypot(im);
    if re >= 0.0 {
        let t = ((m + re) * 0.5).sqrt();
        Complex64::new(t, im / (2.0 * t))
    } else {
        let t = ((m - re) * 0.5).sqrt();
        Complex64::new(im.abs() / (2.0 * t), t.copysign(im))
    }
}

/// The fixed point alpha = (1 + sqrt(1 - 4c))/2, choosing the root with
/// Re sqrt(1-4c) >= 0 so that alpha -> 1 as c -> 0. Total: at the parabolic
/// parameter c = 1/4 it returns 1/2.
pub fn fixed_point_alpha(param: &Parameter) -> Complex64 {
    let disc = Complex64::new(1.0, 0.0) - 4.0 * param.c;
    (Complex64::new(1.0, 0.0) + principal_sqrt(disc)) / 2.0
}

/// One inverse branch of z^2 + c: the solutions of f(w) = eta are
/// (-1)^bit (eta - c)^{1/2}. bit = 0 is the principal root, bit = 1 its
/// exact negation.
pub fn inverse_branch(param: &Parameter, eta: Complex64, bit: u8) -> Result<Complex64> {
    let d = eta - param.c;
    if d.norm() < 1e-300 {
        return Err(Error::CriticalCollision { word: None });
    }
    let w = principal_sqrt(d);
    Ok(if bit == 0 { w } else { -w })
}
