use thiserror::Error;

use crate::coding::DyadicWord;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// The two inverse branches merge at the critical value; the dyadic
    /// coding of the preimage tree breaks down at this parameter.
    #[error("inverse branches collide at the critical value{}", fmt_word(.word))]
    CriticalCollision { word: Option<DyadicWord> },

    /// 1 - c/xi(prefix) left the right half plane, so the principal-branch
    /// log recursion for r is no longer valid.
    #[error("principal-log branch violation at word {word}")]
    LogBranchViolation { word: DyadicWord },

    /// Inverse-branch composition failed to contract to a periodic point.
    #[error("periodic-point iteration did not converge for word {word}")]
    NoConvergence { word: DyadicWord },

    /// The pressure had no sign change on the widest allowed s-bracket.
    #[error("no sign change of pressure in s on [{lo}, {hi}]")]
    BracketFailure { lo: f64, hi: f64 },

    /// Bisection observed values inconsistent with a monotone pressure.
    #[error("pressure non-monotone in s beyond tolerance")]
    NonMonotone,

    /// The beta quadratic has complex roots (|c|^2 >= log 2).
    #[error("beta quadratic has no real root: |c|^2 >= log 2")]
    NoRealRoot,

    /// |c| below the threshold where the large-|c| bounds apply.
    #[error("|c| = {modulus} is not above (5+2*sqrt(6))/4; use the quasi-circle solver")]
    OutOfRange { modulus: f64 },

    /// Parameter outside the quasi-circle guard and not forced.
    #[error("|c| = {modulus} outside quasi-circle regime (|c| <= {guard}); pass force to override")]
    RegimeViolation { modulus: f64, guard: f64 },

    /// Box-count regression impossible: one occupied box at every scale.
    #[error("degenerate box-count fit: a single occupied box at every scale")]
    DegenerateFit,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

fn fmt_word(word: &Option<DyadicWord>) -> String {
    match word {
        Some(w) => format!(" (word {w})"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
