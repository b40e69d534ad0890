//! Error taxonomy shared by every module in the crate.
//!
//! All computations are exact, so every failure is structural: an input
//! violated a precondition (non-monic modulus, non-unit argument, a point
//! sitting on a divisor, ...) or a bivariate Laurent operation needed a
//! coefficient beyond the tracked window. Each variant carries a short
//! human-readable context string; [`Error::code`] gives a stable
//! machine-readable identifier used by the CLI.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Every way an infinichow computation can fail.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Modulus of a number field is not monic.
    #[error("modulus is not monic: {0}")]
    NotMonic(String),
    /// Modulus of a number field is not squarefree (gcd(m, m') != 1).
    #[error("modulus is not squarefree: {0}")]
    NotSquarefree(String),
    /// Division by zero in an exact ring.
    #[error("division by zero: {0}")]
    DivisionByZero(String),
    /// Two operands belong to different number fields.
    #[error("field mismatch: {0}")]
    FieldMismatch(String),
    /// A field element has no inverse modulo the modulus (the modulus is
    /// reducible and the element witnesses a factor).
    #[error("element is not invertible: {0}")]
    NotInvertible(String),
    /// A series or Laurent element is not a unit where one is required.
    #[error("not a unit: {0}")]
    NotUnit(String),
    /// `exp` requires a nilpotent argument (zero constant term).
    #[error("constant term must vanish: {0}")]
    ConstantTermNonzero(String),
    /// An index, precision, or other parameter is out of its legal range.
    #[error("out of range: {0}")]
    OutOfRange(String),
    /// A bivariate Laurent operation needed a coefficient beyond the
    /// window of known coefficients.
    #[error("s-window exhausted: {0}")]
    WindowExhausted(String),
    /// The t-precision is too low for the requested operation.
    #[error("t-precision too low: {0}")]
    PrecisionTooLow(String),
    /// An element (or tuple) fails the goodness condition.
    #[error("not good: {0}")]
    NotGood(String),
    /// Two triples are not congruent modulo t^2.
    #[error("not congruent mod t^2: {0}")]
    NotCongruent(String),
    /// An argument of a Bloch symbol is not flat (x or 1-x fails to be a unit).
    #[error("not flat: {0}")]
    NotFlat(String),
    /// The five-term relation needs x - y to be a unit.
    #[error("difference is not a unit: {0}")]
    DifferenceNotUnit(String),
    /// A pair (f, g) claimed to satisfy f + g = 1 does not.
    #[error("invalid pair: {0}")]
    InvalidPair(String),
    /// Evaluation of a factored rational at a point of its divisor.
    #[error("evaluation at a divisor point: {0}")]
    EvaluationAtDivisor(String),
    /// A tuple of functions is not good at the requested point.
    #[error("not good at point: {0}")]
    NotGoodAtPoint(String),
    /// A value expected to descend to the rational subfield does not.
    #[error("not Galois-stable: {0}")]
    NotGaloisStable(String),
    /// A cycle face meets a coordinate divisor improperly.
    #[error("not admissible: {0}")]
    NotAdmissible(String),
    /// A face point has no finite reduction (special value 0 or infinity).
    #[error("no finite reduction: {0}")]
    NotFiniteReduction(String),
    /// A directly constructed zero-cycle point lies on the cube boundary.
    #[error("face point on the cube boundary: {0}")]
    FaceOnBoundary(String),
    /// Malformed request or literal.
    #[error("parse error: {0}")]
    ParseError(String),
    /// Unknown CLI command.
    #[error("unknown command: {0}")]
    UnknownCommand(String),
    /// Unknown invariant-suite name.
    #[error("unknown suite: {0}")]
    UnknownSuite(String),
}

impl Error {
    /// Stable machine-readable code for the CLI and tests.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotMonic(_) => "not-monic",
            Error::NotSquarefree(_) => "not-squarefree",
            Error::DivisionByZero(_) => "division-by-zero",
            Error::FieldMismatch(_) => "field-mismatch",
            Error::NotInvertible(_) => "not-invertible",
            Error::NotUnit(_) => "not-unit",
            Error::ConstantTermNonzero(_) => "constant-term-nonzero",
            Error::OutOfRange(_) => "out-of-range",
            Error::WindowExhausted(_) => "window-exhausted",
            Error::PrecisionTooLow(_) => "precision-too-low",
            Error::NotGood(_) => "not-good",
            Error::NotCongruent(_) => "not-congruent",
            Error::NotFlat(_) => "not-flat",
            Error::DifferenceNotUnit(_) => "difference-not-unit",
            Error::InvalidPair(_) => "invalid-pair",
            Error::EvaluationAtDivisor(_) => "evaluation-at-divisor",
            Error::NotGoodAtPoint(_) => "not-good-at-point",
            Error::NotGaloisStable(_) => "not-galois-stable",
            Error::NotAdmissible(_) => "not-admissible",
            Error::NotFiniteReduction(_) => "not-finite-reduction",
            Error::FaceOnBoundary(_) => "face-on-boundary",
            Error::ParseError(_) => "parse-error",
            Error::UnknownCommand(_) => "unknown-command",
            Error::UnknownSuite(_) => "unknown-suite",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_are_kebab_case_and_distinct() {
        let errs = [
            Error::NotMonic(String::new()),
            Error::NotSquarefree(String::new()),
            Error::DivisionByZero(String::new()),
            Error::FieldMismatch(String::new()),
            Error::NotInvertible(String::new()),
            Error::NotUnit(String::new()),
            Error::ConstantTermNonzero(String::new()),
            Error::OutOfRange(String::new()),
            Error::WindowExhausted(String::new()),
            Error::PrecisionTooLow(String::new()),
            Error::NotGood(String::new()),
            Error::NotCongruent(String::new()),
            Error::NotFlat(String::new()),
            Error::DifferenceNotUnit(String::new()),
            Error::InvalidPair(String::new()),
            Error::EvaluationAtDivisor(String::new()),
            Error::NotGoodAtPoint(String::new()),
            Error::NotGaloisStable(String::new()),
            Error::NotAdmissible(String::new()),
            Error::NotFiniteReduction(String::new()),
            Error::FaceOnBoundary(String::new()),
            Error::ParseError(String::new()),
            Error::UnknownCommand(String::new()),
            Error::UnknownSuite(String::new()),
        ];
        let mut codes: Vec<&str> = errs.iter().map(|e| e.code()).collect();
        for c in &codes {
            assert!(
                c.chars().all(|ch| ch.is_ascii_lowercase() || ch == '-'),
                "code {c} is not kebab-case"
            );
        }
        codes.sort_unstable();
        codes.dedup();
        assert_eq!(codes.len(), errs.len(), "duplicate error codes");
    }
}
