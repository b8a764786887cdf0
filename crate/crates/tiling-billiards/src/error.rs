use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("a cyclic polygon needs at least 5 sides, got {0}")]
    TooFewSides(usize),
    #[error("arc {index} is not positive ({value})")]
    NonPositiveArc { index: usize, value: f64 },
    #[error("the last arc is not the strict maximum")]
    NonMaximalLastArc,
    #[error("trajectory hit a corner at step {0}")]
    CornerHit(usize),
    #[error("start point is not strictly inside the initial tile")]
    StartOutsideTile,
    #[error("direction must be a nonzero vector")]
    ZeroDirection,
    #[error("tau = {tau} is outside the admissible range (1, {a_n})")]
    TauOutOfRange { tau: f64, a_n: f64 },
    #[error("the squared map does not stabilize the unit interval")]
    ConditionC1Violated,
    #[error("point {0} is outside the domain")]
    OutOfDomain(f64),
    #[error("orbit point within tolerance of a discontinuity at step {0}")]
    HitDiscontinuity(usize),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("invalid lengths: {0}")]
    InvalidLengths(String),
    #[error("degenerate induction step: competing lengths are equal")]
    DegenerateStep,
    #[error("cocycle matrix entry overflowed 64-bit integers")]
    CocycleOverflow,
    #[error("mean displacement is degenerate (|m| = {modulus:e})")]
    MeanDegenerate { modulus: f64 },
    #[error("permutation is reducible")]
    ReduciblePermutation,
    #[error("path does not return to its base permutation")]
    NotALoop,
    #[error("loop matrix is not primitive")]
    NotPrimitive,
    #[error("spectral hypothesis failed: {0}")]
    SpectralHypothesisFailed(SpectralFailure),
    #[error("deviation vector lies in E3 (|alpha| = {alpha:e})")]
    HInE3 { alpha: f64 },
    #[error("{0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralFailure {
    SecondEigenvalueNotExpanding,
    SecondEigenvalueNotSimple,
    ModulusTie,
    SecondEigenvalueComplex,
    PerronFailed,
}

impl std::fmt::Display for SpectralFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SpectralFailure::SecondEigenvalueNotExpanding => "|lambda2| <= 1",
            SpectralFailure::SecondEigenvalueNotSimple => "lambda2 not simple",
            SpectralFailure::ModulusTie => "another eigenvalue shares |lambda2|",
            SpectralFailure::SecondEigenvalueComplex => "lambda2 is not real",
            SpectralFailure::PerronFailed => "Perron iteration did not converge",
        };
        f.write_str(s)
    }
}

impl Error {
    /// Failures of mathematical hypotheses, as opposed to bad input.
    pub fn is_hypothesis_failure(&self) -> bool {
        matches!(
            self,
            Error::MeanDegenerate { .. }
                | Error::SpectralHypothesisFailed(_)
                | Error::HInE3 { .. }
                | Error::NotPrimitive
        )
    }
}
