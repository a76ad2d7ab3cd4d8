use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failures raised by the analysis routines.
///
/// Variants split into two families: malformed inputs (`InvalidInput`,
/// `ImproperTransferFunction`, `Unsupported`) and analysis failures where the
/// input is well formed but the requested property does not hold or the
/// problem is posed on a boundary. [`Error::is_input_error`] tells them apart.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("evaluation point is within tolerance of the pole {pole}")]
    PoleProximity { pole: Complex64 },

    #[error("pole {pole} lies in the closed strip; the function is not analytic there")]
    PoleInStrip { pole: Complex64 },

    #[error("pole {pole} lies on the line Re(s) = {re_line}")]
    PoleOnLine { pole: Complex64, re_line: f64 },

    #[error("eigenvalue {eigenvalue} lies in the closed strip band")]
    EigenvalueInStrip { eigenvalue: Complex64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("Sylvester operator is singular: eigenvalues {0} and {1} sum to zero")]
    SingularSylvester(Complex64, Complex64),

    #[error("transfer function is improper (numerator degree {num} > denominator degree {den})")]
    ImproperTransferFunction { num: usize, den: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("sampled window too short: weighted tail is {ratio:.3e} of the total at rate {rate}")]
    WindowTooShort { rate: f64, ratio: f64 },

    #[error("integral diverges: {0}")]
    DivergentIntegral(String),

    #[error("system is not {expected}-dominant: {actual} eigenvalues lie right of Re(s) = {re_line}")]
    NotPDominant {
        expected: usize,
        actual: usize,
        re_line: f64,
    },

    #[error("eigenvalue {eigenvalue} lies on the shifted axis Re(s) = {re_line}")]
    MarginalRate { eigenvalue: Complex64, re_line: f64 },

    #[error("feedback interconnection is ill-posed (I + D2 D1 is singular)")]
    IllPosed,

    #[error("dominance fails at slope {slope}: {reason}")]
    NotPDominantAtSlope { slope: f64, reason: Box<Error> },

    #[error("regions of convergence do not intersect (need {lower} < Re(s) < {upper})")]
    NoCommonRoc { lower: f64, upper: f64 },

    #[error("pole {pole} lies inside the region of convergence")]
    PoleInRoc { pole: Complex64 },
}

impl Error {
    /// True for errors caused by malformed input rather than by the analysis.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_) | Error::ImproperTransferFunction { .. } | Error::Unsupported(_)
        )
    }
}
