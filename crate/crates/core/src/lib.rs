//! Exponential-rate (strip) analysis of linear systems.
//!
//! Norms of rational transfer functions on vertical lines `Re(s) = −λ` and
//! on strips between two such lines, dominance certificates, small-gain
//! checks on strips and bilateral Laplace transforms.

pub mod dominance;
pub mod error;
pub mod laplace;
pub mod linalg;
pub mod poly;
pub mod quad;
pub mod rational;
pub mod statespace;
pub mod strip;

pub use dominance::{
    classify_attractors, dominance_check, feedback_compose, inertia, l2p_gain, sector_slope_gain, slope_closed_loop,
    small_gain_check, strip_gain, verify_gain_lmi, DominanceCertificate, GainCertificate, Inertia, SlopeGridBound,
    SmallGainReport, SmallGainVerdict, StripGain,
};
pub use error::{Error, Result};
pub use laplace::{eval_signal, forward, inverse, roc_options, Direction, LaplacePair, Roc, SignalSpec, SignalTerm};
pub use poly::Polynomial;
pub use rational::{PartialFractionTerm, PartialFractions, RationalFunction};
pub use statespace::{
    convolve, impulse_response, modal_split, realize, tf_of, weighted_l2_norm, ModalSplit, SampledSignal,
    StateSpace,
};
pub use strip::{
    bode_data, decompose_line, frequency_response_data, h2_line_norm, line_norm_bisection, line_norm_grid,
    singular_value_test, strip_norm, BodeRow, Boundary, FrequencyRow, Line, LineMethod, NormMethod, NormResult,
    Strip,
};
