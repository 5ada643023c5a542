use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Failure modes of the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The steady-state linear system has no unique solution.
    #[error("singular steady-state system (relative pivot {pivot:.3e})")]
    SingularSystem { pivot: f64 },

    /// An iterative or adaptive procedure did not reach its tolerance.
    #[error("{what} did not converge (estimate {estimate:.3e}, change {change:.3e})")]
    NonConvergence { what: &'static str, estimate: f64, change: f64 },

    /// An input lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(&'static str),

    /// A parameter violates a type invariant.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: &'static str },

    /// Bessel sideband closure fails at the requested truncation.
    #[error("sideband truncation n_max = {n_max} keeps only {kept:.12} of the power for beta = {beta}")]
    Truncation { beta: f64, n_max: usize, kept: f64 },

    /// A sideband fell outside the scanned detuning grid.
    #[error("detuning {detuning:.6e} rad/s lies outside the spectrum grid")]
    OutOfGrid { detuning: f64 },

    /// The RAM photocurrent expression only holds for odd harmonics.
    #[error("harmonic {0} is not odd and positive")]
    EvenHarmonic(u32),

    /// The servo loop diverged.
    #[error("servo unstable at t = {time:.6e} s with gains kp = {kp}, ki = {ki}, kd = {kd}")]
    Unstable { time: f64, kp: f64, ki: f64, kd: f64 },

    /// The noise kind cannot be produced by power-law shaping.
    #[error("unsupported noise kind `{0}`")]
    UnsupportedKind(&'static str),

    /// Too few averaging bins for a requested averaging time.
    #[error("insufficient data for tau = {tau:.6e} s: {bins} bins")]
    InsufficientData { tau: f64, bins: usize },

    /// The matched-filter kernel is narrower than the grid resolves.
    #[error("kernel FWHM {fwhm:.6e} is narrower than two grid steps ({step:.6e})")]
    KernelTooNarrow { fwhm: f64, step: f64 },

    /// The signal does not respond to the RF field at the operating point.
    #[error("zero responsivity at the operating point")]
    ZeroResponsivity,
}
