use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state blew up at t = {t}: norm = {norm}")]
    BlowUp { t: f64, norm: f64 },

    #[error("argument {x} outside supported range [0, {max}]")]
    OutOfRange { x: f64, max: f64 },

    #[error("sigma = {sigma} is at or above the pole {pole} of the gain bound")]
    SigmaAtPole { sigma: f64, pole: f64 },

    #[error("no admissible mode count for theta = {theta} within cap {cap}")]
    ModeSearchExhausted { theta: f64, cap: usize },

    #[error("requested {requested} modes but only {available} are tracked")]
    TooManyModes { requested: usize, available: usize },

    #[error("pair (A, g) is not controllable (rank {rank} of {n})")]
    Uncontrollable { rank: usize, n: usize },

    #[error("pole placement is ill-conditioned (condition estimate {cond:e})")]
    IllConditioned { cond: f64 },

    #[error("matrix is not Hurwitz (spectral abscissa {abscissa})")]
    NotHurwitz { abscissa: f64 },

    #[error("Fredholm transform denominator {denominator:e} is below tolerance")]
    DegenerateTransform { denominator: f64 },

    #[error("time {t} outside window [{mu}, {tau}]")]
    OutsideWindow { t: f64, mu: f64, tau: f64 },

    #[error("feedback makes the boundary condition singular")]
    SingularFeedback,

    #[error("degenerate identification window (singular-value ratio {ratio:e})")]
    DegenerateWindow { ratio: f64 },

    #[error("scenario mismatch: {0}")]
    Mismatch(String),
}
