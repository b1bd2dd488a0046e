use alloc::string::String;

/// Errors raised by grid construction, kernel discretization and the schemes.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("initial datum is not finite in cell ({i}, {j}) for species {species}")]
    NonFiniteInitial { i: usize, j: usize, species: usize },

    #[error("non-finite {direction}-flux for species {species} at face {face:?}, t = {t}")]
    NonFiniteFlux {
        direction: char,
        species: usize,
        face: (usize, usize),
        t: f64,
    },

    #[error("non-finite state after {stage} for species {species} in cell ({i}, {j}), t = {t}")]
    NonFiniteState {
        stage: &'static str,
        species: usize,
        i: usize,
        j: usize,
        t: f64,
    },
}

pub type Result<T> = core::result::Result<T, Error>;
