use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("matrix is not Hermitian: ‖H − H*‖ = {defect:.3e} exceeds {allowed:.3e}")]
    NotHermitian { defect: f64, allowed: f64 },

    #[error("σ = {sigma} is too close to the spectrum (condition number {cond:.3e})")]
    Singular { sigma: Complex64, cond: f64 },

    /// Radius of curvature `h + h''` is not strictly positive somewhere.
    #[error(
        "boundary is not smooth: h + h'' = {value:.3e} at θ = {theta:.6} \
         (corner or flat facet; consider a larger domain or Minkowski smoothing)"
    )]
    NonSmoothBoundary { theta: f64, value: f64 },

    #[error(
        "spectrum is not strictly inside the domain: Gershgorin disc centre {center}, \
         radius {radius:.3e} contains eigenvalue {eigenvalue}"
    )]
    SpectrumOutside {
        center: Complex64,
        radius: f64,
        eigenvalue: Complex64,
    },

    #[error("numerical range has empty interior (A is a real-affine image of a Hermitian matrix)")]
    EmptyInterior,

    #[error("point {z} is only {distance:.3e} from the boundary (needs at least {required:.3e})")]
    NearBoundary {
        z: Complex64,
        distance: f64,
        required: f64,
    },

    #[error("quadrature did not reach tolerance: {0}")]
    Quadrature(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    /// Innermost error after unwrapping stage labels.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| Error::Stage {
            stage,
            source: Box::new(e),
        })
    }
}
