use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: expected {expected} values, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("field has no boundary trace")]
    MissingTrace,

    #[error("immersion evaluation failed at (u, v) = ({u}, {v})")]
    ImmersionEvaluation { u: f64, v: f64 },

    #[error(
        "parametrization is not conformal: max |g11 - g22|/W = {diag:.3e}, \
         max |g12|/W = {offdiag:.3e}, min W = {min_w:.3e} (tol {tol:.1e})"
    )]
    NotConformal {
        diag: f64,
        offdiag: f64,
        min_w: f64,
        tol: f64,
    },

    #[error("no pivot yields two independent normals at node {node}")]
    FrameDegeneracy { node: usize },

    #[error("Neumann data violate integrability: defect {defect:.3e} exceeds {tol:.3e}")]
    IntegrabilityDefect { defect: f64, tol: f64 },

    #[error("curvature data must be real; max |Im S| = {max_imag:.3e}")]
    NonRealCurvature { max_imag: f64 },

    #[error("norm exponent must lie in (2, inf], got {0}")]
    InvalidExponent(f64),
}
