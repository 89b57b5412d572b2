pub mod cli;
pub mod contact;
pub mod cubic;
pub mod darboux;
pub mod document;
pub mod error;
pub mod jetalgebra;
pub mod linalg;
pub mod moutard;
pub mod normalform;
pub mod sampling;
pub mod scalar;
pub mod verify;

pub use error::{MkitError, Result};
pub use jetalgebra::{AnyPoly, MultiIndex, TruncatedPolynomial};
pub use normalform::{FrameChange, HypersurfaceGerm, Signature};
pub use scalar::{Backend, Rational, Scalar};
