//! Self-supervised navigable-space boundary segmentation.
//!
//! The crate trains two small generative models against a procedurally
//! generated corpus of surface-normal scenes:
//!
//! * a categorical-latent VAE ([`vae1`]) that learns per-pixel
//!   navigable/non-navigable pseudo-labels without any annotations, and
//! * a polyline VAE ([`vae2`]) that regresses per-vertex Gaussians over the
//!   boundary row and is trained against the pseudo-labels through a
//!   differentiable rasterizer ([`render`]).
//!
//! [`synth`] builds the corpus, [`loss`] holds the composite objectives,
//! [`metrics`] the evaluation protocol, and [`pipeline`] the training /
//! evaluation / sweep orchestration behind the `navseg` CLI.

use std::path::PathBuf;

pub mod checkpoint;
pub mod loss;
pub mod metrics;
pub mod nn;
pub mod pipeline;
pub mod plot;
pub mod render;
pub mod rng;
pub mod synth;
pub mod ten;
pub mod vae1;
pub mod vae2;

/// Crate-wide error type. Variants map onto the CLI exit codes:
/// configuration problems exit 2, I/O problems exit 3, evaluation
/// failures exit 4.
#[derive(thiserror::Error, Debug)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt file {path}: {reason}")]
    Corrupt { path: PathBuf, reason: String },
    #[error("evaluation failure: {0}")]
    Eval(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn corrupt(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Corrupt {
            path: path.into(),
            reason: reason.into(),
        }
    }

    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::Config(_) => 2,
            Error::Io { .. } | Error::Corrupt { .. } => 3,
            Error::Eval(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Format a float with six significant digits, the precision used by every
/// report file this crate writes.
pub fn fmt_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0.00000".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (5 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6_formatting() {
        assert_eq!(fmt_sig6(0.5), "0.500000");
        assert_eq!(fmt_sig6(1.0), "1.00000");
        assert_eq!(fmt_sig6(123.456789), "123.457");
        assert_eq!(fmt_sig6(0.000123456), "0.000123456");
        assert_eq!(fmt_sig6(-2.5), "-2.50000");
        assert_eq!(fmt_sig6(0.0), "0.00000");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Error::invalid("x").exit_code(), 2);
        assert_eq!(Error::config("x").exit_code(), 2);
        assert_eq!(
            Error::io("/p", std::io::Error::from(std::io::ErrorKind::NotFound)).exit_code(),
            3
        );
        assert_eq!(Error::Eval("x".into()).exit_code(), 4);
    }
}
