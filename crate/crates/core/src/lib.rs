//! Classical and quantum models of two coupled modes driven by a pump,
//! covering both the optical (sum) and difference parametric branches.

pub mod analytic;
pub mod cavity;
pub mod integrator;
pub mod model;
pub mod quantum;
pub mod spectral;
pub mod sweep;

use thiserror::Error;

/// Any failure raised by this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] model::ConfigError),
    #[error(transparent)]
    Analytic(#[from] analytic::AnalyticError),
    #[error(transparent)]
    Integration(#[from] integrator::IntegrationError),
    #[error(transparent)]
    Spectral(#[from] spectral::SpectralError),
    #[error(transparent)]
    Sweep(#[from] sweep::SweepError),
    #[error(transparent)]
    Quantum(#[from] quantum::QuantumError),
}

impl Error {
    /// Whether the failure stems from invalid input rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::Sweep(sweep::SweepError::InvalidSpec(_) | sweep::SweepError::Config(_))
                | Error::Quantum(quantum::QuantumError::InvalidCutoff(_) | quantum::QuantumError::Invalid(_))
                | Error::Analytic(analytic::AnalyticError::InvalidScenario { .. })
        )
    }
}
