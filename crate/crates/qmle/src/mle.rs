//! Likelihood evaluation and maximum likelihood estimation of the arrival
//! and service rates from one observation window.
//!
//! The approximate likelihood is the product of the completed interarrival
//! and service densities; the full likelihood multiplies in the two
//! censoring factors `1 - F(T - Σu)` and `1 - G(T - γ - Σv)` for the
//! intervals still in progress at `T`. The estimators invert the mean map
//! on the sample means of the sufficient statistics,
//!
//! ```text
//! θ̂ = η₁⁻¹[ A(T)⁻¹ Σ h₁(uᵢ) ],    φ̂ = η₂⁻¹[ D(T)⁻¹ Σ h₂(vᵢ) ],
//! ```
//!
//! which maximize the approximate likelihood exactly; the full likelihood is
//! evaluate-only. Standardized deviations use the plug-in information at the
//! true parameter, `I(θ₀) = σ₁²(θ₀)·A(T)`, when the true value is supplied.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expfam::{self, Model};
use crate::qsim::ObservationWindow;

/// Maximum likelihood fit of both rates from one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MleResult {
    pub theta_hat: f64,
    pub phi_hat: f64,
    /// Plug-in Fisher information `σ₁²(θ̂)·A(T)`.
    pub info_theta: f64,
    /// Plug-in Fisher information `σ₂²(φ̂)·D(T)`.
    pub info_phi: f64,
    /// `I(θ₀)^{1/2}·(θ̂ - θ₀)`, present only when θ₀ was supplied.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub z_theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub z_phi: Option<f64>,
    pub a_count: u64,
    pub d_count: u64,
}

/// Log of the approximate likelihood at `(theta, phi)`.
pub fn loglik_approx(
    window: &ObservationWindow,
    arrival: &dyn Model,
    service: &dyn Model,
    theta: f64,
    phi: f64,
) -> Result<f64> {
    expfam::check_theta(arrival, theta)?;
    expfam::check_theta(service, phi)?;
    let arrival_part: f64 = window
        .arrivals
        .iter()
        .map(|&u| arrival.log_carrier(u) + theta * arrival.stat(u))
        .sum::<f64>()
        - window.arrivals.len() as f64 * arrival.cumulant(theta);
    let service_part: f64 = window
        .services
        .iter()
        .map(|&v| service.log_carrier(v) + phi * service.stat(v))
        .sum::<f64>()
        - window.services.len() as f64 * service.cumulant(phi);
    Ok(arrival_part + service_part)
}

/// Log of the full likelihood: the approximate log-likelihood plus the two
/// censoring terms. A vanishing censoring factor yields `-∞`.
pub fn loglik_full(
    window: &ObservationWindow,
    arrival: &dyn Model,
    service: &dyn Model,
    theta: f64,
    phi: f64,
) -> Result<f64> {
    let residual_arrival = window.t - window.sum_arrivals();
    let residual_service = window.t - window.idle - window.sum_services();
    if residual_arrival < -1e-9 * window.t.max(1.0) {
        return Err(Error::Input(format!(
            "window is inconsistent: arrival gaps overshoot T by {}",
            -residual_arrival
        )));
    }
    if residual_service < -1e-9 * window.t.max(1.0) {
        return Err(Error::Input(format!(
            "window is inconsistent: idle plus services overshoot T by {}",
            -residual_service
        )));
    }
    let base = loglik_approx(window, arrival, service, theta, phi)?;
    let censor_arrival = expfam::survival(arrival, residual_arrival.max(0.0), theta)?.ln();
    let censor_service = expfam::survival(service, residual_service.max(0.0), phi)?.ln();
    Ok(base + censor_arrival + censor_service)
}

/// Maximum likelihood estimate of both rates, with standardized deviations
/// when the true parameters are supplied.
pub fn estimate(
    window: &ObservationWindow,
    arrival: &dyn Model,
    service: &dyn Model,
    true_params: Option<(f64, f64)>,
) -> Result<MleResult> {
    if window.arrivals.is_empty() {
        return Err(Error::InsufficientData(
            "no completed interarrival gaps: A(T) = 0".into(),
        ));
    }
    if window.services.is_empty() {
        return Err(Error::InsufficientData(
            "no completed services: D(T) = 0".into(),
        ));
    }
    let a = window.arrivals.len() as f64;
    let d = window.services.len() as f64;
    let mean_h1: f64 = window.arrivals.iter().map(|&u| arrival.stat(u)).sum::<f64>() / a;
    let mean_h2: f64 = window.services.iter().map(|&v| service.stat(v)).sum::<f64>() / d;
    let theta_hat = expfam::eta_inv(arrival, mean_h1)?;
    let phi_hat = expfam::eta_inv(service, mean_h2)?;

    let (z_theta, z_phi) = match true_params {
        Some((theta0, phi0)) => {
            expfam::check_theta(arrival, theta0)?;
            expfam::check_theta(service, phi0)?;
            let info_theta0 = arrival.var_stat(theta0) * a;
            let info_phi0 = service.var_stat(phi0) * d;
            (
                Some(info_theta0.sqrt() * (theta_hat - theta0)),
                Some(info_phi0.sqrt() * (phi_hat - phi0)),
            )
        }
        None => (None, None),
    };

    Ok(MleResult {
        theta_hat,
        phi_hat,
        info_theta: arrival.var_stat(theta_hat) * a,
        info_phi: service.var_stat(phi_hat) * d,
        z_theta,
        z_phi,
        a_count: window.arrivals.len() as u64,
        d_count: window.services.len() as u64,
    })
}

/// Score of the arrival component: `l'(θ) = Σ h₁(uᵢ) - A(T)·k₁'(θ)`.
pub fn score(window: &ObservationWindow, model: &dyn Model, theta: f64) -> Result<f64> {
    expfam::check_theta(model, theta)?;
    let sum_h: f64 = window.arrivals.iter().map(|&u| model.stat(u)).sum();
    Ok(sum_h - window.arrivals.len() as f64 * model.mean_stat(theta))
}

/// Score of the service component over the `v` list.
pub fn score_service(window: &ObservationWindow, model: &dyn Model, phi: f64) -> Result<f64> {
    expfam::check_theta(model, phi)?;
    let sum_h: f64 = window.services.iter().map(|&v| model.stat(v)).sum();
    Ok(sum_h - window.services.len() as f64 * model.mean_stat(phi))
}

/// Observed information of the arrival component:
/// `-l''(θ) = A(T)·σ₁²(θ) ≥ 0`.
pub fn observed_info(window: &ObservationWindow, model: &dyn Model, theta: f64) -> Result<f64> {
    expfam::check_theta(model, theta)?;
    Ok(window.arrivals.len() as f64 * model.var_stat(theta))
}

/// Observed information of the service component.
pub fn observed_info_service(
    window: &ObservationWindow,
    model: &dyn Model,
    phi: f64,
) -> Result<f64> {
    expfam::check_theta(model, phi)?;
    Ok(window.services.len() as f64 * model.var_stat(phi))
}
