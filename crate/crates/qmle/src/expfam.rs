//! Continuous exponential families on the nonnegative half-line.
//!
//! A model is a density `a(x) · exp(θ·h(x) - k(θ))` on `x ≥ 0`, described by
//! its log-carrier `ln a`, sufficient statistic `h`, cumulant `k`, and the
//! cumulant derivatives. The mean map `η(θ) = k'(θ)` is strictly increasing
//! (its derivative `k'' = σ²` is the variance of `h`), so the maximum
//! likelihood inversion `η⁻¹` is always available by monotone bisection;
//! models may also supply a closed form.
//!
//! Two built-in laws cover the rate-parameterized families used in the
//! experiments: `exponential` (rate θ, `h(x) = -x`, `k(θ) = -ln θ`) and
//! `gamma:<alpha>` with known shape (`h(x) = -x`, `k(θ) = -α·ln θ`, θ the
//! rate). Both have natural domain `θ > 0`.

use std::sync::Arc;

use rand::RngCore;
use rand_distr::Distribution;

use crate::error::{Error, Result};
use crate::quad;

/// Absolute tolerance for quadrature-backed CDF and survival evaluation.
const CDF_QUAD_TOL: f64 = 1e-12;

/// Width at which the bisection inversion of η stops.
const ETA_INV_WIDTH: f64 = 1e-12;

/// A continuous exponential-family law on `[0, ∞)`.
///
/// Implementations must be immutable and shareable across threads; all
/// randomness flows through the caller-supplied generator.
pub trait Model: Send + Sync {
    /// Catalog name, e.g. `exponential` or `gamma:2`.
    fn name(&self) -> String;

    /// Open interval of valid natural parameters.
    fn natural_domain(&self) -> (f64, f64);

    /// `ln a(x)`; `-∞` where the carrier vanishes (in particular x < 0).
    fn log_carrier(&self, x: f64) -> f64;

    /// Sufficient statistic `h(x)`.
    fn stat(&self, x: f64) -> f64;

    /// Cumulant `k(θ)`.
    fn cumulant(&self, theta: f64) -> f64;

    /// `η(θ) = k'(θ) = E_θ[h(X)]`.
    fn mean_stat(&self, theta: f64) -> f64;

    /// `σ²(θ) = k''(θ) = Var_θ[h(X)] > 0`.
    fn var_stat(&self, theta: f64) -> f64;

    /// Closed-form `η⁻¹` when one exists; `None` defers to bisection.
    fn eta_inv_closed(&self, _y: f64) -> Option<f64> {
        None
    }

    /// Draw one variate; deterministic given the generator state.
    ///
    /// `theta` must already be validated against the natural domain.
    fn sample_raw(&self, theta: f64, rng: &mut dyn RngCore) -> f64;

    /// CDF `F(x; θ)`. Default: adaptive quadrature of the density.
    fn cdf(&self, x: f64, theta: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        quad::integrate(|t| density_unchecked(self_ref(self), t, theta), 0.0, x, CDF_QUAD_TOL)
            .value
            .clamp(0.0, 1.0)
    }

    /// Survival `1 - F(x; θ)`, evaluated as a direct tail integral so the
    /// censoring factors keep relative accuracy deep in the tail.
    fn survival(&self, x: f64, theta: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        let m = self_ref(self);
        let first = quad::integrate_tail(|t| density_unchecked(m, t, theta), x, CDF_QUAD_TOL);
        let v = if first.value > 0.0 && first.value < 1e-8 {
            // Re-run with a value-scaled tolerance for small tails.
            let tol = (first.value * 1e-10).max(1e-300);
            quad::integrate_tail(|t| density_unchecked(m, t, theta), x, tol).value
        } else {
            first.value
        };
        v.clamp(0.0, 1.0)
    }
}

// Helper so default trait methods can hand `self` to closures without
// running into `Sized` bounds.
fn self_ref<M: Model + ?Sized>(m: &M) -> &M {
    m
}

/// Check that `theta` lies in the open natural domain.
pub fn check_theta(model: &(impl Model + ?Sized), theta: f64) -> Result<()> {
    let (lo, hi) = model.natural_domain();
    if theta.is_finite() && theta > lo && theta < hi {
        Ok(())
    } else {
        Err(Error::Domain {
            model: model.name(),
            value: theta,
            domain: (lo, hi),
        })
    }
}

fn density_unchecked(model: &(impl Model + ?Sized), x: f64, theta: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    let log_density = model.log_carrier(x) + theta * model.stat(x) - model.cumulant(theta);
    log_density.exp()
}

/// Density `a(x)·exp(θh(x) - k(θ))`; zero for `x < 0`.
pub fn density(model: &(impl Model + ?Sized), x: f64, theta: f64) -> Result<f64> {
    check_theta(model, theta)?;
    Ok(density_unchecked(model, x, theta))
}

/// `ln` of the density; `-∞` off the support.
pub fn log_density(model: &(impl Model + ?Sized), x: f64, theta: f64) -> Result<f64> {
    check_theta(model, theta)?;
    if x < 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(model.log_carrier(x) + theta * model.stat(x) - model.cumulant(theta))
}

/// The mean map `η(θ)`.
pub fn eta(model: &(impl Model + ?Sized), theta: f64) -> Result<f64> {
    check_theta(model, theta)?;
    Ok(model.mean_stat(theta))
}

/// Censoring factor `1 - F(x; θ)`.
pub fn survival(model: &(impl Model + ?Sized), x: f64, theta: f64) -> Result<f64> {
    check_theta(model, theta)?;
    if x < 0.0 {
        return Err(Error::Input(format!(
            "survival evaluated at negative x = {x}"
        )));
    }
    Ok(model.survival(x, theta))
}

/// Draw one variate after validating the parameter.
pub fn sample(model: &(impl Model + ?Sized), theta: f64, rng: &mut dyn RngCore) -> Result<f64> {
    check_theta(model, theta)?;
    Ok(model.sample_raw(theta, rng))
}

/// Invert the mean map: closed form when the model provides one, otherwise
/// monotone bisection.
pub fn eta_inv(model: &(impl Model + ?Sized), y: f64) -> Result<f64> {
    if let Some(theta) = model.eta_inv_closed(y) {
        if check_theta(model, theta).is_ok() {
            return Ok(theta);
        }
        return Err(Error::Inversion {
            model: model.name(),
            y,
            detail: "closed-form inverse left the natural domain".into(),
        });
    }
    eta_inv_numeric(model, y)
}

/// Invert the strictly increasing `η` by exponential bracket expansion and
/// bisection to width 1e-12, ignoring any closed-form override.
pub fn eta_inv_numeric(model: &(impl Model + ?Sized), y: f64) -> Result<f64> {
    if !y.is_finite() {
        return Err(Error::Inversion {
            model: model.name(),
            y,
            detail: "target is not finite".into(),
        });
    }
    let (lo, hi) = model.natural_domain();
    let start = interior_point(lo, hi);

    let inversion_err = |detail: &str| Error::Inversion {
        model: model.name(),
        y,
        detail: detail.into(),
    };

    // Expand a bracket [a, b] with η(a) ≤ y ≤ η(b). η is increasing.
    let mut a = start;
    let mut step = start.abs().max(1.0);
    let mut found = model.mean_stat(a) <= y;
    for _ in 0..200 {
        if found {
            break;
        }
        a = if lo.is_finite() { 0.5 * (a + lo) } else { a - step };
        if !lo.is_finite() {
            step *= 2.0;
        }
        if a <= lo {
            break;
        }
        found = model.mean_stat(a) <= y;
    }
    if !found {
        return Err(inversion_err(
            "value lies below the closure of the mean-map range (degenerate sample mean)",
        ));
    }

    let mut b = start;
    let mut step = start.abs().max(1.0);
    let mut found = model.mean_stat(b) >= y;
    for _ in 0..200 {
        if found {
            break;
        }
        b = if hi.is_finite() { 0.5 * (b + hi) } else { b + step };
        if !hi.is_finite() {
            step *= 2.0;
        }
        if b >= hi {
            break;
        }
        found = model.mean_stat(b) >= y;
    }
    if !found {
        return Err(inversion_err(
            "value lies above the closure of the mean-map range (degenerate sample mean)",
        ));
    }

    for _ in 0..500 {
        if b - a <= ETA_INV_WIDTH {
            break;
        }
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if model.mean_stat(mid) < y {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

fn interior_point(lo: f64, hi: f64) -> f64 {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo + 1.0,
        (false, true) => hi - 1.0,
        (false, false) => 0.0,
    }
}

/// Exponential law with rate θ: density `θ·e^{-θx}` on `x ≥ 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Exponential;

impl Model for Exponential {
    fn name(&self) -> String {
        "exponential".into()
    }

    fn natural_domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    fn log_carrier(&self, x: f64) -> f64 {
        if x < 0.0 {
            f64::NEG_INFINITY
        } else {
            0.0
        }
    }

    fn stat(&self, x: f64) -> f64 {
        -x
    }

    fn cumulant(&self, theta: f64) -> f64 {
        -theta.ln()
    }

    fn mean_stat(&self, theta: f64) -> f64 {
        -1.0 / theta
    }

    fn var_stat(&self, theta: f64) -> f64 {
        1.0 / (theta * theta)
    }

    fn eta_inv_closed(&self, y: f64) -> Option<f64> {
        if y < 0.0 {
            Some(-1.0 / y)
        } else {
            None
        }
    }

    fn sample_raw(&self, theta: f64, rng: &mut dyn RngCore) -> f64 {
        rand_distr::Exp::new(theta)
            .expect("theta validated against natural domain")
            .sample(rng)
    }

    fn cdf(&self, x: f64, theta: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-theta * x).exp_m1()
        }
    }

    fn survival(&self, x: f64, theta: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            (-theta * x).exp()
        }
    }
}

/// Gamma law with known shape α and natural parameter the rate θ:
/// density `x^{α-1}/Γ(α) · θ^α · e^{-θx}` on `x ≥ 0`.
#[derive(Debug, Clone, Copy)]
pub struct GammaShape {
    alpha: f64,
    ln_gamma_alpha: f64,
}

impl GammaShape {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::Config(format!(
                "gamma shape must be a positive finite number, got {alpha}"
            )));
        }
        Ok(Self {
            alpha,
            ln_gamma_alpha: libm::lgamma(alpha),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl Model for GammaShape {
    fn name(&self) -> String {
        format!("gamma:{}", self.alpha)
    }

    fn natural_domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    fn log_carrier(&self, x: f64) -> f64 {
        if x < 0.0 {
            return f64::NEG_INFINITY;
        }
        if x == 0.0 {
            // Carrier limit at the origin depends on the shape.
            return if self.alpha > 1.0 {
                f64::NEG_INFINITY
            } else if self.alpha == 1.0 {
                -self.ln_gamma_alpha
            } else {
                f64::INFINITY
            };
        }
        (self.alpha - 1.0) * x.ln() - self.ln_gamma_alpha
    }

    fn stat(&self, x: f64) -> f64 {
        -x
    }

    fn cumulant(&self, theta: f64) -> f64 {
        -self.alpha * theta.ln()
    }

    fn mean_stat(&self, theta: f64) -> f64 {
        -self.alpha / theta
    }

    fn var_stat(&self, theta: f64) -> f64 {
        self.alpha / (theta * theta)
    }

    fn eta_inv_closed(&self, y: f64) -> Option<f64> {
        if y < 0.0 {
            Some(-self.alpha / y)
        } else {
            None
        }
    }

    fn sample_raw(&self, theta: f64, rng: &mut dyn RngCore) -> f64 {
        rand_distr::Gamma::new(self.alpha, 1.0 / theta)
            .expect("parameters validated")
            .sample(rng)
    }

    fn cdf(&self, x: f64, theta: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if self.alpha >= 1.0 {
            return quad::integrate(|t| density_unchecked(self, t, theta), 0.0, x, CDF_QUAD_TOL)
                .value
                .clamp(0.0, 1.0);
        }
        // For α < 1 the density is singular at the origin; substituting
        // y = t^α yields the smooth integrand θ^α/(α·Γ(α)) · exp(-θ·y^{1/α}).
        let alpha = self.alpha;
        let scale = (alpha * theta.ln() - self.ln_gamma_alpha).exp() / alpha;
        let g = move |y: f64| scale * (-theta * y.powf(1.0 / alpha)).exp();
        quad::integrate(g, 0.0, x.powf(alpha), CDF_QUAD_TOL)
            .value
            .clamp(0.0, 1.0)
    }
}

/// Look up a model by catalog name: `exponential` or `gamma:<alpha>`.
pub fn by_name(spec: &str) -> Result<Arc<dyn Model>> {
    if spec == "exponential" {
        return Ok(Arc::new(Exponential));
    }
    if let Some(alpha_str) = spec.strip_prefix("gamma:") {
        let alpha: f64 = alpha_str.parse().map_err(|_| {
            Error::Config(format!("cannot parse gamma shape from `{spec}`"))
        })?;
        return Ok(Arc::new(GammaShape::new(alpha)?));
    }
    Err(Error::Config(format!(
        "unknown model `{spec}`; known models: exponential, gamma:<alpha>"
    )))
}
