//! Boundary functions and the integral-test classifier.
//!
//! A boundary `h(T)` is admissible when it is positive, nondecreasing, and
//! increases to infinity. Whether the standardized estimation error exceeds
//! such a boundary infinitely often is decided by the convergence of
//!
//! ```text
//! ∫ (h(T)/T) · exp(-h²(T)/2) dT,
//! ```
//!
//! convergent boundaries being crossed only finitely often ("upper class")
//! and divergent ones infinitely often ("lower class"). Convergence of an
//! improper integral cannot be certified numerically, so the classifier
//! estimates the limit exponent `ρ = h²(T)/(2·loglog T)`: after substituting
//! `s = log T` the integrand behaves like `s^{-ρ}` up to slowly varying
//! factors, putting the critical boundary at `ρ = 1`. Verdicts are issued
//! only with a configurable margin around the boundary; inside the margin
//! the tail of the partial integrals is inspected and `Indeterminate` is an
//! honest outcome.
//!
//! The module also checks integrability of decay functions `ε(t)` against
//! `∫ t^{-1}·loglog t·ε^{1/2}(t) dt`, and emits grid-weighted partial sums
//! of the four series that link crossing probabilities to the integral
//! criterion, so their joint growth can be inspected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

/// e², the default smallest admissible boundary argument (`loglog e² > 0`).
pub const DEFAULT_DOMAIN_FLOOR: f64 = 7.389_056_098_930_65;

/// Default classification margin around the critical exponent 1.
pub const DEFAULT_MARGIN: f64 = 0.05;

/// Default upper integration limit for classification runs.
pub const DEFAULT_T_MAX: f64 = 1e12;

/// Boundary families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryFamily {
    /// `c·√(2·loglog T)` — the scaled iterated-logarithm boundary.
    ScaledLil(f64),
    /// `c·(loglog T)^{1/2}`.
    PowerLogLog(f64),
    /// Piecewise-linear interpolation of `(T, h)` points, clamped outside.
    UserTable(Vec<(f64, f64)>),
}

/// A candidate boundary function with its admissible domain floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassFunction {
    pub family: BoundaryFamily,
    #[serde(default = "default_floor")]
    pub domain_floor: f64,
}

fn default_floor() -> f64 {
    DEFAULT_DOMAIN_FLOOR
}

fn loglog(t: f64) -> f64 {
    t.ln().ln()
}

impl ClassFunction {
    pub fn new(family: BoundaryFamily) -> Self {
        ClassFunction {
            family,
            domain_floor: DEFAULT_DOMAIN_FLOOR,
        }
    }

    /// Short label for reports, e.g. `scaled_lil(1.5)`.
    pub fn label(&self) -> String {
        match &self.family {
            BoundaryFamily::ScaledLil(c) => format!("scaled_lil({c})"),
            BoundaryFamily::PowerLogLog(c) => format!("power_log_log({c})"),
            BoundaryFamily::UserTable(pts) => format!("user_table[{}]", pts.len()),
        }
    }

    /// Evaluate the boundary; arguments below the domain floor are clamped
    /// to it.
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.max(self.domain_floor);
        match &self.family {
            BoundaryFamily::ScaledLil(c) => c * (2.0 * loglog(t)).sqrt(),
            BoundaryFamily::PowerLogLog(c) => c * loglog(t).sqrt(),
            BoundaryFamily::UserTable(points) => interpolate(points, t),
        }
    }

    /// Structural check: a user table must have strictly increasing,
    /// positive abscissae; analytic families need a positive coefficient.
    fn check_structure(&self) -> Result<()> {
        match &self.family {
            BoundaryFamily::ScaledLil(c) | BoundaryFamily::PowerLogLog(c) => {
                if *c > 0.0 && c.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Precondition(format!(
                        "boundary coefficient must be positive and finite, got {c}"
                    )))
                }
            }
            BoundaryFamily::UserTable(points) => {
                if points.is_empty() {
                    return Err(Error::Precondition("user table is empty".into()));
                }
                for pair in points.windows(2) {
                    if !(pair[0].0 < pair[1].0) {
                        return Err(Error::Precondition(
                            "user table abscissae must be strictly increasing".into(),
                        ));
                    }
                }
                if !(points[0].0 > 0.0) {
                    return Err(Error::Precondition(
                        "user table abscissae must be positive".into(),
                    ));
                }
                Ok(())
            }
        }
    }
}

fn interpolate(points: &[(f64, f64)], t: f64) -> f64 {
    match points.binary_search_by(|p| p.0.partial_cmp(&t).unwrap()) {
        Ok(i) => points[i].1,
        Err(0) => points[0].1,
        Err(i) if i == points.len() => points[points.len() - 1].1,
        Err(i) => {
            let (t0, h0) = points[i - 1];
            let (t1, h1) = points[i];
            h0 + (h1 - h0) * (t - t0) / (t1 - t0)
        }
    }
}

/// Upper/lower-class verdict of the integral test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Upper,
    Lower,
    Indeterminate,
}

/// Outcome of classifying one boundary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub verdict: Verdict,
    /// Extrapolated limit of `h²(T)/(2·loglog T)`.
    pub exponent_estimate: f64,
    /// `(T_j, ∫ up to T_j)` of the test integral at expanding endpoints.
    pub tail_partial_integrals: Vec<(f64, f64)>,
    /// Method trail.
    pub notes: Vec<String>,
}

/// Classify a boundary by the integral test over `[max(e², floor), t_max]`.
///
/// `margin` widens the indeterminate band around the critical exponent 1;
/// the default is [`DEFAULT_MARGIN`].
pub fn integral_test(h: &ClassFunction, t_max: f64, margin: f64) -> Result<ClassificationReport> {
    let min_t_max = (std::f64::consts::E * std::f64::consts::E).exp();
    if !(t_max >= min_t_max) {
        return Err(Error::Precondition(format!(
            "t_max must be at least e^(e²) ≈ {min_t_max:.1}, got {t_max}"
        )));
    }
    if !(margin > 0.0) {
        return Err(Error::Precondition(format!(
            "margin must be positive, got {margin}"
        )));
    }
    h.check_structure()?;

    let lo = h.domain_floor.max(DEFAULT_DOMAIN_FLOOR);
    let grid = geometric_grid(lo, t_max, 40);

    // Admissibility on the evaluation grid: nondecreasing, finite, positive.
    let values: Vec<f64> = grid.iter().map(|&t| h.eval(t)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Precondition(
            "boundary takes non-finite values on the classification grid".into(),
        ));
    }
    if values.iter().any(|&v| v <= 0.0) {
        return Err(Error::Precondition(
            "boundary must be positive on the classification grid".into(),
        ));
    }
    for (i, pair) in values.windows(2).enumerate() {
        if pair[1] < pair[0] - 1e-12 * pair[0].abs().max(1.0) {
            return Err(Error::Precondition(format!(
                "non-monotone boundary: h({}) = {} > h({}) = {}",
                grid[i],
                pair[0],
                grid[i + 1],
                pair[1]
            )));
        }
    }
    let table_growth_ok = match &h.family {
        // Analytic families with positive coefficient increase to infinity.
        BoundaryFamily::ScaledLil(_) | BoundaryFamily::PowerLogLog(_) => true,
        // A table only shows its growth on the grid itself.
        BoundaryFamily::UserTable(_) => values[values.len() - 1] > values[0] + 1.0,
    };

    let mut notes = Vec::new();

    // Exponent extrapolation: fit ρ(T) = ρ_inf + b/loglog T by least squares
    // over the upper half of the grid, where the asymptotic regime dominates.
    let fit_from = grid.len() / 2;
    let xs: Vec<f64> = grid[fit_from..].iter().map(|&t| 1.0 / loglog(t)).collect();
    let rhos: Vec<f64> = grid[fit_from..]
        .iter()
        .zip(&values[fit_from..])
        .map(|(&t, &v)| v * v / (2.0 * loglog(t)))
        .collect();
    let exponent = intercept_by_least_squares(&xs, &rhos);
    notes.push(format!(
        "exponent extrapolated from the upper {} of {} grid points on [{lo:.3}, {t_max:.3e}]",
        xs.len(),
        grid.len()
    ));

    // Tail partial integrals of ∫ h(e^s)·e^{-h²/2} ds at expanding endpoints.
    let s_lo = lo.ln();
    let s_hi = t_max.ln();
    let segments = 12;
    let mut partials = Vec::with_capacity(segments);
    let mut acc = 0.0;
    for j in 1..=segments {
        let a = s_lo + (j - 1) as f64 * (s_hi - s_lo) / segments as f64;
        let b = s_lo + j as f64 * (s_hi - s_lo) / segments as f64;
        let q = quad::integrate(
            |s| {
                let hv = h.eval(s.exp());
                hv * (-0.5 * hv * hv).exp()
            },
            a,
            b,
            1e-10,
        );
        acc += q.value;
        partials.push((b.exp(), acc));
    }

    let verdict = if !table_growth_ok {
        notes.push("boundary does not increase to infinity on the grid; the test integrand cannot decay".into());
        Verdict::Lower
    } else if exponent >= 1.0 + margin {
        notes.push(format!(
            "exponent {exponent:.4} ≥ 1 + margin: integrand dominated by a convergent comparison"
        ));
        Verdict::Upper
    } else if exponent <= 1.0 - margin {
        notes.push(format!(
            "exponent {exponent:.4} ≤ 1 - margin: integrand dominates a divergent comparison"
        ));
        Verdict::Lower
    } else {
        // Inside the margin: inspect tail contraction of the partial
        // integrals. Persistent non-contraction signals divergence; slow
        // contraction near ρ = 1 stays inconclusive.
        let increments: Vec<f64> = partials
            .windows(2)
            .map(|p| p[1].1 - p[0].1)
            .collect();
        let ratios: Vec<f64> = increments
            .windows(2)
            .filter(|p| p[0] > 0.0)
            .map(|p| p[1] / p[0])
            .collect();
        let tail = &ratios[ratios.len().saturating_sub(3)..];
        if !tail.is_empty() && tail.iter().all(|&r| r >= 0.995) {
            notes.push(format!(
                "exponent {exponent:.4} within margin but tail increments do not contract (ratios {tail:?})"
            ));
            Verdict::Lower
        } else {
            notes.push(format!(
                "exponent {exponent:.4} within margin of the critical boundary; tail trend inconclusive"
            ));
            Verdict::Indeterminate
        }
    };

    Ok(ClassificationReport {
        verdict,
        exponent_estimate: exponent,
        tail_partial_integrals: partials,
        notes,
    })
}

fn geometric_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (llo + (lhi - llo) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

fn intercept_by_least_squares(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return sy / n;
    }
    let slope = (n * sxy - sx * sy) / denom;
    (sy - slope * sx) / n
}

/// Decay functions `ε(t)` used by the concentration condition and the
/// normal-approximation rate envelopes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayFunction {
    /// `t^{-a}`.
    Power(f64),
    /// `(loglog t)^{-p}`, defined for `t > e`.
    InvLogLogPow(f64),
    /// `e^{-t}`.
    ExpNeg,
    /// Constant.
    Constant(f64),
}

impl DecayFunction {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            DecayFunction::Power(a) => t.powf(-a),
            DecayFunction::InvLogLogPow(p) => {
                let ll = loglog(t);
                if ll > 0.0 {
                    ll.powf(-p)
                } else {
                    f64::INFINITY
                }
            }
            DecayFunction::ExpNeg => (-t).exp(),
            DecayFunction::Constant(v) => v,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            DecayFunction::Power(a) => format!("t^-{a}"),
            DecayFunction::InvLogLogPow(p) => format!("(loglog t)^-{p}"),
            DecayFunction::ExpNeg => "exp(-t)".into(),
            DecayFunction::Constant(v) => format!("const {v}"),
        }
    }
}

impl std::str::FromStr for DecayFunction {
    type Err = Error;

    /// Compact flag syntax: `power:<a>`, `invloglog:<p>`, `exp`, `const:<v>`.
    fn from_str(s: &str) -> Result<Self> {
        let parse_num = |txt: &str| -> Result<f64> {
            txt.parse().map_err(|_| {
                Error::Config(format!("cannot parse number `{txt}` in decay spec `{s}`"))
            })
        };
        if s == "exp" {
            return Ok(DecayFunction::ExpNeg);
        }
        if let Some(a) = s.strip_prefix("power:") {
            return Ok(DecayFunction::Power(parse_num(a)?));
        }
        if let Some(p) = s.strip_prefix("invloglog:") {
            return Ok(DecayFunction::InvLogLogPow(parse_num(p)?));
        }
        if let Some(v) = s.strip_prefix("const:") {
            return Ok(DecayFunction::Constant(parse_num(v)?));
        }
        Err(Error::Config(format!(
            "unknown decay spec `{s}`; use power:<a>, invloglog:<p>, exp, or const:<v>"
        )))
    }
}

/// Verdict on the integrability of `∫ t^{-1}·loglog t·ε^{1/2}(t) dt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntegrabilityVerdict {
    Finite,
    Infinite,
    Indeterminate,
}

/// Report of the decay-integrability check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct C2Report {
    pub verdict: IntegrabilityVerdict,
    /// `(t_j, ∫_{e²}^{t_j})` at expanding endpoints.
    pub partial_integrals: Vec<(f64, f64)>,
    pub notes: Vec<String>,
}

/// Check integrability of `t^{-1}·(loglog t)·ε^{1/2}(t)` on `[e², t_max]`
/// by tail contraction of expanding partial integrals.
pub fn condition_c2_check<F: Fn(f64) -> f64>(eps: F, t_max: f64) -> Result<C2Report> {
    let lo = DEFAULT_DOMAIN_FLOOR;
    if !(t_max > lo * 10.0) {
        return Err(Error::Precondition(format!(
            "t_max must exceed {:.1}, got {t_max}",
            lo * 10.0
        )));
    }
    // ε must be positive and nonincreasing on the window. Exact zeros are
    // tolerated away from the left endpoint: a fast decay underflows the
    // double range long before t_max.
    let probe = geometric_grid(lo, t_max, 64);
    let mut prev = f64::INFINITY;
    for (i, &t) in probe.iter().enumerate() {
        let e = eps(t);
        let lower_bound_ok = if i == 0 { e > 0.0 } else { e >= 0.0 };
        if !lower_bound_ok || !e.is_finite() {
            return Err(Error::Precondition(format!(
                "decay function must be positive and finite; ε({t}) = {e}"
            )));
        }
        if e > prev * (1.0 + 1e-9) {
            return Err(Error::Precondition(format!(
                "decay function must be nonincreasing; it rises at t = {t}"
            )));
        }
        prev = e;
    }

    // Substitute t = e^s: the integrand becomes log(s)·ε^{1/2}(e^s).
    let s_lo = lo.ln();
    let s_hi = t_max.ln();
    let segments = 12;
    let mut partials = Vec::with_capacity(segments);
    let mut increments = Vec::with_capacity(segments);
    let mut acc = 0.0;
    for j in 1..=segments {
        let a = s_lo + (j - 1) as f64 * (s_hi - s_lo) / segments as f64;
        let b = s_lo + j as f64 * (s_hi - s_lo) / segments as f64;
        let q = quad::integrate(|s| s.ln() * eps(s.exp()).sqrt(), a, b, 1e-10);
        acc += q.value;
        increments.push(q.value);
        partials.push((b.exp(), acc));
    }

    let half = segments / 2;
    let tail = &increments[half..];
    let mut notes = Vec::new();
    let verdict = if tail.iter().all(|&d| d <= 1e-280) {
        notes.push("tail increments vanish: super-polynomial decay".into());
        IntegrabilityVerdict::Finite
    } else {
        let ratios: Vec<f64> = increments[half - 1..]
            .windows(2)
            .map(|p| if p[0] > 0.0 { p[1] / p[0] } else { 0.0 })
            .collect();
        let max_ratio = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min_ratio = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        notes.push(format!(
            "tail increment ratios in [{min_ratio:.4}, {max_ratio:.4}]"
        ));
        if max_ratio <= 0.92 {
            notes.push("tails contract geometrically".into());
            IntegrabilityVerdict::Finite
        } else if min_ratio >= 0.98 {
            notes.push("partial integrals grow without contraction".into());
            IntegrabilityVerdict::Infinite
        } else {
            IntegrabilityVerdict::Indeterminate
        }
    };

    Ok(C2Report {
        verdict,
        partial_integrals: partials,
        notes,
    })
}

/// One row of the series diagnostics table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticRow {
    /// 1-based grid index.
    pub n: usize,
    pub t: f64,
    pub h: f64,
    /// Partial sum of `loglog t_n · t_n^{-1} · p_n` (needs crossing probabilities).
    pub s_a: Option<f64>,
    /// Partial sum of `loglog t_n · (t_n h_n)^{-1} · e^{-h_n²/2}`.
    pub s_b: f64,
    /// Partial sum of `(t_n h_n)^{-1} · e^{-h_n²/2}`.
    pub s_c: f64,
    /// Partial sum of the `s_b` series with exponent factor `1 + C/loglog t_n`.
    pub s_d: f64,
}

/// Partial sums of the four diagnostic series on a grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticTable {
    pub c_constant: f64,
    pub rows: Vec<DiagnosticRow>,
}

/// Pairwise growth-ratio sequences between the series' partial sums.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthRatios {
    /// `S_A(n)/S_B(n)` when crossing probabilities were supplied.
    pub a_over_b: Option<Vec<f64>>,
    /// `S_C(n)/S_D(n)`.
    pub c_over_d: Vec<f64>,
    /// `S_D(n)/S_B(n)`.
    pub d_over_b: Vec<f64>,
}

impl DiagnosticTable {
    pub fn growth_ratios(&self) -> GrowthRatios {
        let ratio = |num: f64, den: f64| if den != 0.0 { num / den } else { f64::NAN };
        GrowthRatios {
            a_over_b: if self.rows.iter().all(|r| r.s_a.is_some()) {
                Some(
                    self.rows
                        .iter()
                        .map(|r| ratio(r.s_a.unwrap(), r.s_b))
                        .collect(),
                )
            } else {
                None
            },
            c_over_d: self.rows.iter().map(|r| ratio(r.s_c, r.s_d)).collect(),
            d_over_b: self.rows.iter().map(|r| ratio(r.s_d, r.s_b)).collect(),
        }
    }

    /// CSV with the documented header `n,t_n,h,S_A,S_B,S_C,S_D`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,t_n,h,S_A,S_B,S_C,S_D\n");
        for r in &self.rows {
            let s_a = r.s_a.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.n, r.t, r.h, s_a, r.s_b, r.s_c, r.s_d
            ));
        }
        out
    }
}

/// Grid-weighted partial sums of the four diagnostic series.
///
/// Each term is the series summand at `t_n` weighted by the grid gap
/// `t_n - t_{n-1}` (the first point uses the gap to the second), so the
/// partial sums track the corresponding integrals and their growth mirrors
/// convergence or divergence regardless of the grid's spacing. No verdict is
/// forced; pair the table with [`DiagnosticTable::growth_ratios`].
///
/// `crossing_probs`, when given, must align with `t_grid` and supplies the
/// empirical exceedance probabilities for the `S_A` series. `c_constant`
/// scales the exponent correction of `S_D`; at 0 the `S_D` terms reduce to
/// the `S_B` terms exactly.
pub fn series_diagnostics(
    h: &ClassFunction,
    t_grid: &[f64],
    crossing_probs: Option<&[f64]>,
    c_constant: f64,
) -> Result<DiagnosticTable> {
    if t_grid.len() < 2 {
        return Err(Error::Precondition(
            "diagnostics grid needs at least two points".into(),
        ));
    }
    if !(t_grid[0] >= DEFAULT_DOMAIN_FLOOR) {
        return Err(Error::Precondition(format!(
            "diagnostics grid must start at or above e² ≈ {DEFAULT_DOMAIN_FLOOR:.3}, got {}",
            t_grid[0]
        )));
    }
    for pair in t_grid.windows(2) {
        if !(pair[0] < pair[1]) {
            return Err(Error::Precondition(
                "diagnostics grid must be strictly increasing".into(),
            ));
        }
    }
    if let Some(ps) = crossing_probs {
        if ps.len() != t_grid.len() {
            return Err(Error::Input(format!(
                "crossing probabilities ({}) misaligned with grid ({})",
                ps.len(),
                t_grid.len()
            )));
        }
        if ps.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::Input(
                "crossing probabilities must lie in [0, 1]".into(),
            ));
        }
    }
    if !(c_constant >= 0.0) {
        return Err(Error::Precondition(format!(
            "series constant must be nonnegative, got {c_constant}"
        )));
    }

    let mut rows = Vec::with_capacity(t_grid.len());
    let (mut s_a, mut s_b, mut s_c, mut s_d) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (i, &t) in t_grid.iter().enumerate() {
        let hv = h.eval(t);
        if !(hv > 0.0) {
            return Err(Error::Precondition(format!(
                "boundary must be positive on the grid; h({t}) = {hv}"
            )));
        }
        let weight = if i == 0 {
            t_grid[1] - t_grid[0]
        } else {
            t - t_grid[i - 1]
        };
        let ll = loglog(t);
        let decay = (-0.5 * hv * hv).exp();
        s_b += ll / (t * hv) * decay * weight;
        s_c += 1.0 / (t * hv) * decay * weight;
        s_d += ll / (t * hv) * ((-0.5 * hv * hv) * (1.0 + c_constant / ll)).exp() * weight;
        let s_a_val = crossing_probs.map(|ps| {
            s_a += ll / t * ps[i] * weight;
            s_a
        });
        rows.push(DiagnosticRow {
            n: i + 1,
            t,
            h: hv,
            s_a: s_a_val,
            s_b,
            s_c,
            s_d,
        });
    }

    Ok(DiagnosticTable {
        c_constant,
        rows,
    })
}

/// Evaluate a boundary on a grid, for plot emission.
pub fn envelope(h: &ClassFunction, t_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    h.check_structure()?;
    if t_grid.is_empty() {
        return Err(Error::Precondition("envelope grid is empty".into()));
    }
    for pair in t_grid.windows(2) {
        if !(pair[0] < pair[1]) {
            return Err(Error::Precondition(
                "envelope grid must be strictly increasing".into(),
            ));
        }
    }
    if !(t_grid[0] >= h.domain_floor) {
        return Err(Error::Precondition(format!(
            "envelope grid must start at or above the domain floor {}",
            h.domain_floor
        )));
    }
    let out: Vec<(f64, f64)> = t_grid.iter().map(|&t| (t, h.eval(t))).collect();
    for pair in out.windows(2) {
        if pair[1].1 < pair[0].1 - 1e-12 {
            return Err(Error::Precondition(format!(
                "boundary decreases between T = {} and T = {}",
                pair[0].0, pair[1].0
            )));
        }
    }
    Ok(out)
}

/// Build a geometric grid of `points` values spanning `[lo, hi]`.
pub fn geomspace(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && points >= 2) {
        return Err(Error::Precondition(format!(
            "geometric grid needs 0 < lo < hi and at least two points, got [{lo}, {hi}] x {points}"
        )));
    }
    Ok(geometric_grid(lo, hi, points))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scaled_lil(c: f64) -> ClassFunction {
        ClassFunction::new(BoundaryFamily::ScaledLil(c))
    }

    fn power_ll(c: f64) -> ClassFunction {
        ClassFunction::new(BoundaryFamily::PowerLogLog(c))
    }

    #[test]
    fn boundary_value_at_e_to_the_e() {
        let h = scaled_lil(1.0);
        let t = std::f64::consts::E.exp();
        assert!((h.eval(t) - 2.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn envelope_is_sorted_and_tables_round_trip() {
        let h = scaled_lil(1.3);
        let grid = geomspace(10.0, 1e9, 25).unwrap();
        let env = envelope(&h, &grid).unwrap();
        assert!(env.windows(2).all(|p| p[1].1 >= p[0].1));

        let table = ClassFunction::new(BoundaryFamily::UserTable(vec![
            (10.0, 1.0),
            (100.0, 2.0),
            (1000.0, 2.5),
        ]));
        let ts = [10.0, 100.0, 1000.0];
        let env = envelope(&table, &ts).unwrap();
        assert_eq!(env, vec![(10.0, 1.0), (100.0, 2.0), (1000.0, 2.5)]);
    }

    #[test]
    fn decreasing_table_is_rejected() {
        let bad = ClassFunction::new(BoundaryFamily::UserTable(vec![
            (10.0, 3.0),
            (100.0, 2.0),
            (1e6, 1.0),
        ]));
        assert!(matches!(
            integral_test(&bad, 1e12, DEFAULT_MARGIN),
            Err(Error::Precondition(_))
        ));
        assert!(envelope(&bad, &[10.0, 100.0]).is_err());
    }

    #[test]
    fn classifier_matches_analytic_oracle() {
        // exp(-h²/2) = (log T)^{-c²}: convergent iff c² > 1.
        for c in [1.2, 1.5, 2.0] {
            let report = integral_test(&scaled_lil(c), 1e12, DEFAULT_MARGIN).unwrap();
            assert_eq!(report.verdict, Verdict::Upper, "c = {c}: {report:?}");
        }
        for c in [0.6, 0.8] {
            let report = integral_test(&scaled_lil(c), 1e12, DEFAULT_MARGIN).unwrap();
            assert_eq!(report.verdict, Verdict::Lower, "c = {c}");
        }
        // (loglog T)^{1/2} boundaries: exponent c²/2.
        assert_eq!(
            integral_test(&power_ll(2.0), 1e12, DEFAULT_MARGIN)
                .unwrap()
                .verdict,
            Verdict::Upper
        );
        assert_eq!(
            integral_test(&power_ll(1.0), 1e12, DEFAULT_MARGIN)
                .unwrap()
                .verdict,
            Verdict::Lower
        );
    }

    #[test]
    fn verdict_is_monotone_in_the_scale() {
        let cs = [0.6, 0.8, 1.2, 1.5, 2.0];
        let verdicts: Vec<Verdict> = cs
            .iter()
            .map(|&c| integral_test(&scaled_lil(c), 1e12, DEFAULT_MARGIN).unwrap().verdict)
            .collect();
        // No Upper may precede a Lower as c grows.
        let mut seen_upper = false;
        for v in verdicts {
            if v == Verdict::Upper {
                seen_upper = true;
            }
            if seen_upper {
                assert_ne!(v, Verdict::Lower);
            }
        }
    }

    #[test]
    fn exponent_estimate_is_exact_for_scaled_lil() {
        let report = integral_test(&scaled_lil(1.2), 1e12, DEFAULT_MARGIN).unwrap();
        assert!((report.exponent_estimate - 1.44).abs() < 1e-9);
        assert!(!report.tail_partial_integrals.is_empty());
        let last = report.tail_partial_integrals.last().unwrap();
        assert!(last.1.is_finite() && last.1 > 0.0);
    }

    #[test]
    fn near_critical_boundary_is_honest() {
        let report = integral_test(&scaled_lil(1.0), 1e12, DEFAULT_MARGIN).unwrap();
        assert_ne!(report.verdict, Verdict::Upper, "{report:?}");
    }

    #[test]
    fn margin_edges_classify_exactly() {
        // |c - 1| = margin maps to exponents strictly outside the band.
        let at = |c: f64| integral_test(&scaled_lil(c), 1e12, DEFAULT_MARGIN).unwrap().verdict;
        assert_eq!(at(1.0 + DEFAULT_MARGIN), Verdict::Upper);
        assert_eq!(at(1.0 - DEFAULT_MARGIN), Verdict::Lower);
    }

    #[test]
    fn bounded_table_is_lower_class() {
        // Grows by more than 1 on the grid but is clamped beyond its last
        // point, so the integrand never decays: divergent.
        let table = ClassFunction::new(BoundaryFamily::UserTable(vec![
            (10.0, 0.5),
            (1e4, 2.0),
            (1e6, 2.2),
        ]));
        let report = integral_test(&table, 1e12, DEFAULT_MARGIN).unwrap();
        assert_eq!(report.verdict, Verdict::Lower, "{report:?}");
    }

    #[test]
    fn preconditions_are_enforced() {
        assert!(integral_test(&scaled_lil(1.2), 100.0, DEFAULT_MARGIN).is_err());
        assert!(integral_test(&scaled_lil(1.2), 1e12, 0.0).is_err());
        assert!(integral_test(&scaled_lil(-1.0), 1e12, DEFAULT_MARGIN).is_err());
    }

    #[test]
    fn c2_verdicts() {
        let finite = condition_c2_check(|t| t.powf(-0.4), 1e12).unwrap();
        assert_eq!(finite.verdict, IntegrabilityVerdict::Finite, "{finite:?}");

        let infinite = condition_c2_check(|t| loglog(t).powi(-2), 1e12).unwrap();
        assert_eq!(infinite.verdict, IntegrabilityVerdict::Infinite, "{infinite:?}");

        let super_fast = condition_c2_check(|t| (-t).exp(), 1e12).unwrap();
        assert_eq!(super_fast.verdict, IntegrabilityVerdict::Finite);
    }

    #[test]
    fn c2_power_family_is_finite() {
        for a in [0.2, 0.4, 1.0] {
            let report = condition_c2_check(|t| t.powf(-a), 1e12).unwrap();
            assert_eq!(
                report.verdict,
                IntegrabilityVerdict::Finite,
                "a = {a}: {report:?}"
            );
        }
    }

    #[test]
    fn c2_rejects_bad_decay_functions() {
        assert!(condition_c2_check(|_| -1.0, 1e12).is_err());
        assert!(condition_c2_check(|t| t, 1e12).is_err());
    }

    #[test]
    fn diagnostic_series_track_convergence_character() {
        let grid = geomspace(DEFAULT_DOMAIN_FLOOR, 1e12, 40).unwrap();

        // Convergent side: both S_B and S_C stabilize (tail increments
        // contract).
        let table = series_diagnostics(&scaled_lil(1.2), &grid, None, 1.0).unwrap();
        let sc: Vec<f64> = table.rows.iter().map(|r| r.s_c).collect();
        let sb: Vec<f64> = table.rows.iter().map(|r| r.s_b).collect();
        let tail_ratio = |s: &[f64]| {
            let n = s.len();
            (s[n - 1] - s[n - 2]) / (s[n - 2] - s[n - 3])
        };
        assert!(tail_ratio(&sc) < 1.0);
        assert!(tail_ratio(&sb) < 1.0);

        // Divergent side: S_C keeps growing across decades — extending the
        // grid by nine orders of magnitude keeps adding comparable mass,
        // while the convergent boundary's sum has already stabilized.
        let last_sc = |c: f64, hi: f64, pts: usize| {
            let grid = geomspace(DEFAULT_DOMAIN_FLOOR, hi, pts).unwrap();
            series_diagnostics(&scaled_lil(c), &grid, None, 1.0)
                .unwrap()
                .rows
                .last()
                .unwrap()
                .s_c
        };
        let divergent_growth = last_sc(0.8, 1e18, 60) / last_sc(0.8, 1e9, 30);
        let convergent_growth = last_sc(1.5, 1e18, 60) / last_sc(1.5, 1e9, 30);
        assert!(
            divergent_growth > 1.2,
            "divergent series should keep growing, factor {divergent_growth}"
        );
        assert!(
            convergent_growth < 1.05,
            "convergent series should stabilize, factor {convergent_growth}"
        );
        // And the growth never stops: each further extension adds mass.
        let s27 = last_sc(0.8, 1e27, 90);
        assert!(s27 > last_sc(0.8, 1e18, 60) * 1.1);
    }

    #[test]
    fn s_d_reduces_to_s_b_at_zero_constant() {
        let grid = geomspace(DEFAULT_DOMAIN_FLOOR, 1e10, 25).unwrap();
        let table = series_diagnostics(&scaled_lil(1.1), &grid, None, 0.0).unwrap();
        for row in &table.rows {
            assert_eq!(row.s_b, row.s_d, "n = {}", row.n);
        }
    }

    #[test]
    fn misaligned_crossing_probs_are_rejected() {
        let grid = geomspace(DEFAULT_DOMAIN_FLOOR, 1e10, 10).unwrap();
        let probs = vec![0.1; 9];
        assert!(matches!(
            series_diagnostics(&scaled_lil(1.0), &grid, Some(&probs), 1.0),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn diagnostics_csv_header_is_stable() {
        let grid = geomspace(DEFAULT_DOMAIN_FLOOR, 1e10, 5).unwrap();
        let table = series_diagnostics(&scaled_lil(1.0), &grid, None, 1.0).unwrap();
        assert!(table.to_csv().starts_with("n,t_n,h,S_A,S_B,S_C,S_D\n"));
    }

    #[test]
    fn growth_ratios_shapes() {
        let grid = geomspace(DEFAULT_DOMAIN_FLOOR, 1e10, 8).unwrap();
        let probs = vec![0.2; 8];
        let table = series_diagnostics(&scaled_lil(1.0), &grid, Some(&probs), 1.0).unwrap();
        let ratios = table.growth_ratios();
        assert_eq!(ratios.a_over_b.as_ref().unwrap().len(), 8);
        assert_eq!(ratios.c_over_d.len(), 8);
        assert_eq!(ratios.d_over_b.len(), 8);
    }

    #[test]
    fn class_function_serde() {
        let h = ClassFunction::new(BoundaryFamily::ScaledLil(1.5));
        let json = serde_json::to_string(&h).unwrap();
        let back: ClassFunction = serde_json::from_str(&json).unwrap();
        assert_eq!(h, back);
        // Family-only deserialization applies the default floor.
        let parsed: ClassFunction =
            serde_json::from_str(r#"{"family":{"scaled_lil":2.0}}"#).unwrap();
        assert_eq!(parsed.domain_floor, DEFAULT_DOMAIN_FLOOR);
    }
}
