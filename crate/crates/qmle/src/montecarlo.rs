//! Seeded, parallel Monte Carlo experiments over the queue estimators.
//!
//! Each replication draws from its own RNG stream (master seed + replication
//! index, see [`crate::rng`]), so results do not depend on the number of
//! worker threads. Replication outcomes are collected in index order and
//! reduced sequentially after sorting by replication id, which makes every
//! aggregate invariant to completion order; rerunning a configuration yields
//! byte-identical reports.
//!
//! Four experiments are provided:
//! - [`run_normality`]: Kolmogorov-Smirnov distance of the standardized
//!   estimates to the standard normal per horizon, against `c·ε^{1/2}(T)`
//!   reference envelopes;
//! - [`run_condition_c1`]: concentration of the arrival and departure counts
//!   around their replication means;
//! - [`run_crossings`]: boundary-crossing behavior of one growing path per
//!   replication, observed at nested checkpoints;
//! - [`run_consistency`]: mean absolute estimation error across a ratio-4
//!   horizon grid.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classfn::{self, ClassFunction, DecayFunction, Verdict};
use crate::error::{Error, Result};
use crate::expfam::{self, Model};
use crate::mle;
use crate::qsim::{self, StoppingRule};
use crate::report;
use crate::rng;
use crate::stats;

/// A model referenced by catalog name plus its true parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub model: String,
    pub param: f64,
}

/// Configuration of one experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub arrival: ModelSpec,
    pub service: ModelSpec,
    /// Stopping rule for single-window simulation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<StoppingRule>,
    /// Observation horizons for grid-based experiments.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_grid: Option<Vec<f64>>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Boundary functions for crossing experiments.
    #[serde(default)]
    pub class_functions: Vec<ClassFunction>,
    /// Decay function for rate envelopes and the concentration check.
    #[serde(default = "default_epsilon")]
    pub epsilon: DecayFunction,
    /// Constant of the exponent-corrected diagnostic series.
    #[serde(default = "default_series_constant")]
    pub series_constant: f64,
    /// When set, warn if the configuration is not stable (ρ ≥ 1).
    #[serde(default)]
    pub stability_check: bool,
}

fn default_replications() -> usize {
    1000
}

fn default_epsilon() -> DecayFunction {
    DecayFunction::Power(0.4)
}

fn default_series_constant() -> f64 {
    1.0
}

/// Resolved models plus true parameters.
pub struct ResolvedModels {
    pub arrival: Arc<dyn Model>,
    pub theta0: f64,
    pub service: Arc<dyn Model>,
    pub phi0: f64,
}

impl ExperimentConfig {
    pub fn resolve_models(&self) -> Result<ResolvedModels> {
        let arrival = expfam::by_name(&self.arrival.model)?;
        let service = expfam::by_name(&self.service.model)?;
        expfam::check_theta(arrival.as_ref(), self.arrival.param)?;
        expfam::check_theta(service.as_ref(), self.service.param)?;
        Ok(ResolvedModels {
            arrival,
            theta0: self.arrival.param,
            service,
            phi0: self.service.param,
        })
    }

    /// Basic checks shared by all experiments; returns warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        if self.replications < 1 {
            return Err(Error::Precondition(
                "replications must be at least 1".into(),
            ));
        }
        let models = self.resolve_models()?;
        let mut warnings = Vec::new();
        if self.stability_check {
            // h(x) = -x for the built-in laws, so the mean duration is -η.
            let mean_gap = -models.arrival.mean_stat(models.theta0);
            let mean_service = -models.service.mean_stat(models.phi0);
            if !(mean_gap > mean_service) {
                warnings.push(format!(
                    "unstable configuration: mean interarrival {mean_gap} does not exceed mean service {mean_service}"
                ));
            }
        }
        Ok(warnings)
    }

    fn require_grid(&self) -> Result<&[f64]> {
        let grid = self
            .time_grid
            .as_deref()
            .ok_or_else(|| Error::Precondition("this experiment needs a time_grid".into()))?;
        if grid.is_empty() {
            return Err(Error::Precondition("time_grid is empty".into()));
        }
        for pair in grid.windows(2) {
            if !(pair[0] < pair[1]) {
                return Err(Error::Precondition(
                    "time_grid must be strictly increasing".into(),
                ));
            }
        }
        if !(grid[0] > 0.0) {
            return Err(Error::Precondition("time_grid must be positive".into()));
        }
        Ok(grid)
    }
}

fn check_geometric(grid: &[f64]) -> Result<f64> {
    if grid.len() < 2 {
        return Err(Error::Precondition(
            "geometric grid needs at least two points".into(),
        ));
    }
    let first_ratio = grid[1] / grid[0];
    for pair in grid.windows(2) {
        let ratio = pair[1] / pair[0];
        if (ratio / first_ratio - 1.0).abs() > 0.01 {
            return Err(Error::Precondition(format!(
                "grid is not geometric: ratio {ratio} deviates from {first_ratio}"
            )));
        }
    }
    Ok(first_ratio)
}

/// Run `f` once per replication on the current thread pool and return the
/// outcomes in replication order.
fn par_replicate<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..n as u64).into_par_iter().map(f).collect()
}

// ---------------------------------------------------------------------------
// Normality experiment
// ---------------------------------------------------------------------------

/// One horizon of the normality table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityRow {
    pub t: f64,
    pub n_used: usize,
    pub n_excluded: usize,
    pub ks_theta: f64,
    pub ks_phi: f64,
    pub mean_z_theta: f64,
    pub mean_z_phi: f64,
    pub eps_half: f64,
    pub bound_1x: f64,
    pub bound_5x: f64,
    pub bound_25x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityReport {
    pub rows: Vec<NormalityRow>,
    pub warnings: Vec<String>,
}

impl NormalityReport {
    pub const CSV_HEADER: &'static str =
        "t,n_used,n_excluded,ks_theta,ks_phi,mean_z_theta,mean_z_phi,eps_half,bound_1x,bound_5x,bound_25x";

    pub fn to_csv(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.t.to_string(),
                    r.n_used.to_string(),
                    r.n_excluded.to_string(),
                    r.ks_theta.to_string(),
                    r.ks_phi.to_string(),
                    r.mean_z_theta.to_string(),
                    r.mean_z_phi.to_string(),
                    r.eps_half.to_string(),
                    r.bound_1x.to_string(),
                    r.bound_5x.to_string(),
                    r.bound_25x.to_string(),
                ]
            })
            .collect();
        report::csv_table(Self::CSV_HEADER, &rows)
    }

    /// Do the measured distances stay inside the widest reference envelope?
    pub fn envelope_ok(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.ks_theta <= r.bound_25x && r.ks_phi <= r.bound_25x)
    }
}

#[derive(Debug, Clone, Copy)]
struct ZOutcome {
    rep: u64,
    z: Option<(f64, f64)>,
}

fn normality_row(t: f64, eps: &DecayFunction, outcomes: &mut [ZOutcome]) -> Result<NormalityRow> {
    outcomes.sort_by_key(|o| o.rep);
    let n = outcomes.len();
    let zs: Vec<(f64, f64)> = outcomes.iter().filter_map(|o| o.z).collect();
    let n_excluded = n - zs.len();
    if (n_excluded as f64) / (n as f64) > 0.05 {
        return Err(Error::InsufficientData(format!(
            "horizon {t}: {n_excluded} of {n} replications had no usable window (over 5%)"
        )));
    }
    let z_theta: Vec<f64> = zs.iter().map(|z| z.0).collect();
    let z_phi: Vec<f64> = zs.iter().map(|z| z.1).collect();
    let eps_half = eps.eval(t).sqrt();
    Ok(NormalityRow {
        t,
        n_used: zs.len(),
        n_excluded,
        ks_theta: stats::ks_statistic(&z_theta, stats::normal_cdf),
        ks_phi: stats::ks_statistic(&z_phi, stats::normal_cdf),
        mean_z_theta: z_theta.iter().sum::<f64>() / z_theta.len() as f64,
        mean_z_phi: z_phi.iter().sum::<f64>() / z_phi.len() as f64,
        eps_half,
        bound_1x: eps_half,
        bound_5x: 5.0 * eps_half,
        bound_25x: 25.0 * eps_half,
    })
}

/// Standardized-estimate normality per horizon: KS distance to Φ against
/// `c·ε^{1/2}(T)` envelopes for c ∈ {1, 5, 25}.
///
/// For each horizon, `replications` independent windows are simulated under
/// the fixed-time rule, estimated, and standardized with the information at
/// the true parameters. Windows without a completed arrival and service are
/// excluded; an exclusion fraction above 5% fails the run.
pub fn run_normality(config: &ExperimentConfig) -> Result<NormalityReport> {
    if config.replications < 200 {
        return Err(Error::Precondition(
            "normality runs need at least 200 replications".into(),
        ));
    }
    let warnings = config.validate()?;
    let grid = config.require_grid()?;
    let models = config.resolve_models()?;

    let mut rows = Vec::with_capacity(grid.len());
    for &t in grid {
        let mut outcomes = par_replicate(config.replications, |rep| {
            let mut stream = rng::stream(config.master_seed, rep);
            let window = qsim::simulate(
                models.arrival.as_ref(),
                models.theta0,
                models.service.as_ref(),
                models.phi0,
                StoppingRule::FixedTime(t),
                &mut stream,
            )?;
            let z = match mle::estimate(
                &window,
                models.arrival.as_ref(),
                models.service.as_ref(),
                Some((models.theta0, models.phi0)),
            ) {
                Ok(fit) => Some((fit.z_theta.unwrap(), fit.z_phi.unwrap())),
                Err(Error::InsufficientData(_)) => None,
                Err(e) => return Err(e),
            };
            Ok(ZOutcome { rep, z })
        })?;
        rows.push(normality_row(t, &config.epsilon, &mut outcomes)?);
    }
    Ok(NormalityReport { rows, warnings })
}

// ---------------------------------------------------------------------------
// Counting-process concentration (condition C1)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct C1Row {
    pub t: f64,
    pub n: usize,
    pub eps: f64,
    pub eps_half: f64,
    pub mean_a: f64,
    pub exceed_a: f64,
    pub se_a: f64,
    pub mean_d: f64,
    pub exceed_d: f64,
    pub se_d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct C1Report {
    pub rows: Vec<C1Row>,
    pub warnings: Vec<String>,
}

impl C1Report {
    pub const CSV_HEADER: &'static str =
        "t,n,eps,eps_half,mean_a,exceed_a,se_a,mean_d,exceed_d,se_d";

    pub fn to_csv(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.t.to_string(),
                    r.n.to_string(),
                    r.eps.to_string(),
                    r.eps_half.to_string(),
                    r.mean_a.to_string(),
                    r.exceed_a.to_string(),
                    r.se_a.to_string(),
                    r.mean_d.to_string(),
                    r.exceed_d.to_string(),
                    r.se_d.to_string(),
                ]
            })
            .collect();
        report::csv_table(Self::CSV_HEADER, &rows)
    }

    /// Exceedance frequencies below the `ε^{1/2}` envelope with 2-SE slack.
    pub fn envelope_ok(&self) -> bool {
        self.rows.iter().all(|r| {
            r.exceed_a <= r.eps_half + 2.0 * r.se_a && r.exceed_d <= r.eps_half + 2.0 * r.se_d
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct CountOutcome {
    rep: u64,
    a: u64,
    d: u64,
}

fn c1_row(t: f64, eps_fn: &DecayFunction, outcomes: &mut [CountOutcome]) -> Result<C1Row> {
    outcomes.sort_by_key(|o| o.rep);
    let n = outcomes.len();
    let mean_a = outcomes.iter().map(|o| o.a as f64).sum::<f64>() / n as f64;
    let mean_d = outcomes.iter().map(|o| o.d as f64).sum::<f64>() / n as f64;
    if mean_a == 0.0 || mean_d == 0.0 {
        return Err(Error::InsufficientData(format!(
            "horizon {t}: a counting process never moved (mean A = {mean_a}, mean D = {mean_d})"
        )));
    }
    let eps = eps_fn.eval(t);
    let exceed_a = outcomes
        .iter()
        .filter(|o| (o.a as f64 / mean_a - 1.0).abs() >= eps)
        .count() as f64
        / n as f64;
    let exceed_d = outcomes
        .iter()
        .filter(|o| (o.d as f64 / mean_d - 1.0).abs() >= eps)
        .count() as f64
        / n as f64;
    Ok(C1Row {
        t,
        n,
        eps,
        eps_half: eps.sqrt(),
        mean_a,
        exceed_a,
        se_a: stats::binomial_se(exceed_a, n),
        mean_d,
        exceed_d,
        se_d: stats::binomial_se(exceed_d, n),
    })
}

/// Empirical exceedance probabilities of the arrival and departure counts
/// around their replication means, per horizon, with binomial standard
/// errors against the `ε^{1/2}(T)` envelope.
pub fn run_condition_c1(config: &ExperimentConfig) -> Result<C1Report> {
    if config.replications < 500 {
        return Err(Error::Precondition(
            "concentration runs need at least 500 replications".into(),
        ));
    }
    let warnings = config.validate()?;
    let grid = config.require_grid()?;
    let models = config.resolve_models()?;

    let mut rows = Vec::with_capacity(grid.len());
    for &t in grid {
        let mut outcomes = par_replicate(config.replications, |rep| {
            let mut stream = rng::stream(config.master_seed, rep);
            let window = qsim::simulate(
                models.arrival.as_ref(),
                models.theta0,
                models.service.as_ref(),
                models.phi0,
                StoppingRule::FixedTime(t),
                &mut stream,
            )?;
            Ok(CountOutcome {
                rep,
                a: window.a_count,
                d: window.d_count,
            })
        })?;
        rows.push(c1_row(t, &config.epsilon, &mut outcomes)?);
    }
    Ok(C1Report { rows, warnings })
}

// ---------------------------------------------------------------------------
// Boundary crossings along nested paths
// ---------------------------------------------------------------------------

/// Estimates at one checkpoint of one path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointRecord {
    pub t: f64,
    pub theta_hat: Option<f64>,
    pub phi_hat: Option<f64>,
    pub z_theta: Option<f64>,
    pub z_phi: Option<f64>,
    pub a_count: u64,
    pub d_count: u64,
    pub idle: f64,
}

/// One replication observed at every checkpoint of the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub replication: u64,
    pub checkpoints: Vec<CheckpointRecord>,
}

/// Simulate `replications` nested paths and estimate at each checkpoint.
pub fn collect_paths(config: &ExperimentConfig) -> Result<Vec<PathRecord>> {
    let grid = config.require_grid()?;
    let models = config.resolve_models()?;
    par_replicate(config.replications, |rep| {
        let mut stream = rng::stream(config.master_seed, rep);
        let windows = qsim::checkpoints(
            models.arrival.as_ref(),
            models.theta0,
            models.service.as_ref(),
            models.phi0,
            grid,
            &mut stream,
        )?;
        let checkpoints = windows
            .iter()
            .map(|w| {
                let fit = match mle::estimate(
                    w,
                    models.arrival.as_ref(),
                    models.service.as_ref(),
                    Some((models.theta0, models.phi0)),
                ) {
                    Ok(fit) => Some(fit),
                    Err(Error::InsufficientData(_)) => None,
                    Err(e) => return Err(e),
                };
                Ok(CheckpointRecord {
                    t: w.t,
                    theta_hat: fit.as_ref().map(|f| f.theta_hat),
                    phi_hat: fit.as_ref().map(|f| f.phi_hat),
                    z_theta: fit.as_ref().and_then(|f| f.z_theta),
                    z_phi: fit.as_ref().and_then(|f| f.z_phi),
                    a_count: w.a_count,
                    d_count: w.d_count,
                    idle: w.idle,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PathRecord {
            replication: rep,
            checkpoints,
        })
    })
}

/// Crossing statistics of one boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCrossing {
    pub label: String,
    /// Classifier verdict, when the boundary is classifiable.
    pub verdict: Option<Verdict>,
    /// Per-checkpoint `(t_n, h(t_n), p_n)` with `p_n` the fraction of paths
    /// whose standardized arrival deviation exceeds the boundary at `t_n`.
    pub per_checkpoint: Vec<(f64, f64, f64)>,
    /// `(j, t_j, fraction of paths crossing at some checkpoint k ≥ j)`.
    pub tail_fractions: Vec<(usize, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingReport {
    pub grid: Vec<f64>,
    pub n_paths: usize,
    pub boundaries: Vec<BoundaryCrossing>,
    pub warnings: Vec<String>,
}

impl CrossingReport {
    pub const FREQS_CSV_HEADER: &'static str = "boundary,n,t,h,p";
    pub const TAILS_CSV_HEADER: &'static str = "boundary,j,t,fraction";

    pub fn freqs_csv(&self) -> String {
        let mut rows = Vec::new();
        for b in &self.boundaries {
            for (i, &(t, h, p)) in b.per_checkpoint.iter().enumerate() {
                rows.push(vec![
                    b.label.clone(),
                    (i + 1).to_string(),
                    t.to_string(),
                    h.to_string(),
                    p.to_string(),
                ]);
            }
        }
        report::csv_table(Self::FREQS_CSV_HEADER, &rows)
    }

    pub fn tails_csv(&self) -> String {
        let mut rows = Vec::new();
        for b in &self.boundaries {
            for &(j, t, fraction) in &b.tail_fractions {
                rows.push(vec![
                    b.label.clone(),
                    j.to_string(),
                    t.to_string(),
                    fraction.to_string(),
                ]);
            }
        }
        report::csv_table(Self::TAILS_CSV_HEADER, &rows)
    }

    /// Every lower-class boundary's tail fraction dominates every
    /// upper-class one's at each tail index, and upper-class boundaries are
    /// rarely crossed at the final checkpoint.
    pub fn envelope_ok(&self) -> bool {
        let uppers: Vec<&BoundaryCrossing> = self
            .boundaries
            .iter()
            .filter(|b| b.verdict == Some(Verdict::Upper))
            .collect();
        let lowers: Vec<&BoundaryCrossing> = self
            .boundaries
            .iter()
            .filter(|b| b.verdict == Some(Verdict::Lower))
            .collect();
        let dominance = lowers.iter().all(|l| {
            uppers.iter().all(|u| {
                l.tail_fractions
                    .iter()
                    .zip(&u.tail_fractions)
                    .all(|(lf, uf)| lf.2 >= uf.2)
            })
        });
        let upper_tail_small = uppers
            .iter()
            .all(|u| u.tail_fractions.last().is_none_or(|f| f.2 <= 0.1));
        dominance && upper_tail_small
    }
}

fn crossing_stats(
    boundary: &ClassFunction,
    verdict: Option<Verdict>,
    grid: &[f64],
    paths: &[PathRecord],
) -> BoundaryCrossing {
    let k = grid.len();
    let h_values: Vec<f64> = grid.iter().map(|&t| boundary.eval(t)).collect();
    let crossed = |path: &PathRecord, idx: usize| -> bool {
        path.checkpoints[idx]
            .z_theta
            .map(|z| z > h_values[idx])
            .unwrap_or(false)
    };
    let n = paths.len() as f64;
    let per_checkpoint: Vec<(f64, f64, f64)> = (0..k)
        .map(|i| {
            let count = paths.iter().filter(|p| crossed(p, i)).count();
            (grid[i], h_values[i], count as f64 / n)
        })
        .collect();
    let tail_fractions: Vec<(usize, f64, f64)> = (0..k)
        .map(|j| {
            let count = paths
                .iter()
                .filter(|p| (j..k).any(|i| crossed(p, i)))
                .count();
            (j + 1, grid[j], count as f64 / n)
        })
        .collect();
    BoundaryCrossing {
        label: boundary.label(),
        verdict,
        per_checkpoint,
        tail_fractions,
    }
}

/// Boundary-crossing experiment on nested paths.
///
/// Requires a geometric grid with at least 6 checkpoints, at least 500
/// replications, and a boundary set containing at least one upper-class and
/// one lower-class function (per the integral-test classifier). Crossing
/// frequencies `p_n` are emitted per boundary and feed
/// [`classfn::series_diagnostics`] unchanged.
pub fn run_crossings(config: &ExperimentConfig) -> Result<CrossingReport> {
    if config.replications < 500 {
        return Err(Error::Precondition(
            "crossing runs need at least 500 replications".into(),
        ));
    }
    let grid = config.require_grid()?;
    if grid.len() < 6 {
        return Err(Error::Precondition(
            "crossing runs need at least 6 checkpoints".into(),
        ));
    }
    check_geometric(grid)?;
    if config.class_functions.is_empty() {
        return Err(Error::Precondition(
            "crossing runs need at least one boundary function".into(),
        ));
    }
    let warnings = config.validate()?;

    // Classify the boundaries; unclassifiable ones still get crossing
    // statistics but cannot count toward the upper/lower requirement.
    let t_max = classfn::DEFAULT_T_MAX.max(*grid.last().unwrap());
    let verdicts: Vec<Option<Verdict>> = config
        .class_functions
        .iter()
        .map(|h| {
            classfn::integral_test(h, t_max, classfn::DEFAULT_MARGIN)
                .ok()
                .map(|r| r.verdict)
        })
        .collect();
    let has_upper = verdicts.contains(&Some(Verdict::Upper));
    let has_lower = verdicts.contains(&Some(Verdict::Lower));
    if !(has_upper && has_lower) {
        return Err(Error::Precondition(
            "crossing runs need at least one upper-class and one lower-class boundary".into(),
        ));
    }

    let paths = collect_paths(config)?;
    let boundaries = config
        .class_functions
        .iter()
        .zip(verdicts)
        .map(|(h, verdict)| crossing_stats(h, verdict, grid, &paths))
        .collect();
    Ok(CrossingReport {
        grid: grid.to_vec(),
        n_paths: paths.len(),
        boundaries,
        warnings,
    })
}

// ---------------------------------------------------------------------------
// Consistency / error-decay experiment
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyRow {
    pub t: f64,
    pub n_used: usize,
    pub n_excluded: usize,
    pub mae_theta: f64,
    pub mae_phi: f64,
    /// `MAE(4T)/MAE(T)`, present when `4T` is on the grid.
    pub ratio_theta: Option<f64>,
    pub ratio_phi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub rows: Vec<ConsistencyRow>,
    pub warnings: Vec<String>,
}

impl ConsistencyReport {
    pub const CSV_HEADER: &'static str =
        "t,n_used,n_excluded,mae_theta,mae_phi,ratio_theta,ratio_phi";

    pub fn to_csv(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.t.to_string(),
                    r.n_used.to_string(),
                    r.n_excluded.to_string(),
                    r.mae_theta.to_string(),
                    r.mae_phi.to_string(),
                    report::opt_cell(r.ratio_theta),
                    report::opt_cell(r.ratio_phi),
                ]
            })
            .collect();
        report::csv_table(Self::CSV_HEADER, &rows)
    }

    /// Error-halving on the ratio-4 grid for horizons at or above 400.
    pub fn envelope_ok(&self) -> bool {
        self.rows
            .iter()
            .filter(|r| r.t >= 400.0)
            .filter_map(|r| r.ratio_theta)
            .all(|ratio| (0.4..=0.6).contains(&ratio))
    }
}

#[derive(Debug, Clone, Copy)]
struct ErrorOutcome {
    rep: u64,
    err: Option<(f64, f64)>,
}

/// Mean absolute estimation error per horizon on a ratio-4 grid, with the
/// decay ratios `MAE(4T)/MAE(T)`.
pub fn run_consistency(config: &ExperimentConfig) -> Result<ConsistencyReport> {
    if config.replications < 500 {
        return Err(Error::Precondition(
            "consistency runs need at least 500 replications".into(),
        ));
    }
    let grid = config.require_grid()?;
    let ratio = check_geometric(grid)?;
    if (ratio - 4.0).abs() > 0.04 {
        return Err(Error::Precondition(format!(
            "consistency grids use ratio-4 spacing, got ratio {ratio}"
        )));
    }
    let warnings = config.validate()?;
    let models = config.resolve_models()?;

    let mut maes: Vec<(f64, usize, usize, f64, f64)> = Vec::with_capacity(grid.len());
    for &t in grid {
        let mut outcomes = par_replicate(config.replications, |rep| {
            let mut stream = rng::stream(config.master_seed, rep);
            let window = qsim::simulate(
                models.arrival.as_ref(),
                models.theta0,
                models.service.as_ref(),
                models.phi0,
                StoppingRule::FixedTime(t),
                &mut stream,
            )?;
            let err = match mle::estimate(
                &window,
                models.arrival.as_ref(),
                models.service.as_ref(),
                None,
            ) {
                Ok(fit) => Some((
                    (fit.theta_hat - models.theta0).abs(),
                    (fit.phi_hat - models.phi0).abs(),
                )),
                Err(Error::InsufficientData(_)) => None,
                Err(e) => return Err(e),
            };
            Ok(ErrorOutcome { rep, err })
        })?;
        outcomes.sort_by_key(|o| o.rep);
        let errs: Vec<(f64, f64)> = outcomes.iter().filter_map(|o| o.err).collect();
        let n_excluded = outcomes.len() - errs.len();
        if (n_excluded as f64) / (outcomes.len() as f64) > 0.05 {
            return Err(Error::InsufficientData(format!(
                "horizon {t}: {n_excluded} of {} replications unusable",
                outcomes.len()
            )));
        }
        let mae_theta = errs.iter().map(|e| e.0).sum::<f64>() / errs.len() as f64;
        let mae_phi = errs.iter().map(|e| e.1).sum::<f64>() / errs.len() as f64;
        maes.push((t, errs.len(), n_excluded, mae_theta, mae_phi));
    }

    let rows = maes
        .iter()
        .enumerate()
        .map(|(i, &(t, n_used, n_excluded, mae_theta, mae_phi))| {
            let next = maes.get(i + 1);
            ConsistencyRow {
                t,
                n_used,
                n_excluded,
                mae_theta,
                mae_phi,
                ratio_theta: next.map(|n| n.3 / mae_theta),
                ratio_phi: next.map(|n| n.4 / mae_phi),
            }
        })
        .collect();
    Ok(ConsistencyReport { rows, warnings })
}
