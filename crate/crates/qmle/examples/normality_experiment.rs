//! Normal-approximation quality of the standardized rate estimates.
//!
//! For each horizon the standardized deviations `I(θ₀)^{1/2}(θ̂ - θ₀)` of
//! many replications are compared to the standard normal by the
//! Kolmogorov-Smirnov distance, next to `c·ε^{1/2}(T)` reference envelopes.
//!
//! ```bash
//! cargo run -p qmle --example normality_experiment
//! ```

use qmle::classfn::DecayFunction;
use qmle::montecarlo::{run_normality, ExperimentConfig, ModelSpec};

fn main() -> qmle::Result<()> {
    let config = ExperimentConfig {
        arrival: ModelSpec {
            model: "exponential".into(),
            param: 1.0,
        },
        service: ModelSpec {
            model: "exponential".into(),
            param: 1.5,
        },
        rule: None,
        time_grid: Some(vec![100.0, 400.0, 1600.0]),
        replications: 1000,
        master_seed: 8,
        class_functions: vec![],
        epsilon: DecayFunction::Power(0.4),
        series_constant: 1.0,
        stability_check: false,
    };
    let report = run_normality(&config)?;
    println!(
        "{:>7} {:>8} {:>10} {:>10} {:>12} {:>12}",
        "T", "used", "KS(z_θ)", "KS(z_φ)", "mean z_θ", "25·ε^1/2"
    );
    for row in &report.rows {
        println!(
            "{:>7} {:>8} {:>10.4} {:>10.4} {:>12.4} {:>12.4}",
            row.t, row.n_used, row.ks_theta, row.ks_phi, row.mean_z_theta, row.bound_25x
        );
    }
    println!(
        "\nKS distance shrinks with the horizon and stays below the envelope: {}",
        report.envelope_ok()
    );
    println!("CSV form:\n{}", report.to_csv());
    Ok(())
}
