//! Decay of the mean absolute estimation error across a ratio-4 horizon
//! grid: quadrupling the horizon should halve the error.
//!
//! ```bash
//! cargo run -p qmle --example consistency_rates
//! ```

use qmle::classfn::DecayFunction;
use qmle::montecarlo::{run_consistency, ExperimentConfig, ModelSpec};

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
        master_seed: 17,
        class_functions: vec![],
        epsilon: DecayFunction::Power(0.4),
        series_constant: 1.0,
        stability_check: false,
    };
    let report = run_consistency(&config)?;
    println!(
        "{:>7} {:>12} {:>12} {:>16}",
        "T", "MAE(θ̂)", "MAE(φ̂)", "MAE(4T)/MAE(T)"
    );
    for row in &report.rows {
        let ratio = row
            .ratio_theta
            .map(|r| format!("{r:.4}"))
            .unwrap_or_else(|| "-".into());
        println!(
            "{:>7} {:>12.5} {:>12.5} {:>16}",
            row.t, row.mae_theta, row.mae_phi, ratio
        );
    }
    Ok(())
}
