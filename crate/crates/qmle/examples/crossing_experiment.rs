//! Boundary crossings of the standardized estimation error along growing
//! observation windows.
//!
//! Each replication is one sample path observed at nested checkpoints, so a
//! "crossing" is the path event `z_θ(T_k) > h(T_k)`. Lower-class boundaries
//! keep being crossed as the horizon grows; upper-class boundaries are
//! crossed rarely and eventually not at all. The measured crossing
//! frequencies feed the partial-sum diagnostics that tie the crossing
//! probability to the integral criterion.
//!
//! ```bash
//! cargo run -p qmle --example crossing_experiment
//! ```

use qmle::classfn::{series_diagnostics, BoundaryFamily, ClassFunction, DecayFunction};
use qmle::montecarlo::{run_crossings, ExperimentConfig, ModelSpec};

fn main() -> qmle::Result<()> {
    let grid: Vec<f64> = (0..7).map(|k| 10f64.powf(1.5 + 0.5 * k as f64)).collect();
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
        time_grid: Some(grid.clone()),
        replications: 500,
        master_seed: 12,
        class_functions: vec![
            ClassFunction::new(BoundaryFamily::ScaledLil(0.5)),
            ClassFunction::new(BoundaryFamily::ScaledLil(1.5)),
        ],
        epsilon: DecayFunction::Power(0.4),
        series_constant: 1.0,
        stability_check: false,
    };
    let report = run_crossings(&config)?;

    for boundary in &report.boundaries {
        println!(
            "--- {} (classified {:?})",
            boundary.label,
            boundary.verdict
        );
        println!("{:>12} {:>8} {:>8}", "T", "h(T)", "p_n");
        for &(t, h, p) in &boundary.per_checkpoint {
            println!("{t:>12.1} {h:>8.3} {p:>8.3}");
        }
        println!("tail-crossing fractions (any crossing at index ≥ j):");
        let tails: Vec<String> = boundary
            .tail_fractions
            .iter()
            .map(|(j, _, f)| format!("j={j}: {f:.3}"))
            .collect();
        println!("  {}", tails.join("  "));
    }

    // Feed the lower boundary's frequencies into the series diagnostics.
    let lower = &report.boundaries[0];
    let probs: Vec<f64> = lower.per_checkpoint.iter().map(|c| c.2).collect();
    let table = series_diagnostics(
        &config.class_functions[0],
        &report.grid,
        Some(&probs),
        config.series_constant,
    )?;
    println!("\npartial-sum diagnostics for {}:", lower.label);
    print!("{}", table.to_csv());
    Ok(())
}
