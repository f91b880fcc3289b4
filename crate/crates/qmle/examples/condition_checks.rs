//! Check the two side conditions of the asymptotic program: integrability of
//! the decay function (C2) and concentration of the counting processes (C1).
//!
//! ```bash
//! cargo run -p qmle --example condition_checks
//! ```

use qmle::classfn::{condition_c2_check, DecayFunction, DEFAULT_T_MAX};
use qmle::montecarlo::{run_condition_c1, ExperimentConfig, ModelSpec};

fn main() -> qmle::Result<()> {
    println!("integrability of t^-1 · loglog t · ε^(1/2)(t):");
    let candidates = [
        DecayFunction::Power(0.4),
        DecayFunction::Power(0.2),
        DecayFunction::InvLogLogPow(2.0),
        DecayFunction::ExpNeg,
    ];
    for eps in candidates {
        let report = condition_c2_check(|t| eps.eval(t), DEFAULT_T_MAX)?;
        println!("  ε(t) = {:<18} -> {:?}", eps.label(), report.verdict);
    }

    println!("\ncounting-process concentration, M/M/1 with θ = 1, φ = 1.5:");
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
        time_grid: Some(vec![250.0, 1000.0]),
        replications: 1000,
        master_seed: 4,
        class_functions: vec![],
        epsilon: DecayFunction::Power(0.4),
        series_constant: 1.0,
        stability_check: true,
    };
    let report = run_condition_c1(&config)?;
    println!(
        "{:>7} {:>10} {:>10} {:>10} {:>10}",
        "T", "P_exc(A)", "P_exc(D)", "ε(T)", "ε^1/2(T)"
    );
    for row in &report.rows {
        println!(
            "{:>7} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            row.t, row.exceed_a, row.exceed_d, row.eps, row.eps_half
        );
    }
    println!(
        "exceedance stays below the ε^(1/2) envelope: {}",
        report.envelope_ok()
    );
    Ok(())
}
