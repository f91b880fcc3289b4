//! Observe an M/M/1 queue under each of the four stopping rules.
//!
//! ```bash
//! cargo run -p qmle --example simulate_window
//! ```

use qmle::expfam::Exponential;
use qmle::qsim::{simulate, StoppingRule};
use qmle::rng;

fn main() -> qmle::Result<()> {
    let (theta, phi) = (1.0, 1.5);
    let rules = [
        StoppingRule::FixedTime(25.0),
        StoppingRule::FixedDepartures(20),
        StoppingRule::FixedArrivals(20),
        StoppingRule::FixedTransitions(40),
    ];

    for (i, rule) in rules.into_iter().enumerate() {
        let mut stream = rng::stream(7, i as u64);
        let w = simulate(&Exponential, theta, &Exponential, phi, rule, &mut stream)?;
        println!("--- {rule:?}");
        println!(
            "T = {:.4}, A(T) = {}, D(T) = {}, idle γ(T) = {:.4}",
            w.t, w.a_count, w.d_count, w.idle
        );
        println!(
            "Σu = {:.4} (gap to T: {:.4}), γ + Σv = {:.4} (gap to T: {:.4})",
            w.sum_arrivals(),
            w.t - w.sum_arrivals(),
            w.idle + w.sum_services(),
            w.t - w.idle - w.sum_services()
        );
        w.validate()?;
    }

    // Windows serialize to a stable JSON record for replay.
    let mut stream = rng::stream(7, 99);
    let w = simulate(
        &Exponential,
        theta,
        &Exponential,
        phi,
        StoppingRule::FixedTransitions(8),
        &mut stream,
    )?;
    println!("--- JSON record of a small window");
    println!("{}", serde_json::to_string_pretty(&w).expect("serialize"));
    Ok(())
}
