//! Classify boundary functions by the integral test.
//!
//! Boundaries growing faster than `√(2·loglog T)` make the test integral
//! converge (upper class, crossed finitely often); slower boundaries make it
//! diverge (lower class, crossed infinitely often). Near the critical scale
//! the classifier reports `Indeterminate` rather than guessing.
//!
//! ```bash
//! cargo run -p qmle --example classify_boundaries
//! ```

use qmle::classfn::{integral_test, BoundaryFamily, ClassFunction, DEFAULT_MARGIN, DEFAULT_T_MAX};

fn main() -> qmle::Result<()> {
    println!("{:<22} {:>9} {:>14}", "boundary", "exponent", "verdict");
    for c in [0.6, 0.8, 1.0, 1.2, 1.5, 2.0] {
        let h = ClassFunction::new(BoundaryFamily::ScaledLil(c));
        let report = integral_test(&h, DEFAULT_T_MAX, DEFAULT_MARGIN)?;
        println!(
            "{:<22} {:>9.4} {:>14?}",
            h.label(),
            report.exponent_estimate,
            report.verdict
        );
    }
    for c in [1.0, 2.0] {
        let h = ClassFunction::new(BoundaryFamily::PowerLogLog(c));
        let report = integral_test(&h, DEFAULT_T_MAX, DEFAULT_MARGIN)?;
        println!(
            "{:<22} {:>9.4} {:>14?}",
            h.label(),
            report.exponent_estimate,
            report.verdict
        );
    }

    // Tabulated boundaries work too; clamping past the last point makes
    // them bounded, hence lower class.
    let table = ClassFunction::new(BoundaryFamily::UserTable(vec![
        (10.0, 0.5),
        (1e4, 2.0),
        (1e6, 2.2),
    ]));
    let report = integral_test(&table, DEFAULT_T_MAX, DEFAULT_MARGIN)?;
    println!(
        "{:<22} {:>9.4} {:>14?}",
        table.label(),
        report.exponent_estimate,
        report.verdict
    );
    println!("\npartial integrals of the last boundary at expanding endpoints:");
    for (t, value) in report.tail_partial_integrals.iter().step_by(3) {
        println!("  up to T = {t:>12.3e}: {value:.6}");
    }
    Ok(())
}
