//! Adaptive Gauss-Kronrod quadrature for finite and semi-infinite intervals.
//!
//! A 15-point Kronrod rule with embedded 7-point Gauss rule supplies the
//! per-interval error estimate; globally adaptive bisection refines the
//! interval with the largest error until the requested tolerance is met.
//! Semi-infinite tails `[a, ∞)` are mapped onto `[0, 1)` with the rational
//! substitution `x = a + u/(1-u)`.

/// Kronrod abscissae for the positive half of `[-1, 1]`.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// 7-point Gauss weights for the odd-indexed abscissae of `XGK`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Quadrature outcome: value, an error estimate, and whether the
/// tolerance was met within the interval budget.
#[derive(Debug, Clone, Copy)]
pub struct Quad {
    pub value: f64,
    pub abs_error: f64,
    pub converged: bool,
}

/// One Gauss-Kronrod 15 pass over `[a, b]`: returns (value, error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut resabs = fc.abs() * WGK[7];

    let mut fv = [0.0f64; 15];
    fv[7] = fc;

    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv[j] = f1;
        fv[14 - j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = kronrod * 0.5;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }
    resasc *= half.abs();

    let value = kronrod * half;
    let raw_err = ((kronrod - gauss) * half).abs();

    // QUADPACK-style rescaling of the raw error estimate.
    let mut err = raw_err;
    if resasc != 0.0 && raw_err != 0.0 {
        let scale = (200.0 * raw_err / resasc).powf(1.5);
        err = if scale < 1.0 { resasc * scale } else { resasc };
    }
    let resabs = resabs * half.abs();
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (value, err)
}

/// Integrate `f` over the finite interval `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Quad {
    if a == b {
        return Quad {
            value: 0.0,
            abs_error: 0.0,
            converged: true,
        };
    }

    // Work list of (error, a, b, value); refine the worst interval first.
    let (v0, e0) = gk15(&f, a, b);
    let mut intervals: Vec<(f64, f64, f64, f64)> = vec![(e0, a, b, v0)];
    let max_intervals = 2048;

    loop {
        let total_err: f64 = intervals.iter().map(|iv| iv.0).sum();
        if total_err <= tol || intervals.len() >= max_intervals {
            let value: f64 = intervals.iter().map(|iv| iv.3).sum();
            return Quad {
                value,
                abs_error: total_err,
                converged: total_err <= tol,
            };
        }

        // Split the interval with the largest error estimate. Non-finite
        // estimates (pathological integrands) sort as equal so the loop
        // degrades to the interval budget instead of panicking.
        let (worst_idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|(_, x), (_, y)| {
                x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        let (_, lo, hi, _) = intervals.swap_remove(worst_idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // Interval can no longer be bisected in floating point.
            let (v, e) = gk15(&f, lo, hi);
            intervals.push((0.0, lo, hi, v));
            let _ = e;
            continue;
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        intervals.push((e1, lo, mid, v1));
        intervals.push((e2, mid, hi, v2));
    }
}

/// Integrate `f` over `[a, ∞)` to absolute tolerance `tol`.
///
/// The integrand must decay fast enough for the mapped integrand to be
/// integrable; densities with exponential tails qualify.
pub fn integrate_tail<F: Fn(f64) -> f64>(f: F, a: f64, tol: f64) -> Quad {
    let mapped = move |u: f64| {
        let one_minus = 1.0 - u;
        if one_minus <= 0.0 {
            return 0.0;
        }
        let x = a + u / one_minus;
        let jac = 1.0 / (one_minus * one_minus);
        let y = f(x) * jac;
        if y.is_finite() {
            y
        } else {
            0.0
        }
    };
    integrate(mapped, 0.0, 1.0, tol)
}
