//! F-distribution quantiles for the sequential test cutoffs.

use crate::error::{Error, Result};

/// Degrees of freedom of an F distribution.
#[derive(Debug, Clone, Copy)]
pub struct FParams {
    pub d1: u32,
    pub d2: u32,
}

impl FParams {
    pub fn new(d1: u32, d2: u32) -> Result<Self> {
        if d1 < 1 || d2 < 1 {
            return Err(Error::Domain(format!(
                "degrees of freedom must be >= 1, got ({d1}, {d2})"
            )));
        }
        Ok(Self { d1, d2 })
    }
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos approximation, g = 7.
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection for the left half-plane.
        std::f64::consts::PI.ln()
            - (std::f64::consts::PI * x).sin().abs().ln()
            - ln_gamma(1.0 - x)
    } else {
        let x = x - 1.0;
        let mut a = COEF[0];
        let t = x + 7.5;
        for (i, c) in COEF.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
    }
}

/// Continued fraction for the incomplete beta (Lentz's algorithm).
fn beta_cont_frac(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    const MAX_ITER: usize = 500;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;

    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;

    for m in 1..=MAX_ITER {
        let mf = m as f64;
        let m2 = 2.0 * mf;

        let aa = mf * (b - mf) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        let aa = -(a + mf) * (qab + mf) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;

        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function `I_x(a, b)`.
///
/// Continued-fraction evaluation, switching through the symmetry
/// `I_x(a,b) = 1 - I_{1-x}(b,a)` where the fraction converges faster.
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Domain(format!(
            "beta parameters must be positive, got ({a}, {b})"
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x must lie in [0,1], got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    let value = if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cont_frac(a, b, x) / a
    } else {
        1.0 - front * beta_cont_frac(b, a, 1.0 - x) / b
    };
    Ok(value.clamp(0.0, 1.0))
}

/// CDF of the F distribution: `I_{d1 x / (d1 x + d2)}(d1/2, d2/2)`.
pub fn f_cdf(x: f64, params: FParams) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let d1 = f64::from(params.d1);
    let d2 = f64::from(params.d2);
    let t = d1 * x / (d1 * x + d2);
    reg_inc_beta(t, d1 / 2.0, d2 / 2.0).expect("arguments are in range by construction")
}

const QUANTILE_TOL: f64 = 1e-9;

/// Upper-tail F quantile: the `x` with `f_cdf(x) = 1 - alpha`.
pub fn f_quantile(alpha: f64, params: FParams) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!(
            "alpha must lie in (0,1), got {alpha}"
        )));
    }
    let target = 1.0 - alpha;

    // Bracket the root, then bisect. The CDF is monotone so this cannot fail
    // for valid inputs.
    let mut hi = 1.0;
    let mut iters = 0;
    while f_cdf(hi, params) < target {
        hi *= 2.0;
        iters += 1;
        assert!(iters < 2100, "failed to bracket F quantile");
    }
    let mut lo = 0.0;
    // Bisection halves the bracket each step; run until the bracket is far
    // below the advertised 1e-9 absolute error.
    while hi - lo > QUANTILE_TOL * 0.01 && (hi - lo) > f64::EPSILON * hi {
        let mid = 0.5 * (lo + hi);
        if f_cdf(mid, params) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
