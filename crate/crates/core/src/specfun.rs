//! Special functions on the real line: the dilogarithm, a ratio of Gamma
//! functions, the cosine-power (Beta) integral and `artanh`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::quad::{self, QuadratureConfig};

/// Euler's constant.
#[allow(clippy::excessive_precision)]
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082;

/// pi^2 / 6 = Li2(1).
pub const PI2_OVER_6: f64 = PI * PI / 6.0;

// B_{2k} / (2k+1)!, k = 1..=10.
#[allow(clippy::excessive_precision)]
const DILOG_BERNOULLI: [f64; 10] = [
    2.777_777_777_777_777_777_8e-2,
    -2.777_777_777_777_777_777_8e-4,
    4.724_111_866_969_009_826_2e-6,
    -9.185_773_074_661_963_550_8e-8,
    1.897_886_998_897_099_907_2e-9,
    -4.064_761_645_144_225_526_8e-11,
    8.921_691_020_456_452_555_2e-13,
    -1.993_929_586_072_107_568_7e-14,
    4.518_980_029_619_918_191_7e-16,
    -1.035_651_761_218_124_701_4e-17,
];

/// Li2 on [-1, 1/2] through the Bernoulli series in `u = -ln(1-x)`.
fn dilog_core(x: f64) -> f64 {
    let u = -(-x).ln_1p();
    let u2 = u * u;
    // sum_k c_k u^(2k+1), Horner in u^2
    let mut odd = 0.0;
    for &c in DILOG_BERNOULLI.iter().rev() {
        odd = odd * u2 + c;
    }
    u - 0.25 * u2 + u * u2 * odd
}

/// Real dilogarithm `Li2(x) = sum_k x^k / k^2`, continued to `x <= 1`.
pub fn dilog(x: f64) -> Result<f64> {
    if x.is_nan() || x > 1.0 {
        return Err(Error::domain(
            "dilog",
            format!("argument {x} is on the branch cut (x > 1)"),
        ));
    }
    if x == 1.0 {
        return Ok(PI2_OVER_6);
    }
    if x == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let value = if x < -1.0 {
        // Li2(x) = -pi^2/6 - ln(-x)^2/2 - Li2(1/x)
        let l = (-x).ln();
        -PI2_OVER_6 - 0.5 * l * l - dilog_core(1.0 / x)
    } else if x <= 0.5 {
        dilog_core(x)
    } else {
        // Li2(x) = pi^2/6 - ln(x) ln(1-x) - Li2(1-x)
        PI2_OVER_6 - x.ln() * (-x).ln_1p() - dilog_core(1.0 - x)
    };
    Ok(value)
}

/// `Li2(-1/x) + Li2(-x) + ln(x)^2/2 + pi^2/6`, which vanishes identically
/// for `x > 0`.
pub fn dilog_inversion_residual(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(
            "dilog_inversion_residual",
            format!("argument must be positive and finite, got {x}"),
        ));
    }
    let l = x.ln();
    Ok(dilog(-1.0 / x)? + dilog(-x)? + 0.5 * l * l + PI2_OVER_6)
}

// Stirling coefficients B_{2k} / (2k (2k-1)), k = 1..=8.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

fn stirling_correction(z: f64) -> f64 {
    let w = 1.0 / (z * z);
    let mut acc = 0.0;
    for &c in STIRLING.iter().rev() {
        acc = acc * w + c;
    }
    acc / z
}

/// `ln(Gamma(z) / Gamma(z + 1/2))` for `z > 0`.
fn ln_half_step_ratio(z: f64) -> f64 {
    // Shift up with Gamma(z)/Gamma(z+1/2) = (z+1/2)/z * Gamma(z+1)/Gamma(z+3/2)
    // until the Stirling series is accurate.
    let mut z = z;
    let mut shift = 1.0;
    while z < 12.0 {
        shift *= (z + 0.5) / z;
        z += 1.0;
    }
    let asymptotic = -z * (0.5 / z).ln_1p() - 0.5 * z.ln() + 0.5 + stirling_correction(z)
        - stirling_correction(z + 0.5);
    asymptotic + shift.ln()
}

/// `Gamma(s/2) / Gamma(1/2 + s/2)` for `s > 0`.
pub fn gamma_ratio(s: f64) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::domain(
            "gamma_ratio",
            format!("argument must be positive and finite, got {s}"),
        ));
    }
    Ok(ln_half_step_ratio(0.5 * s).exp())
}

/// `int_0^{pi/2} cos(k)^(s-1) dk = (sqrt(pi)/2) Gamma(s/2)/Gamma(1/2+s/2)`.
pub fn cosine_power_integral(s: f64) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::domain(
            "cosine_power_integral",
            format!("argument must be positive and finite, got {s}"),
        ));
    }
    Ok(0.5 * PI.sqrt() * gamma_ratio(s)?)
}

/// The same integral by adaptive quadrature.
///
/// Written as `int_0^{pi/2} sin(p)^(s-1) dp`; for `s < 1` the endpoint
/// singularity at `p = 0` is removed by `p = w^(1/s)`, which turns the
/// integrand into `(sin(p)/p)^(s-1) / s`.
pub fn cosine_power_integral_quadrature(s: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::domain(
            "cosine_power_integral_quadrature",
            format!("argument must be positive and finite, got {s}"),
        ));
    }
    if s < 1.0 {
        let upper = FRAC_PI_2.powf(s);
        let inv = 1.0 / s;
        let f = |w: f64| {
            if w <= 0.0 {
                return inv;
            }
            let p = w.powf(inv);
            (p.sin() / p).powf(s - 1.0) * inv
        };
        quad::integral("cosine power (substituted)", f, &[0.0, upper], cfg)
    } else {
        let f = |p: f64| p.sin().powf(s - 1.0);
        quad::integral("cosine power", f, &[0.0, FRAC_PI_2], cfg)
    }
}

/// Inverse hyperbolic tangent, `ln((1+x)/(1-x))/2` for `|x| < 1`.
pub fn artanh(x: f64) -> Result<f64> {
    if !(x.abs() < 1.0) {
        return Err(Error::domain(
            "artanh",
            format!("argument must lie in (-1, 1), got {x}"),
        ));
    }
    Ok(0.5 * (x.ln_1p() - (-x).ln_1p()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    /// Direct power series, valid for |x| < 1; slow but independent.
    fn dilog_series(x: f64) -> f64 {
        let mut sum = 0.0;
        let mut p = 1.0;
        for k in 1..200_000 {
            p *= x;
            let term = p / (k as f64 * k as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1e-300) {
                break;
            }
        }
        sum
    }

    #[test]
    fn dilog_special_values() {
        assert_eq!(dilog(0.0).unwrap(), 0.0);
        assert!(rel(dilog(1.0).unwrap(), PI * PI / 6.0) < 1e-15);
        assert!(rel(dilog(-1.0).unwrap(), -PI * PI / 12.0) < 1e-14);
        // Li2(1/2) = pi^2/12 - ln(2)^2/2
        let half = PI * PI / 12.0 - 0.5 * 2f64.ln().powi(2);
        assert!(rel(dilog(0.5).unwrap(), half) < 1e-14);
    }

    #[test]
    fn dilog_matches_series() {
        for &x in &[-0.9, -0.5, -0.1, -1e-8, 1e-8, 0.1, 0.3, 0.6, 0.75, 0.9] {
            let s = dilog_series(x);
            assert!(rel(dilog(x).unwrap(), s) < 1e-13, "x={x}");
        }
    }

    #[test]
    fn dilog_at_minus_ten_by_inversion() {
        let l = 10f64.ln();
        let expected = -dilog_series(-0.1) - 0.5 * l * l - PI2_OVER_6;
        assert!((dilog(-10.0).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn dilog_domain() {
        assert!(dilog(1.0 + 1e-12).is_err());
        assert!(dilog(f64::NAN).is_err());
    }

    #[test]
    fn inversion_residual_examples() {
        assert!(dilog_inversion_residual(1.0).unwrap().abs() < 1e-15);
        assert!(dilog_inversion_residual(2.0).unwrap().abs() < 1e-12);
        assert!(dilog_inversion_residual(100.0).unwrap().abs() < 1e-12);
        assert!(dilog_inversion_residual(0.0).is_err());
        assert!(dilog_inversion_residual(-1.0).is_err());
    }

    #[test]
    fn gamma_ratio_examples() {
        assert!(rel(gamma_ratio(1.0).unwrap(), PI.sqrt()) < 1e-14);
        assert!(rel(gamma_ratio(2.0).unwrap(), 2.0 / PI.sqrt()) < 1e-14);
        // Laurent series 2/(sqrt(pi) s) + 2 ln2/sqrt(pi) + O(s)
        let s = 0.01;
        let laurent = 2.0 / (PI.sqrt() * s) + 2.0 * 2f64.ln() / PI.sqrt();
        let g = gamma_ratio(s).unwrap();
        assert!(rel(g, 113.618_127_911_659_36) < 1e-12, "{g}");
        assert!((g - laurent).abs() < 5.0 * s);
        assert!(gamma_ratio(0.0).is_err());
    }

    #[test]
    fn gamma_ratio_against_known_quotients() {
        // Gamma(1/4)/Gamma(3/4)
        #[allow(clippy::excessive_precision)]
        let g14 = 3.625_609_908_221_908_311_930_685_155_867_672;
        #[allow(clippy::excessive_precision)]
        let g34 = 1.225_416_702_465_177_645_129_098_303_362_890;
        assert!(rel(gamma_ratio(0.5).unwrap(), g14 / g34) < 1e-13);
        // Gamma(50)/Gamma(50.5) from Gamma(1)/Gamma(3/2) = 2/sqrt(pi) and
        // Gamma(z+1)/Gamma(z+3/2) = z/(z+1/2) Gamma(z)/Gamma(z+1/2)
        let r = (1..50).fold(2.0 / PI.sqrt(), |acc, z| {
            let z = z as f64;
            acc * z / (z + 0.5)
        });
        assert!(rel(gamma_ratio(100.0).unwrap(), r) < 1e-12);
    }

    #[test]
    fn cosine_power_examples() {
        assert!(rel(cosine_power_integral(1.0).unwrap(), FRAC_PI_2) < 1e-15);
        assert!(rel(cosine_power_integral(2.0).unwrap(), 1.0) < 1e-14);
        assert!((cosine_power_integral(0.5).unwrap() - 2.622_057_554_3).abs() < 1e-9);
        assert!(cosine_power_integral(-1.0).is_err());
    }

    #[test]
    fn cosine_power_quadrature_path() {
        let cfg = QuadratureConfig::default();
        for &s in &[0.3, 0.5, 1.0, 2.0, 4.0] {
            let q = cosine_power_integral_quadrature(s, &cfg).unwrap();
            let c = cosine_power_integral(s).unwrap();
            assert!(rel(q, c) < 1e-10, "s={s}: {q} vs {c}");
        }
    }

    #[test]
    fn artanh_matches_std() {
        for &x in &[-0.9, -0.1, 0.0, 0.3, 0.999] {
            assert!((artanh(x).unwrap() - x.atanh()).abs() < 1e-14);
        }
        assert!(artanh(1.0).is_err());
    }
}
