//! The zero-temperature gap equation
//!
//! ```text
//! 1/U = int_0^4 N0(eps) / sqrt(Delta^2 + eps^2) d eps
//! ```
//!
//! its small-`Delta` decomposition `a0 + I1(Delta) + I2(Delta)`, the root
//! solver for `Delta(U)` and the weak-coupling formula `32 exp(-sqrt(4 pi^2/U + b1))`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::dos::{self, BAND_EDGE};
use crate::error::{Error, Result};
use crate::quad::{self, QuadratureConfig};
use crate::renorm;
use crate::specfun;

/// Largest accepted residual of a solved gap equation, in units of `1/U`.
pub const RESIDUAL_TOL: f64 = 1e-12;

/// Coupling `U` and hopping `t`, both in the same energy unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapParams {
    pub u: f64,
    pub t: f64,
}

impl GapParams {
    pub fn new(u: f64, t: f64) -> Result<Self> {
        let p = GapParams { u, t };
        p.validate()?;
        Ok(p)
    }

    /// `t = 1`.
    pub fn coupling(u: f64) -> Result<Self> {
        Self::new(u, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.u > 0.0) || !self.u.is_finite() {
            return Err(Error::domain(
                "gap parameters",
                format!("coupling must be positive, got U = {}", self.u),
            ));
        }
        if !(self.t > 0.0) || !self.t.is_finite() {
            return Err(Error::domain(
                "gap parameters",
                format!("hopping must be positive, got t = {}", self.t),
            ));
        }
        Ok(())
    }
}

/// Solved gap with solver diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapSolution {
    pub delta: f64,
    /// `|t/U - rhs(Delta/t)|` at the returned gap.
    pub residual: f64,
    /// Final bracket, in the same units as `delta`.
    pub bracket: (f64, f64),
    /// Number of right-hand-side evaluations.
    pub evaluations: usize,
}

/// Numerical gap against the weak-coupling formula with `b1 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticComparison {
    pub u: f64,
    pub delta_numeric: f64,
    pub delta_asymptotic: f64,
    pub rel_dev: f64,
    /// `exp(-4 pi / sqrt(U)) / sqrt(U)`.
    pub bound_scale: f64,
}

fn check_gap(function: &'static str, delta: f64) -> Result<()> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::domain(
            function,
            format!("gap must be positive and finite, got {delta}"),
        ));
    }
    Ok(())
}

/// Right-hand side of the gap equation at `t = 1`.
///
/// With `eps = Delta sinh(v)` the kernel becomes `dv` and the integral is
/// `int_0^{asinh(4/Delta)} N0(Delta sinh v) dv`. The logarithmic endpoint
/// singularity at `v = 0` is softened by `v = w^3` on `[0, 1]`.
pub fn gap_rhs(delta: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_gap("gap_rhs", delta)?;
    let v_max = (BAND_EDGE / delta).asinh();
    let n0_at = |v: f64| {
        let eps = (delta * v.sinh()).min(BAND_EDGE);
        dos::n0(eps)
    };
    let cubic = |w: f64| {
        if w <= 0.0 {
            return 0.0;
        }
        3.0 * w * w * n0_at(w * w * w)
    };

    let knee = v_max.min(1.0);
    let mut total = quad::integral(
        "gap equation (sinh, near zero)",
        cubic,
        &[0.0, knee.cbrt()],
        cfg,
    )?;
    if v_max > 1.0 {
        let mut points = vec![1.0];
        let mut p = 2.0;
        while p < v_max {
            points.push(p);
            p *= 2.0;
        }
        points.push(v_max);
        total += quad::integral("gap equation (sinh)", n0_at, &points, cfg)?;
    }
    Ok(total)
}

/// The same right-hand side as `a0 + I1(Delta) + I2(Delta)`.
pub fn gap_rhs_decomposition(delta: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_gap("gap_rhs_decomposition", delta)?;
    Ok(renorm::a0_numeric(cfg)? + i1_closed(delta)? + i2_numeric(delta, cfg)?)
}

/// The same right-hand side from the Brillouin-zone average of
/// `1 / (2 sqrt(Delta^2 + e(k)^2))`.
pub fn gap_rhs_pushforward(delta: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_gap("gap_rhs_pushforward", delta)?;
    let d2 = delta * delta;
    dos::dos_pushforward_oracle(|e| 0.5 / (d2 + e * e).sqrt(), cfg)
}

/// `I1(Delta) = int_0^4 ln(16/eps) / (2 pi^2 sqrt(Delta^2 + eps^2)) d eps` in closed form.
pub fn i1_closed(delta: f64) -> Result<f64> {
    check_gap("i1_closed", delta)?;
    let r = (delta * delta + 16.0).sqrt();
    let ln2 = std::f64::consts::LN_2;
    let ld = delta.ln();
    // artanh(4/r) = ln((r + 4)/Delta), free of the cancellation in 1 - 4/r
    let artanh = ((r + 4.0) / delta).ln();
    let braces = 12.0 * (16.0 / delta).ln() * artanh
        - 3.0 * (r + 4.0).ln() * ((4.0 * (r + 4.0)).ln() - 4.0 * ld)
        - 6.0 * ld * (4.0 * delta).ln()
        + 6.0 * specfun::dilog(0.5 - r / 8.0)?
        + PI * PI
        + 27.0 * ln2 * ln2;
    Ok(braces / (24.0 * PI * PI))
}

/// `I1(Delta)` by quadrature in `y` with `eps = 4 e^-y`.
pub fn i1_quadrature(delta: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_gap("i1_quadrature", delta)?;
    let d2 = delta * delta;
    let ln4 = 4f64.ln();
    // integrand: ln(16/eps)/(2 pi^2) * eps / sqrt(Delta^2 + eps^2)
    let f = |y: f64| {
        let eps = 4.0 * (-y).exp();
        (ln4 + y) / (2.0 * PI * PI) * eps / (d2 + eps * eps).sqrt()
    };
    let knee = (BAND_EDGE / delta).ln();
    // past y = knee + 45 the integrand is below e^-45 (y + ln 4) / (2 pi^2)
    let upper = knee.max(0.0) + 45.0;
    let mut points = vec![0.0];
    if knee > 0.0 {
        points.push(knee);
    }
    points.push(upper);
    quad::integral("I1 (quadrature)", f, &points, cfg)
}

/// Small-gap form `(6 ln^2 D - 60 ln2 ln D + pi^2 + 126 ln^2 2) / (24 pi^2)`.
pub fn i1_small_delta(delta: f64) -> Result<f64> {
    check_gap("i1_small_delta", delta)?;
    let ln2 = std::f64::consts::LN_2;
    let l = delta.ln();
    Ok((6.0 * l * l - 60.0 * ln2 * l + PI * PI + 126.0 * ln2 * ln2) / (24.0 * PI * PI))
}

/// `I2(Delta) = int_0^4 (N0 - ln(16/eps)/(2 pi^2)) (1/sqrt(Delta^2+eps^2) - 1/eps) d eps`.
pub fn i2_numeric(delta: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_gap("i2_numeric", delta)?;
    if delta > BAND_EDGE {
        return Err(Error::domain(
            "i2_numeric",
            format!("defined for 0 < Delta <= 4, got {delta}"),
        ));
    }
    let d2 = delta * delta;
    let f = |eps: f64| {
        if eps <= 0.0 {
            return 0.0;
        }
        let r = (d2 + eps * eps).sqrt();
        // 1/r - 1/eps without cancellation
        let kernel = -d2 / (eps * r * (eps + r));
        dos::n0_subtracted(eps) * kernel
    };
    let mut points = vec![0.0];
    for p in [0.1 * delta, delta, 10.0 * delta] {
        if p < BAND_EDGE && p > *points.last().unwrap() {
            points.push(p);
        }
    }
    points.push(BAND_EDGE);
    quad::integral("I2", f, &points, cfg)
}

/// `32 exp(-sqrt(4 pi^2 / U + b1))`.
pub fn delta_asymptotic(u: f64, b1: f64) -> Result<f64> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(Error::domain(
            "delta_asymptotic",
            format!("coupling must be positive, got {u}"),
        ));
    }
    let radicand = 4.0 * PI * PI / u + b1;
    if !(radicand >= 0.0) {
        return Err(Error::domain(
            "delta_asymptotic",
            format!("4 pi^2/U + b1 = {radicand} is negative"),
        ));
    }
    Ok(32.0 * (-radicand.sqrt()).exp())
}

/// `exp(-4 pi / sqrt(U)) / sqrt(U)`, the scale of the relative error of
/// the weak-coupling formula.
pub fn bound_scale(u: f64) -> f64 {
    let r = u.sqrt();
    (-4.0 * PI / r).exp() / r
}

const MAX_BRACKET_STEPS: usize = 60;
const MAX_ROOT_STEPS: usize = 200;

/// Solves `t/U = rhs(Delta')` for `Delta'` at unit hopping and returns
/// `Delta = t Delta'`.
///
/// The search runs in `x = ln(Delta')`, where the right-hand side is close
/// to a parabola. It starts from a factor-4 bracket around the weak-coupling
/// value and uses Illinois regula falsi, falling back to bisection when the
/// secant step stalls.
pub fn gap_solve(params: GapParams, cfg: &QuadratureConfig) -> Result<GapSolution> {
    params.validate()?;
    cfg.validate()?;
    let u = params.u / params.t;
    let target = 1.0 / u;
    let mut evaluations = 0usize;
    let mut f = |x: f64| -> Result<f64> {
        evaluations += 1;
        Ok(gap_rhs(x.exp(), cfg)? - target)
    };

    let guess = delta_asymptotic(u, 0.0)?.ln();
    let step = 4f64.ln();
    let (mut lo, mut hi) = (guess - step, guess + step);
    let mut f_lo = f(lo)?;
    let mut steps = 0;
    while f_lo <= 0.0 {
        hi = lo;
        lo -= step;
        f_lo = f(lo)?;
        steps += 1;
        if steps > MAX_BRACKET_STEPS || lo.exp() == 0.0 {
            return Err(Error::Bracket {
                coupling: params.u,
                lo: params.t * lo.exp(),
                hi: params.t * hi.exp(),
            });
        }
    }
    let mut f_hi = f(hi)?;
    while f_hi >= 0.0 {
        lo = hi;
        f_lo = f_hi;
        hi += step;
        f_hi = f(hi)?;
        steps += 1;
        if steps > MAX_BRACKET_STEPS || !hi.exp().is_finite() {
            return Err(Error::Bracket {
                coupling: params.u,
                lo: params.t * lo.exp(),
                hi: params.t * hi.exp(),
            });
        }
    }

    // f_lo > 0 > f_hi
    let mut best = if f_lo.abs() < f_hi.abs() {
        (lo, f_lo)
    } else {
        (hi, f_hi)
    };
    let mut side = 0i8;
    for _ in 0..MAX_ROOT_STEPS {
        if best.1.abs() <= 0.01 * RESIDUAL_TOL || hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(1.0)
        {
            break;
        }
        let secant = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        let mid = 0.5 * (lo + hi);
        // bisect when the secant point hugs an end of the bracket
        let width = hi - lo;
        let x = if secant.is_finite() && secant > lo + 1e-3 * width && secant < hi - 1e-3 * width {
            secant
        } else {
            mid
        };
        let fx = f(x)?;
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx == 0.0 {
            lo = x;
            hi = x;
            break;
        }
        if fx > 0.0 {
            lo = x;
            f_lo = fx;
            if side == 1 {
                f_hi *= 0.5;
            }
            side = 1;
        } else {
            hi = x;
            f_hi = fx;
            if side == -1 {
                f_lo *= 0.5;
            }
            side = -1;
        }
    }

    let residual = best.1.abs();
    if residual >= RESIDUAL_TOL {
        return Err(Error::NonConvergence {
            integral: "gap equation root".into(),
            estimate: params.t * best.0.exp(),
            error: residual,
            tolerance: RESIDUAL_TOL,
            intervals: evaluations,
        });
    }
    Ok(GapSolution {
        delta: params.t * best.0.exp(),
        residual,
        bracket: (params.t * lo.exp(), params.t * hi.exp()),
        evaluations,
    })
}

/// Solves at `t = 1` and compares with `32 exp(-2 pi / sqrt(U))`.
pub fn compare_asymptotic(u: f64, cfg: &QuadratureConfig) -> Result<AsymptoticComparison> {
    let sol = gap_solve(GapParams::coupling(u)?, cfg)?;
    let asym = delta_asymptotic(u, 0.0)?;
    Ok(AsymptoticComparison {
        u,
        delta_numeric: sol.delta,
        delta_asymptotic: asym,
        rel_dev: (sol.delta / asym - 1.0).abs(),
        bound_scale: bound_scale(u),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    // Reference values from a 20-digit mpmath evaluation (AGM density of
    // states, tanh-sinh quadrature, secant root solve).
    const DELTA_U1: f64 = 0.059_755_431_080_165_81;
    const DELTA_U05: f64 = 0.004_427_011_957_884_712;
    const RHS_AT_0597584: f64 = 0.999_984_184_154_189_9;

    #[test]
    fn i1_closed_matches_quadrature() {
        for &d in &[1e-3, 1e-2, 0.1, 0.5, 1.0, 4.0, 100.0] {
            let c = i1_closed(d).unwrap();
            let q = i1_quadrature(d, &cfg()).unwrap();
            assert!((c - q).abs() < 1e-10, "Delta={d}: {c} vs {q}");
        }
        // mpmath
        assert!((i1_closed(1e-3).unwrap() - 2.718_762_499_881_236).abs() < 1e-13);
        assert!((i1_closed(4.0).unwrap() - 0.110_290_390_158_195_8).abs() < 1e-14);
    }

    #[test]
    fn artanh_rewrite() {
        for &d in &[0.5, 1.0, 4.0, 30.0] {
            let r = (d * d + 16.0f64).sqrt();
            let direct = specfun::artanh(4.0 / r).unwrap();
            assert!((((r + 4.0) / d).ln() - direct).abs() < 1e-13);
        }
    }

    #[test]
    fn i1_large_gap_limit() {
        let ln4 = 4f64.ln();
        let expected = 2.0 * (ln4 + 1.0) / (PI * PI * 100.0);
        let q = i1_quadrature(100.0, &cfg()).unwrap();
        assert!(((q - expected) / expected).abs() < 1e-3);
    }

    #[test]
    fn i1_small_delta_values() {
        let ln2 = std::f64::consts::LN_2;
        let at_one = (PI * PI + 126.0 * ln2 * ln2) / (24.0 * PI * PI);
        assert!((i1_small_delta(1.0).unwrap() - at_one).abs() < 1e-15);
        assert!((at_one - 0.297_237_024).abs() < 1e-9);
        assert!(i1_small_delta(32.0).unwrap().is_finite());
        assert!(i1_small_delta(0.0).is_err());
        // Delta = 0.01: the quadrature matches the small-gap form up to O(Delta^2)
        let q = i1_quadrature(0.01, &cfg()).unwrap();
        assert!((q - i1_small_delta(0.01).unwrap()).abs() < 1e-3 * 0.01 * 0.01);
    }

    #[test]
    fn i1_remainder_is_quadratic() {
        // (I1 - small form)/Delta^2 -> 7.0157e-4 (mpmath)
        for &d in &[1e-3, 1e-2, 1e-1] {
            let r = (i1_closed(d).unwrap() - i1_small_delta(d).unwrap()) / (d * d);
            assert!((r / 7.0157e-4 - 1.0).abs() < 0.02, "Delta={d}: {r}");
        }
    }

    #[test]
    fn i1_derivative_consistency() {
        let d = 0.5;
        let h = 1e-4;
        let fd_closed = (i1_closed(d + h).unwrap() - i1_closed(d - h).unwrap()) / (2.0 * h);
        let c = cfg();
        let fd_quad =
            (i1_quadrature(d + h, &c).unwrap() - i1_quadrature(d - h, &c).unwrap()) / (2.0 * h);
        // dI1/dDelta = -Delta int L(eps) (Delta^2+eps^2)^-3/2
        let analytic = -d
            * quad::integral(
                "dI1",
                |u: f64| {
                    let e = u.exp();
                    e * dos::log_singular_part(e) / (d * d + e * e).powf(1.5)
                },
                &[-60.0, -5.0, 0.0, 4f64.ln()],
                &c,
            )
            .unwrap();
        assert!((fd_closed - fd_quad).abs() < 1e-6);
        assert!((fd_closed - analytic).abs() < 1e-6);
    }

    #[test]
    fn i2_scaling_law() {
        // I2/(Delta^2 ln^2 Delta) from mpmath: -3.32e-4, -4.15e-4, -7.28e-4
        let expected = [(1e-3, -3.319e-4), (1e-2, -4.150e-4), (1e-1, -7.282e-4)];
        for &(d, ratio) in &expected {
            let v = i2_numeric(d, &cfg()).unwrap();
            let r = v / (d * d * d.ln().powi(2));
            assert!((r - ratio).abs() < 1e-6, "Delta={d}: {r}");
        }
        assert!(i2_numeric(1e-4, &cfg()).unwrap().abs() < 1e-6);
        assert!(i2_numeric(5.0, &cfg()).is_err());
    }

    #[test]
    fn decomposition_matches_direct() {
        for &d in &[0.01, 0.1, 1.0] {
            let a = gap_rhs(d, &cfg()).unwrap();
            let b = gap_rhs_decomposition(d, &cfg()).unwrap();
            assert!((a - b).abs() < 1e-8, "Delta={d}: {a} vs {b}");
        }
        // mpmath
        assert!((gap_rhs(0.1, &cfg()).unwrap() - 0.842_796_694_210_403_1).abs() < 1e-12);
    }

    #[test]
    fn rhs_near_weak_coupling_value() {
        let v = gap_rhs(0.059_758_4, &cfg()).unwrap();
        assert!((v - RHS_AT_0597584).abs() < 1e-11, "{v}");
    }

    #[test]
    fn rhs_small_gap_form() {
        // rhs -> (ln(Delta/32)^2 - b1)/(4 pi^2) + O(Delta^2 ln^2), b1 = 0
        for &d in &[1e-2, 1e-3, 1e-4] {
            let v = gap_rhs(d, &cfg()).unwrap();
            let approx = (d / 32.0).ln().powi(2) / (4.0 * PI * PI);
            assert!(
                (v - approx).abs() < 1e-3 * d * d * d.ln().powi(2),
                "Delta={d}"
            );
        }
    }

    #[test]
    fn rhs_is_strictly_decreasing() {
        let mut last = f64::INFINITY;
        for i in 0..=28 {
            let d = 10f64.powf(-6.0 + 0.25 * i as f64);
            let v = gap_rhs(d, &cfg()).unwrap();
            assert!(v < last, "Delta={d}");
            last = v;
        }
        assert!(gap_rhs(0.0, &cfg()).is_err());
    }

    #[test]
    fn solve_weak_coupling() {
        let s = gap_solve(GapParams::coupling(1.0).unwrap(), &cfg()).unwrap();
        assert!(((s.delta - DELTA_U1) / DELTA_U1).abs() < 1e-10, "{s:?}");
        assert!(s.residual < RESIDUAL_TOL);
        assert!(s.bracket.0 <= s.delta && s.delta <= s.bracket.1);

        let s = gap_solve(GapParams::coupling(0.5).unwrap(), &cfg()).unwrap();
        assert!(((s.delta - DELTA_U05) / DELTA_U05).abs() < 1e-10, "{s:?}");
        let asym = 32.0 * (-2.0 * PI * 2f64.sqrt()).exp();
        assert!((s.delta / asym - 1.0).abs() < 1e-6);
    }

    #[test]
    fn solve_scaling_in_hopping() {
        let a = gap_solve(GapParams::new(2.0, 2.0).unwrap(), &cfg()).unwrap();
        let b = gap_solve(GapParams::new(1.0, 1.0).unwrap(), &cfg()).unwrap();
        assert!((a.delta / (2.0 * b.delta) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn solve_strong_coupling_expands_bracket() {
        // rhs ~ 1/(2 Delta) for large Delta, so Delta ~ U/2
        let s = gap_solve(GapParams::coupling(200.0).unwrap(), &cfg()).unwrap();
        assert!((s.delta / 100.0 - 1.0).abs() < 0.01, "{s:?}");
    }

    #[test]
    fn invalid_parameters() {
        assert!(GapParams::new(-1.0, 1.0).is_err());
        assert!(GapParams::new(1.0, 0.0).is_err());
        let err = GapParams::coupling(-1.0).unwrap_err();
        assert!(err.to_string().contains("coupling must be positive"));
    }

    #[test]
    fn asymptotic_formula() {
        let v = delta_asymptotic(1.0, 0.0).unwrap();
        assert!((v - 32.0 * (-2.0 * PI).exp()).abs() < 1e-16);
        assert!((v - 0.059_758).abs() < 1e-6);
        let v = delta_asymptotic(4.0 * PI * PI, 0.0).unwrap();
        assert!((v - 32.0 / std::f64::consts::E).abs() < 1e-12);
        assert!(delta_asymptotic(1.0, -100.0).is_err());
        assert!(delta_asymptotic(0.0, 0.0).is_err());
    }
}
