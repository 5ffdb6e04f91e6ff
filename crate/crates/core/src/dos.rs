//! Density of states of the square-lattice tight-binding band
//! `e(k1, k2) = -2 (cos k1 + cos k2)` (energies in units of `t`).
//!
//! `N0` is defined as the pushforward of the normalised Brillouin-zone
//! measure, which [`dos_pushforward_oracle`] evaluates directly. Two
//! pointwise evaluations are provided and both are checked against it:
//!
//! * [`dos_value`] integrates over the level set `e(k1, k2) = eps`. With
//!   `cos k1 = eps/4 - (1 - eps/4) cos(theta)` the two inverse square-root
//!   edges of the level-set integrand cancel against the Jacobian and
//!   `N0(eps) = pi^-2 int_0^{pi/2} (A^2 sin^2 + eps cos^2)^{-1/2} dtheta`
//!   with `A = 1 + |eps|/4`.
//! * [`dos_elliptic`] evaluates the same integral in closed form through the
//!   arithmetic-geometric mean, `N0(eps) = 1 / (4 pi AGM(1, |eps|/4))`.
//!
//! The integrals built on top of `N0` (moments, `a0`, the gap equation) use
//! the AGM path.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quad::{self, QuadratureConfig};
use crate::specfun;

/// Band edge: `N0` vanishes for `|eps| > 4`.
pub const BAND_EDGE: f64 = 4.0;

/// Below this energy the two-term small-`eps` expansion replaces `N0` in
/// subtracted integrands and is integrated in closed form.
pub const SERIES_SPLIT: f64 = 1e-3;

const TWO_PI2: f64 = 2.0 * PI * PI;

/// A sample `(eps, N0(eps))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DosPoint {
    pub epsilon: f64,
    pub value: f64,
}

/// Arithmetic-geometric mean of two positive numbers.
pub fn agm(a: f64, b: f64) -> f64 {
    let (mut a, mut b) = (a, b);
    for _ in 0..64 {
        if (a - b).abs() <= 4.0 * f64::EPSILON * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    0.5 * (a + b)
}

/// `N0` for `0 < eps <= 4` without argument checks.
#[inline]
pub(crate) fn n0(eps: f64) -> f64 {
    1.0 / (4.0 * PI * agm(1.0, 0.25 * eps))
}

/// The logarithmic singularity `ln(16/eps) / (2 pi^2)` of `N0` at `eps = 0`.
#[inline]
pub fn log_singular_part(eps: f64) -> f64 {
    (16.0 / eps).ln() / TWO_PI2
}

/// Second term of the small-`eps` expansion, `eps^2 (ln(16/eps) - 1) / (128 pi^2)`.
#[inline]
fn expansion_correction(eps: f64) -> f64 {
    eps * eps * ((16.0 / eps).ln() - 1.0) / (128.0 * PI * PI)
}

/// `N0(eps) - ln(16/eps)/(2 pi^2)` for `0 < eps <= 4`.
///
/// Uses the expansion below [`SERIES_SPLIT`], where its remainder is below
/// the rounding error of the subtraction.
pub(crate) fn n0_subtracted(eps: f64) -> f64 {
    if eps < SERIES_SPLIT {
        expansion_correction(eps)
    } else {
        n0(eps) - log_singular_part(eps)
    }
}

fn check_energy(function: &'static str, epsilon: f64) -> Result<()> {
    if epsilon.is_nan() {
        return Err(Error::domain(function, "energy is NaN"));
    }
    if epsilon == 0.0 {
        return Err(Error::domain(
            function,
            "N0 diverges logarithmically at eps = 0",
        ));
    }
    Ok(())
}

/// `N0(eps)` by quadrature over the level set `e(k1, k2) = eps`.
///
/// Returns exactly 0 outside the band.
pub fn dos_value(epsilon: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_energy("dos_value", epsilon)?;
    let e = epsilon.abs();
    if e >= BAND_EDGE {
        return Ok(0.0);
    }
    let a = 1.0 + 0.25 * e;
    let f = |theta: f64| {
        let (s, c) = theta.sin_cos();
        1.0 / (a * a * s * s + e * c * c).sqrt()
    };
    // the integrand is peaked on a scale sqrt(eps) around theta = 0
    let knee = e.sqrt().min(0.5);
    let est = quad::integrate(
        "density of states (level set)",
        f,
        &[0.0, knee, FRAC_PI_2],
        cfg,
    )?;
    Ok(est.value / (PI * PI))
}

/// `N0(eps)` through the arithmetic-geometric mean.
pub fn dos_elliptic(epsilon: f64) -> Result<f64> {
    check_energy("dos_elliptic", epsilon)?;
    let e = epsilon.abs();
    if e >= BAND_EDGE {
        return Ok(0.0);
    }
    Ok(n0(e))
}

/// Two-term small-energy expansion
/// `ln(16/eps)/(2 pi^2) + eps^2 (ln(16/eps) - 1)/(128 pi^2)`.
pub fn dos_asymptotic(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < BAND_EDGE) {
        return Err(Error::domain(
            "dos_asymptotic",
            format!("expansion is defined for 0 < eps < 4, got {epsilon}"),
        ));
    }
    Ok(log_singular_part(epsilon) + expansion_correction(epsilon))
}

/// `int_0^delta eps^(p-1) ln(16/eps) d eps` for `p > 0`.
pub(crate) fn log_power_integral(p: f64, delta: f64) -> f64 {
    delta.powf(p) * ((16.0 / delta).ln() / p + 1.0 / (p * p))
}

fn check_moment_order(function: &'static str, s: f64) -> Result<()> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::domain(
            function,
            format!("moment order must be positive and finite, got {s}"),
        ));
    }
    Ok(())
}

/// Mellin moment `J1(s) = int_0^4 eps^(s-1) N0(eps) d eps` by quadrature.
///
/// On `[0, SERIES_SPLIT]` the two-term expansion is integrated exactly; the
/// rest is integrated in `u = ln(eps)`, where the integrand `e^(su) N0(e^u)`
/// is smooth.
pub fn dos_moment(s: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_moment_order("dos_moment", s)?;
    let d = SERIES_SPLIT;
    let head = log_power_integral(s, d) / TWO_PI2
        + (log_power_integral(s + 2.0, d) - d.powf(s + 2.0) / (s + 2.0)) / (128.0 * PI * PI);

    let f = |u: f64| {
        let eps = u.exp();
        (s * u).exp() * n0(eps)
    };
    let points = [d.ln(), 0.01f64.ln(), 0.1f64.ln(), 0.0, BAND_EDGE.ln()];
    let tail = quad::integral("density-of-states moment", f, &points, cfg)?;
    Ok(head + tail)
}

/// Closed form `(4^s / 8 pi) (Gamma(s/2) / Gamma(1/2 + s/2))^2` of the moment.
pub fn dos_moment_exact(s: f64) -> Result<f64> {
    check_moment_order("dos_moment_exact", s)?;
    let r = specfun::gamma_ratio(s)?;
    Ok(4f64.powf(s) / (8.0 * PI) * r * r)
}

/// Both estimates of a Brillouin-zone average.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PushforwardEstimate {
    /// Nested adaptive Gauss-Kronrod cubature.
    pub quadrature: f64,
    /// Plain Monte Carlo mean over the zone.
    pub monte_carlo: f64,
    /// Standard error of the Monte Carlo mean.
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Number of standard errors tolerated between the two estimates.
const MC_SIGMAS: f64 = 6.0;

/// `(2 pi)^-2 int int g(-2 (cos k1 + cos k2)) dk1 dk2` over the zone.
///
/// The zone is folded to `[0, pi]^2`. The inner integral over `k2` is split
/// at the Fermi line `k2 = pi - k1`, where `g` may have a kink or a peak.
/// An independent Monte Carlo estimate with the configured seed runs
/// alongside.
pub fn dos_pushforward_estimate<G>(g: G, cfg: &QuadratureConfig) -> Result<PushforwardEstimate>
where
    G: Fn(f64) -> f64,
{
    cfg.validate()?;
    let band = |k1: f64, k2: f64| -2.0 * (k1.cos() + k2.cos());

    let inner_cfg = *cfg;
    let outer_cfg = cfg.scaled(10.0);
    let inner = |k1: f64| -> Result<f64> {
        let fermi = PI - k1;
        let mut points = vec![0.0];
        if fermi > 1e-12 && fermi < PI - 1e-12 {
            points.push(fermi);
        }
        points.push(PI);
        quad::integral(
            "Brillouin zone (inner)",
            |k2| g(band(k1, k2)),
            &points,
            &inner_cfg,
        )
    };

    // The adaptive driver takes infallible integrands; stash the first error.
    let failure = std::cell::RefCell::new(None);
    let outer = |k1: f64| match inner(k1) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let total = quad::integral(
        "Brillouin zone (outer)",
        outer,
        &[0.0, FRAC_PI_2, PI],
        &outer_cfg,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let quadrature = total? / (PI * PI);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.mc_samples;
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n {
        let k1 = rng.random::<f64>() * PI;
        let k2 = rng.random::<f64>() * PI;
        let v = g(band(k1, k2));
        sum += v;
        sum_sq += v * v;
    }
    let mean = sum / n as f64;
    let var = (sum_sq / n as f64 - mean * mean).max(0.0);
    let std_error = (var / (n as f64 - 1.0)).sqrt();

    Ok(PushforwardEstimate {
        quadrature,
        monte_carlo: mean,
        std_error,
        samples: n,
        seed: cfg.seed,
    })
}

/// Deterministic value of the zone average, after checking it against the
/// Monte Carlo estimate.
pub fn dos_pushforward_oracle<G>(g: G, cfg: &QuadratureConfig) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    let est = dos_pushforward_estimate(g, cfg)?;
    let slack =
        MC_SIGMAS * est.std_error + 100.0 * cfg.abs_tol.max(cfg.rel_tol * est.quadrature.abs());
    if !est.monte_carlo.is_finite() || (est.quadrature - est.monte_carlo).abs() > slack {
        return Err(Error::OracleMismatch {
            integral: "Brillouin-zone pushforward".into(),
            quadrature: est.quadrature,
            monte_carlo: est.monte_carlo,
            std_error: est.std_error,
        });
    }
    Ok(est.quadrature)
}

/// `int_{-4}^{4} g(eps) N0(eps) d eps` using the level-set `N0` and its
/// evenness. Used to cross-check [`dos_value`] against the zone average.
pub fn integrate_against_dos<G>(g: G, cfg: &QuadratureConfig) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    let failure = std::cell::RefCell::new(None);
    let f = |u: f64| {
        // eps = e^u on (0, 4]; g(eps) + g(-eps) by evenness of N0
        let eps = u.exp();
        match dos_value(eps, cfg) {
            Ok(n) => eps * n * (g(eps) + g(-eps)),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let points = [-40.0, -10.0, -3.0, 0.0, BAND_EDGE.ln()];
    let v = quad::integral("g N0 over the band", f, &points, &cfg.scaled(10.0));
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    // below eps = e^-40 the integrand is bounded by e^-40 * 40 * max|g|
    v
}
