#![allow(clippy::neg_cmp_op_on_partial_ord)]
use rayon::prelude::*;

use hubbard_gap::dos::{self, dos_asymptotic, dos_moment_exact, dos_value};
use hubbard_gap::gap::{self, gap_solve};
use hubbard_gap::renorm::{self, LaurentFit};
use hubbard_gap::{Error, GapParams, QuadratureConfig, Result};

use crate::output::{Cell, Output, Table};

pub const SWEEP_COLUMNS: [&str; 5] = [
    "u",
    "delta_numeric",
    "delta_asymptotic",
    "rel_dev",
    "bound_scale",
];
pub const DOS_COLUMNS: [&str; 5] = [
    "epsilon",
    "n0",
    "n0_asymptotic",
    "abs_diff",
    "scaled_remainder",
];
pub const REGULARIZE_COLUMNS: [&str; 5] =
    ["s", "j1_numeric", "j1_exact", "j2_closed", "difference"];
pub const RATIO_COLUMNS: [&str; 4] = ["u", "ratio_two_term", "ratio_from_asymptotics", "leading"];
const FIT_COLUMNS: [&str; 6] = ["c_m2", "c_m1", "c_0", "c_1", "fit_residual", "extrapolated"];

fn grid(lo: f64, hi: f64, points: usize, log: bool, what: &str) -> Result<Vec<f64>> {
    if points == 0 {
        return Err(Error::Config(format!(
            "{what} grid needs at least one point"
        )));
    }
    if !(lo > 0.0 && lo.is_finite()) {
        return Err(Error::Config(format!(
            "{what} grid must be positive, got lower end {lo}"
        )));
    }
    if !(hi >= lo && hi.is_finite()) {
        return Err(Error::Config(format!(
            "{what} grid upper end {hi} is below the lower end {lo}"
        )));
    }
    if points == 1 {
        return Ok(vec![lo]);
    }
    let n = (points - 1) as f64;
    Ok((0..points)
        .map(|i| {
            let f = i as f64 / n;
            if i == points - 1 {
                hi
            } else if log {
                (lo.ln() + (hi.ln() - lo.ln()) * f).exp()
            } else {
                lo + (hi - lo) * f
            }
        })
        .collect())
}

pub fn solve(u: f64, t: f64, oracle: bool, cfg: &QuadratureConfig) -> Result<Output> {
    let params = GapParams::new(u, t)?;
    let sol = gap_solve(params, cfg)?;
    let asym = t * gap::delta_asymptotic(u / t, 0.0)?;
    let mut columns = vec![
        "u",
        "t",
        "delta",
        "residual",
        "delta_asymptotic",
        "rel_dev",
        "bracket_lo",
        "bracket_hi",
        "evaluations",
    ];
    let mut row: Vec<Cell> = vec![
        u.into(),
        t.into(),
        sol.delta.into(),
        sol.residual.into(),
        asym.into(),
        (sol.delta / asym - 1.0).abs().into(),
        sol.bracket.0.into(),
        sol.bracket.1.into(),
        sol.evaluations.into(),
    ];
    if oracle {
        let d = sol.delta / t;
        let d2 = d * d;
        let est = dos::dos_pushforward_estimate(|e| 0.5 / (d2 + e * e).sqrt(), cfg)?;
        columns.extend([
            "rhs_direct",
            "rhs_zone_quadrature",
            "rhs_monte_carlo",
            "mc_std_error",
            "mc_samples",
            "seed",
        ]);
        row.extend([
            gap::gap_rhs(d, cfg)?.into(),
            est.quadrature.into(),
            est.monte_carlo.into(),
            est.std_error.into(),
            est.samples.into(),
            Cell::Int(est.seed),
        ]);
    }
    let mut table = Table::new(&columns);
    table.push(row);
    Ok(Output::Record(table))
}

pub fn sweep(
    u_min: f64,
    u_max: f64,
    points: usize,
    log: bool,
    cfg: &QuadratureConfig,
) -> Result<Output> {
    let us = grid(u_min, u_max, points, log, "coupling")?;
    let rows = us
        .par_iter()
        .map(|&u| gap::compare_asymptotic(u, cfg))
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(&SWEEP_COLUMNS);
    for r in rows {
        table.push(vec![
            r.u.into(),
            r.delta_numeric.into(),
            r.delta_asymptotic.into(),
            r.rel_dev.into(),
            r.bound_scale.into(),
        ]);
    }
    Ok(Output::Rows(table))
}

pub fn dos(
    points: usize,
    eps_min: f64,
    eps_max: f64,
    log: bool,
    cfg: &QuadratureConfig,
) -> Result<Output> {
    let es = grid(eps_min, eps_max, points, log, "energy")?;
    let rows = es
        .par_iter()
        .map(|&e| {
            let n0 = dos_value(e, cfg)?;
            let asym = dos_asymptotic(e).ok();
            let diff = asym.map(|a| (n0 - a).abs());
            // eps^4 ln(1/eps) changes sign at eps = 1
            let scaled = diff
                .filter(|_| e < 1.0)
                .map(|d| d / (e.powi(4) * (1.0 / e).ln()));
            Ok(vec![
                e.into(),
                n0.into(),
                asym.into(),
                diff.into(),
                scaled.into(),
            ])
        })
        .collect::<Result<Vec<Vec<Cell>>>>()?;
    let mut table = Table::new(&DOS_COLUMNS);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(Output::Rows(table))
}

pub fn constants(cfg: &QuadratureConfig) -> Result<Output> {
    let r = renorm::constants_report(cfg)?;
    let mut columns: Vec<String> = [
        "a0_numeric",
        "a0_exact",
        "b1",
        "a1",
        "sech_integral",
        "gap_ratio_leading",
        "gap_ratio_slope",
    ]
    .map(String::from)
    .to_vec();
    let mut row: Vec<Cell> = vec![
        r.a0_numeric.into(),
        r.a0_exact.into(),
        r.b1.into(),
        r.a1.into(),
        r.sech_integral.into(),
        r.gap_ratio_leading.into(),
        r.gap_ratio_slope.into(),
    ];
    for (k, v) in &r.deviations {
        columns.push(format!("deviation_{k}"));
        row.push((*v).into());
    }
    let mut table = Table::new(&columns);
    table.push(row);
    Ok(Output::Record(table))
}

fn fit_table(fit: &LaurentFit) -> Table {
    let mut t = Table::new(&FIT_COLUMNS);
    t.push(vec![
        fit.c_m2.into(),
        fit.c_m1.into(),
        fit.c_0.into(),
        fit.c_1.into(),
        fit.fit_residual.into(),
        fit.extrapolated.into(),
    ]);
    t
}

pub fn regularize(s_values: &[f64], cfg: &QuadratureConfig) -> Result<Output> {
    if let Some(bad) = s_values.iter().find(|&&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::Config(format!(
            "s values must be positive, got {bad}"
        )));
    }
    let mut s = s_values.to_vec();
    s.sort_by(|a, b| b.total_cmp(a));
    let pairs = s
        .par_iter()
        .map(|&x| renorm::mellin_pair(x, cfg))
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(&REGULARIZE_COLUMNS);
    for p in &pairs {
        table.push(vec![
            p.s.into(),
            p.j1.into(),
            dos_moment_exact(p.s)?.into(),
            p.j2.into(),
            p.difference().into(),
        ]);
    }
    let limit = renorm::regularized_from_pairs(pairs)?;
    Ok(Output::RowsWithFits {
        table,
        fits: vec![
            ("j1_fit", fit_table(&limit.j1)),
            ("difference_fit", fit_table(&limit.difference)),
        ],
    })
}

pub fn ratio(
    us: &[f64],
    a1: Option<f64>,
    b1: Option<f64>,
    cfg: &QuadratureConfig,
) -> Result<Output> {
    if us.is_empty() {
        return Err(Error::Config("no couplings given".into()));
    }
    let (a1, b1) = match (a1, b1) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            let a0 = renorm::a0_numeric(cfg)?;
            let a1 = match a1 {
                Some(a) => a,
                None => renorm::a1_constant(a0, renorm::sech_log2_integral(cfg)?),
            };
            (a1, b1.unwrap_or_else(|| renorm::b1_constant(a0)))
        }
    };
    let mut table = Table::new(&RATIO_COLUMNS);
    for &u in us {
        let two_term = renorm::gap_ratio_expansion(u, a1, b1)?;
        let from_asym = gap::delta_asymptotic(u, b1)? / renorm::neel_asymptotic(u, a1)?;
        table.push(vec![
            u.into(),
            two_term.into(),
            from_asym.into(),
            renorm::gap_ratio_leading().into(),
        ]);
    }
    Ok(Output::Rows(table))
}
