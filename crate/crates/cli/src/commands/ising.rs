use qspan_core::asymptotics::{renyi_asymptotic, Correction, CumulantSeries};
use qspan_core::overlap::{
    ising_f, renyi_quadrature, second_cumulant_from_f, InitialField, IsingQuench, MomentOptions,
    Scheme, MAX_ORDER, MIN_K_GRID,
};
use rayon::prelude::*;

use crate::config::{FieldValue, IsingConfig, Loaded, SchemeName};
use crate::error::{Context, Result};
use crate::table::{Cell, Table};
use crate::Options;

pub const F_COLUMNS: &[&str] = &["t", "re_f", "im_f", "branch_crossing"];
pub const SUMMARY_COLUMNS: &[&str] = &["h_i", "h_f", "J", "t", "k_grid", "e2", "e2_from_f"];
pub const ENTROPY_COLUMNS: &[&str] = &[
    "L",
    "alpha",
    "S_quadrature",
    "S_quadrature_error",
    "S_prediction",
    "S_prediction_corrected",
    "status",
];

/// Status of an entropy row whose columns are all `NaN` because the quench
/// does nothing (`h_i = h_f`): the state never leaves its initial value.
pub const NO_RELAXATION: &str = "no_relaxation";

pub fn quench(cfg: &Loaded<IsingConfig>) -> Result<IsingQuench> {
    let c = &cfg.config;
    let h_i = match &c.h_i {
        FieldValue::Number(h) if h.is_finite() => InitialField::Finite(*h),
        FieldValue::Text(s) if matches!(s.as_str(), "inf" | "infinity") => InitialField::Infinite,
        other => {
            return Err(cfg.error(
                "h_i",
                format!("expected a finite number or \"inf\", got {other:?}"),
            ))
        }
    };
    if !c.h_f.is_finite() {
        return Err(cfg.error("h_f", "must be finite"));
    }
    cfg.positive("j", c.j)?;
    if c.k_grid < MIN_K_GRID {
        return Err(cfg.error("k_grid", format!("must be at least {MIN_K_GRID}")));
    }
    IsingQuench::new(h_i, c.h_f, c.j, c.k_grid).context(|| "quench".into())
}

pub fn run(cfg: &Loaded<IsingConfig>, opts: &Options) -> Result<Vec<Table>> {
    let c = &cfg.config;
    let q = quench(cfg)?;
    cfg.positive("t", c.t)?;
    cfg.sorted_lengths("l", &c.l)?;
    if c.l[0] == 0 {
        return Err(cfg.error("l", "chain lengths must be positive"));
    }
    cfg.sorted_lengths("alpha", &c.alpha)?;
    if c.alpha[0] < 2 || *c.alpha.last().unwrap() > MAX_ORDER {
        return Err(cfg.error(
            "alpha",
            format!("orders must be integers in [2, {MAX_ORDER}]"),
        ));
    }
    if c.f_samples < 2 {
        return Err(cfg.error("f_samples", "needs at least 2 samples"));
    }
    if let Some(0) = c.mc_samples {
        return Err(cfg.error("mc_samples", "must be positive"));
    }
    let seed = opts.seed.or(c.seed).unwrap_or(0);
    let trivial = matches!(q.h_i, InitialField::Finite(h) if h == q.h_f);

    let mut f_table = Table::new("ising_f", "ising_f.v1", F_COLUMNS);
    for i in 0..c.f_samples {
        let t = c.t * i as f64 / (c.f_samples - 1) as f64;
        let v = ising_f(&q, t);
        f_table.push(vec![
            t.into(),
            v.f.re.into(),
            v.f.im.into(),
            v.branch_crossing.into(),
        ]);
    }

    let e2 = q.second_cumulant();
    let e2_from_f = if trivial {
        0.0
    } else {
        second_cumulant_from_f(&q).unwrap_or(f64::NAN)
    };
    let mut summary = Table::new("ising_summary", "ising_summary.v1", SUMMARY_COLUMNS);
    let h_i: Cell = match q.h_i {
        InitialField::Finite(h) => h.into(),
        InitialField::Infinite => "inf".into(),
    };
    summary.push(vec![
        h_i,
        q.h_f.into(),
        q.j.into(),
        c.t.into(),
        q.k_grid.into(),
        e2.into(),
        e2_from_f.into(),
    ]);

    let mut moment_opts = MomentOptions {
        scheme: match c.scheme {
            SchemeName::Auto => Scheme::Auto,
            SchemeName::Grid => Scheme::Grid,
            SchemeName::Mc => Scheme::MonteCarlo,
        },
        seed,
        ..Default::default()
    };
    if let Some(n) = c.mc_samples {
        moment_opts.mc_samples = n;
    }
    let cells: Vec<(u64, u32)> =
        c.l.iter()
            .flat_map(|&l| c.alpha.iter().map(move |&a| (l, a)))
            .collect();
    let rows = opts.install(|| {
        cells
            .par_iter()
            .map(|&(l, alpha)| -> Result<Vec<Cell>> {
                if trivial {
                    let nan = || Cell::Float(f64::NAN);
                    return Ok(vec![
                        l.into(),
                        alpha.into(),
                        nan(),
                        nan(),
                        nan(),
                        nan(),
                        NO_RELAXATION.into(),
                    ]);
                }
                let at = || format!("L = {l}, alpha = {alpha}");
                let quad = renyi_quadrature(&q, l, 1, c.t, alpha, &moment_opts).context(at)?;
                let cs = CumulantSeries::gaussian(e2, l, 1).context(at)?;
                let a = alpha as f64;
                let lead = renyi_asymptotic(&cs, c.t, a, Correction::None).context(at)?;
                let corrected =
                    renyi_asymptotic(&cs, c.t, a, Correction::Leading { seed }).unwrap_or(f64::NAN);
                Ok(vec![
                    l.into(),
                    alpha.into(),
                    quad.value.into(),
                    quad.error.into(),
                    lead.into(),
                    corrected.into(),
                    "ok".into(),
                ])
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut entropy = Table::new("ising_entropy", "ising_entropy.v1", ENTROPY_COLUMNS);
    rows.into_iter().for_each(|r| entropy.push(r));
    Ok(vec![f_table, summary, entropy])
}
