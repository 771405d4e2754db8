use std::collections::BTreeMap;

use qspan_core::asymptotics::{
    moment_asymptotic, renyi_asymptotic, solve_rank_system, von_neumann_asymptotic, Correction,
    CumulantSeries, RankQuery,
};
use rayon::prelude::*;

use crate::config::{AsymptoticsConfig, Loaded};
use crate::error::{Context, Result};
use crate::table::Table;
use crate::Options;

pub const COLUMNS: &[&str] = &[
    "L",
    "t",
    "alpha",
    "eps",
    "moment",
    "S_alpha",
    "S_alpha_corrected",
    "S_vN",
    "D",
    "lambda_cut",
];

pub fn run(cfg: &Loaded<AsymptoticsConfig>, opts: &Options) -> Result<Vec<Table>> {
    let c = &cfg.config;
    cfg.positive("e2", c.e2)?;
    if c.d == 0 {
        return Err(cfg.error("d", "must be at least 1"));
    }
    cfg.sorted_lengths("l", &c.l)?;
    if c.l[0] == 0 {
        return Err(cfg.error("l", "chain lengths must be positive"));
    }
    let times = cfg.grid("t", &c.t)?;
    if times[0] <= 0.0 {
        return Err(cfg.error("t", "times must be positive"));
    }
    if c.alpha.is_empty() {
        return Err(cfg.error("alpha", "must not be empty"));
    }
    if let Some(a) = c
        .alpha
        .iter()
        .find(|a| !(**a > 0.0) || **a == 1.0 || !a.is_finite())
    {
        return Err(cfg.error(
            "alpha",
            format!("{a} is not a Rényi order (positive, not 1)"),
        ));
    }
    if c.correction {
        if let Some(a) = c.alpha.iter().find(|a| a.fract() != 0.0 || **a < 2.0) {
            return Err(cfg.error(
                "alpha",
                format!("the correction needs integer orders >= 2, got {a}"),
            ));
        }
    }
    if c.eps.is_empty() {
        return Err(cfg.error("eps", "must not be empty"));
    }
    if let Some(e) = c.eps.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
        return Err(cfg.error("eps", format!("{e} is outside (0, 1)")));
    }
    let seed = opts.seed.or(c.seed).unwrap_or(0);

    let mut cells = Vec::new();
    for &l in &c.l {
        for &t in &times {
            for &alpha in &c.alpha {
                for &eps in &c.eps {
                    cells.push((l, t, alpha, eps));
                }
            }
        }
    }
    let series: BTreeMap<u64, CumulantSeries> =
        c.l.iter()
            .map(|&l| {
                Ok((
                    l,
                    CumulantSeries::gaussian(c.e2, l, c.d).context(|| "cumulants".into())?,
                ))
            })
            .collect::<Result<_>>()?;
    let rows = opts.install(|| {
        cells
            .par_iter()
            .map(|&(l, t, alpha, eps)| {
                let cs = &series[&l];
                let at = || format!("L = {l}, t = {t}, alpha = {alpha}, eps = {eps}");
                let moment = moment_asymptotic(cs, t, alpha).context(at)?;
                let s = renyi_asymptotic(cs, t, alpha, Correction::None).context(at)?;
                let s_corr = if c.correction {
                    renyi_asymptotic(cs, t, alpha, Correction::Leading { seed }).unwrap_or(f64::NAN)
                } else {
                    f64::NAN
                };
                let s_vn = von_neumann_asymptotic(cs, t).context(at)?;
                let rank =
                    solve_rank_system(cs, &RankQuery::new(eps, t, 0.0).context(at)?).context(at)?;
                Ok(vec![
                    l.into(),
                    t.into(),
                    alpha.into(),
                    eps.into(),
                    moment.into(),
                    s.into(),
                    s_corr.into(),
                    s_vn.into(),
                    rank.rank.into(),
                    rank.lambda_eps.into(),
                ])
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut table = Table::new("asymptotics", "asymptotics.v1", COLUMNS);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(vec![table])
}
