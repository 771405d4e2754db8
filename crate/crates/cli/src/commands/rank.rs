use qspan_core::asymptotics::{
    rank_small_eps, solve_rank_system, weighted_rank_system, CumulantSeries, RankQuery,
};
use rayon::prelude::*;

use crate::commands::distribution::weight;
use crate::config::{Loaded, RankConfig};
use crate::error::{Context, Result};
use crate::table::Table;
use crate::Options;

pub const COLUMNS: &[&str] = &[
    "L",
    "t",
    "eps",
    "x_eps",
    "lambda_eps",
    "rank",
    "rank_small_eps",
];
pub const WEIGHTED_COLUMNS: &[&str] = &["L", "eps", "p_eps", "rank"];

pub fn run(cfg: &Loaded<RankConfig>, opts: &Options) -> Result<Vec<Table>> {
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
    if !(times[0] > 0.0) {
        return Err(cfg.error("t", "times must be positive"));
    }
    cfg.increasing("eps", &c.eps)?;
    if !(c.eps[0] > 0.0 && *c.eps.last().unwrap() < 1.0) {
        return Err(cfg.error("eps", "values must lie in (0, 1)"));
    }
    let series =
        c.l.iter()
            .map(|&l| CumulantSeries::gaussian(c.e2, l, c.d).context(|| format!("L = {l}")))
            .collect::<Result<Vec<_>>>()?;

    let mut cells = Vec::new();
    for cs in &series {
        for &t in &times {
            for &eps in &c.eps {
                cells.push((cs, t, eps));
            }
        }
    }
    let rows = opts.install(|| {
        cells
            .par_iter()
            .map(|&(cs, t, eps)| {
                let at = || format!("L = {}, t = {t}, eps = {eps}", cs.l());
                let r =
                    solve_rank_system(cs, &RankQuery::new(eps, t, 0.0).context(at)?).context(at)?;
                let small = rank_small_eps(cs, t, eps).context(at)?;
                Ok(vec![
                    cs.l().into(),
                    t.into(),
                    eps.into(),
                    r.x_eps.into(),
                    r.lambda_eps.into(),
                    r.rank.into(),
                    small.into(),
                ])
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut table = Table::new("rank", "rank.v1", COLUMNS);
    rows.into_iter().for_each(|r| table.push(r));
    let mut out = vec![table];

    if let Some(wc) = &c.weight {
        let w = weight(cfg, wc)?;
        let mut weighted = Table::new("weighted_rank", "weighted_rank.v1", WEIGHTED_COLUMNS);
        for cs in &series {
            for &eps in &c.eps {
                let s = weighted_rank_system(cs, &w, eps)
                    .context(|| format!("L = {}, eps = {eps}", cs.l()))?;
                weighted.push(vec![
                    cs.l().into(),
                    eps.into(),
                    s.p_eps.into(),
                    s.rank.into(),
                ]);
            }
        }
        out.push(weighted);
    }
    Ok(out)
}
