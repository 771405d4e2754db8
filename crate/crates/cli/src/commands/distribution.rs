use std::f64::consts::FRAC_2_SQRT_PI;

use qspan_core::asymptotics::{
    eigenvalue_distribution, pi_cumulative, pi_universal, weighted_phi, CumulantSeries,
    WeightFunction,
};
use qspan_core::Error;

use crate::config::{DistributionConfig, Loaded, WeightConfig};
use crate::error::{Context, Result};
use crate::table::Table;
use crate::Options;

pub const UNIVERSAL_COLUMNS: &[&str] = &["x", "pi", "probability_below", "count_above_scaled"];
pub const COUNTING_COLUMNS: &[&str] = &["x", "lambda", "density"];
pub const WEIGHTED_COLUMNS: &[&str] = &["x", "p", "phi"];

/// Builds the tabulated window density of a config.
pub fn weight<C>(cfg: &Loaded<C>, w: &WeightConfig) -> Result<WeightFunction> {
    WeightFunction::tabulated(w.times.clone(), w.values.clone()).map_err(|e| match e {
        Error::Invalid(m) => cfg.error("weight", m),
        other => cfg.error("weight", other.to_string()),
    })
}

/// `Π(x)`, infinite at the support edge.
fn pi_at(x: f64) -> Result<f64> {
    match pi_universal(x) {
        Err(Error::Singular(_)) => Ok(f64::INFINITY),
        r => r.context(|| format!("x = {x}")),
    }
}

pub fn run(cfg: &Loaded<DistributionConfig>, _opts: &Options) -> Result<Vec<Table>> {
    let c = &cfg.config;
    let xs = cfg.grid("x", &c.x)?;
    if !(xs[0] > 0.0) {
        return Err(cfg.error("x", "values must be positive"));
    }
    let mut universal = Table::new("distribution", "distribution.v1", UNIVERSAL_COLUMNS);
    for &x in &xs {
        let count = if x < 1.0 {
            FRAC_2_SQRT_PI * (-x.ln()).sqrt()
        } else {
            0.0
        };
        universal.push(vec![
            x.into(),
            pi_at(x)?.into(),
            pi_cumulative(x).into(),
            count.into(),
        ]);
    }
    let mut out = vec![universal];

    if let Some(k) = &c.counting {
        cfg.positive("counting.e2", k.e2)?;
        cfg.positive("counting.t", k.t)?;
        let cs = CumulantSeries::gaussian(k.e2, k.l, k.d)
            .map_err(|e| cfg.error("counting", e.to_string()))?;
        let edge = 1.0 / (cs.omega() * k.t);
        let mut table = Table::new("counting", "counting.v1", COUNTING_COLUMNS);
        for &x in &xs {
            let lambda = x * edge;
            let density = match eigenvalue_distribution(&cs, k.t, lambda) {
                Err(Error::Singular(_)) => f64::INFINITY,
                r => r.context(|| format!("lambda = {lambda}"))?,
            };
            table.push(vec![x.into(), lambda.into(), density.into()]);
        }
        out.push(table);
    }

    if let Some(wc) = &c.weight {
        let w = weight(cfg, wc)?;
        let sup = w.sup();
        let mut table = Table::new(
            "weighted_distribution",
            "weighted_distribution.v1",
            WEIGHTED_COLUMNS,
        );
        for &x in &xs {
            let p = x * sup;
            let phi = if p >= sup {
                0.0
            } else {
                weighted_phi(&w, p).context(|| format!("p = {p}"))?
            };
            table.push(vec![x.into(), p.into(), phi.into()]);
        }
        out.push(table);
    }
    Ok(out)
}
