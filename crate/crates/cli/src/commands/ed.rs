use qspan_core::ed::{
    energy_cumulants, ground_state, product_state, projection_errors, rank_curve, Boundary,
    Direction, PauliHamiltonian, SpectralDecomposition, MAX_SITES,
};
use qspan_core::Complex64;
use rayon::prelude::*;

use crate::config::{BoundaryName, EdConfig, InitialConfig, Loaded, Schedule};
use crate::error::{Context, Result};
use crate::hamiltonian::HamiltonianSpec;
use crate::table::{Cell, Table};
use crate::Options;

pub const SUMMARY_COLUMNS: &[&str] = &[
    "L",
    "dim",
    "levels",
    "e1",
    "e2",
    "initial_gap",
    "initial_degenerate",
    "mt_bound",
    "overlap_half_time",
];
pub const RANK_COLUMNS: &[&str] = &[
    "L",
    "t",
    "eps",
    "rank",
    "rank_per_sqrt_l",
    "prediction_per_sqrt_l",
];
pub const PROJECTION_COLUMNS: &[&str] =
    &["L", "T", "eps_T", "t", "rank", "error", "upper", "lower"];

/// Overlap search runs up to this multiple of the speed-limit time.
const HALF_TIME_HORIZON: f64 = 50.0;
const HALF_TIME_STEPS_PER_BOUND: f64 = 400.0;

impl Schedule {
    /// `ε` at time `t` for coupling `j`.
    pub fn eps(&self, j: f64, t: f64) -> f64 {
        self.a / (1.0 + self.b * j * t).sqrt()
    }
}

fn parse_direction(s: &str) -> Option<Direction> {
    Some(match s {
        "+z" | "z" => Direction::Up,
        "-z" => Direction::Down,
        "+x" | "x" => Direction::PlusX,
        "-x" => Direction::MinusX,
        "+y" | "y" => Direction::PlusY,
        "-y" => Direction::MinusY,
        _ => return None,
    })
}

/// Initial state and, for ground states, the gap above it and whether the
/// ground level is degenerate.
fn initial_state(
    cfg: &Loaded<EdConfig>,
    initial: &Initial,
    l: usize,
) -> Result<(Vec<Complex64>, f64, bool)> {
    match initial {
        Initial::Product(d) => Ok((product_state(&vec![*d; l]), f64::NAN, false)),
        Initial::Ground(spec) => {
            let h0 = spec.build(Some(l))?;
            let g = ground_state(&h0).context(|| {
                format!(
                    "ground state of {} at L = {l}",
                    cfg.config.hamiltonian.display()
                )
            })?;
            Ok((g.vector, g.gap, g.degenerate))
        }
    }
}

enum Initial {
    Product(Direction),
    Ground(HamiltonianSpec),
}

type Rows = Vec<Vec<Cell>>;

struct Spectral {
    l: usize,
    summary: Vec<Cell>,
    sd: SpectralDecomposition,
    e2: f64,
}

fn analyse(cfg: &Loaded<EdConfig>, h: &PauliHamiltonian, initial: &Initial) -> Result<Spectral> {
    let l = h.l();
    let at = || format!("L = {l}");
    let (psi0, gap, degenerate) = initial_state(cfg, initial, l)?;
    if degenerate {
        eprintln!(
            "warning: L = {l}: initial ground state is degenerate (gap {:e})",
            gap * cfg.config.j
        );
    }
    let sd = SpectralDecomposition::new(h, &psi0).context(at)?;
    let e = energy_cumulants(&sd, l as f64, 2).context(at)?;
    let j = cfg.config.j;
    // the file is in units of J
    let (e1, e2) = (e[0], e[1]);
    let mt = if e2 > 0.0 {
        std::f64::consts::PI / (2.0 * (e2 * l as f64).sqrt())
    } else {
        f64::INFINITY
    };
    let half = if mt.is_finite() {
        sd.first_overlap_below(0.5, mt / HALF_TIME_STEPS_PER_BOUND, HALF_TIME_HORIZON * mt)
            .context(at)?
            .map_or(f64::NAN, |s| s / j)
    } else {
        f64::NAN
    };
    let summary = vec![
        l.into(),
        sd.dim().into(),
        sd.levels().len().into(),
        (e1 * j).into(),
        (e2 * j * j).into(),
        (gap * j).into(),
        degenerate.into(),
        (mt / j).into(),
        half.into(),
    ];
    Ok(Spectral { l, summary, sd, e2 })
}

pub fn run(cfg: &Loaded<EdConfig>, opts: &Options) -> Result<Vec<Table>> {
    let c = &cfg.config;
    cfg.sorted_lengths("l", &c.l)?;
    if c.l[0] == 0 || *c.l.last().unwrap() > MAX_SITES {
        return Err(cfg.error("l", format!("chain lengths must lie in [1, {MAX_SITES}]")));
    }
    cfg.positive("j", c.j)?;
    let times = cfg.grid("times", &c.times)?;
    if !(times[0] > 0.0) {
        return Err(cfg.error("times", "times must be positive"));
    }
    cfg.positive("schedule.a", c.schedule.a)?;
    if !(c.schedule.b >= 0.0) || !c.schedule.b.is_finite() {
        return Err(cfg.error("schedule.b", "must be non-negative"));
    }
    for &t in &times {
        let e = c.schedule.eps(c.j, t);
        if !(e < 1.0) {
            return Err(cfg.error("schedule", format!("eps({t}) = {e} is not below 1")));
        }
    }
    let projection = match &c.projection {
        Some(p) => {
            let ls = p.l.clone().unwrap_or_else(|| c.l.clone());
            if let Some(bad) = ls.iter().find(|l| !c.l.contains(l)) {
                return Err(cfg.error("projection.l", format!("L = {bad} is not in `l`")));
            }
            cfg.increasing("projection.windows", &p.windows)?;
            if !(p.windows[0] > 0.0) {
                return Err(cfg.error("projection.windows", "windows must be positive"));
            }
            if p.points < 2 {
                return Err(cfg.error("projection.points", "needs at least 2 points"));
            }
            Some((ls, p))
        }
        None => None,
    };

    let boundary = c.boundary.map(|b| match b {
        BoundaryName::Periodic => Boundary::Periodic,
        BoundaryName::Open => Boundary::Open,
    });
    let read = |p: &std::path::Path| -> Result<HamiltonianSpec> {
        let mut spec = HamiltonianSpec::read(&cfg.resolve(p))?;
        if let Some(b) = boundary {
            spec.set_boundary(b);
        }
        Ok(spec)
    };
    let spec = read(&c.hamiltonian)?;
    let initial = match &c.initial {
        InitialConfig::Product { direction } => {
            Initial::Product(parse_direction(direction).ok_or_else(|| {
                cfg.error(
                    "initial.direction",
                    format!("`{direction}` is not one of +z, -z, +x, -x, +y, -y"),
                )
            })?)
        }
        InitialConfig::Ground { hamiltonian } => Initial::Ground(read(hamiltonian)?),
    };
    let hams =
        c.l.iter()
            .map(|&l| spec.build(Some(l)))
            .collect::<Result<Vec<_>>>()?;

    let j = c.j;
    let scaled: Vec<f64> = times.iter().map(|t| j * t).collect();
    let results = opts.install(|| {
        hams.par_iter()
            .map(|h| -> Result<(Spectral, Rows, Rows)> {
                let s = analyse(cfg, h, &initial)?;
                let at = || format!("L = {}", s.l);
                let levels = s.sd.levels();
                let curve = rank_curve(&levels, s.l, s.e2, |jt| c.schedule.eps(1.0, jt), &scaled)
                    .context(at)?;
                let rank_rows = curve
                    .iter()
                    .zip(&times)
                    .map(|(p, &t)| {
                        vec![
                            s.l.into(),
                            t.into(),
                            p.eps.into(),
                            p.rank.into(),
                            p.rank_per_sqrt_l.into(),
                            p.prediction_per_sqrt_l.into(),
                        ]
                    })
                    .collect();
                let mut proj_rows = Vec::new();
                if let Some((ls, p)) = &projection {
                    if ls.contains(&s.l) {
                        for &window in &p.windows {
                            let eps = c.schedule.eps(j, window);
                            let ts: Vec<f64> = (0..p.points)
                                .map(|i| j * window * i as f64 / (p.points - 1) as f64)
                                .collect();
                            let errs =
                                projection_errors(&levels, j * window, eps, &ts).context(at)?;
                            for e in errs {
                                proj_rows.push(vec![
                                    s.l.into(),
                                    window.into(),
                                    eps.into(),
                                    (e.t / j).into(),
                                    e.rank.into(),
                                    e.error.into(),
                                    e.upper.into(),
                                    e.lower.into(),
                                ]);
                            }
                        }
                    }
                }
                Ok((s, rank_rows, proj_rows))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut summary = Table::new("ed_summary", "ed_summary.v1", SUMMARY_COLUMNS);
    let mut ranks = Table::new("rank_curve", "rank_curve.v1", RANK_COLUMNS);
    let mut proj = Table::new(
        "projection_error",
        "projection_error.v1",
        PROJECTION_COLUMNS,
    );
    for (s, r, p) in results {
        summary.push(s.summary);
        r.into_iter().for_each(|row| ranks.push(row));
        p.into_iter().for_each(|row| proj.push(row));
    }
    let mut out = vec![summary, ranks];
    if projection.is_some() {
        out.push(proj);
    }
    Ok(out)
}
