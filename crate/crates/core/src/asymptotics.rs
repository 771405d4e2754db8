//! Large-volume closed forms: moments, entropies, the universal eigenvalue
//! distribution and the effective-rank system, for uniform and weighted time
//! averages.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_2_SQRT_PI, PI};
use core::fmt;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{domain, Error, Result};
use crate::quad::{adaptive_simpson, gauss_legendre_graded};
use crate::special::{correction_integral, erf_inv, erf_inv_tail_expansion, erfc};

/// Per-site energy cumulants together with the lattice geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulantSeries {
    e: Vec<f64>,
    l: u64,
    d: u32,
}

impl CumulantSeries {
    /// `e[0]` is the first cumulant density, `e[1]` the second, and so on.
    pub fn new(e: Vec<f64>, l: u64, d: u32) -> Result<Self> {
        if e.len() < 2 {
            return Err(Error::Invalid(format!(
                "need at least two cumulants, got {}",
                e.len()
            )));
        }
        if !(e[1] > 0.0) || !e[1].is_finite() {
            return domain("e2", e[1], "(0, inf)");
        }
        if l == 0 {
            return domain("L", 0.0, "positive integers");
        }
        if d == 0 {
            return domain("d", 0.0, "positive integers");
        }
        Ok(Self { e, l, d })
    }

    /// Series with only the second cumulant set (first cumulant zero).
    pub fn gaussian(e2: f64, l: u64, d: u32) -> Result<Self> {
        Self::new(alloc::vec![0.0, e2], l, d)
    }

    pub fn cumulants(&self) -> &[f64] {
        &self.e
    }

    pub fn e2(&self) -> f64 {
        self.e[1]
    }

    pub fn l(&self) -> u64 {
        self.l
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// Number of sites `L^d`.
    pub fn volume(&self) -> f64 {
        (self.l as f64).powi(self.d as i32)
    }

    /// Same cumulants on a lattice of a different linear size.
    pub fn with_l(&self, l: u64) -> Result<Self> {
        Self::new(self.e.clone(), l, self.d)
    }

    /// `Ω = √(𝔢₂/2π) L^{d/2}`.
    pub fn omega(&self) -> f64 {
        (self.e2() / (2.0 * PI)).sqrt() * self.volume().sqrt()
    }

    fn half_log_volume(&self) -> f64 {
        0.5 * self.d as f64 * (self.l as f64).ln()
    }
}

/// Probability density of the averaging window on `[0, t]`.
pub struct WeightFunction {
    t: f64,
    kind: WeightKind,
    breakpoints: Vec<f64>,
    sup: f64,
}

enum WeightKind {
    Uniform,
    Tabulated { times: Vec<f64>, values: Vec<f64> },
    Closure(Box<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// Allowed deviation of `∫℘` from one.
pub const WEIGHT_NORMALISATION_TOL: f64 = 1e-10;

const WEIGHT_QUAD_TOL: f64 = 1e-13;
const WEIGHT_PHI_REL_TOL: f64 = 1e-6;
const SUP_SAMPLES: usize = 4096;

impl fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            WeightKind::Uniform => "uniform",
            WeightKind::Tabulated { .. } => "tabulated",
            WeightKind::Closure(_) => "closure",
        };
        f.debug_struct("WeightFunction")
            .field("t", &self.t)
            .field("kind", &kind)
            .field("sup", &self.sup)
            .finish()
    }
}

impl WeightFunction {
    pub fn uniform(t: f64) -> Result<Self> {
        check_window(t)?;
        Ok(Self {
            t,
            kind: WeightKind::Uniform,
            breakpoints: alloc::vec![0.0, t],
            sup: 1.0 / t,
        })
    }

    /// Piecewise-linear density through `(times[i], values[i])`; the knots must
    /// start at 0, increase strictly and end at the window width.
    pub fn tabulated(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() || times.len() < 2 {
            return Err(Error::Invalid(format!(
                "tabulated weight needs matching knot lists of length >= 2 ({} vs {})",
                times.len(),
                values.len()
            )));
        }
        if times[0] != 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invalid(
                "tabulated weight knots must start at 0 and increase strictly".into(),
            ));
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::Invalid(
                "tabulated weight values must be finite and >= 0".into(),
            ));
        }
        let t = *times.last().unwrap();
        check_window(t)?;
        let sup = values.iter().copied().fold(0.0, f64::max);
        let breakpoints = times.clone();
        let w = Self {
            t,
            kind: WeightKind::Tabulated { times, values },
            breakpoints,
            sup,
        };
        w.check_normalisation()?;
        Ok(w)
    }

    /// Density given by a closure on `[0, t]`. `breakpoints` lists interior
    /// points where the density has kinks or jumps.
    pub fn closure<F>(t: f64, density: F, breakpoints: &[f64]) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        check_window(t)?;
        let mut edges = alloc::vec![0.0, t];
        edges.extend(breakpoints.iter().copied().filter(|&b| b > 0.0 && b < t));
        edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
        edges.dedup();
        let mut sup = 0.0f64;
        for seg in edges.windows(2) {
            for i in 0..=SUP_SAMPLES {
                let x = seg[0] + (seg[1] - seg[0]) * i as f64 / SUP_SAMPLES as f64;
                let v = density(x);
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::Invalid(format!(
                        "weight density is {v} at tau = {x}"
                    )));
                }
                sup = sup.max(v);
            }
        }
        let w = Self {
            t,
            kind: WeightKind::Closure(Box::new(density)),
            breakpoints: edges,
            sup,
        };
        w.check_normalisation()?;
        Ok(w)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.kind, WeightKind::Uniform)
    }

    /// Segment edges of `[0, t]`, including interior kinks.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Supremum of the density (sampled for closures).
    pub fn sup(&self) -> f64 {
        self.sup
    }

    pub fn eval(&self, tau: f64) -> f64 {
        if !(0.0..=self.t).contains(&tau) {
            return 0.0;
        }
        match &self.kind {
            WeightKind::Uniform => 1.0 / self.t,
            WeightKind::Tabulated { times, values } => {
                let i = match times.partition_point(|&x| x <= tau) {
                    0 => 0,
                    i if i >= times.len() => times.len() - 2,
                    i => i - 1,
                };
                let s = (tau - times[i]) / (times[i + 1] - times[i]);
                values[i] + s * (values[i + 1] - values[i])
            }
            WeightKind::Closure(f) => f(tau),
        }
    }

    /// `∫₀ᵗ g(℘(τ)) dτ`, integrating segment by segment between breakpoints.
    pub fn integrate_of<G: Fn(f64) -> f64>(&self, g: G) -> Result<f64> {
        self.integrate_on(&self.breakpoints, |tau| g(self.eval(tau)))
    }

    fn integrate_on<G: Fn(f64) -> f64>(&self, edges: &[f64], g: G) -> Result<f64> {
        let mut total = 0.0;
        for seg in edges.windows(2) {
            let tol = WEIGHT_QUAD_TOL * (seg[1] - seg[0]) / self.t;
            total += adaptive_simpson(&g, seg[0], seg[1], tol)?;
        }
        Ok(total)
    }

    /// `∫₀ᵗ ℘^α dτ`.
    pub fn power_integral(&self, alpha: f64) -> Result<f64> {
        if self.is_uniform() {
            return Ok(self.t.powf(1.0 - alpha));
        }
        self.integrate_of(|w| if w > 0.0 { w.powf(alpha) } else { 0.0 })
    }

    /// Differential entropy `-∫₀ᵗ ℘ log ℘ dτ`.
    pub fn differential_entropy(&self) -> Result<f64> {
        if self.is_uniform() {
            return Ok(self.t.ln());
        }
        self.integrate_of(|w| if w > 0.0 { -w * w.ln() } else { 0.0 })
    }

    fn check_normalisation(&self) -> Result<()> {
        let norm = self.integrate_of(|w| w)?;
        if (norm - 1.0).abs() > WEIGHT_NORMALISATION_TOL {
            return Err(Error::Invalid(format!(
                "weight density integrates to {norm}, expected 1"
            )));
        }
        Ok(())
    }

    // Edges splitting [0, t] so that ℘ - level keeps one sign on each piece.
    fn level_edges(&self, level: f64) -> Vec<f64> {
        let mut edges = Vec::new();
        let g = |x: f64| self.eval(x) - level;
        for seg in self.breakpoints.windows(2) {
            edges.push(seg[0]);
            let n = if self.is_uniform() { 1 } else { 64 };
            let h = (seg[1] - seg[0]) / n as f64;
            let mut a = seg[0];
            let mut ga = g(a);
            for i in 1..=n {
                let b = if i == n {
                    seg[1]
                } else {
                    seg[0] + i as f64 * h
                };
                let gb = g(b);
                if ga * gb < 0.0 {
                    let (mut lo, mut hi) = (a, b);
                    for _ in 0..200 {
                        let mid = 0.5 * (lo + hi);
                        if (g(mid) < 0.0) == (ga < 0.0) {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                        if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(1e-300) {
                            break;
                        }
                    }
                    edges.push(0.5 * (lo + hi));
                } else if gb == 0.0 && i < n {
                    edges.push(b);
                }
                a = b;
                ga = gb;
            }
        }
        edges.push(self.t);
        edges.dedup();
        edges
    }
}

fn check_window(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return domain("t", t, "(0, inf)");
    }
    Ok(())
}

fn check_time(t: f64) -> Result<()> {
    check_window(t)
}

/// Leading large-volume moment `tr ρ̄ᵗ^α`.
pub fn moment_asymptotic(cs: &CumulantSeries, t: f64, alpha: f64) -> Result<f64> {
    check_time(t)?;
    if !(alpha > 0.0) {
        return domain("alpha", alpha, "(0, inf)");
    }
    let scale = cs.e2() / (2.0 * PI) * t * t * cs.volume();
    Ok(alpha.powf(-0.5) * scale.powf(0.5 * (1.0 - alpha)))
}

/// Whether the Rényi entropy includes the leading finite-size correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Correction {
    #[default]
    None,
    /// Leading `O(L^{-d/2})` relative correction (integer orders only);
    /// `seed` drives the Monte Carlo used at high orders.
    Leading { seed: u64 },
}

/// Leading large-volume Rényi entropy `S_α`, optionally corrected.
pub fn renyi_asymptotic(
    cs: &CumulantSeries,
    t: f64,
    alpha: f64,
    correction: Correction,
) -> Result<f64> {
    check_time(t)?;
    if !(alpha > 0.0) || alpha == 1.0 || !alpha.is_finite() {
        return domain("alpha", alpha, "(0, 1) or (1, inf)");
    }
    let lead = cs.half_log_volume()
        + 0.5 * (cs.e2() * t * t / (2.0 * PI)).ln()
        + alpha.ln() / (2.0 * (alpha - 1.0));
    match correction {
        Correction::None => Ok(lead),
        Correction::Leading { seed } => {
            if alpha.fract() != 0.0 || alpha < 2.0 {
                return domain("alpha", alpha, "integers >= 2 for the corrected entropy");
            }
            let order = alpha as u32;
            let leading = moment_asymptotic(cs, t, alpha)?;
            let delta = moment_correction(cs, t, order, seed)? / leading;
            if !(delta > -1.0) {
                return Err(Error::NoSolution(
                    "correction exceeds the leading moment; the volume is too small",
                ));
            }
            Ok(lead + (1.0 + delta).ln() / (1.0 - alpha))
        }
    }
}

/// Leading large-volume von Neumann entropy.
pub fn von_neumann_asymptotic(cs: &CumulantSeries, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(cs.half_log_volume() + 0.5 * (cs.e2() * t * t / (2.0 * PI)).ln() + 0.5)
}

/// Eigenvalue density `P(λ)` of the time-averaged state, counting eigenvalues.
pub fn eigenvalue_distribution(cs: &CumulantSeries, t: f64, lambda: f64) -> Result<f64> {
    check_time(t)?;
    if !(lambda > 0.0) {
        return domain("lambda", lambda, "(0, inf)");
    }
    let x = lambda * cs.omega() * t;
    if x == 1.0 {
        return Err(Error::Singular("eigenvalue distribution support edge"));
    }
    if x > 1.0 {
        return Ok(0.0);
    }
    let log_term = (2.0 * PI / (cs.e2() * cs.volume() * t * t * lambda * lambda)).ln();
    Ok(cs.volume().sqrt() * t / (PI * lambda) * (cs.e2() / log_term).sqrt())
}

/// Largest eigenvalue allowed by the leading distribution, `1/(Ω t)`.
pub fn support_edge(cs: &CumulantSeries, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(1.0 / (cs.omega() * t))
}

/// Universal probability-weighted eigenvalue density in the scaled variable.
pub fn pi_universal(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return domain("x", x, "(0, inf)");
    }
    if x == 1.0 {
        return Err(Error::Singular("universal distribution support edge"));
    }
    if x > 1.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (-PI * x.ln()).sqrt())
}

/// `∫₀^y Π(x) dx = 1 - erf(√(-log y))` for `0 ≤ y ≤ 1`.
pub fn pi_cumulative(y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else if y >= 1.0 {
        1.0
    } else {
        erfc((-y.ln()).sqrt())
    }
}

/// One point of the (possibly weighted) eigenvalue distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionPoint {
    pub lambda: f64,
    /// `p = Ω λ`.
    pub scaled_p: f64,
    /// Probability density with respect to `p`.
    pub phi_density: f64,
}

/// Distribution point for a uniform window of width `t`.
pub fn distribution_point(cs: &CumulantSeries, t: f64, lambda: f64) -> Result<DistributionPoint> {
    check_time(t)?;
    if !(lambda > 0.0) {
        return domain("lambda", lambda, "(0, inf)");
    }
    let p = cs.omega() * lambda;
    let phi = t * pi_universal(p * t)?;
    Ok(DistributionPoint {
        lambda,
        scaled_p: p,
        phi_density: phi,
    })
}

/// Distribution point for a weighted window: `Φ(p) = ∫₀ᵗ Π(p/℘(τ)) dτ`.
pub fn weighted_distribution(
    cs: &CumulantSeries,
    w: &WeightFunction,
    lambda: f64,
) -> Result<DistributionPoint> {
    if !(lambda > 0.0) {
        return domain("lambda", lambda, "(0, inf)");
    }
    let p = cs.omega() * lambda;
    let phi = if w.is_uniform() {
        w.t() * pi_universal(p * w.t())?
    } else if p >= w.sup() {
        0.0
    } else {
        weighted_phi(w, p)?
    };
    Ok(DistributionPoint {
        lambda,
        scaled_p: p,
        phi_density: phi,
    })
}

/// `Φ(p) = ∫ Π(p/℘(τ)) dτ` for a non-uniform weight and `p < sup ℘`.
pub fn weighted_phi(w: &WeightFunction, p: f64) -> Result<f64> {
    let edges = w.level_edges(p);
    let mut error = 0.0;
    let integrand = |tau: f64| {
        let v = w.eval(tau);
        if v > p {
            1.0 / (PI * (v / p).ln()).sqrt()
        } else {
            0.0
        }
    };
    let mut total = 0.0;
    for seg in edges.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        if !(w.eval(0.5 * (a + b)) > p) {
            continue;
        }
        // τ = end ± s² removes the inverse square-root at level crossings;
        // below s_min the offset s² is lost to rounding in τ, so the integrand
        // is held at its value there
        let mid = 0.5 * (a + b);
        let half = (mid - a).sqrt();
        // offsets below which either τ or ℘(τ) - p is dominated by rounding,
        // using the secant slope to the midpoint
        let v_mid = w.eval(mid);
        let floor = |x: f64| {
            let vx = w.eval(x);
            let mut scale = x.abs();
            if (vx - p).abs() <= 1e-6 * p {
                let slope = ((v_mid - vx).abs() / (mid - a)).max(f64::MIN_POSITIVE);
                scale = scale.max(p / slope);
            }
            (64.0 * f64::EPSILON * scale).sqrt().min(0.5 * half)
        };
        let (min_a, min_b) = (floor(a), floor(b));
        let left = |s: f64| {
            let s = s.max(min_a);
            2.0 * s * integrand(a + s * s)
        };
        let right = |s: f64| {
            let s = s.max(min_b);
            2.0 * s * integrand(b - s * s)
        };
        for (value, err) in [
            gauss_legendre_graded(left, 0.0, half),
            gauss_legendre_graded(right, 0.0, half),
        ] {
            total += value;
            error += err;
        }
    }
    if error > WEIGHT_PHI_REL_TOL * total {
        return Err(Error::Accuracy {
            achieved: error / total,
            target: WEIGHT_PHI_REL_TOL,
        });
    }
    Ok(total)
}

/// Solution of the uniform effective-rank system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankQuery {
    pub epsilon: f64,
    pub t: f64,
    pub window_start: f64,
}

impl RankQuery {
    pub fn new(epsilon: f64, t: f64, window_start: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return domain("epsilon", epsilon, "(0, 1)");
        }
        check_time(t)?;
        Ok(Self {
            epsilon,
            t,
            window_start,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankSolution {
    /// Scaled cutoff `x_ε = Ω t λ_ε`.
    pub x_eps: f64,
    /// Eigenvalue cutoff.
    pub lambda_eps: f64,
    /// Effective rank.
    pub rank: f64,
}

/// Effective rank for a uniform window: the number of eigenvalues above the
/// cutoff whose discarded probability is `ε`.
pub fn solve_rank_system(cs: &CumulantSeries, query: &RankQuery) -> Result<RankSolution> {
    let RankQuery { epsilon, t, .. } = RankQuery::new(query.epsilon, query.t, query.window_start)?;
    let u = erf_inv(1.0 - epsilon)?;
    let x_eps = (-u * u).exp();
    Ok(RankSolution {
        x_eps,
        lambda_eps: x_eps / (cs.omega() * t),
        rank: rank_prefactor(cs) * u * t,
    })
}

fn rank_prefactor(cs: &CumulantSeries) -> f64 {
    (2.0 * cs.e2()).sqrt() / PI * cs.volume().sqrt()
}

/// Small-`ε` form of the effective rank.
pub fn rank_small_eps(cs: &CumulantSeries, t: f64, eps: f64) -> Result<f64> {
    check_time(t)?;
    let u = erf_inv_tail_expansion(eps)?;
    Ok(rank_prefactor(cs) * u * t)
}

/// Rank bound from slicing the window into independent pieces of width
/// `delta_t`, each truncated with error `eps_delta`.
pub fn rank_timesliced(cs: &CumulantSeries, t: f64, delta_t: f64, eps_delta: f64) -> Result<f64> {
    check_time(t)?;
    if !(delta_t > 0.0 && delta_t <= t) {
        return domain("delta_t", delta_t, "(0, t]");
    }
    let eps = eps_delta * (delta_t / t).sqrt();
    if !(eps > 0.0 && eps < 1.0) {
        return domain("effective epsilon", eps, "(0, 1)");
    }
    Ok(rank_prefactor(cs) * erf_inv(1.0 - eps)? * t)
}

/// Quantum speed limit: shortest time to reach an orthogonal state.
pub fn mandelstam_tamm_bound(cs: &CumulantSeries) -> f64 {
    PI / (2.0 * cs.e2().sqrt() * cs.volume().sqrt())
}

/// Rényi entropy of a weighted average.
pub fn weighted_renyi(cs: &CumulantSeries, w: &WeightFunction, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) || alpha == 1.0 || !alpha.is_finite() {
        return domain("alpha", alpha, "(0, 1) or (1, inf)");
    }
    let power = w.power_integral(alpha)?;
    Ok(cs.half_log_volume()
        + 0.5 * (cs.e2() / (2.0 * PI)).ln()
        + alpha.ln() / (2.0 * (alpha - 1.0))
        + power.ln() / (1.0 - alpha))
}

/// von Neumann entropy of a weighted average.
pub fn weighted_von_neumann(cs: &CumulantSeries, w: &WeightFunction) -> Result<f64> {
    let h = w.differential_entropy()?;
    Ok(cs.half_log_volume() + 0.5 * (cs.e2() / (2.0 * PI)).ln() + 0.5 + h)
}

/// Solution of the weighted effective-rank system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedRankSolution {
    /// Scaled cutoff `p_ε = Ω λ_ε`.
    pub p_eps: f64,
    pub rank: f64,
}

const LOG_P_SPAN: f64 = 700.0;
const P_BISECTION_TOL: f64 = 1e-12;

/// Discarded probability `ε(p)` for a weighted window.
pub fn weighted_truncation_error(w: &WeightFunction, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return domain("p", p, "(0, inf)");
    }
    if w.is_uniform() {
        return Ok(pi_cumulative(p * w.t()));
    }
    let edges = w.level_edges(p);
    w.integrate_on(&edges, |tau| {
        let v = w.eval(tau);
        if v > 0.0 {
            v * pi_cumulative(p / v)
        } else {
            0.0
        }
    })
}

/// Effective rank for a weighted window, solving for the scaled cutoff by
/// bisection in `log p`.
pub fn weighted_rank_system(
    cs: &CumulantSeries,
    w: &WeightFunction,
    eps: f64,
) -> Result<WeightedRankSolution> {
    if !(eps > 0.0 && eps < 1.0) {
        return domain("epsilon", eps, "(0, 1)");
    }
    let hi_p = w.sup();
    let mut hi = hi_p.ln();
    let mut lo = hi - LOG_P_SPAN;
    if weighted_truncation_error(w, lo.exp())? > eps {
        return Err(Error::NoSolution(
            "epsilon below the reachable truncation error",
        ));
    }
    if weighted_truncation_error(w, hi_p)? < eps {
        return Err(Error::NoSolution(
            "epsilon above the reachable truncation error",
        ));
    }
    while hi - lo > P_BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if weighted_truncation_error(w, mid.exp())? < eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p = (0.5 * (lo + hi)).exp();
    Ok(WeightedRankSolution {
        p_eps: p,
        rank: weighted_rank_count(cs, w, p)?,
    })
}

/// Number of eigenvalues with `p_eps ≤ Ω λ ≤ Ω`.
pub fn weighted_rank_count(cs: &CumulantSeries, w: &WeightFunction, p_eps: f64) -> Result<f64> {
    let omega = cs.omega();
    let count = |v: f64| {
        let top = v.min(omega);
        if top > p_eps {
            (v / p_eps).ln().sqrt() - (v / top).ln().sqrt()
        } else {
            0.0
        }
    };
    let integral = if w.is_uniform() {
        w.t() * count(1.0 / w.t())
    } else {
        let edges = w.level_edges(p_eps);
        w.integrate_on(&edges, |tau| count(w.eval(tau)))?
    };
    Ok(omega * FRAC_2_SQRT_PI * integral)
}

/// Leading finite-size correction to `tr ρ̄ᵗ^α` (negative).
pub fn moment_correction(cs: &CumulantSeries, t: f64, alpha: u32, seed: u64) -> Result<f64> {
    check_time(t)?;
    if alpha < 2 {
        return domain("alpha", alpha as f64, "integers >= 2");
    }
    let j = correction_integral(alpha, seed)?.value;
    let a = alpha as f64;
    Ok(-2.0 * (cs.e2() * t * t * cs.volume()).powf(-0.5 * a) * j)
}

/// Leading moment plus its leading finite-size correction.
pub fn moment_with_correction(cs: &CumulantSeries, t: f64, alpha: u32, seed: u64) -> Result<f64> {
    Ok(moment_asymptotic(cs, t, alpha as f64)? + moment_correction(cs, t, alpha, seed)?)
}
