//! Exact finite-size moments `tr ρ̄ᵗ^α` from the dynamical free energy
//! `f(t) = -L^{-d} log⟨Ψₜ|Ψ₀⟩`, and the transverse-field Ising quench.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use crate::error::{domain, Error, Result};
use crate::quad::{graded_edges, ChebyshevSeries, GaussLegendre};
use crate::special::uniform_open01;

/// Per-site dynamical free energy. Implementations satisfy `f(0) = 0` and
/// `f(-t) = conj f(t)`; physical ones also have `Re f ≥ 0`.
pub trait DynamicalFreeEnergy {
    fn eval(&self, t: f64) -> Complex64;
}

impl<G: Fn(f64) -> Complex64> DynamicalFreeEnergy for G {
    fn eval(&self, t: f64) -> Complex64 {
        self(t)
    }
}

/// Initial transverse field of an Ising quench.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialField {
    Finite(f64),
    /// Fully polarised along the field.
    Infinite,
}

/// Global quench of the transverse field in the Ising chain
/// `H = -J Σ (σˣσˣ + h σᶻ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsingQuench {
    pub h_i: InitialField,
    pub h_f: f64,
    pub j: f64,
    pub k_grid: usize,
}

pub const MIN_K_GRID: usize = 64;
pub const DEFAULT_K_GRID: usize = 4096;

impl IsingQuench {
    pub fn new(h_i: InitialField, h_f: f64, j: f64, k_grid: usize) -> Result<Self> {
        if !(j > 0.0) || !j.is_finite() {
            return domain("J", j, "(0, inf)");
        }
        if !h_f.is_finite() {
            return domain("h_f", h_f, "finite reals");
        }
        if let InitialField::Finite(h) = h_i {
            if !h.is_finite() {
                return domain("h_i", h, "finite reals (use InitialField::Infinite)");
            }
        }
        if k_grid < MIN_K_GRID {
            return domain("k_grid", k_grid as f64, ">= 64");
        }
        Ok(Self {
            h_i,
            h_f,
            j,
            k_grid,
        })
    }

    /// Exact second cumulant density `∫₀^π dk/2π ε_k² sin²Δ_k` (trapezoid).
    pub fn second_cumulant(&self) -> f64 {
        self.k_sum(|k| {
            let m = ising_dispersion(self, k);
            m.eps * m.eps * (1.0 - m.cos_delta * m.cos_delta)
        })
    }

    fn k_sum<G: FnMut(f64) -> f64>(&self, mut g: G) -> f64 {
        let n = self.k_grid;
        let h = PI / n as f64;
        let mut total = 0.5 * (g(0.0) + g(PI));
        for i in 1..n {
            total += g(i as f64 * h);
        }
        total * h / (2.0 * PI)
    }
}

/// Single-mode data of the Ising quench.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsingMode {
    pub eps: f64,
    pub cos_delta: f64,
    /// The post-quench gap closes at this momentum.
    pub singular: bool,
}

/// Post-quench mode energy and the Bogoliubov angle between the two fields.
pub fn ising_dispersion(q: &IsingQuench, k: f64) -> IsingMode {
    let (s, c) = k.sin_cos();
    let rf2 = 1.0 + q.h_f * q.h_f - 2.0 * q.h_f * c;
    let rf = rf2.max(0.0).sqrt();
    let eps = 2.0 * q.j * rf;
    if rf <= 1e-300 {
        return IsingMode {
            eps: 0.0,
            cos_delta: 1.0,
            singular: true,
        };
    }
    let cos_delta = match q.h_i {
        InitialField::Infinite => (q.h_f - c) / rf,
        InitialField::Finite(hi) => {
            let ri = (1.0 + hi * hi - 2.0 * hi * c).max(0.0).sqrt();
            if ri <= 1e-300 {
                1.0
            } else {
                ((q.h_f - c) * (hi - c) + s * s) / (rf * ri)
            }
        }
    };
    IsingMode {
        eps,
        cos_delta: cos_delta.clamp(-1.0, 1.0),
        singular: false,
    }
}

/// Value of the Ising `f(t)` with a flag for principal-branch jumps between
/// neighbouring momenta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsingValue {
    pub f: Complex64,
    pub branch_crossing: bool,
}

/// `f(t) = -∫₀^π dk/2π log((1+cosΔ_k)/2 + (1-cosΔ_k)/2 · e^{2iε_k t})`.
pub fn ising_f(q: &IsingQuench, t: f64) -> IsingValue {
    let n = q.k_grid;
    let h = PI / n as f64;
    let mut total = Complex64::new(0.0, 0.0);
    let mut prev_arg: Option<f64> = None;
    let mut crossing = false;
    for i in 0..=n {
        let k = i as f64 * h;
        let m = ising_dispersion(q, k);
        let a = 0.5 * (1.0 + m.cos_delta);
        let b = 0.5 * (1.0 - m.cos_delta);
        let z = Complex64::new(a, 0.0) + Complex64::from_polar(b, 2.0 * m.eps * t);
        let lg = z.ln();
        if let Some(p) = prev_arg {
            if (lg.im - p).abs() > PI {
                crossing = true;
            }
        }
        prev_arg = Some(lg.im);
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        total += lg * w;
    }
    IsingValue {
        f: -total * (h / (2.0 * PI)),
        branch_crossing: crossing,
    }
}

impl DynamicalFreeEnergy for IsingQuench {
    fn eval(&self, t: f64) -> Complex64 {
        ising_f(self, t).f
    }
}

/// `f(t) = -Σₙ iⁿ 𝔢ₙ tⁿ/n!` truncated at the given cumulants.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulantTruncation {
    cumulants: Vec<f64>,
}

impl CumulantTruncation {
    /// `cumulants[0]` is 𝔢₁.
    pub fn new(cumulants: Vec<f64>) -> Self {
        Self { cumulants }
    }

    /// Purely Gaussian overlap `f = 𝔢₂ t²/2`.
    pub fn gaussian(e2: f64) -> Self {
        Self::new(vec![0.0, e2])
    }

    pub fn cumulants(&self) -> &[f64] {
        &self.cumulants
    }
}

impl DynamicalFreeEnergy for CumulantTruncation {
    fn eval(&self, t: f64) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for (n, e) in self.cumulants.iter().enumerate() {
            term *= Complex64::new(0.0, t / (n + 1) as f64);
            total -= term * *e;
        }
        total
    }
}

/// `f` given by samples on `0 = t₀ < t₁ < …`, interpolated by a natural
/// cubic spline in each of the real and imaginary parts and extended to
/// negative times by conjugation.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    times: Vec<f64>,
    values: Vec<Complex64>,
    second: Vec<Complex64>,
}

impl Tabulated {
    pub fn from_samples(times: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        let n = times.len();
        if n != values.len() || n < 3 {
            return Err(Error::Invalid(alloc::format!(
                "tabulated f needs >= 3 matching samples ({} times, {} values)",
                n,
                values.len()
            )));
        }
        if times[0] != 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invalid(
                "tabulated f times must start at 0 and increase strictly".into(),
            ));
        }
        // tridiagonal solve for the natural spline second derivatives
        let mut second = vec![Complex64::new(0.0, 0.0); n];
        let mut c = vec![0.0; n];
        let mut r = vec![Complex64::new(0.0, 0.0); n];
        for i in 1..n - 1 {
            let h0 = times[i] - times[i - 1];
            let h1 = times[i + 1] - times[i];
            let rhs = ((values[i + 1] - values[i]) / h1 - (values[i] - values[i - 1]) / h0) * 6.0;
            let diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
            c[i] = h1 / diag;
            r[i] = (rhs - r[i - 1] * h0) / diag;
        }
        for i in (1..n - 1).rev() {
            second[i] = r[i] - second[i + 1] * c[i];
        }
        Ok(Self {
            times,
            values,
            second,
        })
    }

    /// Samples `f` on `[0, t_max]` at `n` equally spaced points.
    pub fn from_fn<F: DynamicalFreeEnergy>(f: &F, t_max: f64, n: usize) -> Result<Self> {
        if !(t_max > 0.0) {
            return domain("t_max", t_max, "(0, inf)");
        }
        let n = n.max(3);
        let times: Vec<f64> = (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect();
        let values = times.iter().map(|&t| f.eval(t)).collect();
        Self::from_samples(times, values)
    }

    pub fn t_max(&self) -> f64 {
        *self.times.last().unwrap()
    }
}

impl DynamicalFreeEnergy for Tabulated {
    fn eval(&self, t: f64) -> Complex64 {
        if t < 0.0 {
            return self.eval(-t).conj();
        }
        let n = self.times.len();
        let i = self.times.partition_point(|&x| x <= t).clamp(1, n - 1) - 1;
        let (x0, x1) = (self.times[i], self.times[i + 1]);
        let h = x1 - x0;
        let a = (x1 - t) / h;
        let b = (t - x0) / h;
        self.values[i] * a
            + self.values[i + 1] * b
            + (self.second[i] * (a * a * a - a) + self.second[i + 1] * (b * b * b - b))
                * (h * h / 6.0)
    }
}

/// Second derivative of `Re f` at 0 by Ridders–Richardson extrapolation of
/// `2 Re f(h)/h²`.
pub fn second_cumulant_from_f<F: DynamicalFreeEnergy + ?Sized>(f: &F) -> Result<f64> {
    const CON: f64 = 1.4;
    const CON2: f64 = CON * CON;
    const NTAB: usize = 12;
    let quotient = |h: f64| 2.0 * f.eval(h).re / (h * h);

    let mut h = 1.0;
    for _ in 0..60 {
        if f.eval(h).norm() <= 1e-3 {
            break;
        }
        h *= 0.5;
    }
    let mut table = [[0.0f64; NTAB]; NTAB];
    table[0][0] = quotient(h);
    let mut best = table[0][0];
    let mut err = f64::INFINITY;
    for i in 1..NTAB {
        h /= CON;
        table[0][i] = quotient(h);
        let mut fac = CON2;
        for j in 1..=i {
            table[j][i] = (table[j - 1][i] * fac - table[j - 1][i - 1]) / (fac - 1.0);
            fac *= CON2;
            let e = (table[j][i] - table[j - 1][i])
                .abs()
                .max((table[j][i] - table[j - 1][i - 1]).abs());
            if e <= err {
                err = e;
                best = table[j][i];
            }
        }
        if (table[i][i] - table[i - 1][i - 1]).abs() >= 2.0 * err {
            break;
        }
    }
    if !best.is_finite() || err > 1e-6 * best.abs().max(1e-300) {
        return Err(Error::Accuracy {
            achieved: err,
            target: 1e-6 * best.abs(),
        });
    }
    Ok(best)
}

/// Integration scheme for the moment integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Tensor Gauss–Legendre up to α = 4, Monte Carlo beyond.
    #[default]
    Auto,
    Grid,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentOptions {
    pub scheme: Scheme,
    pub seed: u64,
    /// Target relative error of the grid scheme.
    pub rel_tol: f64,
    /// Initial Gauss–Legendre points per panel.
    pub points_per_panel: usize,
    /// Total Monte Carlo samples.
    pub mc_samples: usize,
}

impl Default for MomentOptions {
    fn default() -> Self {
        Self {
            scheme: Scheme::Auto,
            seed: 0,
            rel_tol: 1e-7,
            points_per_panel: 16,
            mc_samples: 1 << 22,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub value: f64,
    /// Quadrature error estimate (grid) or one standard error (Monte Carlo).
    pub error: f64,
    /// Integral of the imaginary part, zero up to numerical error.
    pub imag: f64,
}

pub const MAX_GRID_ORDER: u32 = 4;
pub const MAX_ORDER: u32 = 6;
const CHEBYSHEV_TOL: f64 = 1e-15;

/// `tr ρ̄ᵗ^α = t^{-α} ∫_{[0,t]^α} exp(-L^d Σ_j f(τ_j - τ_{j+1}))`, cyclic in j.
///
/// Translation invariance removes one variable; ordering the remaining times
/// turns the cube into `(α-1)!` copies of a simplex weighted by the free
/// length `1 - Σu`, which a Duffy map sends back to the unit cube. Panels are
/// graded towards the diagonal on the scale `1/(t √(L^d 𝔢₂))`.
pub fn moments_quadrature<F: DynamicalFreeEnergy + ?Sized>(
    f: &F,
    l: u64,
    d: u32,
    t: f64,
    alpha: u32,
    opts: &MomentOptions,
) -> Result<MomentEstimate> {
    if !(t > 0.0) || !t.is_finite() {
        return domain("t", t, "(0, inf)");
    }
    if !(2..=MAX_ORDER).contains(&alpha) {
        return domain("alpha", alpha as f64, "integers in [2, 6]");
    }
    if l == 0 || d == 0 {
        return domain("L^d", 0.0, "positive");
    }
    let scheme = match opts.scheme {
        Scheme::Auto if alpha <= MAX_GRID_ORDER => Scheme::Grid,
        Scheme::Auto => Scheme::MonteCarlo,
        Scheme::Grid if alpha > MAX_GRID_ORDER => {
            return domain(
                "alpha",
                alpha as f64,
                "integers in [2, 4] for the grid scheme",
            )
        }
        s => s,
    };
    let volume = (l as f64).powi(d as i32);
    let series = ChebyshevSeries::fit(|u| f.eval(u), 0.0, t, CHEBYSHEV_TOL)?;
    let e2 = second_cumulant_from_f(&|u: f64| series.eval(u.abs())).unwrap_or(1.0);
    let width = 1.0 / (t * (volume * e2.abs().max(1e-300)).sqrt());
    let integrand = CyclicIntegrand::new(&series, volume, t, alpha);
    let edges = graded_edges(width);
    match scheme {
        Scheme::MonteCarlo => Ok(integrand.monte_carlo(&edges, opts)),
        _ => integrand.grid(&edges, opts),
    }
}

/// Rényi entropy `log(tr ρ̄ᵗ^α)/(1-α)` with its propagated error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenyiEstimate {
    pub value: f64,
    pub error: f64,
    pub moment: MomentEstimate,
}

pub fn renyi_quadrature<F: DynamicalFreeEnergy + ?Sized>(
    f: &F,
    l: u64,
    d: u32,
    t: f64,
    alpha: u32,
    opts: &MomentOptions,
) -> Result<RenyiEstimate> {
    let moment = moments_quadrature(f, l, d, t, alpha, opts)?;
    if !(moment.value > 0.0) {
        return Err(Error::Accuracy {
            achieved: moment.error,
            target: moment.value.abs(),
        });
    }
    let k = 1.0 - alpha as f64;
    Ok(RenyiEstimate {
        value: moment.value.ln() / k,
        error: moment.error / (moment.value * k.abs()),
        moment,
    })
}

struct CyclicIntegrand<'a> {
    series: &'a ChebyshevSeries,
    volume: f64,
    t: f64,
    alpha: u32,
    dim: usize,
    // slot of each label (label 0 sits in slot 0) for every ordering
    perms: Vec<Vec<usize>>,
}

impl<'a> CyclicIntegrand<'a> {
    fn new(series: &'a ChebyshevSeries, volume: f64, t: f64, alpha: u32) -> Self {
        let dim = (alpha - 1) as usize;
        let mut perms = Vec::new();
        let mut current: Vec<usize> = (1..=dim).collect();
        permutations(&mut current, 0, &mut perms);
        let perms = perms
            .into_iter()
            .map(|p| {
                let mut slots = vec![0usize];
                slots.extend(p);
                slots
            })
            .collect();
        Self {
            series,
            volume,
            t,
            alpha,
            dim,
            perms,
        }
    }

    // Value at a point of the unit cube (real and imaginary parts), including
    // the Duffy Jacobian and the free-length weight.
    fn at(&self, x: &[f64], slots: &mut [f64], pair: &mut [Complex64]) -> (f64, f64) {
        let m = self.dim;
        let mut rest = 1.0;
        let mut jac = 1.0;
        let mut pos = 0.0;
        slots[0] = 0.0;
        for (k, &xk) in x.iter().enumerate() {
            pos += xk * rest;
            slots[k + 1] = pos;
            jac *= (1.0 - xk).powi((m - k - 1) as i32);
            rest *= 1.0 - xk;
        }
        let free = rest;
        let n = m + 1;
        for a in 0..n {
            for b in (a + 1)..n {
                pair[a * n + b] = self.series.eval(self.t * (slots[b] - slots[a]));
            }
        }
        let mut re = 0.0;
        let mut im = 0.0;
        for p in &self.perms {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                let (sa, sb) = (p[j], p[(j + 1) % n]);
                // f(τ_a - τ_b) with τ_a < τ_b is conj f(τ_b - τ_a)
                s += if sa < sb {
                    pair[sa * n + sb].conj()
                } else {
                    pair[sb * n + sa]
                };
            }
            let z = (-s * self.volume).exp();
            re += z.re;
            im += z.im;
        }
        let w = self.alpha as f64 * jac * free;
        (w * re, w * im)
    }

    fn grid_sum(&self, edges: &[f64], points: usize) -> (f64, f64) {
        let (xs, ws) = GaussLegendre::new(points).composite(edges);
        let m = self.dim;
        let npts = xs.len();
        let mut idx = vec![0usize; m];
        let mut x = vec![0.0; m];
        let mut slots = vec![0.0; m + 1];
        let mut pair = vec![Complex64::new(0.0, 0.0); (m + 1) * (m + 1)];
        let (mut re, mut im) = (0.0, 0.0);
        loop {
            let mut w = 1.0;
            for k in 0..m {
                x[k] = xs[idx[k]];
                w *= ws[idx[k]];
            }
            let (a, b) = self.at(&x, &mut slots, &mut pair);
            re += w * a;
            im += w * b;
            let mut k = 0;
            loop {
                if k == m {
                    return (re, im);
                }
                idx[k] += 1;
                if idx[k] < npts {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    fn grid(&self, edges: &[f64], opts: &MomentOptions) -> Result<MomentEstimate> {
        let max_points = match self.dim {
            1 => 96,
            2 => 64,
            _ => 40,
        };
        let mut n = opts.points_per_panel.clamp(4, max_points);
        let mut coarse = self.grid_sum(edges, n);
        loop {
            let next = n + 8;
            let fine = self.grid_sum(edges, next);
            let err = (fine.0 - coarse.0).abs();
            if err <= opts.rel_tol * fine.0.abs() || next >= max_points {
                if err > opts.rel_tol * fine.0.abs() {
                    return Err(Error::Accuracy {
                        achieved: err / fine.0.abs(),
                        target: opts.rel_tol,
                    });
                }
                return Ok(MomentEstimate {
                    value: fine.0,
                    error: err,
                    imag: fine.1,
                });
            }
            n = next;
            coarse = fine;
        }
    }

    fn monte_carlo(&self, edges: &[f64], opts: &MomentOptions) -> MomentEstimate {
        let m = self.dim;
        let panels = edges.len() - 1;
        let cells = panels.pow(m as u32);
        let pairs_per_cell = (opts.mc_samples / (2 * cells)).max(2);
        let mut idx = vec![0usize; m];
        let mut x = vec![0.0; m];
        let mut y = vec![0.0; m];
        let mut slots = vec![0.0; m + 1];
        let mut pair = vec![Complex64::new(0.0, 0.0); (m + 1) * (m + 1)];
        let (mut value, mut var, mut imag) = (0.0, 0.0, 0.0);
        for cell in 0..cells {
            let mut c = cell;
            let mut vol = 1.0;
            for k in 0..m {
                idx[k] = c % panels;
                c /= panels;
                vol *= edges[idx[k] + 1] - edges[idx[k]];
            }
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(cell as u64);
            let (mut sum, mut sum2, mut isum) = (0.0, 0.0, 0.0);
            for _ in 0..pairs_per_cell {
                for k in 0..m {
                    let (a, b) = (edges[idx[k]], edges[idx[k] + 1]);
                    x[k] = a + (b - a) * uniform_open01(&mut rng);
                    y[k] = a + b - x[k];
                }
                let (r1, i1) = self.at(&x, &mut slots, &mut pair);
                let (r2, i2) = self.at(&y, &mut slots, &mut pair);
                let v = 0.5 * (r1 + r2);
                sum += v;
                sum2 += v * v;
                isum += 0.5 * (i1 + i2);
            }
            let n = pairs_per_cell as f64;
            let mean = sum / n;
            let s2 = ((sum2 - n * mean * mean) / (n - 1.0)).max(0.0);
            value += vol * mean;
            var += vol * vol * s2 / n;
            imag += vol * isum / n;
        }
        MomentEstimate {
            value,
            error: var.sqrt(),
            imag,
        }
    }
}

fn permutations(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == items.len() {
        out.push(items.clone());
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations(items, k + 1, out);
        items.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::{moment_asymptotic, moment_correction, CumulantSeries};
    use crate::special::erf;
    use approx::assert_relative_eq;

    fn quench(h_i: InitialField, h_f: f64) -> IsingQuench {
        IsingQuench::new(h_i, h_f, 1.0, DEFAULT_K_GRID).unwrap()
    }

    fn gaussian_purity(le2: f64, t: f64) -> f64 {
        let s = le2.sqrt() * t;
        PI.sqrt() * erf(s) / s - (1.0 - (-s * s).exp()) / (s * s)
    }

    #[test]
    fn dispersion_examples() {
        let q = quench(InitialField::Finite(0.7), 0.7);
        for i in 0..50 {
            let k = PI * i as f64 / 49.0;
            assert!((ising_dispersion(&q, k).cos_delta - 1.0).abs() < 1e-14);
        }
        let q = quench(InitialField::Infinite, 0.0);
        assert_relative_eq!(
            ising_dispersion(&q, PI / 2.0).eps,
            2.0,
            max_relative = 1e-15
        );
        let q = quench(InitialField::Infinite, 1.0);
        assert!(ising_dispersion(&q, 0.0).singular);
        assert!(!ising_dispersion(&q, 0.3).singular);
    }

    #[test]
    fn ising_f_examples() {
        let q = quench(InitialField::Infinite, 1.5);
        assert!(ising_f(&q, 0.0).f.norm() < 1e-16);
        let same = quench(InitialField::Finite(0.4), 0.4);
        assert!(ising_f(&same, 1.3).f.norm() < 1e-14);
        for i in 0..=40 {
            let t = 2.0 * i as f64 / 40.0;
            assert!(ising_f(&q, t).f.re >= -1e-15);
        }
    }

    #[test]
    fn ising_second_cumulant_from_infinite_field_is_j_squared() {
        let q = IsingQuench::new(InitialField::Infinite, 1.5, 0.8, 512).unwrap();
        assert_relative_eq!(q.second_cumulant(), 0.64, max_relative = 1e-13);
    }

    #[test]
    fn second_cumulant_examples() {
        let quad = |t: f64| Complex64::new(0.35 * t * t, 0.0);
        assert!((second_cumulant_from_f(&quad).unwrap() - 0.7).abs() < 1e-8);
        let trunc = CumulantTruncation::new(vec![0.3, 0.7, -0.2, 0.1]);
        assert!((second_cumulant_from_f(&trunc).unwrap() - 0.7).abs() < 1e-8);
        let q = quench(InitialField::Infinite, 1.5);
        assert!((second_cumulant_from_f(&q).unwrap() - q.second_cumulant()).abs() < 1e-8);
        let q = quench(InitialField::Finite(0.3), 1.2);
        assert!((second_cumulant_from_f(&q).unwrap() - q.second_cumulant()).abs() < 1e-8);
    }

    #[test]
    fn cumulant_truncation_is_hermitian() {
        let f = CumulantTruncation::new(vec![0.3, 0.7, -0.2, 0.1]);
        assert_eq!(f.eval(0.0), Complex64::new(0.0, 0.0));
        let (a, b) = (f.eval(0.6), f.eval(-0.6));
        assert!((a - b.conj()).norm() < 1e-15);
        assert_relative_eq!(a.im, -0.3 * 0.6 - 0.2 * 0.216 / 6.0, max_relative = 1e-14);
    }

    #[test]
    fn tabulated_spline_follows_smooth_f() {
        let q = quench(InitialField::Infinite, 1.5);
        let tab = Tabulated::from_fn(&q, 1.0, 401).unwrap();
        for i in 0..30 {
            let t = 0.033 * i as f64;
            assert!((tab.eval(t) - q.eval(t)).norm() < 1e-7);
            assert!((tab.eval(-t) - q.eval(t).conj()).norm() < 1e-7);
        }
    }

    #[test]
    fn purity_matches_gaussian_closed_form() {
        let f = CumulantTruncation::gaussian(1.3);
        let opts = MomentOptions::default();
        for &(l, t) in &[(1u64, 0.7), (10, 1.0), (400, 0.4), (10_000, 2.0)] {
            let est = moments_quadrature(&f, l, 1, t, 2, &opts).unwrap();
            let exact = gaussian_purity(1.3 * l as f64, t);
            assert!(
                (est.value - exact).abs() < 1e-8,
                "L = {l}: {} vs {exact}",
                est.value
            );
            assert!(est.imag.abs() < 1e-12);
        }
    }

    #[test]
    fn third_moment_matches_corrected_asymptotics() {
        let f = CumulantTruncation::gaussian(1.0);
        let est = moments_quadrature(&f, 10_000, 1, 1.0, 3, &MomentOptions::default()).unwrap();
        let cs = CumulantSeries::gaussian(1.0, 10_000, 1).unwrap();
        let predicted =
            moment_asymptotic(&cs, 1.0, 3.0).unwrap() + moment_correction(&cs, 1.0, 3, 0).unwrap();
        assert!((est.value - predicted).abs() / predicted < 1e-3);
    }

    #[test]
    fn grid_and_monte_carlo_agree_for_alpha_three() {
        let f = CumulantTruncation::new(vec![0.2, 1.1, 0.3, 0.05]);
        let grid = moments_quadrature(
            &f,
            30,
            1,
            0.8,
            3,
            &MomentOptions {
                scheme: Scheme::Grid,
                ..Default::default()
            },
        )
        .unwrap();
        let mc = moments_quadrature(
            &f,
            30,
            1,
            0.8,
            3,
            &MomentOptions {
                scheme: Scheme::MonteCarlo,
                seed: 5,
                mc_samples: 1 << 17,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(
            (grid.value - mc.value).abs() < 3.0 * (grid.error.powi(2) + mc.error.powi(2)).sqrt()
        );
    }

    #[test]
    fn renyi_quadrature_round_trip() {
        let f = CumulantTruncation::gaussian(0.9);
        let r = renyi_quadrature(&f, 50, 1, 1.1, 3, &MomentOptions::default()).unwrap();
        assert_relative_eq!((-2.0 * r.value).exp(), r.moment.value, max_relative = 1e-12);
    }

    #[test]
    fn argument_checks() {
        let f = CumulantTruncation::gaussian(1.0);
        let opts = MomentOptions::default();
        assert!(moments_quadrature(&f, 10, 1, 1.0, 1, &opts).is_err());
        assert!(moments_quadrature(&f, 10, 1, 0.0, 2, &opts).is_err());
        let grid5 = MomentOptions {
            scheme: Scheme::Grid,
            ..opts
        };
        assert!(moments_quadrature(&f, 10, 1, 1.0, 5, &grid5).is_err());
        assert!(IsingQuench::new(InitialField::Infinite, 1.5, 1.0, 10).is_err());
        assert!(IsingQuench::new(InitialField::Infinite, 1.5, -1.0, 100).is_err());
    }
}
