use alloc::vec;
use alloc::vec::Vec;

use faer::{c64, Mat, Side};
use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use super::spectrum::Level;
use crate::asymptotics::WeightFunction;
use crate::error::{domain, Error, Result};
use crate::quad::GaussLegendre;
use crate::special::erf_inv;

/// Below this `|Δ| t` the uniform kernel uses its Taylor expansion.
pub const KERNEL_TAYLOR_CUTOFF: f64 = 1e-9;
/// Eigenvalues in `[-CLAMP, 0)` are set to zero.
pub const EIGENVALUE_CLAMP: f64 = 1e-12;

const WEIGHT_NODES: usize = 16;
const WEIGHT_PANEL_PHASE: f64 = 2.0;

/// `K(Δ) = (1/t) ∫₀ᵗ e^{-iΔτ} dτ`.
pub fn uniform_kernel(delta: f64, t: f64) -> Complex64 {
    let x = delta * t;
    if x.abs() < KERNEL_TAYLOR_CUTOFF {
        Complex64::new(1.0 - x * x / 6.0, -0.5 * x)
    } else {
        (Complex64::from_polar(1.0, -x) - 1.0) / Complex64::new(0.0, -x)
    }
}

/// Spectrum of a time-averaged state, expressed in the basis of the energy
/// levels the initial state occupies.
#[derive(Debug, Clone)]
pub struct AveragedState {
    t0: f64,
    t: f64,
    eigenvalues: Vec<f64>,
    cumulative: Vec<f64>,
    vectors: Mat<c64>,
    amplitudes: Vec<f64>,
    energies: Vec<f64>,
}

/// `ρ̄ = ∫ ℘(τ - t₀) |Ψ_τ⟩⟨Ψ_τ| dτ` over `[t₀, t₀ + t]`, uniform when
/// `weight` is `None`.
pub fn averaged_state(
    levels: &[Level],
    t0: f64,
    t: f64,
    weight: Option<&WeightFunction>,
) -> Result<AveragedState> {
    if !(t > 0.0) || !t.is_finite() {
        return domain("t", t, "(0, inf)");
    }
    if !t0.is_finite() {
        return domain("t0", t0, "finite reals");
    }
    if let Some(w) = weight {
        if (w.t() - t).abs() > 1e-12 * t {
            return Err(Error::Invalid(alloc::format!(
                "weight window {} differs from t = {t}",
                w.t()
            )));
        }
    }
    let n = levels.len();
    if n == 0 {
        return Err(Error::Invalid("no occupied energy levels".into()));
    }
    let energies: Vec<f64> = levels.iter().map(|l| l.energy).collect();
    let amplitudes: Vec<f64> = levels.iter().map(|l| l.weight).collect();

    let m = match weight {
        None => Mat::<c64>::from_fn(n, n, |i, j| {
            let delta = energies[i] - energies[j];
            Complex64::from_polar(amplitudes[i] * amplitudes[j], -delta * t0)
                * uniform_kernel(delta, t)
        }),
        Some(w) => weighted_matrix(&energies, &amplitudes, t0, w),
    };
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::Eigensolver)?;
    let ascending: Vec<f64> = evd.S().column_vector().iter().map(|z| z.re).collect();
    let u = evd.U();
    let mut eigenvalues = Vec::with_capacity(n);
    let mut vectors = Mat::<c64>::zeros(n, n);
    for (k, j) in (0..n).rev().enumerate() {
        let mut lam = ascending[j];
        if (-EIGENVALUE_CLAMP..0.0).contains(&lam) {
            lam = 0.0;
        }
        eigenvalues.push(lam);
        for i in 0..n {
            vectors[(i, k)] = u[(i, j)];
        }
    }
    let mut cumulative = Vec::with_capacity(n);
    let mut acc = 0.0;
    for &l in &eigenvalues {
        acc += l;
        cumulative.push(acc);
    }
    Ok(AveragedState {
        t0,
        t,
        eigenvalues,
        cumulative,
        vectors,
        amplitudes,
        energies,
    })
}

fn weighted_matrix(energies: &[f64], amplitudes: &[f64], t0: f64, w: &WeightFunction) -> Mat<c64> {
    let spread = energies.last().unwrap() - energies.first().unwrap();
    let rule = GaussLegendre::new(WEIGHT_NODES);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for seg in w.breakpoints().windows(2) {
        let len = seg[1] - seg[0];
        let panels = ((spread * len / WEIGHT_PANEL_PHASE).ceil() as usize).max(1);
        let h = len / panels as f64;
        for p in 0..panels {
            let a = seg[0] + p as f64 * h;
            for (x, q) in rule.mapped(a, a + h) {
                let v = w.eval(x) * q;
                if v > 0.0 {
                    nodes.push(x);
                    weights.push(v.sqrt());
                }
            }
        }
    }
    let n = energies.len();
    let a = Mat::<c64>::from_fn(n, nodes.len(), |i, q| {
        Complex64::from_polar(amplitudes[i] * weights[q], -energies[i] * (t0 + nodes[q]))
    });
    &a * a.adjoint()
}

impl AveragedState {
    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Nonzero part of the spectrum, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Prefix sums of [`Self::eigenvalues`].
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn trace(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn moment(&self, alpha: f64) -> f64 {
        self.eigenvalues
            .iter()
            .filter(|&&l| l > 0.0)
            .map(|l| l.powf(alpha))
            .sum()
    }

    pub fn effective_rank(&self, eps: f64) -> Result<RankResult> {
        effective_rank(&self.eigenvalues, eps)
    }

    /// Components `⟨v_j|Ψₜ⟩` for the leading `count` eigenvectors.
    fn components(&self, t: f64, count: usize) -> Vec<Complex64> {
        let psi: Vec<Complex64> = self
            .energies
            .iter()
            .zip(&self.amplitudes)
            .map(|(&e, &a)| Complex64::from_polar(a, -e * t))
            .collect();
        (0..count.min(self.eigenvalues.len()))
            .map(|j| {
                let col = self.vectors.col(j);
                psi.iter().enumerate().map(|(i, p)| col[i].conj() * p).sum()
            })
            .collect()
    }

    /// `1 - ⟨Ψₜ|P_k|Ψₜ⟩` for `k = rank - 1, rank, rank + 1`.
    pub fn projection_error(&self, rank: usize, t: f64) -> ProjectionError {
        let total: f64 = self.amplitudes.iter().map(|a| a * a).sum();
        let comps = self.components(t, rank + 1);
        let captured =
            |k: usize| -> f64 { comps.iter().take(k).map(|c| c.norm_sqr()).sum::<f64>() };
        let err = |k: usize| (total - captured(k)).clamp(0.0, 1.0);
        ProjectionError {
            t,
            rank,
            error: err(rank),
            upper: err(rank.saturating_sub(1)),
            lower: err(rank + 1),
        }
    }

    /// Projector onto the leading `rank` eigenvectors, in the level basis.
    pub fn projector(&self, rank: usize) -> Mat<c64> {
        let n = self.eigenvalues.len();
        let k = rank.min(n);
        let v = self.vectors.subcols(0, k);
        v * v.adjoint()
    }

    /// `ρ̄` in the level basis.
    pub fn level_matrix(&self) -> Mat<c64> {
        let n = self.eigenvalues.len();
        Mat::<c64>::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| self.vectors[(i, k)] * self.eigenvalues[k] * self.vectors[(j, k)].conj())
                .sum()
        })
    }

    /// `ρ̄` in the computational basis.
    pub fn operator(&self, levels: &[Level]) -> Mat<c64> {
        let dim = levels[0].direction.len();
        let v = Mat::<c64>::from_fn(dim, levels.len(), |b, i| levels[i].direction[b]);
        let m = self.level_matrix();
        &v * &m * v.adjoint()
    }
}

/// Result of truncating a spectrum at tail mass `eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankResult {
    pub rank: usize,
    /// Probability actually discarded (at most `eps`).
    pub discarded: f64,
    /// Smallest retained eigenvalue.
    pub lambda_cut: f64,
}

/// Smallest number of leading eigenvalues whose complement has mass `≤ eps`.
/// `eigenvalues` must be sorted in descending order.
pub fn effective_rank(eigenvalues: &[f64], eps: f64) -> Result<RankResult> {
    if !(0.0..1.0).contains(&eps) {
        return domain("eps", eps, "[0, 1)");
    }
    let limit = eps * (1.0 + 1e-12);
    let mut rank = eigenvalues.len();
    let mut tail = 0.0;
    while rank > 0 {
        let lam = eigenvalues[rank - 1].max(0.0);
        if tail + lam > limit {
            break;
        }
        tail += lam;
        rank -= 1;
    }
    Ok(RankResult {
        rank,
        discarded: tail,
        lambda_cut: if rank > 0 { eigenvalues[rank - 1] } else { 0.0 },
    })
}

/// Projection error with its quantisation band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionError {
    pub t: f64,
    pub rank: usize,
    pub error: f64,
    /// Error with one eigenvector fewer.
    pub upper: f64,
    /// Error with one eigenvector more.
    pub lower: f64,
}

/// Projection errors over `times` for the subspace retained from the average
/// over `[0, window]` at tail mass `eps`.
pub fn projection_errors(
    levels: &[Level],
    window: f64,
    eps: f64,
    times: &[f64],
) -> Result<Vec<ProjectionError>> {
    let state = averaged_state(levels, 0.0, window, None)?;
    let rank = state.effective_rank(eps)?.rank;
    Ok(times
        .iter()
        .map(|&t| state.projection_error(rank, t))
        .collect())
}

/// One point of a rank curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankPoint {
    pub t: f64,
    pub eps: f64,
    pub rank: usize,
    /// `D/√L`.
    pub rank_per_sqrt_l: f64,
    /// Leading prediction `(√(2𝔢₂)/π) erf⁻¹(1-ε) t`, also per `√L`.
    pub prediction_per_sqrt_l: f64,
}

/// Effective rank of the uniform average over `[0, t]` for each `t` in
/// `times`, with truncation error `schedule(t)`.
pub fn rank_curve<S: Fn(f64) -> f64>(
    levels: &[Level],
    l: usize,
    e2: f64,
    schedule: S,
    times: &[f64],
) -> Result<Vec<RankPoint>> {
    let sqrt_l = (l as f64).sqrt();
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let eps = schedule(t);
        if !(eps > 0.0 && eps < 1.0) {
            return domain("eps(t)", eps, "(0, 1)");
        }
        let state = averaged_state(levels, 0.0, t, None)?;
        let rank = state.effective_rank(eps)?.rank;
        out.push(RankPoint {
            t,
            eps,
            rank,
            rank_per_sqrt_l: rank as f64 / sqrt_l,
            prediction_per_sqrt_l: (2.0 * e2).sqrt() / core::f64::consts::PI
                * erf_inv(1.0 - eps)?
                * t,
        });
    }
    Ok(out)
}

/// Reference `ρ̄` from a midpoint Riemann sum of `|Ψ_τ⟩⟨Ψ_τ|` over
/// `slices` sub-intervals, in the computational basis.
pub fn riemann_average(levels: &[Level], t0: f64, t: f64, slices: usize) -> Mat<c64> {
    let dim = levels[0].direction.len();
    let mut rho = Mat::<c64>::zeros(dim, dim);
    let h = t / slices as f64;
    let mut psi = vec![Complex64::new(0.0, 0.0); dim];
    for s in 0..slices {
        let tau = t0 + (s as f64 + 0.5) * h;
        psi.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for lv in levels {
            let c = Complex64::from_polar(lv.weight, -lv.energy * tau);
            for (p, d) in psi.iter_mut().zip(&lv.direction) {
                *p += c * d;
            }
        }
        for j in 0..dim {
            let cj = psi[j].conj() / slices as f64;
            for i in 0..dim {
                rho[(i, j)] += psi[i] * cj;
            }
        }
    }
    rho
}

/// Largest singular value of a Hermitian matrix difference.
pub fn hermitian_norm(m: &Mat<c64>) -> Result<f64> {
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::Eigensolver)?;
    Ok(evd
        .S()
        .column_vector()
        .iter()
        .fold(0.0f64, |acc, z| acc.max(z.re.abs())))
}
