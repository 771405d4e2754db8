use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use super::pauli::PauliHamiltonian;
use super::spectrum::SpectralDecomposition;
use crate::error::{domain, Error, Result};

/// Highest cumulant order computed.
pub const MAX_CUMULANT_ORDER: usize = 8;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn check_order(n_max: usize) -> Result<()> {
    if n_max == 0 || n_max > MAX_CUMULANT_ORDER {
        return domain("n_max", n_max as f64, "[1, 8]");
    }
    Ok(())
}

/// Cumulants `κ₁..κ_{n}` from raw moments `m₀ = 1, m₁, …, m_n`.
pub fn cumulants_from_moments(moments: &[f64]) -> Vec<f64> {
    let n_max = moments.len().saturating_sub(1);
    let mut kappa = vec![0.0; n_max + 1];
    for n in 1..=n_max {
        let mut k = moments[n];
        for j in 1..n {
            k -= binomial(n - 1, j - 1) * kappa[j] * moments[n - j];
        }
        kappa[n] = k;
    }
    kappa.remove(0);
    kappa
}

/// Per-site cumulants `𝔢₁..𝔢_{n_max}` of the energy distribution
/// `{E_n, |c_n|²}`, divided by `volume`.
pub fn energy_cumulants(sd: &SpectralDecomposition, volume: f64, n_max: usize) -> Result<Vec<f64>> {
    check_order(n_max)?;
    let probs: Vec<f64> = sd.overlaps().iter().map(|c| c.norm_sqr()).collect();
    let mean: f64 = probs.iter().zip(sd.energies()).map(|(p, e)| p * e).sum();
    // central moments keep the recursion well conditioned
    let mut central = vec![0.0; n_max + 1];
    for (p, e) in probs.iter().zip(sd.energies()) {
        let d = e - mean;
        let mut pow = *p;
        for m in central.iter_mut() {
            *m += pow;
            pow *= d;
        }
    }
    if central.iter().any(|m| !m.is_finite()) {
        return Err(Error::Invalid("energy moments overflow".into()));
    }
    let mut kappa = cumulants_from_moments(&central);
    kappa[0] = mean;
    Ok(kappa.into_iter().map(|k| k / volume).collect())
}

/// Raw moments `⟨H^k⟩`, `k = 0..=k_max`, and the vectors `H^k ψ`.
pub fn power_moments(
    h: &PauliHamiltonian,
    psi: &[Complex64],
    k_max: usize,
) -> Result<(Vec<f64>, Vec<Vec<Complex64>>)> {
    if psi.len() != h.dim() {
        return Err(Error::Invalid(alloc::format!(
            "state has dimension {}, Hamiltonian {}",
            psi.len(),
            h.dim()
        )));
    }
    if !h.norm_bound().powi(k_max as i32 + 1).is_finite() {
        return Err(Error::Invalid("Hamiltonian powers overflow".into()));
    }
    let mut vectors = vec![psi.to_vec()];
    for k in 1..=k_max {
        let mut next = vec![Complex64::new(0.0, 0.0); psi.len()];
        h.apply(&vectors[k - 1], &mut next);
        vectors.push(next);
    }
    let moments = vectors
        .iter()
        .map(|v| psi.iter().zip(v).map(|(a, b)| (a.conj() * b).re).sum())
        .collect();
    Ok((moments, vectors))
}

/// Coefficients `a_k` with `H^{(n)} = Σ_k a_k H^k`, built from
/// `H^{(1)} = H` and `H^{(n)} = H^n - Σ_{j<n} C(n,j) ⟨H^{n-j}⟩ H^{(j)}`.
/// `moments[k]` must hold `⟨H^k⟩` for `k < n`.
pub fn build_hn(n: usize, moments: &[f64]) -> Vec<f64> {
    assert!(n >= 1 && moments.len() >= n);
    let mut polys: Vec<Vec<f64>> = vec![Vec::new(), vec![0.0, 1.0]];
    for m in 2..=n {
        let mut p = vec![0.0; m + 1];
        p[m] = 1.0;
        for (j, pj) in polys.iter().enumerate().take(m).skip(1) {
            let c = binomial(m, j) * moments[m - j];
            for (k, a) in pj.iter().enumerate() {
                p[k] -= c * a;
            }
        }
        polys.push(p);
    }
    polys.swap_remove(n)
}

fn poly_expectation(poly: &[f64], moments: &[f64], shift: usize) -> f64 {
    poly.iter()
        .enumerate()
        .map(|(k, a)| a * moments[k + shift])
        .sum()
}

/// Per-site cumulants from `κ_{n+1} = ⟨H^{(n)} H⟩ - ⟨H^{(n)}⟩⟨H⟩`, using only
/// repeated application of `h` to the state.
pub fn energy_cumulants_from_state(
    h: &PauliHamiltonian,
    psi: &[Complex64],
    volume: f64,
    n_max: usize,
) -> Result<Vec<f64>> {
    check_order(n_max)?;
    let (moments, _) = power_moments(h, psi, n_max)?;
    let mut out = vec![moments[1] / volume];
    for n in 1..n_max {
        let poly = build_hn(n, &moments);
        let kappa = poly_expectation(&poly, &moments, 1)
            - poly_expectation(&poly, &moments, 0) * moments[1];
        out.push(kappa / volume);
    }
    Ok(out)
}

/// `𝔢ₙ(ℓ) = ⟨H^{(n-1)} h_ℓ⟩ - ⟨H^{(n-1)}⟩⟨h_ℓ⟩` (and `⟨h_ℓ⟩` for `n = 1`) for
/// every site; the values sum to `κₙ`.
pub fn cumulant_densities(h: &PauliHamiltonian, psi: &[Complex64], n: usize) -> Result<Vec<f64>> {
    check_order(n)?;
    let (moments, vectors) = power_moments(h, psi, n.max(1))?;
    let (phi, shift) = if n == 1 {
        (psi.to_vec(), 0.0)
    } else {
        let poly = build_hn(n - 1, &moments);
        let mut phi = vec![Complex64::new(0.0, 0.0); psi.len()];
        for (a, v) in poly.iter().zip(&vectors) {
            for (p, x) in phi.iter_mut().zip(v) {
                *p += x * *a;
            }
        }
        (phi, poly_expectation(&poly, &moments, 0))
    };
    let mut hpsi = vec![Complex64::new(0.0, 0.0); psi.len()];
    (0..h.l())
        .map(|site| {
            let density = h.density(site)?;
            density.apply(psi, &mut hpsi);
            let corr: f64 = phi.iter().zip(&hpsi).map(|(a, b)| (a.conj() * b).re).sum();
            let mean: f64 = psi.iter().zip(&hpsi).map(|(a, b)| (a.conj() * b).re).sum();
            Ok(if n == 1 { mean } else { corr - shift * mean })
        })
        .collect()
}

/// Single-site value of [`cumulant_densities`].
pub fn cumulant_density(
    h: &PauliHamiltonian,
    psi: &[Complex64],
    site: usize,
    n: usize,
) -> Result<f64> {
    if site >= h.l() {
        return domain("site", site as f64, "[0, L)");
    }
    Ok(cumulant_densities(h, psi, n)?[site])
}
