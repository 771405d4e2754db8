use alloc::vec;
use alloc::vec::Vec;

use faer::{c64, Mat, Side};
use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use super::pauli::{build_hamiltonian, DenseOperator, PauliHamiltonian};
use crate::error::{Error, Result};

/// Energies closer than this (relative to the spectral scale) form one level.
pub const DEGENERACY_TOL: f64 = 1e-9;
/// Levels whose squared weight falls below this are dropped.
pub const LEVEL_WEIGHT_FLOOR: f64 = 1e-28;
/// Ground-state gaps below this are reported as degenerate.
pub const GROUND_GAP_TOL: f64 = 1e-10;

/// Eigenvectors of a Hamiltonian, stored as columns.
#[derive(Debug, Clone)]
pub enum Basis {
    Real(Mat<f64>),
    Complex(Mat<c64>),
}

impl Basis {
    pub fn dim(&self) -> usize {
        match self {
            Self::Real(m) => m.nrows(),
            Self::Complex(m) => m.nrows(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match self {
            Self::Real(m) => Complex64::new(m[(i, j)], 0.0),
            Self::Complex(m) => m[(i, j)],
        }
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.dim()).map(|i| self.get(i, j)).collect()
    }

    /// `U† psi`.
    pub fn adjoint_apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        (0..n)
            .map(|j| match self {
                Self::Real(m) => {
                    let col = m.col(j);
                    (0..n).map(|i| psi[i] * col[i]).sum()
                }
                Self::Complex(m) => {
                    let col = m.col(j);
                    (0..n).map(|i| col[i].conj() * psi[i]).sum()
                }
            })
            .collect()
    }

    /// `out += coeff · column j`.
    fn axpy_column(&self, j: usize, coeff: Complex64, out: &mut [Complex64]) {
        match self {
            Self::Real(m) => {
                let col = m.col(j);
                for (o, i) in out.iter_mut().zip(0..) {
                    *o += coeff * col[i];
                }
            }
            Self::Complex(m) => {
                let col = m.col(j);
                for (o, i) in out.iter_mut().zip(0..) {
                    *o += coeff * col[i];
                }
            }
        }
    }
}

/// Full eigendecomposition, energies ascending.
pub fn diagonalize(h: &DenseOperator) -> Result<(Vec<f64>, Basis)> {
    match h {
        DenseOperator::Real(m) => {
            let evd = m
                .self_adjoint_eigen(Side::Lower)
                .map_err(|_| Error::Eigensolver)?;
            let energies = evd.S().column_vector().iter().copied().collect();
            Ok((energies, Basis::Real(evd.U().to_owned())))
        }
        DenseOperator::Complex(m) => {
            let evd = m
                .self_adjoint_eigen(Side::Lower)
                .map_err(|_| Error::Eigensolver)?;
            let energies = evd.S().column_vector().iter().map(|z| z.re).collect();
            Ok((energies, Basis::Complex(evd.U().to_owned())))
        }
    }
}

/// Lowest eigenvector with a fixed gauge.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub vector: Vec<Complex64>,
    pub energy: f64,
    /// Distance to the next eigenvalue.
    pub gap: f64,
    /// The gap is below [`GROUND_GAP_TOL`]; the vector is one choice in the
    /// lowest eigenspace.
    pub degenerate: bool,
}

/// Ground state of `h`, gauge-fixed so that its first non-negligible
/// amplitude is real and positive.
pub fn ground_state(h: &PauliHamiltonian) -> Result<GroundState> {
    let (energies, basis) = diagonalize(&build_hamiltonian(h)?)?;
    let mut vector = basis.column(0);
    fix_gauge(&mut vector);
    let gap = energies.get(1).map_or(f64::INFINITY, |e| e - energies[0]);
    Ok(GroundState {
        vector,
        energy: energies[0],
        gap,
        degenerate: gap < GROUND_GAP_TOL,
    })
}

pub(crate) fn fix_gauge(v: &mut [Complex64]) {
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(first) = v.iter().find(|z| z.norm() > 1e-10 * scale) {
        let phase = first.conj() / first.norm();
        v.iter_mut().for_each(|z| *z *= phase);
    }
}

/// Single-spin direction for product states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
    PlusX,
    MinusX,
    PlusY,
    MinusY,
}

impl Direction {
    fn spinor(self) -> [Complex64; 2] {
        let r = core::f64::consts::FRAC_1_SQRT_2;
        let c = |a: f64, b: f64| Complex64::new(a, b);
        match self {
            Self::Up => [c(1.0, 0.0), c(0.0, 0.0)],
            Self::Down => [c(0.0, 0.0), c(1.0, 0.0)],
            Self::PlusX => [c(r, 0.0), c(r, 0.0)],
            Self::MinusX => [c(r, 0.0), c(-r, 0.0)],
            Self::PlusY => [c(r, 0.0), c(0.0, r)],
            Self::MinusY => [c(r, 0.0), c(0.0, -r)],
        }
    }
}

/// `⊗_ℓ |dir_ℓ⟩`, site ℓ being bit ℓ of the basis index.
pub fn product_state(dirs: &[Direction]) -> Vec<Complex64> {
    let spinors: Vec<_> = dirs.iter().map(|d| d.spinor()).collect();
    (0..1usize << dirs.len())
        .map(|b| {
            spinors
                .iter()
                .enumerate()
                .map(|(site, s)| s[(b >> site) & 1])
                .product()
        })
        .collect()
}

/// Energy level with the component of the initial state inside it.
#[derive(Debug, Clone)]
pub struct Level {
    pub energy: f64,
    /// `‖P_E Ψ₀‖`.
    pub weight: f64,
    /// `P_E Ψ₀ / ‖P_E Ψ₀‖` in the computational basis.
    pub direction: Vec<Complex64>,
}

/// Eigensystem of a Hamiltonian with the overlaps of an initial state.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    energies: Vec<f64>,
    overlaps: Vec<Complex64>,
    basis: Basis,
}

impl SpectralDecomposition {
    pub fn new(h: &PauliHamiltonian, psi0: &[Complex64]) -> Result<Self> {
        let dense = build_hamiltonian(h)?;
        let (energies, basis) = diagonalize(&dense)?;
        Self::from_parts(energies, basis, psi0)
    }

    pub fn from_parts(energies: Vec<f64>, basis: Basis, psi0: &[Complex64]) -> Result<Self> {
        if psi0.len() != basis.dim() {
            return Err(Error::Invalid(alloc::format!(
                "state has dimension {}, Hamiltonian {}",
                psi0.len(),
                basis.dim()
            )));
        }
        let norm: f64 = psi0.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Invalid(alloc::format!(
                "initial state has squared norm {norm}"
            )));
        }
        let overlaps = basis.adjoint_apply(psi0);
        Ok(Self {
            energies,
            overlaps,
            basis,
        })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// `c_n = ⟨E_n|Ψ₀⟩`.
    pub fn overlaps(&self) -> &[Complex64] {
        &self.overlaps
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// `‖H|E_n⟩ - E_n|E_n⟩‖` for eigenvector `n`.
    pub fn residual(&self, h: &PauliHamiltonian, n: usize) -> f64 {
        let v = self.basis.column(n);
        let mut hv = vec![Complex64::new(0.0, 0.0); v.len()];
        h.apply(&v, &mut hv);
        hv.iter()
            .zip(&v)
            .map(|(a, b)| (a - b * self.energies[n]).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `|Ψₜ⟩ = e^{-iHt}|Ψ₀⟩` in the computational basis.
    pub fn evolve(&self, t: f64) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (n, (&e, &c)) in self.energies.iter().zip(&self.overlaps).enumerate() {
            if c.norm_sqr() > 0.0 {
                self.basis
                    .axpy_column(n, c * Complex64::from_polar(1.0, -e * t), &mut out);
            }
        }
        out
    }

    /// Return amplitude `⟨Ψ₀|Ψₜ⟩`.
    pub fn return_amplitude(&self, t: f64) -> Complex64 {
        self.energies
            .iter()
            .zip(&self.overlaps)
            .map(|(&e, c)| Complex64::from_polar(c.norm_sqr(), -e * t))
            .sum()
    }

    /// First `t` in `(0, t_max]` with `|⟨Ψ₀|Ψₜ⟩| < threshold`, located by a scan
    /// with step `dt` followed by bisection. `None` if the overlap stays above.
    pub fn first_overlap_below(&self, threshold: f64, dt: f64, t_max: f64) -> Result<Option<f64>> {
        if !(dt > 0.0) || !(t_max > 0.0) {
            return crate::error::domain("dt", dt, "(0, inf) with t_max > 0");
        }
        let below = |t: f64| self.return_amplitude(t).norm() < threshold;
        if below(0.0) {
            return Ok(Some(0.0));
        }
        let steps = (t_max / dt).ceil() as usize;
        let mut lo = 0.0;
        for i in 1..=steps {
            let hi = (i as f64 * dt).min(t_max);
            if below(hi) {
                let (mut a, mut b) = (lo, hi);
                for _ in 0..60 {
                    let m = 0.5 * (a + b);
                    if below(m) {
                        b = m;
                    } else {
                        a = m;
                    }
                }
                return Ok(Some(b));
            }
            lo = hi;
        }
        Ok(None)
    }

    /// Distinct energies carrying weight, with degenerate eigenvectors merged.
    pub fn levels(&self) -> Vec<Level> {
        let scale = self.energies.iter().fold(1.0f64, |m, e| m.max(e.abs()));
        let tol = DEGENERACY_TOL * scale;
        let mut levels = Vec::new();
        let mut start = 0;
        while start < self.dim() {
            let mut end = start + 1;
            while end < self.dim() && self.energies[end] - self.energies[end - 1] <= tol {
                end += 1;
            }
            let w2: f64 = self.overlaps[start..end].iter().map(|c| c.norm_sqr()).sum();
            if w2 > LEVEL_WEIGHT_FLOOR {
                let weight = w2.sqrt();
                let mut direction = vec![Complex64::new(0.0, 0.0); self.dim()];
                let mut mean = 0.0;
                for n in start..end {
                    let c = self.overlaps[n];
                    self.basis.axpy_column(n, c / weight, &mut direction);
                    mean += c.norm_sqr() * self.energies[n];
                }
                levels.push(Level {
                    energy: mean / w2,
                    weight,
                    direction,
                });
            }
            start = end;
        }
        levels
    }
}
