use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use faer::{c64, Mat};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest chain handled by the dense routines.
pub const MAX_SITES: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'X' | 'x' => Some(Self::X),
            'Y' | 'y' => Some(Self::Y),
            'Z' | 'z' => Some(Self::Z),
            _ => None,
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        };
        write!(f, "{c}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    #[default]
    Periodic,
    Open,
}

/// Real coefficient times a product of Pauli matrices on distinct sites.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coeff: f64,
    ops: Vec<(usize, Pauli)>,
    flip: u32,
    phase_mask: u32,
    y_count: u32,
}

impl PauliTerm {
    pub fn ops(&self) -> &[(usize, Pauli)] {
        &self.ops
    }

    /// `P|b⟩ = i^{#Y} (-1)^{popcount(b & zy)} |b ^ xy⟩` with bit ℓ set for a
    /// down spin on site ℓ.
    #[inline]
    fn act(&self, b: u32) -> (u32, Complex64) {
        let sign = if (b & self.phase_mask).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        let c = self.coeff * sign;
        let z = match self.y_count % 4 {
            0 => Complex64::new(c, 0.0),
            1 => Complex64::new(0.0, c),
            2 => Complex64::new(-c, 0.0),
            _ => Complex64::new(0.0, -c),
        };
        (b ^ self.flip, z)
    }
}

/// Spin-½ chain Hamiltonian as a sum of Pauli strings.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliHamiltonian {
    l: usize,
    boundary: Boundary,
    terms: Vec<PauliTerm>,
}

impl PauliHamiltonian {
    pub fn new(l: usize, boundary: Boundary) -> Result<Self> {
        if l == 0 {
            return Err(Error::Invalid("a chain needs at least one site".into()));
        }
        if l > MAX_SITES {
            return Err(Error::TooLarge {
                sites: l,
                max: MAX_SITES,
            });
        }
        Ok(Self {
            l,
            boundary,
            terms: Vec::new(),
        })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn dim(&self) -> usize {
        1 << self.l
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    /// Adds `coeff · Π op@site`. The identity string (no operators) is
    /// accepted and shifts the spectrum.
    pub fn add_term(&mut self, coeff: f64, ops: &[(usize, Pauli)]) -> Result<()> {
        if !coeff.is_finite() {
            return Err(Error::Invalid(format!("coefficient {coeff} is not finite")));
        }
        let mut sorted = ops.to_vec();
        sorted.sort();
        for w in sorted.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::Invalid(format!(
                    "site {} appears twice in one Pauli string",
                    w[0].0
                )));
            }
        }
        let (mut flip, mut phase_mask, mut y_count) = (0u32, 0u32, 0u32);
        for &(site, p) in &sorted {
            if site >= self.l {
                return Err(Error::Invalid(format!(
                    "site {site} out of range for L = {}",
                    self.l
                )));
            }
            let bit = 1u32 << site;
            match p {
                Pauli::X => flip |= bit,
                Pauli::Z => phase_mask |= bit,
                Pauli::Y => {
                    flip |= bit;
                    phase_mask |= bit;
                    y_count += 1;
                }
            }
        }
        if coeff != 0.0 {
            self.terms.push(PauliTerm {
                coeff,
                ops: sorted,
                flip,
                phase_mask,
                y_count,
            });
        }
        Ok(())
    }

    /// Adds `Σ_ℓ coeff · Π op@(ℓ + offset)` over all translations, optionally
    /// with a staggered sign `(-1)^ℓ`. Open chains drop strings that would
    /// leave the chain.
    pub fn add_translated(
        &mut self,
        coeff: f64,
        ops: &[(usize, Pauli)],
        staggered: bool,
    ) -> Result<()> {
        for site in 0..self.l {
            let mut shifted = Vec::with_capacity(ops.len());
            let mut outside = false;
            for &(offset, p) in ops {
                let s = site + offset;
                if s >= self.l {
                    match self.boundary {
                        Boundary::Periodic => shifted.push((s % self.l, p)),
                        Boundary::Open => outside = true,
                    }
                } else {
                    shifted.push((s, p));
                }
            }
            if outside {
                continue;
            }
            let sign = if staggered && site % 2 == 1 {
                -1.0
            } else {
                1.0
            };
            self.add_term(sign * coeff, &shifted)?;
        }
        Ok(())
    }

    /// Every string has an even number of `Y` factors, so the matrix is real.
    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|t| t.y_count % 2 == 0)
    }

    /// Largest possible `‖H‖`, the sum of absolute coefficients.
    pub fn norm_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.abs()).sum()
    }

    /// `out = H psi`.
    pub fn apply(&self, psi: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(psi.len(), self.dim());
        assert_eq!(out.len(), self.dim());
        out.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for term in &self.terms {
            for (b, &amp) in psi.iter().enumerate() {
                let (to, z) = term.act(b as u32);
                out[to as usize] += z * amp;
            }
        }
    }

    /// `⟨psi|H|psi⟩` (real part).
    pub fn expectation(&self, psi: &[Complex64]) -> f64 {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.apply(psi, &mut out);
        psi.iter().zip(&out).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// Energy density `h_ℓ`: two-site strings belong to their left site
    /// (the one the other site follows, wrapping on periodic chains), one-site
    /// strings to their own site.
    pub fn density(&self, site: usize) -> Result<PauliHamiltonian> {
        if site >= self.l {
            return Err(Error::Invalid(format!(
                "site {site} out of range for L = {}",
                self.l
            )));
        }
        let mut h = PauliHamiltonian::new(self.l, self.boundary)?;
        for term in &self.terms {
            if self.owner(term)? == site {
                h.terms.push(term.clone());
            }
        }
        Ok(h)
    }

    fn owner(&self, term: &PauliTerm) -> Result<usize> {
        match term.ops.as_slice() {
            [] => Err(Error::Invalid(
                "identity strings have no site for an energy density".into(),
            )),
            [(s, _)] => Ok(*s),
            [(a, _), (b, _)] => {
                if self.boundary == Boundary::Periodic && b - a > self.l / 2 {
                    Ok(*b)
                } else {
                    Ok(*a)
                }
            }
            _ => Err(Error::Invalid(format!(
                "string on {} sites cannot be grouped into a local density",
                term.ops.len()
            ))),
        }
    }
}

/// Dense matrix of a Hamiltonian; real when possible.
#[derive(Debug, Clone)]
pub enum DenseOperator {
    Real(Mat<f64>),
    Complex(Mat<c64>),
}

impl DenseOperator {
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

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// `max |A_ij - conj A_ji|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..=i {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }
}

/// Dense `2^L × 2^L` matrix of `h`.
pub fn build_hamiltonian(h: &PauliHamiltonian) -> Result<DenseOperator> {
    if h.l() > MAX_SITES {
        return Err(Error::TooLarge {
            sites: h.l(),
            max: MAX_SITES,
        });
    }
    let n = h.dim();
    if h.is_real() {
        let mut m = Mat::<f64>::zeros(n, n);
        for term in h.terms() {
            for b in 0..n {
                let (to, z) = term.act(b as u32);
                m[(to as usize, b)] += z.re;
            }
        }
        Ok(DenseOperator::Real(m))
    } else {
        let mut m = Mat::<c64>::zeros(n, n);
        for term in h.terms() {
            for b in 0..n {
                let (to, z) = term.act(b as u32);
                m[(to as usize, b)] += z;
            }
        }
        Ok(DenseOperator::Complex(m))
    }
}
