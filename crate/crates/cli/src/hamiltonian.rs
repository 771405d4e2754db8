//! Plain-text Pauli-string Hamiltonians.
//!
//! ```text
//! # transverse-field Ising chain
//! boundary = periodic
//! sum -1.0 X@0 X@1        # Σ_ℓ X_ℓ X_{ℓ+1}
//! sum alt 0.3 Z@0         # Σ_ℓ (-1)^ℓ Z_ℓ
//! 0.5 Z@2                 # a single term on site 2
//! ```
//!
//! `L = n` fixes the chain length; without it the length comes from the
//! run configuration. Offsets in `sum` lines are relative to the site being
//! summed over.

use std::path::{Path, PathBuf};

use qspan_core::ed::{Boundary, Pauli, PauliHamiltonian};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
enum Item {
    Term(Vec<(usize, Pauli)>),
    Sum {
        staggered: bool,
        ops: Vec<(usize, Pauli)>,
    },
}

#[derive(Debug, Clone, PartialEq)]
struct Line {
    number: usize,
    coeff: f64,
    item: Item,
}

/// Parsed Hamiltonian file, not yet bound to a chain length.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    path: PathBuf,
    l: Option<usize>,
    boundary: Boundary,
    lines: Vec<Line>,
}

impl HamiltonianSpec {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut spec = Self {
            path: path.to_path_buf(),
            l: None,
            boundary: Boundary::Periodic,
            lines: Vec::new(),
        };
        for (i, raw) in text.lines().enumerate() {
            let number = i + 1;
            let err = |message: String| CliError::Parse {
                path: path.to_path_buf(),
                line: number,
                message,
            };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some((key, value)) = line.split_once('=') {
                let value = value.trim();
                match key.trim() {
                    "L" => {
                        let l = value
                            .parse::<usize>()
                            .map_err(|_| err(format!("`{value}` is not a chain length")))?;
                        spec.l = Some(l);
                    }
                    "boundary" => {
                        spec.boundary = match value {
                            "periodic" => Boundary::Periodic,
                            "open" => Boundary::Open,
                            other => {
                                return Err(err(format!(
                                    "boundary must be `periodic` or `open`, not `{other}`"
                                )))
                            }
                        }
                    }
                    other => return Err(err(format!("unknown setting `{other}`"))),
                }
                continue;
            }
            let mut words = line.split_whitespace().peekable();
            let mut sum = false;
            let mut staggered = false;
            if words.peek() == Some(&"sum") {
                sum = true;
                words.next();
                if words.peek() == Some(&"alt") {
                    staggered = true;
                    words.next();
                }
            }
            let coeff_word = words
                .next()
                .ok_or_else(|| err("missing coefficient".into()))?;
            let coeff = coeff_word
                .parse::<f64>()
                .ok()
                .filter(|c| c.is_finite())
                .ok_or_else(|| err(format!("`{coeff_word}` is not a finite coefficient")))?;
            let ops = words
                .map(|w| parse_op(w).map_err(&err))
                .collect::<Result<Vec<_>>>()?;
            if ops.is_empty() {
                return Err(err("a term needs at least one Pauli operator".into()));
            }
            let item = if sum {
                Item::Sum { staggered, ops }
            } else {
                Item::Term(ops)
            };
            spec.lines.push(Line {
                number,
                coeff,
                item,
            });
        }
        if spec.lines.is_empty() {
            return Err(CliError::Parse {
                path: path.to_path_buf(),
                line: text.lines().count().max(1),
                message: "no terms".into(),
            });
        }
        Ok(spec)
    }

    pub fn fixed_length(&self) -> Option<usize> {
        self.l
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn set_boundary(&mut self, b: Boundary) {
        self.boundary = b;
    }

    /// Binds the spec to `l` sites (or to its own `L`).
    pub fn build(&self, l: Option<usize>) -> Result<PauliHamiltonian> {
        let l = match (self.l, l) {
            (Some(a), Some(b)) if a != b => {
                return Err(CliError::Parse {
                    path: self.path.clone(),
                    line: 0,
                    message: format!("file fixes L = {a} but the run asks for L = {b}"),
                })
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => {
                return Err(CliError::Parse {
                    path: self.path.clone(),
                    line: 0,
                    message: "chain length is not set in the file or the config".into(),
                })
            }
        };
        let mut h = PauliHamiltonian::new(l, self.boundary).map_err(|e| CliError::Parse {
            path: self.path.clone(),
            line: 0,
            message: e.to_string(),
        })?;
        for line in &self.lines {
            let res = match &line.item {
                Item::Term(ops) => h.add_term(line.coeff, ops),
                Item::Sum { staggered, ops } => h.add_translated(line.coeff, ops, *staggered),
            };
            res.map_err(|e| CliError::Parse {
                path: self.path.clone(),
                line: line.number,
                message: format!("{e} (L = {l})"),
            })?;
        }
        Ok(h)
    }
}

fn parse_op(word: &str) -> std::result::Result<(usize, Pauli), String> {
    let (p, site) = word
        .split_once('@')
        .ok_or_else(|| format!("`{word}` is not of the form X@site"))?;
    let mut chars = p.chars();
    let pauli = match (chars.next(), chars.next()) {
        (Some(c), None) => Pauli::from_char(c),
        _ => None,
    }
    .ok_or_else(|| format!("`{p}` is not one of X, Y, Z"))?;
    let site = site
        .parse::<usize>()
        .map_err(|_| format!("`{site}` is not a site index"))?;
    Ok((site, pauli))
}
