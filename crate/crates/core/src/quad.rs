//! Quadrature building blocks shared by the asymptotic, overlap and ED layers.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `n`-point rule by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Composite rule over consecutive panels delimited by `edges`.
    pub fn integrate_panels<F: FnMut(f64) -> f64>(&self, edges: &[f64], mut f: F) -> f64 {
        edges
            .windows(2)
            .map(|e| self.integrate(e[0], e[1], &mut f))
            .sum()
    }

    /// All (node, weight) pairs of the composite rule over `edges`.
    pub fn composite(&self, edges: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut xs = Vec::with_capacity(self.len() * edges.len().saturating_sub(1));
        let mut ws = Vec::with_capacity(xs.capacity());
        for e in edges.windows(2) {
            for (x, w) in self.mapped(e[0], e[1]) {
                xs.push(x);
                ws.push(w);
            }
        }
        (xs, ws)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let d = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Panel edges on `[0, 1]` refined geometrically towards 0.
///
/// `scale` is the width of the feature sitting at the origin; panels double
/// from `scale / 4` until they reach 1.
pub fn graded_edges(scale: f64) -> Vec<f64> {
    let mut edges = vec![0.0];
    let mut e = (scale / 4.0).clamp(1e-9, 0.25);
    while e < 1.0 {
        edges.push(e);
        e *= 2.0;
    }
    if edges.len() < 2 {
        edges.push(0.5);
    }
    edges.push(1.0);
    edges
}

/// Gauss–Legendre on panels shrinking geometrically towards `a`, suited to
/// integrands with an endpoint singularity or boundary layer at `a`. Returns
/// the 24-point value and its distance from the 16-point value on the same
/// panels. Never evaluates `f` at the endpoints.
pub fn gauss_legendre_graded<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> (f64, f64) {
    const LEVELS: i32 = 60;
    let coarse = GaussLegendre::new(16);
    let fine = GaussLegendre::new(24);
    let (mut lo_sum, mut hi_sum) = (0.0, 0.0);
    let mut right = b;
    for k in 1..=LEVELS {
        let left = if k == LEVELS {
            a
        } else {
            a + (b - a) * 0.5f64.powi(k)
        };
        lo_sum += coarse.integrate(left, right, &mut f);
        hi_sum += fine.integrate(left, right, &mut f);
        right = left;
    }
    (hi_sum, (hi_sum - lo_sum).abs())
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut state = SimpsonState {
        worst: 0.0,
        failed: false,
        evals: 3,
    };
    let value = simpson_step(&mut f, a, b, fa, fm, fb, whole, tol, 0, &mut state);
    if state.failed && state.worst > tol {
        return Err(Error::Accuracy {
            achieved: state.worst,
            target: tol,
        });
    }
    Ok(value)
}

struct SimpsonState {
    worst: f64,
    failed: bool,
    evals: u64,
}

const SIMPSON_MIN_DEPTH: u32 = 4;
const SIMPSON_MAX_DEPTH: u32 = 50;
const SIMPSON_MAX_EVALS: u64 = 4_000_000;

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    state: &mut SimpsonState,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    state.evals += 2;
    // differences below the rounding noise of the panel sums carry no signal
    let noise = 32.0
        * f64::EPSILON
        * ((m - a) * (fa.abs() + 4.0 * flm.abs() + fm.abs())
            + (b - m) * (fm.abs() + 4.0 * frm.abs() + fb.abs()))
        / 6.0;
    if depth >= SIMPSON_MIN_DEPTH && delta.abs() <= (15.0 * tol).max(noise) {
        return left + right + delta / 15.0;
    }
    if depth >= SIMPSON_MAX_DEPTH || m <= a || m >= b || state.evals > SIMPSON_MAX_EVALS {
        state.failed = true;
        state.worst += delta.abs() / 15.0;
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, state)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, state)
}

/// Chebyshev expansion of a complex-valued function on `[a, b]`.
#[derive(Debug, Clone)]
pub struct ChebyshevSeries {
    a: f64,
    b: f64,
    coeffs: Vec<Complex64>,
}

impl ChebyshevSeries {
    /// Interpolates `f` at Chebyshev–Gauss points, doubling the degree until
    /// the trailing coefficients fall below `tol` relative to the largest one.
    pub fn fit<F: FnMut(f64) -> Complex64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<Self> {
        let mut n = 16;
        loop {
            let coeffs = chebyshev_coefficients(&mut f, a, b, n);
            let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
            let tail = coeffs[n - 4..].iter().map(|c| c.norm()).fold(0.0, f64::max);
            // coefficients carry roundoff of order ε√n, below that is noise
            let floor = tol.max(4.0 * f64::EPSILON * (n as f64).sqrt());
            if tail <= floor * scale.max(1e-300) || scale == 0.0 {
                let keep = coeffs
                    .iter()
                    .rposition(|c| c.norm() > 0.25 * floor * scale)
                    .map_or(1, |i| i + 1);
                let mut coeffs = coeffs;
                coeffs.truncate(keep);
                return Ok(Self { a, b, coeffs });
            }
            if n >= 4096 {
                return Err(Error::Accuracy {
                    achieved: tail / scale,
                    target: tol,
                });
            }
            n *= 2;
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let u = (2.0 * x - self.a - self.b) / (self.b - self.a);
        let mut b1 = Complex64::new(0.0, 0.0);
        let mut b2 = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = c + b1 * (2.0 * u) - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + b1 * u - b2
    }
}

fn chebyshev_coefficients<F: FnMut(f64) -> Complex64>(
    f: &mut F,
    a: f64,
    b: f64,
    n: usize,
) -> Vec<Complex64> {
    let values: Vec<Complex64> = (0..n)
        .map(|j| {
            let theta = PI * (j as f64 + 0.5) / n as f64;
            f(0.5 * (a + b) + 0.5 * (b - a) * theta.cos())
        })
        .collect();
    (0..n)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, v) in values.iter().enumerate() {
                let theta = PI * k as f64 * (j as f64 + 0.5) / n as f64;
                acc += v * theta.cos();
            }
            let norm = if k == 0 { 1.0 } else { 2.0 };
            acc * (norm / n as f64)
        })
        .collect()
}
