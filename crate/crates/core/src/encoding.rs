//! Optimal encoding data: coefficients `A_j`, the tridiagonal Toeplitz
//! eigensystem behind them, irrep multiplicities and `‖B‖²`.
//!
//! Spins are doubled integers throughout (`two_j = 2j`).

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_bigint::BigUint;
use num_traits::{Float, One};

use crate::{Error, Result};

/// Top eigenvalue and unit eigenvector (nonnegative components).
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
}

/// Encoding data for `N` spin-½ carriers.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodingSpec {
    n_spins: usize,
    two_j0: usize,
    coeffs: Vec<f64>,
}

impl EncodingSpec {
    /// Closed-form coefficients `A_j = √(2/(n+1)) sin((j − j₀ + 1)π/(n+1))`.
    /// Exact for odd `N`; for even `N` this is the `ζ = 1` approximation.
    pub fn new(n_spins: usize) -> Result<Self> {
        let n = sector_count(n_spins)?;
        Ok(Self {
            n_spins,
            two_j0: n_spins % 2,
            coeffs: toeplitz_top_eigenpair(n)?.vector,
        })
    }

    /// Like [`EncodingSpec::new`], but even `N` takes the numerically exact
    /// top eigenvector of the `ζ = 0` matrix.
    pub fn exact(n_spins: usize) -> Result<Self> {
        let n = sector_count(n_spins)?;
        let zeta = if n_spins % 2 == 0 { 0.0 } else { 1.0 };
        let coeffs = if zeta == 1.0 {
            toeplitz_top_eigenpair(n)?.vector
        } else {
            toeplitz_numeric(n, zeta)?.vector
        };
        Ok(Self {
            n_spins,
            two_j0: n_spins % 2,
            coeffs,
        })
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    /// `2J = N`.
    pub fn two_big_j(&self) -> usize {
        self.n_spins
    }

    /// `2j₀`: 0 for even `N`, 1 for odd.
    pub fn two_j0(&self) -> usize {
        self.two_j0
    }

    /// `n = J − j₀`, the number of coefficients.
    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `(2j, A_j)` for `2j = 2j₀, 2j₀ + 2, …, 2J − 2`.
    pub fn terms(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(l, &a)| (self.two_j0 + 2 * l, a))
    }
}

fn sector_count(n_spins: usize) -> Result<usize> {
    if n_spins < 2 {
        return Err(Error::Domain("n_spins must be at least 2"));
    }
    Ok(n_spins / 2)
}

/// Closed-form top eigenpair of `T_n`: ones on the diagonal and both
/// off-diagonals.
pub fn toeplitz_top_eigenpair(n: usize) -> Result<Eigenpair> {
    if n < 1 {
        return Err(Error::Domain("Toeplitz order must be at least 1"));
    }
    let h = PI / (n + 1) as f64;
    let scale = (2.0 / (n + 1) as f64).sqrt();
    Ok(Eigenpair {
        value: 1.0 + 2.0 * h.cos(),
        vector: (1..=n).map(|l| scale * (l as f64 * h).sin()).collect(),
    })
}

/// Numerical top eigenpair of the tridiagonal matrix with unit
/// off-diagonals and diagonal `(ζ, 1, 1, …)`.
///
/// Sturm-sequence bisection for the eigenvalue, then inverse iteration with
/// a shift just above it. The shifted matrix is negative definite, so the
/// tridiagonal elimination needs no pivoting.
pub fn toeplitz_numeric(n: usize, zeta: f64) -> Result<Eigenpair> {
    if n < 1 {
        return Err(Error::Domain("Toeplitz order must be at least 1"));
    }
    if !zeta.is_finite() {
        return Err(Error::Domain("zeta must be finite"));
    }
    let mut diag = vec![1.0; n];
    diag[0] = zeta;

    // Gershgorin: all eigenvalues lie in [min d − 2, max d + 2].
    let (mut lo, mut hi) = (zeta.min(1.0) - 2.0, zeta.max(1.0) + 2.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(&diag, mid) == n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let shift = hi + 1e-9 * (1.0 + hi.abs());

    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    for _ in 0..100 {
        let mut w = solve_shifted(&diag, shift, &v);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        // Eigenvector of the top eigenvalue maps to a negative multiple.
        let sign = if w.iter().sum::<f64>() < 0.0 {
            -1.0
        } else {
            1.0
        };
        for x in &mut w {
            *x *= sign / norm;
        }
        let change = w
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = w;
        if change < 1e-15 {
            break;
        }
    }
    for x in &mut v {
        *x = x.max(0.0);
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut v {
        *x /= norm;
    }
    let tv = tridiagonal_apply(&diag, &v);
    let value = tv.iter().zip(&v).map(|(a, b)| a * b).sum();
    Ok(Eigenpair { value, vector: v })
}

/// Number of eigenvalues strictly below `x` (Sturm count via `LDLᵀ`).
fn count_below(diag: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for (i, &d) in diag.iter().enumerate() {
        q = if i == 0 { d - x } else { d - x - 1.0 / q };
        if q == 0.0 {
            q = -f64::EPSILON;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Solves `(T − s𝟙) w = v` by the Thomas algorithm.
fn solve_shifted(diag: &[f64], s: f64, v: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut pivot = diag[0] - s;
    c[0] = 1.0 / pivot;
    y[0] = v[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - s - c[i - 1];
        c[i] = 1.0 / pivot;
        y[i] = (v[i] - y[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        y[i] -= c[i] * y[i + 1];
    }
    y
}

fn tridiagonal_apply(diag: &[f64], v: &[f64]) -> Vec<f64> {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let mut s = diag[i] * v[i];
            if i > 0 {
                s += v[i - 1];
            }
            if i + 1 < n {
                s += v[i + 1];
            }
            s
        })
        .collect()
}

/// Number `n_j` of spin-`j` irreps in `(ℂ²)^{⊗N}`:
/// `(2j+1)/(J+j+1) · C(2J, J+j)`.
pub fn multiplicity(n_spins: usize, two_j: usize) -> Result<BigUint> {
    if two_j > n_spins || (n_spins - two_j) % 2 != 0 {
        return Err(Error::Domain(
            "2j must have the parity of N and not exceed it",
        ));
    }
    let k = (n_spins + two_j) / 2;
    let total = binomial(n_spins, k) * BigUint::from(two_j + 1);
    Ok(total / BigUint::from(k + 1))
}

fn binomial(n: usize, k: usize) -> BigUint {
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= BigUint::from(n - i);
        acc /= BigUint::from(i + 1);
    }
    acc
}

/// `‖B‖² = Σ_{j=j₀}^{J−1} (2j+1)²` in closed form.
pub fn b_norm_squared(n_spins: usize) -> Result<f64> {
    let n = sector_count(n_spins)? as u128;
    let a = (n_spins % 2 + 1) as u128;
    // Σ_{l<n} (a + 2l)² = n a² + 2a n(n−1) + 2(n−1)n(2n−1)/3
    let sum = n * a * a + 2 * a * n * (n - 1) + 2 * (n - 1) * n * (2 * n - 1) / 3;
    Ok(sum as f64)
}
