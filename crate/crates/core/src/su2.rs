//! SU(2) as unit 4-vectors, its two-to-one cover of SO(3), and the
//! normalized Haar measure in hyperspherical angles.
//!
//! An element `x = (x₁, x₂, x₃, x₄)` stands for the matrix
//!
//! ```text
//!     ⎡  x₁ + i x₂    x₃ + i x₄ ⎤
//!     ⎣ −x₃ + i x₄    x₁ − i x₂ ⎦
//! ```
//!
//! so that `½ Tr g = x₁ = cos θ_g`, and the hyperspherical angles
//! `(θ, ψ, φ)` give `x = (cos θ, sin θ cos ψ, sin θ sin ψ cos φ,
//! sin θ sin ψ sin φ)`. In these angles the normalized Haar measure is
//! `(1/2π²) sin²θ sin ψ dθ dψ dφ`.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Mul, Neg};

use num_complex::Complex64;
use num_traits::Float;
use rand::Rng;

use crate::quadrature::GaussLegendre;
use crate::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;

/// A unit quaternion in the matrix layout above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Su2Element {
    x: [f64; 4],
}

impl Su2Element {
    pub const IDENTITY: Self = Self {
        x: [1.0, 0.0, 0.0, 0.0],
    };

    /// Normalizes `x` onto the unit sphere. Fails on a (near-)zero vector.
    pub fn from_components(x: [f64; 4]) -> Result<Self> {
        let norm = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(norm > 1e-300) || !norm.is_finite() {
            return Err(Error::Domain(
                "SU(2) components must be a finite nonzero 4-vector",
            ));
        }
        Ok(Self::renormalized(x))
    }

    /// The element with hyperspherical angles `θ ∈ [0, π]`, `ψ ∈ [0, π]`,
    /// `φ ∈ [0, 2π)`.
    pub fn from_angles(theta: f64, psi: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::Domain("theta must lie in [0, pi]"));
        }
        if !(0.0..=PI).contains(&psi) {
            return Err(Error::Domain("psi must lie in [0, pi]"));
        }
        if !(0.0..TWO_PI).contains(&phi) {
            return Err(Error::Domain("phi must lie in [0, 2pi)"));
        }
        Ok(Self::from_angles_unchecked(theta, psi, phi))
    }

    pub(crate) fn from_angles_unchecked(theta: f64, psi: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = psi.sin_cos();
        let (sf, cf) = phi.sin_cos();
        Self {
            x: [ct, st * cp, st * sp * cf, st * sp * sf],
        }
    }

    /// One of the two elements covering the rotation by `angle` (radians,
    /// right-handed) about `axis`. The axis is normalized first.
    pub fn from_axis_angle(axis: [f64; 3], angle: f64) -> Result<Self> {
        let norm = axis.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(norm > 1e-12) || !norm.is_finite() || !angle.is_finite() {
            return Err(Error::Domain("rotation axis must be finite and nonzero"));
        }
        let (s, c) = (0.5 * angle).sin_cos();
        let [nx, ny, nz] = axis.map(|v| v / norm);
        Ok(Self::renormalized([c, -nz * s, -ny * s, -nx * s]))
    }

    fn renormalized(x: [f64; 4]) -> Self {
        let norm = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        Self {
            x: x.map(|c| c / norm),
        }
    }

    pub fn components(&self) -> [f64; 4] {
        self.x
    }

    /// Group product `self · other`, renormalized.
    pub fn compose(&self, other: &Self) -> Self {
        let [a1, a2, b1, b2] = self.x;
        let [c1, c2, d1, d2] = other.x;
        // a' = a c − b d̄,  b' = a d + b c̄ with a = a1 + i a2, b = b1 + i b2, ...
        Self::renormalized([
            a1 * c1 - a2 * c2 - b1 * d1 - b2 * d2,
            a1 * c2 + a2 * c1 + b1 * d2 - b2 * d1,
            a1 * d1 - a2 * d2 + b1 * c1 + b2 * c2,
            a1 * d2 + a2 * d1 - b1 * c2 + b2 * c1,
        ])
    }

    /// Conjugate transpose: `(x₁, −x₂, −x₃, −x₄)`.
    pub fn inverse(&self) -> Self {
        let [x1, x2, x3, x4] = self.x;
        Self {
            x: [x1, -x2, -x3, -x4],
        }
    }

    pub fn trace(&self) -> f64 {
        2.0 * self.x[0]
    }

    /// Hyperspherical angle `θ_g = arccos(½ Tr g) ∈ [0, π]`.
    pub fn angle(&self) -> f64 {
        self.x[0].clamp(-1.0, 1.0).acos()
    }

    /// The 2×2 special-unitary matrix.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        let [x1, x2, x3, x4] = self.x;
        [
            [Complex64::new(x1, x2), Complex64::new(x3, x4)],
            [Complex64::new(-x3, x4), Complex64::new(x1, -x2)],
        ]
    }

    /// Image under the covering map `R`, `R(g)_ab = ½ Tr(σ_a g σ_b g†)`.
    pub fn to_rotation(&self) -> So3Rotation {
        // g = x₁ 𝟙 + i(x₄ σ_x + x₃ σ_y + x₂ σ_z) is the quaternion
        // (w, a, b, c) = (x₁, −x₄, −x₃, −x₂) in the usual convention.
        let [w, x2, x3, x4] = self.x;
        let (a, b, c) = (-x4, -x3, -x2);
        So3Rotation {
            m: [
                [
                    1.0 - 2.0 * (b * b + c * c),
                    2.0 * (a * b - w * c),
                    2.0 * (a * c + w * b),
                ],
                [
                    2.0 * (a * b + w * c),
                    1.0 - 2.0 * (a * a + c * c),
                    2.0 * (b * c - w * a),
                ],
                [
                    2.0 * (a * c - w * b),
                    2.0 * (b * c + w * a),
                    1.0 - 2.0 * (a * a + b * b),
                ],
            ],
        }
    }

    /// Euclidean inner product of the 4-vectors, equal to `½ Tr(g⁻¹h)`.
    pub fn dot(&self, other: &Self) -> f64 {
        self.x.iter().zip(&other.x).map(|(a, b)| a * b).sum()
    }
}

impl Default for Su2Element {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Mul for Su2Element {
    type Output = Su2Element;

    fn mul(self, rhs: Self) -> Self {
        self.compose(&rhs)
    }
}

impl Neg for Su2Element {
    type Output = Su2Element;

    fn neg(self) -> Self {
        Self {
            x: self.x.map(|c| -c),
        }
    }
}

/// `θ ∈ [0, π]` with `cos θ = ½ Tr(g⁻¹h)`.
pub fn relative_angle(g: &Su2Element, h: &Su2Element) -> f64 {
    g.inverse().compose(h).angle()
}

/// A proper rotation of ℝ³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct So3Rotation {
    m: [[f64; 3]; 3],
}

impl So3Rotation {
    pub const IDENTITY: Self = Self {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    /// Accepts `m` if it is orthogonal with determinant one (within 1e−10).
    pub fn from_matrix(m: [[f64; 3]; 3]) -> Result<Self> {
        let r = Self { m };
        let mtm = r.transpose().compose(&r);
        let orthogonal = (0..3)
            .all(|i| (0..3).all(|j| (mtm.m[i][j] - if i == j { 1.0 } else { 0.0 }).abs() <= 1e-10));
        if !orthogonal || (r.determinant() - 1.0).abs() > 1e-10 {
            return Err(Error::Domain("matrix is not a proper rotation"));
        }
        Ok(r)
    }

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        self.m
    }

    pub fn transpose(&self) -> Self {
        let mut t = [[0.0; 3]; 3];
        for (i, row) in self.m.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                t[j][i] = *v;
            }
        }
        Self { m: t }
    }

    pub fn compose(&self, other: &Self) -> Self {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| self.m[i][k] * other.m[k][j]).sum();
            }
        }
        Self { m: out }
    }

    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (o, row) in out.iter_mut().zip(&self.m) {
            *o = row.iter().zip(&v).map(|(a, b)| a * b).sum();
        }
        out
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Rotation angle `arccos((Tr R − 1)/2) ∈ [0, π]`.
    pub fn angle(&self) -> f64 {
        (0.5 * (self.trace() - 1.0)).clamp(-1.0, 1.0).acos()
    }
}

/// Composite Gauss–Legendre product rule for the normalized Haar measure.
///
/// Each coordinate carries its own panel count; the measure factors
/// `(2/π) sin²θ`, `½ sin ψ` and `1/2π` are folded into the stored weights,
/// so each coordinate's weights sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarGrid {
    theta_panels: usize,
    psi_panels: usize,
    phi_panels: usize,
    nodes_per_panel: usize,
    theta: Vec<(f64, f64)>,
    psi: Vec<(f64, f64)>,
    phi: Vec<(f64, f64)>,
}

/// Default panel count per coordinate.
pub const DEFAULT_PANELS: usize = 64;
/// Default Gauss–Legendre nodes per panel.
pub const DEFAULT_NODES: usize = 8;

impl HaarGrid {
    pub fn new(
        theta_panels: usize,
        psi_panels: usize,
        phi_panels: usize,
        nodes_per_panel: usize,
    ) -> Result<Self> {
        if theta_panels == 0 || psi_panels == 0 || phi_panels == 0 || nodes_per_panel == 0 {
            return Err(Error::Domain("panel and node counts must be positive"));
        }
        let rule = GaussLegendre::new(nodes_per_panel);
        let theta = rule
            .composite_points(0.0, PI, theta_panels)
            .into_iter()
            .map(|(t, w)| {
                let s = t.sin();
                (t, w * s * s * 2.0 / PI)
            })
            .collect();
        let psi = rule
            .composite_points(0.0, PI, psi_panels)
            .into_iter()
            .map(|(p, w)| (p, 0.5 * w * p.sin()))
            .collect();
        let phi = rule
            .composite_points(0.0, TWO_PI, phi_panels)
            .into_iter()
            .map(|(f, w)| (f, w / TWO_PI))
            .collect();
        Ok(Self {
            theta_panels,
            psi_panels,
            phi_panels,
            nodes_per_panel,
            theta,
            psi,
            phi,
        })
    }

    /// The same panel count on every coordinate.
    pub fn uniform(panels: usize, nodes_per_panel: usize) -> Result<Self> {
        Self::new(panels, panels, panels, nodes_per_panel)
    }

    /// A grid whose θ coordinate resolves `p(θ)²` for `n_spins` (the most
    /// demanding one-dimensional integrand), with modest ψ/φ resolution
    /// suited to smooth test functions.
    pub fn for_spins(n_spins: usize) -> Self {
        let theta = (PANELS_PER_OSCILLATION * 2 * oscillations(n_spins)).max(DEFAULT_PANELS);
        Self::new(theta, 8, 16, DEFAULT_NODES).expect("positive counts")
    }

    /// A grid resolving `p` in all three coordinates, for integrands that
    /// depend on whole group elements through `p` (e.g. joint densities).
    pub fn for_spins_full(n_spins: usize) -> Self {
        let osc = oscillations(n_spins);
        let t = (PANELS_PER_OSCILLATION * osc).max(4);
        Self::new(t, t, 2 * t, DEFAULT_NODES).expect("positive counts")
    }

    pub fn theta_panels(&self) -> usize {
        self.theta_panels
    }

    pub fn psi_panels(&self) -> usize {
        self.psi_panels
    }

    pub fn phi_panels(&self) -> usize {
        self.phi_panels
    }

    pub fn nodes_per_panel(&self) -> usize {
        self.nodes_per_panel
    }

    /// `(θ, weight)` pairs with the θ-marginal `(2/π) sin²θ` folded in.
    pub fn theta_points(&self) -> &[(f64, f64)] {
        &self.theta
    }

    pub fn psi_points(&self) -> &[(f64, f64)] {
        &self.psi
    }

    pub fn phi_points(&self) -> &[(f64, f64)] {
        &self.phi
    }

    /// Total weight of the product rule (should be 1).
    pub fn total_weight(&self) -> f64 {
        let t: f64 = self.theta.iter().map(|p| p.1).sum();
        let s: f64 = self.psi.iter().map(|p| p.1).sum();
        let f: f64 = self.phi.iter().map(|p| p.1).sum();
        t * s * f
    }

    /// `∫ f dg` over the full group.
    pub fn integrate<F: FnMut(&Su2Element) -> f64>(&self, mut f: F) -> f64 {
        let mut total = 0.0;
        for &(t, wt) in &self.theta {
            let mut shell = 0.0;
            for &(p, wp) in &self.psi {
                let mut ring = 0.0;
                for &(q, wq) in &self.phi {
                    ring += wq * f(&Su2Element::from_angles_unchecked(t, p, q));
                }
                shell += wp * ring;
            }
            total += wt * shell;
        }
        total
    }

    /// `∫ w(θ_g) f(g) dg`, evaluating `w` once per θ node.
    pub fn integrate_shells<W, F>(&self, mut w: W, mut f: F) -> f64
    where
        W: FnMut(f64) -> f64,
        F: FnMut(&Su2Element) -> f64,
    {
        let mut total = 0.0;
        for &(t, wt) in &self.theta {
            let weight = w(t);
            if weight == 0.0 {
                continue;
            }
            let mut shell = 0.0;
            for &(p, wp) in &self.psi {
                let mut ring = 0.0;
                for &(q, wq) in &self.phi {
                    ring += wq * f(&Su2Element::from_angles_unchecked(t, p, q));
                }
                shell += wp * ring;
            }
            total += wt * weight * shell;
        }
        total
    }

    /// `∫ f dg` for a class function `f(θ_g)`: `(2/π) ∫₀^π f(θ) sin²θ dθ`.
    pub fn integrate_class<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.theta.iter().map(|&(t, w)| w * f(t)).sum()
    }

    /// `∫ f dg` restricted to `g = center · h` with `θ_h ∈ [0, w] ∪ [π − w, π]`.
    ///
    /// Each cap gets the grid's θ panel count; ψ and φ use the grid's rules.
    /// For `w ≥ π/2` this is the full integral.
    pub fn integrate_caps<F: FnMut(&Su2Element) -> f64>(
        &self,
        center: &Su2Element,
        w: f64,
        mut f: F,
    ) -> f64 {
        if w >= 0.5 * PI {
            return self.integrate(|h| f(&center.compose(h)));
        }
        let rule = GaussLegendre::new(self.nodes_per_panel);
        let cap = rule.composite_points(0.0, w, self.theta_panels);
        let mut total = 0.0;
        for &(t0, w0) in &cap {
            for t in [t0, PI - t0] {
                let s = t.sin();
                let wt = w0 * s * s * 2.0 / PI;
                let mut shell = 0.0;
                for &(p, wp) in &self.psi {
                    let mut ring = 0.0;
                    for &(q, wq) in &self.phi {
                        let h = Su2Element::from_angles_unchecked(t, p, q);
                        ring += wq * f(&center.compose(&h));
                    }
                    shell += wp * ring;
                }
                total += wt * shell;
            }
        }
        total
    }

    /// Requires at least `per_oscillation` θ panels per oscillation of
    /// `p(θ)` for `n_spins`.
    pub fn check_theta(&self, n_spins: usize, per_oscillation: usize) -> Result<()> {
        check(
            "theta",
            self.theta_panels,
            per_oscillation * oscillations(n_spins),
        )
    }

    /// Requires every coordinate to resolve `p` for `n_spins`.
    pub fn check_full(&self, n_spins: usize) -> Result<()> {
        let need = PANELS_PER_OSCILLATION * oscillations(n_spins);
        check("theta", self.theta_panels, need)?;
        check("psi", self.psi_panels, need)?;
        check("phi", self.phi_panels, 2 * need)
    }
}

impl Default for HaarGrid {
    fn default() -> Self {
        Self::uniform(DEFAULT_PANELS, DEFAULT_NODES).expect("positive counts")
    }
}

/// Minimum panels per oscillation of an integrand.
pub const PANELS_PER_OSCILLATION: usize = 4;

/// Number of oscillations of `p(θ)` over `[0, π]`: its top angular
/// frequency is `2(N − 2)`.
pub fn oscillations(n_spins: usize) -> usize {
    n_spins.saturating_sub(2).max(1)
}

fn check(coordinate: &'static str, actual: usize, required: usize) -> Result<()> {
    if actual < required {
        Err(Error::Resolution {
            coordinate,
            required,
            actual,
        })
    } else {
        Ok(())
    }
}

/// Haar-random element: θ by inverting `F(θ) = (θ − sin θ cos θ)/π`,
/// `cos ψ` uniform on `[−1, 1]`, `φ` uniform on `[0, 2π)`.
pub fn haar_sample<R: Rng + ?Sized>(rng: &mut R) -> Su2Element {
    let theta = invert_theta_cdf(rng.random::<f64>());
    random_direction(theta, rng)
}

/// Element with angle `theta` and uniformly random `(ψ, φ)`.
pub(crate) fn random_direction<R: Rng + ?Sized>(theta: f64, rng: &mut R) -> Su2Element {
    let psi = (1.0 - 2.0 * rng.random::<f64>()).clamp(-1.0, 1.0).acos();
    let phi = TWO_PI * rng.random::<f64>();
    Su2Element::from_angles_unchecked(theta, psi, phi)
}

/// CDF of the Haar θ-marginal `(2/π) sin²θ`.
pub fn theta_cdf(theta: f64) -> f64 {
    (theta - theta.sin() * theta.cos()) / PI
}

/// Solves `theta_cdf(θ) = u` by safeguarded Newton iteration (tolerance 1e−12).
pub fn invert_theta_cdf(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    let (mut lo, mut hi) = (0.0, PI);
    // Near the ends F behaves like 2θ³/3π.
    let mut t = if u < 0.5 {
        (1.5 * PI * u).cbrt().min(0.5 * PI)
    } else {
        PI - (1.5 * PI * (1.0 - u)).cbrt().min(0.5 * PI)
    };
    for _ in 0..200 {
        let r = theta_cdf(t) - u;
        if r > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let s = t.sin();
        let d = 2.0 * s * s / PI;
        let mut next = if d > 0.0 { t - r / d } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() < 1e-12 {
            return next;
        }
        t = next;
    }
    t
}
