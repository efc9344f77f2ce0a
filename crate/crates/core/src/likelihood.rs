//! The decoding likelihood `p(θ) = ⟨A(g)|B(g′)⟩²` as a function of the
//! relative angle, sampling of decoded frames and the transmission error.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;
use rand::Rng;

use crate::encoding::EncodingSpec;
use crate::quadrature::GaussLegendre;
use crate::su2::{random_direction, HaarGrid, Su2Element, PANELS_PER_OSCILLATION};
use crate::{Error, Result};

/// Below this `|sin θ|` characters are replaced by their limits.
const CHARACTER_WINDOW: f64 = 1e-8;

/// `χ_j(θ) = sin((2j+1)θ)/sin θ`.
pub fn character(two_j: usize, theta: f64) -> f64 {
    let s = theta.sin();
    let dim = (two_j + 1) as f64;
    if s.abs() < CHARACTER_WINDOW {
        if theta < 0.5 * PI || two_j % 2 == 0 {
            dim
        } else {
            -dim
        }
    } else {
        (dim * theta).sin() / s
    }
}

/// `⟨A(g)|B(g′)⟩ = Σ_j A_j χ_j(θ)` at relative angle `θ`.
pub fn overlap(spec: &EncodingSpec, theta: f64) -> f64 {
    spec.terms().map(|(tj, a)| a * character(tj, theta)).sum()
}

/// The same overlap summed in closed form. Has removable singularities at
/// `sin θ = 0` and `cos 2θ = cos(π/(n+1))`; use only away from them.
pub fn overlap_closed_form(spec: &EncodingSpec, theta: f64) -> f64 {
    let m = (spec.n() + 1) as f64;
    let h = PI / m;
    let jj = 0.5 * (spec.two_big_j() + spec.two_j0()) as f64;
    (2.0 / m).sqrt() * (jj * theta).sin() / theta.sin() * h.sin() * (m * theta).cos()
        / ((2.0 * theta).cos() - h.cos())
}

/// Density `p(θ)` with its inverse-CDF table for the θ-marginal
/// `(2/π) p(θ) sin²θ`.
#[derive(Debug, Clone)]
pub struct LikelihoodModel {
    spec: EncodingSpec,
    theta_grid: Vec<f64>,
    cdf_table: Vec<f64>,
}

/// Gauss–Legendre points used on each table interval.
const TABLE_RULE_NODES: usize = 6;

impl LikelihoodModel {
    /// Table with `max(4096, 64 J)` intervals.
    pub fn new(spec: EncodingSpec) -> Self {
        let nodes = (32 * spec.two_big_j()).max(4096);
        Self::with_resolution(spec, nodes).expect("default resolution is positive")
    }

    pub fn with_resolution(spec: EncodingSpec, intervals: usize) -> Result<Self> {
        if intervals == 0 {
            return Err(Error::Domain("CDF table needs at least one interval"));
        }
        let rule = GaussLegendre::new(TABLE_RULE_NODES);
        let step = PI / intervals as f64;
        let theta_grid: Vec<f64> = (0..=intervals).map(|i| i as f64 * step).collect();
        let mut cdf_table = Vec::with_capacity(intervals + 1);
        let mut acc = 0.0;
        cdf_table.push(0.0);
        for w in theta_grid.windows(2) {
            acc += rule.integrate(
                |t| {
                    let s = t.sin();
                    2.0 / PI * overlap(&spec, t).powi(2) * s * s
                },
                w[0],
                w[1],
            );
            cdf_table.push(acc);
        }
        if !(acc > 0.0) || !acc.is_finite() {
            return Err(Error::Domain("likelihood has no mass"));
        }
        for c in &mut cdf_table {
            *c /= acc;
        }
        Ok(Self {
            spec,
            theta_grid,
            cdf_table,
        })
    }

    pub fn spec(&self) -> &EncodingSpec {
        &self.spec
    }

    /// Number of table intervals.
    pub fn resolution(&self) -> usize {
        self.theta_grid.len() - 1
    }

    pub fn theta_grid(&self) -> &[f64] {
        &self.theta_grid
    }

    pub fn cdf_table(&self) -> &[f64] {
        &self.cdf_table
    }

    /// `p(θ)`, a density with respect to normalized Haar measure.
    pub fn density(&self, theta: f64) -> f64 {
        overlap(&self.spec, theta).powi(2)
    }

    /// Inverse of the tabulated θ-marginal CDF, linear between nodes.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let i = self.cdf_table.partition_point(|&c| c < u);
        if i == 0 {
            return self.theta_grid[0];
        }
        if i >= self.cdf_table.len() {
            return PI;
        }
        let (c0, c1) = (self.cdf_table[i - 1], self.cdf_table[i]);
        let (t0, t1) = (self.theta_grid[i - 1], self.theta_grid[i]);
        if c1 > c0 {
            t0 + (u - c0) / (c1 - c0) * (t1 - t0)
        } else {
            t0
        }
    }

    /// A Haar-relative offset `h` with density `p(θ_h)`.
    pub fn sample_offset<R: Rng + ?Sized>(&self, rng: &mut R) -> Su2Element {
        let theta = self.quantile(rng.random::<f64>());
        random_direction(theta, rng)
    }

    /// Decoded frame `g′ = g_true · h`.
    pub fn sample_estimate<R: Rng + ?Sized>(&self, g_true: &Su2Element, rng: &mut R) -> Su2Element {
        g_true.compose(&self.sample_offset(rng))
    }
}

/// `p(θ)` from a model.
pub fn likelihood_density(model: &LikelihoodModel, theta: f64) -> f64 {
    model.density(theta)
}

/// `Σ_α |R(g_est) ê_α − R(g_true) ê_α|² = 6 − 2 Tr(R_trueᵀ R_est)`.
pub fn transmission_error(g_est: &Su2Element, g_true: &Su2Element) -> f64 {
    let t = g_true
        .to_rotation()
        .transpose()
        .compose(&g_est.to_rotation());
    (6.0 - 2.0 * t.trace()).clamp(0.0, 8.0)
}

/// `⟨e⟩ = (2/π) ∫ p(θ) 8 sin²θ sin²θ dθ`.
pub fn average_error(spec: &EncodingSpec, grid: &HaarGrid) -> Result<f64> {
    grid.check_theta(spec.n_spins(), PANELS_PER_OSCILLATION)?;
    Ok(grid.integrate_class(|t| overlap(spec, t).powi(2) * 8.0 * t.sin().powi(2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::su2::{haar_sample, relative_angle, theta_cdf};
    use std::vec::Vec;

    fn model(n: usize) -> LikelihoodModel {
        LikelihoodModel::new(EncodingSpec::new(n).unwrap())
    }

    fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn overlap_examples() {
        let s3 = EncodingSpec::new(3).unwrap();
        assert!((overlap(&s3, 0.0) - 2.0).abs() < 1e-15);
        assert!(overlap(&s3, PI / 2.0).abs() < 1e-15);
        assert!((overlap(&s3, PI) + 2.0).abs() < 1e-15);
        let s5 = EncodingSpec::new(5).unwrap();
        let mut rng = stream(11);
        for _ in 0..1000 {
            let t = PI * rng.random::<f64>();
            let near = [0.0, PI, PI / 6.0, 5.0 * PI / 6.0]
                .iter()
                .any(|s| (t - s).abs() < 1e-4);
            if near {
                continue;
            }
            assert!((overlap(&s5, t) - overlap_closed_form(&s5, t)).abs() < 1e-10);
        }
    }

    #[test]
    fn character_limits() {
        for tj in 0..8 {
            let d = (tj + 1) as f64;
            assert_eq!(character(tj, 0.0), d);
            assert_eq!(character(tj, PI), if tj % 2 == 0 { d } else { -d });
            assert!((character(tj, 1e-6) - d).abs() < 1e-9 * d * d * d);
            assert!((character(tj, PI - 1e-6).abs() - d).abs() < 1e-9 * d * d * d);
        }
    }

    #[test]
    fn closed_form_agrees_with_character_sum() {
        let mut rng = stream(12);
        for n in 3..=30 {
            let spec = EncodingSpec::new(n).unwrap();
            let h = PI / (spec.n() + 1) as f64;
            let singular = [0.0, PI, 0.5 * h, PI - 0.5 * h];
            let mut checked = 0;
            while checked < 1000 {
                let t = PI * rng.random::<f64>();
                if singular.iter().any(|s| (t - s).abs() < 1e-4) {
                    continue;
                }
                let (a, b) = (overlap(&spec, t), overlap_closed_form(&spec, t));
                assert!((a - b).abs() < 1e-9, "N={n} θ={t}: {a} vs {b}");
                checked += 1;
            }
        }
    }

    #[test]
    fn density_examples() {
        let m2 = model(2);
        let m3 = model(3);
        for &t in m2.theta_grid() {
            assert_eq!(m2.density(t), 1.0);
            let want = 4.0 * t.cos().powi(2);
            assert!((m3.density(t) - want).abs() < 1e-12);
        }
        for n in [2, 3, 4, 7, 20, 61] {
            let spec = EncodingSpec::new(n).unwrap();
            let grid = HaarGrid::for_spins(n);
            let total = grid.integrate_class(|t| overlap(&spec, t).powi(2));
            assert!((total - 1.0).abs() < 1e-6, "N={n}: {total}");
        }
    }

    #[test]
    fn density_is_symmetric() {
        for n in 2..=100 {
            let m = LikelihoodModel::with_resolution(EncodingSpec::new(n).unwrap(), 512).unwrap();
            for &t in m.theta_grid() {
                assert!((m.density(t) - m.density(PI - t)).abs() < 1e-10 * (1.0 + m.density(t)));
            }
        }
    }

    #[test]
    fn exchange_symmetry() {
        let m = model(9);
        let mut rng = stream(13);
        for _ in 0..100 {
            let g = haar_sample(&mut rng);
            let h = haar_sample(&mut rng);
            let a = m.density(g.inverse().compose(&h).angle());
            let b = m.density(h.inverse().compose(&g).angle());
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn cdf_table_invariants() {
        for n in [2, 3, 10, 101] {
            let m = model(n);
            let c = m.cdf_table();
            assert_eq!(c[0], 0.0);
            assert!((c[c.len() - 1] - 1.0).abs() < 1e-6);
            assert!(c.windows(2).all(|w| w[1] >= w[0]));
            assert!(m.theta_grid().iter().all(|&t| m.density(t) >= 0.0));
            assert_eq!(m.resolution(), (32 * n).max(4096));
        }
        assert!(LikelihoodModel::with_resolution(EncodingSpec::new(3).unwrap(), 0).is_err());
    }

    #[test]
    fn quantile_inverts_table() {
        let m = model(3);
        for i in 0..=200 {
            let t = PI * i as f64 / 200.0;
            // θ-marginal CDF for N=3 is (2/π)∫4cos²sin² = (4θ − sin 4θ)/(4π).
            let u = (4.0 * t - (4.0 * t).sin()) / (4.0 * PI);
            assert!((m.quantile(u) - t).abs() < 1e-3, "θ={t}");
        }
        assert_eq!(m.quantile(0.0), 0.0);
        assert_eq!(m.quantile(1.0), PI);
    }

    #[test]
    fn two_spin_sampling_is_haar() {
        let m = model(2);
        let mut rng = stream(14);
        let g = haar_sample(&mut rng);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| relative_angle(&g, &m.sample_estimate(&g, &mut rng)))
            .collect();
        let d = ks_statistic(xs, theta_cdf);
        assert!(d < 1.628 / (100_000f64).sqrt(), "KS {d}");
    }

    #[test]
    fn three_spin_sampling_matches_quadrature() {
        let spec = EncodingSpec::new(3).unwrap();
        let want = average_error(&spec, &HaarGrid::default()).unwrap();
        let m = LikelihoodModel::new(spec);
        let mut rng = stream(15);
        let g = haar_sample(&mut rng);
        let n = 100_000;
        let es: Vec<f64> = (0..n)
            .map(|_| {
                8.0 * relative_angle(&g, &m.sample_estimate(&g, &mut rng))
                    .sin()
                    .powi(2)
            })
            .collect();
        let mean = es.iter().sum::<f64>() / n as f64;
        let var = es.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(
            (mean - want).abs() < 3.0 * (var / n as f64).sqrt(),
            "{mean} vs {want}"
        );
    }

    #[test]
    fn sampling_is_deterministic() {
        let m = model(7);
        let g = haar_sample(&mut stream(16));
        let a = m.sample_estimate(&g, &mut stream(17));
        let b = m.sample_estimate(&g, &mut stream(17));
        assert_eq!(
            a.components().map(f64::to_bits),
            b.components().map(f64::to_bits)
        );
    }

    #[test]
    fn transmission_error_examples() {
        let mut rng = stream(18);
        for _ in 0..100 {
            let g = haar_sample(&mut rng);
            let h = haar_sample(&mut rng);
            assert!(transmission_error(&g, &g) < 1e-12);
            assert!(transmission_error(&g, &-g) < 1e-12);
            // Explicit sum over rotated basis vectors.
            let (r, s) = (h.to_rotation(), g.to_rotation());
            let mut direct = 0.0;
            for a in 0..3 {
                let mut e = [0.0; 3];
                e[a] = 1.0;
                let (u, v) = (r.apply(e), s.apply(e));
                direct += (0..3).map(|i| (u[i] - v[i]).powi(2)).sum::<f64>();
            }
            assert!((transmission_error(&h, &g) - direct).abs() < 1e-12);
            let theta = relative_angle(&g, &h);
            assert!((direct - 8.0 * theta.sin().powi(2)).abs() < 1e-10);
        }
        let g = haar_sample(&mut rng);
        let h = Su2Element::from_angles(PI / 2.0, 0.7, 1.3).unwrap();
        assert!((transmission_error(&g.compose(&h), &g) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn average_error_examples() {
        let grid = HaarGrid::default();
        let e2 = average_error(&EncodingSpec::new(2).unwrap(), &grid).unwrap();
        assert!((e2 - 6.0).abs() < 1e-10);
        let e3 = average_error(&EncodingSpec::new(3).unwrap(), &grid).unwrap();
        assert!((e3 - 4.0).abs() < 1e-10);
        let e5 = average_error(&EncodingSpec::new(5).unwrap(), &grid).unwrap();
        assert!((e5 - 2.0).abs() < 1e-10);
        let spec = EncodingSpec::new(400).unwrap();
        let e = average_error(&spec, &HaarGrid::for_spins(400)).unwrap();
        let target = 8.0 * PI * PI;
        assert!((400.0 * 400.0 * e - target).abs() < 0.05 * target);
    }

    #[test]
    fn average_error_requires_resolution() {
        let spec = EncodingSpec::new(101).unwrap();
        assert!(matches!(
            average_error(&spec, &HaarGrid::default()),
            Err(Error::Resolution { .. })
        ));
    }

    #[test]
    fn average_error_decreases_for_odd_n() {
        let mut last = f64::INFINITY;
        for n in (3..=101).step_by(2) {
            let e = average_error(&EncodingSpec::new(n).unwrap(), &HaarGrid::for_spins(n)).unwrap();
            assert!(e <= last, "N={n}");
            last = e;
        }
    }

    #[test]
    fn overlap_asymptotics() {
        let spec = EncodingSpec::new(300).unwrap();
        let b = crate::encoding::b_norm_squared(300).unwrap();
        let ratio = overlap(&spec, 0.0) / b.sqrt();
        assert!((ratio / (6f64.sqrt() / PI) - 1.0).abs() < 0.02);
        let j: f64 = 150.0;
        let growth = overlap(&spec, 0.0) / (2.0 * 2f64.sqrt() / PI * j.powf(1.5));
        assert!((growth - 1.0).abs() < 0.02);
    }
}
