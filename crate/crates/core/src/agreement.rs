//! Several observers decoding the same source frame: priors over the
//! source, the joint density of their estimates, Monte Carlo rounds,
//! covariant-agreement metrics and delta-convergence probes.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;
use rand::Rng;

use crate::disturbance::sinc;
use crate::encoding::EncodingSpec;
use crate::likelihood::{overlap, transmission_error, LikelihoodModel};
use crate::quadrature::GaussLegendre;
use crate::rng::{derive_seed, stream};
use crate::su2::{
    haar_sample, random_direction, relative_angle, HaarGrid, So3Rotation, Su2Element,
    PANELS_PER_OSCILLATION,
};
use crate::{Error, Result};

/// Distribution of the source frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriorSpec {
    /// Haar measure.
    Uniform,
    /// `∝ exp(−d²/2s²)` where `d ∈ [0, π/2]` is half the rotation angle
    /// between `R(g)` and `R(mean)`.
    Concentrated { mean: Su2Element, spread: f64 },
}

impl PriorSpec {
    pub fn concentrated(mean: Su2Element, spread: f64) -> Result<Self> {
        if !(spread > 0.0) || !spread.is_finite() {
            return Err(Error::Domain("prior spread must be positive and finite"));
        }
        Ok(Self::Concentrated { mean, spread })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Uniform => "uniform",
            Self::Concentrated { .. } => "concentrated",
        }
    }
}

/// Width of the concentrated prior's support, in spreads.
const PRIOR_CUTOFF_SPREADS: f64 = 12.0;
const PRIOR_TABLE_INTERVALS: usize = 4096;

/// A normalized prior density with a sampler.
#[derive(Debug, Clone)]
pub struct Prior {
    spec: PriorSpec,
    norm: f64,
    cutoff: f64,
    cdf: Vec<f64>,
}

impl Prior {
    pub fn new(spec: PriorSpec) -> Result<Self> {
        let PriorSpec::Concentrated { spread, .. } = spec else {
            return Ok(Self {
                spec,
                norm: 1.0,
                cutoff: 0.5 * PI,
                cdf: Vec::new(),
            });
        };
        if !(spread > 0.0) || !spread.is_finite() {
            return Err(Error::Domain("prior spread must be positive and finite"));
        }
        let cutoff = (PRIOR_CUTOFF_SPREADS * spread).min(0.5 * PI);
        // Haar mass of d ∈ [a, b], counting both caps θ = d and θ = π − d.
        let shape = |d: f64| 4.0 / PI * d.sin().powi(2) * (-0.5 * (d / spread).powi(2)).exp();
        let rule = GaussLegendre::new(4);
        let step = cutoff / PRIOR_TABLE_INTERVALS as f64;
        let mut cdf = Vec::with_capacity(PRIOR_TABLE_INTERVALS + 1);
        let mut acc = 0.0;
        cdf.push(0.0);
        for i in 0..PRIOR_TABLE_INTERVALS {
            let a = i as f64 * step;
            acc += rule.integrate(shape, a, a + step);
            cdf.push(acc);
        }
        if !(acc > 0.0) {
            return Err(Error::Domain("prior spread too small to normalize"));
        }
        for c in &mut cdf {
            *c /= acc;
        }
        Ok(Self {
            spec,
            norm: acc,
            cutoff,
            cdf,
        })
    }

    pub fn spec(&self) -> &PriorSpec {
        &self.spec
    }

    /// Every `g` with nonnegligible density has `d ≤ support()` from the mean.
    pub fn support(&self) -> f64 {
        self.cutoff
    }

    /// Density with respect to normalized Haar measure.
    pub fn density(&self, g: &Su2Element) -> f64 {
        match self.spec {
            PriorSpec::Uniform => 1.0,
            PriorSpec::Concentrated { mean, spread } => {
                let t = relative_angle(&mean, g);
                let d = t.min(PI - t);
                (-0.5 * (d / spread).powi(2)).exp() / self.norm
            }
        }
    }

    /// Draws a source frame.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Su2Element {
        match self.spec {
            PriorSpec::Uniform => haar_sample(rng),
            PriorSpec::Concentrated { mean, .. } => {
                let u = rng.random::<f64>();
                let i = self
                    .cdf
                    .partition_point(|&c| c < u)
                    .clamp(1, self.cdf.len() - 1);
                let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
                let step = self.cutoff / PRIOR_TABLE_INTERVALS as f64;
                let frac = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.0 };
                let d = ((i - 1) as f64 + frac.clamp(0.0, 1.0)) * step;
                let theta = if rng.random::<bool>() { d } else { PI - d };
                mean.compose(&random_direction(theta, rng))
            }
        }
    }

    /// `∫ p₀(g) f(g) dg`, over the caps around `±mean` for a concentrated prior.
    pub fn integrate<F: FnMut(&Su2Element) -> f64>(&self, grid: &HaarGrid, mut f: F) -> f64 {
        match self.spec {
            PriorSpec::Uniform => grid.integrate(f),
            PriorSpec::Concentrated { mean, .. } => {
                grid.integrate_caps(&mean, self.cutoff, |g| self.density(g) * f(g))
            }
        }
    }
}

/// `k` observers with known frame rotations `g_i` and a source prior.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverScenario {
    pub n_spins: usize,
    pub observers: Vec<Su2Element>,
    pub prior: PriorSpec,
}

impl ObserverScenario {
    pub fn new(n_spins: usize, observers: Vec<Su2Element>, prior: PriorSpec) -> Result<Self> {
        if n_spins < 2 {
            return Err(Error::Domain("n_spins must be at least 2"));
        }
        if observers.is_empty() {
            return Err(Error::Domain("at least one observer is required"));
        }
        Ok(Self {
            n_spins,
            observers,
            prior,
        })
    }

    pub fn k(&self) -> usize {
        self.observers.len()
    }
}

/// One round: source frame, every observer's estimate and the metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRecord {
    pub source_frame: Su2Element,
    pub estimates: Vec<Su2Element>,
    /// `e(g′_i, g·g_i)` per observer.
    pub alignment_errors: Vec<f64>,
    /// Pairs `(0,1), (0,2), …, (1,2), …` in order.
    pub pairwise_angles: Vec<f64>,
    pub seed: u64,
}

/// `∫ dg p₀(g) Π_i p(g′_i | g·g_i)`.
///
/// A uniform prior with one observer reduces to a class-function integral;
/// everything else is integrated over all three angles and needs a grid
/// that resolves `p` in each of them.
pub fn joint_density(
    scn: &ObserverScenario,
    estimates: &[Su2Element],
    grid: &HaarGrid,
) -> Result<f64> {
    if estimates.len() != scn.k() {
        return Err(Error::Domain("one estimate per observer is required"));
    }
    let spec = EncodingSpec::new(scn.n_spins)?;
    let p = |t: f64| overlap(&spec, t).powi(2);
    if scn.prior == PriorSpec::Uniform && scn.k() == 1 {
        grid.check_theta(scn.n_spins, PANELS_PER_OSCILLATION)?;
        return Ok(grid.integrate_class(p));
    }
    grid.check_full(scn.n_spins)?;
    let prior = Prior::new(scn.prior)?;
    Ok(prior.integrate(grid, |g| {
        scn.observers
            .iter()
            .zip(estimates)
            .map(|(gi, est)| p(relative_angle(&g.compose(gi), est)))
            .product()
    }))
}

/// Rotation angle of `R(g′_j)⁻¹ R(g′_i) (R(g_j)⁻¹ R(g_i))⁻¹` for every pair
/// `i < j`; zero when the estimates agree covariantly.
pub fn pairwise_consistency(estimates: &[Su2Element], observers: &[Su2Element]) -> Vec<f64> {
    let k = estimates.len().min(observers.len());
    let mut out = Vec::with_capacity(k * k.saturating_sub(1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            let q = estimates[j]
                .inverse()
                .compose(&estimates[i])
                .compose(&observers[i].inverse())
                .compose(&observers[j]);
            out.push(rotation_angle(&q));
        }
    }
    out
}

/// Rotation angle of `R(q)` in `[0, π]`.
pub fn rotation_angle(q: &Su2Element) -> f64 {
    let [w, x, y, z] = q.components();
    2.0 * (x * x + y * y + z * z).sqrt().atan2(w.abs())
}

/// Builds the likelihood table and prior once, then draws rounds.
#[derive(Debug, Clone)]
pub struct Simulator {
    scenario: ObserverScenario,
    model: LikelihoodModel,
    prior: Prior,
}

impl Simulator {
    pub fn new(scenario: ObserverScenario) -> Result<Self> {
        let model = LikelihoodModel::new(EncodingSpec::new(scenario.n_spins)?);
        let prior = Prior::new(scenario.prior)?;
        Ok(Self {
            scenario,
            model,
            prior,
        })
    }

    /// Uses a prebuilt likelihood model, e.g. one with a custom table
    /// resolution. Fails if the model's spin count differs.
    pub fn with_model(scenario: ObserverScenario, model: LikelihoodModel) -> Result<Self> {
        if model.spec().n_spins() != scenario.n_spins {
            return Err(Error::Domain(
                "likelihood model is for a different spin count",
            ));
        }
        let prior = Prior::new(scenario.prior)?;
        Ok(Self {
            scenario,
            model,
            prior,
        })
    }

    pub fn scenario(&self) -> &ObserverScenario {
        &self.scenario
    }

    pub fn model(&self) -> &LikelihoodModel {
        &self.model
    }

    /// One round driven by a fresh stream seeded with `seed`.
    pub fn simulate_round(&self, seed: u64) -> SimulationRecord {
        let mut rng = stream(seed);
        let source = self.prior.sample(&mut rng);
        let truths: Vec<Su2Element> = self
            .scenario
            .observers
            .iter()
            .map(|gi| source.compose(gi))
            .collect();
        let estimates: Vec<Su2Element> = truths
            .iter()
            .map(|t| self.model.sample_estimate(t, &mut rng))
            .collect();
        let alignment_errors = estimates
            .iter()
            .zip(&truths)
            .map(|(e, t)| transmission_error(e, t))
            .collect();
        let pairwise_angles = pairwise_consistency(&estimates, &self.scenario.observers);
        SimulationRecord {
            source_frame: source,
            estimates,
            alignment_errors,
            pairwise_angles,
            seed,
        }
    }

    /// `rounds` rounds with seeds derived from `master_seed`, in order.
    pub fn run(&self, master_seed: u64, rounds: usize) -> Vec<SimulationRecord> {
        (0..rounds as u64)
            .map(|i| self.simulate_round(derive_seed(master_seed, i)))
            .collect()
    }
}

/// One round for `scn`; builds a [`Simulator`] on every call.
pub fn simulate_round(scn: &ObserverScenario, seed: u64) -> Result<SimulationRecord> {
    Ok(Simulator::new(scn.clone())?.simulate_round(seed))
}

/// `∫ dg p(g_ref | g) f(R(g))`, which tends to `f(R(g_ref))` as `N` grows.
pub fn delta_convergence_probe<F: FnMut(&So3Rotation) -> f64>(
    n_spins: usize,
    g_ref: &Su2Element,
    mut f: F,
    grid: &HaarGrid,
) -> Result<f64> {
    let spec = EncodingSpec::new(n_spins)?;
    grid.check_theta(n_spins, PANELS_PER_OSCILLATION)?;
    Ok(grid.integrate_shells(
        |t| overlap(&spec, t).powi(2),
        |h| f(&g_ref.compose(h).to_rotation()),
    ))
}

/// `η(x) = 2π sin²x / (x² − π²)²`, a unit-mass bump of width `O(π)`.
pub fn eta(x: f64) -> f64 {
    let a = x.abs();
    // sin²x/(x−π)² = sinc²(x−π)
    2.0 * PI * (sinc(a - PI) / (a + PI)).powi(2)
}

/// `∫_{−X}^{X} η(x) dx`.
pub fn eta_mass(x_max: f64) -> f64 {
    if !(x_max > 0.0) {
        return 0.0;
    }
    let rule = GaussLegendre::new(8);
    let panels = (x_max / (0.25 * PI)).ceil() as usize;
    2.0 * rule.composite(eta, 0.0, x_max, panels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::likelihood::average_error;
    use crate::stats::{ks_critical_two, ks_two_sample, median, Summary};
    use std::vec;

    fn random_observers(k: usize, seed: u64) -> Vec<Su2Element> {
        let mut rng = stream(seed);
        (0..k).map(|_| haar_sample(&mut rng)).collect()
    }

    #[test]
    fn uniform_single_observer_marginal_is_one() {
        let mut rng = stream(20);
        for n in [2, 3, 8, 21] {
            let scn =
                ObserverScenario::new(n, random_observers(1, 21), PriorSpec::Uniform).unwrap();
            let grid = HaarGrid::for_spins(n);
            let est = [haar_sample(&mut rng)];
            assert!((joint_density(&scn, &est, &grid).unwrap() - 1.0).abs() < 1e-6);
        }
        // A very broad concentrated prior goes through the three-angle path.
        let scn = ObserverScenario::new(
            4,
            random_observers(1, 22),
            PriorSpec::concentrated(Su2Element::IDENTITY, 1e3).unwrap(),
        )
        .unwrap();
        let est = [haar_sample(&mut rng)];
        let v = joint_density(&scn, &est, &HaarGrid::for_spins_full(4)).unwrap();
        assert!((v - 1.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn narrow_prior_is_a_point_mass() {
        let mut rng = stream(23);
        let star = haar_sample(&mut rng);
        let observers = random_observers(2, 24);
        let scn = ObserverScenario::new(
            3,
            observers.clone(),
            PriorSpec::concentrated(star, 1e-3).unwrap(),
        )
        .unwrap();
        let spec = EncodingSpec::new(3).unwrap();
        let grid = HaarGrid::for_spins_full(3);
        for _ in 0..10 {
            let est: Vec<Su2Element> = observers
                .iter()
                .map(|gi| {
                    let off = Su2Element::from_angles(0.4 * rng.random::<f64>(), 1.0, 2.0).unwrap();
                    star.compose(gi).compose(&off)
                })
                .collect();
            let direct: f64 = observers
                .iter()
                .zip(&est)
                .map(|(gi, e)| overlap(&spec, relative_angle(&star.compose(gi), e)).powi(2))
                .product();
            let v = joint_density(&scn, &est, &grid).unwrap();
            assert!((v / direct - 1.0).abs() < 0.01, "{v} vs {direct}");
        }
    }

    #[test]
    fn aligned_estimates_beat_anti_aligned() {
        let observers = random_observers(2, 25);
        let scn = ObserverScenario::new(3, observers.clone(), PriorSpec::Uniform).unwrap();
        let grid = HaarGrid::for_spins_full(3);
        let mut rng = stream(26);
        for _ in 0..100 {
            let star = haar_sample(&mut rng);
            let aligned: Vec<Su2Element> = observers.iter().map(|gi| star.compose(gi)).collect();
            let flip = Su2Element::from_angles(PI / 2.0, rng.random::<f64>() * PI, 0.0).unwrap();
            let anti = vec![aligned[0], aligned[1].compose(&flip)];
            let a = joint_density(&scn, &aligned, &grid).unwrap();
            let b = joint_density(&scn, &anti, &grid).unwrap();
            assert!(a > b, "{a} <= {b}");
        }
    }

    #[test]
    fn joint_density_right_translation_invariance() {
        let observers = random_observers(2, 27);
        let mut rng = stream(28);
        let est: Vec<Su2Element> = (0..2).map(|_| haar_sample(&mut rng)).collect();
        let h = haar_sample(&mut rng);
        let grid = HaarGrid::for_spins_full(5);
        let scn = ObserverScenario::new(5, observers.clone(), PriorSpec::Uniform).unwrap();
        let moved = ObserverScenario::new(
            5,
            observers.iter().map(|g| g.compose(&h)).collect(),
            PriorSpec::Uniform,
        )
        .unwrap();
        let est_moved: Vec<Su2Element> = est.iter().map(|g| g.compose(&h)).collect();
        let a = joint_density(&scn, &est, &grid).unwrap();
        let b = joint_density(&moved, &est_moved, &grid).unwrap();
        assert!((a - b).abs() < 1e-8 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn joint_density_errors() {
        let scn = ObserverScenario::new(41, random_observers(2, 29), PriorSpec::Uniform).unwrap();
        let est = random_observers(2, 30);
        assert!(matches!(
            joint_density(&scn, &est, &HaarGrid::default()),
            Err(Error::Resolution { .. })
        ));
        assert!(joint_density(&scn, &est[..1], &HaarGrid::default()).is_err());
        assert!(ObserverScenario::new(3, vec![], PriorSpec::Uniform).is_err());
        assert!(PriorSpec::concentrated(Su2Element::IDENTITY, 0.0).is_err());
    }

    #[test]
    fn prior_is_normalized() {
        let mean = haar_sample(&mut stream(31));
        for spread in [1e-3, 0.05, 0.3, 1.0, 10.0] {
            let prior = Prior::new(PriorSpec::concentrated(mean, spread).unwrap()).unwrap();
            let grid = HaarGrid::new(32, 4, 4, 8).unwrap();
            let mass = prior.integrate(&grid, |_| 1.0);
            assert!((mass - 1.0).abs() < 1e-6, "spread {spread}: {mass}");
            // Same mass when the caps are taken over the whole group.
            let whole = grid.integrate_caps(&mean, PI / 2.0, |g| prior.density(g));
            if spread >= 0.3 {
                assert!((whole - 1.0).abs() < 1e-6);
            }
            assert_eq!(prior.density(&mean), prior.density(&-mean));
        }
        let u = Prior::new(PriorSpec::Uniform).unwrap();
        assert_eq!(u.density(&mean), 1.0);
    }

    #[test]
    fn prior_samples_follow_density() {
        let mean = haar_sample(&mut stream(32));
        let spread = 0.2;
        let prior = Prior::new(PriorSpec::concentrated(mean, spread).unwrap()).unwrap();
        let mut rng = stream(33);
        let n = 50_000;
        let ds: Vec<f64> = (0..n)
            .map(|_| {
                let t = relative_angle(&mean, &prior.sample(&mut rng));
                t.min(PI - t)
            })
            .collect();
        // E[d²] by quadrature of the d-marginal.
        let rule = GaussLegendre::new(8);
        let shape = |d: f64| d.sin().powi(2) * (-0.5 * (d / spread).powi(2)).exp();
        let z = rule.composite(shape, 0.0, PI / 2.0, 64);
        let m2 = rule.composite(|d| d * d * shape(d), 0.0, PI / 2.0, 64) / z;
        let s = Summary::of(&ds.iter().map(|d| d * d).collect::<Vec<_>>()).unwrap();
        assert!(
            (s.mean - m2).abs() < 3.0 * s.std_error,
            "{} vs {m2}",
            s.mean
        );
    }

    #[test]
    fn single_observer_round() {
        let scn = ObserverScenario::new(7, random_observers(1, 34), PriorSpec::Uniform).unwrap();
        let sim = Simulator::new(scn.clone()).unwrap();
        let r = sim.simulate_round(99);
        assert!(r.pairwise_angles.is_empty());
        assert_eq!(r.seed, 99);
        let truth = r.source_frame.compose(&scn.observers[0]);
        assert_eq!(
            r.alignment_errors,
            vec![transmission_error(&r.estimates[0], &truth)]
        );
        assert_eq!(simulate_round(&scn, 99).unwrap(), r);
    }

    #[test]
    fn rounds_are_deterministic() {
        let scn = ObserverScenario::new(
            11,
            random_observers(3, 35),
            PriorSpec::concentrated(haar_sample(&mut stream(36)), 0.3).unwrap(),
        )
        .unwrap();
        let sim = Simulator::new(scn).unwrap();
        let a = sim.run(5, 20);
        let b = sim.run(5, 20);
        assert_eq!(a, b);
        assert_ne!(a[0], a[1]);
        for r in &a {
            assert!(r.alignment_errors.iter().all(|e| (0.0..=8.0).contains(e)));
            assert!(r.pairwise_angles.iter().all(|t| (0.0..=PI).contains(t)));
            assert_eq!(r.pairwise_angles.len(), 3);
        }
    }

    #[test]
    fn exact_estimates_agree_covariantly() {
        let obs = random_observers(4, 37);
        let g = haar_sample(&mut stream(38));
        let est: Vec<Su2Element> = obs.iter().map(|gi| g.compose(gi)).collect();
        let angles = pairwise_consistency(&est, &obs);
        assert_eq!(angles.len(), 6);
        assert!(angles.iter().all(|&a| a < 1e-7));
        // Sign flips of individual estimates leave the rotations unchanged.
        let flipped: Vec<Su2Element> = est.iter().map(|e| -*e).collect();
        assert!(pairwise_consistency(&flipped, &obs)
            .iter()
            .all(|&a| a < 1e-7));
        assert!(pairwise_consistency(&est[..1], &obs[..1]).is_empty());
    }

    #[test]
    fn pairwise_angle_matches_matrix_oracle() {
        let mut rng = stream(39);
        for _ in 0..100 {
            let obs = random_observers(2, rng.random());
            let est: Vec<Su2Element> = (0..2).map(|_| haar_sample(&mut rng)).collect();
            let r = |g: &Su2Element| g.to_rotation();
            let m = r(&est[1])
                .transpose()
                .compose(&r(&est[0]))
                .compose(&r(&obs[1]).transpose().compose(&r(&obs[0])).transpose());
            let want = m.angle();
            let got = pairwise_consistency(&est, &obs)[0];
            assert!((want - got).abs() < 1e-6, "{want} vs {got}");
        }
    }

    #[test]
    fn mean_alignment_error_matches_quadrature() {
        let scn = ObserverScenario::new(101, random_observers(3, 40), PriorSpec::Uniform).unwrap();
        let sim = Simulator::new(scn).unwrap();
        let errors: Vec<f64> = sim
            .run(41, 1000)
            .iter()
            .flat_map(|r| r.alignment_errors.clone())
            .collect();
        let s = Summary::of(&errors).unwrap();
        let grid = HaarGrid::for_spins(101);
        let spec = sim.model().spec();
        let want = average_error(spec, &grid).unwrap();
        // The error distribution is heavy-tailed, so the sample spread
        // understates the standard error; take the spread from quadrature.
        let second = grid.integrate_class(|t| overlap(spec, t).powi(2) * 64.0 * t.sin().powi(4));
        let se = ((second - want * want) / errors.len() as f64).sqrt();
        assert!(
            (s.mean - want).abs() < 3.0 * se,
            "{} vs {want} (se {se})",
            s.mean
        );
    }

    #[test]
    fn gauge_covariance() {
        let obs = random_observers(3, 42);
        let h = haar_sample(&mut stream(43));
        let moved: Vec<Su2Element> = obs.iter().map(|g| g.compose(&h)).collect();
        let errs = |o: Vec<Su2Element>| -> Vec<f64> {
            let sim =
                Simulator::new(ObserverScenario::new(25, o, PriorSpec::Uniform).unwrap()).unwrap();
            sim.run(44, 1000)
                .iter()
                .flat_map(|r| r.alignment_errors.clone())
                .collect()
        };
        let (a, b) = (errs(obs), errs(moved));
        assert!(ks_two_sample(&a, &b) < ks_critical_two(a.len(), b.len()));
    }

    #[test]
    fn median_offset_shrinks_with_n() {
        let obs = random_observers(3, 45);
        let mut last = [f64::INFINITY; 3];
        for n in [25, 51, 101, 201] {
            let sim =
                Simulator::new(ObserverScenario::new(n, obs.clone(), PriorSpec::Uniform).unwrap())
                    .unwrap();
            let recs = sim.run(46, 1000);
            for (i, prev) in last.iter_mut().enumerate() {
                let m = median(
                    &recs
                        .iter()
                        .map(|r| relative_angle(&r.source_frame.compose(&obs[i]), &r.estimates[i]))
                        .map(|t| t.min(PI - t))
                        .collect::<Vec<_>>(),
                )
                .unwrap();
                assert!(m < *prev, "N={n} observer {i}");
                *prev = m;
            }
        }
    }

    #[test]
    fn probe_of_constant() {
        let g = haar_sample(&mut stream(47));
        for n in [2, 5, 31] {
            let grid = HaarGrid::new(4 * n, 4, 8, 8).unwrap();
            let v = delta_convergence_probe(n, &g, |_| 2.5, &grid).unwrap();
            assert!((v - 2.5).abs() < 1e-6);
        }
        assert!(delta_convergence_probe(101, &g, |_| 1.0, &HaarGrid::default()).is_err());
    }

    #[test]
    fn probe_converges() {
        let probe = |n: usize, g: &Su2Element, f: fn(&So3Rotation) -> f64| {
            let grid = HaarGrid::new(PANELS_PER_OSCILLATION * (n - 2), 4, 8, 8).unwrap();
            delta_convergence_probe(n, g, f, &grid).unwrap()
        };
        let r11 = |r: &So3Rotation| r.matrix()[0][0];
        let id = Su2Element::IDENTITY;
        let d51 = (probe(51, &id, r11) - 1.0).abs();
        let d201 = (probe(201, &id, r11) - 1.0).abs();
        assert!(d201 < d51, "{d201} vs {d51}");
        let g = haar_sample(&mut stream(48));
        let tr = probe(201, &g, |r| r.trace());
        assert!((tr - g.to_rotation().trace()).abs() < 0.05);
    }

    #[test]
    fn eta_normalization() {
        assert!((eta_mass(1e4) - 1.0).abs() < 1e-4);
        assert!((eta(PI) - 2.0 * PI / (4.0 * PI * PI)).abs() < 1e-15);
        assert!((eta(-PI) - eta(PI)).abs() < 1e-15);
        assert!(eta(0.0).abs() < 1e-30);
        let x = 1.234;
        let direct = 2.0 * PI * x.sin().powi(2) / (x * x - PI * PI).powi(2);
        assert!((eta(x) - direct).abs() < 1e-15);
    }
}
