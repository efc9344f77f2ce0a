//! Brute force in the `2^N`-dimensional product space for `N ≤ 6`.
//!
//! Spins are coupled left to right with Clebsch–Gordan coefficients from
//! the exact Racah sum. Copies of each spin-`j` irrep are labelled by the
//! lexicographic order of their intermediate-spin paths. Product-basis
//! index bit `N − 1 − q` holds spin `q`; bit value 0 is `m = +½`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{Float, Signed, ToPrimitive, Zero};

use crate::encoding::{b_norm_squared, multiplicity, EncodingSpec};
use crate::likelihood::{character, overlap};
use crate::rng::stream;
use crate::su2::{haar_sample, relative_angle, HaarGrid, Su2Element};
use crate::{Error, Result};

/// Largest spin count handled here.
pub const MAX_SPINS: usize = 6;

/// Tolerance on the imaginary part of overlaps.
const REAL_TOL: f64 = 1e-10;

type Q = Ratio<i128>;

fn factorial(n: i64) -> i128 {
    (1..=n as i128).product()
}

/// `⟨j₁ m₁; j₂ m₂ | j m⟩` with every argument doubled.
pub fn clebsch_gordan(tj1: i64, tm1: i64, tj2: i64, tm2: i64, tj: i64, tm: i64) -> f64 {
    let parity_ok = |tj: i64, tm: i64| tj >= 0 && tm.abs() <= tj && (tj - tm) % 2 == 0;
    if tm1 + tm2 != tm
        || !parity_ok(tj1, tm1)
        || !parity_ok(tj2, tm2)
        || !parity_ok(tj, tm)
        || tj < (tj1 - tj2).abs()
        || tj > tj1 + tj2
        || (tj1 + tj2 - tj) % 2 != 0
    {
        return 0.0;
    }
    // Undoubled integer combinations.
    let h = |x: i64| x / 2;
    let (a, b, c) = (h(tj1 + tj2 - tj), h(tj1 - tj2 + tj), h(-tj1 + tj2 + tj));
    let delta = Q::new(
        factorial(a) * factorial(b) * factorial(c),
        factorial(h(tj1 + tj2 + tj) + 1),
    );
    let pre = delta
        * Q::from_integer(
            (tj as i128 + 1)
                * factorial(h(tj + tm))
                * factorial(h(tj - tm))
                * factorial(h(tj1 - tm1))
                * factorial(h(tj1 + tm1))
                * factorial(h(tj2 - tm2))
                * factorial(h(tj2 + tm2)),
        );
    let mut sum = Q::zero();
    for k in 0..=a {
        let d = [
            a - k,
            h(tj1 - tm1) - k,
            h(tj2 + tm2) - k,
            h(tj - tj2 + tm1) + k,
            h(tj - tj1 - tm2) + k,
        ];
        if d.iter().any(|&x| x < 0) {
            continue;
        }
        let den = d.iter().fold(factorial(k), |acc, &x| acc * factorial(x));
        let term = Q::new(1, den);
        sum = if k % 2 == 0 { sum + term } else { sum - term };
    }
    let square = pre * sum * sum;
    let magnitude = (*square.numer() as f64 / *square.denom() as f64).sqrt();
    if sum.is_negative() {
        -magnitude
    } else {
        magnitude
    }
}

/// One spin-`j` irrep copy inside the product space.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub two_j: usize,
    /// 1-based copy label within its spin.
    pub alpha: usize,
    /// Doubled intermediate spins after coupling 1, 2, …, N spins.
    pub path: Vec<usize>,
    /// Column `i` is `|j α, m = j − i⟩` in the product basis.
    pub columns: Vec<Vec<Complex64>>,
}

impl Block {
    /// The column for doubled projection `two_m`.
    pub fn column(&self, two_m: i64) -> Option<&[Complex64]> {
        let tj = self.two_j as i64;
        if two_m.abs() > tj || (tj - two_m) % 2 != 0 {
            return None;
        }
        Some(&self.columns[((tj - two_m) / 2) as usize])
    }
}

/// Complete coupled basis of `(ℂ²)^{⊗N}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingTree {
    pub n_spins: usize,
    /// Sorted by `two_j` descending, then by `alpha`.
    pub blocks: Vec<Block>,
}

impl CouplingTree {
    pub fn dimension(&self) -> usize {
        1 << self.n_spins
    }

    pub fn blocks_with_spin(&self, two_j: usize) -> impl Iterator<Item = &Block> {
        self.blocks.iter().filter(move |b| b.two_j == two_j)
    }
}

/// Sequential left-to-right coupling of `n_spins` spin-½ particles.
pub fn coupled_basis(n_spins: usize) -> Result<CouplingTree> {
    if !(2..=MAX_SPINS).contains(&n_spins) {
        return Err(Error::Domain("oracle handles 2 to 6 spins"));
    }
    let up = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    let down = vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
    let mut partial: Vec<(Vec<usize>, Vec<Vec<Complex64>>)> = vec![(vec![1], vec![up, down])];
    for _ in 1..n_spins {
        let mut next = Vec::new();
        for (path, cols) in &partial {
            let tj = *path.last().expect("paths are nonempty") as i64;
            let dim = cols[0].len();
            for tj_new in [tj + 1, tj - 1] {
                if tj_new < 0 {
                    continue;
                }
                let mut new_cols = Vec::new();
                for i in 0..=tj_new {
                    let tm = tj_new - 2 * i;
                    let mut v = vec![Complex64::new(0.0, 0.0); 2 * dim];
                    for (s, tms) in [(0usize, 1i64), (1, -1)] {
                        let tm1 = tm - tms;
                        let c = clebsch_gordan(tj, tm1, 1, tms, tj_new, tm);
                        if c == 0.0 {
                            continue;
                        }
                        let col = &cols[((tj - tm1) / 2) as usize];
                        for (idx, amp) in col.iter().enumerate() {
                            v[2 * idx + s] += amp * c;
                        }
                    }
                    new_cols.push(v);
                }
                let mut p = path.clone();
                p.push(tj_new as usize);
                next.push((p, new_cols));
            }
        }
        partial = next;
    }
    partial.sort_by(|a, b| a.0.cmp(&b.0));
    let mut blocks: Vec<Block> = Vec::new();
    for (path, columns) in partial {
        let two_j = *path.last().expect("paths are nonempty");
        let alpha = blocks.iter().filter(|b| b.two_j == two_j).count() + 1;
        blocks.push(Block {
            two_j,
            alpha,
            path,
            columns,
        });
    }
    blocks.sort_by(|a, b| b.two_j.cmp(&a.two_j).then(a.alpha.cmp(&b.alpha)));
    Ok(CouplingTree { n_spins, blocks })
}

/// A vector in the product space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Doubled `m(α) = α − j − 1`.
pub fn two_m_of_alpha(two_j: usize, alpha: usize) -> i64 {
    2 * alpha as i64 - two_j as i64 - 2
}

/// `|A⟩` and `|B⟩` in the product basis.
pub fn build_state_vectors(n_spins: usize) -> Result<(StateVector, StateVector)> {
    let tree = coupled_basis(n_spins)?;
    Ok(states_from_tree(&tree, &EncodingSpec::new(n_spins)?))
}

fn states_from_tree(tree: &CouplingTree, spec: &EncodingSpec) -> (StateVector, StateVector) {
    let dim = tree.dimension();
    let mut a = vec![Complex64::new(0.0, 0.0); dim];
    let mut b = vec![Complex64::new(0.0, 0.0); dim];
    for (tj, coeff) in spec.terms() {
        let d = (tj + 1) as f64;
        for block in tree.blocks_with_spin(tj).take(tj + 1) {
            let col = block
                .column(two_m_of_alpha(tj, block.alpha))
                .expect("m(α) lies in range for α ≤ 2j + 1");
            for (i, amp) in col.iter().enumerate() {
                a[i] += amp * (coeff / d.sqrt());
                b[i] += amp * d.sqrt();
            }
        }
    }
    (StateVector { amplitudes: a }, StateVector { amplitudes: b })
}

/// `u^{⊗N} v`.
pub fn apply_tensor_power(u: &Su2Element, n_spins: usize, v: &[Complex64]) -> Vec<Complex64> {
    let m = u.matrix();
    let mut out = v.to_vec();
    for q in 0..n_spins {
        let bit = 1usize << (n_spins - 1 - q);
        for i in 0..out.len() {
            if i & bit != 0 {
                continue;
            }
            let (x0, x1) = (out[i], out[i | bit]);
            out[i] = m[0][0] * x0 + m[0][1] * x1;
            out[i | bit] = m[1][0] * x0 + m[1][1] * x1;
        }
    }
    out
}

/// `⟨A(g)|B(g′)⟩ = ⟨A|U(g⁻¹g′)|B⟩` computed in the product basis.
pub fn brute_overlap(n_spins: usize, g: &Su2Element, g_prime: &Su2Element) -> Result<f64> {
    let (a, b) = build_state_vectors(n_spins)?;
    overlap_with(&a, &b, n_spins, g, g_prime)
}

fn overlap_with(
    a: &StateVector,
    b: &StateVector,
    n_spins: usize,
    g: &Su2Element,
    g_prime: &Su2Element,
) -> Result<f64> {
    let u = g.inverse().compose(g_prime);
    let moved = StateVector {
        amplitudes: apply_tensor_power(&u, n_spins, &b.amplitudes),
    };
    let z = a.inner(&moved);
    if z.im.abs() > REAL_TOL {
        return Err(Error::NotReal(z.im));
    }
    Ok(z.re)
}

/// Precomputed `|A⟩`, `|B⟩` for repeated overlaps.
#[derive(Debug, Clone)]
pub struct Oracle {
    n_spins: usize,
    tree: CouplingTree,
    a: StateVector,
    b: StateVector,
}

impl Oracle {
    pub fn new(n_spins: usize) -> Result<Self> {
        let tree = coupled_basis(n_spins)?;
        let (a, b) = states_from_tree(&tree, &EncodingSpec::new(n_spins)?);
        Ok(Self {
            n_spins,
            tree,
            a,
            b,
        })
    }

    pub fn tree(&self) -> &CouplingTree {
        &self.tree
    }

    pub fn states(&self) -> (&StateVector, &StateVector) {
        (&self.a, &self.b)
    }

    pub fn overlap(&self, g: &Su2Element, g_prime: &Su2Element) -> Result<f64> {
        overlap_with(&self.a, &self.b, self.n_spins, g, g_prime)
    }

    /// `Σ_m ⟨j α m|U(g)|j α m⟩` for the given block.
    pub fn block_trace(&self, block: &Block, g: &Su2Element) -> Complex64 {
        block
            .columns
            .iter()
            .map(|c| {
                let moved = apply_tensor_power(g, self.n_spins, c);
                c.iter()
                    .zip(&moved)
                    .map(|(x, y)| x.conj() * y)
                    .sum::<Complex64>()
            })
            .sum()
    }
}

/// Outcome of one oracle check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub n_spins: usize,
    pub passed: bool,
    /// Largest observed deviation.
    pub deviation: f64,
    pub tolerance: f64,
}

/// Runs every oracle comparison for `N = 2..=max_spins` with `pairs`
/// Haar-random pairs per check.
pub fn run_checks(max_spins: usize, pairs: usize, seed: u64) -> Result<Vec<CheckOutcome>> {
    if !(2..=MAX_SPINS).contains(&max_spins) {
        return Err(Error::Domain("max_spins must lie in 2..=6"));
    }
    let mut out = Vec::new();
    let mut push = |name: &str, n: usize, deviation: f64, tolerance: f64| {
        out.push(CheckOutcome {
            name: String::from(name),
            n_spins: n,
            passed: deviation <= tolerance,
            deviation,
            tolerance,
        });
    };
    for n in 2..=max_spins {
        let oracle = Oracle::new(n)?;
        let spec = EncodingSpec::new(n)?;
        let mut rng = stream(seed ^ n as u64);

        push("gram_identity", n, gram_deviation(oracle.tree()), 1e-10);

        let mut worst_count: f64 = 0.0;
        for tj in (n % 2..=n).step_by(2) {
            let want = multiplicity(n, tj)?.to_f64().unwrap_or(f64::NAN);
            let got = oracle.tree().blocks_with_spin(tj).count() as f64;
            worst_count = worst_count.max((want - got).abs());
        }
        push("block_multiplicity", n, worst_count, 0.0);

        let (a, b) = oracle.states();
        push("a_norm", n, (a.norm_squared() - 1.0).abs(), 1e-10);
        push(
            "b_norm",
            n,
            (b.norm_squared() - b_norm_squared(n)?).abs(),
            1e-10,
        );

        let mut worst: f64 = 0.0;
        let mut worst_shift: f64 = 0.0;
        for _ in 0..pairs {
            let g = haar_sample(&mut rng);
            let gp = haar_sample(&mut rng);
            let h = haar_sample(&mut rng);
            let brute = oracle.overlap(&g, &gp)?;
            worst = worst.max((brute - overlap(&spec, relative_angle(&g, &gp))).abs());
            let shifted = oracle.overlap(&h.compose(&g), &h.compose(&gp))?;
            worst_shift = worst_shift.max((shifted - brute).abs());
        }
        push("overlap_vs_character_sum", n, worst, 1e-10);
        push("left_translation", n, worst_shift, 1e-10);

        let mut worst_char: f64 = 0.0;
        for _ in 0..pairs {
            let g = haar_sample(&mut rng);
            for block in &oracle.tree().blocks {
                let t = oracle.block_trace(block, &g);
                let want = character(block.two_j, g.angle());
                worst_char = worst_char.max((t - want).norm());
            }
        }
        push("block_character", n, worst_char, 1e-9);

        let grid = HaarGrid::for_spins_full(n);
        let o = &oracle;
        let mass = grid.integrate(|g| {
            o.overlap(&Su2Element::IDENTITY, g)
                .map(|v| v * v)
                .unwrap_or(f64::NAN)
        });
        push("povm_completeness", n, (mass - 1.0).abs(), 1e-4);
    }
    Ok(out)
}

/// `max |⟨c_i|c_k⟩ − δ_ik|` over all columns of the tree.
pub fn gram_deviation(tree: &CouplingTree) -> f64 {
    let cols: Vec<&Vec<Complex64>> = tree.blocks.iter().flat_map(|b| b.columns.iter()).collect();
    let mut worst: f64 = if cols.len() == tree.dimension() {
        0.0
    } else {
        f64::INFINITY
    };
    for (i, x) in cols.iter().enumerate() {
        for (k, y) in cols.iter().enumerate().skip(i) {
            let ip: Complex64 = x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum();
            let want = if i == k { 1.0 } else { 0.0 };
            worst = worst.max((ip - want).norm());
        }
    }
    worst
}

/// One line per check.
pub fn format_outcome(c: &CheckOutcome) -> String {
    format!(
        "{} N={} {} deviation={:.3e} tolerance={:.1e}",
        if c.passed { "PASS" } else { "FAIL" },
        c.n_spins,
        c.name,
        c.deviation,
        c.tolerance
    )
}
