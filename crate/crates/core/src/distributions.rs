//! Random instances on `[0, 1]` and entropy floors for the average case.

use num_bigint::BigUint;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::DistError;
use crate::polynomial::{Polynomial, Sign};
use crate::scalar::Scalar;

/// Above this many compositions the exact Dirichlet-multinomial entropy is refused.
pub const MAX_EXACT_COMPOSITIONS: f64 = 1e7;

/// How the `d` roots of a hidden polynomial are placed in `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RootModel {
    /// `d` independent uniform roots.
    Uniform { d: usize },
    /// The `d + 1` gaps between `0`, the sorted roots and `1` follow a
    /// symmetric Dirichlet(`alpha`).
    Dirichlet { d: usize, alpha: f64 },
}

impl RootModel {
    pub fn d(&self) -> usize {
        match *self {
            RootModel::Uniform { d } | RootModel::Dirichlet { d, .. } => d,
        }
    }

    pub fn validate(&self) -> Result<(), DistError> {
        match *self {
            RootModel::Dirichlet { alpha, .. } if !(alpha > 0.0 && alpha.is_finite()) => {
                Err(DistError::InvalidAlpha(alpha))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RootModel::Uniform { .. } => "uniform",
            RootModel::Dirichlet { .. } => "dirichlet",
        }
    }
}

/// Master seed plus stream index; together they fix every random draw of a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub master: u64,
    pub stream: u64,
}

impl Seed {
    /// ChaCha8 keyed by `master`, on ChaCha stream `stream`. Different streams
    /// of one key never overlap.
    pub fn rng(&self) -> ChaCha8Rng {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.stream);
        rng
    }
}

fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// `n` sorted distinct uniform draws from `[0, 1)`. Collisions are redrawn.
pub fn uniform_points<T: Scalar, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<T> {
    // non-negative floats order like their bit patterns, and integer sorts are faster
    let mut xs: Vec<u64> = (0..n).map(|_| rng.random::<f64>().to_bits()).collect();
    loop {
        xs.sort_unstable();
        xs.dedup();
        if xs.len() == n {
            break;
        }
        while xs.len() < n {
            xs.push(rng.random::<f64>().to_bits());
        }
    }
    xs.into_iter()
        .map(|x| T::from_f64(f64::from_bits(x)).expect("uniform draws are finite"))
        .collect()
}

/// Symmetric Dirichlet draw of length `parts`, via normalised Gamma(`alpha`, 1)
/// variables. Normalisation happens in `T`, so exact gaps sum to exactly 1.
pub fn dirichlet_gaps<T: Scalar, R: Rng + ?Sized>(
    parts: usize,
    alpha: f64,
    rng: &mut R,
) -> Result<Vec<T>, DistError> {
    let gamma = Gamma::new(alpha, 1.0).map_err(|_| DistError::InvalidAlpha(alpha))?;
    loop {
        let draws: Vec<f64> = (0..parts).map(|_| gamma.sample(rng)).collect();
        // tiny alpha can underflow to zero; redraw so every gap is positive
        if draws.iter().any(|&g| !(g > 0.0) || !g.is_finite()) {
            continue;
        }
        let draws: Vec<T> = draws.into_iter().map(|g| T::from_f64(g).expect("finite")).collect();
        let total = draws.iter().cloned().fold(T::zero(), |a, b| a + b);
        return Ok(draws.into_iter().map(|g| g / total.clone()).collect());
    }
}

/// Sorted, distinct roots strictly inside `(0, 1)`.
pub fn sample_roots<T: Scalar, R: Rng + ?Sized>(
    model: &RootModel,
    rng: &mut R,
) -> Result<Vec<T>, DistError> {
    model.validate()?;
    loop {
        let roots: Vec<T> = match *model {
            RootModel::Uniform { d } => {
                let mut r: Vec<f64> = (0..d).map(|_| open_unit(rng)).collect();
                r.sort_unstable_by(|a, b| a.total_cmp(b));
                r.into_iter().map(|x| T::from_f64(x).expect("finite")).collect()
            }
            RootModel::Dirichlet { d, alpha } => {
                let gaps = dirichlet_gaps::<T, _>(d + 1, alpha, rng)?;
                gaps.into_iter()
                    .take(d)
                    .scan(T::zero(), |acc, g| {
                        *acc = acc.clone() + g;
                        Some(acc.clone())
                    })
                    .collect()
            }
        };
        let inside = roots.iter().all(|r| *r > T::zero() && *r < T::one());
        let distinct = roots.windows(2).all(|w| w[0] < w[1]);
        if inside && distinct {
            return Ok(roots);
        }
    }
}

/// Hidden polynomial `leading * prod (x - r_j)` with roots drawn from `model`.
pub fn sample_hidden<T: Scalar, R: Rng + ?Sized>(
    model: &RootModel,
    leading: Sign,
    rng: &mut R,
) -> Result<Polynomial<T>, DistError> {
    let roots = sample_roots::<T, _>(model, rng)?;
    Ok(Polynomial::from_roots(&roots, leading).expect("sampled roots are sorted and distinct"))
}

fn ln_binomial(n: u64, k: u64) -> f64 {
    libm::lgamma((n + 1) as f64) - libm::lgamma((k + 1) as f64) - libm::lgamma((n - k + 1) as f64)
}

/// `log2 C(n + d, d)` bits: the entropy of the labelling when the sample and
/// the `d` roots are all uniform.
pub fn entropy_lower_bound_uniform(n: u64, d: u64) -> f64 {
    ln_binomial(n + d, d) / std::f64::consts::LN_2
}

/// Same quantity from an exact big-integer binomial.
pub fn entropy_lower_bound_uniform_exact(n: u64, d: u64) -> f64 {
    let mut c = BigUint::from(1u32);
    for i in 1..=d {
        c = c * BigUint::from(n + i) / BigUint::from(i);
    }
    log2_biguint(&c)
}

fn log2_biguint(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits <= 64 {
        let x = v.iter_u64_digits().next().unwrap_or(0);
        return (x as f64).log2();
    }
    let shift = bits - 64;
    let top = (v >> shift).iter_u64_digits().next().unwrap_or(0);
    (top as f64).log2() + shift as f64
}

/// Exact Shannon entropy in bits of Dirichlet-multinomial(`n`; `alpha` x (`d`+1)),
/// the law of how many of `n` uniform points fall in each of the `d + 1`
/// root gaps.
pub fn entropy_lower_bound_dirichlet(n: u64, d: u64, alpha: f64) -> Result<f64, DistError> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(DistError::InvalidAlpha(alpha));
    }
    let needed = ln_binomial(n + d, d).exp();
    if needed > MAX_EXACT_COMPOSITIONS {
        return Err(DistError::ComputationTooLarge { needed, limit: MAX_EXACT_COMPOSITIONS });
    }
    let parts = (d + 1) as usize;
    let k_alpha = parts as f64 * alpha;
    let base = libm::lgamma((n + 1) as f64) + libm::lgamma(k_alpha)
        - libm::lgamma(n as f64 + k_alpha);
    let term: Vec<f64> = (0..=n)
        .map(|x| libm::lgamma(x as f64 + alpha) - libm::lgamma((x + 1) as f64) - libm::lgamma(alpha))
        .collect();

    let mut entropy = 0.0;
    let mut counts = vec![0u64; parts];
    // enumerate compositions of n into `parts` non-negative counts
    fn walk(
        pos: usize,
        left: u64,
        counts: &mut [u64],
        visit: &mut dyn FnMut(&[u64]),
    ) {
        if pos + 1 == counts.len() {
            counts[pos] = left;
            visit(counts);
            return;
        }
        for c in 0..=left {
            counts[pos] = c;
            walk(pos + 1, left - c, counts, visit);
        }
    }
    walk(0, n, &mut counts, &mut |cs| {
        let ln_p = base + cs.iter().map(|&c| term[c as usize]).sum::<f64>();
        let p = ln_p.exp();
        if p > 0.0 {
            entropy -= p * ln_p;
        }
    });
    Ok(entropy / std::f64::consts::LN_2)
}

/// Asymptotic stand-in `(d - 1) log2 n` for cells too large to enumerate.
/// It drops an alpha-dependent constant, so it is not a certified bound.
pub fn entropy_surrogate_dirichlet(n: u64, d: u64) -> f64 {
    d.saturating_sub(1) as f64 * (n as f64).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::One;

    fn rng(stream: u64) -> ChaCha8Rng {
        Seed { master: 42, stream }.rng()
    }

    #[test]
    fn points_sorted_distinct_reproducible() {
        let a: Vec<f64> = uniform_points(100_000, &mut rng(0));
        let b: Vec<f64> = uniform_points(100_000, &mut rng(0));
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert!(a.iter().all(|&x| (0.0..1.0).contains(&x)));
        let one: Vec<f64> = uniform_points(1, &mut rng(1));
        assert_eq!(one.len(), 1);
        let c: Vec<f64> = uniform_points(10, &mut rng(2));
        assert_ne!(&a[..10], &c[..]);
    }

    #[test]
    fn exact_points_match_float_points() {
        let f: Vec<f64> = uniform_points(50, &mut rng(7));
        let q: Vec<BigRational> = uniform_points(50, &mut rng(7));
        let back: Vec<f64> = q.iter().map(Scalar::to_f64).collect();
        assert_eq!(f, back);
    }

    #[test]
    fn dirichlet_gaps_normalised() {
        let mut r = rng(3);
        for alpha in [0.3, 1.0, 2.0, 50.0] {
            let g: Vec<f64> = dirichlet_gaps(5, alpha, &mut r).unwrap();
            assert!(g.iter().all(|&x| x > 0.0));
            assert!((g.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            let q: Vec<BigRational> = dirichlet_gaps(5, alpha, &mut r).unwrap();
            let total = q.iter().cloned().fold(BigRational::from_i64(0), |a, b| a + b);
            assert!(total.is_one());
        }
        assert!(dirichlet_gaps::<f64, _>(3, 0.0, &mut r).is_err());
    }

    #[test]
    fn roots_strictly_inside() {
        let mut r = rng(4);
        for model in [RootModel::Uniform { d: 6 }, RootModel::Dirichlet { d: 6, alpha: 0.5 }] {
            for _ in 0..200 {
                let roots: Vec<f64> = sample_roots(&model, &mut r).unwrap();
                assert_eq!(roots.len(), 6);
                assert!(roots.iter().all(|&x| x > 0.0 && x < 1.0));
                assert!(roots.windows(2).all(|w| w[0] < w[1]));
            }
        }
        let p: Polynomial<f64> = sample_hidden(&RootModel::Uniform { d: 3 }, Sign::Pos, &mut r).unwrap();
        assert_eq!(p.degree(), Some(3));
        assert!(sample_roots::<f64, _>(&RootModel::Dirichlet { d: 2, alpha: -1.0 }, &mut r).is_err());
    }

    #[test]
    fn root_model_json() {
        let m = RootModel::Dirichlet { d: 4, alpha: 2.0 };
        let js = serde_json::to_value(m).unwrap();
        assert_eq!(js, serde_json::json!({"kind": "dirichlet", "d": 4, "alpha": 2.0}));
        assert_eq!(serde_json::from_value::<RootModel>(js).unwrap(), m);
    }

    #[test]
    fn uniform_entropy_values() {
        assert!((entropy_lower_bound_uniform(3, 1) - 2.0).abs() < 1e-12);
        assert!((entropy_lower_bound_uniform(10, 2) - 66f64.log2()).abs() < 1e-12);
        assert_eq!(entropy_lower_bound_uniform_exact(10, 2), 66f64.log2());
        let approx = entropy_lower_bound_uniform(1_000_000, 5);
        let exact = entropy_lower_bound_uniform_exact(1_000_000, 5);
        assert!(((approx - exact) / exact).abs() < 1e-9, "{approx} vs {exact}");
    }

    #[test]
    fn dirichlet_entropy_values() {
        assert!((entropy_lower_bound_dirichlet(1, 1, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((entropy_lower_bound_dirichlet(2, 1, 1.0).unwrap() - 3f64.log2()).abs() < 1e-12);
        assert_eq!(entropy_surrogate_dirichlet(1 << 20, 4), 60.0);
        assert!(matches!(
            entropy_lower_bound_dirichlet(10_000, 3, 1.0),
            Err(DistError::ComputationTooLarge { .. })
        ));
    }
}
