use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::moduli::Modulus;
use crate::scalar::{lit, to_f64, Real};

const KNOTS_PER_OCTAVE: f64 = 16.0;
const SMALLEST_KNOT: f64 = 1e-280;

/// Modulus of `r -> m(min(C r^gamma, 2pi))`, the modulus seen along a curve
/// whose arc length between parameters is at most `C |x - y|^gamma`.
///
/// Exact families are returned where closed under the substitution, a
/// tabulated modulus on a geometric knot grid otherwise.
pub fn compose_arc_length<T: Real>(m: &Modulus<T>, c: T, gamma: T) -> Result<Modulus<T>> {
    if !(c > T::zero() && c.is_finite()) {
        return Err(Error::Domain(format!("arc-length constant must be positive, got {}", to_f64(c))));
    }
    if !(gamma > T::zero() && gamma <= T::one()) {
        return Err(Error::Domain(format!("Hoelder exponent must lie in (0, 1], got {}", to_f64(gamma))));
    }
    match m {
        Modulus::Zero => return Ok(Modulus::Zero),
        Modulus::Linear { c: c0 } if gamma == T::one() && c <= T::one() => {
            return Modulus::linear(*c0 * c);
        }
        _ => {}
    }
    let two_pi = T::TAU();
    let ln_two_pi = two_pi.ln();
    let ln_c = c.ln();
    let top = m.eval_unchecked(two_pi);
    let octaves = (two_pi / lit(SMALLEST_KNOT)).log2();
    let n = (octaves * lit(KNOTS_PER_OCTAVE)).ceil().to_usize().unwrap();
    let mut knots = Vec::with_capacity(n + 2);
    knots.push([T::zero(), T::zero()]);
    for j in (0..=n).rev() {
        let ln_r = ln_two_pi - T::LN_2() * lit(j as f64 / KNOTS_PER_OCTAVE);
        let r = ln_r.exp();
        let w = ln_c + gamma * ln_r;
        let v = if w >= ln_two_pi {
            top
        } else if w >= T::zero() {
            m.eval_unchecked(w.exp())
        } else {
            m.eval_log(-w)
        };
        let prev = knots.last().unwrap()[1];
        knots.push([r, v.max(prev)]);
    }
    knots.last_mut().unwrap()[0] = two_pi;
    Modulus::tabulated(knots)
}

/// Pair of arguments exhibiting a violated modulus property.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub a: f64,
    pub b: f64,
    /// Size of the violation (positive).
    pub excess: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ModulusReport {
    pub pass: bool,
    pub zero_at_origin: bool,
    pub monotone_witness: Option<Witness>,
    pub subadditive_witness: Option<Witness>,
    pub samples: usize,
}

/// Samples monotonicity and subadditivity of `m` on `[0, 2pi]`.
///
/// Uses `n` grid points (half uniform, half log-spaced) for monotonicity and
/// `n^2` (capped at 10^6) seeded random pairs for subadditivity.
pub fn validate_modulus<T: Real>(m: &Modulus<T>, n: usize, seed: u64) -> ModulusReport {
    let two_pi = T::TAU();
    let tol = |v: T| lit::<T>(1e-12) * (T::one() + v.abs());
    let zero_at_origin = m.eval_unchecked(T::zero()) == T::zero();
    let n = n.max(4);
    let mut grid: Vec<T> = (0..n / 2).map(|i| two_pi * lit(i as f64 / (n / 2 - 1) as f64)).collect();
    grid.extend((0..n / 2).map(|i| lit::<T>(10f64.powf(-14.0 + 14.0 * i as f64 / (n / 2) as f64))));
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut monotone_witness: Option<Witness> = None;
    for w in grid.windows(2) {
        let (a, b) = (m.eval_unchecked(w[0]), m.eval_unchecked(w[1]));
        let drop = a - b;
        if drop > tol(a) && monotone_witness.as_ref().is_none_or(|x| to_f64(drop) > x.excess) {
            monotone_witness = Some(Witness { a: to_f64(w[0]), b: to_f64(w[1]), excess: to_f64(drop) });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = (n * n).min(1_000_000);
    let mut subadditive_witness: Option<Witness> = None;
    for i in 0..pairs {
        let (a, b) = if i % 2 == 0 {
            let a: f64 = rng.gen_range(0.0..to_f64(two_pi));
            let b: f64 = rng.gen_range(0.0..=(to_f64(two_pi) - a));
            (a, b)
        } else {
            let a = 10f64.powf(rng.gen_range(-14.0..0.79));
            let b = 10f64.powf(rng.gen_range(-14.0..0.79)).min(std::f64::consts::TAU - a);
            (a, b)
        };
        let (ta, tb) = (lit::<T>(a), lit::<T>(b));
        let sum = (ta + tb).min(two_pi);
        let lhs = m.eval_unchecked(sum);
        let rhs = m.eval_unchecked(ta) + m.eval_unchecked(tb);
        let excess = lhs - rhs;
        if excess > tol(lhs) && subadditive_witness.as_ref().is_none_or(|x| to_f64(excess) > x.excess) {
            subadditive_witness = Some(Witness { a, b, excess: to_f64(excess) });
        }
    }
    ModulusReport {
        pass: zero_at_origin && monotone_witness.is_none() && subadditive_witness.is_none(),
        zero_at_origin,
        monotone_witness,
        subadditive_witness,
        samples: grid.len() + pairs,
    }
}
