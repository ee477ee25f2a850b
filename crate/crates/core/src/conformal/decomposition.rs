use serde::{Deserialize, Serialize};

use crate::disc::wrap_angle;
use crate::error::{Error, Result};
use crate::moduli::Modulus;
use crate::scalar::{lit, to_f64, Real};

/// Point mass of the boundary measure at angle `theta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[T; 2]", into = "[T; 2]")]
#[serde(bound = "T: Real")]
pub struct Atom<T: Real> {
    pub theta: T,
    pub mass: T,
}

impl<T: Real> From<[T; 2]> for Atom<T> {
    fn from(a: [T; 2]) -> Self {
        Atom { theta: a[0], mass: a[1] }
    }
}

impl<T: Real> From<Atom<T>> for [T; 2] {
    fn from(a: Atom<T>) -> Self {
        [a.theta, a.mass]
    }
}

/// Finite union of closed angle intervals inside `[-pi, pi]`.
#[derive(Clone, Debug, PartialEq)]
pub struct AngleSet<T> {
    intervals: Vec<(T, T)>,
}

impl<T: Real> AngleSet<T> {
    pub fn full() -> Self {
        AngleSet { intervals: vec![(-T::PI(), T::PI())] }
    }

    pub fn new(mut intervals: Vec<(T, T)>) -> Result<Self> {
        for &(a, b) in &intervals {
            if !(a >= -T::PI() && b <= T::PI() && a <= b) {
                return Err(Error::Domain(format!(
                    "angle interval [{}, {}] not inside [-pi, pi]",
                    to_f64(a),
                    to_f64(b)
                )));
            }
        }
        intervals.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        Ok(AngleSet { intervals })
    }

    pub fn intervals(&self) -> &[(T, T)] {
        &self.intervals
    }

    pub fn measure(&self) -> T {
        self.intervals.iter().map(|&(a, b)| b - a).sum()
    }

    pub fn is_full(&self) -> bool {
        self.measure() >= T::TAU() * (T::one() - lit(1e-14))
    }

    /// Membership for atoms; `-pi` and `pi` name the same boundary point.
    pub fn contains(&self, theta: T) -> bool {
        let t = wrap_angle(theta);
        self.intervals.iter().any(|&(a, b)| {
            (t >= a && t <= b) || (t == T::PI() && a <= -T::PI())
        })
    }
}

/// Non-decreasing part `beta` of the tangent argument: atoms plus a uniform density.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BoundaryMeasure<T: Real> {
    atoms: Vec<Atom<T>>,
    #[serde(default)]
    uniform_density: T,
}

impl<T: Real> BoundaryMeasure<T> {
    pub fn new(atoms: Vec<Atom<T>>, uniform_density: T) -> Result<Self> {
        let mut out = Vec::with_capacity(atoms.len());
        for a in atoms {
            if !(a.mass >= T::zero() && a.mass.is_finite() && a.theta.is_finite()) {
                return Err(Error::Construction(format!(
                    "atom at {} has invalid mass {}",
                    to_f64(a.theta),
                    to_f64(a.mass)
                )));
            }
            out.push(Atom { theta: wrap_angle(a.theta), mass: a.mass });
        }
        if !(uniform_density >= T::zero() && uniform_density.is_finite()) {
            return Err(Error::Construction("uniform density must be finite and >= 0".into()));
        }
        Ok(BoundaryMeasure { atoms: out, uniform_density })
    }

    pub fn atoms(&self) -> &[Atom<T>] {
        &self.atoms
    }

    pub fn uniform_density(&self) -> T {
        self.uniform_density
    }

    pub fn total_mass(&self) -> T {
        self.atoms.iter().map(|a| a.mass).sum::<T>() + self.uniform_density * T::TAU()
    }

    /// `beta([c - h, c + h])` on the circle.
    pub fn window_mass(&self, c: T, h: T) -> T {
        if h >= T::PI() {
            return self.total_mass();
        }
        let slack = lit::<T>(1e-12);
        let atoms: T = self
            .atoms
            .iter()
            .filter(|a| wrap_angle(a.theta - c).abs() <= h + slack)
            .map(|a| a.mass)
            .sum();
        atoms + self.uniform_density * lit::<T>(2.0) * h
    }

    /// Largest mass of a closed window of half-width `h`: checked on a
    /// 4096-point grid and at windows with an edge on an atom.
    pub fn max_window_mass(&self, h: T) -> T {
        let mut best = T::zero();
        let n = 4096;
        for i in 0..n {
            let c = -T::PI() + T::TAU() * lit(i as f64 / n as f64);
            best = best.max(self.window_mass(c, h));
        }
        for a in &self.atoms {
            for c in [a.theta, a.theta + h, a.theta - h] {
                best = best.max(self.window_mass(c, h));
            }
        }
        best
    }
}

/// The part of the tangent argument controlled by a modulus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BetaTilde<T: Real> {
    /// `beta~ = pi/2`.
    Zero,
    /// `beta~(theta) = pi/2 - sgn(theta)/2 * m(2 min(|theta|, r0))`.
    ModulusProfile { modulus: Modulus<T>, r0: T },
}

impl<T: Real> BetaTilde<T> {
    /// `beta~_T(theta)` for `theta` in `(-pi, pi]`.
    pub fn value(&self, theta: T) -> T {
        match self {
            BetaTilde::Zero => T::FRAC_PI_2(),
            BetaTilde::ModulusProfile { modulus, r0 } => {
                let s = if theta > T::zero() {
                    T::one()
                } else if theta < T::zero() {
                    -T::one()
                } else {
                    T::zero()
                };
                T::FRAC_PI_2() - s * lit(0.5) * modulus.eval_unchecked(lit::<T>(2.0) * theta.abs().min(*r0))
            }
        }
    }

    /// `beta~(pi) - beta~(-pi^+)`.
    pub fn increment(&self) -> T {
        match self {
            BetaTilde::Zero => T::zero(),
            BetaTilde::ModulusProfile { modulus, r0 } => -modulus.eval_unchecked(lit::<T>(2.0) * *r0),
        }
    }

    pub fn kappa(&self) -> T {
        self.increment() / T::TAU()
    }

    /// Continuous extension to the real line with `beta~(theta + 2pi) = beta~(theta) + increment`.
    pub fn value_extended(&self, theta: T) -> T {
        let k = ((theta + T::PI()) / T::TAU()).ceil() - T::one();
        let base = theta - k * T::TAU();
        self.value(base) + k * self.increment()
    }

    /// The periodic function `beta~(theta) - kappa theta`.
    pub fn normalized(&self, theta: T) -> T {
        self.value(theta) - self.kappa() * theta
    }

    /// Density of `d beta~`, from symmetric differences with step 1e-6.
    pub fn density(&self, theta: T) -> T {
        match self {
            BetaTilde::Zero => T::zero(),
            BetaTilde::ModulusProfile { r0, .. } => {
                let h = lit::<T>(1e-6);
                if theta.abs() >= *r0 || theta.abs() < h {
                    return T::zero();
                }
                (self.value(theta + h) - self.value(theta - h)) / (h + h)
            }
        }
    }

    pub fn profile(&self) -> Option<(&Modulus<T>, T)> {
        match self {
            BetaTilde::Zero => None,
            BetaTilde::ModulusProfile { modulus, r0 } => Some((modulus, *r0)),
        }
    }
}

/// Splitting of the boundary tangent argument into a non-decreasing part and
/// a part with modulus of continuity `m`.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentDecomposition<T: Real> {
    pub beta: BoundaryMeasure<T>,
    pub beta_tilde: BetaTilde<T>,
    /// Declared modulus of `beta~`.
    pub modulus: Modulus<T>,
    pub kappa: T,
}

impl<T: Real> TangentDecomposition<T> {
    pub fn new(beta: BoundaryMeasure<T>, beta_tilde: BetaTilde<T>, modulus: Modulus<T>) -> Result<Self> {
        let total = beta.total_mass() + beta_tilde.increment();
        if (total - T::TAU()).abs() > lit(1e-10) {
            return Err(Error::Construction(format!(
                "total tangent turning is {} instead of 2pi",
                to_f64(total)
            )));
        }
        let kappa = beta_tilde.kappa();
        let dec = TangentDecomposition { beta, beta_tilde, modulus, kappa };
        if let Some((a, b, excess)) = dec.modulus_violation(500) {
            return Err(Error::Construction(format!(
                "beta~ exceeds its declared modulus at ({a:.6e}, {b:.6e}) by {excess:.3e}"
            )));
        }
        Ok(dec)
    }

    /// Worst violation of `|beta~(x) - beta~(y)| <= m(|x - y|)` on a deterministic sample.
    pub fn modulus_violation(&self, n: usize) -> Option<(f64, f64, f64)> {
        let bt = &self.beta_tilde;
        if matches!(bt, BetaTilde::Zero) {
            return None;
        }
        let mut pts: Vec<T> = (0..n).map(|i| -T::PI() + T::TAU() * lit((i as f64 + 0.5) / n as f64)).collect();
        for k in 0..40 {
            let x = lit::<T>(2f64.powi(-k));
            pts.extend([x, -x, T::PI() - x, -T::PI() + x]);
        }
        let mut worst: Option<(f64, f64, f64)> = None;
        for (i, &x) in pts.iter().enumerate() {
            for &y in pts.iter().skip(i + 1).step_by(7) {
                for shift in [T::zero(), T::TAU(), -T::TAU()] {
                    let y2 = y + shift;
                    let dist = (x - y2).abs();
                    if dist > T::TAU() {
                        continue;
                    }
                    let diff = (bt.value_extended(x) - bt.value_extended(y2)).abs();
                    let bound = self.modulus.eval_unchecked(dist);
                    let excess = diff - bound;
                    if excess > lit(1e-9) && worst.is_none_or(|w| to_f64(excess) > w.2) {
                        worst = Some((to_f64(x), to_f64(y2), to_f64(excess)));
                    }
                }
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn profile_is_periodic_after_normalization() {
        let m = Modulus::capped_log(PI / 8.0).unwrap();
        let bt = BetaTilde::ModulusProfile { modulus: m, r0: 0.25 };
        let a = bt.normalized(PI);
        let b = bt.normalized(-PI + 1e-15);
        assert!((a - b).abs() < 1e-12);
        assert!((bt.value_extended(PI + 1e-9) - bt.value(PI)).abs() < 1e-8);
    }

    #[test]
    fn window_mass_wraps() {
        let b = BoundaryMeasure::new(vec![Atom { theta: PI, mass: 1.0 }, Atom { theta: -3.0, mass: 2.0 }], 0.0).unwrap();
        assert_eq!(b.window_mass(3.1, 0.3), 3.0);
        assert_eq!(b.window_mass(0.0, 0.3), 0.0);
    }

    #[test]
    fn rejects_wrong_total() {
        let b = BoundaryMeasure::new(vec![Atom { theta: 0.0, mass: 1.0 }], 0.0).unwrap();
        assert!(TangentDecomposition::new(b, BetaTilde::Zero, Modulus::Zero).is_err());
    }

    #[test]
    fn angle_set() {
        let a = AngleSet::<f64>::new(vec![(0.5, 1.0), (-1.0, -0.5)]).unwrap();
        assert!((a.measure() - 1.0).abs() < 1e-15);
        assert!(a.contains(0.7) && !a.contains(0.0));
        assert!(AngleSet::<f64>::new(vec![(1.0, 0.0)]).is_err());
        assert!(AngleSet::<f64>::full().contains(PI));
    }
}
