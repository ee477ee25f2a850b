use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::conformal::{Atom, BoundaryMeasure};
use crate::disc::wrap_angle;
use crate::error::{Error, Result};
use crate::quadrature::{cubature, CubatureOptions};
use crate::scalar::{lit, to_f64, Real};

const MERGE_TOL: f64 = 1e-12;

/// Which half of the window is reflected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

fn offsets<T: Real>(beta: &BoundaryMeasure<T>, theta_star: T, delta: T) -> Result<Vec<(T, T)>> {
    if !(delta > T::zero() && delta <= T::FRAC_PI_2()) {
        return Err(Error::Domain("delta must lie in (0, pi/2]".into()));
    }
    if beta.uniform_density() != T::zero() {
        return Err(Error::Domain("folding acts on atomic measures only".into()));
    }
    let reach = lit::<T>(2.0) * delta * (T::one() + lit(MERGE_TOL)) + lit(MERGE_TOL);
    beta.atoms()
        .iter()
        .map(|a| {
            let o = wrap_angle(a.theta - theta_star);
            if o.abs() > reach {
                Err(Error::Domain(format!(
                    "atom at {} lies outside [theta* - 2 delta, theta* + 2 delta]",
                    to_f64(a.theta)
                )))
            } else {
                Ok((o, a.mass))
            }
        })
        .collect()
}

fn rebuild<T: Real>(mut offs: Vec<(T, T)>, theta_star: T) -> Result<BoundaryMeasure<T>> {
    offs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut merged: Vec<(T, T)> = Vec::with_capacity(offs.len());
    for (o, m) in offs {
        match merged.last_mut() {
            Some(last) if (o - last.0).abs() <= lit(MERGE_TOL) => last.1 = last.1 + m,
            _ => merged.push((o, m)),
        }
    }
    let atoms = merged
        .into_iter()
        .map(|(o, m)| Atom { theta: theta_star + o, mass: m })
        .collect();
    BoundaryMeasure::new(atoms, T::zero())
}

/// Reflects the outer quarter of `[theta* - 2 delta, theta* + 2 delta]` on one side
/// across `theta* -+ delta`.
pub fn fold_once<T: Real>(beta: &BoundaryMeasure<T>, theta_star: T, delta: T, side: Side) -> Result<BoundaryMeasure<T>> {
    let offs = offsets(beta, theta_star, delta)?;
    let folded = offs
        .into_iter()
        .map(|(o, m)| match side {
            Side::Left if o < -delta => (-lit::<T>(2.0) * delta - o, m),
            Side::Right if o > delta => (lit::<T>(2.0) * delta - o, m),
            _ => (o, m),
        })
        .collect();
    rebuild(folded, theta_star)
}

fn support_width<T: Real>(beta: &BoundaryMeasure<T>, theta_star: T) -> T {
    let offs: Vec<T> = beta.atoms().iter().map(|a| wrap_angle(a.theta - theta_star)).collect();
    let lo = offs.iter().copied().fold(T::infinity(), T::min);
    let hi = offs.iter().copied().fold(-T::infinity(), T::max);
    if offs.is_empty() {
        T::zero()
    } else {
        hi - lo
    }
}

/// `beta^0, beta^1, ...` from alternating left and right folds with halving
/// `delta`, until the support is narrower than `1e-9`; the last entry is the
/// point mass `beta(I)` at `theta*`.
pub fn fold_sequence<T: Real>(beta: &BoundaryMeasure<T>, theta_star: T, delta: T) -> Result<Vec<BoundaryMeasure<T>>> {
    offsets(beta, theta_star, delta)?;
    let mut seq = vec![beta.clone()];
    let mut cur = beta.clone();
    let mut d = delta;
    while support_width(&cur, theta_star) >= lit(1e-9) {
        cur = fold_once(&cur, theta_star, d, Side::Left)?;
        seq.push(cur.clone());
        cur = fold_once(&cur, theta_star, d, Side::Right)?;
        seq.push(cur.clone());
        d = d * lit(0.5);
        if seq.len() > 400 {
            return Err(Error::Construction("fold sequence failed to contract".into()));
        }
    }
    let mass = beta.atoms().iter().map(|a| a.mass).sum();
    seq.push(BoundaryMeasure::new(vec![Atom { theta: theta_star, mass }], T::zero())?);
    Ok(seq)
}

/// `f(z) = (1 - |z|)^exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "")]
pub enum WeightKind<T: Real> {
    DistancePower { exponent: T },
}

/// `g(z) = 0` or `min(1/|xi - z|, 2/(1 - |xi|))` with `xi = radius e^{i theta*}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "")]
pub enum ShiftKind<T: Real> {
    Zero,
    Clipped { radius: T },
}

/// `h(s) = s^-p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "")]
pub enum ProfileKind<T: Real> {
    Power { p: T },
}

/// Data of one instance of the folding inequality on the cap
/// `H = B(e^{i theta*}, cap_radius) ∩ D`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FoldingInstance<T: Real> {
    pub theta_star: T,
    pub delta: T,
    pub beta: BoundaryMeasure<T>,
    pub alpha: T,
    pub f: WeightKind<T>,
    pub g: ShiftKind<T>,
    pub h: ProfileKind<T>,
    pub cap_radius: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldingReport {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub error: f64,
    pub pass: bool,
}

/// Left-hand sides along a fold sequence and whether they never decrease
/// beyond the quadrature tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub values: Vec<f64>,
    /// Largest relative drop `(I_j - I_{j+1}) / max(I_j, I_{j+1})`, 0 if none.
    pub worst_drop: f64,
    pub monotone: bool,
}

impl<T: Real> FoldingInstance<T> {
    pub fn validate(&self) -> Result<()> {
        offsets(&self.beta, self.theta_star, self.delta)?;
        if !(self.beta.total_mass() > T::zero()) {
            return Err(Error::Domain("beta(I) must be positive".into()));
        }
        if !(self.alpha >= T::one() && self.alpha.is_finite()) {
            return Err(Error::Domain("alpha must be >= 1".into()));
        }
        if !(self.cap_radius > T::zero() && self.cap_radius <= lit(2.0)) {
            return Err(Error::Domain("cap radius must lie in (0, 2]".into()));
        }
        let WeightKind::DistancePower { exponent } = self.f;
        if !(exponent >= T::zero()) {
            return Err(Error::Domain("f exponent must be >= 0".into()));
        }
        if let ShiftKind::Clipped { radius } = self.g {
            if !(radius >= T::zero() && radius < T::one()) {
                return Err(Error::Domain("g centre must lie inside the disc".into()));
            }
        }
        let ProfileKind::Power { p } = self.h;
        if !(p > T::zero()) {
            return Err(Error::Domain("h exponent p must be positive".into()));
        }
        let sum = p * self.alpha;
        let limit = lit::<T>(2.0) + exponent;
        if sum >= limit {
            return Err(Error::Domain(format!(
                "non-integrable: p*alpha = {} must stay below 2 + f exponent = {}",
                to_f64(sum),
                to_f64(limit)
            )));
        }
        Ok(())
    }

    /// `int_H f [g + (1/beta(I)) int h(|e^{i theta} - z|) d mu]^alpha dz` and the
    /// same integral with all mass concentrated at `theta*`.
    fn integrals(&self, mu: &BoundaryMeasure<T>, quad_tol: T) -> Result<([T; 2], [T; 2])> {
        let total = self.beta.total_mass();
        let set: Vec<(Complex<T>, T)> = mu
            .atoms()
            .iter()
            .map(|a| {
                let o = wrap_angle(a.theta - self.theta_star);
                (Complex::from_polar(T::one(), o) - T::one(), a.mass / total)
            })
            .collect();
        let WeightKind::DistancePower { exponent } = self.f;
        let ProfileKind::Power { p } = self.h;
        let two = lit::<T>(2.0);
        let rho = self.cap_radius;
        let alpha = self.alpha;
        let integrand = |t: T, nu: T| -> [T; 2] {
            let psi_max = (t / two).min(T::one()).acos();
            let psi = nu * psi_max;
            let v = Complex::from_polar(t, psi);
            let w = Complex::new(T::one(), T::zero()) - v;
            let wn = w.norm();
            let dist = t * (two * psi.cos() - t) / (T::one() + wn);
            if !(dist > T::zero()) {
                return [T::zero(); 2];
            }
            let f = dist.powf(exponent);
            let g = match self.g {
                ShiftKind::Zero => T::zero(),
                ShiftKind::Clipped { radius } => {
                    let r = (Complex::new(radius, T::zero()) - w).norm();
                    (T::one() / r).min(two / (T::one() - radius))
                }
            };
            let jac = t * psi_max;
            let avg: T = set.iter().map(|&(e, m)| m * (e + v).norm().powf(-p)).sum();
            [f * (g + avg).powf(alpha) * jac, f * (g + t.powf(-p)).powf(alpha) * jac]
        };
        let mut ts = vec![T::zero(), rho];
        let mut x = rho;
        for _ in 0..20 {
            x = x * lit(0.25);
            ts.push(x);
        }
        for &(e, _) in &set {
            let ta = e.norm();
            if ta > T::zero() && ta < rho {
                ts.push(ta);
            }
        }
        if let ShiftKind::Clipped { radius } = self.g {
            let ta = T::one() - radius;
            if ta < rho {
                ts.push(ta);
            }
        }
        ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ts.dedup();
        let nus = [-T::one(), T::zero(), T::one()];
        let opts = CubatureOptions::new(quad_tol);
        let res = cubature(integrand, &ts, &nus, &opts);
        if !res.converged {
            let k = if res.error[0] >= res.error[1] { 0 } else { 1 };
            return Err(Error::Quadrature { error: to_f64(res.error[k]), target: to_f64(quad_tol * res.value[k]) });
        }
        Ok((res.value, res.error))
    }

    /// Both sides of the folding inequality and `margin = rhs - lhs`.
    pub fn check(&self, quad_tol: T) -> Result<FoldingReport> {
        self.validate()?;
        let (v, e) = self.integrals(&self.beta, quad_tol)?;
        let (lhs, rhs) = (to_f64(v[0]), to_f64(v[1]));
        let margin = rhs - lhs;
        Ok(FoldingReport {
            lhs,
            rhs,
            margin,
            error: to_f64(e[0] + e[1]),
            pass: margin >= -3.0 * to_f64(quad_tol) * lhs.max(rhs),
        })
    }

    /// Left-hand sides along [`fold_sequence`]; the last entry belongs to the point mass.
    pub fn chain(&self, quad_tol: T) -> Result<Vec<f64>> {
        self.validate()?;
        let seq = fold_sequence(&self.beta, self.theta_star, self.delta)?;
        let mut out = Vec::with_capacity(seq.len());
        for mu in &seq {
            let (v, _) = self.integrals(mu, quad_tol)?;
            out.push(to_f64(v[0]));
        }
        Ok(out)
    }

    pub fn chain_report(&self, quad_tol: T) -> Result<ChainReport> {
        let values = self.chain(quad_tol)?;
        let worst_drop = values
            .windows(2)
            .map(|w| (w[0] - w[1]) / w[0].max(w[1]).max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        let monotone = worst_drop <= 3.0 * to_f64(quad_tol);
        Ok(ChainReport { values, worst_drop, monotone })
    }

    /// A random instance satisfying the hypotheses, with `p alpha` at most
    /// 85% of the integrability limit.
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let pi = std::f64::consts::PI;
        let theta_star = rng.gen_range(-pi..pi);
        let delta = rng.gen_range(0.05..pi / 2.0);
        let n = rng.gen_range(1..=6);
        let atoms = (0..n)
            .map(|_| Atom {
                theta: lit(theta_star + rng.gen_range(-2.0 * delta..=2.0 * delta)),
                mass: lit(rng.gen_range(0.1..1.0)),
            })
            .collect();
        let exponent: f64 = 5.0 / 6.0;
        let alpha: f64 = rng.gen_range(1.0..=8.0 / 3.0);
        let p_max = (0.85 * (2.0 + exponent) / alpha).min(17.0 / 6.0);
        let p = rng.gen_range(0.05..p_max);
        let g = if rng.gen_bool(0.5) {
            ShiftKind::Zero
        } else {
            ShiftKind::Clipped { radius: lit(rng.gen_range(0.5..0.99)) }
        };
        FoldingInstance {
            theta_star: lit(theta_star),
            delta: lit(delta),
            beta: BoundaryMeasure::new(atoms, T::zero()).expect("finite atoms"),
            alpha: lit(alpha),
            f: WeightKind::DistancePower { exponent: lit(exponent) },
            g,
            h: ProfileKind::Power { p: lit(p) },
            cap_radius: lit(rng.gen_range(0.5 * delta..(2.0 * delta).min(1.5))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn measure(atoms: &[(f64, f64)]) -> BoundaryMeasure<f64> {
        BoundaryMeasure::new(atoms.iter().map(|&(t, m)| Atom { theta: t, mass: m }).collect(), 0.0).unwrap()
    }

    #[test]
    fn single_fold_examples() {
        let (ts, d) = (0.3, 0.2);
        let b = fold_once(&measure(&[(ts - 1.5 * d, 1.0)]), ts, d, Side::Left).unwrap();
        assert!((b.atoms()[0].theta - (ts - 0.5 * d)).abs() < 1e-15);
        let b = fold_once(&measure(&[(ts - 0.4 * d, 1.0)]), ts, d, Side::Left).unwrap();
        assert_eq!(b.atoms()[0].theta, ts - 0.4 * d);
        let b = fold_once(&measure(&[(ts - 2.0 * d, 1.0), (ts, 1.0)]), ts, d, Side::Left).unwrap();
        assert_eq!(b.atoms().len(), 1);
        assert!((b.atoms()[0].theta - ts).abs() < 1e-14 && b.atoms()[0].mass == 2.0);
        assert!(fold_once(&measure(&[(ts + 2.5 * d, 1.0)]), ts, d, Side::Left).is_err());
    }

    #[test]
    fn sequence_contracts_and_keeps_mass() {
        let (ts, d) = (-2.9, 0.4);
        let b = measure(&[(ts - 1.9 * d, 0.25), (ts - 0.3 * d, 0.25), (ts + 0.8 * d, 0.25), (ts + 1.7 * d, 0.25)]);
        let seq = fold_sequence(&b, ts, d).unwrap();
        for (j, mu) in seq.iter().enumerate() {
            assert!((mu.total_mass() - 1.0).abs() < 1e-14);
            if j % 2 == 0 && j + 1 < seq.len() {
                assert!(support_width(mu, ts) <= 4.0 * d * 0.5f64.powi(j as i32 / 2) + 1e-15);
            }
        }
        let last = seq.last().unwrap();
        assert_eq!(last.atoms().len(), 1);
        assert!(wrap_angle(last.atoms()[0].theta - ts).abs() < 1e-15);
        let dirac = fold_sequence(&measure(&[(ts, 2.0)]), ts, d).unwrap();
        assert!(dirac.iter().all(|m| m.atoms().len() == 1 && m.total_mass() == 2.0));
    }

    #[test]
    fn rejects_non_integrable() {
        let inst = FoldingInstance {
            theta_star: 0.0,
            delta: 0.3,
            beta: measure(&[(0.0, 1.0)]),
            alpha: 2.5,
            f: WeightKind::DistancePower { exponent: 5.0 / 6.0 },
            g: ShiftKind::Zero,
            h: ProfileKind::Power { p: 1.2 },
            cap_radius: 0.3,
        };
        let err = inst.validate().unwrap_err().to_string();
        assert!(err.contains("p*alpha"), "{err}");
    }
}
