use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::conformal::{Atom, BetaTilde, BoundaryMeasure, ConformalDomain, TangentDecomposition};
use crate::error::{Error, Result};
use crate::moduli::Modulus;
use crate::scalar::{lit, to_f64, Real};

fn build<T: Real>(atoms: Vec<Atom<T>>, density: T) -> Result<ConformalDomain<T>> {
    let beta = BoundaryMeasure::new(atoms, density)?;
    let dec = TangentDecomposition::new(beta, BetaTilde::Zero, Modulus::Zero)?;
    ConformalDomain::new(dec, Complex::new(T::one(), T::zero()))
}

/// The unit disc: `S(z) = z - 1`.
pub fn disc_domain<T: Real>() -> ConformalDomain<T> {
    build(Vec::new(), T::one()).expect("disc decomposition is valid")
}

/// Equilateral triangle with `S'(z) = (1 + z^3)^{-2/3}`.
pub fn triangle_domain<T: Real>() -> ConformalDomain<T> {
    let m = T::TAU() / lit(3.0);
    let third = T::PI() / lit(3.0);
    build(
        vec![
            Atom { theta: T::PI(), mass: m },
            Atom { theta: third, mass: m },
            Atom { theta: -third, mass: m },
        ],
        T::zero(),
    )
    .expect("triangle decomposition is valid")
}

/// Square with `S'(z) = (1 + z^4)^{-1/2}`.
pub fn square_domain<T: Real>() -> ConformalDomain<T> {
    let q = T::FRAC_PI_4();
    let atoms = [q, lit::<T>(3.0) * q, -q, lit::<T>(-3.0) * q]
        .into_iter()
        .map(|theta| Atom { theta, mass: T::FRAC_PI_2() })
        .collect();
    build(atoms, T::zero()).expect("square decomposition is valid")
}

/// Perturbed isosceles triangle whose tangent argument near `S(1)` has
/// exactly the concave modulus `m`.
///
/// Atoms `2pi/3 + m(2 r0)` at `pi` and `2pi/3` at `+-pi/3`, and
/// `beta~(theta) = pi/2 - sgn(theta)/2 m(2 min(|theta|, r0))`.
pub fn construct_modulus_domain<T: Real>(m: &Modulus<T>, r0: T) -> Result<ConformalDomain<T>> {
    if !(r0 > T::zero() && r0 <= lit(0.5)) {
        return Err(Error::Construction(format!("r0 = {} must lie in (0, 1/2]", to_f64(r0))));
    }
    let m2 = m.eval_unchecked(lit::<T>(2.0) * r0);
    if m2 > T::PI() / lit(6.0) + lit(1e-12) {
        return Err(Error::Construction(format!(
            "m(2 r0) = {} exceeds pi/6",
            to_f64(m2)
        )));
    }
    if !m.is_concave() {
        return Err(Error::Construction("modulus must be concave".into()));
    }
    let third = T::TAU() / lit(3.0);
    let atoms = vec![
        Atom { theta: T::PI(), mass: third + m2 },
        Atom { theta: T::PI() / lit(3.0), mass: third },
        Atom { theta: -T::PI() / lit(3.0), mass: third },
    ];
    let beta = BoundaryMeasure::new(atoms, T::zero())?;
    let bt = BetaTilde::ModulusProfile { modulus: m.clone(), r0 };
    let dec = TangentDecomposition::new(beta, bt, m.clone())?;
    ConformalDomain::new(dec, Complex::new(T::one(), T::zero()))
}

/// How a domain JSON document is turned into a decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    /// `beta_tilde` profile realized by [`construct_modulus_domain`]; atoms are ignored.
    ModulusDomain,
    /// Atoms, uniform density and profile taken as given.
    #[default]
    Raw,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ProfileSpec<T: Real> {
    pub modulus: Modulus<T>,
    pub r0: T,
}

/// JSON description of a domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DomainSpec<T: Real> {
    #[serde(default)]
    pub atoms: Vec<Atom<T>>,
    #[serde(default)]
    pub beta_tilde: Option<ProfileSpec<T>>,
    #[serde(default)]
    pub construction: Construction,
    /// Density of an absolutely continuous part of `beta` (1 for the disc).
    #[serde(default)]
    pub uniform_density: T,
}

impl<T: Real> DomainSpec<T> {
    pub fn disc() -> Self {
        DomainSpec { atoms: Vec::new(), beta_tilde: None, construction: Construction::Raw, uniform_density: T::one() }
    }

    pub fn modulus_domain(m: Modulus<T>, r0: T) -> Self {
        DomainSpec {
            atoms: Vec::new(),
            beta_tilde: Some(ProfileSpec { modulus: m, r0 }),
            construction: Construction::ModulusDomain,
            uniform_density: T::zero(),
        }
    }

    pub fn build(&self) -> Result<ConformalDomain<T>> {
        match self.construction {
            Construction::ModulusDomain => {
                let p = self
                    .beta_tilde
                    .as_ref()
                    .ok_or_else(|| Error::Config("modulus_domain construction needs beta_tilde".into()))?;
                construct_modulus_domain(&p.modulus, p.r0)
            }
            Construction::Raw => {
                let beta = BoundaryMeasure::new(self.atoms.clone(), self.uniform_density)?;
                let (bt, m) = match &self.beta_tilde {
                    None => (BetaTilde::Zero, Modulus::Zero),
                    Some(p) => (BetaTilde::ModulusProfile { modulus: p.modulus.clone(), r0: p.r0 }, p.modulus.clone()),
                };
                let dec = TangentDecomposition::new(beta, bt, m)?;
                ConformalDomain::new(dec, Complex::new(T::one(), T::zero()))
            }
        }
    }

    /// Modulus attached to the domain (zero when there is no profile).
    pub fn modulus(&self) -> Modulus<T> {
        self.beta_tilde.as_ref().map(|p| p.modulus.clone()).unwrap_or(Modulus::Zero)
    }
}

/// Constraints that determined the localization scale `delta`.
#[derive(Clone, Debug, Serialize)]
pub struct DeltaReport {
    pub delta: f64,
    /// `ln delta`, finite even when `delta` underflows.
    pub ln_delta: f64,
    /// Largest dyadic `delta` with every window of length `4 delta` carrying mass at most `4pi/3`.
    pub window_delta: f64,
    /// `ln 2 / (1000 (1 + m(2pi)))`.
    pub cap_delta: f64,
    /// Whether `m(2 delta) <= ln 2 / 300` forced a further decrease.
    pub modulus_bound_active: bool,
}

/// Localization scale `delta` of the folding argument for this domain.
pub fn delta_for_domain<T: Real>(dom: &ConformalDomain<T>) -> Result<DeltaReport> {
    let dec = dom.decomposition();
    let beta = &dec.beta;
    let limit = lit::<T>(4.0) * T::PI() / lit(3.0);
    if let Some(a) = beta.atoms().iter().find(|a| a.mass > limit) {
        return Err(Error::Construction(format!(
            "atom at {} has mass {} > 4pi/3; no admissible delta",
            to_f64(a.theta),
            to_f64(a.mass)
        )));
    }
    let mut delta = T::FRAC_PI_2();
    let mut iters = 0;
    while beta.max_window_mass(lit::<T>(2.0) * delta) > limit + lit(1e-12) {
        delta = delta * lit(0.5);
        iters += 1;
        if iters > 200 {
            return Err(Error::Construction("window condition never satisfied".into()));
        }
    }
    let window_delta = delta;
    let m = &dec.modulus;
    let cap = T::LN_2() / (lit::<T>(1000.0) * (T::one() + m.eval_unchecked(T::TAU())));
    delta = delta.min(cap);
    let bound = T::LN_2() / lit(300.0);
    let two = lit::<T>(2.0);
    let mut ln_delta = delta.ln();
    let m_at = |ln_d: T| {
        let ln_r = ln_d + T::LN_2();
        if ln_r >= T::zero() {
            m.eval_unchecked(ln_r.exp())
        } else {
            m.eval_log(-ln_r)
        }
    };
    let active = m.eval_unchecked(two * delta) > bound;
    if active {
        // m is non-decreasing: bisect on ln(delta) for the largest admissible value.
        let mut hi = ln_delta;
        let mut lo = ln_delta - lit(10.0);
        while m_at(lo) > bound {
            lo = lo - (hi - lo);
            if lo < lit(-1e6) {
                return Err(Error::Construction("m(2 delta) <= ln2/300 has no solution".into()));
            }
        }
        for _ in 0..200 {
            let mid = (lo + hi) * lit(0.5);
            if m_at(mid) <= bound {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        ln_delta = lo;
        delta = lo.exp();
    }
    Ok(DeltaReport {
        delta: to_f64(delta),
        ln_delta: to_f64(ln_delta),
        window_delta: to_f64(window_delta),
        cap_delta: to_f64(cap),
        modulus_bound_active: active,
    })
}
