use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, two_over_pi, Real};

/// A modulus of continuity `m: [0, 2pi] -> [0, inf)` with `m(0) = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModulusRepr<T>", into = "ModulusRepr<T>")]
#[serde(bound = "T: Real")]
pub enum Modulus<T: Real> {
    Zero,
    /// `m(r) = c r`.
    Linear { c: T },
    /// `a / ln(1/r)` below `r* = e^-2`, constant `a/2` above.
    CappedLog { a: T },
    /// `a/(L_1...L_{k-1}) + (pi/2) sum_{j<=k-2} 1/(L_1...L_j)` with `L_j` the
    /// `j`-fold logarithm of `1/r`, held constant above the point where
    /// `L_{k-1} = e`.
    IteratedLog { k: u32, a: T },
    Tabulated(Tabulated<T>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
#[serde(bound = "T: Real")]
enum ModulusRepr<T: Real> {
    Zero,
    Linear { c: T },
    CappedLog { a: T },
    IteratedLog { k: u32, a: T },
    Tabulated { knots: Vec<[T; 2]> },
}

impl<T: Real> TryFrom<ModulusRepr<T>> for Modulus<T> {
    type Error = Error;
    fn try_from(r: ModulusRepr<T>) -> Result<Self> {
        match r {
            ModulusRepr::Zero => Ok(Modulus::Zero),
            ModulusRepr::Linear { c } => Modulus::linear(c),
            ModulusRepr::CappedLog { a } => Modulus::capped_log(a),
            ModulusRepr::IteratedLog { k, a } => Modulus::iterated_log(k, a),
            ModulusRepr::Tabulated { knots } => Modulus::tabulated(knots),
        }
    }
}

impl<T: Real> From<Modulus<T>> for ModulusRepr<T> {
    fn from(m: Modulus<T>) -> Self {
        match m {
            Modulus::Zero => ModulusRepr::Zero,
            Modulus::Linear { c } => ModulusRepr::Linear { c },
            Modulus::CappedLog { a } => ModulusRepr::CappedLog { a },
            Modulus::IteratedLog { k, a } => ModulusRepr::IteratedLog { k, a },
            Modulus::Tabulated(t) => ModulusRepr::Tabulated { knots: t.knots },
        }
    }
}

/// Concave piecewise-linear modulus given by knots `(r_i, m_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tabulated<T: Real> {
    knots: Vec<[T; 2]>,
    // Knots with r = 1 inserted, slopes per segment and int_{r_i}^1 m/r for r_i <= 1.
    r: Vec<T>,
    m: Vec<T>,
    slope: Vec<T>,
    cum: Vec<T>,
}

impl<T: Real> Tabulated<T> {
    fn new(knots: Vec<[T; 2]>, check_monotone: bool) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidModulus("tabulated modulus needs at least two knots".into()));
        }
        if knots[0] != [T::zero(), T::zero()] {
            return Err(Error::InvalidModulus("first knot must be (0, 0)".into()));
        }
        let two_pi = T::TAU();
        for (i, w) in knots.windows(2).enumerate() {
            let ([r0, m0], [r1, m1]) = (w[0], w[1]);
            if !(r1.is_finite() && m1.is_finite()) {
                return Err(Error::InvalidModulus(format!("knot {} is not finite", i + 1)));
            }
            if !(r1 > r0) {
                return Err(Error::InvalidModulus(format!("knot radii not increasing at index {}", i + 1)));
            }
            if check_monotone && m1 < m0 {
                return Err(Error::InvalidModulus(format!(
                    "decreasing knot at index {}: m({}) = {} < {}",
                    i + 1,
                    to_f64(r1),
                    to_f64(m1),
                    to_f64(m0)
                )));
            }
        }
        let last = knots[knots.len() - 1][0];
        if last > two_pi * (T::one() + lit(1e-12)) {
            return Err(Error::InvalidModulus(format!("knot radius {} exceeds 2pi", to_f64(last))));
        }
        let mut r: Vec<T> = knots.iter().map(|k| k[0]).collect();
        let mut m: Vec<T> = knots.iter().map(|k| k[1]).collect();
        if let Err(pos) = r.binary_search_by(|x| x.partial_cmp(&T::one()).unwrap()) {
            if pos < r.len() {
                let t = (T::one() - r[pos - 1]) / (r[pos] - r[pos - 1]);
                let v = m[pos - 1] + t * (m[pos] - m[pos - 1]);
                r.insert(pos, T::one());
                m.insert(pos, v);
            } else {
                let v = m[pos - 1];
                r.push(T::one());
                m.push(v);
            }
        }
        let n = r.len();
        let slope: Vec<T> = (0..n - 1).map(|i| (m[i + 1] - m[i]) / (r[i + 1] - r[i])).collect();
        let mut cum = vec![T::zero(); n];
        let i1 = r.iter().position(|&x| x >= T::one()).unwrap_or(n - 1);
        for i in (0..i1).rev() {
            let ln_ratio = if i == 0 { T::infinity() } else { (r[i + 1] / r[i]).ln() };
            cum[i] = cum[i + 1] + seg_integral(r[i], m[i], slope[i], r[i], r[i + 1], ln_ratio);
        }
        Ok(Tabulated { knots, r, m, slope, cum })
    }

    pub fn knots(&self) -> &[[T; 2]] {
        &self.knots
    }

    fn eval(&self, x: T) -> T {
        let n = self.r.len();
        if x >= self.r[n - 1] {
            return self.m[n - 1];
        }
        let i = self.segment(x);
        self.m[i] + self.slope[i] * (x - self.r[i])
    }

    fn segment(&self, x: T) -> usize {
        match self.r.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.r.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.r.len() - 2),
        }
    }

    fn eval_log(&self, u: T) -> T {
        if u > -self.r[1].ln() {
            return self.slope[0] * (-u).exp();
        }
        self.eval((-u).exp())
    }

    /// `int_{e^-u}^1 m(r)/r dr` for `u >= 0`.
    fn log_integral(&self, u: T) -> T {
        if u <= T::zero() {
            return T::zero();
        }
        if u > -self.r[1].ln() {
            let x = (-u).exp();
            return self.cum[1] + self.slope[0] * (self.r[1] - x);
        }
        let x = (-u).exp();
        let i = self.segment(x);
        self.cum[i + 1] + seg_integral(self.r[i], self.m[i], self.slope[i], x, self.r[i + 1], self.r[i + 1].ln() + u)
    }

    fn is_concave(&self) -> bool {
        self.slope
            .windows(2)
            .all(|w| w[1] <= w[0] * (T::one() + lit(1e-9)) + lit(1e-12))
    }

    /// Smallest positive knot radius.
    pub(crate) fn first_radius(&self) -> T {
        self.r[1]
    }
}

// int_x^{r1} (m_i + s (r - r_i)) / r dr, with ln(r1/x) supplied.
fn seg_integral<T: Real>(ri: T, mi: T, s: T, x: T, r1: T, ln_ratio: T) -> T {
    let c = mi - s * ri;
    let log_part = if c == T::zero() { T::zero() } else { c * ln_ratio };
    log_part + s * (r1 - x)
}

/// Iterated logarithm `l_j(u)` with `l_1 = u`.
pub(crate) fn iter_log<T: Real>(u: T, j: u32) -> T {
    let mut x = u;
    for _ in 1..j {
        x = x.ln();
    }
    x
}

impl<T: Real> Modulus<T> {
    pub fn zero() -> Self {
        Modulus::Zero
    }

    pub fn linear(c: T) -> Result<Self> {
        if !(c >= T::zero() && c.is_finite()) {
            return Err(Error::InvalidModulus(format!("linear slope must be finite and >= 0, got {c}")));
        }
        Ok(Modulus::Linear { c })
    }

    pub fn capped_log(a: T) -> Result<Self> {
        if !(a >= T::zero() && a.is_finite()) {
            return Err(Error::InvalidModulus(format!("capped_log needs finite a >= 0, got {a}")));
        }
        Ok(Modulus::CappedLog { a })
    }

    pub fn iterated_log(k: u32, a: T) -> Result<Self> {
        if !(2..=4).contains(&k) {
            return Err(Error::InvalidModulus(format!("iterated_log supports k in 2..=4, got {k}")));
        }
        if !(a >= T::zero() && a < T::FRAC_PI_2()) {
            return Err(Error::InvalidModulus(format!("iterated_log needs a in [0, pi/2), got {a}")));
        }
        Ok(Modulus::IteratedLog { k, a })
    }

    pub fn tabulated(knots: Vec<[T; 2]>) -> Result<Self> {
        Ok(Modulus::Tabulated(Tabulated::new(knots, true)?))
    }

    /// Like [`Self::tabulated`] but accepts decreasing values, so that a
    /// candidate table can be inspected with [`crate::moduli::validate_modulus`].
    pub fn tabulated_unchecked(knots: Vec<[T; 2]>) -> Result<Self> {
        Ok(Modulus::Tabulated(Tabulated::new(knots, false)?))
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Modulus::Zero => "zero",
            Modulus::Linear { .. } => "linear",
            Modulus::CappedLog { .. } => "capped_log",
            Modulus::IteratedLog { .. } => "iterated_log",
            Modulus::Tabulated(_) => "tabulated",
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Modulus::Zero => true,
            Modulus::Linear { c } => *c == T::zero(),
            Modulus::CappedLog { a } => *a == T::zero(),
            Modulus::IteratedLog { .. } => false,
            Modulus::Tabulated(t) => t.m.iter().all(|v| *v == T::zero()),
        }
    }

    pub fn is_concave(&self) -> bool {
        match self {
            Modulus::Tabulated(t) => t.is_concave(),
            _ => true,
        }
    }

    /// `u* = ln(1/r*)` for the iterated family: `l_{k-1}(u*) = e`.
    pub(crate) fn iterated_cap(k: u32) -> T {
        let mut x = T::E();
        for _ in 2..k {
            x = x.exp();
        }
        x
    }

    /// `m(r)` for `r` in `[0, 2pi]`.
    pub fn eval(&self, r: T) -> Result<T> {
        if !(r >= T::zero() && r <= T::TAU() * (T::one() + lit(1e-12))) {
            return Err(Error::Domain(format!("modulus argument {} outside [0, 2pi]", to_f64(r))));
        }
        Ok(self.eval_unchecked(r))
    }

    /// `m(r)` without range checks; radii above `2pi` see the value at `2pi`.
    pub fn eval_unchecked(&self, r: T) -> T {
        if r <= T::zero() {
            return T::zero();
        }
        let r = r.min(T::TAU());
        match self {
            Modulus::Zero => T::zero(),
            Modulus::Linear { c } => *c * r,
            Modulus::Tabulated(t) => t.eval(r),
            _ if r >= T::one() => self.eval_log(T::zero()),
            _ => self.eval_log(-r.ln()),
        }
    }

    /// `m(e^-u)` for `u >= 0`.
    pub fn eval_log(&self, u: T) -> T {
        let u = u.max(T::zero());
        match self {
            Modulus::Zero => T::zero(),
            Modulus::Linear { c } => *c * (-u).exp(),
            Modulus::CappedLog { a } => *a / u.max(lit(2.0)),
            Modulus::IteratedLog { k, a } => {
                let u = u.max(Self::iterated_cap(*k));
                let mut prod = T::one();
                let mut sum = T::zero();
                let mut l = u;
                for j in 1..*k {
                    prod = prod * l;
                    if j <= k - 2 {
                        sum = sum + T::one() / prod;
                    }
                    l = l.ln();
                }
                *a / prod + T::FRAC_PI_2() * sum
            }
            Modulus::Tabulated(t) => t.eval_log(u),
        }
    }

    /// `int_0^u m(e^-v) dv = int_{e^-u}^1 m(r)/r dr` for `u >= 0`, in closed form.
    pub fn log_integral(&self, u: T) -> T {
        if u <= T::zero() {
            return T::zero();
        }
        match self {
            Modulus::Zero => T::zero(),
            Modulus::Linear { c } => *c * (-(-u).exp_m1()),
            Modulus::CappedLog { a } => {
                let two = lit::<T>(2.0);
                if u <= two {
                    *a * u / two
                } else {
                    *a + *a * (u / two).ln()
                }
            }
            Modulus::IteratedLog { k, a } => {
                let us = Self::iterated_cap(*k);
                let cap = self.eval_log(us);
                if u <= us {
                    return cap * u;
                }
                let mut acc = cap * us + *a * (iter_log(u, *k) - iter_log(us, *k));
                for j in 2..*k {
                    acc = acc + T::FRAC_PI_2() * (iter_log(u, j) - iter_log(us, j));
                }
                acc
            }
            Modulus::Tabulated(t) => t.log_integral(u),
        }
    }

    /// `ln Q_m(e^-u)`.
    pub fn log_weight(&self, u: T) -> T {
        two_over_pi::<T>() * self.log_integral(u)
    }

    /// Start of the region where `1/Q_m` has a closed-form antiderivative in `u`,
    /// together with that antiderivative.
    pub(crate) fn tail_antiderivative(&self, u: T) -> Option<T> {
        let p = two_over_pi::<T>();
        match self {
            Modulus::Zero => Some(u),
            Modulus::Linear { c } => Some((-p * *c).exp() * u),
            Modulus::Tabulated(t) => {
                Some((-p * t.cum[0]).exp() * u)
            }
            Modulus::CappedLog { a } => {
                let q = p * *a;
                let two = lit::<T>(2.0);
                let x = u / two;
                if (q - T::one()).abs() < lit(1e-12) {
                    Some(two * (-q).exp() * x.ln())
                } else {
                    Some(two * (-q).exp() * x.powf(T::one() - q) / (T::one() - q))
                }
            }
            Modulus::IteratedLog { k, a } => {
                let us = Self::iterated_cap(*k);
                let q = p * *a;
                // 1/Q = C / (l_1 ... l_{k-2} l_{k-1}^q) beyond u*.
                let mut ln_c = -self.log_weight(us);
                for j in 1..k - 1 {
                    ln_c = ln_c + iter_log(us, j).ln();
                }
                ln_c = ln_c + q * iter_log(us, k - 1).ln();
                let l = iter_log(u, k - 1);
                Some(ln_c.exp() * l.powf(T::one() - q) / (T::one() - q))
            }
        }
    }

    /// Value of `u` beyond which [`Self::tail_antiderivative`] is exact.
    pub(crate) fn tail_start(&self) -> T {
        match self {
            Modulus::Zero => T::zero(),
            Modulus::Linear { .. } => lit(40.0),
            Modulus::Tabulated(t) => -t.first_radius().ln() + lit(40.0),
            Modulus::CappedLog { .. } => lit(2.0),
            Modulus::IteratedLog { k, .. } => Self::iterated_cap(*k),
        }
    }

    /// `lim_{u -> inf}` of the tail antiderivative, `None` when it diverges.
    pub(crate) fn tail_limit(&self) -> Option<T> {
        match self {
            Modulus::CappedLog { a } => {
                let q = two_over_pi::<T>() * *a;
                (q > T::one() + lit(1e-12)).then(T::zero)
            }
            _ => None,
        }
    }

    /// Kinks of `u -> m(e^-u)` that quadratures should split at.
    pub(crate) fn log_breakpoints(&self) -> Vec<T> {
        match self {
            Modulus::CappedLog { .. } => vec![lit(2.0)],
            Modulus::IteratedLog { k, .. } => vec![Self::iterated_cap(*k)],
            _ => Vec::new(),
        }
    }
}
