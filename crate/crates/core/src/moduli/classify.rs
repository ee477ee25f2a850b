use serde::Serialize;

use crate::moduli::Modulus;
use crate::quadrature::{integrate_breaks, QuadOptions};
use crate::scalar::{lit, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceClass {
    /// `int_0^1 ds/q_m = inf`.
    Divergent,
    Convergent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiniClass {
    Dini,
    NonDini,
}

/// Dyadic-shell data used by the numeric classifier.
#[derive(Clone, Debug, Serialize)]
pub struct NumericEvidence<T: Real> {
    /// Shell indices `k`; shell `k` is `[2^-(k+1), 2^-k]`.
    pub ks: Vec<usize>,
    /// `int over shell k of ds/q_m`.
    pub q_increments: Vec<T>,
    /// `int over shell k of m(r)/r dr`.
    pub m_increments: Vec<T>,
    /// Fitted decay exponents `p` in `increment ~ A (k + c)^-p`.
    pub q_exponent: T,
    pub m_exponent: T,
    /// `(k+1) D_{k+1} / (k D_k)` for the `q` increments.
    pub harmonic_ratios: Vec<T>,
    /// Ratios over the upper half of the shells all on the side expected for the decided class.
    pub trend_monotone: bool,
    /// Exponent margin around 1 used for the decision.
    pub threshold: T,
}

#[derive(Clone, Debug, Serialize)]
pub struct Classification<T: Real> {
    pub divergence: DivergenceClass,
    pub dini: DiniClass,
    /// Decided by the numeric heuristic instead of an analytic rule.
    pub numeric_heuristic: bool,
    pub evidence: Option<NumericEvidence<T>>,
}

const K_MIN: usize = 4;
const K_MAX: usize = 40;

/// Classifies a modulus analytically where the family allows it and
/// numerically (flagged as heuristic) for tabulated moduli.
pub fn classify<T: Real>(m: &Modulus<T>) -> Classification<T> {
    let half_pi = T::FRAC_PI_2();
    let (divergence, dini) = match m {
        Modulus::Zero | Modulus::Linear { .. } => (DivergenceClass::Divergent, DiniClass::Dini),
        Modulus::CappedLog { a } => (
            if *a <= half_pi { DivergenceClass::Divergent } else { DivergenceClass::Convergent },
            if *a > T::zero() { DiniClass::NonDini } else { DiniClass::Dini },
        ),
        Modulus::IteratedLog { k, a } => {
            let dini = if *k == 2 && *a == T::zero() { DiniClass::Dini } else { DiniClass::NonDini };
            (
                if *a <= half_pi { DivergenceClass::Divergent } else { DivergenceClass::Convergent },
                dini,
            )
        }
        Modulus::Tabulated(_) => return classify_numeric(m),
    };
    Classification { divergence, dini, numeric_heuristic: false, evidence: None }
}

/// Numeric classification from dyadic shells `k = 4..=40`.
///
/// Shell increments are fitted to `A (k + c)^-p`; a sum is declared divergent
/// when `p <= 1 + 0.05`.
pub fn classify_numeric<T: Real>(m: &Modulus<T>) -> Classification<T> {
    let ln2 = T::LN_2();
    let opts = QuadOptions::new(lit(1e-12), T::zero());
    let mut ks = Vec::new();
    let mut dq = Vec::new();
    let mut dm = Vec::new();
    for k in K_MIN..=K_MAX {
        let u0 = ln2 * lit(k as f64);
        let u1 = ln2 * lit((k + 1) as f64);
        let mut pts = vec![u0];
        pts.extend(m.log_breakpoints().into_iter().filter(|&b| b > u0 && b < u1));
        pts.push(u1);
        let q = integrate_breaks(|v: T| (-m.log_weight(v)).exp(), &pts, &opts).value;
        let mi = integrate_breaks(|v: T| m.eval_log(v), &pts, &opts).value;
        ks.push(k);
        dq.push(q);
        dm.push(mi);
    }
    let threshold = lit::<T>(0.05);
    let q_exponent = fit_exponent(&ks, &dq);
    let m_exponent = fit_exponent(&ks, &dm);
    let divergence = if q_exponent <= T::one() + threshold {
        DivergenceClass::Divergent
    } else {
        DivergenceClass::Convergent
    };
    let dini = if m_exponent > T::one() + threshold { DiniClass::Dini } else { DiniClass::NonDini };
    let harmonic_ratios: Vec<T> = (0..ks.len() - 1)
        .map(|i| {
            let k = lit::<T>(ks[i] as f64);
            (k + T::one()) * dq[i + 1] / (k * dq[i])
        })
        .collect();
    let slack = lit::<T>(1e-12);
    // Near the threshold the first shells carry a 1/k^2 transient of either sign.
    let upper = &harmonic_ratios[harmonic_ratios.len() / 2..];
    let trend_monotone = match divergence {
        DivergenceClass::Divergent => upper.iter().all(|&r| r >= T::one() - slack),
        DivergenceClass::Convergent => upper.iter().all(|&r| r <= T::one() + slack),
    };
    Classification {
        divergence,
        dini,
        numeric_heuristic: true,
        evidence: Some(NumericEvidence {
            ks,
            q_increments: dq,
            m_increments: dm,
            q_exponent,
            m_exponent,
            harmonic_ratios,
            trend_monotone,
            threshold,
        }),
    }
}

/// Least-squares fit of `ln D_k = ln A - p ln(k + c)`, scanning the offset `c`.
fn fit_exponent<T: Real>(ks: &[usize], d: &[T]) -> T {
    let scale = d.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
    if scale <= T::min_positive_value() {
        return T::infinity();
    }
    let floor = scale * T::epsilon() * lit(16.0);
    let pts: Vec<(T, T)> = ks
        .iter()
        .zip(d)
        .filter(|(_, &v)| v > floor)
        .map(|(&k, &v)| (lit::<T>(k as f64), v.ln()))
        .collect();
    if pts.len() < 4 {
        return T::infinity();
    }
    let kmin = pts[0].0;
    let mut best = (T::infinity(), T::zero());
    let n = 400;
    for i in 0..=n {
        // c from -(kmin - 0.5) up to about 1e4, spaced logarithmically in (c + kmin).
        let lo = lit::<T>(0.5).ln();
        let hi = (lit::<T>(1e4) + kmin).ln();
        let shift = (lo + (hi - lo) * lit(i as f64 / n as f64)).exp();
        let c = shift - kmin;
        let xs: Vec<T> = pts.iter().map(|(k, _)| (*k + c).ln()).collect();
        let np = lit::<T>(pts.len() as f64);
        let mx = xs.iter().copied().sum::<T>() / np;
        let my = pts.iter().map(|p| p.1).sum::<T>() / np;
        let mut sxx = T::zero();
        let mut sxy = T::zero();
        for (x, p) in xs.iter().zip(&pts) {
            sxx = sxx + (*x - mx) * (*x - mx);
            sxy = sxy + (*x - mx) * (p.1 - my);
        }
        if sxx <= T::zero() {
            continue;
        }
        let slope = sxy / sxx;
        let sse: T = xs
            .iter()
            .zip(&pts)
            .map(|(x, p)| {
                let r = p.1 - (my + slope * (*x - mx));
                r * r
            })
            .sum();
        if sse < best.0 {
            best = (sse, -slope);
        }
    }
    best.1
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn analytic_rules() {
        let c = classify(&Modulus::capped_log(FRAC_PI_2 - 0.1).unwrap());
        assert_eq!((c.divergence, c.dini), (DivergenceClass::Divergent, DiniClass::NonDini));
        let c = classify(&Modulus::capped_log(FRAC_PI_2 + 0.1).unwrap());
        assert_eq!((c.divergence, c.dini), (DivergenceClass::Convergent, DiniClass::NonDini));
        let c = classify(&Modulus::<f64>::Zero);
        assert_eq!((c.divergence, c.dini), (DivergenceClass::Divergent, DiniClass::Dini));
        let c = classify(&Modulus::iterated_log(3, 0.5).unwrap());
        assert_eq!((c.divergence, c.dini), (DivergenceClass::Divergent, DiniClass::NonDini));
        assert!(!c.numeric_heuristic);
    }

    #[test]
    fn numeric_agrees_with_analytic() {
        for (m, div, dini) in [
            (Modulus::capped_log(FRAC_PI_2 - 0.1).unwrap(), DivergenceClass::Divergent, DiniClass::NonDini),
            (Modulus::capped_log(FRAC_PI_2 + 0.1).unwrap(), DivergenceClass::Convergent, DiniClass::NonDini),
            (Modulus::capped_log(PI).unwrap(), DivergenceClass::Convergent, DiniClass::NonDini),
            (Modulus::linear(1.0).unwrap(), DivergenceClass::Divergent, DiniClass::Dini),
            (Modulus::Zero, DivergenceClass::Divergent, DiniClass::Dini),
        ] {
            let c = classify_numeric(&m);
            let ev = c.evidence.as_ref().unwrap();
            assert_eq!(c.divergence, div, "{m:?} p={}", ev.q_exponent);
            assert_eq!(c.dini, dini, "{m:?} p={}", ev.m_exponent);
        }
    }

    #[test]
    fn tabulated_is_flagged() {
        let t = Modulus::tabulated(vec![[0.0, 0.0], [0.1, 0.2], [6.0, 0.5]]).unwrap();
        let c = classify(&t);
        assert!(c.numeric_heuristic);
        assert_eq!(c.divergence, DivergenceClass::Divergent);
        assert_eq!(c.dini, DiniClass::Dini);
    }
}
