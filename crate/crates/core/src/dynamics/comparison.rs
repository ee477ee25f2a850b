use serde::{Deserialize, Serialize};

use crate::dynamics::{Termination, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::moduli::{Modulus, RateFunctions};
use crate::scalar::{lit, Real};

/// Autonomous comparison law for `d(t)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparisonLaw {
    /// `d' = -c q_m(d)`, i.e. `Phi(d(t)) = Phi(d0) + c t`.
    Linear,
    /// `d' = -c q_m(d) Phi(d)`, i.e. `ln Phi(d(t)) = ln Phi(d0) + c t`.
    Logarithmic,
}

/// Exact solution of a comparison ODE by inversion of `Phi(y) = int_y^1 ds/q_m`.
#[derive(Clone, Debug)]
pub struct ComparisonOde<T: Real> {
    rates: RateFunctions<T>,
    law: ComparisonLaw,
    c: T,
    d0: T,
    phi0: T,
}

pub fn comparison_ode<T: Real>(m: &Modulus<T>, c: T, d0: T, law: ComparisonLaw) -> Result<ComparisonOde<T>> {
    if !(d0 > T::zero() && d0 < T::one()) {
        return Err(Error::Domain("d0 must lie in (0, 1)".into()));
    }
    if !(c > T::zero() && c.is_finite()) {
        return Err(Error::Domain("c must be positive".into()));
    }
    let rates = RateFunctions::new(m.clone());
    let phi0 = rates.rate_integral(d0)?;
    Ok(ComparisonOde { rates, law, c, d0, phi0 })
}

impl<T: Real> ComparisonOde<T> {
    pub fn rates(&self) -> &RateFunctions<T> {
        &self.rates
    }

    pub fn d0(&self) -> T {
        self.d0
    }

    /// `ln Phi` reached at time `t`.
    fn log_phi_at(&self, t: T) -> T {
        match self.law {
            ComparisonLaw::Linear => (self.phi0 + self.c * t).ln(),
            ComparisonLaw::Logarithmic => self.phi0.ln() + self.c * t,
        }
    }

    /// Time at which `d` reaches 0; finite only in the convergent class.
    pub fn arrival_time(&self) -> Option<T> {
        let pinf = self.rates.phi_zero()?;
        Some(match self.law {
            ComparisonLaw::Linear => (pinf - self.phi0) / self.c,
            ComparisonLaw::Logarithmic => (pinf.ln() - self.phi0.ln()) / self.c,
        })
    }

    /// `ln(1/d(t))`; infinite after the arrival time.
    pub fn log_inverse_d(&self, t: T) -> Result<T> {
        if t <= T::zero() {
            return Ok(-self.d0.ln());
        }
        if let Some(ta) = self.arrival_time() {
            if t >= ta {
                return Ok(T::infinity());
            }
        }
        self.rates.rho_log(self.log_phi_at(t))
    }

    pub fn d_at(&self, t: T) -> Result<T> {
        Ok((-self.log_inverse_d(t)?).exp())
    }

    /// `n` samples on `[0, horizon]`, truncated before the arrival time.
    pub fn curve(&self, horizon: T, n: usize) -> Result<(Vec<T>, Vec<T>)> {
        let end = match self.arrival_time() {
            Some(ta) if ta < horizon => ta * (T::one() - lit(1e-9)),
            _ => horizon,
        };
        let n = n.max(2);
        let mut ts = Vec::with_capacity(n);
        let mut ds = Vec::with_capacity(n);
        for i in 0..n {
            let t = end * lit(i as f64) / lit((n - 1) as f64);
            let d = self.d_at(t)?;
            if !(d > T::zero()) {
                break;
            }
            ts.push(t);
            ds.push(d);
        }
        Ok((ts, ds))
    }

    /// The curve as a trajectory on the positive real axis.
    pub fn to_record(&self, horizon: T, n: usize) -> Result<TrajectoryRecord<T>> {
        let (ts, ds) = self.curve(horizon, n)?;
        let samples: Vec<(T, T, T)> = ts.into_iter().zip(ds).map(|(t, d)| (t, d, T::zero())).collect();
        TrajectoryRecord::from_samples(&samples, Termination::Horizon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_modulus_closed_forms() {
        let m = Modulus::<f64>::zero();
        let d0 = (-1.0f64).exp();
        let log = comparison_ode(&m, 1.0, d0, ComparisonLaw::Logarithmic).unwrap();
        let lin = comparison_ode(&m, 1.0, d0, ComparisonLaw::Linear).unwrap();
        for t in [0.0, 0.5, 1.0, 2.0, 3.0] {
            let want = -(t as f64).exp();
            assert!((log.log_inverse_d(t).unwrap() + want).abs() < 1e-9 * (1.0 - want));
            assert!((lin.log_inverse_d(t).unwrap() - (1.0 + t)).abs() < 1e-9);
        }
        assert!(log.arrival_time().is_none());
    }

    #[test]
    fn doubling_c_compresses_time() {
        let m = Modulus::capped_log(1.0).unwrap();
        for law in [ComparisonLaw::Linear, ComparisonLaw::Logarithmic] {
            let a = comparison_ode::<f64>(&m, 1.0, 0.3, law).unwrap();
            let b = comparison_ode(&m, 2.0, 0.3, law).unwrap();
            for t in [0.1, 0.7, 2.5] {
                let (x, y) = (a.log_inverse_d(t).unwrap(), b.log_inverse_d(t / 2.0).unwrap());
                assert!((x - y).abs() < 1e-10 * x, "{x} {y}");
            }
        }
    }
}
