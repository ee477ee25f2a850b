use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::disc::DiscPoint;
use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};
use crate::velocity::VelocityGrid;

/// Why a trajectory integration stopped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Horizon,
    BoundaryEps,
    Error(String),
}

/// Sampled particle path in disc coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord<T> {
    pub times: Vec<T>,
    pub positions: Vec<Complex<T>>,
    /// `1 - |zeta|`, kept separately so that it stays accurate near the boundary.
    pub d: Vec<T>,
    pub terminated: Termination,
}

impl<T: Real> TrajectoryRecord<T> {
    /// Builds a record from `(t, d, phi)` samples.
    pub fn from_samples(samples: &[(T, T, T)], terminated: Termination) -> Result<Self> {
        let mut rec = TrajectoryRecord { times: vec![], positions: vec![], d: vec![], terminated };
        for &(t, d, phi) in samples {
            rec.push(t, d, phi);
        }
        rec.validate()?;
        Ok(rec)
    }

    fn push(&mut self, t: T, d: T, phi: T) {
        self.times.push(t);
        self.d.push(d);
        self.positions.push(Complex::from_polar(T::one() - d, phi));
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.times.len();
        if self.d.len() != n || self.positions.len() != n {
            return Err(Error::Config("record columns differ in length".into()));
        }
        if !self.times.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::Config("record times must increase strictly".into()));
        }
        if !self.d.iter().all(|&d| d > T::zero() && d <= T::one()) {
            return Err(Error::Config("record distances must lie in (0, 1]".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_abs_imag(&self) -> T {
        self.positions.iter().fold(T::zero(), |a, z| a.max(z.im.abs()))
    }

    pub fn min_d(&self) -> T {
        self.d.iter().copied().fold(T::infinity(), T::min)
    }

    /// Samples as CSV: `t,re,im,d`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,re,im,d\n");
        for i in 0..self.len() {
            out.push_str(&format!(
                "{:e},{:e},{:e},{:e}\n",
                to_f64(self.times[i]),
                to_f64(self.positions[i].re),
                to_f64(self.positions[i].im),
                to_f64(self.d[i])
            ));
        }
        out
    }
}

/// Controls for [`integrate_trajectory`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TrajectoryOptions<T: Real> {
    pub horizon: T,
    pub eps_stop: T,
    pub tol: T,
}

impl<T: Real> Default for TrajectoryOptions<T> {
    fn default() -> Self {
        TrajectoryOptions { horizon: lit(10.0), eps_stop: lit(1e-6), tol: lit(1e-9) }
    }
}

// Dormand-Prince 5(4); the field is autonomous so the nodes are not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

type State<T> = [T; 2];

fn rhs<T: Real>(field: &VelocityGrid<T>, x: &State<T>) -> Result<State<T>> {
    let (nr, ar) = field.rates(x[0].exp(), x[1])?;
    Ok([nr, ar])
}

/// Largest step keeping the displacement below a tenth of the distance to the boundary.
fn step_ceiling<T: Real>(x: &State<T>, k: &State<T>) -> T {
    let d = x[0].exp();
    let r = T::one() - d;
    let rel_speed = (k[0] * k[0] + (r * k[1] / d).powi(2)).sqrt();
    if rel_speed > T::zero() {
        lit::<T>(0.1) / rel_speed
    } else {
        T::infinity()
    }
}

/// Advects a particle through a precomputed field with an embedded
/// Runge-Kutta 5(4) pair in the variables `(ln d, arg zeta)`.
///
/// Integration stops at the horizon or once `d < eps_stop`. A lookup failure
/// after at least one accepted step ends the record with
/// [`Termination::Error`]; a failure at the start is returned as an error.
pub fn integrate_trajectory<T: Real>(
    field: &VelocityGrid<T>,
    zeta0: Complex<T>,
    opts: &TrajectoryOptions<T>,
) -> Result<TrajectoryRecord<T>> {
    let TrajectoryOptions { horizon, eps_stop, tol } = *opts;
    if !(tol >= lit(1e-10) && tol <= lit(1e-4)) {
        return Err(Error::Domain("tol must lie in [1e-10, 1e-4]".into()));
    }
    if !(eps_stop > T::zero() && zeta0.norm() < T::one() - eps_stop) {
        return Err(Error::Domain("need |zeta0| < 1 - eps_stop with eps_stop > 0".into()));
    }
    if !(horizon > T::zero()) {
        return Err(Error::Domain("horizon must be positive".into()));
    }
    let p0 = DiscPoint::from_complex(zeta0);
    let mut rec = TrajectoryRecord { times: vec![], positions: vec![], d: vec![], terminated: Termination::Horizon };
    rec.times.push(T::zero());
    rec.positions.push(zeta0);
    rec.d.push(p0.d);
    let mut x: State<T> = [p0.d.ln(), p0.phi];
    let mut t = T::zero();
    let mut k1 = rhs(field, &x)?;
    let ln_eps = eps_stop.ln();
    let mut h = step_ceiling(&x, &k1).min(horizon * lit(1e-3));
    let mut failures = 0usize;
    let mut accepted = 0usize;
    while t < horizon {
        h = h.min(step_ceiling(&x, &k1)).min(horizon - t);
        let mut k = [[T::zero(); 2]; 7];
        k[0] = k1;
        let mut stage_err = None;
        for s in 1..7 {
            let mut y = x;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = lit::<T>(A[s][j]);
                if a != T::zero() {
                    y[0] = y[0] + h * a * kj[0];
                    y[1] = y[1] + h * a * kj[1];
                }
            }
            match rhs(field, &y) {
                Ok(v) => k[s] = v,
                Err(e) => {
                    stage_err = Some(e);
                    break;
                }
            }
        }
        if let Some(e) = stage_err {
            failures += 1;
            if failures > 40 {
                if accepted == 0 {
                    return Err(e);
                }
                rec.terminated = Termination::Error(e.to_string());
                return Ok(rec);
            }
            h = h * lit(0.25);
            continue;
        }
        let mut xn = x;
        let mut err = T::zero();
        for i in 0..2 {
            let mut e = T::zero();
            for (s, ks) in k.iter().enumerate() {
                xn[i] = xn[i] + h * lit::<T>(B5[s]) * ks[i];
                e = e + h * lit::<T>(B5[s] - B4[s]) * ks[i];
            }
            err = err.max(e.abs() / (tol * (T::one() + x[i].abs())));
        }
        if err <= T::one() {
            failures = 0;
            accepted += 1;
            t = t + h;
            x = xn;
            k1 = k[6];
            rec.push(t, x[0].exp(), x[1]);
            if x[0] < ln_eps {
                rec.terminated = Termination::BoundaryEps;
                return Ok(rec);
            }
        }
        let factor = if err > T::zero() {
            (lit::<T>(0.9) * err.powf(lit(-0.2))).max(lit(0.2)).min(lit(5.0))
        } else {
            lit(5.0)
        };
        h = h * factor;
    }
    Ok(rec)
}
