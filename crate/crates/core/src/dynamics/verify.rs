use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conformal::ConformalDomain;
use crate::disc::{angle_gap, wrap_angle, DiscPoint};
use crate::dynamics::fit::{lad_line, ols_line};
use crate::dynamics::TrajectoryRecord;
use crate::error::{Error, Result};
use crate::moduli::{Modulus, RateFunctions};
use crate::quadrature::{cubature_cells, CubatureOptions};
use crate::scalar::{lit, to_f64, Real};
use crate::velocity::{
    boundary_distance_rate, boundary_distance_rate_plain, disc_layout, VelocityOptions, VorticityField,
};

/// Largest constant accepted in front of `||omega|| t`.
pub const CONSTANT_CEILING: f64 = 500.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Lower,
    Upper,
}

/// Verdict of a rate-bound check in the variable `y = ln int_d^1 ds/q_m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound: BoundKind,
    /// Fitted slope constant: `C` in `y <= C ||omega|| t + c0` or `c` in `y >= c t + c0`.
    #[serde(rename = "C_fit")]
    pub c_fit: f64,
    pub c0_fit: f64,
    pub margin: f64,
    /// Largest secant slope of `y` divided by `||omega||` (lower bound only).
    pub lipschitz: Option<f64>,
    pub pass: bool,
    pub samples: usize,
    pub tail_samples: usize,
    pub y_first: f64,
    pub y_last: f64,
}

/// `y(t) = ln int_{d(t)}^1 ds/q_m(s)` along a record.
pub fn y_curve<T: Real>(rec: &TrajectoryRecord<T>, rates: &RateFunctions<T>) -> Vec<T> {
    rec.d.iter().map(|&d| rates.phi_log(-d.ln()).ln()).collect()
}

fn divergent_rates<T: Real>(m: &Modulus<T>) -> Result<RateFunctions<T>> {
    let rates = RateFunctions::new(m.clone());
    if rates.phi_zero().is_some() {
        return Err(Error::Domain(format!(
            "the {} modulus is in the convergent class; the rate bound does not apply",
            m.family_name()
        )));
    }
    Ok(rates)
}

/// Checks `y(t) <= C ||omega|| t + c0` with `C <= 500`.
///
/// `C` is the least-absolute-deviation slope of the tail half, `c0` the
/// smallest intercept making the line an envelope of every sample.
pub fn verify_lower_bound<T: Real>(rec: &TrajectoryRecord<T>, m: &Modulus<T>, sup_norm: T) -> Result<BoundReport> {
    rec.validate()?;
    if rec.len() < 2 {
        return Err(Error::Inconclusive("record has fewer than 2 samples".into()));
    }
    let rates = divergent_rates(m)?;
    let y = y_curve(rec, &rates);
    let t = &rec.times;
    let n = rec.len();
    let tail = n / 2;
    let (slope, _) = lad_line(&t[tail..], &y[tail..]);
    let slope = slope.max(T::zero());
    let c0 = (0..n).map(|i| y[i] - slope * t[i]).fold(-T::infinity(), T::max);
    let margin = (0..n).map(|i| slope * t[i] + c0 - y[i]).fold(T::infinity(), T::min);
    let secant = (1..n)
        .map(|i| (y[i] - y[i - 1]) / (t[i] - t[i - 1]))
        .fold(T::zero(), T::max);
    let per_norm = |s: T| -> f64 {
        if s <= T::zero() {
            0.0
        } else if sup_norm > T::zero() {
            to_f64(s / sup_norm)
        } else {
            f64::INFINITY
        }
    };
    let c_fit = per_norm(slope);
    let lipschitz = per_norm(secant);
    let margin = to_f64(margin);
    Ok(BoundReport {
        bound: BoundKind::Lower,
        c_fit,
        c0_fit: to_f64(c0),
        margin,
        lipschitz: Some(lipschitz),
        pass: c_fit <= CONSTANT_CEILING && lipschitz <= CONSTANT_CEILING && margin >= -1e-3,
        samples: n,
        tail_samples: n - tail,
        y_first: to_f64(y[0]),
        y_last: to_f64(y[n - 1]),
    })
}

/// Checks linear growth `y(t) >= c t + c0` with `c > 0` over the tail half.
pub fn verify_upper_bound<T: Real>(rec: &TrajectoryRecord<T>, m: &Modulus<T>) -> Result<BoundReport> {
    rec.validate()?;
    let rates = divergent_rates(m)?;
    let n = rec.len();
    let tail = n / 2;
    if n - tail < 100 {
        return Err(Error::Inconclusive(format!("tail holds {} samples, at least 100 are needed", n - tail)));
    }
    let y = y_curve(rec, &rates);
    let t = &rec.times;
    let (slope, _) = lad_line(&t[tail..], &y[tail..]);
    let slope = slope.max(T::zero());
    let c0 = (tail..n).map(|i| y[i] - slope * t[i]).fold(T::infinity(), T::min);
    let margin = (tail..n).map(|i| y[i] - slope * t[i] - c0).fold(T::infinity(), T::min);
    let margin = to_f64(margin);
    Ok(BoundReport {
        bound: BoundKind::Upper,
        c_fit: to_f64(slope),
        c0_fit: to_f64(c0),
        margin,
        lipschitz: None,
        pass: slope > T::zero() && margin >= -1e-3,
        samples: n,
        tail_samples: n - tail,
        y_first: to_f64(y[0]),
        y_last: to_f64(y[n - 1]),
    })
}

/// Verdict of the finite-time arrival check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrivalReport {
    pub reached: bool,
    pub d_target: f64,
    pub t_reached: Option<f64>,
    /// Robust lower envelope (10th percentile) of `-d'/q_m(d)` over the tail.
    pub c_fit: f64,
    /// `min (-d'/q_m(d)) / c_fit - 1` over the tail.
    pub margin: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// Last sample time plus the remaining time of `d' = -c_fit q_m(d)`.
    pub estimated_arrival: Option<f64>,
    pub pass: bool,
}

/// Checks that `d` drops below `d_target` and that `d' <= -c q_m(d)` on the tail half.
pub fn verify_arrival<T: Real>(rec: &TrajectoryRecord<T>, m: &Modulus<T>, d_target: T) -> Result<ArrivalReport> {
    rec.validate()?;
    let rates = RateFunctions::new(m.clone());
    let Some(phi_inf) = rates.phi_zero() else {
        return Err(Error::Domain("finite arrival needs a convergent modulus".into()));
    };
    let n = rec.len();
    if n < 8 {
        return Err(Error::Inconclusive("record has fewer than 8 samples".into()));
    }
    let t_reached = rec.d.iter().position(|&d| d < d_target).map(|i| to_f64(rec.times[i]));
    let tail = n / 2;
    let mut ratios = Vec::with_capacity(n - tail);
    for i in tail.max(1)..n {
        let dt = rec.times[i] - rec.times[i - 1];
        let (a, b) = (rec.d[i - 1], rec.d[i]);
        let mid = (a * b).sqrt();
        let q = rates.big_q(mid)?;
        ratios.push(-(b.ln() - a.ln()) / dt / q);
    }
    let mut sorted = ratios.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let c_fit = sorted[(sorted.len() - 1) / 10];
    let ratio_min = sorted[0];
    let ratio_max = sorted[sorted.len() - 1];
    let margin = if c_fit > T::zero() { ratio_min / c_fit - T::one() } else { -T::one() };
    let estimated_arrival = if c_fit > T::zero() {
        let d_last = rec.d[n - 1];
        Some(to_f64(rec.times[n - 1] + (phi_inf - rates.rate_integral(d_last)?) / c_fit))
    } else {
        None
    };
    let reached = t_reached.is_some();
    Ok(ArrivalReport {
        reached,
        d_target: to_f64(d_target),
        t_reached,
        c_fit: to_f64(c_fit),
        margin: to_f64(margin),
        ratio_min: to_f64(ratio_min),
        ratio_max: to_f64(ratio_max),
        estimated_arrival,
        pass: reached && c_fit > T::zero() && margin >= lit(-0.05),
    })
}

/// One sample of the boundedness check for the disc kernel integral.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma31Row {
    pub xi: [f64; 2],
    pub one_minus_abs: f64,
    pub lhs: Option<f64>,
    /// `Q_m(1 - |xi|)`.
    pub q: f64,
    /// `int_{1-|xi|}^1 ds/(s Q_m(s))`.
    pub phi: f64,
    /// `lhs / (Q (phi + 1))`.
    pub ratio_unit: Option<f64>,
    /// `lhs / (Q (phi + C_T_fit))`.
    pub ratio_fit: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma31Report {
    pub rows: Vec<Lemma31Row>,
    #[serde(rename = "C_fit")]
    pub c_fit: f64,
    #[serde(rename = "C_T_fit")]
    pub c_t_fit: f64,
    pub max_ratio: f64,
    pub median_ratio: f64,
    pub pass: bool,
}

/// `(1/det DS(xi)) int_D (1-|z|) |xi . z^perp| / (|xi-z|^2 ||z|^2 xi - z|^2) det DS(z) dz`.
pub fn lemma31_lhs<T: Real>(dom: &ConformalDomain<T>, xi: Complex<T>, rel_tol: T) -> Result<T> {
    let p = crate::conformal::domain::checked(xi)?;
    let folded = dom.is_symmetric();
    let rects = disc_layout(dom, &p, folded, &[], &[]);
    let log_j0 = dom.log_det_ds_at(&p);
    let r1 = p.r();
    let term = |z: &DiscPoint<T>| -> T {
        let dist = p.dist2(z);
        let refl = p.reflected_dist2(z);
        let cross = r1 * z.r() * angle_gap(p.phi, z.phi).sin().abs();
        z.d * cross / (dist * refl) * (dom.log_det_ds_at(z) - log_j0).exp()
    };
    let f = |x: T, y: T| -> [T; 1] {
        let z = DiscPoint { d: x, phi: wrap_angle(y) };
        let mut v = term(&z);
        if folded {
            v = v + term(&z.conj());
        }
        [v * z.r()]
    };
    let opts = CubatureOptions::new(rel_tol);
    let res = cubature_cells(f, &rects, &opts);
    if !res.converged {
        return Err(Error::Quadrature {
            error: to_f64(res.error[0]),
            target: to_f64(opts.rel_tol * res.value[0].abs()),
        });
    }
    Ok(res.value[0])
}

/// Evaluates the kernel integral at each `xi` and fits
/// `lhs <= C Q_m(1-|xi|) (int_{1-|xi|}^1 ds/(s Q_m) + C_T)`.
///
/// `C` is the least-squares slope of `lhs/Q` against the integral and `C_T`
/// the smallest offset making the fit an envelope; without growth `C_T = 1`.
pub fn check_lemma31<T: Real>(
    dom: &ConformalDomain<T>,
    m: &Modulus<T>,
    xis: &[Complex<T>],
    rel_tol: T,
) -> Result<Lemma31Report> {
    let rates = RateFunctions::new(m.clone());
    for xi in xis {
        let a = xi.norm();
        if !(a >= lit(0.5) && a <= T::one() - lit::<T>(1e-4 * (1.0 - 1e-9))) {
            return Err(Error::Domain(format!("|xi| = {} outside [1/2, 1 - 1e-4]", to_f64(a))));
        }
    }
    let mut rows: Vec<Lemma31Row> = xis
        .par_iter()
        .map(|&xi| {
            let s = T::one() - xi.norm();
            let q = rates.big_q(s).map(to_f64).unwrap_or(f64::NAN);
            let phi = rates.rate_integral(s).map(to_f64).unwrap_or(f64::NAN);
            let (lhs, failure) = match lemma31_lhs(dom, xi, rel_tol) {
                Ok(v) => (Some(to_f64(v)), None),
                Err(e) => (None, Some(e.to_string())),
            };
            Lemma31Row {
                xi: [to_f64(xi.re), to_f64(xi.im)],
                one_minus_abs: to_f64(s),
                lhs,
                q,
                phi,
                ratio_unit: lhs.map(|l| l / (q * (phi + 1.0))),
                ratio_fit: None,
                failure,
            }
        })
        .collect();
    let ok: Vec<&Lemma31Row> = rows.iter().filter(|r| r.lhs.is_some()).collect();
    if ok.len() < 3 {
        return Err(Error::Inconclusive(format!("only {} kernel integrals converged", ok.len())));
    }
    let xs: Vec<f64> = ok.iter().map(|r| r.phi).collect();
    let ys: Vec<f64> = ok.iter().map(|r| r.lhs.unwrap() / r.q).collect();
    let (slope, _) = ols_line(&xs, &ys);
    let (c_fit, c_t_fit) = if slope > 0.0 {
        let ct = xs.iter().zip(&ys).map(|(x, y)| y / slope - x).fold(0.0, f64::max);
        (slope, ct)
    } else {
        let c = xs.iter().zip(&ys).map(|(x, y)| y / (x + 1.0)).fold(0.0, f64::max);
        (c, 1.0)
    };
    for r in rows.iter_mut() {
        r.ratio_fit = r.lhs.map(|l| l / (r.q * (r.phi + c_t_fit)));
    }
    let mut ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio_fit).collect();
    ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = ratios.len();
    let median = if k % 2 == 1 { ratios[k / 2] } else { 0.5 * (ratios[k / 2 - 1] + ratios[k / 2]) };
    let max_ratio = ratios[k - 1];
    let all_ok = rows.iter().all(|r| r.failure.is_none());
    Ok(Lemma31Report {
        rows,
        c_fit,
        c_t_fit,
        max_ratio,
        median_ratio: median,
        pass: all_ok && max_ratio <= 2.0 * median && c_fit < CONSTANT_CEILING,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DprimeRow {
    pub zeta: [f64; 2],
    /// `d'` from the split radial kernel.
    pub split: f64,
    /// `d'` from projecting the plain kernel.
    pub plain: f64,
    pub rel_diff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DprimeReport {
    pub rows: Vec<DprimeRow>,
    pub max_rel_diff: f64,
    pub pass: bool,
}

/// Compares two independent evaluations of `d'(t)` at each point.
pub fn check_dprime_integrand<T: Real>(
    dom: &ConformalDomain<T>,
    w: &VorticityField<T>,
    zetas: &[Complex<T>],
    opts: &VelocityOptions<T>,
) -> Result<DprimeReport> {
    let rows: Vec<Result<DprimeRow>> = zetas
        .par_iter()
        .map(|&z| {
            let a = to_f64(boundary_distance_rate(dom, w, z, opts)?);
            let b = to_f64(boundary_distance_rate_plain(dom, w, z, opts)?);
            let scale = a.abs().max(b.abs());
            let rel_diff = if scale <= 1e-12 * to_f64(w.sup_norm()).max(1e-300) || scale == 0.0 {
                0.0
            } else {
                (a - b).abs() / scale
            };
            Ok(DprimeRow { zeta: [to_f64(z.re), to_f64(z.im)], split: a, plain: b, rel_diff })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let max_rel_diff = rows.iter().map(|r| r.rel_diff).fold(0.0, f64::max);
    Ok(DprimeReport { rows, max_rel_diff, pass: max_rel_diff < 1e-3 })
}
