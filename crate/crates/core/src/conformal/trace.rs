use std::fmt::Write;

use num_complex::Complex;

use crate::conformal::ConformalDomain;
use crate::disc::{wrap_angle, DiscPoint};
use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

/// Closed polyline `S((1 - eps) e^{i phi_j})` approximating the domain boundary.
#[derive(Clone, Debug)]
pub struct BoundaryTrace<T> {
    pub phis: Vec<T>,
    pub points: Vec<Complex<T>>,
    pub eps: T,
    /// `S(0)`.
    pub center: Complex<T>,
}

fn circle<T: Real>(dom: &ConformalDomain<T>, n: usize, eps: T) -> (Vec<T>, Vec<Complex<T>>) {
    let phis: Vec<T> = (0..n).map(|j| -T::PI() + T::TAU() * lit(j as f64 / n as f64)).collect();
    let mut pts = Vec::with_capacity(n);
    let mut cur = dom.map_s_at(&DiscPoint { d: eps, phi: wrap_angle(phis[0]) });
    pts.push(cur);
    for j in 1..n {
        cur = cur + dom.map_s_arc(eps, phis[j - 1], phis[j]);
        pts.push(cur);
    }
    (phis, pts)
}

/// Samples `S` on `n` uniform angles of the circle of radius `1 - eps`,
/// optionally with one Richardson step `2 P(eps/2) - P(eps)`.
pub fn trace_boundary<T: Real>(
    dom: &ConformalDomain<T>,
    n: usize,
    eps: T,
    richardson: bool,
) -> Result<BoundaryTrace<T>> {
    if n < 8 {
        return Err(Error::Domain(format!("trace needs n >= 8 points, got {n}")));
    }
    if !(eps > T::zero() && eps <= lit(0.1)) {
        return Err(Error::Domain(format!("eps = {} outside (0, 0.1]", to_f64(eps))));
    }
    let (phis, mut points) = circle(dom, n, eps);
    if richardson {
        let (_, half) = circle(dom, n, eps * lit(0.5));
        for (p, h) in points.iter_mut().zip(half) {
            *p = h * lit::<T>(2.0) - *p;
        }
    }
    let center = dom.map_s_at(&DiscPoint { d: T::one(), phi: T::zero() });
    Ok(BoundaryTrace { phis, points, eps, center })
}

impl<T: Real> BoundaryTrace<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Winding number of the closed polyline about `c`.
    pub fn winding_number(&self, c: Complex<T>) -> i64 {
        let n = self.points.len();
        let mut total = T::zero();
        for j in 0..n {
            let a = self.points[j] - c;
            let b = self.points[(j + 1) % n] - c;
            total = total + (b / a).arg();
        }
        (to_f64(total) / std::f64::consts::TAU).round() as i64
    }

    /// Shoelace area, positive for counter-clockwise orientation.
    pub fn signed_area(&self) -> T {
        let n = self.points.len();
        let mut s = T::zero();
        for j in 0..n {
            let a = self.points[j];
            let b = self.points[(j + 1) % n];
            s = s + a.re * b.im - a.im * b.re;
        }
        s * lit(0.5)
    }

    fn index_of(&self, phi: T) -> usize {
        let n = self.points.len();
        let x = (wrap_angle(phi) + T::PI()) / T::TAU() * lit(n as f64);
        (x.round().to_usize().unwrap_or(0)) % n
    }

    /// Interior angle at the corner that is the image of `e^{i phi}`, from
    /// chords on either side at 15 and 45 degrees of the parameter circle.
    pub fn interior_angle(&self, phi: T) -> T {
        let n = self.points.len();
        let j = self.index_of(phi) + n;
        let o1 = (n / 24).max(1);
        let o2 = (n / 8).max(2);
        let p = |k: usize| self.points[k % n];
        let incoming = p(j - o1) - p(j - o2);
        let outgoing = p(j + o2) - p(j + o1);
        T::PI() - (outgoing / incoming).arg()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("phi,re,im\n");
        for (phi, p) in self.phis.iter().zip(&self.points) {
            let _ = writeln!(s, "{},{},{}", to_f64(*phi), to_f64(p.re), to_f64(p.im));
        }
        s
    }

    pub fn to_svg(&self) -> String {
        let xs: Vec<f64> = self.points.iter().map(|p| to_f64(p.re)).collect();
        let ys: Vec<f64> = self.points.iter().map(|p| -to_f64(p.im)).collect();
        let (x0, x1) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, &x| (a.0.min(x), a.1.max(x)));
        let (y0, y1) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, &y| (a.0.min(y), a.1.max(y)));
        let pad = 0.05 * (x1 - x0).max(y1 - y0).max(1e-12);
        let mut path = String::new();
        for (k, (x, y)) in xs.iter().zip(&ys).enumerate() {
            let _ = write!(path, "{}{:.9},{:.9} ", if k == 0 { "M" } else { "L" }, x, y);
        }
        path.push('Z');
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{:.9} {:.9} {:.9} {:.9}\">\n<path d=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"{:.9}\"/>\n</svg>\n",
            x0 - pad,
            y0 - pad,
            x1 - x0 + 2.0 * pad,
            y1 - y0 + 2.0 * pad,
            path,
            pad * 0.1
        )
    }
}
