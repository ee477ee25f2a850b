//! Points of the unit disc stored as (distance to the boundary, angle).
//!
//! Keeping `d = 1 - |z|` explicit avoids the cancellation in `1 - |z|` and in
//! the kernels near the boundary, where all the interesting dynamics happens.

use num_complex::Complex;

use crate::scalar::{lit, Real};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscPoint<T> {
    /// `1 - |z|`, in `(0, 1]`.
    pub d: T,
    /// `arg z` in `(-pi, pi]`.
    pub phi: T,
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle<T: Real>(x: T) -> T {
    let two_pi = T::TAU();
    let mut y = x - two_pi * ((x + T::PI()) / two_pi).floor();
    if y <= -T::PI() {
        y = y + two_pi;
    }
    if y > T::PI() {
        y = y - two_pi;
    }
    y
}

/// `b - a` reduced to `[-pi, pi]` for `a, b` in `[-pi, pi]`, exact when the
/// result is small.
pub fn angle_gap<T: Real>(a: T, b: T) -> T {
    let d = b - a;
    if d > T::PI() {
        (b - T::PI()) - (a + T::PI())
    } else if d < -T::PI() {
        (b + T::PI()) + (T::PI() - a)
    } else {
        d
    }
}

impl<T: Real> DiscPoint<T> {
    pub fn new(d: T, phi: T) -> Self {
        DiscPoint { d, phi: wrap_angle(phi) }
    }

    pub fn from_complex(z: Complex<T>) -> Self {
        let r = z.norm();
        let phi = if r == T::zero() { T::zero() } else { z.im.atan2(z.re) };
        DiscPoint { d: T::one() - r, phi }
    }

    pub fn r(&self) -> T {
        T::one() - self.d
    }

    pub fn to_complex(&self) -> Complex<T> {
        Complex::from_polar(self.r(), self.phi)
    }

    pub fn conj(&self) -> Self {
        DiscPoint::new(self.d, -self.phi)
    }

    /// `1 - z e^{-i theta}`, accurate when `z` is close to `e^{i theta}`.
    pub fn one_minus_rotated(&self, theta: T) -> Complex<T> {
        let psi = self.phi - theta;
        let h = (psi * lit(0.5)).sin();
        let two = lit::<T>(2.0);
        Complex::new(two * h * h + self.d * psi.cos(), -(self.r()) * psi.sin())
    }

    /// `|1 - z e^{-i theta}|^2 = |e^{i theta} - z|^2`.
    pub fn boundary_dist2(&self, theta: T) -> T {
        let h = ((self.phi - theta) * lit(0.5)).sin();
        self.d * self.d + lit::<T>(4.0) * self.r() * h * h
    }

    /// Principal `ln(1 - z e^{-i theta})`.
    pub fn ln_one_minus_rotated(&self, theta: T) -> Complex<T> {
        let w = self.one_minus_rotated(theta);
        Complex::new(lit::<T>(0.5) * self.boundary_dist2(theta).ln(), w.im.atan2(w.re))
    }

    /// `|z - w|^2`.
    pub fn dist2(&self, o: &Self) -> T {
        let h = (angle_gap(o.phi, self.phi) * lit(0.5)).sin();
        let dd = self.d - o.d;
        dd * dd + lit::<T>(4.0) * self.r() * o.r() * h * h
    }

    /// `| |z|^2 self - z |^2` for `z = o`.
    pub fn reflected_dist2(&self, o: &Self) -> T {
        let (r1, r2) = (self.r(), o.r());
        let a = r1 * r2;
        let one_minus_a = self.d + o.d - self.d * o.d;
        let h = (angle_gap(o.phi, self.phi) * lit(0.5)).sin();
        r2 * r2 * (one_minus_a * one_minus_a + lit::<T>(4.0) * a * h * h)
    }
}
