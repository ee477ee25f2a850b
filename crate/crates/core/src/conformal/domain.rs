use std::sync::OnceLock;

use num_complex::Complex;

use crate::conformal::{AngleSet, BetaTilde, TangentDecomposition};
use crate::disc::{wrap_angle, DiscPoint};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_breaks, QuadOptions};
use crate::scalar::{lit, to_f64, two_over_pi, Real};

/// Result of evaluating the Riemann map `S` at a disc point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MapValue<T> {
    pub value: Complex<T>,
    /// The end point was moved inward because it sat on an atom direction.
    pub perturbed: bool,
}

/// Riemann map `S: D -> Omega` given through its tangent-argument decomposition,
/// normalized by `S(1) = 0` and `S'(0) = sprime0`.
#[derive(Debug)]
pub struct ConformalDomain<T: Real> {
    decomposition: TangentDecomposition<T>,
    sprime0: Complex<T>,
    log_sprime0: Complex<T>,
    symmetric: bool,
    quad: QuadOptions<T>,
    map_quad: QuadOptions<T>,
    inverse_seeds: OnceLock<Vec<(Complex<T>, Complex<T>)>>,
    s_at_zero: OnceLock<Complex<T>>,
}

impl<T: Real> Clone for ConformalDomain<T> {
    fn clone(&self) -> Self {
        ConformalDomain {
            decomposition: self.decomposition.clone(),
            sprime0: self.sprime0,
            log_sprime0: self.log_sprime0,
            symmetric: self.symmetric,
            quad: self.quad,
            map_quad: self.map_quad,
            inverse_seeds: OnceLock::new(),
            s_at_zero: OnceLock::new(),
        }
    }
}

fn c<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

impl<T: Real> ConformalDomain<T> {
    pub fn new(decomposition: TangentDecomposition<T>, sprime0: Complex<T>) -> Result<Self> {
        if !(sprime0.norm() > T::zero() && sprime0.norm().is_finite()) {
            return Err(Error::Construction("S'(0) must be finite and non-zero".into()));
        }
        let atoms = decomposition.beta.atoms();
        let tol = lit::<T>(1e-12);
        let mirrored = atoms.iter().all(|a| {
            let target = wrap_angle(-a.theta);
            atoms.iter().any(|b| {
                (wrap_angle(b.theta - target)).abs() <= tol && (b.mass - a.mass).abs() <= tol * (T::one() + a.mass)
            })
        });
        let symmetric = mirrored && sprime0.im == T::zero() && sprime0.re > T::zero();
        Ok(ConformalDomain {
            decomposition,
            sprime0,
            log_sprime0: sprime0.ln(),
            symmetric,
            quad: QuadOptions::new(lit(1e-12), lit(1e-15)),
            map_quad: QuadOptions::new(lit(1e-11), T::zero()),
            inverse_seeds: OnceLock::new(),
            s_at_zero: OnceLock::new(),
        })
    }

    pub fn decomposition(&self) -> &TangentDecomposition<T> {
        &self.decomposition
    }

    pub fn sprime0(&self) -> Complex<T> {
        self.sprime0
    }

    /// Whether `S(conj z) = conj S(z)`.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Angles where `S'` is singular or where the integrand of the
    /// tangent-argument formula has a kink.
    pub fn boundary_breakpoints(&self) -> Vec<T> {
        let mut v: Vec<T> = self.decomposition.beta.atoms().iter().map(|a| a.theta).collect();
        if let Some((_, r0)) = self.decomposition.beta_tilde.profile() {
            v.extend([-r0, T::zero(), r0]);
        }
        v
    }

    // K(z) = int_{-r0}^{r0} ln(1 - z e^{-i theta}) m'(2|theta|) d theta, by parts.
    fn profile_term(&self, p: &DiscPoint<T>) -> Complex<T> {
        let Some((m, r0)) = self.decomposition.beta_tilde.profile() else {
            return Complex::new(T::zero(), T::zero());
        };
        if m.is_zero() {
            return Complex::new(T::zero(), T::zero());
        }
        let two = lit::<T>(2.0);
        let half = lit::<T>(0.5);
        let big_m = m.eval_unchecked(two * r0);
        let boundary = (p.ln_one_minus_rotated(r0) + p.ln_one_minus_rotated(-r0)) * (big_m * half);
        let rho = p.r();
        let ln_2r0 = (two * r0).ln();
        // g'(phi +- theta) with g(psi) = ln(1 - rho e^{i psi}).
        let integrand = |v: T| -> Complex<T> {
            let theta = r0 * (-v).exp();
            let mv = if ln_2r0 <= T::zero() {
                m.eval_log(v - ln_2r0)
            } else {
                m.eval_unchecked(two * theta)
            };
            let ep = Complex::from_polar(rho, p.phi + theta);
            let em = Complex::from_polar(rho, p.phi - theta);
            let gp = c(T::zero(), -T::one()) * ep / p.one_minus_rotated(-theta);
            let gm = c(T::zero(), -T::one()) * em / p.one_minus_rotated(theta);
            (gp - gm) * (mv * theta)
        };
        let scale = p.d.max(p.phi.abs()).min(r0);
        let theta_min = lit::<T>(1e-10) * scale;
        let vmax = (r0 / theta_min).ln();
        let mut pts = vec![T::zero(), vmax];
        for x in [p.phi.abs(), p.d] {
            if x < r0 && x > theta_min {
                let v = (r0 / x).ln();
                pts.push(v);
                pts.push(v + T::LN_2());
                if v > T::LN_2() {
                    pts.push(v - T::LN_2());
                }
            }
        }
        pts.retain(|&v| v >= T::zero() && v <= vmax);
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        let res = integrate_breaks(integrand, &pts, &self.quad);
        boundary - res.value * half
    }

    /// `ln S'(z)`, continuous on the disc.
    pub fn log_sprime_at(&self, p: &DiscPoint<T>) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for a in self.decomposition.beta.atoms() {
            acc = acc + p.ln_one_minus_rotated(a.theta) * a.mass;
        }
        self.log_sprime0 + (self.profile_term(p) - acc) / T::PI()
    }

    pub fn sprime_at(&self, p: &DiscPoint<T>) -> Complex<T> {
        self.log_sprime_at(p).exp()
    }

    pub fn sprime(&self, z: Complex<T>) -> Result<Complex<T>> {
        Ok(self.sprime_at(&checked(z)?))
    }

    /// `ln det DS = 2 ln |S'|`.
    pub fn log_det_ds_at(&self, p: &DiscPoint<T>) -> T {
        lit::<T>(2.0) * self.log_sprime_at(p).re
    }

    pub fn det_ds(&self, z: Complex<T>) -> Result<T> {
        Ok(self.log_det_ds_at(&checked(z)?).exp())
    }

    /// `det DS(0) exp(-I(z) - J(z))`, an independent evaluation of `det DS`.
    pub fn det_ds_split(&self, z: Complex<T>) -> Result<T> {
        let p = checked(z)?;
        let full = AngleSet::full();
        let i = self.i_integral_at(&p, &full);
        let j = self.j_integral_at(&p, &full, p.phi);
        Ok((lit::<T>(2.0) * self.sprime0.norm().ln() - i - j).exp())
    }

    /// `I(z, A) = (2/pi) int_A ln|e^{i theta} - z| d beta(theta)`.
    pub fn i_integral(&self, z: Complex<T>, set: &AngleSet<T>) -> Result<T> {
        Ok(self.i_integral_at(&checked(z)?, set))
    }

    pub fn i_integral_at(&self, p: &DiscPoint<T>, set: &AngleSet<T>) -> T {
        if set.measure() <= T::zero() {
            return T::zero();
        }
        let half = lit::<T>(0.5);
        let beta = &self.decomposition.beta;
        let mut acc = T::zero();
        for a in beta.atoms() {
            if set.contains(a.theta) {
                acc = acc + a.mass * half * p.boundary_dist2(a.theta).ln();
            }
        }
        let dens = beta.uniform_density();
        if dens > T::zero() && !set.is_full() {
            for &(lo, hi) in set.intervals() {
                let pts = breaks_in(lo, hi, &[p.phi]);
                let r = integrate_breaks(|t: T| half * p.boundary_dist2(t).ln(), &pts, &self.quad);
                acc = acc + dens * r.value;
            }
        }
        two_over_pi::<T>() * acc
    }

    /// `J(z, A, theta*) = (2/pi) int_A Im(z/(e^{i theta} - z)) (b(theta) - b(theta*)) d theta`
    /// with `b = beta~ - kappa theta`.
    pub fn j_integral(&self, z: Complex<T>, set: &AngleSet<T>, theta_star: T) -> Result<T> {
        Ok(self.j_integral_at(&checked(z)?, set, theta_star))
    }

    pub fn j_integral_at(&self, p: &DiscPoint<T>, set: &AngleSet<T>, theta_star: T) -> T {
        let bt = &self.decomposition.beta_tilde;
        if matches!(bt, BetaTilde::Zero) || set.measure() <= T::zero() {
            return T::zero();
        }
        if let Some((m, _)) = bt.profile() {
            if m.is_zero() {
                return T::zero();
            }
        }
        let b_star = bt.normalized(theta_star);
        let rho = p.r();
        let f = |t: T| {
            let psi = p.phi - t;
            let im = rho * psi.sin() / p.boundary_dist2(t);
            im * (bt.normalized(t) - b_star)
        };
        let opts = QuadOptions::new(lit(1e-11), lit(1e-14));
        let mut extra = vec![p.phi, theta_star];
        extra.extend(self.boundary_breakpoints());
        for k in [1.0, 8.0, 64.0] {
            extra.push(p.phi + p.d * lit(k));
            extra.push(p.phi - p.d * lit(k));
        }
        let mut acc = T::zero();
        for &(lo, hi) in set.intervals() {
            let pts = breaks_in(lo, hi, &extra);
            acc = acc + integrate_breaks(f, &pts, &opts).value;
        }
        two_over_pi::<T>() * acc
    }

    /// `S(z) = int_1^z S'(xi) d xi` along the chord from 1.
    pub fn map_s(&self, z: Complex<T>) -> Result<MapValue<T>> {
        let mut p = checked(z)?;
        let mut perturbed = false;
        for a in self.decomposition.beta.atoms() {
            if p.boundary_dist2(a.theta).sqrt() < lit(1e-12) {
                p.d = p.d + lit(1e-9);
                perturbed = true;
            }
        }
        Ok(MapValue { value: self.map_s_at(&p), perturbed })
    }

    /// `S(z)`, evaluated as `S(0)` plus the integral along the radius to `z`.
    pub fn map_s_at(&self, p: &DiscPoint<T>) -> Complex<T> {
        self.s_zero() + self.radial_integral(p)
    }

    /// `S(0) = int_1^0 S'`, computed once along the real axis.
    pub fn s_zero(&self) -> Complex<T> {
        *self.s_at_zero.get_or_init(|| -self.radial_integral(&DiscPoint { d: T::zero(), phi: T::zero() }))
    }

    // int_0^z S'(xi) d xi along the radius; d = 0 is allowed (the boundary point).
    fn radial_integral(&self, p: &DiscPoint<T>) -> Complex<T> {
        let r = p.r();
        if r <= T::zero() {
            return Complex::new(T::zero(), T::zero());
        }
        let dir = Complex::from_polar(T::one(), p.phi);
        let f = |tau: T| {
            let q = DiscPoint { d: (T::one() - tau) + tau * p.d, phi: p.phi };
            self.sprime_at(&q) * dir * r
        };
        let mut pts = vec![T::zero(), lit(0.5), T::one()];
        for k in 1..=6 {
            let x = T::one() - lit::<T>(10f64.powi(-k));
            if x > lit(0.5) {
                pts.push(x);
            }
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        integrate_breaks(f, &pts, &self.map_quad).value
    }

    /// `S(z1) - S(z0)` along the straight segment; both points inside the disc.
    pub fn map_s_segment(&self, z0: Complex<T>, z1: Complex<T>) -> Complex<T> {
        let dz = z1 - z0;
        let f = |tau: T| self.sprime_at(&DiscPoint::from_complex(z0 + dz * tau)) * dz;
        integrate(f, T::zero(), T::one(), &self.map_quad).value
    }

    /// `S((1 - d) e^{i phi1}) - S((1 - d) e^{i phi0})` along the circle `|z| = 1 - d`.
    pub fn map_s_arc(&self, d: T, phi0: T, phi1: T) -> Complex<T> {
        let r = T::one() - d;
        let f = |phi: T| {
            let p = DiscPoint { d, phi: wrap_angle(phi) };
            self.sprime_at(&p) * Complex::from_polar(r, phi) * c(T::zero(), T::one())
        };
        let mut extra = Vec::new();
        for b in self.boundary_breakpoints() {
            for k in -1..=1 {
                extra.push(b + T::TAU() * lit(k as f64));
            }
        }
        let (lo, hi) = if phi1 >= phi0 { (phi0, phi1) } else { (phi1, phi0) };
        let pts = breaks_in(lo, hi, &extra);
        let v = integrate_breaks(f, &pts, &self.map_quad).value;
        if phi1 >= phi0 {
            v
        } else {
            -v
        }
    }

    fn seeds(&self) -> &Vec<(Complex<T>, Complex<T>)> {
        self.inverse_seeds.get_or_init(|| {
            let s0 = self.s_zero();
            let mut out = vec![(Complex::new(T::zero(), T::zero()), s0)];
            let radii = [0.3, 0.55, 0.75, 0.88, 0.95, 0.985];
            for j in 0..48 {
                let phi = lit::<T>(std::f64::consts::TAU * j as f64 / 48.0);
                let mut z = Complex::new(T::zero(), T::zero());
                let mut w = s0;
                for &r in &radii {
                    let zn = Complex::from_polar(lit::<T>(r), phi);
                    w = w + self.map_s_segment(z, zn);
                    z = zn;
                    out.push((z, w));
                }
            }
            out
        })
    }

    /// `T(w) = S^{-1}(w)` by damped Newton iteration from the nearest seed.
    pub fn inverse_map(&self, w: Complex<T>) -> Result<Complex<T>> {
        let seeds = self.seeds();
        let mut order: Vec<usize> = (0..seeds.len()).collect();
        order.sort_by(|&a, &b| (seeds[a].1 - w).norm().partial_cmp(&(seeds[b].1 - w).norm()).unwrap());
        let scale = seeds.iter().fold(T::zero(), |m, s| m.max(s.1.norm()));
        let tol = lit::<T>(1e-12) * (T::one() + scale);
        for &start in order.iter().take(4) {
            let (mut z, mut sz) = seeds[start];
            let mut res = (sz - w).norm();
            for _ in 0..80 {
                if res <= tol {
                    return Ok(z);
                }
                let step = (sz - w) / self.sprime_at(&DiscPoint::from_complex(z));
                let mut lambda = T::one();
                let mut accepted = false;
                for _ in 0..30 {
                    let zn = z - step * lambda;
                    if zn.norm() < T::one() - lit(1e-14) {
                        let szn = sz + self.map_s_segment(z, zn);
                        let rn = (szn - w).norm();
                        if rn < res {
                            z = zn;
                            sz = szn;
                            res = rn;
                            accepted = true;
                            break;
                        }
                    }
                    lambda = lambda * lit(0.5);
                }
                if !accepted {
                    break;
                }
            }
            if res <= tol * lit(1e3) {
                return Ok(z);
            }
        }
        Err(Error::Domain(format!(
            "no preimage found for w = ({}, {}); point likely outside the domain",
            to_f64(w.re),
            to_f64(w.im)
        )))
    }
}

pub(crate) fn checked<T: Real>(z: Complex<T>) -> Result<DiscPoint<T>> {
    if !(z.norm() < T::one()) {
        return Err(Error::Domain(format!(
            "|z| = {} is not inside the unit disc",
            to_f64(z.norm())
        )));
    }
    Ok(DiscPoint::from_complex(z))
}

/// `[lo, hi]` split at the given interior points.
pub(crate) fn breaks_in<T: Real>(lo: T, hi: T, extra: &[T]) -> Vec<T> {
    let mut pts = vec![lo, hi];
    pts.extend(extra.iter().copied().filter(|&x| x > lo && x < hi));
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    pts
}
