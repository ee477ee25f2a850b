use crate::error::{Error, Result};
use crate::moduli::Modulus;
use crate::quadrature::{integrate_breaks, QuadOptions};
use crate::scalar::{lit, to_f64, Real};

/// Rate functions `q_m`, `Q_m`, `Phi(y) = int_y^1 ds/q_m` and `rho_m` of a modulus.
///
/// `Phi` is evaluated by adaptive quadrature in `u = ln(1/s)` up to a split
/// point and by the closed-form antiderivative of `1/Q_m` beyond it.
#[derive(Clone, Debug)]
pub struct RateFunctions<T: Real> {
    modulus: Modulus<T>,
    u_split: T,
    phi_split: T,
    phi_inf: Option<T>,
    opts: QuadOptions<T>,
}

impl<T: Real> RateFunctions<T> {
    pub fn new(modulus: Modulus<T>) -> Self {
        let opts = QuadOptions::new(lit(1e-12), T::zero());
        let u_split = modulus.tail_start().max(lit(64.0));
        let mut rf = RateFunctions { modulus, u_split, phi_split: T::zero(), phi_inf: None, opts };
        rf.phi_split = rf.quad_phi(u_split);
        rf.phi_inf = rf.modulus.tail_limit().map(|lim| {
            rf.phi_split + lim - rf.modulus.tail_antiderivative(u_split).unwrap()
        });
        rf
    }

    pub fn modulus(&self) -> &Modulus<T> {
        &self.modulus
    }

    fn quad_phi(&self, u: T) -> T {
        let mut pts = vec![T::zero()];
        pts.extend(self.modulus.log_breakpoints().into_iter().filter(|&b| b < u));
        let mut x = lit::<T>(8.0);
        while x < u {
            pts.push(x);
            x = x * lit(2.0);
        }
        pts.push(u);
        let m = &self.modulus;
        integrate_breaks(|v: T| (-m.log_weight(v)).exp(), &pts, &self.opts).value
    }

    /// `ln Q_m(s)` for `s` in `(0, 1]`.
    pub fn log_big_q(&self, s: T) -> Result<T> {
        check_unit(s)?;
        Ok(self.modulus.log_weight(-s.ln()))
    }

    /// `Q_m(s) = q_m(s)/s`.
    pub fn big_q(&self, s: T) -> Result<T> {
        Ok(self.log_big_q(s)?.exp())
    }

    /// `q_m(s) = s exp((2/pi) int_s^1 m(r)/r dr)`.
    pub fn q(&self, s: T) -> Result<T> {
        check_unit(s)?;
        Ok((self.modulus.log_weight(-s.ln()) - (-s.ln())).exp())
    }

    /// `int_{e^-u}^1 ds/q_m(s) = int_0^u dv/Q_m(e^-v)`.
    pub fn phi_log(&self, u: T) -> T {
        if u <= T::zero() {
            return T::zero();
        }
        if u <= self.u_split {
            return self.quad_phi(u);
        }
        if u.is_infinite() {
            return self.phi_inf.unwrap_or(T::infinity());
        }
        let m = &self.modulus;
        self.phi_split + m.tail_antiderivative(u).unwrap() - m.tail_antiderivative(self.u_split).unwrap()
    }

    /// `Phi(y) = int_y^1 ds/q_m(s)` for `y` in `(0, 1]`.
    pub fn rate_integral(&self, y: T) -> Result<T> {
        check_unit(y)?;
        Ok(self.phi_log(-y.ln()))
    }

    /// `Phi(0)`, finite exactly for the convergent class.
    pub fn phi_zero(&self) -> Option<T> {
        self.phi_inf
    }

    /// `u = ln(1/y)` with `ln Phi(y) = t`.
    pub fn rho_log(&self, t: T) -> Result<T> {
        let target = t;
        if let Some(pinf) = self.phi_inf {
            if t >= pinf.ln() {
                return Err(Error::Unrepresentable(format!(
                    "t = {} exceeds ln Phi(0) = {} for a convergent modulus",
                    to_f64(t),
                    to_f64(pinf.ln())
                )));
            }
        }
        let g = |u: T| self.phi_log(u).ln() - target;
        let mut lo = T::zero();
        let mut hi = T::one();
        while g(hi) < T::zero() {
            lo = hi;
            hi = hi * lit(4.0);
            if !hi.is_finite() || hi > T::max_value() / lit(8.0) {
                return Err(Error::Unrepresentable(format!("rho_m({}) beyond representable range", to_f64(t))));
            }
        }
        let mut u = (lo + hi) * lit(0.5);
        for _ in 0..300 {
            let phi = self.phi_log(u);
            let gv = phi.ln() - target;
            if gv.abs() <= lit(1e-12) {
                return Ok(u);
            }
            if gv < T::zero() {
                lo = u;
            } else {
                hi = u;
            }
            let deriv = (-self.modulus.log_weight(u)).exp() / phi;
            let mut next = u - gv / deriv;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = (lo + hi) * lit(0.5);
            }
            if hi - lo <= T::epsilon() * hi * lit(4.0) {
                return Ok(next);
            }
            u = next;
        }
        Ok(u)
    }

    /// `rho_m(t)`: the `y` in `(0, 1)` with `ln int_y^1 ds/q_m = t`.
    pub fn rho(&self, t: T) -> Result<T> {
        let u = self.rho_log(t)?;
        let y = (-u).exp();
        if y <= T::zero() || !y.is_normal() {
            return Err(Error::Unrepresentable(format!(
                "rho_m({}) = exp(-{}) underflows",
                to_f64(t),
                to_f64(u)
            )));
        }
        Ok(y)
    }
}

fn check_unit<T: Real>(s: T) -> Result<()> {
    if !(s > T::zero() && s <= T::one()) {
        return Err(Error::Domain(format!("argument {} outside (0, 1]", to_f64(s))));
    }
    Ok(())
}
