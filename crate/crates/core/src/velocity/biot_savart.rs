use num_complex::Complex;

use crate::conformal::domain::checked;
use crate::conformal::ConformalDomain;
use crate::disc::{angle_gap, wrap_angle, DiscPoint};
use crate::error::{Error, Result};
use crate::quadrature::{cubature_cells, CubatureOptions};
use crate::scalar::{lit, to_f64, Real};
use crate::velocity::{Parity, VorticityField};

/// Accuracy controls for Biot-Savart evaluations.
#[derive(Clone, Copy, Debug)]
pub struct VelocityOptions<T> {
    pub rel_tol: T,
    pub max_evals: usize,
    /// Integrate over the upper half disc when the domain and the field allow it.
    pub use_symmetry: bool,
}

impl<T: Real> Default for VelocityOptions<T> {
    fn default() -> Self {
        VelocityOptions { rel_tol: lit(1e-6), max_evals: 3_000_000, use_symmetry: true }
    }
}

/// Velocity at a disc point split along `z/|z|` and `i z/|z|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VelocitySample<T> {
    pub radial: T,
    pub tangential: T,
    pub error: [T; 2],
    pub evals: usize,
}

impl<T: Real> VelocitySample<T> {
    pub fn to_complex(&self, phi: T) -> Complex<T> {
        Complex::new(self.radial, self.tangential) * Complex::from_polar(T::one(), phi)
    }
}

/// `K(zeta, z) = (zeta - z)/|zeta - z|^2 - (zeta - z*)/|zeta - z*|^2`, `z* = z/|z|^2`,
/// so that `grad_zeta G(zeta, z) = K / 2 pi`.
pub fn kernel<T: Real>(zeta: Complex<T>, z: Complex<T>) -> Complex<T> {
    let zs = z / z.norm_sqr();
    (zeta - z) / (zeta - z).norm_sqr() - (zeta - zs) / (zeta - zs).norm_sqr()
}

/// Components of `i K(zeta, z)` along `zeta/|zeta|` and `i zeta/|zeta|`,
/// in cancellation-free form.
pub fn kernel_components<T: Real>(zeta: &DiscPoint<T>, z: &DiscPoint<T>) -> [T; 2] {
    let two = lit::<T>(2.0);
    let (d1, d2) = (zeta.d, z.d);
    let r2 = z.r();
    let delta = angle_gap(zeta.phi, z.phi);
    let h = (delta * lit(0.5)).sin();
    let s2 = two * h * h;
    let dist = zeta.dist2(z);
    let refl = zeta.reflected_dist2(z);
    let r23 = r2 * r2 * r2;
    let radial = r23 * delta.sin() * (d2 * (two - d2)) * (d1 * (two - d1)) / (dist * refl);
    let one_minus_a = d1 + d2 - d1 * d2;
    let tangential = (d2 - d1 + r2 * s2) / dist - r23 * (s2 - one_minus_a) / refl;
    [radial, tangential]
}

fn clip_push<T: Real>(out: &mut Vec<[T; 4]>, r: [T; 4], region: &[T; 4]) {
    let c = [r[0].max(region[0]), r[1].min(region[1]), r[2].max(region[2]), r[3].min(region[3])];
    if c[1] > c[0] && c[3] > c[2] {
        out.push(c);
    }
}

/// Rectangles in `(1 - |z|, arg z)` tiling `region` with square annuli of
/// geometrically growing size around `center`, split at the given lines.
pub(crate) fn graded_tiles<T: Real>(
    center: (T, T),
    region: [T; 4],
    x_breaks: &[T],
    y_breaks: &[T],
) -> Vec<[T; 4]> {
    let (cx, cy) = center;
    let growth = lit::<T>(4.0);
    let span = (region[1] - region[0]).max(region[3] - region[2]);
    let mut h = (cx * lit(0.5)).min(span);
    let mut tiles = Vec::new();
    for q in [[cx - h, cx, cy - h, cy], [cx, cx + h, cy - h, cy], [cx - h, cx, cy, cy + h], [cx, cx + h, cy, cy + h]] {
        clip_push(&mut tiles, q, &region);
    }
    loop {
        let covered = cx - h <= region[0] && cx + h >= region[1] && cy - h <= region[2] && cy + h >= region[3];
        if covered {
            break;
        }
        let inf = lit::<T>(1e300).min(T::max_value());
        let next = h * growth;
        let big = if next >= span * lit(2.0) { inf } else { next };
        let xs = [cx - big, cx - h, cx + h, cx + big];
        let ys = [cy - big, cy - h, cy + h, cy + big];
        for i in 0..3 {
            for j in 0..3 {
                if i == 1 && j == 1 {
                    continue;
                }
                clip_push(&mut tiles, [xs[i], xs[i + 1], ys[j], ys[j + 1]], &region);
            }
        }
        if big == inf {
            break;
        }
        h = next;
    }
    let mut out = Vec::with_capacity(tiles.len());
    for t in tiles {
        let mut xs = vec![t[0], t[1]];
        xs.extend(x_breaks.iter().copied().filter(|&x| x > t[0] && x < t[1]));
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut ys = vec![t[2], t[3]];
        ys.extend(y_breaks.iter().copied().filter(|&y| y > t[2] && y < t[3]));
        ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for wx in xs.windows(2) {
            for wy in ys.windows(2) {
                out.push([wx[0], wx[1], wy[0], wy[1]]);
            }
        }
    }
    out
}

/// Cells for a disc integral singular at `zeta`; with `folded` only the upper
/// half disc is covered and the caller adds the mirror image.
pub(crate) fn disc_layout<T: Real>(
    dom: &ConformalDomain<T>,
    zeta: &DiscPoint<T>,
    folded: bool,
    d_breaks: &[T],
    phi_breaks: &[T],
) -> Vec<[T; 4]> {
    let pi = T::PI();
    let (cy, region) = if folded {
        (zeta.phi.abs(), [T::zero(), T::one(), T::zero(), pi])
    } else {
        (zeta.phi, [T::zero(), T::one(), zeta.phi - pi, zeta.phi + pi])
    };
    let mut angles: Vec<T> = dom.boundary_breakpoints();
    angles.extend_from_slice(phi_breaks);
    angles.push(T::zero());
    angles.push(pi);
    let mut ys = Vec::new();
    for a in angles {
        for k in [-2.0, -1.0, 0.0, 1.0, 2.0] {
            let y = a + T::TAU() * lit(k);
            let y = if folded { y.abs() } else { y };
            if y > region[2] && y < region[3] {
                ys.push(y);
            }
        }
    }
    let xs: Vec<T> = d_breaks.iter().copied().filter(|&x| x > T::zero() && x < T::one()).collect();
    graded_tiles((zeta.d, cy), region, &xs, &ys)
}

fn use_fold<T: Real>(dom: &ConformalDomain<T>, w: &VorticityField<T>, opts: &VelocityOptions<T>) -> Option<T> {
    if !opts.use_symmetry || !dom.is_symmetric() {
        return None;
    }
    match w.parity() {
        Parity::Even => Some(T::one()),
        Parity::Odd => Some(-T::one()),
        Parity::None => None,
    }
}

/// Radial and tangential components of `dzeta/dt` at a disc point.
pub fn velocity_components<T: Real>(
    dom: &ConformalDomain<T>,
    w: &VorticityField<T>,
    zeta: &DiscPoint<T>,
    opts: &VelocityOptions<T>,
) -> Result<VelocitySample<T>> {
    if !(zeta.d > T::zero() && zeta.d <= T::one()) {
        return Err(Error::Domain(format!("1 - |zeta| = {} outside (0, 1]", to_f64(zeta.d))));
    }
    if w.is_zero() {
        return Ok(VelocitySample { radial: T::zero(), tangential: T::zero(), error: [T::zero(); 2], evals: 0 });
    }
    let sign = use_fold(dom, w, opts);
    let layout = disc_layout(dom, zeta, sign.is_some(), &w.distance_breaks(), &w.angle_breaks());
    let log_j0 = dom.log_det_ds_at(zeta);
    let f = |x: T, y: T| -> [T; 2] {
        let z = DiscPoint { d: x, phi: wrap_angle(y) };
        let weight = w.value_at(&z);
        if weight == T::zero() {
            return [T::zero(); 2];
        }
        let weight = weight * (dom.log_det_ds_at(&z) - log_j0).exp() * z.r();
        let mut k = kernel_components(zeta, &z);
        if let Some(s) = sign {
            let m = kernel_components(zeta, &z.conj());
            k = [k[0] + s * m[0], k[1] + s * m[1]];
        }
        [k[0] * weight, k[1] * weight]
    };
    let mut co = CubatureOptions::new(opts.rel_tol);
    co.max_evals = opts.max_evals;
    let res = cubature_cells(f, &layout, &co);
    let scale = T::one() / T::TAU();
    if !res.converged {
        let target = (0..2)
            .map(|c| to_f64((co.rel_tol * res.value[c].abs()).max(co.abs_rel_tol * res.abs_value[c])))
            .fold(0.0, f64::max);
        let error = to_f64(res.error[0].max(res.error[1]));
        return Err(Error::Quadrature { error: error * to_f64(scale), target: target * to_f64(scale) });
    }
    Ok(VelocitySample {
        radial: res.value[0] * scale,
        tangential: res.value[1] * scale,
        error: [res.error[0] * scale, res.error[1] * scale],
        evals: res.evals,
    })
}

/// `dzeta/dt` for the particle at `zeta`.
pub fn disc_velocity<T: Real>(
    dom: &ConformalDomain<T>,
    w: &VorticityField<T>,
    zeta: Complex<T>,
    opts: &VelocityOptions<T>,
) -> Result<Complex<T>> {
    let p = checked(zeta)?;
    Ok(velocity_components(dom, w, &p, opts)?.to_complex(p.phi))
}

/// `d'(t)` for `d = 1 - |zeta|`.
pub fn boundary_distance_rate<T: Real>(
    dom: &ConformalDomain<T>,
    w: &VorticityField<T>,
    zeta: Complex<T>,
    opts: &VelocityOptions<T>,
) -> Result<T> {
    let p = checked(zeta)?;
    if zeta.norm() == T::zero() {
        return Err(Error::Domain("distance rate has no direction at zeta = 0".into()));
    }
    Ok(-velocity_components(dom, w, &p, opts)?.radial)
}

/// `d'(t)` from the projection of the plain kernel `i K(zeta, z)` onto `-zeta/|zeta|`,
/// integrated over the whole disc without symmetry reduction.
pub fn boundary_distance_rate_plain<T: Real>(
    dom: &ConformalDomain<T>,
    w: &VorticityField<T>,
    zeta: Complex<T>,
    opts: &VelocityOptions<T>,
) -> Result<T> {
    let p = checked(zeta)?;
    if zeta.norm() == T::zero() {
        return Err(Error::Domain("distance rate has no direction at zeta = 0".into()));
    }
    if w.is_zero() {
        return Ok(T::zero());
    }
    let layout = disc_layout(dom, &p, false, &w.distance_breaks(), &w.angle_breaks());
    let log_j0 = dom.log_det_ds_at(&p);
    let dir = zeta / zeta.norm();
    let f = |x: T, y: T| -> [T; 1] {
        let z = DiscPoint { d: x, phi: wrap_angle(y) };
        let weight = w.value_at(&z);
        if weight == T::zero() {
            return [T::zero()];
        }
        let k = kernel(zeta, z.to_complex()) * Complex::new(T::zero(), T::one());
        let proj = -(k * dir.conj()).re;
        [proj * weight * (dom.log_det_ds_at(&z) - log_j0).exp() * z.r()]
    };
    let mut co = CubatureOptions::new(opts.rel_tol);
    co.max_evals = opts.max_evals;
    let res = cubature_cells(f, &layout, &co);
    Ok(res.value[0] / T::TAU())
}
