use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conformal::ConformalDomain;
use crate::disc::{wrap_angle, DiscPoint};
use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};
use crate::velocity::{velocity_components, VelocityOptions, VorticityField};

/// Layout of a precomputed velocity grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GridSpec<T: Real> {
    /// Largest tabulated `1 - |z|`.
    pub d0: T,
    /// Number of octaves below `d0`.
    pub levels: usize,
    pub per_octave: usize,
    /// Angular nodes on the full circle; `0` tabulates the positive real axis only.
    pub n_phi: usize,
    pub rel_tol: T,
    pub use_symmetry: bool,
}

impl<T: Real> Default for GridSpec<T> {
    fn default() -> Self {
        GridSpec { d0: lit(0.75), levels: 20, per_octave: 3, n_phi: 0, rel_tol: lit(1e-6), use_symmetry: true }
    }
}

impl<T: Real> GridSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.d0 > T::zero() && self.d0 <= T::one()) {
            return Err(Error::Config("grid d0 must lie in (0, 1]".into()));
        }
        if self.per_octave == 0 || self.levels * self.per_octave < 3 {
            return Err(Error::Config("grid needs per_octave >= 1 and at least 4 radial nodes".into()));
        }
        if self.n_phi != 0 && self.n_phi < 4 {
            return Err(Error::Config("n_phi must be 0 or at least 4".into()));
        }
        Ok(())
    }

    fn step(&self) -> T {
        T::LN_2() / lit(self.per_octave as f64)
    }

    pub fn radial_nodes(&self) -> usize {
        self.levels * self.per_octave + 1
    }

    /// `1 - |z|` of radial node `k`.
    pub fn distance(&self, k: usize) -> T {
        (self.d0.ln() - self.step() * lit(k as f64)).exp()
    }

    pub fn d_min(&self) -> T {
        self.distance(self.radial_nodes() - 1)
    }

    pub fn angle(&self, j: usize) -> T {
        if self.n_phi == 0 {
            T::zero()
        } else {
            wrap_angle(T::TAU() * lit(j as f64) / lit(self.n_phi as f64))
        }
    }

    fn angle_count(&self) -> usize {
        self.n_phi.max(1)
    }
}

/// Largest angular offset at which a single-ray grid is still queried.
const RAY_TOLERANCE: f64 = 1e-3;

/// Velocity samples on a polar grid refined toward the boundary, stored as
/// `d'/d` and `phi'` and interpolated bicubically in `(ln d, phi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct VelocityGrid<T: Real> {
    spec: GridSpec<T>,
    /// `d'/d` at `[k][j]`.
    normal_rate: Vec<Vec<T>>,
    /// `phi'` at `[k][j]`.
    angular_rate: Vec<Vec<T>>,
}

/// Metadata written next to the grid samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GridHeader<T: Real> {
    pub spec: GridSpec<T>,
    pub key: String,
    pub radial_nodes: usize,
    pub angular_nodes: usize,
}

fn lagrange4<T: Real>(t: T) -> [T; 4] {
    let one = T::one();
    let two = lit::<T>(2.0);
    let three = lit::<T>(3.0);
    let six = lit::<T>(6.0);
    [
        -(t - one) * (t - two) * (t - three) / six,
        t * (t - two) * (t - three) / two,
        -t * (t - one) * (t - three) / two,
        t * (t - one) * (t - two) / six,
    ]
}

impl<T: Real> VelocityGrid<T> {
    /// Evaluates the Biot-Savart velocity at every grid node.
    pub fn precompute(dom: &ConformalDomain<T>, w: &VorticityField<T>, spec: &GridSpec<T>) -> Result<Self> {
        spec.validate()?;
        let opts = VelocityOptions { rel_tol: spec.rel_tol, use_symmetry: spec.use_symmetry, ..Default::default() };
        let nk = spec.radial_nodes();
        let nj = spec.angle_count();
        let nodes: Vec<(usize, usize)> = (0..nk).flat_map(|k| (0..nj).map(move |j| (k, j))).collect();
        let samples: Vec<Result<(T, T)>> = nodes
            .par_iter()
            .map(|&(k, j)| {
                let p = DiscPoint { d: spec.distance(k), phi: spec.angle(j) };
                let v = velocity_components(dom, w, &p, &opts)?;
                Ok((-v.radial / p.d, v.tangential / p.r()))
            })
            .collect();
        let mut normal_rate = vec![vec![T::zero(); nj]; nk];
        let mut angular_rate = vec![vec![T::zero(); nj]; nk];
        for (&(k, j), s) in nodes.iter().zip(samples) {
            let (a, b) = s?;
            normal_rate[k][j] = a;
            angular_rate[k][j] = b;
        }
        Ok(VelocityGrid { spec: spec.clone(), normal_rate, angular_rate })
    }

    pub fn spec(&self) -> &GridSpec<T> {
        &self.spec
    }

    fn radial_stencil(&self, d: T) -> Result<(usize, [T; 4])> {
        let spec = &self.spec;
        let slack = lit::<T>(1e-12);
        if d > spec.d0 * (T::one() + slack) {
            return Err(Error::Domain(format!(
                "d = {:.3e} lies above the grid start d0 = {:.3e}",
                to_f64(d),
                to_f64(spec.d0)
            )));
        }
        if !(d >= spec.d_min() * (T::one() - slack)) {
            let need = (to_f64(spec.d0) / to_f64(d)).log2().ceil().max(0.0) as usize;
            return Err(Error::GridCoverage { d: to_f64(d), required_level: need });
        }
        let nk = spec.radial_nodes();
        let s = (spec.d0.ln() - d.ln()) / spec.step();
        let i0 = (s.floor().to_isize().unwrap_or(0) - 1).clamp(0, nk as isize - 4) as usize;
        Ok((i0, lagrange4(s - lit(i0 as f64))))
    }

    fn interpolate(&self, table: &[Vec<T>], d: T, phi: T) -> Result<T> {
        let (i0, wr) = self.radial_stencil(d)?;
        let n = self.spec.n_phi;
        if n == 0 {
            if wrap_angle(phi).abs() > lit(RAY_TOLERANCE) {
                return Err(Error::Domain(format!("single-ray grid queried at angle {:.3e}", to_f64(phi))));
            }
            return Ok((0..4).map(|a| wr[a] * table[i0 + a][0]).sum());
        }
        let h = T::TAU() / lit(n as f64);
        let mut s = phi / h;
        let nf = lit::<T>(n as f64);
        s = s - nf * (s / nf).floor();
        let base = s.floor().to_isize().unwrap_or(0) - 1;
        let wa = lagrange4(s - lit(base as f64));
        let mut acc = T::zero();
        for a in 0..4 {
            let mut row = T::zero();
            for b in 0..4 {
                let j = (base + b as isize).rem_euclid(n as isize) as usize;
                row = row + wa[b] * table[i0 + a][j];
            }
            acc = acc + wr[a] * row;
        }
        Ok(acc)
    }

    /// `(d'/d, phi')` at `(d, phi)`.
    pub fn rates(&self, d: T, phi: T) -> Result<(T, T)> {
        Ok((self.interpolate(&self.normal_rate, d, phi)?, self.interpolate(&self.angular_rate, d, phi)?))
    }

    /// Interpolated `dzeta/dt`.
    pub fn velocity(&self, zeta: Complex<T>) -> Result<Complex<T>> {
        let p = DiscPoint::from_complex(zeta);
        let (nr, ar) = self.rates(p.d, p.phi)?;
        Ok(Complex::new(-nr * p.d, ar * p.r()) * Complex::from_polar(T::one(), p.phi))
    }

    pub fn header(&self, key: &str) -> GridHeader<T> {
        GridHeader {
            spec: self.spec.clone(),
            key: key.to_string(),
            radial_nodes: self.spec.radial_nodes(),
            angular_nodes: self.spec.angle_count(),
        }
    }

    /// Samples as CSV: `r,phi,re_v,im_v,d,normal_rate,angular_rate`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,phi,re_v,im_v,d,normal_rate,angular_rate\n");
        for k in 0..self.spec.radial_nodes() {
            for j in 0..self.spec.angle_count() {
                let p = DiscPoint { d: self.spec.distance(k), phi: self.spec.angle(j) };
                let (nr, ar) = (self.normal_rate[k][j], self.angular_rate[k][j]);
                let v = Complex::new(-nr * p.d, ar * p.r()) * Complex::from_polar(T::one(), p.phi);
                out.push_str(&format!(
                    "{:e},{:e},{:e},{:e},{:e},{:e},{:e}\n",
                    to_f64(p.r()),
                    to_f64(p.phi),
                    to_f64(v.re),
                    to_f64(v.im),
                    to_f64(p.d),
                    to_f64(nr),
                    to_f64(ar)
                ));
            }
        }
        out
    }

    pub fn from_csv(header: &GridHeader<T>, csv: &str) -> Result<Self> {
        let spec = header.spec.clone();
        spec.validate()?;
        let (nk, nj) = (spec.radial_nodes(), spec.angle_count());
        if header.radial_nodes != nk || header.angular_nodes != nj {
            return Err(Error::Config("grid header does not match its spec".into()));
        }
        let mut normal_rate = vec![vec![T::zero(); nj]; nk];
        let mut angular_rate = vec![vec![T::zero(); nj]; nk];
        let mut rows = csv.lines().skip(1).filter(|l| !l.trim().is_empty());
        for k in 0..nk {
            for j in 0..nj {
                let line = rows.next().ok_or_else(|| Error::Config("grid CSV is truncated".into()))?;
                let cols: Vec<f64> = line
                    .split(',')
                    .map(|c| c.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::Config(format!("grid CSV: {e}")))?;
                if cols.len() != 7 {
                    return Err(Error::Config("grid CSV rows need 7 columns".into()));
                }
                normal_rate[k][j] = lit(cols[5]);
                angular_rate[k][j] = lit(cols[6]);
            }
        }
        if rows.next().is_some() {
            return Err(Error::Config("grid CSV has extra rows".into()));
        }
        Ok(VelocityGrid { spec, normal_rate, angular_rate })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lagrange_reproduces_cubics() {
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x * x;
        for t in [0.0, 0.3, 1.7, 2.5, 3.0] {
            let w = lagrange4(t);
            let v: f64 = (0..4).map(|i| w[i] * f(i as f64)).sum();
            assert!((v - f(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn coverage_error_names_level() {
        let spec = GridSpec::<f64> { levels: 4, ..Default::default() };
        let g = VelocityGrid {
            normal_rate: vec![vec![0.0]; spec.radial_nodes()],
            angular_rate: vec![vec![0.0]; spec.radial_nodes()],
            spec,
        };
        assert!(g.rates(0.1, 0.0).is_ok());
        match g.rates(0.75 / 64.0, 0.0) {
            Err(Error::GridCoverage { required_level, .. }) => assert_eq!(required_level, 6),
            other => panic!("{other:?}"),
        }
        let csv = g.to_csv();
        let back = VelocityGrid::from_csv(&g.header("k"), &csv).unwrap();
        assert_eq!(back, g);
    }
}
