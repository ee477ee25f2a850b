use serde::{Deserialize, Serialize};

use crate::disc::DiscPoint;
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Behaviour of a field under `z -> conj z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    None,
}

/// Piecewise constant vorticity on polar cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PolarCells<T: Real> {
    /// Radial edges, from 0 to 1.
    pub radii: Vec<T>,
    /// Angular edges, from -pi to pi.
    pub angles: Vec<T>,
    /// `values[i][j]` on `radii[i]..radii[i+1]` x `angles[j]..angles[j+1]`.
    pub values: Vec<Vec<T>>,
}

/// Stationary vorticity pulled back to the disc, `w = omega o S`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "")]
pub enum VorticityField<T: Real> {
    Constant { c: T },
    /// `c sgn(Im z)`.
    OddHalf { c: T },
    /// `c` on `|z| <= radius`, zero outside.
    Ring { c: T, radius: T },
    Grid(PolarCells<T>),
}

fn increasing<T: Real>(v: &[T]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

impl<T: Real> VorticityField<T> {
    pub fn constant(c: T) -> Self {
        VorticityField::Constant { c }
    }

    pub fn odd_half(c: T) -> Self {
        VorticityField::OddHalf { c }
    }

    pub fn ring(c: T, radius: T) -> Result<Self> {
        if !(radius > T::zero() && radius <= T::one()) {
            return Err(Error::Domain("ring radius must lie in (0, 1]".into()));
        }
        Ok(VorticityField::Ring { c, radius })
    }

    pub fn grid(cells: PolarCells<T>) -> Result<Self> {
        let f = VorticityField::Grid(cells);
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |x: T| x.is_finite();
        match self {
            VorticityField::Constant { c } | VorticityField::OddHalf { c } if finite(*c) => Ok(()),
            VorticityField::Ring { c, radius } if finite(*c) && *radius > T::zero() && *radius <= T::one() => Ok(()),
            VorticityField::Grid(g) => {
                let tol = lit::<T>(1e-12);
                let ok = g.radii.len() >= 2
                    && g.angles.len() >= 2
                    && increasing(&g.radii)
                    && increasing(&g.angles)
                    && g.radii[0] == T::zero()
                    && (g.radii[g.radii.len() - 1] - T::one()).abs() <= tol
                    && (g.angles[0] + T::PI()).abs() <= tol
                    && (g.angles[g.angles.len() - 1] - T::PI()).abs() <= tol
                    && g.values.len() == g.radii.len() - 1
                    && g.values.iter().all(|row| row.len() == g.angles.len() - 1 && row.iter().all(|&v| finite(v)));
                if ok {
                    Ok(())
                } else {
                    Err(Error::Config("polar cell grid needs increasing edges covering [0,1] x [-pi,pi] and matching values".into()))
                }
            }
            _ => Err(Error::Config("vorticity parameters must be finite".into())),
        }
    }

    /// `||w||_inf`.
    pub fn sup_norm(&self) -> T {
        match self {
            VorticityField::Constant { c } | VorticityField::OddHalf { c } | VorticityField::Ring { c, .. } => c.abs(),
            VorticityField::Grid(g) => g
                .values
                .iter()
                .flatten()
                .fold(T::zero(), |a, &v| a.max(v.abs())),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sup_norm() == T::zero()
    }

    pub fn value_at(&self, p: &DiscPoint<T>) -> T {
        match self {
            VorticityField::Constant { c } => *c,
            VorticityField::OddHalf { c } => {
                if p.phi > T::zero() && p.phi < T::PI() {
                    *c
                } else if p.phi < T::zero() {
                    -*c
                } else {
                    T::zero()
                }
            }
            VorticityField::Ring { c, radius } => {
                if p.r() <= *radius {
                    *c
                } else {
                    T::zero()
                }
            }
            VorticityField::Grid(g) => {
                let i = g.radii.partition_point(|&r| r <= p.r()).clamp(1, g.radii.len() - 1) - 1;
                let j = g.angles.partition_point(|&a| a <= p.phi).clamp(1, g.angles.len() - 1) - 1;
                g.values[i][j]
            }
        }
    }

    pub fn parity(&self) -> Parity {
        match self {
            VorticityField::Constant { .. } | VorticityField::Ring { .. } => Parity::Even,
            VorticityField::OddHalf { .. } => Parity::Odd,
            VorticityField::Grid(g) => {
                let n = g.angles.len();
                let tol = lit::<T>(1e-12);
                let mirrored = (0..n).all(|j| (g.angles[j] + g.angles[n - 1 - j]).abs() <= tol);
                if !mirrored {
                    return Parity::None;
                }
                let m = n - 1;
                let check = |sign: T| {
                    g.values
                        .iter()
                        .all(|row| (0..m).all(|j| row[j] == sign * row[m - 1 - j]))
                };
                if check(T::one()) {
                    Parity::Even
                } else if check(-T::one()) {
                    Parity::Odd
                } else {
                    Parity::None
                }
            }
        }
    }

    /// Radii `1 - |z|` across which the field jumps.
    pub fn distance_breaks(&self) -> Vec<T> {
        match self {
            VorticityField::Ring { radius, .. } => vec![T::one() - *radius],
            VorticityField::Grid(g) => g.radii.iter().map(|&r| T::one() - r).collect(),
            _ => Vec::new(),
        }
    }

    /// Angles across which the field jumps.
    pub fn angle_breaks(&self) -> Vec<T> {
        match self {
            VorticityField::OddHalf { .. } => vec![T::zero()],
            VorticityField::Grid(g) => g.angles.clone(),
            _ => Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_half_antisymmetric() {
        let w = VorticityField::odd_half(2.0);
        for k in 0..50 {
            let p = DiscPoint::new(0.01 + 0.019 * k as f64, -3.0 + 0.12 * k as f64);
            assert_eq!(w.value_at(&p.conj()), -w.value_at(&p));
            assert!(w.value_at(&p).abs() <= w.sup_norm());
        }
        assert_eq!(w.parity(), Parity::Odd);
    }

    #[test]
    fn grid_lookup_and_parity() {
        let pi = std::f64::consts::PI;
        let cells = PolarCells {
            radii: vec![0.0, 0.5, 1.0],
            angles: vec![-pi, 0.0, pi],
            values: vec![vec![-1.0, 1.0], vec![-3.0, 3.0]],
        };
        let w = VorticityField::grid(cells).unwrap();
        assert_eq!(w.value_at(&DiscPoint::new(0.2, 1.0)), 3.0);
        assert_eq!(w.value_at(&DiscPoint::new(0.7, -1.0)), -1.0);
        assert_eq!(w.parity(), Parity::Odd);
        assert_eq!(w.sup_norm(), 3.0);
    }

    #[test]
    fn serde_round_trip() {
        let w = VorticityField::ring(1.5, 0.4).unwrap();
        let s = serde_json::to_string(&w).unwrap();
        assert_eq!(s, r#"{"kind":"ring","c":1.5,"radius":0.4}"#);
        let back: VorticityField<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, w);
    }
}
