//! Riemann maps of the disc onto domains given by a tangent-argument decomposition.

mod construct;
mod decomposition;
pub(crate) mod domain;
mod trace;

pub use construct::{
    construct_modulus_domain, delta_for_domain, disc_domain, square_domain, triangle_domain, Construction,
    DeltaReport, DomainSpec, ProfileSpec,
};
pub use decomposition::{AngleSet, Atom, BetaTilde, BoundaryMeasure, TangentDecomposition};
pub use domain::{ConformalDomain, MapValue};
pub use trace::{trace_boundary, BoundaryTrace};
