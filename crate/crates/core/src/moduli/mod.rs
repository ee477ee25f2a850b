//! Moduli of continuity and the rate functions built from them.
//!
//! All heavy lifting happens in the logarithmic variable `u = ln(1/s)`, where
//! the weight `Q_m(s) = exp((2/pi) * int_s^1 m(r)/r dr)` becomes
//! `exp(lnq(u))` with `lnq(u) = (2/pi) * int_0^u m(e^-v) dv`.

mod classify;
mod compose;
mod family;
mod rates;

pub use classify::{classify, classify_numeric, Classification, DivergenceClass, DiniClass, NumericEvidence};
pub use compose::{compose_arc_length, validate_modulus, ModulusReport, Witness};
pub use family::{Modulus, Tabulated};
pub use rates::RateFunctions;
