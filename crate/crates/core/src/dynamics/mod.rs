//! Particle trajectories in disc coordinates and checks of the boundary-approach rates.

mod comparison;
mod fit;
mod trajectory;
mod verify;

pub use comparison::{comparison_ode, ComparisonLaw, ComparisonOde};
pub use fit::{lad_line, ols_line};
pub use trajectory::{integrate_trajectory, Termination, TrajectoryOptions, TrajectoryRecord};
pub use verify::{
    check_dprime_integrand, check_lemma31, lemma31_lhs, verify_arrival, verify_lower_bound, verify_upper_bound,
    y_curve, ArrivalReport, BoundKind, BoundReport, DprimeReport, DprimeRow, Lemma31Report, Lemma31Row,
    CONSTANT_CEILING,
};
