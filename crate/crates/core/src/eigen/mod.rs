//! Principal eigenvalues of the exponentially twisted dispersal operators on a
//! periodic cell.

mod cell;
mod checks;
mod closed_form;
mod lu;
mod solver;

pub use cell::{
    assemble_cell_operator, Cell, CellField, CellOperator, PeriodicCoefficient,
    MIN_POINTS_PER_PERIOD,
};
pub use checks::{
    check_average_lower_bound, check_pe_existence, AverageBoundReport, PeExistenceReport,
    AVERAGE_BOUND_SLACK, HALF_MASS_DIRECTIONS,
};
pub use closed_form::{lambda_closed_form, lambda_grid_symbol};
pub use solver::{
    principal_eigen, EigenResult, EIGEN_MAX_ITER, EIGEN_TOL, MAX_DENSE_POINTS, POWER_ITER_BUDGET,
};
