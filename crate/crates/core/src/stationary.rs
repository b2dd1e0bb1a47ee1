//! Positive stationary solutions by monotone long-time integration, with
//! periodic minorants, sub-solutions and tail and stability checks.

use rayon::prelude::*;
use serde::Serialize;

use crate::dispersal::DispersalOp;
use crate::domain::{Direction, Field, Habitat, Point, Reaction};
use crate::dynamics::{rhs_into, stability_bound, unit_fraction_step, Integrator, Scheme};
use crate::eigen::{
    assemble_cell_operator, principal_eigen, Cell, CellField, EIGEN_MAX_ITER, EIGEN_TOL,
};
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

pub const STATIONARY_TOL: f64 = 1e-9;
pub const RESIDUAL_TOL: f64 = 1e-7;
pub const STATIONARY_T_MAX: f64 = 500.0;
pub const MONOTONE_SLACK: f64 = 1e-10;
pub const SUB_SOLUTION_SLACK: f64 = 1e-10;
pub const MAX_HALVINGS: usize = 10;
pub const STABILITY_HORIZON: f64 = 200.0;
pub const STABILITY_TOL: f64 = 1e-4;

fn psi<T: Scalar>(t: T) -> T {
    if t > T::zero() {
        (-T::one() / t).exp()
    } else {
        T::zero()
    }
}

/// Smooth cutoff equal to 1 on `[0, 1]` and 0 on `[2, ∞)`.
pub fn smooth_step<T: Scalar>(s: T) -> T {
    let a = psi(T::lit(2.0) - s);
    let b = psi(s - T::one());
    a / (a + b)
}

/// Periodic lower bound `h ≤ f(·, 0)` whose cell average is close to `f0(0)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicMinorant<T> {
    pub period: T,
    /// `inf_x f(x, 0)`.
    pub floor: T,
    pub coefficient: CellField<T>,
}

impl<T: Scalar> PeriodicMinorant<T> {
    pub fn average(&self) -> T {
        self.coefficient.average()
    }

    pub fn is_constant(&self) -> bool {
        self.coefficient.oscillation() == T::zero()
    }
}

fn minorant_value<T: Scalar>(reaction: &Reaction<T>, floor: T, x: &Point<T>) -> T {
    let top = reaction.base_rate();
    if floor >= top {
        return top;
    }
    let l0 = reaction.radius();
    let s = (x[0] * x[0] + x[1] * x[1]) / (l0 * l0);
    top - smooth_step(s) * (top - floor)
}

fn floor_on<T: Scalar>(reaction: &Reaction<T>, habitat: &Habitat<T>) -> T {
    reaction
        .rate_field(habitat)
        .into_iter()
        .fold(reaction.base_rate(), T::min)
}

/// Minorant sampled on the cell of period `period` matching `habitat`.
fn minorant_with_period<T: Scalar>(
    reaction: &Reaction<T>,
    habitat: &Habitat<T>,
    floor: T,
    period: T,
) -> Result<PeriodicMinorant<T>> {
    let cell = Cell::matching(habitat, period)?;
    let coefficient = CellField::from_fn(cell, |x| minorant_value(reaction, floor, &x));
    for (idx, &h) in coefficient.values().iter().enumerate() {
        let x = cell.coords(idx);
        if reaction.rate_at(&x) < h {
            return Err(Error::Precondition(format!(
                "minorant exceeds f(x, 0) at {:?}",
                [x[0].to_f64_lossy(), x[1].to_f64_lossy()]
            )));
        }
    }
    Ok(PeriodicMinorant {
        period,
        floor,
        coefficient,
    })
}

/// Smallest admissible period in grid units, rounded up to an even count.
fn minimal_period_points<T: Scalar>(
    reaction: &Reaction<T>,
    habitat: &Habitat<T>,
    floor: T,
    eps: T,
) -> usize {
    let h = habitat.spacing();
    let l0 = reaction.radius();
    let dim = habitat.dim();
    // Mass of the dip; it is independent of the period once p > 4 L0.
    let reach = (T::lit(2.0).sqrt() * l0 / h).ceil().to_usize().unwrap_or(0) + 1;
    let r = reach as isize;
    let mut dip = T::zero();
    let range = || -r..=r;
    for i in range() {
        for j in if dim == 2 { range() } else { 0..=0 } {
            let x = [T::from_isize(i).unwrap() * h, T::from_isize(j).unwrap() * h];
            dip += reaction.base_rate() - minorant_value(reaction, floor, &x);
        }
    }
    let hd = h.powi(dim as i32);
    let need = (dip * hd / eps).powf(T::one() / T::from_usize_lossy(dim));
    let lower = (T::lit(4.0) * l0).max(need);
    let mut k = (lower / h).floor().to_usize().unwrap_or(0) + 1;
    k += k % 2;
    k.max(crate::eigen::MIN_POINTS_PER_PERIOD)
}

/// Builds `h(x) = f0(0) - h0(|x|²/L0²) (f0(0) - M0)` on the smallest cell of
/// period `p > 4 L0` whose average is at least `f0(0) - eps`.
pub fn periodic_minorant<T: Scalar>(
    reaction: &Reaction<T>,
    eps: T,
    habitat: &Habitat<T>,
) -> Result<PeriodicMinorant<T>> {
    let top = reaction.base_rate();
    if !(eps > T::zero() && eps < top) {
        return Err(invalid("eps", "must lie in (0, f0(0))"));
    }
    let floor = floor_on(reaction, habitat);
    let k = minimal_period_points(reaction, habitat, floor, eps);
    let period = T::from_usize_lossy(k) * habitat.spacing();
    let available = T::lit(2.0) * habitat.half_extent();
    if period > available {
        return Err(Error::PeriodTooLarge {
            needed: period.to_f64_lossy(),
            available: available.to_f64_lossy(),
        });
    }
    let m = minorant_with_period(reaction, habitat, floor, period)?;
    debug_assert!(m.average() >= top - eps - T::lit(1e-12));
    Ok(m)
}

/// Period at least `min_points` grid units such that the habitat half-width
/// is an odd multiple of half a period. The boundary then sits on a cell edge,
/// where the periodic eigenfunction is symmetric.
fn aligned_period_points<T: Scalar>(habitat: &Habitat<T>, min_points: usize) -> Option<usize> {
    let n = (habitat.half_extent() / habitat.spacing()).round().to_usize()?;
    (1..=n)
        .step_by(2)
        .filter(|m| n % m == 0)
        .map(|m| 2 * n / m)
        .filter(|&k| k >= min_points)
        .min()
}

/// Validated sub-solution `δ φ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubSolution<T> {
    pub field: Field<T>,
    pub delta: T,
    pub halvings: usize,
    /// Principal eigenvalue of the minorant problem at `μ = 0`.
    pub lambda: T,
    pub period: T,
    /// Smallest pointwise value of `D(δφ) + δφ f(x, δφ)`.
    pub worst: T,
}

/// Smallest value of `D u + u f(x, u)` over the habitat.
pub fn evolution_rate_min<T: Scalar>(op: &DispersalOp<T>, reaction: &Reaction<T>, u: &Field<T>) -> Result<T> {
    op.check_habitat(u.habitat())?;
    let rates = reaction.rate_field(u.habitat());
    let mut out = vec![T::zero(); u.len()];
    rhs_into(op, u.habitat(), &rates, reaction.crowding(), u.values(), &mut out);
    Ok(out.into_iter().fold(T::infinity(), T::min))
}

/// Max-norm of `D u + u f(x, u)`.
pub fn stationary_residual<T: Scalar>(op: &DispersalOp<T>, reaction: &Reaction<T>, u: &Field<T>) -> Result<T> {
    op.check_habitat(u.habitat())?;
    let rates = reaction.rate_field(u.habitat());
    let mut out = vec![T::zero(); u.len()];
    rhs_into(op, u.habitat(), &rates, reaction.crowding(), u.values(), &mut out);
    Ok(out.into_iter().fold(T::zero(), |m, v| m.max(v.abs())))
}

/// Periodic principal eigenfunction of the minorant with `eps = f0(0)/2`,
/// extended over the habitat, normalized to max 1 and scaled by `delta`; the
/// sub-solution inequality is checked pointwise and `delta` is halved until it
/// holds.
pub fn sub_solution<T: Scalar>(
    op: &DispersalOp<T>,
    reaction: &Reaction<T>,
    habitat: &Habitat<T>,
    delta: T,
) -> Result<SubSolution<T>> {
    op.check_habitat(habitat)?;
    if !(delta > T::zero()) {
        return Err(invalid("delta", "must be positive"));
    }
    let top = reaction.base_rate();
    if !(top > T::zero()) {
        return Err(Error::Precondition("f0(0) must be positive".into()));
    }
    let eps = T::lit(0.5) * top;
    let floor = floor_on(reaction, habitat);

    let (phi, lambda, period) = if floor >= top {
        (Field::constant(*habitat, T::one()), top, T::zero())
    } else {
        let h = habitat.spacing();
        let mut min_points = minimal_period_points(reaction, habitat, floor, eps);
        let kernel_points = (T::lit(2.0) * op.reach() / h).floor().to_usize().unwrap_or(0) + 2;
        min_points = min_points.max(kernel_points);
        let k = aligned_period_points(habitat, min_points).ok_or_else(|| Error::PeriodTooLarge {
            needed: (T::from_usize_lossy(min_points) * h).to_f64_lossy(),
            available: (T::lit(2.0) * habitat.half_extent()).to_f64_lossy(),
        })?;
        let period = T::from_usize_lossy(k) * h;
        let minorant = minorant_with_period(reaction, habitat, floor, period)?;
        let cell_op = assemble_cell_operator(op, T::zero(), &Direction::positive_x(), &minorant.coefficient)?;
        let eig = principal_eigen(&cell_op, T::lit(EIGEN_TOL), EIGEN_MAX_ITER)?;
        let phi = eig.eigenfunction.extend_to(habitat)?;
        let top_phi = phi.max();
        (phi.scaled(T::one() / top_phi), eig.lambda, period)
    };

    let mut d = delta;
    let mut worst = T::neg_infinity();
    for halvings in 0..=MAX_HALVINGS {
        let field = phi.scaled(d);
        worst = evolution_rate_min(op, reaction, &field)?;
        if worst >= -T::lit(SUB_SOLUTION_SLACK) {
            return Ok(SubSolution {
                field,
                delta: d,
                halvings,
                lambda,
                period,
                worst,
            });
        }
        d = d * T::lit(0.5);
    }
    Err(Error::SubSolutionFailed {
        delta: (d * T::lit(2.0)).to_f64_lossy(),
        worst: worst.to_f64_lossy(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// From the constant super-solution `β0 + 1`.
    FromAbove,
    /// From a validated sub-solution.
    FromBelow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationaryOptions<T> {
    /// Max-norm change between unit-spaced records that counts as converged.
    pub tol: T,
    pub residual_tol: T,
    pub t_max: T,
    /// Time step; `None` picks the largest stable `1/n`.
    pub dt: Option<T>,
    /// Starting `δ` of the sub-solution.
    pub delta: T,
}

impl<T: Scalar> Default for StationaryOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(STATIONARY_TOL),
            residual_tol: T::lit(RESIDUAL_TOL),
            t_max: T::lit(STATIONARY_T_MAX),
            dt: None,
            delta: T::lit(0.1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryResult<T> {
    pub u_star: Field<T>,
    pub route: Route,
    pub residual: T,
    /// Time at which both stopping criteria held.
    pub time: T,
    pub records: usize,
    /// Largest step against the expected monotone direction between records.
    pub monotone_violation: T,
    pub initial: Field<T>,
}

impl<T: Scalar> StationaryResult<T> {
    pub fn is_monotone(&self) -> bool {
        self.monotone_violation <= T::lit(MONOTONE_SLACK)
    }
}

/// Initial data of a route.
pub fn route_initial<T: Scalar>(
    op: &DispersalOp<T>,
    reaction: &Reaction<T>,
    habitat: &Habitat<T>,
    route: Route,
    delta: T,
) -> Result<Field<T>> {
    match route {
        Route::FromAbove => Ok(Field::constant(*habitat, reaction.beta0(habitat) + T::one())),
        Route::FromBelow => Ok(sub_solution(op, reaction, habitat, delta)?.field),
    }
}

fn stable_unit_step<T: Scalar>(op: &DispersalOp<T>, reaction: &Reaction<T>, u0: &Field<T>) -> T {
    let m = u0.max().max(reaction.beta0(u0.habitat()));
    unit_fraction_step(stability_bound(op, reaction, u0.habitat(), m))
}

fn steps_per_unit<T: Scalar>(dt: T) -> Result<usize> {
    let n = (T::one() / dt).round();
    if (n * dt - T::one()).abs() > T::lit(1e-9) {
        return Err(invalid("dt", "must divide the unit record spacing"));
    }
    n.to_usize().ok_or_else(|| invalid("dt", "too small"))
}

/// Integrates from the route's initial data until successive unit-spaced
/// records differ by less than `tol` and the residual is below
/// `residual_tol`.
pub fn solve_stationary<T: Scalar>(
    op: &DispersalOp<T>,
    reaction: &Reaction<T>,
    habitat: &Habitat<T>,
    route: Route,
    opts: &StationaryOptions<T>,
) -> Result<StationaryResult<T>> {
    let u0 = route_initial(op, reaction, habitat, route, opts.delta)?;
    let dt = opts.dt.unwrap_or_else(|| stable_unit_step(op, reaction, &u0));
    let per_unit = steps_per_unit(dt)?;
    let mut integ = Integrator::new(op, reaction, &u0, dt, Scheme::Rk4)?;
    let mut prev = u0.values().to_vec();
    let mut violation = T::zero();
    let mut change = T::infinity();
    let mut residual = T::infinity();
    let mut records = 0;
    let units = opts.t_max.ceil().to_usize().unwrap_or(0);
    for _ in 0..units {
        for _ in 0..per_unit {
            integ.step()?;
        }
        records += 1;
        let cur = integ.state();
        change = T::zero();
        for (&c, &p) in cur.iter().zip(&prev) {
            change = change.max((c - p).abs());
            let wrong = match route {
                Route::FromAbove => c - p,
                Route::FromBelow => p - c,
            };
            violation = violation.max(wrong);
        }
        prev.copy_from_slice(cur);
        if change < opts.tol {
            residual = integ.rhs_norm();
            if residual <= opts.residual_tol {
                let u_star = integ.field();
                if !u_star.is_strictly_positive() {
                    return Err(Error::NonPositive {
                        min: u_star.min().to_f64_lossy(),
                    });
                }
                return Ok(StationaryResult {
                    u_star,
                    route,
                    residual,
                    time: integ.time(),
                    records,
                    monotone_violation: violation,
                    initial: u0,
                });
            }
        }
    }
    if residual.is_infinite() {
        residual = integ.rhs_norm();
    }
    Err(Error::StationaryNotConverged {
        t_max: opts.t_max.to_f64_lossy(),
        change: change.to_f64_lossy(),
        residual: residual.to_f64_lossy(),
    })
}

/// `sup |u*(x) - u0|` over `R <= |x| <= L - reach - 5h`.
pub fn check_tail<T: Scalar>(u_star: &Field<T>, u0_star: T, r: T, reach: T) -> Result<T> {
    let hab = u_star.habitat();
    let outer = hab.half_extent() - reach - T::lit(5.0) * hab.spacing();
    if !(r < outer) {
        return Err(Error::EmptyWindow(format!(
            "tail window [{r}, {outer}] is empty"
        )));
    }
    let mut worst = T::zero();
    let mut seen = false;
    for (idx, &v) in u_star.values().iter().enumerate() {
        let x = hab.coords(idx);
        let norm = (x[0] * x[0] + x[1] * x[1]).sqrt();
        if norm >= r && norm <= outer {
            seen = true;
            worst = worst.max((v - u0_star).abs());
        }
    }
    if !seen {
        return Err(Error::EmptyWindow("no grid point in the tail window".into()));
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport<T> {
    pub horizon: T,
    /// Max-norm distance to `u*` at the horizon, per perturbation.
    pub distances: Vec<T>,
    pub threshold: T,
    pub passes: bool,
}

/// Evolves each strictly positive perturbation to `horizon` and measures the
/// distance to `u_star`.
pub fn check_stability<T: Scalar>(
    op: &DispersalOp<T>,
    reaction: &Reaction<T>,
    u_star: &Field<T>,
    perturbations: &[Field<T>],
    horizon: T,
) -> Result<StabilityReport<T>> {
    for p in perturbations {
        p.check_same_habitat(u_star)?;
        if !p.is_strictly_positive() {
            return Err(Error::NonPositive {
                min: p.min().to_f64_lossy(),
            });
        }
    }
    let distances = perturbations
        .par_iter()
        .map(|u0| {
            let dt = stable_unit_step(op, reaction, u0);
            let mut integ = Integrator::new(op, reaction, u0, dt, Scheme::Rk4)?;
            let steps = (horizon / dt - T::lit(1e-9)).ceil().to_usize().unwrap_or(0);
            for _ in 0..steps {
                integ.step()?;
            }
            integ.field().max_abs_diff(u_star)
        })
        .collect::<Result<Vec<T>>>()?;
    let threshold = T::lit(STABILITY_TOL);
    let passes = distances.iter().all(|&d| d < threshold);
    Ok(StabilityReport {
        horizon,
        distances,
        threshold,
        passes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{BaseGrowth, Boundary, Kernel, KernelProfile, LatticeWeights};

    fn dip(a: f64) -> Reaction<f64> {
        Reaction::new(BaseGrowth::Linear { r0: 1.0, b: 1.0 }, a, 2.0).unwrap()
    }

    fn line(l: f64, h: f64) -> Habitat<f64> {
        Habitat::continuum(1, l, h, Boundary::ClampToConstant).unwrap()
    }

    #[test]
    fn smooth_step_limits() {
        assert_eq!(smooth_step(0.5), 1.0);
        assert_eq!(smooth_step(1.0), 1.0);
        assert_eq!(smooth_step(2.0), 0.0);
        assert_eq!(smooth_step(3.0), 0.0);
        assert!((smooth_step(1.5f64) - 0.5).abs() < 1e-12);
        let mut prev = 1.0;
        for k in 0..=100 {
            let v = smooth_step(1.0 + k as f64 / 100.0);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn homogeneous_minorant_is_constant() {
        let hab = line(40.0, 0.25);
        let m = periodic_minorant(&Reaction::fisher(), 0.1, &hab).unwrap();
        assert!(m.is_constant());
        assert!((m.average() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dip_minorant_average_and_growth() {
        let hab = line(80.0, 0.1);
        let r = dip(-0.5);
        let coarse = periodic_minorant(&r, 0.1, &hab).unwrap();
        let fine = periodic_minorant(&r, 0.02, &hab).unwrap();
        assert!(coarse.period > 8.0);
        assert!(coarse.average() >= 0.9 - 1e-12);
        assert!(fine.average() >= 0.98 - 1e-12);
        assert!(fine.period > coarse.period);
        assert!((coarse.floor - 0.5).abs() < 1e-12);
        let cell = *coarse.coefficient.cell();
        for (i, &h) in coarse.coefficient.values().iter().enumerate() {
            assert!(r.rate_at(&cell.coords(i)) - h >= 0.0);
        }
        assert!(matches!(
            periodic_minorant(&r, 1e-5, &hab),
            Err(Error::PeriodTooLarge { .. })
        ));
    }

    #[test]
    fn fisher_sub_solution_is_constant() {
        let hab = line(20.0, 0.25);
        let s = sub_solution(&DispersalOp::Random, &Reaction::fisher(), &hab, 0.1).unwrap();
        assert_eq!(s.halvings, 0);
        assert!((s.worst - 0.09).abs() < 1e-12);
        assert!(s.field.values().iter().all(|&v| (v - 0.1).abs() < 1e-15));
    }

    #[test]
    fn dip_sub_solutions_validate() {
        let r = dip(-0.5);
        let hab = line(40.0, 0.25);
        let nl = DispersalOp::Nonlocal(Kernel::new(KernelProfile::Bump, 1.0, 1, 0.25).unwrap());
        for op in [DispersalOp::Random, nl] {
            let s = sub_solution(&op, &r, &hab, 0.2).unwrap();
            assert!(s.field.is_strictly_positive());
            assert!(s.lambda > 0.0);
            assert!(s.worst >= -SUB_SOLUTION_SLACK);
        }
        let lat = Habitat::lattice(1, 60, Boundary::ClampToConstant).unwrap();
        let op = DispersalOp::Discrete(LatticeWeights::uniform(1, 1.0).unwrap());
        let s = sub_solution(&op, &r, &lat, 0.2).unwrap();
        assert!(s.field.is_strictly_positive() && s.lambda > 0.0);
    }

    #[test]
    fn aligned_period_puts_boundary_on_edge() {
        let hab = line(80.0, 0.1);
        let k = aligned_period_points(&hab, 90).unwrap();
        assert_eq!(k, 320);
        assert_eq!((800 / (k / 2)) % 2, 1);
        assert_eq!(aligned_period_points(&hab, 2000), None);
    }

    #[test]
    fn fisher_stationary_is_one() {
        let hab = line(10.0, 0.25);
        for route in [Route::FromAbove, Route::FromBelow] {
            let s = solve_stationary(&DispersalOp::Random, &Reaction::fisher(), &hab, route, &Default::default()).unwrap();
            assert!(s.u_star.values().iter().all(|v| (v - 1.0).abs() < 1e-7));
            assert!(s.is_monotone());
            assert!(s.residual <= RESIDUAL_TOL);
        }
    }

    #[test]
    fn tail_window() {
        let hab = line(10.0, 0.25);
        let u = Field::constant(hab, 1.0);
        assert_eq!(check_tail(&u, 1.0, 2.0, 0.0).unwrap(), 0.0);
        assert!(matches!(check_tail(&u, 1.0, 9.0, 0.0), Err(Error::EmptyWindow(_))));
    }

    #[test]
    fn stability_rejects_nonpositive() {
        let hab = line(5.0, 0.25);
        let u = Field::constant(hab, 1.0);
        let z = Field::zeros(hab);
        assert!(check_stability(&DispersalOp::Random, &Reaction::fisher(), &u, &[z], 1.0).is_err());
    }
}
