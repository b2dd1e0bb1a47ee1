use kpplab::dynamics::{evolve, EvolveOptions};
use kpplab::eigen::{lambda_closed_form, lambda_grid_symbol, Cell, CellField, EIGEN_MAX_ITER, EIGEN_TOL};
use kpplab::experiments::{estimate_speed, track_front};
use kpplab::speeds::{minimize_speed, theoretical_speed, DispersionRelation, SPEED_TOL};
use kpplab::stationary::{
    periodic_minorant, solve_stationary, stationary_residual, sub_solution, Route, StationaryOptions,
};
use kpplab::{
    make_front_initial, BaseGrowth, Boundary, Direction, DispersalOp, Field, Habitat, Kernel,
    KernelProfile, LatticeWeights, Reaction,
};

fn line(l: f64, h: f64) -> Habitat<f64> {
    Habitat::continuum(1, l, h, Boundary::ClampToConstant).unwrap()
}

fn dip(a: f64) -> Reaction<f64> {
    Reaction::new(BaseGrowth::Linear { r0: 1.0, b: 1.0 }, a, 2.0).unwrap()
}

#[test]
fn fitted_speed_is_robust_to_the_tracked_level() {
    let hab = line(150.0, 0.1);
    let op = DispersalOp::Random;
    let reaction = Reaction::fisher();
    let xi = Direction::positive_x();
    let u0 = make_front_initial(&hab, &xi, 1.0).unwrap();
    let traj = evolve(&op, &reaction, &u0, &EvolveOptions::unit_records(&op, &reaction, &u0, 50.0)).unwrap();
    let slopes: Vec<f64> = [0.25, 0.5, 0.75]
        .iter()
        .map(|&level| {
            let trace = track_front(&traj, &xi, level, 0.0).unwrap();
            estimate_speed(&trace, 0.5).unwrap().slope
        })
        .collect();
    for a in &slopes {
        for b in &slopes {
            assert!((a - b).abs() / a.max(*b) <= 0.02, "{slopes:?}");
        }
    }
}

#[test]
fn eigen_backed_relation_reproduces_closed_forms() {
    let xi = Direction::positive_x();
    let lattice = DispersalOp::Discrete(LatticeWeights::new(1, vec![1.3, 0.6]).unwrap());
    let a = CellField::constant(Cell::lattice(1, 8).unwrap(), 0.8);
    let rel = DispersionRelation::eigen_backed(&lattice, xi, a, EIGEN_TOL, EIGEN_MAX_ITER);
    for mu in [0.1, 0.7, 1.9] {
        let exact = lambda_closed_form(&lattice, mu, &xi, 0.8);
        assert!((rel.lambda(mu).unwrap() - exact).abs() <= 1e-8 * (1.0 + exact.abs()));
    }
    let eig = minimize_speed(&rel, SPEED_TOL).unwrap();
    let closed = minimize_speed(&DispersionRelation::closed_form(&lattice, xi, 0.8), SPEED_TOL).unwrap();
    assert!((eig.c_star - closed.c_star).abs() <= 1e-7, "{} vs {}", eig.c_star, closed.c_star);

    let h = 0.1;
    let random = DispersalOp::Random;
    let a = CellField::constant(Cell::continuum(1, 2.0, h).unwrap(), 1.0);
    let rel = DispersionRelation::eigen_backed(&random, xi, a, EIGEN_TOL, EIGEN_MAX_ITER);
    for mu in [0.5, 1.0, 2.0] {
        let exact = lambda_closed_form(&random, mu, &xi, 1.0);
        let err = (rel.lambda(mu).unwrap() - exact).abs();
        assert!(err <= 0.1 * h * h * (1.0 + mu.powi(4)), "mu {mu}: {err}");
    }
}

#[test]
fn minorant_speed_bounds_the_averaged_symbol_speed() {
    let hab = line(80.0, 0.1);
    let xi = Direction::positive_x();
    let ops = [
        DispersalOp::Random,
        DispersalOp::Nonlocal(Kernel::new(KernelProfile::Bump, 1.0, 1, 0.1).unwrap()),
    ];
    let minorant = periodic_minorant(&dip(-0.5), 0.1, &hab).unwrap();
    let avg = minorant.average();
    for op in ops {
        let eig = DispersionRelation::eigen_backed(&op, xi, minorant.coefficient.clone(), EIGEN_TOL, EIGEN_MAX_ITER)
            .with_mu_max(6.0);
        let c_eig = minimize_speed(&eig, 1e-8).unwrap().c_star;
        let sym = DispersionRelation::from_fn(op.kind(), xi, {
            let op = op.clone();
            move |mu| Ok(lambda_grid_symbol(&op, mu, &xi, avg))
        })
        .with_mu_max(6.0);
        let c_avg = minimize_speed(&sym, 1e-8).unwrap().c_star;
        let c_full = theoretical_speed(&op, &dip(-0.5), &xi).unwrap().c_star;
        assert!(c_eig >= c_avg - 1e-6, "{:?}: {c_eig} < {c_avg}", op.kind());
        assert!(c_eig <= c_full + 1e-3, "{:?}: {c_eig} > {c_full}", op.kind());
    }
}

#[test]
fn stationary_state_is_sandwiched_and_residual_detects_offsets() {
    let hab = line(40.0, 0.1);
    let op = DispersalOp::Random;
    let reaction = dip(0.5);
    let star = solve_stationary(&op, &reaction, &hab, Route::FromAbove, &StationaryOptions::default()).unwrap();
    let sub = sub_solution(&op, &reaction, &hab, 0.1).unwrap();
    let top = reaction.beta0(&hab) + 1.0;
    for ((&u, &s), i) in star.u_star.values().iter().zip(sub.field.values()).zip(0..) {
        assert!(s <= u + 1e-9 && u <= top, "index {i}: {s} <= {u} <= {top}");
    }
    assert!(stationary_residual(&op, &reaction, &star.u_star).unwrap() <= 1e-7);
    let shifted = star.u_star.map(|v| v + 0.01);
    assert!(stationary_residual(&op, &reaction, &shifted).unwrap() > 1e-4);
    let scaled = star.u_star.scaled(0.99);
    assert!(stationary_residual(&op, &reaction, &scaled).unwrap() > 1e-4);
}

fn fisher_slope<T: kpplab::Scalar>() -> f64 {
    let hab = Habitat::<T>::continuum(1, T::lit(60.0), T::lit(0.25), Boundary::ClampToConstant).unwrap();
    let op = DispersalOp::<T>::Random;
    let r = Reaction::<T>::fisher();
    let xi = Direction::<T>::positive_x();
    let u0 = make_front_initial(&hab, &xi, T::one()).unwrap();
    let traj = evolve(&op, &r, &u0, &EvolveOptions::unit_records(&op, &r, &u0, T::lit(20.0))).unwrap();
    let trace = track_front(&traj, &xi, T::lit(0.5), T::zero()).unwrap();
    estimate_speed(&trace, T::lit(0.5)).unwrap().slope.to_f64_lossy()
}

#[test]
fn single_precision_front_tracks_double() {
    let (s32, s64) = (fisher_slope::<f32>(), fisher_slope::<f64>());
    assert!((s32 - s64).abs() <= 1e-3 * s64, "{s32} vs {s64}");
    let c32 = theoretical_speed(&DispersalOp::<f32>::Random, &Reaction::fisher(), &Direction::positive_x())
        .unwrap()
        .c_star;
    assert!((c32 - 2.0).abs() <= 1e-5, "{c32}");
}

#[test]
fn front_positions_shift_with_the_data() {
    let hab = line(20.0, 0.1);
    let xi = Direction::positive_x();
    let base = Field::from_fn(hab, |x| 1.0 / (1.0 + (2.0 * (x[0] - 1.234)).exp()));
    let p0 = kpplab::experiments::front_position(&base, &xi, 0.5);
    for k in [-30isize, -7, 12, 45] {
        let shifted = Field::from_fn(hab, |x| 1.0 / (1.0 + (2.0 * (x[0] - 1.234 - k as f64 * 0.1)).exp()));
        let p = kpplab::experiments::front_position(&shifted, &xi, 0.5);
        assert!((p - p0 - k as f64 * 0.1).abs() <= 1e-9, "shift {k}: {p} vs {p0}");
    }
    let mirrored = Field::from_fn(hab, |x| 1.0 / (1.0 + (2.0 * (-x[0] - 1.234)).exp()));
    let q = kpplab::experiments::front_position(&mirrored, &xi.reversed(), 0.5);
    assert!((q - p0).abs() <= 1e-9);
}
