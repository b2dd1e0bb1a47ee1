//! Turns a validated config into checks, a summary and CSV tables.

use kpplab_core::dynamics::{check_comparison, evolve};
use kpplab_core::eigen::{
    assemble_cell_operator, check_average_lower_bound, principal_eigen, Cell, CellField,
    PeriodicCoefficient, AVERAGE_BOUND_SLACK, EIGEN_MAX_ITER, EIGEN_TOL, MIN_POINTS_PER_PERIOD,
};
use kpplab_core::experiments::{
    run_amplitude_sweep, run_front, run_spreading_features, FeatureConfig, FrontRunConfig,
    SweepConfig, THEORY_TOL,
};
use kpplab_core::export::{csv, front_csv, profile_csv, trajectory_csv};
use kpplab_core::speeds::{
    log_grid, minimize_speed, speed_curve, speed_range, theoretical_speed, DispersionRelation,
    SPEED_TOL,
};
use kpplab_core::stationary::{
    check_stability, check_tail, periodic_minorant, solve_stationary, stationary_residual, Route,
    StationaryOptions,
};
use kpplab_core::experiments::DIRECTION_SAMPLES;
use kpplab_core::{check_kpp_hypotheses, Field, Habitat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::{CoefficientSource, ExperimentName, Expectation, RunConfig};
use crate::error::{CliError, EXIT_PASS, EXIT_VERDICT};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Everything an experiment produces before it is written to disk.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub experiment: ExperimentName,
    pub expect: Expectation,
    pub checks: Vec<Check>,
    pub results: Value,
    /// `(file name, CSV text)`.
    pub tables: Vec<(String, String)>,
}

impl Outcome {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn verdict(&self) -> &'static str {
        match (self.expect, self.all_pass()) {
            (Expectation::Pass, true) => "pass",
            (Expectation::Pass, false) => "fail",
            (Expectation::Fail, false) => "expected-fail: confirmed",
            (Expectation::Fail, true) => "expected-fail: not confirmed",
        }
    }

    pub fn exit_code(&self) -> u8 {
        if self.expect == Expectation::Pass && self.all_pass() {
            EXIT_PASS
        } else {
            EXIT_VERDICT
        }
    }

    pub fn summary(&self) -> Value {
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| json!({ "name": c.name, "passed": c.passed, "detail": c.detail }))
            .collect();
        json!({
            "experiment": self.experiment.name(),
            "verdict": self.verdict(),
            "checks": checks,
            "results": self.results,
        })
    }
}

fn to_json<S: serde::Serialize>(v: &S) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn optional(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a (empty region)".to_string(), |x| format!("{x:.3e}"))
}

fn t_final(cfg: &RunConfig) -> f64 {
    cfg.solver.t_final.expect("validated: evolving experiments carry T")
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (checks, results, tables) = match cfg.experiment.name {
        ExperimentName::FrontSpeed => front_speed(cfg)?,
        ExperimentName::AmplitudeSweep => amplitude_sweep(cfg)?,
        ExperimentName::SpreadingFeatures => spreading_features(cfg)?,
        ExperimentName::Stationary => stationary(cfg)?,
        ExperimentName::Comparison => comparison(cfg)?,
        ExperimentName::DispersionCurve => dispersion_curve(cfg)?,
        ExperimentName::Speed => speed(cfg)?,
    };
    Ok(Outcome {
        experiment: cfg.experiment.name,
        expect: cfg.experiment.expect,
        checks,
        results,
        tables,
    })
}

type Parts = (Vec<Check>, Value, Vec<(String, String)>);

fn front_speed(cfg: &RunConfig) -> Result<Parts, CliError> {
    let e = &cfg.experiment;
    let run = run_front(&FrontRunConfig {
        op: cfg.dispersal.clone(),
        reaction: cfg.reaction,
        habitat: cfg.habitat,
        direction: e.direction,
        t_final: t_final(cfg),
        level_fraction: e.level,
        burn_in: e.burn_in,
        stepping: cfg.solver.stepping,
    })?;
    let reference = e.control_scale * run.theory.c_star;
    let rel = (run.estimate.slope - reference).abs() / reference;
    let cone = run.cones(e.control_scale, e.margin)?;
    let checks = vec![
        Check::new(
            "front speed",
            rel <= THEORY_TOL,
            format!(
                "fitted {:.6} vs reference {:.6}, relative error {:.3e} (limit {THEORY_TOL})",
                run.estimate.slope, reference, rel
            ),
        ),
        Check::new(
            "spreading cones",
            cone.passes(),
            format!(
                "inside min {}, outside max {} at c = {:.6}",
                optional(cone.inside_min),
                optional(cone.outside_max),
                cone.c
            ),
        ),
    ];
    let results = json!({
        "u0_star": run.u0_star,
        "theory": to_json(&run.theory),
        "reference_speed": reference,
        "control_scale": e.control_scale,
        "estimate": to_json(&run.estimate),
        "relative_error": rel,
        "cone": to_json(&cone),
        "dt": run.trajectory.dt,
        "records": run.trajectory.len(),
        "clip_count": run.trajectory.clip_count,
    });
    let mut tables = vec![
        ("front.csv".to_string(), front_csv(&run.trace)),
        ("final_profile.csv".to_string(), profile_csv(run.trajectory.last())),
    ];
    if cfg.output.trajectory {
        tables.push(("trajectory.csv".to_string(), trajectory_csv(&run.trajectory)));
    }
    Ok((checks, results, tables))
}

fn amplitude_sweep(cfg: &RunConfig) -> Result<Parts, CliError> {
    let e = &cfg.experiment;
    let report = run_amplitude_sweep(&SweepConfig {
        op: cfg.dispersal.clone(),
        base: *cfg.reaction.base(),
        radius: cfg.reaction.radius(),
        amplitudes: e.amplitudes.clone(),
        habitat: cfg.habitat,
        direction: e.direction,
        t_final: t_final(cfg),
        level_fraction: e.level,
        burn_in: e.burn_in,
        margin: e.margin,
        stepping: cfg.solver.stepping,
    })?;
    let checks = vec![
        Check::new(
            "speed vs theory",
            report.theory_ok,
            format!("worst relative error {:.3e} (limit {THEORY_TOL})", report.max_theory_error),
        ),
        Check::new(
            "amplitude independence",
            report.pairwise_ok,
            format!("pairwise spread {:.3e}", report.pairwise_spread),
        ),
        Check::new("convergence behind the front", report.convergence_ok, ""),
        Check::new("spreading cones", report.cones_ok, ""),
        Check::new("scaled controls fail", report.controls_fail, "cones at 2c* and c*/2"),
    ];
    let rows: Vec<Value> = report
        .rows
        .iter()
        .map(|r| {
            json!({
                "amplitude": r.amplitude,
                "estimate": to_json(&r.estimate),
                "stationary_gap": r.stationary_gap,
                "cone": to_json(&r.cone),
                "doubled": to_json(&r.doubled),
                "halved": to_json(&r.halved),
            })
        })
        .collect();
    let results = json!({
        "kind": report.kind.name(),
        "u0_star": report.u0_star,
        "theory": to_json(&report.theory),
        "rows": rows,
        "max_theory_error": report.max_theory_error,
        "pairwise_spread": report.pairwise_spread,
    });
    let sweep = csv(
        &["amplitude", "slope", "relative_error", "stationary_gap"],
        report.rows.iter().map(|r| {
            vec![
                r.amplitude,
                r.estimate.slope,
                r.estimate.relative_error.unwrap_or(f64::NAN),
                r.stationary_gap,
            ]
        }),
    );
    let fronts = csv(
        &["amplitude", "t", "position"],
        report.rows.iter().flat_map(|r| {
            r.trace
                .times
                .iter()
                .zip(&r.trace.positions)
                .map(|(&t, &p)| vec![r.amplitude, t, p])
                .collect::<Vec<_>>()
        }),
    );
    Ok((
        checks,
        results,
        vec![("sweep.csv".into(), sweep), ("fronts.csv".into(), fronts)],
    ))
}

fn spreading_features(cfg: &RunConfig) -> Result<Parts, CliError> {
    let e = &cfg.experiment;
    let u0_star = check_kpp_hypotheses(&cfg.reaction, &cfg.habitat)?.u0_star;
    let run = run_spreading_features(&FeatureConfig {
        op: cfg.dispersal.clone(),
        reaction: cfg.reaction,
        habitat: cfg.habitat,
        direction: e.direction,
        radius: e.plateau_radius,
        sigma: e.plateau_height.unwrap_or(u0_star),
        t_final: t_final(cfg),
        margin: e.margin,
        stepping: cfg.solver.stepping,
    })?;
    let mut checks = Vec::new();
    let mut verdicts = Vec::new();
    for &clause in &e.clauses {
        let v = run.verdict(clause, e.margin, e.control_scale)?;
        checks.push(Check::new(
            format!("clause {}", clause.number()),
            v.passes,
            format!("worst {:.3e} vs threshold {:.3e} at c = {:.6}", v.worst, v.threshold, v.c),
        ));
        verdicts.push(v);
    }
    let results = json!({
        "u0_star": run.u0_star,
        "strip_speeds": [run.strip_speeds.0, run.strip_speeds.1],
        "ball_speeds": [run.ball_speeds.0, run.ball_speeds.1],
        "control_scale": e.control_scale,
        "clauses": to_json(&verdicts),
        "dt": run.trajectory.dt,
        "clip_count": run.trajectory.clip_count,
    });
    let clause_rows = csv(
        &["clause", "c", "worst", "threshold"],
        verdicts
            .iter()
            .map(|v| vec![v.clause.number() as f64, v.c, v.worst, v.threshold]),
    );
    let mut tables = vec![
        ("clauses.csv".to_string(), clause_rows),
        ("final_profile.csv".to_string(), profile_csv(run.trajectory.last())),
        ("stationary.csv".to_string(), profile_csv(&run.u_star)),
    ];
    if cfg.output.trajectory {
        tables.push(("trajectory.csv".to_string(), trajectory_csv(&run.trajectory)));
    }
    Ok((checks, results, tables))
}

/// Strictly positive perturbations of `u_star` drawn from `rng`: alternately
/// scaled down, scaled up, and raised by a tent of random centre and height.
fn perturbations(rng: &mut ChaCha8Rng, u_star: &Field<f64>, count: usize) -> Result<Vec<Field<f64>>, CliError> {
    let hab = *u_star.habitat();
    let l = hab.half_extent();
    (0..count)
        .map(|k| {
            Ok(match k % 3 {
                0 => u_star.scaled(rng.gen_range(0.3..0.8)),
                1 => u_star.scaled(rng.gen_range(1.5..3.0)),
                _ => {
                    let centre = rng.gen_range(-0.5 * l..0.5 * l);
                    let height = rng.gen_range(0.2..1.0);
                    let tent = Field::from_fn(hab, |x| height * (1.0 - (x[0] - centre).abs()).max(0.0));
                    u_star.combine(1.0, &tent, 1.0)?
                }
            })
        })
        .collect()
}

fn stationary(cfg: &RunConfig) -> Result<Parts, CliError> {
    let e = &cfg.experiment;
    let op = &cfg.dispersal;
    let report = check_kpp_hypotheses(&cfg.reaction, &cfg.habitat)?;
    let mut opts = StationaryOptions {
        dt: cfg.solver.stepping.dt,
        ..StationaryOptions::default()
    };
    if let Some(t) = cfg.solver.t_final {
        opts.t_max = t;
    }
    let above = solve_stationary(op, &cfg.reaction, &cfg.habitat, Route::FromAbove, &opts)?;
    let below = solve_stationary(op, &cfg.reaction, &cfg.habitat, Route::FromBelow, &opts)?;
    let agree = above.u_star.max_abs_diff(&below.u_star)?;
    let residual = stationary_residual(op, &cfg.reaction, &above.u_star)?
        .max(stationary_residual(op, &cfg.reaction, &below.u_star)?);
    let tail_radius = e
        .tail_radius
        .unwrap_or(4.0 * cfg.reaction.radius() + op.reach());
    let tail = check_tail(&above.u_star, report.u0_star, tail_radius, op.reach())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let perturbed = perturbations(&mut rng, &above.u_star, e.perturbations)?;
    let mut checks = vec![
        Check::new(
            "routes agree",
            agree <= e.agreement_tol,
            format!("max difference {agree:.3e} (limit {:.1e})", e.agreement_tol),
        ),
        Check::new(
            "residual",
            residual <= opts.residual_tol,
            format!("{residual:.3e} (limit {:.1e})", opts.residual_tol),
        ),
        Check::new(
            "monotone evolution",
            above.is_monotone() && below.is_monotone(),
            format!(
                "violations {:.3e} from above, {:.3e} from below",
                above.monotone_violation, below.monotone_violation
            ),
        ),
        Check::new(
            "tail",
            tail <= e.tail_tol,
            format!("sup |u* - u0| beyond R = {tail_radius} is {tail:.3e} (limit {})", e.tail_tol),
        ),
    ];
    let mut stability = Value::Null;
    if !perturbed.is_empty() {
        let stab = check_stability(op, &cfg.reaction, &above.u_star, &perturbed, e.horizon)?;
        let worst = stab.distances.iter().copied().fold(0.0, f64::max);
        checks.push(Check::new(
            "stability",
            stab.passes,
            format!("{} perturbations, worst distance {worst:.3e} at t = {}", perturbed.len(), e.horizon),
        ));
        stability = to_json(&stab);
    }
    let results = json!({
        "u0_star": report.u0_star,
        "beta0": report.beta0,
        "u_star_at_origin": above.u_star.at_origin(),
        "route_difference": agree,
        "residual": residual,
        "time_from_above": above.time,
        "time_from_below": below.time,
        "tail_radius": tail_radius,
        "tail": tail,
        "stability": stability,
        "seed": cfg.seed,
    });
    let hab = cfg.habitat;
    let mut header = if hab.dim() == 2 { vec!["x", "y"] } else { vec!["x"] };
    header.extend(["from_above", "from_below"]);
    let table = csv(
        &header,
        (0..hab.len()).map(|i| {
            let x = hab.coords(i);
            let mut row = x[..hab.dim()].to_vec();
            row.extend([above.u_star.values()[i], below.u_star.values()[i]]);
            row
        }),
    );
    Ok((checks, results, vec![("stationary.csv".into(), table)]))
}

/// Sum of four random tents along the first axis above `floor`.
fn random_profile(rng: &mut ChaCha8Rng, habitat: &Habitat<f64>, floor: f64) -> Field<f64> {
    let l = habitat.half_extent();
    let tents: Vec<(f64, f64, f64)> = (0..4)
        .map(|_| (rng.gen_range(-0.6 * l..0.6 * l), rng.gen_range(1.0..4.0), rng.gen_range(0.1..1.2)))
        .collect();
    Field::from_fn(*habitat, |x| {
        floor
            + tents
                .iter()
                .map(|&(c, w, a)| a * (1.0 - ((x[0] - c) / w).abs()).max(0.0))
                .sum::<f64>()
    })
}

fn comparison(cfg: &RunConfig) -> Result<Parts, CliError> {
    let op = &cfg.dispersal;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::new();
    let mut all_hold = true;
    let mut all_strict = true;
    let mut worst = 0.0f64;
    for k in 0..cfg.experiment.pairs {
        let u0 = random_profile(&mut rng, &cfg.habitat, 0.0);
        let extra = random_profile(&mut rng, &cfg.habitat, 0.01);
        let v0 = u0.combine(1.0, &extra, 1.0)?;
        let opts = cfg.solver.stepping.options(op, &cfg.reaction, &v0, t_final(cfg));
        let a = evolve(op, &cfg.reaction, &u0, &opts)?;
        let b = evolve(op, &cfg.reaction, &v0, &opts)?;
        let rep = check_comparison(&a, &b)?;
        all_hold &= rep.passes;
        all_strict &= rep.strict_gap.is_some_and(|g| g > 0.0);
        worst = worst.max(rep.violation);
        rows.push(vec![k as f64, rep.violation, rep.strict_gap.unwrap_or(f64::NAN)]);
    }
    let checks = vec![
        Check::new(
            "order preserved",
            all_hold,
            format!("{} pairs, worst violation {worst:.3e}", cfg.experiment.pairs),
        ),
        Check::new("strict order at the origin", all_strict, "gap after t = 1"),
    ];
    let results = json!({
        "pairs": cfg.experiment.pairs,
        "worst_violation": worst,
        "seed": cfg.seed,
    });
    let table = csv(&["pair", "violation", "strict_gap"], rows);
    Ok((checks, results, vec![("pairs.csv".into(), table)]))
}

fn cell_coefficient(cfg: &RunConfig) -> Result<(PeriodicCoefficient<f64>, Value), CliError> {
    match cfg.experiment.coefficient {
        CoefficientSource::Constant => {
            let h = cfg.habitat.spacing();
            let points = MIN_POINTS_PER_PERIOD.max((2.0 * cfg.dispersal.reach() / h).floor() as usize + 2);
            let period = points as f64 * h;
            let cell = Cell::matching(&cfg.habitat, period)?;
            let a = CellField::constant(cell, cfg.reaction.base_rate());
            Ok((a, json!({ "source": "constant", "period": period })))
        }
        CoefficientSource::Minorant => {
            let m = periodic_minorant(&cfg.reaction, cfg.experiment.minorant_eps, &cfg.habitat)?;
            let info = json!({
                "source": "minorant",
                "period": m.period,
                "floor": m.floor,
                "eps": cfg.experiment.minorant_eps,
            });
            Ok((m.coefficient, info))
        }
    }
}

fn dispersion_curve(cfg: &RunConfig) -> Result<Parts, CliError> {
    let e = &cfg.experiment;
    let op = &cfg.dispersal;
    let xi = e.direction;
    let (a, info) = cell_coefficient(cfg)?;
    let mut rows = Vec::new();
    let mut holds = true;
    let mut worst_gap = f64::INFINITY;
    for mu in log_grid(e.mu_min, e.mu_max, e.mu_points) {
        let rep = check_average_lower_bound(op, mu, &xi, &a, EIGEN_TOL, EIGEN_MAX_ITER)?;
        holds &= rep.holds;
        worst_gap = worst_gap.min(rep.lambda - rep.lambda_average);
        rows.push(vec![mu, rep.lambda, rep.lambda / mu, rep.lambda_average]);
    }
    let lambda0 = principal_eigen(&assemble_cell_operator(op, 0.0, &xi, &a)?, EIGEN_TOL, EIGEN_MAX_ITER)?;
    let rel = DispersionRelation::eigen_backed(op, xi, a.clone(), EIGEN_TOL, EIGEN_MAX_ITER);
    let speed = minimize_speed(&rel, SPEED_TOL)?;
    let checks = vec![Check::new(
        "average lower bound",
        holds,
        format!("min lambda - lambda(average) = {worst_gap:.3e} (slack {AVERAGE_BOUND_SLACK:.0e})"),
    )];
    let results = json!({
        "coefficient": info,
        "average": a.average(),
        "lambda_at_zero": lambda0.lambda,
        "speed": to_json(&speed),
        "worst_gap": worst_gap,
    });
    let table = csv(&["mu", "lambda", "ratio", "lambda_average"], rows);
    Ok((checks, results, vec![("curve.csv".into(), table)]))
}

fn speed(cfg: &RunConfig) -> Result<Parts, CliError> {
    let e = &cfg.experiment;
    let op = &cfg.dispersal;
    let result = theoretical_speed(op, &cfg.reaction, &e.direction)?;
    let (lo, hi) = speed_range(op, &cfg.reaction, cfg.habitat.dim(), DIRECTION_SAMPLES)?;
    let rel = DispersionRelation::closed_form(op, e.direction, cfg.reaction.base_rate());
    let curve = speed_curve(&rel, &log_grid(e.mu_min, e.mu_max, e.mu_points))?;
    let checks = vec![Check::new(
        "speed",
        result.c_star.is_finite() && result.c_star > 0.0,
        format!("c* = {:.10} at mu* = {:.6}", result.c_star, result.mu_star),
    )];
    let results = json!({
        "kind": op.kind().name(),
        "direction": e.direction.components(),
        "r": cfg.reaction.base_rate(),
        "speed": to_json(&result),
        "direction_range": [lo, hi],
    });
    Ok((checks, results, vec![("curve.csv".into(), kpplab_core::export::curve_csv(&curve))]))
}
