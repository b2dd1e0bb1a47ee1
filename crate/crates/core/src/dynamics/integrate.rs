use serde::Serialize;

use crate::dispersal::DispersalOp;
use crate::domain::{Field, Habitat, Reaction};
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Explicit time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    ExplicitEuler,
    Rk4,
}

/// Relative safety margin in the diffusive step bound.
pub const DIFFUSIVE_SAFETY: f64 = 0.1;

/// Negative values below this threshold count as clips; smaller ones are
/// silently zeroed as rounding noise.
pub const CLIP_THRESHOLD: f64 = -1e-14;

/// Largest admissible time step for `op` with `reaction` on `habitat` when the
/// solution stays in `[0, m]`.
///
/// Random dispersal: `h² / (2·dim·(1 + safety))`. Bounded operators:
/// `0.25 / (mass + max|f| + 1)` where `mass` is the kernel mass (1) or the total
/// lattice rate.
pub fn stability_bound<T: Scalar>(
    op: &DispersalOp<T>,
    reaction: &Reaction<T>,
    habitat: &Habitat<T>,
    m: T,
) -> T {
    match op {
        DispersalOp::Random => {
            let h = habitat.spacing();
            h * h
                / (T::lit(2.0)
                    * T::from_usize_lossy(habitat.dim())
                    * (T::one() + T::lit(DIFFUSIVE_SAFETY)))
        }
        DispersalOp::Nonlocal(_) | DispersalOp::Discrete(_) => {
            let mass = match op {
                DispersalOp::Discrete(w) => w.total_rate(),
                _ => T::one(),
            };
            T::lit(0.25) / (mass + reaction.max_abs_on(habitat, m) + T::one())
        }
    }
}

/// Largest step `1/n` (integer `n`) not exceeding the stability bound, so that
/// unit-spaced records fall exactly on step boundaries.
pub fn unit_fraction_step<T: Scalar>(bound: T) -> T {
    let n = (T::one() / bound).ceil().max(T::one());
    T::one() / n
}

pub(crate) fn rhs_into<T: Scalar>(
    op: &DispersalOp<T>,
    habitat: &Habitat<T>,
    rates: &[T],
    crowding: T,
    u: &[T],
    out: &mut [T],
) {
    op.apply_into(habitat, None, u, out);
    for ((o, &v), &r) in out.iter_mut().zip(u).zip(rates) {
        *o += v * (r - crowding * v);
    }
}

/// Steps `u_t = D u + u f(x, u)` forward in time, one explicit step at a time.
pub struct Integrator<'a, T> {
    op: &'a DispersalOp<T>,
    habitat: Habitat<T>,
    rates: Vec<T>,
    crowding: T,
    dt: T,
    scheme: Scheme,
    steps: usize,
    clip_count: usize,
    u: Vec<T>,
    k: [Vec<T>; 4],
    stage: Vec<T>,
}

impl<'a, T: Scalar> Integrator<'a, T> {
    /// Validates the step against [`stability_bound`] for data bounded by
    /// `max(max u0, β0)`.
    pub fn new(
        op: &'a DispersalOp<T>,
        reaction: &Reaction<T>,
        u0: &Field<T>,
        dt: T,
        scheme: Scheme,
    ) -> Result<Self> {
        let habitat = *u0.habitat();
        op.check_habitat(&habitat)?;
        if !u0.is_nonnegative() {
            return Err(Error::Precondition("initial data must be nonnegative".into()));
        }
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(invalid("dt", "time step must be positive"));
        }
        let m = u0.max().max(reaction.beta0(&habitat));
        let bound = stability_bound(op, reaction, &habitat, m);
        if dt > bound * (T::one() + T::lit(1e-12)) {
            return Err(Error::UnstableTimeStep {
                dt: dt.to_f64_lossy(),
                bound: bound.to_f64_lossy(),
            });
        }
        let n = habitat.len();
        Ok(Self {
            op,
            habitat,
            rates: reaction.rate_field(&habitat),
            crowding: reaction.crowding(),
            dt,
            scheme,
            steps: 0,
            clip_count: 0,
            u: u0.values().to_vec(),
            k: [vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]],
            stage: vec![T::zero(); n],
        })
    }

    pub fn time(&self) -> T {
        T::from_usize_lossy(self.steps) * self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn clip_count(&self) -> usize {
        self.clip_count
    }

    pub fn state(&self) -> &[T] {
        &self.u
    }

    pub fn field(&self) -> Field<T> {
        Field::from_raw(self.habitat, self.u.clone())
    }

    /// Maximum norm of the right-hand side at the current state.
    pub fn rhs_norm(&mut self) -> T {
        rhs_into(self.op, &self.habitat, &self.rates, self.crowding, &self.u, &mut self.k[0]);
        self.k[0].iter().fold(T::zero(), |a, v| a.max(v.abs()))
    }

    pub fn step(&mut self) -> Result<()> {
        let (op, hab, rates, b, dt) = (self.op, &self.habitat, &self.rates[..], self.crowding, self.dt);
        let [k1, k2, k3, k4] = &mut self.k;
        let u = &mut self.u;
        let stage = &mut self.stage;
        match self.scheme {
            Scheme::ExplicitEuler => {
                rhs_into(op, hab, rates, b, u, k1);
                for (v, &d) in u.iter_mut().zip(k1.iter()) {
                    *v += dt * d;
                }
            }
            Scheme::Rk4 => {
                let half = T::lit(0.5) * dt;
                rhs_into(op, hab, rates, b, u, k1);
                for ((s, &v), &d) in stage.iter_mut().zip(u.iter()).zip(k1.iter()) {
                    *s = v + half * d;
                }
                rhs_into(op, hab, rates, b, stage, k2);
                for ((s, &v), &d) in stage.iter_mut().zip(u.iter()).zip(k2.iter()) {
                    *s = v + half * d;
                }
                rhs_into(op, hab, rates, b, stage, k3);
                for ((s, &v), &d) in stage.iter_mut().zip(u.iter()).zip(k3.iter()) {
                    *s = v + dt * d;
                }
                rhs_into(op, hab, rates, b, stage, k4);
                let sixth = dt / T::lit(6.0);
                let two = T::lit(2.0);
                for (i, v) in u.iter_mut().enumerate() {
                    *v += sixth * (k1[i] + two * (k2[i] + k3[i]) + k4[i]);
                }
            }
        }
        self.steps += 1;
        let clip = T::lit(CLIP_THRESHOLD);
        for v in self.u.iter_mut() {
            if !v.is_finite() {
                return Err(Error::Diverged {
                    time: (T::from_usize_lossy(self.steps) * self.dt).to_f64_lossy(),
                });
            }
            if *v < T::zero() {
                if *v < clip {
                    self.clip_count += 1;
                }
                *v = T::zero();
            }
        }
        Ok(())
    }
}

/// Horizon, step size and sampling of an evolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolveOptions<T> {
    pub t_final: T,
    pub dt: T,
    /// Record a snapshot every this many steps (and always the last one).
    pub record_every: usize,
    pub scheme: Scheme,
}

impl<T: Scalar> EvolveOptions<T> {
    pub fn rk4(t_final: T, dt: T, record_every: usize) -> Self {
        Self {
            t_final,
            dt,
            record_every,
            scheme: Scheme::Rk4,
        }
    }

    /// Picks the largest stable step of the form `1/n` and records once per
    /// time unit.
    pub fn unit_records(
        op: &DispersalOp<T>,
        reaction: &Reaction<T>,
        u0: &Field<T>,
        t_final: T,
    ) -> Self {
        let m = u0.max().max(reaction.beta0(u0.habitat()));
        let dt = unit_fraction_step(stability_bound(op, reaction, u0.habitat(), m));
        let per_unit = (T::one() / dt).round().to_usize().unwrap_or(1).max(1);
        Self::rk4(t_final, dt, per_unit)
    }
}

/// Time-step policy of an experiment: explicit values or the defaults of
/// [`EvolveOptions::unit_records`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stepping<T> {
    pub dt: Option<T>,
    pub record_every: Option<usize>,
    pub scheme: Scheme,
}

impl<T> Default for Stepping<T> {
    fn default() -> Self {
        Self {
            dt: None,
            record_every: None,
            scheme: Scheme::Rk4,
        }
    }
}

impl<T: Scalar> Stepping<T> {
    /// Options for integrating `u0` up to `t_final`. A missing `record_every`
    /// records once per time unit (or every step when `dt > 1`).
    pub fn options(
        &self,
        op: &DispersalOp<T>,
        reaction: &Reaction<T>,
        u0: &Field<T>,
        t_final: T,
    ) -> EvolveOptions<T> {
        let auto = EvolveOptions::unit_records(op, reaction, u0, t_final);
        let dt = self.dt.unwrap_or(auto.dt);
        let record_every = self
            .record_every
            .unwrap_or_else(|| (T::one() / dt).round().to_usize().unwrap_or(1).max(1));
        EvolveOptions {
            t_final,
            dt,
            record_every,
            scheme: self.scheme,
        }
    }
}

/// Recorded solution `u(t, ·; u0)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory<T> {
    pub habitat: Habitat<T>,
    pub times: Vec<T>,
    pub snapshots: Vec<Field<T>>,
    pub dt: T,
    pub scheme: Scheme,
    /// Number of values below [`CLIP_THRESHOLD`] that were reset to zero.
    pub clip_count: usize,
}

impl<T: Scalar> Trajectory<T> {
    pub fn initial(&self) -> &Field<T> {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &Field<T> {
        self.snapshots.last().expect("trajectory has at least one snapshot")
    }

    pub fn final_time(&self) -> T {
        *self.times.last().expect("trajectory has at least one time")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Integrates from `u0` up to (at least) `t_final`.
///
/// Every snapshot is nonnegative and bounded by `max(max u0, β0) + 1`; a breach
/// of that bound is reported as divergence.
pub fn evolve<T: Scalar>(
    op: &DispersalOp<T>,
    reaction: &Reaction<T>,
    u0: &Field<T>,
    opts: &EvolveOptions<T>,
) -> Result<Trajectory<T>> {
    if !(opts.t_final >= T::zero()) {
        return Err(invalid("t_final", "horizon must be nonnegative"));
    }
    if opts.record_every == 0 {
        return Err(invalid("record_every", "must be at least 1"));
    }
    let mut integ = Integrator::new(op, reaction, u0, opts.dt, opts.scheme)?;
    let bound = u0.max().max(reaction.beta0(u0.habitat())) + T::one();
    let total = (opts.t_final / opts.dt - T::lit(1e-9))
        .ceil()
        .max(T::zero())
        .to_usize()
        .ok_or_else(|| invalid("t_final", "too many steps"))?;

    let mut times = vec![T::zero()];
    let mut snapshots = vec![u0.clone()];
    for s in 1..=total {
        integ.step()?;
        if integ.state().iter().any(|&v| v > bound) {
            return Err(Error::Diverged {
                time: integ.time().to_f64_lossy(),
            });
        }
        if s % opts.record_every == 0 || s == total {
            times.push(integ.time());
            snapshots.push(integ.field());
        }
    }
    Ok(Trajectory {
        habitat: *u0.habitat(),
        times,
        snapshots,
        dt: opts.dt,
        scheme: opts.scheme,
        clip_count: integ.clip_count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{BaseGrowth, Boundary, Direction, Kernel, KernelProfile, LatticeWeights};

    fn line() -> Habitat<f64> {
        Habitat::continuum(1, 5.0, 0.25, Boundary::ClampToConstant).unwrap()
    }

    #[test]
    fn equilibrium_and_zero_are_invariant() {
        let r = Reaction::fisher();
        let hab = line();
        let opts = EvolveOptions::rk4(3.0, 0.02, 10);
        let one = evolve(&DispersalOp::Random, &r, &Field::constant(hab, 1.0), &opts).unwrap();
        for s in &one.snapshots {
            assert!(s.values().iter().all(|&v| (v - 1.0).abs() <= 1e-10));
        }
        let zero = evolve(&DispersalOp::Random, &r, &Field::zeros(hab), &opts).unwrap();
        for s in &zero.snapshots {
            assert!(s.values().iter().all(|&v| v == 0.0));
        }
        assert!(one.final_time() >= 3.0 - 1e-12);
    }

    #[test]
    fn scalar_logistic_matches_closed_form() {
        // u' = u(1 - u), u(0) = 0.1  =>  u(t) = 1 / (1 + 9 e^{-t}).
        let r = Reaction::fisher();
        let hab = line();
        let opts = EvolveOptions::rk4(1.0, 0.02, 50);
        let tr = evolve(&DispersalOp::Random, &r, &Field::constant(hab, 0.1), &opts).unwrap();
        let exact = 1.0 / (1.0 + 9.0 * (-1.0f64).exp());
        assert!((tr.final_time() - 1.0).abs() < 1e-12);
        for &v in tr.last().values() {
            assert!((v - exact).abs() < 1e-4);
        }
    }

    #[test]
    fn step_refinement_orders() {
        let r = Reaction::homogeneous(BaseGrowth::Logistic { r0: 1.0, capacity: 1.0 });
        let hab = line();
        let exact = 1.0 / (1.0 + 9.0 * (-1.0f64).exp());
        let err = |scheme, dt: f64| {
            let opts = EvolveOptions { t_final: 1.0, dt, record_every: 1000, scheme };
            let tr = evolve(&DispersalOp::Random, &r, &Field::constant(hab, 0.1), &opts).unwrap();
            (tr.last().values()[0] - exact).abs()
        };
        let (e1, e2) = (err(Scheme::ExplicitEuler, 0.02), err(Scheme::ExplicitEuler, 0.01));
        assert!(e2 <= 0.6 * e1 && e2 <= 0.1 * 0.01, "{e1} {e2}");
        let (r1, r2) = (err(Scheme::Rk4, 0.02), err(Scheme::Rk4, 0.01));
        assert!(r2 <= r1 / 12.0 && r2 <= 1.0 * 0.01f64.powi(4), "{r1} {r2}");
    }

    #[test]
    fn unstable_step_is_refused() {
        let r = Reaction::fisher();
        let u0 = Field::constant(line(), 0.5);
        let err = evolve(&DispersalOp::Random, &r, &u0, &EvolveOptions::rk4(1.0, 0.1, 1)).unwrap_err();
        match err {
            Error::UnstableTimeStep { bound, .. } => {
                assert!((bound - 0.0625 / 2.2).abs() < 1e-15)
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn negative_initial_data_is_refused() {
        let r = Reaction::fisher();
        let u0 = Field::constant(line(), -0.5);
        assert!(evolve(&DispersalOp::Random, &r, &u0, &EvolveOptions::rk4(1.0, 0.01, 1)).is_err());
    }

    #[test]
    fn positive_and_bounded_for_all_kinds() {
        let r = Reaction::new(BaseGrowth::Linear { r0: 1.0, b: 1.0 }, 0.5, 1.5).unwrap();
        let cont = line();
        let lat = Habitat::lattice(1, 20, Boundary::ClampToConstant).unwrap();
        let cases = [
            (DispersalOp::Random, cont),
            (DispersalOp::Nonlocal(Kernel::new(KernelProfile::Tent, 1.0, 1, 0.25).unwrap()), cont),
            (DispersalOp::Discrete(LatticeWeights::uniform(1, 1.0).unwrap()), lat),
        ];
        for (op, hab) in cases {
            let u0 = crate::domain::make_front_initial(&hab, &Direction::positive_x(), 1.0).unwrap();
            let opts = EvolveOptions::unit_records(&op, &r, &u0, 5.0);
            let tr = evolve(&op, &r, &u0, &opts).unwrap();
            assert_eq!(tr.clip_count, 0);
            let m = r.beta0(&hab);
            for s in &tr.snapshots {
                assert!(s.is_nonnegative());
                assert!(s.max() <= m + 1e-8);
            }
            assert_eq!(tr.times.len(), 6);
        }
    }

    #[test]
    fn works_in_single_precision() {
        let hab = Habitat::<f32>::continuum(1, 5.0, 0.25, Boundary::ClampToConstant).unwrap();
        let r = Reaction::<f32>::fisher();
        let u0 = Field::constant(hab, 0.1f32);
        let tr = evolve(&DispersalOp::Random, &r, &u0, &EvolveOptions::rk4(1.0, 0.02, 50)).unwrap();
        let exact = 1.0 / (1.0 + 9.0 * (-1.0f32).exp());
        assert!((tr.last().values()[3] - exact).abs() < 1e-4);
    }
}
