//! Random, nonlocal and discrete dispersal operators on a truncated habitat,
//! plus their exponentially twisted counterparts.

use serde::Serialize;

use crate::domain::{Direction, Field, Habitat, HabitatKind, Kernel, LatticeWeights};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DispersalKind {
    Random,
    Nonlocal,
    Discrete,
}

impl DispersalKind {
    pub fn name(self) -> &'static str {
        match self {
            DispersalKind::Random => "random",
            DispersalKind::Nonlocal => "nonlocal",
            DispersalKind::Discrete => "discrete",
        }
    }
}

/// A dispersal operator together with its kind-specific payload.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum DispersalOp<T> {
    /// Second-order central-difference Laplacian.
    Random,
    /// `∫ κ(y - x) u(y) dy - u(x)` by the rectangle rule.
    Nonlocal(Kernel<T>),
    /// `Σ_k a_k (u(j + k) - u(j))` on the lattice.
    Discrete(LatticeWeights<T>),
}

/// Exponential twist `(μ, ξ)`.
pub type Twist<T> = (T, Direction<T>);

impl<T: Scalar> DispersalOp<T> {
    pub fn kind(&self) -> DispersalKind {
        match self {
            DispersalOp::Random => DispersalKind::Random,
            DispersalOp::Nonlocal(_) => DispersalKind::Nonlocal,
            DispersalOp::Discrete(_) => DispersalKind::Discrete,
        }
    }

    pub fn kernel(&self) -> Option<&Kernel<T>> {
        match self {
            DispersalOp::Nonlocal(k) => Some(k),
            _ => None,
        }
    }

    /// Support radius of the kernel, zero for local operators.
    pub fn reach(&self) -> T {
        self.kernel().map_or(T::zero(), |k| k.radius())
    }

    /// Checks that this operator can act on fields over `habitat`.
    pub fn check_habitat(&self, habitat: &Habitat<T>) -> Result<()> {
        match self {
            DispersalOp::Random => {
                if habitat.kind() != HabitatKind::Continuum {
                    return Err(Error::HabitatMismatch(
                        "random dispersal needs a continuum habitat".into(),
                    ));
                }
            }
            DispersalOp::Nonlocal(k) => {
                if habitat.kind() != HabitatKind::Continuum {
                    return Err(Error::HabitatMismatch(
                        "nonlocal dispersal needs a continuum habitat".into(),
                    ));
                }
                if k.dim() != habitat.dim() {
                    return Err(Error::HabitatMismatch(format!(
                        "kernel is {}-D but habitat is {}-D",
                        k.dim(),
                        habitat.dim()
                    )));
                }
                let h = habitat.spacing();
                if (k.spacing() - h).abs() > T::lit(1e-12) * h {
                    return Err(Error::HabitatMismatch(format!(
                        "kernel sampled at spacing {} but habitat spacing is {h}",
                        k.spacing()
                    )));
                }
            }
            DispersalOp::Discrete(w) => {
                if habitat.kind() != HabitatKind::Lattice {
                    return Err(Error::HabitatMismatch(
                        "discrete dispersal needs a lattice habitat".into(),
                    ));
                }
                if w.dim() != habitat.dim() {
                    return Err(Error::HabitatMismatch(format!(
                        "lattice weights are {}-D but habitat is {}-D",
                        w.dim(),
                        habitat.dim()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn apply(&self, u: &Field<T>) -> Result<Field<T>> {
        self.check_habitat(u.habitat())?;
        let mut out = vec![T::zero(); u.len()];
        self.apply_into(u.habitat(), None, u.values(), &mut out);
        Ok(Field::from_raw(*u.habitat(), out))
    }

    pub fn apply_twisted(&self, mu: T, xi: &Direction<T>, u: &Field<T>) -> Result<Field<T>> {
        self.check_habitat(u.habitat())?;
        u.habitat().check_direction(xi)?;
        if !mu.is_finite() {
            return Err(crate::error::invalid("mu", "must be finite"));
        }
        let mut out = vec![T::zero(); u.len()];
        self.apply_into(u.habitat(), Some((mu, *xi)), u.values(), &mut out);
        Ok(Field::from_raw(*u.habitat(), out))
    }

    /// Writes the (optionally twisted) operator applied to `u` into `out`.
    /// The habitat must already be validated with [`Self::check_habitat`].
    pub fn apply_into(&self, habitat: &Habitat<T>, twist: Option<Twist<T>>, u: &[T], out: &mut [T]) {
        match self {
            DispersalOp::Random => random_into(habitat, twist, u, out),
            DispersalOp::Nonlocal(k) => nonlocal_into(habitat, k, twist, u, out),
            DispersalOp::Discrete(w) => discrete_into(habitat, w, twist, u, out),
        }
    }
}

fn random_into<T: Scalar>(habitat: &Habitat<T>, twist: Option<Twist<T>>, u: &[T], out: &mut [T]) {
    let h = habitat.spacing();
    let inv_h2 = T::one() / (h * h);
    let (mu, drift) = match twist {
        Some((mu, xi)) => {
            let c = xi.components();
            // -2μ ξ_a / (2h) multiplies the central difference along axis a.
            (mu, [-mu * c[0] / h, -mu * c[1] / h])
        }
        None => (T::zero(), [T::zero(); 2]),
    };
    let mu2 = mu * mu;
    for (idx, o) in out.iter_mut().enumerate() {
        let c = u[idx];
        let mut lap = T::zero();
        let mut grad = T::zero();
        for (axis, &d) in drift.iter().enumerate().take(habitat.dim()) {
            let up = habitat.shifted(idx, axis, 1).map_or(c, |j| u[j]);
            let dn = habitat.shifted(idx, axis, -1).map_or(c, |j| u[j]);
            lap += (up - c) + (dn - c);
            grad += d * (up - dn);
        }
        let mut v = lap * inv_h2;
        if twist.is_some() {
            v += grad + mu2 * c;
        }
        *o = v;
    }
}

fn nonlocal_into<T: Scalar>(
    habitat: &Habitat<T>,
    kernel: &Kernel<T>,
    twist: Option<Twist<T>>,
    u: &[T],
    out: &mut [T],
) {
    let taps = kernel.taps();
    let factors: Vec<T> = match twist {
        Some((mu, xi)) => taps.iter().map(|t| (-mu * xi.dot(&t.z)).exp()).collect(),
        None => vec![T::one(); taps.len()],
    };
    for (idx, o) in out.iter_mut().enumerate() {
        let c = u[idx];
        let mut norm = T::zero();
        let mut acc = T::zero();
        for (tap, &e) in taps.iter().zip(&factors) {
            if let Some(j) = habitat.offset_index(idx, tap.offset) {
                norm += tap.mass;
                acc += tap.mass * (e * u[j] - c);
            }
        }
        *o = acc / norm;
    }
}

fn discrete_into<T: Scalar>(
    habitat: &Habitat<T>,
    weights: &LatticeWeights<T>,
    twist: Option<Twist<T>>,
    u: &[T],
    out: &mut [T],
) {
    let offsets: Vec<(usize, isize, T, T)> = weights
        .offsets()
        .map(|(axis, step, a)| {
            let e = match twist {
                Some((mu, xi)) => (-mu * T::from_isize(step).unwrap() * xi.components()[axis]).exp(),
                None => T::one(),
            };
            (axis, step, a, e)
        })
        .collect();
    for (idx, o) in out.iter_mut().enumerate() {
        let c = u[idx];
        let mut acc = T::zero();
        for &(axis, step, a, e) in &offsets {
            let v = habitat.shifted(idx, axis, step).map_or(c, |j| u[j]);
            acc += a * (e * v - c);
        }
        *o = acc;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Boundary, KernelProfile};

    fn line(h: f64) -> Habitat<f64> {
        Habitat::continuum(1, 4.0, h, Boundary::ClampToConstant).unwrap()
    }

    fn ops(dim: usize, h: f64) -> Vec<(DispersalOp<f64>, Habitat<f64>)> {
        let cont = Habitat::continuum(dim, 4.0, h, Boundary::ClampToConstant).unwrap();
        let lat = Habitat::lattice(dim, 6, Boundary::ClampToConstant).unwrap();
        vec![
            (DispersalOp::Random, cont),
            (
                DispersalOp::Nonlocal(Kernel::new(KernelProfile::Uniform, 1.0, dim, h).unwrap()),
                cont,
            ),
            (
                DispersalOp::Discrete(LatticeWeights::new(dim, (1..=2 * dim).map(|k| k as f64).collect()).unwrap()),
                lat,
            ),
        ]
    }

    #[test]
    fn constants_are_neutral() {
        for dim in [1, 2] {
            for (op, hab) in ops(dim, 0.25) {
                for boundary in [Boundary::ClampToConstant, Boundary::PeriodicExtension] {
                    let hab = hab.with_boundary(boundary);
                    let u = Field::constant(hab, 3.7);
                    let du = op.apply(&u).unwrap();
                    assert!(du.values().iter().all(|&v| v == 0.0), "{:?}", op.kind());
                }
            }
        }
    }

    #[test]
    fn laplacian_of_square_is_two() {
        let hab = line(0.1);
        let u = Field::from_fn(hab, |x| x[0] * x[0]);
        let du = DispersalOp::Random.apply(&u).unwrap();
        for i in 1..hab.len() - 1 {
            assert!((du.values()[i] - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn discrete_indicator() {
        for dim in [1usize, 2] {
            let hab = Habitat::<f64>::lattice(dim, 3, Boundary::ClampToConstant).unwrap();
            let c = hab.center_index();
            let origin = hab.flat_index([c, if dim == 2 { c } else { 0 }]);
            let mut v = vec![0.0; hab.len()];
            v[origin] = 1.0;
            let u = Field::new(hab, v).unwrap();
            let op = DispersalOp::Discrete(LatticeWeights::uniform(dim, 1.0).unwrap());
            let du = op.apply(&u).unwrap();
            assert_eq!(du.values()[origin], -2.0 * dim as f64);
            for axis in 0..dim {
                for step in [-1, 1] {
                    assert_eq!(du.values()[hab.shifted(origin, axis, step).unwrap()], 1.0);
                }
            }
            assert_eq!(du.values().iter().sum::<f64>(), 0.0);
        }
    }

    #[test]
    fn twist_at_zero_matches_plain() {
        for dim in [1, 2] {
            for (op, hab) in ops(dim, 0.25) {
                let u = Field::from_fn(hab, |x| (x[0] * 0.7).sin() + x[1].cos() + 2.0);
                let xi = Direction::from_angle(0.3);
                let xi = if dim == 1 { Direction::positive_x() } else { xi };
                let a = op.apply(&u).unwrap();
                let b = op.apply_twisted(0.0, &xi, &u).unwrap();
                assert!(a.max_abs_diff(&b).unwrap() <= 1e-14);
            }
        }
    }

    #[test]
    fn twisted_random_on_constant() {
        let hab = line(0.1);
        let u = Field::constant(hab, 1.0);
        let du = DispersalOp::Random
            .apply_twisted(0.5, &Direction::positive_x(), &u)
            .unwrap();
        assert!(du.values().iter().all(|&v| (v - 0.25).abs() < 1e-15));
    }

    #[test]
    fn twisted_discrete_on_constant() {
        let hab = Habitat::<f64>::lattice(1, 5, Boundary::PeriodicExtension).unwrap();
        let op = DispersalOp::Discrete(LatticeWeights::uniform(1, 1.0).unwrap());
        let du = op
            .apply_twisted(1.0, &Direction::positive_x(), &Field::constant(hab, 1.0))
            .unwrap();
        // e^{-1} + e^{1} - 2 evaluated term by term.
        let expected = ((-1.0f64).exp() - 1.0) + (1.0f64.exp() - 1.0);
        assert!((expected - 1.0861).abs() < 1e-4);
        assert!(du.values().iter().all(|&v| (v - expected).abs() < 1e-14));
    }

    #[test]
    fn twisted_nonlocal_on_constant_is_moment() {
        let hab = line(0.1).with_boundary(Boundary::PeriodicExtension);
        let k = Kernel::new(KernelProfile::Uniform, 1.0, 1, 0.1).unwrap();
        let xi = Direction::positive_x();
        let expected = k.grid_moment(0.8, &xi) - 1.0;
        let op = DispersalOp::Nonlocal(k);
        let du = op.apply_twisted(0.8, &xi, &Field::constant(hab, 1.0)).unwrap();
        assert!(du.values().iter().all(|&v| (v - expected).abs() < 1e-14));
    }

    #[test]
    fn mismatched_habitat_is_rejected() {
        let lat = Habitat::<f64>::lattice(1, 5, Boundary::ClampToConstant).unwrap();
        assert!(DispersalOp::Random.apply(&Field::zeros(lat)).is_err());
        let cont = line(0.1);
        let op = DispersalOp::Discrete(LatticeWeights::uniform(1, 1.0).unwrap());
        assert!(op.apply(&Field::zeros(cont)).is_err());
        let k = Kernel::new(KernelProfile::Uniform, 1.0, 1, 0.2).unwrap();
        assert!(DispersalOp::Nonlocal(k).apply(&Field::zeros(cont)).is_err());
    }
}
