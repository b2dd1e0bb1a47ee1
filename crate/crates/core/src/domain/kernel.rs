use serde::Serialize;

use crate::domain::habitat::{Direction, Point};
use crate::domain::reaction::bump;
use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Radial shape of a dispersal kernel, as a function of `s = |z| / δ0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelProfile {
    /// Constant on the open ball.
    Uniform,
    /// `1 - s`.
    Tent,
    /// The smooth mollifier `exp(1 - 1/(1 - s^2))`.
    Bump,
}

impl KernelProfile {
    /// Unnormalized shape at `s = |z| / δ0`; zero for `s >= 1`.
    pub fn shape<T: Scalar>(self, s: T) -> T {
        if s >= T::one() {
            return T::zero();
        }
        match self {
            KernelProfile::Uniform => T::one(),
            KernelProfile::Tent => T::one() - s,
            KernelProfile::Bump => bump(s),
        }
    }
}

/// One quadrature node of a discretized kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelTap<T> {
    /// Grid offset in cells.
    pub offset: [isize; 2],
    /// Offset in space, `offset · h`.
    pub z: Point<T>,
    /// Quadrature mass `κ(z) h^N`, renormalized so all masses sum to 1.
    pub mass: T,
}

/// Compactly supported probability kernel sampled on a grid of spacing `h`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Kernel<T> {
    profile: KernelProfile,
    radius: T,
    dim: usize,
    spacing: T,
    taps: Vec<KernelTap<T>>,
}

impl<T: Scalar> Kernel<T> {
    /// Samples `profile` at every grid offset strictly inside the support and
    /// renormalizes the rectangle-rule masses to sum to one.
    pub fn new(profile: KernelProfile, radius: T, dim: usize, spacing: T) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(invalid("kernel.delta0", "support radius must be positive"));
        }
        if !(spacing > T::zero()) {
            return Err(invalid("kernel.spacing", "spacing must be positive"));
        }
        if !(1..=2).contains(&dim) {
            return Err(invalid("kernel.dim", "dimension must be 1 or 2"));
        }
        let reach = (radius / spacing)
            .ceil()
            .to_isize()
            .ok_or_else(|| invalid("kernel", "support too wide for spacing"))?;
        let vol = spacing.powi(dim as i32);
        let second = if dim == 2 { reach } else { 0 };
        let mut taps = Vec::new();
        for j in -second..=second {
            for i in -reach..=reach {
                let z = [
                    T::from_isize(i).unwrap() * spacing,
                    T::from_isize(j).unwrap() * spacing,
                ];
                let s = (z[0] * z[0] + z[1] * z[1]).sqrt() / radius;
                let k = profile.shape(s);
                if k > T::zero() {
                    taps.push(KernelTap {
                        offset: [i, j],
                        z,
                        mass: k * vol,
                    });
                }
            }
        }
        let total: T = taps.iter().map(|t| t.mass).sum();
        if !(total > T::zero()) {
            return Err(invalid("kernel", "no grid point inside the support"));
        }
        for t in &mut taps {
            t.mass /= total;
        }
        Ok(Self {
            profile,
            radius,
            dim,
            spacing,
            taps,
        })
    }

    pub fn profile(&self) -> KernelProfile {
        self.profile
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    pub fn taps(&self) -> &[KernelTap<T>] {
        &self.taps
    }

    /// Discrete density `κ(z_j) = mass_j / h^N` at each tap.
    pub fn densities(&self) -> Vec<T> {
        let vol = self.spacing.powi(self.dim as i32);
        self.taps.iter().map(|t| t.mass / vol).collect()
    }

    pub fn total_mass(&self) -> T {
        self.taps.iter().map(|t| t.mass).sum()
    }

    /// `Σ_j mass_j e^{-μ z_j·ξ}` on this kernel's own grid.
    pub fn grid_moment(&self, mu: T, xi: &Direction<T>) -> T {
        self.taps
            .iter()
            .map(|t| t.mass * (-mu * xi.dot(&t.z)).exp())
            .sum()
    }

    /// `∫ e^{-μ z·ξ} κ(z) dz` evaluated by the rectangle rule at a quarter of
    /// this kernel's spacing.
    pub fn moment(&self, mu: T, xi: &Direction<T>) -> T {
        let fine = Kernel::new(self.profile, self.radius, self.dim, self.spacing / T::lit(4.0))
            .expect("refined kernel inherits valid parameters");
        fine.grid_moment(mu, xi)
    }

    /// `∫_{z·ξ <= 0} κ(z) dz`, counting taps on the plane `z·ξ = 0` with weight 1/2.
    pub fn half_mass(&self, xi: &Direction<T>) -> T {
        let half = T::lit(0.5);
        self.taps
            .iter()
            .map(|t| {
                let p = xi.dot(&t.z);
                if p < T::zero() {
                    t.mass
                } else if p == T::zero() {
                    half * t.mass
                } else {
                    T::zero()
                }
            })
            .sum()
    }

    /// Same profile and radius sampled at another spacing.
    pub fn resampled(&self, spacing: T) -> Result<Self> {
        Kernel::new(self.profile, self.radius, self.dim, spacing)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masses_sum_to_one() {
        for profile in [KernelProfile::Uniform, KernelProfile::Tent, KernelProfile::Bump] {
            for (dim, h) in [(1, 0.1), (1, 0.03), (2, 0.2)] {
                let k = Kernel::<f64>::new(profile, 1.0, dim, h).unwrap();
                assert!((k.total_mass() - 1.0).abs() <= 1e-13, "{profile:?} {dim} {h}");
                assert!(k.taps().iter().all(|t| t.mass >= 0.0));
                assert!(k
                    .taps()
                    .iter()
                    .all(|t| (t.z[0] * t.z[0] + t.z[1] * t.z[1]).sqrt() < 1.0));
            }
        }
    }

    #[test]
    fn symmetric_kernel_has_half_mass() {
        let k = Kernel::<f64>::new(KernelProfile::Bump, 1.0, 2, 0.1).unwrap();
        for xi in Direction::circle_sample(16) {
            assert!((k.half_mass(&xi) - 0.5).abs() < 1e-2);
        }
        let k1 = Kernel::<f64>::new(KernelProfile::Uniform, 1.0, 1, 0.1).unwrap();
        assert!((k1.half_mass(&Direction::positive_x()) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn uniform_moment_approaches_sinh() {
        let k = Kernel::<f64>::new(KernelProfile::Uniform, 1.0, 1, 0.01).unwrap();
        let m = k.moment(1.0, &Direction::positive_x());
        assert!((m - 1f64.sinh()).abs() < 2e-3, "{m}");
    }
}
