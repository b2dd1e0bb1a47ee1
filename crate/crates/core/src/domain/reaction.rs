use serde::Serialize;

use crate::domain::habitat::{Habitat, Point};
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Homogeneous growth law `f0(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "family")]
pub enum BaseGrowth<T> {
    /// `f0(u) = r0 - b u`.
    Linear { r0: T, b: T },
    /// `f0(u) = r0 (1 - u / K)`.
    Logistic { r0: T, capacity: T },
}

impl<T: Scalar> BaseGrowth<T> {
    pub fn rate_at_zero(&self) -> T {
        match *self {
            BaseGrowth::Linear { r0, .. } | BaseGrowth::Logistic { r0, .. } => r0,
        }
    }

    /// Crowding coefficient `b` in `f0(u) = r0 - b u`.
    pub fn crowding(&self) -> T {
        match *self {
            BaseGrowth::Linear { b, .. } => b,
            BaseGrowth::Logistic { r0, capacity } => r0 / capacity,
        }
    }

    pub fn eval(&self, u: T) -> T {
        self.rate_at_zero() - self.crowding() * u
    }
}

/// Smooth compactly supported mollifier `exp(1 - 1/(1 - s^2))` for `s < 1`, zero
/// otherwise; equals 1 at the origin.
pub fn bump<T: Scalar>(s: T) -> T {
    let s2 = s * s;
    if s2 >= T::one() {
        T::zero()
    } else {
        (T::one() - T::one() / (T::one() - s2)).exp()
    }
}

/// Growth rate `f(x, u) = f0(u) + A · bump(|x| / L0)`.
///
/// The perturbation vanishes identically for `|x| >= L0`, so the reaction is
/// exactly homogeneous outside the ball of radius `L0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Reaction<T> {
    base: BaseGrowth<T>,
    amplitude: T,
    radius: T,
}

impl<T: Scalar> Reaction<T> {
    pub fn new(base: BaseGrowth<T>, amplitude: T, radius: T) -> Result<Self> {
        let finite = [base.rate_at_zero(), base.crowding(), amplitude, radius]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(invalid("reaction", "all parameters must be finite"));
        }
        if !(radius > T::zero()) {
            return Err(invalid("reaction.L0", "perturbation radius must be positive"));
        }
        Ok(Self {
            base,
            amplitude,
            radius,
        })
    }

    /// `f(x,u) = r0 - b u` with no perturbation.
    pub fn homogeneous(base: BaseGrowth<T>) -> Self {
        Self {
            base,
            amplitude: T::zero(),
            radius: T::one(),
        }
    }

    /// Fisher growth `f(u) = 1 - u`.
    pub fn fisher() -> Self {
        Self::homogeneous(BaseGrowth::Linear {
            r0: T::one(),
            b: T::one(),
        })
    }

    pub fn with_amplitude(mut self, amplitude: T) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn base(&self) -> &BaseGrowth<T> {
        &self.base
    }

    pub fn amplitude(&self) -> T {
        self.amplitude
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    /// `f0(0)`, the linearized growth rate of the limit equation.
    pub fn base_rate(&self) -> T {
        self.base.rate_at_zero()
    }

    pub fn crowding(&self) -> T {
        self.base.crowding()
    }

    pub fn perturbation(&self, x: &Point<T>) -> T {
        if self.amplitude == T::zero() {
            return T::zero();
        }
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        self.amplitude * bump(r / self.radius)
    }

    /// `f(x, 0)`.
    pub fn rate_at(&self, x: &Point<T>) -> T {
        self.base_rate() + self.perturbation(x)
    }

    pub fn eval(&self, x: &Point<T>, u: T) -> T {
        self.base.eval(u) + self.perturbation(x)
    }

    /// `f(x, 0)` sampled on every point of `habitat`.
    pub fn rate_field(&self, habitat: &Habitat<T>) -> Vec<T> {
        (0..habitat.len())
            .map(|i| self.rate_at(&habitat.coords(i)))
            .collect()
    }

    /// `max |f(x,u)|` over the habitat for `u ∈ [0, m]`; exact because `f` is
    /// affine in `u`.
    pub fn max_abs_on(&self, habitat: &Habitat<T>, m: T) -> T {
        let b = self.crowding();
        self.rate_field(habitat)
            .into_iter()
            .map(|r| r.abs().max((r - b * m).abs()))
            .fold(T::zero(), T::max)
    }

    /// Smallest level `β0` used by the hypothesis checker: twice the largest
    /// linear growth rate divided by the crowding coefficient, so that
    /// `f(x, β0) <= -max f(x, 0) < 0`.
    pub fn beta0(&self, habitat: &Habitat<T>) -> T {
        let rmax = self
            .rate_field(habitat)
            .into_iter()
            .fold(self.base_rate(), T::max);
        let b = self.crowding();
        if rmax > T::zero() && b > T::zero() {
            T::lit(2.0) * rmax / b
        } else {
            T::one()
        }
    }

    /// Positive root `u0` of `f0`.
    pub fn equilibrium(&self, beta0: T) -> Result<T> {
        let f0 = |u: T| self.base.eval(u);
        let (mut lo, mut hi) = (T::zero(), beta0);
        if !(f0(lo) > T::zero() && f0(hi) < T::zero()) {
            return Err(Error::NoPositiveEquilibrium {
                beta0: beta0.to_f64_lossy(),
            });
        }
        let tol = T::lit(1e-12);
        for _ in 0..200 {
            if hi - lo <= tol {
                break;
            }
            let mid = T::lit(0.5) * (lo + hi);
            if f0(mid) > T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(T::lit(0.5) * (lo + hi))
    }
}

/// Outcome of the sample-based KPP hypothesis check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KppReport<T> {
    /// `∂_u f < 0` and `f(·, β0) < 0` on the sample grid.
    pub h1_ok: bool,
    /// `f(x, u) = f0(u)` exactly for every sampled `|x| >= L0`.
    pub h2_ok: bool,
    pub beta0: T,
    pub u0_star: T,
}

/// Sample step in `u` for the hypothesis checker.
pub const HYPOTHESIS_U_STEP: f64 = 1e-2;

/// Checks the monostable hypotheses on the habitat grid crossed with
/// `u ∈ [0, 2β0]` at steps of [`HYPOTHESIS_U_STEP`].
pub fn check_kpp_hypotheses<T: Scalar>(
    reaction: &Reaction<T>,
    habitat: &Habitat<T>,
) -> Result<KppReport<T>> {
    let beta0 = reaction.beta0(habitat);
    let u0_star = reaction.equilibrium(beta0)?;

    let step = T::lit(HYPOTHESIS_U_STEP);
    let samples = (T::lit(2.0) * beta0 / step).ceil().to_usize().unwrap_or(0);
    let mut h1_ok = reaction.base_rate() > T::zero();
    let mut h2_ok = true;
    for idx in 0..habitat.len() {
        let x = habitat.coords(idx);
        let outside = (x[0] * x[0] + x[1] * x[1]).sqrt() >= reaction.radius();
        if reaction.eval(&x, beta0) >= T::zero() {
            h1_ok = false;
        }
        let mut prev = reaction.eval(&x, T::zero());
        for k in 0..=samples {
            let u = T::from_usize_lossy(k) * step;
            let f = reaction.eval(&x, u);
            if k > 0 && f >= prev {
                h1_ok = false;
            }
            prev = f;
            if outside && f != reaction.base().eval(u) {
                h2_ok = false;
            }
        }
    }
    Ok(KppReport {
        h1_ok,
        h2_ok,
        beta0,
        u0_star,
    })
}
