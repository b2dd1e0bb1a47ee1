use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Whether the habitat stands in for a continuum or for the integer lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HabitatKind {
    Continuum,
    Lattice,
}

/// How stencils and kernels treat points beyond the truncation box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// Ghost points copy the nearest in-domain value; kernel rows are renormalized
    /// over in-domain offsets.
    ClampToConstant,
    /// Indices wrap around the box.
    PeriodicExtension,
}

/// Point coordinates; the second entry is zero in 1-D.
pub type Point<T> = [T; 2];

/// A unit direction in the habitat's dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Direction<T>(Point<T>);

impl<T: Scalar> Direction<T> {
    /// Normalizes `v`; the zero vector is rejected.
    pub fn new(v: Point<T>) -> Result<Self> {
        let norm = (v[0] * v[0] + v[1] * v[1]).sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(crate::error::invalid("direction", "must be a finite nonzero vector"));
        }
        Ok(Self([v[0] / norm, v[1] / norm]))
    }

    pub fn positive_x() -> Self {
        Self([T::one(), T::zero()])
    }

    pub fn negative_x() -> Self {
        Self([-T::one(), T::zero()])
    }

    /// `(cos θ, sin θ)`.
    pub fn from_angle(theta: T) -> Self {
        Self([theta.cos(), theta.sin()])
    }

    /// `count` directions spaced uniformly on the circle, starting at angle 0.
    pub fn circle_sample(count: usize) -> Vec<Self> {
        let two_pi = T::lit(std::f64::consts::TAU);
        (0..count)
            .map(|k| Self::from_angle(two_pi * T::from_usize_lossy(k) / T::from_usize_lossy(count)))
            .collect()
    }

    /// Directions to sample on the unit sphere of dimension `dim`: both signs
    /// in 1-D, `count` angles in 2-D.
    pub fn sphere_sample(dim: usize, count: usize) -> Vec<Self> {
        if dim == 1 {
            vec![Self::positive_x(), Self::negative_x()]
        } else {
            Self::circle_sample(count)
        }
    }

    pub fn components(&self) -> Point<T> {
        self.0
    }

    pub fn dot(&self, x: &Point<T>) -> T {
        self.0[0] * x[0] + self.0[1] * x[1]
    }

    pub fn reversed(&self) -> Self {
        Self([-self.0[0], -self.0[1]])
    }

    /// True when the direction lies along the first axis (the only admissible
    /// directions in 1-D).
    pub fn is_axis_aligned_1d(&self) -> bool {
        self.0[1] == T::zero()
    }
}

/// Truncated, discretized stand-in for `R^N` or `Z^N`: the box `[-L, L]^dim`
/// sampled at spacing `h` (`h = 1` on the lattice).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Habitat<T> {
    kind: HabitatKind,
    dim: usize,
    half_extent: T,
    spacing: T,
    boundary: Boundary,
    per_axis: usize,
}

impl<T: Scalar> Habitat<T> {
    pub fn continuum(dim: usize, half_extent: T, spacing: T, boundary: Boundary) -> Result<Self> {
        if !(spacing > T::zero()) || !spacing.is_finite() {
            return Err(Error::InvalidHabitat(format!("spacing must be positive, got {spacing}")));
        }
        if !(half_extent > T::zero()) || !half_extent.is_finite() {
            return Err(Error::InvalidHabitat(format!(
                "half extent must be positive, got {half_extent}"
            )));
        }
        let ratio = half_extent / spacing;
        let intervals = ratio.round();
        if (ratio - intervals).abs() > T::lit(1e-9) * ratio.max(T::one()) {
            return Err(Error::InvalidHabitat(format!(
                "L/h = {ratio} is not an integer"
            )));
        }
        let half = intervals
            .to_usize()
            .ok_or_else(|| Error::InvalidHabitat("L/h out of range".into()))?;
        Self::build(HabitatKind::Continuum, dim, half_extent, spacing, boundary, half)
    }

    pub fn lattice(dim: usize, half_extent: usize, boundary: Boundary) -> Result<Self> {
        Self::build(
            HabitatKind::Lattice,
            dim,
            T::from_usize_lossy(half_extent),
            T::one(),
            boundary,
            half_extent,
        )
    }

    fn build(
        kind: HabitatKind,
        dim: usize,
        half_extent: T,
        spacing: T,
        boundary: Boundary,
        half: usize,
    ) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidHabitat(format!("dimension must be 1 or 2, got {dim}")));
        }
        let per_axis = 2 * half + 1;
        if per_axis < 3 {
            return Err(Error::InvalidHabitat("need at least 3 points per axis".into()));
        }
        Ok(Self {
            kind,
            dim,
            half_extent,
            spacing,
            boundary,
            per_axis,
        })
    }

    pub fn kind(&self) -> HabitatKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_extent(&self) -> T {
        self.half_extent
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn points_per_axis(&self) -> usize {
        self.per_axis
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the origin along each axis.
    pub fn center_index(&self) -> usize {
        self.per_axis / 2
    }

    /// Per-axis integer indices of a flat index (axis 0 varies fastest).
    #[inline]
    pub fn axis_indices(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx % self.per_axis, idx / self.per_axis]
        }
    }

    #[inline]
    pub fn flat_index(&self, ij: [usize; 2]) -> usize {
        ij[0] + if self.dim == 2 { ij[1] * self.per_axis } else { 0 }
    }

    #[inline]
    pub fn axis_coord(&self, i: usize) -> T {
        (T::from_usize_lossy(i) - T::from_usize_lossy(self.center_index())) * self.spacing
    }

    /// Coordinates of a flat index.
    #[inline]
    pub fn coords(&self, idx: usize) -> Point<T> {
        let ij = self.axis_indices(idx);
        let x = self.axis_coord(ij[0]);
        let y = if self.dim == 2 {
            self.axis_coord(ij[1])
        } else {
            T::zero()
        };
        [x, y]
    }

    /// Flat index of the point reached by moving `step` grid cells along `axis`,
    /// honouring the boundary rule. `None` means the point is outside the box
    /// under clamping.
    #[inline]
    pub fn shifted(&self, idx: usize, axis: usize, step: isize) -> Option<usize> {
        let mut ij = self.axis_indices(idx);
        let n = self.per_axis as isize;
        let moved = ij[axis] as isize + step;
        let moved = match self.boundary {
            Boundary::ClampToConstant => {
                if moved < 0 || moved >= n {
                    return None;
                }
                moved
            }
            Boundary::PeriodicExtension => moved.rem_euclid(n),
        };
        ij[axis] = moved as usize;
        Some(self.flat_index(ij))
    }

    /// Flat index after moving by a multi-axis grid offset, honouring the
    /// boundary rule.
    #[inline]
    pub fn offset_index(&self, idx: usize, offset: [isize; 2]) -> Option<usize> {
        let mut ij = self.axis_indices(idx);
        let n = self.per_axis as isize;
        for axis in 0..self.dim {
            let moved = ij[axis] as isize + offset[axis];
            let moved = match self.boundary {
                Boundary::ClampToConstant => {
                    if moved < 0 || moved >= n {
                        return None;
                    }
                    moved
                }
                Boundary::PeriodicExtension => moved.rem_euclid(n),
            };
            ij[axis] = moved as usize;
        }
        Some(self.flat_index(ij))
    }

    /// Largest value of `x·ξ` over the box.
    pub fn extent_along(&self, xi: &Direction<T>) -> T {
        let c = xi.components();
        let mut s = c[0].abs();
        if self.dim == 2 {
            s += c[1].abs();
        }
        s * self.half_extent
    }

    /// Volume element `h^dim`.
    pub fn cell_volume(&self) -> T {
        self.spacing.powi(self.dim as i32)
    }

    /// Checks that `xi` is meaningful in this habitat (1-D admits only ±e1).
    pub fn check_direction(&self, xi: &Direction<T>) -> Result<()> {
        if self.dim == 1 && !xi.is_axis_aligned_1d() {
            return Err(crate::error::invalid("direction", "1-D habitats admit only ±1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn continuum_counts_and_coordinates() {
        let h = Habitat::continuum(1, 1.0, 0.25, Boundary::ClampToConstant).unwrap();
        assert_eq!(h.len(), 9);
        assert_eq!(h.coords(0)[0], -1.0);
        assert_eq!(h.coords(4)[0], 0.0);
        assert_eq!(h.coords(8)[0], 1.0);

        let h2 = Habitat::continuum(2, 1.0, 0.5, Boundary::ClampToConstant).unwrap();
        assert_eq!(h2.len(), 25);
        assert_eq!(h2.coords(h2.flat_index([4, 0])), [1.0, -1.0]);
    }

    #[test]
    fn rejects_non_integer_ratio_and_bad_dims() {
        assert!(Habitat::continuum(1, 1.0, 0.3, Boundary::ClampToConstant).is_err());
        assert!(Habitat::continuum(1, 1.0, 0.0, Boundary::ClampToConstant).is_err());
        assert!(Habitat::<f64>::lattice(3, 4, Boundary::ClampToConstant).is_err());
        assert!(Habitat::<f64>::lattice(1, 0, Boundary::ClampToConstant).is_err());
    }

    #[test]
    fn shifted_respects_boundary_rule() {
        let c = Habitat::<f64>::lattice(1, 2, Boundary::ClampToConstant).unwrap();
        assert_eq!(c.shifted(0, 0, -1), None);
        assert_eq!(c.shifted(0, 0, 1), Some(1));
        let p = c.with_boundary(Boundary::PeriodicExtension);
        assert_eq!(p.shifted(0, 0, -1), Some(4));
        assert_eq!(p.shifted(4, 0, 1), Some(0));
    }

    #[test]
    fn direction_normalizes() {
        let d = Direction::<f64>::new([3.0, 4.0]).unwrap();
        assert!((d.components()[0] - 0.6).abs() < 1e-15);
        assert!(Direction::<f64>::new([0.0, 0.0]).is_err());
        assert_eq!(Direction::<f64>::circle_sample(8).len(), 8);
    }
}
