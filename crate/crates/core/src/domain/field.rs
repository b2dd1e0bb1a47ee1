use serde::Serialize;

use crate::domain::habitat::{Habitat, Point};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Real values on every grid point of a habitat.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Field<T> {
    habitat: Habitat<T>,
    values: Vec<T>,
}

impl<T: Scalar> Field<T> {
    pub fn new(habitat: Habitat<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != habitat.len() {
            return Err(Error::InvalidHabitat(format!(
                "field has {} values but habitat has {} points",
                values.len(),
                habitat.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(crate::error::invalid(
                "field",
                format!("non-finite value at index {bad}"),
            ));
        }
        Ok(Self { habitat, values })
    }

    pub(crate) fn from_raw(habitat: Habitat<T>, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), habitat.len());
        Self { habitat, values }
    }

    pub fn constant(habitat: Habitat<T>, c: T) -> Self {
        Self {
            values: vec![c; habitat.len()],
            habitat,
        }
    }

    pub fn zeros(habitat: Habitat<T>) -> Self {
        Self::constant(habitat, T::zero())
    }

    pub fn from_fn(habitat: Habitat<T>, mut f: impl FnMut(Point<T>) -> T) -> Self {
        let values = (0..habitat.len()).map(|i| f(habitat.coords(i))).collect();
        Self { habitat, values }
    }

    pub fn habitat(&self) -> &Habitat<T> {
        &self.habitat
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= T::zero())
    }

    /// Membership in the strictly positive cone (`inf u > 0`).
    pub fn is_strictly_positive(&self) -> bool {
        self.min() > T::zero()
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            habitat: self.habitat,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, a: T) -> Self {
        self.map(|v| a * v)
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: T, other: &Self, b: T) -> Result<Self> {
        self.check_same_habitat(other)?;
        Ok(Self {
            habitat: self.habitat,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&u, &v)| a * u + b * v)
                .collect(),
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        self.check_same_habitat(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&u, &v)| (u - v).abs())
            .fold(T::zero(), T::max))
    }

    pub fn check_same_habitat(&self, other: &Self) -> Result<()> {
        if self.habitat != other.habitat {
            return Err(Error::MismatchedSampling);
        }
        Ok(())
    }

    /// Value at the grid point closest to the origin.
    pub fn at_origin(&self) -> T {
        let c = self.habitat.center_index();
        self.values[self.habitat.flat_index([c, c])]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::habitat::Boundary;

    #[test]
    fn rejects_wrong_length_and_nan() {
        let h = Habitat::continuum(1, 1.0, 0.5, Boundary::ClampToConstant).unwrap();
        assert!(Field::new(h, vec![0.0; 4]).is_err());
        assert!(Field::new(h, vec![0.0, 1.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(Field::new(h, vec![0.0; 5]).is_ok());
    }

    #[test]
    fn positivity_predicates() {
        let h = Habitat::<f64>::lattice(1, 2, Boundary::ClampToConstant).unwrap();
        let u = Field::from_fn(h, |x| x[0] * x[0]);
        assert!(u.is_nonnegative());
        assert!(!u.is_strictly_positive());
        assert!(u.map(|v| v + 0.1).is_strictly_positive());
        assert_eq!(u.at_origin(), 0.0);
    }
}
