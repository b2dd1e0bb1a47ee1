use serde::Serialize;

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Nearest-neighbour exchange rates `a_k`, one per unit offset, ordered
/// `+e1, -e1, +e2, -e2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeWeights<T> {
    dim: usize,
    rates: Vec<T>,
}

impl<T: Scalar> LatticeWeights<T> {
    pub fn new(dim: usize, rates: Vec<T>) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(invalid("lattice.dim", "dimension must be 1 or 2"));
        }
        if rates.len() != 2 * dim {
            return Err(invalid(
                "lattice.rates",
                format!("expected {} rates, got {}", 2 * dim, rates.len()),
            ));
        }
        if rates.iter().any(|&a| !(a > T::zero()) || !a.is_finite()) {
            return Err(invalid("lattice.rates", "every a_k must be positive and finite"));
        }
        Ok(Self { dim, rates })
    }

    pub fn uniform(dim: usize, a: T) -> Result<Self> {
        Self::new(dim, vec![a; 2 * dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rates(&self) -> &[T] {
        &self.rates
    }

    /// `(axis, step, a_k)` for every unit offset `k`.
    pub fn offsets(&self) -> impl Iterator<Item = (usize, isize, T)> + '_ {
        self.rates.iter().enumerate().map(|(n, &a)| {
            let step = if n % 2 == 0 { 1 } else { -1 };
            (n / 2, step, a)
        })
    }

    pub fn total_rate(&self) -> T {
        self.rates.iter().copied().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_are_unit_vectors() {
        let w = LatticeWeights::new(2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let o: Vec<_> = w.offsets().collect();
        assert_eq!(o, vec![(0, 1, 1.0), (0, -1, 2.0), (1, 1, 3.0), (1, -1, 4.0)]);
        assert!(LatticeWeights::new(1, vec![1.0, 0.0]).is_err());
        assert!(LatticeWeights::new(1, vec![1.0]).is_err());
    }
}
