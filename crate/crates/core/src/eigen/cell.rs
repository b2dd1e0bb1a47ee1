use serde::Serialize;

use crate::dispersal::DispersalOp;
use crate::domain::{Direction, Field, Habitat, HabitatKind, Point};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Minimum number of grid points per period on a continuum cell.
pub const MIN_POINTS_PER_PERIOD: usize = 8;

/// One period cell `Π_a [-p_a/2, p_a/2)` sampled at spacing `h`, with
/// wrap-around indexing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell<T> {
    kind: HabitatKind,
    dim: usize,
    spacing: T,
    counts: [usize; 2],
}

impl<T: Scalar> Cell<T> {
    /// Continuum cell with period `period` along every axis.
    pub fn continuum(dim: usize, period: T, spacing: T) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidCell(format!("dimension must be 1 or 2, got {dim}")));
        }
        if !(spacing > T::zero()) || !(period > T::zero()) {
            return Err(Error::InvalidCell("period and spacing must be positive".into()));
        }
        let ratio = period / spacing;
        let n = ratio.round();
        if (ratio - n).abs() > T::lit(1e-9) * ratio {
            return Err(Error::InvalidCell(format!(
                "period {period} is not a multiple of the spacing {spacing}"
            )));
        }
        let n = n.to_usize().unwrap_or(0);
        if n < MIN_POINTS_PER_PERIOD {
            return Err(Error::InvalidCell(format!(
                "resolution too coarse: {n} points per period (need {MIN_POINTS_PER_PERIOD})"
            )));
        }
        Ok(Self {
            kind: HabitatKind::Continuum,
            dim,
            spacing,
            counts: [n, if dim == 2 { n } else { 1 }],
        })
    }

    /// Lattice cell of integer period.
    pub fn lattice(dim: usize, period: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidCell(format!("dimension must be 1 or 2, got {dim}")));
        }
        if period == 0 {
            return Err(Error::InvalidCell("period must be positive".into()));
        }
        Ok(Self {
            kind: HabitatKind::Lattice,
            dim,
            spacing: T::one(),
            counts: [period, if dim == 2 { period } else { 1 }],
        })
    }

    /// Cell with the kind, dimension and spacing of `habitat`.
    pub fn matching(habitat: &Habitat<T>, period: T) -> Result<Self> {
        match habitat.kind() {
            HabitatKind::Continuum => Self::continuum(habitat.dim(), period, habitat.spacing()),
            HabitatKind::Lattice => {
                let p = period.round();
                if (p - period).abs() > T::lit(1e-9) {
                    return Err(Error::InvalidCell(format!("lattice period {period} is not an integer")));
                }
                Self::lattice(habitat.dim(), p.to_usize().unwrap_or(0))
            }
        }
    }

    pub fn kind(&self) -> HabitatKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    pub fn points_per_period(&self) -> usize {
        self.counts[0]
    }

    pub fn period(&self) -> T {
        T::from_usize_lossy(self.counts[0]) * self.spacing
    }

    pub fn len(&self) -> usize {
        self.counts[0] * self.counts[1]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    fn axis_indices(&self, idx: usize) -> [usize; 2] {
        [idx % self.counts[0], idx / self.counts[0]]
    }

    #[inline]
    fn flat(&self, ij: [usize; 2]) -> usize {
        ij[0] + self.counts[0] * ij[1]
    }

    pub fn coords(&self, idx: usize) -> Point<T> {
        let ij = self.axis_indices(idx);
        let mut x = [T::zero(); 2];
        for a in 0..self.dim {
            let shifted = ij[a] as isize - (self.counts[a] / 2) as isize;
            x[a] = T::from_isize(shifted).unwrap() * self.spacing;
        }
        x
    }

    /// Index after a grid offset, wrapping around the cell.
    #[inline]
    pub fn wrap(&self, idx: usize, offset: [isize; 2]) -> usize {
        let mut ij = self.axis_indices(idx);
        for a in 0..self.dim {
            let n = self.counts[a] as isize;
            ij[a] = (ij[a] as isize + offset[a]).rem_euclid(n) as usize;
        }
        self.flat(ij)
    }
}

/// Values on a periodic cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellField<T> {
    cell: Cell<T>,
    values: Vec<T>,
}

/// Spatially periodic coefficient `a(x)` sampled on one cell.
pub type PeriodicCoefficient<T> = CellField<T>;

impl<T: Scalar> CellField<T> {
    pub fn new(cell: Cell<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != cell.len() {
            return Err(Error::InvalidCell(format!(
                "{} samples for a cell of {} points",
                values.len(),
                cell.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidCell("samples must be finite".into()));
        }
        Ok(Self { cell, values })
    }

    pub fn constant(cell: Cell<T>, c: T) -> Self {
        Self {
            values: vec![c; cell.len()],
            cell,
        }
    }

    pub fn from_fn(cell: Cell<T>, mut f: impl FnMut(Point<T>) -> T) -> Self {
        Self {
            values: (0..cell.len()).map(|i| f(cell.coords(i))).collect(),
            cell,
        }
    }

    pub fn cell(&self) -> &Cell<T> {
        &self.cell
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Cell average `â`.
    pub fn average(&self) -> T {
        self.values.iter().copied().sum::<T>() / T::from_usize_lossy(self.values.len())
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn oscillation(&self) -> T {
        self.max() - self.min()
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Periodic extension onto `habitat`, aligning the cell center with the
    /// origin.
    pub fn extend_to(&self, habitat: &Habitat<T>) -> Result<Field<T>> {
        let c = &self.cell;
        if habitat.kind() != c.kind || habitat.dim() != c.dim {
            return Err(Error::HabitatMismatch("cell and habitat differ in kind or dimension".into()));
        }
        let h = habitat.spacing();
        if (h - c.spacing).abs() > T::lit(1e-12) * h {
            return Err(Error::HabitatMismatch("cell and habitat spacing differ".into()));
        }
        let center = habitat.center_index() as isize;
        let values = (0..habitat.len())
            .map(|idx| {
                let ij = habitat.axis_indices(idx);
                let mut cij = [0usize; 2];
                for a in 0..c.dim {
                    let n = c.counts[a] as isize;
                    cij[a] = (ij[a] as isize - center + (c.counts[a] / 2) as isize).rem_euclid(n) as usize;
                }
                self.values[c.flat(cij)]
            })
            .collect();
        Field::new(*habitat, values)
    }
}

/// Sparse twisted operator on a periodic cell, one row per cell point.
#[derive(Debug, Clone, PartialEq)]
pub struct CellOperator<T> {
    cell: Cell<T>,
    rows: Vec<Vec<(usize, T)>>,
    /// Positive shift making `A + s I` entrywise nonnegative for bounded kinds.
    shift: T,
    /// True for the differential (random) kind, whose entries scale like `h^-2`.
    differential: bool,
}

impl<T: Scalar> CellOperator<T> {
    pub fn cell(&self) -> &Cell<T> {
        &self.cell
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn shift(&self) -> T {
        self.shift
    }

    pub fn is_differential(&self) -> bool {
        self.differential
    }

    pub fn rows(&self) -> &[Vec<(usize, T)>] {
        &self.rows
    }

    pub fn apply_into(&self, x: &[T], out: &mut [T]) {
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o = row.iter().map(|&(j, a)| a * x[j]).sum();
        }
    }

    pub fn apply(&self, x: &CellField<T>) -> CellField<T> {
        let mut out = vec![T::zero(); x.values.len()];
        self.apply_into(&x.values, &mut out);
        CellField {
            cell: self.cell,
            values: out,
        }
    }

    /// Largest row sum; bounds the principal eigenvalue of a Metzler matrix.
    pub fn max_row_sum(&self) -> T {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(_, a)| a).sum::<T>())
            .fold(T::neg_infinity(), T::max)
    }

    pub fn to_dense(&self) -> Vec<T> {
        let n = self.rows.len();
        let mut m = vec![T::zero(); n * n];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, a) in row {
                m[i * n + j] += a;
            }
        }
        m
    }
}

fn push_entry<T: Scalar>(row: &mut Vec<(usize, T)>, col: usize, val: T) {
    if let Some(e) = row.iter_mut().find(|e| e.0 == col) {
        e.1 += val;
    } else {
        row.push((col, val));
    }
}

/// Assembles the twisted operator `L_{μ,ξ} + a(x)` on the periodic cell of `a`.
///
/// * random: `Δu - 2μ ξ·∇u + (a + μ²) u` with central differences;
/// * nonlocal: `Σ_j m_j e^{-μ z_j·ξ} u(x + z_j) - u + a u`, kernel wrapped
///   around the cell;
/// * discrete: `Σ_k a_k (e^{-μ k·ξ} u(j + k) - u(j)) + a u`.
pub fn assemble_cell_operator<T: Scalar>(
    op: &DispersalOp<T>,
    mu: T,
    xi: &Direction<T>,
    a: &PeriodicCoefficient<T>,
) -> Result<CellOperator<T>> {
    let cell = *a.cell();
    let xc = xi.components();
    if cell.dim == 1 && xc[1] != T::zero() {
        return Err(crate::error::invalid("direction", "1-D cells admit only ±1"));
    }
    if !mu.is_finite() {
        return Err(crate::error::invalid("mu", "must be finite"));
    }
    let n = cell.len();
    let mut rows: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
    let mu2 = mu * mu;
    let (mass, differential) = match op {
        DispersalOp::Random => {
            if cell.kind != HabitatKind::Continuum {
                return Err(Error::HabitatMismatch("random dispersal needs a continuum cell".into()));
            }
            let h = cell.spacing;
            let inv_h2 = T::one() / (h * h);
            for axis in 0..cell.dim {
                if mu.abs() * xc[axis].abs() * h > T::one() {
                    return Err(Error::InvalidCell(format!(
                        "resolution too coarse: h·|μ ξ| = {} exceeds 1",
                        mu.abs() * xc[axis].abs() * h
                    )));
                }
            }
            for (idx, row) in rows.iter_mut().enumerate() {
                let mut diag = a.values[idx] + mu2;
                for axis in 0..cell.dim {
                    let drift = mu * xc[axis] / h;
                    let mut off = [0isize; 2];
                    off[axis] = 1;
                    push_entry(row, cell.wrap(idx, off), inv_h2 - drift);
                    off[axis] = -1;
                    push_entry(row, cell.wrap(idx, off), inv_h2 + drift);
                    diag -= T::lit(2.0) * inv_h2;
                }
                push_entry(row, idx, diag);
            }
            (T::lit(2.0) * T::from_usize_lossy(cell.dim) * inv_h2, true)
        }
        DispersalOp::Nonlocal(kernel) => {
            if cell.kind != HabitatKind::Continuum || kernel.dim() != cell.dim {
                return Err(Error::HabitatMismatch("kernel and cell are incompatible".into()));
            }
            let h = cell.spacing;
            if (kernel.spacing() - h).abs() > T::lit(1e-12) * h {
                return Err(Error::HabitatMismatch("kernel spacing differs from cell spacing".into()));
            }
            if !(cell.period() > T::lit(2.0) * kernel.radius()) {
                return Err(Error::InvalidCell(format!(
                    "period {} must exceed twice the kernel radius {}",
                    cell.period(),
                    kernel.radius()
                )));
            }
            let weights: Vec<T> = kernel
                .taps()
                .iter()
                .map(|t| t.mass * (-mu * xi.dot(&t.z)).exp())
                .collect();
            for (idx, row) in rows.iter_mut().enumerate() {
                for (tap, &w) in kernel.taps().iter().zip(&weights) {
                    push_entry(row, cell.wrap(idx, tap.offset), w);
                }
                push_entry(row, idx, a.values[idx] - T::one());
            }
            (T::one(), false)
        }
        DispersalOp::Discrete(w) => {
            if cell.kind != HabitatKind::Lattice || w.dim() != cell.dim {
                return Err(Error::HabitatMismatch("lattice weights and cell are incompatible".into()));
            }
            for (idx, row) in rows.iter_mut().enumerate() {
                let mut diag = a.values[idx];
                for (axis, step, rate) in w.offsets() {
                    let mut off = [0isize; 2];
                    off[axis] = step;
                    let e = (-mu * T::from_isize(step).unwrap() * xc[axis]).exp();
                    push_entry(row, cell.wrap(idx, off), rate * e);
                    diag -= rate;
                }
                push_entry(row, idx, diag);
            }
            (w.total_rate(), false)
        }
    };
    let shift = T::one() + a.max_abs() + mu2 + mass;
    Ok(CellOperator {
        cell,
        rows,
        shift,
        differential,
    })
}
