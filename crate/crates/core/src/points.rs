//! Flat row-major point storage and region tags.

use crate::scalar::Scalar;

/// A set of points stored contiguously, one row per point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet<F> {
    dim: usize,
    data: Vec<F>,
}

impl<F: Scalar> PointSet<F> {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "points need at least one coordinate");
        Self { dim, data: Vec::new() }
    }

    pub fn with_capacity(dim: usize, n: usize) -> Self {
        assert!(dim > 0);
        Self { dim, data: Vec::with_capacity(dim * n) }
    }

    pub fn from_rows(dim: usize, rows: &[Vec<F>]) -> Self {
        let mut set = Self::with_capacity(dim, rows.len());
        for row in rows {
            set.push(row);
        }
        set
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn push(&mut self, point: &[F]) {
        assert_eq!(point.len(), self.dim, "point length must match set dimension");
        self.data.extend_from_slice(point);
    }

    pub fn point(&self, i: usize) -> &[F] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn point_mut(&mut self, i: usize) -> &mut [F] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Copies row `src` over row `dst`.
    pub fn copy_row(&mut self, src: usize, dst: usize) {
        if src == dst {
            return;
        }
        let (s, d) = (src * self.dim, dst * self.dim);
        for k in 0..self.dim {
            self.data[d + k] = self.data[s + k];
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &[F]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn extend(&mut self, other: &PointSet<F>) {
        assert_eq!(self.dim, other.dim);
        self.data.extend_from_slice(&other.data);
    }

    /// Keeps only the last `n` points.
    pub fn truncate_front(&mut self, n: usize) {
        let keep = n * self.dim;
        let total = self.data.len();
        assert!(keep <= total);
        self.data.drain(..total - keep);
    }
}

/// Which part of the domain a batch of collocation points lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Interior,
    Boundary,
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Region::Interior => write!(f, "interior"),
            Region::Boundary => write!(f, "boundary"),
        }
    }
}

/// Constraint carried by a single boundary point.
///
/// Stationary problems only use `Lateral`. Time-dependent problems add the
/// initial slice: a value constraint, and for second-order-in-time problems
/// a rate constraint on the initial time derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryPiece {
    /// Dirichlet data on the spatial boundary (crossed with time if present).
    Lateral,
    /// Value constraint on the initial slice `t = 0`.
    InitialValue,
    /// Time-derivative constraint on the initial slice `t = 0`.
    InitialRate,
}

impl std::fmt::Display for BoundaryPiece {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundaryPiece::Lateral => write!(f, "lateral"),
            BoundaryPiece::InitialValue => write!(f, "initial_value"),
            BoundaryPiece::InitialRate => write!(f, "initial_rate"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_round_trip() {
        let mut set = PointSet::<f64>::new(2);
        set.push(&[1.0, 2.0]);
        set.push(&[3.0, 4.0]);
        assert_eq!(set.len(), 2);
        assert_eq!(set.point(1), &[3.0, 4.0]);
        set.copy_row(0, 1);
        assert_eq!(set.point(1), &[1.0, 2.0]);
    }

    #[test]
    fn truncate_front_keeps_tail() {
        let mut set = PointSet::<f64>::new(1);
        for i in 0..5 {
            set.push(&[i as f64]);
        }
        set.truncate_front(2);
        assert_eq!(set.len(), 2);
        assert_eq!(set.point(0), &[3.0]);
        assert_eq!(set.point(1), &[4.0]);
    }
}
