//! Rectangular grids in row-major (u-major) order.

/// A rectangular `nu x nv` grid. Index `(i, j)` runs with `i` along the
/// u-direction and `j` along the v-direction; storage and all iteration
/// orders are lexicographic in `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    nu: usize,
    nv: usize,
    data: Vec<T>,
}

impl<T> Grid<T> {
    pub fn from_fn(nu: usize, nv: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(nu * nv);
        for i in 0..nu {
            for j in 0..nv {
                data.push(f(i, j));
            }
        }
        Grid { nu, nv, data }
    }

    /// Builds a grid from row-major data; panics if the length is not `nu * nv`.
    pub fn from_vec(nu: usize, nv: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), nu * nv, "grid data length mismatch");
        Grid { nu, nv, data }
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn nv(&self) -> usize {
        self.nv
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &T {
        debug_assert!(i < self.nu && j < self.nv);
        &self.data[i * self.nv + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut T {
        debug_assert!(i < self.nu && j < self.nv);
        &mut self.data[i * self.nv + j]
    }

    /// Flat row-major view of the samples.
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    /// Lexicographic iteration over `((i, j), value)`.
    pub fn iter_indexed(&self) -> impl Iterator<Item = ((usize, usize), &T)> {
        let nv = self.nv;
        self.data
            .iter()
            .enumerate()
            .map(move |(k, v)| ((k / nv, k % nv), v))
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            nu: self.nu,
            nv: self.nv,
            data: self.data.iter().map(|v| f(v)).collect(),
        }
    }

    /// Checks that another grid has the same dimensions.
    pub fn same_shape<U>(&self, other: &Grid<U>) -> bool {
        self.nu == other.nu && self.nv == other.nv
    }
}

impl<T: Clone> Grid<T> {
    /// A grid holding `value` at every node.
    pub fn constant(nu: usize, nv: usize, value: T) -> Self {
        Grid {
            nu,
            nv,
            data: vec![value; nu * nv],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_is_row_major() {
        let g = Grid::from_fn(3, 4, |i, j| 10 * i + j);
        assert_eq!(*g.at(2, 3), 23);
        assert_eq!(g.as_slice()[2 * 4 + 3], 23);
        let collected: Vec<_> = g.iter_indexed().map(|(ij, _)| ij).collect();
        assert_eq!(collected[0], (0, 0));
        assert_eq!(collected[1], (0, 1));
        assert_eq!(collected[4], (1, 0));
    }
}
