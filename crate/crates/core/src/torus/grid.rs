use crate::error::{Error, Result};

/// Largest number of grid points `TorusGrid::new` accepts.
pub const DEFAULT_POINT_BUDGET: u128 = 1 << 27;

/// Uniform periodic grid on `[-1/2, 1/2)^d` with `n` points per axis.
///
/// Point `i` along an axis sits at `-1/2 + i/n`; storage is row-major with the
/// last axis fastest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TorusGrid {
    dim: usize,
    n: usize,
}

impl TorusGrid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        Self::with_budget(dim, n, DEFAULT_POINT_BUDGET)
    }

    pub fn with_budget(dim: usize, n: usize, budget: u128) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        if n % 2 != 0 {
            return Err(Error::OddResolution(n));
        }
        if n < 8 {
            return Err(Error::ResolutionTooSmall(n));
        }
        let points = (n as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
        if points > budget {
            return Err(Error::MemoryBudget { points, budget });
        }
        Ok(TorusGrid { dim, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Quadrature weight of one point, so that the constant 1 integrates to 1.
    pub fn weight(&self) -> f64 {
        1.0 / self.len() as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        -0.5 + i as f64 / self.n as f64
    }

    /// Signed frequency of storage index `i` along one axis, in `[-n/2, n/2)`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    pub fn is_nyquist(&self, i: usize) -> bool {
        i == self.n / 2
    }

    /// Per-axis indices of flat index `flat`.
    pub fn unravel(&self, mut flat: usize, out: &mut [usize]) {
        for a in (0..self.dim).rev() {
            out[a] = flat % self.n;
            flat /= self.n;
        }
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.n.pow((self.dim - 1 - axis) as u32)
    }

    /// Index `j` with `x_j = lambda * x_i (mod 1)`; exact for integer `lambda`.
    pub fn dilated_index(&self, i: usize, lambda: usize) -> usize {
        let n = self.n;
        // x_i = -1/2 + i/n  =>  lambda x_i = -1/2 + (lambda i + n (1 - lambda)/2) / n
        let shift = (n / 2) * (lambda % n);
        (lambda % n * i + n + n / 2 - shift % n) % n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_grid_examples() {
        let g = TorusGrid::new(3, 64).unwrap();
        assert_eq!(g.len(), 262_144);
        assert_eq!(g.weight(), 1.0 / 262_144.0);
        assert_eq!(TorusGrid::new(4, 32).unwrap().len(), 1_048_576);
        assert_eq!(TorusGrid::new(2, 7), Err(Error::OddResolution(7)));
        assert_eq!(TorusGrid::new(1, 8), Err(Error::DimensionTooSmall(1)));
        assert!(matches!(
            TorusGrid::new(6, 512),
            Err(Error::MemoryBudget { .. })
        ));
    }

    #[test]
    fn dilated_index_matches_coordinates() {
        let g = TorusGrid::new(2, 16).unwrap();
        for lambda in 1..7 {
            for i in 0..16 {
                let j = g.dilated_index(i, lambda);
                let target = lambda as f64 * g.coord(i);
                let diff = target - g.coord(j);
                assert!((diff - diff.round()).abs() < 1e-12, "lambda {lambda} i {i}");
            }
        }
    }

    #[test]
    fn ravel_unravel() {
        let g = TorusGrid::new(3, 8).unwrap();
        let mut idx = [0; 3];
        for flat in [0, 7, 8, 63, 64, 511] {
            g.unravel(flat, &mut idx);
            assert_eq!(g.ravel(&idx), flat);
        }
    }
}
