use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vec3::Vec3;

/// Uniform voxel grid. Voxel `(i, j, k)` has centre `origin + spacing * (i, j, k)`
/// and flat index `(i * ny + j) * nz + k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid3 {
    pub origin: Vec3,
    pub spacing: f64,
    pub dims: [usize; 3],
}

impl Grid3 {
    pub fn new(origin: Vec3, spacing: f64, dims: [usize; 3]) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::precondition(format!(
                "grid spacing must be positive and finite, got {spacing}"
            )));
        }
        if dims.iter().any(|&n| n == 0) {
            return Err(Error::precondition(format!(
                "grid dimensions must all be at least 1, got {dims:?}"
            )));
        }
        if origin.iter().any(|v| !v.is_finite()) {
            return Err(Error::precondition("grid origin must be finite"));
        }
        Ok(Self {
            origin,
            spacing,
            dims,
        })
    }

    /// Grid whose voxel centres are symmetric about the coordinate origin.
    pub fn centered(spacing: f64, dims: [usize; 3]) -> Result<Self> {
        let origin = [0, 1, 2].map(|a| -0.5 * spacing * (dims[a] as f64 - 1.0));
        Self::new(origin, spacing, dims)
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn voxel_volume(&self) -> f64 {
        self.spacing.powi(3)
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let k = idx % self.dims[2];
        let j = (idx / self.dims[2]) % self.dims[1];
        let i = idx / (self.dims[1] * self.dims[2]);
        [i, j, k]
    }

    pub fn center(&self, idx: usize) -> Vec3 {
        let c = self.coords(idx);
        [0, 1, 2].map(|a| self.origin[a] + self.spacing * c[a] as f64)
    }

    pub fn centers(&self) -> Vec<Vec3> {
        (0..self.len()).map(|i| self.center(i)).collect()
    }

    /// True when the voxel lies within `width` voxels of any face.
    pub fn in_boundary_layer(&self, idx: usize, width: usize) -> bool {
        let c = self.coords(idx);
        (0..3).any(|a| c[a] < width || c[a] + width >= self.dims[a])
    }

    /// Axis-aligned box `[lo, hi]` spanned by voxels outside the boundary layer,
    /// extended by half a voxel. `None` when the layer swallows the grid.
    pub fn interior_box(&self, width: usize) -> Option<(Vec3, Vec3)> {
        if (0..3).any(|a| self.dims[a] <= 2 * width) {
            return None;
        }
        let h = self.spacing;
        let lo = [0, 1, 2].map(|a| self.origin[a] + h * (width as f64 - 0.5));
        let hi = [0, 1, 2].map(|a| self.origin[a] + h * ((self.dims[a] - 1 - width) as f64 + 0.5));
        Some((lo, hi))
    }

    /// Same geometry check used when combining volumes.
    pub fn same_as(&self, other: &Grid3) -> bool {
        self.dims == other.dims
            && (self.spacing - other.spacing).abs() <= 1e-12 * self.spacing
            && (0..3)
                .all(|a| (self.origin[a] - other.origin[a]).abs() <= 1e-12 * self.spacing.max(1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip_is_row_major() {
        let g = Grid3::new([0.0; 3], 1.0, [2, 3, 4]).unwrap();
        assert_eq!(g.index(0, 0, 1), 1);
        assert_eq!(g.index(0, 1, 0), 4);
        assert_eq!(g.index(1, 0, 0), 12);
        for idx in 0..g.len() {
            let [i, j, k] = g.coords(idx);
            assert_eq!(g.index(i, j, k), idx);
        }
    }

    #[test]
    fn centered_grid_is_symmetric() {
        let g = Grid3::centered(0.5, [4, 4, 5]).unwrap();
        let first = g.center(0);
        let last = g.center(g.len() - 1);
        for a in 0..3 {
            assert!((first[a] + last[a]).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(Grid3::new([0.0; 3], 0.0, [1, 1, 1]).is_err());
        assert!(Grid3::new([0.0; 3], 1.0, [1, 0, 1]).is_err());
    }

    #[test]
    fn boundary_layer_membership() {
        let g = Grid3::new([0.0; 3], 1.0, [5, 5, 5]).unwrap();
        assert!(g.in_boundary_layer(g.index(0, 2, 2), 1));
        assert!(g.in_boundary_layer(g.index(2, 2, 4), 1));
        assert!(!g.in_boundary_layer(g.index(1, 2, 3), 1));
        assert!(g.in_boundary_layer(g.index(1, 2, 3), 2));
    }
}
