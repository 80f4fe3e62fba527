//! Light-vertex storage with a uniform hash grid for fixed-radius queries.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::math::{Point3, Rgb, Vec3};
use crate::mis::MisPartials;
use crate::scene::SurfacePoint;

/// A stored photon.
#[derive(Clone, Copy, Debug)]
pub struct LightVertex {
    pub hit: SurfacePoint,
    /// Unit direction from this vertex back toward the previous one.
    pub incident: Vec3,
    pub throughput: Rgb,
    /// Segments from the light source to this vertex.
    pub depth: u32,
    /// Index of the light sub-path that produced the vertex.
    pub path: u32,
    pub mis: MisPartials,
    /// Partials of the same sub-path under a second merge radius (equal to
    /// `mis` unless the light paths were traced for per-pixel radii).
    pub mis_alt: MisPartials,
}

impl LightVertex {
    pub fn position(&self) -> Point3 {
        self.hit.point
    }
}

type CellKey = (i64, i64, i64);

/// Grid over vertex positions. Each vertex lives in exactly one cell and
/// keeps its insertion order within that cell.
#[derive(Clone, Debug)]
pub struct HashGrid {
    cell_size: f64,
    cells: HashMap<CellKey, (u32, u32)>,
    /// Vertex indices sorted by cell, stable within a cell.
    order: Vec<u32>,
    sorted_pos: Vec<Point3>,
}

impl HashGrid {
    pub fn build(vertices: &[LightVertex], cell_size: f64) -> Result<Self> {
        let positions: Vec<Point3> = vertices.iter().map(|v| v.position()).collect();
        Self::build_points(&positions, cell_size)
    }

    pub fn build_points(positions: &[Point3], cell_size: f64) -> Result<Self> {
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(Error::InvalidArgument(format!("cell size must be positive, got {cell_size}")));
        }
        let key = |p: Point3| -> CellKey {
            (
                (p.x / cell_size).floor() as i64,
                (p.y / cell_size).floor() as i64,
                (p.z / cell_size).floor() as i64,
            )
        };
        let mut keyed: Vec<(CellKey, u32)> =
            positions.iter().enumerate().map(|(i, &p)| (key(p), i as u32)).collect();
        keyed.sort_by_key(|&(k, _)| k);
        let mut cells = HashMap::new();
        let mut start = 0usize;
        while start < keyed.len() {
            let k = keyed[start].0;
            let mut end = start + 1;
            while end < keyed.len() && keyed[end].0 == k {
                end += 1;
            }
            cells.insert(k, (start as u32, end as u32));
            start = end;
        }
        let order: Vec<u32> = keyed.iter().map(|&(_, i)| i).collect();
        let sorted_pos = order.iter().map(|&i| positions[i as usize]).collect();
        Ok(HashGrid { cell_size, cells, order, sorted_pos })
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Calls `f` with the index of every vertex in the closed ball, in a
    /// deterministic order, without allocating.
    pub fn for_each_in_ball(&self, center: Point3, r: f64, mut f: impl FnMut(usize)) -> Result<()> {
        if r > self.cell_size {
            return Err(Error::InvalidArgument(format!(
                "query radius {r} exceeds cell size {}",
                self.cell_size
            )));
        }
        if self.order.is_empty() {
            return Ok(());
        }
        let cs = self.cell_size;
        let lo = |c: f64| ((c - r) / cs).floor() as i64;
        let hi = |c: f64| ((c + r) / cs).floor() as i64;
        let r2 = r * r;
        for x in lo(center.x)..=hi(center.x) {
            for y in lo(center.y)..=hi(center.y) {
                for z in lo(center.z)..=hi(center.z) {
                    if let Some(&(s, e)) = self.cells.get(&(x, y, z)) {
                        for k in s as usize..e as usize {
                            if (self.sorted_pos[k] - center).length_sq() <= r2 {
                                f(self.order[k] as usize);
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn query_ball(&self, center: Point3, r: f64) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        self.for_each_in_ball(center, r, |i| out.push(i))?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_grid_returns_nothing() {
        let g = HashGrid::build_points(&[], 1.0).unwrap();
        assert!(g.query_ball(Vec3::ZERO, 0.5).unwrap().is_empty());
    }

    #[test]
    fn ball_is_closed() {
        let pts = [Vec3::new(0.05, 0.0, 0.0), Vec3::new(0.2, 0.0, 0.0), Vec3::new(0.0, 0.1, 0.0)];
        let g = HashGrid::build_points(&pts, 0.1).unwrap();
        let mut got = g.query_ball(Vec3::ZERO, 0.1).unwrap();
        got.sort();
        assert_eq!(got, vec![0, 2]);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(HashGrid::build_points(&[], 0.0).is_err());
        let g = HashGrid::build_points(&[Vec3::ZERO], 0.1).unwrap();
        assert!(g.query_ball(Vec3::ZERO, 0.2).is_err());
    }
}
