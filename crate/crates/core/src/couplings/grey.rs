use super::trace::{ExitPoint, ExitSide};
use super::CoupledEnsembles;
use crate::model::BoundarySlot;
use crate::{Error, Result};

/// One grey path: edges of the dense ensemble absent from the sparse one,
/// traced from its boundary origin to its exit.
#[derive(Clone, Debug)]
pub struct GreyPath {
    pub origin: BoundarySlot,
    /// Antidiagonal level of the origin slot (`j` for west, `i` for south).
    pub origin_level: u32,
    /// In-box vertices, one per antidiagonal starting at `origin_level + 1`.
    pub vertices: Vec<(u32, u32)>,
    pub exit: ExitPoint,
}

/// Where a path's edge leaving antidiagonal `n` lands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Step {
    Into((u32, u32)),
    Exit(ExitPoint),
    /// The path does not cross this level.
    Absent,
}

impl GreyPath {
    /// Level of the last in-box vertex.
    fn last_level(&self) -> u32 {
        self.origin_level + self.vertices.len() as u32
    }

    /// The vertex this path's edge from level `n` enters, or its exit.
    pub(crate) fn step_from_level(&self, n: u32) -> Step {
        if n < self.origin_level || n > self.last_level() {
            return Step::Absent;
        }
        if n == self.last_level() {
            Step::Exit(self.exit)
        } else {
            Step::Into(self.vertices[(n - self.origin_level) as usize])
        }
    }

    /// True when the edge from level `n` is horizontal (an east step).
    pub(crate) fn edge_is_horizontal(&self, n: u32) -> bool {
        let from = if n == self.origin_level {
            match self.origin {
                BoundarySlot::West(j) => (0, j),
                BoundarySlot::South(i) => (i, 0),
            }
        } else {
            self.vertices[(n - self.origin_level) as usize - 1]
        };
        match self.step_from_level(n) {
            Step::Into(to) => to.0 > from.0,
            Step::Exit(e) => e.side == ExitSide::East,
            Step::Absent => unreachable!("queried edge outside path support"),
        }
    }
}

/// The ordered, labelled set of grey paths of a coupled pair. Labels are
/// consecutive integers increasing to the southeast; `relabel_zero_at` puts
/// label 0 on the path entering through a distinguished slot.
#[derive(Clone, Debug)]
pub struct GreyPathSet {
    dims: (u32, u32),
    paths: Vec<GreyPath>,
    zero_index: usize,
    grey_h: Vec<u64>,
    grey_v: Vec<u64>,
    h_width: u32,
    v_width: u32,
}

impl GreyPathSet {
    pub fn dims(&self) -> (u32, u32) {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Paths in northwest-to-southeast order.
    pub fn paths(&self) -> &[GreyPath] {
        &self.paths
    }

    pub fn label_of_index(&self, index: usize) -> i64 {
        index as i64 - self.zero_index as i64
    }

    pub fn index_of_label(&self, label: i64) -> Option<usize> {
        let idx = label + self.zero_index as i64;
        if (0..self.paths.len() as i64).contains(&idx) {
            Some(idx as usize)
        } else {
            None
        }
    }

    pub fn path_by_label(&self, label: i64) -> Option<&GreyPath> {
        self.index_of_label(label).map(|i| &self.paths[i])
    }

    /// Moves label 0 to the path entering through `slot`.
    pub fn relabel_zero_at(&mut self, slot: BoundarySlot) -> Result<()> {
        match self.paths.iter().position(|p| p.origin == slot) {
            Some(idx) => {
                self.zero_index = idx;
                Ok(())
            }
            None => Err(Error::SlotConflict {
                slot: slot.to_string(),
                expected_present: true,
            }),
        }
    }

    #[inline]
    pub fn grey_h(&self, i: u32, j: u32) -> bool {
        let idx = (j as usize - 1) * self.h_width as usize + (i as usize - 1);
        self.grey_h[idx >> 6] >> (idx & 63) & 1 == 1
    }

    #[inline]
    pub fn grey_v(&self, i: u32, j: u32) -> bool {
        let idx = (j as usize - 1) * self.v_width as usize + (i as usize - 1);
        self.grey_v[idx >> 6] >> (idx & 63) & 1 == 1
    }

    /// Number of grey arrows entering vertex `(i, j)`.
    pub(crate) fn grey_in_count(&self, i: u32, j: u32) -> u32 {
        self.grey_h(i, j) as u32 + self.grey_v(i, j) as u32
    }

    /// Net grey flux across the segment from the origin to `(x, y)`:
    /// grey east exits minus grey south entries of the sub-box. Equals
    /// `H_dense(x, y) - H_sparse(x, y)` for every point of the box.
    pub fn flux(&self, x: u32, y: u32) -> Result<i64> {
        let (x_max, y_max) = self.dims;
        if x == 0 || y == 0 || x > x_max || y > y_max {
            return Err(Error::OutOfRange {
                x,
                y,
                dims: self.dims,
            });
        }
        let e = (1..=y).filter(|&j| self.grey_h(x + 1, j)).count() as i64;
        let s = (1..=x).filter(|&i| self.grey_v(i, 1)).count() as i64;
        Ok(e - s)
    }
}

/// Decomposes the edges of `dense` absent from `sparse` into maximal
/// non-crossing up-right paths.
///
/// At a vertex with two grey in-edges the south arrival pairs with the east
/// exit and the west arrival with the north exit, which makes the
/// decomposition unique and the paths non-crossing. Labels increase to the
/// southeast; label 0 initially sits on the most northwesterly path.
pub fn grey_discrepancies(pair: &CoupledEnsembles) -> Result<GreyPathSet> {
    pair.check_domination()?;
    let dims = pair.dims();
    let (x_max, y_max) = dims;
    let h_width = x_max + 1;
    let v_width = x_max;
    let diff = |a: &[u64], b: &[u64]| -> Vec<u64> {
        a.iter().zip(b).map(|(x, y)| x & !y).collect()
    };
    let set = GreyPathSet {
        dims,
        paths: Vec::new(),
        zero_index: 0,
        grey_h: diff(pair.dense.h_plane().words(), pair.sparse.h_plane().words()),
        grey_v: diff(pair.dense.v_plane().words(), pair.sparse.v_plane().words()),
        h_width,
        v_width,
    };
    // Origins in northwest-to-southeast order: west slots from the top down,
    // then south slots from the left.
    let mut origins: Vec<(BoundarySlot, u32)> = Vec::new();
    for j in (1..=y_max).rev() {
        if set.grey_h(1, j) {
            origins.push((BoundarySlot::West(j), j));
        }
    }
    for i in 1..=x_max {
        if set.grey_v(i, 1) {
            origins.push((BoundarySlot::South(i), i));
        }
    }
    let mut paths = Vec::with_capacity(origins.len());
    for (origin, origin_level) in origins {
        paths.push(trace_grey_path(&set, dims, origin, origin_level)?);
    }
    let mut set = set;
    set.paths = paths;
    Ok(set)
}

fn trace_grey_path(
    set: &GreyPathSet,
    dims: (u32, u32),
    origin: BoundarySlot,
    origin_level: u32,
) -> Result<GreyPath> {
    let (x_max, y_max) = dims;
    let (mut i, mut j, mut from_west) = match origin {
        BoundarySlot::West(j) => (1, j, true),
        BoundarySlot::South(i) => (i, 1, false),
    };
    let mut vertices = Vec::new();
    loop {
        vertices.push((i, j));
        let two_in = set.grey_in_count(i, j) == 2;
        // Non-crossing rule: with two grey arrivals, west pairs with north
        // and south with east; otherwise follow the unique grey out-edge.
        let go_north = if two_in {
            from_west
        } else {
            let out_n = set.grey_v(i, j + 1);
            let out_e = set.grey_h(i + 1, j);
            if out_n == out_e {
                // Conservation of discrepancies guarantees exactly one.
                return Err(Error::DominationViolated { at: (i, j) });
            }
            out_n
        };
        if go_north {
            if j == y_max {
                return Ok(GreyPath {
                    origin,
                    origin_level,
                    vertices,
                    exit: ExitPoint {
                        side: ExitSide::North,
                        coordinate: i,
                    },
                });
            }
            j += 1;
            from_west = false;
        } else {
            if i == x_max {
                return Ok(GreyPath {
                    origin,
                    origin_level,
                    vertices,
                    exit: ExitPoint {
                        side: ExitSide::East,
                        coordinate: j,
                    },
                });
            }
            i += 1;
            from_west = true;
        }
    }
}
