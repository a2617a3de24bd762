use crate::{Error, Result};

/// Largest bit-plane we will allocate (bits). Keeps `x * y` products well
/// inside addressable memory before the allocation is attempted.
const MAX_PLANE_BITS: u64 = 1 << 33;

/// Dense bit grid indexed one-based as `(i, j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitPlane {
    width: u32,
    height: u32,
    words: Vec<u64>,
}

impl BitPlane {
    pub fn new(width: u32, height: u32) -> Result<Self> {
        let bits = width as u64 * height as u64;
        if bits > MAX_PLANE_BITS {
            return Err(Error::DimensionOverflow {
                x: width,
                y: height,
            });
        }
        Ok(BitPlane {
            width,
            height,
            words: vec![0; bits.div_ceil(64) as usize],
        })
    }

    #[inline(always)]
    fn index(&self, i: u32, j: u32) -> usize {
        debug_assert!(
            (1..=self.width).contains(&i) && (1..=self.height).contains(&j),
            "bit plane access ({i},{j}) outside {}x{}",
            self.width,
            self.height
        );
        (j as usize - 1) * self.width as usize + (i as usize - 1)
    }

    #[inline(always)]
    pub fn get(&self, i: u32, j: u32) -> bool {
        let idx = self.index(i, j);
        self.words[idx >> 6] >> (idx & 63) & 1 == 1
    }

    #[inline(always)]
    pub fn set(&mut self, i: u32, j: u32, value: bool) {
        let idx = self.index(i, j);
        let mask = 1u64 << (idx & 63);
        if value {
            self.words[idx >> 6] |= mask;
        } else {
            self.words[idx >> 6] &= !mask;
        }
    }

    pub fn clear(&mut self) {
        self.words.fill(0);
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// True when every set bit of `other` is set here.
    pub fn contains(&self, other: &BitPlane) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| b & !a == 0)
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

/// One of the six admissible vertex states (incoming arrows determine the
/// weight; the doubly-occupied vertex is deterministic).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexConfig {
    Empty,
    /// Vertical in, vertical out (weight delta1).
    VerticalPass,
    /// Vertical in, horizontal out (weight 1 - delta1).
    VerticalTurn,
    /// Horizontal in, horizontal out (weight delta2).
    HorizontalPass,
    /// Horizontal in, vertical out (weight 1 - delta2).
    HorizontalTurn,
    /// Both in, both out (weight 1).
    Both,
}

impl VertexConfig {
    pub const ALL: [VertexConfig; 6] = [
        VertexConfig::Empty,
        VertexConfig::VerticalPass,
        VertexConfig::VerticalTurn,
        VertexConfig::HorizontalPass,
        VertexConfig::HorizontalTurn,
        VertexConfig::Both,
    ];

    pub fn from_edges(in_h: bool, in_v: bool, out_h: bool, out_v: bool) -> Option<Self> {
        match (in_h, in_v, out_h, out_v) {
            (false, false, false, false) => Some(VertexConfig::Empty),
            (false, true, false, true) => Some(VertexConfig::VerticalPass),
            (false, true, true, false) => Some(VertexConfig::VerticalTurn),
            (true, false, true, false) => Some(VertexConfig::HorizontalPass),
            (true, false, false, true) => Some(VertexConfig::HorizontalTurn),
            (true, true, true, true) => Some(VertexConfig::Both),
            _ => None,
        }
    }
}

/// Boundary crossing counts of the box `[1,x] x [1,y]` and the height
/// `H = E - S`, which equals `W - N` by arrow conservation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HeightDecomposition {
    pub w: u32,
    pub n: u32,
    pub e: u32,
    pub s: u32,
    pub h: i64,
}

/// Occupancy of every edge of a sampled rectangle, exit planes included, so
/// `E` and `N` are directly addressable. Immutable after sampling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathEnsemble {
    dims: (u32, u32),
    /// `h(i, j)`: arrow enters vertex `(i, j)` horizontally; `i` runs to
    /// `x_max + 1` (the eastern exit plane).
    h: BitPlane,
    /// `v(i, j)`: arrow enters vertex `(i, j)` vertically; `j` runs to
    /// `y_max + 1` (the northern exit plane).
    v: BitPlane,
}

impl PathEnsemble {
    pub fn empty(dims: (u32, u32)) -> Result<Self> {
        let (x_max, y_max) = dims;
        if x_max == 0 || y_max == 0 || x_max == u32::MAX || y_max == u32::MAX {
            return Err(Error::DimensionOverflow { x: x_max, y: y_max });
        }
        Ok(PathEnsemble {
            dims,
            h: BitPlane::new(x_max + 1, y_max)?,
            v: BitPlane::new(x_max, y_max + 1)?,
        })
    }

    pub fn dims(&self) -> (u32, u32) {
        self.dims
    }

    #[inline(always)]
    pub fn h(&self, i: u32, j: u32) -> bool {
        self.h.get(i, j)
    }

    #[inline(always)]
    pub fn v(&self, i: u32, j: u32) -> bool {
        self.v.get(i, j)
    }

    #[inline(always)]
    pub(crate) fn set_h(&mut self, i: u32, j: u32, value: bool) {
        self.h.set(i, j, value);
    }

    #[inline(always)]
    pub(crate) fn set_v(&mut self, i: u32, j: u32, value: bool) {
        self.v.set(i, j, value);
    }

    pub fn h_plane(&self) -> &BitPlane {
        &self.h
    }

    pub fn v_plane(&self) -> &BitPlane {
        &self.v
    }

    fn check_range(&self, x: u32, y: u32) -> Result<()> {
        if x == 0 || y == 0 || x > self.dims.0 || y > self.dims.1 {
            Err(Error::OutOfRange {
                x,
                y,
                dims: self.dims,
            })
        } else {
            Ok(())
        }
    }

    /// The configuration at vertex `(i, j)`, or `None` if the edge pattern is
    /// not one of the six admissible states.
    pub fn vertex_config(&self, i: u32, j: u32) -> Option<VertexConfig> {
        VertexConfig::from_edges(self.h(i, j), self.v(i, j), self.h(i + 1, j), self.v(i, j + 1))
    }

    /// Checks arrow conservation at every vertex: each must be one of the six
    /// admissible configurations.
    pub fn validate(&self) -> Result<()> {
        for j in 1..=self.dims.1 {
            for i in 1..=self.dims.0 {
                if self.vertex_config(i, j).is_none() {
                    return Err(Error::DominationViolated { at: (i, j) });
                }
            }
        }
        Ok(())
    }

    /// West/south entries and east/north exits of the sub-box `[1,x] x [1,y]`.
    pub fn boundary_counts(&self, x: u32, y: u32) -> Result<HeightDecomposition> {
        self.check_range(x, y)?;
        let w = (1..=y).filter(|&j| self.h(1, j)).count() as u32;
        let s = (1..=x).filter(|&i| self.v(i, 1)).count() as u32;
        let e = (1..=y).filter(|&j| self.h(x + 1, j)).count() as u32;
        let n = (1..=x).filter(|&i| self.v(i, y + 1)).count() as u32;
        Ok(HeightDecomposition {
            w,
            n,
            e,
            s,
            h: e as i64 - s as i64,
        })
    }

    /// Net signed flux of arrows across the segment from the origin to
    /// `(x, y)` in the flux convention: exits east count `+1`, entries south
    /// count `-1`.
    pub fn height_flux(&self, x: u32, y: u32) -> Result<i64> {
        self.check_range(x, y)?;
        let e = (1..=y).filter(|&j| self.h(x + 1, j)).count() as i64;
        let s = (1..=x).filter(|&i| self.v(i, 1)).count() as i64;
        Ok(e - s)
    }

    /// Edgewise domination: every arrow of `other` is an arrow of `self`.
    pub fn dominates(&self, other: &PathEnsemble) -> bool {
        self.dims == other.dims && self.h.contains(&other.h) && self.v.contains(&other.v)
    }

    /// First edge present in `other` but absent here, if any.
    pub fn first_domination_violation(&self, other: &PathEnsemble) -> Option<(u32, u32)> {
        let (x_max, y_max) = self.dims;
        for j in 1..=y_max {
            for i in 1..=x_max + 1 {
                if other.h(i, j) && !self.h(i, j) {
                    return Some((i, j));
                }
            }
        }
        for j in 1..=y_max + 1 {
            for i in 1..=x_max {
                if other.v(i, j) && !self.v(i, j) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Compact binary dump: magic, format version, dims header, bit planes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 8 * (self.h.words.len() + self.v.words.len()));
        out.extend_from_slice(b"S6VE");
        out.extend_from_slice(&1u16.to_le_bytes());
        out.extend_from_slice(&self.dims.0.to_le_bytes());
        out.extend_from_slice(&self.dims.1.to_le_bytes());
        for plane in [&self.h, &self.v] {
            for w in &plane.words {
                out.extend_from_slice(&w.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let need = |n: usize, have: usize| {
            if have < n {
                Err(Error::BadDump(format!("truncated: need {n} bytes, have {have}")))
            } else {
                Ok(())
            }
        };
        need(14, bytes.len())?;
        if &bytes[0..4] != b"S6VE" {
            return Err(Error::BadDump("bad magic".into()));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != 1 {
            return Err(Error::BadDump(format!("unsupported format version {version}")));
        }
        let x_max = u32::from_le_bytes(bytes[6..10].try_into().unwrap());
        let y_max = u32::from_le_bytes(bytes[10..14].try_into().unwrap());
        let mut ens = PathEnsemble::empty((x_max, y_max))?;
        let h_words = ens.h.words.len();
        let v_words = ens.v.words.len();
        need(14 + 8 * (h_words + v_words), bytes.len())?;
        let mut off = 14;
        for plane in [&mut ens.h, &mut ens.v] {
            for w in plane.words.iter_mut() {
                *w = u64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
                off += 8;
            }
        }
        if off != bytes.len() {
            return Err(Error::BadDump(format!("{} trailing bytes", bytes.len() - off)));
        }
        Ok(ens)
    }

    /// ASCII debug grid, top row first. `.` empty, `|` vertical pass,
    /// `L` vertical turn, `-` horizontal pass, `J` horizontal turn, `+` both,
    /// `?` invalid.
    pub fn text_grid(&self) -> String {
        let (x_max, y_max) = self.dims;
        let mut out = String::with_capacity((x_max as usize + 1) * y_max as usize);
        for j in (1..=y_max).rev() {
            for i in 1..=x_max {
                out.push(match self.vertex_config(i, j) {
                    Some(VertexConfig::Empty) => '.',
                    Some(VertexConfig::VerticalPass) => '|',
                    Some(VertexConfig::VerticalTurn) => 'L',
                    Some(VertexConfig::HorizontalPass) => '-',
                    Some(VertexConfig::HorizontalTurn) => 'J',
                    Some(VertexConfig::Both) => '+',
                    None => '?',
                });
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_ensemble_counts_are_zero() {
        let ens = PathEnsemble::empty((4, 3)).unwrap();
        let d = ens.boundary_counts(4, 3).unwrap();
        assert_eq!((d.w, d.n, d.e, d.s, d.h), (0, 0, 0, 0, 0));
        assert_eq!(ens.height_flux(2, 2).unwrap(), 0);
        ens.validate().unwrap();
    }

    #[test]
    fn out_of_range_rejected() {
        let ens = PathEnsemble::empty((4, 3)).unwrap();
        assert!(matches!(
            ens.boundary_counts(5, 1),
            Err(Error::OutOfRange { .. })
        ));
        assert!(matches!(ens.height_flux(0, 1), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn oversized_plane_rejected() {
        assert!(matches!(
            PathEnsemble::empty((u32::MAX - 1, u32::MAX - 1)),
            Err(Error::DimensionOverflow { .. })
        ));
    }

    #[test]
    fn single_path_counts() {
        // One path: enters south at (2,1), goes straight up and out the top
        // of a 3x2 box.
        let mut ens = PathEnsemble::empty((3, 2)).unwrap();
        ens.set_v(2, 1, true);
        ens.set_v(2, 2, true);
        ens.set_v(2, 3, true);
        ens.validate().unwrap();
        let d = ens.boundary_counts(3, 2).unwrap();
        assert_eq!((d.w, d.n, d.e, d.s), (0, 1, 0, 1));
        assert_eq!(d.h, -1);
        assert_eq!(d.h, d.w as i64 - d.n as i64);
        // The box to the left of the path sees nothing.
        let d = ens.boundary_counts(1, 2).unwrap();
        assert_eq!((d.w, d.n, d.e, d.s, d.h), (0, 0, 0, 0, 0));
    }

    #[test]
    fn dump_round_trip() {
        let mut ens = PathEnsemble::empty((5, 4)).unwrap();
        ens.set_v(2, 1, true);
        ens.set_v(2, 2, true);
        ens.set_h(3, 2, true);
        ens.set_h(6, 3, true);
        ens.set_v(5, 5, true);
        let bytes = ens.to_bytes();
        let back = PathEnsemble::from_bytes(&bytes).unwrap();
        assert_eq!(ens, back);
    }

    #[test]
    fn dump_rejects_garbage() {
        assert!(PathEnsemble::from_bytes(b"nope").is_err());
        let mut ok = PathEnsemble::empty((2, 2)).unwrap().to_bytes();
        ok[0] = b'X';
        assert!(PathEnsemble::from_bytes(&ok).is_err());
        let mut truncated = PathEnsemble::empty((2, 2)).unwrap().to_bytes();
        truncated.pop();
        assert!(PathEnsemble::from_bytes(&truncated).is_err());
    }
}
