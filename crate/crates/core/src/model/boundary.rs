use serde::{Deserialize, Serialize};
use std::fmt;

/// Entry law along one axis: a default probability plus optional segments.
/// Deterministic entries are the probabilities 0 and 1. Segments are
/// inclusive index ranges; the first matching segment wins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisLaw {
    pub default: f64,
    pub segments: Vec<(u32, u32, f64)>,
}

impl AxisLaw {
    pub fn bernoulli(p: f64) -> Self {
        AxisLaw {
            default: p,
            segments: Vec::new(),
        }
    }

    pub fn present() -> Self {
        Self::bernoulli(1.0)
    }

    pub fn absent() -> Self {
        Self::bernoulli(0.0)
    }

    pub fn prob_at(&self, index: u32) -> f64 {
        for &(lo, hi, p) in &self.segments {
            if (lo..=hi).contains(&index) {
                return p;
            }
        }
        self.default
    }
}

/// A boundary entry slot. `West(j)` feeds the arrow entering vertex `(1, j)`
/// from `(0, j)`; `South(i)` feeds the arrow entering `(i, 1)` from `(i, 0)`.
/// The distinguished vertices `(0, 1)` and `(1, 0)` are `West(1)` and
/// `South(1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundarySlot {
    West(u32),
    South(u32),
}

impl fmt::Display for BoundarySlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundarySlot::West(j) => write!(f, "west[{j}]"),
            BoundarySlot::South(i) => write!(f, "south[{i}]"),
        }
    }
}

/// Boundary data: per-axis entry laws plus forced entries. Overrides take
/// precedence over the segment law at exactly the listed slots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub west: AxisLaw,
    pub south: AxisLaw,
    pub overrides: Vec<(BoundarySlot, bool)>,
}

impl BoundarySpec {
    pub fn new(west: AxisLaw, south: AxisLaw) -> Self {
        BoundarySpec {
            west,
            south,
            overrides: Vec::new(),
        }
    }

    /// Independent Bernoulli entries: `b1` on the y-axis, `b2` on the x-axis.
    pub fn two_sided(b1: f64, b2: f64) -> Self {
        Self::new(AxisLaw::bernoulli(b1), AxisLaw::bernoulli(b2))
    }

    /// Step data: every vertex along the x-axis has an incoming arrow, the
    /// y-axis has none.
    pub fn step() -> Self {
        Self::new(AxisLaw::absent(), AxisLaw::present())
    }

    pub fn empty() -> Self {
        Self::new(AxisLaw::absent(), AxisLaw::absent())
    }

    pub fn with_override(mut self, slot: BoundarySlot, present: bool) -> Self {
        self.overrides.retain(|(s, _)| *s != slot);
        self.overrides.push((slot, present));
        self
    }

    /// Effective entry probability at a slot, overrides applied.
    pub fn prob(&self, slot: BoundarySlot) -> f64 {
        for &(s, forced) in &self.overrides {
            if s == slot {
                return if forced { 1.0 } else { 0.0 };
            }
        }
        match slot {
            BoundarySlot::West(j) => self.west.prob_at(j),
            BoundarySlot::South(i) => self.south.prob_at(i),
        }
    }

    /// Pointwise domination of entry probabilities over every slot of the
    /// rectangle; this is exactly what makes the shared-noise coupling
    /// monotone.
    pub fn dominates(&self, sparse: &BoundarySpec, dims: (u32, u32)) -> bool {
        self.first_non_dominated(sparse, dims).is_none()
    }

    pub(crate) fn first_non_dominated(
        &self,
        sparse: &BoundarySpec,
        dims: (u32, u32),
    ) -> Option<BoundarySlot> {
        let (x_max, y_max) = dims;
        for j in 1..=y_max {
            let s = BoundarySlot::West(j);
            if self.prob(s) < sparse.prob(s) {
                return Some(s);
            }
        }
        for i in 1..=x_max {
            let s = BoundarySlot::South(i);
            if self.prob(s) < sparse.prob(s) {
                return Some(s);
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_data_is_representable() {
        let b = BoundarySpec::step();
        assert_eq!(b.prob(BoundarySlot::South(5)), 1.0);
        assert_eq!(b.prob(BoundarySlot::West(5)), 0.0);
    }

    #[test]
    fn overrides_take_precedence() {
        let b = BoundarySpec::two_sided(0.4, 0.7)
            .with_override(BoundarySlot::South(1), false)
            .with_override(BoundarySlot::West(3), true);
        assert_eq!(b.prob(BoundarySlot::South(1)), 0.0);
        assert_eq!(b.prob(BoundarySlot::South(2)), 0.7);
        assert_eq!(b.prob(BoundarySlot::West(3)), 1.0);
        assert_eq!(b.prob(BoundarySlot::West(1)), 0.4);
        // Re-overriding the same slot replaces the entry.
        let b = b.with_override(BoundarySlot::West(3), false);
        assert_eq!(b.prob(BoundarySlot::West(3)), 0.0);
    }

    #[test]
    fn segments_first_match_wins() {
        let law = AxisLaw {
            default: 0.2,
            segments: vec![(1, 3, 0.9), (3, 10, 0.1)],
        };
        assert_eq!(law.prob_at(3), 0.9);
        assert_eq!(law.prob_at(4), 0.1);
        assert_eq!(law.prob_at(11), 0.2);
    }

    #[test]
    fn domination_is_pointwise() {
        let dense = BoundarySpec::two_sided(0.5, 0.5);
        let sparse = BoundarySpec::two_sided(0.3, 0.3);
        assert!(dense.dominates(&sparse, (10, 10)));
        assert!(!sparse.dominates(&dense, (10, 10)));
        let sparse_forced = sparse.with_override(BoundarySlot::West(2), true);
        assert!(!dense.dominates(&sparse_forced, (10, 10)));
    }
}
