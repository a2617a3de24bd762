//! The stochastic six vertex model on a rectangle.
//!
//! Arrows form edge-disjoint up-right paths. A vertex with a single incoming
//! arrow passes it straight through with probability `delta1` (vertical) or
//! `delta2` (horizontal) and turns it otherwise; a vertex with both incoming
//! arrows emits both outgoing arrows. The height function is the net flux of
//! arrows across the segment from the origin, `H = E - S = W - N`.

mod boundary;
mod ensemble;
mod sampler;

pub use boundary::{AxisLaw, BoundarySlot, BoundarySpec};
pub use ensemble::{BitPlane, HeightDecomposition, PathEnsemble, VertexConfig};
pub use sampler::{sample_ensemble, sample_ensemble_into, sample_height};
pub(crate) use sampler::{vertex_uniform_h, vertex_uniform_v};

use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

/// Items (i)-(iii) of the parameter assumption, evaluated against the
/// supplied constant. Pure flags; operations that need them reject on their
/// own preconditions instead.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssumptionFlags {
    /// (i) theta >= a.
    pub drift_bounded_below: bool,
    /// (ii) 1 - delta1 >= a.
    pub delta1_bounded_away_from_one: bool,
    /// (iii) a * delta1 <= 1 - kappa <= delta1 / a.
    pub gap_comparable_to_delta1: bool,
}

impl AssumptionFlags {
    pub fn all(&self) -> bool {
        self.drift_bounded_below
            && self.delta1_bounded_away_from_one
            && self.gap_comparable_to_delta1
    }
}

/// Vertex probabilities with the derived ratios used throughout.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T: Scalar = crate::Real> {
    pub delta1: T,
    pub delta2: T,
    /// (1 - delta1) / (1 - delta2).
    pub kappa: T,
    /// (delta1 ∧ 1/2 - delta2) / (delta1 ∧ 1/2 + delta2), the label-walk drift.
    pub theta: T,
    pub frak_a: Option<T>,
    pub assumption: Option<AssumptionFlags>,
}

/// Derives kappa and theta from the vertex probabilities and, when a constant
/// is supplied, evaluates the assumption flags.
///
/// The closed interval `[0, 1]` is accepted here; operations that need the
/// open interval reject on their own.
pub fn derive_params<T: Scalar>(delta1: T, delta2: T, frak_a: Option<T>) -> ModelParams<T> {
    let zero = T::zero();
    let one = T::one();
    assert!(
        delta1 >= zero && delta1 <= one && delta2 >= zero && delta2 <= one,
        "vertex probabilities must lie in [0, 1]"
    );
    let kappa = (one - delta1) / (one - delta2);
    let half = T::from_f(0.5);
    let capped = delta1.min(half);
    let theta = (capped - delta2) / (capped + delta2);
    let assumption = frak_a.map(|a| AssumptionFlags {
        drift_bounded_below: theta >= a,
        delta1_bounded_away_from_one: one - delta1 >= a,
        gap_comparable_to_delta1: a * delta1 <= one - kappa && one - kappa <= delta1 / a,
    });
    ModelParams {
        delta1,
        delta2,
        kappa,
        theta,
        frak_a,
        assumption,
    }
}

impl<T: Scalar> ModelParams<T> {
    /// True when 0 < delta2 < delta1 < 1, the regime every analytics formula
    /// assumes.
    pub fn strictly_ordered_open(&self) -> bool {
        T::zero() < self.delta2 && self.delta2 < self.delta1 && self.delta1 < T::one()
    }

    pub fn require_strictly_ordered_open(&self) -> crate::Result<()> {
        if self.strictly_ordered_open() {
            Ok(())
        } else {
            Err(crate::Error::DegenerateParams {
                delta1: self.delta1.to_f64().unwrap_or(f64::NAN),
                delta2: self.delta2.to_f64().unwrap_or(f64::NAN),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_parameters_give_unit_kappa_zero_theta() {
        let p = derive_params(0.3f64, 0.3, None);
        assert_eq!(p.kappa, 1.0);
        assert_eq!(p.theta, 0.0);
        assert!(p.assumption.is_none());
    }

    #[test]
    fn hand_evaluated_kappa_theta() {
        let p = derive_params(0.6f64, 0.2, None);
        assert_eq!(p.kappa, 0.5);
        // delta1 ∧ 1/2 = 1/2, so theta = (0.5 - 0.2) / (0.5 + 0.2) = 3/7.
        assert!((p.theta - 3.0 / 7.0).abs() < 1e-15);
        assert!(p.strictly_ordered_open());
    }

    #[test]
    fn assumption_item_three_is_the_two_sided_gap_bound() {
        let p = derive_params(0.05f64, 0.04, Some(0.05));
        let f = p.assumption.unwrap();
        let kappa = 0.95f64 / 0.96;
        assert_eq!(
            f.gap_comparable_to_delta1,
            0.05 * 0.05 <= 1.0 - kappa && 1.0 - kappa <= 0.05 / 0.05
        );
        // theta = (0.05 - 0.04) / (0.05 + 0.04) = 1/9 >= 0.05.
        assert!(f.drift_bounded_below);
        assert!(f.delta1_bounded_away_from_one);
    }

    #[test]
    fn degenerate_deltas_accepted_but_flagged() {
        let p = derive_params(1.0f64, 0.0, None);
        assert!(!p.strictly_ordered_open());
        assert!(p.require_strictly_ordered_open().is_err());
        assert_eq!(p.kappa, 0.0);
        // Sampler-side degenerate values still produce finite theta here.
        assert_eq!(p.theta, 1.0);
    }
}
