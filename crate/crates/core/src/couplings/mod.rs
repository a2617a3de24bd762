//! Couplings and second-class particles.
//!
//! The basic coupling drives two models with the same noise so that boundary
//! domination propagates edgewise. The discrepancies between a coupled pair
//! form non-crossing grey paths; a single grey path is a second-class
//! particle, and three equivalent constructions of it live here, together
//! with the microscopic concavity coupling that keeps the denser system's
//! second-class particle weakly southeast of the sparser one's.

mod concavity;
mod grey;
mod trace;
mod walk;

pub use concavity::{concavity_couple, weakly_southeast};
pub use grey::{grey_discrepancies, GreyPath, GreyPathSet};
pub use trace::{
    antiparticle_walk, exit_point, second_class_direct, ExitPoint, ExitSide, SecondClassTrace,
};
pub use walk::{biased_walk, biased_walk_end, env_even_sites, env_parity_alternating};

use crate::model::{sample_ensemble, BoundarySpec, PathEnsemble};
use crate::noise::NoiseField;
use crate::{Error, Params, Result};

/// Two ensembles sampled from identical vertex and boundary uniforms, with
/// the denser boundary dominating: every edge of `sparse` is an edge of
/// `dense`.
#[derive(Clone, Debug)]
pub struct CoupledEnsembles {
    pub dense: PathEnsemble,
    pub sparse: PathEnsemble,
    pub seed: u64,
}

/// Samples both boundary data from the same noise. Requires the dense law to
/// dominate the sparse law pointwise on every slot of the rectangle.
pub fn basic_couple(
    params: &Params,
    dense: &BoundarySpec,
    sparse: &BoundarySpec,
    dims: (u32, u32),
    noise: &NoiseField,
) -> Result<CoupledEnsembles> {
    if let Some(slot) = dense.first_non_dominated(sparse, dims) {
        return Err(Error::NonDominatingBoundary {
            slot: slot.to_string(),
        });
    }
    let xi = sample_ensemble(params, dense, dims, noise)?;
    let eta = sample_ensemble(params, sparse, dims, noise)?;
    debug_assert!(xi.dominates(&eta));
    Ok(CoupledEnsembles {
        dense: xi,
        sparse: eta,
        seed: noise.seed(),
    })
}

impl CoupledEnsembles {
    pub fn dims(&self) -> (u32, u32) {
        self.dense.dims()
    }

    /// Edgewise check of the coupling invariant.
    pub fn check_domination(&self) -> Result<()> {
        match self.dense.first_domination_violation(&self.sparse) {
            None => Ok(()),
            Some(at) => Err(Error::DominationViolated { at }),
        }
    }
}
