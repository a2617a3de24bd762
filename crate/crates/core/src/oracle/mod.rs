//! Exact ground truth on tiny lattices.
//!
//! Walks the same row-major schedule as the sampler, branching on every
//! boundary entry and every single-arrow vertex, carrying the branch weight.
//! Code-path parity with the sampler keeps conventions aligned; the cap
//! `x * y <= 16` keeps the walk tractable.

mod weight;

pub use num_rational::BigRational;
pub use weight::Weight;

use crate::model::{BoundarySlot, BoundarySpec, HeightDecomposition, ModelParams, PathEnsemble, VertexConfig};
use crate::{Error, Result};
use std::collections::BTreeMap;

/// Enumeration cap on `x * y`.
pub const ENUMERATION_CAP: u64 = 16;

fn check_cap(dims: (u32, u32)) -> Result<()> {
    if dims.0 as u64 * dims.1 as u64 > ENUMERATION_CAP {
        Err(Error::EnumerationCap {
            x: dims.0,
            y: dims.1,
        })
    } else {
        Ok(())
    }
}

struct Enumerator<'a, W: Weight, F: FnMut(&PathEnsemble, &W)> {
    boundary: &'a BoundarySpec,
    dims: (u32, u32),
    delta1: f64,
    delta2: f64,
    d1: W,
    d1c: W,
    d2: W,
    d2c: W,
    ens: PathEnsemble,
    visit: F,
}

impl<'a, W: Weight, F: FnMut(&PathEnsemble, &W)> Enumerator<'a, W, F> {
    /// Branch on a Bernoulli(p) decision, skipping zero-weight sides so
    /// deterministic laws do not double the tree.
    fn bernoulli_branch(&mut self, p: f64, weight: &W, mut k: impl FnMut(&mut Self, bool, W)) {
        if p > 0.0 {
            let w = weight.mul(&W::from_f64(p));
            k(self, true, w);
        }
        if p < 1.0 {
            let w = weight.mul(&W::one().sub(&W::from_f64(p)));
            k(self, false, w);
        }
    }

    fn south(&mut self, i: u32, weight: W) {
        if i > self.dims.0 {
            self.row(1, weight);
            return;
        }
        let p = self.boundary.prob(BoundarySlot::South(i));
        self.bernoulli_branch(p, &weight.clone(), |this, present, w| {
            this.ens.set_v(i, 1, present);
            this.south(i + 1, w);
        });
    }

    fn row(&mut self, j: u32, weight: W) {
        if j > self.dims.1 {
            (self.visit)(&self.ens, &weight);
            return;
        }
        let p = self.boundary.prob(BoundarySlot::West(j));
        self.bernoulli_branch(p, &weight.clone(), |this, present, w| {
            this.ens.set_h(1, j, present);
            this.cell(j, 1, w);
        });
    }

    fn cell(&mut self, j: u32, i: u32, weight: W) {
        if i > self.dims.0 {
            self.row(j + 1, weight);
            return;
        }
        let in_h = self.ens.h(i, j);
        let in_v = self.ens.v(i, j);
        match (in_h, in_v) {
            (false, false) | (true, true) => {
                self.ens.set_h(i + 1, j, in_h);
                self.ens.set_v(i, j + 1, in_v);
                self.cell(j, i + 1, weight);
            }
            (false, true) => {
                // Lone vertical arrow: straight with probability delta1.
                let (d1, d1c) = (self.d1.clone(), self.d1c.clone());
                if self.delta1 > 0.0 {
                    self.ens.set_v(i, j + 1, true);
                    self.ens.set_h(i + 1, j, false);
                    self.cell(j, i + 1, weight.mul(&d1));
                }
                if self.delta1 < 1.0 {
                    self.ens.set_v(i, j + 1, false);
                    self.ens.set_h(i + 1, j, true);
                    self.cell(j, i + 1, weight.mul(&d1c));
                }
            }
            (true, false) => {
                // Lone horizontal arrow: straight with probability delta2.
                let (d2, d2c) = (self.d2.clone(), self.d2c.clone());
                if self.delta2 > 0.0 {
                    self.ens.set_h(i + 1, j, true);
                    self.ens.set_v(i, j + 1, false);
                    self.cell(j, i + 1, weight.mul(&d2));
                }
                if self.delta2 < 1.0 {
                    self.ens.set_h(i + 1, j, false);
                    self.ens.set_v(i, j + 1, true);
                    self.cell(j, i + 1, weight.mul(&d2c));
                }
            }
        }
    }
}

/// Visits every outcome of the boxed model with its exact probability.
/// Weights over all visits sum to one.
pub fn enumerate<W: Weight>(
    params: &ModelParams,
    boundary: &BoundarySpec,
    dims: (u32, u32),
    visit: impl FnMut(&PathEnsemble, &W),
) -> Result<()> {
    check_cap(dims)?;
    let mut e = Enumerator {
        boundary,
        dims,
        delta1: params.delta1,
        delta2: params.delta2,
        d1: W::from_f64(params.delta1),
        d1c: W::one().sub(&W::from_f64(params.delta1)),
        d2: W::from_f64(params.delta2),
        d2c: W::one().sub(&W::from_f64(params.delta2)),
        ens: PathEnsemble::empty(dims)?,
        visit,
    };
    e.south(1, W::one());
    Ok(())
}

/// A finite exact probability mass function over integer values.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactDistribution<W: Weight> {
    pub support: Vec<i64>,
    pub probs: Vec<W>,
}

impl<W: Weight> ExactDistribution<W> {
    fn from_map(map: BTreeMap<i64, W>) -> Self {
        let (support, probs) = map.into_iter().unzip();
        ExactDistribution { support, probs }
    }

    pub fn total(&self) -> W {
        self.probs
            .iter()
            .fold(W::zero(), |acc, p| acc.add(p))
    }

    pub fn prob_of(&self, value: i64) -> W {
        match self.support.binary_search(&value) {
            Ok(idx) => self.probs[idx].clone(),
            Err(_) => W::zero(),
        }
    }

    pub fn mean(&self) -> f64 {
        self.support
            .iter()
            .zip(&self.probs)
            .map(|(h, p)| *h as f64 * p.to_f64())
            .sum()
    }

    pub fn to_f64(&self) -> ExactDistribution<f64> {
        ExactDistribution {
            support: self.support.clone(),
            probs: self.probs.iter().map(Weight::to_f64).collect(),
        }
    }
}

/// Exact pmf of the height `H(x, y)`.
pub fn exact_height_dist<W: Weight>(
    params: &ModelParams,
    boundary: &BoundarySpec,
    x: u32,
    y: u32,
) -> Result<ExactDistribution<W>> {
    let mut acc: BTreeMap<i64, W> = BTreeMap::new();
    enumerate::<W>(params, boundary, (x, y), |ens, w| {
        let h = ens.boundary_counts(x, y).expect("in range").h;
        acc.entry(h)
            .and_modify(|p| *p = p.add(w))
            .or_insert_with(|| w.clone());
    })?;
    Ok(ExactDistribution::from_map(acc))
}

/// Exact joint pmf of the boundary counts `(W, N, E, S)`.
pub fn exact_joint_counts<W: Weight>(
    params: &ModelParams,
    boundary: &BoundarySpec,
    x: u32,
    y: u32,
) -> Result<Vec<(HeightDecomposition, W)>> {
    let mut acc: BTreeMap<(u32, u32, u32, u32), W> = BTreeMap::new();
    enumerate::<W>(params, boundary, (x, y), |ens, w| {
        let d = ens.boundary_counts(x, y).expect("in range");
        acc.entry((d.w, d.n, d.e, d.s))
            .and_modify(|p| *p = p.add(w))
            .or_insert_with(|| w.clone());
    })?;
    Ok(acc
        .into_iter()
        .map(|((w_, n, e, s), p)| {
            (
                HeightDecomposition {
                    w: w_,
                    n,
                    e,
                    s,
                    h: e as i64 - s as i64,
                },
                p,
            )
        })
        .collect())
}

/// `E[exp(eps * H)]` of a finite pmf.
pub fn exact_mgf<W: Weight>(dist: &ExactDistribution<W>, epsilon: f64) -> f64 {
    dist.support
        .iter()
        .zip(&dist.probs)
        .map(|(h, p)| p.to_f64() * (epsilon * *h as f64).exp())
        .sum()
}

/// Exact probability of each of the six vertex configurations at one vertex.
pub fn exact_vertex_config_dist<W: Weight>(
    params: &ModelParams,
    boundary: &BoundarySpec,
    dims: (u32, u32),
    at: (u32, u32),
) -> Result<[W; 6]> {
    let mut acc = [
        W::zero(),
        W::zero(),
        W::zero(),
        W::zero(),
        W::zero(),
        W::zero(),
    ];
    enumerate::<W>(params, boundary, dims, |ens, w| {
        let cfg = ens.vertex_config(at.0, at.1).expect("conserved vertex");
        let idx = VertexConfig::ALL.iter().position(|c| *c == cfg).unwrap();
        acc[idx] = acc[idx].add(w);
    })?;
    Ok(acc)
}

/// First and pairwise moments of the stationarity family at `(x, y)`:
/// the horizontal entries `phi_h(x, i)` for `y <= i <= y_max` followed by the
/// vertical entries `phi_v(i, y)` for `x <= i <= x_max`.
#[derive(Clone, Debug)]
pub struct FamilyMoments<W: Weight> {
    /// `(is_horizontal, coordinate)` labels, in the order used below.
    pub members: Vec<(bool, u32)>,
    pub first: Vec<W>,
    /// `pairwise[a][b] = E[member_a * member_b]` for `a < b`.
    pub pairwise: Vec<Vec<W>>,
}

pub fn exact_stationary_family<W: Weight>(
    params: &ModelParams,
    boundary: &BoundarySpec,
    dims: (u32, u32),
    x: u32,
    y: u32,
) -> Result<FamilyMoments<W>> {
    let (x_max, y_max) = dims;
    if x == 0 || y == 0 || x > x_max || y > y_max {
        return Err(Error::OutOfRange { x, y, dims });
    }
    let members: Vec<(bool, u32)> = (y..=y_max)
        .map(|i| (true, i))
        .chain((x..=x_max).map(|i| (false, i)))
        .collect();
    let m = members.len();
    let mut first = vec![W::zero(); m];
    let mut pairwise = vec![vec![W::zero(); m]; m];
    enumerate::<W>(params, boundary, dims, |ens, w| {
        let vals: Vec<bool> = members
            .iter()
            .map(|&(horiz, i)| if horiz { ens.h(x, i) } else { ens.v(i, y) })
            .collect();
        for a in 0..m {
            if vals[a] {
                first[a] = first[a].add(w);
                for b in a + 1..m {
                    if vals[b] {
                        pairwise[a][b] = pairwise[a][b].add(w);
                    }
                }
            }
        }
    })?;
    Ok(FamilyMoments {
        members,
        first,
        pairwise,
    })
}

/// Exact two-point value and the Laplacian route, on one enumeration of the
/// `(x+1, y)` box:
/// `S(y, x) = Cov(phi_v(x+1, y+1), phi_v(1, 1))` and
/// `lap = Var H(x+1,y) + Var H(x-1,y) - 2 Var H(x,y)`.
///
/// The indicator sits one column right of the Laplacian center: the origin
/// indicator is the column-1 entry, so ASEP site `k` corresponds to column
/// `k + 1`, and `lap = 2 S` holds exactly with this pairing.
#[derive(Clone, Debug)]
pub struct TwoPointExact<W: Weight> {
    pub s_value: W,
    pub laplacian: W,
    /// `lap - 2 S`, identically zero in exact arithmetic.
    pub residual: W,
}

pub fn exact_two_point<W: Weight>(
    params: &ModelParams,
    b1: f64,
    b2: f64,
    x: u32,
    y: u32,
) -> Result<TwoPointExact<W>> {
    if x < 2 {
        return Err(Error::TwoPointNeedsInterior { x });
    }
    let boundary = BoundarySpec::two_sided(b1, b2);
    let dims = (x + 1, y);
    let mut m1 = [W::zero(), W::zero(), W::zero()];
    let mut m2 = [W::zero(), W::zero(), W::zero()];
    let mut pp = W::zero();
    let mut p_top = W::zero();
    let mut p_origin = W::zero();
    enumerate::<W>(params, &boundary, dims, |ens, w| {
        for (k, xx) in [x - 1, x, x + 1].into_iter().enumerate() {
            let h = ens.boundary_counts(xx, y).expect("in range").h;
            let hw = W::from_f64(h as f64);
            m1[k] = m1[k].add(&hw.mul(w));
            m2[k] = m2[k].add(&hw.mul(&hw).mul(w));
        }
        let top = ens.v(x + 1, y + 1);
        let origin = ens.v(1, 1);
        if top {
            p_top = p_top.add(w);
            if origin {
                pp = pp.add(w);
            }
        }
        if origin {
            p_origin = p_origin.add(w);
        }
    })?;
    let var = |k: usize| m2[k].sub(&m1[k].mul(&m1[k]));
    let laplacian = var(2).add(&var(0)).sub(&var(1)).sub(&var(1));
    let s_value = pp.sub(&p_top.mul(&p_origin));
    let residual = laplacian.sub(&s_value).sub(&s_value);
    Ok(TwoPointExact {
        s_value,
        laplacian,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics;
    use crate::model::derive_params;
    use num_rational::BigRational;

    type Rat = BigRational;

    #[test]
    fn one_by_one_step_matches_hand_enumeration() {
        let p = derive_params(0.6, 0.2, None);
        let d = exact_height_dist::<f64>(&p, &BoundarySpec::step(), 1, 1).unwrap();
        assert_eq!(d.support, vec![-1, 0]);
        assert!((d.probs[0] - 0.6).abs() < 1e-15);
        assert!((d.probs[1] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn all_absent_boundary_is_point_mass_at_zero() {
        let p = derive_params(0.6, 0.2, None);
        let d = exact_height_dist::<Rat>(&p, &BoundarySpec::empty(), 2, 2).unwrap();
        assert_eq!(d.support, vec![0]);
        assert_eq!(d.probs[0], <Rat as Weight>::one());
    }

    #[test]
    fn one_by_one_bernoulli_four_case_enumeration() {
        let p = derive_params(0.6, 0.2, None);
        let b = BoundarySpec::two_sided(0.5, 0.5);
        let d = exact_height_dist::<f64>(&p, &b, 1, 1).unwrap();
        assert_eq!(d.support, vec![-1, 0, 1]);
        assert!((d.prob_of(-1) - 0.15).abs() < 1e-15);
        assert!((d.prob_of(0) - 0.8).abs() < 1e-15);
        assert!((d.prob_of(1) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn probabilities_sum_to_one_exactly() {
        let p = derive_params(0.55, 0.15, None);
        let b = BoundarySpec::two_sided(0.41, 0.73);
        let d = exact_height_dist::<Rat>(&p, &b, 3, 3).unwrap();
        assert_eq!(d.total(), <Rat as Weight>::one());
        let f = exact_height_dist::<f64>(&p, &b, 3, 3).unwrap();
        assert!((f.total() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cap_enforced() {
        let p = derive_params(0.5, 0.1, None);
        assert!(matches!(
            exact_height_dist::<f64>(&p, &BoundarySpec::step(), 5, 4),
            Err(Error::EnumerationCap { .. })
        ));
    }

    #[test]
    fn mgf_at_zero_is_one_and_symmetry() {
        let p = derive_params(0.6, 0.2, None);
        let b = BoundarySpec::two_sided(0.5, 0.5);
        let d = exact_height_dist::<Rat>(&p, &b, 2, 2).unwrap();
        assert!((exact_mgf(&d, 0.0) - 1.0).abs() < 1e-14);
        // Symmetric pmf: equal MGF at +/- eps.
        let sym = ExactDistribution::<f64> {
            support: vec![-2, 0, 2],
            probs: vec![0.25, 0.5, 0.25],
        };
        assert!((exact_mgf(&sym, 0.7) - exact_mgf(&sym, -0.7)).abs() < 1e-14);
    }

    #[test]
    fn one_by_one_mgf_matches_closed_form_value() {
        // E[e^{eps H}] with eps = ln(1/2): 0.05 * 0.5 + 0.15 * 2 + 0.8 = 1.125.
        let p = derive_params(0.6, 0.2, None);
        let b = BoundarySpec::two_sided(0.5, 0.5);
        let d = exact_height_dist::<Rat>(&p, &b, 1, 1).unwrap();
        let eps = 0.5f64.ln();
        assert!((exact_mgf(&d, eps) - 1.125).abs() < 1e-14);
    }

    #[test]
    fn joint_counts_satisfy_height_identity() {
        let p = derive_params(0.7, 0.25, None);
        let b = BoundarySpec::two_sided(0.3, 0.6);
        for (d, _) in exact_joint_counts::<f64>(&p, &b, 3, 2).unwrap() {
            assert_eq!(d.e as i64 - d.s as i64, d.w as i64 - d.n as i64);
        }
    }

    #[test]
    fn stationary_family_is_product_bernoulli() {
        // Under the stationary boundary every member of the family at
        // (x, y) is Bernoulli(b1) or Bernoulli(b2) and pairwise moments
        // factorize. Tolerance covers only the f64 rounding of the
        // stationary pair itself.
        let p = derive_params(0.6, 0.2, None);
        let b2 = 0.5;
        let b1 = analytics::stationary_pair(b2, &p).unwrap();
        let b = BoundarySpec::two_sided(b1, b2);
        let fam = exact_stationary_family::<Rat>(&p, &b, (3, 3), 2, 2).unwrap();
        for (k, &(horiz, _)) in fam.members.iter().enumerate() {
            let expect = if horiz { b1 } else { b2 };
            assert!(
                (fam.first[k].to_f64() - expect).abs() < 1e-12,
                "marginal {k}"
            );
        }
        for a in 0..fam.members.len() {
            for b_ in a + 1..fam.members.len() {
                let prod = fam.first[a].mul(&fam.first[b_]);
                let diff = fam.pairwise[a][b_].sub(&prod);
                assert!(diff.abs_leq(1e-12), "pair ({a},{b_}) does not factorize");
            }
        }
    }

    #[test]
    fn broken_pair_fails_factorization() {
        // Negative control: beta1 != kappa * beta2 breaks the product form.
        let p = derive_params(0.6, 0.2, None);
        let b = BoundarySpec::two_sided(0.5, 0.5);
        let fam = exact_stationary_family::<Rat>(&p, &b, (3, 3), 2, 2).unwrap();
        let vertical_marginal_off = fam
            .members
            .iter()
            .enumerate()
            .filter(|(_, &(horiz, _))| !horiz)
            .any(|(k, _)| (fam.first[k].to_f64() - 0.5).abs() > 1e-6);
        assert!(vertical_marginal_off);
    }

    #[test]
    fn two_point_identity_exact_on_enumerable_grids() {
        let p = derive_params(0.6, 0.2, None);
        for b2 in [0.3, 0.5] {
            let b1 = analytics::stationary_pair(b2, &p).unwrap();
            for x in 2..=3u32 {
                for y in 1..=3u32 {
                    if (x + 1) * y > 16 {
                        continue;
                    }
                    let tp = exact_two_point::<Rat>(&p, b1, b2, x, y).unwrap();
                    assert!(
                        tp.residual.abs_leq(1e-12),
                        "Laplacian identity off at x={x}, y={y}: {}",
                        tp.residual.to_f64()
                    );
                }
            }
        }
    }

    #[test]
    fn two_point_degenerate_density_is_zero() {
        let p = derive_params(0.6, 0.2, None);
        for b2 in [0.0, 1.0] {
            let b1 = if b2 == 0.0 { 0.0 } else { 1.0 };
            let tp = exact_two_point::<Rat>(&p, b1, b2, 2, 2).unwrap();
            assert!(tp.s_value.is_zero());
        }
    }

    #[test]
    fn two_point_needs_interior_column() {
        let p = derive_params(0.6, 0.2, None);
        assert!(matches!(
            exact_two_point::<f64>(&p, 0.4, 0.5, 1, 2),
            Err(Error::TwoPointNeedsInterior { .. })
        ));
    }
}
