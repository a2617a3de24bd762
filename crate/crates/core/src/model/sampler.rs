use super::{BoundarySlot, BoundarySpec, ModelParams, PathEnsemble};
use crate::noise::{Channel, NoiseField};
use crate::Result;

/// An arrow is present when its uniform falls strictly below the probability.
/// Strict comparison keeps both degenerate laws exact (p = 0 never fires,
/// p = 1 always does) and `{u < p} ⊆ {u < q}` for p <= q is the monotone
/// coupling every domination argument rests on.
#[inline(always)]
fn bernoulli(u: f64, p: f64) -> bool {
    u < p
}

#[inline(always)]
fn west_entry(boundary: &BoundarySpec, noise: &NoiseField, j: u32) -> bool {
    bernoulli(
        noise.uniform_at(Channel::BoundaryWest, (0, j as i64), 0),
        boundary.prob(BoundarySlot::West(j)),
    )
}

#[inline(always)]
fn south_entry(boundary: &BoundarySpec, noise: &NoiseField, i: u32) -> bool {
    bernoulli(
        noise.uniform_at(Channel::BoundarySouth, (i as i64, 0), 0),
        boundary.prob(BoundarySlot::South(i)),
    )
}

/// Per-row keys for the two vertex channels. Vertex draws are keyed
/// `(row, column)` so a row scan folds the row coordinate once.
struct RowKeys {
    v: crate::noise::NoiseKey,
    h: crate::noise::NoiseKey,
}

impl RowKeys {
    #[inline(always)]
    fn new(noise: &NoiseField, j: u32) -> Self {
        RowKeys {
            v: noise.key(Channel::VertexV, j as i64),
            h: noise.key(Channel::VertexH, j as i64),
        }
    }
}

/// Resolves one vertex given its incoming edges, drawing the vertex uniform
/// only for the single-arrow configurations. Returns `(out_h, out_v)`.
#[inline(always)]
fn resolve_vertex(
    params: &ModelParams,
    keys: &RowKeys,
    i: u32,
    in_h: bool,
    in_v: bool,
) -> (bool, bool) {
    match (in_h, in_v) {
        (false, false) => (false, false),
        (true, true) => (true, true),
        (false, true) => {
            let straight = bernoulli(keys.v.uniform(i as i64, 0), params.delta1);
            (!straight, straight)
        }
        (true, false) => {
            let straight = bernoulli(keys.h.uniform(i as i64, 0), params.delta2);
            (straight, !straight)
        }
    }
}

/// The uniform a lone vertical arrow at `(i, j)` compares against `delta1`;
/// the second-class constructions read the same draw.
#[inline(always)]
pub(crate) fn vertex_uniform_v(noise: &NoiseField, i: u32, j: u32) -> f64 {
    noise.uniform_at(Channel::VertexV, (j as i64, i as i64), 0)
}

/// The uniform a lone horizontal arrow at `(i, j)` compares against `delta2`.
#[inline(always)]
pub(crate) fn vertex_uniform_h(noise: &NoiseField, i: u32, j: u32) -> f64 {
    noise.uniform_at(Channel::VertexH, (j as i64, i as i64), 0)
}

/// Samples the rectangle row-major, left to right. Each vertex depends only
/// on its south and west neighbours, so this schedule is distributionally
/// identical to the antidiagonal wavefront. Fully deterministic given
/// `(params, boundary, dims, noise)`.
pub fn sample_ensemble(
    params: &ModelParams,
    boundary: &BoundarySpec,
    dims: (u32, u32),
    noise: &NoiseField,
) -> Result<PathEnsemble> {
    let mut ens = PathEnsemble::empty(dims)?;
    sample_ensemble_into(&mut ens, params, boundary, noise);
    Ok(ens)
}

/// Same as [`sample_ensemble`] but reuses the allocation.
pub fn sample_ensemble_into(
    ens: &mut PathEnsemble,
    params: &ModelParams,
    boundary: &BoundarySpec,
    noise: &NoiseField,
) {
    let (x_max, y_max) = ens.dims();
    for i in 1..=x_max {
        ens.set_v(i, 1, south_entry(boundary, noise, i));
    }
    for j in 1..=y_max {
        let keys = RowKeys::new(noise, j);
        let mut carry = west_entry(boundary, noise, j);
        ens.set_h(1, j, carry);
        for i in 1..=x_max {
            let (out_h, out_v) = resolve_vertex(params, &keys, i, carry, ens.v(i, j));
            ens.set_v(i, j + 1, out_v);
            ens.set_h(i + 1, j, out_h);
            carry = out_h;
        }
    }
}

/// Streaming sampler returning only `H(x_max, y_max) = E - S`; O(x) memory,
/// no bit planes. Distribution and noise consumption are identical to
/// [`sample_ensemble`].
pub fn sample_height(
    params: &ModelParams,
    boundary: &BoundarySpec,
    dims: (u32, u32),
    noise: &NoiseField,
) -> Result<i64> {
    let (x_max, y_max) = dims;
    if x_max == 0 || y_max == 0 || x_max == u32::MAX || y_max == u32::MAX {
        return Err(crate::Error::DimensionOverflow { x: x_max, y: y_max });
    }
    let mut row: Vec<bool> = (1..=x_max)
        .map(|i| south_entry(boundary, noise, i))
        .collect();
    let s = row.iter().filter(|&&b| b).count() as i64;
    let mut e = 0i64;
    for j in 1..=y_max {
        let keys = RowKeys::new(noise, j);
        let mut carry = west_entry(boundary, noise, j);
        for (idx, cell) in row.iter_mut().enumerate() {
            let (out_h, out_v) = resolve_vertex(params, &keys, idx as u32 + 1, carry, *cell);
            *cell = out_v;
            carry = out_h;
        }
        e += carry as i64;
    }
    Ok(e - s)
}
