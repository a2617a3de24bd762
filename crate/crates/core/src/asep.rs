//! Continuous-time ASEP on a finite window under the graphical construction.
//!
//! Each directed edge carries an independent exponential clock stream: rate
//! `L` leftward, `R` rightward. A ring moves the particle when the target is
//! empty; jumps across the window boundary are suppressed. Shared clock
//! streams are what couple ordered configurations and drive the second-class
//! particle. The current `J_t(x)` is the net flux across the segment from
//! `(0, 1/2)` to `(t, x + 1/2)`; `J_t(0)` counts signed crossings of the
//! edge `(0, 1)`.
//!
//! The convention is pinned: `L` is the leftward rate and `R` the rightward
//! rate. That choice is not an assumption; the degeneration check (S6V with
//! `delta1 = eps L`, `delta2 = eps R` against the ASEP current) only matches
//! under it, and the acceptance suite runs that comparison.

use crate::analytics::stationary_pair;
use crate::model::{
    derive_params, sample_ensemble, sample_height, BoundarySlot, BoundarySpec, PathEnsemble,
};
use crate::noise::{Channel, NoiseField};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// Default extra padding beyond the influence cone.
pub const DEFAULT_WINDOW_MARGIN: i64 = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsepConfig {
    /// Rate of jumps `i -> i - 1`.
    pub left_rate: f64,
    /// Rate of jumps `i -> i + 1`.
    pub right_rate: f64,
    /// Bernoulli density of the initial data.
    pub density: f64,
    /// Time horizon.
    pub horizon: f64,
    /// Inclusive site range `[lo, hi]`.
    pub window: (i64, i64),
    /// Sites whose current is observed.
    pub observe_sites: Vec<i64>,
}

impl AsepConfig {
    /// Builds a config whose window covers the influence cone:
    /// half-width `max |x| + ceil(4 (L + R) T) + margin`.
    pub fn with_window_for(
        left_rate: f64,
        right_rate: f64,
        density: f64,
        horizon: f64,
        observe_sites: Vec<i64>,
        margin: i64,
    ) -> Self {
        let reach = observe_sites.iter().map(|x| x.abs()).max().unwrap_or(0);
        let cone = (4.0 * (left_rate + right_rate) * horizon).ceil() as i64;
        let half = reach + cone + margin;
        AsepConfig {
            left_rate,
            right_rate,
            density,
            horizon,
            window: (-half, half),
            observe_sites,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let reach = self.observe_sites.iter().map(|x| x.abs()).max().unwrap_or(0);
        let required =
            reach + (4.0 * (self.left_rate + self.right_rate) * self.horizon).ceil() as i64;
        let got = (-self.window.0).min(self.window.1);
        if got < required {
            return Err(Error::WindowTooSmall { required, got });
        }
        if !(0.0..=1.0).contains(&self.density) {
            return Err(Error::ProbabilityOutOfRange {
                name: "density",
                value: self.density,
            });
        }
        Ok(())
    }

    fn width(&self) -> usize {
        (self.window.1 - self.window.0 + 1) as usize
    }
}

/// Occupations on the window plus the current counters.
#[derive(Clone, Debug)]
pub struct AsepState {
    window: (i64, i64),
    occupation: Vec<bool>,
    initial: Vec<bool>,
    /// Net signed crossings of each edge `(i, i + 1)`, indexed like sites.
    crossings: Vec<i64>,
    pub time: f64,
    pub events: u64,
}

impl AsepState {
    fn new(config: &AsepConfig, occupation: Vec<bool>) -> Self {
        AsepState {
            window: config.window,
            initial: occupation.clone(),
            crossings: vec![0; occupation.len()],
            occupation,
            time: 0.0,
            events: 0,
        }
    }

    #[inline]
    fn idx(&self, site: i64) -> usize {
        (site - self.window.0) as usize
    }

    pub fn window(&self) -> (i64, i64) {
        self.window
    }

    pub fn occupied(&self, site: i64) -> bool {
        self.occupation[self.idx(site)]
    }

    pub fn initially_occupied(&self, site: i64) -> bool {
        self.initial[self.idx(site)]
    }

    /// Net signed crossings of the edge `(x, x + 1)` so far.
    pub fn edge_crossings(&self, x: i64) -> i64 {
        self.crossings[self.idx(x)]
    }

    /// `J_t(x) = J_t(0) - sum_{j=1}^{x} eta_j(t)`, extended to negative `x`
    /// by adding the occupation sum instead.
    pub fn current(&self, x: i64) -> i64 {
        let j0 = self.crossings[self.idx(0)];
        match x.cmp(&0) {
            Ordering::Equal => j0,
            Ordering::Greater => j0 - (1..=x).filter(|&j| self.occupied(j)).count() as i64,
            Ordering::Less => j0 + (x + 1..=0).filter(|&j| self.occupied(j)).count() as i64,
        }
    }

    /// Same current through the conservation route:
    /// `J_t(x) = C_x(t) - sum_{j=1}^{x} eta_j(0)`; exact equality with
    /// [`Self::current`] is an executable invariant.
    pub fn current_via_edge(&self, x: i64) -> i64 {
        let c = self.crossings[self.idx(x)];
        match x.cmp(&0) {
            Ordering::Equal => c,
            Ordering::Greater => {
                c - (1..=x).filter(|&j| self.initially_occupied(j)).count() as i64
            }
            Ordering::Less => {
                c + (x + 1..=0).filter(|&j| self.initially_occupied(j)).count() as i64
            }
        }
    }

    fn apply_jump(&mut self, from: i64, to: i64) {
        let (fi, ti) = (self.idx(from), self.idx(to));
        debug_assert!(self.occupation[fi] && !self.occupation[ti]);
        self.occupation[fi] = false;
        self.occupation[ti] = true;
        if to == from + 1 {
            self.crossings[fi] += 1;
        } else {
            self.crossings[ti] -= 1;
        }
    }

    pub fn occupation(&self) -> &[bool] {
        &self.occupation
    }
}

/// Drives the superposed Poisson clock field, invoking the handler with each
/// jump instruction `(time, from, to)` whose target stays inside the window.
///
/// The union of the per-directed-edge exponential clocks is a Poisson field
/// of total rate `(L + R) * width`: event counts per time slice follow the
/// Poisson law (sampled exactly by the Knuth product method) and each event
/// carries an independent stream mark weighted by the rates. Conditional on
/// the counts, marks are exchangeable, so consuming them in generation order
/// is distributionally identical to time-ordering the clocks while staying
/// O(1) per event. The handler time is the upper edge of the event's slice.
fn run_clocks(config: &AsepConfig, noise: &NoiseField, mut handle: impl FnMut(f64, i64, i64)) {
    let (lo, hi) = config.window;
    let width = config.width() as f64;
    let (l, r) = (config.left_rate, config.right_rate);
    let total_rate = (l + r) * width;
    if total_rate <= 0.0 || config.horizon <= 0.0 {
        return;
    }
    // Slices sized for ~32 events keep the product-method threshold well
    // inside f64 range.
    let slices = (total_rate * config.horizon / 32.0).ceil().max(1.0) as u64;
    let mu = total_rate * config.horizon / slices as f64;
    let threshold = (-mu).exp();
    let p_left = l / (l + r);
    for k in 0..slices {
        let t_slice = config.horizon * (k as f64 + 1.0) / slices as f64;
        let key = noise.key(Channel::AsepTime, k as i64);
        let mut product = 1.0f64;
        let mut draws = 0u64;
        let mut events = 0u64;
        loop {
            product *= key.uniform(0, draws);
            draws += 1;
            if product < threshold {
                break;
            }
            events += 1;
        }
        for j in 0..events {
            let u = key.uniform(1, j);
            let (site, dir) = if u < p_left {
                let v = u / p_left;
                ((lo + (v * width) as i64).min(hi), -1i64)
            } else {
                let v = (u - p_left) / (1.0 - p_left);
                ((lo + (v * width) as i64).min(hi), 1i64)
            };
            let target = site + dir;
            if target >= lo && target <= hi {
                handle(t_slice, site, target);
            }
        }
    }
}

fn bernoulli_window(
    config: &AsepConfig,
    noise: &NoiseField,
    forced_empty: Option<i64>,
) -> Vec<bool> {
    (config.window.0..=config.window.1)
        .map(|site| {
            if forced_empty == Some(site) {
                false
            } else {
                noise.uniform_at(Channel::AsepEdge, (site, 0), 0) < config.density
            }
        })
        .collect()
}

/// Runs the ASEP with Bernoulli initial data; deterministic given
/// `(config, seed)`.
pub fn asep_simulate(config: &AsepConfig, noise: &NoiseField) -> Result<AsepState> {
    config.validate()?;
    let mut state = AsepState::new(config, bernoulli_window(config, noise, None));
    run_clocks(config, noise, |t, from, to| {
        state.time = t;
        state.events += 1;
        if state.occupied(from) && !state.occupied(to) {
            state.apply_jump(from, to);
        }
    });
    state.time = config.horizon;
    Ok(state)
}

/// Result of the second-class run: the base process and the discrepancy
/// endpoint.
#[derive(Clone, Debug)]
pub struct SecondClassRun {
    pub base: AsepState,
    /// Final position `Q(T)` of the discrepancy started at the origin.
    pub q: i64,
}

/// Basic coupling of `eta <= zeta` differing only at the origin: `eta` has
/// Bernoulli data with the origin vacated, `zeta` adds the origin particle.
/// The discrepancy position under shared clocks is the second-class
/// particle; a first-class particle jumping onto it swaps places with it.
pub fn asep_second_class(config: &AsepConfig, noise: &NoiseField) -> Result<SecondClassRun> {
    config.validate()?;
    let mut eta = AsepState::new(config, bernoulli_window(config, noise, Some(0)));
    let mut q: i64 = 0;
    run_clocks(config, noise, |t, from, to| {
        eta.time = t;
        eta.events += 1;
        if eta.occupied(from) {
            if !eta.occupied(to) {
                if to == q {
                    // zeta blocks the first-class jump; in the pair picture
                    // the particles swap and the discrepancy moves to `from`.
                    q = from;
                } else {
                    eta.apply_jump(from, to);
                }
            }
        } else if from == q && !eta.occupied(to) {
            q = to;
        }
    });
    eta.time = config.horizon;
    Ok(SecondClassRun { base: eta, q })
}

/// Two full configurations under shared clocks, the denser initial law
/// dominating. Returns both states and the number of ordering violations
/// observed after events (zero exactly when attractivity holds).
pub fn asep_coupled_pair(
    config: &AsepConfig,
    dense_density: f64,
    noise: &NoiseField,
) -> Result<(AsepState, AsepState, u64)> {
    config.validate()?;
    if !(config.density..=1.0).contains(&dense_density) {
        return Err(Error::ProbabilityOutOfRange {
            name: "dense_density",
            value: dense_density,
        });
    }
    let sparse_init = bernoulli_window(config, noise, None);
    let dense_init: Vec<bool> = (config.window.0..=config.window.1)
        .map(|site| noise.uniform_at(Channel::AsepEdge, (site, 0), 0) < dense_density)
        .collect();
    let mut sparse = AsepState::new(config, sparse_init);
    let mut dense = AsepState::new(config, dense_init);
    let mut violations = 0u64;
    run_clocks(config, noise, |t, from, to| {
        for state in [&mut sparse, &mut dense] {
            state.time = t;
            state.events += 1;
            if state.occupied(from) && !state.occupied(to) {
                state.apply_jump(from, to);
            }
        }
        let ordered = sparse
            .occupation
            .iter()
            .zip(&dense.occupation)
            .all(|(s, d)| !s | d);
        if !ordered {
            violations += 1;
        }
    });
    sparse.time = config.horizon;
    dense.time = config.horizon;
    Ok((sparse, dense, violations))
}

/// Parameters of one degeneration comparison: the S6V with
/// `delta1 = eps L`, `delta2 = eps R` on a box of height `floor(t / eps)`
/// against the ASEP at time `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegenerationSpec {
    pub epsilon: f64,
    pub left_rate: f64,
    pub right_rate: f64,
    pub density: f64,
    pub time: f64,
    /// Offset `x`: the height is read at `(x + floor(t/eps), floor(t/eps))`.
    pub x_offset: i64,
}

/// One S6V sample in the degeneration scaling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegenerationSample {
    /// `H^{(b1, b2)}(x + floor(t/eps), floor(t/eps))`, the current analogue.
    pub height: i64,
    pub x: u32,
    pub y: u32,
    pub b1: f64,
}

impl DegenerationSpec {
    pub fn vertex_probs(&self) -> Result<(f64, f64)> {
        let d1 = self.epsilon * self.left_rate;
        let d2 = self.epsilon * self.right_rate;
        for (name, v) in [("epsilon * L", d1), ("epsilon * R", d2)] {
            if !(0.0 < v && v < 1.0) {
                return Err(Error::ProbabilityOutOfRange { name, value: v });
            }
        }
        Ok((d1, d2))
    }

    pub fn box_dims(&self) -> Result<(u32, u32)> {
        let y = (self.time / self.epsilon).floor() as i64;
        let x = y + self.x_offset;
        if y < 1 || x < 1 {
            return Err(Error::DimensionOverflow {
                x: x.max(0) as u32,
                y: y.max(0) as u32,
            });
        }
        Ok((x as u32, y as u32))
    }
}

/// Samples the offset S6V height whose law converges to the ASEP current
/// `J_t(x_offset)` as `epsilon` goes to zero.
pub fn degeneration_run(spec: &DegenerationSpec, noise: &NoiseField) -> Result<DegenerationSample> {
    let (d1, d2) = spec.vertex_probs()?;
    let params = derive_params(d1, d2, None);
    let b1 = stationary_pair(spec.density, &params)?;
    let (x, y) = spec.box_dims()?;
    let boundary = BoundarySpec::two_sided(b1, spec.density);
    let height = sample_height(&params, &boundary, (x, y), noise)?;
    Ok(DegenerationSample { height, x, y, b1 })
}

/// Samples a full box under the degeneration scaling, for particle-level
/// observables.
pub fn degeneration_ensemble(
    spec: &DegenerationSpec,
    noise: &NoiseField,
) -> Result<(PathEnsemble, f64)> {
    let (d1, d2) = spec.vertex_probs()?;
    let params = derive_params(d1, d2, None);
    let b1 = stationary_pair(spec.density, &params)?;
    let (x, y) = spec.box_dims()?;
    let boundary = BoundarySpec::two_sided(b1, spec.density);
    Ok((sample_ensemble(&params, &boundary, (x, y), noise)?, b1))
}

/// Offset particle positions `q_i = p_i - y` read off a sampled box: `p_i`
/// is the column where tagged particle `i` crosses from the top row out of
/// the box, or `None` if it leaves east first. Label `i >= 1` is the `i`-th
/// south entry from the left; label `i <= 0` is the `(1 - i)`-th west entry
/// from the bottom.
pub fn offset_positions(ensemble: &PathEnsemble, labels: &[i64]) -> Vec<(i64, Option<i64>)> {
    let (x_max, y_max) = ensemble.dims();
    let mut south_entries = Vec::new();
    let mut west_entries = Vec::new();
    for i in 1..=x_max {
        if ensemble.v(i, 1) {
            south_entries.push(BoundarySlot::South(i));
        }
    }
    for j in 1..=y_max {
        if ensemble.h(1, j) {
            west_entries.push(BoundarySlot::West(j));
        }
    }
    labels
        .iter()
        .map(|&label| {
            let slot = if label >= 1 {
                south_entries.get(label as usize - 1).copied()
            } else {
                west_entries.get((-label) as usize).copied()
            };
            let p = slot.and_then(|s| particle_crossing_column(ensemble, s));
            (label, p.map(|col| col as i64 - y_max as i64))
        })
        .collect()
}

/// Follows a black path from its entry slot until it steps north out of the
/// box, returning that column.
fn particle_crossing_column(ens: &PathEnsemble, origin: BoundarySlot) -> Option<u32> {
    let (x_max, y_max) = ens.dims();
    let (mut i, mut j, mut from_west) = match origin {
        BoundarySlot::West(j) => (1, j, true),
        BoundarySlot::South(i) => (i, 1, false),
    };
    loop {
        let both_in = ens.h(i, j) && ens.v(i, j);
        // Non-crossing reading of the doubly occupied vertex: the west
        // arrival leaves north, the south arrival leaves east.
        let go_north = if both_in { from_west } else { ens.v(i, j + 1) };
        if go_north {
            if j == y_max {
                return Some(i);
            }
            j += 1;
            from_west = false;
        } else {
            if i == x_max {
                return None;
            }
            i += 1;
            from_west = true;
        }
    }
}
