//! Monte Carlo estimators and hypothesis tests.
//!
//! Everything here reduces per-seed results with associative merges so
//! replicates can run on any worker count with identical output. Bound
//! comparisons always report the constants they used; fitted constants are
//! trained and validated on disjoint seed ranges.

mod math;

pub use math::{
    chi_square_gof, chi_square_pvalue, chi_square_two_sample, gammp, gammq, grouped_jackknife,
    jackknife_variance_se, ks_two_sample, ln_gamma, mean, ols, sample_variance, wilson_interval,
    OlsFit,
};

use crate::analytics::{
    characteristic_point, expected_height, stationary_pair, CharacteristicQuery,
};
use crate::asep::{asep_second_class, asep_simulate, degeneration_run, AsepConfig, DegenerationSpec};
use crate::couplings::{
    antiparticle_walk, basic_couple, grey_discrepancies, second_class_direct, ExitSide,
    SecondClassTrace,
};
use crate::model::{sample_ensemble, sample_height, BoundarySlot, BoundarySpec};
use crate::noise::NoiseField;
use crate::oracle::{exact_height_dist, Weight};
use crate::parallel::par_map_indexed;
use crate::{Error, Params, Result};
use serde::{Deserialize, Serialize};

/// Which tail of the observable is being estimated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailSide {
    Upper,
    Lower,
}

/// The second-class constructions that produce an exit point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceMode {
    Direct,
    Antiparticle,
    Discrepancy,
}

/// Observables the tail harness knows how to sample. Heights and currents
/// are centered at their exact stationary means; the second-class exit
/// coordinate is the column where the trace leaves the north side
/// (`+infinity` when it leaves east first).
#[derive(Clone, Debug)]
pub enum Observable {
    CenteredHeight {
        params: Params,
        b1: f64,
        b2: f64,
        x: u32,
        y: u32,
        /// Divides the centered height (1 for raw counts).
        scale: f64,
    },
    SecondClassExitColumn {
        params: Params,
        b1: f64,
        b2: f64,
        dims: (u32, u32),
        v0: BoundarySlot,
        mode: TraceMode,
    },
    AsepCurrent {
        config: AsepConfig,
        x: i64,
    },
    AsepSecondClass {
        config: AsepConfig,
    },
    StepHeight {
        params: Params,
        x: u32,
        y: u32,
        center: f64,
        scale: f64,
    },
}

impl Observable {
    pub fn name(&self) -> String {
        match self {
            Observable::CenteredHeight { x, y, .. } => format!("centered-height({x},{y})"),
            Observable::SecondClassExitColumn { mode, .. } => {
                format!("second-class-exit({mode:?})").to_lowercase()
            }
            Observable::AsepCurrent { x, .. } => format!("asep-current({x})"),
            Observable::AsepSecondClass { .. } => "asep-second-class".into(),
            Observable::StepHeight { x, y, .. } => format!("step-height({x},{y})"),
        }
    }

    /// One replicate. All randomness comes from `noise`.
    pub fn sample(&self, noise: &NoiseField) -> Result<f64> {
        match self {
            Observable::CenteredHeight {
                params,
                b1,
                b2,
                x,
                y,
                scale,
            } => {
                let h = sample_height(params, &BoundarySpec::two_sided(*b1, *b2), (*x, *y), noise)?;
                Ok((h as f64 - expected_height(*b1, *b2, *x, *y)) / scale)
            }
            Observable::SecondClassExitColumn {
                params,
                b1,
                b2,
                dims,
                v0,
                mode,
            } => {
                let trace = sample_trace(params, *b1, *b2, *dims, *v0, *mode, noise)?;
                Ok(match trace.exit.side {
                    ExitSide::North => trace.exit.coordinate as f64,
                    ExitSide::East => f64::INFINITY,
                })
            }
            Observable::AsepCurrent { config, x } => {
                let s = asep_simulate(config, noise)?;
                let b = config.density;
                let mean = b * (1.0 - b) * config.horizon * (config.right_rate - config.left_rate)
                    - b * *x as f64;
                Ok(s.current(*x) as f64 - mean)
            }
            Observable::AsepSecondClass { config } => {
                let run = asep_second_class(config, noise)?;
                let b = config.density;
                let drift = (config.left_rate - config.right_rate)
                    * (2.0 * b - 1.0)
                    * config.horizon;
                Ok(run.q as f64 - drift)
            }
            Observable::StepHeight {
                params,
                x,
                y,
                center,
                scale,
            } => {
                let h = sample_height(params, &BoundarySpec::step(), (*x, *y), noise)?;
                Ok((h as f64 - center) / scale)
            }
        }
    }
}

/// One second-class trace under the requested construction. The boundary law
/// is the `(b1, b2)` two-sided law with the `v0` slot vacated (the
/// anti-particle mode samples the augmented law and reduces it).
pub fn sample_trace(
    params: &Params,
    b1: f64,
    b2: f64,
    dims: (u32, u32),
    v0: BoundarySlot,
    mode: TraceMode,
    noise: &NoiseField,
) -> Result<SecondClassTrace> {
    let vacated = BoundarySpec::two_sided(b1, b2).with_override(v0, false);
    match mode {
        TraceMode::Direct => {
            let eta = sample_ensemble(params, &vacated, dims, noise)?;
            second_class_direct(&eta, params, v0, noise)
        }
        TraceMode::Antiparticle => {
            let augmented = BoundarySpec::two_sided(b1, b2).with_override(v0, true);
            let xi_plus = sample_ensemble(params, &augmented, dims, noise)?;
            antiparticle_walk(&xi_plus, params, v0, noise)
        }
        TraceMode::Discrepancy => {
            let forced = vacated.clone().with_override(v0, true);
            let pair = basic_couple(params, &forced, &vacated, dims, noise)?;
            let mut grey = grey_discrepancies(&pair)?;
            grey.relabel_zero_at(v0)?;
            let path = grey.path_by_label(0).expect("forced discrepancy");
            Ok(SecondClassTrace {
                start: v0,
                vertices: path.vertices.clone(),
                exit: path.exit,
            })
        }
    }
}

/// Empirical tail with Wilson intervals. Probabilities are `P[X > u]`
/// (`P[-X > u]` for the lower side) and are non-increasing in `u` by
/// construction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TailCurve {
    pub observable: String,
    pub side: TailSide,
    pub thresholds: Vec<f64>,
    pub p_hat: Vec<f64>,
    pub ci_lo: Vec<f64>,
    pub ci_hi: Vec<f64>,
    pub n: u64,
    pub seed_range: (u64, u64),
    pub mean: f64,
    pub sd: f64,
}

impl TailCurve {
    /// Fixed CSV schema; the generator version travels in the leading
    /// comment.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# generator={}\n", crate::noise::GENERATOR_VERSION);
        out.push_str("observable,u,p_hat,ci_lo,ci_hi,N,seed_range\n");
        for k in 0..self.thresholds.len() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}..{}\n",
                self.observable,
                self.thresholds[k],
                self.p_hat[k],
                self.ci_lo[k],
                self.ci_hi[k],
                self.n,
                self.seed_range.0,
                self.seed_range.1,
            ));
        }
        out
    }
}

/// Estimates `P[X > u]` over the threshold grid from `n` replicates seeded
/// from `base`.
pub fn estimate_tail(
    obs: &Observable,
    side: TailSide,
    thresholds: &[f64],
    n: u64,
    base: &NoiseField,
    workers: usize,
) -> Result<TailCurve> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let mut thresholds = thresholds.to_vec();
    thresholds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let samples = sample_observable(obs, side, n, base, workers)?;
    let mut counts = vec![0u64; thresholds.len()];
    let (mut s1, mut s2) = (0.0, 0.0);
    let mut finite = 0u64;
    for &v in &samples {
        for (c, &u) in counts.iter_mut().zip(&thresholds) {
            if v > u {
                *c += 1;
            }
        }
        if v.is_finite() {
            s1 += v;
            s2 += v * v;
            finite += 1;
        }
    }
    let mean = s1 / finite.max(1) as f64;
    let sd = ((s2 / finite.max(1) as f64 - mean * mean).max(0.0)).sqrt();
    let (mut p_hat, mut ci_lo, mut ci_hi) = (Vec::new(), Vec::new(), Vec::new());
    for &c in &counts {
        let (lo, hi) = wilson_interval(c, n, 3.0);
        p_hat.push(c as f64 / n as f64);
        ci_lo.push(lo);
        ci_hi.push(hi);
    }
    Ok(TailCurve {
        observable: obs.name(),
        side,
        thresholds,
        p_hat,
        ci_lo,
        ci_hi,
        n,
        seed_range: (0, n - 1),
        mean,
        sd,
    })
}

fn sample_observable(
    obs: &Observable,
    side: TailSide,
    n: u64,
    base: &NoiseField,
    workers: usize,
) -> Result<Vec<f64>> {
    let flip = match side {
        TailSide::Upper => 1.0,
        TailSide::Lower => -1.0,
    };
    let results = par_map_indexed(workers, n, |k| obs.sample(&base.replicate(k)).map(|v| flip * v));
    results.into_iter().collect()
}

/// The tail-bound shapes of the theorems: `bound(u) = C exp(-c g(u))`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "shape")]
pub enum BoundShape {
    /// `g = u^{3/2} / sqrt(scale)` (moderate-deviation KPZ tails).
    ThreeHalvesOverSqrtScale { scale: f64 },
    /// `g = theta u` (label-walk drift bound).
    LinearTheta { theta: f64 },
    /// `g = u^2 / scale` (Gaussian off-characteristic term).
    QuadraticOverScale { scale: f64 },
    /// `g = u^3 / scale^2` (second-class cubic tail).
    CubicOverScaleSq { scale: f64 },
}

impl BoundShape {
    pub fn g(&self, u: f64) -> f64 {
        match *self {
            BoundShape::ThreeHalvesOverSqrtScale { scale } => u.powf(1.5) / scale.sqrt(),
            BoundShape::LinearTheta { theta } => theta * u,
            BoundShape::QuadraticOverScale { scale } => u * u / scale,
            BoundShape::CubicOverScaleSq { scale } => u.powi(3) / (scale * scale),
        }
    }
}

/// A fully pinned bound `C exp(-c g(u))`; the constants are always reported.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BoundTemplate {
    pub shape: BoundShape,
    pub c_front: f64,
    pub c_rate: f64,
}

impl BoundTemplate {
    pub fn value(&self, u: f64) -> f64 {
        self.c_front * (-self.c_rate * self.shape.g(u)).exp()
    }
}

/// Per-threshold verdicts of a bound comparison with CI slack.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundCheck {
    pub template: BoundTemplate,
    pub bound_values: Vec<f64>,
    pub pass: Vec<bool>,
    pub all_pass: bool,
}

/// `p_hat(u) <= bound(u) + slack_z * se(u)` at every threshold.
pub fn check_tail_bound(curve: &TailCurve, template: &BoundTemplate, slack_z: f64) -> BoundCheck {
    let mut bound_values = Vec::new();
    let mut pass = Vec::new();
    for k in 0..curve.thresholds.len() {
        let b = template.value(curve.thresholds[k]);
        let p = curve.p_hat[k];
        let se = (p * (1.0 - p) / curve.n as f64).sqrt();
        bound_values.push(b);
        pass.push(p <= b + slack_z * se);
    }
    let all_pass = pass.iter().all(|&b| b);
    BoundCheck {
        template: *template,
        bound_values,
        pass,
        all_pass,
    }
}

/// Least-squares fit of `ln p_hat` against `u^power` over thresholds with
/// positive mass; `None` when fewer than three such points exist.
pub fn log_tail_fit(curve: &TailCurve, power: f64) -> Option<OlsFit<f64>> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (u, p) in curve.thresholds.iter().zip(&curve.p_hat) {
        if *p > 0.0 {
            xs.push(u.powf(power));
            ys.push(p.ln());
        }
    }
    if xs.len() < 3 {
        return None;
    }
    Some(ols(&xs, &ys))
}

fn require_stationary(params: &Params, b1: f64, b2: f64) -> Result<()> {
    // Degenerate equal densities are trivially invariant.
    if b1 == b2 && (b1 == 0.0 || b1 == 1.0) {
        return Ok(());
    }
    let beta1 = b1 / (1.0 - b1);
    let beta2 = b2 / (1.0 - b2);
    let gap = beta1 - params.kappa * beta2;
    if !gap.is_finite() || gap.abs() > 1e-9 * beta1.abs().max(1.0) {
        Err(Error::NonStationaryPair { b1, b2 })
    } else {
        Ok(())
    }
}

/// Marginal and pairwise-independence tests of the translation-invariance
/// family at `(x, y)` inside a sampled `dims` box.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StationarityReport {
    /// `(label, p_value)` for each family member's Bernoulli marginal.
    pub marginals: Vec<(String, f64)>,
    /// `(label_a, label_b, p_value)` for each pair's independence test.
    pub pairwise: Vec<(String, String, f64)>,
    /// Bonferroni-corrected per-test threshold at family level.
    pub per_test_level: f64,
    pub family_level: f64,
    pub all_pass: bool,
    pub n: u64,
}

#[allow(clippy::too_many_arguments)]
pub fn test_stationarity(
    params: &Params,
    b1: f64,
    b2: f64,
    x: u32,
    y: u32,
    dims: (u32, u32),
    n: u64,
    base: &NoiseField,
    workers: usize,
    family_level: f64,
) -> Result<StationarityReport> {
    require_stationary(params, b1, b2)?;
    let boundary = BoundarySpec::two_sided(b1, b2);
    stationarity_family_report(
        params,
        &boundary,
        b1,
        b2,
        x,
        y,
        dims,
        n,
        base,
        workers,
        family_level,
    )
}

/// The same marginal and independence tests against an arbitrary sampled
/// boundary and claimed densities, with no stationarity gate. This is the
/// negative-control entry point: a non-matching pair must fail.
#[allow(clippy::too_many_arguments)]
pub fn stationarity_family_report(
    params: &Params,
    boundary: &BoundarySpec,
    b1: f64,
    b2: f64,
    x: u32,
    y: u32,
    dims: (u32, u32),
    n: u64,
    base: &NoiseField,
    workers: usize,
    family_level: f64,
) -> Result<StationarityReport> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let (x_max, y_max) = dims;
    if x == 0 || y == 0 || x > x_max || y > y_max {
        return Err(Error::OutOfRange { x, y, dims });
    }
    // Family members: horizontal entries phi_h(x, i), y <= i <= y_max, then
    // vertical entries phi_v(i, y), x <= i <= x_max.
    let members: Vec<(bool, u32)> = (y..=y_max)
        .map(|i| (true, i))
        .chain((x..=x_max).map(|i| (false, i)))
        .collect();
    let m = members.len();
    let chunks = (workers.max(1) * 4) as u64;
    let per = n.div_ceil(chunks);
    let partials = par_map_indexed(workers, chunks, |c| {
        let lo = c * per;
        let hi = ((c + 1) * per).min(n);
        let mut singles = vec![0u64; m];
        let mut pairs = vec![0u64; m * m];
        let mut vals = vec![false; m];
        for k in lo..hi {
            let nf = base.replicate(k);
            let ens = sample_ensemble(params, boundary, dims, &nf).expect("valid dims");
            for (slot, &(horiz, i)) in vals.iter_mut().zip(&members) {
                *slot = if horiz { ens.h(x, i) } else { ens.v(i, y) };
            }
            for a in 0..m {
                if vals[a] {
                    singles[a] += 1;
                    for b in a + 1..m {
                        if vals[b] {
                            pairs[a * m + b] += 1;
                        }
                    }
                }
            }
        }
        (singles, pairs)
    });
    let mut singles = vec![0u64; m];
    let mut pairs = vec![0u64; m * m];
    for (s, p) in partials {
        for (acc, v) in singles.iter_mut().zip(&s) {
            *acc += v;
        }
        for (acc, v) in pairs.iter_mut().zip(&p) {
            *acc += v;
        }
    }
    let label = |&(horiz, i): &(bool, u32)| {
        if horiz {
            format!("phi_h({x},{i})")
        } else {
            format!("phi_v({i},{y})")
        }
    };
    let nf = n as f64;
    let mut marginals = Vec::with_capacity(m);
    for (a, member) in members.iter().enumerate() {
        let p0 = if member.0 { b1 } else { b2 };
        let o = singles[a] as f64;
        let stat = (o - nf * p0) * (o - nf * p0) / (nf * p0 * (1.0 - p0));
        marginals.push((label(member), chi_square_pvalue(stat, 1)));
    }
    let mut pairwise = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            let n11 = pairs[a * m + b] as f64;
            let n1_ = singles[a] as f64;
            let n_1 = singles[b] as f64;
            let table = [
                n11,
                n1_ - n11,
                n_1 - n11,
                nf - n1_ - n_1 + n11,
            ];
            let rows = [n1_, nf - n1_];
            let cols = [n_1, nf - n_1];
            let mut stat = 0.0;
            let mut valid = true;
            for (idx, &o) in table.iter().enumerate() {
                let e = rows[idx / 2] * cols[idx % 2] / nf;
                if e < 1.0 {
                    valid = false;
                    break;
                }
                stat += (o - e) * (o - e) / e;
            }
            let p = if valid { chi_square_pvalue(stat, 1) } else { 1.0 };
            pairwise.push((label(&members[a]), label(&members[b]), p));
        }
    }
    let tests = marginals.len() + pairwise.len();
    let per_test_level = family_level / tests as f64;
    let all_pass = marginals
        .iter()
        .map(|(_, p)| *p)
        .chain(pairwise.iter().map(|(_, _, p)| *p))
        .all(|p| p >= per_test_level);
    Ok(StationarityReport {
        marginals,
        pairwise,
        per_test_level,
        family_level,
        all_pass,
        n,
    })
}

/// Variance of the height along the characteristic direction against the
/// driving scale `y (1 - kappa)`, with the fitted log-log slope.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalingFit {
    /// `y (1 - kappa)` per abscissa.
    pub abscissae: Vec<f64>,
    pub ys: Vec<u32>,
    pub x0s: Vec<u32>,
    pub variances: Vec<f64>,
    pub variance_ses: Vec<f64>,
    pub slope: f64,
    pub slope_se: f64,
    pub r_squared: f64,
    pub n_per_point: u64,
}

pub fn fit_variance_scaling(
    params: &Params,
    b2: f64,
    ys: &[u32],
    n: u64,
    base: &NoiseField,
    workers: usize,
) -> Result<ScalingFit> {
    if ys.len() < 4 {
        return Err(Error::TooFewAbscissae {
            got: ys.len(),
            need: 4,
        });
    }
    params.require_strictly_ordered_open()?;
    let b1 = stationary_pair(b2, params)?;
    let beta1 = b1 / (1.0 - b1);
    let mut abscissae = Vec::new();
    let mut x0s = Vec::new();
    let mut variances = Vec::new();
    let mut variance_ses = Vec::new();
    for (yi, &y) in ys.iter().enumerate() {
        let x0 = characteristic_point(
            CharacteristicQuery::X0OfY {
                y: y as f64,
                beta1,
            },
            params,
        )?
        .round()
        .max(1.0) as u32;
        let boundary = BoundarySpec::two_sided(b1, b2);
        let heights: Vec<f64> = par_map_indexed(workers, n, |k| {
            let nf = base.replicate((yi as u64) << 40 | k);
            sample_height(params, &boundary, (x0, y), &nf).expect("valid dims") as f64
        });
        abscissae.push(y as f64 * (1.0 - params.kappa));
        x0s.push(x0);
        variances.push(sample_variance(&heights));
        variance_ses.push(jackknife_variance_se(&heights));
    }
    let lx: Vec<f64> = abscissae.iter().map(|a| a.ln()).collect();
    let ly: Vec<f64> = variances.iter().map(|v| v.ln()).collect();
    let fit = ols(&lx, &ly);
    Ok(ScalingFit {
        abscissae,
        ys: ys.to_vec(),
        x0s,
        variances,
        variance_ses,
        slope: fit.slope,
        slope_se: fit.slope_se,
        r_squared: fit.r_squared,
        n_per_point: n,
    })
}

/// The two-point value estimated two ways from the same replicates:
/// the direct indicator covariance and half the variance Laplacian. The
/// difference carries a grouped-jackknife standard error, which is the joint
/// uncertainty of the comparison.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TwoPointMc {
    pub s_direct: f64,
    pub s_direct_se: f64,
    pub s_laplace: f64,
    pub s_laplace_se: f64,
    pub difference: f64,
    pub difference_se: f64,
    pub agree_3sigma: bool,
    pub n: u64,
}

#[allow(clippy::too_many_arguments)]
pub fn two_point_estimate(
    params: &Params,
    b1: f64,
    b2: f64,
    x: u32,
    y: u32,
    n: u64,
    base: &NoiseField,
    workers: usize,
) -> Result<TwoPointMc> {
    if x < 2 {
        return Err(Error::TwoPointNeedsInterior { x });
    }
    require_stationary(params, b1, b2)?;
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let boundary = BoundarySpec::two_sided(b1, b2);
    let dims = (x + 1, y);
    const GROUPS: u64 = 100;
    let per = n.div_ceil(GROUPS);
    // Accumulator: [count, h-, h-^2, h, h^2, h+, h+^2, top, origin, top*origin]
    let groups: Vec<[f64; 10]> = par_map_indexed(workers, GROUPS, |g| {
        let lo = g * per;
        let hi = ((g + 1) * per).min(n);
        let mut acc = [0.0f64; 10];
        let mut ens = crate::model::PathEnsemble::empty(dims).expect("valid dims");
        for k in lo..hi {
            let nf = base.replicate(k);
            crate::model::sample_ensemble_into(&mut ens, params, &boundary, &nf);
            acc[0] += 1.0;
            for (slot, xx) in [x - 1, x, x + 1].into_iter().enumerate() {
                let h = ens.boundary_counts(xx, y).expect("in range").h as f64;
                acc[1 + 2 * slot] += h;
                acc[2 + 2 * slot] += h * h;
            }
            let top = ens.v(x + 1, y + 1) as u64 as f64;
            let origin = ens.v(1, 1) as u64 as f64;
            acc[7] += top;
            acc[8] += origin;
            acc[9] += top * origin;
        }
        acc
    });
    let var = |t: &[f64; 10], slot: usize| {
        let nn = t[0];
        (t[2 + 2 * slot] - t[1 + 2 * slot] * t[1 + 2 * slot] / nn) / (nn - 1.0)
    };
    let s_direct_stat = |t: &[f64; 10]| (t[9] - t[7] * t[8] / t[0]) / (t[0] - 1.0);
    let laplace_stat = |t: &[f64; 10]| (var(t, 2) + var(t, 0) - 2.0 * var(t, 1)) / 2.0;
    let (s_direct, s_direct_se) = grouped_jackknife(&groups, s_direct_stat);
    let (s_laplace, s_laplace_se) = grouped_jackknife(&groups, laplace_stat);
    let (difference, difference_se) =
        grouped_jackknife(&groups, |t| s_direct_stat(t) - laplace_stat(t));
    Ok(TwoPointMc {
        s_direct,
        s_direct_se,
        s_laplace,
        s_laplace_se,
        difference,
        difference_se,
        agree_3sigma: difference.abs() <= 3.0 * difference_se,
        n,
    })
}

/// Step-data upper-tail check against
/// `exp(-(4/3) u^{3/2} + C u^2 / (y(1-kappa))^{1/3})`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StepTailReport {
    pub u_grid: Vec<f64>,
    pub p_hat: Vec<f64>,
    pub bound: Vec<f64>,
    pub pass: Vec<bool>,
    pub all_pass: bool,
    /// The constant in front of the quadratic correction, and whether it was
    /// fitted on the training half or supplied.
    pub c_quad: f64,
    pub c_fitted: bool,
    pub h_script: f64,
    pub sigma: f64,
    pub train_n: u64,
    pub validate_n: u64,
}

#[allow(clippy::too_many_arguments)]
pub fn step_tail_check(
    params: &Params,
    x: u32,
    y: u32,
    u_grid: &[f64],
    n: u64,
    c_quad: Option<f64>,
    base: &NoiseField,
    workers: usize,
) -> Result<StepTailReport> {
    let constants = crate::analytics::step_constants(x as f64, y as f64, params)?;
    if n < 2 {
        return Err(Error::EmptySample);
    }
    let obs = Observable::StepHeight {
        params: *params,
        x,
        y,
        center: constants.h_script,
        scale: constants.sigma,
    };
    let scale = y as f64 * (1.0 - params.kappa);
    let cube_root = scale.cbrt();
    let samples = sample_observable(&obs, TailSide::Upper, n, base, workers)?;
    let (train, validate) = samples.split_at((n / 2) as usize);
    let tail = |data: &[f64], u: f64| data.iter().filter(|&&v| v > u).count() as f64;
    let (c, fitted) = match c_quad {
        Some(c) => (c, false),
        None => {
            // Smallest C that keeps the training tail under the template.
            let mut c: f64 = 0.0;
            for &u in u_grid {
                let p = tail(train, u) / train.len() as f64;
                if p > 0.0 {
                    let need = (p.ln() + 4.0 / 3.0 * u.powf(1.5)) * cube_root / (u * u);
                    c = c.max(need);
                }
            }
            (c, true)
        }
    };
    let check_set: &[f64] = if fitted { validate } else { &samples };
    let m = check_set.len() as f64;
    let mut p_hat = Vec::new();
    let mut bound = Vec::new();
    let mut pass = Vec::new();
    for &u in u_grid {
        let p = tail(check_set, u) / m;
        let b = (-4.0 / 3.0 * u.powf(1.5) + c * u * u / cube_root).exp();
        let se = (p * (1.0 - p) / m).sqrt();
        p_hat.push(p);
        bound.push(b);
        pass.push(p <= b + 3.0 * se);
    }
    let all_pass = pass.iter().all(|&b| b);
    Ok(StepTailReport {
        u_grid: u_grid.to_vec(),
        p_hat,
        bound,
        pass,
        all_pass,
        c_quad: c,
        c_fitted: fitted,
        h_script: constants.h_script,
        sigma: constants.sigma,
        train_n: train.len() as u64,
        validate_n: check_set.len() as u64,
    })
}

/// Large-deviation sanity: `P[|H(n, n)| > k] <= 2 exp(-k (1 + ln(k / (n d1))))`
/// for `k >= 10 n delta1`, checked with Monte Carlo slack under any boundary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LargeDeviationReport {
    pub ks: Vec<u32>,
    pub p_hat: Vec<f64>,
    pub bound: Vec<f64>,
    pub all_pass: bool,
}

pub fn height_large_deviation_check(
    params: &Params,
    boundary: &BoundarySpec,
    n_size: u32,
    n_samples: u64,
    base: &NoiseField,
    workers: usize,
) -> Result<LargeDeviationReport> {
    let nd = n_size as f64 * params.delta1;
    let k_lo = (10.0 * nd).ceil().max(1.0) as u32;
    if k_lo > n_size {
        return Err(Error::InadmissibleDirection {
            x: n_size as f64,
            y: k_lo as f64,
        });
    }
    let heights: Vec<f64> = par_map_indexed(workers, n_samples, |k| {
        sample_height(params, boundary, (n_size, n_size), &base.replicate(k)).expect("valid") as f64
    });
    let mut ks = Vec::new();
    let mut p_hat = Vec::new();
    let mut bound = Vec::new();
    let mut all_pass = true;
    for k in k_lo..=n_size {
        let p = heights.iter().filter(|&&h| h.abs() > k as f64).count() as f64
            / n_samples as f64;
        let b = 2.0 * (-(k as f64) * (1.0 + (k as f64 / nd).ln())).exp();
        let se = (p * (1.0 - p) / n_samples as f64).sqrt();
        all_pass &= p <= b + 3.0 * se;
        ks.push(k);
        p_hat.push(p);
        bound.push(b);
    }
    Ok(LargeDeviationReport {
        ks,
        p_hat,
        bound,
        all_pass,
    })
}

/// Monte Carlo height frequencies against the exact oracle pmf:
/// `(chi-square statistic, dof, p-value)`.
pub fn sampler_fidelity(
    params: &Params,
    boundary: &BoundarySpec,
    dims: (u32, u32),
    n: u64,
    base: &NoiseField,
    workers: usize,
) -> Result<(f64, u32, f64)> {
    let dist = exact_height_dist::<f64>(params, boundary, dims.0, dims.1)?;
    let heights: Vec<i64> = par_map_indexed(workers, n, |k| {
        sample_height(params, boundary, dims, &base.replicate(k)).expect("valid dims")
    })
    .into_iter()
    .collect();
    let mut observed = vec![0u64; dist.support.len()];
    for h in heights {
        match dist.support.binary_search(&h) {
            Ok(idx) => observed[idx] += 1,
            // A value outside the exact support is an immediate failure.
            Err(_) => return Ok((f64::INFINITY, 1, 0.0)),
        }
    }
    let probs: Vec<f64> = dist.probs.iter().map(Weight::to_f64).collect();
    Ok(chi_square_gof(&observed, &probs, n, 5.0))
}

/// Exit-point category counts of one construction: categories are
/// `north(1..=x_max)` then `east(1..=y_max)`.
#[allow(clippy::too_many_arguments)]
pub fn exit_distribution(
    params: &Params,
    b1: f64,
    b2: f64,
    dims: (u32, u32),
    v0: BoundarySlot,
    mode: TraceMode,
    n: u64,
    base: &NoiseField,
    workers: usize,
) -> Result<Vec<u64>> {
    let cats = (dims.0 + dims.1) as usize;
    let chunks = (workers.max(1) * 4) as u64;
    let per = n.div_ceil(chunks);
    let partials = par_map_indexed(workers, chunks, |c| {
        let lo = c * per;
        let hi = ((c + 1) * per).min(n);
        let mut counts = vec![0u64; cats];
        for k in lo..hi {
            let nf = base.replicate(k);
            let trace = sample_trace(params, b1, b2, dims, v0, mode, &nf).expect("valid trace");
            let idx = match trace.exit.side {
                ExitSide::North => trace.exit.coordinate as usize - 1,
                ExitSide::East => dims.0 as usize + trace.exit.coordinate as usize - 1,
            };
            counts[idx] += 1;
        }
        counts
    });
    let mut counts = vec![0u64; cats];
    for p in partials {
        for (acc, v) in counts.iter_mut().zip(&p) {
            *acc += v;
        }
    }
    Ok(counts)
}

/// Two-sample distance between the offset S6V height law and the ASEP
/// current law along a sequence of degeneration steps. The same ASEP sample
/// set anchors every comparison.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DegenerationReport {
    pub epsilons: Vec<f64>,
    pub distances: Vec<f64>,
    pub monotone_decreasing: bool,
    pub n: u64,
}

#[allow(clippy::too_many_arguments)]
pub fn degeneration_distances(
    epsilons: &[f64],
    left_rate: f64,
    right_rate: f64,
    density: f64,
    time: f64,
    x_offset: i64,
    n: u64,
    base: &NoiseField,
    workers: usize,
) -> Result<DegenerationReport> {
    let config = AsepConfig::with_window_for(
        left_rate,
        right_rate,
        density,
        time,
        vec![x_offset],
        crate::asep::DEFAULT_WINDOW_MARGIN,
    );
    let asep_samples: Vec<f64> = {
        let results = par_map_indexed(workers, n, |k| {
            asep_simulate(&config, &base.replicate(k)).map(|s| s.current(x_offset) as f64)
        });
        results.into_iter().collect::<Result<Vec<f64>>>()?
    };
    let mut distances = Vec::new();
    for (ei, &epsilon) in epsilons.iter().enumerate() {
        let spec = DegenerationSpec {
            epsilon,
            left_rate,
            right_rate,
            density,
            time,
            x_offset,
        };
        let s6v: Vec<f64> = {
            let results = par_map_indexed(workers, n, |k| {
                degeneration_run(&spec, &base.replicate((ei as u64 + 1) << 40 | k))
                    .map(|s| s.height as f64)
            });
            results.into_iter().collect::<Result<Vec<f64>>>()?
        };
        distances.push(ks_two_sample(&s6v, &asep_samples));
    }
    let monotone_decreasing = distances.windows(2).all(|w| w[1] <= w[0]);
    Ok(DegenerationReport {
        epsilons: epsilons.to_vec(),
        distances,
        monotone_decreasing,
        n,
    })
}
