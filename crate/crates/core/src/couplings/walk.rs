use crate::noise::{Channel, NoiseField};
use crate::{Error, Result};

/// Biased random walk in a deterministic environment of open edges.
///
/// `c(x, n) = 1` opens the edge `(x, x+1)` at time `n`; adjacent edges are
/// never both open. From site `x`: jump right with probability `delta1` when
/// `c(x, n) = 1`, left with probability `delta2` when `c(x-1, n) = 1`, hold
/// otherwise. Returns the full trajectory `Z(0..=steps)` with `Z(0) = 0`.
pub fn biased_walk(
    environment: impl Fn(i64, u32) -> bool,
    delta1: f64,
    delta2: f64,
    steps: u32,
    noise: &NoiseField,
) -> Result<Vec<i64>> {
    let mut traj = Vec::with_capacity(steps as usize + 1);
    traj.push(0);
    walk_core(environment, delta1, delta2, steps, noise, |z| traj.push(z))?;
    Ok(traj)
}

/// Endpoint-only variant of [`biased_walk`]; same noise consumption.
pub fn biased_walk_end(
    environment: impl Fn(i64, u32) -> bool,
    delta1: f64,
    delta2: f64,
    steps: u32,
    noise: &NoiseField,
) -> Result<i64> {
    let mut last = 0;
    walk_core(environment, delta1, delta2, steps, noise, |z| last = z)?;
    Ok(last)
}

fn walk_core(
    environment: impl Fn(i64, u32) -> bool,
    delta1: f64,
    delta2: f64,
    steps: u32,
    noise: &NoiseField,
    mut record: impl FnMut(i64),
) -> Result<()> {
    assert!(
        (0.0..=1.0).contains(&delta1) && (0.0..=1.0).contains(&delta2),
        "jump probabilities must lie in [0, 1]"
    );
    let mut z = 0i64;
    for n in 0..steps {
        // Local validity: the two edges incident to the current site must
        // not both be open, nor either together with its outward neighbour.
        for x in [z - 1, z] {
            if environment(x, n) && environment(x + 1, n) {
                return Err(Error::InvalidEnvironment { x, n });
            }
        }
        if environment(z, n) {
            if noise.uniform_at(Channel::Walk, (n as i64, 0), 0) < delta1 {
                z += 1;
            }
        } else if environment(z - 1, n) && noise.uniform_at(Channel::Walk, (n as i64, 0), 0) < delta2
        {
            z -= 1;
        }
        record(z);
    }
    Ok(())
}

/// `c(x, n) = 1` iff `x` is even: every site has exactly one incident open
/// edge.
pub fn env_even_sites(x: i64, _n: u32) -> bool {
    x.rem_euclid(2) == 0
}

/// `c(x, n) = 1` iff `x + n` is even: the open edges alternate each step.
pub fn env_parity_alternating(x: i64, n: u32) -> bool {
    (x + n as i64).rem_euclid(2) == 0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_zero_environment_never_moves() {
        let traj = biased_walk(|_, _| false, 0.6, 0.2, 50, &NoiseField::new(1)).unwrap();
        assert!(traj.iter().all(|&z| z == 0));
        assert_eq!(traj.len(), 51);
    }

    #[test]
    fn invalid_environment_detected() {
        let err = biased_walk(|_, _| true, 0.6, 0.2, 10, &NoiseField::new(1)).unwrap_err();
        assert!(matches!(err, Error::InvalidEnvironment { .. }));
    }

    #[test]
    fn steps_are_unit_or_hold() {
        let traj = biased_walk(env_parity_alternating, 0.6, 0.2, 400, &NoiseField::new(7)).unwrap();
        for w in traj.windows(2) {
            assert!((w[1] - w[0]).abs() <= 1);
        }
    }

    #[test]
    fn trivial_tail_bound_at_k_zero() {
        // P[Z(n) <= 0] <= e^0 = 1 trivially; just confirm the estimate runs.
        let mut hits = 0;
        for seed in 0..100 {
            let traj =
                biased_walk(env_even_sites, 0.6, 0.2, 100, &NoiseField::new(seed)).unwrap();
            if *traj.last().unwrap() <= 0 {
                hits += 1;
            }
        }
        assert!(hits <= 100);
    }

    #[test]
    fn left_tail_bound_holds_empirically() {
        // Small version of the drift-bound check: theta = 3/7 for
        // (0.6, 0.2); P[Z(n) <= -k] <= e^{-theta k} plus Monte Carlo slack.
        let theta: f64 = 3.0 / 7.0;
        let n_runs = 20_000u64;
        let steps = 100;
        let mut counts = [0u64; 6];
        for seed in 0..n_runs {
            let traj =
                biased_walk(env_even_sites, 0.6, 0.2, steps, &NoiseField::new(seed)).unwrap();
            let z = *traj.last().unwrap();
            for (k, c) in counts.iter_mut().enumerate() {
                if z <= -(k as i64) {
                    *c += 1;
                }
            }
        }
        for (k, &c) in counts.iter().enumerate().skip(1) {
            let p_hat = c as f64 / n_runs as f64;
            let bound = (-theta * k as f64).exp();
            let se = (p_hat.max(1e-9) * (1.0 - p_hat) / n_runs as f64).sqrt();
            assert!(
                p_hat <= bound + 3.0 * se,
                "k = {k}: {p_hat} vs bound {bound}"
            );
        }
    }
}
