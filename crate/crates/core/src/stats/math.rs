//! Numeric kernels for the estimators: moments, least squares, binomial
//! intervals, chi-square and Kolmogorov-Smirnov machinery.

use crate::scalar::Scalar;

pub fn mean<T: Scalar>(xs: &[T]) -> T {
    let n = T::from_u(xs.len() as u64);
    xs.iter().fold(T::zero(), |acc, &x| acc + x) / n
}

/// Unbiased sample variance.
pub fn sample_variance<T: Scalar>(xs: &[T]) -> T {
    let m = mean(xs);
    let n = T::from_u(xs.len() as u64);
    xs.iter().fold(T::zero(), |acc, &x| acc + (x - m) * (x - m)) / (n - T::one())
}

/// Delete-one jackknife standard error of the unbiased sample variance.
pub fn jackknife_variance_se(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 3 {
        return f64::NAN;
    }
    let nf = n as f64;
    let s1: f64 = xs.iter().sum();
    let s2: f64 = xs.iter().map(|x| x * x).sum();
    let m = nf - 1.0;
    let mut thetas = Vec::with_capacity(n);
    let mut theta_bar = 0.0;
    for &x in xs {
        let s1i = s1 - x;
        let s2i = s2 - x * x;
        let theta = (s2i - s1i * s1i / m) / (m - 1.0);
        theta_bar += theta;
        thetas.push(theta);
    }
    theta_bar /= nf;
    let ss: f64 = thetas.iter().map(|t| (t - theta_bar) * (t - theta_bar)).sum();
    ((nf - 1.0) / nf * ss).sqrt()
}

/// Grouped jackknife for a statistic of summed accumulators: `groups[g]` is
/// the per-group sum vector, `stat` maps a total vector to the estimate.
/// Returns `(estimate, standard error)`.
pub fn grouped_jackknife<const K: usize>(
    groups: &[[f64; K]],
    stat: impl Fn(&[f64; K]) -> f64,
) -> (f64, f64) {
    let g = groups.len();
    let mut total = [0.0f64; K];
    for row in groups {
        for (t, v) in total.iter_mut().zip(row) {
            *t += v;
        }
    }
    let estimate = stat(&total);
    if g < 2 {
        return (estimate, f64::NAN);
    }
    let mut thetas = Vec::with_capacity(g);
    let mut bar = 0.0;
    for row in groups {
        let mut rest = total;
        for (t, v) in rest.iter_mut().zip(row) {
            *t -= v;
        }
        let th = stat(&rest);
        bar += th;
        thetas.push(th);
    }
    bar /= g as f64;
    let ss: f64 = thetas.iter().map(|t| (t - bar) * (t - bar)).sum();
    let se = ((g as f64 - 1.0) / g as f64 * ss).sqrt();
    (estimate, se)
}

/// Ordinary least squares `y = intercept + slope x`.
#[derive(Clone, Copy, Debug)]
pub struct OlsFit<T: Scalar> {
    pub slope: T,
    pub intercept: T,
    pub slope_se: T,
    pub r_squared: T,
}

pub fn ols<T: Scalar>(x: &[T], y: &[T]) -> OlsFit<T> {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2);
    let n = T::from_u(x.len() as u64);
    let mx = mean(x);
    let my = mean(y);
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    let mut syy = T::zero();
    for (&xi, &yi) in x.iter().zip(y) {
        sxx = sxx + (xi - mx) * (xi - mx);
        sxy = sxy + (xi - mx) * (yi - my);
        syy = syy + (yi - my) * (yi - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss_res = T::zero();
    for (&xi, &yi) in x.iter().zip(y) {
        let r = yi - intercept - slope * xi;
        ss_res = ss_res + r * r;
    }
    let dof = n - T::from_f(2.0);
    let slope_se = if dof > T::zero() {
        (ss_res / dof / sxx).sqrt()
    } else {
        T::zero()
    };
    let r_squared = if syy > T::zero() {
        T::one() - ss_res / syy
    } else {
        T::one()
    };
    OlsFit {
        slope,
        intercept,
        slope_se,
        r_squared,
    }
}

/// Wilson score interval for a binomial proportion at `z` standard normal
/// quantiles.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Lanczos log-gamma, |error| < 1e-13 for positive arguments.
pub fn ln_gamma(z: f64) -> f64 {
    const G: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_1,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if z < 0.5 {
        // Reflection formula.
        let pi = std::f64::consts::PI;
        return (pi / (pi * z).sin()).ln() - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut x = G[0];
    for (i, &g) in G.iter().enumerate().skip(1) {
        x += g / (z + i as f64);
    }
    let t = z + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gammp(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_series(a, x)
    } else {
        1.0 - gamma_cf(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 - P(a, x)`.
pub fn gammq(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_series(a, x)
    } else {
        gamma_cf(a, x)
    }
}

fn gamma_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut del = sum;
    for _ in 0..500 {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * 1e-15 {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_cf(a: f64, x: f64) -> f64 {
    const FPMIN: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-15 {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Upper-tail p-value of a chi-square statistic.
pub fn chi_square_pvalue(stat: f64, dof: u32) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    gammq(dof as f64 / 2.0, stat / 2.0)
}

/// Pools categories until every expected count reaches `min_expected`, then
/// returns the goodness-of-fit statistic, degrees of freedom, and p-value.
/// `expected` are probabilities (must sum to ~1 over the listed categories).
pub fn chi_square_gof(observed: &[u64], expected: &[f64], n: u64, min_expected: f64) -> (f64, u32, f64) {
    assert_eq!(observed.len(), expected.len());
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut acc_o = 0.0;
    let mut acc_e = 0.0;
    for (&o, &e) in observed.iter().zip(expected) {
        acc_o += o as f64;
        acc_e += e * n as f64;
        if acc_e >= min_expected {
            bins.push((acc_o, acc_e));
            acc_o = 0.0;
            acc_e = 0.0;
        }
    }
    if acc_e > 0.0 || acc_o > 0.0 {
        if let Some(last) = bins.last_mut() {
            last.0 += acc_o;
            last.1 += acc_e;
        } else {
            bins.push((acc_o, acc_e));
        }
    }
    if bins.len() < 2 {
        return (0.0, 0, 1.0);
    }
    let stat: f64 = bins
        .iter()
        .map(|&(o, e)| (o - e) * (o - e) / e)
        .sum();
    let dof = bins.len() as u32 - 1;
    (stat, dof, chi_square_pvalue(stat, dof))
}

/// Two-sample chi-square over shared categories with pooling of sparse bins.
pub fn chi_square_two_sample(a: &[u64], b: &[u64], min_count: f64) -> (f64, u32, f64) {
    assert_eq!(a.len(), b.len());
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    if na == 0 || nb == 0 {
        return (0.0, 0, 1.0);
    }
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut acc_a, mut acc_b) = (0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        acc_a += x as f64;
        acc_b += y as f64;
        if acc_a + acc_b >= min_count {
            bins.push((acc_a, acc_b));
            acc_a = 0.0;
            acc_b = 0.0;
        }
    }
    if acc_a > 0.0 || acc_b > 0.0 {
        if let Some(last) = bins.last_mut() {
            last.0 += acc_a;
            last.1 += acc_b;
        } else {
            bins.push((acc_a, acc_b));
        }
    }
    if bins.len() < 2 {
        return (0.0, 0, 1.0);
    }
    let (ka, kb) = ((nb as f64 / na as f64).sqrt(), (na as f64 / nb as f64).sqrt());
    let stat: f64 = bins
        .iter()
        .map(|&(x, y)| {
            let d = ka * x - kb * y;
            d * d / (x + y)
        })
        .sum();
    let dof = bins.len() as u32 - 1;
    (stat, dof, chi_square_pvalue(stat, dof))
}

/// Two-sample Kolmogorov-Smirnov distance (sup of CDF differences).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a: Vec<f64> = a.to_vec();
    let mut b: Vec<f64> = b.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let t = a[i].min(b[j]);
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}
