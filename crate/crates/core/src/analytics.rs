//! Closed-form equilibrium quantities: the stationary boundary relation, the
//! exact moment generating function, expected height, characteristic
//! directions and their inversion, and the step-data constants.

use crate::model::ModelParams;
use crate::scalar::Scalar;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// A probability stored together with its odds `b / (1 - b)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OddsPair<T: Scalar = crate::Real> {
    pub b: T,
    pub beta: T,
}

impl<T: Scalar> OddsPair<T> {
    pub fn from_prob(b: T) -> Result<Self> {
        check_open("b", b)?;
        Ok(OddsPair {
            b,
            beta: b / (T::one() - b),
        })
    }

    pub fn from_odds(beta: T) -> Result<Self> {
        if !beta.is_finite() || beta <= T::zero() {
            return Err(Error::ProbabilityOutOfRange {
                name: "beta",
                value: beta.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(OddsPair {
            b: beta / (T::one() + beta),
            beta,
        })
    }
}

fn check_open<T: Scalar>(name: &'static str, p: T) -> Result<()> {
    if p > T::zero() && p < T::one() {
        Ok(())
    } else {
        Err(Error::ProbabilityOutOfRange {
            name,
            value: p.to_f64().unwrap_or(f64::NAN),
        })
    }
}

/// The west-boundary density that makes `(b1, b2)` translation invariant:
/// `beta1 = kappa * beta2`.
pub fn stationary_pair<T: Scalar>(b2: T, params: &ModelParams<T>) -> Result<T> {
    check_open("b2", b2)?;
    if !params.kappa.is_finite() || params.kappa <= T::zero() {
        return Err(Error::DegenerateParams {
            delta1: params.delta1.to_f64().unwrap_or(f64::NAN),
            delta2: params.delta2.to_f64().unwrap_or(f64::NAN),
        });
    }
    let beta2 = b2 / (T::one() - b2);
    let beta1 = params.kappa * beta2;
    Ok(beta1 / (T::one() + beta1))
}

/// The matched tilt and the log moment generating function of the height:
/// `eps = ln(kappa * alpha2 / alpha1)` and
/// `ln E[exp(eps H)] = y ln(e^eps a1 + 1 - a1) + x ln(e^-eps a2 + 1 - a2)`.
///
/// Everything stays in log space; `x, y` in the thousands would overflow the
/// product form.
pub fn rains_ejs_mgf<T: Scalar>(
    a1: T,
    a2: T,
    params: &ModelParams<T>,
    x: u32,
    y: u32,
) -> Result<(T, T)> {
    check_open("a1", a1)?;
    check_open("a2", a2)?;
    check_open("delta1", params.delta1)?;
    check_open("delta2", params.delta2)?;
    let alpha1 = a1 / (T::one() - a1);
    let alpha2 = a2 / (T::one() - a2);
    let eps = (params.kappa * alpha2 / alpha1).ln();
    let log_mgf = T::from_u(y as u64) * (eps.exp() * a1 + (T::one() - a1)).ln()
        + T::from_u(x as u64) * ((-eps).exp() * a2 + (T::one() - a2)).ln();
    Ok((eps, log_mgf))
}

/// `E[H^{(b1, b2)}(x, y)] = y b1 - x b2` for a stationary pair.
pub fn expected_height<T: Scalar>(b1: T, b2: T, x: u32, y: u32) -> T {
    T::from_u(y as u64) * b1 - T::from_u(x as u64) * b2
}

/// Characteristic-direction queries. The forward maps send an odds value to
/// the coordinate along which fluctuations are cube-root; the inversion
/// recovers the odds from a coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CharacteristicQuery<T: Scalar = crate::Real> {
    /// `x0 = y kappa ((1 + beta1 / kappa) / (1 + beta1))^2`.
    X0OfY { y: T, beta1: T },
    /// `y0 = x / kappa ((1 + kappa beta2) / (1 + beta2))^2`.
    Y0OfX { x: T, beta2: T },
    /// The unique `beta` with `x0(beta) = x1`, for `x1` in `(y kappa, y / kappa)`.
    InvertBeta { x1: T, y: T },
}

fn x0_of_beta<T: Scalar>(y: T, kappa: T, beta1: T) -> T {
    let r = (T::one() + beta1 / kappa) / (T::one() + beta1);
    y * kappa * r * r
}

pub fn characteristic_point<T: Scalar>(
    query: CharacteristicQuery<T>,
    params: &ModelParams<T>,
) -> Result<T> {
    let kappa = params.kappa;
    if !(kappa > T::zero() && kappa < T::one()) {
        return Err(Error::DegenerateParams {
            delta1: params.delta1.to_f64().unwrap_or(f64::NAN),
            delta2: params.delta2.to_f64().unwrap_or(f64::NAN),
        });
    }
    match query {
        CharacteristicQuery::X0OfY { y, beta1 } => Ok(x0_of_beta(y, kappa, beta1)),
        CharacteristicQuery::Y0OfX { x, beta2 } => {
            let r = (T::one() + kappa * beta2) / (T::one() + beta2);
            Ok(x / kappa * r * r)
        }
        CharacteristicQuery::InvertBeta { x1, y } => invert_beta(x1, y, kappa),
    }
}

/// Solves `x1 = y kappa ((1 + beta / kappa) / (1 + beta))^2` for `beta`.
///
/// Closed form: `beta = (sqrt(x1) - sqrt(y kappa)) / (sqrt(y / kappa) - sqrt(x1))`,
/// with a monotone bisection fallback when cancellation near `kappa -> 1`
/// degrades it. Relative tolerance 1e-12.
fn invert_beta<T: Scalar>(x1: T, y: T, kappa: T) -> Result<T> {
    let lo = y * kappa;
    let hi = y / kappa;
    if !(x1 > lo && x1 < hi) {
        return Err(Error::InversionOutOfRange {
            x1: x1.to_f64().unwrap_or(f64::NAN),
            lo: lo.to_f64().unwrap_or(f64::NAN),
            hi: hi.to_f64().unwrap_or(f64::NAN),
        });
    }
    let tol = T::from_f(1e-12);
    let closed = (x1.sqrt() - lo.sqrt()) / (hi.sqrt() - x1.sqrt());
    if closed.is_finite() && closed > T::zero() {
        let residual = (x0_of_beta(y, kappa, closed) - x1).abs();
        if residual <= tol * x1 {
            return Ok(closed);
        }
    }
    // x0_of_beta is strictly increasing in beta for kappa < 1, from y*kappa
    // at beta = 0 towards y/kappa; bisect.
    let mut b_lo = T::zero();
    let mut b_hi = if closed.is_finite() && closed > T::zero() {
        closed + closed + T::one()
    } else {
        T::one()
    };
    while x0_of_beta(y, kappa, b_hi) < x1 {
        b_hi = b_hi + b_hi;
        if !b_hi.is_finite() {
            return Err(Error::InversionOutOfRange {
                x1: x1.to_f64().unwrap_or(f64::NAN),
                lo: lo.to_f64().unwrap_or(f64::NAN),
                hi: hi.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    for _ in 0..200 {
        let mid = (b_lo + b_hi) * T::from_f(0.5);
        if x0_of_beta(y, kappa, mid) < x1 {
            b_lo = mid;
        } else {
            b_hi = mid;
        }
        if b_hi - b_lo <= tol * b_hi {
            break;
        }
    }
    Ok((b_lo + b_hi) * T::from_f(0.5))
}

/// Limit shape value and fluctuation scale for step data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepConstants<T: Scalar = crate::Real> {
    /// Limit shape value of the height.
    pub h_script: T,
    /// Cube root of the variance scale.
    pub sigma: T,
}

/// ASEP analogues of the step constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsepStepConstants<T: Scalar = crate::Real> {
    pub j_script: T,
    pub nu: T,
}

/// Step-data constants for the six vertex model:
/// `H = -(sqrt(y(1-d1)) - sqrt(x(1-d2)))^2 / (d1 - d2)` and the cube of the
/// fluctuation scale
/// `sigma^3 = sqrt(xy) / (kappa (kappa^{-1/2} - kappa^{1/2})^3)
///            * (1 - sqrt(y kappa / x))^2 (1 - sqrt(x kappa / y))^2`.
///
/// When the params carry the assumption constant, the direction must satisfy
/// `kappa + a(1-kappa) <= y/x <= (1 - (1-kappa) a) / kappa`.
pub fn step_constants<T: Scalar>(x: T, y: T, params: &ModelParams<T>) -> Result<StepConstants<T>> {
    let kappa = params.kappa;
    let inadmissible = || Error::InadmissibleDirection {
        x: x.to_f64().unwrap_or(f64::NAN),
        y: y.to_f64().unwrap_or(f64::NAN),
    };
    let domain_ok = kappa > T::zero() && kappa < T::one() && x > T::zero() && y > T::zero();
    if !domain_ok {
        return Err(inadmissible());
    }
    if let Some(a) = params.frak_a {
        let ratio = y / x;
        let lo = kappa + a * (T::one() - kappa);
        let hi = (T::one() - (T::one() - kappa) * a) / kappa;
        if !(ratio >= lo && ratio <= hi) {
            return Err(inadmissible());
        }
    }
    let one = T::one();
    let diff = (y * (one - params.delta1)).sqrt() - (x * (one - params.delta2)).sqrt();
    let h_script = -(diff * diff) / (params.delta1 - params.delta2);
    let gap = one / kappa.sqrt() - kappa.sqrt();
    let f1 = one - (y * kappa / x).sqrt();
    let f2 = one - (x * kappa / y).sqrt();
    let sigma3 = (x * y).sqrt() / (kappa * gap * gap * gap) * f1 * f1 * f2 * f2;
    if !sigma3.is_finite() || sigma3 < T::zero() {
        return Err(inadmissible());
    }
    Ok(StepConstants {
        h_script,
        sigma: sigma3.cbrt(),
    })
}

/// Step-data constants for the ASEP:
/// `J = -t/(4(L-R)) (x/t - (L-R))^2` and
/// `nu^3 = t/(16(L-R)^3) ((L-R)^2 - x^2/t^2)^2`, for `|x| <= (L-R) t`.
pub fn asep_step_constants<T: Scalar>(x: T, t: T, l: T, r: T) -> Result<AsepStepConstants<T>> {
    let gap = l - r;
    let inadmissible = || Error::InadmissibleDirection {
        x: x.to_f64().unwrap_or(f64::NAN),
        y: t.to_f64().unwrap_or(f64::NAN),
    };
    let domain_ok = gap > T::zero() && t > T::zero() && x.abs() <= gap * t;
    if !domain_ok {
        return Err(inadmissible());
    }
    let dev = x / t - gap;
    let j_script = -t / (T::from_f(4.0) * gap) * dev * dev;
    let band = gap * gap - (x / t) * (x / t);
    let nu3 = t / (T::from_f(16.0) * gap * gap * gap) * band * band;
    Ok(AsepStepConstants {
        j_script,
        nu: nu3.cbrt(),
    })
}
