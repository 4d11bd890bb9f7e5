//! Problem definition: nonlinearity family, similarity variables, and the
//! refined near-blow-up length scale.
//!
//! Times are handled as the distance to blow-up `T - t` internally; the
//! rescaled time `s = -log(T-t)` then needs the full precision of `T - t`
//! rather than of `t`, which avoids catastrophic cancellation near `T`.

use crate::error::{invalid, Error, Result};
use alloc::format;

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Reaction term of `u_t = Δu + f(u)`: `f(u) = e^u`, or `f(u) = u^p` with
/// `p > 1` on nonnegative data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Nonlinearity {
    Exponential,
    Power { p: f64 },
}

impl Nonlinearity {
    /// Power nonlinearity with exponent validation.
    pub fn power(p: f64) -> Result<Self> {
        if !p.is_finite() {
            return Err(Error::NonFinite("power exponent"));
        }
        if p <= 1.0 {
            return Err(invalid(format!("power exponent must exceed 1, got {p}")));
        }
        Ok(Nonlinearity::Power { p })
    }

    pub fn f(&self, u: f64) -> f64 {
        match *self {
            Nonlinearity::Exponential => u.exp(),
            // Restricted to u >= 0; the clamp keeps the evaluation defined
            // for transient negative undershoots of a discrete solution.
            Nonlinearity::Power { p } => u.max(0.0).powf(p),
        }
    }

    pub fn f_prime(&self, u: f64) -> f64 {
        match *self {
            Nonlinearity::Exponential => u.exp(),
            Nonlinearity::Power { p } => p * u.max(0.0).powf(p - 1.0),
        }
    }

    /// Amplitude `κ = (1/(p-1))^{1/(p-1)}` of the constant self-similar
    /// profile. Defined for the power nonlinearity only.
    pub fn kappa(&self) -> Option<f64> {
        match *self {
            Nonlinearity::Exponential => None,
            Nonlinearity::Power { p } => Some((1.0 / (p - 1.0)).powf(1.0 / (p - 1.0))),
        }
    }

    /// Reaction term of the rescaled (similarity-frame) equation:
    /// `G(w) = e^w - 1` or `G(w) = -w/(p-1) + w^p`.
    pub fn rescaled_reaction(&self, w: f64) -> f64 {
        match *self {
            Nonlinearity::Exponential => w.exp_m1(),
            Nonlinearity::Power { p } => -w / (p - 1.0) + w.max(0.0).powf(p),
        }
    }

    /// Center value `φ(0)` of a shot profile with shooting parameter `α`:
    /// `α` for the exponential family, `κ + α` for the power family.
    pub fn profile_center(&self, alpha: f64) -> f64 {
        match self.kappa() {
            None => alpha,
            Some(kappa) => kappa + alpha,
        }
    }

    pub fn is_power(&self) -> bool {
        matches!(self, Nonlinearity::Power { .. })
    }
}

/// The ball `B_R(0)` in dimension `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainSpec {
    pub dim: u32,
    pub radius: f64,
}

impl DomainSpec {
    pub fn new(dim: u32, radius: f64) -> Result<Self> {
        if dim < 1 {
            return Err(invalid("spatial dimension must be at least 1"));
        }
        if !radius.is_finite() || radius <= 0.0 {
            return Err(invalid(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Self { dim, radius })
    }

    /// Dimensions in which nonconstant self-similar profiles exist for the
    /// exponential nonlinearity; the default range for profile scans.
    pub fn is_supercritical(&self) -> bool {
        (3..=9).contains(&self.dim)
    }
}

/// A point in similarity variables: `y = r/sqrt(T-t)`, `s = -log(T-t)`, and
/// the rescaled amplitude `w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityPoint {
    pub y: f64,
    pub s: f64,
    pub w: f64,
}

fn check_blowup_time(blowup_time: f64) -> Result<()> {
    if !blowup_time.is_finite() {
        return Err(Error::NonFinite("blow-up time"));
    }
    if blowup_time <= 0.0 {
        return Err(invalid(format!("blow-up time must be positive, got {blowup_time}")));
    }
    Ok(())
}

/// Map `(r, t, u)` to similarity variables, given the blow-up time.
///
/// The rescaled amplitude is `w = log(T-t) + u` for the exponential
/// nonlinearity and `w = (T-t)^{1/(p-1)} u` for the power nonlinearity.
pub fn to_similarity(
    r: f64,
    t: f64,
    blowup_time: f64,
    u_value: f64,
    nl: &Nonlinearity,
) -> Result<SimilarityPoint> {
    check_blowup_time(blowup_time)?;
    if !(r.is_finite() && t.is_finite() && u_value.is_finite()) {
        return Err(Error::NonFinite("similarity input"));
    }
    if r < 0.0 {
        return Err(invalid("radius must be nonnegative"));
    }
    if t >= blowup_time {
        return Err(Error::PostBlowupTime { t, blowup_time });
    }
    Ok(to_similarity_at(r, blowup_time - t, u_value, nl))
}

/// Same map expressed through the distance to blow-up `T - t`, which is the
/// cancellation-safe representation used internally.
pub fn to_similarity_at(r: f64, time_left: f64, u_value: f64, nl: &Nonlinearity) -> SimilarityPoint {
    debug_assert!(time_left > 0.0);
    let root = time_left.sqrt();
    let y = r / root;
    let s = -time_left.ln();
    let w = match *nl {
        Nonlinearity::Exponential => time_left.ln() + u_value,
        Nonlinearity::Power { p } => time_left.powf(1.0 / (p - 1.0)) * u_value,
    };
    SimilarityPoint { y, s, w }
}

/// Invert [`to_similarity`]: returns `(r, t, u)`.
pub fn from_similarity(
    point: &SimilarityPoint,
    blowup_time: f64,
    nl: &Nonlinearity,
) -> Result<(f64, f64, f64)> {
    check_blowup_time(blowup_time)?;
    let (r, time_left, u) = from_similarity_time_left(point, nl)?;
    Ok((r, blowup_time - time_left, u))
}

/// Invert the similarity map into `(r, T - t, u)`.
pub fn from_similarity_time_left(
    point: &SimilarityPoint,
    nl: &Nonlinearity,
) -> Result<(f64, f64, f64)> {
    if !(point.y.is_finite() && point.s.is_finite() && point.w.is_finite()) {
        return Err(Error::NonFinite("similarity point"));
    }
    let time_left = (-point.s).exp();
    let r = point.y * time_left.sqrt();
    let u = match *nl {
        Nonlinearity::Exponential => point.w + point.s,
        Nonlinearity::Power { p } => point.w * time_left.powf(-1.0 / (p - 1.0)),
    };
    Ok((r, time_left, u))
}

/// Refined near-blow-up length scale for solutions with the constant
/// self-similar profile: `λ(t) = |log(T-t)|·sqrt(T-t)` for `m = 2` and
/// `λ(t) = (T-t)^{1/m}` for `m > 2`.
pub fn refined_scale(t: f64, blowup_time: f64, m: u32) -> Result<f64> {
    check_blowup_time(blowup_time)?;
    if !(0.0 < t) {
        return Err(invalid(format!("time must be positive, got {t}")));
    }
    if t >= blowup_time {
        return Err(Error::PostBlowupTime { t, blowup_time });
    }
    refined_scale_at(blowup_time - t, m)
}

/// [`refined_scale`] expressed through `T - t`.
pub fn refined_scale_at(time_left: f64, m: u32) -> Result<f64> {
    if m < 2 {
        return Err(invalid(format!("profile degree must be at least 2, got {m}")));
    }
    if !(time_left.is_finite() && time_left > 0.0) {
        return Err(invalid("time distance to blow-up must be positive and finite"));
    }
    Ok(if m == 2 {
        time_left.ln().abs() * time_left.sqrt()
    } else {
        time_left.powf(1.0 / m as f64)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXP: Nonlinearity = Nonlinearity::Exponential;

    #[test]
    fn similarity_at_unit_distance() {
        // r = 0, T - t = 1, u = 3: y = 0, s = 0 (log 1), w = 3.
        let p = to_similarity(0.0, 1.0, 2.0, 3.0, &EXP).unwrap();
        assert_eq!(p.y, 0.0);
        assert_eq!(p.s, 0.0);
        assert_eq!(p.w, 3.0);
    }

    #[test]
    fn similarity_quarter_distance() {
        let p = to_similarity(0.5, 0.75, 1.0, 0.0, &EXP).unwrap();
        assert!((p.y - 1.0).abs() < 1e-15);
        assert!((p.s - 4.0_f64.ln()).abs() < 1e-15);
        assert!((p.w + 4.0_f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn similarity_power_scaling() {
        // (T-t)^{1/(p-1)} = 0.01 for p = 2, so w = 0.01 * 10 = 0.1.
        let nl = Nonlinearity::power(2.0).unwrap();
        let p = to_similarity(0.0, 0.99, 1.0, 10.0, &nl).unwrap();
        assert!((p.w - 0.1).abs() < 1e-15);
    }

    #[test]
    fn inverse_examples() {
        let (r, t, u) = from_similarity(&SimilarityPoint { y: 0.0, s: 0.0, w: 3.0 }, 2.0, &EXP).unwrap();
        assert_eq!((r, t, u), (0.0, 1.0, 3.0));

        let (r, t, u) = from_similarity(&SimilarityPoint { y: 2.0, s: 2.0, w: 0.0 }, 1.0, &EXP).unwrap();
        assert!((r - 2.0 * (-1.0_f64).exp()).abs() < 1e-15);
        assert!((t - (1.0 - (-2.0_f64).exp())).abs() < 1e-15);
        assert!((u - 2.0).abs() < 1e-15);
    }

    #[test]
    fn post_blowup_time_rejected() {
        assert!(matches!(
            to_similarity(0.0, 1.5, 1.0, 0.0, &EXP),
            Err(Error::PostBlowupTime { .. })
        ));
        assert!(matches!(
            to_similarity(0.0, 0.5, -1.0, 0.0, &EXP),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn refined_scale_examples() {
        // T - t = e^{-4}, m = 2: lambda = 4 e^{-2}.
        let lam = refined_scale_at((-4.0_f64).exp(), 2).unwrap();
        assert!((lam - 4.0 * (-2.0_f64).exp()).abs() < 1e-12);
        // T - t = 1e-6, m = 3: lambda = 1e-2.
        let lam = refined_scale_at(1e-6, 3).unwrap();
        assert!((lam - 1e-2).abs() < 1e-14);
        assert!(matches!(refined_scale_at(0.5, 1), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn refined_scale_dominates_parabolic_scale() {
        // lambda(t)/sqrt(T-t) = |log(T-t)| grows monotonically as t -> T.
        let mut prev = 0.0;
        for k in 2..=8 {
            let time_left = 10f64.powi(-k);
            let ratio = refined_scale_at(time_left, 2).unwrap() / time_left.sqrt();
            assert!(ratio > prev, "ratio not increasing at 1e-{k}");
            prev = ratio;
        }
    }

    #[test]
    fn kappa_values() {
        assert_eq!(Nonlinearity::power(2.0).unwrap().kappa().unwrap(), 1.0);
        let k3 = Nonlinearity::power(3.0).unwrap().kappa().unwrap();
        assert!((k3 - 0.5_f64.sqrt()).abs() < 1e-15);
        for &p in &[1.5, 2.0, 3.0, 5.0] {
            let k = Nonlinearity::power(p).unwrap().kappa().unwrap();
            assert!((k.powf(p - 1.0) * (p - 1.0) - 1.0).abs() < 1e-12, "kappa identity at p={p}");
        }
        assert!(EXP.kappa().is_none());
    }

    #[test]
    fn power_requires_p_above_one() {
        assert!(Nonlinearity::power(1.0).is_err());
        assert!(Nonlinearity::power(0.5).is_err());
        assert!(Nonlinearity::power(f64::NAN).is_err());
    }

    #[test]
    fn nonlinearity_base_values() {
        assert_eq!(EXP.f(0.0), 1.0);
        assert_eq!(Nonlinearity::power(2.0).unwrap().f(0.0), 0.0);
    }

    #[test]
    fn domain_validation() {
        assert!(DomainSpec::new(0, 1.0).is_err());
        assert!(DomainSpec::new(3, -1.0).is_err());
        assert!(DomainSpec::new(3, 1.0).unwrap().is_supercritical());
        assert!(!DomainSpec::new(2, 1.0).unwrap().is_supercritical());
        assert!(!DomainSpec::new(10, 1.0).unwrap().is_supercritical());
    }
}
