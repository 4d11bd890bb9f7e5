//! Shifted Gaussian-weighted `L^q` norms of radial fields.
//!
//! For a radial `ψ` and a shift of magnitude `ξ`,
//!
//! `ℒ^q_ξ(ψ) = (∫_{R^N} |ψ(y)|^q e^{-(y-ξ)²/4} dy)^{1/q}`
//!
//! reduces to a 1-D radial integral with the angular factor of [`crate::quad`]:
//! the integrand becomes `|ψ(r)|^q r^{N-1} e^{-(r-ξ)²/4} J_N(rξ/2)`, which is
//! evaluated on graded Gauss-Legendre panels over `[max(0, ξ-W), ξ+W]`.
//! `𝒩^q_r` maximizes `ℒ^q_ξ` over `|ξ| <= r`; for radial fields the shift
//! direction is immaterial and the maximization is one-dimensional.

use crate::error::{invalid, Result};
use crate::field::WeightedField;
use crate::numeric::{maximize_on_interval, GaussLegendre};
use crate::quad::{angular_factor, gaussian_panels, gaussian_window, sphere_surface_area};
use alloc::format;

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Which shifted norm to take: a single shift `ℒ^q_ξ`, or the supremum
/// `𝒩^q_r` over shifts of magnitude at most `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormCenter {
    Shift(f64),
    BallSup(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSpec {
    pub q: f64,
    pub center: NormCenter,
}

impl NormSpec {
    pub fn shifted(q: f64, xi: f64) -> Self {
        Self { q, center: NormCenter::Shift(xi) }
    }

    pub fn ball_sup(q: f64, r: f64) -> Self {
        Self { q, center: NormCenter::BallSup(r) }
    }

    fn validate(&self) -> Result<()> {
        if !(self.q.is_finite() && self.q > 1.0) {
            return Err(invalid(format!("norm exponent must satisfy q > 1, got {}", self.q)));
        }
        let c = match self.center {
            NormCenter::Shift(x) | NormCenter::BallSup(x) => x,
        };
        if !(c.is_finite() && c >= 0.0) {
            return Err(invalid("norm shift must be finite and nonnegative"));
        }
        Ok(())
    }
}

pub fn norm(field: &WeightedField, spec: &NormSpec) -> Result<f64> {
    spec.validate()?;
    match spec.center {
        NormCenter::Shift(xi) => Ok(shifted_norm_unchecked(field, spec.q, xi)),
        NormCenter::BallSup(r) => {
            let (_, best) =
                maximize_on_interval(0.0, r, 17, |xi| shifted_norm_unchecked(field, spec.q, xi));
            Ok(best)
        }
    }
}

/// `ℒ^q_ξ(ψ)`.
pub fn shifted_norm(field: &WeightedField, q: f64, xi: f64) -> Result<f64> {
    norm(field, &NormSpec::shifted(q, xi))
}

/// `𝒩^q_r(ψ) = sup_{|ξ| <= r} ℒ^q_ξ(ψ)`.
pub fn ball_sup_norm(field: &WeightedField, q: f64, r: f64) -> Result<f64> {
    norm(field, &NormSpec::ball_sup(q, r))
}

/// The Gaussian-weighted norm `‖ψ‖_{L²_ρ}`, `ρ = e^{-|y|²/4}`; equals `ℒ²_0`.
pub fn l2_rho(field: &WeightedField) -> f64 {
    shifted_norm_unchecked(field, 2.0, 0.0)
}

/// `‖ψ‖_{L^q_ρ} = ℒ^q_0(ψ)`.
pub fn lq_rho(field: &WeightedField, q: f64) -> Result<f64> {
    shifted_norm(field, q, 0.0)
}

fn shifted_norm_unchecked(field: &WeightedField, q: f64, xi: f64) -> f64 {
    integral_pow_q(field, q, xi).powf(1.0 / q)
}

/// `∫_{R^N} |ψ|^q e^{-(y-ξ)²/4} dy` for radial `ψ`.
fn integral_pow_q(field: &WeightedField, q: f64, xi: f64) -> f64 {
    let dim = field.dim();
    let window = gaussian_window(1.0);
    let lo = (xi - window).max(0.0);
    let hi = xi + window;
    let rule = GaussLegendre::new(16);
    let mut acc = 0.0;
    if dim == 1 {
        // ∫_R |ψ(|x|)|^q e^{-(x-ξ)²/4} dx folds onto [0, ∞).
        for (a, b) in gaussian_panels(lo, hi, 1.0) {
            acc += rule.integrate(a, b, |r| {
                let v = field.eval(r).abs().powf(q);
                let d1 = r - xi;
                let d2 = r + xi;
                v * ((-d1 * d1 / 4.0).exp() + (-d2 * d2 / 4.0).exp())
            });
        }
        return acc;
    }
    let area = sphere_surface_area(dim - 2);
    for (a, b) in gaussian_panels(lo, hi, 1.0) {
        acc += rule.integrate(a, b, |r| {
            let v = field.eval(r).abs().powf(q);
            let d = r - xi;
            v * r.powi(dim as i32 - 1)
                * (-d * d / 4.0).exp()
                * angular_factor(dim, r * xi / 2.0)
        });
    }
    area * acc
}

/// Sharp constant of the interpolation bound `ℒ^p_ξ(ψ) <= C(p,q,ξ) ‖ψ‖_{L^q_ρ}`
/// for `1 < p < q`: with `1/γ = 1 - p/q`,
/// `C = (4π)^{N/(2γp)} e^{(γ-1)ξ²/(4p)}`.
pub fn pq_comparison_constant(p: f64, q: f64, xi: f64, dim: u32) -> Result<f64> {
    if !(1.0 < p && p < q) {
        return Err(invalid(format!("norm comparison requires 1 < p < q, got p={p}, q={q}")));
    }
    let gamma = 1.0 / (1.0 - p / q);
    let n = dim as f64;
    Ok((4.0 * core::f64::consts::PI).powf(n / (2.0 * gamma * p))
        * ((gamma - 1.0) * xi * xi / (4.0 * p)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FarField;
    use core::f64::consts::PI;

    fn constant_one(dim: u32) -> WeightedField {
        WeightedField::from_fn(|_| 1.0, 24.0, 200, dim, FarField::PowerLaw {
            exponent: 0.0,
            coefficient: 1.0,
        })
        .unwrap()
    }

    #[test]
    fn norm_of_one_is_shift_invariant_gaussian_mass() {
        // (∫ e^{-(y-ξ)²/4} dy)^{1/q} = (4π)^{N/(2q)} for any shift.
        for &dim in &[1u32, 2, 3, 5, 8, 9] {
            let field = constant_one(dim);
            for &q in &[2.0, 3.5] {
                let exact = (4.0 * PI).powf(dim as f64 / (2.0 * q));
                for &xi in &[0.0, 1.0, 3.7] {
                    let got = shifted_norm(&field, q, xi).unwrap();
                    let rel = (got - exact).abs() / exact;
                    assert!(rel < 1e-10, "dim {dim}, q {q}, xi {xi}: rel {rel:e}");
                }
            }
        }
    }

    #[test]
    fn example_value_dimension_three() {
        // N = 3, q = 2: (4π)^{3/4}
        let field = constant_one(3);
        let got = shifted_norm(&field, 2.0, 0.0).unwrap();
        let exact = (4.0 * PI).powf(0.75);
        assert!((got - exact).abs() < 1e-9, "got {got}, want {exact}");
    }

    #[test]
    fn zero_field_has_zero_norm() {
        let field = WeightedField::from_fn(|_| 0.0, 10.0, 50, 3, FarField::Zero).unwrap();
        assert_eq!(shifted_norm(&field, 2.0, 1.0).unwrap(), 0.0);
        assert_eq!(ball_sup_norm(&field, 3.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn ball_sup_of_constant_matches_single_shift() {
        let field = constant_one(3);
        for &r in &[0.5, 2.0, 5.0] {
            let sup = ball_sup_norm(&field, 2.0, r).unwrap();
            let at0 = shifted_norm(&field, 2.0, 0.0).unwrap();
            assert!((sup - at0).abs() / at0 < 1e-9, "r = {r}");
        }
    }

    #[test]
    fn gaussian_bump_norm_against_direct_quadrature() {
        // Independent oracle: brute-force 1-D quadrature of the radial
        // reduction with a fine trapezoid rule in a separate code path.
        let dim = 3u32;
        let psi = |r: f64| (-(r - 1.5) * (r - 1.5) / 0.8).exp();
        let field = WeightedField::from_fn(psi, 16.0, 2000, dim, FarField::Zero).unwrap();
        let q = 2.0;
        let xi = 2.0;
        // trapezoid over [0, 20] with h = 1e-3, angular factor via the
        // series-free formula for N = 3: J(a) = (1 - e^{-2a})/a.
        let h = 1e-3;
        let mut acc = 0.0;
        let n = (20.0 / h) as usize;
        for i in 0..=n {
            let r = i as f64 * h;
            let a = r * xi / 2.0;
            let j = if a == 0.0 { 2.0 } else { (1.0 - (-2.0 * a).exp()) / a };
            let d = r - xi;
            let val = psi(r).powf(q) * r * r * (-d * d / 4.0).exp() * j;
            acc += if i == 0 || i == n { 0.5 * val } else { val };
        }
        let oracle = (2.0 * PI * acc * h).powf(1.0 / q);
        let got = shifted_norm(&field, q, xi).unwrap();
        assert!((got - oracle).abs() / oracle < 1e-7, "got {got}, oracle {oracle}");
    }

    #[test]
    fn invalid_exponent_rejected() {
        let field = constant_one(3);
        assert!(shifted_norm(&field, 1.0, 0.0).is_err());
        assert!(shifted_norm(&field, 0.5, 0.0).is_err());
    }

    #[test]
    fn pq_comparison_holds_on_bumps() {
        let dim = 3u32;
        let field = WeightedField::from_fn(
            |r| (-(r - 1.0) * (r - 1.0)).exp() + 0.5 * (-(r - 3.0) * (r - 3.0) / 0.5).exp(),
            18.0,
            900,
            dim,
            FarField::Zero,
        )
        .unwrap();
        for &(p, q) in &[(1.5, 2.0), (2.0, 4.0), (3.0, 3.5)] {
            for &xi in &[0.0, 1.0, 2.5] {
                let lhs = shifted_norm(&field, p, xi).unwrap();
                let rhs =
                    pq_comparison_constant(p, q, xi, dim).unwrap() * lq_rho(&field, q).unwrap();
                assert!(rhs - lhs >= -1e-8, "p={p}, q={q}, xi={xi}: lhs {lhs}, rhs {rhs}");
            }
        }
    }
}
