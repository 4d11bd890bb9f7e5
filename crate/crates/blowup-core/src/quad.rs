//! Quadrature kernels for shifted Gaussian integrals of radial functions.
//!
//! Integrals of radial functions against off-center Gaussians reduce to a
//! radial integral with the scaled angular factor
//!
//! `J_N(a) = ∫_0^π e^{-a(1-cos θ)} sin^{N-2}θ dθ`,
//!
//! so that `∫_{S^{N-1}} e^{a cos θ} dσ = ω_{N-2} e^a J_N(a)` with
//! `ω_{N-2} = |S^{N-2}|`. Keeping the factor `e^a` merged with the radial
//! Gaussian turns `e^{-(r²+ξ²)/4} e^{rξ/2·cos θ}` into the overflow-safe
//! product `e^{-(r-ξ)²/4} J_N(rξ/2)`.
//!
//! For odd `N` the angular integral has a stable closed form in terms of
//! `∫_0^2 e^{-av} v^k dv`; even `N` falls back to graded-panel quadrature.

use crate::numeric::{gamma_half_integer, GaussLegendre};
use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Surface area of the unit sphere `S^{d}` in `R^{d+1}`.
pub fn sphere_surface_area(d: u32) -> f64 {
    // |S^d| = 2 π^{(d+1)/2} / Γ((d+1)/2)
    2.0 * PI.powf((d as f64 + 1.0) / 2.0) / gamma_half_integer(d + 1)
}

/// The scaled angular factor `J_N(a)` for `N >= 2`, `a >= 0`.
pub fn angular_factor(dim: u32, a: f64) -> f64 {
    debug_assert!(dim >= 2);
    debug_assert!(a >= 0.0);
    match dim {
        3 => {
            // ∫_{-1}^{1} e^{-a(1-u)} du = (1 - e^{-2a})/a, stable via expm1.
            if a == 0.0 {
                2.0
            } else {
                -(-2.0 * a).exp_m1() / a
            }
        }
        5 | 7 | 9 if a > 8.0 => closed_form_odd(dim, a),
        _ => angular_factor_panels(dim, a, 0),
    }
}

/// Angular factor with one factor `cos θ` inserted, used by the odd
/// (first-harmonic) transport harness.
pub fn angular_factor_odd(dim: u32, a: f64) -> f64 {
    debug_assert!(dim >= 2);
    if dim == 3 && a > 8.0 {
        // ∫_{-1}^{1} e^{-a(1-u)} u du = (1-e^{-2a})/a - (1 - e^{-2a}(1+2a))/a²
        let e = (-2.0 * a).exp();
        return (1.0 - e) / a - (1.0 - e * (1.0 + 2.0 * a)) / (a * a);
    }
    angular_factor_panels(dim, a, 1)
}

/// `∫_0^2 e^{-a v} v^n dv = n!/a^{n+1} · (1 - e^{-2a} Σ_{m<=n} (2a)^m/m!)`,
/// cancellation-free for the large `a` where it is used.
fn truncated_moment(n: u32, a: f64) -> f64 {
    let mut tail = 0.0;
    let mut term = 1.0; // (2a)^m / m!
    for m in 0..=n {
        if m > 0 {
            term *= 2.0 * a / m as f64;
        }
        tail += term;
    }
    factorial_of(n) / a.powi(n as i32 + 1) * (1.0 - (-2.0 * a).exp() * tail)
}

fn factorial_of(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product::<f64>().max(1.0)
}

/// Closed form of `J_N` for odd `N`: expand `(1-u²)^k = (v(2-v))^k` with
/// `v = 1-u` and `k = (N-3)/2`.
fn closed_form_odd(dim: u32, a: f64) -> f64 {
    let k = (dim - 3) / 2;
    let mut acc = 0.0;
    // (v(2-v))^k = Σ_j C(k,j) 2^{k-j} (-1)^j v^{k+j}
    for j in 0..=k {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binomial(k, j) * 2f64.powi((k - j) as i32) * truncated_moment(k + j, a);
    }
    acc
}

fn binomial(n: u32, k: u32) -> f64 {
    factorial_of(n) / (factorial_of(k) * factorial_of(n - k))
}

/// Graded-panel Gauss-Legendre evaluation of the angular integral. The
/// integrand concentrates in a boundary layer of width `~1/sqrt(a)` near
/// `θ = 0`, so panels grow geometrically from there.
fn angular_factor_panels(dim: u32, a: f64, cos_power: u32) -> f64 {
    let rule = GaussLegendre::new(24);
    let nu = (dim as f64) - 2.0;
    let f = |theta: f64| {
        let (s, c) = theta.sin_cos();
        let mut v = (-a * (1.0 - c)).exp();
        if nu != 0.0 {
            v *= s.powf(nu);
        }
        if cos_power == 1 {
            v *= c;
        }
        v
    };
    let mut acc = 0.0;
    let mut lo = 0.0;
    let mut width = (2.5 / (a + 1.0).sqrt()).min(PI);
    while lo < PI {
        let hi = (lo + width).min(PI);
        acc += rule.integrate(lo, hi, f);
        lo = hi;
        width *= 2.0;
    }
    acc
}

/// Panels covering `[lo, hi]` graded for the weight `e^{-(r-c)²/(4σ)}`:
/// width proportional to the Gaussian scale `sqrt(σ)`, capped at 1 so that
/// smooth field features remain resolved.
pub fn gaussian_panels(lo: f64, hi: f64, sigma: f64) -> Vec<(f64, f64)> {
    debug_assert!(hi >= lo);
    let width = (2.0 * sigma.sqrt()).clamp(1e-3, 1.0);
    let n = ((hi - lo) / width).ceil().max(1.0) as usize;
    let h = (hi - lo) / n as f64;
    (0..n).map(|i| (lo + h * i as f64, lo + h * (i + 1) as f64)).collect()
}

/// Half-width of the radial integration window for a unit-variance-4σ
/// Gaussian factor: `e^{-16²/4} ≈ 1e-28` bounds the discarded tail well
/// below every tolerance used by the callers.
pub fn gaussian_window(sigma: f64) -> f64 {
    16.0 * sigma.sqrt().max(1e-8)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        assert!((sphere_surface_area(0) - 2.0).abs() < 1e-14); // S^0: two points
        assert!((sphere_surface_area(1) - 2.0 * PI).abs() < 1e-13);
        assert!((sphere_surface_area(2) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_surface_area(3) - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn angular_factor_at_zero_matches_beta_values() {
        // J_N(0) = ∫_0^π sin^{N-2}θ dθ = sqrt(π) Γ((N-1)/2) / Γ(N/2)
        for dim in 2..=9u32 {
            let exact = PI.sqrt() * gamma_half_integer(dim - 1) / gamma_half_integer(dim);
            let got = angular_factor(dim, 0.0);
            assert!((got - exact).abs() < 1e-12, "dim {dim}: {got} vs {exact}");
        }
    }

    #[test]
    fn closed_forms_match_panels_across_the_switch() {
        for &dim in &[3u32, 5, 7, 9] {
            for &a in &[6.0, 8.0, 8.5, 12.0, 40.0, 400.0] {
                let panels = angular_factor_panels(dim, a, 0);
                let fast = angular_factor(dim, a);
                let rel = (panels - fast).abs() / panels.abs().max(1e-300);
                assert!(rel < 1e-11, "dim {dim}, a {a}: rel {rel:e}");
            }
        }
    }

    #[test]
    fn odd_factor_matches_panels() {
        for &a in &[0.5, 2.0, 7.9, 8.1, 30.0, 200.0] {
            let panels = angular_factor_panels(3, a, 1);
            let fast = angular_factor_odd(3, a);
            let rel = (panels - fast).abs() / panels.abs().max(1e-300);
            assert!(rel < 1e-10, "a {a}: rel {rel:e}");
        }
    }

    #[test]
    fn angular_factor_decays_monotonically() {
        for dim in 2..=9u32 {
            let mut prev = angular_factor(dim, 0.0);
            for k in 1..40 {
                let a = 0.5 * k as f64;
                let j = angular_factor(dim, a);
                assert!(j > 0.0 && j < prev, "dim {dim}, a {a}");
                prev = j;
            }
        }
    }
}
