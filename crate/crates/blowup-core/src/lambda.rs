//! The perturbed semigroup `e^{Λt}` with `Λ = A + Φ`, computed by direct
//! time integration of `v_t = Δv - (y/2)·∇v + Φ v` on a radial grid.
//!
//! The drift-diffusion operator is discretized in flux form,
//! `A v = (r^{N-1} ρ)^{-1} (r^{N-1} ρ v')'` with `ρ = e^{-r²/4}`, which makes
//! the discrete operator self-adjoint and nonpositive in the discrete
//! weighted inner product. Crank-Nicolson is therefore contractive in the
//! discrete `L²_ρ` norm, and the potential is applied through an exact
//! exponential Strang split, so the growth bound `e^{Γt}` holds at the
//! scheme level and with equality for constant potentials.

use crate::error::{invalid, Error, Result};
use crate::field::{FarField, PotentialField, WeightedField};
use crate::mehler::{eval_grid, mehler_apply};
use crate::norms::{l2_rho, shifted_norm};
use crate::numeric::solve_tridiagonal;
use crate::quad::gaussian_window;
use crate::report::{Bound, Report};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Discretization parameters for the `e^{Λt}` integration.
#[derive(Debug, Clone, Copy)]
pub struct LambdaOptions {
    pub r_max: f64,
    pub dr: f64,
    pub dt: f64,
}

impl Default for LambdaOptions {
    fn default() -> Self {
        Self { r_max: 24.0, dr: 2e-3, dt: 2.5e-4 }
    }
}

impl LambdaOptions {
    /// Options sized for a norm evaluated at shift magnitude `shift`:
    /// the grid must cover the full quadrature window of the shifted norm.
    pub fn for_shift(shift: f64) -> Self {
        let r_max = shift + gaussian_window(1.0) + 2.0;
        if r_max <= 26.0 {
            Self::default()
        } else {
            // long-range scenarios trade spatial resolution for coverage
            Self { r_max, dr: 8e-3, dt: 1e-3 }
        }
    }
}

/// Weighted flux-form radial Laplacian with drift: assembles the tridiagonal
/// coefficients of `A` on a uniform grid, Dirichlet at `r_max`.
struct RadialHermiteOperator {
    /// sub/diagonal/super of A restricted to the interior nodes 0..m-1
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    /// coupling of the last interior node to the boundary value
    boundary_coupling: f64,
}

impl RadialHermiteOperator {
    fn new(dim: u32, dr: f64, m: usize) -> Self {
        let n = dim as f64;
        // Face-to-cell weight ratios computed analytically:
        // ρ(r ± h/2)/ρ(r) = exp(∓(r h/4 + h²/16) ± h²/8 ...), which stays in
        // range even where the raw weight r^{N-1} e^{-r²/4} underflows.
        let up = |r: f64| -> f64 {
            ((r + 0.5 * dr) / r).powf(n - 1.0) * (-(r * dr / 4.0) - dr * dr / 16.0).exp()
                / (dr * dr)
        };
        let down =
            |r: f64| ((r - 0.5 * dr) / r).powf(n - 1.0) * ((r * dr / 4.0) - dr * dr / 16.0).exp()
                / (dr * dr);
        let mut lower = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut upper = vec![0.0; m];
        for i in 0..m {
            let r = i as f64 * dr;
            let (w_plus, w_minus) = if i == 0 {
                // origin cell: exact monomial mass (h/2)^N/N, ρ(0) = 1
                (2.0 * n * (-dr * dr / 16.0).exp() / (dr * dr), 0.0)
            } else {
                (up(r), down(r))
            };
            if i > 0 {
                lower[i] = w_minus;
            }
            diag[i] = -(w_plus + w_minus);
            if i + 1 < m {
                upper[i] = w_plus;
            }
        }
        let boundary_coupling = up((m as f64 - 1.0) * dr);
        Self { lower, diag, upper, boundary_coupling }
    }
}

/// Compute `e^{Λt}ψ` (or `e^{At}ψ` when no potential is supplied) by
/// Strang-split Crank-Nicolson time stepping. The far boundary carries the
/// field's decay-model value, advanced by the local potential factor.
pub fn lambda_apply(
    field: &WeightedField,
    potential: Option<&PotentialField>,
    t: f64,
    opts: &LambdaOptions,
) -> Result<WeightedField> {
    if !(t.is_finite() && t > 0.0) {
        return Err(invalid(format!("evolution time must be positive, got {t}")));
    }
    if !(opts.dr > 0.0 && opts.dt > 0.0 && opts.r_max > 4.0 * opts.dr) {
        return Err(invalid("lambda solver needs positive dr, dt and a nontrivial domain"));
    }
    if opts.dt < 1e-12 {
        return Err(Error::StepUnderflow { at: 0.0, dt: opts.dt });
    }
    let dim = field.dim();
    let m = (opts.r_max / opts.dr).round() as usize; // interior nodes 0..m-1, boundary at m
    let dr = opts.r_max / m as f64;
    let op = RadialHermiteOperator::new(dim, dr, m);

    let mut v: Vec<f64> = (0..m).map(|i| field.eval(i as f64 * dr)).collect();
    let mut boundary = field.eval(opts.r_max);
    let phi: Option<Vec<f64>> =
        potential.map(|p| (0..m).map(|i| p.eval(i as f64 * dr)).collect());
    let phi_boundary = potential.map(|p| p.eval(opts.r_max)).unwrap_or(0.0);

    let steps = (t / opts.dt).ceil() as usize;
    let dt = t / steps as f64;

    // Crank-Nicolson matrices: (I - dt/2 A) v+ = (I + dt/2 A) v + boundary terms.
    let half = 0.5 * dt;
    let a_lower: Vec<f64> = op.lower.iter().map(|&x| -half * x).collect();
    let a_diag: Vec<f64> = op.diag.iter().map(|&x| 1.0 - half * x).collect();
    let a_upper: Vec<f64> = op.upper.iter().map(|&x| -half * x).collect();
    let mut rhs = vec![0.0; m];

    for _ in 0..steps {
        if let Some(phi) = &phi {
            for (vi, &p) in v.iter_mut().zip(phi) {
                *vi *= (half * p).exp();
            }
            boundary *= (half * phi_boundary).exp();
        }
        // explicit half of CN
        for i in 0..m {
            let mut acc = (1.0 + half * op.diag[i]) * v[i];
            if i > 0 {
                acc += half * op.lower[i] * v[i - 1];
            }
            if i + 1 < m {
                acc += half * op.upper[i] * v[i + 1];
            }
            rhs[i] = acc;
        }
        rhs[m - 1] += dt * op.boundary_coupling * boundary;
        solve_tridiagonal(&a_lower, &a_diag, &a_upper, &mut rhs);
        v.copy_from_slice(&rhs);
        if let Some(phi) = &phi {
            for (vi, &p) in v.iter_mut().zip(phi) {
                *vi *= (half * p).exp();
            }
            boundary *= (half * phi_boundary).exp();
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("lambda evolution state"));
        }
    }

    let mut grid: Vec<f64> = (0..m).map(|i| i as f64 * dr).collect();
    grid.push(opts.r_max);
    v.push(boundary);
    let far = FarField::PowerLaw { exponent: 0.0, coefficient: boundary };
    WeightedField::new(grid, v, dim, far)
}

/// Defect of the variation-of-constants identity
/// `e^{Λt}ψ = e^{At}ψ + ∫_0^t e^{A(t-τ)} Φ e^{Λτ}ψ dτ`
/// in `L²_ρ`, with the integral evaluated by Simpson's rule on `2k` panels.
/// Exercises the identity that connects the two semigroup code paths.
pub fn variation_of_constants_defect(
    psi: &WeightedField,
    potential: &PotentialField,
    t: f64,
    k: usize,
    opts: &LambdaOptions,
) -> Result<f64> {
    if k == 0 {
        return Err(invalid("need at least one Simpson panel pair"));
    }
    let n_nodes = 2 * k + 1;
    let h = t / (n_nodes as f64 - 1.0);
    let grid = eval_grid(opts.r_max, 0.02);
    let dim = psi.dim();

    let lhs = lambda_apply(psi, Some(potential), t, opts)?;
    let mut acc: Vec<f64> = {
        let base = mehler_apply(psi, t, &grid)?;
        base.values().to_vec()
    };
    for node in 0..n_nodes {
        let tau = h * node as f64;
        let weight = if node == 0 || node == n_nodes - 1 {
            1.0
        } else if node % 2 == 1 {
            4.0
        } else {
            2.0
        } * h
            / 3.0;
        let evolved = if tau == 0.0 {
            psi.clone()
        } else {
            lambda_apply(psi, Some(potential), tau, opts)?
        };
        let weighted_vals: Vec<f64> =
            evolved.grid().iter().zip(evolved.values()).map(|(&r, &v)| potential.eval(r) * v).collect();
        let tail = *weighted_vals.last().unwrap();
        let weighted = WeightedField::new(
            evolved.grid().to_vec(),
            weighted_vals,
            dim,
            FarField::PowerLaw { exponent: 0.0, coefficient: tail },
        )?;
        let transported = if t - tau > 0.0 {
            mehler_apply(&weighted, t - tau, &grid)?
        } else {
            // endpoint τ = t: the kernel is the identity
            WeightedField::new(
                grid.clone(),
                grid.iter().map(|&r| weighted.eval(r)).collect(),
                dim,
                FarField::PowerLaw { exponent: 0.0, coefficient: weighted.eval(*grid.last().unwrap()) },
            )?
        };
        for (a, &b) in acc.iter_mut().zip(transported.values()) {
            *a += weight * b;
        }
    }
    let diff: Vec<f64> = grid.iter().zip(&acc).map(|(&r, &a)| lhs.eval(r) - a).collect();
    let tail = *diff.last().unwrap();
    let diff_field = WeightedField::new(
        grid,
        diff,
        dim,
        FarField::PowerLaw { exponent: 0.0, coefficient: tail },
    )?;
    Ok(l2_rho(&diff_field))
}

/// Scenario selector for the `e^{Λt}` regularization checks.
///
/// The constants in the underlying estimates are non-constructive, so each
/// check is a boundedness calibration: the measured ratio `lhs/rhs` must not
/// exceed 10 times the maximal ratio observed on a fixed short-time
/// calibration sweep, which is recorded in the report.
#[derive(Debug, Clone, Copy)]
pub enum LambdaScenario {
    /// `ℒ^p_{e^{s/2}ξ}(e^{Λt}ψ) <= C (1-e^{-t})^{-ε} ℒ^β_{e^{(s-t)/2}ξ}(ψ)`,
    /// for positive `t` well below `s`; `ε = N/(2β)`.
    Evolved { s: f64, t: f64, xi: f64, p: f64, beta: f64 },
    /// `ℒ²_{e^{s/2}ξ}(e^{Λs}ψ) <= C ‖ψ‖_{L²_ρ}` for large `s`.
    FullWindow { s: f64, xi: f64 },
    /// `ℒ²_{e^{(s-s0)/2}ξ}(e^{Λ(s-t)}ψ) <= C ‖ψ‖_{L²_ρ}` for `t ∈ [s0, s0+M]`.
    Offset { s: f64, s0: f64, t: f64, xi: f64 },
}

/// Desk-scale cap on the rescaled time `s`: the evaluation radius
/// `e^{s/2}|ξ|` must stay within a tractable radial grid.
pub const DESK_SCALE_S_CAP: f64 = 8.0;

/// Left norm, right norm, their ratio, and an input summary for one
/// regularization scenario. Exposed so that sweeps can assemble trend
/// comparisons without re-running the per-call calibration.
pub fn scenario_ratio(
    psi: &WeightedField,
    potential: Option<&PotentialField>,
    scenario: &LambdaScenario,
) -> Result<(f64, f64, f64, String)> {
    match *scenario {
        LambdaScenario::Evolved { s, t, xi, p, beta } => {
            if !(t > 0.0 && t < s) {
                return Err(invalid("scenario needs 0 < t < s"));
            }
            if !(p > 1.0 && beta > 1.0) {
                return Err(invalid("scenario needs p, beta > 1"));
            }
            let shift = (s / 2.0).exp() * xi;
            let opts = LambdaOptions::for_shift(shift);
            let evolved = lambda_apply(psi, potential, t, &opts)?;
            let lhs = shifted_norm(&evolved, p, shift)?;
            let eps = psi.dim() as f64 / (2.0 * beta);
            let rhs = (1.0 - (-t).exp()).powf(-eps)
                * shifted_norm(psi, beta, ((s - t) / 2.0).exp() * xi)?;
            Ok((lhs, rhs, lhs / rhs, format!("s={s}, t={t}, xi={xi}, p={p}, beta={beta}")))
        }
        LambdaScenario::FullWindow { s, xi } => {
            let shift = (s / 2.0).exp() * xi;
            let opts = LambdaOptions::for_shift(shift);
            let evolved = lambda_apply(psi, potential, s, &opts)?;
            let lhs = shifted_norm(&evolved, 2.0, shift)?;
            let rhs = l2_rho(psi);
            Ok((lhs, rhs, lhs / rhs, format!("s={s}, xi={xi}")))
        }
        LambdaScenario::Offset { s, s0, t, xi } => {
            if !(s0 <= t && t <= s) {
                return Err(invalid("scenario needs s0 <= t <= s"));
            }
            let shift = ((s - s0) / 2.0).exp() * xi;
            let opts = LambdaOptions::for_shift(shift);
            let lhs = if s - t > 0.0 {
                let evolved = lambda_apply(psi, potential, s - t, &opts)?;
                shifted_norm(&evolved, 2.0, shift)?
            } else {
                shifted_norm(psi, 2.0, shift)?
            };
            let rhs = l2_rho(psi);
            Ok((lhs, rhs, lhs / rhs, format!("s={s}, s0={s0}, t={t}, xi={xi}")))
        }
    }
}

fn scenario_s(scenario: &LambdaScenario) -> f64 {
    match *scenario {
        LambdaScenario::Evolved { s, .. } => s,
        LambdaScenario::FullWindow { s, .. } => s,
        LambdaScenario::Offset { s, s0, .. } => s - s0,
    }
}

/// Run one regularization scenario and compare its ratio against the fixed
/// calibration sweep (the same scenario type at short times, `ξ = 1`).
pub fn check_lambda_regularization(
    psi: &WeightedField,
    potential: Option<&PotentialField>,
    scenario: &LambdaScenario,
) -> Result<Report> {
    let mut report = Report::new("lambda_regularization");
    if scenario_s(scenario) > DESK_SCALE_S_CAP {
        report.mark_inapplicable(format!(
            "out of desk range: s exceeds the cap {DESK_SCALE_S_CAP}"
        ));
        return Ok(report);
    }
    let (lhs, rhs, ratio, inputs) = scenario_ratio(psi, potential, scenario)?;
    report.input("scenario", inputs);
    report.measure("lhs", lhs);
    report.measure("rhs_norm", rhs);

    // Fixed calibration sweep at short times.
    let mut calibration: f64 = 0.0;
    for &s_cal in &[2.0, 3.0] {
        let cal_scenario = match *scenario {
            LambdaScenario::Evolved { t, p, beta, .. } => LambdaScenario::Evolved {
                s: s_cal,
                t: (0.5 * s_cal).min(t.max(0.25)),
                xi: 1.0,
                p,
                beta,
            },
            LambdaScenario::FullWindow { .. } => LambdaScenario::FullWindow { s: s_cal, xi: 1.0 },
            LambdaScenario::Offset { .. } => {
                LambdaScenario::Offset { s: s_cal, s0: 0.0, t: 0.5, xi: 1.0 }
            }
        };
        let (_, _, r, _) = scenario_ratio(psi, potential, &cal_scenario)?;
        calibration = calibration.max(r);
    }
    report.measure("calibration_ratio", calibration);
    if rhs == 0.0 {
        report.note("zero field: vacuous");
        return Ok(report);
    }
    report.require("ratio", ratio, Bound::AtMost(10.0 * calibration));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FarField;
    use crate::mehler::eval_grid;

    fn bump(dim: u32) -> WeightedField {
        WeightedField::from_fn(
            |r| (-(r - 1.0) * (r - 1.0) / 0.6).exp(),
            16.0,
            800,
            dim,
            FarField::Zero,
        )
        .unwrap()
    }

    fn l2_distance(a: &WeightedField, b: &WeightedField, r_hi: f64) -> f64 {
        let grid = eval_grid(r_hi, 0.01);
        let vals: Vec<f64> = grid.iter().map(|&r| a.eval(r) - b.eval(r)).collect();
        let tail = *vals.last().unwrap();
        let diff = WeightedField::new(
            grid,
            vals,
            a.dim(),
            FarField::PowerLaw { exponent: 0.0, coefficient: tail },
        )
        .unwrap();
        l2_rho(&diff)
    }

    #[test]
    fn zero_potential_agrees_with_kernel() {
        let psi = bump(3);
        let opts = LambdaOptions { r_max: 24.0, dr: 2e-3, dt: 5e-4 };
        for &t in &[0.5, 1.0, 2.0] {
            let by_solver = lambda_apply(&psi, None, t, &opts).unwrap();
            let by_kernel = mehler_apply(&psi, t, &eval_grid(24.0, 0.02)).unwrap();
            let d = l2_distance(&by_solver, &by_kernel, 20.0);
            assert!(d < 1e-5, "t {t}: {d:e}");
        }
    }

    #[test]
    fn constant_potential_scales_the_kernel() {
        let psi = bump(3);
        let gamma = 0.35;
        let pot_field = WeightedField::from_fn(|_| gamma, 30.0, 128, 3, FarField::PowerLaw {
            exponent: 0.0,
            coefficient: gamma,
        })
        .unwrap();
        // constant potentials are exempt from the quadratic-decay far field
        // requirement only through an explicit zero-decay power law; build
        // directly to keep Γ = gamma
        let pot = PotentialField::new(pot_field);
        assert!(pot.is_err(), "constant tails must not satisfy the decay condition");
        // use a potential constant on the solver domain but decaying beyond
        let r_flat = 60.0;
        let pot = PotentialField::new(
            WeightedField::from_fn_with_power_tail(
                move |r| {
                    if r <= r_flat {
                        gamma
                    } else {
                        gamma * r_flat * r_flat / (r * r)
                    }
                },
                80.0,
                512,
                3,
                2.0,
            )
            .unwrap(),
        )
        .unwrap();
        let opts = LambdaOptions { r_max: 24.0, dr: 2e-3, dt: 5e-4 };
        for &t in &[0.5, 1.0, 2.0] {
            let with_pot = lambda_apply(&psi, Some(&pot), t, &opts).unwrap();
            let scaled = mehler_apply(&psi, t, &eval_grid(24.0, 0.02)).unwrap();
            let grid = eval_grid(20.0, 0.01);
            let factor = (gamma * t).exp();
            let vals: Vec<f64> =
                grid.iter().map(|&r| with_pot.eval(r) - factor * scaled.eval(r)).collect();
            let tail = *vals.last().unwrap();
            let diff = WeightedField::new(
                grid,
                vals,
                3,
                FarField::PowerLaw { exponent: 0.0, coefficient: tail },
            )
            .unwrap();
            let d = l2_rho(&diff);
            assert!(d < 1e-5, "t {t}: {d:e}");
        }
    }

    #[test]
    fn time_step_refinement_is_second_order_small() {
        let psi = bump(3);
        let pot = PotentialField::capped_singular(3, 0.5, 40.0, 2000).unwrap();
        let t = 1.0;
        let coarse = lambda_apply(&psi, Some(&pot), t, &LambdaOptions {
            r_max: 20.0,
            dr: 4e-3,
            dt: 8e-5,
        })
        .unwrap();
        let fine = lambda_apply(&psi, Some(&pot), t, &LambdaOptions {
            r_max: 20.0,
            dr: 4e-3,
            dt: 4e-5,
        })
        .unwrap();
        let d = l2_distance(&coarse, &fine, 18.0);
        assert!(d < 1e-6, "step-halving moved the solution by {d:e}");
    }

    #[test]
    fn growth_bound_in_weighted_l2() {
        let psi = bump(3);
        let pot = PotentialField::capped_singular(3, 0.5, 40.0, 2000).unwrap();
        let gamma = pot.gamma();
        let before = l2_rho(&psi);
        let opts = LambdaOptions { r_max: 20.0, dr: 4e-3, dt: 5e-4 };
        for &t in &[0.25, 0.5, 1.0] {
            let out = lambda_apply(&psi, Some(&pot), t, &opts).unwrap();
            let after = l2_rho(&out);
            assert!(
                after <= (gamma * t).exp() * (1.0 + 1e-6) * before,
                "t {t}: {after} vs bound {}",
                (gamma * t).exp() * before
            );
        }
    }

    #[test]
    fn variation_of_constants_identity_holds_on_small_times() {
        let psi = bump(3);
        let pot = PotentialField::capped_singular(3, 0.5, 40.0, 2000).unwrap();
        let opts = LambdaOptions { r_max: 20.0, dr: 4e-3, dt: 2e-4 };
        let defect = variation_of_constants_defect(&psi, &pot, 0.2, 4, &opts).unwrap();
        // Simpson error on the Volterra term dominates; the identity itself
        // is exact, so the defect must be far below the term sizes (~1).
        assert!(defect < 5e-3, "defect {defect:e}");
    }

    #[test]
    fn zero_potential_scenario_matches_the_kernel_path() {
        // with no potential the evolved norm must match the direct kernel
        // computation of the same shifted norm
        let psi = bump(3);
        let (s, t, xi, p, beta) = (2.0, 1.0, 0.5, 2.0, 2.0);
        let (lhs_solver, _, _, _) = scenario_ratio(
            &psi,
            None,
            &LambdaScenario::Evolved { s, t, xi, p, beta },
        )
        .unwrap();
        let shift = (s / 2.0_f64).exp() * xi;
        let evolved = mehler_apply(&psi, t, &eval_grid(shift + 18.0, 0.02)).unwrap();
        let lhs_kernel = shifted_norm(&evolved, p, shift).unwrap();
        assert!(
            (lhs_solver - lhs_kernel).abs() <= 1e-6 * lhs_kernel.max(1e-6),
            "solver {lhs_solver} vs kernel {lhs_kernel}"
        );
    }

    #[test]
    fn desk_scale_cap_reports_inapplicable() {
        let psi = bump(3);
        let scenario = LambdaScenario::FullWindow { s: 9.0, xi: 1.0 };
        let report = check_lambda_regularization(&psi, None, &scenario).unwrap();
        assert_eq!(report.verdict(), crate::report::Verdict::Inapplicable);
    }

    #[test]
    fn offset_scenario_endpoint_matches_full_window_path() {
        // With t = s0 the offset norm equals the full-window norm taken at
        // shifted arguments; the two code paths must agree.
        let psi = bump(3);
        let pot = PotentialField::capped_singular(3, 0.5, 60.0, 2000).unwrap();
        let (s, s0, xi) = (4.0, 1.0, 1.0);
        let (lhs_a, _, _, _) = scenario_ratio(
            &psi,
            Some(&pot),
            &LambdaScenario::Offset { s, s0, t: s0, xi },
        )
        .unwrap();
        let evolved = lambda_apply(
            &psi,
            Some(&pot),
            s - s0,
            &LambdaOptions::for_shift(((s - s0) / 2.0).exp() * xi),
        )
        .unwrap();
        let lhs_b = shifted_norm(&evolved, 2.0, ((s - s0) / 2.0).exp() * xi).unwrap();
        assert!((lhs_a - lhs_b).abs() / lhs_b < 1e-12);
    }
}
