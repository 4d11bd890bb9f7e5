//! Radial fields on `[0, r_max]` with a decay model beyond the sampled range.

use crate::error::{invalid, Error, Result};
use alloc::format;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Behaviour of a radial field beyond its last sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FarField {
    Zero,
    /// `coefficient * r^{-exponent}`. A zero exponent extends the boundary
    /// value as a constant; negative exponents (growth) are admissible since
    /// every integral taken against a Gaussian weight stays finite.
    PowerLaw { exponent: f64, coefficient: f64 },
}

impl FarField {
    fn eval(&self, r: f64) -> f64 {
        match *self {
            FarField::Zero => 0.0,
            FarField::PowerLaw { exponent, coefficient } => coefficient * r.powf(-exponent),
        }
    }
}

/// A radial function `ψ(|y|)` in dimension `N`, sampled on a strictly
/// increasing grid starting at 0, evaluated by piecewise-cubic interpolation
/// inside the grid and by the far-field model beyond it.
#[derive(Debug, Clone)]
pub struct WeightedField {
    r: Vec<f64>,
    values: Vec<f64>,
    dim: u32,
    far: FarField,
}

impl WeightedField {
    /// Build a field from samples. The far-field model must match the last
    /// sample so that evaluation is continuous across `r_max`.
    pub fn new(r: Vec<f64>, values: Vec<f64>, dim: u32, far: FarField) -> Result<Self> {
        if dim < 1 {
            return Err(invalid("field dimension must be at least 1"));
        }
        if r.len() != values.len() || r.len() < 4 {
            return Err(invalid("field needs at least 4 samples with matching radii"));
        }
        if r[0] != 0.0 {
            return Err(invalid("field grid must start at r = 0"));
        }
        for w in r.windows(2) {
            if !(w[1] > w[0]) {
                return Err(invalid("field grid must be strictly increasing"));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("field sample"));
        }
        let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
        let last = *values.last().unwrap();
        let mismatch = (far.eval(*r.last().unwrap()) - last).abs();
        if mismatch > 1e-9 * scale {
            return Err(invalid(format!(
                "far-field model discontinuous at r_max (mismatch {mismatch:e})"
            )));
        }
        Ok(Self { r, values, dim, far })
    }

    /// Sample a closure on a uniform grid over `[0, r_max]`.
    pub fn from_fn(
        f: impl Fn(f64) -> f64,
        r_max: f64,
        samples: usize,
        dim: u32,
        far: FarField,
    ) -> Result<Self> {
        if !(r_max > 0.0) || samples < 4 {
            return Err(invalid("field grid needs r_max > 0 and at least 4 samples"));
        }
        let n = samples;
        let h = r_max / (n as f64 - 1.0);
        let r: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        let values: Vec<f64> = r.iter().map(|&x| f(x)).collect();
        Self::new(r, values, dim, far)
    }

    /// Sample a closure and extend it beyond `r_max` by the power law
    /// `r^{-exponent}` matched at the boundary sample.
    pub fn from_fn_with_power_tail(
        f: impl Fn(f64) -> f64,
        r_max: f64,
        samples: usize,
        dim: u32,
        exponent: f64,
    ) -> Result<Self> {
        let boundary = f(r_max);
        let far = FarField::PowerLaw { exponent, coefficient: boundary * r_max.powf(exponent) };
        Self::from_fn(f, r_max, samples, dim, far)
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn r_max(&self) -> f64 {
        *self.r.last().unwrap()
    }

    pub fn grid(&self) -> &[f64] {
        &self.r
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn far_field(&self) -> FarField {
        self.far
    }

    /// Evaluate at radius `|r|`.
    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        if r > self.r_max() {
            return self.far.eval(r);
        }
        interpolate_cubic(&self.r, &self.values, r)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// 4-point Lagrange interpolation on a strictly increasing grid.
/// `x` must lie within the grid range.
pub(crate) fn interpolate_cubic(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    debug_assert!(n >= 4);
    // Index of the interval containing x.
    let i = match xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
        Ok(k) => return ys[k],
        Err(k) => k.saturating_sub(1),
    };
    let lo = i.saturating_sub(1).min(n - 4);
    let (x0, x1, x2, x3) = (xs[lo], xs[lo + 1], xs[lo + 2], xs[lo + 3]);
    let (y0, y1, y2, y3) = (ys[lo], ys[lo + 1], ys[lo + 2], ys[lo + 3]);
    let l0 = (x - x1) * (x - x2) * (x - x3) / ((x0 - x1) * (x0 - x2) * (x0 - x3));
    let l1 = (x - x0) * (x - x2) * (x - x3) / ((x1 - x0) * (x1 - x2) * (x1 - x3));
    let l2 = (x - x0) * (x - x1) * (x - x3) / ((x2 - x0) * (x2 - x1) * (x2 - x3));
    let l3 = (x - x0) * (x - x1) * (x - x2) / ((x3 - x0) * (x3 - x1) * (x3 - x2));
    y0 * l0 + y1 * l1 + y2 * l2 + y3 * l3
}

/// A bounded nonnegative potential `Φ(|y|)` with quadratic decay:
/// `Γ = max Φ` and `Φ(y) <= decay_c / |y|^2`.
#[derive(Debug, Clone)]
pub struct PotentialField {
    field: WeightedField,
    gamma: f64,
    decay_c: f64,
}

impl PotentialField {
    /// Wrap a field as a potential. Requires nonnegative samples and a far
    /// field compatible with quadratic decay (zero, or a power law with
    /// exponent at least 2).
    pub fn new(field: WeightedField) -> Result<Self> {
        if field.values().iter().any(|&v| v < 0.0) {
            return Err(invalid("potential must be nonnegative"));
        }
        match field.far_field() {
            FarField::Zero => {}
            FarField::PowerLaw { exponent, coefficient } => {
                if coefficient != 0.0 && exponent < 2.0 {
                    return Err(invalid("potential far field must decay at least like r^-2"));
                }
            }
        }
        let gamma = field.values().iter().fold(0.0_f64, |m, &v| m.max(v));
        let mut decay_c = 0.0_f64;
        for (&r, &v) in field.grid().iter().zip(field.values()) {
            if r > 0.0 {
                decay_c = decay_c.max(v * r * r);
            }
        }
        if let FarField::PowerLaw { exponent, coefficient } = field.far_field() {
            if exponent == 2.0 {
                decay_c = decay_c.max(coefficient);
            }
        }
        Ok(Self { field, gamma, decay_c })
    }

    /// The capped singular-profile potential `Φ(y) = min(Γ, 2(N-2)/|y|^2)`,
    /// i.e. `e^{φ_∞}` truncated at the cap radius `r_cap`.
    pub fn capped_singular(dim: u32, r_cap: f64, r_max: f64, samples: usize) -> Result<Self> {
        if dim < 3 {
            return Err(invalid("singular-profile potential needs dimension at least 3"));
        }
        if !(0.0 < r_cap && r_cap < r_max) {
            return Err(invalid("cap radius must satisfy 0 < r_cap < r_max"));
        }
        let c = 2.0 * (dim as f64 - 2.0);
        let gamma = c / (r_cap * r_cap);
        let f = move |r: f64| if r <= r_cap { gamma } else { c / (r * r) };
        let field = WeightedField::from_fn_with_power_tail(f, r_max, samples, dim, 2.0)?;
        Self::new(field)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn decay_constant(&self) -> f64 {
        self.decay_c
    }

    pub fn field(&self) -> &WeightedField {
        &self.field
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.field.eval(r).max(0.0)
    }
}
