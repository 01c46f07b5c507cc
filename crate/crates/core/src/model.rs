//! Dimensional constants, the explicit solution family of `-Δ_n U = e^U` and
//! the field interface consumed by the verifiers.

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quadrature::{self, QuadratureSpec};
use crate::vector::{dist, dot, norm, sub};

/// Largest supported dimension.
pub const MAX_DIMENSION: usize = 16;

/// The dimension `n` together with every constant derived from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dimension {
    n: usize,
    c_n: f64,
    omega_n: f64,
    sigma: f64,
    beta_n: f64,
    mass_quantum: f64,
}

impl Dimension {
    /// Builds the constants for `2 <= n <= 16`.
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("dimension must be at least 2, got {n}")));
        }
        if n > MAX_DIMENSION {
            return Err(Error::domain(format!(
                "dimension {n} exceeds the supported maximum {MAX_DIMENSION}"
            )));
        }
        let nf = n as f64;
        let beta_n = nf * nf / (nf - 1.0);
        let c_n = nf * beta_n.powi(n as i32 - 1);
        // |B_1| = π^{n/2} / Γ(n/2 + 1), evaluated in log space.
        let omega_n = (0.5 * nf * PI.ln() - ln_gamma(0.5 * nf + 1.0)).exp();
        Ok(Dimension {
            n,
            c_n,
            omega_n,
            sigma: nf * omega_n,
            beta_n,
            mass_quantum: c_n * omega_n,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `c_n = n (n²/(n-1))^{n-1}`.
    pub fn c_n(&self) -> f64 {
        self.c_n
    }

    /// Volume of the unit ball.
    pub fn omega_n(&self) -> f64 {
        self.omega_n
    }

    /// Surface measure of the unit sphere, `n ω_n`.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Far-field log slope `n²/(n-1)`.
    pub fn beta_n(&self) -> f64 {
        self.beta_n
    }

    /// The same slope through the mass route, `(c_n/n)^{1/(n-1)}`.
    pub fn beta_from_c_n(&self) -> f64 {
        (self.c_n / self.n as f64).powf(1.0 / (self.n as f64 - 1.0))
    }

    /// Total mass `c_n ω_n` of every member of the family.
    pub fn mass_quantum(&self) -> f64 {
        self.mass_quantum
    }

    /// The exponent `n/(n-1)`.
    pub fn conjugate_exponent(&self) -> f64 {
        let nf = self.n as f64;
        nf / (nf - 1.0)
    }

    pub fn origin(&self) -> Vec<f64> {
        vec![0.0; self.n]
    }

    pub(crate) fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::domain(format!(
                "point has {} coordinates, expected {}",
                x.len(),
                self.n
            )));
        }
        Ok(())
    }
}

/// `dimension_constants`.
pub fn dimension_constants(n: usize) -> Result<Dimension> {
    Dimension::new(n)
}

/// A solution of the Liouville equation that can be evaluated pointwise.
pub trait SolutionField: Send + Sync {
    fn dim(&self) -> &Dimension;

    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    /// The symmetry center for radially symmetric fields.
    fn radial_center(&self) -> Option<&[f64]>;

    fn is_radial(&self) -> bool {
        self.radial_center().is_some()
    }
}

/// A radially symmetric, radially decreasing solution.
pub trait RadialProfile: SolutionField {
    fn center(&self) -> &[f64];

    /// U as a function of the distance to the center.
    fn profile(&self, r: f64) -> f64;

    /// dU/dr.
    fn profile_slope(&self, r: f64) -> f64;

    /// The maximum value `t_0 = U(center)`.
    fn peak(&self) -> f64 {
        self.profile(0.0)
    }

    /// `∫_{B_r(center)} e^U`.
    fn enclosed_mass(&self, r: f64) -> Result<f64>;

    /// Radius of the superlevel set `{U > t}`.
    fn level_radius(&self, t: f64) -> Result<f64>;

    /// The family scale whose center value equals `peak()`.
    fn inferred_lambda(&self) -> f64 {
        lambda_for_peak(self.dim(), self.peak())
    }
}

/// `λ = (e^{t_0}/c_n)^{1/n}`.
pub fn lambda_for_peak(dim: &Dimension, peak: f64) -> f64 {
    ((peak - dim.c_n().ln()) / dim.n() as f64).exp()
}

/// `U_{λ,p}(x) = log( c_n λ^n / (1 + λ^{n/(n-1)} |x-p|^{n/(n-1)})^n )`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    dim: Dimension,
    lambda: f64,
    center: Vec<f64>,
}

impl ExactSolution {
    /// `family_member`: the scaled and translated solution `U(λ(x-p)) + n log λ`.
    pub fn new(dim: Dimension, lambda: f64, center: Vec<f64>) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::domain(format!("scale must be positive, got {lambda}")));
        }
        dim.check_point(&center)?;
        Ok(ExactSolution { dim, lambda, center })
    }

    /// The member with λ = 1 centered at the origin.
    pub fn standard(dim: Dimension) -> Self {
        ExactSolution { dim, lambda: 1.0, center: dim.origin() }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `exact_mass`: `c_n ω_n` regardless of λ and p.
    pub fn exact_mass(&self) -> f64 {
        self.dim.mass_quantum()
    }

    /// Closed-form `∫_{B_r(p)} e^U = c_n ω_n (s/(1+s))^{n-1}` with `s = (λr)^{n/(n-1)}`,
    /// obtained from the flux through `∂B_r(p)`.
    pub fn enclosed_mass_closed_form(&self, r: f64) -> f64 {
        let s = (self.lambda * r).powf(self.dim.conjugate_exponent());
        self.dim.mass_quantum() * (s / (1.0 + s)).powi(self.dim.n() as i32 - 1)
    }

    fn log_peak(&self) -> f64 {
        self.dim.c_n().ln() + self.dim.n() as f64 * self.lambda.ln()
    }
}

impl SolutionField for ExactSolution {
    fn dim(&self) -> &Dimension {
        &self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.profile(dist(x, &self.center))
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let d = sub(x, &self.center);
        let r = norm(&d);
        if r == 0.0 {
            return vec![0.0; d.len()];
        }
        let scale = self.profile_slope(r) / r;
        d.into_iter().map(|c| c * scale).collect()
    }

    fn radial_center(&self) -> Option<&[f64]> {
        Some(&self.center)
    }
}

impl RadialProfile for ExactSolution {
    fn center(&self) -> &[f64] {
        &self.center
    }

    fn profile(&self, r: f64) -> f64 {
        let m = self.dim.conjugate_exponent();
        self.log_peak() - self.dim.n() as f64 * (self.lambda * r).powf(m).ln_1p()
    }

    fn profile_slope(&self, r: f64) -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        let n = self.dim.n() as f64;
        let m = self.dim.conjugate_exponent();
        let s = (self.lambda * r).powf(m);
        -n * m * s / (r * (1.0 + s))
    }

    fn peak(&self) -> f64 {
        self.log_peak()
    }

    /// Radial Gauss quadrature of `σ r^{n-1} e^U` on `[0, r]`.
    fn enclosed_mass(&self, r: f64) -> Result<f64> {
        if r < 0.0 {
            return Err(Error::domain(format!("radius must be non-negative, got {r}")));
        }
        if r == 0.0 {
            return Ok(0.0);
        }
        let est = quadrature::radial_ball_integral(
            |s| self.profile(s).exp(),
            r,
            &self.dim,
            &QuadratureSpec::default(),
        )?;
        Ok(est.value)
    }

    /// Inverts `e^t = c_n λ^n / (1 + (λR)^{n/(n-1)})^n` in closed form.
    fn level_radius(&self, t: f64) -> Result<f64> {
        let peak = self.log_peak();
        if !(t < peak) {
            return Err(Error::EmptyLevelSet { t, peak });
        }
        let n = self.dim.n() as f64;
        let base = ((peak - t) / n).exp_m1();
        Ok(base.powf((n - 1.0) / n) / self.lambda)
    }

    fn inferred_lambda(&self) -> f64 {
        self.lambda
    }
}

/// `eval_u`.
pub fn eval_u(sol: &ExactSolution, x: &[f64]) -> f64 {
    sol.value(x)
}

/// `eval_grad`; the zero vector at the center.
pub fn eval_grad(sol: &ExactSolution, x: &[f64]) -> Vec<f64> {
    sol.gradient(x)
}

/// `family_member`.
pub fn family_member(dim: Dimension, lambda: f64, p: Vec<f64>) -> Result<ExactSolution> {
    ExactSolution::new(dim, lambda, p)
}

/// The Kelvin transform `Û(x) = U(x/|x|²)` and its gradient at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct KelvinSample {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub grad_magnitude: f64,
}

/// `kelvin_eval`: the gradient is pushed through the Jacobian of the inversion,
/// `∂y_k/∂x_i = (δ_ik - 2 x_i x_k / |x|²) / |x|²`.
pub fn kelvin_eval(sol: &dyn SolutionField, x: &[f64]) -> Result<KelvinSample> {
    sol.dim().check_point(x)?;
    let r2 = dot(x, x);
    if r2 == 0.0 {
        return Err(Error::domain("the Kelvin image of the origin is the point at infinity"));
    }
    let image: Vec<f64> = x.iter().map(|c| c / r2).collect();
    let value = sol.value(&image);
    let grad_u = sol.gradient(&image);
    let x_dot_g = dot(x, &grad_u);
    let gradient: Vec<f64> = x
        .iter()
        .zip(&grad_u)
        .map(|(xi, gi)| (gi - 2.0 * xi * x_dot_g / r2) / r2)
        .collect();
    let grad_magnitude = norm(&gradient);
    Ok(KelvinSample { value, gradient, grad_magnitude })
}
