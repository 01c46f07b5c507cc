//! Integral identities satisfied by solutions: the Pohozaev balance, the
//! flux–mass balance, the limit mass equation, far-field asymptotics and the
//! weighted gradient integrals.

use crate::error::{Error, Result};
use crate::model::{kelvin_eval, Dimension, SolutionField};
use crate::quadrature::{self, QuadratureSpec};
use crate::shooting::least_squares;
use crate::vector::{dist, dot, norm, sample_directions};

/// Antiderivative used in the Pohozaev balance. Both choices vanish in the
/// residual up to the divergence theorem.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Potential {
    /// `F(t) = e^t - 1`, the antiderivative with `F(0) = 0`.
    #[default]
    ExpMinusOne,
    /// `F(t) = e^t`.
    Exp,
}

impl Potential {
    pub fn eval(self, t: f64) -> f64 {
        match self {
            Potential::ExpMinusOne => t.exp_m1(),
            Potential::Exp => t.exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PohozaevReport {
    pub center: Vec<f64>,
    pub radius: f64,
    /// `n ∫_{B_R(y)} F(U)`.
    pub lhs: f64,
    /// `∮ F(U) ⟨x-y, ν⟩`.
    pub boundary_f_term: f64,
    /// `∮ |∇U|^{n-2} ⟨x-y, ∇U⟩ ∂_ν U`.
    pub boundary_cross_term: f64,
    /// `-∮ |∇U|^n/n ⟨x-y, ν⟩`.
    pub boundary_energy_term: f64,
    pub residual: f64,
    pub rel_residual: f64,
}

impl PohozaevReport {
    pub fn boundary_total(&self) -> f64 {
        self.boundary_f_term + self.boundary_cross_term + self.boundary_energy_term
    }
}

/// How a ball integral around `y` can be evaluated for `sol`.
enum Geometry {
    /// `sol` is radial about `y`: one-dimensional integrals in any dimension.
    Radial,
    /// Product rules on spheres, n = 2 or 3.
    Shells,
}

fn geometry(sol: &dyn SolutionField, y: &[f64], radius: f64) -> Result<Geometry> {
    let dim = sol.dim();
    dim.check_point(y)?;
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Domain(format!("radius must be positive and finite, got {radius}")));
    }
    if let Some(c) = sol.radial_center() {
        if dist(c, y) <= 1e-14 * (1.0 + norm(y)) {
            return Ok(Geometry::Radial);
        }
    }
    match dim.n() {
        2 | 3 => Ok(Geometry::Shells),
        n => Err(Error::Unsupported(format!(
            "ball integrals off the symmetry center need n = 2 or 3, got n = {n}"
        ))),
    }
}

/// Value and `|∇U|` on the sphere of radius `r` about `y`, along the first axis.
fn radial_sample(sol: &dyn SolutionField, y: &[f64], r: f64) -> (f64, f64) {
    let mut x = y.to_vec();
    x[0] += r;
    (sol.value(&x), norm(&sol.gradient(&x)))
}

/// `pohozaev_residual` with `F(t) = e^t - 1`.
pub fn pohozaev_residual(
    sol: &dyn SolutionField,
    y: &[f64],
    radius: f64,
    spec: &QuadratureSpec,
) -> Result<PohozaevReport> {
    pohozaev_residual_with(sol, y, radius, spec, Potential::ExpMinusOne)
}

/// The Pohozaev balance on `B_R(y)` for an arbitrary antiderivative choice.
pub fn pohozaev_residual_with(
    sol: &dyn SolutionField,
    y: &[f64],
    radius: f64,
    spec: &QuadratureSpec,
    potential: Potential,
) -> Result<PohozaevReport> {
    let dim = *sol.dim();
    let n = dim.n() as f64;
    let (lhs, f_term, cross, energy) = match geometry(sol, y, radius)? {
        Geometry::Radial => {
            let interior = quadrature::radial_ball_integral(
                |r| potential.eval(radial_sample(sol, y, r).0),
                radius,
                &dim,
                spec,
            )?;
            let (u, g) = radial_sample(sol, y, radius);
            let area = dim.sigma() * radius.powi(dim.n() as i32 - 1);
            let gn = g.powi(dim.n() as i32);
            (
                n * interior.value,
                area * potential.eval(u) * radius,
                area * radius * gn,
                -area * radius * gn / n,
            )
        }
        Geometry::Shells => {
            let interior = quadrature::ball_integral(|x| potential.eval(sol.value(x)), radius, y, &dim, spec)?;
            let shell = quadrature::SphereNodes::new(&dim, &spec.sphere_rule)?;
            // ⟨x - y, ν⟩ = R on the sphere.
            let f_term = shell.integrate(|x, _| potential.eval(sol.value(x)) * radius, radius, y);
            let cross = shell.integrate(
                |x, nu| {
                    let g = sol.gradient(x);
                    let gm = norm(&g);
                    let dn = dot(&g, nu);
                    gm.powi(dim.n() as i32 - 2) * radius * dn * dn
                },
                radius,
                y,
            );
            let energy = shell.integrate(
                |x, _| -norm(&sol.gradient(x)).powi(dim.n() as i32) / n * radius,
                radius,
                y,
            );
            (n * interior.value, f_term, cross, energy)
        }
    };
    let residual = lhs - (f_term + cross + energy);
    Ok(PohozaevReport {
        center: y.to_vec(),
        radius,
        lhs,
        boundary_f_term: f_term,
        boundary_cross_term: cross,
        boundary_energy_term: energy,
        residual,
        rel_residual: residual.abs() / (1.0 + lhs.abs()),
    })
}

/// Result of `mass_flux_identity`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassFlux {
    /// `∫_{B_R(y)} e^U`.
    pub interior: f64,
    /// `-∮_{∂B_R(y)} |∇U|^{n-2} ∂_ν U`.
    pub flux: f64,
    pub rel_gap: f64,
}

/// `mass_flux_identity`: the divergence form of the equation on `B_R(y)`.
pub fn mass_flux_identity(
    sol: &dyn SolutionField,
    y: &[f64],
    radius: f64,
    spec: &QuadratureSpec,
) -> Result<MassFlux> {
    let dim = *sol.dim();
    let (interior, flux) = match geometry(sol, y, radius)? {
        Geometry::Radial => {
            let interior =
                quadrature::radial_ball_integral(|r| radial_sample(sol, y, r).0.exp(), radius, &dim, spec)?;
            (interior.value, radial_flux(sol, y, radius))
        }
        Geometry::Shells => {
            let interior = quadrature::ball_integral(|x| sol.value(x).exp(), radius, y, &dim, spec)?;
            (interior.value, shell_flux(sol, y, radius, spec)?)
        }
    };
    Ok(MassFlux { interior, flux, rel_gap: (interior - flux).abs() / (1.0 + interior.abs()) })
}

/// `σ R^{n-1} |U'(R)|^{n-1}` for a field radial about `y`.
fn radial_flux(sol: &dyn SolutionField, y: &[f64], radius: f64) -> f64 {
    let dim = sol.dim();
    let (_, g) = radial_sample(sol, y, radius);
    dim.sigma() * (radius * g).powi(dim.n() as i32 - 1)
}

fn shell_flux(sol: &dyn SolutionField, y: &[f64], radius: f64, spec: &QuadratureSpec) -> Result<f64> {
    let dim = *sol.dim();
    quadrature::sphere_integral(
        |x, nu| {
            let g = sol.gradient(x);
            -norm(&g).powi(dim.n() as i32 - 2) * dot(&g, nu)
        },
        radius,
        y,
        &dim,
        spec,
    )
}

/// The left side minus the right side of `n γ = ω_n (n-1) (γ/(n ω_n))^{n/(n-1)}`.
pub fn limit_mass_equation(dim: &Dimension, gamma: f64) -> f64 {
    let n = dim.n() as f64;
    let w = dim.omega_n();
    n * gamma - w * (n - 1.0) * (gamma / (n * w)).powf(n / (n - 1.0))
}

/// `limit_mass_root`: the positive root of the limit mass equation by Newton's
/// method, falling back to bisection whenever a step leaves the bracket.
pub fn limit_mass_root(dim: &Dimension) -> Result<f64> {
    let n = dim.n() as f64;
    let w = dim.omega_n();
    let m = n / (n - 1.0);
    let g = |x: f64| limit_mass_equation(dim, x);
    let dg = |x: f64| n - w * (n - 1.0) * m * (x / (n * w)).powf(m - 1.0) / (n * w);

    let (mut lo, mut hi) = (w, 10f64.powi(dim.n() as i32) * dim.mass_quantum());
    let (g_lo, g_hi) = (g(lo), g(hi));
    if !(g_lo > 0.0 && g_hi < 0.0) {
        return Err(Error::Numeric(format!("limit mass bracket [{lo}, {hi}] does not change sign")));
    }
    let mut x = hi;
    for _ in 0..200 {
        let gx = g(x);
        if gx == 0.0 {
            return Ok(x);
        }
        if gx > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let step = gx / dg(x);
        let mut next = x - step;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 2.0 * f64::EPSILON * next.abs() || hi - lo <= 2.0 * f64::EPSILON * hi {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::Numeric("limit mass iteration did not settle".into()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticsReport {
    pub radii: Vec<f64>,
    /// Direction-averaged `s(r) = -⟨x, ∇U(x)⟩` on `|x| = r`.
    pub slope_samples: Vec<f64>,
    /// Least-squares slope of `-U` against `log r` over the top decade of radii.
    pub fitted_beta: f64,
    /// `n²/(n-1)`, reported next to the fit.
    pub theoretical_beta: f64,
    /// Sup over sampled directions of `|x| |∇(Û - β_n log|x|)|` at `|x| = 1/r`.
    pub remainder_samples: Vec<f64>,
    /// `γ(r) = ∫_{B_r} e^U` evaluated as the boundary flux.
    pub gamma_from_flux: Vec<f64>,
}

/// `asymptotics_report` about the origin.
pub fn asymptotics_report(
    sol: &dyn SolutionField,
    radii: &[f64],
    directions: usize,
    spec: &QuadratureSpec,
) -> Result<AsymptoticsReport> {
    if radii.len() < 4 {
        return Err(Error::Domain(format!("need at least 4 radii for a fit, got {}", radii.len())));
    }
    if !(radii[0] > 0.0) || radii.windows(2).any(|p| !(p[1] > p[0])) || !radii[radii.len() - 1].is_finite() {
        return Err(Error::Domain("radii must be positive, finite and strictly increasing".into()));
    }
    if directions == 0 {
        return Err(Error::Domain("need at least one direction".into()));
    }
    let dim = *sol.dim();
    let beta = dim.beta_n();
    let dirs = sample_directions(dim.n(), directions);
    let origin = dim.origin();
    let radial_here = matches!(geometry(sol, &origin, 1.0), Ok(Geometry::Radial));

    let mut slopes = Vec::with_capacity(radii.len());
    let mut means = Vec::with_capacity(radii.len());
    let mut remainders = Vec::with_capacity(radii.len());
    let mut gammas = Vec::with_capacity(radii.len());
    for &r in radii {
        let (mut s, mut u, mut rem) = (0.0, 0.0, 0.0f64);
        for d in &dirs {
            let x: Vec<f64> = d.iter().map(|c| c * r).collect();
            s -= dot(&x, &sol.gradient(&x));
            u += sol.value(&x);
            let z: Vec<f64> = d.iter().map(|c| c / r).collect();
            let k = kelvin_eval(sol, &z)?;
            let zz = dot(&z, &z);
            let diff: Vec<f64> = k.gradient.iter().zip(&z).map(|(g, zi)| g - beta * zi / zz).collect();
            rem = rem.max(norm(&z) * norm(&diff));
        }
        slopes.push(s / dirs.len() as f64);
        means.push(u / dirs.len() as f64);
        remainders.push(rem);
        gammas.push(if radial_here { radial_flux(sol, &origin, r) } else { shell_flux(sol, &origin, r, spec)? });
    }

    let top = radii[radii.len() - 1];
    let window: Vec<(f64, f64)> =
        radii.iter().zip(&means).filter(|(&r, _)| r >= 0.1 * top).map(|(&r, &u)| (r.ln(), -u)).collect();
    if window.len() < 2 {
        return Err(Error::Domain("fewer than two radii in the top decade".into()));
    }
    let (fitted_beta, _) = least_squares(&window);

    Ok(AsymptoticsReport {
        radii: radii.to_vec(),
        slope_samples: slopes,
        fitted_beta,
        theoretical_beta: beta,
        remainder_samples: remainders,
        gamma_from_flux: gammas,
    })
}

/// Geometric ladder of `count` radii from `first` to `last`.
pub fn geometric_radii(first: f64, last: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![first];
    }
    let step = (last / first).ln() / (count - 1) as f64;
    (0..count)
        .map(|k| if k + 1 == count { last } else { first * (step * k as f64).exp() })
        .collect()
}

/// `weighted_sobolev_integral`: `∫_{B_R \ B_1} |∇U|^q / |x|^{2(n-q)} dx` for a
/// field radial about the origin.
pub fn weighted_sobolev_integral(sol: &dyn SolutionField, q: f64, radius: f64, spec: &QuadratureSpec) -> Result<f64> {
    let dim = *sol.dim();
    let n = dim.n() as f64;
    if !(q >= 1.0 && q <= n) {
        return Err(Error::Domain(format!("exponent q = {q} must lie in [1, {n}]")));
    }
    if !(radius > 1.0) || !radius.is_finite() {
        return Err(Error::Domain(format!("outer radius must exceed 1, got {radius}")));
    }
    let origin = dim.origin();
    if !matches!(geometry(sol, &origin, radius)?, Geometry::Radial) {
        return Err(Error::Domain("weighted integrals need a field radial about the origin".into()));
    }
    let k = dim.n() as i32 - 1;
    let est = quadrature::radial_integral(
        |r| r.powi(k) * radial_sample(sol, &origin, r).1.powf(q) * r.powf(-2.0 * (n - q)),
        1.0,
        radius,
        spec,
    )?;
    Ok(dim.sigma() * est.value)
}
