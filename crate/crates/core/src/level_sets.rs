//! Superlevel sets `Ω_t = {U > t}` of radial solutions. For radially decreasing
//! profiles `Ω_t` is the ball of radius `R(t)` about the center.

use crate::error::{Error, Result};
use crate::model::{Dimension, RadialProfile};

/// Below this magnitude relative gaps are replaced by absolute ones.
pub const ABSOLUTE_FLOOR: f64 = 1e-12;

/// `|a - b| / max(|a|, |b|)`, or `|a - b|` when both are below [`ABSOLUTE_FLOOR`].
pub fn gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale < ABSOLUTE_FLOOR {
        (a - b).abs()
    } else {
        (a - b).abs() / scale
    }
}

/// Quantities attached to one level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSetSample {
    pub t: f64,
    pub radius: f64,
    /// `|Ω_t| = ω_n R^n`.
    pub volume: f64,
    /// `M(t) = ∫_{Ω_t} e^U`.
    pub mass: f64,
    /// `∫_{∂Ω_t} |∇U|^{n-1}`.
    pub perimeter_grad: f64,
    /// `-d|Ω_t|/dt`, analytic.
    pub coarea: f64,
    pub chain: Chain,
}

/// The four members of the isoperimetric chain at one level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chain {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
}

impl Chain {
    pub fn as_array(&self) -> [f64; 4] {
        [self.d1, self.d2, self.d3, self.d4]
    }
}

fn check_level(sol: &dyn RadialProfile, t: f64) -> Result<()> {
    let peak = sol.peak();
    if !(t < peak) {
        return Err(Error::EmptyLevelSet { t, peak });
    }
    Ok(())
}

/// `superlevel_radius`.
pub fn superlevel_radius(sol: &dyn RadialProfile, t: f64) -> Result<f64> {
    check_level(sol, t)?;
    sol.level_radius(t)
}

/// `|Ω_t| = ω_n R(t)^n`.
pub fn superlevel_volume(sol: &dyn RadialProfile, t: f64) -> Result<f64> {
    let dim = sol.dim();
    Ok(dim.omega_n() * superlevel_radius(sol, t)?.powi(dim.n() as i32))
}

/// `superlevel_mass`; zero at the maximum itself.
pub fn superlevel_mass(sol: &dyn RadialProfile, t: f64) -> Result<f64> {
    if t == sol.peak() {
        return Ok(0.0);
    }
    sol.enclosed_mass(superlevel_radius(sol, t)?)
}

/// `|U'|` on `∂Ω_t` together with `R(t)`.
fn boundary_slope(sol: &dyn RadialProfile, t: f64) -> Result<(f64, f64)> {
    let r = superlevel_radius(sol, t)?;
    Ok((r, sol.profile_slope(r).abs()))
}

/// `perimeter_gradient_integral`: `σ R^{n-1} |U'(R)|^{n-1}`.
pub fn perimeter_gradient_integral(sol: &dyn RadialProfile, t: f64) -> Result<f64> {
    let dim = sol.dim();
    let (r, g) = boundary_slope(sol, t)?;
    Ok(dim.sigma() * (r * g).powi(dim.n() as i32 - 1))
}

/// `σ R^{n-1} / |U'(R)|`.
fn coarea_analytic(sol: &dyn RadialProfile, t: f64) -> Result<f64> {
    let dim = sol.dim();
    let (r, g) = boundary_slope(sol, t)?;
    Ok(dim.sigma() * r.powi(dim.n() as i32 - 1) / g)
}

/// Result of `coarea_derivative`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coarea {
    pub analytic: f64,
    pub finite_diff: f64,
}

/// `coarea_derivative`: `∮ 1/|∇U|` against central differences of `|Ω_t|`.
pub fn coarea_derivative(sol: &dyn RadialProfile, t: f64, h: f64) -> Result<Coarea> {
    check_step(sol, t, h)?;
    let analytic = coarea_analytic(sol, t)?;
    let finite_diff = (superlevel_volume(sol, t - h)? - superlevel_volume(sol, t + h)?) / (2.0 * h);
    Ok(Coarea { analytic, finite_diff })
}

fn check_step(sol: &dyn RadialProfile, t: f64, h: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Domain(format!("difference step must be positive, got {h}")));
    }
    check_level(sol, t)?;
    if !(t + h < sol.peak()) {
        return Err(Error::Domain(format!("t + h = {} reaches the maximum {}", t + h, sol.peak())));
    }
    Ok(())
}

/// Result of `mass_ode_check`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassOde {
    /// `M'(t) = -e^t ∮ 1/|∇U|`.
    pub lhs: f64,
    /// `-(n-1)/n (c_n ω_n)^{1/(n-1)} M^{(n-2)/(n-1)} + (n-1)/n M`.
    pub rhs: f64,
    /// `|lhs - rhs| / (1 + |lhs|)`.
    pub residual: f64,
}

/// `mass_ode_check`.
pub fn mass_ode_check(sol: &dyn RadialProfile, t: f64) -> Result<MassOde> {
    let lhs = -t.exp() * coarea_analytic(sol, t)?;
    let rhs = mass_ode_rhs(sol.dim(), superlevel_mass(sol, t)?);
    Ok(MassOde { lhs, rhs, residual: (lhs - rhs).abs() / (1.0 + lhs.abs()) })
}

/// Right side of the mass equation as a function of `M`.
pub fn mass_ode_rhs(dim: &Dimension, mass: f64) -> f64 {
    let n = dim.n() as f64;
    let k = (n - 1.0) / n;
    -k * dim.mass_quantum().powf(1.0 / (n - 1.0)) * mass.powf((n - 2.0) / (n - 1.0)) + k * mass
}

/// Default difference step for `D1`.
pub fn default_step(t: f64) -> f64 {
    1e-5 * (1.0 + t.abs())
}

/// `isoperimetric_chain`.
///
/// `D1 = -d/dt M^{n/(n-1)}` by five-point central differences with step `h`
/// (`t + 2h` must stay below the maximum), `D2` from the analytic
/// boundary integrals, `D3 = n/(n-1) e^t |∂Ω_t|^{n/(n-1)}` and
/// `D4 = (c_n ω_n)^{1/(n-1)} e^t |Ω_t|`.
pub fn isoperimetric_chain(sol: &dyn RadialProfile, t: f64, h: f64) -> Result<Chain> {
    check_step(sol, t, 2.0 * h)?;
    let dim = sol.dim();
    let n = dim.n() as f64;
    let k = n / (n - 1.0);
    let p = |s: f64| superlevel_mass(sol, s).map(|m| m.powf(k));
    let d1 = (8.0 * (p(t - h)? - p(t + h)?) - (p(t - 2.0 * h)? - p(t + 2.0 * h)?)) / (12.0 * h);

    let et = t.exp();
    let d2 = k * perimeter_gradient_integral(sol, t)?.powf(1.0 / (n - 1.0)) * et * coarea_analytic(sol, t)?;

    let r = superlevel_radius(sol, t)?;
    let area = dim.sigma() * r.powi(dim.n() as i32 - 1);
    let d3 = k * et * area.powf(k);
    let d4 = dim.mass_quantum().powf(1.0 / (n - 1.0)) * et * dim.omega_n() * r.powi(dim.n() as i32);
    Ok(Chain { d1, d2, d3, d4 })
}

/// All level quantities at `t`, with `D1` at the default step.
pub fn sample_level(sol: &dyn RadialProfile, t: f64) -> Result<LevelSetSample> {
    let radius = superlevel_radius(sol, t)?;
    let dim = sol.dim();
    Ok(LevelSetSample {
        t,
        radius,
        volume: dim.omega_n() * radius.powi(dim.n() as i32),
        mass: superlevel_mass(sol, t)?,
        perimeter_grad: perimeter_gradient_integral(sol, t)?,
        coarea: coarea_analytic(sol, t)?,
        chain: isoperimetric_chain(sol, t, default_step(t))?,
    })
}

/// `count` levels with `t_0 - t` geometric between `near` and `far`, ordered
/// from the maximum downward.
pub fn level_grid(t0: f64, count: usize, near: f64, far: f64) -> Vec<f64> {
    if count == 1 {
        return vec![t0 - near];
    }
    let ratio = (far / near).ln() / (count - 1) as f64;
    (0..count).map(|k| t0 - near * (ratio * k as f64).exp()).collect()
}

/// The default 50 levels over `[t_0 - 20, t_0 - 0.1]`.
pub fn default_level_grid(t0: f64) -> Vec<f64> {
    level_grid(t0, 50, 0.1, 20.0)
}

/// Closed-form mass `c_n ω_n (1 - e^{(t - t_0)/n})^{n-1}` for the family.
pub fn closed_form_mass(dim: &Dimension, t0: f64, t: f64) -> f64 {
    let n = dim.n() as f64;
    dim.mass_quantum() * (-((t - t0) / n).exp_m1()).powi(dim.n() as i32 - 1)
}

/// Closed-form level radius `λ^{-1} ((c_n λ^n e^{-t})^{1/n} - 1)^{(n-1)/n}`.
pub fn closed_form_radius(dim: &Dimension, lambda: f64, t: f64) -> f64 {
    let n = dim.n() as f64;
    let log_base = (dim.c_n().ln() + n * lambda.ln() - t) / n;
    log_base.exp_m1().powf((n - 1.0) / n) / lambda
}

/// Left minus right side of `M = ω_n e^t R^n + (n-1)/n ω_n |∇U|^n R^n`, relative.
pub fn recombination_energy(sample: &LevelSetSample, sol: &dyn RadialProfile) -> f64 {
    let dim = sol.dim();
    let n = dim.n() as f64;
    let rn = sample.radius.powi(dim.n() as i32);
    let g = sol.profile_slope(sample.radius).abs();
    let rhs = dim.omega_n() * sample.t.exp() * rn + (n - 1.0) / n * dim.omega_n() * g.powi(dim.n() as i32) * rn;
    gap(sample.mass, rhs)
}

/// Gap in `ω_n e^t R^n = M - (c_n ω_n)^{-1/(n-1)} M^{n/(n-1)}`.
pub fn recombination_mass(sample: &LevelSetSample, dim: &Dimension) -> f64 {
    let n = dim.n() as f64;
    let lhs = dim.omega_n() * sample.t.exp() * sample.radius.powi(dim.n() as i32);
    let rhs = sample.mass - dim.mass_quantum().powf(-1.0 / (n - 1.0)) * sample.mass.powf(n / (n - 1.0));
    gap(lhs, rhs)
}

/// Worst-case gaps of the level-set identities over a grid of levels.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSuite {
    pub samples: Vec<LevelSetSample>,
    /// `∫_{∂Ω_t}|∇U|^{n-1}` against `M(t)`.
    pub perimeter_gap: f64,
    /// `M(t)` against the closed form, family scale inferred from the peak.
    pub closed_mass_gap: f64,
    /// `R(t)` against the closed form.
    pub closed_radius_gap: f64,
    pub mass_ode_residual: f64,
    pub recombination_energy_gap: f64,
    pub recombination_mass_gap: f64,
    /// `D1` against `D2`.
    pub chain_d1_d2: f64,
    pub chain_d2_d3: f64,
    pub chain_d3_d4: f64,
    /// Largest violation of `D2 ≥ D3 ≥ D4`, relative; zero when ordered.
    pub chain_order_violation: f64,
}

/// Evaluates every level identity on `levels`.
pub fn level_suite(sol: &dyn RadialProfile, levels: &[f64]) -> Result<LevelSuite> {
    let dim = *sol.dim();
    let t0 = sol.peak();
    let lambda = sol.inferred_lambda();
    let mut suite = LevelSuite {
        samples: Vec::with_capacity(levels.len()),
        perimeter_gap: 0.0,
        closed_mass_gap: 0.0,
        closed_radius_gap: 0.0,
        mass_ode_residual: 0.0,
        recombination_energy_gap: 0.0,
        recombination_mass_gap: 0.0,
        chain_d1_d2: 0.0,
        chain_d2_d3: 0.0,
        chain_d3_d4: 0.0,
        chain_order_violation: 0.0,
    };
    for &t in levels {
        let s = sample_level(sol, t)?;
        let c = s.chain;
        suite.perimeter_gap = suite.perimeter_gap.max(gap(s.perimeter_grad, s.mass));
        suite.closed_mass_gap = suite.closed_mass_gap.max(gap(s.mass, closed_form_mass(&dim, t0, t)));
        suite.closed_radius_gap = suite.closed_radius_gap.max(gap(s.radius, closed_form_radius(&dim, lambda, t)));
        suite.mass_ode_residual = suite.mass_ode_residual.max(mass_ode_check(sol, t)?.residual);
        suite.recombination_energy_gap = suite.recombination_energy_gap.max(recombination_energy(&s, sol));
        suite.recombination_mass_gap = suite.recombination_mass_gap.max(recombination_mass(&s, &dim));
        suite.chain_d1_d2 = suite.chain_d1_d2.max(gap(c.d1, c.d2));
        suite.chain_d2_d3 = suite.chain_d2_d3.max(gap(c.d2, c.d3));
        suite.chain_d3_d4 = suite.chain_d3_d4.max(gap(c.d3, c.d4));
        let order = ((c.d3 - c.d2).max(0.0) / c.d2.abs().max(ABSOLUTE_FLOOR))
            .max((c.d4 - c.d3).max(0.0) / c.d3.abs().max(ABSOLUTE_FLOOR));
        suite.chain_order_violation = suite.chain_order_violation.max(order);
        suite.samples.push(s);
    }
    Ok(suite)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ExactSolution;
    use crate::shooting::integrate_radial;
    use approx::assert_relative_eq;
    use std::f64::consts::{LN_2, PI};

    fn d(n: usize) -> Dimension {
        Dimension::new(n).unwrap()
    }

    fn standard(n: usize) -> ExactSolution {
        ExactSolution::standard(d(n))
    }

    #[test]
    fn planar_spot_values() {
        let sol = standard(2);
        assert_relative_eq!(superlevel_radius(&sol, LN_2).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(superlevel_mass(&sol, LN_2).unwrap(), 4.0 * PI, max_relative = 1e-10);
        assert_relative_eq!(perimeter_gradient_integral(&sol, LN_2).unwrap(), 4.0 * PI, max_relative = 1e-14);
        // Flux form M = n ω_n |∇U|^{n-1} R^{n-1}.
        assert_relative_eq!(2.0 * PI * 2.0, 4.0 * PI);

        let c = coarea_derivative(&sol, LN_2, 1e-4).unwrap();
        assert_relative_eq!(c.analytic, PI, max_relative = 1e-14);
        assert!((c.finite_diff - PI).abs() < 1e-7);

        let chain = isoperimetric_chain(&sol, LN_2, default_step(LN_2)).unwrap();
        for v in chain.as_array() {
            assert_relative_eq!(v, 16.0 * PI * PI, max_relative = 1e-6);
        }
        assert_relative_eq!(chain.d3, chain.d4, max_relative = 1e-14);

        let ode = mass_ode_check(&sol, LN_2).unwrap();
        assert_relative_eq!(ode.lhs, -2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(ode.rhs, -2.0 * PI, max_relative = 1e-9);
        assert!(ode.residual < 1e-8);
    }

    #[test]
    fn three_dimensional_radius() {
        // 60.75 = c_3 and (1 + 1)^3 = 8.
        let sol = standard(3);
        let t = 60.75f64.ln() - 3.0 * LN_2;
        assert_relative_eq!(superlevel_radius(&sol, t).unwrap(), 1.0, max_relative = 1e-13);
    }

    #[test]
    fn near_the_maximum() {
        let sol = standard(2);
        let t0 = sol.peak();
        assert!(superlevel_radius(&sol, t0 - 1e-12).unwrap() < 1e-5);
        assert_eq!(superlevel_mass(&sol, t0).unwrap(), 0.0);
        assert!(matches!(superlevel_radius(&sol, t0), Err(Error::EmptyLevelSet { .. })));
        assert!(matches!(superlevel_mass(&sol, t0 + 1.0), Err(Error::EmptyLevelSet { .. })));
        // For n = 2 the factor M^{(n-2)/(n-1)} is 1: both sides tend to -4π.
        let ode = mass_ode_check(&sol, t0 - 1e-9).unwrap();
        assert_relative_eq!(ode.lhs, -4.0 * PI, max_relative = 1e-8);
        assert_relative_eq!(ode.rhs, -4.0 * PI, max_relative = 1e-8);
        let sol3 = standard(3);
        let ode = mass_ode_check(&sol3, sol3.peak() - 1e-9).unwrap();
        assert!(ode.lhs.abs() < 1e-3 && ode.rhs.abs() < 1e-3, "{ode:?}");
        assert!(matches!(coarea_derivative(&sol, t0 - 1e-3, 1e-2), Err(Error::Domain(_))));
        assert!(matches!(coarea_derivative(&sol, 0.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn deep_levels_approach_total_mass() {
        let sol = standard(2);
        let m = superlevel_mass(&sol, sol.peak() - 40.0).unwrap();
        assert_relative_eq!(m, 8.0 * PI, max_relative = 1e-8);
    }

    #[test]
    fn central_differences_are_second_order() {
        let sol = standard(2);
        let e1 = (coarea_derivative(&sol, LN_2, 1e-2).unwrap().finite_diff - PI).abs();
        let e2 = (coarea_derivative(&sol, LN_2, 5e-3).unwrap().finite_diff - PI).abs();
        assert_relative_eq!(e1 / e2, 4.0, max_relative = 1e-2);
    }

    #[test]
    fn closed_form_mass_derivative_satisfies_the_mass_equation() {
        for n in 2..=6 {
            let dim = d(n);
            let t0 = standard(n).peak();
            for t in default_level_grid(t0) {
                // d/dt of the closed form, differentiated by hand.
                let nf = n as f64;
                let e = ((t - t0) / nf).exp();
                let dm = -dim.mass_quantum() * (nf - 1.0) / nf * e * (1.0 - e).powi(n as i32 - 2);
                let rhs = mass_ode_rhs(&dim, closed_form_mass(&dim, t0, t));
                assert!((dm - rhs).abs() <= 1e-9 * (1.0 + dm.abs()), "n={n} t={t}");
            }
        }
    }

    #[test]
    fn family_suite_over_the_default_grid() {
        for n in [2, 3, 4] {
            for lambda in [0.5, 1.0, 2.0] {
                let sol = ExactSolution::new(d(n), lambda, d(n).origin()).unwrap();
                let suite = level_suite(&sol, &default_level_grid(sol.peak())).unwrap();
                assert_eq!(suite.samples.len(), 50);
                assert!(suite.perimeter_gap <= 1e-8, "n={n} {suite:?}");
                assert!(suite.closed_mass_gap <= 1e-8);
                assert!(suite.closed_radius_gap <= 1e-12);
                assert!(suite.mass_ode_residual <= 1e-6);
                assert!(suite.recombination_energy_gap <= 1e-8);
                assert!(suite.recombination_mass_gap <= 1e-8);
                assert!(suite.chain_d1_d2 <= 1e-6 && suite.chain_d2_d3 <= 1e-6 && suite.chain_d3_d4 <= 1e-6);
                assert!(suite.chain_order_violation <= 1e-12);
                let masses: Vec<f64> = suite.samples.iter().map(|s| s.mass).collect();
                assert!(masses.windows(2).all(|p| p[1] > p[0]));
            }
        }
    }

    #[test]
    fn shot_profile_suite() {
        for n in [2, 3, 4] {
            let sol = integrate_radial(1.0, 1e3, &d(n), 1e-10, 1e-12).unwrap();
            let suite = level_suite(&sol, &default_level_grid(sol.peak())).unwrap();
            assert!(suite.perimeter_gap <= 1e-8, "n={n} {suite:?}");
            assert!(suite.closed_mass_gap <= 1e-8, "n={n} {suite:?}");
            assert!(suite.closed_radius_gap <= 1e-8, "n={n} {suite:?}");
            assert!(suite.mass_ode_residual <= 1e-6);
            assert!(suite.chain_d1_d2 <= 1e-6, "n={n} {suite:?}");
        }
    }

    #[test]
    fn grid_shape() {
        let g = default_level_grid(2.0);
        assert_eq!(g.len(), 50);
        assert_relative_eq!(g[0], 1.9, max_relative = 1e-15);
        assert_relative_eq!(g[49], -18.0, max_relative = 1e-14);
        assert!(g.windows(2).all(|p| p[1] < p[0]));
    }

    #[test]
    fn gap_switches_to_absolute() {
        assert_eq!(gap(1e-14, 2e-14), 1e-14);
        assert_relative_eq!(gap(1.0, 1.5), 1.0 / 3.0);
    }
}
