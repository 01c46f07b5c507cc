use std::f64::consts::PI;

use liouville_core::identities::{
    asymptotics_report, geometric_radii, limit_mass_root, mass_flux_identity, pohozaev_residual,
    pohozaev_residual_with, weighted_sobolev_integral, Potential,
};
use liouville_core::level_sets::{default_level_grid, level_grid, level_suite, LevelSuite};
use liouville_core::model::kelvin_eval;
use liouville_core::shooting::lambda_for_alpha;
use liouville_core::vector::{norm, sample_directions};
use liouville_core::{
    Dimension, Error, ExactSolution, QuadratureSpec, RadialProfile, RadialSolution, ShootingOptions, SolutionField,
};

use crate::report::Check;

/// Closed form against closed form.
pub const TOL_CLOSED: f64 = 1e-8;
/// Quadrature and ODE results.
pub const TOL_NUMERIC: f64 = 1e-6;
/// Tail-extrapolated and asymptotic quantities.
pub const TOL_TAIL: f64 = 1e-4;
/// Log-slope of the divergent weighted integral.
pub const TOL_LOG_SLOPE: f64 = 2e-2;

pub const TOLERANCE_LADDER: [f64; 3] = [TOL_CLOSED, TOL_NUMERIC, TOL_TAIL];

/// Directions averaged in the asymptotic samples.
const DIRECTIONS: usize = 16;
/// Deepest default level below the maximum.
const DEFAULT_LEVEL_DEPTH: f64 = 20.0;
/// Points per profile check in `exact`.
const EXACT_POINTS: usize = 64;

/// The solution a suite runs on: a family member centered at the origin, or a
/// shot profile.
pub enum Subject {
    Exact(ExactSolution),
    Shot(RadialSolution),
}

impl Subject {
    pub fn exact(dim: Dimension, lambda: f64) -> Result<Self, Error> {
        Ok(Subject::Exact(ExactSolution::new(dim, lambda, dim.origin())?))
    }

    pub fn shoot(dim: Dimension, alpha: f64, r_max: f64, rtol: f64) -> Result<Self, Error> {
        let opts = ShootingOptions { rtol, ..ShootingOptions::default() };
        Ok(Subject::Shot(RadialSolution::integrate(alpha, r_max, &dim, opts)?))
    }

    pub fn profile(&self) -> &dyn RadialProfile {
        match self {
            Subject::Exact(s) => s,
            Subject::Shot(s) => s,
        }
    }

    pub fn field(&self) -> &dyn SolutionField {
        self.profile()
    }

    pub fn dim(&self) -> Dimension {
        *self.profile().dim()
    }

    /// Outer radius where the subject is known; shot profiles are only
    /// continued logarithmically beyond it.
    pub fn reach(&self) -> f64 {
        match self {
            Subject::Exact(_) => f64::INFINITY,
            Subject::Shot(s) => s.r_max(),
        }
    }

    /// Family scale: given for exact subjects, inferred from the peak for shot ones.
    pub fn lambda(&self) -> f64 {
        match self {
            Subject::Exact(s) => s.lambda(),
            Subject::Shot(s) => lambda_for_alpha(s.alpha(), s.dim()),
        }
    }
}

/// Relative gap `|a - b| / max(|b|, tiny)`.
fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn compare(name: &str, lhs: f64, rhs: f64, tolerance: f64) -> Check {
    Check::new(name, lhs, rhs, rel(lhs, rhs), tolerance)
}

/// A computed gap reported against zero.
fn gap_check(name: &str, value: f64, tolerance: f64) -> Check {
    Check::new(name, value, 0.0, value.abs(), tolerance)
}

/// Turns a failing computation into one failed check.
fn guarded(name: &str, tolerance: f64, f: impl FnOnce() -> Result<Check, Error>) -> Check {
    f().unwrap_or_else(|e| Check::failed(name, tolerance, e))
}

/// `ω_n` from `ω_n = 2π/n ω_{n-2}`, seeded by `ω_0 = 1`, `ω_1 = 2`.
fn omega_by_recurrence(n: usize) -> f64 {
    let mut w = if n.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut k = if n.is_multiple_of(2) { 2 } else { 3 };
    while k <= n {
        w *= 2.0 * PI / k as f64;
        k += 2;
    }
    w
}

pub fn constants(dim: &Dimension) -> Vec<Check> {
    let n = dim.n();
    let nf = n as f64;
    let mut checks = vec![
        compare("dimension_constants.beta_from_c_n", dim.beta_from_c_n(), dim.beta_n(), TOL_CLOSED),
        compare("dimension_constants.omega_n", dim.omega_n(), omega_by_recurrence(n), TOL_CLOSED),
        compare("dimension_constants.sigma", dim.sigma(), nf * omega_by_recurrence(n), TOL_CLOSED),
        compare(
            "dimension_constants.conjugate_exponent",
            dim.conjugate_exponent(),
            nf / (nf - 1.0),
            TOL_CLOSED,
        ),
    ];
    let known = match n {
        2 => Some(8.0 * PI),
        3 => Some(81.0 * PI),
        4 => Some(8192.0 * PI * PI / 27.0),
        _ => None,
    };
    if let Some(q) = known {
        checks.push(compare("dimension_constants.mass_quantum", dim.mass_quantum(), q, TOL_CLOSED));
    }
    checks
}

/// Point checks on the family member.
pub fn exact(sol: &ExactSolution) -> Vec<Check> {
    let dim = *sol.dim();
    let n = dim.n();
    let nf = n as f64;
    let lambda = sol.lambda();
    let peak = dim.c_n().ln() + nf * lambda.ln();
    let dirs = sample_directions(n, EXACT_POINTS);
    let radii = [0.05, 0.3, 1.0, 2.5, 7.0, 40.0].map(|r| r / lambda);
    let points: Vec<Vec<f64>> = dirs
        .iter()
        .enumerate()
        .map(|(k, d)| d.iter().map(|c| c * radii[k % radii.len()]).collect())
        .collect();

    let mut grad_err = 0.0f64;
    for x in &points {
        let g = sol.gradient(x);
        let h = 1e-6 * (1.0 + norm(x));
        let fd: Vec<f64> = (0..n)
            .map(|i| {
                let (mut a, mut b) = (x.clone(), x.clone());
                a[i] += h;
                b[i] -= h;
                (sol.value(&a) - sol.value(&b)) / (2.0 * h)
            })
            .collect();
        let diff: Vec<f64> = g.iter().zip(&fd).map(|(a, b)| a - b).collect();
        grad_err = grad_err.max(norm(&diff) / (1.0 + norm(&g)));
    }

    // -r^{1-n} (r^{n-1} |U'|^{n-2} U')' = e^U, the flux derivative by central differences.
    let mut pde_err = 0.0f64;
    for &r in &radii {
        let w = |s: f64| {
            let d = sol.profile_slope(s);
            s.powi(n as i32 - 1) * d.abs().powi(n as i32 - 2) * d
        };
        let h = 1e-4 * r;
        let lhs = -(8.0 * (w(r + h) - w(r - h)) - (w(r + 2.0 * h) - w(r - 2.0 * h))) / (12.0 * h) / r.powi(n as i32 - 1);
        pde_err = pde_err.max(rel(lhs, sol.profile(r).exp()));
    }

    let mut kelvin_err = 0.0f64;
    for x in &points {
        let r2 = x.iter().map(|c| c * c).sum::<f64>();
        let image: Vec<f64> = x.iter().map(|c| c / r2).collect();
        match kelvin_eval(sol, x) {
            Ok(k) => kelvin_err = kelvin_err.max(rel(k.grad_magnitude * r2, norm(&sol.gradient(&image)))),
            Err(_) => kelvin_err = f64::NAN,
        }
    }

    vec![
        compare("eval_u.peak", sol.value(&dim.origin()), peak, TOL_CLOSED),
        gap_check("eval_grad.finite_difference", grad_err, TOL_NUMERIC),
        gap_check("eval_u.pde_residual", pde_err, TOL_NUMERIC),
        gap_check("kelvin_eval.gradient_identity", kelvin_err, TOL_CLOSED),
        compare("exact_mass.mass_quantum", sol.exact_mass(), dim.mass_quantum(), TOL_CLOSED),
        guarded("enclosed_mass.closed_form", TOL_NUMERIC, || {
            let r = 1.0 / lambda;
            Ok(compare("enclosed_mass.closed_form", sol.enclosed_mass(r)?, sol.enclosed_mass_closed_form(r), TOL_NUMERIC))
        }),
    ]
}

/// Shot profile against the family member with the same center value.
pub fn shoot(sol: &RadialSolution) -> Vec<Check> {
    shoot_named(sol, "")
}

/// As [`shoot`], with `suffix` appended to every check name.
pub fn shoot_named(sol: &RadialSolution, suffix: &str) -> Vec<Check> {
    let family = sol.family_match();
    let name = |base: &str| format!("{base}{suffix}");
    vec![
        gap_check(&name("integrate_radial.sup_error"), sol.sup_distance(&family), TOL_NUMERIC),
        compare(
            &name("mass_in_ball.closed_form"),
            sol.mass_in_ball(sol.r_max()).unwrap_or(f64::NAN),
            family.enclosed_mass_closed_form(sol.r_max()),
            TOL_NUMERIC,
        ),
        total_mass_check(sol, &name("total_mass.mass_quantum")),
    ]
}

/// Total mass with the log-log tail; notes when the fitted tail slope is still
/// short of `β_n`, the sign that `r_max` is not yet asymptotic.
fn total_mass_check(sol: &RadialSolution, name: &str) -> Check {
    let dim = *sol.dim();
    guarded(name, TOL_TAIL, || {
        let t = sol.total_mass()?;
        let c = compare(name, t.mass, dim.mass_quantum(), TOL_TAIL);
        Ok(if !c.pass && rel(t.fitted_beta, dim.beta_n()) > TOL_TAIL {
            c.with_note(format!("fitted tail slope {} is short of {}; raise --rmax", t.fitted_beta, dim.beta_n()))
        } else {
            c
        })
    })
}

/// Centered, off-center (n ≤ 3) and potential-shift checks on `B_R`.
pub fn pohozaev(subject: &Subject, radius: f64) -> Vec<Check> {
    let sol = subject.field();
    let dim = subject.dim();
    let spec = QuadratureSpec::default();
    let origin = dim.origin();
    let mut checks = vec![guarded("pohozaev_residual.centered", TOL_NUMERIC, || {
        let r = pohozaev_residual(sol, &origin, radius, &spec)?;
        Ok(Check::new("pohozaev_residual.centered", r.lhs, r.boundary_total(), r.rel_residual, TOL_NUMERIC))
    })];
    if dim.n() <= 3 {
        checks.push(guarded("pohozaev_residual.off_center", TOL_NUMERIC, || {
            let y = off_center(&dim, radius);
            let r = pohozaev_residual(sol, &y, radius, &spec)?;
            Ok(Check::new("pohozaev_residual.off_center", r.lhs, r.boundary_total(), r.rel_residual, TOL_NUMERIC))
        }));
    }
    checks.push(guarded("pohozaev_residual_with.potential_shift", TOL_CLOSED, || {
        let a = pohozaev_residual_with(sol, &origin, radius, &spec, Potential::ExpMinusOne)?;
        let b = pohozaev_residual_with(sol, &origin, radius, &spec, Potential::Exp)?;
        let residual = (a.residual - b.residual).abs() / (1.0 + a.lhs.abs());
        Ok(Check::new("pohozaev_residual_with.potential_shift", a.residual, b.residual, residual, TOL_CLOSED))
    }));
    checks
}

/// A center inside the ball, off every axis of symmetry of the subject.
fn off_center(dim: &Dimension, radius: f64) -> Vec<f64> {
    let mut y = dim.origin();
    for (k, c) in y.iter_mut().enumerate() {
        *c = radius * [0.2, -0.1, 0.05][k % 3];
    }
    y
}

pub fn mass(subject: &Subject, radius: f64) -> Vec<Check> {
    let sol = subject.field();
    let dim = subject.dim();
    let spec = QuadratureSpec::default();
    let origin = dim.origin();
    let mut checks = vec![guarded("mass_flux_identity.centered", TOL_NUMERIC, || {
        let m = mass_flux_identity(sol, &origin, radius, &spec)?;
        Ok(Check::new("mass_flux_identity.centered", m.interior, m.flux, m.rel_gap, TOL_NUMERIC))
    })];
    if dim.n() <= 3 {
        checks.push(guarded("mass_flux_identity.off_center", TOL_NUMERIC, || {
            let m = mass_flux_identity(sol, &off_center(&dim, radius), radius, &spec)?;
            Ok(Check::new("mass_flux_identity.off_center", m.interior, m.flux, m.rel_gap, TOL_NUMERIC))
        }));
    }
    match subject {
        Subject::Exact(s) => checks.push(guarded("enclosed_mass.closed_form", TOL_NUMERIC, || {
            Ok(compare("enclosed_mass.closed_form", s.enclosed_mass(radius)?, s.enclosed_mass_closed_form(radius), TOL_NUMERIC))
        })),
        Subject::Shot(s) => checks.push(total_mass_check(s, "total_mass.mass_quantum")),
    }
    checks
}

/// The default 50 levels, kept inside the integrated range of shot profiles.
pub fn level_grid_for(subject: &Subject) -> Vec<f64> {
    let t0 = subject.profile().peak();
    match subject {
        Subject::Exact(_) => default_level_grid(t0),
        Subject::Shot(s) => {
            let depth = t0 - s.u_values().last().unwrap();
            level_grid(t0, 50, 0.1, DEFAULT_LEVEL_DEPTH.min(0.9 * depth))
        }
    }
}

/// The level-set identities over `levels`, with the suite for an optional dump.
pub fn levelsets(subject: &Subject, levels: &[f64]) -> (Vec<Check>, Option<LevelSuite>) {
    const NAMES: [(&str, f64); 10] = [
        ("perimeter_gradient_integral.mass", TOL_CLOSED),
        ("superlevel_mass.closed_form", TOL_CLOSED),
        ("superlevel_radius.closed_form", TOL_CLOSED),
        ("mass_ode_check.residual", TOL_NUMERIC),
        ("recombination_energy.gap", TOL_CLOSED),
        ("recombination_mass.gap", TOL_CLOSED),
        ("isoperimetric_chain.d1_d2", TOL_NUMERIC),
        ("isoperimetric_chain.d2_d3", TOL_NUMERIC),
        ("isoperimetric_chain.d3_d4", TOL_NUMERIC),
        ("isoperimetric_chain.order", TOL_CLOSED),
    ];
    // On shot profiles every input is an ODE result.
    let tier = |tol: f64| match subject {
        Subject::Exact(_) => tol,
        Subject::Shot(_) => tol.max(TOL_NUMERIC),
    };
    match level_suite(subject.profile(), levels) {
        Ok(s) => {
            let values = [
                s.perimeter_gap,
                s.closed_mass_gap,
                s.closed_radius_gap,
                s.mass_ode_residual,
                s.recombination_energy_gap,
                s.recombination_mass_gap,
                s.chain_d1_d2,
                s.chain_d2_d3,
                s.chain_d3_d4,
                s.chain_order_violation,
            ];
            let checks = NAMES.iter().zip(values).map(|(&(name, tol), v)| gap_check(name, v, tier(tol))).collect();
            (checks, Some(s))
        }
        Err(e) => (NAMES.iter().map(|&(name, tol)| Check::failed(name, tier(tol), &e)).collect(), None),
    }
}

/// Radius where the slope deficit `1/(1 + (λr)^m)` is about `1e-6`.
pub fn asymptotic_top(dim: &Dimension, lambda: f64) -> f64 {
    10f64.powf(6.0 / dim.conjugate_exponent()) / lambda
}

/// Ten radii over the top decade, capped at the subject's reach.
pub fn asymptotic_radii(subject: &Subject) -> Vec<f64> {
    let top = asymptotic_top(&subject.dim(), subject.lambda()).min(subject.reach());
    geometric_radii(0.1 * top, top, 10)
}

pub fn asymptotics(subject: &Subject, radii: &[f64]) -> Vec<Check> {
    const NAMES: [(&str, f64); 4] = [
        ("asymptotics_report.slope", TOL_TAIL),
        ("asymptotics_report.fitted_beta", TOL_TAIL),
        ("asymptotics_report.remainder_decreasing", 0.0),
        ("asymptotics_report.gamma_from_flux", TOL_TAIL),
    ];
    let dim = subject.dim();
    let spec = QuadratureSpec::default();
    let wanted = asymptotic_top(&dim, subject.lambda());
    let short = (subject.reach() < wanted).then(|| {
        format!("profile ends at r = {:e}, before the asymptotic radius {wanted:e}; raise --rmax", subject.reach())
    });
    let annotate = |c: Check| match &short {
        Some(msg) if c.note.is_none() => c.with_note(msg.clone()),
        _ => c,
    };
    let checks = match asymptotics_report(subject.field(), radii, DIRECTIONS, &spec) {
        Ok(r) => {
            let beta = dim.beta_n();
            let s_top = *r.slope_samples.last().unwrap();
            let violations = r.remainder_samples.windows(2).filter(|p| !(p[1] < p[0])).count() as f64;
            let gamma = *r.gamma_from_flux.last().unwrap();
            vec![
                compare(NAMES[0].0, s_top, beta, NAMES[0].1),
                compare(NAMES[1].0, r.fitted_beta, r.theoretical_beta, NAMES[1].1),
                // Counts the ladder steps where the remainder fails to drop.
                gap_check(NAMES[2].0, violations, NAMES[2].1),
                compare(NAMES[3].0, gamma, dim.mass_quantum(), NAMES[3].1),
            ]
        }
        Err(e) => NAMES.iter().map(|&(name, tol)| Check::failed(name, tol, &e)).collect(),
    };
    checks.into_iter().map(annotate).collect()
}

/// Weighted integrals over `B_R \ B_1`: Cauchy convergence at `q = 1`, the
/// closed-form limit when n = 2, and the log-slope `σ β_n^n` at `q = n`.
pub fn sobolev(subject: &Subject) -> Vec<Check> {
    let sol = subject.field();
    let dim = subject.dim();
    let nf = dim.n() as f64;
    let spec = QuadratureSpec::default();
    let q1 = |r: f64| weighted_sobolev_integral(sol, 1.0, r, &spec);
    let mut checks = vec![guarded("weighted_sobolev_integral.cauchy_q1", TOL_TAIL, || {
        Ok(compare("weighted_sobolev_integral.cauchy_q1", q1(1e5)?, q1(1e6)?, TOL_TAIL))
    })];
    if dim.n() == 2 {
        // ∫_1^∞ 8πλ²/(1 + λ²r²) dr.
        let lambda = subject.lambda();
        let limit = 8.0 * PI * lambda * (0.5 * PI - lambda.atan());
        checks.push(guarded("weighted_sobolev_integral.limit_q1", TOL_TAIL, || {
            Ok(compare("weighted_sobolev_integral.limit_q1", q1(1e6)?, limit, TOL_TAIL))
        }));
    }
    checks.push(guarded("weighted_sobolev_integral.log_slope_qn", TOL_LOG_SLOPE, || {
        let a = weighted_sobolev_integral(sol, nf, 1e4, &spec)?;
        let b = weighted_sobolev_integral(sol, nf, 1e6, &spec)?;
        let slope = (b - a) / 100f64.ln();
        Ok(compare("weighted_sobolev_integral.log_slope_qn", slope, dim.sigma() * dim.beta_n().powf(nf), TOL_LOG_SLOPE))
    }));
    checks
}

pub fn limit_mass(dim: &Dimension) -> Vec<Check> {
    vec![guarded("limit_mass_root.mass_quantum", TOL_CLOSED, || {
        Ok(compare("limit_mass_root.mass_quantum", limit_mass_root(dim)?, dim.mass_quantum(), TOL_CLOSED))
    })]
}
