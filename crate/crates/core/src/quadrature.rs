//! Deterministic quadrature: composite Gauss–Legendre on radial intervals,
//! product rules on circles and spheres, and ball integrals built from shells.

use std::f64::consts::PI;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};
use crate::model::Dimension;
use crate::vector::pairwise_sum;

/// Panel doublings allowed before a radial integral is declared unconverged.
pub const MAX_DOUBLINGS: usize = 20;

/// Octaves of geometric grading toward the origin for intervals starting at 0.
const ORIGIN_GRADING: i32 = 10;

/// Node counts for boundary integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereRule {
    /// Equispaced nodes on the circle (n = 2).
    pub circle_nodes: usize,
    /// Gauss nodes in the cosine of the polar angle (n = 3).
    pub polar_nodes: usize,
    /// Equispaced azimuthal nodes (n = 3).
    pub azimuth_nodes: usize,
}

impl Default for SphereRule {
    fn default() -> Self {
        SphereRule { circle_nodes: 256, polar_nodes: 64, azimuth_nodes: 128 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Gauss nodes per panel.
    pub panel_order: usize,
    /// Panels in the initial mesh.
    pub panels: usize,
    pub target_rel_err: f64,
    pub sphere_rule: SphereRule,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            panel_order: 10,
            panels: 4,
            target_rel_err: 1e-10,
            sphere_rule: SphereRule::default(),
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.panel_order < 2 {
            return Err(Error::domain("panel_order must be at least 2"));
        }
        if self.panels < 1 {
            return Err(Error::domain("panels must be at least 1"));
        }
        if !(self.target_rel_err > 0.0) {
            return Err(Error::domain("target_rel_err must be positive"));
        }
        let s = &self.sphere_rule;
        if s.circle_nodes < 3 || s.polar_nodes < 2 || s.azimuth_nodes < 3 {
            return Err(Error::domain("sphere rule is too coarse"));
        }
        Ok(())
    }
}

/// A quadrature value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub err_est: f64,
}

fn gauss_rule(order: usize) -> Result<Vec<(f64, f64)>> {
    GaussLegendre::new(order)
        .map(|rule| rule.into_node_weight_pairs())
        .map_err(|e| Error::domain(format!("Gauss rule of order {order}: {e}")))
}

/// Initial panel breakpoints for `[a, b]`.
///
/// Long intervals away from the origin are split geometrically; intervals
/// starting at the origin get one panel `[0, b 2^{-10}]` followed by octaves.
fn initial_mesh(a: f64, b: f64, panels: usize) -> Vec<f64> {
    if a == 0.0 {
        let mut mesh = vec![0.0];
        mesh.extend((0..=ORIGIN_GRADING).rev().map(|k| b * 2f64.powi(-k)));
        return mesh;
    }
    let ratio = b / a;
    if ratio > 8.0 {
        let count = panels.max(ratio.log2().ceil() as usize);
        let mut mesh: Vec<f64> =
            (0..=count).map(|i| a * ratio.powf(i as f64 / count as f64)).collect();
        mesh[count] = b;
        return mesh;
    }
    let width = (b - a) / panels as f64;
    let mut mesh: Vec<f64> = (0..=panels).map(|i| a + width * i as f64).collect();
    mesh[panels] = b;
    mesh
}

fn refine(mesh: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * mesh.len() - 1);
    for pair in mesh.windows(2) {
        out.push(pair[0]);
        out.push(0.5 * (pair[0] + pair[1]));
    }
    out.push(*mesh.last().unwrap());
    out
}

/// Signed value and absolute-value integral on a mesh.
fn composite<F: Fn(f64) -> f64>(f: &F, mesh: &[f64], rule: &[(f64, f64)]) -> (f64, f64) {
    let mut signed = Vec::with_capacity(mesh.len());
    let mut absolute = Vec::with_capacity(mesh.len());
    for pair in mesh.windows(2) {
        let half = 0.5 * (pair[1] - pair[0]);
        let mid = 0.5 * (pair[1] + pair[0]);
        let mut s = 0.0;
        let mut sa = 0.0;
        for &(x, w) in rule {
            let v = f(mid + half * x);
            s += w * v;
            sa += w * v.abs();
        }
        signed.push(half * s);
        absolute.push(half * sa);
    }
    (pairwise_sum(&signed), pairwise_sum(&absolute))
}

/// `radial_integral`: composite Gauss–Legendre with panel doubling.
///
/// The estimate is the change between successive doublings and is accepted
/// once it falls below `target_rel_err` times `∫|f|`.
pub fn radial_integral<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    spec.validate()?;
    if !(a >= 0.0 && b > a) || !b.is_finite() {
        return Err(Error::domain(format!("need 0 <= a < b < inf, got [{a}, {b}]")));
    }
    let rule = gauss_rule(spec.panel_order)?;
    let mut mesh = initial_mesh(a, b, spec.panels);
    let (mut previous, _) = composite(&f, &mesh, &rule);
    if !previous.is_finite() {
        return Err(Error::Numeric(format!("integrand is not finite on [{a}, {b}]")));
    }
    let mut err_est = f64::INFINITY;
    for _ in 0..MAX_DOUBLINGS {
        mesh = refine(&mesh);
        let (value, scale) = composite(&f, &mesh, &rule);
        if !value.is_finite() {
            return Err(Error::Numeric(format!("integrand is not finite on [{a}, {b}]")));
        }
        err_est = (value - previous).abs();
        if err_est <= spec.target_rel_err * scale {
            return Ok(Estimate { value, err_est });
        }
        previous = value;
    }
    Err(Error::Precision { err_est, doublings: MAX_DOUBLINGS })
}

/// Unit directions and weights of a sphere rule; the weights sum to `σ`.
#[derive(Debug, Clone)]
pub struct SphereNodes {
    n: usize,
    nodes: Vec<(Vec<f64>, f64)>,
}

impl SphereNodes {
    pub fn new(dim: &Dimension, rule: &SphereRule) -> Result<Self> {
        let nodes = match dim.n() {
            2 => {
                let count = rule.circle_nodes;
                let w = 2.0 * PI / count as f64;
                (0..count)
                    .map(|k| {
                        let theta = 2.0 * PI * k as f64 / count as f64;
                        (vec![theta.cos(), theta.sin()], w)
                    })
                    .collect()
            }
            3 => {
                let polar = gauss_rule(rule.polar_nodes)?;
                let count = rule.azimuth_nodes;
                let dphi = 2.0 * PI / count as f64;
                let mut nodes = Vec::with_capacity(polar.len() * count);
                for &(z, wz) in &polar {
                    let s = (1.0 - z * z).sqrt();
                    for k in 0..count {
                        let phi = dphi * k as f64;
                        nodes.push((vec![s * phi.cos(), s * phi.sin(), z], wz * dphi));
                    }
                }
                nodes
            }
            n => {
                return Err(Error::Unsupported(format!(
                    "sphere rules exist for n = 2 and n = 3 only, got n = {n}"
                )))
            }
        };
        Ok(SphereNodes { n: dim.n(), nodes })
    }

    /// `∮_{∂B_R(y)} g(x, ν) dσ(x)`.
    pub fn integrate<G: Fn(&[f64], &[f64]) -> f64>(&self, g: G, radius: f64, center: &[f64]) -> f64 {
        let mut x = vec![0.0; self.n];
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .map(|(dir, w)| {
                for ((xi, ci), di) in x.iter_mut().zip(center).zip(dir) {
                    *xi = ci + radius * di;
                }
                w * g(&x, dir)
            })
            .collect();
        pairwise_sum(&terms) * radius.powi(self.n as i32 - 1)
    }
}

/// `sphere_integral`: `g` receives the point and the outward unit normal.
pub fn sphere_integral<G: Fn(&[f64], &[f64]) -> f64>(
    g: G,
    radius: f64,
    center: &[f64],
    dim: &Dimension,
    spec: &QuadratureSpec,
) -> Result<f64> {
    spec.validate()?;
    dim.check_point(center)?;
    if !(radius > 0.0) {
        return Err(Error::domain(format!("radius must be positive, got {radius}")));
    }
    Ok(SphereNodes::new(dim, &spec.sphere_rule)?.integrate(g, radius, center))
}

/// `ball_integral` over `B_R(y)` for n = 2, 3 as a radial integral of shells.
pub fn ball_integral<G: Fn(&[f64]) -> f64>(
    g: G,
    radius: f64,
    center: &[f64],
    dim: &Dimension,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    spec.validate()?;
    dim.check_point(center)?;
    if !(radius > 0.0) {
        return Err(Error::domain(format!("radius must be positive, got {radius}")));
    }
    let shells = SphereNodes::new(dim, &spec.sphere_rule)?;
    radial_integral(|rho| shells.integrate(|x, _| g(x), rho, center), 0.0, radius, spec)
}

/// Ball integral of a function of the distance to the center, any dimension:
/// `σ ∫_0^R r^{n-1} f(r) dr`.
pub fn radial_ball_integral<F: Fn(f64) -> f64>(
    f: F,
    radius: f64,
    dim: &Dimension,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let k = dim.n() as i32 - 1;
    let est = radial_integral(|r| r.powi(k) * f(r), 0.0, radius, spec)?;
    Ok(Estimate { value: dim.sigma() * est.value, err_est: dim.sigma() * est.err_est })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn d(n: usize) -> Dimension {
        Dimension::new(n).unwrap()
    }

    #[test]
    fn polynomial_exactness() {
        let spec = QuadratureSpec::default();
        let est = radial_integral(|r| r, 0.0, 1.0, &spec).unwrap();
        assert_relative_eq!(est.value, 0.5, max_relative = 1e-15);
        let low = QuadratureSpec { panel_order: 2, panels: 1, ..spec };
        let est = radial_integral(|r| r, 0.0, 1.0, &low).unwrap();
        assert_relative_eq!(est.value, 0.5, max_relative = 1e-15);
    }

    #[test]
    fn disk_mass_integrand() {
        // Antiderivative -8π/(1+r²).
        let spec = QuadratureSpec::default();
        let f = |r: f64| 2.0 * PI * r * 8.0 / (1.0 + r * r).powi(2);
        let est = radial_integral(f, 0.0, 1.0, &spec).unwrap();
        assert_relative_eq!(est.value, 4.0 * PI, max_relative = 1e-13);
        assert!(est.err_est <= spec.target_rel_err * est.value);
    }

    #[test]
    fn long_weighted_interval() {
        // ∫_1^R 8π/(1+r²) dr = 8π (atan R - π/4) → 2π².
        let spec = QuadratureSpec::default();
        let big = 1e8;
        let est = radial_integral(|r| 8.0 * PI / (1.0 + r * r), 1.0, big, &spec).unwrap();
        let exact = 8.0 * PI * (big.atan() - PI / 4.0);
        assert_relative_eq!(est.value, exact, max_relative = 1e-12);
        assert!((est.value - 2.0 * PI * PI).abs() < 1e-6);
    }

    #[test]
    fn doubling_is_at_least_fourth_order() {
        let rule = gauss_rule(2).unwrap();
        let f = |r: f64| (r * 1.3).sin() * (-r).exp();
        let mut mesh = initial_mesh(0.5, 3.0, 1);
        let mut values = vec![composite(&f, &mesh, &rule).0];
        for _ in 0..4 {
            mesh = refine(&mesh);
            values.push(composite(&f, &mesh, &rule).0);
        }
        for w in values.windows(3) {
            let ratio = (w[1] - w[0]).abs() / (w[2] - w[1]).abs();
            assert!(ratio >= 4.0, "ratio {ratio}");
        }
    }

    #[test]
    fn nonconvergence_is_reported() {
        let spec = QuadratureSpec { target_rel_err: 1e-300, ..Default::default() };
        let err = radial_integral(|r| (r * 1e3).sin().abs(), 0.5, 1.0, &spec).unwrap_err();
        assert!(matches!(err, Error::Precision { doublings: MAX_DOUBLINGS, .. }));
    }

    #[test]
    fn bad_arguments() {
        let spec = QuadratureSpec::default();
        assert!(radial_integral(|r| r, 1.0, 1.0, &spec).is_err());
        assert!(radial_integral(|r| r, -1.0, 1.0, &spec).is_err());
        let bad = QuadratureSpec { panel_order: 1, ..spec };
        assert!(radial_integral(|r| r, 0.0, 1.0, &bad).is_err());
    }

    #[test]
    fn sphere_constants() {
        let spec = QuadratureSpec::default();
        let c = sphere_integral(|_, _| 1.0, 2.0, &[0.3, -1.0], &d(2), &spec).unwrap();
        assert_relative_eq!(c, 4.0 * PI, max_relative = 1e-13);
        let s = sphere_integral(|_, _| 1.0, 1.0, &[0.0; 3], &d(3), &spec).unwrap();
        assert_relative_eq!(s, 4.0 * PI, max_relative = 1e-13);
        let s = sphere_integral(|_, _| 2.5, 3.0, &[1.0, 2.0, 3.0], &d(3), &spec).unwrap();
        assert_relative_eq!(s, 2.5 * 4.0 * PI * 9.0, max_relative = 1e-13);
    }

    #[test]
    fn odd_integrands_vanish() {
        let spec = QuadratureSpec::default();
        for n in [2, 3] {
            let y: Vec<f64> = (0..n).map(|i| 0.4 * i as f64 - 0.1).collect();
            for &r in &[0.5, 2.0, 7.0] {
                let v = sphere_integral(|_, nu| nu[0], r, &y, &d(n), &spec).unwrap();
                assert!(v.abs() <= 1e-12 * r.powi(n as i32 - 1), "n={n} r={r} v={v}");
                let yc = y.clone();
                let v = sphere_integral(
                    move |x, _| (x[0] - yc[0]).powi(3) * (1.0 + (x[n - 1] - yc[n - 1]).powi(2)),
                    r,
                    &y,
                    &d(n),
                    &spec,
                )
                .unwrap();
                assert!(v.abs() <= 1e-12 * r.powi(n as i32 + 4), "n={n} r={r} v={v}");
            }
        }
    }

    #[test]
    fn unsupported_sphere_dimension() {
        let spec = QuadratureSpec::default();
        let err = sphere_integral(|_, _| 1.0, 1.0, &[0.0; 4], &d(4), &spec).unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
        let err = ball_integral(|_| 1.0, 1.0, &[0.0; 4], &d(4), &spec).unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
    }

    #[test]
    fn ball_volumes() {
        let spec = QuadratureSpec::default();
        for n in [2usize, 3] {
            let dim = d(n);
            for &r in &[0.3, 1.0, 2.0] {
                let y = vec![0.25; n];
                let v = ball_integral(|_| 1.0, r, &y, &dim, &spec).unwrap();
                assert_relative_eq!(v.value, dim.omega_n() * r.powi(n as i32), max_relative = 1e-12);
            }
        }
        let v = ball_integral(|_| 1.0, 2.0, &[0.0; 3], &d(3), &spec).unwrap();
        assert_relative_eq!(v.value, 32.0 * PI / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn radial_ball_volumes_any_dimension() {
        let spec = QuadratureSpec::default();
        for n in 2..=10 {
            let dim = d(n);
            let v = radial_ball_integral(|_| 1.0, 1.5, &dim, &spec).unwrap();
            assert_relative_eq!(v.value, dim.omega_n() * 1.5f64.powi(n as i32), max_relative = 1e-12);
        }
    }
}
