//! Radial shooting for `-(r^{n-1}|U'|^{n-2}U')' = r^{n-1} e^U` from a regular center.
//!
//! The state is `(U, w)` with the flux `w = r^{n-1}|U'|^{n-2}U'`, so that
//! `U' = -(|w|/r^{n-1})^{1/(n-1)}` and `w' = -r^{n-1} e^U`. Integration starts
//! at a small radius `r0` from the leading-order series of the flux integral.

use crate::error::{Error, Result};
use crate::model::{Dimension, ExactSolution, RadialProfile, SolutionField};
use crate::vector::{dist, norm, sub};

pub const DEFAULT_R0: f64 = 1e-6;
pub const DEFAULT_RTOL: f64 = 1e-10;
pub const DEFAULT_ATOL: f64 = 1e-12;

const MAX_STEPS: usize = 2_000_000;
const MAX_STEP_FRACTION: f64 = 0.5;
const SUP_SAMPLES: usize = 8;

/// `series_start`: `(U(r0), w(r0))` from the regular-center expansion.
pub fn series_start(alpha: f64, r0: f64, dim: &Dimension) -> Result<(f64, f64)> {
    if !(r0 > 0.0) {
        return Err(Error::domain(format!("start radius must be positive, got {r0}")));
    }
    Ok((series_u(alpha, r0, dim), series_w(alpha, r0, dim)))
}

fn series_u(alpha: f64, r: f64, dim: &Dimension) -> f64 {
    let n = dim.n() as f64;
    let k = ((alpha - n.ln()) / (n - 1.0)).exp();
    alpha - (n - 1.0) / n * k * r.powf(n / (n - 1.0))
}

fn series_w(alpha: f64, r: f64, dim: &Dimension) -> f64 {
    let n = dim.n() as f64;
    -(alpha.exp()) * r.powi(dim.n() as i32) / n
}

fn series_slope(alpha: f64, r: f64, dim: &Dimension) -> f64 {
    let n = dim.n() as f64;
    -((alpha - n.ln() + r.ln()) / (n - 1.0)).exp()
}

/// `U'` recovered from the flux.
fn slope_from_flux(w: f64, r: f64, dim: &Dimension) -> f64 {
    let k = dim.n() as f64 - 1.0;
    -(w.abs() / r.powf(k)).powf(1.0 / k)
}

fn rhs(r: f64, y: [f64; 2], dim: &Dimension) -> [f64; 2] {
    let k = dim.n() as i32 - 1;
    [slope_from_flux(y[1], r, dim), -r.powi(k) * y[0].exp()]
}

/// Integration controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingOptions {
    pub rtol: f64,
    pub atol: f64,
    pub r0: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions { rtol: DEFAULT_RTOL, atol: DEFAULT_ATOL, r0: DEFAULT_R0 }
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// One trial step; returns the fifth-order increment, the derivative at the
/// new point (first stage of the next step) and the scaled error norm.
fn trial_step(r: f64, y: [f64; 2], k1: [f64; 2], h: f64, dim: &Dimension, opts: &ShootingOptions) -> ([f64; 2], [f64; 2], f64) {
    let mut k = [[0.0; 2]; 7];
    k[0] = k1;
    let mut increment = [0.0; 2];
    for s in 1..7 {
        let mut dy = [0.0; 2];
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                dy[0] += h * a * kj[0];
                dy[1] += h * a * kj[1];
            }
        }
        if s == 6 {
            increment = dy;
        }
        k[s] = rhs(r + C[s] * h, [y[0] + dy[0], y[1] + dy[1]], dim);
    }
    // U is a log-density, so its error is scaled by atol + rtol max(|U|, 1): an
    // absolute error in U is a relative error in e^U. The flux is measured purely
    // relative to |w|; it starts at O(r0^n) and its relative error is what reaches U'.
    let mut err: f64 = 0.0;
    for i in 0..2 {
        let e: f64 = (0..7).map(|s| E[s] * k[s][i]).sum::<f64>() * h;
        let size = y[i].abs().max((y[i] + increment[i]).abs());
        let sc = if i == 0 { opts.atol + opts.rtol * size.max(1.0) } else { opts.rtol * size };
        err = err.max((e / sc).abs());
    }
    // Error per unit step in log r.
    (increment, k[6], err * r / h)
}

/// Compensated accumulation `value += delta`.
#[derive(Debug, Clone, Copy, Default)]
struct Compensated {
    value: f64,
    carry: f64,
}

impl Compensated {
    fn new(value: f64) -> Self {
        Compensated { value, carry: 0.0 }
    }

    fn add(&mut self, delta: f64) {
        let corrected = delta - self.carry;
        let sum = self.value + corrected;
        self.carry = (sum - self.value) - corrected;
        self.value = sum;
    }
}

/// A numerically integrated radial profile with its flux.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSolution {
    dim: Dimension,
    alpha: f64,
    center: Vec<f64>,
    grid: Vec<f64>,
    u_values: Vec<f64>,
    du_values: Vec<f64>,
    flux: Vec<f64>,
    options: ShootingOptions,
}

/// `integrate_radial`: adaptive Dormand–Prince 5(4) with PI step control from
/// `series_start` to `r_max`.
pub fn integrate_radial(alpha: f64, r_max: f64, dim: &Dimension, rtol: f64, atol: f64) -> Result<RadialSolution> {
    RadialSolution::integrate(alpha, r_max, dim, ShootingOptions { rtol, atol, ..Default::default() })
}

impl RadialSolution {
    pub fn integrate(alpha: f64, r_max: f64, dim: &Dimension, opts: ShootingOptions) -> Result<Self> {
        for (name, tol) in [("rtol", opts.rtol), ("atol", opts.atol)] {
            if !(tol > 0.0 && tol < 1e-2) {
                return Err(Error::domain(format!("{name} must lie in (0, 1e-2), got {tol}")));
            }
        }
        if !alpha.is_finite() {
            return Err(Error::domain("center value must be finite"));
        }
        if !(r_max > opts.r0) || !r_max.is_finite() {
            return Err(Error::domain(format!("r_max must exceed the start radius {}, got {r_max}", opts.r0)));
        }
        let (u0, w0) = series_start(alpha, opts.r0, dim)?;
        if !u0.is_finite() || !w0.is_finite() {
            return Err(Error::Integration { last_radius: opts.r0, reason: "non-finite initial state".into() });
        }

        let mut radius = Compensated::new(opts.r0);
        let mut state = [Compensated::new(u0), Compensated::new(w0)];
        let mut r = opts.r0;
        let mut y = [u0, w0];
        let mut grid = vec![r];
        let mut u_values = vec![u0];
        let mut flux = vec![w0];
        let mut k1 = rhs(r, y, dim);

        const SAFETY: f64 = 0.9;
        const BETA: f64 = 0.04;
        const ALPHA: f64 = 0.25 - 0.75 * BETA;
        let mut h = opts.r0;
        let mut err_prev: f64 = 1e-4;
        let mut rejected = false;
        let mut steps = 0usize;

        while r < r_max {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::Integration { last_radius: r, reason: "step budget exhausted".into() });
            }
            // The right-hand side is analytic only within distance r of the
            // singular origin.
            h = h.min(MAX_STEP_FRACTION * r);
            let last = r + h >= r_max;
            let h_try = if last { r_max - r } else { h };
            if h_try <= 1e-14 * r.max(1.0) {
                return Err(Error::Integration { last_radius: r, reason: format!("step size underflow ({h_try:e})") });
            }
            let (dy, k_new, err) = trial_step(r, y, k1, h_try, dim, &opts);
            if !err.is_finite() || !(y[0] + dy[0]).is_finite() || !(y[1] + dy[1]).is_finite() {
                if h_try <= 1e-14 * r.max(1.0) * 1e3 {
                    return Err(Error::Integration { last_radius: r, reason: "non-finite state".into() });
                }
                h = 0.2 * h_try;
                rejected = true;
                continue;
            }
            if err <= 1.0 {
                let mut fac = if err == 0.0 { 10.0 } else { err.powf(-ALPHA) * err_prev.powf(BETA) * SAFETY };
                fac = fac.clamp(0.2, 10.0);
                if rejected {
                    fac = fac.min(1.0);
                }
                err_prev = err.max(1e-4);
                radius.add(h_try);
                r = if last { r_max } else { radius.value };
                state[0].add(dy[0]);
                state[1].add(dy[1]);
                y = [state[0].value, state[1].value];
                k1 = k_new;
                grid.push(r);
                u_values.push(y[0]);
                flux.push(y[1]);
                h = h_try * fac;
                rejected = false;
            } else {
                h = h_try * (SAFETY * err.powf(-ALPHA)).max(0.2);
                rejected = true;
            }
        }

        let du_values = grid.iter().zip(&flux).map(|(&r, &w)| slope_from_flux(w, r, dim)).collect();
        Ok(RadialSolution {
            dim: *dim,
            alpha,
            center: dim.origin(),
            grid,
            u_values,
            du_values,
            flux,
            options: opts,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn u_values(&self) -> &[f64] {
        &self.u_values
    }

    pub fn du_values(&self) -> &[f64] {
        &self.du_values
    }

    pub fn flux(&self) -> &[f64] {
        &self.flux
    }

    pub fn r0(&self) -> f64 {
        self.options.r0
    }

    pub fn r_max(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    pub fn options(&self) -> ShootingOptions {
        self.options
    }

    /// The family member this profile should coincide with, `λ = (e^α/c_n)^{1/n}`.
    pub fn family_match(&self) -> ExactSolution {
        ExactSolution::new(self.dim, self.inferred_lambda(), self.dim.origin())
            .expect("a finite center value gives a positive scale")
    }

    /// Largest deviation from `other` over `[0, r_max]`, sampled at the grid
    /// nodes, the center, and `SUP_SAMPLES - 1` dense-output points inside
    /// every step.
    pub fn sup_distance<P: RadialProfile + ?Sized>(&self, other: &P) -> f64 {
        let mut worst = (self.profile(0.0) - other.profile(0.0)).abs();
        for (i, pair) in self.grid.windows(2).enumerate() {
            worst = worst.max((self.u_values[i] - other.profile(pair[0])).abs());
            let h = pair[1] - pair[0];
            for k in 1..SUP_SAMPLES {
                let r = pair[0] + h * k as f64 / SUP_SAMPLES as f64;
                worst = worst.max((self.interp_u(r) - other.profile(r)).abs());
            }
        }
        let last = self.grid.len() - 1;
        worst.max((self.u_values[last] - other.profile(self.grid[last])).abs())
    }

    fn locate(&self, r: f64) -> usize {
        // Index i with grid[i] <= r < grid[i+1].
        let i = self.grid.partition_point(|&g| g <= r);
        i.saturating_sub(1).min(self.grid.len() - 2)
    }

    /// Quintic Hermite interpolation on `[r0, r1]` from value, first and second
    /// derivative at both ends.
    fn hermite(r: f64, r0: f64, r1: f64, left: [f64; 3], right: [f64; 3]) -> f64 {
        let h = r1 - r0;
        let s = (r - r0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let s4 = s3 * s;
        let s5 = s4 * s;
        let h00 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
        let h01 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
        let h02 = 0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5);
        let h10 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
        let h11 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
        let h12 = 0.5 * (s3 - 2.0 * s4 + s5);
        h00 * left[0] + h * h01 * left[1] + h * h * h02 * left[2] + h10 * right[0] + h * h11 * right[1] + h * h * h12 * right[2]
    }

    /// `(U, U', U'')` at node `i`; `U''` follows from differentiating the flux relation.
    fn u_jet(&self, i: usize) -> [f64; 3] {
        let r = self.grid[i];
        let du = self.du_values[i];
        let k = self.dim.n() as f64 - 1.0;
        let w = self.flux[i];
        let ddu = du / k * (self.flux_slope(i) / w - k / r);
        [self.u_values[i], du, ddu]
    }

    /// `(w, w', w'')` at node `i` with `w' = -r^{n-1} e^U`.
    fn flux_jet(&self, i: usize) -> [f64; 3] {
        let r = self.grid[i];
        let k = self.dim.n() as i32 - 1;
        let e = self.u_values[i].exp();
        let dw = -r.powi(k) * e;
        let ddw = -(k as f64 * r.powi(k - 1) + r.powi(k) * self.du_values[i]) * e;
        [self.flux[i], dw, ddw]
    }

    fn interp_u(&self, r: f64) -> f64 {
        let i = self.locate(r);
        Self::hermite(r, self.grid[i], self.grid[i + 1], self.u_jet(i), self.u_jet(i + 1))
    }

    fn flux_slope(&self, i: usize) -> f64 {
        -self.grid[i].powi(self.dim.n() as i32 - 1) * self.u_values[i].exp()
    }

    /// Asymptotic continuation coefficient `|w(r_max)|^{1/(n-1)}`.
    fn far_slope(&self) -> f64 {
        self.flux.last().unwrap().abs().powf(1.0 / (self.dim.n() as f64 - 1.0))
    }

    /// Flux `w(r)`: series below `r0`, quintic Hermite in between, frozen beyond `r_max`.
    pub fn flux_at(&self, r: f64) -> f64 {
        if r <= self.r0() {
            return series_w(self.alpha, r, &self.dim);
        }
        if r >= self.r_max() {
            return *self.flux.last().unwrap();
        }
        let i = self.locate(r);
        Self::hermite(r, self.grid[i], self.grid[i + 1], self.flux_jet(i), self.flux_jet(i + 1))
    }

    /// `mass_in_ball`: `∫_{B_R} e^U = -σ w(R)`.
    pub fn mass_in_ball(&self, radius: f64) -> Result<f64> {
        if !(radius > 0.0) || radius > self.r_max() {
            return Err(Error::domain(format!(
                "radius {radius} lies outside the integrated range (0, {}]",
                self.r_max()
            )));
        }
        Ok(-self.dim.sigma() * self.flux_at(radius))
    }

    /// `total_mass`: enclosed mass at `r_max` plus the analytic tail of the
    /// log-log fit `U ≈ -β̂ log r + C` over `[r_max/10, r_max]`.
    pub fn total_mass(&self) -> Result<TotalMass> {
        let r_max = self.r_max();
        let window: Vec<(f64, f64)> = self
            .grid
            .iter()
            .zip(&self.u_values)
            .filter(|(&r, _)| r >= 0.1 * r_max)
            .map(|(&r, &u)| (r.ln(), u))
            .collect();
        if window.len() < 3 {
            return Err(Error::domain("too few grid nodes in the last decade for a tail fit"));
        }
        let (slope, intercept) = least_squares(&window);
        let beta = -slope;
        let n = self.dim.n();
        if !(beta > n as f64) {
            return Err(Error::TailDivergence { beta, n });
        }
        let tail = self.dim.sigma() * intercept.exp() * r_max.powf(n as f64 - beta) / (beta - n as f64);
        let inner = self.mass_in_ball(r_max)?;
        Ok(TotalMass { mass: inner + tail, tail_estimate: tail, fitted_beta: beta })
    }
}

/// Result of `total_mass`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TotalMass {
    pub mass: f64,
    pub tail_estimate: f64,
    pub fitted_beta: f64,
}

/// Ordinary least squares `y ≈ slope x + intercept`.
pub(crate) fn least_squares(points: &[(f64, f64)]) -> (f64, f64) {
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// `λ = (e^α/c_n)^{1/n}`.
pub fn lambda_for_alpha(alpha: f64, dim: &Dimension) -> f64 {
    crate::model::lambda_for_peak(dim, alpha)
}

impl SolutionField for RadialSolution {
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
        let s = self.profile_slope(r) / r;
        d.into_iter().map(|c| c * s).collect()
    }

    fn radial_center(&self) -> Option<&[f64]> {
        Some(&self.center)
    }
}

impl RadialProfile for RadialSolution {
    fn center(&self) -> &[f64] {
        &self.center
    }

    /// Beyond `r_max` the profile continues as `U(r_max) - |w(r_max)|^{1/(n-1)} log(r/r_max)`.
    fn profile(&self, r: f64) -> f64 {
        if r <= self.r0() {
            series_u(self.alpha, r, &self.dim)
        } else if r >= self.r_max() {
            self.u_values.last().unwrap() - self.far_slope() * (r / self.r_max()).ln()
        } else {
            self.interp_u(r)
        }
    }

    fn profile_slope(&self, r: f64) -> f64 {
        if r == 0.0 {
            0.0
        } else if r <= self.r0() {
            series_slope(self.alpha, r, &self.dim)
        } else if r >= self.r_max() {
            -self.far_slope() / r
        } else {
            slope_from_flux(self.flux_at(r), r, &self.dim)
        }
    }

    fn peak(&self) -> f64 {
        self.alpha
    }

    fn enclosed_mass(&self, r: f64) -> Result<f64> {
        if r == 0.0 {
            return Ok(0.0);
        }
        self.mass_in_ball(r)
    }

    /// Bisection on the interpolant; the profile is strictly decreasing.
    fn level_radius(&self, t: f64) -> Result<f64> {
        let peak = self.alpha;
        if !(t < peak) {
            return Err(Error::EmptyLevelSet { t, peak });
        }
        let last = *self.u_values.last().unwrap();
        if t <= last {
            return Err(Error::domain(format!(
                "level {t} is not reached inside r_max = {} (U(r_max) = {last})",
                self.r_max()
            )));
        }
        let (mut lo, mut hi) = (0.0, self.r_max());
        while hi - lo > 4.0 * f64::EPSILON * hi {
            let mid = 0.5 * (lo + hi);
            if self.profile(mid) > t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}
