//! The fractional integral `I_α f(x) = ∫ f(y) |x − y|^{α − n} dy` on step functions.
//!
//! In one dimension every cell integral has a closed-form antiderivative. In
//! two dimensions the integral of the kernel over a rectangle with one corner
//! at the singularity reduces to a smooth one-dimensional integral; any cell
//! integral is a signed sum of four such corner integrals. Far cells use a
//! tensor Gauss-Legendre rule instead, which avoids the cancellation of the
//! four-corner sum.

use std::collections::HashMap;

use crate::atoms::moments::max_moment_residual;
use crate::dyadic::{DyadicCube, StepFunction, Window};
use crate::error::{domain, Error, Result};
use crate::lorentz::pow_increment;
use crate::quad::{gauss_legendre, integrate};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FracIntegralParams {
    alpha: f64,
}

impl FracIntegralParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(domain(format!("fractional order must be positive, got {alpha}")));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if self.alpha < dim as f64 {
            Ok(())
        } else {
            Err(domain(format!(
                "fractional order must satisfy 0 < α < n = {dim}, got {}",
                self.alpha
            )))
        }
    }
}

/// `∫_a^b |x − y|^{α−1} dy`.
fn cell_integral_1d(a: f64, b: f64, x: f64, alpha: f64) -> f64 {
    if x <= a {
        pow_increment(a - x, b - x, alpha) / alpha
    } else if x >= b {
        pow_increment(x - b, x - a, alpha) / alpha
    } else {
        ((x - a).powf(alpha) + (b - x).powf(alpha)) / alpha
    }
}

/// `∫_0^c (1 + s²)^{α/2 − 1} ds`.
fn secant_integral(c: f64, alpha: f64) -> f64 {
    let e = 0.5 * alpha - 1.0;
    let tol = 1e-15;
    let near = |hi: f64| integrate(|s| (1.0 + s * s).powf(e), 0.0, hi, tol, tol);
    if c <= 1.0 {
        near(c)
    } else {
        // s = 1/w on [1, c]
        near(1.0) + integrate(|w| (1.0 + w * w).powf(e) * w.powf(-alpha), 1.0 / c, 1.0, tol, tol)
    }
}

/// `∫_0^a ∫_0^b (u² + v²)^{(α−2)/2} du dv` for `a, b ≥ 0`, split along the diagonal into
/// two triangles integrated in polar coordinates.
fn corner_integral(a: f64, b: f64, alpha: f64) -> f64 {
    if a <= 0.0 || b <= 0.0 {
        return 0.0;
    }
    (a.powf(alpha) * secant_integral(b / a, alpha) + b.powf(alpha) * secant_integral(a / b, alpha)) / alpha
}

/// Kernel integrals in two dimensions, with corner integrals cached on an integer lattice.
struct Kernel2d {
    alpha: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// lattice step for cached corner integrals, when evaluating on a grid
    step: Option<f64>,
    cache: HashMap<(u64, u64), f64>,
}

const FAR_CELLS: f64 = 4.0;

impl Kernel2d {
    fn new(alpha: f64, step: Option<f64>) -> Self {
        let (nodes, weights) = gauss_legendre(8);
        Self {
            alpha,
            nodes,
            weights,
            step,
            cache: HashMap::new(),
        }
    }

    fn corner(&mut self, a: f64, b: f64) -> f64 {
        let sign = a.signum() * b.signum();
        let (a, b) = (a.abs(), b.abs());
        if a == 0.0 || b == 0.0 {
            return 0.0;
        }
        let value = match self.step {
            Some(step) => {
                let (i, j) = ((a / step).round() as u64, (b / step).round() as u64);
                let key = (i.min(j), i.max(j));
                let alpha = self.alpha;
                let unit = *self
                    .cache
                    .entry(key)
                    .or_insert_with(|| corner_integral(key.0 as f64, key.1 as f64, alpha));
                unit * step.powf(alpha)
            }
            None => corner_integral(a, b, self.alpha),
        };
        sign * value
    }

    /// `∫_cell |x − y|^{α−2} dy` for the square cell with lower corner `lo` and side `h`.
    fn cell(&mut self, lo: [f64; 2], h: f64, x: [f64; 2]) -> f64 {
        let gap = |axis: usize| (lo[axis] - x[axis]).max(x[axis] - lo[axis] - h).max(0.0);
        if gap(0).max(gap(1)) >= FAR_CELLS * h {
            let e = 0.5 * self.alpha - 1.0;
            let mut sum = 0.0;
            for (u, wu) in self.nodes.iter().zip(&self.weights) {
                let du = lo[0] + 0.5 * h * (1.0 + u) - x[0];
                for (v, wv) in self.nodes.iter().zip(&self.weights) {
                    let dv = lo[1] + 0.5 * h * (1.0 + v) - x[1];
                    sum += wu * wv * (du * du + dv * dv).powf(e);
                }
            }
            return sum * 0.25 * h * h;
        }
        let (x0, x1) = (lo[0] - x[0], lo[0] + h - x[0]);
        let (y0, y1) = (lo[1] - x[1], lo[1] + h - x[1]);
        self.corner(x1, y1) - self.corner(x0, y1) - self.corner(x1, y0) + self.corner(x0, y0)
    }
}

fn eval_points(f: &StepFunction, alpha: f64, points: &[[f64; 2]], step: Option<f64>) -> Vec<f64> {
    let h = f.cell_side();
    match f.dim() {
        1 => points
            .iter()
            .map(|x| {
                f.iter()
                    .map(|(idx, v)| {
                        let a = idx[0] as f64 * h;
                        v * cell_integral_1d(a, a + h, x[0], alpha)
                    })
                    .sum()
            })
            .collect(),
        _ => {
            let mut kernel = Kernel2d::new(alpha, step);
            points
                .iter()
                .map(|x| {
                    f.iter()
                        .map(|(idx, v)| {
                            let lo = [idx[0] as f64 * h, idx[1] as f64 * h];
                            v * kernel.cell(lo, h, *x)
                        })
                        .sum()
                })
                .collect()
        }
    }
}

/// `I_α f(x)` at one point.
pub fn frac_integral_at(f: &StepFunction, params: FracIntegralParams, x: &[f64]) -> Result<f64> {
    params.check_dim(f.dim())?;
    let mut point = [0.0; 2];
    point[..f.dim()].copy_from_slice(&x[..f.dim()]);
    Ok(eval_points(f, params.alpha, &[point], None)[0])
}

/// `I_α f` at the cell centers of the top window on the `eval_level` grid.
pub fn frac_integral(f: &StepFunction, params: FracIntegralParams, eval_level: i32) -> Result<StepFunction> {
    if f.is_zero() {
        params.check_dim(f.dim())?;
        return Ok(StepFunction::zero(f.dim(), eval_level));
    }
    frac_integral_on(f, params, &f.window(eval_level, 1)?)
}

/// `I_α f` at the cell centers of `window`.
pub fn frac_integral_on(f: &StepFunction, params: FracIntegralParams, window: &Window) -> Result<StepFunction> {
    params.check_dim(f.dim())?;
    if window.level() < f.level() {
        return Err(Error::Coarsening {
            level: f.level(),
            target: window.level(),
        });
    }
    let points: Vec<[f64; 2]> = window.cells().map(|idx| window.center(&idx)).collect();
    // cell corners and evaluation centers differ by multiples of half an evaluation cell
    let step = 0.5 * window.cell_side();
    let values = eval_points(f, params.alpha, &points, Some(step));
    Ok(window.to_step_function(&values))
}

/// Minimum of `I_α χ_Q / ℓ(Q)^α` over a vertex grid of the closed cube, and where it occurs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LowerBoundReport {
    pub min_ratio: f64,
    pub argmin: [f64; 2],
}

const LOWER_BOUND_GRID: usize = 16;

pub fn check_frac_lower_bound(cube: &DyadicCube, params: FracIntegralParams) -> Result<LowerBoundReport> {
    params.check_dim(cube.dim())?;
    let chi = StepFunction::indicator(cube);
    let side = cube.side();
    let corner = cube.lower_corner();
    let n = LOWER_BOUND_GRID;
    let mut points = Vec::new();
    for i in 0..=n {
        let x = corner[0] + side * i as f64 / n as f64;
        if cube.dim() == 1 {
            points.push([x, 0.0]);
        } else {
            for j in 0..=n {
                points.push([x, corner[1] + side * j as f64 / n as f64]);
            }
        }
    }
    let values = eval_points(&chi, params.alpha, &points, Some(side / n as f64));
    let scale = side.powf(params.alpha);
    let (pos, min) = values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if *v < acc.1 { (i, *v) } else { acc });
    Ok(LowerBoundReport {
        min_ratio: min / scale,
        argmin: points[pos],
    })
}

/// Shells `2^k Q \ 2^{k−1} Q` are sampled on this many points per axis of `2^k Q`.
fn shell_resolution(dim: usize) -> usize {
    if dim == 1 {
        64
    } else {
        24
    }
}

/// `max_{x ∈ 2^k Q \ 2^{k−1} Q} |I_α A(x)| / (‖A‖_∞ ℓ(Q)^α 2^{−k(n+K+1−α)})` for `k = 1..=k_max`.
///
/// `A` must be supported in `Q`, bounded by one, and have vanishing moments up to degree `K`.
pub fn check_atom_decay(
    a: &StepFunction,
    cube: &DyadicCube,
    degree: i32,
    params: FracIntegralParams,
    k_max: u32,
) -> Result<Vec<f64>> {
    params.check_dim(a.dim())?;
    if a.is_zero() {
        return Ok(vec![0.0; k_max as usize]);
    }
    let sup = a.sup_norm();
    if sup > 1.0 + 1e-12 {
        return Err(Error::Moments(format!("‖A‖_∞ = {sup} exceeds 1")));
    }
    if a.iter().any(|(idx, _)| !cube.contains_cell(a.level(), idx)) {
        return Err(Error::Moments("A is not supported in Q".into()));
    }
    if degree >= 0 {
        let residual = max_moment_residual(a, cube, degree)?;
        if residual > 1e-10 {
            return Err(Error::Moments(format!(
                "moments up to degree {degree} do not vanish (relative residual {residual:e})"
            )));
        }
    }
    let dim = a.dim();
    let side = cube.side();
    let center = cube.center();
    let scale = sup * side.powf(params.alpha);
    let n = shell_resolution(dim);
    let decay = dim as f64 + (degree.max(-1) + 1) as f64 - params.alpha;
    let mut profile = Vec::with_capacity(k_max as usize);
    for k in 1..=k_max {
        let outer = side * 2f64.powi(k as i32);
        let inner_half = 0.25 * outer;
        let coord = |i: usize, axis: usize| center[axis] - 0.5 * outer + (i as f64 + 0.5) * outer / n as f64;
        let mut points = Vec::new();
        for i in 0..n {
            if dim == 1 {
                let x = coord(i, 0);
                if (x - center[0]).abs() >= inner_half {
                    points.push([x, 0.0]);
                }
            } else {
                for j in 0..n {
                    let (x, y) = (coord(i, 0), coord(j, 1));
                    if (x - center[0]).abs().max((y - center[1]).abs()) >= inner_half {
                        points.push([x, y]);
                    }
                }
            }
        }
        let values = eval_points(a, params.alpha, &points, None);
        let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        profile.push(peak / (scale * 2f64.powf(-(k as f64) * decay)));
    }
    Ok(profile)
}
