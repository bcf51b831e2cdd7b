//! Heat extension `e^{tΔ} f` and its maximal function over a finite set of times.

use crate::dyadic::{StepFunction, Window};
use crate::error::{domain, Result};
use crate::morrey::{morrey_lorentz_norm, MorreyLorentzParams};

#[derive(Clone, Debug, PartialEq)]
pub struct HeatParams {
    t_grid: Vec<f64>,
    /// evaluation grid is this many levels finer than the function
    quadrature_level: u32,
}

impl HeatParams {
    pub fn new(t_grid: Vec<f64>, quadrature_level: u32) -> Result<Self> {
        if t_grid.is_empty() {
            return Err(domain("heat time grid must be nonempty"));
        }
        if t_grid.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return Err(domain("heat times must be positive and finite"));
        }
        if t_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(domain("heat time grid must be strictly increasing"));
        }
        Ok(Self {
            t_grid,
            quadrature_level,
        })
    }

    /// `t = 4^{-j}` for `j = 12, 11, …, −2`.
    pub fn default_grid() -> Vec<f64> {
        (-2..=12).rev().map(|j| 4f64.powi(-j)).collect()
    }

    pub fn with_default_grid(quadrature_level: u32) -> Self {
        Self::new(Self::default_grid(), quadrature_level).expect("default grid is valid")
    }

    pub fn t_grid(&self) -> &[f64] {
        &self.t_grid
    }

    pub fn quadrature_level(&self) -> u32 {
        self.quadrature_level
    }
}

/// `∫_a^b (4πt)^{-1/2} exp(−(x − y)²/4t) dy`, using `erfc` on one-sided intervals
/// so that Gaussian tails keep their relative precision.
fn axis_weight(a: f64, b: f64, x: f64, t: f64) -> f64 {
    let s = 2.0 * t.sqrt();
    let (ua, ub) = ((a - x) / s, (b - x) / s);
    if ua >= 0.0 {
        0.5 * (libm::erfc(ua) - libm::erfc(ub))
    } else if ub <= 0.0 {
        0.5 * (libm::erfc(-ub) - libm::erfc(-ua))
    } else {
        0.5 * (libm::erf(ub) - libm::erf(ua))
    }
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("heat time must be positive, got {t}")))
    }
}

/// `e^{tΔ} f(x)` at one point.
pub fn heat_at(f: &StepFunction, t: f64, x: &[f64]) -> Result<f64> {
    check_time(t)?;
    let h = f.cell_side();
    Ok(f.iter()
        .map(|(idx, v)| {
            (0..f.dim())
                .map(|axis| {
                    let a = idx[axis] as f64 * h;
                    axis_weight(a, a + h, x[axis], t)
                })
                .product::<f64>()
                * v
        })
        .sum())
}

/// `e^{tΔ} f` at the cell centers of the top window on the `eval_level` grid.
pub fn heat_extension(f: &StepFunction, t: f64, eval_level: i32) -> Result<StepFunction> {
    check_time(t)?;
    if f.is_zero() {
        return Ok(StepFunction::zero(f.dim(), eval_level));
    }
    heat_extension_on(f, t, &f.window(eval_level, 1)?)
}

/// `e^{tΔ} f` at the cell centers of `window`. Each cell integral is exact, a
/// product of per-axis error-function differences.
pub fn heat_extension_on(f: &StepFunction, t: f64, window: &Window) -> Result<StepFunction> {
    check_time(t)?;
    let h = f.cell_side();
    let values: Vec<f64> = if f.dim() == 1 {
        window
            .cells()
            .map(|idx| {
                let x = window.center(&idx)[0];
                f.iter()
                    .map(|(k, v)| {
                        let a = k[0] as f64 * h;
                        v * axis_weight(a, a + h, x, t)
                    })
                    .sum()
            })
            .collect()
    } else {
        // per-axis weights are shared by every cell in a grid row or column
        let axis_table = |axis: usize| -> Vec<Vec<f64>> {
            let lo = f.iter().map(|(k, _)| k[axis]).min().unwrap_or(0);
            let hi = f.iter().map(|(k, _)| k[axis]).max().unwrap_or(-1);
            (0..window.extent(axis))
                .map(|i| {
                    let x = (window.lo[axis] as f64 + i as f64 + 0.5) * window.cell_side();
                    (lo..=hi)
                        .map(|k| axis_weight(k as f64 * h, (k + 1) as f64 * h, x, t))
                        .collect()
                })
                .collect()
        };
        let rows = axis_table(0);
        let cols = axis_table(1);
        let lo0 = f.iter().map(|(k, _)| k[0]).min().unwrap_or(0);
        let lo1 = f.iter().map(|(k, _)| k[1]).min().unwrap_or(0);
        window
            .cells()
            .map(|idx| {
                let (i, j) = ((idx[0] - window.lo[0]) as usize, (idx[1] - window.lo[1]) as usize);
                f.iter()
                    .map(|(k, v)| v * rows[i][(k[0] - lo0) as usize] * cols[j][(k[1] - lo1) as usize])
                    .sum()
            })
            .collect()
    };
    Ok(window.to_step_function(&values))
}

/// Cellwise `max_{t ∈ t_grid} |e^{tΔ} f|` on the top window, `quadrature_level` levels below `f`.
pub fn heat_maximal(f: &StepFunction, hp: &HeatParams) -> Result<StepFunction> {
    let eval_level = f.level() + hp.quadrature_level as i32;
    if f.is_zero() {
        return Ok(StepFunction::zero(f.dim(), eval_level));
    }
    let window = f.window(eval_level, 1)?;
    let mut best = vec![0.0f64; window.len()];
    for &t in &hp.t_grid {
        let u = heat_extension_on(f, t, &window)?;
        for (slot, v) in best.iter_mut().zip(window.sample(&u)) {
            *slot = slot.max(v.abs());
        }
    }
    Ok(window.to_step_function(&best))
}

/// Morrey-Lorentz norm of the finite-grid heat maximal function.
///
/// This is a lower approximation of the Hardy-Morrey-Lorentz quasi-norm: the
/// supremum over `t > 0` is replaced by a maximum over `t_grid` and the
/// evaluation is truncated to the top window.
pub fn heat_maximal_norm(f: &StepFunction, hp: &HeatParams, mp: MorreyLorentzParams) -> Result<f64> {
    Ok(morrey_lorentz_norm(&heat_maximal(f, hp)?, mp))
}
