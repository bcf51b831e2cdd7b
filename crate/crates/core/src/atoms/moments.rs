//! Cell moments against monomials centered at a cube and scaled by its side,
//! and the orthogonal projection of a step function onto their span.

use crate::dyadic::{DyadicCube, Index, StepFunction, Window};
use crate::error::{domain, Result};

/// Largest supported cancellation degree.
pub const MAX_DEGREE: i32 = 3;

/// Multi-indices `β` with `|β| ≤ degree`, graded by total degree.
pub fn multi_indices(dim: usize, degree: i32) -> Vec<[u32; 2]> {
    let mut out = Vec::new();
    for total in 0..=degree.max(-1) {
        let total = total as u32;
        if dim == 1 {
            out.push([total, 0]);
        } else {
            for i in (0..=total).rev() {
                out.push([i, total - i]);
            }
        }
    }
    out
}

/// `∫_a^b u^k dx` with `u = (x − c)/ℓ`.
fn axis_moment(a: f64, b: f64, c: f64, side: f64, k: u32) -> f64 {
    let (ua, ub) = ((a - c) / side, (b - c) / side);
    let e = k as i32 + 1;
    side * (ub.powi(e) - ua.powi(e)) / e as f64
}

/// `∫_cell ((x − c_Q)/ℓ(Q))^β dx` for the level-`level` cell `idx`.
pub(crate) fn cell_moment(cube: &DyadicCube, level: i32, idx: &Index, beta: [u32; 2]) -> f64 {
    let h = crate::dyadic::pow2(-level);
    let center = cube.center();
    (0..cube.dim())
        .map(|axis| {
            let a = idx[axis] as f64 * h;
            axis_moment(a, a + h, center[axis], cube.side(), beta[axis])
        })
        .product()
}

fn check_degree(degree: i32) -> Result<()> {
    if (-1..=MAX_DEGREE).contains(&degree) {
        Ok(())
    } else {
        Err(domain(format!(
            "cancellation degree must lie in -1..={MAX_DEGREE}, got {degree}"
        )))
    }
}

/// `max_{|β| ≤ K} |∫ a ((x − c_Q)/ℓ(Q))^β dx| / (‖a‖_∞ |Q|)`; zero for `K = −1` or `a = 0`.
///
/// On `Q` the scaled monomials are bounded by one, so this is the relative
/// size of each moment against the largest value it could take.
pub fn max_moment_residual(a: &StepFunction, cube: &DyadicCube, degree: i32) -> Result<f64> {
    check_degree(degree)?;
    if a.dim() != cube.dim() {
        return Err(domain("atom and cube dimensions differ"));
    }
    let sup = a.sup_norm();
    if sup == 0.0 || degree < 0 {
        return Ok(0.0);
    }
    let scale = sup * cube.volume();
    Ok(multi_indices(a.dim(), degree)
        .into_iter()
        .map(|beta| {
            let m: f64 = a.iter().map(|(idx, v)| v * cell_moment(cube, a.level(), idx, beta)).sum();
            m.abs() / scale
        })
        .fold(0.0, f64::max))
}

/// Orthonormal basis, under the plain cell inner product, of the span of the
/// cell averages of the scaled monomials of degree at most `degree` over the
/// cells of `cube` at `level`, in the window's row-major order.
///
/// The averages are orthogonalised by modified Gram-Schmidt applied twice;
/// vectors whose norm collapses below `1e-12` of the original are dependent on
/// earlier ones and are dropped. Cubes made of few cells therefore get a
/// smaller basis, but the projection still matches every moment exactly.
pub(crate) fn projection_basis(cube: &DyadicCube, level: i32, degree: i32) -> Vec<Vec<f64>> {
    let window = cube.cell_range(level);
    let h = crate::dyadic::pow2(-level * cube.dim() as i32);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for beta in multi_indices(cube.dim(), degree) {
        let mut v: Vec<f64> = window.cells().map(|idx| cell_moment(cube, level, &idx, beta) / h).collect();
        let original = norm(&v);
        if original == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in &basis {
                let d = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= d * y);
            }
        }
        let n = norm(&v);
        if n > 1e-12 * original {
            v.iter_mut().for_each(|x| *x /= n);
            basis.push(v);
        }
    }
    basis
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Orthogonal projection of `values` (row-major over a window) onto `basis`.
pub(crate) fn project(basis: &[Vec<f64>], values: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    for q in basis {
        let d = dot(q, values);
        out.iter_mut().zip(q).for_each(|(o, y)| *o += d * y);
    }
    out
}

/// The step function on the cells of `cube` whose moments up to `degree` agree
/// with those of `f` and whose values are a polynomial's cell averages.
pub fn polynomial_projection(f: &StepFunction, cube: &DyadicCube, degree: i32) -> Result<StepFunction> {
    check_degree(degree)?;
    let level = f.level();
    if cube.level() > level {
        return Err(domain("cube is finer than the function's grid"));
    }
    let window: Window = cube.cell_range(level);
    let values = window.sample(f);
    let basis = projection_basis(cube, level, degree);
    Ok(window.to_step_function(&project(&basis, &values)))
}
