//! Calderón-Zygmund decomposition of a step function into atoms with
//! vanishing moments, driven by the level sets of the dyadic maximal function.
//!
//! For thresholds `2^k`, `Ω_k = {M_d f > 2^k}` is a disjoint union of maximal
//! dyadic cubes `Q_{k,i}`. The good part `g_k` equals `f` off `Ω_k` and, on each
//! `Q_{k,i}`, the projection of `f` onto cell averages of polynomials of degree
//! at most `K`. Since `Ω_{k+1} ⊂ Ω_k`, every `A_{k,i} = (g_{k+1} − g_k) χ_{Q_{k,i}}`
//! has the same moments on both sides and so cancels against polynomials of
//! degree `K`. Telescoping from `g_{k_max} = f` gives
//! `f = Σ_{k,i} A_{k,i} + g_{k_min}`, and `g_{k_min}` is what the finite grid
//! cannot remove: a polynomial on each top cube.

use std::collections::HashMap;

use super::moments::{max_moment_residual, project, projection_basis, MAX_DEGREE};
use super::{aggregate_function, synthesize, Atom, AtomFamily};
use crate::dyadic::{pow2, DyadicCube, StepFunction, Window};
use crate::error::{domain, Error, Result};
use crate::morrey::{morrey_lorentz_norm, MorreyLorentzParams};
use crate::operators::{dyadic_maximal, Pyramid};
use crate::RatioReport;

/// Atoms, coefficients and residual of a decomposition, with the threshold
/// exponent `k` each atom was produced at.
#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionResult {
    pub family: AtomFamily,
    pub residual: StepFunction,
    pub level_range: (i32, i32),
    pub atom_levels: Vec<i32>,
}

/// Pieces no larger than this fraction of `‖f‖_∞` are rounding residue.
const NOISE_FLOOR: f64 = 1e-13;

/// Maximal dyadic cubes of `{M_d f > threshold}` inside one pyramid, as `(depth, position)`.
fn maximal_cubes(pyramid: &Pyramid, threshold: f64) -> Vec<(u32, usize)> {
    let mut out = Vec::new();
    let mut stack = vec![(0u32, 0usize)];
    while let Some((j, o)) = stack.pop() {
        if pyramid.average(j, o) > threshold {
            out.push((j, o));
        } else if j < pyramid.depth() {
            stack.extend(pyramid.children_positions(j, o).into_iter().rev().map(|c| (j + 1, c)));
        }
    }
    out
}

pub fn decompose(f: &StepFunction, degree: i32, v: f64) -> Result<DecompositionResult> {
    if f.is_zero() {
        return Err(Error::ZeroFunction);
    }
    if !(0..=MAX_DEGREE).contains(&degree) {
        return Err(domain(format!(
            "decomposition degree must lie in 0..={MAX_DEGREE}, got {degree}"
        )));
    }
    if !(v > 0.0 && v <= 1.0) {
        return Err(domain(format!("aggregation exponent must lie in (0, 1], got {v}")));
    }
    let level = f.level();
    let dim = f.dim();
    let sup = f.sup_norm();
    let pyramids: Vec<Pyramid> = f.tops().into_iter().map(|top| Pyramid::new(f, top)).collect();
    let peak = pyramids
        .iter()
        .flat_map(|p| p.maximal())
        .fold(0.0f64, f64::max);
    let floor = pyramids.iter().map(|p| p.average(0, 0)).fold(f64::INFINITY, f64::min);
    let k_max = peak.log2().ceil() as i32;
    let k_min = floor.log2().floor() as i32 - 1;

    let mut bases: HashMap<u32, Vec<Vec<f64>>> = HashMap::new();
    let mut lambdas = Vec::new();
    let mut atoms = Vec::new();
    let mut atom_levels = Vec::new();
    let mut residual_cells = Vec::new();

    for pyramid in &pyramids {
        let leaf: Window = pyramid.top().cell_range(level);
        let values = leaf.sample(f);
        let mut finer = values.clone();
        for k in (k_min..k_max).rev() {
            let mut coarser = values.clone();
            let cubes = maximal_cubes(pyramid, pow2(k));
            let mut pieces = Vec::with_capacity(cubes.len());
            for (j, o) in cubes {
                let cube: DyadicCube = pyramid.cube(j, o);
                let depth = pyramid.depth() - j;
                let basis = bases
                    .entry(depth)
                    .or_insert_with(|| projection_basis(&cube, level, degree));
                let offsets: Vec<usize> = cube.cell_range(level).cells().map(|idx| leaf.offset(&idx)).collect();
                let local: Vec<f64> = offsets.iter().map(|&i| values[i]).collect();
                let good = project(basis, &local);
                let mut piece: Vec<f64> = offsets.iter().zip(&good).map(|(&i, g)| finer[i] - g).collect();
                // strip the rounding left in the moments so the atom cancels to full relative precision
                let drift = project(basis, &piece);
                piece.iter_mut().zip(&drift).for_each(|(a, d)| *a -= d);
                for (&i, g) in offsets.iter().zip(good) {
                    coarser[i] = g;
                }
                pieces.push((cube, offsets, piece));
            }
            for (cube, offsets, piece) in pieces {
                let lambda = piece.iter().fold(0.0f64, |m, a| m.max(a.abs()));
                if lambda <= NOISE_FLOOR * sup {
                    // pure rounding: keep it in the coarser function instead of normalizing noise into an atom
                    for (&i, a) in offsets.iter().zip(&piece) {
                        coarser[i] += a;
                    }
                    continue;
                }
                let cells = offsets.iter().zip(&piece).map(|(&i, a)| (leaf.index_at(i), a / lambda));
                let data = StepFunction::accumulate(dim, level, cells);
                atoms.push(Atom::new(cube, data, degree)?);
                lambdas.push(lambda);
                atom_levels.push(k);
            }
            finer = coarser;
        }
        residual_cells.extend(finer.into_iter().enumerate().map(|(i, g)| (leaf.index_at(i), g)));
    }

    Ok(DecompositionResult {
        family: AtomFamily::new(v, lambdas, atoms)?,
        residual: StepFunction::accumulate(dim, level, residual_cells),
        level_range: (k_min, k_max),
        atom_levels,
    })
}

/// Measured guarantees of a decomposition of `f`.
#[derive(Clone, Debug, PartialEq)]
pub struct Guarantees {
    /// `max |f − Σ λ a − residual| / ‖f‖_∞`
    pub reconstruction_error: f64,
    /// `max_j ‖a_j‖_∞ − 1`
    pub max_atom_excess: f64,
    /// largest relative moment residual over all atoms
    pub max_moment_residual: f64,
    /// `max_j λ_j / 2^{k_j}`
    pub lambda_constant: f64,
    /// `max (Σ (λ_j χ_{Q_j})^v)^{1/v} / M_d f` over the cells of the top cubes
    pub pointwise_bound_constant: f64,
}

pub const RECONSTRUCTION_TOL: f64 = 1e-10;
pub const ATOM_EXCESS_TOL: f64 = 1e-12;
pub const MOMENT_TOL: f64 = 1e-10;

impl Guarantees {
    /// Names of the violated guarantees among reconstruction, atom size and moments.
    pub fn violations(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !(self.reconstruction_error <= RECONSTRUCTION_TOL) {
            out.push("reconstruction");
        }
        if !(self.max_atom_excess <= ATOM_EXCESS_TOL) {
            out.push("atom size");
        }
        if !(self.max_moment_residual <= MOMENT_TOL) {
            out.push("moment cancellation");
        }
        out
    }

    pub fn hold(&self) -> bool {
        self.violations().is_empty()
    }
}

pub fn guarantees(f: &StepFunction, result: &DecompositionResult) -> Result<Guarantees> {
    let sup = f.sup_norm();
    let rebuilt = synthesize(&result.family);
    let rebuilt = if result.family.is_empty() {
        StepFunction::zero(f.dim(), f.level())
    } else {
        rebuilt.refine(f.level())?
    };
    let diff = f.sub(&rebuilt)?.sub(&result.residual)?;
    let reconstruction_error = if sup == 0.0 { 0.0 } else { diff.sup_norm() / sup };

    let mut max_atom_excess = f64::NEG_INFINITY;
    let mut max_moment = 0.0f64;
    let mut lambda_constant = 0.0f64;
    for ((lambda, atom), k) in result.family.iter().zip(&result.atom_levels) {
        max_atom_excess = max_atom_excess.max(atom.data().sup_norm() - 1.0);
        max_moment = max_moment.max(max_moment_residual(atom.data(), atom.cube(), atom.degree())?);
        lambda_constant = lambda_constant.max(lambda / pow2(*k));
    }
    if result.family.is_empty() {
        max_atom_excess = 0.0;
    }

    let md = dyadic_maximal(f);
    let aggregate = aggregate_function(&result.family);
    let aggregate = if result.family.is_empty() {
        StepFunction::zero(f.dim(), f.level())
    } else {
        aggregate.refine(f.level())?
    };
    let mut pointwise = 0.0f64;
    for (idx, a) in aggregate.iter() {
        let m = md.value(idx);
        if m > 0.0 {
            pointwise = pointwise.max(a / m);
        } else {
            pointwise = f64::INFINITY;
        }
    }

    Ok(Guarantees {
        reconstruction_error,
        max_atom_excess,
        max_moment_residual: max_moment,
        lambda_constant,
        pointwise_bound_constant: pointwise,
    })
}

/// `‖(Σ (λ_j χ_{Q_j})^v)^{1/v}‖_{M^p_{q,r}} / ‖f‖_{M^p_{q,r}}`.
pub fn check_decomposition_norm(
    f: &StepFunction,
    result: &DecompositionResult,
    mp: MorreyLorentzParams,
    v: f64,
) -> Result<RatioReport> {
    let family = result.family.with_v(v)?;
    let lhs = morrey_lorentz_norm(&aggregate_function(&family), mp);
    Ok(RatioReport::new(lhs, morrey_lorentz_norm(f, mp)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn haar() -> StepFunction {
        StepFunction::new(1, 1, [([0], 1.0), ([1], -1.0)]).unwrap()
    }

    #[test]
    fn haar_decomposes_into_itself() {
        let f = haar();
        let result = decompose(&f, 0, 1.0).unwrap();
        let g = guarantees(&f, &result).unwrap();
        assert!(g.hold(), "{g:?}");
        assert!(g.reconstruction_error <= 1e-15);
        // top is [0, 2) with average 1/2; M_d f = 1 on the support
        assert_eq!(result.level_range, (-2, 0));
        let levels: std::collections::BTreeSet<_> = result.atom_levels.iter().collect();
        assert_eq!(levels.len(), 1);
        assert!(result.residual.sup_norm() <= pow2(result.level_range.0 + 1));
    }

    #[test]
    fn indicator_leaves_its_mean_in_the_residual() {
        let q = DyadicCube::new(1, 0, &[0]).unwrap();
        let f = StepFunction::indicator(&q).refine(3).unwrap();
        let result = decompose(&f, 0, 1.0).unwrap();
        let g = guarantees(&f, &result).unwrap();
        assert!(g.hold(), "{g:?}");
        for a in result.family.atoms() {
            assert!(a.data().integral().abs() < 1e-15);
        }
        assert!((result.residual.integral() - 1.0).abs() < 1e-14);
        // the residual is the mean over the top [0, 2)
        assert!((result.residual.sup_norm() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn higher_degree_and_two_dimensions() {
        let cells: Vec<([i64; 2], f64)> = (0..16)
            .map(|i| ([i as i64 - 5, (i * 3 % 7) as i64 - 2], ((i * 37 % 11) as f64 - 5.0) / 3.0))
            .filter(|(_, v)| *v != 0.0)
            .collect();
        let f = StepFunction::new(2, 2, cells).unwrap();
        for degree in 0..=2 {
            let result = decompose(&f, degree, 0.5).unwrap();
            let g = guarantees(&f, &result).unwrap();
            assert!(g.hold(), "K={degree}: {g:?}");
            assert!(g.pointwise_bound_constant.is_finite());
        }
    }

    #[test]
    fn doubling_shifts_the_thresholds() {
        let f = StepFunction::new(1, 3, [([0], 1.0), ([1], -0.3), ([5], 0.7), ([6], -1.4)]).unwrap();
        let mp = MorreyLorentzParams::new(2.0, 1.5, 1.0).unwrap();
        let one = decompose(&f, 0, 1.0).unwrap();
        let two = decompose(&f.scale(2.0), 0, 1.0).unwrap();
        assert_eq!(two.level_range, (one.level_range.0 + 1, one.level_range.1 + 1));
        let r1 = check_decomposition_norm(&f, &one, mp, 1.0).unwrap().ratio;
        let r2 = check_decomposition_norm(&f.scale(2.0), &two, mp, 1.0).unwrap().ratio;
        assert!((r1 - r2).abs() <= 1e-12 * r1);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(decompose(&StepFunction::zero(1, 0), 0, 1.0), Err(Error::ZeroFunction)));
        assert!(decompose(&haar(), 4, 1.0).is_err());
        assert!(decompose(&haar(), -1, 1.0).is_err());
        assert!(decompose(&haar(), 0, 0.0).is_err());
    }
}
