use std::collections::VecDeque;

use crate::dyadic::{pow2, DyadicCube, Index, StepFunction, Window};
use crate::error::{domain, Error, Result};
use crate::lorentz::{indicator_factor, LorentzParams, RearrangementProfile};

/// `(η, θ)` for the Lorentz-average maximal operator `M^{(η,θ)}`.
/// `(1, 1)` is the Hardy-Littlewood operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaximalParams {
    eta: f64,
    theta: f64,
}

impl MaximalParams {
    pub fn new(eta: f64, theta: f64) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() || !(theta > 0.0) {
            return Err(domain(format!(
                "maximal operator needs 0 < η < ∞ and 0 < θ ≤ ∞, got ({eta}, {theta})"
            )));
        }
        Ok(Self { eta, theta })
    }

    pub fn hardy_littlewood() -> Self {
        Self { eta: 1.0, theta: 1.0 }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// `out[i] = max(input[i .. i + width])`.
fn sliding_max(input: &[f64], width: usize) -> Vec<f64> {
    let n = input.len() + 1 - width;
    let mut out = Vec::with_capacity(n);
    let mut deque: VecDeque<usize> = VecDeque::new();
    for (i, &v) in input.iter().enumerate() {
        while deque.back().is_some_and(|&j| input[j] <= v) {
            deque.pop_back();
        }
        deque.push_back(i);
        if deque[0] + width <= i {
            deque.pop_front();
        }
        if i + 1 >= width {
            out.push(input[deque[0]]);
        }
    }
    out
}

/// `M^{(η,θ)} f` at the cell centers of `f`'s top window on the `eval_level` grid.
///
/// The supremum runs over cubes whose corners lie on the evaluation grid and
/// whose side is a multiple of the grid step, up to four times the side of
/// the domain box. This family is finite and the value is a lower
/// approximation of the supremum over all cubes, exact up to one grid step.
pub fn maximal(f: &StepFunction, params: MaximalParams, eval_level: i32) -> Result<StepFunction> {
    if eval_level < f.level() {
        return Err(Error::Coarsening {
            level: f.level(),
            target: eval_level,
        });
    }
    if f.is_zero() {
        return Ok(StepFunction::zero(f.dim(), eval_level));
    }
    maximal_on(f, params, &f.window(eval_level, 1)?)
}

/// As [`maximal`], on an explicit window; candidate sides go up to twice the window extent.
pub fn maximal_on(f: &StepFunction, params: MaximalParams, window: &Window) -> Result<StepFunction> {
    if window.level() < f.level() {
        return Err(Error::Coarsening {
            level: f.level(),
            target: window.level(),
        });
    }
    let values = window.sample(f);
    let max_side = 2 * (0..window.dim()).map(|a| window.extent(a)).max().unwrap_or(0);
    // with θ = η the Lorentz average is a power mean, computable from prefix sums
    let power_mean = params.eta == params.theta;
    let out = match window.dim() {
        1 => maximal_1d(&values, window.extent(0), max_side, params, window.cell_side(), power_mean),
        _ => maximal_2d(
            &values,
            [window.extent(0), window.extent(1)],
            max_side,
            params,
            window.cell_side() * window.cell_side(),
            power_mean,
        ),
    };
    Ok(window.to_step_function(&out))
}

/// Multiset of the nonzero `|f|` values inside a sliding cube, kept as counts
/// per distinct value so each Lorentz average costs one pass over the distinct values.
struct LevelCounts {
    /// Distinct nonzero absolute values in decreasing order.
    levels: Vec<f64>,
    /// `rank[i]` indexes `levels` for cell `i`, or is `usize::MAX` on zero cells.
    rank: Vec<usize>,
    counts: Vec<usize>,
    total: usize,
    /// Average of the current multiset, valid until the next change.
    cached: Option<f64>,
}

impl LevelCounts {
    fn new(values: &[f64]) -> Self {
        let mut levels: Vec<f64> = values.iter().map(|v| v.abs()).filter(|v| *v > 0.0).collect();
        levels.sort_unstable_by(|a, b| b.total_cmp(a));
        levels.dedup();
        let rank = values
            .iter()
            .map(|v| {
                let v = v.abs();
                if v > 0.0 {
                    levels.partition_point(|&l| l > v)
                } else {
                    usize::MAX
                }
            })
            .collect();
        let counts = vec![0; levels.len()];
        Self {
            levels,
            rank,
            counts,
            total: 0,
            cached: None,
        }
    }

    fn clear(&mut self) {
        self.counts.iter_mut().for_each(|c| *c = 0);
        self.total = 0;
        self.cached = None;
    }

    fn add(&mut self, cell: usize) {
        let r = self.rank[cell];
        if r != usize::MAX {
            self.counts[r] += 1;
            self.total += 1;
            self.cached = None;
        }
    }

    fn remove(&mut self, cell: usize) {
        let r = self.rank[cell];
        if r != usize::MAX {
            self.counts[r] -= 1;
            self.total -= 1;
            self.cached = None;
        }
    }

    /// `‖f χ_Q‖_{L^{η,θ}} / ‖χ_Q‖_{L^{η,θ}}` for a cube of `cells` grid cells;
    /// `cells` must stay fixed between calls without an intervening `clear`.
    fn average(&mut self, cells: usize, cell_measure: f64, params: MaximalParams) -> f64 {
        if let Some(v) = self.cached {
            return v;
        }
        let v = if self.total == 0 {
            0.0
        } else {
            let lp = LorentzParams::new(params.eta, params.theta).expect("validated");
            let levels = self.levels.iter().copied().zip(self.counts.iter().copied());
            let num = RearrangementProfile::from_counts(levels, cell_measure).norm(lp);
            let den = indicator_factor(params.eta, params.theta) * (cells as f64 * cell_measure).powf(1.0 / params.eta);
            num / den
        };
        self.cached = Some(v);
        v
    }
}

fn maximal_1d(
    values: &[f64],
    n: usize,
    max_side: usize,
    params: MaximalParams,
    h: f64,
    power_mean: bool,
) -> Vec<f64> {
    let mut out: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        let v = values[i].abs();
        prefix[i + 1] = prefix[i] + if power_mean { v.powf(params.eta) } else { v };
    }
    let mut counts = LevelCounts::new(values);
    for s in 2..=max_side {
        // cube [a, a + s) for a in [1 - s, n - 1], stored at a + s - 1
        let mut cube_values = vec![0.0; n + s - 1];
        counts.clear();
        let (mut lo, mut hi) = (0usize, 0usize);
        for (j, slot) in cube_values.iter_mut().enumerate() {
            let a = j as i64 - (s as i64 - 1);
            let next_lo = a.max(0) as usize;
            let next_hi = ((a + s as i64).min(n as i64)) as usize;
            if power_mean {
                let sum = prefix[next_hi] - prefix[next_lo];
                *slot = (sum.max(0.0) / s as f64).powf(1.0 / params.eta);
                continue;
            }
            while hi < next_hi {
                counts.add(hi);
                hi += 1;
            }
            while lo < next_lo {
                counts.remove(lo);
                lo += 1;
            }
            *slot = counts.average(s, h, params);
        }
        for (o, m) in out.iter_mut().zip(sliding_max(&cube_values, s)) {
            *o = o.max(m);
        }
    }
    out
}

fn maximal_2d(
    values: &[f64],
    n: [usize; 2],
    max_side: usize,
    params: MaximalParams,
    cell_measure: f64,
    power_mean: bool,
) -> Vec<f64> {
    let mut out: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    let (n0, n1) = (n[0], n[1]);
    let mut prefix = vec![0.0; (n0 + 1) * (n1 + 1)];
    let at = |i: usize, j: usize| i * (n1 + 1) + j;
    for i in 0..n0 {
        for j in 0..n1 {
            let v = values[i * n1 + j].abs();
            let v = if power_mean { v.powf(params.eta) } else { v };
            prefix[at(i + 1, j + 1)] = v + prefix[at(i, j + 1)] + prefix[at(i + 1, j)] - prefix[at(i, j)];
        }
    }
    let mut counts = LevelCounts::new(values);
    for s in 2..=max_side {
        let m0 = n0 + s - 1;
        let m1 = n1 + s - 1;
        let mut cube_values = vec![0.0; m0 * m1];
        for r in 0..m0 {
            let a0 = r as i64 - (s as i64 - 1);
            let lo0 = a0.max(0) as usize;
            let hi0 = ((a0 + s as i64).min(n0 as i64)) as usize;
            if lo0 >= hi0 {
                continue;
            }
            counts.clear();
            let (mut lo1, mut hi1) = (0usize, 0usize);
            for c in 0..m1 {
                let a1 = c as i64 - (s as i64 - 1);
                let next_lo = a1.max(0) as usize;
                let next_hi = ((a1 + s as i64).min(n1 as i64)) as usize;
                cube_values[r * m1 + c] = if power_mean {
                    let sum = prefix[at(hi0, next_hi)] - prefix[at(lo0, next_hi)] - prefix[at(hi0, next_lo)]
                        + prefix[at(lo0, next_lo)];
                    (sum.max(0.0) / (s * s) as f64).powf(1.0 / params.eta)
                } else {
                    while hi1 < next_hi {
                        (lo0..hi0).for_each(|i| counts.add(i * n1 + hi1));
                        hi1 += 1;
                    }
                    while lo1 < next_lo {
                        (lo0..hi0).for_each(|i| counts.remove(i * n1 + lo1));
                        lo1 += 1;
                    }
                    counts.average(s * s, cell_measure, params)
                };
            }
        }
        // sliding maximum along the fast axis, then along the slow axis
        let mut partial = vec![0.0; m0 * n1];
        for r in 0..m0 {
            let row = sliding_max(&cube_values[r * m1..(r + 1) * m1], s);
            partial[r * n1..(r + 1) * n1].copy_from_slice(&row);
        }
        for c in 0..n1 {
            let column: Vec<f64> = (0..m0).map(|r| partial[r * n1 + c]).collect();
            for (i, m) in sliding_max(&column, s).into_iter().enumerate() {
                let o = &mut out[i * n1 + c];
                *o = o.max(m);
            }
        }
    }
    out
}

/// Dense sums of `|f|` over every dyadic cube between a top cube and the cell level.
pub(crate) struct Pyramid {
    dim: usize,
    top: DyadicCube,
    depth: u32,
    /// `sums[j]` holds the level `top.level + j` cubes in row-major order.
    sums: Vec<Vec<f64>>,
}

impl Pyramid {
    pub(crate) fn new(f: &StepFunction, top: DyadicCube) -> Self {
        let dim = f.dim();
        let depth = (f.level() - top.level()) as u32;
        let leaf = top.cell_range(f.level());
        let mut leaves = vec![0.0; leaf.len()];
        for (idx, v) in f.iter() {
            if leaf.contains(idx) {
                leaves[leaf.offset(idx)] = v.abs();
            }
        }
        let mut sums = vec![leaves];
        for j in (0..depth).rev() {
            let child = sums.last().expect("nonempty");
            let w = 1usize << j;
            let cw = 2 * w;
            let count = if dim == 1 { w } else { w * w };
            let mut level = vec![0.0; count];
            for (o, slot) in level.iter_mut().enumerate() {
                *slot = if dim == 1 {
                    child[2 * o] + child[2 * o + 1]
                } else {
                    let (r, c) = (o / w, o % w);
                    child[2 * r * cw + 2 * c]
                        + child[2 * r * cw + 2 * c + 1]
                        + child[(2 * r + 1) * cw + 2 * c]
                        + child[(2 * r + 1) * cw + 2 * c + 1]
                };
            }
            sums.push(level);
        }
        sums.reverse();
        Self { dim, top, depth, sums }
    }

    pub(crate) fn depth(&self) -> u32 {
        self.depth
    }

    pub(crate) fn top(&self) -> DyadicCube {
        self.top
    }

    pub(crate) fn width(&self, j: u32) -> usize {
        1usize << j
    }

    /// Average of `|f|` over the level-`j` cube at row-major position `o`.
    pub(crate) fn average(&self, j: u32, o: usize) -> f64 {
        self.sums[j as usize][o] / pow2(self.dim as i32 * (self.depth - j) as i32)
    }

    /// Global index of the level-`j` cube at position `o`.
    pub(crate) fn cube(&self, j: u32, o: usize) -> DyadicCube {
        let w = self.width(j);
        let base = self.top.raw_index();
        let mut idx: Index = [0; 2];
        if self.dim == 1 {
            idx[0] = (base[0] << j) + o as i64;
        } else {
            idx[0] = (base[0] << j) + (o / w) as i64;
            idx[1] = (base[1] << j) + (o % w) as i64;
        }
        DyadicCube::from_parts(self.dim, self.top.level() + j as i32, idx)
    }

    pub(crate) fn children_positions(&self, j: u32, o: usize) -> Vec<usize> {
        let w = self.width(j);
        if self.dim == 1 {
            vec![2 * o, 2 * o + 1]
        } else {
            let (r, c) = (o / w, o % w);
            let cw = 2 * w;
            vec![2 * r * cw + 2 * c, 2 * r * cw + 2 * c + 1, (2 * r + 1) * cw + 2 * c, (2 * r + 1) * cw + 2 * c + 1]
        }
    }

    /// Dyadic maximal function on the leaf cells, row-major over the top cube.
    pub(crate) fn maximal(&self) -> Vec<f64> {
        let mut current = vec![self.average(0, 0)];
        for j in 1..=self.depth {
            let w = self.width(j);
            let count = self.sums[j as usize].len();
            let mut next = vec![0.0; count];
            for (o, slot) in next.iter_mut().enumerate() {
                let parent = if self.dim == 1 {
                    o / 2
                } else {
                    (o / w / 2) * (w / 2) + (o % w) / 2
                };
                *slot = current[parent].max(self.average(j, o));
            }
            current = next;
        }
        current
    }
}

/// `M_d f`: the largest average of `|f|` over dyadic ancestors of each cell,
/// up to the parent of the domain box. Defined on the cells of the top cubes.
pub fn dyadic_maximal(f: &StepFunction) -> StepFunction {
    let mut cells = std::collections::BTreeMap::new();
    for top in f.tops() {
        let pyramid = Pyramid::new(f, top);
        let leaf = top.cell_range(f.level());
        for (o, v) in pyramid.maximal().into_iter().enumerate() {
            cells.insert(leaf.index_at(o), v);
        }
    }
    StepFunction::from_map(f.dim(), f.level(), cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hl() -> MaximalParams {
        MaximalParams::hardy_littlewood()
    }

    /// All intervals with endpoints on the grid containing the cell, by direct summation.
    fn brute_force_1d(values: &[f64], max_side: usize, x: usize) -> f64 {
        let n = values.len() as i64;
        let mut best: f64 = values[x].abs();
        for s in 1..=max_side as i64 {
            for a in (x as i64 - s + 1)..=(x as i64) {
                let sum: f64 = (a.max(0)..(a + s).min(n)).map(|i| values[i as usize].abs()).sum();
                best = best.max(sum / s as f64);
            }
        }
        best
    }

    #[test]
    fn sliding_max_basic() {
        assert_eq!(sliding_max(&[1.0, 3.0, 2.0, 0.0, 5.0], 2), vec![3.0, 3.0, 2.0, 5.0]);
        assert_eq!(sliding_max(&[1.0, 3.0, 2.0], 3), vec![3.0]);
    }

    #[test]
    fn indicator_far_from_support() {
        let f = StepFunction::new(1, 0, [([0], 1.0)]).unwrap();
        // domain box [0,1), top [0,2): extend the window so x = 2 is inside
        let cubes = [DyadicCube::new(1, -2, &[0]).unwrap()];
        let window = Window::covering(&cubes, 6).unwrap();
        let m = maximal_on(&f, hl(), &window).unwrap();
        let h = pow2(-6);
        let at_two = m.value_at(&[2.0 + 0.5 * h]);
        assert!((at_two - 1.0 / (2.0 + h)).abs() < 1e-14, "{at_two}");
        let dense = window.sample(&f);
        let x = (2.0 / h) as usize;
        assert!((at_two - brute_force_1d(&dense, 2 * window.extent(0), x)).abs() < 1e-14);
    }

    #[test]
    fn matches_brute_force_and_dominates_f() {
        let f = StepFunction::new(1, 2, [([0], 1.0), ([1], -3.0), ([5], 0.5), ([6], 2.0)]).unwrap();
        let m = maximal(&f, hl(), 3).unwrap();
        let window = f.window(3, 1).unwrap();
        let dense = window.sample(&f);
        for (o, idx) in window.cells().enumerate() {
            let expect = brute_force_1d(&dense, 2 * window.extent(0), o);
            assert!((m.value(&idx) - expect).abs() < 1e-13);
            assert!(m.value(&idx) >= dense[o].abs());
        }
    }

    #[test]
    fn power_mean_and_generic_paths_agree() {
        // θ = η takes the prefix-sum path; compare against the generic sort path
        let f = StepFunction::new(2, 1, [([0, 0], 1.0), ([1, 1], -2.0), ([0, 3], 0.5)]).unwrap();
        let params = MaximalParams::new(2.0, 2.0).unwrap();
        let fast = maximal(&f, params, 2).unwrap();
        let window = f.window(2, 1).unwrap();
        let values = window.sample(&f);
        let max_side = 2 * window.extent(0).max(window.extent(1));
        let n = [window.extent(0), window.extent(1)];
        let slow = window.to_step_function(&maximal_2d(
            &values,
            n,
            max_side,
            params,
            window.cell_side().powi(2),
            false,
        ));
        for idx in window.cells() {
            assert!((fast.value(&idx) - slow.value(&idx)).abs() < 1e-12);
        }
    }

    #[test]
    fn sliding_counts_match_power_means_in_1d() {
        let f = StepFunction::new(1, 1, [([-3], 0.25), ([0], 1.0), ([1], -2.0), ([2], 1.0), ([7], 0.5)]).unwrap();
        let params = MaximalParams::new(1.5, 1.5).unwrap();
        let window = f.window(3, 1).unwrap();
        let values = window.sample(&f);
        let (n, side) = (window.extent(0), 2 * window.extent(0));
        let fast = maximal_1d(&values, n, side, params, window.cell_side(), true);
        let slow = maximal_1d(&values, n, side, params, window.cell_side(), false);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-12 * a.max(1.0), "{a} {b}");
        }
    }

    #[test]
    fn indicator_lorentz_average_independent_of_theta() {
        let f = StepFunction::new(1, 1, [([0], 1.0), ([1], 1.0), ([4], 1.0)]).unwrap();
        let a = maximal(&f, MaximalParams::new(2.0, 1.0).unwrap(), 2).unwrap();
        let b = maximal(&f, MaximalParams::new(2.0, 5.0).unwrap(), 2).unwrap();
        let c = maximal(&f, MaximalParams::new(1.0, 1.0).unwrap(), 2).unwrap();
        for (idx, v) in a.iter() {
            assert!((v - b.value(idx)).abs() < 1e-13);
            // (|E∩Q|/|Q|)^{1/2} = (|E∩Q|/|Q|)^{1/1·(1/2)}
            assert!((v - c.value(idx).sqrt()).abs() < 1e-13);
        }
    }

    #[test]
    fn dyadic_maximal_values() {
        let f = StepFunction::new(1, 0, [([0], 1.0)]).unwrap();
        let md = dyadic_maximal(&f);
        assert_eq!(md.value(&[0, 0]), 1.0);
        assert_eq!(md.value(&[1, 0]), 0.5);
        let g = StepFunction::new(2, 2, [([0, 0], 1.0), ([3, 1], -4.0), ([1, 2], 0.5)]).unwrap();
        let md = dyadic_maximal(&g);
        let m = maximal(&g, hl(), 2).unwrap();
        for (idx, v) in g.iter() {
            assert!(md.value(idx) >= v.abs());
        }
        for (idx, v) in md.iter() {
            assert!(v <= m.value(idx) + 1e-12);
        }
        // relabeling levels commutes with M_d
        let dilated = dyadic_maximal(&g.dilate(1));
        assert_eq!(dilated, md.dilate(1));
    }

    #[test]
    fn eval_level_must_not_coarsen() {
        let f = StepFunction::new(1, 2, [([0], 1.0)]).unwrap();
        assert!(maximal(&f, hl(), 1).is_err());
        assert!(MaximalParams::new(f64::INFINITY, 1.0).is_err());
    }
}
