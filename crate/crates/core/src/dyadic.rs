//! Dyadic cubes and exactly represented step functions.
//!
//! A cube at level `m` with integer index `k` is `2^{-m}([k_1, k_1 + 1) x ...)`.
//! Every step function lives on the grid of one level; operations that mix
//! functions refine to the finer grid first, which is exact.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Integer cell index. Only the first `dim` entries are meaningful; the rest are zero.
pub type Index = [i64; 2];

/// `2^e` for an integer exponent, exact in binary floating point.
#[inline]
pub fn pow2(e: i32) -> f64 {
    2f64.powi(e)
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(domain(format!("dimension must be 1 or 2, got {dim}")))
    }
}

#[inline]
fn shift_index(index: &Index, dim: usize, by: u32) -> Index {
    let mut out = [0; 2];
    for axis in 0..dim {
        out[axis] = index[axis] >> by;
    }
    out
}

/// Sign pattern of an index. Dyadic cubes never straddle a coordinate hyperplane
/// through the origin, so every dyadic ancestor chain stays inside one orthant.
#[inline]
fn orthant(index: &Index, dim: usize) -> u8 {
    let mut bits = 0u8;
    for axis in 0..dim {
        if index[axis] < 0 {
            bits |= 1 << axis;
        }
    }
    bits
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicCube {
    dim: usize,
    level: i32,
    index: Index,
}

impl DyadicCube {
    pub fn new(dim: usize, level: i32, index: &[i64]) -> Result<Self> {
        check_dim(dim)?;
        if index.len() != dim {
            return Err(domain(format!(
                "cube index has length {} but dim is {dim}",
                index.len()
            )));
        }
        let mut idx = [0; 2];
        idx[..dim].copy_from_slice(index);
        Ok(Self {
            dim,
            level,
            index: idx,
        })
    }

    pub(crate) fn from_parts(dim: usize, level: i32, index: Index) -> Self {
        Self { dim, level, index }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> i32 {
        self.level
    }

    pub fn index(&self) -> &[i64] {
        &self.index[..self.dim]
    }

    pub(crate) fn raw_index(&self) -> Index {
        self.index
    }

    /// Side length `2^{-level}`.
    pub fn side(&self) -> f64 {
        pow2(-self.level)
    }

    pub fn volume(&self) -> f64 {
        pow2(-self.level * self.dim as i32)
    }

    pub fn parent(&self) -> Self {
        self.ancestor(1)
    }

    pub fn ancestor(&self, up: u32) -> Self {
        Self {
            dim: self.dim,
            level: self.level - up as i32,
            index: shift_index(&self.index, self.dim, up),
        }
    }

    pub fn children(&self) -> Vec<Self> {
        let mut out = Vec::with_capacity(1 << self.dim);
        for bits in 0..(1usize << self.dim) {
            let mut idx = [0; 2];
            for axis in 0..self.dim {
                idx[axis] = 2 * self.index[axis] + ((bits >> axis) & 1) as i64;
            }
            out.push(Self {
                dim: self.dim,
                level: self.level + 1,
                index: idx,
            });
        }
        out
    }

    /// `self ⊇ other`, decided by integer shifts.
    pub fn contains(&self, other: &Self) -> bool {
        if other.dim != self.dim || other.level < self.level {
            return false;
        }
        shift_index(&other.index, self.dim, (other.level - self.level) as u32) == self.index
    }

    /// Whether the grid cell `index` at `level` lies inside this cube.
    pub fn contains_cell(&self, level: i32, index: &Index) -> bool {
        level >= self.level && shift_index(index, self.dim, (level - self.level) as u32) == self.index
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.contains(other) || other.contains(self)
    }

    pub fn lower_corner(&self) -> [f64; 2] {
        let side = self.side();
        let mut c = [0.0; 2];
        for axis in 0..self.dim {
            c[axis] = self.index[axis] as f64 * side;
        }
        c
    }

    pub fn center(&self) -> [f64; 2] {
        let side = self.side();
        let mut c = self.lower_corner();
        for v in c.iter_mut().take(self.dim) {
            *v += 0.5 * side;
        }
        c
    }

    /// Index range of the cells of this cube on the grid of `level` (half-open per axis).
    pub fn cell_range(&self, level: i32) -> Window {
        assert!(level >= self.level, "cell_range below cube level");
        let shift = (level - self.level) as u32;
        let mut lo = [0; 2];
        let mut hi = [1; 2];
        for axis in 0..self.dim {
            lo[axis] = self.index[axis] << shift;
            hi[axis] = (self.index[axis] + 1) << shift;
        }
        Window {
            dim: self.dim,
            level,
            lo,
            hi,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CubeRepr {
    level: i32,
    index: Vec<i64>,
}

impl Serialize for DyadicCube {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CubeRepr {
            level: self.level,
            index: self.index().to_vec(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DyadicCube {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = CubeRepr::deserialize(d)?;
        DyadicCube::new(repr.index.len(), repr.level, &repr.index).map_err(serde::de::Error::custom)
    }
}

/// A rectangular block of grid cells at one level: `lo[axis] <= k[axis] < hi[axis]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    pub(crate) dim: usize,
    pub(crate) level: i32,
    pub(crate) lo: Index,
    pub(crate) hi: Index,
}

impl Window {
    /// Smallest window at `level` covering every cube in `cubes`.
    pub fn covering(cubes: &[DyadicCube], level: i32) -> Result<Self> {
        let first = cubes
            .first()
            .ok_or_else(|| domain("cannot build a window from no cubes"))?;
        let dim = first.dim;
        let mut lo = [i64::MAX, 0];
        let mut hi = [i64::MIN, 1];
        if dim == 2 {
            lo[1] = i64::MAX;
            hi[1] = i64::MIN;
        }
        for cube in cubes {
            if level < cube.level {
                return Err(domain(format!(
                    "window level {level} is coarser than cube level {}",
                    cube.level
                )));
            }
            let r = cube.cell_range(level);
            for axis in 0..dim {
                lo[axis] = lo[axis].min(r.lo[axis]);
                hi[axis] = hi[axis].max(r.hi[axis]);
            }
        }
        Ok(Self { dim, level, lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> i32 {
        self.level
    }

    pub fn extent(&self, axis: usize) -> usize {
        (self.hi[axis] - self.lo[axis]) as usize
    }

    pub fn len(&self) -> usize {
        (0..self.dim).map(|a| self.extent(a)).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_side(&self) -> f64 {
        pow2(-self.level)
    }

    pub fn contains(&self, index: &Index) -> bool {
        (0..self.dim).all(|a| index[a] >= self.lo[a] && index[a] < self.hi[a])
    }

    /// Row-major position of `index` (last axis fastest).
    pub(crate) fn offset(&self, index: &Index) -> usize {
        if self.dim == 1 {
            (index[0] - self.lo[0]) as usize
        } else {
            (index[0] - self.lo[0]) as usize * self.extent(1) + (index[1] - self.lo[1]) as usize
        }
    }

    pub(crate) fn index_at(&self, offset: usize) -> Index {
        if self.dim == 1 {
            [self.lo[0] + offset as i64, 0]
        } else {
            let w = self.extent(1);
            [
                self.lo[0] + (offset / w) as i64,
                self.lo[1] + (offset % w) as i64,
            ]
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = Index> + '_ {
        (0..self.len()).map(move |o| self.index_at(o))
    }

    pub fn center(&self, index: &Index) -> [f64; 2] {
        let h = self.cell_side();
        let mut c = [0.0; 2];
        for axis in 0..self.dim {
            c[axis] = (index[axis] as f64 + 0.5) * h;
        }
        c
    }

    /// Step function with the given dense values on this window.
    pub fn to_step_function(&self, values: &[f64]) -> StepFunction {
        debug_assert_eq!(values.len(), self.len());
        let cells = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(o, v)| (self.index_at(o), *v))
            .collect();
        StepFunction {
            dim: self.dim,
            level: self.level,
            cells,
        }
    }

    /// Dense values of `f` on this window. `f` must live on a level no finer than the window.
    pub fn sample(&self, f: &StepFunction) -> Vec<f64> {
        assert!(f.level <= self.level, "sample: function finer than window");
        let shift = (self.level - f.level) as u32;
        self.cells()
            .map(|idx| f.value(&shift_index(&idx, self.dim, shift)))
            .collect()
    }
}

/// A finite set of grid cells; houses level sets `{|f| > α}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridIndexSet {
    dim: usize,
    level: i32,
    cells: BTreeSet<Index>,
}

impl GridIndexSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> i32 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, index: &Index) -> bool {
        self.cells.contains(index)
    }

    /// `card · 2^{-level·dim}`.
    pub fn measure(&self) -> f64 {
        self.cells.len() as f64 * pow2(-self.level * self.dim as i32)
    }

    pub fn indicator(&self) -> StepFunction {
        StepFunction {
            dim: self.dim,
            level: self.level,
            cells: self.cells.iter().map(|i| (*i, 1.0)).collect(),
        }
    }
}

/// Finite map from grid cells at a fixed level to real values; absent cells are zero.
///
/// Exact zeros are never stored, so the support is exactly the key set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StepFunctionRepr", into = "StepFunctionRepr")]
pub struct StepFunction {
    dim: usize,
    level: i32,
    cells: BTreeMap<Index, f64>,
}

impl StepFunction {
    pub fn zero(dim: usize, level: i32) -> Self {
        Self {
            dim,
            level,
            cells: BTreeMap::new(),
        }
    }

    /// Builds a step function, rejecting duplicate or malformed cells.
    pub fn new<I, V>(dim: usize, level: i32, cells: I) -> Result<Self>
    where
        I: IntoIterator<Item = (V, f64)>,
        V: AsRef<[i64]>,
    {
        check_dim(dim)?;
        let mut map = BTreeMap::new();
        let mut seen = BTreeSet::new();
        for (index, value) in cells {
            let index = index.as_ref();
            if index.len() != dim {
                return Err(domain(format!(
                    "cell index {index:?} has length {} but dim is {dim}",
                    index.len()
                )));
            }
            if !value.is_finite() {
                return Err(domain(format!("cell {index:?} has non-finite value {value}")));
            }
            let mut idx = [0; 2];
            idx[..dim].copy_from_slice(index);
            if !seen.insert(idx) {
                return Err(domain(format!("duplicate cell index {index:?}")));
            }
            if value != 0.0 {
                map.insert(idx, value);
            }
        }
        Ok(Self {
            dim,
            level,
            cells: map,
        })
    }

    /// Builds from cells that may repeat; repeated values are summed in iteration order.
    pub(crate) fn accumulate<I: IntoIterator<Item = (Index, f64)>>(
        dim: usize,
        level: i32,
        cells: I,
    ) -> Self {
        let mut map: BTreeMap<Index, f64> = BTreeMap::new();
        for (idx, v) in cells {
            *map.entry(idx).or_insert(0.0) += v;
        }
        map.retain(|_, v| *v != 0.0);
        Self {
            dim,
            level,
            cells: map,
        }
    }

    pub(crate) fn from_map(dim: usize, level: i32, mut cells: BTreeMap<Index, f64>) -> Self {
        cells.retain(|_, v| *v != 0.0);
        Self { dim, level, cells }
    }

    /// `χ_Q` on the grid of the cube's own level.
    pub fn indicator(cube: &DyadicCube) -> Self {
        let mut cells = BTreeMap::new();
        cells.insert(cube.index, 1.0);
        Self {
            dim: cube.dim,
            level: cube.level,
            cells,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> i32 {
        self.level
    }

    /// Number of nonzero cells.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_zero(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Index, f64)> + '_ {
        self.cells.iter().map(|(k, v)| (k, *v))
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.cells.values().copied()
    }

    pub fn value(&self, index: &Index) -> f64 {
        self.cells.get(index).copied().unwrap_or(0.0)
    }

    /// Value at a point of ℝ^dim.
    pub fn value_at(&self, x: &[f64]) -> f64 {
        let scale = pow2(self.level);
        let mut idx = [0; 2];
        for axis in 0..self.dim {
            idx[axis] = (x[axis] * scale).floor() as i64;
        }
        self.value(&idx)
    }

    pub fn cell_measure(&self) -> f64 {
        pow2(-self.level * self.dim as i32)
    }

    pub fn cell_side(&self) -> f64 {
        pow2(-self.level)
    }

    pub fn cell(&self, index: &Index) -> DyadicCube {
        DyadicCube::from_parts(self.dim, self.level, *index)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn integral(&self) -> f64 {
        self.values().sum::<f64>() * self.cell_measure()
    }

    pub fn map(&self, mut op: impl FnMut(f64) -> f64) -> Self {
        Self::from_map(
            self.dim,
            self.level,
            self.cells.iter().map(|(k, v)| (*k, op(*v))).collect(),
        )
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    /// Exact refinement: every cell is split into `2^{dim·Δ}` children with the same value.
    pub fn refine(&self, target_level: i32) -> Result<Self> {
        if target_level < self.level {
            return Err(Error::Coarsening {
                level: self.level,
                target: target_level,
            });
        }
        if target_level == self.level {
            return Ok(self.clone());
        }
        let mut cells = BTreeMap::new();
        for (idx, v) in &self.cells {
            let range = self.cell(idx).cell_range(target_level);
            for child in range.cells() {
                cells.insert(child, *v);
            }
        }
        Ok(Self {
            dim: self.dim,
            level: target_level,
            cells,
        })
    }

    fn refined_pair(&self, other: &Self) -> Result<(Self, Self)> {
        if self.dim != other.dim {
            return Err(domain("functions have different dimensions"));
        }
        let level = self.level.max(other.level);
        Ok((self.refine(level)?, other.refine(level)?))
    }

    /// Cellwise combination on the common refinement.
    pub fn zip_with(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let (a, b) = self.refined_pair(other)?;
        let keys: BTreeSet<Index> = a.cells.keys().chain(b.cells.keys()).copied().collect();
        Ok(Self::from_map(
            a.dim,
            a.level,
            keys.into_iter()
                .map(|k| (k, op(a.value(&k), b.value(&k))))
                .collect(),
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |x, y| x - y)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |x, y| x * y)
    }

    /// `x ↦ f(2^m x)`, realized by relabeling the grid level.
    pub fn dilate(&self, m: i32) -> Self {
        Self {
            dim: self.dim,
            level: self.level + m,
            cells: self.cells.clone(),
        }
    }

    /// `f·χ_Q`. Refines first when the cube is finer than the grid.
    pub fn restrict(&self, cube: &DyadicCube) -> Self {
        let f = if cube.level > self.level {
            self.refine(cube.level).expect("refining to a finer level")
        } else {
            self.clone()
        };
        let cells = f
            .cells
            .iter()
            .filter(|(k, _)| cube.contains_cell(f.level, k))
            .map(|(k, v)| (*k, *v))
            .collect();
        Self {
            dim: f.dim,
            level: f.level,
            cells,
        }
    }

    /// Cells with `|f| > alpha`.
    pub fn level_set(&self, alpha: f64) -> GridIndexSet {
        GridIndexSet {
            dim: self.dim,
            level: self.level,
            cells: self
                .cells
                .iter()
                .filter(|(_, v)| v.abs() > alpha)
                .map(|(k, _)| *k)
                .collect(),
        }
    }

    /// Smallest dyadic cube containing the support inside each occupied orthant.
    ///
    /// Dyadic cubes never cross the coordinate hyperplanes, so a support that
    /// straddles one has one box per orthant.
    pub fn domain_boxes(&self) -> Vec<DyadicCube> {
        let mut ranges: BTreeMap<u8, (Index, Index)> = BTreeMap::new();
        for idx in self.cells.keys() {
            let o = orthant(idx, self.dim);
            let e = ranges.entry(o).or_insert((*idx, *idx));
            for axis in 0..self.dim {
                e.0[axis] = e.0[axis].min(idx[axis]);
                e.1[axis] = e.1[axis].max(idx[axis]);
            }
        }
        ranges
            .values()
            .map(|(lo, hi)| {
                let mut up = 0u32;
                while shift_index(lo, self.dim, up) != shift_index(hi, self.dim, up) {
                    up += 1;
                }
                DyadicCube::from_parts(self.dim, self.level - up as i32, shift_index(lo, self.dim, up))
            })
            .collect()
    }

    /// The smallest dyadic cube containing the support, when one exists.
    pub fn domain_box(&self) -> Option<DyadicCube> {
        let boxes = self.domain_boxes();
        (boxes.len() == 1).then(|| boxes[0])
    }

    /// Parents of the domain boxes: the top of every dyadic tree this function lives in.
    pub fn tops(&self) -> Vec<DyadicCube> {
        self.domain_boxes().iter().map(DyadicCube::parent).collect()
    }

    /// Window at `level` covering the `pad`-th ancestors of the domain boxes
    /// (`pad = 1` covers the tops).
    pub fn window(&self, level: i32, pad: u32) -> Result<Window> {
        if self.is_zero() {
            return Err(Error::ZeroFunction);
        }
        let cubes: Vec<DyadicCube> = self
            .domain_boxes()
            .iter()
            .map(|c| c.ancestor(pad))
            .collect();
        Window::covering(&cubes, level)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CellRepr {
    index: Vec<i64>,
    value: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepFunctionRepr {
    dim: usize,
    level: i32,
    cells: Vec<CellRepr>,
}

impl TryFrom<StepFunctionRepr> for StepFunction {
    type Error = Error;

    fn try_from(repr: StepFunctionRepr) -> Result<Self> {
        StepFunction::new(
            repr.dim,
            repr.level,
            repr.cells.into_iter().map(|c| (c.index, c.value)),
        )
    }
}

impl From<StepFunction> for StepFunctionRepr {
    fn from(f: StepFunction) -> Self {
        let dim = f.dim;
        StepFunctionRepr {
            dim,
            level: f.level,
            cells: f
                .cells
                .into_iter()
                .map(|(k, value)| CellRepr {
                    index: k[..dim].to_vec(),
                    value,
                })
                .collect(),
        }
    }
}

impl StepFunction {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("step functions always serialize")
    }
}

/// The finite family of dyadic cubes over which the dyadic Morrey supremum is exact.
///
/// Cubes strictly inside one cell are dominated by the cell, since there the
/// summand grows like `|Q|^{1/p}`. Cubes containing a whole orthant's support
/// are dominated by the smallest such cube, because `‖fχ_Q‖` stops changing
/// while `|Q|^{1/p - 1/q}` is non-increasing for `p ≥ q`. What remains is every
/// ancestor of a support cell up to the domain boxes, plus their parents.
pub fn enumerate_cubes(f: &StepFunction) -> Vec<DyadicCube> {
    let mut out = Vec::new();
    for_each_cube_level(f, |level, groups| {
        out.extend(groups.keys().map(|k| DyadicCube::from_parts(f.dim, level, *k)));
    });
    out
}

/// Visits the cube family level by level, from the cell level upward, handing
/// the callback the support cells grouped by their ancestor at that level.
pub(crate) fn for_each_cube_level(
    f: &StepFunction,
    mut visit: impl FnMut(i32, &BTreeMap<Index, Vec<f64>>),
) {
    if f.is_zero() {
        return;
    }
    let orthants: BTreeSet<u8> = f.cells.keys().map(|k| orthant(k, f.dim)).collect();
    let mut groups: BTreeMap<Index, Vec<f64>> =
        f.cells.iter().map(|(k, v)| (*k, vec![*v])).collect();
    let mut level = f.level;
    let mut extra = 1;
    loop {
        visit(level, &groups);
        if groups.len() == orthants.len() {
            if extra == 0 {
                break;
            }
            extra -= 1;
        }
        let mut next: BTreeMap<Index, Vec<f64>> = BTreeMap::new();
        for (k, vals) in groups {
            next.entry(shift_index(&k, f.dim, 1))
                .or_default()
                .extend(vals);
        }
        groups = next;
        level -= 1;
    }
}
