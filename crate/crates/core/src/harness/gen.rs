//! Seeded generators for step functions and atom families.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::atoms::{atom_norm, polynomial_projection, Atom, AtomFamily, AtomNormKind};
use crate::dyadic::{DyadicCube, Index, StepFunction};
use crate::error::{domain, Result};

/// Seed of trial `i` under root seed `root`: two rounds of SplitMix64.
pub fn trial_seed(root: u64, i: u64) -> u64 {
    splitmix64(splitmix64(root) ^ i.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Distribution of the nonzero cell values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ValueDist {
    /// Uniform on `(−1, 1)`.
    Uniform,
    /// `±U^{−1/β}` truncated at `10³`.
    HeavyTail { beta: f64 },
    /// Small integer multiples of a common height, as from summing a few indicators.
    IndicatorMix,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepSpec {
    pub dim: usize,
    pub level: i32,
    pub support_cells: usize,
    pub value_dist: ValueDist,
    /// Cells are drawn from a centered box holding about this many times `support_cells`.
    pub sparsity: usize,
    pub nonnegative: bool,
}

impl StepSpec {
    pub fn new(dim: usize, level: i32, support_cells: usize, value_dist: ValueDist) -> Self {
        Self {
            dim,
            level,
            support_cells,
            value_dist,
            sparsity: 4,
            nonnegative: false,
        }
    }

    pub fn nonnegative(mut self) -> Self {
        self.nonnegative = true;
        self
    }

    pub fn sparsity(mut self, sparsity: usize) -> Self {
        self.sparsity = sparsity.max(1);
        self
    }
}

fn draw_value(rng: &mut ChaCha8Rng, dist: ValueDist) -> f64 {
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    match dist {
        ValueDist::Uniform => loop {
            let v: f64 = rng.gen_range(-1.0..1.0);
            if v != 0.0 {
                return v;
            }
        },
        ValueDist::HeavyTail { beta } => {
            let u: f64 = 1.0 - rng.gen::<f64>();
            sign * u.powf(-1.0 / beta).min(1e3)
        }
        ValueDist::IndicatorMix => sign * rng.gen_range(1..=3) as f64,
    }
}

/// A pseudo-random step function with exactly `support_cells` nonzero cells.
pub fn gen_step_function(seed: u64, spec: &StepSpec) -> Result<StepFunction> {
    if spec.support_cells == 0 {
        return Err(domain("support_cells must be at least 1"));
    }
    let mut rng = rng(seed);
    let dim = spec.dim;
    let target = (spec.support_cells * spec.sparsity) as f64;
    let side = (target.powf(1.0 / dim as f64).ceil() as usize).max(1);
    let side = side + side % 2;
    let total = side.pow(dim as u32);
    let half = (side / 2) as i64;
    let picks = sample(&mut rng, total, spec.support_cells.min(total));
    let mut cells: Vec<(Index, f64)> = picks
        .into_iter()
        .map(|o| {
            let mut idx: Index = [0; 2];
            if dim == 1 {
                idx[0] = o as i64 - half;
            } else {
                idx[0] = (o / side) as i64 - half;
                idx[1] = (o % side) as i64 - half;
            }
            (idx, 0.0)
        })
        .collect();
    cells.sort_by_key(|c| c.0);
    for cell in cells.iter_mut() {
        let v = draw_value(&mut rng, spec.value_dist);
        cell.1 = if spec.nonnegative { v.abs() } else { v };
    }
    StepFunction::new(dim, spec.level, cells.into_iter().map(|(k, v)| (k[..dim].to_vec(), v)))
}

/// How the cubes of a generated family relate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CubeLaw {
    /// A dyadic chain `Q_{j+1} = parent(Q_j)`.
    Nested,
    /// Pairwise disjoint cubes of one level.
    Disjoint,
    /// Independent cubes of random level and position.
    Random,
}

impl CubeLaw {
    pub const ALL: [CubeLaw; 3] = [CubeLaw::Nested, CubeLaw::Disjoint, CubeLaw::Random];
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AtomSpec {
    pub dim: usize,
    pub count: usize,
    pub cube_law: CubeLaw,
    pub s: f64,
    pub t: f64,
    pub kind: AtomNormKind,
    pub degree: i32,
    pub v: f64,
    /// Atom data lives this many levels below its cube.
    pub depth: u32,
}

fn gen_cubes(rng: &mut ChaCha8Rng, spec: &AtomSpec) -> Vec<DyadicCube> {
    let dim = spec.dim;
    let random_index = |rng: &mut ChaCha8Rng, range: i64| -> Vec<i64> { (0..dim).map(|_| rng.gen_range(-range..range)).collect() };
    match spec.cube_law {
        CubeLaw::Nested => {
            let level = rng.gen_range(0..=2);
            let base = DyadicCube::new(dim, level, &random_index(rng, 4)).expect("valid cube");
            (0..spec.count).map(|j| base.ancestor(j as u32)).collect()
        }
        CubeLaw::Disjoint => {
            let level = rng.gen_range(-1..=1);
            let side = ((spec.count * 2) as f64).powf(1.0 / dim as f64).ceil() as usize + 1;
            let total = side.pow(dim as u32);
            sample(rng, total, spec.count.min(total))
                .into_iter()
                .map(|o| {
                    let idx: Vec<i64> = if dim == 1 {
                        vec![o as i64 - (side / 2) as i64]
                    } else {
                        vec![(o / side) as i64 - (side / 2) as i64, (o % side) as i64 - (side / 2) as i64]
                    };
                    DyadicCube::new(dim, level, &idx).expect("valid cube")
                })
                .collect()
        }
        CubeLaw::Random => (0..spec.count)
            .map(|_| {
                let level = rng.gen_range(-2..=2);
                let range = 1i64 << (level + 2).max(0);
                DyadicCube::new(dim, level, &random_index(rng, range)).expect("valid cube")
            })
            .collect(),
    }
}

/// Random data on the cells of `cube`, with moments up to `degree` removed.
fn gen_atom_data(rng: &mut ChaCha8Rng, cube: &DyadicCube, depth: u32, degree: i32) -> Result<StepFunction> {
    let level = cube.level() + depth as i32;
    let window = cube.cell_range(level);
    loop {
        let values: Vec<f64> = (0..window.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let data = window.to_step_function(&values);
        let data = if degree >= 0 {
            data.sub(&polynomial_projection(&data, cube, degree)?)?
        } else {
            data
        };
        if data.sup_norm() > 0.0 {
            return Ok(data);
        }
    }
}

/// A family of atoms meeting their size bound `‖a‖ ≤ |Q|^{1/s}` to within a
/// random factor in `[1/2, 1]`, with coefficients uniform on `[1/10, 2]`.
pub fn gen_atom_family(seed: u64, spec: &AtomSpec) -> Result<AtomFamily> {
    if spec.count == 0 {
        return Err(domain("count must be at least 1"));
    }
    let mut rng = rng(seed);
    let cubes = gen_cubes(&mut rng, spec);
    let mut atoms = Vec::with_capacity(cubes.len());
    let mut lambdas = Vec::with_capacity(cubes.len());
    for cube in cubes {
        let data = gen_atom_data(&mut rng, &cube, spec.depth, spec.degree)?;
        let norm = atom_norm(&data, spec.s, spec.t, spec.kind)?;
        let target = rng.gen_range(0.5..=1.0) * cube.volume().powf(1.0 / spec.s);
        atoms.push(Atom::new(cube, data.scale(target / norm), spec.degree)?);
        lambdas.push(rng.gen_range(0.1..=2.0));
    }
    AtomFamily::new(spec.v, lambdas, atoms)
}
