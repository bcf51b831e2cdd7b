//! Atoms, atomic synthesis, and the Calderón-Zygmund decomposition into atoms.

mod decompose;
pub mod moments;

pub use decompose::{
    check_decomposition_norm, decompose, guarantees, DecompositionResult, Guarantees,
};
pub use moments::{max_moment_residual, multi_indices, polynomial_projection, MAX_DEGREE};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dyadic::{pow2, DyadicCube, Index, StepFunction};
use crate::error::{constraint, domain, Error, Result};
use crate::morrey::{morrey_lorentz_norm, weak_morrey_norm, MorreyLorentzParams};
use crate::quad::gauss_legendre;
use crate::RatioReport;

/// A function supported on a dyadic cube, with vanishing moments up to
/// `degree` (`−1` means no moment condition).
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    cube: DyadicCube,
    data: StepFunction,
    degree: i32,
}

impl Atom {
    pub fn new(cube: DyadicCube, data: StepFunction, degree: i32) -> Result<Self> {
        if cube.dim() != data.dim() {
            return Err(domain("atom cube and data dimensions differ"));
        }
        if !(-1..=MAX_DEGREE).contains(&degree) {
            return Err(domain(format!(
                "cancellation degree must lie in -1..={MAX_DEGREE}, got {degree}"
            )));
        }
        Ok(Self { cube, data, degree })
    }

    pub fn cube(&self) -> &DyadicCube {
        &self.cube
    }

    pub fn data(&self) -> &StepFunction {
        &self.data
    }

    pub fn degree(&self) -> i32 {
        self.degree
    }

    pub fn is_supported_in_cube(&self) -> bool {
        let data = if self.cube.level() > self.data.level() {
            self.data.refine(self.cube.level()).expect("refining to a finer level")
        } else {
            self.data.clone()
        };
        let level = data.level();
        let inside = data.iter().all(|(idx, _)| self.cube.contains_cell(level, idx));
        inside
    }

    pub fn moment_residual(&self) -> f64 {
        let data = if self.cube.level() > self.data.level() {
            self.data.refine(self.cube.level()).expect("refining to a finer level")
        } else {
            self.data.clone()
        };
        max_moment_residual(&data, &self.cube, self.degree).expect("degree checked at construction")
    }
}

/// Coefficients `λ_j ≥ 0`, atoms `a_j`, and the aggregation exponent `v ∈ (0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FamilyRepr", into = "FamilyRepr")]
pub struct AtomFamily {
    v: f64,
    lambdas: Vec<f64>,
    atoms: Vec<Atom>,
}

impl AtomFamily {
    pub fn new(v: f64, lambdas: Vec<f64>, atoms: Vec<Atom>) -> Result<Self> {
        if !(v > 0.0 && v <= 1.0) {
            return Err(domain(format!("aggregation exponent must lie in (0, 1], got {v}")));
        }
        if lambdas.len() != atoms.len() {
            return Err(domain(format!(
                "{} coefficients for {} atoms",
                lambdas.len(),
                atoms.len()
            )));
        }
        if let Some(l) = lambdas.iter().find(|l| !(**l >= 0.0) || !l.is_finite()) {
            return Err(domain(format!("coefficients must be finite and nonnegative, got {l}")));
        }
        if let Some(a) = atoms.iter().find(|a| a.cube.dim() != atoms[0].cube.dim()) {
            return Err(domain(format!(
                "atoms must share a dimension, found {} and {}",
                atoms[0].cube.dim(),
                a.cube.dim()
            )));
        }
        Ok(Self { v, lambdas, atoms })
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &Atom)> + '_ {
        self.lambdas.iter().copied().zip(&self.atoms)
    }

    pub fn with_v(&self, v: f64) -> Result<Self> {
        Self::new(v, self.lambdas.clone(), self.atoms.clone())
    }

    fn dim(&self) -> usize {
        self.atoms.first().map_or(1, |a| a.cube.dim())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("atom families always serialize")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomRepr {
    cube: DyadicCube,
    lambda: f64,
    #[serde(rename = "K")]
    degree: i32,
    data: StepFunction,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyRepr {
    v: f64,
    atoms: Vec<AtomRepr>,
}

impl TryFrom<FamilyRepr> for AtomFamily {
    type Error = Error;

    fn try_from(repr: FamilyRepr) -> Result<Self> {
        let mut lambdas = Vec::with_capacity(repr.atoms.len());
        let mut atoms = Vec::with_capacity(repr.atoms.len());
        for a in repr.atoms {
            lambdas.push(a.lambda);
            atoms.push(Atom::new(a.cube, a.data, a.degree)?);
        }
        AtomFamily::new(repr.v, lambdas, atoms)
    }
}

impl From<AtomFamily> for FamilyRepr {
    fn from(f: AtomFamily) -> Self {
        FamilyRepr {
            v: f.v,
            atoms: f
                .lambdas
                .into_iter()
                .zip(f.atoms)
                .map(|(lambda, a)| AtomRepr {
                    cube: a.cube,
                    lambda,
                    degree: a.degree,
                    data: a.data,
                })
                .collect(),
        }
    }
}

/// The space in which atoms are size-normalized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AtomNormKind {
    /// `‖a‖_{WM^s_t} ≤ |Q|^{1/s}`
    WeakMorrey,
    /// `‖a‖_{M^s_1} ≤ |Q|^{1/s}`
    MorreyL1,
}

impl fmt::Display for AtomNormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AtomNormKind::WeakMorrey => "weak-morrey",
            AtomNormKind::MorreyL1 => "morrey-L1",
        })
    }
}

impl std::str::FromStr for AtomNormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weak-morrey" => Ok(AtomNormKind::WeakMorrey),
            "morrey-L1" => Ok(AtomNormKind::MorreyL1),
            other => Err(domain(format!("unknown atom norm `{other}`"))),
        }
    }
}

/// Outcome of [`validate_atom`].
#[derive(Clone, Debug, PartialEq)]
pub struct AtomValidation {
    pub supported: bool,
    /// `‖a‖ / |Q|^{1/s}`
    pub norm_ratio: f64,
    pub moment_residual: f64,
    pub valid: bool,
}

impl AtomValidation {
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.supported {
            out.push("support is not contained in the cube".to_string());
        }
        if self.norm_ratio > 1.0 + NORM_SLACK {
            out.push(format!("size bound exceeded by factor {}", self.norm_ratio));
        }
        if self.moment_residual > MOMENT_TOL {
            out.push(format!("moment residual {:e}", self.moment_residual));
        }
        out
    }
}

const NORM_SLACK: f64 = 1e-12;
const MOMENT_TOL: f64 = 1e-10;

/// Atom size in the chosen space: `WM^s_t` or `M^s_1`.
pub fn atom_norm(data: &StepFunction, s: f64, t: f64, kind: AtomNormKind) -> Result<f64> {
    match kind {
        AtomNormKind::WeakMorrey => weak_morrey_norm(data, s, t),
        AtomNormKind::MorreyL1 => Ok(morrey_lorentz_norm(data, MorreyLorentzParams::new(s, 1.0, 1.0)?)),
    }
}

/// Checks support, size and moment conditions of an atom.
pub fn validate_atom(a: &Atom, s: f64, t: f64, kind: AtomNormKind) -> Result<AtomValidation> {
    let norm = atom_norm(&a.data, s, t, kind)?;
    let norm_ratio = norm / a.cube.volume().powf(1.0 / s);
    let supported = a.is_supported_in_cube();
    let moment_residual = a.moment_residual();
    let valid = supported && norm_ratio <= 1.0 + NORM_SLACK && moment_residual <= MOMENT_TOL;
    Ok(AtomValidation {
        supported,
        norm_ratio,
        moment_residual,
        valid,
    })
}

fn finest_level(family: &AtomFamily) -> Option<i32> {
    family.atoms.iter().map(|a| a.data.level().max(a.cube.level())).max()
}

/// `Σ λ_j a_j`, summed cellwise in family order on the finest grid.
pub fn synthesize(family: &AtomFamily) -> StepFunction {
    let Some(level) = finest_level(family) else {
        return StepFunction::zero(family.dim(), 0);
    };
    let mut cells: Vec<(Index, f64)> = Vec::new();
    for (lambda, a) in family.iter() {
        let data = a.data.refine(level).expect("refining to the finest level");
        cells.extend(data.iter().map(|(k, v)| (*k, lambda * v)));
    }
    StepFunction::accumulate(family.dim(), level, cells)
}

/// `x ↦ (Σ_j (λ_j χ_{Q_j}(x))^v)^{1/v}` on the grid of the finest cube.
pub fn aggregate_function(family: &AtomFamily) -> StepFunction {
    let Some(level) = family.atoms.iter().map(|a| a.cube.level()).max() else {
        return StepFunction::zero(family.dim(), 0);
    };
    let v = family.v;
    let mut sums: BTreeMap<Index, f64> = BTreeMap::new();
    for (lambda, a) in family.iter() {
        if lambda == 0.0 {
            continue;
        }
        let w = lambda.powf(v);
        for idx in a.cube.cell_range(level).cells() {
            *sums.entry(idx).or_insert(0.0) += w;
        }
    }
    let cells = sums.into_iter().map(|(k, s)| (k, s.powf(1.0 / v))).collect();
    StepFunction::from_map(family.dim(), level, cells)
}

/// `‖(Σ_j (λ_j χ_{Q_j})^v)^{1/v}‖_{M^p_{q,r}}`.
pub fn aggregate_norm(family: &AtomFamily, mp: MorreyLorentzParams) -> f64 {
    morrey_lorentz_norm(&aggregate_function(family), mp)
}

/// `(s, t)` of the weak Morrey space the atoms are normalized in.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AtomSpace {
    pub s: f64,
    pub t: f64,
}

/// Checks the exponent hypotheses of the synthesis inequality, naming the first violated one.
pub fn synthesis_constraints(mp: MorreyLorentzParams, space: AtomSpace, v: f64) -> Result<()> {
    let AtomSpace { s, t } = space;
    let (p, q, r) = (mp.p(), mp.q(), mp.r());
    let checks = [
        (t > 0.0 && t <= s && s.is_finite(), "0 < t ≤ s < ∞"),
        (v > 0.0 && v <= 1.0, "0 < v ≤ 1"),
        (q < t, "q < t"),
        (p < s, "p < s"),
        (v < q.min(r), "v < min(q, r)"),
    ];
    for (ok, name) in checks {
        if !ok {
            return Err(constraint(format!(
                "{name} fails for (p, q, r, s, t, v) = ({p}, {q}, {r}, {s}, {t}, {v})"
            )));
        }
    }
    Ok(())
}

/// `‖Σ λ_j a_j‖_{M^p_{q,r}} / ‖(Σ (λ_j χ_{Q_j})^v)^{1/v}‖_{M^p_{q,r}}` for weak-Morrey-normalized atoms.
pub fn check_synthesis(family: &AtomFamily, mp: MorreyLorentzParams, space: AtomSpace) -> Result<RatioReport> {
    synthesis_constraints(mp, space, family.v)?;
    for (j, a) in family.atoms.iter().enumerate() {
        let check = validate_atom(a, space.s, space.t, AtomNormKind::WeakMorrey)?;
        if !check.valid {
            return Err(domain(format!("atom {j} is invalid: {}", check.failures().join("; "))));
        }
    }
    let lhs = morrey_lorentz_norm(&synthesize(family), mp);
    let rhs = aggregate_norm(family, mp);
    Ok(RatioReport::new(lhs, rhs))
}

/// A test function paired against an atom.
#[derive(Clone, Debug, PartialEq)]
pub enum TestFunction {
    /// `Σ c_β x^β`, integrated exactly over each cell.
    Polynomial(Vec<([u32; 2], f64)>),
    /// `exp(−|x − center|² / width²)`, integrated by an 8-point tensor Gauss rule per cell.
    Gaussian { center: [f64; 2], width: f64 },
}

impl TestFunction {
    fn cell_integral(&self, dim: usize, level: i32, idx: &Index, nodes: &(Vec<f64>, Vec<f64>)) -> f64 {
        let h = pow2(-level);
        match self {
            TestFunction::Polynomial(terms) => terms
                .iter()
                .map(|(beta, c)| {
                    c * (0..dim)
                        .map(|axis| {
                            let e = beta[axis] as i32 + 1;
                            let (a, b) = (idx[axis] as f64 * h, (idx[axis] + 1) as f64 * h);
                            (b.powi(e) - a.powi(e)) / e as f64
                        })
                        .product::<f64>()
                })
                .sum(),
            TestFunction::Gaussian { center, width } => {
                let (x, w) = nodes;
                let axis_points = |axis: usize| -> Vec<(f64, f64)> {
                    let mid = (idx[axis] as f64 + 0.5) * h;
                    x.iter().zip(w).map(|(x, w)| (mid + 0.5 * h * x, 0.5 * h * w)).collect()
                };
                let gauss = |d2: f64| (-d2 / (width * width)).exp();
                let xs = axis_points(0);
                if dim == 1 {
                    xs.iter().map(|(p, w)| w * gauss((p - center[0]).powi(2))).sum()
                } else {
                    let ys = axis_points(1);
                    xs.iter()
                        .flat_map(|(px, wx)| {
                            ys.iter().map(move |(py, wy)| {
                                wx * wy * gauss((px - center[0]).powi(2) + (py - center[1]).powi(2))
                            })
                        })
                        .sum()
                }
            }
        }
    }
}

/// `∫ a φ`, the bound `ℓ(Q)^{n+K+1} sup_{y ∈ Q} (1 + |y|)^{−N}`, and their ratio.
pub fn check_atom_pairing(a: &Atom, phi: &TestFunction, decay: u32) -> RatioReport {
    let dim = a.cube.dim();
    let nodes = gauss_legendre(8);
    let pairing: f64 = a
        .data
        .iter()
        .map(|(idx, v)| v * phi.cell_integral(dim, a.data.level(), idx, &nodes))
        .sum();
    let corner = a.cube.lower_corner();
    let side = a.cube.side();
    let dist = (0..dim)
        .map(|axis| {
            let (lo, hi) = (corner[axis], corner[axis] + side);
            if lo > 0.0 {
                lo
            } else if hi < 0.0 {
                -hi
            } else {
                0.0
            }
        })
        .map(|d| d * d)
        .sum::<f64>()
        .sqrt();
    let bound = side.powi(dim as i32 + a.degree + 1) * (1.0 + dist).powi(-(decay as i32));
    RatioReport {
        lhs: pairing,
        rhs: bound,
        ratio: pairing.abs() / bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> DyadicCube {
        DyadicCube::new(1, 0, &[0]).unwrap()
    }

    fn haar() -> Atom {
        let data = StepFunction::new(1, 1, [([0], 1.0), ([1], -1.0)]).unwrap();
        Atom::new(unit(), data, 0).unwrap()
    }

    #[test]
    fn indicator_atoms_saturate_the_bound() {
        for (s, t) in [(4.0, 3.0), (2.0, 1.0), (3.0, 3.0)] {
            let q = DyadicCube::new(1, -2, &[1]).unwrap();
            let a = Atom::new(q, StepFunction::indicator(&q), -1).unwrap();
            let check = validate_atom(&a, s, t, AtomNormKind::WeakMorrey).unwrap();
            assert!(check.valid);
            assert!((check.norm_ratio - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn haar_and_constructed_failures() {
        let check = validate_atom(&haar(), 4.0, 3.0, AtomNormKind::WeakMorrey).unwrap();
        assert!(check.valid);
        assert_eq!(check.moment_residual, 0.0);
        let big = Atom::new(unit(), StepFunction::indicator(&unit()).scale(2.0), -1).unwrap();
        let check = validate_atom(&big, 4.0, 3.0, AtomNormKind::WeakMorrey).unwrap();
        assert!(!check.valid);
        assert!((check.norm_ratio - 2.0).abs() < 1e-13);
        let outside = Atom::new(unit(), StepFunction::new(1, 0, [([1], 0.5)]).unwrap(), -1).unwrap();
        assert!(!validate_atom(&outside, 4.0, 3.0, AtomNormKind::MorreyL1).unwrap().supported);
        let not_cancelling = Atom::new(unit(), StepFunction::indicator(&unit()), 0).unwrap();
        assert!(!validate_atom(&not_cancelling, 4.0, 3.0, AtomNormKind::WeakMorrey).unwrap().valid);
    }

    #[test]
    fn synthesis_of_disjoint_and_single_atoms() {
        let q0 = DyadicCube::new(1, 0, &[0]).unwrap();
        let q1 = DyadicCube::new(1, 1, &[5]).unwrap();
        let fam = AtomFamily::new(
            1.0,
            vec![2.0, 3.0],
            vec![
                Atom::new(q0, StepFunction::indicator(&q0), -1).unwrap(),
                Atom::new(q1, StepFunction::indicator(&q1).scale(-1.0), -1).unwrap(),
            ],
        )
        .unwrap();
        let f = synthesize(&fam);
        assert_eq!(f.level(), 1);
        assert_eq!(f.value(&[0, 0]), 2.0);
        assert_eq!(f.value(&[5, 0]), -3.0);
        assert_eq!(f.len(), 3);

        let mp = MorreyLorentzParams::new(2.0, 1.5, 1.0).unwrap();
        let single = AtomFamily::new(0.5, vec![1.0], vec![fam.atoms[0].clone()]).unwrap();
        let report = check_synthesis(&single, mp, AtomSpace { s: 4.0, t: 3.0 }).unwrap();
        assert!((report.ratio - 1.0).abs() < 1e-12);
        let expected = crate::lorentz::indicator_factor(1.5, 1.0);
        assert!((aggregate_norm(&single, mp) - expected).abs() < 1e-12);
    }

    #[test]
    fn aggregation_is_monotone_in_v() {
        let cubes = [
            DyadicCube::new(1, 0, &[0]).unwrap(),
            DyadicCube::new(1, 1, &[0]).unwrap(),
            DyadicCube::new(1, -1, &[0]).unwrap(),
        ];
        let atoms: Vec<Atom> = cubes
            .iter()
            .map(|q| Atom::new(*q, StepFunction::indicator(q), -1).unwrap())
            .collect();
        let one = AtomFamily::new(1.0, vec![1.0, 0.5, 0.25], atoms).unwrap();
        let half = one.with_v(0.5).unwrap();
        let (g1, gh) = (aggregate_function(&one), aggregate_function(&half));
        for (idx, v) in g1.iter() {
            assert!(gh.value(idx) >= v);
        }
        assert_eq!(g1.value(&[0, 0]), 1.75);
    }

    #[test]
    fn synthesis_constraints_are_named() {
        let mp = MorreyLorentzParams::new(2.0, 1.5, 1.0).unwrap();
        let err = synthesis_constraints(mp, AtomSpace { s: 4.0, t: 1.0 }, 0.5).unwrap_err();
        assert!(err.to_string().contains("q < t"));
        let err = synthesis_constraints(mp, AtomSpace { s: 2.0, t: 2.0 }, 0.5).unwrap_err();
        assert!(err.to_string().contains("p < s"));
        let err = synthesis_constraints(mp, AtomSpace { s: 4.0, t: 3.0 }, 1.0).unwrap_err();
        assert!(err.to_string().contains("v < min(q, r)"));
    }

    #[test]
    fn family_json_round_trip() {
        let fam = AtomFamily::new(0.5, vec![1.5], vec![haar()]).unwrap();
        let text = fam.to_json();
        assert!(text.contains("\"K\":0"));
        assert!(text.contains("\"lambda\":1.5"));
        assert_eq!(AtomFamily::from_json(&text).unwrap(), fam);
        assert!(AtomFamily::from_json(r#"{"v": 2.0, "atoms": []}"#).is_err());
    }

    #[test]
    fn pairing_values() {
        let square = TestFunction::Polynomial(vec![([2, 0], 1.0)]);
        let report = check_atom_pairing(&haar(), &square, 0);
        assert!((report.lhs + 0.25).abs() < 1e-15);
        let linear = TestFunction::Polynomial(vec![([0, 0], 3.0)]);
        assert_eq!(check_atom_pairing(&haar(), &linear, 0).lhs, 0.0);
        let near = check_atom_pairing(&haar(), &TestFunction::Gaussian { center: [0.0, 0.0], width: 1.0 }, 2);
        assert!(near.lhs.abs() > 0.0);
    }
}
