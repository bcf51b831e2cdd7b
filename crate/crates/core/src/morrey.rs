//! Morrey-Lorentz, weak Morrey and classical Morrey quasi-norms.
//!
//! All norms take the supremum over dyadic cubes. For step functions the
//! supremum is attained on the finite family from [`enumerate_cubes`], so the
//! values below are exact. The supremum over all axis-parallel cubes is
//! equivalent up to a dimensional constant that is not computed here.
//!
//! [`enumerate_cubes`]: crate::dyadic::enumerate_cubes

use serde::{Deserialize, Serialize};

use crate::dyadic::{for_each_cube_level, pow2, StepFunction};
use crate::error::{constraint, domain, Result};
use crate::lorentz::{LorentzParams, RearrangementProfile};
use crate::RatioReport;

/// `(p, q, r)` with `0 < q ≤ p < ∞` and `0 < r ≤ ∞`; `r = ∞` is the weak variant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorreyLorentzParams {
    p: f64,
    q: f64,
    r: f64,
}

impl MorreyLorentzParams {
    pub fn new(p: f64, q: f64, r: f64) -> Result<Self> {
        if !(q > 0.0) || !(r > 0.0) || !p.is_finite() {
            return Err(domain(format!(
                "Morrey-Lorentz exponents need 0 < q, 0 < r and finite p, got ({p}, {q}, {r})"
            )));
        }
        if q > p {
            return Err(constraint(format!("q ≤ p (got q = {q}, p = {p})")));
        }
        Ok(Self { p, q, r })
    }

    /// Weak Morrey `WM^p_q`.
    pub fn weak(p: f64, q: f64) -> Result<Self> {
        Self::new(p, q, f64::INFINITY)
    }

    /// Classical Morrey `M^p_q = M^p_{q,q}`.
    pub fn classical(p: f64, q: f64) -> Result<Self> {
        Self::new(p, q, q)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn is_weak(&self) -> bool {
        self.r.is_infinite()
    }

    pub(crate) fn inner(&self) -> LorentzParams {
        LorentzParams::new(self.q, self.r).expect("validated at construction")
    }
}

/// `sup_Q |Q|^{1/p − 1/q} ‖f χ_Q‖_{L^{q,r}}` over dyadic cubes.
pub fn morrey_lorentz_norm(f: &StepFunction, params: MorreyLorentzParams) -> f64 {
    let inner = params.inner();
    let h = f.cell_measure();
    let dim = f.dim() as i32;
    let exponent = 1.0 / params.p - 1.0 / params.q;
    let mut best: f64 = 0.0;
    for_each_cube_level(f, |level, groups| {
        let scale = pow2(-level * dim).powf(exponent);
        for vals in groups.values() {
            let abs = vals.iter().map(|v| v.abs()).collect();
            let norm = RearrangementProfile::from_abs_values(abs, h).norm(inner);
            best = best.max(scale * norm);
        }
    });
    best
}

/// `‖f‖_{WM^p_q}`, the `r = ∞` case.
pub fn weak_morrey_norm(f: &StepFunction, p: f64, q: f64) -> Result<f64> {
    Ok(morrey_lorentz_norm(f, MorreyLorentzParams::weak(p, q)?))
}

/// `sup_λ λ ‖χ_{|f|>λ}‖_{M^p_q}` over the finite set of value thresholds.
///
/// As in the Lorentz case, the supremum over `λ ∈ [v_{i+1}, v_i)` is the left
/// limit at `v_i`, where the level set is `{|f| ≥ v_i}`.
pub fn weak_morrey_by_thresholds(f: &StepFunction, p: f64, q: f64) -> Result<f64> {
    let classical = MorreyLorentzParams::classical(p, q)?;
    let mut thresholds: Vec<f64> = f.values().map(f64::abs).collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    let mut best: f64 = 0.0;
    for v in thresholds {
        let level = f.map(|x| if x.abs() >= v { 1.0 } else { 0.0 });
        best = best.max(v * morrey_lorentz_norm(&level, classical));
    }
    Ok(best)
}

/// Which embedding between Morrey-Lorentz spaces a parameter pair instantiates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmbeddingCase {
    /// Same `p, q`; `r_1 ≤ r_2`.
    SecondIndex,
    /// Same `p`; `q_2 < q_1`.
    FirstIndex,
}

pub fn embedding_case(
    from: MorreyLorentzParams,
    to: MorreyLorentzParams,
) -> Result<EmbeddingCase> {
    if from.p != to.p {
        return Err(constraint("embedding requires the same p on both sides"));
    }
    if from.q == to.q && from.r <= to.r {
        Ok(EmbeddingCase::SecondIndex)
    } else if to.q < from.q {
        Ok(EmbeddingCase::FirstIndex)
    } else {
        Err(constraint(
            "embedding needs either equal q with r_1 ≤ r_2, or q_2 < q_1",
        ))
    }
}

/// `‖f‖_to / ‖f‖_from` for an embedding `M^p_{q_1,r_1} ↪ M^p_{q_2,r_2}`.
pub fn check_embedding(
    f: &StepFunction,
    from: MorreyLorentzParams,
    to: MorreyLorentzParams,
) -> Result<RatioReport> {
    embedding_case(from, to)?;
    Ok(RatioReport::new(
        morrey_lorentz_norm(f, to),
        morrey_lorentz_norm(f, from),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FatouReport {
    pub limit_norm: f64,
    /// Minimum over the supplied tail.
    pub liminf: f64,
    pub holds: bool,
}

/// Shortest tail accepted as a stand-in for `liminf`.
pub const FATOU_MIN_TAIL: usize = 5;

/// `‖lim f_j‖ ≤ liminf ‖f_j‖`, with the liminf taken as the minimum over the tail.
pub fn check_fatou(
    sequence: &[StepFunction],
    limit: &StepFunction,
    params: MorreyLorentzParams,
) -> Result<FatouReport> {
    if sequence.is_empty() {
        return Err(domain("Fatou check needs a nonempty sequence"));
    }
    if sequence.len() < FATOU_MIN_TAIL {
        return Err(domain(format!(
            "Fatou check needs a tail of at least {FATOU_MIN_TAIL} terms, got {}",
            sequence.len()
        )));
    }
    let limit_norm = morrey_lorentz_norm(limit, params);
    let liminf = sequence
        .iter()
        .map(|f| morrey_lorentz_norm(f, params))
        .fold(f64::INFINITY, f64::min);
    Ok(FatouReport {
        limit_norm,
        liminf,
        holds: limit_norm <= liminf + 1e-12 * liminf.max(1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::{enumerate_cubes, DyadicCube};
    use crate::lorentz::{indicator_factor, lorentz_norm};

    fn mp(p: f64, q: f64, r: f64) -> MorreyLorentzParams {
        MorreyLorentzParams::new(p, q, r).unwrap()
    }

    /// Direct evaluation: restrict to each cube of the family and take the Lorentz norm.
    fn brute_force(f: &StepFunction, params: MorreyLorentzParams) -> f64 {
        enumerate_cubes(f)
            .iter()
            .map(|c| {
                c.volume().powf(1.0 / params.p - 1.0 / params.q)
                    * lorentz_norm(&f.restrict(c), params.inner())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn indicator_of_length_two() {
        let q2 = DyadicCube::new(1, -1, &[0]).unwrap();
        let chi = StepFunction::indicator(&q2);
        let v = morrey_lorentz_norm(&chi, mp(4.0, 2.0, 2.0));
        assert!((v - 2f64.powf(0.25)).abs() < 1e-15);
        let v = morrey_lorentz_norm(&chi, mp(4.0, 2.0, 1.0));
        assert!((v - indicator_factor(2.0, 1.0) * 2f64.powf(0.25)).abs() < 1e-14);
    }

    #[test]
    fn lorentz_specialization() {
        let chi = StepFunction::new(1, 0, [([0], 1.0)]).unwrap();
        assert!((morrey_lorentz_norm(&chi, mp(2.0, 2.0, 2.0)) - 1.0).abs() < 1e-15);
        let f = StepFunction::new(1, 2, [([0], 1.0), ([3], -2.5), ([9], 0.5)]).unwrap();
        let a = morrey_lorentz_norm(&f, mp(1.5, 1.5, 3.0));
        let b = lorentz_norm(&f, LorentzParams::new(1.5, 3.0).unwrap());
        assert!((a - b).abs() < 1e-14 * b);
    }

    #[test]
    fn two_step_matches_brute_force_and_finer_family() {
        let f = StepFunction::new(1, 0, [([0], 2.0), ([1], 1.0)]).unwrap();
        let params = mp(2.0, 1.0, 1.0);
        let v = morrey_lorentz_norm(&f, params);
        assert_eq!(enumerate_cubes(&f).len(), 4);
        assert!((v - brute_force(&f, params)).abs() < 1e-15);
        // cells [0,1) → 2, [1,2) → 1, [0,2) → 3/√2, [0,4) → 3/2
        assert!((v - 3.0 / 2f64.sqrt()).abs() < 1e-15);
        let fine = f.refine(1).unwrap();
        assert!((morrey_lorentz_norm(&fine, params) - v).abs() < 1e-15);
        assert!((brute_force(&fine, params) - v).abs() < 1e-15);
    }

    #[test]
    fn weak_morrey_two_formulas() {
        let f = StepFunction::new(1, 0, [([0], 2.0), ([1], 1.0)]).unwrap();
        let a = weak_morrey_norm(&f, 2.0, 1.0).unwrap();
        let b = weak_morrey_by_thresholds(&f, 2.0, 1.0).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
        let q = DyadicCube::new(2, -1, &[1, 0]).unwrap();
        let chi = StepFunction::indicator(&q);
        let v = weak_morrey_norm(&chi, 3.0, 2.0).unwrap();
        assert!((v - q.volume().powf(1.0 / 3.0)).abs() < 1e-15);
        assert!(weak_morrey_norm(&f, 1.0, 2.0).is_err());
    }

    #[test]
    fn embedding_cases() {
        let q = DyadicCube::new(1, 0, &[3]).unwrap();
        let chi = StepFunction::indicator(&q);
        let a = mp(2.0, 1.0, 1.0);
        let r = check_embedding(&chi, a, a).unwrap();
        assert_eq!(r.ratio, 1.0);
        let b = mp(2.0, 1.0, 3.0);
        let r = check_embedding(&chi, a, b).unwrap();
        let expected = indicator_factor(1.0, 3.0) / indicator_factor(1.0, 1.0);
        assert!((r.ratio - expected).abs() < 1e-15);
        assert!(check_embedding(&chi, b, a).is_err());
        assert!(check_embedding(&chi, mp(2.0, 1.5, 1.0), mp(2.0, 1.0, 7.0)).is_ok());
        assert!(check_embedding(&chi, mp(2.0, 1.0, 1.0), mp(3.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn fatou_sequences() {
        let f = StepFunction::new(1, 1, [([0], 2.0), ([1], 1.0), ([5], -0.5)]).unwrap();
        let params = mp(2.0, 1.5, 1.0);
        // far enough out that the gap to the limit is below the comparison slack
        let tail: Vec<_> = (13..19).map(|e| f.scale(1.0 - 10f64.powi(-e))).collect();
        let rep = check_fatou(&tail, &f, params).unwrap();
        assert!(rep.holds, "{rep:?}");
        let early: Vec<_> = (1..=8).map(|j| f.scale(1.0 - 1.0 / (10 * j) as f64)).collect();
        assert!(!check_fatou(&early, &f, params).unwrap().holds);
        let constant = vec![f.clone(); 5];
        let rep = check_fatou(&constant, &f, params).unwrap();
        assert_eq!(rep.limit_norm, rep.liminf);
        assert!(check_fatou(&[], &f, params).is_err());
        assert!(check_fatou(&constant[..3], &f, params).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(MorreyLorentzParams::new(1.0, 2.0, 1.0).is_err());
        assert!(MorreyLorentzParams::new(f64::INFINITY, 2.0, 1.0).is_err());
        assert!(MorreyLorentzParams::new(2.0, 2.0, f64::INFINITY).is_ok());
    }
}
