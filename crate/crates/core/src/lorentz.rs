//! Distribution function, decreasing rearrangement and Lorentz quasi-norms.
//!
//! For a step function the rearrangement is itself a step function on
//! `(0, ∞)`, so the defining integral can be evaluated in closed form piece by
//! piece.

use serde::{Deserialize, Serialize};

use crate::dyadic::StepFunction;
use crate::error::{domain, Error, Result};
use crate::RatioReport;

/// Exponent pair `(p, q)`; `f64::INFINITY` marks an infinite exponent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorentzParams {
    p: f64,
    q: f64,
}

impl LorentzParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p > 0.0) || !(q > 0.0) {
            return Err(domain(format!("Lorentz exponents must be positive, got ({p}, {q})")));
        }
        if p.is_infinite() && q.is_finite() {
            return Err(domain("p = ∞ requires q = ∞"));
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

/// `‖χ_E‖_{L^{q,r}} / |E|^{1/q} = (q/r)^{1/r}`, with the value 1 at `r = ∞`.
pub fn indicator_factor(q: f64, r: f64) -> f64 {
    if r.is_infinite() {
        1.0
    } else {
        (q / r).powf(1.0 / r)
    }
}

/// `hi^a − lo^a` for `0 ≤ lo < hi`, without cancellation when `hi/lo` is near 1.
pub(crate) fn pow_increment(lo: f64, hi: f64, a: f64) -> f64 {
    if lo == 0.0 {
        hi.powf(a)
    } else {
        lo.powf(a) * (a * ((hi - lo) / lo).ln_1p()).exp_m1()
    }
}

/// The decreasing rearrangement of a step function: `f*(t) = values[i]` on
/// `[cumulative[i], cumulative[i + 1])` and zero past the last breakpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct RearrangementProfile {
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

impl RearrangementProfile {
    /// Builds the profile from absolute values of cells of equal measure.
    /// Zeros are ignored and ties are merged into one step.
    pub(crate) fn from_abs_values(mut abs: Vec<f64>, cell_measure: f64) -> Self {
        abs.retain(|v| *v > 0.0);
        abs.sort_unstable_by(|a, b| b.total_cmp(a));
        let mut values = Vec::new();
        let mut cumulative = vec![0.0];
        let mut count = 0usize;
        let mut i = 0;
        while i < abs.len() {
            let v = abs[i];
            while i < abs.len() && abs[i] == v {
                count += 1;
                i += 1;
            }
            values.push(v);
            cumulative.push(count as f64 * cell_measure);
        }
        Self { values, cumulative }
    }

    /// Builds the profile from distinct positive values in decreasing order and
    /// how many cells of measure `cell_measure` take each.
    pub(crate) fn from_counts(levels: impl Iterator<Item = (f64, usize)>, cell_measure: f64) -> Self {
        let mut values = Vec::new();
        let mut cumulative = vec![0.0];
        let mut count = 0usize;
        for (v, c) in levels {
            if c > 0 {
                count += c;
                values.push(v);
                cumulative.push(count as f64 * cell_measure);
            }
        }
        Self { values, cumulative }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Breakpoints `0 = T_0 < T_1 < … < T_K`.
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `f*(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        // first breakpoint strictly greater than t
        let pos = self.cumulative.partition_point(|&c| c <= t);
        if pos == 0 || pos > self.values.len() {
            0.0
        } else {
            self.values[pos - 1]
        }
    }

    /// `λ_{f*}(α)`.
    pub fn distribution(&self, alpha: f64) -> f64 {
        let above = self.values.partition_point(|&v| v > alpha);
        self.cumulative[above]
    }

    pub fn norm(&self, params: LorentzParams) -> f64 {
        let (p, q) = (params.p, params.q);
        if self.is_empty() {
            return 0.0;
        }
        if q.is_infinite() {
            if p.is_infinite() {
                return self.values[0];
            }
            return self
                .values
                .iter()
                .zip(&self.cumulative[1..])
                .map(|(v, t)| v * t.powf(1.0 / p))
                .fold(0.0, f64::max);
        }
        let a = q / p;
        let sum: f64 = self
            .values
            .iter()
            .zip(self.cumulative.windows(2))
            .map(|(v, w)| v.powf(q) * pow_increment(w[0], w[1], a))
            .sum();
        (sum / a).powf(1.0 / q)
    }
}

/// `λ_f(α) = |{|f| > α}|`.
pub fn distribution(f: &StepFunction, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(domain(format!("distribution threshold must be positive, got {alpha}")));
    }
    let count = f.values().filter(|v| v.abs() > alpha).count();
    Ok(count as f64 * f.cell_measure())
}

pub fn rearrangement(f: &StepFunction) -> RearrangementProfile {
    RearrangementProfile::from_abs_values(f.values().map(f64::abs).collect(), f.cell_measure())
}

/// `‖f‖_{L^{p,q}}`; zero for the zero function.
pub fn lorentz_norm(f: &StepFunction, params: LorentzParams) -> f64 {
    rearrangement(f).norm(params)
}

/// `‖f‖_{L^{p,∞}} = sup_t t^{1/p} f*(t)`.
pub fn weak_norm(f: &StepFunction, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(domain(format!("weak-norm exponent must be positive, got {p}")));
    }
    Ok(lorentz_norm(f, LorentzParams::new(p, f64::INFINITY)?))
}

/// `sup_{λ>0} λ·λ_f(λ)^{1/p}` over the finite set of value thresholds.
///
/// On `[v_{i+1}, v_i)` the level-set measure is constant, so the supremum over
/// that interval is approached from below `v_i` and equals `v_i·|{|f| ≥ v_i}|^{1/p}`.
pub fn weak_norm_by_thresholds(f: &StepFunction, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(domain(format!("weak-norm exponent must be positive, got {p}")));
    }
    let h = f.cell_measure();
    let mut best: f64 = 0.0;
    for v in f.values().map(f64::abs) {
        let count = f.values().filter(|w| w.abs() >= v).count();
        let level_measure = count as f64 * h;
        best = best.max(if p.is_infinite() {
            v
        } else {
            v * level_measure.powf(1.0 / p)
        });
    }
    Ok(best)
}

/// Exponent split for the Hölder check: `1/p = 1/p1 + 1/p2`, `1/q = 1/q1 + 1/q2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolderSplit {
    pub p1: f64,
    pub q1: f64,
    pub p2: f64,
    pub q2: f64,
}

impl HolderSplit {
    pub fn target(&self) -> Result<LorentzParams> {
        let p = 1.0 / (1.0 / self.p1 + 1.0 / self.p2);
        let q = 1.0 / (1.0 / self.q1 + 1.0 / self.q2);
        LorentzParams::new(p, q)
    }
}

/// `‖fg‖_{L^{p,q}}` against `‖f‖_{L^{p1,q1}}·‖g‖_{L^{p2,q2}}`.
pub fn check_holder(
    f: &StepFunction,
    g: &StepFunction,
    target: LorentzParams,
    split: HolderSplit,
) -> Result<RatioReport> {
    let recip = |x: f64| 1.0 / x;
    let mismatch_p = (recip(target.p) - recip(split.p1) - recip(split.p2)).abs();
    let mismatch_q = (recip(target.q) - recip(split.q1) - recip(split.q2)).abs();
    if mismatch_p > 1e-12 || mismatch_q > 1e-12 {
        return Err(Error::Constraint(
            "Hölder exponents must satisfy 1/p = 1/p1 + 1/p2 and 1/q = 1/q1 + 1/q2".into(),
        ));
    }
    let product = f.mul(g)?;
    let lhs = lorentz_norm(&product, target);
    let rhs = lorentz_norm(f, LorentzParams::new(split.p1, split.q1)?)
        * lorentz_norm(g, LorentzParams::new(split.p2, split.q2)?);
    Ok(RatioReport::new(lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_step() -> StepFunction {
        StepFunction::new(1, 0, [([0], 2.0), ([1], 1.0)]).unwrap()
    }

    fn lp(p: f64, q: f64) -> LorentzParams {
        LorentzParams::new(p, q).unwrap()
    }

    #[test]
    fn distribution_counts_cells() {
        let f = two_step();
        assert_eq!(distribution(&f, 1.5).unwrap(), 1.0);
        assert_eq!(distribution(&f, 0.5).unwrap(), 2.0);
        assert_eq!(distribution(&f, 3.0).unwrap(), 0.0);
        assert!(distribution(&f, 0.0).is_err());
    }

    #[test]
    fn rearrangement_sorts_and_merges() {
        let f = StepFunction::new(1, 0, [([0], 1.0), ([1], 3.0)]).unwrap();
        let r = rearrangement(&f);
        assert_eq!(r.values(), &[3.0, 1.0]);
        assert_eq!(r.cumulative(), &[0.0, 1.0, 2.0]);
        let tied = StepFunction::new(1, 0, [([0], 1.0), ([1], -1.0), ([5], 2.0)]).unwrap();
        let r = rearrangement(&tied);
        assert_eq!(r.values(), &[2.0, 1.0]);
        assert_eq!(r.cumulative(), &[0.0, 1.0, 3.0]);
        assert_eq!(r.eval(0.5), 2.0);
        assert_eq!(r.eval(1.0), 1.0);
        assert_eq!(r.eval(3.0), 0.0);
        assert_eq!(rearrangement(&f.refine(3).unwrap()), rearrangement(&f));
    }

    #[test]
    fn closed_form_values() {
        let chi = StepFunction::new(1, 0, [([0], 1.0)]).unwrap();
        assert!((lorentz_norm(&chi, lp(2.0, 1.0)) - 2.0).abs() < 1e-15);
        let f = two_step();
        assert!((lorentz_norm(&f, lp(2.0, 2.0)) - 5f64.sqrt()).abs() < 1e-14);
        let expected = 2.0 + 2.0 * 2f64.sqrt();
        assert!((lorentz_norm(&f, lp(2.0, 1.0)) - expected).abs() < 1e-14);
        assert_eq!(lorentz_norm(&f, lp(f64::INFINITY, f64::INFINITY)), 2.0);
        assert_eq!(lorentz_norm(&StepFunction::zero(1, 0), lp(2.0, 1.0)), 0.0);
    }

    #[test]
    fn weak_norm_two_formulas() {
        let f = two_step();
        assert_eq!(weak_norm(&f, 2.0).unwrap(), 2.0);
        assert_eq!(weak_norm_by_thresholds(&f, 2.0).unwrap(), 2.0);
        let chi = StepFunction::new(2, 1, [([0, 0], 1.0), ([0, 1], 1.0), ([1, 1], 1.0)]).unwrap();
        for p in [0.5, 1.0, 3.0] {
            let e = 0.75f64.powf(1.0 / p);
            assert!((weak_norm(&chi, p).unwrap() - e).abs() < 1e-15);
        }
        assert!(weak_norm(&f, -1.0).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(LorentzParams::new(f64::INFINITY, 2.0).is_err());
        assert!(LorentzParams::new(0.0, 2.0).is_err());
        assert!(LorentzParams::new(2.0, f64::INFINITY).is_ok());
    }

    #[test]
    fn holder_cases() {
        let chi = StepFunction::new(1, 0, [([0], 1.0)]).unwrap();
        let split = HolderSplit { p1: 2.0, q1: 2.0, p2: 2.0, q2: 2.0 };
        let r = check_holder(&chi, &chi, lp(1.0, 1.0), split).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-15);
        // (1, 1/2) from (2, 1) twice: ‖χ‖_{L^{1,1/2}} = 2^2 and ‖χ‖_{L^{2,1}} = 2
        let split = HolderSplit { p1: 2.0, q1: 1.0, p2: 2.0, q2: 1.0 };
        let r = check_holder(&chi, &chi, lp(1.0, 0.5), split).unwrap();
        assert!((r.lhs - 4.0).abs() < 1e-14 && (r.rhs - 4.0).abs() < 1e-14);
        let other = StepFunction::new(1, 0, [([3], 1.0)]).unwrap();
        let r = check_holder(&chi, &other, lp(1.0, 0.5), split).unwrap();
        assert_eq!(r.ratio, 0.0);
        assert!(check_holder(&chi, &chi, lp(1.0, 1.0), split).is_err());
    }

    #[test]
    fn pow_increment_near_one() {
        let lo = 1.0;
        let hi = 1.0 + 1e-9;
        let eps = hi - lo;
        let exact = 0.25 * eps - 3.0 / 32.0 * eps * eps;
        assert!((pow_increment(lo, hi, 0.25) - exact).abs() < 1e-23);
    }
}
