//! Inequalities for the fractional integral: Olsen's product bound, the
//! Adams bound on Morrey-Lorentz spaces, Hardy-Littlewood-Sobolev, and the
//! Fefferman-Phong form.

use crate::dyadic::{StepFunction, Window};
use crate::error::{constraint, domain, Error, Result};
use crate::lorentz::{lorentz_norm, LorentzParams};
use crate::morrey::{morrey_lorentz_norm, weak_morrey_norm, MorreyLorentzParams};
use crate::operators::{frac_integral_on, FracIntegralParams};
use crate::RatioReport;

const RELATION_TOL: f64 = 1e-12;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= RELATION_TOL * a.abs().max(b.abs()).max(1.0)
}

fn require(checks: &[(bool, &str)], context: impl Fn() -> String) -> Result<()> {
    for (ok, name) in checks {
        if !ok {
            return Err(constraint(format!("{name} fails for {}", context())));
        }
    }
    Ok(())
}

/// Exponents of the Olsen inequality
/// `‖g · I_α f‖_{M^{r₀}_{r₁,r₂}} ≲ ‖g‖_{WM^{q₀}_{q₁}} ‖f‖_{M^{p₀}_{p₁,p₂}}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OlsenParams {
    pub dim: usize,
    pub alpha: f64,
    pub p: [f64; 3],
    pub q: [f64; 2],
    pub r: [f64; 3],
}

impl OlsenParams {
    pub fn new(dim: usize, alpha: f64, p: [f64; 3], q: [f64; 2], r: [f64; 3]) -> Result<Self> {
        let n = dim as f64;
        let [p0, p1, p2] = p;
        let [q0, q1] = q;
        let [r0, r1, r2] = r;
        let case1 = p2.is_finite() && r2.is_finite() && close(r0 / p0, r1 / p1) && close(r1 / p1, r2 / p2);
        let case2 = p2.is_infinite() && r2.is_infinite() && close(r0 / p0, r1 / p1);
        require(
            &[
                ((1..=2).contains(&dim), "1 ≤ n ≤ 2"),
                (alpha > 0.0 && alpha < n, "0 < α < n"),
                (1.0 < p1 && p1 <= p0 && p0.is_finite(), "1 < p₁ ≤ p₀ < ∞"),
                (p2 > 0.0, "0 < p₂ ≤ ∞"),
                (1.0 < q1 && q1 <= q0 && q0.is_finite(), "1 < q₁ ≤ q₀ < ∞"),
                (1.0 < r1 && r1 <= r0 && r0.is_finite(), "1 < r₁ ≤ r₀ < ∞"),
                (r2 > 1.0, "1 < r₂ ≤ ∞"),
                (r1 < q1, "r₁ < q₁"),
                (1.0 / q0 <= alpha / n + RELATION_TOL, "1/q₀ ≤ α/n"),
                (alpha / n < 1.0 / p0, "α/n < 1/p₀"),
                (close(1.0 / r0, 1.0 / q0 + 1.0 / p0 - alpha / n), "1/r₀ = 1/q₀ + 1/p₀ − α/n"),
                (
                    case1 || case2,
                    "case (1) r₀/p₀ = r₁/p₁ = r₂/p₂ with p₂, r₂ < ∞, or case (2) p₂ = r₂ = ∞ with r₀/p₀ = r₁/p₁",
                ),
            ],
            || format!("n = {dim}, α = {alpha}, p = {p:?}, q = {q:?}, r = {r:?}"),
        )?;
        Ok(Self { dim, alpha, p, q, r })
    }

    /// `α = 1/2`, `n = 1`, `(p₀, p₁, p₂) = (3/2, 5/4, 5/4)`, `(q₀, q₁) = (2, 3/2)` and
    /// the `r` exponents they force; `second_case` sets `p₂ = r₂ = ∞`.
    pub fn example(second_case: bool) -> Self {
        let tail = if second_case { f64::INFINITY } else { 1.25 };
        Self::new(1, 0.5, [1.5, 1.25, tail], [2.0, 1.5], [1.5, 1.25, tail]).expect("valid example")
    }

    fn source(&self) -> MorreyLorentzParams {
        MorreyLorentzParams::new(self.p[0], self.p[1], self.p[2]).expect("checked at construction")
    }

    fn target(&self) -> MorreyLorentzParams {
        MorreyLorentzParams::new(self.r[0], self.r[1], self.r[2]).expect("checked at construction")
    }
}

fn check_dims(f: &StepFunction, dim: usize) -> Result<()> {
    if f.dim() == dim {
        Ok(())
    } else {
        Err(domain(format!("function has dim {} but parameters are for n = {dim}", f.dim())))
    }
}

fn finer_than(eval_level: i32, fs: &[&StepFunction]) -> Result<()> {
    for f in fs {
        if eval_level < f.level() {
            return Err(Error::Coarsening {
                level: f.level(),
                target: eval_level,
            });
        }
    }
    Ok(())
}

/// `‖g · I_α f‖ / (‖g‖_{WM^{q₀}_{q₁}} ‖f‖_{M^{p₀}_{p₁,p₂}})`.
///
/// `I_α f` is evaluated at the cell centers of the `eval_level` grid over the
/// domain boxes of `g`, and the product with the exactly refined `g` is taken there.
pub fn check_olsen(f: &StepFunction, g: &StepFunction, params: &OlsenParams, eval_level: i32) -> Result<RatioReport> {
    check_dims(f, params.dim)?;
    check_dims(g, params.dim)?;
    finer_than(eval_level, &[f, g])?;
    if f.is_zero() || g.is_zero() {
        return Ok(RatioReport::new(0.0, 0.0));
    }
    let window = g.window(eval_level, 0)?;
    let frac = FracIntegralParams::new(params.alpha)?;
    let potential = frac_integral_on(f, frac, &window)?;
    let product = g.refine(eval_level)?.mul(&potential)?;
    let lhs = morrey_lorentz_norm(&product, params.target());
    let rhs = weak_morrey_norm(g, params.q[0], params.q[1])? * morrey_lorentz_norm(f, params.source());
    Ok(RatioReport::new(lhs, rhs))
}

/// Exponents of `‖I_α f‖_{M^s_{t,u}} ≲ ‖f‖_{M^p_{q,r}}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamsParams {
    pub dim: usize,
    pub alpha: f64,
    pub source: MorreyLorentzParams,
    pub target: MorreyLorentzParams,
}

impl AdamsParams {
    pub fn new(dim: usize, alpha: f64, pqr: [f64; 3], stu: [f64; 3]) -> Result<Self> {
        let n = dim as f64;
        let [p, q, r] = pqr;
        let [s, t, u] = stu;
        let case1 = r.is_finite() && u.is_finite() && close(s / p, t / q) && close(t / q, u / r);
        let case2 = r.is_infinite() && u.is_infinite() && close(s / p, t / q);
        require(
            &[
                ((1..=2).contains(&dim), "1 ≤ n ≤ 2"),
                (alpha > 0.0 && alpha < n, "0 < α < n"),
                (1.0 < q && q <= p && p.is_finite(), "1 < q ≤ p < ∞"),
                (1.0 < t && t <= s && s.is_finite(), "1 < t ≤ s < ∞"),
                (r > 0.0 && u > 0.0, "0 < r, u ≤ ∞"),
                (close(1.0 / s, 1.0 / p - alpha / n), "1/s = 1/p − α/n"),
                (case1 || case2, "case (1) s/p = t/q = u/r with r, u < ∞, or case (2) r = u = ∞ with s/p = t/q"),
            ],
            || format!("n = {dim}, α = {alpha}, (p, q, r) = {pqr:?}, (s, t, u) = {stu:?}"),
        )?;
        Ok(Self {
            dim,
            alpha,
            source: MorreyLorentzParams::new(p, q, r)?,
            target: MorreyLorentzParams::new(s, t, u)?,
        })
    }

    /// `α = 1/2`, `n = 1`, `(p, q, r) = (3/2, 5/4, 5/4)`, `(s, t, u) = (6, 5, 5)`.
    pub fn example() -> Self {
        Self::new(1, 0.5, [1.5, 1.25, 1.25], [6.0, 5.0, 5.0]).expect("valid example")
    }
}

/// Window for the truncated evaluation of `I_α f`: the grandparents of the domain boxes.
const POTENTIAL_PAD: u32 = 2;

fn potential(f: &StepFunction, alpha: f64, eval_level: i32) -> Result<StepFunction> {
    finer_than(eval_level, &[f])?;
    let window: Window = f.window(eval_level, POTENTIAL_PAD)?;
    frac_integral_on(f, FracIntegralParams::new(alpha)?, &window)
}

/// `‖I_α f‖_{M^s_{t,u}} / ‖f‖_{M^p_{q,r}}`, with `I_α f` truncated to the
/// grandparents of the domain boxes.
pub fn check_adams(f: &StepFunction, params: &AdamsParams, eval_level: i32) -> Result<RatioReport> {
    check_dims(f, params.dim)?;
    if f.is_zero() {
        return Ok(RatioReport::new(0.0, 0.0));
    }
    let lhs = morrey_lorentz_norm(&potential(f, params.alpha, eval_level)?, params.target);
    Ok(RatioReport::new(lhs, morrey_lorentz_norm(f, params.source)))
}

/// `s` with `1/s = 1/p − α/n`, provided `1 < p < s < ∞`.
pub fn hls_exponent(dim: usize, alpha: f64, p: f64) -> Result<f64> {
    let inv = 1.0 / p - alpha / dim as f64;
    require(
        &[
            (alpha > 0.0 && alpha < dim as f64, "0 < α < n"),
            (p > 1.0, "1 < p"),
            (inv > 0.0, "p < n/α"),
        ],
        || format!("n = {dim}, α = {alpha}, p = {p}"),
    )?;
    Ok(1.0 / inv)
}

/// `‖I_α f‖_{L^s} / ‖f‖_{L^p}` with `1/s = 1/p − α/n`.
pub fn check_hls(f: &StepFunction, alpha: f64, p: f64, eval_level: i32) -> Result<RatioReport> {
    let s = hls_exponent(f.dim(), alpha, p)?;
    if f.is_zero() {
        return Ok(RatioReport::new(0.0, 0.0));
    }
    let lhs = lorentz_norm(&potential(f, alpha, eval_level)?, LorentzParams::new(s, s)?);
    Ok(RatioReport::new(lhs, lorentz_norm(f, LorentzParams::new(p, p)?)))
}

/// `∫ |∇u|²` from forward differences between adjacent cells of the support of `u`.
///
/// `u` is taken as a sample of a smooth function on its support, so no jump to
/// zero is counted at the edge of the support.
pub fn dirichlet_energy(u: &StepFunction) -> f64 {
    let h = u.cell_side();
    let sum: f64 = u
        .iter()
        .map(|(idx, v)| {
            (0..u.dim())
                .filter_map(|axis| {
                    let mut next = *idx;
                    next[axis] += 1;
                    let w = u.value(&next);
                    (w != 0.0).then(|| ((w - v) / h).powi(2))
                })
                .sum::<f64>()
        })
        .sum();
    sum * u.cell_measure()
}

/// `∫ |u|² V / (‖V‖_{WM^{n/2}_q} ∫ |∇u|²)`.
///
/// The inequality is a theorem only for `n ≥ 3`; in dimensions one and two
/// this is a measurement, not a check. A zero gradient gives ratio `+∞`.
pub fn check_fefferman_phong(u: &StepFunction, potential: &StepFunction, q: f64) -> Result<RatioReport> {
    if u.dim() != potential.dim() {
        return Err(domain("u and V must share a dimension"));
    }
    if let Some((idx, v)) = potential.iter().find(|(_, v)| *v < 0.0) {
        return Err(domain(format!("V must be nonnegative, found {v} at cell {idx:?}")));
    }
    let half = u.dim() as f64 / 2.0;
    if !(q > 0.0 && q <= half) {
        return Err(domain(format!("weak Morrey exponents need 0 < q ≤ n/2 = {half}, got {q}")));
    }
    let level = u.level().max(potential.level());
    let weighted = u.refine(level)?.map(|x| x * x).mul(&potential.refine(level)?)?;
    let lhs = weighted.integral();
    let rhs = weak_morrey_norm(potential, half, q)? * dirichlet_energy(u);
    Ok(RatioReport::new(lhs, rhs))
}

/// Samples `u` at the cell centers of a window into a step function.
pub fn sample_function(window: &Window, u: impl Fn(&[f64]) -> f64) -> StepFunction {
    let values: Vec<f64> = window.cells().map(|idx| u(&window.center(&idx)[..window.dim()])).collect();
    window.to_step_function(&values)
}
