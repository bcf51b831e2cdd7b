//! Maximal operators, the fractional integral, the heat extension, and the
//! vector-valued maximal inequality.

mod fractional;
mod heat;
mod maximal;

pub use fractional::{
    check_atom_decay, check_frac_lower_bound, frac_integral, frac_integral_at, frac_integral_on,
    FracIntegralParams, LowerBoundReport,
};
pub use heat::{heat_at, heat_extension, heat_extension_on, heat_maximal, heat_maximal_norm, HeatParams};
pub use maximal::{dyadic_maximal, maximal, maximal_on, MaximalParams};

pub(crate) use maximal::Pyramid;

use crate::dyadic::{DyadicCube, StepFunction, Window};
use crate::error::{domain, Result};
use crate::morrey::{morrey_lorentz_norm, MorreyLorentzParams};
use crate::RatioReport;

/// `(Σ_j |f_j|^u)^{1/u}` cellwise, or `sup_j |f_j|` for `u = ∞`.
fn ell_u(values: &[Vec<f64>], u: f64) -> Vec<f64> {
    let len = values.first().map_or(0, Vec::len);
    (0..len)
        .map(|i| {
            if u.is_infinite() {
                values.iter().fold(0.0f64, |m, v| m.max(v[i].abs()))
            } else {
                values.iter().map(|v| v[i].abs().powf(u)).sum::<f64>().powf(1.0 / u)
            }
        })
        .collect()
}

/// `‖(Σ (M f_j)^u)^{1/u}‖ / ‖(Σ |f_j|^u)^{1/u}‖` in `M^p_{q,r}`, with `u = ∞`
/// meaning the supremum over `j`.
///
/// Every `M f_j` is evaluated on one window covering the tops of all members,
/// so the left side is a lower approximation truncated to that window.
pub fn check_fefferman_stein(
    family: &[StepFunction],
    u: f64,
    mp: MorreyLorentzParams,
    eval_level: i32,
) -> Result<RatioReport> {
    if !(mp.q() > 1.0) {
        return Err(domain(format!("vector-valued maximal bound needs q > 1, got {}", mp.q())));
    }
    if u.is_infinite() {
        if u < 0.0 {
            return Err(domain("u must be positive"));
        }
    } else if !(u > 1.0) {
        return Err(domain(format!("vector-valued maximal bound needs 1 < u ≤ ∞, got {u}")));
    } else if !(mp.r() > 1.0) {
        return Err(domain(format!("for finite u the bound needs r > 1, got {}", mp.r())));
    }
    let Some(first) = family.first() else {
        return Err(domain("family must be nonempty"));
    };
    if family.iter().any(|f| f.dim() != first.dim()) {
        return Err(domain("family members must share a dimension"));
    }
    let tops: Vec<DyadicCube> = family.iter().flat_map(StepFunction::tops).collect();
    if tops.is_empty() {
        return Ok(RatioReport::new(0.0, 0.0));
    }
    let window = Window::covering(&tops, eval_level)?;
    let mut maxed = Vec::with_capacity(family.len());
    let mut plain = Vec::with_capacity(family.len());
    for f in family {
        if f.is_zero() {
            continue;
        }
        maxed.push(window.sample(&maximal_on(f, MaximalParams::hardy_littlewood(), &window)?));
        plain.push(window.sample(&f.refine(eval_level)?));
    }
    let lhs = morrey_lorentz_norm(&window.to_step_function(&ell_u(&maxed, u)), mp);
    let rhs = morrey_lorentz_norm(&window.to_step_function(&ell_u(&plain, u)), mp);
    Ok(RatioReport::new(lhs, rhs))
}
