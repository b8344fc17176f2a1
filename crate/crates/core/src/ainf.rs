//! The limiting class with `p1 = 1, p2 -> 0`, where the second coordinate is
//! the logarithmic mean `<log w>` and the domain is `1 <= x1 e^{-x2} <= Q`.

use serde::{Deserialize, Serialize};

use crate::error::{ApqError, Result};
use crate::geometry::{Region, DOMAIN_SLACK};
use crate::roots::{expand_geometric, solve_bracketed, ROOT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AinfConstants {
    pub q: f64,
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    pub v_minus: f64,
    pub v_plus: f64,
    pub nu: f64,
    pub a2: f64,
    pub b2: f64,
    pub c2: f64,
}

/// Tangency roots of `ln t + 1/t - 1 = ln Q`, the `p2 -> 0` limit of the
/// general tangency equation.
pub fn solve_gammas_ainf(q: f64) -> Result<(f64, f64)> {
    if !(q.is_finite() && q > 1.0) {
        return Err(ApqError::InvalidParams(format!("need Q > 1, got {q}")));
    }
    let lq = q.ln();
    let g = |t: f64| t.ln() + 1.0 / t - 1.0 - lq;
    let (lo, hi) = expand_geometric(g, 1.0, 0.25, true)?;
    let gm = solve_bracketed(g, lo, hi.min(1.0), ROOT_TOL)?;
    let (lo, hi) = expand_geometric(g, 1.0, 4.0, false)?;
    let gp = solve_bracketed(g, lo.max(1.0), hi, ROOT_TOL)?;
    Ok((gm, gp))
}

pub fn ainf_constants(q: f64) -> Result<AinfConstants> {
    let (gm, gp) = solve_gammas_ainf(q)?;
    let vm = gm / gp;
    let d = vm - 1.0;
    Ok(AinfConstants {
        q,
        gamma_minus: gm,
        gamma_plus: gp,
        v_minus: vm,
        v_plus: 1.0 / vm,
        nu: 1.0 - 1.0 / gp,
        a2: -vm / (d * d),
        b2: 1.0 / (vm.ln() * d),
        c2: 1.0 + vm / (d * d),
    })
}

pub fn in_domain_ainf(x1: f64, x2: f64, q: f64) -> Result<bool> {
    if !(x1.is_finite() && x2.is_finite()) {
        return Err(ApqError::OutsideDomain { x1, x2 });
    }
    if x1 <= 0.0 {
        return Ok(false);
    }
    let r = x1.ln() - x2;
    Ok(r >= -DOMAIN_SLACK && r <= q.ln() + DOMAIN_SLACK)
}

pub fn classify_ainf(x1: f64, x2: f64, c: &AinfConstants) -> Result<Region> {
    if !in_domain_ainf(x1, x2, c.q)? {
        return Ok(Region::Outside);
    }
    if x1 == 1.0 && x2 == 0.0 {
        return Ok(Region::II);
    }
    let d_plus = x2 - (x1 - 1.0) / c.gamma_plus;
    let d_minus = x2 - (x1 - 1.0) / c.gamma_minus;
    Ok(if x1 > c.gamma_plus || d_plus > 0.0 {
        Region::I
    } else if d_minus >= 0.0 {
        Region::III
    } else if x1 > c.gamma_minus {
        Region::II
    } else {
        Region::IV
    })
}

/// Chord parameter `v < 1` with `x2 (1 - v) = (1 - x1) ln v`.
fn solve_chord(x1: f64, x2: f64, c: &AinfConstants) -> Result<f64> {
    let k = (x1 - 1.0) / x2;
    let h = |v: f64| if v == 1.0 { 1.0 - k } else { (v - 1.0) / v.ln() - k };
    let mut lo = c.v_minus;
    let mut n = 0;
    while h(lo).signum() == h(1.0).signum() && h(lo) != 0.0 {
        lo /= 4.0;
        n += 1;
        if n > 60 {
            return Err(ApqError::NoConvergence("no chord root below 1".into()));
        }
    }
    solve_bracketed(h, lo, 1.0, ROOT_TOL)
}

/// Tangent parameter with `x2 = ln v + (x1 - v) / (gamma_plus v)`.
fn solve_tangent(x1: f64, x2: f64, c: &AinfConstants) -> Result<f64> {
    let g = |v: f64| v.ln() + (x1 - v) / (c.gamma_plus * v) - x2;
    let (lo, hi) = (x1 / c.gamma_plus, x1);
    let (g_lo, g_hi) = (g(lo), g(hi));
    if g_lo == 0.0 || g_hi == 0.0 || g_lo.signum() != g_hi.signum() {
        solve_bracketed(g, lo, hi, ROOT_TOL)
    } else if g_lo.abs() <= 1e-11 * (1.0 + x2.abs()) {
        Ok(lo)
    } else {
        Err(ApqError::NoConvergence("tangent root not bracketed".into()))
    }
}

/// Bellman function of the limiting class at `(<w>, <log w>)`.
///
/// In region IV the value carries the factor `(v/v_minus)^{1/(gamma_plus-1)}`,
/// which is what the general formula tends to as `p2 -> 0`.
pub fn eval_ainf(x1: f64, x2: f64, q: f64) -> Result<(f64, Region, Option<f64>)> {
    let c = ainf_constants(q)?;
    eval_ainf_with(x1, x2, &c)
}

pub fn eval_ainf_with(x1: f64, x2: f64, c: &AinfConstants) -> Result<(f64, Region, Option<f64>)> {
    let region = classify_ainf(x1, x2, c)?;
    let (value, v) = match region {
        Region::I => (1.0, None),
        Region::II => (c.a2 * x1 + c.b2 * x2 + c.c2, None),
        Region::III => {
            let v = solve_chord(x1, x2, c)?;
            ((x1 - v) / (1.0 - v), Some(v))
        }
        Region::IV => {
            let v = solve_tangent(x1, x2, c)?;
            let gp = c.gamma_plus;
            let k = gp / ((gp - 1.0) * (1.0 - c.v_minus));
            let damp = ((v / c.v_minus).ln() / (gp - 1.0)).exp();
            (k * damp * (x1 - x2 * v - v * (1.0 - v.ln())), Some(v))
        }
        _ => return Err(ApqError::OutsideDomain { x1, x2 }),
    };
    Ok((value.clamp(0.0, 1.0), region, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bellman::eval;
    use crate::params::Model;

    #[test]
    fn chord_example() {
        let (b, r, v) = eval_ainf(0.75, 0.5f64.ln() / 2.0, 2.0).unwrap();
        assert_eq!(r, Region::III);
        assert!((b - 0.5).abs() < 1e-9);
        assert!((v.unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tangency_roots_satisfy_limit_equation() {
        let c = ainf_constants(2.0).unwrap();
        for t in [c.gamma_minus, c.gamma_plus] {
            assert!((t.ln() + 1.0 / t - 1.0 - 2f64.ln()).abs() < 1e-13);
        }
    }

    #[test]
    fn plane_hits_its_three_anchor_points() {
        let c = ainf_constants(3.0).unwrap();
        let p = |x1: f64, x2: f64| c.a2 * x1 + c.b2 * x2 + c.c2;
        assert!((p(1.0, 0.0) - 1.0).abs() < 1e-12);
        assert!(p(c.v_minus, c.v_minus.ln()).abs() < 1e-12);
        assert!((p(c.v_plus, c.v_plus.ln()) - 1.0).abs() < 1e-12);
    }

    /// A weight's `(<w>, <w^p>)` and `(<w>, <log w>)` see nearly the same
    /// value once `p` is close to zero.
    #[test]
    fn matches_general_family_as_p2_tends_to_zero() {
        let q = 2.0;
        let p2 = -1e-5;
        let m = Model::new(1.0, p2, q).unwrap();
        let c = ainf_constants(q).unwrap();
        // Two-point weights: value u on a fraction mu, value s on the rest.
        for &(u, s, mu) in &[(0.02_f64, 0.06_f64, 0.3), (0.1, 0.3, 0.5), (0.5, 1.2, 0.4), (0.3, 0.9, 0.7)] {
            let x1 = mu * u + (1.0 - mu) * s;
            let y2 = mu * u.ln() + (1.0 - mu) * s.ln();
            let x2 = mu * u.powf(p2) + (1.0 - mu) * s.powf(p2);
            let (b_lim, region, _) = eval_ainf_with(x1, y2, &c).unwrap();
            let b_gen = eval(x1, x2, &m.params, &m.consts).unwrap().value;
            assert!((b_lim - b_gen).abs() < 1e-3, "{region:?}: {b_lim} vs {b_gen}");
        }
    }
}
