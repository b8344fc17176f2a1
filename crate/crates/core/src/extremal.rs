//! Weights in the class that attain the Bellman value at a given point.

use serde::{Deserialize, Serialize};

use crate::bellman::eval;
use crate::error::{ApqError, Result};
use crate::geometry::{
    curve_membership, gamma1_point, gamma_q_point, log_ratio, tangent_line, Region, Side,
};
use crate::implicit_v::{solve_chord_above, solve_v_iii, solve_v_iv};
use crate::params::{solve_gammas, DerivedConstants, Params};
use crate::weights::{Piece, Weight};

/// Relative tolerance on reproduced moments.
pub const MOMENT_TOL: f64 = 1e-8;
/// Absolute tolerance between the attained level-set measure and the value.
pub const ATTAIN_TOL: f64 = 1e-7;

/// How an extremal weight was put together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "construction", rename_all = "snake_case")]
pub enum Plan {
    /// The point sits on the lower boundary.
    Constant { value: f64 },
    /// Two values at least 1 on a chord of the lower boundary.
    TwoStep { u: f64, v: f64, mu: f64 },
    /// Values `v_minus`, 1, `v_plus` obtained from a segment between the two
    /// tangents through `(1,1)`.
    ThreeStep { lambda: f64, mu_minus: f64, mu_plus: f64 },
    /// Value 1 then value `v` along the chord through `(1,1)`.
    Chord { v: f64, mu: f64 },
    /// Plateau, step, and power tail, dilated by `lambda` and completed by `v`.
    PowerTail { v: f64, lambda: f64, a: f64, rho: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extremal {
    pub region: Region,
    pub plan: Plan,
    pub weight: Weight,
}

fn max_log_ratio_on_segment(a: (f64, f64), b: (f64, f64), params: &Params) -> f64 {
    (0..=64)
        .map(|k| {
            let t = k as f64 / 64.0;
            let p = ((1.0 - t) * a.0 + t * b.0, (1.0 - t) * a.1 + t * b.1);
            if p.0 > 0.0 && p.1 > 0.0 {
                log_ratio(p.0, p.1, params)
            } else {
                f64::INFINITY
            }
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn segment_in_domain(a: (f64, f64), b: (f64, f64), params: &Params) -> bool {
    max_log_ratio_on_segment(a, b, params) <= params.q.ln() + 1e-12
}

fn two_values(u: f64, v: f64, mu: f64) -> Result<Weight> {
    Weight::from_pieces_lossy(vec![
        Piece::Const { value: u, lo: 0.0, hi: mu },
        Piece::Const { value: v, lo: mu, hi: 1.0 },
    ])
}

fn at_least_one(u: f64) -> f64 {
    if u < 1.0 && u > 1.0 - 1e-12 {
        1.0
    } else {
        u
    }
}

fn build_region_i(x1: f64, x2: f64, params: &Params, c: &DerivedConstants) -> Result<(Plan, Weight)> {
    let Params { p1, p2, .. } = *params;
    if let Ok(v) = solve_chord_above(x1, x2, params, c.v_plus) {
        let end = gamma1_point(v, params);
        if v >= 1.0 && segment_in_domain((1.0, 1.0), end, params) {
            let mu = (x1 - end.0) / (1.0 - end.0);
            return Ok((Plan::TwoStep { u: 1.0, v, mu }, two_values(1.0, v, mu)?));
        }
    }
    // Tangent at x to the level curve of the class ratio through x.
    let r = log_ratio(x1, x2, params).exp();
    let (gm, gp) = solve_gammas(p1, p2, r)?;
    let m = x1.powf(1.0 / p1);
    let u = at_least_one(m / gp);
    let v = m / gm;
    if u < 1.0 {
        return Err(ApqError::NoConvergence(format!(
            "no chord with both ends at least 1 through ({x1}, {x2})"
        )));
    }
    let (u1, v1) = (u.powf(p1), v.powf(p1));
    let mu = (x1 - v1) / (u1 - v1);
    Ok((Plan::TwoStep { u, v, mu }, two_values(u, v, mu)?))
}

/// Offset along direction `d` from `x` to the line `x2 = slope*x1 + intercept`.
fn hit(x: (f64, f64), d: (f64, f64), slope: f64, intercept: f64) -> f64 {
    (slope * x.0 + intercept - x.1) / (d.1 - slope * d.0)
}

fn build_region_ii(x1: f64, x2: f64, params: &Params, c: &DerivedConstants) -> Result<(Plan, Weight)> {
    let Params { p1, p2, .. } = *params;
    let lm = tangent_line(1.0, Side::Minus, params, c);
    let lp = tangent_line(1.0, Side::Plus, params, c);
    let (vm, vp) = (c.v_minus, c.v_plus);
    let chord = (vp.powf(p1) - vm.powf(p1), vp.powf(p2) - vm.powf(p2));
    let level = (x1, (p2 / p1) * x2);
    let s1 = params.s1();
    let on_minus = |p: (f64, f64)| {
        s1 * (p.0 - 1.0) <= 1e-12 && s1 * (p.0 - c.gamma_minus.powf(p1)) >= -1e-12 * p.0.abs().max(1.0)
    };
    let on_plus = |p: (f64, f64)| {
        s1 * (p.0 - 1.0) >= -1e-12 && s1 * (p.0 - c.gamma_plus.powf(p1)) <= 1e-12 * p.0.abs().max(1.0)
    };
    for d in [chord, level] {
        let sm = hit((x1, x2), d, lm.slope, lm.intercept);
        let sp = hit((x1, x2), d, lp.slope, lp.intercept);
        if !(sm.is_finite() && sp.is_finite()) || sm * sp > 0.0 {
            continue;
        }
        let xm = (x1 + sm * d.0, x2 + sm * d.1);
        let xp = (x1 + sp * d.0, x2 + sp * d.1);
        if !(on_minus(xm) && on_plus(xp) && segment_in_domain(xm, xp, params)) {
            continue;
        }
        let lambda = if sm == sp { 0.0 } else { sm / (sm - sp) };
        let mu_m = (xm.0 - vm.powf(p1)) / (1.0 - vm.powf(p1));
        let mu_p = (xp.0 - vp.powf(p1)) / (1.0 - vp.powf(p1));
        let l1 = (1.0 - lambda) * (1.0 - mu_m);
        let l2 = l1 + lambda * mu_p + (1.0 - lambda) * mu_m;
        let w = Weight::from_pieces_lossy(vec![
            Piece::Const { value: vm, lo: 0.0, hi: l1 },
            Piece::Const { value: 1.0, lo: l1, hi: l2.min(1.0) },
            Piece::Const { value: vp, lo: l2.min(1.0), hi: 1.0 },
        ])?;
        return Ok((Plan::ThreeStep { lambda, mu_minus: mu_m, mu_plus: mu_p }, w));
    }
    Err(ApqError::NoConvergence(format!(
        "no admissible segment between the tangents through ({x1}, {x2})"
    )))
}

fn build_region_iii(x1: f64, x2: f64, params: &Params, c: &DerivedConstants) -> Result<(Plan, Weight)> {
    let v = solve_v_iii(x1, x2, params, c)?;
    let b = v.powf(params.p1);
    let mu = (x1 - b) / (1.0 - b);
    Ok((Plan::Chord { v, mu }, two_values(1.0, v, mu)?))
}

/// Plateau fraction of the upper-boundary extremal.
pub fn plateau_fraction(params: &Params, c: &DerivedConstants) -> f64 {
    let p1 = params.p1;
    (c.gamma_minus.powf(p1) - c.v_minus.powf(p1)) / (1.0 - c.v_minus.powf(p1))
}

/// Upper-boundary extremal `{1, v_minus, v_minus (a/t)^nu}` dilated into
/// `[0, lambda]` and continued by the constant `v`.
pub fn power_tail_weight(v: f64, lambda: f64, params: &Params, c: &DerivedConstants) -> Result<(Plan, Weight)> {
    let a = ((v / c.v_minus).ln() / c.nu).exp().min(1.0);
    let rho = plateau_fraction(params, c);
    let la = lambda * a;
    let w = Weight::from_pieces_lossy(vec![
        Piece::Const { value: 1.0, lo: 0.0, hi: rho * la },
        Piece::Const { value: c.v_minus, lo: rho * la, hi: la },
        Piece::Power { coef: c.v_minus * la.powf(c.nu), exponent: c.nu, lo: la, hi: lambda },
        Piece::Const { value: v, lo: lambda, hi: 1.0 },
    ])?;
    Ok((Plan::PowerTail { v, lambda, a, rho }, w))
}

fn build_region_iv(x1: f64, x2: f64, params: &Params, c: &DerivedConstants) -> Result<(Plan, Weight)> {
    let v = solve_v_iv(x1, x2, params, c)?;
    let base = v.powf(params.p1);
    let top = gamma_q_point(c.gamma_plus * v, params).0;
    let mut lambda = ((x1 - base) / (top - base)).clamp(0.0, 1.0);
    if 1.0 - lambda < 1e-12 {
        lambda = 1.0;
    }
    if lambda == 0.0 {
        return Ok((Plan::Constant { value: v }, Weight::constant(v)?));
    }
    power_tail_weight(v, lambda, params, c)
}

/// Build a weight whose moments are `x` and whose level set `{w >= 1}` has
/// measure `B(x)`. The result is checked before it is returned.
pub fn build(x1: f64, x2: f64, params: &Params, c: &DerivedConstants) -> Result<Extremal> {
    let e = eval(x1, x2, params, c)?;
    let built = match e.region {
        Region::I => build_region_i(x1, x2, params, c),
        Region::II => build_region_ii(x1, x2, params, c),
        Region::III => build_region_iii(x1, x2, params, c),
        Region::IV => build_region_iv(x1, x2, params, c),
        _ => Err(ApqError::OutsideDomain { x1, x2 }),
    };
    let (plan, weight) = match built {
        Ok(b) => b,
        Err(err) => {
            if curve_membership(x1, x2, params, 1e-12)? == Some(Region::Gamma1) {
                let m = x1.powf(1.0 / params.p1);
                (Plan::Constant { value: m }, Weight::constant(m)?)
            } else {
                return Err(err);
            }
        }
    };
    let m = weight.moments(params)?;
    let rel = ((m.x1 - x1) / x1).abs().max(((m.x2 - x2) / x2).abs());
    if rel > MOMENT_TOL {
        return Err(ApqError::NoConvergence(format!(
            "extremal moments off by {rel:e} at ({x1}, {x2})"
        )));
    }
    let gap = (weight.distribution(1.0) - e.value).abs();
    if gap > ATTAIN_TOL {
        return Err(ApqError::NoConvergence(format!(
            "extremal level set off by {gap:e} at ({x1}, {x2})"
        )));
    }
    Ok(Extremal { region: e.region, plan, weight })
}

/// Diagnostics for a built extremal weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Attainment {
    pub moment_rel_err: f64,
    pub apq_norm: f64,
    pub level_gap: f64,
    pub pass: bool,
}

/// Check moments, class membership at `resolution`, and the attained value.
pub fn check_attainment(x1: f64, x2: f64, params: &Params, c: &DerivedConstants, resolution: usize) -> Result<Attainment> {
    let ex = build(x1, x2, params, c)?;
    let m = ex.weight.moments(params)?;
    let moment_rel_err = ((m.x1 - x1) / x1).abs().max(((m.x2 - x2) / x2).abs());
    let apq_norm = ex.weight.apq_norm(params, resolution)?;
    let level_gap = (ex.weight.distribution(1.0) - eval(x1, x2, params, c)?.value).abs();
    let pass = moment_rel_err <= MOMENT_TOL && apq_norm <= params.q * (1.0 + 1e-6) && level_gap <= ATTAIN_TOL;
    Ok(Attainment { moment_rel_err, apq_norm, level_gap, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Model;

    fn a2() -> Model {
        Model::new(1.0, -1.0, 2.0).unwrap()
    }

    fn want_a(v_minus: f64) -> f64 {
        (0.08 / v_minus).powf(2f64.sqrt())
    }

    #[test]
    fn upper_boundary_example() {
        let m = a2();
        let (p, c) = (&m.params, &m.consts);
        let (x1, x2) = gamma_q_point(0.08 * c.gamma_plus, p);
        let ex = build(x1, x2, p, c).unwrap();
        match ex.plan {
            Plan::PowerTail { a, rho, lambda, .. } => {
                assert_eq!(lambda, 1.0);
                let want = (0.08 / c.v_minus).powf(2f64.sqrt());
                assert!((a - want).abs() < 1e-9, "{a} vs {want}");
                assert!((rho - 0.5).abs() < 1e-12);
                assert!((a - 0.339_989_5).abs() < 1e-4);
            }
            ref other => panic!("unexpected plan {other:?}"),
        }
        assert!((ex.weight.distribution(1.0) - 0.5 * want_a(c.v_minus)).abs() < 1e-9);
    }

    #[test]
    fn chord_example() {
        let m = a2();
        let ex = build(0.75, 1.5, &m.params, &m.consts).unwrap();
        assert_eq!(ex.weight, Weight::steps(&[1.0, 0.5], &[0.5]).unwrap());
    }

    #[test]
    fn shared_corner_point() {
        let m = a2();
        let c = &m.consts;
        let ex = build(c.gamma_minus, c.gamma_plus, &m.params, c).unwrap();
        assert!((ex.weight.distribution(1.0) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn attains_in_every_region() {
        for &(p1, p2, q) in &[(1.0, -1.0, 2.0), (2.0, 1.0, 2.0), (-1.0, -2.0, 2.0)] {
            let m = Model::new(p1, p2, q).unwrap();
            let (p, c) = (&m.params, &m.consts);
            let pts = [
                {
                    let (a, b) = gamma1_point(1.5, p);
                    (0.5 * a + 0.5, 0.5 * b + 0.5)
                },
                {
                    let (a, b) = gamma_q_point(1.0, p);
                    (0.5 * a + 0.5, 0.5 * b + 0.5)
                },
                {
                    let (a, b) = gamma1_point(0.5 * (1.0 + c.v_minus), p);
                    (0.5 * a + 0.5, 0.5 * b + 0.5)
                },
                {
                    let (a, b) = gamma1_point(0.5 * c.v_minus, p);
                    let (s, t) = gamma_q_point(0.5 * c.v_minus * c.gamma_plus, p);
                    (0.5 * a + 0.5 * s, 0.5 * b + 0.5 * t)
                },
            ];
            for &(x1, x2) in &pts {
                let r = check_attainment(x1, x2, p, c, 24).unwrap();
                assert!(r.pass, "({p1},{p2}) at ({x1},{x2}): {r:?}");
            }
        }
    }
}
