//! Evaluation of the Bellman function, its gradient, and the closed form for
//! the `(1, -1)` pair.

use serde::{Deserialize, Serialize};

use crate::error::{ApqError, Result};
use crate::geometry::{classify, near_interior_boundary, require_domain, Region};
use crate::implicit_v::{solve_v_iii, solve_v_iv};
use crate::params::{DerivedConstants, Params};

/// Points closer than this (relative) to an interior boundary have no gradient.
pub const GRADIENT_BOUNDARY_TOL: f64 = 1e-9;

/// Value of the Bellman function at a point, with its region and, in the
/// curved regions, the lower-boundary parameter `v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eval {
    pub value: f64,
    pub region: Region,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
}

/// `v^p - 1` without cancellation near `v = 1`.
fn pm1(v: f64, p: f64) -> f64 {
    let e = p * v.ln();
    if e.abs() > 0.5 {
        v.powf(p) - 1.0
    } else {
        e.exp_m1()
    }
}

/// Coefficients `(t1, t2)` of the chord plane with lower-boundary parameter `v`.
fn chord_coefficients(v: f64, params: &Params) -> (f64, f64) {
    let Params { p1, p2, .. } = *params;
    let (u1, u2) = (v.powf(p1), v.powf(p2));
    let d = p2 * u2 * pm1(v, p1) - p1 * u1 * pm1(v, p2);
    (-p2 * u2 / d, p1 * u1 / d)
}

/// Coefficients `(t1, t2)` of the plane along the tangent with base point `v`.
fn tangent_coefficients(v: f64, params: &Params, c: &DerivedConstants) -> (f64, f64) {
    let Params { p1, p2, .. } = *params;
    let e = (p1 - p2) * c.a / (1.0 - c.a);
    let k = 1.0 / ((1.0 - c.a) * (1.0 - c.v_minus.powf(p1)));
    let t1 = k * (e * (v / c.v_minus).ln()).exp();
    (t1, -(p1 / p2) * t1 * v.powf(p1 - p2))
}

fn clamp_unit(b: f64) -> f64 {
    b.clamp(0.0, 1.0)
}

/// Bellman function at `x`.
pub fn eval(x1: f64, x2: f64, params: &Params, c: &DerivedConstants) -> Result<Eval> {
    require_domain(x1, x2, params)?;
    let region = classify(x1, x2, params, c)?;
    let out = match region {
        Region::I => Eval { value: 1.0, region, v: None },
        Region::II => Eval {
            value: clamp_unit(c.a2 * x1 + c.b2 * x2 + c.c2),
            region,
            v: None,
        },
        Region::III => {
            let v = solve_v_iii(x1, x2, params, c)?;
            let (t1, t2) = chord_coefficients(v, params);
            let value = 1.0 + t1 * (x1 - 1.0) + t2 * (x2 - 1.0);
            Eval { value: clamp_unit(value), region, v: Some(v) }
        }
        Region::IV => {
            let v = solve_v_iv(x1, x2, params, c)?;
            let (t1, t2) = tangent_coefficients(v, params, c);
            let value = t1 * (x1 - v.powf(params.p1)) + t2 * (x2 - v.powf(params.p2));
            Eval { value: clamp_unit(value), region, v: Some(v) }
        }
        _ => return Err(ApqError::OutsideDomain { x1, x2 }),
    };
    Ok(out)
}

/// Bellman function for the threshold `lambda`: the largest measure of
/// `{w >= lambda}`. Reduces to [`eval`] by homogeneity.
pub fn eval_lambda(x1: f64, x2: f64, lambda: f64, params: &Params, c: &DerivedConstants) -> Result<f64> {
    require_domain(x1, x2, params)?;
    if lambda <= 0.0 {
        return Ok(1.0);
    }
    let y1 = x1 * lambda.powf(-params.p1);
    let y2 = x2 * lambda.powf(-params.p2);
    Ok(eval(y1, y2, params, c)?.value)
}

/// Supporting plane `(t0, t1, t2)` with `B(x) = t0 + t1 x1 + t2 x2`, defined
/// away from the interior region boundaries.
pub fn gradient(x1: f64, x2: f64, params: &Params, c: &DerivedConstants) -> Result<(f64, f64, f64)> {
    require_domain(x1, x2, params)?;
    if near_interior_boundary(x1, x2, params, c, GRADIENT_BOUNDARY_TOL) {
        return Err(ApqError::NearBoundary { x1, x2, tol: GRADIENT_BOUNDARY_TOL });
    }
    let e = eval(x1, x2, params, c)?;
    let (t1, t2) = match e.region {
        Region::I => (0.0, 0.0),
        Region::II => (c.a2, c.b2),
        Region::III => chord_coefficients(e.v.expect("v in III"), params),
        Region::IV => tangent_coefficients(e.v.expect("v in IV"), params, c),
        _ => return Err(ApqError::OutsideDomain { x1, x2 }),
    };
    Ok((e.value - t1 * x1 - t2 * x2, t1, t2))
}

/// Closed-form Bellman function for the pair `(1, -1)`, i.e. `1 <= x1 x2 <= Q`.
pub fn eval_a2(x1: f64, x2: f64, q: f64) -> Result<f64> {
    let params = Params::new(1.0, -1.0, q)?;
    require_domain(x1, x2, &params)?;
    if x1 == 1.0 && x2 == 1.0 {
        return Ok(1.0);
    }
    let s = (q * q - q).sqrt();
    let (gm, gp) = (q - s, q + s);
    let vm = gm / gp;
    let vp = gp / gm;
    if x1 > gp || x2 < 1.0 - vm * (x1 - 1.0) {
        return Ok(1.0);
    }
    if x2 <= 1.0 - vp * (x1 - 1.0) {
        return Ok(clamp_unit((x1 * x2 - 1.0) / (x1 + x2 - 2.0)));
    }
    if x1 > gm {
        let a = -(q - s) / (8.0 * (q * q - q));
        let b = -(q + s) / (8.0 * (q * q - q));
        let c = 1.0 + 1.0 / (4.0 * (q - 1.0));
        return Ok(clamp_unit(a * x1 + b * x2 + c));
    }
    let disc = ((1.0 + vm) * (1.0 + vm) - 4.0 * vm * x1 * x2).max(0.0);
    let v = (1.0 + vm + disc.sqrt()) / (2.0 * x2);
    let e = 2.0 * vm / (1.0 - vm);
    Ok(clamp_unit((e * (v / vm).ln()).exp() / (1.0 - vm) * (x1 - v)))
}
