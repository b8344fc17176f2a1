//! Exponent pair, class constant, and the constants derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{ApqError, Result};
use crate::roots::{expand_geometric, solve_bracketed, ROOT_TOL};

/// Sign configuration of the exponent pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Case {
    /// `p1 > p2 > 0`
    BothPositive,
    /// `p1 > 0 > p2`
    Mixed,
    /// `0 > p1 > p2`
    BothNegative,
}

/// Validated exponents `p1 > p2` (both nonzero) and class constant `q > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub p1: f64,
    pub p2: f64,
    pub q: f64,
}

impl Params {
    pub fn new(p1: f64, p2: f64, q: f64) -> Result<Self> {
        if !(p1.is_finite() && p2.is_finite() && q.is_finite()) {
            return Err(ApqError::InvalidParams("parameters must be finite".into()));
        }
        if p1 == 0.0 || p2 == 0.0 {
            return Err(ApqError::InvalidParams(
                "exponents must be nonzero (use the limiting evaluator for p2 = 0)".into(),
            ));
        }
        if p1 <= p2 {
            return Err(ApqError::InvalidParams(format!(
                "need p1 > p2, got p1 = {p1}, p2 = {p2}"
            )));
        }
        if q <= 1.0 {
            return Err(ApqError::InvalidParams(format!("need Q > 1, got {q}")));
        }
        Ok(Params { p1, p2, q })
    }

    pub fn case(&self) -> Case {
        if self.p2 > 0.0 {
            Case::BothPositive
        } else if self.p1 > 0.0 {
            Case::Mixed
        } else {
            Case::BothNegative
        }
    }

    /// The `(1, -1)` pair, i.e. the classical two-weight-average class.
    pub fn is_a2(&self) -> bool {
        self.p1 == 1.0 && self.p2 == -1.0
    }

    pub fn s1(&self) -> f64 {
        self.p1.signum()
    }

    pub fn s2(&self) -> f64 {
        self.p2.signum()
    }
}

/// Constants fixed by `(p1, p2, Q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    pub v_minus: f64,
    pub v_plus: f64,
    /// Slope factor of the tangent family, `Q^{-p2} gamma_plus^{p2-p1}`.
    pub a: f64,
    /// Decay exponent of the extremal power tail.
    pub nu: f64,
    /// Coefficients of the linear piece `a2*x1 + b2*x2 + c2`.
    pub a2: f64,
    pub b2: f64,
    pub c2: f64,
}

/// Left side of the tangency equation minus its right side, scaled by `Q^{-p2}`.
fn tangency_residual(p1: f64, p2: f64, q: f64, t: f64) -> f64 {
    let r = p2 / p1;
    let lt = t.ln();
    ((1.0 - r) * (p2 * lt).exp() + r * ((p2 - p1) * lt).exp()) * q.powf(-p2) - 1.0
}

/// Both roots `0 < gamma_minus < 1 < gamma_plus` of the tangency equation.
pub fn solve_gammas(p1: f64, p2: f64, q: f64) -> Result<(f64, f64)> {
    Params::new(p1, p2, q)?;
    let g = |t: f64| tangency_residual(p1, p2, q, t);
    let (lo, hi) = expand_geometric(g, 1.0, 0.25, true)?;
    let gm = solve_bracketed(g, lo, hi.min(1.0), ROOT_TOL)?;
    let (lo, hi) = expand_geometric(g, 1.0, 4.0, false)?;
    let gp = solve_bracketed(g, lo.max(1.0), hi, ROOT_TOL)?;
    for (name, t) in [("gamma_minus", gm), ("gamma_plus", gp)] {
        let res = g(t).abs();
        if !(res <= 1e-12) {
            return Err(ApqError::NoConvergence(format!(
                "{name} residual {res:e} exceeds 1e-12"
            )));
        }
    }
    if !(gm > 0.0 && gm < 1.0 && gp > 1.0) {
        return Err(ApqError::NoConvergence(format!(
            "roots out of order: {gm}, {gp}"
        )));
    }
    Ok((gm, gp))
}

/// All constants for a validated parameter set.
pub fn derive_constants(params: &Params) -> Result<DerivedConstants> {
    let Params { p1, p2, q } = *params;
    let (gm, gp) = solve_gammas(p1, p2, q)?;
    let vm = gm / gp;
    let vp = gp / gm;
    let a = q.powf(-p2) * gp.powf(p2 - p1);
    if !(a > 0.0 && a < 1.0) {
        return Err(ApqError::NoConvergence(format!("slope factor {a} not in (0,1)")));
    }
    let nu = -(-p1 * gp.ln()).exp_m1() / p1;
    let lhs = 1.0 / (1.0 - nu * p2);
    let rhs = q.powf(-p2) * gp.powf(p2);
    if ((lhs - rhs) / rhs).abs() > 1e-10 {
        return Err(ApqError::NoConvergence(format!(
            "tail exponent consistency failed: {lhs} vs {rhs}"
        )));
    }
    let u1 = vm.powf(p1);
    let u2 = vm.powf(p2);
    let a2 = u1 / ((1.0 - u1) * (u1 - u2));
    let b2 = u2 / ((u2 - 1.0) * (u1 - u2));
    let c2 = 1.0 - 1.0 / ((u1 - 1.0) * (u2 - 1.0));
    Ok(DerivedConstants {
        gamma_minus: gm,
        gamma_plus: gp,
        v_minus: vm,
        v_plus: vp,
        a,
        nu,
        a2,
        b2,
        c2,
    })
}

/// Parameters bundled with their derived constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub params: Params,
    pub consts: DerivedConstants,
}

impl Model {
    pub fn new(p1: f64, p2: f64, q: f64) -> Result<Self> {
        let params = Params::new(p1, p2, q)?;
        let consts = derive_constants(&params)?;
        Ok(Model { params, consts })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_params() {
        assert!(Params::new(1.0, 1.0, 2.0).is_err());
        assert!(Params::new(1.0, 0.0, 2.0).is_err());
        assert!(Params::new(0.0, -1.0, 2.0).is_err());
        assert!(Params::new(1.0, -1.0, 1.0).is_err());
        assert!(Params::new(1.0, -1.0, f64::NAN).is_err());
    }

    #[test]
    fn case_detection() {
        assert_eq!(Params::new(2.0, 1.0, 2.0).unwrap().case(), Case::BothPositive);
        assert_eq!(Params::new(1.0, -1.0, 2.0).unwrap().case(), Case::Mixed);
        assert_eq!(Params::new(-1.0, -2.0, 2.0).unwrap().case(), Case::BothNegative);
    }

    #[test]
    fn two_weight_constants_at_q2() {
        let c = Model::new(1.0, -1.0, 2.0).unwrap().consts;
        let s2 = 2f64.sqrt();
        assert!((c.gamma_minus - (2.0 - s2)).abs() < 1e-13);
        assert!((c.gamma_plus - (2.0 + s2)).abs() < 1e-13);
        assert!((c.v_minus - (3.0 - 2.0 * s2)).abs() < 1e-13);
        assert!((c.a - c.v_minus).abs() < 1e-13);
        assert!((c.nu - s2 / 2.0).abs() < 1e-13);
        assert!((c.a2 + 0.036_611_652_351_681_6).abs() < 1e-9);
        assert!((c.b2 + 0.213_388_347_648_318_4).abs() < 1e-9);
        assert!((c.c2 - 1.25).abs() < 1e-12);
        assert!((c.v_plus * c.v_minus - 1.0).abs() < 1e-14);
    }

    #[test]
    fn plane_passes_through_boundary_points() {
        for &(p1, p2, q) in &[(1.0, -1.0, 2.0), (2.0, 1.0, 3.0), (-1.0, -2.0, 1.5), (3.0, -0.5, 5.0)] {
            let c = Model::new(p1, p2, q).unwrap().consts;
            assert!((c.a2 + c.b2 + c.c2 - 1.0).abs() < 1e-10);
            let at = |v: f64| c.a2 * v.powf(p1) + c.b2 * v.powf(p2) + c.c2;
            assert!(at(c.v_minus).abs() < 1e-9);
            assert!((at(c.v_plus) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn power_one_one_half_closed_form() {
        for &q in &[1.2, 2.0, 4.0, 8.0] {
            let (gm, gp) = solve_gammas(2.0, 1.0, q).unwrap();
            let d = (q * q - 1.0).sqrt();
            assert!((gm - (q - d)).abs() < 1e-10);
            assert!((gp - (q + d)).abs() < 1e-10);
        }
    }
}
