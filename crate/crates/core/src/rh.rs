//! Sharp reverse Hölder bounds for the `(1, -1)` class via the layer-cake
//! formula `<w^{1+a}> = (1+a) int_0^inf s^a |{w >= s}| ds`.

use serde::{Deserialize, Serialize};

use crate::bellman::eval_a2;
use crate::error::{ApqError, Result};
use crate::geometry::{classify, Region};
use crate::params::Model;
use crate::quad::integrate;
use crate::weights::Weight;

/// Quadrature tolerance for the finite part of the layer-cake integral.
pub const QUAD_TOL: f64 = 1e-10;

/// Largest exponent gain `a` for which `<w^{1+a}> <= C <w>^{1+a}` holds
/// across the class with constant `Q`.
pub fn alpha0(q: f64) -> f64 {
    (q / (q - 1.0)).sqrt() - 1.0
}

/// Decay exponent of `B(x1/s, x2 s)` along the upper boundary.
pub fn tail_exponent(q: f64) -> f64 {
    q / (q * q - q).sqrt()
}

/// Coefficient of the tail envelope `B <= C(Q) x2^{-kappa}` on the upper boundary.
pub fn tail_coefficient(q: f64) -> f64 {
    let s = (q * q - q).sqrt();
    let (gm, gp) = (q - s, q + s);
    let vm = gm / gp;
    gp.powf(2.0 * vm / (1.0 - vm)) * s / (1.0 - vm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhResult {
    /// `None` when the integral diverges.
    pub constant: Option<f64>,
    pub converged: bool,
    /// `alpha - kappa`; the tail is integrable when this is below `-1`.
    pub tail_power: f64,
}

fn validate(q: f64, alpha: f64) -> Result<()> {
    if !(q.is_finite() && q > 1.0) {
        return Err(ApqError::InvalidParams(format!("need Q > 1, got {q}")));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(ApqError::InvalidParams(format!("need alpha > 0, got {alpha}")));
    }
    Ok(())
}

/// `(1+a) int_0^S s^a B(x1/s, x2 s) ds` for a point on the upper boundary,
/// with the three regions handled separately. `S = inf` gives the full integral.
fn upper_boundary_integral(q: f64, alpha: f64, x1: f64, x2: f64, upto: f64) -> Result<f64> {
    let s = (q * q - q).sqrt();
    let (gm, gp) = (q - s, q + s);
    let s_i = x1 / gp;
    let s_iv = x1 / gm;
    let e = 1.0 + alpha;
    let mut total = s_i.min(upto).powf(e);
    if upto > s_i {
        let hi = s_iv.min(upto);
        let f = |t: f64| t.powf(alpha) * eval_a2(x1 / t, x2 * t, q).unwrap_or(f64::NAN);
        total += e * integrate(f, s_i, hi, QUAD_TOL)?;
    }
    if upto > s_iv {
        let kappa = tail_exponent(q);
        let c = tail_coefficient(q) * x2.powf(-kappa);
        let g = e - kappa;
        let piece = if upto.is_infinite() {
            if g >= 0.0 {
                f64::INFINITY
            } else {
                -s_iv.powf(g) / g
            }
        } else if g == 0.0 {
            (upto / s_iv).ln()
        } else {
            (upto.powf(g) - s_iv.powf(g)) / g
        };
        total += e * c * piece;
    }
    Ok(total)
}

fn require_upper_boundary(q: f64, x1: f64, x2: f64) -> Result<()> {
    if !(x1 > 0.0 && x2 > 0.0) || ((x1 * x2 - q) / q).abs() > 1e-9 {
        return Err(ApqError::OutsideDomain { x1, x2 });
    }
    Ok(())
}

/// Reverse Hölder constant from the upper-boundary point `x`:
/// `<w^{1+a}> <= C <w>^{1+a}` for every weight with `<w><w^{-1}> = Q`.
pub fn rh_constant(q: f64, alpha: f64, x1: f64, x2: f64) -> Result<RhResult> {
    validate(q, alpha)?;
    require_upper_boundary(q, x1, x2)?;
    let tail_power = alpha - tail_exponent(q);
    if tail_power >= -1.0 {
        return Ok(RhResult { constant: None, converged: false, tail_power });
    }
    let total = upper_boundary_integral(q, alpha, x1, x2, f64::INFINITY)?;
    Ok(RhResult { constant: Some(total / x1.powf(1.0 + alpha)), converged: true, tail_power })
}

/// The layer-cake integral truncated at `s <= upto`, normalized like
/// [`rh_constant`].
pub fn truncated_constant(q: f64, alpha: f64, x1: f64, x2: f64, upto: f64) -> Result<f64> {
    validate(q, alpha)?;
    require_upper_boundary(q, x1, x2)?;
    Ok(upper_boundary_integral(q, alpha, x1, x2, upto)? / x1.powf(1.0 + alpha))
}

/// Bound on `<w^{1+a}>` for any weight of the class with `(<w>, <w^{-1}>) = x`.
///
/// Along `s -> (x1/s, x2 s)` the path eventually stays in region IV, where
/// the value decays exactly like `s^{-kappa}`; the integral is split at the
/// region changes and the tail is summed in closed form.
pub fn layer_cake_bound(q: f64, alpha: f64, x1: f64, x2: f64) -> Result<f64> {
    validate(q, alpha)?;
    let model = Model::new(1.0, -1.0, q)?;
    let region = |s: f64| classify(x1 / s, x2 * s, &model.params, &model.consts);
    if region(1.0)? == Region::Outside {
        return Err(ApqError::OutsideDomain { x1, x2 });
    }
    let kappa = tail_exponent(q);
    if alpha + 1.0 - kappa >= 0.0 {
        return Ok(f64::INFINITY);
    }
    // Breakpoints on a geometric grid, refined by bisection.
    let s_lo = x1 / (4.0 * model.consts.gamma_plus);
    let mut s_hi = s_lo;
    while region(s_hi)? != Region::IV {
        s_hi *= 2.0;
        if s_hi > 1e12 * s_lo {
            return Err(ApqError::NoConvergence("layer-cake path never reaches region IV".into()));
        }
    }
    let n = 256;
    let grid: Vec<f64> = (0..=n).map(|k| s_lo * (s_hi / s_lo).powf(k as f64 / n as f64)).collect();
    let mut cuts = vec![0.0];
    for w in grid.windows(2) {
        let (ra, rb) = (region(w[0])?, region(w[1])?);
        if ra != rb {
            let (mut a, mut b) = (w[0], w[1]);
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                if region(m)? == ra {
                    a = m;
                } else {
                    b = m;
                }
            }
            cuts.push(b);
        }
    }
    let s_star = *cuts.last().expect("path starts outside region IV");
    let e = 1.0 + alpha;
    let b = |t: f64| eval_a2(x1 / t, x2 * t, q).unwrap_or(f64::NAN);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += e * integrate(|t| t.powf(alpha) * b(t), w[0], w[1], QUAD_TOL)?;
    }
    let b_star = b(s_star * (1.0 + 1e-12));
    total += e * b_star * s_star.powf(e) / (kappa - e);
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhOutcome {
    Holds,
    Violated,
    /// `<w^{1+a}>` is infinite, as expected past the critical exponent.
    Divergent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhCheck {
    pub outcome: RhOutcome,
    pub lhs: f64,
    pub rhs: f64,
}

/// Compare `<w^{1+a}>` with the layer-cake bound at the weight's own moments.
pub fn rh_check(w: &Weight, alpha: f64, q: f64) -> Result<RhCheck> {
    validate(q, alpha)?;
    let lhs = match w.moment(1.0 + alpha) {
        Ok(v) => v,
        Err(ApqError::NonIntegrable { .. }) => {
            return Ok(RhCheck { outcome: RhOutcome::Divergent, lhs: f64::INFINITY, rhs: f64::NAN })
        }
        Err(e) => return Err(e),
    };
    let x1 = w.moment(1.0)?;
    let x2 = w.moment(-1.0)?;
    let rhs = layer_cake_bound(q, alpha, x1, x2)?;
    let outcome = if lhs <= rhs * (1.0 + 1e-6) { RhOutcome::Holds } else { RhOutcome::Violated };
    Ok(RhCheck { outcome, lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extremal::build;
    use crate::geometry::gamma_q_point;
    use crate::weights::Piece;

    #[test]
    fn critical_exponent_at_q2() {
        assert!((alpha0(2.0) - (2f64.sqrt() - 1.0)).abs() < 1e-12);
        let m = Model::new(1.0, -1.0, 2.0).unwrap();
        assert!((1.0 / m.consts.nu - 1.0 - alpha0(2.0)).abs() < 1e-12);
    }

    #[test]
    fn tail_envelope_is_exact_on_upper_boundary() {
        let q = 2.0;
        let kappa = tail_exponent(q);
        for &t in &[2.0, 5.0, 40.0] {
            let (x1, x2) = (1.0 / t, 2.0 * t);
            let b = eval_a2(x1, x2, q).unwrap();
            let env = tail_coefficient(q) * x2.powf(-kappa);
            assert!((b - env).abs() < 1e-12 * env.max(1e-300), "{b} vs {env}");
        }
    }

    #[test]
    fn convergence_switches_at_critical_exponent() {
        let a0 = alpha0(2.0);
        assert!(rh_constant(2.0, 0.9 * a0, 1.0, 2.0).unwrap().converged);
        assert!(!rh_constant(2.0, 1.05 * a0, 1.0, 2.0).unwrap().converged);
    }

    #[test]
    fn closed_form_constant_at_small_exponent() {
        // With x = (1, 2) and Q = 2 each piece integrates in closed form.
        let a = 0.2;
        let q = 2.0;
        let s2 = 2f64.sqrt();
        let (gm, gp) = (2.0 - s2, 2.0 + s2);
        let (s_i, s_iv) = (1.0 / gp, 1.0 / gm);
        let (pa, pb, pc) = (-(2.0 - s2) / 16.0, -(2.0 + s2) / 16.0, 1.25);
        let e = 1.0 + a;
        let ii = pa * (s_iv.powf(a) - s_i.powf(a)) / a
            + 2.0 * pb * (s_iv.powf(a + 2.0) - s_i.powf(a + 2.0)) / (a + 2.0)
            + pc * (s_iv.powf(e) - s_i.powf(e)) / e;
        let b_iv = eval_a2(1.0 / s_iv, 2.0 * s_iv, q).unwrap();
        let tail = b_iv * s_iv.powf(e) / (tail_exponent(q) - e);
        let want = s_i.powf(e) + e * (ii + tail);
        let got = rh_constant(q, a, 1.0, 2.0).unwrap().constant.unwrap();
        assert!((got - want).abs() < 1e-9 * want, "{got} vs {want}");
    }

    #[test]
    fn general_bound_agrees_on_upper_boundary() {
        let a = 0.3;
        let c = rh_constant(2.0, a, 0.7, 2.0 / 0.7).unwrap().constant.unwrap();
        let b = layer_cake_bound(2.0, a, 0.7, 2.0 / 0.7).unwrap();
        assert!((c * 0.7f64.powf(1.0 + a) - b).abs() < 1e-8 * b);
    }

    #[test]
    fn extremal_tail_diverges_exactly_past_critical_exponent() {
        // The unbounded power weight t^{-nu} sits on the upper boundary.
        let m = Model::new(1.0, -1.0, 2.0).unwrap();
        let w = Weight::new(vec![Piece::Power { coef: 1.0, exponent: m.consts.nu, lo: 0.0, hi: 1.0 }]).unwrap();
        let a0 = alpha0(2.0);
        let held = rh_check(&w, 0.9 * a0, 2.0).unwrap();
        assert_eq!(held.outcome, RhOutcome::Holds, "{held:?}");
        let (x1, x2) = gamma_q_point(0.05, &m.params);
        let bounded = build(x1, x2, &m.params, &m.consts).unwrap().weight;
        assert_eq!(rh_check(&bounded, 1.05 * a0, 2.0).unwrap().outcome, RhOutcome::Holds);
        assert_eq!(rh_check(&w, a0, 2.0).unwrap().outcome, RhOutcome::Divergent);
        assert_eq!(rh_check(&w, 1.05 * a0, 2.0).unwrap().outcome, RhOutcome::Divergent);
    }
}
