use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use apq_core::bellman::{eval, eval_a2, eval_lambda};
use apq_core::geometry::{classify, gamma1_point, in_domain, log_ratio, tangent_line, Side};
use apq_core::implicit_v::{solve_v_iii, solve_v_iv};
use apq_core::quad::integrate;
use apq_core::verify::sample_interior;
use apq_core::weights::{Piece, Weight};
use apq_core::{Model, Region};

const PAIRS: [(f64, f64); 5] = [(1.0, -1.0), (2.0, 1.0), (-1.0, -2.0), (3.0, -0.5), (0.5, -2.0)];

fn model() -> impl Strategy<Value = Model> {
    (0..PAIRS.len(), 1.2f64..6.0).prop_map(|(k, q)| Model::new(PAIRS[k].0, PAIRS[k].1, q).unwrap())
}

/// A domain point with base value `m` and class log-ratio `frac * ln Q`.
fn point(m: &Model, ln_base: f64, frac: f64) -> (f64, f64) {
    let r = frac * m.params.q.ln();
    let (p1, p2) = (m.params.p1, m.params.p2);
    ((p1 * ln_base).exp(), (p2 * (ln_base - r)).exp())
}

fn steps() -> impl Strategy<Value = Weight> {
    (prop::collection::vec(-2.0f64..2.0, 1..6), prop::collection::vec(0.05f64..1.0, 6)).prop_map(|(logs, gaps)| {
        let n = logs.len();
        let total: f64 = gaps[..n].iter().sum();
        let mut at = 0.0;
        let breaks: Vec<f64> = gaps[..n - 1]
            .iter()
            .map(|g| {
                at += g / total;
                at
            })
            .collect();
        let values: Vec<f64> = logs.iter().map(|l| l.exp()).collect();
        Weight::steps(&values, &breaks).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn value_lies_in_unit_interval(m in model(), ln_base in -2.5f64..2.5, frac in 0.0f64..=1.0) {
        let x = point(&m, ln_base, frac);
        prop_assume!(in_domain(x.0, x.1, &m.params).unwrap());
        let e = eval(x.0, x.1, &m.params, &m.consts).unwrap();
        prop_assert!((0.0..=1.0).contains(&e.value));
        prop_assert_eq!(e.region, classify(x.0, x.1, &m.params, &m.consts).unwrap());
    }

    #[test]
    fn threshold_scaling_and_monotonicity(
        m in model(), ln_base in -2.0f64..2.0, frac in 0.0f64..=1.0, ln_s in -1.0f64..1.0, l1 in -1.0f64..1.0, l2 in -1.0f64..1.0,
    ) {
        let (p, c) = (&m.params, &m.consts);
        let x = point(&m, ln_base, frac);
        prop_assume!(in_domain(x.0, x.1, p).unwrap());
        let (lam, s) = (l1.exp(), ln_s.exp());
        let b = eval_lambda(x.0, x.1, lam, p, c).unwrap();
        let scaled = eval_lambda(x.0 * s.powf(p.p1), x.1 * s.powf(p.p2), s * lam, p, c).unwrap();
        prop_assert!((b - scaled).abs() < 1e-9, "{} vs {}", b, scaled);
        let (lo, hi) = (l1.min(l2).exp(), l1.max(l2).exp());
        let b_lo = eval_lambda(x.0, x.1, lo, p, c).unwrap();
        let b_hi = eval_lambda(x.0, x.1, hi, p, c).unwrap();
        prop_assert!(b_hi <= b_lo + 1e-9);
    }

    #[test]
    fn closed_form_moments_match_quadrature(
        coef in 0.2f64..3.0, exponent in -0.9f64..0.9, cut in 0.1f64..0.9, tail in 0.2f64..3.0, p in -1.0f64..1.0,
    ) {
        prop_assume!(p.abs() > 1e-3 && exponent * p < 0.9);
        let w = Weight::new(vec![
            Piece::Power { coef, exponent, lo: 0.0, hi: cut },
            Piece::Const { value: tail, lo: cut, hi: 1.0 },
        ]).unwrap();
        let want = integrate(|t| coef.powf(p) * t.powf(-exponent * p), 0.0, cut, 1e-12).unwrap()
            + tail.powf(p) * (1.0 - cut);
        let got = w.moment(p).unwrap();
        prop_assert!((got - want).abs() <= 1e-8 * want.abs().max(1.0), "{} vs {}", got, want);
    }

    #[test]
    fn scaling_moves_moments_and_distribution(w in steps(), ln_s in -1.5f64..1.5, p in -2.0f64..2.0, ln_l in -2.0f64..2.0) {
        let s = ln_s.exp();
        let ws = w.scaled(s).unwrap();
        let (a, b) = (ws.moment(p).unwrap(), s.powf(p) * w.moment(p).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        let lam = ln_l.exp();
        prop_assert!((ws.distribution(s * lam) - w.distribution(lam)).abs() < 1e-12);
    }

    #[test]
    fn cutoff_below_caps_the_weight(w in steps(), ln_a in -2.0f64..2.0, ln_l in -2.5f64..2.5, p in 0.1f64..2.0) {
        let (a, lam) = (ln_a.exp(), ln_l.exp());
        let cut = w.cutoff_below(a).unwrap();
        let want = if lam <= a { w.distribution(lam) } else { 0.0 };
        prop_assert!((cut.distribution(lam) - want).abs() < 1e-12);
        prop_assert!(cut.moment(p).unwrap() <= w.moment(p).unwrap() * (1.0 + 1e-12));
        prop_assert!(cut.moment(-p).unwrap() >= w.moment(-p).unwrap() * (1.0 - 1e-12));
    }

    #[test]
    fn two_step_norm_is_the_worst_straddling_interval(m in model(), lu in -1.0f64..1.0, lv in -1.0f64..1.0, mu in 0.05f64..0.95) {
        let p = &m.params;
        let w = Weight::steps(&[lu.exp(), lv.exp()], &[mu]).unwrap();
        // An interval straddling the jump only matters through the fraction t
        // it spends on the first value; scan t, then refine the best cell.
        let ratio = |t: f64| {
            let m1 = t * lu.exp().powf(p.p1) + (1.0 - t) * lv.exp().powf(p.p1);
            let m2 = t * lu.exp().powf(p.p2) + (1.0 - t) * lv.exp().powf(p.p2);
            m1.ln() / p.p1 - m2.ln() / p.p2
        };
        let n: usize = 2000;
        let k = (0..=n).max_by(|&i, &j| ratio(i as f64 / n as f64).total_cmp(&ratio(j as f64 / n as f64))).unwrap();
        let (mut lo, mut hi) = (k.saturating_sub(1) as f64 / n as f64, (k + 1).min(n) as f64 / n as f64);
        for _ in 0..200 {
            let (a, b) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
            if ratio(a) < ratio(b) { lo = a } else { hi = b }
        }
        let best = ratio(0.5 * (lo + hi)).max(ratio(k as f64 / n as f64));
        let norm = w.apq_norm(p, 32).unwrap();
        prop_assert!(norm <= best.exp() * (1.0 + 1e-9), "{} vs {}", norm, best.exp());
        prop_assert!(norm >= best.exp() * (1.0 - 1e-6), "{} vs {}", norm, best.exp());
    }

    #[test]
    fn closed_form_matches_general_evaluator(q in 1.1f64..10.0, ln_x1 in -3.0f64..3.0, frac in 0.0f64..=1.0) {
        let m = Model::new(1.0, -1.0, q).unwrap();
        let x1 = ln_x1.exp();
        let x2 = (frac * q.ln()).exp() / x1;
        let a = eval_a2(x1, x2, q).unwrap();
        let b = eval(x1, x2, &m.params, &m.consts).unwrap().value;
        prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);
    }

    #[test]
    fn weight_json_round_trip(w in steps(), coef in 0.5f64..2.0, exponent in -0.5f64..0.9) {
        let text = serde_json::to_string(&w).unwrap();
        prop_assert_eq!(&serde_json::from_str::<Weight>(&text).unwrap(), &w);
        let pw = Weight::new(vec![
            Piece::Power { coef, exponent, lo: 0.0, hi: 0.5 },
            Piece::Const { value: coef, lo: 0.5, hi: 1.0 },
        ]).unwrap();
        let text = serde_json::to_string(&pw).unwrap();
        prop_assert_eq!(serde_json::from_str::<Weight>(&text).unwrap(), pw);
    }

    #[test]
    fn moments_of_any_weight_lie_above_the_lower_boundary(m in model(), w in steps()) {
        let mp = w.moments(&m.params).unwrap();
        prop_assert!(log_ratio(mp.x1, mp.x2, &m.params) >= -1e-12);
    }

    #[test]
    fn implicit_roots_solve_their_equations(m in model(), seed in any::<u64>()) {
        let (p, c) = (&m.params, &m.consts);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Region III: x lies on the chord from (1,1) to the lower boundary at v.
        let x = sample_interior(Region::III, 1e-3, p, c, &mut rng).unwrap();
        let v = solve_v_iii(x.0, x.1, p, c).unwrap();
        let e = gamma1_point(v, p);
        let cross = (x.0 - 1.0) * (e.1 - 1.0) - (x.1 - 1.0) * (e.0 - 1.0);
        let scale = ((x.0 - 1.0).hypot(x.1 - 1.0) * (e.0 - 1.0).hypot(e.1 - 1.0)).max(1e-300);
        prop_assert!(cross.abs() / scale < 1e-9, "chord residual {}", cross / scale);
        // Region IV: x lies on the tangent from the lower boundary at v that
        // touches the upper boundary at gamma_plus * v.
        let x = sample_interior(Region::IV, 1e-3, p, c, &mut rng).unwrap();
        let v = solve_v_iv(x.0, x.1, p, c).unwrap();
        let line = tangent_line(v, Side::Plus, p, c);
        prop_assert!((line.at(x.0) - x.1).abs() < 1e-9 * x.1.abs().max(1.0), "{} vs {}", line.at(x.0), x.1);
    }
}
