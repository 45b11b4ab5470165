use super::*;
use crate::sieve::{mertens, mobius_range};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

fn guard() -> EvalGuardConfig {
    EvalGuardConfig::default()
}

fn expr(s: &str) -> BracketExpr {
    BracketExpr::parse(s).unwrap()
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
}

#[test]
fn frac_mul_matches_rational_arithmetic() {
    for &alpha in &[0.1, 0.5, std::f64::consts::FRAC_1_SQRT_2, 1e-9, 0.999999999999, 3.7e-300] {
        for &n in &[1u64, 7, 1_000_003, 1 << 40, u64::MAX >> 1] {
            let exact = BigRational::from_float(alpha).unwrap() * BigRational::from_integer(BigInt::from(n));
            let fr = &exact - BigRational::from_integer(exact.floor().to_integer());
            let want = fr.to_f64().unwrap();
            let got = frac_mul(alpha, n);
            assert!((got - want).abs() <= f64::EPSILON, "{alpha} {n}: {got} vs {want}");
        }
    }
    assert_eq!(frac_mul(-0.25, 1), 0.75);
    assert_eq!(frac_mul(0.25, 4), 0.0);
}

#[test]
fn linear_sum_examples() {
    assert_eq!(mu_exp_sum(10, 0.0, 1, 0).unwrap().value, Complex64::new(-1.0, 0.0));
    let half = mu_exp_sum(10, 0.5, 1, 0).unwrap().value;
    assert!(close(half, Complex64::new(3.0, 0.0), 1e-12));
    let r = mu_exp_sum(1_000_000, 0.5 - 0.6180339887498949 + 1.0, 3, 1).unwrap();
    assert_eq!(r.count, 333_334);
    assert!(r.abs_value <= r.count as f64);
    assert!(mu_exp_sum(10, 1.0, 1, 0).is_err());
    assert!(mu_exp_sum(10, 0.0, 3, 3).is_err());
}

#[test]
fn alpha_zero_equals_mertens() {
    for n in [1u64, 2, 100, 10_000, 123_457] {
        let v = mu_exp_sum(n, 0.0, 1, 0).unwrap().value;
        assert_eq!(v.re, mertens(n).unwrap() as f64);
        assert_eq!(v.im, 0.0);
    }
}

#[test]
fn bracket_phase_consistency() {
    let zero = mu_bracket_exp_sum(1000, &expr("0"), 1, 0, &guard()).unwrap();
    assert_eq!(zero.value.re, mertens(1000).unwrap() as f64);
    let p = mu_bracket_exp_sum(1000, &expr("0.5*n"), 1, 0, &guard()).unwrap();
    let l = mu_exp_sum(1000, 0.5, 1, 0).unwrap();
    assert!(close(p.value, l.value, 1e-12));
    let p = mu_bracket_exp_sum(997, &expr("0.5*n"), 4, 3, &guard()).unwrap();
    let l = mu_exp_sum(997, 0.5, 4, 3).unwrap();
    assert!(close(p.value, l.value, 1e-12));
}

#[test]
fn lipschitz_examples() {
    let one = PiecewiseLinear::constant(1.0).unwrap();
    let v = mu_lipschitz_sum(500, &expr("n*sqrt(2)"), &one, &guard()).unwrap();
    assert_eq!(v, mertens(500).unwrap() as f64);
    let ramp = PiecewiseLinear::new(vec![(0.0, -1.0), (1.0, 1.0)]).unwrap();
    // n odd: psi(1/2) = 0; n even: psi(0) = -1
    let v = mu_lipschitz_sum(6, &expr("n*0.5"), &ramp, &guard()).unwrap();
    assert_eq!(v, 0.0);
    let v = mu_lipschitz_sum(10, &expr("n*0.5"), &ramp, &guard()).unwrap();
    let mu = mobius_range(1, 10).unwrap();
    let want: f64 = (2..=10).step_by(2).map(|n| -(mu[n - 1] as f64)).sum();
    assert_eq!(v, want);
    assert!(PiecewiseLinear::new(vec![(0.0, 0.0), (1.0, 1.5)]).is_err());
    assert!(PiecewiseLinear::new(vec![(0.0, 0.0), (0.9, 0.5)]).is_err());
    assert_eq!(ramp.lipschitz(), 2.0);
}

#[test]
fn short_interval_examples() {
    let r = mu_short_interval_sum(10, 5, &expr("0"), &guard()).unwrap();
    assert_eq!(r.value, Complex64::new(0.0, 0.0));
    assert_eq!((r.lo, r.hi, r.count), (11, 15, 5));
    assert!(mu_short_interval_sum(10, 5, &expr("floor(n*0.5)"), &guard()).is_err());

    let n = 1_000_000u64;
    let h = (n as f64).powf(0.65).ceil() as u64;
    let r = mu_short_interval_sum(n, h, &expr("0"), &guard()).unwrap();
    assert!(r.abs_value <= h as f64);
    assert!(r.short_ratio.unwrap() > 1.0);

    let r = mu_short_interval_sum(300, 77, &expr("0.5*n"), &guard()).unwrap();
    let diff = mu_exp_sum(377, 0.5, 1, 0).unwrap().value - mu_exp_sum(300, 0.5, 1, 0).unwrap().value;
    assert!(close(r.value, diff, 1e-12));
}

#[test]
fn reflection_and_partition() {
    let n = 20_000;
    for &alpha in &[0.123456789, 0.3, 0.61803398875, 0.9] {
        let f = mu_exp_sum(n, alpha, 1, 0).unwrap();
        let g = mu_exp_sum(n, 1.0 - alpha, 1, 0).unwrap();
        assert!((f.abs_value - g.abs_value).abs() <= 1e-9 * f.abs_value.max(1.0));
        for d in 1..=8u64 {
            let total: Complex64 = (0..d).map(|a| mu_exp_sum(n, alpha, d, a).unwrap().value).sum();
            assert!(close(total, f.value, 1e-9));
        }
    }
    for d in 1..=8u64 {
        let total: f64 = (0..d).map(|a| mu_exp_sum(n, 0.0, d, a).unwrap().value.re).sum();
        assert_eq!(total, mertens(n).unwrap() as f64);
    }
}

#[test]
fn orthogonality_recovers_progressions() {
    let n = 5_000;
    let alpha = 0.2718281828;
    for d in 1..=8u64 {
        for a in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..d {
                let shifted = (alpha + j as f64 / d as f64).rem_euclid(1.0);
                let f = mu_exp_sum(n, shifted, 1, 0).unwrap().value;
                // e(-j a / d)
                let t = ((d - (j * a) % d) % d) as f64 / d as f64;
                acc += unit(t) * f;
            }
            acc /= d as f64;
            let want = mu_exp_sum(n, alpha, d, a).unwrap().value;
            assert!(close(acc, want, 1e-9), "d={d} a={a}");
        }
    }
}

#[test]
fn sup_scan_contracts() {
    let r = sup_scan(100, 1 << 10, 0).unwrap();
    assert!(r.sup_lower_bound >= mertens(100).unwrap().unsigned_abs() as f64);
    let mut last = 0.0;
    for iters in [0, 1, 2, 5, 10, 20] {
        let r = sup_scan(5000, 1 << 8, iters).unwrap();
        assert!(r.sup_lower_bound >= last);
        last = r.sup_lower_bound;
    }
    let (fft, direct) = scan::grid_max_both(10_000, 1 << 9).unwrap();
    assert!((fft - direct).abs() <= 1e-8 * direct);
    let odd = sup_scan(2000, 300, 5).unwrap();
    assert!(odd.sup_lower_bound > 0.0);
    assert!(sup_scan(10, 1, 0).is_err());
}

#[test]
fn fits_recover_generators() {
    let ns: [f64; 5] = [1e3, 1e4, 1e5, 1e6, 1e7];
    let pts: Vec<(f64, f64)> = ns.iter().map(|&n| (n, n * n.ln().powi(-2))).collect();
    let f = fit_decay(&pts, DecayModel::LogPower).unwrap();
    assert!((f.parameter - 2.0).abs() < 1e-6);
    assert!(f.residual < 1e-9);
    let pts: Vec<(f64, f64)> = ns.iter().map(|&n| (n, n.powf(0.75))).collect();
    let f = fit_decay(&pts, DecayModel::Power).unwrap();
    assert!((f.parameter - 0.75).abs() < 1e-6);
    assert!(fit_decay(&pts[..2], DecayModel::Power).is_err());
    assert!(fit_decay(&[(10.0, 1.0), (100.0, -1.0), (1000.0, 1.0)], DecayModel::Power).is_err());
}
