use matsubdiff::oracle::{check_scalarized, check_subgradient, Oracle, Outcome, WitnessKind};
use matsubdiff::subgrad::{clarke_sample, gradient_if_smooth, subdiff_interval_1d, subgradient, DEFAULT_DIFF_TOL};
use matsubdiff::symmat::{eigen_sym, loewner_leq, psd_verdict, DEFAULT_PSD_TOL};
use matsubdiff::testing::{random_mat, random_point, random_psd, random_sym, sample_in_interval, ExprGen};
use matsubdiff::{spec_file, ConvexMatrixExpr, MatTuple, SymMat};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn univariate(rng: &mut ChaCha8Rng, centered: bool) -> ConvexMatrixExpr {
    let gen = ExprGen {
        max_d: 1,
        centered,
        ..ExprGen::default()
    };
    let ell = rng.random_range(1..=4);
    gen.sample(rng, 1, ell, 4)
}

fn any_expr(rng: &mut ChaCha8Rng) -> ConvexMatrixExpr {
    let centered = rng.random_bool(0.5);
    ExprGen {
        centered,
        ..ExprGen::default()
    }
    .any(rng)
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / n).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn loewner_antisymmetry(seed in any::<u64>(), n in 1usize..6, tiny in 0.0f64..1e-10) {
        let mut r = rng(seed);
        let a = random_sym(&mut r, n, 3.0);
        let b = &a + &random_sym(&mut r, n, tiny);
        let tol = DEFAULT_PSD_TOL;
        if loewner_leq(&a, &b, tol).unwrap().is_psd() && loewner_leq(&b, &a, tol).unwrap().is_psd() {
            let bound = 2.0 * tol * (1.0 + a.norm_fro().max(b.norm_fro()));
            prop_assert!((&a - &b).norm_fro() <= bound * n as f64);
        }
        let c = &a + &random_psd(&mut r, n, 1).scaled(1.0 + tiny);
        let ab = loewner_leq(&a, &c, tol).unwrap().is_psd();
        let ba = loewner_leq(&c, &a, tol).unwrap().is_psd();
        prop_assert!(ab);
        prop_assert!(!(ab && ba) || (&a - &c).norm_fro() <= 2.0 * tol * (1.0 + c.norm_fro()));
    }

    #[test]
    fn order_properties(seed in any::<u64>(), n in 1usize..6, t in 0.0f64..10.0) {
        let mut r = rng(seed);
        let a = random_sym(&mut r, n, 2.0);
        let rank = r.random_range(0..=n);
        let b = &a + &random_psd(&mut r, n, rank);
        let e = random_sym(&mut r, n, 5.0);
        let tol = DEFAULT_PSD_TOL;
        prop_assert!(loewner_leq(&a, &b, tol).unwrap().is_psd());
        prop_assert!(loewner_leq(&-&b, &-&a, tol).unwrap().is_psd());
        prop_assert!(loewner_leq(&(&a + &e), &(&b + &e), tol).unwrap().is_psd());
        prop_assert!(loewner_leq(&a.scaled(t), &b.scaled(t), tol).unwrap().is_psd());
        let m = random_mat(&mut r, 3, n, 1.0);
        prop_assert!(loewner_leq(&a.congruence(&m), &b.congruence(&m), tol).unwrap().is_psd());
    }

    #[test]
    fn limits_preserve_order(seed in any::<u64>(), n in 1usize..5) {
        let mut r = rng(seed);
        let a = random_sym(&mut r, n, 2.0);
        let p = random_psd(&mut r, n, 1);
        let e = random_sym(&mut r, n, 1.0);
        let q = random_psd(&mut r, n, n);
        for k in 1..=50 {
            let an = &a + &e.scaled(1.0 / k as f64);
            let bn = &(&an + &p) + &q.scaled(1.0 / k as f64);
            prop_assert!(loewner_leq(&an, &bn, 1e-8).unwrap().is_psd());
        }
        prop_assert!(loewner_leq(&a, &(&a + &p), 1e-8).unwrap().is_psd());
    }

    #[test]
    fn quadratic_form_characterization(seed in any::<u64>(), n in 1usize..7) {
        let mut r = rng(seed);
        let a = random_sym(&mut r, n, 2.0);
        let v = psd_verdict(&a, DEFAULT_PSD_TOL).unwrap();
        match &v.witness {
            Some(z) => prop_assert!(a.quad_form(z) < -v.tolerance_used),
            None => for _ in 0..50 {
                let z = unit(random_point(&mut r, n, 1.0));
                prop_assert!(a.quad_form(&z) >= -v.tolerance_used - 1e-12);
            },
        }
    }

    #[test]
    fn eigen_residual_and_orthonormality(seed in any::<u64>(), n in 1usize..10) {
        let mut r = rng(seed);
        let a = random_sym(&mut r, n, 10.0);
        let s = eigen_sym(&a).unwrap();
        let scale = 1.0 + a.norm_fro();
        for (k, (lam, q)) in s.eigenvalues.iter().zip(&s.basis).enumerate() {
            let aq = a.mul_vec(q);
            let res: f64 = aq.iter().zip(q).map(|(x, y)| (x - lam * y).powi(2)).sum::<f64>().sqrt();
            prop_assert!(res <= 1e-12 * scale);
            for q2 in &s.basis[k..] {
                let dot: f64 = q.iter().zip(q2).map(|(x, y)| x * y).sum();
                let want = if std::ptr::eq(q, q2) { 1.0 } else { 0.0 };
                prop_assert!((dot - want).abs() <= 1e-12);
            }
        }
        prop_assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn convex_by_construction(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = any_expr(&mut r);
        let d = f.input_dim();
        let x1 = random_point(&mut r, d, 3.0);
        let x2 = random_point(&mut r, d, 3.0);
        let alpha: f64 = r.random();
        let z = random_point(&mut r, f.output_dim(), 1.0);
        let mid: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| alpha * a + (1.0 - alpha) * b).collect();
        let lhs = f.scalarize_eval(&z, &mid).unwrap();
        let rhs = alpha * f.scalarize_eval(&z, &x1).unwrap() + (1.0 - alpha) * f.scalarize_eval(&z, &x2).unwrap();
        prop_assert!(lhs <= rhs + 1e-9 * (1.0 + rhs.abs()), "{} > {}", lhs, rhs);
    }

    #[test]
    fn spec_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = any_expr(&mut r);
        let text = spec_file::to_string(&f);
        let g = spec_file::from_str(&text).unwrap();
        prop_assert_eq!(&g, &f);
        let x = random_point(&mut r, f.input_dim(), 2.0);
        prop_assert_eq!(g.evaluate(&x).unwrap(), f.evaluate(&x).unwrap());
        prop_assert_eq!(spec_file::to_string(&g), text);
    }

    #[test]
    fn secant_monotonicity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let centered = r.random_bool(0.5);
        let f = univariate(&mut r, centered);
        let mut pts = [r.random_range(-3.0..3.0), r.random_range(-3.0..3.0), r.random_range(-3.0..3.0)];
        pts.sort_by(f64::total_cmp);
        prop_assume!(pts[1] - pts[0] > 1e-2 && pts[2] - pts[1] > 1e-2);
        let [x1, x, x2] = pts;
        let ev = |t: f64| f.evaluate(&[t]).unwrap();
        let left = (&ev(x) - &ev(x1)).scaled(1.0 / (x - x1));
        let right = (&ev(x2) - &ev(x)).scaled(1.0 / (x2 - x));
        prop_assert!(loewner_leq(&left, &right, 1e-8).unwrap().is_psd());
        // F'₊(x₁) ⪯ secant ⪯ F'₋(x₂) and F'₋ ⪯ F'₊
        let secant = (&ev(x2) - &ev(x1)).scaled(1.0 / (x2 - x1));
        let i1 = subdiff_interval_1d(&f, x1).unwrap();
        let i2 = subdiff_interval_1d(&f, x2).unwrap();
        prop_assert!(loewner_leq(&i1.right, &secant, 1e-8).unwrap().is_psd());
        prop_assert!(loewner_leq(&secant, &i2.left, 1e-8).unwrap().is_psd());
        prop_assert!(loewner_leq(&i1.left, &i1.right, 1e-8).unwrap().is_psd());
    }

    #[test]
    fn double_scalarization(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = any_expr(&mut r);
        let g = ConvexMatrixExpr::double(&f).unwrap();
        let ell = f.output_dim();
        let z = random_point(&mut r, 2 * ell, 1.0);
        let diff: Vec<f64> = (0..ell).map(|i| z[i] - z[ell + i]).collect();
        let x = random_point(&mut r, f.input_dim(), 2.0);
        let a = g.scalarize_eval(&z, &x).unwrap();
        let b = f.scalarize_eval(&diff, &x).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{} vs {}", a, b);
    }

    #[test]
    fn scale_and_congruence_push_through(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = any_expr(&mut r);
        let x = random_point(&mut r, f.input_dim(), 2.0);
        let base = subgradient(&f, &x).unwrap().value;
        for alpha in [0.0, 0.5, 2.0] {
            let s = subgradient(&ConvexMatrixExpr::scale(alpha, &f).unwrap(), &x).unwrap();
            prop_assert_eq!(s.value, base.scaled(alpha));
        }
        let rows = r.random_range(1..=4);
        let m = random_mat(&mut r, rows, f.output_dim(), 1.5);
        let c = subgradient(&ConvexMatrixExpr::congruence(m.clone(), &f).unwrap(), &x).unwrap();
        for (vi, wi) in base.iter().zip(c.value.iter()) {
            for i in 0..rows {
                for j in 0..rows {
                    let mut want = 0.0;
                    for k in 0..vi.dim() {
                        for l in 0..vi.dim() {
                            want += m.get(i, k) * vi.get(k, l) * m.get(j, l);
                        }
                    }
                    prop_assert!((wi.get(i, j) - want).abs() <= 1e-12 * (1.0 + want.abs()));
                }
            }
        }
    }

    #[test]
    fn provenance_mirrors_expression(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = any_expr(&mut r);
        let x = random_point(&mut r, f.input_dim(), 2.0);
        prop_assert!(subgradient(&f, &x).unwrap().provenance.matches_shape(&f));
    }

    #[test]
    fn smooth_points_have_the_forward_subgradient_as_gradient(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = ExprGen::default().any(&mut r);
        let x = random_point(&mut r, f.input_dim(), 2.0);
        prop_assume!(f.kink_distance(&x) > 1e-6);
        let g = gradient_if_smooth(&f, &x, DEFAULT_DIFF_TOL).unwrap();
        let v = subgradient(&f, &x).unwrap().value;
        let scale = 1.0 + g.norm();
        prop_assert!(g.max_abs_diff(&v) <= 1e-12 * scale);
    }

    #[test]
    fn singleton_at_differentiable_points(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = univariate(&mut r, false);
        let x = r.random_range(-2.0..2.0);
        prop_assume!(f.kink_distance(&[x]) > 1e-6);
        let g = gradient_if_smooth(&f, &[x], DEFAULT_DIFF_TOL).unwrap();
        prop_assert_eq!(check_subgradient(&f, &[x], &g, 1, 0).unwrap().outcome, Outcome::VerifiedExact);
        let bump = random_sym(&mut r, f.output_dim(), 1.0);
        prop_assume!(bump.norm_fro() > 1e-3);
        let moved = MatTuple::from(g.get(0) + &bump);
        prop_assert!(check_subgradient(&f, &[x], &moved, 1, 0).unwrap().is_falsified());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn interval_endpoints_are_members(seed in any::<u64>()) {
        let mut r = rng(seed);
        let centered = r.random_bool(0.5);
        let f = univariate(&mut r, centered);
        let x = if r.random_bool(0.5) { 0.0 } else { r.random_range(-2.0..2.0) };
        let iv = subdiff_interval_1d(&f, x).unwrap();
        for v in [iv.left.clone(), iv.right.clone()] {
            prop_assert_eq!(check_subgradient(&f, &[x], &MatTuple::from(v), 1, 0).unwrap().outcome, Outcome::VerifiedExact);
        }
    }

    #[test]
    fn exact_test_matches_direct_interval_test(seed in any::<u64>(), s in -0.5f64..1.5, eps in 0.0f64..0.3) {
        let mut r = rng(seed);
        let f = univariate(&mut r, true);
        let x = if r.random_bool(0.5) { 0.0 } else { r.random_range(-2.0..2.0) };
        let iv = subdiff_interval_1d(&f, x).unwrap();
        let mut v = &iv.left + &iv.width().scaled(s);
        v.axpy(eps, &random_sym(&mut r, f.output_dim(), 1.0));
        let verdict = check_subgradient(&f, &[x], &MatTuple::from(v.clone()), 1, 0).unwrap();
        let inside = iv.contains(&v, DEFAULT_PSD_TOL).unwrap();
        prop_assert_eq!(verdict.outcome == Outcome::VerifiedExact, inside);
        prop_assert_eq!(verdict.is_falsified(), !inside);
    }

    #[test]
    fn falsified_witnesses_reevaluate(seed in any::<u64>(), eps in 1e-3f64..1.0) {
        let mut r = rng(seed);
        let f = any_expr(&mut r);
        let d = f.input_dim();
        let x = if r.random_bool(0.5) { vec![0.0; d] } else { random_point(&mut r, d, 2.0) };
        let base = subgradient(&f, &x).unwrap().value;
        let i = r.random_range(0..d);
        let mut mats = base.into_inner();
        mats[i].axpy(eps, &random_sym(&mut r, f.output_dim(), 1.0));
        let v = MatTuple::new(mats).unwrap();
        let verdict = check_subgradient(&f, &x, &v, 50, seed).unwrap();
        if let Some(w) = verdict.witness() {
            let zn: f64 = w.z.iter().map(|a| a * a).sum::<f64>().sqrt();
            prop_assert!((zn - 1.0).abs() < 1e-12);
            prop_assert!(w.margin < -w.threshold);
            match w.kind {
                WitnessKind::Raw => {
                    let step: Vec<f64> = w.point.iter().zip(&x).map(|(a, b)| a - b).collect();
                    let gap = &(&f.evaluate(&w.point).unwrap() - &f.evaluate(&x).unwrap()) - &v.apply(&step);
                    let margin = gap.quad_form(&w.z);
                    prop_assert!(margin < -DEFAULT_PSD_TOL * (1.0 + gap.norm_fro()));
                }
                WitnessKind::OneSided => {
                    let h = &w.direction;
                    let bound = f.dir_deriv(&x, h).unwrap();
                    let gap = &bound - &v.apply(h);
                    prop_assert!(gap.quad_form(&w.z) < -DEFAULT_PSD_TOL * (1.0 + gap.norm_fro()));
                }
            }
            // the violated line also shows a raw violation at some step
            let h = &w.direction;
            let fx = f.evaluate(&x).unwrap();
            let found = (0..=9).flat_map(|k| [1.0, -1.0].map(|s| s * 10f64.powi(-k))).any(|t| {
                let y: Vec<f64> = x.iter().zip(h).map(|(a, b)| a + t * b).collect();
                let step: Vec<f64> = h.iter().map(|b| t * b).collect();
                let gap = &(&f.evaluate(&y).unwrap() - &fx) - &v.apply(&step);
                !psd_verdict(&gap, DEFAULT_PSD_TOL).unwrap().is_psd()
            });
            prop_assert!(found);
        }
    }

    #[test]
    fn scalarized_never_contradicts_exact_membership(seed in any::<u64>()) {
        let mut r = rng(seed);
        let centered = r.random_bool(0.5);
        let f = univariate(&mut r, centered);
        let x = if r.random_bool(0.5) { 0.0 } else { r.random_range(-2.0..2.0) };
        let iv = subdiff_interval_1d(&f, x).unwrap();
        let v = MatTuple::from(sample_in_interval(&mut r, &iv));
        prop_assert_eq!(check_subgradient(&f, &[x], &v, 1, 0).unwrap().outcome, Outcome::VerifiedExact);
        for _ in 0..5 {
            let z = random_point(&mut r, f.output_dim(), 2.0);
            prop_assert!(!check_scalarized(&f, &[x], &v, &z, 20, seed).unwrap().is_falsified());
        }
    }

    #[test]
    fn clarke_generators_lie_in_the_interval(seed in any::<u64>()) {
        let mut r = rng(seed);
        let centered = r.random_bool(0.5);
        let f = univariate(&mut r, centered);
        let radius = 1e-3;
        let x = if centered { 0.0 } else { r.random_range(-2.0..2.0) };
        prop_assume!(centered || f.kink_distance(&[x]) > radius);
        let iv = subdiff_interval_1d(&f, x).unwrap();
        let sample = clarke_sample(&f, &[x], 50, radius, seed).unwrap();
        for g in &sample.generators {
            prop_assert!(iv.contains(g.get(0), 1e-6).unwrap());
        }
    }

    #[test]
    fn one_sided_derivatives_are_outer_semicontinuous(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = univariate(&mut r, true);
        let x = if r.random_bool(0.5) { 0.0 } else { r.random_range(-2.0..2.0) };
        let iv = subdiff_interval_1d(&f, x).unwrap();
        for k in 3..10 {
            for s in [1.0, -1.0] {
                let near = subdiff_interval_1d(&f, x + s * 10f64.powi(-k)).unwrap();
                prop_assert!(iv.contains(&near.left, 1e-6).unwrap());
                prop_assert!(iv.contains(&near.right, 1e-6).unwrap());
            }
        }
    }

    #[test]
    fn smooth_diagonal_means_smooth(seed in any::<u64>()) {
        let mut r = rng(seed);
        let centered = r.random_bool(0.5);
        let f = univariate(&mut r, centered);
        let x = if r.random_bool(0.5) { 0.0 } else { r.random_range(-2.0..2.0) };
        let iv = subdiff_interval_1d(&f, x).unwrap();
        let jump = iv.width();
        if jump.diagonal().iter().all(|v| v.abs() <= 1e-10) {
            prop_assert!(jump.norm_fro() <= 1e-8);
        }
    }

    #[test]
    fn sharding_agrees_with_single_stream(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = any_expr(&mut r);
        let d = f.input_dim();
        let x = random_point(&mut r, d, 1.0);
        let v = subgradient(&f, &x).unwrap().value;
        let single = Oracle::default().check_subgradient(&f, &x, &v, 40, seed).unwrap();
        let sharded = Oracle::default().check_subgradient_sharded(&f, &x, &v, 40, seed, 3).unwrap();
        prop_assert_eq!(single.is_falsified(), sharded.is_falsified());
        if d > 1 {
            prop_assert_eq!(sharded.outcome, Outcome::NotFalsified { samples: 40 });
        }
    }
}

#[test]
fn sum_rule_strictness_random_candidates() {
    let (f1, _) = matsubdiff::repro::hinge_split();
    let mut r = rng(99);
    for _ in 0..1000 {
        let v = random_sym(&mut r, 2, 2.0);
        if v.get(0, 1).abs() <= 1e-6 {
            continue;
        }
        assert!(check_subgradient(&f1, &[0.0], &MatTuple::from(v), 1, 0).unwrap().is_falsified());
    }
}

#[test]
fn order_ball_bound_on_sampled_tuples() {
    let mut r = rng(5);
    let mut accepted = 0;
    while accepted < 1000 {
        let n = r.random_range(1..=3);
        let c: f64 = r.random_range(0.1..5.0);
        let x1 = random_sym(&mut r, n, c);
        let x2 = random_sym(&mut r, n, c);
        if x1.norm_fro() > c || x2.norm_fro() > c {
            continue;
        }
        // X = X1 + Y = X2 + Z needs X1 ⪯ X ⪯ X2
        if !loewner_leq(&x1, &x2, 0.0).unwrap().is_psd() {
            continue;
        }
        let iv = matsubdiff::Interval1D { left: x1.clone(), right: x2.clone() };
        let x: SymMat = sample_in_interval(&mut r, &iv);
        let ok = matsubdiff::symmat::order_ball_bound_check(c, &x1, &x2, &(&x - &x1), &(&x - &x2));
        assert_eq!(ok, Ok(true));
        accepted += 1;
    }
}
