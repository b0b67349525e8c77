use super::*;
use crate::arith::rat;
use crate::catalog::{catalog_entry, SerreCurveSpec};
use crate::groups::MatrixGroup;

fn serre(d: i64) -> CurveGalois {
    CurveGalois::Serre(SerreCurveSpec::from_discriminant(d).unwrap())
}

fn galois(id: &str) -> CurveGalois {
    catalog_entry(id).unwrap().galois
}

fn close(a: &DensityResult, b: &DensityResult) -> bool {
    (a.constant_f64() - b.constant_f64()).abs() < 1e-12
}

#[test]
fn serre_cyclic_generic_matches_closed_form() {
    for d in [5i64, 13, 17, -7, -3, -4, -8, 8, 12, -24] {
        let g = serre(d);
        let closed = density(&DensityProblem::Cyclic, &g, 2000, false).unwrap();
        let generic = density(&DensityProblem::Cyclic, &g, 2000, true).unwrap();
        assert_eq!(closed.correction, generic.correction, "D = {d}");
        assert!(close(&closed, &generic), "D = {d}");
    }
    // Odd D: 1 + (-1/5) prod -1/(|GL2(l)| - 1); l = 5 gives 1 + 1/2395.
    let r = density(&DensityProblem::Cyclic, &serre(5), 100, false).unwrap();
    assert_eq!(r.correction, rat(2396, 2395));
    let r = density(&DensityProblem::Cyclic, &serre(-4), 100, true).unwrap();
    assert_eq!(r.correction, rat(1, 1));
}

#[test]
fn serre_e_factors_match_generic() {
    let g = serre(-7);
    let r = density(&DensityProblem::Cyclic, &g, 100, true).unwrap();
    assert_eq!(r.e_factor(2), Some(&rat(-1, 5)));
    assert_eq!(r.e_factor(7), Some(&rat(-1, 2015)));
}

#[test]
fn serre_ap_generic_matches_closed_form() {
    for d in [5i64, -3, 12, -4, 8, -8, 24, -24, 40, -7] {
        let g = serre(d);
        let CurveGalois::Serre(s) = &g else {
            unreachable!()
        };
        for f in [3u64, 4, 5, 8, 12, 16, 20] {
            for a in 1..f {
                let p = DensityProblem::cyclic_ap(a as i64, f).unwrap();
                let closed = density(&p, &g, 500, false).unwrap();
                let generic = density(&p, &g, 500, true).unwrap();
                let tag = format!("D = {d}, a = {a}, f = {f}");
                assert_eq!(closed.vanishing, generic.vanishing, "{tag}");
                if crate::arith::gcd(a, f) > 1 {
                    continue;
                }
                for (l, _) in crate::arith::factor(f) {
                    assert_eq!(
                        generic.local(l).unwrap().delta,
                        serre_ap_delta(a, f, l, s),
                        "{tag}, l = {l}"
                    );
                }
                if let Some(e) = generic.e_factor(2) {
                    assert_eq!(e, &serre_ap_e2(a, f, s), "{tag}");
                }
                assert_eq!(closed.correction, generic.correction, "{tag}");
                assert!(close(&closed, &generic), "{tag}");
            }
        }
    }
}

#[test]
fn ap_with_f_one_is_cyclic() {
    let g = galois("curve-17");
    let a = density(&DensityProblem::Cyclic, &g, 1000, false).unwrap();
    let b = density(&DensityProblem::cyclic_ap(0, 1).unwrap(), &g, 1000, false).unwrap();
    assert_eq!(a.correction, b.correction);
    assert!(close(&a, &b));
}

#[test]
fn koblitz_local_counts() {
    // |{A in GL2(l) : det(I - A) = 0}| = l^3 - 2l.
    for l in [2u64, 3, 5, 7] {
        let g = MatrixGroup::full_gl2(l as u32).unwrap();
        let bad = g
            .elements()
            .filter(|m| (1 + m.det() as u64 + l - m.trace() as u64).is_multiple_of(l))
            .count() as u64;
        assert_eq!(bad, l * l * l - 2 * l, "l = {l}");
    }
}

#[test]
fn koblitz_e_factors_match_generic() {
    // D = 21 brings in 2, 3, 7; D = 5 brings in 5.
    for (d, primes) in [(21i64, vec![2u64, 3, 7]), (5, vec![2, 5])] {
        let g = serre(d);
        let p = DensityProblem::koblitz(1).unwrap();
        let generic = density(&p, &g, 2000, true).unwrap();
        let closed = density(&p, &g, 2000, false).unwrap();
        for l in primes {
            assert_eq!(generic.e_factor(l), Some(&koblitz_e(l)), "D = {d}, l = {l}");
        }
        assert_eq!(closed.correction, generic.correction);
        assert!(close(&closed, &generic), "D = {d}");
    }
    assert_eq!(koblitz_e(2), rat(1, 1));
}

#[test]
fn lang_trotter_constant() {
    let r = density(
        &DensityProblem::Cyclic,
        &galois("lang-trotter-11"),
        10_000,
        false,
    )
    .unwrap();
    assert_eq!(r.correction, rat(65996, 65995));
    assert!(
        (r.constant_f64() - 0.611597).abs() < 2e-6,
        "{}",
        r.constant_f64()
    );
}

#[test]
fn catalog_vanishing() {
    let g4 = galois("curve-4x4");
    let g17 = galois("curve-17");
    for f in 2..=34u64 {
        let four = density_ap_family(f, &g4, 100, false).unwrap();
        let seventeen = density_ap_family(f, &g17, 100, false).unwrap();
        for (r, r17) in four.into_iter().zip(seventeen) {
            let DensityProblem::CyclicAp { a, .. } = r.problem else {
                unreachable!()
            };
            assert_eq!(r.correction, rat(1, 1), "4x4 a = {a}, f = {f}");
            let zero = f % 4 == 0 && a % 4 == 1;
            assert_eq!(
                r.vanishing == Vanishing::Local(2),
                zero,
                "4x4 a = {a}, f = {f}"
            );
            let r = r17;
            let zero = f % 17 == 0 && crate::arith::legendre(a as i64, 17) == 1;
            assert_eq!(
                r.vanishing == Vanishing::Entanglement,
                zero,
                "17 a = {a}, f = {f}"
            );
            assert_eq!(r.constant.is_zero(), zero);
            if f % 17 != 0 {
                assert_eq!(r.e_factor(17), Some(&rat(-1, 78335)));
            }
        }
    }
    let r = density(&DensityProblem::Cyclic, &g17, 100, false).unwrap();
    assert_eq!(r.correction, rat(78336, 78335));
    // The batch agrees with one-off calls.
    let batch = density_ap_family(12, &g17, 100, false).unwrap();
    for (r, a) in batch.iter().zip([1, 5, 7, 11]) {
        let single = density(&DensityProblem::cyclic_ap(a, 12).unwrap(), &g17, 100, false).unwrap();
        assert_eq!(r.correction, single.correction);
        assert_eq!(r.constant, single.constant);
    }
}

#[test]
fn family6_constant() {
    let r = density(
        &DensityProblem::Cyclic,
        &galois("family6-example"),
        10_000,
        false,
    )
    .unwrap();
    assert_eq!(r.path, Path::NonAbelianBlock);
    assert!(
        (r.constant_f64() - 0.831066).abs() < 1e-6,
        "{}",
        r.constant_f64()
    );
}

#[test]
fn degenerate_ap() {
    let g = serre(5);
    let r = density(&DensityProblem::cyclic_ap(2, 4).unwrap(), &g, 100, false).unwrap();
    assert_eq!(r.vanishing, Vanishing::Local(2));
    assert!(ap_is_degenerate(2, 4));
    assert!(density(&DensityProblem::Cyclic, &galois("curve-17"), 13, false).is_err());
    assert!(DensityProblem::koblitz(0).is_err());
}

#[test]
fn artin_five() {
    let a = artin_classical(5, 10_000, 100_000).unwrap();
    assert_eq!(a.correction, rat(20, 19));
    let diff = (a.constant.mid() - a.sum_head).abs();
    assert!(diff <= a.sum_tail + a.constant.width(), "{diff}");
    // Artin's constant for g = 2.
    let two = artin_classical(2, 100_000, 10).unwrap();
    assert!((two.constant.mid() - 0.3739558136).abs() < 3e-5);
    assert!(artin_classical(4, 100, 100).unwrap().constant.is_zero());
    assert!(artin_classical(-1, 100, 100).is_err());
}

#[test]
fn result_json() {
    let r = density(&DensityProblem::Cyclic, &serre(5), 100, false).unwrap();
    let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(v["problem"]["kind"], "cyclic");
    assert_eq!(v["correction"], "2396/2395");
    assert_eq!(v["truncation_L"], 100);
    assert_eq!(v["e_factors"]["2"], "-1/5");
}
