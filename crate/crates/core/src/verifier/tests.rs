use super::*;
use crate::arith::gcd;
use crate::catalog::{catalog_entries, WeierstrassCurve};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn curve(a: [i64; 5]) -> WeierstrassCurve {
    WeierstrassCurve::new(a).unwrap()
}

/// Every affine point, by enumerating all pairs.
fn points(e: &FpCurve) -> Vec<Point> {
    let p = e.p;
    let mut out = vec![None];
    for x in 0..p {
        for y in 0..p {
            if (y * y) % p == e.rhs(x) {
                out.push(Some((x, y)));
            }
        }
    }
    out
}

/// Exponent of the group from the order of every point.
fn exponent(e: &FpCurve) -> u64 {
    let pts = points(e);
    let n = pts.len() as u64;
    let order = |pt: Point| {
        let mut k = 1u64;
        let mut q = pt;
        while q.is_some() {
            q = e.add(q, pt);
            k += 1;
        }
        k
    };
    pts.iter().fold(1, |acc, &pt| {
        let o = order(pt);
        assert_eq!(n % o, 0);
        acc / gcd(acc, o) * o
    })
}

#[test]
fn sieve_ranges() {
    let r = PrimeRange::new(2, 10, vec![]).unwrap();
    assert_eq!(sieve(&r).collect::<Vec<_>>(), vec![2, 3, 5, 7]);
    let r = PrimeRange::new(2, 20, vec![7, 2, 3]).unwrap();
    assert_eq!(sieve(&r).collect::<Vec<_>>(), vec![5, 11, 13, 17, 19]);
    let r = PrimeRange::new(2, 1_000_000, vec![]).unwrap();
    assert_eq!(sieve(&r).count(), 78498);
    // Trial division oracle across a segment boundary.
    let lo = SEGMENT - 500;
    let r = PrimeRange::new(lo, SEGMENT + 500, vec![]).unwrap();
    let naive: Vec<u64> = (lo..=SEGMENT + 500)
        .filter(|&n| (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0))
        .collect();
    assert_eq!(sieve(&r).collect::<Vec<_>>(), naive);
    assert!(PrimeRange::new(5, 4, vec![]).is_err());
}

#[test]
fn count_over_f5() {
    // y^2 = x^3 + x over F_5: brute force over the 25 affine pairs.
    let e = FpCurve { p: 5, a: 1, b: 0 };
    assert_eq!(points(&e).len() as u64, naive_count(&e));
    assert_eq!(naive_count(&e), 4);
}

#[test]
fn backends_agree() {
    let e = curve([0, -1, 1, -10, -20]);
    let model = ShortModel::new(&e);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0;
    while checked < 200 {
        let p = rng.random_range(5..10_000u64);
        if !crate::arith::is_prime(p) || !model.is_good(p) {
            continue;
        }
        let fp = model.at(p).unwrap();
        let naive = naive_count(&fp);
        match bsgs_count(&fp, 99) {
            Ok(n) => assert_eq!(n, naive, "p = {p}"),
            // The twist argument can fail only in tiny fields.
            Err(_) => assert!(p <= 229, "p = {p}"),
        }
        checked += 1;
    }
}

#[test]
fn twist_and_hasse() {
    let e = curve([1, -1, 1, -91, -310]);
    let model = ShortModel::new(&e);
    for p in [10_007u64, 100_003, 999_983] {
        let fp = model.at(p).unwrap();
        let n = bsgs_count(&fp, 3).unwrap();
        let nt = bsgs_count(&fp.twist(), 3).unwrap();
        assert_eq!(n + nt, 2 * p + 2);
        assert!(check_hasse(p, n).is_ok());
    }
    assert!(check_hasse(101, 150).is_err());
    assert!(point_count(&e, 2, 0).is_err());
    assert!(point_count(&e, 17, 0).is_err());
}

#[test]
fn cyclicity_matches_group_structure() {
    for entry in catalog_entries().unwrap() {
        let model = ShortModel::new(&entry.curve);
        for p in crate::arith::primes_up_to(300) {
            if !model.is_good(p) {
                continue;
            }
            let fp = model.at(p).unwrap();
            let n = naive_count(&fp);
            let c = is_cyclic(&fp, n).unwrap();
            assert_eq!(c.cyclic, exponent(&fp) == n, "{} p = {p}", entry.id);
            if let Some(l) = c.witness {
                assert_eq!(n % (l * l), 0);
            }
        }
    }
}

#[test]
fn full_two_torsion_witness() {
    // y^2 = (x - 1)(x - 2)(x + 3) = x^3 - 7x + 6 splits everywhere.
    let e = curve([0, 0, 0, -7, 6]);
    let model = ShortModel::new(&e);
    let fp = model.at(13).unwrap();
    let n = naive_count(&fp);
    assert_eq!(n % 4, 0);
    let c = is_cyclic(&fp, n).unwrap();
    assert_eq!(c.witness, Some(2));
    assert!(!c.cyclic);
}

#[test]
fn division_polynomial_roots() {
    // Roots of psi_l are the x-coordinates of nonzero l-torsion points.
    let e = FpCurve { p: 101, a: 3, b: 7 };
    let pts = points(&e);
    for l in [3u64, 5] {
        let psi = division_polynomial(&e, l as usize);
        assert_eq!(psi.degree(), Some(((l * l - 1) / 2) as usize));
        let mut xs: Vec<u64> = pts
            .iter()
            .filter(|&&pt| pt.is_some() && e.mul(l, pt).is_none())
            .map(|pt| pt.unwrap().0)
            .collect();
        xs.sort_unstable();
        xs.dedup();
        let rational_roots = (0..e.p)
            .filter(|&x| psi.c.iter().rev().fold(0, |acc, &c| (acc * x + c) % e.p) == 0)
            .count();
        // Roots with y outside F_p belong to twist points, so only compare
        // when every root has a point.
        assert!(xs.len() <= rational_roots);
        assert_eq!(psi.count_roots(e.p), rational_roots);
    }
}

#[test]
fn census_small() {
    let e = curve([1, -1, 1, -91, -310]);
    let opts = CensusOptions::default();
    let r = census(&e, &DensityProblem::Cyclic, 1000, &opts).unwrap();
    assert_eq!(r.primes_total, 168);
    assert_eq!(r.good_primes, 168 - 3);
    assert_eq!(r.excluded, vec![2, 3, 17]);
    // Nothing qualifies below 5.
    let r0 = census(&e, &DensityProblem::Cyclic, 4, &opts).unwrap();
    assert_eq!((r0.good_primes, r0.observed), (0, 0.0));
    // Dirichlet: p = 2 mod 4 never happens for good p.
    let ap = DensityProblem::CyclicAp { a: 2, f: 4 };
    assert_eq!(census(&e, &ap, 5000, &opts).unwrap().matching, 0);
    // (2|17) = 1 and 17 | f: the constant vanishes and so do the counts.
    let ap = DensityProblem::CyclicAp { a: 2, f: 17 };
    assert_eq!(census(&e, &ap, 100_000, &opts).unwrap().matching, 0);
}

#[test]
fn census_is_deterministic_across_threads() {
    let e = curve([0, -1, 1, -10, -20]);
    let p = DensityProblem::Koblitz { t: 5 };
    let one = census(
        &e,
        &p,
        200_000,
        &CensusOptions {
            threads: 1,
            ..Default::default()
        },
    )
    .unwrap();
    let three = census(
        &e,
        &p,
        200_000,
        &CensusOptions {
            threads: 3,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(
        serde_json::to_string(&one).unwrap(),
        serde_json::to_string(&three).unwrap()
    );
}

#[test]
fn checkpoint_resume_and_dump() {
    let dir = tempfile::tempdir().unwrap();
    let e = curve([0, 0, 1, -1, 0]);
    let p = DensityProblem::Cyclic;
    let full = census(&e, &p, 50_000, &CensusOptions::default()).unwrap();
    // A checkpoint halfway through, as an interrupted run would leave it.
    let half = census(&e, &p, 20_000, &CensusOptions::default()).unwrap();
    let ck = dir.path().join("ck.json");
    let start = Checkpoint {
        curve: e.a,
        problem: p.clone(),
        x: 50_000,
        seed: 0,
        next_lo: 20_001,
        tally: Tally {
            primes: half.primes_total,
            good: half.good_primes,
            progression: 0,
            matching: half.matching,
            witnesses: half.witnesses.clone(),
        },
    };
    write_checkpoint(&ck, &start).unwrap();
    let dump = dir.path().join("dump.csv");
    let opts = CensusOptions {
        checkpoint: Some(ck.clone()),
        dump: Some(dump.clone()),
        ..Default::default()
    };
    let resumed = census(&e, &p, 50_000, &opts).unwrap();
    assert_eq!(resumed, full);
    let rows = fs::read_to_string(&dump).unwrap();
    assert!(rows.lines().next().unwrap().starts_with("20011,"));
    // A checkpoint from another run is refused.
    assert!(census(&e, &p, 60_000, &opts).is_err());
}

#[test]
fn li2_against_substitution() {
    // Independent oracle: integrate in u = log t with Simpson's rule.
    let x = 1e6f64;
    let (v, err) = li2(x);
    let (a, b) = (2f64.ln(), x.ln());
    let n = 20_000;
    let h = (b - a) / n as f64;
    let g = |u: f64| u.exp() / (u * u);
    let mut s = g(a) + g(b);
    for i in 1..n {
        s += g(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let simpson = s * h / 3.0;
    assert!(
        (v - simpson).abs() <= err + 1e-6 * simpson,
        "{v} vs {simpson}"
    );
    assert!(err < 1.0);
}

#[test]
fn compare_checks_problem() {
    let e = curve([1, -1, 1, -91, -310]);
    let report = census(&e, &DensityProblem::Cyclic, 1000, &CensusOptions::default()).unwrap();
    let galois = crate::catalog::catalog_entry("curve-17").unwrap().galois;
    let ap = crate::density::density(
        &DensityProblem::CyclicAp { a: 2, f: 17 },
        &galois,
        100,
        false,
    )
    .unwrap();
    assert!(compare(&report, &ap).is_err());
    let cyc = crate::density::density(&DensityProblem::Cyclic, &galois, 100, false).unwrap();
    let c = compare(&report, &cyc).unwrap();
    assert!((c.deviation - (c.observed - c.predicted)).abs() < 1e-15);
}

#[test]
fn sylow_certificate_matches_division_polynomials() {
    // For small l both methods apply; compare on every candidate prime.
    let mut seen = [0usize; 2];
    for entry in catalog_entries().unwrap() {
        let model = ShortModel::new(&entry.curve);
        for p in crate::arith::primes_up_to(20_000) {
            if !model.is_good(p) {
                continue;
            }
            let fp = model.at(p).unwrap();
            let n = naive_count(&fp);
            for l in [3u64, 5, 7] {
                if !n.is_multiple_of(l * l) || (p - 1) % l != 0 {
                    continue;
                }
                let full = full_torsion(&fp, l);
                assert_eq!(
                    sylow_rank_two(&fp, l, n, 7).unwrap(),
                    full,
                    "{} p = {p} l = {l}",
                    entry.id
                );
                seen[full as usize] += 1;
            }
        }
    }
    assert!(seen[0] > 0 && seen[1] > 0, "{seen:?}");
}

#[test]
fn sylow_certificate_matches_exponent() {
    // Small fields where some l past the division-polynomial cutoff divides
    // N twice and p - 1 once.
    let mut checked = 0;
    for (a, b) in [(-1i64, 0i64), (0, 1), (3, 7), (-7, 6), (2, 5)] {
        for p in crate::arith::primes_up_to(3000).into_iter().skip(2) {
            let fp = FpCurve {
                p,
                a: a.rem_euclid(p as i64) as u64,
                b: b.rem_euclid(p as i64) as u64,
            };
            if (4 * fp.a % p * fp.a % p * fp.a + 27 * fp.b % p * fp.b).is_multiple_of(p) {
                continue;
            }
            let n = naive_count(&fp);
            let big: Vec<u64> = crate::arith::factor(n)
                .into_iter()
                .filter(|&(l, k)| l > DIVISION_POLY_MAX_L && k >= 2 && (p - 1) % l == 0)
                .map(|(l, _)| l)
                .collect();
            if big.is_empty() {
                continue;
            }
            let c = is_cyclic(&fp, n).unwrap();
            assert_eq!(c.cyclic, exponent(&fp) == n, "p = {p} a = {a} b = {b}");
            checked += 1;
        }
    }
    assert!(checked > 0);
}
