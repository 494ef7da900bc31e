//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the measured scope. Every tolerance here is exact equality at the
//! stated precision; runtime budgets are asserted where stated.

use std::time::Instant;

use mw_cli::{run, Job, SCHEMA_VERSION};
use mw_core::cohomology::{lift_independence_on_cohomology, Exactness, GradedComplex};
use mw_core::forms::{Form, RingMap};
use mw_core::homotopy::{build_strong_homotopy, check_homotopy_identity};
use mw_core::{LaurentRing, PrimeCtx};
use rand::SeedableRng;

use mw_cli::gen;

fn job(suite: &str, p: u64, n: u32, seed: u64, cases: u32) -> Job {
    Job {
        schema: SCHEMA_VERSION,
        suite: suite.into(),
        p,
        n,
        seed,
        cases: Some(cases),
        witt_length: None,
        geometry: None,
        window: None,
    }
}

fn assert_all_passed(j: &Job) -> usize {
    let report = run(j).expect("suite runs");
    let failed: Vec<_> = report
        .body
        .cases
        .iter()
        .filter(|c| !c.passed())
        .map(|c| format!("{}: {:?}", c.id, c.detail))
        .collect();
    assert!(
        failed.is_empty(),
        "suite {} p={} failed cases: {failed:?}",
        j.suite,
        j.p
    );
    report.body.summary.total
}

#[test]
fn criterion_1_homotopy_identity() {
    let start = Instant::now();
    let mut checked = 0usize;
    for &p in &[2u64, 3, 5] {
        for n in 2..=4u32 {
            let rings = [
                gen::ring_with(p, n, &[("x", true)]).unwrap(),
                gen::ring_with(p, n, &[("x", true), ("y", false)]).unwrap(),
            ];
            let mut rng = gen::Rng8::seed_from_u64(1000 + p * 10 + n as u64);
            for k in 0..60 {
                let ring = &rings[k % 2];
                let q = k % (ring.nvars() + 1);
                let max_deg = (p * p).min(6) as i32;
                let tf = gen::random_tform(&mut rng, ring, q, max_deg);
                check_homotopy_identity(&tf).expect("h_p - h_0 = dL + Ld must hold exactly");
                checked += 1;
            }
        }
    }
    assert!(checked >= 500, "only {checked} forms checked");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 10, "runtime budget exceeded: {elapsed:?}");
    println!("ACCEPTANCE 1: PASS homotopy identity exact on {checked} random forms in {elapsed:?}");
}

#[test]
fn criterion_2_strong_homotopy() {
    let start = Instant::now();
    // the fully worked fixture: psi1 = x^p, psi2 = x^p + p x, H(dx) = p x
    for &p in &[2u64, 3] {
        let ring = gen::ring_with(p, 4, &[("x", false)]).unwrap();
        let xp = ring.var(0).pow(p as u32).unwrap();
        let psi1 = RingMap::new(&ring, &ring, vec![xp.clone()]).unwrap();
        let psi2 = RingMap::new(
            &ring,
            &ring,
            vec![xp.add(&ring.var(0).scale_int(p as i128)).unwrap()],
        )
        .unwrap();
        let cert = build_strong_homotopy(&psi1, &psi2, None).unwrap();
        let dx = Form::term(&ring.one(), &[0]);
        let ch = cert.chain_homotopy(&dx).unwrap();
        assert!(ch.verified);
        let px = Form::from_poly(&ring.var(0).scale_int(p as i128));
        assert!(ch.h_omega.eq_mod(&px, cert.check_prec()), "H(dx) != p x");
    }
    // randomized congruent pairs on 1-3 variable Laurent algebras
    let mut pairs = 0usize;
    for &p in &[2u64, 3, 5] {
        let n = 3u32;
        let var_sets: [&[(&str, bool)]; 3] = [
            &[("x", true)],
            &[("x", true), ("y", false)],
            &[("x", true), ("y", false), ("z", false)],
        ];
        for vars in var_sets {
            let ring = gen::ring_with(p, n, vars).unwrap();
            let mut rng = gen::Rng8::seed_from_u64(2000 + p + vars.len() as u64);
            for k in 0..23 {
                let max_deg = 3;
                let psi1 = gen::random_ring_map(&mut rng, &ring, max_deg);
                let psi2 = gen::perturb_mod_p(&mut rng, &psi1, max_deg);
                let cert = build_strong_homotopy(&psi1, &psi2, None).unwrap();
                let q = 1 + k % ring.nvars();
                let omega = gen::random_form(&mut rng, &ring, q, max_deg);
                let ch = cert.chain_homotopy(&omega).expect("psi2* - psi1* = dH + Hd");
                assert!(ch.verified);
                assert_eq!(ch.checked_prec, n - 1);
                pairs += 1;
            }
        }
    }
    assert!(pairs >= 200, "only {pairs} pairs checked");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 30, "runtime budget exceeded: {elapsed:?}");
    println!("ACCEPTANCE 2: PASS strong homotopy verified on {pairs} congruent pairs plus the worked fixture in {elapsed:?}");
}

#[test]
fn criterion_3_witt_laws() {
    let start = Instant::now();
    let mut total = 0usize;
    for &p in &[2u64, 3, 5] {
        let mut j = job("witt-laws", p, 3, 300 + p, 200);
        j.witt_length = Some(4);
        total += assert_all_passed(&j);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 30, "runtime budget exceeded: {elapsed:?}");
    println!("ACCEPTANCE 3: PASS ghost homomorphism, S1 identity and V-F relations over {total} cases in {elapsed:?}");
}

#[test]
fn criterion_4_comparison_map() {
    let start = Instant::now();
    let mut total = 0usize;
    for &(p, n_witt) in &[(2u64, 4usize), (3, 4), (5, 3)] {
        let mut j = job("comparison", p, 3, 400 + p, 200);
        j.witt_length = Some(n_witt);
        total += assert_all_passed(&j);
    }
    // the functoriality square on the phi: x -> x^2 fixture
    let mut j = job("functoriality", 3, 3, 404, 25);
    j.witt_length = Some(3);
    total += assert_all_passed(&j);
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 30, "runtime budget exceeded: {elapsed:?}");
    println!("ACCEPTANCE 4: PASS t_f ring homomorphism, Teichmuller slots, functoriality square and NotDivisible rejection over {total} cases in {elapsed:?}");
}

#[test]
fn criterion_5_overconvergence() {
    let start = Instant::now();
    let mut total = 0usize;
    for &p in &[2u64, 3] {
        let mut j = job("overconvergence", p, 3, 500 + p, 100);
        j.witt_length = Some(4); // slots i < 4
        total += assert_all_passed(&j);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 10, "runtime budget exceeded: {elapsed:?}");
    println!("ACCEPTANCE 5: PASS degree bounds deg(slot_i) <= deg(a) p^i over {total} cases in {elapsed:?}");
}

#[test]
fn criterion_6_affine_line_torsion() {
    let start = Instant::now();
    let ctx = PrimeCtx::new(2, 3).unwrap();
    let ring = LaurentRing::new(ctx, &[("T", false)]).unwrap();
    let cx = GradedComplex::new(&ring, 8).unwrap();
    let report = cx.cohomology().unwrap();
    let expected_orders = [1u64, 2, 1, 4, 1, 2, 1, 8];
    for m in 1..=8i64 {
        let divisors = report.blocks.get(&(1, vec![m])).cloned().unwrap_or_default();
        let order: u64 = divisors.iter().map(|e| 2u64.pow(*e)).product();
        assert_eq!(order, expected_orders[m as usize - 1], "H^1 block {m}");
    }
    // exactness witness: T^(p-1) dT has order p with eta = T^p
    let omega = Form::term(&ring.var(0), &[0]);
    match cx.exactness_witness(&omega).unwrap() {
        Exactness::NotExact { order_exp, scaled_primitive } => {
            assert_eq!(order_exp, 1);
            assert_eq!(scaled_primitive, Form::from_poly(&ring.parse("T^2").unwrap()));
            assert!(scaled_primitive
                .d()
                .unwrap()
                .eq_mod(&omega.scale_int(2), 3));
        }
        other => panic!("expected NotExact(p), got {other:?}"),
    }
    // and the same picture through the CLI suite
    let mut j = job("cohomology", 2, 3, 0, 0);
    j.geometry = Some("A1".into());
    j.window = Some(8);
    assert_all_passed(&j);
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 5, "runtime budget exceeded: {elapsed:?}");
    println!("ACCEPTANCE 6: PASS affine-line H^1 orders 1,2,1,4,1,2,1,8 and NotExact(p) witness with eta = T^p in {elapsed:?}");
}

#[test]
fn criterion_7_torus_cohomology() {
    let start = Instant::now();
    for &p in &[2u64, 3] {
        let ctx = PrimeCtx::new(p, 3).unwrap();
        let ring = LaurentRing::new(ctx, &[("x", true)]).unwrap();
        let cx = GradedComplex::new(&ring, 8).unwrap();
        let report = cx.cohomology().unwrap();
        // the class dx/x spans a full free summand
        assert_eq!(report.blocks.get(&(1, vec![0])), Some(&vec![3]), "p={p} dlog block");
        for m in -8i64..=8 {
            if m == 0 {
                continue;
            }
            let divisors = report.blocks.get(&(1, vec![m])).cloned().unwrap_or_default();
            let got: u32 = divisors.iter().sum();
            let mut v = 0u32;
            let mut mm = m.unsigned_abs();
            while mm % p == 0 {
                v += 1;
                mm /= p;
            }
            assert_eq!(got, v.min(3), "p={p} block {m}");
        }
        let mut j = job("cohomology", p, 3, 0, 0);
        j.geometry = Some("Gm".into());
        j.window = Some(8);
        assert_all_passed(&j);
    }
    println!(
        "ACCEPTANCE 7: PASS torus H^1 free summand at dx/x and torsion p^min(v_p(m), N) in {:?}",
        start.elapsed()
    );
}

#[test]
fn criterion_8_lift_independence() {
    let start = Instant::now();
    let p = 2u64;
    let n = 3u32;
    let ctx = PrimeCtx::new(p, n).unwrap();
    let ring = LaurentRing::new(ctx, &[("T", false)]).unwrap();
    let src = GradedComplex::new(&ring, 8).unwrap();
    let tgt = GradedComplex::new(&ring, 24).unwrap();
    let sq = ring.parse("T^2").unwrap();
    let phi1 = RingMap::new(&ring, &ring, vec![sq.clone()]).unwrap();
    let phi2 = RingMap::new(
        &ring,
        &ring,
        vec![sq.add(&ring.parse("2*T^3").unwrap()).unwrap()],
    )
    .unwrap();
    let report = lift_independence_on_cohomology(&phi1, &phi2, &src, &tgt).unwrap();
    assert_eq!(report.checked_prec, n - 1);
    assert!(!report.classes.is_empty());
    let nontrivial = report.classes.iter().filter(|c| !c.difference_zero).count();
    assert!(nontrivial > 0, "fixture should produce nontrivial differences");
    assert!(report
        .classes
        .iter()
        .all(|c| c.homotopy_verified && c.solver_verified));
    println!(
        "ACCEPTANCE 8: PASS lift independence on {} classes ({} nontrivial), homotopy + solver agree at mod p^{} in {:?}",
        report.classes.len(),
        nontrivial,
        report.checked_prec,
        start.elapsed()
    );
}

#[test]
fn criterion_9_determinism() {
    let suites: &[(&str, Option<&str>)] = &[
        ("witt-laws", None),
        ("homotopy", None),
        ("comparison", None),
        ("functoriality", None),
        ("cohomology", Some("A1")),
        ("overconvergence", None),
        ("all", None),
    ];
    for (suite, geometry) in suites {
        let mut j = job(suite, 3, 3, 77, 20);
        j.geometry = geometry.map(|s| s.to_string());
        j.window = geometry.map(|_| 6);
        let a = run(&j).unwrap();
        let b = run(&j).unwrap();
        for format in [mw_cli::Format::Json, mw_cli::Format::Text] {
            assert_eq!(
                mw_cli::emit(&a.body, format),
                mw_cli::emit(&b.body, format),
                "suite {suite} not byte-identical"
            );
        }
    }
    println!("ACCEPTANCE 9: PASS byte-identical report bodies across reruns of every suite");
}
