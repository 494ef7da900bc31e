//! The randomized verification suites behind `mwverify run`.

use mw_core::cohomology::{lift_independence_on_cohomology, Exactness, GradedComplex};
use mw_core::forms::{Form, RingMap};
use mw_core::frobenius::{functoriality_check, ComparisonMap, FrobLift};
use mw_core::homotopy::{build_strong_homotopy, check_homotopy_identity};
use mw_core::{Error, LaurentRing, WittVec};
use rand::{Rng, SeedableRng};
use serde_json::json;

use crate::gen::{self, Rng8};
use crate::{CaseResult, CliError, Job};

pub fn dispatch(job: &Job) -> Result<Vec<CaseResult>, CliError> {
    match job.suite.as_str() {
        "witt-laws" => witt_laws(job),
        "homotopy" => homotopy(job),
        "comparison" => comparison(job),
        "functoriality" => functoriality(job),
        "cohomology" => cohomology(job),
        "overconvergence" => overconvergence(job),
        "all" => all_suites(job),
        other => Err(CliError::JobParse(format!("unknown suite `{other}`"))),
    }
}

pub fn precision_note(job: &Job) -> String {
    match job.suite.as_str() {
        "homotopy" => format!(
            "working precision p^{}; identities and chain homotopies exact mod p^{}",
            job.n + 1,
            job.n
        ),
        "witt-laws" | "comparison" => format!(
            "slot m asserted mod p^(ledger[m]); published slots exact mod p^{} via guard digits",
            job.n
        ),
        "cohomology" => format!(
            "elementary divisors exact, capped at p^{}; witnesses verified mod p^{}",
            job.n, job.n
        ),
        _ => format!("equalities asserted exactly mod p^{}", job.n),
    }
}

fn setup<T>(r: Result<T, Error>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Setup(e.to_string()))
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn poly_ring(job: &Job, extra_prec: u32) -> Result<LaurentRing, CliError> {
    gen::ring_with(job.p, job.n + extra_prec, &[("x", false)]).map_err(CliError::Setup)
}

fn laurent_ring(job: &Job, extra_prec: u32) -> Result<LaurentRing, CliError> {
    gen::ring_with(job.p, job.n + extra_prec, &[("x", true)]).map_err(CliError::Setup)
}

fn rng_for(job: &Job) -> Rng8 {
    Rng8::seed_from_u64(job.seed)
}

// ---- witt-laws ----

fn witt_laws(job: &Job) -> Result<Vec<CaseResult>, CliError> {
    let cases = job.cases.unwrap_or(200) as usize;
    let n_witt = job.witt_length.unwrap_or(3);
    let ring = poly_ring(job, 0)?;
    // a bare ghost round-trip on length n needs n digits of precision
    let guard_ring = poly_ring(job, (n_witt as u32).saturating_sub(1))?;
    let mut rng = rng_for(job);
    let mut out = Vec::with_capacity(cases + 1);
    for k in 0..cases {
        let r = witt_laws_case(&mut rng, &ring, &guard_ring, n_witt);
        out.push(CaseResult::from_check(format!("case-{k:04}"), r));
    }
    if job.p <= 3 {
        out.push(CaseResult::from_check("s1-universal", s1_universal(job.p, job.n)));
    }
    Ok(out)
}

fn witt_laws_case(
    rng: &mut Rng8,
    ring: &LaurentRing,
    guard_ring: &LaurentRing,
    n: usize,
) -> Result<(), String> {
    let mut run = || -> Result<Result<(), String>, Error> {
        let u = gen::random_witt(rng, ring, n);
        let v = gen::random_witt(rng, ring, n);
        // ghost homomorphism for both operations
        for mul in [false, true] {
            let w = if mul { u.mul(&v)? } else { u.add(&v)? };
            let gw = w.ghost()?;
            let gu = u.ghost()?;
            let gv = v.ghost()?;
            for m in 0..n {
                let expected = if mul {
                    gu.component(m).mul(gv.component(m))?
                } else {
                    gu.component(m).add(gv.component(m))?
                };
                let prec = gw.prec()[m].min(gu.prec()[m]).min(gv.prec()[m]);
                if !gw.component(m).eq_mod(&expected, prec) {
                    return Ok(Err(format!(
                        "ghost {} mismatch at slot {m}: u={} v={}",
                        if mul { "product" } else { "sum" },
                        u.to_json(),
                        v.to_json()
                    )));
                }
            }
        }
        // identities and the ghost round-trip
        if !u.add(&WittVec::zero(ring, n))?.eq_at_ledger(&u) {
            return Ok(Err(format!("u + 0 != u for u={}", u.to_json())));
        }
        if !u.mul(&WittVec::one(ring, n))?.eq_at_ledger(&u) {
            return Ok(Err(format!("u * 1 != u for u={}", u.to_json())));
        }
        let ug = gen::random_witt(rng, guard_ring, n);
        if !WittVec::ghost_invert(&ug.ghost()?)?.eq_at_ledger(&ug) {
            return Ok(Err(format!("ghost round-trip failed for u={}", ug.to_json())));
        }
        // FV = p and the projection formula
        let fv = u.verschiebung().frobenius()?;
        if !fv.eq_at_ledger(&u.mul_int(ring.ctx().p() as i128)?) {
            return Ok(Err(format!("FV != p on u={}", u.to_json())));
        }
        if n >= 2 {
            let short = u.truncate(n - 1);
            let lhs = short.verschiebung().mul(&v)?;
            let rhs = short.mul(&v.frobenius()?)?.verschiebung();
            if !lhs.eq_at_ledger(&rhs) {
                return Ok(Err(format!(
                    "V(u)w != V(u F(w)) for u={} w={}",
                    short.to_json(),
                    v.to_json()
                )));
            }
        }
        Ok(Ok(()))
    };
    run().map_err(|e| format!("unexpected error: {e}"))?
}

fn s1_universal(p: u64, n: u32) -> Result<(), String> {
    let run = || -> Result<Result<(), String>, Error> {
        let ring = gen::ring_with(p, n + 1, &[("X0", false), ("X1", false), ("Y0", false), ("Y1", false)])
            .map_err(Error::Parse)?;
        let u = WittVec::new(ring.clone(), vec![ring.var(0), ring.var(1)])?;
        let v = WittVec::new(ring.clone(), vec![ring.var(2), ring.var(3)])?;
        let s = u.add(&v)?;
        let binom = ring
            .var(0)
            .pow(p as u32)?
            .add(&ring.var(2).pow(p as u32)?)?
            .sub(&ring.var(0).add(&ring.var(2))?.pow(p as u32)?)?;
        let s1 = ring.var(1).add(&ring.var(3))?.add(&binom.div_exact_p(1)?)?;
        if !s.component(1).eq_mod(&s1, n) {
            return Ok(Err("universal S1 polynomial mismatch".into()));
        }
        Ok(Ok(()))
    };
    run().map_err(|e| format!("unexpected error: {e}"))?
}

// ---- homotopy ----

fn homotopy(job: &Job) -> Result<Vec<CaseResult>, CliError> {
    let cases = job.cases.unwrap_or(100) as usize;
    // one extra working digit pays for the division in the certificate, so
    // every reported equality is exact mod p^N
    let rings = [laurent_ring(job, 1)?, {
        gen::ring_with(job.p, job.n + 1, &[("x", true), ("y", false)]).map_err(CliError::Setup)?
    }];
    let mut rng = rng_for(job);
    let mut out = Vec::with_capacity(cases);
    for k in 0..cases {
        let ring = &rings[k % rings.len()];
        let r = homotopy_case(&mut rng, ring, job);
        out.push(CaseResult::from_check(format!("case-{k:04}"), r));
    }
    Ok(out)
}

fn homotopy_case(rng: &mut Rng8, ring: &LaurentRing, job: &Job) -> Result<(), String> {
    let max_deg = (job.p * job.p).min(6) as i32;
    let q = rng.gen_range(0..=ring.nvars());
    let tf = gen::random_tform(rng, ring, q, max_deg);
    if let Err(e) = check_homotopy_identity(&tf) {
        return Err(format!("homotopy identity: {e}"));
    }
    let psi1 = gen::random_ring_map(rng, ring, max_deg);
    let psi2 = gen::perturb_mod_p(rng, &psi1, max_deg);
    let cert = build_strong_homotopy(&psi1, &psi2, None).map_err(|e| e.to_string())?;
    let qf = rng.gen_range(1..=ring.nvars());
    let omega = gen::random_form(rng, ring, qf, max_deg);
    match cert.chain_homotopy(&omega) {
        Ok(ch) => check(ch.verified, || "chain homotopy not verified".into()),
        Err(e) => Err(format!("chain homotopy: {e}")),
    }
}

// ---- comparison ----

fn comparison(job: &Job) -> Result<Vec<CaseResult>, CliError> {
    let cases = job.cases.unwrap_or(200) as usize;
    let n_witt = job.witt_length.unwrap_or(3);
    let ring = poly_ring(job, n_witt as u32 - 1)?;
    let laurent = laurent_ring(job, n_witt as u32 - 1)?;
    let mut rng = rng_for(job);
    let mut out = Vec::with_capacity(cases + 2);
    for k in 0..cases {
        let r = if k % 4 == 3 {
            comparison_case(&mut rng, &laurent, n_witt)
        } else {
            comparison_case(&mut rng, &ring, n_witt)
        };
        out.push(CaseResult::from_check(format!("case-{k:04}"), r));
    }
    out.push(CaseResult::from_check(
        "teichmuller-power-lift",
        teichmuller_case(&ring, n_witt),
    ));
    out.push(CaseResult::from_check("non-lift-rejected", non_lift_case(&ring, n_witt)));
    Ok(out)
}

fn comparison_case(rng: &mut Rng8, ring: &LaurentRing, n: usize) -> Result<(), String> {
    let mut run = || -> Result<Result<(), String>, Error> {
        let p = ring.ctx().p();
        let lift = gen::random_frobenius_lift(rng, ring, p as i32);
        let cm = ComparisonMap::new(lift, n)?;
        let a = gen::random_poly(rng, ring, 3, 2);
        let b = gen::random_poly(rng, ring, 3, 2);
        let sum = cm.t_f(&a.add(&b)?)?;
        let sum2 = cm.t_f(&a)?.add(&cm.t_f(&b)?)?;
        if !sum.eq_at_ledger(&sum2) {
            return Ok(Err(format!("t_f not additive on a={a} b={b}")));
        }
        let prod = cm.t_f(&a.mul(&b)?)?;
        let prod2 = cm.t_f(&a)?.mul(&cm.t_f(&b)?)?;
        if !prod.eq_at_ledger(&prod2) {
            return Ok(Err(format!("t_f not multiplicative on a={a} b={b}")));
        }
        // slot 0 of t_f is the reduction mod p
        let t = cm.t_f(&a)?;
        let mod_p = ring.with_ctx(ring.ctx().with_precision(1)?);
        if t.component(0) != &a.reduce_to_ring(&mod_p) {
            return Ok(Err(format!("slot 0 of t_f differs from reduction on a={a}")));
        }
        Ok(Ok(()))
    };
    run().map_err(|e| format!("unexpected error: {e}"))?
}

fn teichmuller_case(ring: &LaurentRing, n: usize) -> Result<(), String> {
    let run = || -> Result<Result<(), String>, Error> {
        let p = ring.ctx().p() as u32;
        let lift = FrobLift::new(RingMap::new(ring, ring, vec![ring.var(0).pow(p)?])?)?;
        let cm = ComparisonMap::new(lift, n)?;
        for a in [ring.var(0), ring.var(0).pow(2)?, ring.var(0).pow(3)?] {
            let s = cm.s_f(&a)?;
            for i in 1..n {
                if !s.component(i).is_zero() {
                    return Ok(Err(format!("slot {i} nonzero for monomial {a}")));
                }
            }
        }
        Ok(Ok(()))
    };
    run().map_err(|e| format!("unexpected error: {e}"))?
}

fn non_lift_case(ring: &LaurentRing, n: usize) -> Result<(), String> {
    let fake = FrobLift::new_unchecked(RingMap::identity(ring));
    let cm = ComparisonMap::new(fake, n).map_err(|e| e.to_string())?;
    match cm.s_f(&ring.var(0)) {
        Err(Error::NotDivisible { .. }) => Ok(()),
        Err(e) => Err(format!("expected NotDivisible, got {e}")),
        Ok(_) => Err("non-Frobenius map was accepted".into()),
    }
}

// ---- functoriality ----

fn functoriality(job: &Job) -> Result<Vec<CaseResult>, CliError> {
    let cases = job.cases.unwrap_or(50) as usize;
    let n_witt = job.witt_length.unwrap_or(3);
    let ring = poly_ring(job, n_witt as u32 - 1)?;
    let mut rng = rng_for(job);
    let mut out = Vec::with_capacity(cases + 2);
    for k in 0..cases {
        let r = functoriality_case(&mut rng, &ring, n_witt);
        out.push(CaseResult::from_check(format!("case-{k:04}"), r));
    }
    out.push(CaseResult::from_check("phi-square-fixture", {
        square_fixture(&ring, n_witt)
    }));
    out.push(CaseResult::from_check("incompatible-rejected", {
        incompatible_fixture(&ring, n_witt)
    }));
    Ok(out)
}

fn power_lift(ring: &LaurentRing) -> Result<FrobLift, Error> {
    let p = ring.ctx().p() as u32;
    FrobLift::new(RingMap::new(ring, ring, vec![ring.var(0).pow(p)?])?)
}

fn functoriality_case(rng: &mut Rng8, ring: &LaurentRing, n: usize) -> Result<(), String> {
    let mut run = || -> Result<Result<(), String>, Error> {
        let cm = ComparisonMap::new(power_lift(ring)?, n)?;
        // monomial maps commute with the power lift
        let k = rng.gen_range(1..=3u32);
        let phi = RingMap::new(ring, ring, vec![ring.var(0).pow(k)?])?;
        let tests = vec![ring.var(0), gen::random_poly(rng, ring, 3, 2)];
        match functoriality_check(&cm, &cm, &phi, &tests) {
            Ok(_) => Ok(Ok(())),
            Err(e) => Ok(Err(e.to_string())),
        }
    };
    run().map_err(|e| format!("unexpected error: {e}"))?
}

fn square_fixture(ring: &LaurentRing, n: usize) -> Result<(), String> {
    let run = || -> Result<Result<(), String>, Error> {
        let cm = ComparisonMap::new(power_lift(ring)?, n)?;
        let phi = RingMap::new(ring, ring, vec![ring.var(0).pow(2)?])?;
        let tests = vec![ring.var(0), ring.parse("x^1 + 1")?, ring.var(0).pow(3)?];
        match functoriality_check(&cm, &cm, &phi, &tests) {
            Ok(report) if report.cases.len() == 3 => Ok(Ok(())),
            Ok(_) => Ok(Err("wrong number of functoriality cases".into())),
            Err(e) => Ok(Err(e.to_string())),
        }
    };
    run().map_err(|e| format!("unexpected error: {e}"))?
}

fn incompatible_fixture(ring: &LaurentRing, n: usize) -> Result<(), String> {
    let run = || -> Result<Result<(), String>, Error> {
        let cm = ComparisonMap::new(power_lift(ring)?, n)?;
        let phi = RingMap::new(ring, ring, vec![ring.parse("x^1 + 1")?])?;
        match functoriality_check(&cm, &cm, &phi, &[ring.var(0)]) {
            Err(Error::IncompatibleLifts(_)) => Ok(Ok(())),
            Err(e) => Ok(Err(format!("expected IncompatibleLifts, got {e}"))),
            Ok(_) => Ok(Err("shift map was accepted as compatible".into())),
        }
    };
    run().map_err(|e| format!("unexpected error: {e}"))?
}

// ---- cohomology ----

fn cohomology(job: &Job) -> Result<Vec<CaseResult>, CliError> {
    let geometry = job.geometry.as_deref().unwrap_or("A1");
    let window = job.window.unwrap_or_else(|| (job.p as i64).pow(3));
    let invertible = match geometry {
        "A1" => false,
        "Gm" => true,
        other => return Err(CliError::JobParse(format!("unknown geometry `{other}`"))),
    };
    let ring = gen::ring_with(job.p, job.n, &[("T", invertible)]).map_err(CliError::Setup)?;
    let cx = setup(GradedComplex::new(&ring, window))?;
    let report = setup(cx.cohomology())?;
    let mut out = Vec::new();

    // H^0 must be exactly the constants
    let h0: Vec<_> = report.blocks.iter().filter(|((q, _), _)| *q == 0).collect();
    out.push(CaseResult::from_check(
        "h0-constants",
        check(
            h0.len() == 1 && h0[0].0 == &(0, vec![0]) && h0[0].1 == &vec![job.n],
            || format!("H^0 blocks: {h0:?}"),
        ),
    ));

    // H^1 torsion orders match the closed form p^min(v_p(m), N)
    let lo = if invertible { -window } else { 1 };
    let mut table = Vec::new();
    for m in lo..=window {
        if m == 0 && !invertible {
            continue;
        }
        let divisors = report.blocks.get(&(1, vec![m])).cloned().unwrap_or_default();
        let total: u32 = divisors.iter().sum();
        let expected = if m == 0 {
            job.n
        } else {
            let mut v = 0u32;
            let mut mm = m.unsigned_abs();
            while mm % job.p == 0 && v < job.n {
                v += 1;
                mm /= job.p;
            }
            v.min(job.n)
        };
        table.push(json!({ "multidegree": m, "order_exponent": total }));
        out.push(CaseResult::from_check(
            format!("h1-block-{m}"),
            check(total == expected, || {
                format!("block {m}: got exponent {total}, expected {expected}")
            }),
        ));
    }
    out.push(CaseResult::pass_with("h1-orders-table", json!(table)));

    // exactness witnesses on the canonical classes
    out.push(CaseResult::from_check(
        "exactness-witness",
        exactness_fixture(&cx, invertible),
    ));

    if job.n >= 2 {
        out.push(CaseResult::from_check(
            "lift-independence",
            lift_independence_fixture(&ring, window),
        ));
    }

    // blockwise vs assembled complex on a small window
    out.push(CaseResult::from_check("blockwise-matches-assembled", {
        splitting_cross_check(&ring, window.min(3))
    }));

    Ok(out)
}

fn exactness_fixture(cx: &GradedComplex, invertible: bool) -> Result<(), String> {
    let ring = cx.ring().clone();
    let p = ring.ctx().p();
    let n = ring.ctx().precision();
    if invertible {
        // dT/T survives all of Z/p^N
        let dlog = Form::term(
            &ring.monomial(ring.ctx().one(), vec![-1]).map_err(|e| e.to_string())?,
            &[0],
        );
        match cx.exactness_witness(&dlog) {
            Ok(Exactness::NotExact { order_exp, .. }) if order_exp == n => Ok(()),
            Ok(other) => Err(format!("dT/T: unexpected outcome {other:?}")),
            Err(e) => Err(e.to_string()),
        }
    } else {
        // T^(p-1) dT has order exactly p, with eta = T^p
        let omega = Form::term(&ring.var(0).pow(p as u32 - 1).map_err(|e| e.to_string())?, &[0]);
        match cx.exactness_witness(&omega) {
            Ok(Exactness::NotExact { order_exp: 1, scaled_primitive }) => {
                let eta = Form::from_poly(&ring.var(0).pow(p as u32).map_err(|e| e.to_string())?);
                let d_eta = eta.d().map_err(|e| e.to_string())?;
                let scaled = omega.scale_int(p as i128);
                check(
                    scaled_primitive == eta && d_eta.eq_mod(&scaled, n),
                    || "eta != T^p or d(eta) != p omega".to_string(),
                )
            }
            Ok(other) => Err(format!("T^(p-1)dT: unexpected outcome {other:?}")),
            Err(e) => Err(e.to_string()),
        }
    }
}

fn lift_independence_fixture(ring: &LaurentRing, window: i64) -> Result<(), String> {
    let p = ring.ctx().p();
    let src_window = window.min(4);
    let src = GradedComplex::new(ring, src_window).map_err(|e| e.to_string())?;
    let tgt = GradedComplex::new(ring, 3 * src_window).map_err(|e| e.to_string())?;
    let sq = ring.var(0).pow(2).map_err(|e| e.to_string())?;
    let cube_p = ring.var(0).pow(3).map_err(|e| e.to_string())?.scale_int(p as i128);
    let phi1 = RingMap::new(ring, ring, vec![sq.clone()]).map_err(|e| e.to_string())?;
    let phi2 =
        RingMap::new(ring, ring, vec![sq.add(&cube_p).map_err(|e| e.to_string())?])
            .map_err(|e| e.to_string())?;
    match lift_independence_on_cohomology(&phi1, &phi2, &src, &tgt) {
        Ok(report) => check(
            report.classes.iter().all(|c| c.homotopy_verified && c.solver_verified),
            || "some class failed verification".to_string(),
        ),
        Err(e) => Err(e.to_string()),
    }
}

fn splitting_cross_check(ring: &LaurentRing, window: i64) -> Result<(), String> {
    let cx = GradedComplex::new(ring, window.max(1)).map_err(|e| e.to_string())?;
    for q in 0..=ring.nvars() {
        let mut blockwise: Vec<u32> = Vec::new();
        for m in cx.window_multidegrees() {
            blockwise.extend(cx.block_divisors(q, &m).map_err(|e| e.to_string())?);
        }
        blockwise.sort_unstable();
        let assembled = cx.assembled_divisors(q).map_err(|e| e.to_string())?;
        if blockwise != assembled {
            return Err(format!("degree {q}: blockwise {blockwise:?} vs assembled {assembled:?}"));
        }
    }
    Ok(())
}

// ---- overconvergence ----

fn overconvergence(job: &Job) -> Result<Vec<CaseResult>, CliError> {
    let cases = job.cases.unwrap_or(100) as usize;
    let n_witt = job.witt_length.unwrap_or(4);
    let ring = poly_ring(job, n_witt as u32 - 1)?;
    let laurent = laurent_ring(job, n_witt as u32 - 1)?;
    let mut rng = rng_for(job);
    let mut out = Vec::with_capacity(cases);
    for k in 0..cases {
        let ring = if k % 4 == 3 { &laurent } else { &ring };
        let r = overconvergence_case(&mut rng, ring, n_witt, job.p);
        out.push(CaseResult::from_check(format!("case-{k:04}"), r));
    }
    Ok(out)
}

fn overconvergence_case(rng: &mut Rng8, ring: &LaurentRing, n: usize, p: u64) -> Result<(), String> {
    let mut run = || -> Result<Result<(), String>, Error> {
        let lift = gen::random_frobenius_lift(rng, ring, p as i32);
        let cm = ComparisonMap::new(lift, n)?;
        let max_deg = (p * p) as i32;
        let a = gen::random_nonzero_poly(rng, ring, 4, max_deg / ring.nvars() as i32);
        match cm.overconvergence_profile(&a) {
            Ok(profile) => {
                for row in &profile {
                    if let (Some(d), Some(b)) = (row.degree, row.bound) {
                        if d > b {
                            return Ok(Err(format!("slot {} degree {d} > bound {b}", row.slot)));
                        }
                    }
                }
                Ok(Ok(()))
            }
            Err(e) => Ok(Err(format!("profile failed on a={a}: {e}"))),
        }
    };
    run().map_err(|e| format!("unexpected error: {e}"))?
}

// ---- all ----

fn all_suites(job: &Job) -> Result<Vec<CaseResult>, CliError> {
    let mut out = Vec::new();
    for (idx, suite) in ["witt-laws", "homotopy", "comparison", "functoriality", "cohomology", "overconvergence"]
        .iter()
        .enumerate()
    {
        let sub = Job {
            schema: job.schema,
            suite: suite.to_string(),
            p: job.p,
            n: job.n,
            seed: job.seed.wrapping_add(idx as u64),
            cases: job.cases.map(|c| (c / 4).max(1)),
            witt_length: job.witt_length,
            geometry: job.geometry.clone(),
            window: job.window,
        };
        let cases = dispatch(&sub)?;
        out.extend(cases.into_iter().map(|mut c| {
            c.id = format!("{suite}/{}", c.id);
            c
        }));
    }
    Ok(out)
}
