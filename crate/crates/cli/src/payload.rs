//! Subcommands that consume concrete payloads rather than seeded suites:
//! `homotopy-check`, `tf-map`, `overconv-profile` and `cohomology`.

use mw_core::cohomology::{Exactness, GradedComplex};
use mw_core::forms::{Form, RingMap};
use mw_core::frobenius::{ComparisonMap, FrobLift};
use mw_core::homotopy::build_strong_homotopy;
use mw_core::{LPoly, LaurentRing, PrimeCtx};
use serde::Deserialize;
use serde_json::json;

use crate::{make_body, CaseResult, CliError, Report, SCHEMA_VERSION};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenSpec {
    pub name: String,
    #[serde(default)]
    pub invertible: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormTermSpec {
    pub indices: Vec<u32>,
    pub coeff: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormSpec {
    pub degree: usize,
    pub terms: Vec<FormTermSpec>,
}

fn check_schema(schema: u32) -> Result<(), CliError> {
    if schema != SCHEMA_VERSION {
        return Err(CliError::JobParse(format!("unsupported schema {schema}")));
    }
    Ok(())
}

fn build_ring(p: u64, n: u32, generators: &[GenSpec]) -> Result<LaurentRing, CliError> {
    let ctx = PrimeCtx::new(p, n).map_err(|e| CliError::Setup(e.to_string()))?;
    let vars: Vec<(&str, bool)> = generators.iter().map(|g| (g.name.as_str(), g.invertible)).collect();
    LaurentRing::new(ctx, &vars).map_err(|e| CliError::Setup(e.to_string()))
}

fn parse_polys(ring: &LaurentRing, strings: &[String]) -> Result<Vec<LPoly>, CliError> {
    strings
        .iter()
        .map(|s| ring.parse(s).map_err(|e| CliError::JobParse(format!("`{s}`: {e}"))))
        .collect()
}

fn build_form(ring: &LaurentRing, spec: &FormSpec) -> Result<Form, CliError> {
    let mut out = Form::zero(ring, spec.degree);
    for term in &spec.terms {
        if term.indices.len() != spec.degree {
            return Err(CliError::JobParse(format!(
                "term has {} indices but the form has degree {}",
                term.indices.len(),
                spec.degree
            )));
        }
        let coeff = ring
            .parse(&term.coeff)
            .map_err(|e| CliError::JobParse(format!("`{}`: {e}", term.coeff)))?;
        out = out
            .add(&Form::term(&coeff, &term.indices))
            .map_err(|e| CliError::JobParse(e.to_string()))?;
    }
    Ok(out)
}

// ---- homotopy-check ----

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomotopyJob {
    pub schema: u32,
    pub p: u64,
    #[serde(rename = "N")]
    pub n: u32,
    pub generators: Vec<GenSpec>,
    pub psi1: Vec<String>,
    pub psi2: Vec<String>,
    #[serde(default)]
    pub forms: Vec<FormSpec>,
    #[serde(default)]
    pub t_window: Option<usize>,
}

pub fn homotopy_check(job: &HomotopyJob) -> Result<Report, CliError> {
    check_schema(job.schema)?;
    let start = std::time::Instant::now();
    let ring = build_ring(job.p, job.n, &job.generators)?;
    let psi1 = RingMap::new(&ring, &ring, parse_polys(&ring, &job.psi1)?)
        .map_err(|e| CliError::Setup(e.to_string()))?;
    let psi2 = RingMap::new(&ring, &ring, parse_polys(&ring, &job.psi2)?)
        .map_err(|e| CliError::Setup(e.to_string()))?;
    let mut cases = Vec::new();
    match build_strong_homotopy(&psi1, &psi2, job.t_window) {
        Ok(cert) => {
            cases.push(CaseResult::pass_with(
                "certificate",
                json!({
                    "phi": cert.phi().images().iter().map(|f| f.to_string()).collect::<Vec<_>>(),
                    "t_window": cert.checked_degree_window(),
                    "valid_mod_p_pow": cert.check_prec(),
                }),
            ));
            for (i, spec) in job.forms.iter().enumerate() {
                let id = format!("form-{i:03}");
                match build_form(&ring, spec) {
                    Ok(omega) => match cert.chain_homotopy(&omega) {
                        Ok(ch) => cases.push(CaseResult::pass_with(
                            id,
                            json!({
                                "h_omega": ch.h_omega.to_json(),
                                "difference": ch.difference.to_json(),
                                "checked_mod_p_pow": ch.checked_prec,
                            }),
                        )),
                        Err(e) => cases.push(CaseResult::fail(id, json!(e.to_string()))),
                    },
                    Err(e) => cases.push(CaseResult::fail(id, json!(e.to_string()))),
                }
            }
        }
        Err(e) => cases.push(CaseResult::fail("certificate", json!(e.to_string()))),
    }
    let note = format!(
        "certificate identities exact mod p^{}",
        job.n.saturating_sub(1).max(1)
    );
    let body = make_body("homotopy-check", job.p, job.n, 0, note, cases);
    Ok(Report { body, wall_ms: start.elapsed().as_millis() })
}

// ---- tf-map / overconv-profile ----

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonJob {
    pub schema: u32,
    pub p: u64,
    #[serde(rename = "N")]
    pub n: u32,
    pub witt_length: usize,
    pub generators: Vec<GenSpec>,
    pub frobenius: Vec<String>,
    pub inputs: Vec<String>,
}

fn comparison_map(job: &ComparisonJob) -> Result<(LaurentRing, ComparisonMap), CliError> {
    let m = job.n + job.witt_length as u32 - 1;
    let ring = build_ring(job.p, m, &job.generators)?;
    let images = parse_polys(&ring, &job.frobenius)?;
    let map = RingMap::new(&ring, &ring, images).map_err(|e| CliError::Setup(e.to_string()))?;
    let lift = FrobLift::new(map).map_err(|e| CliError::Setup(e.to_string()))?;
    let cm = ComparisonMap::new(lift, job.witt_length).map_err(|e| CliError::Setup(e.to_string()))?;
    Ok((ring, cm))
}

pub fn tf_map(job: &ComparisonJob) -> Result<Report, CliError> {
    check_schema(job.schema)?;
    let start = std::time::Instant::now();
    let (ring, cm) = comparison_map(job)?;
    let mut cases = Vec::new();
    for (i, input) in job.inputs.iter().enumerate() {
        let id = format!("input-{i:03}");
        let result = ring
            .parse(input)
            .map_err(|e| e.to_string())
            .and_then(|a| {
                let s = cm.s_f(&a).map_err(|e| e.to_string())?;
                let t = cm.t_f(&a).map_err(|e| e.to_string())?;
                Ok(json!({ "input": input, "s_f": s.to_json(), "t_f": t.to_json() }))
            });
        match result {
            Ok(detail) => cases.push(CaseResult::pass_with(id, detail)),
            Err(e) => cases.push(CaseResult::fail(id, json!(e))),
        }
    }
    let note = format!(
        "working precision p^{}; published slots exact mod p^{}",
        cm.ring().ctx().precision(),
        cm.published_prec()
    );
    let body = make_body("tf-map", job.p, job.n, 0, note, cases);
    Ok(Report { body, wall_ms: start.elapsed().as_millis() })
}

pub fn overconv_profile(job: &ComparisonJob) -> Result<Report, CliError> {
    check_schema(job.schema)?;
    let start = std::time::Instant::now();
    let (ring, cm) = comparison_map(job)?;
    let mut cases = Vec::new();
    for (i, input) in job.inputs.iter().enumerate() {
        let id = format!("input-{i:03}");
        let result = ring
            .parse(input)
            .map_err(|e| e.to_string())
            .and_then(|a| cm.overconvergence_profile(&a).map_err(|e| e.to_string()));
        match result {
            Ok(profile) => {
                let rows: Vec<_> = profile
                    .iter()
                    .map(|r| json!({ "slot": r.slot, "degree": r.degree, "bound": r.bound }))
                    .collect();
                cases.push(CaseResult::pass_with(id, json!({ "input": input, "profile": rows })));
            }
            Err(e) => cases.push(CaseResult::fail(id, json!(e))),
        }
    }
    let note = "slot degrees checked against deg(a) * p^i".to_string();
    let body = make_body("overconv-profile", job.p, job.n, 0, note, cases);
    Ok(Report { body, wall_ms: start.elapsed().as_millis() })
}

// ---- cohomology (explicit geometry) ----

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CohomologyJob {
    pub schema: u32,
    pub p: u64,
    #[serde(rename = "N")]
    pub n: u32,
    pub variables: Vec<String>,
    pub invertible_flags: Vec<bool>,
    pub window: i64,
    #[serde(default)]
    pub tests: Vec<CohomTest>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CohomTest {
    pub kind: String,
    pub form: FormSpec,
    #[serde(default)]
    pub expect_order_exponent: Option<u32>,
}

pub fn cohomology(job: &CohomologyJob) -> Result<Report, CliError> {
    check_schema(job.schema)?;
    let start = std::time::Instant::now();
    if job.variables.len() != job.invertible_flags.len() {
        return Err(CliError::JobParse(
            "variables and invertible_flags must have the same length".into(),
        ));
    }
    let gens: Vec<GenSpec> = job
        .variables
        .iter()
        .zip(&job.invertible_flags)
        .map(|(name, &invertible)| GenSpec { name: name.clone(), invertible })
        .collect();
    let ring = build_ring(job.p, job.n, &gens)?;
    let cx = GradedComplex::new(&ring, job.window).map_err(|e| CliError::Setup(e.to_string()))?;
    let report = cx.cohomology().map_err(|e| CliError::Setup(e.to_string()))?;
    let mut cases = vec![CaseResult::pass_with("elementary-divisors", report.to_json())];
    for (i, test) in job.tests.iter().enumerate() {
        let id = format!("test-{i:03}");
        if test.kind != "exactness" {
            cases.push(CaseResult::fail(id, json!(format!("unknown test kind `{}`", test.kind))));
            continue;
        }
        let outcome = build_form(&ring, &test.form)
            .map_err(|e| e.to_string())
            .and_then(|omega| cx.exactness_witness(&omega).map_err(|e| e.to_string()));
        match outcome {
            Ok(Exactness::Exact { primitive }) => {
                let ok = test.expect_order_exponent.is_none_or(|e| e == 0);
                let detail = json!({ "exact": true, "primitive": primitive.to_json() });
                cases.push(if ok { CaseResult::pass_with(id, detail) } else {
                    CaseResult::fail(id, detail)
                });
            }
            Ok(Exactness::NotExact { order_exp, scaled_primitive }) => {
                let ok = test.expect_order_exponent.is_none_or(|e| e == order_exp);
                let detail = json!({
                    "exact": false,
                    "order_exponent": order_exp,
                    "scaled_primitive": scaled_primitive.to_json(),
                });
                cases.push(if ok { CaseResult::pass_with(id, detail) } else {
                    CaseResult::fail(id, detail)
                });
            }
            Err(e) => cases.push(CaseResult::fail(id, json!(e))),
        }
    }
    let note = format!("elementary divisors exact, capped at p^{}", job.n);
    let body = make_body("cohomology", job.p, job.n, 0, note, cases);
    Ok(Report { body, wall_ms: start.elapsed().as_millis() })
}
