//! Seeded generation of random algebra inputs.
//!
//! Coefficients are uniform in [0, p^N); supports are capped at 6 terms and
//! per-variable exponents kept small enough that total degrees stay within
//! p^2, matching the documented suite defaults.

use mw_core::forms::{Form, RingMap, TForm};
use mw_core::{LPoly, LaurentRing, PrimeCtx, WittVec};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Rng8 = ChaCha8Rng;

pub fn ring_with(p: u64, n: u32, vars: &[(&str, bool)]) -> Result<LaurentRing, String> {
    let ctx = PrimeCtx::new(p, n).map_err(|e| e.to_string())?;
    LaurentRing::new(ctx, vars).map_err(|e| e.to_string())
}

/// A random polynomial with at most `max_terms` terms and per-variable
/// exponents bounded by `max_deg` (negative allowed on invertible
/// variables).
pub fn random_poly(rng: &mut Rng8, ring: &LaurentRing, max_terms: usize, max_deg: i32) -> LPoly {
    let modulus = ring.ctx().modulus();
    let nterms = rng.gen_range(0..=max_terms);
    let mut out = ring.zero();
    for _ in 0..nterms {
        let exps: Vec<i32> = (0..ring.nvars())
            .map(|j| {
                if ring.vars().is_invertible(j) {
                    rng.gen_range(-max_deg..=max_deg)
                } else {
                    rng.gen_range(0..=max_deg)
                }
            })
            .collect();
        let coeff = ring.ctx().scalar(rng.gen_range(0..modulus) as i128);
        let mono = ring.monomial(coeff, exps).expect("generated exponents are legal");
        out = out.add(&mono).expect("same ring");
    }
    out
}

pub fn random_nonzero_poly(
    rng: &mut Rng8,
    ring: &LaurentRing,
    max_terms: usize,
    max_deg: i32,
) -> LPoly {
    loop {
        let f = random_poly(rng, ring, max_terms.max(1), max_deg);
        if !f.is_zero() {
            return f;
        }
    }
}

/// A random Witt vector with short small-degree entries.
pub fn random_witt(rng: &mut Rng8, ring: &LaurentRing, len: usize) -> WittVec {
    let comps = (0..len).map(|_| random_poly(rng, ring, 2, 2)).collect();
    WittVec::new(ring.clone(), comps).expect("len >= 1")
}

/// A random ring endomorphism: invertible generators go to unit monomials
/// times 1-units, the rest to arbitrary polynomials.
pub fn random_ring_map(rng: &mut Rng8, ring: &LaurentRing, max_deg: i32) -> RingMap {
    let p = ring.ctx().p() as i128;
    let images: Vec<LPoly> = (0..ring.nvars())
        .map(|j| {
            if ring.vars().is_invertible(j) {
                let mut coeff;
                loop {
                    coeff = ring.ctx().scalar(rng.gen_range(1..ring.ctx().modulus()) as i128);
                    if coeff.is_unit(ring.ctx()) {
                        break;
                    }
                }
                let e: i32 = if rng.gen_bool(0.5) { 1 } else { -1 };
                let mut exps = vec![0i32; ring.nvars()];
                exps[j] = e;
                let mono = ring.monomial(coeff, exps).expect("legal");
                let one_unit = ring
                    .one()
                    .add(&random_poly(rng, ring, 2, max_deg).scale_int(p))
                    .expect("same ring");
                mono.mul(&one_unit).expect("same ring")
            } else {
                random_poly(rng, ring, 3, max_deg)
            }
        })
        .collect();
    RingMap::new(ring, ring, images).expect("generated images are valid")
}

/// Perturb a map by p * (random): the pair is congruent mod p.
pub fn perturb_mod_p(rng: &mut Rng8, base: &RingMap, max_deg: i32) -> RingMap {
    let ring = base.target().clone();
    let p = ring.ctx().p() as i128;
    let images: Vec<LPoly> = base
        .images()
        .iter()
        .map(|img| {
            let delta = random_poly(rng, &ring, 2, max_deg).scale_int(p);
            img.add(&delta).expect("same ring")
        })
        .collect();
    RingMap::new(base.source(), &ring, images).expect("congruent perturbation stays valid")
}

/// A random homogeneous form of the given degree.
pub fn random_form(rng: &mut Rng8, ring: &LaurentRing, degree: usize, max_deg: i32) -> Form {
    let k = ring.nvars();
    let mut out = Form::zero(ring, degree);
    if degree > k {
        return out;
    }
    for mask in 0u32..(1 << k) {
        if mask.count_ones() as usize != degree {
            continue;
        }
        if rng.gen_bool(0.3) {
            continue;
        }
        let idx: Vec<u32> = (0..k as u32).filter(|j| mask & (1 << j) != 0).collect();
        let coeff = random_poly(rng, ring, 3, max_deg);
        out = out.add(&Form::term(&coeff, &idx)).expect("same degree");
    }
    out
}

/// A random form over B[T] in decomposed shape, with T-degree at most 3.
pub fn random_tform(rng: &mut Rng8, ring: &LaurentRing, degree: usize, max_deg: i32) -> TForm {
    let tmax = rng.gen_range(1..=3usize);
    let prime: Vec<Form> = (0..=tmax).map(|_| random_form(rng, ring, degree, max_deg)).collect();
    let double_prime: Vec<Form> = if degree == 0 {
        Vec::new()
    } else {
        (0..=tmax).map(|_| random_form(rng, ring, degree - 1, max_deg)).collect()
    };
    TForm::new(ring, "T", degree, prime, double_prime).expect("well-formed by construction")
}

/// A random Frobenius lift f(x_j) = x_j^p + p g_j (or x_j^p (1 + p h_j) on
/// invertible generators), with the perturbation degree capped.
pub fn random_frobenius_lift(
    rng: &mut Rng8,
    ring: &LaurentRing,
    max_pert_deg: i32,
) -> mw_core::frobenius::FrobLift {
    let p = ring.ctx().p();
    let images: Vec<LPoly> = (0..ring.nvars())
        .map(|j| {
            let xp = ring.var(j).pow(p as u32).expect("power");
            if ring.vars().is_invertible(j) {
                let h = random_poly(rng, ring, 2, 0); // degree <= 0 keeps bounds
                let one_unit = ring.one().add(&h.scale_int(p as i128)).expect("same ring");
                xp.mul(&one_unit).expect("same ring")
            } else {
                let g = random_poly(rng, ring, 2, max_pert_deg);
                xp.add(&g.scale_int(p as i128)).expect("same ring")
            }
        })
        .collect();
    let map = RingMap::new(ring, ring, images).expect("valid images");
    mw_core::frobenius::FrobLift::new(map).expect("congruent to Frobenius by construction")
}
