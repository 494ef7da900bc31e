//! The explicit chain homotopy between evaluation maps on a T-adjoined ring.
//!
//! For a form written as sum_i T^i (w'_i + dT /\ w''_i) the operator
//! L(w) = sum_i (p^(i+1)/(i+1)) w''_i satisfies, degree by degree,
//! `h_p - h_0 = d o L + L o d`, where h_0, h_p substitute T = 0 and T = p. Two ring maps psi_1, psi_2
//! that agree modulo p admit a strong homotopy phi into the T-adjoined ring
//! with h_0 o phi = psi_1 and h_p o phi = psi_2, built generator-wise via
//! phi(x) = psi_1(x) + T (psi_2(x) - psi_1(x))/p; then L o phi~ is a chain
//! homotopy between the induced maps on forms.

use crate::error::{Error, Result};
use crate::forms::{embed_in_t_ring, eval_t_poly, fresh_t_name, Form, RingMap, TForm};
use crate::lpoly::{LPoly, LaurentRing, TTrunc};
use crate::scalar::{unit_coeff, PrimeCtx};

/// L(w) = sum_i (p^(i+1)/(i+1)) w''_i; consumes the dT component and drops
/// the degree by one.
pub fn l_operator(omega: &TForm) -> Result<Form> {
    let base = omega.base().clone();
    let out_degree = omega.degree().saturating_sub(1);
    let mut acc = Form::zero(&base, out_degree);
    for i in 0.. {
        if i > omega.max_t_degree() {
            break;
        }
        let part = omega.double_prime_part(i);
        if part.is_zero() {
            continue;
        }
        let c = unit_coeff(base.ctx(), i as u32);
        acc = acc.add(&part.scale(&c))?;
    }
    Ok(acc)
}

/// Both sides of the homotopy identity, kept for reporting.
#[derive(Debug, Clone)]
pub struct HomotopyCheck {
    pub lhs: Form,
    pub rhs: Form,
    pub checked_prec: u32,
}

/// Assert h_p - h_0 = d L + L d on a concrete decomposed form, exactly at
/// the precision its coefficients are asserted at.
pub fn check_homotopy_identity(omega: &TForm) -> Result<HomotopyCheck> {
    let ctx = omega.base().ctx();
    let p_scalar = ctx.scalar(ctx.p() as i128);
    let lhs = omega.eval_t(&p_scalar)?.sub(&omega.eval_t(&ctx.zero())?)?;
    let rhs = l_operator(omega)?.d()?.add(&l_operator(&omega.d()?)?)?;
    let checked_prec = tform_min_prec(omega);
    if !lhs.eq_mod(&rhs, checked_prec) {
        return Err(Error::IdentityViolation {
            context: "h_p - h_0 = dL + Ld".into(),
            detail: format!(
                "lhs - rhs = {} (mod p^{})",
                lhs.sub(&rhs)
                    .map(|d| d.truncate_prec(checked_prec).to_json().to_string())
                    .unwrap_or_else(|e| e.to_string()),
                checked_prec
            ),
        });
    }
    Ok(HomotopyCheck { lhs, rhs, checked_prec })
}

fn tform_min_prec(omega: &TForm) -> u32 {
    let mut p = omega.base().ctx().precision();
    for i in 0..=omega.max_t_degree() {
        p = p.min(omega.prime_part(i).min_prec());
        p = p.min(omega.double_prime_part(i).min_prec());
    }
    p
}

/// Smallest T-degree cap that provably loses nothing: beyond it both the
/// homotopy coefficients p^(i+1)/(i+1) (including one extra slot for the
/// d shift) and the evaluations at T = p vanish identically mod p^N.
pub fn safe_t_window(ctx: &PrimeCtx) -> usize {
    let n = ctx.precision();
    let mut last = n as usize; // p^i = 0 mod p^N for i >= N
    for i in 0..(8 * n + 16) {
        if !unit_coeff(ctx, i).is_zero() {
            last = last.max(i as usize + 1);
        }
    }
    last + 1
}

/// A constructed strong homotopy between two congruent ring maps, with the
/// data needed to replay and verify it.
#[derive(Debug, Clone)]
pub struct HomotopyCertificate {
    psi1: RingMap,
    psi2: RingMap,
    phi: RingMap,
    t_var: usize,
    window: usize,
    check_prec: u32,
}

impl HomotopyCertificate {
    pub fn psi1(&self) -> &RingMap {
        &self.psi1
    }

    pub fn psi2(&self) -> &RingMap {
        &self.psi2
    }

    /// The lift into the T-adjoined ring.
    pub fn phi(&self) -> &RingMap {
        &self.phi
    }

    pub fn t_var(&self) -> usize {
        self.t_var
    }

    /// T-degree window the certificate was checked in.
    pub fn checked_degree_window(&self) -> usize {
        self.window
    }

    /// All certificate identities hold exactly modulo p^check_prec.
    pub fn check_prec(&self) -> u32 {
        self.check_prec
    }

    pub fn target(&self) -> &LaurentRing {
        self.psi1.target()
    }
}

/// Build phi(x_j) = psi_1(x_j) + T c_j with c_j = (psi_2(x_j) - psi_1(x_j))/p.
///
/// Fails with NotCongruentModP unless the maps agree mod p on every
/// generator. The division costs one precision digit, so the certificate is
/// valid at precision N-1. A caller-supplied T-window below the safe bound
/// is rejected rather than silently truncated.
pub fn build_strong_homotopy(
    psi1: &RingMap,
    psi2: &RingMap,
    window: Option<usize>,
) -> Result<HomotopyCertificate> {
    if psi1.source() != psi2.source() || psi1.target() != psi2.target() {
        return Err(Error::VariableMismatch("maps with different source or target".into()));
    }
    psi1.congruent_mod_p(psi2)?;
    let source = psi1.source().clone();
    let target = psi1.target().clone();
    let ctx = target.ctx();
    let needed = safe_t_window(ctx);
    let window = match window {
        Some(w) if w < needed => return Err(Error::TWindowTooSmall { given: w, needed }),
        Some(w) => w,
        None => needed,
    };
    let t_name = fresh_t_name(&target);
    let ext = target.extend(&[(t_name.as_str(), false)])?;
    let t_var = target.nvars();
    let trunc = TTrunc { var: t_var, cap: window };

    let mut images: Vec<LPoly> = Vec::with_capacity(source.nvars());
    for j in 0..source.nvars() {
        let delta = psi2.image(j).sub(psi1.image(j))?;
        let c_j = delta.div_exact_p(1).map_err(|e| match e {
            Error::NotDivisible { .. } => Error::NotCongruentModP(source.vars().name(j).to_string()),
            other => other,
        })?;
        let img = embed_in_t_ring(psi1.image(j), &ext, 0)
            .add(&embed_in_t_ring(&c_j, &ext, 1))?;
        images.push(img);
    }
    let phi = RingMap::with_trunc(&source, &ext, images, Some(trunc))?;
    // the certificate is only as precise as the maps it was built from,
    // minus the digit spent on the division
    let input_prec = (0..source.nvars())
        .map(|j| psi1.image(j).min_prec().min(psi2.image(j).min_prec()))
        .min()
        .unwrap_or(ctx.precision());
    let check_prec = input_prec.saturating_sub(1).max(1);

    // h_0 o phi = psi_1 exactly, h_p o phi = psi_2 at the certified precision
    let p_scalar = ctx.scalar(ctx.p() as i128);
    for j in 0..source.nvars() {
        let at0 = eval_t_poly(phi.image(j), &target, t_var, &ctx.zero())?;
        if !at0.eq_mod(psi1.image(j), ctx.precision()) {
            return Err(Error::IdentityViolation {
                context: "h_0 o phi = psi_1".into(),
                detail: source.vars().name(j).to_string(),
            });
        }
        let atp = eval_t_poly(phi.image(j), &target, t_var, &p_scalar)?;
        if !atp.eq_mod(psi2.image(j), check_prec) {
            return Err(Error::IdentityViolation {
                context: "h_p o phi = psi_2".into(),
                detail: source.vars().name(j).to_string(),
            });
        }
    }
    Ok(HomotopyCertificate { psi1: psi1.clone(), psi2: psi2.clone(), phi, t_var, window, check_prec })
}

#[derive(Debug, Clone)]
pub struct ChainHomotopy {
    /// H(omega) = L(phi~ omega).
    pub h_omega: Form,
    /// psi_2^* omega - psi_1^* omega.
    pub difference: Form,
    /// d(H omega) + H(d omega).
    pub boundary: Form,
    pub verified: bool,
    pub checked_prec: u32,
}

impl HomotopyCertificate {
    /// Pull a form through phi, read off the homotopy, and verify the
    /// homotopy identity for this input exactly at the certified precision.
    pub fn chain_homotopy(&self, omega: &Form) -> Result<ChainHomotopy> {
        let h_omega = self.h_of(omega)?;
        let h_domega = self.h_of(&omega.d()?)?;
        let difference = self.psi2.pullback(omega)?.sub(&self.psi1.pullback(omega)?)?;
        let boundary = h_omega.d()?.add(&h_domega)?;
        if !difference.eq_mod(&boundary, self.check_prec) {
            return Err(Error::IdentityViolation {
                context: "psi_2^* - psi_1^* = dH + Hd".into(),
                detail: format!(
                    "difference {} vs boundary {} (mod p^{})",
                    difference.to_json(),
                    boundary.to_json(),
                    self.check_prec
                ),
            });
        }
        Ok(ChainHomotopy {
            h_omega,
            difference,
            boundary,
            verified: true,
            checked_prec: self.check_prec,
        })
    }

    /// H = L o phi~ without the verification pass.
    pub fn h_of(&self, omega: &Form) -> Result<Form> {
        let pulled = self.phi.pullback(omega)?;
        let tform = TForm::from_form(&pulled, self.psi1.target())?;
        l_operator(&tform)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::PrimeCtx;

    fn ring1(p: u64, n: u32) -> LaurentRing {
        let ctx = PrimeCtx::new(p, n).unwrap();
        LaurentRing::new(ctx, &[("x", false)]).unwrap()
    }

    fn tform_t_power(r: &LaurentRing, k: usize) -> TForm {
        let mut prime = vec![Form::zero(r, 0); k + 1];
        prime[k] = Form::from_poly(&r.one());
        TForm::new(r, "T", 0, prime, vec![]).unwrap()
    }

    #[test]
    fn l_of_dt_is_p() {
        let r = ring1(3, 4);
        let dt = TForm::new(&r, "T", 1, vec![], vec![Form::from_poly(&r.one())]).unwrap();
        assert_eq!(l_operator(&dt).unwrap(), Form::from_poly(&r.constant_i(3)));
    }

    #[test]
    fn l_of_t_dt_is_p_squared_over_two() {
        // oracle: the rational p^2/2 reduced p-adically, p odd
        let r = ring1(3, 4);
        let tdt = TForm::new(
            &r,
            "T",
            1,
            vec![],
            vec![Form::zero(&r, 0), Form::from_poly(&r.one())],
        )
        .unwrap();
        let expected = r.ctx().scalar(9).mul(&r.ctx().scalar(2).inv(r.ctx()).unwrap(), r.ctx());
        assert_eq!(
            l_operator(&tdt).unwrap(),
            Form::from_poly(&r.constant(expected))
        );
    }

    #[test]
    fn l_vanishes_without_dt_part() {
        let r = ring1(5, 3);
        let tf = tform_t_power(&r, 3);
        assert!(l_operator(&tf).unwrap().is_zero());
    }

    #[test]
    fn homotopy_identity_on_t_powers() {
        for p in [2u64, 3, 5] {
            let r = ring1(p, 4);
            for k in 0..6 {
                let tf = tform_t_power(&r, k);
                let chk = check_homotopy_identity(&tf).unwrap();
                // h_p - h_0 on T^k is p^k - [k=0]
                let expected = if k == 0 {
                    Form::zero(&r, 0)
                } else {
                    Form::from_poly(&r.constant_i((p as i128).pow(k as u32)))
                };
                assert!(chk.lhs.eq_mod(&expected, 4));
            }
        }
    }

    #[test]
    fn homotopy_identity_on_t_dt() {
        // omega = T dT: both sides vanish
        let r = ring1(3, 4);
        let tdt = TForm::new(
            &r,
            "T",
            1,
            vec![],
            vec![Form::zero(&r, 0), Form::from_poly(&r.one())],
        )
        .unwrap();
        let chk = check_homotopy_identity(&tdt).unwrap();
        assert!(chk.lhs.is_zero());
        assert!(chk.rhs.truncate_prec(chk.checked_prec).is_zero());
    }

    #[test]
    fn strong_homotopy_worked_fixture() {
        // psi_1: x -> x^p, psi_2: x -> x^p + p x, omega = dx, H(dx) = p x
        for p in [2u64, 3] {
            let n = 4;
            let r = ring1(p, n);
            let xp = r.var(0).pow(p as u32).unwrap();
            let psi1 = RingMap::new(&r, &r, vec![xp.clone()]).unwrap();
            let psi2 = RingMap::new(&r, &r, vec![xp.add(&r.var(0).scale_int(p as i128)).unwrap()]).unwrap();
            let cert = build_strong_homotopy(&psi1, &psi2, None).unwrap();
            // phi: x -> x^p + T x (the T-coefficient carries precision N-1)
            let phi_img = cert.phi().image(0);
            let ext = cert.phi().target();
            let expected_img = ext.parse(&format!("x^{p} + x^1*T^1")).unwrap();
            assert!(phi_img.eq_mod(&expected_img, cert.check_prec()));
            let dx = Form::term(&r.one(), &[0]);
            let ch = cert.chain_homotopy(&dx).unwrap();
            assert!(ch.verified);
            let px = Form::from_poly(&r.var(0).scale_int(p as i128));
            assert!(ch.h_omega.eq_mod(&px, cert.check_prec()));
            // difference = p dx
            let pdx = Form::term(&r.constant_i(p as i128), &[0]);
            assert!(ch.difference.eq_mod(&pdx, cert.check_prec()));
        }
    }

    #[test]
    fn strong_homotopy_on_x_dx() {
        let p = 3u64;
        let r = ring1(p, 4);
        let xp = r.var(0).pow(p as u32).unwrap();
        let psi1 = RingMap::new(&r, &r, vec![xp.clone()]).unwrap();
        let psi2 = RingMap::new(&r, &r, vec![xp.add(&r.var(0).scale_int(p as i128)).unwrap()]).unwrap();
        let cert = build_strong_homotopy(&psi1, &psi2, None).unwrap();
        let omega = Form::term(&r.var(0), &[0]);
        let ch = cert.chain_homotopy(&omega).unwrap();
        assert!(ch.verified);
    }

    #[test]
    fn degree_zero_forms_have_zero_homotopy_difference() {
        // omega = 1: both sides of the homotopy identity vanish
        let r = ring1(3, 4);
        let xp = r.var(0).pow(3).unwrap();
        let psi1 = RingMap::new(&r, &r, vec![xp.clone()]).unwrap();
        let psi2 = RingMap::new(&r, &r, vec![xp.add(&r.var(0).scale_int(3)).unwrap()]).unwrap();
        let cert = build_strong_homotopy(&psi1, &psi2, None).unwrap();
        let one = Form::from_poly(&r.one());
        let ch = cert.chain_homotopy(&one).unwrap();
        assert!(ch.h_omega.is_zero());
        assert!(ch.difference.is_zero());
    }

    #[test]
    fn degenerate_pair_gives_zero_homotopy() {
        let r = ring1(3, 3);
        let psi = RingMap::new(&r, &r, vec![r.parse("x^3 + 3*x^1").unwrap()]).unwrap();
        let cert = build_strong_homotopy(&psi, &psi, None).unwrap();
        let omega = Form::term(&r.parse("x^2 + 1").unwrap(), &[0]);
        let ch = cert.chain_homotopy(&omega).unwrap();
        assert!(ch.h_omega.truncate_prec(cert.check_prec()).is_zero());
        assert!(ch.difference.is_zero());
    }

    #[test]
    fn incongruent_pair_is_rejected() {
        let r = ring1(5, 3);
        let psi1 = RingMap::new(&r, &r, vec![r.var(0)]).unwrap();
        let psi2 = RingMap::new(&r, &r, vec![r.parse("x^1 + 1").unwrap()]).unwrap();
        assert!(matches!(
            build_strong_homotopy(&psi1, &psi2, None),
            Err(Error::NotCongruentModP(_))
        ));
    }

    #[test]
    fn window_below_safe_bound_is_rejected() {
        let r = ring1(2, 4);
        let psi = RingMap::new(&r, &r, vec![r.var(0).pow(2).unwrap()]).unwrap();
        assert!(matches!(
            build_strong_homotopy(&psi, &psi, Some(1)),
            Err(Error::TWindowTooSmall { .. })
        ));
    }

    #[test]
    fn laurent_source_homotopy() {
        // invertible generator: pullback of dx/x needs the truncated inverse
        let p = 3u64;
        let ctx = PrimeCtx::new(p, 4).unwrap();
        let r = LaurentRing::new(ctx, &[("x", true)]).unwrap();
        let xp = r.var(0).pow(p as u32).unwrap();
        let psi1 = RingMap::new(&r, &r, vec![xp.clone()]).unwrap();
        let pert = r.parse("x^2").unwrap().scale_int(p as i128);
        let psi2 = RingMap::new(&r, &r, vec![xp.add(&pert).unwrap()]).unwrap();
        let cert = build_strong_homotopy(&psi1, &psi2, None).unwrap();
        let dlog = Form::term(&r.parse("x^-1").unwrap(), &[0]);
        let ch = cert.chain_homotopy(&dlog).unwrap();
        assert!(ch.verified);
        assert!(!ch.difference.is_zero());
    }
}
