//! p-typical Witt vectors of finite length over Laurent polynomial rings.
//!
//! Ring operations go through the ghost coordinates: lift the entries to a
//! context with n-1 guard digits, apply the ghost map, operate
//! componentwise, and invert. Slot m of the inversion is only determined
//! modulo p^(M-m), so with M = N+n-1 every published slot is still exact
//! modulo p^N. The per-slot assertion level is kept in an explicit ledger.

use serde_json::json;

use crate::error::{Error, Result};
use crate::lpoly::{LPoly, LaurentRing};

#[derive(Debug, Clone, PartialEq)]
pub struct WittVec {
    ring: LaurentRing,
    comps: Vec<LPoly>,
    ledger: Vec<u32>,
}

/// Ghost coordinates g_m = sum_{i<=m} p^i x_i^{p^(m-i)} with the precision
/// each slot is asserted at.
#[derive(Debug, Clone, PartialEq)]
pub struct GhostVec {
    ring: LaurentRing,
    comps: Vec<LPoly>,
    prec: Vec<u32>,
}

fn pow_u32(p: u64, e: u32) -> Result<u32> {
    let v = (p as u128).checked_pow(e).ok_or(Error::BadPrecision { p, n: e })?;
    u32::try_from(v).map_err(|_| Error::BadPrecision { p, n: e })
}

impl GhostVec {
    pub fn new(ring: LaurentRing, comps: Vec<LPoly>) -> Self {
        let prec = comps.iter().map(|c| c.min_prec()).collect();
        GhostVec { ring, comps, prec }
    }

    pub fn with_prec(ring: LaurentRing, comps: Vec<LPoly>, prec: Vec<u32>) -> Self {
        assert_eq!(comps.len(), prec.len());
        GhostVec { ring, comps, prec }
    }

    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn component(&self, m: usize) -> &LPoly {
        &self.comps[m]
    }

    pub fn components(&self) -> &[LPoly] {
        &self.comps
    }

    pub fn prec(&self) -> &[u32] {
        &self.prec
    }

    pub fn combine(&self, other: &GhostVec, f: impl Fn(&LPoly, &LPoly) -> Result<LPoly>) -> Result<GhostVec> {
        assert_eq!(self.len(), other.len());
        let mut comps = Vec::with_capacity(self.len());
        let mut prec = Vec::with_capacity(self.len());
        for m in 0..self.len() {
            comps.push(f(&self.comps[m], &other.comps[m])?);
            prec.push(self.prec[m].min(other.prec[m]));
        }
        Ok(GhostVec { ring: self.ring.clone(), comps, prec })
    }
}

impl WittVec {
    pub fn new(ring: LaurentRing, comps: Vec<LPoly>) -> Result<Self> {
        if comps.is_empty() {
            return Err(Error::LengthUnderflow(0));
        }
        for c in &comps {
            if c.ring() != &ring {
                return Err(Error::VariableMismatch("Witt components over mixed rings".into()));
            }
        }
        let ledger = comps.iter().map(|c| c.min_prec()).collect();
        Ok(WittVec { ring, comps, ledger })
    }

    pub fn with_ledger(ring: LaurentRing, comps: Vec<LPoly>, ledger: Vec<u32>) -> Result<Self> {
        let mut w = Self::new(ring, comps)?;
        assert_eq!(w.comps.len(), ledger.len());
        w.ledger = ledger;
        Ok(w)
    }

    pub fn zero(ring: &LaurentRing, n: usize) -> Self {
        let comps = vec![ring.zero(); n];
        Self::new(ring.clone(), comps).expect("n >= 1")
    }

    pub fn one(ring: &LaurentRing, n: usize) -> Self {
        Self::teichmuller(&ring.one(), n)
    }

    /// The multiplicative lift (a, 0, ..., 0).
    pub fn teichmuller(a: &LPoly, n: usize) -> Self {
        let ring = a.ring().clone();
        let mut comps = vec![ring.zero(); n];
        comps[0] = a.clone();
        Self::new(ring, comps).expect("n >= 1")
    }

    pub fn ring(&self) -> &LaurentRing {
        &self.ring
    }

    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn component(&self, i: usize) -> &LPoly {
        &self.comps[i]
    }

    pub fn components(&self) -> &[LPoly] {
        &self.comps
    }

    pub fn ledger(&self) -> &[u32] {
        &self.ledger
    }

    pub fn ghost(&self) -> Result<GhostVec> {
        let ctx = self.ring.ctx();
        let p = ctx.p();
        let n_amb = ctx.precision();
        let mut comps = Vec::with_capacity(self.len());
        let mut prec = Vec::with_capacity(self.len());
        for m in 0..self.len() {
            let mut g = self.ring.zero();
            let mut slot_prec = n_amb;
            for i in 0..=m {
                let e = pow_u32(p, (m - i) as u32)?;
                g = g.add(&self.comps[i].pow(e)?.mul_p_pow(i as u32))?;
                // the factor p^i lifts the assertion level of slot i by i
                slot_prec = slot_prec.min((self.ledger[i] + i as u32).min(n_amb));
            }
            comps.push(g);
            prec.push(slot_prec);
        }
        Ok(GhostVec { ring: self.ring.clone(), comps, prec })
    }

    /// Solve g_m = sum_{i<=m} p^i x_i^{p^(m-i)} for the components. Slot m
    /// costs m precision digits; a divisibility failure means the input is
    /// not the ghost vector of an integral Witt vector.
    pub fn ghost_invert(g: &GhostVec) -> Result<WittVec> {
        let ring = g.ring.clone();
        let ctx = ring.ctx();
        let p = ctx.p();
        let n_amb = ctx.precision();
        let mut comps: Vec<LPoly> = Vec::with_capacity(g.len());
        let mut ledger: Vec<u32> = Vec::with_capacity(g.len());
        for m in 0..g.len() {
            let mut num = g.comps[m].clone();
            let mut num_prec = g.prec[m];
            for i in 0..m {
                let e = pow_u32(p, (m - i) as u32)?;
                num = num.sub(&comps[i].pow(e)?.mul_p_pow(i as u32))?;
                num_prec = num_prec.min((ledger[i] + i as u32).min(n_amb));
            }
            if num_prec < m as u32 + 1 {
                return Err(Error::PrecisionExhausted { needed: m as u32 + 1, available: num_prec });
            }
            comps.push(num.div_exact_p(m as u32)?);
            ledger.push(num_prec - m as u32);
        }
        Ok(WittVec { ring, comps, ledger })
    }

    fn guard_ring(&self) -> Result<LaurentRing> {
        let ctx = self.ring.ctx();
        let guard = ctx.precision() + self.len() as u32 - 1;
        Ok(self.ring.with_ctx(ctx.with_precision(guard)?))
    }

    /// Arbitrary coefficient lift of all components into `target`.
    fn lift_all(&self, target: &LaurentRing) -> WittVec {
        let comps: Vec<LPoly> = self.comps.iter().map(|c| c.lift_to_ring(target)).collect();
        let ledger = vec![target.ctx().precision(); comps.len()];
        WittVec { ring: target.clone(), comps, ledger }
    }

    fn publish(&self, target: &LaurentRing, input_prec: u32) -> WittVec {
        let n = target.ctx().precision();
        let comps: Vec<LPoly> = self.comps.iter().map(|c| c.reduce_to_ring(target)).collect();
        let ledger = self.ledger.iter().map(|&l| l.min(n).min(input_prec)).collect();
        WittVec { ring: target.clone(), comps, ledger }
    }

    fn binary_ghost_op(
        &self,
        other: &WittVec,
        f: impl Fn(&LPoly, &LPoly) -> Result<LPoly>,
    ) -> Result<WittVec> {
        if self.ring != other.ring {
            return Err(Error::VariableMismatch("Witt operands over different rings".into()));
        }
        if self.len() != other.len() {
            return Err(Error::LengthUnderflow(self.len().min(other.len())));
        }
        let guard = self.guard_ring()?;
        let gu = self.lift_all(&guard).ghost()?;
        let gv = other.lift_all(&guard).ghost()?;
        let combined = gu.combine(&gv, f)?;
        let out = Self::ghost_invert(&combined)?;
        let input_prec = self
            .ledger
            .iter()
            .chain(other.ledger.iter())
            .copied()
            .min()
            .unwrap();
        Ok(out.publish(&self.ring, input_prec))
    }

    pub fn add(&self, other: &WittVec) -> Result<WittVec> {
        self.binary_ghost_op(other, |a, b| a.add(b))
    }

    pub fn mul(&self, other: &WittVec) -> Result<WittVec> {
        self.binary_ghost_op(other, |a, b| a.mul(b))
    }

    pub fn sub(&self, other: &WittVec) -> Result<WittVec> {
        self.add(&other.neg()?)
    }

    pub fn neg(&self) -> Result<WittVec> {
        self.unary_ghost_op(|g| Ok(g.neg()))
    }

    /// Multiplication by an exact integer, via the ghost coordinates.
    pub fn mul_int(&self, k: i128) -> Result<WittVec> {
        self.unary_ghost_op(|g| Ok(g.scale_int(k)))
    }

    fn unary_ghost_op(&self, f: impl Fn(&LPoly) -> Result<LPoly>) -> Result<WittVec> {
        let guard = self.guard_ring()?;
        let gu = self.lift_all(&guard).ghost()?;
        let mut comps = Vec::with_capacity(gu.len());
        for c in &gu.comps {
            comps.push(f(c)?);
        }
        let combined = GhostVec { ring: guard, comps, prec: gu.prec.clone() };
        let out = Self::ghost_invert(&combined)?;
        let input_prec = self.ledger.iter().copied().min().unwrap();
        Ok(out.publish(&self.ring, input_prec))
    }

    /// Shift the components up: V(x_0,...,x_{n-1}) = (0, x_0,..., x_{n-1}).
    /// The output is one slot longer; use [`WittVec::truncate`] or
    /// [`WittVec::verschiebung_capped`] to cap it.
    pub fn verschiebung(&self) -> WittVec {
        let mut comps = Vec::with_capacity(self.len() + 1);
        comps.push(self.ring.zero());
        comps.extend(self.comps.iter().cloned());
        let mut ledger = Vec::with_capacity(self.len() + 1);
        ledger.push(self.ring.ctx().precision());
        ledger.extend(self.ledger.iter().copied());
        WittVec { ring: self.ring.clone(), comps, ledger }
    }

    /// Verschiebung truncated to at most `cap` slots; the flag records
    /// whether a nonzero slot was dropped.
    pub fn verschiebung_capped(&self, cap: usize) -> (WittVec, bool) {
        let full = self.verschiebung();
        if full.len() <= cap {
            return (full, false);
        }
        let dropped = full.comps[cap..].iter().any(|c| !c.is_zero());
        (full.truncate(cap), dropped)
    }

    /// The ghost-shift operator: ghost(F u)_m = ghost(u)_{m+1}. Shortens the
    /// vector by one slot.
    pub fn frobenius(&self) -> Result<WittVec> {
        if self.len() < 2 {
            return Err(Error::LengthUnderflow(self.len()));
        }
        let guard = self.guard_ring()?;
        let g = self.lift_all(&guard).ghost()?;
        let shifted = GhostVec {
            ring: guard,
            comps: g.comps[1..].to_vec(),
            prec: g.prec[1..].to_vec(),
        };
        let out = Self::ghost_invert(&shifted)?;
        let input_prec = self.ledger.iter().copied().min().unwrap();
        Ok(out.publish(&self.ring, input_prec))
    }

    /// Componentwise reduction modulo p, landing over the residue field.
    pub fn reduce_mod_p(&self) -> Result<WittVec> {
        let target = self.ring.with_ctx(self.ring.ctx().with_precision(1)?);
        let comps: Vec<LPoly> = self.comps.iter().map(|c| c.reduce_to_ring(&target)).collect();
        let ledger = vec![1; comps.len()];
        Ok(WittVec { ring: target, comps, ledger })
    }

    pub fn truncate(&self, len: usize) -> WittVec {
        assert!(len >= 1 && len <= self.len());
        WittVec {
            ring: self.ring.clone(),
            comps: self.comps[..len].to_vec(),
            ledger: self.ledger[..len].to_vec(),
        }
    }

    /// Slotwise equality at the combined precision ledger.
    pub fn eq_at_ledger(&self, other: &WittVec) -> bool {
        if self.ring != other.ring || self.len() != other.len() {
            return false;
        }
        (0..self.len()).all(|i| {
            let prec = self.ledger[i].min(other.ledger[i]);
            self.comps[i].eq_mod(&other.comps[i], prec)
        })
    }

    /// Canonical JSON: component strings plus the precision ledger.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "components": self.comps.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "ledger": self.ledger,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::PrimeCtx;

    fn ring(p: u64, n: u32) -> LaurentRing {
        let ctx = PrimeCtx::new(p, n).unwrap();
        LaurentRing::new(ctx, &[("x", false)]).unwrap()
    }

    fn consts(r: &LaurentRing, vals: &[i128]) -> WittVec {
        let comps = vals.iter().map(|&v| r.constant_i(v)).collect();
        WittVec::new(r.clone(), comps).unwrap()
    }

    #[test]
    fn ghost_of_teichmuller() {
        let r = ring(3, 4);
        let w = WittVec::teichmuller(&r.var(0), 3);
        let g = w.ghost().unwrap();
        assert_eq!(g.component(0), &r.var(0));
        assert_eq!(g.component(1), &r.var(0).pow(3).unwrap());
        assert_eq!(g.component(2), &r.var(0).pow(9).unwrap());
    }

    #[test]
    fn ghost_simple_values() {
        let r = ring(2, 4);
        let w = consts(&r, &[1, 1]);
        let g = w.ghost().unwrap();
        assert_eq!(g.component(0), &r.constant_i(1));
        assert_eq!(g.component(1), &r.constant_i(3));

        let r3 = ring(3, 4);
        let w = WittVec::new(r3.clone(), vec![r3.var(0), r3.one()]).unwrap();
        let g = w.ghost().unwrap();
        assert_eq!(g.component(1), &r3.var(0).pow(3).unwrap().add(&r3.constant_i(3)).unwrap());
    }

    // Oracle: exact integer ghost inversion in Z.
    fn ghost_invert_z(p: i128, g: &[i128]) -> Option<Vec<i128>> {
        let mut x: Vec<i128> = Vec::new();
        for m in 0..g.len() {
            let mut num = g[m];
            for (i, xi) in x.iter().enumerate() {
                num -= p.pow(i as u32) * xi.pow(p.pow((m - i) as u32) as u32);
            }
            let pm = p.pow(m as u32);
            if num % pm != 0 {
                return None;
            }
            x.push(num / pm);
        }
        Some(x)
    }

    #[test]
    fn ghost_invert_example() {
        let r = ring(2, 4);
        let g = GhostVec::new(r.clone(), vec![r.constant_i(2), r.constant_i(2)]);
        let w = WittVec::ghost_invert(&g).unwrap();
        let oracle = ghost_invert_z(2, &[2, 2]).unwrap();
        assert_eq!(oracle, vec![2, -1]);
        assert_eq!(w.component(0), &r.constant_i(2));
        // slot 1 carries precision 3 = N-1
        assert_eq!(w.ledger(), &[4, 3]);
        assert!(w.component(1).eq_mod(&r.constant_i(-1), 3));
    }

    #[test]
    fn ghost_invert_rejects_non_ghost() {
        let r = ring(3, 4);
        let g = GhostVec::new(r.clone(), vec![r.var(0), r.var(0).pow(2).unwrap()]);
        assert!(matches!(WittVec::ghost_invert(&g), Err(Error::NotDivisible { .. })));
    }

    #[test]
    fn ghost_roundtrip() {
        let r = ring(3, 4);
        let w = WittVec::new(
            r.clone(),
            vec![r.parse("x^2 + 2").unwrap(), r.parse("2*x^1").unwrap(), r.constant_i(7)],
        )
        .unwrap();
        let back = WittVec::ghost_invert(&w.ghost().unwrap()).unwrap();
        assert!(back.eq_at_ledger(&w));
    }

    #[test]
    fn addition_matches_universal_polynomial() {
        // (1,0) + (1,0) = (2,-1) over p=2
        let r = ring(2, 4);
        let u = consts(&r, &[1, 0]);
        let s = u.add(&u).unwrap();
        assert!(s.component(0).eq_mod(&r.constant_i(2), 4));
        assert!(s.component(1).eq_mod(&r.constant_i(-1), 4));
        // and against the integer oracle: ghost sum is (2, 2)
        assert_eq!(ghost_invert_z(2, &[2, 2]).unwrap(), vec![2, -1]);
    }

    #[test]
    fn teichmuller_is_multiplicative() {
        let r = ring(5, 3);
        let a = r.parse("x^2 + 3").unwrap();
        let b = r.parse("4*x^1").unwrap();
        let prod = WittVec::teichmuller(&a, 3).mul(&WittVec::teichmuller(&b, 3)).unwrap();
        let expected = WittVec::teichmuller(&a.mul(&b).unwrap(), 3);
        assert!(prod.eq_at_ledger(&expected));
    }

    #[test]
    fn additive_and_multiplicative_identities() {
        let r = ring(3, 3);
        let u = WittVec::new(r.clone(), vec![r.parse("x^1 + 1").unwrap(), r.var(0), r.constant_i(5)]).unwrap();
        assert!(u.add(&WittVec::zero(&r, 3)).unwrap().eq_at_ledger(&u));
        assert!(u.mul(&WittVec::one(&r, 3)).unwrap().eq_at_ledger(&u));
    }

    #[test]
    fn verschiebung_ghost_shift() {
        let r = ring(2, 4);
        let u = consts(&r, &[1, 0]);
        let v = u.verschiebung();
        assert_eq!(v.len(), 3);
        let g = v.ghost().unwrap();
        let gu = u.ghost().unwrap();
        assert!(g.component(0).is_zero());
        assert!(g.component(1).eq_mod(&gu.component(0).scale_int(2), 4));
        assert!(g.component(2).eq_mod(&gu.component(1).scale_int(2), 4));
    }

    #[test]
    fn capped_verschiebung_flags_dropped_slots() {
        let r = ring(2, 3);
        let u = consts(&r, &[1, 1]);
        let (v, dropped) = u.verschiebung_capped(2);
        assert_eq!(v.len(), 2);
        assert!(dropped);
        let (v, dropped) = u.verschiebung_capped(3);
        assert_eq!(v.len(), 3);
        assert!(!dropped);
        let z = WittVec::zero(&r, 2);
        let (_, dropped) = z.verschiebung_capped(2);
        assert!(!dropped);
    }

    #[test]
    fn frobenius_of_teichmuller() {
        let r = ring(3, 3);
        let t = WittVec::teichmuller(&r.var(0), 3);
        let f = t.frobenius().unwrap();
        let expected = WittVec::teichmuller(&r.var(0).pow(3).unwrap(), 2);
        assert!(f.eq_at_ledger(&expected));
    }

    #[test]
    fn fv_is_multiplication_by_p() {
        let r = ring(3, 3);
        let u = WittVec::new(r.clone(), vec![r.parse("x^1 + 2").unwrap(), r.var(0)]).unwrap();
        let fv = u.verschiebung().frobenius().unwrap();
        let pu = u.mul_int(3).unwrap();
        assert!(fv.eq_at_ledger(&pu));
    }

    #[test]
    fn frobenius_needs_length_two() {
        let r = ring(2, 3);
        let u = consts(&r, &[1]);
        assert!(matches!(u.frobenius(), Err(Error::LengthUnderflow(1))));
    }

    #[test]
    fn reduction_mod_p_is_ring_map() {
        let r = ring(3, 3);
        let u = WittVec::new(r.clone(), vec![r.parse("x^2 + 4").unwrap(), r.constant_i(5)]).unwrap();
        let v = WittVec::new(r.clone(), vec![r.parse("2*x^1").unwrap(), r.parse("x^1 + 1").unwrap()]).unwrap();
        let lhs = u.add(&v).unwrap().reduce_mod_p().unwrap();
        let rhs = u.reduce_mod_p().unwrap().add(&v.reduce_mod_p().unwrap()).unwrap();
        assert!(lhs.eq_at_ledger(&rhs));
        let lhs = u.mul(&v).unwrap().reduce_mod_p().unwrap();
        let rhs = u.reduce_mod_p().unwrap().mul(&v.reduce_mod_p().unwrap()).unwrap();
        assert!(lhs.eq_at_ledger(&rhs));
    }

    #[test]
    fn published_result_is_lift_independent() {
        // same residues mod p^N, different representatives in the guard lift
        let r = ring(2, 3);
        let u1 = consts(&r, &[3, 5]);
        let v1 = consts(&r, &[1, 7]);
        let s1 = u1.mul(&v1).unwrap();
        // recompute through an offset lift: the ghost route must agree
        let big = r.with_ctx(r.ctx().with_precision(5).unwrap());
        let off = |v: i128| big.constant_i(v + 8); // +p^N
        let u2 = WittVec::new(big.clone(), vec![off(3), off(5)]).unwrap();
        let v2 = WittVec::new(big.clone(), vec![off(1), off(7)]).unwrap();
        let g = u2.ghost().unwrap().combine(&v2.ghost().unwrap(), |a, b| a.mul(b)).unwrap();
        let s2 = WittVec::ghost_invert(&g).unwrap();
        for i in 0..2 {
            let prec = s1.ledger()[i].min(3);
            assert!(s1
                .component(i)
                .eq_mod(&s2.component(i).reduce_to_ring(&r), prec));
        }
    }

    #[test]
    fn s1_universal_identity() {
        // symbolic check of the first addition polynomial for p in {2,3}
        for p in [2u64, 3] {
            let n = 3u32;
            let guard = PrimeCtx::new(p, n + 1).unwrap();
            let r = LaurentRing::new(
                guard,
                &[("X0", false), ("X1", false), ("Y0", false), ("Y1", false)],
            )
            .unwrap();
            let u = WittVec::new(r.clone(), vec![r.var(0), r.var(1)]).unwrap();
            let v = WittVec::new(r.clone(), vec![r.var(2), r.var(3)]).unwrap();
            let s = u.add(&v).unwrap();
            // S1 = X1 + Y1 + (X0^p + Y0^p - (X0+Y0)^p)/p
            let binom = r
                .var(0)
                .pow(p as u32)
                .unwrap()
                .add(&r.var(2).pow(p as u32).unwrap())
                .unwrap()
                .sub(&r.var(0).add(&r.var(2)).unwrap().pow(p as u32).unwrap())
                .unwrap();
            let s1 = r.var(1).add(&r.var(3)).unwrap().add(&binom.div_exact_p(1).unwrap()).unwrap();
            assert!(s.component(0).eq_mod(&r.var(0).add(&r.var(2)).unwrap(), n));
            assert!(s.component(1).eq_mod(&s1, n));
        }
    }
}
