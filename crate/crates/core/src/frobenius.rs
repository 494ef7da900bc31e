//! Frobenius lifts on Laurent polynomial algebras and the induced
//! comparison maps into truncated Witt vectors.
//!
//! For a lift f of Frobenius, the section s_f sends a to the unique Witt
//! vector with ghost components (a, f(a), f^2(a), ...); integrality of the
//! ghost inversion is exactly the Dwork congruence f(a) = a^p mod p, so a
//! corrupted lift surfaces as a NotDivisible error. Composing with the
//! reduction of coefficients modulo p gives t_f with values in W_n of the
//! mod-p algebra.

use crate::error::{Error, Result};
use crate::forms::{Form, RingMap};
use crate::lpoly::{LPoly, LaurentRing};
use crate::witt::{GhostVec, WittVec};

/// A ring endomorphism certified to lift the Frobenius: every generator
/// image is congruent to the generator's p-th power modulo p.
#[derive(Debug, Clone)]
pub struct FrobLift {
    map: RingMap,
}

impl FrobLift {
    pub fn new(map: RingMap) -> Result<FrobLift> {
        if map.source() != map.target() {
            return Err(Error::VariableMismatch("a Frobenius lift must be an endomorphism".into()));
        }
        let ring = map.source().clone();
        let p = ring.ctx().p() as u32;
        for j in 0..ring.nvars() {
            let xp = ring.var(j).pow(p)?;
            if !map.image(j).eq_mod(&xp, 1) {
                return Err(Error::NotFrobeniusLift(
                    format!("x_{j} -> {}", map.image(j)),
                    ring.vars().name(j).to_string(),
                ));
            }
        }
        Ok(FrobLift { map })
    }

    /// Skip the congruence check. Downstream ghost inversions will report
    /// NotDivisible when the certificate would have been refused; used to
    /// exercise exactly that failure path.
    pub fn new_unchecked(map: RingMap) -> FrobLift {
        FrobLift { map }
    }

    pub fn map(&self) -> &RingMap {
        &self.map
    }

    pub fn ring(&self) -> &LaurentRing {
        self.map.source()
    }

    pub fn apply(&self, a: &LPoly) -> Result<LPoly> {
        self.map.apply(a)
    }
}

/// The comparison map at Witt length n, working at precision M = N + n - 1
/// so that every published slot is good modulo p^N.
#[derive(Debug, Clone)]
pub struct ComparisonMap {
    lift: FrobLift,
    n: usize,
}

impl ComparisonMap {
    pub fn new(lift: FrobLift, n: usize) -> Result<ComparisonMap> {
        let m = lift.ring().ctx().precision();
        if n == 0 {
            return Err(Error::LengthUnderflow(0));
        }
        if (m as usize) < n {
            return Err(Error::PrecisionExhausted { needed: n as u32, available: m });
        }
        Ok(ComparisonMap { lift, n })
    }

    pub fn lift(&self) -> &FrobLift {
        &self.lift
    }

    pub fn ring(&self) -> &LaurentRing {
        self.lift.ring()
    }

    pub fn witt_length(&self) -> usize {
        self.n
    }

    /// The precision at which all published slots are simultaneously good.
    pub fn published_prec(&self) -> u32 {
        self.ring().ctx().precision() - self.n as u32 + 1
    }

    /// The section with ghost components (a, f(a), ..., f^(n-1)(a)).
    pub fn s_f(&self, a: &LPoly) -> Result<WittVec> {
        if a.ring() != self.ring() {
            return Err(Error::VariableMismatch("input over the wrong ring".into()));
        }
        let mut ghosts = Vec::with_capacity(self.n);
        let mut cur = a.clone();
        for i in 0..self.n {
            if i > 0 {
                cur = self.lift.apply(&cur)?;
            }
            ghosts.push(cur.clone());
        }
        WittVec::ghost_invert(&GhostVec::new(self.ring().clone(), ghosts))
    }

    /// t_f = (reduce coefficients mod p) o s_f.
    pub fn t_f(&self, a: &LPoly) -> Result<WittVec> {
        self.s_f(a)?.reduce_mod_p()
    }

    /// Per-slot degree of t_f(a) against the linear-in-p^i growth bound
    /// deg(a) * p^i. Requires the lift's generator images to have total
    /// degree at most p.
    pub fn overconvergence_profile(&self, a: &LPoly) -> Result<Vec<ProfileSlot>> {
        let p = self.ring().ctx().p() as i64;
        for j in 0..self.ring().nvars() {
            let dj = self.lift.map().image(j).degree().unwrap_or(i64::MIN);
            if dj > p {
                return Err(Error::BoundViolation { slot: j, degree: dj, bound: p });
            }
        }
        let t = self.t_f(a)?;
        let deg_a = a.degree();
        let mut out = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let deg = t.component(i).degree();
            let bound = deg_a.map(|d| d * p.pow(i as u32));
            if let (Some(d), Some(b)) = (deg, bound) {
                if d > b {
                    return Err(Error::BoundViolation { slot: i, degree: d, bound: b });
                }
            }
            out.push(ProfileSlot { slot: i, degree: deg, bound });
        }
        Ok(out)
    }

    /// The coordinate ring of the length-n Witt affine space over the
    /// lift's algebra: n fresh slot variables per original variable,
    /// inheriting the invertibility flag.
    pub fn witt_coordinate_ring(&self) -> Result<LaurentRing> {
        let ring = self.ring();
        let mut names: Vec<(String, bool)> = Vec::with_capacity(ring.nvars() * self.n);
        for j in 0..ring.nvars() {
            for i in 0..self.n {
                names.push((format!("{}_{}", ring.vars().name(j), i), ring.vars().is_invertible(j)));
            }
        }
        let pairs: Vec<(&str, bool)> = names.iter().map(|(s, f)| (s.as_str(), *f)).collect();
        LaurentRing::new(*ring.ctx(), &pairs)
    }

    /// The slot-expansion map into the Witt coordinate ring: each generator
    /// goes to sum_i p^i * (slot i of s_f applied to it), with the slot-i
    /// content written in the block-i coordinates. Reduces to the identity
    /// on slot-0 coordinates modulo p.
    pub fn coordinate_embedding(&self) -> Result<RingMap> {
        let ring = self.ring().clone();
        let target = self.witt_coordinate_ring()?;
        // block-i coordinate substitutions x_l -> X_{l,i}
        let block_images: Vec<Vec<LPoly>> = (0..self.n)
            .map(|i| (0..ring.nvars()).map(|l| target.var(l * self.n + i)).collect())
            .collect();
        let mut images = Vec::with_capacity(ring.nvars());
        for j in 0..ring.nvars() {
            let s = self.s_f(&ring.var(j))?;
            let mut img = target.zero();
            for i in 0..self.n {
                let content = s.component(i).substitute(&block_images[i], &target, None)?;
                // the p^i factor restores the precision the slot lost
                img = img.add(&content.mul_p_pow(i as u32))?;
            }
            images.push(img);
        }
        RingMap::new(&ring, &target, images)
    }

    /// The induced map on forms: pullback along the slot-expansion map.
    pub fn induced_form_map(&self, omega: &Form) -> Result<Form> {
        self.coordinate_embedding()?.pullback(omega)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileSlot {
    pub slot: usize,
    /// Total degree of the slot content (None for the zero polynomial).
    pub degree: Option<i64>,
    /// deg(a) * p^slot (None when a = 0).
    pub bound: Option<i64>,
}

/// Check the functoriality square: connecting map phi must intertwine the
/// lifts (else IncompatibleLifts), and then W(phi) o s_f = s_f' o phi on
/// every test input, exactly at the ledgered precision.
pub fn functoriality_check(
    cm: &ComparisonMap,
    cm2: &ComparisonMap,
    phi: &RingMap,
    tests: &[LPoly],
) -> Result<FunctorialityReport> {
    if phi.source() != cm.ring() || phi.target() != cm2.ring() {
        return Err(Error::VariableMismatch("connecting map rings do not line up".into()));
    }
    if cm.witt_length() != cm2.witt_length() {
        return Err(Error::LengthUnderflow(cm.witt_length().min(cm2.witt_length())));
    }
    let left = phi.compose(cm.lift().map())?; // phi o f
    let right = cm2.lift().map().compose(phi)?; // f' o phi
    for j in 0..cm.ring().nvars() {
        if left.image(j) != right.image(j) {
            return Err(Error::IncompatibleLifts(cm.ring().vars().name(j).to_string()));
        }
    }
    let mut cases = Vec::with_capacity(tests.len());
    for a in tests {
        let s = cm.s_f(a)?;
        let mapped: Vec<LPoly> = s
            .components()
            .iter()
            .map(|c| phi.apply(c))
            .collect::<Result<Vec<_>>>()?;
        let lhs = WittVec::with_ledger(cm2.ring().clone(), mapped, s.ledger().to_vec())?;
        let rhs = cm2.s_f(&phi.apply(a)?)?;
        if !lhs.eq_at_ledger(&rhs) {
            return Err(Error::FunctorialityViolation(a.to_string()));
        }
        cases.push(FunctorialityCase { input: a.to_string(), image: rhs.to_json() });
    }
    Ok(FunctorialityReport { cases })
}

#[derive(Debug, Clone)]
pub struct FunctorialityReport {
    pub cases: Vec<FunctorialityCase>,
}

#[derive(Debug, Clone)]
pub struct FunctorialityCase {
    pub input: String,
    pub image: serde_json::Value,
}

/// Project a form over the Witt coordinate ring to slot-0 coordinates
/// modulo p: X_{j,0} goes to x_j, all higher slot variables to 0. Fails if
/// a coefficient has a pole along a higher slot variable.
pub fn slot0_projection(cm: &ComparisonMap, omega: &Form) -> Result<Form> {
    let coord = cm.witt_coordinate_ring()?;
    if omega.ring() != &coord {
        return Err(Error::VariableMismatch("form is not over the Witt coordinate ring".into()));
    }
    let n = cm.witt_length();
    let base = cm.ring().with_ctx(cm.ring().ctx().with_precision(1)?);
    let mut out = Form::zero(&base, omega.degree());
    'terms: for (key, c) in omega.terms() {
        // dX_{j,i} -> 0 for i >= 1
        let mut base_key = Vec::with_capacity(key.len());
        for &v in key {
            let (j, i) = ((v as usize) / n, (v as usize) % n);
            if i != 0 {
                continue 'terms;
            }
            base_key.push(j as u32);
        }
        let mut coeff = base.zero();
        'monomials: for (exps, sc) in c.terms() {
            let mut base_exps = vec![0i32; base.nvars()];
            for (v, &e) in exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let (j, i) = (v / n, v % n);
                if i != 0 {
                    if e < 0 {
                        return Err(Error::NonUnitSubstitution {
                            var: coord.vars().name(v).to_string(),
                            reason: "pole along a higher slot variable".into(),
                        });
                    }
                    continue 'monomials; // the monomial maps to 0
                }
                base_exps[j] = e;
            }
            let reduced = base.ctx().scalar_at(sc.value() as i128, 1);
            coeff = coeff.add(&base.monomial(reduced, base_exps)?)?;
        }
        out = out.add(&Form::term(&coeff, &base_key))?;
    }
    Ok(out)
}
