//! Sparse multivariate Laurent polynomials over precision-tracked scalars.
//!
//! Negative exponents are only admitted on variables flagged invertible, so
//! the same type covers polynomial rings, their monomial localisations and
//! the coordinate rings of tori. Terms are keyed by exponent vectors in a
//! `BTreeMap`, which fixes the lexicographic term order used for canonical
//! serialization.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{PrecScalar, PrimeCtx};

/// Ordered variable names with per-variable invertibility flags.
#[derive(Debug, PartialEq, Eq)]
pub struct VarSet {
    names: Vec<String>,
    invertible: Vec<bool>,
}

impl VarSet {
    pub fn new(vars: &[(&str, bool)]) -> Result<Self> {
        let names: Vec<String> = vars.iter().map(|(n, _)| n.to_string()).collect();
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() || !n.chars().next().unwrap().is_ascii_alphabetic() {
                return Err(Error::Parse(format!("bad variable name `{n}`")));
            }
            if names[..i].contains(n) {
                return Err(Error::VariableMismatch(format!("duplicate variable `{n}`")));
            }
        }
        Ok(VarSet { names, invertible: vars.iter().map(|(_, f)| *f).collect() })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, j: usize) -> &str {
        &self.names[j]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn is_invertible(&self, j: usize) -> bool {
        self.invertible[j]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// A Laurent polynomial ring: a prime-power coefficient context plus a
/// variable set. Cheap to clone and compare.
#[derive(Debug, Clone)]
pub struct LaurentRing {
    ctx: PrimeCtx,
    vars: Arc<VarSet>,
}

impl PartialEq for LaurentRing {
    fn eq(&self, other: &Self) -> bool {
        self.ctx == other.ctx && (Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars)
    }
}

impl Eq for LaurentRing {}

impl LaurentRing {
    pub fn new(ctx: PrimeCtx, vars: &[(&str, bool)]) -> Result<Self> {
        Ok(LaurentRing { ctx, vars: Arc::new(VarSet::new(vars)?) })
    }

    pub fn ctx(&self) -> &PrimeCtx {
        &self.ctx
    }

    pub fn vars(&self) -> &VarSet {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    /// Same variables over a different coefficient context.
    pub fn with_ctx(&self, ctx: PrimeCtx) -> LaurentRing {
        LaurentRing { ctx, vars: Arc::clone(&self.vars) }
    }

    /// Extend the ring by fresh variables appended after the current ones.
    pub fn extend(&self, extra: &[(&str, bool)]) -> Result<LaurentRing> {
        let mut all: Vec<(&str, bool)> =
            self.vars.names.iter().map(|s| s.as_str()).zip(self.vars.invertible.iter().copied()).collect();
        for e in extra {
            all.push(*e);
        }
        LaurentRing::new(self.ctx, &all)
    }

    pub fn zero(&self) -> LPoly {
        LPoly { ring: self.clone(), terms: BTreeMap::new() }
    }

    pub fn one(&self) -> LPoly {
        self.constant(self.ctx.one())
    }

    pub fn constant(&self, c: PrecScalar) -> LPoly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(vec![0; self.nvars()], c);
        }
        LPoly { ring: self.clone(), terms }
    }

    pub fn constant_i(&self, c: i128) -> LPoly {
        self.constant(self.ctx.scalar(c))
    }

    pub fn var(&self, j: usize) -> LPoly {
        let mut e = vec![0i32; self.nvars()];
        e[j] = 1;
        self.monomial(self.ctx.one(), e).expect("exponent 1 is always legal")
    }

    /// c * x^exps; checks the invertibility flags.
    pub fn monomial(&self, c: PrecScalar, exps: Vec<i32>) -> Result<LPoly> {
        assert_eq!(exps.len(), self.nvars());
        self.check_exponents(&exps)?;
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        Ok(LPoly { ring: self.clone(), terms })
    }

    fn check_exponents(&self, exps: &[i32]) -> Result<()> {
        for (j, &e) in exps.iter().enumerate() {
            if e < 0 && !self.vars.is_invertible(j) {
                return Err(Error::VariableMismatch(format!(
                    "negative exponent on non-invertible variable `{}`",
                    self.vars.name(j)
                )));
            }
        }
        Ok(())
    }

    pub fn parse(&self, s: &str) -> Result<LPoly> {
        parse_poly(self, s)
    }
}

/// Truncation policy for rings carrying a formal homotopy variable: all
/// monomials with exponent of `var` above `cap` are discarded. Used only
/// where the dropped tail provably cannot contribute to later evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TTrunc {
    pub var: usize,
    pub cap: usize,
}

/// Sparse Laurent polynomial. No zero coefficients are stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LPoly {
    ring: LaurentRing,
    terms: BTreeMap<Vec<i32>, PrecScalar>,
}

impl LPoly {
    pub fn ring(&self) -> &LaurentRing {
        &self.ring
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn nterms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i32>, &PrecScalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[i32]) -> PrecScalar {
        self.terms.get(exps).copied().unwrap_or_else(|| self.ring.ctx.zero())
    }

    pub fn constant_coeff(&self) -> PrecScalar {
        self.coeff(&vec![0; self.ring.nvars()])
    }

    /// Max total degree over terms; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<i64> {
        self.terms.keys().map(|e| e.iter().map(|&x| x as i64).sum()).max()
    }

    /// Minimum precision over the stored coefficients (N for zero).
    pub fn min_prec(&self) -> u32 {
        self.terms.values().map(|c| c.prec()).min().unwrap_or(self.ring.ctx.precision())
    }

    fn check_same_ring(&self, other: &LPoly) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::VariableMismatch(format!(
                "{:?} vs {:?}",
                self.ring.vars.names(),
                other.ring.vars.names()
            )));
        }
        Ok(())
    }

    fn insert_term(terms: &mut BTreeMap<Vec<i32>, PrecScalar>, ctx: &PrimeCtx, e: &[i32], c: PrecScalar) {
        if c.is_zero() {
            return;
        }
        match terms.get_mut(e) {
            Some(existing) => {
                let s = existing.add(&c, ctx);
                if s.is_zero() {
                    terms.remove(e);
                } else {
                    *existing = s;
                }
            }
            None => {
                terms.insert(e.to_vec(), c);
            }
        }
    }

    pub fn add(&self, other: &LPoly) -> Result<LPoly> {
        self.check_same_ring(other)?;
        let ctx = &self.ring.ctx;
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            Self::insert_term(&mut terms, ctx, e, *c);
        }
        Ok(LPoly { ring: self.ring.clone(), terms })
    }

    pub fn sub(&self, other: &LPoly) -> Result<LPoly> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> LPoly {
        let ctx = &self.ring.ctx;
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), c.neg(ctx))).collect();
        LPoly { ring: self.ring.clone(), terms }
    }

    pub fn scale(&self, k: &PrecScalar) -> LPoly {
        let ctx = &self.ring.ctx;
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            let v = c.mul(k, ctx);
            if !v.is_zero() {
                terms.insert(e.clone(), v);
            }
        }
        LPoly { ring: self.ring.clone(), terms }
    }

    pub fn scale_int(&self, k: i128) -> LPoly {
        let ctx = &self.ring.ctx;
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            let v = c.mul_int(k, ctx);
            if !v.is_zero() {
                terms.insert(e.clone(), v);
            }
        }
        LPoly { ring: self.ring.clone(), terms }
    }

    /// Multiplication by p^v, with the absolute-precision gain of
    /// [`PrecScalar::mul_p_pow`] on every coefficient.
    pub fn mul_p_pow(&self, v: u32) -> LPoly {
        let ctx = &self.ring.ctx;
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            let s = c.mul_p_pow(v, ctx);
            if !s.is_zero() {
                terms.insert(e.clone(), s);
            }
        }
        LPoly { ring: self.ring.clone(), terms }
    }

    pub fn mul(&self, other: &LPoly) -> Result<LPoly> {
        self.mul_trunc(other, None)
    }

    pub fn mul_trunc(&self, other: &LPoly, trunc: Option<TTrunc>) -> Result<LPoly> {
        self.check_same_ring(other)?;
        let ctx = &self.ring.ctx;
        let mut terms = BTreeMap::new();
        let mut key = vec![0i32; self.ring.nvars()];
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                for (k, (x, y)) in key.iter_mut().zip(ea.iter().zip(eb.iter())) {
                    *k = x + y;
                }
                if let Some(t) = trunc {
                    if key[t.var] as i64 > t.cap as i64 {
                        continue;
                    }
                }
                Self::insert_term(&mut terms, ctx, &key, ca.mul(cb, ctx));
            }
        }
        Ok(LPoly { ring: self.ring.clone(), terms })
    }

    pub fn pow(&self, k: u32) -> Result<LPoly> {
        self.pow_trunc(k, None)
    }

    pub fn pow_trunc(&self, k: u32, trunc: Option<TTrunc>) -> Result<LPoly> {
        let mut acc = self.ring.one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul_trunc(&base, trunc)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul_trunc(&base, trunc)?;
            }
        }
        Ok(acc)
    }

    /// Partial derivative with respect to the j-th variable.
    pub fn partial_derivative(&self, j: usize) -> LPoly {
        let ctx = &self.ring.ctx;
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            if e[j] == 0 {
                continue;
            }
            let coeff = c.mul_int(e[j] as i128, ctx);
            if coeff.is_zero() {
                continue;
            }
            let mut e2 = e.clone();
            e2[j] -= 1;
            Self::insert_term(&mut terms, ctx, &e2, coeff);
        }
        LPoly { ring: self.ring.clone(), terms }
    }

    /// Exact division of every coefficient by p^v; precision drops by v.
    pub fn div_exact_p(&self, v: u32) -> Result<LPoly> {
        let ctx = &self.ring.ctx;
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            let q = c.div_exact_p(v, ctx)?;
            if !q.is_zero() {
                terms.insert(e.clone(), q);
            }
        }
        Ok(LPoly { ring: self.ring.clone(), terms })
    }

    /// Drop coefficient information beyond `prec` digits.
    pub fn truncate_prec(&self, prec: u32) -> LPoly {
        let ctx = &self.ring.ctx;
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            let t = c.truncate(prec, ctx);
            if !t.is_zero() {
                terms.insert(e.clone(), t);
            }
        }
        LPoly { ring: self.ring.clone(), terms }
    }

    /// Equality of residues modulo p^prec.
    pub fn eq_mod(&self, other: &LPoly, prec: u32) -> bool {
        match self.sub(other) {
            Ok(d) => d.truncate_prec(prec).is_zero(),
            Err(_) => false,
        }
    }

    /// Arbitrary coefficient lift into a ring with a larger modulus: stored
    /// representatives are reused at the target's full precision. Sound only
    /// for consumers that are universal integral polynomials in the entries.
    pub fn lift_to_ring(&self, target: &LaurentRing) -> LPoly {
        assert_eq!(*self.ring.vars, *target.vars, "lift must preserve variables");
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| (e.clone(), c.lift_to(target.ctx())))
            .collect();
        LPoly { ring: target.clone(), terms }
    }

    /// Reduce coefficients into a ring with a smaller (or equal) modulus.
    pub fn reduce_to_ring(&self, target: &LaurentRing) -> LPoly {
        assert_eq!(*self.ring.vars, *target.vars, "reduction must preserve variables");
        let tctx = target.ctx();
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            let prec = c.prec().min(tctx.precision());
            let r = tctx.scalar_at(c.value() as i128, prec);
            if !r.is_zero() {
                terms.insert(e.clone(), r);
            }
        }
        LPoly { ring: target.clone(), terms }
    }

    /// Ring homomorphism determined by images of the generators.
    ///
    /// `images[j]` (over `target`) is the image of the j-th variable. A
    /// variable occurring with negative exponents must map to a unit; with
    /// `trunc` set, units of the truncated T-ring are accepted and their
    /// inverses cut at the cap.
    pub fn substitute(&self, images: &[LPoly], target: &LaurentRing, trunc: Option<TTrunc>) -> Result<LPoly> {
        assert_eq!(images.len(), self.ring.nvars());
        let mut max_pos = vec![0i32; self.ring.nvars()];
        let mut max_neg = vec![0i32; self.ring.nvars()];
        for e in self.terms.keys() {
            for (j, &x) in e.iter().enumerate() {
                if x > 0 {
                    max_pos[j] = max_pos[j].max(x);
                } else {
                    max_neg[j] = max_neg[j].max(-x);
                }
            }
        }
        // power tables for each variable, positive and negative directions
        let mut pos_pows: Vec<Vec<LPoly>> = Vec::with_capacity(images.len());
        let mut neg_pows: Vec<Vec<LPoly>> = Vec::with_capacity(images.len());
        for j in 0..images.len() {
            pos_pows.push(build_powers(&images[j], max_pos[j] as u32, trunc)?);
            if max_neg[j] > 0 {
                let inv = images[j].unit_inverse_trunc(trunc).map_err(|e| match e {
                    Error::NonUnitSubstitution { reason, .. } => Error::NonUnitSubstitution {
                        var: self.ring.vars.name(j).to_string(),
                        reason,
                    },
                    other => other,
                })?;
                neg_pows.push(build_powers(&inv, max_neg[j] as u32, trunc)?);
            } else {
                neg_pows.push(Vec::new());
            }
        }
        let mut acc = target.zero();
        for (e, c) in &self.terms {
            let mut term = target.constant(target.ctx().scalar_at(
                c.value() as i128,
                c.prec().min(target.ctx().precision()),
            ));
            for (j, &x) in e.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                let f = if x > 0 { &pos_pows[j][x as usize] } else { &neg_pows[j][(-x) as usize] };
                term = term.mul_trunc(f, trunc)?;
            }
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }

    /// Inverse of a unit. A Laurent polynomial is a unit iff exactly one
    /// term has a unit coefficient, that term's monomial is supported on
    /// invertible variables, and (without truncation) nothing else obstructs
    /// the geometric series, which terminates because p is nilpotent.
    pub fn unit_inverse(&self) -> Result<LPoly> {
        self.unit_inverse_trunc(None)
    }

    pub fn unit_inverse_trunc(&self, trunc: Option<TTrunc>) -> Result<LPoly> {
        let ctx = &self.ring.ctx;
        let name = |e: &Vec<i32>| format!("{:?}", e);
        // split off the T-free part when a truncation variable is present
        let (f0, f_plus) = match trunc {
            Some(t) => {
                let mut a = self.ring.zero();
                let mut b = self.ring.zero();
                for (e, c) in &self.terms {
                    let dst = if e[t.var] == 0 { &mut a } else { &mut b };
                    Self::insert_term(&mut dst.terms, ctx, e, *c);
                }
                (a, b)
            }
            None => (self.clone(), self.ring.zero()),
        };
        let mut unit_terms = f0.terms.iter().filter(|(_, c)| c.is_unit(ctx));
        let (e_star, c_star) = match (unit_terms.next(), unit_terms.next()) {
            (Some(t), None) => t,
            (None, _) => {
                return Err(Error::NonUnitSubstitution {
                    var: String::new(),
                    reason: "no term with unit coefficient".into(),
                })
            }
            (Some(a), Some(b)) => {
                return Err(Error::NonUnitSubstitution {
                    var: String::new(),
                    reason: format!("two unit terms {} and {}", name(a.0), name(b.0)),
                })
            }
        };
        for (j, &x) in e_star.iter().enumerate() {
            if x != 0 && !self.ring.vars.is_invertible(j) {
                return Err(Error::NonUnitSubstitution {
                    var: self.ring.vars.name(j).to_string(),
                    reason: format!("unit monomial involves non-invertible `{}`", self.ring.vars.name(j)),
                });
            }
        }
        let base = self
            .ring
            .monomial(c_star.inv(ctx)?, e_star.iter().map(|&x| -x).collect())
            .expect("inverse monomial of an invertible-supported monomial is legal");
        // f0 * base = 1 + s with every term of s divisible by p
        let g = f0.mul(&base)?;
        let s = g.sub(&self.ring.one())?;
        let inv0 = geometric_inverse(&self.ring, &s, ctx.precision() as usize, trunc)?;
        let inv_f0 = base.mul_trunc(&inv0, trunc)?;
        if f_plus.is_zero() {
            return Ok(inv_f0);
        }
        // full inverse: inv(f0) * (1 + f_plus*inv(f0))^{-1}, where the series
        // in the second factor terminates at the T-degree cap
        let t = f_plus.mul_trunc(&inv_f0, trunc)?;
        let cap = trunc.map(|t| t.cap).unwrap_or(0) + ctx.precision() as usize;
        let geom = geometric_inverse(&self.ring, &t, cap, trunc)?;
        inv_f0.mul_trunc(&geom, trunc)
    }
}

/// (1 + s)^{-1} = sum (-s)^k, valid when the series terminates (p-divisible
/// s, or a T-degree cap; iteration stops at the first vanishing power).
fn geometric_inverse(ring: &LaurentRing, s: &LPoly, max_iter: usize, trunc: Option<TTrunc>) -> Result<LPoly> {
    let mut acc = ring.one();
    let mut pw = ring.one();
    let ms = s.neg();
    for _ in 0..max_iter {
        pw = pw.mul_trunc(&ms, trunc)?;
        if pw.is_zero() {
            break;
        }
        acc = acc.add(&pw)?;
    }
    Ok(acc)
}

fn build_powers(base: &LPoly, up_to: u32, trunc: Option<TTrunc>) -> Result<Vec<LPoly>> {
    let mut v = Vec::with_capacity(up_to as usize + 1);
    v.push(base.ring().one());
    for k in 1..=up_to {
        let next = v[k as usize - 1].mul_trunc(base, trunc)?;
        v.push(next);
    }
    Ok(v)
}

// ---- canonical text format ----

impl fmt::Display for LPoly {
    /// Canonical form: terms in ascending lexicographic exponent order,
    /// `coeff*x^e*y^f` with signed decimal exponents, joined by ` + `.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", c.value())?;
            for (j, &x) in e.iter().enumerate() {
                if x != 0 {
                    write!(f, "*{}^{}", self.ring.vars.name(j), x)?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, PartialEq)]
enum Tok {
    Int(i128),
    Ident(String),
    Caret,
    Star,
    Plus,
    Minus,
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let mut it = s.chars().peekable();
    while let Some(&c) = it.peek() {
        match c {
            ' ' | '\t' | '\n' => {
                it.next();
            }
            '^' => {
                it.next();
                out.push(Tok::Caret);
            }
            '*' => {
                it.next();
                out.push(Tok::Star);
            }
            '+' => {
                it.next();
                out.push(Tok::Plus);
            }
            '-' => {
                it.next();
                out.push(Tok::Minus);
            }
            '0'..='9' => {
                let mut n = 0i128;
                while let Some(&d) = it.peek() {
                    if let Some(v) = d.to_digit(10) {
                        n = n
                            .checked_mul(10)
                            .and_then(|n| n.checked_add(v as i128))
                            .ok_or_else(|| Error::Parse("integer literal overflow".into()))?;
                        it.next();
                    } else {
                        break;
                    }
                }
                out.push(Tok::Int(n));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut name = String::new();
                while let Some(&d) = it.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        name.push(d);
                        it.next();
                    } else {
                        break;
                    }
                }
                out.push(Tok::Ident(name));
            }
            other => return Err(Error::Parse(format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

fn parse_poly(ring: &LaurentRing, s: &str) -> Result<LPoly> {
    let toks = tokenize(s)?;
    if toks.is_empty() {
        return Err(Error::Parse("empty polynomial".into()));
    }
    let mut pos = 0usize;
    let mut acc = ring.zero();
    let mut sign = 1i128;
    if toks[pos] == Tok::Minus {
        sign = -1;
        pos += 1;
    }
    loop {
        let (term, next) = parse_term(ring, &toks, pos)?;
        pos = next;
        acc = acc.add(&term.scale_int(sign))?;
        if pos == toks.len() {
            return Ok(acc);
        }
        sign = match toks[pos] {
            Tok::Plus => 1,
            Tok::Minus => -1,
            _ => return Err(Error::Parse("expected `+` or `-` between terms".into())),
        };
        pos += 1;
    }
}

fn parse_term(ring: &LaurentRing, toks: &[Tok], mut pos: usize) -> Result<(LPoly, usize)> {
    let mut coeff = 1i128;
    let mut exps = vec![0i32; ring.nvars()];
    loop {
        match toks.get(pos) {
            Some(Tok::Int(n)) => {
                coeff = coeff
                    .checked_mul(*n)
                    .ok_or_else(|| Error::Parse("coefficient overflow".into()))?;
                pos += 1;
            }
            Some(Tok::Ident(name)) => {
                let j = ring
                    .vars()
                    .index_of(name)
                    .ok_or_else(|| Error::Parse(format!("unknown variable `{name}`")))?;
                pos += 1;
                let mut e = 1i64;
                if toks.get(pos) == Some(&Tok::Caret) {
                    pos += 1;
                    let mut neg = false;
                    if toks.get(pos) == Some(&Tok::Minus) {
                        neg = true;
                        pos += 1;
                    }
                    match toks.get(pos) {
                        Some(Tok::Int(n)) => {
                            e = *n as i64 * if neg { -1 } else { 1 };
                            pos += 1;
                        }
                        _ => return Err(Error::Parse("expected exponent after `^`".into())),
                    }
                }
                if e.unsigned_abs() > i32::MAX as u64 {
                    return Err(Error::Parse("exponent too large".into()));
                }
                exps[j] = exps[j]
                    .checked_add(e as i32)
                    .ok_or_else(|| Error::Parse("exponent overflow".into()))?;
            }
            _ => return Err(Error::Parse("expected a coefficient or variable".into())),
        }
        if toks.get(pos) == Some(&Tok::Star) {
            pos += 1;
            continue;
        }
        break;
    }
    let mono = ring.monomial(ring.ctx().scalar(coeff), exps)?;
    Ok((mono, pos))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(p: u64, n: u32) -> LaurentRing {
        let ctx = PrimeCtx::new(p, n).unwrap();
        LaurentRing::new(ctx, &[("x", true), ("y", false)]).unwrap()
    }

    #[test]
    fn product_of_conjugates() {
        let r = ring(5, 3);
        let x = r.var(0);
        let one = r.one();
        let lhs = x.add(&one).unwrap().mul(&x.sub(&one).unwrap()).unwrap();
        let rhs = x.mul(&x).unwrap().sub(&one).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn substitute_power_map() {
        let r = ring(3, 3);
        let x2 = r.var(0).pow(2).unwrap();
        let images = vec![r.var(0).pow(3).unwrap(), r.var(1).clone()];
        let out = x2.substitute(&images, &r, None).unwrap();
        assert_eq!(out, r.var(0).pow(6).unwrap());
    }

    #[test]
    fn derivative_of_inverse_monomial() {
        let r = ring(7, 2);
        let xinv = r.monomial(r.ctx().one(), vec![-1, 0]).unwrap();
        let d = xinv.partial_derivative(0);
        let expected = r.monomial(r.ctx().scalar(-1), vec![-2, 0]).unwrap();
        assert_eq!(d, expected);
    }

    #[test]
    fn negative_exponent_rejected_on_polynomial_variable() {
        let r = ring(3, 2);
        assert!(r.monomial(r.ctx().one(), vec![0, -1]).is_err());
    }

    #[test]
    fn unit_inverse_of_one_plus_p() {
        // 1 + p*y is a unit even though y is not invertible
        let r = ring(3, 4);
        let f = r.one().add(&r.var(1).scale_int(3)).unwrap();
        let inv = f.unit_inverse().unwrap();
        assert_eq!(f.mul(&inv).unwrap(), r.one());
    }

    #[test]
    fn unit_inverse_of_laurent_monomial_times_unit() {
        let r = ring(5, 3);
        // 2 x^-1 (1 + 5(x + y))
        let u = r.one().add(&r.var(0).add(&r.var(1)).unwrap().scale_int(5)).unwrap();
        let f = r.monomial(r.ctx().scalar(2), vec![-1, 0]).unwrap().mul(&u).unwrap();
        let inv = f.unit_inverse().unwrap();
        assert_eq!(f.mul(&inv).unwrap(), r.one());
    }

    #[test]
    fn non_unit_is_rejected() {
        let r = ring(5, 3);
        let f = r.var(0).add(&r.one()).unwrap(); // x + 1: two unit terms
        assert!(f.unit_inverse().is_err());
        let g = r.var(1); // y is not invertible
        assert!(g.unit_inverse().is_err());
        assert!(r.zero().unit_inverse().is_err());
    }

    #[test]
    fn substitution_needs_units_for_inverted_variables() {
        let r = ring(3, 3);
        let xinv = r.monomial(r.ctx().one(), vec![-1, 0]).unwrap();
        // x -> y is not a unit image
        let bad = vec![r.var(1).clone(), r.var(1).clone()];
        assert!(matches!(
            xinv.substitute(&bad, &r, None),
            Err(Error::NonUnitSubstitution { .. })
        ));
        // x -> 2x works
        let good = vec![r.var(0).scale_int(2), r.var(1).clone()];
        let out = xinv.substitute(&good, &r, None).unwrap();
        let expected = r
            .monomial(r.ctx().scalar(2).inv(r.ctx()).unwrap(), vec![-1, 0])
            .unwrap();
        assert_eq!(out, expected);
    }

    #[test]
    fn display_and_parse_roundtrip() {
        let r = ring(3, 3);
        let f = r
            .parse("2*x^-1*y^3 + 1 + 26*x^2")
            .unwrap();
        let s = f.to_string();
        assert_eq!(r.parse(&s).unwrap(), f);
        assert_eq!(r.parse("x - x").unwrap(), r.zero());
        assert_eq!(r.zero().to_string(), "0");
        assert!(r.parse("z + 1").is_err());
        assert!(r.parse("y^-2").is_err());
    }

    #[test]
    fn truncated_inverse_in_t_ring() {
        let r0 = ring(2, 4);
        let rt = r0.extend(&[("T", false)]).unwrap();
        let cap = TTrunc { var: 2, cap: 6 };
        // x + T*x = x(1+T): invertible only in the truncated sense
        let f = rt.parse("x + x*T").unwrap();
        let inv = f.unit_inverse_trunc(Some(cap)).unwrap();
        let prod = f.mul_trunc(&inv, Some(cap)).unwrap();
        assert_eq!(prod, rt.one());
        // without the cap this is not a unit
        assert!(f.unit_inverse().is_err());
    }
}
