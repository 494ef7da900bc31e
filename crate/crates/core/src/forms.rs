//! Graded differential forms over Laurent polynomial rings.
//!
//! A [`Form`] of degree q stores coefficients keyed by strictly increasing
//! index tuples (i_1 < ... < i_q); antisymmetry is normalized away at
//! construction. [`TForm`] is the same data over a ring with one adjoined
//! variable T, decomposed as sum_i T^i (w'_i + dT /\ w''_i) with dT factored
//! to the left, which is the shape the homotopy operator reads off.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::lpoly::{LPoly, LaurentRing, TTrunc};
use crate::scalar::PrecScalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Form {
    ring: LaurentRing,
    degree: usize,
    terms: BTreeMap<Vec<u32>, LPoly>,
}

/// Merge two strictly increasing index tuples, tracking the sign of the
/// shuffle; `None` on a repeated index.
fn merge_sorted(a: &[u32], b: &[u32]) -> Option<(Vec<u32>, i64)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let mut sign = 1i64;
    while i < a.len() && j < b.len() {
        if a[i] == b[j] {
            return None;
        }
        if a[i] < b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            // b[j] jumps over the remaining elements of a
            if (a.len() - i) % 2 == 1 {
                sign = -sign;
            }
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Some((out, sign))
}

/// Sort an index tuple, returning the permutation sign; `None` on duplicates.
fn sort_indices(mut idx: Vec<u32>) -> Option<(Vec<u32>, i64)> {
    let mut sign = 1i64;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] >= idx[j] {
            if idx[j - 1] == idx[j] {
                return None;
            }
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    Some((idx, sign))
}

impl Form {
    pub fn zero(ring: &LaurentRing, degree: usize) -> Form {
        Form { ring: ring.clone(), degree, terms: BTreeMap::new() }
    }

    pub fn from_poly(p: &LPoly) -> Form {
        let mut terms = BTreeMap::new();
        if !p.is_zero() {
            terms.insert(Vec::new(), p.clone());
        }
        Form { ring: p.ring().clone(), degree: 0, terms }
    }

    /// coeff * dx_{i_1} /\ ... /\ dx_{i_q}, indices in any order.
    pub fn term(coeff: &LPoly, indices: &[u32]) -> Form {
        let ring = coeff.ring().clone();
        let degree = indices.len();
        let mut terms = BTreeMap::new();
        if let Some((sorted, sign)) = sort_indices(indices.to_vec()) {
            let c = coeff.scale_int(sign as i128);
            if !c.is_zero() {
                terms.insert(sorted, c);
            }
        }
        Form { ring, degree, terms }
    }

    pub fn ring(&self) -> &LaurentRing {
        &self.ring
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &LPoly)> {
        self.terms.iter()
    }

    pub fn coeff(&self, indices: &[u32]) -> LPoly {
        self.terms.get(indices).cloned().unwrap_or_else(|| self.ring.zero())
    }

    fn insert(&mut self, key: Vec<u32>, c: LPoly) -> Result<()> {
        if c.is_zero() {
            return Ok(());
        }
        match self.terms.get_mut(&key) {
            Some(existing) => {
                let s = existing.add(&c)?;
                if s.is_zero() {
                    self.terms.remove(&key);
                } else {
                    *existing = s;
                }
            }
            None => {
                self.terms.insert(key, c);
            }
        }
        Ok(())
    }

    pub fn add(&self, other: &Form) -> Result<Form> {
        if self.ring != other.ring {
            return Err(Error::VariableMismatch("forms over different rings".into()));
        }
        // a zero form is degree-agnostic
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.degree != other.degree {
            return Err(Error::VariableMismatch(format!(
                "cannot add forms of degree {} and {}",
                self.degree, other.degree
            )));
        }
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.insert(k.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn neg(&self) -> Form {
        let terms = self.terms.iter().map(|(k, c)| (k.clone(), c.neg())).collect();
        Form { ring: self.ring.clone(), degree: self.degree, terms }
    }

    pub fn sub(&self, other: &Form) -> Result<Form> {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &PrecScalar) -> Form {
        let mut terms = BTreeMap::new();
        for (key, c) in &self.terms {
            let s = c.scale(k);
            if !s.is_zero() {
                terms.insert(key.clone(), s);
            }
        }
        Form { ring: self.ring.clone(), degree: self.degree, terms }
    }

    pub fn scale_int(&self, k: i128) -> Form {
        let mut terms = BTreeMap::new();
        for (key, c) in &self.terms {
            let s = c.scale_int(k);
            if !s.is_zero() {
                terms.insert(key.clone(), s);
            }
        }
        Form { ring: self.ring.clone(), degree: self.degree, terms }
    }

    pub fn scale_poly(&self, f: &LPoly) -> Result<Form> {
        let mut out = Form::zero(&self.ring, self.degree);
        for (key, c) in &self.terms {
            out.insert(key.clone(), c.mul(f)?)?;
        }
        Ok(out)
    }

    pub fn wedge(&self, other: &Form) -> Result<Form> {
        if self.ring != other.ring {
            return Err(Error::VariableMismatch("forms over different rings".into()));
        }
        let mut out = Form::zero(&self.ring, self.degree + other.degree);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                if let Some((key, sign)) = merge_sorted(ka, kb) {
                    out.insert(key, ca.mul(cb)?.scale_int(sign as i128))?;
                }
            }
        }
        Ok(out)
    }

    /// Exterior derivative.
    pub fn d(&self) -> Result<Form> {
        let mut out = Form::zero(&self.ring, self.degree + 1);
        for (key, c) in &self.terms {
            for j in 0..self.ring.nvars() as u32 {
                if key.binary_search(&j).is_ok() {
                    continue;
                }
                let dc = c.partial_derivative(j as usize);
                if dc.is_zero() {
                    continue;
                }
                let (merged, sign) = merge_sorted(&[j], key).expect("j not in key");
                out.insert(merged, dc.scale_int(sign as i128))?;
            }
        }
        Ok(out)
    }

    pub fn truncate_prec(&self, prec: u32) -> Form {
        let mut terms = BTreeMap::new();
        for (k, c) in &self.terms {
            let t = c.truncate_prec(prec);
            if !t.is_zero() {
                terms.insert(k.clone(), t);
            }
        }
        Form { ring: self.ring.clone(), degree: self.degree, terms }
    }

    pub fn eq_mod(&self, other: &Form, prec: u32) -> bool {
        match self.sub(other) {
            Ok(d) => d.truncate_prec(prec).is_zero(),
            Err(_) => false,
        }
    }

    pub fn min_prec(&self) -> u32 {
        self.terms
            .values()
            .map(|c| c.min_prec())
            .min()
            .unwrap_or(self.ring.ctx().precision())
    }

    pub fn reduce_to_ring(&self, target: &LaurentRing) -> Form {
        let mut terms = BTreeMap::new();
        for (k, c) in &self.terms {
            let r = c.reduce_to_ring(target);
            if !r.is_zero() {
                terms.insert(k.clone(), r);
            }
        }
        Form { ring: target.clone(), degree: self.degree, terms }
    }

    /// Split into multidegree-homogeneous pieces, where dx_j carries the
    /// degree of x_j.
    pub fn multidegree_components(&self) -> BTreeMap<Vec<i64>, Form> {
        let mut out: BTreeMap<Vec<i64>, Form> = BTreeMap::new();
        for (key, c) in &self.terms {
            for (exps, coeff) in c.terms() {
                let mut m: Vec<i64> = exps.iter().map(|&e| e as i64).collect();
                for &j in key {
                    m[j as usize] += 1;
                }
                let mono = self
                    .ring
                    .monomial(*coeff, exps.clone())
                    .expect("existing exponents are legal");
                let piece = Form::term(&mono, key);
                let entry = out.entry(m).or_insert_with(|| Form::zero(&self.ring, self.degree));
                *entry = entry.add(&piece).expect("same ring and degree");
            }
        }
        out.retain(|_, f| !f.is_zero());
        out
    }

    /// Canonical JSON: degree plus (indices, coefficient string) pairs.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "degree": self.degree,
            "terms": self
                .terms
                .iter()
                .map(|(k, c)| serde_json::json!({ "indices": k, "coeff": c.to_string() }))
                .collect::<Vec<_>>(),
        })
    }
}

/// A ring homomorphism between Laurent polynomial rings, given by generator
/// images. Invertible generators must map to units; when the target carries
/// a truncated homotopy variable the unit check and all products honor the
/// truncation cap.
#[derive(Debug, Clone, PartialEq)]
pub struct RingMap {
    source: LaurentRing,
    target: LaurentRing,
    images: Vec<LPoly>,
    t_trunc: Option<TTrunc>,
}

impl RingMap {
    pub fn new(source: &LaurentRing, target: &LaurentRing, images: Vec<LPoly>) -> Result<RingMap> {
        Self::with_trunc(source, target, images, None)
    }

    pub fn with_trunc(
        source: &LaurentRing,
        target: &LaurentRing,
        images: Vec<LPoly>,
        t_trunc: Option<TTrunc>,
    ) -> Result<RingMap> {
        if images.len() != source.nvars() {
            return Err(Error::VariableMismatch(format!(
                "{} generators, {} images",
                source.nvars(),
                images.len()
            )));
        }
        for (j, img) in images.iter().enumerate() {
            if img.ring() != target {
                return Err(Error::VariableMismatch(format!(
                    "image of `{}` lives over the wrong ring",
                    source.vars().name(j)
                )));
            }
            if source.vars().is_invertible(j) {
                img.unit_inverse_trunc(t_trunc).map_err(|e| match e {
                    Error::NonUnitSubstitution { reason, .. } => Error::NonUnitSubstitution {
                        var: source.vars().name(j).to_string(),
                        reason,
                    },
                    other => other,
                })?;
            }
        }
        Ok(RingMap { source: source.clone(), target: target.clone(), images, t_trunc })
    }

    pub fn identity(ring: &LaurentRing) -> RingMap {
        let images = (0..ring.nvars()).map(|j| ring.var(j)).collect();
        RingMap { source: ring.clone(), target: ring.clone(), images, t_trunc: None }
    }

    pub fn source(&self) -> &LaurentRing {
        &self.source
    }

    pub fn target(&self) -> &LaurentRing {
        &self.target
    }

    pub fn image(&self, j: usize) -> &LPoly {
        &self.images[j]
    }

    pub fn images(&self) -> &[LPoly] {
        &self.images
    }

    pub fn t_trunc(&self) -> Option<TTrunc> {
        self.t_trunc
    }

    pub fn apply(&self, f: &LPoly) -> Result<LPoly> {
        if f.ring() != &self.source {
            return Err(Error::VariableMismatch("input over the wrong ring".into()));
        }
        f.substitute(&self.images, &self.target, self.t_trunc)
    }

    /// self o inner (apply `inner` first).
    pub fn compose(&self, inner: &RingMap) -> Result<RingMap> {
        if inner.target != self.source {
            return Err(Error::VariableMismatch("composition rings do not line up".into()));
        }
        let images = inner
            .images
            .iter()
            .map(|img| self.apply(img))
            .collect::<Result<Vec<_>>>()?;
        RingMap::with_trunc(&inner.source, &self.target, images, self.t_trunc)
    }

    /// Do the two maps agree modulo p on every generator?
    pub fn congruent_mod_p(&self, other: &RingMap) -> Result<()> {
        if self.source != other.source || self.target != other.target {
            return Err(Error::VariableMismatch("maps with different source or target".into()));
        }
        for j in 0..self.images.len() {
            if !self.images[j].eq_mod(&other.images[j], 1) {
                return Err(Error::NotCongruentModP(self.source.vars().name(j).to_string()));
            }
        }
        Ok(())
    }

    /// Functorial action on forms: coefficients through the map, dx_j to
    /// d(image of x_j).
    pub fn pullback(&self, omega: &Form) -> Result<Form> {
        if omega.ring() != &self.source {
            return Err(Error::VariableMismatch("form over the wrong ring".into()));
        }
        // differentials of the images, computed once
        let mut dimg: Vec<Option<Form>> = vec![None; self.images.len()];
        let mut out = Form::zero(&self.target, omega.degree());
        for (key, c) in omega.terms() {
            let mut piece = Form::from_poly(&self.apply(c)?);
            for &j in key {
                let dj = match &dimg[j as usize] {
                    Some(f) => f.clone(),
                    None => {
                        let f = Form::from_poly(&self.images[j as usize]).d()?;
                        dimg[j as usize] = Some(f.clone());
                        f
                    }
                };
                piece = piece.wedge(&dj)?;
            }
            // keep truncated products truncated
            if let Some(t) = self.t_trunc {
                piece = truncate_form_tdeg(&piece, t);
            }
            out = out.add(&piece)?;
        }
        Ok(out)
    }
}

fn truncate_form_tdeg(f: &Form, t: TTrunc) -> Form {
    let ring = f.ring().clone();
    let mut out = Form::zero(&ring, f.degree());
    for (key, c) in f.terms() {
        let mut kept = ring.zero();
        for (e, coeff) in c.terms() {
            if e[t.var] as i64 <= t.cap as i64 {
                let mono = ring.monomial(*coeff, e.clone()).expect("existing exponents are legal");
                kept = kept.add(&mono).expect("same ring");
            }
        }
        out.insert(key.clone(), kept).expect("same ring");
    }
    out
}

/// Forms over B[T] in the decomposed shape sum_i T^i (w'_i + dT /\ w''_i).
///
/// The base ring is B; the T variable is appended last. The decomposition
/// is polynomial in T: the weak completion is modeled by its dense
/// polynomial subring, which every verification input lives in.
#[derive(Debug, Clone, PartialEq)]
pub struct TForm {
    base: LaurentRing,
    t_name: String,
    degree: usize,
    prime: Vec<Form>,
    double_prime: Vec<Form>,
}

/// Pick a variable name for the adjoined homotopy parameter that does not
/// collide with the base ring.
pub fn fresh_t_name(base: &LaurentRing) -> String {
    if base.vars().index_of("T").is_none() {
        return "T".to_string();
    }
    let mut k = 1;
    loop {
        let cand = format!("T{k}");
        if base.vars().index_of(&cand).is_none() {
            return cand;
        }
        k += 1;
    }
}

impl TForm {
    pub fn new(
        base: &LaurentRing,
        t_name: &str,
        degree: usize,
        prime: Vec<Form>,
        double_prime: Vec<Form>,
    ) -> Result<TForm> {
        for f in &prime {
            if !f.is_zero() && (f.degree() != degree || f.ring() != base) {
                return Err(Error::VariableMismatch("bad prime part".into()));
            }
        }
        for f in &double_prime {
            if !f.is_zero() && (degree == 0 || f.degree() != degree - 1 || f.ring() != base) {
                return Err(Error::VariableMismatch("bad dT part".into()));
            }
        }
        let mut tf = TForm {
            base: base.clone(),
            t_name: t_name.to_string(),
            degree,
            prime,
            double_prime,
        };
        tf.trim();
        Ok(tf)
    }

    fn trim(&mut self) {
        while self.prime.last().is_some_and(|f| f.is_zero()) {
            self.prime.pop();
        }
        while self.double_prime.last().is_some_and(|f| f.is_zero()) {
            self.double_prime.pop();
        }
    }

    pub fn zero(base: &LaurentRing, t_name: &str, degree: usize) -> TForm {
        TForm {
            base: base.clone(),
            t_name: t_name.to_string(),
            degree,
            prime: Vec::new(),
            double_prime: Vec::new(),
        }
    }

    pub fn base(&self) -> &LaurentRing {
        &self.base
    }

    pub fn t_name(&self) -> &str {
        &self.t_name
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.prime.iter().all(|f| f.is_zero()) && self.double_prime.iter().all(|f| f.is_zero())
    }

    /// w'_i (zero beyond the stored range).
    pub fn prime_part(&self, i: usize) -> Form {
        self.prime.get(i).cloned().unwrap_or_else(|| Form::zero(&self.base, self.degree))
    }

    /// w''_i (zero beyond the stored range).
    pub fn double_prime_part(&self, i: usize) -> Form {
        self.double_prime
            .get(i)
            .cloned()
            .unwrap_or_else(|| Form::zero(&self.base, self.degree.saturating_sub(1)))
    }

    pub fn max_t_degree(&self) -> usize {
        self.prime.len().max(self.double_prime.len()).saturating_sub(1)
    }

    /// The extended ring B[T].
    pub fn ext_ring(&self) -> Result<LaurentRing> {
        self.base.extend(&[(self.t_name.as_str(), false)])
    }

    /// Substitute T = c, dT = 0: returns sum_i c^i w'_i.
    pub fn eval_t(&self, c: &PrecScalar) -> Result<Form> {
        let ctx = self.base.ctx();
        let mut acc = Form::zero(&self.base, self.degree);
        let mut power = ctx.one();
        for (i, f) in self.prime.iter().enumerate() {
            if i > 0 {
                power = power.mul(c, ctx);
            }
            if power.is_zero() {
                break;
            }
            acc = acc.add(&f.scale(&power))?;
        }
        Ok(acc)
    }

    /// The differential of B[T], in decomposed coordinates:
    /// d(T^i w') = T^i d(w') + i T^(i-1) dT /\ w',
    /// d(T^i dT /\ w'') = -T^i dT /\ d(w'').
    pub fn d(&self) -> Result<TForm> {
        let len = self.prime.len().max(self.double_prime.len() + 1).max(1);
        let mut prime = Vec::with_capacity(len);
        let mut double_prime = Vec::with_capacity(len);
        for i in 0..len {
            prime.push(self.prime_part(i).d()?);
            let from_prime = self.prime_part(i + 1).scale_int((i + 1) as i128);
            let from_dp = self.double_prime_part(i).d()?.neg();
            double_prime.push(from_prime.add(&from_dp)?);
        }
        TForm::new(&self.base, &self.t_name, self.degree + 1, prime, double_prime)
    }

    /// Reassemble the plain form over B[T].
    pub fn to_form(&self) -> Result<Form> {
        let ext = self.ext_ring()?;
        let t = self.base.nvars();
        let mut out = Form::zero(&ext, self.degree);
        for (i, f) in self.prime.iter().enumerate() {
            for (key, c) in f.terms() {
                let lifted = embed_in_t_ring(c, &ext, i as i32);
                out = out.add(&Form::term(&lifted, key))?;
            }
        }
        for (i, f) in self.double_prime.iter().enumerate() {
            for (key, c) in f.terms() {
                // dT /\ dx_J = (-1)^{|J|} dx_J /\ dT
                let sign = if key.len() % 2 == 1 { -1 } else { 1 };
                let lifted = embed_in_t_ring(c, &ext, i as i32).scale_int(sign);
                let mut full_key = key.clone();
                full_key.push(t as u32);
                out = out.add(&Form::term(&lifted, &full_key))?;
            }
        }
        Ok(out)
    }

    /// Decompose a form over B[T] (T appended last, non-invertible).
    pub fn from_form(form: &Form, base: &LaurentRing) -> Result<TForm> {
        let t = base.nvars();
        let ext = form.ring().clone();
        if ext.nvars() != t + 1 || ext.vars().names()[..t] != *base.vars().names() {
            return Err(Error::VariableMismatch("form ring is not base + T".into()));
        }
        let t_name = ext.vars().name(t).to_string();
        let mut prime: Vec<Form> = Vec::new();
        let mut double_prime: Vec<Form> = Vec::new();
        let degree = form.degree();
        for (key, c) in form.terms() {
            let has_dt = key.last() == Some(&(t as u32));
            let base_key: Vec<u32> = if has_dt { key[..key.len() - 1].to_vec() } else { key.clone() };
            // moving dT from its (last) slot to the front crosses the rest
            let sign = if has_dt && base_key.len() % 2 == 1 { -1 } else { 1 };
            for (tdeg, part) in split_by_t(c, base, t)? {
                let piece = Form::term(&part, &base_key).scale_int(sign);
                let bucket = if has_dt { &mut double_prime } else { &mut prime };
                while bucket.len() <= tdeg {
                    let d = if has_dt { degree - 1 } else { degree };
                    bucket.push(Form::zero(base, d));
                }
                bucket[tdeg] = bucket[tdeg].add(&piece)?;
            }
        }
        TForm::new(base, &t_name, degree, prime, double_prime)
    }
}

/// Reinterpret a polynomial over B inside B[T], multiplied by T^t_exp.
pub fn embed_in_t_ring(c: &LPoly, ext: &LaurentRing, t_exp: i32) -> LPoly {
    let mut out = ext.zero();
    for (e, coeff) in c.terms() {
        let mut exps = e.clone();
        exps.push(t_exp);
        let mono = ext.monomial(*coeff, exps).expect("legal exponents stay legal");
        out = out.add(&mono).expect("same ring");
    }
    out
}

/// Split a polynomial over B[T] by T-degree into polynomials over B.
fn split_by_t(c: &LPoly, base: &LaurentRing, t: usize) -> Result<Vec<(usize, LPoly)>> {
    let mut buckets: BTreeMap<usize, LPoly> = BTreeMap::new();
    for (e, coeff) in c.terms() {
        let tdeg = e[t];
        if tdeg < 0 {
            return Err(Error::VariableMismatch("negative T-degree".into()));
        }
        let mut base_e = e.clone();
        base_e.pop();
        let mono = base.monomial(*coeff, base_e)?;
        let entry = buckets.entry(tdeg as usize).or_insert_with(|| base.zero());
        *entry = entry.add(&mono)?;
    }
    Ok(buckets.into_iter().filter(|(_, p)| !p.is_zero()).collect())
}

/// Substitute T = c into a polynomial over B[T] (used for the generator
/// checks h_0 and h_p of a strong homotopy).
pub fn eval_t_poly(f: &LPoly, base: &LaurentRing, t: usize, c: &PrecScalar) -> Result<LPoly> {
    let ctx = base.ctx();
    let mut acc = base.zero();
    for (tdeg, part) in split_by_t(f, base, t)? {
        let mut power = ctx.one();
        for _ in 0..tdeg {
            power = power.mul(c, ctx);
        }
        acc = acc.add(&part.scale(&power))?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::PrimeCtx;

    fn ring2(p: u64, n: u32) -> LaurentRing {
        let ctx = PrimeCtx::new(p, n).unwrap();
        LaurentRing::new(ctx, &[("x", true), ("y", false)]).unwrap()
    }

    #[test]
    fn d_of_x_squared() {
        let r = ring2(5, 3);
        let f = Form::from_poly(&r.parse("x^2").unwrap());
        let df = f.d().unwrap();
        let expected = Form::term(&r.parse("2*x^1").unwrap(), &[0]);
        assert_eq!(df, expected);
    }

    #[test]
    fn log_form_is_closed() {
        let r = ring2(3, 4);
        let dlog = Form::term(&r.parse("x^-1").unwrap(), &[0]);
        assert!(dlog.d().unwrap().is_zero());
    }

    #[test]
    fn d_squared_vanishes() {
        let r = ring2(3, 3);
        let f = Form::from_poly(&r.parse("x^2*y^3 + 2*x^-1 + 7").unwrap());
        assert!(f.d().unwrap().d().unwrap().is_zero());
        let g = Form::term(&r.parse("x^1*y^2").unwrap(), &[1]);
        assert!(g.d().unwrap().d().unwrap().is_zero());
    }

    #[test]
    fn wedge_antisymmetry() {
        let r = ring2(5, 2);
        let dx = Form::term(&r.one(), &[0]);
        let dy = Form::term(&r.one(), &[1]);
        let xy = dx.wedge(&dy).unwrap();
        let yx = dy.wedge(&dx).unwrap();
        assert_eq!(xy, yx.neg());
        assert!(dx.wedge(&dx).unwrap().is_zero());
    }

    #[test]
    fn wedge_with_coefficients() {
        let r = ring2(5, 2);
        let a = Form::term(&r.var(0), &[1]); // x dy
        let b = Form::term(&r.var(1), &[0]); // y dx
        let w = a.wedge(&b).unwrap();
        // x dy /\ y dx = -xy dx/\dy
        let expected = Form::term(&r.parse("x^1*y^1").unwrap(), &[0, 1]).neg();
        assert_eq!(w, expected);
    }

    #[test]
    fn leibniz_rule() {
        let r = ring2(3, 3);
        let a = Form::term(&r.parse("x^2 + y^1").unwrap(), &[0]);
        let b = Form::term(&r.parse("2*y^2").unwrap(), &[1]);
        let lhs = a.wedge(&b).unwrap().d().unwrap();
        let rhs = a
            .d()
            .unwrap()
            .wedge(&b)
            .unwrap()
            .add(&a.wedge(&b.d().unwrap()).unwrap().scale_int(-1))
            .unwrap();
        // deg(a) = 1, so the sign on a /\ db is (-1)^1
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn pullback_frobenius_on_dx() {
        let r = ring2(5, 3);
        let phi = RingMap::new(
            &r,
            &r,
            vec![r.var(0).pow(5).unwrap(), r.var(1).clone()],
        )
        .unwrap();
        let dx = Form::term(&r.one(), &[0]);
        let out = phi.pullback(&dx).unwrap();
        let expected = Form::term(&r.parse("5*x^4").unwrap(), &[0]);
        assert_eq!(out, expected);
    }

    #[test]
    fn pullback_identity_and_chain_rule() {
        let r = ring2(3, 3);
        let omega = Form::term(&r.parse("x^1*y^1 + 2").unwrap(), &[0]).add(
            &Form::term(&r.parse("y^2").unwrap(), &[1]),
        )
        .unwrap();
        let id = RingMap::identity(&r);
        assert_eq!(id.pullback(&omega).unwrap(), omega);

        // x -> x^2 + p x^3 on omega = x dx, against the direct chain rule
        let img = r.parse("x^2 + 3*x^3").unwrap();
        let phi = RingMap::new(&r, &r, vec![img.clone(), r.var(1).clone()]).unwrap();
        let omega = Form::term(&r.var(0), &[0]);
        let out = phi.pullback(&omega).unwrap();
        let dimg = img.partial_derivative(0);
        let expected = Form::term(&img.mul(&dimg).unwrap(), &[0]);
        assert_eq!(out, expected);
    }

    #[test]
    fn pullback_commutes_with_d() {
        let r = ring2(3, 3);
        let phi = RingMap::new(
            &r,
            &r,
            vec![
                r.parse("x^1 + 3*x^2").unwrap(),
                r.parse("y^1 + 3*y^3").unwrap(),
            ],
        )
        .unwrap();
        let omega = Form::term(&r.parse("x^2*y^1").unwrap(), &[1]);
        let lhs = phi.pullback(&omega.d().unwrap()).unwrap();
        let rhs = phi.pullback(&omega).unwrap().d().unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn tform_d_of_t_squared() {
        // d(T^2) = 2T dT
        let r = ring2(3, 3);
        let tf = TForm::new(
            &r,
            "T",
            0,
            vec![
                Form::zero(&r, 0),
                Form::zero(&r, 0),
                Form::from_poly(&r.one()),
            ],
            vec![],
        )
        .unwrap();
        let d = tf.d().unwrap();
        assert!(d.prime_part(0).is_zero());
        assert_eq!(d.double_prime_part(1), Form::from_poly(&r.constant_i(2)));
    }

    #[test]
    fn eval_t_examples() {
        let r = ring2(3, 3);
        // h_0 picks out w'_0
        let w0 = Form::from_poly(&r.parse("x^1 + 1").unwrap());
        let w1 = Form::from_poly(&r.var(1));
        let tf = TForm::new(&r, "T", 0, vec![w0.clone(), w1], vec![]).unwrap();
        assert_eq!(tf.eval_t(&r.ctx().zero()).unwrap(), w0);
        // h_p(T^2) = p^2
        let t2 = TForm::new(
            &r,
            "T",
            0,
            vec![Form::zero(&r, 0), Form::zero(&r, 0), Form::from_poly(&r.one())],
            vec![],
        )
        .unwrap();
        let hp = t2.eval_t(&r.ctx().scalar(3)).unwrap();
        assert_eq!(hp, Form::from_poly(&r.constant_i(9)));
        // h_p(T dT) = 0
        let tdt = TForm::new(
            &r,
            "T",
            1,
            vec![],
            vec![Form::zero(&r, 0), Form::from_poly(&r.one())],
        )
        .unwrap();
        assert!(tdt.eval_t(&r.ctx().scalar(3)).unwrap().is_zero());
    }

    #[test]
    fn tform_roundtrip_and_dt_cross_check() {
        let r = ring2(3, 3);
        let ext = r.extend(&[("T", false)]).unwrap();
        // omega = (x + T^2 y) dx + x T dT
        let omega = Form::term(&ext.parse("x^1 + y^1*T^2").unwrap(), &[0])
            .add(&Form::term(&ext.parse("x^1*T^1").unwrap(), &[2]))
            .unwrap();
        let tf = TForm::from_form(&omega, &r).unwrap();
        assert_eq!(tf.to_form().unwrap(), omega);
        // two routes to the differential agree
        let via_tform = tf.d().unwrap().to_form().unwrap();
        let direct = omega.d().unwrap();
        assert_eq!(via_tform, direct);
    }

    #[test]
    fn multidegree_split_is_consistent() {
        let r = ring2(3, 3);
        let omega = Form::term(&r.parse("x^2*y^1 + x^1").unwrap(), &[0]);
        let parts = omega.multidegree_components();
        assert_eq!(parts.len(), 2);
        let mut total = Form::zero(&r, 1);
        for f in parts.values() {
            total = total.add(f).unwrap();
        }
        assert_eq!(total, omega);
        assert!(parts.contains_key(&vec![3, 1]));
        assert!(parts.contains_key(&vec![2, 0]));
    }
}
