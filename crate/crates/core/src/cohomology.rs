//! Integral de Rham cohomology of multidegree-graded, windowed complexes.
//!
//! The exterior derivative preserves the multidegree in which dx_j counts
//! as the degree of x_j, so the windowed complex splits into finite blocks
//! and truncation is lossless per block. Boundary matrices have exact
//! integer entries; running the Smith reduction with enough headroom above
//! the report precision N recovers the p-adic ranks and elementary
//! divisors exactly, capped at p^N (exponent N = a free Z/p^N summand).

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::forms::{Form, RingMap};
use crate::homotopy::{build_strong_homotopy, HomotopyCertificate};
use crate::lpoly::LaurentRing;
use crate::snf::{smith_normal_form, Mat, ModCtx, Snf};

#[derive(Debug, Clone)]
pub struct GradedComplex {
    ring: LaurentRing,
    window: i64,
}

/// Elementary divisors per (cohomological degree, multidegree) block;
/// exponents ascending, 0 < e <= N, with e = N a free Z/p^N summand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CohomReport {
    pub blocks: BTreeMap<(usize, Vec<i64>), Vec<u32>>,
}

impl CohomReport {
    pub fn to_json(&self) -> serde_json::Value {
        let blocks: Vec<serde_json::Value> = self
            .blocks
            .iter()
            .map(|((q, m), divisors)| {
                serde_json::json!({
                    "degree": q,
                    "multidegree": m,
                    "divisor_exponents": divisors,
                })
            })
            .collect();
        serde_json::json!({ "blocks": blocks })
    }
}

#[derive(Debug, Clone)]
pub enum Exactness {
    Exact { primitive: Form },
    /// The class has order p^order_exp; the primitive satisfies
    /// d(eta) = p^order_exp * omega exactly.
    NotExact { order_exp: u32, scaled_primitive: Form },
}

impl GradedComplex {
    pub fn new(ring: &LaurentRing, window: i64) -> Result<GradedComplex> {
        if window < 1 {
            return Err(Error::WindowOverflow(vec![window]));
        }
        Ok(GradedComplex { ring: ring.clone(), window })
    }

    pub fn ring(&self) -> &LaurentRing {
        &self.ring
    }

    pub fn window(&self) -> i64 {
        self.window
    }

    pub fn in_window(&self, m: &[i64]) -> bool {
        m.iter().enumerate().all(|(j, &mj)| {
            let lo = if self.ring.vars().is_invertible(j) { -self.window } else { 0 };
            mj >= lo && mj <= self.window
        })
    }

    /// Coefficient exponents of the basis element dx_I at multidegree m,
    /// or None if they are illegal for this ring.
    fn exponents_for(&self, m: &[i64], idx: &[u32]) -> Option<Vec<i32>> {
        let mut exps: Vec<i64> = m.to_vec();
        for &j in idx {
            exps[j as usize] -= 1;
        }
        let mut out = Vec::with_capacity(exps.len());
        for (j, &e) in exps.iter().enumerate() {
            if e < 0 && !self.ring.vars().is_invertible(j) {
                return None;
            }
            out.push(i32::try_from(e).ok()?);
        }
        Some(out)
    }

    /// The monomial basis x^(m - 1_I) dx_I of the block, I running over the
    /// sorted q-subsets in lexicographic order.
    pub fn basis(&self, q: usize, m: &[i64]) -> Vec<Vec<u32>> {
        let k = self.ring.nvars();
        let mut out = Vec::new();
        for mask in 0u32..(1 << k) {
            if mask.count_ones() as usize != q {
                continue;
            }
            let idx: Vec<u32> = (0..k as u32).filter(|j| mask & (1 << j) != 0).collect();
            if self.exponents_for(m, &idx).is_some() {
                out.push(idx);
            }
        }
        out
    }

    /// Matrix of d on the block: columns indexed by the degree-q basis,
    /// rows by the degree-(q+1) basis.
    pub fn boundary_matrix(&self, q: usize, m: &[i64], ctx: ModCtx) -> Mat {
        let cols = self.basis(q, m);
        let rows = self.basis(q + 1, m);
        let row_index: BTreeMap<&Vec<u32>, usize> =
            rows.iter().enumerate().map(|(i, r)| (r, i)).collect();
        let mut mat = Mat::zero(ctx, rows.len(), cols.len());
        for (cidx, i_set) in cols.iter().enumerate() {
            let exps = self.exponents_for(m, i_set).expect("basis elements are legal");
            for j in 0..self.ring.nvars() as u32 {
                if i_set.contains(&j) {
                    continue;
                }
                let e_j = exps[j as usize];
                if e_j == 0 {
                    continue;
                }
                let mut target: Vec<u32> = i_set.clone();
                let pos = target.iter().filter(|&&i| i < j).count();
                target.insert(pos, j);
                let sign = if pos % 2 == 0 { 1i128 } else { -1 };
                if let Some(&ridx) = row_index.get(&target) {
                    let v = ctx.add(mat.get(ridx, cidx), ctx.reduce_i128(sign * e_j as i128));
                    mat.set(ridx, cidx, v);
                }
            }
        }
        mat
    }

    /// Headroom modulus: large enough that every true nonzero divisor of
    /// the block matrices stays below it, so p-adic ranks are exact.
    fn headroom_ctx(&self, max_dim: usize) -> Result<ModCtx> {
        let p = self.ring.ctx().p();
        let n = self.ring.ctx().precision();
        let maxabs = (self.window + 1) as u128;
        let r = max_dim.max(1) as u128;
        let mut bound: u128 = 1;
        for i in 1..=r {
            bound = bound.saturating_mul(i).saturating_mul(maxabs);
        }
        let mut s = 1u32;
        let mut acc = p as u128;
        while acc <= bound {
            acc = acc.saturating_mul(p as u128);
            s += 1;
        }
        ModCtx::new(p, n + s + 1)
    }

    fn report_ctx(&self) -> Result<ModCtx> {
        ModCtx::new(self.ring.ctx().p(), self.ring.ctx().precision())
    }

    /// Elementary divisor exponents of H^q at block m, capped at N.
    ///
    /// The free rank is nullity(d_q) - rank(d_{q-1}), both p-adically
    /// exact; the torsion of H^q equals the torsion of coker(d_{q-1})
    /// because the quotient C^q/ker(d_q) is free over Z_p.
    pub fn block_divisors(&self, q: usize, m: &[i64]) -> Result<Vec<u32>> {
        let n = self.ring.ctx().precision();
        let dims = [
            self.basis(q, m).len().min(self.basis(q + 1, m).len()),
            if q > 0 { self.basis(q - 1, m).len().min(self.basis(q, m).len()) } else { 0 },
        ];
        let hctx = self.headroom_ctx(dims[0].max(dims[1]))?;
        let w = hctx.exponent();
        let mat_q = self.boundary_matrix(q, m, hctx);
        let snf_q = smith_normal_form(&mat_q);
        let nullity = mat_q.ncols() - snf_q.rank();
        let (rank_prev, torsion) = if q == 0 {
            (0usize, Vec::new())
        } else {
            let mat_prev = self.boundary_matrix(q - 1, m, hctx);
            let snf_prev = smith_normal_form(&mat_prev);
            let torsion: Vec<u32> = snf_prev
                .divisors
                .iter()
                .copied()
                .filter(|&e| e > 0 && e < w)
                .map(|e| e.min(n))
                .collect();
            (snf_prev.rank(), torsion)
        };
        let free = nullity - rank_prev;
        let mut out = torsion;
        out.extend(std::iter::repeat_n(n, free));
        out.sort_unstable();
        out.retain(|&e| e > 0);
        Ok(out)
    }

    /// Blockwise cohomology over the whole window; trivial blocks omitted.
    pub fn cohomology(&self) -> Result<CohomReport> {
        let mut blocks = BTreeMap::new();
        for m in self.window_multidegrees() {
            for q in 0..=self.ring.nvars() {
                let divisors = self.block_divisors(q, &m)?;
                if !divisors.is_empty() {
                    blocks.insert((q, m.clone()), divisors);
                }
            }
        }
        Ok(CohomReport { blocks })
    }

    pub fn window_multidegrees(&self) -> Vec<Vec<i64>> {
        let k = self.ring.nvars();
        let mut out = vec![Vec::new()];
        for j in 0..k {
            let lo = if self.ring.vars().is_invertible(j) { -self.window } else { 0 };
            let mut next = Vec::new();
            for prefix in &out {
                for v in lo..=self.window {
                    let mut p = prefix.clone();
                    p.push(v);
                    next.push(p);
                }
            }
            out = next;
        }
        out
    }

    /// Divisors of H^q of the assembled windowed complex (all blocks at
    /// once); used to cross-check the splitting.
    pub fn assembled_divisors(&self, q: usize) -> Result<Vec<u32>> {
        let n = self.ring.ctx().precision();
        let ms = self.window_multidegrees();
        let layout = |deg: usize| -> Vec<(Vec<i64>, Vec<u32>)> {
            let mut v = Vec::new();
            for m in &ms {
                for idx in self.basis(deg, m) {
                    v.push((m.clone(), idx));
                }
            }
            v
        };
        let c_prev = if q > 0 { layout(q - 1) } else { Vec::new() };
        let c_q = layout(q);
        let c_next = layout(q + 1);
        // the assembled matrix is block-diagonal because d preserves the
        // multidegree, so its divisor valuations obey the per-block bound
        let max_dim = ms
            .iter()
            .map(|m| {
                let (a, b, c) = (
                    if q > 0 { self.basis(q - 1, m).len() } else { 0 },
                    self.basis(q, m).len(),
                    self.basis(q + 1, m).len(),
                );
                (a.min(b)).max(b.min(c))
            })
            .max()
            .unwrap_or(1);
        let hctx = self.headroom_ctx(max_dim)?;
        let w = hctx.exponent();
        let build = |deg: usize, src: &[(Vec<i64>, Vec<u32>)], dst: &[(Vec<i64>, Vec<u32>)]| -> Mat {
            let mut mat = Mat::zero(hctx, dst.len(), src.len());
            for (cidx, (m, idx)) in src.iter().enumerate() {
                let block = self.boundary_matrix(deg, m, hctx);
                let local_src = self.basis(deg, m);
                let local_dst = self.basis(deg + 1, m);
                let lc = local_src.iter().position(|i| i == idx).unwrap();
                for (lr, ridx_key) in local_dst.iter().enumerate() {
                    let v = block.get(lr, lc);
                    if v == 0 {
                        continue;
                    }
                    let ridx = dst
                        .iter()
                        .position(|(dm, didx)| dm == m && didx == ridx_key)
                        .unwrap();
                    mat.set(ridx, cidx, v);
                }
            }
            mat
        };
        let mat_q = build(q, &c_q, &c_next);
        let snf_q = smith_normal_form(&mat_q);
        let nullity = mat_q.ncols() - snf_q.rank();
        let (rank_prev, torsion): (usize, Vec<u32>) = if q == 0 {
            (0, Vec::new())
        } else {
            let mat_prev = build(q - 1, &c_prev, &c_q);
            let snf_prev = smith_normal_form(&mat_prev);
            (
                snf_prev.rank(),
                snf_prev
                    .divisors
                    .iter()
                    .copied()
                    .filter(|&e| e > 0 && e < w)
                    .map(|e| e.min(n))
                    .collect(),
            )
        };
        let mut out = torsion;
        out.extend(std::iter::repeat_n(n, nullity - rank_prev));
        out.sort_unstable();
        out.retain(|&e| e > 0);
        Ok(out)
    }

    fn form_from_coords(&self, q: usize, m: &[i64], coords: &[u64], prec: u32) -> Result<Form> {
        let basis = self.basis(q, m);
        assert_eq!(basis.len(), coords.len());
        let mut out = Form::zero(&self.ring, q);
        for (idx, &c) in basis.iter().zip(coords.iter()) {
            if c == 0 {
                continue;
            }
            let exps = self.exponents_for(m, idx).expect("basis is legal");
            let mono = self.ring.monomial(self.ring.ctx().scalar_at(c as i128, prec), exps)?;
            out = out.add(&Form::term(&mono, idx))?;
        }
        Ok(out)
    }

    fn coords_of_block(&self, q: usize, m: &[i64], f: &Form) -> Result<Vec<u64>> {
        let basis = self.basis(q, m);
        let mut coords = vec![0u64; basis.len()];
        for (key, c) in f.terms() {
            let pos = basis
                .iter()
                .position(|b| b == key)
                .ok_or_else(|| Error::WindowOverflow(m.to_vec()))?;
            let exps = self.exponents_for(m, key).expect("basis is legal");
            for (e, sc) in c.terms() {
                if *e != exps {
                    return Err(Error::WindowOverflow(m.to_vec()));
                }
                coords[pos] = sc.value();
            }
        }
        Ok(coords)
    }

    /// Mod-p^N cycles spanning ker(d_q) on the block: scaled columns of the
    /// Smith transform of d_q over Z/p^N.
    pub fn kernel_generators(&self, q: usize, m: &[i64]) -> Result<Vec<Form>> {
        let rctx = self.report_ctx()?;
        let n = rctx.exponent();
        let mat = self.boundary_matrix(q, m, rctx);
        let snf = smith_normal_form(&mat);
        let mut out = Vec::new();
        for j in 0..mat.ncols() {
            let e = snf.divisors.get(j).copied().unwrap_or(n);
            if e == 0 {
                continue; // unit divisor: no kernel contribution
            }
            let col = snf.v.column(j);
            let scale = rctx.pow_p(n - e) % rctx.modulus();
            let coords: Vec<u64> = col.iter().map(|&x| rctx.mul(x, scale)).collect();
            if coords.iter().all(|&x| x == 0) {
                continue;
            }
            let form = self.form_from_coords(q, m, &coords, n)?;
            // kernel generators must be cycles on the nose
            if !form.d()?.truncate_prec(n).is_zero() {
                return Err(Error::IdentityViolation {
                    context: "kernel generator".into(),
                    detail: format!("block ({q}, {m:?}) column {j}"),
                });
            }
            out.push(form);
        }
        Ok(out)
    }

    /// Decide exactness of a closed form; on failure return the exact order
    /// p^e of its class together with eta satisfying d(eta) = p^e omega.
    pub fn exactness_witness(&self, omega: &Form) -> Result<Exactness> {
        let n = self.ring.ctx().precision();
        if omega.ring() != &self.ring {
            return Err(Error::VariableMismatch("form over the wrong ring".into()));
        }
        if !omega.d()?.truncate_prec(n).is_zero() {
            return Err(Error::NotClosed);
        }
        let q = omega.degree();
        let rctx = self.report_ctx()?;
        let parts = omega.multidegree_components();
        // first pass: the minimal exponent that makes every block solvable
        let mut pieces = Vec::new();
        let mut order = 0u32;
        for (m, part) in &parts {
            if !self.in_window(m) {
                return Err(Error::WindowOverflow(m.clone()));
            }
            let y = self.coords_of_block(q, m, part)?;
            let prev = if q == 0 {
                Mat::zero(rctx, y.len(), 0)
            } else {
                self.boundary_matrix(q - 1, m, rctx)
            };
            let snf = smith_normal_form(&prev);
            let e_min = minimal_scaling(&snf, &y, n);
            order = order.max(e_min);
            pieces.push((m.clone(), y, snf));
        }
        // second pass: solve every block at the common scaling
        let mut primitive = Form::zero(&self.ring, q.saturating_sub(1));
        for (m, y, snf) in &pieces {
            let x = solve_scaled(snf, y, order, n)?;
            let eta = self.form_from_coords(q.saturating_sub(1).min(q), m, &x, n)?;
            primitive = primitive.add(&eta)?;
        }
        // the witness must check out exactly
        let scaled = omega.scale_int((self.ring.ctx().p() as i128).pow(order.min(n)));
        if !primitive.d()?.eq_mod(&scaled, n) {
            return Err(Error::IdentityViolation {
                context: "exactness witness".into(),
                detail: format!("d(eta) != p^{order} omega"),
            });
        }
        if order == 0 {
            Ok(Exactness::Exact { primitive })
        } else {
            Ok(Exactness::NotExact { order_exp: order, scaled_primitive: primitive })
        }
    }
}

/// Minimal e such that B x = p^e y is solvable mod p^N, read off the Smith
/// form of B.
fn minimal_scaling(snf: &Snf, y: &[u64], n: u32) -> u32 {
    let ctx = snf.d.ctx();
    let yp = snf.u.mul_vec(y);
    let mut e = 0u32;
    for (i, &v) in yp.iter().enumerate() {
        let val = ctx.valuation(v);
        let need = snf.divisors.get(i).copied().unwrap_or(n).min(n);
        if val < need {
            e = e.max(need - val);
        }
    }
    e.min(n)
}

/// A solution of B x = p^e y mod p^N (callers guarantee solvability).
fn solve_scaled(snf: &Snf, y: &[u64], e: u32, n: u32) -> Result<Vec<u64>> {
    let ctx = snf.d.ctx();
    let pe = ctx.pow_p(e.min(n));
    let yp: Vec<u64> = snf.u.mul_vec(y).iter().map(|&v| ctx.mul(v, pe)).collect();
    let cols = snf.v.nrows();
    let mut xp = vec![0u64; cols];
    for i in 0..cols.min(yp.len()) {
        let div = snf.divisors.get(i).copied().unwrap_or(n);
        if div >= n {
            continue; // zero diagonal: contributes nothing
        }
        let v = yp[i];
        if v == 0 {
            continue;
        }
        if ctx.valuation(v) < div {
            return Err(Error::IdentityViolation {
                context: "linear solve".into(),
                detail: "unsolvable row".into(),
            });
        }
        xp[i] = v / ctx.pow_p(div);
    }
    Ok(snf.v.mul_vec(&xp))
}

#[derive(Debug, Clone)]
pub struct ClassCheck {
    pub degree: usize,
    pub multidegree: Vec<i64>,
    pub class_index: usize,
    pub difference_zero: bool,
    pub homotopy_verified: bool,
    pub solver_verified: bool,
}

#[derive(Debug, Clone)]
pub struct LiftIndependenceReport {
    pub checked_prec: u32,
    pub classes: Vec<ClassCheck>,
}

/// The finite-level content of lift independence on cohomology: for two
/// ring maps agreeing mod p, the pullbacks of every cycle differ by an
/// exact form. The primitive is produced by the strong homotopy and then
/// re-validated by an independent block linear solve.
pub fn lift_independence_on_cohomology(
    phi1: &RingMap,
    phi2: &RingMap,
    cx_src: &GradedComplex,
    cx_tgt: &GradedComplex,
) -> Result<LiftIndependenceReport> {
    if phi1.source() != cx_src.ring() || phi1.target() != cx_tgt.ring() {
        return Err(Error::VariableMismatch("maps do not match the complexes".into()));
    }
    let cert: HomotopyCertificate = build_strong_homotopy(phi1, phi2, None)?;
    let n = cx_tgt.ring().ctx().precision();
    let mut classes = Vec::new();
    for m in cx_src.window_multidegrees() {
        for q in 1..=cx_src.ring().nvars() {
            let gens = cx_src.kernel_generators(q, &m)?;
            for (class_index, rep) in gens.into_iter().enumerate() {
                let delta = phi2.pullback(&rep)?.sub(&phi1.pullback(&rep)?)?;
                if delta.truncate_prec(cert.check_prec()).is_zero() {
                    classes.push(ClassCheck {
                        degree: q,
                        multidegree: m.clone(),
                        class_index,
                        difference_zero: true,
                        homotopy_verified: true,
                        solver_verified: true,
                    });
                    continue;
                }
                // route 1: the explicit homotopy
                let h = cert.h_of(&rep)?;
                let h_d = cert.h_of(&rep.d()?)?;
                let boundary = h.d()?.add(&h_d)?;
                let homotopy_verified = delta.eq_mod(&boundary, cert.check_prec());
                // route 2: an independent block solve at full precision
                let solver_verified = match cx_tgt.exactness_witness(&delta.truncate_prec(n))? {
                    Exactness::Exact { primitive } => {
                        primitive.d()?.eq_mod(&delta, n)
                    }
                    Exactness::NotExact { .. } => false,
                };
                if !homotopy_verified || !solver_verified {
                    return Err(Error::IdentityViolation {
                        context: "lift independence".into(),
                        detail: format!("block ({q}, {m:?}) class {class_index}"),
                    });
                }
                classes.push(ClassCheck {
                    degree: q,
                    multidegree: m.clone(),
                    class_index,
                    difference_zero: false,
                    homotopy_verified,
                    solver_verified,
                });
            }
        }
    }
    Ok(LiftIndependenceReport { checked_prec: cert.check_prec(), classes })
}
