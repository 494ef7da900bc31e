//! Dense matrices over Z/p^W and their Smith normal form.
//!
//! Z/p^W is a local principal ideal ring, so the reduction needs no gcd
//! steps: pick the entry of minimal p-valuation (ties broken by lowest row,
//! then column index), scale its row so the pivot becomes an exact p-power,
//! and clear its row and column. Divisor exponents come out ascending, with
//! exponent W standing for a zero diagonal entry. Row and column transforms
//! and their inverses are tracked so kernels and solutions can be read off.

use crate::error::{Error, Result};

/// Modulus context p^W with p^W required to fit in 63 bits so products can
/// be taken in u128 without overflow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModCtx {
    p: u64,
    w: u32,
    modulus: u64,
}

impl ModCtx {
    pub fn new(p: u64, w: u32) -> Result<ModCtx> {
        let m = (p as u128).checked_pow(w).filter(|&m| m < (1u128 << 63));
        match m {
            Some(m) => Ok(ModCtx { p, w, modulus: m as u64 }),
            None => Err(Error::BadPrecision { p, n: w }),
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn exponent(&self) -> u32 {
        self.w
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn reduce_i128(&self, v: i128) -> u64 {
        let m = self.modulus as i128;
        let mut r = v % m;
        if r < 0 {
            r += m;
        }
        r as u64
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        ((a as u128 + b as u128) % self.modulus as u128) as u64
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        ((a as u128 + self.modulus as u128 - b as u128) % self.modulus as u128) as u64
    }

    pub fn neg(&self, a: u64) -> u64 {
        self.sub(0, a)
    }

    /// v_p of a residue, with v_p(0) = W.
    pub fn valuation(&self, a: u64) -> u32 {
        if a == 0 {
            return self.w;
        }
        let mut v = 0;
        let mut x = a;
        while x.is_multiple_of(self.p) {
            x /= self.p;
            v += 1;
        }
        v
    }

    pub fn pow_p(&self, e: u32) -> u64 {
        debug_assert!(e <= self.w);
        self.p.pow(e)
    }

    /// Inverse of a unit.
    pub fn inv_unit(&self, a: u64) -> u64 {
        debug_assert!(!a.is_multiple_of(self.p));
        let m = self.modulus as i128;
        let (mut r0, mut r1) = (m, (a % self.modulus) as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        (((t0 % m) + m) % m) as u64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mat {
    ctx: ModCtx,
    nrows: usize,
    ncols: usize,
    data: Vec<u64>,
}

impl Mat {
    pub fn zero(ctx: ModCtx, nrows: usize, ncols: usize) -> Mat {
        Mat { ctx, nrows, ncols, data: vec![0; nrows * ncols] }
    }

    pub fn identity(ctx: ModCtx, n: usize) -> Mat {
        let mut m = Mat::zero(ctx, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(ctx: ModCtx, rows: &[Vec<i128>]) -> Mat {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut m = Mat::zero(ctx, nrows, ncols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), ncols);
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, ctx.reduce_i128(v));
            }
        }
        m
    }

    pub fn ctx(&self) -> ModCtx {
        self.ctx
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.ncols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.ncols + j] = v % self.ctx.modulus;
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.ncols, other.nrows);
        let mut out = Mat::zero(self.ctx, self.nrows, other.ncols);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.ncols {
                    let v = self.ctx.add(out.get(i, j), self.ctx.mul(a, other.get(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(v.len(), self.ncols);
        (0..self.nrows)
            .map(|i| {
                let mut acc = 0u64;
                for j in 0..self.ncols {
                    acc = self.ctx.add(acc, self.ctx.mul(self.get(i, j), v[j]));
                }
                acc
            })
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<u64> {
        (0..self.nrows).map(|i| self.get(i, j)).collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.ncols {
            self.data.swap(a * self.ncols + j, b * self.ncols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.nrows {
            self.data.swap(i * self.ncols + a, i * self.ncols + b);
        }
    }

    fn scale_row(&mut self, i: usize, c: u64) {
        for j in 0..self.ncols {
            let v = self.ctx.mul(self.get(i, j), c);
            self.set(i, j, v);
        }
    }

    /// row_i += c * row_k
    fn add_row_multiple(&mut self, i: usize, k: usize, c: u64) {
        for j in 0..self.ncols {
            let v = self.ctx.add(self.get(i, j), self.ctx.mul(c, self.get(k, j)));
            self.set(i, j, v);
        }
    }

    fn scale_col(&mut self, j: usize, c: u64) {
        for i in 0..self.nrows {
            let v = self.ctx.mul(self.get(i, j), c);
            self.set(i, j, v);
        }
    }

    /// col_j += c * col_k
    fn add_col_multiple(&mut self, j: usize, k: usize, c: u64) {
        for i in 0..self.nrows {
            let v = self.ctx.add(self.get(i, j), self.ctx.mul(c, self.get(i, k)));
            self.set(i, j, v);
        }
    }

    /// Determinant modulo p (unit test helper for unimodularity).
    pub fn det_mod_p(&self) -> u64 {
        assert_eq!(self.nrows, self.ncols);
        let p = self.ctx.p;
        let n = self.nrows;
        let mut a: Vec<u64> = self.data.iter().map(|&v| v % p).collect();
        let mut det = 1u64;
        for k in 0..n {
            let pivot = (k..n).find(|&i| !a[i * n + k].is_multiple_of(p));
            let Some(pi) = pivot else { return 0 };
            if pi != k {
                for j in 0..n {
                    a.swap(pi * n + j, k * n + j);
                }
                det = (p - det) % p;
            }
            let inv = ModCtx::new(p, 1).unwrap().inv_unit(a[k * n + k] % p);
            det = det * (a[k * n + k] % p) % p;
            for i in k + 1..n {
                let factor = a[i * n + k] % p * inv % p;
                for j in k..n {
                    a[i * n + j] = (a[i * n + j] + (p - factor) * a[k * n + j]) % p;
                }
            }
        }
        det % p
    }
}

/// U * M * V = D with unit-determinant U, V. `divisors[k]` is the exponent
/// of the k-th diagonal entry (W for zero), ascending.
#[derive(Debug, Clone)]
pub struct Snf {
    pub divisors: Vec<u32>,
    pub d: Mat,
    pub u: Mat,
    pub uinv: Mat,
    pub v: Mat,
    pub vinv: Mat,
}

impl Snf {
    /// Positions of the source basis whose diagonal entry is zero (these
    /// columns of V span the kernel over the p-adic integers when the
    /// modulus has enough headroom).
    pub fn zero_positions(&self) -> Vec<usize> {
        let w = self.d.ctx().exponent();
        let ncols = self.d.ncols();
        (0..ncols)
            .filter(|&j| self.divisors.get(j).is_none_or(|&e| e == w))
            .collect()
    }

    pub fn rank(&self) -> usize {
        let w = self.d.ctx().exponent();
        self.divisors.iter().filter(|&&e| e < w).count()
    }
}

pub fn smith_normal_form(m: &Mat) -> Snf {
    let ctx = m.ctx();
    let w = ctx.exponent();
    let (r, c) = (m.nrows(), m.ncols());
    let mut d = m.clone();
    let mut u = Mat::identity(ctx, r);
    let mut uinv = Mat::identity(ctx, r);
    let mut v = Mat::identity(ctx, c);
    let mut vinv = Mat::identity(ctx, c);
    let steps = r.min(c);
    let mut divisors = Vec::with_capacity(steps);
    for k in 0..steps {
        // minimal-valuation pivot in the trailing block, first by rows
        let mut best: Option<(u32, usize, usize)> = None;
        for i in k..r {
            for j in k..c {
                let val = ctx.valuation(d.get(i, j));
                if val < w && best.is_none_or(|(bv, _, _)| val < bv) {
                    best = Some((val, i, j));
                }
            }
        }
        let Some((e, pi, pj)) = best else {
            divisors.extend(std::iter::repeat_n(w, steps - k));
            break;
        };
        // move the pivot to (k, k)
        d.swap_rows(pi, k);
        u.swap_rows(pi, k);
        uinv.swap_cols(pi, k);
        d.swap_cols(pj, k);
        v.swap_cols(pj, k);
        vinv.swap_rows(pj, k);
        // normalize the pivot to exactly p^e
        let unit = d.get(k, k) / ctx.pow_p(e);
        let unit_inv = ctx.inv_unit(unit);
        d.scale_row(k, unit_inv);
        u.scale_row(k, unit_inv);
        uinv.scale_col(k, unit);
        // clear the column below and the row to the right; every entry in
        // the block has valuation >= e, so the quotients are exact
        for i in k + 1..r {
            let t = d.get(i, k) / ctx.pow_p(e);
            if t == 0 {
                continue;
            }
            let neg = ctx.neg(t);
            d.add_row_multiple(i, k, neg);
            u.add_row_multiple(i, k, neg);
            uinv.add_col_multiple(k, i, t);
        }
        for j in k + 1..c {
            let t = d.get(k, j) / ctx.pow_p(e);
            if t == 0 {
                continue;
            }
            let neg = ctx.neg(t);
            d.add_col_multiple(j, k, neg);
            v.add_col_multiple(j, k, neg);
            vinv.add_row_multiple(k, j, t);
        }
        divisors.push(e);
    }
    Snf { divisors, d, u, uinv, v, vinv }
}
