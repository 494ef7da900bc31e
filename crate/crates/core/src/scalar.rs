//! Exact arithmetic in Z/p^N with explicit precision tracking.
//!
//! A [`PrecScalar`] is a residue class that is only asserted modulo
//! `p^prec`; arithmetic propagates the minimum precision of its operands,
//! and exact division by a power of p reduces the precision by the same
//! power. Divisions never wrap silently: a failed divisibility check is an
//! error, not a truncation.

use crate::error::{Error, Result};

/// The prime and the working precision exponent N (values live in Z/p^N).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeCtx {
    p: u64,
    n: u32,
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p.is_multiple_of(2) {
        return p == 2;
    }
    let mut d = 3u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

impl PrimeCtx {
    pub fn new(p: u64, n: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if n < 1 || p.checked_pow(n).is_none() {
            return Err(Error::BadPrecision { p, n });
        }
        Ok(PrimeCtx { p, n })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// The working precision exponent N.
    pub fn precision(&self) -> u32 {
        self.n
    }

    /// The same prime at a different precision exponent.
    pub fn with_precision(&self, n: u32) -> Result<Self> {
        PrimeCtx::new(self.p, n)
    }

    /// p^k as a u64; requires k <= N.
    pub fn pow_p(&self, k: u32) -> u64 {
        debug_assert!(k <= self.n);
        self.p.pow(k)
    }

    pub fn modulus(&self) -> u64 {
        self.pow_p(self.n)
    }

    /// A scalar at full precision N.
    pub fn scalar(&self, v: i128) -> PrecScalar {
        self.scalar_at(v, self.n)
    }

    /// A scalar asserted modulo p^prec only.
    pub fn scalar_at(&self, v: i128, prec: u32) -> PrecScalar {
        assert!((1..=self.n).contains(&prec), "precision out of range");
        let m = self.pow_p(prec) as i128;
        let mut r = v % m;
        if r < 0 {
            r += m;
        }
        PrecScalar { value: r as u64, prec }
    }

    pub fn zero(&self) -> PrecScalar {
        PrecScalar { value: 0, prec: self.n }
    }

    pub fn one(&self) -> PrecScalar {
        self.scalar(1)
    }
}

/// A residue class carrying the exponent of the modulus it is known at.
///
/// Invariant: `0 <= value < p^prec` with `1 <= prec <= N` of the ambient
/// context. The prime itself is not stored; all arithmetic takes the
/// context explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrecScalar {
    value: u64,
    prec: u32,
}

impl PrecScalar {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn reduce(value: u128, prec: u32, ctx: &PrimeCtx) -> PrecScalar {
        let m = ctx.pow_p(prec) as u128;
        PrecScalar { value: (value % m) as u64, prec }
    }

    pub fn add(&self, rhs: &PrecScalar, ctx: &PrimeCtx) -> PrecScalar {
        let prec = self.prec.min(rhs.prec);
        Self::reduce(self.value as u128 + rhs.value as u128, prec, ctx)
    }

    pub fn sub(&self, rhs: &PrecScalar, ctx: &PrimeCtx) -> PrecScalar {
        let prec = self.prec.min(rhs.prec);
        let m = ctx.pow_p(prec) as u128;
        Self::reduce(self.value as u128 + m - (rhs.value as u128 % m), prec, ctx)
    }

    pub fn neg(&self, ctx: &PrimeCtx) -> PrecScalar {
        let m = ctx.pow_p(self.prec) as u128;
        Self::reduce(m - self.value as u128 % m, self.prec, ctx)
    }

    pub fn mul(&self, rhs: &PrecScalar, ctx: &PrimeCtx) -> PrecScalar {
        let prec = self.prec.min(rhs.prec);
        Self::reduce(self.value as u128 * rhs.value as u128, prec, ctx)
    }

    /// Multiplication by an exact integer (known at infinite precision).
    pub fn mul_int(&self, k: i128, ctx: &PrimeCtx) -> PrecScalar {
        let m = ctx.pow_p(self.prec) as i128;
        let mut r = (k % m) * (self.value as i128) % m;
        if r < 0 {
            r += m;
        }
        PrecScalar { value: r as u64, prec: self.prec }
    }

    /// Multiplication by p^v. Unlike a generic product this gains absolute
    /// precision: a residue known mod p^k determines p^v times it mod
    /// p^(k+v), capped at the ambient N.
    pub fn mul_p_pow(&self, v: u32, ctx: &PrimeCtx) -> PrecScalar {
        let prec = (self.prec + v).min(ctx.precision());
        let m = ctx.pow_p(prec) as u128;
        let pv = (ctx.p() as u128).pow(v) % m;
        PrecScalar { value: ((self.value as u128 * pv) % m) as u64, prec }
    }

    /// p-adic valuation of the residue, capped at `prec` (v(0) = prec).
    pub fn valuation(&self, ctx: &PrimeCtx) -> u32 {
        let mut v = 0;
        let mut x = self.value;
        while v < self.prec && x.is_multiple_of(ctx.p) {
            if x == 0 {
                return self.prec;
            }
            x /= ctx.p;
            v += 1;
        }
        v
    }

    pub fn is_unit(&self, ctx: &PrimeCtx) -> bool {
        !self.value.is_multiple_of(ctx.p)
    }

    /// Inverse of a unit, at the same precision.
    pub fn inv(&self, ctx: &PrimeCtx) -> Result<PrecScalar> {
        if !self.is_unit(ctx) {
            return Err(Error::NotDivisible {
                value: self.value,
                p: ctx.p,
                power: 0,
                prec: self.prec,
            });
        }
        let m = ctx.pow_p(self.prec) as i128;
        let inv = mod_inverse(self.value as i128, m);
        Ok(PrecScalar { value: inv as u64, prec: self.prec })
    }

    /// Exact division by p^v. The quotient is only known modulo
    /// p^(prec - v), so the precision drops by v.
    pub fn div_exact_p(&self, v: u32, ctx: &PrimeCtx) -> Result<PrecScalar> {
        if v == 0 {
            return Ok(*self);
        }
        if self.value != 0 {
            let pv = ctx.p.checked_pow(v);
            let divisible = match pv {
                Some(pv) if v <= self.prec => self.value.is_multiple_of(pv),
                _ => false,
            };
            if !divisible {
                return Err(Error::NotDivisible {
                    value: self.value,
                    p: ctx.p,
                    power: v,
                    prec: self.prec,
                });
            }
        }
        if self.prec < v + 1 {
            return Err(Error::PrecisionExhausted { needed: v + 1, available: self.prec });
        }
        let value = if self.value == 0 { 0 } else { self.value / ctx.p.pow(v) };
        Ok(PrecScalar { value, prec: self.prec - v })
    }

    /// Reinterpret at a lower (or equal) precision.
    pub fn truncate(&self, prec: u32, ctx: &PrimeCtx) -> PrecScalar {
        let prec = prec.min(self.prec);
        Self::reduce(self.value as u128, prec, ctx)
    }

    /// Arbitrary lift into a context with a larger modulus: the stored
    /// representative is reused and declared known at full precision there.
    /// Only valid where the consumer tolerates lift ambiguity (universal
    /// integral polynomials do).
    pub fn lift_to(&self, target: &PrimeCtx) -> PrecScalar {
        PrecScalar { value: self.value, prec: target.n }
    }
}

fn mod_inverse(a: i128, m: i128) -> i128 {
    // extended Euclid; m = p^k and gcd(a, p) = 1
    let (mut r0, mut r1) = (m, a % m);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    debug_assert_eq!(r0, 1);
    ((t0 % m) + m) % m
}

/// The coefficient p^{i+1}/(i+1) of the homotopy operator, as an element of
/// Z/p^N. Writing i+1 = p^v * u with u a unit this is p^{i+1-v} * u^{-1},
/// which vanishes once i+1-v >= N.
pub fn unit_coeff(ctx: &PrimeCtx, i: u32) -> PrecScalar {
    let mut u = (i + 1) as u64;
    let mut v = 0u32;
    while u.is_multiple_of(ctx.p()) {
        u /= ctx.p();
        v += 1;
    }
    let e = i + 1 - v;
    if e >= ctx.precision() {
        return ctx.zero();
    }
    let u_inv = ctx.scalar(u as i128).inv(ctx).expect("u is a unit");
    u_inv.mul_int(ctx.pow_p(e) as i128, ctx)
}
