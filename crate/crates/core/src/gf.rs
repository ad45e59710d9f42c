//! Finite fields GF(p^e) with dense element indices.
//!
//! An element is the integer `c_0 + c_1 p + ... + c_{e-1} p^{e-1}` encoding the
//! coefficient vector of a polynomial of degree < e over GF(p), reduced modulo
//! a fixed irreducible polynomial. Index 0 is zero and index 1 is one.
//! Addition is tabulated; multiplication goes through discrete log/exp tables
//! of a primitive element.

use thiserror::Error;

/// Largest field order accepted by [`Field::new`] unless overridden.
pub const DEFAULT_MAX_ORDER: u32 = 1024;

/// Dense index of a field element, in `0..q`.
pub type Element = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GfError {
    #[error("characteristic {0} is not prime")]
    NonPrimeCharacteristic(u32),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {p}^{e} exceeds the maximum {max}")]
    OrderTooLarge { p: u32, e: u32, max: u32 },
    #[error("{0} is not a prime power")]
    NotAPrimePower(u32),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
}

#[derive(Debug, Clone)]
pub struct Field {
    p: u32,
    e: u32,
    q: u32,
    modulus: Vec<u32>,
    add: Vec<u16>,
    neg: Vec<u16>,
    // exp has length 2(q-1) so log a + log b never needs a reduction.
    exp: Vec<u16>,
    log: Vec<u32>,
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q` into `(p, e)` with `q = p^e`, if `q` is a prime power.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|&d| q.is_multiple_of(d))?;
    let mut rest = q;
    let mut e = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        e += 1;
    }
    (rest == 1).then_some((p, e))
}

/// Polynomials over GF(p) as coefficient vectors, constant term first.
mod poly {
    pub fn trim(a: &mut Vec<u32>) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    /// Remainder of `a` modulo the monic polynomial `m`.
    pub fn rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        let mut r = a.to_vec();
        trim(&mut r);
        let dm = m.len() - 1;
        while r.len() > dm {
            let lead = *r.last().unwrap();
            let shift = r.len() - 1 - dm;
            for (i, &c) in m.iter().enumerate() {
                let sub = lead * c % p;
                r[shift + i] = (r[shift + i] + p - sub) % p;
            }
            trim(&mut r);
        }
        r
    }

    pub fn mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u32; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x * y) % p;
            }
        }
        trim(&mut out);
        out
    }

    /// Monic polynomial of degree `deg` whose lower coefficients are the base-p
    /// digits of `code`, constant term first.
    pub fn monic_from_code(mut code: u32, deg: u32, p: u32) -> Vec<u32> {
        let mut c = Vec::with_capacity(deg as usize + 1);
        for _ in 0..deg {
            c.push(code % p);
            code /= p;
        }
        c.push(1);
        c
    }

    /// Trial division by every monic polynomial of degree 1..=deg/2.
    pub fn is_irreducible(f: &[u32], p: u32) -> bool {
        let deg = (f.len() - 1) as u32;
        for d in 1..=deg / 2 {
            for code in 0..p.pow(d) {
                let g = monic_from_code(code, d, p);
                if rem(f, &g, p).is_empty() {
                    return false;
                }
            }
        }
        true
    }
}

/// Lexicographically smallest monic irreducible polynomial of degree `e` over
/// GF(p), comparing coefficient lists from the constant term upwards.
fn smallest_irreducible(p: u32, e: u32) -> Vec<u32> {
    let count = p.pow(e);
    let mut candidates: Vec<Vec<u32>> = (0..count)
        .map(|code| poly::monic_from_code(code, e, p))
        .collect();
    candidates.sort();
    candidates
        .into_iter()
        .find(|f| poly::is_irreducible(f, p))
        .expect("an irreducible polynomial exists in every degree")
}

impl Field {
    pub fn new(p: u32, e: u32) -> Result<Self, GfError> {
        Self::with_max_order(p, e, DEFAULT_MAX_ORDER)
    }

    /// Builds GF(q) from its order.
    pub fn of_order(q: u32) -> Result<Self, GfError> {
        let (p, e) = prime_power(q).ok_or(GfError::NotAPrimePower(q))?;
        Self::new(p, e)
    }

    pub fn with_max_order(p: u32, e: u32, max: u32) -> Result<Self, GfError> {
        if !is_prime(p) {
            return Err(GfError::NonPrimeCharacteristic(p));
        }
        if e == 0 {
            return Err(GfError::ZeroDegree);
        }
        let q = p
            .checked_pow(e)
            .filter(|&q| q <= max.min(u16::MAX as u32 + 1))
            .ok_or(GfError::OrderTooLarge { p, e, max })?;

        let modulus = if e == 1 {
            vec![0, 1]
        } else {
            smallest_irreducible(p, e)
        };

        let digits = |mut a: u32| {
            let mut v = Vec::with_capacity(e as usize);
            for _ in 0..e {
                v.push(a % p);
                a /= p;
            }
            v
        };
        let encode = |v: &[u32]| v.iter().rev().fold(0u32, |acc, &c| acc * p + c);

        let qs = q as usize;
        let mut add = vec![0u16; qs * qs];
        let mut neg = vec![0u16; qs];
        let all_digits: Vec<Vec<u32>> = (0..q).map(digits).collect();
        for a in 0..qs {
            let neg_digits: Vec<u32> = all_digits[a].iter().map(|&c| (p - c) % p).collect();
            neg[a] = encode(&neg_digits) as u16;
            for b in 0..qs {
                let sum: Vec<u32> = all_digits[a]
                    .iter()
                    .zip(&all_digits[b])
                    .map(|(x, y)| (x + y) % p)
                    .collect();
                add[a * qs + b] = encode(&sum) as u16;
            }
        }

        let mul_slow = |a: u32, b: u32| {
            let prod = poly::mul(&all_digits[a as usize], &all_digits[b as usize], p);
            let mut r = poly::rem(&prod, &modulus, p);
            r.resize(e as usize, 0);
            encode(&r)
        };

        // Find a primitive element: the first whose powers reach every unit.
        let order = q - 1;
        let mut exp = Vec::new();
        for g in 1..q {
            let mut powers = Vec::with_capacity(order as usize);
            let mut x = 1u32;
            loop {
                powers.push(x as u16);
                x = mul_slow(x, g);
                if x == 1 {
                    break;
                }
            }
            if powers.len() as u32 == order {
                exp = powers;
                break;
            }
        }
        let mut log = vec![0u32; qs];
        for (i, &x) in exp.iter().enumerate() {
            log[x as usize] = i as u32;
        }
        let doubled: Vec<u16> = exp.iter().chain(exp.iter()).copied().collect();

        Ok(Field {
            p,
            e,
            q,
            modulus,
            add,
            neg,
            exp: doubled,
            log,
        })
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.e
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    /// Coefficients of the defining polynomial, constant term first.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn elements(&self) -> std::ops::Range<Element> {
        0..self.q
    }

    #[inline]
    pub fn add(&self, a: Element, b: Element) -> Element {
        self.add[(a * self.q + b) as usize] as Element
    }

    #[inline]
    pub fn neg(&self, a: Element) -> Element {
        self.neg[a as usize] as Element
    }

    #[inline]
    pub fn sub(&self, a: Element, b: Element) -> Element {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Element, b: Element) -> Element {
        if a == 0 || b == 0 {
            return 0;
        }
        let i = self.log[a as usize] + self.log[b as usize];
        self.exp[i as usize] as Element
    }

    pub fn inv(&self, a: Element) -> Result<Element, GfError> {
        if a == 0 {
            return Err(GfError::ZeroInverse);
        }
        let order = self.q - 1;
        Ok(self.exp[((order - self.log[a as usize]) % order) as usize] as Element)
    }

    pub fn div(&self, a: Element, b: Element) -> Result<Element, GfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Element, n: u64) -> Element {
        if n == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let order = (self.q - 1) as u64;
        let i = (self.log[a as usize] as u64 * (n % order)) % order;
        self.exp[i as usize] as Element
    }

    /// The subfield of order `sub` (which must satisfy `q = sub^d`), as the
    /// fixed points of `a -> a^sub`.
    pub fn subfield(&self, sub: u32) -> Vec<Element> {
        self.elements()
            .filter(|&a| self.pow(a, sub as u64) == a)
            .collect()
    }

    /// Embeds the prime-field integer `n mod p`.
    pub fn from_int(&self, n: u64) -> Element {
        (n % self.p as u64) as Element
    }
}
