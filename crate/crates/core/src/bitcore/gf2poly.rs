use std::fmt;
use std::ops::BitXor;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest as _, Sha256};

use super::BitString;
use crate::error::{Error, Result};

/// Polynomial over GF(2); coefficient `i` is stored at bit `i`.
///
/// Words are normalized (no trailing zero words), so the zero polynomial is
/// the empty vector and has no degree.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Gf2Poly {
    words: Vec<u64>,
}

impl Gf2Poly {
    pub fn zero() -> Self {
        Self { words: Vec::new() }
    }

    pub fn one() -> Self {
        Self { words: vec![1] }
    }

    pub fn from_u64(bits: u64) -> Self {
        Self::from_words(vec![bits])
    }

    pub fn from_words(words: Vec<u64>) -> Self {
        let mut p = Self { words };
        p.normalize();
        p
    }

    /// `sum x^e` over the given exponents (repeats cancel).
    pub fn from_exponents(exps: &[usize]) -> Self {
        let mut p = Self::zero();
        for &e in exps {
            p.toggle(e);
        }
        p
    }

    /// Little-endian reading: bit `i` of the string is the coefficient of `x^i`.
    pub fn from_bitstring(bits: &BitString) -> Self {
        Self::from_words(bits.words().to_vec())
    }

    /// Coefficients `0..len` as a bit string; higher terms are dropped.
    pub fn to_bitstring(&self, len: usize) -> BitString {
        BitString::from_words(self.words.clone(), len)
    }

    fn normalize(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    fn toggle(&mut self, e: usize) {
        let w = e / 64;
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        self.words[w] ^= 1 << (e % 64);
        self.normalize();
    }

    pub fn is_zero(&self) -> bool {
        self.words.is_empty()
    }

    /// Index of the highest set coefficient; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        let last = *self.words.last()?;
        Some((self.words.len() - 1) * 64 + 63 - last.leading_zeros() as usize)
    }

    pub fn coeff(&self, i: usize) -> bool {
        self.words
            .get(i / 64)
            .is_some_and(|w| (w >> (i % 64)) & 1 == 1)
    }

    pub(crate) fn as_u64(&self) -> Option<u64> {
        match self.words.len() {
            0 => Some(0),
            1 => Some(self.words[0]),
            _ => None,
        }
    }

    /// Carry-less product.
    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![0u64; self.words.len() + other.words.len()];
        for (wi, &w) in other.words.iter().enumerate() {
            let mut bits = w;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                xor_shifted(&mut out, &self.words, wi * 64 + b);
            }
        }
        Self::from_words(out)
    }

    /// Remainder of division by `modulus`.
    pub fn rem(&self, modulus: &Self) -> Result<Self> {
        let dm = modulus.degree().ok_or(Error::ZeroModulus)?;
        let mut r = self.words.clone();
        let Some(mut dr) = self.degree() else {
            return Ok(Self::zero());
        };
        while dr >= dm {
            if (r[dr / 64] >> (dr % 64)) & 1 == 1 {
                xor_shifted(&mut r, &modulus.words, dr - dm);
            }
            if dr == 0 {
                break;
            }
            dr -= 1;
        }
        Ok(Self::from_words(r))
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a
    }

    /// Lowercase hex of the coefficient vector, highest degree first.
    pub fn to_hex(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut s = format!("{:x}", self.words.last().unwrap());
        for w in self.words.iter().rev().skip(1) {
            s.push_str(&format!("{w:016x}"));
        }
        s
    }
}

fn xor_shifted(dst: &mut [u64], src: &[u64], shift: usize) {
    let ws = shift / 64;
    let bs = shift % 64;
    for (i, &w) in src.iter().enumerate() {
        if w == 0 {
            continue;
        }
        dst[i + ws] ^= w << bs;
        if bs != 0 {
            let hi = w >> (64 - bs);
            if hi != 0 {
                dst[i + ws + 1] ^= hi;
            }
        }
    }
}

impl BitXor for &Gf2Poly {
    type Output = Gf2Poly;

    fn bitxor(self, rhs: &Gf2Poly) -> Gf2Poly {
        let n = self.words.len().max(rhs.words.len());
        let words = (0..n)
            .map(|i| self.words.get(i).unwrap_or(&0) ^ rhs.words.get(i).unwrap_or(&0))
            .collect();
        Gf2Poly::from_words(words)
    }
}

impl fmt::Display for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Some(deg) = self.degree() else {
            return f.write_str("0");
        };
        let mut first = true;
        for e in (0..=deg).rev().filter(|&e| self.coeff(e)) {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match e {
                0 => f.write_str("1")?,
                1 => f.write_str("x")?,
                _ => write!(f, "x^{e}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf2Poly({self})")
    }
}

/// `(a * b) mod modulus`.
pub fn gf2_mul_mod(a: &Gf2Poly, b: &Gf2Poly, modulus: &Gf2Poly) -> Result<Gf2Poly> {
    match modulus.degree() {
        None | Some(0) => return Err(Error::ZeroModulus),
        Some(d) if d < 64 => {
            if let (Some(x), Some(y)) = (a.as_u64(), b.as_u64()) {
                let m = modulus.words[0];
                return Ok(Gf2Poly::from_u64(small::mul_mod(
                    small::reduce(x as u128, m, d),
                    small::reduce(y as u128, m, d),
                    m,
                    d,
                )));
            }
        }
        _ => {}
    }
    a.mul(b).rem(modulus)
}

/// Rabin's test: `x^(2^n) = x (mod p)` and `gcd(x^(2^(n/q)) - x, p) = 1` for
/// every prime `q | n`.
pub fn is_irreducible(p: &Gf2Poly) -> Result<bool> {
    let n = match p.degree() {
        None | Some(0) => {
            return Err(Error::InvalidArgument(
                "irreducibility needs a polynomial of degree >= 1".into(),
            ))
        }
        Some(n) => n,
    };
    if n < 64 {
        return Ok(small::is_irreducible(p.words[0], n));
    }
    Ok(is_irreducible_generic(p, n))
}

pub(crate) fn is_irreducible_generic(p: &Gf2Poly, n: usize) -> bool {
    if n > 1 && !p.coeff(0) {
        return false;
    }
    let x = Gf2Poly::from_exponents(&[1]).rem(p).expect("degree >= 1");
    let divisors = prime_divisors(n);
    let mut r = x.clone();
    let mut checkpoints = Vec::new();
    for k in 1..=n {
        r = r.mul(&r).rem(p).expect("degree >= 1");
        if divisors.iter().any(|&q| n / q == k) {
            checkpoints.push(r.clone());
        }
    }
    if r != x {
        return false;
    }
    checkpoints
        .iter()
        .all(|c| (c ^ &x).gcd(p) == Gf2Poly::one())
}

fn prime_divisors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

const IRREDUCIBLE_DOMAIN: &[u8] = b"qds-forge/irreducible/v1";

/// Deterministically derives a monic irreducible polynomial of the given
/// degree from a seed string.
///
/// Candidates are monic with constant term 1; their middle coefficients are
/// drawn from ChaCha20 keyed by `SHA-256(domain || degree || seed wire form)`.
/// The first irreducible candidate is returned.
pub fn gen_irreducible(seed: &BitString, degree: usize) -> Result<Gf2Poly> {
    if degree < 2 {
        return Err(Error::InvalidArgument(format!(
            "irreducible generation needs degree >= 2, got {degree}"
        )));
    }
    if seed.len() != degree {
        return Err(Error::LengthMismatch {
            expected: degree,
            actual: seed.len(),
        });
    }
    let mut hasher = Sha256::new();
    hasher.update(IRREDUCIBLE_DOMAIN);
    hasher.update((degree as u64).to_le_bytes());
    hasher.update(seed.to_wire());
    let key: [u8; 32] = hasher.finalize().into();
    let mut rng = ChaCha20Rng::from_seed(key);

    if degree < 64 {
        let middle_mask = (1u64 << degree) - 2;
        loop {
            let cand = (rng.next_u64() & middle_mask) | 1 | (1 << degree);
            if small::is_irreducible(cand, degree) {
                return Ok(Gf2Poly::from_u64(cand));
            }
        }
    }
    let nwords = degree / 64 + 1;
    loop {
        let mut words: Vec<u64> = (0..nwords).map(|_| rng.next_u64()).collect();
        let top = degree % 64;
        words[nwords - 1] &= (1u64 << top) - 1;
        words[nwords - 1] |= 1 << top;
        words[0] |= 1;
        let cand = Gf2Poly::from_words(words);
        if is_irreducible_generic(&cand, degree) {
            return Ok(cand);
        }
    }
}

/// Single-word arithmetic for moduli of degree below 64.
pub(crate) mod small {
    /// Carry-less 64x64 -> 128 product.
    pub fn clmul(a: u64, b: u64) -> u128 {
        let mut acc = 0u128;
        let mut bits = b;
        while bits != 0 {
            let i = bits.trailing_zeros();
            bits &= bits - 1;
            acc ^= (a as u128) << i;
        }
        acc
    }

    /// `v mod m` where `m` has degree `d` (1 <= d < 64).
    pub fn reduce(mut v: u128, m: u64, d: usize) -> u64 {
        while v >> d != 0 {
            let top = 127 - v.leading_zeros() as usize;
            v ^= (m as u128) << (top - d);
        }
        v as u64
    }

    pub fn mul_mod(a: u64, b: u64, m: u64, d: usize) -> u64 {
        reduce(clmul(a, b), m, d)
    }

    fn gcd(mut a: u64, mut b: u64) -> u64 {
        while b != 0 {
            let db = 63 - b.leading_zeros() as usize;
            a = reduce(a as u128, b, db.max(0));
            if db == 0 {
                // b == 1
                return 1;
            }
            std::mem::swap(&mut a, &mut b);
        }
        a
    }

    pub fn is_irreducible(p: u64, n: usize) -> bool {
        if n > 1 && p & 1 == 0 {
            return false;
        }
        let divisors = super::prime_divisors(n);
        let x = reduce(2, p, n);
        let mut r = x;
        let mut ok = true;
        for k in 1..=n {
            r = mul_mod(r, r, p, n);
            if divisors.iter().any(|&q| n / q == k) && gcd(p, r ^ x) != 1 {
                ok = false;
            }
        }
        ok && r == x
    }
}
