//! LFSR-based Toeplitz hashing and the digest / one-time-pad layer.
//!
//! Column 0 of the Toeplitz matrix is the initial LFSR state. Column `k + 1`
//! is column `k` shifted one index up, with entry 0 set to the feedback bit
//! `sum_t p_t col_k[n-1-t]` for `p(x) = x^n + sum_{t<n} p_t x^t`. Entry `i` of
//! column `k` is then `s_(k+n-1-i)` for the LFSR output sequence `s`, so
//! `H[i][k]` depends only on `k - i`.

use crate::bitcore::{is_irreducible, BitString, Gf2Poly};
use crate::error::{Error, Result};

/// Feedback polynomial plus initial state of the LFSR.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashSpec {
    poly: Gf2Poly,
    init: BitString,
}

impl HashSpec {
    pub fn new(poly: Gf2Poly, init: BitString) -> Result<Self> {
        if poly.degree().unwrap_or(0) < 1 || !is_irreducible(&poly)? {
            return Err(Error::InvalidArgument(format!(
                "feedback polynomial {poly} is not irreducible"
            )));
        }
        Self::new_unchecked(poly, init)
    }

    /// Skips the irreducibility test; lengths are still checked.
    pub(crate) fn new_unchecked(poly: Gf2Poly, init: BitString) -> Result<Self> {
        let n = poly.degree().ok_or(Error::ZeroModulus)?;
        if init.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: init.len(),
            });
        }
        Ok(Self { poly, init })
    }

    pub fn poly(&self) -> &Gf2Poly {
        &self.poly
    }

    pub fn init(&self) -> &BitString {
        &self.init
    }

    /// Output length `n`.
    pub fn width(&self) -> usize {
        self.init.len()
    }
}

/// `H * M` with the matrix generated column by column.
pub fn toeplitz_hash(spec: &HashSpec, message: &BitString) -> Result<BitString> {
    if message.is_empty() {
        return Err(Error::InvalidArgument("cannot hash an empty message".into()));
    }
    let n = spec.width();
    let taps = reversed_taps(&spec.poly, n);
    let mut col = spec.init.words().to_vec();
    let mut h = vec![0u64; col.len()];
    for k in 0..message.len() {
        if message.get(k) {
            for (a, b) in h.iter_mut().zip(&col) {
                *a ^= b;
            }
        }
        step(&mut col, &taps, n);
    }
    Ok(BitString::from_words(h, n))
}

/// Tap mask aligned with the column: bit `i` holds the coefficient of
/// `x^(n-1-i)`.
fn reversed_taps(poly: &Gf2Poly, n: usize) -> Vec<u64> {
    let mut taps = vec![0u64; n.div_ceil(64)];
    for i in 0..n {
        if poly.coeff(n - 1 - i) {
            taps[i / 64] |= 1 << (i % 64);
        }
    }
    taps
}

/// LFSR successor: entries move one index up, the last falls off and
/// entry 0 becomes the tap parity of the old column.
fn step(col: &mut [u64], taps: &[u64], n: usize) {
    let parity = col.iter().zip(taps).fold(0, |acc, (c, t)| acc ^ (c & t).count_ones()) & 1;
    let mut carry = parity as u64;
    for w in col.iter_mut() {
        let next = *w >> 63;
        *w = (*w << 1) | carry;
        carry = next;
    }
    if n % 64 != 0 {
        if let Some(last) = col.last_mut() {
            *last &= (1u64 << (n % 64)) - 1;
        }
    }
}

/// Hash of one message as a linear function of the initial state, so the
/// message can be rehashed under many initial states cheaply.
#[derive(Debug, Clone)]
pub(crate) struct InitBasis {
    /// `basis[t]` is the hash under the unit initial state `e_t`.
    basis: Vec<BitString>,
    n: usize,
}

impl InitBasis {
    pub fn new(message: &BitString, poly: &Gf2Poly) -> Result<Self> {
        let n = poly.degree().filter(|&d| d >= 1).ok_or(Error::ZeroModulus)?;
        if message.is_empty() {
            return Err(Error::InvalidArgument("cannot hash an empty message".into()));
        }
        let taps = reversed_taps(poly, n);
        // all n unit columns advanced together; row t tracks initial state e_t
        let mut cols: Vec<Vec<u64>> = (0..n)
            .map(|t| {
                let mut c = vec![0u64; n.div_ceil(64)];
                c[t / 64] |= 1 << (t % 64);
                c
            })
            .collect();
        let mut acc = vec![vec![0u64; n.div_ceil(64)]; n];
        for k in 0..message.len() {
            let bit = message.get(k);
            for (c, a) in cols.iter_mut().zip(acc.iter_mut()) {
                if bit {
                    for (x, y) in a.iter_mut().zip(c.iter()) {
                        *x ^= y;
                    }
                }
                step(c, &taps, n);
            }
        }
        Ok(Self {
            basis: acc.into_iter().map(|w| BitString::from_words(w, n)).collect(),
            n,
        })
    }

    /// Hash of the message under initial state `init`.
    pub fn hash(&self, init: &BitString) -> BitString {
        let mut h = BitString::zeros(self.n);
        for t in (0..self.n).filter(|&t| init.get(t)) {
            h.xor_assign(&self.basis[t]).expect("equal widths");
        }
        h
    }

    /// Hash contribution of initial-state bit `t`.
    pub fn basis(&self, t: usize) -> BitString {
        self.basis[t].clone()
    }
}

/// `(h, seed)`: the hash value followed by the polynomial seed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Digest {
    hash: BitString,
    seed: BitString,
}

impl Digest {
    pub fn hash(&self) -> &BitString {
        &self.hash
    }

    pub fn seed(&self) -> &BitString {
        &self.seed
    }

    pub fn to_bits(&self) -> BitString {
        self.hash.concat(&self.seed)
    }

    /// Splits a `2n`-bit string into `(h, seed)`.
    pub fn from_bits(bits: &BitString) -> Result<Self> {
        if bits.len() % 2 != 0 || bits.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "digest length must be even and positive, got {}",
                bits.len()
            )));
        }
        let (hash, seed) = bits.split_at(bits.len() / 2);
        Ok(Self { hash, seed })
    }

    pub fn to_wire(&self) -> Vec<u8> {
        self.to_bits().to_wire()
    }

    pub fn from_wire(bytes: &[u8]) -> Result<Self> {
        Self::from_bits(&BitString::from_wire(bytes)?)
    }
}

pub fn make_digest(h: BitString, seed: BitString) -> Result<Digest> {
    if h.len() != seed.len() {
        return Err(Error::LengthMismatch {
            expected: h.len(),
            actual: seed.len(),
        });
    }
    Ok(Digest { hash: h, seed })
}

/// An encrypted digest, `2n` bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature {
    body: BitString,
}

impl Signature {
    pub fn from_bits(body: BitString) -> Result<Self> {
        if body.len() % 2 != 0 || body.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "signature length must be even and positive, got {}",
                body.len()
            )));
        }
        Ok(Self { body })
    }

    pub fn body(&self) -> &BitString {
        &self.body
    }

    /// Hash length `n`.
    pub fn width(&self) -> usize {
        self.body.len() / 2
    }

    pub fn to_wire(&self) -> Vec<u8> {
        self.body.to_wire()
    }

    pub fn from_wire(bytes: &[u8]) -> Result<Self> {
        Self::from_bits(BitString::from_wire(bytes)?)
    }
}

pub fn encrypt_digest(d: &Digest, pad: &BitString) -> Result<Signature> {
    Ok(Signature {
        body: d.to_bits().xor(pad)?,
    })
}

pub fn decrypt_signature(s: &Signature, pad: &BitString) -> Result<Digest> {
    Digest::from_bits(&s.body.xor(pad)?)
}

/// `m / 2^(n-1)`, saturating at 1.
pub fn collision_bound(m: u128, n: u64) -> f64 {
    log2_collision_bound(m, n).exp2().min(1.0)
}

/// `log2(m) - (n - 1)`, clamped at 0; usable where the bound underflows.
pub fn log2_collision_bound(m: u128, n: u64) -> f64 {
    if m == 0 {
        return f64::NEG_INFINITY;
    }
    let l = (m as f64).log2() - (n as f64 - 1.0);
    l.min(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitcore::gen_irreducible;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    /// Builds `H[i][k] = s_(k+n-1-i)` from the output sequence of the
    /// recurrence `s_j = sum_t p_t s_(j-n+t)` and multiplies.
    fn matrix_oracle(spec: &HashSpec, msg: &BitString) -> BitString {
        let n = spec.width();
        let m = msg.len();
        let mut s: Vec<bool> = (0..n).map(|j| spec.init().get(n - 1 - j)).collect();
        for j in n..m + n - 1 {
            let b = (0..n).fold(false, |acc, t| acc ^ (spec.poly().coeff(t) & s[j - n + t]));
            s.push(b);
        }
        let entry = |i: usize, k: usize| s[k + n - 1 - i];
        for i in 1..n {
            for k in 1..m {
                assert_eq!(entry(i, k), entry(i - 1, k - 1), "not Toeplitz");
            }
        }
        BitString::from_bools((0..n).map(|i| (0..m).fold(false, |acc, k| acc ^ (entry(i, k) & msg.get(k)))))
    }

    #[test]
    fn zero_message_hashes_to_zero() {
        let spec = HashSpec::new(Gf2Poly::from_exponents(&[3, 1, 0]), bs("101")).unwrap();
        assert_eq!(toeplitz_hash(&spec, &bs("0000000")).unwrap(), bs("000"));
        assert!(toeplitz_hash(&spec, &BitString::zeros(0)).is_err());
    }

    #[test]
    fn hand_example_degree_3() {
        // p = x^3 + x + 1: new entry 0 is col[2] + col[1]
        // columns 101, 110, 111, 011
        let spec = HashSpec::new(Gf2Poly::from_exponents(&[3, 1, 0]), bs("101")).unwrap();
        assert_eq!(toeplitz_hash(&spec, &bs("1000")).unwrap(), bs("101"));
        assert_eq!(toeplitz_hash(&spec, &bs("0100")).unwrap(), bs("110"));
        assert_eq!(toeplitz_hash(&spec, &bs("0010")).unwrap(), bs("111"));
        assert_eq!(toeplitz_hash(&spec, &bs("0001")).unwrap(), bs("011"));
        assert_eq!(toeplitz_hash(&spec, &bs("1111")).unwrap(), bs("111"));
        for m in ["1000", "0110", "1111"] {
            assert_eq!(toeplitz_hash(&spec, &bs(m)).unwrap(), matrix_oracle(&spec, &bs(m)));
        }
    }

    #[test]
    fn rejects_reducible_or_mismatched_spec() {
        assert!(HashSpec::new(Gf2Poly::from_exponents(&[2, 0]), bs("10")).is_err());
        assert!(HashSpec::new(Gf2Poly::from_exponents(&[2, 1, 0]), bs("101")).is_err());
    }

    #[test]
    fn streaming_matches_matrix_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..1000 {
            let n = 2 + trial % 7;
            let m = 1 + (trial * 7) % 16;
            let poly = gen_irreducible(&BitString::random(n, &mut rng), n).unwrap();
            let spec = HashSpec::new(poly, BitString::random(n, &mut rng)).unwrap();
            let msg = BitString::random(m, &mut rng);
            assert_eq!(toeplitz_hash(&spec, &msg).unwrap(), matrix_oracle(&spec, &msg));
        }
    }

    #[test]
    fn basis_path_matches_streaming() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for n in [2usize, 5, 16, 24, 63, 64, 65, 130] {
            for m in [1usize, 7, 64, 65, 300] {
                let poly = gen_irreducible(&BitString::random(n, &mut rng), n).unwrap();
                let init = BitString::random(n, &mut rng);
                let msg = BitString::random(m, &mut rng);
                let spec = HashSpec::new(poly.clone(), init.clone()).unwrap();
                let res = InitBasis::new(&msg, &poly).unwrap();
                let h = toeplitz_hash(&spec, &msg).unwrap();
                assert_eq!(res.hash(&init), h, "n={n} m={m}");
                let mut acc = BitString::zeros(n);
                for t in (0..n).filter(|&t| init.get(t)) {
                    acc.xor_assign(&res.basis(t)).unwrap();
                }
                assert_eq!(acc, h);
            }
        }
    }

    #[test]
    fn hash_is_linear_and_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let n = 16;
            let poly = gen_irreducible(&BitString::random(n, &mut rng), n).unwrap();
            let spec = HashSpec::new(poly, BitString::random(n, &mut rng)).unwrap();
            let a = BitString::random(100, &mut rng);
            let b = BitString::random(100, &mut rng);
            let ha = toeplitz_hash(&spec, &a).unwrap();
            let hb = toeplitz_hash(&spec, &b).unwrap();
            assert_eq!(ha.xor(&hb).unwrap(), toeplitz_hash(&spec, &a.xor(&b).unwrap()).unwrap());
            assert_eq!(ha, toeplitz_hash(&spec, &a).unwrap());
        }
    }

    #[test]
    fn digest_examples() {
        let d = make_digest(bs("101"), bs("110")).unwrap();
        assert_eq!(d.to_bits(), bs("101110"));
        let back = Digest::from_bits(&d.to_bits()).unwrap();
        assert_eq!((back.hash(), back.seed()), (&bs("101"), &bs("110")));
        let d4 = make_digest(bs("1010"), bs("0011")).unwrap();
        assert_eq!(d4.to_bits().len(), 8);
        assert!(make_digest(bs("10"), bs("101")).is_err());
        assert_eq!(Digest::from_wire(&d.to_wire()).unwrap(), d);
    }

    #[test]
    fn encryption_examples() {
        let d = make_digest(bs("11"), bs("00")).unwrap();
        let s = encrypt_digest(&d, &bs("1010")).unwrap();
        assert_eq!(s.body(), &bs("0110"));
        assert_eq!(encrypt_digest(&d, &bs("0000")).unwrap().body(), &d.to_bits());
        assert_eq!(decrypt_signature(&s, &bs("1010")).unwrap(), d);
        let wrong = decrypt_signature(&s, &bs("1001")).unwrap();
        assert_eq!(wrong.to_bits(), d.to_bits().xor(&bs("0011")).unwrap());
        assert!(encrypt_digest(&d, &bs("101")).is_err());
        assert_eq!(Signature::from_wire(&s.to_wire()).unwrap(), s);
    }

    #[test]
    fn collision_bound_examples() {
        assert_eq!(collision_bound(256, 16), 0.0078125);
        assert_eq!(collision_bound(1, 2), 0.5);
        assert_eq!(collision_bound(1 << 40, 8), 1.0);
        assert_eq!(log2_collision_bound(1, 1001), -1000.0);
    }
}
