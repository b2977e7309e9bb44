//! Signing, the two verification variants and full three-party sessions.

mod session;
mod transcript;

use std::collections::HashMap;

pub use session::{run_session, SessionConfig, SessionReport, SessionVerdict, Variant};
pub use transcript::{Event, Party, Payload, Transcript};

use crate::bitcore::{gen_irreducible, BitString, FlipSets, LikelySetSpec};
use crate::error::{check_domain, Error, Infeasibility, Result};
use crate::lfsr_hash::{
    encrypt_digest, make_digest, toeplitz_hash, HashSpec, InitBasis, Signature,
};

/// The signer's key material.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AliceState {
    x_a: BitString,
    y_a: BitString,
    p_seed: BitString,
}

impl AliceState {
    pub fn new(x_a: BitString, y_a: BitString, p_seed: BitString) -> Result<Self> {
        let n = x_a.len();
        if n < 2 {
            return Err(Error::InvalidArgument(format!("key length {n} below 2")));
        }
        for (expected, actual) in [(2 * n, y_a.len()), (n, p_seed.len())] {
            if expected != actual {
                return Err(Error::LengthMismatch { expected, actual });
            }
        }
        Ok(Self { x_a, y_a, p_seed })
    }

    pub fn x_a(&self) -> &BitString {
        &self.x_a
    }

    pub fn y_a(&self) -> &BitString {
        &self.y_a
    }

    pub fn p_seed(&self) -> &BitString {
        &self.p_seed
    }

    pub fn n(&self) -> usize {
        self.x_a.len()
    }

    /// `S = (H(p(seed), X^A) M || seed) xor Y^A`, plus the send event.
    pub fn sign(&self, message: &BitString) -> Result<(Signature, Event)> {
        let poly = gen_irreducible(&self.p_seed, self.n())?;
        let spec = HashSpec::new_unchecked(poly, self.x_a.clone())?;
        let h = toeplitz_hash(&spec, message)?;
        let sig = encrypt_digest(&make_digest(h, self.p_seed.clone())?, &self.y_a)?;
        let event = Event::new(
            Party::Alice,
            Party::Bob,
            Payload::MessageSignature,
            message.len() + sig.body().len(),
        );
        Ok((sig, event))
    }
}

/// Declared bit-flip rates: `e1`/`e3` on the X strings of Bob/Charlie,
/// `e2`/`e4` on their Y strings.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ErrorRates {
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub e4: f64,
}

impl ErrorRates {
    pub fn new(e1: f64, e2: f64, e3: f64, e4: f64) -> Result<Self> {
        let r = Self { e1, e2, e3, e4 };
        r.validate()?;
        Ok(r)
    }

    pub fn zero() -> Self {
        Self {
            e1: 0.0,
            e2: 0.0,
            e3: 0.0,
            e4: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("e1", self.e1), ("e2", self.e2), ("e3", self.e3), ("e4", self.e4)] {
            check_domain(name, v, (0.0..0.5).contains(&v), "[0, 0.5)")?;
        }
        Ok(())
    }

    pub fn e_x(&self) -> f64 {
        self.e1 + self.e3
    }

    pub fn e_y(&self) -> f64 {
        self.e2 + self.e4
    }
}

/// A receiver's local strings, the peer's strings once exchanged, and the
/// declared error rates.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverState {
    x_local: BitString,
    y_local: BitString,
    x_peer: Option<BitString>,
    y_peer: Option<BitString>,
    rates: ErrorRates,
    max_radius: Option<usize>,
}

impl ReceiverState {
    pub fn new(x_local: BitString, y_local: BitString, rates: ErrorRates) -> Result<Self> {
        rates.validate()?;
        if y_local.len() != 2 * x_local.len() {
            return Err(Error::LengthMismatch {
                expected: 2 * x_local.len(),
                actual: y_local.len(),
            });
        }
        Ok(Self {
            x_local,
            y_local,
            x_peer: None,
            y_peer: None,
            rates,
            max_radius: None,
        })
    }

    pub fn set_peer(&mut self, x_peer: BitString, y_peer: BitString) -> Result<()> {
        for (a, b) in [(&self.x_local, &x_peer), (&self.y_local, &y_peer)] {
            if a.len() != b.len() {
                return Err(Error::LengthMismatch {
                    expected: a.len(),
                    actual: b.len(),
                });
            }
        }
        self.x_peer = Some(x_peer);
        self.y_peer = Some(y_peer);
        Ok(())
    }

    pub fn with_peer(mut self, x_peer: BitString, y_peer: BitString) -> Result<Self> {
        self.set_peer(x_peer, y_peer)?;
        Ok(self)
    }

    /// Refuses likely sets wider than `cap` (the ball grows as `L^r`).
    pub fn with_radius_cap(mut self, cap: Option<usize>) -> Self {
        self.max_radius = cap;
        self
    }

    pub fn x_local(&self) -> &BitString {
        &self.x_local
    }

    pub fn y_local(&self) -> &BitString {
        &self.y_local
    }

    pub fn rates(&self) -> ErrorRates {
        self.rates
    }

    pub fn n(&self) -> usize {
        self.x_local.len()
    }

    fn capped(&self, set: LikelySetSpec) -> Result<LikelySetSpec> {
        match self.max_radius {
            Some(cap) if set.radius() > cap => Err(Error::InvalidArgument(format!(
                "likely-set radius {} exceeds the configured cap {cap}",
                set.radius()
            ))),
            _ => Ok(set),
        }
    }

    fn peer(&self) -> Result<(&BitString, &BitString)> {
        match (&self.x_peer, &self.y_peer) {
            (Some(x), Some(y)) => Ok((x, y)),
            _ => Err(Error::InvalidArgument(
                "peer strings have not been exchanged yet".into(),
            )),
        }
    }

    pub fn x_likely_set(&self) -> Result<LikelySetSpec> {
        let (x_peer, _) = self.peer()?;
        self.capped(build_likely_set(&self.x_local, x_peer, self.rates.e1, self.rates.e3)?)
    }

    pub fn y_likely_set(&self) -> Result<LikelySetSpec> {
        let (_, y_peer) = self.peer()?;
        self.capped(build_likely_set(&self.y_local, y_peer, self.rates.e2, self.rates.e4)?)
    }
}

/// `ceil(len * rate)`, forgiving rounding noise so that e.g. `20 * 0.1`
/// yields 2 rather than 3.
pub fn radius_for(len: usize, rate: f64) -> usize {
    let x = len as f64 * rate;
    (x - 1e-9 * x.max(1.0)).ceil().max(0.0) as usize
}

/// Ball centered on `local xor peer` with radius `ceil(L (e_a + e_b))`.
pub fn build_likely_set(
    local: &BitString,
    peer: &BitString,
    e_a: f64,
    e_b: f64,
) -> Result<LikelySetSpec> {
    check_domain("e_a", e_a, e_a >= 0.0 && e_a.is_finite(), "[0, 0.5)")?;
    check_domain("e_b", e_b, e_b >= 0.0 && e_b.is_finite(), "[0, 0.5)")?;
    if e_a + e_b >= 0.5 {
        return Err(Infeasibility::ErrorRateTooHigh.into());
    }
    let center = local.xor(peer)?;
    let radius = radius_for(center.len(), e_a + e_b);
    LikelySetSpec::new(center, radius)
}

/// Result of one receiver's verification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyOutcome {
    pub accepted: bool,
    /// `(K_i, K_j)` pairs actually tested.
    pub comparisons_made: u128,
    /// Ball indices `(i, j)` of the first match, both 0-based in enumeration order.
    pub matched_pair: Option<(usize, usize)>,
}

/// Hashes of the X-ball under one candidate polynomial, expressed as the
/// center's hash plus per-bit contributions.
enum SeedTable {
    Small { center: u64, basis: Vec<u64> },
    Wide { center: BitString, basis: Vec<BitString> },
}

impl SeedTable {
    fn new(message: &BitString, seed: &BitString, x_center: &BitString) -> Result<Self> {
        let n = x_center.len();
        let poly = gen_irreducible(seed, n)?;
        let res = InitBasis::new(message, &poly)?;
        let center = res.hash(x_center);
        let basis = (0..n).map(|t| res.basis(t));
        Ok(if n < 64 {
            Self::Small {
                center: word0(&center),
                basis: basis.map(|b| word0(&b)).collect(),
            }
        } else {
            Self::Wide {
                center,
                basis: basis.collect(),
            }
        })
    }

    fn matches(&self, flips: &[usize], h: &BitString) -> bool {
        match self {
            Self::Small { center, basis } => {
                let v = flips.iter().fold(*center, |acc, &t| acc ^ basis[t]);
                v == word0(h)
            }
            Self::Wide { center, basis } => {
                let mut v = center.clone();
                for &t in flips {
                    v.xor_assign(&basis[t]).expect("equal widths");
                }
                &v == h
            }
        }
    }
}

fn word0(s: &BitString) -> u64 {
    s.words().first().copied().unwrap_or(0)
}

const SEED_CACHE_LIMIT: usize = 4096;

/// Searches the likely sets for a key pair under which `(message, signature)`
/// checks out.
///
/// `j` walks the Y-ball (expected digest `S xor K_j`), `i` the X-ball; the
/// search stops at the first match, so `matched_pair` is the smallest pair in
/// that order.
pub fn verify_likely(
    message: &BitString,
    signature: &Signature,
    receiver: &ReceiverState,
) -> Result<VerifyOutcome> {
    if message.is_empty() {
        return Err(Error::InvalidArgument("empty message".into()));
    }
    let xs = receiver.x_likely_set()?;
    let ys = receiver.y_likely_set()?;
    let n = xs.center().len();
    if signature.body().len() != 2 * n {
        return Err(Error::LengthMismatch {
            expected: 2 * n,
            actual: signature.body().len(),
        });
    }
    let x_flips: Vec<Vec<usize>> = FlipSets::new(n, xs.radius()).collect();
    let base = signature.body().xor(ys.center())?;
    let mut tables: HashMap<BitString, SeedTable> = HashMap::new();
    let mut comparisons: u128 = 0;
    let mut y_flips = FlipSets::new(2 * n, ys.radius());
    let mut j = 0usize;
    while let Some(set) = y_flips.next_set() {
        let mut d = base.clone();
        for &t in set {
            d.flip(t);
        }
        let (h_j, p_j) = d.split_at(n);
        if !tables.contains_key(&p_j) {
            if tables.len() >= SEED_CACHE_LIMIT {
                tables.clear();
            }
            let table = SeedTable::new(message, &p_j, xs.center())?;
            tables.insert(p_j.clone(), table);
        }
        let table = &tables[&p_j];
        for (i, flips) in x_flips.iter().enumerate() {
            comparisons += 1;
            if table.matches(flips, &h_j) {
                return Ok(VerifyOutcome {
                    accepted: true,
                    comparisons_made: comparisons,
                    matched_pair: Some((i, j)),
                });
            }
        }
        j += 1;
    }
    Ok(VerifyOutcome {
        accepted: false,
        comparisons_made: comparisons,
        matched_pair: None,
    })
}

/// Verification against the signer's published `(X^A, Y^A)`.
pub fn verify_improved(
    message: &BitString,
    signature: &Signature,
    published_x: &BitString,
    published_y: &BitString,
) -> Result<bool> {
    let n = published_x.len();
    if published_y.len() != 2 * n {
        return Err(Error::LengthMismatch {
            expected: 2 * n,
            actual: published_y.len(),
        });
    }
    let d = signature.body().xor(published_y)?;
    let (h, p) = d.split_at(n);
    let poly = gen_irreducible(&p, n)?;
    let spec = HashSpec::new_unchecked(poly, published_x.clone())?;
    Ok(toeplitz_hash(&spec, message)? == h)
}
