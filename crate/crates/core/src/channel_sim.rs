//! Statistical stand-in for the key-generation channel and the adversary
//! simulators.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::bitcore::BitString;
use crate::error::{check_domain, Error, Result};
use crate::lfsr_hash::Signature;
use crate::protocol::{verify_improved, verify_likely, AliceState, ErrorRates, ReceiverState};
use crate::seed::{derive_seed, trial_seed};

/// How declared error rates turn into bit flips.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlipMode {
    /// Exactly `floor(len * e)` positions, chosen without replacement.
    ExactCount,
    /// Each bit flips independently with probability `e`.
    Bernoulli,
}

/// Correlated raw keys shared by Alice with Bob (`*b`) and Charlie (`*c`).
#[derive(Debug, Clone, PartialEq)]
pub struct KgpOutput {
    pub rates: ErrorRates,
    pub alice_xb: BitString,
    pub bob_x: BitString,
    pub alice_xc: BitString,
    pub charlie_x: BitString,
    pub alice_yb: BitString,
    pub bob_y: BitString,
    pub alice_yc: BitString,
    pub charlie_y: BitString,
    /// Realized flips for `(e1, e2, e3, e4)`.
    pub realized: [usize; 4],
}

impl KgpOutput {
    pub fn n(&self) -> usize {
        self.alice_xb.len()
    }

    /// `X^A = X^B_A xor X^C_A`.
    pub fn x_a(&self) -> BitString {
        self.alice_xb.xor(&self.alice_xc).expect("equal lengths")
    }

    /// `Y^A = Y^B_A xor Y^C_A`.
    pub fn y_a(&self) -> BitString {
        self.alice_yb.xor(&self.alice_yc).expect("equal lengths")
    }

    pub fn alice(&self, p_seed: BitString) -> Result<AliceState> {
        AliceState::new(self.x_a(), self.y_a(), p_seed)
    }

    /// Bob's view after the string exchange.
    pub fn bob(&self) -> Result<ReceiverState> {
        ReceiverState::new(self.bob_x.clone(), self.bob_y.clone(), self.rates)?
            .with_peer(self.charlie_x.clone(), self.charlie_y.clone())
    }

    /// Charlie's view after the string exchange.
    pub fn charlie(&self) -> Result<ReceiverState> {
        ReceiverState::new(self.charlie_x.clone(), self.charlie_y.clone(), self.rates)?
            .with_peer(self.bob_x.clone(), self.bob_y.clone())
    }
}

pub(crate) fn noisy_copy(s: &BitString, rate: f64, mode: FlipMode, rng: &mut impl Rng) -> (BitString, usize) {
    let mut out = s.clone();
    match mode {
        FlipMode::ExactCount => {
            let k = (s.len() as f64 * rate).floor() as usize;
            for i in sample(rng, s.len(), k) {
                out.flip(i);
            }
            (out, k)
        }
        FlipMode::Bernoulli => {
            let mut k = 0;
            for i in 0..s.len() {
                if rng.gen_bool(rate) {
                    out.flip(i);
                    k += 1;
                }
            }
            (out, k)
        }
    }
}

/// Draws uniform base strings for Alice and noisy copies for the receivers.
pub fn simulate_kgp(n: usize, rates: ErrorRates, mode: FlipMode, seed: u64) -> Result<KgpOutput> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("key length {n} below 2")));
    }
    rates.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(seed, "kgp"));
    let alice_xb = BitString::random(n, &mut rng);
    let alice_xc = BitString::random(n, &mut rng);
    let alice_yb = BitString::random(2 * n, &mut rng);
    let alice_yc = BitString::random(2 * n, &mut rng);
    let (bob_x, k1) = noisy_copy(&alice_xb, rates.e1, mode, &mut rng);
    let (bob_y, k2) = noisy_copy(&alice_yb, rates.e2, mode, &mut rng);
    let (charlie_x, k3) = noisy_copy(&alice_xc, rates.e3, mode, &mut rng);
    let (charlie_y, k4) = noisy_copy(&alice_yc, rates.e4, mode, &mut rng);
    Ok(KgpOutput {
        rates,
        alice_xb,
        bob_x,
        alice_xc,
        charlie_x,
        alice_yb,
        bob_y,
        alice_yc,
        charlie_y,
        realized: [k1, k2, k3, k4],
    })
}

/// Malicious-receiver behaviors exercised by sessions.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AdversaryModel {
    /// Bob guesses Charlie's strings bitwise with error `p_e` and signs a
    /// fresh message with the guessed keys.
    GuessKeys { p_e: f64 },
    /// Bob forwards a different message with Alice's signature.
    TamperMessage,
    /// Bob forwards a random message with a random signature.
    ForgePair,
}

/// Outcome counts of a Monte Carlo attack.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AttackStats {
    pub trials: u64,
    pub successes: u64,
}

impl AttackStats {
    pub fn rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.successes as f64 / self.trials as f64
        }
    }

    /// Binomial standard deviation of the rate at true success probability `p`.
    pub fn sigma(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials.max(1) as f64).sqrt()
    }
}

/// Bob guesses both of Charlie's strings, each bit wrong with probability
/// `p_e`; a trial succeeds when all `3n` bits are right.
pub fn guessing_attack(keys: &KgpOutput, p_e: f64, trials: u64, seed: u64) -> Result<AttackStats> {
    check_domain("p_e", p_e, p_e > 0.0 && p_e <= 0.5, "(0, 0.5]")?;
    let successes = (0..trials)
        .into_par_iter()
        .filter(|&t| {
            let mut rng = ChaCha20Rng::seed_from_u64(trial_seed(seed, t));
            let (gx, _) = noisy_copy(&keys.charlie_x, p_e, FlipMode::Bernoulli, &mut rng);
            if gx != keys.charlie_x {
                return false;
            }
            let (gy, _) = noisy_copy(&keys.charlie_y, p_e, FlipMode::Bernoulli, &mut rng);
            gy == keys.charlie_y
        })
        .count() as u64;
    Ok(AttackStats { trials, successes })
}

/// How the forwarded pair is altered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TamperStrategy {
    /// Forward `(M, S)` unchanged; not an attack, acceptance must be 1.
    Replay,
    /// Random `M' != M` with Alice's `S`.
    RandomMessage,
    /// Random `M' != M` with a random `S'`.
    RandomPair,
}

/// Fixed sizes for tamper experiments; keys are redrawn every trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TamperFixture {
    pub n: usize,
    pub m: usize,
    pub rates: ErrorRates,
    /// `false` verifies with likely sets, `true` against honest publication.
    pub improved: bool,
    pub max_radius: Option<usize>,
}

pub(crate) fn random_other(m: &BitString, rng: &mut impl Rng) -> BitString {
    loop {
        let c = BitString::random(m.len(), rng);
        if &c != m {
            return c;
        }
    }
}

/// Fraction of trials in which Charlie accepts the altered pair.
pub fn tamper_attack(
    fixture: &TamperFixture,
    strategy: TamperStrategy,
    trials: u64,
    seed: u64,
) -> Result<AttackStats> {
    if fixture.m == 0 {
        return Err(Error::InvalidArgument("message length must be positive".into()));
    }
    let outcomes: Vec<Result<bool>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = trial_seed(seed, t);
            let keys = simulate_kgp(fixture.n, fixture.rates, FlipMode::ExactCount, s)?;
            let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(s, "tamper"));
            let alice = keys.alice(BitString::random(fixture.n, &mut rng))?;
            let msg = BitString::random(fixture.m, &mut rng);
            let (sig, _) = alice.sign(&msg)?;
            let (m2, s2) = match strategy {
                TamperStrategy::Replay => (msg, sig),
                TamperStrategy::RandomMessage => (random_other(&msg, &mut rng), sig),
                TamperStrategy::RandomPair => (
                    random_other(&msg, &mut rng),
                    Signature::from_bits(BitString::random(2 * fixture.n, &mut rng))?,
                ),
            };
            if fixture.improved {
                verify_improved(&m2, &s2, alice.x_a(), alice.y_a())
            } else {
                let charlie = keys.charlie()?.with_radius_cap(fixture.max_radius);
                Ok(verify_likely(&m2, &s2, &charlie)?.accepted)
            }
        })
        .collect();
    let mut successes = 0;
    for o in outcomes {
        successes += o? as u64;
    }
    Ok(AttackStats { trials, successes })
}
