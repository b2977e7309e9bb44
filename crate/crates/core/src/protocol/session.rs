use rand::Rng;

use super::{verify_improved, verify_likely, Event, Party, Payload, Transcript, VerifyOutcome};
use crate::bitcore::{gen_irreducible, BitString};
use crate::channel_sim::{noisy_copy, random_other, AdversaryModel, FlipMode, KgpOutput};
use crate::error::Result;
use crate::lfsr_hash::{encrypt_digest, make_digest, toeplitz_hash, HashSpec, Signature};
use crate::seed::rng_for;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Receivers search their likely sets.
    Original,
    /// Alice publishes her keys once both receipts are confirmed.
    Improved,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionConfig {
    pub variant: Variant,
    /// Largest likely-set radius a receiver will search (original variant).
    pub max_radius: Option<usize>,
}

impl SessionConfig {
    pub fn new(variant: Variant) -> Self {
        Self {
            variant,
            max_radius: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SessionVerdict {
    Completed {
        bob: VerifyOutcome,
        charlie: VerifyOutcome,
    },
    /// Alice stopped the protocol before publishing.
    Aborted { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionReport {
    pub verdict: SessionVerdict,
    pub transcript: Transcript,
}

impl SessionReport {
    /// Verdicts of `(bob, charlie)` unless the session aborted.
    pub fn outcomes(&self) -> Option<(&VerifyOutcome, &VerifyOutcome)> {
        match &self.verdict {
            SessionVerdict::Completed { bob, charlie } => Some((bob, charlie)),
            SessionVerdict::Aborted { .. } => None,
        }
    }
}

/// What Bob hands to Charlie in place of Alice's pair.
fn forwarded_pair(
    adversary: Option<&AdversaryModel>,
    keys: &KgpOutput,
    message: &BitString,
    sig: &Signature,
    rng: &mut impl Rng,
) -> Result<(BitString, Signature)> {
    let n = keys.n();
    Ok(match adversary {
        None => (message.clone(), sig.clone()),
        Some(AdversaryModel::TamperMessage) => (random_other(message, rng), sig.clone()),
        Some(AdversaryModel::ForgePair) => (
            random_other(message, rng),
            Signature::from_bits(BitString::random(2 * n, rng))?,
        ),
        Some(AdversaryModel::GuessKeys { p_e }) => {
            let (gx, _) = noisy_copy(&keys.charlie_x, *p_e, FlipMode::Bernoulli, rng);
            let (gy, _) = noisy_copy(&keys.charlie_y, *p_e, FlipMode::Bernoulli, rng);
            let x_guess = keys.bob_x.xor(&gx)?;
            let y_guess = keys.bob_y.xor(&gy)?;
            let forged = random_other(message, rng);
            let seed = BitString::random(n, rng);
            let spec = HashSpec::new_unchecked(gen_irreducible(&seed, n)?, x_guess)?;
            let h = toeplitz_hash(&spec, &forged)?;
            (forged, encrypt_digest(&make_digest(h, seed)?, &y_guess)?)
        }
    })
}

fn verdict_event(from: Party, out: &VerifyOutcome) -> Event {
    let payload = if out.accepted {
        Payload::Accept
    } else {
        Payload::Reject
    };
    Event::new(from, Party::All, payload, 1)
}

fn improved_outcome(accepted: bool) -> VerifyOutcome {
    VerifyOutcome {
        accepted,
        comparisons_made: 1,
        matched_pair: accepted.then_some((0, 0)),
    }
}

/// Runs signing and verification end to end on simulated keys.
///
/// `seed` drives Alice's polynomial seed and any adversary randomness. With an
/// adversary present Bob is the dishonest party: he verifies Alice's pair
/// honestly but forwards an altered one to Charlie.
pub fn run_session(
    config: &SessionConfig,
    keys: &KgpOutput,
    message: &BitString,
    adversary: Option<&AdversaryModel>,
    seed: u64,
) -> Result<SessionReport> {
    let n = keys.n();
    let mut t = Transcript::new();
    let p_seed = BitString::random(n, &mut rng_for(seed, "alice/p_seed"));
    let alice = keys.alice(p_seed)?;
    let (sig, send) = alice.sign(message)?;
    t.record(send);

    let (fwd_msg, fwd_sig) =
        forwarded_pair(adversary, keys, message, &sig, &mut rng_for(seed, "adversary"))?;
    let pair_bits = |m: &BitString| m.len() + 2 * n;
    t.push(Party::Bob, Party::Charlie, Payload::Forward, pair_bits(&fwd_msg));
    t.push(Party::Bob, Party::Charlie, Payload::KeyStrings, 3 * n);

    let (bob, charlie) = match config.variant {
        Variant::Original => {
            t.push(Party::Charlie, Party::Bob, Payload::KeyStrings, 3 * n);
            let bob = verify_likely(message, &sig, &keys.bob()?.with_radius_cap(config.max_radius))?;
            let charlie = verify_likely(
                &fwd_msg,
                &fwd_sig,
                &keys.charlie()?.with_radius_cap(config.max_radius),
            )?;
            (bob, charlie)
        }
        Variant::Improved => {
            // each receipt echoes the pair that receiver actually holds
            t.push(Party::Bob, Party::Alice, Payload::ReceiptConfirmation, pair_bits(message));
            t.push(Party::Charlie, Party::Bob, Payload::KeyStrings, 3 * n);
            t.push(Party::Charlie, Party::Alice, Payload::ReceiptConfirmation, pair_bits(&fwd_msg));
            if fwd_msg != *message || fwd_sig != sig {
                t.push(Party::Alice, Party::All, Payload::Abort, 0);
                return Ok(SessionReport {
                    verdict: SessionVerdict::Aborted {
                        reason: "receipt confirmations disagree with the signed pair".into(),
                    },
                    transcript: t,
                });
            }
            t.push(Party::Alice, Party::All, Payload::Publication, 3 * n);
            let bob = verify_improved(message, &sig, alice.x_a(), alice.y_a())?;
            let charlie = verify_improved(&fwd_msg, &fwd_sig, alice.x_a(), alice.y_a())?;
            (improved_outcome(bob), improved_outcome(charlie))
        }
    };
    t.record(verdict_event(Party::Bob, &bob));
    t.record(verdict_event(Party::Charlie, &charlie));
    Ok(SessionReport {
        verdict: SessionVerdict::Completed { bob, charlie },
        transcript: t,
    })
}
