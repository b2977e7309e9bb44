use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Party {
    Alice,
    Bob,
    Charlie,
    /// Broadcast to every participant.
    All,
}

impl Party {
    pub fn as_str(self) -> &'static str {
        match self {
            Party::Alice => "alice",
            Party::Bob => "bob",
            Party::Charlie => "charlie",
            Party::All => "all",
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What an event carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Payload {
    /// `(M, S)` from the signer.
    MessageSignature,
    /// `(M, S)` relayed between receivers.
    Forward,
    /// Local strings and declared error rates.
    KeyStrings,
    /// Receipt acknowledgement echoing the received `(M, S)`.
    ReceiptConfirmation,
    /// `(X^A, Y^A)` released by the signer.
    Publication,
    Accept,
    Reject,
    Abort,
}

impl Payload {
    pub fn as_str(self) -> &'static str {
        match self {
            Payload::MessageSignature => "message_signature",
            Payload::Forward => "forward_message_signature",
            Payload::KeyStrings => "key_strings",
            Payload::ReceiptConfirmation => "receipt_confirmation",
            Payload::Publication => "publish_keys",
            Payload::Accept => "verdict_accept",
            Payload::Reject => "verdict_reject",
            Payload::Abort => "abort",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub step: usize,
    pub from: Party,
    pub to: Party,
    pub payload: Payload,
    /// Payload length in bits.
    pub bits: usize,
}

impl Event {
    pub fn new(from: Party, to: Party, payload: Payload, bits: usize) -> Self {
        Self {
            step: 0,
            from,
            to,
            payload,
            bits,
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {} {}",
            self.step,
            self.from,
            self.to,
            self.payload.as_str(),
            self.bits
        )
    }
}

/// Ordered record of every classical message in a session.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    events: Vec<Event>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends `event`, renumbering it to the next step index.
    pub fn record(&mut self, mut event: Event) -> usize {
        event.step = self.events.len();
        self.events.push(event);
        self.events.len() - 1
    }

    pub fn push(&mut self, from: Party, to: Party, payload: Payload, bits: usize) -> usize {
        self.record(Event::new(from, to, payload, bits))
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn position(&self, pred: impl Fn(&Event) -> bool) -> Option<usize> {
        self.events.iter().position(pred)
    }

    /// One line per event: `step sender receiver tag bits`.
    pub fn to_log(&self) -> String {
        self.events.iter().map(|e| format!("{e}\n")).collect()
    }
}
