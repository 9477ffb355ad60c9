use thiserror::Error;

/// Errors produced by the boosting engine, the crypto toolbox, the party
/// topology, and the protocol runs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("fixed-point overflow encoding {0}")]
    FixedOverflow(f64),

    #[error("decrypted value outside the encodable range")]
    OutOfRange,

    #[error("ciphertext is not a valid group element")]
    MalformedCiphertext,

    #[error("division by zero: hessian sum and lambda are both zero")]
    DivisionByZero,

    #[error("sealed blob failed authentication")]
    Integrity,

    #[error("bucket value {value} above last threshold {last}")]
    AboveLastThreshold { value: f64, last: f64 },

    #[error("unknown sample id {0}")]
    UnknownSample(u64),

    #[error("unknown split record {0}")]
    UnknownRecord(u32),

    #[error("party {0} is unreachable")]
    UnreachableParty(usize),

    #[error("nothing to attack: adversary view is empty")]
    NothingToAttack,
}

pub type Result<T> = std::result::Result<T, Error>;
