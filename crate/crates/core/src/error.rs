use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty message")]
    EmptyMessage,
    #[error("invalid width {0}")]
    InvalidWidth(usize),
    #[error("empty key")]
    EmptyKey,
    #[error("letter {letter:?} at position {position} is outside the alphabet")]
    LetterOutsideAlphabet { letter: char, position: usize },
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),
    #[error("not a permutation: {0}")]
    NotAPermutation(String),
    #[error("invalid reflector: {0}")]
    InvalidReflector(String),
    #[error("invalid plugboard: {0}")]
    InvalidPlugboard(String),
    #[error("invalid rotor: {0}")]
    InvalidRotor(String),
    #[error("unknown rotor {0:?}")]
    UnknownRotor(String),
    #[error("unknown reflector {0:?}")]
    UnknownReflector(String),
    #[error("invalid machine: {0}")]
    InvalidMachine(String),
    #[error("bad trigram {0:?}")]
    BadTrigram(String),
    #[error("indicator mismatch: {0:?} deciphers to differing halves")]
    IndicatorMismatch(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid keyspace model: {0}")]
    InvalidModel(String),
    #[error("zero shift is not a valid alignment")]
    ZeroShift,
    #[error("messages do not overlap at shift {0}")]
    NoOverlap(i32),
    #[error("crib lengths differ ({plain} plain vs {cipher} cipher)")]
    CribLengthMismatch { plain: usize, cipher: usize },
    #[error("crib misaligned: letter {letter:?} would encipher to itself at crib index {index}")]
    CribMisaligned { letter: char, index: usize },
    #[error("crib window {start}..{end} exceeds the message length {len}")]
    CribOutOfBounds { start: usize, end: usize, len: usize },
    #[error("invalid probability {0}")]
    InvalidProbability(f64),
    #[error("impossible evidence")]
    ImpossibleEvidence,
    #[error("unknown strategy {kind} {name:?}")]
    UnknownStrategy { kind: &'static str, name: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{stage} stage failed: {cause}")]
    Stage { stage: &'static str, cause: String },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
