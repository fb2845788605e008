//! Pre-mechanical ciphers and the statistical attacks that break them.
//!
//! All functions normalize their input first (uppercase, spaces and
//! punctuation removed), so `"VENI VIDI VICI"` and `"VENIVIDIVICI"` give the
//! same ciphertext.

mod freq;
mod kasiski;
mod registry;

pub use freq::{letter_frequencies, FrequencyTable};
pub use kasiski::{kasiski_candidates, KeyLengthCandidate};
pub use registry::{Cipher, CipherFactory, CipherParams, CipherRegistry};

use crate::alphabet::{normalize, Alphabet, Letter};
use crate::error::{Error, Result};
use crate::perm::Permutation;

/// A monoalphabetic substitution over an alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubstitutionKey {
    alphabet: Alphabet,
    mapping: Permutation,
}

impl SubstitutionKey {
    pub fn new(alphabet: Alphabet, mapping: Permutation) -> Result<Self> {
        if mapping.len() != alphabet.len() {
            return Err(Error::NotAPermutation(format!(
                "mapping over {} letters for an alphabet of {}",
                mapping.len(),
                alphabet.len()
            )));
        }
        Ok(Self { alphabet, mapping })
    }

    /// Parses the cipher row of a two-row substitution table, e.g.
    /// `ZYXWVUTSRQPONMLKJIHGFEDCBA` for Atbash.
    pub fn from_cipher_row(alphabet: Alphabet, row: &str) -> Result<Self> {
        let mapping = Permutation::from_symbols(&alphabet, &normalize(row))?;
        Self::new(alphabet, mapping)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn mapping(&self) -> &Permutation {
        &self.mapping
    }

    pub fn inverse(&self) -> Self {
        Self {
            alphabet: self.alphabet.clone(),
            mapping: self.mapping.inverse(),
        }
    }

    /// Apply `self`, then `next`.
    pub fn then(&self, next: &SubstitutionKey) -> Self {
        Self {
            alphabet: self.alphabet.clone(),
            mapping: next.mapping.after(&self.mapping),
        }
    }

    pub fn cipher_row(&self) -> String {
        self.mapping.to_symbols(&self.alphabet)
    }
}

/// Shift cipher: `A -> A + shift`. Any integer is accepted and reduced mod 26.
pub fn caesar_key(shift: i64) -> SubstitutionKey {
    let n = 26;
    let shift = shift.rem_euclid(n as i64) as usize;
    SubstitutionKey {
        alphabet: Alphabet::latin(),
        mapping: Permutation::shift(n, shift),
    }
}

/// Reversed alphabet: `A <-> Z`, `B <-> Y`, ...
pub fn atbash_key() -> SubstitutionKey {
    let forward = (0..26u8).rev().collect();
    SubstitutionKey {
        alphabet: Alphabet::latin(),
        mapping: Permutation::new(forward).expect("reversal"),
    }
}

/// Half-alphabet swap `A <-> N`, `B <-> O`, ...
pub fn albam_key() -> SubstitutionKey {
    let forward = (0..26u8).map(|i| (i + 13) % 26).collect();
    SubstitutionKey {
        alphabet: Alphabet::latin(),
        mapping: Permutation::new(forward).expect("half swap"),
    }
}

fn encode_nonempty(alphabet: &Alphabet, text: &str) -> Result<Vec<Letter>> {
    let text = normalize(text);
    if text.is_empty() {
        return Err(Error::EmptyMessage);
    }
    alphabet.encode(&text)
}

pub fn mono_encipher(text: &str, key: &SubstitutionKey) -> Result<String> {
    let letters = encode_nonempty(&key.alphabet, text)?;
    let out: Vec<Letter> = letters.iter().map(|&l| key.mapping.apply(l)).collect();
    Ok(key.alphabet.decode(&out))
}

pub fn mono_decipher(text: &str, key: &SubstitutionKey) -> Result<String> {
    mono_encipher(text, &key.inverse())
}

/// Writes the text row-major into a grid `width` letters wide and reads it
/// off column by column. A short last row leaves the trailing columns one
/// letter shorter; those absent cells are skipped.
pub fn scytale_encipher(text: &str, width: usize) -> Result<String> {
    let text: Vec<char> = normalize(text).chars().collect();
    if text.is_empty() {
        return Err(Error::EmptyMessage);
    }
    if width < 1 {
        return Err(Error::InvalidWidth(width));
    }
    let mut out = String::with_capacity(text.len());
    for col in 0..width {
        out.extend(text.iter().skip(col).step_by(width));
    }
    Ok(out)
}

pub fn scytale_decipher(text: &str, width: usize) -> Result<String> {
    let text: Vec<char> = normalize(text).chars().collect();
    if text.is_empty() {
        return Err(Error::EmptyMessage);
    }
    if width < 1 {
        return Err(Error::InvalidWidth(width));
    }
    let len = text.len();
    let rows = len.div_ceil(width);
    // Columns left of `len % width` are full height when the grid is ragged.
    let full_columns = if len.is_multiple_of(width) { width } else { len % width };
    let mut out = vec![' '; len];
    let mut cursor = 0;
    for col in 0..width.min(len) {
        let height = if col < full_columns { rows } else { rows - 1 };
        for row in 0..height {
            out[row * width + col] = text[cursor];
            cursor += 1;
        }
    }
    Ok(out.into_iter().collect())
}

fn vigenere(text: &str, key: &str, sign: i32) -> Result<String> {
    let alphabet = Alphabet::latin();
    let key = normalize(key);
    if key.is_empty() {
        return Err(Error::EmptyKey);
    }
    let key = alphabet.encode(&key)?;
    let letters = encode_nonempty(&alphabet, text)?;
    let n = alphabet.len() as i32;
    let out: Vec<Letter> = letters
        .iter()
        .zip(key.iter().cycle())
        .map(|(&p, &k)| (p as i32 + sign * k as i32).rem_euclid(n) as Letter)
        .collect();
    Ok(alphabet.decode(&out))
}

/// Letter `i` is shifted by `key[i mod |key|]`, reading `A` as shift 0.
pub fn vigenere_encipher(text: &str, key: &str) -> Result<String> {
    vigenere(text, key, 1)
}

pub fn vigenere_decipher(text: &str, key: &str) -> Result<String> {
    vigenere(text, key, -1)
}
