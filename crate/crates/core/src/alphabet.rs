//! Ordered symbol sets and conversion between symbols and letter indices.
//!
//! Everything below the text boundary works on `u8` indices in `0..len`.

use std::fmt;

use crate::error::{Error, Result};

/// Index of a symbol within an [`Alphabet`].
pub type Letter = u8;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    symbols: Vec<char>,
}

impl Alphabet {
    pub fn new(symbols: impl IntoIterator<Item = char>) -> Result<Self> {
        let symbols: Vec<char> = symbols.into_iter().collect();
        if symbols.len() < 2 {
            return Err(Error::InvalidAlphabet(format!(
                "needs at least 2 symbols, got {}",
                symbols.len()
            )));
        }
        if symbols.len() > 255 {
            return Err(Error::InvalidAlphabet("more than 255 symbols".into()));
        }
        for (i, c) in symbols.iter().enumerate() {
            if symbols[..i].contains(c) {
                return Err(Error::InvalidAlphabet(format!("duplicate symbol {c:?}")));
            }
        }
        Ok(Self { symbols })
    }

    /// The 26 uppercase Latin letters.
    pub fn latin() -> Self {
        Self {
            symbols: ('A'..='Z').collect(),
        }
    }

    /// The six-letter alphabet `{A, C, I, O, S, T}` of the toy machine.
    pub fn toy() -> Self {
        Self {
            symbols: "ACIOST".chars().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn index_of(&self, c: char) -> Option<Letter> {
        self.symbols.iter().position(|&s| s == c).map(|i| i as Letter)
    }

    pub fn symbol(&self, letter: Letter) -> char {
        self.symbols[letter as usize]
    }

    /// Converts text to indices; the error names the first offending position.
    pub fn encode(&self, text: &str) -> Result<Vec<Letter>> {
        text.chars()
            .enumerate()
            .map(|(position, letter)| {
                self.index_of(letter)
                    .ok_or(Error::LetterOutsideAlphabet { letter, position })
            })
            .collect()
    }

    pub fn decode(&self, letters: &[Letter]) -> String {
        letters.iter().map(|&l| self.symbol(l)).collect()
    }

    pub fn contains_all(&self, letters: &[Letter]) -> bool {
        letters.iter().all(|&l| (l as usize) < self.len())
    }
}

impl Default for Alphabet {
    fn default() -> Self {
        Self::latin()
    }
}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Alphabet({})", self.symbols.iter().collect::<String>())
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.symbols.iter().collect::<String>())
    }
}

/// Uppercases and keeps only alphanumeric characters. Spaces and punctuation
/// carry no cipher meaning; digits and accented letters survive so that the
/// alphabet check downstream can reject them with a position.
pub fn normalize(text: &str) -> String {
    text.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_uppercase)
        .collect()
}
