use std::collections::BTreeMap;

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};

use super::{
    albam_key, atbash_key, caesar_key, mono_decipher, mono_encipher, scytale_decipher,
    scytale_encipher, vigenere_decipher, vigenere_encipher, SubstitutionKey,
};

pub trait Cipher: Send + Sync {
    fn name(&self) -> &str;
    fn encipher(&self, text: &str) -> Result<String>;
    fn decipher(&self, text: &str) -> Result<String>;
}

/// Raw parameters as they arrive from the command line.
#[derive(Clone, Debug, Default)]
pub struct CipherParams {
    pub key: Option<String>,
    pub width: Option<usize>,
}

pub type CipherFactory = fn(&CipherParams) -> Result<Box<dyn Cipher>>;

/// Cipher constructors looked up by name.
pub struct CipherRegistry {
    factories: BTreeMap<&'static str, CipherFactory>,
}

impl CipherRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register("scytale", |p| {
            let width = p
                .width
                .ok_or_else(|| Error::InvalidConfig("scytale needs --width".into()))?;
            Ok(Box::new(Scytale { width }))
        });
        r.register("atbash", |_| Ok(Box::new(Mono::new("atbash", atbash_key()))));
        r.register("albam", |_| Ok(Box::new(Mono::new("albam", albam_key()))));
        r.register("caesar", |p| {
            let key = p.key.as_deref().unwrap_or("3");
            let shift = parse_shift(key)?;
            Ok(Box::new(Mono::new("caesar", caesar_key(shift))))
        });
        r.register("substitution", |p| {
            let row = p
                .key
                .as_deref()
                .ok_or_else(|| Error::InvalidConfig("substitution needs --key <26-letter row>".into()))?;
            let key = SubstitutionKey::from_cipher_row(Alphabet::latin(), row)?;
            Ok(Box::new(Mono::new("substitution", key)))
        });
        r.register("vigenere", |p| {
            let key = p.key.clone().ok_or(Error::EmptyKey)?;
            Ok(Box::new(Vigenere { key }))
        });
        r
    }

    pub fn register(&mut self, name: &'static str, factory: CipherFactory) {
        self.factories.insert(name, factory);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.factories.keys().copied()
    }

    pub fn create(&self, name: &str, params: &CipherParams) -> Result<Box<dyn Cipher>> {
        let factory = self
            .factories
            .get(name.to_ascii_lowercase().as_str())
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "cipher",
                name: name.to_string(),
            })?;
        factory(params)
    }
}

impl Default for CipherRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

/// Accepts a number (`3`, `-1`) or the letter `A` maps to (`D`).
fn parse_shift(key: &str) -> Result<i64> {
    if let Ok(n) = key.trim().parse::<i64>() {
        return Ok(n);
    }
    let mut chars = key.trim().chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) if c.is_ascii_alphabetic() => Ok((c.to_ascii_uppercase() as u8 - b'A') as i64),
        _ => Err(Error::InvalidConfig(format!("bad caesar shift {key:?}"))),
    }
}

struct Scytale {
    width: usize,
}

impl Cipher for Scytale {
    fn name(&self) -> &str {
        "scytale"
    }
    fn encipher(&self, text: &str) -> Result<String> {
        scytale_encipher(text, self.width)
    }
    fn decipher(&self, text: &str) -> Result<String> {
        scytale_decipher(text, self.width)
    }
}

struct Mono {
    name: &'static str,
    key: SubstitutionKey,
}

impl Mono {
    fn new(name: &'static str, key: SubstitutionKey) -> Self {
        Self { name, key }
    }
}

impl Cipher for Mono {
    fn name(&self) -> &str {
        self.name
    }
    fn encipher(&self, text: &str) -> Result<String> {
        mono_encipher(text, &self.key)
    }
    fn decipher(&self, text: &str) -> Result<String> {
        mono_decipher(text, &self.key)
    }
}

struct Vigenere {
    key: String,
}

impl Cipher for Vigenere {
    fn name(&self) -> &str {
        "vigenere"
    }
    fn encipher(&self, text: &str) -> Result<String> {
        vigenere_encipher(text, &self.key)
    }
    fn decipher(&self, text: &str) -> Result<String> {
        vigenere_decipher(text, &self.key)
    }
}
