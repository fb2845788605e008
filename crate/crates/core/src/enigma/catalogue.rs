use std::fmt::Write as _;
use std::sync::Arc;

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};

use super::{ReflectorSpec, RotorSpec};

const HISTORICAL: &str = include_str!("../../data/rotors.tsv");
const TOY: &str = include_str!("../../data/toy_rotors.tsv");

/// Rotors and reflectors available to a machine.
///
/// File format: `NAME<TAB>WIRING<TAB>NOTCHES` per line. A `-` in the notch
/// column marks a reflector. Blank lines and `#` comments are skipped.
#[derive(Clone, Debug)]
pub struct Catalogue {
    alphabet: Alphabet,
    rotors: Vec<Arc<RotorSpec>>,
    reflectors: Vec<Arc<ReflectorSpec>>,
}

impl Catalogue {
    pub fn new(alphabet: Alphabet, rotors: Vec<RotorSpec>, reflectors: Vec<ReflectorSpec>) -> Result<Self> {
        let mut names: Vec<&str> = rotors.iter().map(|r| r.name()).chain(reflectors.iter().map(|r| r.name())).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidRotor(format!("duplicate name {:?}", w[0])));
        }
        Ok(Self {
            alphabet,
            rotors: rotors.into_iter().map(Arc::new).collect(),
            reflectors: reflectors.into_iter().map(Arc::new).collect(),
        })
    }

    pub fn parse(alphabet: Alphabet, text: &str) -> Result<Self> {
        let mut rotors = Vec::new();
        let mut reflectors = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [name, wiring, notches] = fields[..] else {
                return Err(Error::parse(i + 1, format!("expected 3 tab-separated fields, got {}", fields.len())));
            };
            if wiring.chars().count() != alphabet.len() {
                return Err(Error::parse(
                    i + 1,
                    format!("wiring for {name} has {} letters, expected {}", wiring.chars().count(), alphabet.len()),
                ));
            }
            let wrap = |e: Error| Error::parse(i + 1, e.to_string());
            if notches == "-" {
                reflectors.push(ReflectorSpec::from_symbols(&alphabet, name, wiring).map_err(wrap)?);
            } else {
                rotors.push(RotorSpec::from_symbols(&alphabet, name, wiring, notches).map_err(wrap)?);
            }
        }
        Self::new(alphabet, rotors, reflectors)
    }

    /// Rotors I to V and reflectors B and C of the three-rotor service machine.
    pub fn historical() -> Self {
        Self::parse(Alphabet::latin(), HISTORICAL).expect("bundled catalogue is valid")
    }

    /// Three single-notch rotors and a reflector on `ACIOST`.
    pub fn toy() -> Self {
        Self::parse(Alphabet::toy(), TOY).expect("bundled catalogue is valid")
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn rotors(&self) -> &[Arc<RotorSpec>] {
        &self.rotors
    }

    pub fn reflectors(&self) -> &[Arc<ReflectorSpec>] {
        &self.reflectors
    }

    pub fn rotor(&self, name: &str) -> Result<Arc<RotorSpec>> {
        self.rotors
            .iter()
            .find(|r| r.name() == name)
            .cloned()
            .ok_or_else(|| Error::UnknownRotor(name.to_string()))
    }

    pub fn reflector(&self, name: &str) -> Result<Arc<ReflectorSpec>> {
        self.reflectors
            .iter()
            .find(|r| r.name() == name)
            .cloned()
            .ok_or_else(|| Error::UnknownReflector(name.to_string()))
    }

    /// All ordered choices of three distinct rotors, in catalogue order.
    pub fn rotor_orders(&self) -> Vec<[Arc<RotorSpec>; 3]> {
        let r = &self.rotors;
        let mut out = Vec::new();
        for a in 0..r.len() {
            for b in 0..r.len() {
                for c in 0..r.len() {
                    if a != b && b != c && a != c {
                        out.push([r[a].clone(), r[b].clone(), r[c].clone()]);
                    }
                }
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.rotors {
            let notches = self.alphabet.decode(r.turnovers());
            writeln!(out, "{}\t{}\t{}", r.name(), r.wiring().to_symbols(&self.alphabet), notches).unwrap();
        }
        for r in &self.reflectors {
            writeln!(out, "{}\t{}\t-", r.name(), r.wiring().to_symbols(&self.alphabet)).unwrap();
        }
        out
    }
}
