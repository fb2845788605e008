use std::fmt::Write as _;

use crate::alphabet::{normalize, Alphabet};
use crate::error::{Error, Result};

const ITALIAN: &str = include_str!("../../data/italian_frequencies.tsv");

/// Relative letter frequencies over an alphabet. Letters absent from the
/// source get frequency 0.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyTable {
    alphabet: Alphabet,
    entries: Vec<f64>,
}

impl FrequencyTable {
    /// Normalizes non-negative weights to sum to 1.
    pub fn from_weights(alphabet: Alphabet, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != alphabet.len() {
            return Err(Error::InvalidModel(format!(
                "{} weights for {} letters",
                weights.len(),
                alphabet.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidModel("negative or non-finite weight".into()));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidModel("all weights are zero".into()));
        }
        let entries = weights.into_iter().map(|w| w / total).collect();
        Ok(Self { alphabet, entries })
    }

    /// Reads `LETTER<TAB>fraction` lines. The fractions are renormalized, so
    /// a table printed with rounded percentages loads as a distribution.
    pub fn parse(alphabet: Alphabet, text: &str) -> Result<Self> {
        let mut weights = vec![0.0; alphabet.len()];
        let mut seen = vec![false; alphabet.len()];
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split('\t');
            let (Some(letter), Some(value), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(Error::parse(i + 1, "expected LETTER<TAB>fraction"));
            };
            let mut chars = letter.trim().chars();
            let (Some(c), None) = (chars.next(), chars.next()) else {
                return Err(Error::parse(i + 1, format!("{letter:?} is not a single letter")));
            };
            let index = alphabet
                .index_of(c.to_ascii_uppercase())
                .ok_or_else(|| Error::parse(i + 1, format!("{c:?} is outside the alphabet")))?;
            if seen[index as usize] {
                return Err(Error::parse(i + 1, format!("duplicate letter {c:?}")));
            }
            seen[index as usize] = true;
            weights[index as usize] = value
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::parse(i + 1, format!("bad fraction {value:?}: {e}")))?;
        }
        Self::from_weights(alphabet, weights)
    }

    /// The Italian reference distribution (21 letters; J, K, W, X, Y are 0).
    pub fn italian() -> Self {
        Self::parse(Alphabet::latin(), ITALIAN).expect("bundled table is valid")
    }

    /// The Italian table exactly as printed, in percent and before
    /// normalization. The printed values add up to 99.95.
    pub fn italian_printed_percent() -> Vec<(char, f64)> {
        ITALIAN
            .lines()
            .filter_map(|l| {
                let (c, v) = l.split_once('\t')?;
                Some((c.chars().next()?, v.parse::<f64>().ok()? * 100.0))
            })
            .collect()
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, letter: char) -> f64 {
        self.alphabet
            .index_of(letter.to_ascii_uppercase())
            .map_or(0.0, |i| self.entries[i as usize])
    }

    /// Probability that two independent draws agree, `sum p_i^2`.
    pub fn coincidence_rate(&self) -> f64 {
        self.entries.iter().map(|p| p * p).sum()
    }

    /// Frequency values in descending order, letters forgotten.
    pub fn sorted_values(&self) -> Vec<f64> {
        let mut v = self.entries.clone();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    /// Letters with non-zero frequency, most frequent first.
    pub fn ranked_letters(&self) -> Vec<(char, f64)> {
        let mut v: Vec<(char, f64)> = self
            .alphabet
            .symbols()
            .iter()
            .zip(&self.entries)
            .filter(|(_, &p)| p > 0.0)
            .map(|(&c, &p)| (c, p))
            .collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        v
    }

    /// Writes the non-zero entries in the `LETTER<TAB>fraction` format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (c, p) in self.alphabet.symbols().iter().zip(&self.entries) {
            if *p > 0.0 {
                writeln!(out, "{c}\t{p}").unwrap();
            }
        }
        out
    }
}

/// Empirical frequencies of the Latin letters in `text`.
pub fn letter_frequencies(text: &str) -> Result<FrequencyTable> {
    let alphabet = Alphabet::latin();
    let text = normalize(text);
    if text.is_empty() {
        return Err(Error::EmptyMessage);
    }
    let mut counts = vec![0.0; alphabet.len()];
    for l in alphabet.encode(&text)? {
        counts[l as usize] += 1.0;
    }
    FrequencyTable::from_weights(alphabet, counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{mono_encipher, SubstitutionKey};
    use crate::perm::Permutation;
    use proptest::prelude::*;

    #[test]
    fn counts_aaab() {
        let t = letter_frequencies("AAAB").unwrap();
        assert_eq!(t.get('A'), 0.75);
        assert_eq!(t.get('B'), 0.25);
        assert_eq!(t.get('C'), 0.0);
        assert_eq!(letter_frequencies(" ,."), Err(Error::EmptyMessage));
    }

    #[test]
    fn italian_table_matches_print() {
        let printed = FrequencyTable::italian_printed_percent();
        assert_eq!(printed.len(), 21);
        let lookup = |c| printed.iter().find(|(l, _)| *l == c).unwrap().1;
        assert!((lookup('E') - 11.79).abs() < 1e-9);
        assert!((lookup('A') - 11.74).abs() < 1e-9);
        assert!((lookup('Z') - 0.49).abs() < 1e-9);
        let total: f64 = printed.iter().map(|(_, p)| p).sum();
        assert!((total - 99.95).abs() < 1e-9);

        let table = FrequencyTable::italian();
        let sum: f64 = table.entries().iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
        // renormalizing moves no entry by more than 0.01 percentage points
        for (c, p) in printed {
            assert!((table.get(c) * 100.0 - p).abs() < 0.01, "{c}");
        }
        assert_eq!(table.get('K'), 0.0);
        assert_eq!(table.ranked_letters()[0].0, 'E');
    }

    #[test]
    fn text_round_trip() {
        let t = FrequencyTable::italian();
        let back = FrequencyTable::parse(Alphabet::latin(), &t.to_text()).unwrap();
        for (a, b) in t.entries().iter().zip(back.entries()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn parse_reports_line_numbers() {
        let err = FrequencyTable::parse(Alphabet::latin(), "A\t0.5\nB 0.5\n").unwrap_err();
        assert_eq!(err, Error::parse(2, "expected LETTER<TAB>fraction"));
        let err = FrequencyTable::parse(Alphabet::latin(), "A\t0.5\nA\t0.5\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    proptest! {
        #[test]
        fn substitution_permutes_frequencies(
            t in "[A-Z]{1,200}",
            v in Just((0..26u8).collect::<Vec<_>>()).prop_shuffle(),
        ) {
            let key = SubstitutionKey::new(Alphabet::latin(), Permutation::new(v).unwrap()).unwrap();
            let before = letter_frequencies(&t).unwrap().sorted_values();
            let after = letter_frequencies(&mono_encipher(&t, &key).unwrap()).unwrap().sorted_values();
            prop_assert_eq!(before, after);
        }
    }
}
