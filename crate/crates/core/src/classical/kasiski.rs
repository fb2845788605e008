use std::collections::BTreeMap;

use crate::alphabet::normalize;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KeyLengthCandidate {
    pub length: usize,
    pub votes: usize,
}

/// Key-length candidates from repeated n-grams.
///
/// A repeat is a pair of positions `i < j` whose text agrees on at least
/// `min_ngram` letters and cannot be extended to the left, so a repeated
/// 5-gram counts once rather than as three trigrams. Each repeat votes once
/// for every divisor `> 1` of `j - i`. Most votes first, then shorter length.
pub fn kasiski_candidates(ciphertext: &str, min_ngram: usize) -> Result<Vec<KeyLengthCandidate>> {
    if min_ngram < 3 {
        return Err(Error::InvalidConfig(format!("n-gram length {min_ngram} below 3")));
    }
    let text = normalize(ciphertext).into_bytes();
    let len = text.len();
    let mut votes: BTreeMap<usize, usize> = BTreeMap::new();
    for distance in 1..len {
        let mut run = 0;
        // `run` is the length of agreement ending at i + distance.
        for i in 0..len - distance {
            if text[i] == text[i + distance] {
                run += 1;
            } else {
                run = 0;
            }
            let starts_here = run == min_ngram;
            if starts_here {
                for d in divisors_above_one(distance) {
                    *votes.entry(d).or_default() += 1;
                }
            }
        }
    }
    let mut out: Vec<KeyLengthCandidate> = votes
        .into_iter()
        .map(|(length, votes)| KeyLengthCandidate { length, votes })
        .collect();
    out.sort_by(|a, b| b.votes.cmp(&a.votes).then(a.length.cmp(&b.length)));
    Ok(out)
}

fn divisors_above_one(n: usize) -> impl Iterator<Item = usize> {
    (2..=n).filter(move |d| n.is_multiple_of(*d))
}
