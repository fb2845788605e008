//! Banburismus output turned into deductions between third indicator letters.

use std::collections::BTreeMap;

use super::Deduction;
use crate::alphabet::{Alphabet, Letter};
use crate::banburismus::{EvidenceRow, MalusRule, PairEvidence};
use crate::bayes::Weight;
use crate::error::{Error, Result};
use crate::keysheet::Intercept;

/// One scored shift of one message pair, reduced to the pair's third
/// indicator letters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShiftObservation {
    pub first: Letter,
    pub second: Letter,
    pub shift: i32,
    pub weight: Weight,
}

fn log_sum(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + 10.0 * v.iter().map(|x| 10f64.powf((x - m) / 10.0)).sum::<f64>().log10()
}

/// One deduction per letter pair: the best of the `2(n-1)` alignments
/// (relation and direction), weighted by its log-odds against all others.
///
/// A shift's weight carries the malus as a prior. Summing weights over
/// several message pairs would apply that prior once per pair, so it is
/// added back per observation and charged once per letter pair.
pub fn aggregate_deductions(observations: &[ShiftObservation], malus: &dyn MalusRule, n: usize) -> Vec<Deduction> {
    let hyps = 2 * (n - 1);
    // key (x, y) with x < y; slot i < n-1 means arc from x, offset i+1
    let mut acc: BTreeMap<(Letter, Letter), Vec<f64>> = BTreeMap::new();
    for o in observations {
        if o.first == o.second || o.shift == 0 || o.shift.unsigned_abs() as usize >= n {
            continue;
        }
        let (a, b, off) = if o.shift > 0 {
            (o.second, o.first, o.shift as usize)
        } else {
            (o.first, o.second, (-o.shift) as usize)
        };
        let key = (a.min(b), a.max(b));
        let slot = if b == key.0 { off - 1 } else { n - 1 + off - 1 };
        let v = acc.entry(key).or_insert_with(|| vec![0.0; hyps]);
        v[slot] += o.weight.0 + malus.malus(off as i32, n);
    }
    let mut out = Vec::new();
    for ((x, y), mut v) in acc {
        for (slot, w) in v.iter_mut().enumerate() {
            let off = slot % (n - 1) + 1;
            *w -= malus.malus(off as i32, n);
        }
        let best = (0..hyps)
            .max_by(|&i, &j| v[i].total_cmp(&v[j]).then(j.cmp(&i)))
            .expect("at least one hypothesis");
        let rest = log_sum((0..hyps).filter(|&i| i != best).map(|i| v[i]));
        let off = (best % (n - 1) + 1) as u8;
        let (a, b) = if best < n - 1 { (y, x) } else { (x, y) };
        out.push(Deduction {
            letter_a: a,
            letter_b: b,
            offset: off,
            weight: Weight(v[best] - rest),
        });
    }
    out
}

fn third_letter(alphabet: &Alphabet, indicator: &str) -> Result<Letter> {
    let c = indicator
        .chars()
        .nth(2)
        .ok_or_else(|| Error::InvalidConfig(format!("indicator {indicator:?} is shorter than 3 letters")))?;
    alphabet
        .index_of(c)
        .ok_or(Error::LetterOutsideAlphabet { letter: c, position: 2 })
}

pub fn deductions_from_evidence(
    corpus: &[Intercept],
    evidence: &[PairEvidence],
    malus: &dyn MalusRule,
    alphabet: &Alphabet,
) -> Result<Vec<Deduction>> {
    let mut obs = Vec::new();
    for p in evidence {
        let first = third_letter(alphabet, &corpus[p.first].indicator)?;
        let second = third_letter(alphabet, &corpus[p.second].indicator)?;
        obs.extend(p.ranked.iter().map(|e| ShiftObservation {
            first,
            second,
            shift: e.count.shift,
            weight: e.weight,
        }));
    }
    Ok(aggregate_deductions(&obs, malus, alphabet.len()))
}

/// Same as [`deductions_from_evidence`], with the indicators read from each
/// row's `ID1:IND1+ID2:IND2` pair id.
pub fn deductions_from_rows(rows: &[EvidenceRow], malus: &dyn MalusRule, alphabet: &Alphabet) -> Result<Vec<Deduction>> {
    let mut obs = Vec::with_capacity(rows.len());
    for r in rows {
        let bad = || Error::InvalidConfig(format!("bad pair id {:?}", r.pair_id));
        let (m1, m2) = r.pair_id.split_once('+').ok_or_else(bad)?;
        let ind = |m: &str| m.rsplit_once(':').map(|(_, i)| i.to_string()).ok_or_else(bad);
        obs.push(ShiftObservation {
            first: third_letter(alphabet, &ind(m1)?)?,
            second: third_letter(alphabet, &ind(m2)?)?,
            shift: r.shift,
            weight: r.weight,
        });
    }
    Ok(aggregate_deductions(&obs, malus, alphabet.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::banburismus::{NoMalus, TurnoverMalus};

    fn obs(first: Letter, second: Letter, shift: i32, w: f64) -> ShiftObservation {
        ShiftObservation {
            first,
            second,
            shift,
            weight: Weight(w),
        }
    }

    #[test]
    fn orientation_follows_the_shift() {
        // positive shift: second = first + s
        let d = aggregate_deductions(&[obs(1, 2, 4, 20.0)], &NoMalus, 26);
        assert_eq!((d[0].letter_a, d[0].letter_b, d[0].offset), (2, 1, 4));
        let d = aggregate_deductions(&[obs(1, 2, -4, 20.0)], &NoMalus, 26);
        assert_eq!((d[0].letter_a, d[0].letter_b, d[0].offset), (1, 2, 4));
        // the same pair seen with the messages swapped
        let d = aggregate_deductions(&[obs(2, 1, -4, 20.0)], &NoMalus, 26);
        assert_eq!((d[0].letter_a, d[0].letter_b, d[0].offset), (2, 1, 4));
    }

    #[test]
    fn weight_is_log_odds_against_the_rest() {
        // one hypothesis at 20 db, the other 49 at 0 db
        let d = aggregate_deductions(&[obs(0, 1, 3, 20.0)], &NoMalus, 26);
        let expect = 20.0 - 10.0 * 49f64.log10();
        assert!((d[0].weight.0 - expect).abs() < 1e-9);
    }

    #[test]
    fn evidence_adds_across_pairs_with_one_prior() {
        let m = TurnoverMalus;
        let w = |s: i32| 5.0 - m.malus(s, 26);
        let once = aggregate_deductions(&[obs(0, 1, 6, w(6))], &m, 26);
        let twice = aggregate_deductions(&[obs(0, 1, 6, w(6)), obs(0, 1, 6, w(6))], &m, 26);
        // the second observation adds exactly its likelihood, 5 db, to the
        // winner's log-likelihood; the others keep only their prior
        let prior: Vec<f64> = (1..26).map(|o| -m.malus(o, 26)).collect();
        let rest = |best: f64| {
            let mut all: Vec<f64> = prior.iter().chain(prior.iter()).copied().collect();
            let slot = 5;
            all.remove(slot);
            best - log_sum(all.into_iter())
        };
        assert!((once[0].weight.0 - rest(w(6))).abs() < 1e-9);
        assert!((twice[0].weight.0 - rest(10.0 - m.malus(6, 26))).abs() < 1e-9);
    }

    #[test]
    fn rows_round_trip() {
        let a = Alphabet::latin();
        let rows = [EvidenceRow {
            pair_id: "001:ABC+002:ABE".into(),
            shift: 2,
            runs: vec![1],
            matches: 1,
            overlap: 50,
            weight: Weight(30.0),
        }];
        let d = deductions_from_rows(&rows, &NoMalus, &a).unwrap();
        assert_eq!(d[0].render(&a), "E=C+2");
        let bad = [EvidenceRow {
            pair_id: "nonsense".into(),
            ..rows[0].clone()
        }];
        assert!(deductions_from_rows(&bad, &NoMalus, &a).is_err());
    }
}
