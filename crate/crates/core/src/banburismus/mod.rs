//! Sliding two messages against each other and scoring the coincidences.
//!
//! Shift convention: at shift `s`, letter `i` of the first message sits over
//! letter `i - s` of the second. A positive shift slides the second message
//! to the right.

mod rules;

pub use rules::{BonusRule, LinearCappedBonus, MalusRule, NoBonus, NoMalus, RuleRegistry, TableBonus, TurnoverMalus};

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;

use crate::alphabet::Alphabet;
use crate::bayes::Weight;
use crate::error::{Error, Result};
use crate::keysheet::Intercept;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OverlapCount {
    pub shift: i32,
    /// Lengths of the maximal blocks of consecutive matches, in order.
    pub runs: Vec<usize>,
    /// Total matches, the sum of `runs`.
    pub matches: usize,
    /// Number of aligned letter pairs.
    pub overlap: usize,
}

impl OverlapCount {
    pub fn runs_text(&self) -> String {
        if self.runs.is_empty() {
            "-".to_string()
        } else {
            self.runs.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(",")
        }
    }
}

/// Aligned index range `(start in m1, start in m2, length)`.
fn alignment(len1: usize, len2: usize, shift: i32) -> (usize, usize, usize) {
    let (l1, l2, s) = (len1 as i64, len2 as i64, shift as i64);
    let lo = s.max(0);
    let hi = l1.min(l2 + s);
    let n = (hi - lo).max(0) as usize;
    (lo as usize, (lo - s).max(0) as usize, n)
}

pub fn count_matches(m1: &[u8], m2: &[u8], shift: i32) -> Result<OverlapCount> {
    if shift == 0 {
        return Err(Error::ZeroShift);
    }
    let (a, b, n) = alignment(m1.len(), m2.len(), shift);
    if n == 0 {
        return Err(Error::NoOverlap(shift));
    }
    let mut runs = Vec::new();
    let mut run = 0;
    for k in 0..n {
        if m1[a + k] == m2[b + k] {
            run += 1;
        } else if run > 0 {
            runs.push(run);
            run = 0;
        }
    }
    if run > 0 {
        runs.push(run);
    }
    Ok(OverlapCount {
        shift,
        matches: runs.iter().sum(),
        runs,
        overlap: n,
    })
}

#[derive(Clone, Debug)]
pub struct ScoreConfig {
    pub kappa_lang: f64,
    pub kappa_rand: f64,
    pub bonus: Arc<dyn BonusRule>,
    pub malus: Arc<dyn MalusRule>,
    /// Shifts with fewer aligned pairs are not scored.
    pub min_overlap: usize,
    pub max_shift: i32,
    pub alphabet_size: usize,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        Self {
            kappa_lang: 1.0 / 17.0,
            kappa_rand: 1.0 / 26.0,
            bonus: Arc::new(LinearCappedBonus::default()),
            malus: Arc::new(TurnoverMalus),
            min_overlap: 10,
            max_shift: 25,
            alphabet_size: 26,
        }
    }
}

impl ScoreConfig {
    /// The likelihood ratio alone.
    pub fn plain() -> Self {
        Self {
            bonus: Arc::new(NoBonus),
            malus: Arc::new(NoMalus),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa_lang > self.kappa_rand && self.kappa_rand > 0.0 && self.kappa_lang < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "need 1 > kappa_lang > kappa_rand > 0, got {} and {}",
                self.kappa_lang, self.kappa_rand
            )));
        }
        if self.max_shift < 1 {
            return Err(Error::InvalidConfig("max shift below 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShiftEvidence {
    pub count: OverlapCount,
    pub weight: Weight,
}

impl ShiftEvidence {
    pub fn factor(&self) -> f64 {
        self.weight.factor()
    }
}

/// Log-likelihood ratio of the matches under "in depth" against "random",
/// in decibans, without bonus or malus.
pub fn raw_weight(matches: usize, overlap: usize, cfg: &ScoreConfig) -> Weight {
    let hit = 10.0 * (cfg.kappa_lang / cfg.kappa_rand).log10();
    let miss = 10.0 * ((1.0 - cfg.kappa_lang) / (1.0 - cfg.kappa_rand)).log10();
    Weight(matches as f64 * hit + (overlap - matches) as f64 * miss)
}

pub fn weight_of_evidence(count: &OverlapCount, cfg: &ScoreConfig) -> Weight {
    let bonus: f64 = count.runs.iter().map(|&r| cfg.bonus.bonus(r)).sum();
    let malus = cfg.malus.malus(count.shift, cfg.alphabet_size);
    raw_weight(count.matches, count.overlap, cfg) + Weight(bonus - malus)
}

/// Every scorable shift, best first. Ties go to the smaller `|shift|`, then
/// to the positive one.
pub fn rank_shifts(m1: &[u8], m2: &[u8], cfg: &ScoreConfig) -> Vec<ShiftEvidence> {
    let mut out = Vec::new();
    for shift in -cfg.max_shift..=cfg.max_shift {
        if shift == 0 {
            continue;
        }
        let Ok(count) = count_matches(m1, m2, shift) else {
            continue;
        };
        if count.overlap < cfg.min_overlap {
            continue;
        }
        let weight = weight_of_evidence(&count, cfg);
        out.push(ShiftEvidence { count, weight });
    }
    out.sort_by(|a, b| {
        b.weight
            .0
            .total_cmp(&a.weight.0)
            .then(a.count.shift.abs().cmp(&b.count.shift.abs()))
            .then(b.count.shift.cmp(&a.count.shift))
    });
    out
}

fn indicator_letters(m: &Intercept) -> Vec<char> {
    m.indicator.chars().take(3).collect()
}

/// Unordered pairs whose indicators agree in the first two letters and
/// differ in the third, in index order.
pub fn pair_candidates(corpus: &[Intercept]) -> Vec<(usize, usize)> {
    let keys: Vec<Vec<char>> = corpus.iter().map(indicator_letters).collect();
    let mut out = Vec::new();
    for i in 0..corpus.len() {
        for j in i + 1..corpus.len() {
            let (a, b) = (&keys[i], &keys[j]);
            if a.len() == 3 && b.len() == 3 && a[..2] == b[..2] && a[2] != b[2] {
                out.push((i, j));
            }
        }
    }
    out
}

/// Ranked shifts for one candidate pair.
#[derive(Clone, Debug)]
pub struct PairEvidence {
    pub first: usize,
    pub second: usize,
    /// `ID1:IND1+ID2:IND2`.
    pub pair_id: String,
    pub ranked: Vec<ShiftEvidence>,
}

impl PairEvidence {
    pub fn best(&self) -> Option<&ShiftEvidence> {
        self.ranked.first()
    }
}

/// Scores every candidate pair on up to `jobs` threads (0 means all cores).
/// Output order follows [`pair_candidates`] regardless of scheduling.
pub fn score_corpus(corpus: &[Intercept], cfg: &ScoreConfig, jobs: usize) -> Result<Vec<PairEvidence>> {
    cfg.validate()?;
    let pairs = pair_candidates(corpus);
    let score = |&(i, j): &(usize, usize)| PairEvidence {
        first: i,
        second: j,
        pair_id: format!("{}+{}", corpus[i].label(), corpus[j].label()),
        ranked: rank_shifts(corpus[i].body.as_bytes(), corpus[j].body.as_bytes(), cfg),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    Ok(pool.install(|| pairs.par_iter().map(score).collect()))
}

pub const EVIDENCE_HEADER: &str = "pair_id\tshift\truns\tM\tN\tweight_db";

/// One row per scored shift, pairs in order, shifts best first.
pub fn evidence_tsv(evidence: &[PairEvidence]) -> String {
    let mut out = String::new();
    writeln!(out, "{EVIDENCE_HEADER}").unwrap();
    for p in evidence {
        for e in &p.ranked {
            let c = &e.count;
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{:.4}",
                p.pair_id,
                c.shift,
                c.runs_text(),
                c.matches,
                c.overlap,
                e.weight.0
            )
            .unwrap();
        }
    }
    out
}

/// One evidence row read back from TSV.
#[derive(Clone, Debug, PartialEq)]
pub struct EvidenceRow {
    pub pair_id: String,
    pub shift: i32,
    pub runs: Vec<usize>,
    pub matches: usize,
    pub overlap: usize,
    pub weight: Weight,
}

pub fn parse_evidence_tsv(text: &str) -> Result<Vec<EvidenceRow>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') || (i == 0 && line.starts_with("pair_id")) {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 6 {
            return Err(Error::parse(i + 1, format!("expected 6 columns, got {}", f.len())));
        }
        let num = |s: &str, what: &str| -> Result<i64> {
            s.trim()
                .parse::<i64>()
                .map_err(|_| Error::parse(i + 1, format!("bad {what} {s:?}")))
        };
        let runs = if f[2].trim() == "-" {
            Vec::new()
        } else {
            f[2].split(',')
                .map(|r| num(r, "run").and_then(|v| usize::try_from(v).map_err(|_| Error::parse(i + 1, "negative run"))))
                .collect::<Result<Vec<_>>>()?
        };
        let weight = f[5]
            .trim()
            .parse::<f64>()
            .map_err(|_| Error::parse(i + 1, format!("bad weight {:?}", f[5])))?;
        let shift = num(f[1], "shift")? as i32;
        if shift == 0 {
            return Err(Error::parse(i + 1, "zero shift"));
        }
        out.push(EvidenceRow {
            pair_id: f[0].to_string(),
            shift,
            runs,
            matches: num(f[3], "M")? as usize,
            overlap: num(f[4], "N")? as usize,
            weight: Weight(weight),
        });
    }
    Ok(out)
}

/// The punched sheet: one row per letter, one column per message position,
/// `O` where the message has that letter.
pub fn render_banbury_sheet(body: &str, alphabet: &Alphabet) -> String {
    let mut out = String::new();
    for &c in alphabet.symbols() {
        out.push(c);
        out.push('|');
        out.extend(body.chars().map(|b| if b == c { 'O' } else { '.' }));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(m1: &[u8], m2: &[u8], shift: i32) -> (usize, usize) {
        let mut m = 0;
        let mut n = 0;
        for i in 0..m1.len() as i32 {
            let j = i - shift;
            if j >= 0 && (j as usize) < m2.len() {
                n += 1;
                if m1[i as usize] == m2[j as usize] {
                    m += 1;
                }
            }
        }
        (m, n)
    }

    #[test]
    fn shift_errors() {
        assert_eq!(count_matches(b"ABC", b"ABC", 0), Err(Error::ZeroShift));
        assert_eq!(count_matches(b"ABC", b"ABC", 3), Err(Error::NoOverlap(3)));
        assert_eq!(count_matches(b"ABC", b"ABC", -3), Err(Error::NoOverlap(-3)));
        let c = count_matches(b"ABC", b"XAB", -1).unwrap();
        assert_eq!((c.matches, c.overlap, c.runs), (2, 2, vec![2]));
        let c = count_matches(b"ABC", b"XAB", 1).unwrap();
        assert_eq!((c.matches, c.overlap, c.runs), (0, 2, vec![]));
        let c = count_matches(b"ABC", b"BCX", 1).unwrap();
        assert_eq!((c.matches, c.overlap, c.runs), (2, 2, vec![2]));
    }

    #[test]
    fn weight_values() {
        let cfg = ScoreConfig::plain();
        let w = raw_weight(9, 56, &cfg);
        assert!((w.factor() - 16.74).abs() < 0.01);
        assert!((w.db() - 12.24).abs() < 0.01);
        assert!((raw_weight(1, 1, &cfg).db() - 1.8447).abs() < 1e-3);
        assert_eq!(raw_weight(0, 0, &cfg).db(), 0.0);
    }

    #[test]
    fn identical_messages_rank_their_overlap_first() {
        let m = b"QWERTZUIOPASDFGHJKLYXCVBNMQWERTZUIOP";
        let mut shifted = b"XYZ".to_vec();
        shifted.extend_from_slice(m);
        // m[i] = shifted[i + 3], so the depth sits at shift -3
        let r = rank_shifts(m, &shifted, &ScoreConfig::default());
        assert_eq!(r[0].count.shift, -3);
        assert_eq!(r[0].count.matches, r[0].count.overlap);
    }

    #[test]
    fn pairs_by_indicator() {
        let mk = |id: &str, ind: &str| Intercept {
            id: id.into(),
            indicator: ind.into(),
            body: "TZUYJZSLAPEIXM".into(),
            timestamp: None,
        };
        let corpus = vec![mk("1", "PMG"), mk("2", "PMQ"), mk("3", "ABC")];
        assert_eq!(pair_candidates(&corpus), vec![(0, 1)]);
        assert!(pair_candidates(&[]).is_empty());
        assert!(pair_candidates(&[mk("1", "ABC"), mk("2", "ABC"), mk("3", "XBC")]).is_empty());
        let ev = score_corpus(&corpus, &ScoreConfig::default(), 2).unwrap();
        assert_eq!(ev[0].pair_id, "1:PMG+2:PMQ");
    }

    #[test]
    fn tsv_round_trip() {
        let ev = PairEvidence {
            first: 0,
            second: 1,
            pair_id: "1:VFG+2:VFX".into(),
            ranked: vec![ShiftEvidence {
                count: count_matches(b"AABBAAB", b"AABBABB", 1).unwrap(),
                weight: Weight(1.25),
            }],
        };
        let text = evidence_tsv(std::slice::from_ref(&ev));
        let rows = parse_evidence_tsv(&text).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].shift, 1);
        assert_eq!(rows[0].runs, ev.ranked[0].count.runs);
        assert!(matches!(parse_evidence_tsv("a\t1\t-\t0\t5\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn sheet_shape() {
        let a = Alphabet::latin();
        let holes = |s: &str| s.lines().map(|l| l[2..].matches('O').count()).sum::<usize>();
        let s = render_banbury_sheet("Q", &a);
        assert_eq!(holes(&s), 1);
        let s = render_banbury_sheet("HELLO", &a);
        assert_eq!(s.lines().count(), 26);
        assert!(s.lines().all(|l| l.len() == 2 + 5));
        assert_eq!(holes(&s), 5);
        assert!(s.lines().nth(11).unwrap().starts_with("L|..OO."));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn runs_agree_with_positionwise_scan(
            m1 in prop::collection::vec(0u8..4, 1..60),
            m2 in prop::collection::vec(0u8..4, 1..60),
            s in -60i32..60,
        ) {
            prop_assume!(s != 0);
            let (m, n) = brute(&m1, &m2, s);
            match count_matches(&m1, &m2, s) {
                Ok(c) => {
                    prop_assert_eq!(c.matches, m);
                    prop_assert_eq!(c.overlap, n);
                    prop_assert_eq!(c.runs.iter().sum::<usize>(), c.matches);
                    prop_assert!(c.runs.iter().all(|&r| r >= 1));
                    prop_assert!(c.matches <= c.overlap);
                }
                Err(e) => {
                    prop_assert_eq!(n, 0);
                    prop_assert_eq!(e, Error::NoOverlap(s));
                }
            }
        }

        #[test]
        fn mirror_symmetry(
            m1 in prop::collection::vec(0u8..4, 1..60),
            m2 in prop::collection::vec(0u8..4, 1..60),
            s in -60i32..60,
        ) {
            prop_assume!(s != 0);
            let a = count_matches(&m1, &m2, s).map(|c| (c.runs, c.matches, c.overlap));
            let b = count_matches(&m2, &m1, -s).map(|c| (c.runs, c.matches, c.overlap));
            match (a, b) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "one side overlaps, the other does not"),
            }
        }

        #[test]
        fn weight_increases_with_matches((n, m) in (1usize..200).prop_flat_map(|n| (Just(n), 0..n)), s in 1i32..26) {
            let cfg = ScoreConfig::default();
            prop_assert!(raw_weight(m + 1, n, &cfg).db() > raw_weight(m, n, &cfg).db());
            // an extra isolated match adds no bonus but raises the weight
            let base = OverlapCount { shift: s, runs: vec![1; m], matches: m, overlap: n };
            let more = OverlapCount { shift: s, runs: vec![1; m + 1], matches: m + 1, overlap: n };
            prop_assert!(weight_of_evidence(&more, &cfg).db() > weight_of_evidence(&base, &cfg).db());
        }
    }
}
