//! Letter chains from shift deductions, their placement into a partial
//! end-wheel alphabet, and the turnover test that shortlists rotors.
//!
//! A chain letter `c` at absolute column `k` records that the alphabet pairs
//! `c` with the column letter `k`. For indicator letters that column is the
//! deciphered third key letter.

mod aggregate;
mod filter;

pub use aggregate::{aggregate_deductions, deductions_from_evidence, deductions_from_rows, ShiftObservation};
pub use filter::{boundary_inside, compatible_rotors, ChainSpan, DepthArcs, FilterRegistry, RotorFilter};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;

use crate::alphabet::{Alphabet, Letter};
use crate::bayes::Weight;
use crate::enigma::RotorSpec;
use crate::error::{Error, Result};

/// `letter_a = letter_b + offset` on the circle of key letters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Deduction {
    pub letter_a: Letter,
    pub letter_b: Letter,
    pub offset: u8,
    pub weight: Weight,
}

impl Deduction {
    pub fn new(letter_a: Letter, letter_b: Letter, offset: u8, weight: Weight, n: usize) -> Result<Self> {
        if offset == 0 || offset as usize >= n {
            return Err(Error::InvalidConfig(format!("offset {offset} outside 1..{}", n - 1)));
        }
        if letter_a == letter_b || letter_a as usize >= n || letter_b as usize >= n {
            return Err(Error::InvalidConfig(format!("bad letter pair {letter_a},{letter_b}")));
        }
        Ok(Self {
            letter_a,
            letter_b,
            offset,
            weight,
        })
    }

    /// `x = y + shift` with a signed shift. A negative shift is stored the
    /// other way round, `y = x + |shift|`.
    pub fn signed(x: Letter, y: Letter, shift: i32, weight: Weight, n: usize) -> Result<Self> {
        if shift == 0 || shift.unsigned_abs() as usize >= n {
            return Err(Error::InvalidConfig(format!("shift {shift} outside ±{}", n - 1)));
        }
        if shift > 0 {
            Self::new(x, y, shift as u8, weight, n)
        } else {
            Self::new(y, x, (-shift) as u8, weight, n)
        }
    }

    /// Parses `G=K+4` or `B=N-24`.
    pub fn parse(alphabet: &Alphabet, text: &str, weight: Weight) -> Result<Self> {
        let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::InvalidConfig(format!("bad deduction {text:?}"));
        let (lhs, rhs) = t.split_once('=').ok_or_else(bad)?;
        let mut lc = lhs.chars();
        let x = lc.next().and_then(|c| alphabet.index_of(c)).ok_or_else(bad)?;
        if lc.next().is_some() {
            return Err(bad());
        }
        let mut rc = rhs.chars();
        let y = rc.next().and_then(|c| alphabet.index_of(c)).ok_or_else(bad)?;
        let shift: i32 = rc.as_str().parse().map_err(|_| bad())?;
        Self::signed(x, y, shift, weight, alphabet.len())
    }

    pub fn render(&self, alphabet: &Alphabet) -> String {
        format!(
            "{}={}+{}",
            alphabet.symbol(self.letter_a),
            alphabet.symbol(self.letter_b),
            self.offset
        )
    }
}

fn by_weight(a: &Deduction, b: &Deduction) -> std::cmp::Ordering {
    b.weight
        .0
        .total_cmp(&a.weight.0)
        .then((a.letter_a, a.letter_b, a.offset).cmp(&(b.letter_a, b.letter_b, b.offset)))
}

/// Letters at relative positions, first at position 0.
#[derive(Clone, Debug, PartialEq)]
pub struct Chain {
    elements: Vec<(Letter, u8)>,
    deductions: Vec<Deduction>,
    n: usize,
}

impl Chain {
    /// Builds a chain from arbitrary positions mod `n`, rotated to start just
    /// after the largest circular gap.
    fn from_positions(positions: &BTreeMap<Letter, u8>, deductions: Vec<Deduction>, n: usize) -> Self {
        let mut by_pos: Vec<(u8, Letter)> = positions.iter().map(|(&l, &p)| (p, l)).collect();
        by_pos.sort_unstable();
        let k = by_pos.len();
        let mut best: Option<(u8, Letter, usize)> = None;
        for i in 0..k {
            let prev = by_pos[(i + k - 1) % k].0 as usize;
            let here = by_pos[i].0 as usize;
            let gap = (here + n - prev - 1) % n + 1;
            let gap = if k == 1 { n } else { gap } as u8;
            let cand = (gap, by_pos[i].1, i);
            // largest gap, then smallest starting letter
            if best.is_none_or(|(g, l, _)| gap > g || (gap == g && cand.1 < l)) {
                best = Some(cand);
            }
        }
        let start = best.map_or(0, |b| b.2);
        let origin = by_pos[start].0 as usize;
        let mut elements: Vec<(Letter, u8)> = by_pos
            .iter()
            .map(|&(p, l)| (l, ((p as usize + n - origin) % n) as u8))
            .collect();
        elements.sort_by_key(|&(_, p)| p);
        let mut deductions = deductions;
        deductions.sort_by(by_weight);
        Self { elements, deductions, n }
    }

    /// Chain given directly as `(letter, position)` pairs.
    pub fn from_elements(elements: &[(Letter, u8)], n: usize) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut used = BTreeSet::new();
        for &(l, p) in elements {
            if l as usize >= n || p as usize >= n || map.insert(l, p).is_some() || !used.insert(p) {
                return Err(Error::InvalidConfig(format!("bad chain element ({l}, {p})")));
            }
        }
        if map.is_empty() {
            return Err(Error::InvalidConfig("empty chain".into()));
        }
        Ok(Self::from_positions(&map, Vec::new(), n))
    }

    pub fn elements(&self) -> &[(Letter, u8)] {
        &self.elements
    }

    /// The deductions that built this chain, strongest first.
    pub fn deductions(&self) -> &[Deduction] {
        &self.deductions
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn span(&self) -> u8 {
        self.elements.last().map_or(0, |e| e.1)
    }

    /// Occupies every column, so it closes on itself.
    pub fn is_closed(&self) -> bool {
        self.elements.len() == self.n
    }

    pub fn weight(&self) -> f64 {
        self.deductions.iter().map(|d| d.weight.0).sum()
    }

    pub fn position_of(&self, letter: Letter) -> Option<u8> {
        self.elements.iter().find(|e| e.0 == letter).map(|e| e.1)
    }

    /// `V - - - - K - - - G`.
    pub fn render(&self, alphabet: &Alphabet) -> String {
        let mut cells = vec!['-'; self.span() as usize + 1];
        for &(l, p) in &self.elements {
            cells[p as usize] = alphabet.symbol(l);
        }
        cells.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
    }
}

#[derive(Clone, Debug, Default)]
pub struct ChainSet {
    pub chains: Vec<Chain>,
    /// Deductions at or above the threshold that contradicted stronger ones.
    pub dropped: Vec<Deduction>,
}

/// Greedy weighted union-find: deductions are merged strongest first. A
/// deduction is dropped when it contradicts the offsets already in its
/// component, puts two letters on one position, or leaves the component
/// with no placement that respects symmetry and non-identity.
pub fn build_chains(deductions: &[Deduction], min_weight: Weight, n: usize) -> ChainSet {
    let mut sorted: Vec<Deduction> = deductions.iter().copied().filter(|d| d.weight.0 >= min_weight.0).collect();
    sorted.sort_by(by_weight);

    let mut comp_of: Vec<Option<usize>> = vec![None; n];
    let mut comps: Vec<(BTreeMap<Letter, u8>, Vec<Deduction>)> = Vec::new();
    let mut dropped = Vec::new();
    let modn = |x: i32| x.rem_euclid(n as i32) as u8;

    for d in sorted {
        let (a, b, o) = (d.letter_a, d.letter_b, d.offset as i32);
        let (ca, cb) = (comp_of[a as usize], comp_of[b as usize]);
        // the component after adding d, or None on contradiction
        let merged: Option<BTreeMap<Letter, u8>> = match (ca, cb) {
            (None, None) => Some([(b, 0), (a, o as u8)].into_iter().collect()),
            (Some(c), None) => insert_at(&comps[c].0, b, modn(comps[c].0[&a] as i32 - o)),
            (None, Some(c)) => insert_at(&comps[c].0, a, modn(comps[c].0[&b] as i32 + o)),
            (Some(c), Some(c2)) if c == c2 => {
                let m = &comps[c].0;
                (modn(m[&b] as i32 + o) == m[&a]).then(|| m.clone())
            }
            (Some(c), Some(c2)) => {
                let t = comps[c].0[&a] as i32 - o - comps[c2].0[&b] as i32;
                let mut m = comps[c].0.clone();
                let mut clash = false;
                for (&l, &p) in &comps[c2].0 {
                    let q = modn(p as i32 + t);
                    clash |= m.values().any(|&v| v == q);
                    m.insert(l, q);
                }
                (!clash).then_some(m)
            }
        };
        let Some(m) = merged.filter(|m| placeable(m, n)) else {
            dropped.push(d);
            continue;
        };
        let target = match (ca, cb) {
            (Some(c), _) | (None, Some(c)) => c,
            (None, None) => {
                comps.push((BTreeMap::new(), Vec::new()));
                comps.len() - 1
            }
        };
        if let (Some(c), Some(c2)) = (ca, cb) {
            if c != c2 {
                let moved = std::mem::take(&mut comps[c2].1);
                comps[c2].0.clear();
                comps[target].1.extend(moved);
            }
        }
        for &l in m.keys() {
            comp_of[l as usize] = Some(target);
        }
        comps[target].0 = m;
        comps[target].1.push(d);
    }

    let mut chains: Vec<Chain> = comps
        .into_iter()
        .filter(|(m, _)| !m.is_empty())
        .map(|(m, ded)| Chain::from_positions(&m, ded, n))
        .collect();
    sort_chains(&mut chains);
    ChainSet { chains, dropped }
}

fn insert_at(m: &BTreeMap<Letter, u8>, letter: Letter, pos: u8) -> Option<BTreeMap<Letter, u8>> {
    if m.values().any(|&v| v == pos) {
        return None;
    }
    let mut m = m.clone();
    m.insert(letter, pos);
    Some(m)
}

/// Some offset places every letter without a fixed point or a letter with
/// two partners.
fn placeable(m: &BTreeMap<Letter, u8>, n: usize) -> bool {
    (0..n).any(|off| {
        let mut h = AlphabetHypothesis::empty(n);
        m.iter().all(|(&c, &p)| h.insert(((off + p as usize) % n) as Letter, c))
    })
}

fn sort_chains(chains: &mut [Chain]) {
    chains.sort_by(|x, y| y.weight().total_cmp(&x.weight()).then_with(|| x.elements.cmp(&y.elements)));
}

/// A partial alphabet: each column letter paired with at most one other.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AlphabetHypothesis {
    map: Vec<Option<Letter>>,
}

impl AlphabetHypothesis {
    /// No pairs recorded.
    pub fn empty(n: usize) -> Self {
        Self { map: vec![None; n] }
    }

    /// Reads a row such as `- G F M - C B ...` or `RGFMJC...`; `-` or `.`
    /// marks an open column.
    pub fn parse(alphabet: &Alphabet, row: &str) -> Result<Self> {
        let cells: Vec<char> = row.chars().filter(|c| !c.is_whitespace()).collect();
        let n = alphabet.len();
        if cells.len() != n {
            return Err(Error::InvalidConfig(format!("alphabet row has {} cells, expected {n}", cells.len())));
        }
        let mut h = Self::empty(n);
        for (col, &c) in cells.iter().enumerate() {
            if c == '-' || c == '.' {
                continue;
            }
            let l = alphabet
                .index_of(c)
                .ok_or(Error::LetterOutsideAlphabet { letter: c, position: col })?;
            if !h.insert(col as Letter, l) {
                return Err(Error::InvalidConfig(format!("column {col} breaks symmetry or non-identity")));
            }
        }
        Ok(h)
    }

    pub fn n(&self) -> usize {
        self.map.len()
    }

    pub fn get(&self, letter: Letter) -> Option<Letter> {
        self.map.get(letter as usize).copied().flatten()
    }

    /// Records `x <-> y`. Returns false, leaving `self` untouched, when that
    /// would pair a letter with itself or give a letter two partners.
    pub fn insert(&mut self, x: Letter, y: Letter) -> bool {
        if x == y {
            return false;
        }
        let (xi, yi) = (x as usize, y as usize);
        match (self.map[xi], self.map[yi]) {
            (Some(p), _) if p != y => false,
            (_, Some(q)) if q != x => false,
            _ => {
                self.map[xi] = Some(y);
                self.map[yi] = Some(x);
                true
            }
        }
    }

    /// Unordered pairs `(x, y)` with `x < y`.
    pub fn pairs(&self) -> Vec<(Letter, Letter)> {
        (0..self.n() as Letter)
            .filter_map(|x| self.get(x).filter(|&y| x < y).map(|y| (x, y)))
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.map.iter().all(Option::is_some)
    }

    /// Symmetric, without fixed points, at most `n / 2` pairs.
    pub fn is_valid(&self) -> bool {
        let n = self.n();
        self.map.iter().enumerate().all(|(x, y)| match *y {
            None => true,
            Some(y) => (y as usize) < n && y as usize != x && self.map[y as usize] == Some(x as Letter),
        }) && self.pairs().len() <= n / 2
    }

    /// Contains every pair of `other`.
    pub fn extends(&self, other: &AlphabetHypothesis) -> bool {
        other.map.iter().zip(&self.map).all(|(o, s)| o.is_none() || o == s)
    }

    pub fn render(&self, alphabet: &Alphabet) -> String {
        self.map
            .iter()
            .map(|c| c.map_or('-', |l| alphabet.symbol(l)))
            .collect()
    }
}

/// Every offset at which `chain` fits into `hypothesis`, with the extended
/// hypothesis. Offset `k` puts the chain's position 0 under column `k`.
pub fn placements(chain: &Chain, hypothesis: &AlphabetHypothesis) -> Vec<(u8, AlphabetHypothesis)> {
    let n = hypothesis.n();
    let mut out = Vec::new();
    'offsets: for off in 0..n {
        let mut h = hypothesis.clone();
        for &(c, p) in chain.elements() {
            let col = ((off + p as usize) % n) as Letter;
            if !h.insert(col, c) {
                continue 'offsets;
            }
        }
        out.push((off as u8, h));
    }
    out
}

/// One consistent placement of every chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub hypothesis: AlphabetHypothesis,
    /// Offset of each chain, aligned with [`Enumeration::chains`].
    pub offsets: Vec<u8>,
}

#[derive(Clone, Debug)]
pub struct Enumeration {
    /// The chains in the order they were placed.
    pub chains: Vec<Chain>,
    /// Sorted by alphabet.
    pub solutions: Vec<Solution>,
    /// The solution limit was hit before the search finished.
    pub truncated: bool,
}

/// Depth-first placement of the chains, strongest first, keeping every
/// hypothesis that accommodates all of them (up to `limit`).
pub fn enumerate_alphabets(chains: &[Chain], seed: &AlphabetHypothesis, limit: usize) -> Enumeration {
    let mut chains = chains.to_vec();
    sort_chains(&mut chains);
    let mut solutions = Vec::new();
    let mut offsets = Vec::with_capacity(chains.len());
    let truncated = !dfs(&chains, seed, &mut offsets, &mut solutions, limit);
    solutions.sort_by(|a: &Solution, b| a.hypothesis.cmp(&b.hypothesis));
    for s in &solutions {
        assert!(s.hypothesis.is_valid(), "invalid hypothesis escaped the search");
    }
    Enumeration {
        chains,
        solutions,
        truncated,
    }
}

/// Returns false once the limit is reached.
fn dfs(chains: &[Chain], h: &AlphabetHypothesis, offsets: &mut Vec<u8>, out: &mut Vec<Solution>, limit: usize) -> bool {
    let depth = offsets.len();
    if depth == chains.len() {
        if out.len() >= limit {
            return false;
        }
        out.push(Solution {
            hypothesis: h.clone(),
            offsets: offsets.clone(),
        });
        return true;
    }
    for (off, next) in placements(&chains[depth], h) {
        offsets.push(off);
        let go_on = dfs(chains, &next, offsets, out, limit);
        offsets.pop();
        if !go_on {
            return false;
        }
    }
    true
}

#[derive(Clone, Debug)]
pub struct ScritchConfig {
    pub min_weight: Weight,
    /// Rounds of dropping the weakest deduction after an empty result.
    pub max_retries: usize,
    pub limit: usize,
    pub filter: Arc<dyn RotorFilter>,
}

impl Default for ScritchConfig {
    fn default() -> Self {
        Self {
            min_weight: Weight(7.0),
            max_retries: 5,
            limit: 10_000,
            filter: Arc::new(DepthArcs),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScritchReport {
    pub chain_set: ChainSet,
    pub enumeration: Enumeration,
    pub shortlist: Vec<String>,
    /// Deductions discarded by the retry policy, in the order dropped.
    pub retracted: Vec<Deduction>,
}

/// Chains, alphabets and rotor shortlist, retrying without the weakest
/// deduction while no alphabet or no rotor survives.
pub fn deduce(deductions: &[Deduction], rotors: &[Arc<RotorSpec>], n: usize, cfg: &ScritchConfig) -> ScritchReport {
    let mut live: Vec<Deduction> = deductions.iter().copied().filter(|d| d.weight.0 >= cfg.min_weight.0).collect();
    live.sort_by(by_weight);
    let mut retracted = Vec::new();
    loop {
        let chain_set = build_chains(&live, cfg.min_weight, n);
        let enumeration = enumerate_alphabets(&chain_set.chains, &AlphabetHypothesis::empty(n), cfg.limit);
        let shortlist = compatible_rotors(&enumeration, rotors, cfg.filter.as_ref());
        if !shortlist.is_empty() || retracted.len() >= cfg.max_retries || live.is_empty() {
            return ScritchReport {
                chain_set,
                enumeration,
                shortlist,
                retracted,
            };
        }
        retracted.push(live.pop().expect("non-empty"));
    }
}

/// `alphabet` rows followed by the shortlist, tab separated.
pub fn report_tsv(report: &ScritchReport, alphabet: &Alphabet) -> String {
    let mut out = String::new();
    for c in &report.enumeration.chains {
        writeln!(out, "chain\t{}\t{:.2}", c.render(alphabet), c.weight()).unwrap();
    }
    for s in &report.enumeration.solutions {
        writeln!(out, "alphabet\t{}", s.hypothesis.render(alphabet)).unwrap();
    }
    if report.enumeration.truncated {
        writeln!(out, "truncated\t{}", report.enumeration.solutions.len()).unwrap();
    }
    for d in &report.retracted {
        writeln!(out, "retracted\t{}\t{:.2}", d.render(alphabet), d.weight.0).unwrap();
    }
    writeln!(out, "shortlist\t{}", report.shortlist.join(",")).unwrap();
    out
}
