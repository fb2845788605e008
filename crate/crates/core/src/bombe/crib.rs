//! Cribs and their letter graphs.

use std::collections::{BTreeMap, BTreeSet};

use crate::alphabet::{normalize, Alphabet, Letter};
use crate::error::{Error, Result};

/// A guessed plaintext aligned under cipher text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Crib {
    plain: Vec<Letter>,
    cipher: Vec<Letter>,
    /// Position of the crib's first letter within the intercept body.
    anchor: usize,
}

impl Crib {
    pub fn new(plain: Vec<Letter>, cipher: Vec<Letter>, anchor: usize, alphabet: &Alphabet) -> Result<Self> {
        if plain.len() != cipher.len() {
            return Err(Error::CribLengthMismatch {
                plain: plain.len(),
                cipher: cipher.len(),
            });
        }
        if plain.is_empty() {
            return Err(Error::EmptyMessage);
        }
        if let Some(index) = plain.iter().zip(&cipher).position(|(p, c)| p == c) {
            return Err(Error::CribMisaligned {
                letter: alphabet.symbol(plain[index]),
                index,
            });
        }
        Ok(Self { plain, cipher, anchor })
    }

    pub fn from_text(alphabet: &Alphabet, plain: &str, cipher: &str, anchor: usize) -> Result<Self> {
        Self::new(
            alphabet.encode(&normalize(plain))?,
            alphabet.encode(&normalize(cipher))?,
            anchor,
            alphabet,
        )
    }

    /// Lays `plain` under `body` at `anchor`.
    pub fn from_intercept(alphabet: &Alphabet, plain: &str, body: &str, anchor: usize) -> Result<Self> {
        let plain = alphabet.encode(&normalize(plain))?;
        let body = alphabet.encode(&normalize(body))?;
        let end = anchor + plain.len();
        if end > body.len() {
            return Err(Error::CribOutOfBounds {
                start: anchor,
                end,
                len: body.len(),
            });
        }
        Self::new(plain, body[anchor..end].to_vec(), anchor, alphabet)
    }

    /// Crib file: a plain row, a cipher row, then an optional anchor. Blank
    /// lines and `#` comments are skipped.
    pub fn parse(alphabet: &Alphabet, text: &str) -> Result<Self> {
        let rows: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        if rows.len() < 2 || rows.len() > 3 {
            return Err(Error::parse(
                rows.last().map_or(1, |r| r.0),
                format!("expected plain, cipher and optional anchor rows, got {} rows", rows.len()),
            ));
        }
        let anchor = match rows.get(2) {
            None => 0,
            Some(&(line, t)) => {
                let t = t.strip_prefix("anchor:").unwrap_or(t).trim();
                t.parse().map_err(|_| Error::parse(line, format!("bad anchor {t:?}")))?
            }
        };
        Self::from_text(alphabet, rows[0].1, rows[1].1, anchor)
    }

    pub fn plain(&self) -> &[Letter] {
        &self.plain
    }

    pub fn cipher(&self) -> &[Letter] {
        &self.cipher
    }

    pub fn anchor(&self) -> usize {
        self.anchor
    }

    pub fn len(&self) -> usize {
        self.plain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plain.is_empty()
    }

    /// The first `len` letters.
    pub fn prefix(&self, len: usize) -> Self {
        Self {
            plain: self.plain[..len].to_vec(),
            cipher: self.cipher[..len].to_vec(),
            anchor: self.anchor,
        }
    }

    pub fn to_text(&self, alphabet: &Alphabet) -> String {
        format!(
            "{}\n{}\n{}\n",
            alphabet.decode(&self.plain),
            alphabet.decode(&self.cipher),
            self.anchor
        )
    }
}

/// An undirected crib edge; `position` counts from 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub a: Letter,
    pub b: Letter,
    pub position: usize,
}

impl Edge {
    pub fn other(&self, x: Letter) -> Letter {
        if x == self.a {
            self.b
        } else {
            self.a
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CribGraph {
    nodes: BTreeSet<Letter>,
    edges: Vec<Edge>,
}

pub fn build_crib_graph(crib: &Crib) -> CribGraph {
    let edges: Vec<Edge> = crib
        .plain
        .iter()
        .zip(&crib.cipher)
        .enumerate()
        .map(|(i, (&a, &b))| Edge { a, b, position: i + 1 })
        .collect();
    CribGraph::from_edges(edges)
}

impl CribGraph {
    pub fn from_edges(edges: Vec<Edge>) -> Self {
        let nodes = edges.iter().flat_map(|e| [e.a, e.b]).collect();
        Self { nodes, edges }
    }

    pub fn nodes(&self) -> &BTreeSet<Letter> {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn degree(&self, x: Letter) -> usize {
        self.edges.iter().filter(|e| e.a == x || e.b == x).count()
    }

    /// `(neighbour, position)` for every edge at `x`, by position.
    pub fn neighbours(&self, x: Letter) -> Vec<(Letter, usize)> {
        self.edges
            .iter()
            .filter(|e| e.a == x || e.b == x)
            .map(|e| (e.other(x), e.position))
            .collect()
    }

    /// Connected components, largest first; ties by smallest letter.
    pub fn components(&self) -> Vec<BTreeSet<Letter>> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &start in &self.nodes {
            if !seen.insert(start) {
                continue;
            }
            let mut comp = BTreeSet::from([start]);
            let mut stack = vec![start];
            while let Some(x) = stack.pop() {
                for (y, _) in self.neighbours(x) {
                    if seen.insert(y) {
                        comp.insert(y);
                        stack.push(y);
                    }
                }
            }
            out.push(comp);
        }
        out.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.iter().next().cmp(&b.iter().next())));
        out
    }

    /// The letter of highest degree within `component`, alphabetical on ties.
    pub fn register(&self, component: &BTreeSet<Letter>) -> Letter {
        let mut best = *component.iter().next().expect("non-empty component");
        let mut best_deg = 0;
        for &x in component {
            let d = self.degree(x);
            if d > best_deg {
                best = x;
                best_deg = d;
            }
        }
        best
    }
}

/// A cycle in the crib graph: letters in walk order, and the position of
/// the edge leaving each letter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CribLoop {
    pub letters: Vec<Letter>,
    pub positions: Vec<usize>,
}

impl CribLoop {
    pub fn letter_set(&self) -> BTreeSet<Letter> {
        self.letters.iter().copied().collect()
    }

    pub fn edge_set(&self) -> BTreeSet<usize> {
        self.positions.iter().copied().collect()
    }

    pub fn render(&self, alphabet: &Alphabet) -> String {
        let mut s = String::new();
        for (l, p) in self.letters.iter().zip(&self.positions) {
            s.push(alphabet.symbol(*l));
            s.push_str(&format!("-{p}-"));
        }
        s.push(alphabet.symbol(self.letters[0]));
        s
    }
}

pub const DEFAULT_LOOP_BOUND: usize = 8;

/// Every simple cycle of at most `max_len` edges, each reported once, in
/// order of length and then edge positions.
pub fn find_loops(graph: &CribGraph, max_len: usize) -> Vec<CribLoop> {
    let mut adj: BTreeMap<Letter, Vec<(Letter, usize)>> = BTreeMap::new();
    for (id, e) in graph.edges.iter().enumerate() {
        adj.entry(e.a).or_default().push((e.b, id));
        adj.entry(e.b).or_default().push((e.a, id));
    }
    let mut found: BTreeMap<BTreeSet<usize>, CribLoop> = BTreeMap::new();
    for &start in &graph.nodes {
        // cycles whose smallest letter is `start`
        let mut path = vec![start];
        let mut used = Vec::new();
        walk(graph, &adj, start, &mut path, &mut used, max_len, &mut found);
    }
    let mut loops: Vec<CribLoop> = found.into_values().collect();
    loops.sort_by(|a, b| {
        a.positions
            .len()
            .cmp(&b.positions.len())
            .then_with(|| a.edge_set().cmp(&b.edge_set()))
    });
    loops
}

fn walk(
    graph: &CribGraph,
    adj: &BTreeMap<Letter, Vec<(Letter, usize)>>,
    start: Letter,
    path: &mut Vec<Letter>,
    used: &mut Vec<usize>,
    max_len: usize,
    found: &mut BTreeMap<BTreeSet<usize>, CribLoop>,
) {
    let here = *path.last().expect("path starts at start");
    for &(next, id) in &adj[&here] {
        if used.contains(&id) || next < start {
            continue;
        }
        if next == start {
            if used.len() + 1 >= 2 {
                used.push(id);
                let key: BTreeSet<usize> = used.iter().copied().collect();
                found.entry(key).or_insert_with(|| CribLoop {
                    letters: path.clone(),
                    positions: used.iter().map(|&i| graph.edges[i].position).collect(),
                });
                used.pop();
            }
            continue;
        }
        if path.contains(&next) || used.len() + 1 >= max_len {
            continue;
        }
        path.push(next);
        used.push(id);
        walk(graph, adj, start, path, used, max_len, found);
        used.pop();
        path.pop();
    }
}
