//! Rotor elimination by turnover position.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::{Chain, Enumeration, Solution};
use crate::alphabet::Letter;
use crate::enigma::RotorSpec;
use crate::error::{Error, Result};

/// True when the boundary between columns `t` and `t + 1` lies strictly
/// inside the column interval `[start, start + len]`, read round the circle.
pub fn boundary_inside(t: Letter, start: u8, len: usize, n: usize) -> bool {
    ((t as usize + n - start as usize) % n) < len
}

/// Decides whether a rotor's turnovers are consistent with one solution.
pub trait RotorFilter: Send + Sync + std::fmt::Debug {
    fn name(&self) -> &str;
    /// Column intervals `(start, len)` that no turnover may break.
    fn intervals(&self, chains: &[Chain], solution: &Solution, n: usize) -> Vec<(u8, usize)>;

    fn admits(&self, rotor: &RotorSpec, chains: &[Chain], solution: &Solution, n: usize) -> bool {
        let iv = self.intervals(chains, solution, n);
        rotor
            .turnovers()
            .iter()
            .all(|&t| iv.iter().all(|&(s, len)| !boundary_inside(t, s, len, n)))
    }
}

/// Each placed chain, first to last column. A chain holding every letter
/// closes on itself and covers every boundary.
#[derive(Clone, Copy, Debug, Default)]
pub struct ChainSpan;

impl RotorFilter for ChainSpan {
    fn name(&self) -> &str {
        "chain-span"
    }

    fn intervals(&self, chains: &[Chain], solution: &Solution, n: usize) -> Vec<(u8, usize)> {
        chains
            .iter()
            .zip(&solution.offsets)
            .map(|(c, &off)| {
                let len = if c.is_closed() { n } else { c.span() as usize };
                (off, len)
            })
            .collect()
    }
}

/// One interval per deduction, from the column of `letter_b` forward by the
/// offset: the stretch the in-depth pair of messages stepped through.
#[derive(Clone, Copy, Debug, Default)]
pub struct DepthArcs;

impl RotorFilter for DepthArcs {
    fn name(&self) -> &str {
        "depth-arcs"
    }

    fn intervals(&self, chains: &[Chain], solution: &Solution, n: usize) -> Vec<(u8, usize)> {
        let mut out = Vec::new();
        for (c, &off) in chains.iter().zip(&solution.offsets) {
            for d in c.deductions() {
                let pb = c.position_of(d.letter_b).expect("deduction letters are in the chain");
                out.push((((off as usize + pb as usize) % n) as u8, d.offset as usize));
            }
        }
        out
    }
}

/// Names of the rotors admitted by at least one solution, in catalogue order.
pub fn compatible_rotors(enumeration: &Enumeration, rotors: &[Arc<RotorSpec>], filter: &dyn RotorFilter) -> Vec<String> {
    let n = enumeration
        .solutions
        .first()
        .map_or(0, |s| s.hypothesis.n());
    rotors
        .iter()
        .filter(|r| {
            enumeration
                .solutions
                .iter()
                .any(|s| filter.admits(r, &enumeration.chains, s, n))
        })
        .map(|r| r.name().to_string())
        .collect()
}

type FilterFactory = fn() -> Arc<dyn RotorFilter>;

pub struct FilterRegistry {
    filters: BTreeMap<&'static str, FilterFactory>,
}

impl FilterRegistry {
    pub fn builtin() -> Self {
        let mut filters: BTreeMap<&'static str, FilterFactory> = BTreeMap::new();
        filters.insert("chain-span", || Arc::new(ChainSpan));
        filters.insert("depth-arcs", || Arc::new(DepthArcs));
        Self { filters }
    }

    pub fn register(&mut self, name: &'static str, f: FilterFactory) {
        self.filters.insert(name, f);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn RotorFilter>> {
        self.filters.get(name).map(|f| f()).ok_or_else(|| Error::UnknownStrategy {
            kind: "rotor filter",
            name: name.to_string(),
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.filters.keys().copied()
    }
}
