//! Crib graphs and a desk-scale bombe.
//!
//! Settings are searched with every ring at the reference value 0, so a
//! start position here is the rotors' core offset (window minus ring) at
//! the crib's first letter. A middle-rotor step inside the crib depends on
//! the unknown right ring and is covered by a [`StepSchedule`].

mod checkpoint;
mod crib;

pub use checkpoint::Checkpoint;
pub use crib::{build_crib_graph, find_loops, Crib, CribGraph, CribLoop, Edge, DEFAULT_LOOP_BOUND};

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::sync::Arc;

use rayon::prelude::*;

use crate::alphabet::{Alphabet, Letter};
use crate::enigma::{Catalogue, MachineConfig, Plugboard, ReflectorSpec, RotorSpec, ROTORS};
use crate::error::{Error, Result};
use crate::keysheet::DEFAULT_REFLECTOR;

const UNKNOWN: Letter = Letter::MAX;

/// Where the middle rotor steps within the crib.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StepSchedule {
    /// Only the right rotor moves.
    None,
    /// The middle rotor (and with `left`, the left one too) has advanced
    /// from crib index `k` on.
    MiddleAt { k: usize, left: bool },
}

impl StepSchedule {
    /// Core offsets at crib index `i`.
    #[inline]
    pub fn positions(self, start: [Letter; ROTORS], i: usize, n: usize) -> [Letter; ROTORS] {
        let (dm, dl) = match self {
            StepSchedule::MiddleAt { k, left } if i >= k => (1, left as usize),
            _ => (0, 0),
        };
        [
            ((start[0] as usize + dl) % n) as Letter,
            ((start[1] as usize + dm) % n) as Letter,
            ((start[2] as usize + i) % n) as Letter,
        ]
    }

    pub fn render(self) -> String {
        match self {
            StepSchedule::None => "-".into(),
            StepSchedule::MiddleAt { k, left: false } => format!("M@{k}"),
            StepSchedule::MiddleAt { k, left: true } => format!("ML@{k}"),
        }
    }
}

/// Which schedules to try for each start position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SchedulePolicy {
    /// As the machine would step if every ring were at the reference value.
    Odometer,
    /// No step, and a middle step (with or without the left rotor) before
    /// every crib index after the first.
    AllTurnovers,
    /// Rings known: the one schedule they imply.
    Known([Letter; ROTORS]),
}

/// The schedule a machine with these rings follows, given its rotors.
pub fn implied_schedule(
    rotors: &[Arc<RotorSpec>; ROTORS],
    rings: [Letter; ROTORS],
    start: [Letter; ROTORS],
    len: usize,
    n: usize,
) -> StepSchedule {
    let window = |r: usize, c: Letter| ((c as usize + rings[r] as usize) % n) as Letter;
    for k in 1..len {
        // the keypress before letter k sees the right rotor at start + k - 1
        let right = ((start[2] as usize + k - 1) % n) as Letter;
        if rotors[2].is_turnover(window(2, right)) {
            let left = rotors[1].is_turnover(window(1, start[1]));
            return StepSchedule::MiddleAt { k, left };
        }
    }
    StepSchedule::None
}

/// Right ring implied by a middle step at `k`: the keypress before letter
/// `k` found the right window on a turnover letter.
pub fn right_ring(rotor: &RotorSpec, start: [Letter; ROTORS], schedule: StepSchedule, n: usize) -> Vec<Letter> {
    match schedule {
        StepSchedule::None => Vec::new(),
        StepSchedule::MiddleAt { k, .. } => rotor
            .turnovers()
            .iter()
            .map(|&t| ((t as usize + 2 * n - (start[2] as usize + k - 1) % n) % n) as Letter)
            .collect(),
    }
}

/// Partial plugboard: `map[x]` is x's partner, possibly x itself.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SteckerHypothesis {
    map: Vec<Option<Letter>>,
}

impl SteckerHypothesis {
    fn from_raw(raw: &[Letter]) -> Self {
        Self {
            map: raw.iter().map(|&x| (x != UNKNOWN).then_some(x)).collect(),
        }
    }

    pub fn get(&self, x: Letter) -> Option<Letter> {
        self.map.get(x as usize).copied().flatten()
    }

    /// Pairs `(x, y)` with `x <= y`; `x == y` is a letter left unplugged.
    pub fn pairs(&self) -> Vec<(Letter, Letter)> {
        (0..self.map.len() as Letter)
            .filter_map(|x| self.get(x).filter(|&y| x <= y).map(|y| (x, y)))
            .collect()
    }

    pub fn is_consistent(&self) -> bool {
        self.map
            .iter()
            .enumerate()
            .all(|(x, y)| y.is_none_or(|y| self.get(y).is_none_or(|z| z as usize == x)))
    }

    /// Agrees with `plugboard` wherever it says anything.
    pub fn agrees_with(&self, plugboard: &Plugboard) -> bool {
        self.map
            .iter()
            .enumerate()
            .all(|(x, y)| y.is_none_or(|y| plugboard.apply(x as Letter) == y))
    }

    pub fn render(&self, alphabet: &Alphabet) -> String {
        self.pairs()
            .iter()
            .map(|&(a, b)| format!("{}{}", alphabet.symbol(a), alphabet.symbol(b)))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub(crate) fn raw(&self) -> Vec<Letter> {
        self.map.iter().map(|x| x.unwrap_or(UNKNOWN)).collect()
    }

    pub(crate) fn from_raw_checked(raw: &[Letter]) -> Self {
        Self::from_raw(raw)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TestOutcome {
    Rejected,
    /// The surviving hypotheses for the largest component's register.
    Survivors(Vec<SteckerHypothesis>),
}

impl TestOutcome {
    pub fn is_rejected(&self) -> bool {
        matches!(self, TestOutcome::Rejected)
    }
}

#[derive(Clone, Debug)]
pub struct BombeOptions {
    /// Symmetric closure across all positions.
    pub diagonal: bool,
    pub schedules: SchedulePolicy,
    pub jobs: usize,
    pub reflector: String,
    pub checkpoint: Option<PathBuf>,
    /// Stop after this many new work units (for resumable runs).
    pub max_units: Option<usize>,
}

impl Default for BombeOptions {
    fn default() -> Self {
        Self {
            diagonal: true,
            schedules: SchedulePolicy::AllTurnovers,
            jobs: 0,
            reflector: DEFAULT_REFLECTOR.to_string(),
            checkpoint: None,
            max_units: None,
        }
    }
}

/// One rotor order wired up for a crib: every scrambler map precomputed.
pub struct Bombe {
    n: usize,
    order: [Arc<RotorSpec>; ROTORS],
    /// `table[(l * n + m) * n + r]` is the scrambler at core offsets (l, m, r).
    table: Vec<Letter>,
    len: usize,
    /// Per letter: `(other, crib index)`.
    adj: Vec<Vec<(Letter, usize)>>,
    /// `(register, letters)` per component, largest first.
    components: Vec<(Letter, Vec<Letter>)>,
    diagonal: bool,
}

impl Bombe {
    pub fn new(crib: &Crib, order: [Arc<RotorSpec>; ROTORS], reflector: Arc<ReflectorSpec>, alphabet: &Alphabet, diagonal: bool) -> Result<Self> {
        let n = alphabet.len();
        // a longer crib could see the middle rotor step twice
        if crib.len() > n {
            return Err(Error::InvalidConfig(format!("crib of {} letters exceeds one rotor revolution ({n})", crib.len())));
        }
        let cfg = MachineConfig::new(alphabet.clone(), order.clone(), [0; ROTORS], reflector, Plugboard::identity(n))?;
        let mut table = Vec::with_capacity(n * n * n * n);
        for l in 0..n as Letter {
            for m in 0..n as Letter {
                for r in 0..n as Letter {
                    let s = cfg.scrambler([l, m, r]);
                    debug_assert!(s.is_fixed_point_free_involution());
                    table.extend((0..n as Letter).map(|x| s.apply(x)));
                }
            }
        }
        let graph = build_crib_graph(crib);
        let mut adj = vec![Vec::new(); n];
        for e in graph.edges() {
            adj[e.a as usize].push((e.b, e.position - 1));
            adj[e.b as usize].push((e.a, e.position - 1));
        }
        let components = graph
            .components()
            .into_iter()
            .map(|c| (graph.register(&c), c.into_iter().collect()))
            .collect();
        Ok(Self {
            n,
            order,
            table,
            len: crib.len(),
            adj,
            components,
            diagonal,
        })
    }

    pub fn from_catalogue(crib: &Crib, names: &[String; ROTORS], catalogue: &Catalogue, options: &BombeOptions) -> Result<Self> {
        let order = [
            catalogue.rotor(&names[0])?,
            catalogue.rotor(&names[1])?,
            catalogue.rotor(&names[2])?,
        ];
        Self::new(crib, order, catalogue.reflector(&options.reflector)?, catalogue.alphabet(), options.diagonal)
    }

    pub fn order(&self) -> &[Arc<RotorSpec>; ROTORS] {
        &self.order
    }

    #[inline]
    fn scrambler(&self, p: [Letter; ROTORS]) -> &[Letter] {
        let n = self.n;
        let at = ((p[0] as usize * n + p[1] as usize) * n + p[2] as usize) * n;
        &self.table[at..at + n]
    }

    /// Scrambler map for every crib index.
    pub fn maps(&self, start: [Letter; ROTORS], schedule: StepSchedule) -> Vec<&[Letter]> {
        (0..self.len)
            .map(|i| self.scrambler(schedule.positions(start, i, self.n)))
            .collect()
    }

    pub fn schedules(&self, policy: &SchedulePolicy, start: [Letter; ROTORS]) -> Vec<StepSchedule> {
        match policy {
            SchedulePolicy::Odometer => vec![implied_schedule(&self.order, [0; ROTORS], start, self.len, self.n)],
            SchedulePolicy::Known(rings) => {
                // start is in core offsets; the stepping follows the windows
                vec![implied_schedule(&self.order, *rings, start, self.len, self.n)]
            }
            SchedulePolicy::AllTurnovers => {
                let mut v = vec![StepSchedule::None];
                for k in 1..self.len {
                    v.push(StepSchedule::MiddleAt { k, left: false });
                    v.push(StepSchedule::MiddleAt { k, left: true });
                }
                v
            }
        }
    }

    /// Tests one setting: every component must keep at least one register
    /// hypothesis alive.
    pub fn test(&self, start: [Letter; ROTORS], schedule: StepSchedule) -> TestOutcome {
        let maps = self.maps(start, schedule);
        let mut partner = vec![UNKNOWN; self.n];
        let mut queue = Vec::with_capacity(2 * self.n);
        let mut main = Vec::new();
        for (ci, (reg, _)) in self.components.iter().enumerate() {
            let mut alive = false;
            for x in 0..self.n as Letter {
                if self.propagate(&maps, *reg, x, &mut partner, &mut queue) {
                    alive = true;
                    if ci == 0 {
                        main.push(SteckerHypothesis::from_raw(&partner));
                    } else {
                        break;
                    }
                }
            }
            if !alive {
                return TestOutcome::Rejected;
            }
        }
        TestOutcome::Survivors(main)
    }

    /// Unit propagation from `reg <-> x`. Returns false on contradiction.
    fn propagate(&self, maps: &[&[Letter]], reg: Letter, x: Letter, partner: &mut [Letter], queue: &mut Vec<Letter>) -> bool {
        partner.fill(UNKNOWN);
        queue.clear();
        if !self.assign(reg, x, partner, queue) {
            return false;
        }
        while let Some(u) = queue.pop() {
            let pu = partner[u as usize];
            for &(w, i) in &self.adj[u as usize] {
                if !self.assign(w, maps[i][pu as usize], partner, queue) {
                    return false;
                }
            }
        }
        true
    }

    #[inline]
    fn assign(&self, u: Letter, v: Letter, partner: &mut [Letter], queue: &mut Vec<Letter>) -> bool {
        let pu = partner[u as usize];
        if pu != UNKNOWN {
            return pu == v;
        }
        if self.diagonal {
            let pv = partner[v as usize];
            if pv != UNKNOWN && pv != u {
                return false;
            }
            partner[u as usize] = v;
            queue.push(u);
            if pv == UNKNOWN && u != v {
                partner[v as usize] = u;
                queue.push(v);
            }
        } else {
            partner[u as usize] = v;
            queue.push(u);
        }
        true
    }
}

/// A setting the bombe could not reject.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub order: [String; ROTORS],
    pub start: [Letter; ROTORS],
    pub schedule: StepSchedule,
    pub survivors: Vec<SteckerHypothesis>,
}

impl Candidate {
    pub fn render(&self, alphabet: &Alphabet) -> String {
        let stecker = self
            .survivors
            .iter()
            .map(|s| s.render(alphabet))
            .collect::<Vec<_>>()
            .join(" | ");
        format!(
            "{}\t{}\t{}\t{}\t{}",
            self.order.join("-"),
            alphabet.decode(&self.start),
            self.schedule.render(),
            self.survivors.len(),
            stecker
        )
    }
}

pub const CANDIDATE_HEADER: &str = "order\tstart\tschedule\tsurvivors\tstecker";

/// Results of one `(order, left offset)` work unit.
pub(crate) type UnitResult = Vec<(([Letter; ROTORS], StepSchedule), Vec<SteckerHypothesis>)>;

/// Exhaustive scan over the given orders and all start positions.
///
/// Candidates come back ranked: fewest surviving hypotheses first, then by
/// order, start and schedule.
pub fn bombe_search(crib: &Crib, catalogue: &Catalogue, orders: &[[String; ROTORS]], options: &BombeOptions) -> Result<Vec<Candidate>> {
    let n = catalogue.alphabet().len();
    let bombes: Vec<Bombe> = orders
        .iter()
        .map(|o| Bombe::from_catalogue(crib, o, catalogue, options))
        .collect::<Result<_>>()?;
    let units = orders.len() * n;
    let fingerprint = checkpoint::fingerprint(crib, orders, options, catalogue.alphabet());
    let mut state = match &options.checkpoint {
        Some(p) if p.exists() => Checkpoint::load(p, fingerprint, n)?,
        _ => Checkpoint::new(fingerprint),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;

    let todo: Vec<usize> = (0..units).filter(|u| !state.done.contains_key(u)).collect();
    let todo = match options.max_units {
        Some(m) => &todo[..m.min(todo.len())],
        None => &todo[..],
    };
    let batch = (pool.current_num_threads() * 2).max(1);
    for chunk in todo.chunks(batch) {
        let results: Vec<(usize, UnitResult)> = pool.install(|| {
            chunk
                .par_iter()
                .map(|&u| (u, run_unit(&bombes[u / n], (u % n) as Letter, &options.schedules, n)))
                .collect()
        });
        for (u, r) in results {
            state.done.insert(u, r);
        }
        if let Some(p) = &options.checkpoint {
            state.save(p, n)?;
        }
    }

    let mut out = Vec::new();
    for (&u, results) in &state.done {
        for ((start, schedule), survivors) in results {
            out.push((
                u / n,
                Candidate {
                    order: orders[u / n].clone(),
                    start: *start,
                    schedule: *schedule,
                    survivors: survivors.clone(),
                },
            ));
        }
    }
    out.sort_by(|(oa, a), (ob, b)| {
        a.survivors
            .len()
            .cmp(&b.survivors.len())
            .then(oa.cmp(ob))
            .then(a.start.cmp(&b.start))
            .then(a.schedule.cmp(&b.schedule))
    });
    Ok(out.into_iter().map(|(_, c)| c).collect())
}

/// Whether every unit of the search has been run.
pub fn search_complete(orders: usize, n: usize, checkpoint: &Checkpoint) -> bool {
    (0..orders * n).all(|u| checkpoint.done.contains_key(&u))
}

fn run_unit(bombe: &Bombe, left: Letter, policy: &SchedulePolicy, n: usize) -> UnitResult {
    let mut out = Vec::new();
    for m in 0..n as Letter {
        for r in 0..n as Letter {
            let start = [left, m, r];
            for schedule in bombe.schedules(policy, start) {
                if let TestOutcome::Survivors(s) = bombe.test(start, schedule) {
                    out.push(((start, schedule), s));
                }
            }
        }
    }
    out
}

/// Core offsets and schedule that a known key presents to the bombe for a
/// crib at `anchor` in a message sent under `message_key`.
pub fn true_setting(
    rotors: &[Arc<RotorSpec>; ROTORS],
    rings: [Letter; ROTORS],
    message_key: [Letter; ROTORS],
    anchor: usize,
    len: usize,
    n: usize,
) -> ([Letter; ROTORS], StepSchedule) {
    let step = |p: [Letter; ROTORS]| {
        let mut next = p;
        let mut carry = true;
        for i in (0..ROTORS).rev() {
            if !carry {
                break;
            }
            carry = rotors[i].is_turnover(p[i]);
            next[i] = ((p[i] as usize + 1) % n) as Letter;
        }
        next
    };
    let core = |p: [Letter; ROTORS]| -> [Letter; ROTORS] {
        std::array::from_fn(|i| ((p[i] as usize + n - rings[i] as usize) % n) as Letter)
    };
    let mut w = message_key;
    for _ in 0..=anchor {
        w = step(w);
    }
    let start = core(w);
    let mut schedule = StepSchedule::None;
    for k in 1..len {
        let next = step(w);
        if next[1] != w[1] {
            schedule = StepSchedule::MiddleAt {
                k,
                left: next[0] != w[0],
            };
            break;
        }
        w = next;
    }
    (start, schedule)
}

/// Letters of the crib graph's main component.
pub fn main_component(crib: &Crib) -> BTreeSet<Letter> {
    build_crib_graph(crib).components().into_iter().next().unwrap_or_default()
}
