//! Three-rotor Enigma over an arbitrary alphabet.
//!
//! Signal path for one keypress: plugboard, right, middle and left rotor,
//! reflector, left, middle and right rotor backwards, plugboard. Stepping is
//! a pure odometer (no double step), so single-notch rotors give the
//! position sequence period `N^3`.

mod catalogue;
mod keyspace;

pub use catalogue::Catalogue;
pub use keyspace::{keyspace_size, plugboard_pairings, rotor_orders, KeyspaceBreakdown, KeyspaceModel};

use std::sync::Arc;

use crate::alphabet::{normalize, Alphabet, Letter};
use crate::error::{Error, Result};
use crate::perm::Permutation;

pub const ROTORS: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RotorSpec {
    name: String,
    wiring: Permutation,
    turnovers: Vec<Letter>,
}

impl RotorSpec {
    /// `turnovers` are window letters: leaving one of them advances the
    /// rotor to the left.
    pub fn new(name: impl Into<String>, wiring: Permutation, mut turnovers: Vec<Letter>) -> Result<Self> {
        let name = name.into();
        if turnovers.is_empty() {
            return Err(Error::InvalidRotor(format!("{name}: no turnover letters")));
        }
        if turnovers.iter().any(|&t| t as usize >= wiring.len()) {
            return Err(Error::InvalidRotor(format!("{name}: turnover outside the alphabet")));
        }
        turnovers.sort_unstable();
        turnovers.dedup();
        Ok(Self {
            name,
            wiring,
            turnovers,
        })
    }

    pub fn from_symbols(alphabet: &Alphabet, name: &str, wiring: &str, turnovers: &str) -> Result<Self> {
        let w = Permutation::from_symbols(alphabet, wiring)
            .map_err(|e| Error::InvalidRotor(format!("{name}: {e}")))?;
        let t = alphabet
            .encode(turnovers)
            .map_err(|e| Error::InvalidRotor(format!("{name}: {e}")))?;
        Self::new(name, w, t)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn wiring(&self) -> &Permutation {
        &self.wiring
    }

    pub fn turnovers(&self) -> &[Letter] {
        &self.turnovers
    }

    #[inline]
    pub fn is_turnover(&self, position: Letter) -> bool {
        self.turnovers.contains(&position)
    }

    pub fn len(&self) -> usize {
        self.wiring.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wiring.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReflectorSpec {
    name: String,
    wiring: Permutation,
}

impl ReflectorSpec {
    pub fn new(name: impl Into<String>, wiring: Permutation) -> Result<Self> {
        let name = name.into();
        if !wiring.is_involution() {
            return Err(Error::InvalidReflector(format!("{name}: not an involution")));
        }
        if let Some(x) = wiring.fixed_points().next() {
            return Err(Error::InvalidReflector(format!("{name}: letter {x} maps to itself")));
        }
        Ok(Self { name, wiring })
    }

    pub fn from_symbols(alphabet: &Alphabet, name: &str, wiring: &str) -> Result<Self> {
        let w = Permutation::from_symbols(alphabet, wiring)
            .map_err(|e| Error::InvalidReflector(format!("{name}: {e}")))?;
        Self::new(name, w)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn wiring(&self) -> &Permutation {
        &self.wiring
    }
}

/// Disjoint letter swaps; unpaired letters pass through.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plugboard {
    map: Permutation,
    pairs: Vec<(Letter, Letter)>,
}

impl Plugboard {
    pub fn identity(n: usize) -> Self {
        Self {
            map: Permutation::identity(n),
            pairs: Vec::new(),
        }
    }

    pub fn new(n: usize, pairs: &[(Letter, Letter)]) -> Result<Self> {
        let mut forward: Vec<Letter> = (0..n as Letter).collect();
        let mut used = vec![false; n];
        let mut normalized = Vec::with_capacity(pairs.len());
        for &(a, b) in pairs {
            if a as usize >= n || b as usize >= n {
                return Err(Error::InvalidPlugboard(format!("letter outside 0..{n}")));
            }
            if a == b {
                return Err(Error::InvalidPlugboard(format!("letter {a} paired with itself")));
            }
            for x in [a, b] {
                if used[x as usize] {
                    return Err(Error::InvalidPlugboard(format!("letter {x} used twice")));
                }
                used[x as usize] = true;
            }
            forward[a as usize] = b;
            forward[b as usize] = a;
            normalized.push((a.min(b), a.max(b)));
        }
        normalized.sort_unstable();
        Ok(Self {
            map: Permutation::new(forward).expect("swaps form a permutation"),
            pairs: normalized,
        })
    }

    /// Parses space-separated pairs such as `AB CD EF`.
    pub fn parse(alphabet: &Alphabet, text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for token in text.split_whitespace() {
            let letters = alphabet
                .encode(&token.to_uppercase())
                .map_err(|e| Error::InvalidPlugboard(format!("{token:?}: {e}")))?;
            if letters.len() != 2 {
                return Err(Error::InvalidPlugboard(format!("{token:?} is not a letter pair")));
            }
            pairs.push((letters[0], letters[1]));
        }
        Self::new(alphabet.len(), &pairs).map_err(|e| match e {
            Error::InvalidPlugboard(m) => {
                Error::InvalidPlugboard(format!("{m} in {:?}", text.trim()))
            }
            other => other,
        })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    #[inline]
    pub fn apply(&self, x: Letter) -> Letter {
        self.map.apply(x)
    }

    pub fn map(&self) -> &Permutation {
        &self.map
    }

    pub fn pairs(&self) -> &[(Letter, Letter)] {
        &self.pairs
    }

    pub fn render(&self, alphabet: &Alphabet) -> String {
        self.pairs
            .iter()
            .map(|&(a, b)| format!("{}{}", alphabet.symbol(a), alphabet.symbol(b)))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Everything about a machine except the rotor positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MachineConfig {
    pub alphabet: Alphabet,
    /// Left to right.
    pub rotors: [Arc<RotorSpec>; ROTORS],
    pub rings: [Letter; ROTORS],
    pub reflector: Arc<ReflectorSpec>,
    pub plugboard: Plugboard,
    /// Encipher first and step afterwards, instead of the keypress order.
    pub step_after: bool,
}

impl MachineConfig {
    pub fn new(
        alphabet: Alphabet,
        rotors: [Arc<RotorSpec>; ROTORS],
        rings: [Letter; ROTORS],
        reflector: Arc<ReflectorSpec>,
        plugboard: Plugboard,
    ) -> Result<Self> {
        let n = alphabet.len();
        for r in &rotors {
            if r.len() != n {
                return Err(Error::InvalidMachine(format!(
                    "rotor {} has {} contacts, alphabet has {n}",
                    r.name(),
                    r.len()
                )));
            }
        }
        if reflector.wiring().len() != n || plugboard.len() != n {
            return Err(Error::InvalidMachine("component size differs from the alphabet".into()));
        }
        if rings.iter().any(|&r| r as usize >= n) {
            return Err(Error::InvalidMachine("ring setting out of range".into()));
        }
        Ok(Self {
            alphabet,
            rotors,
            rings,
            reflector,
            plugboard,
            step_after: false,
        })
    }

    pub fn with_step_after(mut self, step_after: bool) -> Self {
        self.step_after = step_after;
        self
    }

    pub fn n(&self) -> usize {
        self.alphabet.len()
    }

    pub fn at(self: &Arc<Self>, positions: [Letter; ROTORS]) -> Result<MachineState> {
        MachineState::new(self.clone(), positions)
    }

    /// The map through the rotors and reflector only, for the given window
    /// letters. The plugboard is not applied.
    pub fn scrambler(&self, positions: [Letter; ROTORS]) -> Permutation {
        let n = self.n();
        let forward = (0..n as Letter).map(|x| self.scramble(positions, x)).collect();
        Permutation::new(forward).expect("scrambler is a bijection")
    }

    #[inline]
    fn scramble(&self, positions: [Letter; ROTORS], x: Letter) -> Letter {
        let n = self.n() as i32;
        let mut x = x;
        for i in (0..ROTORS).rev() {
            x = through(&self.rotors[i].wiring, positions[i], self.rings[i], x, n, false);
        }
        x = self.reflector.wiring.apply(x);
        for i in 0..ROTORS {
            x = through(&self.rotors[i].wiring, positions[i], self.rings[i], x, n, true);
        }
        x
    }

    /// The odometer. Returns the positions after one step.
    #[inline]
    pub fn step_positions(&self, positions: [Letter; ROTORS]) -> [Letter; ROTORS] {
        let n = self.n() as Letter;
        let mut next = positions;
        let mut carry = true;
        for i in (0..ROTORS).rev() {
            if !carry {
                break;
            }
            carry = self.rotors[i].is_turnover(positions[i]);
            next[i] = (positions[i] + 1) % n;
        }
        next
    }
}

#[inline]
fn through(wiring: &Permutation, pos: Letter, ring: Letter, x: Letter, n: i32, backwards: bool) -> Letter {
    let offset = pos as i32 - ring as i32;
    let shifted = (x as i32 + offset).rem_euclid(n) as Letter;
    let y = if backwards {
        wiring.apply_inverse(shifted)
    } else {
        wiring.apply(shifted)
    };
    (y as i32 - offset).rem_euclid(n) as Letter
}

/// A machine together with its current window letters. Cheap to clone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MachineState {
    config: Arc<MachineConfig>,
    positions: [Letter; ROTORS],
}

impl MachineState {
    pub fn new(config: Arc<MachineConfig>, positions: [Letter; ROTORS]) -> Result<Self> {
        if positions.iter().any(|&p| p as usize >= config.n()) {
            return Err(Error::InvalidMachine("rotor position out of range".into()));
        }
        Ok(Self { config, positions })
    }

    /// Positions given as window letters, e.g. `"QXT"`.
    pub fn from_trigram(config: Arc<MachineConfig>, trigram: &str) -> Result<Self> {
        let positions = parse_trigram(&config.alphabet, trigram)?;
        Self::new(config, positions)
    }

    pub fn config(&self) -> &Arc<MachineConfig> {
        &self.config
    }

    pub fn positions(&self) -> [Letter; ROTORS] {
        self.positions
    }

    pub fn window(&self) -> String {
        self.config.alphabet.decode(&self.positions)
    }

    pub fn with_positions(&self, positions: [Letter; ROTORS]) -> Result<Self> {
        Self::new(self.config.clone(), positions)
    }
}

pub fn parse_trigram(alphabet: &Alphabet, trigram: &str) -> Result<[Letter; ROTORS]> {
    let letters = alphabet
        .encode(&normalize(trigram))
        .map_err(|_| Error::BadTrigram(trigram.to_string()))?;
    letters
        .try_into()
        .map_err(|_| Error::BadTrigram(trigram.to_string()))
}

pub fn step(state: &MachineState) -> MachineState {
    MachineState {
        config: state.config.clone(),
        positions: state.config.step_positions(state.positions),
    }
}

/// One keypress.
pub fn encipher_letter(state: &MachineState, letter: Letter) -> Result<(Letter, MachineState)> {
    let cfg = &state.config;
    if letter as usize >= cfg.n() {
        return Err(Error::LetterOutsideAlphabet {
            letter: '?',
            position: 0,
        });
    }
    let stepped = cfg.step_positions(state.positions);
    let at = if cfg.step_after { state.positions } else { stepped };
    let p = cfg.plugboard.apply(letter);
    let out = cfg.plugboard.apply(cfg.scramble(at, p));
    Ok((
        out,
        MachineState {
            config: cfg.clone(),
            positions: stepped,
        },
    ))
}

pub fn encipher_message(state: &MachineState, letters: &[Letter]) -> Result<(Vec<Letter>, MachineState)> {
    let mut state = state.clone();
    let mut out = Vec::with_capacity(letters.len());
    for (position, &l) in letters.iter().enumerate() {
        let (c, next) = encipher_letter(&state, l).map_err(|e| match e {
            Error::LetterOutsideAlphabet { .. } => Error::LetterOutsideAlphabet { letter: '?', position },
            other => other,
        })?;
        out.push(c);
        state = next;
    }
    Ok((out, state))
}

/// Text front end: normalizes, checks the alphabet, enciphers.
pub fn encipher_text(state: &MachineState, text: &str) -> Result<(String, MachineState)> {
    let alphabet = &state.config.alphabet;
    let letters = alphabet.encode(&normalize(text))?;
    let (out, next) = encipher_message(state, &letters)?;
    Ok((alphabet.decode(&out), next))
}

/// The whole substitution the next keypress would apply.
pub fn cipher_alphabet_at(state: &MachineState) -> Permutation {
    let cfg = &state.config;
    let at = if cfg.step_after {
        state.positions
    } else {
        cfg.step_positions(state.positions)
    };
    let scrambler = cfg.scrambler(at);
    cfg.plugboard.map().after(&scrambler).after(cfg.plugboard.map())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn machine(rotors: [&str; 3], rings: [Letter; 3], plugs: &str) -> Arc<MachineConfig> {
        let cat = Catalogue::historical();
        let cfg = MachineConfig::new(
            Alphabet::latin(),
            rotors.map(|r| cat.rotor(r).unwrap()),
            rings,
            cat.reflector("UKW-B").unwrap(),
            Plugboard::parse(&Alphabet::latin(), plugs).unwrap(),
        )
        .unwrap();
        Arc::new(cfg)
    }

    fn toy(plugs: &str) -> Arc<MachineConfig> {
        let cat = Catalogue::toy();
        Arc::new(
            MachineConfig::new(
                Alphabet::toy(),
                ["T1", "T2", "T3"].map(|r| cat.rotor(r).unwrap()),
                [0; 3],
                cat.reflector("R").unwrap(),
                Plugboard::parse(&Alphabet::toy(), plugs).unwrap(),
            )
            .unwrap(),
        )
    }

    #[test]
    fn reference_vector_aaaaa() {
        // rotors I II III, rings AAA, start AAA, no plugs: AAAAA -> BDZGO
        let cfg = machine(["I", "II", "III"], [0; 3], "");
        let s = cfg.at([0; 3]).unwrap();
        assert_eq!(encipher_text(&s, "AAAAA").unwrap().0, "BDZGO");
    }

    #[test]
    fn stepping_is_an_odometer() {
        let cfg = machine(["I", "II", "III"], [0; 3], "");
        let a = Alphabet::latin();
        let s = MachineState::from_trigram(cfg.clone(), "AAV").unwrap();
        assert_eq!(step(&s).window(), "ABW");
        let s = MachineState::from_trigram(cfg.clone(), "AEV").unwrap();
        assert_eq!(step(&s).window(), "BFW");
        // no double step: the middle rotor only moves when carried into
        let s = MachineState::from_trigram(cfg, "AEA").unwrap();
        assert_eq!(step(&s).window(), "AEB");
        assert_eq!(a.len(), 26);
    }

    fn period(cfg: &Arc<MachineConfig>) -> usize {
        let start = cfg.at([0; 3]).unwrap();
        let mut s = step(&start);
        let mut k = 1;
        while s.positions() != start.positions() {
            s = step(&s);
            k += 1;
        }
        k
    }

    #[test]
    fn toy_period_is_216() {
        assert_eq!(period(&toy("")), 216);
    }

    #[test]
    fn latin_period_is_17576() {
        assert_eq!(period(&machine(["III", "V", "I"], [3, 7, 11], "AB")), 17576);
    }

    #[test]
    fn invalid_components() {
        let a = Alphabet::toy();
        assert!(ReflectorSpec::from_symbols(&a, "bad", "ACIOST").is_err());
        assert!(ReflectorSpec::from_symbols(&a, "bad", "CIOSTA").is_err());
        assert!(RotorSpec::from_symbols(&a, "bad", "AACIOS", "A").is_err());
        assert!(RotorSpec::from_symbols(&a, "bad", "ACIOST", "").is_err());
        assert!(Plugboard::parse(&a, "AC CS").is_err());
        assert!(Plugboard::parse(&a, "AA").is_err());
        assert!(Plugboard::parse(&a, "ACS").is_err());
    }

    #[test]
    fn identity_stack_gives_the_reflector() {
        let a = Alphabet::latin();
        let id = Arc::new(RotorSpec::new("id", Permutation::identity(26), vec![25]).unwrap());
        let cat = Catalogue::historical();
        let refl = cat.reflector("UKW-B").unwrap();
        let cfg = Arc::new(
            MachineConfig::new(a, [id.clone(), id.clone(), id], [4, 9, 1], refl.clone(), Plugboard::identity(26))
                .unwrap(),
        );
        let s = cfg.at([3, 17, 8]).unwrap();
        assert_eq!(&cipher_alphabet_at(&s), refl.wiring());
    }

    #[test]
    fn toy_plugboard_relation() {
        // Whatever CCC enciphers to, AAA from the same start goes through the
        // same scrambler with A and C swapped on both sides.
        let plug = toy("AC SO");
        let bare = toy("");
        let a = Alphabet::toy();
        for start in 0..216u32 {
            let pos = [(start / 36) as u8, (start / 6 % 6) as u8, (start % 6) as u8];
            let s = plug.at(pos).unwrap();
            let ccc = encipher_text(&s, "CCC").unwrap().0;
            let aaa = encipher_text(&s, "AAA").unwrap().0;
            // scrambler output for input A (the plugged C), then re-plugged
            let inner = encipher_text(&bare.at(pos).unwrap(), "AAA").unwrap().0;
            let swap = |c: char| match c {
                'A' => 'C',
                'C' => 'A',
                'S' => 'O',
                'O' => 'S',
                x => x,
            };
            assert_eq!(ccc, inner.chars().map(swap).collect::<String>());
            let inner_c = encipher_text(&bare.at(pos).unwrap(), "CCC").unwrap().0;
            assert_eq!(aaa, inner_c.chars().map(swap).collect::<String>());
            assert_eq!(a.encode(&aaa).unwrap().len(), 3);
        }
    }

    #[test]
    fn step_after_matches_an_earlier_start() {
        let before = machine(["II", "IV", "I"], [1, 2, 3], "QW ER");
        let after = Arc::new((*before).clone().with_step_after(true));
        let s = before.at([5, 6, 7]).unwrap();
        let t = after.at(step(&s).positions()).unwrap();
        let text = Alphabet::latin().encode("THEQUICKBROWNFOX").unwrap();
        assert_eq!(encipher_message(&s, &text).unwrap().0, encipher_message(&t, &text).unwrap().0);
    }

    #[test]
    fn empty_message_leaves_state() {
        let cfg = machine(["I", "II", "III"], [0; 3], "");
        let s = cfg.at([1, 2, 3]).unwrap();
        let (out, next) = encipher_message(&s, &[]).unwrap();
        assert!(out.is_empty());
        assert_eq!(next, s);
    }

    #[test]
    fn letter_outside_alphabet() {
        let s = toy("").at([0; 3]).unwrap();
        assert!(encipher_letter(&s, 6).is_err());
        assert!(matches!(
            encipher_text(&s, "ACB"),
            Err(Error::LetterOutsideAlphabet { letter: 'B', position: 2 })
        ));
    }

    #[test]
    fn alphabet_repeats_after_full_period() {
        let cfg = machine(["I", "II", "III"], [0; 3], "AB CD");
        let s = cfg.at([0, 0, 0]).unwrap();
        let mut t = s.clone();
        for _ in 0..17576 {
            t = step(&t);
        }
        // letter k+17576 of a long message sees the same alphabet as letter k
        let mut a = s;
        for _ in 0..5 {
            assert_eq!(cipher_alphabet_at(&a), cipher_alphabet_at(&t));
            a = step(&a);
            t = step(&t);
        }
    }

    fn arb_state() -> impl Strategy<Value = MachineState> {
        let names = ["I", "II", "III", "IV", "V"];
        (
            Just((0..5usize).collect::<Vec<_>>()).prop_shuffle(),
            prop::array::uniform3(0u8..26),
            prop::array::uniform3(0u8..26),
            Just((0..26u8).collect::<Vec<_>>()).prop_shuffle(),
            0usize..=13,
        )
            .prop_map(move |(order, rings, pos, letters, k)| {
                let plugs: Vec<String> = letters
                    .chunks(2)
                    .take(k)
                    .map(|p| Alphabet::latin().decode(p))
                    .collect();
                let cfg = machine(
                    [names[order[0]], names[order[1]], names[order[2]]],
                    rings,
                    &plugs.join(" "),
                );
                cfg.at(pos).unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn reciprocity_and_no_self_encipherment(s in arb_state(), msg in prop::collection::vec(0u8..26, 1..60)) {
            let (c, _) = encipher_message(&s, &msg).unwrap();
            for (x, y) in msg.iter().zip(&c) {
                prop_assert_ne!(x, y);
            }
            let (back, _) = encipher_message(&s, &c).unwrap();
            prop_assert_eq!(back, msg);
        }

        #[test]
        fn alphabet_matches_single_keypresses(s in arb_state()) {
            let alpha = cipher_alphabet_at(&s);
            prop_assert!(alpha.is_fixed_point_free_involution());
            for x in 0..26u8 {
                prop_assert_eq!(encipher_letter(&s, x).unwrap().0, alpha.apply(x));
            }
            // the plugboard conjugates the scrambler: undoing it on both sides
            let cfg = s.config();
            let plug = cfg.plugboard.map();
            let inner = plug.after(&alpha).after(plug);
            prop_assert_eq!(inner, cfg.scrambler(cfg.step_positions(s.positions())));
        }

        #[test]
        fn stepping_leaves_rings_and_plugs(s in arb_state()) {
            let t = step(&s);
            prop_assert_eq!(&t.config().rings, &s.config().rings);
            prop_assert_eq!(&t.config().plugboard, &s.config().plugboard);
        }

        #[test]
        fn ring_and_position_move_together(s in arb_state(), rotor in 0usize..3, msg in prop::collection::vec(0u8..26, 1..40)) {
            let cfg = s.config();
            let mut moved = (**cfg).clone();
            moved.rings[rotor] = (moved.rings[rotor] + 1) % 26;
            let mut pos = s.positions();
            pos[rotor] = (pos[rotor] + 1) % 26;
            let t = Arc::new(moved).at(pos).unwrap();
            // the scrambler seen through the window is identical
            prop_assert_eq!(cfg.scrambler(s.positions()), t.config().scrambler(t.positions()));
            let a = encipher_message(&s, &msg).unwrap().0;
            let b = encipher_message(&t, &msg).unwrap().0;
            if rotor == 0 {
                // nothing is carried out of the left rotor
                prop_assert_eq!(a, b);
            } else {
                // the turnover moves with the window, so streams agree up to
                // the keypress where one of the two carries
                let agree = first_carry(&s, msg.len()).min(first_carry(&t, msg.len()));
                prop_assert_eq!(&a[..agree], &b[..agree]);
            }
        }
    }

    /// Number of keypresses before either non-right rotor is carried into.
    fn first_carry(s: &MachineState, len: usize) -> usize {
        let cfg = s.config();
        let mut p = s.positions();
        for k in 0..len {
            let q = cfg.step_positions(p);
            if q[0] != p[0] || q[1] != p[1] {
                return k;
            }
            p = q;
        }
        len
    }
}
