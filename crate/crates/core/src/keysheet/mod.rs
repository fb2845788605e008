//! Daily key sheets, the indicator procedure, and intercept corpora.

mod traffic;

pub use traffic::{
    generate_day_traffic, prepare_plaintext, DayTraffic, LengthDistribution, MessageTruth,
    PlantedCrib, TrafficModel, TrafficOptions, TrafficSource,
};

use std::fmt::Write as _;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::alphabet::{normalize, Alphabet, Letter};
use crate::enigma::{encipher_message, parse_trigram, Catalogue, MachineConfig, MachineState, Plugboard, ROTORS};
use crate::error::{Error, Result};

pub const DEFAULT_REFLECTOR: &str = "UKW-B";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DailyKey {
    /// Rotor names, left to right.
    pub walzenlage: [String; ROTORS],
    pub ringstellung: [Letter; ROTORS],
    pub grundstellung: [Letter; ROTORS],
    pub steckerverbindungen: Plugboard,
    pub reflector: String,
    /// Encipher the message key twice into a six-letter indicator.
    pub doubled: bool,
}

impl DailyKey {
    /// Reads the `key: value` sheet format. Unknown keys are errors.
    pub fn parse(text: &str, catalogue: &Catalogue) -> Result<Self> {
        let alphabet = catalogue.alphabet();
        let mut rotors = None;
        let mut rings = None;
        let mut grund = None;
        let mut plugs = None;
        let mut reflector = DEFAULT_REFLECTOR.to_string();
        let mut doubled = false;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once(':')
                .ok_or_else(|| Error::parse(line_no, "expected `key: value`"))?;
            let value = value.trim();
            let err = |e: Error| Error::parse(line_no, e.to_string());
            match key.trim() {
                "rotors" => {
                    let names: Vec<&str> = value.split_whitespace().collect();
                    let names: [&str; ROTORS] = names
                        .try_into()
                        .map_err(|_| Error::parse(line_no, format!("expected {ROTORS} rotor names")))?;
                    for (k, n) in names.iter().enumerate() {
                        catalogue.rotor(n).map_err(err)?;
                        if names[..k].contains(n) {
                            return Err(Error::parse(line_no, format!("rotor {n} used twice")));
                        }
                    }
                    rotors = Some(names.map(str::to_string));
                }
                "rings" => {
                    let joined: String = value.split_whitespace().collect();
                    rings = Some(parse_trigram(alphabet, &joined).map_err(err)?);
                }
                "grund" => grund = Some(parse_trigram(alphabet, value).map_err(err)?),
                "plugs" => plugs = Some(Plugboard::parse(alphabet, value).map_err(err)?),
                "reflector" => {
                    catalogue.reflector(value).map_err(err)?;
                    reflector = value.to_string();
                }
                "indicator" => {
                    doubled = match value {
                        "single" => false,
                        "doubled" => true,
                        other => return Err(Error::parse(line_no, format!("unknown indicator procedure {other:?}"))),
                    }
                }
                other => return Err(Error::parse(line_no, format!("unknown field {other:?}"))),
            }
        }
        let missing = |f: &str| Error::InvalidConfig(format!("key sheet has no `{f}` line"));
        Ok(Self {
            walzenlage: rotors.ok_or_else(|| missing("rotors"))?,
            ringstellung: rings.ok_or_else(|| missing("rings"))?,
            grundstellung: grund.ok_or_else(|| missing("grund"))?,
            steckerverbindungen: plugs.unwrap_or_else(|| Plugboard::identity(alphabet.len())),
            reflector,
            doubled,
        })
    }

    pub fn to_text(&self, alphabet: &Alphabet) -> String {
        let mut out = String::new();
        writeln!(out, "rotors: {}", self.walzenlage.join(" ")).unwrap();
        let rings: Vec<String> = self.ringstellung.iter().map(|&r| alphabet.symbol(r).to_string()).collect();
        writeln!(out, "rings: {}", rings.join(" ")).unwrap();
        writeln!(out, "grund: {}", alphabet.decode(&self.grundstellung)).unwrap();
        writeln!(out, "plugs: {}", self.steckerverbindungen.render(alphabet)).unwrap();
        writeln!(out, "reflector: {}", self.reflector).unwrap();
        if self.doubled {
            writeln!(out, "indicator: doubled").unwrap();
        }
        out
    }

    pub fn machine(&self, catalogue: &Catalogue) -> Result<Arc<MachineConfig>> {
        let rotors = [
            catalogue.rotor(&self.walzenlage[0])?,
            catalogue.rotor(&self.walzenlage[1])?,
            catalogue.rotor(&self.walzenlage[2])?,
        ];
        let cfg = MachineConfig::new(
            catalogue.alphabet().clone(),
            rotors,
            self.ringstellung,
            catalogue.reflector(&self.reflector)?,
            self.steckerverbindungen.clone(),
        )?;
        Ok(Arc::new(cfg))
    }

    /// A uniformly random key: distinct rotors, rings, ground setting and
    /// `plug_pairs` cables.
    pub fn random<R: Rng + ?Sized>(catalogue: &Catalogue, plug_pairs: usize, rng: &mut R) -> Result<Self> {
        let n = catalogue.alphabet().len();
        if catalogue.rotors().len() < ROTORS {
            return Err(Error::InvalidConfig("catalogue has fewer than three rotors".into()));
        }
        if 2 * plug_pairs > n {
            return Err(Error::InvalidConfig(format!("{plug_pairs} plug pairs on {n} letters")));
        }
        let mut names: Vec<String> = catalogue.rotors().iter().map(|r| r.name().to_string()).collect();
        names.shuffle(rng);
        let mut letters: Vec<Letter> = (0..n as Letter).collect();
        letters.shuffle(rng);
        let pairs: Vec<(Letter, Letter)> = letters.chunks(2).take(plug_pairs).map(|c| (c[0], c[1])).collect();
        let reflector = catalogue
            .reflector(DEFAULT_REFLECTOR)
            .or_else(|_| catalogue.reflectors().first().cloned().ok_or(Error::UnknownReflector(String::new())))?
            .name()
            .to_string();
        Ok(Self {
            walzenlage: [names[0].clone(), names[1].clone(), names[2].clone()],
            ringstellung: std::array::from_fn(|_| rng.gen_range(0..n) as Letter),
            grundstellung: std::array::from_fn(|_| rng.gen_range(0..n) as Letter),
            steckerverbindungen: Plugboard::new(n, &pairs)?,
            reflector,
            doubled: false,
        })
    }
}

/// One captured message.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Intercept {
    pub id: String,
    /// Three letters, or six under the doubled procedure.
    pub indicator: String,
    pub body: String,
    pub timestamp: Option<String>,
}

impl Intercept {
    pub fn doubled(&self) -> bool {
        self.indicator.chars().count() == 6
    }

    /// `ID:INDICATOR`, the label used in pair ids.
    pub fn label(&self) -> String {
        format!("{}:{}", self.id, self.indicator)
    }
}

/// A machine keyed for one day, on both ends of the link.
#[derive(Clone, Debug)]
pub struct Station {
    daily: DailyKey,
    machine: Arc<MachineConfig>,
}

impl Station {
    pub fn new(daily: DailyKey, catalogue: &Catalogue) -> Result<Self> {
        let machine = daily.machine(catalogue)?;
        Ok(Self { daily, machine })
    }

    pub fn daily(&self) -> &DailyKey {
        &self.daily
    }

    pub fn machine(&self) -> &Arc<MachineConfig> {
        &self.machine
    }

    fn alphabet(&self) -> &Alphabet {
        &self.machine.alphabet
    }

    fn at(&self, positions: [Letter; ROTORS]) -> MachineState {
        MachineState::new(self.machine.clone(), positions).expect("positions come from the alphabet")
    }

    pub fn transmit(&self, id: &str, message_key: &str, plaintext: &str) -> Result<Intercept> {
        let key = parse_trigram(self.alphabet(), message_key)?;
        let plain = self.alphabet().encode(&normalize(plaintext))?;
        if plain.is_empty() {
            return Err(Error::EmptyMessage);
        }
        let mut indicator_plain = key.to_vec();
        if self.daily.doubled {
            indicator_plain.extend_from_slice(&key);
        }
        let (indicator, _) = encipher_message(&self.at(self.daily.grundstellung), &indicator_plain)?;
        let (body, _) = encipher_message(&self.at(key), &plain)?;
        Ok(Intercept {
            id: id.to_string(),
            indicator: self.alphabet().decode(&indicator),
            body: self.alphabet().decode(&body),
            timestamp: None,
        })
    }

    /// Recovers the message key from the indicator.
    pub fn message_key(&self, intercept: &Intercept) -> Result<String> {
        let ind = self.alphabet().encode(&intercept.indicator)?;
        if ind.len() != 3 && ind.len() != 6 {
            return Err(Error::BadTrigram(intercept.indicator.clone()));
        }
        let (key, _) = encipher_message(&self.at(self.daily.grundstellung), &ind)?;
        if key.len() == 6 && key[..3] != key[3..] {
            return Err(Error::IndicatorMismatch(intercept.indicator.clone()));
        }
        Ok(self.alphabet().decode(&key[..3]))
    }

    /// No integrity check: a tampered body deciphers letter by letter.
    pub fn receive(&self, intercept: &Intercept) -> Result<String> {
        let key = parse_trigram(self.alphabet(), &self.message_key(intercept)?)?;
        let body = self.alphabet().encode(&normalize(&intercept.body))?;
        let (plain, _) = encipher_message(&self.at(key), &body)?;
        Ok(self.alphabet().decode(&plain))
    }
}

pub fn transmit(daily: &DailyKey, catalogue: &Catalogue, message_key: &str, plaintext: &str) -> Result<Intercept> {
    Station::new(daily.clone(), catalogue)?.transmit("0", message_key, plaintext)
}

pub fn receive(daily: &DailyKey, catalogue: &Catalogue, intercept: &Intercept) -> Result<String> {
    Station::new(daily.clone(), catalogue)?.receive(intercept)
}

fn groups_of_five(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    chars
        .chunks(5)
        .map(|c| c.iter().collect::<String>())
        .collect::<Vec<_>>()
        .join(" ")
}

/// `ID<TAB>INDICATOR<TAB>CIPHERTEXT[<TAB>TIMESTAMP]`, ciphertext in groups
/// of five.
pub fn store_corpus(intercepts: &[Intercept]) -> String {
    let mut out = String::new();
    for m in intercepts {
        write!(out, "{}\t{}\t{}", m.id, m.indicator, groups_of_five(&m.body)).unwrap();
        if let Some(t) = &m.timestamp {
            write!(out, "\t{t}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn load_corpus(text: &str) -> Result<Vec<Intercept>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 3 || fields.len() > 4 {
            return Err(Error::parse(i + 1, format!("expected 3 or 4 tab-separated fields, got {}", fields.len())));
        }
        let id = fields[0].trim();
        if id.is_empty() {
            return Err(Error::parse(i + 1, "empty id"));
        }
        let indicator = fields[1].trim().to_uppercase();
        if !(indicator.len() == 3 || indicator.len() == 6) || !indicator.chars().all(|c| c.is_ascii_uppercase()) {
            return Err(Error::parse(i + 1, format!("bad indicator {:?}", fields[1])));
        }
        let body: String = fields[2].split_whitespace().collect::<String>().to_uppercase();
        if body.is_empty() {
            return Err(Error::parse(i + 1, "empty ciphertext"));
        }
        if let Some(c) = body.chars().find(|c| !c.is_ascii_uppercase()) {
            return Err(Error::parse(i + 1, format!("ciphertext contains {c:?}")));
        }
        out.push(Intercept {
            id: id.to_string(),
            indicator,
            body,
            timestamp: fields.get(3).map(|t| t.trim().to_string()).filter(|t| !t.is_empty()),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const SHEET: &str = "rotors: II V III\nrings: D Q X\ngrund: QXT\nplugs: AB CD EF GH IJ KL MN OP QR ST\n";

    fn day() -> (DailyKey, Catalogue) {
        let cat = Catalogue::historical();
        (DailyKey::parse(SHEET, &cat).unwrap(), cat)
    }

    #[test]
    fn sheet_parse_and_round_trip() {
        let (k, cat) = day();
        assert_eq!(k.walzenlage, ["II", "V", "III"].map(String::from));
        assert_eq!(k.ringstellung, [3, 16, 23]);
        assert_eq!(k.grundstellung, [16, 23, 19]);
        assert_eq!(k.steckerverbindungen.pairs().len(), 10);
        let text = k.to_text(cat.alphabet());
        assert_eq!(DailyKey::parse(&text, &cat).unwrap(), k);
        assert_eq!(DailyKey::parse(&text, &cat).unwrap().to_text(cat.alphabet()), text);
    }

    #[test]
    fn sheet_errors_carry_line_numbers() {
        let cat = Catalogue::historical();
        let bad = "rotors: II VI III\nrings: D Q X\ngrund: QXT\n";
        assert!(matches!(DailyKey::parse(bad, &cat), Err(Error::Parse { line: 1, .. })));
        let bad = "rotors: II V III\nrings: D Q X\ngrund: QXT\nplugs: AB BC\n";
        assert!(matches!(DailyKey::parse(bad, &cat), Err(Error::Parse { line: 4, .. })));
        let bad = "rotors: II V II\nrings: D Q X\ngrund: QXT\n";
        assert!(DailyKey::parse(bad, &cat).is_err());
        let bad = "rotors: II V III\nrings: D Q X\ngrund: QX\n";
        assert!(matches!(DailyKey::parse(bad, &cat), Err(Error::Parse { line: 3, .. })));
        assert!(DailyKey::parse("rotors: I II III\n", &cat).is_err());
    }

    #[test]
    fn shared_key_prefix_gives_shared_indicator_prefix() {
        let (k, cat) = day();
        let st = Station::new(k, &cat).unwrap();
        let a = st.transmit("1", "PMA", "ANGRIFF").unwrap();
        let b = st.transmit("2", "PMZ", "RUECKZUG").unwrap();
        assert_eq!(a.indicator[..2], b.indicator[..2]);
        assert_ne!(a.indicator[2..], b.indicator[2..]);
    }

    #[test]
    fn doubled_indicator() {
        let (mut k, cat) = day();
        k.doubled = true;
        let st = Station::new(k.clone(), &cat).unwrap();
        let m = st.transmit("1", "XYZ", "WETTER").unwrap();
        assert_eq!(m.indicator.len(), 6);
        assert!(m.doubled());
        let (plain, _) = encipher_message(
            &st.at(k.grundstellung),
            &cat.alphabet().encode(&m.indicator).unwrap(),
        )
        .unwrap();
        assert_eq!(cat.alphabet().decode(&plain), "XYZXYZ");
        assert_eq!(st.receive(&m).unwrap(), "WETTER");

        let mut tampered = m.clone();
        tampered.indicator.replace_range(5..6, if &m.indicator[5..] == "A" { "B" } else { "A" });
        assert!(matches!(st.receive(&tampered), Err(Error::IndicatorMismatch(_))));
    }

    #[test]
    fn wrong_key_breaks_doubled_indicator() {
        // A wrong day key almost never deciphers the indicator into two equal halves.
        let (mut k, cat) = day();
        k.doubled = true;
        let m = Station::new(k, &cat).unwrap().transmit("1", "XYZ", "WETTER").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut matched = 0;
        for _ in 0..500 {
            let mut wrong = DailyKey::random(&cat, 10, &mut rng).unwrap();
            wrong.doubled = true;
            if Station::new(wrong, &cat).unwrap().receive(&m).is_ok() {
                matched += 1;
            }
        }
        // a random key matches with probability about 1/26^3
        assert!(matched <= 2, "{matched}");
    }

    #[test]
    fn tampered_body_still_deciphers() {
        let (k, cat) = day();
        let st = Station::new(k, &cat).unwrap();
        let mut m = st.transmit("1", "ABC", "KEINEBESONDERENEREIGNISSE").unwrap();
        let first = if m.body.starts_with('A') { "B" } else { "A" };
        m.body.replace_range(0..1, first);
        let p = st.receive(&m).unwrap();
        assert_ne!(&p[..1], "K");
        assert_eq!(&p[1..], "EINEBESONDERENEREIGNISSE");
    }

    #[test]
    fn corpus_round_trip_and_errors() {
        let (k, cat) = day();
        let st = Station::new(k, &cat).unwrap();
        let mut a = st.transmit("A1", "PMG", "TZUYJZSLAPEIXM").unwrap();
        a.timestamp = Some("0915".into());
        let b = st.transmit("A2", "QQQ", "X").unwrap();
        let text = store_corpus(&[a.clone(), b.clone()]);
        assert!(text.lines().next().unwrap().split('\t').nth(2).unwrap().contains(' '));
        assert_eq!(load_corpus(&text).unwrap(), vec![a, b]);
        assert!(matches!(load_corpus("1\tABC\tXY\n2\tAB\tXY\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(load_corpus("1\tABC\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(load_corpus("1\tABC\tA1B\n"), Err(Error::Parse { line: 1, .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn transmit_receive_round_trip(seed in any::<u64>(), key in "[A-Z]{3}", text in "[A-Z]{1,80}", doubled in any::<bool>()) {
            let cat = Catalogue::historical();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut daily = DailyKey::random(&cat, 10, &mut rng).unwrap();
            daily.doubled = doubled;
            let m = transmit(&daily, &cat, &key, &text).unwrap();
            prop_assert_eq!(receive(&daily, &cat, &m).unwrap(), text);
        }

        #[test]
        fn indicator_prefix_property(seed in any::<u64>(), prefix in "[A-Z]{2}", c in 0u8..26, d in 0u8..26) {
            let cat = Catalogue::historical();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let st = Station::new(DailyKey::random(&cat, 10, &mut rng).unwrap(), &cat).unwrap();
            let k1 = format!("{prefix}{}", (b'A' + c) as char);
            let k2 = format!("{prefix}{}", (b'A' + d) as char);
            let a = st.transmit("1", &k1, "A").unwrap();
            let b = st.transmit("2", &k2, "A").unwrap();
            prop_assert_eq!(&a.indicator[..2], &b.indicator[..2]);
            prop_assert_eq!(a.indicator[2..] == b.indicator[2..], c == d);
        }
    }
}
