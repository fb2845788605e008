use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::alphabet::{normalize, Alphabet, Letter};
use crate::classical::FrequencyTable;
use crate::error::{Error, Result};
use crate::rng::SeedSplitter;

use super::{DailyKey, Intercept, Station};
use crate::enigma::Catalogue;

pub const DEFAULT_KAPPA: f64 = 1.0 / 17.0;

#[derive(Clone, Debug)]
pub enum TrafficSource {
    /// Independent letters drawn from a distribution.
    Letters(FrequencyTable),
    /// Windows cut from a prepared text, see [`prepare_plaintext`].
    Corpus(String),
}

#[derive(Clone, Debug)]
pub struct TrafficModel {
    pub source: TrafficSource,
    pub coincidence_target: f64,
}

impl TrafficModel {
    /// The Italian table reshaped so that two letters agree with probability
    /// `kappa`.
    pub fn fitted(kappa: f64) -> Result<Self> {
        Self::fit(&FrequencyTable::italian(), kappa)
    }

    /// Mixes `base` with the uniform distribution (to lower the coincidence
    /// rate) or with a point mass on its top letter (to raise it) until
    /// `sum p^2 = kappa`.
    pub fn fit(base: &FrequencyTable, kappa: f64) -> Result<Self> {
        let n = base.alphabet().len() as f64;
        if !(kappa > 1.0 / n && kappa <= 1.0) {
            return Err(Error::InvalidModel(format!("coincidence target {kappa} outside (1/{n}, 1]")));
        }
        let b = base.entries();
        let own = base.coincidence_rate();
        let weights: Vec<f64> = if kappa <= own {
            // sum p^2 = lambda^2 (own - 1/n) + 1/n
            let lambda = ((kappa - 1.0 / n) / (own - 1.0 / n)).sqrt();
            b.iter().map(|p| lambda * p + (1.0 - lambda) / n).collect()
        } else {
            let top = (0..b.len()).max_by(|&i, &j| b[i].total_cmp(&b[j])).unwrap();
            let mix = |mu: f64| -> Vec<f64> {
                b.iter()
                    .enumerate()
                    .map(|(i, p)| (1.0 - mu) * p + if i == top { mu } else { 0.0 })
                    .collect()
            };
            let rate = |v: &[f64]| v.iter().map(|p| p * p).sum::<f64>();
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..200 {
                let mid = (lo + hi) / 2.0;
                if rate(&mix(mid)) < kappa {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            mix(hi)
        };
        Ok(Self {
            source: TrafficSource::Letters(FrequencyTable::from_weights(base.alphabet().clone(), weights)?),
            coincidence_target: kappa,
        })
    }

    pub fn corpus(text: &str, kappa: f64) -> Result<Self> {
        let prepared = prepare_plaintext(text);
        if prepared.len() < 2 {
            return Err(Error::InvalidModel("corpus too short".into()));
        }
        Ok(Self {
            source: TrafficSource::Corpus(prepared),
            coincidence_target: kappa,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, alphabet: &Alphabet, len: usize, rng: &mut R) -> Result<Vec<Letter>> {
        match &self.source {
            TrafficSource::Letters(table) => {
                let dist = WeightedIndex::new(table.entries())
                    .map_err(|e| Error::InvalidModel(e.to_string()))?;
                Ok((0..len).map(|_| dist.sample(rng) as Letter).collect())
            }
            TrafficSource::Corpus(text) => {
                let letters = alphabet.encode(text)?;
                let start = rng.gen_range(0..letters.len());
                Ok(letters.iter().cycle().skip(start).take(len).copied().collect())
            }
        }
    }
}

impl Default for TrafficModel {
    fn default() -> Self {
        Self::fitted(DEFAULT_KAPPA).expect("1/17 is reachable from the Italian table")
    }
}

const NUMERALS: [&str; 10] = ["NULL", "EINS", "ZWEI", "DREI", "VIER", "FUENF", "SECHS", "SIEBEN", "ACHT", "NEUN"];

/// Operator conventions for free text: digits spelled out, word breaks as X,
/// umlauts expanded, everything else dropped.
pub fn prepare_plaintext(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for c in text.chars() {
        let piece: Option<String> = match c {
            'a'..='z' | 'A'..='Z' => Some(c.to_ascii_uppercase().to_string()),
            '0'..='9' => Some(NUMERALS[(c as u8 - b'0') as usize].to_string()),
            'ä' | 'Ä' => Some("AE".into()),
            'ö' | 'Ö' => Some("OE".into()),
            'ü' | 'Ü' => Some("UE".into()),
            'ß' => Some("SS".into()),
            _ if c.is_whitespace() => {
                pending_space = !out.is_empty();
                None
            }
            _ => None,
        };
        if let Some(p) = piece {
            if pending_space {
                out.push('X');
                pending_space = false;
            }
            out.push_str(&p);
        }
    }
    normalize(&out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LengthDistribution {
    Fixed(usize),
    /// Inclusive bounds.
    Uniform { min: usize, max: usize },
}

impl LengthDistribution {
    pub fn around(mean: usize, spread: usize) -> Self {
        Self::Uniform {
            min: mean.saturating_sub(spread).max(1),
            max: mean + spread,
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match *self {
            Self::Fixed(n) => n,
            Self::Uniform { min, max } => rng.gen_range(min..=max),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlantedCrib {
    pub text: String,
    /// Letter offset of the crib inside the chosen message.
    pub anchor: usize,
    /// Index of the message that carries it.
    pub message: usize,
}

#[derive(Clone, Debug)]
pub struct TrafficOptions {
    pub count: usize,
    pub lengths: LengthDistribution,
    /// Fraction of message keys that reuse the day's two-letter prefix.
    pub clustering: f64,
    pub crib: Option<PlantedCrib>,
}

impl Default for TrafficOptions {
    fn default() -> Self {
        Self {
            count: 200,
            lengths: LengthDistribution::around(180, 30),
            clustering: 0.3,
            crib: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MessageTruth {
    pub message_key: String,
    pub plaintext: String,
}

#[derive(Clone, Debug)]
pub struct DayTraffic {
    pub intercepts: Vec<Intercept>,
    pub truth: Vec<MessageTruth>,
    /// The shared two-letter prefix of the clustered keys.
    pub prefix: String,
}

/// Enciphers `options.count` messages under `daily`. Message `i` draws from
/// its own substream, so any message can be regenerated alone.
pub fn generate_day_traffic(
    daily: &DailyKey,
    catalogue: &Catalogue,
    model: &TrafficModel,
    options: &TrafficOptions,
    seeds: &SeedSplitter,
) -> Result<DayTraffic> {
    if options.count == 0 {
        return Err(Error::InvalidConfig("message count must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&options.clustering) {
        return Err(Error::InvalidConfig(format!("clustering fraction {}", options.clustering)));
    }
    let station = Station::new(daily.clone(), catalogue)?;
    let alphabet = catalogue.alphabet();
    let n = alphabet.len();
    let mut day_rng = seeds.stream("prefix");
    let prefix: Vec<Letter> = (0..2).map(|_| day_rng.gen_range(0..n) as Letter).collect();

    let mut intercepts = Vec::with_capacity(options.count);
    let mut truth = Vec::with_capacity(options.count);
    for i in 0..options.count {
        let mut rng = seeds.child("message").stream(&i.to_string());
        let mut key: Vec<Letter> = (0..3).map(|_| rng.gen_range(0..n) as Letter).collect();
        if rng.gen_bool(options.clustering) {
            key[..2].copy_from_slice(&prefix);
        }
        let len = options.lengths.sample(&mut rng).max(1);
        let mut plain = model.sample(alphabet, len, &mut rng)?;
        if let Some(crib) = options.crib.as_ref().filter(|c| c.message == i) {
            let letters = alphabet.encode(&normalize(&crib.text))?;
            let end = crib.anchor + letters.len();
            if plain.len() < end {
                let extra = model.sample(alphabet, end - plain.len(), &mut rng)?;
                plain.extend(extra);
            }
            plain[crib.anchor..end].copy_from_slice(&letters);
        }
        let message_key = alphabet.decode(&key);
        let plaintext = alphabet.decode(&plain);
        let mut m = station.transmit(&format!("{:03}", i + 1), &message_key, &plaintext)?;
        let minutes = i * 1440 / options.count;
        m.timestamp = Some(format!("{:02}{:02}", minutes / 60, minutes % 60));
        intercepts.push(m);
        truth.push(MessageTruth { message_key, plaintext });
    }
    Ok(DayTraffic {
        intercepts,
        truth,
        prefix: alphabet.decode(&prefix),
    })
}
