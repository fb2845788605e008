//! One simulated day end to end: traffic, Banburismus, Scritchmus, bombe.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::Rng;

use crate::alphabet::Letter;
use crate::banburismus::{score_corpus, PairEvidence, ScoreConfig};
use crate::bombe::{bombe_search, true_setting, BombeOptions, Candidate, Crib, StepSchedule};
use crate::enigma::{Catalogue, ROTORS};
use crate::error::{Error, Result};
use crate::keysheet::{generate_day_traffic, DailyKey, Intercept, PlantedCrib, TrafficModel, TrafficOptions};
use crate::rng::SeedSplitter;
use crate::scritchmus::{deduce, deductions_from_evidence, ScritchConfig, ScritchReport};

#[derive(Clone, Debug)]
pub struct DayConfig {
    pub catalogue: Catalogue,
    pub plug_pairs: usize,
    /// Drawn from the seed when absent.
    pub key: Option<DailyKey>,
}

impl Default for DayConfig {
    fn default() -> Self {
        Self {
            catalogue: Catalogue::historical(),
            plug_pairs: 10,
            key: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CribConfig {
    pub text: String,
    /// Message carrying the crib; drawn from the seed when absent.
    pub message: Option<usize>,
    pub anchor: Option<usize>,
    /// Upper bound for a drawn anchor.
    pub max_anchor: usize,
}

impl Default for CribConfig {
    fn default() -> Self {
        Self {
            text: "WETTERVORHERSAGEBISK".into(),
            message: None,
            anchor: None,
            max_anchor: 40,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct PipelineConfig {
    pub day: DayConfig,
    pub model: TrafficModel,
    /// `crib` is ignored here; see [`PipelineConfig::crib`].
    pub traffic: TrafficOptions,
    pub crib: CribConfig,
    pub score: ScoreConfig,
    pub scritch: ScritchConfig,
    pub bombe: BombeOptions,
    /// Cap on worker threads for every stage, 0 for all cores.
    pub jobs: usize,
}

/// What the analyst was not supposed to know.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Truth {
    pub key: DailyKey,
    pub crib_message: usize,
    pub anchor: usize,
    pub start: [Letter; ROTORS],
    pub schedule: StepSchedule,
}

#[derive(Clone, Debug)]
pub struct PipelineReport {
    pub seed: u64,
    pub truth: Truth,
    pub corpus: Vec<Intercept>,
    pub evidence: Vec<PairEvidence>,
    pub scritchmus: ScritchReport,
    pub orders: Vec<[String; ROTORS]>,
    pub candidates: Vec<Candidate>,
    /// Rank of the true setting among the candidates.
    pub truth_rank: Option<usize>,
    pub shortlist_ok: bool,
    pub success: bool,
    /// Wall time per stage. Not part of [`PipelineReport::to_text`].
    pub timing: Vec<(&'static str, Duration)>,
    alphabet: crate::alphabet::Alphabet,
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        e @ Error::Stage { .. } => e,
        e => Error::Stage {
            stage: name,
            cause: e.to_string(),
        },
    })
}

pub fn run_pipeline(config: &PipelineConfig, seed: u64) -> Result<PipelineReport> {
    let seeds = SeedSplitter::new(seed);
    let cat = &config.day.catalogue;
    let a = cat.alphabet();
    let n = a.len();
    let mut timing = Vec::new();

    let clock = Instant::now();
    let key = match &config.day.key {
        Some(k) => k.clone(),
        None => stage("traffic", DailyKey::random(cat, config.day.plug_pairs, &mut seeds.stream("daily-key")))?,
    };
    let count = config.traffic.count;
    let mut crib_rng = seeds.stream("crib");
    let crib_message = config.crib.message.unwrap_or_else(|| crib_rng.gen_range(0..count.max(1)));
    let anchor = config
        .crib
        .anchor
        .unwrap_or_else(|| crib_rng.gen_range(0..=config.crib.max_anchor));
    let (corpus, truth_keys) = if count == 0 {
        (Vec::new(), Vec::new())
    } else {
        if crib_message >= count {
            return Err(Error::Stage {
                stage: "traffic",
                cause: format!("crib message {crib_message} of {count}"),
            });
        }
        let options = TrafficOptions {
            crib: Some(PlantedCrib {
                text: config.crib.text.clone(),
                anchor,
                message: crib_message,
            }),
            ..config.traffic.clone()
        };
        let day = stage(
            "traffic",
            generate_day_traffic(&key, cat, &config.model, &options, &seeds.child("traffic")),
        )?;
        let keys: Vec<String> = day.truth.into_iter().map(|t| t.message_key).collect();
        (day.intercepts, keys)
    };
    timing.push(("traffic", clock.elapsed()));

    let clock = Instant::now();
    if corpus.is_empty() {
        return Err(Error::Stage {
            stage: "banburismus",
            cause: "no messages to score".into(),
        });
    }
    let evidence = stage("banburismus", score_corpus(&corpus, &config.score, config.jobs))?;
    timing.push(("banburismus", clock.elapsed()));

    let clock = Instant::now();
    let deductions = stage(
        "scritchmus",
        deductions_from_evidence(&corpus, &evidence, config.score.malus.as_ref(), a),
    )?;
    let scritchmus = deduce(&deductions, cat.rotors(), n, &config.scritch);
    timing.push(("scritchmus", clock.elapsed()));

    let clock = Instant::now();
    let crib = stage(
        "bombe",
        Crib::from_intercept(a, &config.crib.text, &corpus[crib_message].body, anchor),
    )?;
    let orders: Vec<[String; ROTORS]> = cat
        .rotor_orders()
        .into_iter()
        .filter(|o| scritchmus.shortlist.iter().any(|s| s == o[2].name()))
        .map(|o| std::array::from_fn(|i| o[i].name().to_string()))
        .collect();
    let bombe_options = BombeOptions {
        jobs: config.jobs,
        ..config.bombe.clone()
    };
    let candidates = stage("bombe", bombe_search(&crib, cat, &orders, &bombe_options))?;
    timing.push(("bombe", clock.elapsed()));

    let rotors = stage("bombe", key.machine(cat))?.rotors.clone();
    let message_key = stage("bombe", a.encode(&truth_keys[crib_message]))?;
    let (start, schedule) = true_setting(
        &rotors,
        key.ringstellung,
        [message_key[0], message_key[1], message_key[2]],
        anchor,
        crib.len(),
        n,
    );
    let truth_rank = candidates
        .iter()
        .position(|c| c.order == key.walzenlage && c.start == start && c.schedule == schedule);
    let shortlist_ok = scritchmus.shortlist.contains(&key.walzenlage[2]);
    Ok(PipelineReport {
        seed,
        truth: Truth {
            key,
            crib_message,
            anchor,
            start,
            schedule,
        },
        corpus,
        evidence,
        scritchmus,
        orders,
        candidates,
        truth_rank,
        shortlist_ok,
        success: shortlist_ok && truth_rank.is_some(),
        timing,
        alphabet: a.clone(),
    })
}

/// Lines shown for long lists.
const SHOW: usize = 10;

impl PipelineReport {
    /// The deterministic report: identical for identical config and seed.
    pub fn to_text(&self) -> String {
        let a = &self.alphabet;
        let mut o = String::new();
        writeln!(o, "seed\t{}", self.seed).unwrap();
        writeln!(o, "messages\t{}", self.corpus.len()).unwrap();
        writeln!(o, "pairs\t{}", self.evidence.len()).unwrap();
        let mut best: Vec<(f64, String)> = self
            .evidence
            .iter()
            .filter_map(|p| {
                p.best().map(|e| {
                    let label = format!("{}+{}", self.corpus[p.first].label(), self.corpus[p.second].label());
                    (e.weight.0, format!("{label}\t{}\t{:.2}", e.count.shift, e.weight.0))
                })
            })
            .collect();
        best.sort_by(|x, y| y.0.total_cmp(&x.0).then_with(|| x.1.cmp(&y.1)));
        for (_, line) in best.iter().take(SHOW) {
            writeln!(o, "evidence\t{line}").unwrap();
        }
        let s = &self.scritchmus;
        writeln!(o, "deductions\t{}", s.chain_set.chains.iter().map(|c| c.deductions().len()).sum::<usize>()).unwrap();
        writeln!(o, "dropped\t{}", s.chain_set.dropped.len()).unwrap();
        for c in &s.enumeration.chains {
            writeln!(o, "chain\t{}\t{:.2}", c.render(a), c.weight()).unwrap();
        }
        writeln!(
            o,
            "alphabets\t{}{}",
            s.enumeration.solutions.len(),
            if s.enumeration.truncated { " (truncated)" } else { "" }
        )
        .unwrap();
        for sol in s.enumeration.solutions.iter().take(SHOW) {
            writeln!(o, "alphabet\t{}", sol.hypothesis.render(a)).unwrap();
        }
        for d in &s.retracted {
            writeln!(o, "retracted\t{}\t{:.2}", d.render(a), d.weight.0).unwrap();
        }
        writeln!(o, "shortlist\t{}", s.shortlist.join(",")).unwrap();
        writeln!(o, "orders\t{}", self.orders.len()).unwrap();
        writeln!(o, "candidates\t{}", self.candidates.len()).unwrap();
        for c in self.candidates.iter().take(SHOW) {
            writeln!(o, "candidate\t{}", c.render(a)).unwrap();
        }
        let t = &self.truth;
        writeln!(o, "true order\t{}", t.key.walzenlage.join("-")).unwrap();
        writeln!(o, "true start\t{}\t{}", a.decode(&t.start), t.schedule.render()).unwrap();
        writeln!(o, "crib\tmessage {} anchor {}", self.corpus[t.crib_message].id, t.anchor).unwrap();
        let rank = self.truth_rank.map_or("-".to_string(), |r| (r + 1).to_string());
        writeln!(o, "truth rank\t{rank}").unwrap();
        writeln!(o, "shortlist correct\t{}", self.shortlist_ok).unwrap();
        writeln!(o, "success\t{}", self.success).unwrap();
        o
    }

    /// Stage timings, one per line.
    pub fn timing_text(&self) -> String {
        self.timing
            .iter()
            .map(|(s, d)| format!("time\t{s}\t{:.3}s\n", d.as_secs_f64()))
            .collect()
    }
}
