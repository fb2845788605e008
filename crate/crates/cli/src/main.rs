use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use banbury::alphabet::Alphabet;
use banbury::banburismus::{evidence_tsv, parse_evidence_tsv, score_corpus, RuleRegistry, ScoreConfig};
use banbury::bayes::{coin_trajectory, Weight};
use banbury::bombe::{bombe_search, BombeOptions, Crib, SchedulePolicy, CANDIDATE_HEADER};
use banbury::classical::{kasiski_candidates, letter_frequencies, CipherParams, CipherRegistry};
use banbury::enigma::{encipher_text, parse_trigram, Catalogue, MachineState, ROTORS};
use banbury::keysheet::{
    generate_day_traffic, load_corpus, store_corpus, DailyKey, Intercept, LengthDistribution, PlantedCrib, Station,
    TrafficModel, TrafficOptions,
};
use banbury::pipeline::{run_pipeline, PipelineConfig};
use banbury::rng::SeedSplitter;
use banbury::scritchmus::{deduce, deductions_from_rows, report_tsv, Deduction, FilterRegistry, ScritchConfig};

const SEED_VAR: &str = "BANBURY_SEED";

#[derive(Parser)]
#[command(name = "banbury", version, about = "Enigma simulator and Bletchley-style cryptanalysis workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classical ciphers and frequency tools.
    Classical {
        #[command(subcommand)]
        op: ClassicalOp,
    },
    /// Encipher or decipher with a configured machine.
    Enigma {
        #[command(subcommand)]
        op: EnigmaOp,
    },
    /// Synthetic intercept traffic.
    Traffic {
        #[command(subcommand)]
        op: TrafficOp,
    },
    /// Score candidate pairs of a corpus.
    Banburismus {
        #[command(subcommand)]
        op: BanburismusOp,
    },
    /// Chains, alphabets and the right-rotor shortlist.
    Scritchmus {
        #[command(subcommand)]
        op: ScritchmusOp,
    },
    /// Crib search over rotor orders and start positions.
    Bombe {
        #[command(subcommand)]
        op: BombeOp,
    },
    /// Posterior trajectory of the fair-coin experiment.
    Bayes {
        #[command(subcommand)]
        op: BayesOp,
    },
    /// A simulated day, end to end.
    Pipeline {
        #[command(subcommand)]
        op: PipelineOp,
    },
}

#[derive(Subcommand)]
enum ClassicalOp {
    Encipher(CipherArgs),
    Decipher(CipherArgs),
    /// Key-length candidates from repeated n-grams.
    Kasiski {
        #[arg(long, default_value_t = 3)]
        min_ngram: usize,
        text: Option<String>,
    },
    /// Letter frequencies of a text.
    #[command(alias = "freq")]
    Frequencies { text: Option<String> },
    /// Available cipher names.
    List,
}

#[derive(Args)]
struct CipherArgs {
    #[arg(long)]
    cipher: String,
    #[arg(long, allow_hyphen_values = true)]
    key: Option<String>,
    #[arg(long)]
    width: Option<usize>,
    /// Read from stdin when absent.
    text: Option<String>,
}

#[derive(Subcommand)]
enum EnigmaOp {
    Encipher(EnigmaArgs),
    Decipher(EnigmaArgs),
}

#[derive(Args)]
struct MachineArgs {
    /// Key sheet (`rotors:`, `rings:`, `grund:`, `plugs:` lines).
    #[arg(long, conflicts_with_all = ["rotors", "rings", "plugs"])]
    sheet: Option<PathBuf>,
    /// Rotor names, left to right.
    #[arg(long, default_value = "I II III")]
    rotors: String,
    #[arg(long, default_value = "A A A")]
    rings: String,
    #[arg(long, default_value = "")]
    plugs: String,
    #[arg(long, default_value = "UKW-B")]
    reflector: String,
    /// Use the six-letter teaching machine.
    #[arg(long)]
    toy: bool,
}

#[derive(Args)]
struct EnigmaArgs {
    #[command(flatten)]
    machine: MachineArgs,
    /// Window letters at the first keypress.
    #[arg(long, conflicts_with_all = ["message_key", "indicator"])]
    start: Option<String>,
    /// Encipher under the indicator procedure; prints `indicator<TAB>body`.
    #[arg(long, conflicts_with = "indicator")]
    message_key: Option<String>,
    /// Decipher a body sent under this indicator.
    #[arg(long)]
    indicator: Option<String>,
    text: Option<String>,
}

#[derive(Subcommand)]
enum TrafficOp {
    /// One day of traffic as a corpus TSV.
    Generate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, visible_alias = "n", default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 180)]
        mean_length: usize,
        #[arg(long, default_value_t = 30)]
        spread: usize,
        #[arg(long, default_value_t = 1.0 / 17.0)]
        kappa: f64,
        #[arg(long, default_value_t = 0.3)]
        clustering: f64,
        /// Key sheet; drawn from the seed when absent.
        #[arg(long, visible_alias = "day")]
        sheet: Option<PathBuf>,
        #[arg(long)]
        crib: Option<String>,
        #[arg(long, default_value_t = 0)]
        crib_message: usize,
        #[arg(long, default_value_t = 0)]
        crib_anchor: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the day's key sheet.
        #[arg(long)]
        key_out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum BanburismusOp {
    /// Evidence TSV for every pair sharing an indicator prefix.
    Score {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value = "linear")]
        bonus: String,
        #[arg(long, default_value = "turnover")]
        malus: String,
        #[arg(long, default_value_t = 1.0 / 17.0)]
        kappa_lang: f64,
        #[arg(long, default_value_t = 1.0 / 26.0)]
        kappa_rand: f64,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ScritchmusOp {
    Deduce {
        /// Evidence TSV from `banburismus score`.
        #[arg(long, required_unless_present = "deductions")]
        evidence: Option<PathBuf>,
        /// Lines `G=K+4<TAB>weight` instead of evidence.
        #[arg(long, conflicts_with = "evidence")]
        deductions: Option<PathBuf>,
        /// Rotor catalogue TSV, or `historical` / `toy`.
        #[arg(long, default_value = "historical")]
        rotors: String,
        /// Malus the evidence was scored with.
        #[arg(long, default_value = "turnover")]
        malus: String,
        #[arg(long, default_value_t = 7.0)]
        min_weight: f64,
        #[arg(long, default_value = "depth-arcs")]
        filter: String,
        #[arg(long, default_value_t = 10_000)]
        limit: usize,
        #[arg(long, default_value_t = 5)]
        retries: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Schedules {
    All,
    Odometer,
}

#[derive(Subcommand)]
enum BombeOp {
    /// Candidates as TSV.
    Run {
        /// Plain row, cipher row, optional `anchor:` row.
        #[arg(long)]
        crib: PathBuf,
        /// Lines of three rotor names, or a `shortlist<TAB>I,IV` line.
        #[arg(long)]
        orders: PathBuf,
        #[arg(long, default_value = "historical")]
        rotors: String,
        #[arg(long, default_value = "UKW-B")]
        reflector: String,
        #[arg(long, value_enum, default_value_t = Schedules::All)]
        schedules: Schedules,
        /// Known ring settings, e.g. `AAA`; fixes the step schedule.
        #[arg(long, conflicts_with = "schedules")]
        rings: Option<String>,
        #[arg(long)]
        no_diagonal: bool,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Stop after this many work units; resume with the same checkpoint.
        #[arg(long, requires = "checkpoint")]
        max_units: Option<usize>,
    },
}

#[derive(Subcommand)]
enum BayesOp {
    Coin {
        /// `H` and `T` characters.
        #[arg(long)]
        flips: String,
    },
}

#[derive(Subcommand)]
enum PipelineOp {
    Run {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, visible_alias = "n", default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 180)]
        mean_length: usize,
        #[arg(long, default_value = "WETTERVORHERSAGEBISK")]
        crib: String,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Append stage timings.
        #[arg(long)]
        timing: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = String::new();
    match run(cli.command, &mut out) {
        Ok(()) => {
            let mut stdout = io::stdout().lock();
            if stdout.write_all(out.as_bytes()).is_err() {
                return ExitCode::FAILURE;
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

/// `BANBURY_SEED` wins over the flag.
fn seed(flag: u64) -> Result<u64> {
    match std::env::var(SEED_VAR) {
        Ok(v) => v.trim().parse().with_context(|| format!("{SEED_VAR}={v:?} is not an unsigned integer")),
        Err(_) => Ok(flag),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn text_or_stdin(text: Option<String>) -> Result<String> {
    match text {
        Some(t) => Ok(t),
        None => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).context("reading stdin")?;
            Ok(s.trim_end().to_string())
        }
    }
}

fn emit(out: &mut String, dest: Option<&Path>, body: String) -> Result<()> {
    match dest {
        Some(p) => fs::write(p, body).with_context(|| format!("writing {}", p.display())),
        None => {
            out.push_str(&body);
            Ok(())
        }
    }
}

fn catalogue(spec: &str) -> Result<Catalogue> {
    match spec {
        "historical" => Ok(Catalogue::historical()),
        "toy" => Ok(Catalogue::toy()),
        path => Ok(Catalogue::parse(Alphabet::latin(), &read(Path::new(path))?)?),
    }
}

fn daily_key(m: &MachineArgs, cat: &Catalogue) -> Result<DailyKey> {
    let text = match &m.sheet {
        Some(p) => read(p)?,
        None => format!(
            "rotors: {}\nrings: {}\ngrund: {}\nplugs: {}\nreflector: {}\n",
            m.rotors,
            m.rings,
            cat.alphabet().symbol(0).to_string().repeat(ROTORS),
            m.plugs,
            m.reflector
        ),
    };
    Ok(DailyKey::parse(&text, cat)?)
}

fn run(command: Command, out: &mut String) -> Result<()> {
    match command {
        Command::Classical { op } => classical(op, out),
        Command::Enigma { op } => enigma(op, out),
        Command::Traffic { op } => traffic(op, out),
        Command::Banburismus { op } => banburismus(op, out),
        Command::Scritchmus { op } => scritchmus(op, out),
        Command::Bombe { op } => bombe(op, out),
        Command::Bayes {
            op: BayesOp::Coin { flips },
        } => {
            out.push_str("flips\tposterior_fair\n");
            let letters: String = flips.chars().filter(|c| !c.is_whitespace()).collect();
            for (i, p) in coin_trajectory(&letters)?.iter().enumerate() {
                out.push_str(&format!("{}\t{:.12}\n", &letters[..=i], p.value()));
            }
            Ok(())
        }
        Command::Pipeline { op } => pipeline(op, out),
    }
}

fn classical(op: ClassicalOp, out: &mut String) -> Result<()> {
    let registry = CipherRegistry::builtin();
    match op {
        ClassicalOp::Encipher(a) => {
            let c = registry.create(&a.cipher, &CipherParams { key: a.key, width: a.width })?;
            out.push_str(&c.encipher(&text_or_stdin(a.text)?)?);
            out.push('\n');
        }
        ClassicalOp::Decipher(a) => {
            let c = registry.create(&a.cipher, &CipherParams { key: a.key, width: a.width })?;
            out.push_str(&c.decipher(&text_or_stdin(a.text)?)?);
            out.push('\n');
        }
        ClassicalOp::Kasiski { min_ngram, text } => {
            out.push_str("length\tvotes\n");
            for c in kasiski_candidates(&text_or_stdin(text)?, min_ngram)? {
                out.push_str(&format!("{}\t{}\n", c.length, c.votes));
            }
        }
        ClassicalOp::Frequencies { text } => {
            let t = letter_frequencies(&text_or_stdin(text)?)?;
            out.push_str(&t.to_text());
        }
        ClassicalOp::List => {
            for n in registry.names() {
                out.push_str(n);
                out.push('\n');
            }
        }
    }
    Ok(())
}

fn enigma(op: EnigmaOp, out: &mut String) -> Result<()> {
    let (a, decipher) = match op {
        EnigmaOp::Encipher(a) => (a, false),
        EnigmaOp::Decipher(a) => (a, true),
    };
    let cat = if a.machine.toy { Catalogue::toy() } else { Catalogue::historical() };
    let key = daily_key(&a.machine, &cat)?;
    let text = text_or_stdin(a.text)?;
    if let Some(mk) = a.message_key {
        if decipher {
            bail!("--message-key is for enciphering; decipher with --indicator");
        }
        let m = Station::new(key, &cat)?.transmit("1", &mk, &text)?;
        out.push_str(&format!("{}\t{}\n", m.indicator, m.body));
        return Ok(());
    }
    if let Some(ind) = a.indicator {
        let m = Intercept {
            id: "1".into(),
            indicator: ind,
            body: text,
            timestamp: None,
        };
        out.push_str(&Station::new(key, &cat)?.receive(&m)?);
        out.push('\n');
        return Ok(());
    }
    let start = a.start.ok_or_else(|| anyhow!("give --start, --message-key or --indicator"))?;
    let config = key.machine(&cat)?;
    let positions = parse_trigram(cat.alphabet(), &start)?;
    let (body, _) = encipher_text(&MachineState::new(config, positions)?, &text)?;
    out.push_str(&body);
    out.push('\n');
    Ok(())
}

fn traffic(op: TrafficOp, out: &mut String) -> Result<()> {
    let TrafficOp::Generate {
        seed: flag,
        count,
        mean_length,
        spread,
        kappa,
        clustering,
        sheet,
        crib,
        crib_message,
        crib_anchor,
        out: dest,
        key_out,
    } = op;
    let seeds = SeedSplitter::new(seed(flag)?);
    let cat = Catalogue::historical();
    let key = match sheet {
        Some(p) => DailyKey::parse(&read(&p)?, &cat)?,
        None => DailyKey::random(&cat, 10, &mut seeds.stream("daily-key"))?,
    };
    let options = TrafficOptions {
        count,
        lengths: LengthDistribution::around(mean_length, spread),
        clustering,
        crib: crib.map(|text| PlantedCrib {
            text,
            anchor: crib_anchor,
            message: crib_message,
        }),
    };
    let day = generate_day_traffic(&key, &cat, &TrafficModel::fitted(kappa)?, &options, &seeds.child("traffic"))?;
    if let Some(p) = key_out {
        fs::write(&p, key.to_text(cat.alphabet())).with_context(|| format!("writing {}", p.display()))?;
    }
    emit(out, dest.as_deref(), store_corpus(&day.intercepts))
}

fn banburismus(op: BanburismusOp, out: &mut String) -> Result<()> {
    let BanburismusOp::Score {
        corpus,
        bonus,
        malus,
        kappa_lang,
        kappa_rand,
        jobs,
        out: dest,
    } = op;
    let rules = RuleRegistry::builtin();
    let cfg = ScoreConfig {
        kappa_lang,
        kappa_rand,
        bonus: rules.bonus(&bonus)?,
        malus: rules.malus(&malus)?,
        ..ScoreConfig::default()
    };
    let messages = load_corpus(&read(&corpus)?)?;
    if messages.is_empty() {
        bail!("{} holds no messages", corpus.display());
    }
    let evidence = score_corpus(&messages, &cfg, jobs)?;
    emit(out, dest.as_deref(), evidence_tsv(&evidence))
}

fn parse_deductions(text: &str, alphabet: &Alphabet) -> Result<Vec<Deduction>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (rel, w) = line.split_once('\t').unwrap_or((line, "0"));
        let w: f64 = w.trim().parse().with_context(|| format!("line {}: bad weight {w:?}", i + 1))?;
        out.push(Deduction::parse(alphabet, rel, Weight(w)).with_context(|| format!("line {}", i + 1))?);
    }
    Ok(out)
}

fn scritchmus(op: ScritchmusOp, out: &mut String) -> Result<()> {
    let ScritchmusOp::Deduce {
        evidence,
        deductions,
        rotors,
        malus,
        min_weight,
        filter,
        limit,
        retries,
    } = op;
    let cat = catalogue(&rotors)?;
    let a = cat.alphabet();
    let ds = match (evidence, deductions) {
        (Some(p), _) => {
            let rows = parse_evidence_tsv(&read(&p)?)?;
            deductions_from_rows(&rows, RuleRegistry::builtin().malus(&malus)?.as_ref(), a)?
        }
        (None, Some(p)) => parse_deductions(&read(&p)?, a)?,
        (None, None) => bail!("give --evidence or --deductions"),
    };
    let cfg = ScritchConfig {
        min_weight: Weight(min_weight),
        max_retries: retries,
        limit,
        filter: FilterRegistry::builtin().get(&filter)?,
    };
    let report = deduce(&ds, cat.rotors(), a.len(), &cfg);
    out.push_str(&report_tsv(&report, a));
    Ok(())
}

/// Rotor orders from `L M R` lines or `shortlist<TAB>names` lines.
fn parse_orders(text: &str, cat: &Catalogue) -> Result<Vec<[String; ROTORS]>> {
    let mut orders = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("shortlist") {
            let names: Vec<&str> = rest.trim().split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
            for o in cat.rotor_orders() {
                if names.contains(&o[2].name()) {
                    orders.push(std::array::from_fn(|k| o[k].name().to_string()));
                }
            }
            continue;
        }
        let names: Vec<String> = line.split(|c: char| c.is_whitespace() || c == '-').filter(|s| !s.is_empty()).map(String::from).collect();
        let order: [String; ROTORS] = names
            .try_into()
            .map_err(|_| anyhow!("orders line {}: expected {ROTORS} rotor names", i + 1))?;
        for r in &order {
            cat.rotor(r).with_context(|| format!("orders line {}", i + 1))?;
        }
        orders.push(order);
    }
    orders.dedup();
    Ok(orders)
}

fn bombe(op: BombeOp, out: &mut String) -> Result<()> {
    let BombeOp::Run {
        crib,
        orders,
        rotors,
        reflector,
        schedules,
        rings,
        no_diagonal,
        jobs,
        checkpoint,
        max_units,
    } = op;
    let cat = catalogue(&rotors)?;
    let a = cat.alphabet();
    let crib = Crib::parse(a, &read(&crib)?)?;
    let orders = parse_orders(&read(&orders)?, &cat)?;
    let policy = match (rings, schedules) {
        (Some(r), _) => SchedulePolicy::Known(parse_trigram(a, &r)?),
        (None, Schedules::All) => SchedulePolicy::AllTurnovers,
        (None, Schedules::Odometer) => SchedulePolicy::Odometer,
    };
    let options = BombeOptions {
        diagonal: !no_diagonal,
        schedules: policy,
        jobs,
        reflector,
        checkpoint,
        max_units,
    };
    let candidates = bombe_search(&crib, &cat, &orders, &options)?;
    out.push_str(CANDIDATE_HEADER);
    out.push('\n');
    for c in &candidates {
        out.push_str(&c.render(a));
        out.push('\n');
    }
    if max_units.is_some() {
        eprintln!("note: unit limit set; rerun with the same checkpoint to continue");
    }
    Ok(())
}

fn pipeline(op: PipelineOp, out: &mut String) -> Result<()> {
    let PipelineOp::Run {
        seed: flag,
        count,
        mean_length,
        crib,
        jobs,
        timing,
    } = op;
    let mut cfg = PipelineConfig {
        jobs,
        ..PipelineConfig::default()
    };
    cfg.traffic.count = count;
    cfg.traffic.lengths = LengthDistribution::around(mean_length, 30);
    cfg.crib.text = crib;
    let report = run_pipeline(&cfg, seed(flag)?)?;
    out.push_str(&report.to_text());
    if timing {
        out.push_str(&report.timing_text());
    }
    Ok(())
}
