use std::path::Path;
use std::process::{Command, Output};

fn banbury(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_banbury"))
        .args(args)
        .env_remove("BANBURY_SEED")
        .output()
        .unwrap()
}

fn stdout(args: &[&str]) -> String {
    let o = banbury(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn fails_with_one_line(args: &[&str]) -> String {
    let o = banbury(args);
    assert!(!o.status.success(), "{args:?} succeeded");
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    assert!(err.starts_with("error: "), "{err}");
    err
}

#[test]
fn classical_vectors() {
    assert_eq!(stdout(&["classical", "encipher", "--cipher", "scytale", "--width", "5", "DOMANIPARTIREMO"]), "DIIOPRMAEARMNTO\n");
    assert_eq!(stdout(&["classical", "encipher", "--cipher", "atbash", "BABILONIA"]), "YZYROLMRZ\n");
    assert_eq!(stdout(&["classical", "encipher", "--cipher", "caesar", "--key", "D", "VENIVIDIVICI"]), "YHQLYLGLYLFL\n");
    assert_eq!(stdout(&["classical", "encipher", "--cipher", "vigenere", "--key", "LUPO", "VENIVIDIVICI"]), "GYCWGCSWGCRW\n");
    assert_eq!(stdout(&["classical", "decipher", "--cipher", "vigenere", "--key", "LUPO", "GYCWGCSWGCRW"]), "VENIVIDIVICI\n");
    assert!(stdout(&["classical", "list"]).contains("vigenere"));
}

#[test]
fn bayes_coin() {
    let out = stdout(&["bayes", "coin", "--flips", "HH"]);
    assert_eq!(out, "flips\tposterior_fair\nH\t0.333333333333\nHH\t0.200000000000\n");
}

#[test]
fn enigma_round_trips() {
    let machine = ["--rotors", "II IV V", "--rings", "B U L", "--plugs", "AV BS CG DL FU HZ IN KM OW RX"];
    let mut enc = vec!["enigma", "encipher"];
    enc.extend(machine);
    enc.extend(["--start", "BLA", "WETTERVORHERSAGE"]);
    let c = stdout(&enc);
    let mut dec = vec!["enigma", "decipher"];
    dec.extend(machine);
    dec.extend(["--start", "BLA", c.trim()]);
    assert_eq!(stdout(&dec), "WETTERVORHERSAGE\n");

    let mut enc = vec!["enigma", "encipher"];
    enc.extend(machine);
    enc.extend(["--message-key", "QRS", "KEINEBESONDERENEREIGNISSE"]);
    let out = stdout(&enc);
    let (ind, body) = out.trim().split_once('\t').unwrap();
    let mut dec = vec!["enigma", "decipher"];
    dec.extend(machine);
    dec.extend(["--indicator", ind, body]);
    assert_eq!(stdout(&dec), "KEINEBESONDERENEREIGNISSE\n");
}

#[test]
fn seed_variable_overrides_the_flag() {
    let with = |env: Option<&str>, flag: &str| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_banbury"));
        c.args(["traffic", "generate", "--count", "5", "--seed", flag]);
        match env {
            Some(v) => c.env("BANBURY_SEED", v),
            None => c.env_remove("BANBURY_SEED"),
        };
        let o = c.output().unwrap();
        assert!(o.status.success());
        o.stdout
    };
    assert_eq!(with(Some("2"), "1"), with(None, "2"));
    assert_ne!(with(None, "1"), with(None, "2"));
    let o = Command::new(env!("CARGO_BIN_EXE_banbury"))
        .args(["traffic", "generate", "--count", "5"])
        .env("BANBURY_SEED", "many")
        .output()
        .unwrap();
    assert!(!o.status.success());
}

#[test]
fn errors_are_one_line() {
    fails_with_one_line(&["classical", "encipher", "--cipher", "rot13", "ABC"]);
    fails_with_one_line(&["enigma", "encipher", "--rotors", "I I III", "--start", "AAA", "ABC"]);
    fails_with_one_line(&["banburismus", "score", "--corpus", "/nonexistent/corpus.tsv"]);
    fails_with_one_line(&["bayes", "coin", "--flips", "HXH"]);
    let e = fails_with_one_line(&["pipeline", "run", "--count", "0"]);
    assert!(e.contains("banburismus"), "{e}");
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn scritchmus_from_deduction_rows() {
    let dir = tempfile::tempdir().unwrap();
    let rows = "G=K+4\t27.8\nG=V+9\t6.5\nM=Q+16\t23.0\nC=Q+18\t13.4\nC=M+2\t9.5\n";
    let d = write(dir.path(), "d.tsv", rows);
    let out = stdout(&["scritchmus", "deduce", "--deductions", &d, "--min-weight", "0"]);
    assert!(out.contains("chain\tV - - - - K - - - G\t"), "{out}");
    assert!(out.contains("chain\tM - C - - - - - - - Q\t"), "{out}");
    assert!(out.lines().any(|l| l.starts_with("shortlist\t")));
}

#[test]
fn traffic_to_bombe() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n).to_str().unwrap().to_string();
    stdout(&[
        "traffic", "generate", "--seed", "42", "--count", "40", "--crib", "WETTERVORHERSAGEBISK", "--crib-message", "3",
        "--crib-anchor", "10", "--out", &p("c.tsv"), "--key-out", &p("k.txt"),
    ]);
    let evidence = stdout(&["banburismus", "score", "--corpus", &p("c.tsv")]);
    assert!(evidence.starts_with("pair_id\tshift\t"));

    let key = std::fs::read_to_string(p("k.txt")).unwrap();
    let field = |k: &str| key.lines().find_map(|l| l.strip_prefix(k)).unwrap().trim().to_string();
    let rotors = field("rotors:");
    let rings: String = field("rings:").split_whitespace().collect();
    let corpus = std::fs::read_to_string(p("c.tsv")).unwrap();
    let body: String = corpus.lines().nth(3).unwrap().split('\t').nth(2).unwrap().replace(' ', "");
    let crib = write(dir.path(), "crib.txt", &format!("WETTERVORHERSAGEBISK\n{}\nanchor: 10\n", &body[10..30]));
    let orders = write(dir.path(), "orders.txt", &format!("{rotors}\n"));
    let args = ["bombe", "run", "--crib", &crib, "--orders", &orders, "--rings", &rings];
    let out = stdout(&args);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("order\tstart\tschedule\tsurvivors\tstecker"));
    let plugs = field("plugs:");
    let hit = lines.any(|l| {
        let stecker = l.split('\t').nth(4).unwrap();
        l.starts_with(&rotors.replace(' ', "-")) && plugs.split(' ').all(|pair| {
            let pair: Vec<char> = pair.chars().collect();
            // pairs off the crib's main component are not constrained
            stecker.contains(&format!("{}{}", pair[0], pair[1])) || !stecker.contains(pair[0]) || !stecker.contains(pair[1])
        })
    });
    assert!(hit, "{out}");

    // a resumed run reports the same candidates
    let ck = p("state.bin");
    let mut partial = args.to_vec();
    partial.extend(["--checkpoint", &ck, "--max-units", "7"]);
    banbury(&partial);
    assert!(Path::new(&ck).exists());
    let mut resumed = args.to_vec();
    resumed.extend(["--checkpoint", &ck]);
    assert_eq!(stdout(&resumed), out);
}
