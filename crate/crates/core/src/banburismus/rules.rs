//! Bonus and malus tables, selectable by name.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Extra decibans for a run of consecutive matches.
pub trait BonusRule: Send + Sync + std::fmt::Debug {
    fn name(&self) -> &str;
    fn bonus(&self, run: usize) -> f64;
}

/// Decibans subtracted for a shift.
pub trait MalusRule: Send + Sync + std::fmt::Debug {
    fn name(&self) -> &str;
    fn malus(&self, shift: i32, alphabet_size: usize) -> f64;
}

/// `step * (r - 1)` for `r >= 2`, at most `cap` per run.
#[derive(Clone, Debug)]
pub struct LinearCappedBonus {
    pub step: f64,
    pub cap: f64,
}

impl Default for LinearCappedBonus {
    fn default() -> Self {
        Self { step: 3.0, cap: 12.0 }
    }
}

impl BonusRule for LinearCappedBonus {
    fn name(&self) -> &str {
        "linear"
    }
    fn bonus(&self, run: usize) -> f64 {
        if run < 2 {
            0.0
        } else {
            (self.step * (run - 1) as f64).min(self.cap)
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct NoBonus;

impl BonusRule for NoBonus {
    fn name(&self) -> &str {
        "none"
    }
    fn bonus(&self, _run: usize) -> f64 {
        0.0
    }
}

/// Explicit `run length -> decibans`; lengths past the table reuse its last
/// entry.
#[derive(Clone, Debug)]
pub struct TableBonus {
    pub table: BTreeMap<usize, f64>,
}

impl BonusRule for TableBonus {
    fn name(&self) -> &str {
        "table"
    }
    fn bonus(&self, run: usize) -> f64 {
        self.table.range(..=run).next_back().map_or(0.0, |(_, &b)| b)
    }
}

/// `-10 log10(1 - |s| / N)`: the cost of the overlap being long enough in
/// rotor steps for a middle-rotor turnover to be likely.
#[derive(Clone, Debug, Default)]
pub struct TurnoverMalus;

impl MalusRule for TurnoverMalus {
    fn name(&self) -> &str {
        "turnover"
    }
    fn malus(&self, shift: i32, alphabet_size: usize) -> f64 {
        let frac = shift.unsigned_abs() as f64 / alphabet_size as f64;
        if frac >= 1.0 {
            f64::INFINITY
        } else {
            -10.0 * (1.0 - frac).log10()
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct NoMalus;

impl MalusRule for NoMalus {
    fn name(&self) -> &str {
        "none"
    }
    fn malus(&self, _shift: i32, _alphabet_size: usize) -> f64 {
        0.0
    }
}

type BonusFactory = fn() -> Arc<dyn BonusRule>;
type MalusFactory = fn() -> Arc<dyn MalusRule>;

/// Name lookup for the scoring rules.
pub struct RuleRegistry {
    bonus: BTreeMap<&'static str, BonusFactory>,
    malus: BTreeMap<&'static str, MalusFactory>,
}

impl RuleRegistry {
    pub fn builtin() -> Self {
        let mut bonus: BTreeMap<&'static str, BonusFactory> = BTreeMap::new();
        bonus.insert("linear", || Arc::new(LinearCappedBonus::default()));
        bonus.insert("none", || Arc::new(NoBonus));
        let mut malus: BTreeMap<&'static str, MalusFactory> = BTreeMap::new();
        malus.insert("turnover", || Arc::new(TurnoverMalus));
        malus.insert("none", || Arc::new(NoMalus));
        Self { bonus, malus }
    }

    pub fn register_bonus(&mut self, name: &'static str, f: BonusFactory) {
        self.bonus.insert(name, f);
    }

    pub fn register_malus(&mut self, name: &'static str, f: MalusFactory) {
        self.malus.insert(name, f);
    }

    pub fn bonus(&self, name: &str) -> Result<Arc<dyn BonusRule>> {
        self.bonus.get(name).map(|f| f()).ok_or_else(|| Error::UnknownStrategy {
            kind: "bonus rule",
            name: name.to_string(),
        })
    }

    pub fn malus(&self, name: &str) -> Result<Arc<dyn MalusRule>> {
        self.malus.get(name).map(|f| f()).ok_or_else(|| Error::UnknownStrategy {
            kind: "malus rule",
            name: name.to_string(),
        })
    }

    pub fn bonus_names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.bonus.keys().copied()
    }

    pub fn malus_names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.malus.keys().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_tables() {
        let b = LinearCappedBonus::default();
        assert_eq!(b.bonus(1), 0.0);
        assert_eq!(b.bonus(2), 3.0);
        assert_eq!(b.bonus(3), 6.0);
        assert_eq!(b.bonus(9), 12.0);
        let m = TurnoverMalus;
        assert_eq!(m.malus(0, 26), 0.0);
        assert!((m.malus(13, 26) - 3.0103).abs() < 1e-4);
        assert_eq!(m.malus(-13, 26), m.malus(13, 26));
    }

    #[test]
    fn table_bonus_steps() {
        let t = TableBonus {
            table: [(2, 1.0), (4, 5.0)].into_iter().collect(),
        };
        assert_eq!(t.bonus(1), 0.0);
        assert_eq!(t.bonus(3), 1.0);
        assert_eq!(t.bonus(10), 5.0);
    }

    #[test]
    fn registry_lookup() {
        let r = RuleRegistry::builtin();
        assert_eq!(r.bonus("linear").unwrap().name(), "linear");
        assert_eq!(r.malus("none").unwrap().malus(20, 26), 0.0);
        assert!(r.bonus("eins").is_err());
        assert_eq!(r.bonus_names().collect::<Vec<_>>(), ["linear", "none"]);
    }
}
