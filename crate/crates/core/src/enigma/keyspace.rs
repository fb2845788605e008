use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KeyspaceModel {
    pub alphabet_size: u32,
    pub available_rotors: u32,
    pub chosen_rotors: u32,
    pub plug_pairs: u32,
    /// Count ring settings as key material.
    pub rings: bool,
}

impl KeyspaceModel {
    /// Three rotors out of five, ten plug cables.
    pub fn service_machine() -> Self {
        Self {
            alphabet_size: 26,
            available_rotors: 5,
            chosen_rotors: 3,
            plug_pairs: 10,
            rings: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyspaceBreakdown {
    pub rotor_orders: BigUint,
    pub positions: BigUint,
    pub rings: BigUint,
    pub plugboard: BigUint,
    pub total: BigUint,
}

impl KeyspaceBreakdown {
    pub fn total_f64(&self) -> f64 {
        self.total.to_f64().unwrap_or(f64::INFINITY)
    }
}

fn factorial(n: u32) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// Ordered selections of `chosen` rotors out of `available`.
pub fn rotor_orders(available: u32, chosen: u32) -> Result<BigUint> {
    if chosen > available {
        return Err(Error::InvalidModel(format!("cannot choose {chosen} of {available} rotors")));
    }
    Ok(factorial(available) / factorial(available - chosen))
}

/// Ways to place `pairs` cables on `n` letters: `n! / ((n-2k)! k! 2^k)`.
pub fn plugboard_pairings(n: u32, pairs: u32) -> Result<BigUint> {
    if 2 * pairs > n {
        return Err(Error::InvalidModel(format!("{pairs} pairs need more than {n} letters")));
    }
    let denom = factorial(n - 2 * pairs) * factorial(pairs) * (BigUint::one() << pairs as usize);
    Ok(factorial(n) / denom)
}

pub fn keyspace_size(model: &KeyspaceModel) -> Result<KeyspaceBreakdown> {
    if model.alphabet_size < 2 {
        return Err(Error::InvalidModel("alphabet of fewer than 2 letters".into()));
    }
    if model.chosen_rotors == 0 {
        return Err(Error::InvalidModel("a machine needs at least one rotor".into()));
    }
    let rotor_orders = rotor_orders(model.available_rotors, model.chosen_rotors)?;
    let positions = BigUint::from(model.alphabet_size).pow(model.chosen_rotors);
    let rings = if model.rings { positions.clone() } else { BigUint::one() };
    let plugboard = plugboard_pairings(model.alphabet_size, model.plug_pairs)?;
    let total = &rotor_orders * &positions * &rings * &plugboard;
    Ok(KeyspaceBreakdown {
        rotor_orders,
        positions,
        rings,
        plugboard,
        total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn service_machine_counts() {
        let k = keyspace_size(&KeyspaceModel::service_machine()).unwrap();
        assert_eq!(k.rotor_orders, BigUint::from(60u32));
        assert_eq!(k.plugboard, BigUint::from(150_738_274_937_250u64));
        assert_eq!(k.positions, BigUint::from(17_576u32));
        let rel = (k.total_f64() - 2.8e24).abs() / 2.8e24;
        assert!(rel < 0.05, "{}", k.total);
    }

    #[test]
    fn small_cases() {
        assert_eq!(plugboard_pairings(4, 1).unwrap(), BigUint::from(6u32));
        assert_eq!(plugboard_pairings(4, 2).unwrap(), BigUint::from(3u32));
        assert_eq!(plugboard_pairings(26, 0).unwrap(), BigUint::one());
        assert_eq!(plugboard_pairings(26, 13).unwrap(), BigUint::from(7_905_853_580_625u64));
        assert!(plugboard_pairings(26, 14).is_err());
        assert!(rotor_orders(3, 5).is_err());
    }
}
