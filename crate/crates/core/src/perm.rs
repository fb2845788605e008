use std::fmt;

use crate::alphabet::{Alphabet, Letter};
use crate::error::{Error, Result};

/// A bijection on `0..n` with its inverse cached.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    forward: Vec<Letter>,
    inverse: Vec<Letter>,
}

impl Permutation {
    pub fn new(forward: Vec<Letter>) -> Result<Self> {
        let n = forward.len();
        let mut inverse = vec![u8::MAX; n];
        for (i, &image) in forward.iter().enumerate() {
            let slot = inverse
                .get_mut(image as usize)
                .ok_or_else(|| Error::NotAPermutation(format!("image {image} out of range")))?;
            if *slot != u8::MAX {
                return Err(Error::NotAPermutation(format!("{image} has two preimages")));
            }
            *slot = i as Letter;
        }
        Ok(Self { forward, inverse })
    }

    pub fn identity(n: usize) -> Self {
        let forward: Vec<Letter> = (0..n as Letter).collect();
        Self {
            inverse: forward.clone(),
            forward,
        }
    }

    /// Reads a wiring string like `EKMFLGDQVZNTOWYHXUSPAIBRCJ`: position `i`
    /// maps to the symbol written there.
    pub fn from_symbols(alphabet: &Alphabet, wiring: &str) -> Result<Self> {
        let forward = alphabet.encode(wiring)?;
        if forward.len() != alphabet.len() {
            return Err(Error::NotAPermutation(format!(
                "wiring {wiring:?} has {} symbols, alphabet has {}",
                forward.len(),
                alphabet.len()
            )));
        }
        Self::new(forward)
    }

    /// Rotation `x -> x + shift (mod n)`.
    pub fn shift(n: usize, shift: usize) -> Self {
        Self::new((0..n).map(|i| ((i + shift) % n) as Letter).collect()).expect("rotation")
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    #[inline]
    pub fn apply(&self, x: Letter) -> Letter {
        self.forward[x as usize]
    }

    #[inline]
    pub fn apply_inverse(&self, x: Letter) -> Letter {
        self.inverse[x as usize]
    }

    pub fn forward(&self) -> &[Letter] {
        &self.forward
    }

    pub fn inverse(&self) -> Permutation {
        Permutation {
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
        }
    }

    /// `self` after `first`: `x -> self(first(x))`.
    pub fn after(&self, first: &Permutation) -> Permutation {
        assert_eq!(self.len(), first.len(), "composing permutations of different size");
        let forward = first.forward.iter().map(|&x| self.apply(x)).collect();
        Permutation::new(forward).expect("composition of bijections")
    }

    pub fn is_involution(&self) -> bool {
        self.forward == self.inverse
    }

    pub fn fixed_points(&self) -> impl Iterator<Item = Letter> + '_ {
        self.forward
            .iter()
            .enumerate()
            .filter(|(i, &x)| *i as Letter == x)
            .map(|(i, _)| i as Letter)
    }

    pub fn is_fixed_point_free_involution(&self) -> bool {
        self.is_involution() && self.fixed_points().next().is_none()
    }

    pub fn to_symbols(&self, alphabet: &Alphabet) -> String {
        alphabet.decode(&self.forward)
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation({:?})", self.forward)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_perm(n: usize) -> impl Strategy<Value = Permutation> {
        Just((0..n as u8).collect::<Vec<_>>())
            .prop_shuffle()
            .prop_map(|v| Permutation::new(v).unwrap())
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::new(vec![0, 0, 1]).is_err());
        assert!(Permutation::new(vec![0, 3, 1]).is_err());
    }

    #[test]
    fn atbash_is_an_involution_without_fixed_points() {
        let p = Permutation::from_symbols(&Alphabet::latin(), "ZYXWVUTSRQPONMLKJIHGFEDCBA").unwrap();
        assert!(p.is_fixed_point_free_involution());
    }

    proptest! {
        #[test]
        fn inverse_cancels(p in arb_perm(26)) {
            prop_assert_eq!(p.after(&p.inverse()), Permutation::identity(26));
            prop_assert_eq!(p.inverse().after(&p), Permutation::identity(26));
        }

        #[test]
        fn composition_is_associative(a in arb_perm(26), b in arb_perm(26), c in arb_perm(26)) {
            prop_assert_eq!(a.after(&b).after(&c), a.after(&b.after(&c)));
        }
    }
}
