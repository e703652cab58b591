use crate::params::neg_mod;

/// Category of a block of `b` positions, identified up to negation.
///
/// The canonical representative is the block itself when its first nonzero
/// entry lies in `[1, (q-1)/2]`, otherwise its negation. `key` is that
/// representative read as a base-`q` number, so the all-zero block has key 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CategoryIndex {
    pub key: u64,
    /// `+1` if the block equals its representative, `-1` if it was negated.
    pub sign: i8,
}

impl CategoryIndex {
    pub fn is_zero(&self) -> bool {
        self.key == 0
    }
}

pub fn categorize(prefix: &[u16], q: u32) -> CategoryIndex {
    let half = (q - 1) / 2;
    let sign = match prefix.iter().find(|&&x| x != 0) {
        None => return CategoryIndex { key: 0, sign: 1 },
        Some(&x) if x as u32 <= half => 1i8,
        Some(_) => -1i8,
    };
    let key = prefix.iter().fold(0u64, |acc, &x| {
        let v = if sign > 0 { x as u32 } else { neg_mod(x as u32, q) };
        acc * q as u64 + v as u64
    });
    CategoryIndex { key, sign }
}

/// Number of nonzero categories for blocks of width `b`: `(q^b - 1) / 2`.
pub fn category_count(q: u32, b: usize) -> u64 {
    ((q as u64).pow(b as u32) - 1) / 2
}
