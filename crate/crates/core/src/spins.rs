//! Spin values and finite spin patterns.
//!
//! A configuration on a finite set is bit-packed: bit `i` of `bits` is the
//! spin at the `i`-th site in lexicographic order, with a set bit meaning
//! `+1`. Configuration indices therefore run as binary counters over the
//! lex-sorted sites, which fixes the enumeration order everywhere.

use crate::lattice::{Point, SiteSet};

/// A spin is `+1` or `-1`.
pub type Spin = i8;

pub const UP: Spin = 1;
pub const DOWN: Spin = -1;

#[inline]
pub fn spin_from_bit(bit: bool) -> Spin {
    if bit {
        UP
    } else {
        DOWN
    }
}

#[inline]
pub fn bit_from_spin(s: Spin) -> u64 {
    debug_assert!(s == UP || s == DOWN);
    (s == UP) as u64
}

/// Anything that can answer "what is the spin at `p`?" — possibly only on
/// part of the lattice.
pub trait SpinSource {
    fn spin(&self, p: &Point) -> Option<Spin>;
}

/// Bit-packed spins on a fixed finite site set (at most 64 sites).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinPattern {
    sites: SiteSet,
    bits: u64,
}

impl SpinPattern {
    pub fn new(sites: SiteSet, bits: u64) -> Self {
        assert!(sites.len() <= 64, "bit-packed pattern limited to 64 sites");
        debug_assert!(sites.len() == 64 || bits < (1u64 << sites.len()));
        Self { sites, bits }
    }

    pub fn constant(sites: SiteSet, s: Spin) -> Self {
        let bits = if s == UP { mask(sites.len()) } else { 0 };
        Self::new(sites, bits)
    }

    pub fn sites(&self) -> &SiteSet {
        &self.sites
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn spin_at_index(&self, i: usize) -> Spin {
        spin_from_bit((self.bits >> i) & 1 == 1)
    }

    pub fn get(&self, p: &Point) -> Option<Spin> {
        self.sites.position(p).map(|i| self.spin_at_index(i))
    }

    pub fn set(&mut self, p: &Point, s: Spin) {
        let i = self.sites.position(p).expect("site in pattern");
        match s {
            UP => self.bits |= 1 << i,
            _ => self.bits &= !(1 << i),
        }
    }

    /// Global spin flip.
    pub fn flipped(&self) -> Self {
        Self {
            sites: self.sites.clone(),
            bits: !self.bits & mask(self.sites.len()),
        }
    }

    /// Spins in lex site order.
    pub fn spins(&self) -> Vec<Spin> {
        (0..self.sites.len()).map(|i| self.spin_at_index(i)).collect()
    }
}

impl SpinSource for SpinPattern {
    fn spin(&self, p: &Point) -> Option<Spin> {
        self.get(p)
    }
}

/// All-ones mask for `n` bits.
#[inline]
pub fn mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Flip a configuration index: the bitwise complement within the set's width.
#[inline]
pub fn flip_index(bits: u64, n_sites: usize) -> u64 {
    !bits & mask(n_sites)
}

/// A pattern extended by an outer spin assignment; the pattern wins on its
/// own sites.
pub struct Extended<'a, S: SpinSource> {
    pub inner: &'a SpinPattern,
    pub outer: &'a S,
}

impl<S: SpinSource> SpinSource for Extended<'_, S> {
    fn spin(&self, p: &Point) -> Option<Spin> {
        self.inner.get(p).or_else(|| self.outer.spin(p))
    }
}

/// A constant spin everywhere.
pub struct ConstantField(pub Spin);

impl SpinSource for ConstantField {
    fn spin(&self, _: &Point) -> Option<Spin> {
        Some(self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_bits_follow_lex_order() {
        let sites = SiteSet::from_coords(&[&[1, 0], &[0, 0], &[0, 1]]).unwrap();
        // lex order: (0,0) < (0,1) < (1,0)
        let pat = SpinPattern::new(sites, 0b011);
        assert_eq!(pat.get(&Point::new(&[0, 0])), Some(UP));
        assert_eq!(pat.get(&Point::new(&[0, 1])), Some(UP));
        assert_eq!(pat.get(&Point::new(&[1, 0])), Some(DOWN));
        assert_eq!(pat.get(&Point::new(&[5, 5])), None);
    }

    #[test]
    fn flip_is_involutive() {
        let sites = SiteSet::from_coords(&[&[0, 0], &[1, 0], &[2, 2]]).unwrap();
        let pat = SpinPattern::new(sites, 0b101);
        assert_eq!(pat.flipped().flipped(), pat);
        assert_eq!(pat.flipped().bits(), 0b010);
    }

    #[test]
    fn set_and_get_agree() {
        let sites = SiteSet::from_coords(&[&[0, 0], &[1, 0]]).unwrap();
        let mut pat = SpinPattern::constant(sites, DOWN);
        pat.set(&Point::new(&[1, 0]), UP);
        assert_eq!(pat.get(&Point::new(&[0, 0])), Some(DOWN));
        assert_eq!(pat.get(&Point::new(&[1, 0])), Some(UP));
        assert_eq!(pat.bits(), 0b10);
    }
}
