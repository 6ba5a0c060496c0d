//! The copy lattice `{1, a, a², …}` on which the scaling laws hold exactly.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};

/// A point `N = a^n` of the copy lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CopyLattice {
    base: u64,
    exponent: u32,
}

impl CopyLattice {
    pub fn new(base: u64, exponent: u32) -> Result<Self> {
        check_base(base)?;
        Ok(Self { base, exponent })
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    /// `a^n` in arbitrary precision.
    pub fn copies(&self) -> BigUint {
        BigUint::from(self.base).pow(self.exponent)
    }

    /// `a^n` as a machine integer; overflow is an error, never a wraparound.
    pub fn copies_u64(&self) -> Result<u64> {
        self.base
            .checked_pow(self.exponent)
            .ok_or(Error::LatticeOverflow {
                base: self.base,
                exponent: self.exponent,
            })
    }

    /// Locates `n` with `N = a^n`, or `None` when `N` is off the lattice.
    pub fn locate(base: u64, copies: &BigUint) -> Result<Option<Self>> {
        check_base(base)?;
        if copies.bits() == 0 {
            return Ok(None);
        }
        let b = BigUint::from(base);
        let mut acc = BigUint::one();
        let mut exponent = 0u32;
        while &acc < copies {
            acc *= &b;
            exponent += 1;
        }
        Ok((&acc == copies).then_some(Self { base, exponent }))
    }

    /// Membership test `N ∈ {1, a, a², …}`.
    pub fn contains(base: u64, copies: u64) -> Result<bool> {
        Ok(Self::locate(base, &BigUint::from(copies))?.is_some())
    }

    /// `a^n` as `f64` (inexact beyond 2^53).
    pub fn copies_f64(&self) -> f64 {
        self.copies().to_f64().unwrap_or(f64::INFINITY)
    }
}

pub(crate) fn check_base(base: u64) -> Result<()> {
    if base < 2 {
        return Err(Error::Invalid(format!("lattice base must be >= 2, got {base}")));
    }
    Ok(())
}
