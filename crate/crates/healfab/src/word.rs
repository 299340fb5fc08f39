//! 16-bit data word carried on every fabric signal.
//!
//! Arithmetic wraps modulo 2^16. Booleans ride in words as 0/1; the
//! netlist type checker keeps non-boolean values out of boolean operands,
//! so runtime code never re-validates that.

use std::fmt;

/// Unsigned 16-bit word, the fabric's only value type.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(pub u16);

impl Word {
    pub const ZERO: Word = Word(0);
    pub const ONE: Word = Word(1);
    pub const MAX: Word = Word(u16::MAX);

    pub fn wrapping_add(self, rhs: Word) -> Word {
        Word(self.0.wrapping_add(rhs.0))
    }

    pub fn wrapping_sub(self, rhs: Word) -> Word {
        Word(self.0.wrapping_sub(rhs.0))
    }

    pub fn wrapping_mul(self, rhs: Word) -> Word {
        Word(self.0.wrapping_mul(rhs.0))
    }

    /// Two's-complement reading of the same bits.
    pub fn as_signed(self) -> i16 {
        self.0 as i16
    }

    pub fn is_bool(self) -> bool {
        self.0 <= 1
    }

    pub fn from_bool(b: bool) -> Word {
        Word(b as u16)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u16> for Word {
    fn from(v: u16) -> Word {
        Word(v)
    }
}
