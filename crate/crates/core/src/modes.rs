//! Mode labels and subsets used to express bipartitions.

use std::fmt;

pub const MODE_A: usize = 0;
pub const MODE_B: usize = 1;
pub const MODE_C: usize = 2;

/// A subset of at most eight modes, stored as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeSet(u8);

impl ModeSet {
    pub const EMPTY: ModeSet = ModeSet(0);

    pub const fn single(mode: usize) -> Self {
        assert!(mode < 8);
        ModeSet(1 << mode)
    }

    pub fn from_modes(modes: &[usize]) -> Self {
        modes.iter().fold(Self::EMPTY, |acc, &m| acc.with(m))
    }

    /// All modes `0..arity`.
    pub fn all(arity: usize) -> Self {
        assert!(arity <= 8);
        ModeSet(((1u16 << arity) - 1) as u8)
    }

    pub const fn with(self, mode: usize) -> Self {
        assert!(mode < 8);
        ModeSet(self.0 | (1 << mode))
    }

    pub const fn contains(self, mode: usize) -> bool {
        mode < 8 && self.0 & (1 << mode) != 0
    }

    pub fn complement(self, arity: usize) -> Self {
        ModeSet(!self.0 & Self::all(arity).0)
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..8).filter(move |&m| self.contains(m))
    }

    /// True when every mode lies below `arity`.
    pub fn fits(self, arity: usize) -> bool {
        self.iter().all(|m| m < arity)
    }
}

/// One party against the other two, for the three-mode system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cut {
    /// `A|BC`
    A,
    /// `B|AC`
    B,
    /// `C|AB`
    C,
}

impl Cut {
    pub const ALL: [Cut; 3] = [Cut::A, Cut::B, Cut::C];

    pub fn mode(self) -> usize {
        match self {
            Cut::A => MODE_A,
            Cut::B => MODE_B,
            Cut::C => MODE_C,
        }
    }

    /// The lone party of the cut.
    pub fn side(self) -> ModeSet {
        ModeSet::single(self.mode())
    }

    pub fn label(self) -> &'static str {
        match self {
            Cut::A => "A|BC",
            Cut::B => "B|AC",
            Cut::C => "C|AB",
        }
    }
}

impl fmt::Display for Cut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

pub fn mode_name(mode: usize) -> &'static str {
    ["A", "B", "C"].get(mode).copied().unwrap_or("?")
}
