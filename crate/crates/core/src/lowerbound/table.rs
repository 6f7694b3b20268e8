//! Transition tables of 1-bit agents on degree-2 nodes, and their symmetries.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Output of one table row: new agent bit, new vertex bit, port bit (port = bit + 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Entry {
    pub a: bool,
    pub v: bool,
    pub p: bool,
}

impl Entry {
    pub const fn new(a: bool, v: bool, p: bool) -> Self {
        Entry { a, v, p }
    }

    pub fn code(self) -> u16 {
        u16::from(self.p) + 2 * u16::from(self.v) + 4 * u16::from(self.a)
    }

    pub fn from_code(code: u16) -> Self {
        Entry {
            p: code & 1 != 0,
            v: code & 2 != 0,
            a: code & 4 != 0,
        }
    }
}

/// A map `(a, v) -> (A, V, P)`. Row `k = 2a + v`, id `= sum code_k * 8^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TransitionTable1Bit {
    rows: [Entry; 4],
}

pub const TABLE_COUNT: u16 = 4096;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TableError {
    #[error("table id {0} out of range 0..4096")]
    IdOutOfRange(u32),
    #[error("unknown table name {0:?}")]
    UnknownName(String),
}

impl TransitionTable1Bit {
    pub fn from_rows(rows: [Entry; 4]) -> Self {
        TransitionTable1Bit { rows }
    }

    pub fn from_id(id: u16) -> Result<Self, TableError> {
        if id >= TABLE_COUNT {
            return Err(TableError::IdOutOfRange(id.into()));
        }
        Ok(Self::decode(id))
    }

    fn decode(id: u16) -> Self {
        let mut rows = [Entry::new(false, false, false); 4];
        for (k, row) in rows.iter_mut().enumerate() {
            *row = Entry::from_code((id >> (3 * k)) & 7);
        }
        TransitionTable1Bit { rows }
    }

    pub fn id(&self) -> u16 {
        self.rows
            .iter()
            .enumerate()
            .map(|(k, e)| e.code() << (3 * k))
            .sum()
    }

    pub fn get(&self, a: bool, v: bool) -> Entry {
        self.rows[2 * usize::from(a) + usize::from(v)]
    }

    pub fn rows(&self) -> &[Entry; 4] {
        &self.rows
    }

    /// `A(a, v)`.
    pub fn agent(&self, a: bool, v: bool) -> bool {
        self.get(a, v).a
    }

    /// `V(a, v)`.
    pub fn vertex(&self, a: bool, v: bool) -> bool {
        self.get(a, v).v
    }

    /// `P(a, v)`.
    pub fn port(&self, a: bool, v: bool) -> bool {
        self.get(a, v).p
    }

    /// `R2(a, v) = (A, V)`.
    pub fn r2(&self, a: bool, v: bool) -> (bool, bool) {
        let e = self.get(a, v);
        (e.a, e.v)
    }

    /// `R3(a, v) = (A, V, P)`.
    pub fn r3(&self, a: bool, v: bool) -> (bool, bool, bool) {
        let e = self.get(a, v);
        (e.a, e.v, e.p)
    }

    /// The table seen after renaming agent bits, vertex bits and port names by `g`.
    pub fn relabel(&self, g: Symmetry) -> Self {
        let mut rows = [Entry::new(false, false, false); 4];
        for a in [false, true] {
            for v in [false, true] {
                let e = self.get(a ^ g.flip_a, v ^ g.flip_v);
                rows[2 * usize::from(a) + usize::from(v)] =
                    Entry::new(e.a ^ g.flip_a, e.v ^ g.flip_v, e.p ^ g.flip_p);
            }
        }
        TransitionTable1Bit { rows }
    }

    /// Smallest id in the orbit, and an element mapping this table onto it.
    pub fn canonicalize(&self) -> (u16, Symmetry) {
        Symmetry::all()
            .map(|g| (self.relabel(g).id(), g))
            .min_by_key(|&(id, g)| (id, g.index()))
            .expect("group is non-empty")
    }

    /// Compact row listing such as `00:011 01:100 10:111 11:001`.
    pub fn describe(&self) -> String {
        let bit = |b: bool| if b { '1' } else { '0' };
        let mut parts = Vec::with_capacity(4);
        for a in [false, true] {
            for v in [false, true] {
                let e = self.get(a, v);
                parts.push(format!("{}{}:{}{}{}", bit(a), bit(v), bit(e.a), bit(e.v), bit(e.p)));
            }
        }
        parts.join(" ")
    }
}

/// One of the 8 renamings generated by swapping agent bits, vertex bits and port names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Symmetry {
    pub flip_a: bool,
    pub flip_v: bool,
    pub flip_p: bool,
}

impl Symmetry {
    pub const IDENTITY: Symmetry = Symmetry {
        flip_a: false,
        flip_v: false,
        flip_p: false,
    };

    pub fn from_index(i: u8) -> Self {
        Symmetry {
            flip_a: i & 4 != 0,
            flip_v: i & 2 != 0,
            flip_p: i & 1 != 0,
        }
    }

    pub fn index(self) -> u8 {
        4 * u8::from(self.flip_a) + 2 * u8::from(self.flip_v) + u8::from(self.flip_p)
    }

    pub fn all() -> impl Iterator<Item = Symmetry> {
        (0..8).map(Symmetry::from_index)
    }
}

pub fn enumerate_tables() -> impl Iterator<Item = TransitionTable1Bit> {
    (0..TABLE_COUNT).map(TransitionTable1Bit::decode)
}

/// The named path algorithms, written with `a = v = p = 0` (primes are 1).
///
/// Q is only partially determined by its defining constraints; rows not fixed
/// by them are completed consistently and nothing downstream relies on them.
pub fn named_table(name: &str) -> Result<TransitionTable1Bit, TableError> {
    const O: bool = false;
    const I: bool = true;
    let e = Entry::new;
    // Rows in order (a,v), (a,v'), (a',v), (a',v').
    let rows = match name.to_ascii_lowercase().as_str() {
        "x" => [e(O, I, O), e(I, O, O), e(I, I, I), e(O, O, I)],
        "y" => [e(O, I, O), e(I, O, O), e(O, I, I), e(I, O, I)],
        "z" => [e(I, I, O), e(I, O, I), e(I, I, I), e(O, O, O)],
        "r" => [e(I, I, O), e(O, O, I), e(O, I, I), e(I, O, O)],
        "q" => [e(I, O, O), e(O, O, O), e(O, I, I), e(I, O, I)],
        _ => return Err(TableError::UnknownName(name.to_string())),
    };
    Ok(TransitionTable1Bit::from_rows(rows))
}

pub const NAMED_TABLES: [&str; 5] = ["x", "y", "z", "r", "q"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_table() {
        let t = TransitionTable1Bit::from_id(0).unwrap();
        assert!(t.rows().iter().all(|e| e.code() == 0));
        assert_eq!(t.canonicalize().0, 0);
        assert!(TransitionTable1Bit::from_id(4096).is_err());
    }

    #[test]
    fn x_rows() {
        let x = named_table("X").unwrap();
        assert_eq!(x.r3(false, false), (false, true, false));
        assert_eq!(x.r3(false, true), (true, false, false));
        assert_eq!(x.r3(true, false), (true, true, true));
        assert_eq!(x.r3(true, true), (false, false, true));
        assert!(named_table("w").is_err());
    }

    #[test]
    fn relabel_is_an_involution() {
        for t in enumerate_tables().step_by(37) {
            for g in Symmetry::all() {
                assert_eq!(t.relabel(g).relabel(g), t);
            }
        }
    }

    #[test]
    fn x_orbit_shares_canonical_id() {
        let x = named_table("x").unwrap();
        let flipped = x.relabel(Symmetry { flip_a: true, flip_v: false, flip_p: false });
        assert_eq!(x.canonicalize().0, flipped.canonicalize().0);
        let (c, g) = x.canonicalize();
        assert_eq!(x.relabel(g).id(), c);
    }
}
