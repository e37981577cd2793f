//! The symmetric group on three letters.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Images of 1, 2, 3 (zero-based) for each element, in [`S3Element::ALL`] order.
const PERMS: [[u8; 3]; 6] = [[0, 1, 2], [1, 0, 2], [2, 1, 0], [0, 2, 1], [1, 2, 0], [2, 0, 1]];
const NAMES: [&str; 6] = ["e", "(12)", "(13)", "(23)", "(123)", "(132)"];

/// A permutation of {1, 2, 3}. Products compose right to left:
/// `a.mul(b)` applies `b` first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct S3Element(u8);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConjugacyClass {
    Identity,
    Transposition,
    ThreeCycle,
}

impl ConjugacyClass {
    /// The two classes a particle can carry.
    pub const NONTRIVIAL: [ConjugacyClass; 2] = [ConjugacyClass::Transposition, ConjugacyClass::ThreeCycle];

    pub fn members(self) -> &'static [S3Element] {
        match self {
            ConjugacyClass::Identity => &S3Element::ALL[..1],
            ConjugacyClass::Transposition => &S3Element::ALL[1..4],
            ConjugacyClass::ThreeCycle => &S3Element::ALL[4..],
        }
    }
}

impl S3Element {
    pub const E: S3Element = S3Element(0);
    pub const T12: S3Element = S3Element(1);
    pub const T13: S3Element = S3Element(2);
    pub const T23: S3Element = S3Element(3);
    pub const C123: S3Element = S3Element(4);
    pub const C132: S3Element = S3Element(5);
    pub const ALL: [S3Element; 6] = [Self::E, Self::T12, Self::T13, Self::T23, Self::C123, Self::C132];

    fn from_perm(p: [u8; 3]) -> Self {
        let i = PERMS.iter().position(|q| *q == p).expect("every permutation is listed");
        S3Element(i as u8)
    }

    pub fn perm(self) -> [u8; 3] {
        PERMS[self.0 as usize]
    }

    pub fn is_identity(self) -> bool {
        self == Self::E
    }

    pub fn mul(self, other: S3Element) -> S3Element {
        let (a, b) = (self.perm(), other.perm());
        Self::from_perm([a[b[0] as usize], a[b[1] as usize], a[b[2] as usize]])
    }

    pub fn inverse(self) -> S3Element {
        let p = self.perm();
        let mut q = [0u8; 3];
        for (i, &pi) in p.iter().enumerate() {
            q[pi as usize] = i as u8;
        }
        Self::from_perm(q)
    }

    /// `by⁻¹ · self · by`
    pub fn conjugate_by(self, by: S3Element) -> S3Element {
        by.inverse().mul(self).mul(by)
    }

    pub fn conjugacy_class(self) -> ConjugacyClass {
        match self.0 {
            0 => ConjugacyClass::Identity,
            1..=3 => ConjugacyClass::Transposition,
            _ => ConjugacyClass::ThreeCycle,
        }
    }

    pub fn name(self) -> &'static str {
        NAMES[self.0 as usize]
    }
}

/// Ordered product, left to right.
pub fn product<I: IntoIterator<Item = S3Element>>(items: I) -> S3Element {
    items.into_iter().fold(S3Element::E, S3Element::mul)
}

impl fmt::Display for S3Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown S3 element {0:?}; expected one of e, (12), (13), (23), (123), (132)")]
pub struct ParseElementError(pub String);

impl FromStr for S3Element {
    type Err = ParseElementError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NAMES
            .iter()
            .position(|n| *n == s.trim())
            .map(|i| S3Element(i as u8))
            .ok_or_else(|| ParseElementError(s.to_string()))
    }
}

impl TryFrom<String> for S3Element {
    type Error = ParseElementError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<S3Element> for String {
    fn from(g: S3Element) -> String {
        g.name().to_string()
    }
}
