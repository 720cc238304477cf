//! The min-plus semiring over the rationals extended by infinity.

use std::cmp::Ordering;
use std::fmt;

use crate::rational::{fmt_rat, parse_rat, Rat};

/// An element of the tropical semiring: a rational or the formal `∞`.
/// Addition is `min`, multiplication is `+`, and `x ⊙ ∞ = ∞`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtRat {
    Fin(Rat),
    Inf,
}

impl ExtRat {
    pub fn zero() -> Self {
        ExtRat::Fin(Rat::from_integer(0.into()))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtRat::Fin(_))
    }

    pub fn is_inf(&self) -> bool {
        matches!(self, ExtRat::Inf)
    }

    /// Tropical sum: the minimum.
    pub fn trop_add(&self, other: &ExtRat) -> ExtRat {
        match (self, other) {
            (ExtRat::Inf, x) | (x, ExtRat::Inf) => x.clone(),
            (ExtRat::Fin(a), ExtRat::Fin(b)) => ExtRat::Fin(a.min(b).clone()),
        }
    }

    /// Tropical product: ordinary addition, absorbing on `∞`.
    pub fn trop_mul(&self, other: &ExtRat) -> ExtRat {
        match (self, other) {
            (ExtRat::Inf, _) | (_, ExtRat::Inf) => ExtRat::Inf,
            (ExtRat::Fin(a), ExtRat::Fin(b)) => ExtRat::Fin(a + b),
        }
    }

    /// Subtract a finite rational (used when normalising representatives).
    pub fn sub_finite(&self, off: &Rat) -> ExtRat {
        match self {
            ExtRat::Inf => ExtRat::Inf,
            ExtRat::Fin(a) => ExtRat::Fin(a - off),
        }
    }

    pub fn finite(&self) -> Option<&Rat> {
        match self {
            ExtRat::Fin(r) => Some(r),
            ExtRat::Inf => None,
        }
    }

    pub fn parse(s: &str) -> Result<ExtRat, String> {
        let t = s.trim();
        if t == "inf" || t == "Inf" || t == "∞" {
            Ok(ExtRat::Inf)
        } else {
            Ok(ExtRat::Fin(parse_rat(t)?))
        }
    }
}

/// Total order with `∞` as the largest element.
impl PartialOrd for ExtRat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtRat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtRat::Inf, ExtRat::Inf) => Ordering::Equal,
            (ExtRat::Inf, _) => Ordering::Greater,
            (_, ExtRat::Inf) => Ordering::Less,
            (ExtRat::Fin(a), ExtRat::Fin(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for ExtRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRat::Inf => write!(f, "inf"),
            ExtRat::Fin(r) => write!(f, "{}", fmt_rat(r)),
        }
    }
}

/// A vector over the tropical semiring, indexed by ground-set position.
///
/// Circuits of valuated matroids and fiber points are carried in this form;
/// the support is the set of positions with finite entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TropicalVector {
    pub entries: Vec<ExtRat>,
}

impl TropicalVector {
    pub fn all_inf(len: usize) -> Self {
        TropicalVector {
            entries: vec![ExtRat::Inf; len],
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Indices with finite entry.
    pub fn support(&self) -> Vec<usize> {
        (0..self.entries.len())
            .filter(|&i| self.entries[i].is_finite())
            .collect()
    }

    pub fn support_mask(&self) -> u32 {
        let mut m = 0u32;
        for (i, e) in self.entries.iter().enumerate() {
            if e.is_finite() {
                m |= 1 << i;
            }
        }
        m
    }

    /// Shift every finite entry so the minimum finite entry becomes 0.
    /// Vectors with empty support are returned unchanged.
    pub fn normalized(&self) -> TropicalVector {
        let min = self
            .entries
            .iter()
            .filter_map(|e| e.finite())
            .min()
            .cloned();
        match min {
            None => self.clone(),
            Some(m) => TropicalVector {
                entries: self.entries.iter().map(|e| e.sub_finite(&m)).collect(),
            },
        }
    }

    /// Add the scalar `s` tropically (i.e. classically) to every entry.
    pub fn scaled(&self, s: &Rat) -> TropicalVector {
        TropicalVector {
            entries: self
                .entries
                .iter()
                .map(|e| e.trop_mul(&ExtRat::Fin(s.clone())))
                .collect(),
        }
    }

    /// Componentwise tropical sum (min).
    pub fn trop_sum(&self, other: &TropicalVector) -> TropicalVector {
        assert_eq!(self.len(), other.len());
        TropicalVector {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.trop_add(b))
                .collect(),
        }
    }

    /// Componentwise `≥` (with `∞` largest).
    pub fn dominates(&self, other: &TropicalVector) -> bool {
        self.entries
            .iter()
            .zip(&other.entries)
            .all(|(a, b)| a >= b)
    }
}

impl fmt::Display for TropicalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}
