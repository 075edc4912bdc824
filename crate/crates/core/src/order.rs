use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Outcome of comparing two elements under a preorder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    StrictlyGreater,
    StrictlyLess,
    Indifferent,
    Incomparable,
}

impl Comparison {
    pub fn from_weak(ge: bool, le: bool) -> Self {
        match (ge, le) {
            (true, false) => Comparison::StrictlyGreater,
            (false, true) => Comparison::StrictlyLess,
            (true, true) => Comparison::Indifferent,
            (false, false) => Comparison::Incomparable,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Comparison::StrictlyGreater => Comparison::StrictlyLess,
            Comparison::StrictlyLess => Comparison::StrictlyGreater,
            c => c,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Comparison::StrictlyGreater => "strictly-greater",
            Comparison::StrictlyLess => "strictly-less",
            Comparison::Indifferent => "indifferent",
            Comparison::Incomparable => "incomparable",
        }
    }
}

/// Dense boolean relation; `ge(i, j)` reads "i is weakly preferred to j".
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Preorder {
    n: usize,
    bits: Vec<bool>,
}

impl Preorder {
    pub fn identity(n: usize) -> Self {
        let mut bits = vec![false; n * n];
        for i in 0..n {
            bits[i * n + i] = true;
        }
        Preorder { n, bits }
    }

    /// Wraps a relation without checking it; see [`Preorder::validate`].
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                bits.push(f(i, j));
            }
        }
        Preorder { n, bits }
    }

    /// Reflexive-transitive closure of the given pairs.
    pub fn closure_of(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut r = Preorder::identity(n);
        for (i, j) in pairs {
            r.bits[i * n + j] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if !r.bits[i * n + k] {
                    continue;
                }
                for j in 0..n {
                    if r.bits[k * n + j] {
                        r.bits[i * n + j] = true;
                    }
                }
            }
        }
        r
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn ge(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.n + j]
    }

    pub fn gt(&self, i: usize, j: usize) -> bool {
        self.ge(i, j) && !self.ge(j, i)
    }

    pub fn compare(&self, i: usize, j: usize) -> Comparison {
        Comparison::from_weak(self.ge(i, j), self.ge(j, i))
    }

    pub fn transpose(&self) -> Preorder {
        Preorder::from_fn(self.n, |i, j| self.ge(j, i))
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.n).all(|i| self.ge(i, i))
    }

    pub fn is_transitive(&self) -> bool {
        for i in 0..self.n {
            for k in 0..self.n {
                if !self.ge(i, k) {
                    continue;
                }
                for j in 0..self.n {
                    if self.ge(k, j) && !self.ge(i, j) {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(i) = (0..self.n).find(|&i| !self.ge(i, i)) {
            return Err(Error::NotPreorder(format!("not reflexive at {i}")));
        }
        if !self.is_transitive() {
            return Err(Error::NotPreorder("not transitive".into()));
        }
        Ok(())
    }

    /// All weakly-preferred pairs `(i, j)`, row-major.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n)
            .flat_map(move |i| (0..self.n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.ge(i, j))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closure_adds_transitive_pairs() {
        let r = Preorder::closure_of(3, [(0, 1), (1, 2)]);
        assert!(r.ge(0, 2));
        assert!(!r.ge(2, 0));
        assert!(r.validate().is_ok());
        assert_eq!(r.compare(0, 2), Comparison::StrictlyGreater);
        assert_eq!(r.transpose().compare(0, 2), Comparison::StrictlyLess);
    }

    #[test]
    fn rejects_non_preorders() {
        assert!(Preorder::from_fn(2, |i, j| i != j).validate().is_err());
        let r = Preorder::from_fn(3, |i, j| i == j || (i, j) == (0, 1) || (i, j) == (1, 2));
        assert!(r.validate().is_err());
    }
}
