use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// A finite probability distribution. Entries are sorted by key, duplicates
/// merged, every weight strictly positive and the weights sum to one.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Dist<S> {
    entries: Vec<(S, Rational)>,
}

impl<S: Ord + Clone> Dist<S> {
    pub fn new(entries: impl IntoIterator<Item = (S, Rational)>) -> Result<Self> {
        let mut entries: Vec<(S, Rational)> = entries.into_iter().collect();
        if entries.is_empty() {
            return Err(Error::invalid("distribution with empty support"));
        }
        if let Some((_, w)) = entries.iter().find(|(_, w)| !w.is_positive()) {
            return Err(Error::invalid(format!(
                "distribution weight {w} is not strictly positive"
            )));
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        entries.dedup_by(|later, earlier| {
            if later.0 == earlier.0 {
                earlier.1 += &later.1;
                true
            } else {
                false
            }
        });
        let total: Rational = entries.iter().map(|(_, w)| w).sum();
        if !total.is_one() {
            return Err(Error::invalid(format!(
                "distribution weights sum to {total}, expected 1"
            )));
        }
        Ok(Dist { entries })
    }

    pub fn dirac(s: S) -> Self {
        Dist {
            entries: vec![(s, Rational::one())],
        }
    }

    pub fn prob(&self, s: &S) -> Rational {
        match self.entries.binary_search_by(|(k, _)| k.cmp(s)) {
            Ok(i) => self.entries[i].1.clone(),
            Err(_) => Rational::zero(),
        }
    }

    /// Total weight of the support elements satisfying `pred`.
    pub fn mass(&self, mut pred: impl FnMut(&S) -> bool) -> Rational {
        self.entries
            .iter()
            .filter(|(s, _)| pred(s))
            .map(|(_, w)| w)
            .sum()
    }

    /// Push the distribution through `f`, merging keys that collide.
    pub fn map<T: Ord + Clone>(&self, mut f: impl FnMut(&S) -> T) -> Dist<T> {
        Dist::new(self.entries.iter().map(|(s, w)| (f(s), w.clone())))
            .expect("image of a distribution is a distribution")
    }
}

impl<S> Dist<S> {
    pub fn entries(&self) -> &[(S, Rational)] {
        &self.entries
    }

    pub fn support(&self) -> impl Iterator<Item = &S> + '_ {
        self.entries.iter().map(|(s, _)| s)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_dirac(&self) -> bool {
        self.entries.len() == 1
    }
}

impl<S: fmt::Display> fmt::Display for Dist<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (s, w)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{w} {s}")?;
        }
        Ok(())
    }
}

impl<S: fmt::Debug> fmt::Debug for Dist<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.entries.iter().map(|(s, w)| (s, w)))
            .finish()
    }
}
