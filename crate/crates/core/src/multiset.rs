//! Bags of [`Element`]s.

use std::collections::BTreeMap;
use std::fmt;

use crate::element::{Element, Label};

/// A finite multiset of elements. Zero multiplicities are never stored, so
/// structural equality is multiset equality.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Multiset {
    items: BTreeMap<Element, usize>,
}

impl Multiset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, e: Element) {
        self.insert_n(e, 1);
    }

    pub fn insert_n(&mut self, e: Element, n: usize) {
        if n > 0 {
            *self.items.entry(e).or_insert(0) += n;
        }
    }

    /// Removes one copy; false if absent.
    pub fn remove(&mut self, e: &Element) -> bool {
        match self.items.get_mut(e) {
            None => false,
            Some(n) => {
                *n -= 1;
                if *n == 0 {
                    self.items.remove(e);
                }
                true
            }
        }
    }

    /// Removes every element of `sub` (with multiplicity) or nothing at all.
    pub fn remove_all(&mut self, sub: &[Element]) -> bool {
        if !self.contains_all(sub) {
            return false;
        }
        for e in sub {
            self.remove(e);
        }
        true
    }

    pub fn contains_all(&self, sub: &[Element]) -> bool {
        let mut need: BTreeMap<&Element, usize> = BTreeMap::new();
        for e in sub {
            *need.entry(e).or_insert(0) += 1;
        }
        need.into_iter().all(|(e, n)| self.count(e) >= n)
    }

    pub fn count(&self, e: &Element) -> usize {
        self.items.get(e).copied().unwrap_or(0)
    }

    /// Total size, counting multiplicity.
    pub fn len(&self) -> usize {
        self.items.values().sum()
    }

    pub fn distinct(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Distinct elements with their multiplicities, in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&Element, usize)> {
        self.items.iter().map(|(e, n)| (e, *n))
    }

    /// Every copy, in canonical order.
    pub fn to_vec(&self) -> Vec<Element> {
        self.iter()
            .flat_map(|(e, n)| std::iter::repeat_n(e.clone(), n))
            .collect()
    }

    pub fn labels(&self) -> impl Iterator<Item = &Label> {
        self.items.keys().map(|e| &e.label)
    }
}

impl FromIterator<Element> for Multiset {
    fn from_iter<I: IntoIterator<Item = Element>>(iter: I) -> Self {
        let mut m = Multiset::new();
        for e in iter {
            m.insert(e);
        }
        m
    }
}

impl Extend<Element> for Multiset {
    fn extend<I: IntoIterator<Item = Element>>(&mut self, iter: I) {
        for e in iter {
            self.insert(e);
        }
    }
}

impl fmt::Display for Multiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, e) in self.to_vec().iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::elem;

    #[test]
    fn multiplicities() {
        let mut m: Multiset = [elem(1, "A", 0), elem(1, "A", 0), elem(2, "B", 0)].into_iter().collect();
        assert_eq!((m.len(), m.distinct()), (3, 2));
        assert!(!m.remove_all(&[elem(2, "B", 0), elem(2, "B", 0)]));
        assert_eq!(m.len(), 3);
        assert!(m.remove(&elem(1, "A", 0)));
        assert!(m.remove(&elem(1, "A", 0)));
        assert!(!m.remove(&elem(1, "A", 0)));
        assert_eq!(m.to_string(), "{[2, 'B', 0]}");
        assert_eq!(m, [elem(2, "B", 0)].into_iter().collect());
    }
}
