use std::fmt;

/// A boolean variable. The id doubles as the variable's position in the
/// manager's (fixed) order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct BoolVar(pub(crate) u32);

impl BoolVar {
    pub fn id(self) -> u32 {
        self.0
    }

    /// Position in the global variable order.
    pub fn order_position(self) -> u32 {
        self.0
    }
}

impl fmt::Display for BoolVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// A duplicate-free set of variables, iterated in variable order.
///
/// Stored as a bitset over variable ids with no trailing zero words, so
/// equal sets compare and hash equal.
#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct VarSet(Vec<u64>);

impl VarSet {
    pub fn new() -> Self {
        VarSet(Vec::new())
    }

    fn trim(mut self) -> Self {
        while self.0.last() == Some(&0) {
            self.0.pop();
        }
        self
    }

    pub fn insert(&mut self, v: BoolVar) -> bool {
        let (w, b) = (v.0 as usize / 64, v.0 % 64);
        if w >= self.0.len() {
            self.0.resize(w + 1, 0);
        }
        let fresh = self.0[w] >> b & 1 == 0;
        self.0[w] |= 1 << b;
        fresh
    }

    pub fn contains(&self, v: BoolVar) -> bool {
        let (w, b) = (v.0 as usize / 64, v.0 % 64);
        self.0.get(w).is_some_and(|x| x >> b & 1 == 1)
    }

    pub fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter {
            words: &self.0,
            front: 0,
            back: self.0.len() * 64,
        }
    }

    pub fn union(&self, other: &VarSet) -> VarSet {
        let (long, short) = if self.0.len() >= other.0.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = long.0.clone();
        for (a, b) in out.iter_mut().zip(&short.0) {
            *a |= b;
        }
        VarSet(out)
    }

    pub fn difference(&self, other: &VarSet) -> VarSet {
        let mut out = self.0.clone();
        for (a, b) in out.iter_mut().zip(&other.0) {
            *a &= !b;
        }
        VarSet(out).trim()
    }

    pub fn intersection(&self, other: &VarSet) -> VarSet {
        VarSet(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect()).trim()
    }

    pub fn is_disjoint(&self, other: &VarSet) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & b == 0)
    }

    pub fn is_subset(&self, other: &VarSet) -> bool {
        self.0.len() <= other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }
}

/// Iterator over a [`VarSet`] in variable order.
#[derive(Clone, Debug)]
pub struct Iter<'a> {
    words: &'a [u64],
    /// Next bit position to examine from the front.
    front: usize,
    /// One past the last bit position to examine from the back.
    back: usize,
}

impl Iterator for Iter<'_> {
    type Item = BoolVar;

    fn next(&mut self) -> Option<BoolVar> {
        while self.front < self.back {
            let w = self.front / 64;
            let bits = self.words[w] >> (self.front % 64);
            if bits == 0 {
                self.front = (w + 1) * 64;
                continue;
            }
            let pos = self.front + bits.trailing_zeros() as usize;
            if pos >= self.back {
                self.front = self.back;
                return None;
            }
            self.front = pos + 1;
            return Some(BoolVar(pos as u32));
        }
        None
    }
}

impl DoubleEndedIterator for Iter<'_> {
    fn next_back(&mut self) -> Option<BoolVar> {
        while self.back > self.front {
            let last = self.back - 1;
            let w = last / 64;
            let bits = self.words[w] << (63 - last % 64);
            if bits == 0 {
                self.back = w * 64;
                continue;
            }
            let pos = last - bits.leading_zeros() as usize;
            if pos < self.front {
                self.back = self.front;
                return None;
            }
            self.back = pos;
            return Some(BoolVar(pos as u32));
        }
        None
    }
}

impl FromIterator<BoolVar> for VarSet {
    fn from_iter<I: IntoIterator<Item = BoolVar>>(iter: I) -> Self {
        let mut s = VarSet::new();
        s.extend(iter);
        s
    }
}

impl<'a> FromIterator<&'a BoolVar> for VarSet {
    fn from_iter<I: IntoIterator<Item = &'a BoolVar>>(iter: I) -> Self {
        iter.into_iter().copied().collect()
    }
}

impl Extend<BoolVar> for VarSet {
    fn extend<I: IntoIterator<Item = BoolVar>>(&mut self, iter: I) {
        for v in iter {
            self.insert(v);
        }
    }
}

impl<'a> IntoIterator for &'a VarSet {
    type Item = BoolVar;
    type IntoIter = Iter<'a>;

    fn into_iter(self) -> Self::IntoIter {
        self.iter()
    }
}
