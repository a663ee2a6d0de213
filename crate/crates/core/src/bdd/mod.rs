//! Reduced ordered binary decision diagrams.
//!
//! A [`Manager`] owns a shared, hash-consed node store over a fixed variable
//! order. Predicates are cheap [`Predicate`] handles into that store; since
//! the store is canonical, two predicates are logically equivalent exactly
//! when their handles compare equal.
//!
//! There are no complement edges. `node_count` therefore counts every
//! internal node reachable from the root, and negation allocates.
//!
//! Nodes are reclaimed only by an explicit [`Manager::gc`] call, which the
//! game solvers issue between iterations. Handles that are neither passed as
//! roots to `gc` nor [protected](Manager::protect) become dangling after a
//! collection.

mod cache;
mod serial;
mod varset;

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::sync::atomic::{AtomicU32, Ordering};

use rustc_hash::FxHashMap;
use thiserror::Error;

use cache::ComputedCache;
pub use serial::{read_predicate, write_predicate};
pub use varset::{BoolVar, VarSet};

type NodeId = u32;

const FALSE: NodeId = 0;
const TRUE: NodeId = 1;
const TERMINAL_LEVEL: u32 = u32::MAX;
const DEAD_LEVEL: u32 = u32::MAX - 1;

static NEXT_MANAGER_ID: AtomicU32 = AtomicU32::new(1);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BddError {
    #[error("duplicate variable name `{0}`")]
    DuplicateName(String),
    #[error("predicates belong to different managers")]
    MixedManagers,
    #[error("rename map is not injective: two variables map to {0}")]
    NotInjective(String),
    #[error("unknown variable {0}")]
    UnknownVar(String),
    #[error("support set is missing variable `{0}` used by the predicate")]
    SupportTooSmall(String),
    #[error("assignment is missing variable `{0}`")]
    MissingAssignment(String),
    #[error("malformed predicate text at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Binary boolean connectives accepted by [`Manager::apply`].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BinOp {
    And,
    Or,
    Xor,
    Implies,
}

/// Handle to a canonical predicate inside a [`Manager`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Predicate {
    mgr: u32,
    node: NodeId,
}

#[derive(Clone, Copy)]
struct Node {
    level: u32,
    lo: NodeId,
    hi: NodeId,
}

// computed-table tags
const OP_AND: u32 = 1;
const OP_OR: u32 = 2;
const OP_XOR: u32 = 3;
const OP_IMP: u32 = 4;
const OP_DIFF: u32 = 5;
const OP_NOT: u32 = 6;
const OP_EXISTS: u32 = 7;
const OP_FORALL: u32 = 8;
const OP_ANDEX: u32 = 9;
const OP_ITE: u32 = 10;
const OP_DIFFEX: u32 = 11;

pub struct Manager {
    id: u32,
    names: Vec<String>,
    by_name: FxHashMap<String, BoolVar>,
    nodes: Vec<Node>,
    unique: FxHashMap<(u32, NodeId, NodeId), NodeId>,
    free: Vec<NodeId>,
    cache: ComputedCache,
    protected: FxHashMap<NodeId, usize>,
    node_cap: Option<usize>,
    cap_exceeded: bool,
    collections: u64,
}

impl std::fmt::Debug for Manager {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Manager")
            .field("id", &self.id)
            .field("vars", &self.names.len())
            .field("live_nodes", &self.live_nodes())
            .finish()
    }
}

impl Manager {
    /// Creates a manager whose variable order is the order of `names`.
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Self, BddError> {
        Self::with_cache_size(names, 20)
    }

    /// Like [`Manager::new`] with a computed table of at most `2^log2_cache`
    /// slots.
    pub fn with_cache_size<S: AsRef<str>>(names: &[S], log2_cache: u32) -> Result<Self, BddError> {
        let mut m = Manager {
            id: NEXT_MANAGER_ID.fetch_add(1, Ordering::Relaxed),
            names: Vec::new(),
            by_name: FxHashMap::default(),
            nodes: vec![
                Node {
                    level: TERMINAL_LEVEL,
                    lo: FALSE,
                    hi: FALSE,
                },
                Node {
                    level: TERMINAL_LEVEL,
                    lo: TRUE,
                    hi: TRUE,
                },
            ],
            unique: FxHashMap::default(),
            free: Vec::new(),
            cache: ComputedCache::new(log2_cache),
            protected: FxHashMap::default(),
            node_cap: None,
            cap_exceeded: false,
            collections: 0,
        };
        for n in names {
            m.add_var(n.as_ref())?;
        }
        Ok(m)
    }

    /// Appends a variable at the end of the order.
    pub fn add_var(&mut self, name: &str) -> Result<BoolVar, BddError> {
        if self.by_name.contains_key(name) {
            return Err(BddError::DuplicateName(name.to_string()));
        }
        let v = BoolVar(self.names.len() as u32);
        self.names.push(name.to_string());
        self.by_name.insert(name.to_string(), v);
        Ok(v)
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn var(&self, name: &str) -> Option<BoolVar> {
        self.by_name.get(name).copied()
    }

    pub fn var_name(&self, v: BoolVar) -> &str {
        &self.names[v.0 as usize]
    }

    pub fn vars(&self) -> impl Iterator<Item = BoolVar> {
        (0..self.names.len() as u32).map(BoolVar)
    }

    pub fn top(&self) -> Predicate {
        self.wrap(TRUE)
    }

    pub fn bot(&self) -> Predicate {
        self.wrap(FALSE)
    }

    pub fn constant(&self, value: bool) -> Predicate {
        if value {
            self.top()
        } else {
            self.bot()
        }
    }

    pub fn is_true(&self, p: Predicate) -> bool {
        p.node == TRUE
    }

    pub fn is_false(&self, p: Predicate) -> bool {
        p.node == FALSE
    }

    /// The predicate `v` (or `¬v` when `positive` is false).
    pub fn literal(&mut self, v: BoolVar, positive: bool) -> Predicate {
        assert!(
            (v.0 as usize) < self.names.len(),
            "variable {v} not in manager"
        );
        let n = if positive {
            self.mk(v.0, FALSE, TRUE)
        } else {
            self.mk(v.0, TRUE, FALSE)
        };
        self.wrap(n)
    }

    pub fn ithvar(&mut self, v: BoolVar) -> Predicate {
        self.literal(v, true)
    }

    /// Conjunction of literals, one per entry.
    pub fn minterm(&mut self, lits: &[(BoolVar, bool)]) -> Predicate {
        let mut sorted: Vec<_> = lits.to_vec();
        sorted.sort_by_key(|(v, _)| std::cmp::Reverse(v.0));
        let mut acc = TRUE;
        for (v, pos) in sorted {
            acc = if pos {
                self.mk(v.0, FALSE, acc)
            } else {
                self.mk(v.0, acc, FALSE)
            };
        }
        self.wrap(acc)
    }

    // ---------------------------------------------------------------
    // handle plumbing

    #[inline]
    fn wrap(&self, node: NodeId) -> Predicate {
        Predicate { mgr: self.id, node }
    }

    #[inline]
    fn own(&self, p: Predicate) -> NodeId {
        assert_eq!(p.mgr, self.id, "{}", BddError::MixedManagers);
        p.node
    }

    fn check(&self, p: Predicate) -> Result<NodeId, BddError> {
        if p.mgr == self.id {
            Ok(p.node)
        } else {
            Err(BddError::MixedManagers)
        }
    }

    #[inline]
    fn level(&self, n: NodeId) -> u32 {
        self.nodes[n as usize].level
    }

    #[inline]
    fn lo(&self, n: NodeId) -> NodeId {
        self.nodes[n as usize].lo
    }

    #[inline]
    fn hi(&self, n: NodeId) -> NodeId {
        self.nodes[n as usize].hi
    }

    #[inline]
    fn cofactors(&self, n: NodeId, level: u32) -> (NodeId, NodeId) {
        let node = self.nodes[n as usize];
        if node.level == level {
            (node.lo, node.hi)
        } else {
            (n, n)
        }
    }

    fn mk(&mut self, level: u32, lo: NodeId, hi: NodeId) -> NodeId {
        if lo == hi {
            return lo;
        }
        debug_assert!(level < self.level(lo) && level < self.level(hi));
        let slot = match self.unique.entry((level, lo, hi)) {
            Entry::Occupied(e) => return *e.get(),
            Entry::Vacant(e) => e,
        };
        let node = Node { level, lo, hi };
        let id = match self.free.pop() {
            Some(id) => {
                self.nodes[id as usize] = node;
                id
            }
            None => {
                self.nodes.push(node);
                (self.nodes.len() - 1) as NodeId
            }
        };
        slot.insert(id);
        if self.nodes.len() > self.cache.len() {
            self.cache.grow();
        }
        if let Some(cap) = self.node_cap {
            if self.live_nodes() > cap {
                self.cap_exceeded = true;
            }
        }
        id
    }

    // ---------------------------------------------------------------
    // boolean operations

    /// Applies a binary connective. Fails when the operands come from
    /// different managers.
    pub fn apply(&mut self, op: BinOp, a: Predicate, b: Predicate) -> Result<Predicate, BddError> {
        let (a, b) = (self.check(a)?, self.check(b)?);
        let tag = match op {
            BinOp::And => OP_AND,
            BinOp::Or => OP_OR,
            BinOp::Xor => OP_XOR,
            BinOp::Implies => OP_IMP,
        };
        let r = self.apply_rec(tag, a, b);
        Ok(self.wrap(r))
    }

    pub fn and(&mut self, a: Predicate, b: Predicate) -> Predicate {
        let (a, b) = (self.own(a), self.own(b));
        let r = self.apply_rec(OP_AND, a, b);
        self.wrap(r)
    }

    pub fn or(&mut self, a: Predicate, b: Predicate) -> Predicate {
        let (a, b) = (self.own(a), self.own(b));
        let r = self.apply_rec(OP_OR, a, b);
        self.wrap(r)
    }

    pub fn xor(&mut self, a: Predicate, b: Predicate) -> Predicate {
        let (a, b) = (self.own(a), self.own(b));
        let r = self.apply_rec(OP_XOR, a, b);
        self.wrap(r)
    }

    pub fn implies(&mut self, a: Predicate, b: Predicate) -> Predicate {
        let (a, b) = (self.own(a), self.own(b));
        let r = self.apply_rec(OP_IMP, a, b);
        self.wrap(r)
    }

    /// `a ∧ ¬b`
    pub fn diff(&mut self, a: Predicate, b: Predicate) -> Predicate {
        let (a, b) = (self.own(a), self.own(b));
        let r = self.apply_rec(OP_DIFF, a, b);
        self.wrap(r)
    }

    /// `a ⇔ b`
    pub fn iff(&mut self, a: Predicate, b: Predicate) -> Predicate {
        let x = self.xor(a, b);
        self.not(x)
    }

    pub fn not(&mut self, a: Predicate) -> Predicate {
        let a = self.own(a);
        let r = self.not_rec(a);
        self.wrap(r)
    }

    pub fn ite(&mut self, f: Predicate, g: Predicate, h: Predicate) -> Predicate {
        let (f, g, h) = (self.own(f), self.own(g), self.own(h));
        let r = self.ite_rec(f, g, h);
        self.wrap(r)
    }

    pub fn and_all<I: IntoIterator<Item = Predicate>>(&mut self, it: I) -> Predicate {
        it.into_iter().fold(self.top(), |acc, p| self.and(acc, p))
    }

    pub fn or_all<I: IntoIterator<Item = Predicate>>(&mut self, it: I) -> Predicate {
        it.into_iter().fold(self.bot(), |acc, p| self.or(acc, p))
    }

    /// True when `a ⟹ b` is valid.
    pub fn entails(&mut self, a: Predicate, b: Predicate) -> bool {
        let d = self.diff(a, b);
        self.is_false(d)
    }

    fn not_rec(&mut self, f: NodeId) -> NodeId {
        match f {
            FALSE => return TRUE,
            TRUE => return FALSE,
            _ => {}
        }
        if let Some(r) = self.cache.get(OP_NOT, f, 0, 0) {
            return r;
        }
        let Node { level, lo, hi } = self.nodes[f as usize];
        let l = self.not_rec(lo);
        let h = self.not_rec(hi);
        let r = self.mk(level, l, h);
        self.cache.put(OP_NOT, f, 0, 0, r);
        r
    }

    fn apply_rec(&mut self, op: u32, mut f: NodeId, mut g: NodeId) -> NodeId {
        match op {
            OP_AND => {
                if f == FALSE || g == FALSE {
                    return FALSE;
                }
                if f == TRUE || f == g {
                    return g;
                }
                if g == TRUE {
                    return f;
                }
                if f > g {
                    std::mem::swap(&mut f, &mut g);
                }
            }
            OP_OR => {
                if f == TRUE || g == TRUE {
                    return TRUE;
                }
                if f == FALSE || f == g {
                    return g;
                }
                if g == FALSE {
                    return f;
                }
                if f > g {
                    std::mem::swap(&mut f, &mut g);
                }
            }
            OP_XOR => {
                if f == g {
                    return FALSE;
                }
                if f == FALSE {
                    return g;
                }
                if g == FALSE {
                    return f;
                }
                if f == TRUE {
                    return self.not_rec(g);
                }
                if g == TRUE {
                    return self.not_rec(f);
                }
                if f > g {
                    std::mem::swap(&mut f, &mut g);
                }
            }
            OP_IMP => {
                if f == FALSE || g == TRUE || f == g {
                    return TRUE;
                }
                if f == TRUE {
                    return g;
                }
                if g == FALSE {
                    return self.not_rec(f);
                }
            }
            OP_DIFF => {
                if f == FALSE || g == TRUE || f == g {
                    return FALSE;
                }
                if g == FALSE {
                    return f;
                }
                if f == TRUE {
                    return self.not_rec(g);
                }
            }
            _ => unreachable!("bad apply op {op}"),
        }
        if let Some(r) = self.cache.get(op, f, g, 0) {
            return r;
        }
        let level = self.level(f).min(self.level(g));
        let (f0, f1) = self.cofactors(f, level);
        let (g0, g1) = self.cofactors(g, level);
        let l = self.apply_rec(op, f0, g0);
        let h = self.apply_rec(op, f1, g1);
        let r = self.mk(level, l, h);
        self.cache.put(op, f, g, 0, r);
        r
    }

    fn ite_rec(&mut self, f: NodeId, g: NodeId, h: NodeId) -> NodeId {
        if f == TRUE {
            return g;
        }
        if f == FALSE {
            return h;
        }
        if g == h {
            return g;
        }
        if g == TRUE && h == FALSE {
            return f;
        }
        if g == FALSE && h == TRUE {
            return self.not_rec(f);
        }
        if g == TRUE {
            return self.apply_rec(OP_OR, f, h);
        }
        if h == FALSE {
            return self.apply_rec(OP_AND, f, g);
        }
        if let Some(r) = self.cache.get(OP_ITE, f, g, h) {
            return r;
        }
        let level = self.level(f).min(self.level(g)).min(self.level(h));
        let (f0, f1) = self.cofactors(f, level);
        let (g0, g1) = self.cofactors(g, level);
        let (h0, h1) = self.cofactors(h, level);
        let l = self.ite_rec(f0, g0, h0);
        let hi = self.ite_rec(f1, g1, h1);
        let r = self.mk(level, l, hi);
        self.cache.put(OP_ITE, f, g, h, r);
        r
    }

    // ---------------------------------------------------------------
    // quantification

    /// Positive cube over `vars`, used as the quantification key.
    fn cube(&mut self, vars: &VarSet) -> NodeId {
        let mut acc = TRUE;
        for v in vars.iter().rev() {
            assert!(
                (v.0 as usize) < self.names.len(),
                "variable {v} not in manager"
            );
            acc = self.mk(v.0, FALSE, acc);
        }
        acc
    }

    /// `∃vars. p`
    pub fn exists(&mut self, vars: &VarSet, p: Predicate) -> Predicate {
        let p = self.own(p);
        let cube = self.cube(vars);
        let r = self.exists_rec(p, cube);
        self.wrap(r)
    }

    /// `∀vars. p`
    pub fn forall(&mut self, vars: &VarSet, p: Predicate) -> Predicate {
        let p = self.own(p);
        let cube = self.cube(vars);
        let r = self.forall_rec(p, cube);
        self.wrap(r)
    }

    /// `∃vars. (a ∧ b)` without building the conjunction.
    pub fn and_exists(&mut self, vars: &VarSet, a: Predicate, b: Predicate) -> Predicate {
        let (a, b) = (self.own(a), self.own(b));
        let cube = self.cube(vars);
        let r = self.and_exists_rec(a, b, cube);
        self.wrap(r)
    }

    /// `∃vars. (a ∧ ¬b)` without building `¬b`.
    pub fn diff_exists(&mut self, vars: &VarSet, a: Predicate, b: Predicate) -> Predicate {
        let (a, b) = (self.own(a), self.own(b));
        let cube = self.cube(vars);
        let r = self.diff_exists_rec(a, b, cube);
        self.wrap(r)
    }

    /// `∀vars. (a ⟹ b)`, computed as `¬∃vars. (a ∧ ¬b)`.
    pub fn forall_implies(&mut self, vars: &VarSet, a: Predicate, b: Predicate) -> Predicate {
        let e = self.diff_exists(vars, a, b);
        self.not(e)
    }

    fn skip_cube(&self, mut cube: NodeId, level: u32) -> NodeId {
        while cube != TRUE && self.level(cube) < level {
            cube = self.hi(cube);
        }
        cube
    }

    fn exists_rec(&mut self, f: NodeId, cube: NodeId) -> NodeId {
        if f <= TRUE {
            return f;
        }
        let level = self.level(f);
        let cube = self.skip_cube(cube, level);
        if cube == TRUE {
            return f;
        }
        if let Some(r) = self.cache.get(OP_EXISTS, f, cube, 0) {
            return r;
        }
        let Node { lo, hi, .. } = self.nodes[f as usize];
        let r = if self.level(cube) == level {
            let next = self.hi(cube);
            let l = self.exists_rec(lo, next);
            if l == TRUE {
                TRUE
            } else {
                let h = self.exists_rec(hi, next);
                self.apply_rec(OP_OR, l, h)
            }
        } else {
            let l = self.exists_rec(lo, cube);
            let h = self.exists_rec(hi, cube);
            self.mk(level, l, h)
        };
        self.cache.put(OP_EXISTS, f, cube, 0, r);
        r
    }

    fn forall_rec(&mut self, f: NodeId, cube: NodeId) -> NodeId {
        if f <= TRUE {
            return f;
        }
        let level = self.level(f);
        let cube = self.skip_cube(cube, level);
        if cube == TRUE {
            return f;
        }
        if let Some(r) = self.cache.get(OP_FORALL, f, cube, 0) {
            return r;
        }
        let Node { lo, hi, .. } = self.nodes[f as usize];
        let r = if self.level(cube) == level {
            let next = self.hi(cube);
            let l = self.forall_rec(lo, next);
            if l == FALSE {
                FALSE
            } else {
                let h = self.forall_rec(hi, next);
                self.apply_rec(OP_AND, l, h)
            }
        } else {
            let l = self.forall_rec(lo, cube);
            let h = self.forall_rec(hi, cube);
            self.mk(level, l, h)
        };
        self.cache.put(OP_FORALL, f, cube, 0, r);
        r
    }

    fn and_exists_rec(&mut self, mut f: NodeId, mut g: NodeId, cube: NodeId) -> NodeId {
        if f == FALSE || g == FALSE {
            return FALSE;
        }
        if f == TRUE && g == TRUE {
            return TRUE;
        }
        if f == TRUE || f == g {
            return self.exists_rec(g, cube);
        }
        if g == TRUE {
            return self.exists_rec(f, cube);
        }
        let level = self.level(f).min(self.level(g));
        let cube = self.skip_cube(cube, level);
        if cube == TRUE {
            return self.apply_rec(OP_AND, f, g);
        }
        if f > g {
            std::mem::swap(&mut f, &mut g);
        }
        if let Some(r) = self.cache.get(OP_ANDEX, f, g, cube) {
            return r;
        }
        let (f0, f1) = self.cofactors(f, level);
        let (g0, g1) = self.cofactors(g, level);
        let r = if self.level(cube) == level {
            let next = self.hi(cube);
            let l = self.and_exists_rec(f0, g0, next);
            if l == TRUE {
                TRUE
            } else {
                let h = self.and_exists_rec(f1, g1, next);
                self.apply_rec(OP_OR, l, h)
            }
        } else {
            let l = self.and_exists_rec(f0, g0, cube);
            let h = self.and_exists_rec(f1, g1, cube);
            self.mk(level, l, h)
        };
        self.cache.put(OP_ANDEX, f, g, cube, r);
        r
    }

    fn diff_exists_rec(&mut self, f: NodeId, g: NodeId, cube: NodeId) -> NodeId {
        if f == FALSE || g == TRUE || f == g {
            return FALSE;
        }
        if g == FALSE {
            return self.exists_rec(f, cube);
        }
        let level = self.level(f).min(self.level(g));
        let cube = self.skip_cube(cube, level);
        if cube == TRUE {
            return self.apply_rec(OP_DIFF, f, g);
        }
        if f == TRUE {
            let all = self.forall_rec(g, cube);
            return self.not_rec(all);
        }
        if let Some(r) = self.cache.get(OP_DIFFEX, f, g, cube) {
            return r;
        }
        let (f0, f1) = self.cofactors(f, level);
        let (g0, g1) = self.cofactors(g, level);
        let r = if self.level(cube) == level {
            let next = self.hi(cube);
            let l = self.diff_exists_rec(f0, g0, next);
            if l == TRUE {
                TRUE
            } else {
                let h = self.diff_exists_rec(f1, g1, next);
                self.apply_rec(OP_OR, l, h)
            }
        } else {
            let l = self.diff_exists_rec(f0, g0, cube);
            let h = self.diff_exists_rec(f1, g1, cube);
            self.mk(level, l, h)
        };
        self.cache.put(OP_DIFFEX, f, g, cube, r);
        r
    }

    // ---------------------------------------------------------------
    // substitution

    /// Simultaneous variable substitution. Variables absent from `map` are
    /// left alone.
    pub fn rename(
        &mut self,
        p: Predicate,
        map: &[(BoolVar, BoolVar)],
    ) -> Result<Predicate, BddError> {
        let f = self.check(p)?;
        let mut table: FxHashMap<u32, u32> = FxHashMap::default();
        let mut images: FxHashMap<u32, u32> = FxHashMap::default();
        for &(from, to) in map {
            for v in [from, to] {
                if v.0 as usize >= self.names.len() {
                    return Err(BddError::UnknownVar(v.to_string()));
                }
            }
            if let Some(&prev) = table.get(&from.0) {
                if prev != to.0 {
                    return Err(BddError::NotInjective(self.names[from.0 as usize].clone()));
                }
                continue;
            }
            if let Some(&other) = images.get(&to.0) {
                if other != from.0 {
                    return Err(BddError::NotInjective(self.names[to.0 as usize].clone()));
                }
            }
            table.insert(from.0, to.0);
            images.insert(to.0, from.0);
        }
        if table.iter().all(|(a, b)| a == b) {
            return Ok(p);
        }
        // Order-preserving on the support: relabel nodes in place.
        let support: Vec<u32> = self.support_levels(f);
        let mapped: Vec<u32> = support.iter().map(|l| *table.get(l).unwrap_or(l)).collect();
        let monotone = mapped.windows(2).all(|w| w[0] < w[1]);
        let mut memo: FxHashMap<NodeId, NodeId> = FxHashMap::default();
        let r = if monotone {
            self.relabel_rec(f, &table, &mut memo)
        } else {
            self.compose_rec(f, &table, &mut memo)
        };
        Ok(self.wrap(r))
    }

    fn relabel_rec(
        &mut self,
        f: NodeId,
        table: &FxHashMap<u32, u32>,
        memo: &mut FxHashMap<NodeId, NodeId>,
    ) -> NodeId {
        if f <= TRUE {
            return f;
        }
        if let Some(&r) = memo.get(&f) {
            return r;
        }
        let Node { level, lo, hi } = self.nodes[f as usize];
        let l = self.relabel_rec(lo, table, memo);
        let h = self.relabel_rec(hi, table, memo);
        let r = self.mk(*table.get(&level).unwrap_or(&level), l, h);
        memo.insert(f, r);
        r
    }

    fn compose_rec(
        &mut self,
        f: NodeId,
        table: &FxHashMap<u32, u32>,
        memo: &mut FxHashMap<NodeId, NodeId>,
    ) -> NodeId {
        if f <= TRUE {
            return f;
        }
        if let Some(&r) = memo.get(&f) {
            return r;
        }
        let Node { level, lo, hi } = self.nodes[f as usize];
        let l = self.compose_rec(lo, table, memo);
        let h = self.compose_rec(hi, table, memo);
        let target = *table.get(&level).unwrap_or(&level);
        let v = self.mk(target, FALSE, TRUE);
        let r = self.ite_rec(v, h, l);
        memo.insert(f, r);
        r
    }

    // ---------------------------------------------------------------
    // inspection

    fn support_levels(&self, f: NodeId) -> Vec<u32> {
        let mut seen = rustc_hash::FxHashSet::default();
        let mut levels = std::collections::BTreeSet::new();
        let mut stack = vec![f];
        while let Some(n) = stack.pop() {
            if n <= TRUE || !seen.insert(n) {
                continue;
            }
            let node = self.nodes[n as usize];
            levels.insert(node.level);
            stack.push(node.lo);
            stack.push(node.hi);
        }
        levels.into_iter().collect()
    }

    /// Variables the predicate actually depends on.
    pub fn support(&self, p: Predicate) -> VarSet {
        let f = self.own(p);
        self.support_levels(f).into_iter().map(BoolVar).collect()
    }

    /// Number of distinct internal nodes reachable from `p`; the two
    /// constants are not counted.
    pub fn node_count(&self, p: Predicate) -> usize {
        self.shared_node_count(&[p])
    }

    /// Internal nodes reachable from any of `ps`, counting shared nodes once.
    pub fn shared_node_count(&self, ps: &[Predicate]) -> usize {
        let mut seen = rustc_hash::FxHashSet::default();
        let mut stack: Vec<NodeId> = ps.iter().map(|p| self.own(*p)).collect();
        while let Some(n) = stack.pop() {
            if n <= TRUE || !seen.insert(n) {
                continue;
            }
            stack.push(self.lo(n));
            stack.push(self.hi(n));
        }
        seen.len()
    }

    /// Exact number of satisfying assignments over exactly `support`.
    pub fn sat_count(&self, p: Predicate, support: &VarSet) -> Result<u128, BddError> {
        let f = self.check(p)?;
        let total = support.len() as u32;
        let mut pos = vec![u32::MAX; self.names.len()];
        for (i, v) in support.iter().enumerate() {
            if let Some(slot) = pos.get_mut(v.0 as usize) {
                *slot = i as u32;
            }
        }
        struct Counter<'a> {
            nodes: &'a [Node],
            pos: Vec<u32>,
            total: u32,
            memo: FxHashMap<NodeId, u128>,
        }
        impl Counter<'_> {
            fn position(&self, n: NodeId) -> Result<u32, u32> {
                if n <= TRUE {
                    return Ok(self.total);
                }
                let level = self.nodes[n as usize].level;
                match self.pos[level as usize] {
                    u32::MAX => Err(level),
                    p => Ok(p),
                }
            }

            fn count(&mut self, n: NodeId) -> Result<u128, u32> {
                if n <= TRUE {
                    return Ok(n as u128);
                }
                if let Some(&c) = self.memo.get(&n) {
                    return Ok(c);
                }
                let Node { lo, hi, .. } = self.nodes[n as usize];
                let here = self.position(n)?;
                let cl = self.count(lo)? << (self.position(lo)? - here - 1);
                let ch = self.count(hi)? << (self.position(hi)? - here - 1);
                self.memo.insert(n, cl + ch);
                Ok(cl + ch)
            }
        }
        let mut c = Counter {
            nodes: &self.nodes,
            pos,
            total,
            memo: FxHashMap::default(),
        };
        let run = |c: &mut Counter| -> Result<u128, u32> { Ok(c.count(f)? << c.position(f)?) };
        run(&mut c).map_err(|level| BddError::SupportTooSmall(self.names[level as usize].clone()))
    }

    /// Evaluates `p` under a total assignment of its support.
    pub fn eval(
        &self,
        p: Predicate,
        assignment: &HashMap<BoolVar, bool>,
    ) -> Result<bool, BddError> {
        let mut n = self.check(p)?;
        while n > TRUE {
            let node = self.nodes[n as usize];
            let v = BoolVar(node.level);
            let val = assignment.get(&v).ok_or_else(|| {
                BddError::MissingAssignment(self.names[node.level as usize].clone())
            })?;
            n = if *val { node.hi } else { node.lo };
        }
        Ok(n == TRUE)
    }

    /// Evaluates `p` with a callback supplying variable values.
    pub fn eval_with(&self, p: Predicate, mut value: impl FnMut(BoolVar) -> bool) -> bool {
        let mut n = self.own(p);
        while n > TRUE {
            let node = self.nodes[n as usize];
            n = if value(BoolVar(node.level)) {
                node.hi
            } else {
                node.lo
            };
        }
        n == TRUE
    }

    /// Calls `f` once per disjoint cube of `p`, restricted to `vars`
    /// (which must cover the support). Each cube maps the entries of
    /// `vars` to `Some(value)` or `None` for don't-care.
    pub fn for_each_cube(&self, p: Predicate, vars: &VarSet, mut f: impl FnMut(&[Option<bool>])) {
        let root = self.own(p);
        let order: Vec<u32> = vars.iter().map(|v| v.0).collect();
        let mut cur = vec![None; order.len()];
        self.cube_rec(root, &order, 0, &mut cur, &mut f);
    }

    fn cube_rec(
        &self,
        n: NodeId,
        order: &[u32],
        idx: usize,
        cur: &mut Vec<Option<bool>>,
        f: &mut impl FnMut(&[Option<bool>]),
    ) {
        if n == FALSE {
            return;
        }
        if n == TRUE {
            for c in cur[idx..].iter_mut() {
                *c = None;
            }
            f(cur);
            return;
        }
        let level = self.level(n);
        let mut i = idx;
        while i < order.len() && order[i] != level {
            cur[i] = None;
            i += 1;
        }
        assert!(
            i < order.len(),
            "cube variables do not cover predicate support"
        );
        let Node { lo, hi, .. } = self.nodes[n as usize];
        cur[i] = Some(false);
        self.cube_rec(lo, order, i + 1, cur, f);
        cur[i] = Some(true);
        self.cube_rec(hi, order, i + 1, cur, f);
    }

    // ---------------------------------------------------------------
    // memory management

    /// Soft cap on live nodes. Exceeding it never fails an operation; it
    /// raises a flag that callers poll with [`Manager::cap_exceeded`].
    pub fn set_node_cap(&mut self, cap: Option<usize>) {
        self.node_cap = cap;
        self.cap_exceeded = cap.is_some_and(|c| self.live_nodes() > c);
    }

    pub fn cap_exceeded(&self) -> bool {
        self.cap_exceeded
    }

    pub fn live_nodes(&self) -> usize {
        self.nodes.len() - self.free.len() - 2
    }

    /// Number of completed collections.
    pub fn collections(&self) -> u64 {
        self.collections
    }

    /// Keeps `p` alive across collections until a matching `unprotect`.
    pub fn protect(&mut self, p: Predicate) {
        let n = self.own(p);
        *self.protected.entry(n).or_insert(0) += 1;
    }

    pub fn unprotect(&mut self, p: Predicate) {
        let n = self.own(p);
        if let Some(c) = self.protected.get_mut(&n) {
            *c -= 1;
            if *c == 0 {
                self.protected.remove(&n);
            }
        }
    }

    /// Frees every node not reachable from `roots` or a protected handle.
    /// Surviving handles keep their identity.
    pub fn gc(&mut self, roots: &[Predicate]) {
        let mut marked = vec![false; self.nodes.len()];
        marked[FALSE as usize] = true;
        marked[TRUE as usize] = true;
        let mut stack: Vec<NodeId> = roots.iter().map(|p| self.own(*p)).collect();
        stack.extend(self.protected.keys().copied());
        while let Some(n) = stack.pop() {
            if marked[n as usize] {
                continue;
            }
            marked[n as usize] = true;
            let node = self.nodes[n as usize];
            stack.push(node.lo);
            stack.push(node.hi);
        }
        self.free.clear();
        self.unique.clear();
        for (i, node) in self.nodes.iter_mut().enumerate().skip(2) {
            if marked[i] {
                self.unique
                    .insert((node.level, node.lo, node.hi), i as NodeId);
            } else {
                *node = Node {
                    level: DEAD_LEVEL,
                    lo: FALSE,
                    hi: FALSE,
                };
                self.free.push(i as NodeId);
            }
        }
        // trailing dead slots can simply be dropped
        while self.nodes.len() > 2 && self.nodes.last().is_some_and(|n| n.level == DEAD_LEVEL) {
            self.nodes.pop();
        }
        let len = self.nodes.len() as NodeId;
        self.free.retain(|&i| i < len);
        // reuse low slots first
        self.free.sort_unstable_by(|a, b| b.cmp(a));
        self.cache.invalidate();
        self.collections += 1;
        self.cap_exceeded = self.node_cap.is_some_and(|c| self.live_nodes() > c);
    }

    pub(crate) fn raw_node(&self, p: Predicate) -> (Option<BoolVar>, Predicate, Predicate) {
        let n = self.own(p);
        if n <= TRUE {
            return (None, p, p);
        }
        let node = self.nodes[n as usize];
        (
            Some(BoolVar(node.level)),
            self.wrap(node.lo),
            self.wrap(node.hi),
        )
    }

    pub(crate) fn node_id(&self, p: Predicate) -> u32 {
        self.own(p)
    }

    pub(crate) fn make_node(&mut self, v: BoolVar, lo: Predicate, hi: Predicate) -> Predicate {
        let (lo, hi) = (self.own(lo), self.own(hi));
        let lit = self.mk(v.0, FALSE, TRUE);
        let r = self.ite_rec(lit, hi, lo);
        self.wrap(r)
    }
}

#[cfg(test)]
mod tests;
