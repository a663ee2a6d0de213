//! Seeded random interfaces and executable statements of the algebraic laws
//! the interface operators must satisfy.
//!
//! Every check draws a fresh instance from the supplied generator and
//! returns `Err` with a description when the law is violated, so the same
//! checks back both the unit tests and the acceptance harness.
//!
//! # Abstraction generator
//!
//! [`Generator::abstraction_of`] turns a concrete `B(i, o)` into
//! `A = ¬K ∧ NB(B) ∧ (B ∨ E)` with a random sink `K` (extra blocked
//! inputs) and a random `E(i, o)` (extra output non-determinism). Then
//! `NB(A) = ¬K ∧ NB(B) ⟹ NB(B)` and `B ⟹ A` inside `NB(A)`, so `A ⪯ B`
//! holds by construction.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bdd::{BoolVar, Manager, Predicate, VarSet};
use crate::interface::{self as ia, Interface};

/// Builds the predicate over `vars` whose truth table is `table`; bit `k`
/// of the row index is the value of `vars[k]`.
pub fn table_predicate(
    mgr: &mut Manager,
    vars: &[BoolVar],
    table: impl Fn(u64) -> bool,
) -> Predicate {
    fn rec(
        mgr: &mut Manager,
        vars: &[BoolVar],
        k: usize,
        row: u64,
        table: &dyn Fn(u64) -> bool,
    ) -> Predicate {
        if k == vars.len() {
            return mgr.constant(table(row));
        }
        let lo = rec(mgr, vars, k + 1, row, table);
        let hi = rec(mgr, vars, k + 1, row | 1 << k, table);
        let x = mgr.ithvar(vars[k]);
        mgr.ite(x, hi, lo)
    }
    rec(mgr, vars, 0, 0, &table)
}

/// Seeded source of random predicates and interfaces.
pub struct Generator {
    rng: ChaCha8Rng,
}

impl Generator {
    pub fn new(seed: u64) -> Self {
        Generator {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Random predicate over `vars` with each row true with probability
    /// `density`.
    pub fn predicate(&mut self, mgr: &mut Manager, vars: &[BoolVar], density: f64) -> Predicate {
        let rows: Vec<bool> = (0..1u64 << vars.len())
            .map(|_| self.rng.gen_bool(density))
            .collect();
        table_predicate(mgr, vars, |r| rows[r as usize])
    }

    fn density(&mut self) -> f64 {
        *[0.25, 0.5, 0.75, 0.9].choose(&mut self.rng).unwrap()
    }

    pub fn interface(&mut self, mgr: &mut Manager, ins: &[BoolVar], outs: &[BoolVar]) -> Interface {
        let all: Vec<BoolVar> = ins.iter().chain(outs).copied().collect();
        let d = self.density();
        let p = self.predicate(mgr, &all, d);
        Interface::new(mgr, ins.iter().collect(), outs.iter().collect(), p).unwrap()
    }

    /// Random interface where every input has at least one output.
    pub fn total_interface(
        &mut self,
        mgr: &mut Manager,
        ins: &[BoolVar],
        outs: &[BoolVar],
    ) -> Interface {
        let f = self.interface(mgr, ins, outs);
        let n = ia::nb(mgr, &f).pred();
        let fallback = self.predicate(mgr, outs, 0.5);
        let fallback = if mgr.is_false(fallback) {
            mgr.top()
        } else {
            fallback
        };
        let blocked = mgr.not(n);
        let patch = mgr.and(blocked, fallback);
        let p = mgr.or(f.pred(), patch);
        f.with_pred(p)
    }

    /// An abstraction of `b`; see the module docs for the construction.
    pub fn abstraction_of(&mut self, mgr: &mut Manager, b: &Interface) -> Interface {
        let ins: Vec<BoolVar> = b.inputs().iter().collect();
        let all: Vec<BoolVar> = b.inputs().iter().chain(b.outputs().iter()).collect();
        let kd = *[0.0, 0.2, 0.5].choose(&mut self.rng).unwrap();
        let ed = *[0.0, 0.3, 0.6].choose(&mut self.rng).unwrap();
        let k = self.predicate(mgr, &ins, kd);
        let e = self.predicate(mgr, &all, ed);
        let nb = ia::nb(mgr, b).pred();
        let keep = mgr.diff(nb, k);
        let wide = mgr.or(b.pred(), e);
        let p = mgr.and(keep, wide);
        b.with_pred(p)
    }

    /// Picks `n` distinct variables from `pool`.
    pub fn pick(&mut self, pool: &[BoolVar], n: usize) -> Vec<BoolVar> {
        let mut v = pool.to_vec();
        v.shuffle(&mut self.rng);
        v.truncate(n);
        v
    }

    /// Random subset of `from` (possibly empty unless `nonempty`).
    pub fn subset(&mut self, from: &[BoolVar], nonempty: bool) -> Vec<BoolVar> {
        loop {
            let s: Vec<BoolVar> = from
                .iter()
                .copied()
                .filter(|_| self.rng.gen_bool(0.5))
                .collect();
            if !nonempty || !s.is_empty() || from.is_empty() {
                return s;
            }
        }
    }
}

/// A manager holding `n` anonymous variables `v0 … v{n-1}`.
pub fn pool(n: usize) -> (Manager, Vec<BoolVar>) {
    let names: Vec<String> = (0..n).map(|k| format!("v{k}")).collect();
    let mgr = Manager::new(&names).unwrap();
    let vars = mgr.vars().collect();
    (mgr, vars)
}

pub type LawResult = Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> LawResult {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn set(v: &[BoolVar]) -> VarSet {
    v.iter().collect()
}

/// Parallel composition is conjunction, commutative and associative.
pub fn parallel_comp(mgr: &mut Manager, pool: &[BoolVar], g: &mut Generator) -> LawResult {
    let v = g.pick(pool, 9);
    let shared = &v[0..1];
    let mk = |g: &mut Generator, mgr: &mut Manager, own_in: &[BoolVar], out: &[BoolVar]| {
        let mut ins = own_in.to_vec();
        if g.rng.gen_bool(0.5) {
            ins.extend_from_slice(shared);
        }
        g.interface(mgr, &ins, out)
    };
    let a = mk(g, mgr, &v[1..2], &v[2..3]);
    let b = mk(g, mgr, &v[3..4], &v[4..6]);
    let c = mk(g, mgr, &v[6..7], &v[7..9]);
    let ab = ia::comp(mgr, &a, &b).map_err(|e| e.to_string())?;
    let ba = ia::comp(mgr, &b, &a).map_err(|e| e.to_string())?;
    let conj = mgr.and(a.pred(), b.pred());
    ensure(ab.pred() == conj, || {
        "parallel comp differs from conjunction".into()
    })?;
    ensure(ab == ba, || "parallel comp not commutative".into())?;
    let ab_c = ia::comp(mgr, &ab, &c).map_err(|e| e.to_string())?;
    let bc = ia::comp(mgr, &b, &c).map_err(|e| e.to_string())?;
    let a_bc = ia::comp(mgr, &a, &bc).map_err(|e| e.to_string())?;
    ensure(ab_c == a_bc, || "parallel comp not associative".into())
}

/// Series composition of a random acyclic triple is associative, and
/// composition auto-orients its arguments.
pub fn series_associativity(mgr: &mut Manager, pool: &[BoolVar], g: &mut Generator) -> LawResult {
    let v = g.pick(pool, 8);
    let (ext, o1, o2, o3) = (&v[0..2], &v[2..4], &v[4..6], &v[6..8]);
    let i1 = g.subset(ext, true);
    let from2: Vec<BoolVar> = ext.iter().chain(o1).copied().collect();
    let mut i2 = g.subset(&from2, false);
    if !i2.iter().any(|x| o1.contains(x)) {
        i2.push(o1[0]);
    }
    let from3: Vec<BoolVar> = ext.iter().chain(o1).chain(o2).copied().collect();
    let mut i3 = g.subset(&from3, false);
    if !i3.iter().any(|x| o2.contains(x)) {
        i3.push(o2[1]);
    }
    let f1 = g.interface(mgr, &i1, o1);
    let f2 = g.interface(mgr, &i2, o2);
    let f3 = g.interface(mgr, &i3, o3);
    let c12 = ia::comp(mgr, &f1, &f2).map_err(|e| e.to_string())?;
    let c21 = ia::comp(mgr, &f2, &f1).map_err(|e| e.to_string())?;
    ensure(c12 == c21, || "comp does not auto-orient".into())?;
    let left = ia::comp(mgr, &c12, &f3).map_err(|e| e.to_string())?;
    let c23 = ia::comp(mgr, &f2, &f3).map_err(|e| e.to_string())?;
    let right = ia::comp(mgr, &f1, &c23).map_err(|e| e.to_string())?;
    ensure(left == right, || "series comp not associative".into())
}

/// Every operator produces exactly its defined signature, and results
/// only depend on signature variables.
pub fn signatures(mgr: &mut Manager, pool: &[BoolVar], g: &mut Generator) -> LawResult {
    let v = g.pick(pool, 7);
    let f1 = g.interface(mgr, &v[0..2], &v[2..4]);
    let i2 = [v[2], v[4]];
    let f2 = g.interface(mgr, &i2, &v[5..7]);
    let check = |mgr: &Manager,
                 f: &Interface,
                 ins: &[BoolVar],
                 outs: &[BoolVar],
                 what: &str|
     -> LawResult {
        ensure(f.inputs() == &set(ins) && f.outputs() == &set(outs), || {
            format!("{what}: wrong signature")
        })?;
        let sig = f.inputs().union(f.outputs());
        ensure(mgr.support(f.pred()).is_subset(&sig), || {
            format!("{what}: support escapes signature")
        })
    };
    let c = ia::comp(mgr, &f1, &f2).map_err(|e| e.to_string())?;
    check(
        mgr,
        &c,
        &[v[0], v[1], v[4]],
        &[v[2], v[3], v[5], v[6]],
        "comp",
    )?;
    let h = ia::ohide(mgr, &set(&[v[3]]), &f1).map_err(|e| e.to_string())?;
    check(mgr, &h, &v[0..2], &[v[2]], "ohide")?;
    let n = ia::nb(mgr, &f1);
    check(mgr, &n, &v[0..2], &[], "nb")?;
    let ih = ia::ihide(mgr, &set(&[v[1]]), &n).map_err(|e| e.to_string())?;
    check(mgr, &ih, &[v[0]], &[], "ihide")?;
    let f1b = g.interface(mgr, &v[0..2], &v[2..4]);
    let r = ia::refine(mgr, &f1, &f1b).map_err(|e| e.to_string())?;
    check(mgr, &r, &v[0..2], &v[2..4], "refine")?;
    let oc = ia::ohide_comp(mgr, &set(&[v[2], v[5]]), &f1, &f2).map_err(|e| e.to_string())?;
    check(mgr, &oc, &[v[0], v[1], v[4]], &[v[3], v[6]], "ohide_comp")
}

/// Refinement is reflexive, transitive and antisymmetric.
pub fn partial_order(mgr: &mut Manager, pool: &[BoolVar], g: &mut Generator) -> LawResult {
    let v = g.pick(pool, 4);
    let c = g.interface(mgr, &v[0..2], &v[2..4]);
    ensure(ia::refines(mgr, &c, &c), || "not reflexive".into())?;
    let b = g.abstraction_of(mgr, &c);
    let a = g.abstraction_of(mgr, &b);
    ensure(ia::refines(mgr, &b, &c) && ia::refines(mgr, &a, &b), || {
        "generator broke the order".into()
    })?;
    ensure(ia::refines(mgr, &a, &c), || "not transitive".into())?;
    // small signature so random pairs are often related
    let x = g.interface(mgr, &v[0..1], &v[2..3]);
    let y = g.interface(mgr, &v[0..1], &v[2..3]);
    let z = g.interface(mgr, &v[0..1], &v[2..3]);
    if ia::refines(mgr, &x, &y) && ia::refines(mgr, &y, &x) {
        ensure(x == y, || "not antisymmetric".into())?;
    }
    if ia::refines(mgr, &x, &y) && ia::refines(mgr, &y, &z) {
        ensure(ia::refines(mgr, &x, &z), || {
            "not transitive on random triple".into()
        })?;
    }
    Ok(())
}

/// Composition preserves refinement: `Â⪯A ∧ B̂⪯B ⟹ comp(Â,B̂) ⪯ comp(A,B)`.
pub fn comp_monotone(mgr: &mut Manager, pool: &[BoolVar], g: &mut Generator) -> LawResult {
    let v = g.pick(pool, 7);
    let (ext, o1, o2) = (&v[0..3], &v[3..5], &v[5..7]);
    let i1 = g.subset(ext, true);
    let from2: Vec<BoolVar> = ext.iter().chain(o1).copied().collect();
    let i2 = g.subset(&from2, true);
    let a = g.interface(mgr, &i1, o1);
    let b = g.interface(mgr, &i2, o2);
    let ah = g.abstraction_of(mgr, &a);
    let bh = g.abstraction_of(mgr, &b);
    let c = ia::comp(mgr, &a, &b).map_err(|e| e.to_string())?;
    let ch = ia::comp(mgr, &ah, &bh).map_err(|e| e.to_string())?;
    ensure(ia::refines(mgr, &ch, &c), || {
        "comp does not preserve refinement".into()
    })
}

/// Output hiding preserves refinement.
pub fn ohide_monotone(mgr: &mut Manager, pool: &[BoolVar], g: &mut Generator) -> LawResult {
    let v = g.pick(pool, 6);
    let b = g.interface(mgr, &v[0..3], &v[3..6]);
    let a = g.abstraction_of(mgr, &b);
    let w = set(&g.subset(&v[3..6], false));
    let ha = ia::ohide(mgr, &w, &a).map_err(|e| e.to_string())?;
    let hb = ia::ohide(mgr, &w, &b).map_err(|e| e.to_string())?;
    ensure(ia::refines(mgr, &ha, &hb), || {
        "ohide does not preserve refinement".into()
    })
}

/// Input hiding preserves refinement of sinks.
pub fn ihide_monotone(mgr: &mut Manager, pool: &[BoolVar], g: &mut Generator) -> LawResult {
    let v = g.pick(pool, 6);
    let b = g.interface(mgr, &v, &[]);
    let a = g.abstraction_of(mgr, &b);
    let w = set(&g.subset(&v, false));
    let ha = ia::ihide(mgr, &w, &a).map_err(|e| e.to_string())?;
    let hb = ia::ihide(mgr, &w, &b).map_err(|e| e.to_string())?;
    ensure(ia::refines(mgr, &ha, &hb), || {
        "ihide does not preserve refinement".into()
    })
}

/// Shared refinement is the least upper bound of refinable pairs, and the
/// post-hoc validity check agrees with shared refinability.
pub fn refine_lub(mgr: &mut Manager, pool: &[BoolVar], g: &mut Generator) -> LawResult {
    let v = g.pick(pool, 5);
    let (ins, outs) = (&v[0..3], &v[3..5]);
    let top = g.interface(mgr, ins, outs);
    let f1 = g.abstraction_of(mgr, &top);
    let f2 = g.abstraction_of(mgr, &top);
    let refinable = ia::is_shared_refinable(mgr, &f1, &f2).map_err(|e| e.to_string())?;
    ensure(refinable, || {
        "pair with a common upper bound is not refinable".into()
    })?;
    let (r, ok) = ia::refine_checked(mgr, &f1, &f2).map_err(|e| e.to_string())?;
    ensure(ok, || {
        "refine of refinable pair is not an upper bound".into()
    })?;
    ensure(ia::refines(mgr, &r, &top), || "refine is not least".into())?;
    // random, possibly incompatible pair
    let x = g.interface(mgr, ins, outs);
    let y = g.interface(mgr, ins, outs);
    let refinable = ia::is_shared_refinable(mgr, &x, &y).map_err(|e| e.to_string())?;
    let (_, ok) = ia::refine_checked(mgr, &x, &y).map_err(|e| e.to_string())?;
    ensure(refinable == ok, || {
        "post-hoc check disagrees with shared refinability".into()
    })
}

/// Refinement of two `sink ∧ source` samples equals the three-way split
/// `(I₁∧I₂∧O₁∧O₂) ∨ (I₁∧¬I₂∧O₁) ∨ (¬I₁∧I₂∧O₂)`, which reduces to a plain
/// disjunction when the input sets are disjoint.
pub fn shared_to_disjoint(mgr: &mut Manager, pool: &[BoolVar], g: &mut Generator) -> LawResult {
    let v = g.pick(pool, 6);
    let (ins, outs) = (&v[0..3], &v[3..6]);
    let nonempty = |g: &mut Generator, mgr: &mut Manager| loop {
        let o = g.predicate(mgr, outs, 0.4);
        if !mgr.is_false(o) {
            return o;
        }
    };
    let i1 = g.predicate(mgr, ins, 0.5);
    let mut i2 = g.predicate(mgr, ins, 0.5);
    if g.rng.gen_bool(0.3) {
        i2 = mgr.diff(i2, i1);
    }
    let o1 = nonempty(g, mgr);
    let o2 = nonempty(g, mgr);
    let s1 = mgr.and(i1, o1);
    let s2 = mgr.and(i2, o2);
    let f1 = Interface::new(mgr, set(ins), set(outs), s1).unwrap();
    let f2 = f1.with_pred(s2);
    let r = ia::refine(mgr, &f1, &f2).map_err(|e| e.to_string())?;
    let both = mgr.and_all([i1, i2, o1, o2]);
    let n2 = mgr.not(i2);
    let only1 = mgr.and_all([i1, n2, o1]);
    let n1 = mgr.not(i1);
    let only2 = mgr.and_all([n1, i2, o2]);
    let split = mgr.or_all([both, only1, only2]);
    ensure(r.pred() == split, || {
        "refine differs from the three-way split".into()
    })?;
    let overlap = mgr.and(i1, i2);
    if mgr.is_false(overlap) {
        let disj = mgr.or(s1, s2);
        ensure(r.pred() == disj, || {
            "disjoint samples do not reduce to a disjunction".into()
        })?;
    }
    Ok(())
}

/// Coarsening by a bit-truncating quantizer abstracts the original (after
/// renaming coarse bits onto fine ones), and equals the truncation forms.
pub fn coarsening(mgr: &mut Manager, pool: &[BoolVar], g: &mut Generator) -> LawResult {
    use crate::spaces::{quantizer, QuantizerDirection as Dir};
    let v = g.pick(pool, 9);
    let (fi, ci, fo_bits, co) = (&v[0..3], &v[3..6], &v[6..8], &v[8..9]);
    let f = g.interface(mgr, fi, fo_bits);
    let keep = g.rng.gen_range(0..=3);
    let q = quantizer(mgr, fi, ci, keep, Dir::CoarseToFine).map_err(|e| e.to_string())?;
    let ic = ia::icoarsen(mgr, &f, &q).map_err(|e| e.to_string())?;
    let to_coarse: Vec<(BoolVar, BoolVar)> = fi.iter().copied().zip(ci.iter().copied()).collect();
    let fr = mgr
        .rename(f.pred(), &to_coarse)
        .map_err(|e| e.to_string())?;
    let f_c = Interface::new(mgr, set(ci), f.outputs().clone(), fr).unwrap();
    ensure(ia::refines(mgr, &ic, &f_c), || {
        "icoarsen is not an abstraction".into()
    })?;
    let dropped = set(&fi[keep..]);
    let t = ia::truncate_inputs(mgr, &f, &dropped).map_err(|e| e.to_string())?;
    let back: Vec<(BoolVar, BoolVar)> = ci.iter().copied().zip(fi.iter().copied()).collect();
    let icr = mgr.rename(ic.pred(), &back).map_err(|e| e.to_string())?;
    ensure(t.pred() == icr, || {
        "truncate_inputs differs from icoarsen".into()
    })?;

    let keep_o = g.rng.gen_range(0..=1);
    let qo =
        quantizer(mgr, &fo_bits[..1], co, keep_o, Dir::FineToCoarse).map_err(|e| e.to_string())?;
    let oc = ia::ocoarsen(mgr, &f, &qo).map_err(|e| e.to_string())?;
    let fr = mgr
        .rename(f.pred(), &[(fo_bits[0], co[0])])
        .map_err(|e| e.to_string())?;
    let f_co = Interface::new(mgr, f.inputs().clone(), set(&[co[0], fo_bits[1]]), fr).unwrap();
    ensure(ia::refines(mgr, &oc, &f_co), || {
        "ocoarsen is not an abstraction".into()
    })?;
    let dropped = set(&fo_bits[keep_o..1]);
    let t = ia::truncate_outputs(mgr, &f, &dropped).map_err(|e| e.to_string())?;
    let ocr = mgr
        .rename(oc.pred(), &[(co[0], fo_bits[0])])
        .map_err(|e| e.to_string())?;
    ensure(t.pred() == ocr, || {
        "truncate_outputs differs from ocoarsen".into()
    })
}

/// The fused operators equal their literal operator chains.
pub fn fused_forms(mgr: &mut Manager, pool: &[BoolVar], g: &mut Generator) -> LawResult {
    let v = g.pick(pool, 8);
    let (ext, o1, o2) = (&v[0..3], &v[3..5], &v[5..8]);
    let i1 = g.subset(ext, true);
    let from2: Vec<BoolVar> = ext.iter().chain(o1).copied().collect();
    let i2 = g.subset(&from2, true);
    let f1 = g.interface(mgr, &i1, o1);
    let f2 = g.interface(mgr, &i2, o2);
    let outs: Vec<BoolVar> = o1.iter().chain(o2).copied().collect();
    let w = set(&g.subset(&outs, false));
    let fused = ia::ohide_comp(mgr, &w, &f1, &f2).map_err(|e| e.to_string())?;
    let c = ia::comp(mgr, &f1, &f2).map_err(|e| e.to_string())?;
    let chain = ia::ohide(mgr, &w, &c).map_err(|e| e.to_string())?;
    ensure(fused == chain, || {
        "ohide_comp differs from ohide ∘ comp".into()
    })?;

    let a = g.interface(mgr, ext, o1);
    let b = g.interface(mgr, ext, o1);
    let (na, nb) = (ia::nb(mgr, &a).pred(), ia::nb(mgr, &b).pred());
    let fused = ia::refine_with_nb(mgr, a.pred(), na, b.pred(), nb);
    let lit = ia::refine(mgr, &a, &b).map_err(|e| e.to_string())?;
    ensure(fused == lit.pred(), || {
        "refine_with_nb differs from refine".into()
    })
}

pub type Law = fn(&mut Manager, &[BoolVar], &mut Generator) -> LawResult;

/// All laws with a short name each.
pub const LAWS: &[(&str, Law)] = &[
    ("parallel composition", parallel_comp),
    ("series associativity", series_associativity),
    ("signatures", signatures),
    ("partial order", partial_order),
    ("comp preserves refinement", comp_monotone),
    ("ohide preserves refinement", ohide_monotone),
    ("ihide preserves refinement", ihide_monotone),
    ("refine is a least upper bound", refine_lub),
    ("shared-to-disjoint samples", shared_to_disjoint),
    ("coarsening", coarsening),
    ("fused forms", fused_forms),
    ("decomposed cpre", decomposed_cpre),
    ("substitutability", substitutability),
];

/// Runs `law` on `cases` instances seeded `seed, seed+1, …` in a fresh
/// 14-variable pool per instance.
pub fn run_law(law: Law, seed: u64, cases: u64) -> LawResult {
    for s in seed..seed + cases {
        let (mut mgr, vars) = pool(14);
        let mut g = Generator::new(s);
        law(&mut mgr, &vars, &mut g).map_err(|e| format!("seed {s}: {e}"))?;
    }
    Ok(())
}

// -------------------------------------------------------------------------
// games

/// A random game on `dims` state dimensions with the given bit widths, a
/// 2-bit control with `valid` codes, and one dynamics component per
/// dimension whose inputs are a random subset of `x ∪ u`.
pub fn random_game(
    mgr: &mut Manager,
    pool: &[BoolVar],
    g: &mut Generator,
    widths: &[usize],
    reach: bool,
) -> crate::games::GameSpec {
    use crate::games::{GameSpec, Objective, StateBits};
    use crate::spaces::range_predicate;
    let need: usize = widths.iter().sum::<usize>() * 2 + 2;
    let v = g.pick(pool, need);
    let mut k = 0;
    let mut states = Vec::new();
    for (d, &w) in widths.iter().enumerate() {
        let cur = v[k..k + w].to_vec();
        let next = v[k + w..k + 2 * w].to_vec();
        k += 2 * w;
        states.push(StateBits {
            name: format!("s{d}"),
            cur,
            next,
        });
    }
    let u = v[k..k + 2].to_vec();
    let valid = g.rng.gen_range(1..=4u64);
    let dom = range_predicate(mgr, &u, 0, valid - 1);
    let x: Vec<BoolVar> = states.iter().flat_map(|s| s.cur.iter().copied()).collect();
    let xu: Vec<BoolVar> = x.iter().chain(&u).copied().collect();
    let components = states
        .iter()
        .map(|s| {
            let ins = g.subset(&xu, true);
            if g.rng.gen_bool(0.7) {
                g.total_interface(mgr, &ins, &s.next)
            } else {
                g.interface(mgr, &ins, &s.next)
            }
        })
        .collect();
    let d = *[0.2, 0.4].choose(&mut g.rng).unwrap();
    let set = g.predicate(mgr, &x, if reach { d } else { 1.0 - d });
    let objective = if reach {
        Objective::Reach(set)
    } else {
        Objective::Safe(set)
    };
    let n = widths.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut g.rng);
    GameSpec {
        components,
        order,
        states,
        u: u.iter().collect(),
        control_domain: dom,
        objective,
    }
}

/// The composite cpre pipeline, its fused form and the direct quantifier
/// formula agree exactly on a random monolithic game (at most 14 bits).
pub fn cpre_pipeline(mgr: &mut Manager, pool: &[BoolVar], g: &mut Generator) -> LawResult {
    use crate::games::{cpre, cpre_direct, cpre_literal};
    let w = g.rng.gen_range(1..=6usize);
    let spec = random_game(mgr, pool, g, &[w], true);
    let f = &spec.components[0];
    let zp = g.predicate(mgr, &spec.states[0].next, 0.5);
    let z = Interface::sink(mgr, set(&spec.states[0].next), zp).unwrap();
    let lit = cpre_literal(mgr, f, &z, &spec.u, spec.control_domain).map_err(|e| e.to_string())?;
    let fused = cpre(mgr, f, &z, &spec.u, spec.control_domain).map_err(|e| e.to_string())?;
    let direct = cpre_direct(mgr, f, zp, &spec.u, spec.control_domain);
    ensure(lit.pred() == direct, || {
        "composite pipeline differs from the direct formula".into()
    })?;
    ensure(fused.pred() == direct, || {
        "fused cpre differs from the direct formula".into()
    })?;
    ensure(lit.inputs().is_subset(&set(&spec.states[0].cur)), || {
        "cpre is not a sink over x".into()
    })
}

/// Decomposed cpre equals the monolithic one for every elimination order.
pub fn decomposed_cpre(mgr: &mut Manager, pool: &[BoolVar], g: &mut Generator) -> LawResult {
    use crate::games::{compose_all, cpre, cpre_decomposed};
    let widths: Vec<usize> = (0..3).map(|_| g.rng.gen_range(1..=2)).collect();
    let spec = random_game(mgr, pool, g, &widths, true);
    let xn: Vec<BoolVar> = spec.x_next().iter().collect();
    let zp = g.predicate(mgr, &xn, 0.6);
    let z = Interface::sink(mgr, set(&xn), zp).unwrap();
    let mono = compose_all(mgr, &spec.components).map_err(|e| e.to_string())?;
    let want = cpre(mgr, &mono, &z, &spec.u, spec.control_domain).map_err(|e| e.to_string())?;
    for order in [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ] {
        let got = cpre_decomposed(
            mgr,
            &spec.components,
            &order,
            &z,
            &spec.u,
            spec.control_domain,
        )
        .map_err(|e| e.to_string())?;
        ensure(got.pred() == want.pred(), || {
            format!("order {order:?} differs from monolithic")
        })?;
    }
    Ok(())
}

/// Solving with an abstraction of the dynamics never wins more states.
pub fn substitutability(mgr: &mut Manager, pool: &[BoolVar], g: &mut Generator) -> LawResult {
    use crate::games::{solve, SolveOptions};
    let reach = g.rng.gen_bool(0.5);
    let widths: Vec<usize> = (0..2).map(|_| g.rng.gen_range(1..=2)).collect();
    let spec = random_game(mgr, pool, g, &widths, reach);
    let mut abs = spec.clone();
    for c in abs.components.iter_mut() {
        *c = g.abstraction_of(mgr, c);
    }
    let opts = SolveOptions::default();
    let concrete = solve(mgr, &spec, &opts).map_err(|e| e.to_string())?;
    let abstracted = solve(mgr, &abs, &opts).map_err(|e| e.to_string())?;
    ensure(mgr.entails(abstracted.winning, concrete.winning), || {
        "abstract basin exceeds concrete basin".into()
    })
}
