use super::*;
use proptest::prelude::*;

fn mgr(n: usize) -> (Manager, Vec<BoolVar>) {
    let names: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let m = Manager::new(&names).unwrap();
    let vars = m.vars().collect();
    (m, vars)
}

#[test]
fn new_manager_examples() {
    let m = Manager::new(&["x0", "x1"]).unwrap();
    assert_eq!(m.num_vars(), 2);
    assert_ne!(m.top(), m.bot());
    let empty = Manager::new::<&str>(&[]).unwrap();
    assert_eq!(empty.num_vars(), 0);
    assert!(empty.is_true(empty.top()));
    assert_eq!(
        Manager::new(&["a", "a"]).unwrap_err(),
        BddError::DuplicateName("a".into())
    );
}

#[test]
fn apply_examples() {
    let (mut m, v) = mgr(2);
    let a = m.ithvar(v[0]);
    let b = m.ithvar(v[1]);
    let na = m.not(a);
    assert_eq!(m.apply(BinOp::And, a, na).unwrap(), m.bot());
    assert_eq!(m.apply(BinOp::Or, a, m.bot()).unwrap(), a);
    assert_eq!(m.apply(BinOp::Implies, m.bot(), b).unwrap(), m.top());
    let (mut other, ov) = mgr(2);
    let foreign = other.ithvar(ov[0]);
    assert_eq!(
        m.apply(BinOp::And, a, foreign).unwrap_err(),
        BddError::MixedManagers
    );
}

#[test]
fn not_examples() {
    let (mut m, v) = mgr(1);
    assert_eq!(m.not(m.top()), m.bot());
    assert_eq!(m.not(m.bot()), m.top());
    let a = m.ithvar(v[0]);
    let nn = {
        let n = m.not(a);
        m.not(n)
    };
    assert_eq!(nn, a);
}

#[test]
fn quantifier_examples() {
    let (mut m, v) = mgr(2);
    let a = m.ithvar(v[0]);
    let b = m.ithvar(v[1]);
    let ab = m.and(a, b);
    assert_eq!(m.exists(&[v[1]].iter().collect(), ab), a);
    let na = m.not(a);
    let contra = m.and(a, na);
    assert_eq!(m.exists(&v.iter().collect(), contra), m.bot());
    assert_eq!(m.exists(&VarSet::new(), ab), ab);

    let aorb = m.or(a, b);
    assert_eq!(m.forall(&[v[1]].iter().collect(), aorb), a);
    assert_eq!(m.forall(&[v[0]].iter().collect(), a), m.bot());
    assert_eq!(m.forall(&VarSet::new(), aorb), aorb);
}

#[test]
fn rename_examples() {
    let (mut m, v) = mgr(3);
    let (a, b, c) = (m.ithvar(v[0]), m.ithvar(v[1]), m.ithvar(v[2]));
    assert_eq!(m.rename(a, &[(v[0], v[1])]).unwrap(), b);
    let ac = m.and(a, c);
    let bc = m.and(b, c);
    assert_eq!(m.rename(ac, &[(v[0], v[1])]).unwrap(), bc);
    assert_eq!(m.rename(ac, &[(v[0], v[0]), (v[2], v[2])]).unwrap(), ac);
    assert!(matches!(
        m.rename(ac, &[(v[0], v[1]), (v[2], v[1])]),
        Err(BddError::NotInjective(_))
    ));
}

#[test]
fn rename_against_order() {
    // swap a and c in a predicate that distinguishes them
    let (mut m, v) = mgr(3);
    let (a, b, c) = (m.ithvar(v[0]), m.ithvar(v[1]), m.ithvar(v[2]));
    let nc = m.not(c);
    let p = m.and(a, nc);
    let p = m.or(p, b);
    let q = m.rename(p, &[(v[0], v[2]), (v[2], v[0])]).unwrap();
    let na = m.not(a);
    let expect = m.and(c, na);
    let expect = m.or(expect, b);
    assert_eq!(q, expect);
}

#[test]
fn sat_count_examples() {
    let (mut m, v) = mgr(3);
    let a = m.ithvar(v[0]);
    let ab: VarSet = v[..2].iter().collect();
    assert_eq!(m.sat_count(a, &ab).unwrap(), 2);
    assert_eq!(m.sat_count(m.top(), &v.iter().collect()).unwrap(), 8);
    assert_eq!(m.sat_count(m.bot(), &[v[0]].iter().collect()).unwrap(), 0);
    let c = m.ithvar(v[2]);
    assert!(matches!(
        m.sat_count(c, &ab),
        Err(BddError::SupportTooSmall(_))
    ));
}

#[test]
fn node_count_examples() {
    let (mut m, v) = mgr(2);
    assert_eq!(m.node_count(m.bot()), 0);
    let a = m.ithvar(v[0]);
    assert_eq!(m.node_count(a), 1);
    let b = m.ithvar(v[1]);
    let ab = m.and(a, b);
    assert_eq!(m.node_count(ab), 2);
}

#[test]
fn eval_examples() {
    let (mut m, v) = mgr(2);
    let a = m.ithvar(v[0]);
    let b = m.ithvar(v[1]);
    let ab = m.and(a, b);
    let asg: HashMap<_, _> = [(v[0], true), (v[1], false)].into_iter().collect();
    assert!(!m.eval(ab, &asg).unwrap());
    assert!(m.eval(m.top(), &HashMap::new()).unwrap());
    assert!(m.eval(a, &[(v[0], true)].into_iter().collect()).unwrap());
    assert!(matches!(
        m.eval(ab, &[(v[0], true)].into_iter().collect()),
        Err(BddError::MissingAssignment(_))
    ));
}

#[test]
fn gc_keeps_roots_and_frees_garbage() {
    let (mut m, v) = mgr(8);
    let lits: Vec<_> = v.iter().map(|&x| m.ithvar(x)).collect();
    let keep = m.and_all(lits[..4].iter().copied());
    let keep_count = m.node_count(keep);
    for i in 0..8 {
        let t = m.xor(lits[i], lits[(i + 3) % 8]);
        let _ = m.or(t, keep);
    }
    let before = m.live_nodes();
    m.gc(&[keep]);
    assert!(m.live_nodes() < before);
    assert_eq!(m.live_nodes(), keep_count);
    // rebuilding the same function returns the surviving handle
    let lits: Vec<_> = v.iter().map(|&x| m.ithvar(x)).collect();
    let again = m.and_all(lits[..4].iter().copied());
    assert_eq!(again, keep);
}

#[test]
fn soft_cap_flags_without_failing() {
    let (mut m, v) = mgr(10);
    m.set_node_cap(Some(5));
    let lits: Vec<_> = v.iter().map(|&x| m.ithvar(x)).collect();
    let p = m.and_all(lits);
    assert_eq!(m.node_count(p), 10);
    assert!(m.cap_exceeded());
    m.gc(&[]);
    assert!(!m.cap_exceeded());
}

#[test]
fn text_round_trip_and_errors() {
    let (mut m, v) = mgr(4);
    let lits: Vec<_> = v.iter().map(|&x| m.ithvar(x)).collect();
    let p = m.xor(lits[0], lits[2]);
    let p = m.or(p, lits[3]);
    for q in [p, m.top(), m.bot()] {
        let mut buf = Vec::new();
        write_predicate(&m, q, &mut buf).unwrap();
        let back = read_predicate(&mut m, &mut buf.as_slice()).unwrap();
        assert_eq!(back, q);
    }
    let mut buf = Vec::new();
    write_predicate(&m, p, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let truncated: String = text.lines().take(2).map(|l| format!("{l}\n")).collect();
    assert!(read_predicate(&mut m, &mut truncated.as_bytes()).is_err());
    let bad = "vars: x0 zz\nroot 1\n";
    assert_eq!(
        read_predicate(&mut m, &mut bad.as_bytes()).unwrap_err(),
        BddError::UnknownVar("zz".into())
    );
}

#[test]
fn serialization_is_deterministic() {
    let (mut m, v) = mgr(3);
    let lits: Vec<_> = v.iter().map(|&x| m.ithvar(x)).collect();
    let p = m.and(lits[0], lits[1]);
    let p = m.or(p, lits[2]);
    let mut a = Vec::new();
    let mut b = Vec::new();
    write_predicate(&m, p, &mut a).unwrap();
    write_predicate(&m, p, &mut b).unwrap();
    assert_eq!(a, b);
    assert_eq!(
        String::from_utf8(a).unwrap(),
        "vars: x0 x1 x2\n2 x2 0 1\n3 x1 2 1\n4 x0 2 3\nroot 4\n"
    );
}

// ---------------------------------------------------------------------
// property tests against truth tables

#[derive(Clone, Debug)]
enum Expr {
    Const(bool),
    Var(usize),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Xor(Box<Expr>, Box<Expr>),
    Imp(Box<Expr>, Box<Expr>),
}

impl Expr {
    fn eval(&self, asg: u32) -> bool {
        match self {
            Expr::Const(b) => *b,
            Expr::Var(i) => asg >> i & 1 == 1,
            Expr::Not(a) => !a.eval(asg),
            Expr::And(a, b) => a.eval(asg) && b.eval(asg),
            Expr::Or(a, b) => a.eval(asg) || b.eval(asg),
            Expr::Xor(a, b) => a.eval(asg) != b.eval(asg),
            Expr::Imp(a, b) => !a.eval(asg) || b.eval(asg),
        }
    }

    fn build(&self, m: &mut Manager, v: &[BoolVar]) -> Predicate {
        match self {
            Expr::Const(b) => m.constant(*b),
            Expr::Var(i) => m.ithvar(v[*i]),
            Expr::Not(a) => {
                let a = a.build(m, v);
                m.not(a)
            }
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Xor(a, b) | Expr::Imp(a, b) => {
                let (x, y) = (a.build(m, v), b.build(m, v));
                let op = match self {
                    Expr::And(..) => BinOp::And,
                    Expr::Or(..) => BinOp::Or,
                    Expr::Xor(..) => BinOp::Xor,
                    _ => BinOp::Implies,
                };
                m.apply(op, x, y).unwrap()
            }
        }
    }

    fn table(&self, n: usize) -> Vec<bool> {
        (0..1u32 << n).map(|a| self.eval(a)).collect()
    }
}

fn expr(n: usize) -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        any::<bool>().prop_map(Expr::Const),
        (0..n).prop_map(Expr::Var),
        (0..n).prop_map(Expr::Var)
    ];
    leaf.prop_recursive(6, 48, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Expr::Not(Box::new(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::And(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Or(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Xor(Box::new(a), Box::new(b))),
            (inner.clone(), inner).prop_map(|(a, b)| Expr::Imp(Box::new(a), Box::new(b))),
        ]
    })
}

fn quant_table(t: &[bool], n: usize, mask: u32, exists: bool) -> Vec<bool> {
    (0..1u32 << n)
        .map(|a| {
            let base = a & !mask;
            let mut sub = mask;
            let mut acc = !exists;
            loop {
                let val = t[(base | sub) as usize];
                if exists {
                    acc |= val;
                } else {
                    acc &= val;
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & mask;
            }
            acc
        })
        .collect()
}

fn table_of(m: &Manager, p: Predicate, v: &[BoolVar]) -> Vec<bool> {
    (0..1u32 << v.len())
        .map(|a| m.eval_with(p, |x| a >> x.id() & 1 == 1))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn varset_agrees_with_btreeset(
        a in proptest::collection::btree_set(0u32..200, 0..40),
        b in proptest::collection::btree_set(0u32..200, 0..40)
    ) {
        use std::collections::BTreeSet;
        let set = |s: &BTreeSet<u32>| s.iter().map(|&i| BoolVar(i)).collect::<VarSet>();
        let ids = |s: &VarSet| s.iter().map(|v| v.0).collect::<Vec<_>>();
        let (x, y) = (set(&a), set(&b));
        prop_assert_eq!(ids(&x), a.iter().copied().collect::<Vec<_>>());
        prop_assert_eq!(x.iter().rev().map(|v| v.0).collect::<Vec<_>>(), a.iter().rev().copied().collect::<Vec<_>>());
        prop_assert_eq!(x.len(), a.len());
        prop_assert_eq!(x.is_empty(), a.is_empty());
        prop_assert_eq!(ids(&x.union(&y)), a.union(&b).copied().collect::<Vec<_>>());
        prop_assert_eq!(ids(&x.intersection(&y)), a.intersection(&b).copied().collect::<Vec<_>>());
        prop_assert_eq!(ids(&x.difference(&y)), a.difference(&b).copied().collect::<Vec<_>>());
        prop_assert_eq!(x.is_subset(&y), a.is_subset(&b));
        prop_assert_eq!(x.is_disjoint(&y), a.is_disjoint(&b));
        prop_assert_eq!(x.difference(&y), set(&a.difference(&b).copied().collect()));
        for i in 0..200 {
            prop_assert_eq!(x.contains(BoolVar(i)), a.contains(&i));
        }
        let mut it = x.iter();
        let mut front = Vec::new();
        let mut back = Vec::new();
        while let Some(v) = it.next() {
            front.push(v.0);
            match it.next_back() {
                Some(v) => back.push(v.0),
                None => break,
            }
        }
        back.reverse();
        front.extend(back);
        prop_assert_eq!(front, a.iter().copied().collect::<Vec<_>>());
    }

    #[test]
    fn canonicity(
        (n, e1, e2, twin) in (1usize..=14).prop_flat_map(|n| (Just(n), expr(n), expr(n), any::<bool>()))
    ) {
        // half the time compare against a syntactically different twin
        let e2 = if twin { Expr::Not(Box::new(Expr::Not(Box::new(e1.clone())))) } else { e2 };
        let (mut m, v) = mgr(n);
        let (p1, p2) = (e1.build(&mut m, &v), e2.build(&mut m, &v));
        let equal_tables = e1.table(n) == e2.table(n);
        prop_assert_eq!(equal_tables, p1 == p2);
        prop_assert_eq!(table_of(&m, p1, &v), e1.table(n));
    }

    #[test]
    fn quantifiers_match_tables(e in expr(8), mask in 0u32..256) {
        let n = 8;
        let (mut m, v) = mgr(n);
        let p = e.build(&mut m, &v);
        let w: VarSet = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| v[i]).collect();
        let t = e.table(n);
        let ex = m.exists(&w, p);
        let fa = m.forall(&w, p);
        prop_assert_eq!(table_of(&m, ex, &v), quant_table(&t, n, mask, true));
        prop_assert_eq!(table_of(&m, fa, &v), quant_table(&t, n, mask, false));
        prop_assert!(m.support(ex).is_disjoint(&w));
        let np = m.not(p);
        let enp = m.exists(&w, np);
        prop_assert_eq!(fa, m.not(enp));
    }

    #[test]
    fn quantifier_laws(e1 in expr(7), e2 in expr(7), mask in 0u32..128) {
        let (mut m, v) = mgr(7);
        let (p, q) = (e1.build(&mut m, &v), e2.build(&mut m, &v));
        let w: VarSet = (0..7).filter(|i| mask >> i & 1 == 1).map(|i| v[i]).collect();
        let por = m.or(p, q);
        let lhs = m.exists(&w, por);
        let (ep, eq) = (m.exists(&w, p), m.exists(&w, q));
        prop_assert_eq!(lhs, m.or(ep, eq));
        let pand = m.and(p, q);
        let lhs = m.forall(&w, pand);
        let (fp, fq) = (m.forall(&w, p), m.forall(&w, q));
        prop_assert_eq!(lhs, m.and(fp, fq));
        let fused = m.and_exists(&w, p, q);
        prop_assert_eq!(fused, m.exists(&w, pand));
        let pdiff = m.diff(p, q);
        let de = m.diff_exists(&w, p, q);
        prop_assert_eq!(de, m.exists(&w, pdiff));
        let fi = m.forall_implies(&w, p, q);
        let imp = m.implies(p, q);
        prop_assert_eq!(fi, m.forall(&w, imp));
    }

    #[test]
    fn sat_count_matches_enumeration(e in expr(12), extra in 0usize..3) {
        let n = 12 + extra;
        let (mut m, v) = mgr(n);
        let p = e.build(&mut m, &v);
        let brute = (0..1u32 << n).filter(|&a| m.eval_with(p, |x| a >> x.id() & 1 == 1)).count() as u128;
        prop_assert_eq!(m.sat_count(p, &v.iter().collect()).unwrap(), brute);
    }

    #[test]
    fn rename_inverse_is_identity(e in expr(6), perm in Just((0..6usize).collect::<Vec<_>>()).prop_shuffle()) {
        // six source vars renamed onto a permutation of six fresh vars
        let (mut m, v) = mgr(12);
        let p = e.build(&mut m, &v[..6]);
        let fwd: Vec<_> = (0..6).map(|i| (v[i], v[6 + perm[i]])).collect();
        let back: Vec<_> = fwd.iter().map(|&(a, b)| (b, a)).collect();
        let q = m.rename(p, &fwd).unwrap();
        prop_assert_eq!(m.rename(q, &back).unwrap(), p);
        // substitution semantics
        for a in 0..64u32 {
            let src = m.eval_with(p, |x| a >> x.id() & 1 == 1);
            let dst = m.eval_with(q, |x| {
                let k = (0..6).find(|&i| v[6 + perm[i]] == x).unwrap();
                a >> k & 1 == 1
            });
            prop_assert_eq!(src, dst);
        }
    }

    #[test]
    fn gc_preserves_roots(e1 in expr(8), e2 in expr(8)) {
        let (mut m, v) = mgr(8);
        let p = e1.build(&mut m, &v);
        let t = e1.table(8);
        let _garbage = e2.build(&mut m, &v);
        m.gc(&[p]);
        prop_assert_eq!(table_of(&m, p, &v), t);
        let again = e1.build(&mut m, &v);
        prop_assert_eq!(again, p);
    }
}
