use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::Rng;

use super::*;
use crate::interval::Interval;
use crate::laws::{self, table_predicate, Generator};
use crate::spaces::{Dimension, EncodeMode, Layout};

fn sink(p: Predicate, vars: &VarSet) -> Interface {
    Interface::from_parts(vars.clone(), VarSet::new(), p)
}

#[test]
fn cpre_examples_one_bit() {
    let mgr_names = ["x", "x'", "u"];
    let mut mgr = Manager::new(&mgr_names).unwrap();
    let (x, xn, u) = (
        mgr.var("x").unwrap(),
        mgr.var("x'").unwrap(),
        mgr.var("u").unwrap(),
    );
    let (px, pxn, pu) = (mgr.ithvar(x), mgr.ithvar(xn), mgr.ithvar(u));
    let xu = mgr.and(px, pu);
    let rel = mgr.iff(pxn, xu);
    let f = Interface::new(
        &mgr,
        [x, u].into_iter().collect(),
        [xn].into_iter().collect(),
        rel,
    )
    .unwrap();
    let us: VarSet = [u].into_iter().collect();
    let xns: VarSet = [xn].into_iter().collect();
    let top = mgr.top();
    let c = cpre(&mut mgr, &f, &sink(pxn, &xns), &us, top).unwrap();
    assert_eq!(c.pred(), px);
    let c = cpre(&mut mgr, &f, &sink(top, &xns), &us, top).unwrap();
    assert_eq!(c.pred(), top);
    let bot = mgr.bot();
    let c = cpre(&mut mgr, &f, &sink(bot, &xns), &us, top).unwrap();
    assert_eq!(c.pred(), bot);
    // the guard excludes u = 1, so only x⁺ = 0 is reachable
    let nu = mgr.not(pu);
    let c = cpre(&mut mgr, &f, &sink(pxn, &xns), &us, nu).unwrap();
    assert_eq!(c.pred(), bot);
    let z = mgr.not(pxn);
    let c = cpre(&mut mgr, &f, &sink(z, &xns), &us, nu).unwrap();
    assert_eq!(c.pred(), top);
    // wrong signature
    let xs: VarSet = [x].into_iter().collect();
    assert!(cpre(&mut mgr, &f, &sink(px, &xs), &us, top).is_err());
}

#[test]
fn cpre_blocking_inputs_are_lost() {
    let mut mgr = Manager::new(&["x", "x'", "u"]).unwrap();
    let (x, xn, u) = (
        mgr.var("x").unwrap(),
        mgr.var("x'").unwrap(),
        mgr.var("u").unwrap(),
    );
    let pu = mgr.ithvar(u);
    // u = 1 blocks, u = 0 allows anything
    let nu = mgr.not(pu);
    let f = Interface::new(
        &mgr,
        [x, u].into_iter().collect(),
        [xn].into_iter().collect(),
        nu,
    )
    .unwrap();
    let us: VarSet = [u].into_iter().collect();
    let xns: VarSet = [xn].into_iter().collect();
    let top = mgr.top();
    let c = cpre(&mut mgr, &f, &sink(top, &xns), &us, top).unwrap();
    assert_eq!(c.pred(), top);
    let pxn = mgr.ithvar(xn);
    let c = cpre(&mut mgr, &f, &sink(pxn, &xns), &us, top).unwrap();
    assert_eq!(c.pred(), mgr.bot());
}

#[test]
fn two_independent_subsystems_give_a_product() {
    // x⁺ = x ∧ u, y⁺ = y ∨ u
    let mut mgr = Manager::new(&["x", "x'", "y", "y'", "u"]).unwrap();
    let v: Vec<BoolVar> = mgr.vars().collect();
    let (x, xn, y, yn, u) = (v[0], v[1], v[2], v[3], v[4]);
    let l: Vec<Predicate> = v.iter().map(|&b| mgr.ithvar(b)).collect();
    let xu = mgr.and(l[0], l[4]);
    let fx = mgr.iff(l[1], xu);
    let yu = mgr.or(l[2], l[4]);
    let fy = mgr.iff(l[3], yu);
    let s = |a: &[BoolVar]| a.iter().copied().collect::<VarSet>();
    let ix = Interface::new(&mgr, s(&[x, u]), s(&[xn]), fx).unwrap();
    let iy = Interface::new(&mgr, s(&[y, u]), s(&[yn]), fy).unwrap();
    let us = s(&[u]);
    let top = mgr.top();
    // Z = x⁺ ∧ y⁺: needs u = 1 and x
    let z = mgr.and(l[1], l[3]);
    let zs = sink(z, &s(&[xn, yn]));
    let dec = cpre_decomposed(&mut mgr, &[ix.clone(), iy.clone()], &[1, 0], &zs, &us, top).unwrap();
    assert_eq!(dec.pred(), l[0]);
    assert!(cpre_decomposed(&mut mgr, &[ix.clone(), iy.clone()], &[0, 0], &zs, &us, top).is_err());
    // single component: same as cpre
    let single = cpre_decomposed(
        &mut mgr,
        std::slice::from_ref(&ix),
        &[0],
        &sink(l[1], &s(&[xn])),
        &us,
        top,
    )
    .unwrap();
    let mono = cpre(&mut mgr, &ix, &sink(l[1], &s(&[xn])), &us, top).unwrap();
    assert_eq!(single, mono);
}

/// Explicit game: `succ[s][u]` lists successors (empty = blocking).
struct Explicit {
    n: usize,
    valid_u: usize,
    succ: Vec<Vec<BTreeSet<usize>>>,
}

impl Explicit {
    fn cpre(&self, z: &BTreeSet<usize>) -> BTreeSet<usize> {
        (0..self.n)
            .filter(|&s| {
                (0..self.valid_u)
                    .any(|u| !self.succ[s][u].is_empty() && self.succ[s][u].is_subset(z))
            })
            .collect()
    }

    fn reach(&self, t: &BTreeSet<usize>) -> Vec<BTreeSet<usize>> {
        let mut z = BTreeSet::new();
        let mut out = vec![];
        loop {
            let next: BTreeSet<usize> = self.cpre(&z).union(t).copied().collect();
            out.push(next.clone());
            if next == z {
                return out;
            }
            z = next;
        }
    }

    fn safe(&self, s: &BTreeSet<usize>) -> Vec<BTreeSet<usize>> {
        let mut z = s.clone();
        let mut out = vec![];
        loop {
            let next: BTreeSet<usize> = self.cpre(&z).intersection(s).copied().collect();
            out.push(next.clone());
            if next == z {
                return out;
            }
            z = next;
        }
    }
}

/// A 1-D game on `2^bits` cells with controls coded in two bits and its
/// explicit counterpart.
fn explicit_game(
    seed: u64,
    bits: u32,
    reach: bool,
) -> (Manager, GameSpec, Explicit, BTreeSet<usize>) {
    let mut g = Generator::new(seed);
    let n = 1usize << bits;
    let valid_u = g.rng().gen_range(3..=4usize);
    let values: Vec<f64> = (0..valid_u).map(|k| k as f64).collect();
    let x = Dimension::continuous("x", 0.0, n as f64, false, bits).unwrap();
    let udim = Dimension::discrete("u", values).unwrap();
    let (mut mgr, lay) = Layout::new(vec![x], vec![udim]).unwrap();
    let valid_u = lay.controls[0].dim.cell_count() as usize;
    let mut succ = vec![vec![BTreeSet::new(); 4]; n];
    for (s, row) in succ.iter_mut().enumerate() {
        for (u, next) in row.iter_mut().enumerate() {
            if g.rng().gen_bool(0.15) {
                continue;
            }
            // mostly drift with a little noise
            next.insert((s + u) % n);
            if g.rng().gen_bool(0.3) {
                next.insert(g.rng().gen_range(0..n));
            }
        }
    }
    let st = &lay.states[0];
    let vars: Vec<BoolVar> = st
        .cur
        .iter()
        .chain(&st.next)
        .chain(&lay.controls[0].vars)
        .copied()
        .collect();
    let b = bits as usize;
    let rel = table_predicate(&mut mgr, &vars, |row| {
        let bitval = |k: usize| (row >> k & 1) as usize;
        let s = (0..b).fold(0, |a, k| a << 1 | bitval(k));
        let sn = (0..b).fold(0, |a, k| a << 1 | bitval(b + k));
        let u = bitval(2 * b) << 1 | bitval(2 * b + 1);
        succ[s][u].contains(&sn)
    });
    let f = Interface::new(
        &mgr,
        lay.x_vars().union(&lay.u_vars()),
        lay.next_vars(),
        rel,
    )
    .unwrap();
    let cells: BTreeSet<usize> = (0..n)
        .filter(|_| g.rng().gen_bool(if reach { 0.2 } else { 0.8 }))
        .collect();
    let xv: Vec<BoolVar> = st.cur.clone();
    let set = table_predicate(&mut mgr, &xv, |row| {
        let s = (0..b).fold(0, |a, k| a << 1 | (row >> k & 1) as usize);
        cells.contains(&s)
    });
    let obj = if reach {
        Objective::Reach(set)
    } else {
        Objective::Safe(set)
    };
    let spec = GameSpec::new(&mut mgr, &lay, vec![f], None, obj).unwrap();
    (mgr, spec, Explicit { n, valid_u, succ }, cells)
}

fn cells_of(mgr: &Manager, spec: &GameSpec, p: Predicate) -> BTreeSet<usize> {
    let cur = &spec.states[0].cur;
    let n = 1usize << cur.len();
    (0..n)
        .filter(|&s| {
            mgr.eval_with(p, |v| {
                let k = cur.iter().position(|c| *c == v).unwrap();
                s >> (cur.len() - 1 - k) & 1 == 1
            })
        })
        .collect()
}

#[test]
fn solve_matches_explicit_enumeration() {
    for seed in 0..40 {
        let reach = seed % 2 == 0;
        let (mut mgr, spec, ex, cells) = explicit_game(seed, 3 + (seed % 3) as u32, reach);
        let opts = SolveOptions {
            keep_iterates: true,
            ..Default::default()
        };
        let sol = solve(&mut mgr, &spec, &opts).unwrap();
        let want = if reach {
            ex.reach(&cells)
        } else {
            ex.safe(&cells)
        };
        let got: Vec<_> = sol
            .trace
            .iterates
            .iter()
            .map(|&z| cells_of(&mgr, &spec, z))
            .collect();
        assert_eq!(got, want, "seed {seed}");
        assert_eq!(sol.stop, StopReason::FixedPoint);
        for (row, set) in sol.trace.rows.iter().zip(&want) {
            assert_eq!(row.states as usize, set.len());
        }
        // controller consistency
        let c = mgr.exists(&spec.u, sol.controller);
        let (cp, _) = spec_cpre(&mut mgr, &spec, sol.winning).unwrap();
        assert_eq!(c, cp);
    }
}

#[test]
fn steps_match_solver_iterates() {
    let (mut mgr, spec, _, _) = explicit_game(3, 4, true);
    let t = spec.objective.set();
    let opts = SolveOptions {
        keep_iterates: true,
        ..Default::default()
    };
    let sol = solve(&mut mgr, &spec, &opts).unwrap();
    let mut z = mgr.bot();
    for &zi in &sol.trace.iterates {
        z = reach_step(&mut mgr, &spec, z, t).unwrap();
        assert_eq!(z, zi);
    }
    let (mut mgr, spec, _, _) = explicit_game(4, 4, false);
    let s = spec.objective.set();
    let sol = solve(&mut mgr, &spec, &opts).unwrap();
    let mut z = s;
    for &zi in &sol.trace.iterates {
        z = safe_step(&mut mgr, &spec, z, s).unwrap();
        assert_eq!(z, zi);
    }
}

fn identity_toy(reach: bool) -> (Manager, GameSpec) {
    let x = Dimension::continuous("x", 0.0, 1.0, false, 3).unwrap();
    let u = Dimension::discrete("u", vec![0.0, 1.0, 2.0]).unwrap();
    let (mut mgr, lay) = Layout::new(vec![x], vec![u]).unwrap();
    let mut id = mgr.top();
    for (&a, &b) in lay.states[0].cur.iter().zip(&lay.states[0].next) {
        let (pa, pb) = (mgr.ithvar(a), mgr.ithvar(b));
        let e = mgr.iff(pa, pb);
        id = mgr.and(id, e);
    }
    let f = Interface::new(&mgr, lay.x_vars(), lay.next_vars(), id).unwrap();
    let set = lay
        .state_box(
            &mut mgr,
            &[("x", Interval::new(0.25, 0.75))],
            EncodeMode::Inner,
            None,
        )
        .unwrap();
    let obj = if reach {
        Objective::Reach(set)
    } else {
        Objective::Safe(set)
    };
    let spec = GameSpec::new(&mut mgr, &lay, vec![f], None, obj).unwrap();
    (mgr, spec)
}

#[test]
fn identity_dynamics() {
    let (mut mgr, spec) = identity_toy(true);
    let sol = solve(&mut mgr, &spec, &SolveOptions::default()).unwrap();
    assert_eq!(sol.winning, spec.objective.set());
    assert_eq!(sol.trace.rows.len(), 2);
    assert_eq!(sol.stop, StopReason::FixedPoint);
    let csv = sol.trace.to_csv();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("iter,nodes,states,seconds,coarsen_events\n1,"));

    let (mut mgr, spec) = identity_toy(false);
    let sol = solve(&mut mgr, &spec, &SolveOptions::default()).unwrap();
    assert_eq!(sol.winning, spec.objective.set());

    let (mut mgr, mut spec) = identity_toy(false);
    spec.objective = Objective::Safe(mgr.bot());
    let sol = solve(&mut mgr, &spec, &SolveOptions::default()).unwrap();
    assert_eq!(sol.winning, mgr.bot());
}

#[test]
fn zero_budget_returns_initial_region() {
    let (mut mgr, spec) = identity_toy(true);
    let opts = SolveOptions {
        max_iters: 0,
        ..Default::default()
    };
    let sol = solve(&mut mgr, &spec, &opts).unwrap();
    assert_eq!(sol.winning, mgr.bot());
    assert_eq!(sol.stop, StopReason::Budget);
    assert!(sol.trace.rows.is_empty());
    let (mut mgr, spec) = identity_toy(false);
    let sol = solve(&mut mgr, &spec, &opts).unwrap();
    assert_eq!(sol.winning, spec.objective.set());
}

#[test]
fn node_cap_stops_the_run() {
    let (mut mgr, spec, _, _) = explicit_game(11, 5, true);
    let opts = SolveOptions {
        node_cap: Some(1),
        ..Default::default()
    };
    let sol = solve(&mut mgr, &spec, &opts).unwrap();
    assert_eq!(sol.stop, StopReason::ResourceCap);
    assert_eq!(sol.trace.rows.len(), 1);
}

#[test]
fn spec_validation() {
    let (mut mgr, spec) = identity_toy(true);
    let mut bad = spec.clone();
    bad.order = vec![1];
    assert!(matches!(bad.validate(&mgr), Err(GameError::BadOrder)));
    let mut bad = spec.clone();
    bad.components.push(spec.components[0].clone());
    bad.order = vec![0, 1];
    assert!(matches!(bad.validate(&mgr), Err(GameError::NotAPartition)));
    let mut bad = spec.clone();
    let xn = spec.states[0].next[0];
    bad.objective = Objective::Reach(mgr.ithvar(xn));
    assert!(matches!(
        bad.validate(&mgr),
        Err(GameError::ObjectiveSupport)
    ));
    assert!(matches!(
        solve_downsampled(&mut mgr, &spec, &[], &SolveOptions::default()),
        Err(GameError::BadSchedule)
    ));
    assert!(matches!(
        solve_downsampled(&mut mgr, &spec, &[vec![9]], &SolveOptions::default()),
        Err(GameError::BadSchedule)
    ));
}

fn two_dim_states(mgr: &mut Manager) -> Vec<StateBits> {
    let names: Vec<String> = (0..3)
        .flat_map(|k| [format!("a{k}"), format!("a'{k}")])
        .chain((0..3).flat_map(|k| [format!("b{k}"), format!("b'{k}")]))
        .collect();
    for n in &names {
        mgr.add_var(n).unwrap();
    }
    let get = |mgr: &Manager, p: &str| {
        (0..3)
            .map(|k| mgr.var(&format!("{p}{k}")).unwrap())
            .collect::<Vec<_>>()
    };
    vec![
        StateBits {
            name: "a".into(),
            cur: get(mgr, "a"),
            next: get(mgr, "a'"),
        },
        StateBits {
            name: "b".into(),
            cur: get(mgr, "b"),
            next: get(mgr, "b'"),
        },
    ]
}

#[test]
fn greedy_examples() {
    let mut mgr = Manager::new::<&str>(&[]).unwrap();
    let st = two_dim_states(&mut mgr);
    let top = mgr.top();
    assert_eq!(greedy_coarsen(&mut mgr, &st, top, 0), top);
    let mut gc = GreedyCoarsener::new(0, &st);
    let (z, events) = gc.coarsen(&mut mgr, &st, top);
    assert_eq!((z, events), (top, 0));
    // a nonconstant region under a zero threshold runs until bits run out
    let a0 = mgr.ithvar(st[0].cur[0]);
    let (z, events) = gc.coarsen(&mut mgr, &st, a0);
    assert_eq!((z, events), (mgr.bot(), 6));
    assert_eq!(gc.precision, vec![0, 0]);

    // half-space on the msb of `a` plus a bit of detail in `b`
    let a0 = mgr.ithvar(st[0].cur[0]);
    let b2 = mgr.ithvar(st[1].cur[2]);
    let b1 = mgr.ithvar(st[1].cur[1]);
    let detail = mgr.or(b1, b2);
    let z = mgr.and(a0, detail);
    assert_eq!(greedy_coarsen(&mut mgr, &st, z, 100), z);
    let mut g = GreedyCoarsener::new(2, &st);
    let (r, _) = g.coarsen(&mut mgr, &st, z);
    // `a`'s low bits are unconstrained, so they go first; then `b` loses
    // less than `a` would
    assert_eq!(g.precision, vec![1, 2]);
    assert!(mgr.entails(r, z));
    assert!(mgr.node_count(r) <= 2);
    assert_eq!(r, mgr.and(a0, b1));
}

#[test]
fn greedy_solve_stays_under_threshold_and_inside_basin() {
    for seed in 0..10 {
        let (mut mgr, spec, _, _) = explicit_game(100 + seed, 6, true);
        let plain = solve(&mut mgr, &spec, &SolveOptions::default()).unwrap();
        let opts = SolveOptions {
            coarsen_threshold: Some(4),
            ..Default::default()
        };
        let coarse = solve(&mut mgr, &spec, &opts).unwrap();
        assert!(mgr.entails(coarse.winning, plain.winning), "seed {seed}");
        for r in &coarse.trace.rows {
            let exhausted = coarse.precision.iter().all(|&p| p == 0);
            assert!(r.coarsen_events == 0 || r.nodes <= 4 || exhausted);
        }
    }
}

#[test]
fn downsampling() {
    for seed in 0..10 {
        let (mut mgr, spec, _, _) = explicit_game(200 + seed, 5, true);
        let plain = solve(&mut mgr, &spec, &SolveOptions::default()).unwrap();
        let one = solve_downsampled(&mut mgr, &spec, &[vec![5]], &SolveOptions::default()).unwrap();
        assert_eq!(one.winning, plain.winning);
        let two = solve_downsampled(
            &mut mgr,
            &spec,
            &[vec![3], vec![5]],
            &SolveOptions::default(),
        )
        .unwrap();
        assert!(mgr.entails(two.winning, plain.winning));
        let coarse_only =
            solve_downsampled(&mut mgr, &spec, &[vec![3]], &SolveOptions::default()).unwrap();
        assert!(mgr.entails(coarse_only.winning, two.winning));
        assert_eq!(two.stop, StopReason::FixedPoint);
        assert!(two.trace.rows.iter().any(|r| r.level == 1));
    }
}

#[test]
fn cpre_is_monotone_in_target() {
    for seed in 0..50 {
        let (mut mgr, spec, _, _) = explicit_game(300 + seed, 4, true);
        let mut g = Generator::new(seed);
        let x: Vec<BoolVar> = spec.x().iter().collect();
        let a = g.predicate(&mut mgr, &x, 0.4);
        let extra = g.predicate(&mut mgr, &x, 0.4);
        let b = mgr.or(a, extra);
        let (ca, _) = spec_cpre(&mut mgr, &spec, a).unwrap();
        let (cb, _) = spec_cpre(&mut mgr, &spec, b).unwrap();
        assert!(mgr.entails(ca, cb));
    }
}

#[test]
fn prop1_pipeline_200_seeds() {
    assert_eq!(laws::run_law(laws::cpre_pipeline, 0, 200), Ok(()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn decomposed_equals_monolithic(seed in any::<u64>()) {
        prop_assert_eq!(laws::run_law(laws::decomposed_cpre, seed, 1), Ok(()));
    }

    #[test]
    fn abstract_dynamics_win_less(seed in any::<u64>()) {
        prop_assert_eq!(laws::run_law(laws::substitutability, seed, 1), Ok(()));
    }

    #[test]
    fn reach_traces_grow_and_safe_traces_shrink(seed in any::<u64>(), reach in any::<bool>()) {
        let (mut mgr, spec, _, _) = explicit_game(seed, 4, reach);
        let opts = SolveOptions { keep_iterates: true, ..Default::default() };
        let sol = solve(&mut mgr, &spec, &opts).unwrap();
        for w in sol.trace.iterates.windows(2) {
            let ok = if reach { mgr.entails(w[0], w[1]) } else { mgr.entails(w[1], w[0]) };
            prop_assert!(ok);
        }
    }
}
