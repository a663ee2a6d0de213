//! Controlled predecessors and reach/safe fixed points.
//!
//! A game is played on the state bits `x` of a [`GameSpec`]: the controller
//! picks a valid control `u`, the dynamics relate `(x, u)` to successors
//! `x⁺`, and output non-determinism is adversarial. The controlled
//! predecessor of a sink `Z` over `x⁺` is
//!
//! ```text
//! cpre(F, Z) = ∃u (dom_u ∧ ∃x⁺ F ∧ ∀x⁺ (F ⟹ Z))
//! ```
//!
//! which equals `ihide(u, ohide(x⁺, comp(F, Z)))` with the `u`
//! quantification restricted to valid codes. When the dynamics are split
//! into components with disjoint outputs, the `comp`/`ohide` pair is applied
//! one component at a time so each step only touches that component's
//! successor bits.

use std::fmt::Write as _;
use std::time::Instant;

use thiserror::Error;

use crate::bdd::{BoolVar, Manager, Predicate, VarSet};
use crate::interface::{self as ia, Interface, InterfaceError};
use crate::spaces::Layout;

#[derive(Debug, Error)]
pub enum GameError {
    #[error("component outputs must partition the next-state bits")]
    NotAPartition,
    #[error("component inputs must be state or control bits")]
    BadInputs,
    #[error("elimination order is not a permutation of the components")]
    BadOrder,
    #[error("objective must be a predicate over the state bits")]
    ObjectiveSupport,
    #[error("downsampling needs at least one level with one precision per state dimension")]
    BadSchedule,
    #[error(transparent)]
    Interface(#[from] InterfaceError),
}

pub type Result<T> = std::result::Result<T, GameError>;

/// Current and next bits of one state dimension, most significant first.
#[derive(Clone, Debug)]
pub struct StateBits {
    pub name: String,
    pub cur: Vec<BoolVar>,
    pub next: Vec<BoolVar>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    /// Reach the target sink.
    Reach(Predicate),
    /// Stay in the safe sink forever.
    Safe(Predicate),
}

impl Objective {
    pub fn set(&self) -> Predicate {
        match *self {
            Objective::Reach(p) | Objective::Safe(p) => p,
        }
    }

    fn with_set(&self, p: Predicate) -> Objective {
        match self {
            Objective::Reach(_) => Objective::Reach(p),
            Objective::Safe(_) => Objective::Safe(p),
        }
    }
}

#[derive(Clone, Debug)]
pub struct GameSpec {
    /// Dynamics components `F_k(i_k, x⁺_k)`; a single entry is monolithic.
    pub components: Vec<Interface>,
    /// Elimination order; the first component is composed with `Z` first.
    /// Defaults to [`default_order`].
    pub order: Vec<usize>,
    pub states: Vec<StateBits>,
    pub u: VarSet,
    /// Valid control codes.
    pub control_domain: Predicate,
    pub objective: Objective,
}

impl GameSpec {
    /// Builds and validates a spec over the variables of `layout`.
    pub fn new(
        mgr: &mut Manager,
        layout: &Layout,
        components: Vec<Interface>,
        order: Option<Vec<usize>>,
        objective: Objective,
    ) -> Result<Self> {
        let states = layout
            .states
            .iter()
            .map(|s| StateBits {
                name: s.dim.name().to_string(),
                cur: s.cur.clone(),
                next: s.next.clone(),
            })
            .collect();
        let order = order.unwrap_or_else(|| default_order(&components));
        let control_domain = layout.control_domain(mgr);
        let spec = GameSpec {
            components,
            order,
            states,
            u: layout.u_vars(),
            control_domain,
            objective,
        };
        spec.validate(mgr)?;
        Ok(spec)
    }

    pub fn x(&self) -> VarSet {
        self.states
            .iter()
            .flat_map(|s| s.cur.iter().copied())
            .collect()
    }

    pub fn x_next(&self) -> VarSet {
        self.states
            .iter()
            .flat_map(|s| s.next.iter().copied())
            .collect()
    }

    pub fn to_next(&self) -> Vec<(BoolVar, BoolVar)> {
        self.states
            .iter()
            .flat_map(|s| s.cur.iter().copied().zip(s.next.iter().copied()))
            .collect()
    }

    pub fn validate(&self, mgr: &Manager) -> Result<()> {
        let (x, xn) = (self.x(), self.x_next());
        let mut covered = VarSet::new();
        for c in &self.components {
            if !covered.is_disjoint(c.outputs()) {
                return Err(GameError::NotAPartition);
            }
            covered = covered.union(c.outputs());
            if !c.inputs().is_subset(&x.union(&self.u)) {
                return Err(GameError::BadInputs);
            }
        }
        if covered != xn {
            return Err(GameError::NotAPartition);
        }
        let mut seen = self.order.clone();
        seen.sort_unstable();
        if seen != (0..self.components.len()).collect::<Vec<_>>() {
            return Err(GameError::BadOrder);
        }
        if !mgr.support(self.objective.set()).is_subset(&x) {
            return Err(GameError::ObjectiveSupport);
        }
        Ok(())
    }

    /// The same game with every component replaced by their composition.
    pub fn monolithic(&self, mgr: &mut Manager) -> Result<GameSpec> {
        let f = compose_all(mgr, &self.components)?;
        Ok(GameSpec {
            components: vec![f],
            order: vec![0],
            ..self.clone()
        })
    }
}

/// Components whose outputs sit deepest in the variable order come first,
/// so the bottom of the diagram is quantified away before the top.
pub fn default_order(components: &[Interface]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..components.len()).collect();
    order.sort_by_key(|&k| std::cmp::Reverse(components[k].outputs().iter().next_back()));
    order
}

/// Composition of a list of interfaces, left to right.
pub fn compose_all(mgr: &mut Manager, parts: &[Interface]) -> Result<Interface> {
    let mut it = parts.iter();
    let first = it.next().cloned().ok_or(GameError::NotAPartition)?;
    it.try_fold(first, |acc, f| {
        ia::comp(mgr, &acc, f).map_err(GameError::from)
    })
}

fn check_cpre_args(f: &Interface, z: &Interface) -> Result<()> {
    if !z.is_sink() || !z.inputs().is_subset(f.outputs()) {
        return Err(InterfaceError::SignatureMismatch.into());
    }
    Ok(())
}

/// Controlled predecessor through the fused `ohide ∘ comp` operator.
/// `z` is a sink over (a subset of) `F`'s outputs.
pub fn cpre(
    mgr: &mut Manager,
    f: &Interface,
    z: &Interface,
    u: &VarSet,
    dom_u: Predicate,
) -> Result<Interface> {
    let pairs = controller_pairs(mgr, f, z, u, dom_u)?;
    Ok(ia::ihide(mgr, u, &pairs)?)
}

/// The `(x, u)` sink of state/control pairs that robustly enforce `Z` one
/// step ahead: `dom_u ∧ ohide(x⁺, comp(F, Z))`.
pub fn controller_pairs(
    mgr: &mut Manager,
    f: &Interface,
    z: &Interface,
    u: &VarSet,
    dom_u: Predicate,
) -> Result<Interface> {
    check_cpre_args(f, z)?;
    let h = ia::ohide_comp(mgr, &f.outputs().clone(), f, z)?;
    let g = mgr.and(h.pred(), dom_u);
    Ok(Interface::from_parts(h.inputs().union(u), VarSet::new(), g))
}

/// Controlled predecessor assembled from the atomic operators only:
/// `ihide(u, comp(D_u, ohide(x⁺, comp(F, Z))))`.
pub fn cpre_literal(
    mgr: &mut Manager,
    f: &Interface,
    z: &Interface,
    u: &VarSet,
    dom_u: Predicate,
) -> Result<Interface> {
    check_cpre_args(f, z)?;
    let c = ia::comp(mgr, f, z)?;
    let h = ia::ohide(mgr, &f.outputs().clone(), &c)?;
    let dom = Interface::sink(mgr, u.clone(), dom_u)?;
    let g = ia::comp(mgr, &h, &dom)?;
    let u_here = u.intersection(g.inputs());
    Ok(ia::ihide(mgr, &u_here, &g)?)
}

/// Controlled predecessor written directly with quantifiers:
/// `∃u (dom_u ∧ ∃x⁺ F ∧ ∀x⁺ (F ⟹ Z))`.
pub fn cpre_direct(
    mgr: &mut Manager,
    f: &Interface,
    z: Predicate,
    u: &VarSet,
    dom_u: Predicate,
) -> Predicate {
    let xn = f.outputs().clone();
    let some = mgr.exists(&xn, f.pred());
    let all = mgr.forall_implies(&xn, f.pred(), z);
    let body = mgr.and_all([dom_u, some, all]);
    mgr.exists(u, body)
}

/// Decomposed controller pairs: folds `ohide(x⁺_k, comp(F_k, ·))` over the
/// components in `order`, starting from `Z`, then guards with `dom_u`.
pub fn controller_pairs_decomposed(
    mgr: &mut Manager,
    components: &[Interface],
    order: &[usize],
    z: &Interface,
    u: &VarSet,
    dom_u: Predicate,
) -> Result<Interface> {
    let mut seen = order.to_vec();
    seen.sort_unstable();
    if seen != (0..components.len()).collect::<Vec<_>>() {
        return Err(GameError::BadOrder);
    }
    if !z.is_sink() {
        return Err(InterfaceError::SignatureMismatch.into());
    }
    let mut acc = z.clone();
    for &k in order {
        let c = &components[k];
        acc = ia::ohide_comp(mgr, &c.outputs().clone(), c, &acc)?;
    }
    let g = mgr.and(acc.pred(), dom_u);
    Ok(Interface::from_parts(
        acc.inputs().union(u),
        VarSet::new(),
        g,
    ))
}

/// Controlled predecessor over decomposed dynamics.
pub fn cpre_decomposed(
    mgr: &mut Manager,
    components: &[Interface],
    order: &[usize],
    z: &Interface,
    u: &VarSet,
    dom_u: Predicate,
) -> Result<Interface> {
    let pairs = controller_pairs_decomposed(mgr, components, order, z, u, dom_u)?;
    Ok(ia::ihide(mgr, u, &pairs)?)
}

/// One cpre of `spec` applied to a sink over `x`; returns the new sink and
/// the controller pairs it came from.
pub fn spec_cpre(
    mgr: &mut Manager,
    spec: &GameSpec,
    z: Predicate,
) -> Result<(Predicate, Predicate)> {
    let zn = mgr
        .rename(z, &spec.to_next())
        .map_err(InterfaceError::from)?;
    let z_sink = Interface::from_parts(spec.x_next(), VarSet::new(), zn);
    let pairs = if spec.components.len() == 1 {
        controller_pairs(
            mgr,
            &spec.components[0],
            &z_sink,
            &spec.u,
            spec.control_domain,
        )?
    } else {
        controller_pairs_decomposed(
            mgr,
            &spec.components,
            &spec.order,
            &z_sink,
            &spec.u,
            spec.control_domain,
        )?
    };
    let c = pairs.pred();
    let w = mgr.exists(&spec.u, c);
    Ok((w, c))
}

/// `Z_{i+1} = refine(cpre(F, Z_i), T)`; for sinks this is `cpre ∨ T`.
pub fn reach_step(
    mgr: &mut Manager,
    spec: &GameSpec,
    z: Predicate,
    target: Predicate,
) -> Result<Predicate> {
    let (c, _) = spec_cpre(mgr, spec, z)?;
    let x = spec.x();
    let a = Interface::from_parts(x.clone(), VarSet::new(), c);
    let t = Interface::from_parts(x, VarSet::new(), target);
    Ok(ia::refine(mgr, &a, &t)?.pred())
}

/// `Z_{i+1} = comp(cpre(F, Z_i), S)`; for sinks this is `cpre ∧ S`.
pub fn safe_step(
    mgr: &mut Manager,
    spec: &GameSpec,
    z: Predicate,
    safe: Predicate,
) -> Result<Predicate> {
    let (c, _) = spec_cpre(mgr, spec, z)?;
    let x = spec.x();
    let a = Interface::from_parts(x.clone(), VarSet::new(), c);
    let s = Interface::from_parts(x, VarSet::new(), safe);
    Ok(ia::comp(mgr, &a, &s)?.pred())
}

// -------------------------------------------------------------------------
// coarsening

fn dropped_bits(states: &[StateBits], precision: &[u32], next: bool) -> VarSet {
    let mut d = VarSet::new();
    for (s, &p) in states.iter().zip(precision) {
        let bits = if next { &s.next } else { &s.cur };
        d.extend(bits[p as usize..].iter().copied());
    }
    d
}

/// Input-coarsens a sink over `x` to the given per-dimension precision:
/// a coarse cell is kept only if all its fine cells are.
pub fn coarsen_to(
    mgr: &mut Manager,
    states: &[StateBits],
    precision: &[u32],
    z: Predicate,
) -> Predicate {
    let d = dropped_bits(states, precision, false);
    if d.is_empty() {
        z
    } else {
        mgr.forall(&d, z)
    }
}

/// Greedy precision reduction of winning regions.
///
/// While the region has more than `threshold` nodes, each dimension with
/// bits left is tried with its least significant kept bit dropped; the
/// trial keeping the most fine-grid states wins, ties going to the lowest
/// dimension index. The chosen precision persists for later calls.
#[derive(Clone, Debug)]
pub struct GreedyCoarsener {
    pub threshold: usize,
    pub precision: Vec<u32>,
}

impl GreedyCoarsener {
    pub fn new(threshold: usize, states: &[StateBits]) -> Self {
        GreedyCoarsener {
            threshold,
            precision: states.iter().map(|s| s.cur.len() as u32).collect(),
        }
    }

    /// Applies the current precision, then drops further bits as needed.
    /// Returns the region and the number of bits dropped.
    pub fn coarsen(
        &mut self,
        mgr: &mut Manager,
        states: &[StateBits],
        z: Predicate,
    ) -> (Predicate, usize) {
        let x: VarSet = states.iter().flat_map(|s| s.cur.iter().copied()).collect();
        let mut z = coarsen_to(mgr, states, &self.precision, z);
        let mut events = 0;
        while mgr.node_count(z) > self.threshold {
            let mut best: Option<(u128, usize, Predicate)> = None;
            for (d, s) in states.iter().enumerate() {
                let p = self.precision[d];
                if p == 0 {
                    continue;
                }
                let bit: VarSet = [s.cur[p as usize - 1]].into_iter().collect();
                let trial = mgr.forall(&bit, z);
                let kept = mgr.sat_count(trial, &x).expect("sink over state bits");
                if best.as_ref().is_none_or(|b| kept > b.0) {
                    best = Some((kept, d, trial));
                }
            }
            let Some((_, d, trial)) = best else { break };
            self.precision[d] -= 1;
            z = trial;
            events += 1;
        }
        (z, events)
    }
}

/// One-shot greedy coarsening starting from full precision.
pub fn greedy_coarsen(
    mgr: &mut Manager,
    states: &[StateBits],
    z: Predicate,
    threshold: usize,
) -> Predicate {
    GreedyCoarsener::new(threshold, states)
        .coarsen(mgr, states, z)
        .0
}

// -------------------------------------------------------------------------
// solving

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub max_iters: usize,
    /// Greedy coarsening of the winning region above this many nodes.
    pub coarsen_threshold: Option<usize>,
    /// Soft cap on live nodes; exceeding it stops the run.
    pub node_cap: Option<usize>,
    /// Collect garbage between iterations once this many nodes are live
    /// (and the count has doubled since the last collection).
    pub gc_floor: usize,
    /// Keep every iterate in the trace.
    pub keep_iterates: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iters: 10_000,
            coarsen_threshold: None,
            node_cap: None,
            gc_floor: 1 << 21,
            keep_iterates: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    FixedPoint,
    Budget,
    ResourceCap,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::FixedPoint => "fixed-point",
            StopReason::Budget => "budget",
            StopReason::ResourceCap => "resource-cap",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterStats {
    pub iter: usize,
    pub nodes: usize,
    pub states: u128,
    pub seconds: f64,
    pub coarsen_events: usize,
    /// Index into the precision schedule (0 for plain solves).
    pub level: usize,
}

#[derive(Clone, Debug, Default)]
pub struct GameTrace {
    pub rows: Vec<IterStats>,
    /// Iterates `Z_1, Z_2, …` when requested.
    pub iterates: Vec<Predicate>,
}

impl GameTrace {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iter,nodes,states,seconds,coarsen_events\n");
        for r in &self.rows {
            writeln!(
                s,
                "{},{},{},{:.6},{}",
                r.iter, r.nodes, r.states, r.seconds, r.coarsen_events
            )
            .unwrap();
        }
        s
    }

    pub fn total_seconds(&self) -> f64 {
        self.rows.iter().map(|r| r.seconds).sum()
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    /// Winning region, a sink over `x`. Protected against collection.
    pub winning: Predicate,
    /// State/control pairs from the last iteration, a sink over `x ∪ u`.
    /// Protected against collection.
    pub controller: Predicate,
    pub trace: GameTrace,
    pub stop: StopReason,
    /// Final per-dimension precision of the winning region.
    pub precision: Vec<u32>,
}

/// Iterates the reach or safe operator until the winning region stops
/// changing or the budget runs out.
///
/// The run may collect garbage. Handles held by the caller that are not
/// part of `spec` survive only if they are protected.
pub fn solve(mgr: &mut Manager, spec: &GameSpec, opts: &SolveOptions) -> Result<Solution> {
    let full: Vec<u32> = spec.states.iter().map(|s| s.cur.len() as u32).collect();
    run(mgr, spec, &[full], opts)
}

/// Solves over a coarse-to-fine precision schedule. At each level both
/// the dynamics (state inputs and successor outputs) and the objective are
/// truncated to that level's bits; when an iteration leaves the region
/// unchanged the next finer level takes over from the current region.
pub fn solve_downsampled(
    mgr: &mut Manager,
    spec: &GameSpec,
    levels: &[Vec<u32>],
    opts: &SolveOptions,
) -> Result<Solution> {
    if levels.is_empty() || levels.iter().any(|l| l.len() != spec.states.len()) {
        return Err(GameError::BadSchedule);
    }
    for l in levels {
        for (s, &b) in spec.states.iter().zip(l) {
            if b as usize > s.cur.len() {
                return Err(GameError::BadSchedule);
            }
        }
    }
    run(mgr, spec, levels, opts)
}

/// `spec` with dynamics and objective truncated to `precision`.
pub fn truncate_spec(mgr: &mut Manager, spec: &GameSpec, precision: &[u32]) -> Result<GameSpec> {
    let din = dropped_bits(&spec.states, precision, false);
    let dout = dropped_bits(&spec.states, precision, true);
    let mut comps = Vec::with_capacity(spec.components.len());
    for c in &spec.components {
        let di = din.intersection(c.inputs());
        let dn = dout.intersection(c.outputs());
        let t = ia::truncate_inputs(mgr, c, &di)?;
        comps.push(ia::truncate_outputs(mgr, &t, &dn)?);
    }
    let obj = coarsen_to(mgr, &spec.states, precision, spec.objective.set());
    Ok(GameSpec {
        components: comps,
        objective: spec.objective.with_set(obj),
        ..spec.clone()
    })
}

fn run(
    mgr: &mut Manager,
    spec: &GameSpec,
    levels: &[Vec<u32>],
    opts: &SolveOptions,
) -> Result<Solution> {
    spec.validate(mgr)?;
    let x = spec.x();
    mgr.set_node_cap(opts.node_cap);
    let full: Vec<u32> = spec.states.iter().map(|s| s.cur.len() as u32).collect();
    let reach = matches!(spec.objective, Objective::Reach(_));

    let mut level = 0;
    let mut cur = if levels[0] == full {
        spec.clone()
    } else {
        truncate_spec(mgr, spec, &levels[0])?
    };
    let mut greedy = opts
        .coarsen_threshold
        .map(|t| GreedyCoarsener::new(t, &spec.states));
    let mut z = if reach {
        mgr.bot()
    } else {
        cur.objective.set()
    };
    let mut controller = mgr.bot();
    let mut trace = GameTrace::default();
    let mut stop = StopReason::Budget;
    let mut last_live = mgr.live_nodes();
    let mut iter = 0;

    while iter < opts.max_iters {
        iter += 1;
        let t0 = Instant::now();
        let (c, pairs) = spec_cpre(mgr, &cur, z)?;
        let obj = cur.objective.set();
        // the previous region is folded in so that coarsening and level
        // changes cannot undo progress; on plain runs it is a no-op
        let mut next = if reach {
            let n = mgr.or(c, obj);
            mgr.or(n, z)
        } else {
            let n = mgr.and(c, obj);
            mgr.and(n, z)
        };
        let mut events = 0;
        if let Some(g) = greedy.as_mut() {
            let (n, e) = g.coarsen(mgr, &spec.states, next);
            next = n;
            events = e;
        }
        let stalled = next == z;
        z = next;
        controller = pairs;
        let row = IterStats {
            iter,
            nodes: mgr.node_count(z),
            states: mgr.sat_count(z, &x).expect("sink over state bits"),
            seconds: t0.elapsed().as_secs_f64(),
            coarsen_events: events,
            level,
        };
        trace.rows.push(row);
        if opts.keep_iterates {
            trace.iterates.push(z);
        }

        if stalled {
            if level + 1 < levels.len() {
                level += 1;
                cur = if levels[level] == full {
                    spec.clone()
                } else {
                    truncate_spec(mgr, spec, &levels[level])?
                };
            } else {
                stop = StopReason::FixedPoint;
                break;
            }
        }

        let live = mgr.live_nodes();
        if live > opts.gc_floor && live > 2 * last_live {
            let mut roots = vec![
                z,
                controller,
                spec.control_domain,
                spec.objective.set(),
                cur.control_domain,
            ];
            roots.push(cur.objective.set());
            roots.extend(spec.components.iter().map(|c| c.pred()));
            roots.extend(cur.components.iter().map(|c| c.pred()));
            roots.extend(trace.iterates.iter().copied());
            mgr.gc(&roots);
            last_live = mgr.live_nodes();
        }
        if mgr.cap_exceeded() {
            stop = StopReason::ResourceCap;
            break;
        }
    }
    mgr.protect(z);
    mgr.protect(controller);
    let precision = greedy.map_or_else(|| levels[level].clone(), |g| g.precision);
    Ok(Solution {
        winning: z,
        controller,
        trace,
        stop,
        precision,
    })
}

#[cfg(test)]
mod tests;
