//! Finite abstractions of concrete dynamics built by sampling.
//!
//! Each [`DynamicsComponent`] maps a box of inputs to a box guaranteed to
//! contain every successor. A sample over an input box becomes the
//! interface `I ∧ O` (grid cells of the box, outer-encoded successor
//! cells); samples are merged with shared refinement starting from `⊥`.
//! Inputs never sampled stay blocking, which is always sound.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bdd::{BoolVar, Manager, Predicate, VarSet};
use crate::interface::{refine_with_nb, Interface, InterfaceError};
use crate::interval::Interval;
use crate::spaces::{
    cell_box, cell_ranges, encode_cell, encode_set, Dimension, EncodeMode, Layout, SpaceError,
};

#[derive(Debug, Error)]
pub enum AbstractionError {
    #[error("sample for `{component}` lies outside the domain of `{dim}`")]
    OutsideDomain { component: String, dim: String },
    #[error("evaluator of `{0}` returned an empty or undefined box")]
    BadEvaluation(String),
    #[error("sample has {given} coordinates but `{component}` reads {expected}")]
    WrongArity {
        component: String,
        given: usize,
        expected: usize,
    },
    #[error("component `{0}`: {1}")]
    BadComponent(String, String),
    #[error("invalid traversal plan: {0}")]
    BadPlan(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Interface(#[from] InterfaceError),
}

pub type Result<T> = std::result::Result<T, AbstractionError>;

/// Vehicle length in the Dubins turning-rate term.
pub const DUBINS_LENGTH: f64 = 1.4;

/// Which variable of the system a component reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DimRef {
    State(usize),
    Control(usize),
}

/// Next-state maps with interval extensions.
#[derive(Clone, Debug, PartialEq)]
pub enum Evaluator {
    /// `p_x⁺ = p_x + v cos θ`; inputs `(p_x, θ, v)`.
    DubinsX,
    /// `p_y⁺ = p_y + v sin θ`; inputs `(p_y, θ, v)`.
    DubinsY,
    /// `θ⁺ = θ + (v / L) sin ω`; inputs `(θ, v, ω)`.
    DubinsTheta { length: f64 },
    /// `offset + Σ coeffs[k] · input[k]`.
    Affine { coeffs: Vec<f64>, offset: f64 },
}

impl Evaluator {
    pub fn arity(&self) -> usize {
        match self {
            Evaluator::DubinsX | Evaluator::DubinsY | Evaluator::DubinsTheta { .. } => 3,
            Evaluator::Affine { coeffs, .. } => coeffs.len(),
        }
    }

    /// Interval extension: contains `eval_point(p)` for every `p` in `b`.
    pub fn eval_box(&self, b: &[Interval]) -> Interval {
        match self {
            Evaluator::DubinsX => b[0].add(&b[1].cos().mul(&b[2])),
            Evaluator::DubinsY => b[0].add(&b[1].sin().mul(&b[2])),
            Evaluator::DubinsTheta { length } => {
                b[0].add(&b[1].scale(1.0 / length).mul(&b[2].sin()))
            }
            Evaluator::Affine { coeffs, offset } => coeffs
                .iter()
                .zip(b)
                .fold(Interval::point(*offset), |acc, (c, iv)| {
                    acc.add(&iv.scale(*c))
                }),
        }
    }

    pub fn eval_point(&self, p: &[f64]) -> f64 {
        match self {
            Evaluator::DubinsX => p[0] + p[2] * p[1].cos(),
            Evaluator::DubinsY => p[0] + p[2] * p[1].sin(),
            Evaluator::DubinsTheta { length } => p[0] + p[1] / length * p[2].sin(),
            Evaluator::Affine { coeffs, offset } => {
                offset + coeffs.iter().zip(p).map(|(c, x)| c * x).sum::<f64>()
            }
        }
    }
}

/// One next-state map `F_k(inputs, output⁺)`.
#[derive(Clone, Debug)]
pub struct DynamicsComponent {
    pub name: String,
    pub inputs: Vec<DimRef>,
    /// State dimension written by this component.
    pub output: usize,
    pub eval: Evaluator,
    /// Precision at which each continuous state input is read (`None`:
    /// the dimension's full precision). Entries for controls are ignored.
    pub input_bits: Vec<Option<u32>>,
}

/// A control system: variable layout plus one component per state
/// dimension.
#[derive(Clone, Debug)]
pub struct System {
    pub layout: Layout,
    pub components: Vec<DynamicsComponent>,
}

/// Dubins vehicle on `[-2,2]² × [-π,π)` with `v ∈ {0.25, 0.5}` and
/// `ω ∈ {-1.5, 0, 1.5}`; `bits` gives the precision of `(p_x, p_y, θ)`.
pub fn dubins(bits: [u32; 3]) -> Result<(Manager, System)> {
    let states = vec![
        Dimension::continuous("px", -2.0, 2.0, false, bits[0])?,
        Dimension::continuous("py", -2.0, 2.0, false, bits[1])?,
        Dimension::continuous("theta", -PI, PI, true, bits[2])?,
    ];
    let controls = vec![
        Dimension::discrete("v", vec![0.25, 0.5])?,
        Dimension::discrete("omega", vec![-1.5, 0.0, 1.5])?,
    ];
    let (mgr, layout) = Layout::new(states, controls)?;
    use DimRef::*;
    let comp = |name: &str, inputs: Vec<DimRef>, output, eval| DynamicsComponent {
        name: name.into(),
        input_bits: vec![None; inputs.len()],
        inputs,
        output,
        eval,
    };
    let components = vec![
        comp(
            "F_x",
            vec![State(0), State(2), Control(0)],
            0,
            Evaluator::DubinsX,
        ),
        comp(
            "F_y",
            vec![State(1), State(2), Control(0)],
            1,
            Evaluator::DubinsY,
        ),
        comp(
            "F_theta",
            vec![State(2), Control(0), Control(1)],
            2,
            Evaluator::DubinsTheta {
                length: DUBINS_LENGTH,
            },
        ),
    ];
    let sys = System { layout, components };
    sys.validate()?;
    Ok((mgr, sys))
}

/// One-dimensional `x⁺ = x + u` on `[lo, hi]` with the given control
/// values.
pub fn toy1d(lo: f64, hi: f64, bits: u32, controls: Vec<f64>) -> Result<(Manager, System)> {
    let x = Dimension::continuous("x", lo, hi, false, bits)?;
    let (inputs, coeffs, cdims) = if controls.is_empty() {
        (vec![DimRef::State(0)], vec![1.0], vec![])
    } else {
        (
            vec![DimRef::State(0), DimRef::Control(0)],
            vec![1.0, 1.0],
            vec![Dimension::discrete("u", controls)?],
        )
    };
    let (mgr, layout) = Layout::new(vec![x], cdims)?;
    let c = DynamicsComponent {
        name: "F_x".into(),
        input_bits: vec![None; inputs.len()],
        inputs,
        output: 0,
        eval: Evaluator::Affine {
            coeffs,
            offset: 0.0,
        },
    };
    let sys = System {
        layout,
        components: vec![c],
    };
    sys.validate()?;
    Ok((mgr, sys))
}

/// One affine next-state map `output⁺ = offset + Σ coeff · input`, with
/// dimensions referred to by name.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineComponent {
    pub name: String,
    pub output: String,
    pub terms: Vec<(String, f64)>,
    pub offset: f64,
}

/// A system whose components are all affine.
pub fn affine(
    states: Vec<Dimension>,
    controls: Vec<Dimension>,
    components: &[AffineComponent],
) -> Result<(Manager, System)> {
    let (mgr, layout) = Layout::new(states, controls)?;
    let mut comps = Vec::new();
    for a in components {
        let resolve = |n: &str| {
            layout
                .state_index(n)
                .map(DimRef::State)
                .or_else(|| layout.control_index(n).map(DimRef::Control))
                .ok_or_else(|| {
                    AbstractionError::BadComponent(
                        a.name.clone(),
                        format!("unknown dimension `{n}`"),
                    )
                })
        };
        let output = match resolve(&a.output)? {
            DimRef::State(d) => d,
            DimRef::Control(_) => {
                return Err(AbstractionError::BadComponent(
                    a.name.clone(),
                    "output is a control".into(),
                ))
            }
        };
        let inputs = a
            .terms
            .iter()
            .map(|(n, _)| resolve(n))
            .collect::<Result<Vec<_>>>()?;
        comps.push(DynamicsComponent {
            name: a.name.clone(),
            input_bits: vec![None; inputs.len()],
            inputs,
            output,
            eval: Evaluator::Affine {
                coeffs: a.terms.iter().map(|t| t.1).collect(),
                offset: a.offset,
            },
        });
    }
    let sys = System {
        layout,
        components: comps,
    };
    sys.validate()?;
    Ok((mgr, sys))
}

/// Wraps `x` into `[lo, lo + span)`.
fn wrap(x: f64, lo: f64, span: f64) -> f64 {
    lo + (x - lo).rem_euclid(span)
}

/// Interval image of one Dubins component, with `θ⁺` shifted so its lower
/// end lies in `[-π, π)` (the upper end may pass `π`, meaning the set
/// wraps around).
pub fn interval_eval_dubins(component: &Evaluator, b: &[Interval]) -> Interval {
    let out = component.eval_box(b);
    match component {
        Evaluator::DubinsTheta { .. } => {
            let lo = wrap(out.lo, -PI, 2.0 * PI);
            out.shift(lo - out.lo)
        }
        _ => out,
    }
}

/// One coordinate of a sample box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SampleCoord {
    Interval(Interval),
    /// Index into a discrete dimension's values.
    Value(usize),
}

impl System {
    pub fn validate(&self) -> Result<()> {
        let ns = self.layout.states.len();
        let nc = self.layout.controls.len();
        let mut written = vec![false; ns];
        for c in &self.components {
            let bad = |m: &str| AbstractionError::BadComponent(c.name.clone(), m.into());
            if c.inputs.len() != c.eval.arity() || c.input_bits.len() != c.inputs.len() {
                return Err(bad("input count does not match the evaluator"));
            }
            if c.output >= ns || std::mem::replace(&mut written[c.output], true) {
                return Err(bad("output dimension missing or written twice"));
            }
            if !self.layout.states[c.output].dim.is_continuous() {
                return Err(bad("outputs must be continuous"));
            }
            for (r, b) in c.inputs.iter().zip(&c.input_bits) {
                match *r {
                    DimRef::State(d) if d < ns => {
                        let dim = &self.layout.states[d].dim;
                        if !dim.is_continuous() || b.is_some_and(|b| b > dim.bits()) {
                            return Err(bad(
                                "state inputs must be continuous and read at most their precision",
                            ));
                        }
                    }
                    DimRef::Control(k) if k < nc => {}
                    _ => return Err(bad("unknown input dimension")),
                }
            }
        }
        if written.iter().any(|w| !w) {
            return Err(AbstractionError::BadComponent(
                "system".into(),
                "a state dimension has no component".into(),
            ));
        }
        Ok(())
    }

    pub fn dim(&self, r: DimRef) -> &Dimension {
        match r {
            DimRef::State(d) => &self.layout.states[d].dim,
            DimRef::Control(k) => &self.layout.controls[k].dim,
        }
    }

    /// The dimension as component `c` reads input `k` (possibly coarser)
    /// and the matching variables.
    pub fn input_view(&self, c: &DynamicsComponent, k: usize) -> Result<(Dimension, Vec<BoolVar>)> {
        Ok(match c.inputs[k] {
            DimRef::State(d) => {
                let s = &self.layout.states[d];
                let b = c.input_bits[k].unwrap_or(s.dim.bits());
                let dim = if b == s.dim.bits() {
                    s.dim.clone()
                } else {
                    s.dim.with_bits(b)?
                };
                (dim, s.cur[..b as usize].to_vec())
            }
            DimRef::Control(j) => {
                let s = &self.layout.controls[j];
                (s.dim.clone(), s.vars.clone())
            }
        })
    }

    /// Input and output variables of a component's interface.
    pub fn signature(&self, c: &DynamicsComponent) -> Result<(VarSet, VarSet)> {
        let mut ins = VarSet::new();
        for k in 0..c.inputs.len() {
            ins.extend(self.input_view(c, k)?.1);
        }
        let outs = self.layout.states[c.output].next.iter().copied().collect();
        Ok((ins, outs))
    }

    /// All state dimensions followed by all control dimensions.
    pub fn all_dims(&self) -> Vec<DimRef> {
        (0..self.layout.states.len())
            .map(DimRef::State)
            .chain((0..self.layout.controls.len()).map(DimRef::Control))
            .collect()
    }
}

/// A sample as the predicate pair `(I ∧ O, I)`; `None` when the successor
/// box leaves a non-periodic domain, in which case the inputs stay
/// blocking.
fn sample_pred(
    mgr: &mut Manager,
    sys: &System,
    c: &DynamicsComponent,
    sample: &[SampleCoord],
) -> Result<Option<(Predicate, Predicate)>> {
    if sample.len() != c.inputs.len() {
        return Err(AbstractionError::WrongArity {
            component: c.name.clone(),
            given: sample.len(),
            expected: c.inputs.len(),
        });
    }
    let outside = |dim: &Dimension| AbstractionError::OutsideDomain {
        component: c.name.clone(),
        dim: dim.name().into(),
    };
    let mut input = mgr.top();
    let mut boxes = Vec::with_capacity(sample.len());
    for (k, coord) in sample.iter().enumerate() {
        let (dim, vars) = sys.input_view(c, k)?;
        match (*coord, dim.values()) {
            (SampleCoord::Value(i), Some(values)) => {
                let v = *values.get(i).ok_or_else(|| outside(&dim))?;
                let cell = encode_cell(mgr, &dim, i as u64, &vars)?;
                input = mgr.and(input, cell);
                boxes.push(Interval::point(v));
            }
            (SampleCoord::Interval(iv), None) => {
                let d = dim.domain();
                let tol = 1e-9 * dim.cell_width().unwrap();
                if !(iv.is_valid() && iv.lo >= d.lo - tol && iv.hi <= d.hi + tol) {
                    return Err(outside(&dim));
                }
                let iv = Interval::new(iv.lo.max(d.lo), iv.hi.min(d.hi));
                let ranges = cell_ranges(&dim, iv, EncodeMode::Outer)?;
                let (first, last) = match ranges.as_slice() {
                    [r] => *r,
                    [] if iv.lo >= d.hi - tol => (dim.cell_count() - 1, dim.cell_count() - 1),
                    _ => return Err(outside(&dim)),
                };
                let snapped = Interval::new(cell_box(&dim, first)?.lo, cell_box(&dim, last)?.hi);
                let cells = crate::spaces::range_predicate(mgr, &vars, first, last);
                input = mgr.and(input, cells);
                boxes.push(snapped);
            }
            _ => return Err(outside(&dim)),
        }
    }
    let out = c.eval.eval_box(&boxes);
    if !out.is_valid() {
        return Err(AbstractionError::BadEvaluation(c.name.clone()));
    }
    let st = &sys.layout.states[c.output];
    let d = st.dim.domain();
    let tol = 1e-9 * st.dim.cell_width().unwrap();
    let o = if st.dim.is_periodic() {
        if out.width() >= d.width() {
            mgr.top()
        } else {
            encode_set(mgr, &st.dim, out, EncodeMode::Outer, &st.next)?
        }
    } else if out.lo < d.lo - tol || out.hi > d.hi + tol {
        return Ok(None);
    } else {
        encode_set(mgr, &st.dim, out, EncodeMode::Outer, &st.next)?
    };
    let f = mgr.and(input, o);
    Ok(Some((f, input)))
}

/// The interface `I ∧ O` of one sample: `I` are the grid cells of the
/// (outward-snapped) input box, `O` the outer-encoded cells of the
/// evaluator's image of that box. Images leaving a non-periodic domain
/// give `⊥`.
pub fn sample_to_interface(
    mgr: &mut Manager,
    sys: &System,
    component: usize,
    sample: &[SampleCoord],
) -> Result<Interface> {
    let c = &sys.components[component];
    let (ins, outs) = sys.signature(c)?;
    let p = sample_pred(mgr, sys, c, sample)?.map_or(mgr.bot(), |(f, _)| f);
    Ok(Interface::new(mgr, ins, outs, p)?)
}

/// How input space is covered.
#[derive(Clone, Debug, PartialEq)]
pub enum TraversalPlan {
    /// Every grid cell of every input at the component's precision.
    Exhaustive,
    /// Random boxes over all system dimensions, projected onto each
    /// component.
    RandomRects { count: usize, seed: u64 },
    /// Passes of coarse windows `width` fine cells wide, shifted by
    /// `offset` fine cells; discrete inputs are enumerated in every pass.
    ShiftedGrids { passes: Vec<GridPass> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridPass {
    pub width: u64,
    pub offset: u64,
}

impl TraversalPlan {
    pub fn describe(&self) -> String {
        match self {
            TraversalPlan::Exhaustive => "exhaustive".into(),
            TraversalPlan::RandomRects { count, seed } => {
                format!("random_rects count={count} seed={seed}")
            }
            TraversalPlan::ShiftedGrids { passes } => {
                let p: Vec<String> = passes
                    .iter()
                    .map(|p| format!("{}+{}", p.width, p.offset))
                    .collect();
                format!("shifted_grids {}", p.join(","))
            }
        }
    }
}

/// Running shared refinement of samples, tracking the non-blocking set.
#[derive(Clone, Copy, Debug)]
pub struct Accumulator {
    pub f: Predicate,
    pub nb: Predicate,
    pub samples: usize,
}

impl Accumulator {
    pub fn new(mgr: &Manager) -> Self {
        Accumulator {
            f: mgr.bot(),
            nb: mgr.bot(),
            samples: 0,
        }
    }

    /// Refines with a batch of `(F, NB F)` pairs. The batch is merged as a
    /// balanced tree before joining the accumulator; shared refinement of
    /// compatible samples is associative and commutative, so the result is
    /// the same as folding one sample at a time.
    pub fn add_batch(&mut self, mgr: &mut Manager, mut batch: Vec<(Predicate, Predicate)>) {
        self.samples += batch.len();
        if batch.is_empty() {
            return;
        }
        while batch.len() > 1 {
            let mut next = Vec::with_capacity(batch.len().div_ceil(2));
            for pair in batch.chunks(2) {
                next.push(match *pair {
                    [(f1, n1), (f2, n2)] => (refine_with_nb(mgr, f1, n1, f2, n2), mgr.or(n1, n2)),
                    [one] => one,
                    _ => unreachable!(),
                });
            }
            batch = next;
        }
        let (f2, n2) = batch[0];
        self.f = refine_with_nb(mgr, self.f, self.nb, f2, n2);
        self.nb = mgr.or(self.nb, n2);
    }

    /// Refines with one sample.
    pub fn add(&mut self, mgr: &mut Manager, f2: Predicate, n2: Predicate) {
        self.samples += 1;
        self.f = refine_with_nb(mgr, self.f, self.nb, f2, n2);
        self.nb = mgr.or(self.nb, n2);
    }
}

fn product<T: Clone>(axes: &[Vec<T>], mut f: impl FnMut(&[T])) {
    let mut cur = Vec::with_capacity(axes.len());
    fn rec<T: Clone>(axes: &[Vec<T>], cur: &mut Vec<T>, f: &mut impl FnMut(&[T])) {
        if cur.len() == axes.len() {
            f(cur);
            return;
        }
        for v in &axes[cur.len()] {
            cur.push(v.clone());
            rec(axes, cur, f);
            cur.pop();
        }
    }
    rec(axes, &mut cur, &mut f);
}

fn value_axis(dim: &Dimension) -> Vec<SampleCoord> {
    (0..dim.cell_count() as usize)
        .map(SampleCoord::Value)
        .collect()
}

/// Grid-aligned sample boxes for one component.
fn grid_samples(
    sys: &System,
    c: &DynamicsComponent,
    pass: Option<GridPass>,
) -> Result<Vec<Vec<SampleCoord>>> {
    let mut axes = Vec::new();
    for k in 0..c.inputs.len() {
        let (dim, _) = sys.input_view(c, k)?;
        if !dim.is_continuous() {
            axes.push(value_axis(&dim));
            continue;
        }
        let n = dim.cell_count();
        let (width, offset) = pass.map_or((1, 0), |p| (p.width, p.offset % p.width.max(1)));
        if width == 0 {
            return Err(AbstractionError::BadPlan(
                "grid width must be positive".into(),
            ));
        }
        let w = dim.cell_width().unwrap();
        let lo = dim.domain().lo;
        let mut axis = Vec::new();
        let mut start = offset as i64 - if offset > 0 { width as i64 } else { 0 };
        while start < n as i64 {
            let a = start.max(0) as f64;
            let b = ((start + width as i64).min(n as i64)) as f64;
            axis.push(SampleCoord::Interval(Interval::new(lo + a * w, lo + b * w)));
            start += width as i64;
        }
        axes.push(axis);
    }
    let mut out = Vec::new();
    product(&axes, |s| out.push(s.to_vec()));
    Ok(out)
}

/// Random boxes over every system dimension (states then controls).
/// Widths and lower corners are uniform over each domain and the upper
/// corner is clipped to the domain; discrete dimensions get one uniformly
/// chosen value.
pub fn random_rects(sys: &System, count: usize, seed: u64) -> Vec<Vec<SampleCoord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims = sys.all_dims();
    (0..count)
        .map(|_| {
            dims.iter()
                .map(|&r| {
                    let d = sys.dim(r);
                    if d.is_continuous() {
                        let dom = d.domain();
                        let w = rng.gen_range(0.0..=dom.width());
                        let lo = rng.gen_range(dom.lo..=dom.hi);
                        SampleCoord::Interval(Interval::new(lo, (lo + w).min(dom.hi)))
                    } else {
                        SampleCoord::Value(rng.gen_range(0..d.cell_count() as usize))
                    }
                })
                .collect()
        })
        .collect()
}

/// Restricts a system-wide box to the inputs of one component.
pub fn project(sys: &System, c: &DynamicsComponent, full: &[SampleCoord]) -> Vec<SampleCoord> {
    let ns = sys.layout.states.len();
    c.inputs
        .iter()
        .map(|r| match *r {
            DimRef::State(d) => full[d],
            DimRef::Control(k) => full[ns + k],
        })
        .collect()
}

/// Adds samples to a component's accumulator.
pub fn add_samples(
    mgr: &mut Manager,
    sys: &System,
    component: usize,
    acc: &mut Accumulator,
    samples: &[Vec<SampleCoord>],
) -> Result<()> {
    let c = &sys.components[component];
    let mut batch = Vec::with_capacity(samples.len());
    for s in samples {
        if let Some(p) = sample_pred(mgr, sys, c, s)? {
            batch.push(p);
        }
    }
    let skipped = samples.len() - batch.len();
    acc.add_batch(mgr, batch);
    acc.samples += skipped;
    Ok(())
}

/// Finishes an accumulator into the component's interface.
pub fn finish(
    mgr: &Manager,
    sys: &System,
    component: usize,
    acc: &Accumulator,
) -> Result<Interface> {
    let (ins, outs) = sys.signature(&sys.components[component])?;
    Ok(Interface::new(mgr, ins, outs, acc.f)?)
}

/// Builds one component's abstraction under `plan`.
pub fn traverse(
    mgr: &mut Manager,
    sys: &System,
    component: usize,
    plan: &TraversalPlan,
) -> Result<Interface> {
    let c = &sys.components[component];
    let samples = match plan {
        TraversalPlan::Exhaustive => grid_samples(sys, c, None)?,
        TraversalPlan::RandomRects { count, seed } => random_rects(sys, *count, *seed)
            .iter()
            .map(|full| project(sys, c, full))
            .collect(),
        TraversalPlan::ShiftedGrids { passes } => {
            if passes.is_empty() {
                return Err(AbstractionError::BadPlan("no grid passes".into()));
            }
            let mut all = Vec::new();
            for p in passes {
                all.extend(grid_samples(sys, c, Some(*p))?);
            }
            all
        }
    };
    let mut acc = Accumulator::new(mgr);
    add_samples(mgr, sys, component, &mut acc, &samples)?;
    finish(mgr, sys, component, &acc)
}

/// Abstractions of every component under the same plan.
pub fn traverse_all(
    mgr: &mut Manager,
    sys: &System,
    plan: &TraversalPlan,
) -> Result<Vec<Interface>> {
    (0..sys.components.len())
        .map(|k| traverse(mgr, sys, k, plan))
        .collect()
}
