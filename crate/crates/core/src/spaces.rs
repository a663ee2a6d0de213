//! Fixed-width binary encodings of continuous and discrete domains.
//!
//! A continuous dimension `[lo, hi]` with `N` bits is split into `2^N`
//! equal cells; cell `k` is `[lo + k·w, lo + (k+1)·w)` and is encoded as
//! the binary expansion of `k`, most significant bit first. Dropping
//! trailing bits therefore merges neighbouring cells, which is what the
//! bit-truncating quantizers rely on.

use thiserror::Error;

use crate::bdd::{BddError, BoolVar, Manager, Predicate, VarSet};
use crate::interface::Interface;
use crate::interval::Interval;

#[derive(Debug, Error, PartialEq)]
pub enum SpaceError {
    #[error("dimension `{0}`: empty or inverted domain")]
    BadDomain(String),
    #[error("dimension `{0}`: discrete values must be distinct")]
    DuplicateValue(String),
    #[error("dimension `{0}`: too many bits ({1})")]
    TooManyBits(String, u32),
    #[error("cell index {idx} out of range for `{dim}` ({count} cells)")]
    IndexOutOfRange { dim: String, idx: u64, count: u64 },
    #[error("`{dim}` has {bits} bits but {given} variables were supplied")]
    WrongVarCount {
        dim: String,
        bits: u32,
        given: usize,
    },
    #[error("`{0}` is discrete")]
    NotContinuous(String),
    #[error("`{0}` is continuous")]
    NotDiscrete(String),
    #[error("invalid interval {0}")]
    BadInterval(Interval),
    #[error("quantizer keeps {keep} bits but the vectors have {fine} and {coarse}")]
    QuantizerTooWide {
        keep: usize,
        fine: usize,
        coarse: usize,
    },
    #[error("unknown dimension `{0}`")]
    UnknownDim(String),
    #[error(transparent)]
    Bdd(#[from] BddError),
}

#[derive(Clone, Debug, PartialEq)]
pub enum DimKind {
    Continuous { lo: f64, hi: f64, periodic: bool },
    Discrete { values: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dimension {
    name: String,
    kind: DimKind,
    bits: u32,
}

const MAX_BITS: u32 = 30;

impl Dimension {
    pub fn continuous(
        name: &str,
        lo: f64,
        hi: f64,
        periodic: bool,
        bits: u32,
    ) -> Result<Self, SpaceError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(SpaceError::BadDomain(name.into()));
        }
        if bits > MAX_BITS {
            return Err(SpaceError::TooManyBits(name.into(), bits));
        }
        Ok(Dimension {
            name: name.into(),
            kind: DimKind::Continuous { lo, hi, periodic },
            bits,
        })
    }

    /// Discrete values in the given order; code = list position, width
    /// `⌈log₂ n⌉` bits.
    pub fn discrete(name: &str, values: Vec<f64>) -> Result<Self, SpaceError> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(SpaceError::BadDomain(name.into()));
        }
        for (i, a) in values.iter().enumerate() {
            if values[..i].contains(a) {
                return Err(SpaceError::DuplicateValue(name.into()));
            }
        }
        let bits = (values.len() as u64).next_power_of_two().trailing_zeros();
        Ok(Dimension {
            name: name.into(),
            kind: DimKind::Discrete { values },
            bits,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &DimKind {
        &self.kind
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.kind, DimKind::Continuous { periodic: true, .. })
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self.kind, DimKind::Continuous { .. })
    }

    /// Number of valid codes.
    pub fn cell_count(&self) -> u64 {
        match &self.kind {
            DimKind::Continuous { .. } => 1u64 << self.bits,
            DimKind::Discrete { values } => values.len() as u64,
        }
    }

    pub fn domain(&self) -> Interval {
        match &self.kind {
            DimKind::Continuous { lo, hi, .. } => Interval::new(*lo, *hi),
            DimKind::Discrete { values } => Interval::new(
                values.iter().copied().fold(f64::INFINITY, f64::min),
                values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            ),
        }
    }

    pub fn values(&self) -> Option<&[f64]> {
        match &self.kind {
            DimKind::Discrete { values } => Some(values),
            _ => None,
        }
    }

    pub fn cell_width(&self) -> Option<f64> {
        match &self.kind {
            DimKind::Continuous { lo, hi, .. } => Some((hi - lo) / (1u64 << self.bits) as f64),
            _ => None,
        }
    }

    /// The same continuous domain at a different precision.
    pub fn with_bits(&self, bits: u32) -> Result<Dimension, SpaceError> {
        match &self.kind {
            DimKind::Continuous { lo, hi, periodic } => {
                Dimension::continuous(&self.name, *lo, *hi, *periodic, bits)
            }
            DimKind::Discrete { .. } => Err(SpaceError::NotContinuous(self.name.clone())),
        }
    }

    /// Index of the cell holding `x` (wrapping for periodic dims), or
    /// `None` outside a non-periodic domain.
    pub fn cell_of(&self, x: f64) -> Option<u64> {
        match &self.kind {
            DimKind::Continuous { lo, hi, periodic } => {
                let span = hi - lo;
                let mut t = x - lo;
                if *periodic {
                    t = t.rem_euclid(span);
                } else if x < *lo || x >= *hi {
                    return None;
                }
                let n = 1u64 << self.bits;
                Some(((t / span * n as f64).floor() as u64).min(n - 1))
            }
            DimKind::Discrete { values } => values.iter().position(|v| *v == x).map(|p| p as u64),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EncodeMode {
    /// Cells entirely inside the set.
    Inner,
    /// Cells that intersect the set.
    Outer,
}

fn check_vars(dim: &Dimension, vars: &[BoolVar]) -> Result<(), SpaceError> {
    if vars.len() != dim.bits as usize {
        return Err(SpaceError::WrongVarCount {
            dim: dim.name.clone(),
            bits: dim.bits,
            given: vars.len(),
        });
    }
    Ok(())
}

/// Minterm over `vars` (msb first) spelling `idx`.
pub fn encode_cell(
    mgr: &mut Manager,
    dim: &Dimension,
    idx: u64,
    vars: &[BoolVar],
) -> Result<Predicate, SpaceError> {
    check_vars(dim, vars)?;
    let count = dim.cell_count();
    if idx >= count {
        return Err(SpaceError::IndexOutOfRange {
            dim: dim.name.clone(),
            idx,
            count,
        });
    }
    Ok(code_minterm(mgr, idx, vars))
}

fn code_minterm(mgr: &mut Manager, idx: u64, vars: &[BoolVar]) -> Predicate {
    let n = vars.len();
    let lits: Vec<_> = vars
        .iter()
        .enumerate()
        .map(|(k, &v)| (v, idx >> (n - 1 - k) & 1 == 1))
        .collect();
    mgr.minterm(&lits)
}

/// Reads an msb-first bit vector back into a cell index.
pub fn decode_cell(bits: &[bool]) -> u64 {
    bits.iter().fold(0u64, |acc, &b| acc << 1 | b as u64)
}

/// The real box covered by a continuous cell.
pub fn cell_box(dim: &Dimension, idx: u64) -> Result<Interval, SpaceError> {
    let DimKind::Continuous { lo, .. } = dim.kind else {
        return Err(SpaceError::NotContinuous(dim.name.clone()));
    };
    let count = dim.cell_count();
    if idx >= count {
        return Err(SpaceError::IndexOutOfRange {
            dim: dim.name.clone(),
            idx,
            count,
        });
    }
    let w = dim.cell_width().unwrap();
    Ok(Interval::new(
        lo + idx as f64 * w,
        lo + (idx + 1) as f64 * w,
    ))
}

/// Snaps values within floating-point noise of a cell boundary onto it.
fn grid_coord(x: f64, lo: f64, w: f64) -> f64 {
    let t = (x - lo) / w;
    let r = t.round();
    if (t - r).abs() <= 1e-9 * r.abs().max(1.0) + 4.0 * f64::EPSILON {
        r
    } else {
        t
    }
}

/// Inclusive cell-index ranges covering `iv` under `mode`.
///
/// Both cells and sets are read as half-open, so an outer encoding of
/// `[a, b)` stops before the cell starting at `b`; a point set `[a, a]`
/// gives the cell holding `a`. Bounds within `1e-9` cell widths of a grid
/// line are snapped onto it. Periodic intervals are wrapped into the domain and may
/// split into two ranges.
pub fn cell_ranges(
    dim: &Dimension,
    iv: Interval,
    mode: EncodeMode,
) -> Result<Vec<(u64, u64)>, SpaceError> {
    if !(iv.lo.is_finite() && iv.hi.is_finite()) || iv.lo > iv.hi {
        return Err(SpaceError::BadInterval(iv));
    }
    match &dim.kind {
        DimKind::Discrete { values } => {
            let hits: Vec<u64> = (0..values.len() as u64)
                .filter(|&i| iv.contains(values[i as usize]))
                .collect();
            Ok(hits.into_iter().map(|i| (i, i)).collect())
        }
        DimKind::Continuous { lo, hi, periodic } => {
            let n = dim.cell_count() as i64;
            let w = dim.cell_width().unwrap();
            let a = grid_coord(iv.lo, *lo, w);
            let b = grid_coord(iv.hi, *lo, w);
            let (first, last) = match mode {
                EncodeMode::Inner => (a.ceil() as i64, b.floor() as i64 - 1),
                EncodeMode::Outer if a == b => (a.floor() as i64, a.floor() as i64),
                EncodeMode::Outer => (a.floor() as i64, b.ceil() as i64 - 1),
            };
            if first > last {
                return Ok(vec![]);
            }
            if *periodic {
                if last - first + 1 >= n {
                    return Ok(vec![(0, n as u64 - 1)]);
                }
                let f = first.rem_euclid(n);
                let l = f + (last - first);
                if l < n {
                    Ok(vec![(f as u64, l as u64)])
                } else {
                    Ok(vec![(0, (l - n) as u64), (f as u64, n as u64 - 1)])
                }
            } else {
                let _ = hi;
                let (f, l) = (first.max(0), last.min(n - 1));
                Ok(if f <= l {
                    vec![(f as u64, l as u64)]
                } else {
                    vec![]
                })
            }
        }
    }
}

/// Predicate for the cells of `dim` that lie inside (inner) or touch
/// (outer) the interval.
pub fn encode_set(
    mgr: &mut Manager,
    dim: &Dimension,
    iv: Interval,
    mode: EncodeMode,
    vars: &[BoolVar],
) -> Result<Predicate, SpaceError> {
    check_vars(dim, vars)?;
    let mut acc = mgr.bot();
    for (first, last) in cell_ranges(dim, iv, mode)? {
        let r = range_predicate(mgr, vars, first, last);
        acc = mgr.or(acc, r);
    }
    Ok(acc)
}

/// `first ≤ code(vars) ≤ last` for an msb-first bit vector, built bottom-up
/// so the diagram stays linear in the width.
pub fn range_predicate(mgr: &mut Manager, vars: &[BoolVar], first: u64, last: u64) -> Predicate {
    let n = vars.len();
    if first > last {
        return mgr.bot();
    }
    let full = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
    if first == 0 && last >= full {
        return mgr.top();
    }
    let mut ge = mgr.top();
    let mut le = mgr.top();
    for k in (0..n).rev() {
        let bit = n - 1 - k;
        let x = mgr.ithvar(vars[k]);
        let nx = mgr.not(x);
        ge = if first >> bit & 1 == 1 {
            mgr.and(x, ge)
        } else {
            mgr.or(x, ge)
        };
        le = if last >> bit & 1 == 1 {
            mgr.or(nx, le)
        } else {
            mgr.and(nx, le)
        };
    }
    mgr.and(ge, le)
}

/// Which side of a quantizer is the input.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum QuantizerDirection {
    /// Signature `(fine, coarse)`: an output quantizer.
    FineToCoarse,
    /// Signature `(coarse, fine)`: an input quantizer.
    CoarseToFine,
}

/// Bit-truncating quantizer `⋀_{k<keep} (fine_k == coarse_k)`.
pub fn quantizer(
    mgr: &mut Manager,
    fine: &[BoolVar],
    coarse: &[BoolVar],
    keep: usize,
    direction: QuantizerDirection,
) -> Result<Interface, SpaceError> {
    if keep > fine.len().min(coarse.len()) {
        return Err(SpaceError::QuantizerTooWide {
            keep,
            fine: fine.len(),
            coarse: coarse.len(),
        });
    }
    let mut pred = mgr.top();
    for k in (0..keep).rev() {
        let (f, c) = (mgr.ithvar(fine[k]), mgr.ithvar(coarse[k]));
        let eq = mgr.iff(f, c);
        pred = mgr.and(eq, pred);
    }
    let fine_set: VarSet = fine.iter().collect();
    let coarse_set: VarSet = coarse.iter().collect();
    let (i, o) = match direction {
        QuantizerDirection::FineToCoarse => (fine_set, coarse_set),
        QuantizerDirection::CoarseToFine => (coarse_set, fine_set),
    };
    Interface::new(mgr, i, o, pred).map_err(|e| match e {
        crate::interface::InterfaceError::Bdd(b) => SpaceError::Bdd(b),
        other => panic!("quantizer signature: {other}"),
    })
}

/// Valid codes of a discrete dimension (`⊤` when every code is used).
pub fn discrete_domain_predicate(
    mgr: &mut Manager,
    dim: &Dimension,
    vars: &[BoolVar],
) -> Result<Predicate, SpaceError> {
    if dim.is_continuous() {
        return Err(SpaceError::NotDiscrete(dim.name.clone()));
    }
    check_vars(dim, vars)?;
    Ok(range_predicate(mgr, vars, 0, dim.cell_count() - 1))
}

// -------------------------------------------------------------------------
// variable layout

/// A state dimension with its current- and next-state bit vectors.
#[derive(Clone, Debug)]
pub struct StateDim {
    pub dim: Dimension,
    pub cur: Vec<BoolVar>,
    pub next: Vec<BoolVar>,
}

#[derive(Clone, Debug)]
pub struct ControlDim {
    pub dim: Dimension,
    pub vars: Vec<BoolVar>,
}

/// Variable allocation for a control system: for every state dimension the
/// current bit k sits directly before next bit k; control bits follow all
/// state bits.
#[derive(Clone, Debug)]
pub struct Layout {
    pub states: Vec<StateDim>,
    pub controls: Vec<ControlDim>,
}

pub fn cur_name(dim: &str, k: usize) -> String {
    format!("{dim}[{k}]")
}

pub fn next_name(dim: &str, k: usize) -> String {
    format!("{dim}'[{k}]")
}

impl Layout {
    pub fn new(
        states: Vec<Dimension>,
        controls: Vec<Dimension>,
    ) -> Result<(Manager, Layout), SpaceError> {
        let mut names = Vec::new();
        for d in &states {
            for k in 0..d.bits as usize {
                names.push(cur_name(&d.name, k));
                names.push(next_name(&d.name, k));
            }
        }
        for d in &controls {
            for k in 0..d.bits as usize {
                names.push(cur_name(&d.name, k));
            }
        }
        let mut all: Vec<&str> = states
            .iter()
            .chain(&controls)
            .map(|d| d.name.as_str())
            .collect();
        all.sort();
        if let Some(w) = all.windows(2).find(|w| w[0] == w[1]) {
            return Err(SpaceError::Bdd(BddError::DuplicateName(w[0].to_string())));
        }
        let mgr = Manager::new(&names)?;
        let lookup = |n: String| mgr.var(&n).expect("allocated above");
        let states = states
            .into_iter()
            .map(|dim| {
                let cur = (0..dim.bits as usize)
                    .map(|k| lookup(cur_name(&dim.name, k)))
                    .collect();
                let next = (0..dim.bits as usize)
                    .map(|k| lookup(next_name(&dim.name, k)))
                    .collect();
                StateDim { dim, cur, next }
            })
            .collect();
        let controls = controls
            .into_iter()
            .map(|dim| {
                let vars = (0..dim.bits as usize)
                    .map(|k| lookup(cur_name(&dim.name, k)))
                    .collect();
                ControlDim { dim, vars }
            })
            .collect();
        Ok((mgr, Layout { states, controls }))
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s.dim.name == name)
    }

    pub fn control_index(&self, name: &str) -> Option<usize> {
        self.controls.iter().position(|c| c.dim.name == name)
    }

    pub fn x_vars(&self) -> VarSet {
        self.states
            .iter()
            .flat_map(|s| s.cur.iter().copied())
            .collect()
    }

    pub fn next_vars(&self) -> VarSet {
        self.states
            .iter()
            .flat_map(|s| s.next.iter().copied())
            .collect()
    }

    pub fn u_vars(&self) -> VarSet {
        self.controls
            .iter()
            .flat_map(|c| c.vars.iter().copied())
            .collect()
    }

    /// `x → x⁺` pairs.
    pub fn to_next(&self) -> Vec<(BoolVar, BoolVar)> {
        self.states
            .iter()
            .flat_map(|s| s.cur.iter().copied().zip(s.next.iter().copied()))
            .collect()
    }

    /// `x⁺ → x` pairs.
    pub fn to_current(&self) -> Vec<(BoolVar, BoolVar)> {
        self.to_next().into_iter().map(|(a, b)| (b, a)).collect()
    }

    /// Valid control codes.
    pub fn control_domain(&self, mgr: &mut Manager) -> Predicate {
        let mut acc = mgr.top();
        for c in &self.controls {
            let d = discrete_domain_predicate(mgr, &c.dim, &c.vars).unwrap_or_else(|_| mgr.top());
            acc = mgr.and(acc, d);
        }
        acc
    }

    /// Product of per-dimension intervals over the current-state bits.
    /// Dimensions not listed are unconstrained. `bits` optionally encodes a
    /// dimension at a coarser precision (its leading bits only).
    pub fn state_box(
        &self,
        mgr: &mut Manager,
        boxes: &[(&str, Interval)],
        mode: EncodeMode,
        bits: Option<&[u32]>,
    ) -> Result<Predicate, SpaceError> {
        let mut acc = mgr.top();
        for (name, iv) in boxes {
            let i = self
                .state_index(name)
                .ok_or_else(|| SpaceError::UnknownDim(name.to_string()))?;
            let s = &self.states[i];
            let b = bits.map_or(s.dim.bits, |b| b[i].min(s.dim.bits));
            let dim = if b == s.dim.bits {
                s.dim.clone()
            } else {
                s.dim.with_bits(b)?
            };
            let p = encode_set(mgr, &dim, *iv, mode, &s.cur[..b as usize])?;
            acc = mgr.and(acc, p);
        }
        Ok(acc)
    }

    /// Number of grid states satisfying a predicate over `x`.
    pub fn state_count(&self, mgr: &Manager, p: Predicate) -> u128 {
        mgr.sat_count(p, &self.x_vars())
            .expect("predicate over state bits")
    }

    /// Visits every state cell (one index per state dimension) in `p`.
    pub fn for_each_state_cell(&self, mgr: &Manager, p: Predicate, mut f: impl FnMut(&[u64])) {
        let xs = self.x_vars();
        let order: Vec<BoolVar> = xs.iter().collect();
        // position of each state bit inside the cube vector
        let slots: Vec<Vec<usize>> = self
            .states
            .iter()
            .map(|s| {
                s.cur
                    .iter()
                    .map(|v| order.iter().position(|o| o == v).unwrap())
                    .collect()
            })
            .collect();
        let mut idx = vec![0u64; self.states.len()];
        mgr.for_each_cube(p, &xs, |cube| {
            expand(&slots, cube, 0, &mut idx, &mut f);
        });

        fn expand(
            slots: &[Vec<usize>],
            cube: &[Option<bool>],
            d: usize,
            idx: &mut Vec<u64>,
            f: &mut impl FnMut(&[u64]),
        ) {
            if d == slots.len() {
                f(idx);
                return;
            }
            let free: Vec<usize> = (0..slots[d].len())
                .filter(|&k| cube[slots[d][k]].is_none())
                .collect();
            let n = slots[d].len();
            let mut base = 0u64;
            for (k, &s) in slots[d].iter().enumerate() {
                if cube[s] == Some(true) {
                    base |= 1 << (n - 1 - k);
                }
            }
            for combo in 0..1u64 << free.len() {
                let mut v = base;
                for (j, &k) in free.iter().enumerate() {
                    if combo >> j & 1 == 1 {
                        v |= 1 << (n - 1 - k);
                    }
                }
                idx[d] = v;
                expand(slots, cube, d + 1, idx, f);
            }
        }
    }
}
