//! Relational interfaces and the operators that manipulate them.
//!
//! An [`Interface`] is a predicate together with disjoint input and output
//! variable sets. Inputs with no satisfying output are *blocking*; output
//! non-determinism is adversarial. Every operator here is monotone in the
//! refinement order checked by [`is_refinement`], so any pipeline assembled
//! from them preserves "abstract winning implies concrete winning".
//!
//! The atomic operators are written literally from their definitions.
//! [`ohide_comp`], [`refine_with_nb`], [`truncate_inputs`] and
//! [`truncate_outputs`] are fused forms of operator chains that the solvers
//! use on large predicates; each is tested against its literal chain.

mod io;

use thiserror::Error;

use crate::bdd::{BddError, Manager, Predicate, VarSet};

pub use io::{load, save, LoadedInterface};

#[derive(Debug, Error)]
pub enum InterfaceError {
    #[error("inputs and outputs overlap on `{0}`")]
    OverlappingSignature(String),
    #[error("predicate depends on `{0}`, which is neither an input nor an output")]
    SupportOutsideSignature(String),
    #[error("`{0}` is not an output of the interface")]
    NotAnOutput(String),
    #[error("`{0}` is not an input of the interface")]
    NotAnInput(String),
    #[error("input hiding applies only to sinks")]
    NotASink,
    #[error("composed interfaces share output `{0}`")]
    SharedOutputs(String),
    #[error("interfaces feed each other (cyclic composition)")]
    Cyclic,
    #[error("signatures differ")]
    SignatureMismatch,
    #[error("quantizer cannot be connected: {0}")]
    NotConnectable(String),
    #[error(transparent)]
    Bdd(#[from] BddError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed interface file at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, InterfaceError>;

/// A predicate over input variables `i` and output variables `o`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interface {
    inputs: VarSet,
    outputs: VarSet,
    pred: Predicate,
}

impl Interface {
    pub fn new(mgr: &Manager, inputs: VarSet, outputs: VarSet, pred: Predicate) -> Result<Self> {
        if let Some(v) = inputs.intersection(&outputs).iter().next() {
            return Err(InterfaceError::OverlappingSignature(
                mgr.var_name(v).to_string(),
            ));
        }
        let sig = inputs.union(&outputs);
        if let Some(v) = mgr.support(pred).difference(&sig).iter().next() {
            return Err(InterfaceError::SupportOutsideSignature(
                mgr.var_name(v).to_string(),
            ));
        }
        Ok(Interface {
            inputs,
            outputs,
            pred,
        })
    }

    pub fn sink(mgr: &Manager, inputs: VarSet, pred: Predicate) -> Result<Self> {
        Self::new(mgr, inputs, VarSet::new(), pred)
    }

    pub fn source(mgr: &Manager, outputs: VarSet, pred: Predicate) -> Result<Self> {
        Self::new(mgr, VarSet::new(), outputs, pred)
    }

    /// Skips the support check; callers guarantee the invariants.
    pub(crate) fn from_parts(inputs: VarSet, outputs: VarSet, pred: Predicate) -> Self {
        debug_assert!(inputs.is_disjoint(&outputs));
        Interface {
            inputs,
            outputs,
            pred,
        }
    }

    pub fn inputs(&self) -> &VarSet {
        &self.inputs
    }

    pub fn outputs(&self) -> &VarSet {
        &self.outputs
    }

    pub fn pred(&self) -> Predicate {
        self.pred
    }

    pub fn is_sink(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn is_source(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn same_signature(&self, other: &Interface) -> bool {
        self.inputs == other.inputs && self.outputs == other.outputs
    }

    /// Same signature, new predicate.
    pub fn with_pred(&self, pred: Predicate) -> Interface {
        Interface {
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
            pred,
        }
    }
}

fn first_name(mgr: &Manager, set: &VarSet) -> String {
    set.iter()
        .next()
        .map(|v| mgr.var_name(v).to_string())
        .unwrap_or_default()
}

/// `ohide(w, F)`: signature `(i, o∖w)`, predicate `∃w F`.
pub fn ohide(mgr: &mut Manager, w: &VarSet, f: &Interface) -> Result<Interface> {
    let stray = w.difference(&f.outputs);
    if !stray.is_empty() {
        return Err(InterfaceError::NotAnOutput(first_name(mgr, &stray)));
    }
    let pred = mgr.exists(w, f.pred);
    Ok(Interface::from_parts(
        f.inputs.clone(),
        f.outputs.difference(w),
        pred,
    ))
}

/// `NB(F)`: the sink of non-blocking inputs, `∃o F`.
///
/// A sink is returned unchanged; for a source the result is the constant
/// `⊥` when `F ⇔ ⊥` and `⊤` otherwise, which the same formula yields.
pub fn nb(mgr: &mut Manager, f: &Interface) -> Interface {
    let pred = nb_pred(mgr, f);
    Interface::from_parts(f.inputs.clone(), VarSet::new(), pred)
}

fn nb_pred(mgr: &mut Manager, f: &Interface) -> Predicate {
    if f.is_sink() {
        f.pred
    } else {
        mgr.exists(&f.outputs, f.pred)
    }
}

/// Puts a connected pair in feed-forward order: the first element's
/// outputs may feed the second's inputs but not the other way round.
fn orient<'a>(
    mgr: &Manager,
    f1: &'a Interface,
    f2: &'a Interface,
) -> Result<(&'a Interface, &'a Interface)> {
    let io12 = f1.outputs.intersection(&f2.inputs);
    let io21 = f2.outputs.intersection(&f1.inputs);
    if !io12.is_empty() && !io21.is_empty() {
        return Err(InterfaceError::Cyclic);
    }
    let shared = f1.outputs.intersection(&f2.outputs);
    if !shared.is_empty() {
        return Err(InterfaceError::SharedOutputs(first_name(mgr, &shared)));
    }
    Ok(if io21.is_empty() { (f1, f2) } else { (f2, f1) })
}

/// Composite signature `((i₁ ∪ i₂) ∖ io₁₂, o₁ ∪ o₂)` of an oriented pair.
fn comp_signature(f1: &Interface, f2: &Interface) -> (VarSet, VarSet) {
    let io12 = f1.outputs.intersection(&f2.inputs);
    let inputs = f1.inputs.union(&f2.inputs).difference(&io12);
    let outputs = f1.outputs.union(&f2.outputs);
    (inputs, outputs)
}

/// Interface composition: `F₁ ∧ F₂ ∧ ∀o₁₂ (F₁ ⟹ NB F₂)`.
///
/// If `F2` feeds `F1` the arguments are swapped; shared inputs are allowed.
/// Composing two unconnected interfaces gives their conjunction.
pub fn comp(mgr: &mut Manager, f1: &Interface, f2: &Interface) -> Result<Interface> {
    let (f1, f2) = orient(mgr, f1, f2)?;
    let (inputs, outputs) = comp_signature(f1, f2);
    let nb2 = nb_pred(mgr, f2);
    let o12 = f1.outputs.union(&f2.outputs);
    let robust = mgr.forall_implies(&o12, f1.pred, nb2);
    let both = mgr.and(f1.pred, f2.pred);
    let pred = mgr.and(both, robust);
    Ok(Interface::from_parts(inputs, outputs, pred))
}

/// `ihide(w, F)` for a sink `F`: signature `(i∖w, ∅)`, predicate `∃w F`.
pub fn ihide(mgr: &mut Manager, w: &VarSet, f: &Interface) -> Result<Interface> {
    if !f.is_sink() {
        return Err(InterfaceError::NotASink);
    }
    let stray = w.difference(&f.inputs);
    if !stray.is_empty() {
        return Err(InterfaceError::NotAnInput(first_name(mgr, &stray)));
    }
    let pred = mgr.exists(w, f.pred);
    Ok(Interface::from_parts(
        f.inputs.difference(w),
        VarSet::new(),
        pred,
    ))
}

/// Outcome of a refinement check.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Refinement {
    Holds,
    Fails,
    SignatureMismatch,
}

impl Refinement {
    pub fn holds(self) -> bool {
        self == Refinement::Holds
    }
}

/// Checks `A ⪯ B` (A abstracts B): `NB(A) ⟹ NB(B)` and
/// `(NB(A) ∧ B) ⟹ A` must both be valid.
pub fn is_refinement(mgr: &mut Manager, a: &Interface, b: &Interface) -> Refinement {
    if !a.same_signature(b) {
        return Refinement::SignatureMismatch;
    }
    let (na, nbb) = (nb_pred(mgr, a), nb_pred(mgr, b));
    if !mgr.entails(na, nbb) {
        return Refinement::Fails;
    }
    let lhs = mgr.and(na, b.pred);
    if mgr.entails(lhs, a.pred) {
        Refinement::Holds
    } else {
        Refinement::Fails
    }
}

/// `A ⪯ B` as a boolean; mismatched signatures are never related.
pub fn refines(mgr: &mut Manager, a: &Interface, b: &Interface) -> bool {
    is_refinement(mgr, a, b).holds()
}

/// Shared refinability: `(NB F₁ ∧ NB F₂) ⟹ ∃o (F₁ ∧ F₂)`.
pub fn is_shared_refinable(mgr: &mut Manager, f1: &Interface, f2: &Interface) -> Result<bool> {
    if !f1.same_signature(f2) {
        return Err(InterfaceError::SignatureMismatch);
    }
    let (n1, n2) = (nb_pred(mgr, f1), nb_pred(mgr, f2));
    let both = mgr.and(n1, n2);
    let agree = mgr.and_exists(&f1.outputs, f1.pred, f2.pred);
    Ok(mgr.entails(both, agree))
}

/// Shared refinement:
/// `(NB F₁ ∨ NB F₂) ∧ (NB F₁ ⟹ F₁) ∧ (NB F₂ ⟹ F₂)`.
///
/// Refinability is not checked up front; see [`refine_checked`].
pub fn refine(mgr: &mut Manager, f1: &Interface, f2: &Interface) -> Result<Interface> {
    if !f1.same_signature(f2) {
        return Err(InterfaceError::SignatureMismatch);
    }
    let (n1, n2) = (nb_pred(mgr, f1), nb_pred(mgr, f2));
    let accept = mgr.or(n1, n2);
    let c1 = mgr.implies(n1, f1.pred);
    let c2 = mgr.implies(n2, f2.pred);
    let pred = mgr.and(accept, c1);
    let pred = mgr.and(pred, c2);
    Ok(f1.with_pred(pred))
}

/// [`refine`] plus the post-hoc validity check: the merge is valid iff both
/// arguments abstract the result.
pub fn refine_checked(
    mgr: &mut Manager,
    f1: &Interface,
    f2: &Interface,
) -> Result<(Interface, bool)> {
    let r = refine(mgr, f1, f2)?;
    let ok = refines(mgr, f1, &r) && refines(mgr, f2, &r);
    Ok((r, ok))
}

/// [`refine`] with the non-blocking sinks of both arguments supplied by the
/// caller. Returns the merged predicate; equal to `refine` whenever
/// `nb1 = NB F₁` and `nb2 = NB F₂`. Work stays local to where `F₂` is
/// non-trivial, which makes folding many small samples cheap.
pub fn refine_with_nb(
    mgr: &mut Manager,
    f1: Predicate,
    nb1: Predicate,
    f2: Predicate,
    nb2: Predicate,
) -> Predicate {
    // (F₁ ∧ (NB₂ ⟹ F₂)) ∨ (F₂ ∧ ¬NB₁), using F ⟹ NB F
    let guard = mgr.implies(nb2, f2);
    let kept = mgr.and(f1, guard);
    let fresh = mgr.diff(f2, nb1);
    mgr.or(kept, fresh)
}

/// `ohide(w, comp(F₁, F₂))` without materialising the composite.
///
/// Uses that the robustness clause depends only on the composite inputs:
/// the result is `∃w (F₁ ∧ F₂) ∧ ¬∃o₁ (F₁ ∧ ¬NB F₂)`.
pub fn ohide_comp(
    mgr: &mut Manager,
    w: &VarSet,
    f1: &Interface,
    f2: &Interface,
) -> Result<Interface> {
    let (f1, f2) = orient(mgr, f1, f2)?;
    let (inputs, outputs) = comp_signature(f1, f2);
    let stray = w.difference(&outputs);
    if !stray.is_empty() {
        return Err(InterfaceError::NotAnOutput(first_name(mgr, &stray)));
    }
    let nb2 = nb_pred(mgr, f2);
    let blocked = mgr.diff_exists(&f1.outputs, f1.pred, nb2);
    let hidden = mgr.and_exists(w, f1.pred, f2.pred);
    let pred = mgr.diff(hidden, blocked);
    Ok(Interface::from_parts(inputs, outputs.difference(w), pred))
}

fn check_quantizer_io(
    mgr: &Manager,
    q: &Interface,
    side: &VarSet,
    f: &Interface,
    what: &str,
) -> Result<()> {
    if side.is_empty() {
        return Err(InterfaceError::NotConnectable(format!(
            "quantizer has no {what}"
        )));
    }
    let f_vars = f.inputs.union(&f.outputs);
    let other = if what == "outputs" {
        &q.inputs
    } else {
        &q.outputs
    };
    if let Some(v) = other.intersection(&f_vars).iter().next() {
        return Err(InterfaceError::NotConnectable(format!(
            "quantizer variable `{}` clashes with the interface",
            mgr.var_name(v)
        )));
    }
    Ok(())
}

/// Input coarsening `ohide(i, comp(Q(î, i), F))`. The quantizer's outputs
/// must be inputs of `F`; its inputs must be fresh.
pub fn icoarsen(mgr: &mut Manager, f: &Interface, q: &Interface) -> Result<Interface> {
    check_quantizer_io(mgr, q, &q.outputs, f, "outputs")?;
    if !q.outputs.is_subset(&f.inputs) {
        return Err(InterfaceError::NotConnectable(
            "quantizer outputs are not inputs of the interface".into(),
        ));
    }
    let c = comp(mgr, q, f)?;
    ohide(mgr, &q.outputs.clone(), &c)
}

/// Output coarsening `ohide(o, comp(F, Q(o, ô)))`. The quantizer's inputs
/// must be outputs of `F`; its outputs must be fresh.
pub fn ocoarsen(mgr: &mut Manager, f: &Interface, q: &Interface) -> Result<Interface> {
    check_quantizer_io(mgr, q, &q.inputs, f, "inputs")?;
    if !q.inputs.is_subset(&f.outputs) {
        return Err(InterfaceError::NotConnectable(
            "quantizer inputs are not outputs of the interface".into(),
        ));
    }
    let c = comp(mgr, f, q)?;
    ohide(mgr, &q.inputs.clone(), &c)
}

/// Input coarsening expressed on the original variables: drops the
/// precision carried by the input bits in `dropped`, giving
/// `∃d F ∧ ∀d NB(F)`. Equal to [`icoarsen`] with a bit-truncating quantizer
/// after renaming the coarse bits back onto the fine ones.
pub fn truncate_inputs(mgr: &mut Manager, f: &Interface, dropped: &VarSet) -> Result<Interface> {
    let stray = dropped.difference(&f.inputs);
    if !stray.is_empty() {
        return Err(InterfaceError::NotAnInput(first_name(mgr, &stray)));
    }
    let pred = if f.is_sink() {
        mgr.forall(dropped, f.pred)
    } else {
        let n = nb_pred(mgr, f);
        let always = mgr.forall(dropped, n);
        let widened = mgr.exists(dropped, f.pred);
        mgr.and(widened, always)
    };
    Ok(f.with_pred(pred))
}

/// Output coarsening expressed on the original variables: `∃d F` for the
/// output bits `d`, keeping the signature.
pub fn truncate_outputs(mgr: &mut Manager, f: &Interface, dropped: &VarSet) -> Result<Interface> {
    let stray = dropped.difference(&f.outputs);
    if !stray.is_empty() {
        return Err(InterfaceError::NotAnOutput(first_name(mgr, &stray)));
    }
    let pred = mgr.exists(dropped, f.pred);
    Ok(f.with_pred(pred))
}

#[cfg(test)]
mod tests;
