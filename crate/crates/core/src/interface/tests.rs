use proptest::prelude::*;

use super::*;
use crate::bdd::BoolVar;
use crate::laws;

fn setup(names: &[&str]) -> (Manager, Vec<BoolVar>) {
    let mgr = Manager::new(names).unwrap();
    let vars = mgr.vars().collect();
    (mgr, vars)
}

fn set(v: &[BoolVar]) -> VarSet {
    v.iter().collect()
}

#[test]
fn construction_checks_signature() {
    let (mut mgr, v) = setup(&["a", "b", "c"]);
    let p = mgr.ithvar(v[2]);
    assert!(matches!(
        Interface::new(&mgr, set(&v[..1]), set(&v[1..2]), p),
        Err(InterfaceError::SupportOutsideSignature(n)) if n == "c"
    ));
    assert!(matches!(
        Interface::new(&mgr, set(&v[..2]), set(&v[1..]), p),
        Err(InterfaceError::OverlappingSignature(_))
    ));
}

#[test]
fn ohide_examples() {
    let (mut mgr, v) = setup(&["i", "o1", "o2"]);
    let (i, o1, o2) = (mgr.ithvar(v[0]), mgr.ithvar(v[1]), mgr.ithvar(v[2]));
    let eq = mgr.iff(o1, i);
    let f = Interface::new(&mgr, set(&v[..1]), set(&v[1..2]), eq).unwrap();
    let h = ohide(&mut mgr, &set(&v[1..2]), &f).unwrap();
    assert!(h.is_sink());
    assert_eq!(h.pred(), mgr.top());
    assert_eq!(ohide(&mut mgr, &VarSet::new(), &f).unwrap(), f);

    let ni = mgr.not(i);
    let e2 = mgr.iff(o2, ni);
    let both = mgr.and(eq, e2);
    let g = Interface::new(&mgr, set(&v[..1]), set(&v[1..]), both).unwrap();
    let h = ohide(&mut mgr, &set(&v[1..2]), &g).unwrap();
    assert_eq!(h.pred(), e2);
    assert_eq!(h.outputs(), &set(&v[2..]));
    assert!(matches!(
        ohide(&mut mgr, &set(&v[..1]), &g),
        Err(InterfaceError::NotAnOutput(_))
    ));
}

#[test]
fn nb_examples() {
    let (mut mgr, v) = setup(&["i", "o"]);
    let (i, o) = (mgr.ithvar(v[0]), mgr.ithvar(v[1]));
    let io = mgr.and(i, o);
    let f = Interface::new(&mgr, set(&v[..1]), set(&v[1..]), io).unwrap();
    let n = nb(&mut mgr, &f);
    assert!(n.is_sink());
    assert_eq!(n.pred(), i);
    let empty = Interface::source(&mgr, set(&v[1..]), mgr.bot()).unwrap();
    assert_eq!(nb(&mut mgr, &empty).pred(), mgr.bot());
    let some = Interface::source(&mgr, set(&v[1..]), o).unwrap();
    assert_eq!(nb(&mut mgr, &some).pred(), mgr.top());
    let sink = Interface::sink(&mgr, set(&v[..1]), i).unwrap();
    assert_eq!(nb(&mut mgr, &sink), sink);
}

#[test]
fn comp_examples() {
    let (mut mgr, v) = setup(&["a", "o1", "b", "o2"]);
    let lits: Vec<_> = v.iter().map(|&x| mgr.ithvar(x)).collect();
    let e1 = mgr.iff(lits[0], lits[1]);
    let e2 = mgr.iff(lits[2], lits[3]);
    let f1 = Interface::new(&mgr, set(&v[0..1]), set(&v[1..2]), e1).unwrap();
    let f2 = Interface::new(&mgr, set(&v[2..3]), set(&v[3..4]), e2).unwrap();
    let c = comp(&mut mgr, &f1, &f2).unwrap();
    assert_eq!(c.pred(), mgr.and(e1, e2));
    assert_eq!(c.inputs(), &set(&[v[0], v[2]]));
}

#[test]
fn comp_adversarial_blocking() {
    let (mut mgr, v) = setup(&["i", "o"]);
    let o = mgr.ithvar(v[1]);
    let f1 = Interface::new(&mgr, set(&v[..1]), set(&v[1..]), mgr.top()).unwrap();
    let no = mgr.not(o);
    let f2 = Interface::sink(&mgr, set(&v[1..]), no).unwrap();
    let c = comp(&mut mgr, &f1, &f2).unwrap();
    assert_eq!(c.pred(), mgr.bot());
    assert_eq!(c.inputs(), &set(&v[..1]));
    assert_eq!(c.outputs(), &set(&v[1..]));
}

#[test]
fn comp_series_total_functions() {
    let (mut mgr, v) = setup(&["i", "o", "t"]);
    let (i, o, t) = (mgr.ithvar(v[0]), mgr.ithvar(v[1]), mgr.ithvar(v[2]));
    let e1 = mgr.iff(o, i);
    let no = mgr.not(o);
    let e2 = mgr.iff(t, no);
    let f1 = Interface::new(&mgr, set(&v[..1]), set(&v[1..2]), e1).unwrap();
    let f2 = Interface::new(&mgr, set(&v[1..2]), set(&v[2..]), e2).unwrap();
    // argument order does not matter
    let c = comp(&mut mgr, &f2, &f1).unwrap();
    assert_eq!(c.pred(), mgr.and(e1, e2));
    assert_eq!(c.inputs(), &set(&v[..1]));
    assert_eq!(c.outputs(), &set(&v[1..]));
}

#[test]
fn comp_errors() {
    let (mut mgr, v) = setup(&["a", "b", "c"]);
    let f = Interface::new(&mgr, set(&v[..1]), set(&v[1..2]), mgr.top()).unwrap();
    let g = Interface::new(&mgr, set(&v[1..2]), set(&v[..1]), mgr.top()).unwrap();
    assert!(matches!(
        comp(&mut mgr, &f, &g),
        Err(InterfaceError::Cyclic)
    ));
    let h = Interface::new(&mgr, set(&v[2..]), set(&v[1..2]), mgr.top()).unwrap();
    assert!(matches!(comp(&mut mgr, &f, &h), Err(InterfaceError::SharedOutputs(n)) if n == "b"));
}

#[test]
fn ihide_examples() {
    let (mut mgr, v) = setup(&["a", "b"]);
    let (a, b) = (mgr.ithvar(v[0]), mgr.ithvar(v[1]));
    let ab = mgr.and(a, b);
    let s = Interface::sink(&mgr, set(&v), ab).unwrap();
    assert_eq!(ihide(&mut mgr, &set(&v[1..]), &s).unwrap().pred(), a);
    let bot = Interface::sink(&mgr, set(&v), mgr.bot()).unwrap();
    assert_eq!(ihide(&mut mgr, &set(&v), &bot).unwrap().pred(), mgr.bot());
    let f = Interface::new(&mgr, set(&v[..1]), set(&v[1..]), ab).unwrap();
    assert!(matches!(
        ihide(&mut mgr, &set(&v[..1]), &f),
        Err(InterfaceError::NotASink)
    ));
}

#[test]
fn refinement_examples() {
    let (mut mgr, v) = setup(&["i", "o"]);
    let (i, o) = (mgr.ithvar(v[0]), mgr.ithvar(v[1]));
    let io = mgr.iff(i, o);
    let b = Interface::new(&mgr, set(&v[..1]), set(&v[1..]), io).unwrap();
    let bot = b.with_pred(mgr.bot());
    assert!(refines(&mut mgr, &bot, &b));
    // sinks: subset order
    let s_i = Interface::sink(&mgr, set(&v[..1]), i).unwrap();
    let s_top = s_i.with_pred(mgr.top());
    assert!(refines(&mut mgr, &s_i, &s_top));
    assert!(!refines(&mut mgr, &s_top, &s_i));
    // ⊤ against an interface that blocks some inputs
    let blocking = mgr.and(i, o);
    let d = b.with_pred(blocking);
    let top = b.with_pred(mgr.top());
    assert!(!refines(&mut mgr, &top, &d));
    assert!(!refines(&mut mgr, &d, &top));
    let other = Interface::sink(&mgr, set(&v[1..]), o).unwrap();
    assert_eq!(
        is_refinement(&mut mgr, &other, &s_i),
        Refinement::SignatureMismatch
    );
}

#[test]
fn shared_refinability_examples() {
    let (mut mgr, v) = setup(&["i", "o"]);
    let (i, o) = (mgr.ithvar(v[0]), mgr.ithvar(v[1]));
    let ni = mgr.not(i);
    let e1 = mgr.iff(o, i);
    let e2 = mgr.iff(o, ni);
    let f1 = Interface::new(&mgr, set(&v[..1]), set(&v[1..]), e1).unwrap();
    let f2 = f1.with_pred(e2);
    assert!(!is_shared_refinable(&mut mgr, &f1, &f2).unwrap());
    assert!(is_shared_refinable(&mut mgr, &f1, &f1).unwrap());
    let a = mgr.and(i, o);
    let b = mgr.and(ni, o);
    assert!(is_shared_refinable(&mut mgr, &f1.with_pred(a), &f1.with_pred(b)).unwrap());
    let (r, ok) = refine_checked(&mut mgr, &f1, &f2).unwrap();
    assert!(!ok);
    assert_eq!(r.pred(), mgr.bot());
}

#[test]
fn refine_reduces_for_sinks_and_sources() {
    let (mut mgr, v) = setup(&["a", "b"]);
    let (a, b) = (mgr.ithvar(v[0]), mgr.ithvar(v[1]));
    let s1 = Interface::sink(&mgr, set(&v), a).unwrap();
    let s2 = s1.with_pred(b);
    assert_eq!(refine(&mut mgr, &s1, &s2).unwrap().pred(), mgr.or(a, b));
    let r1 = Interface::source(&mgr, set(&v), a).unwrap();
    let r2 = r1.with_pred(b);
    assert_eq!(refine(&mut mgr, &r1, &r2).unwrap().pred(), mgr.and(a, b));
    let other = Interface::sink(&mgr, set(&v[..1]), a).unwrap();
    assert!(matches!(
        refine(&mut mgr, &s1, &other),
        Err(InterfaceError::SignatureMismatch)
    ));
}

#[test]
fn input_coarsening_keeps_fully_covered_cells() {
    use crate::spaces::{quantizer, QuantizerDirection};
    let (mut mgr, v) = setup(&["c0", "c1", "x0", "x1"]);
    let (c, x) = (&v[..2], &v[2..]);
    // cells 00, 01, 10
    let x0 = mgr.ithvar(x[0]);
    let x1 = mgr.ithvar(x[1]);
    let both = mgr.and(x0, x1);
    let z = mgr.not(both);
    let zs = Interface::sink(&mgr, set(x), z).unwrap();
    let q = quantizer(&mut mgr, x, c, 1, QuantizerDirection::CoarseToFine).unwrap();
    let r = icoarsen(&mut mgr, &zs, &q).unwrap();
    assert_eq!(r.inputs(), &set(c));
    let c0 = mgr.ithvar(c[0]);
    assert_eq!(r.pred(), mgr.not(c0));
    // full precision: same as the original on renamed variables
    let qf = quantizer(&mut mgr, x, c, 2, QuantizerDirection::CoarseToFine).unwrap();
    let r = icoarsen(&mut mgr, &zs, &qf).unwrap();
    let renamed = mgr.rename(z, &[(x[0], c[0]), (x[1], c[1])]).unwrap();
    assert_eq!(r.pred(), renamed);
    let bot = zs.with_pred(mgr.bot());
    assert_eq!(icoarsen(&mut mgr, &bot, &q).unwrap().pred(), mgr.bot());
    let t = truncate_inputs(&mut mgr, &zs, &set(&x[1..])).unwrap();
    assert_eq!(t.pred(), mgr.not(x0));
}

#[test]
fn output_coarsening_maps_to_containing_cell() {
    use crate::spaces::{quantizer, QuantizerDirection};
    let (mut mgr, v) = setup(&["i0", "i1", "o0", "o1", "c0"]);
    let (i, o, c) = (&v[0..2], &v[2..4], &v[4..5]);
    // o = i (2-bit identity)
    let mut id = mgr.top();
    for k in 0..2 {
        let (a, b) = (mgr.ithvar(i[k]), mgr.ithvar(o[k]));
        let e = mgr.iff(a, b);
        id = mgr.and(id, e);
    }
    let f = Interface::new(&mgr, set(i), set(o), id).unwrap();
    let q = quantizer(&mut mgr, &o[..1], c, 1, QuantizerDirection::FineToCoarse).unwrap();
    // only the msb output gets quantized; keep o1 as is
    let r = ocoarsen(&mut mgr, &f, &q).unwrap();
    let renamed = mgr.rename(id, &[(o[0], c[0])]).unwrap();
    assert_eq!(r.pred(), renamed);
    // dropping the lsb output bit: each input maps to its containing coarse cell
    let g = ohide(&mut mgr, &set(&o[1..]), &f).unwrap();
    let t = truncate_outputs(&mut mgr, &f, &set(&o[1..])).unwrap();
    assert_eq!(t.pred(), g.pred());
    let (i0, o0) = (mgr.ithvar(i[0]), mgr.ithvar(o[0]));
    assert_eq!(t.pred(), mgr.iff(i0, o0));
    let bot = f.with_pred(mgr.bot());
    assert_eq!(ocoarsen(&mut mgr, &bot, &q).unwrap().pred(), mgr.bot());
}

#[test]
fn coarsening_rejects_unconnected_quantizers() {
    use crate::spaces::{quantizer, QuantizerDirection};
    let (mut mgr, v) = setup(&["a", "b", "c"]);
    let f = Interface::sink(&mgr, set(&v[..1]), mgr.top()).unwrap();
    let q = quantizer(
        &mut mgr,
        &v[1..2],
        &v[2..3],
        1,
        QuantizerDirection::CoarseToFine,
    )
    .unwrap();
    assert!(matches!(
        icoarsen(&mut mgr, &f, &q),
        Err(InterfaceError::NotConnectable(_))
    ));
    assert!(matches!(
        ocoarsen(&mut mgr, &f, &q),
        Err(InterfaceError::NotConnectable(_))
    ));
}

#[test]
fn save_load_roundtrip() {
    use crate::spaces::Dimension;
    let mut g = laws::Generator::new(7);
    let (mut mgr, v) = laws::pool(6);
    let f = g.interface(&mut mgr, &v[..3], &v[3..]);
    let dims = vec![
        Dimension::continuous("px", -2.0, 2.0, false, 7).unwrap(),
        Dimension::continuous("th", -std::f64::consts::PI, std::f64::consts::PI, true, 3).unwrap(),
        Dimension::discrete("w", vec![-1.5, 0.0, 1.5]).unwrap(),
    ];
    let meta = vec![("plan".to_string(), "random rects 500".to_string())];
    let mut buf = Vec::new();
    save(&mgr, &f, &dims, &meta, &mut buf).unwrap();
    let loaded = load(&mut mgr, &mut buf.as_slice()).unwrap();
    assert_eq!(loaded.interface, f);
    assert_eq!(loaded.dims, dims);
    assert_eq!(loaded.meta("plan"), Some("random rects 500"));

    let text = String::from_utf8(buf.clone()).unwrap();
    let cut = &text[..text.len() - 8];
    assert!(load(&mut mgr, &mut cut.as_bytes()).is_err());
    assert!(load(&mut mgr, &mut "garbage\n".as_bytes()).is_err());

    let bot = f.with_pred(mgr.bot());
    let mut buf = Vec::new();
    save(&mgr, &bot, &[], &[], &mut buf).unwrap();
    assert_eq!(load(&mut mgr, &mut buf.as_slice()).unwrap().interface, bot);

    // loading into a manager without the variables fails
    let (mut small, _) = laws::pool(2);
    let mut buf = Vec::new();
    save(&mgr, &f, &[], &[], &mut buf).unwrap();
    assert!(load(&mut small, &mut buf.as_slice()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn law_parallel_comp(seed in any::<u64>()) {
        prop_assert_eq!(laws::run_law(laws::parallel_comp, seed, 1), Ok(()));
    }

    #[test]
    fn law_series_associativity(seed in any::<u64>()) {
        prop_assert_eq!(laws::run_law(laws::series_associativity, seed, 1), Ok(()));
    }

    #[test]
    fn law_signatures(seed in any::<u64>()) {
        prop_assert_eq!(laws::run_law(laws::signatures, seed, 1), Ok(()));
    }

    #[test]
    fn law_partial_order(seed in any::<u64>()) {
        prop_assert_eq!(laws::run_law(laws::partial_order, seed, 1), Ok(()));
    }

    #[test]
    fn law_comp_monotone(seed in any::<u64>()) {
        prop_assert_eq!(laws::run_law(laws::comp_monotone, seed, 1), Ok(()));
    }

    #[test]
    fn law_ohide_monotone(seed in any::<u64>()) {
        prop_assert_eq!(laws::run_law(laws::ohide_monotone, seed, 1), Ok(()));
    }

    #[test]
    fn law_ihide_monotone(seed in any::<u64>()) {
        prop_assert_eq!(laws::run_law(laws::ihide_monotone, seed, 1), Ok(()));
    }

    #[test]
    fn law_refine_lub(seed in any::<u64>()) {
        prop_assert_eq!(laws::run_law(laws::refine_lub, seed, 1), Ok(()));
    }

    #[test]
    fn law_shared_to_disjoint(seed in any::<u64>()) {
        prop_assert_eq!(laws::run_law(laws::shared_to_disjoint, seed, 1), Ok(()));
    }

    #[test]
    fn law_coarsening(seed in any::<u64>()) {
        prop_assert_eq!(laws::run_law(laws::coarsening, seed, 1), Ok(()));
    }

    #[test]
    fn law_fused_forms(seed in any::<u64>()) {
        prop_assert_eq!(laws::run_law(laws::fused_forms, seed, 1), Ok(()));
    }

    #[test]
    fn abstraction_generator_is_sound(seed in any::<u64>()) {
        let (mut mgr, v) = laws::pool(6);
        let mut g = laws::Generator::new(seed);
        let b = g.interface(&mut mgr, &v[..3], &v[3..]);
        let a = g.abstraction_of(&mut mgr, &b);
        prop_assert!(refines(&mut mgr, &a, &b));
    }
}
