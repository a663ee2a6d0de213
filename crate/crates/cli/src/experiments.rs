//! Experiment drivers. Each returns typed rows plus a CSV rendering; every
//! column except the timing ones is a deterministic function of the
//! configuration and seed.

use std::fmt::Write as _;
use std::time::Instant;

use relsynth::abstraction::{
    self, add_samples, finish, project, random_rects, Accumulator, TraversalPlan,
};
use relsynth::bdd::{Manager, Predicate};
use relsynth::games::{GameSpec, Objective, Solution, StopReason};

use crate::artifacts::cell_bitmap;
use crate::config::RunConfig;
use crate::run::{build_abstraction, build_spec, build_system, group, objective, run_solver};
use crate::CliError;

pub const NAMES: [&str; 3] = ["basin_vs_samples", "decomp_vs_mono", "greedy_cap"];

/// Rendered output of an experiment.
#[derive(Clone, Debug)]
pub struct Report {
    pub csv: String,
    /// `key value` lines for `summary.txt`.
    pub summary: Vec<(String, String)>,
    /// Some solve stopped at the node cap.
    pub capped: bool,
}

fn release(mgr: &mut Manager, sol: &Solution) {
    mgr.unprotect(sol.winning);
    mgr.unprotect(sol.controller);
}

#[derive(Clone, Debug, PartialEq)]
pub struct BasinRow {
    /// `None` for the exhaustive row.
    pub samples: Option<usize>,
    pub basin_states: u128,
    pub winning_nodes: usize,
    pub abstraction_nodes: usize,
    pub abstraction_seconds: f64,
    pub solve_seconds: f64,
    pub stop: StopReason,
}

#[derive(Clone, Debug)]
pub struct BasinVsSamples {
    pub rows: Vec<BasinRow>,
    pub target_states: u128,
    /// Every reach basin contains the target (every safe basin lies inside
    /// the safe set).
    pub contains_target: bool,
}

impl BasinVsSamples {
    pub fn report(&self) -> Report {
        let mut csv = String::from("samples,basin_states,winning_nodes,abstraction_nodes,abstraction_seconds,solve_seconds,stop\n");
        for r in &self.rows {
            let n = r
                .samples
                .map_or("exhaustive".to_string(), |n| n.to_string());
            writeln!(
                csv,
                "{n},{},{},{},{:.6},{:.6},{}",
                r.basin_states,
                r.winning_nodes,
                r.abstraction_nodes,
                r.abstraction_seconds,
                r.solve_seconds,
                r.stop.as_str()
            )
            .unwrap();
        }
        let summary = vec![
            ("target_states".into(), self.target_states.to_string()),
            (
                "basin_contains_target".into(),
                self.contains_target.to_string(),
            ),
        ];
        Report {
            csv,
            summary,
            capped: self.rows.iter().any(|r| r.stop == StopReason::ResourceCap),
        }
    }
}

/// Basin size as the number of random rectangles grows. Sample sets are
/// nested: each count extends the previous one with the next rectangles
/// from the same seeded stream.
pub fn basin_vs_samples(cfg: &RunConfig) -> Result<BasinVsSamples, CliError> {
    let (mut mgr, sys) = build_system(cfg)?;
    let obj = objective(&mut mgr, &sys, cfg)?;
    mgr.protect(obj.set());
    let target_states = sys.layout.state_count(&mgr, obj.set());
    let mut counts = cfg.experiment.counts.clone();
    if counts.windows(2).any(|w| w[0] > w[1]) {
        return Err(CliError::Config(
            "experiment.counts must be nondecreasing".into(),
        ));
    }
    let max = counts.last().copied().unwrap_or(0);
    let rects = random_rects(&sys, max, cfg.sampling_seed());
    let mut accs: Vec<Accumulator> = sys
        .components
        .iter()
        .map(|_| Accumulator::new(&mgr))
        .collect();
    let mut rows = Vec::new();
    let mut contains_target = true;
    let mut done = 0;
    let mut abs_seconds = 0.0;
    let mut solve_row =
        |mgr: &mut Manager, comps: Vec<_>, samples, abs_s| -> Result<BasinRow, CliError> {
            let spec = GameSpec::new(mgr, &sys.layout, comps, cfg.solver.order.clone(), obj)?;
            let nodes = spec
                .components
                .iter()
                .map(|c| mgr.node_count(c.pred()))
                .sum();
            let t = Instant::now();
            let sol = run_solver(mgr, &spec, cfg)?;
            let row = BasinRow {
                samples,
                basin_states: sys.layout.state_count(mgr, sol.winning),
                winning_nodes: mgr.node_count(sol.winning),
                abstraction_nodes: nodes,
                abstraction_seconds: abs_s,
                solve_seconds: t.elapsed().as_secs_f64(),
                stop: sol.stop,
            };
            contains_target &= match obj {
                Objective::Reach(t) => mgr.entails(t, sol.winning),
                Objective::Safe(s) => mgr.entails(sol.winning, s),
            };
            release(mgr, &sol);
            Ok(row)
        };
    for n in counts.drain(..) {
        let t = Instant::now();
        for (k, acc) in accs.iter_mut().enumerate() {
            let c = &sys.components[k];
            let batch: Vec<_> = rects[done..n].iter().map(|r| project(&sys, c, r)).collect();
            add_samples(&mut mgr, &sys, k, acc, &batch)?;
        }
        done = n;
        abs_seconds += t.elapsed().as_secs_f64();
        let comps = (0..accs.len())
            .map(|k| finish(&mgr, &sys, k, &accs[k]))
            .collect::<Result<Vec<_>, _>>()?;
        for a in &accs {
            mgr.protect(a.f);
            mgr.protect(a.nb);
        }
        let row = solve_row(&mut mgr, comps, Some(n), abs_seconds)?;
        for a in &accs {
            mgr.unprotect(a.f);
            mgr.unprotect(a.nb);
        }
        let roots: Vec<Predicate> = accs.iter().flat_map(|a| [a.f, a.nb]).collect();
        mgr.gc(&roots);
        rows.push(row);
    }
    if cfg.experiment.include_exhaustive {
        mgr.gc(&[]);
        let t = Instant::now();
        let comps = abstraction::traverse_all(&mut mgr, &sys, &TraversalPlan::Exhaustive)?;
        let s = t.elapsed().as_secs_f64();
        rows.push(solve_row(&mut mgr, comps, None, s)?);
    }
    Ok(BasinVsSamples {
        rows,
        target_states,
        contains_target,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct VariantRow {
    pub variant: String,
    pub groups: Vec<Vec<String>>,
    pub basin_states: u128,
    pub winning_nodes: usize,
    pub relation_nodes: usize,
    pub iterations: usize,
    /// Median over the repetitions.
    pub preprocess_seconds: f64,
    pub solve_seconds: f64,
    /// Same winning cells as the first (monolithic) variant.
    pub equal_basin: bool,
}

#[derive(Clone, Debug)]
pub struct DecompVsMono {
    pub rows: Vec<VariantRow>,
    pub capped: bool,
}

impl DecompVsMono {
    pub fn report(&self) -> Report {
        let mut csv = String::from(
            "variant,groups,basin_states,winning_nodes,relation_nodes,iterations,preprocess_seconds,solve_seconds,equal_basin\n",
        );
        for r in &self.rows {
            let g: Vec<String> = r.groups.iter().map(|g| g.join("+")).collect();
            writeln!(
                csv,
                "{},{},{},{},{},{},{:.6},{:.6},{}",
                r.variant,
                g.join(" "),
                r.basin_states,
                r.winning_nodes,
                r.relation_nodes,
                r.iterations,
                r.preprocess_seconds,
                r.solve_seconds,
                r.equal_basin
            )
            .unwrap();
        }
        let all = self.rows.iter().all(|r| r.equal_basin);
        Report {
            csv,
            summary: vec![("all_basins_equal".into(), all.to_string())],
            capped: self.capped,
        }
    }
}

/// Groupings compared by `decomp_vs_mono`: everything composed, every
/// pair composed with the rest separate, and fully decomposed.
pub fn variants(names: &[String]) -> Vec<(String, Vec<Vec<String>>)> {
    let mut out = vec![("monolithic".to_string(), vec![names.to_vec()])];
    if names.len() > 2 {
        for i in 0..names.len() {
            for j in i + 1..names.len() {
                let mut g = vec![vec![names[i].clone(), names[j].clone()]];
                g.extend(
                    names
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| *k != i && *k != j)
                        .map(|(_, n)| vec![n.clone()]),
                );
                out.push((format!("partial_{}_{}", names[i], names[j]), g));
            }
        }
    }
    if names.len() > 1 {
        out.push((
            "decomposed".to_string(),
            names.iter().map(|n| vec![n.clone()]).collect(),
        ));
    }
    out
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// Solves the same game under every grouping of the components. Each
/// repetition starts from a fresh manager; abstraction time is excluded.
/// Repetitions are interleaved across variants so that drifting machine
/// load affects all variants alike.
pub fn decomp_vs_mono(cfg: &RunConfig) -> Result<DecompVsMono, CliError> {
    let names: Vec<String> = build_system(cfg)?
        .1
        .components
        .iter()
        .map(|c| c.name.clone())
        .collect();
    let vs = variants(&names);
    let mut pre = vec![Vec::new(); vs.len()];
    let mut solve_t = vec![Vec::new(); vs.len()];
    let mut last = vec![None; vs.len()];
    let mut capped = false;
    for _ in 0..cfg.experiment.repeats {
        for (k, (_, groups)) in vs.iter().enumerate() {
            let (mut mgr, sys) = build_system(cfg)?;
            let comps = build_abstraction(&mut mgr, &sys, cfg)?.components;
            let t = Instant::now();
            let parts = group(&mut mgr, &sys, &comps, Some(groups))?;
            pre[k].push(t.elapsed().as_secs_f64());
            let relation_nodes = parts
                .iter()
                .map(|p| mgr.node_count(p.pred()))
                .sum::<usize>();
            let obj = objective(&mut mgr, &sys, cfg)?;
            let spec = GameSpec::new(&mut mgr, &sys.layout, parts, None, obj)?;
            let t = Instant::now();
            let sol = run_solver(&mut mgr, &spec, cfg)?;
            solve_t[k].push(t.elapsed().as_secs_f64());
            capped |= sol.stop == StopReason::ResourceCap;
            last[k] = Some((
                sys.layout.state_count(&mgr, sol.winning),
                mgr.node_count(sol.winning),
                relation_nodes,
                sol.trace.rows.len(),
                cell_bitmap(&mgr, &sys.layout, sol.winning),
            ));
        }
    }
    let mut rows = Vec::new();
    let mut reference: Option<Vec<bool>> = None;
    for (k, (variant, groups)) in vs.into_iter().enumerate() {
        let (basin_states, winning_nodes, relation_nodes, iterations, cells) =
            last[k].take().expect("at least one repetition");
        let equal_basin = match &reference {
            None => {
                reference = Some(cells);
                true
            }
            Some(r) => *r == cells,
        };
        rows.push(VariantRow {
            variant,
            groups,
            basin_states,
            winning_nodes,
            relation_nodes,
            iterations,
            preprocess_seconds: median(std::mem::take(&mut pre[k])),
            solve_seconds: median(std::mem::take(&mut solve_t[k])),
            equal_basin,
        });
    }
    Ok(DecompVsMono { rows, capped })
}

#[derive(Clone, Debug)]
pub struct GreedyCap {
    pub threshold: usize,
    pub plain: Solution,
    pub greedy: Solution,
    /// Greedy winning region implies the plain one.
    pub subset: bool,
    pub plain_states: u128,
    pub greedy_states: u128,
    /// Largest winning-region size right after a coarsening event.
    pub max_nodes_after_event: Option<usize>,
}

impl GreedyCap {
    pub fn report(&self) -> Report {
        let mut csv = String::from("run,iter,nodes,states,coarsen_events,seconds\n");
        for (name, sol) in [("plain", &self.plain), ("greedy", &self.greedy)] {
            for r in &sol.trace.rows {
                writeln!(
                    csv,
                    "{name},{},{},{},{},{:.6}",
                    r.iter, r.nodes, r.states, r.coarsen_events, r.seconds
                )
                .unwrap();
            }
        }
        let summary = vec![
            ("threshold".into(), self.threshold.to_string()),
            ("plain_basin_states".into(), self.plain_states.to_string()),
            ("greedy_basin_states".into(), self.greedy_states.to_string()),
            ("greedy_subset_of_plain".into(), self.subset.to_string()),
            (
                "max_nodes_after_coarsening".into(),
                self.max_nodes_after_event
                    .map_or("none".into(), |n| n.to_string()),
            ),
            (
                "greedy_precision".into(),
                format!("{:?}", self.greedy.precision),
            ),
        ];
        let capped = [&self.plain, &self.greedy]
            .iter()
            .any(|s| s.stop == StopReason::ResourceCap);
        Report {
            csv,
            summary,
            capped,
        }
    }
}

/// Plain solve against a solve with greedy coarsening of the winning
/// region, on the same abstraction.
pub fn greedy_cap(cfg: &RunConfig) -> Result<GreedyCap, CliError> {
    let threshold = cfg
        .solver
        .coarsen_threshold
        .unwrap_or(cfg.experiment.threshold);
    let (mut mgr, sys) = build_system(cfg)?;
    let comps = build_abstraction(&mut mgr, &sys, cfg)?.components;
    let spec = build_spec(&mut mgr, &sys, &comps, cfg)?;
    let mut plain_cfg = cfg.clone();
    plain_cfg.solver.coarsen_threshold = None;
    let plain = run_solver(&mut mgr, &spec, &plain_cfg)?;
    let mut greedy_cfg = cfg.clone();
    greedy_cfg.solver.coarsen_threshold = Some(threshold);
    let greedy = run_solver(&mut mgr, &spec, &greedy_cfg)?;
    let subset = mgr.entails(greedy.winning, plain.winning);
    let max_nodes_after_event = greedy
        .trace
        .rows
        .iter()
        .filter(|r| r.coarsen_events > 0)
        .map(|r| r.nodes)
        .max();
    Ok(GreedyCap {
        threshold,
        plain_states: sys.layout.state_count(&mgr, plain.winning),
        greedy_states: sys.layout.state_count(&mgr, greedy.winning),
        plain,
        greedy,
        subset,
        max_nodes_after_event,
    })
}

/// Runs an experiment by name.
pub fn run(name: &str, cfg: &RunConfig) -> Result<Report, CliError> {
    match name {
        "basin_vs_samples" => Ok(basin_vs_samples(cfg)?.report()),
        "decomp_vs_mono" => Ok(decomp_vs_mono(cfg)?.report()),
        "greedy_cap" => Ok(greedy_cap(cfg)?.report()),
        other => Err(CliError::UnknownExperiment(other.to_string())),
    }
}
