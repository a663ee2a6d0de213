//! Builds systems, abstractions and games from a [`RunConfig`].

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;
use std::time::Instant;

use relsynth::abstraction::{self, AffineComponent, GridPass, System, TraversalPlan};
use relsynth::bdd::Manager;
use relsynth::games::{
    compose_all, solve, solve_downsampled, GameSpec, Objective, Solution, SolveOptions,
};
use relsynth::interface::{self, Interface};
use relsynth::interval::Interval;
use relsynth::spaces::{Dimension, EncodeMode};

use crate::config::{AbstractionConfig, ModeConfig, ObjectiveKind, RunConfig, SystemConfig};
use crate::CliError;

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

pub fn build_system(cfg: &RunConfig) -> Result<(Manager, System), CliError> {
    let (mgr, mut sys, input_bits) = match &cfg.system {
        SystemConfig::Dubins { bits, input_bits } => {
            let (m, s) = abstraction::dubins(*bits).map_err(config_err)?;
            (m, s, input_bits.clone())
        }
        SystemConfig::Toy1d {
            lo,
            hi,
            bits,
            controls,
        } => {
            let (m, s) =
                abstraction::toy1d(*lo, *hi, *bits, controls.clone()).map_err(config_err)?;
            (m, s, BTreeMap::new())
        }
        SystemConfig::Custom {
            states,
            controls,
            components,
            input_bits,
        } => {
            let states = states
                .iter()
                .map(|s| Dimension::continuous(&s.name, s.lo, s.hi, s.periodic, s.bits))
                .collect::<Result<Vec<_>, _>>()
                .map_err(config_err)?;
            let controls = controls
                .iter()
                .map(|c| Dimension::discrete(&c.name, c.values.clone()))
                .collect::<Result<Vec<_>, _>>()
                .map_err(config_err)?;
            let comps: Vec<AffineComponent> = components
                .iter()
                .map(|c| AffineComponent {
                    name: c.name.clone(),
                    output: c.output.clone(),
                    terms: c.terms.clone(),
                    offset: c.offset,
                })
                .collect();
            let (m, s) = abstraction::affine(states, controls, &comps).map_err(config_err)?;
            (m, s, input_bits.clone())
        }
    };
    for (comp, dims) in &input_bits {
        let c = sys
            .components
            .iter()
            .position(|c| &c.name == comp)
            .ok_or_else(|| CliError::Config(format!("input_bits: unknown component `{comp}`")))?;
        for (dim, &b) in dims {
            let k = (0..sys.components[c].inputs.len())
                .find(|&k| sys.dim(sys.components[c].inputs[k]).name() == dim)
                .ok_or_else(|| {
                    CliError::Config(format!("input_bits: `{comp}` does not read `{dim}`"))
                })?;
            sys.components[c].input_bits[k] = Some(b);
        }
    }
    sys.validate().map_err(config_err)?;
    Ok((mgr, sys))
}

pub fn plan(cfg: &RunConfig) -> TraversalPlan {
    match &cfg.abstraction {
        AbstractionConfig::Exhaustive => TraversalPlan::Exhaustive,
        AbstractionConfig::RandomRects { count, .. } => TraversalPlan::RandomRects {
            count: *count,
            seed: cfg.sampling_seed(),
        },
        AbstractionConfig::ShiftedGrids { passes } => TraversalPlan::ShiftedGrids {
            passes: passes
                .iter()
                .map(|p| GridPass {
                    width: p.width,
                    offset: p.offset,
                })
                .collect(),
        },
    }
}

/// Every dimension of the system, states first.
pub fn all_dimensions(sys: &System) -> Vec<Dimension> {
    sys.all_dims()
        .into_iter()
        .map(|r| sys.dim(r).clone())
        .collect()
}

pub struct BuiltAbstraction {
    pub components: Vec<Interface>,
    pub seconds: f64,
}

pub fn build_abstraction(
    mgr: &mut Manager,
    sys: &System,
    cfg: &RunConfig,
) -> Result<BuiltAbstraction, CliError> {
    let t = Instant::now();
    let components = abstraction::traverse_all(mgr, sys, &plan(cfg))?;
    Ok(BuiltAbstraction {
        components,
        seconds: t.elapsed().as_secs_f64(),
    })
}

pub fn iface_path(dir: &Path, name: &str) -> std::path::PathBuf {
    dir.join(format!("{name}.iface"))
}

fn precision_summary(sys: &System, comp: usize) -> String {
    let c = &sys.components[comp];
    (0..c.inputs.len())
        .map(|k| {
            let (d, vars) = sys.input_view(c, k).expect("validated system");
            format!("{}={}", d.name(), vars.len())
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Writes one interface file per component.
pub fn write_abstraction(
    dir: &Path,
    mgr: &Manager,
    sys: &System,
    cfg: &RunConfig,
    built: &BuiltAbstraction,
) -> Result<(), CliError> {
    let dims = all_dimensions(sys);
    for (k, f) in built.components.iter().enumerate() {
        let c = &sys.components[k];
        let meta = vec![
            ("component".to_string(), c.name.clone()),
            ("plan".to_string(), plan(cfg).describe()),
            ("seed".to_string(), cfg.sampling_seed().to_string()),
            ("input_precision".to_string(), precision_summary(sys, k)),
            ("build_seconds".to_string(), format!("{:.6}", built.seconds)),
            ("tool_version".to_string(), crate::VERSION.to_string()),
        ];
        let mut out = BufWriter::new(File::create(iface_path(dir, &c.name))?);
        interface::save(mgr, f, &dims, &meta, &mut out)?;
    }
    Ok(())
}

/// Reads the component files written by [`write_abstraction`], checking
/// that they were built for the same dimensions and signatures.
pub fn load_abstraction(
    dir: &Path,
    mgr: &mut Manager,
    sys: &System,
) -> Result<Vec<Interface>, CliError> {
    let dims = all_dimensions(sys);
    let mut out = Vec::new();
    for c in &sys.components {
        let path = iface_path(dir, &c.name);
        let file = File::open(&path)
            .map_err(|e| CliError::Mismatch(format!("{}: {e}", path.display())))?;
        let loaded = interface::load(mgr, &mut BufReader::new(file))
            .map_err(|e| CliError::Mismatch(format!("{}: {e}", path.display())))?;
        if loaded.dims != dims {
            return Err(CliError::Mismatch(format!(
                "{}: dimension table differs",
                path.display()
            )));
        }
        let (ins, outs) = sys.signature(c)?;
        if loaded.interface.inputs() != &ins || loaded.interface.outputs() != &outs {
            return Err(CliError::Mismatch(format!(
                "{}: variables differ from `{}`",
                path.display(),
                c.name
            )));
        }
        out.push(loaded.interface);
    }
    Ok(out)
}

pub fn objective(mgr: &mut Manager, sys: &System, cfg: &RunConfig) -> Result<Objective, CliError> {
    let boxes: Vec<(&str, Interval)> = cfg
        .objective
        .bounds
        .iter()
        .map(|(n, [lo, hi])| (n.as_str(), Interval::new(*lo, *hi)))
        .collect();
    let mode = match cfg.objective.mode {
        ModeConfig::Inner => EncodeMode::Inner,
        ModeConfig::Outer => EncodeMode::Outer,
    };
    let set = sys
        .layout
        .state_box(mgr, &boxes, mode, None)
        .map_err(config_err)?;
    Ok(match cfg.objective.kind {
        ObjectiveKind::Reach => Objective::Reach(set),
        ObjectiveKind::Safe => Objective::Safe(set),
    })
}

/// Composes components into the configured groups.
pub fn group(
    mgr: &mut Manager,
    sys: &System,
    components: &[Interface],
    groups: Option<&[Vec<String>]>,
) -> Result<Vec<Interface>, CliError> {
    let Some(groups) = groups else {
        return Ok(components.to_vec());
    };
    let mut used = vec![false; components.len()];
    let mut out = Vec::new();
    for g in groups {
        let mut parts = Vec::new();
        for name in g {
            let k = sys
                .components
                .iter()
                .position(|c| &c.name == name)
                .ok_or_else(|| CliError::Config(format!("groups: unknown component `{name}`")))?;
            if std::mem::replace(&mut used[k], true) {
                return Err(CliError::Config(format!("groups: `{name}` listed twice")));
            }
            parts.push(components[k].clone());
        }
        if parts.is_empty() {
            return Err(CliError::Config("groups: empty group".into()));
        }
        out.push(compose_all(mgr, &parts)?);
    }
    if used.iter().any(|u| !u) {
        return Err(CliError::Config(
            "groups must mention every component".into(),
        ));
    }
    Ok(out)
}

pub fn build_spec(
    mgr: &mut Manager,
    sys: &System,
    components: &[Interface],
    cfg: &RunConfig,
) -> Result<GameSpec, CliError> {
    let parts = group(mgr, sys, components, cfg.solver.groups.as_deref())?;
    let obj = objective(mgr, sys, cfg)?;
    GameSpec::new(mgr, &sys.layout, parts, cfg.solver.order.clone(), obj).map_err(config_err)
}

pub fn solve_options(cfg: &RunConfig) -> SolveOptions {
    SolveOptions {
        max_iters: cfg.solver.max_iters,
        coarsen_threshold: cfg.solver.coarsen_threshold,
        node_cap: cfg.solver.node_cap,
        ..SolveOptions::default()
    }
}

pub fn run_solver(
    mgr: &mut Manager,
    spec: &GameSpec,
    cfg: &RunConfig,
) -> Result<Solution, CliError> {
    let opts = solve_options(cfg);
    let sol = match &cfg.solver.downsample {
        Some(levels) => solve_downsampled(mgr, spec, levels, &opts).map_err(|e| match e {
            relsynth::games::GameError::BadSchedule => CliError::Config(e.to_string()),
            e => e.into(),
        })?,
        None => solve(mgr, spec, &opts)?,
    };
    Ok(sol)
}
