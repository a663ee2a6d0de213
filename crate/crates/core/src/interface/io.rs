//! Interface files.
//!
//! ```text
//! relsynth-interface 1
//! dim px continuous -2 2 aperiodic 7
//! dim w discrete -1.5,0,1.5
//! meta plan exhaustive
//! inputs: px[0] px[1]
//! outputs: px'[0] px'[1]
//! vars: ...
//! <predicate lines>
//! root <id>
//! ```
//!
//! The dimension table and metadata are informational; loading resolves
//! every variable by name in the target manager.

use std::io::{BufRead, Write};

use super::{Interface, InterfaceError, Result};
use crate::bdd::{read_predicate, write_predicate, Manager, VarSet};
use crate::spaces::{DimKind, Dimension};

const MAGIC: &str = "relsynth-interface 1";

/// Contents of an interface file.
#[derive(Clone, Debug)]
pub struct LoadedInterface {
    pub interface: Interface,
    pub dims: Vec<Dimension>,
    pub meta: Vec<(String, String)>,
}

impl LoadedInterface {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

pub fn save<W: Write>(
    mgr: &Manager,
    f: &Interface,
    dims: &[Dimension],
    meta: &[(String, String)],
    out: &mut W,
) -> Result<()> {
    writeln!(out, "{MAGIC}")?;
    for d in dims {
        match d.kind() {
            DimKind::Continuous { lo, hi, periodic } => {
                let p = if *periodic { "periodic" } else { "aperiodic" };
                writeln!(
                    out,
                    "dim {} continuous {lo} {hi} {p} {}",
                    d.name(),
                    d.bits()
                )?;
            }
            DimKind::Discrete { values } => {
                let vs: Vec<String> = values.iter().map(f64::to_string).collect();
                writeln!(out, "dim {} discrete {}", d.name(), vs.join(","))?;
            }
        }
    }
    for (k, v) in meta {
        writeln!(out, "meta {k} {}", v.replace('\n', " "))?;
    }
    let names = |s: &VarSet| {
        s.iter()
            .map(|v| mgr.var_name(v).to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    writeln!(out, "inputs: {}", names(f.inputs()))?;
    writeln!(out, "outputs: {}", names(f.outputs()))?;
    write_predicate(mgr, f.pred(), out)?;
    Ok(())
}

fn parse_dim(line: usize, fields: &[&str]) -> Result<Dimension> {
    let bad = |msg: &str| InterfaceError::Parse {
        line,
        msg: msg.into(),
    };
    let num = |s: &str| s.parse::<f64>().map_err(|_| bad("bad number"));
    match fields {
        [name, "continuous", lo, hi, per, bits] => {
            let periodic = match *per {
                "periodic" => true,
                "aperiodic" => false,
                _ => return Err(bad("expected periodic/aperiodic")),
            };
            let bits = bits.parse().map_err(|_| bad("bad bit count"))?;
            Dimension::continuous(name, num(lo)?, num(hi)?, periodic, bits)
                .map_err(|e| bad(&e.to_string()))
        }
        [name, "discrete", values] => {
            let vs = values.split(',').map(num).collect::<Result<Vec<_>>>()?;
            Dimension::discrete(name, vs).map_err(|e| bad(&e.to_string()))
        }
        _ => Err(bad("malformed dim line")),
    }
}

pub fn load<R: BufRead>(mgr: &mut Manager, input: &mut R) -> Result<LoadedInterface> {
    let mut dims = Vec::new();
    let mut meta = Vec::new();
    let mut inputs = None;
    let mut line_no = 0;
    let mut buf = String::new();
    let bad = |line: usize, msg: &str| InterfaceError::Parse {
        line,
        msg: msg.into(),
    };
    loop {
        buf.clear();
        if input.read_line(&mut buf)? == 0 {
            return Err(bad(line_no, "unexpected end of file"));
        }
        line_no += 1;
        let line = buf.trim_end_matches(['\n', '\r']);
        if line_no == 1 {
            if line != MAGIC {
                return Err(bad(1, "not an interface file"));
            }
            continue;
        }
        let resolve = |mgr: &Manager, rest: &str| -> Result<VarSet> {
            rest.split_whitespace()
                .map(|n| {
                    mgr.var(n)
                        .ok_or_else(|| crate::bdd::BddError::UnknownVar(n.to_string()).into())
                })
                .collect()
        };
        if let Some(rest) = line.strip_prefix("dim ") {
            let fields: Vec<&str> = rest.split_whitespace().collect();
            dims.push(parse_dim(line_no, &fields)?);
        } else if let Some(rest) = line.strip_prefix("meta ") {
            let (k, v) = rest.split_once(' ').unwrap_or((rest, ""));
            meta.push((k.to_string(), v.to_string()));
        } else if let Some(rest) = line.strip_prefix("inputs:") {
            inputs = Some(resolve(mgr, rest)?);
        } else if let Some(rest) = line.strip_prefix("outputs:") {
            let outputs = resolve(mgr, rest)?;
            let inputs = inputs.ok_or_else(|| bad(line_no, "outputs before inputs"))?;
            let pred = read_predicate(mgr, input)?;
            let interface = Interface::new(mgr, inputs, outputs, pred)?;
            return Ok(LoadedInterface {
                interface,
                dims,
                meta,
            });
        } else {
            return Err(bad(line_no, "unexpected line"));
        }
    }
}
