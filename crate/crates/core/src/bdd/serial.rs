//! Line-oriented text form of a predicate.
//!
//! ```text
//! vars: a b c
//! 2 c 0 1
//! 3 a 0 2
//! root 3
//! ```
//!
//! The header lists every manager variable in order. Each node line is
//! `id var lo hi` where `0` and `1` are the constants and children always
//! precede their parents (ids follow a depth-first post-order starting at
//! 2). The final line names the root, which may be a constant.

use std::io::{BufRead, Write};

use rustc_hash::FxHashMap;

use super::{BddError, Manager, Predicate};

pub fn write_predicate<W: Write>(mgr: &Manager, p: Predicate, out: &mut W) -> std::io::Result<()> {
    write!(out, "vars:")?;
    for v in mgr.vars() {
        write!(out, " {}", mgr.var_name(v))?;
    }
    writeln!(out)?;
    let mut ids: FxHashMap<u32, u64> = FxHashMap::default();
    let mut next = 2u64;
    // iterative post-order
    let mut stack = vec![(p, false)];
    while let Some((q, expanded)) = stack.pop() {
        let (var, lo, hi) = mgr.raw_node(q);
        let Some(var) = var else { continue };
        let key = mgr.node_id(q);
        if ids.contains_key(&key) {
            continue;
        }
        if expanded {
            let id_of = |x: Predicate| -> u64 {
                match mgr.raw_node(x).0 {
                    None => mgr.is_true(x) as u64,
                    Some(_) => ids[&mgr.node_id(x)],
                }
            };
            let (l, h) = (id_of(lo), id_of(hi));
            writeln!(out, "{} {} {} {}", next, mgr.var_name(var), l, h)?;
            ids.insert(key, next);
            next += 1;
        } else {
            stack.push((q, true));
            stack.push((hi, false));
            stack.push((lo, false));
        }
    }
    let root = match mgr.raw_node(p).0 {
        None => mgr.is_true(p) as u64,
        Some(_) => ids[&mgr.node_id(p)],
    };
    writeln!(out, "root {root}")
}

/// Reads a predicate written by [`write_predicate`]. Variables are matched
/// by name, so the target manager may have a different (superset) order.
pub fn read_predicate<R: BufRead>(mgr: &mut Manager, input: &mut R) -> Result<Predicate, BddError> {
    let mut table: FxHashMap<u64, Predicate> = FxHashMap::default();
    table.insert(0, mgr.bot());
    table.insert(1, mgr.top());
    let mut saw_header = false;
    let mut line_no = 0usize;
    let mut buf = String::new();
    let err = |line: usize, msg: &str| BddError::Parse {
        line,
        msg: msg.to_string(),
    };
    loop {
        buf.clear();
        let n = input
            .read_line(&mut buf)
            .map_err(|e| err(line_no + 1, &e.to_string()))?;
        if n == 0 {
            return Err(err(line_no, "unexpected end of input (no root line)"));
        }
        line_no += 1;
        let line = buf.trim();
        if line.is_empty() {
            continue;
        }
        if !saw_header {
            let Some(rest) = line.strip_prefix("vars:") else {
                return Err(err(line_no, "expected `vars:` header"));
            };
            for name in rest.split_whitespace() {
                if mgr.var(name).is_none() {
                    return Err(BddError::UnknownVar(name.to_string()));
                }
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() == 2 && fields[0] == "root" {
            let id: u64 = fields[1].parse().map_err(|_| err(line_no, "bad root id"))?;
            return table
                .get(&id)
                .copied()
                .ok_or_else(|| err(line_no, "root id not defined"));
        }
        if fields.len() != 4 {
            return Err(err(line_no, "expected `id var lo hi`"));
        }
        let parse = |s: &str| s.parse::<u64>().map_err(|_| err(line_no, "bad node id"));
        let id = parse(fields[0])?;
        let var = mgr
            .var(fields[1])
            .ok_or_else(|| BddError::UnknownVar(fields[1].to_string()))?;
        let lo = *table
            .get(&parse(fields[2])?)
            .ok_or_else(|| err(line_no, "child defined after parent"))?;
        let hi = *table
            .get(&parse(fields[3])?)
            .ok_or_else(|| err(line_no, "child defined after parent"))?;
        if id < 2 || table.contains_key(&id) {
            return Err(err(line_no, "duplicate or reserved node id"));
        }
        let node = mgr.make_node(var, lo, hi);
        table.insert(id, node);
    }
}
