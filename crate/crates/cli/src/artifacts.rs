//! Files written next to every run: resolved configuration, trace CSV,
//! run-length cell dumps and PGM slices.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use relsynth::bdd::{Manager, Predicate};
use relsynth::spaces::Layout;

use crate::config::RunConfig;
use crate::CliError;

/// Creates `dir` and writes the resolved configuration and tool version.
pub fn prepare_dir(dir: &Path, cfg: &RunConfig, command: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    let text = format!(
        "# relsynth {} ({command})\n{}",
        crate::VERSION,
        cfg.to_toml()
    );
    fs::write(dir.join("config.resolved.toml"), text)?;
    fs::write(
        dir.join("version.txt"),
        format!("relsynth {}\n", crate::VERSION),
    )?;
    Ok(())
}

/// Membership bitmap over all state cells, row-major with the first
/// state dimension most significant.
pub fn cell_bitmap(mgr: &Manager, layout: &Layout, p: Predicate) -> Vec<bool> {
    let counts: Vec<u64> = layout.states.iter().map(|s| s.dim.cell_count()).collect();
    let total: u64 = counts.iter().product();
    let mut bits = vec![false; total as usize];
    layout.for_each_state_cell(mgr, p, |idx| {
        let lin = idx
            .iter()
            .zip(&counts)
            .fold(0u64, |acc, (i, n)| acc * n + i);
        bits[lin as usize] = true;
    });
    bits
}

/// Run-length dump of the cells in `p`: a header naming the dimensions
/// and their cell counts, then one `start length` line per run of
/// consecutive linear indices.
pub fn run_length_dump(mgr: &Manager, layout: &Layout, p: Predicate) -> String {
    let bits = cell_bitmap(mgr, layout, p);
    let mut s = String::from("# cells, row-major, first dimension most significant\n# dims");
    for st in &layout.states {
        write!(s, " {}:{}", st.dim.name(), st.dim.cell_count()).unwrap();
    }
    s.push('\n');
    let mut k = 0;
    while k < bits.len() {
        if bits[k] {
            let start = k;
            while k < bits.len() && bits[k] {
                k += 1;
            }
            writeln!(s, "{start} {}", k - start).unwrap();
        } else {
            k += 1;
        }
    }
    s
}

/// Plain (ASCII) PGM images of the first two state dimensions, one per
/// cell of the remaining dimensions. Winning cells are white; the second
/// dimension grows upwards. A single state dimension gives one 1-row
/// image. Returns `(file stem, contents)` pairs.
pub fn pgm_slices(mgr: &Manager, layout: &Layout, p: Predicate) -> Vec<(String, String)> {
    let bits = cell_bitmap(mgr, layout, p);
    let counts: Vec<usize> = layout
        .states
        .iter()
        .map(|s| s.dim.cell_count() as usize)
        .collect();
    let w = counts[0];
    let h = counts.get(1).copied().unwrap_or(1);
    let rest: Vec<usize> = counts.iter().skip(2).copied().collect();
    let slices: usize = rest.iter().product();
    let mut out = Vec::with_capacity(slices);
    for sl in 0..slices {
        let mut idx = Vec::with_capacity(rest.len());
        let mut r = sl;
        for n in rest.iter().rev() {
            idx.push(r % n);
            r /= n;
        }
        idx.reverse();
        let mut img = format!("P2\n{w} {h}\n255\n");
        for row in (0..h).rev() {
            let line: Vec<&str> = (0..w)
                .map(|col| {
                    let lin = (col * h + row) * slices + sl;
                    if bits[lin] {
                        "255"
                    } else {
                        "0"
                    }
                })
                .collect();
            img.push_str(&line.join(" "));
            img.push('\n');
        }
        let stem = if idx.is_empty() {
            "slice".to_string()
        } else {
            let parts: Vec<String> = layout.states[2..]
                .iter()
                .zip(&idx)
                .map(|(s, i)| format!("{}_{i:03}", s.dim.name()))
                .collect();
            format!("slice_{}", parts.join("_"))
        };
        out.push((stem, img));
    }
    out
}

pub fn write_slices(
    dir: &Path,
    mgr: &Manager,
    layout: &Layout,
    p: Predicate,
) -> Result<usize, CliError> {
    let slices = pgm_slices(mgr, layout, p);
    let sub = dir.join("slices");
    fs::create_dir_all(&sub)?;
    for (stem, img) in &slices {
        fs::write(sub.join(format!("{stem}.pgm")), img)?;
    }
    Ok(slices.len())
}
