use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{AlignmentSet, Direction};
use crate::error::{Error, Result};

/// Parses one line of whitespace-separated `i-j` pairs.
pub fn read_pharaoh(line: &str, direction: Direction, src_len: usize, tgt_len: usize) -> Result<AlignmentSet> {
    let mut set = AlignmentSet::new(direction);
    for (position, tok) in line.split_whitespace().enumerate() {
        let format_err = |reason: &str| Error::AlignmentFormat {
            position,
            reason: format!("{reason}: {tok:?}"),
        };
        let (a, b) = tok.split_once('-').ok_or_else(|| format_err("expected i-j"))?;
        let i: usize = a.parse().map_err(|_| format_err("bad source index"))?;
        let j: usize = b.parse().map_err(|_| format_err("bad target index"))?;
        if i >= src_len || j >= tgt_len {
            return Err(Error::AlignmentRange {
                position,
                link: tok.to_string(),
                src_len,
                tgt_len,
            });
        }
        set.links.insert((i, j));
    }
    Ok(set)
}

pub fn format_pharaoh(set: &AlignmentSet) -> String {
    set.links
        .iter()
        .map(|(i, j)| format!("{i}-{j}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Reads one alignment line per sentence pair; `lengths` gives the
/// `(source, target)` lengths in corpus order.
pub fn read_pharaoh_file(
    path: impl AsRef<Path>,
    direction: Direction,
    lengths: &[(usize, usize)],
) -> Result<Vec<AlignmentSet>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::with_capacity(lengths.len());
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let Some(&(src_len, tgt_len)) = lengths.get(n) else {
            if line.trim().is_empty() {
                continue;
            }
            return Err(Error::config(format!(
                "alignment file has more lines than the corpus ({} sentence pairs)",
                lengths.len()
            )));
        };
        let set = read_pharaoh(&line, direction, src_len, tgt_len).map_err(|e| Error::InvalidRecord {
            line: n + 1,
            id: format!("alignment {direction}"),
            reason: e.to_string(),
        })?;
        out.push(set);
    }
    if out.len() != lengths.len() {
        return Err(Error::config(format!(
            "alignment file has {} lines but the corpus has {} sentence pairs",
            out.len(),
            lengths.len()
        )));
    }
    Ok(out)
}

pub fn write_pharaoh_file<'a>(sets: impl IntoIterator<Item = &'a AlignmentSet>, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for set in sets {
        writeln!(out, "{}", format_pharaoh(set))?;
    }
    out.flush()?;
    Ok(())
}
