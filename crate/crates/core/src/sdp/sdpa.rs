//! SDPA sparse format (`.dat-s`).
//!
//! The file describes `minimize cᵀx s.t. Σ F_i x_i − F_0 ⪰ 0`. A
//! [`BlockProblem`] is written with the objective negated. Equality rows
//! `aᵀy = b` become a trailing diagonal block with the pair of rows
//! `aᵀy − b ≥ 0` and `−aᵀy + b ≥ 0`; on import a diagonal block whose rows
//! come in such negated pairs is read back as equalities.

use std::fmt::Write as _;

use super::{BlockProblem, EqualityRow, LmiBlock, SymEntry};
use crate::error::{Error, Result};

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `p` in SDPA sparse format. Output is deterministic.
pub fn export_sdpa(p: &BlockProblem) -> String {
    let mut s = String::new();
    s.push_str("\"maximization problem exported with negated objective\n");
    if !p.equalities.is_empty() {
        writeln!(
            s,
            "* equalities: last block is diagonal with rows 2k-1, 2k holding a_k.y - b_k >= 0 and -(a_k.y - b_k) >= 0 for k = 1..{}",
            p.equalities.len()
        )
        .unwrap();
    }
    let nblocks = p.blocks.len() + usize::from(!p.equalities.is_empty());
    writeln!(s, "{}", p.num_vars).unwrap();
    writeln!(s, "{nblocks}").unwrap();
    let mut sizes: Vec<String> = p.blocks.iter().map(|b| b.size.to_string()).collect();
    if !p.equalities.is_empty() {
        sizes.push(format!("-{}", 2 * p.equalities.len()));
    }
    writeln!(s, "{}", sizes.join(" ")).unwrap();
    writeln!(
        s,
        "{}",
        p.objective
            .iter()
            .map(|c| num(-c))
            .collect::<Vec<_>>()
            .join(" ")
    )
    .unwrap();

    // Per-variable entry lists, variable 0 standing for F_0.
    let mut by_var: Vec<Vec<(usize, usize, usize, f64)>> = vec![Vec::new(); p.num_vars + 1];
    for (k, b) in p.blocks.iter().enumerate() {
        for e in &b.constant {
            by_var[0].push((k + 1, e.row + 1, e.col + 1, e.value));
        }
        for (v, f) in &b.terms {
            for e in f {
                by_var[v + 1].push((k + 1, e.row + 1, e.col + 1, e.value));
            }
        }
    }
    if !p.equalities.is_empty() {
        let eq_block = p.blocks.len() + 1;
        for (k, r) in p.equalities.iter().enumerate() {
            let (i, j) = (2 * k + 1, 2 * k + 2);
            if r.rhs != 0.0 {
                by_var[0].push((eq_block, i, i, r.rhs));
                by_var[0].push((eq_block, j, j, -r.rhs));
            }
            for &(v, a) in &r.entries {
                by_var[v + 1].push((eq_block, i, i, a));
                by_var[v + 1].push((eq_block, j, j, -a));
            }
        }
    }
    for (v, entries) in by_var.iter_mut().enumerate() {
        // Stable: keeps the stored order within a block.
        entries.sort_by_key(|e| e.0);
        for &(blk, i, j, val) in entries.iter() {
            if val != 0.0 {
                writeln!(s, "{v} {blk} {i} {j} {}", num(val)).unwrap();
            }
        }
    }
    s
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Parses SDPA sparse text. Comment lines start with `"` or `*`.
pub fn import_sdpa(text: &str) -> Result<BlockProblem> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('"') && !l.starts_with('*'));
    let clean = |l: &str| l.replace([',', '{', '}', '(', ')'], " ");

    let (ln, l) = lines
        .next()
        .ok_or_else(|| perr(text.lines().count().max(1), "empty file"))?;
    let nvars: usize = clean(l)
        .split_whitespace()
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| perr(ln, "expected number of variables"))?;
    let (ln, l) = lines
        .next()
        .ok_or_else(|| perr(ln, "missing number of blocks"))?;
    let nblocks: usize = clean(l)
        .split_whitespace()
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| perr(ln, "expected number of blocks"))?;
    let (ln, l) = lines
        .next()
        .ok_or_else(|| perr(ln, "missing block sizes"))?;
    let sizes: Vec<i64> = clean(l)
        .split_whitespace()
        .take(nblocks)
        .map(|t| {
            t.parse::<i64>()
                .map_err(|_| perr(ln, format!("bad block size `{t}`")))
        })
        .collect::<Result<_>>()?;
    if sizes.len() != nblocks || sizes.contains(&0) {
        return Err(perr(ln, format!("expected {nblocks} nonzero block sizes")));
    }
    let (ln, l) = lines
        .next()
        .ok_or_else(|| perr(ln, "missing objective vector"))?;
    let cvec: Vec<f64> = clean(l)
        .split_whitespace()
        .take(nvars)
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| perr(ln, format!("bad number `{t}`")))
        })
        .collect::<Result<_>>()?;
    if cvec.len() != nvars {
        return Err(perr(
            ln,
            format!("expected {nvars} objective entries, found {}", cvec.len()),
        ));
    }

    let mut blocks: Vec<LmiBlock> = sizes
        .iter()
        .map(|&s| LmiBlock::new(s.unsigned_abs() as usize))
        .collect();
    for (ln, l) in lines {
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 5 {
            return Err(perr(ln, format!("expected 5 fields, found {}", f.len())));
        }
        let ints: Vec<usize> = f[..4]
            .iter()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| perr(ln, format!("bad index `{t}`")))
            })
            .collect::<Result<_>>()?;
        let value: f64 = f[4]
            .parse()
            .map_err(|_| perr(ln, format!("bad value `{}`", f[4])))?;
        let (v, blk, i, j) = (ints[0], ints[1], ints[2], ints[3]);
        if v > nvars {
            return Err(perr(ln, format!("variable {v} out of range")));
        }
        if blk == 0 || blk > nblocks {
            return Err(perr(ln, format!("block {blk} out of range")));
        }
        let size = blocks[blk - 1].size;
        if i == 0 || j == 0 || i > size || j > size {
            return Err(perr(
                ln,
                format!("index ({i}, {j}) outside block of size {size}"),
            ));
        }
        if i > j {
            return Err(perr(ln, format!("entry ({i}, {j}) is below the diagonal")));
        }
        if sizes[blk - 1] < 0 && i != j {
            return Err(perr(
                ln,
                format!("off-diagonal entry ({i}, {j}) in a diagonal block"),
            ));
        }
        let b = &mut blocks[blk - 1];
        if v == 0 {
            b.constant.push(SymEntry::new(i - 1, j - 1, value));
        } else {
            match b.terms.binary_search_by_key(&(v - 1), |t| t.0) {
                Ok(k) => b.terms[k].1.push(SymEntry::new(i - 1, j - 1, value)),
                Err(k) => b
                    .terms
                    .insert(k, (v - 1, vec![SymEntry::new(i - 1, j - 1, value)])),
            }
        }
    }

    let mut p = BlockProblem::new(nvars);
    p.objective = cvec.iter().map(|c| -c).collect();
    let last = nblocks.checked_sub(1);
    for (k, b) in blocks.into_iter().enumerate() {
        if Some(k) == last && sizes[k] < 0 {
            if let Some(eqs) = as_equalities(&b) {
                p.equalities = eqs;
                continue;
            }
        }
        p.blocks.push(b);
    }
    for b in &p.blocks {
        for (v, _) in &b.terms {
            if *v >= nvars {
                return Err(Error::InvalidProblem(format!("variable {v} out of range")));
            }
        }
    }
    Ok(p)
}

/// Reads a diagonal block of negated row pairs as equality rows.
fn as_equalities(b: &LmiBlock) -> Option<Vec<EqualityRow>> {
    if b.size % 2 != 0 {
        return None;
    }
    let m = b.size / 2;
    let diag = |f: &[SymEntry], i: usize| -> f64 {
        f.iter()
            .filter(|e| e.row == i && e.col == i)
            .map(|e| e.value)
            .sum()
    };
    let mut rows = vec![EqualityRow::default(); m];
    for (k, r) in rows.iter_mut().enumerate() {
        let (hi, lo) = (diag(&b.constant, 2 * k), diag(&b.constant, 2 * k + 1));
        if hi != -lo {
            return None;
        }
        r.rhs = hi;
    }
    for (v, f) in &b.terms {
        for (k, r) in rows.iter_mut().enumerate() {
            let (hi, lo) = (diag(f, 2 * k), diag(f, 2 * k + 1));
            if hi != -lo {
                return None;
            }
            if hi != 0.0 {
                r.entries.push((*v, hi));
            }
        }
    }
    Some(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> BlockProblem {
        let mut p = BlockProblem::new(2);
        p.objective = vec![1.0, -0.5];
        let mut b = LmiBlock::new(2);
        b.add(0, 0, 1, 1.0);
        b.add(1, 1, 1, 0.25);
        b.add_constant(0, 0, -1.0);
        b.add_constant(1, 1, -1.0);
        p.blocks.push(b);
        p.equalities.push(EqualityRow {
            entries: vec![(0, 1.0), (1, 3.0)],
            rhs: 0.5,
        });
        p
    }

    #[test]
    fn layout() {
        let text = export_sdpa(&small());
        let data: Vec<&str> = text
            .lines()
            .filter(|l| !l.starts_with('"') && !l.starts_with('*'))
            .collect();
        assert_eq!(data[0], "2");
        assert_eq!(data[1], "2");
        assert_eq!(data[2], "2 -2");
        assert_eq!(data[3], "-1.0000000000000000e0 5.0000000000000000e-1");
        assert_eq!(data[4], "0 1 1 1 -1.0000000000000000e0");
    }

    #[test]
    fn round_trip() {
        let p = small();
        assert_eq!(import_sdpa(&export_sdpa(&p)).unwrap(), p);
    }

    #[test]
    fn below_diagonal_rejected() {
        let text = "1\n1\n2\n1.0\n1 1 2 1 1.0\n";
        match import_sdpa(text) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 5);
                assert!(msg.contains("below the diagonal"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_rejected() {
        assert!(matches!(import_sdpa(""), Err(Error::Parse { .. })));
        assert!(matches!(
            import_sdpa("\"only a comment\n"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn dimension_errors() {
        assert!(import_sdpa("1\n1\n2\n1.0\n1 2 1 1 1.0\n").is_err());
        assert!(import_sdpa("1\n1\n2\n1.0\n1 1 1 3 1.0\n").is_err());
        assert!(import_sdpa("2\n1\n2\n1.0\n").is_err());
    }

    #[test]
    fn accepts_punctuation_in_header() {
        let p =
            import_sdpa("* comment\n1 =mdim\n1\n{2}\n{1.0}\n1 1 1 2 1.0\n0 1 1 1 -1\n0 1 2 2 -1\n")
                .unwrap();
        assert_eq!(p.objective, vec![-1.0]);
        assert_eq!(p.blocks[0].size, 2);
    }
}
