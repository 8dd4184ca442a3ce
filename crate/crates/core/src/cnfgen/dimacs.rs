//! DIMACS CNF with generator metadata in comment lines:
//!
//! ```text
//! c generator blockpw k=1 b=2 c=0 seed=5
//! c matrix 2 4
//! c arow 0110
//! c arow 1011
//! c var 1 = x 1
//! c var 5 = z 1 1
//! p cnf 12 40
//! 1 -5 0
//! ```

use std::fmt::Write as _;

use super::{Clause, CnfFormula, GeneratorMode, GeneratorParams, Lit, Provenance, VarRole, VariableTable};
use crate::error::{Error, Result};
use crate::f2code::{BitWord, F2Matrix};

pub fn write_dimacs(formula: &CnfFormula) -> String {
    let mut out = String::new();
    if let Some(p) = &formula.provenance {
        let seed = p.params.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        let _ = write!(out, "c generator {} k={} b={} c={} seed={}", p.mode, p.params.k, p.params.b, p.params.c, seed);
        if let Some(w) = p.params.block_width {
            let _ = write!(out, " w={w}");
        }
        out.push('\n');
        let _ = writeln!(out, "c matrix {} {}", p.matrix.num_rows(), p.matrix.num_cols());
        for r in p.matrix.rows() {
            let _ = writeln!(out, "c arow {r}");
        }
    }
    for (v, role) in formula.vars.iter() {
        match role {
            Some(VarRole::X(j)) => {
                let _ = writeln!(out, "c var {v} = x {j}");
            }
            Some(VarRole::Z(i, j)) => {
                let _ = writeln!(out, "c var {v} = z {i} {j}");
            }
            None => {}
        }
    }
    let _ = writeln!(out, "p cnf {} {}", formula.num_vars(), formula.num_clauses());
    for c in &formula.clauses {
        for l in c.lits() {
            let _ = write!(out, "{l} ");
        }
        out.push_str("0\n");
    }
    out
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    tok.and_then(|t| t.parse().ok()).ok_or_else(|| Error::parse(line, format!("expected {what}")))
}

fn parse_generator(rest: &[&str], line: usize) -> Result<(GeneratorMode, GeneratorParams)> {
    let mode: GeneratorMode =
        rest.first().ok_or_else(|| Error::parse(line, "missing generator mode"))?.parse().map_err(|e: Error| {
            Error::parse(line, e.to_string())
        })?;
    let mut params = GeneratorParams::default();
    let (mut have_k, mut have_b, mut have_c, mut have_seed) = (false, false, false, false);
    for kv in &rest[1..] {
        let (key, value) = kv.split_once('=').ok_or_else(|| Error::parse(line, format!("bad field {kv:?}")))?;
        match key {
            "k" => (params.k, have_k) = (parse_num(Some(value), line, "k")?, true),
            "b" => (params.b, have_b) = (parse_num(Some(value), line, "b")?, true),
            "c" => (params.c, have_c) = (parse_num(Some(value), line, "c")?, true),
            "w" => params.block_width = Some(parse_num(Some(value), line, "w")?),
            "seed" => {
                params.seed = if value == "none" { None } else { Some(parse_num(Some(value), line, "seed")?) };
                have_seed = true;
            }
            _ => return Err(Error::parse(line, format!("unknown generator field {key:?}"))),
        }
    }
    if !(have_k && have_b && have_c && have_seed) {
        return Err(Error::parse(line, "generator line needs k, b, c and seed"));
    }
    Ok((mode, params))
}

pub fn parse_dimacs(text: &str) -> Result<CnfFormula> {
    let mut generator: Option<(usize, GeneratorMode, GeneratorParams)> = None;
    let mut matrix_dims: Option<(usize, usize, usize)> = None;
    let mut arows: Vec<BitWord> = Vec::new();
    let mut roles: Vec<(usize, u32, VarRole)> = Vec::new();
    let mut header: Option<(usize, usize, usize)> = None;
    let mut clauses: Vec<Clause> = Vec::new();
    let mut pending: Vec<Lit> = Vec::new();
    let mut pending_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed == "%" {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('c') {
            if !(comment.is_empty() || comment.starts_with(char::is_whitespace)) {
                return Err(Error::parse(line, "unexpected token"));
            }
            let toks: Vec<&str> = comment.split_whitespace().collect();
            match toks.first().copied() {
                Some("generator") => {
                    let (mode, params) = parse_generator(&toks[1..], line)?;
                    generator = Some((line, mode, params));
                }
                Some("matrix") => {
                    let m = parse_num(toks.get(1).copied(), line, "row count")?;
                    let n = parse_num(toks.get(2).copied(), line, "column count")?;
                    matrix_dims = Some((line, m, n));
                }
                Some("arow") => {
                    let bits = toks.get(1).copied().unwrap_or("");
                    let parsed: Option<Vec<bool>> = bits
                        .chars()
                        .map(|ch| match ch {
                            '0' => Some(false),
                            '1' => Some(true),
                            _ => None,
                        })
                        .collect();
                    let parsed = parsed.ok_or_else(|| Error::parse(line, "matrix row must be 0/1 characters"))?;
                    arows.push(BitWord::from_bits(&parsed));
                }
                Some("var") => {
                    let v: u32 = parse_num(toks.get(1).copied(), line, "variable index")?;
                    if toks.get(2) != Some(&"=") {
                        return Err(Error::parse(line, "expected `=` in role comment"));
                    }
                    let role = match toks.get(3).copied() {
                        Some("x") if toks.len() == 5 => VarRole::X(parse_num(toks.get(4).copied(), line, "column")?),
                        Some("z") if toks.len() == 6 => VarRole::Z(
                            parse_num(toks.get(4).copied(), line, "row")?,
                            parse_num(toks.get(5).copied(), line, "column")?,
                        ),
                        _ => return Err(Error::parse(line, "role must be `x <j>` or `z <i> <j>`")),
                    };
                    roles.push((line, v, role));
                }
                _ => {}
            }
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('p') {
            if header.is_some() {
                return Err(Error::parse(line, "duplicate problem line"));
            }
            let toks: Vec<&str> = rest.split_whitespace().collect();
            if toks.first() != Some(&"cnf") || toks.len() != 3 {
                return Err(Error::parse(line, "header must be `p cnf <#vars> <#clauses>`"));
            }
            let nv = parse_num(toks.get(1).copied(), line, "variable count")?;
            let nc = parse_num(toks.get(2).copied(), line, "clause count")?;
            header = Some((line, nv, nc));
            continue;
        }
        let Some((_, nv, _)) = header else {
            return Err(Error::parse(line, "clause before problem line"));
        };
        for tok in trimmed.split_whitespace() {
            let value: i32 = tok.parse().map_err(|_| Error::parse(line, format!("bad literal {tok:?}")))?;
            if pending.is_empty() {
                pending_line = line;
            }
            if value == 0 {
                let mut lits = std::mem::take(&mut pending);
                lits.dedup();
                let clause = Clause::new(lits).map_err(|e| Error::parse(pending_line, e.to_string()))?;
                clauses.push(clause);
                continue;
            }
            let lit = Lit::from_dimacs(value).ok_or_else(|| Error::parse(line, "literal out of range"))?;
            if lit.var() as usize > nv {
                return Err(Error::parse(line, format!("variable {} exceeds declared count {nv}", lit.var())));
            }
            if !pending.contains(&lit) {
                pending.push(lit);
            }
        }
    }
    if !pending.is_empty() {
        return Err(Error::parse(pending_line, "clause not terminated by 0"));
    }
    let (hline, nv, nc) = header.ok_or_else(|| Error::parse(1, "missing problem line"))?;
    if clauses.len() != nc {
        return Err(Error::parse(hline, format!("header declares {nc} clauses, found {}", clauses.len())));
    }

    let mut vars = VariableTable::unnamed(nv);
    for (line, v, role) in roles {
        if v == 0 || v as usize > nv {
            return Err(Error::parse(line, format!("role for undeclared variable {v}")));
        }
        vars.assign_role(v, role).map_err(|e| Error::parse(line, e.to_string()))?;
    }

    let provenance = match generator {
        None => None,
        Some((gline, mode, params)) => {
            let (mline, m, n) = matrix_dims.ok_or_else(|| Error::parse(gline, "generator line without matrix"))?;
            if arows.len() != m {
                return Err(Error::parse(mline, format!("matrix declares {m} rows, found {}", arows.len())));
            }
            let matrix = F2Matrix::from_rows(n, arows).map_err(|e| Error::parse(mline, e.to_string()))?;
            Some(Provenance { mode, params, matrix })
        }
    };

    Ok(CnfFormula { vars, clauses, provenance })
}
