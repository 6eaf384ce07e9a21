//! Interchange files: fixed-format MPS for MILPs, LP text with quadratic
//! sections for QCPs, and a JSON sidecar mapping generated names to keys/tags.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::{MilpModel, QcpModel, Tag, VarKey};
use crate::error::{Error, Result};

pub fn col_name(j: usize) -> String {
    format!("C{:07}", j + 1)
}

pub fn row_name(i: usize) -> String {
    format!("R{:07}", i + 1)
}

/// Shortest decimal rendering that fits a 12-character MPS field.
fn mps_num(x: f64) -> String {
    let s = format!("{x}");
    if s.len() <= 12 {
        return s;
    }
    for p in (1..=10).rev() {
        let s = format!("{x:.p$e}");
        if s.len() <= 12 {
            return s;
        }
    }
    format!("{x:.0e}")
}

fn entry(out: &mut String, f1: &str, f2: &str, f3: &str, f4: f64) {
    let _ = writeln!(out, " {f1:<2} {f2:<8}  {f3:<8}  {}", mps_num(f4));
}

fn marker(out: &mut String, kind: &str) {
    let _ = writeln!(out, "    {:<8}  {:<8}  {:<12}   {kind}", "MARKER", "'MARKER'", "");
}

/// Fixed-format MPS text. Objective sense is minimization.
pub fn to_mps(model: &MilpModel, name: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "NAME          {}", name.chars().take(8).collect::<String>());
    out.push_str("ROWS\n");
    out.push_str(" N  OBJ\n");
    for (i, r) in model.rows.iter().enumerate() {
        let kind = match (r.lo.is_finite(), r.hi.is_finite()) {
            _ if r.lo == r.hi => "E",
            (true, _) => "G",
            (false, true) => "L",
            (false, false) => "N",
        };
        let _ = writeln!(out, " {kind:<2} {}", row_name(i));
    }

    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.vars.len()];
    for (i, r) in model.rows.iter().enumerate() {
        for &(v, c) in &r.terms {
            cols[v.index()].push((i, c));
        }
    }
    let mut obj = vec![0.0; model.vars.len()];
    for &(v, c) in &model.objective {
        obj[v.index()] += c;
    }

    out.push_str("COLUMNS\n");
    let mut in_int = false;
    for (j, var) in model.vars.iter().enumerate() {
        if var.integer != in_int {
            marker(&mut out, if var.integer { "'INTORG'" } else { "'INTEND'" });
            in_int = var.integer;
        }
        let name = col_name(j);
        if obj[j] != 0.0 || cols[j].is_empty() {
            entry(&mut out, "", &name, "OBJ", obj[j]);
        }
        for &(i, c) in &cols[j] {
            entry(&mut out, "", &name, &row_name(i), c);
        }
    }
    if in_int {
        marker(&mut out, "'INTEND'");
    }

    out.push_str("RHS\n");
    for (i, r) in model.rows.iter().enumerate() {
        let rhs = if r.lo.is_finite() { r.lo } else if r.hi.is_finite() { r.hi } else { 0.0 };
        if rhs != 0.0 {
            entry(&mut out, "", "RHS", &row_name(i), rhs);
        }
    }
    let ranged: Vec<_> = model
        .rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.lo.is_finite() && r.hi.is_finite() && r.lo != r.hi)
        .collect();
    if !ranged.is_empty() {
        out.push_str("RANGES\n");
        for (i, r) in ranged {
            entry(&mut out, "", "RNG", &row_name(i), r.hi - r.lo);
        }
    }

    out.push_str("BOUNDS\n");
    for (j, v) in model.vars.iter().enumerate() {
        let name = col_name(j);
        if v.lo == v.hi {
            entry(&mut out, "FX", "BND", &name, v.lo);
            continue;
        }
        match (v.lo.is_finite(), v.hi.is_finite()) {
            (false, false) => {
                let _ = writeln!(out, " FR BND       {name}");
            }
            (false, true) => {
                let _ = writeln!(out, " MI BND       {name}");
                entry(&mut out, "UP", "BND", &name, v.hi);
            }
            (true, hi_finite) => {
                if v.lo != 0.0 {
                    entry(&mut out, "LO", "BND", &name, v.lo);
                }
                if hi_finite {
                    entry(&mut out, "UP", "BND", &name, v.hi);
                } else if v.integer {
                    let _ = writeln!(out, " PL BND       {name}");
                }
            }
        }
    }
    out.push_str("ENDATA\n");
    out
}

fn lp_num(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

fn lp_terms(out: &mut String, terms: impl Iterator<Item = (f64, String)>) {
    let mut first = true;
    for (n, (c, name)) in terms.enumerate() {
        if n > 0 && n % 6 == 0 {
            out.push_str("\n   ");
        }
        let sign = if c < 0.0 { "-" } else if first { "" } else { "+" };
        let _ = write!(out, " {sign} {} {name}", lp_num(c.abs()));
        first = false;
    }
    if first {
        out.push_str(" 0 C0000001");
    }
}

/// LP-format text of a QCP; bilinear terms go in `[ ... ]` sections.
pub fn to_lp(qcp: &QcpModel) -> String {
    let m = &qcp.base;
    let mut out = String::new();
    out.push_str("\\ blendplan model\nMinimize\n obj:");
    lp_terms(&mut out, m.objective.iter().map(|&(v, c)| (c, col_name(v.index()))));
    out.push_str("\nSubject To\n");

    let write_row = |out: &mut String, name: String, linear: &[(super::VarId, f64)], quad: &[(super::VarId, super::VarId, f64)], lo: f64, hi: f64| {
        let mut bounds = Vec::new();
        if lo == hi {
            bounds.push(("", "=", lo));
        } else {
            if lo.is_finite() {
                bounds.push(("_lo", ">=", lo));
            }
            if hi.is_finite() {
                bounds.push(("_hi", "<=", hi));
            }
        }
        for (suffix, op, rhs) in bounds {
            let _ = write!(out, " {name}{suffix}:");
            if !linear.is_empty() || quad.is_empty() {
                lp_terms(out, linear.iter().map(|&(v, c)| (c, col_name(v.index()))));
            }
            if !quad.is_empty() {
                out.push_str(if linear.is_empty() { " [" } else { " + [" });
                for (n, &(a, b, c)) in quad.iter().enumerate() {
                    let sign = if c < 0.0 { "-" } else if n == 0 { "" } else { "+" };
                    let _ = write!(out, " {sign} {} {} * {}", lp_num(c.abs()), col_name(a.index()), col_name(b.index()));
                }
                out.push_str(" ]");
            }
            let _ = writeln!(out, " {op} {}", lp_num(rhs));
        }
    };
    for (i, r) in m.rows.iter().enumerate() {
        write_row(&mut out, row_name(i), &r.terms, &[], r.lo, r.hi);
    }
    for (i, r) in qcp.quad_rows.iter().enumerate() {
        write_row(&mut out, row_name(m.rows.len() + i), &r.linear, &r.quad, r.lo, r.hi);
    }

    out.push_str("Bounds\n");
    for (j, v) in m.vars.iter().enumerate() {
        let name = col_name(j);
        if v.lo == v.hi {
            let _ = writeln!(out, " {name} = {}", lp_num(v.lo));
        } else if !v.lo.is_finite() && !v.hi.is_finite() {
            let _ = writeln!(out, " {name} free");
        } else {
            let _ = writeln!(out, " {} <= {name} <= {}", lp_num(v.lo), lp_num(v.hi));
        }
    }
    let binaries: Vec<String> = m
        .vars
        .iter()
        .enumerate()
        .filter(|(_, v)| v.integer && v.lo >= 0.0 && v.hi <= 1.0)
        .map(|(j, _)| col_name(j))
        .collect();
    let generals: Vec<String> = m
        .vars
        .iter()
        .enumerate()
        .filter(|(_, v)| v.integer && !(v.lo >= 0.0 && v.hi <= 1.0))
        .map(|(j, _)| col_name(j))
        .collect();
    for (title, names) in [("Binaries", binaries), ("Generals", generals)] {
        if !names.is_empty() {
            let _ = writeln!(out, "{title}");
            for chunk in names.chunks(8) {
                let _ = writeln!(out, " {}", chunk.join(" "));
            }
        }
    }
    out.push_str("End\n");
    out
}

#[derive(Serialize)]
struct SidecarColumn<'a> {
    name: String,
    key: &'a VarKey,
    label: String,
    start: Option<f64>,
}

#[derive(Serialize)]
struct SidecarRow<'a> {
    name: String,
    tag: String,
    index: &'a [u32],
    quadratic: bool,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    format: &'static str,
    method: Option<&'static str>,
    objective_constant: f64,
    columns: Vec<SidecarColumn<'a>>,
    rows: Vec<SidecarRow<'a>>,
}

/// JSON mapping generated column/row names to variable keys and constraint tags.
pub fn sidecar(model: &MilpModel, quad: &[super::QuadRow]) -> String {
    let tag = |t: &Tag| t.name();
    let doc = Sidecar {
        format: "blendplan-sidecar/1",
        method: model.meta.method.map(|m| m.as_str()),
        objective_constant: model.meta.value_constant,
        columns: model
            .vars
            .iter()
            .enumerate()
            .map(|(j, v)| SidecarColumn {
                name: col_name(j),
                key: &v.key,
                label: v.key.to_string(),
                start: v.start,
            })
            .collect(),
        rows: model
            .rows
            .iter()
            .map(|r| (tag(&r.tag), r.index.as_slice(), false))
            .chain(quad.iter().map(|r| (tag(&r.tag), r.index.as_slice(), true)))
            .enumerate()
            .map(|(i, (tag, index, quadratic))| SidecarRow {
                name: row_name(i),
                tag,
                index,
                quadratic,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("sidecar serializes");
    s.push('\n');
    s
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `<stem>.mps` and `<stem>.json`; returns the model file path.
pub fn export_milp(model: &MilpModel, dir: &Path, stem: &str) -> Result<std::path::PathBuf> {
    let p = dir.join(format!("{stem}.mps"));
    write(&p, &to_mps(model, stem))?;
    write(&dir.join(format!("{stem}.json")), &sidecar(model, &[]))?;
    Ok(p)
}

/// Writes `<stem>.lp` and `<stem>.json`; returns the model file path.
pub fn export_qcp(model: &QcpModel, dir: &Path, stem: &str) -> Result<std::path::PathBuf> {
    let p = dir.join(format!("{stem}.lp"));
    write(&p, &to_lp(model))?;
    write(&dir.join(format!("{stem}.json")), &sidecar(&model.base, &model.quad_rows))?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_fit_field() {
        for x in [1.0, -1179.0, 1.0 / 3.0, 123456789.123, -2.5e-9, 0.375] {
            let s = mps_num(x);
            assert!(s.len() <= 12, "{s}");
            let back: f64 = s.parse().unwrap();
            assert!((back - x).abs() <= 1e-6 * x.abs(), "{x} -> {s}");
        }
    }

    #[test]
    fn fixed_field_positions() {
        let mut s = String::new();
        entry(&mut s, "UP", "BND", "C0000001", 1.5);
        assert_eq!(&s[1..3], "UP");
        assert_eq!(&s[4..7], "BND");
        assert_eq!(&s[14..22], "C0000001");
        assert_eq!(s[24..].trim_end(), "1.5");
    }
}
