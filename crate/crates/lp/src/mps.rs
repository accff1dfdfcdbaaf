use std::fmt::Write;

use crate::instance::LpInstance;

/// Fixed-format MPS text. MPS minimizes, so objective coefficients are
/// written negated; labels are kept in comment lines since fixed-format names
/// are limited to eight characters.
pub fn write_mps(lp: &LpInstance) -> String {
    let mut out = String::new();
    let name: String = lp.name.chars().filter(|c| !c.is_whitespace()).take(8).collect();
    let _ = writeln!(out, "* maximize: objective coefficients negated below");
    let _ = writeln!(out, "NAME          {name}");
    let _ = writeln!(out, "ROWS");
    let _ = writeln!(out, " N  OBJ");
    let n_eq = lp.equalities.len();
    for (i, row) in lp.rows().enumerate() {
        let kind = if i < n_eq { 'E' } else { 'L' };
        let _ = writeln!(out, "* {} {}", row_name(i), row.label);
        let _ = writeln!(out, " {kind}  {}", row_name(i));
    }
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); lp.num_vars()];
    for (i, row) in lp.rows().enumerate() {
        for &(j, a) in &row.entries {
            if a != 0.0 {
                columns[j].push((i, a));
            }
        }
    }
    let _ = writeln!(out, "COLUMNS");
    for (j, entries) in columns.iter().enumerate() {
        let _ = writeln!(out, "* {} {}", col_name(j), lp.column_labels[j]);
        if lp.objective[j] != 0.0 {
            field_line(&mut out, &col_name(j), "OBJ", -lp.objective[j]);
        }
        for &(i, a) in entries {
            field_line(&mut out, &col_name(j), &row_name(i), a);
        }
    }
    let _ = writeln!(out, "RHS");
    for (i, row) in lp.rows().enumerate() {
        if row.rhs != 0.0 {
            field_line(&mut out, "RHS", &row_name(i), row.rhs);
        }
    }
    let _ = writeln!(out, "ENDATA");
    out
}

fn row_name(i: usize) -> String {
    format!("R{i:07}")
}

fn col_name(j: usize) -> String {
    format!("C{j:07}")
}

fn field_line(out: &mut String, a: &str, b: &str, v: f64) {
    let _ = writeln!(out, "    {a:<8}  {b:<8}  {:>12}", number(v));
}

/// Shortest round-trip text when it fits twelve characters, else scientific.
fn number(v: f64) -> String {
    let s = format!("{v}");
    if s.len() <= 12 {
        return s;
    }
    let s = format!("{v:E}");
    if s.len() <= 12 {
        return s;
    }
    (0..=6).rev().map(|digits| format!("{v:.digits$E}")).find(|s| s.len() <= 12).unwrap_or_else(|| format!("{v:.0E}"))
}
