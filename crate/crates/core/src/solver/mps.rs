//! Deterministic MPS emission: fixed format when every name fits the 8-column
//! field, otherwise free format. Row names are `<tag>_<ordinal>`, column names
//! are the variable names.

use crate::model::{ModelInstance, Sense};
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpsFormat {
    Fixed,
    Free,
}

#[derive(Debug, Clone)]
pub struct MpsDocument {
    pub text: String,
    pub format: MpsFormat,
    /// Set when a name exceeded the fixed-format field width and the emitter
    /// fell back to free format.
    pub name_overflow: bool,
}

pub fn row_names(m: &ModelInstance) -> Vec<String> {
    let mut ordinals = std::collections::HashMap::new();
    m.constraints
        .iter()
        .map(|c| {
            let ord = ordinals.entry(c.tag).or_insert(0usize);
            let name = format!("{}_{:04}", c.tag, ord);
            *ord += 1;
            name
        })
        .collect()
}

/// Emits fixed-format MPS, failing with the offending name when one does not
/// fit the 8-character field.
pub fn emit_mps_fixed(m: &ModelInstance) -> Result<String, String> {
    let rows = row_names(m);
    for v in &m.variables {
        let name = v.vref.to_string();
        if name.len() > 8 {
            return Err(name);
        }
    }
    for r in &rows {
        if r.len() > 8 {
            return Err(r.clone());
        }
    }
    Ok(render(m, &rows, MpsFormat::Fixed))
}

/// Emits MPS, preferring fixed format and falling back to free format when a
/// name overflows.
pub fn emit_mps(m: &ModelInstance) -> MpsDocument {
    match emit_mps_fixed(m) {
        Ok(text) => MpsDocument {
            text,
            format: MpsFormat::Fixed,
            name_overflow: false,
        },
        Err(_) => MpsDocument {
            text: render(m, &row_names(m), MpsFormat::Free),
            format: MpsFormat::Free,
            name_overflow: true,
        },
    }
}

fn fmt_num(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x)
    } else {
        format!("{:.12}", x)
    }
}

fn render(m: &ModelInstance, rows: &[String], format: MpsFormat) -> String {
    let fixed = format == MpsFormat::Fixed;
    let mut out = String::new();
    let field = |s: &str| -> String {
        if fixed {
            format!("{s:<8}")
        } else {
            s.to_string()
        }
    };

    out.push_str("NAME          PIPESCHED\n");
    out.push_str("ROWS\n");
    out.push_str(" N  COST\n");
    for (c, name) in m.constraints.iter().zip(rows) {
        let sense = match c.sense {
            Sense::Le => "L",
            Sense::Eq => "E",
            Sense::Ge => "G",
        };
        let _ = writeln!(out, " {}  {}", sense, field(name));
    }

    // Column-major view of the matrix, preserving per-row term order.
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m.variables.len()];
    for (ri, c) in m.constraints.iter().enumerate() {
        for (v, coef) in &c.terms {
            if *coef != 0.0 {
                cols[m.var_index(*v)].push((ri, *coef));
            }
        }
    }
    let mut obj = vec![0.0; m.variables.len()];
    for (v, coef) in &m.objective {
        obj[m.var_index(*v)] += *coef;
    }

    out.push_str("COLUMNS\n");
    let mut in_integer = false;
    let mut marker = 0usize;
    for (ci, var) in m.variables.iter().enumerate() {
        if var.integer != in_integer {
            let kind = if var.integer { "'INTORG'" } else { "'INTEND'" };
            let _ = writeln!(
                out,
                "    {}  {}             {}",
                field(&format!("MARKER{marker}")),
                field("'MARKER'"),
                kind
            );
            marker += 1;
            in_integer = var.integer;
        }
        let name = var.vref.to_string();
        let mut entries: Vec<(String, f64)> = Vec::new();
        if obj[ci] != 0.0 {
            entries.push(("COST".to_string(), obj[ci]));
        }
        for (ri, coef) in &cols[ci] {
            entries.push((rows[*ri].clone(), *coef));
        }
        if entries.is_empty() {
            // Keep every declared variable present so solutions are complete.
            entries.push(("COST".to_string(), 0.0));
        }
        for pair in entries.chunks(2) {
            let _ = write!(out, "    {}", field(&name));
            for (row, coef) in pair {
                let _ = write!(out, "  {}  {:>12}", field(row), fmt_num(*coef));
            }
            out.push('\n');
        }
    }
    if in_integer {
        let _ = writeln!(
            out,
            "    {}  {}             'INTEND'",
            field(&format!("MARKER{marker}")),
            field("'MARKER'")
        );
    }

    out.push_str("RHS\n");
    for (c, name) in m.constraints.iter().zip(rows) {
        if c.rhs != 0.0 {
            let _ = writeln!(
                out,
                "    {}  {}  {:>12}",
                field("RHS"),
                field(name),
                fmt_num(c.rhs)
            );
        }
    }

    out.push_str("BOUNDS\n");
    for var in &m.variables {
        let name = var.vref.to_string();
        if var.integer && var.lb == 0.0 && var.ub == 1.0 {
            let _ = writeln!(out, " BV {}  {}", field("BND"), field(&name));
            continue;
        }
        if var.lb == var.ub {
            let _ = writeln!(
                out,
                " FX {}  {}  {:>12}",
                field("BND"),
                field(&name),
                fmt_num(var.lb)
            );
            continue;
        }
        if var.lb != 0.0 {
            let _ = writeln!(
                out,
                " LO {}  {}  {:>12}",
                field("BND"),
                field(&name),
                fmt_num(var.lb)
            );
        }
        if var.ub.is_finite() {
            let _ = writeln!(
                out,
                " UP {}  {}  {:>12}",
                field("BND"),
                field(&name),
                fmt_num(var.ub)
            );
        }
    }
    out.push_str("ENDATA\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_model, BuildOptions};
    use crate::scenario::load_scenario_str;

    #[test]
    fn emission_is_deterministic() {
        let s = load_scenario_str(include_str!("../../data/case_study.json")).unwrap();
        let m1 = build_model(&s, &BuildOptions::default());
        let m2 = build_model(&s, &BuildOptions::default());
        let a = emit_mps(&m1);
        let b = emit_mps(&m2);
        assert_eq!(a.text, b.text);
        assert_eq!(a.format, MpsFormat::Free);
        assert!(a.name_overflow);
    }

    #[test]
    fn tiny_model_fits_fixed_format() {
        let m = crate::solver::tests::tiny_min_x();
        let doc = emit_mps(&m);
        assert_eq!(doc.format, MpsFormat::Fixed);
        assert!(doc.text.contains("ENDATA"));
    }

    #[test]
    fn integer_markers_present() {
        let s = load_scenario_str(include_str!("../../data/case_study.json")).unwrap();
        let m = build_model(&s, &BuildOptions::default());
        let doc = emit_mps(&m);
        assert!(doc.text.contains("'INTORG'"));
        assert!(doc.text.contains("'INTEND'"));
        assert!(doc.text.contains(" BV "));
    }
}
