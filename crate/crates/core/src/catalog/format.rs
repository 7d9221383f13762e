//! JSON interchange format for triples.
//!
//! ```json
//! {
//!   "name": "strassen-p2",
//!   "p": 2,
//!   "rank": 7,
//!   "u": [[0, 1, 1, 0, 1, 1, 0], ...],
//!   "v": [...],
//!   "w": [...]
//! }
//! ```
//!
//! Each of `u`, `v`, `w` has `p^2` rows of `rank` entries. Entries are JSON
//! integers, or strings `"num/den"` for non-integers. Row `i` of `w` is the
//! combination for output block `C_i` in row-major block order.

use std::fmt::Write as _;

use serde_json::Value;

use super::{BilinearTriple, CoeffMatrix};
use crate::coefficient::Coefficient;
use crate::error::{Error, Result};

/// Renders a triple as JSON with one matrix row per line.
pub fn save_triple(t: &BilinearTriple) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"name\": {},", Value::String(t.name().to_string()));
    let _ = writeln!(out, "  \"p\": {},", t.p());
    let _ = writeln!(out, "  \"rank\": {},", t.rank());
    let factors = [("u", t.u()), ("v", t.v()), ("w", t.w())];
    for (idx, (key, m)) in factors.iter().enumerate() {
        let _ = writeln!(out, "  \"{key}\": [");
        for r in 0..m.rows() {
            let cells: Vec<String> = m.row(r).iter().map(render_entry).collect();
            let sep = if r + 1 < m.rows() { "," } else { "" };
            let _ = writeln!(out, "    [{}]{sep}", cells.join(", "));
        }
        let sep = if idx + 1 < factors.len() { "," } else { "" };
        let _ = writeln!(out, "  ]{sep}");
    }
    out.push_str("}\n");
    out
}

fn render_entry(c: &Coefficient) -> String {
    if c.is_integer() {
        c.numerator().to_string()
    } else {
        format!("\"{}/{}\"", c.numerator(), c.denominator())
    }
}

/// Parses and validates a triple; errors carry the offending field and position.
pub fn load_triple(text: &str) -> Result<BilinearTriple> {
    let root: Value = serde_json::from_str(text).map_err(|e| {
        Error::parse(
            format!("line {} column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    let obj = root
        .as_object()
        .ok_or_else(|| Error::parse("document", "expected a JSON object"))?;

    let name = obj
        .get("name")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::parse("field `name`", "missing or not a string"))?;
    let p = read_count(obj.get("p"), "p")?;
    let rank = read_count(obj.get("rank"), "rank")?;
    if p == 0 || rank == 0 {
        return Err(Error::parse("fields `p`/`rank`", "must be positive"));
    }

    let u = read_matrix(obj.get("u"), "u", p * p, rank)?;
    let v = read_matrix(obj.get("v"), "v", p * p, rank)?;
    let w = read_matrix(obj.get("w"), "w", p * p, rank)?;
    BilinearTriple::new(name, p, u, v, w)
}

fn read_count(value: Option<&Value>, field: &str) -> Result<usize> {
    value
        .and_then(Value::as_u64)
        .map(|v| v as usize)
        .ok_or_else(|| Error::parse(format!("field `{field}`"), "missing or not a non-negative integer"))
}

fn read_matrix(value: Option<&Value>, field: &str, rows: usize, cols: usize) -> Result<CoeffMatrix> {
    let upper = field.to_uppercase();
    let arr = value
        .and_then(Value::as_array)
        .ok_or_else(|| Error::parse(format!("field `{field}`"), "missing or not an array"))?;
    if arr.len() != rows {
        return Err(Error::parse(
            format!("field `{field}`"),
            format!("{upper} row count is {}, expected p^2 = {rows}", arr.len()),
        ));
    }
    let mut out = Vec::with_capacity(rows);
    for (r, row) in arr.iter().enumerate() {
        let ctx = || format!("field `{field}` row {r}");
        let cells = row
            .as_array()
            .ok_or_else(|| Error::parse(ctx(), "row is not an array"))?;
        if cells.len() != cols {
            return Err(Error::parse(
                ctx(),
                format!("{upper} column count is {}, expected rank = {cols}", cells.len()),
            ));
        }
        let mut parsed = Vec::with_capacity(cols);
        for (c, cell) in cells.iter().enumerate() {
            let at = || format!("field `{field}` row {r} column {c}");
            let coeff = match cell {
                Value::Number(num) => num
                    .as_i64()
                    .map(Coefficient::integer)
                    .ok_or_else(|| Error::parse(at(), format!("{num} is not an integer")))?,
                Value::String(s) => s.parse::<Coefficient>().map_err(|e| match e {
                    Error::Parse { message, .. } => Error::parse(at(), message),
                    other => other,
                })?,
                other => return Err(Error::parse(at(), format!("unexpected value {other}"))),
            };
            parsed.push(coeff);
        }
        out.push(parsed);
    }
    CoeffMatrix::from_rows(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{builtin, Factor, BUILTIN_NAMES};
    use proptest::prelude::*;

    #[test]
    fn builtins_round_trip() {
        for name in BUILTIN_NAMES {
            let t = builtin(name).unwrap();
            assert_eq!(load_triple(&save_triple(&t)).unwrap(), t);
        }
    }

    #[test]
    fn strassen_file_layout() {
        let text = save_triple(&builtin("strassen-p2").unwrap());
        assert!(text.starts_with("{\n  \"name\": \"strassen-p2\",\n  \"p\": 2,\n  \"rank\": 7,\n"));
        assert!(text.contains("    [0, 1, 1, 0, 1, 1, 0],\n"));
        assert!(text.ends_with("  ]\n}\n"));
    }

    #[test]
    fn short_u_is_rejected() {
        let text = r#"{"name": "bad", "p": 2, "rank": 1,
            "u": [[1], [0], [0]], "v": [[1], [0], [0], [0]], "w": [[1], [0], [0], [0]]}"#;
        let err = load_triple(text).unwrap_err().to_string();
        assert!(err.contains("U row count"), "{err}");
    }

    #[test]
    fn zero_denominator_has_context() {
        let text = r#"{"name": "bad", "p": 1, "rank": 1, "u": [["1/0"]], "v": [[1]], "w": [[1]]}"#;
        let err = load_triple(text).unwrap_err().to_string();
        assert!(err.contains("field `u` row 0 column 0"), "{err}");
        assert!(err.contains("zero denominator"), "{err}");
    }

    #[test]
    fn syntax_error_has_line() {
        let err = load_triple("{\n  \"name\": \"x\",\n  \"p\": ,\n}").unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn missing_field() {
        let err = load_triple(r#"{"name": "x", "p": 1, "u": [[1]], "v": [[1]], "w": [[1]]}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("`rank`"), "{err}");
    }

    #[test]
    fn hand_written_classical_loads() {
        let text = r#"{
          "name": "classical-p2",
          "p": 2,
          "rank": 8,
          "u": [[1,0,1,0,0,0,0,0],[0,1,0,1,0,0,0,0],[0,0,0,0,1,0,1,0],[0,0,0,0,0,1,0,1]],
          "v": [[1,0,0,0,1,0,0,0],[0,0,1,0,0,0,1,0],[0,1,0,0,0,1,0,0],[0,0,0,1,0,0,0,1]],
          "w": [[1,1,0,0,0,0,0,0],[0,0,1,1,0,0,0,0],[0,0,0,0,1,1,0,0],[0,0,0,0,0,0,1,1]]
        }"#;
        let t = load_triple(text).unwrap();
        assert_eq!(t, builtin("classical-p2").unwrap());
    }

    proptest! {
        #[test]
        fn random_rationals_round_trip(
            entries in prop::collection::vec((-9i64..9, 1i64..7), 4 * 3 * 3),
        ) {
            let base = builtin("strassen-p2").unwrap();
            let mut t = base.clone();
            for (idx, (n, d)) in entries.into_iter().enumerate() {
                let factor = [Factor::U, Factor::V, Factor::W][idx % 3];
                let row = (idx / 3) % 4;
                let col = (idx / 12) % 7;
                let c = Coefficient::new(n, d).unwrap();
                if let Ok(next) = t.with_entry(factor, row, col, c) {
                    t = next;
                }
            }
            prop_assert_eq!(load_triple(&save_triple(&t)).unwrap(), t);
        }
    }
}
