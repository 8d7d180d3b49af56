//! Fixed-format MPS with mangled eight-character names and a sidecar map.

use std::collections::HashMap;
use std::fmt::Write;

use crate::mip::{CanonicalModel, Constraint, Family, Sense, VarKind, Variable};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MpsError {
    #[error("short name collision on {0}")]
    Collision(String),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// Short name to long name, columns then rows.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NameMap {
    pub columns: Vec<(String, String)>,
    pub rows: Vec<(String, String)>,
}

impl NameMap {
    /// One `C`/`R` line per entry: `short long`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (s, l) in &self.columns {
            let _ = writeln!(out, "C {s} {l}");
        }
        for (s, l) in &self.rows {
            let _ = writeln!(out, "R {s} {l}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, MpsError> {
        let mut map = NameMap::default();
        for (k, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let mut it = line.splitn(3, ' ');
            let (Some(tag), Some(short), Some(long)) = (it.next(), it.next(), it.next()) else {
                return Err(MpsError::Syntax { line: k + 1, message: "malformed name map entry".into() });
            };
            let pair = (short.to_owned(), long.to_owned());
            match tag {
                "C" => map.columns.push(pair),
                "R" => map.rows.push(pair),
                _ => return Err(MpsError::Syntax { line: k + 1, message: format!("unknown tag {tag}") }),
            }
        }
        Ok(map)
    }

    pub fn column_lookup(&self) -> HashMap<&str, usize> {
        self.columns.iter().enumerate().map(|(j, (s, _))| (s.as_str(), j)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MpsFile {
    pub text: String,
    pub names: NameMap,
}

const BASE36: &[u8; 36] = b"0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ";

fn short_name(prefix: char, mut k: usize) -> String {
    let mut digits = [b'0'; 7];
    for slot in digits.iter_mut().rev() {
        *slot = BASE36[k % 36];
        k /= 36;
    }
    let mut s = String::with_capacity(8);
    s.push(prefix);
    s.push_str(std::str::from_utf8(&digits).expect("ascii"));
    s
}

/// Shortest text for `x` that fits the twelve-character numeric field.
pub fn format_number(x: f64) -> String {
    let x = x + 0.0;
    let plain = format!("{x}");
    if plain.len() <= 12 {
        return plain;
    }
    let sci = format!("{x:e}");
    if sci.len() <= 12 {
        return sci;
    }
    (0..12).rev().map(|p| format!("{x:.p$e}")).find(|s| s.len() <= 12).unwrap_or(sci)
}

fn line(out: &mut String, fields: [&str; 6]) {
    // fields start at columns 2, 5, 15, 25, 40 and 50
    const START: [usize; 6] = [1, 4, 14, 24, 39, 49];
    let mut s = String::with_capacity(64);
    for (k, f) in fields.iter().enumerate() {
        if f.is_empty() {
            continue;
        }
        while s.len() < START[k] {
            s.push(' ');
        }
        s.push_str(f);
    }
    out.push_str(&s);
    out.push('\n');
}

pub fn emit_mps(model: &CanonicalModel, name: &str) -> Result<MpsFile, MpsError> {
    let n = model.variables.len();
    let m = model.constraints.len();
    let limit = 36usize.pow(7);
    if n > limit {
        return Err(MpsError::Collision(short_name('C', n % limit)));
    }
    if m > limit {
        return Err(MpsError::Collision(short_name('R', m % limit)));
    }
    let cols: Vec<String> = (0..n).map(|j| short_name('C', j)).collect();
    let rows: Vec<String> = (0..m).map(|i| short_name('R', i)).collect();
    let names = NameMap {
        columns: cols.iter().cloned().zip(model.variables.iter().map(|v| v.name.clone())).collect(),
        rows: rows.iter().cloned().zip(model.constraints.iter().map(|c| c.name.clone())).collect(),
    };

    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, c) in model.constraints.iter().enumerate() {
        for &(j, a) in &c.terms {
            by_col[j].push((i, a));
        }
    }

    let mut out = String::new();
    let _ = writeln!(out, "NAME          {name}");
    out.push_str("OBJSENSE\n    MAX\nROWS\n");
    line(&mut out, ["N", "OBJ", "", "", "", ""]);
    for (i, c) in model.constraints.iter().enumerate() {
        let t = match c.sense {
            Sense::Le => "L",
            Sense::Ge => "G",
            Sense::Eq => "E",
        };
        line(&mut out, [t, &rows[i], "", "", "", ""]);
    }
    out.push_str("COLUMNS\n");
    if n > 0 {
        line(&mut out, ["", "MARKER", "'MARKER'", "", "'INTORG'", ""]);
    }
    for (j, v) in model.variables.iter().enumerate() {
        let mut entries: Vec<(&str, String)> = Vec::new();
        if v.objective != 0.0 {
            entries.push(("OBJ", format_number(v.objective)));
        }
        entries.extend(by_col[j].iter().map(|&(i, a)| (rows[i].as_str(), format_number(a))));
        if entries.is_empty() {
            entries.push(("OBJ", "0".into()));
        }
        for pair in entries.chunks(2) {
            let (r1, a1) = (&pair[0].0, &pair[0].1);
            let (r2, a2) = pair.get(1).map(|(r, a)| (*r, a.as_str())).unwrap_or(("", ""));
            line(&mut out, ["", &cols[j], r1, a1, r2, a2]);
        }
    }
    if n > 0 {
        line(&mut out, ["", "MARKER", "'MARKER'", "", "'INTEND'", ""]);
    }
    out.push_str("RHS\n");
    let rhs: Vec<(usize, String)> = model
        .constraints
        .iter()
        .enumerate()
        .filter(|(_, c)| c.rhs != 0.0)
        .map(|(i, c)| (i, format_number(c.rhs)))
        .collect();
    for pair in rhs.chunks(2) {
        let (i1, a1) = (&pair[0].0, &pair[0].1);
        let (r2, a2) = pair.get(1).map(|(i, a)| (rows[*i].as_str(), a.as_str())).unwrap_or(("", ""));
        line(&mut out, ["", "RHS", &rows[*i1], a1, r2, a2]);
    }
    out.push_str("BOUNDS\n");
    for (j, v) in model.variables.iter().enumerate() {
        match v.kind {
            VarKind::Binary => line(&mut out, ["BV", "BND", &cols[j], "", "", ""]),
            VarKind::Integer => {
                if v.lower != 0.0 {
                    line(&mut out, ["LI", "BND", &cols[j], &format_number(v.lower), "", ""]);
                }
                line(&mut out, ["UI", "BND", &cols[j], &format_number(v.upper), "", ""]);
            }
        }
    }
    out.push_str("ENDATA\n");
    Ok(MpsFile { text: out, names })
}

fn num(s: &str, line: usize) -> Result<f64, MpsError> {
    s.parse().map_err(|_| MpsError::Syntax { line, message: format!("bad number {s:?}") })
}

/// Reads a file written by [`emit_mps`] back into a model.
pub fn parse_mps(text: &str, names: &NameMap) -> Result<CanonicalModel, MpsError> {
    let long_col: HashMap<&str, &str> = names.columns.iter().map(|(s, l)| (s.as_str(), l.as_str())).collect();
    let long_row: HashMap<&str, &str> = names.rows.iter().map(|(s, l)| (s.as_str(), l.as_str())).collect();
    let mut model = CanonicalModel::default();
    let mut col_idx: HashMap<String, usize> = HashMap::new();
    let mut row_idx: HashMap<String, usize> = HashMap::new();
    let mut section = "";
    let mut integer = false;
    for (k, raw) in text.lines().enumerate() {
        let ln = k + 1;
        let err = |message: String| MpsError::Syntax { line: ln, message };
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        if !raw.starts_with(' ') {
            section = raw.split_whitespace().next().unwrap_or("");
            continue;
        }
        let f: Vec<&str> = raw.split_whitespace().collect();
        match section {
            "OBJSENSE" => {
                if f != ["MAX"] {
                    return Err(err(format!("unsupported sense {raw:?}")));
                }
            }
            "ROWS" => {
                let [t, r] = f[..] else { return Err(err("malformed row".into())) };
                let sense = match t {
                    "N" => continue,
                    "L" => Sense::Le,
                    "G" => Sense::Ge,
                    "E" => Sense::Eq,
                    _ => return Err(err(format!("unknown row type {t}"))),
                };
                let name = long_row.get(r).copied().unwrap_or(r).to_owned();
                let family = Constraint::family_of_name(&name).unwrap_or(Family::new(0, 0));
                row_idx.insert(r.to_owned(), model.constraints.len());
                model.constraints.push(Constraint { name, family, terms: Vec::new(), sense, rhs: 0.0 });
            }
            "COLUMNS" => {
                if f.len() == 3 && f[0] == "MARKER" {
                    integer = f[2] == "'INTORG'";
                    continue;
                }
                if f.len() != 3 && f.len() != 5 {
                    return Err(err("malformed column entry".into()));
                }
                let j = match col_idx.get(f[0]) {
                    Some(&j) => j,
                    None => {
                        if !integer {
                            return Err(err(format!("continuous column {}", f[0])));
                        }
                        let name = long_col.get(f[0]).copied().unwrap_or(f[0]).to_owned();
                        model.variables.push(Variable {
                            name,
                            kind: VarKind::Integer,
                            lower: 0.0,
                            upper: f64::INFINITY,
                            objective: 0.0,
                        });
                        col_idx.insert(f[0].to_owned(), model.variables.len() - 1);
                        model.variables.len() - 1
                    }
                };
                for pair in f[1..].chunks(2) {
                    let a = num(pair[1], ln)?;
                    if pair[0] == "OBJ" {
                        model.variables[j].objective = a;
                    } else {
                        let i = *row_idx.get(pair[0]).ok_or_else(|| err(format!("unknown row {}", pair[0])))?;
                        model.constraints[i].terms.push((j, a));
                    }
                }
            }
            "RHS" => {
                if f.len() != 3 && f.len() != 5 {
                    return Err(err("malformed rhs entry".into()));
                }
                for pair in f[1..].chunks(2) {
                    let i = *row_idx.get(pair[0]).ok_or_else(|| err(format!("unknown row {}", pair[0])))?;
                    model.constraints[i].rhs = num(pair[1], ln)?;
                }
            }
            "BOUNDS" => {
                let j = *f.get(2).and_then(|c| col_idx.get(*c)).ok_or_else(|| err("bound on unknown column".into()))?;
                let v = &mut model.variables[j];
                match (f[0], f.get(3)) {
                    ("BV", None) => {
                        v.kind = VarKind::Binary;
                        v.upper = 1.0;
                    }
                    ("UI", Some(x)) => v.upper = num(x, ln)?,
                    ("LI", Some(x)) => v.lower = num(x, ln)?,
                    _ => return Err(err(format!("unsupported bound {raw:?}"))),
                }
            }
            _ => return Err(err(format!("data outside a known section: {raw:?}"))),
        }
    }
    for c in &mut model.constraints {
        c.terms.sort_by_key(|t| t.0);
    }
    Ok(model)
}
