//! CSV tables, `key: value` summaries and two-column plot series.
//!
//! Every table starts with the columns `model,d,j,l,q`; parameters that do
//! not apply to a row are written as `na`.

use std::fmt::Display;
use std::fs;
use std::path::Path;

use crate::fit::DecayFit;
use crate::CliError;

pub const KEY_COLUMNS: [&str; 5] = ["model", "d", "j", "l", "q"];
pub const NA: &str = "na";

/// The parameter tuple carried by every row.
#[derive(Debug, Clone, PartialEq)]
pub struct RowKey {
    pub model: String,
    pub d: Option<usize>,
    pub j: Option<usize>,
    pub l: Option<usize>,
    pub q: Option<f64>,
}

impl RowKey {
    pub fn new(model: impl Into<String>) -> Self {
        Self {
            model: model.into(),
            d: None,
            j: None,
            l: None,
            q: None,
        }
    }

    pub fn d(mut self, d: usize) -> Self {
        self.d = Some(d);
        self
    }

    pub fn j(mut self, j: usize) -> Self {
        self.j = Some(j);
        self
    }

    pub fn l(mut self, l: usize) -> Self {
        self.l = Some(l);
        self
    }

    pub fn q(mut self, q: f64) -> Self {
        self.q = Some(q);
        self
    }

    fn cells(&self) -> [String; 5] {
        [
            self.model.clone(),
            opt(self.d),
            opt(self.j),
            opt(self.l),
            self.q.map(num).unwrap_or_else(|| NA.into()),
        ]
    }
}

fn opt<T: Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| NA.into())
}

/// Shortest round-trip rendering, so equal values always print identically.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x:e}")
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_else(|| NA.into())
}

#[derive(Debug, Clone)]
pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    /// A table with the key columns followed by `extra`.
    pub fn new(extra: &[&str]) -> Self {
        Self {
            columns: KEY_COLUMNS.iter().chain(extra).map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, key: &RowKey, values: Vec<String>) {
        assert_eq!(
            KEY_COLUMNS.len() + values.len(),
            self.columns.len(),
            "row width does not match the header"
        );
        let mut row: Vec<String> = key.cells().into();
        row.extend(values);
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner()
            .map_err(|e| CliError::Runtime(format!("csv buffer: {e}")))
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        fs::write(path, self.to_csv_bytes()?)?;
        Ok(())
    }
}

/// Ordered `key: value` lines.
#[derive(Debug, Clone, Default)]
pub struct Summary {
    lines: Vec<(String, String)>,
}

impl Summary {
    pub fn put(&mut self, key: impl Into<String>, value: impl Display) {
        self.lines.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.lines.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.lines.iter().map(|(k, v)| format!("{k}: {v}\n")).collect()
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        fs::write(path, self.render())?;
        Ok(())
    }
}

/// Writes `<stem>.csv` with the data and, when a fit is given,
/// `<stem>_fit.csv` with the fitted curve at the same abscissae.
pub fn write_series(
    dir: &Path,
    stem: &str,
    labels: (&str, &str),
    points: &[(f64, f64)],
    fit: Option<&DecayFit>,
) -> Result<(), CliError> {
    let mut data = format!("{},{}\n", labels.0, labels.1);
    for (x, y) in points {
        data += &format!("{},{}\n", num(*x), num(*y));
    }
    fs::write(dir.join(format!("{stem}.csv")), data)?;
    if let Some(f) = fit {
        let mut line = format!("{},fitted\n", labels.0);
        for (x, _) in points {
            line += &format!("{},{}\n", num(*x), num(f.predict(*x)));
        }
        fs::write(dir.join(format!("{stem}_fit.csv")), line)?;
    }
    Ok(())
}

/// File-name-safe form of a model label.
pub fn slug(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect::<String>()
        .trim_matches('_')
        .to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_carry_key_columns() {
        let mut t = Table::new(&["value"]);
        t.push(&RowKey::new("tfi(h=2,g=1)").d(4).j(2), vec![num(0.5)]);
        let text = String::from_utf8(t.to_csv_bytes().unwrap()).unwrap();
        assert_eq!(text, "model,d,j,l,q,value\n\"tfi(h=2,g=1)\",4,2,na,na,5e-1\n");
    }

    #[test]
    fn summary_lines() {
        let mut s = Summary::default();
        s.put("a", 1);
        s.put("b.c", "x");
        assert_eq!(s.render(), "a: 1\nb.c: x\n");
        assert_eq!(s.get("b.c"), Some("x"));
    }

    #[test]
    fn slug_is_file_safe() {
        assert_eq!(slug("tfi(h=2,g=1)"), "tfi_h_2_g_1");
    }
}
