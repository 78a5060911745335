//! Plot-ready text outputs: whitespace-delimited columns under a `#` header,
//! plus optional gnuplot scripts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{read_text, write_text, Error, Result};

/// Column table with a `# name name ...` header line.
pub fn format_table(columns: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = format!("# {}\n", columns.join(" "));
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        let fields: Vec<String> = row.iter().map(f64::to_string).collect();
        writeln!(out, "{}", fields.join(" ")).unwrap();
    }
    out
}

pub fn write_table(path: &Path, columns: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    write_text(path, &format_table(columns, rows))
}

/// Numeric rows of a table file; `#` lines and blank lines are skipped.
pub fn parse_table(text: &str, source_name: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    let mut width = None;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse { source_name: source_name.to_string(), line: i + 1, message };
        let row = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| err(format!("`{t}` is not a number"))))
            .collect::<Result<Vec<f64>>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => return Err(err(format!("expected {w} columns, found {}", row.len()))),
            Some(_) => {}
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_table(path: &Path) -> Result<Vec<Vec<f64>>> {
    parse_table(&read_text(path)?, &path.display().to_string())
}

/// `path` with `suffix` appended to its file name: `run.toml` -> `run.toml.loss.dat`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    path.with_file_name(name)
}

/// Gnuplot script drawing column `y` against column `x` (1-based) of `data`.
pub fn gnuplot_script(data: &Path, title: &str, xlabel: &str, ylabel: &str, x: usize, y: usize) -> String {
    let file = data.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    format!(
        "set title \"{title}\"\nset xlabel \"{xlabel}\"\nset ylabel \"{ylabel}\"\n\
         plot \"{file}\" using {x}:{y} with lines notitle\npause -1\n"
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_parse_back() {
        let text = format_table(&["t", "x"], [vec![0.0, 1.5], vec![0.1, -2.25e-17]]);
        assert!(text.starts_with("# t x\n"));
        assert_eq!(parse_table(&text, "mem").unwrap(), vec![vec![0.0, 1.5], vec![0.1, -2.25e-17]]);
        assert!(matches!(parse_table("1 2\n3\n", "m"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn sibling_appends_to_the_file_name() {
        assert_eq!(sibling(Path::new("out/run.toml"), ".loss.dat"), Path::new("out/run.toml.loss.dat"));
    }
}
