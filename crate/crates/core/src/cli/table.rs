use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;

/// Rounds to `digits` significant digits and prints the shortest form.
pub fn fmt_num(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{:.*e}", digits.max(1) - 1, x)
        .parse()
        .expect("formatted float parses");
    let mag = rounded.abs();
    if rounded == 0.0 {
        "0".into()
    } else if !(1e-5..1e16).contains(&mag) {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    }
}

fn quote(cell: &str) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

/// One CSV block: `#` metadata lines, a header row and data rows.
#[derive(Debug, Clone, Default)]
pub struct Table {
    meta: Vec<String>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            header: columns.iter().map(|c| c.to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn meta(&mut self, line: impl Into<String>) -> &mut Self {
        self.meta.push(line.into());
        self
    }

    pub fn meta_lines(&mut self, lines: &[String]) -> &mut Self {
        self.meta.extend(lines.iter().cloned());
        self
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for m in &self.meta {
            let _ = writeln!(s, "# {m}");
        }
        let line = |cells: &[String]| cells.iter().map(|c| quote(c)).collect::<Vec<_>>().join(",");
        let _ = writeln!(s, "{}", line(&self.header));
        for r in &self.rows {
            let _ = writeln!(s, "{}", line(r));
        }
        s
    }
}

/// Files produced by a command, written only once everything is computed.
#[derive(Debug, Default)]
pub struct Output {
    files: Vec<(PathBuf, String)>,
}

impl Output {
    pub fn push(&mut self, path: impl Into<PathBuf>, text: String) {
        self.files.push((path.into(), text));
    }

    /// Writes every file; on failure the files already written are removed.
    pub fn commit(self) -> Result<()> {
        let mut written: Vec<&Path> = Vec::new();
        for (path, text) in &self.files {
            let res = match path.parent() {
                Some(dir) if !dir.as_os_str().is_empty() => fs::create_dir_all(dir),
                _ => Ok(()),
            }
            .and_then(|_| fs::write(path, text));
            if let Err(e) = res {
                for p in written.iter().chain(std::iter::once(&path.as_path())) {
                    let _ = fs::remove_file(p);
                }
                return Err(e.into());
            }
            written.push(path);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_num(std::f64::consts::PI, 15), "3.14159265358979");
        assert_eq!(fmt_num(0.1, 15), "0.1");
        assert_eq!(fmt_num(-0.0, 15), "0");
        assert_eq!(fmt_num(123456.0, 3), "123000");
        assert_eq!(fmt_num(f64::NEG_INFINITY, 15), "-inf");
        assert_eq!(fmt_num(-1.43227208048663e-14, 15), "-1.43227208048663e-14");
    }

    #[test]
    fn renders_meta_header_rows() {
        let mut t = Table::new(&["a", "b"]);
        t.meta("x=1");
        t.row(vec!["1".into(), "2".into()]);
        t.row(vec!["p, q".into(), "3".into()]);
        assert_eq!(t.render(), "# x=1\na,b\n1,2\n\"p, q\",3\n");
    }
}
