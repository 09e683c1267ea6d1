//! Deterministic float formatting and CSV tables.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

/// Shortest representation that parses back to the same `f64`; scientific
/// notation outside `1e-5 ≤ |x| < 1e16`.
pub fn float(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// A CSV table built in memory and written in one go.
#[derive(Debug, Clone, PartialEq)]
pub struct Csv {
    text: String,
    columns: usize,
}

/// One CSV cell.
pub enum Cell<'a> {
    F(f64),
    U(usize),
    S(&'a str),
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self { text: format!("{}\n", header.join(",")), columns: header.len() }
    }

    pub fn row(&mut self, cells: &[Cell]) {
        debug_assert_eq!(cells.len(), self.columns);
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            match c {
                Cell::F(x) => self.text.push_str(&float(*x)),
                Cell::U(u) => write!(self.text, "{u}").unwrap(),
                Cell::S(s) => self.text.push_str(s),
            }
        }
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        std::fs::write(path, &self.text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-7, 6.02e23, 1e-5, 123456.789, f64::MIN_POSITIVE, 0.0] {
            assert_eq!(float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(float(0.1), "0.1");
        assert_eq!(float(1e-7), "1e-7");
        assert_eq!(float(2.0), "2");
        assert_eq!(float(1e20), "1e20");
    }

    #[test]
    fn rows_are_comma_separated() {
        let mut c = Csv::new(&["a", "b", "c"]);
        c.row(&[Cell::F(0.5), Cell::U(3), Cell::S("x")]);
        assert_eq!(c.as_str(), "a,b,c\n0.5,3,x\n");
    }
}
