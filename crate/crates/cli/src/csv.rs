//! Deterministic CSV: 17 significant digits in scientific notation, `,`
//! separators, `\n` line endings.

use std::fmt::Write;

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct CsvTable {
    text: String,
    columns: usize,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        CsvTable {
            text,
            columns: header.len(),
        }
    }

    pub fn push(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.columns, "row width must match the header");
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            write!(self.text, "{v:.16e}").expect("writing to a String cannot fail");
        }
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(format_float(0.5), "5.0000000000000000e-1");
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(-1234.5), "-1.2345000000000000e3");
        assert_eq!(format_float(f64::NAN), "NaN");
        let x = 1.0 / 3.0;
        assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn table_layout() {
        let mut t = CsvTable::new(&["a", "b"]);
        t.push(&[1.0, 2.0]);
        assert_eq!(
            t.into_string(),
            "a,b\n1.0000000000000000e0,2.0000000000000000e0\n"
        );
    }
}
