//! CSV assembly with round-trip-exact numeric formatting.

use std::path::Path;

use crate::CliError;

/// 17 significant digits: parses back to the identical double.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub struct Csv {
    lines: Vec<String>,
}

impl Csv {
    /// `reproducible` suppresses the timestamp comment so identical
    /// inputs produce identical bytes.
    pub fn new(columns: &[&str], reproducible: bool) -> Self {
        let mut lines = Vec::new();
        if !reproducible {
            let now = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            lines.push(format!("# generated at unix time {now}"));
        }
        lines.push(columns.join(","));
        Csv { lines }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.lines.push(fields.join(","));
    }

    pub fn to_string(&self) -> String {
        let mut s = self.lines.join("\n");
        s.push('\n');
        s
    }

    pub fn write(&self, path: Option<&Path>) -> Result<(), CliError> {
        let text = self.to_string();
        match path {
            Some(p) => std::fs::write(p, text)
                .map_err(|e| CliError::Config(format!("cannot write {}: {e}", p.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatted_doubles_round_trip() {
        for v in [
            0.1,
            -3.5e-9,
            550.4,
            std::f64::consts::PI,
            1.0 / 3.0,
            2.5066282746310005,
        ] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
    }

    #[test]
    fn reproducible_output_has_no_timestamp() {
        let mut csv = Csv::new(&["a", "b"], true);
        csv.row(&["1".into(), "2".into()]);
        assert_eq!(csv.to_string(), "a,b\n1,2\n");
    }
}
