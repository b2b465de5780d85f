//! Structured text reports: `key = value` lines in a stable, hardcoded
//! order, floats always at 17 significant digits. Fixed ordering plus
//! deterministic solvers make report files byte-reproducible, so golden
//! tests can compare them directly. Wall-clock timing is opt-in because it
//! would break that reproducibility.

use crate::io::format_f64;

#[derive(Debug, Default)]
pub struct Report {
    lines: Vec<String>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn str(&mut self, key: &str, value: &str) -> &mut Self {
        self.lines.push(format!("{key} = {value}"));
        self
    }

    pub fn f64(&mut self, key: &str, value: f64) -> &mut Self {
        self.lines.push(format!("{key} = {}", format_f64(value)));
        self
    }

    pub fn usize(&mut self, key: &str, value: usize) -> &mut Self {
        self.lines.push(format!("{key} = {value}"));
        self
    }

    pub fn bool(&mut self, key: &str, value: bool) -> &mut Self {
        self.lines.push(format!("{key} = {value}"));
        self
    }

    pub fn f64_array(&mut self, key: &str, values: &[f64]) -> &mut Self {
        let body: Vec<String> = values.iter().map(|&v| format_f64(v)).collect();
        self.lines.push(format!("{key} = [{}]", body.join(", ")));
        self
    }

    pub fn render(&self) -> String {
        let mut out = self.lines.join("\n");
        out.push('\n');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_rendering() {
        let mut r = Report::new();
        r.str("method", "agw")
            .f64("alpha", 0.5)
            .bool("converged", true)
            .f64_array("trajectory", &[1.0, 0.25]);
        assert_eq!(
            r.render(),
            "method = agw\nalpha = 5.0000000000000000e-1\nconverged = true\n\
             trajectory = [1.0000000000000000e0, 2.5000000000000000e-1]\n"
        );
    }
}
