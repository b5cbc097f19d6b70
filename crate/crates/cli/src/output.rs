//! CSV tables and minimal SVG line plots.
//!
//! A CSV file carries a header row, a `# config ...` comment recording the
//! full configuration, then one row per sample with 17 significant digits.

use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self, config_line: &str) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        s.push_str("# config ");
        s.push_str(config_line);
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// Parses CSV text written by [`Table::to_csv`]; returns the table and the
/// recorded config line.
pub fn parse_csv(text: &str) -> CliResult<(Table, String)> {
    let config = text
        .lines()
        .find_map(|l| l.strip_prefix("# config "))
        .unwrap_or("")
        .to_string();
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let columns: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Csv(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::Csv(e.to_string()))?;
        let row = rec
            .iter()
            .map(|c| c.trim().parse::<f64>().map_err(|_| CliError::Csv(format!("bad number '{c}'"))))
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((Table { columns, rows }, config))
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 50.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// Renders every column after the first against the first. Resonance data
/// (per the recorded config) is drawn with a logarithmic y axis.
pub fn svg_from_csv(text: &str) -> CliResult<String> {
    let (table, config) = parse_csv(text)?;
    let log_y = config.split_whitespace().any(|kv| kv == "experiment=resonance");
    Ok(render_svg(&table, log_y))
}

fn render_svg(table: &Table, log_y: bool) -> String {
    let ty = |v: f64| if log_y { v.max(1e-300).log10() } else { v };
    let xs: Vec<f64> = table.rows.iter().map(|r| r[0]).collect();
    let ys: Vec<f64> = table.rows.iter().flat_map(|r| r[1..].iter().map(|v| ty(*v))).filter(|v| v.is_finite()).collect();
    let (x0, x1) = bounds(&xs);
    let (y0, y1) = bounds(&ys);
    let (pw, ph) = (WIDTH - MARGIN_L - MARGIN_R, HEIGHT - MARGIN_T - MARGIN_B);
    let px = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| MARGIN_T + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" font-family=\"sans-serif\" font-size=\"11\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"black\"/>\n"
    );
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let label_y = if log_y { format!("1e{fy:.1}") } else { format!("{fy:.3e}") };
        s.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{:.3}</text>\n",
            px(fx),
            HEIGHT - MARGIN_B + 16.0,
            fx
        ));
        s.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>\n",
            MARGIN_L - 6.0,
            py(fy) + 4.0,
            label_y
        ));
    }
    if let Some(name) = table.columns.first() {
        s.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>\n",
            MARGIN_L + pw / 2.0,
            HEIGHT - 10.0,
            escape(name)
        ));
    }
    for (k, name) in table.columns.iter().enumerate().skip(1) {
        let color = COLORS[(k - 1) % COLORS.len()];
        let pts: Vec<String> = table
            .rows
            .iter()
            .filter(|r| ty(r[k]).is_finite())
            .map(|r| format!("{:.2},{:.2}", px(r[0]), py(ty(r[k]))))
            .collect();
        s.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.2\" points=\"{}\"/>\n",
            pts.join(" ")
        ));
        let ly = MARGIN_T + 14.0 * k as f64;
        s.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{color}\" stroke-width=\"2\"/>\
             <text x=\"{:.2}\" y=\"{:.2}\">{}</text>\n",
            WIDTH - MARGIN_R + 10.0,
            WIDTH - MARGIN_R + 30.0,
            WIDTH - MARGIN_R + 34.0,
            ly + 4.0,
            escape(name)
        ));
    }
    s.push_str("</svg>\n");
    s
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// CSV and SVG renderings of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    pub table: Table,
    pub csv: String,
    pub svg: String,
}

impl Outputs {
    pub fn new(table: Table, config_line: &str) -> CliResult<Self> {
        let csv = table.to_csv(config_line);
        let svg = svg_from_csv(&csv)?;
        Ok(Outputs { table, csv, svg })
    }

    /// Writes the CSV to `path` and the plot next to it with extension `svg`.
    pub fn write(&self, path: &Path) -> CliResult<(PathBuf, PathBuf)> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        std::fs::write(path, &self.csv).map_err(|e| CliError::io(path, e))?;
        let svg_path = path.with_extension("svg");
        std::fs::write(&svg_path, &self.svg).map_err(|e| CliError::io(&svg_path, e))?;
        Ok((path.to_path_buf(), svg_path))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["h", "a", "b"]);
        t.push(vec![0.1, 1e-3, 2.0]);
        t.push(vec![0.2, 1e6, 0.1 + 0.2]);
        t
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let csv = sample().to_csv("experiment=resonance seed=1");
        let (back, config) = parse_csv(&csv).unwrap();
        assert_eq!(back, sample());
        assert_eq!(config, "experiment=resonance seed=1");
        assert!(csv.lines().nth(2).unwrap().starts_with("1.0000000000000001e-1,"));
    }

    #[test]
    fn svg_is_a_function_of_csv() {
        let csv = sample().to_csv("experiment=resonance");
        let a = svg_from_csv(&csv).unwrap();
        assert_eq!(a, svg_from_csv(&csv).unwrap());
        assert!(a.starts_with("<svg") && a.trim_end().ends_with("</svg>"));
        assert_eq!(a.matches("<polyline").count(), 2);
        assert!(a.contains("1e"));
        let lin = svg_from_csv(&sample().to_csv("experiment=fpu")).unwrap();
        assert_ne!(a, lin);
    }

    #[test]
    fn rejects_bad_numbers() {
        assert!(parse_csv("h,a\n# config x\n0.1,zz\n").is_err());
    }

    #[test]
    fn writes_both_files() {
        let dir = tempfile::tempdir().unwrap();
        let out = Outputs::new(sample(), "experiment=fpu").unwrap();
        let (c, s) = out.write(&dir.path().join("sub/run.csv")).unwrap();
        assert_eq!(std::fs::read_to_string(c).unwrap(), out.csv);
        assert_eq!(std::fs::read_to_string(s).unwrap(), out.svg);
    }
}
