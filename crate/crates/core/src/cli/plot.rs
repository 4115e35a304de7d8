//! Minimal deterministic SVG line plots of CSV columns.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::report::write_file;
use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axes {
    Linear,
    SemilogY,
    LogLog,
}

impl FromStr for Axes {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(Axes::Linear),
            "semilogy" => Ok(Axes::SemilogY),
            "loglog" => Ok(Axes::LogLog),
            _ => Err(format!("unknown axes '{s}' (expected linear, semilogy or loglog)")),
        }
    }
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 450.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Header and numeric columns of a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

pub fn parse_csv(text: &str) -> Result<Table, CliError> {
    let malformed = |m: String| CliError::MalformedCsv(m);
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> =
        lines.next().ok_or_else(|| malformed("empty file".into()))?.split(',').map(|s| s.trim().to_string()).collect();
    if header.len() < 2 {
        return Err(malformed("need at least two columns".into()));
    }
    let mut columns = vec![Vec::new(); header.len()];
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != header.len() {
            return Err(malformed(format!("row {} has {} fields, expected {}", i + 2, fields.len(), header.len())));
        }
        for (col, f) in columns.iter_mut().zip(fields) {
            let v: f64 = f
                .trim()
                .parse()
                .map_err(|_| malformed(format!("non-numeric field '{}' in row {}", f.trim(), i + 2)))?;
            col.push(v);
        }
    }
    if columns[0].is_empty() {
        return Err(malformed("no data rows".into()));
    }
    Ok(Table { header, columns })
}

struct Scale {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Scale {
    fn new(values: impl Iterator<Item = f64>, log: bool) -> Option<Scale> {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            if let Some(t) = transform(v, log) {
                lo = lo.min(t);
                hi = hi.max(t);
            }
        }
        if !lo.is_finite() {
            return None;
        }
        if hi - lo < 1e-12 * lo.abs().max(1.0) {
            lo -= 0.5;
            hi += 0.5;
        }
        Some(Scale { lo, hi, log })
    }

    fn unit(&self, v: f64) -> Option<f64> {
        transform(v, self.log).map(|t| (t - self.lo) / (self.hi - self.lo))
    }

    /// Tick positions in transformed units with labels.
    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let (a, b) = (self.lo.ceil() as i64, self.hi.floor() as i64);
            let step = ((b - a) / 8).max(1);
            (a..=b).step_by(step as usize).map(|e| (e as f64, format!("1e{e}"))).collect()
        } else {
            let raw = (self.hi - self.lo) / 5.0;
            let mag = 10f64.powf(raw.log10().floor());
            let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
            let first = (self.lo / step).ceil() as i64;
            let last = (self.hi / step).floor() as i64;
            (first..=last)
                .map(|i| {
                    let v = i as f64 * step;
                    (v, format_tick(v))
                })
                .collect()
        }
    }
}

fn transform(v: f64, log: bool) -> Option<f64> {
    if !v.is_finite() {
        None
    } else if log {
        (v > 0.0).then(|| v.log10())
    } else {
        Some(v)
    }
}

fn format_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Renders every column after the first against the first.
pub fn render_svg(table: &Table, axes: Axes) -> Result<String, CliError> {
    let x = &table.columns[0];
    let sx = Scale::new(x.iter().copied(), axes == Axes::LogLog)
        .ok_or_else(|| CliError::MalformedCsv("no plottable x values".into()))?;
    let sy = Scale::new(table.columns[1..].iter().flatten().copied(), axes != Axes::Linear)
        .ok_or_else(|| CliError::MalformedCsv("no plottable y values".into()))?;
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let px = |u: f64| LEFT + u * pw;
    let py = |u: f64| TOP + (1.0 - u) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for (t, label) in sx.ticks() {
        let u = (t - sx.lo) / (sx.hi - sx.lo);
        let xp = px(u);
        let _ = writeln!(
            svg,
            r#"<line x1="{xp:.2}" y1="{:.2}" x2="{xp:.2}" y2="{:.2}" stroke="black"/><text x="{xp:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 20.0
        );
    }
    for (t, label) in sy.ticks() {
        let u = (t - sy.lo) / (sy.hi - sy.lo);
        let yp = py(u);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{yp:.2}" x2="{LEFT:.2}" y2="{yp:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            yp + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0,
        escape(&table.header[0])
    );
    for (k, col) in table.columns[1..].iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        // split the polyline wherever a point cannot be drawn on these axes
        let mut segment = Vec::new();
        let flush = |segment: &mut Vec<String>, svg: &mut String| {
            if segment.len() > 1 {
                let _ = writeln!(
                    svg,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                    segment.join(" ")
                );
            }
            segment.clear();
        };
        for (&xv, &yv) in x.iter().zip(col) {
            match (sx.unit(xv), sy.unit(yv)) {
                (Some(ux), Some(uy)) => segment.push(format!("{:.2},{:.2}", px(ux), py(uy))),
                _ => flush(&mut segment, &mut svg),
            }
        }
        flush(&mut segment, &mut svg);
        let ly = TOP + 15.0 + 18.0 * k as f64;
        let lx = LEFT + pw + 10.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 20.0,
            lx + 25.0,
            ly + 4.0,
            escape(&table.header[k + 1])
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Reads `csv_path` and writes an SVG plot to `svg_path`.
pub fn emit_plot(csv_path: &Path, svg_path: &Path, axes: Axes) -> Result<(), CliError> {
    let text = std::fs::read_to_string(csv_path)
        .map_err(|e| CliError::Io { path: csv_path.to_path_buf(), message: e.to_string() })?;
    let table = parse_csv(&text)?;
    write_file(svg_path, &render_svg(&table, axes)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_csv_is_malformed() {
        assert!(matches!(parse_csv(""), Err(CliError::MalformedCsv(_))));
        assert!(matches!(parse_csv("t,E\n"), Err(CliError::MalformedCsv(_))));
        assert!(matches!(parse_csv("t,E\n1,x\n"), Err(CliError::MalformedCsv(_))));
    }

    #[test]
    fn columns_and_determinism() {
        let text = "t,E,D\n0,1,0\n1,0.5,0.5\n2,0.25,0.75\n";
        let table = parse_csv(text).unwrap();
        assert_eq!(table.columns.len(), 3);
        let a = render_svg(&table, Axes::SemilogY).unwrap();
        let b = render_svg(&table, Axes::SemilogY).unwrap();
        assert_eq!(a, b);
        // D = 0 cannot be drawn on a log axis; E and D are both still present
        assert_eq!(a.matches("<polyline").count(), 2);
        assert!(a.contains(">D</text>"));
        assert!(render_svg(&table, Axes::LogLog).is_ok());
    }
}
