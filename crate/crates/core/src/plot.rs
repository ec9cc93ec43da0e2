//! Deterministic SVG line charts from the harness CSV outputs.
//!
//! A chart draws one polyline per distinct value of the `series` column,
//! with a circle marker at every data point. With a `facet` column the chart
//! is split into side-by-side panels sharing both axes. Rows sharing the same
//! facet, series and x value are averaged, so filter away coordinates that
//! should not be pooled. Output bytes depend only on the input rows.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 300.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 16.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 52.0;
const LEGEND_W: f64 = 200.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub input: PathBuf,
    pub x: String,
    pub y: String,
    pub series: String,
    pub facet: Option<String>,
    /// `(column, value)` pairs a row must match to be plotted.
    pub filters: Vec<(String, String)>,
    pub output: PathBuf,
    pub title: Option<String>,
}

impl PlotSpec {
    pub fn new(input: impl Into<PathBuf>, x: &str, y: &str, output: impl Into<PathBuf>) -> Self {
        PlotSpec {
            input: input.into(),
            x: x.to_string(),
            y: y.to_string(),
            series: "strategy".to_string(),
            facet: None,
            filters: Vec::new(),
            output: output.into(),
            title: None,
        }
    }
}

/// A parsed CSV table: header names and string records.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
        let headers = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            rows.push(rec.iter().map(|f| f.trim().to_string()).collect());
        }
        Ok(Table { headers, rows })
    }

    fn column(&self, name: &str) -> Result<usize> {
        self.headers.iter().position(|h| h == name).ok_or_else(|| {
            Error::Plot(format!(
                "column '{name}' not found (available: {})",
                self.headers.join(", ")
            ))
        })
    }
}

struct Panel {
    label: Option<String>,
    // series name -> sorted (x, y) points
    series: Vec<(String, Vec<(f64, f64)>)>,
}

fn field_matches(field: &str, want: &str) -> bool {
    if field == want {
        return true;
    }
    match (field.parse::<f64>(), want.parse::<f64>()) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    }
}

fn parse_num(s: &str, col: &str, row: usize) -> Result<f64> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Plot(format!("row {row}: column '{col}' has non-numeric value '{s}'")))
}

/// Orders labels numerically when all parse as numbers, otherwise by first
/// appearance.
fn order_labels(labels: Vec<String>) -> Vec<String> {
    let numeric: Option<Vec<f64>> = labels.iter().map(|l| l.parse::<f64>().ok()).collect();
    match numeric {
        Some(vals) => {
            let mut idx: Vec<usize> = (0..labels.len()).collect();
            idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
            idx.into_iter().map(|i| labels[i].clone()).collect()
        }
        None => labels,
    }
}

/// Per x sort key: (x, sum of y, count), for averaging duplicate points.
type PointSums = BTreeMap<u64, (f64, f64, usize)>;

fn build_panels(table: &Table, spec: &PlotSpec) -> Result<Vec<Panel>> {
    if table.rows.is_empty() {
        return Err(Error::Plot(format!("{}: no data rows", spec.input.display())));
    }
    let xi = table.column(&spec.x)?;
    let yi = table.column(&spec.y)?;
    let si = table.column(&spec.series)?;
    let fi = spec.facet.as_deref().map(|f| table.column(f)).transpose()?;
    let filters = spec
        .filters
        .iter()
        .map(|(c, v)| Ok((table.column(c)?, v.as_str())))
        .collect::<Result<Vec<_>>>()?;

    let mut facet_order: Vec<String> = Vec::new();
    let mut series_order: Vec<String> = Vec::new();
    let mut acc: BTreeMap<(String, String), PointSums> = BTreeMap::new();
    let mut matched = 0usize;
    for (r, row) in table.rows.iter().enumerate() {
        let line = r + 2;
        let get = |i: usize| row.get(i).map(String::as_str).unwrap_or("");
        if !filters.iter().all(|&(c, v)| field_matches(get(c), v)) {
            continue;
        }
        matched += 1;
        let ytext = get(yi);
        if ytext.is_empty() {
            continue;
        }
        let x = parse_num(get(xi), &spec.x, line)?;
        let y = parse_num(ytext, &spec.y, line)?;
        let facet = fi.map(|i| get(i).to_string()).unwrap_or_default();
        let series = get(si).to_string();
        if !facet_order.contains(&facet) {
            facet_order.push(facet.clone());
        }
        if !series_order.contains(&series) {
            series_order.push(series.clone());
        }
        // normalize -0.0 so equal x values share a key
        let key = if x == 0.0 { 0.0f64 } else { x };
        let slot = acc
            .entry((facet, series))
            .or_default()
            .entry(sort_key(key))
            .or_insert((x, 0.0, 0));
        slot.1 += y;
        slot.2 += 1;
    }
    if matched == 0 {
        return Err(Error::Plot(format!(
            "{}: no data rows match the filters",
            spec.input.display()
        )));
    }
    if acc.is_empty() {
        return Err(Error::Plot(format!(
            "{}: column '{}' is empty in every selected row",
            spec.input.display(),
            spec.y
        )));
    }

    let facets = if fi.is_some() {
        order_labels(facet_order)
    } else {
        facet_order
    };
    Ok(facets
        .into_iter()
        .map(|facet| {
            let series = series_order
                .iter()
                .map(|s| {
                    let pts = acc
                        .get(&(facet.clone(), s.clone()))
                        .map(|m| m.values().map(|&(x, sum, n)| (x, sum / n as f64)).collect())
                        .unwrap_or_default();
                    (s.clone(), pts)
                })
                .collect();
            Panel {
                label: fi.map(|_| facet),
                series,
            }
        })
        .collect())
}

/// Maps an f64 to a u64 whose unsigned order matches the numeric order.
fn sort_key(x: f64) -> u64 {
    let b = x.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1 << 63)
    }
}

/// Tick positions covering `[lo, hi]` at a 1/2/5 step.
fn nice_ticks(lo: f64, hi: f64) -> (f64, f64, f64) {
    let span = (hi - lo).max(1e-12);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    ((lo / step).floor() * step, (hi / step).ceil() * step, step)
}

fn padded_range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in vals {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo == hi {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        (lo - pad, hi + pad)
    } else {
        (lo, hi)
    }
}

fn tick_label(v: f64, step: f64) -> String {
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let s = format!("{:.*}", decimals, v);
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

/// Renders `table` according to `spec` and returns the SVG document.
pub fn render_table(table: &Table, spec: &PlotSpec) -> Result<String> {
    let panels = build_panels(table, spec)?;
    let all = || {
        panels
            .iter()
            .flat_map(|p| p.series.iter().flat_map(|(_, pts)| pts.iter()))
    };
    let (x_lo, x_hi, x_step) = {
        let (lo, hi) = padded_range(all().map(|p| p.0));
        nice_ticks(lo, hi)
    };
    let (y_lo, y_hi, y_step) = {
        let (lo, hi) = padded_range(all().map(|p| p.1));
        nice_ticks(lo, hi)
    };

    let series_names: Vec<&str> = panels[0].series.iter().map(|(s, _)| s.as_str()).collect();
    let cell_w = MARGIN_L + PANEL_W + MARGIN_R;
    let width = cell_w * panels.len() as f64 + LEGEND_W;
    let height = MARGIN_T + PANEL_H + MARGIN_B;

    let mut svg = String::new();
    let w = &mut svg;
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        w,
        r#"<rect x="0" y="0" width="{width:.0}" height="{height:.0}" fill="white"/>"#
    );
    if let Some(t) = &spec.title {
        let _ = writeln!(
            w,
            r#"<text x="{:.2}" y="18" text-anchor="middle" font-size="15">{}</text>"#,
            width / 2.0,
            escape(t)
        );
    }

    for (pi, panel) in panels.iter().enumerate() {
        let ox = pi as f64 * cell_w + MARGIN_L;
        let oy = MARGIN_T;
        let px = |x: f64| ox + (x - x_lo) / (x_hi - x_lo) * PANEL_W;
        let py = |y: f64| oy + PANEL_H - (y - y_lo) / (y_hi - y_lo) * PANEL_H;

        let _ = writeln!(w, r#"<g class="panel" id="panel-{pi}">"#);
        if let (Some(label), Some(facet)) = (&panel.label, &spec.facet) {
            let _ = writeln!(
                w,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13">{} = {}</text>"#,
                ox + PANEL_W / 2.0,
                oy - 8.0,
                escape(facet),
                escape(label)
            );
        }

        // grid and ticks
        let nx = ((x_hi - x_lo) / x_step).round() as usize;
        for i in 0..=nx {
            let v = x_lo + i as f64 * x_step;
            let x = px(v);
            let _ = writeln!(
                w,
                r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#e0e0e0"/>"##,
                oy,
                oy + PANEL_H
            );
            let _ = writeln!(
                w,
                r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                oy + PANEL_H + 16.0,
                tick_label(v, x_step)
            );
        }
        let ny = ((y_hi - y_lo) / y_step).round() as usize;
        for i in 0..=ny {
            let v = y_lo + i as f64 * y_step;
            let y = py(v);
            let _ = writeln!(
                w,
                r##"<line x1="{ox:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e0e0e0"/>"##,
                ox + PANEL_W
            );
            let _ = writeln!(
                w,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                ox - 6.0,
                y + 4.0,
                tick_label(v, y_step)
            );
        }

        // axes
        let _ = writeln!(
            w,
            r#"<line x1="{ox:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#,
            oy + PANEL_H,
            ox + PANEL_W,
            oy + PANEL_H
        );
        let _ = writeln!(
            w,
            r#"<line x1="{ox:.2}" y1="{oy:.2}" x2="{ox:.2}" y2="{:.2}" stroke="black"/>"#,
            oy + PANEL_H
        );
        let _ = writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            ox + PANEL_W / 2.0,
            oy + PANEL_H + 38.0,
            escape(&spec.x)
        );
        let (lx, ly) = (ox - 48.0, oy + PANEL_H / 2.0);
        let _ = writeln!(
            w,
            r#"<text x="{lx:.2}" y="{ly:.2}" text-anchor="middle" transform="rotate(-90 {lx:.2} {ly:.2})">{}</text>"#,
            escape(&spec.y)
        );

        for (si, (name, pts)) in panel.series.iter().enumerate() {
            if pts.is_empty() {
                continue;
            }
            let color = PALETTE[si % PALETTE.len()];
            let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
            let _ = writeln!(
                w,
                r#"<polyline class="series" data-series="{}" fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
                escape(name),
                coords.join(" ")
            );
            for &(x, y) in pts {
                let _ = writeln!(
                    w,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                    px(x),
                    py(y)
                );
            }
        }
        let _ = writeln!(w, "</g>");
    }

    // legend
    let lx = cell_w * panels.len() as f64 + 8.0;
    let _ = writeln!(w, r#"<g class="legend">"#);
    for (si, name) in series_names.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let y = MARGIN_T + 10.0 + si as f64 * 20.0;
        let _ = writeln!(
            w,
            r#"<line x1="{lx:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="3"/>"#,
            lx + 24.0
        );
        let _ = writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 30.0,
            y + 4.0,
            escape(name)
        );
    }
    let _ = writeln!(w, "</g>");
    let _ = writeln!(w, "</svg>");
    Ok(svg)
}

/// Reads the input CSV and returns the SVG document.
pub fn render(spec: &PlotSpec) -> Result<String> {
    let table = Table::read(&spec.input)?;
    render_table(&table, spec)
}

/// Renders and writes the SVG to `spec.output`.
pub fn plot(spec: &PlotSpec) -> Result<()> {
    let svg = render(spec)?;
    if let Some(dir) = spec.output.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(&spec.output, svg).map_err(|e| Error::io(&spec.output, e))
}
