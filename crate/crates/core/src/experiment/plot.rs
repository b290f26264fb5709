//! Minimal SVG line plots of error histories on a logarithmic y axis.

use std::fmt::Write as _;
use std::path::Path;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotStyle {
    pub width: u32,
    pub height: u32,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Longer curves are thinned to this many points by a fixed stride.
    pub max_points: usize,
}

impl Default for PlotStyle {
    fn default() -> Self {
        Self {
            width: 800,
            height: 500,
            title: String::new(),
            x_label: "t".into(),
            y_label: "error".into(),
            max_points: 4000,
        }
    }
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 130.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Reads `(t, column)` pairs from a CSV with a header row.
pub fn read_curve(path: &Path, column: &str) -> Result<Curve> {
    let file = path.display().to_string();
    let err = |line: usize, message: String| Error::Parse {
        file: file.clone(),
        line,
        message,
    };
    let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(io) => err(0, io.to_string()),
        _ => err(0, e.to_string()),
    })?;
    let headers = rdr.headers().map_err(|e| err(1, e.to_string()))?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| err(1, format!("missing column `{name}`")))
    };
    let (ti, ci) = (find("t")?, find(column)?);
    let mut points = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let num = |i: usize| -> Result<f64> {
            let s = rec.get(i).unwrap_or("");
            s.trim()
                .parse()
                .map_err(|_| err(line, format!("not a number: `{s}`")))
        };
        points.push((num(ti)?, num(ci)?));
    }
    if points.is_empty() {
        return Err(err(1, "no data rows".into()));
    }
    let label = path
        .file_stem()
        .map_or_else(|| file.clone(), |s| s.to_string_lossy().into_owned());
    Ok(Curve { label, points })
}

/// Renders the curves as an SVG document. Points with non-positive or
/// non-finite values are dropped, since the y axis is logarithmic.
pub fn emit_plot(curves: &[Curve], style: &PlotStyle) -> Result<String> {
    if curves.is_empty() {
        return Err(Error::InvalidParameter("nothing to plot: empty curve list".into()));
    }
    let usable: Vec<Vec<(f64, f64)>> = curves
        .iter()
        .map(|c| {
            c.points
                .iter()
                .copied()
                .filter(|(x, y)| x.is_finite() && y.is_finite() && *y > 0.0)
                .collect()
        })
        .collect();
    let all = usable.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        return Err(Error::InvalidParameter("no positive finite values to plot".into()));
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    let (d0, mut d1) = (y0.log10().floor(), y1.log10().ceil());
    if d1 == d0 {
        d1 = d0 + 1.0;
    }

    let (w, h) = (style.width as f64, style.height as f64);
    let (pw, ph) = (w - MARGIN_LEFT - MARGIN_RIGHT, h - MARGIN_TOP - MARGIN_BOTTOM);
    let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| MARGIN_TOP + (d1 - y.log10()) / (d1 - d0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}" font-family="sans-serif" font-size="12">"#,
        style.width, style.height, style.width, style.height
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if !style.title.is_empty() {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            MARGIN_LEFT + pw / 2.0,
            escape(&style.title)
        );
    }

    // decades on y, five even ticks on x
    for d in (d0 as i32)..=(d1 as i32) {
        let y = sy(10f64.powi(d));
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##,
            MARGIN_LEFT,
            MARGIN_LEFT + pw
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"#,
            MARGIN_LEFT - 6.0,
            y + 4.0
        );
    }
    for i in 0..=5 {
        let xv = x0 + (x1 - x0) * i as f64 / 5.0;
        let x = sx(xv);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#dddddd"/>"##,
            MARGIN_TOP,
            MARGIN_TOP + ph
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            MARGIN_TOP + ph + 18.0,
            format_tick(xv)
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN_LEFT:.2}" y="{MARGIN_TOP:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + pw / 2.0,
        h - 12.0,
        escape(&style.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        MARGIN_TOP + ph / 2.0,
        MARGIN_TOP + ph / 2.0,
        escape(&style.y_label)
    );

    for (i, (curve, pts)) in curves.iter().zip(&usable).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let stride = pts.len().div_ceil(style.max_points.max(2)).max(1);
        let mut path = String::new();
        for (j, &(x, y)) in pts.iter().enumerate() {
            if j % stride == 0 || j + 1 == pts.len() {
                let _ = write!(path, "{:.2},{:.2} ", sx(x), sy(y));
            }
        }
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            path.trim_end()
        );
        let ly = MARGIN_TOP + 14.0 + 18.0 * i as f64;
        let lx = MARGIN_LEFT + pw + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(&curve.label)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn format_tick(v: f64) -> String {
    let r = (v * 1000.0).round() / 1000.0;
    if r == r.trunc() {
        format!("{}", r as i64)
    } else {
        format!("{r}")
    }
}
