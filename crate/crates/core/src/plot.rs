//! Static SVG plots: loss curves on a log axis and 2-D trajectories.
//!
//! Each series becomes one `<polyline>` with exactly one vertex per input
//! point, so a plotted trace has as many vertices as recorded rows.

use std::fmt::Write as _;

use crate::harness::{RaceTable, RunRecord};
use crate::output::TraceTable;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 6] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Losses at or below zero are drawn at this floor on the log axis.
pub const LOG_FLOOR: f64 = 1e-16;

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series { name: name.into(), points }
    }

    pub fn loss(record: &RunRecord) -> Self {
        Series::new(
            record.optimizer.id(),
            record.rows.iter().map(|r| (r.t as f64, r.loss)).collect(),
        )
    }

    /// `None` unless the run is two-dimensional.
    pub fn trajectory(record: &RunRecord) -> Option<Self> {
        (record.dim == 2).then(|| {
            Series::new(
                record.optimizer.id(),
                record.rows.iter().map(|r| (r.theta[0], r.theta[1])).collect(),
            )
        })
    }

    /// Loss series from a parsed trace. Rows with an empty loss are skipped.
    pub fn loss_from_table(name: &str, table: &TraceTable) -> Option<Self> {
        let t = table.column("t")?;
        let loss = table.column("loss")?;
        let points = t.into_iter().zip(loss).filter_map(|(t, l)| Some((t?, l?))).collect();
        Some(Series::new(name, points))
    }

    pub fn trajectory_from_table(name: &str, table: &TraceTable) -> Option<Self> {
        if table.dim() != 2 {
            return None;
        }
        let x = table.column("theta_0")?;
        let y = table.column("theta_1")?;
        let points = x.into_iter().zip(y).filter_map(|(x, y)| Some((x?, y?))).collect();
        Some(Series::new(name, points))
    }
}

#[derive(Clone, Copy, Debug)]
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit(points: impl Iterator<Item = (f64, f64)>) -> Self {
        let mut f = Frame { x0: f64::INFINITY, x1: f64::NEG_INFINITY, y0: f64::INFINITY, y1: f64::NEG_INFINITY };
        for (x, y) in points.filter(|(x, y)| x.is_finite() && y.is_finite()) {
            f.x0 = f.x0.min(x);
            f.x1 = f.x1.max(x);
            f.y0 = f.y0.min(y);
            f.y1 = f.y1.max(y);
        }
        if !f.x0.is_finite() {
            return Frame { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 };
        }
        let pad = |lo: f64, hi: f64| if hi - lo < 1e-12 { (lo - 0.5, hi + 0.5) } else { (lo, hi) };
        (f.x0, f.x1) = pad(f.x0, f.x1);
        (f.y0, f.y1) = pad(f.y0, f.y1);
        f
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn open(out: &mut String, title: &str) {
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    )
    .unwrap();
}

fn axes(out: &mut String, frame: &Frame, x_label: &str, y_label: &str, y_tick: impl Fn(f64) -> String) {
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    writeln!(out, r#"<path d="M{l} {t} L{l} {b} L{r} {b}" fill="none" stroke="black"/>"#).unwrap();
    for (y, anchor) in [(frame.y0, b), (frame.y1, t)] {
        writeln!(
            out,
            r#"<text x="{}" y="{anchor}" text-anchor="end" font-family="sans-serif" font-size="11">{}</text>"#,
            l - 4.0,
            y_tick(y)
        )
        .unwrap();
    }
    for (x, pos) in [(frame.x0, l), (frame.x1, r)] {
        writeln!(
            out,
            r#"<text x="{pos}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="11">{}</text>"#,
            b + 14.0,
            tick(x)
        )
        .unwrap();
    }
    writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="14" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 14 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    )
    .unwrap();
}

fn tick(x: f64) -> String {
    if x != 0.0 && (x.abs() >= 1e4 || x.abs() < 1e-2) {
        format!("{x:.1e}")
    } else {
        format!("{x:.2}")
    }
}

fn polylines(out: &mut String, frame: &Frame, series: &[Series], map_y: impl Fn(f64) -> f64) {
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.3},{:.3}", frame.px(x), frame.py(map_y(y))))
            .collect();
        writeln!(
            out,
            r#"<polyline data-series="{}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            escape(&s.name),
            pts.join(" ")
        )
        .unwrap();
        let ly = MARGIN + 4.0 + 16.0 * i as f64;
        writeln!(
            out,
            r#"<text x="{}" y="{ly}" fill="{color}" font-family="sans-serif" font-size="12">{}</text>"#,
            WIDTH - MARGIN - 90.0,
            escape(&s.name)
        )
        .unwrap();
    }
}

fn log_loss(y: f64) -> f64 {
    if y.is_nan() {
        LOG_FLOOR.log10()
    } else {
        y.max(LOG_FLOOR).log10()
    }
}

/// Loss against step on a log10 axis.
pub fn loss_curves_svg(title: &str, series: &[Series]) -> String {
    let frame = Frame::fit(series.iter().flat_map(|s| s.points.iter().map(|&(x, y)| (x, log_loss(y)))));
    let mut out = String::new();
    open(&mut out, title);
    axes(&mut out, &frame, "step", "loss (log10)", |y| format!("1e{y:.1}"));
    polylines(&mut out, &frame, series, log_loss);
    out.push_str("</svg>\n");
    out
}

/// Parameter-space paths, with the optimum marked by a cross when given.
pub fn trajectory_svg(title: &str, series: &[Series], optimum: Option<(f64, f64)>) -> String {
    let pts = series.iter().flat_map(|s| s.points.iter().copied()).chain(optimum);
    let frame = Frame::fit(pts);
    let mut out = String::new();
    open(&mut out, title);
    axes(&mut out, &frame, "theta_0", "theta_1", tick);
    polylines(&mut out, &frame, series, |y| y);
    if let Some((x, y)) = optimum {
        let (cx, cy) = (frame.px(x), frame.py(y));
        writeln!(
            out,
            r#"<path class="optimum" d="M{:.3} {:.3} L{:.3} {:.3} M{:.3} {:.3} L{:.3} {:.3}" stroke="orange" stroke-width="2"/>"#,
            cx - 6.0,
            cy - 6.0,
            cx + 6.0,
            cy + 6.0,
            cx - 6.0,
            cy + 6.0,
            cx + 6.0,
            cy - 6.0
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

/// Loss curves and, for 2-D objectives, the trajectory overlay of a race.
pub fn race_svgs(table: &RaceTable, optimum: Option<(f64, f64)>) -> (String, Option<String>) {
    let losses: Vec<Series> = table.records.iter().map(Series::loss).collect();
    let paths: Option<Vec<Series>> = table.records.iter().map(Series::trajectory).collect();
    (
        loss_curves_svg(&format!("{} loss", table.objective), &losses),
        paths.map(|p| trajectory_svg(&format!("{} trajectories", table.objective), &p, optimum)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{run, RunSpec};
    use crate::objectives::ToyFunction;

    fn vertex_counts(svg: &str) -> Vec<usize> {
        svg.lines()
            .filter(|l| l.starts_with("<polyline"))
            .map(|l| {
                let pts = l.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
                pts.split(' ').filter(|p| !p.is_empty()).count()
            })
            .collect()
    }

    #[test]
    fn one_vertex_per_recorded_row() {
        let mut spec = RunSpec::toy(&ToyFunction::F2, "hvadam").unwrap();
        spec.steps = 120;
        spec.record_every = 7;
        let rec = run(&spec).unwrap();
        let loss = loss_curves_svg("f2", &[Series::loss(&rec)]);
        assert_eq!(vertex_counts(&loss), vec![rec.rows.len()]);
        let path = trajectory_svg("f2", &[Series::trajectory(&rec).unwrap()], Some((0.0, 0.0)));
        assert_eq!(vertex_counts(&path), vec![rec.rows.len()]);
        assert!(path.contains("class=\"optimum\""));
    }

    #[test]
    fn zero_losses_and_degenerate_ranges_stay_finite() {
        let s = Series::new("flat", vec![(1.0, 0.0), (2.0, 0.0)]);
        let svg = loss_curves_svg("flat", &[s]);
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
        assert_eq!(vertex_counts(&svg), vec![2]);
        let empty = trajectory_svg("none", &[], None);
        assert!(empty.ends_with("</svg>\n"));
    }

    #[test]
    fn names_are_escaped() {
        let svg = loss_curves_svg("a<b", &[Series::new("x&y", vec![(1.0, 1.0)])]);
        assert!(svg.contains("a&lt;b") && svg.contains("x&amp;y"));
    }
}
