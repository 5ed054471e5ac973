//! Static SVG figures rendered from the CSV logs: trajectory overlays for
//! trial runs, metric-vs-count panels for benchmark reports.

use std::fmt::Write as _;

const COLORS: &[(&str, &str)] = &[
    ("dwa", "#d62728"),
    ("frozone", "#1f77b4"),
    ("comet", "#2ca02c"),
];

fn color_for(label: &str) -> &'static str {
    COLORS
        .iter()
        .find(|(name, _)| label.contains(name))
        .map(|(_, c)| *c)
        .unwrap_or("#7f7f7f")
}

/// One parsed trajectory: label plus (x, y) points.
pub struct TrajectorySeries {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Parse a trajectory CSV produced by this crate (comment lines ignored).
pub fn parse_trajectory_csv(text: &str, label: &str) -> TrajectorySeries {
    let mut points = Vec::new();
    for line in text.lines() {
        if line.starts_with('#') || line.starts_with("t,") || line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() >= 3 {
            if let (Ok(x), Ok(y)) = (cols[1].parse::<f64>(), cols[2].parse::<f64>()) {
                points.push((x, y));
            }
        }
    }
    let planner = text
        .lines()
        .find_map(|l| l.strip_prefix("# planner = "))
        .map(|v| v.trim_matches('"').to_string())
        .unwrap_or_default();
    TrajectorySeries {
        label: if planner.is_empty() {
            label.to_string()
        } else {
            format!("{label} ({planner})")
        },
        points,
    }
}

struct Frame {
    width: f64,
    height: f64,
    margin: f64,
    x_range: (f64, f64),
    y_range: (f64, f64),
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        let (lo, hi) = self.x_range;
        self.margin + (v - lo) / (hi - lo).max(1e-9) * (self.width - 2.0 * self.margin)
    }

    fn y(&self, v: f64) -> f64 {
        let (lo, hi) = self.y_range;
        self.height - self.margin - (v - lo) / (hi - lo).max(1e-9) * (self.height - 2.0 * self.margin)
    }
}

fn axes(svg: &mut String, f: &Frame, x_label: &str, y_label: &str) {
    let _ = writeln!(
        svg,
        "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"#333\"/>",
        f.margin,
        f.margin,
        f.width - 2.0 * f.margin,
        f.height - 2.0 * f.margin
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
        f.width / 2.0,
        f.height - 6.0,
        x_label
    );
    let _ = writeln!(
        svg,
        "<text x=\"12\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 12 {:.1})\">{}</text>",
        f.height / 2.0,
        f.height / 2.0,
        y_label
    );
    for i in 0..=4 {
        let tx = f.x_range.0 + (f.x_range.1 - f.x_range.0) * i as f64 / 4.0;
        let ty = f.y_range.0 + (f.y_range.1 - f.y_range.0) * i as f64 / 4.0;
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"9\" text-anchor=\"middle\">{:.1}</text>",
            f.x(tx),
            f.height - f.margin + 14.0,
            tx
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"9\" text-anchor=\"end\">{:.2}</text>",
            f.margin - 4.0,
            f.y(ty) + 3.0,
            ty
        );
    }
}

fn polyline(svg: &mut String, f: &Frame, pts: &[(f64, f64)], color: &str) {
    if pts.is_empty() {
        return;
    }
    let coords: Vec<String> = pts
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", f.x(x), f.y(y)))
        .collect();
    let _ = writeln!(
        svg,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>",
        coords.join(" "),
        color
    );
}

/// Render trajectory overlays into a standalone SVG document.
pub fn trajectories_svg(series: &[TrajectorySeries], corridor_halfwidth: Option<f64>) -> String {
    let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.points.iter().copied()).collect();
    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &all {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    if let Some(hw) = corridor_halfwidth {
        y_lo = y_lo.min(-hw);
        y_hi = y_hi.max(hw);
    }
    if !x_lo.is_finite() {
        (x_lo, x_hi, y_lo, y_hi) = (0.0, 1.0, -1.0, 1.0);
    }
    let pad = 0.5;
    let f = Frame {
        width: 720.0,
        height: 360.0,
        margin: 42.0,
        x_range: (x_lo - pad, x_hi + pad),
        y_range: (y_lo - pad, y_hi + pad),
    };
    let mut svg = String::from(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"360\" viewBox=\"0 0 720 360\">\n",
    );
    let _ = writeln!(svg, "<rect width=\"720\" height=\"360\" fill=\"white\"/>");
    axes(&mut svg, &f, "x (m)", "y (m)");
    if let Some(hw) = corridor_halfwidth {
        for wall in [-hw, hw] {
            let _ = writeln!(
                svg,
                "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#999\" stroke-dasharray=\"6 3\"/>",
                f.x(f.x_range.0),
                f.y(wall),
                f.x(f.x_range.1),
                f.y(wall)
            );
        }
    }
    for (i, s) in series.iter().enumerate() {
        let color = color_for(&s.label);
        polyline(&mut svg, &f, &s.points, color);
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" fill=\"{}\">{}</text>",
            f.width - f.margin - 180.0,
            f.margin + 14.0 * (i + 1) as f64,
            color,
            s.label
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// One metric panel: per-planner series of (count, value).
pub struct MetricSeries {
    pub planner: String,
    pub points: Vec<(f64, f64)>,
}

/// (metric label, one series per planner)
pub type MetricPanel = (String, Vec<MetricSeries>);

/// Parse the flat per-cell benchmark CSV into metric panels.
pub fn parse_cells_csv(text: &str) -> Vec<MetricPanel> {
    let mut rows: Vec<(String, f64, f64, f64, Option<f64>)> = Vec::new();
    for line in text.lines() {
        if line.starts_with('#') || line.starts_with("planner,") || line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() < 9 {
            continue;
        }
        let npl = cols[7].parse::<f64>().ok();
        if let (Ok(count), Ok(dev), Ok(freeze)) = (
            cols[1].parse::<f64>(),
            cols[3].parse::<f64>(),
            cols[4].parse::<f64>(),
        ) {
            rows.push((cols[0].to_string(), count, dev, freeze, npl));
        }
    }
    let planners: Vec<String> = {
        let mut seen = Vec::new();
        for r in &rows {
            if !seen.contains(&r.0) {
                seen.push(r.0.clone());
            }
        }
        seen
    };
    type Row = (String, f64, f64, f64, Option<f64>);
    let collect = |f: &dyn Fn(&Row) -> Option<f64>| {
        planners
            .iter()
            .map(|p| MetricSeries {
                planner: p.clone(),
                points: rows
                    .iter()
                    .filter(|r| &r.0 == p)
                    .filter_map(|r| f(r).map(|v| (r.1, v)))
                    .collect(),
            })
            .collect::<Vec<_>>()
    };
    vec![
        ("avg deviation (deg)".into(), collect(&|r| Some(r.2))),
        ("freezing rate".into(), collect(&|r| Some(r.3))),
        ("normalized path length".into(), collect(&|r| r.4)),
    ]
}

/// Render the three metric panels side by side.
pub fn metrics_svg(panels: &[MetricPanel]) -> String {
    let panel_w = 300.0;
    let height = 280.0;
    let width = panel_w * panels.len() as f64;
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    );
    let _ = writeln!(svg, "<rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>");
    for (i, (label, series)) in panels.iter().enumerate() {
        let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.points.iter().copied()).collect();
        if all.is_empty() {
            continue;
        }
        let x_lo = all.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let x_hi = all.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        let y_hi = all.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let f = Frame {
            width: panel_w,
            height,
            margin: 40.0,
            x_range: (x_lo, x_hi.max(x_lo + 1.0)),
            y_range: (0.0, (y_hi * 1.15).max(0.1)),
        };
        let offset = i as f64 * panel_w;
        let _ = writeln!(svg, "<g transform=\"translate({offset} 0)\">");
        axes(&mut svg, &f, "pedestrians", label);
        for s in series {
            let color = color_for(&s.planner);
            polyline(&mut svg, &f, &s.points, color);
            for &(x, y) in &s.points {
                let _ = writeln!(
                    svg,
                    "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"2.5\" fill=\"{}\"/>",
                    f.x(x),
                    f.y(y),
                    color
                );
            }
        }
        if i == 0 {
            for (j, s) in series.iter().enumerate() {
                let _ = writeln!(
                    svg,
                    "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" fill=\"{}\">{}</text>",
                    f.margin + 6.0,
                    f.margin + 13.0 * (j + 1) as f64,
                    color_for(&s.planner),
                    s.planner
                );
            }
        }
        let _ = writeln!(svg, "</g>");
    }
    svg.push_str("</svg>\n");
    svg
}
