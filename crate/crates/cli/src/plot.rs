//! Self-contained SVG emission: two panels (rounds and queries) against the
//! swept axis, with log scales when a range spans at least 8x.

use std::fmt::Write;

const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 320.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;

struct Scale {
    min: f64,
    max: f64,
    log: bool,
}

impl Scale {
    fn fit(values: impl Iterator<Item = f64>) -> Self {
        let vals: Vec<f64> = values.filter(|v| v.is_finite()).collect();
        let mut min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let mut max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !min.is_finite() || !max.is_finite() {
            min = 0.0;
            max = 1.0;
        }
        if (max - min).abs() < f64::EPSILON {
            max = min + 1.0;
        }
        let log = min > 0.0 && max / min >= 8.0;
        Scale { min, max, log }
    }

    fn to_unit(&self, v: f64) -> f64 {
        if self.log {
            (v.ln() - self.min.ln()) / (self.max.ln() - self.min.ln())
        } else {
            (v - self.min) / (self.max - self.min)
        }
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            // Powers of 10 inside the range, padded with the endpoints.
            let mut t = vec![self.min];
            let mut p = 10f64.powf(self.min.log10().ceil());
            while p < self.max {
                if p > self.min * 1.2 {
                    t.push(p);
                }
                p *= 10.0;
            }
            t.push(self.max);
            t
        } else {
            (0..=4)
                .map(|i| self.min + (self.max - self.min) * i as f64 / 4.0)
                .collect()
        }
    }
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 100_000.0 {
        format!("{:.0e}", v)
    } else if v.abs() >= 10.0 || v.fract() == 0.0 {
        format!("{:.0}", v)
    } else {
        format!("{:.2}", v)
    }
}

fn panel(
    svg: &mut String,
    x0: f64,
    title: &str,
    x_label: &str,
    y_label: &str,
    points: &[(f64, f64)],
) {
    let xs = Scale::fit(points.iter().map(|p| p.0));
    let ys = Scale::fit(points.iter().map(|p| p.1));
    let plot_w = PANEL_W - MARGIN_L - MARGIN_R;
    let plot_h = PANEL_H - MARGIN_T - MARGIN_B;
    let px = |v: f64| x0 + MARGIN_L + xs.to_unit(v) * plot_w;
    let py = |v: f64| MARGIN_T + (1.0 - ys.to_unit(v)) * plot_h;

    writeln!(
        svg,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14" font-weight="bold">{}</text>"#,
        x0 + PANEL_W / 2.0,
        title
    )
    .unwrap();
    // Axes.
    writeln!(
        svg,
        r#"<line x1="{l:.1}" y1="{t:.1}" x2="{l:.1}" y2="{b:.1}" stroke="black"/>
<line x1="{l:.1}" y1="{b:.1}" x2="{r:.1}" y2="{b:.1}" stroke="black"/>"#,
        l = x0 + MARGIN_L,
        r = x0 + PANEL_W - MARGIN_R,
        t = MARGIN_T,
        b = PANEL_H - MARGIN_B,
    )
    .unwrap();
    for t in xs.ticks() {
        let x = px(t);
        writeln!(
            svg,
            r#"<line x1="{x:.1}" y1="{b:.1}" x2="{x:.1}" y2="{b2:.1}" stroke="black"/>
<text x="{x:.1}" y="{ty:.1}" text-anchor="middle" font-size="10">{label}</text>"#,
            b = PANEL_H - MARGIN_B,
            b2 = PANEL_H - MARGIN_B + 5.0,
            ty = PANEL_H - MARGIN_B + 18.0,
            label = fmt_tick(t),
        )
        .unwrap();
    }
    for t in ys.ticks() {
        let y = py(t);
        writeln!(
            svg,
            r#"<line x1="{x1:.1}" y1="{y:.1}" x2="{x2:.1}" y2="{y:.1}" stroke="black"/>
<text x="{tx:.1}" y="{y2:.1}" text-anchor="end" font-size="10">{label}</text>"#,
            x1 = x0 + MARGIN_L - 5.0,
            x2 = x0 + MARGIN_L,
            y2 = y + 3.0,
            tx = x0 + MARGIN_L - 8.0,
            label = fmt_tick(t),
        )
        .unwrap();
    }
    writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">{}{}</text>"#,
        x0 + MARGIN_L + plot_w / 2.0,
        PANEL_H - 10.0,
        x_label,
        if xs.log { " (log)" } else { "" },
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12" transform="rotate(-90 {:.1} {:.1})">{}{}</text>"#,
        x0 + 16.0,
        MARGIN_T + plot_h / 2.0,
        x0 + 16.0,
        MARGIN_T + plot_h / 2.0,
        y_label,
        if ys.log { " (log)" } else { "" },
    )
    .unwrap();

    let path: Vec<String> = points
        .iter()
        .map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y)))
        .collect();
    writeln!(
        svg,
        r##"<polyline points="{}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>"##,
        path.join(" ")
    )
    .unwrap();
    for &(x, y) in points {
        writeln!(
            svg,
            r##"<circle cx="{:.1}" cy="{:.1}" r="3" fill="#1f77b4"/>"##,
            px(x),
            py(y)
        )
        .unwrap();
    }
}

/// Two panels: rounds and queries against the swept value.
/// `points` entries are `(x, avg_rounds, avg_queries)`.
pub fn two_panel_svg(title: &str, x_label: &str, points: &[(f64, f64, f64)]) -> String {
    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="0 0 {:.0} {:.0}" font-family="sans-serif">"#,
        2.0 * PANEL_W,
        PANEL_H,
        2.0 * PANEL_W,
        PANEL_H
    )
    .unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    let rounds: Vec<(f64, f64)> = points.iter().map(|&(x, r, _)| (x, r)).collect();
    let queries: Vec<(f64, f64)> = points.iter().map(|&(x, _, q)| (x, q)).collect();
    panel(
        &mut svg,
        0.0,
        &format!("{title}: rounds"),
        x_label,
        "rounds",
        &rounds,
    );
    panel(
        &mut svg,
        PANEL_W,
        &format!("{title}: queries"),
        x_label,
        "queries",
        &queries,
    );
    writeln!(svg, "</svg>").unwrap();
    svg
}
