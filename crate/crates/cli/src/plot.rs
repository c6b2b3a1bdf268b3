//! Minimal SVG charts: polyline plots and deformed-shape scatters. These are
//! conveniences derived from the CSV data, not measurement outputs.

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const MARGIN: f64 = 56.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

fn bounds(points: impl Iterator<Item = (f64, f64)>) -> (f64, f64, f64, f64) {
    let mut b = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in points {
        b.0 = b.0.min(x);
        b.1 = b.1.max(x);
        b.2 = b.2.min(y);
        b.3 = b.3.max(y);
    }
    if !b.0.is_finite() {
        b = (0.0, 1.0, 0.0, 1.0);
    }
    if b.1 - b.0 < 1e-12 {
        b.0 -= 0.5;
        b.1 += 0.5;
    }
    if b.3 - b.2 < 1e-12 {
        b.2 -= 0.5;
        b.3 += 0.5;
    }
    b
}

fn open_svg(out: &mut String, title: &str) {
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">{title}</text>\n",
        WIDTH / 2.0
    ));
}

fn axes(out: &mut String, xlabel: &str, ylabel: &str, b: (f64, f64, f64, f64)) {
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    out.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n"
    ));
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{xlabel}</text>\n",
        (x0 + x1) / 2.0,
        HEIGHT - 12.0
    ));
    out.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 {:.1})\">{ylabel}</text>\n",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    ));
    for (v, x, y, anchor) in [
        (b.0, x0, y0 + 16.0, "middle"),
        (b.1, x1, y0 + 16.0, "middle"),
        (b.2, x0 - 6.0, y0, "end"),
        (b.3, x0 - 6.0, y1 + 4.0, "end"),
    ] {
        out.push_str(&format!(
            "<text x=\"{x:.1}\" y=\"{y:.1}\" text-anchor=\"{anchor}\" font-family=\"sans-serif\" font-size=\"11\">{v:.3}</text>\n"
        ));
    }
}

fn to_px(b: (f64, f64, f64, f64), x: f64, y: f64) -> (f64, f64) {
    let px = MARGIN + (x - b.0) / (b.1 - b.0) * (WIDTH - 2.0 * MARGIN);
    let py = HEIGHT - MARGIN - (y - b.2) / (b.3 - b.2) * (HEIGHT - 2.0 * MARGIN);
    (px, py)
}

pub fn line_chart(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let b = bounds(series.iter().flat_map(|s| s.points.iter().copied()));
    let mut out = String::new();
    open_svg(&mut out, title);
    axes(&mut out, xlabel, ylabel, b);
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| {
                let (px, py) = to_px(b, x, y);
                format!("{px:.2},{py:.2}")
            })
            .collect();
        let dash = if s.dashed { " stroke-dasharray=\"5,4\"" } else { "" };
        out.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash}/>\n",
            path.join(" ")
        ));
        let ly = 40.0 + 16.0 * i as f64;
        out.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"{color}\" stroke-width=\"1.5\"{dash}/>\n\
             <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            WIDTH - 170.0,
            WIDTH - 146.0,
            WIDTH - 140.0,
            ly + 4.0,
            s.label
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// Deformed-shape plot: natural member segments in gray, node position
/// groups (natural / deformed variants) as colored markers.
pub fn shape_plot(
    title: &str,
    segments: &[((f64, f64), (f64, f64))],
    groups: &[(String, Vec<(f64, f64)>)],
) -> String {
    let all = segments
        .iter()
        .flat_map(|&(p, q)| [p, q])
        .chain(groups.iter().flat_map(|(_, pts)| pts.iter().copied()));
    let mut b = bounds(all);
    // equal padding so shapes stay recognizable
    let pad = 0.1 * ((b.1 - b.0).max(b.3 - b.2));
    b = (b.0 - pad, b.1 + pad, b.2 - pad, b.3 + pad);
    let mut out = String::new();
    open_svg(&mut out, title);
    axes(&mut out, "x", "y", b);
    for &(p, q) in segments {
        let (x1, y1) = to_px(b, p.0, p.1);
        let (x2, y2) = to_px(b, q.0, q.1);
        out.push_str(&format!(
            "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" stroke=\"#bbbbbb\" stroke-width=\"1\"/>\n"
        ));
    }
    for (i, (label, pts)) in groups.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        for &(x, y) in pts {
            let (px, py) = to_px(b, x, y);
            out.push_str(&format!(
                "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"3.5\" fill=\"{color}\" fill-opacity=\"0.8\"/>\n"
            ));
        }
        let ly = 40.0 + 16.0 * i as f64;
        out.push_str(&format!(
            "<circle cx=\"{:.1}\" cy=\"{ly:.1}\" r=\"3.5\" fill=\"{color}\"/>\n\
             <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\">{label}</text>\n",
            WIDTH - 158.0,
            WIDTH - 148.0,
            ly + 4.0
        ));
    }
    out.push_str("</svg>\n");
    out
}
