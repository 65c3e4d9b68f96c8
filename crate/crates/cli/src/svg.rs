//! Minimal log-log line plot: axes, one polyline, a fitted-slope label.

pub fn log_log_plot(points: &[(f64, f64)], slope: Option<f64>, title: &str) -> String {
    const W: f64 = 640.0;
    const H: f64 = 440.0;
    const ML: f64 = 70.0; // left margin
    const MR: f64 = 20.0;
    const MT: f64 = 40.0;
    const MB: f64 = 50.0;

    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let (x0, x1) = bounds(logs.iter().map(|p| p.0));
    let (y0, y1) = bounds(logs.iter().map(|p| p.1));
    let sx = |x: f64| ML + (x - x0) / (x1 - x0).max(1e-12) * (W - ML - MR);
    let sy = |y: f64| H - MB - (y - y0) / (y1 - y0).max(1e-12) * (H - MT - MB);

    let path: String = logs
        .iter()
        .enumerate()
        .map(|(i, (x, y))| {
            format!("{}{:.2},{:.2}", if i == 0 { "M" } else { " L" }, sx(*x), sy(*y))
        })
        .collect();
    let markers: String = logs
        .iter()
        .map(|(x, y)| {
            format!(
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="#1f77b4"/>"#,
                sx(*x),
                sy(*y)
            )
        })
        .collect();
    let slope_label = slope
        .map(|s| format!("fitted slope {s:.4}"))
        .unwrap_or_else(|| "fitted slope n/a".to_string());

    format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">
<rect width="{W}" height="{H}" fill="white"/>
<text x="{tx}" y="24" font-family="monospace" font-size="14" text-anchor="middle">{title}</text>
<line x1="{ML}" y1="{by}" x2="{rx}" y2="{by}" stroke="black"/>
<line x1="{ML}" y1="{MT}" x2="{ML}" y2="{by}" stroke="black"/>
<text x="{tx}" y="{lx}" font-family="monospace" font-size="12" text-anchor="middle">ln n</text>
<text x="16" y="{my}" font-family="monospace" font-size="12" transform="rotate(-90 16 {my})" text-anchor="middle">ln total</text>
<text x="{rx}" y="{MT}" font-family="monospace" font-size="12" text-anchor="end">{slope_label}</text>
<path d="{path}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>
{markers}
<text x="{ML}" y="{ly}" font-family="monospace" font-size="10">{x0:.2}</text>
<text x="{rx}" y="{ly}" font-family="monospace" font-size="10" text-anchor="end">{x1:.2}</text>
</svg>
"#,
        tx = (ML + W - MR) / 2.0,
        by = H - MB,
        rx = W - MR,
        lx = H - 14.0,
        ly = H - MB + 16.0,
        my = (MT + H - MB) / 2.0,
    )
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn produces_wellformed_svg() {
        let pts = [(16.0, 0.4), (64.0, 0.2), (256.0, 0.1)];
        let svg = log_log_plot(&pts, Some(-0.5), "sweep");
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("fitted slope -0.5000"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn single_point_has_no_slope_label_value() {
        let svg = log_log_plot(&[(16.0, 0.4)], None, "single");
        assert!(svg.contains("fitted slope n/a"));
    }
}
