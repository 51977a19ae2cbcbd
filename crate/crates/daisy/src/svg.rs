//! Minimal self-contained SVG renderers for the analysis figures.

use std::fmt::Write;

use daisy_core::analysis::ProjectionMap;
use daisy_core::{Emotion, EmotionLabel};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 40.0;

fn color(label: EmotionLabel) -> &'static str {
    match label {
        EmotionLabel::Primary(Emotion::Joy) => "#e6a700",
        EmotionLabel::Primary(Emotion::Sadness) => "#3467c4",
        EmotionLabel::Primary(Emotion::Anger) => "#c9342d",
        EmotionLabel::Primary(Emotion::Surprise) => "#3a9b4b",
        EmotionLabel::Neutral => "#888888",
    }
}

fn header(out: &mut String, title: &str) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = write!(out, r#"<rect width="100%" height="100%" fill="white"/><text x="{MARGIN}" y="24" font-size="14">{}</text>"#, escape(title));
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Scatter of a projection map; class means drawn as outlined discs.
pub fn scatter(map: &ProjectionMap, title: &str) -> String {
    let all = map.points.iter().chain(map.class_means.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in all {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    if !(x0.is_finite() && y0.is_finite()) {
        (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
    }
    let span = |a: f64, b: f64| if b - a > 1e-12 { b - a } else { 1.0 };
    let (sx, sy) = (span(x0, x1), span(y0, y1));
    let px = |x: f64| MARGIN + (x - x0) / sx * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / sy * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    header(&mut out, title);
    let _ = write!(
        out,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="#ccc"/>"##,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    for (p, l) in map.points.iter().zip(&map.labels) {
        let _ = write!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{}" fill-opacity="0.6"/>"#, px(p[0]), py(p[1]), color(*l));
    }
    for e in Emotion::ALL {
        let [x, y] = map.class_means[e.index()];
        let _ = write!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="7" fill="{}" stroke="black" stroke-width="1.5"/>"#,
            px(x),
            py(y),
            color(e.into())
        );
    }
    for (i, e) in Emotion::ALL.iter().enumerate() {
        let y = MARGIN + 14.0 + 16.0 * i as f64;
        let _ = write!(
            out,
            r#"<circle cx="{:.0}" cy="{y}" r="5" fill="{}"/><text x="{:.0}" y="{}">{}</text>"#,
            WIDTH - MARGIN - 80.0,
            color((*e).into()),
            WIDTH - MARGIN - 70.0,
            y + 4.0,
            e.name()
        );
    }
    let _ = write!(out, r#"<text x="{}" y="{}">PC1</text><text x="8" y="{}">PC2</text></svg>"#, WIDTH / 2.0, HEIGHT - 12.0, HEIGHT / 2.0);
    out
}

/// Bar chart of explained-variance ratios. Each series is `(name, ratios)`;
/// bars of the same component sit side by side.
pub fn variance_bars(series: &[(&str, &[f64])], title: &str) -> String {
    const PALETTE: [&str; 4] = ["#3467c4", "#e6a700", "#3a9b4b", "#c9342d"];
    let n = series.iter().map(|(_, r)| r.len()).max().unwrap_or(0).max(1);
    let top = series.iter().flat_map(|(_, r)| r.iter().copied()).fold(0.0f64, f64::max).max(1e-12);
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let slot = plot_w / n as f64;
    let bar = slot / (series.len().max(1) as f64 + 0.5);

    let mut out = String::new();
    header(&mut out, title);
    let _ = write!(
        out,
        r#"<line x1="{MARGIN}" y1="{0}" x2="{1}" y2="{0}" stroke="black"/>"#,
        HEIGHT - MARGIN,
        WIDTH - MARGIN
    );
    for (s, (name, ratios)) in series.iter().enumerate() {
        let fill = PALETTE[s % PALETTE.len()];
        for (i, r) in ratios.iter().enumerate() {
            let h = r / top * plot_h;
            let _ = write!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                MARGIN + i as f64 * slot + s as f64 * bar,
                HEIGHT - MARGIN - h,
                bar,
                h
            );
        }
        let y = MARGIN + 14.0 + 16.0 * s as f64;
        let _ = write!(
            out,
            r#"<rect x="{:.0}" y="{}" width="10" height="10" fill="{fill}"/><text x="{:.0}" y="{}">{}</text>"#,
            WIDTH - MARGIN - 150.0,
            y - 8.0,
            WIDTH - MARGIN - 135.0,
            y + 1.0,
            escape(name)
        );
    }
    let _ = write!(out, r#"<text x="{}" y="{}">component</text><text x="4" y="{MARGIN}">{:.3}</text></svg>"#, WIDTH / 2.0, HEIGHT - 12.0, top);
    out
}
