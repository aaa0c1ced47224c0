//! Minimal SVG scatter plot for `[E_in, E_out]` diagrams.

use std::fmt::Write;

use entlab_core::ordering::{DiagramPoint, Family};

const SIZE: f64 = 480.0;
const PAD: f64 = 56.0;

fn color(f: Family) -> &'static str {
    match f {
        Family::Werner => "#1f77b4",
        Family::Pure => "#d62728",
        Family::Random => "#7f7f7f",
    }
}

/// Scatter of `(e_in, e_out)` with the reference line `E_out = E_in`.
pub fn diagram(points: &[DiagramPoint], measure: &str, title: &str) -> String {
    let max = points
        .iter()
        .flat_map(|p| [p.e_in.value, p.e_out.value])
        .fold(1.0f64, f64::max);
    let plot = SIZE - 2.0 * PAD;
    let x = |v: f64| PAD + v / max * plot;
    let y = |v: f64| SIZE - PAD - v / max * plot;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle">{title}</text>"#,
        SIZE / 2.0
    );
    // axes
    let _ = writeln!(
        s,
        r#"<path d="M{:.2} {:.2} L{:.2} {:.2} L{:.2} {:.2}" stroke="black" fill="none"/>"#,
        x(0.0),
        y(max),
        x(0.0),
        y(0.0),
        x(max),
        y(0.0)
    );
    for i in 0..=4 {
        let v = max * i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{v:.2}</text>"#,
            x(v),
            y(0.0) + 16.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.2}</text>"#,
            x(0.0) - 6.0,
            y(v) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{measure} in</text>"#,
        SIZE / 2.0,
        SIZE - 14.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{measure} out</text>"#,
        SIZE / 2.0,
        SIZE / 2.0
    );
    // reference line E_out = E_in
    let _ = writeln!(
        s,
        r#"<path d="M{:.2} {:.2} L{:.2} {:.2}" stroke="black" stroke-dasharray="4 3" fill="none"/>"#,
        x(0.0),
        y(0.0),
        x(max),
        y(max)
    );
    for p in points {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="1.8" fill="{}"/>"#,
            x(p.e_in.value),
            y(p.e_out.value),
            color(p.family)
        );
    }
    let mut families: Vec<Family> = points.iter().map(|p| p.family).collect();
    families.sort();
    families.dedup();
    for (i, f) in families.iter().enumerate() {
        let ly = PAD + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{}"/>"#,
            PAD + 12.0,
            ly,
            color(*f)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            PAD + 22.0,
            ly + 4.0,
            f.name()
        );
    }
    s.push_str("</svg>\n");
    s
}
