//! Minimal static log-log SVG plots.

use std::fmt::Write as _;

const W: f64 = 480.0;
const H: f64 = 360.0;
const PAD: f64 = 56.0;

/// Scatter of `points` on log-log axes with an optional reference line
/// `ln y = slope · ln x + intercept`.
pub fn loglog_svg(title: &str, xlabel: &str, ylabel: &str, points: &[(f64, f64)], reference: Option<(f64, f64)>) -> String {
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#).unwrap();
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title)).unwrap();
    let logs: Vec<(f64, f64)> = points.iter().filter(|p| p.0 > 0.0 && p.1 > 0.0).map(|p| (p.0.log10(), p.1.log10())).collect();
    if !logs.is_empty() {
        let (mut x0, mut x1) = logs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p.0), a.1.max(p.0)));
        let (mut y0, mut y1) = logs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p.1), a.1.max(p.1)));
        if let Some((m, c)) = reference {
            for x in [x0, x1] {
                let y = (m * x * std::f64::consts::LN_10 + c) / std::f64::consts::LN_10;
                y0 = y0.min(y);
                y1 = y1.max(y);
            }
        }
        if x1 - x0 < 1e-9 {
            x0 -= 0.5;
            x1 += 0.5;
        }
        if y1 - y0 < 1e-9 {
            y0 -= 0.5;
            y1 += 0.5;
        }
        let px = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
        let py = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
        writeln!(s, r#"<line x1="{PAD}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#, H - PAD, W - PAD, H - PAD).unwrap();
        writeln!(s, r#"<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{}" stroke="black"/>"#, H - PAD).unwrap();
        for x in [x0, x1] {
            writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="middle">{:.3e}</text>"#, px(x), H - PAD + 14.0, 10f64.powf(x)).unwrap();
        }
        for y in [y0, y1] {
            writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{:.3e}</text>"#, PAD - 4.0, py(y), 10f64.powf(y)).unwrap();
        }
        if let Some((m, c)) = reference {
            let f = |x: f64| (m * x * std::f64::consts::LN_10 + c) / std::f64::consts::LN_10;
            writeln!(
                s,
                r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="gray" stroke-dasharray="4 3"/>"#,
                px(x0),
                py(f(x0)),
                px(x1),
                py(f(x1))
            )
            .unwrap();
        }
        let path: Vec<String> = logs.iter().map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y))).collect();
        writeln!(s, r#"<polyline points="{}" fill="none" stroke="steelblue"/>"#, path.join(" ")).unwrap();
        for &(x, y) in &logs {
            writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="steelblue"/>"#, px(x), py(y)).unwrap();
        }
    }
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>"#, W / 2.0, H - 12.0, escape(xlabel)).unwrap();
    writeln!(s, r#"<text x="14" y="{}" text-anchor="middle" font-size="12" transform="rotate(-90 14 {})">{}</text>"#, H / 2.0, H / 2.0, escape(ylabel)).unwrap();
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
