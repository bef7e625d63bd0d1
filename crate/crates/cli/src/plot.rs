//! Self-contained SVG of a tradeoff curve: distortion on the horizontal axis,
//! capacity in bits on the vertical one.

use std::fmt::Write as _;

use isac_core::io::CurveRow;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

struct Axis {
    lo: f64,
    hi: f64,
    step: f64,
}

impl Axis {
    /// Covers `[lo, hi]` with about five ticks at 1, 2 or 5 times a power of
    /// ten.
    fn fit(lo: f64, hi: f64) -> Self {
        let span = if hi > lo { hi - lo } else { lo.abs().max(1.0) * 0.1 };
        let raw = span / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
        let lo = (lo / step).floor() * step;
        let mut hi = (hi / step).ceil() * step;
        if hi <= lo {
            hi = lo + step;
        }
        Self { lo, hi, step }
    }

    fn ticks(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step).round() as i64;
        (0..=n).map(|i| self.lo + i as f64 * self.step).collect()
    }

    fn decimals(&self) -> usize {
        (-self.step.log10().floor()).max(0.0) as usize
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders the non-TSA rows as a marked polyline, the two TSA rows as a
/// dashed chord and `overlay` (`(D, C)` pairs) as a thin reference curve.
pub fn render(rows: &[CurveRow], overlay: Option<&[(f64, f64)]>, title: &str) -> String {
    let curve: Vec<(f64, f64)> = rows.iter().filter(|r| !r.tsa).map(|r| (r.distortion, r.capacity_bits)).collect();
    let tsa: Vec<(f64, f64)> = rows.iter().filter(|r| r.tsa).map(|r| (r.distortion, r.capacity_bits)).collect();
    let all = curve.iter().chain(&tsa).chain(overlay.unwrap_or(&[]));
    let (mut dlo, mut dhi, mut chi) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for &(d, c) in all {
        dlo = dlo.min(d);
        dhi = dhi.max(d);
        chi = chi.max(c);
    }
    if !dlo.is_finite() {
        (dlo, dhi) = (0.0, 1.0);
    }
    let xa = Axis::fit(dlo, dhi);
    let ya = Axis::fit(0.0, chi);
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let px = |d: f64| LEFT + (d - xa.lo) / (xa.hi - xa.lo) * pw;
    let py = |c: f64| TOP + ph - (c - ya.lo) / (ya.hi - ya.lo) * ph;
    let path = |pts: &[(f64, f64)]| {
        pts.iter().map(|&(d, c)| format!("{:.2},{:.2}", px(d), py(c))).collect::<Vec<_>>().join(" ")
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));

    for t in xa.ticks() {
        let x = px(t);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#e0e0e0"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{:.*}</text>"##,
            TOP + ph,
            TOP + ph + 16.0,
            xa.decimals(),
            t
        );
    }
    for t in ya.ticks() {
        let y = py(t);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e0e0e0"/><text x="{:.2}" y="{:.2}" text-anchor="end">{:.*}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            y + 4.0,
            ya.decimals(),
            t
        );
    }
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">distortion D</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">capacity C (bits)</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );

    if let Some(o) = overlay {
        let _ = writeln!(s, r##"<polyline points="{}" fill="none" stroke="#888888" stroke-width="1"/>"##, path(o));
    }
    if tsa.len() == 2 {
        let _ = writeln!(
            s,
            r##"<polyline points="{}" fill="none" stroke="#d62728" stroke-width="1.5" stroke-dasharray="6 4"/>"##,
            path(&tsa)
        );
    }
    let _ = writeln!(s, r##"<polyline points="{}" fill="none" stroke="#1f77b4" stroke-width="2"/>"##, path(&curve));
    for &(d, c) in &curve {
        let _ = writeln!(s, r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="#1f77b4"/>"##, px(d), py(c));
    }

    // legend
    let (lx, ly) = (LEFT + pw - 170.0, TOP + ph - 70.0);
    let mut entries = vec![("ISAC", "#1f77b4", "")];
    if tsa.len() == 2 {
        entries.push(("time sharing", "#d62728", r#" stroke-dasharray="6 4""#));
    }
    if overlay.is_some() {
        entries.push(("closed form", "#888888", ""));
    }
    for (i, (label, color, dash)) in entries.iter().enumerate() {
        let y = ly + 18.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"{dash}/><text x="{:.2}" y="{:.2}">{label}</text>"#,
            lx + 28.0,
            lx + 36.0,
            y + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_ticks_cover_the_range() {
        let a = Axis::fit(0.2, 0.31);
        assert!(a.lo <= 0.2 && a.hi >= 0.31);
        assert_eq!(a.step, 0.05);
        assert_eq!(a.ticks().len(), 4);
        assert_eq!(a.decimals(), 2);
        let a = Axis::fit(0.0, 0.6);
        assert_eq!((a.lo, a.step), (0.0, 0.2));
        assert!((a.hi - 0.6).abs() < 1e-12);
    }

    #[test]
    fn single_value_range_is_widened() {
        let a = Axis::fit(0.5, 0.5);
        assert!(a.hi > a.lo);
    }

    #[test]
    fn title_is_escaped() {
        let svg = render(&[], None, "a < b & c");
        assert!(svg.contains("a &lt; b &amp; c"));
    }
}
