//! Minimal self-contained SVG line plot of sweep summaries (log-scale y).

use std::fmt::Write;

use spikefem_core::harness::SweepResult;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub fn summary_plot(results: &[SweepResult], title: &str) -> String {
    let finite = |v: f64| v.is_finite() && v > 0.0;
    let ys: Vec<f64> =
        results.iter().flat_map(|r| r.points.iter().map(|p| p.mean)).filter(|&v| finite(v)).collect();
    let (mut lo, mut hi) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (lo, hi) = (1e-3, 1.0);
    }
    let (dec_lo, mut dec_hi) = (lo.log10().floor(), hi.log10().ceil());
    if dec_hi <= dec_lo {
        dec_hi = dec_lo + 1.0;
    }
    let xs: Vec<f64> = results.iter().flat_map(|r| r.points.iter().map(|p| p.p)).collect();
    let x_min = xs.iter().copied().fold(f64::INFINITY, f64::min).min(0.0);
    let mut x_max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(x_max > x_min) {
        x_max = x_min + 1.0;
    }

    let px = |x: f64| LEFT + (x - x_min) / (x_max - x_min) * (W - LEFT - RIGHT);
    let py = |y: f64| TOP + (dec_hi - y.log10()) / (dec_hi - dec_lo) * (H - TOP - BOTTOM);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="18" text-anchor="middle">{title}</text>"#, W / 2.0);
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(s, r#"<path d="M{x0},{y0} L{x0},{y1} L{x1},{y1}" fill="none" stroke="black"/>"#);
    let mut d = dec_lo;
    while d <= dec_hi {
        let y = py(10f64.powf(d));
        let _ = writeln!(s, r##"<line x1="{x0}" y1="{y}" x2="{x1}" y2="{y}" stroke="#ddd"/>"##);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">1e{}</text>"#, x0 - 6.0, y + 4.0, d as i32);
        d += 1.0;
    }
    for k in 0..=4 {
        let x = x_min + (x_max - x_min) * k as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{:.2}</text>"#, px(x), y1 + 18.0, x);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">p</text>"#, (x0 + x1) / 2.0, H - 8.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">mean relative error</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    for (i, res) in results.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = res
            .points
            .iter()
            .filter(|p| finite(p.mean))
            .map(|p| format!("{:.2},{:.2}", px(p.p), py(p.mean)))
            .collect();
        if !pts.is_empty() {
            let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, pts.join(" "));
        }
        for p in res.points.iter().filter(|p| finite(p.mean)) {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, px(p.p), py(p.mean));
        }
        let ly = TOP + 10.0 + 16.0 * i as f64;
        let _ = writeln!(s, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, x1 - 110.0, x1 - 90.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{} npm={}</text>"#, x1 - 85.0, ly + 4.0, res.fault_kind.name(), res.npm);
    }
    s.push_str("</svg>\n");
    s
}
