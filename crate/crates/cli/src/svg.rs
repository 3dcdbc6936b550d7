//! Minimal SVG line chart: median MAE against noise level, with
//! interquartile whiskers, one series per combination.

use std::fmt::Write;

use fringe_step::MaeSummary;

const W: f64 = 760.0;
const H: f64 = 460.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// Tick positions covering `[0, max]` with a 1/2/5 step.
fn ticks(max: f64) -> Vec<f64> {
    let max = if max > 0.0 { max } else { 1.0 };
    let raw = max / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let n = (max / step).ceil() as usize;
    (0..=n).map(|i| i as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.4}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders all summaries into one chart. Groups whose trials all failed are
/// drawn as a cross on the x axis.
pub fn mae_chart(title: &str, summaries: &[MaeSummary]) -> String {
    let mut combos: Vec<_> = summaries.iter().map(|s| s.combination).collect();
    combos.sort();
    combos.dedup();

    let sig_min = summaries.iter().map(|s| s.sigma).fold(f64::INFINITY, f64::min);
    let sig_max = summaries.iter().map(|s| s.sigma).fold(f64::NEG_INFINITY, f64::max);
    let sig_span = if sig_max > sig_min { sig_max - sig_min } else { 1.0 };
    let y_top = summaries.iter().filter_map(|s| s.stats).map(|s| s.q75.max(s.mae_median)).fold(0.0, f64::max);
    let y_ticks = ticks(y_top);
    let y_max = *y_ticks.last().unwrap();

    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    // spread series sideways so whiskers at the same sigma don't overlap
    let n = combos.len() as f64;
    let offset = |k: usize| (k as f64 - (n - 1.0) / 2.0) * (pw * 0.012);
    let x_of = |sigma: f64, k: usize| LEFT + (sigma - sig_min) / sig_span * pw + offset(k);
    let y_of = |v: f64| TOP + ph - v / y_max * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#, LEFT + pw / 2.0, escape(title));

    for &t in &y_ticks {
        let y = y_of(t);
        let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e0e0e0"/>"##, LEFT + pw);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 6.0, y + 4.0, fmt_tick(t));
    }
    let mut sigmas: Vec<f64> = summaries.iter().map(|s| s.sigma).collect();
    sigmas.sort_by(f64::total_cmp);
    sigmas.dedup();
    for &sg in &sigmas {
        let x = LEFT + (sg - sig_min) / sig_span * pw;
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#, TOP + ph + 18.0, fmt_tick(sg));
    }
    let _ = writeln!(
        s,
        r#"<path d="M{LEFT},{TOP} V{} H{}" fill="none" stroke="black"/>"#,
        TOP + ph,
        LEFT + pw
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">noise sigma</text>"#, LEFT + pw / 2.0, H - 12.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">MAE (rad), median and IQR</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );

    for (k, combo) in combos.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mut points: Vec<&MaeSummary> = summaries.iter().filter(|s| s.combination == *combo).collect();
        points.sort_by(|a, b| a.sigma.total_cmp(&b.sigma));

        let path: Vec<String> = points
            .iter()
            .filter_map(|p| p.stats.map(|st| format!("{:.2},{:.2}", x_of(p.sigma, k), y_of(st.mae_median))))
            .collect();
        if path.len() > 1 {
            let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, path.join(" "));
        }
        for p in &points {
            let x = x_of(p.sigma, k);
            match p.stats {
                Some(st) => {
                    let (y1, y2) = (y_of(st.q25), y_of(st.q75));
                    let _ = writeln!(
                        s,
                        r#"<path d="M{:.2},{y1:.2} H{:.2} M{x:.2},{y1:.2} V{y2:.2} M{:.2},{y2:.2} H{:.2}" stroke="{color}" fill="none"/>"#,
                        x - 3.0,
                        x + 3.0,
                        x - 3.0,
                        x + 3.0
                    );
                    let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, y_of(st.mae_median));
                }
                None => {
                    let y = TOP + ph;
                    let _ = writeln!(
                        s,
                        r#"<path d="M{:.2},{:.2} l8,8 m0,-8 l-8,8" stroke="{color}"/>"#,
                        x - 4.0,
                        y - 4.0
                    );
                }
            }
        }

        let ly = TOP + 10.0 + k as f64 * 20.0;
        let lx = LEFT + pw + 16.0;
        let failed: usize = points.iter().map(|p| p.n_failed).sum();
        let label = format!("Case {} {} / {}", combo.case, combo.estimator, combo.prefilter);
        let label = if failed > 0 { format!("{label} ({failed} failed)") } else { label };
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 18.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 24.0, ly + 4.0, escape(&label));
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tick_steps() {
        let t = ticks(1.0);
        assert_eq!(t.len(), 6);
        assert!((t[5] - 1.0).abs() < 1e-12);
        // step 0.02 covers 0.07 with 0.08 as the last tick
        let t = ticks(0.07);
        assert_eq!(t.len(), 5);
        assert!((t[4] - 0.08).abs() < 1e-12);
        assert_eq!(ticks(0.0).last(), Some(&1.0));
        assert_eq!(fmt_tick(0.25), "0.25");
        assert_eq!(fmt_tick(2.0), "2");
    }
}
