//! Static SVG charts for sweep results.

use std::fmt::Write as _;

use crate::sweep::{Cell, SweepKind, SweepResult};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 9] = [
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666", "#1f78b4",
];

// Sampled viridis, low to high.
const RAMP: [(u8, u8, u8); 6] = [
    (68, 1, 84),
    (65, 68, 135),
    (42, 120, 142),
    (34, 168, 132),
    (122, 209, 81),
    (253, 231, 37),
];

#[derive(Debug, Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Axis {
    fn new(lo: f64, hi: f64, px_lo: f64, px_hi: f64) -> Self {
        let (lo, hi) = if hi > lo {
            (lo, hi)
        } else {
            let pad = if lo == 0.0 { 1.0 } else { 0.05 * lo.abs() };
            (lo - pad, hi + pad)
        };
        Self { lo, hi, px_lo, px_hi }
    }

    fn px(&self, v: f64) -> f64 {
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }

    fn ticks(&self) -> Vec<f64> {
        let step = nice_step((self.hi - self.lo) / 5.0);
        let first = (self.lo / step).ceil() as i64;
        let last = (self.hi / step).floor() as i64;
        (first..=last).map(|k| k as f64 * step).collect()
    }
}

fn nice_step(raw: f64) -> f64 {
    if !(raw > 0.0) {
        return 1.0;
    }
    let mag = 10f64.powf(raw.log10().floor());
    let f = raw / mag;
    let nice = if f <= 1.0 {
        1.0
    } else if f <= 2.0 {
        2.0
    } else if f <= 2.5 {
        2.5
    } else if f <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn label(v: f64) -> String {
    let s = format!("{:.3}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn open(svg: &mut String, title: &str) {
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        escape(title)
    );
}

fn axes(svg: &mut String, x: &Axis, y: &Axis, x_label: &str, y_label: &str) {
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        svg,
        r##"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="#333"/>"##,
        x1 - x0,
        y0 - y1
    );
    for t in x.ticks() {
        let px = x.px(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{px:.2}" y1="{y0}" x2="{px:.2}" y2="{}" stroke="#333"/><text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"##,
            y0 + 5.0,
            y0 + 19.0,
            label(t)
        );
    }
    for t in y.ticks() {
        let py = y.px(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{}" y1="{py:.2}" x2="{x0}" y2="{py:.2}" stroke="#333"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"##,
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0,
            label(t)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 18.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate(22 {}) rotate(-90)" text-anchor="middle">{}</text>"#,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn missing_note(svg: &mut String, missing: usize, y: f64) {
    if missing > 0 {
        let _ = writeln!(
            svg,
            r##"<text x="{}" y="{y}" fill="#900">{missing} missing cell(s) left blank</text>"##,
            WIDTH - RIGHT + 12.0
        );
    }
}

fn close(mut svg: String) -> String {
    svg.push_str("</svg>\n");
    svg
}

fn range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values
        .filter(|v| v.is_finite())
        .fold(None, |acc, v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
}

/// Polyline through the present points; gaps split the line.
fn polyline(svg: &mut String, pts: &[(f64, Option<f64>)], x: &Axis, y: &Axis, color: &str) {
    let mut run: Vec<(f64, f64)> = Vec::new();
    let flush = |svg: &mut String, run: &mut Vec<(f64, f64)>| {
        if run.len() > 1 {
            let d: Vec<String> = run.iter().map(|(a, b)| format!("{:.2},{:.2}", x.px(*a), y.px(*b))).collect();
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                d.join(" ")
            );
        }
        run.clear();
    };
    for &(a, b) in pts {
        match b {
            Some(b) if b.is_finite() => run.push((a, b)),
            _ => flush(svg, &mut run),
        }
    }
    flush(svg, &mut run);
    for &(a, b) in pts {
        if let Some(b) = b.filter(|b| b.is_finite()) {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                x.px(a),
                y.px(b)
            );
        }
    }
}

pub fn hours_curve_svg(result: &SweepResult) -> String {
    let pts: Vec<(f64, Option<f64>)> = result
        .cells
        .iter()
        .map(|c| (c.coordinates.hbar, c.a_req_terminal_pct))
        .collect();
    let (xlo, xhi) = range(pts.iter().map(|p| p.0)).unwrap_or((0.0, 1.0));
    let (ylo, yhi) = range(pts.iter().filter_map(|p| p.1)).unwrap_or((0.0, 1.0));
    let x = Axis::new(xlo, xhi, LEFT, WIDTH - RIGHT);
    let y = Axis::new(ylo.min(0.0), yhi.max(0.0), HEIGHT - BOTTOM, TOP);
    let mut svg = String::new();
    open(&mut svg, "Required TFP gain by weekly hours cap");
    axes(&mut svg, &x, &y, "weekly hours cap", "required TFP gain (%)");
    polyline(&mut svg, &pts, &x, &y, PALETTE[0]);
    for &(a, b) in &pts {
        if let Some(b) = b {
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="10">{}</text>"#,
                x.px(a),
                y.px(b) - 8.0,
                label((b * 10.0).round() / 10.0)
            );
        }
    }
    missing_note(&mut svg, result.missing(), TOP + 20.0);
    close(svg)
}

fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0) * (RAMP.len() - 1) as f64;
    let i = (t.floor() as usize).min(RAMP.len() - 2);
    let f = t - i as f64;
    let mix = |a: u8, b: u8| (f64::from(a) + f * (f64::from(b) - f64::from(a))).round() as u8;
    let (a, b) = (RAMP[i], RAMP[i + 1]);
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// Line segments of the `level` iso-line of `z` sampled at (`xs[j]`, `ys[i]`).
pub fn iso_segments(xs: &[f64], ys: &[f64], z: &[Vec<Option<f64>>], level: f64) -> Vec<[(f64, f64); 2]> {
    let mut out = Vec::new();
    let lerp = |p: (f64, f64, f64), q: (f64, f64, f64)| {
        let t = (level - p.2) / (q.2 - p.2);
        (p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1))
    };
    for i in 0..ys.len().saturating_sub(1) {
        for j in 0..xs.len().saturating_sub(1) {
            let (Some(a), Some(b), Some(c), Some(d)) = (z[i][j], z[i][j + 1], z[i + 1][j + 1], z[i + 1][j]) else {
                continue;
            };
            // Corners counter-clockwise from (x_j, y_i).
            let corners = [
                (xs[j], ys[i], a),
                (xs[j + 1], ys[i], b),
                (xs[j + 1], ys[i + 1], c),
                (xs[j], ys[i + 1], d),
            ];
            let crossings: Vec<(f64, f64)> = (0..4)
                .filter_map(|k| {
                    let (p, q) = (corners[k], corners[(k + 1) % 4]);
                    ((p.2 < level) != (q.2 < level)).then(|| lerp(p, q))
                })
                .collect();
            match crossings.len() {
                2 => out.push([crossings[0], crossings[1]]),
                4 => {
                    // Saddle: resolve with the cell mean.
                    let centre_above = (a + b + c + d) / 4.0 >= level;
                    if centre_above == (a >= level) {
                        out.push([crossings[0], crossings[3]]);
                        out.push([crossings[1], crossings[2]]);
                    } else {
                        out.push([crossings[0], crossings[1]]);
                        out.push([crossings[2], crossings[3]]);
                    }
                }
                _ => {}
            }
        }
    }
    out
}

/// Round contour levels strictly inside `(lo, hi)`.
pub fn contour_levels(lo: f64, hi: f64) -> Vec<f64> {
    if !(hi > lo) {
        return Vec::new();
    }
    let step = nice_step((hi - lo) / 6.0);
    let first = (lo / step).floor() as i64 + 1;
    let last = (hi / step).ceil() as i64 - 1;
    (first..=last)
        .map(|k| k as f64 * step)
        .filter(|&v| v > lo && v < hi)
        .collect()
}

pub fn heatmap_svg(result: &SweepResult) -> String {
    let sigmas = &result.spec.sigma_sub;
    let reliefs = &result.spec.relief;
    let value = |c: &Cell| c.a_req_terminal_pct;
    let z: Vec<Vec<Option<f64>>> = sigmas
        .iter()
        .map(|&s| result.row(s).into_iter().map(value).collect())
        .collect();
    let (zlo, zhi) = range(z.iter().flatten().filter_map(|v| *v)).unwrap_or((0.0, 1.0));

    // Cell edges sit halfway between grid points.
    let edges = |g: &[f64]| -> Vec<f64> {
        if g.len() == 1 {
            return vec![g[0] - 0.5, g[0] + 0.5];
        }
        let mut e = vec![g[0] - (g[1] - g[0]) / 2.0];
        e.extend(g.windows(2).map(|w| (w[0] + w[1]) / 2.0));
        e.push(g[g.len() - 1] + (g[g.len() - 1] - g[g.len() - 2]) / 2.0);
        e
    };
    let (xe, ye) = (edges(reliefs), edges(sigmas));
    let x = Axis::new(xe[0], xe[xe.len() - 1], LEFT, WIDTH - RIGHT);
    let y = Axis::new(ye[0], ye[ye.len() - 1], HEIGHT - BOTTOM, TOP);

    let mut svg = String::new();
    open(&mut svg, "Required TFP gain (%) by substitution and small-firm wedge relief");
    for (i, row) in z.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let (px0, px1) = (x.px(xe[j]), x.px(xe[j + 1]));
            let (py0, py1) = (y.px(ye[i + 1]), y.px(ye[i]));
            let fill = match v {
                Some(v) if zhi > zlo => ramp((v - zlo) / (zhi - zlo)),
                Some(_) => ramp(0.5),
                None => "none".to_string(),
            };
            let _ = writeln!(
                svg,
                r#"<rect x="{px0:.2}" y="{py0:.2}" width="{:.2}" height="{:.2}" fill="{fill}" shape-rendering="crispEdges"/>"#,
                px1 - px0,
                py1 - py0
            );
        }
    }
    for level in contour_levels(zlo, zhi) {
        let segs = iso_segments(reliefs, sigmas, &z, level);
        if segs.is_empty() {
            continue;
        }
        for s in &segs {
            let _ = writeln!(
                svg,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="white" stroke-width="1.5"/>"#,
                x.px(s[0].0),
                y.px(s[0].1),
                x.px(s[1].0),
                y.px(s[1].1)
            );
        }
        let mid = segs[segs.len() / 2];
        let (lx, ly) = ((mid[0].0 + mid[1].0) / 2.0, (mid[0].1 + mid[1].1) / 2.0);
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" fill="white" stroke="black" stroke-width="2.5" paint-order="stroke" font-size="11" text-anchor="middle">{}%</text>"#,
            x.px(lx),
            y.px(ly) - 3.0,
            label(level)
        );
    }
    axes(&mut svg, &x, &y, "wedge relief for small firms", "elasticity of substitution");

    // Colour bar.
    let (bx, by, bh) = (WIDTH - RIGHT + 20.0, TOP, 200.0);
    for k in 0..50 {
        let t = k as f64 / 49.0;
        let _ = writeln!(
            svg,
            r#"<rect x="{bx}" y="{:.2}" width="16" height="{:.2}" fill="{}" shape-rendering="crispEdges"/>"#,
            by + bh * (1.0 - t) - bh / 50.0,
            bh / 50.0 + 0.5,
            ramp(t)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}">{}%</text><text x="{}" y="{}">{}%</text>"#,
        bx + 22.0,
        by + 10.0,
        label(zhi),
        bx + 22.0,
        by + bh,
        label(zlo)
    );
    missing_note(&mut svg, result.missing(), by + bh + 24.0);
    close(svg)
}

pub fn frontier_svg(result: &SweepResult) -> String {
    let all = result.cells.iter().filter_map(|c| c.d_informality_pp);
    let (ylo, yhi) = range(all).unwrap_or((-1.0, 1.0));
    let reliefs = &result.spec.relief;
    let x = Axis::new(reliefs[0], reliefs[reliefs.len() - 1], LEFT, WIDTH - RIGHT);
    let y = Axis::new(ylo.min(0.0), yhi.max(0.0), HEIGHT - BOTTOM, TOP);
    let mut svg = String::new();
    open(&mut svg, "Change in informality (p.p.) by small-firm wedge relief");
    axes(&mut svg, &x, &y, "wedge relief for small firms", "change in informality share (p.p.)");
    let _ = writeln!(
        svg,
        r##"<line x1="{LEFT}" y1="{:.2}" x2="{}" y2="{:.2}" stroke="#000" stroke-dasharray="6 4"/>"##,
        y.px(0.0),
        WIDTH - RIGHT,
        y.px(0.0)
    );
    for (k, &s) in result.spec.sigma_sub.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<(f64, Option<f64>)> = result
            .row(s)
            .into_iter()
            .map(|c| (c.coordinates.relief, c.d_informality_pp))
            .collect();
        polyline(&mut svg, &pts, &x, &y, color);
        let ly = TOP + 14.0 + 18.0 * k as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">sigma = {}</text>"#,
            WIDTH - RIGHT + 12.0,
            WIDTH - RIGHT + 32.0,
            WIDTH - RIGHT + 38.0,
            ly + 4.0,
            label(s)
        );
    }
    for c in &result.crossings {
        if let Some(r) = c.relief {
            let _ = writeln!(
                svg,
                r##"<circle cx="{:.2}" cy="{:.2}" r="4" fill="none" stroke="#000"/>"##,
                x.px(r),
                y.px(0.0)
            );
        }
    }
    missing_note(&mut svg, result.missing(), TOP + 30.0 + 18.0 * result.spec.sigma_sub.len() as f64);
    close(svg)
}

/// SVG for a sweep result of any kind.
pub fn sweep_svg(result: &SweepResult) -> String {
    match result.spec.kind {
        SweepKind::HoursCurve => hours_curve_svg(result),
        SweepKind::Heatmap => heatmap_svg(result),
        SweepKind::Frontier => frontier_svg(result),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nice_steps() {
        assert_eq!(nice_step(0.9), 1.0);
        assert_eq!(nice_step(1.7), 2.0);
        assert_eq!(nice_step(2.2), 2.5);
        assert_eq!(nice_step(3.0), 5.0);
        assert_eq!(nice_step(0.03), 0.05);
    }

    #[test]
    fn levels_are_interior_and_round() {
        let l = contour_levels(4.03, 10.67);
        assert_eq!(l, vec![6.0, 8.0, 10.0]);
        assert_eq!(contour_levels(4.5, 7.5), vec![5.0, 5.5, 6.0, 6.5, 7.0]);
        assert!(contour_levels(1.0, 1.0).is_empty());
    }

    #[test]
    fn iso_line_of_a_plane() {
        // z = x, level 0.5 gives a vertical segment at x = 0.5 in each row band.
        let xs = [0.0, 1.0];
        let ys = [0.0, 1.0, 2.0];
        let z = vec![vec![Some(0.0), Some(1.0)]; 3];
        let segs = iso_segments(&xs, &ys, &z, 0.5);
        assert_eq!(segs.len(), 2);
        for s in segs {
            assert!((s[0].0 - 0.5).abs() < 1e-15 && (s[1].0 - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn iso_line_skips_missing() {
        let xs = [0.0, 1.0];
        let ys = [0.0, 1.0];
        let z = vec![vec![Some(0.0), None], vec![Some(0.0), Some(1.0)]];
        assert!(iso_segments(&xs, &ys, &z, 0.5).is_empty());
    }

    #[test]
    fn ramp_endpoints() {
        assert_eq!(ramp(0.0), "#440154");
        assert_eq!(ramp(1.0), "#fde725");
    }
}
