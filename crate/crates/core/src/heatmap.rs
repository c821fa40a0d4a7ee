//! SVG heatmaps of one metric over a sweep grid.

use std::fmt::Write;

use crate::error::Result;
use crate::metrics::{MetricField, MetricGrid, Stage};

const CELL: f64 = 24.0;
const LEFT: f64 = 80.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 70.0;
const LEGEND_W: f64 = 130.0;
const LEGEND_STEPS: usize = 32;

/// Low, middle and high colours of the scale.
const RAMP: [[f64; 3]; 3] = [[49.0, 54.0, 149.0], [255.0, 255.0, 191.0], [165.0, 0.0, 38.0]];

fn colour(t: f64) -> String {
    let t = t.clamp(0.0, 1.0) * 2.0;
    let (a, b, s) = if t <= 1.0 { (RAMP[0], RAMP[1], t) } else { (RAMP[1], RAMP[2], t - 1.0) };
    let c = |i: usize| (a[i] + (b[i] - a[i]) * s).round() as u8;
    format!("#{:02x}{:02x}{:02x}", c(0), c(1), c(2))
}

fn label(v: f64) -> String {
    let s = format!("{v:.4}");
    // trim trailing zeros but keep one digit after the point
    let s = s.trim_end_matches('0');
    if s.ends_with('.') { format!("{s}0") } else { s.to_string() }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders `stage`/`field` of every cell. Undefined and flagged cells are
/// hatched; a constant field gets a single-colour legend.
pub fn render_heatmap(grid: &MetricGrid, stage: Stage, field: MetricField) -> Result<String> {
    grid.validate()?;
    let (nx, ny) = (grid.x.values.len(), grid.y.values.len());
    let values: Vec<Option<f64>> = grid.cells.iter().map(|c| grid.value(c, stage, field)).collect();
    let defined = values.iter().flatten().copied();
    let lo = defined.clone().fold(f64::INFINITY, f64::min);
    let hi = defined.fold(f64::NEG_INFINITY, f64::max);
    let flat = !(hi > lo);
    let scale = |v: f64| if flat { 0.5 } else { (v - lo) / (hi - lo) };

    let width = LEFT + nx as f64 * CELL + LEGEND_W;
    let height = TOP + ny as f64 * CELL + BOTTOM;
    let title = format!("{} {}", stage.name(), field.name());
    let mut s = String::new();
    let w = &mut s;
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="10">"#
    );
    let _ = writeln!(
        w,
        r##"<defs><pattern id="hatch" width="6" height="6" patternUnits="userSpaceOnUse" patternTransform="rotate(45)"><rect width="6" height="6" fill="#ffffff"/><line x1="0" y1="0" x2="0" y2="6" stroke="#888888" stroke-width="2"/></pattern></defs>"##
    );
    let _ = writeln!(w, r#"<text x="{LEFT}" y="20" font-size="13">{}</text>"#, escape(&title));

    for (cell, v) in grid.cells.iter().zip(&values) {
        let x = LEFT + cell.ix as f64 * CELL;
        // y grows upward
        let y = TOP + (ny - 1 - cell.iy) as f64 * CELL;
        let fill = match v {
            Some(v) => colour(scale(*v)),
            None => "url(#hatch)".to_string(),
        };
        let tip = match v {
            Some(v) => format!("{}={}, {}={}: {v}", grid.x.name, cell.x, grid.y.name, cell.y),
            None => format!("{}={}, {}={}: undefined", grid.x.name, cell.x, grid.y.name, cell.y),
        };
        let _ = writeln!(
            w,
            r#"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{fill}"><title>{}</title></rect>"#,
            escape(&tip)
        );
    }

    // ticks: at most ~10 labels per axis
    let stride = |n: usize| n.div_ceil(10).max(1);
    let base = TOP + ny as f64 * CELL;
    for (i, v) in grid.x.values.iter().enumerate().step_by(stride(nx)) {
        let x = LEFT + (i as f64 + 0.5) * CELL;
        let _ = writeln!(
            w,
            r#"<text x="{x}" y="{}" text-anchor="end" transform="rotate(-60 {x} {})">{}</text>"#,
            base + 12.0,
            base + 12.0,
            label(*v)
        );
    }
    for (i, v) in grid.y.values.iter().enumerate().step_by(stride(ny)) {
        let y = TOP + (ny - 1 - i) as f64 * CELL + CELL * 0.5 + 3.0;
        let _ = writeln!(w, r#"<text x="{}" y="{y}" text-anchor="end">{}</text>"#, LEFT - 4.0, label(*v));
    }
    let _ = writeln!(
        w,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>"#,
        LEFT + nx as f64 * CELL / 2.0,
        height - 8.0,
        escape(&grid.x.name)
    );
    let cy = TOP + ny as f64 * CELL / 2.0;
    let _ = writeln!(
        w,
        r#"<text x="16" y="{cy}" text-anchor="middle" font-size="12" transform="rotate(-90 16 {cy})">{}</text>"#,
        escape(&grid.y.name)
    );

    let lx = LEFT + nx as f64 * CELL + 20.0;
    let lh = (ny as f64 * CELL).max(CELL);
    if flat {
        let fill = if lo.is_finite() { colour(0.5) } else { "url(#hatch)".to_string() };
        let _ = writeln!(w, r#"<rect x="{lx}" y="{TOP}" width="16" height="{CELL}" fill="{fill}"/>"#);
        let text = if lo.is_finite() { label(lo) } else { "undefined".to_string() };
        let _ = writeln!(w, r#"<text x="{}" y="{}">{text}</text>"#, lx + 20.0, TOP + CELL * 0.5 + 3.0);
    } else {
        let step = lh / LEGEND_STEPS as f64;
        for k in 0..LEGEND_STEPS {
            let t = 1.0 - (k as f64 + 0.5) / LEGEND_STEPS as f64;
            let _ = writeln!(
                w,
                r#"<rect x="{lx}" y="{}" width="16" height="{}" fill="{}"/>"#,
                TOP + k as f64 * step,
                step,
                colour(t)
            );
        }
        let _ = writeln!(w, r#"<text x="{}" y="{}">{}</text>"#, lx + 20.0, TOP + 8.0, label(hi));
        let _ = writeln!(w, r#"<text x="{}" y="{}">{}</text>"#, lx + 20.0, TOP + lh, label(lo));
    }
    if values.iter().any(Option::is_none) {
        let y = TOP + lh + 12.0;
        let _ = writeln!(w, r#"<rect x="{lx}" y="{y}" width="16" height="16" fill="url(#hatch)"/>"#);
        let _ = writeln!(w, r#"<text x="{}" y="{}">undefined</text>"#, lx + 20.0, y + 12.0);
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_endpoints() {
        assert_eq!(colour(0.0), "#313695");
        assert_eq!(colour(0.5), "#ffffbf");
        assert_eq!(colour(1.0), "#a50026");
        assert_eq!(label(0.5), "0.5");
        assert_eq!(label(-0.12345), "-0.1235");
        assert_eq!(label(2.0), "2.0");
    }
}
