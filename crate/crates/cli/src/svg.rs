//! Static SVG rendering of planar covers.

use std::fmt::Write;

use morsecover::{MorseSet, Space};

use crate::report::sig12;

const PALETTE: [&str; 10] =
    ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];

fn color(k: usize) -> String {
    if k < PALETTE.len() {
        return PALETTE[k].to_string();
    }
    // Golden-angle hues beyond the fixed palette.
    format!("hsl({},65%,45%)", (k as f64 * 137.508) % 360.0)
}

/// Draw `sets`, coloring set `i` by `family[i]` (grey when `None`), with a
/// dot at every tag. Only `dim == 2` is supported.
pub fn render(space: &Space, sets: &[MorseSet], family: &[Option<usize>]) -> String {
    assert_eq!(space.dim(), 2, "SVG output is planar");
    let outlines: Vec<Vec<[f64; 2]>> = sets
        .iter()
        .map(|s| s.outline_2d(space, 64).iter().map(|p| [p[0], p[1]]).collect())
        .collect();
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in outlines.iter().flatten() {
        for i in 0..2 {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    if !lo[0].is_finite() {
        (lo, hi) = ([0.0; 2], [1.0; 2]);
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::MIN_POSITIVE);
    let size = 800.0;
    let k = size / span;
    let px = |p: [f64; 2]| ((p[0] - lo[0]) * k + 10.0, (hi[1] - p[1]) * k + 10.0);
    let (w, h) = ((hi[0] - lo[0]) * k + 20.0, (hi[1] - lo[1]) * k + 20.0);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        sig12(w.ceil()),
        sig12(h.ceil()),
        sig12(w.ceil()),
        sig12(h.ceil())
    );
    for (i, poly) in outlines.iter().enumerate() {
        let c = family.get(i).copied().flatten().map(color).unwrap_or_else(|| "#999999".into());
        let pts: Vec<String> = poly
            .iter()
            .map(|p| {
                let (x, y) = px(*p);
                format!("{},{}", sig12(x), sig12(y))
            })
            .collect();
        let _ = writeln!(
            out,
            r#"  <polygon points="{}" fill="{c}" fill-opacity="0.35" stroke="{c}" stroke-width="1" data-set="{i}"/>"#,
            pts.join(" ")
        );
    }
    for s in sets {
        let (x, y) = px([s.tag()[0], s.tag()[1]]);
        let _ = writeln!(out, r#"  <circle cx="{}" cy="{}" r="1.5" fill="black"/>"#, sig12(x), sig12(y));
    }
    out.push_str("</svg>\n");
    out
}
