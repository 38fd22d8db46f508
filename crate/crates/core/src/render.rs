//! SVG rendering of a placement manifest.

use std::fmt::Write as _;

use crate::manifest::PlacementManifest;

/// Pixels along the long side of the target.
pub const CANVAS: f64 = 1000.0;

/// Number of hue buckets across the index range.
const BUCKETS: u64 = 12;

/// Renders the target outline, the squares filled by index bucket and the
/// leftovers outlined. Output depends only on the manifest.
pub fn render_svg(m: &PlacementManifest) -> String {
    let t = &m.target;
    let scale = CANVAS / t.dx().max(t.dy());
    let (width, height) = (t.dx() * scale, t.dy() * scale);
    let px = |x: f64| (x - t.x0) * scale;
    // SVG's y axis points down.
    let py = |y: f64| (t.y1 - y) * scale;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.3} {height:.3}\">"
    );
    let _ = writeln!(out, "<rect x=\"0\" y=\"0\" width=\"{width:.3}\" height=\"{height:.3}\" fill=\"white\" stroke=\"black\" stroke-width=\"1\"/>");

    let span = m.squares.last().map_or(1, |s| s.n + 1 - m.n0).max(1);
    let _ = writeln!(out, "<g id=\"squares\" stroke=\"none\">");
    for s in &m.squares {
        let bucket = (s.n - m.n0) * BUCKETS / span;
        let hue = bucket * 360 / BUCKETS;
        let side = s.side * scale;
        let _ = writeln!(
            out,
            "<rect class=\"square\" data-n=\"{}\" x=\"{:.3}\" y=\"{:.3}\" width=\"{side:.3}\" height=\"{side:.3}\" fill=\"hsl({hue},70%,55%)\"/>",
            s.n,
            px(s.x),
            py(s.y + s.side),
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(
        out,
        "<g id=\"leftovers\" fill=\"none\" stroke=\"#555\" stroke-width=\"0.2\">"
    );
    for r in &m.leftovers {
        let _ = writeln!(
            out,
            "<rect class=\"leftover\" x=\"{:.3}\" y=\"{:.3}\" width=\"{:.3}\" height=\"{:.3}\"/>",
            px(r.x0),
            py(r.y1),
            r.dx() * scale,
            r.dy() * scale
        );
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    out
}
