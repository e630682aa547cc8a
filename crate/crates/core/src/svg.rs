//! SVG pictures of rank-2 fans.

use std::fmt::Write;

use num::ToPrimitive;

use crate::error::{Error, Result};
use crate::lattice::IntVector;
use crate::polyhedra::Fan;

const SIZE: f64 = 240.0;
const RADIUS: f64 = 100.0;

fn unit(v: &IntVector) -> (f64, f64) {
    let x = v.coords()[0].to_f64().unwrap_or(0.0);
    let y = v.coords()[1].to_f64().unwrap_or(0.0);
    let n = (x * x + y * y).sqrt();
    (x / n, y / n)
}

/// Screen coordinates: origin at the centre, y pointing up.
fn screen(p: (f64, f64), r: f64) -> (f64, f64) {
    (SIZE / 2.0 + p.0 * r, SIZE / 2.0 - p.1 * r)
}

/// Rays are drawn as labelled segments of the unit disk, maximal cones
/// shaded, and rays shared by two maximal cones (walls) highlighted.
pub fn render_fan_svg(fan: &Fan) -> Result<String> {
    if fan.rank() != 2 {
        return Err(Error::UnsupportedRank(fan.rank()));
    }
    let mut s = String::new();
    let c = SIZE / 2.0;
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#).unwrap();
    writeln!(s, r##"<g stroke="#bbbbbb" stroke-width="1"><line x1="0" y1="{c}" x2="{SIZE}" y2="{c}"/><line x1="{c}" y1="0" x2="{c}" y2="{SIZE}"/></g>"##).unwrap();
    let maxes = fan.maximal_cones();
    for m in maxes.iter().filter(|m| m.len() == 2) {
        let a = screen(unit(&fan.rays()[m[0]]), RADIUS);
        let b = screen(unit(&fan.rays()[m[1]]), RADIUS);
        // counter-clockwise in the plane is clockwise on screen
        let (ua, ub) = (unit(&fan.rays()[m[0]]), unit(&fan.rays()[m[1]]));
        let cross = ua.0 * ub.1 - ua.1 * ub.0;
        let (p, q) = if cross >= 0.0 { (a, b) } else { (b, a) };
        writeln!(
            s,
            r##"<path class="cone" d="M {c:.3} {c:.3} L {:.3} {:.3} A {RADIUS} {RADIUS} 0 0 1 {:.3} {:.3} Z" fill="#9ecae1" fill-opacity="0.5" stroke="none"/>"##,
            p.0, p.1, q.0, q.1
        )
        .unwrap();
    }
    for (i, r) in fan.rays().iter().enumerate() {
        let wall = maxes.iter().filter(|m| m.len() == 2 && m.contains(&i)).count() >= 2;
        let (colour, width) = if wall { ("#d62728", 2.5) } else { ("#08306b", 1.5) };
        let e = screen(unit(r), RADIUS);
        let l = screen(unit(r), RADIUS + 14.0);
        writeln!(
            s,
            r#"<line class="{}" x1="{c:.3}" y1="{c:.3}" x2="{:.3}" y2="{:.3}" stroke="{colour}" stroke-width="{width}"/>"#,
            if wall { "wall" } else { "ray" },
            e.0,
            e.1
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" font-family="monospace" font-size="10" text-anchor="middle">{r}</text>"#,
            l.0, l.1
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}
