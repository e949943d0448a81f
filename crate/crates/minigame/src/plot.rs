//! Static SVG trajectory plots.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use minigame_core::engine::TelemetryRecord;
use minigame_core::geometry::{Bounds, Vec2};

const SCALE: f64 = 200.0;
const PAD: f64 = 20.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// Renders walls, zones, trajectories, start and goal markers and
/// collisions. Output depends only on the records.
pub fn render_svg(records: &[TelemetryRecord]) -> String {
    let mut bounds = Bounds { min: Vec2::ZERO, max: Vec2::new(3.0, 3.0) };
    let mut segments = Vec::new();
    let mut zones = Vec::new();
    let mut robots = Vec::new();
    let mut paths: BTreeMap<u32, Vec<Vec2>> = BTreeMap::new();
    let mut collisions = Vec::new();
    for r in records {
        match r {
            TelemetryRecord::Header { bounds: b, segments: s, zones: z, robots: rs, .. } => {
                bounds = *b;
                segments = s.clone();
                zones = z.clone();
                robots = rs.clone();
            }
            TelemetryRecord::State { robot, x, y, .. } => paths.entry(robot.0).or_default().push(Vec2::new(*x, *y)),
            TelemetryRecord::Collision { x, y, .. } => collisions.push(Vec2::new(*x, *y)),
            _ => {}
        }
    }

    let width = bounds.width() * SCALE + 2.0 * PAD;
    let height = bounds.height() * SCALE + 2.0 * PAD;
    let px = |p: Vec2| ((p.x - bounds.min.x) * SCALE + PAD, (bounds.max.y - p.y) * SCALE + PAD);
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.2} {height:.2}">"#
    )
    .unwrap();
    writeln!(out, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##).unwrap();
    for z in &zones {
        let pts: Vec<String> = z.vertices().iter().map(|v| px(*v)).map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        writeln!(out, r##"<polygon points="{}" fill="#fff3c4" stroke="#e0c060" stroke-width="1"/>"##, pts.join(" "))
            .unwrap();
    }
    for s in &segments {
        let (x1, y1) = px(s.a);
        let (x2, y2) = px(s.b);
        writeln!(
            out,
            r##"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="#000000" stroke-width="3"/>"##
        )
        .unwrap();
    }
    for (id, pts) in &paths {
        let color = PALETTE[*id as usize % PALETTE.len()];
        let d: Vec<String> = pts.iter().map(|p| px(*p)).map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, d.join(" ")).unwrap();
    }
    for r in &robots {
        let color = PALETTE[r.id.0 as usize % PALETTE.len()];
        let (sx, sy) = px(r.start);
        let (gx, gy) = px(r.goal);
        let radius = r.radius * SCALE;
        writeln!(
            out,
            r#"<circle cx="{sx:.2}" cy="{sy:.2}" r="{radius:.2}" fill="none" stroke="{color}" stroke-dasharray="4 3"/>"#
        )
        .unwrap();
        writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="10" height="10" fill="{color}"/>"#,
            gx - 5.0,
            gy - 5.0
        )
        .unwrap();
    }
    for c in &collisions {
        let (x, y) = px(*c);
        writeln!(
            out,
            r##"<path d="M{:.2},{:.2} L{:.2},{:.2} M{:.2},{:.2} L{:.2},{:.2}" stroke="#ff0000" stroke-width="3" class="collision"/>"##,
            x - 6.0,
            y - 6.0,
            x + 6.0,
            y + 6.0,
            x - 6.0,
            y + 6.0,
            x + 6.0,
            y - 6.0
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}
