//! Plain-text map files.
//!
//! One item per line; `#` starts a comment.
//!
//! ```text
//! bounds 0 0 3 3
//! # wall segment: x1 y1 x2 y2
//! 0 1.9 1.25 1.9
//! zone doorway 1.25 1.7 1.75 1.7 1.75 2.1 1.25 2.1
//! ```
//!
//! `bounds` is optional and defaults to the bounding box of all segments and
//! zone vertices. Zones are convex polygons given as vertex coordinates.

use std::fmt::Write as _;
use std::path::Path;

use minigame_core::geometry::{Bounds, ConflictZone, Segment, Vec2, VectorMap};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MapFile {
    pub map: VectorMap,
    pub zones: Vec<ConflictZone>,
}

fn numbers(origin: &str, line: usize, fields: &[&str]) -> Result<Vec<f64>> {
    fields
        .iter()
        .map(|f| match f.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(Error::parse(origin, line, format!("expected a number, found `{f}`"))),
        })
        .collect()
}

/// Parses map text; `origin` names the source in diagnostics.
pub fn parse_map(text: &str, origin: &str) -> Result<MapFile> {
    let mut bounds = None;
    let mut segments = Vec::new();
    let mut zones: Vec<(usize, ConflictZone)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        match fields[0] {
            "bounds" => {
                if bounds.is_some() {
                    return Err(Error::parse(origin, n, "bounds given twice"));
                }
                let v = numbers(origin, n, &fields[1..])?;
                if v.len() != 4 {
                    return Err(Error::parse(origin, n, "bounds needs 4 numbers: xmin ymin xmax ymax"));
                }
                let b = Bounds::new(Vec2::new(v[0], v[1]), Vec2::new(v[2], v[3]))
                    .map_err(|e| Error::parse(origin, n, e.to_string()))?;
                bounds = Some((n, b));
            }
            "zone" => {
                let Some(name) = fields.get(1) else {
                    return Err(Error::parse(origin, n, "zone needs a name"));
                };
                if zones.iter().any(|(_, z)| z.id == *name) {
                    return Err(Error::parse(origin, n, format!("duplicate zone `{name}`")));
                }
                let v = numbers(origin, n, &fields[2..])?;
                if v.len() % 2 != 0 {
                    return Err(Error::parse(origin, n, "zone vertices need x y pairs"));
                }
                let region = v.chunks(2).map(|c| Vec2::new(c[0], c[1])).collect();
                let zone = ConflictZone::new(*name, region).map_err(|e| Error::parse(origin, n, e.to_string()))?;
                zones.push((n, zone));
            }
            _ => {
                let v = numbers(origin, n, &fields)?;
                if v.len() != 4 {
                    return Err(Error::parse(origin, n, "segment needs 4 numbers: x1 y1 x2 y2"));
                }
                let s = Segment::new(Vec2::new(v[0], v[1]), Vec2::new(v[2], v[3]));
                if s.is_degenerate() {
                    return Err(Error::parse(origin, n, "segment has zero length"));
                }
                segments.push((n, s));
            }
        }
    }

    let bounds = match bounds {
        Some((_, b)) => b,
        None => {
            let points: Vec<Vec2> = segments
                .iter()
                .flat_map(|(_, s)| [s.a, s.b])
                .chain(zones.iter().flat_map(|(_, z)| z.vertices().to_vec()))
                .collect();
            if points.is_empty() {
                return Err(Error::parse(origin, 0, "map has no bounds, segments or zones"));
            }
            let min = points.iter().fold(Vec2::new(f64::INFINITY, f64::INFINITY), |m, p| {
                Vec2::new(m.x.min(p.x), m.y.min(p.y))
            });
            let max = points.iter().fold(Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY), |m, p| {
                Vec2::new(m.x.max(p.x), m.y.max(p.y))
            });
            Bounds::new(min, max).map_err(|e| Error::parse(origin, 0, e.to_string()))?
        }
    };
    for (n, s) in &segments {
        if !bounds.contains(s.a) || !bounds.contains(s.b) {
            return Err(Error::parse(origin, *n, "segment leaves the map bounds"));
        }
    }
    for (n, z) in &zones {
        if !z.vertices().iter().all(|v| bounds.contains(*v)) {
            return Err(Error::parse(origin, *n, "zone leaves the map bounds"));
        }
    }
    let map = VectorMap::new(bounds, segments.into_iter().map(|(_, s)| s).collect())?;
    Ok(MapFile { map, zones: zones.into_iter().map(|(_, z)| z).collect() })
}

pub fn load_map(path: &Path) -> Result<MapFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_map(&text, &path.display().to_string())
}

/// Map text that [`parse_map`] reads back to the same map.
pub fn format_map(map: &VectorMap, zones: &[ConflictZone]) -> String {
    let b = map.bounds();
    let mut out = String::new();
    writeln!(out, "bounds {} {} {} {}", b.min.x, b.min.y, b.max.x, b.max.y).unwrap();
    for s in map.segments() {
        writeln!(out, "{} {} {} {}", s.a.x, s.a.y, s.b.x, s.b.y).unwrap();
    }
    for z in zones {
        write!(out, "zone {}", z.id).unwrap();
        for v in z.vertices() {
            write!(out, " {} {}", v.x, v.y).unwrap();
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use minigame_core::engine::presets;
    use proptest::prelude::*;

    #[test]
    fn reads_segments_zones_and_comments() {
        let text = "# arena\nbounds 0 0 3 3\n0 1.9 1.25 1.9   # left wall\n\nzone door 1.25 1.7 1.75 1.7 1.75 2.1 1.25 2.1\n";
        let m = parse_map(text, "t").unwrap();
        assert_eq!(m.map.segments().len(), 1);
        assert_eq!(m.zones[0].id, "door");
        assert_eq!(m.zones[0].vertices().len(), 4);
        assert_eq!(m.map.bounds().max, Vec2::new(3.0, 3.0));
    }

    #[test]
    fn bounds_default_to_the_content() {
        let m = parse_map("0 0 2 0\n2 0 2 1\n", "t").unwrap();
        assert_eq!(m.map.bounds().min, Vec2::new(0.0, 0.0));
        assert_eq!(m.map.bounds().max, Vec2::new(2.0, 1.0));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("bounds 0 0 3 3\n0 0 1\n", 2, "4 numbers"),
            ("bounds 0 0 3 3\n\n0 0 x 1\n", 3, "`x`"),
            ("bounds 0 0 3 3\n0 0 4 0\n", 2, "bounds"),
            ("bounds 0 0 3 3\n1 1 1 1\n", 2, "zero length"),
            ("bounds 0 0 3 3\nzone a 0 0 1 0 1 1 0 1\nzone a 0 0 1 0 1 1\n", 3, "duplicate"),
            ("bounds 0 0 3 3\nzone a 0 0 1 0 0.5 0.1 1 1 0 1\n", 2, "convex"),
            ("bounds 0 0 3 3\nbounds 0 0 3 3\n", 2, "twice"),
        ];
        for (text, line, needle) in cases {
            match parse_map(text, "m.map") {
                Err(Error::Parse { line: l, message, .. }) => {
                    assert_eq!(l, line, "{text:?}: {message}");
                    assert!(message.contains(needle), "{text:?}: {message}");
                }
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn presets_round_trip() {
        for s in [presets::doorway(), presets::intersection()] {
            let text = format_map(&s.map, &s.zones);
            let back = parse_map(&text, "t").unwrap();
            assert_eq!(back.map, s.map);
            assert_eq!(back.zones, s.zones);
        }
    }

    proptest! {
        #[test]
        fn format_then_parse_is_identity(
            segs in proptest::collection::vec((0.0f64..5.0, 0.0f64..5.0, 0.0f64..5.0, 0.0f64..5.0), 1..12),
            (x0, y0, w, h) in (0.0f64..4.0, 0.0f64..4.0, 0.01f64..1.0, 0.01f64..1.0),
        ) {
            let segments: Vec<Segment> = segs
                .into_iter()
                .map(|(a, b, c, d)| Segment::new(Vec2::new(a, b), Vec2::new(c, d)))
                .filter(|s| !s.is_degenerate())
                .collect();
            let bounds = Bounds::new(Vec2::ZERO, Vec2::new(5.0, 5.0)).unwrap();
            let map = VectorMap::new(bounds, segments).unwrap();
            let zone = ConflictZone::rectangle("z", Vec2::new(x0, y0), Vec2::new(x0 + w, y0 + h)).unwrap();
            let back = parse_map(&format_map(&map, std::slice::from_ref(&zone)), "t").unwrap();
            prop_assert_eq!(back.map, map);
            prop_assert_eq!(back.zones, vec![zone]);
        }
    }
}
