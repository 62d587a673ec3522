//! Static SVG rendering of an instance and a tour.

use crate::instance::{Tour, TspInstance};
use std::fmt::Write as _;

const VIEW: f64 = 800.0;
const MARGIN: f64 = 40.0;
const CAPTION_STRIP: f64 = 50.0;

/// Render the city points and the closed tour polyline into a fixed
/// 800x850 viewport, with a caption giving n and the tour length.
pub fn render_svg(inst: &TspInstance, tour: &Tour) -> String {
    assert_eq!(
        tour.order.len(),
        inst.n(),
        "tour does not match instance size"
    );
    let (mut min_x, mut min_y) = (f64::INFINITY, f64::INFINITY);
    let (mut max_x, mut max_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in inst.points() {
        min_x = min_x.min(p.x);
        min_y = min_y.min(p.y);
        max_x = max_x.max(p.x);
        max_y = max_y.max(p.y);
    }
    let span = (max_x - min_x).max(max_y - min_y).max(1e-12);
    let scale = (VIEW - 2.0 * MARGIN) / span;
    let sx = |x: f64| MARGIN + (x - min_x) * scale;
    // SVG y grows downward; flip so the plot keeps plane orientation.
    let sy = |y: f64| MARGIN + (max_y - y) * scale;

    let length = inst.tour_length(tour);
    let height = VIEW + CAPTION_STRIP;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{VIEW}" height="{height}" viewBox="0 0 {VIEW} {height}">"#
    );
    let _ = writeln!(
        svg,
        r#"  <rect width="{VIEW}" height="{height}" fill="white"/>"#
    );
    let mut path = String::new();
    for (k, &v) in tour.order.iter().enumerate() {
        let p = inst.point(v);
        let cmd = if k == 0 { 'M' } else { 'L' };
        let _ = write!(path, "{cmd}{:.2} {:.2} ", sx(p.x), sy(p.y));
    }
    path.push('Z');
    let _ = writeln!(
        svg,
        r##"  <path d="{path}" fill="none" stroke="#2060c0" stroke-width="2"/>"##
    );
    for (i, p) in inst.points().iter().enumerate() {
        let _ = writeln!(
            svg,
            r##"  <circle cx="{:.2}" cy="{:.2}" r="4" fill="#c03020"><title>{i}</title></circle>"##,
            sx(p.x),
            sy(p.y)
        );
    }
    let _ = writeln!(
        svg,
        r#"  <text x="{MARGIN}" y="{:.2}" font-family="monospace" font-size="16">n={} length={:.2}</text>"#,
        VIEW + CAPTION_STRIP / 2.0,
        inst.n(),
        length
    );
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Point, TspInstance};

    fn unit_square() -> TspInstance {
        TspInstance::from_points(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn svg_contains_vertices_and_closed_path() {
        let inst = unit_square();
        let tour = Tour::new(vec![0, 1, 2, 3], 4).unwrap();
        let svg = render_svg(&inst, &tour);
        assert_eq!(svg.matches("<circle").count(), 4);
        let path = svg
            .lines()
            .find(|l| l.contains("<path"))
            .expect("tour path present");
        assert_eq!(path.matches('L').count(), 3);
        assert!(path.contains('Z'), "path must close");
        assert!(svg.contains("n=4 length=4.00"));
    }

    /// Minimal well-formedness check: every opened tag closes, attributes
    /// are quote-balanced, and one root element spans the document.
    fn assert_well_formed_xml(text: &str) {
        assert_eq!(text.matches('"').count() % 2, 0, "unbalanced quotes");
        let mut stack: Vec<String> = Vec::new();
        let mut rest = text;
        while let Some(open) = rest.find('<') {
            let close = rest[open..].find('>').expect("unterminated tag") + open;
            let tag = &rest[open + 1..close];
            rest = &rest[close + 1..];
            if tag.starts_with('?') || tag.starts_with('!') {
                continue;
            }
            if let Some(name) = tag.strip_prefix('/') {
                assert_eq!(stack.pop().as_deref(), Some(name), "mismatched close");
            } else if !tag.ends_with('/') {
                let name = tag.split_whitespace().next().unwrap().to_string();
                stack.push(name);
            }
        }
        assert!(stack.is_empty(), "unclosed tags: {stack:?}");
    }

    #[test]
    fn svg_is_well_formed() {
        let inst = unit_square();
        let tour = Tour::new(vec![0, 2, 1, 3], 4).unwrap();
        assert_well_formed_xml(&render_svg(&inst, &tour));
    }

    #[test]
    fn svg_rejects_mismatched_tour() {
        let inst = unit_square();
        let tour = Tour::new(vec![0, 1, 2], 3).unwrap();
        let r = std::panic::catch_unwind(|| render_svg(&inst, &tour));
        assert!(r.is_err());
    }
}
