//! Newton polygons of φ-adic expansions.

use std::cmp::Ordering;
use std::fmt::Write as _;

use crate::keychain::{Chain, ChainError, ZPoly};
use crate::ordgroup::{GroupElement, GroupSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    /// `m − i` for the digit of index `i`.
    pub x: i64,
    pub y: GroupElement,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub lo: Point,
    pub hi: Point,
    pub slope: GroupElement,
}

impl Segment {
    /// `(i₀, i₁)` for an expansion of φ-degree `m`.
    pub fn indices(&self, m: i64) -> (usize, usize) {
        ((m - self.hi.x) as usize, (m - self.lo.x) as usize)
    }

    pub fn width(&self) -> i64 {
        self.hi.x - self.lo.x
    }

    /// Whether `p` is on the supporting line.
    pub fn contains(&self, p: &Point) -> bool {
        p.x >= self.lo.x && p.x <= self.hi.x && on_line(&self.lo, &self.slope, p) == Ordering::Equal
    }
}

/// Compares `p.y` to the line through `a` with slope `s`, evaluated at `p.x`.
fn on_line(a: &Point, s: &GroupElement, p: &Point) -> Ordering {
    let line = &a.y + &s.scale_int(p.x - a.x);
    p.y.cmp(&line)
}

fn slope(a: &Point, b: &Point) -> GroupElement {
    (&b.y - &a.y).div_int(b.x - a.x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonPolygon {
    /// Sorted by abscissa.
    pub points: Vec<Point>,
    pub segments: Vec<Segment>,
    /// φ-degree of the expansion.
    pub m: i64,
}

impl NewtonPolygon {
    /// Lower convex boundary of `(m − i, β_i)` over the finite `β_i`.
    pub fn from_values(values: &[GroupElement]) -> NewtonPolygon {
        let m = values.len() as i64 - 1;
        let mut points: Vec<Point> = values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .map(|(i, v)| Point { x: m - i as i64, y: v.clone() })
            .collect();
        points.sort_by_key(|p| p.x);
        let mut hull: Vec<Point> = Vec::new();
        for p in &points {
            while hull.len() >= 2 {
                let n = hull.len();
                if slope(&hull[n - 2], &hull[n - 1]) >= slope(&hull[n - 1], p) {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p.clone());
        }
        let segments = hull
            .windows(2)
            .map(|w| Segment {
                lo: w[0].clone(),
                hi: w[1].clone(),
                slope: slope(&w[0], &w[1]),
            })
            .collect();
        NewtonPolygon { points, segments, m }
    }

    /// Polygon of `f` in base `phi`, ordinates measured by `V_level`.
    pub fn build(chain: &Chain, level: usize, f: &ZPoly, phi: &ZPoly) -> Result<(NewtonPolygon, Vec<ZPoly>), ChainError> {
        let digits = f.digits(phi);
        let mut vals = Vec::with_capacity(digits.len());
        for d in &digits {
            vals.push(chain.value(d, level)?);
        }
        Ok((NewtonPolygon::from_values(&vals), digits))
    }

    /// Segments with slope strictly above `current`; all segments when `current` is `None`.
    pub fn principal_part(&self, current: Option<&GroupElement>) -> Vec<Segment> {
        self.segments
            .iter()
            .filter(|s| current.is_none_or(|c| s.slope > *c))
            .cloned()
            .collect()
    }

    pub fn slopes(&self) -> Vec<GroupElement> {
        self.segments.iter().map(|s| s.slope.clone()).collect()
    }

    /// Every point lies on or above every supporting line.
    pub fn is_lower_boundary(&self) -> bool {
        self.segments
            .iter()
            .all(|s| self.points.iter().all(|p| on_line(&s.lo, &s.slope, p) != Ordering::Less))
    }

    pub fn to_svg(&self, title: &str, principal: &[Segment]) -> String {
        let rank1 = self
            .points
            .first()
            .and_then(|p| p.y.spec())
            .is_some_and(|s| !matches!(s.as_ref(), GroupSpec::Lex { .. }));
        if rank1 {
            self.svg_plot(title, principal)
        } else {
            self.svg_table(title, principal)
        }
    }

    fn svg_plot(&self, title: &str, principal: &[Segment]) -> String {
        let (w, h, pad) = (640.0, 480.0, 60.0);
        let ys: Vec<f64> = self.points.iter().filter_map(|p| p.y.to_f64()).collect();
        let (ymin, ymax) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(*y), b.max(*y)));
        let (ymin, ymax) = if ymax > ymin { (ymin, ymax) } else { (ymin - 1.0, ymin + 1.0) };
        let xmax = self.m.max(1) as f64;
        let sx = |x: i64| pad + (x as f64) / xmax * (w - 2.0 * pad);
        let sy = |y: &GroupElement| h - pad - (y.to_f64().unwrap_or(0.0) - ymin) / (ymax - ymin) * (h - 2.0 * pad);
        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
        );
        let _ = writeln!(s, r#"<title>{}</title>"#, xml_escape(title));
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{pad}" y="24" font-family="sans-serif" font-size="14">{}</text>"#,
            xml_escape(title)
        );
        let _ = writeln!(
            s,
            r#"<line x1="{pad}" y1="{y}" x2="{x2}" y2="{y}" stroke="black"/>"#,
            y = h - pad + 10.0,
            x2 = w - pad
        );
        for x in 0..=self.m {
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="middle">{x}</text>"#,
                sx(x),
                h - pad + 26.0
            );
        }
        for seg in &self.segments {
            let main = principal.contains(seg);
            let (x1, y1, x2, y2) = (sx(seg.lo.x), sy(&seg.lo.y), sx(seg.hi.x), sy(&seg.hi.y));
            let _ = writeln!(
                s,
                r#"<line x1="{x1:.1}" y1="{y1:.1}" x2="{x2:.1}" y2="{y2:.1}" stroke="{}" stroke-width="{}"/>"#,
                if main { "crimson" } else { "gray" },
                if main { 3 } else { 1 }
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12" fill="{}">slope {}</text>"#,
                (x1 + x2) / 2.0 + 6.0,
                (y1 + y2) / 2.0 - 6.0,
                if main { "crimson" } else { "gray" },
                xml_escape(&seg.slope.to_string())
            );
        }
        for p in &self.points {
            let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="4" fill="navy"/>"#, sx(p.x), sy(&p.y));
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="10">({}, {})</text>"#,
                sx(p.x) + 6.0,
                sy(&p.y) + 14.0,
                p.x,
                xml_escape(&p.y.to_string())
            );
        }
        s.push_str("</svg>\n");
        s
    }

    fn svg_table(&self, title: &str, principal: &[Segment]) -> String {
        let rows = self.points.len() + self.segments.len() + 3;
        let h = 30 + 18 * rows;
        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="640" height="{h}">"#);
        let _ = writeln!(s, r#"<title>{}</title>"#, xml_escape(title));
        let mut y = 24;
        let mut line = |s: &mut String, t: &str| {
            let _ = writeln!(s, r#"<text x="10" y="{y}" font-family="monospace" font-size="12">{}</text>"#, xml_escape(t));
            y += 18;
        };
        line(&mut s, title);
        line(&mut s, "points (m - i, value):");
        for p in &self.points {
            line(&mut s, &format!("  ({}, {})", p.x, p.y));
        }
        line(&mut s, "segments:");
        for seg in &self.segments {
            let mark = if principal.contains(seg) { " [principal]" } else { "" };
            line(&mut s, &format!("  x {}..{}  slope {}{mark}", seg.lo.x, seg.hi.x, seg.slope));
        }
        s.push_str("</svg>\n");
        s
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// `α − β`, the spread of φ_level-exponents attaining `V_level(f)`.
pub fn proj(chain: &Chain, level: usize, f: &ZPoly) -> Result<u64, ChainError> {
    let digits = chain.expand_top(f, level)?;
    let mu = &chain.node(level).mu;
    let mut vals = Vec::new();
    for (i, d) in digits.iter().enumerate() {
        if d.is_zero() {
            continue;
        }
        let v = chain.value(d, level - 1)?;
        let v = if i == 0 { v } else { &v + &mu.scale_int(i as i64) };
        vals.push((i, v));
    }
    let Some(min) = vals.iter().map(|(_, v)| v.clone()).min() else {
        return Ok(0);
    };
    let hits: Vec<usize> = vals.iter().filter(|(_, v)| *v == min).map(|(i, _)| *i).collect();
    Ok((hits.last().unwrap() - hits[0]) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn q37() -> Arc<GroupSpec> {
        Arc::new(GroupSpec::quadratic(37).unwrap())
    }

    fn g(s: &Arc<GroupSpec>, t: &str) -> GroupElement {
        GroupElement::parse(s, t).unwrap()
    }

    #[test]
    fn ex46_first_polygon() {
        let s = q37();
        let vals = vec![g(&s, "4 + 2*sqrt37"), g(&s, "317"), GroupElement::Infinity, GroupElement::Infinity, g(&s, "0")];
        let np = NewtonPolygon::from_values(&vals);
        assert_eq!(np.segments.len(), 1);
        assert_eq!(np.segments[0].slope, g(&s, "1 + 1/2*sqrt37"));
        assert_eq!(np.segments[0].indices(4), (0, 4));
        assert!(np.is_lower_boundary());
    }

    #[test]
    fn single_point_no_segments() {
        let s = q37();
        let np = NewtonPolygon::from_values(&[GroupElement::Infinity, g(&s, "0")]);
        assert!(np.segments.is_empty());
    }

    #[test]
    fn principal_part_filters() {
        let s = Arc::new(GroupSpec::Rational);
        let vals = vec![g(&s, "3"), g(&s, "1"), g(&s, "0")];
        let np = NewtonPolygon::from_values(&vals);
        assert_eq!(np.slopes(), vec![g(&s, "1"), g(&s, "2")]);
        assert_eq!(np.principal_part(Some(&g(&s, "3/2"))).len(), 1);
        assert!(np.principal_part(Some(&g(&s, "2"))).is_empty());
        assert_eq!(np.principal_part(None).len(), 2);
    }

    #[test]
    fn collinear_points_do_not_split_segments() {
        let s = Arc::new(GroupSpec::Rational);
        let vals = vec![g(&s, "2"), g(&s, "1"), g(&s, "0")];
        let np = NewtonPolygon::from_values(&vals);
        assert_eq!(np.segments.len(), 1);
        assert!(np.segments[0].contains(&np.points[1]));
    }
}
