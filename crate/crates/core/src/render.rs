//! Deterministic SVG figures.

use std::fmt::Write;

use crate::geometry::{Point, PolygonalQuadrilateral, SideLabel};
use crate::medial_axis::GraphExport;
use crate::tridisk::ContactDisk;

const WIDTH: f64 = 800.0;
const PAD: f64 = 24.0;
const PARABOLA_SAMPLES: usize = 32;

pub fn side_color(side: SideLabel) -> &'static str {
    match side {
        SideLabel::A1 => "#c0392b",
        SideLabel::B1 => "#2471a3",
        SideLabel::A2 => "#e67e22",
        SideLabel::B2 => "#17a589",
    }
}

/// Everything drawn in one figure; only the polygon is required.
#[derive(Clone, Debug, Default)]
pub struct Figure<'a> {
    pub title: String,
    pub quad: Option<&'a PolygonalQuadrilateral>,
    /// Inner approximation levels, drawn thin under the rest.
    pub levels: Vec<&'a PolygonalQuadrilateral>,
    pub medial_axis: Option<&'a GraphExport>,
    pub disk: Option<&'a ContactDisk>,
    pub witnesses: Vec<Vec<Point>>,
}

struct View {
    x0: f64,
    y1: f64,
    s: f64,
}

impl View {
    fn x(&self, p: Point) -> f64 {
        PAD + (p.x - self.x0) * self.s
    }

    fn y(&self, p: Point) -> f64 {
        PAD + (self.y1 - p.y) * self.s
    }

    fn points(&self, pts: &[Point]) -> String {
        let v: Vec<String> = pts.iter().map(|&p| format!("{:.3},{:.3}", self.x(p), self.y(p))).collect();
        v.join(" ")
    }
}

impl Figure<'_> {
    pub fn to_svg(&self) -> String {
        let quad = self.quad.expect("figure needs a polygon");
        let bb = quad.bbox();
        let span = bb.width().max(bb.height()).max(f64::MIN_POSITIVE);
        let s = (WIDTH - 2.0 * PAD) / span;
        let view = View {
            x0: bb.min.x,
            y1: bb.max.y,
            s,
        };
        let (w, h) = (2.0 * PAD + bb.width() * s, 2.0 * PAD + bb.height() * s);
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.3} {h:.3}">"#
        );
        let _ = writeln!(out, "<title>{}</title>", escape(&self.title));
        let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
        let _ = writeln!(
            out,
            r##"<polygon class="domain" points="{}" fill="#f4f6f7" stroke="none"/>"##,
            view.points(quad.vertices())
        );
        for level in &self.levels {
            let _ = writeln!(
                out,
                r##"<polygon class="level" points="{}" fill="none" stroke="#aab7b8" stroke-width="0.8"/>"##,
                view.points(level.vertices())
            );
        }
        for side in SideLabel::ALL {
            let _ = writeln!(
                out,
                r#"<polyline class="side side-{side}" points="{}" fill="none" stroke="{}" stroke-width="3" stroke-linejoin="round"/>"#,
                view.points(&quad.side_polyline(side)),
                side_color(side)
            );
        }
        if let Some(g) = self.medial_axis {
            for e in &g.edges {
                let _ = writeln!(
                    out,
                    r##"<polyline class="medial-axis {}" points="{}" fill="none" stroke="#566573" stroke-width="1.2" stroke-dasharray="6 4"/>"##,
                    e.kind,
                    view.points(&e.geometry.polyline(PARABOLA_SAMPLES))
                );
            }
        }
        for path in &self.witnesses {
            let _ = writeln!(
                out,
                r##"<polyline class="witness" points="{}" fill="none" stroke="#7d3c98" stroke-width="2"/>"##,
                view.points(path)
            );
        }
        if let Some(d) = self.disk {
            let _ = writeln!(
                out,
                r##"<circle class="disk" cx="{:.3}" cy="{:.3}" r="{:.3}" fill="none" stroke="#17202a" stroke-width="2"/>"##,
                view.x(d.center),
                view.y(d.center),
                d.radius * s
            );
            let _ = writeln!(
                out,
                r##"<circle class="center" cx="{:.3}" cy="{:.3}" r="2.5" fill="#17202a"/>"##,
                view.x(d.center),
                view.y(d.center)
            );
            for c in &d.contacts {
                let color = c.labels.iter().next().map_or("#17202a", side_color);
                let names: Vec<String> = c.labels.iter().map(|l| l.to_string()).collect();
                let _ = writeln!(
                    out,
                    r##"<circle class="contact" cx="{:.3}" cy="{:.3}" r="5" fill="{color}" stroke="#17202a"><title>{}</title></circle>"##,
                    view.x(c.point),
                    view.y(c.point),
                    names.join(",")
                );
            }
        }
        for k in 0..4 {
            let p = quad.quad_vertex(k);
            let _ = writeln!(
                out,
                r##"<circle class="quad-vertex" cx="{:.3}" cy="{:.3}" r="4" fill="#17202a"/>"##,
                view.x(p),
                view.y(p)
            );
            let _ = writeln!(
                out,
                r##"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="14" fill="#17202a">v{}</text>"##,
                view.x(p) + 6.0,
                view.y(p) - 6.0,
                k + 1
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::unit_square;
    use crate::medial_axis::compute_medial_axis;
    use crate::tridisk::find_three_side_disk;

    #[test]
    fn square_figure() {
        let q = unit_square();
        let g = compute_medial_axis(&q).unwrap().export();
        let (d, _) = find_three_side_disk(&q).unwrap();
        let fig = Figure {
            title: "square".into(),
            quad: Some(&q),
            medial_axis: Some(&g),
            disk: Some(&d),
            ..Default::default()
        };
        let svg = fig.to_svg();
        assert_eq!(svg.matches("class=\"medial-axis").count(), 4);
        assert_eq!(svg.matches("class=\"disk\"").count(), 1);
        assert_eq!(svg, fig.to_svg());
    }

    #[test]
    fn polygon_only() {
        let q = unit_square();
        let svg = Figure {
            title: "a < b".into(),
            quad: Some(&q),
            ..Default::default()
        }
        .to_svg();
        assert!(svg.contains("a &lt; b"));
        assert!(!svg.contains("medial-axis") && !svg.contains("class=\"disk\""));
    }
}
