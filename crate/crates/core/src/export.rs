//! CSV and SVG writers for design sweeps and cross-section profiles.

use std::fmt::Write as _;
use std::io::Write;

use crate::error::Result;
use crate::fold_geometry::{CrossSection, FaceLabel, SweepGrid};

pub const SWEEP_HEADER: [&str; 3] = ["alpha_rad", "l_mm", "delta_h_mm"];
pub const PROFILE_HEADER: [&str; 3] = ["x_mm", "y_mm", "label"];

pub fn write_sweep_csv<W: Write>(grid: &SweepGrid, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SWEEP_HEADER)?;
    for c in &grid.cells {
        out.write_record([c.alpha.to_string(), c.l.to_string(), c.delta_h.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// One row per vertex; `label` names the segment starting there and is empty
/// on the last vertex.
pub fn write_profile_csv<W: Write>(cs: &CrossSection, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(PROFILE_HEADER)?;
    for (i, v) in cs.vertices.iter().enumerate() {
        let label = cs.face_labels.get(i).map_or("", |l| l.as_str());
        out.write_record([v[0].to_string(), v[1].to_string(), label.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

fn colour(label: FaceLabel) -> &'static str {
    match label {
        FaceLabel::HighFriction => "#c0392b",
        FaceLabel::LowFriction => "#2471a3",
        FaceLabel::Limiting => "#7f8c8d",
        FaceLabel::Hinge => "#27ae60",
    }
}

/// Cross-section as an SVG document, one line per segment coloured by face.
pub fn profile_svg(cs: &CrossSection) -> String {
    const SCALE: f64 = 10.0;
    const MARGIN: f64 = 10.0;
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for v in &cs.vertices {
        x0 = x0.min(v[0]);
        x1 = x1.max(v[0]);
        y0 = y0.min(v[1]);
        y1 = y1.max(v[1]);
    }
    let width = (x1 - x0) * SCALE + 2.0 * MARGIN;
    let height = (y1 - y0) * SCALE + 2.0 * MARGIN;
    let px = |x: f64| (x - x0) * SCALE + MARGIN;
    // SVG y grows downwards.
    let py = |y: f64| (y1 - y) * SCALE + MARGIN;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.1}" height="{height:.1}" viewBox="0 0 {width:.1} {height:.1}">"#
    );
    let _ = writeln!(s, r#"  <title>{} mode cross-section</title>"#, cs.mode);
    for (a, b, label) in cs.segments() {
        let _ = writeln!(
            s,
            r#"  <line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="{}" stroke-width="2" data-face="{}"/>"#,
            px(a[0]),
            py(a[1]),
            px(b[0]),
            py(b[1]),
            colour(label),
            label.as_str()
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fold_geometry::{cross_section, sweep_design_space, FoldParameters, FrictionMode};

    #[test]
    fn sweep_csv_has_one_row_per_cell() {
        let g = sweep_design_space((0.2, 0.5), (3.0, 6.0), 1.0, 0.3, 2.0, 4).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("alpha_rad,l_mm,delta_h_mm"));
        assert_eq!(text.lines().count(), 17);
    }

    #[test]
    fn svg_has_a_line_per_segment() {
        let cs = cross_section(&FoldParameters::with_faces(5.0, 5.0, 30f64.to_radians(), 2), FrictionMode::Hf).unwrap();
        let svg = profile_svg(&cs);
        assert_eq!(svg.matches("<line").count(), cs.face_labels.len());
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
