//! Static SVG of a reconstruction: the unit circle (solid) with the
//! observation points as bullets, the exact curve dotted and the
//! reconstruction dashed.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Radii sampled at the common angles `2πj/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotCurves {
    pub exact: Vec<f64>,
    pub reconstructed: Option<Vec<f64>>,
    pub observations: Vec<f64>,
}

const SIZE: f64 = 400.0;
const SCALE: f64 = 180.0;

fn to_px(r: f64, theta: f64) -> (f64, f64) {
    (SIZE / 2.0 + SCALE * r * theta.cos(), SIZE / 2.0 - SCALE * r * theta.sin())
}

fn closed_path(radii: &[f64]) -> String {
    let n = radii.len();
    let mut d = String::new();
    for (j, r) in radii.iter().enumerate() {
        let (x, y) = to_px(*r, 2.0 * PI * j as f64 / n as f64);
        let _ = write!(d, "{}{x:.3},{y:.3} ", if j == 0 { "M" } else { "L" });
    }
    d.push('Z');
    d
}

pub fn render_svg(curves: &PlotCurves) -> Result<String> {
    let n = curves.exact.len();
    if n < 3 {
        return Err(Error::InvalidInput("a curve needs at least 3 samples".into()));
    }
    if curves.reconstructed.as_ref().is_some_and(|r| r.len() != n) {
        return Err(Error::InvalidInput(
            "curves must share the angular grid".into(),
        ));
    }
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="{}" fill="none" stroke="blue" stroke-width="1.5"/>"#,
        closed_path(&vec![1.0; 360])
    );
    let _ = writeln!(
        s,
        r#"<path d="{}" fill="none" stroke="blue" stroke-width="2" stroke-dasharray="2,4" stroke-linecap="round"/>"#,
        closed_path(&curves.exact)
    );
    if let Some(rec) = &curves.reconstructed {
        let _ = writeln!(
            s,
            r#"<path d="{}" fill="none" stroke="red" stroke-width="2" stroke-dasharray="10,6"/>"#,
            closed_path(rec)
        );
    }
    for &theta in &curves.observations {
        let (x, y) = to_px(1.0, theta);
        let _ = writeln!(s, r#"<circle cx="{x:.3}" cy="{y:.3}" r="5" fill="blue"/>"#);
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_plot(curves: &PlotCurves, path: &Path) -> Result<()> {
    std::fs::write(path, render_svg(curves)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(r: f64) -> Vec<f64> {
        vec![r; 720]
    }

    #[test]
    fn exact_only_has_two_paths() {
        let svg = render_svg(&PlotCurves {
            exact: circle(0.5),
            reconstructed: None,
            observations: vec![],
        })
        .unwrap();
        assert_eq!(svg.matches("<path").count(), 2);
    }

    #[test]
    fn full_plot_has_three_curves_and_bullets() {
        let svg = render_svg(&PlotCurves {
            exact: circle(0.5),
            reconstructed: Some(circle(0.4)),
            observations: vec![0.0, 2.0],
        })
        .unwrap();
        assert_eq!(svg.matches("<path").count(), 3);
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!(svg.contains("stroke-dasharray=\"2,4\""));
        assert!(svg.contains("stroke-dasharray=\"10,6\""));
    }

    #[test]
    fn deterministic_bytes_and_io_errors() {
        let c = PlotCurves {
            exact: circle(0.3),
            reconstructed: Some(circle(0.31)),
            observations: vec![1.0],
        };
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a.svg"), dir.path().join("b.svg"));
        emit_plot(&c, &a).unwrap();
        emit_plot(&c, &b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        let bad = dir.path().join("missing").join("x.svg");
        assert!(matches!(emit_plot(&c, &bad), Err(Error::Io(_))));
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let c = PlotCurves {
            exact: circle(0.3),
            reconstructed: Some(vec![0.3; 10]),
            observations: vec![],
        };
        assert!(render_svg(&c).is_err());
    }
}
