use std::io::{self, Write};

use gyrostat::rpm::RpmReport;
use gyrostat::Vec3;

const RADIUS: f64 = 240.0;
const MARGIN: f64 = 20.0;

/// Grey level for an admissible-velocity count.
fn shade(count: u8) -> &'static str {
    match count {
        0 => "#ffffff",
        1 => "#d9d9d9",
        2 => "#a6a6a6",
        3 => "#737373",
        _ => "#404040",
    }
}

/// Orthographic view of one hemisphere (`z >= 0` seen from +z, `z < 0` from -z),
/// or `None` if the point is on the other side.
fn project(v: &Vec3, upper: bool) -> Option<(f64, f64)> {
    let z = if upper { v.z } else { -v.z };
    if z < 0.0 {
        return None;
    }
    let x = if upper { v.x } else { -v.x };
    let cx = MARGIN + RADIUS + if upper { 0.0 } else { 2.0 * RADIUS + MARGIN };
    Some((cx + RADIUS * x, MARGIN + RADIUS - RADIUS * v.y))
}

/// Two hemispheres side by side, triangles shaded by fiber count and the
/// generalized boundary drawn on top.
pub fn write_hemispheres<W: Write>(report: &RpmReport, out: &mut W) -> io::Result<()> {
    let width = 4.0 * RADIUS + 3.0 * MARGIN;
    let height = 2.0 * RADIUS + 2.0 * MARGIN;
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    )?;
    let mesh = &report.mesh;
    for upper in [true, false] {
        let cx = MARGIN + RADIUS + if upper { 0.0 } else { 2.0 * RADIUS + MARGIN };
        writeln!(
            out,
            r##"<circle cx="{cx}" cy="{}" r="{RADIUS}" fill="#ffffff" stroke="#000000"/>"##,
            MARGIN + RADIUS
        )?;
        for tri in &mesh.triangles {
            let count = tri.iter().map(|&v| report.counts[v as usize]).min().unwrap_or(0);
            if count == 0 {
                continue;
            }
            let pts: Option<Vec<(f64, f64)>> = tri.iter().map(|&v| project(&mesh.vertices[v as usize], upper)).collect();
            let Some(pts) = pts else { continue };
            let d: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            writeln!(out, r#"<polygon points="{}" fill="{}" stroke="none"/>"#, d.join(" "), shade(count))?;
        }
        for c in &report.boundary {
            let mut run: Vec<String> = Vec::new();
            let flush = |run: &mut Vec<String>, out: &mut W| -> io::Result<()> {
                if run.len() > 1 {
                    writeln!(
                        out,
                        r##"<polyline points="{}" fill="none" stroke="#c00000" stroke-width="1.2"/>"##,
                        run.join(" ")
                    )?;
                }
                run.clear();
                Ok(())
            };
            for nu in &c.curve.points {
                match project(&nu.vec(), upper) {
                    Some((x, y)) => run.push(format!("{x:.2},{y:.2}")),
                    None => flush(&mut run, out)?,
                }
            }
            flush(&mut run, out)?;
        }
    }
    writeln!(out, "</svg>")
}
