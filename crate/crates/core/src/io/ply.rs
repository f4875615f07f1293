use std::io::Write;

use crate::engine::{extract_color_geo, extract_pbr, CellStateBuffer, Layout};
use crate::geom::Vec3;
use crate::mesh::Mesh;
use crate::{Real, Result};

fn byte<T: Real>(v: T) -> u8 {
    (v.as_f64() * 255.0).round().clamp(0.0, 255.0) as u8
}

/// ASCII PLY with per-vertex color. PBR states add height, roughness and AO
/// properties; color/geometry states write displaced positions.
pub fn write_ply<T: Real>(
    mut w: impl Write,
    mesh: &Mesh<T>,
    states: &CellStateBuffer<T>,
    layout: Layout,
    max_displacement: T,
) -> Result<()> {
    let (positions, colors, extra): (Vec<Vec3<T>>, Vec<Vec3<T>>, Option<[Vec<T>; 3]>) = match layout {
        Layout::Pbr => {
            let m = extract_pbr(states, layout)?;
            (mesh.positions().to_vec(), m.albedo, Some([m.height, m.roughness, m.ao]))
        }
        Layout::ColorGeo => {
            let m = extract_color_geo(states, layout, mesh, max_displacement)?;
            (m.displaced_positions, m.color, None)
        }
    };
    writeln!(w, "ply\nformat ascii 1.0\nelement vertex {}", positions.len())?;
    for p in ["x", "y", "z", "nx", "ny", "nz"] {
        writeln!(w, "property float {p}")?;
    }
    for p in ["red", "green", "blue"] {
        writeln!(w, "property uchar {p}")?;
    }
    if extra.is_some() {
        for p in ["height", "roughness", "ao"] {
            writeln!(w, "property float {p}")?;
        }
    }
    writeln!(w, "element face {}\nproperty list uchar int vertex_indices\nend_header", mesh.face_count())?;
    for (i, (p, n)) in positions.iter().zip(mesh.normals()).enumerate() {
        let c = colors[i];
        write!(
            w,
            "{} {} {} {} {} {} {} {} {}",
            p[0], p[1], p[2], n[0], n[1], n[2], byte(c[0]), byte(c[1]), byte(c[2])
        )?;
        if let Some([h, r, a]) = &extra {
            write!(w, " {} {} {}", h[i], r[i], a[i])?;
        }
        writeln!(w)?;
    }
    for t in mesh.triangles() {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}
