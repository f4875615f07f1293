use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::Mesh;
use crate::{Error, Real, Result};

/// Reads a Wavefront OBJ file. Only `v` and `f` records are used; polygons
/// are fan-triangulated and `/vt/vn` suffixes on face corners are ignored.
pub fn load_obj<T: Real>(path: impl AsRef<Path>) -> Result<Mesh<T>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_obj(&text, path)
}

/// Parses OBJ text; `origin` is only used in error messages.
pub fn parse_obj<T: Real>(text: &str, origin: &Path) -> Result<Mesh<T>> {
    let err = |line: usize, msg: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        msg,
    };
    let mut positions = Vec::new();
    let mut triangles = Vec::new();

    for (no, raw) in text.lines().enumerate() {
        let line_no = no + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("v") => {
                let mut p = [T::zero(); 3];
                for c in p.iter_mut() {
                    let s = tok
                        .next()
                        .ok_or_else(|| err(line_no, "vertex needs three coordinates".into()))?;
                    let v: f64 = s
                        .parse()
                        .map_err(|_| err(line_no, format!("bad coordinate `{s}`")))?;
                    *c = T::of(v);
                }
                positions.push(p);
            }
            Some("f") => {
                let mut corners = Vec::with_capacity(4);
                for s in tok {
                    let idx = s.split('/').next().unwrap_or("");
                    let i: i64 = idx
                        .parse()
                        .map_err(|_| err(line_no, format!("bad face index `{s}`")))?;
                    // 1-based, negative values count back from the last vertex read so far
                    let resolved = match i {
                        0 => return Err(err(line_no, "face index 0 is invalid".into())),
                        i if i > 0 => i - 1,
                        i => positions.len() as i64 + i,
                    };
                    if resolved < 0 || resolved >= positions.len() as i64 {
                        return Err(err(
                            line_no,
                            format!("face index {i} out of range ({} vertices so far)", positions.len()),
                        ));
                    }
                    corners.push(resolved as u32);
                }
                if corners.len() < 3 {
                    return Err(err(line_no, "face needs at least three vertices".into()));
                }
                for k in 1..corners.len() - 1 {
                    triangles.push([corners[0], corners[k], corners[k + 1]]);
                }
            }
            _ => {}
        }
    }
    if positions.is_empty() || triangles.is_empty() {
        return Err(Error::InvalidMesh(format!(
            "{}: empty mesh ({} vertices, {} faces)",
            origin.display(),
            positions.len(),
            triangles.len()
        )));
    }
    Mesh::new(positions, triangles)
}

/// Writes positions and faces; coordinates use shortest round-trip formatting.
pub fn write_obj<T: Real>(mesh: &Mesh<T>, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    for p in mesh.positions() {
        writeln!(out, "v {} {} {}", p[0].as_f64(), p[1].as_f64(), p[2].as_f64()).unwrap();
    }
    for t in mesh.triangles() {
        writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1).unwrap();
    }
    fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_icosphere, AdjacencyGraph};

    fn parse(text: &str) -> Result<Mesh<f64>> {
        parse_obj(text, Path::new("test.obj"))
    }

    #[test]
    fn single_triangle() {
        let m = parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n").unwrap();
        assert_eq!((m.vertex_count(), m.face_count()), (3, 1));
        assert!(m.normals().iter().all(|n| *n == [0.0, 0.0, 1.0]));
    }

    #[test]
    fn tetrahedron_with_suffixes_and_comments() {
        let text = "# tet\nv 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nvt 0 0\nvn 0 0 1\n\
                    f 1/1/1 3/1/1 2/1/1\nf 1//1 2//1 4//1\nf 1 4 3 # back\nf -3 -2 -1\n";
        let m = parse(text).unwrap();
        assert_eq!((m.vertex_count(), m.face_count()), (4, 4));
        let g = AdjacencyGraph::from_mesh(&m);
        assert!((0..4).all(|i| g.degree(i) == 3));
        for n in m.normals() {
            assert!((crate::geom::norm(*n) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn quad_is_fan_triangulated() {
        let m = parse("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n").unwrap();
        assert_eq!(m.triangles(), &[[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        match parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 7\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        match parse("v 0 0\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
        match parse("v 0 0 0\nv 1 x 0\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("# nothing\n"), Err(Error::InvalidMesh(_))));
        assert!(matches!(parse("v 0 0 0\n"), Err(Error::InvalidMesh(_))));
    }

    #[test]
    fn icosphere_round_trip() {
        let m = generate_icosphere::<f64>(5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ico5.obj");
        write_obj(&m, &path).unwrap();
        let back: Mesh<f64> = load_obj(&path).unwrap();
        assert_eq!(back.triangles(), m.triangles());
        assert_eq!(back.positions(), m.positions());
        assert_eq!(AdjacencyGraph::from_mesh(&back), AdjacencyGraph::from_mesh(&m));
    }
}
