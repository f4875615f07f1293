use std::collections::HashMap;

use super::Mesh;
use crate::geom::{self, Vec3};
use crate::{Error, Real, Result};

/// Level 8 already means 655362 vertices.
pub const MAX_ICOSPHERE_LEVEL: u32 = 8;

/// Subdivided icosahedron on the unit sphere with `10·4^level + 2` vertices
/// and `20·4^level` faces.
pub fn generate_icosphere<T: Real>(level: u32) -> Result<Mesh<T>> {
    if level > MAX_ICOSPHERE_LEVEL {
        return Err(Error::LevelTooLarge(level));
    }
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut positions: Vec<Vec3<f64>> = vec![
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    for p in positions.iter_mut() {
        *p = geom::normalize(*p, 0.0).unwrap();
    }
    let mut triangles: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..level {
        let mut cache: HashMap<(u32, u32), u32> = HashMap::with_capacity(triangles.len() * 3 / 2);
        let mut midpoint = |a: u32, b: u32, positions: &mut Vec<Vec3<f64>>| -> u32 {
            let key = if a < b { (a, b) } else { (b, a) };
            *cache.entry(key).or_insert_with(|| {
                let m = geom::scale(geom::add(positions[a as usize], positions[b as usize]), 0.5);
                positions.push(geom::normalize(m, 0.0).unwrap());
                (positions.len() - 1) as u32
            })
        };
        let mut next = Vec::with_capacity(triangles.len() * 4);
        for &[a, b, c] in &triangles {
            let ab = midpoint(a, b, &mut positions);
            let bc = midpoint(b, c, &mut positions);
            let ca = midpoint(c, a, &mut positions);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        triangles = next;
    }

    Mesh::new(positions.into_iter().map(geom::cast).collect(), triangles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{valence_stats, AdjacencyGraph};

    #[test]
    fn counts_follow_closed_form() {
        for level in 0..=4 {
            let m = generate_icosphere::<f64>(level).unwrap();
            let k = 4usize.pow(level);
            assert_eq!(m.vertex_count(), 10 * k + 2);
            assert_eq!(m.face_count(), 20 * k);
        }
    }

    #[test]
    fn level_guard() {
        assert!(matches!(generate_icosphere::<f32>(9), Err(Error::LevelTooLarge(9))));
    }

    #[test]
    fn vertices_on_unit_sphere_and_faces_outward() {
        let m = generate_icosphere::<f64>(2).unwrap();
        for p in m.positions() {
            assert!((geom::norm(*p) - 1.0).abs() < 1e-12);
        }
        for t in m.triangles() {
            let [a, b, c] = t.map(|i| m.positions()[i as usize]);
            let n = geom::cross(geom::sub(b, a), geom::sub(c, a));
            assert!(geom::dot(n, a) > 0.0);
        }
        for (p, n) in m.positions().iter().zip(m.normals()) {
            assert!(geom::dot(*p, *n) > 0.99);
        }
    }

    #[test]
    fn level_one_valences_by_brute_force() {
        let m = generate_icosphere::<f64>(1).unwrap();
        // brute force: count distinct edge partners per vertex straight from the triangles
        let n = m.vertex_count();
        let mut partners = vec![std::collections::BTreeSet::new(); n];
        for t in m.triangles() {
            for k in 0..3 {
                let (a, b) = (t[k] as usize, t[(k + 1) % 3] as usize);
                partners[a].insert(b);
                partners[b].insert(a);
            }
        }
        let fives = partners.iter().filter(|s| s.len() == 5).count();
        let sixes = partners.iter().filter(|s| s.len() == 6).count();
        assert_eq!((fives, sixes), (12, 30));

        let g = AdjacencyGraph::from_mesh(&m);
        for (i, p) in partners.iter().enumerate() {
            let got: Vec<usize> = g.neighbors(i).iter().map(|&j| j as usize).collect();
            assert_eq!(got, p.iter().copied().collect::<Vec<_>>());
        }
        let s = valence_stats(&g);
        assert_eq!((s.min, s.max), (5, 6));
    }

    #[test]
    fn euler_characteristic() {
        for level in 0..=3 {
            let m = generate_icosphere::<f32>(level).unwrap();
            let g = AdjacencyGraph::from_mesh(&m);
            let (v, e, f) = (m.vertex_count() as i64, g.edge_count() as i64, m.face_count() as i64);
            assert_eq!(v - e + f, 2);
        }
    }
}
