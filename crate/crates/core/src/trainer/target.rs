use ndarray::Array2;

use crate::mesh::Mesh;
use crate::{Error, Real, Result};

/// Per-vertex supervision in display range `[0, 1]`: column `a` of `values`
/// is compared with state channel `channel_map[a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetField<T> {
    pub values: Array2<T>,
    pub channel_map: Vec<usize>,
}

impl<T: Real> TargetField<T> {
    pub fn new(values: Array2<T>, channel_map: Vec<usize>) -> Result<Self> {
        if values.ncols() != channel_map.len() || channel_map.is_empty() {
            return Err(Error::Shape(format!(
                "target has {} columns but {} mapped channels",
                values.ncols(),
                channel_map.len()
            )));
        }
        let mut sorted = channel_map.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != channel_map.len() {
            return Err(Error::InvalidArgument("channel_map has duplicates".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("target has non-finite values".into()));
        }
        Ok(TargetField { values, channel_map })
    }

    pub fn cells(&self) -> usize {
        self.values.nrows()
    }

    pub(crate) fn check(&self, cells: usize, channels: usize) -> Result<()> {
        if self.cells() != cells {
            return Err(Error::Shape(format!("target has {} rows for {cells} cells", self.cells())));
        }
        if let Some(&c) = self.channel_map.iter().find(|&&c| c >= channels) {
            return Err(Error::Shape(format!("target maps channel {c} but state has {channels}")));
        }
        Ok(())
    }
}

/// Band frequency of the built-in stripes target.
pub const STRIPES_FREQUENCY: f64 = 2.0;

/// Two-color bands along the y axis: the color at height `y` blends from
/// `dark` to `light` by `(1 + cos(pi * frequency * y)) / 2`. Supervises
/// channels 0-2.
pub fn stripes_target<T: Real>(mesh: &Mesh<T>, frequency: f64) -> TargetField<T> {
    const LIGHT: [f64; 3] = [0.95, 0.85, 0.3];
    const DARK: [f64; 3] = [0.1, 0.2, 0.55];
    let n = mesh.vertex_count();
    let values = Array2::from_shape_fn((n, 3), |(i, c)| {
        let y = mesh.positions()[i][1].as_f64();
        let w = 0.5 * (1.0 + (std::f64::consts::PI * frequency * y).cos());
        T::of(DARK[c] + (LIGHT[c] - DARK[c]) * w)
    });
    TargetField {
        values,
        channel_map: vec![0, 1, 2],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_icosphere;

    #[test]
    fn stripes_shape_and_range() {
        let mesh = generate_icosphere::<f64>(2).unwrap();
        let t = stripes_target(&mesh, STRIPES_FREQUENCY);
        assert_eq!(t.values.dim(), (162, 3));
        assert!(t.values.iter().all(|&v| (0.0..=1.0).contains(&v)));
        let nearest = |y: f64| {
            (0..162)
                .min_by(|&a, &b| (mesh.positions()[a][1] - y).abs().total_cmp(&(mesh.positions()[b][1] - y).abs()))
                .unwrap()
        };
        assert!(t.values[[nearest(0.5), 0]] < 0.2);
        assert!(t.values[[nearest(0.0), 0]] > 0.9);
    }

    #[test]
    fn validation() {
        assert!(TargetField::new(Array2::<f64>::zeros((3, 2)), vec![0]).is_err());
        assert!(TargetField::new(Array2::<f64>::zeros((3, 2)), vec![1, 1]).is_err());
        let t = TargetField::new(Array2::<f64>::zeros((3, 2)), vec![0, 5]).unwrap();
        assert!(t.check(3, 4).is_err());
        assert!(t.check(3, 6).is_ok());
        assert!(t.check(4, 6).is_err());
    }
}
