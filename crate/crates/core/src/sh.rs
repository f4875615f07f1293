//! Real spherical harmonics up to degree 2 and rotation about a normal.

use serde::{Deserialize, Serialize};

use crate::geom::{self, Vec3};
use crate::{Error, Real, Result};

/// Unit-length tolerance for direction arguments.
pub const UNIT_TOL: f64 = 1e-6;

/// Highest spherical-harmonics degree used as perception basis (0, 1 or 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct ShBasisConfig {
    degree: u8,
}

impl ShBasisConfig {
    pub const MAX_BASIS: usize = 9;

    pub fn new(degree: u8) -> Result<Self> {
        if degree > 2 {
            return Err(Error::InvalidArgument(format!(
                "spherical harmonics degree must be 0, 1 or 2, got {degree}"
            )));
        }
        Ok(ShBasisConfig { degree })
    }

    pub fn degree(self) -> u8 {
        self.degree
    }

    /// `(degree + 1)^2`
    pub fn basis_count(self) -> usize {
        let d = self.degree as usize + 1;
        d * d
    }

    /// Short names in evaluation order, e.g. `Y1m1` for degree 1, order -1.
    pub fn basis_names(self) -> &'static [&'static str] {
        const NAMES: [&str; 9] = [
            "Y00", "Y1m1", "Y10", "Y11", "Y2m2", "Y2m1", "Y20", "Y21", "Y22",
        ];
        &NAMES[..self.basis_count()]
    }
}

impl Default for ShBasisConfig {
    fn default() -> Self {
        ShBasisConfig { degree: 1 }
    }
}

impl TryFrom<u8> for ShBasisConfig {
    type Error = Error;
    fn try_from(d: u8) -> Result<Self> {
        Self::new(d)
    }
}

impl From<ShBasisConfig> for u8 {
    fn from(c: ShBasisConfig) -> u8 {
        c.degree
    }
}

/// Evaluates the basis at a unit direction without checking its length.
/// Writes `config.basis_count()` values into `out`.
#[inline]
pub fn sh_basis<T: Real>(d: Vec3<T>, config: ShBasisConfig, out: &mut [T]) {
    let [x, y, z] = d;
    let pi = T::PI();
    out[0] = (T::one() / (T::of(4.0) * pi)).sqrt();
    if config.degree >= 1 {
        let c1 = (T::of(3.0) / (T::of(4.0) * pi)).sqrt();
        out[1] = c1 * y;
        out[2] = c1 * z;
        out[3] = c1 * x;
    }
    if config.degree >= 2 {
        let c2 = T::of(0.5) * (T::of(15.0) / pi).sqrt();
        let c20 = T::of(0.25) * (T::of(5.0) / pi).sqrt();
        let c22 = T::of(0.25) * (T::of(15.0) / pi).sqrt();
        out[4] = c2 * x * y;
        out[5] = c2 * y * z;
        out[6] = c20 * (T::of(3.0) * z * z - T::one());
        out[7] = c2 * x * z;
        out[8] = c22 * (x * x - y * y);
    }
}

/// Real spherical harmonics in the order `Y00, Y1-1, Y10, Y11, Y2-2, ..., Y22`.
pub fn sh_eval<T: Real>(direction: Vec3<T>, config: ShBasisConfig) -> Result<Vec<T>> {
    check_unit(direction)?;
    let mut out = vec![T::zero(); config.basis_count()];
    sh_basis(direction, config, &mut out);
    Ok(out)
}

pub(crate) fn check_unit<T: Real>(d: Vec3<T>) -> Result<()> {
    let n = geom::norm(d).as_f64();
    if (n - 1.0).abs() > UNIT_TOL || !n.is_finite() {
        return Err(Error::NonUnitDirection(n));
    }
    Ok(())
}

/// Rodrigues rotation of `direction` by `angle` around `normal`, renormalized.
pub fn rotate_about_normal<T: Real>(direction: Vec3<T>, normal: Vec3<T>, angle: T) -> Vec3<T> {
    let (s, c) = angle.sin_cos();
    let r = geom::add(
        geom::add(geom::scale(direction, c), geom::scale(geom::cross(normal, direction), s)),
        geom::scale(normal, geom::dot(normal, direction) * (T::one() - c)),
    );
    geom::normalize(r, T::zero()).unwrap_or(direction)
}
