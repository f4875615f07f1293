use super::model::Layout;
use super::state::CellStateBuffer;
use crate::geom::{self, Vec3};
use crate::mesh::Mesh;
use crate::{Error, Real, Result};

/// State value to display range: `clamp((v + 1) / 2, 0, 1)`.
#[inline]
pub fn to_display<T: Real>(v: T) -> T {
    let half = T::of(0.5);
    ((v + T::one()) * half).max(T::zero()).min(T::one())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PbrMaps<T> {
    pub albedo: Vec<Vec3<T>>,
    pub normal: Vec<Vec3<T>>,
    pub height: Vec<T>,
    pub roughness: Vec<T>,
    pub ao: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColorGeoMaps<T> {
    pub color: Vec<Vec3<T>>,
    pub displaced_positions: Vec<Vec3<T>>,
}

fn check_layout(layout: Layout, want: Layout, channels: usize) -> Result<()> {
    if layout != want {
        return Err(Error::WrongLayout {
            expected: want.name(),
            actual: layout.name(),
        });
    }
    if channels < want.min_channels() {
        return Err(Error::Shape(format!(
            "{} layout needs {} channels, state has {channels}",
            want.name(),
            want.min_channels()
        )));
    }
    Ok(())
}

/// Channels 0-2 albedo, 3-5 normal, 6 height, 7 roughness, 8 AO.
pub fn extract_pbr<T: Real>(states: &CellStateBuffer<T>, layout: Layout) -> Result<PbrMaps<T>> {
    check_layout(layout, Layout::Pbr, states.channels())?;
    let n = states.cells();
    let mut maps = PbrMaps {
        albedo: Vec::with_capacity(n),
        normal: Vec::with_capacity(n),
        height: Vec::with_capacity(n),
        roughness: Vec::with_capacity(n),
        ao: Vec::with_capacity(n),
    };
    let eps = T::of(1e-8);
    for row in states.values.rows() {
        maps.albedo.push([to_display(row[0]), to_display(row[1]), to_display(row[2])]);
        maps.normal.push(geom::normalize([row[3], row[4], row[5]], eps).unwrap_or([T::zero(), T::zero(), T::one()]));
        maps.height.push(to_display(row[6]));
        maps.roughness.push(to_display(row[7]));
        maps.ao.push(to_display(row[8]));
    }
    Ok(maps)
}

/// Channels 0-2 color; channel 3 displaces along the vertex normal by up to
/// `max_displacement`.
pub fn extract_color_geo<T: Real>(
    states: &CellStateBuffer<T>,
    layout: Layout,
    mesh: &Mesh<T>,
    max_displacement: T,
) -> Result<ColorGeoMaps<T>> {
    check_layout(layout, Layout::ColorGeo, states.channels())?;
    if states.cells() != mesh.vertex_count() {
        return Err(Error::Shape("state and mesh sizes differ".into()));
    }
    let mut color = Vec::with_capacity(states.cells());
    let mut displaced = Vec::with_capacity(states.cells());
    for ((row, p), n) in states.values.rows().into_iter().zip(mesh.positions()).zip(mesh.normals()) {
        color.push([to_display(row[0]), to_display(row[1]), to_display(row[2])]);
        let h = row[3].max(-T::one()).min(T::one());
        displaced.push(geom::add(*p, geom::scale(*n, h * max_displacement)));
    }
    Ok(ColorGeoMaps {
        color,
        displaced_positions: displaced,
    })
}

/// 0.05 x bounding-box diagonal.
pub fn default_max_displacement<T: Real>(mesh: &Mesh<T>) -> T {
    T::of(0.05) * mesh.bbox_diagonal()
}
