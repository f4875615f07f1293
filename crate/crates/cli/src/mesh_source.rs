use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use meshnca::mesh::{generate_icosphere, load_obj, Mesh, MAX_ICOSPHERE_LEVEL};
use meshnca::Real;

/// A mesh argument: `icosphere:L` or a path to an OBJ file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MeshSource {
    Icosphere(u32),
    Obj(PathBuf),
}

impl MeshSource {
    pub fn load<T: Real>(&self) -> meshnca::Result<Mesh<T>> {
        match self {
            MeshSource::Icosphere(level) => generate_icosphere(*level),
            MeshSource::Obj(path) => load_obj(path),
        }
    }
}

impl FromStr for MeshSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.strip_prefix("icosphere:") {
            Some(level) => {
                let level: u32 = level.parse().map_err(|_| format!("bad icosphere level in {s:?}"))?;
                if level > MAX_ICOSPHERE_LEVEL {
                    return Err(format!("icosphere level {level} exceeds {MAX_ICOSPHERE_LEVEL}"));
                }
                Ok(MeshSource::Icosphere(level))
            }
            None if s.is_empty() => Err("empty mesh argument".into()),
            None => Ok(MeshSource::Obj(PathBuf::from(s))),
        }
    }
}

impl fmt::Display for MeshSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeshSource::Icosphere(l) => write!(f, "icosphere:{l}"),
            MeshSource::Obj(p) => write!(f, "{}", p.display()),
        }
    }
}
