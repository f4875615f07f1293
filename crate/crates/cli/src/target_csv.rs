use std::path::Path;

use anyhow::{bail, Context};
use ndarray::Array2;
use meshnca::trainer::TargetField;

/// Reads one row per vertex of comma-separated display-range values. A
/// first line that does not parse as numbers is treated as a header.
pub fn read_target_csv(path: &Path, channel_map: Option<Vec<usize>>) -> anyhow::Result<TargetField<f32>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut rows: Vec<Vec<f32>> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let parsed: Result<Vec<f32>, _> = record.iter().map(str::parse).collect();
        match parsed {
            Ok(v) => rows.push(v),
            Err(_) if line == 0 => continue,
            Err(e) => bail!("{}:{}: {e}", path.display(), line + 1),
        }
    }
    let width = rows.first().map(Vec::len).unwrap_or(0);
    if width == 0 {
        bail!("{} has no data rows", path.display());
    }
    if let Some(bad) = rows.iter().position(|r| r.len() != width) {
        bail!("{}: row {} has {} values, expected {width}", path.display(), bad + 1, rows[bad].len());
    }
    let values = Array2::from_shape_vec((rows.len(), width), rows.concat())?;
    let map = channel_map.unwrap_or_else(|| (0..width).collect());
    Ok(TargetField::new(values, map)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn header_and_rows() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "r,g,b\n0.1,0.2,0.3\n1, 0.5, 0").unwrap();
        let t = read_target_csv(f.path(), None).unwrap();
        assert_eq!(t.values.dim(), (2, 3));
        assert_eq!(t.values[[1, 1]], 0.5);
        assert_eq!(t.channel_map, vec![0, 1, 2]);
    }

    #[test]
    fn ragged_rows_fail() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "0.1,0.2\n0.3").unwrap();
        assert!(read_target_csv(f.path(), None).is_err());
    }
}
