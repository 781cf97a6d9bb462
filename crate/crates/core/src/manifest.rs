//! CSV manifests.
//!
//! An image manifest has rows `image_id,path[,irma_code]`; a labels manifest
//! has rows `image_id,irma_code`. A leading header row whose first field is
//! `image_id` is skipped. Relative image paths resolve against `root`, which
//! defaults to the manifest's directory.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::irma::IrmaCode;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRow {
    pub image_id: String,
    pub path: PathBuf,
    pub label: Option<IrmaCode>,
}

fn records(path: &Path) -> Result<Vec<(usize, csv::StringRecord)>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(file);
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if out.is_empty() && rec.get(0) == Some("image_id") {
            continue;
        }
        out.push((i + 1, rec));
    }
    Ok(out)
}

fn parse_label(field: Option<&str>, path: &Path, line: usize) -> Result<Option<IrmaCode>> {
    match field {
        None | Some("") => Ok(None),
        Some(code) => code
            .parse()
            .map(Some)
            .map_err(|e| Error::Manifest(format!("{}:{line}: {e}", path.display()))),
    }
}

/// Read an image manifest.
pub fn read_manifest(path: impl AsRef<Path>, root: Option<&Path>) -> Result<Vec<ManifestRow>> {
    let path = path.as_ref();
    let base = root
        .map(Path::to_path_buf)
        .unwrap_or_else(|| path.parent().map(Path::to_path_buf).unwrap_or_default());
    records(path)?
        .into_iter()
        .map(|(line, rec)| {
            let (id, img) = match (rec.get(0), rec.get(1)) {
                (Some(id), Some(img)) if !id.is_empty() && !img.is_empty() => (id, img),
                _ => {
                    return Err(Error::Manifest(format!(
                        "{}:{line}: expected image_id,path[,irma_code]",
                        path.display()
                    )))
                }
            };
            let img = PathBuf::from(img);
            Ok(ManifestRow {
                image_id: id.to_string(),
                path: if img.is_absolute() { img } else { base.join(img) },
                label: parse_label(rec.get(2), path, line)?,
            })
        })
        .collect()
}

/// Read an `image_id,irma_code` labels file.
pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<(String, IrmaCode)>> {
    let path = path.as_ref();
    records(path)?
        .into_iter()
        .map(|(line, rec)| {
            let id = rec.get(0).unwrap_or_default();
            let label = parse_label(rec.get(1), path, line)?
                .ok_or_else(|| Error::Manifest(format!("{}:{line}: missing irma_code", path.display())))?;
            Ok((id.to_string(), label))
        })
        .collect()
}
