//! Structure files: `{"universe": n, "signature": {"edge": 2}, "relations": {"edge": [[0,1]]}}`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FiniteStructure, Signature};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureFile {
    pub universe: usize,
    pub signature: BTreeMap<String, usize>,
    #[serde(default)]
    pub relations: BTreeMap<String, Vec<Vec<usize>>>,
}

impl TryFrom<StructureFile> for FiniteStructure {
    type Error = Error;

    fn try_from(file: StructureFile) -> Result<Self> {
        let sig = Signature::new(file.signature)?;
        FiniteStructure::from_tuples(sig, file.universe, file.relations)
    }
}

impl From<&FiniteStructure> for StructureFile {
    fn from(a: &FiniteStructure) -> Self {
        StructureFile {
            universe: a.size(),
            signature: a.signature().iter().map(|(k, v)| (k.to_string(), v)).collect(),
            relations: a
                .signature()
                .iter()
                .zip(a.relations())
                .map(|((k, _), r)| (k.to_string(), r.tuples().collect()))
                .collect(),
        }
    }
}

impl FiniteStructure {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<StructureFile>(text)?.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&StructureFile::from(self)).expect("structure files serialize")
    }
}

pub fn load_structure(path: &Path) -> Result<FiniteStructure> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    FiniteStructure::from_json(&text).map_err(|e| match e {
        Error::Json(m) => Error::Json(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Loads a class of structures from a directory of `.json` files (sorted by
/// file name) or from one file holding a JSON array. Each structure is
/// labeled with its file name, or `file[i]` for array members.
pub fn load_class(path: &Path) -> Result<Vec<(String, FiniteStructure)>> {
    if path.is_dir() {
        let mut files: Vec<_> = std::fs::read_dir(path)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        files.sort();
        files
            .into_iter()
            .map(|p| {
                let label = p.file_name().unwrap_or_default().to_string_lossy().into_owned();
                Ok((label, load_structure(&p)?))
            })
            .collect()
    } else {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let files: Vec<StructureFile> = serde_json::from_str(&text)?;
        let stem = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
        files
            .into_iter()
            .enumerate()
            .map(|(i, f)| Ok((format!("{stem}[{i}]"), f.try_into()?)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_the_documented_layout() {
        let a = FiniteStructure::from_json(r#"{"universe": 2, "signature": {"edge": 2}, "relations": {"edge": [[0,1],[1,0]]}}"#)
            .unwrap();
        assert_eq!(a.size(), 2);
        assert_eq!(a.relation("edge").unwrap().len(), 2);
        assert_eq!(FiniteStructure::from_json(&a.to_json()).unwrap(), a);
    }

    #[test]
    fn rejects_bad_tuples_and_fields() {
        assert!(FiniteStructure::from_json(r#"{"universe": 2, "signature": {"edge": 2}, "relations": {"edge": [[0,2]]}}"#).is_err());
        assert!(FiniteStructure::from_json(r#"{"universe": 2, "signature": {"edge": 2}, "relations": {"edge": [[0]]}}"#).is_err());
        assert!(FiniteStructure::from_json(r#"{"universe": 0, "signature": {}}"#).is_err());
        assert!(FiniteStructure::from_json(r#"{"universe": 1, "signature": {}, "extra": 1}"#).is_err());
    }

    #[test]
    fn class_from_directory_and_array() {
        let dir = tempfile::tempdir().unwrap();
        let a = r#"{"universe": 1, "signature": {"p": 1}, "relations": {"p": [[0]]}}"#;
        let b = r#"{"universe": 2, "signature": {"p": 1}}"#;
        std::fs::write(dir.path().join("b.json"), b).unwrap();
        std::fs::write(dir.path().join("a.json"), a).unwrap();
        std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        let class = load_class(dir.path()).unwrap();
        assert_eq!(class.iter().map(|(l, _)| l.as_str()).collect::<Vec<_>>(), vec!["a.json", "b.json"]);
        let arr = dir.path().join("family.json");
        std::fs::write(&arr, format!("[{a},{b}]")).unwrap();
        let class = load_class(&arr).unwrap();
        assert_eq!(class[1].0, "family.json[1]");
        assert_eq!(class[1].1.size(), 2);
    }
}
