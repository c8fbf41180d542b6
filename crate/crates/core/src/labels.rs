//! Label files: one `object_id,index` pair per line, sorted by id then index.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::LabelSet;

/// Labels keyed by object id; iteration order is the canonical output order.
pub type Labels = BTreeMap<String, LabelSet>;

pub fn write_labels<W: Write>(mut out: W, labels: &Labels) -> std::io::Result<()> {
    for (id, set) in labels {
        for i in set {
            writeln!(out, "{id},{i}")?;
        }
    }
    out.flush()
}

pub fn read_labels<R: BufRead>(input: R) -> Result<Labels> {
    let mut labels = Labels::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<labels>", e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = || Error::Config(format!("label line {}: expected `object_id,index`, got {line:?}", lineno + 1));
        let (id, idx) = line.rsplit_once(',').ok_or_else(bad)?;
        let idx: usize = idx.trim().parse().map_err(|_| bad())?;
        labels.entry(id.trim().to_owned()).or_default().insert(idx);
    }
    Ok(labels)
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<Labels> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_labels(std::io::BufReader::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut labels = Labels::new();
        labels.insert("b".into(), vec![4, 1].into());
        labels.insert("a,x".into(), vec![0].into());
        labels.insert("empty".into(), LabelSet::new());
        let mut buf = Vec::new();
        write_labels(&mut buf, &labels).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "a,x,0\nb,1\nb,4\n");
        let back = read_labels(buf.as_slice()).unwrap();
        assert_eq!(back["b"].as_slice(), &[1, 4]);
        assert_eq!(back["a,x"].as_slice(), &[0]);
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_labels("a;1\n".as_bytes()).is_err());
        assert!(read_labels("a,-1\n".as_bytes()).is_err());
    }
}
