//! LIBSVM sparse text format: `label idx:val idx:val ...` with 1-based indices.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::LogisticDataset;
use crate::{Error, Matrix, Result};

pub fn load_libsvm<P: AsRef<Path>>(path: P) -> Result<LogisticDataset> {
    parse_libsvm(BufReader::new(File::open(path)?))
}

pub fn parse_libsvm<R: BufRead>(reader: R) -> Result<LogisticDataset> {
    let mut labels = Vec::new();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut width = 0;

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().unwrap_or_default();
        let label: f64 = label_tok.parse().map_err(|_| Error::Parse {
            line: lineno,
            message: format!("label `{label_tok}` is not numeric"),
        })?;
        if !label.is_finite() {
            return Err(Error::Parse { line: lineno, message: format!("label `{label_tok}` is not finite") });
        }

        let mut entries = Vec::new();
        let mut seen = BTreeSet::new();
        for tok in tokens {
            let (i, v) = tok.split_once(':').ok_or_else(|| Error::Parse {
                line: lineno,
                message: format!("`{tok}` is not idx:val"),
            })?;
            let i: usize = i.parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("index `{i}` is not a positive integer"),
            })?;
            if i < 1 {
                return Err(Error::Parse { line: lineno, message: "indices are 1-based".into() });
            }
            if !seen.insert(i) {
                return Err(Error::Parse { line: lineno, message: format!("index {i} repeated") });
            }
            let v: f64 = v.parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("value `{v}` is not numeric"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse { line: lineno, message: format!("value `{v}` is not finite") });
            }
            width = width.max(i);
            entries.push((i - 1, v));
        }
        labels.push(label);
        rows.push(entries);
    }

    if rows.is_empty() {
        return Err(Error::Parse { line: 0, message: "no samples".into() });
    }
    if width == 0 {
        return Err(Error::Parse { line: 0, message: "no attributes".into() });
    }

    let mut z = Matrix::zeros(rows.len(), width);
    for (r, entries) in rows.iter().enumerate() {
        for &(c, v) in entries {
            z[(r, c)] = v;
        }
    }
    LogisticDataset::new(z, map_labels(&labels)?)
}

/// `{0,1}` and `{1,2}` style labels map onto `{−1,+1}`; otherwise the
/// smaller of exactly two distinct values becomes `−1`.
fn map_labels(raw: &[f64]) -> Result<Vec<f64>> {
    let mut distinct: Vec<f64> = Vec::new();
    for &l in raw {
        if !distinct.contains(&l) {
            distinct.push(l);
        }
    }
    if distinct.len() > 2 {
        return Err(Error::Label(format!("{} distinct labels, expected two", distinct.len())));
    }
    distinct.sort_by(f64::total_cmp);
    let negative = if distinct.iter().all(|l| *l == 0.0 || *l == 1.0) {
        0.0
    } else if distinct.iter().all(|l| *l == -1.0 || *l == 1.0) {
        -1.0
    } else if distinct.len() == 2 {
        distinct[0]
    } else {
        return Err(Error::Label(format!("cannot map single label {} to ±1", distinct[0])));
    };
    Ok(raw.iter().map(|&l| if l == negative { -1.0 } else { 1.0 }).collect())
}

/// Writes labels as `±1` and only the nonzero attributes.
pub fn write_libsvm<W: Write>(ds: &LogisticDataset, mut w: W) -> Result<()> {
    for (i, label) in ds.labels().iter().enumerate() {
        write!(w, "{}", if *label > 0.0 { "+1" } else { "-1" })?;
        for (j, v) in ds.attributes().row(i).iter().enumerate() {
            if *v != 0.0 {
                write!(w, " {}:{}", j + 1, v)?;
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_from_sparse_line() {
        let ds = parse_libsvm("1 1:0.5 3:2.0\n".as_bytes()).unwrap();
        assert_eq!(ds.features(), 3);
        assert_eq!(ds.attributes().row(0).iter().copied().collect::<Vec<_>>(), vec![0.5, 0.0, 2.0]);
        assert_eq!(ds.labels(), &[1.0]);
    }

    #[test]
    fn zero_one_labels() {
        let ds = parse_libsvm("0 2:1.0\n1 1:1\n".as_bytes()).unwrap();
        assert_eq!(ds.labels(), &[-1.0, 1.0]);
    }

    #[test]
    fn one_two_labels() {
        let ds = parse_libsvm("2 1:1\n1 1:3\n2 2:1\n".as_bytes()).unwrap();
        assert_eq!(ds.labels(), &[1.0, -1.0, 1.0]);
    }

    #[test]
    fn signed_labels_pass_through() {
        let ds = parse_libsvm("+1 1:1\n-1 1:3\n".as_bytes()).unwrap();
        assert_eq!(ds.labels(), &[1.0, -1.0]);
    }

    #[test]
    fn three_classes_rejected() {
        let err = parse_libsvm("1 1:1\n2 1:1\n3 1:1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Label(_)));
    }

    #[test]
    fn malformed_lines() {
        for (text, line) in [
            ("1 1:0.5\n1 0:1\n", 2),
            ("1 a:1\n", 1),
            ("x 1:1\n", 1),
            ("1 1:0.5\n\n1 2-1\n", 3),
            ("1 1:abc\n", 1),
        ] {
            match parse_libsvm(text.as_bytes()) {
                Err(Error::Parse { line: got, .. }) => assert_eq!(got, line, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }
}
