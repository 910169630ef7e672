//! Reader for the LIBSVM sparse text format: `label idx:val idx:val …`, with
//! 1-based strictly increasing indices and `#` comments.

use std::fmt::Write;

use serde::Serialize;

use crate::error::{Error, Result};

/// Iris, features scaled to `[−1, 1]`, 150 rows in three classes of 50.
pub const IRIS_SCALE: &str = include_str!("../../data/iris.scale");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    /// Raw label tokens in row order.
    pub labels: Vec<String>,
    /// Class ids `1..=K` in row order.
    pub classes: Vec<usize>,
    /// Distinct labels; class id `k` is `label_order[k − 1]`.
    pub label_order: Vec<String>,
    /// Sparse entries `(index, value)` per row, 1-based.
    pub entries: Vec<Vec<(usize, f64)>>,
    /// Dense rows of length `dim`.
    pub features: Vec<Vec<f64>>,
    pub dim: usize,
}

impl Dataset {
    pub fn num_classes(&self) -> usize {
        self.label_order.len()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// One line per row, single spaces, no comments.
    pub fn to_libsvm(&self) -> String {
        let mut s = String::new();
        for (label, row) in self.labels.iter().zip(&self.entries) {
            s.push_str(label);
            for (i, v) in row {
                let _ = write!(s, " {i}:{v}");
            }
            s.push('\n');
        }
        s
    }
}

/// Parses LIBSVM text. Labels map to class ids by first appearance unless
/// `label_map` fixes the order.
pub fn parse_libsvm(text: &str, label_map: Option<&[&str]>) -> Result<Dataset> {
    let mut labels = Vec::new();
    let mut entries = Vec::new();
    let mut order: Vec<String> = label_map
        .map(|m| m.iter().map(|s| s.to_string()).collect())
        .unwrap_or_default();
    let mut dim = 0;

    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let err = |col: usize, reason: String| Error::Parse {
            line: ln + 1,
            column: col + 1,
            reason,
        };
        let mut tokens = tokens_with_columns(line);
        let (col, label) = tokens.next().expect("non-empty line has a token");
        if label.parse::<f64>().is_err() {
            return Err(err(col, format!("label `{label}` is not a number")));
        }
        if !order.iter().any(|l| l == label) {
            if label_map.is_some() {
                return Err(err(col, format!("label `{label}` not in label map")));
            }
            order.push(label.to_string());
        }
        let mut row = Vec::new();
        let mut last = 0usize;
        for (col, tok) in tokens {
            let (i, v) = tok
                .split_once(':')
                .ok_or_else(|| err(col, format!("expected `index:value`, got `{tok}`")))?;
            let i: usize = i
                .parse()
                .map_err(|_| err(col, format!("bad index `{i}`")))?;
            if i == 0 {
                return Err(err(col, "indices are 1-based".into()));
            }
            if i <= last {
                return Err(err(col, format!("index {i} does not increase (previous {last})")));
            }
            let v: f64 = v
                .parse()
                .map_err(|_| err(col + tok.find(':').unwrap_or(0) + 1, format!("bad value `{v}`")))?;
            if !v.is_finite() {
                return Err(err(col, "non-finite value".into()));
            }
            last = i;
            row.push((i, v));
        }
        dim = dim.max(last);
        labels.push(label.to_string());
        entries.push(row);
    }

    let classes = labels
        .iter()
        .map(|l| order.iter().position(|o| o == l).expect("label registered") + 1)
        .collect();
    let features = entries
        .iter()
        .map(|row: &Vec<(usize, f64)>| {
            let mut v = vec![0.0; dim];
            for (i, x) in row {
                v[i - 1] = *x;
            }
            v
        })
        .collect();
    Ok(Dataset {
        labels,
        classes,
        label_order: order,
        entries,
        features,
        dim,
    })
}

fn tokens_with_columns(line: &str) -> impl Iterator<Item = (usize, &str)> {
    line.char_indices()
        .filter(move |(i, c)| {
            !c.is_whitespace() && (*i == 0 || line[..*i].chars().last().map_or(true, char::is_whitespace))
        })
        .map(move |(i, _)| {
            let end = line[i..].find(char::is_whitespace).map_or(line.len(), |e| i + e);
            (line[..i].chars().count(), &line[i..end])
        })
}

/// The bundled Iris data.
pub fn iris() -> Dataset {
    parse_libsvm(IRIS_SCALE, Some(&["1", "2", "3"])).expect("bundled data parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_row() {
        let d = parse_libsvm("1 1:0.5 3:2.0", None).unwrap();
        assert_eq!(d.classes, vec![1]);
        assert_eq!(d.features[0], vec![0.5, 0.0, 2.0]);
    }

    #[test]
    fn blank_lines_and_comments_skipped() {
        let d = parse_libsvm("\n# header\n2 1:1 # note\n\n1 2:3\n", None).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.classes, vec![1, 2]);
        assert_eq!(d.label_order, vec!["2", "1"]);
    }

    #[test]
    fn non_ascending_rejected() {
        match parse_libsvm("2 3:1 1:1", None) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (1, 7)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_tokens() {
        assert!(matches!(parse_libsvm("x 1:1", None), Err(Error::Parse { .. })));
        assert!(matches!(parse_libsvm("1 0:1", None), Err(Error::Parse { .. })));
        assert!(matches!(parse_libsvm("1 1:abc", None), Err(Error::Parse { .. })));
        assert!(matches!(parse_libsvm("1 1-2", None), Err(Error::Parse { .. })));
        assert!(matches!(parse_libsvm("4 1:1", Some(&["1", "2"])), Err(Error::Parse { .. })));
    }

    #[test]
    fn round_trip_normalizes_whitespace() {
        let text = "1  1:0.5\t3:2\n-1 2:-0.25\n";
        let d = parse_libsvm(text, None).unwrap();
        assert_eq!(d.to_libsvm(), "1 1:0.5 3:2\n-1 2:-0.25\n");
        assert_eq!(parse_libsvm(&d.to_libsvm(), None).unwrap(), d);
    }

    #[test]
    fn iris_fixture() {
        let d = iris();
        assert_eq!(d.len(), 150);
        assert_eq!(d.dim, 4);
        assert_eq!(d.num_classes(), 3);
        for k in 1..=3 {
            assert_eq!(d.classes.iter().filter(|&&c| c == k).count(), 50);
        }
        assert_eq!(d.to_libsvm(), IRIS_SCALE);
    }
}
