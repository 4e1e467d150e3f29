//! Text formats: sparse `label idx:val ...` rows, dense instance files, and
//! one-value-per-line point files.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::rng::{sample_without_replacement, seeded};
use crate::{Matrix, Vector};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// One sparse-format row: label and (0-based column, value) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRow {
    pub label: f64,
    pub entries: Vec<(usize, f64)>,
}

fn parse_value(tok: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_err(line, format!("non-numeric {what} `{tok}`")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite {what} `{tok}`")));
    }
    Ok(v)
}

/// Parses one non-blank line. Indices are 1-based and strictly ascending.
pub fn parse_sparse_line(text: &str, line: usize) -> Result<SparseRow> {
    let mut toks = text.split_whitespace();
    let label_tok = toks.next().ok_or_else(|| parse_err(line, "empty line"))?;
    let label = parse_value(label_tok, line, "label")?;
    let mut entries: Vec<(usize, f64)> = Vec::new();
    for tok in toks {
        let (idx_tok, val_tok) = tok
            .split_once(':')
            .ok_or_else(|| parse_err(line, format!("missing `:` in `{tok}`")))?;
        if idx_tok.starts_with('-') {
            return Err(parse_err(line, format!("negative index `{idx_tok}`")));
        }
        let idx: usize = idx_tok
            .parse()
            .map_err(|_| parse_err(line, format!("invalid index `{idx_tok}`")))?;
        if idx == 0 {
            return Err(parse_err(line, "index 0 (indices are 1-based)"));
        }
        let val = parse_value(val_tok, line, "value")?;
        if let Some(&(prev, _)) = entries.last() {
            if idx - 1 <= prev {
                return Err(parse_err(
                    line,
                    format!("index {idx} not ascending after {}", prev + 1),
                ));
            }
        }
        entries.push((idx - 1, val));
    }
    Ok(SparseRow { label, entries })
}

/// Parses all rows; blank lines are skipped but still counted for line numbers.
pub fn parse_sparse_text(text: &str) -> Result<Vec<SparseRow>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_sparse_line(l, i + 1))
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SparseLoadOptions {
    /// Column count; must cover the largest index. Defaults to the largest index.
    pub n_features: Option<usize>,
    /// Keep this many rows, drawn uniformly without replacement.
    pub rows: Option<usize>,
    /// Keep this many columns, drawn uniformly without replacement.
    pub cols: Option<usize>,
    pub seed: u64,
}

/// Dense `(A, b)` from sparse rows. Subsampled rows and columns keep their
/// original relative order; rows are drawn before columns from one stream.
pub fn sparse_to_dense(rows: &[SparseRow], opts: &SparseLoadOptions) -> Result<(Matrix, Vector)> {
    let max_col = rows
        .iter()
        .filter_map(|r| r.entries.last().map(|&(j, _)| j + 1))
        .max()
        .unwrap_or(0);
    let n = match opts.n_features {
        Some(n) if n < max_col => {
            return Err(Error::invalid(format!(
                "n_features {n} below largest index {max_col}"
            )))
        }
        Some(n) => n,
        None => max_col,
    };
    let mut rng = seeded(opts.seed);
    let pick = |total: usize, want: Option<usize>, rng: &mut _, what: &str| -> Result<Vec<usize>> {
        match want {
            None => Ok((0..total).collect()),
            Some(k) if k > total => {
                Err(Error::invalid(format!("cannot keep {k} of {total} {what}")))
            }
            Some(k) => {
                let mut idx = sample_without_replacement(rng, total, k);
                idx.sort_unstable();
                Ok(idx)
            }
        }
    };
    let row_idx = pick(rows.len(), opts.rows, &mut rng, "rows")?;
    let col_idx = pick(n, opts.cols, &mut rng, "columns")?;
    let mut col_map = vec![usize::MAX; n];
    for (new, &old) in col_idx.iter().enumerate() {
        col_map[old] = new;
    }
    let mut a = Matrix::zeros(row_idx.len(), col_idx.len());
    let mut b = Vector::zeros(row_idx.len());
    for (r, &src) in row_idx.iter().enumerate() {
        b[r] = rows[src].label;
        for &(j, v) in &rows[src].entries {
            if col_map[j] != usize::MAX {
                a[(r, col_map[j])] = v;
            }
        }
    }
    Ok((a, b))
}

pub fn load_sparse_text(path: &Path, opts: &SparseLoadOptions) -> Result<(Matrix, Vector)> {
    let text = fs::read_to_string(path)?;
    sparse_to_dense(&parse_sparse_text(&text)?, opts)
}

/// Writes nonzero entries only, with shortest round-trip float formatting.
pub fn write_sparse_text(a: &Matrix, b: &Vector) -> Result<String> {
    if a.nrows() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: b.len(),
        });
    }
    let mut out = String::new();
    for i in 0..a.nrows() {
        out.push_str(&b[i].to_string());
        for j in 0..a.ncols() {
            let v = a[(i, j)];
            if v != 0.0 {
                out.push_str(&format!(" {}:{}", j + 1, v));
            }
        }
        out.push('\n');
    }
    Ok(out)
}

/// `m n` header, `A` row-major, then `b`; whitespace-separated.
pub fn write_dense_instance(a: &Matrix, b: &Vector) -> String {
    let mut out = format!("{} {}\n", a.nrows(), a.ncols());
    for i in 0..a.nrows() {
        let row: Vec<String> = (0..a.ncols()).map(|j| a[(i, j)].to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    let bs: Vec<String> = b.iter().map(|v| v.to_string()).collect();
    out.push_str(&bs.join(" "));
    out.push('\n');
    out
}

fn tokens_with_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .flat_map(|(i, l)| l.split_whitespace().map(move |t| (i + 1, t)))
}

pub fn parse_dense_instance(text: &str) -> Result<(Matrix, Vector)> {
    let mut toks = tokens_with_lines(text);
    let mut dim = |what: &str| -> Result<usize> {
        let (line, tok) = toks
            .next()
            .ok_or_else(|| parse_err(1, format!("missing {what}")))?;
        tok.parse()
            .map_err(|_| parse_err(line, format!("invalid {what} `{tok}`")))
    };
    let m = dim("row count")?;
    let n = dim("column count")?;
    let mut values = Vec::with_capacity(m * n + m);
    let mut last_line = 1;
    for (line, tok) in toks {
        if values.len() == m * n + m {
            return Err(parse_err(line, "trailing data after b"));
        }
        values.push(parse_value(tok, line, "entry")?);
        last_line = line;
    }
    if values.len() != m * n + m {
        return Err(parse_err(
            last_line,
            format!("expected {} values, found {}", m * n + m, values.len()),
        ));
    }
    let a = Matrix::from_row_slice(m, n, &values[..m * n]);
    let b = Vector::from_column_slice(&values[m * n..]);
    Ok((a, b))
}

/// True when the first non-blank line is exactly two unsigned integers.
fn looks_dense(text: &str) -> bool {
    let Some(first) = text.lines().find(|l| !l.trim().is_empty()) else {
        return false;
    };
    let toks: Vec<&str> = first.split_whitespace().collect();
    toks.len() == 2 && toks.iter().all(|t| t.parse::<usize>().is_ok())
}

/// Dense or sparse instance file, detected from the first non-blank line.
pub fn load_instance(path: &Path, opts: &SparseLoadOptions) -> Result<(Matrix, Vector)> {
    let text = fs::read_to_string(path)?;
    if looks_dense(&text) {
        parse_dense_instance(&text)
    } else {
        sparse_to_dense(&parse_sparse_text(&text)?, opts)
    }
}

pub fn write_points(x: &Vector) -> String {
    x.iter().map(|v| format!("{v}\n")).collect()
}

pub fn parse_points(text: &str) -> Result<Vector> {
    let values = tokens_with_lines(text)
        .map(|(line, tok)| parse_value(tok, line, "point entry"))
        .collect::<Result<Vec<f64>>>()?;
    Ok(Vector::from_vec(values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_line_definition() {
        let row = parse_sparse_line("1.5 3:2.0 7:-1", 1).unwrap();
        assert_eq!(row.label, 1.5);
        assert_eq!(row.entries, vec![(2, 2.0), (6, -1.0)]);
        let (a, b) = sparse_to_dense(&[row], &SparseLoadOptions::default()).unwrap();
        assert_eq!(a.shape(), (1, 7));
        assert_eq!(b[0], 1.5);
        assert_eq!(a[(0, 2)], 2.0);
        assert_eq!(a[(0, 6)], -1.0);
        assert_eq!(a.iter().filter(|v| **v != 0.0).count(), 2);
    }

    #[test]
    fn empty_features_give_zero_row() {
        let rows = parse_sparse_text("2\n-1 2:4\n").unwrap();
        let (a, b) = sparse_to_dense(
            &rows,
            &SparseLoadOptions {
                n_features: Some(3),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(a.row(0).iter().copied().collect::<Vec<_>>(), vec![0.0; 3]);
        assert_eq!(b.as_slice(), &[2.0, -1.0]);
    }

    #[test]
    fn malformed_lines_carry_line_numbers() {
        for (text, line) in [
            ("1 2:1\n\n1 3 4:1\n", 3),
            ("1 -2:1\n", 1),
            ("1 1:1\n1 0:1\n", 2),
            ("1 1:x\n", 1),
            ("abc 1:1\n", 1),
            ("1 3:1 2:1\n", 1),
            ("1 2:1 2:1\n", 1),
        ] {
            match parse_sparse_text(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }

    #[test]
    fn subsampling_is_seeded_and_ordered() {
        let text: String = (1..=10).map(|i| format!("{i} {i}:{i}\n")).collect();
        let rows = parse_sparse_text(&text).unwrap();
        let opts = SparseLoadOptions {
            rows: Some(4),
            cols: Some(10),
            seed: 3,
            ..Default::default()
        };
        let (a1, b1) = sparse_to_dense(&rows, &opts).unwrap();
        let (a2, b2) = sparse_to_dense(&rows, &opts).unwrap();
        assert_eq!((&a1, &b1), (&a2, &b2));
        assert_eq!(a1.shape(), (4, 10));
        assert!(b1.as_slice().windows(2).all(|w| w[0] < w[1]));
        assert!(sparse_to_dense(
            &rows,
            &SparseLoadOptions {
                rows: Some(11),
                ..Default::default()
            }
        )
        .is_err());
    }

    #[test]
    fn dense_round_trip_and_errors() {
        let a = Matrix::from_row_slice(2, 3, &[1.0, -0.1, 3.5e-9, 0.0, 2.0, 1e300]);
        let b = Vector::from_vec(vec![0.3, -7.0]);
        let text = write_dense_instance(&a, &b);
        assert_eq!(parse_dense_instance(&text).unwrap(), (a, b));
        assert!(matches!(
            parse_dense_instance("2 2\n1 2\n3 4\n5\n"),
            Err(Error::Parse { line: 4, .. })
        ));
        assert!(matches!(
            parse_dense_instance("1 1\n1\n2\n3\n"),
            Err(Error::Parse { line: 4, .. })
        ));
        assert!(matches!(
            parse_dense_instance("1 1\nq 2\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(looks_dense("3 4\n") && !looks_dense("3 4:1\n") && !looks_dense("1.5\n"));
    }

    #[test]
    fn points_round_trip() {
        let x = Vector::from_vec(vec![0.1 + 0.2, 0.0, -1e-300]);
        assert_eq!(parse_points(&write_points(&x)).unwrap(), x);
        assert!(matches!(
            parse_points("1\n2\nnan\n"),
            Err(Error::Parse { line: 3, .. })
        ));
    }
}
