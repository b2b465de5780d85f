//! Matrix, label and pair file formats.
//!
//! Matrices come in two interchangeable encodings:
//! - delimited text: one comma-separated row of decimal numbers per line,
//!   with an optional single header line skipped on request;
//! - binary: magic bytes `AGW1`, row count and column count as unsigned
//!   64-bit little-endian integers, then row-major IEEE-754 doubles
//!   (little-endian).
//!
//! Binary files round-trip bit-exactly; text output carries 17 significant
//! digits so a text round-trip is value-exact too.

use std::fmt;
use std::fs;
use std::path::Path;

use ndarray::Array2;

/// Magic prefix of binary matrix files.
pub const MAGIC: &[u8; 4] = b"AGW1";

/// Parse failure with a 1-based position for text inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(
                f,
                "line {}, column {}: {}",
                self.line, self.column, self.message
            )
        } else {
            write!(f, "{}", self.message)
        }
    }
}

impl std::error::Error for ParseError {}

impl ParseError {
    fn at(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            column,
            message: message.into(),
        }
    }

    fn whole(message: impl Into<String>) -> Self {
        Self {
            line: 0,
            column: 0,
            message: message.into(),
        }
    }
}

/// Reads either encoding, sniffing the binary magic first.
pub fn parse_matrix_bytes(bytes: &[u8], skip_header: bool) -> Result<Array2<f64>, ParseError> {
    if bytes.starts_with(MAGIC) {
        parse_binary_matrix(bytes)
    } else {
        let text = std::str::from_utf8(bytes)
            .map_err(|e| ParseError::whole(format!("matrix file is not valid UTF-8: {e}")))?;
        parse_text_matrix(text, skip_header)
    }
}

/// Comma-separated decimal rows. Every row must have the same width and
/// every value must be finite.
pub fn parse_text_matrix(text: &str, skip_header: bool) -> Result<Array2<f64>, ParseError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = 0usize;
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if skip_header && idx == 0 {
            continue;
        }
        let line = raw_line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::with_capacity(width.max(4));
        let mut col_start = 1usize;
        for field in line.split(',') {
            let column = col_start;
            col_start += field.len() + 1;
            let trimmed = field.trim();
            if trimmed.is_empty() {
                return Err(ParseError::at(line_no, column, "empty field"));
            }
            let value: f64 = trimmed.parse().map_err(|_| {
                ParseError::at(line_no, column, format!("not a number: {trimmed:?}"))
            })?;
            if !value.is_finite() {
                return Err(ParseError::at(
                    line_no,
                    column,
                    format!("non-finite value {trimmed:?}"),
                ));
            }
            row.push(value);
        }
        if rows.is_empty() {
            width = row.len();
        } else if row.len() != width {
            return Err(ParseError::at(
                line_no,
                1,
                format!("row has {} fields, expected {width}", row.len()),
            ));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(ParseError::whole("matrix file has no data rows"));
    }
    let n = rows.len();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Array2::from_shape_vec((n, width), flat)
        .map_err(|e| ParseError::whole(format!("shape error: {e}")))
}

/// `AGW1` + u64 LE rows + u64 LE cols + row-major f64 LE payload.
pub fn parse_binary_matrix(bytes: &[u8]) -> Result<Array2<f64>, ParseError> {
    if bytes.len() < MAGIC.len() + 16 {
        return Err(ParseError::whole(format!(
            "binary matrix header needs {} bytes, file has {}",
            MAGIC.len() + 16,
            bytes.len()
        )));
    }
    if &bytes[..4] != MAGIC {
        return Err(ParseError::whole("missing AGW1 magic"));
    }
    let rows = u64::from_le_bytes(bytes[4..12].try_into().unwrap());
    let cols = u64::from_le_bytes(bytes[12..20].try_into().unwrap());
    let rows: usize = rows
        .try_into()
        .map_err(|_| ParseError::whole(format!("row count {rows} exceeds addressable size")))?;
    let cols: usize = cols
        .try_into()
        .map_err(|_| ParseError::whole(format!("column count {cols} exceeds addressable size")))?;
    if rows == 0 || cols == 0 {
        return Err(ParseError::whole(format!(
            "matrix dimensions must be positive, got {rows}x{cols}"
        )));
    }
    let count = rows
        .checked_mul(cols)
        .ok_or_else(|| ParseError::whole("matrix dimensions overflow"))?;
    let payload_len = count
        .checked_mul(8)
        .ok_or_else(|| ParseError::whole("matrix payload overflows"))?;
    let expected = MAGIC.len() + 16 + payload_len;
    if bytes.len() != expected {
        return Err(ParseError::whole(format!(
            "declared {rows}x{cols} needs {expected} bytes, file has {}",
            bytes.len()
        )));
    }
    let mut values = Vec::with_capacity(count);
    for chunk in bytes[20..].chunks_exact(8) {
        let v = f64::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(ParseError::whole(format!(
                "non-finite value at element {}",
                values.len()
            )));
        }
        values.push(v);
    }
    Array2::from_shape_vec((rows, cols), values)
        .map_err(|e| ParseError::whole(format!("shape error: {e}")))
}

/// Lossless text form: 17 significant digits per value.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn matrix_to_text(matrix: &Array2<f64>) -> String {
    let mut out = String::new();
    for row in matrix.rows() {
        let fields: Vec<String> = row.iter().map(|&v| format_f64(v)).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn matrix_to_binary(matrix: &Array2<f64>) -> Vec<u8> {
    let (rows, cols) = matrix.dim();
    let mut out = Vec::with_capacity(20 + rows * cols * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(rows as u64).to_le_bytes());
    out.extend_from_slice(&(cols as u64).to_le_bytes());
    for &v in matrix.iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Text output for `.csv`/`.txt`/`.tsv` extensions, binary otherwise.
pub fn write_matrix_file(path: &Path, matrix: &Array2<f64>) -> std::io::Result<()> {
    let text = matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("csv") | Some("txt") | Some("tsv")
    );
    if text {
        fs::write(path, matrix_to_text(matrix))
    } else {
        fs::write(path, matrix_to_binary(matrix))
    }
}

pub fn read_matrix_file(path: &Path, skip_header: bool) -> anyhow::Result<Array2<f64>> {
    let bytes =
        fs::read(path).map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
    parse_matrix_bytes(&bytes, skip_header).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

/// One integer label per line; `-1` marks unlabeled entries.
pub fn parse_labels(text: &str) -> Result<Vec<i64>, ParseError> {
    let mut labels = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim();
        if line.is_empty() {
            continue;
        }
        let value: i64 = line
            .parse()
            .map_err(|_| ParseError::at(idx + 1, 1, format!("not an integer: {line:?}")))?;
        if value < -1 {
            return Err(ParseError::at(
                idx + 1,
                1,
                format!("label {value} must be >= -1"),
            ));
        }
        labels.push(value);
    }
    if labels.is_empty() {
        return Err(ParseError::whole("label file has no entries"));
    }
    Ok(labels)
}

/// Correspondence rows `i,j`: row i of X matches row j of Y.
pub fn parse_pairs(text: &str) -> Result<Vec<(usize, usize)>, ParseError> {
    let mut pairs = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let a = fields
            .next()
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .ok_or_else(|| ParseError::at(line_no, 1, "missing first index"))?;
        let b = fields
            .next()
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .ok_or_else(|| ParseError::at(line_no, a.len() + 2, "missing second index"))?;
        if fields.next().is_some() {
            return Err(ParseError::at(line_no, 1, "expected exactly two indices"));
        }
        let a: usize = a
            .parse()
            .map_err(|_| ParseError::at(line_no, 1, format!("not an index: {a:?}")))?;
        let b: usize = b
            .parse()
            .map_err(|_| ParseError::at(line_no, 1, format!("not an index: {b:?}")))?;
        pairs.push((a, b));
    }
    if pairs.is_empty() {
        return Err(ParseError::whole("pair file has no entries"));
    }
    Ok(pairs)
}

pub fn read_labels_file(path: &Path) -> anyhow::Result<Vec<i64>> {
    let text = fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
    parse_labels(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

pub fn read_pairs_file(path: &Path) -> anyhow::Result<Vec<(usize, usize)>> {
    let text = fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
    parse_pairs(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn text_matrix_round_trips_to_17_digits() {
        let m = array![[1.0 / 3.0, -2.5e-17], [6.02214076e23, 0.1]];
        let text = matrix_to_text(&m);
        let back = parse_text_matrix(&text, false).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let m = array![
            [f64::MIN_POSITIVE, -0.0],
            [1.0e308, 2.2250738585072014e-308]
        ];
        let bytes = matrix_to_binary(&m);
        let back = parse_binary_matrix(&bytes).unwrap();
        for (a, b) in m.iter().zip(back.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn text_parser_reports_line_and_column() {
        let err = parse_text_matrix("1.0,2.0\n3.0,oops\n", false).unwrap_err();
        assert_eq!(err.line, 2);
        assert_eq!(err.column, 5);
        assert!(err.to_string().contains("line 2"));

        let err = parse_text_matrix("1.0,2.0\n3.0\n", false).unwrap_err();
        assert_eq!(err.line, 2);

        assert!(parse_text_matrix("", false).is_err());
        assert!(parse_text_matrix("inf,1\n", false).is_err());
    }

    #[test]
    fn header_skipping() {
        let m = parse_text_matrix("a,b\n1,2\n", true).unwrap();
        assert_eq!(m, array![[1.0, 2.0]]);
        assert!(parse_text_matrix("a,b\n1,2\n", false).is_err());
    }

    #[test]
    fn binary_rejects_corrupt_headers() {
        assert!(parse_binary_matrix(b"AGW1").is_err());
        let mut bytes = matrix_to_binary(&array![[1.0, 2.0]]);
        bytes.truncate(bytes.len() - 1);
        assert!(parse_binary_matrix(&bytes).is_err());

        // declared size overflowing usize multiplication
        let mut huge = Vec::new();
        huge.extend_from_slice(MAGIC);
        huge.extend_from_slice(&u64::MAX.to_le_bytes());
        huge.extend_from_slice(&u64::MAX.to_le_bytes());
        huge.extend_from_slice(&[0u8; 8]);
        assert!(parse_binary_matrix(&huge).is_err());
    }

    #[test]
    fn labels_and_pairs() {
        assert_eq!(parse_labels("0\n2\n-1\n").unwrap(), vec![0, 2, -1]);
        assert!(parse_labels("0\n-2\n").is_err());
        assert!(parse_labels("x\n").is_err());

        assert_eq!(parse_pairs("0,1\n2,0\n").unwrap(), vec![(0, 1), (2, 0)]);
        assert!(parse_pairs("0\n").is_err());
        assert!(parse_pairs("0,1,2\n").is_err());
    }

    proptest! {
        #[test]
        fn arbitrary_finite_matrices_round_trip(
            rows in 1usize..6,
            cols in 1usize..6,
            seed in any::<u64>(),
        ) {
            let mut state = seed;
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                f64::from_bits((state >> 12) | 0x3ff0000000000000) - 1.5
            };
            let m = Array2::from_shape_fn((rows, cols), |_| next() * 1e6);
            let text_back = parse_text_matrix(&matrix_to_text(&m), false).unwrap();
            prop_assert_eq!(&m, &text_back);
            let bin_back = parse_binary_matrix(&matrix_to_binary(&m)).unwrap();
            prop_assert_eq!(&m, &bin_back);
        }

        #[test]
        fn binary_parser_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..256)) {
            let _ = parse_binary_matrix(&bytes);
            let _ = parse_matrix_bytes(&bytes, false);
        }
    }
}
