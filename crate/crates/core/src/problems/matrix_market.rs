use std::io::BufRead;
use std::path::Path;

use super::operator::CsrOperator;
use super::ProblemError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmSymmetry {
    General,
    Symmetric,
}

/// A coordinate-format Matrix Market file, entries zero-based.
#[derive(Debug, Clone)]
pub struct MatrixMarketMatrix {
    pub rows: usize,
    pub cols: usize,
    pub symmetry: MmSymmetry,
    /// Entries as stored in the file (one triangle for symmetric files).
    pub entries: Vec<(usize, usize, f64)>,
}

impl MatrixMarketMatrix {
    /// Nonzeros after symmetric expansion.
    pub fn expanded_nnz(&self) -> usize {
        match self.symmetry {
            MmSymmetry::General => self.entries.len(),
            MmSymmetry::Symmetric => self
                .entries
                .iter()
                .map(|(i, j, _)| if i == j { 1 } else { 2 })
                .sum(),
        }
    }

    pub fn into_operator(self) -> Result<CsrOperator, ProblemError> {
        if self.rows != self.cols {
            return Err(ProblemError::UnsupportedFormat(format!(
                "non-square matrix {}x{}",
                self.rows, self.cols
            )));
        }
        let mut triplets = Vec::with_capacity(self.expanded_nnz());
        for (i, j, v) in self.entries {
            triplets.push((i, j, v));
            if self.symmetry == MmSymmetry::Symmetric && i != j {
                triplets.push((j, i, v));
            }
        }
        Ok(CsrOperator::from_triplets(self.rows, triplets))
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> ProblemError {
    ProblemError::ParseError {
        line,
        message: message.into(),
    }
}

/// Parses coordinate real/integer general/symmetric Matrix Market data.
pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<MatrixMarketMatrix, ProblemError> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (lineno, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let header = header?;
    let tokens: Vec<String> = header
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(lineno, format!("bad header: {header:?}")));
    }
    match tokens[2].as_str() {
        "coordinate" => {}
        "array" => return Err(ProblemError::UnsupportedFormat("array format".into())),
        other => return Err(parse_err(lineno, format!("unknown format {other:?}"))),
    }
    match tokens[3].as_str() {
        "real" | "integer" => {}
        "complex" | "pattern" => {
            return Err(ProblemError::UnsupportedFormat(format!(
                "{} field",
                tokens[3]
            )))
        }
        other => return Err(parse_err(lineno, format!("unknown field {other:?}"))),
    }
    let symmetry = match tokens[4].as_str() {
        "general" => MmSymmetry::General,
        "symmetric" => MmSymmetry::Symmetric,
        "skew-symmetric" | "hermitian" => {
            return Err(ProblemError::UnsupportedFormat(format!(
                "{} symmetry",
                tokens[4]
            )))
        }
        other => return Err(parse_err(lineno, format!("unknown symmetry {other:?}"))),
    };

    let mut data_lines = lines.filter_map(|(n, l)| match l {
        Ok(s) if s.trim().is_empty() || s.trim_start().starts_with('%') => None,
        other => Some((n, other)),
    });

    let (size_line, size) = data_lines
        .next()
        .ok_or_else(|| parse_err(lineno + 1, "missing size line"))?;
    let size = size?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()
        .map_err(|e| parse_err(size_line, format!("bad size line: {e}")))?;
    let [rows, cols, nnz] = dims[..] else {
        return Err(parse_err(size_line, "size line needs three integers"));
    };

    let mut entries = Vec::with_capacity(nnz);
    for (n, line) in data_lines {
        let line = line?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(parse_err(n, "expected `row col value`"));
        }
        let i: usize = parts[0]
            .parse()
            .map_err(|_| parse_err(n, "bad row index"))?;
        let j: usize = parts[1]
            .parse()
            .map_err(|_| parse_err(n, "bad column index"))?;
        let v: f64 = parts[2].parse().map_err(|_| parse_err(n, "bad value"))?;
        if i == 0 || j == 0 || i > rows || j > cols {
            return Err(parse_err(n, format!("index ({i}, {j}) out of range")));
        }
        if symmetry == MmSymmetry::Symmetric && j > i {
            return Err(parse_err(n, "upper-triangle entry in symmetric file"));
        }
        entries.push((i - 1, j - 1, v));
    }
    if entries.len() != nnz {
        return Err(parse_err(
            size_line,
            format!("declared {nnz} entries, found {}", entries.len()),
        ));
    }
    Ok(MatrixMarketMatrix {
        rows,
        cols,
        symmetry,
        entries,
    })
}

pub fn read_matrix_market_file(path: &Path) -> Result<MatrixMarketMatrix, ProblemError> {
    let file = std::fs::File::open(path)?;
    read_matrix_market(std::io::BufReader::new(file))
}

/// Loads a square coordinate Matrix Market file as a sparse operator.
pub fn load_matrix_market(path: &Path) -> Result<CsrOperator, ProblemError> {
    read_matrix_market_file(path)?.into_operator()
}
