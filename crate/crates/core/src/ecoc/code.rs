//! Binary coding matrices: construction, validation and distances.

use std::collections::HashSet;
use std::fmt;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

const COLUMN_ATTEMPTS: usize = 1000;
const MATRIX_ATTEMPTS: usize = 100;

/// `m × n` 0/1 matrix; row `i` is the codeword of class `i`, column `j`
/// splits the classes into the two superclasses learned by one PiC.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CodeRepr", into = "CodeRepr")]
pub struct CodingMatrix {
    m: usize,
    n: usize,
    bits: Vec<u8>,
    /// Structured codes (one-vs-all) are exempt from the column rules.
    structured: bool,
}

#[derive(Serialize, Deserialize)]
struct CodeRepr {
    m: usize,
    n: usize,
    rows: Vec<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    structured: bool,
}

impl TryFrom<CodeRepr> for CodingMatrix {
    type Error = Error;

    fn try_from(r: CodeRepr) -> Result<Self> {
        let rows: Vec<&str> = r.rows.iter().map(String::as_str).collect();
        let mut code = CodingMatrix::from_rows(&rows)?;
        if code.m != r.m || code.n != r.n {
            return Err(Error::Config(format!(
                "coding matrix declares {}x{} but rows are {}x{}",
                r.m, r.n, code.m, code.n
            )));
        }
        code.structured = r.structured;
        Ok(code)
    }
}

impl From<CodingMatrix> for CodeRepr {
    fn from(c: CodingMatrix) -> Self {
        CodeRepr {
            m: c.m,
            n: c.n,
            rows: (0..c.m).map(|i| c.row_string(i)).collect(),
            structured: c.structured,
        }
    }
}

/// Smallest admissible code length for `m` classes: `⌈log₂ m⌉ + 1`.
pub fn min_code_length(m: usize) -> usize {
    let mut bits = 0;
    while (1usize << bits) < m {
        bits += 1;
    }
    bits + 1
}

/// Number of distinct non-trivial bipartitions of `m` classes, `2^(m−1) − 1`.
fn dichotomy_count(m: usize) -> u64 {
    if m >= 64 {
        u64::MAX
    } else {
        (1u64 << (m - 1)) - 1
    }
}

/// A column up to complement: flipped so that row 0 holds 0.
fn canonical(col: &[u8]) -> Vec<u8> {
    if col[0] == 1 {
        col.iter().map(|b| 1 - b).collect()
    } else {
        col.to_vec()
    }
}

impl CodingMatrix {
    pub fn from_bits(m: usize, n: usize, bits: Vec<u8>) -> Result<Self> {
        if bits.len() != m * n {
            return Err(Error::shape(m * n, bits.len()));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::Config("coding matrix entries must be 0 or 1".into()));
        }
        Ok(Self {
            m,
            n,
            bits,
            structured: false,
        })
    }

    /// Parses rows such as `"0110110001"`.
    pub fn from_rows(rows: &[&str]) -> Result<Self> {
        let n = rows.first().map_or(0, |r| r.len());
        let mut bits = Vec::with_capacity(rows.len() * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Config(format!(
                    "codeword {i} has length {}, expected {n}",
                    row.len()
                )));
            }
            for ch in row.chars() {
                bits.push(match ch {
                    '0' => 0,
                    '1' => 1,
                    other => {
                        return Err(Error::Config(format!(
                            "codeword {i} has invalid bit {other:?}"
                        )))
                    }
                });
            }
        }
        Self::from_bits(rows.len(), n, bits)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_structured(&self) -> bool {
        self.structured
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.bits[i * self.n..(i + 1) * self.n]
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.bits[i * self.n + j]
    }

    pub fn column(&self, j: usize) -> Vec<u8> {
        (0..self.m).map(|i| self.get(i, j)).collect()
    }

    pub fn row_string(&self, i: usize) -> String {
        self.row(i)
            .iter()
            .map(|&b| if b == 1 { '1' } else { '0' })
            .collect()
    }
}

impl fmt::Display for CodingMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.m {
            writeln!(f, "{}", self.row_string(i))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum CodeViolation {
    TooFewClasses { m: usize },
    TooShort { n: usize, min: usize },
    DuplicateRows { first: usize, second: usize },
    ConstantColumn { column: usize, value: u8 },
    DuplicateColumns { first: usize, second: usize },
    ComplementaryColumns { first: usize, second: usize },
}

impl fmt::Display for CodeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeViolation::TooFewClasses { m } => write!(f, "need at least 2 classes, got {m}"),
            CodeViolation::TooShort { n, min } => write!(f, "code length {n} below minimum {min}"),
            CodeViolation::DuplicateRows { first, second } => {
                write!(f, "rows {first} and {second} are identical")
            }
            CodeViolation::ConstantColumn { column, value } => {
                write!(f, "column {column} is constant {value}")
            }
            CodeViolation::DuplicateColumns { first, second } => {
                write!(f, "columns {first} and {second} are identical")
            }
            CodeViolation::ComplementaryColumns { first, second } => {
                write!(f, "columns {first} and {second} are complementary")
            }
        }
    }
}

/// Every broken coding-matrix rule; empty when the code is usable.
///
/// Repeated or complementary columns are only flagged while some
/// bipartition of the classes is still unused: once all `2^(m−1) − 1`
/// dichotomies appear, a longer code must repeat one.
pub fn validate_code(code: &CodingMatrix) -> Vec<CodeViolation> {
    let mut out = Vec::new();
    if code.m < 2 {
        out.push(CodeViolation::TooFewClasses { m: code.m });
        return out;
    }
    let min = min_code_length(code.m);
    if code.n < min {
        out.push(CodeViolation::TooShort { n: code.n, min });
    }
    for a in 0..code.m {
        for b in (a + 1)..code.m {
            if code.row(a) == code.row(b) {
                out.push(CodeViolation::DuplicateRows {
                    first: a,
                    second: b,
                });
            }
        }
    }
    if code.structured {
        return out;
    }

    let columns: Vec<Vec<u8>> = (0..code.n).map(|j| code.column(j)).collect();
    for (j, col) in columns.iter().enumerate() {
        if col.iter().all(|&b| b == col[0]) {
            out.push(CodeViolation::ConstantColumn {
                column: j,
                value: col[0],
            });
        }
    }
    let distinct: HashSet<Vec<u8>> = columns
        .iter()
        .filter(|c| c.iter().any(|&b| b != c[0]))
        .map(|c| canonical(c))
        .collect();
    if (distinct.len() as u64) < dichotomy_count(code.m) {
        for b in 0..code.n {
            if let Some(a) = (0..b).find(|&a| canonical(&columns[a]) == canonical(&columns[b])) {
                out.push(if columns[a] == columns[b] {
                    CodeViolation::DuplicateColumns {
                        first: a,
                        second: b,
                    }
                } else {
                    CodeViolation::ComplementaryColumns {
                        first: a,
                        second: b,
                    }
                });
            }
        }
    }
    out
}

/// Random code with independent fair bits. Constant, repeated and
/// complementary columns are redrawn (up to 1000 times per column); a matrix
/// with repeated rows is redrawn whole (up to 100 times).
pub fn random_code(m: usize, n: usize, seed: u64) -> Result<CodingMatrix> {
    if m < 2 {
        return Err(Error::Range(format!("need at least 2 classes, got {m}")));
    }
    let min = min_code_length(m);
    if n < min {
        return Err(Error::Range(format!(
            "code length {n} too short for {m} classes (need >= {min})"
        )));
    }
    let mut rng = seed::rng(seed);
    let available = dichotomy_count(m);
    for _ in 0..MATRIX_ATTEMPTS {
        let mut columns: Vec<Vec<u8>> = Vec::with_capacity(n);
        let mut used: HashSet<Vec<u8>> = HashSet::new();
        for j in 0..n {
            let mut accepted = None;
            for _ in 0..COLUMN_ATTEMPTS {
                let col: Vec<u8> = (0..m).map(|_| u8::from(rng.random_bool(0.5))).collect();
                if col.iter().all(|&b| b == col[0]) {
                    continue;
                }
                let key = canonical(&col);
                if (used.len() as u64) < available && used.contains(&key) {
                    continue;
                }
                used.insert(key);
                accepted = Some(col);
                break;
            }
            match accepted {
                Some(col) => columns.push(col),
                None => {
                    return Err(Error::Generation(format!(
                        "no admissible column {j} after {COLUMN_ATTEMPTS} draws (m={m}, n={n})"
                    )))
                }
            }
        }
        let mut bits = vec![0u8; m * n];
        for (j, col) in columns.iter().enumerate() {
            for (i, &b) in col.iter().enumerate() {
                bits[i * n + j] = b;
            }
        }
        let code = CodingMatrix::from_bits(m, n, bits)?;
        let rows: HashSet<&[u8]> = (0..m).map(|i| code.row(i)).collect();
        if rows.len() == m {
            return Ok(code);
        }
    }
    Err(Error::Generation(format!(
        "rows still repeat after {MATRIX_ATTEMPTS} matrices (m={m}, n={n})"
    )))
}

/// `m × m` identity pattern: class `i` is positive only in column `i`.
pub fn one_vs_all_code(m: usize) -> Result<CodingMatrix> {
    if m < 2 {
        return Err(Error::Range(format!("need at least 2 classes, got {m}")));
    }
    let mut bits = vec![0u8; m * m];
    for i in 0..m {
        bits[i * m + i] = 1;
    }
    let mut code = CodingMatrix::from_bits(m, m, bits)?;
    code.structured = true;
    Ok(code)
}

/// Number of positions where `a` and `b` differ.
pub fn hamming_distance(a: &[u8], b: &[u8]) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::shape(a.len(), b.len()));
    }
    Ok(a.iter().zip(b).filter(|(x, y)| x != y).count())
}

/// Smallest Hamming distance between two distinct rows.
pub fn min_code_distance(code: &CodingMatrix) -> usize {
    let mut best = usize::MAX;
    for a in 0..code.m {
        for b in (a + 1)..code.m {
            let d = code
                .row(a)
                .iter()
                .zip(code.row(b))
                .filter(|(x, y)| x != y)
                .count();
            best = best.min(d);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    const NEWS_ROWS: [&str; 4] = ["0110110001", "0001111100", "1010101101", "1000011010"];

    #[test]
    fn min_length_bound() {
        assert_eq!(min_code_length(2), 2);
        assert_eq!(min_code_length(4), 3);
        assert_eq!(min_code_length(5), 4);
        assert_eq!(min_code_length(32), 6);
    }

    #[test]
    fn news_code_is_valid_with_distance_five() {
        let code = CodingMatrix::from_rows(&NEWS_ROWS).unwrap();
        assert_eq!(validate_code(&code), vec![]);
        assert_eq!(min_code_distance(&code), 5);
    }

    #[test]
    fn duplicate_rows_are_named() {
        let code = CodingMatrix::from_rows(&["0110", "0110", "1011"]).unwrap();
        let v = validate_code(&code);
        assert_eq!(
            v.iter()
                .filter(|v| matches!(v, CodeViolation::DuplicateRows { .. }))
                .collect::<Vec<_>>(),
            vec![&CodeViolation::DuplicateRows {
                first: 0,
                second: 1
            }]
        );
    }

    #[test]
    fn constant_column_is_flagged() {
        let code = CodingMatrix::from_rows(&["0010", "0100", "0111"]).unwrap();
        assert_eq!(
            validate_code(&code),
            vec![CodeViolation::ConstantColumn {
                column: 0,
                value: 0
            }]
        );
    }

    #[test]
    fn redundant_columns_flagged_while_dichotomies_remain() {
        // m = 4 has 7 dichotomies; columns 0 and 2 repeat, 1 and 3 complement.
        let code = CodingMatrix::from_rows(&["0001", "0100", "1011", "1110"]).unwrap();
        let v = validate_code(&code);
        assert!(
            v.contains(&CodeViolation::DuplicateColumns {
                first: 0,
                second: 2
            }),
            "{v:?}"
        );
        assert!(
            v.contains(&CodeViolation::ComplementaryColumns {
                first: 1,
                second: 3
            }),
            "{v:?}"
        );
    }

    #[test]
    fn random_code_examples() {
        let code = random_code(4, 20, 7).unwrap();
        assert_eq!((code.m(), code.n()), (4, 20));
        assert_eq!(validate_code(&code), vec![]);
        assert_eq!(code, random_code(4, 20, 7).unwrap());
        assert!(matches!(random_code(4, 2, 7), Err(Error::Range(_))));
        let long = random_code(32, 150, 1).unwrap();
        assert_eq!(validate_code(&long), vec![]);
    }

    #[test]
    fn one_vs_all_structure() {
        let code = one_vs_all_code(4).unwrap();
        for i in 0..4 {
            assert_eq!(code.row(i).iter().filter(|&&b| b == 1).count(), 1);
            assert_eq!(code.get(i, i), 1);
        }
        assert_eq!(validate_code(&code), vec![]);
        assert_eq!(min_code_distance(&code), 2);
        assert_eq!(min_code_distance(&one_vs_all_code(2).unwrap()), 2);
    }

    #[test]
    fn hamming_examples() {
        let lambda = [1, 0, 1, 0, 1, 1, 1, 1, 0, 1];
        let business = [1, 0, 1, 0, 1, 0, 1, 1, 0, 1];
        assert_eq!(hamming_distance(&lambda, &business).unwrap(), 1);
        assert_eq!(hamming_distance(&lambda, &lambda).unwrap(), 0);
        let flipped: Vec<u8> = lambda.iter().map(|b| 1 - b).collect();
        assert_eq!(hamming_distance(&lambda, &flipped).unwrap(), 10);
        assert!(hamming_distance(&[0, 1], &[0]).is_err());
        let pair = CodingMatrix::from_rows(&["00", "11"]).unwrap();
        assert_eq!(min_code_distance(&pair), 2);
    }

    #[test]
    fn json_shape() {
        let code = CodingMatrix::from_rows(&NEWS_ROWS).unwrap();
        let v = serde_json::to_value(&code).unwrap();
        assert_eq!(v["m"], 4);
        assert_eq!(v["n"], 10);
        assert_eq!(v["rows"][2], "1010101101");
        let back: CodingMatrix = serde_json::from_value(v).unwrap();
        assert_eq!(back, code);
        let bad = serde_json::json!({"m": 3, "n": 2, "rows": ["01", "10"]});
        assert!(serde_json::from_value::<CodingMatrix>(bad).is_err());
    }
}
