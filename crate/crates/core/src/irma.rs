//! IRMA codes, the hierarchical retrieval error, and the suitability measure.
//!
//! An IRMA code has four axes (technical, directional, anatomical,
//! biological) of 4, 3, 3 and 3 characters, written `TTTT-DDD-AAA-BBB`.
//! A mismatch at position `i` of an axis also counts at every later
//! position of that axis, and each counted position `i` costs `1 / (b · i)`
//! where `b` is the branching factor of that position.
//!
//! Axis and position indices in this module's public functions are 1-based.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Characters per axis.
pub const AXIS_LENGTHS: [usize; 4] = [4, 3, 3, 3];
const AXIS_OFFSETS: [usize; 4] = [0, 4, 7, 10];
pub const AXIS_NAMES: [&str; 4] = ["technical", "directional", "anatomical", "biological"];

/// Four-axis hierarchical label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IrmaCode {
    chars: [u8; 13],
}

impl IrmaCode {
    /// Characters of axis `j` (1-based).
    pub fn axis(&self, j: usize) -> Result<&str> {
        if !(1..=4).contains(&j) {
            return Err(Error::IrmaIndex { axis: j, position: 0 });
        }
        let start = AXIS_OFFSETS[j - 1];
        let raw = &self.chars[start..start + AXIS_LENGTHS[j - 1]];
        Ok(std::str::from_utf8(raw).expect("validated ASCII"))
    }

    /// Character at axis `j`, position `i` (both 1-based).
    pub fn char_at(&self, j: usize, i: usize) -> Result<char> {
        check_position(j, i)?;
        Ok(self.chars[AXIS_OFFSETS[j - 1] + i - 1] as char)
    }

    fn raw(&self, axis0: usize, pos0: usize) -> u8 {
        self.chars[AXIS_OFFSETS[axis0] + pos0]
    }
}

impl FromStr for IrmaCode {
    type Err = Error;

    fn from_str(code: &str) -> Result<Self> {
        let fail = |reason: String| Error::IrmaParse {
            code: code.to_string(),
            reason,
        };
        let segments: Vec<&str> = code.trim().split('-').collect();
        if segments.len() != 4 {
            return Err(fail(format!("expected 4 hyphen-separated axes, found {}", segments.len())));
        }
        let mut chars = [0u8; 13];
        for (j, seg) in segments.iter().enumerate() {
            if seg.len() != AXIS_LENGTHS[j] {
                return Err(fail(format!(
                    "axis {} has {} characters, expected {}",
                    j + 1,
                    seg.len(),
                    AXIS_LENGTHS[j]
                )));
            }
            if !seg.bytes().all(|b| b.is_ascii_alphanumeric()) {
                return Err(fail(format!("axis {} has non-alphanumeric characters", j + 1)));
            }
            chars[AXIS_OFFSETS[j]..AXIS_OFFSETS[j] + seg.len()].copy_from_slice(seg.as_bytes());
        }
        Ok(Self { chars })
    }
}

impl fmt::Display for IrmaCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 1..=4 {
            if j > 1 {
                f.write_str("-")?;
            }
            f.write_str(self.axis(j).map_err(|_| fmt::Error)?)?;
        }
        Ok(())
    }
}

pub fn parse_irma(code: &str) -> Result<IrmaCode> {
    code.parse()
}

fn check_position(j: usize, i: usize) -> Result<()> {
    if !(1..=4).contains(&j) || !(1..=AXIS_LENGTHS[j - 1]).contains(&i) {
        return Err(Error::IrmaIndex { axis: j, position: i });
    }
    Ok(())
}

/// 1 if any position `h ≤ i` of axis `j` differs, else 0.
pub fn delta(query: &IrmaCode, retrieved: &IrmaCode, j: usize, i: usize) -> Result<u8> {
    check_position(j, i)?;
    Ok(u8::from((0..i).any(|h| query.raw(j - 1, h) != retrieved.raw(j - 1, h))))
}

/// Number of possible characters at each position of each axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchTable {
    branches: [Vec<u32>; 4],
}

impl BranchTable {
    pub fn new(branches: [Vec<u32>; 4]) -> Result<Self> {
        for (j, row) in branches.iter().enumerate() {
            if row.len() != AXIS_LENGTHS[j] {
                return Err(Error::BranchTable(format!(
                    "axis {} has {} entries, expected {}",
                    j + 1,
                    row.len(),
                    AXIS_LENGTHS[j]
                )));
            }
            if row.contains(&0) {
                return Err(Error::BranchTable(format!("axis {} has a zero branch count", j + 1)));
            }
        }
        Ok(Self { branches })
    }

    /// Same branching factor everywhere.
    pub fn uniform(b: u32) -> Result<Self> {
        Self::new(AXIS_LENGTHS.map(|l| vec![b; l]))
    }

    /// `b` at axis `j`, position `i` (1-based).
    pub fn get(&self, j: usize, i: usize) -> Result<u32> {
        check_position(j, i)?;
        Ok(self.branches[j - 1][i - 1])
    }

    pub fn rows(&self) -> &[Vec<u32>; 4] {
        &self.branches
    }

    /// Count distinct characters per position across a corpus.
    pub fn from_corpus<'a>(codes: impl IntoIterator<Item = &'a IrmaCode>) -> Result<Self> {
        let mut seen = AXIS_LENGTHS.map(|l| vec![[false; 128]; l]);
        let mut any = false;
        for code in codes {
            any = true;
            for (j, row) in seen.iter_mut().enumerate() {
                for (i, slot) in row.iter_mut().enumerate() {
                    slot[code.raw(j, i) as usize] = true;
                }
            }
        }
        if !any {
            return Err(Error::BranchTable("cannot derive a table from an empty corpus".into()));
        }
        Self::new(seen.map(|row| {
            row.iter()
                .map(|set| (set.iter().filter(|s| **s).count() as u32).max(1))
                .collect()
        }))
    }

    /// Text form: one line per axis, space-separated counts.
    pub fn to_text(&self) -> String {
        self.branches
            .iter()
            .map(|row| {
                row.iter()
                    .map(u32::to_string)
                    .collect::<Vec<_>>()
                    .join(" ")
                    + "\n"
            })
            .collect()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let rows: Vec<Vec<u32>> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|line| {
                line.split_whitespace()
                    .map(|tok| {
                        tok.parse::<u32>()
                            .map_err(|_| Error::BranchTable(format!("bad count {tok:?}")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let rows: [Vec<u32>; 4] = rows
            .try_into()
            .map_err(|r: Vec<Vec<u32>>| Error::BranchTable(format!("expected 4 lines, found {}", r.len())))?;
        Self::new(rows)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

pub fn build_branch_table(codes: &[IrmaCode]) -> Result<BranchTable> {
    BranchTable::from_corpus(codes)
}

/// Error contribution of each axis for one (query, retrieved) pair.
pub fn axis_errors(query: &IrmaCode, retrieved: &IrmaCode, table: &BranchTable) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (j, slot) in out.iter_mut().enumerate() {
        let mut mismatched = false;
        for i in 0..AXIS_LENGTHS[j] {
            mismatched |= query.raw(j, i) != retrieved.raw(j, i);
            if mismatched {
                *slot += 1.0 / (table.branches[j][i] as f64 * (i + 1) as f64);
            }
        }
    }
    out
}

/// `Σ_j Σ_i (1/b_{j,i}) (1/i) δ(j,i)` for one pair.
pub fn pair_error(query: &IrmaCode, retrieved: &IrmaCode, table: &BranchTable) -> f64 {
    axis_errors(query, retrieved, table).iter().sum()
}

/// Pairwise (tree) summation; deterministic for a fixed input order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n if n <= 8 => values.iter().sum(),
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Sum of [`pair_error`] over every (query, retrieved) pair.
pub fn total_error(pairs: &[(IrmaCode, IrmaCode)], table: &BranchTable) -> f64 {
    let errors: Vec<f64> = pairs.iter().map(|(q, r)| pair_error(q, r, table)).collect();
    pairwise_sum(&errors)
}

/// One row of a method comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    pub method_name: String,
    pub e_total: f64,
    pub l_code: usize,
    pub eta_suitability: f64,
}

impl EvalRecord {
    /// Record with η not yet computed (NaN).
    pub fn new(method_name: impl Into<String>, e_total: f64, l_code: usize) -> Self {
        Self {
            method_name: method_name.into(),
            e_total,
            l_code,
            eta_suitability: f64::NAN,
        }
    }
}

/// `η = (E_max · L_max) / (E_total · L_code)`.
pub fn eta_suitability(record: &EvalRecord, e_max: f64, l_max: usize) -> Result<f64> {
    let denom = record.e_total * record.l_code as f64;
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::ZeroDenominator);
    }
    Ok(e_max * l_max as f64 / denom)
}

/// Fill `eta_suitability` using the maxima over `records` (or the overrides).
pub fn assign_suitability(
    records: &mut [EvalRecord],
    e_max: Option<f64>,
    l_max: Option<usize>,
) -> Result<()> {
    let e_max = e_max.unwrap_or_else(|| records.iter().map(|r| r.e_total).fold(0.0, f64::max));
    let l_max = l_max.unwrap_or_else(|| records.iter().map(|r| r.l_code).max().unwrap_or(0));
    for r in records.iter_mut() {
        r.eta_suitability = eta_suitability(r, e_max, l_max)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(s: &str) -> IrmaCode {
        s.parse().unwrap()
    }

    #[test]
    fn parse_examples() {
        let c = code("1121-4a0-914-700");
        assert_eq!(c.axis(1).unwrap(), "1121");
        assert_eq!(c.axis(2).unwrap(), "4a0");
        assert_eq!(c.axis(3).unwrap(), "914");
        assert_eq!(c.axis(4).unwrap(), "700");
        assert_eq!(c.char_at(2, 2).unwrap(), 'a');
        assert_eq!(c.char_at(4, 1).unwrap(), '7');
        assert_eq!(c.to_string(), "1121-4a0-914-700");
        assert!(parse_irma("1121-4a0-914").is_err());
        assert!(parse_irma("11214a0914700").is_err());
        assert!(parse_irma("1121-4a0-914-70").is_err());
        assert!(parse_irma("1121-4a0-9_4-700").is_err());
        assert!(c.char_at(2, 4).is_err());
        assert!(c.axis(5).is_err());
    }

    #[test]
    fn delta_examples() {
        let a = code("1121-4a0-914-700");
        let b = code("1131-4a0-914-700");
        for j in 1..=4 {
            for i in 1..=AXIS_LENGTHS[j - 1] {
                assert_eq!(delta(&a, &a, j, i).unwrap(), 0);
            }
        }
        assert_eq!(delta(&a, &b, 1, 2).unwrap(), 0);
        assert_eq!(delta(&a, &b, 1, 3).unwrap(), 1);
        assert_eq!(delta(&a, &b, 1, 4).unwrap(), 1);
        let c = code("1121-5a0-914-700");
        assert!((1..=3).all(|i| delta(&a, &c, 2, i).unwrap() == 1));
        assert!(delta(&a, &b, 0, 1).is_err());
        assert!(delta(&a, &b, 1, 5).is_err());
    }

    #[test]
    fn pair_error_examples() {
        let uniform = BranchTable::uniform(10).unwrap();
        let q = code("1121-4a0-914-700");
        assert_eq!(pair_error(&q, &q, &uniform), 0.0);
        // hand evaluation: axis 1 poisoned from position 1
        let first = code("2121-4a0-914-700");
        let expected = 0.1 * (1.0 + 1.0 / 2.0 + 1.0 / 3.0 + 1.0 / 4.0);
        assert!((pair_error(&q, &first, &uniform) - expected).abs() < 1e-12);
        let third = code("1121-4a1-914-700");
        assert!((pair_error(&q, &third, &uniform) - 0.1 / 3.0).abs() < 1e-12);
        let total = total_error(&[(q, first), (q, third)], &uniform);
        assert!((total - (expected + 0.1 / 3.0)).abs() < 1e-12);
        assert_eq!(total_error(&[(q, q), (first, first)], &uniform), 0.0);
    }

    #[test]
    fn branch_table_from_corpus() {
        let one = build_branch_table(&[code("1121-4a0-914-700")]).unwrap();
        assert!(one.rows().iter().flatten().all(|&b| b == 1));
        let three = build_branch_table(&[
            code("1121-4a0-914-700"),
            code("2121-4a0-914-700"),
            code("3121-4b0-914-700"),
        ])
        .unwrap();
        assert_eq!(three.get(1, 1).unwrap(), 3);
        assert_eq!(three.get(2, 2).unwrap(), 2);
        assert_eq!(three.get(4, 3).unwrap(), 1);
        assert!(matches!(build_branch_table(&[]), Err(Error::BranchTable(_))));
    }

    #[test]
    fn branch_table_text() {
        let t = BranchTable::new([vec![2, 3, 4, 5], vec![6, 7, 8], vec![9, 10, 11], vec![1, 2, 3]]).unwrap();
        assert_eq!(t.to_text(), "2 3 4 5\n6 7 8\n9 10 11\n1 2 3\n");
        assert_eq!(BranchTable::from_text(&t.to_text()).unwrap(), t);
        assert!(BranchTable::from_text("1 2 3\n1 2 3\n1 2 3\n1 2 3\n").is_err());
        assert!(BranchTable::from_text("1 2 3 4\n1 2 3\n1 2 3\n").is_err());
        assert!(BranchTable::from_text("1 2 3 4\n1 0 3\n1 2 3\n1 2 3\n").is_err());
        assert!(BranchTable::from_text("1 2 3 x\n1 2 3\n1 2 3\n1 2 3\n").is_err());
    }

    #[test]
    fn suitability_examples() {
        let rbc4 = EvalRecord::new("RBC4", 476.62, 512);
        assert!((eta_suitability(&rbc4, 501.96, 8192).unwrap() - 16.85065671).abs() < 1e-6);
        let gbc = EvalRecord::new("GBC8,16,23,23", 351.798, 8192);
        assert!((eta_suitability(&gbc, 501.96, 8192).unwrap() - 1.42684154).abs() < 1e-6);
        let top = EvalRecord::new("top", 501.96, 8192);
        assert!((eta_suitability(&top, 501.96, 8192).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            eta_suitability(&EvalRecord::new("zero", 0.0, 10), 1.0, 10),
            Err(Error::ZeroDenominator)
        ));

        let mut records = vec![rbc4, gbc, EvalRecord::new("LRBP32", 501.96, 7200)];
        assign_suitability(&mut records, None, None).unwrap();
        assert!((records[2].eta_suitability - 1.137777778).abs() < 1e-6);
    }
}
