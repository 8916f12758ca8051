//! Exhaustive quadratic reference for the edge set.
//!
//! Works directly on the `0`/`1` text rows and shares no code with the library
//! algorithms: ordering is byte-wise string order, duplicates are removed with
//! a `BTreeSet`, and distances are counted character by character.

use std::collections::BTreeSet;
use std::fmt;

use crate::formats::EdgesFile;

/// Default ceiling on distinct vectors for quadratic verification.
pub const QUADRATIC_LIMIT: usize = 20_000;

/// Sorted distinct rows and every pair of them differing in exactly one position.
pub fn reference_graph<S: AsRef<str>>(rows: &[S]) -> (Vec<String>, Vec<(u32, u32)>) {
    let uniq: BTreeSet<&[u8]> = rows.iter().map(|r| r.as_ref().as_bytes()).collect();
    let uniq: Vec<&[u8]> = uniq.into_iter().collect();
    let mut edges = Vec::new();
    for (i, a) in uniq.iter().enumerate() {
        for (j, b) in uniq.iter().enumerate().skip(i + 1) {
            let mut diff = 0;
            for (x, y) in a.iter().zip(b.iter()) {
                if x != y {
                    diff += 1;
                    if diff > 1 {
                        break;
                    }
                }
            }
            if diff == 1 {
                edges.push((i as u32, j as u32));
            }
        }
    }
    let names = uniq
        .into_iter()
        .map(|r| String::from_utf8(r.to_vec()).expect("rows are ascii"))
        .collect();
    (names, edges)
}

/// Outcome of comparing an edges file against the reference.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub n_unique: usize,
    pub expected_edges: usize,
    pub found_edges: usize,
    pub missing: Vec<(u32, u32)>,
    pub extra: Vec<(u32, u32)>,
    pub problems: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.missing.is_empty() && self.extra.is_empty() && self.problems.is_empty()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{}: {} vertices, {} expected edges, {} in file, {} missing, {} extra",
            if self.passed() { "PASS" } else { "FAIL" },
            self.n_unique,
            self.expected_edges,
            self.found_edges,
            self.missing.len(),
            self.extra.len()
        )?;
        for p in &self.problems {
            writeln!(f, "problem: {p}")?;
        }
        for (i, j) in &self.missing {
            writeln!(f, "missing {i} {j}")?;
        }
        for (i, j) in &self.extra {
            writeln!(f, "extra {i} {j}")?;
        }
        Ok(())
    }
}

/// Compares `file` to the reference graph of `rows`.
pub fn verify_rows<S: AsRef<str>>(rows: &[S], file: &EdgesFile) -> VerifyReport {
    let (names, expected) = reference_graph(rows);
    let mut problems = Vec::new();
    if file.n_unique != names.len() {
        problems.push(format!(
            "file declares {} vertices, input has {} distinct vectors",
            file.n_unique,
            names.len()
        ));
    }
    if let Some(v) = &file.vertices {
        if *v != names {
            problems.push("vertex listing differs from the sorted distinct input".to_string());
        }
    }
    let want: BTreeSet<(u32, u32)> = expected.iter().copied().collect();
    let have: BTreeSet<(u32, u32)> = file.edges.iter().copied().collect();
    VerifyReport {
        n_unique: names.len(),
        expected_edges: want.len(),
        found_edges: have.len(),
        missing: want.difference(&have).copied().collect(),
        extra: have.difference(&want).copied().collect(),
        problems,
    }
}
