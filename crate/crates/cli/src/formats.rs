//! On-disk formats.
//!
//! Vectors file (text):
//! ```text
//! <n> <ell>
//! <ell characters of 0/1, bit 0 first>     (n lines)
//! ```
//! Vectors file (packed binary): the 8-byte magic `CGVB\x01\0\0\0`, then `n`
//! and `ell` as little-endian `u64`, then `n` records of `⌈ell/8⌉` bytes.
//! Bit `i` lives in byte `i / 8` under mask `0x80 >> (i % 8)`, so bit 0 is
//! the first (most significant) bit of each record. Padding bits are zero.
//!
//! Edges file:
//! ```text
//! <n_unique> <m>
//! <i> <j>                                  (m lines, i < j, sorted)
//! <vertex bits>                            (optional: exactly n_unique lines)
//! ```
//! Indices refer to the sorted, deduplicated vertex order.
//!
//! Scene file: `#` starts a comment and blank lines are ignored. The first
//! line holds `d ell`, the second `2d` reals `min_0 max_0 ... min_{d-1}
//! max_{d-1}`, followed by `ell` constraint lines of `d + 1` reals, the
//! coefficients and then the offset of `a·p + b >= 0`.

use std::io::Write;

use cellgraph::{BitVector, CellGraph, Constraint, Scene, VectorSet};

use crate::error::{CliError, Result};

pub const BINARY_MAGIC: &[u8; 8] = b"CGVB\x01\0\0\0";

/// Content lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_header(
    source: &str,
    line: Option<(usize, &str)>,
    what: &str,
) -> Result<(usize, usize, usize)> {
    let (no, l) =
        line.ok_or_else(|| CliError::parse(source, 1, format!("missing {what} header")))?;
    let nums: Vec<&str> = l.split_whitespace().collect();
    if nums.len() != 2 {
        return Err(CliError::parse(
            source,
            no,
            format!("{what} header must hold two integers"),
        ));
    }
    let a = nums[0]
        .parse()
        .map_err(|_| CliError::parse(source, no, format!("bad integer {:?}", nums[0])))?;
    let b = nums[1]
        .parse()
        .map_err(|_| CliError::parse(source, no, format!("bad integer {:?}", nums[1])))?;
    Ok((no, a, b))
}

fn check_bit_row(source: &str, no: usize, row: &str, ell: usize) -> Result<()> {
    if row.len() != ell {
        return Err(CliError::parse(
            source,
            no,
            format!("expected {ell} bits, found {} characters", row.len()),
        ));
    }
    if let Some(c) = row.chars().find(|c| *c != '0' && *c != '1') {
        return Err(CliError::parse(
            source,
            no,
            format!("unexpected character {c:?}"),
        ));
    }
    Ok(())
}

/// Raw rows of a vectors file as `0`/`1` strings, plus `ell`. Accepts both the
/// text and the packed binary layout.
pub fn read_vector_rows(source: &str, bytes: &[u8]) -> Result<(usize, Vec<String>)> {
    if bytes.starts_with(BINARY_MAGIC) {
        return read_binary_rows(source, bytes);
    }
    let text = std::str::from_utf8(bytes)
        .map_err(|_| CliError::parse(source, 1, "file is neither text nor packed binary"))?;
    let mut lines = content_lines(text);
    let (_, n, ell) = parse_header(source, lines.next(), "vectors")?;
    if ell == 0 {
        return Err(CliError::parse(
            source,
            1,
            "vector length must be at least 1",
        ));
    }
    let mut rows = Vec::with_capacity(n);
    for (no, l) in lines {
        if rows.len() == n {
            return Err(CliError::parse(
                source,
                no,
                format!("more than the {n} declared vectors"),
            ));
        }
        check_bit_row(source, no, l, ell)?;
        rows.push(l.to_string());
    }
    if rows.len() != n {
        return Err(CliError::parse(
            source,
            text.lines().count().max(1),
            format!("header declares {n} vectors, found {}", rows.len()),
        ));
    }
    Ok((ell, rows))
}

fn read_binary_rows(source: &str, bytes: &[u8]) -> Result<(usize, Vec<String>)> {
    let field = |at: usize| -> Result<usize> {
        bytes
            .get(at..at + 8)
            .map(|b| u64::from_le_bytes(b.try_into().unwrap()) as usize)
            .ok_or_else(|| CliError::parse(source, 1, "truncated binary header"))
    };
    let n = field(8)?;
    let ell = field(16)?;
    if ell == 0 {
        return Err(CliError::parse(
            source,
            1,
            "vector length must be at least 1",
        ));
    }
    let rec = ell.div_ceil(8);
    let body = &bytes[24..];
    if body.len() != n * rec {
        return Err(CliError::parse(
            source,
            1,
            format!("expected {} payload bytes, found {}", n * rec, body.len()),
        ));
    }
    let mut rows = Vec::with_capacity(n);
    for (r, chunk) in body.chunks_exact(rec).enumerate() {
        let row: String = (0..ell)
            .map(|i| {
                if chunk[i / 8] & (0x80 >> (i % 8)) != 0 {
                    '1'
                } else {
                    '0'
                }
            })
            .collect();
        if (ell..rec * 8).any(|i| chunk[i / 8] & (0x80 >> (i % 8)) != 0) {
            return Err(CliError::parse(
                source,
                1,
                format!("record {r} has nonzero padding bits"),
            ));
        }
        rows.push(row);
    }
    Ok((ell, rows))
}

pub fn rows_to_set(ell: usize, rows: &[String]) -> Result<VectorSet> {
    let mut set = VectorSet::with_capacity(ell, rows.len())?;
    for row in rows {
        let v: BitVector = row.parse()?;
        set.push(v.as_bits())?;
    }
    Ok(set)
}

pub fn read_vectors(source: &str, bytes: &[u8]) -> Result<VectorSet> {
    let (ell, rows) = read_vector_rows(source, bytes)?;
    if rows.is_empty() {
        return VectorSet::new(ell).map_err(Into::into);
    }
    rows_to_set(ell, &rows)
}

pub fn write_vectors_text(set: &VectorSet, out: &mut impl Write) -> Result<()> {
    writeln!(out, "{} {}", set.len(), set.ell())?;
    for v in set.iter() {
        writeln!(out, "{v}")?;
    }
    Ok(())
}

pub fn write_vectors_binary(set: &VectorSet, out: &mut impl Write) -> Result<()> {
    out.write_all(BINARY_MAGIC)?;
    out.write_all(&(set.len() as u64).to_le_bytes())?;
    out.write_all(&(set.ell() as u64).to_le_bytes())?;
    let rec = set.ell().div_ceil(8);
    for v in set.iter() {
        // words hold bit 0 in their most significant position
        let bytes: Vec<u8> = v
            .words()
            .iter()
            .flat_map(|w| w.to_be_bytes())
            .take(rec)
            .collect();
        out.write_all(&bytes)?;
    }
    Ok(())
}

/// Parsed edges file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgesFile {
    pub n_unique: usize,
    pub edges: Vec<(u32, u32)>,
    pub vertices: Option<Vec<String>>,
}

impl EdgesFile {
    pub fn from_graph(graph: &CellGraph, with_vertices: bool) -> Self {
        Self {
            n_unique: graph.vertex_count(),
            edges: graph.edges().pairs().to_vec(),
            vertices: with_vertices
                .then(|| graph.vertices().iter().map(|v| v.to_string()).collect()),
        }
    }

    pub fn write(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "{} {}", self.n_unique, self.edges.len())?;
        for (i, j) in &self.edges {
            writeln!(out, "{i} {j}")?;
        }
        for v in self.vertices.iter().flatten() {
            writeln!(out, "{v}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn parse(source: &str, text: &str) -> Result<Self> {
        let mut lines = content_lines(text);
        let (_, n_unique, m) = parse_header(source, lines.next(), "edges")?;
        let mut edges = Vec::with_capacity(m);
        let mut vertices = Vec::new();
        for (no, l) in lines {
            if edges.len() < m {
                let (a, b) = l.split_once(char::is_whitespace).ok_or_else(|| {
                    CliError::parse(source, no, "edge line must hold two indices")
                })?;
                let i: u32 = a
                    .trim()
                    .parse()
                    .map_err(|_| CliError::parse(source, no, format!("bad index {a:?}")))?;
                let j: u32 = b
                    .trim()
                    .parse()
                    .map_err(|_| CliError::parse(source, no, format!("bad index {b:?}")))?;
                if i >= j || j as usize >= n_unique {
                    return Err(CliError::parse(
                        source,
                        no,
                        format!("edge ({i}, {j}) must satisfy i < j < {n_unique}"),
                    ));
                }
                if edges.last().is_some_and(|&p| p >= (i, j)) {
                    return Err(CliError::parse(source, no, "edges are not strictly sorted"));
                }
                edges.push((i, j));
            } else {
                if l.chars().any(|c| c != '0' && c != '1') {
                    return Err(CliError::parse(
                        source,
                        no,
                        "vertex line must hold only 0/1",
                    ));
                }
                vertices.push(l.to_string());
            }
        }
        if edges.len() != m {
            return Err(CliError::parse(
                source,
                text.lines().count().max(1),
                format!("header declares {m} edges, found {}", edges.len()),
            ));
        }
        let vertices = match vertices.len() {
            0 => None,
            k if k == n_unique => Some(vertices),
            k => {
                return Err(CliError::parse(
                    source,
                    text.lines().count(),
                    format!("vertex listing has {k} lines, expected {n_unique}"),
                ))
            }
        };
        Ok(Self {
            n_unique,
            edges,
            vertices,
        })
    }
}

fn parse_reals(source: &str, no: usize, line: &str, expect: usize) -> Result<Vec<f64>> {
    let vals = line
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::parse(source, no, format!("bad number {t:?}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if vals.len() != expect {
        return Err(CliError::parse(
            source,
            no,
            format!("expected {expect} numbers, found {}", vals.len()),
        ));
    }
    Ok(vals)
}

pub fn parse_scene(source: &str, text: &str) -> Result<Scene> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hdr_no, d, ell) = parse_header(source, lines.next(), "scene")?;
    let (bno, bline) = lines
        .next()
        .ok_or_else(|| CliError::parse(source, hdr_no, "missing bounds line"))?;
    let b = parse_reals(source, bno, bline, 2 * d)?;
    let bounds: Vec<(f64, f64)> = b.chunks_exact(2).map(|p| (p[0], p[1])).collect();
    if let Some(axis) = bounds.iter().position(|(lo, hi)| lo >= hi) {
        return Err(CliError::parse(
            source,
            bno,
            format!("axis {axis} needs min < max"),
        ));
    }
    let mut constraints = Vec::with_capacity(ell);
    let mut last = bno;
    for (no, l) in lines {
        if constraints.len() == ell {
            return Err(CliError::parse(
                source,
                no,
                format!("more than the {ell} declared constraints"),
            ));
        }
        let mut vals = parse_reals(source, no, l, d + 1)?;
        let offset = vals.pop().unwrap();
        let c = Constraint::new(vals, offset)
            .map_err(|e| CliError::parse(source, no, e.to_string()))?;
        constraints.push(c);
        last = no;
    }
    if constraints.len() != ell {
        return Err(CliError::parse(
            source,
            last,
            format!(
                "header declares {ell} constraints, found {}",
                constraints.len()
            ),
        ));
    }
    Scene::new(d, constraints, bounds).map_err(|e| CliError::parse(source, hdr_no, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn vectors_text_errors_carry_line_numbers() {
        let err = read_vectors("v", b"2 3\n101\n10\n").unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 3, .. }), "{err}");
        let err = read_vectors("v", b"2 3\n101\n").unwrap_err();
        assert!(matches!(err, CliError::Parse { .. }));
        let err = read_vectors("v", b"1 3\n101\n111\n").unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 3, .. }));
        let err = read_vectors("v", b"1 3\n1x1\n").unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 2, .. }));
        assert!(read_vectors("v", b"x 3\n").is_err());
        assert!(read_vectors("v", b"").is_err());
    }

    #[test]
    fn binary_layout_is_bit0_first() {
        let set = VectorSet::from_strs(&["1000000001", "0100000000"]).unwrap();
        let mut buf = Vec::new();
        write_vectors_binary(&set, &mut buf).unwrap();
        assert_eq!(&buf[..8], BINARY_MAGIC);
        assert_eq!(&buf[24..], &[0x80, 0x40, 0x40, 0x00]);
        assert_eq!(read_vectors("b", &buf).unwrap(), set);
        let mut bad = buf.clone();
        bad[25] |= 0x01; // padding bit
        assert!(read_vectors("b", &bad).is_err());
        assert!(read_vectors("b", &buf[..buf.len() - 1]).is_err());
    }

    #[test]
    fn edges_file_parsing() {
        let ok = EdgesFile::parse("e", "3 2\n0 1\n1 2\n").unwrap();
        assert_eq!(ok.edges, vec![(0, 1), (1, 2)]);
        assert!(ok.vertices.is_none());
        let with_v = EdgesFile::parse("e", "2 1\n0 1\n00\n01\n").unwrap();
        assert_eq!(with_v.vertices.unwrap(), vec!["00", "01"]);
        assert!(EdgesFile::parse("e", "3 2\n1 2\n0 1\n").is_err());
        assert!(EdgesFile::parse("e", "3 1\n1 1\n").is_err());
        assert!(EdgesFile::parse("e", "3 1\n1 3\n").is_err());
        assert!(EdgesFile::parse("e", "3 2\n0 1\n").is_err());
        assert!(EdgesFile::parse("e", "3 1\n0 1\n00\n").is_err());
    }

    #[test]
    fn scene_parsing() {
        let text = "# triangle\n2 3\n0 12 0 9\n1 0 -5\n0 1 -2  # y >= 2\n-1 -1 11\n";
        let s = parse_scene("s", text).unwrap();
        assert_eq!(s.dimension(), 2);
        assert_eq!(s.ell(), 3);
        assert_eq!(s.bounds(), &[(0.0, 12.0), (0.0, 9.0)]);
        assert_eq!(s.constraints()[2].offset(), 11.0);

        let bad_row = "2 2\n0 1 0 1\n1 0 0\n1 0\n";
        assert!(matches!(
            parse_scene("s", bad_row),
            Err(CliError::Parse { line: 4, .. })
        ));
        let zero = "1 1\n0 1\n0 5\n";
        assert!(matches!(
            parse_scene("s", zero),
            Err(CliError::Parse { line: 3, .. })
        ));
        let bounds = "1 1\n1 0\n1 0\n";
        assert!(matches!(
            parse_scene("s", bounds),
            Err(CliError::Parse { line: 2, .. })
        ));
        assert!(parse_scene("s", "2 3\n0 1 0 1\n1 0 0\n").is_err());
    }

    proptest! {
        #[test]
        fn vectors_round_trip(rows in (1usize..130).prop_flat_map(|ell| {
            proptest::collection::vec(proptest::collection::vec(any::<bool>(), ell), 1..20)
        }), binary in any::<bool>()) {
            let strs: Vec<String> = rows
                .iter()
                .map(|r| r.iter().map(|&b| if b { '1' } else { '0' }).collect())
                .collect();
            let set = VectorSet::from_strs(&strs).unwrap();
            let mut buf = Vec::new();
            if binary {
                write_vectors_binary(&set, &mut buf).unwrap();
            } else {
                write_vectors_text(&set, &mut buf).unwrap();
            }
            prop_assert_eq!(read_vectors("p", &buf).unwrap(), set);
        }

        #[test]
        fn edges_round_trip(n in 2u32..50, picks in proptest::collection::btree_set((0u32..50, 0u32..50), 0..40), with_v in any::<bool>()) {
            let edges: Vec<(u32, u32)> = picks
                .into_iter()
                .filter(|(i, j)| i < j && *j < n)
                .collect();
            let file = EdgesFile {
                n_unique: n as usize,
                edges,
                vertices: with_v.then(|| (0..n).map(|i| format!("{i:08b}")).collect()),
            };
            prop_assert_eq!(EdgesFile::parse("p", &file.to_text()).unwrap(), file);
        }
    }
}
