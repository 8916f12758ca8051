//! The `generate`, `build` and `verify` commands as library calls.

use std::time::{Duration, Instant};

use cellgraph::scene::clustered_vectors;
use cellgraph::{
    generate_samples, random_vector_multiset, AlgorithmParams, BuildReport, ParallelConfig,
    Registry, SampleConfig, SampleMode, Scene, VectorSet,
};

use crate::error::{CliError, Result};
use crate::formats::{read_vector_rows, rows_to_set, EdgesFile};
use crate::oracle::{verify_rows, VerifyReport, QUADRATIC_LIMIT};

/// Where generated vectors come from.
#[derive(Clone, Debug)]
pub enum VectorSource {
    Scene {
        scene: Scene,
        mode: SampleMode,
    },
    Random {
        ell: usize,
        duplicate_fraction: f64,
    },
    Clustered {
        ell: usize,
        centers: usize,
        max_flips: usize,
    },
}

pub fn cmd_generate(source: &VectorSource, count: usize, seed: u64) -> Result<VectorSet> {
    if count == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let set = match source {
        VectorSource::Scene { scene, mode } => {
            generate_samples(scene, &SampleConfig::new(count, seed, *mode)?)?
        }
        VectorSource::Random {
            ell,
            duplicate_fraction,
        } => random_vector_multiset(count, *ell, *duplicate_fraction, seed)?,
        VectorSource::Clustered {
            ell,
            centers,
            max_flips,
        } => clustered_vectors(count, *ell, *centers, *max_flips, seed)?,
    };
    Ok(set)
}

#[derive(Clone, Debug)]
pub struct BuildOptions {
    pub algo: String,
    pub params: AlgorithmParams,
    pub parallel: ParallelConfig,
    pub with_vertices: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            algo: "tree".into(),
            params: AlgorithmParams::default(),
            parallel: ParallelConfig::default(),
            with_vertices: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BuildOutput {
    pub label: String,
    pub n_in: usize,
    pub edges: EdgesFile,
    pub report: BuildReport,
    /// Input parsing, kept out of the algorithm stages.
    pub parse_time: Duration,
}

impl BuildOutput {
    /// Summary record, then a `parse` record, then one record per stage.
    pub fn stats_records(&self) -> String {
        let mut out = format!(
            "algo={}\tn_in={}\tn_unique={}\tedges={}\n",
            self.label,
            self.n_in,
            self.edges.n_unique,
            self.edges.edges.len()
        );
        out.push_str(&format!(
            "stage=parse\tmicros={}\n",
            self.parse_time.as_micros()
        ));
        out.push_str(&self.report.timings.to_records());
        out
    }
}

pub fn cmd_build(input: &VectorSet, opts: &BuildOptions) -> Result<BuildOutput> {
    if input.is_empty() {
        return Err(CliError::Usage("input holds no vectors".into()));
    }
    let registry = Registry::builtin();
    let algo = registry
        .create(&opts.algo, &opts.params)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let report = algo.run(input, &opts.parallel)?;
    Ok(BuildOutput {
        label: algo.label(),
        n_in: input.len(),
        edges: EdgesFile::from_graph(&report.graph, opts.with_vertices),
        report,
        parse_time: Duration::ZERO,
    })
}

/// Parses a vectors file and builds its edges file.
pub fn cmd_build_bytes(source: &str, bytes: &[u8], opts: &BuildOptions) -> Result<BuildOutput> {
    let t0 = Instant::now();
    let (ell, rows) = read_vector_rows(source, bytes)?;
    if rows.is_empty() {
        return Err(CliError::parse(source, 1, "input holds no vectors"));
    }
    let set = rows_to_set(ell, &rows)?;
    let parse_time = t0.elapsed();
    let mut out = cmd_build(&set, opts)?;
    out.parse_time = parse_time;
    Ok(out)
}

/// Checks an edges file against the exhaustive reference.
pub fn cmd_verify(
    vectors_source: &str,
    vectors: &[u8],
    edges_source: &str,
    edges: &str,
    force: bool,
) -> Result<VerifyReport> {
    let (_, rows) = read_vector_rows(vectors_source, vectors)?;
    let distinct = rows.iter().collect::<std::collections::HashSet<_>>().len();
    if distinct > QUADRATIC_LIMIT && !force {
        return Err(CliError::Usage(format!(
            "{distinct} distinct vectors exceed the quadratic verification limit of {QUADRATIC_LIMIT}; pass --force-quadratic"
        )));
    }
    let file = EdgesFile::parse(edges_source, edges)?;
    Ok(verify_rows(&rows, &file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::write_vectors_text;

    fn text(set: &VectorSet) -> Vec<u8> {
        let mut buf = Vec::new();
        write_vectors_text(set, &mut buf).unwrap();
        buf
    }

    #[test]
    fn build_then_verify() {
        let set = random_vector_multiset(300, 12, 0.3, 4).unwrap();
        let bytes = text(&set);
        for algo in ["naive", "heuristic", "tree"] {
            let opts = BuildOptions {
                algo: algo.into(),
                ..Default::default()
            };
            let out = cmd_build_bytes("in", &bytes, &opts).unwrap();
            let edges = out.edges.to_text();
            let report = cmd_verify("in", &bytes, "out", &edges, false).unwrap();
            assert!(report.passed(), "{algo}: {report}");
            let stats = out.stats_records();
            assert!(stats.lines().nth(1).unwrap().starts_with("stage=parse"));
        }
    }

    #[test]
    fn unknown_algorithm_is_usage_error() {
        let set = VectorSet::from_strs(&["01"]).unwrap();
        let opts = BuildOptions {
            algo: "quantum".into(),
            ..Default::default()
        };
        let err = cmd_build(&set, &opts).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn verify_guard_requires_force() {
        let set = random_vector_multiset(QUADRATIC_LIMIT + 1, 64, 0.0, 1).unwrap();
        let bytes = text(&set);
        let err = cmd_verify("in", &bytes, "e", "0 0\n", false).unwrap_err();
        assert!(matches!(err, CliError::Usage(_)));
    }
}
