//! Constraint scenes and the sample generators that turn random points into
//! cell signatures.
//!
//! All randomness comes from ChaCha8 keyed by the 64-bit seed, with one
//! stream per sample index, so a given `(seed, index)` always produces the
//! same sample regardless of how generation is split across workers.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bitcore::{words_for, BitVector, VectorSet, WORD_BITS};
use crate::engine::{run_partitioned, ParallelConfig};
use crate::error::{invalid, Result};

/// Half-space `a·p + b >= 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    coefficients: Vec<f64>,
    offset: f64,
}

impl Constraint {
    pub fn new(coefficients: Vec<f64>, offset: f64) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(invalid("constraint needs at least one coefficient"));
        }
        if coefficients.iter().chain([&offset]).any(|c| !c.is_finite()) {
            return Err(invalid("constraint coefficients must be finite"));
        }
        if coefficients.iter().all(|&c| c == 0.0) {
            return Err(invalid("constraint coefficients are all zero"));
        }
        Ok(Self {
            coefficients,
            offset,
        })
    }

    pub fn dimension(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Points on the boundary count as satisfying the constraint.
    pub fn is_satisfied(&self, point: &[f64]) -> bool {
        let dot: f64 = self
            .coefficients
            .iter()
            .zip(point)
            .map(|(a, p)| a * p)
            .sum();
        dot + self.offset >= 0.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    dimension: usize,
    constraints: Vec<Constraint>,
    bounds: Vec<(f64, f64)>,
}

impl Scene {
    pub fn new(
        dimension: usize,
        constraints: Vec<Constraint>,
        bounds: Vec<(f64, f64)>,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(invalid("scene dimension must be at least 1"));
        }
        if constraints.is_empty() {
            return Err(invalid("scene needs at least one constraint"));
        }
        if let Some((i, c)) = constraints
            .iter()
            .enumerate()
            .find(|(_, c)| c.dimension() != dimension)
        {
            return Err(invalid(format!(
                "constraint {i} has dimension {}, scene has {dimension}",
                c.dimension()
            )));
        }
        if bounds.len() != dimension {
            return Err(invalid(format!(
                "{} bound pairs for a {dimension}-dimensional scene",
                bounds.len()
            )));
        }
        if let Some((axis, _)) = bounds
            .iter()
            .enumerate()
            .find(|(_, (lo, hi))| !(lo.is_finite() && hi.is_finite() && lo < hi))
        {
            return Err(invalid(format!(
                "axis {axis} bounds must satisfy min < max"
            )));
        }
        Ok(Self {
            dimension,
            constraints,
            bounds,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Number of constraints ℓ, the signature length.
    pub fn ell(&self) -> usize {
        self.constraints.len()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }
}

/// Bit `i` is set iff `point` satisfies constraint `i`.
pub fn signature(scene: &Scene, point: &[f64]) -> Result<BitVector> {
    if point.len() != scene.dimension {
        return Err(invalid(format!(
            "point has dimension {}, scene has {}",
            point.len(),
            scene.dimension
        )));
    }
    let mut words = vec![0u64; words_for(scene.ell())];
    for (i, c) in scene.constraints.iter().enumerate() {
        if c.is_satisfied(point) {
            words[i / WORD_BITS] |= 1 << (WORD_BITS - 1 - i % WORD_BITS);
        }
    }
    BitVector::from_words(scene.ell(), words)
}

/// Shoemake's uniform unit quaternion from three uniforms in `[0, 1)`.
pub fn shoemake_quaternion(u1: f64, u2: f64, u3: f64) -> Result<[f64; 4]> {
    if [u1, u2, u3].iter().any(|u| !(0.0..1.0).contains(u)) {
        return Err(invalid("Shoemake inputs must lie in [0, 1)"));
    }
    let a = (1.0 - u1).sqrt();
    let b = u1.sqrt();
    let (s2, c2) = (TAU * u2).sin_cos();
    let (s3, c3) = (TAU * u3).sin_cos();
    Ok([a * s2, a * c2, b * s3, b * c3])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SampleMode {
    /// Points uniform in the scene's bounding box.
    #[default]
    BoxUniform,
    /// Uniform unit quaternions; the scene must be 4-dimensional and its
    /// constraints act on the quaternion components. Bounds are ignored.
    QuaternionUniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleConfig {
    count: usize,
    seed: u64,
    mode: SampleMode,
}

impl SampleConfig {
    pub fn new(count: usize, seed: u64, mode: SampleMode) -> Result<Self> {
        if count == 0 {
            return Err(invalid("sample count must be at least 1"));
        }
        Ok(Self { count, seed, mode })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn mode(&self) -> SampleMode {
        self.mode
    }
}

/// Generator for sample `index`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// The point drawn for sample `index`.
pub fn sample_point(scene: &Scene, cfg: &SampleConfig, index: u64) -> Vec<f64> {
    let mut rng = stream_rng(cfg.seed, index);
    match cfg.mode {
        SampleMode::BoxUniform => scene
            .bounds
            .iter()
            .map(|&(lo, hi)| lo + rng.gen::<f64>() * (hi - lo))
            .collect(),
        SampleMode::QuaternionUniform => {
            let (u1, u2, u3) = (rng.gen(), rng.gen(), rng.gen());
            shoemake_quaternion(u1, u2, u3)
                .expect("gen::<f64>() lies in [0, 1)")
                .to_vec()
        }
    }
}

/// Signatures of `cfg.count` random points; duplicates are kept.
pub fn generate_samples(scene: &Scene, cfg: &SampleConfig) -> Result<VectorSet> {
    if cfg.mode == SampleMode::QuaternionUniform && scene.dimension != 4 {
        return Err(invalid(format!(
            "quaternion sampling needs a 4-dimensional scene, got {}",
            scene.dimension
        )));
    }
    let parts = run_partitioned(cfg.count, 4096, &ParallelConfig::default(), |range| {
        range
            .map(|i| signature(scene, &sample_point(scene, cfg, i as u64)))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut set = VectorSet::with_capacity(scene.ell(), cfg.count)?;
    for v in parts.iter().flatten() {
        set.push(v.as_bits())?;
    }
    Ok(set)
}

fn random_words(rng: &mut ChaCha8Rng, ell: usize) -> Vec<u64> {
    let mut words: Vec<u64> = (0..words_for(ell)).map(|_| rng.gen()).collect();
    let used = ell % WORD_BITS;
    if used != 0 {
        *words.last_mut().unwrap() &= !(u64::MAX >> used);
    }
    words
}

/// `n` uniform random vectors where each entry after the first repeats an
/// earlier entry with probability `duplicate_fraction`.
pub fn random_vector_multiset(
    n: usize,
    ell: usize,
    duplicate_fraction: f64,
    seed: u64,
) -> Result<VectorSet> {
    perturbed_multiset(n, ell, duplicate_fraction, 0.0, seed)
}

enum Draw {
    Fresh(Vec<u64>),
    Repeat(usize),
    /// An earlier entry with these bits flipped.
    Near(usize, Vec<usize>),
}

/// Like [`random_vector_multiset`], but an entry that is not a repeat is,
/// with probability `neighbor_fraction`, an earlier entry with one or two bits
/// flipped. This plants distance-1 and distance-2 pairs that uniform vectors
/// of any real length almost never contain.
pub fn perturbed_multiset(
    n: usize,
    ell: usize,
    duplicate_fraction: f64,
    neighbor_fraction: f64,
    seed: u64,
) -> Result<VectorSet> {
    if !(0.0..1.0).contains(&duplicate_fraction) {
        return Err(invalid("duplicate fraction must lie in [0, 1)"));
    }
    if !(0.0..=1.0).contains(&neighbor_fraction) {
        return Err(invalid("neighbor fraction must lie in [0, 1]"));
    }
    if n == 0 {
        return Err(invalid("vector count must be at least 1"));
    }
    if ell == 0 {
        return Err(invalid("vector length must be at least 1"));
    }
    let draws = run_partitioned(n, 4096, &ParallelConfig::default(), |range| {
        Ok(range
            .map(|i| {
                let mut rng = stream_rng(seed, i as u64);
                if i > 0 && rng.gen::<f64>() < duplicate_fraction {
                    Draw::Repeat(rng.gen_range(0..i))
                } else if i > 0 && rng.gen::<f64>() < neighbor_fraction {
                    let flips = rng.gen_range(1..=2);
                    Draw::Near(
                        rng.gen_range(0..i),
                        (0..flips).map(|_| rng.gen_range(0..ell)).collect(),
                    )
                } else {
                    Draw::Fresh(random_words(&mut rng, ell))
                }
            })
            .collect::<Vec<_>>())
    })?;
    let stride = words_for(ell);
    let mut data: Vec<u64> = Vec::with_capacity(n * stride);
    for draw in draws.into_iter().flatten() {
        match draw {
            Draw::Fresh(words) => data.extend(words),
            Draw::Repeat(src) => data.extend_from_within(src * stride..(src + 1) * stride),
            Draw::Near(src, bits) => {
                let at = data.len();
                data.extend_from_within(src * stride..(src + 1) * stride);
                for k in bits {
                    data[at + k / WORD_BITS] ^= 1 << (WORD_BITS - 1 - k % WORD_BITS);
                }
            }
        }
    }
    Ok(VectorSet::from_raw(ell, data, false))
}

/// `n` vectors each within `max_flips` random bit flips of one of `centers`
/// random center vectors.
pub fn clustered_vectors(
    n: usize,
    ell: usize,
    centers: usize,
    max_flips: usize,
    seed: u64,
) -> Result<VectorSet> {
    if n == 0 || centers == 0 {
        return Err(invalid("need at least one vector and one center"));
    }
    let mut crng = stream_rng(seed, u64::MAX);
    let centers: Vec<BitVector> = (0..centers)
        .map(|_| BitVector::from_words(ell, random_words(&mut crng, ell)))
        .collect::<Result<_>>()?;
    let mut set = VectorSet::with_capacity(ell, n)?;
    for i in 0..n {
        let mut rng = stream_rng(seed, i as u64);
        let mut v = centers[rng.gen_range(0..centers.len())].clone();
        for _ in 0..rng.gen_range(0..=max_flips) {
            let k = rng.gen_range(0..ell);
            v = v.flip_bit(k)?;
        }
        set.push(v.as_bits())?;
    }
    Ok(set)
}
