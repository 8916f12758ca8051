//! Packed binary vectors and the Hamming primitives built on them.
//!
//! Bits are packed into `u64` words with bit 0 stored in the most significant
//! position of the first word. With that layout the natural ordering of the
//! word slices is the canonical vector order (bit 0 compared first, `0 < 1`),
//! and any `r`-bit chunk read most-significant-bit-first is a contiguous field.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// Width of one packing unit.
pub const WORD_BITS: usize = u64::BITS as usize;

#[inline]
pub(crate) fn words_for(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

#[inline]
fn mask_of(i: usize) -> u64 {
    1u64 << (WORD_BITS - 1 - i % WORD_BITS)
}

/// An owned ℓ-bit vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

/// A borrowed view of a packed bit vector, as stored inside a [`VectorSet`].
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bits<'a> {
    len: usize,
    words: &'a [u64],
}

impl BitVector {
    /// All-zero vector of `len` bits.
    pub fn zeros(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(invalid("bit vector must have at least one bit"));
        }
        Ok(Self {
            len,
            words: vec![0; words_for(len)],
        })
    }

    /// Packs a sequence of 0/1 values, bit 0 first.
    pub fn pack(bits: &[u8]) -> Result<Self> {
        let mut out = Self::zeros(bits.len())?;
        for (i, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => out.words[i / WORD_BITS] |= mask_of(i),
                other => {
                    return Err(invalid(format!(
                        "bit {i} has value {other}, expected 0 or 1"
                    )))
                }
            }
        }
        Ok(out)
    }

    pub fn from_bools(bits: &[bool]) -> Result<Self> {
        let mut out = Self::zeros(bits.len())?;
        for (i, _) in bits.iter().enumerate().filter(|(_, b)| **b) {
            out.words[i / WORD_BITS] |= mask_of(i);
        }
        Ok(out)
    }

    /// Builds a vector from already packed words. Bits past `len` must be zero.
    pub fn from_words(len: usize, words: Vec<u64>) -> Result<Self> {
        Bits::new(len, &words)?;
        Ok(Self { len, words })
    }

    #[inline]
    pub fn as_bits(&self) -> Bits<'_> {
        Bits {
            len: self.len,
            words: &self.words,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    /// Always false; a vector has at least one bit.
    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get_bit(&self, i: usize) -> Result<bool> {
        self.as_bits().get_bit(i)
    }

    /// Returns a copy of `self` with bit `k` negated.
    pub fn flip_bit(&self, k: usize) -> Result<Self> {
        check_index(k, self.len)?;
        let mut out = self.clone();
        out.words[k / WORD_BITS] ^= mask_of(k);
        Ok(out)
    }

    pub fn set_bit(&mut self, i: usize, value: bool) -> Result<()> {
        check_index(i, self.len)?;
        if value {
            self.words[i / WORD_BITS] |= mask_of(i);
        } else {
            self.words[i / WORD_BITS] &= !mask_of(i);
        }
        Ok(())
    }
}

impl<'a> Bits<'a> {
    /// Wraps packed words, validating the zero-padding invariant.
    pub fn new(len: usize, words: &'a [u64]) -> Result<Self> {
        if len == 0 {
            return Err(invalid("bit vector must have at least one bit"));
        }
        if words.len() != words_for(len) {
            return Err(invalid(format!(
                "{} words cannot hold exactly {len} bits",
                words.len()
            )));
        }
        let used = len % WORD_BITS;
        if used != 0 && words[words.len() - 1] << used != 0 {
            return Err(invalid("bits past the vector length must be zero"));
        }
        Ok(Self { len, words })
    }

    #[inline]
    pub(crate) fn new_unchecked(len: usize, words: &'a [u64]) -> Self {
        debug_assert_eq!(words.len(), words_for(len));
        Self { len, words }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn words(&self) -> &'a [u64] {
        self.words
    }

    pub fn get_bit(&self, i: usize) -> Result<bool> {
        check_index(i, self.len)?;
        Ok(self.bit(i))
    }

    #[inline]
    pub(crate) fn bit(&self, i: usize) -> bool {
        self.words[i / WORD_BITS] & mask_of(i) != 0
    }

    pub fn to_owned(&self) -> BitVector {
        BitVector {
            len: self.len,
            words: self.words.to_vec(),
        }
    }

    /// Digit `index` of the radix-`2^r` encoding: `r` bits starting at bit
    /// `index * r`, most significant first, zero padded past the end.
    #[inline]
    pub fn digit(&self, index: usize, radix_bits: u32) -> u64 {
        field(self.words, index * radix_bits as usize, radix_bits)
    }

    /// Number of positions in `[start, end)` where `self` and `other` differ.
    pub(crate) fn mismatches_in(&self, other: &Bits<'_>, start: usize, end: usize) -> usize {
        if start >= end {
            return 0;
        }
        let first = start / WORD_BITS;
        let last = (end - 1) / WORD_BITS;
        let mut total = 0;
        for w in first..=last {
            let mut diff = self.words[w] ^ other.words[w];
            if w == first {
                diff &= u64::MAX >> (start % WORD_BITS);
            }
            if w == last {
                let keep = end - last * WORD_BITS;
                if keep < WORD_BITS {
                    diff &= !(u64::MAX >> keep);
                }
            }
            total += diff.count_ones() as usize;
        }
        total
    }
}

/// Reads `width` (1..=64) bits starting at bit `start`, most significant first.
#[inline]
fn field(words: &[u64], start: usize, width: u32) -> u64 {
    let w = start / WORD_BITS;
    let off = (start % WORD_BITS) as u32;
    let hi = words.get(w).copied().unwrap_or(0) << off;
    let lo = if off == 0 {
        0
    } else {
        words.get(w + 1).copied().unwrap_or(0) >> (u64::BITS - off)
    };
    let v = hi | lo;
    if width == u64::BITS {
        v
    } else {
        v >> (u64::BITS - width)
    }
}

fn check_index(i: usize, len: usize) -> Result<()> {
    if i < len {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange { index: i, len })
    }
}

#[inline]
fn check_lengths(x: &Bits<'_>, y: &Bits<'_>) -> Result<()> {
    if x.len == y.len {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            left: x.len,
            right: y.len,
        })
    }
}

/// Hamming distance over equal-length word slices.
#[inline]
pub(crate) fn distance_words(a: &[u64], b: &[u64]) -> usize {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x ^ y).count_ones() as usize)
        .sum()
}

/// `min(distance, cap)`, stopping at the first word that reaches `cap`.
#[inline]
pub(crate) fn distance_words_capped(a: &[u64], b: &[u64], cap: usize) -> usize {
    let mut acc = 0;
    for (x, y) in a.iter().zip(b) {
        acc += (x ^ y).count_ones() as usize;
        if acc >= cap {
            return cap;
        }
    }
    acc
}

pub fn hamming_distance(x: Bits<'_>, y: Bits<'_>) -> Result<usize> {
    check_lengths(&x, &y)?;
    Ok(distance_words(x.words, y.words))
}

/// `min(hamming_distance(x, y), cap)`; scanning stops as soon as `cap` is reached.
pub fn distance_capped(x: Bits<'_>, y: Bits<'_>, cap: usize) -> Result<usize> {
    check_lengths(&x, &y)?;
    if cap == 0 {
        return Err(invalid("distance cap must be at least 1"));
    }
    Ok(distance_words_capped(x.words, y.words, cap))
}

/// Lexicographic order on bit sequences, bit 0 first.
pub fn compare_canonical(x: Bits<'_>, y: Bits<'_>) -> Result<Ordering> {
    check_lengths(&x, &y)?;
    Ok(x.words.cmp(y.words))
}

/// A vector over the alphabet `[2^r]` obtained by reading `r`-bit chunks.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RadixString {
    radix_bits: u32,
    digits: Vec<u64>,
}

impl RadixString {
    pub fn new(radix_bits: u32, digits: Vec<u64>) -> Result<Self> {
        check_radix(radix_bits)?;
        if let Some(d) = digits
            .iter()
            .find(|&&d| radix_bits < 64 && d >> radix_bits != 0)
        {
            return Err(invalid(format!(
                "digit {d} does not fit in {radix_bits} bits"
            )));
        }
        Ok(Self { radix_bits, digits })
    }

    pub fn radix_bits(&self) -> u32 {
        self.radix_bits
    }

    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    /// Reassembles the `ell`-bit vector this string encodes.
    pub fn decode(&self, ell: usize) -> Result<BitVector> {
        let r = self.radix_bits as usize;
        if self.digits.len() != ell.div_ceil(r) {
            return Err(invalid(format!(
                "{} digits of {r} bits cannot encode {ell} bits",
                self.digits.len()
            )));
        }
        let mut out = BitVector::zeros(ell)?;
        for (i, &d) in self.digits.iter().enumerate() {
            for b in 0..r {
                let pos = i * r + b;
                let set = d >> (r - 1 - b) & 1 == 1;
                if pos >= ell {
                    if set {
                        return Err(invalid("padding bits of the last digit must be zero"));
                    }
                } else if set {
                    out.words[pos / WORD_BITS] |= mask_of(pos);
                }
            }
        }
        Ok(out)
    }
}

fn check_radix(radix_bits: u32) -> Result<()> {
    if (1..=u64::BITS).contains(&radix_bits) {
        Ok(())
    } else {
        Err(invalid(format!(
            "radix width {radix_bits} outside 1..={}",
            u64::BITS
        )))
    }
}

/// Splits `x` into `⌈ℓ/r⌉` digits of `r` bits each.
pub fn encode_radix(x: Bits<'_>, radix_bits: u32) -> Result<RadixString> {
    check_radix(radix_bits)?;
    let n = x.len.div_ceil(radix_bits as usize);
    Ok(RadixString {
        radix_bits,
        digits: (0..n).map(|i| x.digit(i, radix_bits)).collect(),
    })
}

impl fmt::Display for Bits<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.len)
            .map(|i| if self.bit(i) { '1' } else { '0' })
            .collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for Bits<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits({self})")
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.as_bits().fmt(f)
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl FromStr for BitVector {
    type Err = Error;

    /// Parses a string of `0`/`1` characters, bit 0 first.
    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .bytes()
            .enumerate()
            .map(|(i, c)| match c {
                b'0' => Ok(0),
                b'1' => Ok(1),
                _ => Err(invalid(format!("character {i} of {s:?} is not 0 or 1"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::pack(&bits)
    }
}

impl PartialOrd for BitVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical order for equal lengths; shorter vectors sort first otherwise.
impl Ord for BitVector {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len
            .cmp(&other.len)
            .then_with(|| self.words.cmp(&other.words))
    }
}

impl<'a> From<&'a BitVector> for Bits<'a> {
    fn from(v: &'a BitVector) -> Self {
        v.as_bits()
    }
}

/// An ordered collection of equal-length vectors packed into one buffer.
#[derive(Clone, PartialEq, Eq)]
pub struct VectorSet {
    ell: usize,
    stride: usize,
    data: Vec<u64>,
    sorted_unique: bool,
}

impl VectorSet {
    pub fn new(ell: usize) -> Result<Self> {
        if ell == 0 {
            return Err(invalid("vector length must be at least 1"));
        }
        Ok(Self {
            ell,
            stride: words_for(ell),
            data: Vec::new(),
            sorted_unique: false,
        })
    }

    pub fn with_capacity(ell: usize, n: usize) -> Result<Self> {
        let mut set = Self::new(ell)?;
        set.data.reserve(n * set.stride);
        Ok(set)
    }

    /// Collects vectors that must all share one length.
    pub fn from_vectors<'v, I>(vectors: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'v BitVector>,
    {
        let mut iter = vectors.into_iter().peekable();
        let ell = iter
            .peek()
            .map(|v| v.len())
            .ok_or_else(|| invalid("cannot infer the vector length of an empty set"))?;
        let mut set = Self::new(ell)?;
        for v in iter {
            set.push(v.as_bits())?;
        }
        Ok(set)
    }

    /// Parses each string as a bit vector; convenient for fixtures.
    pub fn from_strs<S: AsRef<str>>(items: &[S]) -> Result<Self> {
        let vecs = items
            .iter()
            .map(|s| s.as_ref().parse())
            .collect::<Result<Vec<BitVector>>>()?;
        Self::from_vectors(&vecs)
    }

    pub(crate) fn from_raw(ell: usize, data: Vec<u64>, sorted_unique: bool) -> Self {
        let stride = words_for(ell);
        debug_assert_eq!(data.len() % stride, 0);
        Self {
            ell,
            stride,
            data,
            sorted_unique,
        }
    }

    pub fn push(&mut self, v: Bits<'_>) -> Result<()> {
        if v.len() != self.ell {
            return Err(Error::LengthMismatch {
                left: self.ell,
                right: v.len(),
            });
        }
        self.data.extend_from_slice(v.words());
        self.sorted_unique = false;
        Ok(())
    }

    #[inline]
    pub fn ell(&self) -> usize {
        self.ell
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len() / self.stride
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Words per vector.
    #[inline]
    pub fn stride(&self) -> usize {
        self.stride
    }

    /// Whether sort+dedup has been applied.
    #[inline]
    pub fn is_sorted_unique(&self) -> bool {
        self.sorted_unique
    }

    #[inline]
    pub fn get(&self, i: usize) -> Bits<'_> {
        Bits::new_unchecked(self.ell, self.words_of(i))
    }

    #[inline]
    pub(crate) fn words_of(&self, i: usize) -> &[u64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = Bits<'_>> + '_ {
        self.data
            .chunks_exact(self.stride)
            .map(move |w| Bits::new_unchecked(self.ell, w))
    }

    pub fn to_vectors(&self) -> Vec<BitVector> {
        self.iter().map(|b| b.to_owned()).collect()
    }

    pub(crate) fn raw(&self) -> &[u64] {
        &self.data
    }

    /// Checks the strictly increasing order that `sorted_unique` promises.
    pub fn validate_order(&self) -> bool {
        (1..self.len()).all(|i| self.words_of(i - 1) < self.words_of(i))
    }
}

impl fmt::Debug for VectorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorSet")
            .field("ell", &self.ell)
            .field("n", &self.len())
            .field("sorted_unique", &self.sorted_unique)
            .finish()
    }
}
