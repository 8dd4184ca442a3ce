//! Linear algebra over the two-element field: parity-check matrices, the
//! codes they define, and the linear-algebra model counter.
//!
//! Words are little-endian bitsets: bit `j` of a word is the value of the
//! code variable `x_{j+1}`.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_traits::One;
use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const WORD: usize = 64;

fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

/// A fixed-length bit string.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitWord {
    len: usize,
    words: Vec<u64>,
}

impl BitWord {
    pub fn zeros(len: usize) -> Self {
        BitWord { len, words: vec![0; words_for(len)] }
    }

    /// Builds a word of length `len` from the low bits of `value`.
    pub fn from_u64(len: usize, value: u64) -> Self {
        let mut w = BitWord::zeros(len);
        for j in 0..len.min(WORD) {
            if value >> j & 1 == 1 {
                w.set(j, true);
            }
        }
        w
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut w = BitWord::zeros(bits.len());
        for (j, &b) in bits.iter().enumerate() {
            w.set(j, b);
        }
        w
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, j: usize) -> bool {
        assert!(j < self.len, "bit index {j} out of range for length {}", self.len);
        self.words[j / WORD] >> (j % WORD) & 1 == 1
    }

    pub fn set(&mut self, j: usize, value: bool) {
        assert!(j < self.len, "bit index {j} out of range for length {}", self.len);
        let mask = 1u64 << (j % WORD);
        if value {
            self.words[j / WORD] |= mask;
        } else {
            self.words[j / WORD] &= !mask;
        }
    }

    pub fn xor_assign(&mut self, other: &BitWord) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitWord) -> BitWord {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Parity of the bitwise AND with `other`.
    pub fn dot(&self, other: &BitWord) -> bool {
        assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |j| self.get(j))
    }
}

impl fmt::Display for BitWord {
    /// Prints `x_1 x_2 ... x_n` left to right as `0`/`1` characters.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// A dense `m x n` matrix over the two-element field, stored as row bitsets.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct F2Matrix {
    cols: usize,
    rows: Vec<BitWord>,
}

impl F2Matrix {
    pub fn zeros(num_rows: usize, num_cols: usize) -> Self {
        F2Matrix { cols: num_cols, rows: vec![BitWord::zeros(num_cols); num_rows] }
    }

    pub fn from_rows(num_cols: usize, rows: Vec<BitWord>) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.len() != num_cols) {
            return Err(Error::LengthMismatch { expected: num_cols, found: bad.len() });
        }
        Ok(F2Matrix { cols: num_cols, rows })
    }

    /// Convenience constructor from nested 0/1 slices.
    ///
    /// Panics if the rows are jagged or contain values other than 0 and 1.
    pub fn from_bits<R: AsRef<[u8]>>(num_cols: usize, rows: &[R]) -> Self {
        let rows = rows
            .iter()
            .map(|r| {
                let r = r.as_ref();
                assert_eq!(r.len(), num_cols, "jagged matrix row");
                let bits: Vec<bool> = r
                    .iter()
                    .map(|&v| match v {
                        0 => false,
                        1 => true,
                        _ => panic!("matrix entries must be 0 or 1"),
                    })
                    .collect();
                BitWord::from_bits(&bits)
            })
            .collect();
        F2Matrix { cols: num_cols, rows }
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    /// Entry `a_{i+1, j+1}` (zero-based indices).
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.rows[i].set(j, value);
    }

    pub fn row(&self, i: usize) -> &BitWord {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitWord] {
        &self.rows
    }

    /// Returns a copy with `row` appended.
    pub fn with_row(&self, row: BitWord) -> Result<Self> {
        let mut rows = self.rows.clone();
        rows.push(row);
        F2Matrix::from_rows(self.cols, rows)
    }

    /// `A * word` over the two-element field.
    pub fn mul_word(&self, word: &BitWord) -> Result<BitWord> {
        if word.len() != self.cols {
            return Err(Error::LengthMismatch { expected: self.cols, found: word.len() });
        }
        let bits: Vec<bool> = self.rows.iter().map(|r| r.dot(word)).collect();
        Ok(BitWord::from_bits(&bits))
    }

    /// Parses the text format: a header line `m n` followed by `m` lines of
    /// `n` characters from `{0,1}`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hno, header) = lines.next().ok_or_else(|| Error::parse(1, "missing header"))?;
        let dims: Vec<&str> = header.split_whitespace().collect();
        if dims.len() != 2 {
            return Err(Error::parse(hno + 1, "header must be `m n`"));
        }
        let m: usize = dims[0].parse().map_err(|_| Error::parse(hno + 1, "bad row count"))?;
        let n: usize = dims[1].parse().map_err(|_| Error::parse(hno + 1, "bad column count"))?;
        let mut rows = Vec::with_capacity(m);
        for (lno, line) in lines {
            let line = line.trim();
            if line.len() != n {
                return Err(Error::parse(lno + 1, format!("expected {n} entries, found {}", line.len())));
            }
            let mut bits = Vec::with_capacity(n);
            for ch in line.chars() {
                match ch {
                    '0' => bits.push(false),
                    '1' => bits.push(true),
                    _ => return Err(Error::parse(lno + 1, format!("invalid entry {ch:?}"))),
                }
            }
            rows.push(BitWord::from_bits(&bits));
        }
        if rows.len() != m {
            return Err(Error::parse(hno + 1, format!("header declares {m} rows, found {}", rows.len())));
        }
        Ok(F2Matrix { cols: n, rows })
    }
}

impl fmt::Display for F2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.num_rows(), self.cols)?;
        for r in &self.rows {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

/// Reduced row echelon form; returns the nonzero rows and their pivot columns.
fn row_reduce(matrix: &F2Matrix) -> (Vec<BitWord>, Vec<usize>) {
    let mut rows: Vec<BitWord> = matrix.rows.iter().filter(|r| !r.is_zero()).cloned().collect();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..matrix.cols {
        let Some(p) = (rank..rows.len()).find(|&i| rows[i].get(col)) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (i, r) in rows.iter_mut().enumerate() {
            if i != rank && r.get(col) {
                r.xor_assign(&pivot);
            }
        }
        pivots.push(col);
        rank += 1;
    }
    rows.truncate(rank);
    (rows, pivots)
}

/// Dimension of the row space.
pub fn rank(matrix: &F2Matrix) -> usize {
    row_reduce(matrix).1.len()
}

/// Samples a uniformly random `m x n` matrix.
///
/// The generator is ChaCha8 seeded with `seed_from_u64(seed)`; each row
/// consumes `ceil(n / 64)` successive `next_u64` outputs, least significant
/// word first, with bits beyond column `n` discarded. The result is
/// therefore identical on every platform.
pub fn sample_parity_check(m: usize, n: usize, seed: u64) -> F2Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(m);
    for _ in 0..m {
        let mut row = BitWord::zeros(n);
        for w in 0..row.words.len() {
            let mut v = rng.next_u64();
            let used = n - w * WORD;
            if used < WORD {
                v &= (1u64 << used) - 1;
            }
            row.words[w] = v;
        }
        rows.push(row);
    }
    F2Matrix { cols: n, rows }
}

/// The code `{x : A x = 0}` of a parity-check matrix.
#[derive(Debug, Clone)]
pub struct LinearCode {
    check: F2Matrix,
    rank: OnceLock<usize>,
}

impl PartialEq for LinearCode {
    fn eq(&self, other: &Self) -> bool {
        self.check == other.check
    }
}

impl Eq for LinearCode {}

impl LinearCode {
    pub fn new(check: F2Matrix) -> Self {
        LinearCode { check, rank: OnceLock::new() }
    }

    pub fn check_matrix(&self) -> &F2Matrix {
        &self.check
    }

    /// Block length `n`.
    pub fn len(&self) -> usize {
        self.check.num_cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn rank(&self) -> usize {
        *self.rank.get_or_init(|| rank(&self.check))
    }

    pub fn dimension(&self) -> usize {
        self.len() - self.rank()
    }

    /// A basis of the nullspace, one word per free column.
    pub fn nullspace_basis(&self) -> Vec<BitWord> {
        let n = self.len();
        let (rows, pivots) = row_reduce(&self.check);
        let mut is_pivot = vec![false; n];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        (0..n)
            .filter(|&f| !is_pivot[f])
            .map(|free| {
                let mut v = BitWord::zeros(n);
                v.set(free, true);
                for (r, &p) in rows.iter().zip(&pivots) {
                    if r.get(free) {
                        v.set(p, true);
                    }
                }
                v
            })
            .collect()
    }
}

/// All codewords, provided there are at most `cap` of them.
pub fn enumerate_codewords(code: &LinearCode, cap: u128) -> Result<BTreeSet<BitWord>> {
    let dim = code.dimension();
    let size = if dim >= 128 { u128::MAX } else { 1u128 << dim };
    if size > cap {
        return Err(Error::CapExceeded { size, cap });
    }
    let basis = code.nullspace_basis();
    let mut out = BTreeSet::new();
    // Gray-code walk: each step flips one basis vector in.
    let mut current = BitWord::zeros(code.len());
    out.insert(current.clone());
    for step in 1..size {
        let flip = step.trailing_zeros() as usize;
        current.xor_assign(&basis[flip]);
        out.insert(current.clone());
    }
    Ok(out)
}

pub fn is_codeword(code: &LinearCode, word: &BitWord) -> Result<bool> {
    Ok(code.check.mul_word(word)?.is_zero())
}

/// `2^(n - rank)`, exactly.
pub fn affine_model_count(code: &LinearCode) -> BigUint {
    BigUint::one() << code.dimension()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Rank by brute force: log2 of the number of distinct row combinations.
    fn span_rank(m: &F2Matrix) -> usize {
        let rows = m.num_rows();
        let mut span = BTreeSet::new();
        for mask in 0u64..(1 << rows) {
            let mut acc = BitWord::zeros(m.num_cols());
            for i in 0..rows {
                if mask >> i & 1 == 1 {
                    acc.xor_assign(m.row(i));
                }
            }
            span.insert(acc);
        }
        span.len().trailing_zeros() as usize
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&F2Matrix::from_bits(2, &[[1, 0], [0, 1]])), 2);
        assert_eq!(rank(&F2Matrix::zeros(3, 4)), 0);
        let tri = F2Matrix::from_bits(3, &[[1, 1, 0], [0, 1, 1], [1, 0, 1]]);
        assert_eq!(span_rank(&tri), 2);
        assert_eq!(rank(&tri), 2);
    }

    #[test]
    fn rank_matches_span_oracle_on_random_matrices() {
        for seed in 0..40 {
            let m = sample_parity_check((seed % 5) as usize, 1 + (seed % 7) as usize, seed);
            assert_eq!(rank(&m), span_rank(&m), "seed {seed}");
        }
    }

    #[test]
    fn sampling_is_deterministic_and_seed_sensitive() {
        let a = sample_parity_check(2, 4, 7);
        assert_eq!(a, sample_parity_check(2, 4, 7));
        assert_eq!(sample_parity_check(0, 3, 0).num_rows(), 0);
        let differing = (0..64u64)
            .filter(|&s| sample_parity_check(2, 4, 2 * s) != sample_parity_check(2, 4, 2 * s + 1))
            .count();
        assert!(differing as f64 / 64.0 > 0.9, "only {differing} of 64 pairs differ");
    }

    #[test]
    fn sampled_bits_beyond_width_are_clear() {
        let a = sample_parity_check(3, 70, 11);
        for r in a.rows() {
            assert_eq!(r.words[1] >> 6, 0);
        }
    }

    #[test]
    fn enumerate_examples() {
        let words = |c: &LinearCode| -> Vec<String> {
            enumerate_codewords(c, 1 << 20).unwrap().iter().map(|w| w.to_string()).collect()
        };
        let mut w = words(&LinearCode::new(F2Matrix::from_bits(2, &[[1, 1]])));
        w.sort();
        assert_eq!(w, ["00", "11"]);
        assert_eq!(words(&LinearCode::new(F2Matrix::zeros(0, 2))).len(), 4);
        let mut w = words(&LinearCode::new(F2Matrix::from_bits(3, &[[1, 1, 0], [0, 1, 1]])));
        w.sort();
        assert_eq!(w, ["000", "111"]);
    }

    #[test]
    fn enumerate_respects_cap() {
        let code = LinearCode::new(F2Matrix::zeros(0, 10));
        assert!(matches!(enumerate_codewords(&code, 1000), Err(Error::CapExceeded { size: 1024, .. })));
    }

    #[test]
    fn membership_examples() {
        let c = LinearCode::new(F2Matrix::from_bits(2, &[[1, 1]]));
        assert!(is_codeword(&c, &BitWord::from_bits(&[true, true])).unwrap());
        assert!(!is_codeword(&c, &BitWord::from_bits(&[true, false])).unwrap());
        assert!(matches!(
            is_codeword(&c, &BitWord::zeros(3)),
            Err(Error::LengthMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn membership_agrees_with_enumeration() {
        let code = LinearCode::new(sample_parity_check(3, 6, 1));
        let words = enumerate_codewords(&code, 64).unwrap();
        for v in 0..64u64 {
            let w = BitWord::from_u64(6, v);
            assert_eq!(is_codeword(&code, &w).unwrap(), words.contains(&w));
        }
    }

    #[test]
    fn affine_count_examples() {
        let c = |m: F2Matrix| affine_model_count(&LinearCode::new(m));
        assert_eq!(c(F2Matrix::from_bits(2, &[[1, 1]])), BigUint::from(2u32));
        assert_eq!(c(F2Matrix::zeros(0, 5)), BigUint::from(32u32));
        assert_eq!(c(F2Matrix::from_bits(3, &[[1, 1, 0], [0, 1, 1], [1, 0, 1]])), BigUint::from(2u32));
    }

    #[test]
    fn text_format_round_trip() {
        let a = sample_parity_check(3, 9, 4);
        assert_eq!(F2Matrix::parse(&a.to_string()).unwrap(), a);
        let empty = F2Matrix::zeros(0, 3);
        assert_eq!(empty.to_string(), "0 3\n");
        assert_eq!(F2Matrix::parse("0 3\n").unwrap(), empty);
        assert!(matches!(F2Matrix::parse("1 2\n12\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(F2Matrix::parse("2 2\n11\n"), Err(Error::Parse { .. })));
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn matrix() -> impl Strategy<Value = F2Matrix> {
        (0usize..6, 1usize..=12, any::<u64>()).prop_map(|(m, n, s)| sample_parity_check(m, n, s))
    }

    proptest! {
        #[test]
        fn enumeration_size_equals_affine_count(a in matrix()) {
            let code = LinearCode::new(a);
            let words = enumerate_codewords(&code, 1 << 12).unwrap();
            prop_assert_eq!(BigUint::from(words.len()), affine_model_count(&code));
        }

        #[test]
        fn rank_bounds_and_duplicate_rows(a in matrix(), pick in any::<prop::sample::Index>()) {
            let r = rank(&a);
            prop_assert!(r <= a.num_rows().min(a.num_cols()));
            if a.num_rows() > 0 {
                let dup = a.row(pick.index(a.num_rows())).clone();
                prop_assert_eq!(rank(&a.with_row(dup).unwrap()), r);
            }
        }

        #[test]
        fn codewords_closed_under_addition(a in matrix(), i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>()) {
            let code = LinearCode::new(a);
            let words: Vec<_> = enumerate_codewords(&code, 1 << 12).unwrap().into_iter().collect();
            let u = &words[i.index(words.len())];
            let v = &words[j.index(words.len())];
            prop_assert!(is_codeword(&code, &u.xor(v)).unwrap());
        }
    }
}
