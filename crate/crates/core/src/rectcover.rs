//! Balanced partitions, combinatorial rectangles and multi-partition
//! rectangle covers of small Boolean functions.
//!
//! Assignments are indexed by masks: bit `p` of the index is the value of the
//! `p`-th variable in the owning variable list.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::f2code::{is_codeword, BitWord, LinearCode};
use crate::par::Exec;

pub const MAX_TABLE_VARS: usize = 12;
pub const MAX_COVER_SEARCH_VARS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TruthTable {
    vars: Vec<String>,
    bits: Vec<bool>,
}

impl TruthTable {
    pub fn new(vars: Vec<String>, bits: Vec<bool>) -> Result<Self> {
        if vars.len() > MAX_TABLE_VARS {
            return Err(Error::TooLarge { what: "truth table", size: vars.len(), limit: MAX_TABLE_VARS });
        }
        if bits.len() != 1 << vars.len() {
            return Err(Error::LengthMismatch { expected: 1 << vars.len(), found: bits.len() });
        }
        if vars.iter().collect::<BTreeSet<_>>().len() != vars.len() {
            return Err(Error::ParameterMismatch("repeated variable in truth table".into()));
        }
        Ok(TruthTable { vars, bits })
    }

    pub fn from_fn(vars: &[&str], f: impl Fn(u32) -> bool) -> Result<Self> {
        let bits = (0..1u32 << vars.len()).map(f).collect();
        TruthTable::new(vars.iter().map(|s| s.to_string()).collect(), bits)
    }

    /// Characteristic function of a code on `x1..xn`.
    pub fn characteristic(code: &LinearCode) -> Result<Self> {
        let n = code.len();
        if n > MAX_TABLE_VARS {
            return Err(Error::TooLarge { what: "truth table", size: n, limit: MAX_TABLE_VARS });
        }
        let names: Vec<String> = (1..=n).map(|j| format!("x{j}")).collect();
        let bits = (0..1u64 << n)
            .map(|mask| is_codeword(code, &BitWord::from_u64(n, mask)))
            .collect::<Result<Vec<_>>>()?;
        TruthTable::new(names, bits)
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, mask: u32) -> bool {
        self.bits[mask as usize]
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Hex digits, least significant entry in the lowest bit of the last digit.
    pub fn to_hex(&self) -> String {
        bits_to_hex(&self.bits)
    }

    pub fn from_hex(vars: Vec<String>, hex: &str) -> Result<Self> {
        let bits = hex_to_bits(hex, 1 << vars.len())?;
        TruthTable::new(vars, bits)
    }

    /// `table <vars…>` header followed by the hex line.
    pub fn to_text(&self) -> String {
        format!("table {}\n{}\n", self.vars.join(" "), self.to_hex())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::parse(1, "missing table header"))?;
        let mut h = header.split_whitespace();
        if h.next() != Some("table") {
            return Err(Error::parse(1, "expected `table <vars…>`"));
        }
        let vars = h.map(str::to_string).collect();
        let hex = lines.next().ok_or_else(|| Error::parse(2, "missing hex line"))?;
        TruthTable::from_hex(vars, hex)
    }
}

fn bits_to_hex(bits: &[bool]) -> String {
    let digits = bits.len().div_ceil(4).max(1);
    (0..digits)
        .rev()
        .map(|d| {
            let v = (0..4).filter(|t| bits.get(4 * d + t).copied().unwrap_or(false)).fold(0, |acc, t| acc | 1 << t);
            char::from_digit(v, 16).unwrap()
        })
        .collect()
}

fn hex_to_bits(hex: &str, len: usize) -> Result<Vec<bool>> {
    let digits: Vec<u32> = hex
        .trim()
        .chars()
        .map(|c| c.to_digit(16).ok_or_else(|| Error::parse(0, format!("bad hex digit `{c}`"))))
        .collect::<Result<_>>()?;
    let expected = len.div_ceil(4).max(1);
    if digits.len() != expected {
        return Err(Error::LengthMismatch { expected, found: digits.len() });
    }
    let bits: Vec<bool> = (0..4 * expected).map(|i| digits[expected - 1 - i / 4] >> (i % 4) & 1 == 1).collect();
    if bits[len..].iter().any(|&b| b) {
        return Err(Error::parse(0, "hex string has bits beyond the table"));
    }
    Ok(bits[..len].to_vec())
}

/// A rational `num/den` balance parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fraction {
    pub num: u32,
    pub den: u32,
}

impl Fraction {
    pub const ONE_THIRD: Fraction = Fraction { num: 1, den: 3 };
    pub const ONE_HALF: Fraction = Fraction { num: 1, den: 2 };

    pub fn new(num: u32, den: u32) -> Result<Self> {
        if den == 0 || num > den {
            return Err(Error::ParameterMismatch(format!("balance {num}/{den} outside [0, 1]")));
        }
        Ok(Fraction { num, den })
    }
}

impl Default for Fraction {
    fn default() -> Self {
        Fraction::ONE_THIRD
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Fraction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::ParameterMismatch(format!("bad fraction `{s}`"));
        let (n, d) = s.split_once('/').unwrap_or((s, "1"));
        Fraction::new(n.trim().parse().map_err(|_| bad())?, d.trim().parse().map_err(|_| bad())?)
    }
}

/// A split of variable positions `0..n` into two sides.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    left: Vec<usize>,
    right: Vec<usize>,
}

impl Partition {
    pub fn new(mut left: Vec<usize>, mut right: Vec<usize>, n: usize) -> Result<Self> {
        left.sort_unstable();
        right.sort_unstable();
        let all: BTreeSet<usize> = left.iter().chain(&right).copied().collect();
        if all.len() != left.len() + right.len() || all != (0..n).collect() {
            return Err(Error::ParameterMismatch(format!("sides do not partition {n} variables")));
        }
        Ok(Partition { left, right })
    }

    /// The partition whose left side is the set bits of `mask`.
    pub fn from_mask(mask: u32, n: usize) -> Self {
        let (left, right) = (0..n).partition(|&p| mask >> p & 1 == 1);
        Partition { left, right }
    }

    pub fn left(&self) -> &[usize] {
        &self.left
    }

    pub fn right(&self) -> &[usize] {
        &self.right
    }

    pub fn num_vars(&self) -> usize {
        self.left.len() + self.right.len()
    }

    /// `min(|X1|, |X2|) ≥ β·|X|`, compared exactly in integers.
    pub fn is_balanced(&self, beta: Fraction) -> bool {
        self.left.len().min(self.right.len()) as u64 * beta.den as u64 >= beta.num as u64 * self.num_vars() as u64
    }

    /// Splits a full assignment into its side-local indices.
    pub fn split(&self, mask: u32) -> (u32, u32) {
        (gather(mask, &self.left), gather(mask, &self.right))
    }

    fn join(&self, a: u32, b: u32) -> u32 {
        scatter(a, &self.left) | scatter(b, &self.right)
    }
}

fn gather(mask: u32, positions: &[usize]) -> u32 {
    positions.iter().enumerate().fold(0, |acc, (i, &p)| acc | (mask >> p & 1) << i)
}

fn scatter(local: u32, positions: &[usize]) -> u32 {
    positions.iter().enumerate().fold(0, |acc, (i, &p)| acc | (local >> i & 1) << p)
}

/// `r¹ ∧ r²` where `r¹` is a table over the left side and `r²` over the right.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rectangle {
    pub partition: Partition,
    pub left: Vec<bool>,
    pub right: Vec<bool>,
}

impl Rectangle {
    pub fn eval(&self, mask: u32) -> bool {
        let (a, b) = self.partition.split(mask);
        self.left[a as usize] && self.right[b as usize]
    }

    fn well_formed(&self) -> bool {
        self.left.len() == 1 << self.partition.left.len() && self.right.len() == 1 << self.partition.right.len()
    }
}

/// Whether the 1-set of `f`, as a matrix over the two sides, is a product
/// of a row set and a column set.
pub fn is_rectangle(f: &TruthTable, partition: &Partition) -> bool {
    let (rows, cols) = (1u32 << partition.left.len(), 1u32 << partition.right.len());
    let mut row_set = vec![false; rows as usize];
    let mut col_set = vec![false; cols as usize];
    for mask in 0..f.bits.len() as u32 {
        if f.get(mask) {
            let (a, b) = partition.split(mask);
            row_set[a as usize] = true;
            col_set[b as usize] = true;
        }
    }
    (0..rows).all(|a| !row_set[a as usize] || (0..cols).all(|b| !col_set[b as usize] || f.get(partition.join(a, b))))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoverViolation {
    /// Rectangle `index` has a partition not over `f`'s variables or
    /// side tables of the wrong length.
    Malformed { index: usize },
    Unbalanced { index: usize },
    Uncovered { assignment: u32 },
    CoversZero { index: usize, assignment: u32 },
}

impl fmt::Display for CoverViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoverViolation::Malformed { index } => write!(f, "rectangle {index} is malformed"),
            CoverViolation::Unbalanced { index } => write!(f, "rectangle {index} has an unbalanced partition"),
            CoverViolation::Uncovered { assignment } => write!(f, "assignment {assignment:#x} is not covered"),
            CoverViolation::CoversZero { index, assignment } => {
                write!(f, "rectangle {index} covers non-model {assignment:#x}")
            }
        }
    }
}

pub fn verify_cover(f: &TruthTable, cover: &[Rectangle], beta: Fraction) -> std::result::Result<(), CoverViolation> {
    for (index, r) in cover.iter().enumerate() {
        if r.partition.num_vars() != f.num_vars() || !r.well_formed() {
            return Err(CoverViolation::Malformed { index });
        }
        if !r.partition.is_balanced(beta) {
            return Err(CoverViolation::Unbalanced { index });
        }
    }
    for assignment in 0..f.bits.len() as u32 {
        let hit = cover.iter().position(|r| r.eval(assignment));
        match (f.get(assignment), hit) {
            (true, None) => return Err(CoverViolation::Uncovered { assignment }),
            (false, Some(index)) => return Err(CoverViolation::CoversZero { index, assignment }),
            _ => {}
        }
    }
    Ok(())
}

/// Cover text: `cover <t>` then per rectangle a `rect <left vars> | <right
/// vars>` line followed by the two side tables in hex.
pub fn write_cover(f: &TruthTable, cover: &[Rectangle]) -> String {
    let names = |ps: &[usize]| ps.iter().map(|&p| f.vars[p].as_str()).collect::<Vec<_>>().join(" ");
    let mut out = format!("cover {}\n", cover.len());
    for r in cover {
        writeln!(out, "rect {} | {}", names(&r.partition.left), names(&r.partition.right)).unwrap();
        writeln!(out, "{}\n{}", bits_to_hex(&r.left), bits_to_hex(&r.right)).unwrap();
    }
    out
}

pub fn parse_cover(f: &TruthTable, text: &str) -> Result<Vec<Rectangle>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let (hl, header) = lines.next().ok_or_else(|| Error::parse(1, "missing cover header"))?;
    let t: usize = header
        .strip_prefix("cover ")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::parse(hl, "expected `cover <t>`"))?;
    let pos = |name: &str, line| {
        f.vars.iter().position(|v| v == name).ok_or_else(|| Error::parse(line, format!("unknown variable `{name}`")))
    };
    let mut cover = Vec::with_capacity(t);
    for _ in 0..t {
        let (line, rect) = lines.next().ok_or_else(|| Error::parse(hl, "missing rectangle"))?;
        let body = rect.strip_prefix("rect").ok_or_else(|| Error::parse(line, "expected `rect`"))?;
        let (l, r) = body.split_once('|').ok_or_else(|| Error::parse(line, "missing `|`"))?;
        let left = l.split_whitespace().map(|s| pos(s, line)).collect::<Result<Vec<_>>>()?;
        let right = r.split_whitespace().map(|s| pos(s, line)).collect::<Result<Vec<_>>>()?;
        let partition = Partition { left, right };
        let all: BTreeSet<usize> = partition.left.iter().chain(&partition.right).copied().collect();
        if all.len() != f.num_vars() || partition.num_vars() != f.num_vars() {
            return Err(Error::parse(line, "sides do not partition the table's variables"));
        }
        let mut side = |n: usize| -> Result<Vec<bool>> {
            let (l, hex) = lines.next().ok_or_else(|| Error::parse(line, "missing side table"))?;
            hex_to_bits(hex, 1 << n).map_err(|e| Error::parse(l, e.to_string()))
        };
        let (lt, rt) = (side(partition.left.len())?, side(partition.right.len())?);
        cover.push(Rectangle { partition, left: lt, right: rt });
    }
    Ok(cover)
}

/// A set of 1-points of `f`, one bit per assignment.
type PointSet = Vec<u64>;

fn maximal_rectangles(f: &TruthTable, partition: &Partition) -> Vec<(Rectangle, PointSet)> {
    let (rows, cols) = (1usize << partition.left.len(), 1usize << partition.right.len());
    // column 1-sets per row, as bitmasks over at most 2^7 columns
    let row_sets: Vec<u128> = (0..rows as u32)
        .map(|a| (0..cols as u32).filter(|&b| f.get(partition.join(a, b))).fold(0u128, |acc, b| acc | 1 << b))
        .collect();
    let mut closed: BTreeSet<u128> = BTreeSet::new();
    let mut frontier: Vec<u128> = row_sets.iter().copied().filter(|&s| s != 0).collect();
    while let Some(s) = frontier.pop() {
        if closed.insert(s) {
            frontier.extend(row_sets.iter().map(|&r| r & s).filter(|&x| x != 0 && !closed.contains(&x)));
        }
    }
    let words = f.bits.len().div_ceil(64);
    closed
        .into_iter()
        .map(|cset| {
            let left: Vec<bool> = row_sets.iter().map(|&r| r & cset == cset).collect();
            let right: Vec<bool> = (0..cols).map(|b| cset >> b & 1 == 1).collect();
            let mut points = vec![0u64; words];
            for (a, _) in left.iter().enumerate().filter(|(_, &in_r)| in_r) {
                for b in (0..cols).filter(|&b| right[b]) {
                    let m = partition.join(a as u32, b as u32) as usize;
                    points[m / 64] |= 1 << (m % 64);
                }
            }
            (Rectangle { partition: partition.clone(), left, right }, points)
        })
        .collect()
}

/// β-balanced partitions of `n` variables, each unordered pair once.
pub fn balanced_partitions(n: usize, beta: Fraction) -> Vec<Partition> {
    (0..1u32 << n)
        .filter(|&mask| n == 0 || mask & 1 == 1)
        .map(|mask| Partition::from_mask(mask, n))
        .filter(|p| p.is_balanced(beta))
        .collect()
}

/// The smallest cover of `f` by rectangles over β-balanced partitions, with
/// a witness; `cap` bounds the number of set-cover search nodes.
pub fn min_cover_bruteforce(f: &TruthTable, beta: Fraction, cap: u64) -> Result<usize> {
    min_cover_with(f, beta, cap, Exec::default()).map(|c| c.len())
}

pub fn min_cover_with(f: &TruthTable, beta: Fraction, cap: u64, exec: Exec) -> Result<Vec<Rectangle>> {
    if f.num_vars() > MAX_COVER_SEARCH_VARS {
        return Err(Error::TooLarge { what: "cover search", size: f.num_vars(), limit: MAX_COVER_SEARCH_VARS });
    }
    let ones: Vec<usize> = (0..f.bits.len()).filter(|&m| f.bits[m]).collect();
    if ones.is_empty() {
        return Ok(Vec::new());
    }
    let parts = balanced_partitions(f.num_vars(), beta);
    let mut rects: Vec<(Rectangle, PointSet)> =
        exec.map(&parts, |p| maximal_rectangles(f, p)).into_iter().flatten().collect();
    // keep one rectangle per point set, and drop those strictly contained in another
    rects.sort_by(|a, b| a.1.cmp(&b.1));
    rects.dedup_by(|a, b| a.1 == b.1);
    let subset = |a: &PointSet, b: &PointSet| a.iter().zip(b).all(|(x, y)| x & !y == 0);
    let keep: Vec<bool> =
        (0..rects.len()).map(|i| !(0..rects.len()).any(|j| j != i && subset(&rects[i].1, &rects[j].1))).collect();
    let rects: Vec<(Rectangle, PointSet)> = rects.into_iter().zip(keep).filter(|(_, k)| *k).map(|(r, _)| r).collect();
    if rects.is_empty() {
        return Err(Error::ParameterMismatch("no balanced partition for this β".into()));
    }

    let covering: Vec<Vec<usize>> = (0..f.bits.len())
        .map(|m| (0..rects.len()).filter(|&r| rects[r].1[m / 64] >> (m % 64) & 1 == 1).collect())
        .collect();
    let mut search = CoverSearch { rects: &rects, covering: &covering, ones: &ones, best: None, nodes: 0, cap };
    let mut covered = vec![0u64; f.bits.len().div_ceil(64)];
    search.run(&mut covered, &mut Vec::new())?;
    let best = search.best.expect("maximal rectangles cover every 1-point");
    Ok(best.into_iter().map(|r| rects[r].0.clone()).collect())
}

struct CoverSearch<'a> {
    rects: &'a [(Rectangle, PointSet)],
    covering: &'a [Vec<usize>],
    ones: &'a [usize],
    best: Option<Vec<usize>>,
    nodes: u64,
    cap: u64,
}

impl CoverSearch<'_> {
    fn run(&mut self, covered: &mut PointSet, chosen: &mut Vec<usize>) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.cap {
            return Err(Error::CapExceeded { size: self.nodes as u128, cap: self.cap as u128 });
        }
        let is_covered = |c: &PointSet, m: usize| c[m / 64] >> (m % 64) & 1 == 1;
        let uncovered: Vec<usize> = self.ones.iter().copied().filter(|&m| !is_covered(covered, m)).collect();
        let Some(&pivot) = uncovered.iter().min_by_key(|&&m| self.covering[m].len()) else {
            if self.best.as_ref().is_none_or(|b| chosen.len() < b.len()) {
                self.best = Some(chosen.clone());
            }
            return Ok(());
        };
        // lower bound: each further rectangle covers at most the largest remaining
        let widest = self.rects.iter().map(|(_, p)| p.iter().map(|w| w.count_ones() as usize).sum::<usize>()).max();
        let lower = chosen.len() + uncovered.len().div_ceil(widest.unwrap_or(1).max(1));
        if self.best.as_ref().is_some_and(|b| lower >= b.len()) {
            return Ok(());
        }
        for &r in &self.covering[pivot] {
            let saved = covered.clone();
            for (c, p) in covered.iter_mut().zip(&self.rects[r].1) {
                *c |= p;
            }
            chosen.push(r);
            self.run(covered, chosen)?;
            chosen.pop();
            *covered = saved;
        }
        Ok(())
    }
}
