//! Fast evaluation of the integer kernel through the sparse factorization
//! `T = P2·M4·M3·M2·P1·M1`, exact operation counting, and separable 2-D
//! application of orthonormal transforms.

use std::cell::Cell;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::kernels::{build_t, IntKernel16, OrthonormalTransform};
use crate::matrix::SquareMatrix;
use crate::scalar::{Real, Sample};
use crate::{Block, N};

/// Row permutation performed by `P2`: output `i` takes input `P2_SOURCE[i]`.
///
/// Recovered by matching the rows of `M4·M3·M2·P1·M1` against `T`; in cycle
/// notation it is `(0)(1 8)(2 4 3 11 10 7 12)(5 9 13 14 6)(15)`.
pub const P2_SOURCE: [usize; N] = [0, 8, 4, 11, 3, 9, 5, 12, 1, 13, 7, 10, 2, 14, 6, 15];

/// Output `9 + i` of `P1` takes input `9 + P1_TAIL_SOURCE[i]`; the first
/// nine lines pass through.
const P1_TAIL_SOURCE: [usize; 7] = [2, 3, 6, 5, 4, 1, 0];

#[rustfmt::skip]
const M3_BLOCKS: [[[i32; 4]; 4]; 4] = [
    [[ 1,  0,  0,  1], [ 0,  1,  1,  0], [ 0, -1,  1,  0], [ 1,  0,  0, -1]],
    [[ 0,  1,  1,  1], [-1, -1,  0,  1], [-1,  1, -1,  0], [ 1,  0, -1,  1]],
    [[ 1,  0,  0,  1], [ 0,  1,  1,  0], [ 0, -1,  1,  0], [-1,  0,  0,  1]],
    [[ 0,  1,  1,  1], [ 1,  1,  0, -1], [ 1, -1,  1,  0], [ 1,  0, -1,  1]],
];

/// One term of a butterfly output: input index and sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Term {
    input: usize,
    negative: bool,
}

/// One factor of the fast algorithm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SparseStage {
    /// Block-diagonal matrix with entries in `{0, ±1}`.
    BlockDiagonal { blocks: Vec<SquareMatrix<i32>> },
    /// Output `i` is input `source[i]`.
    Permutation { source: [usize; N] },
}

impl SparseStage {
    pub fn block_diagonal(blocks: Vec<SquareMatrix<i32>>) -> Result<Self> {
        let size: usize = blocks.iter().map(|b| b.order()).sum();
        if size != N {
            return Err(Error::Factorization(format!(
                "blocks cover {size} lines, expected {N}"
            )));
        }
        if blocks
            .iter()
            .any(|b| b.as_slice().iter().any(|v| v.abs() > 1))
        {
            return Err(Error::Factorization(
                "butterfly entries must lie in {0, ±1}".into(),
            ));
        }
        if blocks
            .iter()
            .any(|b| b.rows().any(|r| r.iter().all(|&v| v == 0)))
        {
            return Err(Error::Factorization(
                "butterfly block has an empty row".into(),
            ));
        }
        Ok(SparseStage::BlockDiagonal { blocks })
    }

    pub fn permutation(source: [usize; N]) -> Result<Self> {
        let mut seen = [false; N];
        for &s in &source {
            if s >= N || std::mem::replace(&mut seen[s], true) {
                return Err(Error::Factorization(format!(
                    "{source:?} is not a permutation of 0..{N}"
                )));
            }
        }
        Ok(SparseStage::Permutation { source })
    }

    /// Dense 16×16 equivalent.
    pub fn to_dense(&self) -> SquareMatrix<i64> {
        let mut m = SquareMatrix::zeros(N);
        match self {
            SparseStage::BlockDiagonal { blocks } => {
                let mut offset = 0;
                for b in blocks {
                    for i in 0..b.order() {
                        for j in 0..b.order() {
                            m[(offset + i, offset + j)] = b[(i, j)] as i64;
                        }
                    }
                    offset += b.order();
                }
            }
            SparseStage::Permutation { source } => {
                for (i, &s) in source.iter().enumerate() {
                    m[(i, s)] = 1;
                }
            }
        }
        m
    }

    fn programs(&self) -> Vec<Vec<Term>> {
        match self {
            SparseStage::BlockDiagonal { blocks } => {
                let mut rows = Vec::with_capacity(N);
                let mut offset = 0;
                for b in blocks {
                    for r in b.rows() {
                        let mut terms: Vec<Term> = r
                            .iter()
                            .enumerate()
                            .filter(|(_, &v)| v != 0)
                            .map(|(j, &v)| Term {
                                input: offset + j,
                                negative: v < 0,
                            })
                            .collect();
                        // lead with a positive term so no negation is needed
                        if let Some(p) = terms.iter().position(|t| !t.negative) {
                            terms.swap(0, p);
                        }
                        rows.push(terms);
                    }
                    offset += b.order();
                }
                rows
            }
            SparseStage::Permutation { source } => source
                .iter()
                .map(|&s| {
                    vec![Term {
                        input: s,
                        negative: false,
                    }]
                })
                .collect(),
        }
    }
}

/// A stage with its row programs precompiled.
#[derive(Clone, Debug)]
struct CompiledStage {
    label: String,
    stage: SparseStage,
    rows: Vec<Vec<Term>>,
}

impl CompiledStage {
    fn new(label: impl Into<String>, stage: SparseStage) -> Self {
        let rows = stage.programs();
        CompiledStage {
            label: label.into(),
            stage,
            rows,
        }
    }

    #[inline]
    fn apply<S: Sample>(&self, x: &[S; N]) -> [S; N] {
        std::array::from_fn(|i| {
            let terms = &self.rows[i];
            let first = x[terms[0].input];
            let mut acc = if terms[0].negative { -first } else { first };
            for t in &terms[1..] {
                acc = if t.negative {
                    acc - x[t.input]
                } else {
                    acc + x[t.input]
                };
            }
            acc
        })
    }
}

/// Ordered sparse stages, applied to the input first to last.
#[derive(Clone, Debug)]
pub struct FactorizationPlan {
    stages: Vec<CompiledStage>,
}

impl FactorizationPlan {
    pub fn new(stages: Vec<(String, SparseStage)>) -> Self {
        FactorizationPlan {
            stages: stages
                .into_iter()
                .map(|(l, s)| CompiledStage::new(l, s))
                .collect(),
        }
    }

    pub fn stages(&self) -> impl Iterator<Item = (&str, &SparseStage)> {
        self.stages.iter().map(|s| (s.label.as_str(), &s.stage))
    }

    pub fn stage(&self, label: &str) -> Option<&SparseStage> {
        self.stages
            .iter()
            .find(|s| s.label == label)
            .map(|s| &s.stage)
    }

    pub fn forward<S: Sample>(&self, x: [S; N]) -> [S; N] {
        self.stages.iter().fold(x, |acc, s| s.apply(&acc))
    }

    /// Dense product of all stages, last stage leftmost.
    pub fn compose(&self) -> SquareMatrix<i64> {
        self.stages
            .iter()
            .fold(SquareMatrix::identity(N), |acc, s| {
                s.stage.to_dense().matmul(&acc)
            })
    }
}

fn butterfly(half: usize) -> SquareMatrix<i32> {
    let n = 2 * half;
    SquareMatrix::from_fn(n, |i, j| match (i < half, j < half) {
        (true, true) => (i == j) as i32,
        (true, false) => (j == n - 1 - i) as i32,
        (false, true) => (j == n - 1 - i) as i32,
        (false, false) => -((i == j) as i32),
    })
}

fn plan_without_p2() -> Vec<(String, SparseStage)> {
    let mut p1 = [0usize; N];
    for (i, slot) in p1.iter_mut().enumerate() {
        *slot = if i < 9 { i } else { 9 + P1_TAIL_SOURCE[i - 9] };
    }
    let h2 = SquareMatrix::from_rows(&[[1, 1], [1, -1]]);
    let i6 = SquareMatrix::identity(6);
    vec![
        (
            "M1".into(),
            SparseStage::block_diagonal(vec![butterfly(8)]).unwrap(),
        ),
        ("P1".into(), SparseStage::permutation(p1).unwrap()),
        (
            "M2".into(),
            SparseStage::block_diagonal(vec![butterfly(4), butterfly(4)]).unwrap(),
        ),
        (
            "M3".into(),
            SparseStage::block_diagonal(M3_BLOCKS.iter().map(SquareMatrix::from_rows).collect())
                .unwrap(),
        ),
        (
            "M4".into(),
            SparseStage::block_diagonal(vec![h2.clone(), i6.clone(), h2, i6]).unwrap(),
        ),
    ]
}

/// Finds the row permutation `σ` with `target[i] = partial[σ(i)]`.
pub fn derive_p2(partial: &SquareMatrix<i64>, target: &IntKernel16) -> Result<SparseStage> {
    let mut source = [0usize; N];
    for (i, slot) in source.iter_mut().enumerate() {
        let wanted: Vec<i64> = target.entries()[i].iter().map(|&v| v as i64).collect();
        let matches: Vec<usize> = (0..N)
            .filter(|&k| partial.row(k) == wanted.as_slice())
            .collect();
        match matches.as_slice() {
            [k] => *slot = *k,
            [] => {
                return Err(Error::Factorization(format!(
                    "no partial-product row matches row {i} of T"
                )))
            }
            _ => {
                return Err(Error::Factorization(format!(
                    "row {i} of T matches partial-product rows {matches:?}"
                )))
            }
        }
    }
    SparseStage::permutation(source)
}

/// The factorization `(M1, P1, M2, M3, M4, P2)` of the proposed kernel.
pub fn build_plan() -> FactorizationPlan {
    let mut stages = plan_without_p2();
    let partial = FactorizationPlan::new(stages.clone()).compose();
    let p2 = derive_p2(&partial, &build_t()).expect("proposed factorization is consistent");
    stages.push(("P2".into(), p2));
    FactorizationPlan::new(stages)
}

fn proposed_plan() -> &'static FactorizationPlan {
    static PLAN: OnceLock<FactorizationPlan> = OnceLock::new();
    PLAN.get_or_init(build_plan)
}

/// `T·x` with 60 additions. Inputs must satisfy `|xᵢ| ≤ 2²⁴`.
pub fn forward_fast(x: &[i32; N]) -> [i32; N] {
    proposed_plan().forward(*x)
}

/// `T·A·Tᵀ` through the fast algorithm, rows then columns.
pub fn forward_fast_2d(block: &Block<i32>) -> Block<i32> {
    let plan = proposed_plan();
    let pass = |src: &Block<i32>| {
        let mut dst = [[0i32; N]; N];
        for (r, row) in src.iter().enumerate() {
            let y = plan.forward(*row);
            for (c, v) in y.into_iter().enumerate() {
                dst[c][r] = v;
            }
        }
        dst
    };
    pass(&pass(block))
}

/// Operation tallies. Subtractions count as additions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCount {
    pub multiplications: u64,
    pub additions: u64,
    pub bit_shifts: u64,
}

impl OpCount {
    pub fn total(&self) -> u64 {
        self.multiplications + self.additions + self.bit_shifts
    }
}

impl Add for OpCount {
    type Output = OpCount;

    fn add(self, rhs: OpCount) -> OpCount {
        OpCount {
            multiplications: self.multiplications + rhs.multiplications,
            additions: self.additions + rhs.additions,
            bit_shifts: self.bit_shifts + rhs.bit_shifts,
        }
    }
}

impl fmt::Display for OpCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "multiplications: {}, additions: {}, bit-shifts: {}",
            self.multiplications, self.additions, self.bit_shifts
        )
    }
}

/// Tally shared by the [`Tracked`] values of one evaluation.
#[derive(Debug, Default)]
pub struct OpCounter {
    multiplications: Cell<u64>,
    additions: Cell<u64>,
    bit_shifts: Cell<u64>,
}

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn input(&self) -> Tracked<'_> {
        Tracked { counter: self }
    }

    pub fn snapshot(&self) -> OpCount {
        OpCount {
            multiplications: self.multiplications.get(),
            additions: self.additions.get(),
            bit_shifts: self.bit_shifts.get(),
        }
    }

    fn bump(cell: &Cell<u64>) {
        cell.set(cell.get() + 1);
    }
}

/// Opaque symbolic scalar: carries no value, only records the arithmetic
/// performed on it. Negation is free.
#[derive(Clone, Copy)]
pub struct Tracked<'a> {
    counter: &'a OpCounter,
}

impl<'a> Tracked<'a> {
    fn join(self, rhs: Self) -> &'a OpCounter {
        debug_assert!(std::ptr::eq(self.counter, rhs.counter), "mixed op counters");
        self.counter
    }
}

impl fmt::Debug for Tracked<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Tracked")
    }
}

impl Add for Tracked<'_> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        OpCounter::bump(&self.join(rhs).additions);
        self
    }
}

impl Sub for Tracked<'_> {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        OpCounter::bump(&self.join(rhs).additions);
        self
    }
}

impl Mul for Tracked<'_> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        OpCounter::bump(&self.join(rhs).multiplications);
        self
    }
}

impl Neg for Tracked<'_> {
    type Output = Self;

    fn neg(self) -> Self {
        self
    }
}

impl Sample for Tracked<'_> {
    fn double(self) -> Self {
        OpCounter::bump(&self.counter.bit_shifts);
        self
    }
}

/// Runs `plan` on tracked inputs and returns what it did.
pub fn count_ops(plan: &FactorizationPlan) -> OpCount {
    let counter = OpCounter::new();
    let x = [counter.input(); N];
    let _ = plan.forward(x);
    counter.snapshot()
}

/// Per-stage counts, in application order.
pub fn count_ops_by_stage(plan: &FactorizationPlan) -> Vec<(String, OpCount)> {
    plan.stages
        .iter()
        .map(|s| {
            let counter = OpCounter::new();
            let _ = s.apply(&[counter.input(); N]);
            (s.label.clone(), counter.snapshot())
        })
        .collect()
}

/// Cost of evaluating `K·x` as dense signed sums: `±1` entries are
/// additions, `±2` entries also need a shift.
pub fn count_dense_ops(kernel: &IntKernel16) -> OpCount {
    let counter = OpCounter::new();
    let x = counter.input();
    for row in kernel.entries() {
        let mut acc: Option<Tracked<'_>> = None;
        for &k in row.iter().filter(|&&k| k != 0) {
            let term = if k.abs() == 2 { x.double() } else { x };
            acc = Some(match acc {
                None => term,
                Some(a) if k < 0 => a - term,
                Some(a) => a + term,
            });
        }
    }
    counter.snapshot()
}

fn check_order<T: Real>(transform: &OrthonormalTransform<T>) {
    assert_eq!(
        transform.order(),
        N,
        "2-D block transforms need a {N}-point transform, `{}` has {}",
        transform.name(),
        transform.order()
    );
}

/// Multiplies every row of `src` by `m` (or `mᵀ`) and stores it as a
/// column of the result.
fn row_pass_transposed<T: Real>(
    src: &Block<T>,
    m: &SquareMatrix<T>,
    transpose_m: bool,
) -> Block<T> {
    let mut dst = [[T::zero(); N]; N];
    for (r, row) in src.iter().enumerate() {
        for k in 0..N {
            let mut acc = T::zero();
            for (j, &x) in row.iter().enumerate() {
                let c = if transpose_m { m[(j, k)] } else { m[(k, j)] };
                acc += c * x;
            }
            dst[k][r] = acc;
        }
    }
    dst
}

/// `C·A·Cᵀ` as row pass, transpose, row pass.
pub fn apply_2d<T: Real>(block: &Block<T>, transform: &OrthonormalTransform<T>) -> Block<T> {
    check_order(transform);
    let m = transform.matrix();
    row_pass_transposed(&row_pass_transposed(block, m, false), m, false)
}

/// `Cᵀ·B·C`.
pub fn inverse_2d<T: Real>(block: &Block<T>, transform: &OrthonormalTransform<T>) -> Block<T> {
    check_order(transform);
    let m = transform.matrix();
    row_pass_transposed(&row_pass_transposed(block, m, true), m, true)
}
