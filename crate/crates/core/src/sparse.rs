//! Compressed-row sparse matrices and a direct LU solver.

use std::fmt::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Once;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::linalg::LuError;
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{Mat, Par};

use crate::error::{Error, Result};

/// CSR matrix with sorted, unique column indices in each row.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        if let Some(&(r, c, _)) = triplets
            .iter()
            .find(|(r, c, _)| *r >= n_rows || *c >= n_cols)
        {
            return Err(Error::InvalidArgument(format!(
                "triplet ({r}, {c}) outside a {n_rows}x{n_cols} matrix"
            )));
        }
        let mut counts = vec![0usize; n_rows + 1];
        for &(r, _, _) in triplets {
            counts[r + 1] += 1;
        }
        for i in 0..n_rows {
            counts[i + 1] += counts[i];
        }
        let mut slots = counts.clone();
        let mut entries = vec![(0usize, 0.0f64); triplets.len()];
        for &(r, c, v) in triplets {
            entries[slots[r]] = (c, v);
            slots[r] += 1;
        }
        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        for r in 0..n_rows {
            let row = &mut entries[counts[r]..counts[r + 1]];
            // Stable sort keeps the summation order of duplicates fixed.
            row.sort_by_key(|e| e.0);
            for &(c, v) in row.iter() {
                if col_idx.len() > row_ptr[r] && *col_idx.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Zero matrix with the given sparsity pattern (per-row column lists).
    pub fn from_pattern(n_cols: usize, rows: &[Vec<usize>]) -> Self {
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        for r in rows {
            let mut cols = r.clone();
            cols.sort_unstable();
            cols.dedup();
            col_idx.extend(cols);
            row_ptr.push(col_idx.len());
        }
        let nnz = col_idx.len();
        Self {
            n_rows: rows.len(),
            n_cols,
            row_ptr,
            col_idx,
            values: vec![0.0; nnz],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Same pattern, all values zero.
    pub fn zeroed(&self) -> Self {
        Self {
            values: vec![0.0; self.values.len()],
            ..self.clone()
        }
    }

    pub fn same_pattern(&self, other: &Self) -> bool {
        self.n_rows == other.n_rows
            && self.n_cols == other.n_cols
            && self.row_ptr == other.row_ptr
            && self.col_idx == other.col_idx
    }

    /// Storage position of entry `(row, col)`, if present in the pattern.
    pub fn find(&self, row: usize, col: usize) -> Option<usize> {
        let (a, b) = (self.row_ptr[row], self.row_ptr[row + 1]);
        self.col_idx[a..b].binary_search(&col).ok().map(|k| a + k)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.find(row, col).map_or(0.0, |k| self.values[k])
    }

    /// Adds `v` to entry `(row, col)`, which must be in the pattern.
    pub fn add(&mut self, row: usize, col: usize, v: f64) {
        let k = self
            .find(row, col)
            .unwrap_or_else(|| panic!("entry ({row}, {col}) not in sparsity pattern"));
        self.values[k] += v;
    }

    /// Entries `(col, value)` of one row.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        self.col_idx[a..b]
            .iter()
            .copied()
            .zip(self.values[a..b].iter().copied())
    }

    /// Replaces row `r` by the unit row `e_r` (the diagonal must be in the pattern).
    pub fn set_identity_row(&mut self, r: usize) {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        for k in a..b {
            self.values[k] = if self.col_idx[k] == r { 1.0 } else { 0.0 };
        }
        assert!(
            self.find(r, r).is_some(),
            "diagonal ({r}, {r}) not in pattern"
        );
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols, "matvec dimension mismatch");
        (0..self.n_rows)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    pub fn transpose_matvec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.n_rows, "transpose matvec dimension mismatch");
        let mut out = vec![0.0; self.n_cols];
        for (r, yr) in y.iter().enumerate() {
            for (c, v) in self.row(r) {
                out[c] += v * yr;
            }
        }
        out
    }

    /// Adds `alpha * other` in place; patterns must match.
    pub fn add_scaled(&mut self, alpha: f64, other: &Self) {
        assert!(
            self.same_pattern(other),
            "add_scaled needs identical patterns"
        );
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.n_rows == self.n_cols
            && (0..self.n_rows).all(|r| self.row(r).all(|(c, v)| (v - self.get(c, r)).abs() <= tol))
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (r, row) in d.iter_mut().enumerate() {
            for (c, v) in self.row(r) {
                row[c] += v;
            }
        }
        d
    }

    /// Matrix Market coordinate format (1-based indices).
    pub fn to_matrix_market(&self) -> String {
        let mut s = String::from("%%MatrixMarket matrix coordinate real general\n");
        let _ = writeln!(s, "{} {} {}", self.n_rows, self.n_cols, self.nnz());
        for r in 0..self.n_rows {
            for (c, v) in self.row(r) {
                let _ = writeln!(s, "{} {} {:e}", r + 1, c + 1, v);
            }
        }
        s
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Outcome of a linear solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearSolveReport {
    /// `||A x - b||_2`
    pub residual_norm: f64,
    /// Whether the symbolic factorization was reused.
    pub reused_symbolic: bool,
}

const RELATIVE_RESIDUAL_LIMIT: f64 = 1e-11;

fn init_parallelism() {
    static ONCE: Once = Once::new();
    // Sequential kernels keep results bit-reproducible.
    ONCE.call_once(|| faer::set_global_parallelism(Par::Seq));
}

/// Direct sparse LU solver that caches the symbolic analysis for a fixed
/// sparsity pattern; numeric values are refactorized on every call.
#[derive(Default)]
pub struct LuSolver {
    pattern: Option<SparseMatrix>,
    // CSC of the matrix: csc value k comes from csr value perm[k].
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    perm: Vec<usize>,
    symbolic: Option<SymbolicLu<usize>>,
}

impl LuSolver {
    pub fn new() -> Self {
        Self::default()
    }

    fn analyze(&mut self, a: &SparseMatrix) -> Result<()> {
        let n = a.n_rows;
        let mut col_count = vec![0usize; n + 1];
        for &c in &a.col_idx {
            col_count[c + 1] += 1;
        }
        if let Some(c) = (0..n).find(|&c| col_count[c + 1] == 0) {
            return Err(Error::SingularMatrix { row: c });
        }
        for i in 0..n {
            col_count[i + 1] += col_count[i];
        }
        let mut next = col_count.clone();
        let mut row_idx = vec![0; a.nnz()];
        let mut perm = vec![0; a.nnz()];
        for r in 0..n {
            for k in a.row_ptr[r]..a.row_ptr[r + 1] {
                let c = a.col_idx[k];
                row_idx[next[c]] = r;
                perm[next[c]] = k;
                next[c] += 1;
            }
        }
        let sym = SymbolicSparseColMatRef::new_checked(n, n, &col_count, None, &row_idx);
        let symbolic = SymbolicLu::try_new(sym)
            .map_err(|e| Error::InvalidState(format!("symbolic LU analysis failed: {e:?}")))?;
        self.col_ptr = col_count;
        self.row_idx = row_idx;
        self.perm = perm;
        self.symbolic = Some(symbolic);
        self.pattern = Some(a.zeroed());
        Ok(())
    }

    /// Factorizes `a` and solves `a x = b`.
    pub fn solve(&mut self, a: &SparseMatrix, b: &[f64]) -> Result<(Vec<f64>, LinearSolveReport)> {
        init_parallelism();
        let n = a.n_rows;
        if a.n_cols != n || b.len() != n {
            return Err(Error::InvalidArgument(format!(
                "solve needs a square system: matrix {}x{}, rhs {}",
                a.n_rows,
                a.n_cols,
                b.len()
            )));
        }
        if let Some(r) = (0..n).find(|&r| a.row(r).all(|(_, v)| v == 0.0)) {
            return Err(Error::SingularMatrix { row: r });
        }
        let reused = matches!(&self.pattern, Some(p) if p.same_pattern(a));
        if !reused {
            self.analyze(a)?;
        }
        let vals: Vec<f64> = self.perm.iter().map(|&k| a.values[k]).collect();
        let sym = SymbolicSparseColMatRef::new_checked(n, n, &self.col_ptr, None, &self.row_idx);
        let mat = SparseColMatRef::new(sym, &vals);
        let symbolic = self.symbolic.clone().expect("analyzed");
        let lu = catch_unwind(AssertUnwindSafe(|| {
            Lu::try_new_with_symbolic(symbolic, mat)
        }))
        .map_err(|_| Error::SingularMatrix { row: n })?
        .map_err(|e| match e {
            LuError::SymbolicSingular { index } => Error::SingularMatrix { row: index },
            LuError::Generic(g) => Error::InvalidState(format!("LU factorization failed: {g:?}")),
        })?;
        let rhs = Mat::<f64>::from_fn(n, 1, |i, _| b[i]);
        let sol = lu.solve(rhs);
        let x: Vec<f64> = (0..n).map(|i| sol[(i, 0)]).collect();
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::SingularMatrix { row: i });
        }
        let ax = a.matvec(&x);
        let residual_norm = norm2(&ax.iter().zip(b).map(|(p, q)| p - q).collect::<Vec<_>>());
        if residual_norm > RELATIVE_RESIDUAL_LIMIT * norm2(b).max(1.0) {
            log::warn!("linear solve residual {residual_norm:e} exceeds the relative limit");
        }
        Ok((
            x,
            LinearSolveReport {
                residual_norm,
                reused_symbolic: reused,
            },
        ))
    }
}

/// One-shot direct solve of `a x = b`.
pub fn solve(a: &SparseMatrix, b: &[f64]) -> Result<(Vec<f64>, LinearSolveReport)> {
    LuSolver::new().solve(a, b)
}
