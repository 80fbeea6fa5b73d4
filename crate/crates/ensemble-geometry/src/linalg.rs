//! Small dense symmetric matrices and a column-pivoted Householder QR
//! least-squares solver. The systems here have one column per ensemble
//! member, so direct dense factorizations are the right tool.

/// Dense symmetric matrix with full row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        SymMatrix { dim, data: vec![0.0; dim * dim] }
    }

    /// Builds the matrix from `f(i, j)`, evaluated once per unordered pair.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = SymMatrix::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }
}

/// Outcome of a least-squares solve.
pub struct LeastSquares {
    /// Coefficient per input column; truncated columns get zero.
    pub solution: Vec<f64>,
    /// Numerical rank of the column set at the given relative tolerance.
    pub rank: usize,
    /// Euclidean norm of the unreachable residual component of `rhs`.
    pub residual: f64,
}

/// Minimizes `|A x - b|` by column-pivoted Householder QR, where `A` has the
/// given columns.
///
/// Pivoting stops once the best remaining column norm falls below
/// `rel_tol` times the largest initial column norm; the coefficients of the
/// truncated (numerically dependent) columns are zero. Working on the columns
/// directly, instead of on their Gram matrix, keeps the rank decision at the
/// un-squared scale: directions a member genuinely contributes survive, and
/// only duplicates get dropped.
pub fn least_squares(columns: &[&[f64]], rhs: &[f64], rel_tol: f64) -> LeastSquares {
    let m = columns.len();
    let n = rhs.len();
    debug_assert!(columns.iter().all(|c| c.len() == n), "ragged column lengths");
    let mut a: Vec<Vec<f64>> = columns.iter().map(|c| c.to_vec()).collect();
    let mut qtb = rhs.to_vec();
    let mut perm: Vec<usize> = (0..m).collect();

    let max_steps = m.min(n);
    let mut rank = max_steps;
    let mut threshold = 0.0;
    for k in 0..max_steps {
        let (jmax, best_sq) = (k..m)
            .map(|j| (j, a[j][k..].iter().map(|v| v * v).sum::<f64>()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("non-empty pivot range");
        let best_norm = best_sq.sqrt();
        if k == 0 {
            threshold = rel_tol * best_norm;
        }
        if best_norm <= threshold || best_norm == 0.0 {
            rank = k;
            break;
        }
        a.swap(k, jmax);
        perm.swap(k, jmax);

        // Householder vector v = x - alpha*e1 held in a[k][k..]; the sign
        // choice avoids cancellation in v's leading entry.
        let alpha = -a[k][k].signum() * best_norm;
        a[k][k] -= alpha;
        let vtv: f64 = a[k][k..].iter().map(|v| v * v).sum();
        for j in (k + 1)..m {
            let (head, tail) = a.split_at_mut(k + 1);
            let v = &head[k][k..];
            let col = &mut tail[j - k - 1][k..];
            let dot: f64 = v.iter().zip(col.iter()).map(|(x, y)| x * y).sum();
            let f = 2.0 * dot / vtv;
            for (x, y) in v.iter().zip(col.iter_mut()) {
                *y -= f * x;
            }
        }
        {
            let v = &a[k][k..];
            let dot: f64 = v.iter().zip(&qtb[k..]).map(|(x, y)| x * y).sum();
            let f = 2.0 * dot / vtv;
            for (x, y) in v.iter().zip(qtb[k..].iter_mut()) {
                *y -= f * x;
            }
        }
        // R's diagonal replaces v's head; R(i, j > i) lives in a[j][i].
        a[k][k] = alpha;
    }

    let mut reduced = vec![0.0; rank];
    for i in (0..rank).rev() {
        let mut s = qtb[i];
        for j in (i + 1)..rank {
            s -= a[j][i] * reduced[j];
        }
        reduced[i] = s / a[i][i];
    }
    let mut solution = vec![0.0; m];
    for i in 0..rank {
        solution[perm[i]] = reduced[i];
    }
    let residual = qtb[rank..].iter().map(|v| v * v).sum::<f64>().sqrt();
    LeastSquares { solution, rank, residual }
}
