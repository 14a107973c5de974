//! Dense matrices and Householder least squares.
//!
//! The sample matrix is factored as C = Q·U with Q orthonormal, applied as
//! a sequence of compactly stored reflectors. A least-squares solution then
//! falls out of back-substitution on the top square block of U. Pivots are
//! checked against their column norms, so a linearly dependent regressor
//! surfaces as a named rank error instead of an exploding solution.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    a: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Mat {
        Mat {
            rows,
            cols,
            a: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Mat {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(
            rows.iter().all(|row| row.len() == c),
            "ragged rows in matrix literal"
        );
        Mat {
            rows: r,
            cols: c,
            a: rows.concat(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.a[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.a[r * self.cols + c] = v;
    }

    pub fn col_norm(&self, j: usize) -> f64 {
        (0..self.rows)
            .map(|i| self.get(i, j) * self.get(i, j))
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// Cᵀ·y, used for the normal-equation orthogonality check.
    pub fn transpose_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows);
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j) * y[i]).sum())
            .collect()
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum MatrixError {
    #[error("system is not overdetermined: {m} rows for {v} unknowns")]
    NotOverdetermined { m: usize, v: usize },
    #[error(
        "column {column} is numerically rank deficient \
         (pivot {pivot:.3e} against threshold {threshold:.3e})"
    )]
    RankDeficient {
        column: usize,
        pivot: f64,
        threshold: f64,
    },
}

/// Pivot tolerance relative to the column norm.
const PIVOT_RTOL: f64 = 1e-12;

/// Compact Householder factorization C = Q·U.
///
/// `packed` holds U on and above the diagonal; the strict lower part of
/// column k holds the tail of reflector k, whose leading component is
/// `v0[k]`. A zero `vtv[k]` marks a degenerate reflector (zero column
/// tail) and is skipped when applying Q.
pub struct Householder {
    m: usize,
    n: usize,
    packed: Mat,
    v0: Vec<f64>,
    vtv: Vec<f64>,
    col_norms: Vec<f64>,
}

impl Householder {
    /// Requires m ≥ n.
    pub fn factor(c: &Mat) -> Householder {
        let (m, n) = (c.rows, c.cols);
        assert!(m >= n, "factor needs at least as many rows as columns");
        let col_norms = (0..n).map(|j| c.col_norm(j)).collect();
        let mut a = c.clone();
        let mut v0 = vec![0.0; n];
        let mut vtv = vec![0.0; n];

        for k in 0..n {
            let mut norm2 = 0.0;
            for i in k..m {
                norm2 += a.get(i, k) * a.get(i, k);
            }
            let norm = norm2.sqrt();
            if norm == 0.0 {
                continue;
            }
            let akk = a.get(k, k);
            // Sign keeps v0 away from cancellation.
            let alpha = if akk > 0.0 { -norm } else { norm };
            let vk0 = akk - alpha;
            vtv[k] = vk0 * vk0 + (norm2 - akk * akk);
            v0[k] = vk0;

            for j in (k + 1)..n {
                let mut s = vk0 * a.get(k, j);
                for i in (k + 1)..m {
                    s += a.get(i, k) * a.get(i, j);
                }
                let f = 2.0 * s / vtv[k];
                a.set(k, j, a.get(k, j) - f * vk0);
                for i in (k + 1)..m {
                    a.set(i, j, a.get(i, j) - f * a.get(i, k));
                }
            }
            // Column k collapses to alpha; its tail stays in place as the
            // stored reflector.
            a.set(k, k, alpha);
        }
        Householder {
            m,
            n,
            packed: a,
            v0,
            vtv,
            col_norms,
        }
    }

    /// Qᵀ·y.
    pub fn apply_qt(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.m);
        let mut y = y.to_vec();
        for k in 0..self.n {
            self.reflect(&mut y, k);
        }
        y
    }

    /// Q·y.
    pub fn apply_q(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.m);
        let mut y = y.to_vec();
        for k in (0..self.n).rev() {
            self.reflect(&mut y, k);
        }
        y
    }

    /// Reflectors are involutions, so the same step serves Q and Qᵀ.
    fn reflect(&self, y: &mut [f64], k: usize) {
        if self.vtv[k] == 0.0 {
            return;
        }
        let mut s = self.v0[k] * y[k];
        for i in (k + 1)..self.m {
            s += self.packed.get(i, k) * y[i];
        }
        let f = 2.0 * s / self.vtv[k];
        y[k] -= f * self.v0[k];
        for i in (k + 1)..self.m {
            y[i] -= f * self.packed.get(i, k);
        }
    }

    /// The m×n upper-triangular factor.
    pub fn u(&self) -> Mat {
        let mut u = Mat::zeros(self.m, self.n);
        for i in 0..self.n {
            for j in i..self.n {
                u.set(i, j, self.packed.get(i, j));
            }
        }
        u
    }

    /// Back-substitution on the top n×n block of U against the first n
    /// entries of `b`.
    pub fn solve_upper(&self, b: &[f64]) -> Result<Vec<f64>, MatrixError> {
        assert!(b.len() >= self.n);
        let mut x = vec![0.0; self.n];
        for j in (0..self.n).rev() {
            let pivot = self.packed.get(j, j);
            let threshold = PIVOT_RTOL * self.col_norms[j].max(f64::MIN_POSITIVE);
            if pivot.abs() <= threshold {
                return Err(MatrixError::RankDeficient {
                    column: j,
                    pivot: pivot.abs(),
                    threshold,
                });
            }
            let mut s = b[j];
            for k in (j + 1)..self.n {
                s -= self.packed.get(j, k) * x[k];
            }
            x[j] = s / pivot;
        }
        Ok(x)
    }
}

/// Minimizer of ‖C·K − T‖₂ for an overdetermined full-rank system.
pub fn least_squares(c: &Mat, t: &[f64]) -> Result<Vec<f64>, MatrixError> {
    if c.rows <= c.cols {
        return Err(MatrixError::NotOverdetermined {
            m: c.rows,
            v: c.cols,
        });
    }
    let hh = Householder::factor(c);
    let b = hh.apply_qt(t);
    hh.solve_upper(&b)
}

/// Residual diagnostics of a fitted system.
#[derive(Debug, Clone)]
pub struct ResidualStats {
    pub residual: Vec<f64>,
    pub rss: f64,
    pub mrss: f64,
    /// Residual standard error, the model-comparison statistic.
    pub s: f64,
}

impl fmt::Display for ResidualStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "RSS={:.6e} MRSS={:.6e} S={:.6e}",
            self.rss, self.mrss, self.s
        )
    }
}

/// R = T − C·K, RSS = ‖R‖², MRSS = RSS/(m−v), S = √MRSS.
pub fn residual_stats(c: &Mat, t: &[f64], k: &[f64]) -> Result<ResidualStats, MatrixError> {
    if c.rows <= c.cols {
        return Err(MatrixError::NotOverdetermined {
            m: c.rows,
            v: c.cols,
        });
    }
    let fitted = c.mul_vec(k);
    let residual: Vec<f64> = t.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let rss: f64 = residual.iter().map(|r| r * r).sum();
    let mrss = rss / (c.rows - c.cols) as f64;
    Ok(ResidualStats {
        residual,
        rss,
        mrss,
        s: mrss.sqrt(),
    })
}
