//! Small dense linear-algebra helpers: Gaussian elimination, null vectors,
//! and a Jacobi eigensolver for symmetric matrices. Everything here operates
//! on desk-scale matrices (tens of rows), so simplicity beats asymptotics.

use crate::error::{Error, Result};

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
/// `a` is row-major, square.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        if m[pivot][col].abs() < 1e-14 {
            return Err(Error::NumericalDivergence(
                "singular linear system".to_string(),
            ));
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in row + 1..n {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Ok(x)
}

/// Finds a nonzero vector in the null space of the (rows x cols) matrix `a`,
/// assuming cols > rank. Pivots below `tol * max_entry` are treated as zero.
/// Returns `None` when no null direction is found at that tolerance.
pub fn null_vector(a: &[Vec<f64>], tol: f64) -> Option<Vec<f64>> {
    let rows = a.len();
    if rows == 0 {
        return None;
    }
    let cols = a[0].len();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1.0);
    let thresh = tol * scale;

    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut pivot_col_of_row = Vec::new();
    let mut is_pivot_col = vec![false; cols];
    let mut row = 0;
    for col in 0..cols {
        if row >= rows {
            break;
        }
        let best = (row..rows).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[best][col].abs() <= thresh {
            continue; // free column
        }
        m.swap(row, best);
        let p = m[row][col];
        for k in 0..cols {
            m[row][k] /= p;
        }
        for r in 0..rows {
            if r != row && m[r][col] != 0.0 {
                let f = m[r][col];
                for k in 0..cols {
                    m[r][k] -= f * m[row][k];
                }
            }
        }
        pivot_col_of_row.push(col);
        is_pivot_col[col] = true;
        row += 1;
    }

    let free_col = (0..cols).find(|&c| !is_pivot_col[c])?;
    let mut z = vec![0.0; cols];
    z[free_col] = 1.0;
    for (r, &pc) in pivot_col_of_row.iter().enumerate() {
        z[pc] = -m[r][free_col];
    }
    Some(z)
}

/// Jacobi eigendecomposition of a symmetric matrix. Returns `(eigenvalues,
/// eigenvectors)` with `eigenvectors[k]` the unit vector for `eigenvalues[k]`.
pub fn symmetric_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    let off = |m: &[Vec<f64>]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[i][j] * m[i][j];
                }
            }
        }
        s.sqrt()
    };
    let frob = m
        .iter()
        .flat_map(|r| r.iter())
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
        .max(1e-300);

    for _sweep in 0..100 {
        if off(&m) <= 1e-14 * frob {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() <= 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let eigenvalues: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    let eigenvectors: Vec<Vec<f64>> = (0..n).map(|k| (0..n).map(|i| v[i][k]).collect()).collect();
    (eigenvalues, eigenvectors)
}

/// Moore-Penrose pseudoinverse of a symmetric PSD matrix, zeroing eigenvalues
/// below `rank_tol * lambda_max`.
pub fn sym_pinv(a: &[Vec<f64>], rank_tol: f64) -> Vec<Vec<f64>> {
    let n = a.len();
    let (vals, vecs) = symmetric_eigen(a);
    let lmax = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut pinv = vec![vec![0.0; n]; n];
    for (k, &lam) in vals.iter().enumerate() {
        if lam.abs() <= rank_tol * lmax || lam.abs() == 0.0 {
            continue;
        }
        let inv = 1.0 / lam;
        for i in 0..n {
            for j in 0..n {
                pinv[i][j] += inv * vecs[k][i] * vecs[k][j];
            }
        }
    }
    pinv
}

/// `a * x` for row-major `a`.
pub fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_small_system() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let b = vec![5.0, 10.0];
        let x = solve(&a, &b).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn null_vector_of_rank_deficient_matrix() {
        // Columns (1,0,1),(0,1,1),(1,1,2): third = first + second.
        let a = vec![
            vec![1.0, 0.0, 1.0],
            vec![0.0, 1.0, 1.0],
            vec![1.0, 1.0, 2.0],
        ];
        let z = null_vector(&a, 1e-10).unwrap();
        for row in &a {
            let dot: f64 = row.iter().zip(&z).map(|(r, v)| r * v).sum();
            assert!(dot.abs() < 1e-10);
        }
        assert!(z.iter().any(|v| v.abs() > 1e-10));
    }

    #[test]
    fn full_rank_has_no_null_vector() {
        let a = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!(null_vector(&a, 1e-10).is_none());
    }

    #[test]
    fn eigen_of_diagonal() {
        let a = vec![vec![0.5, 0.0], vec![0.0, 0.25]];
        let (vals, _) = symmetric_eigen(&a);
        let mut sorted = vals.clone();
        sorted.sort_by(|x, y| x.total_cmp(y));
        assert!((sorted[0] - 0.25).abs() < 1e-12);
        assert!((sorted[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pinv_of_rank_one() {
        // a a^T for a = (1, 0): pinv acts as identity on span(a).
        let a = vec![vec![1.0, 0.0], vec![0.0, 0.0]];
        let p = sym_pinv(&a, 1e-10);
        assert!((p[0][0] - 1.0).abs() < 1e-12);
        assert!(p[1][1].abs() < 1e-12);
    }
}
