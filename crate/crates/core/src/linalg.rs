//! Exact dense linear algebra over the rationals.

use num::{BigRational, One, Zero};

/// Dense matrix of exact rationals, row-major.
pub type RationalMatrix = Vec<Vec<BigRational>>;

pub fn identity(n: usize) -> RationalMatrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect()
        })
        .collect()
}

/// Gauss-Jordan elimination on `[a | rhs]`. Returns `None` if `a` is singular.
fn eliminate(mut a: RationalMatrix, mut rhs: RationalMatrix) -> Option<RationalMatrix> {
    let n = a.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        let inv = a[col][col].recip();
        for v in a[col].iter_mut() {
            *v *= &inv;
        }
        for v in rhs[col].iter_mut() {
            *v *= &inv;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            let (pivot_row, pivot_rhs) = (a[col].clone(), rhs[col].clone());
            for (v, p) in a[r].iter_mut().zip(&pivot_row) {
                *v -= &factor * p;
            }
            for (v, p) in rhs[r].iter_mut().zip(&pivot_rhs) {
                *v -= &factor * p;
            }
        }
    }
    Some(rhs)
}

/// Solves `a·x = b`. Returns `None` if `a` is singular.
pub fn solve(a: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let rhs = b.iter().map(|v| vec![v.clone()]).collect();
    eliminate(a.to_vec(), rhs).map(|x| x.into_iter().map(|mut r| r.remove(0)).collect())
}

pub fn inverse(a: &[Vec<BigRational>]) -> Option<RationalMatrix> {
    eliminate(a.to_vec(), identity(a.len()))
}

pub fn determinant(a: &[Vec<BigRational>]) -> BigRational {
    let n = a.len();
    let mut m = a.to_vec();
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if pivot != col {
            m.swap(col, pivot);
            det = -det;
        }
        det *= &m[col][col];
        let inv = m[col][col].recip();
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = &m[r][col] * &inv;
            let pivot_row = m[col].clone();
            for (v, p) in m[r].iter_mut().zip(&pivot_row) {
                *v -= &factor * p;
            }
        }
    }
    det
}

pub fn mul_vec(a: &[Vec<BigRational>], x: &[BigRational]) -> Vec<BigRational> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigInt;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn solves_small_system() {
        let a = vec![vec![q(2, 1), q(1, 1)], vec![q(1, 1), q(3, 1)]];
        let x = solve(&a, &[q(3, 1), q(5, 1)]).unwrap();
        assert_eq!(x, vec![q(4, 5), q(7, 5)]);
        assert_eq!(mul_vec(&a, &x), vec![q(3, 1), q(5, 1)]);
        assert_eq!(determinant(&a), q(5, 1));
    }

    #[test]
    fn singular_is_none() {
        let a = vec![vec![q(1, 1), q(2, 1)], vec![q(2, 1), q(4, 1)]];
        assert!(inverse(&a).is_none());
        assert_eq!(determinant(&a), q(0, 1));
    }

    #[test]
    fn inverse_round_trip() {
        let a = vec![
            vec![q(0, 1), q(2, 1), q(1, 1)],
            vec![q(1, 1), q(0, 1), q(0, 1)],
            vec![q(1, 2), q(1, 1), q(3, 1)],
        ];
        let inv = inverse(&a).unwrap();
        for (i, row) in a.iter().enumerate() {
            for j in 0..3 {
                let v: BigRational = (0..3).map(|k| &row[k] * &inv[k][j]).sum();
                assert_eq!(v, if i == j { q(1, 1) } else { q(0, 1) });
            }
        }
        assert_eq!(determinant(&a), q(-5, 1));
    }
}
