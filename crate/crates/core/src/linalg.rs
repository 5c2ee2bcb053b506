//! Dense exact linear algebra over a field, plus fraction-free determinants
//! over polynomial rings.

use crate::poly::{Field, Poly, Ring};

pub type Matrix<T> = Vec<Vec<T>>;

/// Row echelon form in place; returns pivot columns.
pub fn row_reduce<F: Field>(m: &mut Matrix<F>) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_nil()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].inverse().expect("nonzero pivot");
        for j in c..cols {
            m[r][j] = m[r][j].times(&inv);
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_nil() {
                let f = m[i][c].clone();
                for j in c..cols {
                    let t = m[r][j].times(&f);
                    m[i][j] = m[i][j].minus(&t);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank<F: Field>(m: &Matrix<F>) -> usize {
    let mut a = m.clone();
    row_reduce(&mut a).len()
}

/// Indices of rows forming a maximal independent subset, chosen greedily in order.
pub fn independent_rows<F: Field>(m: &Matrix<F>) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut basis: Matrix<F> = Vec::new();
    for (i, row) in m.iter().enumerate() {
        let mut trial = basis.clone();
        trial.push(row.clone());
        if rank(&trial) > basis.len() {
            chosen.push(i);
            let mut reduced = trial;
            row_reduce(&mut reduced);
            reduced.retain(|r| r.iter().any(|x| !x.is_nil()));
            basis = reduced;
        }
    }
    chosen
}

/// Basis of the right kernel `{v : M v = 0}`.
pub fn kernel<F: Field>(m: &Matrix<F>, cols: usize, zero: &F) -> Vec<Vec<F>> {
    let mut a = m.clone();
    let pivots = row_reduce(&mut a);
    let one = zero.one_like();
    let mut out = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![zero.clone(); cols];
        v[free] = one.clone();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = a[r][free].negate();
        }
        out.push(v);
    }
    out
}

/// Solve `M x = b`; `None` if inconsistent. Free variables are set to zero.
pub fn solve<F: Field>(m: &Matrix<F>, b: &[F], zero: &F) -> Option<Vec<F>> {
    let cols = m.first().map_or(0, |r| r.len());
    let mut aug: Matrix<F> = m
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = row_reduce(&mut aug);
    if pivots.contains(&cols) {
        return None;
    }
    let mut x = vec![zero.clone(); cols];
    for (r, &pc) in pivots.iter().enumerate() {
        x[pc] = aug[r][cols].clone();
    }
    Some(x)
}

pub fn det<F: Field>(m: &Matrix<F>, zero: &F) -> F {
    let n = m.len();
    let mut a = m.clone();
    let mut d = zero.one_like();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_nil()) else {
            return zero.clone();
        };
        if p != c {
            a.swap(p, c);
            d = d.negate();
        }
        d = d.times(&a[c][c]);
        let inv = a[c][c].inverse().expect("nonzero pivot");
        for i in c + 1..n {
            if a[i][c].is_nil() {
                continue;
            }
            let f = a[i][c].times(&inv);
            for j in c..n {
                let t = a[c][j].times(&f);
                a[i][j] = a[i][j].minus(&t);
            }
        }
    }
    d
}

pub fn mat_mul<R: Ring>(a: &Matrix<R>, b: &Matrix<R>, zero: &R) -> Matrix<R> {
    let n = a.len();
    let k = b.len();
    let m = b.first().map_or(0, |r| r.len());
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut acc = zero.clone();
                    for l in 0..k {
                        acc = acc.plus(&a[i][l].times(&b[l][j]));
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn transpose<T: Clone>(a: &Matrix<T>) -> Matrix<T> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    (0..cols).map(|j| (0..rows).map(|i| a[i][j].clone()).collect()).collect()
}

pub fn inverse<F: Field>(m: &Matrix<F>, zero: &F) -> Option<Matrix<F>> {
    let n = m.len();
    let one = zero.one_like();
    let mut aug: Matrix<F> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { one.clone() } else { zero.clone() }));
            r
        })
        .collect();
    let piv = row_reduce(&mut aug);
    if piv.len() < n || piv[n - 1] != n - 1 {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Bareiss fraction-free determinant over a polynomial ring whose
/// coefficient ring is a field (exact division is always possible).
pub fn bareiss_det<C: Field>(m: &Matrix<Poly<C>>, nvars: usize) -> Poly<C> {
    let n = m.len();
    if n == 0 {
        return Poly::zero(nvars);
    }
    let mut a = m.clone();
    let mut sign = false;
    let mut prev: Option<Poly<C>> = None;
    for k in 0..n.saturating_sub(1) {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(p) => {
                    a.swap(k, p);
                    sign = !sign;
                }
                None => return Poly::zero(nvars),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = a[i][j].mul(&a[k][k]).sub(&a[i][k].mul(&a[k][j]));
                a[i][j] = match &prev {
                    Some(p) => t.exact_div(p).expect("Bareiss division is exact"),
                    None => t,
                };
            }
        }
        prev = Some(a[k][k].clone());
    }
    let d = a[n - 1][n - 1].clone();
    if sign {
        d.neg()
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, Rational};
    use num_traits::Zero;
    use proptest::prelude::*;

    fn q(rows: &[&[i64]]) -> Matrix<Rational> {
        rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()
    }

    #[test]
    fn rank_kernel_solve() {
        let m = q(&[&[1, 2, 3], &[2, 4, 6], &[0, 1, 1]]);
        assert_eq!(rank(&m), 2);
        let k = kernel(&m, 3, &Rational::zero());
        assert_eq!(k.len(), 1);
        let mv = mat_mul(&m, &transpose(&k), &Rational::zero());
        assert!(mv.iter().all(|r| r[0].is_zero()));
        assert!(solve(&m, &[int(1), int(3), int(0)], &Rational::zero()).is_none());
        assert_eq!(independent_rows(&m), vec![0, 2]);
    }

    #[test]
    fn det_and_inverse() {
        let m = q(&[&[2, 1], &[1, 2]]);
        assert_eq!(det(&m, &Rational::zero()), int(3));
        let inv = inverse(&m, &Rational::zero()).unwrap();
        let id = mat_mul(&m, &inv, &Rational::zero());
        assert_eq!(id, q(&[&[1, 0], &[0, 1]]));
    }

    proptest! {
        #[test]
        fn bareiss_matches_gauss(entries in proptest::collection::vec(-5i64..6, 16)) {
            let m: Matrix<Rational> = entries.chunks(4).map(|r| r.iter().map(|&x| int(x)).collect()).collect();
            let pm: Matrix<Poly<Rational>> = m.iter().map(|r| r.iter().map(|x| Poly::constant(1, x.clone())).collect()).collect();
            let d = bareiss_det(&pm, 1);
            let expect = det(&m, &Rational::zero());
            prop_assert_eq!(d.as_constant().cloned().unwrap_or_else(Rational::zero), expect);
        }
    }
}
