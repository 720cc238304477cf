//! Exact linear algebra over the rationals and the integers.
//!
//! Rational side: row reduction, rank, kernels, and canonical subspace forms
//! (reduced row-echelon bases), which back the realizable-matroid and
//! lattice-of-subspaces constructions.  Integer side: Smith normal form with
//! unimodular transforms, which backs the class-group computation and the
//! integer solvers.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::rational::Rat;

/// A dense rational matrix, row major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Rat>,
}

impl QMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        QMat {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix");
        QMat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn at(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Rat {
        &mut self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// In-place reduction to reduced row-echelon form; returns pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self.at(i, c).is_zero()) else {
                continue;
            };
            self.swap_rows(r, p);
            let inv = self.at(r, c).clone();
            for j in c..self.cols {
                let v = self.at(r, j).clone() / inv.clone();
                *self.at_mut(r, j) = v;
            }
            for i in 0..self.rows {
                if i != r && !self.at(i, c).is_zero() {
                    let f = self.at(i, c).clone();
                    for j in c..self.cols {
                        let v = self.at(i, j).clone() - f.clone() * self.at(r, j).clone();
                        *self.at_mut(i, j) = v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    /// A basis of the right kernel, one vector per non-pivot column.
    pub fn kernel(&self) -> Vec<Vec<Rat>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let mut basis = Vec::new();
        let piv_set: Vec<Option<usize>> = {
            let mut v = vec![None; self.cols];
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = Some(r);
            }
            v
        };
        for free in 0..self.cols {
            if piv_set[free].is_some() {
                continue;
            }
            let mut vec = vec![Rat::zero(); self.cols];
            vec[free] = Rat::one();
            for (c, pr) in piv_set.iter().enumerate() {
                if let Some(r) = pr {
                    vec[c] = -m.at(*r, free).clone();
                }
            }
            basis.push(vec);
        }
        basis
    }
}

/// A subspace of ℚ^n in canonical form: reduced row-echelon basis rows with
/// pivots in increasing column order.  Equal subspaces compare equal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Subspace {
    pub ambient: usize,
    pub basis: Vec<Vec<Rat>>,
}

impl Subspace {
    pub fn span(ambient: usize, gens: &[Vec<Rat>]) -> Self {
        assert!(gens.iter().all(|g| g.len() == ambient));
        if gens.is_empty() {
            return Subspace {
                ambient,
                basis: Vec::new(),
            };
        }
        let mut m = QMat::from_rows(gens.to_vec());
        let pivots = m.rref();
        let basis = (0..pivots.len()).map(|i| m.row(i).to_vec()).collect();
        Subspace { ambient, basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn full(ambient: usize) -> Self {
        let mut rows = Vec::new();
        for i in 0..ambient {
            let mut r = vec![Rat::zero(); ambient];
            r[i] = Rat::one();
            rows.push(r);
        }
        Subspace {
            ambient,
            basis: rows,
        }
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient);
        let mut gens = self.basis.clone();
        gens.extend(other.basis.clone());
        Subspace::span(self.ambient, &gens)
    }

    /// Intersection via the kernel of the stacked basis matrix.
    pub fn intersect(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient);
        if self.basis.is_empty() || other.basis.is_empty() {
            return Subspace::span(self.ambient, &[]);
        }
        // Columns of the transpose system: a combination of self-basis rows
        // equal to a combination of other-basis rows.
        let k = self.dim();
        let l = other.dim();
        let mut rows = Vec::new();
        for coord in 0..self.ambient {
            let mut row = Vec::with_capacity(k + l);
            for b in &self.basis {
                row.push(b[coord].clone());
            }
            for b in &other.basis {
                row.push(-b[coord].clone());
            }
            rows.push(row);
        }
        let m = QMat::from_rows(rows);
        let mut gens = Vec::new();
        for v in m.kernel() {
            let mut g = vec![Rat::zero(); self.ambient];
            for (bi, b) in self.basis.iter().enumerate() {
                for coord in 0..self.ambient {
                    let t = g[coord].clone() + v[bi].clone() * b[coord].clone();
                    g[coord] = t;
                }
            }
            gens.push(g);
        }
        Subspace::span(self.ambient, &gens)
    }

    pub fn contains(&self, other: &Subspace) -> bool {
        self.sum(other).dim() == self.dim()
    }
}

/// Dense BigInt matrix, row major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<BigInt>,
}

impl IMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IMat {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IMat::zero(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = BigInt::one();
        }
        m
    }

    pub fn from_rows_i64(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix");
        IMat {
            rows: r,
            cols: c,
            data: rows
                .iter()
                .flat_map(|x| x.iter().map(|&v| BigInt::from(v)))
                .collect(),
        }
    }

    pub fn at(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }

    pub fn mul(&self, other: &IMat) -> IMat {
        assert_eq!(self.cols, other.rows);
        let mut out = IMat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self.at(i, k).is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let t = out.at(i, j) + self.at(i, k) * other.at(k, j);
                    *out.at_mut(i, j) = t;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.at(i, j) * &v[j]).sum())
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[a] += f * row[b]
    fn add_row(&mut self, a: usize, b: usize, f: &BigInt) {
        for j in 0..self.cols {
            let t = self.at(a, j) + f * self.at(b, j);
            *self.at_mut(a, j) = t;
        }
    }

    fn add_col(&mut self, a: usize, b: usize, f: &BigInt) {
        for i in 0..self.rows {
            let t = self.at(i, a) + f * self.at(i, b);
            *self.at_mut(i, a) = t;
        }
    }

    fn negate_row(&mut self, a: usize) {
        for j in 0..self.cols {
            let t = -self.at(a, j).clone();
            *self.at_mut(a, j) = t;
        }
    }

}

/// Smith normal form `u * a * w = d` with `u`, `w` unimodular and `d`
/// diagonal with each diagonal entry dividing the next.
#[derive(Clone, Debug)]
pub struct Smith {
    pub d: IMat,
    pub u: IMat,
    pub w: IMat,
    /// Number of nonzero diagonal entries.
    pub rank: usize,
}

pub fn smith_normal_form(a: &IMat) -> Smith {
    let mut d = a.clone();
    let mut u = IMat::identity(a.rows);
    let mut w = IMat::identity(a.cols);
    let n = a.rows.min(a.cols);
    let mut t = 0;
    while t < n {
        // Find a nonzero pivot in the remaining block.
        let mut pivot = None;
        'find: for i in t..d.rows {
            for j in t..d.cols {
                if !d.at(i, j).is_zero() {
                    pivot = Some((i, j));
                    break 'find;
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        d.swap_rows(t, pi);
        u.swap_rows(t, pi);
        d.swap_cols(t, pj);
        w.swap_cols(t, pj);
        loop {
            // Clear column t with row operations.
            let mut again = false;
            for i in t + 1..d.rows {
                if !d.at(i, t).is_zero() {
                    let q = div_round(d.at(i, t), d.at(t, t));
                    if !q.is_zero() {
                        let nq = -q;
                        d.add_row(i, t, &nq);
                        u.add_row(i, t, &nq);
                    }
                    if !d.at(i, t).is_zero() {
                        // Remainder smaller than pivot: swap up and restart.
                        d.swap_rows(t, i);
                        u.swap_rows(t, i);
                        again = true;
                    }
                }
            }
            for j in t + 1..d.cols {
                if !d.at(t, j).is_zero() {
                    let q = div_round(d.at(t, j), d.at(t, t));
                    if !q.is_zero() {
                        let nq = -q;
                        d.add_col(j, t, &nq);
                        w.add_col(j, t, &nq);
                    }
                    if !d.at(t, j).is_zero() {
                        d.swap_cols(t, j);
                        w.swap_cols(t, j);
                        again = true;
                    }
                }
            }
            if !again {
                break;
            }
        }
        t += 1;
    }
    // Positive diagonal.
    for i in 0..n {
        if d.at(i, i).is_negative() {
            d.negate_row(i);
            u.negate_row(i);
        }
    }
    // Enforce the divisibility chain.
    loop {
        let mut fixed = true;
        for i in 0..n.saturating_sub(1) {
            let (a_i, a_n) = (d.at(i, i).clone(), d.at(i + 1, i + 1).clone());
            if a_i.is_zero() && !a_n.is_zero() {
                d.swap_rows(i, i + 1);
                u.swap_rows(i, i + 1);
                d.swap_cols(i, i + 1);
                w.swap_cols(i, i + 1);
                fixed = false;
            } else if !a_i.is_zero() && !(&a_n % &a_i).is_zero() {
                // Standard 2x2 fix: add column i+1 to column i, then clear.
                d.add_col(i, i + 1, &BigInt::one());
                w.add_col(i, i + 1, &BigInt::one());
                let sub = fix_block(&mut d, &mut u, &mut w, i);
                debug_assert!(sub);
                fixed = false;
            }
        }
        if fixed {
            break;
        }
    }
    let rank = (0..n).filter(|&i| !d.at(i, i).is_zero()).count();
    Smith { d, u, w, rank }
}

/// Clear the 2x2 block starting at `i` after a divisibility merge.
fn fix_block(d: &mut IMat, u: &mut IMat, w: &mut IMat, i: usize) -> bool {
    // Euclidean steps on rows i, i+1 and columns i, i+1 only.
    loop {
        if d.at(i + 1, i).is_zero() && d.at(i, i + 1).is_zero() {
            if d.at(i, i).is_negative() {
                d.negate_row(i);
                u.negate_row(i);
            }
            if d.at(i + 1, i + 1).is_negative() {
                d.negate_row(i + 1);
                u.negate_row(i + 1);
            }
            return true;
        }
        if !d.at(i + 1, i).is_zero() {
            if d.at(i, i).is_zero() || magnitude_lt(d.at(i + 1, i), d.at(i, i)) {
                d.swap_rows(i, i + 1);
                u.swap_rows(i, i + 1);
            }
            let q = div_round(d.at(i + 1, i), d.at(i, i));
            let nq = -q;
            d.add_row(i + 1, i, &nq);
            u.add_row(i + 1, i, &nq);
        }
        if !d.at(i, i + 1).is_zero() {
            if d.at(i, i).is_zero() || magnitude_lt(d.at(i, i + 1), d.at(i, i)) {
                d.swap_cols(i, i + 1);
                w.swap_cols(i, i + 1);
            }
            if !d.at(i, i + 1).is_zero() {
                let q = div_round(d.at(i, i + 1), d.at(i, i));
                let nq = -q;
                d.add_col(i + 1, i, &nq);
                w.add_col(i + 1, i, &nq);
            }
        }
    }
}

fn magnitude_lt(a: &BigInt, b: &BigInt) -> bool {
    a.abs() < b.abs()
}

/// Rounded division used by the Euclidean steps (minimises the remainder).
fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    let (q, r) = (a / b, a % b);
    if (&r + &r).abs() > b.abs() {
        if (r.is_negative()) == (b.is_negative()) {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}

/// Exact inverse of a unimodular integer matrix via rational elimination.
pub fn unimodular_inverse(m: &IMat) -> IMat {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    let mut aug = QMat::zero(n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            *aug.at_mut(i, j) = Rat::from_integer(m.at(i, j).clone());
        }
        *aug.at_mut(i, n + i) = Rat::one();
    }
    let pivots = aug.rref();
    assert_eq!(pivots.len(), n, "matrix not invertible");
    let mut out = IMat::zero(n, n);
    for i in 0..n {
        for j in 0..n {
            let v = aug.at(i, n + j);
            assert!(v.denom().is_one(), "inverse not integral");
            *out.at_mut(i, j) = v.numer().clone();
        }
    }
    out
}

/// Determinant by fraction-free expansion (small matrices only).
pub fn det_i64(m: &[Vec<i64>]) -> i64 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    assert!(m.iter().all(|r| r.len() == n));
    let mut cols: Vec<usize> = (0..n).collect();
    fn go(m: &[Vec<i64>], row: usize, cols: &mut Vec<usize>) -> i64 {
        if cols.is_empty() {
            return 1;
        }
        let mut acc = 0i64;
        for k in 0..cols.len() {
            let c = cols.remove(k);
            let sub = go(m, row + 1, cols);
            let sign = if k % 2 == 0 { 1 } else { -1 };
            acc += sign * m[row][c] * sub;
            cols.insert(k, c);
        }
        acc
    }
    go(m, 0, &mut cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat_int;

    fn q(v: i64) -> Rat {
        rat_int(v)
    }

    #[test]
    fn rref_rank_kernel() {
        let m = QMat::from_rows(vec![
            vec![q(1), q(0), q(1)],
            vec![q(0), q(1), q(1)],
            vec![q(1), q(1), q(2)],
        ]);
        assert_eq!(m.rank(), 2);
        let ker = m.kernel();
        assert_eq!(ker.len(), 1);
        // Kernel vector (−1, −1, 1) up to scale.
        let k = &ker[0];
        assert_eq!(k[0], -k[2].clone());
        assert_eq!(k[1], -k[2].clone());
    }

    #[test]
    fn subspace_ops() {
        let e12 = Subspace::span(3, &[vec![q(1), q(0), q(0)], vec![q(0), q(1), q(0)]]);
        let e13 = Subspace::span(3, &[vec![q(1), q(0), q(0)], vec![q(0), q(0), q(1)]]);
        let meet = e12.intersect(&e13);
        assert_eq!(meet.dim(), 1);
        assert!(meet.basis[0][1].is_zero() && meet.basis[0][2].is_zero());
        let join = e12.sum(&e13);
        assert_eq!(join.dim(), 3);
        assert_eq!(join, Subspace::full(3));
    }

    #[test]
    fn smith_p2_rays() {
        // Ray matrix of the projective plane: invariant factors (1, 1).
        let a = IMat::from_rows_i64(&[vec![1, 0], vec![0, 1], vec![-1, -1]]);
        let s = smith_normal_form(&a);
        assert_eq!(s.rank, 2);
        assert_eq!(*s.d.at(0, 0), BigInt::one());
        assert_eq!(*s.d.at(1, 1), BigInt::one());
        // u * a * w == d
        let prod = s.u.mul(&a).mul(&s.w);
        assert_eq!(prod, s.d);
    }

    #[test]
    fn smith_divisibility_chain() {
        let a = IMat::from_rows_i64(&[vec![2, 0], vec![0, 3]]);
        let s = smith_normal_form(&a);
        assert_eq!(*s.d.at(0, 0), BigInt::one());
        assert_eq!(*s.d.at(1, 1), BigInt::from(6));
        let prod = s.u.mul(&a).mul(&s.w);
        assert_eq!(prod, s.d);
    }

    #[test]
    fn smith_random_consistency() {
        // A few fixed matrices: u*a*w = d and diagonal divisibility.
        let cases = vec![
            vec![vec![1, 0], vec![1, 2], vec![-1, 1]],
            vec![vec![4, 6, 2], vec![2, 2, 2]],
            vec![vec![0, 0], vec![0, 0]],
            vec![vec![3]],
        ];
        for rows in cases {
            let a = IMat::from_rows_i64(&rows);
            let s = smith_normal_form(&a);
            assert_eq!(s.u.mul(&a).mul(&s.w), s.d);
            let n = a.rows.min(a.cols);
            for i in 0..n.saturating_sub(1) {
                let (x, y) = (s.d.at(i, i), s.d.at(i + 1, i + 1));
                if !x.is_zero() && !y.is_zero() {
                    assert!((y % x).is_zero());
                }
                if x.is_zero() {
                    assert!(y.is_zero());
                }
            }
        }
    }

    #[test]
    fn det_small() {
        assert_eq!(det_i64(&[vec![1, 0], vec![1, 2]]), 2);
        assert_eq!(det_i64(&[vec![1, 1], vec![0, 1]]), 1);
        assert_eq!(det_i64(&[]), 1);
    }
}
