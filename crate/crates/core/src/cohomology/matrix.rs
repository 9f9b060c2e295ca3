//! Exact integer matrices: Smith normal form with verified transforms, and
//! rank computations over the rationals and prime fields.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// A dense row-major integer matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zero(rows: usize, cols: usize) -> IntMatrix {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> IntMatrix {
        let mut m = IntMatrix::zero(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> i64) -> IntMatrix {
        let mut m = IntMatrix::zero(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, BigInt::from(f(i, j)));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = IntMatrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let add = a * other.get(k, j);
                    let cur = out.get(i, j) + add;
                    out.set(i, j, cur);
                }
            }
        }
        out
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

    /// row a += q * row b
    fn add_row(&mut self, a: usize, b: usize, q: &BigInt) {
        for j in 0..self.cols {
            let add = q * self.get(b, j);
            let v = self.get(a, j) + add;
            self.set(a, j, v);
        }
    }

    /// col a += q * col b
    fn add_col(&mut self, a: usize, b: usize, q: &BigInt) {
        for i in 0..self.rows {
            let add = q * self.get(i, b);
            let v = self.get(i, a) + add;
            self.set(i, a, v);
        }
    }

    fn negate_row(&mut self, a: usize) {
        for j in 0..self.cols {
            let v = -self.get(a, j);
            self.set(a, j, v);
        }
    }

    /// Fraction-free determinant (Bareiss).
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant needs a square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a.get(k, k).is_zero() {
                let Some(r) = (k + 1..n).find(|&r| !a.get(r, k).is_zero()) else {
                    return BigInt::zero();
                };
                a.swap_rows(k, r);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = a.get(k, k) * a.get(i, j) - a.get(i, k) * a.get(k, j);
                    a.set(i, j, &num / &prev);
                }
            }
            prev = a.get(k, k).clone();
        }
        sign * a.get(n - 1, n - 1).clone()
    }
}

/// Verified factorization U·A·V = D with D diagonal under a divisibility
/// chain and U, V unimodular.
#[derive(Clone, Debug)]
pub struct SmithNormalForm {
    pub d: IntMatrix,
    pub u: IntMatrix,
    pub v: IntMatrix,
    pub invariant_factors: Vec<BigInt>,
}

impl SmithNormalForm {
    pub fn rank(&self) -> usize {
        self.invariant_factors.len()
    }
}

pub fn smith_normal_form(a: &IntMatrix) -> SmithNormalForm {
    let mut d = a.clone();
    let mut u = IntMatrix::identity(a.rows());
    let mut v = IntMatrix::identity(a.cols());
    let n = a.rows().min(a.cols());
    let mut t = 0;
    while t < n {
        // pivot: a nonzero entry of minimal absolute value keeps growth down
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..d.rows() {
            for j in t..d.cols() {
                if d.get(i, j).is_zero() {
                    continue;
                }
                let better = match pivot {
                    Some((pi, pj)) => d.get(i, j).abs() < d.get(pi, pj).abs(),
                    None => true,
                };
                if better {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        d.swap_rows(t, pi);
        u.swap_rows(t, pi);
        d.swap_cols(t, pj);
        v.swap_cols(t, pj);
        // clear the pivot row and column
        let mut dirty = false;
        for i in t + 1..d.rows() {
            if !d.get(i, t).is_zero() {
                let q = -(d.get(i, t) / d.get(t, t));
                d.add_row(i, t, &q);
                u.add_row(i, t, &q);
                if !d.get(i, t).is_zero() {
                    dirty = true;
                }
            }
        }
        for j in t + 1..d.cols() {
            if !d.get(t, j).is_zero() {
                let q = -(d.get(t, j) / d.get(t, t));
                d.add_col(j, t, &q);
                v.add_col(j, t, &q);
                if !d.get(t, j).is_zero() {
                    dirty = true;
                }
            }
        }
        if dirty {
            continue;
        }
        // pivot must divide the remaining block; if not, fold the offending
        // row in and restart this position
        let offender = (t + 1..d.rows())
            .flat_map(|i| (t + 1..d.cols()).map(move |j| (i, j)))
            .find(|&(i, j)| !(d.get(i, j) % d.get(t, t)).is_zero());
        if let Some((i, _)) = offender {
            d.add_row(t, i, &BigInt::one());
            u.add_row(t, i, &BigInt::one());
            continue;
        }
        if d.get(t, t).is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
        t += 1;
    }
    let invariant_factors: Vec<BigInt> = (0..n)
        .map(|i| d.get(i, i).clone())
        .take_while(|x| !x.is_zero())
        .collect();
    let snf = SmithNormalForm { d, u, v, invariant_factors };
    verify_snf(a, &snf);
    snf
}

fn verify_snf(a: &IntMatrix, snf: &SmithNormalForm) {
    assert_eq!(snf.u.mul(a).mul(&snf.v), snf.d, "U*A*V != D");
    let det_u = snf.u.determinant();
    let det_v = snf.v.determinant();
    assert!(
        (det_u.abs().is_one()) && (det_v.abs().is_one()),
        "transform not unimodular"
    );
    for i in 0..snf.d.rows() {
        for j in 0..snf.d.cols() {
            if i != j {
                assert!(snf.d.get(i, j).is_zero(), "D not diagonal");
            }
        }
    }
    for w in snf.invariant_factors.windows(2) {
        assert!((&w[1] % &w[0]).is_zero(), "divisibility chain broken");
    }
}

/// Exact rank via Gaussian elimination over the rationals. Independent of
/// the Smith normal form path.
pub fn rank_over_rationals(a: &IntMatrix) -> usize {
    let mut m: Vec<Vec<BigRational>> = (0..a.rows())
        .map(|i| {
            (0..a.cols())
                .map(|j| BigRational::from_integer(a.get(i, j).clone()))
                .collect()
        })
        .collect();
    let mut rank = 0;
    for col in 0..a.cols() {
        let Some(p) = (rank..a.rows()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let inv = m[rank][col].recip();
        for j in col..a.cols() {
            m[rank][j] = &m[rank][j] * &inv;
        }
        for r in 0..a.rows() {
            if r != rank && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for j in col..a.cols() {
                    m[r][j] = &m[r][j] - &f * &m[rank][j];
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Rank over the field with `q` elements; `q` must be prime.
pub fn rank_mod_prime(a: &IntMatrix, q: u64) -> usize {
    assert!(q >= 2, "modulus must be at least 2");
    let qi = BigInt::from(q);
    let reduce = |x: &BigInt| -> u64 {
        let r = ((x % &qi) + &qi) % &qi;
        u64::try_from(r).expect("residue fits")
    };
    let mut m: Vec<Vec<u64>> = (0..a.rows())
        .map(|i| (0..a.cols()).map(|j| reduce(a.get(i, j))).collect())
        .collect();
    let inv = |x: u64| -> u64 {
        // Fermat inverse, valid for prime q
        let mut base = x as u128;
        let mut exp = q - 2;
        let mut acc: u128 = 1;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % q as u128;
            }
            base = base * base % q as u128;
            exp >>= 1;
        }
        acc as u64
    };
    let mut rank = 0;
    for col in 0..a.cols() {
        let Some(p) = (rank..a.rows()).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(rank, p);
        let f = inv(m[rank][col]);
        for j in col..a.cols() {
            m[rank][j] = (m[rank][j] as u128 * f as u128 % q as u128) as u64;
        }
        for r in 0..a.rows() {
            if r != rank && m[r][col] != 0 {
                let f = m[r][col] as u128;
                for j in col..a.cols() {
                    let sub = f * m[rank][j] as u128 % q as u128;
                    m[r][j] = ((m[r][j] as u128 + q as u128 - sub) % q as u128) as u64;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// A rational basis of the null space of `a`, cleared to integer vectors.
pub fn kernel_basis(a: &IntMatrix) -> Vec<Vec<BigInt>> {
    let mut m: Vec<Vec<BigRational>> = (0..a.rows())
        .map(|i| {
            (0..a.cols())
                .map(|j| BigRational::from_integer(a.get(i, j).clone()))
                .collect()
        })
        .collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut rank = 0;
    for col in 0..a.cols() {
        let Some(p) = (rank..a.rows()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let inv = m[rank][col].recip();
        for j in col..a.cols() {
            m[rank][j] = &m[rank][j] * &inv;
        }
        for r in 0..a.rows() {
            if r != rank && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for j in col..a.cols() {
                    m[r][j] = &m[r][j] - &f * &m[rank][j];
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    let mut basis = Vec::new();
    for free in 0..a.cols() {
        if pivots.contains(&free) {
            continue;
        }
        let mut vec_q = vec![BigRational::zero(); a.cols()];
        vec_q[free] = BigRational::one();
        for (r, &pc) in pivots.iter().enumerate() {
            vec_q[pc] = -m[r][free].clone();
        }
        // clear denominators
        let lcm = vec_q
            .iter()
            .fold(BigInt::one(), |acc, x| num_integer::lcm(acc, x.denom().clone()));
        basis.push(
            vec_q
                .into_iter()
                .map(|x| x.numer() * (&lcm / x.denom()))
                .collect(),
        );
    }
    basis
}
