//! Banded matrix storage and LU factorization with partial pivoting
//! (LAPACK-style band layout with `kl` spare superdiagonals for fill-in).

use crate::{Error, Result};

/// Square banded matrix with `kl` subdiagonals and `ku` superdiagonals.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    /// column-major band storage with `2 kl + ku + 1` rows per column;
    /// entry (i, j) sits at `data[j * ldab + kl + ku + i - j]`
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            data: vec![0.0; ldab * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    #[inline]
    fn ldab(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    #[inline]
    fn in_band(&self, i: usize, j: usize) -> bool {
        i + self.ku >= j && j + self.kl >= i
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[j * self.ldab() + self.kl + self.ku + i - j]
        } else {
            0.0
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            self.in_band(i, j),
            "entry ({i}, {j}) outside band (kl={}, ku={})",
            self.kl,
            self.ku
        );
        let idx = j * self.ldab() + self.kl + self.ku + i - j;
        self.data[idx] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        if v == 0.0 {
            return;
        }
        assert!(
            self.in_band(i, j),
            "entry ({i}, {j}) outside band (kl={}, ku={})",
            self.kl,
            self.ku
        );
        let idx = j * self.ldab() + self.kl + self.ku + i - j;
        self.data[idx] += v;
    }

    /// Zeroes a whole row inside the band.
    pub fn zero_row(&mut self, i: usize) {
        let lo = i.saturating_sub(self.kl);
        let hi = (i + self.ku).min(self.n - 1);
        for j in lo..=hi {
            let idx = j * self.ldab() + self.kl + self.ku + i - j;
            self.data[idx] = 0.0;
        }
    }

    /// y = A x.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            for i in lo..=hi {
                y[i] += self.data[j * self.ldab() + self.kl + self.ku + i - j] * xj;
            }
        }
        y
    }

    /// C = alpha * A + beta * B entrywise (same shape required).
    pub fn linear_combination(alpha: f64, a: &Self, beta: f64, b: &Self) -> Self {
        assert_eq!(a.n, b.n);
        assert_eq!(a.kl, b.kl);
        assert_eq!(a.ku, b.ku);
        let mut c = Self::zeros(a.n, a.kl, a.ku);
        for (idx, v) in c.data.iter_mut().enumerate() {
            *v = alpha * a.data[idx] + beta * b.data[idx];
        }
        c
    }

    /// LU factorization with row partial pivoting.
    pub fn factor(&self) -> Result<BandLu> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let kv = kl + ku; // effective upper bandwidth after pivoting
        let ldab = self.ldab();
        let mut a = self.data.clone();
        let mut ipiv = vec![0usize; n];
        let at = |j: usize, i: usize| j * ldab + kl + ku + i - j;
        for j in 0..n {
            // pivot search in column j, rows j..=j+kl
            let i_max = (j + kl).min(n - 1);
            let mut p = j;
            let mut pmax = a[at(j, j)].abs();
            for i in j + 1..=i_max {
                let v = a[at(j, i)].abs();
                if v > pmax {
                    pmax = v;
                    p = i;
                }
            }
            ipiv[j] = p;
            if pmax == 0.0 {
                return Err(Error::SingularMatrix(format!(
                    "zero pivot in banded LU at column {j}"
                )));
            }
            let j_hi = (j + kv).min(n - 1);
            if p != j {
                for c in j..=j_hi {
                    a.swap(at(c, j), at(c, p));
                }
            }
            let piv = a[at(j, j)];
            for i in j + 1..=i_max {
                a[at(j, i)] /= piv;
            }
            for c in j + 1..=j_hi {
                let ajc = a[at(c, j)];
                if ajc != 0.0 {
                    for i in j + 1..=i_max {
                        let m = a[at(j, i)];
                        a[at(c, i)] -= m * ajc;
                    }
                }
            }
        }
        Ok(BandLu {
            n,
            kl,
            ku,
            data: a,
            ipiv,
        })
    }
}

/// Factored form produced by [`BandMatrix::factor`].
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<f64>,
    ipiv: Vec<usize>,
}

impl BandLu {
    /// Solves A x = b in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let kv = kl + ku;
        let ldab = 2 * kl + ku + 1;
        let at = |j: usize, i: usize| j * ldab + kl + ku + i - j;
        // forward substitution with pivoting
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let bj = b[j];
            if bj != 0.0 {
                let i_max = (j + kl).min(n - 1);
                for i in j + 1..=i_max {
                    b[i] -= self.data[at(j, i)] * bj;
                }
            }
        }
        // back substitution on U (bandwidth kv)
        for j in (0..n).rev() {
            let bj = b[j] / self.data[at(j, j)];
            b[j] = bj;
            if bj != 0.0 {
                let lo = j.saturating_sub(kv);
                for i in lo..j {
                    b[i] -= self.data[at(j, i)] * bj;
                }
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
