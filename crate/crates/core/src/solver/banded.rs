//! Banded LU without pivoting, for the lattice-ordered Jacobians.

use crate::error::{Error, Result};

/// Square matrix with entries only on `|i − j| ≤ bw`, stored row by row.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        BandedMatrix {
            n,
            bw,
            data: vec![0.0; n * (2 * bw + 1)],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        debug_assert!(i.abs_diff(j) <= self.bw, "entry ({i}, {j}) outside band {}", self.bw);
        i * (2 * self.bw + 1) + (j + self.bw - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i.abs_diff(j) > self.bw {
            0.0
        } else {
            self.data[self.at(i, j)]
        }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.at(i, j);
        self.data[k] += v;
    }

    /// Overwrites row `i` from `(column, value)` pairs (duplicates are summed).
    pub fn set_row(&mut self, i: usize, entries: &[(usize, f64)]) {
        let w = 2 * self.bw + 1;
        self.data[i * w..(i + 1) * w].fill(0.0);
        for &(j, v) in entries {
            self.add(i, j, v);
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.bw);
                let hi = (i + self.bw).min(self.n - 1);
                (lo..=hi).map(|j| self.data[self.at(i, j)] * x[j]).sum()
            })
            .collect()
    }

    /// In-place Doolittle factorization. Fails on a pivot that is tiny
    /// relative to its original row.
    pub fn factor(mut self) -> Result<BandedLu> {
        let (n, bw) = (self.n, self.bw);
        let w = 2 * bw + 1;
        let scale: Vec<f64> = (0..n)
            .map(|i| self.data[i * w..(i + 1) * w].iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .collect();
        for k in 0..n {
            let pivot = self.data[k * w + bw];
            if !(pivot.abs() > 1e-14 * scale[k]) || !pivot.is_finite() {
                return Err(Error::SingularJacobian { row: k, pivot });
            }
            let hi = (k + bw).min(n - 1);
            let (head, tail) = self.data.split_at_mut((k + 1) * w);
            // row k, columns k+1..=hi
            let urow = &head[k * w + bw + 1..k * w + bw + 1 + (hi - k)];
            for i in (k + 1)..=hi {
                let row = &mut tail[(i - k - 1) * w..(i - k) * w];
                // column k sits at offset k + bw − i
                let lk = k + bw - i;
                let l = row[lk] / pivot;
                row[lk] = l;
                if l != 0.0 {
                    for (dst, u) in row[lk + 1..lk + 1 + (hi - k)].iter_mut().zip(urow) {
                        *dst -= l * u;
                    }
                }
            }
        }
        Ok(BandedLu { m: self })
    }
}

#[derive(Debug, Clone)]
pub struct BandedLu {
    m: BandedMatrix,
}

impl BandedLu {
    /// Solves `A x = b`, overwriting `b` with `x`.
    pub fn solve(&self, b: &mut [f64]) {
        let (n, bw) = (self.m.n, self.m.bw);
        let w = 2 * bw + 1;
        let d = &self.m.data;
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let mut acc = b[i];
            for j in lo..i {
                acc -= d[i * w + j + bw - i] * b[j];
            }
            b[i] = acc;
        }
        for i in (0..n).rev() {
            let hi = (i + bw).min(n - 1);
            let mut acc = b[i];
            for j in (i + 1)..=hi {
                acc -= d[i * w + j + bw - i] * b[j];
            }
            b[i] = acc / d[i * w + bw];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn solves_random_diagonally_dominant_system() {
        let (n, bw) = (60, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut a = BandedMatrix::zeros(n, bw);
        for i in 0..n {
            for j in i.saturating_sub(bw)..=(i + bw).min(n - 1) {
                let v: f64 = rng.random_range(-1.0..1.0);
                a.add(i, j, if i == j { v + 20.0 } else { v });
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut b = a.mul_vec(&x);
        a.factor().unwrap().solve(&mut b);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_pivot_reported() {
        let mut a = BandedMatrix::zeros(3, 1);
        a.set_row(0, &[(0, 1.0), (1, 1.0)]);
        a.set_row(1, &[(0, 1.0), (1, 1.0), (2, 1.0)]);
        a.set_row(2, &[(1, 1.0), (2, 1.0)]);
        assert!(matches!(a.factor(), Err(Error::SingularJacobian { row: 1, .. })));
    }
}
