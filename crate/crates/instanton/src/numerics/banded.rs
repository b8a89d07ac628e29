//! Banded linear systems solved by Gaussian elimination with partial pivoting.

/// Square band matrix with `kl` sub- and `ku` super-diagonals.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    // row-major; entry (i, j) lives at i*width + (j + kl - i), room for kl fill-in above
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    /// Adds `v` to entry (i, j); panics outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "entry ({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    /// Solves `A x = b` in place; the matrix is consumed by the factorization.
    /// Returns `false` when a zero pivot makes the system singular.
    pub fn solve(mut self, b: &mut [f64]) -> bool {
        let n = self.n;
        let kl = self.kl;
        let ku_fill = self.ku + self.kl;
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.idx(k, k)].abs();
            for i in k + 1..=last {
                let v = self.data[self.idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return false;
            }
            let jmax = (k + ku_fill).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let a = self.idx(k, j);
                    let c = self.idx(p, j);
                    self.data.swap(a, c);
                }
                b.swap(k, p);
            }
            let piv = self.data[self.idx(k, k)];
            for i in k + 1..=last {
                let ik = self.idx(i, k);
                let f = self.data[ik] / piv;
                if f == 0.0 {
                    continue;
                }
                self.data[ik] = 0.0;
                for j in k + 1..=jmax {
                    let kj = self.idx(k, j);
                    let ij = self.idx(i, j);
                    self.data[ij] -= f * self.data[kj];
                }
                b[i] -= f * b[k];
            }
        }
        for k in (0..n).rev() {
            let jmax = (k + ku_fill).min(n - 1);
            let mut s = b[k];
            for j in k + 1..=jmax {
                s -= self.data[self.idx(k, j)] * b[j];
            }
            b[k] = s / self.data[self.idx(k, k)];
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pentadiagonal_with_pivoting() {
        let n = 12;
        let mut a = BandMatrix::zeros(n, 2, 2);
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i.saturating_sub(2)..(i + 3).min(n) {
                let v = if i == j { 0.01 * (i as f64 + 1.0) } else { 1.0 + ((i * 3 + j * 5) % 7) as f64 };
                a.add(i, j, v);
                dense[i][j] = v;
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 2.0).collect();
        let mut b: Vec<f64> = (0..n).map(|i| (0..n).map(|j| dense[i][j] * x[j]).sum()).collect();
        assert!(a.solve(&mut b));
        for i in 0..n {
            assert!((b[i] - x[i]).abs() < 1e-9, "{} {}", b[i], x[i]);
        }
    }
}
