//! Lowest eigenpairs of real symmetric tridiagonal matrices by Sturm-sequence
//! bisection and inverse iteration.

/// Symmetric tridiagonal matrix with diagonal `d` and off-diagonal `e` (`e.len() == d.len() - 1`).
#[derive(Debug, Clone)]
pub struct SymTridiag {
    pub d: Vec<f64>,
    pub e: Vec<f64>,
}

impl SymTridiag {
    pub fn new(d: Vec<f64>, e: Vec<f64>) -> Self {
        assert_eq!(e.len() + 1, d.len());
        SymTridiag { d, e }
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.d.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.e[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.e[i].abs() } else { 0.0 };
            lo = lo.min(self.d[i] - r);
            hi = hi.max(self.d[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn sturm_count(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = self.d[0] - x;
        let tiny = f64::MIN_POSITIVE.sqrt();
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.d.len() {
            if q == 0.0 {
                q = tiny;
            }
            q = self.d[i] - x - self.e[i - 1] * self.e[i - 1] / q;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k` smallest eigenvalues in ascending order.
    pub fn lowest_eigenvalues(&self, k: usize) -> Vec<f64> {
        let (glo, ghi) = self.gershgorin();
        let k = k.min(self.d.len());
        let mut out = Vec::with_capacity(k);
        let mut lower = glo;
        for i in 0..k {
            let (mut lo, mut hi) = (lower, ghi);
            while hi - lo > 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if self.sturm_count(mid) > i {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let ev = 0.5 * (lo + hi);
            out.push(ev);
            lower = lo;
        }
        out
    }

    /// Unit eigenvector for an (accurate) eigenvalue `lambda` by inverse iteration.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.d.len();
        let (glo, ghi) = self.gershgorin();
        let scale = glo.abs().max(ghi.abs()).max(1e-300);
        let shift = lambda + 8.0 * f64::EPSILON * scale;
        let lu = TridiagLu::factor(&self.e, &self.d.iter().map(|v| v - shift).collect::<Vec<_>>(), &self.e);
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919 % 97) as f64 / 97.0)).collect();
        for _ in 0..4 {
            lu.solve(&mut v);
            let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= nrm);
        }
        v
    }

    /// Lowest `k` eigenpairs with mutually orthonormal vectors.
    pub fn lowest_eigenpairs(&self, k: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
        let vals = self.lowest_eigenvalues(k);
        let mut vecs: Vec<Vec<f64>> = Vec::with_capacity(vals.len());
        for &lam in &vals {
            let mut v = self.eigenvector(lam);
            for _ in 0..2 {
                for u in &vecs {
                    let p: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                    v.iter_mut().zip(u).for_each(|(x, y)| *x -= p * y);
                }
                let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.iter_mut().for_each(|x| *x /= nrm);
            }
            vecs.push(v);
        }
        (vals, vecs)
    }
}

/// LU factorization of a general tridiagonal matrix with partial pivoting.
#[derive(Debug, Clone)]
pub struct TridiagLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    ipiv: Vec<bool>,
}

impl TridiagLu {
    /// `dl` sub-diagonal, `d` diagonal, `du` super-diagonal.
    pub fn factor(dl: &[f64], d: &[f64], du: &[f64]) -> Self {
        let n = d.len();
        let mut dl = dl.to_vec();
        let mut d = d.to_vec();
        let mut du = du.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut ipiv = vec![false; n];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = f64::MIN_POSITIVE.sqrt();
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                ipiv[i] = true;
            }
        }
        if n > 0 && d[n - 1] == 0.0 {
            d[n - 1] = f64::MIN_POSITIVE.sqrt();
        }
        TridiagLu { dl, d, du, du2, ipiv }
    }

    pub fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.ipiv[i] {
                b.swap(i, i + 1);
                b[i + 1] -= self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        if n == 0 {
            return;
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacian_spectrum() {
        let n = 50;
        let t = SymTridiag::new(vec![2.0; n], vec![-1.0; n - 1]);
        let (vals, vecs) = t.lowest_eigenpairs(3);
        for (j, v) in vals.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((j + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-13);
        }
        let p: f64 = vecs[0].iter().zip(&vecs[1]).map(|(a, b)| a * b).sum();
        assert!(p.abs() < 1e-12);
    }

    #[test]
    fn lu_solves() {
        let dl = [1.0, 3.0, -2.0];
        let d = [0.5, 1.0, 4.0, 2.0];
        let du = [2.0, -1.0, 1.0];
        let lu = TridiagLu::factor(&dl, &d, &du);
        let x = [1.0, -2.0, 0.5, 3.0];
        let mut b = vec![
            d[0] * x[0] + du[0] * x[1],
            dl[0] * x[0] + d[1] * x[1] + du[1] * x[2],
            dl[1] * x[1] + d[2] * x[2] + du[2] * x[3],
            dl[2] * x[2] + d[3] * x[3],
        ];
        lu.solve(&mut b);
        for i in 0..4 {
            assert!((b[i] - x[i]).abs() < 1e-12);
        }
    }
}
