//! Banded symmetric kernels: inertia counts, QL with selected eigenvector
//! rows, banded LU with partial pivoting, and resolvent diagonals.

use nalgebra::{Complex, DMatrix, SymmetricEigen};

/// Shift applied when a pivot comes within `PIVOT_FLOOR` of breakdown.
pub const JITTER: f64 = 1e-10;
const PIVOT_FLOOR: f64 = 1e-12;

/// Symmetric banded matrix: `bands[k - 1][i]` is entry `(i, i + k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymBanded {
    pub diag: Vec<f64>,
    pub bands: Vec<Vec<f64>>,
}

impl SymBanded {
    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn band_width(&self) -> usize {
        self.bands.len()
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        match j - i {
            0 => self.diag[i],
            k if k <= self.bands.len() => self.bands[k - 1][i],
            _ => 0.0,
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.size();
        let d = self.band_width();
        DMatrix::from_fn(n, n, |i, j| if i.abs_diff(j) <= d { self.entry(i, j) } else { 0.0 })
    }

    /// `max_i sum_j |a_ij|`, an upper bound for the spectral radius.
    pub fn gershgorin_bound(&self) -> f64 {
        let n = self.size();
        let d = self.band_width();
        (0..n)
            .map(|i| {
                let lo = i.saturating_sub(d);
                let hi = (i + d).min(n - 1);
                (lo..=hi).map(|j| self.entry(i, j).abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Number of eigenvalues strictly below `e`.
    pub fn count_below(&self, e: f64) -> usize {
        match self.try_count(e) {
            Some(c) => c,
            None => self
                .try_count(e - JITTER)
                .or_else(|| self.try_count(e + JITTER))
                .expect("inertia count failed after jitter"),
        }
    }

    fn try_count(&self, e: f64) -> Option<usize> {
        if self.band_width() <= 1 {
            sturm_count(&self.diag, self.bands.first().map_or(&[][..], |b| &b[..]), e)
        } else {
            self.ldl_count(e)
        }
    }

    /// Inertia of `A - e` from an unpivoted banded LDL^T factorization.
    fn ldl_count(&self, e: f64) -> Option<usize> {
        let n = self.size();
        let d = self.band_width();
        // l[i][k] = L(i, i - 1 - k)
        let mut l = vec![vec![0.0; d]; n];
        let mut piv = vec![0.0; n];
        let mut neg = 0;
        for j in 0..n {
            let lo = j.saturating_sub(d);
            let mut dj = self.diag[j] - e;
            for k in lo..j {
                let ljk = l[j][j - 1 - k];
                dj -= ljk * ljk * piv[k];
            }
            if dj.abs() < PIVOT_FLOOR {
                return None;
            }
            piv[j] = dj;
            if dj < 0.0 {
                neg += 1;
            }
            for i in j + 1..=(j + d).min(n - 1) {
                let mut s = self.entry(i, j);
                for k in i.saturating_sub(d)..j {
                    s -= l[i][i - 1 - k] * l[j][j - 1 - k] * piv[k];
                }
                l[i][i - 1 - j] = s / dj;
            }
        }
        Some(neg)
    }

    /// All eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.band_width() <= 1 {
            let off = self.bands.first().cloned().unwrap_or_default();
            tridiagonal_ql(&self.diag, &off, &[]).0
        } else {
            let mut ev: Vec<f64> = SymmetricEigen::new(self.to_dense()).eigenvalues.iter().cloned().collect();
            ev.sort_by(f64::total_cmp);
            ev
        }
    }

    /// Eigenvalues with the listed components of each normalized eigenvector.
    pub fn eigen_rows(&self, rows: &[usize]) -> (Vec<f64>, Vec<Vec<f64>>) {
        if self.band_width() <= 1 {
            let off = self.bands.first().cloned().unwrap_or_default();
            tridiagonal_ql(&self.diag, &off, rows)
        } else {
            let eig = SymmetricEigen::new(self.to_dense());
            let mut order: Vec<usize> = (0..self.size()).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            let values = order.iter().map(|&j| eig.eigenvalues[j]).collect();
            let comps = rows
                .iter()
                .map(|&r| order.iter().map(|&j| eig.eigenvectors[(r, j)]).collect())
                .collect();
            (values, comps)
        }
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection on inertia counts.
    pub fn kth_eigenvalue(&self, k: usize, tol: f64) -> f64 {
        let g = self.gershgorin_bound() + 1.0;
        let (mut lo, mut hi) = (-g, g);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
            if mid == lo && mid == hi {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Distance from `e` to the nearest eigenvalue.
    pub fn distance_to_spectrum(&self, e: f64, tol: f64) -> f64 {
        let c = self.count_below(e);
        let mut best = f64::INFINITY;
        if c > 0 {
            best = best.min(e - self.kth_eigenvalue(c - 1, tol));
        }
        if c < self.size() {
            best = best.min(self.kth_eigenvalue(c, tol) - e);
        }
        best.max(0.0)
    }
}

/// Sturm count for a symmetric tridiagonal matrix; `None` on pivot breakdown.
pub fn sturm_count(diag: &[f64], off: &[f64], e: f64) -> Option<usize> {
    let mut neg = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let b2 = if i > 0 { off[i - 1] * off[i - 1] } else { 0.0 };
        q = diag[i] - e - if i > 0 { b2 / q } else { 0.0 };
        if q.abs() < PIVOT_FLOOR {
            return None;
        }
        if q < 0.0 {
            neg += 1;
        }
    }
    Some(neg)
}

/// Implicit QL for a symmetric tridiagonal matrix. Returns the eigenvalues in
/// ascending order and, for each requested row `r`, the `r`-th component of
/// every normalized eigenvector (same order).
pub fn tridiagonal_ql(diag: &[f64], off: &[f64], rows: &[usize]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    let m = off.len().min(n.saturating_sub(1));
    e[..m].copy_from_slice(&off[..m]);
    // z[t][j]: component rows[t] of eigenvector j.
    let mut z: Vec<Vec<f64>> = rows
        .iter()
        .map(|&r| (0..n).map(|j| if j == r { 1.0 } else { 0.0 }).collect())
        .collect();

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter <= 200, "QL iteration did not converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for zt in z.iter_mut() {
                    let f = zt[i + 1];
                    zt[i + 1] = s * zt[i] + c * f;
                    zt[i] = c * zt[i] - s * f;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&j| d[j]).collect();
    let comps = z.iter().map(|zt| order.iter().map(|&j| zt[j]).collect()).collect();
    (values, comps)
}

/// LU factorization with partial pivoting of `A - shift` for a symmetric
/// banded `A`, stored by position with columns `[i - d, i + 2d]` per row.
pub struct BandedLu {
    n: usize,
    d: usize,
    w: usize,
    rows: Vec<f64>,
    pivots: Vec<usize>,
    multipliers: Vec<f64>,
}

impl BandedLu {
    pub fn new(a: &SymBanded, shift: f64) -> Self {
        let n = a.size();
        let d = a.band_width().max(1);
        let w = 3 * d + 1;
        let mut rows = vec![0.0; n * w];
        for i in 0..n {
            rows[i * w + d] = a.diag[i] - shift;
            for (k, band) in a.bands.iter().enumerate() {
                let k = k + 1;
                if i + k < n {
                    rows[i * w + d + k] = band[i];
                }
                if i >= k {
                    rows[i * w + d - k] = band[i - k];
                }
            }
        }
        let mut lu = BandedLu {
            n,
            d,
            w,
            rows,
            pivots: vec![0; n],
            multipliers: vec![0.0; n * d],
        };
        lu.factor(a.gershgorin_bound().max(1.0));
        lu
    }

    #[inline]
    fn get(&self, pos: usize, col: usize) -> f64 {
        if col + self.d < pos || col > pos + 2 * self.d {
            0.0
        } else {
            self.rows[pos * self.w + col + self.d - pos]
        }
    }

    #[inline]
    fn set(&mut self, pos: usize, col: usize, v: f64) {
        let i = pos * self.w + col + self.d - pos;
        self.rows[i] = v;
    }

    fn factor(&mut self, scale: f64) {
        let (n, d) = (self.n, self.d);
        for k in 0..n {
            let last = (k + d).min(n - 1);
            let p = (k..=last)
                .max_by(|&a, &b| self.get(a, k).abs().total_cmp(&self.get(b, k).abs()))
                .unwrap();
            self.pivots[k] = p;
            let hi = (k + 2 * d).min(n - 1);
            if p != k {
                for j in k..=hi {
                    let (a, b) = (self.get(k, j), self.get(p, j));
                    self.set(k, j, b);
                    self.set(p, j, a);
                }
            }
            if self.get(k, k).abs() < f64::EPSILON * scale {
                // Exact shift at an eigenvalue: perturb so inverse iteration still works.
                self.set(k, k, f64::EPSILON * scale);
            }
            let piv = self.get(k, k);
            for r in k + 1..=last {
                let m = self.get(r, k) / piv;
                self.multipliers[k * d + r - k - 1] = m;
                self.set(r, k, 0.0);
                if m != 0.0 {
                    for j in k + 1..=hi {
                        let v = self.get(r, j) - m * self.get(k, j);
                        self.set(r, j, v);
                    }
                }
            }
        }
    }

    pub fn solve(&self, b: &mut [f64]) {
        let (n, d) = (self.n, self.d);
        for k in 0..n {
            let p = self.pivots[k];
            b.swap(k, p);
            for r in k + 1..=(k + d).min(n - 1) {
                b[r] -= self.multipliers[k * d + r - k - 1] * b[k];
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..=(k + 2 * d).min(n - 1) {
                s -= self.get(k, j) * b[j];
            }
            b[k] = s / self.get(k, k);
        }
    }
}

/// Eigenvector for the eigenvalue nearest `shift` by inverse iteration,
/// normalized to unit Euclidean norm.
pub fn inverse_iteration(a: &SymBanded, shift: f64, iterations: usize) -> Vec<f64> {
    let n = a.size();
    let lu = BandedLu::new(a, shift);
    // A deterministic start vector with no special symmetry.
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_75).fract()).collect();
    for _ in 0..iterations.max(1) {
        lu.solve(&mut x);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
    }
    x
}

/// Diagonal entry `((A - z)^{-1})_{ii}` of a symmetric tridiagonal matrix.
pub fn resolvent_diagonal(diag: &[f64], off: &[f64], i: usize, z: Complex<f64>) -> Complex<f64> {
    let n = diag.len();
    let mut left = Complex::new(0.0, 0.0);
    for k in 0..i {
        let b2 = if k > 0 { off[k - 1] * off[k - 1] } else { 0.0 };
        left = (Complex::new(diag[k], 0.0) - z - left * b2).inv();
    }
    let mut right = Complex::new(0.0, 0.0);
    for k in (i + 1..n).rev() {
        let b2 = if k + 1 < n { off[k] * off[k] } else { 0.0 };
        right = (Complex::new(diag[k], 0.0) - z - right * b2).inv();
    }
    let bl = if i > 0 { off[i - 1] * off[i - 1] } else { 0.0 };
    let br = if i + 1 < n { off[i] * off[i] } else { 0.0 };
    (Complex::new(diag[i], 0.0) - z - left * bl - right * br).inv()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_banded(n: usize, d: usize, seed: u64) -> SymBanded {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SymBanded {
            diag: (0..n).map(|_| rng.random_range(-2.0..2.0)).collect(),
            bands: (1..=d).map(|k| (0..n - k).map(|_| rng.random_range(-1.0..1.0)).collect()).collect(),
        }
    }

    fn dense_eigs(a: &SymBanded) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(a.to_dense()).eigenvalues.iter().cloned().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    #[test]
    fn counts_match_dense() {
        for (d, seed) in [(1, 1), (2, 2), (3, 3)] {
            let a = random_banded(120, d, seed);
            let ev = dense_eigs(&a);
            for k in 0..40 {
                let e = -4.0 + 8.0 * k as f64 / 39.0 + 1e-3;
                let expect = ev.iter().filter(|&&x| x < e).count();
                assert_eq!(a.count_below(e), expect, "d = {d}, E = {e}");
            }
        }
    }

    #[test]
    fn exact_eigenvalue_is_handled() {
        let free = SymBanded { diag: vec![0.0; 3], bands: vec![vec![1.0; 2]] };
        assert_eq!(free.count_below(0.0), 1);
        assert_eq!(free.count_below(0.5), 2);
    }

    #[test]
    fn ql_matches_dense() {
        let a = random_banded(80, 1, 7);
        let rows = [0usize, 40, 79];
        let (vals, comps) = a.eigen_rows(&rows);
        let eig = SymmetricEigen::new(a.to_dense());
        let ev = dense_eigs(&a);
        for (x, y) in vals.iter().zip(&ev) {
            assert!((x - y).abs() < 1e-12);
        }
        for (t, &r) in rows.iter().enumerate() {
            for (j, &lam) in vals.iter().enumerate() {
                let jj = (0..80).min_by(|&p, &q| {
                    (eig.eigenvalues[p] - lam).abs().total_cmp(&(eig.eigenvalues[q] - lam).abs())
                });
                let want = eig.eigenvectors[(r, jj.unwrap())];
                assert!((comps[t][j].abs() - want.abs()).abs() < 1e-10);
            }
        }
        // Rows of the full eigenvector matrix are unit vectors.
        for c in &comps {
            assert!((c.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn banded_lu_solves() {
        for d in 1..=3 {
            let a = random_banded(60, d, 10 + d as u64);
            let x: Vec<f64> = (0..60).map(|i| (i as f64).sin()).collect();
            let dense = a.to_dense() - DMatrix::identity(60, 60) * 0.3;
            let b = &dense * nalgebra::DVector::from_vec(x.clone());
            let mut sol: Vec<f64> = b.iter().cloned().collect();
            BandedLu::new(&a, 0.3).solve(&mut sol);
            for (p, q) in sol.iter().zip(&x) {
                assert!((p - q).abs() < 1e-9, "d = {d}");
            }
        }
    }

    #[test]
    fn inverse_iteration_finds_eigenvector() {
        let a = random_banded(50, 2, 21);
        let ev = dense_eigs(&a);
        let target = ev[17];
        let x = inverse_iteration(&a, target + 1e-9, 3);
        let ax = a.to_dense() * nalgebra::DVector::from_vec(x.clone());
        let res: f64 = ax.iter().zip(&x).map(|(p, q)| (p - target * q).powi(2)).sum::<f64>().sqrt();
        assert!(res < 1e-8);
    }

    #[test]
    fn resolvent_matches_dense() {
        let a = random_banded(30, 1, 5);
        let z = Complex::new(0.3, 0.05);
        let m = a.to_dense().map(|x| Complex::new(x, 0.0)) - DMatrix::identity(30, 30) * z;
        let inv = m.try_inverse().unwrap();
        for i in [0, 13, 29] {
            let g = resolvent_diagonal(&a.diag, &a.bands[0], i, z);
            assert!((g - inv[(i, i)]).norm() < 1e-10);
        }
    }

    #[test]
    fn kth_eigenvalue_and_distance() {
        let free = SymBanded { diag: vec![0.0; 3], bands: vec![vec![1.0; 2]] };
        assert!((free.kth_eigenvalue(0, 1e-13) + 2f64.sqrt()).abs() < 1e-12);
        assert!((free.distance_to_spectrum(0.3, 1e-13) - 0.3).abs() < 1e-12);
        assert!((free.distance_to_spectrum(2.0, 1e-13) - (2.0 - 2f64.sqrt())).abs() < 1e-12);
    }
}
