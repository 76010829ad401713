use crate::error::{Error, Result};

/// Square band matrix with `kl` sub- and `ku` super-diagonals, plus room for
/// `kl` extra super-diagonals of pivoting fill-in.
#[derive(Clone, Debug)]
pub(crate) struct BandMatrix {
    m: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(m: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix {
            m,
            kl,
            ku,
            width,
            data: vec![0.0; m * width],
        }
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.slot(i, j)]
    }

    /// Add `v` to entry `(i, j)`; `j` must lie within the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i}, {j}) outside band"
        );
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    /// `A x` using the declared band.
    #[cfg(test)]
    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.m)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.m - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Gaussian elimination with partial pivoting; consumes the matrix.
    pub fn solve(mut self, mut b: Vec<f64>) -> Result<Vec<f64>> {
        let (m, kl) = (self.m, self.kl);
        let reach = self.ku + kl;
        for k in 0..m {
            let last_row = (k + kl).min(m - 1);
            let p = (k..=last_row)
                .max_by(|&a, &c| self.get(a, k).abs().total_cmp(&self.get(c, k).abs()))
                .expect("nonempty pivot range");
            let pivot = self.get(p, k);
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::SingularSystem { row: k });
            }
            let last_col = (k + reach).min(m - 1);
            if p != k {
                for j in k..=last_col {
                    let (a, c) = (self.slot(k, j), self.slot(p, j));
                    self.data.swap(a, c);
                }
                b.swap(k, p);
            }
            for i in k + 1..=last_row {
                let l = self.get(i, k) / pivot;
                if l == 0.0 {
                    continue;
                }
                let s = self.slot(i, k);
                self.data[s] = 0.0;
                for j in k + 1..=last_col {
                    let v = self.get(k, j);
                    let s = self.slot(i, j);
                    self.data[s] -= l * v;
                }
                b[i] -= l * b[k];
            }
        }
        let mut x = vec![0.0; m];
        for k in (0..m).rev() {
            let last_col = (k + reach).min(m - 1);
            let mut acc = b[k];
            for j in k + 1..=last_col {
                acc -= self.get(k, j) * x[j];
            }
            x[k] = acc / self.get(k, k);
        }
        Ok(x)
    }
}
