//! Dense symmetric positive-definite factorisation with a jitter ladder.

use crate::error::{Error, Result};

/// Lower-triangular Cholesky factor of a D×D SPD matrix, with log-determinant
/// and solve support. Immutable once built; safe to share across threads.
#[derive(Debug, Clone)]
pub struct CholFactor {
    dim: usize,
    /// Row-major lower triangle including diagonal, zero above.
    l: Vec<f64>,
    logdet: f64,
    jitter_used: f64,
}

/// Relative jitter ladder: 0 then 1e−10 up to 1e−6 times the mean diagonal.
const JITTER_LADDER: [f64; 6] = [0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6];

impl CholFactor {
    /// Factor `a` (row-major, symmetric, dim×dim), escalating jitter on failure.
    pub fn new(a: &[f64], dim: usize) -> Result<Self> {
        assert_eq!(a.len(), dim * dim, "matrix shape mismatch");
        let mean_diag = (0..dim).map(|i| a[i * dim + i]).sum::<f64>() / dim as f64;
        let mut last_pivot = (0usize, f64::NAN);
        for &rel in JITTER_LADDER.iter() {
            let jitter = rel * mean_diag;
            match Self::factor_with_jitter(a, dim, jitter) {
                Ok(mut f) => {
                    f.jitter_used = jitter;
                    return Ok(f);
                }
                Err((pivot, diag)) => last_pivot = (pivot, diag),
            }
        }
        Err(Error::CholeskyFailure {
            pivot: last_pivot.0,
            diag: last_pivot.1,
            max_jitter: JITTER_LADDER[JITTER_LADDER.len() - 1] * mean_diag,
        })
    }

    fn factor_with_jitter(
        a: &[f64],
        dim: usize,
        jitter: f64,
    ) -> std::result::Result<Self, (usize, f64)> {
        let mut l = vec![0.0f64; dim * dim];
        let mut logdet = 0.0;
        for i in 0..dim {
            for j in 0..=i {
                let mut sum = a[i * dim + j];
                if i == j {
                    sum += jitter;
                }
                for k in 0..j {
                    sum -= l[i * dim + k] * l[j * dim + k];
                }
                if i == j {
                    if sum <= 0.0 || !sum.is_finite() {
                        return Err((i, sum));
                    }
                    let d = sum.sqrt();
                    l[i * dim + i] = d;
                    logdet += 2.0 * d.ln();
                } else {
                    l[i * dim + j] = sum / l[j * dim + j];
                }
            }
        }
        Ok(CholFactor {
            dim,
            l,
            logdet,
            jitter_used: 0.0,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn logdet(&self) -> f64 {
        self.logdet
    }

    #[inline]
    pub fn jitter_used(&self) -> f64 {
        self.jitter_used
    }

    /// Lower triangle, row-major.
    pub fn lower(&self) -> &[f64] {
        &self.l
    }

    /// y = L x (for preconditioned proposals).
    pub fn mul_lower(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        let mut y = vec![0.0; self.dim];
        for i in 0..self.dim {
            let mut s = 0.0;
            for k in 0..=i {
                s += self.l[i * self.dim + k] * x[k];
            }
            y[i] = s;
        }
        y
    }

    /// Solves L y = b (forward substitution).
    pub fn forward(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.dim);
        let mut y = b.to_vec();
        for i in 0..self.dim {
            for k in 0..i {
                y[i] -= self.l[i * self.dim + k] * y[k];
            }
            y[i] /= self.l[i * self.dim + i];
        }
        y
    }

    /// Solves A x = b via the factor.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = self.forward(b);
        for i in (0..self.dim).rev() {
            for k in (i + 1)..self.dim {
                x[i] -= self.l[k * self.dim + i] * x[k];
            }
            x[i] /= self.l[i * self.dim + i];
        }
        x
    }

    /// zᵀ A⁻¹ z  =  ‖L⁻¹ z‖².
    pub fn quad_form(&self, z: &[f64]) -> f64 {
        self.forward(z).iter().map(|v| v * v).sum()
    }

    /// ln N(z; 0, A): the centred multivariate normal log density.
    pub fn mvn_ln_pdf(&self, z: &[f64]) -> f64 {
        const LN_2PI: f64 = 1.8378770664093453;
        -0.5 * (self.dim as f64 * LN_2PI + self.logdet + self.quad_form(z))
    }

    /// Dense inverse A⁻¹ (the precision matrix when A is a covariance);
    /// column solves against the factor.
    pub fn inverse(&self) -> Vec<f64> {
        let d = self.dim;
        let mut inv = vec![0.0; d * d];
        let mut e = vec![0.0; d];
        for j in 0..d {
            e[j] = 1.0;
            let col = self.solve(&e);
            e[j] = 0.0;
            for i in 0..d {
                inv[i * d + j] = col[i];
            }
        }
        inv
    }
}
