//! Dense complex helpers built on real `f64` products.
//!
//! nalgebra routes real `f64` products through a blocked kernel while complex
//! products fall back to a naive loop, so complex matrices are multiplied as
//! separate real and imaginary parts.

use nalgebra::DMatrix;
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct SplitMatrix {
    pub re: DMatrix<f64>,
    pub im: DMatrix<f64>,
}

impl SplitMatrix {
    pub fn identity(n: usize) -> Self {
        SplitMatrix {
            re: DMatrix::identity(n, n),
            im: DMatrix::zeros(n, n),
        }
    }

    pub fn from_complex(m: &DMatrix<Complex64>) -> Self {
        SplitMatrix {
            re: m.map(|z| z.re),
            im: m.map(|z| z.im),
        }
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        self.re.zip_map(&self.im, Complex64::new)
    }

    pub fn nrows(&self) -> usize {
        self.re.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.re.ncols()
    }

    /// `self * other`.
    pub fn mul(&self, other: &SplitMatrix) -> SplitMatrix {
        SplitMatrix {
            re: &self.re * &other.re - &self.im * &other.im,
            im: &self.re * &other.im + &self.im * &other.re,
        }
    }

    /// `self^T * other` (no conjugation).
    pub fn transpose_mul(&self, other: &SplitMatrix) -> SplitMatrix {
        let rt = self.re.transpose();
        let it = self.im.transpose();
        SplitMatrix {
            re: &rt * &other.re - &it * &other.im,
            im: &rt * &other.im + &it * &other.re,
        }
    }

    /// `self^dagger * other`.
    pub fn adjoint_mul(&self, other: &SplitMatrix) -> SplitMatrix {
        let rt = self.re.transpose();
        let it = self.im.transpose();
        SplitMatrix {
            re: &rt * &other.re + &it * &other.im,
            im: &rt * &other.im - &it * &other.re,
        }
    }

    pub fn adjoint(&self) -> SplitMatrix {
        SplitMatrix {
            re: self.re.transpose(),
            im: -self.im.transpose(),
        }
    }
}

pub fn cmul(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    SplitMatrix::from_complex(a)
        .mul(&SplitMatrix::from_complex(b))
        .to_complex()
}

/// `a^dagger * b`.
pub fn adjoint_mul(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    SplitMatrix::from_complex(a)
        .adjoint_mul(&SplitMatrix::from_complex(b))
        .to_complex()
}

/// `q * diag(d) * q^dagger`.
pub fn conjugate_diagonal(q: &DMatrix<Complex64>, d: &[Complex64]) -> DMatrix<Complex64> {
    let mut scaled = q.clone();
    for (mut col, &s) in scaled.column_iter_mut().zip(d) {
        col *= s;
    }
    cmul(&scaled, &q.adjoint())
}

pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `max |U^dagger U - I|`.
pub fn unitarity_defect(u: &DMatrix<Complex64>) -> f64 {
    let g = adjoint_mul(u, u);
    let n = g.nrows();
    let mut worst: f64 = 0.0;
    for c in 0..n {
        for r in 0..n {
            let expect = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((g[(r, c)] - expect).norm());
        }
    }
    worst
}

/// `max |H - H^dagger|`.
pub fn hermiticity_defect(h: &DMatrix<Complex64>) -> f64 {
    let n = h.nrows();
    let mut worst: f64 = 0.0;
    for c in 0..n {
        for r in 0..=c {
            worst = worst.max((h[(r, c)] - h[(c, r)].conj()).norm());
        }
    }
    worst
}

/// `(H + H^dagger) / 2`, exactly Hermitian.
pub fn hermitian_part(h: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = h.nrows();
    DMatrix::from_fn(n, n, |r, c| (h[(r, c)] + h[(c, r)].conj()) * 0.5)
}
