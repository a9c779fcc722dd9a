//! Minimal fixed-size vector/matrix helpers for 1- and 2-component states.

/// 2x2 real matrix, row major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub fn zero() -> Self {
        Mat2([[0.0; 2]; 2])
    }

    pub fn mul_vec(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.0[0][0] * v[0] + self.0[0][1] * v[1],
            self.0[1][0] * v[0] + self.0[1][1] * v[1],
        ]
    }

    pub fn sub(&self, o: &Mat2) -> Mat2 {
        let mut m = Mat2::zero();
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j] = self.0[i][j] - o.0[i][j];
            }
        }
        m
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        let mut m = *self;
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j] *= s;
            }
        }
        m
    }

    pub fn add(&self, o: &Mat2) -> Mat2 {
        let mut m = Mat2::zero();
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j] = self.0[i][j] + o.0[i][j];
            }
        }
        m
    }

    pub fn frobenius(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|r| r.iter())
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }

    /// Solve `self * x = b` by Cramer's rule.
    pub fn solve(&self, b: [f64; 2]) -> Option<[f64; 2]> {
        let d = self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0];
        if d == 0.0 {
            return None;
        }
        Some([
            (b[0] * self.0[1][1] - self.0[0][1] * b[1]) / d,
            (self.0[0][0] * b[1] - b[0] * self.0[1][0]) / d,
        ])
    }
}

pub fn dot2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn norm2(a: [f64; 2]) -> f64 {
    dot2(a, a).sqrt()
}

pub fn sub2(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

/// Nodes and weights of 16-point Gauss-Legendre quadrature on [0, 1].
pub fn gauss_legendre_16() -> [(f64, f64); 16] {
    // Abscissae/weights on [-1, 1], mapped to [0, 1].
    const X: [f64; 8] = [
        0.0950125098376374,
        0.2816035507792589,
        0.4580167776572274,
        0.6178762444026438,
        0.7554044083550030,
        0.8656312023878318,
        0.9445750230732326,
        0.9894009349916499,
    ];
    const W: [f64; 8] = [
        0.1894506104550685,
        0.1826034150449236,
        0.1691565193950025,
        0.1495959888165767,
        0.1246289712555339,
        0.0951585116824928,
        0.0622535239386479,
        0.0271524594117541,
    ];
    let mut out = [(0.0, 0.0); 16];
    for i in 0..8 {
        out[2 * i] = (0.5 * (1.0 - X[i]), 0.5 * W[i]);
        out[2 * i + 1] = (0.5 * (1.0 + X[i]), 0.5 * W[i]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_integrates_polynomials() {
        // Exact for degree <= 31; check x^5 and x^12.
        let gl = gauss_legendre_16();
        let i5: f64 = gl.iter().map(|&(x, w)| w * x.powi(5)).sum();
        let i12: f64 = gl.iter().map(|&(x, w)| w * x.powi(12)).sum();
        assert!((i5 - 1.0 / 6.0).abs() < 1e-14);
        assert!((i12 - 1.0 / 13.0).abs() < 1e-14);
    }

    #[test]
    fn solve_2x2() {
        let m = Mat2([[2.0, 1.0], [1.0, 3.0]]);
        let x = m.solve([5.0, 10.0]).unwrap();
        assert!((m.mul_vec(x)[0] - 5.0).abs() < 1e-12);
        assert!((m.mul_vec(x)[1] - 10.0).abs() < 1e-12);
    }
}
