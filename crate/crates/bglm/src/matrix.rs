//! Dense row-major matrices of f64, the numeric carrier for everything:
//! parameters, activations, gradients, logits. Shapes are checked by the
//! exported operations in `ops`; the methods here assert on misuse because a
//! violation is a bug in model wiring, not a recoverable condition.

use rand::Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Matrix {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Matrix { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Matrix {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Entries drawn i.i.d. from Uniform(-range, range).
    pub fn uniform(rows: usize, cols: usize, range: f64, rng: &mut impl Rng) -> Matrix {
        assert!(range > 0.0, "uniform init range must be positive");
        let data = (0..rows * cols).map(|_| rng.gen_range(-range..range)).collect();
        Matrix { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    /// self[M x K] * other[K x N] -> [M x N].
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(
            self.cols, other.rows,
            "matmul inner dims: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let a_row = &self.data[i * self.cols..(i + 1) * self.cols];
            let o_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a_ik) in a_row.iter().enumerate() {
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in o_row.iter_mut().zip(b_row) {
                    *o += a_ik * b;
                }
            }
        }
        out
    }

    /// self^T * other, with self[K x M], other[K x N] -> [M x N].
    /// Avoids materializing the transpose in backward rules.
    pub fn t_matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(
            self.rows, other.rows,
            "t_matmul outer dims: {}x{} vs {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Matrix::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            let a_row = &self.data[k * self.cols..(k + 1) * self.cols];
            let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
            for (i, &a_ki) in a_row.iter().enumerate() {
                let o_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, &b) in o_row.iter_mut().zip(b_row) {
                    *o += a_ki * b;
                }
            }
        }
        out
    }

    /// self * other^T, with self[M x K], other[N x K] -> [M x N].
    pub fn matmul_t(&self, other: &Matrix) -> Matrix {
        assert_eq!(
            self.cols, other.cols,
            "matmul_t inner dims: {}x{} vs {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Matrix::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            let a_row = &self.data[i * self.cols..(i + 1) * self.cols];
            for j in 0..other.rows {
                let b_row = &other.data[j * other.cols..(j + 1) * other.cols];
                let dot: f64 = a_row.iter().zip(b_row).map(|(a, b)| a * b).sum();
                out.data[i * other.rows + j] = dot;
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Matrix {
        assert_eq!(self.shape(), other.shape(), "zip_map shape mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn hadamard(&self, other: &Matrix) -> Matrix {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn add_assign(&mut self, other: &Matrix) {
        assert_eq!(self.shape(), other.shape(), "add_assign shape mismatch");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn scale_in_place(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    pub fn fill(&mut self, v: f64) {
        self.data.fill(v);
    }

    /// Adds a 1 x C row vector to every row.
    pub fn add_row_broadcast(&mut self, row: &Matrix) {
        assert_eq!(row.rows, 1, "broadcast expects a row vector");
        assert_eq!(row.cols, self.cols, "broadcast width mismatch");
        for r in 0..self.rows {
            let dst = &mut self.data[r * self.cols..(r + 1) * self.cols];
            for (d, &s) in dst.iter_mut().zip(&row.data) {
                *d += s;
            }
        }
    }

    /// Column sums as a 1 x C row vector.
    pub fn col_sums(&self) -> Matrix {
        let mut out = Matrix::zeros(1, self.cols);
        for r in 0..self.rows {
            let src = &self.data[r * self.cols..(r + 1) * self.cols];
            for (o, &s) in out.data.iter_mut().zip(src) {
                *o += s;
            }
        }
        out
    }

    /// Copy of columns [start, start+width).
    pub fn col_block(&self, start: usize, width: usize) -> Matrix {
        assert!(start + width <= self.cols, "col_block out of range");
        let mut out = Matrix::zeros(self.rows, width);
        for r in 0..self.rows {
            let src = &self.data[r * self.cols + start..r * self.cols + start + width];
            out.data[r * width..(r + 1) * width].copy_from_slice(src);
        }
        out
    }

    /// Writes `block` into columns [start, start+width).
    pub fn set_col_block(&mut self, start: usize, block: &Matrix) {
        assert_eq!(block.rows, self.rows, "set_col_block row mismatch");
        assert!(start + block.cols <= self.cols, "set_col_block out of range");
        for r in 0..self.rows {
            let dst = &mut self.data[r * self.cols + start..r * self.cols + start + block.cols];
            dst.copy_from_slice(block.row(r));
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }
}

/// Row-major matrix of token ids, shape batch x time.
#[derive(Clone, Debug, PartialEq)]
pub struct IdMatrix {
    rows: usize,
    cols: usize,
    data: Vec<usize>,
}

impl IdMatrix {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<usize>) -> IdMatrix {
        assert_eq!(data.len(), rows * cols, "id matrix data length mismatch");
        IdMatrix { rows, cols, data }
    }

    /// Single sequence as a 1 x T matrix.
    pub fn from_seq(seq: &[usize]) -> IdMatrix {
        IdMatrix {
            rows: 1,
            cols: seq.len(),
            data: seq.to_vec(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> usize {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[usize] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Ids of column t, one per batch lane.
    pub fn col(&self, t: usize) -> Vec<usize> {
        (0..self.rows).map(|r| self.get(r, t)).collect()
    }

    pub fn data(&self) -> &[usize] {
        &self.data
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matmul_identity() {
        let i2 = Matrix::from_vec(2, 2, vec![1.0, 0.0, 0.0, 1.0]);
        let w = Matrix::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(i2.matmul(&w), w);
    }

    // Independent triple-loop multiply used as the oracle for the fast kernels.
    fn naive_matmul(a: &Matrix, b: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut acc = 0.0;
                for k in 0..a.cols() {
                    acc += a.get(i, k) * b.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    #[test]
    fn matmul_matches_naive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = Matrix::uniform(3, 4, 1.0, &mut rng);
        let b = Matrix::uniform(4, 2, 1.0, &mut rng);
        let fast = a.matmul(&b);
        let slow = naive_matmul(&a, &b);
        for (x, y) in fast.data().iter().zip(slow.data()) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn transposed_variants_match_explicit_transpose() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = Matrix::uniform(5, 3, 1.0, &mut rng);
        let b = Matrix::uniform(5, 4, 1.0, &mut rng);
        let via_t = a.transpose().matmul(&b);
        let fused = a.t_matmul(&b);
        for (x, y) in fused.data().iter().zip(via_t.data()) {
            assert!((x - y).abs() < 1e-12);
        }

        let c = Matrix::uniform(6, 3, 1.0, &mut rng);
        let d = Matrix::uniform(2, 3, 1.0, &mut rng);
        let via_t = c.matmul(&d.transpose());
        let fused = c.matmul_t(&d);
        for (x, y) in fused.data().iter().zip(via_t.data()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn col_blocks_round_trip() {
        let m = Matrix::from_fn(3, 8, |r, c| (r * 8 + c) as f64);
        let block = m.col_block(2, 3);
        assert_eq!(block.shape(), (3, 3));
        assert_eq!(block.get(1, 0), m.get(1, 2));
        let mut n = Matrix::zeros(3, 8);
        n.set_col_block(2, &block);
        assert_eq!(n.get(2, 4), m.get(2, 4));
        assert_eq!(n.get(2, 5), 0.0);
    }

    #[test]
    fn id_matrix_col_access() {
        let ids = IdMatrix::from_vec(2, 3, vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(ids.col(1), vec![1, 4]);
        assert_eq!(ids.row(1), &[3, 4, 5]);
    }
}
