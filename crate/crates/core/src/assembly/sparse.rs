use nalgebra::DMatrix;

use super::AssemblyError;

/// Compressed sparse row matrix with sorted column indices.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn from_parts(
        nrows: usize,
        ncols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, AssemblyError> {
        let ok = row_ptr.len() == nrows + 1
            && row_ptr[0] == 0
            && row_ptr.windows(2).all(|w| w[0] <= w[1])
            && *row_ptr.last().unwrap() == col_idx.len()
            && col_idx.len() == values.len()
            && col_idx.iter().all(|&c| c < ncols)
            && (0..nrows).all(|r| col_idx[row_ptr[r]..row_ptr[r + 1]].windows(2).all(|w| w[0] < w[1]));
        if !ok {
            return Err(AssemblyError::Internal("malformed CSR structure".into()));
        }
        Ok(Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Builds from a dense matrix, dropping exact zeros.
    pub fn from_dense(a: &DMatrix<f64>) -> Self {
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                if a[(i, j)] != 0.0 {
                    col_idx.push(j);
                    values.push(a[(i, j)]);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            nrows: a.nrows(),
            ncols: a.ncols(),
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |k| vals[k])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols, "matvec dimension mismatch");
        (0..self.nrows)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(|(&j, v)| v * x[j]).sum()
            })
            .collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, v) in cols.iter().zip(vals) {
                d[(i, j)] = *v;
            }
        }
        d
    }

    /// `a * self + b * other`, merging the two sparsity patterns.
    pub fn linear_combination(&self, a: f64, other: &CsrMatrix, b: f64) -> Result<CsrMatrix, AssemblyError> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(AssemblyError::DimensionMismatch {
                expected: self.nrows,
                found: other.nrows,
            });
        }
        if self.row_ptr == other.row_ptr && self.col_idx == other.col_idx {
            return Ok(CsrMatrix {
                values: self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect(),
                ..self.clone()
            });
        }
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.nrows {
            let (c1, v1) = self.row(i);
            let (c2, v2) = other.row(i);
            let (mut p, mut q) = (0, 0);
            while p < c1.len() || q < c2.len() {
                let j1 = c1.get(p).copied().unwrap_or(usize::MAX);
                let j2 = c2.get(q).copied().unwrap_or(usize::MAX);
                let j = j1.min(j2);
                let mut v = 0.0;
                if j1 == j {
                    v += a * v1[p];
                    p += 1;
                }
                if j2 == j {
                    v += b * v2[q];
                    q += 1;
                }
                col_idx.push(j);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Rows and columns restricted to `keep` (sorted), renumbered in order.
    pub fn submatrix(&self, keep: &[usize]) -> CsrMatrix {
        let mut map = vec![usize::MAX; self.ncols];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut row_ptr = Vec::with_capacity(keep.len() + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for &i in keep {
            let (cols, vals) = self.row(i);
            for (&j, v) in cols.iter().zip(vals) {
                if map[j] != usize::MAX {
                    col_idx.push(map[j]);
                    values.push(*v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            nrows: keep.len(),
            ncols: keep.len(),
            row_ptr,
            col_idx,
            values,
        }
    }
}

/// Scatter-add target for a symmetric matrix with two dofs per node.
///
/// The pattern is fixed up front from the node lists of every contribution,
/// so adding never allocates and the result does not depend on the order in
/// which contributions arrive.
#[derive(Clone, Debug)]
pub struct BlockAssembler {
    /// Sorted neighbour nodes of each node.
    neighbours: Vec<Vec<usize>>,
    matrix: CsrMatrix,
}

impl BlockAssembler {
    pub fn new<'a, I>(n_nodes: usize, groups: I) -> Result<Self, AssemblyError>
    where
        I: IntoIterator<Item = &'a [usize]>,
    {
        let mut neighbours: Vec<Vec<usize>> = vec![Vec::new(); n_nodes];
        for g in groups {
            for &a in g {
                if a >= n_nodes {
                    return Err(AssemblyError::IndexOutOfRange { index: a, len: n_nodes });
                }
                neighbours[a].extend_from_slice(g);
            }
        }
        for list in neighbours.iter_mut() {
            list.sort_unstable();
            list.dedup();
        }
        let n = 2 * n_nodes;
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        for list in &neighbours {
            for _ in 0..2 {
                for &b in list {
                    col_idx.push(2 * b);
                    col_idx.push(2 * b + 1);
                }
                row_ptr.push(col_idx.len());
            }
        }
        let values = vec![0.0; col_idx.len()];
        Ok(Self {
            neighbours,
            matrix: CsrMatrix {
                nrows: n,
                ncols: n,
                row_ptr,
                col_idx,
                values,
            },
        })
    }

    /// Adds a dense `2m x 2m` block over the nodes `nodes` (dof order
    /// `x_1, y_1, x_2, y_2, ...`).
    pub fn add(&mut self, nodes: &[usize], local: &DMatrix<f64>) -> Result<(), AssemblyError> {
        let m = nodes.len();
        if local.nrows() != 2 * m || local.ncols() != 2 * m {
            return Err(AssemblyError::Internal(format!(
                "local matrix is {}x{} for {m} nodes",
                local.nrows(),
                local.ncols()
            )));
        }
        for (i, &a) in nodes.iter().enumerate() {
            let list = self
                .neighbours
                .get(a)
                .ok_or(AssemblyError::IndexOutOfRange {
                    index: a,
                    len: self.neighbours.len(),
                })?;
            for (j, &b) in nodes.iter().enumerate() {
                let p = list
                    .binary_search(&b)
                    .map_err(|_| AssemblyError::Internal(format!("node pair ({a}, {b}) missing from pattern")))?;
                for k in 0..2 {
                    let base = self.matrix.row_ptr[2 * a + k] + 2 * p;
                    self.matrix.values[base] += local[(2 * i + k, 2 * j)];
                    self.matrix.values[base + 1] += local[(2 * i + k, 2 * j + 1)];
                }
            }
        }
        Ok(())
    }

    pub fn finish(self) -> CsrMatrix {
        self.matrix
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_block_equals_local() {
        let nodes = [0usize, 1, 2];
        let local = DMatrix::from_fn(6, 6, |i, j| (1 + i.min(j) * 7 + i.max(j)) as f64);
        let mut asm = BlockAssembler::new(3, [&nodes[..]]).unwrap();
        asm.add(&nodes, &local).unwrap();
        assert_eq!(asm.finish().to_dense(), local);
    }

    #[test]
    fn disjoint_blocks_stay_block_diagonal() {
        let g1 = [0usize, 1];
        let g2 = [2usize, 3];
        let a = DMatrix::from_element(4, 4, 1.0);
        let b = DMatrix::from_element(4, 4, 2.0);
        let mut asm = BlockAssembler::new(4, [&g1[..], &g2[..]]).unwrap();
        asm.add(&g1, &a).unwrap();
        asm.add(&g2, &b).unwrap();
        let k = asm.finish();
        let d = k.to_dense();
        assert_eq!(d.view((0, 0), (4, 4)), a);
        assert_eq!(d.view((4, 4), (4, 4)), b);
        assert_eq!(d.view((0, 4), (4, 4)).abs().max(), 0.0);
        assert_eq!(k.nnz(), 32);
    }

    #[test]
    fn unordered_node_lists_scatter_correctly() {
        let g = [2usize, 0];
        let local = DMatrix::from_fn(4, 4, |i, j| (10 * i + j) as f64);
        let mut asm = BlockAssembler::new(3, [&g[..]]).unwrap();
        asm.add(&g, &local).unwrap();
        let k = asm.finish();
        assert_eq!(k.get(4, 0), local[(0, 2)]);
        assert_eq!(k.get(1, 5), local[(3, 1)]);
    }

    #[test]
    fn out_of_range_is_rejected() {
        let g = [0usize, 5];
        assert!(matches!(
            BlockAssembler::new(3, [&g[..]]),
            Err(AssemblyError::IndexOutOfRange { index: 5, len: 3 })
        ));
    }

    #[test]
    fn submatrix_and_matvec() {
        let d = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 2.0, 0.0, 2.0, 5.0]);
        let k = CsrMatrix::from_dense(&d);
        assert_eq!(k.matvec(&[1.0, 1.0, 1.0]), vec![5.0, 6.0, 7.0]);
        let s = k.submatrix(&[0, 2]);
        assert_eq!(s.to_dense(), DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 5.0]));
        assert_eq!(k.asymmetry(), 0.0);
    }

    #[test]
    fn linear_combination_merges_patterns() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 3.0]);
        let b = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 4.0, 0.0]);
        let c = CsrMatrix::from_dense(&a)
            .linear_combination(2.0, &CsrMatrix::from_dense(&b), -1.0)
            .unwrap();
        assert_eq!(c.to_dense(), a * 2.0 - b);
    }
}
