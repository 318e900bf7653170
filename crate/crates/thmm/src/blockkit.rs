//! Structural block matrices that do not depend on the moments: the block
//! down-shift, its resolvent, the two truncation embeddings, the leading
//! canonical block column and the two signature matrices.

use crate::error::{Error, Result};
use crate::mat::{c, eye, get_block, set_block, stack_column, zeros, CMat, C64};

/// Dense matrix with an explicit q×q block grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrix {
    pub q: usize,
    pub block_rows: usize,
    pub block_cols: usize,
    pub data: CMat,
}

impl BlockMatrix {
    pub fn new(q: usize, block_rows: usize, block_cols: usize, data: CMat) -> Self {
        assert_eq!(data.nrows(), block_rows * q);
        assert_eq!(data.ncols(), block_cols * q);
        BlockMatrix {
            q,
            block_rows,
            block_cols,
            data,
        }
    }

    pub fn zero(q: usize, block_rows: usize, block_cols: usize) -> Self {
        Self::new(
            q,
            block_rows,
            block_cols,
            zeros(block_rows * q, block_cols * q),
        )
    }

    pub fn identity(q: usize, blocks: usize) -> Self {
        Self::new(q, blocks, blocks, eye(blocks * q))
    }

    pub fn block(&self, i: usize, j: usize) -> CMat {
        get_block(&self.data, self.q, i, j)
    }

    pub fn set_block(&mut self, i: usize, j: usize, b: &CMat) {
        set_block(&mut self.data, self.q, i, j, b);
    }

    pub fn adjoint(&self) -> Self {
        Self::new(
            self.q,
            self.block_cols,
            self.block_rows,
            self.data.adjoint(),
        )
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.q, rhs.q);
        assert_eq!(self.block_cols, rhs.block_rows);
        Self::new(
            self.q,
            self.block_rows,
            rhs.block_cols,
            &self.data * &rhs.data,
        )
    }

    pub fn mul_vec(&self, rhs: &BlockVector) -> BlockVector {
        assert_eq!(self.q, rhs.q);
        assert_eq!(self.block_cols, rhs.len());
        BlockVector::from_stacked(self.q, &self.data * rhs.stacked())
    }
}

/// Column of q×q blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    pub q: usize,
    pub blocks: Vec<CMat>,
}

impl BlockVector {
    pub fn new(q: usize, blocks: Vec<CMat>) -> Self {
        assert!(blocks.iter().all(|b| b.nrows() == q && b.ncols() == q));
        BlockVector { q, blocks }
    }

    pub fn from_stacked(q: usize, stacked: CMat) -> Self {
        assert_eq!(stacked.ncols(), q);
        assert_eq!(stacked.nrows() % q, 0);
        let blocks = (0..stacked.nrows() / q)
            .map(|k| stacked.view((k * q, 0), (q, q)).into())
            .collect();
        BlockVector { q, blocks }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block(&self, k: usize) -> &CMat {
        &self.blocks[k]
    }

    pub fn stacked(&self) -> CMat {
        stack_column(&self.blocks)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.q, self.blocks.iter().map(|b| b * s).collect())
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.len(), rhs.len());
        Self::new(
            self.q,
            self.blocks
                .iter()
                .zip(&rhs.blocks)
                .map(|(x, y)| x - y)
                .collect(),
        )
    }
}

/// Block down-shift T_j on j+1 block slots: identity blocks on the first
/// subdiagonal, zero elsewhere. T_0 is the q×q zero matrix.
pub fn shift(j: usize, q: usize) -> BlockMatrix {
    let mut t = BlockMatrix::zero(q, j + 1, j + 1);
    for k in 1..=j {
        t.set_block(k, k - 1, &eye(q));
    }
    t
}

/// Truncation embeddings (L_{1,j}, L_{2,j}) of the j-block space into the
/// (j+1)-block space: below resp. above.  Requires j ≥ 1.
pub fn truncations(j: usize, q: usize) -> Result<(BlockMatrix, BlockMatrix)> {
    if j == 0 {
        return Err(Error::InvalidArgument(
            "truncations need j >= 1 (no j-block column space at j = 0)".into(),
        ));
    }
    let mut l1 = BlockMatrix::zero(q, j + 1, j);
    let mut l2 = BlockMatrix::zero(q, j + 1, j);
    for k in 0..j {
        l1.set_block(k + 1, k, &eye(q));
        l2.set_block(k, k, &eye(q));
    }
    Ok((l1, l2))
}

/// Resolvent R_j(z) = (I − zT_j)^{-1} of the nilpotent shift, i.e. the
/// terminating sum Σ_{ℓ=0..j} z^ℓ T_j^ℓ: lower block-triangular Toeplitz
/// with block (k, l) = z^{k−l} I.
pub fn shift_resolvent(j: usize, q: usize, z: C64) -> BlockMatrix {
    let mut powers = Vec::with_capacity(j + 1);
    let mut p = c(1.0, 0.0);
    for _ in 0..=j {
        powers.push(p);
        p *= z;
    }
    let mut r = BlockMatrix::zero(q, j + 1, j + 1);
    let id = eye(q);
    for k in 0..=j {
        for l in 0..=k {
            r.set_block(k, l, &(&id * powers[k - l]));
        }
    }
    r
}

/// Canonical leading block column v_j: identity in the first slot, j zero
/// blocks below.
pub fn unit_column(j: usize, q: usize) -> BlockVector {
    let mut blocks = vec![zeros(q, q); j + 1];
    blocks[0] = eye(q);
    BlockVector::new(q, blocks)
}

/// The two 2q×2q signature matrices: the hermitian involutions
/// [[0, −iI], [iI, 0]] and [[0, I], [I, 0]].
pub fn signature_matrices(q: usize) -> (BlockMatrix, BlockMatrix) {
    let mut j = BlockMatrix::zero(q, 2, 2);
    j.set_block(0, 1, &(eye(q) * c(0.0, -1.0)));
    j.set_block(1, 0, &(eye(q) * c(0.0, 1.0)));
    let mut swap = BlockMatrix::zero(q, 2, 2);
    swap.set_block(0, 1, &eye(q));
    swap.set_block(1, 0, &eye(q));
    (j, swap)
}
