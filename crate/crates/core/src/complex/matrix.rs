//! Block matrix of the boundary map on non-minimal records.

use serde::Serialize;

use crate::linalg::Matrix;
use crate::padic::{PadicConfig, PadicNum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum BlockKind {
    #[serde(rename = "id")]
    Identity,
    #[serde(rename = "res")]
    Restriction,
}

#[derive(Debug, Clone, Serialize)]
pub struct Block {
    pub row: usize,
    pub col: usize,
    pub kind: BlockKind,
    pub sign: i32,
    #[serde(skip)]
    pub entries: Vec<Vec<PadicNum>>,
}

/// Square block matrix indexed by `order`; absent blocks are zero.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryMatrix {
    pub order: Vec<usize>,
    pub blocks: Vec<Block>,
    #[serde(skip)]
    degree: usize,
}

impl BoundaryMatrix {
    pub fn new(order: Vec<usize>, degree: usize, blocks: Vec<Block>) -> Self {
        BoundaryMatrix { order, blocks, degree }
    }

    pub fn size(&self) -> usize {
        self.order.len()
    }

    pub fn block_size(&self) -> usize {
        self.degree + 1
    }

    pub fn is_lower_triangular(&self) -> bool {
        self.blocks.iter().all(|b| b.row >= b.col)
    }

    /// Every diagonal block is `±identity` and nothing else sits on the diagonal.
    pub fn has_unit_diagonal(&self) -> bool {
        let mut seen = vec![0usize; self.size()];
        for b in &self.blocks {
            if b.row == b.col {
                if b.kind != BlockKind::Identity || b.sign.abs() != 1 {
                    return false;
                }
                seen[b.row] += 1;
            } else if b.kind == BlockKind::Identity {
                return false;
            }
        }
        seen.iter().all(|&c| c == 1)
    }

    /// Diagonal signs in order.
    pub fn diagonal(&self) -> Vec<i32> {
        let mut out = vec![0; self.size()];
        for b in self.blocks.iter().filter(|b| b.row == b.col) {
            out[b.row] = b.sign;
        }
        out
    }

    pub fn to_dense(&self, cfg: PadicConfig) -> Matrix {
        let s = self.block_size();
        let mut m = Matrix::zeros(cfg, s * self.size(), s * self.size());
        let neg = -cfg.one();
        for b in &self.blocks {
            for (j, line) in b.entries.iter().enumerate() {
                for (i, x) in line.iter().enumerate() {
                    let v = if b.sign < 0 { *x * neg } else { *x };
                    m.add_at(s * b.row + j, s * b.col + i, v);
                }
            }
        }
        m
    }
}
