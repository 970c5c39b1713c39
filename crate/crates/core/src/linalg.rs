//! Dense matrices over `Q_p` and rank by elimination.

use crate::padic::{PadicConfig, PadicNum};

#[derive(Debug, Clone)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<PadicNum>,
}

impl Matrix {
    pub fn zeros(cfg: PadicConfig, rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![cfg.zero(); rows * cols] }
    }

    pub fn get(&self, r: usize, c: usize) -> PadicNum {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, x: PadicNum) {
        self.data[r * self.cols + c] = x;
    }

    pub fn add_at(&mut self, r: usize, c: usize, x: PadicNum) {
        let i = r * self.cols + c;
        self.data[i] = self.data[i] + x;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let cfg = self.data.first().or(other.data.first()).map(|x| x.config());
        let mut out = Matrix { rows: self.rows, cols: other.cols, data: Vec::new() };
        let Some(cfg) = cfg else { return out };
        out.data = vec![cfg.zero(); self.rows * other.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.add_at(i, j, a * b);
                    }
                }
            }
        }
        out
    }

    /// Rank over `Q_p`, treating entries with no known nonzero digit as zero.
    /// Pivots are chosen with smallest valuation to keep precision.
    pub fn rank(&self) -> usize {
        let mut a = self.data.clone();
        let (rows, cols) = (self.rows, self.cols);
        let mut row_alive: Vec<usize> = (0..rows).collect();
        let mut col_alive: Vec<usize> = (0..cols).collect();
        let mut rank = 0;
        loop {
            let mut best: Option<(usize, usize, i64)> = None;
            for (ri, &r) in row_alive.iter().enumerate() {
                for (ci, &c) in col_alive.iter().enumerate() {
                    let x = a[r * cols + c];
                    if !x.is_zero() && best.is_none_or(|(_, _, v)| x.val() < v) {
                        best = Some((ri, ci, x.val()));
                    }
                }
            }
            let Some((ri, ci, _)) = best else { break };
            let pr = row_alive.swap_remove(ri);
            let pc = col_alive.swap_remove(ci);
            let inv = a[pr * cols + pc].checked_inv().expect("pivot is nonzero");
            for &r in &row_alive {
                let f = a[r * cols + pc];
                if f.is_zero() {
                    continue;
                }
                let f = f * inv;
                for &c in &col_alive {
                    let x = a[pr * cols + c];
                    if !x.is_exact_zero() {
                        a[r * cols + c] = a[r * cols + c] - f * x;
                    }
                }
            }
            rank += 1;
        }
        rank
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks() {
        let c = PadicConfig::new(3, 20).unwrap();
        let mut m = Matrix::zeros(c, 3, 3);
        assert_eq!(m.rank(), 0);
        for (i, v) in [1, 2, 3, 2, 4, 6, 9, 0, 27].iter().enumerate() {
            m.set(i / 3, i % 3, c.int(*v));
        }
        assert_eq!(m.rank(), 2);
        m.set(1, 2, c.int(7));
        assert_eq!(m.rank(), 3);
        let id = {
            let mut x = Matrix::zeros(c, 3, 3);
            (0..3).for_each(|i| x.set(i, i, c.one()));
            x
        };
        assert_eq!(m.mul(&id).rank(), 3);
    }
}
