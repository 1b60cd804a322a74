//! Systematic generator derivation by GF(2) Gauss-Jordan elimination.

use super::gf2::DenseBits;
use super::{CodeError, ParityCheckMatrix};

/// Generator of the null space of a parity-check matrix.
///
/// `permutation` lists the pivot columns first (in pivot order) followed by the
/// free columns. Information bit `j` is placed at codeword position
/// `permutation[rank + j]`; every row of `matrix` is a codeword.
#[derive(Clone, Debug)]
pub struct Generator {
    n: usize,
    rank: usize,
    redundant_checks: usize,
    permutation: Vec<usize>,
    matrix: DenseBits,
}

/// Derive a generator for `pcm`. Rank deficiency is not an error: it is
/// reported through [`Generator::redundant_checks`] and the effective
/// [`Generator::dimension`].
pub fn derive_generator(pcm: &ParityCheckMatrix) -> Generator {
    let n = pcm.n();
    let m = pcm.m();
    let mut h = pcm.to_dense();
    let mut pivots = Vec::with_capacity(m);
    let mut free = Vec::new();
    let mut r = 0;
    for c in 0..n {
        if r == m {
            free.push(c);
            continue;
        }
        let Some(p) = (r..m).find(|&i| h.get(i, c)) else {
            free.push(c);
            continue;
        };
        h.swap_rows(r, p);
        for i in 0..m {
            if i != r && h.get(i, c) {
                h.xor_rows(i, r);
            }
        }
        pivots.push(c);
        r += 1;
    }
    let rank = r;
    let k = n - rank;
    let mut matrix = DenseBits::zeros(k, n);
    for (j, &fc) in free.iter().enumerate() {
        matrix.set(j, fc, true);
        for (i, &pc) in pivots.iter().enumerate() {
            if h.get(i, fc) {
                matrix.set(j, pc, true);
            }
        }
    }
    let mut permutation = pivots;
    permutation.extend_from_slice(&free);
    Generator {
        n,
        rank,
        redundant_checks: m - rank,
        permutation,
        matrix,
    }
}

impl Generator {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Code dimension K = N - rank(H).
    pub fn dimension(&self) -> usize {
        self.n - self.rank
    }

    /// Number of linearly dependent parity checks.
    pub fn redundant_checks(&self) -> usize {
        self.redundant_checks
    }

    pub fn is_full_rank(&self) -> bool {
        self.redundant_checks == 0
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// Codeword positions carrying the information bits, in order.
    pub fn info_positions(&self) -> &[usize] {
        &self.permutation[self.rank..]
    }

    /// K x N generator matrix; `H G^T = 0`.
    pub fn matrix(&self) -> &DenseBits {
        &self.matrix
    }

    pub fn encode(&self, u: &[u8]) -> Result<Vec<u8>, CodeError> {
        if u.len() != self.dimension() {
            return Err(CodeError::LengthMismatch {
                expected: self.dimension(),
                got: u.len(),
            });
        }
        Ok(self.matrix.combine_rows(u))
    }
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;

    #[test]
    fn identity_block_recovers_complement() {
        // H = [I_3 | A]
        let a = [[1, 0, 1], [1, 1, 0], [0, 1, 1]];
        let rows: Vec<Vec<usize>> = (0..3)
            .map(|i| {
                let mut r = vec![i];
                r.extend((0..3).filter(|&j| a[i][j] == 1).map(|j| 3 + j));
                r
            })
            .collect();
        let h = ParityCheckMatrix::from_rows(6, rows).unwrap();
        let g = derive_generator(&h);
        assert_eq!(g.rank(), 3);
        assert_eq!(g.dimension(), 3);
        assert_eq!(g.info_positions(), &[3, 4, 5]);
        // generator row j = [A column j | e_j]
        for j in 0..3 {
            for i in 0..3 {
                assert_eq!(g.matrix().get(j, i), a[i][j] == 1);
            }
            for jj in 0..3 {
                assert_eq!(g.matrix().get(j, 3 + jj), j == jj);
            }
        }
    }

    #[test]
    fn zero_row_reports_rank_deficiency() {
        let h = ParityCheckMatrix::from_rows(4, vec![vec![0, 1], vec![2, 3], vec![]]).unwrap();
        let g = derive_generator(&h);
        assert_eq!(g.rank(), 2);
        assert_eq!(g.redundant_checks(), 1);
        assert!(!g.is_full_rank());
        assert_eq!(g.dimension(), 2);
    }

    #[test]
    fn generator_rows_are_codewords() {
        let h = ParityCheckMatrix::from_rows(
            7,
            vec![vec![0, 1, 2, 4], vec![1, 2, 3, 5], vec![0, 2, 3, 6]],
        )
        .unwrap();
        let g = derive_generator(&h);
        assert_eq!(g.dimension(), 4);
        for j in 0..4 {
            let row: Vec<u8> = (0..7).map(|c| g.matrix().get(j, c) as u8).collect();
            assert_eq!(h.syndrome(&row).unwrap(), vec![0, 0, 0]);
        }
    }
}
