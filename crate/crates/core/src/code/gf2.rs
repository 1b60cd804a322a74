//! Packed dense GF(2) rows.

/// A dense binary matrix with rows packed into `u64` words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseBits {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    data: Vec<u64>,
}

impl DenseBits {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words_per_row = cols.div_ceil(64);
        Self {
            rows,
            cols,
            words_per_row,
            data: vec![0; rows * words_per_row],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.data[r * self.words_per_row + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let w = &mut self.data[r * self.words_per_row + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.words_per_row..(r + 1) * self.words_per_row]
    }

    /// `row[dst] ^= row[src]`
    pub fn xor_rows(&mut self, dst: usize, src: usize) {
        debug_assert_ne!(dst, src);
        let w = self.words_per_row;
        let (a, b) = if dst < src {
            let (lo, hi) = self.data.split_at_mut(src * w);
            (&mut lo[dst * w..(dst + 1) * w], &hi[..w])
        } else {
            let (lo, hi) = self.data.split_at_mut(dst * w);
            (&mut hi[..w], &lo[src * w..(src + 1) * w])
        };
        for (x, y) in a.iter_mut().zip(b) {
            *x ^= *y;
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let w = self.words_per_row;
        for k in 0..w {
            self.data.swap(a * w + k, b * w + k);
        }
    }

    /// Row-vector times matrix: XOR of the rows selected by `bits`.
    pub fn combine_rows(&self, bits: &[u8]) -> Vec<u8> {
        debug_assert_eq!(bits.len(), self.rows);
        let mut acc = vec![0u64; self.words_per_row];
        for (r, &b) in bits.iter().enumerate() {
            if b & 1 == 1 {
                for (a, x) in acc.iter_mut().zip(self.row_words(r)) {
                    *a ^= *x;
                }
            }
        }
        (0..self.cols)
            .map(|c| ((acc[c / 64] >> (c % 64)) & 1) as u8)
            .collect()
    }
}
