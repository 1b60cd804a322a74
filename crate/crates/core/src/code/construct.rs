//! Seeded random construction of regular parity-check matrices.
//!
//! Columns are filled one at a time. Each socket of a column goes to a check
//! drawn uniformly among the checks with the most spare capacity that neither
//! repeat an edge nor (with `girth_min = 6`) close a 4-cycle. A dead end
//! restarts the whole matrix with a fresh stream derived from `seed`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{CodeError, ParityCheckMatrix};
use crate::seed::derive_seed;

const MAX_ATTEMPTS: usize = 64;

pub fn construct_regular_code(
    n: usize,
    dv: usize,
    dc: usize,
    girth_min: usize,
    seed: u64,
) -> Result<ParityCheckMatrix, CodeError> {
    if n == 0 || dv == 0 || dc == 0 {
        return Err(CodeError::InvalidParameter(
            "N, d_v and d_c must be positive".into(),
        ));
    }
    if girth_min != 4 && girth_min != 6 {
        return Err(CodeError::InvalidParameter(format!(
            "girth_min must be 4 or 6, got {girth_min}"
        )));
    }
    if !(n * dv).is_multiple_of(dc) {
        return Err(CodeError::Divisibility { nv: n * dv, dc });
    }
    let m = n * dv / dc;
    if dv > m {
        return Err(CodeError::InvalidParameter(format!(
            "d_v = {dv} exceeds the number of checks {m}"
        )));
    }
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[attempt as u64]));
        if let Some(rows) = try_fill(n, m, dv, dc, girth_min == 6, &mut rng) {
            return ParityCheckMatrix::from_rows(n, rows);
        }
    }
    Err(CodeError::ConstructionFailed {
        attempts: MAX_ATTEMPTS,
    })
}

fn try_fill(
    n: usize,
    m: usize,
    dv: usize,
    dc: usize,
    no_four_cycles: bool,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<Vec<usize>>> {
    let mut rows: Vec<Vec<usize>> = vec![Vec::with_capacity(dc); m];
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    // blocked[v] == stamp marks variables already sharing a check with this column
    let mut blocked = vec![usize::MAX; n];
    let mut candidates = Vec::with_capacity(m);
    for (stamp, &col) in order.iter().enumerate() {
        let mut chosen: Vec<usize> = Vec::with_capacity(dv);
        for _ in 0..dv {
            let mut best_spare = 0;
            candidates.clear();
            for (r, row) in rows.iter().enumerate() {
                let spare = dc - row.len();
                if spare == 0 || spare < best_spare || chosen.contains(&r) {
                    continue;
                }
                if no_four_cycles && row.iter().any(|&v| blocked[v] == stamp) {
                    continue;
                }
                if spare > best_spare {
                    best_spare = spare;
                    candidates.clear();
                }
                candidates.push(r);
            }
            let &r = candidates.choose(rng)?;
            if no_four_cycles {
                for &v in &rows[r] {
                    blocked[v] = stamp;
                }
            }
            chosen.push(r);
        }
        for r in chosen {
            rows[r].push(col);
        }
    }
    Some(rows)
}
