//! Oracles shared by the integration and acceptance tests.

#![allow(dead_code)]

/// Explicit construction of an edge's message-flow neighborhood, node by
/// node, following the message dependencies of the joint detector/decoder.
pub mod unroll {
    #[derive(Clone, Copy, Debug, PartialEq, Eq)]
    pub enum Kind {
        Variable,
        Check,
    }

    pub struct Tree {
        pub nodes: Vec<(Kind, Option<usize>)>,
        dv: usize,
        dc: usize,
        ic: usize,
        window: usize,
    }

    impl Tree {
        fn add(&mut self, kind: Kind, parent: Option<usize>) -> usize {
            self.nodes.push((kind, parent));
            self.nodes.len() - 1
        }

        /// Decoder dependencies below variable `v`: `checks` check nodes,
        /// each with `dc - 1` further variables, repeated `stages` times.
        /// Returns every variable node of the subtree including `v`.
        fn decoder_tree(&mut self, v: usize, checks: usize, stages: usize) -> Vec<usize> {
            let mut all = vec![v];
            let mut frontier = vec![(v, checks)];
            for _ in 0..stages {
                let mut next = Vec::new();
                for (var, fan) in frontier {
                    for _ in 0..fan {
                        let c = self.add(Kind::Check, Some(var));
                        for _ in 0..self.dc - 1 {
                            let u = self.add(Kind::Variable, Some(c));
                            all.push(u);
                            next.push((u, self.dv - 1));
                        }
                    }
                }
                frontier = next;
            }
            all
        }

        /// Window neighbors of `v`, each carrying the decoder tree behind
        /// its full feedback message. Returns the new variable nodes.
        fn detector_neighbors(&mut self, v: usize) -> Vec<usize> {
            let mut out = Vec::new();
            for _ in 0..self.window {
                let u = self.add(Kind::Variable, Some(v));
                out.extend(self.decoder_tree(u, self.dv, self.ic - 1));
            }
            out
        }

        pub fn count(&self, kind: Kind) -> usize {
            self.nodes.iter().filter(|(k, _)| *k == kind).count()
        }
    }

    /// Neighborhood of depth `t` with `ic` decoder iterations per round and
    /// a `(2 fc) x (2 fd)` detector window.
    pub fn build(t: usize, ic: usize, dv: usize, dc: usize, fc: usize, fd: usize) -> Tree {
        let mut tree = Tree {
            nodes: Vec::new(),
            dv,
            dc,
            ic,
            window: 4 * fc * fd - 1,
        };
        let ce = tree.add(Kind::Check, None);
        let ve = tree.add(Kind::Variable, Some(ce));
        let before = tree.nodes.len();
        let all = tree.decoder_tree(ve, dv - 1, ic - 1);
        // the last decoder stage takes its messages from the detector
        let mut frontier: Vec<usize> = if ic == 1 {
            vec![ve]
        } else {
            all.into_iter()
                .filter(|&v| v >= before && depth(&tree, v) == 2 * (ic - 1) + 1)
                .collect()
        };
        for _ in 0..t {
            let mut next = Vec::new();
            for v in frontier {
                next.extend(tree.detector_neighbors(v));
            }
            frontier = next;
        }
        tree
    }

    fn depth(tree: &Tree, mut v: usize) -> usize {
        let mut d = 0;
        while let Some(p) = tree.nodes[v].1 {
            v = p;
            d += 1;
        }
        d
    }
}

/// Brute-force marginals used as ground truth.
pub mod exact {
    use ldpc2d::code::ParityCheckMatrix;
    use ldpc2d::detector::bit_log_probs;

    pub fn lse(v: &[f64]) -> f64 {
        let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
    }

    /// Exact bitwise MAP LLRs for a 1D ISI strip by enumerating every input.
    pub fn strip_map(h: &[f64], r: &[f64], sigma: f64, priors: &[f64]) -> Vec<f64> {
        let n = priors.len();
        let mut ones = vec![Vec::new(); n];
        let mut zeros = vec![Vec::new(); n];
        for word in 0u32..(1 << n) {
            let x = |j: isize| -> f64 {
                if j < 0 || j as usize >= n {
                    -1.0
                } else if word >> j & 1 == 1 {
                    1.0
                } else {
                    -1.0
                }
            };
            let mut score = 0.0;
            for (j, &rj) in r.iter().enumerate() {
                let y: f64 = h
                    .iter()
                    .enumerate()
                    .map(|(k, hk)| hk * x(j as isize - k as isize))
                    .sum();
                score -= (rj - y).powi(2) / (2.0 * sigma * sigma);
            }
            for (j, &p) in priors.iter().enumerate() {
                score += bit_log_probs(p)[usize::from(word >> j & 1 == 1)];
            }
            for j in 0..n {
                if word >> j & 1 == 1 {
                    ones[j].push(score);
                } else {
                    zeros[j].push(score);
                }
            }
        }
        (0..n).map(|j| lse(&ones[j]) - lse(&zeros[j])).collect()
    }

    /// Exact bit LLRs of a column from symbol metrics `lic` (`2^mh` per
    /// step) and bit log-probabilities, by enumerating every column word.
    pub fn column_map(lic: &[f64], bits: &[[f64; 2]], rows: usize, mh: usize) -> Vec<f64> {
        let steps = rows + mh - 1;
        let a = 1 << mh;
        let mut ones = vec![Vec::new(); rows];
        let mut zeros = vec![Vec::new(); rows];
        for word in 0u32..(1 << rows) {
            let bit = |k: isize| -> usize {
                if k < 0 || k as usize >= rows {
                    0
                } else {
                    (word >> k & 1) as usize
                }
            };
            let mut score = 0.0;
            for k in 0..steps {
                let sym: usize = (0..mh).map(|m| bit(k as isize - m as isize) << m).sum();
                score += lic[k * a + sym];
            }
            for (k, b) in bits.iter().enumerate().take(rows) {
                score += b[bit(k as isize)];
            }
            for k in 0..rows {
                if bit(k as isize) == 1 {
                    ones[k].push(score);
                } else {
                    zeros[k].push(score);
                }
            }
        }
        (0..rows).map(|k| lse(&ones[k]) - lse(&zeros[k])).collect()
    }

    pub fn brute_force(pcm: &ParityCheckMatrix, d: &[u8], llr: &[f64]) -> Vec<f64> {
        let n = pcm.n();
        let mut ones = vec![Vec::new(); n];
        let mut zeros = vec![Vec::new(); n];
        for w in 0u32..(1 << n) {
            let s: Vec<u8> = (0..n).map(|i| (w >> i & 1) as u8).collect();
            if pcm.syndrome(&s).unwrap() != d {
                continue;
            }
            let score: f64 = s.iter().zip(llr).map(|(&b, l)| f64::from(b) * l).sum();
            for i in 0..n {
                if s[i] == 1 {
                    ones[i].push(score);
                } else {
                    zeros[i].push(score);
                }
            }
        }
        (0..n).map(|i| lse(&ones[i]) - lse(&zeros[i])).collect()
    }
}
