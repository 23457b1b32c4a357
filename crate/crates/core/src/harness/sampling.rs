//! Seeded subset sampling. Every sample draws from its own ChaCha stream, so
//! sample `i` is the same no matter how many samples are requested or in
//! which order workers finish.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Size-`s` subsets are enumerated exhaustively when there are at most this
/// many of them.
pub const EXHAUSTIVE_LIMIT: u128 = 100_000;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id for replicate `rep` of size `s` in a scan grid.
pub fn cell_stream(s: usize, rep: usize) -> u64 {
    ((s as u64) << 32) | rep as u64
}

/// A uniform size-`s` subset of `pool`, returned in ascending order.
pub fn random_subset<R: Rng + ?Sized>(pool: &[usize], s: usize, rng: &mut R) -> Vec<usize> {
    let mut out: Vec<usize> = sample(rng, pool.len(), s).into_iter().map(|i| pool[i]).collect();
    out.sort_unstable();
    out
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Lexicographic `k`-subsets of `0..n`.
pub struct Combinations {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Combinations {
        Combinations {
            n,
            idx: (0..k).collect(),
            done: k > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let k = self.idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}
