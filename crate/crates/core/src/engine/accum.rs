//! Moment accumulation across trajectories.
//!
//! Accumulators hold raw power sums so merging is plain addition; ensembles
//! are reduced chunk-by-chunk in a fixed binary tree over the trajectory
//! index, which makes the result independent of execution order (and of the
//! number of worker threads) down to the last bit.

/// Anything reducible by a fixed-shape binary tree.
pub trait Mergeable {
    fn merge(&mut self, other: &Self);
}

/// Merge an ordered list of partial results pairwise.
pub fn tree_merge<T: Mergeable>(mut items: Vec<T>) -> Option<T> {
    if items.is_empty() {
        return None;
    }
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                a.merge(&b);
            }
            next.push(a);
        }
        items = next;
    }
    items.pop()
}

/// Raw power sums of a bivariate sample up to fourth order.
#[derive(Debug, Clone, Default)]
pub struct PairAccumulator {
    pub n: u64,
    s_x: f64,
    s_p: f64,
    s_xx: f64,
    s_xp: f64,
    s_pp: f64,
    s_xxx: f64,
    s_xxp: f64,
    s_xpp: f64,
    s_ppp: f64,
    s_xxxx: f64,
    s_xxpp: f64,
    s_pppp: f64,
}

/// Means, covariances and their standard errors for one ensemble slice.
#[derive(Debug, Clone, Copy, Default)]
pub struct PairSummary {
    pub n: u64,
    pub mean_x: f64,
    pub mean_p: f64,
    pub cov_xx: f64,
    pub cov_xp: f64,
    pub cov_pp: f64,
    pub se_mean_x: f64,
    pub se_mean_p: f64,
    pub se_cov_xx: f64,
    pub se_cov_xp: f64,
    pub se_cov_pp: f64,
    /// Single-sample ensembles carry no covariance information.
    pub degenerate: bool,
}

impl PairAccumulator {
    pub fn push(&mut self, x: f64, p: f64) {
        let (xx, xp, pp) = (x * x, x * p, p * p);
        self.n += 1;
        self.s_x += x;
        self.s_p += p;
        self.s_xx += xx;
        self.s_xp += xp;
        self.s_pp += pp;
        self.s_xxx += xx * x;
        self.s_xxp += xx * p;
        self.s_xpp += x * pp;
        self.s_ppp += pp * p;
        self.s_xxxx += xx * xx;
        self.s_xxpp += xx * pp;
        self.s_pppp += pp * pp;
    }

    pub fn summary(&self) -> PairSummary {
        let n = self.n;
        if n == 0 {
            return PairSummary {
                degenerate: true,
                ..Default::default()
            };
        }
        let nf = n as f64;
        let mx = self.s_x / nf;
        let mp = self.s_p / nf;
        if n == 1 {
            return PairSummary {
                n,
                mean_x: mx,
                mean_p: mp,
                degenerate: true,
                ..Default::default()
            };
        }
        // biased central moments from raw sums
        let m2x = (self.s_xx / nf - mx * mx).max(0.0);
        let m11 = self.s_xp / nf - mx * mp;
        let m2p = (self.s_pp / nf - mp * mp).max(0.0);
        let m4x = self.s_xxxx / nf - 4.0 * mx * self.s_xxx / nf + 6.0 * mx * mx * self.s_xx / nf
            - 3.0 * mx.powi(4);
        let m4p = self.s_pppp / nf - 4.0 * mp * self.s_ppp / nf + 6.0 * mp * mp * self.s_pp / nf
            - 3.0 * mp.powi(4);
        let m22 = self.s_xxpp / nf - 2.0 * mp * self.s_xxp / nf - 2.0 * mx * self.s_xpp / nf
            + mp * mp * self.s_xx / nf
            + 4.0 * mx * mp * self.s_xp / nf
            + mx * mx * self.s_pp / nf
            - 3.0 * mx * mx * mp * mp;

        let bessel = nf / (nf - 1.0);
        PairSummary {
            n,
            mean_x: mx,
            mean_p: mp,
            cov_xx: m2x * bessel,
            cov_xp: m11 * bessel,
            cov_pp: m2p * bessel,
            se_mean_x: (m2x / (nf - 1.0)).sqrt(),
            se_mean_p: (m2p / (nf - 1.0)).sqrt(),
            se_cov_xx: ((m4x - m2x * m2x).max(0.0) / nf).sqrt(),
            se_cov_xp: ((m22 - m11 * m11).max(0.0) / nf).sqrt(),
            se_cov_pp: ((m4p - m2p * m2p).max(0.0) / nf).sqrt(),
            degenerate: false,
        }
    }
}

impl Mergeable for PairAccumulator {
    fn merge(&mut self, o: &Self) {
        self.n += o.n;
        self.s_x += o.s_x;
        self.s_p += o.s_p;
        self.s_xx += o.s_xx;
        self.s_xp += o.s_xp;
        self.s_pp += o.s_pp;
        self.s_xxx += o.s_xxx;
        self.s_xxp += o.s_xxp;
        self.s_xpp += o.s_xpp;
        self.s_ppp += o.s_ppp;
        self.s_xxxx += o.s_xxxx;
        self.s_xxpp += o.s_xxpp;
        self.s_pppp += o.s_pppp;
    }
}

/// Mean and standard error of a scalar sample.
#[derive(Debug, Clone, Default)]
pub struct ScalarAccumulator {
    pub n: u64,
    s: f64,
    s2: f64,
}

impl ScalarAccumulator {
    pub fn push(&mut self, v: f64) {
        self.n += 1;
        self.s += v;
        self.s2 += v * v;
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.s / self.n as f64
        }
    }

    pub fn standard_error(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let nf = self.n as f64;
        let var = (self.s2 / nf - (self.s / nf).powi(2)).max(0.0) * nf / (nf - 1.0);
        (var / nf).sqrt()
    }
}

impl Mergeable for ScalarAccumulator {
    fn merge(&mut self, o: &Self) {
        self.n += o.n;
        self.s += o.s;
        self.s2 += o.s2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    /// Two-pass reference for the pair summary.
    fn direct(xs: &[f64], ps: &[f64]) -> PairSummary {
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let mp = ps.iter().sum::<f64>() / n;
        let cm = |k: usize, l: usize| -> f64 {
            xs.iter()
                .zip(ps)
                .map(|(&x, &p)| (x - mx).powi(k as i32) * (p - mp).powi(l as i32))
                .sum::<f64>()
                / n
        };
        let (m2x, m11, m2p) = (cm(2, 0), cm(1, 1), cm(0, 2));
        PairSummary {
            n: xs.len() as u64,
            mean_x: mx,
            mean_p: mp,
            cov_xx: m2x * n / (n - 1.0),
            cov_xp: m11 * n / (n - 1.0),
            cov_pp: m2p * n / (n - 1.0),
            se_mean_x: (m2x / (n - 1.0)).sqrt(),
            se_mean_p: (m2p / (n - 1.0)).sqrt(),
            se_cov_xx: ((cm(4, 0) - m2x * m2x) / n).sqrt(),
            se_cov_xp: ((cm(2, 2) - m11 * m11) / n).sqrt(),
            se_cov_pp: ((cm(0, 4) - m2p * m2p) / n).sqrt(),
            degenerate: false,
        }
    }

    #[test]
    fn matches_two_pass_reference() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(1);
        let xs: Vec<f64> = (0..5000).map(|_| rng.random::<f64>() * 2.0 - 0.3).collect();
        let ps: Vec<f64> = xs
            .iter()
            .map(|x| 0.5 * x + rng.random::<f64>())
            .collect();
        let mut acc = PairAccumulator::default();
        for (&x, &p) in xs.iter().zip(&ps) {
            acc.push(x, p);
        }
        let a = acc.summary();
        let b = direct(&xs, &ps);
        for (u, v) in [
            (a.mean_x, b.mean_x),
            (a.mean_p, b.mean_p),
            (a.cov_xx, b.cov_xx),
            (a.cov_xp, b.cov_xp),
            (a.cov_pp, b.cov_pp),
            (a.se_mean_x, b.se_mean_x),
            (a.se_cov_xx, b.se_cov_xx),
            (a.se_cov_xp, b.se_cov_xp),
            (a.se_cov_pp, b.se_cov_pp),
        ] {
            assert!((u - v).abs() <= 1e-10 * (1.0 + v.abs()), "{u} vs {v}");
        }
    }

    #[test]
    fn single_sample_is_degenerate() {
        let mut acc = PairAccumulator::default();
        acc.push(1.0, 2.0);
        let s = acc.summary();
        assert!(s.degenerate);
        assert_eq!((s.cov_xx, s.cov_xp, s.cov_pp), (0.0, 0.0, 0.0));
        assert_eq!((s.mean_x, s.mean_p), (1.0, 2.0));
    }

    #[test]
    fn tree_merge_equals_sequential_fill() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(2);
        let data: Vec<(f64, f64)> = (0..1024)
            .map(|_| (rng.random::<f64>(), rng.random::<f64>()))
            .collect();
        let mut whole = PairAccumulator::default();
        for &(x, p) in &data {
            whole.push(x, p);
        }
        let chunks: Vec<PairAccumulator> = data
            .chunks(64)
            .map(|c| {
                let mut a = PairAccumulator::default();
                for &(x, p) in c {
                    a.push(x, p);
                }
                a
            })
            .collect();
        let merged = tree_merge(chunks).unwrap();
        // same additions in a different association: close but not identical
        let a = whole.summary();
        let b = merged.summary();
        assert!((a.cov_xx - b.cov_xx).abs() < 1e-12 * a.cov_xx.abs().max(1.0));
        // identical chunking must be bit-identical regardless of merge shape
        let again = tree_merge(
            data.chunks(64)
                .map(|c| {
                    let mut a = PairAccumulator::default();
                    for &(x, p) in c {
                        a.push(x, p);
                    }
                    a
                })
                .collect(),
        )
        .unwrap();
        assert_eq!(merged.summary().cov_xx.to_bits(), again.summary().cov_xx.to_bits());
    }
}
