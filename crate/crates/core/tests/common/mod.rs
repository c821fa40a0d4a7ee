//! Independent oracles shared by the integration tests. Nothing here calls
//! the solver code it is used to check.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Eight-point Gauss–Legendre rule on [-1, 1] (tabulated values).
const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
];

/// Composite eight-point rule over `panels` equal panels of `[a, b]`.
pub fn composite_gl(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(8 * panels);
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * h;
        for &(x, w) in &GL8 {
            out.push((mid + 0.5 * h * x, 0.5 * h * w));
        }
    }
    out
}

pub fn bisect(mut lo: f64, mut hi: f64, iters: usize, above: impl Fn(f64) -> bool) -> f64 {
    // invariant: !above(lo), above(hi)
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if above(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Two-type match written out independently: log utility
/// `ln w - eta ln z`, outside option net of `c`.
#[derive(Clone, Copy, Debug)]
pub struct TwoType {
    pub eta: f64,
    pub w_low: f64,
    pub w_high: f64,
    pub z: f64,
    pub c: f64,
    pub z_new: f64,
    pub c_disclose: f64,
    pub c_withhold: f64,
    pub f_low: f64,
}

impl TwoType {
    fn outside(&self, w: f64) -> f64 {
        w.ln() - self.eta * self.z.ln() - self.c
    }

    fn inside(&self, offer: f64, cost: f64) -> f64 {
        if offer > 0.0 {
            offer.ln() - self.eta * self.z_new.ln() - cost
        } else {
            f64::NEG_INFINITY
        }
    }

    /// Smallest offer making `cost`-burdened acceptance reach `target`,
    /// found by bisection on the utility itself.
    pub fn offer_reaching(&self, target: f64, cost: f64) -> f64 {
        let mut hi = 1.0;
        while self.inside(hi, cost) < target {
            hi *= 2.0;
        }
        bisect(0.0, hi, 200, |x| self.inside(x, cost) >= target)
    }

    pub fn reservation(&self, w: f64, cost: f64) -> f64 {
        self.offer_reaching(self.outside(w), cost)
    }

    /// Profit from one type facing withhold offer `w0`, with the firm's
    /// best disclosure offer for that type. Offers are capped at `z_new`.
    fn type_profit(&self, w: f64, w0: f64) -> f64 {
        let v_out = self.outside(w);
        let v_withhold = self.inside(w0, self.c_withhold);
        let stay = v_withhold.max(v_out);
        let no_disclosure = if v_withhold >= v_out { self.z_new - w0 } else { 0.0 };
        // cheapest disclosure offer the worker takes over both alternatives
        let w1 = self.offer_reaching(stay, self.c_disclose);
        let via_disclosure = if w1 <= self.z_new { self.z_new - w1 } else { f64::NEG_INFINITY };
        no_disclosure.max(via_disclosure)
    }

    fn profit_at(&self, w0: f64) -> f64 {
        self.f_low * self.type_profit(self.w_low, w0) + (1.0 - self.f_low) * self.type_profit(self.w_high, w0)
    }

    /// Best expected profit over withhold offers on a grid of `[0, z_new]`,
    /// refined by a second grid around the best point.
    pub fn brute_force_profit(&self, points: usize) -> f64 {
        let grid_best = |lo: f64, hi: f64| {
            (0..points)
                .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
                .map(|w0| (w0, self.profit_at(w0)))
                .fold((0.0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a })
        };
        let step = self.z_new / (points - 1) as f64;
        let (w0, _) = grid_best(0.0, self.z_new);
        let (_, best) = grid_best((w0 - 2.0 * step).max(0.0), (w0 + 2.0 * step).min(self.z_new));
        // reservation points themselves: grids approach them only from one side
        let exact = [self.reservation(self.w_low, self.c_withhold), self.reservation(self.w_high, self.c_withhold)]
            .into_iter()
            .filter(|&w| w <= self.z_new)
            .map(|w| self.profit_at(w * (1.0 + 1e-13)))
            .fold(f64::NEG_INFINITY, f64::max);
        best.max(exact).max(0.0)
    }

    /// Low-earner share at which separating and pooling tie, by bisection
    /// on their profit difference.
    pub fn threshold_by_bisection(&self) -> f64 {
        let r_l0 = self.reservation(self.w_low, self.c_withhold);
        let r_h0 = self.reservation(self.w_high, self.c_withhold);
        let r_h1 = self.reservation(self.w_high, self.c_disclose);
        let sep_minus_pool = |f: f64| f * (self.z_new - r_l0) + (1.0 - f) * (self.z_new - r_h1) - (self.z_new - r_h0);
        bisect(0.0, 1.0, 200, |f| sep_minus_pool(f) > 0.0)
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    lo + (hi - lo) * u
}

/// Integral over `(0, 1)` of a function that is smooth between the points
/// where its discrete `signature` changes. Changes are located on a coarse
/// grid and refined by bisection; each smooth piece gets a composite rule.
pub fn piecewise_integral<S: PartialEq, const N: usize>(
    coarse: usize,
    eval: impl Fn(f64) -> (S, [f64; N]),
) -> [f64; N] {
    let eps = 1e-12;
    let grid: Vec<f64> = (0..=coarse).map(|i| (i as f64 / coarse as f64).clamp(eps, 1.0 - eps)).collect();
    let sigs: Vec<S> = grid.iter().map(|&u| eval(u).0).collect();
    let mut cuts = vec![grid[0]];
    for i in 0..coarse {
        if sigs[i] != sigs[i + 1] {
            let left = &sigs[i];
            cuts.push(bisect(grid[i], grid[i + 1], 60, |u| eval(u).0 != *left));
        }
    }
    cuts.push(grid[coarse]);
    let mut total = [0.0; N];
    for w in cuts.windows(2) {
        for (u, wt) in composite_gl(w[0], w[1], 1) {
            let v = eval(u).1;
            for k in 0..N {
                total[k] += wt * v[k];
            }
        }
    }
    total
}
