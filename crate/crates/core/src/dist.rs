//! Parametric distributions used by the simulators.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, Continuous, ContinuousCDF, Normal};

use crate::error::{invalid, Error, Result};
use crate::numerics::bisect;

fn std_normal() -> Normal {
    Normal::standard()
}

pub fn norm_cdf(x: f64) -> f64 {
    std_normal().cdf(x)
}

pub fn norm_pdf(x: f64) -> f64 {
    std_normal().pdf(x)
}

/// Standard normal quantile; `0 -> -inf`, `1 -> +inf`.
pub fn norm_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        f64::NEG_INFINITY
    } else if p >= 1.0 {
        f64::INFINITY
    } else {
        std_normal().inverse_cdf(p)
    }
}

/// Normal distribution truncated to `[lower, upper]`. A zero `sd` gives the
/// point mass at `mean`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncatedNormal {
    pub mean: f64,
    pub sd: f64,
    pub lower: f64,
    pub upper: f64,
}

impl TruncatedNormal {
    pub fn new(mean: f64, sd: f64, lower: f64, upper: f64) -> Result<Self> {
        let d = TruncatedNormal { mean, sd, lower, upper };
        d.validate()?;
        Ok(d)
    }

    pub fn point(value: f64) -> Self {
        TruncatedNormal { mean: value, sd: 0.0, lower: value, upper: value }
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.mean, self.sd, self.lower, self.upper].iter().all(|v| v.is_finite()) {
            return invalid("truncated normal parameters must be finite");
        }
        if self.sd < 0.0 || self.lower > self.upper {
            return invalid(format!(
                "truncated normal needs sd >= 0 and lower <= upper, got {self:?}"
            ));
        }
        if self.sd == 0.0 && !(self.lower <= self.mean && self.mean <= self.upper) {
            return invalid(format!("point mass {} outside [{}, {}]", self.mean, self.lower, self.upper));
        }
        if self.sd > 0.0 && self.lower == self.upper {
            return invalid("positive sd needs a non-empty support");
        }
        Ok(())
    }

    pub fn is_degenerate(&self) -> bool {
        self.sd == 0.0
    }

    fn std_bounds(&self) -> (f64, f64) {
        (
            norm_cdf((self.lower - self.mean) / self.sd),
            norm_cdf((self.upper - self.mean) / self.sd),
        )
    }

    pub fn quantile(&self, u: f64) -> f64 {
        self.sampler().quantile(u)
    }

    /// Quantile function with the truncation probabilities precomputed.
    pub fn sampler(&self) -> TnQuantile {
        let (pa, pb) = if self.is_degenerate() { (0.0, 1.0) } else { self.std_bounds() };
        TnQuantile { dist: *self, pa, pb }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if self.is_degenerate() {
            return if x >= self.mean { 1.0 } else { 0.0 };
        }
        if x <= self.lower {
            return 0.0;
        }
        if x >= self.upper {
            return 1.0;
        }
        let (pa, pb) = self.std_bounds();
        ((norm_cdf((x - self.mean) / self.sd) - pa) / (pb - pa)).clamp(0.0, 1.0)
    }

    /// Density; zero for point masses.
    pub fn pdf(&self, x: f64) -> f64 {
        if self.is_degenerate() || x < self.lower || x > self.upper {
            return 0.0;
        }
        let (pa, pb) = self.std_bounds();
        norm_pdf((x - self.mean) / self.sd) / (self.sd * (pb - pa))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TnQuantile {
    dist: TruncatedNormal,
    pa: f64,
    pb: f64,
}

impl TnQuantile {
    #[inline]
    pub fn quantile(&self, u: f64) -> f64 {
        let d = &self.dist;
        if d.is_degenerate() {
            return d.mean;
        }
        if u <= 0.0 {
            return d.lower;
        }
        if u >= 1.0 {
            return d.upper;
        }
        let p = self.pa + u.clamp(0.0, 1.0) * (self.pb - self.pa);
        (d.mean + d.sd * norm_quantile(p)).clamp(d.lower, d.upper)
    }
}

/// Quantile grid used to verify dominance between two marginals.
const DOMINANCE_GRID: usize = 4096;

/// Checks that `upper` strictly dominates `lower` quantile by quantile, which
/// for these continuous marginals is first-order stochastic dominance with a
/// strict per-draw ordering under comonotone coupling.
pub fn check_quantile_dominance(
    upper: &TruncatedNormal,
    lower: &TruncatedNormal,
    what: &str,
) -> Result<()> {
    let (qu, ql) = (upper.sampler(), lower.sampler());
    for i in 0..=DOMINANCE_GRID {
        let u = i as f64 / DOMINANCE_GRID as f64;
        let (a, b) = (qu.quantile(u), ql.quantile(u));
        if !(a > b) {
            return Err(Error::NotDominated(format!(
                "{what}: quantile at u={u} is {a}, not above {b}"
            )));
        }
    }
    Ok(())
}

/// Initial-wage prior: a Beta(alpha, beta) rescaled to `[w_min, w_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuousWageDist {
    pub w_min: f64,
    pub w_max: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl ContinuousWageDist {
    pub fn new(w_min: f64, w_max: f64, alpha: f64, beta: f64) -> Result<Self> {
        let d = ContinuousWageDist { w_min, w_max, alpha, beta };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.w_min && self.w_min < self.w_max && self.w_max.is_finite()) {
            return invalid(format!(
                "wage support needs 0 < w_min < w_max, got [{}, {}]",
                self.w_min, self.w_max
            ));
        }
        if !(self.alpha > 0.0 && self.beta > 0.0 && self.alpha.is_finite() && self.beta.is_finite()) {
            return invalid(format!(
                "beta shapes must be positive, got alpha={}, beta={}",
                self.alpha, self.beta
            ));
        }
        Ok(())
    }

    /// Moment-matched prior with the mean at fraction `mean_frac` of the
    /// support and the given skewness. With the mean fixed, skewness has the
    /// sign of `1 - 2 mean_frac` and magnitude below
    /// `|1 - 2m| / sqrt(m (1 - m))`, reached as the prior collapses onto the
    /// two endpoints.
    pub fn from_mean_skewness(w_min: f64, w_max: f64, mean_frac: f64, skewness: f64) -> Result<Self> {
        if !(mean_frac > 0.0 && mean_frac < 1.0) {
            return invalid(format!("mean fraction must lie in (0, 1), got {mean_frac}"));
        }
        let m = mean_frac;
        let scale = 2.0 * (1.0 - 2.0 * m) / (m * (1.0 - m)).sqrt();
        // skewness = scale * sqrt(nu + 1) / (nu + 2), decreasing in nu from scale/2
        if scale == 0.0 {
            return invalid("a centred mean fixes skewness at 0; no shape to choose");
        }
        let ratio = skewness / scale;
        if !(ratio > 0.0 && ratio < 0.5) {
            return invalid(format!(
                "skewness {skewness} unreachable with mean fraction {m}; reachable range is ({}, {}) exclusive",
                scale.min(0.0) / 2.0,
                scale.max(0.0) / 2.0
            ));
        }
        // Solve sqrt(nu + 1) / (nu + 2) = ratio: with s = sqrt(nu + 1),
        // ratio * s^2 - s + ratio = 0, larger root.
        let disc = 1.0 - 4.0 * ratio * ratio;
        let s = (1.0 + disc.sqrt()) / (2.0 * ratio);
        let nu = s * s - 1.0;
        Self::new(w_min, w_max, m * nu, (1.0 - m) * nu)
    }

    pub fn width(&self) -> f64 {
        self.w_max - self.w_min
    }

    fn beta(&self) -> Beta {
        Beta::new(self.alpha, self.beta).expect("validated shapes")
    }

    pub fn mean(&self) -> f64 {
        self.w_min + self.width() * self.alpha / (self.alpha + self.beta)
    }

    pub fn skewness(&self) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        2.0 * (b - a) * (a + b + 1.0).sqrt() / ((a + b + 2.0) * (a * b).sqrt())
    }

    pub fn cdf(&self, w: f64) -> f64 {
        if w <= self.w_min {
            return 0.0;
        }
        if w >= self.w_max {
            return 1.0;
        }
        self.beta().cdf((w - self.w_min) / self.width())
    }

    pub fn pdf(&self, w: f64) -> f64 {
        if w <= self.w_min || w >= self.w_max {
            return 0.0;
        }
        self.beta().pdf((w - self.w_min) / self.width()) / self.width()
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        if u == 0.0 {
            return self.w_min;
        }
        if u == 1.0 {
            return self.w_max;
        }
        let b = self.beta();
        let x = bisect(0.0, 1.0, 1e-15, |x| b.cdf(x) - u);
        self.w_min + self.width() * x
    }
}
