//! Barotropic pressure laws and their relative (Bregman) quantities.
//!
//! A law is a pair `(p, h)` tied together by the thermodynamic consistency
//! relations `r h''(r) = p'(r)` and `r h'(r) = p(r) + h(r)`. Only the
//! power-law family `p = k r^γ`, `h = k r^γ / (γ - 1)` is shipped, but the
//! relative quantities are written against [`BarotropicLaw`] so tabulated
//! laws can be plugged in.

use crate::error::{Error, Result};

/// Distances below this are treated as lying on the diagonal `r = r̄`.
pub const DIAGONAL_EXCLUSION: f64 = 1e-8;

/// Pressure/internal-energy pair for one species.
pub trait BarotropicLaw {
    fn p(&self, r: f64) -> f64;
    fn dp(&self, r: f64) -> f64;
    fn d2p(&self, r: f64) -> f64;
    fn h(&self, r: f64) -> f64;
    fn dh(&self, r: f64) -> f64;
    fn d2h(&self, r: f64) -> f64;
    /// Growth exponent `γ` with `h(r) ~ k r^γ / (γ - 1)` at infinity.
    fn exponent(&self) -> f64;
    /// Constant `k̂` with `|p''(r)| ≤ k̂ p'(r) / r`.
    fn curvature_bound(&self) -> f64;

    /// `h(r|r̄) = h(r) - h(r̄) - h'(r̄)(r - r̄)`.
    fn h_rel(&self, r: f64, rbar: f64) -> f64 {
        self.h(r) - self.h(rbar) - self.dh(rbar) * (r - rbar)
    }

    /// `p(r|r̄) = p(r) - p(r̄) - p'(r̄)(r - r̄)`.
    fn p_rel(&self, r: f64, rbar: f64) -> f64 {
        self.p(r) - self.p(rbar) - self.dp(rbar) * (r - rbar)
    }
}

/// Power law `p(r) = k r^γ` with curvature constant `k̂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasLaw {
    pub k: f64,
    pub gamma: f64,
    pub khat: f64,
}

/// `h(r)` together with its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InternalEnergy {
    pub h: f64,
    pub h1: f64,
    pub h2: f64,
}

/// Grid-certified constants of the lower bound
/// `h(r|r̄) ≥ c_quad |r - r̄|²` on `[0, r_switch] × [δ, M]` and
/// `h(r|r̄) ≥ c_power |r - r̄|^γ` on `(r_switch, r_max] × [δ, M]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBoundConstants {
    pub c_quad: f64,
    pub c_power: f64,
    pub r_switch: f64,
    pub delta: f64,
    pub m_cap: f64,
}

impl LowerBoundConstants {
    /// `min(c_quad, c_power)`, the global quadratic constant valid when `γ ≥ 2`.
    pub fn quadratic(&self) -> f64 {
        self.c_quad.min(self.c_power)
    }
}

#[inline]
fn pow(r: f64, e: f64) -> f64 {
    if e == 1.0 {
        r
    } else if e == 2.0 {
        r * r
    } else if e == 3.0 {
        r * r * r
    } else {
        libm::pow(r, e)
    }
}

impl GasLaw {
    pub fn new(k: f64, gamma: f64, khat: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::config("law coefficient k must be positive"));
        }
        if !(gamma > 1.0 && gamma.is_finite()) {
            return Err(Error::config("adiabatic exponent gamma must exceed 1"));
        }
        if !(khat > 0.0 && khat.is_finite()) {
            return Err(Error::config("curvature constant khat must be positive"));
        }
        Ok(Self { k, gamma, khat })
    }

    /// Power law with the admissible curvature constant `k̂ = γ - 1`.
    pub fn power_law(k: f64, gamma: f64) -> Result<Self> {
        Self::new(k, gamma, gamma - 1.0)
    }

    /// Checked `p(r) = k r^γ`.
    pub fn pressure(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::domain("pressure requires r >= 0"));
        }
        Ok(self.p(r))
    }

    /// `h(r)` alone; defined down to `r = 0`.
    pub fn internal_energy_value(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::domain("internal energy requires r >= 0"));
        }
        Ok(self.h(r))
    }

    /// `(h, h', h'')` at `r > 0`.
    pub fn internal_energy(&self, r: f64) -> Result<InternalEnergy> {
        if !(r > 0.0) {
            return Err(Error::domain(
                "internal energy derivatives require r > 0",
            ));
        }
        Ok(InternalEnergy {
            h: self.h(r),
            h1: self.dh(r),
            h2: self.d2h(r),
        })
    }

    /// Checked `h(r|r̄)`.
    pub fn relative_internal(&self, r: f64, rbar: f64) -> Result<f64> {
        check_relative_args(r, rbar)?;
        Ok(self.h_rel(r, rbar))
    }

    /// Checked `p(r|r̄)`.
    pub fn relative_pressure(&self, r: f64, rbar: f64) -> Result<f64> {
        check_relative_args(r, rbar)?;
        Ok(self.p_rel(r, rbar))
    }

    /// `r^γ - r̄^γ - γ r̄^{γ-1}(r - r̄)`, evaluated without cancellation near
    /// the diagonal. Both relative quantities are multiples of it.
    fn bregman_kernel(&self, r: f64, rbar: f64) -> f64 {
        let g = self.gamma;
        let x = r / rbar - 1.0;
        let scale = pow(rbar, g);
        if x.abs() < 1e-2 {
            // binomial series: sum_{j>=2} C(g, j) x^j
            let mut coef = g * (g - 1.0) / 2.0;
            let mut xp = x * x;
            let mut sum = 0.0;
            let mut j = 2.0;
            while j < 40.0 {
                let term = coef * xp;
                sum += term;
                if term.abs() <= 1e-18 * sum.abs() {
                    break;
                }
                coef *= (g - j) / (j + 1.0);
                xp *= x;
                j += 1.0;
            }
            scale * sum
        } else {
            let pw = if x == -1.0 {
                -1.0
            } else {
                libm::expm1(g * libm::log1p(x))
            };
            scale * (pw - g * x)
        }
    }

    /// Brute-force lower-bound constants for `h(r|r̄)` on a `grid_n × grid_n`
    /// sample of `[0, M+1] × [δ, M]` (quadratic branch) and
    /// `(M+1, r_max] × [δ, M]` (power branch).
    ///
    /// Points within [`DIAGONAL_EXCLUSION`] of the diagonal are replaced by
    /// the analytic limit `h''(r̄)/2` of the quadratic ratio.
    pub fn lower_bound_constants(
        &self,
        delta: f64,
        m_cap: f64,
        r_max: f64,
        grid_n: usize,
    ) -> Result<LowerBoundConstants> {
        if !(delta > 0.0) || !(m_cap >= delta) {
            return Err(Error::domain("need 0 < delta <= m_cap"));
        }
        if grid_n < 100 {
            return Err(Error::domain("grid_n must be at least 100"));
        }
        let r_switch = m_cap + 1.0;
        if !(r_max > r_switch) {
            return Err(Error::domain(
                "empty search region: r_max must exceed m_cap + 1",
            ));
        }
        let last = (grid_n - 1) as f64;
        let mut c_quad = f64::INFINITY;
        let mut c_power = f64::INFINITY;
        for jb in 0..grid_n {
            let rbar = delta + (m_cap - delta) * jb as f64 / last;
            for ir in 0..grid_n {
                let r = r_switch * ir as f64 / last;
                let d = r - rbar;
                let ratio = if d.abs() < DIAGONAL_EXCLUSION {
                    0.5 * self.d2h(rbar)
                } else {
                    self.h_rel(r, rbar) / (d * d)
                };
                c_quad = c_quad.min(ratio);

                // power branch excludes its left end point r = r_switch
                let r = r_switch + (r_max - r_switch) * (ir + 1) as f64 / grid_n as f64;
                let d = (r - rbar).abs();
                c_power = c_power.min(self.h_rel(r, rbar) / pow(d, self.gamma));
            }
        }
        if !(c_quad > 0.0 && c_power > 0.0) {
            return Err(Error::domain("lower-bound search produced a non-positive constant"));
        }
        Ok(LowerBoundConstants {
            c_quad,
            c_power,
            r_switch,
            delta,
            m_cap,
        })
    }
}

fn check_relative_args(r: f64, rbar: f64) -> Result<()> {
    if !(rbar > 0.0) {
        return Err(Error::domain("reference density rbar must be positive"));
    }
    if !(r >= 0.0) {
        return Err(Error::domain("density r must be non-negative"));
    }
    Ok(())
}

impl BarotropicLaw for GasLaw {
    #[inline]
    fn p(&self, r: f64) -> f64 {
        self.k * pow(r, self.gamma)
    }
    #[inline]
    fn dp(&self, r: f64) -> f64 {
        self.k * self.gamma * pow(r, self.gamma - 1.0)
    }
    #[inline]
    fn d2p(&self, r: f64) -> f64 {
        self.k * self.gamma * (self.gamma - 1.0) * pow(r, self.gamma - 2.0)
    }
    #[inline]
    fn h(&self, r: f64) -> f64 {
        self.k * pow(r, self.gamma) / (self.gamma - 1.0)
    }
    #[inline]
    fn dh(&self, r: f64) -> f64 {
        self.k * self.gamma / (self.gamma - 1.0) * pow(r, self.gamma - 1.0)
    }
    #[inline]
    fn d2h(&self, r: f64) -> f64 {
        self.k * self.gamma * pow(r, self.gamma - 2.0)
    }
    fn exponent(&self) -> f64 {
        self.gamma
    }
    fn curvature_bound(&self) -> f64 {
        self.khat
    }
    #[inline]
    fn h_rel(&self, r: f64, rbar: f64) -> f64 {
        self.k / (self.gamma - 1.0) * self.bregman_kernel(r, rbar)
    }
    #[inline]
    fn p_rel(&self, r: f64, rbar: f64) -> f64 {
        self.k * self.bregman_kernel(r, rbar)
    }
}
