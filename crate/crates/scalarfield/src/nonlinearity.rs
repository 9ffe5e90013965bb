//! Berestycki–Lions nonlinearities.
//!
//! A `NonlinearitySpec` bundles the odd map g, its primitive G, the mass
//! constant m from the near-zero behaviour g(s)/s → −m, a point ξ₀ with
//! G(ξ₀) > 0, and the ambient dimension N (which fixes the critical exponent
//! 2* = 2N/(N−2)). Truncation clamps g to zero above its first zero ξ₁ ≥ ξ₀;
//! the splitting g = g₁ − g₂ isolates the nonnegative part g₁ = max(g+ms, 0)
//! with g₂(s) ≥ ms for s ≥ 0.

use crate::interp1d::MonotoneCubic;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NonlinearityError {
    #[error("assumption (g1) violated: mass constant must be positive, got m = {0}")]
    NonPositiveMass(f64),
    #[error("assumption (g3) violated: G(xi0) = {g_at_xi0} <= 0 at xi0 = {xi0}")]
    PrimitiveNotPositive { xi0: f64, g_at_xi0: f64 },
    #[error("assumption (g1) violated: sampled g(s)/s does not approach -m near 0 (got {observed} vs -m = {expected})")]
    MassMismatch { observed: f64, expected: f64 },
    #[error("ambient dimension must satisfy N >= 3, got {0}")]
    DimensionTooSmall(u32),
    #[error("power exponent must satisfy p > 2, got p = {0}")]
    ExponentTooSmall(f64),
    #[error("cubic-quintic coefficients must be positive, got a = {a}, b = {b}")]
    BadCubicQuintic { a: f64, b: f64 },
    #[error("tabulated nonlinearity needs at least 4 samples on s >= 0 starting at s = 0")]
    BadTable,
    #[error("xi0 = {0} must be positive and finite")]
    BadXi0(f64),
    #[error(
        "cannot determine truncation level: g stays negative past the sampled range above xi0 = {0} with no zero"
    )]
    UndeterminableXi1(f64),
}

/// Built-in families plus tabulated data. All are stored on s ≥ 0 and
/// extended oddly.
#[derive(Debug, Clone)]
pub enum Family {
    /// g(s) = −m s + |s|^{p−2} s.
    Power { p: f64 },
    /// g(s) = −m s + a s³ − b s⁵.
    CubicQuintic { a: f64, b: f64 },
    /// Samples of g on s ≥ 0 with monotone-cubic interpolation; the primitive
    /// is the exact integral of the interpolant.
    Tabulated(Box<TabulatedG>),
}

#[derive(Debug, Clone)]
pub struct TabulatedG {
    spline: MonotoneCubic,
}

impl TabulatedG {
    fn g(&self, s: f64) -> f64 {
        self.spline.eval(s)
    }
    fn primitive(&self, s: f64) -> f64 {
        let s_max = self.spline.x_max();
        if s <= s_max {
            self.spline.integral_from_start(s)
        } else {
            // Hold the last sample beyond the table.
            self.spline.integral_from_start(s_max) + self.spline.eval(s_max) * (s - s_max)
        }
    }
}

#[derive(Debug, Clone)]
pub struct NonlinearitySpec {
    family: Family,
    mass: f64,
    xi0: f64,
    /// Truncation level ξ₁; `None` means +∞ (no truncation applied or needed).
    xi1: Option<f64>,
    truncated: bool,
    dim_n: u32,
    warnings: Vec<String>,
}

impl NonlinearitySpec {
    pub fn power(mass: f64, p: f64, xi0: Option<f64>, dim_n: u32) -> Result<Self, NonlinearityError> {
        if p <= 2.0 {
            return Err(NonlinearityError::ExponentTooSmall(p));
        }
        let family = Family::Power { p };
        // G > 0 exactly above (p m / 2)^{1/(p-2)}.
        let default_xi0 = (p * mass / 2.0).powf(1.0 / (p - 2.0)) * 1.25;
        Self::build(family, mass, xi0.unwrap_or(default_xi0), dim_n)
    }

    pub fn cubic_quintic(
        mass: f64,
        a: f64,
        b: f64,
        xi0: Option<f64>,
        dim_n: u32,
    ) -> Result<Self, NonlinearityError> {
        if a <= 0.0 || b <= 0.0 {
            return Err(NonlinearityError::BadCubicQuintic { a, b });
        }
        let family = Family::CubicQuintic { a, b };
        let xi0 = match xi0 {
            Some(v) => v,
            None => scan_for_positive_primitive(&family, mass)
                .ok_or(NonlinearityError::PrimitiveNotPositive { xi0: f64::NAN, g_at_xi0: 0.0 })?,
        };
        Self::build(family, mass, xi0, dim_n)
    }

    /// `samples` are (s, g(s)) pairs on s ≥ 0; the first must be (0, 0).
    pub fn tabulated(
        samples: &[(f64, f64)],
        mass: f64,
        xi0: f64,
        dim_n: u32,
    ) -> Result<Self, NonlinearityError> {
        if samples.len() < 4 || samples[0].0 != 0.0 {
            return Err(NonlinearityError::BadTable);
        }
        let x: Vec<f64> = samples.iter().map(|p| p.0).collect();
        let y: Vec<f64> = samples.iter().map(|p| p.1).collect();
        let spline = MonotoneCubic::new(x, y);
        Self::build(Family::Tabulated(Box::new(TabulatedG { spline })), mass, xi0, dim_n)
    }

    fn build(family: Family, mass: f64, xi0: f64, dim_n: u32) -> Result<Self, NonlinearityError> {
        if mass <= 0.0 || !mass.is_finite() {
            return Err(NonlinearityError::NonPositiveMass(mass));
        }
        if dim_n < 3 {
            return Err(NonlinearityError::DimensionTooSmall(dim_n));
        }
        if !(xi0.is_finite() && xi0 > 0.0) {
            return Err(NonlinearityError::BadXi0(xi0));
        }
        let mut spec = Self {
            family,
            mass,
            xi0,
            xi1: None,
            truncated: false,
            dim_n,
            warnings: Vec::new(),
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&mut self) -> Result<(), NonlinearityError> {
        // (g3): positivity of the primitive at xi0.
        let g_at = self.primitive(self.xi0);
        if g_at <= 0.0 {
            return Err(NonlinearityError::PrimitiveNotPositive { xi0: self.xi0, g_at_xi0: g_at });
        }
        // (g1): sampled limsup g(s)/s = -m on the geometric ladder s = 2^-k.
        // Tabulated data can only witness the limit at the table's resolution,
        // so its tolerance is wider.
        let tol = match &self.family {
            Family::Tabulated(_) => 5e-2,
            _ => 1e-2,
        };
        let mut last_ratio = f64::NAN;
        for k in 4..=40 {
            let s = (2.0f64).powi(-k);
            last_ratio = self.g_raw(s) / s;
        }
        if !((last_ratio + self.mass).abs() <= tol * self.mass.max(1.0)) {
            return Err(NonlinearityError::MassMismatch { observed: last_ratio, expected: self.mass });
        }
        // (g2)/(eq:NewCond1) at infinity, sampled on s = 2^k. Non-decay is a
        // warning rather than an error: the box-truncated discrete problem is
        // well-posed regardless, and critical-exponent runs are legitimate
        // stress cases.
        let two_star = self.two_star();
        let s_hi = (2.0f64).powi(12);
        let ratio_hi = self.g1_raw(s_hi) / s_hi.powf(two_star - 1.0);
        let ratio_mid = self.g1_raw(s_hi / 64.0) / (s_hi / 64.0).powf(two_star - 1.0);
        if ratio_hi.abs() > 1e-8 && ratio_hi.abs() >= ratio_mid.abs() * 0.9 {
            self.warnings.push(format!(
                "sampled g1(s)/s^(2*-1) does not decay at large s (ratio {ratio_hi:.3e}); \
                 growth is critical or supercritical for N = {}",
                self.dim_n
            ));
        }
        Ok(())
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }
    pub fn xi0(&self) -> f64 {
        self.xi0
    }
    /// Truncation level; +∞ encoded as `None`.
    pub fn xi1(&self) -> Option<f64> {
        self.xi1
    }
    pub fn dim_n(&self) -> u32 {
        self.dim_n
    }
    pub fn is_truncated(&self) -> bool {
        self.truncated
    }
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
    /// Critical Sobolev exponent 2* = 2N/(N−2).
    pub fn two_star(&self) -> f64 {
        let n = self.dim_n as f64;
        2.0 * n / (n - 2.0)
    }

    /// Raw family g on s ≥ 0 (no truncation, no odd extension).
    fn g_raw(&self, s: f64) -> f64 {
        debug_assert!(s >= 0.0);
        match &self.family {
            Family::Power { p } => -self.mass * s + s.powf(p - 1.0),
            Family::CubicQuintic { a, b } => -self.mass * s + a * s.powi(3) - b * s.powi(5),
            Family::Tabulated(t) => t.g(s),
        }
    }

    fn primitive_raw(&self, s: f64) -> f64 {
        debug_assert!(s >= 0.0);
        match &self.family {
            Family::Power { p } => -self.mass * s * s / 2.0 + s.powf(*p) / p,
            Family::CubicQuintic { a, b } => {
                -self.mass * s * s / 2.0 + a * s.powi(4) / 4.0 - b * s.powi(6) / 6.0
            }
            Family::Tabulated(t) => t.primitive(s),
        }
    }

    /// g₁ before truncation: max(g + m s, 0) on s ≥ 0.
    fn g1_raw(&self, s: f64) -> f64 {
        (self.g_raw(s) + self.mass * s).max(0.0)
    }

    /// The (possibly truncated) odd nonlinearity.
    pub fn g(&self, s: f64) -> f64 {
        let a = s.abs();
        let v = match self.xi1 {
            Some(x1) if a > x1 => 0.0,
            _ => self.g_raw(a),
        };
        if s < 0.0 {
            -v
        } else {
            v
        }
    }

    /// G(s) = ∫₀ˢ g; even by oddness of g.
    pub fn primitive(&self, s: f64) -> f64 {
        let a = s.abs();
        match self.xi1 {
            Some(x1) if a > x1 => self.primitive_raw(x1),
            _ => self.primitive_raw(a),
        }
    }

    /// g₁(s) = max(g(s)+ms, 0) for s ≥ 0, odd extension below.
    pub fn g1(&self, s: f64) -> f64 {
        let a = s.abs();
        let v = match self.xi1 {
            // Above the truncation level g vanishes, so g+ms = ms > 0.
            Some(x1) if a > x1 => self.mass * a,
            _ => self.g1_raw(a),
        };
        if s < 0.0 {
            -v
        } else {
            v
        }
    }

    /// g₂ = g₁ − g on s ≥ 0, odd extension below; satisfies g₂(s) ≥ m s.
    pub fn g2(&self, s: f64) -> f64 {
        self.g1(s) - self.g(s)
    }

    /// G₁(s) = ∫₀ˢ g₁ (even).
    pub fn primitive1(&self, s: f64) -> f64 {
        let a = s.abs();
        let core = |t: f64| -> f64 {
            match &self.family {
                Family::Power { p } => t.powf(*p) / p,
                Family::CubicQuintic { a: ca, b: cb } => {
                    // g + ms = ca s^3 - cb s^5 >= 0 exactly on [0, sqrt(ca/cb)].
                    let sc = (ca / cb).sqrt();
                    let tt = t.min(sc);
                    ca * tt.powi(4) / 4.0 - cb * tt.powi(6) / 6.0
                }
                Family::Tabulated(_) => self.quad_g1(t),
            }
        };
        match self.xi1 {
            Some(x1) if a > x1 => core(x1) + self.mass * (a * a - x1 * x1) / 2.0,
            _ => core(a),
        }
    }

    /// G₂ = G₁ − G (even).
    pub fn primitive2(&self, s: f64) -> f64 {
        self.primitive1(s) - self.primitive(s)
    }

    /// Composite-Simpson quadrature of g₁ for tabulated families.
    fn quad_g1(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let n = 512;
        let h = s / n as f64;
        let mut acc = self.g1_raw(0.0) + self.g1_raw(s);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * self.g1_raw(i as f64 * h);
        }
        acc * h / 3.0
    }

    /// Applies the truncation g ↦ g̃: unchanged when g ≥ 0 on [ξ₀, ∞), else
    /// clamps g to zero above ξ₁ = inf{ξ ≥ ξ₀ : g(ξ) = 0}. Idempotent.
    pub fn truncated(mut self) -> Result<Self, NonlinearityError> {
        if self.truncated {
            return Ok(self);
        }
        self.xi1 = self.find_xi1()?;
        self.truncated = true;
        Ok(self)
    }

    /// Locates the smallest zero of g at or above ξ₀ by ladder scan plus
    /// bisection to 1e−12. Returns `None` when g stays nonnegative.
    fn find_xi1(&self) -> Result<Option<f64>, NonlinearityError> {
        let scan_hi = match &self.family {
            Family::Tabulated(t) => t.spline.x_max(),
            // Polynomial families are sign-definite beyond any zeros; a wide
            // multiple of xi0 is enough to find the first crossing.
            _ => self.xi0 * 64.0,
        };
        if scan_hi <= self.xi0 {
            return Ok(None);
        }
        let steps = 1 << 14;
        let dh = (scan_hi - self.xi0) / steps as f64;
        let mut prev_s = self.xi0;
        let mut prev_g = self.g_raw(prev_s);
        if prev_g == 0.0 {
            return Ok(Some(prev_s));
        }
        let mut any_negative = prev_g < 0.0;
        for i in 1..=steps {
            let s = self.xi0 + i as f64 * dh;
            let gs = self.g_raw(s);
            if gs == 0.0 {
                return Ok(Some(s));
            }
            if prev_g > 0.0 && gs < 0.0 || prev_g < 0.0 && gs > 0.0 {
                return Ok(Some(bisect_zero(|t| self.g_raw(t), prev_s, s)));
            }
            any_negative |= gs < 0.0;
            prev_s = s;
            prev_g = gs;
        }
        if any_negative || prev_g < 0.0 {
            // Negative somewhere with no crossing found in range: the level
            // cannot be determined from the sampled range.
            return Err(NonlinearityError::UndeterminableXi1(self.xi0));
        }
        Ok(None)
    }
}

fn bisect_zero(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    debug_assert!(flo * f(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo < 1e-12 * (1.0 + mid.abs()) {
            return mid;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn scan_for_positive_primitive(family: &Family, mass: f64) -> Option<f64> {
    let probe = NonlinearitySpec {
        family: family.clone(),
        mass,
        xi0: 1.0,
        xi1: None,
        truncated: false,
        dim_n: 3,
        warnings: Vec::new(),
    };
    let mut s = 1e-3;
    while s < 1e6 {
        if probe.primitive_raw(s) > 0.0 {
            return Some(s * 1.1);
        }
        s *= 1.05;
    }
    None
}
