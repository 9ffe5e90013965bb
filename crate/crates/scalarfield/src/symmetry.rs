//! Sector projections and explicit constructions in the swap-antisymmetric
//! space X_τ: the τ-projection (u(r₁,r₂,·) − u(r₂,r₁,·))/2, the plateau-bump
//! initializer ũ = u_rad(|x|)·φ(r₁−r₂) with positive ∫G, and the odd
//! sphere-family of multi-shell seeds used by deflated multi-start.

use crate::field::Field;
use crate::grid::{GridError, ReducedGrid, SectorKind};
use crate::nonlinearity::NonlinearitySpec;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SymmetryError {
    #[error("{0}")]
    Grid(#[from] GridError),
    #[error("tau projection annihilates every radial function; refusing to return 0")]
    RadialSectorHasNoTau,
    #[error("the r1 and r2 axes must share one node vector for the tau swap")]
    AxesNotSwappable,
    #[error("∫G stayed nonpositive up to the largest admissible bump radius {max_r_bump}; the grid box is too small for this nonlinearity")]
    PositivityUnreachable { max_r_bump: f64 },
    #[error("{requested} shells requested but the box supports at most {supported}")]
    TooManyShells { requested: usize, supported: usize },
}

/// Orthogonal projection onto X_τ within the sector:
/// u ↦ (u(r₁,r₂,·) − u(r₂,r₁,·))/2. Idempotent and H¹-contractive.
pub fn project_tau(u: &Field) -> Result<Field, SymmetryError> {
    let grid = u.grid();
    if matches!(grid.sector.kind, SectorKind::Radial) {
        return Err(SymmetryError::RadialSectorHasNoTau);
    }
    let shape = grid.shape();
    if shape[0] != shape[1] || grid.axes[0].kind != grid.axes[1].kind {
        return Err(SymmetryError::AxesNotSwappable);
    }
    let strides = grid.strides();
    let vals = u.values();
    let mut out = vec![0.0; vals.len()];
    for i0 in 0..shape[0] {
        for i1 in 0..shape[1] {
            for i2 in 0..shape[2] {
                let p = i0 * strides[0] + i1 * strides[1] + i2;
                let q = i1 * strides[0] + i0 * strides[1] + i2;
                out[p] = 0.5 * (vals[p] - vals[q]);
            }
        }
    }
    Ok(Field::from_values(u.grid_arc().clone(), out))
}

/// Smooth odd cutoff: −1 for t ≤ −1, +1 for t ≥ 1, quintic odd polynomial in
/// between with vanishing first and second derivatives at ±1.
pub fn odd_cutoff(t: f64) -> f64 {
    if t >= 1.0 {
        1.0
    } else if t <= -1.0 {
        -1.0
    } else {
        // t(15 − 10t² + 3t⁴)/8: odd, φ(±1) = ±1, φ'(±1) = φ''(±1) = 0.
        t * (15.0 - 10.0 * t * t + 3.0 * t * t * t * t) / 8.0
    }
}

/// Radial plateau at level `amp` on B(0, r_bump) with a unit-width linear
/// ramp down to zero.
pub fn plateau(r: f64, r_bump: f64, amp: f64) -> f64 {
    if r <= r_bump {
        amp
    } else if r < r_bump + 1.0 {
        amp * (r_bump + 1.0 - r)
    } else {
        0.0
    }
}

/// Plain radial plateau bump sampled on the grid (seed for radial solves).
pub fn radial_bump(grid: &Arc<ReducedGrid>, spec: &NonlinearitySpec, r_bump: f64) -> Field {
    let amp = spec.xi0();
    Field::from_fn(grid, |c| {
        let r = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        plateau(r, r_bump, amp)
    })
}

/// Builds ũ(x) = u_rad(|x|)·φ(r₁ − r₂) with u_rad a plateau at level ξ₀ on
/// B(0, R_bump). Retries with doubled R_bump (up to R_box/2) until ∫G > 0.
pub fn initializer(
    grid: &Arc<ReducedGrid>,
    spec: &NonlinearitySpec,
    r_bump: f64,
) -> Result<Field, SymmetryError> {
    if !grid.sector.tau_antisym || !grid.sector.has_swap_axes() {
        return Err(SymmetryError::RadialSectorHasNoTau);
    }
    let max_r_bump = grid.box_radius / 2.0;
    let mut r_cur = r_bump.min(max_r_bump);
    loop {
        let amp = spec.xi0();
        let u = Field::from_fn(grid, |c| {
            let r = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
            plateau(r, r_cur, amp) * odd_cutoff(c[0] - c[1])
        });
        let int_g = grid.integrate_map(&u, |s| spec.primitive(s));
        if int_g > 0.0 {
            return Ok(u);
        }
        if r_cur >= max_r_bump {
            return Err(SymmetryError::PositivityUnreachable { max_r_bump });
        }
        r_cur = (2.0 * r_cur).min(max_r_bump);
    }
}

/// One sampled member of the odd sphere family.
pub struct SphereSample {
    pub sigma: Vec<f64>,
    pub field: Field,
    /// Whether ∫G(τ̃(σ)) > 0, i.e. the sample lies in P.
    pub in_p: bool,
}

/// Samples an odd continuous map S^{k−1} → X_τ built from k radially disjoint
/// plateau shells: τ̃(σ) = Σᵢ σᵢ·bᵢ(|x|)·φ(r₁−r₂). Oddness τ̃(−σ) = −τ̃(σ)
/// holds by construction; samples with ∫G > 0 are flagged.
pub fn sphere_family(
    k: usize,
    grid: &Arc<ReducedGrid>,
    spec: &NonlinearitySpec,
) -> Result<Vec<SphereSample>, SymmetryError> {
    if !grid.sector.tau_antisym || !grid.sector.has_swap_axes() {
        return Err(SymmetryError::RadialSectorHasNoTau);
    }
    // Shell layout: plateau width >= 2 plus the unit ramp and a unit gap.
    let shell_step = 4.0;
    let supported = ((grid.box_radius / 2.0) / shell_step).floor() as usize;
    if k == 0 || k > supported.max(0) {
        return Err(SymmetryError::TooManyShells { requested: k, supported });
    }
    let shells: Vec<(f64, f64)> = (0..k)
        .map(|i| {
            let lo = i as f64 * shell_step;
            (lo, lo + shell_step - 2.0)
        })
        .collect();
    let shell_profile = move |i: usize, r: f64| -> f64 {
        let (lo, hi) = shells[i];
        if i == 0 {
            plateau(r, hi, 1.0)
        } else if r <= lo || r >= hi + 1.0 {
            0.0
        } else if r < lo + 1.0 {
            r - lo
        } else if r <= hi {
            1.0
        } else {
            hi + 1.0 - r
        }
    };
    let sigmas = sphere_mesh(k);
    let amp = spec.xi0();
    let mut out = Vec::new();
    for sigma in sigmas {
        let field = Field::from_fn(grid, |c| {
            let r = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
            let mut v = 0.0;
            for (i, s) in sigma.iter().enumerate() {
                v += s * amp * shell_profile(i, r);
            }
            v * odd_cutoff(c[0] - c[1])
        });
        let in_p = grid.integrate_map(&field, |s| spec.primitive(s)) > 0.0;
        out.push(SphereSample { sigma, field, in_p });
    }
    Ok(out)
}

/// Coarse antipodally-symmetric mesh on S^{k−1}: the ±eᵢ vertices plus the
/// normalized all-ones diagonals.
fn sphere_mesh(k: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..k {
        for sign in [1.0, -1.0] {
            let mut v = vec![0.0; k];
            v[i] = sign;
            out.push(v);
        }
    }
    if k >= 2 {
        let norm = (k as f64).sqrt();
        for sign in [1.0, -1.0] {
            out.push(vec![sign / norm; k]);
        }
        // Alternating diagonal.
        let mut alt: Vec<f64> = (0..k).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        alt.iter_mut().for_each(|v| *v /= norm);
        let neg: Vec<f64> = alt.iter().map(|v| -v).collect();
        out.push(alt);
        out.push(neg);
    }
    out
}
