//! Independent ground-truth generator: shooting for the radial reduction
//! u'' + (N−1)/r u' + g(u) = 0, u'(0) = 0, with bisection on u(0).
//!
//! The shooting dichotomy: a start level that is too low runs out of energy
//! and turns around at a positive height, while a level that is too high
//! crosses zero. The ground state sits on the boundary. Action, Dirichlet
//! energy and the Pohozaev/θ integrals are integrated alongside the ODE, so
//! the profile comes with its own high-accuracy diagnostics.

use crate::field::Field;
use crate::grid::{sphere_surface, ReducedGrid};
use crate::interp1d::MonotoneCubic;
use crate::nonlinearity::NonlinearitySpec;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("invalid shooting bracket: u(0) = {lo} classifies as {lo_class:?} and u(0) = {hi} as {hi_class:?}; need (turns, crosses)")]
    BracketInvalid { lo: f64, hi: f64, lo_class: Classification, hi_class: Classification },
    #[error("automatic bracket search failed starting from xi0 = {0}")]
    BracketSearchFailed(f64),
    #[error("integrator step size underflow at r = {0} (stiff)")]
    Stiff(f64),
    #[error("shooting requires the truncated nonlinearity")]
    NotTruncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// u' became positive while u was still positive: start level too low.
    Turns,
    /// u crossed zero: start level too high.
    Crosses,
    /// Reached r_max (or the decay floor) while positive and decreasing.
    Decays,
}

/// Ground-state radial profile with integral diagnostics.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    pub dim_n: u32,
    /// Shooting level u(0).
    pub u0: f64,
    /// Uniform radial output grid.
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    /// J = ψ/2 − ∫G.
    pub action_j: f64,
    pub psi: f64,
    pub int_g: f64,
    pub int_gu: f64,
}

impl RadialProfile {
    pub fn theta(&self) -> f64 {
        self.int_gu / self.psi
    }

    /// |ψ − 2*∫G| / ψ.
    pub fn pohozaev_residual(&self) -> f64 {
        let n = self.dim_n as f64;
        let two_star = 2.0 * n / (n - 2.0);
        (self.psi - two_star * self.int_g).abs() / self.psi
    }

    /// Interpolates the profile onto a grid as a radial field.
    pub fn sample_on(&self, grid: &Arc<ReducedGrid>) -> Field {
        let spline = MonotoneCubic::new(self.r.clone(), self.u.clone());
        let r_max = *self.r.last().unwrap();
        Field::from_fn(grid, |c| {
            let rr = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
            if rr >= r_max {
                0.0
            } else {
                spline.eval(rr)
            }
        })
    }
}

// State: [u, u', I_psi, I_G, I_gu].
const DIM: usize = 5;
type State = [f64; DIM];

struct Rhs<'a> {
    spec: &'a NonlinearitySpec,
    n: f64,
    omega: f64,
}

impl Rhs<'_> {
    fn eval(&self, r: f64, y: &State) -> State {
        let (u, v) = (y[0], y[1]);
        let g = self.spec.g(u);
        let jac = self.omega * r.powf(self.n - 1.0);
        [
            v,
            -(self.n - 1.0) / r * v - g,
            jac * v * v,
            jac * self.spec.primitive(u),
            jac * g * u,
        ]
    }
}

struct Integration {
    class: Classification,
    /// Accepted-step samples (r, u, u') up to the stop event.
    trace: Vec<(f64, f64, f64)>,
    /// Integral state [ψ, ∫G, ∫gu·u] at the stop point.
    integrals: [f64; 3],
    r_stop: f64,
    u_stop: f64,
}

/// Dormand–Prince 4(5). Stops on classification events or when u decays
/// below `decay_floor` while still decreasing.
fn integrate(
    spec: &NonlinearitySpec,
    n_dim: u32,
    a: f64,
    r_max: f64,
    decay_floor: f64,
    keep_trace: bool,
) -> Result<Integration, OracleError> {
    let n = n_dim as f64;
    let rhs = Rhs { spec, n, omega: sphere_surface(n_dim) };
    let cap = match spec.xi1() {
        Some(x1) => 2.0 * x1.max(a),
        None => 10.0 * a,
    };
    // Series start: u = a − g(a) r²/(2N) + O(r⁴).
    let r0 = 1e-6;
    let ga = spec.g(a);
    let mut r = r0;
    let mut y: State = [a - ga * r0 * r0 / (2.0 * n), -ga * r0 / n, 0.0, 0.0, 0.0];
    let mut dt = 1e-4;
    let (rtol, atol) = (1e-11, 1e-13);
    let mut trace: Vec<(f64, f64, f64)> = Vec::new();
    if keep_trace {
        trace.push((r, y[0], y[1]));
    }

    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const B5: [f64; 7] =
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];

    let mut k: [State; 7] = [[0.0; DIM]; 7];
    k[0] = rhs.eval(r, &y);
    while r < r_max {
        if dt < 1e-14 * r_max {
            return Err(OracleError::Stiff(r));
        }
        let dt_eff = dt.min(r_max - r);
        for s in 0..6 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s + 1) {
                let aij = A[s][j];
                if aij != 0.0 {
                    for d in 0..DIM {
                        ys[d] += dt_eff * aij * kj[d];
                    }
                }
            }
            k[s + 1] = rhs.eval(r + C[s] * dt_eff, &ys);
        }
        let mut y5 = y;
        let mut err2 = 0.0;
        for d in 0..DIM {
            let mut dy5 = 0.0;
            let mut dy4 = 0.0;
            for s in 0..7 {
                dy5 += B5[s] * k[s][d];
                dy4 += B4[s] * k[s][d];
            }
            y5[d] += dt_eff * dy5;
            let sc = atol + rtol * y[d].abs().max(y5[d].abs());
            let e = dt_eff * (dy5 - dy4) / sc;
            err2 += e * e;
        }
        let err = (err2 / DIM as f64).sqrt();
        if err <= 1.0 {
            r += dt_eff;
            y = y5;
            k[0] = k[6]; // FSAL
            if keep_trace {
                trace.push((r, y[0], y[1]));
            }
            if y[0] <= 0.0 {
                return Ok(Integration {
                    class: Classification::Crosses,
                    trace,
                    integrals: [y[2], y[3], y[4]],
                    r_stop: r,
                    u_stop: y[0],
                });
            }
            if y[0] > cap {
                return Ok(Integration {
                    class: Classification::Turns,
                    trace,
                    integrals: [y[2], y[3], y[4]],
                    r_stop: r,
                    u_stop: y[0],
                });
            }
            if y[1] >= 0.0 && r > 1e-3 && y[0] > decay_floor {
                return Ok(Integration {
                    class: Classification::Turns,
                    trace,
                    integrals: [y[2], y[3], y[4]],
                    r_stop: r,
                    u_stop: y[0],
                });
            }
            if y[0] < decay_floor && y[1] < 0.0 {
                return Ok(Integration {
                    class: Classification::Decays,
                    trace,
                    integrals: [y[2], y[3], y[4]],
                    r_stop: r,
                    u_stop: y[0],
                });
            }
        }
        let factor = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
        dt *= factor.clamp(0.2, 5.0);
        if !err.is_finite() {
            return Err(OracleError::Stiff(r));
        }
    }
    Ok(Integration {
        class: Classification::Decays,
        trace,
        integrals: [y[2], y[3], y[4]],
        r_stop: r,
        u_stop: y[0],
    })
}

fn classify(
    spec: &NonlinearitySpec,
    n_dim: u32,
    a: f64,
    r_max: f64,
) -> Result<Classification, OracleError> {
    let out = integrate(spec, n_dim, a, r_max, 1e-12, false)?;
    Ok(out.class)
}

/// Bisection shooting for the ground state. `u0_bracket` must classify as
/// (turns, crosses); when absent, a bracket is searched geometrically from
/// ξ₀. Returns the profile resampled on `n_out` uniform radial nodes with an
/// exponential tail spliced below the decay floor.
pub fn shoot(
    spec: &NonlinearitySpec,
    n_dim: u32,
    u0_bracket: Option<(f64, f64)>,
    r_max: f64,
    n_out: usize,
) -> Result<RadialProfile, OracleError> {
    if !spec.is_truncated() {
        return Err(OracleError::NotTruncated);
    }
    let (mut lo, mut hi) = match u0_bracket {
        Some((a, b)) => {
            let ca = classify(spec, n_dim, a, r_max)?;
            let cb = classify(spec, n_dim, b, r_max)?;
            if ca != Classification::Turns || cb != Classification::Crosses {
                return Err(OracleError::BracketInvalid {
                    lo: a,
                    hi: b,
                    lo_class: ca,
                    hi_class: cb,
                });
            }
            (a, b)
        }
        None => {
            let mut lo = spec.xi0();
            let mut lo_ok = classify(spec, n_dim, lo, r_max)? == Classification::Turns;
            let mut tries = 0;
            while !lo_ok && tries < 60 {
                lo *= 0.8;
                lo_ok = classify(spec, n_dim, lo, r_max)? == Classification::Turns;
                tries += 1;
            }
            if !lo_ok {
                return Err(OracleError::BracketSearchFailed(spec.xi0()));
            }
            let mut hi = lo * 2.0;
            let mut hi_ok = classify(spec, n_dim, hi, r_max)? == Classification::Crosses;
            tries = 0;
            while !hi_ok && tries < 60 {
                hi *= 2.0;
                if let Some(x1) = spec.xi1() {
                    // Beyond the truncation level g vanishes and the start
                    // cannot move; stay strictly below it.
                    if hi > x1 {
                        hi = x1 * (1.0 - 1e-9);
                        hi_ok = classify(spec, n_dim, hi, r_max)? == Classification::Crosses;
                        break;
                    }
                }
                hi_ok = classify(spec, n_dim, hi, r_max)? == Classification::Crosses;
                tries += 1;
            }
            if !hi_ok {
                return Err(OracleError::BracketSearchFailed(spec.xi0()));
            }
            (lo, hi)
        }
    };

    for _ in 0..200 {
        if (hi - lo) <= 1e-13 * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        match classify(spec, n_dim, mid, r_max)? {
            Classification::Turns => lo = mid,
            Classification::Crosses => hi = mid,
            Classification::Decays => {
                lo = mid;
                hi = mid;
            }
        }
    }
    let a_star = 0.5 * (lo + hi);

    let floor = 1e-5 * a_star;
    let fin = integrate(spec, n_dim, a_star, r_max, floor, true)?;
    let n = n_dim as f64;

    // Splice the linearized far-field tail u ~ C r^{-(N-1)/2} e^{-√m r} from
    // the stop point; its contribution to the integrals is below 1e-9 of the
    // totals and is ignored.
    let kappa = spec.mass().sqrt();
    let (r_stop, u_stop) = (fin.r_stop, fin.u_stop.max(0.0));
    let tail = |r: f64| -> f64 {
        if r <= r_stop {
            0.0
        } else {
            u_stop * (r_stop / r).powf((n - 1.0) / 2.0) * (-kappa * (r - r_stop)).exp()
        }
    };

    let h_out = r_max / (n_out - 1) as f64;
    let mut r_grid = Vec::with_capacity(n_out);
    let mut u_grid = Vec::with_capacity(n_out);
    let mut ti = 0usize;
    for i in 0..n_out {
        let r = i as f64 * h_out;
        r_grid.push(r);
        if r >= r_stop {
            u_grid.push(tail(r));
            continue;
        }
        if r <= fin.trace[0].0 {
            u_grid.push(a_star);
            continue;
        }
        while ti + 1 < fin.trace.len() && fin.trace[ti + 1].0 < r {
            ti += 1;
        }
        let (r0, u0, v0) = fin.trace[ti];
        let (r1, u1, v1) = fin.trace[ti + 1];
        let hh = r1 - r0;
        let t = (r - r0) / hh;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        u_grid.push(h00 * u0 + h10 * hh * v0 + h01 * u1 + h11 * hh * v1);
    }

    let [psi, int_g, int_gu] = fin.integrals;
    Ok(RadialProfile {
        dim_n: n_dim,
        u0: a_star,
        r: r_grid,
        u: u_grid,
        action_j: 0.5 * psi - int_g,
        psi,
        int_g,
        int_gu,
    })
}
