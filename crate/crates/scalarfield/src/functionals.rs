//! Variational quantities for the scalar field equation: the action J, the
//! Pohozaev functional M = ψ − 2*∫G, the retraction m_P(u) = u(r(u)·) onto
//! the Pohozaev manifold with r(u) = (2*∫G/ψ)^{1/2}, its inverse
//! u ↦ u(ψ(u)^{1/(N−2)}·), the H¹-Riesz gradient of J∘m_P on the unit
//! Dirichlet sphere, and the θ-diagnostic ψ⁻¹∫g(u)u (θ = 1 exactly at
//! solutions of −Δu = g(u)).

use crate::field::{rescale, Field};
use crate::grid::ReducedGrid;
use crate::nonlinearity::NonlinearitySpec;
use crate::symmetry::project_tau;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FunctionalError {
    #[error("field is not in P: ∫G(u) = {0} <= 0")]
    NotInP(f64),
    #[error("field is not in U: {0}")]
    NotInU(String),
    #[error("zero field")]
    ZeroField,
    #[error("nonlinearity dimension N = {spec} does not match grid dimension N = {grid}")]
    DimensionMismatch { spec: u32, grid: u32 },
    #[error("conjugate gradient failed to converge (relative residual {0:.3e})")]
    RieszSolveFailed(f64),
}

fn check_dims(u: &Field, spec: &NonlinearitySpec) -> Result<(), FunctionalError> {
    let grid_n = u.grid().sector.dim_n;
    if grid_n != spec.dim_n() {
        return Err(FunctionalError::DimensionMismatch { spec: spec.dim_n(), grid: grid_n });
    }
    Ok(())
}

/// Scalars of one variational evaluation. M = ψ − 2*·∫G definitionally;
/// `r_of_u` is present exactly when ∫G > 0.
#[derive(Debug, Clone, serde::Serialize)]
pub struct VariationalState {
    pub j: f64,
    pub m: f64,
    pub psi: f64,
    pub int_g: f64,
    pub int_g1: f64,
    pub int_g2: f64,
    pub r_of_u: Option<f64>,
}

pub fn evaluate(u: &Field, spec: &NonlinearitySpec) -> Result<VariationalState, FunctionalError> {
    check_dims(u, spec)?;
    let grid = u.grid();
    let psi = grid.psi(u);
    let int_g = grid.integrate_map(u, |s| spec.primitive(s));
    let int_g1 = grid.integrate_map(u, |s| spec.primitive1(s));
    let int_g2 = grid.integrate_map(u, |s| spec.primitive2(s));
    let two_star = spec.two_star();
    let j = 0.5 * psi - int_g;
    let m = psi - two_star * int_g;
    let r_of_u = if int_g > 0.0 && psi > 0.0 {
        Some((two_star * int_g / psi).sqrt())
    } else {
        None
    };
    Ok(VariationalState { j, m, psi, int_g, int_g1, int_g2, r_of_u })
}

/// J(m_P(u)) through the scaling identities, with no interpolation:
/// (1/2 − 1/2*)·ψ^{N/2}·(2*∫G)^{(2−N)/2}. Defined on P = {∫G > 0}.
pub fn action_on_constraint(u: &Field, spec: &NonlinearitySpec) -> Result<f64, FunctionalError> {
    check_dims(u, spec)?;
    let grid = u.grid();
    let int_g = grid.integrate_map(u, |s| spec.primitive(s));
    if int_g <= 0.0 {
        return Err(FunctionalError::NotInP(int_g));
    }
    let psi = grid.psi(u);
    if psi <= 0.0 {
        return Err(FunctionalError::ZeroField);
    }
    let n = spec.dim_n() as f64;
    let two_star = spec.two_star();
    Ok((0.5 - 1.0 / two_star) * psi.powf(n / 2.0) * (two_star * int_g).powf((2.0 - n) / 2.0))
}

/// θ of m_P(u) through the scaling identities: ∫g(u)u / (2*∫G(u)).
pub fn theta_on_constraint(u: &Field, spec: &NonlinearitySpec) -> Result<f64, FunctionalError> {
    check_dims(u, spec)?;
    let grid = u.grid();
    let int_g = grid.integrate_map(u, |s| spec.primitive(s));
    if int_g <= 0.0 {
        return Err(FunctionalError::NotInP(int_g));
    }
    let num = grid.integrate_map(u, |s| spec.g(s) * s);
    Ok(num / (spec.two_star() * int_g))
}

/// Pohozaev retraction m_P(u) = u(r(u)·) on the same grid. The ratio starts
/// at r(u) = (2*∫G/ψ)^{1/2} and is polished by a short secant iteration so
/// the interpolated field lands on M well inside the 1e−4·ψ contract.
pub fn retract(u: &Field, spec: &NonlinearitySpec) -> Result<Field, FunctionalError> {
    check_dims(u, spec)?;
    let state = evaluate(u, spec)?;
    let r = state.r_of_u.ok_or(FunctionalError::NotInP(state.int_g))?;
    if (r - 1.0).abs() < 1e-12 {
        return Ok(u.clone());
    }
    let eval_at = |rho: f64| -> Result<(Field, f64, f64), FunctionalError> {
        let w = rescale(u, rho);
        let s = evaluate(&w, spec)?;
        Ok((w, s.m, s.psi))
    };
    let (w, m, psi) = eval_at(r)?;
    if psi <= 0.0 {
        return Err(FunctionalError::ZeroField);
    }
    if m.abs() <= 1e-10 * psi {
        return Ok(w);
    }
    // The residual is interpolation error; a secant on rho ↦ M(u(rho·))
    // removes it in a couple of steps.
    let (mut rho0, mut m0) = (r, m);
    let mut rho1 = r * 1.001;
    let (mut best, mut m1, mut psi1) = eval_at(rho1)?;
    for _ in 0..6 {
        if m1.abs() <= 1e-10 * psi1.max(1e-300) || (m1 - m0).abs() == 0.0 {
            break;
        }
        let rho2 = (rho1 - m1 * (rho1 - rho0) / (m1 - m0)).clamp(0.5 * r, 2.0 * r);
        let (w2, m2, psi2) = eval_at(rho2)?;
        rho0 = rho1;
        m0 = m1;
        rho1 = rho2;
        m1 = m2;
        psi1 = psi2;
        best = w2;
    }
    Ok(best)
}

/// Exact retraction by grid relabeling: the result lives on a grid whose
/// coordinates are divided by r(u), so M vanishes to round-off. Used for
/// solver reports, where the Pohozaev residual should reflect the minimizer
/// rather than interpolation error.
pub fn retract_relabel(u: &Field, spec: &NonlinearitySpec) -> Result<Field, FunctionalError> {
    check_dims(u, spec)?;
    let state = evaluate(u, spec)?;
    let r = state.r_of_u.ok_or(FunctionalError::NotInP(state.int_g))?;
    Ok(u.relabeled(r))
}

/// Inverse of the constrained retraction: u(ψ(u)^{1/(N−2)}·), landing on the
/// unit Dirichlet sphere up to interpolation error.
pub fn invert_m(u: &Field) -> Result<Field, FunctionalError> {
    let grid = u.grid();
    let psi = grid.psi(u);
    if psi <= 0.0 {
        return Err(FunctionalError::ZeroField);
    }
    let n = grid.sector.dim_n as f64;
    let lambda = psi.powf(1.0 / (n - 2.0));
    if (lambda - 1.0).abs() < 1e-12 {
        return Ok(u.clone());
    }
    Ok(rescale(u, lambda))
}

/// θ(u) = ψ(u)⁻¹ ∫ g(u) u dx.
pub fn theta(u: &Field, spec: &NonlinearitySpec) -> Result<f64, FunctionalError> {
    check_dims(u, spec)?;
    let grid = u.grid();
    let psi = grid.psi(u);
    if psi <= 0.0 {
        return Err(FunctionalError::ZeroField);
    }
    Ok(grid.integrate_map(u, |s| spec.g(s) * s) / psi)
}

/// H¹ inner product ∫⟨∇a,∇b⟩ + ∫ab.
pub fn h1_inner(grid: &ReducedGrid, a: &Field, b: &Field) -> f64 {
    let mut tmp = vec![0.0; grid.len()];
    grid.stiffness_apply(a.values(), &mut tmp);
    let mut acc = 0.0;
    for (p, t) in tmp.iter().enumerate() {
        acc += t * b.values()[p] + grid.node_weight()[p] * a.values()[p] * b.values()[p];
    }
    acc
}

pub fn h1_norm(grid: &ReducedGrid, a: &Field) -> f64 {
    h1_inner(grid, a, a).max(0.0).sqrt()
}

/// Jacobi-preconditioned conjugate gradient for the H¹ Gram solves
/// (D + W) x = b on interior nodes, with warm-start slots.
pub struct RieszSolver {
    diag: Vec<f64>,
    pub rel_tol: f64,
    warm: std::collections::HashMap<&'static str, Vec<f64>>,
}

impl RieszSolver {
    pub fn new(grid: &ReducedGrid) -> Self {
        let n = grid.len();
        let mut diag = vec![0.0; n];
        for p in 0..n {
            diag[p] = grid.stiff_diag()[p] + grid.node_weight()[p];
            if !(diag[p] > 0.0) {
                diag[p] = 1.0;
            }
        }
        Self { diag, rel_tol: 1e-12, warm: std::collections::HashMap::new() }
    }

    fn apply_h1(grid: &ReducedGrid, x: &[f64], out: &mut [f64]) {
        grid.stiffness_apply(x, out);
        let w = grid.node_weight();
        for (p, o) in out.iter_mut().enumerate() {
            *o += w[p] * x[p];
            if grid.is_boundary(p) {
                *o = 0.0;
            }
        }
    }

    /// Solves (D + W) x = b restricted to interior nodes. `slot` names a
    /// warm-start cache shared across calls with the same right-hand-side
    /// family.
    pub fn solve(
        &mut self,
        grid: &ReducedGrid,
        b: &[f64],
        slot: &'static str,
    ) -> Result<Vec<f64>, FunctionalError> {
        let n = grid.len();
        let mut x = self
            .warm
            .get(slot)
            .filter(|v| v.len() == n)
            .cloned()
            .unwrap_or_else(|| vec![0.0; n]);
        for (p, v) in x.iter_mut().enumerate() {
            if grid.is_boundary(p) {
                *v = 0.0;
            }
        }
        let mut r = vec![0.0; n];
        let mut z = vec![0.0; n];
        let mut dir = vec![0.0; n];
        let mut ad = vec![0.0; n];

        Self::apply_h1(grid, &x, &mut ad);
        let mut b_norm2 = 0.0;
        for i in 0..n {
            let bi = if grid.is_boundary(i) { 0.0 } else { b[i] };
            r[i] = bi - ad[i];
            b_norm2 += bi * bi;
        }
        let b_norm = b_norm2.sqrt();
        if b_norm == 0.0 {
            return Ok(vec![0.0; n]);
        }
        let mut rz = 0.0;
        for i in 0..n {
            z[i] = r[i] / self.diag[i];
            rz += r[i] * z[i];
            dir[i] = z[i];
        }
        let max_iters = 60 * (n as f64).sqrt() as usize + 800;
        let mut res = f64::INFINITY;
        for _ in 0..max_iters {
            res = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if res <= self.rel_tol * b_norm {
                break;
            }
            Self::apply_h1(grid, &dir, &mut ad);
            let dad: f64 = dir.iter().zip(&ad).map(|(a, b)| a * b).sum();
            if dad <= 0.0 {
                break;
            }
            let alpha = rz / dad;
            for i in 0..n {
                x[i] += alpha * dir[i];
                r[i] -= alpha * ad[i];
            }
            let mut rz_new = 0.0;
            for i in 0..n {
                z[i] = r[i] / self.diag[i];
                rz_new += r[i] * z[i];
            }
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                dir[i] = z[i] + beta * dir[i];
            }
        }
        if res > self.rel_tol * b_norm * 100.0 {
            return Err(FunctionalError::RieszSolveFailed(res / b_norm));
        }
        self.warm.insert(slot, x.clone());
        Ok(x)
    }
}

/// Gradient of Φ = J∘m_P at u ∈ U = {ψ = 1, ∫G > 0}: the H¹-Riesz
/// representative of v ↦ r^{2−N}⟨∇u,∇v⟩ − r^{−N}∫g(u)v, projected onto the
/// tangent space T_uS = {v : ⟨∇u,∇v⟩ = 0}. The projection is H¹-orthogonal
/// against the Riesz image of the constraint differential, so the returned
/// field is tangent, pairs as ⟨grad, v⟩_{H¹} = dΦ(u)[v] for tangent v, and
/// vanishes at discrete constrained critical points.
pub fn gradient_jm(u: &Field, spec: &NonlinearitySpec) -> Result<(Field, f64), FunctionalError> {
    let mut solver = RieszSolver::new(u.grid());
    solver.rel_tol = 1e-13;
    gradient_jm_with(u, spec, &mut solver)
}

pub fn gradient_jm_with(
    u: &Field,
    spec: &NonlinearitySpec,
    solver: &mut RieszSolver,
) -> Result<(Field, f64), FunctionalError> {
    check_dims(u, spec)?;
    let grid = u.grid();
    let psi = grid.psi(u);
    if (psi - 1.0).abs() > 1e-6 {
        return Err(FunctionalError::NotInU(format!("psi(u) = {psi} is not 1")));
    }
    let int_g = grid.integrate_map(u, |s| spec.primitive(s));
    if int_g <= 0.0 {
        return Err(FunctionalError::NotInU(format!("∫G(u) = {int_g} <= 0")));
    }
    let n_dim = spec.dim_n() as f64;
    let two_star = spec.two_star();
    let r = (two_star * int_g / psi).sqrt();

    let n = grid.len();
    let mut du = vec![0.0; n];
    grid.stiffness_apply(u.values(), &mut du);
    let c1 = r.powf(2.0 - n_dim);
    let c2 = r.powf(-n_dim);
    let w = grid.node_weight();
    let mut ell = vec![0.0; n];
    for p in 0..n {
        if !grid.is_boundary(p) {
            ell[p] = c1 * du[p] - c2 * w[p] * spec.g(u.values()[p]);
        }
    }
    let grad_full = solver.solve(grid, &ell, "grad")?;
    let n_riesz = solver.solve(grid, &du, "normal")?;

    let num: f64 = grad_full.iter().zip(&du).map(|(a, b)| a * b).sum();
    let den: f64 = n_riesz.iter().zip(&du).map(|(a, b)| a * b).sum();
    let beta = if den > 0.0 { num / den } else { 0.0 };
    let mut gt = vec![0.0; n];
    for p in 0..n {
        gt[p] = grad_full[p] - beta * n_riesz[p];
    }
    let mut g_field = Field::from_values(u.grid_arc().clone(), gt);
    // The forms are equivariant, so the gradient inherits the sector
    // symmetry; re-project to clean round-off in the τ-sector.
    if grid.sector.tau_antisym {
        g_field = project_tau(&g_field).map_err(|e| FunctionalError::NotInU(e.to_string()))?;
    }
    let norm = h1_norm(grid, &g_field);
    Ok((g_field, norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{SectorKind, SymmetrySector};
    use rand::Rng;
    use rand::SeedableRng;
    use std::sync::Arc;

    fn cubic_spec() -> NonlinearitySpec {
        NonlinearitySpec::power(1.0, 4.0, Some(2.0), 3)
            .unwrap()
            .truncated()
            .unwrap()
    }

    fn radial_grid(nodes: usize) -> Arc<ReducedGrid> {
        let sector = SymmetrySector::new(SectorKind::Radial, 3, 0, false).unwrap();
        ReducedGrid::build(sector, 12.0, nodes).unwrap()
    }

    fn gaussian_bump(grid: &Arc<ReducedGrid>, amp: f64) -> Field {
        Field::from_fn(grid, |c| amp * (-(c[0] * c[0]) / 2.0).exp())
    }

    /// Dilation-normalize onto the unit sphere by exact relabeling plus one
    /// amplitude snap.
    fn normalized(u: &Field) -> Field {
        let psi = u.grid().psi(u);
        let n = u.grid().sector.dim_n as f64;
        let lambda = psi.powf(1.0 / (n - 2.0));
        let mut v = u.relabeled(lambda);
        let p = v.grid().psi(&v);
        v.scale(1.0 / p.sqrt());
        v
    }

    #[test]
    fn evaluate_zero_field() {
        let grid = radial_grid(64);
        let spec = cubic_spec();
        let u = Field::zeros(&grid);
        let s = evaluate(&u, &spec).unwrap();
        assert_eq!(s.j, 0.0);
        assert_eq!(s.m, 0.0);
        assert_eq!(s.psi, 0.0);
        assert!(s.r_of_u.is_none());
    }

    #[test]
    fn evaluate_definitional_ledger() {
        let grid = radial_grid(256);
        let spec = cubic_spec();
        let u = gaussian_bump(&grid, 3.0);
        let s = evaluate(&u, &spec).unwrap();
        assert!((s.m - (s.psi - spec.two_star() * s.int_g)).abs() <= 1e-12 * s.psi.max(1.0));
        assert!((s.int_g - (s.int_g1 - s.int_g2)).abs() <= 1e-10 * s.int_g.abs().max(1.0));
        // |J − (1/2 − 1/2*)ψ| = |M|/2* ≤ 2*·|M|/2, testable unconditionally.
        let lhs = (s.j - (0.5 - 1.0 / spec.two_star()) * s.psi).abs();
        assert!(lhs <= spec.two_star() * s.m.abs() / 2.0 + 1e-14);
    }

    #[test]
    fn r_formula_plugs_in() {
        // psi(u) = 1 and ∫G = 1/2* force r(u) = 1; check on synthetic scalars.
        let grid = radial_grid(128);
        let spec = cubic_spec();
        let u = gaussian_bump(&grid, 3.0);
        let s = evaluate(&u, &spec).unwrap();
        let r = s.r_of_u.unwrap();
        assert!((r * r * s.psi - spec.two_star() * s.int_g).abs() <= 1e-12 * s.psi);
    }

    #[test]
    fn retract_meets_pohozaev_contract() {
        let grid = radial_grid(512);
        let spec = cubic_spec();
        let u = gaussian_bump(&grid, 3.0);
        let w = retract(&u, &spec).unwrap();
        let s = evaluate(&w, &spec).unwrap();
        assert!(
            s.m.abs() <= 1e-4 * s.psi,
            "post-interpolation residual: M = {}, psi = {}",
            s.m,
            s.psi
        );
    }

    #[test]
    fn retract_fixes_constraint_points() {
        let grid = radial_grid(512);
        let spec = cubic_spec();
        let u = gaussian_bump(&grid, 3.0);
        let w = retract(&u, &spec).unwrap();
        // r(w) is now 1 within interpolation error, so retraction is a
        // near-identity: idempotence within 2x interpolation tolerance.
        let w2 = retract(&w, &spec).unwrap();
        let mut d = w.clone();
        d.axpy(-1.0, &w2);
        let rel = grid.l2(&d, &d).sqrt() / grid.l2(&w, &w).sqrt();
        assert!(rel < 2e-3, "relative drift {rel}");
    }

    #[test]
    fn retract_rejects_outside_p() {
        let grid = radial_grid(64);
        let spec = cubic_spec();
        let u = gaussian_bump(&grid, 0.3);
        assert!(matches!(retract(&u, &spec), Err(FunctionalError::NotInP(_))));
    }

    #[test]
    fn relabel_retraction_is_exact() {
        let grid = radial_grid(256);
        let spec = cubic_spec();
        let u = gaussian_bump(&grid, 3.0);
        let w = retract_relabel(&u, &spec).unwrap();
        let s = evaluate(&w, &spec).unwrap();
        assert!(s.m.abs() <= 1e-12 * s.psi, "M = {}, psi = {}", s.m, s.psi);
    }

    #[test]
    fn invert_m_lands_near_unit_sphere() {
        // Random bump fields with ψ of order one, so the dilation
        // λ = ψ^{1/(N−2)} stays resolvable on the grid.
        let grid = radial_grid(512);
        for (target, width, off) in [(0.6, 1.0, 0.0), (1.4, 2.0, 1.5), (2.2, 1.2, 2.5)] {
            let mut u = Field::from_fn(&grid, |c| {
                (-(c[0] - off) * (c[0] - off) / (2.0 * width * width)).exp()
            });
            let psi0 = grid.psi(&u);
            u.scale((target / psi0).sqrt());
            let v = invert_m(&u).unwrap();
            let psi = v.grid().psi(&v);
            assert!(
                (psi - 1.0).abs() < 5e-3,
                "target {target}, width {width}: psi = {psi}"
            );
        }
    }

    #[test]
    fn retract_inverts_invert_m_exactly_under_relabeling() {
        // The homeomorphism algebra m ∘ m⁻¹ = id holds to round-off when both
        // dilations are realized by grid relabeling.
        let grid = radial_grid(256);
        let spec = cubic_spec();
        let u = gaussian_bump(&grid, 3.0);
        let w = retract_relabel(&u, &spec).unwrap();
        // Exact inverse: relabel by psi^{1/(N-2)}.
        let psi = w.grid().psi(&w);
        let n = 3.0;
        let v = w.relabeled(psi.powf(1.0 / (n - 2.0)));
        let psi_v = v.grid().psi(&v);
        assert!((psi_v - 1.0).abs() < 1e-10, "psi after exact inverse: {psi_v}");
        let back = retract_relabel(&v, &spec).unwrap();
        let s_w = evaluate(&w, &spec).unwrap();
        let s_back = evaluate(&back, &spec).unwrap();
        assert!(((s_w.j - s_back.j) / s_w.j).abs() < 1e-12);
        assert!(((s_w.psi - s_back.psi) / s_w.psi).abs() < 1e-12);
    }

    #[test]
    fn invert_m_identity_on_unit_sphere() {
        let grid = radial_grid(256);
        let u = normalized(&gaussian_bump(&grid, 3.0));
        let v = invert_m(&u).unwrap();
        let mut d = u.clone();
        d.axpy(-1.0, &v);
        assert!(d.linf() < 1e-12);
    }

    #[test]
    fn action_on_constraint_matches_retracted_action() {
        let grid = radial_grid(512);
        let spec = cubic_spec();
        let u = gaussian_bump(&grid, 3.0);
        let phi = action_on_constraint(&u, &spec).unwrap();
        let w = retract(&u, &spec).unwrap();
        let s = evaluate(&w, &spec).unwrap();
        assert!(((phi - s.j) / phi).abs() < 1e-3, "phi = {phi}, J = {}", s.j);
        let w_exact = retract_relabel(&u, &spec).unwrap();
        let s_exact = evaluate(&w_exact, &spec).unwrap();
        assert!(
            ((phi - s_exact.j) / phi).abs() < 1e-12,
            "phi = {phi} vs exact-relabel J = {}",
            s_exact.j
        );
    }

    #[test]
    fn gradient_requires_unit_sphere() {
        let grid = radial_grid(128);
        let spec = cubic_spec();
        let u = gaussian_bump(&grid, 3.0);
        assert!(matches!(gradient_jm(&u, &spec), Err(FunctionalError::NotInU(_))));
    }

    #[test]
    fn gradient_matches_central_finite_differences() {
        let grid = radial_grid(192);
        let spec = cubic_spec();
        let u = normalized(&gaussian_bump(&grid, 3.0));
        let ugrid = u.grid_arc().clone();
        let int_g = ugrid.integrate_map(&u, |s| spec.primitive(s));
        assert!(int_g > 0.0, "normalized seed left P: ∫G = {int_g}");
        let (grad, _norm) = gradient_jm(&u, &spec).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let psi_u = ugrid.psi(&u);
        let r_max = ugrid.box_radius;
        for trial in 0..10 {
            let a: f64 = rng.gen_range(0.5..4.0);
            let b: f64 = rng.gen_range(0.05..0.5) * r_max;
            let c: f64 = rng.gen_range(-1.0..1.0);
            let mut v = Field::from_fn(&ugrid, |coords| {
                let r = coords[0] / r_max;
                c * (-(r * r) * a * 40.0).exp() + 0.5 * (-(coords[0] - b).powi(2) * (8.0 / r_max)).exp()
            });
            let vnorm = h1_norm(&ugrid, &v);
            v.scale(1.0 / vnorm.max(1e-30));
            let (_, duv) = ugrid.inner_products(&u, &v).unwrap();
            v.axpy(-duv / psi_u, &u);
            let eps = 1e-5;
            let phi_at = |field: &Field| -> f64 {
                let psi = ugrid.psi(field);
                let mut f = field.clone();
                f.scale(1.0 / psi.sqrt());
                action_on_constraint(&f, &spec).unwrap()
            };
            let mut up = u.clone();
            up.axpy(eps, &v);
            let mut um = u.clone();
            um.axpy(-eps, &v);
            let fd = (phi_at(&up) - phi_at(&um)) / (2.0 * eps);
            let pairing = h1_inner(&ugrid, &grad, &v);
            let tol = (1e-4 * fd.abs()).max(1e-6);
            assert!(
                (fd - pairing).abs() <= tol,
                "trial {trial}: fd = {fd:.6e}, pairing = {pairing:.6e}"
            );
        }
    }

    #[test]
    fn gradient_respects_tau_subspace() {
        let sector = SymmetrySector::new(SectorKind::TriradialO2, 4, 2, true).unwrap();
        let grid = ReducedGrid::build(sector, 10.0, 96).unwrap();
        let spec = NonlinearitySpec::power(1.0, 4.0, Some(2.0), 4)
            .unwrap()
            .truncated()
            .unwrap();
        let raw = crate::symmetry::initializer(&grid, &spec, 4.0).unwrap();
        let u = normalized(&raw);
        let int_g = u.grid().integrate_map(&u, |s| spec.primitive(s));
        assert!(int_g > 0.0, "seed left P: ∫G = {int_g}");
        let (grad, norm) = gradient_jm(&u, &spec).unwrap();
        assert!(norm.is_finite() && norm > 0.0);
        let g2 = project_tau(&grad).unwrap();
        let mut d = grad.clone();
        d.axpy(-1.0, &g2);
        let off = h1_norm(grad.grid(), &d);
        assert!(off <= 1e-12 * norm.max(1.0), "off-subspace component {off}");
    }

    #[test]
    fn gradient_is_tangent() {
        let grid = radial_grid(192);
        let spec = cubic_spec();
        let u = normalized(&gaussian_bump(&grid, 3.0));
        let (grad, _) = gradient_jm(&u, &spec).unwrap();
        let (_, d_u_grad) = u.grid().inner_products(&u, &grad).unwrap();
        assert!(
            d_u_grad.abs() <= 1e-9,
            "gradient not tangent: D(u, grad) = {d_u_grad}"
        );
    }
}
