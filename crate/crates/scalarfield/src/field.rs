//! Real-valued functions sampled on a `ReducedGrid`: the discrete stand-in
//! for u ∈ H¹(ℝᴺ). Values vanish on the outer Dirichlet boundary.

use crate::grid::{GridError, ReducedGrid, SectorKind, SymmetrySector};
use crate::interp1d::resample_zero_fill;
use std::io::{BufRead, Write};
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<ReducedGrid>,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: &Arc<ReducedGrid>) -> Self {
        Self { grid: grid.clone(), values: vec![0.0; grid.len()] }
    }

    /// Samples `f` at node coordinates; boundary nodes are forced to zero.
    pub fn from_fn(grid: &Arc<ReducedGrid>, f: impl Fn([f64; 3]) -> f64) -> Self {
        let mut values = vec![0.0; grid.len()];
        for (p, v) in values.iter_mut().enumerate() {
            if !grid.is_boundary(p) {
                *v = f(grid.coords(p));
            }
        }
        Self { grid: grid.clone(), values }
    }

    /// Wraps a raw value vector; boundary nodes are zeroed.
    pub fn from_values(grid: Arc<ReducedGrid>, mut values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len());
        for (p, v) in values.iter_mut().enumerate() {
            if grid.is_boundary(p) {
                *v = 0.0;
            }
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> &ReducedGrid {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<ReducedGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn enforce_dirichlet(&mut self) {
        for p in 0..self.values.len() {
            if self.grid.is_boundary(p) {
                self.values[p] = 0.0;
            }
        }
    }

    pub fn scale(&mut self, c: f64) {
        self.values.iter_mut().for_each(|v| *v *= c);
    }

    pub fn axpy(&mut self, a: f64, other: &Field) {
        debug_assert!(ReducedGrid::same_grid(&self.grid, &other.grid));
        self.values
            .iter_mut()
            .zip(&other.values)
            .for_each(|(v, o)| *v += a * o);
    }

    pub fn linf(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Moves the field onto a grid with all coordinates divided by `lambda`,
    /// realizing u ↦ u(λ·) exactly (pure relabeling, no interpolation).
    pub fn relabeled(&self, lambda: f64) -> Field {
        let grid = self.grid.relabeled(lambda);
        Field { grid, values: self.values.clone() }
    }
}

/// x ↦ u(r·x) resampled on the same grid with monotone cubic interpolation
/// per axis; points r·x outside the original support evaluate to zero.
/// Rescaling is diagonal in reduced coordinates, so sector symmetry and
/// τ-antisymmetry carry over exactly.
pub fn rescale(u: &Field, r: f64) -> Field {
    assert!(r > 0.0 && r.is_finite());
    if (r - 1.0).abs() < 1e-15 {
        return u.clone();
    }
    let grid = u.grid();
    let shape = grid.shape();
    let strides = grid.strides();
    let mut values = u.values().to_vec();
    for a in 0..grid.num_axes() {
        let nodes = &grid.axes[a].nodes;
        let queries: Vec<f64> = nodes.iter().map(|&x| r * x).collect();
        let sa = strides[a];
        let (b, c) = match a {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let mut line = vec![0.0; shape[a]];
        for ib in 0..shape[b] {
            for ic in 0..shape[c] {
                let base = ib * strides[b] + ic * strides[c];
                for i in 0..shape[a] {
                    line[i] = values[base + i * sa];
                }
                let res = resample_zero_fill(nodes, &line, &queries);
                for i in 0..shape[a] {
                    values[base + i * sa] = res[i];
                }
            }
        }
    }
    Field::from_values(u.grid_arc().clone(), values)
}

/// Shifts `u` by `dz` along the unreduced translation axis with zero fill.
/// Only representable when the sector has such an axis.
pub fn translate_z(u: &Field, dz: f64) -> Result<Field, GridError> {
    let grid = u.grid();
    let axis_idx = grid
        .axes
        .iter()
        .position(|a| !a.is_radial())
        .ok_or(GridError::TranslationNotRepresentable)?;
    if dz == 0.0 {
        return Ok(u.clone());
    }
    let shape = grid.shape();
    let strides = grid.strides();
    let nodes = &grid.axes[axis_idx].nodes;
    // out(z) = u(z - dz): support moves by +dz.
    let queries: Vec<f64> = nodes.iter().map(|&z| z - dz).collect();
    let sa = strides[axis_idx];
    let (b, c) = match axis_idx {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let mut values = u.values().to_vec();
    let mut line = vec![0.0; shape[axis_idx]];
    for ib in 0..shape[b] {
        for ic in 0..shape[c] {
            let base = ib * strides[b] + ic * strides[c];
            for i in 0..shape[axis_idx] {
                line[i] = values[base + i * sa];
            }
            let res = resample_zero_fill(nodes, &line, &queries);
            for i in 0..shape[axis_idx] {
                values[base + i * sa] = res[i];
            }
        }
    }
    Ok(Field::from_values(u.grid_arc().clone(), values))
}

/// Resamples `u` onto another grid of the same sector, evaluating
/// u(lambda·x) at the destination nodes x (zero outside the source box).
/// Separable per-axis cubic interpolation.
pub fn sample_scaled(u: &Field, dst: &Arc<ReducedGrid>, lambda: f64) -> Field {
    let src = u.grid();
    assert_eq!(src.sector, dst.sector, "sector mismatch in resampling");
    let n_axes = src.num_axes();
    // Shape morphs axis by axis from source to destination.
    let mut shape: Vec<usize> = (0..3).map(|a| src.shape()[a]).collect();
    let mut data = u.values().to_vec();
    for a in 0..n_axes {
        let src_nodes = &src.axes[a].nodes;
        let queries: Vec<f64> = dst.axes[a].nodes.iter().map(|&x| lambda * x).collect();
        let n_new = queries.len();
        let (b, c) = match a {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let old_strides = [shape[1] * shape[2], shape[2], 1];
        let mut new_shape = shape.clone();
        new_shape[a] = n_new;
        let new_strides = [new_shape[1] * new_shape[2], new_shape[2], 1];
        let mut out = vec![0.0; new_shape[0] * new_shape[1] * new_shape[2]];
        let mut line = vec![0.0; shape[a]];
        for ib in 0..shape[b] {
            for ic in 0..shape[c] {
                for i in 0..shape[a] {
                    line[i] = data[ib * old_strides[b] + ic * old_strides[c] + i * old_strides[a]];
                }
                let res = resample_zero_fill(src_nodes, &line, &queries);
                for i in 0..n_new {
                    out[ib * new_strides[b] + ic * new_strides[c] + i * new_strides[a]] = res[i];
                }
            }
        }
        data = out;
        shape = new_shape;
    }
    Field::from_values(dst.clone(), data)
}

/// Resamples `u` onto another grid of the same sector (identity coordinates).
pub fn resample_to(u: &Field, dst: &Arc<ReducedGrid>) -> Field {
    sample_scaled(u, dst, 1.0)
}

/// Writes the field as CSV: one row per node, coordinates then value, with a
/// header recording the sector and grid so the file can be reloaded.
pub fn dump_csv(u: &Field, mut out: impl Write) -> std::io::Result<()> {
    let g = u.grid();
    let s = g.sector;
    writeln!(out, "# scalarfield field v1")?;
    writeln!(
        out,
        "# sector={} dim_n={} m_split={} tau={}",
        s.kind.as_str(),
        s.dim_n,
        s.m_split,
        s.tau_antisym
    )?;
    for (i, ax) in g.axes.iter().enumerate() {
        writeln!(
            out,
            "# axis{i} kind={} nodes={} extent={:.17e}",
            if ax.is_radial() { "radial" } else { "unreduced" },
            ax.len(),
            ax.extent()
        )?;
    }
    let names = ["c0", "c1", "c2"];
    let cols: Vec<&str> = names.iter().take(g.num_axes()).copied().collect();
    writeln!(out, "{},value", cols.join(","))?;
    for p in 0..g.len() {
        let c = g.coords(p);
        let coord_str: Vec<String> = (0..g.num_axes()).map(|a| format!("{:.17e}", c[a])).collect();
        writeln!(out, "{},{:.17e}", coord_str.join(","), u.values()[p])?;
    }
    Ok(())
}

/// Reads a field written by `dump_csv`, rebuilding its grid from the header.
pub fn load_csv(reader: impl BufRead) -> Result<Field, GridError> {
    let mut kind = None;
    let mut dim_n = 0u32;
    let mut m_split = 0u32;
    let mut tau = false;
    let mut axes_meta: Vec<(String, usize, f64)> = Vec::new();
    let mut values = Vec::new();
    let bad = |m: &str| GridError::BadFieldFile(m.to_string());
    for line in reader.lines() {
        let line = line.map_err(|e| bad(&e.to_string()))?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(rest) = t.strip_prefix('#') {
            let rest = rest.trim();
            if rest.starts_with("sector=") {
                for part in rest.split_whitespace() {
                    let (k, v) = part.split_once('=').ok_or_else(|| bad("bad header"))?;
                    match k {
                        "sector" => kind = SectorKind::parse(v),
                        "dim_n" => dim_n = v.parse().map_err(|_| bad("bad dim_n"))?,
                        "m_split" => m_split = v.parse().map_err(|_| bad("bad m_split"))?,
                        "tau" => tau = v == "true",
                        _ => {}
                    }
                }
            } else if rest.starts_with("axis") {
                let mut ax_kind = String::new();
                let mut nodes = 0usize;
                let mut extent = 0.0f64;
                for part in rest.split_whitespace().skip(1) {
                    let (k, v) = part.split_once('=').ok_or_else(|| bad("bad axis header"))?;
                    match k {
                        "kind" => ax_kind = v.to_string(),
                        "nodes" => nodes = v.parse().map_err(|_| bad("bad axis nodes"))?,
                        "extent" => extent = v.parse().map_err(|_| bad("bad axis extent"))?,
                        _ => {}
                    }
                }
                axes_meta.push((ax_kind, nodes, extent));
            }
            continue;
        }
        if t.starts_with('c') {
            continue; // column header
        }
        let last = t.rsplit(',').next().ok_or_else(|| bad("empty row"))?;
        values.push(last.trim().parse::<f64>().map_err(|_| bad("bad value"))?);
    }
    let kind = kind.ok_or_else(|| bad("missing sector header"))?;
    let sector = SymmetrySector::new(kind, dim_n, m_split, tau)?;
    if axes_meta.is_empty() {
        return Err(bad("missing axis headers"));
    }
    let nodes = axes_meta[0].1;
    if axes_meta.iter().any(|(_, n, _)| *n != nodes) {
        return Err(bad("mixed axis node counts are not supported"));
    }
    let r_box = axes_meta
        .iter()
        .map(|(k, _, e)| if k == "radial" { *e } else { *e })
        .fold(0.0f64, f64::max);
    let grid = ReducedGrid::build(sector, r_box, nodes)?;
    if grid.len() != values.len() {
        return Err(bad(&format!(
            "value count {} does not match grid size {}",
            values.len(),
            grid.len()
        )));
    }
    Ok(Field::from_values(grid, values))
}
