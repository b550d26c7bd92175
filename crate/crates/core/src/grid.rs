//! Sampled-function substrate: truncated uniform lattices, grid functions,
//! finite-difference derivatives, trapezoidal quadrature and sup norms.
//!
//! Everything downstream (scales, seminorms, factorization, convolution)
//! computes on these types. All arithmetic is 64-bit and deterministic:
//! loops run in lattice order and no parallel reductions are used.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// One lattice axis: `2 * half_cells + 1` points spaced `spacing` apart,
/// symmetric about the origin. The coordinate of index `k` is
/// `(k - half_cells) * spacing`, so the origin is always a lattice point
/// and symmetric coordinates are exact negations of each other.
#[allow(clippy::len_without_is_empty)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub half_cells: usize,
    pub spacing: f64,
}

impl Axis {
    pub fn len(&self) -> usize {
        2 * self.half_cells + 1
    }

    pub fn coord(&self, k: usize) -> f64 {
        (k as i64 - self.half_cells as i64) as f64 * self.spacing
    }

    pub fn half_width(&self) -> f64 {
        self.half_cells as f64 * self.spacing
    }
}

/// Truncated uniform lattice over `[-L_1, L_1] x ... x [-L_dim, L_dim]`.
/// Never empty: every axis has at least three points.
#[allow(clippy::len_without_is_empty)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    axes: Vec<Axis>,
}

impl Grid {
    /// Build a grid from per-axis half widths and spacings. `L_i / h_i`
    /// must be integral (within 1e-9 relative) and the dimension at most 3.
    pub fn new(half_widths: &[f64], spacings: &[f64]) -> Result<Grid> {
        if half_widths.is_empty() || half_widths.len() > 3 {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1..=3, got {}",
                half_widths.len()
            )));
        }
        if half_widths.len() != spacings.len() {
            return Err(Error::InvalidGrid(
                "half_widths and spacings length mismatch".into(),
            ));
        }
        let mut axes = Vec::with_capacity(half_widths.len());
        for (i, (&l, &h)) in half_widths.iter().zip(spacings).enumerate() {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidGrid(format!(
                    "half width on axis {i} must be positive"
                )));
            }
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidGrid(format!(
                    "spacing on axis {i} must be positive"
                )));
            }
            let ratio = l / h;
            let n = ratio.round();
            if (ratio - n).abs() > 1e-9 * ratio.max(1.0) || n < 1.0 {
                return Err(Error::InvalidGrid(format!(
                    "half width {l} is not an integral multiple of spacing {h} on axis {i}"
                )));
            }
            axes.push(Axis {
                half_cells: n as usize,
                spacing: h,
            });
        }
        Ok(Grid { axes })
    }

    /// Uniform 1-d grid on `[-l, l]`.
    pub fn line(l: f64, h: f64) -> Result<Grid> {
        Grid::new(&[l], &[h])
    }

    pub fn from_axes(axes: Vec<Axis>) -> Grid {
        Grid { axes }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Axis::len).product()
    }

    /// Per-axis indices of a flat index (row-major, axis 0 slowest).
    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0usize; self.dim()];
        for a in (0..self.dim()).rev() {
            let n = self.axes[a].len();
            idx[a] = flat % n;
            flat /= n;
        }
        idx
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        let mut flat = 0usize;
        for a in 0..self.dim() {
            flat = flat * self.axes[a].len() + idx[a];
        }
        flat
    }

    pub fn coords(&self, flat: usize) -> Vec<f64> {
        self.unflatten(flat)
            .iter()
            .zip(&self.axes)
            .map(|(&k, ax)| ax.coord(k))
            .collect()
    }

    /// Flat index of the point mirrored through the origin.
    pub fn mirror(&self, flat: usize) -> usize {
        let idx = self.unflatten(flat);
        let mirrored: Vec<usize> = idx
            .iter()
            .zip(&self.axes)
            .map(|(&k, ax)| 2 * ax.half_cells - k)
            .collect();
        self.flatten(&mirrored)
    }

    /// Grid with `cells[a]` lattice cells removed from each side of axis `a`.
    pub fn shrink(&self, cells: &[usize]) -> Result<Grid> {
        let mut axes = Vec::with_capacity(self.dim());
        for (a, ax) in self.axes.iter().enumerate() {
            if cells[a] >= ax.half_cells {
                return Err(Error::StencilExceedsGrid { axis: a });
            }
            axes.push(Axis {
                half_cells: ax.half_cells - cells[a],
                spacing: ax.spacing,
            });
        }
        Ok(Grid { axes })
    }

    pub fn descriptor(&self) -> GridDescriptor {
        GridDescriptor {
            dim: self.dim(),
            half_widths: self.axes.iter().map(Axis::half_width).collect(),
            spacings: self.axes.iter().map(|a| a.spacing).collect(),
            points: self.len(),
        }
    }

    /// Volume of the box.
    pub fn volume(&self) -> f64 {
        self.axes.iter().map(|a| 2.0 * a.half_width()).product()
    }
}

/// Serializable summary of a grid, embedded in certificates and reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDescriptor {
    pub dim: usize,
    pub half_widths: Vec<f64>,
    pub spacings: Vec<f64>,
    pub points: usize,
}

/// How derivatives behave at the truncation edge.
///
/// `Shrink` (the default) drops the stencil radius off the reported domain,
/// which keeps sup-type seminorms free of one-sided stencil noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryPolicy {
    #[default]
    Shrink,
    OneSided,
}

/// Real-valued samples on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
    pub boundary_policy: BoundaryPolicy,
}

/// Nonnegative per-axis derivative orders.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex {
    orders: Vec<usize>,
}

impl MultiIndex {
    pub fn new(orders: Vec<usize>) -> MultiIndex {
        MultiIndex { orders }
    }

    /// Like `new` but enforcing a total-order cap.
    pub fn with_max(orders: Vec<usize>, max: usize) -> Result<MultiIndex> {
        let total: usize = orders.iter().sum();
        if total > max {
            return Err(Error::OrderTooLarge { got: total, max });
        }
        Ok(MultiIndex { orders })
    }

    pub fn zero(dim: usize) -> MultiIndex {
        MultiIndex {
            orders: vec![0; dim],
        }
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn total(&self) -> usize {
        self.orders.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.orders.iter().all(|&o| o == 0)
    }

    /// All multi-indices of the given dimension with total order <= max.
    pub fn all_up_to(dim: usize, max: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0usize; dim];
        fn rec(axis: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
            if axis == cur.len() {
                out.push(MultiIndex::new(cur.clone()));
                return;
            }
            for o in 0..=left {
                cur[axis] = o;
                rec(axis + 1, left - o, cur, out);
            }
            cur[axis] = 0;
        }
        rec(0, max, &mut cur, &mut out);
        out.sort_by_key(|m| (m.total(), m.orders.clone()));
        out
    }

    /// Componentwise `beta <= self`.
    pub fn contains(&self, beta: &MultiIndex) -> bool {
        self.orders.iter().zip(&beta.orders).all(|(a, b)| b <= a)
    }

    pub fn sub(&self, beta: &MultiIndex) -> MultiIndex {
        MultiIndex {
            orders: self
                .orders
                .iter()
                .zip(&beta.orders)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Product of per-axis binomial coefficients `C(gamma_i, beta_i)`.
    pub fn binomial(&self, beta: &MultiIndex) -> f64 {
        fn choose(n: usize, k: usize) -> f64 {
            let mut c = 1.0;
            for i in 0..k {
                c = c * (n - i) as f64 / (i + 1) as f64;
            }
            c
        }
        self.orders
            .iter()
            .zip(&beta.orders)
            .map(|(&g, &b)| choose(g, b))
            .product()
    }

    /// Compact label like "1" or "2,0", used in certificate constant keys.
    pub fn label(&self) -> String {
        self.orders
            .iter()
            .map(|o| o.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({})", self.label())
    }
}

/// Sample a pointwise expression on a grid. Rejects non-finite values,
/// naming the offending coordinate.
pub fn sample<F>(expr: F, grid: &Grid) -> Result<GridFunction>
where
    F: Fn(&[f64]) -> f64,
{
    sample_with_policy(expr, grid, BoundaryPolicy::Shrink)
}

pub fn sample_with_policy<F>(expr: F, grid: &Grid, policy: BoundaryPolicy) -> Result<GridFunction>
where
    F: Fn(&[f64]) -> f64,
{
    let mut values = Vec::with_capacity(grid.len());
    for flat in 0..grid.len() {
        let coords = grid.coords(flat);
        let v = expr(&coords);
        if !v.is_finite() {
            return Err(Error::NonFiniteSample { coords });
        }
        values.push(v);
    }
    Ok(GridFunction {
        grid: grid.clone(),
        values,
        boundary_policy: policy,
    })
}

impl GridFunction {
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<GridFunction> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "value count {} does not equal lattice size {}",
                values.len(),
                grid.len()
            )));
        }
        if let Some(flat) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample {
                coords: grid.coords(flat),
            });
        }
        Ok(GridFunction {
            grid,
            values,
            boundary_policy: BoundaryPolicy::Shrink,
        })
    }

    pub fn zero(grid: &Grid) -> GridFunction {
        GridFunction {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
            boundary_policy: BoundaryPolicy::Shrink,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    fn check_same_grid(&self, other: &GridFunction, context: &'static str) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch { context });
        }
        Ok(())
    }

    /// Max of absolute values.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Flat index attaining the sup norm (first occurrence).
    pub fn argmax_abs(&self) -> usize {
        let mut best = 0usize;
        let mut best_v = -1.0;
        for (i, v) in self.values.iter().enumerate() {
            let a = v.abs();
            if a > best_v {
                best_v = a;
                best = i;
            }
        }
        best
    }

    /// Trapezoidal rule over the box, tensor-product in higher dimensions.
    /// Exact for constants: the weights sum to the box volume.
    pub fn integrate(&self) -> f64 {
        let dim = self.grid.dim();
        let mut sum = 0.0;
        for flat in 0..self.values.len() {
            let idx = self.grid.unflatten(flat);
            let mut w = 1.0;
            for a in 0..dim {
                let ax = &self.grid.axes()[a];
                let edge = idx[a] == 0 || idx[a] == ax.len() - 1;
                w *= if edge { ax.spacing * 0.5 } else { ax.spacing };
            }
            sum += w * self.values[flat];
        }
        sum
    }

    pub fn pointwise_mul(&self, other: &GridFunction) -> Result<GridFunction> {
        self.check_same_grid(other, "pointwise_mul")?;
        Ok(GridFunction {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
            boundary_policy: self.boundary_policy,
        })
    }

    pub fn pointwise_add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.check_same_grid(other, "pointwise_add")?;
        Ok(GridFunction {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
            boundary_policy: self.boundary_policy,
        })
    }

    pub fn pointwise_sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.check_same_grid(other, "pointwise_sub")?;
        Ok(GridFunction {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
            boundary_policy: self.boundary_policy,
        })
    }

    pub fn scalar_mul(&self, c: f64) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
            boundary_policy: self.boundary_policy,
        }
    }

    /// Values mirrored through the origin.
    pub fn reflect(&self) -> GridFunction {
        let mut values = vec![0.0; self.values.len()];
        for flat in 0..self.values.len() {
            values[self.grid.mirror(flat)] = self.values[flat];
        }
        GridFunction {
            grid: self.grid.clone(),
            values,
            boundary_policy: self.boundary_policy,
        }
    }

    /// Restrict to a centered sub-grid obtained by `Grid::shrink`.
    pub fn restrict(&self, target: &Grid) -> Result<GridFunction> {
        if target.dim() != self.grid.dim() {
            return Err(Error::GridMismatch {
                context: "restrict",
            });
        }
        let mut offsets = Vec::with_capacity(target.dim());
        for (a, (ta, sa)) in target.axes().iter().zip(self.grid.axes()).enumerate() {
            if ta.spacing != sa.spacing || ta.half_cells > sa.half_cells {
                return Err(Error::InvalidGrid(format!(
                    "axis {a} is not a centered sub-axis"
                )));
            }
            offsets.push(sa.half_cells - ta.half_cells);
        }
        let mut values = Vec::with_capacity(target.len());
        for flat in 0..target.len() {
            let mut idx = target.unflatten(flat);
            for a in 0..idx.len() {
                idx[a] += offsets[a];
            }
            values.push(self.values[self.grid.flatten(&idx)]);
        }
        Ok(GridFunction {
            grid: target.clone(),
            values,
            boundary_policy: self.boundary_policy,
        })
    }

    /// 4th-order finite difference for a multi-index, one first-derivative
    /// stencil application per unit of order, composed per axis.
    ///
    /// With `Shrink` the reported domain loses the stencil radius (2 cells)
    /// per application; with `OneSided` skewed 5-point stencils keep the
    /// full domain. Both are exact on polynomials of degree <= 4.
    pub fn finite_diff(&self, gamma: &MultiIndex) -> Result<GridFunction> {
        if gamma.orders().len() != self.grid.dim() {
            return Err(Error::GridMismatch {
                context: "finite_diff multi-index dimension",
            });
        }
        let mut current = self.clone();
        for axis in 0..self.grid.dim() {
            for _ in 0..gamma.orders()[axis] {
                current = current.derive_axis(axis)?;
            }
        }
        Ok(current)
    }

    fn derive_axis(&self, axis: usize) -> Result<GridFunction> {
        match self.boundary_policy {
            BoundaryPolicy::Shrink => self.derive_axis_shrink(axis),
            BoundaryPolicy::OneSided => self.derive_axis_one_sided(axis),
        }
    }

    fn derive_axis_shrink(&self, axis: usize) -> Result<GridFunction> {
        let ax = &self.grid.axes()[axis];
        if ax.half_cells < 3 {
            return Err(Error::StencilExceedsGrid { axis });
        }
        let mut cells = vec![0usize; self.grid.dim()];
        cells[axis] = 2;
        let target = self.grid.shrink(&cells)?;
        let h = ax.spacing;
        let mut values = Vec::with_capacity(target.len());
        for flat in 0..target.len() {
            let mut idx = target.unflatten(flat);
            idx[axis] += 2; // recenter into the source grid
            let at = |off: i64, idx: &[usize]| -> f64 {
                let mut j = idx.to_vec();
                j[axis] = (j[axis] as i64 + off) as usize;
                self.values[self.grid.flatten(&j)]
            };
            let v =
                (at(-2, &idx) - 8.0 * at(-1, &idx) + 8.0 * at(1, &idx) - at(2, &idx)) / (12.0 * h);
            values.push(v);
        }
        Ok(GridFunction {
            grid: target,
            values,
            boundary_policy: self.boundary_policy,
        })
    }

    fn derive_axis_one_sided(&self, axis: usize) -> Result<GridFunction> {
        let ax = &self.grid.axes()[axis];
        let n = ax.len();
        if n < 5 {
            return Err(Error::StencilExceedsGrid { axis });
        }
        let h = ax.spacing;
        // 5-point stencils, all exact on degree <= 4:
        // forward, skewed, central, then mirrored with flipped signs.
        const FWD: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
        const SKW: [f64; 5] = [-3.0, -10.0, 18.0, -6.0, 1.0];
        const CEN: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
        let mut values = vec![0.0; self.values.len()];
        for flat in 0..self.values.len() {
            let idx = self.grid.unflatten(flat);
            let k = idx[axis];
            let mirrored = k >= n - 2;
            let edge_dist = if mirrored { n - 1 - k } else { k };
            let (coeffs, base): (&[f64; 5], i64) = match edge_dist {
                0 => (&FWD, 0),
                1 => (&SKW, -1),
                _ => (&CEN, -2),
            };
            let mut acc = 0.0;
            for (s, &c) in coeffs.iter().enumerate() {
                let off = if mirrored {
                    -(base + s as i64)
                } else {
                    base + s as i64
                };
                let mut j = idx.clone();
                j[axis] = (j[axis] as i64 + off) as usize;
                let sign = if mirrored { -1.0 } else { 1.0 };
                acc += sign * c * self.values[self.grid.flatten(&j)];
            }
            values[flat] = acc / (12.0 * h);
        }
        Ok(GridFunction {
            grid: self.grid.clone(),
            values,
            boundary_policy: self.boundary_policy,
        })
    }
}

/// Shell decomposition of a grid: each point gets an index from 0 (origin)
/// to `count - 1` (boundary), by normalized Chebyshev distance. On a 1-d
/// grid shell `j` is the pair `{-j h, +j h}`.
pub struct Shells {
    pub index: Vec<usize>,
    pub count: usize,
}

pub fn shells(grid: &Grid) -> Shells {
    let j_max = grid.axes().iter().map(|a| a.half_cells).max().unwrap_or(0);
    let mut index = Vec::with_capacity(grid.len());
    for flat in 0..grid.len() {
        let idx = grid.unflatten(flat);
        let t = idx
            .iter()
            .zip(grid.axes())
            .map(|(&k, ax)| {
                let d = (k as i64 - ax.half_cells as i64).unsigned_abs() as f64;
                d / ax.half_cells as f64
            })
            .fold(0.0f64, f64::max);
        let j = (t * j_max as f64).round() as usize;
        index.push(j.min(j_max));
    }
    Shells {
        index,
        count: j_max + 1,
    }
}

/// Per-shell suprema of |values|.
pub fn shell_sups(f: &GridFunction) -> Vec<f64> {
    let sh = shells(f.grid());
    let mut sups = vec![0.0f64; sh.count];
    for (flat, v) in f.values().iter().enumerate() {
        let j = sh.index[flat];
        sups[j] = sups[j].max(v.abs());
    }
    sups
}

/// Per-shell minima of values.
pub fn shell_mins(f: &GridFunction) -> Vec<f64> {
    let sh = shells(f.grid());
    let mut mins = vec![f64::INFINITY; sh.count];
    for (flat, v) in f.values().iter().enumerate() {
        let j = sh.index[flat];
        mins[j] = mins[j].min(*v);
    }
    mins
}

/// Boundary-decay proxy: true when the supremum over the outer quarter of
/// shells does not exceed the supremum over the inner shells. This is the
/// one desk-scale observable standing in for vanishing at infinity.
pub fn boundary_decay_consistent(profile: &[f64]) -> bool {
    if profile.len() < 4 {
        return true;
    }
    let split = profile.len() - profile.len() / 4;
    let inner = profile[..split].iter().cloned().fold(0.0f64, f64::max);
    let outer = profile[split..].iter().cloned().fold(0.0f64, f64::max);
    outer <= inner
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(l: f64, h: f64) -> Grid {
        Grid::line(l, h).unwrap()
    }

    #[test]
    fn sample_zero_and_constant() {
        let g = line(1.0, 1.0);
        let z = sample(|_| 0.0, &g).unwrap();
        assert!(z.values().iter().all(|&v| v == 0.0));
        let one = sample(|_| 1.0, &g).unwrap();
        assert_eq!(one.values(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn sample_square() {
        let g = line(2.0, 1.0);
        let f = sample(|x| x[0] * x[0], &g).unwrap();
        assert_eq!(f.values(), &[4.0, 1.0, 0.0, 1.0, 4.0]);
    }

    #[test]
    fn sample_rejects_non_finite() {
        let g = line(1.0, 1.0);
        let err = sample(|x| 1.0 / x[0], &g).unwrap_err();
        match err {
            Error::NonFiniteSample { coords } => assert_eq!(coords, vec![0.0]),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn grid_requires_integral_ratio() {
        assert!(Grid::line(1.0, 0.3).is_err());
        assert!(Grid::line(8.0, 1.0 / 64.0).is_ok());
    }

    #[test]
    fn finite_diff_constant_is_zero() {
        let g = line(4.0, 1.0);
        let f = sample(|_| 3.5, &g).unwrap();
        let d = f.finite_diff(&MultiIndex::new(vec![1])).unwrap();
        assert!(d.sup_norm() == 0.0);
        assert_eq!(d.grid().axes()[0].half_cells, 2);
    }

    #[test]
    fn finite_diff_linear_exact() {
        // 4th-order stencil is exact on degree <= 4, so x' = 1 exactly.
        let g = line(4.0, 1.0);
        let f = sample(|x| x[0], &g).unwrap();
        let d = f.finite_diff(&MultiIndex::new(vec![1])).unwrap();
        for v in d.values() {
            assert!((v - 1.0).abs() < 1e-13, "got {v}");
        }
    }

    #[test]
    fn finite_diff_second_derivative_of_square() {
        let g = line(8.0, 1.0);
        let f = sample(|x| x[0] * x[0], &g).unwrap();
        let d = f.finite_diff(&MultiIndex::new(vec![2])).unwrap();
        for v in d.values() {
            assert!((v - 2.0).abs() < 1e-12, "got {v}");
        }
    }

    #[test]
    fn finite_diff_one_sided_exact_on_quartics() {
        let g = line(4.0, 0.5);
        let mut f = sample(|x| x[0].powi(4) - 2.0 * x[0].powi(2) + x[0], &g).unwrap();
        f.boundary_policy = BoundaryPolicy::OneSided;
        let d = f.finite_diff(&MultiIndex::new(vec![1])).unwrap();
        assert_eq!(d.grid(), f.grid());
        for (flat, v) in d.values().iter().enumerate() {
            let x = d.grid().coords(flat)[0];
            let expect = 4.0 * x.powi(3) - 4.0 * x + 1.0;
            assert!((v - expect).abs() < 1e-10, "at {x}: {v} vs {expect}");
        }
    }

    #[test]
    fn finite_diff_stencil_error_names_axis() {
        let g = Grid::new(&[1.0, 4.0], &[1.0, 1.0]).unwrap();
        let f = sample(|x| x[0] + x[1], &g).unwrap();
        let err = f.finite_diff(&MultiIndex::new(vec![1, 0])).unwrap_err();
        match err {
            Error::StencilExceedsGrid { axis } => assert_eq!(axis, 0),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn sup_norm_examples() {
        let g = line(3.0, 1.0);
        assert_eq!(GridFunction::zero(&g).sup_norm(), 0.0);
        let f = sample(|x| x[0], &g).unwrap();
        assert_eq!(f.sup_norm(), 3.0);
        // dense-grid maximization oracle: (1+x^2)exp(-x^2) has its max 1 at 0
        let gg = line(8.0, 1.0 / 64.0);
        let f = sample(|x| (1.0 + x[0] * x[0]) * (-x[0] * x[0]).exp(), &gg).unwrap();
        let dense = line(8.0, 1.0 / 512.0);
        let fd = sample(|x| (1.0 + x[0] * x[0]) * (-x[0] * x[0]).exp(), &dense).unwrap();
        assert!((f.sup_norm() - 1.0).abs() < 1e-12);
        assert!((fd.sup_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn integrate_examples() {
        let g = Grid::line(0.5, 0.125).unwrap();
        // The lattice is symmetric about 0; "1 on [0,1]" is realized as the
        // unit box [-1/2, 1/2]: exact for constants either way.
        let one = sample(|_| 1.0, &g).unwrap();
        assert_eq!(one.integrate(), 1.0);
        assert_eq!(GridFunction::zero(&g).integrate(), 0.0);

        // Gaussian integral vs sqrt(pi), cross-checked against a finer lattice.
        let gg = line(8.0, 1.0 / 64.0);
        let f = sample(|x| (-x[0] * x[0]).exp(), &gg).unwrap();
        let fine = line(8.0, 1.0 / 256.0);
        let ff = sample(|x| (-x[0] * x[0]).exp(), &fine).unwrap();
        let pi_sqrt = std::f64::consts::PI.sqrt();
        assert!((f.integrate() - pi_sqrt).abs() < 1e-10);
        assert!((f.integrate() - ff.integrate()).abs() < 1e-12);
    }

    #[test]
    fn integrate_constant_is_volume_2d() {
        let g = Grid::new(&[2.0, 3.0], &[0.5, 1.0]).unwrap();
        let one = sample(|_| 1.0, &g).unwrap();
        assert!((one.integrate() - g.volume()).abs() < 1e-12);
    }

    #[test]
    fn pointwise_ops() {
        let g = line(2.0, 1.0);
        let x = sample(|c| c[0], &g).unwrap();
        let zero = GridFunction::zero(&g);
        let one = sample(|_| 1.0, &g).unwrap();
        assert_eq!(x.pointwise_mul(&zero).unwrap().values(), zero.values());
        assert_eq!(x.pointwise_mul(&one).unwrap().values(), x.values());
        assert_eq!(
            x.pointwise_mul(&x).unwrap().values(),
            &[4.0, 1.0, 0.0, 1.0, 4.0]
        );
        let other = line(2.0, 0.5);
        let y = sample(|c| c[0], &other).unwrap();
        assert!(matches!(
            x.pointwise_mul(&y),
            Err(Error::GridMismatch { .. })
        ));
    }

    #[test]
    fn reflect_round_trip() {
        let g = line(3.0, 1.0);
        let f = sample(|x| if x[0] > 0.0 { 1.0 + x[0] } else { 1.0 }, &g).unwrap();
        let r = f.reflect();
        for flat in 0..g.len() {
            let x = g.coords(flat)[0];
            let expect = if -x > 0.0 { 1.0 - x } else { 1.0 };
            assert_eq!(r.values()[flat], expect);
        }
        assert_eq!(r.reflect().values(), f.values());
    }

    #[test]
    fn shells_one_dim() {
        let g = line(3.0, 1.0);
        let sh = shells(&g);
        assert_eq!(sh.count, 4);
        assert_eq!(sh.index, vec![3, 2, 1, 0, 1, 2, 3]);
    }

    #[test]
    fn multi_index_order_cap() {
        assert!(MultiIndex::with_max(vec![1, 2], 3).is_ok());
        assert!(matches!(
            MultiIndex::with_max(vec![2, 2], 3),
            Err(Error::OrderTooLarge { got: 4, max: 3 })
        ));
    }

    #[test]
    fn boundary_decay_proxy() {
        assert!(boundary_decay_consistent(&[
            1.0, 0.5, 0.2, 0.1, 0.05, 0.01, 0.001, 0.0001
        ]));
        assert!(!boundary_decay_consistent(&[
            1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 65.0
        ]));
    }
}
