//! Desk-scale smooth crossed product: algebra-valued functions on a finite
//! symmetric group window under covariant convolution, integrated module
//! actions, covariance checks, approximate identities, Garding smoothing
//! and the crossed-product factorization slice.
//!
//! The group is abelian (a window in Z or a sampled window in R acting by
//! translation), so Haar weights are uniform and no modular factor enters.
//! Translations must be lattice aligned; values shifted outside the box are
//! dropped and replaced by zero, emulating compact support.

use crate::cert::Certificate;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, MultiIndex};
use crate::scales::{standard_bump, Scale};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKind {
    /// integer window {-radius .. radius}, Haar weight 1 per point
    ZWindow,
    /// sampled real window, Haar weight = step per point
    RSampled,
}

/// Finite symmetric window in an abelian group, closed under negation and
/// containing the identity; never empty.
#[allow(clippy::len_without_is_empty)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupWindow {
    pub kind: GroupKind,
    pub radius: usize,
    pub step: f64,
}

impl GroupWindow {
    pub fn z_window(radius: usize) -> GroupWindow {
        GroupWindow {
            kind: GroupKind::ZWindow,
            radius,
            step: 1.0,
        }
    }

    pub fn r_sampled(radius: usize, step: f64) -> Result<GroupWindow> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "window step {step} must be positive"
            )));
        }
        Ok(GroupWindow {
            kind: GroupKind::RSampled,
            radius,
            step,
        })
    }

    pub fn len(&self) -> usize {
        2 * self.radius + 1
    }

    /// Group element value at slot i (i = radius is the identity).
    pub fn point(&self, i: usize) -> f64 {
        (i as i64 - self.radius as i64) as f64 * self.step
    }

    pub fn haar_weight(&self) -> f64 {
        match self.kind {
            GroupKind::ZWindow => 1.0,
            GroupKind::RSampled => self.step,
        }
    }

    /// The window as a 1-d grid (for scales on the group).
    pub fn grid(&self) -> Grid {
        Grid::from_axes(vec![crate::grid::Axis {
            half_cells: self.radius,
            spacing: self.step,
        }])
    }
}

/// How the group acts on grid functions: translation along one axis.
/// `alpha_g(e)(m) = e(m - g e_axis)`, zero-filled at the truncation edge.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActionSpec {
    pub axis: usize,
    /// temperedness certificate `|alpha_g(e)|_m <= C omega(g)^d |e|_k`
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub temperedness: Option<Certificate>,
    /// scaled-space certificate when the action is paired with a space scale
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scaled_space: Option<Certificate>,
}

impl ActionSpec {
    pub fn translation(axis: usize) -> ActionSpec {
        ActionSpec {
            axis,
            temperedness: None,
            scaled_space: None,
        }
    }

    /// Translate by group element g; requires lattice alignment.
    pub fn translate(&self, g: f64, e: &GridFunction) -> Result<GridFunction> {
        let grid = e.grid().clone();
        let ax = &grid.axes()[self.axis];
        let cells_f = g / ax.spacing;
        let cells = cells_f.round();
        if (cells_f - cells).abs() > 1e-9 {
            return Err(Error::NotLatticeAligned {
                amount: g,
                spacing: ax.spacing,
            });
        }
        let cells = cells as i64;
        if cells == 0 {
            return Ok(e.clone());
        }
        let n = ax.len() as i64;
        let mut out = GridFunction::zero(&grid);
        for flat in 0..grid.len() {
            let idx = grid.unflatten(flat);
            let src = idx[self.axis] as i64 - cells;
            if src >= 0 && src < n {
                let mut j = idx.clone();
                j[self.axis] = src as usize;
                out.values_mut()[flat] = e.values()[grid.flatten(&j)];
            }
        }
        Ok(out)
    }
}

/// An algebra-valued function on the window: one grid slice per group
/// point, plus the group scale the seminorms integrate against.
#[derive(Debug, Clone)]
pub struct CrossedElement {
    pub window: GroupWindow,
    pub slices: Vec<GridFunction>,
    pub omega: Scale,
}

impl CrossedElement {
    pub fn new(window: GroupWindow, slices: Vec<GridFunction>, omega: Scale) -> Result<Self> {
        if slices.len() != window.len() {
            return Err(Error::WindowMismatch);
        }
        if omega.grid() != &window.grid() {
            return Err(Error::WindowMismatch);
        }
        if let Some(first) = slices.first() {
            if slices.iter().any(|s| s.grid() != first.grid()) {
                return Err(Error::GridMismatch {
                    context: "crossed element slices",
                });
            }
        }
        Ok(CrossedElement {
            window,
            slices,
            omega,
        })
    }

    /// `delta_identity (x) a`: the point mass at the identity against a.
    pub fn delta(window: GroupWindow, a: &GridFunction, omega: Scale) -> Result<Self> {
        let mut slices = vec![GridFunction::zero(a.grid()); window.len()];
        slices[window.radius] = a.clone();
        CrossedElement::new(window, slices, omega)
    }

    /// `f (x) a`: slice at g is `f(g) a` for a scalar profile f on the window.
    pub fn tensor(window: GroupWindow, f: &[f64], a: &GridFunction, omega: Scale) -> Result<Self> {
        if f.len() != window.len() {
            return Err(Error::WindowMismatch);
        }
        let slices = f.iter().map(|&c| a.scalar_mul(c)).collect();
        CrossedElement::new(window, slices, omega)
    }

    pub fn zero_like(&self) -> CrossedElement {
        CrossedElement {
            window: self.window.clone(),
            slices: self
                .slices
                .iter()
                .map(|s| GridFunction::zero(s.grid()))
                .collect(),
            omega: self.omega.clone(),
        }
    }

    pub fn space_grid(&self) -> &Grid {
        self.slices[0].grid()
    }

    fn check_compatible(&self, other: &CrossedElement) -> Result<()> {
        if self.window != other.window {
            return Err(Error::WindowMismatch);
        }
        if self.space_grid() != other.space_grid() {
            return Err(Error::GridMismatch {
                context: "crossed elements",
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &CrossedElement) -> Result<CrossedElement> {
        self.check_compatible(other)?;
        let slices = self
            .slices
            .iter()
            .zip(&other.slices)
            .map(|(a, b)| a.pointwise_add(b))
            .collect::<Result<Vec<_>>>()?;
        CrossedElement::new(self.window.clone(), slices, self.omega.clone())
    }

    pub fn scalar_mul(&self, c: f64) -> CrossedElement {
        CrossedElement {
            window: self.window.clone(),
            slices: self.slices.iter().map(|s| s.scalar_mul(c)).collect(),
            omega: self.omega.clone(),
        }
    }

    /// sup over slices of the slice sup norm
    pub fn sup_norm(&self) -> f64 {
        self.slices.iter().map(|s| s.sup_norm()).fold(0.0, f64::max)
    }
}

/// Covariant convolution with Haar weights:
/// `(F1 * F2)(g) = sum_h w F1(h) alpha_h(F2(h^{-1} g))`,
/// with slices falling outside the window treated as zero.
pub fn convolve(
    f1: &CrossedElement,
    f2: &CrossedElement,
    action: &ActionSpec,
) -> Result<CrossedElement> {
    f1.check_compatible(f2)?;
    let window = &f1.window;
    let n = window.len() as i64;
    let w = window.haar_weight();
    let mut slices = Vec::with_capacity(window.len());
    for i in 0..window.len() {
        let mut acc = GridFunction::zero(f1.space_grid());
        for j in 0..window.len() {
            let rel = i as i64 - j as i64 + window.radius as i64;
            if rel < 0 || rel >= n {
                continue;
            }
            let h = window.point(j);
            let shifted = action.translate(h, &f2.slices[rel as usize])?;
            let term = f1.slices[j].pointwise_mul(&shifted)?;
            acc = acc.pointwise_add(&term.scalar_mul(w))?;
        }
        slices.push(acc);
    }
    CrossedElement::new(window.clone(), slices, f1.omega.clone())
}

/// A family of algebra seminorms, increasing in the index.
pub trait SeminormFamily {
    fn count(&self) -> usize;
    fn eval(&self, m: usize, f: &GridFunction) -> Result<f64>;
}

/// The sup norm as the single algebra seminorm.
pub struct SupFamily;

impl SeminormFamily for SupFamily {
    fn count(&self) -> usize {
        1
    }
    fn eval(&self, _m: usize, f: &GridFunction) -> Result<f64> {
        Ok(f.sup_norm())
    }
}

/// Weighted seminorms against a space scale:
/// `m -> max_{d <= min(m, d_max), |gamma| <= min(m, l_max)}`.
pub struct SigmaFamily<'a> {
    pub sigma: &'a Scale,
    pub d_max: u32,
    pub l_max: usize,
}

impl<'a> SeminormFamily for SigmaFamily<'a> {
    fn count(&self) -> usize {
        self.d_max as usize + self.l_max + 1
    }
    fn eval(&self, m: usize, f: &GridFunction) -> Result<f64> {
        let mut v = 0.0f64;
        for d in 0..=self.d_max.min(m as u32) {
            for gamma in MultiIndex::all_up_to(f.grid().dim(), self.l_max.min(m)) {
                v = v.max(crate::schwartz::seminorm_sigma(
                    f,
                    self.sigma,
                    &crate::schwartz::SeminormIndex::new(d, gamma.clone()),
                )?);
            }
        }
        Ok(v)
    }
}

/// Integrated seminorm `sum_g w omega(g)^d |X^gamma F(g)|_m`. Group
/// derivatives need a sampled real window; on an integer window only
/// gamma = 0 is defined.
pub fn crossed_seminorm(
    f: &CrossedElement,
    d: u32,
    gamma: usize,
    m: usize,
    family: &dyn SeminormFamily,
) -> Result<f64> {
    let (slices, offset): (Vec<GridFunction>, usize) = if gamma == 0 {
        (f.slices.clone(), 0)
    } else {
        if f.window.kind == GroupKind::ZWindow {
            return Err(Error::GroupDerivativeOnDiscrete);
        }
        let mut current = f.slices.clone();
        let mut offset = 0usize;
        for _ in 0..gamma {
            current = group_derivative(&current, f.window.step)?;
            offset += 2;
        }
        (current, offset)
    };
    let w = f.window.haar_weight();
    let omega_vals = f.omega.values();
    let mut acc = 0.0;
    for (i, slice) in slices.iter().enumerate() {
        let om = omega_vals[i + offset];
        acc += w * om.powi(d as i32) * family.eval(m, slice)?;
    }
    Ok(acc)
}

/// Central 4th-order derivative across slices, shrinking the window by the
/// stencil radius.
fn group_derivative(slices: &[GridFunction], step: f64) -> Result<Vec<GridFunction>> {
    if slices.len() < 5 {
        return Err(Error::StencilExceedsGrid { axis: 0 });
    }
    let mut out = Vec::with_capacity(slices.len() - 4);
    for i in 2..slices.len() - 2 {
        let mut v = slices[i - 2].scalar_mul(1.0 / (12.0 * step));
        v = v.pointwise_add(&slices[i - 1].scalar_mul(-8.0 / (12.0 * step)))?;
        v = v.pointwise_add(&slices[i + 1].scalar_mul(8.0 / (12.0 * step)))?;
        v = v.pointwise_add(&slices[i + 2].scalar_mul(-1.0 / (12.0 * step)))?;
        out.push(v);
    }
    Ok(out)
}

/// Integrated action on a module element: `F e = sum_g w F(g) (g e)`.
pub fn act_on_module(
    f: &CrossedElement,
    e: &GridFunction,
    action: &ActionSpec,
) -> Result<GridFunction> {
    if f.space_grid() != e.grid() {
        return Err(Error::GridMismatch {
            context: "act_on_module",
        });
    }
    let w = f.window.haar_weight();
    let mut acc = GridFunction::zero(e.grid());
    for i in 0..f.window.len() {
        let g = f.window.point(i);
        let ge = action.translate(g, e)?;
        let term = f.slices[i].pointwise_mul(&ge)?;
        acc = acc.pointwise_add(&term.scalar_mul(w))?;
    }
    Ok(acc)
}

/// Integrated action together with the continuity estimate
/// `|F e|_d <= C |F|_{l, m} max_g |g e|_n`, with C and l taken from the
/// action's temperedness certificate.
pub fn act_with_estimate(
    f: &CrossedElement,
    e: &GridFunction,
    action: &ActionSpec,
    family: &dyn SeminormFamily,
) -> Result<(GridFunction, Certificate)> {
    let tempered = action
        .temperedness
        .as_ref()
        .ok_or(Error::MissingDerivativeCertificate)?;
    let c = tempered.constant("C").unwrap_or(1.0);
    let l = tempered.constant("d").unwrap_or(1.0) as u32;
    let fe = act_on_module(f, e, action)?;
    let lhs = family.eval(0, &fe)?;
    let f_norm = crossed_seminorm(f, l, 0, 0, family)?;
    let mut ge_max = 0.0f64;
    for i in 0..f.window.len() {
        let ge = action.translate(f.window.point(i), e)?;
        ge_max = ge_max.max(family.eval(0, &ge)?);
    }
    let rhs = c * f_norm * ge_max;
    let cert = Certificate::new("module_action_bound", e.grid().descriptor())
        .with_constant("C", c)
        .with_constant("l", l as f64)
        .with_constant("lhs", lhs)
        .with_constant("rhs", rhs)
        .finish(lhs - rhs, None);
    Ok((fe, cert))
}

/// Covariance residual `sup |g(a e) - alpha_g(a) (g e)|`; exactly zero for
/// lattice-aligned translations because both sides multiply the same two
/// samples before and after the shift.
pub fn check_covariance(
    g: f64,
    a: &GridFunction,
    e: &GridFunction,
    action: &ActionSpec,
) -> Result<Certificate> {
    let lhs = action.translate(g, &a.pointwise_mul(e)?)?;
    let rhs = action
        .translate(g, a)?
        .pointwise_mul(&action.translate(g, e)?)?;
    let diff = lhs.pointwise_sub(&rhs)?;
    let worst = diff.sup_norm();
    let witness = diff.grid().coords(diff.argmax_abs());
    Ok(Certificate::new("covariance", e.grid().descriptor())
        .with_constant("g", g)
        .finish(worst, Some(witness)))
}

/// Approximate identity at shrink level n: `Psi_n (x) a` with unit Haar
/// mass. On an integer window the point mass at the identity is already an
/// exact identity for every level; on a sampled window the support halves
/// per level.
pub fn approx_identity(
    n: usize,
    a: &GridFunction,
    window: &GroupWindow,
    omega: Scale,
) -> Result<CrossedElement> {
    match window.kind {
        GroupKind::ZWindow => CrossedElement::delta(window.clone(), a, omega),
        GroupKind::RSampled => {
            let half_width = window.radius as f64 * window.step;
            let r = half_width * 0.5f64.powi(n as i32);
            if r <= window.step {
                return Err(Error::WindowTooSmall { level: n });
            }
            let wgrid = window.grid();
            let bump = standard_bump(&wgrid, r)?;
            // renormalize to unit Haar mass over the window sum
            let w = window.haar_weight();
            let mass: f64 = bump.values().iter().map(|v| v * w).sum();
            let profile: Vec<f64> = bump.values().iter().map(|v| v / mass).collect();
            CrossedElement::tensor(window.clone(), &profile, a, omega)
        }
    }
}

/// Garding smoothing `alpha_f(e) = sum_g w f(g) (g e)` of a module element
/// against a scalar bump on the window.
pub fn garding_smooth(
    f: &GridFunction,
    e: &GridFunction,
    window: &GroupWindow,
    action: &ActionSpec,
) -> Result<GridFunction> {
    if f.grid() != &window.grid() {
        return Err(Error::WindowMismatch);
    }
    let w = window.haar_weight();
    let mut acc = GridFunction::zero(e.grid());
    for i in 0..window.len() {
        let g = window.point(i);
        let ge = action.translate(g, e)?;
        acc = acc.pointwise_add(&ge.scalar_mul(w * f.values()[i]))?;
    }
    Ok(acc)
}

/// The crossed-product factorization slice: `b(g) = f(g) alpha_g(a)`,
/// together with the residual of `b e~ = alpha_f(a e~)`.
pub fn factorize_crossed(
    e_tilde: &GridFunction,
    f: &GridFunction,
    a: &GridFunction,
    window: &GroupWindow,
    omega: Scale,
    action: &ActionSpec,
) -> Result<(CrossedElement, f64)> {
    if f.grid() != &window.grid() {
        return Err(Error::WindowMismatch);
    }
    let mut slices = Vec::with_capacity(window.len());
    for i in 0..window.len() {
        let g = window.point(i);
        let moved = action.translate(g, a)?;
        slices.push(moved.scalar_mul(f.values()[i]));
    }
    let b = CrossedElement::new(window.clone(), slices, omega)?;
    let lhs = act_on_module(&b, e_tilde, action)?;
    let rhs = garding_smooth(f, &a.pointwise_mul(e_tilde)?, window, action)?;
    let residual = lhs.pointwise_sub(&rhs)?.sup_norm();
    Ok((b, residual))
}

/// Left group translation of a crossed element:
/// `(g F)(h) = alpha_g(F(g^{-1} h))`. Slices shifted past the window edge
/// are dropped; the count and their largest sup norm are reported.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruncationNote {
    pub dropped_slices: usize,
    pub dropped_sup: f64,
}

pub fn group_translate(
    f: &CrossedElement,
    g: f64,
    action: &ActionSpec,
) -> Result<(CrossedElement, TruncationNote)> {
    let window = &f.window;
    let steps_f = g / window.step;
    let steps = steps_f.round();
    if (steps_f - steps).abs() > 1e-9 {
        return Err(Error::NotLatticeAligned {
            amount: g,
            spacing: window.step,
        });
    }
    let steps = steps as i64;
    let n = window.len() as i64;
    let mut dropped_slices = 0usize;
    let mut dropped_sup = 0.0f64;
    let mut slices = Vec::with_capacity(window.len());
    for i in 0..n {
        let src = i - steps;
        if src < 0 || src >= n {
            slices.push(GridFunction::zero(f.space_grid()));
        } else {
            slices.push(action.translate(g, &f.slices[src as usize])?);
        }
    }
    for i in 0..n {
        let dst = i + steps;
        if dst < 0 || dst >= n {
            let s = f.slices[i as usize].sup_norm();
            if s > 0.0 {
                dropped_slices += 1;
                dropped_sup = dropped_sup.max(s);
            }
        }
    }
    Ok((
        CrossedElement::new(window.clone(), slices, f.omega.clone())?,
        TruncationNote {
            dropped_slices,
            dropped_sup,
        },
    ))
}

/// Algebra action `(a F)(h) = a F(h)`.
pub fn algebra_mult(a: &GridFunction, f: &CrossedElement) -> Result<CrossedElement> {
    let slices = f
        .slices
        .iter()
        .map(|s| a.pointwise_mul(s))
        .collect::<Result<Vec<_>>>()?;
    CrossedElement::new(f.window.clone(), slices, f.omega.clone())
}

/// Serialized form of a crossed element: manifest plus one grid file per
/// slice (written separately in the binary grid format).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossedManifest {
    pub window: GroupWindow,
    pub omega_values: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub omega_form: Option<crate::catalog::ClosedForm>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub action: Option<ActionSpec>,
    pub slices: Vec<String>,
}

/// Write manifest + slices under `dir` with the given file-name prefix.
/// Returns the manifest file name.
pub fn write_crossed(
    element: &CrossedElement,
    action: Option<&ActionSpec>,
    dir: &std::path::Path,
    prefix: &str,
) -> Result<String> {
    let mut slices = Vec::with_capacity(element.slices.len());
    for (i, slice) in element.slices.iter().enumerate() {
        let name = format!("{prefix}_slice_{i:03}.bin");
        crate::io::write_binary_file(slice, dir.join(&name))?;
        slices.push(name);
    }
    let manifest = CrossedManifest {
        window: element.window.clone(),
        omega_values: element.omega.values().to_vec(),
        omega_form: element.omega.closed_form().cloned(),
        action: action.cloned(),
        slices,
    };
    let name = format!("{prefix}_manifest.json");
    let mut buf = serde_json::to_vec_pretty(&manifest)?;
    buf.push(b'\n');
    std::fs::write(dir.join(&name), buf)?;
    Ok(name)
}

/// Load a crossed element (and the recorded action, if any) from a
/// manifest written by `write_crossed`.
pub fn read_crossed(
    dir: &std::path::Path,
    manifest_name: &str,
) -> Result<(CrossedElement, Option<ActionSpec>)> {
    let text = std::fs::read_to_string(dir.join(manifest_name))?;
    let manifest: CrossedManifest = serde_json::from_str(&text)?;
    let omega_grid = manifest.window.grid();
    let omega_f = GridFunction::from_values(omega_grid, manifest.omega_values)?;
    let omega = match manifest.omega_form {
        Some(form) => Scale::from_closed_form(
            form,
            &manifest.window.grid(),
            crate::scales::ScaleKind::OnGroup,
        )?,
        None => Scale::from_grid_function(omega_f, crate::scales::ScaleKind::OnGroup)?,
    };
    let mut slices = Vec::with_capacity(manifest.slices.len());
    for name in &manifest.slices {
        slices.push(crate::io::read_binary_file(dir.join(name))?);
    }
    let element = CrossedElement::new(manifest.window, slices, omega)?;
    Ok((element, manifest.action))
}

/// Fit the temperedness constant of a translation action over a probe
/// corpus: `|alpha_g(e)|_m <= C omega(g)^d |e|_m`. Translations never
/// increase a sup norm, so C is near 1 and d = 1 suffices.
pub fn fit_temperedness(
    action: &ActionSpec,
    omega: &Scale,
    window: &GroupWindow,
    probes: &[GridFunction],
    family: &dyn SeminormFamily,
) -> Result<Certificate> {
    let omega_vals = omega.values();
    let mut c = 0.0f64;
    for e in probes {
        let base = family.eval(0, e)?.max(1e-300);
        for i in 0..window.len() {
            let moved = action.translate(window.point(i), e)?;
            let ratio = family.eval(0, &moved)? / (omega_vals[i] * base);
            c = c.max(ratio);
        }
    }
    let c_used = c.max(1e-300) * (1.0 + crate::cert::FIT_NUDGE);
    let mut worst = f64::NEG_INFINITY;
    for e in probes {
        let base = family.eval(0, e)?;
        for i in 0..window.len() {
            let moved = action.translate(window.point(i), e)?;
            let r = family.eval(0, &moved)? - c_used * omega_vals[i] * base;
            if r > worst {
                worst = r;
            }
        }
    }
    if probes.is_empty() {
        worst = 0.0;
    }
    Ok(
        Certificate::new("tempered_action", window.grid().descriptor())
            .with_constant("C", c_used)
            .with_constant("d", 1.0)
            .with_constant("probe_count", probes.len() as f64)
            .finish(worst, None),
    )
}

/// Continuity of convolution in an integrated seminorm, with constants
/// from the sub-polynomial certificate of the group scale:
/// `|F1 * F2|_{d,0,m} <= C_s^d |F1|_{d s,0,m} |F2|_{d s,0,m}`.
pub fn convolution_continuity_certificate(
    f1: &CrossedElement,
    f2: &CrossedElement,
    product: &CrossedElement,
    d: u32,
    m: usize,
    family: &dyn SeminormFamily,
    subpoly: &Certificate,
) -> Result<Certificate> {
    let c_s = subpoly.constant("C").unwrap_or(1.0).max(1.0);
    let d_s = subpoly.constant("d").unwrap_or(1.0) as u32;
    let lhs = crossed_seminorm(product, d, 0, m, family)?;
    let a = crossed_seminorm(f1, d * d_s, 0, m, family)?;
    let b = crossed_seminorm(f2, d * d_s, 0, m, family)?;
    let rhs = c_s.powi(d as i32) * a * b;
    Ok(
        Certificate::new("convolution_continuity", f1.space_grid().descriptor())
            .with_constant("C", c_s.powi(d as i32))
            .with_constant("d", d as f64)
            .with_constant("d_sub", d_s as f64)
            .with_constant("lhs", lhs)
            .with_constant("rhs", rhs)
            .finish(lhs - rhs, None),
    )
}

/// Seminorm bound for the factorization slices: `|b|_{d,0,m} <= D |a|_m`
/// over a corpus of algebra elements, with the fitted D reported.
pub fn fit_slice_bound(
    f: &GridFunction,
    corpus: &[GridFunction],
    window: &GroupWindow,
    omega: Scale,
    action: &ActionSpec,
    d: u32,
    m: usize,
    family: &dyn SeminormFamily,
) -> Result<Certificate> {
    let mut ratio = 0.0f64;
    let mut pairs = Vec::new();
    for a in corpus {
        let (b, _) = factorize_crossed(
            &GridFunction::zero(a.grid()),
            f,
            a,
            window,
            omega.clone(),
            action,
        )?;
        let lhs = crossed_seminorm(&b, d, 0, m, family)?;
        let rhs = family.eval(m, a)?.max(1e-300);
        ratio = ratio.max(lhs / rhs);
        pairs.push((lhs, rhs));
    }
    let d_fit = ratio.max(1e-300) * (1.0 + crate::cert::FIT_NUDGE);
    let mut worst = f64::NEG_INFINITY;
    for (lhs, rhs) in &pairs {
        let r = lhs - d_fit * rhs;
        if r > worst {
            worst = r;
        }
    }
    if pairs.is_empty() {
        worst = 0.0;
    }
    Ok(Certificate::new("slice_bound", window.grid().descriptor())
        .with_constant("D", d_fit)
        .with_constant("d", d as f64)
        .with_constant("m", m as f64)
        .finish(worst, None))
}
