//! Immersions of the disc into R^4, orthonormal normal sections and their
//! torsion coefficients.
//!
//! Only the `(sigma, theta) = (1, 2)` torsion components are stored:
//! `t11 = (N1)_u . N2` and `t12 = (N1)_v . N2`. The remaining components
//! follow from antisymmetry, `(N2)_{u^i} . N1 = -(N1)_{u^i} . N2`, and the
//! diagonal ones vanish. Swapping `N1` and `N2` flips the sign of both
//! coefficients and of the normal curvature `S`.

use rayon::prelude::*;

use crate::disc_grid::{dot4, DiscGrid, Direction, Field, ScalarField, Vec4Field};
use crate::error::{Error, Result};

/// Default bound on `|g11 - g22|/W` and `|g12|/W` for analytic inputs.
pub const DEFAULT_CONFORMALITY_TOL: f64 = 1e-8;

/// Projections shorter than this are rejected as frame pivots.
pub const PIVOT_THRESHOLD: f64 = 1e-6;

/// A parametrized surface `X: B -> R^4`.
pub trait Immersion: Sync {
    fn position(&self, u: f64, v: f64) -> [f64; 4];

    /// Analytic `(X_u, X_v)`, when available.
    fn tangents(&self, _u: f64, _v: f64) -> Option<([f64; 4], [f64; 4])> {
        None
    }
}

/// `X`, `X_u`, `X_v` on the grid together with the induced metric.
#[derive(Debug, Clone, PartialEq)]
pub struct ImmersionSample {
    pub x: Vec4Field,
    pub xu: Vec4Field,
    pub xv: Vec4Field,
    pub g11: ScalarField,
    pub g12: ScalarField,
    pub g22: ScalarField,
    /// Area element, `(g11 + g22)/2`; equals `g11 = g22` for conformal data.
    pub w: ScalarField,
}

impl ImmersionSample {
    /// Builds the metric from sampled position and tangent fields. All three
    /// fields need boundary traces.
    pub fn from_parts(grid: &DiscGrid, x: Vec4Field, xu: Vec4Field, xv: Vec4Field) -> Result<Self> {
        for f in [&x, &xu, &xv] {
            Field::new(grid, f.values().to_vec(), Some(f.trace_or_err()?.to_vec()))?;
        }
        let g11 = xu.zip_map(&xu, dot4);
        let g12 = xu.zip_map(&xv, dot4);
        let g22 = xv.zip_map(&xv, dot4);
        let w = g11.zip_map(&g22, |a, b| 0.5 * (a + b));
        Ok(Self {
            x,
            xu,
            xv,
            g11,
            g12,
            g22,
            w,
        })
    }

    /// Inverse metric `(g^11, g^12, g^22)` at every node (interior then trace).
    pub fn inverse_metric(&self) -> (ScalarField, ScalarField, ScalarField) {
        let det = self
            .g11
            .zip_map(&self.g22, |a, b| a * b)
            .zip_map(&self.g12, |ab, c| ab - c * c);
        (
            self.g22.zip_map(&det, |a, d| a / d),
            self.g12.zip_map(&det, |a, d| -a / d),
            self.g11.zip_map(&det, |a, d| a / d),
        )
    }
}

pub fn sample_immersion(imm: &dyn Immersion, grid: &DiscGrid) -> Result<ImmersionSample> {
    let check = |p: [f64; 4], u: f64, v: f64| {
        if p.iter().all(|c| c.is_finite()) {
            Ok(p)
        } else {
            Err(Error::ImmersionEvaluation { u, v })
        }
    };
    let eval = |u: f64, v: f64| check(imm.position(u, v), u, v);
    let x = collect_field(grid, eval)?;
    let (xu, xv) = if imm.tangents(0.0, 0.0).is_some() {
        let tan = |u: f64, v: f64| -> Result<([f64; 4], [f64; 4])> {
            let (a, b) = imm.tangents(u, v).ok_or(Error::ImmersionEvaluation { u, v })?;
            Ok((check(a, u, v)?, check(b, u, v)?))
        };
        let both = collect_field(grid, tan)?;
        (both.map(|p| p.0), both.map(|p| p.1))
    } else {
        vec4_gradient(grid, &x)?
    };
    ImmersionSample::from_parts(grid, x, xu, xv)
}

fn collect_field<T: Send>(
    grid: &DiscGrid,
    f: impl Fn(f64, f64) -> Result<T> + Sync,
) -> Result<Field<T>> {
    let values = (0..grid.num_interior())
        .into_par_iter()
        .map(|i| {
            let (u, v) = grid.node(i);
            f(u, v)
        })
        .collect::<Result<Vec<_>>>()?;
    let trace = (0..grid.n_theta())
        .map(|k| {
            let (u, v) = grid.boundary_node(k);
            f(u, v)
        })
        .collect::<Result<Vec<_>>>()?;
    Field::new(grid, values, Some(trace))
}

/// Componentwise `(f_u, f_v)` of a vector field.
pub fn vec4_gradient(grid: &DiscGrid, f: &Vec4Field) -> Result<(Vec4Field, Vec4Field)> {
    let mut us = Vec::with_capacity(4);
    let mut vs = Vec::with_capacity(4);
    for c in 0..4 {
        let (a, b) = grid.gradient(&f.component(c))?;
        us.push(a);
        vs.push(b);
    }
    Ok((
        Vec4Field::from_components([&us[0], &us[1], &us[2], &us[3]]),
        Vec4Field::from_components([&vs[0], &vs[1], &vs[2], &vs[3]]),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalityReport {
    pub max_diag_residual: f64,
    pub max_offdiag_residual: f64,
    pub min_area_element: f64,
    pub tol: f64,
    pub passed: bool,
}

impl ConformalityReport {
    pub fn into_result(self) -> Result<Self> {
        if self.passed {
            Ok(self)
        } else {
            Err(Error::NotConformal {
                diag: self.max_diag_residual,
                offdiag: self.max_offdiag_residual,
                min_w: self.min_area_element,
                tol: self.tol,
            })
        }
    }
}

pub fn check_conformality(s: &ImmersionSample, tol: f64) -> ConformalityReport {
    let mut diag: f64 = 0.0;
    let mut off: f64 = 0.0;
    let mut min_w = f64::INFINITY;
    let all = |f: &ScalarField| -> Vec<f64> {
        f.values().iter().chain(f.trace().into_iter().flatten()).copied().collect()
    };
    let (g11, g12, g22, w) = (all(&s.g11), all(&s.g12), all(&s.g22), all(&s.w));
    for i in 0..w.len() {
        min_w = min_w.min(w[i]);
        diag = diag.max((g11[i] - g22[i]).abs() / w[i]);
        off = off.max(g12[i].abs() / w[i]);
    }
    let passed = min_w > 0.0 && diag <= tol && off <= tol;
    ConformalityReport {
        max_diag_residual: diag,
        max_offdiag_residual: off,
        min_area_element: min_w,
        tol,
        passed,
    }
}

/// Analytic first derivatives of both normals.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionDerivatives {
    pub n1_u: Vec4Field,
    pub n1_v: Vec4Field,
    pub n2_u: Vec4Field,
    pub n2_v: Vec4Field,
}

/// Orthonormal normal fields `N1`, `N2`, optionally with analytic derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalSection {
    pub n1: Vec4Field,
    pub n2: Vec4Field,
    pub derivatives: Option<SectionDerivatives>,
}

impl NormalSection {
    pub fn new(n1: Vec4Field, n2: Vec4Field) -> Self {
        Self {
            n1,
            n2,
            derivatives: None,
        }
    }

    pub fn with_derivatives(mut self, d: SectionDerivatives) -> Self {
        self.derivatives = Some(d);
        self
    }

    /// Drops analytic derivatives so torsions are computed on the grid.
    pub fn numerical(mut self) -> Self {
        self.derivatives = None;
        self
    }

    /// Max over nodes of `||N1| - 1|`, `||N2| - 1|` and `|N1 . N2|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let r = self.n1.zip_map(&self.n2, |a, b| {
            let e1 = (dot4(a, a).sqrt() - 1.0).abs();
            let e2 = (dot4(b, b).sqrt() - 1.0).abs();
            e1.max(e2).max(dot4(a, b).abs())
        });
        r.sup_norm()
    }

    /// Max over nodes of `|N_sigma . X_u^i| / |X_u^i|`.
    pub fn tangency_residual(&self, s: &ImmersionSample) -> f64 {
        let rel = |n: &Vec4Field, t: &Vec4Field| {
            n.zip_map(t, |a, b| dot4(a, b).abs() / dot4(b, b).sqrt()).sup_norm()
        };
        rel(&self.n1, &s.xu)
            .max(rel(&self.n1, &s.xv))
            .max(rel(&self.n2, &s.xu))
            .max(rel(&self.n2, &s.xv))
    }
}

fn axpy(a: f64, x: &[f64; 4], y: &[f64; 4]) -> [f64; 4] {
    [0, 1, 2, 3].map(|c| y[c] + a * x[c])
}

fn unit(e: usize) -> [f64; 4] {
    let mut v = [0.0; 4];
    v[e] = 1.0;
    v
}

/// Gram-Schmidt normal pair at one node; candidates are tried in the fixed
/// order `e3, e4, e1, e2`.
pub fn normal_pair(xu: &[f64; 4], xv: &[f64; 4]) -> Option<([f64; 4], [f64; 4])> {
    let t1 = {
        let n = dot4(xu, xu).sqrt();
        xu.map(|c| c / n)
    };
    let t2 = {
        let p = axpy(-dot4(xv, &t1), &t1, xv);
        let n = dot4(&p, &p).sqrt();
        if n < PIVOT_THRESHOLD {
            return None;
        }
        p.map(|c| c / n)
    };
    let mut basis = vec![t1, t2];
    let mut normals = Vec::with_capacity(2);
    for e in [2usize, 3, 0, 1] {
        let mut p = unit(e);
        for b in &basis {
            p = axpy(-dot4(&p, b), b, &p);
        }
        // second pass keeps the projection orthogonal to rounding
        for b in &basis {
            p = axpy(-dot4(&p, b), b, &p);
        }
        let n = dot4(&p, &p).sqrt();
        if n >= PIVOT_THRESHOLD {
            let q = p.map(|c| c / n);
            basis.push(q);
            normals.push(q);
            if normals.len() == 2 {
                return Some((normals[0], normals[1]));
            }
        }
    }
    None
}

pub fn build_normal_frame(s: &ImmersionSample) -> Result<NormalSection> {
    let n = s.xu.values().len();
    let pairs: Vec<_> = s
        .xu
        .values()
        .iter()
        .chain(s.xu.trace().into_iter().flatten())
        .zip(s.xv.values().iter().chain(s.xv.trace().into_iter().flatten()))
        .enumerate()
        .map(|(i, (a, b))| normal_pair(a, b).ok_or(Error::FrameDegeneracy { node: i }))
        .collect::<Result<_>>()?;
    let (mut n1, mut n2): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    let (t1, t2) = if s.xu.has_trace() {
        (Some(n1.split_off(n)), Some(n2.split_off(n)))
    } else {
        (None, None)
    };
    Ok(NormalSection::new(
        Field::from_parts_unchecked(n1, t1),
        Field::from_parts_unchecked(n2, t2),
    ))
}

/// The two independent torsion coefficients and the normal curvature `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorsionField {
    pub t11: ScalarField,
    pub t12: ScalarField,
    pub s: ScalarField,
}

impl TorsionField {
    /// Computes `S` from the coefficients on the grid.
    pub fn new(grid: &DiscGrid, t11: ScalarField, t12: ScalarField) -> Result<Self> {
        let s = normal_curvature(&t11, &t12, grid)?;
        Ok(Self { t11, t12, s })
    }

    pub fn with_curvature(t11: ScalarField, t12: ScalarField, s: ScalarField) -> Self {
        Self { t11, t12, s }
    }

    pub fn zero(grid: &DiscGrid) -> Self {
        let z = ScalarField::from_fn(grid, |_, _| 0.0);
        Self {
            t11: z.clone(),
            t12: z.clone(),
            s: z,
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.t11.sup_norm() + self.t12.sup_norm()
    }
}

pub fn torsion_coefficients(n: &NormalSection, grid: &DiscGrid) -> Result<TorsionField> {
    let (n1_u, n1_v) = match &n.derivatives {
        Some(d) => (d.n1_u.clone(), d.n1_v.clone()),
        None => vec4_gradient(grid, &n.n1)?,
    };
    let t11 = n1_u.zip_map(&n.n2, dot4);
    let t12 = n1_v.zip_map(&n.n2, dot4);
    TorsionField::new(grid, t11, t12)
}

/// `S = (t11)_v - (t12)_u`.
pub fn normal_curvature(t11: &ScalarField, t12: &ScalarField, grid: &DiscGrid) -> Result<ScalarField> {
    let a = grid.differentiate(t11, Direction::V)?;
    let b = grid.differentiate(t12, Direction::U)?;
    Ok(a.zip_map(&b, |x, y| x - y))
}

/// `2 * integral of (t11^2 + t12^2)` over the disc.
pub fn total_torsion(t: &TorsionField, grid: &DiscGrid) -> Result<f64> {
    let density = t.t11.zip_map(&t.t12, |a, b| a * a + b * b);
    Ok(2.0 * grid.integrate_area_values(density.values())?)
}

/// The same functional in metric form, `sum g^ij T_i T_j sqrt(det g)` over
/// both antisymmetric index pairs, for checking the conformal reduction.
pub fn total_torsion_metric_form(
    t: &TorsionField,
    s: &ImmersionSample,
    grid: &DiscGrid,
) -> Result<f64> {
    let (h11, h12, h22) = s.inverse_metric();
    let det = s
        .g11
        .zip_map(&s.g22, |a, b| a * b)
        .zip_map(&s.g12, |ab, c| ab - c * c);
    let n = grid.num_interior();
    let density: Vec<f64> = (0..n)
        .map(|i| {
            let (a, b) = (t.t11.values()[i], t.t12.values()[i]);
            let q = h11.values()[i] * a * a
                + 2.0 * h12.values()[i] * a * b
                + h22.values()[i] * b * b;
            2.0 * q * det.values()[i].sqrt()
        })
        .collect();
    grid.integrate_area_values(&density)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    struct Plane;
    impl Immersion for Plane {
        fn position(&self, u: f64, v: f64) -> [f64; 4] {
            [u, v, 0.0, 0.0]
        }
        fn tangents(&self, _: f64, _: f64) -> Option<([f64; 4], [f64; 4])> {
            Some(([1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]))
        }
    }

    /// `(u, v, u^2, 0)`: not conformal.
    struct Parabolic;
    impl Immersion for Parabolic {
        fn position(&self, u: f64, v: f64) -> [f64; 4] {
            [u, v, u * u, 0.0]
        }
        fn tangents(&self, u: f64, _: f64) -> Option<([f64; 4], [f64; 4])> {
            Some(([1.0, 0.0, 2.0 * u, 0.0], [0.0, 1.0, 0.0, 0.0]))
        }
    }

    struct Broken;
    impl Immersion for Broken {
        fn position(&self, u: f64, _: f64) -> [f64; 4] {
            [u, 0.0, f64::NAN, 0.0]
        }
    }

    #[test]
    fn plane_metric_and_frame() {
        let g = DiscGrid::new(4, 8).unwrap();
        let s = sample_immersion(&Plane, &g).unwrap();
        assert!(s.w.values().iter().all(|&w| w == 1.0));
        assert!(s.g12.sup_norm() == 0.0);
        let rep = check_conformality(&s, DEFAULT_CONFORMALITY_TOL);
        assert!(rep.passed);
        assert_eq!(rep.max_diag_residual, 0.0);
        let n = build_normal_frame(&s).unwrap();
        assert!(n.n1.values().iter().all(|v| *v == [0.0, 0.0, 1.0, 0.0]));
        assert!(n.n2.trace().unwrap().iter().all(|v| *v == [0.0, 0.0, 0.0, 1.0]));
        let t = torsion_coefficients(&n, &g).unwrap();
        assert_eq!(t.sup_norm(), 0.0);
        assert_eq!(t.s.sup_norm(), 0.0);
        assert_eq!(total_torsion(&t, &g).unwrap(), 0.0);
    }

    #[test]
    fn numerical_tangents_of_plane() {
        struct PositionOnly;
        impl Immersion for PositionOnly {
            fn position(&self, u: f64, v: f64) -> [f64; 4] {
                [u, v, 0.0, 0.0]
            }
        }
        let g = DiscGrid::new(4, 8).unwrap();
        let s = sample_immersion(&PositionOnly, &g).unwrap();
        assert!(check_conformality(&s, 1e-10).passed);
    }

    #[test]
    fn non_conformal_graph_fails() {
        let g = DiscGrid::new(8, 16).unwrap();
        let s = sample_immersion(&Parabolic, &g).unwrap();
        let rep = check_conformality(&s, DEFAULT_CONFORMALITY_TOL);
        assert!(!rep.passed);
        // g11 - g22 = 4u^2 with W = 1 + 2u^2; largest on the boundary at u = +-1
        assert_abs_diff_eq!(rep.max_diag_residual, 4.0 / 3.0, epsilon = 1e-12);
        assert!(matches!(rep.into_result(), Err(Error::NotConformal { .. })));
    }

    #[test]
    fn evaluation_failure_is_reported() {
        let g = DiscGrid::new(4, 8).unwrap();
        assert!(matches!(
            sample_immersion(&Broken, &g),
            Err(Error::ImmersionEvaluation { .. })
        ));
    }

    #[test]
    fn degenerate_tangents_are_rejected() {
        assert!(normal_pair(&[1.0, 0.0, 0.0, 0.0], &[2.0, 0.0, 0.0, 0.0]).is_none());
    }

    #[test]
    fn pivot_falls_back_to_e1_e2() {
        // tangent plane spanned by e3, e4: the first two candidates vanish
        let (a, b) = normal_pair(&[0.0, 0.0, 1.0, 0.0], &[0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(a, [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(b, [0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn metric_form_matches_simplified_form_for_conformal_data() {
        let g = DiscGrid::new(8, 16).unwrap();
        let s = sample_immersion(&Plane, &g).unwrap();
        let t = TorsionField::new(
            &g,
            ScalarField::from_fn(&g, |u, v| u - 2.0 * v),
            ScalarField::from_fn(&g, |u, v| u * v),
        )
        .unwrap();
        let a = total_torsion(&t, &g).unwrap();
        let b = total_torsion_metric_form(&t, &s, &g).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-13 * a);
    }
}
