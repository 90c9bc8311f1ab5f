//! Holomorphic graphs `X(w) = (w, Phi(w))` with polynomial `Phi`.
//!
//! Writing `Phi = phi + i psi`, the Cauchy-Riemann equations give
//! `phi_u = Re Phi'`, `phi_v = -Im Phi'`, `psi_u = Im Phi'`, `psi_v = Re Phi'`,
//! so every such graph is conformal with area element `W = 1 + |Phi'|^2`.
//! With `A = Phi'' * conj(Phi')` the section
//! `N1 = (-phi_u, -phi_v, 1, 0)/sqrt(W)`, `N2 = (-psi_u, -psi_v, 0, 1)/sqrt(W)`
//! has torsions `t11 = -Im A / W`, `t12 = -Re A / W`, i.e. complex torsion
//! `i A / W`, and normal curvature `S = 2 |Phi''|^2 / W^2`.

use num_complex::Complex64;

use crate::disc_grid::{DiscGrid, ScalarField, Vec4Field};
use crate::geometry::{Immersion, NormalSection, SectionDerivatives, TorsionField};

#[derive(Debug, Clone, PartialEq)]
pub struct HolomorphicGraph {
    coefficients: Vec<Complex64>,
}

impl HolomorphicGraph {
    /// `Phi(w) = sum_k a_k w^k`.
    pub fn new(coefficients: Vec<Complex64>) -> Self {
        Self { coefficients }
    }

    pub fn plane() -> Self {
        Self::new(Vec::new())
    }

    /// `Phi(w) = c w^n`.
    pub fn monomial(n: usize, c: Complex64) -> Self {
        let mut a = vec![Complex64::new(0.0, 0.0); n + 1];
        a[n] = c;
        Self::new(a)
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    fn horner(coeffs: &[Complex64], w: Complex64) -> Complex64 {
        coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &a| acc * w + a)
    }

    fn derivative_coeffs(coeffs: &[Complex64]) -> Vec<Complex64> {
        coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &a)| a * k as f64)
            .collect()
    }

    pub fn phi(&self, w: Complex64) -> Complex64 {
        Self::horner(&self.coefficients, w)
    }

    pub fn dphi(&self, w: Complex64) -> Complex64 {
        Self::horner(&Self::derivative_coeffs(&self.coefficients), w)
    }

    pub fn d2phi(&self, w: Complex64) -> Complex64 {
        let d1 = Self::derivative_coeffs(&self.coefficients);
        Self::horner(&Self::derivative_coeffs(&d1), w)
    }

    pub fn area_element(&self, u: f64, v: f64) -> f64 {
        1.0 + self.dphi(Complex64::new(u, v)).norm_sqr()
    }

    /// Normals and their `u`, `v` derivatives at one point:
    /// `[N1, N2, N1_u, N1_v, N2_u, N2_v]`.
    fn frame_jet(&self, u: f64, v: f64) -> [[f64; 4]; 6] {
        let w = Complex64::new(u, v);
        let d1 = self.dphi(w);
        let d2 = self.d2phi(w);
        let (pu, pv) = (d1.re, -d1.im);
        let (qu, qv) = (d1.im, d1.re);
        // second derivatives of phi and psi
        let (puu, puv, pvv) = (d2.re, -d2.im, -d2.re);
        let (quu, quv, qvv) = (d2.im, d2.re, -d2.im);
        let big_w = 1.0 + d1.norm_sqr();
        let a = d2 * d1.conj();
        let (wu, wv) = (2.0 * a.re, -2.0 * a.im);
        let s = big_w.powf(-0.5);
        let (su, sv) = (-0.5 * wu * s / big_w, -0.5 * wv * s / big_w);
        let n1 = [-pu * s, -pv * s, s, 0.0];
        let n2 = [-qu * s, -qv * s, 0.0, s];
        let n1_u = [-puu * s - pu * su, -puv * s - pv * su, su, 0.0];
        let n1_v = [-puv * s - pu * sv, -pvv * s - pv * sv, sv, 0.0];
        let n2_u = [-quu * s - qu * su, -quv * s - qv * su, 0.0, su];
        let n2_v = [-quv * s - qu * sv, -qvv * s - qv * sv, 0.0, sv];
        [n1, n2, n1_u, n1_v, n2_u, n2_v]
    }

    /// `(t11, t12, S)` in closed form at one point.
    pub fn torsion_at(&self, u: f64, v: f64) -> (f64, f64, f64) {
        let w = Complex64::new(u, v);
        let d1 = self.dphi(w);
        let d2 = self.d2phi(w);
        let big_w = 1.0 + d1.norm_sqr();
        let a = d2 * d1.conj();
        (-a.im / big_w, -a.re / big_w, 2.0 * d2.norm_sqr() / (big_w * big_w))
    }
}

impl Immersion for HolomorphicGraph {
    fn position(&self, u: f64, v: f64) -> [f64; 4] {
        let p = self.phi(Complex64::new(u, v));
        [u, v, p.re, p.im]
    }

    fn tangents(&self, u: f64, v: f64) -> Option<([f64; 4], [f64; 4])> {
        let d = self.dphi(Complex64::new(u, v));
        Some(([1.0, 0.0, d.re, d.im], [0.0, 1.0, -d.im, d.re]))
    }
}

/// The analytic section `(N1, N2)` of the graph, with analytic derivatives.
pub fn graph_section(spec: &HolomorphicGraph, grid: &DiscGrid) -> NormalSection {
    let jet = crate::disc_grid::Field::from_fn(grid, |u, v| spec.frame_jet(u, v));
    let part = |i: usize| -> Vec4Field { jet.map(|j| j[i]) };
    NormalSection::new(part(0), part(1)).with_derivatives(SectionDerivatives {
        n1_u: part(2),
        n1_v: part(3),
        n2_u: part(4),
        n2_v: part(5),
    })
}

pub fn graph_torsion_closed_form(spec: &HolomorphicGraph, grid: &DiscGrid) -> TorsionField {
    let t = crate::disc_grid::Field::from_fn(grid, |u, v| spec.torsion_at(u, v));
    TorsionField::with_curvature(t.map(|x| x.0), t.map(|x| x.1), t.map(|x| x.2))
}

/// `(t11, t12) . nu = (1/2W) d/dalpha |Phi'|^2` at the boundary nodes.
pub fn boundary_flux_closed_form(spec: &HolomorphicGraph, grid: &DiscGrid) -> Vec<f64> {
    (0..grid.n_theta())
        .map(|k| {
            let (c, s) = grid.cos_sin(k);
            let w = Complex64::new(c, s);
            let d1 = spec.dphi(w);
            // d/dalpha Phi'(e^{i alpha}) = i w Phi''(w)
            let dd = Complex64::i() * w * spec.d2phi(w);
            let dmod = 2.0 * (dd * d1.conj()).re;
            dmod / (2.0 * (1.0 + d1.norm_sqr()))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphCriticality {
    pub critical: bool,
    /// `max over the circle of ||Phi'|^2 - mean|`.
    pub max_deviation: f64,
}

/// The section of a holomorphic graph is critical iff `|Phi'|` is constant on
/// the boundary circle; checked on `samples` equispaced points.
pub fn is_critical_graph(spec: &HolomorphicGraph, tol: f64, samples: usize) -> GraphCriticality {
    let vals: Vec<f64> = (0..samples)
        .map(|k| {
            let a = 2.0 * std::f64::consts::PI * k as f64 / samples as f64;
            spec.dphi(Complex64::from_polar(1.0, a)).norm_sqr()
        })
        .collect();
    let mean = vals.iter().sum::<f64>() / samples as f64;
    let dev = vals.iter().fold(0.0_f64, |m, x| m.max((x - mean).abs()));
    GraphCriticality {
        critical: dev <= tol,
        max_deviation: dev,
    }
}

/// Harmonic height functions `(phi, psi)` sampled on the grid.
pub fn height_functions(spec: &HolomorphicGraph, grid: &DiscGrid) -> (ScalarField, ScalarField) {
    let p = crate::disc_grid::Field::from_fn(grid, |u, v| spec.phi(Complex64::new(u, v)));
    (p.re(), p.im())
}
