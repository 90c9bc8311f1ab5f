//! Complex torsion `psi = t11 - i t12`, the Cauchy-Riemann and
//! Riemann-Hilbert residuals, and the area integral operators
//!
//! ```text
//! T[f](z) = -(1/pi) int_B f(zeta) / (zeta - z) dA
//! P[f](w) = T[f](w) - (1/w) conj(T[zeta f](1/conj(w)))
//! ```
//!
//! `T` is evaluated by subtracting `f(z) * T[1](z)` and integrating the
//! remainder ring by ring: the trigonometric interpolant of each ring is
//! integrated against the Cauchy kernel exactly by a Laurent expansion.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::disc_grid::{ComplexField, DiscGrid, Field, ScalarField};
use crate::error::{Error, Result};
use crate::geometry::TorsionField;

/// Imaginary parts of a curvature field above this are rejected.
pub const REAL_CURVATURE_TOL: f64 = 1e-12;

/// Rings closer than this to `|z|` are treated as passing through `z`.
const RING_COINCIDENCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexTorsion {
    pub psi: ComplexField,
}

pub fn complex_torsion(t: &TorsionField) -> ComplexTorsion {
    ComplexTorsion {
        psi: t.t11.zip_map(&t.t12, |&a, &b| Complex64::new(a, -b)),
    }
}

/// `(1/2)(f_u + i f_v)`.
pub fn dbar(f: &ComplexField, grid: &DiscGrid) -> Result<ComplexField> {
    let (fu, fv) = grid.gradient(f)?;
    Ok(fu.zip_map(&fv, |a, b| 0.5 * (a + Complex64::i() * b)))
}

/// `psi_wbar - (i/2) S` on the interior nodes.
pub fn cr_residual(psi: &ComplexTorsion, s: &ScalarField, grid: &DiscGrid) -> Result<ComplexField> {
    let d = dbar(&psi.psi, grid)?;
    Ok(d.zip_map(s, |a, &b| a - 0.5 * Complex64::i() * b).without_trace())
}

/// `Re(w psi(w))` at the boundary nodes; equals `(t11, t12) . nu`.
pub fn rh_boundary_residual(psi: &ComplexTorsion, grid: &DiscGrid) -> Result<Vec<f64>> {
    let trace = psi.psi.trace_or_err()?;
    Ok(trace
        .iter()
        .enumerate()
        .map(|(k, z)| {
            let (c, s) = grid.cos_sin(k);
            (Complex64::new(c, s) * z).re
        })
        .collect())
}

/// Normalized ring spectra of a field, one vector of FFT bins per ring, and
/// their radial derivatives.
struct Spectra {
    rings: Vec<Vec<Complex64>>,
    radial: Vec<Vec<Complex64>>,
}

impl Spectra {
    fn new(grid: &DiscGrid, f: &ComplexField) -> Self {
        let rings: Vec<Vec<Complex64>> = f
            .values()
            .par_chunks(grid.n_theta())
            .map(|ring| grid.ring_spectrum(ring))
            .collect();
        let (n, h) = (rings.len(), grid.dr());
        let radial = (0..n)
            .map(|j| {
                (0..rings[j].len())
                    .map(|m| {
                        if j == 0 {
                            // ghost ring at -h/2 is ring 0 turned by pi
                            let sign = if grid.mode_number(m) % 2 == 0 { 1.0 } else { -1.0 };
                            (rings[1][m] - sign * rings[0][m]) / (2.0 * h)
                        } else if j + 1 == n {
                            (3.0 * rings[j][m] - 4.0 * rings[j - 1][m] + rings[j - 2][m]) / (2.0 * h)
                        } else {
                            (rings[j + 1][m] - rings[j - 1][m]) / (2.0 * h)
                        }
                    })
                    .collect()
            })
            .collect();
        Self { rings, radial }
    }
}

/// Fourier coefficient `c_m` of the ring interpolant with mean shifted by
/// `-anchor`; the Nyquist bin is split evenly between `m = +-n/2`.
fn mode_coeff(c: &[Complex64], anchor: Complex64, m: i64) -> Complex64 {
    let n = c.len();
    let half = n / 2;
    if m == 0 {
        c[0] - anchor
    } else if m.unsigned_abs() as usize == half {
        0.5 * c[half]
    } else if m > 0 {
        c[m as usize]
    } else {
        c[(n as i64 + m) as usize]
    }
}

/// `int_0^{2 pi} F(theta) / (r e^{i theta} - z) d theta` for the trigonometric
/// interpolant `F` with FFT bins `c` and the mean shifted by `-anchor`.
fn ring_integral(c: &[Complex64], anchor: Complex64, r: f64, z: Complex64) -> Complex64 {
    let half = (c.len() / 2) as i64;
    // r < |z|: -(2 pi / z) sum_{m >= 0} c_{-m} (r/z)^m
    let inside = || {
        let q = r / z;
        let mut acc = Complex64::new(0.0, 0.0);
        for m in (0..=half).rev() {
            acc = acc * q + mode_coeff(c, anchor, -m);
        }
        -2.0 * PI * acc / z
    };
    // r > |z|: (2 pi / r) sum_{m >= 1} c_m (z/r)^(m-1)
    let outside = || {
        let p = z / r;
        let mut acc = Complex64::new(0.0, 0.0);
        for m in (1..=half).rev() {
            acc = acc * p + mode_coeff(c, anchor, m);
        }
        2.0 * PI * acc / r
    };
    let d = r - z.norm();
    if d.abs() < RING_COINCIDENCE {
        0.5 * (inside() + outside())
    } else if d < 0.0 {
        inside()
    } else {
        outside()
    }
}

/// Jump across `r = |z|` of the radial derivative of the ring integral,
/// `(2 pi / z) (F_r + (i/rho) F_theta)` at the target, from the spectrum `c`
/// and radial derivative spectrum `dc` of the ring nearest to `|z|`.
fn ring_integral_kink(c: &[Complex64], dc: &[Complex64], z: Complex64) -> Complex64 {
    let half = (c.len() / 2) as i64;
    let rho = z.norm();
    let e = z / rho;
    let zero = Complex64::new(0.0, 0.0);
    let (mut radial, mut angular) = (zero, zero);
    for m in -half..=half {
        let phase = e.powi(m as i32);
        radial += mode_coeff(dc, zero, m) * phase;
        angular += m as f64 * mode_coeff(c, zero, m) * phase;
    }
    2.0 * PI / z * (radial - angular / rho)
}

/// `T[1](z)`: `conj(z)` on the closed disc, `1/z` outside.
pub fn tb_of_one(z: Complex64) -> Complex64 {
    if z.norm() <= 1.0 {
        z.conj()
    } else {
        1.0 / z
    }
}

/// `T[f](z)` given the value `anchor` that is subtracted at `z`.
fn tb_anchored(grid: &DiscGrid, spectra: &Spectra, z: Complex64, anchor: Complex64) -> Complex64 {
    let h = grid.dr();
    let sum: Complex64 = spectra
        .rings
        .iter()
        .zip(grid.radii())
        .map(|(c, &r)| ring_integral(c, anchor, r, z) * (r * h))
        .sum();
    anchor * tb_of_one(z) - (sum + kink_correction(grid, spectra, z, anchor)) / PI
}

/// The radial integrand `r G(r)` has a derivative jump `J` at `r = |z|`. The
/// midpoint rule on the cell containing the kink at offset `a` from its
/// centre misses `J (h/2 - |a|)^2 / 2`.
fn kink_correction(grid: &DiscGrid, spectra: &Spectra, z: Complex64, anchor: Complex64) -> Complex64 {
    let _ = anchor;
    let rho = z.norm();
    if rho >= 1.0 || rho == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let h = grid.dr();
    let j = ((rho / h) as usize).min(grid.n_r() - 1);
    let a = rho - grid.radius(j);
    let jump = rho * ring_integral_kink(&spectra.rings[j], &spectra.radial[j], z);
    jump * (0.5 * (0.5 * h - a.abs()).powi(2))
}

/// `T[f]` at arbitrary points. The subtracted value is `f` interpolated at
/// `z` inside the disc and at `z/|z|` outside.
pub fn tb_operator(f: &ComplexField, targets: &[Complex64], grid: &DiscGrid) -> Result<Vec<Complex64>> {
    let f = grid.with_trace(&Field::new(grid, f.values().to_vec(), f.trace().map(<[_]>::to_vec))?);
    let spectra = Spectra::new(grid, &f);
    Ok(targets
        .par_iter()
        .map(|&z| {
            let a = z.norm();
            let p = if a > 1.0 { z / a } else { z };
            let anchor = grid.interpolate(&f, p.re, p.im);
            tb_anchored(grid, &spectra, z, anchor)
        })
        .collect())
}

fn positions(grid: &DiscGrid) -> Field<Complex64> {
    Field::from_fn(grid, Complex64::new)
}

/// `P[f]` at every interior and boundary node.
pub fn pb_operator(f: &ComplexField, grid: &DiscGrid) -> Result<ComplexField> {
    let f = grid.with_trace(&Field::new(grid, f.values().to_vec(), f.trace().map(<[_]>::to_vec))?);
    let zf = f.zip_map(&positions(grid), |a, b| a * b);
    let sf = Spectra::new(grid, &f);
    let szf = Spectra::new(grid, &zf);
    let nt = grid.n_theta();
    let zf_trace = zf.trace_or_err()?;
    let eval = |w: Complex64, fw: Complex64, k: usize| {
        let reflected = w / w.norm_sqr();
        let direct = tb_anchored(grid, &sf, w, fw);
        let mirror = tb_anchored(grid, &szf, reflected, zf_trace[k]);
        direct - mirror.conj() / w
    };
    let values = (0..grid.num_interior())
        .into_par_iter()
        .map(|i| {
            let (u, v) = grid.node(i);
            eval(Complex64::new(u, v), f.values()[i], i % nt)
        })
        .collect();
    let f_trace = f.trace_or_err()?;
    let trace = (0..nt)
        .into_par_iter()
        .map(|k| {
            let (u, v) = grid.boundary_node(k);
            eval(Complex64::new(u, v), f_trace[k], k)
        })
        .collect();
    Field::new(grid, values, Some(trace))
}

/// `psi = P[(i/2) S]`.
pub fn rh_solve(s: &ScalarField, grid: &DiscGrid) -> Result<ComplexTorsion> {
    let f = s.map(|&x| Complex64::new(0.0, 0.5 * x));
    Ok(ComplexTorsion {
        psi: pb_operator(&f, grid)?,
    })
}

/// [`rh_solve`] for curvature data carried as complex values; rejects data
/// whose imaginary part exceeds [`REAL_CURVATURE_TOL`].
pub fn rh_solve_complex(s: &ComplexField, grid: &DiscGrid) -> Result<ComplexTorsion> {
    let max_imag = s.im().sup_norm();
    if max_imag > REAL_CURVATURE_TOL {
        return Err(Error::NonRealCurvature { max_imag });
    }
    rh_solve(&s.re(), grid)
}

/// Max over boundary nodes of
/// `|w P[f](w) - ((1/pi) int f + T[zeta f](w) - conj(T[zeta f](1/conj(w))))|`
/// with every operator value evaluated independently.
pub fn elementary_identity_check(f: &ComplexField, grid: &DiscGrid) -> Result<f64> {
    let p = pb_operator(f, grid)?;
    let f = grid.with_trace(f);
    let zf = f.zip_map(&positions(grid), |a, b| a * b);
    let ws: Vec<Complex64> = grid
        .boundary_nodes()
        .into_iter()
        .map(|(u, v)| Complex64::new(u, v))
        .collect();
    let reflected: Vec<Complex64> = ws.iter().map(|w| 1.0 / w.conj()).collect();
    let t_w = tb_operator(&zf, &ws, grid)?;
    let t_r = tb_operator(&zf, &reflected, grid)?;
    let mean = grid.integrate_area(&f)? / PI;
    let trace = p.trace_or_err()?;
    Ok((0..ws.len())
        .map(|k| (ws[k] * trace[k] - (mean + t_w[k] - t_r[k].conj())).norm())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub p: f64,
    /// Max over nodes of `|psi|`.
    pub sup_psi: f64,
    /// `L_p` norm of `S` over the disc (max over nodes for `p = inf`).
    pub s_p: f64,
    /// `sup_psi / s_p`; zero when both vanish, infinite when only `s_p` does.
    pub ratio: f64,
}

pub fn lp_norm(s: &ScalarField, p: f64, grid: &DiscGrid) -> Result<f64> {
    if p.is_infinite() {
        return Ok(s.sup_norm());
    }
    let pow = s.map(|x| x.abs().powf(p)).without_trace();
    Ok(grid.integrate_area(&pow)?.powf(1.0 / p))
}

pub fn sup_bound_report(psi: &ComplexTorsion, s: &ScalarField, p: f64, grid: &DiscGrid) -> Result<BoundReport> {
    if !(p > 2.0) {
        return Err(Error::InvalidExponent(p));
    }
    let sup_psi = psi.psi.sup_norm();
    let s_p = lp_norm(s, p, grid)?;
    let ratio = if s_p > 0.0 {
        sup_psi / s_p
    } else if sup_psi == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(BoundReport {
        p,
        sup_psi,
        s_p,
        ratio,
    })
}
