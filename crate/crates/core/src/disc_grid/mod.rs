//! Polar tensor grid on the closed unit disc.
//!
//! Interior nodes sit at the ring midpoints `r_j = (j + 1/2)/n_r`
//! (`j = 0..n_r`, zero-based) and the equispaced angles
//! `theta_k = 2 pi k / n_theta`; the node index is `j * n_theta + k`. The
//! boundary circle `r = 1` carries a separate set of nodes at the same
//! angles. The grid never touches `r = 0`.
//!
//! Angular derivatives are spectral per ring. Radial derivatives use
//! three-point stencils; the innermost ring borrows the antipodal value
//! across the centre (`f(-r, theta) = f(r, theta + pi)`), and the outermost
//! ring uses the boundary trace when the field has one.

mod field;
mod stencil;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

pub use field::{dot4, ComplexField, Field, GridScalar, ScalarField, Vec4Field};
pub(crate) use stencil::fornberg_weights;

use crate::error::{Error, Result};

/// Cartesian derivative direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    U,
    V,
}

/// Where a radial stencil point takes its value from.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Source {
    /// Ring `ring`, optionally at the antipodal angle (reflection through the centre).
    Ring { ring: usize, antipodal: bool },
    Trace,
}

type Stencil = Vec<(Source, f64)>;

#[derive(Clone)]
pub struct DiscGrid {
    n_r: usize,
    n_theta: usize,
    dr: f64,
    dtheta: f64,
    radii: Vec<f64>,
    cos: Vec<f64>,
    sin: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for DiscGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiscGrid")
            .field("n_r", &self.n_r)
            .field("n_theta", &self.n_theta)
            .finish()
    }
}

impl PartialEq for DiscGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n_r == other.n_r && self.n_theta == other.n_theta
    }
}

impl DiscGrid {
    pub fn new(n_r: usize, n_theta: usize) -> Result<Self> {
        if n_r < 2 {
            return Err(Error::InvalidGrid(format!("n_r must be >= 2, got {n_r}")));
        }
        if n_theta < 4 || !n_theta.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "n_theta must be even and >= 4, got {n_theta}"
            )));
        }
        let dr = 1.0 / n_r as f64;
        let dtheta = 2.0 * PI / n_theta as f64;
        let radii = (0..n_r).map(|j| (j as f64 + 0.5) * dr).collect();
        let (sin, cos) = (0..n_theta)
            .map(|k| (k as f64 * dtheta).sin_cos())
            .unzip();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n_theta);
        let ifft = planner.plan_fft_inverse(n_theta);
        Ok(Self {
            n_r,
            n_theta,
            dr,
            dtheta,
            radii,
            cos,
            sin,
            fft,
            ifft,
        })
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    pub fn dtheta(&self) -> f64 {
        self.dtheta
    }

    pub fn num_interior(&self) -> usize {
        self.n_r * self.n_theta
    }

    pub fn index(&self, ring: usize, k: usize) -> usize {
        ring * self.n_theta + k
    }

    pub fn radius(&self, ring: usize) -> f64 {
        self.radii[ring]
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn angle(&self, k: usize) -> f64 {
        k as f64 * self.dtheta
    }

    pub fn cos_sin(&self, k: usize) -> (f64, f64) {
        (self.cos[k], self.sin[k])
    }

    /// `(u, v)` of interior node `i`.
    pub fn node(&self, i: usize) -> (f64, f64) {
        let (j, k) = (i / self.n_theta, i % self.n_theta);
        let r = self.radii[j];
        (r * self.cos[k], r * self.sin[k])
    }

    pub fn boundary_node(&self, k: usize) -> (f64, f64) {
        (self.cos[k], self.sin[k])
    }

    pub fn interior_nodes(&self) -> Vec<(f64, f64)> {
        (0..self.num_interior()).map(|i| self.node(i)).collect()
    }

    pub fn boundary_nodes(&self) -> Vec<(f64, f64)> {
        (0..self.n_theta).map(|k| self.boundary_node(k)).collect()
    }

    pub fn area_weight(&self, i: usize) -> f64 {
        self.radii[i / self.n_theta] * self.dr * self.dtheta
    }

    /// `r_j dr dtheta` per interior node. Each weight is the exact area of the
    /// annular cell `[j dr, (j + 1) dr] x [theta - dtheta/2, theta + dtheta/2]`.
    pub fn area_weights(&self) -> Vec<f64> {
        (0..self.num_interior()).map(|i| self.area_weight(i)).collect()
    }

    pub fn boundary_weights(&self) -> Vec<f64> {
        vec![self.dtheta; self.n_theta]
    }

    /// Outward unit normal at each boundary node.
    pub fn boundary_normal(&self) -> Vec<[f64; 2]> {
        (0..self.n_theta).map(|k| [self.cos[k], self.sin[k]]).collect()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.num_interior() {
            return Err(Error::ShapeMismatch {
                expected: self.num_interior(),
                actual: len,
            });
        }
        Ok(())
    }

    fn check_trace_len(&self, len: usize) -> Result<()> {
        if len != self.n_theta {
            return Err(Error::ShapeMismatch {
                expected: self.n_theta,
                actual: len,
            });
        }
        Ok(())
    }

    pub fn integrate_area<T: GridScalar>(&self, f: &Field<T>) -> Result<T> {
        self.integrate_area_values(f.values())
    }

    pub fn integrate_area_values<T: GridScalar>(&self, values: &[T]) -> Result<T> {
        self.check_len(values.len())?;
        let mut total = T::default();
        for (j, ring) in values.chunks(self.n_theta).enumerate() {
            let ring_sum = ring.iter().fold(T::default(), |acc, &x| acc + x);
            total = total + ring_sum * (self.radii[j] * self.dr * self.dtheta);
        }
        Ok(total)
    }

    pub fn integrate_boundary<T: GridScalar>(&self, trace: &[T]) -> Result<T> {
        self.check_trace_len(trace.len())?;
        Ok(trace.iter().fold(T::default(), |acc, &x| acc + x) * self.dtheta)
    }

    /// `(integral of |f|^2 over B)^(1/2)`.
    pub fn l2_norm_area(&self, f: &ScalarField) -> Result<f64> {
        let sq = f.map(|x| x * x);
        Ok(self.integrate_area(&sq)?.max(0.0).sqrt())
    }

    /// `(integral of |g|^2 over the boundary circle)^(1/2)`.
    pub fn l2_norm_boundary(&self, trace: &[f64]) -> Result<f64> {
        let sq: Vec<f64> = trace.iter().map(|x| x * x).collect();
        Ok(self.integrate_boundary(&sq)?.max(0.0).sqrt())
    }

    /// Linear extrapolation of the two outermost rings to `r = 1`.
    pub fn extrapolated_trace<T: GridScalar>(&self, values: &[T]) -> Vec<T> {
        let n = self.n_theta;
        let outer = &values[(self.n_r - 1) * n..];
        let inner = &values[(self.n_r - 2) * n..(self.n_r - 1) * n];
        outer
            .iter()
            .zip(inner)
            .map(|(&a, &b)| a * 1.5 - b * 0.5)
            .collect()
    }

    /// Returns `f` with a boundary trace, extrapolating one if absent.
    pub fn with_trace<T: GridScalar>(&self, f: &Field<T>) -> Field<T> {
        match f.trace() {
            Some(_) => f.clone(),
            None => Field::from_parts_unchecked(
                f.values().to_vec(),
                Some(self.extrapolated_trace(f.values())),
            ),
        }
    }

    // ---- spectral ring operations -------------------------------------------------

    fn signed_mode(&self, m: usize) -> i64 {
        if m <= self.n_theta / 2 {
            m as i64
        } else {
            m as i64 - self.n_theta as i64
        }
    }

    /// Azimuthal Fourier mode number of FFT bin `m` (Nyquist reported as `n_theta/2`).
    pub(crate) fn mode_number(&self, m: usize) -> i64 {
        self.signed_mode(m)
    }

    /// Normalized DFT of one ring: `f(theta_k) = sum_m c_m exp(i m theta_k)`.
    pub(crate) fn ring_spectrum(&self, ring: &[Complex64]) -> Vec<Complex64> {
        let mut buf = ring.to_vec();
        self.fft.process(&mut buf);
        let scale = 1.0 / self.n_theta as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        buf
    }

    pub(crate) fn ring_synthesis(&self, spectrum: &[Complex64]) -> Vec<Complex64> {
        let mut buf = spectrum.to_vec();
        self.ifft.process(&mut buf);
        buf
    }

    /// `d^order/dtheta^order` of one ring by Fourier differentiation. For odd
    /// orders the Nyquist mode is dropped.
    fn ring_dtheta<T: GridScalar>(&self, ring: &[T], order: u32) -> Vec<T> {
        let data: Vec<Complex64> = ring.iter().map(|x| x.to_c()).collect();
        let mut spec = self.ring_spectrum(&data);
        for (m, c) in spec.iter_mut().enumerate() {
            let k = self.signed_mode(m);
            if order % 2 == 1 && 2 * m == self.n_theta {
                *c = Complex64::new(0.0, 0.0);
                continue;
            }
            *c *= Complex64::new(0.0, k as f64).powu(order);
        }
        self.ring_synthesis(&spec)
            .into_iter()
            .map(T::from_c)
            .collect()
    }

    fn dtheta_all<T: GridScalar>(&self, values: &[T], order: u32) -> Vec<T> {
        values
            .par_chunks(self.n_theta)
            .flat_map_iter(|ring| self.ring_dtheta(ring, order))
            .collect()
    }

    // ---- radial stencils ----------------------------------------------------------

    /// Source and radius of extended ring index `e`; negative indices reflect
    /// through the centre onto ring `-e - 1` at the antipodal angle.
    fn extended(&self, e: isize) -> (Source, f64) {
        let r = (e as f64 + 0.5) * self.dr;
        let src = if e >= 0 {
            Source::Ring {
                ring: e as usize,
                antipodal: false,
            }
        } else {
            Source::Ring {
                ring: (-e - 1) as usize,
                antipodal: true,
            }
        };
        (src, r)
    }

    fn build_stencil(&self, at: f64, points: &[(Source, f64)], deriv: usize) -> Stencil {
        let radii: Vec<f64> = points.iter().map(|p| p.1).collect();
        let w = fornberg_weights(at, &radii, deriv);
        points
            .iter()
            .zip(&w[deriv])
            .map(|(p, &c)| (p.0, c))
            .collect()
    }

    /// Radial stencil for derivative order `deriv` (1 or 2) at ring `j`.
    fn ring_stencil(&self, j: usize, deriv: usize, has_trace: bool, wide: bool) -> Stencil {
        let n = self.n_r as isize;
        let j = j as isize;
        let at = self.radii[j as usize];
        let mut pts: Vec<(Source, f64)> = Vec::new();
        if wide && j + 2 < n {
            pts.extend((j - 2..=j + 2).map(|e| self.extended(e)));
        } else if j < n - 1 {
            pts.extend((j - 1..=j + 1).map(|e| self.extended(e)));
        } else if has_trace {
            let lo = if deriv == 1 { j - 1 } else { j - 2 };
            pts.extend((lo..=j).map(|e| self.extended(e)));
            pts.push((Source::Trace, 1.0));
        } else {
            let lo = if deriv == 1 { j - 2 } else { j - 3 };
            pts.extend((lo..=j).map(|e| self.extended(e)));
        }
        self.build_stencil(at, &pts, deriv)
    }

    /// One-sided radial stencil at `r = 1` using the trace and the outer rings.
    fn trace_stencil(&self, deriv: usize) -> Stencil {
        let n = self.n_r as isize;
        let lo = if deriv == 1 { n - 2 } else { n - 3 };
        let mut pts: Vec<(Source, f64)> = (lo..n).map(|e| self.extended(e)).collect();
        pts.push((Source::Trace, 1.0));
        self.build_stencil(1.0, &pts, deriv)
    }

    fn apply_stencil<T: GridScalar>(
        &self,
        stencil: &Stencil,
        values: &[T],
        trace: Option<&[T]>,
        k: usize,
    ) -> T {
        let n = self.n_theta;
        stencil.iter().fold(T::default(), |acc, &(src, w)| {
            let x = match src {
                Source::Ring { ring, antipodal } => {
                    let kk = if antipodal { (k + n / 2) % n } else { k };
                    values[ring * n + kk]
                }
                Source::Trace => trace.expect("stencil needs a trace")[k],
            };
            acc + x * w
        })
    }

    /// Radial derivative of order `deriv` on the interior nodes and, if the
    /// field has a trace, on the boundary. `wide` uses five-point stencils
    /// away from the rim, for terms later divided by `r`.
    fn radial_derivative<T: GridScalar>(&self, f: &Field<T>, deriv: usize, wide: bool) -> (Vec<T>, Option<Vec<T>>) {
        let n = self.n_theta;
        let trace = f.trace();
        let mut out = vec![T::default(); self.num_interior()];
        out.par_chunks_mut(n).enumerate().for_each(|(j, ring)| {
            let st = self.ring_stencil(j, deriv, trace.is_some(), wide);
            for (k, slot) in ring.iter_mut().enumerate() {
                *slot = self.apply_stencil(&st, f.values(), trace, k);
            }
        });
        let out_trace = trace.map(|_| {
            let st = self.trace_stencil(deriv);
            (0..n)
                .map(|k| self.apply_stencil(&st, f.values(), trace, k))
                .collect()
        });
        (out, out_trace)
    }

    // ---- Cartesian operators ------------------------------------------------------

    /// Both Cartesian derivatives `(f_u, f_v)`.
    pub fn gradient<T: GridScalar>(&self, f: &Field<T>) -> Result<(Field<T>, Field<T>)> {
        self.check_len(f.values().len())?;
        if let Some(t) = f.trace() {
            self.check_trace_len(t.len())?;
        }
        let n = self.n_theta;
        let (fr, fr_trace) = self.radial_derivative(f, 1, false);
        let ft = self.dtheta_all(f.values(), 1);
        let mut fu = Vec::with_capacity(fr.len());
        let mut fv = Vec::with_capacity(fr.len());
        for (i, (&a, &b)) in fr.iter().zip(&ft).enumerate() {
            let (j, k) = (i / n, i % n);
            let (c, s, r) = (self.cos[k], self.sin[k], self.radii[j]);
            fu.push(a * c - b * (s / r));
            fv.push(a * s + b * (c / r));
        }
        let (tu, tv) = match (f.trace(), fr_trace) {
            (Some(t), Some(tr)) => {
                let tt = self.ring_dtheta(t, 1);
                let (mut tu, mut tv) = (Vec::with_capacity(n), Vec::with_capacity(n));
                for k in 0..n {
                    let (c, s) = (self.cos[k], self.sin[k]);
                    tu.push(tr[k] * c - tt[k] * s);
                    tv.push(tr[k] * s + tt[k] * c);
                }
                (Some(tu), Some(tv))
            }
            _ => (None, None),
        };
        Ok((
            Field::from_parts_unchecked(fu, tu),
            Field::from_parts_unchecked(fv, tv),
        ))
    }

    pub fn differentiate<T: GridScalar>(&self, f: &Field<T>, dir: Direction) -> Result<Field<T>> {
        let (fu, fv) = self.gradient(f)?;
        Ok(match dir {
            Direction::U => fu,
            Direction::V => fv,
        })
    }

    /// `f_rr + f_r / r + f_thetatheta / r^2` with direct second-derivative
    /// stencils (four points next to the boundary, so the result stays
    /// second-order up to the outermost ring).
    pub fn laplacian<T: GridScalar>(&self, f: &Field<T>) -> Result<Field<T>> {
        self.check_len(f.values().len())?;
        let n = self.n_theta;
        let (f1, t1) = self.radial_derivative(f, 1, true);
        let (f2, t2) = self.radial_derivative(f, 2, false);
        let ftt = self.dtheta_all(f.values(), 2);
        let values = (0..self.num_interior())
            .map(|i| {
                let r = self.radii[i / n];
                f2[i] + f1[i] * (1.0 / r) + ftt[i] * (1.0 / (r * r))
            })
            .collect();
        let trace = match (f.trace(), t1, t2) {
            (Some(t), Some(a), Some(b)) => {
                let tt = self.ring_dtheta(t, 2);
                Some((0..n).map(|k| b[k] + a[k] + tt[k]).collect())
            }
            _ => None,
        };
        Ok(Field::from_parts_unchecked(values, trace))
    }

    /// Conservative (flux-form) divergence of `(p, q)` on the interior nodes.
    ///
    /// Radial fluxes live on the cell faces `r = j dr`: averages of the
    /// adjacent rings inside, zero at the centre and the trace at `r = 1`.
    /// Weighted by the area weights, the sum telescopes, so
    /// `integrate_area(div) == integrate_boundary((p, q) . nu)` holds to
    /// rounding for every grid.
    pub fn divergence(&self, p: &ScalarField, q: &ScalarField) -> Result<ScalarField> {
        self.check_len(p.values().len())?;
        self.check_len(q.values().len())?;
        let n = self.n_theta;
        let p = self.with_trace(p);
        let q = self.with_trace(q);
        let radial = |vals: &[f64], vq: &[f64], i: usize, k: usize| vals[i] * self.cos[k] + vq[i] * self.sin[k];
        let pr: Vec<f64> = (0..self.num_interior())
            .map(|i| radial(p.values(), q.values(), i, i % n))
            .collect();
        let pt: Vec<f64> = (0..self.num_interior())
            .map(|i| {
                let k = i % n;
                -p.values()[i] * self.sin[k] + q.values()[i] * self.cos[k]
            })
            .collect();
        let pr_trace: Vec<f64> = (0..n)
            .map(|k| radial(p.trace().unwrap(), q.trace().unwrap(), k, k))
            .collect();
        let dpt = self.dtheta_all(&pt, 1);
        let h = self.dr;
        let mut out = vec![0.0; self.num_interior()];
        for j in 0..self.n_r {
            let r = self.radii[j];
            for k in 0..n {
                let i = j * n + k;
                let outer = if j + 1 < self.n_r {
                    (j + 1) as f64 * h * 0.5 * (pr[i] + pr[i + n])
                } else {
                    pr_trace[k]
                };
                let inner = if j > 0 {
                    j as f64 * h * 0.5 * (pr[i] + pr[i - n])
                } else {
                    0.0
                };
                out[i] = (outer - inner) / (r * h) + dpt[i] / r;
            }
        }
        Ok(Field::from_parts_unchecked(out, None))
    }

    /// Normal component `(p, q) . nu` on the boundary.
    pub fn normal_flux(&self, p: &ScalarField, q: &ScalarField) -> Result<Vec<f64>> {
        let p = self.with_trace(p);
        let q = self.with_trace(q);
        let (pt, qt) = (p.trace().unwrap(), q.trace().unwrap());
        Ok((0..self.n_theta)
            .map(|k| pt[k] * self.cos[k] + qt[k] * self.sin[k])
            .collect())
    }

    /// Bilinear interpolation in `(r, theta)` at a point of the closed disc.
    /// Between the innermost ring and the centre the stencil runs along the
    /// diameter to the antipodal ring value.
    pub fn interpolate<T: GridScalar>(&self, f: &Field<T>, u: f64, v: f64) -> T {
        let n = self.n_theta;
        let r = u.hypot(v).min(1.0);
        let theta = v.atan2(u).rem_euclid(2.0 * PI);
        let s = theta / self.dtheta;
        let k0 = (s.floor() as usize) % n;
        let k1 = (k0 + 1) % n;
        let t = s - s.floor();
        let ring_at = |vals: &[T], k_shift: usize| {
            let a = vals[(k0 + k_shift) % n];
            let b = vals[(k1 + k_shift) % n];
            a * (1.0 - t) + b * t
        };
        let ring = |j: usize, shift: usize| ring_at(&f.values()[j * n..(j + 1) * n], shift);
        let r0 = self.radii[0];
        let r_last = self.radii[self.n_r - 1];
        if r <= r0 {
            let inner = ring(0, n / 2);
            let outer = ring(0, 0);
            let a = (r + r0) / (2.0 * r0);
            inner * (1.0 - a) + outer * a
        } else if r >= r_last {
            let edge = match f.trace() {
                Some(tr) => ring_at(tr, 0),
                None => ring_at(&self.extrapolated_trace(f.values()), 0),
            };
            let a = (r - r_last) / (1.0 - r_last);
            ring(self.n_r - 1, 0) * (1.0 - a) + edge * a
        } else {
            let jf = r / self.dr - 0.5;
            let j = (jf.floor() as usize).min(self.n_r - 2);
            let a = jf - j as f64;
            ring(j, 0) * (1.0 - a) + ring(j + 1, 0) * a
        }
    }
}
