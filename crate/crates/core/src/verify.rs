//! Self-contained invariant suite over a grid-doubling sequence.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::catalog::{boundary_flux_closed_form, graph_section, graph_torsion_closed_form, HolomorphicGraph};
use crate::convergence::RefinementStudy;
use crate::critical::{
    criticality_residual, criticalize, minimality_gap, rotate_section, shift_torsion, solve_neumann, NeumannData,
    RotationAngle, TestAngle,
};
use crate::disc_grid::{ComplexField, DiscGrid, Field, ScalarField};
use crate::error::{Error, Result};
use crate::geometry::{torsion_coefficients, total_torsion};
use crate::vekua::{complex_torsion, dbar, pb_operator, rh_boundary_residual, rh_solve, sup_bound_report, tb_of_one, tb_operator};

/// Observed order counted as second order.
pub const MIN_ORDER: f64 = 1.8;

/// Errors at or below this are rounding noise and count as converged.
pub const ROUNDING_FLOOR: f64 = 1e-10;

pub const DEFAULT_LEVELS: [(usize, usize); 3] = [(16, 32), (32, 64), (64, 128)];

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn from_study(name: &str, study: &RefinementStudy) -> Self {
        Self {
            name: name.into(),
            passed: study.converges_at(MIN_ORDER, ROUNDING_FLOOR),
            detail: study.summary(),
        }
    }

    fn from_bool(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            passed,
            detail,
        }
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn w2() -> HolomorphicGraph {
    HolomorphicGraph::monomial(2, c(1.0))
}

fn sup_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    a.zip_map(b, |x, y| x - y).sup_norm()
}

fn grid(level: (usize, usize)) -> DiscGrid {
    DiscGrid::new(level.0, level.1).expect("suite levels are valid grids")
}

/// Runs every check; an `Err` means a computation failed outright.
pub fn run_suite(levels: &[(usize, usize)]) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let study = |f: &dyn Fn(&DiscGrid) -> Result<f64>| -> Result<RefinementStudy> {
        let mut errs = Vec::new();
        for &l in levels {
            errs.push(f(&grid(l))?);
        }
        Ok(RefinementStudy {
            levels: levels.to_vec(),
            errors: errs,
        })
    };

    let exact = 2.0 * PI * (5f64.ln() - 0.8);
    out.push(Check::from_study(
        "total torsion of (w, w^2)",
        &study(&|g| Ok((total_torsion(&graph_torsion_closed_form(&w2(), g), g)? - exact).abs() / exact))?,
    ));

    for n in [2, 3] {
        let spec = HolomorphicGraph::monomial(n, c(1.0));
        let s = study(&|g| {
            let t = torsion_coefficients(&graph_section(&spec, g).numerical(), g)?;
            let r = criticality_residual(&t, g)?;
            Ok(r.interior_residual.max(r.boundary_residual))
        })?;
        out.push(Check::from_study(&format!("criticality residuals of (w, w^{n})"), &s));
    }

    let nc = HolomorphicGraph::new(vec![c(0.0), c(1.0), c(1.0)]);
    out.push(Check::from_study(
        "boundary flux of (w, w^2 + w)",
        &study(&|g| {
            let t = torsion_coefficients(&graph_section(&nc, g).numerical(), g)?;
            let flux = g.normal_flux(&t.t11, &t.t12)?;
            let exact = boundary_flux_closed_form(&nc, g);
            Ok(flux.iter().zip(&exact).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
        })?,
    ));

    out.push(Check::from_study(
        "round-trip criticalization",
        &study(&|g| {
            let n = rotate_section(&graph_section(&w2(), g), &TestAngle::Uv.sample(g), g)?;
            let t = criticalize(&n, g)?.torsion_after;
            let cf = graph_torsion_closed_form(&w2(), g);
            Ok(sup_diff(&t.t11, &cf.t11).max(sup_diff(&t.t12, &cf.t12)))
        })?,
    ));

    {
        let g = grid(*levels.last().expect("at least one level"));
        let plane = graph_section(&HolomorphicGraph::plane(), &g);
        let mut worst: f64 = 0.0;
        for a in TestAngle::QUADRATIC {
            let t = criticalize(&rotate_section(&plane, &a.sample(&g), &g)?, &g)?.torsion_after;
            worst = worst.max(t.sup_norm());
        }
        out.push(Check::from_bool(
            "flat bundle criticalizes to zero torsion",
            worst <= 1e-6,
            format!("max sup|t11| + sup|t12| = {worst:.3e}"),
        ));

        let t = graph_torsion_closed_form(&w2(), &g);
        let base = total_torsion(&t, &g)?;
        let mut worst: f64 = 0.0;
        for a in TestAngle::ALL {
            let angle = a.sample(&g);
            let gap = total_torsion(&shift_torsion(&t, &angle, &g)?, &g)? - base - minimality_gap(&angle, &g)?;
            worst = worst.max(gap.abs());
        }
        let constant = minimality_gap(&RotationAngle::constant(&g, 1.0), &g)?;
        out.push(Check::from_bool(
            "minimality identity",
            worst <= 1e-6 * (1.0 + base) && constant == 0.0,
            format!("max defect {worst:.3e}, constant-angle gap {constant:e}"),
        ));
    }

    out.push(Check::from_study(
        "T[1] and P[ic] oracles",
        &study(&|g| {
            let one = ComplexField::from_fn(g, |_, _| c(1.0));
            let mut targets: Vec<Complex64> = g
                .interior_nodes()
                .into_iter()
                .chain(g.boundary_nodes())
                .map(|(u, v)| Complex64::new(u, v))
                .collect();
            targets.extend((0..100).map(|k| Complex64::from_polar(1.05 + 0.03 * k as f64, 0.7 * k as f64)));
            let vals = tb_operator(&one, &targets, g)?;
            let e1 = targets.iter().zip(&vals).fold(0.0_f64, |m, (z, t)| m.max((t - tb_of_one(*z)).norm()));
            let ic = Complex64::new(0.0, 0.6);
            let p = pb_operator(&ComplexField::from_fn(g, |_, _| ic), g)?;
            let exact = Field::from_fn(g, |u, v| ic * Complex64::new(u, -v));
            Ok(e1.max(p.zip_map(&exact, |a, b| a - b).sup_norm()))
        })?,
    ));

    let pde_rh = study(&|g| {
        let pde = complex_torsion(&criticalize(&graph_section(&w2(), g), g)?.torsion_after);
        let rh = rh_solve(&graph_torsion_closed_form(&w2(), g).s, g)?;
        Ok(pde.psi.zip_map(&rh.psi, |a, b| a - b).sup_norm())
    })?;
    out.push(Check::from_study("PDE and RH complex torsions agree", &pde_rh));

    let bdry = study(&|g| {
        let rh = rh_solve(&graph_torsion_closed_form(&w2(), g).s, g)?;
        Ok(rh_boundary_residual(&rh, g)?.iter().fold(0.0, |m, x| m.max(x.abs())))
    })?;
    out.push(Check::from_study("RH boundary condition", &bdry));

    let dbar_levels: Vec<_> = levels.iter().copied().filter(|l| l.0 <= 64).collect();
    for (label, f) in [
        ("constant", Box::new(|_: f64, _: f64| Complex64::new(0.0, 0.6)) as Box<dyn Fn(f64, f64) -> Complex64 + Sync>),
        (
            "(w, w^2) curvature",
            Box::new(|u: f64, v: f64| Complex64::new(0.0, 4.0 / (1.0 + 4.0 * (u * u + v * v)).powi(2))),
        ),
    ] {
        let mut errs = Vec::new();
        for &l in &dbar_levels {
            let g = grid(l);
            let data = ComplexField::from_fn(&g, &f);
            let p = pb_operator(&data, &g)?;
            errs.push(dbar(&p, &g)?.zip_map(&data, |a, b| a - b).without_trace().sup_norm());
        }
        let s = RefinementStudy {
            levels: dbar_levels.clone(),
            errors: errs,
        };
        out.push(Check::from_study(&format!("dbar P[f] = f, f {label}"), &s));
    }

    {
        let g = grid(levels[0]);
        let s = graph_torsion_closed_form(&w2(), &g).s;
        let base = sup_bound_report(&rh_solve(&s, &g)?, &s, f64::INFINITY, &g)?.ratio;
        let mut worst: f64 = 0.0;
        for lambda in [0.1, 10.0] {
            let sl = s.scale(lambda);
            let r = sup_bound_report(&rh_solve(&sl, &g)?, &sl, f64::INFINITY, &g)?.ratio;
            worst = worst.max((r - base).abs() / base);
        }
        out.push(Check::from_bool(
            "bound ratio is scale invariant",
            worst <= 1e-10,
            format!("ratio {base:.6}, max relative change {worst:.3e}"),
        ));
    }

    out.push(Check::from_study(
        "discrete divergence theorem",
        &study(&|g| {
            let p = ScalarField::from_fn(g, |u, v| (u * v).sin() + v * v * v);
            let q = ScalarField::from_fn(g, |u, v| u.exp() * v);
            let lhs = g.integrate_area(&g.divergence(&p, &q)?)?;
            let rhs = g.integrate_boundary(&g.normal_flux(&p, &q)?)?;
            Ok((lhs - rhs).abs().max(1e-300))
        })?,
    ));

    out.push(Check::from_study(
        "S is rotation invariant",
        &study(&|g| {
            let n = graph_section(&w2(), g);
            let s0 = torsion_coefficients(&n, g)?.s;
            let mut worst: f64 = 0.0;
            for a in TestAngle::ALL {
                let s1 = torsion_coefficients(&rotate_section(&n, &a.sample(g), g)?, g)?.s;
                worst = worst.max(sup_diff(&s1, &s0));
            }
            Ok(worst)
        })?,
    ));

    {
        let g = grid(levels[0]);
        let d = NeumannData::new(&g, ScalarField::from_fn(&g, |_, _| 1.0), vec![0.0; g.n_theta()])?;
        let rejected = matches!(solve_neumann(&d, &g), Err(Error::IntegrabilityDefect { .. }));
        out.push(Check::from_bool(
            "Neumann data f = 1, g = 0 rejected",
            rejected,
            format!("defect {:.6}", d.defect),
        ));
    }

    out.push(Check::from_study(
        "Gauss identity for critical torsions",
        &study(&|g| {
            let t = torsion_coefficients(&graph_section(&w2(), g), g)?;
            let t = crate::geometry::TorsionField::new(g, t.t11, t.t12)?;
            Ok(criticality_residual(&t, g)?.gauss_defect)
        })?,
    ));

    Ok(out)
}
