//! The analyze / criticalize / rh-solve pipelines and their report.

use num_complex::Complex64;
use serde::Serialize;
use torsion_core::catalog::graph_section;
use torsion_core::critical::{
    criticality_residual, minimality_gap, rotate_section, solve_neumann_with_tol, CriticalityReport, NeumannData,
    RotationAngle,
};
use torsion_core::geometry::{
    build_normal_frame, check_conformality, sample_immersion, torsion_coefficients, total_torsion, ConformalityReport,
    ImmersionSample, NormalSection, TorsionField,
};
use torsion_core::vekua::{complex_torsion, dbar, rh_boundary_residual, rh_solve, sup_bound_report, ComplexTorsion};
use torsion_core::{DiscGrid, ScalarField};

use crate::config::{ImmersionSource, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::FieldTable;

#[derive(Debug, Clone, Serialize)]
pub struct Conformality {
    pub max_diag_residual: f64,
    pub max_offdiag_residual: f64,
    pub min_area_element: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Criticality {
    pub interior_residual: f64,
    pub boundary_residual: f64,
    pub gauss_defect: f64,
}

impl From<CriticalityReport> for Criticality {
    fn from(r: CriticalityReport) -> Self {
        Self {
            interior_residual: r.interior_residual,
            boundary_residual: r.boundary_residual,
            gauss_defect: r.gauss_defect,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Bound {
    /// `null` stands for `p = inf`.
    pub p: f64,
    pub sup_psi: f64,
    pub s_p: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: &'static str,
    pub immersion: String,
    pub grid: [usize; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conformality: Option<Conformality>,
    pub report_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_abs_curvature: Option<f64>,
    /// `max |S| <= report_tol`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flat: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_torsion_before: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_torsion_after: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criticality_before: Option<Criticality>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criticality_after: Option<Criticality>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_torsion_after: Option<f64>,
    /// For flat input: `max |t11| + max |t12| <= report_tol` after criticalization.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub torsion_after_within_tol: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_abs_rotation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minimality_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<Bound>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rh_boundary_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dbar_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pde_rh_discrepancy: Option<f64>,
    pub files: Vec<String>,
}

impl RunReport {
    fn set_curvature(&mut self, s: &ScalarField) {
        let m = s.sup_norm();
        self.max_abs_curvature = Some(m);
        self.flat = Some(m <= self.report_tol);
    }

    fn new(command: &'static str, cfg: &RunConfig) -> Self {
        Self {
            command,
            immersion: cfg.label(),
            grid: [cfg.grid.n_r(), cfg.grid.n_theta()],
            conformality: None,
            report_tol: cfg.report_tol,
            max_abs_curvature: None,
            flat: None,
            total_torsion_before: None,
            total_torsion_after: None,
            criticality_before: None,
            criticality_after: None,
            max_torsion_after: None,
            torsion_after_within_tol: None,
            max_abs_rotation: None,
            minimality_gap: None,
            bound: None,
            rh_boundary_residual: None,
            dbar_residual: None,
            pde_rh_discrepancy: None,
            files: Vec::new(),
        }
    }
}

pub struct Outcome {
    pub report: RunReport,
    pub tables: Vec<FieldTable>,
}

struct Prepared {
    conformality: ConformalityReport,
    section: NormalSection,
    torsion: TorsionField,
}

fn prepare(cfg: &RunConfig) -> CliResult<Prepared> {
    let g = &cfg.grid;
    let (sample, section): (ImmersionSample, Option<NormalSection>) = match &cfg.immersion {
        ImmersionSource::Graph { spec, .. } => (sample_immersion(spec, g)?, Some(graph_section(spec, g))),
        ImmersionSource::Sampled { data, .. } => (
            ImmersionSample::from_parts(g, data.x.clone(), data.xu.clone(), data.xv.clone())?,
            None,
        ),
        ImmersionSource::SyntheticCurvature(_) => {
            return Err(CliError::Config("this command needs an immersion".into()))
        }
    };
    let conformality = check_conformality(&sample, cfg.conformality_tol).into_result()?;
    let section = match section {
        Some(s) => s,
        None => build_normal_frame(&sample)?,
    };
    let section = match cfg.prerotate {
        Some(a) => rotate_section(&section, &a.sample(g), g)?,
        None => section,
    };
    let torsion = torsion_coefficients(&section, g)?;
    Ok(Prepared {
        conformality,
        section,
        torsion,
    })
}

fn conformality(r: &ConformalityReport) -> Conformality {
    Conformality {
        max_diag_residual: r.max_diag_residual,
        max_offdiag_residual: r.max_offdiag_residual,
        min_area_element: r.min_area_element,
        tol: r.tol,
    }
}

fn torsion_table(stem: &'static str, t: &TorsionField) -> FieldTable {
    FieldTable {
        stem,
        columns: vec![("t11", t.t11.clone()), ("t12", t.t12.clone()), ("s", t.s.clone())],
    }
}

pub fn analyze(cfg: &RunConfig) -> CliResult<Outcome> {
    let p = prepare(cfg)?;
    let g = &cfg.grid;
    let mut report = RunReport::new("analyze", cfg);
    report.conformality = Some(conformality(&p.conformality));
    report.set_curvature(&p.torsion.s);
    report.total_torsion_before = Some(total_torsion(&p.torsion, g)?);
    report.criticality_before = Some(criticality_residual(&p.torsion, g)?.into());
    Ok(Outcome {
        report,
        tables: vec![torsion_table("torsion", &p.torsion)],
    })
}

struct Critical {
    rotation: RotationAngle,
    torsion: TorsionField,
}

fn run_criticalize(cfg: &RunConfig, p: &Prepared) -> CliResult<Critical> {
    let g = &cfg.grid;
    let data = NeumannData::from_torsion(&p.torsion, g)?;
    let rotation = solve_neumann_with_tol(&data, g, cfg.integrability_tol)?.negated();
    let section = rotate_section(&p.section, &rotation, g)?;
    let torsion = torsion_coefficients(&section, g)?;
    Ok(Critical { rotation, torsion })
}

pub fn criticalize(cfg: &RunConfig) -> CliResult<Outcome> {
    let p = prepare(cfg)?;
    let g = &cfg.grid;
    let c = run_criticalize(cfg, &p)?;
    let mut report = RunReport::new("criticalize", cfg);
    report.conformality = Some(conformality(&p.conformality));
    report.set_curvature(&p.torsion.s);
    report.total_torsion_before = Some(total_torsion(&p.torsion, g)?);
    report.total_torsion_after = Some(total_torsion(&c.torsion, g)?);
    report.criticality_before = Some(criticality_residual(&p.torsion, g)?.into());
    report.criticality_after = Some(criticality_residual(&c.torsion, g)?.into());
    report.max_torsion_after = Some(c.torsion.sup_norm());
    if report.flat == Some(true) {
        report.torsion_after_within_tol = Some(c.torsion.sup_norm() <= cfg.report_tol);
    }
    report.max_abs_rotation = Some(c.rotation.phi.sup_norm());
    report.minimality_gap = Some(minimality_gap(&c.rotation, g)?);
    Ok(Outcome {
        report,
        tables: vec![
            torsion_table("torsion_before", &p.torsion),
            torsion_table("torsion_after", &c.torsion),
            FieldTable {
                stem: "rotation",
                columns: vec![("phi", c.rotation.phi.clone())],
            },
        ],
    })
}

fn rh_summary(
    report: &mut RunReport,
    psi: &ComplexTorsion,
    s: &ScalarField,
    cfg: &RunConfig,
) -> CliResult<()> {
    let g: &DiscGrid = &cfg.grid;
    let b = sup_bound_report(psi, s, cfg.p, g)?;
    report.bound = Some(Bound {
        p: b.p,
        sup_psi: b.sup_psi,
        s_p: b.s_p,
        ratio: b.ratio,
    });
    report.rh_boundary_residual = Some(rh_boundary_residual(psi, g)?.iter().fold(0.0, |m, x| m.max(x.abs())));
    let half_i = Complex64::new(0.0, 0.5);
    let d = dbar(&psi.psi, g)?;
    let resid = d.zip_map(s, |a, b| a - half_i * b).without_trace();
    report.dbar_residual = Some(resid.sup_norm());
    Ok(())
}

fn psi_table(psi: &ComplexTorsion) -> FieldTable {
    FieldTable {
        stem: "psi",
        columns: vec![("re", psi.psi.re()), ("im", psi.psi.im())],
    }
}

pub fn rh_solve_cmd(cfg: &RunConfig) -> CliResult<Outcome> {
    let g = &cfg.grid;
    let mut report = RunReport::new("rh-solve", cfg);
    if let ImmersionSource::SyntheticCurvature(value) = cfg.immersion {
        let s = ScalarField::from_fn(g, |_, _| value);
        let psi = rh_solve(&s, g)?;
        rh_summary(&mut report, &psi, &s, cfg)?;
        return Ok(Outcome {
            report,
            tables: vec![psi_table(&psi)],
        });
    }
    let p = prepare(cfg)?;
    let c = run_criticalize(cfg, &p)?;
    let s = c.torsion.s.clone();
    let psi = rh_solve(&s, g)?;
    let pde = complex_torsion(&c.torsion);
    report.conformality = Some(conformality(&p.conformality));
    report.set_curvature(&s);
    report.total_torsion_after = Some(total_torsion(&c.torsion, g)?);
    rh_summary(&mut report, &psi, &s, cfg)?;
    report.pde_rh_discrepancy = Some(pde.psi.zip_map(&psi.psi, |a, b| a - b).sup_norm());
    Ok(Outcome {
        report,
        tables: vec![psi_table(&psi)],
    })
}
