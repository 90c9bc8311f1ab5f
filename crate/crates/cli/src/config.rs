//! Run configuration: a TOML file plus command-line overrides.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use torsion_core::catalog::HolomorphicGraph;
use torsion_core::critical::{TestAngle, INTEGRABILITY_TOL};
use torsion_core::geometry::{sample_immersion, Immersion, DEFAULT_CONFORMALITY_TOL};
use torsion_core::{DiscGrid, Vec4Field};

use crate::error::{CliError, CliResult};

pub const DEFAULT_GRID: (usize, usize) = (64, 128);
pub const DEFAULT_REPORT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub immersion: Option<ImmersionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<BoundConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rh: Option<RhConfig>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImmersionConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<[f64; 2]>>,
    /// Sampled immersion table, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    /// Name of a test angle applied to the section before anything else.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prerotate: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_r: usize,
    pub n_theta: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    pub conformality: Option<f64>,
    pub integrability: Option<f64>,
    pub report: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundConfig {
    pub p: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    /// Write CSV field tables next to the report (default true).
    pub fields: Option<bool>,
}

/// Bypasses the immersion: constant curvature data for `rh-solve`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhConfig {
    pub synthetic_s: f64,
}

/// Overrides from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub grid: Option<(usize, usize)>,
    pub out: Option<PathBuf>,
    pub p: Option<f64>,
    pub tol: Option<f64>,
}

#[derive(Debug, Clone)]
pub enum ImmersionSource {
    Graph { name: String, spec: HolomorphicGraph },
    Sampled { path: PathBuf, data: SampledImmersion },
    SyntheticCurvature(f64),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub immersion: ImmersionSource,
    pub prerotate: Option<TestAngle>,
    pub grid: DiscGrid,
    pub conformality_tol: f64,
    pub integrability_tol: f64,
    pub report_tol: f64,
    pub p: f64,
    pub out_dir: Option<PathBuf>,
    pub write_fields: bool,
}

impl RunConfig {
    pub fn load(path: Option<&Path>, ov: &Overrides) -> CliResult<Self> {
        let path = path.ok_or_else(|| CliError::Config("--config is required".into()))?;
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base, ov)
    }

    pub fn from_toml(text: &str, base: &Path, ov: &Overrides) -> CliResult<Self> {
        let fc: FileConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        Self::resolve(fc, base, ov)
    }

    fn resolve(fc: FileConfig, base: &Path, ov: &Overrides) -> CliResult<Self> {
        let tols = fc.tolerances.unwrap_or_default();
        let conformality_tol = tols.conformality.unwrap_or(DEFAULT_CONFORMALITY_TOL);
        let integrability_tol = tols.integrability.unwrap_or(INTEGRABILITY_TOL);
        let report_tol = ov.tol.or(tols.report).unwrap_or(DEFAULT_REPORT_TOL);
        for (name, t) in [
            ("conformality", conformality_tol),
            ("integrability", integrability_tol),
            ("report", report_tol),
        ] {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Config(format!("{name} tolerance must be positive, got {t}")));
            }
        }
        let p = ov.p.or(fc.bound.map(|b| b.p)).unwrap_or(f64::INFINITY);
        if !(p > 2.0) {
            return Err(CliError::Config(format!("p must exceed 2, got {p}")));
        }

        let requested = ov.grid.or(fc.grid.map(|g| (g.n_r, g.n_theta)));
        let imm = fc.immersion.unwrap_or_default();
        let prerotate = imm
            .prerotate
            .as_deref()
            .map(|n| TestAngle::from_name(n).ok_or_else(|| CliError::Config(format!("unknown angle {n:?}"))))
            .transpose()?;

        let (immersion, shape) = match (&fc.rh, &imm.builtin, &imm.file) {
            (Some(rh), None, None) => (ImmersionSource::SyntheticCurvature(rh.synthetic_s), requested),
            (None, Some(name), None) => (
                ImmersionSource::Graph {
                    name: name.clone(),
                    spec: builtin_spec(name, &imm)?,
                },
                requested,
            ),
            (None, None, Some(file)) => {
                let path = base.join(file);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
                let data = SampledImmersion::parse(&text)?;
                if let Some(g) = requested {
                    if g != data.shape {
                        return Err(CliError::Config(format!(
                            "grid {g:?} does not match the sampled file {:?}",
                            data.shape
                        )));
                    }
                }
                let shape = Some(data.shape);
                (ImmersionSource::Sampled { path, data }, shape)
            }
            _ => {
                return Err(CliError::Config(
                    "exactly one of immersion.builtin, immersion.file or [rh] synthetic_s is required".into(),
                ))
            }
        };
        let (n_r, n_theta) = shape.unwrap_or(DEFAULT_GRID);
        let grid = DiscGrid::new(n_r, n_theta)?;
        let out = fc.output.unwrap_or_default();
        Ok(Self {
            immersion,
            prerotate,
            grid,
            conformality_tol,
            integrability_tol,
            report_tol,
            p,
            out_dir: ov.out.clone().or(out.dir.map(|d| base.join(d))),
            write_fields: out.fields.unwrap_or(true),
        })
    }

    pub fn label(&self) -> String {
        let base = match &self.immersion {
            ImmersionSource::Graph { name, .. } => name.clone(),
            ImmersionSource::Sampled { path, .. } => format!("file:{}", path.display()),
            ImmersionSource::SyntheticCurvature(s) => format!("synthetic S = {s}"),
        };
        match self.prerotate {
            Some(a) => format!("{base}, prerotated by {}", a.name()),
            None => base,
        }
    }
}

fn complex(c: [f64; 2]) -> Complex64 {
    Complex64::new(c[0], c[1])
}

pub fn builtin_spec(name: &str, imm: &ImmersionConfig) -> CliResult<HolomorphicGraph> {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    match name {
        "plane" => Ok(HolomorphicGraph::plane()),
        "w" => Ok(HolomorphicGraph::new(vec![zero, one])),
        "wn" => {
            let n = imm.n.ok_or_else(|| CliError::Config("builtin wn needs n".into()))?;
            if n == 0 {
                return Err(CliError::Config("builtin wn needs n >= 1".into()));
            }
            Ok(HolomorphicGraph::monomial(n, imm.c.map(complex).unwrap_or(one)))
        }
        "w2_plus_w" => Ok(HolomorphicGraph::new(vec![zero, one, one])),
        "poly" => {
            let c = imm
                .coefficients
                .as_ref()
                .ok_or_else(|| CliError::Config("builtin poly needs coefficients".into()))?;
            Ok(HolomorphicGraph::new(c.iter().copied().map(complex).collect()))
        }
        other => Err(CliError::Config(format!("unknown builtin {other:?}"))),
    }
}

/// `X`, `X_u`, `X_v` per node: interior rows in grid order, then the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledImmersion {
    pub shape: (usize, usize),
    pub x: Vec4Field,
    pub xu: Vec4Field,
    pub xv: Vec4Field,
}

impl SampledImmersion {
    pub const COLUMNS: usize = 12;

    pub fn parse(text: &str) -> CliResult<Self> {
        let bad = |m: String| CliError::Config(format!("sampled immersion: {m}"));
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
        let words: Vec<&str> = header.trim_start_matches('#').split_whitespace().collect();
        let shape = match words.as_slice() {
            ["grid", a, b] => (
                a.parse().map_err(|_| bad(format!("bad n_r {a:?}")))?,
                b.parse().map_err(|_| bad(format!("bad n_theta {b:?}")))?,
            ),
            _ => return Err(bad(format!("header must read '# grid n_r n_theta', got {header:?}"))),
        };
        let grid = DiscGrid::new(shape.0, shape.1)?;
        let mut rows = Vec::new();
        for (i, line) in lines.filter(|l| !l.starts_with('#')).enumerate() {
            let vals: Vec<f64> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| bad(format!("row {}: {e}", i + 1)))?;
            if vals.len() != Self::COLUMNS {
                return Err(bad(format!("row {} has {} columns, expected {}", i + 1, vals.len(), Self::COLUMNS)));
            }
            rows.push(vals);
        }
        let expected = grid.num_interior() + grid.n_theta();
        if rows.len() != expected {
            return Err(bad(format!("{} rows for grid {shape:?}, expected {expected}", rows.len())));
        }
        let block = |off: usize| -> CliResult<Vec4Field> {
            let pick = |r: &Vec<f64>| [r[off], r[off + 1], r[off + 2], r[off + 3]];
            let (inner, rim) = rows.split_at(grid.num_interior());
            Ok(Vec4Field::new(&grid, inner.iter().map(pick).collect(), Some(rim.iter().map(pick).collect()))?)
        };
        Ok(Self {
            shape,
            x: block(0)?,
            xu: block(4)?,
            xv: block(8)?,
        })
    }
}

/// Samples an immersion in the format read by [`SampledImmersion::parse`].
pub fn render_sampled(imm: &dyn Immersion, grid: &DiscGrid) -> CliResult<String> {
    let s = sample_immersion(imm, grid)?;
    let mut out = format!("# grid {} {}\n", grid.n_r(), grid.n_theta());
    let all = |f: &Vec4Field| -> Vec<[f64; 4]> { f.values().iter().chain(f.trace().into_iter().flatten()).copied().collect() };
    let (x, xu, xv) = (all(&s.x), all(&s.xu), all(&s.xv));
    for i in 0..x.len() {
        let row: Vec<String> = x[i].iter().chain(&xu[i]).chain(&xv[i]).map(|v| v.to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    Ok(out)
}

/// Named presets for `example list` and `example emit`.
pub fn presets() -> Vec<(&'static str, &'static str, FileConfig)> {
    let graph = |builtin: &str, n: Option<usize>, prerotate: Option<&str>| FileConfig {
        immersion: Some(ImmersionConfig {
            builtin: Some(builtin.into()),
            n,
            c: n.map(|_| [1.0, 0.0]),
            prerotate: prerotate.map(str::to_string),
            ..Default::default()
        }),
        grid: Some(GridConfig {
            n_r: DEFAULT_GRID.0,
            n_theta: DEFAULT_GRID.1,
        }),
        ..Default::default()
    };
    vec![
        ("plane", "flat plane, Phi = 0", graph("plane", None, None)),
        ("w", "Phi = w, a tilted plane", graph("w", None, None)),
        ("w2", "Phi = w^2, critical graph section", graph("wn", Some(2), None)),
        ("w3", "Phi = w^3, critical graph section", graph("wn", Some(3), None)),
        ("w2_plus_w", "Phi = w^2 + w, non-critical graph section", graph("w2_plus_w", None, None)),
        ("w2_rotated", "Phi = w^2 with the section rotated by uv", graph("wn", Some(2), Some("uv"))),
        (
            "constant_s",
            "synthetic constant curvature S = 2 for rh-solve",
            FileConfig {
                rh: Some(RhConfig { synthetic_s: 2.0 }),
                grid: Some(GridConfig {
                    n_r: DEFAULT_GRID.0,
                    n_theta: DEFAULT_GRID.1,
                }),
                ..Default::default()
            },
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str) -> CliResult<RunConfig> {
        RunConfig::from_toml(text, Path::new("."), &Overrides::default())
    }

    #[test]
    fn builtin_monomial_with_defaults() {
        let cfg = load("[immersion]\nbuiltin = \"wn\"\nn = 3\nc = [0.0, 2.0]\n").unwrap();
        assert_eq!((cfg.grid.n_r(), cfg.grid.n_theta()), DEFAULT_GRID);
        assert!(cfg.p.is_infinite());
        match cfg.immersion {
            ImmersionSource::Graph { spec, .. } => assert_eq!(spec.coefficients()[3], Complex64::new(0.0, 2.0)),
            _ => panic!(),
        }
    }

    #[test]
    fn overrides_win() {
        let ov = Overrides {
            grid: Some((8, 16)),
            p: Some(4.0),
            tol: Some(1e-3),
            ..Default::default()
        };
        let text = "[immersion]\nbuiltin = \"plane\"\n[grid]\nn_r = 32\nn_theta = 64\n[bound]\np = inf\n";
        let cfg = RunConfig::from_toml(text, Path::new("."), &ov).unwrap();
        assert_eq!(cfg.grid.n_r(), 8);
        assert_eq!(cfg.p, 4.0);
        assert_eq!(cfg.report_tol, 1e-3);
    }

    #[test]
    fn malformed_configs_are_config_errors() {
        for text in [
            "[immersion\n",
            "[immersion]\nbuiltin = \"nope\"\n",
            "[immersion]\nbuiltin = \"wn\"\n",
            "[immersion]\nbuiltin = \"plane\"\nextra = 1\n",
            "[immersion]\nbuiltin = \"plane\"\nprerotate = \"spiral\"\n",
            "[immersion]\nbuiltin = \"plane\"\n[bound]\np = 2.0\n",
            "[immersion]\nbuiltin = \"plane\"\n[grid]\nn_r = 0\nn_theta = 8\n",
            "[grid]\nn_r = 4\nn_theta = 8\n",
        ] {
            let e = load(text).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{text}: {e}");
        }
    }

    #[test]
    fn sampled_table_round_trip() {
        let text = "# grid 2 4\n".to_string() + &"0 0 0 0 1 0 0 0 0 1 0 0\n".repeat(12);
        let s = SampledImmersion::parse(&text).unwrap();
        assert_eq!(s.shape, (2, 4));
        assert_eq!(s.xu.trace().unwrap()[3], [1.0, 0.0, 0.0, 0.0]);
        assert!(SampledImmersion::parse(&text.replace("# grid 2 4", "# grid 3 4")).is_err());
        assert!(SampledImmersion::parse(&text.replacen(" 0\n", " 0 7\n", 1)).is_err());
        assert!(SampledImmersion::parse("# size 1 4\n").is_err());
    }

    #[test]
    fn rendered_samples_parse_back() {
        let g = DiscGrid::new(3, 6).unwrap();
        let spec = HolomorphicGraph::monomial(2, Complex64::new(0.5, -1.0));
        let s = SampledImmersion::parse(&render_sampled(&spec, &g).unwrap()).unwrap();
        let direct = sample_immersion(&spec, &g).unwrap();
        assert_eq!(s.x, direct.x);
        assert_eq!(s.xv, direct.xv);
    }

    #[test]
    fn presets_parse() {
        for (name, _, fc) in presets() {
            let text = toml::to_string(&fc).unwrap();
            assert!(load(&text).is_ok(), "{name}");
        }
    }
}
