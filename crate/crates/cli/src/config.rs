//! YAML run configuration and its translation into library objects.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use morsecover::geometry::PolytopeTemplate;
use morsecover::integrate::{Gauge, Integrand};
use morsecover::measure::{Atom, DensityPiece, Part, ScaledFamily};
use morsecover::{AaBox, MorseSet, Norm, Point, RadonMeasure, Region, Space};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::expr;

/// A failure while reading or interpreting configuration; always an input error.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<morsecover::Error> for ConfigError {
    fn from(e: morsecover::Error) -> Self {
        ConfigError(e.to_string())
    }
}

fn at(field: &str, e: impl fmt::Display) -> ConfigError {
    ConfigError(format!("{field}: {e}"))
}

/// Parse YAML text; errors carry `file:line:column`.
pub fn parse<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T, ConfigError> {
    serde_yaml::from_str(text).map_err(|e| {
        let msg = e.to_string();
        let msg = match msg.rfind(" at line ") {
            Some(i) => msg[..i].to_string(),
            None => msg,
        };
        match e.location() {
            Some(l) => ConfigError(format!("{origin}:{}:{}: {msg}", l.line(), l.column())),
            None => ConfigError(format!("{origin}: {msg}")),
        }
    })
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    parse(&text, &path.display().to_string())
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub dim: usize,
    #[serde(default = "default_norm", with = "serde_yaml::with::singleton_map_recursive")]
    pub norm: Norm,
}

fn default_norm() -> Norm {
    Norm::L2
}

impl SpaceSpec {
    pub fn build(&self) -> Result<Space, ConfigError> {
        Space::new(self.dim, self.norm.clone()).map_err(|e| at("space", e))
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub at: Vec<f64>,
    pub weight: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    #[serde(default = "one")]
    pub density: f64,
}

fn one() -> f64 {
    1.0
}

/// Atoms plus piecewise-constant density on boxes.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    #[serde(default)]
    pub atoms: Vec<AtomSpec>,
    #[serde(default)]
    pub density: Vec<DensitySpec>,
}

impl MeasureSpec {
    pub fn build(&self, dim: usize) -> Result<RadonMeasure, ConfigError> {
        let atoms = self.atoms.iter().map(|a| Atom { at: Point::from(a.at.clone()), weight: a.weight }).collect();
        let pieces = self
            .density
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let cell = AaBox::new(Point::from(p.lo.clone()), Point::from(p.hi.clone()))
                    .map_err(|e| at(&format!("measure.density[{i}]"), e))?;
                Ok(DensityPiece { cell, density: p.density })
            })
            .collect::<Result<Vec<_>, ConfigError>>()?;
        RadonMeasure::new(dim, atoms, pieces).map_err(|e| at("measure", e))
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PartSpec {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

impl PartSpec {
    fn build(&self) -> Part {
        match self {
            PartSpec::Box { lo, hi } => Part::Box { lo: Point::from(lo.clone()), hi: Point::from(hi.clone()) },
            PartSpec::Ball { center, radius } => Part::Ball { center: Point::from(center.clone()), radius: *radius },
        }
    }
}

/// Union of boxes and balls, minus excluded parts, plus isolated points.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    #[serde(default, with = "serde_yaml::with::singleton_map_recursive")]
    pub include: Vec<PartSpec>,
    #[serde(default, with = "serde_yaml::with::singleton_map_recursive")]
    pub exclude: Vec<PartSpec>,
    #[serde(default)]
    pub points: Vec<Vec<f64>>,
}

impl RegionSpec {
    pub fn build(&self, space: &Space) -> Result<Region, ConfigError> {
        let mut r = Region::empty(space.dim());
        for p in &self.include {
            r = r.with_part(p.build());
        }
        for p in &self.exclude {
            r = r.without_part(p.build());
        }
        for x in &self.points {
            r = r.with_point(Point::from(x.clone()));
        }
        r.validate(space).map_err(|e| at("region", e))?;
        Ok(r)
    }
}

/// Either a path to a YAML file (relative to the config) or the value inline.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Source<T> {
    Path(PathBuf),
    Inline(T),
}

impl<T: DeserializeOwned + Clone> Source<T> {
    pub fn resolve(&self, base: &Path) -> Result<T, ConfigError> {
        match self {
            Source::Inline(t) => Ok(t.clone()),
            Source::Path(p) => load(&base.join(p)),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    ClosedBalls,
    OpenBalls { direction: Vec<f64>, ratio: f64 },
    Intervals { edges: Vec<f64>, fraction: Vec<f64> },
    Polygon { vertices: Vec<Vec<f64>>, kernel_radius: f64 },
}

impl FamilySpec {
    pub fn build(&self, space: &Space) -> Result<ScaledFamily, ConfigError> {
        let f = match self {
            FamilySpec::ClosedBalls => ScaledFamily::closed_balls(space),
            FamilySpec::OpenBalls { direction, ratio } => {
                ScaledFamily::open_balls(space, &Point::from(direction.clone()), *ratio)
            }
            FamilySpec::Intervals { edges, fraction } => {
                ScaledFamily::intervals(space, &Point::from(edges.clone()), &Point::from(fraction.clone()))
            }
            FamilySpec::Polygon { vertices, kernel_radius } => {
                let v = vertices.iter().map(|p| Point::from(p.clone())).collect();
                PolytopeTemplate::star_polygon(v)
                    .and_then(|t| ScaledFamily::polytopes(space, Arc::new(t), *kernel_radius))
            }
        };
        f.map_err(|e| at("family", e))
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GaugeSpec {
    Constant(f64),
    Expr(String),
}

impl GaugeSpec {
    pub fn build(&self, dim: usize) -> Result<Gauge, ConfigError> {
        match self {
            GaugeSpec::Constant(c) => Gauge::constant(*c).map_err(|e| at("gauge", e)),
            GaugeSpec::Expr(src) => {
                let f = expr::compile(src, dim).map_err(|e| at("gauge", e))?;
                Ok(Gauge::new(move |x| f(x)))
            }
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrandSpec {
    #[serde(default)]
    pub builtin: Option<String>,
    #[serde(default)]
    pub expr: Option<String>,
    /// Points where an expression may be discontinuous; must be `mu`-null.
    #[serde(default)]
    pub null_points: Vec<Vec<f64>>,
}

impl IntegrandSpec {
    pub fn build(&self, dim: usize) -> Result<Integrand, ConfigError> {
        let f = match (&self.builtin, &self.expr) {
            (Some(name), None) => Integrand::builtin(name, dim).map_err(|e| at("integrand.builtin", e))?,
            (None, Some(src)) => expr::integrand(src, dim).map_err(|e| at("integrand.expr", e))?,
            _ => return Err(ConfigError("integrand: give exactly one of `builtin` and `expr`".into())),
        };
        if self.null_points.is_empty() {
            return Ok(f);
        }
        let mut n = Region::empty(dim);
        for p in &self.null_points {
            n = n.with_point(Point::from(p.clone()));
        }
        Ok(f.with_null_set(n))
    }
}

/// A single tagged set.
#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSpec {
    Ball {
        center: Vec<f64>,
        radius: f64,
        #[serde(default)]
        tag: Option<Vec<f64>>,
        #[serde(default = "yes")]
        closed: bool,
        #[serde(default)]
        lambda: Option<f64>,
    },
    Interval {
        anchor: Vec<f64>,
        edges: Vec<f64>,
        fraction: Vec<f64>,
        #[serde(default)]
        lambda: Option<f64>,
    },
    Polygon {
        center: Vec<f64>,
        kernel_radius: f64,
        vertices: Vec<Vec<f64>>,
        #[serde(default)]
        lambda: Option<f64>,
    },
    Polytope {
        center: Vec<f64>,
        kernel_radius: f64,
        vertices: Vec<Vec<f64>>,
        #[serde(default)]
        lambda: Option<f64>,
    },
}

fn yes() -> bool {
    true
}

impl ShapeSpec {
    pub fn build(&self, space: &Space) -> morsecover::Result<MorseSet> {
        match self {
            ShapeSpec::Ball { center, radius, tag, closed, lambda } => {
                let c = Point::from(center.clone());
                let t = tag.clone().map(Point::from).unwrap_or_else(|| c.clone());
                MorseSet::tagged_ball(space, c, *radius, t, *closed, *lambda)
            }
            ShapeSpec::Interval { anchor, edges, fraction, lambda } => MorseSet::tagged_interval(
                space,
                Point::from(anchor.clone()),
                Point::from(edges.clone()),
                Point::from(fraction.clone()),
                *lambda,
            ),
            ShapeSpec::Polygon { center, kernel_radius, vertices, lambda } => {
                let v: Vec<Point> = vertices.iter().map(|p| Point::from(p.clone())).collect();
                MorseSet::star_polygon(space, Point::from(center.clone()), *kernel_radius, &v, *lambda)
            }
            ShapeSpec::Polytope { center, kernel_radius, vertices, lambda } => {
                let c = Point::from(center.clone());
                let rel = vertices.iter().map(|p| Point::from(p.clone()).sub(&c)).collect();
                let t = PolytopeTemplate::convex_from_vertices(space.dim(), rel)?;
                MorseSet::star_polytope(space, c, *kernel_radius, Arc::new(t), 1.0, *lambda)
            }
        }
    }
}

pub fn build_sets(space: &Space, specs: &[ShapeSpec]) -> Result<Vec<MorseSet>, ConfigError> {
    specs.iter().enumerate().map(|(i, s)| s.build(space).map_err(|e| at(&format!("sets[{i}]"), e))).collect()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SatelliteSpec {
    pub tau: f64,
}

/// Everything a subcommand may read from `--config`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub space: SpaceSpec,
    #[serde(default)]
    pub measure: Option<Source<MeasureSpec>>,
    #[serde(default)]
    pub region: Option<Source<RegionSpec>>,
    #[serde(default)]
    pub family: Option<FamilySpec>,
    #[serde(default, with = "serde_yaml::with::singleton_map_recursive")]
    pub gauge: Option<GaugeSpec>,
    #[serde(default)]
    pub integrand: Option<IntegrandSpec>,
    #[serde(default, with = "serde_yaml::with::singleton_map_recursive")]
    pub sets: Vec<ShapeSpec>,
    #[serde(default)]
    pub satellite: Option<SatelliteSpec>,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub svg: Option<PathBuf>,
}

/// A loaded config and the directory its relative paths refer to.
pub struct Loaded {
    pub cfg: RunConfig,
    pub base: PathBuf,
}

impl Loaded {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let cfg = load(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Loaded { cfg, base })
    }

    pub fn space(&self) -> Result<Space, ConfigError> {
        self.cfg.space.build()
    }

    pub fn measure(&self, dim: usize) -> Result<RadonMeasure, ConfigError> {
        match &self.cfg.measure {
            Some(m) => m.resolve(&self.base)?.build(dim),
            None => Err(ConfigError("measure: missing".into())),
        }
    }

    pub fn region(&self, space: &Space) -> Result<Region, ConfigError> {
        match &self.cfg.region {
            Some(r) => r.resolve(&self.base)?.build(space),
            None => Err(ConfigError("region: missing".into())),
        }
    }

    pub fn family(&self, space: &Space) -> Result<ScaledFamily, ConfigError> {
        self.cfg.family.clone().unwrap_or(FamilySpec::ClosedBalls).build(space)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn malformed_yaml_is_line_anchored() {
        let text = "space:\n  dim: 2\n  norm: l7\n";
        let e = parse::<RunConfig>(text, "run.yaml").unwrap_err();
        assert!(e.0.starts_with("run.yaml:3:"), "{}", e.0);
    }

    #[test]
    fn inline_specs_build() {
        let text = "space: {dim: 2, norm: linf}\nmeasure:\n  density: [{lo: [0, 0], hi: [1, 1]}]\nregion:\n  include: [{box: {lo: [0, 0], hi: [1, 1]}}]\nfamily: {kind: closed_balls}\ngauge: {constant: 0.5}\n";
        let l = Loaded { cfg: parse(text, "t").unwrap(), base: PathBuf::new() };
        let sp = l.space().unwrap();
        assert_eq!(l.measure(2).unwrap().total_mass(), 1.0);
        assert!(l.region(&sp).unwrap().contains(&sp, &[0.5, 0.5]));
        assert!(l.family(&sp).is_ok());
    }

    #[test]
    fn shapes_build() {
        let sp = Space::euclidean(2);
        let text = "space: {dim: 2}\nsets:\n- ball: {center: [0, 0], radius: 1}\n- polygon: {center: [0, 0], kernel_radius: 0.3, vertices: [[1, 0], [0, 1], [-1, 0], [0, -1]]}\n";
        let cfg: RunConfig = parse(text, "t").unwrap();
        assert_eq!(build_sets(&sp, &cfg.sets).unwrap().len(), 2);
    }
}
