//! Problem configuration: a TOML file with the right-hand side, the initial
//! point, arcs and options. Complex numbers are written as strings such as
//! `"1.5-2i"` (plain TOML numbers are accepted for real values).

use num_complex::Complex64;
use painleve_core::engine::{Arc, ContinuationOptions};
use painleve_core::format_complex;
use painleve_core::numerics::TorusSampler;
use painleve_core::poly::{BivariatePoly, RootOptions};
use painleve_core::rhs::{parse_complex, BranchConvention, Expression};
use painleve_core::solver::SolverOptions;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("missing field `{0}`")]
    Missing(&'static str),
}

fn field_err(field: impl Into<String>, message: impl ToString) -> ConfigError {
    ConfigError::Field {
        field: field.into(),
        message: message.to_string(),
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum ComplexText {
    Number(f64),
    Text(String),
}

impl ComplexText {
    fn parse(&self, field: &str) -> Result<Complex64, ConfigError> {
        match self {
            ComplexText::Number(x) => Ok(Complex64::new(*x, 0.0)),
            ComplexText::Text(t) => parse_complex(t).map_err(|e| field_err(field, e)),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum BranchSpec {
    Convention(String),
    Sheets(Vec<ComplexText>),
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct FiberSection {
    pub poly: Option<String>,
    pub nu: Option<ComplexText>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct MonodromySection {
    #[serde(rename = "loop")]
    pub loop_arc: Option<Vec<ComplexText>>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct OptionsSection {
    pub order: Option<usize>,
    pub torus_points: Option<usize>,
    pub safety: Option<f64>,
    pub radius_safety: Option<f64>,
    pub residual_tol: Option<f64>,
    pub max_radius: Option<f64>,
    pub proximity_floor: Option<f64>,
    pub r_max: Option<f64>,
    pub min_step: Option<f64>,
    pub max_advance: Option<f64>,
    pub max_steps: Option<usize>,
    pub verdict_tol: Option<f64>,
    pub verdict_window: Option<usize>,
    pub j_max: Option<usize>,
    pub endpoint_gap_tol: Option<f64>,
    pub root_iterations: Option<u32>,
}

/// The file as written by the user.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub rhs: Option<String>,
    pub w0: Option<ComplexText>,
    pub z0: Option<ComplexText>,
    pub arc: Option<Vec<ComplexText>>,
    pub arcs: Option<Vec<Vec<ComplexText>>>,
    pub branch: Option<BranchSpec>,
    pub seed: Option<u64>,
    pub fiber: Option<FiberSection>,
    pub monodromy: Option<MonodromySection>,
    pub options: Option<OptionsSection>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Branch {
    Convention(BranchConvention),
    Sheets(Vec<Complex64>),
}

/// A validated configuration with every default filled in.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemConfig {
    pub rhs: Expression,
    pub w0: Complex64,
    pub z0: Complex64,
    pub arcs: Vec<Arc>,
    pub branch: Branch,
    pub seed: u64,
    pub fiber_poly: Option<(String, BivariatePoly)>,
    pub fiber_nu: Option<Complex64>,
    pub loop_arc: Option<Arc>,
    pub options: ContinuationOptions,
}

fn parse_arc(field: &str, vertices: &[ComplexText]) -> Result<Arc, ConfigError> {
    let points = vertices
        .iter()
        .enumerate()
        .map(|(i, v)| v.parse(&format!("{field}[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    Arc::new(points).map_err(|e| field_err(field, e))
}

fn positive(field: &str, x: f64) -> Result<f64, ConfigError> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(field_err(format!("options.{field}"), format!("must be positive and finite (got {x})")))
    }
}

fn at_least(field: &str, x: usize, min: usize) -> Result<usize, ConfigError> {
    if x >= min {
        Ok(x)
    } else {
        Err(field_err(format!("options.{field}"), format!("must be at least {min} (got {x})")))
    }
}

fn build_options(o: &OptionsSection, seed: u64) -> Result<ContinuationOptions, ConfigError> {
    let d = ContinuationOptions::default();
    let ds = SolverOptions::default();
    let safety = positive("safety", o.safety.unwrap_or(ds.torus.safety))?;
    if safety < 1.0 {
        return Err(field_err("options.safety", format!("must be at least 1 (got {safety})")));
    }
    let radius_safety = positive("radius_safety", o.radius_safety.unwrap_or(ds.radius_safety))?;
    if radius_safety >= 1.0 {
        return Err(field_err(
            "options.radius_safety",
            format!("must be below 1 (got {radius_safety})"),
        ));
    }
    let solver = SolverOptions {
        order: at_least("order", o.order.unwrap_or(ds.order), 1)?,
        torus: TorusSampler {
            n: at_least("torus_points", o.torus_points.unwrap_or(ds.torus.n), 4)?,
            safety,
        },
        radius_safety,
        residual_tol: positive("residual_tol", o.residual_tol.unwrap_or(ds.residual_tol))?,
        roots: RootOptions {
            max_iterations: o.root_iterations.unwrap_or(ds.roots.max_iterations).max(1),
            seed,
        },
    };
    Ok(ContinuationOptions {
        solver,
        max_radius: positive("max_radius", o.max_radius.unwrap_or(d.max_radius))?,
        proximity_floor: positive("proximity_floor", o.proximity_floor.unwrap_or(d.proximity_floor))?,
        r_max: positive("r_max", o.r_max.unwrap_or(d.r_max))?,
        min_step: positive("min_step", o.min_step.unwrap_or(d.min_step))?,
        max_advance: positive("max_advance", o.max_advance.unwrap_or(d.max_advance))?,
        max_steps: at_least("max_steps", o.max_steps.unwrap_or(d.max_steps), 1)?,
        verdict_tol: positive("verdict_tol", o.verdict_tol.unwrap_or(d.verdict_tol))?,
        verdict_window: at_least("verdict_window", o.verdict_window.unwrap_or(d.verdict_window), 4)?,
        j_max: at_least("j_max", o.j_max.unwrap_or(d.j_max), 1)?,
        endpoint_gap_tol: positive("endpoint_gap_tol", o.endpoint_gap_tol.unwrap_or(d.endpoint_gap_tol))?,
        branch_convention: d.branch_convention,
    })
}

impl ProblemConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text)?;
        Self::from_raw(&raw)
    }

    pub fn from_raw(raw: &RawConfig) -> Result<Self, ConfigError> {
        let rhs_text = raw.rhs.as_deref().ok_or(ConfigError::Missing("rhs"))?;
        let rhs = Expression::parse(rhs_text).map_err(|e| field_err("rhs", e))?;
        let w0 = raw.w0.as_ref().ok_or(ConfigError::Missing("w0"))?.parse("w0")?;
        let z0 = raw.z0.as_ref().ok_or(ConfigError::Missing("z0"))?.parse("z0")?;
        let mut arcs = Vec::new();
        if let Some(arc) = &raw.arc {
            arcs.push(parse_arc("arc", arc)?);
        }
        if let Some(list) = &raw.arcs {
            for (i, arc) in list.iter().enumerate() {
                arcs.push(parse_arc(&format!("arcs[{i}]"), arc)?);
            }
        }
        for (i, arc) in arcs.iter().enumerate() {
            if (arc.start() - z0).norm() > 1e-12 * (1.0 + z0.norm()) {
                return Err(field_err(
                    if raw.arc.is_some() && i == 0 { "arc".to_string() } else { format!("arcs[{i}]") },
                    format!("must start at z0 = {} (starts at {})", format_complex(z0), format_complex(arc.start())),
                ));
            }
        }
        let branch = match &raw.branch {
            None => Branch::Convention(BranchConvention::PrincipalPositiveReal),
            Some(BranchSpec::Convention(name)) => Branch::Convention(
                BranchConvention::from_name(name)
                    .ok_or_else(|| field_err("branch", format!("unknown convention `{name}`")))?,
            ),
            Some(BranchSpec::Sheets(list)) => Branch::Sheets(
                list.iter()
                    .enumerate()
                    .map(|(i, v)| v.parse(&format!("branch[{i}]")))
                    .collect::<Result<_, _>>()?,
            ),
        };
        if let Branch::Sheets(s) = &branch {
            if s.len() != rhs.radicals().len() {
                return Err(field_err(
                    "branch",
                    format!("expected {} sheet values (one per rad node), got {}", rhs.radicals().len(), s.len()),
                ));
            }
        }
        let seed = raw.seed.unwrap_or(RootOptions::default().seed);
        let fiber = raw.fiber.clone().unwrap_or_default();
        let fiber_poly = match &fiber.poly {
            None => None,
            Some(text) => {
                let e = Expression::parse(text).map_err(|e| field_err("fiber.poly", e))?;
                let p = e
                    .as_polynomial()
                    .ok_or_else(|| field_err("fiber.poly", "must be a polynomial in w and z"))?;
                Some((e.source().to_string(), p))
            }
        };
        let fiber_nu = fiber.nu.as_ref().map(|v| v.parse("fiber.nu")).transpose()?;
        let loop_arc = raw
            .monodromy
            .as_ref()
            .and_then(|m| m.loop_arc.as_ref())
            .map(|l| parse_arc("monodromy.loop", l))
            .transpose()?;
        let options = build_options(&raw.options.clone().unwrap_or_default(), seed)?;
        Ok(Self {
            rhs,
            w0,
            z0,
            arcs,
            branch,
            seed,
            fiber_poly,
            fiber_nu,
            loop_arc,
            options,
        })
    }

    /// First arc, for subcommands that need exactly one.
    pub fn arc(&self) -> Result<&Arc, ConfigError> {
        self.arcs.first().ok_or(ConfigError::Missing("arc"))
    }

    /// The fully explicit form, as written by `--dump-config`.
    pub fn to_raw(&self) -> RawConfig {
        let text = |c: Complex64| ComplexText::Text(format_complex(c));
        let arc_text = |a: &Arc| a.vertices().iter().map(|&v| text(v)).collect::<Vec<_>>();
        let o = &self.options;
        RawConfig {
            rhs: Some(self.rhs.source().to_string()),
            w0: Some(text(self.w0)),
            z0: Some(text(self.z0)),
            arc: self.arcs.first().map(arc_text),
            arcs: (self.arcs.len() > 1).then(|| self.arcs[1..].iter().map(arc_text).collect()),
            branch: Some(match &self.branch {
                Branch::Convention(c) => BranchSpec::Convention(c.name().to_string()),
                Branch::Sheets(s) => BranchSpec::Sheets(s.iter().map(|&v| text(v)).collect()),
            }),
            seed: Some(self.seed),
            fiber: (self.fiber_poly.is_some() || self.fiber_nu.is_some()).then(|| FiberSection {
                poly: self.fiber_poly.as_ref().map(|(s, _)| s.clone()),
                nu: self.fiber_nu.map(text),
            }),
            monodromy: self.loop_arc.as_ref().map(|l| MonodromySection {
                loop_arc: Some(arc_text(l)),
            }),
            options: Some(OptionsSection {
                order: Some(o.solver.order),
                torus_points: Some(o.solver.torus.n),
                safety: Some(o.solver.torus.safety),
                radius_safety: Some(o.solver.radius_safety),
                residual_tol: Some(o.solver.residual_tol),
                max_radius: Some(o.max_radius),
                proximity_floor: Some(o.proximity_floor),
                r_max: Some(o.r_max),
                min_step: Some(o.min_step),
                max_advance: Some(o.max_advance),
                max_steps: Some(o.max_steps),
                verdict_tol: Some(o.verdict_tol),
                verdict_window: Some(o.verdict_window),
                j_max: Some(o.j_max),
                endpoint_gap_tol: Some(o.endpoint_gap_tol),
                root_iterations: Some(o.solver.roots.max_iterations),
            }),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_raw()).expect("config serializes")
    }

    pub fn set_order(&mut self, order: usize) -> Result<(), ConfigError> {
        self.options.solver.order = at_least("order", order, 1)?;
        Ok(())
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.options.solver.roots.seed = seed;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
rhs = "1/(2*w)"
w0 = "1"
z0 = 1.0
arc = ["1", "0.5+0.5i", 0.0]
"#;

    #[test]
    fn defaults_are_filled() {
        let c = ProblemConfig::from_toml(BASIC).unwrap();
        assert_eq!(c.options, ContinuationOptions::default());
        assert_eq!(c.arc().unwrap().vertices().len(), 3);
        assert_eq!(c.branch, Branch::Convention(BranchConvention::PrincipalPositiveReal));
    }

    #[test]
    fn dump_round_trips() {
        let text = format!(
            "{BASIC}seed = 7\nbranch = []\n[fiber]\npoly = \"3*z + w^2\"\nnu = \"1-0.25i\"\n[options]\norder = 20\n"
        );
        let c = ProblemConfig::from_toml(&text).unwrap();
        let again = ProblemConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.to_toml(), again.to_toml());
    }

    #[test]
    fn errors_name_the_field() {
        let e = ProblemConfig::from_toml("rhs = \"rad(1, w)\"\nw0 = 1.0\nz0 = 0.0").unwrap_err();
        assert!(e.to_string().contains("rad index must be ≥ 2"));
        assert!(e.to_string().contains("rhs"));
        let e = ProblemConfig::from_toml("rhs = \"w\"\nw0 = \"1+\"\nz0 = 0.0").unwrap_err();
        assert!(e.to_string().contains("w0"));
        let e = ProblemConfig::from_toml("rhs = \"w\"\nw0 = 1.0\nz0 = 0.0\narc = [\"1\", \"2\"]").unwrap_err();
        assert!(e.to_string().contains("arc"));
        let e = ProblemConfig::from_toml(&format!("{BASIC}[options]\nverdict_tol = -1.0")).unwrap_err();
        assert!(e.to_string().contains("options.verdict_tol"));
        let e = ProblemConfig::from_toml(&format!("{BASIC}bogus = 1")).unwrap_err();
        assert!(e.to_string().contains("bogus"));
    }
}
