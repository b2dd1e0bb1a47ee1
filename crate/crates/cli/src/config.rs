//! Typed run configuration and its validation.

use std::collections::BTreeSet;
use std::path::PathBuf;

use kpplab_core::dynamics::{stability_bound, Scheme, Stepping};
use kpplab_core::experiments::Clause;
use kpplab_core::{
    BaseGrowth, Boundary, Direction, DispersalOp, Habitat, Kernel, KernelProfile,
    LatticeWeights, Reaction,
};

use crate::error::CliError;
use crate::ini::{field_path, Document, Entry, Section};

/// Experiments a config can name in `[experiment] name`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentName {
    FrontSpeed,
    AmplitudeSweep,
    SpreadingFeatures,
    Stationary,
    Comparison,
    DispersionCurve,
    Speed,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 7] = [
        ExperimentName::FrontSpeed,
        ExperimentName::AmplitudeSweep,
        ExperimentName::SpreadingFeatures,
        ExperimentName::Stationary,
        ExperimentName::Comparison,
        ExperimentName::DispersionCurve,
        ExperimentName::Speed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentName::FrontSpeed => "front-speed",
            ExperimentName::AmplitudeSweep => "amplitude-sweep",
            ExperimentName::SpreadingFeatures => "spreading-features",
            ExperimentName::Stationary => "stationary",
            ExperimentName::Comparison => "comparison",
            ExperimentName::DispersionCurve => "dispersion-curve",
            ExperimentName::Speed => "speed",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ExperimentName::FrontSpeed => {
                "front data along a direction; fitted level-set speed vs c* and cone checks"
            }
            ExperimentName::AmplitudeSweep => {
                "front runs over several perturbation amplitudes; speeds must not depend on A"
            }
            ExperimentName::SpreadingFeatures => {
                "compactly supported data; extinction/convergence regions on strips and balls"
            }
            ExperimentName::Stationary => {
                "positive stationary state from above and below, tail and stability checks"
            }
            ExperimentName::Comparison => "seeded ordered pairs of initial data; order must persist",
            ExperimentName::DispersionCurve => {
                "principal eigenvalue lambda(mu) on a periodic cell vs the averaged closed form"
            }
            ExperimentName::Speed => "theoretical spreading speed from the dispersion relation",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == s)
    }

    /// Whether the experiment integrates in time and so needs `[solver]`.
    pub fn needs_solver(self) -> bool {
        matches!(
            self,
            ExperimentName::FrontSpeed
                | ExperimentName::AmplitudeSweep
                | ExperimentName::SpreadingFeatures
                | ExperimentName::Comparison
        )
    }

    pub fn required_sections(self) -> Vec<&'static str> {
        let mut s = vec!["habitat", "reaction", "dispersal"];
        if self.needs_solver() {
            s.push("solver");
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expectation {
    Pass,
    Fail,
}

/// Coefficient of the periodic cell problem in `dispersion-curve`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientSource {
    /// `f0(0)` everywhere.
    Constant,
    /// Periodic minorant of the reaction at zero.
    Minorant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub stepping: Stepping<f64>,
    pub t_final: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: ExperimentName,
    pub direction: Direction<f64>,
    pub level: f64,
    pub burn_in: f64,
    pub margin: f64,
    pub control_scale: f64,
    pub expect: Expectation,
    pub amplitudes: Vec<f64>,
    pub clauses: Vec<Clause>,
    pub plateau_radius: f64,
    pub plateau_height: Option<f64>,
    pub tail_radius: Option<f64>,
    pub tail_tol: f64,
    pub agreement_tol: f64,
    pub perturbations: usize,
    pub horizon: f64,
    pub pairs: usize,
    pub mu_min: f64,
    pub mu_max: f64,
    pub mu_points: usize,
    pub coefficient: CoefficientSource,
    pub minorant_eps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub directory: Option<PathBuf>,
    pub csv: bool,
    pub json: bool,
    pub trajectory: bool,
}

/// A validated config file.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub habitat: Habitat<f64>,
    pub reaction: Reaction<f64>,
    pub dispersal: DispersalOp<f64>,
    pub solver: SolverConfig,
    pub experiment: ExperimentConfig,
    pub output: OutputConfig,
    /// Raw text the config was parsed from.
    pub source: String,
}

const KEYS: &[(&str, &[&str])] = &[
    ("", &["seed"]),
    ("habitat", &["kind", "dim", "L", "h", "boundary"]),
    ("reaction", &["family", "r0", "b", "K", "A", "L0"]),
    ("dispersal", &["kind", "profile", "delta0", "rates"]),
    ("solver", &["scheme", "dt", "T", "record_every"]),
    (
        "experiment",
        &[
            "name",
            "direction",
            "level",
            "burn_in",
            "margin",
            "control_scale",
            "expect",
            "amplitudes",
            "clauses",
            "plateau_radius",
            "plateau_height",
            "tail_radius",
            "tail_tol",
            "agreement_tol",
            "perturbations",
            "horizon",
            "pairs",
            "mu_min",
            "mu_max",
            "mu_points",
            "coefficient",
            "minorant_eps",
        ],
    ),
    ("output", &["directory", "formats"]),
];

/// Typed view of one section; every lookup knows its line.
struct Fields<'a> {
    name: &'a str,
    section: Option<&'a Section>,
}

impl<'a> Fields<'a> {
    fn new(doc: &'a Document, name: &'a str) -> Self {
        Self {
            name,
            section: doc.section(name),
        }
    }

    fn path(&self, key: &str) -> String {
        field_path(self.name, key)
    }

    fn entry(&self, key: &str) -> Option<&'a Entry> {
        self.section.and_then(|s| s.entries.get(key))
    }

    fn header_line(&self) -> usize {
        self.section.map_or(0, |s| s.line)
    }

    fn err(&self, key: &str, message: impl std::fmt::Display) -> CliError {
        match self.entry(key) {
            Some(e) => CliError::schema_at(e.line, &self.path(key), message),
            None => CliError::schema(&self.path(key), message),
        }
    }

    /// Error on the section as a whole, pointing at its header.
    fn err_section(&self, message: impl std::fmt::Display) -> CliError {
        if self.header_line() > 0 {
            CliError::schema_at(self.header_line(), self.name, message)
        } else {
            CliError::schema(self.name, message)
        }
    }

    fn parse<V: std::str::FromStr>(&self, key: &str, what: &str) -> Result<Option<V>, CliError> {
        match self.entry(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse()
                .map(Some)
                .map_err(|_| self.err(key, format!("expected {what}, found `{}`", e.value))),
        }
    }

    fn required<V: std::str::FromStr>(&self, key: &str, what: &str) -> Result<V, CliError> {
        self.parse(key, what)?
            .ok_or_else(|| self.err(key, format!("missing required key ({what})")))
    }

    fn number(&self, key: &str) -> Result<Option<f64>, CliError> {
        let v: Option<f64> = self.parse(key, "a number")?;
        match v {
            Some(x) if !x.is_finite() => Err(self.err(key, "must be finite")),
            v => Ok(v),
        }
    }

    fn positive(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.number(key)? {
            Some(x) if x <= 0.0 => Err(self.err(key, format!("must be positive, found {x}"))),
            v => Ok(v),
        }
    }

    fn count(&self, key: &str) -> Result<Option<usize>, CliError> {
        self.parse(key, "a nonnegative integer")
    }

    fn choice(&self, key: &str, options: &[&str]) -> Result<Option<&'a str>, CliError> {
        match self.entry(key) {
            None => Ok(None),
            Some(e) if options.contains(&e.value.as_str()) => Ok(Some(e.value.as_str())),
            Some(e) => Err(self.err(
                key,
                format!("unknown value `{}`; expected one of {}", e.value, options.join(", ")),
            )),
        }
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        let Some(e) = self.entry(key) else {
            return Ok(None);
        };
        e.value
            .split(',')
            .map(|s| {
                let s = s.trim();
                s.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| self.err(key, format!("expected a comma-separated list of numbers, found `{s}`")))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }
}

fn check_known_keys(doc: &Document) -> Result<(), CliError> {
    for (name, section) in &doc.sections {
        let Some((_, keys)) = KEYS.iter().find(|(s, _)| s == name) else {
            let known: Vec<_> = KEYS.iter().filter(|(s, _)| !s.is_empty()).map(|(s, _)| *s).collect();
            return Err(CliError::schema_at(
                section.line,
                name,
                format!("unknown section; expected one of {}", known.join(", ")),
            ));
        };
        for (key, entry) in &section.entries {
            if !keys.contains(&key.as_str()) {
                return Err(CliError::schema_at(
                    entry.line,
                    &field_path(name, key),
                    format!("unknown key; expected one of {}", keys.join(", ")),
                ));
            }
        }
    }
    Ok(())
}

fn parse_habitat(f: &Fields) -> Result<Habitat<f64>, CliError> {
    let kind = f.choice("kind", &["continuum", "lattice"])?.unwrap_or("continuum");
    let dim: usize = f.required("dim", "1 or 2")?;
    if !(1..=2).contains(&dim) {
        return Err(f.err("dim", format!("must be 1 or 2, found {dim}")));
    }
    let boundary = match f.choice("boundary", &["clamp", "periodic"])?.unwrap_or("clamp") {
        "periodic" => Boundary::PeriodicExtension,
        _ => Boundary::ClampToConstant,
    };
    let built = if kind == "lattice" {
        if f.entry("h").is_some() {
            return Err(f.err("h", "the lattice has unit spacing; remove this key"));
        }
        let half: usize = f.required("L", "a positive integer number of sites")?;
        Habitat::lattice(dim, half, boundary)
    } else {
        let half = f.positive("L")?.ok_or_else(|| f.err("L", "missing required key (half extent)"))?;
        let h = f.positive("h")?.ok_or_else(|| f.err("h", "missing required key (grid spacing)"))?;
        Habitat::continuum(dim, half, h, boundary)
    };
    built.map_err(|e| f.err_section(e))
}

fn parse_reaction(f: &Fields) -> Result<Reaction<f64>, CliError> {
    let r0 = f.positive("r0")?.ok_or_else(|| f.err("r0", "missing required key (growth rate at zero)"))?;
    let base = match f.choice("family", &["linear", "logistic"])?.unwrap_or("linear") {
        "logistic" => {
            if f.entry("b").is_some() {
                return Err(f.err("b", "logistic growth takes K, not b"));
            }
            let capacity = f.positive("K")?.unwrap_or(1.0);
            BaseGrowth::Logistic { r0, capacity }
        }
        _ => {
            if f.entry("K").is_some() {
                return Err(f.err("K", "linear growth takes b, not K"));
            }
            let b = f.positive("b")?.unwrap_or(1.0);
            BaseGrowth::Linear { r0, b }
        }
    };
    let amplitude = f.number("A")?.unwrap_or(0.0);
    let radius = f.positive("L0")?.unwrap_or(1.0);
    Reaction::new(base, amplitude, radius).map_err(|e| f.err_section(e))
}

fn parse_dispersal(f: &Fields, habitat: &Habitat<f64>) -> Result<DispersalOp<f64>, CliError> {
    let kind = f
        .choice("kind", &["random", "nonlocal", "discrete"])?
        .ok_or_else(|| f.err("kind", "missing required key (random, nonlocal or discrete)"))?;
    for (key, owner) in [("profile", "nonlocal"), ("delta0", "nonlocal"), ("rates", "discrete")] {
        if kind != owner && f.entry(key).is_some() {
            return Err(f.err(key, format!("only meaningful for kind = {owner}")));
        }
    }
    let op = match kind {
        "nonlocal" => {
            let profile = match f.choice("profile", &["uniform", "tent", "bump"])?.unwrap_or("bump") {
                "uniform" => KernelProfile::Uniform,
                "tent" => KernelProfile::Tent,
                _ => KernelProfile::Bump,
            };
            let delta0 = f.positive("delta0")?.unwrap_or(1.0);
            let kernel = Kernel::new(profile, delta0, habitat.dim(), habitat.spacing())
                .map_err(|e| f.err("delta0", e))?;
            DispersalOp::Nonlocal(kernel)
        }
        "discrete" => {
            let rates = f.list("rates")?.unwrap_or_else(|| vec![1.0]);
            let weights = if rates.len() == 1 {
                LatticeWeights::uniform(habitat.dim(), rates[0])
            } else {
                LatticeWeights::new(habitat.dim(), rates)
            };
            DispersalOp::Discrete(weights.map_err(|e| f.err("rates", e))?)
        }
        _ => DispersalOp::Random,
    };
    op.check_habitat(habitat).map_err(|e| f.err("kind", e))?;
    Ok(op)
}

fn parse_solver(f: &Fields) -> Result<SolverConfig, CliError> {
    let scheme = match f.choice("scheme", &["rk4", "euler"])?.unwrap_or("rk4") {
        "euler" => Scheme::ExplicitEuler,
        _ => Scheme::Rk4,
    };
    let dt = match f.entry("dt").map(|e| e.value.as_str()) {
        None | Some("auto") => None,
        Some(_) => {
            let dt = f.positive("dt")?.expect("entry present");
            let n = (1.0 / dt).round();
            if (n * dt - 1.0).abs() > 1e-9 {
                return Err(f.err("dt", format!("must be of the form 1/n, found {dt}")));
            }
            Some(1.0 / n)
        }
    };
    let record_every = match f.entry("record_every").map(|e| e.value.as_str()) {
        None | Some("auto") => None,
        Some(_) => match f.count("record_every")? {
            Some(0) => return Err(f.err("record_every", "must be at least 1")),
            v => v,
        },
    };
    Ok(SolverConfig {
        stepping: Stepping {
            dt,
            record_every,
            scheme,
        },
        t_final: f.positive("T")?,
    })
}

fn parse_direction(f: &Fields, dim: usize) -> Result<Direction<f64>, CliError> {
    let Some(v) = f.list("direction")? else {
        return Ok(Direction::positive_x());
    };
    let point = match (dim, v.as_slice()) {
        (1, [x]) | (1, [x, 0.0]) => [*x, 0.0],
        (2, [x, y]) => [*x, *y],
        _ => {
            return Err(f.err(
                "direction",
                format!("expected {dim} component(s), found {}", v.len()),
            ))
        }
    };
    let xi = Direction::new(point).map_err(|e| f.err("direction", e))?;
    if dim == 1 && xi.components()[0].abs() != 1.0 {
        return Err(f.err("direction", "in 1-D the direction is 1 or -1"));
    }
    Ok(xi)
}

fn fraction(f: &Fields, key: &str, default: f64, closed_low: bool) -> Result<f64, CliError> {
    let v = f.number(key)?.unwrap_or(default);
    let low_ok = if closed_low { v >= 0.0 } else { v > 0.0 };
    if !(low_ok && v < 1.0) {
        let lo = if closed_low { "[0" } else { "(0" };
        return Err(f.err(key, format!("must lie in {lo}, 1), found {v}")));
    }
    Ok(v)
}

fn parse_experiment(f: &Fields, dim: usize, name: ExperimentName) -> Result<ExperimentConfig, CliError> {
    let expect = match f.choice("expect", &["pass", "fail"])?.unwrap_or("pass") {
        "fail" => Expectation::Fail,
        _ => Expectation::Pass,
    };
    let clauses = match f.list("clauses")? {
        None => Clause::ALL.to_vec(),
        Some(v) => {
            let mut seen = BTreeSet::new();
            let mut out = Vec::new();
            for n in v {
                let c = (n.fract() == 0.0 && n >= 1.0)
                    .then(|| Clause::from_number(n as usize))
                    .flatten()
                    .ok_or_else(|| f.err("clauses", format!("clauses are numbered 1 to 4, found {n}")))?;
                if seen.insert(c.number()) {
                    out.push(c);
                }
            }
            out
        }
    };
    let amplitudes = f
        .list("amplitudes")?
        .unwrap_or_else(|| kpplab_core::experiments::DEFAULT_AMPLITUDES.to_vec());
    if amplitudes.is_empty() {
        return Err(f.err("amplitudes", "needs at least one value"));
    }
    let mu_min = f.positive("mu_min")?.unwrap_or(0.05);
    let mu_max = f.positive("mu_max")?.unwrap_or(5.0);
    if mu_max <= mu_min {
        return Err(f.err("mu_max", format!("must exceed mu_min = {mu_min}")));
    }
    let mu_points = f.count("mu_points")?.unwrap_or(40);
    if mu_points < 2 {
        return Err(f.err("mu_points", "needs at least 2 points"));
    }
    let coefficient = match f.choice("coefficient", &["constant", "minorant"])?.unwrap_or("constant") {
        "minorant" => CoefficientSource::Minorant,
        _ => CoefficientSource::Constant,
    };
    let pairs = f.count("pairs")?.unwrap_or(10);
    if pairs == 0 {
        return Err(f.err("pairs", "needs at least one pair"));
    }
    Ok(ExperimentConfig {
        name,
        direction: parse_direction(f, dim)?,
        level: fraction(f, "level", 0.5, false)?,
        burn_in: fraction(f, "burn_in", kpplab_core::experiments::DEFAULT_BURN_IN, true)?,
        margin: fraction(f, "margin", kpplab_core::experiments::DEFAULT_MARGIN, true)?,
        control_scale: f.positive("control_scale")?.unwrap_or(1.0),
        expect,
        amplitudes,
        clauses,
        plateau_radius: f.positive("plateau_radius")?.unwrap_or(5.0),
        plateau_height: f.positive("plateau_height")?,
        tail_radius: f.positive("tail_radius")?,
        tail_tol: f.positive("tail_tol")?.unwrap_or(0.01),
        agreement_tol: f.positive("agreement_tol")?.unwrap_or(1e-6),
        perturbations: f.count("perturbations")?.unwrap_or(3),
        horizon: f.positive("horizon")?.unwrap_or(kpplab_core::stationary::STABILITY_HORIZON),
        pairs,
        mu_min,
        mu_max,
        mu_points,
        coefficient,
        minorant_eps: f.positive("minorant_eps")?.unwrap_or(0.05),
    })
}

fn parse_output(f: &Fields) -> Result<OutputConfig, CliError> {
    let mut out = OutputConfig {
        directory: f.entry("directory").map(|e| PathBuf::from(&e.value)),
        csv: true,
        json: true,
        trajectory: false,
    };
    if let Some(e) = f.entry("formats") {
        out.csv = false;
        out.json = false;
        for item in e.value.split(',').map(str::trim) {
            match item {
                "csv" => out.csv = true,
                "json" => out.json = true,
                "trajectory" => out.trajectory = true,
                other => {
                    return Err(f.err(
                        "formats",
                        format!("unknown format `{other}`; expected csv, json or trajectory"),
                    ))
                }
            }
        }
    }
    Ok(out)
}

impl RunConfig {
    /// Parses and validates `text`. `forced` replaces `[experiment] name`
    /// (used by the `speed`, `eigen` and `stationary` subcommands, for which
    /// the experiment block is optional).
    pub fn from_text(text: &str, forced: Option<ExperimentName>) -> Result<Self, CliError> {
        let doc = Document::parse(text)?;
        check_known_keys(&doc)?;
        if forced.is_none() && !doc.has_section("experiment") {
            return Err(CliError::schema("experiment", "missing section [experiment]"));
        }
        let exp_fields = Fields::new(&doc, "experiment");
        let name = match forced {
            Some(n) => n,
            None => match exp_fields.entry("name") {
                Some(e) => ExperimentName::from_name(&e.value).ok_or_else(|| {
                    let names: Vec<_> = ExperimentName::ALL.iter().map(|n| n.name()).collect();
                    exp_fields.err(
                        "name",
                        format!("unknown experiment `{}`; expected one of {}", e.value, names.join(", ")),
                    )
                })?,
                None => return Err(exp_fields.err("name", "missing required key (experiment name)")),
            },
        };
        for section in name.required_sections() {
            if !doc.has_section(section) {
                return Err(CliError::schema(
                    section,
                    format!("missing section [{section}] required by experiment {}", name.name()),
                ));
            }
        }

        let top = Fields::new(&doc, "");
        let seed = top.parse("seed", "a nonnegative integer")?.unwrap_or(0);
        let habitat = parse_habitat(&Fields::new(&doc, "habitat"))?;
        let reaction = parse_reaction(&Fields::new(&doc, "reaction"))?;
        let dispersal = parse_dispersal(&Fields::new(&doc, "dispersal"), &habitat)?;
        let solver_fields = Fields::new(&doc, "solver");
        let solver = parse_solver(&solver_fields)?;
        let experiment = parse_experiment(&exp_fields, habitat.dim(), name)?;
        if name.needs_solver() && solver.t_final.is_none() {
            return Err(solver_fields.err("T", "missing required key (final time)"));
        }
        let cfg = RunConfig {
            seed,
            habitat,
            reaction,
            dispersal,
            solver,
            experiment,
            output: parse_output(&Fields::new(&doc, "output"))?,
            source: text.to_string(),
        };
        cfg.check_time_step(&solver_fields)?;
        Ok(cfg)
    }

    /// Largest value any run of this config starts from.
    pub fn initial_ceiling(&self) -> f64 {
        let beta0 = self.reaction.beta0(&self.habitat);
        let plateau = self.experiment.plateau_height.unwrap_or(0.0);
        (beta0 + 1.0).max(plateau)
    }

    pub fn stability_bound(&self) -> f64 {
        stability_bound(&self.dispersal, &self.reaction, &self.habitat, self.initial_ceiling())
    }

    fn check_time_step(&self, f: &Fields) -> Result<(), CliError> {
        if let Some(dt) = self.solver.stepping.dt {
            let bound = self.stability_bound();
            if dt > bound {
                return Err(f.err(
                    "dt",
                    format!("{dt} exceeds the stability bound {bound:.6e} for this habitat, reaction and dispersal"),
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FISHER: &str = "\
seed = 1
[habitat]
dim = 1
L = 20
h = 0.1
[reaction]
r0 = 1
[dispersal]
kind = random
[solver]
T = 10
[experiment]
name = front-speed
";

    fn message(text: &str) -> String {
        RunConfig::from_text(text, None).unwrap_err().to_string()
    }

    #[test]
    fn parses_minimal_config() {
        let cfg = RunConfig::from_text(FISHER, None).unwrap();
        assert_eq!(cfg.seed, 1);
        assert_eq!(cfg.habitat.len(), 401);
        assert_eq!(cfg.reaction.base_rate(), 1.0);
        assert_eq!(cfg.experiment.name, ExperimentName::FrontSpeed);
        assert_eq!(cfg.solver.t_final, Some(10.0));
        assert!(cfg.output.csv && cfg.output.json && !cfg.output.trajectory);
    }

    #[test]
    fn missing_block_names_the_path() {
        let text = FISHER.replace("[dispersal]\nkind = random\n", "");
        let m = message(&text);
        assert!(m.contains("dispersal") && m.contains("missing section"), "{m}");
    }

    #[test]
    fn errors_carry_lines() {
        let m = message(&FISHER.replace("h = 0.1", "h = fast"));
        assert!(m.contains("habitat.h (line 5)"), "{m}");
        let m = message(&FISHER.replace("kind = random", "kind = brownian"));
        assert!(m.contains("dispersal.kind (line 9)"), "{m}");
        let m = message(&FISHER.replace("T = 10", "T = 10\nstep = 1"));
        assert!(m.contains("solver.step (line 12)"), "{m}");
        let m = message(&FISHER.replace("L = 20", "L = 20.05"));
        assert!(m.contains("habitat (line 2)"), "{m}");
    }

    #[test]
    fn time_step_precheck() {
        let m = message(&FISHER.replace("T = 10", "T = 10\ndt = 0.5"));
        assert!(m.contains("solver.dt") && m.contains("stability bound"), "{m}");
        let m = message(&FISHER.replace("T = 10", "T = 10\ndt = 0.003"));
        assert!(m.contains("1/n"), "{m}");
        let cfg = RunConfig::from_text(&FISHER.replace("T = 10", "T = 10\ndt = 0.0025"), None).unwrap();
        assert_eq!(cfg.solver.stepping.dt, Some(0.0025));
    }

    #[test]
    fn solver_required_only_when_evolving() {
        let text = FISHER.replace("[solver]\nT = 10\n", "");
        assert!(message(&text).contains("[solver]"));
        assert!(RunConfig::from_text(&text, Some(ExperimentName::Speed)).is_ok());
        let text = FISHER.replace("[experiment]\nname = front-speed\n", "");
        assert!(message(&text).contains("[experiment]"));
        assert!(RunConfig::from_text(&text, Some(ExperimentName::Stationary)).is_ok());
    }

    #[test]
    fn dispersal_variants() {
        let text = FISHER.replace("kind = random", "kind = nonlocal\nprofile = tent\ndelta0 = 2");
        let cfg = RunConfig::from_text(&text, None).unwrap();
        let k = cfg.dispersal.kernel().unwrap();
        assert_eq!((k.profile(), k.radius()), (KernelProfile::Tent, 2.0));
        let text = FISHER
            .replace("L = 20\nh = 0.1", "kind = lattice\nL = 30")
            .replace("kind = random", "kind = discrete\nrates = 1, 2");
        let cfg = RunConfig::from_text(&text, None).unwrap();
        assert!(matches!(cfg.dispersal, DispersalOp::Discrete(_)));
        let m = message(&FISHER.replace("kind = random", "kind = random\nrates = 1"));
        assert!(m.contains("dispersal.rates"), "{m}");
        let m = message(&FISHER.replace("kind = random", "kind = discrete"));
        assert!(m.contains("dispersal.kind"), "{m}");
    }

    #[test]
    fn experiment_parameters() {
        let text = FISHER.replace(
            "name = front-speed",
            "name = spreading-features\nclauses = 3, 1, 3\nexpect = fail\ndirection = -1",
        );
        let cfg = RunConfig::from_text(&text, None).unwrap();
        let e = &cfg.experiment;
        assert_eq!(e.clauses, vec![Clause::BallExtinction, Clause::StripExtinction]);
        assert_eq!(e.expect, Expectation::Fail);
        assert_eq!(e.direction, Direction::negative_x());
        assert!(message(&FISHER.replace("front-speed", "front-speed\nclauses = 5")).contains("experiment.clauses"));
        assert!(message(&FISHER.replace("front-speed", "front-speed\ndirection = 1, 1")).contains("direction"));
        assert!(message(&FISHER.replace("front-speed", "front-speed\nlevel = 1.5")).contains("experiment.level"));
        assert!(message(&FISHER.replace("front-speed", "warp")).contains("unknown experiment"));
    }
}
