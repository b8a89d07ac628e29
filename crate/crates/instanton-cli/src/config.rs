//! Flat JSON configuration, flag overrides and per-command parameter schemas.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::report::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    DoubleWell,
    Washboard,
    Charge,
    Flux,
    GlCpr,
    Wkb,
    Oracle,
    Sweep,
}

impl Command {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "double-well" => Command::DoubleWell,
            "washboard" => Command::Washboard,
            "charge" => Command::Charge,
            "flux" => Command::Flux,
            "gl-cpr" => Command::GlCpr,
            "wkb" => Command::Wkb,
            "oracle" => Command::Oracle,
            "sweep" => Command::Sweep,
            other => return Err(CliError::validation(format!("unknown command '{other}'"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Command::DoubleWell => "double-well",
            Command::Washboard => "washboard",
            Command::Charge => "charge",
            Command::Flux => "flux",
            Command::GlCpr => "gl-cpr",
            Command::Wkb => "wkb",
            Command::Oracle => "oracle",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Every key accepted in a config file or on the command line.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<String>,
    pub out: Option<PathBuf>,
    pub format: Option<Vec<Format>>,
    pub hbar: Option<f64>,
    pub ej: Option<f64>,
    pub ec: Option<f64>,
    pub el: Option<f64>,
    pub ie: Option<f64>,
    pub ic: Option<f64>,
    pub phi_e: Option<f64>,
    pub g: Option<f64>,
    #[serde(rename = "bigN")]
    pub big_n: Option<f64>,
    pub l_over_zeta: Option<f64>,
    pub temp_k: Option<f64>,
    pub with_gl_correction: Option<bool>,
    pub omega: Option<f64>,
    pub a: Option<f64>,
    pub n_max: Option<f64>,
    pub points: Option<f64>,
    pub levels: Option<f64>,
    pub cutoff: Option<f64>,
    pub theta_points: Option<f64>,
    pub delta_points: Option<f64>,
    pub homotopy_steps: Option<f64>,
    pub points_per_zeta: Option<f64>,
    pub drive: Option<f64>,
    pub duration: Option<f64>,
    pub samples: Option<f64>,
    pub sweep_command: Option<String>,
    pub sweep_param: Option<String>,
    pub sweep_from: Option<f64>,
    pub sweep_to: Option<f64>,
    pub sweep_steps: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::validation(format!("config {}: {e}", path.display())))
    }

    /// Fields set in `over` replace those in `self`.
    pub fn merge(self, over: FileConfig) -> FileConfig {
        macro_rules! pick {
            ($($f:ident),*) => { FileConfig { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(
            command, out, format, hbar, ej, ec, el, ie, ic, phi_e, g, big_n, l_over_zeta, temp_k,
            with_gl_correction, omega, a, n_max, points, levels, cutoff, theta_points, delta_points,
            homotopy_steps, points_per_zeta, drive, duration, samples, sweep_command, sweep_param,
            sweep_from, sweep_to, sweep_steps
        )
    }

    fn numeric(&self) -> BTreeMap<&'static str, Option<f64>> {
        BTreeMap::from([
            ("hbar", self.hbar),
            ("ej", self.ej),
            ("ec", self.ec),
            ("el", self.el),
            ("ie", self.ie),
            ("ic", self.ic),
            ("phi_e", self.phi_e),
            ("g", self.g),
            ("bigN", self.big_n),
            ("l_over_zeta", self.l_over_zeta),
            ("temp_k", self.temp_k),
            ("omega", self.omega),
            ("a", self.a),
            ("n_max", self.n_max),
            ("points", self.points),
            ("levels", self.levels),
            ("cutoff", self.cutoff),
            ("theta_points", self.theta_points),
            ("delta_points", self.delta_points),
            ("homotopy_steps", self.homotopy_steps),
            ("points_per_zeta", self.points_per_zeta),
            ("drive", self.drive),
            ("duration", self.duration),
            ("samples", self.samples),
        ])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Default_ {
    Required,
    Optional,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Real,
    Positive,
    Count { min: f64 },
}

struct Param {
    name: &'static str,
    default: Default_,
    kind: Kind,
}

const fn p(name: &'static str, default: Default_, kind: Kind) -> Param {
    Param { name, default, kind }
}

use Default_::{Optional, Required, Value};
use Kind::{Count, Positive, Real};

fn schema(cmd: Command) -> &'static [Param] {
    const DOUBLE_WELL: &[Param] = &[
        p("hbar", Value(0.1), Positive),
        p("g", Optional, Real),
        p("bigN", Optional, Count { min: 2.0 }),
        p("temp_k", Optional, Real),
        p("points", Value(4096.0), Count { min: 16.0 }),
    ];
    const WASHBOARD: &[Param] = &[
        p("ej", Required, Positive),
        p("ec", Required, Positive),
        p("ie", Required, Real),
        p("ic", Required, Positive),
        p("hbar", Optional, Positive),
        p("temp_k", Optional, Real),
        p("l_over_zeta", Optional, Positive),
        p("delta_points", Value(64.0), Count { min: 8.0 }),
        p("homotopy_steps", Value(100.0), Count { min: 10.0 }),
        p("points_per_zeta", Value(1024.0), Count { min: 32.0 }),
    ];
    const CHARGE: &[Param] = &[
        p("ej", Required, Positive),
        p("ec", Required, Positive),
        p("theta_points", Value(65.0), Count { min: 2.0 }),
        p("cutoff", Optional, Count { min: 1.0 }),
        p("temp_k", Optional, Real),
    ];
    const FLUX: &[Param] = &[
        p("ej", Required, Positive),
        p("ec", Required, Positive),
        p("el", Required, Positive),
        p("phi_e", Value(PI), Real),
        p("points", Value(4096.0), Count { min: 16.0 }),
        p("temp_k", Optional, Real),
    ];
    const GL_CPR: &[Param] = &[
        p("l_over_zeta", Required, Positive),
        p("delta_points", Value(64.0), Count { min: 8.0 }),
        p("homotopy_steps", Value(100.0), Count { min: 10.0 }),
        p("points_per_zeta", Value(1024.0), Count { min: 32.0 }),
    ];
    const WKB: &[Param] = &[
        p("hbar", Value(1.0), Positive),
        p("omega", Value(1.0), Positive),
        p("a", Optional, Positive),
        p("n_max", Value(1.0), Count { min: 1.0 }),
        p("points", Value(4096.0), Count { min: 16.0 }),
    ];
    const ORACLE: &[Param] = &[
        p("hbar", Value(0.1), Positive),
        p("omega", Value(1.0), Positive),
        p("a", Optional, Positive),
        p("points", Value(2048.0), Count { min: 16.0 }),
        p("levels", Value(4.0), Count { min: 2.0 }),
        p("drive", Value(0.0), Real),
        p("duration", Optional, Positive),
        p("samples", Value(401.0), Count { min: 2.0 }),
    ];
    match cmd {
        Command::DoubleWell => DOUBLE_WELL,
        Command::Washboard => WASHBOARD,
        Command::Charge => CHARGE,
        Command::Flux => FLUX,
        Command::GlCpr => GL_CPR,
        Command::Wkb => WKB,
        Command::Oracle => ORACLE,
        Command::Sweep => &[],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub command: Command,
    pub parameter: String,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.from];
        }
        let n = (self.steps - 1) as f64;
        (0..self.steps).map(|i| self.from + (self.to - self.from) * i as f64 / n).collect()
    }
}

/// Fully resolved and validated run description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    /// Parameters of the command (of the swept command for a sweep), defaults filled in.
    pub parameters: BTreeMap<String, f64>,
    pub with_gl_correction: bool,
    pub sweep: Option<SweepSpec>,
    pub formats: Vec<Format>,
    #[serde(skip)]
    pub out: PathBuf,
}

impl RunConfig {
    pub fn get(&self, k: &str) -> Option<f64> {
        self.parameters.get(k).copied()
    }

    pub fn req(&self, k: &str) -> f64 {
        self.parameters[k]
    }

    pub fn count(&self, k: &str) -> usize {
        self.parameters[k] as usize
    }

    /// Config of a single sweep point.
    pub fn at_point(&self, value: f64) -> RunConfig {
        let sw = self.sweep.as_ref().expect("sweep point of a non-sweep run");
        let mut c = self.clone();
        c.command = sw.command;
        c.sweep = None;
        c.parameters.insert(sw.parameter.clone(), value);
        c
    }
}

fn resolve_parameters(cmd: Command, fc: &FileConfig) -> Result<BTreeMap<String, f64>, CliError> {
    let sch = schema(cmd);
    let mut out = BTreeMap::new();
    for (k, v) in fc.numeric() {
        let Some(v) = v else { continue };
        let Some(param) = sch.iter().find(|p| p.name == k) else {
            return Err(CliError::validation(format!("parameter '{k}' is not used by '{}'", cmd.name())));
        };
        if !v.is_finite() {
            return Err(CliError::validation(format!("parameter '{k}' = {v} is not finite")));
        }
        match param.kind {
            Real => {}
            Positive if v > 0.0 => {}
            Positive => return Err(CliError::validation(format!("parameter '{k}' = {v} must be positive"))),
            Count { min } if v.fract() == 0.0 && v >= min => {}
            Count { min } => {
                return Err(CliError::validation(format!("parameter '{k}' = {v} must be an integer >= {min}")))
            }
        }
        out.insert(k.to_string(), v);
    }
    for param in sch {
        if out.contains_key(param.name) {
            continue;
        }
        match param.default {
            Required => {
                return Err(CliError::validation(format!("'{}' needs parameter '{}'", cmd.name(), param.name)))
            }
            Optional => {}
            Value(v) => {
                out.insert(param.name.to_string(), v);
            }
        }
    }
    Ok(out)
}

fn resolve_sweep(fc: &FileConfig) -> Result<(Command, SweepSpec), CliError> {
    let target = Command::parse(
        fc.sweep_command.as_deref().ok_or_else(|| CliError::validation("sweep needs 'sweep_command'"))?,
    )?;
    if target == Command::Sweep {
        return Err(CliError::validation("a sweep cannot sweep another sweep"));
    }
    let parameter = fc.sweep_param.clone().ok_or_else(|| CliError::validation("sweep needs 'sweep_param'"))?;
    if !schema(target).iter().any(|p| p.name == parameter) {
        return Err(CliError::validation(format!("'{}' has no parameter '{parameter}' to sweep", target.name())));
    }
    let from = fc.sweep_from.ok_or_else(|| CliError::validation("sweep needs 'sweep_from'"))?;
    let to = fc.sweep_to.ok_or_else(|| CliError::validation("sweep needs 'sweep_to'"))?;
    let steps = fc.sweep_steps.unwrap_or(0.0);
    if !(from.is_finite() && to.is_finite()) {
        return Err(CliError::validation(format!("sweep range [{from}, {to}] is not finite")));
    }
    if steps < 1.0 || steps.fract() != 0.0 {
        return Err(CliError::validation(format!("sweep range is empty: {steps} steps")));
    }
    if steps > 1.0 && from == to {
        return Err(CliError::validation(format!("sweep range is empty: from = to = {from}")));
    }
    Ok((target, SweepSpec { command: target, parameter, from, to, steps: steps as usize }))
}

pub fn resolve(fc: FileConfig) -> Result<RunConfig, CliError> {
    let command = Command::parse(fc.command.as_deref().ok_or_else(|| CliError::validation("no command given"))?)?;
    let sweep_keys = fc.sweep_command.is_some()
        || fc.sweep_param.is_some()
        || fc.sweep_from.is_some()
        || fc.sweep_to.is_some()
        || fc.sweep_steps.is_some();
    let (target, sweep) = if command == Command::Sweep {
        let (t, s) = resolve_sweep(&fc)?;
        (t, Some(s))
    } else {
        if sweep_keys {
            return Err(CliError::validation(format!("sweep keys given to '{}'", command.name())));
        }
        (command, None)
    };
    let mut parameters = resolve_parameters(target, &fc)?;
    if let Some(s) = &sweep {
        parameters.insert(s.parameter.clone(), s.from);
    }
    let with_gl_correction = fc.with_gl_correction.unwrap_or(false);
    if with_gl_correction {
        if target != Command::Washboard {
            return Err(CliError::validation("'with_gl_correction' applies to washboard only"));
        }
        if !parameters.contains_key("l_over_zeta") {
            return Err(CliError::validation("'with_gl_correction' needs 'l_over_zeta'"));
        }
    } else if target == Command::Washboard && parameters.contains_key("l_over_zeta") {
        return Err(CliError::validation("'l_over_zeta' is only used with 'with_gl_correction'"));
    }
    if target == Command::DoubleWell && parameters.contains_key("bigN") && !parameters.contains_key("g") {
        return Err(CliError::validation("'bigN' needs 'g'"));
    }
    let mut formats = fc.format.unwrap_or_else(|| vec![Format::Json, Format::Csv]);
    formats.sort();
    formats.dedup();
    if formats.is_empty() {
        return Err(CliError::validation("no output format selected"));
    }
    let out = fc.out.ok_or_else(|| CliError::validation("no output directory given ('out')"))?;
    Ok(RunConfig { command, parameters, with_gl_correction, sweep, formats, out })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(cmd: &str) -> FileConfig {
        FileConfig { command: Some(cmd.into()), out: Some("o".into()), ..Default::default() }
    }

    #[test]
    fn defaults_fill_in() {
        let c = resolve(base("double-well")).unwrap();
        assert_eq!(c.get("hbar"), Some(0.1));
        assert_eq!(c.formats, vec![Format::Json, Format::Csv]);
    }

    #[test]
    fn foreign_key_rejected() {
        let fc = FileConfig { ej: Some(1.0), ..base("double-well") };
        assert!(resolve(fc).is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = FileConfig { hbar: Some(0.2), ..base("double-well") };
        let flags = FileConfig { hbar: Some(0.05), ..Default::default() };
        assert_eq!(resolve(file.merge(flags)).unwrap().get("hbar"), Some(0.05));
    }

    #[test]
    fn empty_sweep_rejected() {
        let fc = FileConfig {
            sweep_command: Some("double-well".into()),
            sweep_param: Some("hbar".into()),
            sweep_from: Some(0.1),
            sweep_to: Some(0.2),
            sweep_steps: Some(0.0),
            ..base("sweep")
        };
        assert!(resolve(fc).is_err());
    }

    #[test]
    fn sweep_values_inclusive() {
        let s = SweepSpec { command: Command::Wkb, parameter: "hbar".into(), from: 1.0, to: 2.0, steps: 5 };
        assert_eq!(s.values(), vec![1.0, 1.25, 1.5, 1.75, 2.0]);
    }
}
