//! Batch command layer: density tabulation, simulation, and validation
//! as reproducible file-producing commands.
//!
//! Every command is a pure function of its flags plus an optional TOML
//! config file (path from `--config` or the `SKEW_FRICTION_CONFIG`
//! environment variable). Precedence is flags > file > defaults, and
//! the resolved values are echoed into the output metadata. Payloads
//! contain no timestamps; wall-clock time goes to a `.meta.json`
//! sidecar so that re-runs produce byte-identical primary outputs.

use crate::analytic::{self, OccupationForm};
use crate::error::{Error, Result};
use crate::grid::{Axis, DensityGrid};
use crate::model::ModelParams;
use crate::quadrature::{self, EndpointStrategy, QuadratureSpec};
use crate::simulate::{self, EmpiricalSummary, LatticeConfig};
use crate::validate::{self, Profile, ValidationReport};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const CONFIG_ENV: &str = "SKEW_FRICTION_CONFIG";

#[derive(Debug, Parser)]
#[command(name = "skew-friction", version, about = "Densities and Monte Carlo for skew Brownian motion with dry friction")]
pub struct Cli {
    /// TOML config file; flags override its values
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pdf2Choice {
    Corrected,
    Verbatim,
}

impl From<Pdf2Choice> for OccupationForm {
    fn from(c: Pdf2Choice) -> Self {
        match c {
            Pdf2Choice::Corrected => OccupationForm::Corrected,
            Pdf2Choice::Verbatim => OccupationForm::Verbatim,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileChoice {
    Ci,
    Full,
}

/// Flags shared by all subcommands. Unset flags fall back to the config
/// file, then to defaults.
#[derive(Debug, Clone, Args)]
pub struct CommonOpts {
    /// Skew parameter, in (0, 1)
    #[arg(long)]
    pub p: Option<f64>,
    /// Friction level m >= 0
    #[arg(long)]
    pub m: Option<f64>,
    /// Time horizon T > 0
    #[arg(long = "T")]
    pub horizon: Option<f64>,
    /// Lattice spacing for simulation
    #[arg(long)]
    pub delta: Option<f64>,
    /// Number of Monte Carlo paths
    #[arg(long)]
    pub paths: Option<u64>,
    /// Base RNG seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Quadrature relative tolerance; for `validate`, a scale applied
    /// to every check threshold
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output format
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Output file; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Which closed form of the occupation/local-time joint to use
    #[arg(long, value_enum)]
    pub pdf2: Option<Pdf2Choice>,
    /// Check battery profile for `validate`
    #[arg(long, value_enum)]
    pub profile: Option<ProfileChoice>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum JointWhich {
    #[value(name = "tau_v_x_l")]
    TauVXL,
    #[value(name = "tau_x_l")]
    TauXL,
    #[value(name = "x_l")]
    XL,
    #[value(name = "tau_u_x_l")]
    TauUXL,
    #[value(name = "u_x_l")]
    UXL,
    #[value(name = "u_l")]
    UL,
}

impl JointWhich {
    fn name(self) -> &'static str {
        match self {
            JointWhich::TauVXL => "tau_v_x_l",
            JointWhich::TauXL => "tau_x_l",
            JointWhich::XL => "x_l",
            JointWhich::TauUXL => "tau_u_x_l",
            JointWhich::UXL => "u_x_l",
            JointWhich::UL => "u_l",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFunction {
    Density,
    Cdf,
    Occupation,
    LocalTime,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the marginal density and CDF of X_T over an x-grid
    Density {
        #[command(flatten)]
        common: CommonOpts,
        /// x-grid as min:max:count
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
    },
    /// Tabulate the occupation-time density over a u-grid inside (0, T)
    Occupation {
        #[command(flatten)]
        common: CommonOpts,
        /// u-grid as min:max:count
        #[arg(long)]
        grid: Option<String>,
    },
    /// Tabulate a joint density slice over the first two variables of
    /// its name; the remaining variables are fixed by flags
    Joint {
        #[command(flatten)]
        common: CommonOpts,
        /// Which joint law to slice
        #[arg(long, value_enum)]
        which: JointWhich,
        /// Grid as min:max:count for 1 axis or min:max:count,min:max:count for 2
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        /// Fixed terminal position for slices that do not tabulate x
        #[arg(long, allow_hyphen_values = true)]
        x: Option<f64>,
        /// Fixed local time for slices that do not tabulate l
        #[arg(long, allow_hyphen_values = true)]
        l: Option<f64>,
    },
    /// Run the lattice Monte Carlo and write the empirical summary
    Simulate {
        #[command(flatten)]
        common: CommonOpts,
        /// Also dump one CSV row of functionals per path to this file
        #[arg(long)]
        dump_paths: Option<PathBuf>,
    },
    /// Run the check battery and write a validation report
    Validate {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Generic grid dumper for the scalar laws
    Table {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, value_enum)]
        function: TableFunction,
        /// Grid as min:max:count
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
    },
}

/// Optional values loaded from the TOML config file; every field can be
/// overridden by a flag.
#[derive(Debug, Default, Clone, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub lattice: LatticeSection,
    #[serde(default)]
    pub quadrature: QuadratureSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub validate: ValidateSection,
}

#[derive(Debug, Default, Clone, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub p: Option<f64>,
    pub m: Option<f64>,
    #[serde(rename = "T")]
    pub horizon: Option<f64>,
}

#[derive(Debug, Default, Clone, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    pub delta: Option<f64>,
    pub paths: Option<u64>,
    pub seed: Option<u64>,
    pub epsilon_factor: Option<u32>,
}

#[derive(Debug, Default, Clone, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    pub tol: Option<f64>,
}

#[derive(Debug, Default, Clone, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub format: Option<OutputFormat>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Clone, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateSection {
    pub profile: Option<ProfileChoice>,
    pub pdf2: Option<Pdf2Choice>,
}

/// Fully resolved run configuration after applying precedence.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub params: ModelParams,
    pub lattice: LatticeConfig,
    pub quad: QuadratureSpec,
    pub tol: f64,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub form: OccupationForm,
    pub profile: Profile,
    pub config_source: String,
}

fn load_file_config(path: Option<&Path>) -> Result<(FileConfig, String)> {
    match path {
        None => Ok((FileConfig::default(), "defaults".to_string())),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            let cfg: FileConfig = toml::from_str(&text)
                .map_err(|e| Error::config(format!("config file {}: {e}", p.display())))?;
            Ok((cfg, p.display().to_string()))
        }
    }
}

pub fn resolve(config_path: Option<&Path>, opts: &CommonOpts) -> Result<Resolved> {
    let (file, config_source) = load_file_config(config_path)?;
    let p = opts.p.or(file.model.p).unwrap_or(0.5);
    let m = opts.m.or(file.model.m).unwrap_or(0.0);
    let horizon = opts.horizon.or(file.model.horizon).unwrap_or(1.0);
    let params = ModelParams::dry_friction(p, m, horizon)?;

    let defaults = LatticeConfig::default();
    let lattice = LatticeConfig {
        delta: opts.delta.or(file.lattice.delta).unwrap_or(defaults.delta),
        epsilon_factor: file.lattice.epsilon_factor.unwrap_or(defaults.epsilon_factor),
        seed: opts.seed.or(file.lattice.seed).unwrap_or(defaults.seed),
        path_budget: opts.paths.or(file.lattice.paths).unwrap_or(defaults.path_budget),
    };

    let tol = opts.tol.or(file.quadrature.tol).unwrap_or(1.0e-8);
    // Not validated here: `validate` reads tol as a pure threshold
    // scale (0 is legal and fails every check), while the tabulation
    // commands check the spec before integrating.
    let quad = QuadratureSpec {
        rel_tol: tol,
        abs_tol: tol * 1e-2,
        ..QuadratureSpec::default()
    };

    let format = opts.format.or(file.output.format).unwrap_or(OutputFormat::Csv);
    let out = opts.out.clone().or(file.output.out);
    let form: OccupationForm = opts
        .pdf2
        .or(file.validate.pdf2)
        .unwrap_or(Pdf2Choice::Corrected)
        .into();
    let profile = match opts.profile.or(file.validate.profile).unwrap_or(ProfileChoice::Ci) {
        ProfileChoice::Ci => Profile::Ci,
        ProfileChoice::Full => Profile::Full,
    };
    Ok(Resolved {
        params,
        lattice,
        quad,
        tol,
        format,
        out,
        form,
        profile,
        config_source,
    })
}

fn parse_axis(spec: &str, name: &str) -> Result<Axis> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::config(format!("grid spec '{spec}' is not min:max:count")));
    }
    let min: f64 = parts[0]
        .parse()
        .map_err(|_| Error::config(format!("bad grid min '{}'", parts[0])))?;
    let max: f64 = parts[1]
        .parse()
        .map_err(|_| Error::config(format!("bad grid max '{}'", parts[1])))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| Error::config(format!("bad grid count '{}'", parts[2])))?;
    Axis::linspace(name, min, max, count)
}

fn parse_grid(spec: &str, names: &[&str]) -> Result<Vec<Axis>> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != names.len() {
        return Err(Error::config(format!(
            "grid '{spec}' has {} axis spec(s); this command needs {}",
            parts.len(),
            names.len()
        )));
    }
    parts
        .iter()
        .zip(names)
        .map(|(part, name)| parse_axis(part, name))
        .collect()
}

fn base_metadata(cmd: &str, r: &Resolved) -> BTreeMap<String, String> {
    let mut meta = BTreeMap::new();
    meta.insert("command".into(), cmd.into());
    meta.insert("p".into(), format!("{}", r.params.p()));
    meta.insert("m".into(), format!("{}", r.params.friction().unwrap_or(f64::NAN)));
    meta.insert("T".into(), format!("{}", r.params.horizon()));
    meta.insert("tol".into(), format!("{}", r.tol));
    meta.insert("config_source".into(), r.config_source.clone());
    meta
}

fn lattice_metadata(meta: &mut BTreeMap<String, String>, lattice: &LatticeConfig) {
    meta.insert("delta".into(), format!("{}", lattice.delta));
    meta.insert("paths".into(), format!("{}", lattice.path_budget));
    meta.insert("seed".into(), format!("{}", lattice.seed));
    meta.insert("epsilon_factor".into(), format!("{}", lattice.epsilon_factor));
}

fn far_cutoff(params: &ModelParams) -> f64 {
    let horizon = params.horizon();
    20.0 * horizon.sqrt() + params.friction().map(f64::abs).unwrap_or(0.0) * horizon + 1.0
}

/// Integral of the marginal density over the whole line, split at the
/// kink at zero.
fn marginal_mass(params: &ModelParams, spec: &QuadratureSpec) -> Result<f64> {
    let far = far_cutoff(params);
    let f = |x: f64| analytic::marginal_density(x, params).unwrap_or(0.0);
    let (neg, _) = quadrature::integrate_finite(f, -far, 0.0, spec)?;
    let (pos, _) = quadrature::integrate_finite(f, 0.0, far, spec)?;
    Ok(neg + pos)
}

fn joint_x_l_mass(params: &ModelParams, spec: &QuadratureSpec) -> Result<f64> {
    let far = far_cutoff(params);
    let inner = |x: f64| {
        quadrature::integrate_semi_infinite(
            |l| analytic::joint_x_l(x, l, params).unwrap_or(0.0),
            0.0,
            &spec.loosened(0.1),
        )
        .map(|r| r.0)
        .unwrap_or(0.0)
    };
    let (neg, _) = quadrature::integrate_finite(&inner, -far, 0.0, &spec.loosened(10.0))?;
    let (pos, _) = quadrature::integrate_finite(&inner, 0.0, far, &spec.loosened(10.0))?;
    Ok(neg + pos)
}

pub fn cmd_density(r: &Resolved, grid: Option<&str>) -> Result<DensityGrid> {
    let axis = parse_axis(grid.unwrap_or("-4:4:101"), "x")?;
    let mut values = Vec::with_capacity(axis.len());
    let mut cdf = Vec::with_capacity(axis.len());
    for &x in &axis.points {
        values.push(analytic::marginal_density(x, &r.params)?);
        cdf.push(analytic::marginal_cdf(x, &r.params)?);
    }
    let mass = marginal_mass(&r.params, &r.quad)?;
    DensityGrid::new(vec![axis], values, r.params, mass)?
        .with_column("cdf", cdf)
        .map(|g| g.with_note("normalization integrates the density over the whole line"))
}

pub fn cmd_occupation(r: &Resolved, grid: Option<&str>) -> Result<DensityGrid> {
    let horizon = r.params.horizon();
    let default = format!("{}:{}:99", horizon * 0.01, horizon * 0.99);
    let axis = parse_axis(grid.unwrap_or(&default), "u")?;
    if axis.points.iter().any(|&u| u <= 0.0 || u >= horizon) {
        return Err(Error::config("occupation u-grid must lie strictly inside (0, T)"));
    }
    let mut values = Vec::with_capacity(axis.len());
    for &u in &axis.points {
        values.push(analytic::occupation_density_with(u, &r.params, r.form, &r.quad)?);
    }
    let mass = validate::occupation_mass(&r.params, r.form)?;
    let note = match r.form {
        OccupationForm::Corrected => {
            "corrected occupation/local-time joint (default); --pdf2 verbatim selects the published form"
        }
        OccupationForm::Verbatim => {
            "verbatim published joint: normalization is ~2T rather than 1 by construction"
        }
    };
    Ok(DensityGrid::new(vec![axis], values, r.params, mass)?.with_note(note))
}

/// Evaluate the selected joint on its tabulated axes. Off-support
/// points inside the grid evaluate to zero.
fn joint_value(
    which: JointWhich,
    a: f64,
    b: f64,
    x: f64,
    l: f64,
    params: &ModelParams,
    form: OccupationForm,
) -> f64 {
    match which {
        JointWhich::TauVXL => analytic::joint_tau_v_x_l(a, b, x, l, params).unwrap_or(0.0),
        JointWhich::TauXL => analytic::joint_tau_x_l(a, b, l, params).unwrap_or(0.0),
        JointWhich::XL => analytic::joint_x_l(a, b, params).unwrap_or(0.0),
        JointWhich::TauUXL => analytic::joint_tau_u_x_l(a, b, x, l, params).unwrap_or(0.0),
        JointWhich::UXL => analytic::joint_u_x_l(a, b, l, params).unwrap_or(0.0),
        JointWhich::UL => analytic::joint_u_l_form(a, b, params, form).unwrap_or(0.0),
    }
}

fn joint_axis_names(which: JointWhich) -> [&'static str; 2] {
    match which {
        JointWhich::TauVXL => ["tau", "v"],
        JointWhich::TauXL => ["tau", "x"],
        JointWhich::XL => ["x", "l"],
        JointWhich::TauUXL => ["tau", "u"],
        JointWhich::UXL => ["u", "x"],
        JointWhich::UL => ["u", "l"],
    }
}

fn default_joint_grid(which: JointWhich, params: &ModelParams) -> String {
    let horizon = params.horizon();
    let span = 3.0 * horizon.sqrt();
    let time = format!("{}:{}:41", horizon * 0.02, horizon * 0.98);
    let space = format!("{}:{}:41", -span, span);
    let ltime = format!("0:{span}:41");
    let names = joint_axis_names(which);
    let of = |name: &str| match name {
        "tau" | "v" | "u" => time.clone(),
        "x" => space.clone(),
        _ => ltime.clone(),
    };
    format!("{},{}", of(names[0]), of(names[1]))
}

/// Integral of the slice over its two tabulated axes (the remaining
/// variables stay fixed), used as the normalization metadata.
fn joint_slice_mass(
    which: JointWhich,
    x: f64,
    l: f64,
    params: &ModelParams,
    form: OccupationForm,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let horizon = params.horizon();
    let far = far_cutoff(params);
    let outer_spec = spec.loosened(10.0).with_endpoint(EndpointStrategy::SqrtSingularity);
    let inner_spec = spec.loosened(0.1);
    match which {
        JointWhich::XL => joint_x_l_mass(params, spec),
        JointWhich::UL => {
            // reuses the occupation machinery only when the slice is the
            // corrected default; verbatim is integrated directly
            let f = |u: f64| {
                if u <= 0.0 || u >= horizon {
                    return 0.0;
                }
                quadrature::integrate_semi_infinite(
                    |lv| analytic::joint_u_l_form(u, lv, params, form).unwrap_or(0.0),
                    0.0,
                    &inner_spec,
                )
                .map(|r| r.0)
                .unwrap_or(0.0)
            };
            Ok(quadrature::integrate_finite(f, 0.0, horizon, &outer_spec)?.0)
        }
        JointWhich::TauVXL => {
            let f = |t: f64| {
                if t <= 0.0 {
                    return 0.0;
                }
                quadrature::integrate_finite(
                    |v| joint_value(which, t, v, x, l, params, form),
                    0.0,
                    t,
                    &inner_spec.with_endpoint(EndpointStrategy::SqrtSingularity),
                )
                .map(|r| r.0)
                .unwrap_or(0.0)
            };
            Ok(quadrature::integrate_finite(f, 0.0, horizon, &outer_spec)?.0)
        }
        JointWhich::TauXL => {
            let f = |t: f64| {
                let neg = quadrature::integrate_finite(
                    |xv| joint_value(which, t, xv, x, l, params, form),
                    -far,
                    0.0,
                    &inner_spec,
                )
                .map(|r| r.0)
                .unwrap_or(0.0);
                let pos = quadrature::integrate_finite(
                    |xv| joint_value(which, t, xv, x, l, params, form),
                    0.0,
                    far,
                    &inner_spec,
                )
                .map(|r| r.0)
                .unwrap_or(0.0);
                neg + pos
            };
            Ok(quadrature::integrate_finite(f, 0.0, horizon, &outer_spec)?.0)
        }
        JointWhich::TauUXL => {
            let f = |t: f64| {
                quadrature::integrate_finite(
                    |u| joint_value(which, t, u, x, l, params, form),
                    0.0,
                    horizon,
                    &inner_spec.with_endpoint(EndpointStrategy::SqrtSingularity),
                )
                .map(|r| r.0)
                .unwrap_or(0.0)
            };
            Ok(quadrature::integrate_finite(f, 0.0, horizon, &outer_spec)?.0)
        }
        JointWhich::UXL => {
            let f = |u: f64| {
                let neg = quadrature::integrate_finite(
                    |xv| joint_value(which, u, xv, x, l, params, form),
                    -far,
                    0.0,
                    &inner_spec,
                )
                .map(|r| r.0)
                .unwrap_or(0.0);
                let pos = quadrature::integrate_finite(
                    |xv| joint_value(which, u, xv, x, l, params, form),
                    0.0,
                    far,
                    &inner_spec,
                )
                .map(|r| r.0)
                .unwrap_or(0.0);
                neg + pos
            };
            Ok(quadrature::integrate_finite(f, 0.0, horizon, &outer_spec)?.0)
        }
    }
}

pub fn cmd_joint(
    r: &Resolved,
    which: JointWhich,
    grid: Option<&str>,
    x: Option<f64>,
    l: Option<f64>,
) -> Result<DensityGrid> {
    let names = joint_axis_names(which);
    let default = default_joint_grid(which, &r.params);
    let axes = parse_grid(grid.unwrap_or(&default), &names)?;
    let fixed_x = x.unwrap_or(0.5);
    let fixed_l = l.unwrap_or(0.5);
    if !(fixed_l >= 0.0) {
        return Err(Error::config(format!("fixed local time must be >= 0, got {fixed_l}")));
    }
    let mut values = Vec::with_capacity(axes[0].len() * axes[1].len());
    for &a in &axes[0].points {
        for &b in &axes[1].points {
            values.push(joint_value(which, a, b, fixed_x, fixed_l, &r.params, r.form));
        }
    }
    let mass = joint_slice_mass(which, fixed_x, fixed_l, &r.params, r.form, &r.quad)?;
    let mut grid = DensityGrid::new(axes, values, r.params, mass)?
        .with_note("normalization integrates the slice over its two tabulated axes");
    let uses_x = !names.contains(&"x") && matches!(which, JointWhich::TauVXL | JointWhich::TauUXL);
    if uses_x {
        grid = grid.with_note(format!("fixed x = {fixed_x}"));
    }
    if !names.contains(&"l") {
        grid = grid.with_note(format!("fixed l = {fixed_l}"));
    }
    if which == JointWhich::UL && r.form == OccupationForm::Verbatim {
        grid = grid.with_note("verbatim published joint: normalization is ~2T rather than 1 by construction");
    }
    Ok(grid)
}

pub fn cmd_table(r: &Resolved, function: TableFunction, grid: Option<&str>) -> Result<DensityGrid> {
    let horizon = r.params.horizon();
    let span = 4.0 * horizon.sqrt();
    let (name, default): (&str, String) = match function {
        TableFunction::Density | TableFunction::Cdf => ("x", format!("{}:{span}:101", -span)),
        TableFunction::Occupation => ("u", format!("{}:{}:99", horizon * 0.01, horizon * 0.99)),
        TableFunction::LocalTime => ("l", format!("0:{span}:101")),
    };
    let axis = parse_axis(grid.unwrap_or(&default), name)?;
    let mut values = Vec::with_capacity(axis.len());
    for &z in &axis.points {
        values.push(match function {
            TableFunction::Density => analytic::marginal_density(z, &r.params)?,
            TableFunction::Cdf => analytic::marginal_cdf(z, &r.params)?,
            TableFunction::Occupation => {
                analytic::occupation_density_with(z, &r.params, r.form, &r.quad)?
            }
            TableFunction::LocalTime => analytic::local_time_density(z, &r.params)?,
        });
    }
    let mass = match function {
        TableFunction::Density => marginal_mass(&r.params, &r.quad)?,
        TableFunction::Cdf => 1.0,
        TableFunction::Occupation => validate::occupation_mass(&r.params, r.form)?,
        TableFunction::LocalTime => {
            quadrature::integrate_semi_infinite(
                |l| analytic::local_time_density(l, &r.params).unwrap_or(0.0),
                0.0,
                &r.quad,
            )?
            .0
        }
    };
    Ok(DensityGrid::new(vec![axis], values, r.params, mass)?)
}

pub fn cmd_simulate(r: &Resolved, dump_paths: Option<&Path>) -> Result<EmpiricalSummary> {
    r.lattice.validate(&r.params)?;
    let paths = simulate::simulate_paths(&r.params, &r.lattice)?;
    if let Some(dump) = dump_paths {
        let mut buf = Vec::new();
        simulate::write_paths_csv(&mut buf, &paths)?;
        atomic_write(dump, &buf)?;
        write_sidecar(dump)?;
    }
    Ok(simulate::summarize(&r.params, &r.lattice, &paths))
}

pub fn cmd_validate(r: &Resolved) -> Result<ValidationReport> {
    let mut report = validate::run_full_validation(&r.params, &r.lattice, r.profile, r.form)?;
    if r.tol != 1.0e-8 {
        // --tol acts as a threshold scale for validation; tol 0 forces
        // every check to fail, which exercises the failure path
        let scale = r.tol / 1.0e-8;
        for check in &mut report.checks {
            check.threshold *= scale;
            check.pass = check.observed <= check.threshold;
        }
    }
    Ok(report)
}

fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

fn csv_comment_block(meta: &BTreeMap<String, String>) -> String {
    let mut s = String::new();
    for (k, v) in meta {
        s.push_str(&format!("# {k} = {v}\n"));
    }
    s
}

pub fn grid_to_csv(grid: &DensityGrid, meta: &BTreeMap<String, String>) -> String {
    let mut s = csv_comment_block(meta);
    let mut header: Vec<String> = grid.axes.iter().map(|a| a.name.clone()).collect();
    header.push("density".to_string());
    for (name, _) in &grid.extra_columns {
        header.push(name.clone());
    }
    s.push_str(&header.join(","));
    s.push('\n');
    let inner = if grid.axes.len() == 2 { grid.axes[1].len() } else { 1 };
    for (idx, &v) in grid.values.iter().enumerate() {
        let mut row = Vec::new();
        if grid.axes.len() == 2 {
            row.push(fmt_f64(grid.axes[0].points[idx / inner]));
            row.push(fmt_f64(grid.axes[1].points[idx % inner]));
        } else {
            row.push(fmt_f64(grid.axes[0].points[idx]));
        }
        row.push(fmt_f64(v));
        for (_, col) in &grid.extra_columns {
            row.push(fmt_f64(col[idx]));
        }
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub fn summary_to_csv(summary: &EmpiricalSummary, meta: &BTreeMap<String, String>) -> String {
    let mut s = csv_comment_block(meta);
    s.push_str("record,name,bin_lo,bin_hi,bin2_lo,bin2_hi,value\n");
    s.push_str(&format!("scalar,n_paths,,,,,{}\n", summary.n_paths));
    s.push_str(&format!("scalar,prob_x_nonneg,,,,,{}\n", fmt_f64(summary.prob_x_nonneg)));
    for (name, m) in &summary.moments {
        s.push_str(&format!("moment,{name}.mean,,,,,{}\n", fmt_f64(m.mean)));
        s.push_str(&format!("moment,{name}.second,,,,,{}\n", fmt_f64(m.second)));
    }
    for (name, h) in &summary.histograms {
        s.push_str(&format!(
            "histogram,{name},-inf,{},,,{}\n",
            fmt_f64(h.edges[0]),
            h.underflow
        ));
        for (i, &c) in h.counts.iter().enumerate() {
            s.push_str(&format!(
                "histogram,{name},{},{},,,{c}\n",
                fmt_f64(h.edges[i]),
                fmt_f64(h.edges[i + 1])
            ));
        }
        s.push_str(&format!(
            "histogram,{name},{},inf,,,{}\n",
            fmt_f64(*h.edges.last().unwrap()),
            h.overflow
        ));
    }
    for (name, h) in [("x_l", &summary.joint_x_l), ("u_l", &summary.joint_u_l)] {
        let ny = h.y_edges.len() - 1;
        for (idx, &c) in h.counts.iter().enumerate() {
            let (i, j) = (idx / ny, idx % ny);
            s.push_str(&format!(
                "joint,{name},{},{},{},{},{c}\n",
                fmt_f64(h.x_edges[i]),
                fmt_f64(h.x_edges[i + 1]),
                fmt_f64(h.y_edges[j]),
                fmt_f64(h.y_edges[j + 1])
            ));
        }
        s.push_str(&format!("joint,{name}_outside,,,,,{}\n", h.outside));
    }
    s
}

pub fn report_to_csv(report: &ValidationReport, meta: &BTreeMap<String, String>) -> String {
    let mut s = csv_comment_block(meta);
    s.push_str("name,kind,observed,threshold,pass\n");
    for c in &report.checks {
        let kind = serde_json::to_value(c.kind)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default();
        s.push_str(&format!(
            "{},{kind},{},{},{}\n",
            c.name,
            fmt_f64(c.observed),
            fmt_f64(c.threshold),
            c.pass
        ));
    }
    s
}

fn json_payload<T: serde::Serialize>(
    key: &str,
    payload: &T,
    meta: &BTreeMap<String, String>,
) -> Result<String> {
    let doc = serde_json::json!({ "metadata": meta, key: payload });
    let text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Serialize(e.to_string()))?;
    Ok(text + "\n")
}

fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(d) => tempfile::NamedTempFile::new_in(d)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Wall-clock provenance lives only here, never in the payload.
fn write_sidecar(path: &Path) -> Result<()> {
    let now = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let sidecar = format!("{}.meta.json", path.display());
    let body = serde_json::json!({ "written_at_unix": now });
    std::fs::write(sidecar, serde_json::to_string(&body).unwrap() + "\n")?;
    Ok(())
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => {
            atomic_write(path, text.as_bytes())?;
            write_sidecar(path)
        }
    }
}

/// Execute a parsed command line. Returns the process exit code; errors
/// map to exit code 2 in `main`.
pub fn run(cli: Cli) -> Result<i32> {
    let config_path = cli.config.as_deref();
    match cli.command {
        Command::Density { common, grid } => {
            let r = resolve(config_path, &common)?;
            r.quad.validate()?;
            let result = cmd_density(&r, grid.as_deref())?;
            emit_grid(&r, "density", &result)?;
            Ok(0)
        }
        Command::Occupation { common, grid } => {
            let r = resolve(config_path, &common)?;
            r.quad.validate()?;
            let result = cmd_occupation(&r, grid.as_deref())?;
            emit_grid(&r, "occupation", &result)?;
            Ok(0)
        }
        Command::Joint { common, which, grid, x, l } => {
            let r = resolve(config_path, &common)?;
            r.quad.validate()?;
            let result = cmd_joint(&r, which, grid.as_deref(), x, l)?;
            let mut meta = base_metadata("joint", &r);
            meta.insert("which".into(), which.name().into());
            finish_grid(&r, &result, meta)?;
            Ok(0)
        }
        Command::Table { common, function, grid } => {
            let r = resolve(config_path, &common)?;
            r.quad.validate()?;
            let result = cmd_table(&r, function, grid.as_deref())?;
            emit_grid(&r, "table", &result)?;
            Ok(0)
        }
        Command::Simulate { common, dump_paths } => {
            let r = resolve(config_path, &common)?;
            r.quad.validate()?;
            let summary = cmd_simulate(&r, dump_paths.as_deref())?;
            let mut meta = base_metadata("simulate", &r);
            lattice_metadata(&mut meta, &r.lattice);
            let text = match r.format {
                OutputFormat::Csv => summary_to_csv(&summary, &meta),
                OutputFormat::Json => json_payload("summary", &summary, &meta)?,
            };
            emit(r.out.as_deref(), &text)?;
            Ok(0)
        }
        Command::Validate { common } => {
            let r = resolve(config_path, &common)?;
            let report = cmd_validate(&r)?;
            let mut meta = base_metadata("validate", &r);
            lattice_metadata(&mut meta, &r.lattice);
            meta.insert(
                "profile".into(),
                match r.profile {
                    Profile::Ci => "ci".into(),
                    Profile::Full => "full".into(),
                },
            );
            meta.insert(
                "pdf2".into(),
                match r.form {
                    OccupationForm::Corrected => "corrected".into(),
                    OccupationForm::Verbatim => "verbatim".into(),
                },
            );
            let text = match r.format {
                OutputFormat::Csv => report_to_csv(&report, &meta),
                OutputFormat::Json => json_payload("report", &report, &meta)?,
            };
            emit(r.out.as_deref(), &text)?;
            eprint!("{}", report.render_table());
            Ok(if report.all_pass() { 0 } else { 1 })
        }
    }
}

fn emit_grid(r: &Resolved, cmd: &str, grid: &DensityGrid) -> Result<()> {
    finish_grid(r, grid, base_metadata(cmd, r))
}

fn finish_grid(r: &Resolved, grid: &DensityGrid, mut meta: BTreeMap<String, String>) -> Result<()> {
    meta.insert("normalization".into(), fmt_f64(grid.normalization_estimate));
    for (i, note) in grid.notes.iter().enumerate() {
        meta.insert(format!("note_{i}"), note.clone());
    }
    meta.insert(
        "pdf2".into(),
        match r.form {
            OccupationForm::Corrected => "corrected".into(),
            OccupationForm::Verbatim => "verbatim".into(),
        },
    );
    let text = match r.format {
        OutputFormat::Csv => grid_to_csv(grid, &meta),
        OutputFormat::Json => json_payload("grid", grid, &meta)?,
    };
    emit(r.out.as_deref(), &text)
}
