//! Command-line front end.
//!
//! Settings come from flags and, optionally, one TOML file given with
//! `--config`. Top-level keys of the file set the global options (`seed`,
//! `format`, `output`, `workers`); a table named after a subcommand sets
//! that subcommand's options, using the flag names with `_` for `-`:
//!
//! ```toml
//! seed = 7
//!
//! [decay]
//! map = "zonal"
//! n = 4
//! k = 3
//! radii = [0.125, 0.25, 0.5, 1.0]
//! ```
//!
//! Flags override the file. Without `--output`, reports go to standard
//! output, or to `$HARMONIC_BALL_OUT_DIR/<command>.<ext>` when that
//! variable is set. Exit codes: 0 when every check passes, 1 when a check
//! fails, 2 for usage and input errors.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use serde_json::Value;

use crate::energetics::{dyadic_radii, energy_profile, fit_decay_exponent, half_radius_theta, verify_decay_bound};
use crate::error::{Error, Result};
use crate::geometry::{ln_sphere_area, shell_volume_fraction, shell_width_for_mass, unit_ball_volume, ShellSpec};
use crate::harmonics::{identity_map, random_harmonic_polynomial, zonal_on_axis, HarmonicMap, MapKind};
use crate::identities::{run_identity_suite, IdentitySuite};
use crate::integration::{integrate_poly_ball, integrate_poly_sphere, Method, QuadratureSpec};
use crate::mollifier::{mollify_at, sample_points, MollifierSpec, Profile};
use crate::polynomial::text::{format_exact_map, parse_exact, parse_exact_map};
use crate::polynomial::ExactPoly;
use crate::suite::run_suite;

pub const OUT_DIR_ENV: &str = "HARMONIC_BALL_OUT_DIR";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "harmonic-ball",
    version,
    about = "Energy and volume concentration checks for harmonic maps on the n-ball"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GlobalArgs {
    /// TOML file with default settings.
    #[arg(long, global = true)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Report destination; `-` for standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Worker threads. Changes wall time only.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Unit-ball volumes in log-space.
    Volumes(VolumesArgs),
    /// Fraction of the energy outside B_r as n grows.
    Concentration(ConcentrationArgs),
    /// Energy profile, decay fit and decay bound of one map.
    Decay(DecayArgs),
    /// Pohozaev, Green and minimiser-bound residuals over a family of maps.
    Identities(IdentitiesArgs),
    /// Mean-value check of J_delta * u at given points.
    Mollify(MollifyArgs),
    /// Integral of a polynomial over a ball or sphere.
    Integrate(IntegrateArgs),
    /// Print a harmonic polynomial map in text form.
    MakeHarmonic(MapArgs),
    /// Run every check.
    Suite(SuiteArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Volumes(_) => "volumes",
            Command::Concentration(_) => "concentration",
            Command::Decay(_) => "decay",
            Command::Identities(_) => "identities",
            Command::Mollify(_) => "mollify",
            Command::Integrate(_) => "integrate",
            Command::MakeHarmonic(_) => "make-harmonic",
            Command::Suite(_) => "suite",
        }
    }
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VolumesArgs {
    #[arg(long)]
    n_min: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConcentrationArgs {
    #[arg(long)]
    n_min: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
    /// Inner radius of the shell.
    #[arg(long)]
    r: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum MapChoice {
    Identity,
    Zonal,
    Random,
    /// Map given with `--poly`.
    Poly,
}

#[derive(Args, Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapArgs {
    #[arg(long, value_enum)]
    map: Option<MapChoice>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<u32>,
    /// Zero-based coordinate axis of a zonal harmonic.
    #[arg(long)]
    axis: Option<usize>,
    /// Components separated by `;`.
    #[arg(long)]
    poly: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
struct ResolvedMap {
    map: MapChoice,
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    axis: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    poly: Option<String>,
}

impl MapArgs {
    fn resolve(&self) -> Result<ResolvedMap> {
        let map = self.map.unwrap_or(MapChoice::Identity);
        let n = self.n.ok_or_else(|| Error::Config("--n is required".into()))?;
        let (k, axis, poly) = match map {
            MapChoice::Identity => (None, None, None),
            MapChoice::Zonal => (Some(self.k.unwrap_or(2)), Some(self.axis.unwrap_or(0)), None),
            MapChoice::Random => (Some(self.k.unwrap_or(2)), None, None),
            MapChoice::Poly => {
                let text = self.poly.clone().ok_or_else(|| Error::Config("--map poly needs --poly".into()))?;
                (None, None, Some(text))
            }
        };
        Ok(ResolvedMap { map, n, k, axis, poly })
    }
}

impl ResolvedMap {
    fn build(&self, seed: u64) -> Result<HarmonicMap> {
        match self.map {
            MapChoice::Identity => identity_map(self.n),
            MapChoice::Zonal => zonal_on_axis(self.n, self.k.unwrap_or(2), self.axis.unwrap_or(0)),
            MapChoice::Random => random_harmonic_polynomial(self.n, self.k.unwrap_or(2), seed),
            MapChoice::Poly => {
                let body = parse_exact_map(self.poly.as_deref().unwrap_or_default(), self.n)?;
                Ok(HarmonicMap::from_map(body, MapKind::Custom))
            }
        }
    }
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DecayArgs {
    #[command(flatten)]
    #[serde(flatten)]
    map: MapArgs,
    /// Comma-separated radii; default {2^-6, ..., 1/2, 1}.
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum SuiteChoice {
    /// Dimensions 2..=10, radii {0.3, 0.7, 1}.
    Default,
    /// Dimensions 2..=4, radii {0.5, 1}.
    Quick,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IdentitiesArgs {
    #[arg(long, value_enum)]
    suite: Option<SuiteChoice>,
    /// Comma-separated dimensions, overriding the suite's.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MollifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    map: MapArgs,
    #[arg(long)]
    delta: Option<f64>,
    /// Grid spacing.
    #[arg(long)]
    h: Option<f64>,
    #[arg(long, value_enum)]
    profile: Option<ProfileChoice>,
    /// CSV file of point coordinates, one point per line; default 20 points in B_{1/2}.
    #[arg(long)]
    points: Option<PathBuf>,
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ProfileChoice {
    StandardBump,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Domain {
    Ball,
    Sphere,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum MethodChoice {
    Exact,
    MonteCarlo,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntegrateArgs {
    #[arg(long)]
    poly: Option<String>,
    /// Dimension; inferred from the highest variable when absent.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_enum)]
    domain: Option<Domain>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long, value_enum)]
    method: Option<MethodChoice>,
    #[arg(long)]
    samples: Option<u64>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SuiteArgs {}

/// Everything that determines a report's bytes.
#[derive(Debug, Serialize)]
struct RunConfig<'a, P: Serialize> {
    command: &'a str,
    version: &'a str,
    seed: u64,
    format: Format,
    params: &'a P,
}

struct Report {
    body: String,
    passed: bool,
    summary: String,
}

/// Overlay the non-null fields of `flags` onto the file table.
fn merge<T: Serialize + DeserializeOwned>(file: Option<&Value>, flags: &T) -> Result<T> {
    let mut base = match file {
        Some(Value::Object(m)) => m.clone(),
        Some(_) => return Err(Error::Config("config section must be a table".into())),
        None => serde_json::Map::new(),
    };
    if let Value::Object(over) = serde_json::to_value(flags).map_err(|e| Error::Config(e.to_string()))? {
        for (k, v) in over {
            if !v.is_null() {
                base.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(base)).map_err(|e| Error::Config(e.to_string()))
}

fn load_config(path: &Path) -> Result<serde_json::Map<String, Value>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let table: toml::Table = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    match serde_json::to_value(table).map_err(|e| Error::Config(e.to_string()))? {
        Value::Object(m) => Ok(m),
        _ => unreachable!("a TOML document is a table"),
    }
}

fn csv_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn header<P: Serialize>(cfg: &RunConfig<P>) -> String {
    let json = serde_json::to_string(cfg).expect("config serializes");
    format!("# harmonic-ball {}\n# seed: {}\n# config: {json}\n", cfg.version, cfg.seed)
}

fn wrap_json<P: Serialize, R: Serialize>(cfg: &RunConfig<P>, payload: &R, verdict: &Value) -> String {
    let doc = serde_json::json!({ "config": cfg, "result": payload, "verdict": verdict });
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct RangeParams {
    n_min: usize,
    n_max: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    r: Option<f64>,
}

fn resolve_range(n_min: Option<usize>, n_max: Option<usize>, default: (usize, usize)) -> Result<(usize, usize)> {
    let n_min = n_min.unwrap_or(default.0).max(1);
    let n_max = n_max.unwrap_or(default.1);
    if n_max < n_min {
        return Err(Error::Config(format!("--n-max {n_max} below --n-min {n_min}")));
    }
    Ok((n_min, n_max))
}

fn resolve_volumes(a: &VolumesArgs) -> Result<RangeParams> {
    let (n_min, n_max) = resolve_range(a.n_min, a.n_max, (1, 25))?;
    Ok(RangeParams { n_min, n_max, r: None })
}

fn resolve_concentration(a: &ConcentrationArgs) -> Result<RangeParams> {
    let (n_min, n_max) = resolve_range(a.n_min, a.n_max, (2, 200))?;
    Ok(RangeParams { n_min, n_max, r: Some(a.r.unwrap_or(0.9)) })
}

fn cmd_volumes<P: Serialize>(cfg: &RunConfig<P>, a: &RangeParams) -> Result<Report> {
    let (n_min, n_max) = (a.n_min, a.n_max);
    let rows: Vec<_> = (n_min..=n_max).map(unit_ball_volume).collect();
    let arg = rows.iter().max_by(|a, b| a.log_volume.total_cmp(&b.log_volume)).expect("non-empty").dimension;
    let verdict = serde_json::json!({ "argmax_n": arg });
    let body = match cfg.format {
        Format::Csv => {
            let mut s = header(cfg);
            s.push_str("n,log_volume,volume,log_sphere_area\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{},{}\n",
                    r.dimension,
                    csv_f64(r.log_volume),
                    csv_f64(r.volume),
                    csv_f64(ln_sphere_area(r.dimension, 1.0))
                ));
            }
            s.push_str(&format!("# verdict: {verdict}\n"));
            s
        }
        Format::Json => wrap_json(cfg, &rows, &verdict),
    };
    Ok(Report { body, passed: true, summary: format!("volume maximised at n = {arg}") })
}

#[derive(Serialize)]
struct ConcentrationRow {
    n: usize,
    energy_fraction: f64,
    volume_fraction: f64,
    half_mass_shell_width: f64,
}

fn cmd_concentration<P: Serialize>(cfg: &RunConfig<P>, a: &RangeParams) -> Result<Report> {
    let (n_min, n_max) = (a.n_min, a.n_max);
    let r = a.r.expect("resolved");
    let exact = QuadratureSpec::exact();
    let mut rows = Vec::new();
    for n in n_min..=n_max {
        rows.push(ConcentrationRow {
            n,
            energy_fraction: crate::energetics::concentration_fraction(&identity_map(n)?, r, &exact)?,
            volume_fraction: shell_volume_fraction(ShellSpec::new(n, r)?),
            half_mass_shell_width: shell_width_for_mass(n, 0.5)?,
        });
    }
    let increasing = rows.windows(2).all(|w| w[1].energy_fraction > w[0].energy_fraction);
    let verdict = serde_json::json!({ "strictly_increasing": increasing });
    let body = match cfg.format {
        Format::Csv => {
            let mut s = header(cfg);
            s.push_str("n,energy_fraction,volume_fraction,half_mass_shell_width\n");
            for row in &rows {
                s.push_str(&format!(
                    "{},{},{},{}\n",
                    row.n,
                    csv_f64(row.energy_fraction),
                    csv_f64(row.volume_fraction),
                    csv_f64(row.half_mass_shell_width)
                ));
            }
            s.push_str(&format!("# verdict: {verdict}\n"));
            s
        }
        Format::Json => wrap_json(cfg, &rows, &verdict),
    };
    let summary = if increasing { "energy fraction strictly increasing in n" } else { "energy fraction not monotone" };
    Ok(Report { body, passed: increasing, summary: summary.into() })
}

#[derive(Serialize)]
struct DecayParams {
    #[serde(flatten)]
    map: ResolvedMap,
    radii: Vec<f64>,
    beta: f64,
    c: f64,
}

fn resolve_decay(a: &DecayArgs) -> Result<DecayParams> {
    let map = a.map.resolve()?;
    let radii = a.radii.clone().unwrap_or_else(|| dyadic_radii(6));
    let beta = a.beta.unwrap_or(map.n as f64 - 0.1);
    Ok(DecayParams { map, radii, beta, c: a.c.unwrap_or(1.0) })
}

fn cmd_decay<P: Serialize>(cfg: &RunConfig<P>, p: &DecayParams) -> Result<Report> {
    let u = p.map.build(cfg.seed)?;
    let exact = QuadratureSpec::exact();
    let profile = energy_profile(&u, &p.radii, &exact)?;
    let fit = fit_decay_exponent(&profile).ok();
    let bound = verify_decay_bound(&u, p.beta, p.c, &p.radii, &exact)?;
    let theta = half_radius_theta(&u, 1.0, &exact).ok();
    let verdict = serde_json::json!({
        "beta_hat": fit.map(|f| f.beta_hat),
        "max_residual": fit.map(|f| f.max_residual),
        "worst_margin": bound.worst_margin,
        "bound_holds": bound.holds,
        "theta_half": theta,
    });
    let body = match cfg.format {
        Format::Csv => {
            let mut s = header(cfg);
            s.push_str("r,E,log_E\n");
            for x in &profile.samples {
                s.push_str(&format!("{},{},{}\n", csv_f64(x.r), csv_f64(x.energy), csv_f64(x.log_energy)));
            }
            s.push_str(&format!("# verdict: {verdict}\n"));
            s
        }
        Format::Json => wrap_json(cfg, &profile, &verdict),
    };
    let summary = match fit {
        Some(f) => format!("beta_hat = {}, bound holds: {}", f.beta_hat, bound.holds),
        None => format!("zero energy, bound holds: {}", bound.holds),
    };
    Ok(Report { body, passed: bound.holds, summary })
}

#[derive(Serialize)]
struct IdentitiesParams {
    suite: SuiteChoice,
    dims: Vec<usize>,
    radii: Vec<f64>,
    tolerance: f64,
}

fn resolve_identities(a: &IdentitiesArgs) -> IdentitiesParams {
    let suite = a.suite.unwrap_or(SuiteChoice::Default);
    let (dims, radii) = match suite {
        SuiteChoice::Default => ((2..=10).collect(), vec![0.3, 0.7, 1.0]),
        SuiteChoice::Quick => ((2..=4).collect(), vec![0.5, 1.0]),
    };
    IdentitiesParams {
        suite,
        dims: a.dims.clone().unwrap_or(dims),
        radii: a.radii.clone().unwrap_or(radii),
        tolerance: a.tolerance.unwrap_or(1e-10),
    }
}

fn cmd_identities<P: Serialize>(cfg: &RunConfig<P>, p: &IdentitiesParams) -> Result<Report> {
    let suite = IdentitySuite { dimensions: p.dims.clone(), radii: p.radii.clone(), seed: cfg.seed };
    let reports = run_identity_suite(&suite, &QuadratureSpec::exact())?;
    let failed: Vec<_> = reports.iter().filter(|r| !r.passes(p.tolerance)).collect();
    let worst = reports
        .iter()
        .filter(|r| {
            matches!(
                r.identity_name,
                crate::identities::IdentityName::Pohozaev | crate::identities::IdentityName::Green
            )
        })
        .map(|r| r.normalized_residual)
        .fold(0.0, f64::max);
    let verdict =
        serde_json::json!({ "reports": reports.len(), "failed": failed.len(), "worst_normalized_residual": worst });
    let body = match cfg.format {
        Format::Json => wrap_json(cfg, &reports, &verdict),
        Format::Csv => {
            let mut s = header(cfg);
            s.push_str("identity,n,r,map,degree,lhs,rhs,residual,normalized_residual,margin_ratio\n");
            for r in &reports {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    r.identity_name,
                    r.n,
                    csv_f64(r.r),
                    map_label(&r.map),
                    r.degree.map(|d| d.to_string()).unwrap_or_default(),
                    csv_f64(r.lhs),
                    csv_f64(r.rhs),
                    csv_f64(r.residual),
                    csv_f64(r.normalized_residual),
                    r.margin_ratio.map(csv_f64).unwrap_or_default()
                ));
            }
            s.push_str(&format!("# verdict: {verdict}\n"));
            s
        }
    };
    let mut summary = format!("{} reports, worst normalized residual {worst:e}", reports.len());
    for f in &failed {
        summary.push_str(&format!("\nFAILED {} n={} r={} map={}", f.identity_name, f.n, f.r, map_label(&f.map)));
    }
    Ok(Report { body, passed: failed.is_empty(), summary })
}

fn map_label(m: &MapKind) -> String {
    match m {
        MapKind::Identity => "identity".into(),
        MapKind::Zonal { k } => format!("zonal:k={k}"),
        MapKind::Random { k, seed } => format!("random:k={k}:seed={seed}"),
        MapKind::Custom => "custom".into(),
    }
}

#[derive(Serialize)]
struct MollifyParams {
    #[serde(flatten)]
    map: ResolvedMap,
    delta: f64,
    h: f64,
    profile: ProfileChoice,
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<PathBuf>,
    tolerance: f64,
}

fn resolve_mollify(a: &MollifyArgs) -> Result<MollifyParams> {
    let mut m = a.map.clone();
    m.n.get_or_insert(2);
    Ok(MollifyParams {
        map: m.resolve()?,
        delta: a.delta.unwrap_or(0.25),
        h: a.h.unwrap_or(1.0 / 256.0),
        profile: a.profile.unwrap_or(ProfileChoice::StandardBump),
        points: a.points.clone(),
        tolerance: a.tolerance.unwrap_or(1e-4),
    })
}

fn read_points(path: &Path, n: usize) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let p = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Config(format!("{}:{}: {e}", path.display(), i + 1)))?;
        if p.len() != n {
            return Err(Error::Dimension { expected: n, got: p.len() });
        }
        out.push(p);
    }
    Ok(out)
}

fn cmd_mollify<P: Serialize>(cfg: &RunConfig<P>, p: &MollifyParams) -> Result<Report> {
    let u = p.map.build(cfg.seed)?;
    let n = u.dimension();
    let profile = match p.profile {
        ProfileChoice::StandardBump => Profile::StandardBump,
    };
    let spec = MollifierSpec::with_profile(n, p.delta, profile)?;
    let points = match &p.points {
        Some(path) => read_points(path, n)?,
        None => sample_points(n, 0.5, 20, cfg.seed),
    };
    let comp = u.body().components()[0].lower();
    let mut rows = Vec::with_capacity(points.len());
    for x in &points {
        let value = comp.evaluate(x)?;
        let m = mollify_at(&spec, p.h, x, |y| comp.evaluate_unchecked(y))?;
        rows.push((x.clone(), value, m));
    }
    let max_error = rows.iter().filter_map(|(_, v, m)| m.map(|m| (m - v).abs())).fold(0.0, f64::max);
    let undefined = rows.iter().filter(|r| r.2.is_none()).count();
    let harmonic = u.certified();
    let passed = !harmonic || max_error < p.tolerance;
    let verdict = serde_json::json!({
        "max_error": max_error,
        "undefined_points": undefined,
        "certified_harmonic": harmonic,
        "flag": (!harmonic).then_some(crate::mollifier::NOT_A_COUNTEREXAMPLE),
    });
    let body = match cfg.format {
        Format::Csv => {
            let mut s = header(cfg);
            let coords: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
            s.push_str(&format!("{},u,mollified,error\n", coords.join(",")));
            for (x, v, m) in &rows {
                let xs: Vec<String> = x.iter().map(|c| csv_f64(*c)).collect();
                let (ms, es) = match m {
                    Some(m) => (csv_f64(*m), csv_f64((m - v).abs())),
                    None => ("undefined".into(), "undefined".into()),
                };
                s.push_str(&format!("{},{},{ms},{es}\n", xs.join(","), csv_f64(*v)));
            }
            s.push_str(&format!("# verdict: {verdict}\n"));
            s
        }
        Format::Json => {
            let rows: Vec<_> = rows
                .iter()
                .map(|(x, v, m)| serde_json::json!({ "point": x, "u": v, "mollified": m, "error": m.map(|m| (m - v).abs()) }))
                .collect();
            wrap_json(cfg, &rows, &verdict)
        }
    };
    Ok(Report { body, passed, summary: format!("max mean-value error {max_error:e}") })
}

#[derive(Serialize)]
struct IntegrateParams {
    poly: String,
    n: usize,
    domain: Domain,
    r: f64,
    method: MethodChoice,
    samples: u64,
}

fn resolve_integrate(a: &IntegrateArgs) -> Result<(IntegrateParams, ExactPoly)> {
    let text = a.poly.clone().ok_or_else(|| Error::Config("--poly is required".into()))?;
    let p = match a.n {
        Some(n) => parse_exact(&text, n)?,
        None => crate::polynomial::text::parse_exact_infer(&text)?,
    };
    let params = IntegrateParams {
        poly: text,
        n: p.dimension(),
        domain: a.domain.unwrap_or(Domain::Ball),
        r: a.r.unwrap_or(1.0),
        method: a.method.unwrap_or(MethodChoice::Exact),
        samples: a.samples.unwrap_or(1_000_000),
    };
    Ok((params, p))
}

fn cmd_integrate<P: Serialize>(cfg: &RunConfig<P>, p: &IntegrateParams, poly: &ExactPoly) -> Result<Report> {
    let spec = match p.method {
        MethodChoice::Exact => QuadratureSpec::exact(),
        MethodChoice::MonteCarlo => QuadratureSpec::monte_carlo(p.samples, cfg.seed),
    };
    let res = match p.domain {
        Domain::Ball => integrate_poly_ball(poly, p.r, &spec)?,
        Domain::Sphere => integrate_poly_sphere(poly, p.r, &spec)?,
    };
    let body = match cfg.format {
        Format::Csv => {
            let mut s = header(cfg);
            s.push_str("value,log_abs_value,standard_error,method\n");
            s.push_str(&format!(
                "{},{},{},{}\n",
                csv_f64(res.value),
                csv_f64(res.log_abs_value),
                csv_f64(res.standard_error),
                res.method
            ));
            s
        }
        Format::Json => wrap_json(cfg, &res, &Value::Null),
    };
    let summary = if res.method == Method::Exact {
        format!("{}", res.value)
    } else {
        format!("{} ± {}", res.value, res.standard_error)
    };
    Ok(Report { body, passed: true, summary })
}

fn cmd_make_harmonic(seed: u64, m: &ResolvedMap) -> Result<Report> {
    let u = m.build(seed)?;
    if !u.certified() {
        return Err(Error::Refused("input map is not harmonic".into()));
    }
    let text = format_exact_map(u.body());
    Ok(Report { body: format!("{text}\n"), passed: true, summary: text })
}

fn cmd_suite<P: Serialize>(cfg: &RunConfig<P>) -> Result<Report> {
    let checks = run_suite(cfg.seed)?;
    let failed: Vec<_> = checks.iter().filter(|c| !c.passed).collect();
    let verdict =
        serde_json::json!({ "checks": checks.len(), "failed": failed.iter().map(|c| c.name).collect::<Vec<_>>() });
    let body = match cfg.format {
        Format::Csv => {
            let mut s = header(cfg);
            s.push_str("check,passed,worst,threshold,detail\n");
            for c in &checks {
                s.push_str(&format!(
                    "{},{},{},{},\"{}\"\n",
                    c.name,
                    c.passed,
                    csv_f64(c.worst),
                    csv_f64(c.threshold),
                    c.detail.replace('"', "'")
                ));
            }
            s.push_str(&format!("# verdict: {verdict}\n"));
            s
        }
        Format::Json => wrap_json(cfg, &checks, &verdict),
    };
    let mut summary = format!("{}/{} checks passed", checks.len() - failed.len(), checks.len());
    for c in &failed {
        summary.push_str(&format!("\nFAILED {}: {}", c.name, c.detail));
    }
    Ok(Report { body, passed: failed.is_empty(), summary })
}

fn section<'a>(file: &'a serde_json::Map<String, Value>, name: &str) -> Option<&'a Value> {
    file.get(name)
}

fn execute(cli: Cli) -> Result<(Report, Option<PathBuf>)> {
    let file = match &cli.global.config {
        Some(p) => load_config(p)?,
        None => serde_json::Map::new(),
    };
    let name = cli.command.name();
    let global_keys: serde_json::Map<String, Value> = file
        .iter()
        .filter(|(k, v)| !v.is_object() || k.as_str() == "global")
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    for (k, v) in &file {
        if v.is_object()
            && ![
                name,
                "volumes",
                "concentration",
                "decay",
                "identities",
                "mollify",
                "integrate",
                "make-harmonic",
                "make_harmonic",
                "suite",
            ]
            .contains(&k.as_str())
        {
            return Err(Error::Config(format!("unknown config section [{k}]")));
        }
    }
    let global: GlobalArgs = merge(Some(&Value::Object(global_keys)), &cli.global)?;
    let seed = global.seed.unwrap_or(0);
    let format = global.format.unwrap_or(Format::Csv);
    let sect = section(&file, name).or_else(|| section(&file, &name.replace('-', "_")));

    let work = || -> Result<Report> {
        macro_rules! cfg {
            ($params:expr) => {
                RunConfig { command: name, version: VERSION, seed, format, params: $params }
            };
        }
        match &cli.command {
            Command::Volumes(a) => {
                let p = resolve_volumes(&merge(sect, a)?)?;
                cmd_volumes(&cfg!(&p), &p)
            }
            Command::Concentration(a) => {
                let p = resolve_concentration(&merge(sect, a)?)?;
                cmd_concentration(&cfg!(&p), &p)
            }
            Command::Decay(a) => {
                let p = resolve_decay(&merge(sect, a)?)?;
                cmd_decay(&cfg!(&p), &p)
            }
            Command::Identities(a) => {
                let p = resolve_identities(&merge(sect, a)?);
                cmd_identities(&cfg!(&p), &p)
            }
            Command::Mollify(a) => {
                let p = resolve_mollify(&merge(sect, a)?)?;
                cmd_mollify(&cfg!(&p), &p)
            }
            Command::Integrate(a) => {
                let (p, poly) = resolve_integrate(&merge(sect, a)?)?;
                cmd_integrate(&cfg!(&p), &p, &poly)
            }
            Command::MakeHarmonic(a) => {
                let m: MapArgs = merge(sect, a)?;
                cmd_make_harmonic(seed, &m.resolve()?)
            }
            Command::Suite(_) => cmd_suite(&cfg!(&serde_json::json!({}))),
        }
    };
    let report = match global.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    let dest = match global.output {
        Some(p) if p.as_os_str() == "-" => None,
        Some(p) => Some(p),
        None => std::env::var_os(OUT_DIR_ENV).map(|dir| {
            let ext = if name == "make-harmonic" { "txt" } else { format.ext() };
            PathBuf::from(dir).join(format!("{name}.{ext}"))
        }),
    };
    Ok((report, dest))
}

/// Run the CLI on `argv` (including the program name) and return the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let (report, dest) = match execute(cli) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    match dest {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                if let Err(e) = std::fs::create_dir_all(parent) {
                    let _ = writeln!(err, "error: {}: {e}", parent.display());
                    return EXIT_USAGE;
                }
            }
            if let Err(e) = std::fs::write(&path, &report.body) {
                let _ = writeln!(err, "error: {}: {e}", path.display());
                return EXIT_USAGE;
            }
            let _ = writeln!(out, "{}\nwrote {}", report.summary, path.display());
        }
        None => {
            let _ = out.write_all(report.body.as_bytes());
        }
    }
    if report.passed {
        EXIT_PASS
    } else {
        let _ = writeln!(err, "{}", report.summary);
        EXIT_CHECK_FAILED
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut argv = vec!["harmonic-ball"];
        argv.extend_from_slice(args);
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn volumes_csv() {
        let (code, out, _) = run_str(&["volumes", "--n-max", "25", "--output", "-"]);
        assert_eq!(code, 0);
        assert!(out.contains("# config: {\"command\":\"volumes\""));
        assert!(out.contains("# verdict: {\"argmax_n\":5}"));
        let row5 = out.lines().find(|l| l.starts_with("5,")).unwrap();
        assert!(row5.contains("5.2637890139143"));
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        let (code, _, err) = run_str(&["volumes", "--bogus"]);
        assert_eq!(code, 2);
        assert!(err.contains("--bogus"));
        let (code, _, _) = run_str(&["nonsense"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn make_harmonic_prints_text() {
        let (code, out, _) = run_str(&["make-harmonic", "--map", "zonal", "--n", "2", "--k", "2", "--output", "-"]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), "1 * x1^2 - 1 * x2^2");
    }

    #[test]
    fn merge_prefers_flags() {
        let file = serde_json::json!({ "n_min": 3, "n_max": 9 });
        let flags = VolumesArgs { n_min: None, n_max: Some(12) };
        let m: VolumesArgs = merge(Some(&file), &flags).unwrap();
        assert_eq!((m.n_min, m.n_max), (Some(3), Some(12)));
        let bad = serde_json::json!({ "n_mx": 3 });
        assert!(merge::<VolumesArgs>(Some(&bad), &VolumesArgs::default()).is_err());
    }
}
