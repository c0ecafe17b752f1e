//! Run configuration: command-line flags layered over an optional TOML file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pdm_core::format::Sci;
use pdm_core::mass::{GridSpec, MassDistribution};
use pdm_core::pct::PctScheme;
use pdm_core::reference::{
    BranchSelection, GenOscillator, ReferencePotential, ScarfFormula, ScarfII, Sign,
    SpectrumConvention,
};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{CliError, Result};

#[derive(Parser, Debug)]
#[command(
    name = "pdm-spectra",
    version,
    about = "Exactly solvable PT-symmetric position-dependent-mass spectra and their finite-difference checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Closed-form levels next to the matched finite-difference eigenvalues
    #[command(allow_negative_numbers = true)]
    Spectrum(Options),
    /// Sample the target potential, the mass and the reference profile
    #[command(allow_negative_numbers = true)]
    Potential(Options),
    /// Sample the transformed wavefunctions with their residuals
    #[command(allow_negative_numbers = true)]
    Wavefunction(Options),
    /// Run the invariant suite and write a CONVENTIONS report
    #[command(allow_negative_numbers = true)]
    Verify(Options),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::Potential(_) => "potential",
            Command::Wavefunction(_) => "wavefunction",
            Command::Verify(_) => "verify",
        }
    }

    pub fn options(&self) -> &Options {
        match self {
            Command::Spectrum(o)
            | Command::Potential(o)
            | Command::Wavefunction(o)
            | Command::Verify(o) => o,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseArg {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceKind {
    Scarf,
    Oscillator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConventionArg {
    Half,
    Unit,
}

impl From<ConventionArg> for SpectrumConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Half => SpectrumConvention::Half,
            ConventionArg::Unit => SpectrumConvention::Unit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FormulaArg {
    Corrected,
    Verbatim,
}

impl From<FormulaArg> for ScarfFormula {
    fn from(f: FormulaArg) -> Self {
        match f {
            FormulaArg::Corrected => ScarfFormula::Corrected,
            FormulaArg::Verbatim => ScarfFormula::Verbatim,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Inclusive level range, written `a..b` (or a single `n`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelRange {
    pub start: usize,
    pub end: usize,
}

impl LevelRange {
    pub fn iter(&self) -> impl Iterator<Item = usize> {
        self.start..=self.end
    }
}

impl FromStr for LevelRange {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parse = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("invalid level `{t}` in range `{s}` (expected a..b)"))
        };
        let (a, b) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
            None => {
                let n = parse(s)?;
                (n, n)
            }
        };
        if b < a {
            return Err(format!("empty level range `{s}`"));
        }
        Ok(Self { start: a, end: b })
    }
}

impl fmt::Display for LevelRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

impl<'de> Deserialize<'de> for LevelRange {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

impl Serialize for LevelRange {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.start, self.end].serialize(s)
    }
}

fn parse_sign(s: &str) -> std::result::Result<i8, String> {
    match s.trim() {
        "+1" | "1" | "+" => Ok(1),
        "-1" | "-" => Ok(-1),
        other => Err(format!("expected +1 or -1, got `{other}`")),
    }
}

/// Every setting is optional here; defaults are filled in by [`Options::resolve`].
/// The same keys are accepted in the TOML config file.
#[derive(Args, Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// Transformation scheme
    #[arg(long, value_enum)]
    pub case: Option<CaseArg>,
    /// Mass parameter in m = ((alpha + x²)/(1 + x²))^k
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Coordinate-map exponent (case b only)
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Mass exponent (default 2 for case a, 2/gamma for case b)
    #[arg(long)]
    pub k: Option<f64>,
    /// Override the wavefunction exponent beta (negative controls)
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, value_enum)]
    pub reference: Option<ReferenceKind>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub g: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, value_parser = parse_sign)]
    pub qparity: Option<i8>,
    #[arg(long = "sign-p", value_parser = parse_sign)]
    pub sign_p: Option<i8>,
    #[arg(long = "sign-q", value_parser = parse_sign)]
    pub sign_q: Option<i8>,
    #[arg(long, value_enum)]
    pub convention: Option<ConventionArg>,
    /// Scarf II energy expression
    #[arg(long, value_enum)]
    pub formula: Option<FormulaArg>,
    /// Half-width of the x grid
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub half_width: Option<f64>,
    /// Number of grid points (odd)
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub points: Option<usize>,
    /// Inclusive level range a..b
    #[arg(long)]
    pub levels: Option<LevelRange>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// TOML file with any of the settings above; flags take precedence
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl Options {
    pub fn load_file(path: &Path) -> Result<Options> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            context: format!("reading config {}", path.display()),
            source,
        })?;
        toml::from_str(&text).map_err(|source| CliError::Config {
            path: path.to_owned(),
            source,
        })
    }

    /// Values set here win over `other`.
    pub fn or(self, other: Options) -> Options {
        Options {
            case: self.case.or(other.case),
            alpha: self.alpha.or(other.alpha),
            gamma: self.gamma.or(other.gamma),
            k: self.k.or(other.k),
            beta: self.beta.or(other.beta),
            reference: self.reference.or(other.reference),
            lambda: self.lambda.or(other.lambda),
            mu: self.mu.or(other.mu),
            g: self.g.or(other.g),
            eps: self.eps.or(other.eps),
            qparity: self.qparity.or(other.qparity),
            sign_p: self.sign_p.or(other.sign_p),
            sign_q: self.sign_q.or(other.sign_q),
            convention: self.convention.or(other.convention),
            formula: self.formula.or(other.formula),
            half_width: self.half_width.or(other.half_width),
            points: self.points.or(other.points),
            levels: self.levels.or(other.levels),
            format: self.format.or(other.format),
            out: self.out.or(other.out),
            config: self.config.or(other.config),
        }
    }

    /// Merge with the config file (if any) and fill in defaults.
    pub fn resolve(&self) -> Result<RunConfig> {
        let merged = match &self.config {
            Some(path) => self.clone().or(Options::load_file(path)?),
            None => self.clone(),
        };
        RunConfig::from_options(merged)
    }
}

/// Fully resolved settings. Serialized verbatim into every output.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub case: CaseArg,
    pub alpha: f64,
    pub gamma: f64,
    pub k: f64,
    pub beta: Option<f64>,
    pub reference: ReferenceKind,
    pub lambda: f64,
    pub mu: f64,
    pub g: f64,
    pub eps: f64,
    pub qparity: Sign,
    pub sign_p: Sign,
    pub sign_q: Sign,
    pub convention: SpectrumConvention,
    pub formula: ScarfFormula,
    pub half_width: f64,
    pub points: usize,
    pub levels: LevelRange,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn sign(flag: &str, v: Option<i8>) -> Result<Sign> {
    Sign::from_int(v.unwrap_or(1).into()).map_err(|_| usage(format!("--{flag} must be +1 or -1")))
}

fn finite(flag: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(usage(format!("--{flag} must be finite")))
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::from_options(Options::default()).expect("defaults are valid")
    }
}

impl RunConfig {
    pub fn from_options(o: Options) -> Result<RunConfig> {
        let case = o.case.unwrap_or(CaseArg::A);
        let gamma = match case {
            CaseArg::A => {
                if o.gamma.is_some_and(|g| g != 0.0) {
                    return Err(usage("--gamma applies to --case b only"));
                }
                0.0
            }
            CaseArg::B => {
                let g = finite("gamma", o.gamma.unwrap_or(1.0))?;
                if g == 0.0 {
                    return Err(usage("--gamma must be nonzero for --case b"));
                }
                g
            }
        };
        let k = finite(
            "k",
            o.k.unwrap_or(if case == CaseArg::A { 2.0 } else { 2.0 / gamma }),
        )?;
        let alpha = finite("alpha", o.alpha.unwrap_or(2.0))?;
        if alpha <= 0.0 {
            return Err(usage("--alpha must be positive"));
        }
        let reference = o.reference.unwrap_or(ReferenceKind::Scarf);
        let g = finite("g", o.g.unwrap_or(1.0))?;
        let eps = finite("eps", o.eps.unwrap_or(0.5))?;
        if g <= 0.0 {
            return Err(usage("--g must be positive"));
        }
        if reference == ReferenceKind::Oscillator && eps == 0.0 && g != 0.5 {
            return Err(usage(
                "--eps 0 puts the oscillator singularity on the real line (needs g = 0.5)",
            ));
        }
        let half_width = finite(
            "L",
            o.half_width.unwrap_or(match reference {
                ReferenceKind::Scarf => 15.0,
                ReferenceKind::Oscillator => 12.0,
            }),
        )?;
        if half_width <= 0.0 {
            return Err(usage("--L must be positive"));
        }
        let points = o.points.unwrap_or(2401);
        if points < 5 || points.is_multiple_of(2) {
            return Err(usage(format!(
                "--N must be odd and at least 5, got {points}"
            )));
        }
        Ok(RunConfig {
            case,
            alpha,
            gamma,
            k,
            beta: o.beta.map(|b| finite("beta", b)).transpose()?,
            reference,
            lambda: finite("lambda", o.lambda.unwrap_or(5.25))?,
            mu: finite("mu", o.mu.unwrap_or(0.25))?,
            g,
            eps,
            qparity: sign("qparity", o.qparity)?,
            sign_p: sign("sign-p", o.sign_p)?,
            sign_q: sign("sign-q", o.sign_q)?,
            convention: o.convention.unwrap_or(ConventionArg::Unit).into(),
            formula: o.formula.unwrap_or(FormulaArg::Corrected).into(),
            half_width,
            points,
            levels: o.levels.unwrap_or(LevelRange { start: 0, end: 1 }),
            format: o.format.unwrap_or(OutputFormat::Json),
            out: o.out,
        })
    }

    pub fn mass(&self) -> Result<MassDistribution> {
        Ok(MassDistribution::new(self.alpha, self.k)?)
    }

    pub fn scheme(&self) -> Result<PctScheme> {
        let mass = self.mass()?;
        let scheme = match self.case {
            CaseArg::A => PctScheme::case_a(mass),
            CaseArg::B => PctScheme::case_b(self.gamma, mass)?,
        };
        Ok(match self.beta {
            Some(b) => scheme.with_beta(b),
            None => scheme,
        })
    }

    /// The reference problem; the oscillator carries the configured quasi-parity.
    pub fn reference(&self) -> Result<ReferencePotential> {
        Ok(match self.reference {
            ReferenceKind::Scarf => {
                ReferencePotential::ScarfII(ScarfII::new(self.lambda, self.mu)?)
            }
            ReferenceKind::Oscillator => ReferencePotential::GenOscillator(GenOscillator::new(
                self.g,
                self.eps,
                self.qparity,
            )?),
        })
    }

    pub fn branch(&self) -> BranchSelection {
        BranchSelection {
            sign_p: self.sign_p,
            sign_q: self.sign_q,
        }
    }

    pub fn grid(&self) -> Result<GridSpec> {
        Ok(GridSpec::symmetric(self.half_width, self.points)?)
    }
}

impl Serialize for RunConfig {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("RunConfig", 20)?;
        st.serialize_field("case", &self.case)?;
        st.serialize_field("alpha", &Sci(self.alpha))?;
        st.serialize_field("gamma", &Sci(self.gamma))?;
        st.serialize_field("k", &Sci(self.k))?;
        st.serialize_field("beta", &self.beta.map(Sci))?;
        st.serialize_field("reference", &self.reference)?;
        st.serialize_field("lambda", &Sci(self.lambda))?;
        st.serialize_field("mu", &Sci(self.mu))?;
        st.serialize_field("g", &Sci(self.g))?;
        st.serialize_field("eps", &Sci(self.eps))?;
        st.serialize_field("qparity", &self.qparity)?;
        st.serialize_field("sign_p", &self.sign_p)?;
        st.serialize_field("sign_q", &self.sign_q)?;
        st.serialize_field("convention", &self.convention)?;
        st.serialize_field("formula", &self.formula)?;
        st.serialize_field("L", &Sci(self.half_width))?;
        st.serialize_field("N", &self.points)?;
        st.serialize_field("levels", &self.levels)?;
        st.serialize_field("format", &self.format)?;
        st.serialize_field("out", &self.out.as_ref().map(|p| p.display().to_string()))?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_ranges() {
        assert_eq!(
            "0..3".parse::<LevelRange>().unwrap(),
            LevelRange { start: 0, end: 3 }
        );
        assert_eq!(
            "2..=4".parse::<LevelRange>().unwrap(),
            LevelRange { start: 2, end: 4 }
        );
        assert_eq!(
            "5".parse::<LevelRange>().unwrap(),
            LevelRange { start: 5, end: 5 }
        );
        assert!("3..1".parse::<LevelRange>().is_err());
        assert!("a..b".parse::<LevelRange>().is_err());
        assert_eq!(LevelRange { start: 1, end: 3 }.iter().count(), 3);
    }

    #[test]
    fn defaults_follow_scheme_and_reference() {
        let c = RunConfig::default();
        assert_eq!(
            (c.case, c.k, c.gamma, c.half_width, c.points),
            (CaseArg::A, 2.0, 0.0, 15.0, 2401)
        );
        assert_eq!(c.convention, SpectrumConvention::Unit);
        let o = Options {
            case: Some(CaseArg::B),
            gamma: Some(0.5),
            reference: Some(ReferenceKind::Oscillator),
            ..Options::default()
        };
        let c = RunConfig::from_options(o).unwrap();
        assert_eq!((c.k, c.half_width), (4.0, 12.0));
    }

    #[test]
    fn validation_errors_are_usage_errors() {
        let bad = [
            Options {
                points: Some(100),
                ..Options::default()
            },
            Options {
                alpha: Some(-1.0),
                ..Options::default()
            },
            Options {
                gamma: Some(1.0),
                ..Options::default()
            },
            Options {
                case: Some(CaseArg::B),
                gamma: Some(0.0),
                ..Options::default()
            },
            Options {
                qparity: Some(3),
                ..Options::default()
            },
            Options {
                reference: Some(ReferenceKind::Oscillator),
                eps: Some(0.0),
                ..Options::default()
            },
        ];
        for o in bad {
            let err = RunConfig::from_options(o).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{err}");
        }
    }

    #[test]
    fn flags_override_file() {
        let file: Options =
            toml::from_str("alpha = 3.0\nN = 601\nlevels = \"0..2\"\nreference = \"oscillator\"")
                .unwrap();
        let flags = Options {
            alpha: Some(5.0),
            ..Options::default()
        };
        let c = RunConfig::from_options(flags.or(file)).unwrap();
        assert_eq!((c.alpha, c.points), (5.0, 601));
        assert_eq!(c.levels, LevelRange { start: 0, end: 2 });
        assert_eq!(c.reference, ReferenceKind::Oscillator);
        assert!(toml::from_str::<Options>("unknown = 1").is_err());
    }

    #[test]
    fn parses_negative_values() {
        let cli = Cli::try_parse_from([
            "pdm-spectra",
            "spectrum",
            "--mu",
            "-0.25",
            "--qparity",
            "-1",
            "--sign-p",
            "+1",
            "--L",
            "8",
        ])
        .unwrap();
        let c = cli.command.options().resolve().unwrap();
        assert_eq!(
            (c.mu, c.qparity, c.sign_p, c.half_width),
            (-0.25, Sign::Minus, Sign::Plus, 8.0)
        );
        assert!(Cli::try_parse_from(["pdm-spectra", "spectrum", "--alpha", "x"]).is_err());
    }
}
