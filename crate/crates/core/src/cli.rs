//! Problem specs and the batch front-end behind the `keypoly` binary.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::Deserialize;
use thiserror::Error;

use crate::baseval::{BaseValuation, ExponentRule, GenSeqRule, GenSeqValuation, MonomialValuation};
use crate::coeffield::{parse_element, ResidueField};
use crate::engine::{run, AlgorithmTrace, BranchPolicy, EngineError, EngineOptions, Verdict};
use crate::keychain::{ChainError, ZPoly};
use crate::ordgroup::{GroupElement, GroupSpec};
use crate::report::{emit, parse_formats, Format, ReportOptions};

pub const EXIT_TERMINATED: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_DIVERGING: i32 = 2;
pub const EXIT_BOUNDED: i32 = 3;
pub const EXIT_BRANCHED: i32 = 4;
pub const EXIT_RESIDUE: i32 = 5;
pub const EXIT_BAD_SPEC: i32 = 64;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    BadSpec(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Report(#[from] crate::report::ReportError),
}

impl CliError {
    /// Machine-parsable tag printed as `error[tag]: message`.
    pub fn tag(&self) -> &'static str {
        match self {
            CliError::Read { .. } => "io",
            CliError::BadSpec(_) => "bad-spec",
            CliError::Engine(e) => match e {
                EngineError::NotMonic | EngineError::NotIntegral { .. } => "bad-spec",
                EngineError::Reducible(_) => "reducible",
                EngineError::NonUnique { .. } => "non-unique",
                EngineError::SelectionOutOfRange { .. } => "bad-selection",
                EngineError::NoPrincipalSegment { .. } => "no-principal-segment",
                EngineError::SelfCheck { .. } => "self-check",
                EngineError::DepthLimit { .. } => "depth",
                EngineError::Chain(ChainError::NotAKeyPolynomial { .. }) => "not-a-key",
                EngineError::Chain(_) => "engine",
            },
            CliError::Report(_) => "output",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Read { .. } | CliError::BadSpec(_) => EXIT_BAD_SPEC,
            CliError::Engine(EngineError::NotMonic | EngineError::NotIntegral { .. } | EngineError::Reducible(_)) => {
                EXIT_BAD_SPEC
            }
            CliError::Engine(EngineError::SelectionOutOfRange { .. }) => EXIT_BAD_SPEC,
            _ => EXIT_ERROR,
        }
    }
}

fn bad(s: impl std::fmt::Display) -> CliError {
    CliError::BadSpec(s.to_string())
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum CharSpec {
    Number(u64),
    Name(String),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    /// 0 or "Q" for the rationals, a prime p for F_p.
    pub char: CharSpec,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariablesSpec {
    pub names: Vec<String>,
    #[serde(default = "default_z")]
    pub z: String,
}

fn default_z() -> String {
    "z".into()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ValuationSpec {
    Monomial {
        weights: Vec<String>,
    },
    Genseq {
        #[serde(default)]
        p0_value: Option<String>,
        #[serde(default)]
        ratio: Option<u64>,
        #[serde(default)]
        u_exponents: Vec<u64>,
        #[serde(default)]
        u_exponent_rule: Option<ExponentRule>,
        /// Explicit P₀ = u, P₁ = v, P₂, … instead of a rule.
        #[serde(default)]
        polys: Vec<String>,
        #[serde(default)]
        values: Vec<String>,
        #[serde(default)]
        depth: Option<usize>,
        #[serde(default)]
        max_depth: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialSpec {
    pub f: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BranchKind {
    First,
    Enumerate,
    Select,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsSpec {
    #[serde(default)]
    pub max_iter: Option<usize>,
    #[serde(default)]
    pub value_threshold: Option<String>,
    #[serde(default)]
    pub branch: Option<BranchKind>,
    #[serde(default)]
    pub select: Vec<[usize; 2]>,
    #[serde(default)]
    pub fast_path: bool,
    #[serde(default)]
    pub declared_unique: bool,
    /// f has coefficients in the valuation ring of V₀.
    #[serde(default)]
    pub declared_integral: bool,
    #[serde(default)]
    pub equal_degree_cap: Option<usize>,
}

impl Default for OptionsSpec {
    fn default() -> Self {
        OptionsSpec {
            max_iter: None,
            value_threshold: None,
            branch: None,
            select: vec![],
            fast_path: false,
            declared_unique: false,
            declared_integral: false,
            equal_degree_cap: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub emit: Option<Vec<String>>,
    #[serde(default)]
    pub dir: Option<String>,
    #[serde(default)]
    pub stem: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub field: FieldSpec,
    pub variables: VariablesSpec,
    #[serde(default)]
    pub group: Option<GroupSpec>,
    pub valuation: ValuationSpec,
    pub polynomial: PolynomialSpec,
    #[serde(default)]
    pub options: OptionsSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

/// A spec resolved into engine inputs.
#[derive(Debug, Clone)]
pub struct Problem {
    pub base: BaseValuation,
    pub f: ZPoly,
    pub zvar: String,
    pub options: EngineOptions,
}

impl ProblemSpec {
    pub fn from_toml(s: &str) -> Result<ProblemSpec, CliError> {
        toml::from_str(s).map_err(|e| bad(e.to_string().trim_end()))
    }

    pub fn from_json(s: &str) -> Result<ProblemSpec, CliError> {
        serde_json::from_str(s).map_err(bad)
    }

    /// Reads TOML, or JSON when the extension is `.json`.
    pub fn load(path: &Path) -> Result<ProblemSpec, CliError> {
        let s = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        if path.extension().is_some_and(|e| e == "json") {
            ProblemSpec::from_json(&s)
        } else {
            ProblemSpec::from_toml(&s)
        }
    }

    pub fn field(&self) -> Result<ResidueField, CliError> {
        match &self.field.char {
            CharSpec::Number(0) => Ok(ResidueField::Rationals),
            CharSpec::Number(p) => ResidueField::prime(*p).map_err(bad),
            CharSpec::Name(s) => match s.trim() {
                "Q" | "q" | "0" => Ok(ResidueField::Rationals),
                t => {
                    let p: u64 = t.parse().map_err(|_| bad(format!("unknown field characteristic {t:?}")))?;
                    if p == 0 {
                        Ok(ResidueField::Rationals)
                    } else {
                        ResidueField::prime(p).map_err(bad)
                    }
                }
            },
        }
    }

    pub fn group(&self) -> Result<Arc<GroupSpec>, CliError> {
        let g = self.group.clone().unwrap_or(GroupSpec::Rational);
        g.validate().map_err(bad)?;
        Ok(Arc::new(g))
    }

    /// Builds the base valuation; `depth` overrides a generating-sequence depth.
    pub fn base(&self, depth: Option<usize>) -> Result<BaseValuation, CliError> {
        let k = self.field()?;
        let names = self.variables.names.clone();
        if names.iter().any(|n| *n == self.variables.z) {
            return Err(bad(format!("{} is both a variable and the polynomial variable", self.variables.z)));
        }
        match &self.valuation {
            ValuationSpec::Monomial { weights } => {
                let spec = self.group()?;
                let w = weights
                    .iter()
                    .map(|s| GroupElement::parse(&spec, s).map_err(bad))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(BaseValuation::Monomial(MonomialValuation::new(k, names, spec, w).map_err(bad)?))
            }
            ValuationSpec::Genseq {
                p0_value,
                ratio,
                u_exponents,
                u_exponent_rule,
                polys,
                values,
                depth: d0,
                ..
            } => {
                if !polys.is_empty() {
                    let spec = self.group()?;
                    let ps = polys
                        .iter()
                        .map(|p| {
                            let e = parse_element(p, &names, k).map_err(bad)?;
                            e.as_poly().cloned().ok_or_else(|| bad(format!("{p} is not a polynomial")))
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    let vs = values
                        .iter()
                        .map(|s| GroupElement::parse(&spec, s).map_err(bad))
                        .collect::<Result<Vec<_>, _>>()?;
                    return Ok(BaseValuation::GenSeq(
                        GenSeqValuation::from_sequence(k, names, ps, vs).map_err(bad)?,
                    ));
                }
                let p0: BigRational = p0_value
                    .as_deref()
                    .unwrap_or("1")
                    .trim()
                    .parse()
                    .map_err(|_| bad("p0_value must be a rational number"))?;
                let rule = GenSeqRule {
                    ratio: ratio.ok_or_else(|| bad("genseq needs ratio or an explicit polys list"))?,
                    u_exponents: u_exponents.clone(),
                    tail: u_exponent_rule.clone(),
                };
                let depth = depth.or(*d0).unwrap_or(4);
                Ok(BaseValuation::GenSeq(
                    GenSeqValuation::from_rule(k, names, p0, rule, depth).map_err(bad)?,
                ))
            }
        }
    }

    pub fn resolve(&self, ov: &Overrides) -> Result<Problem, CliError> {
        let base = self.base(ov.depth)?;
        let f = ZPoly::parse(&self.polynomial.f, base.names(), &self.variables.z, base.field()).map_err(bad)?;
        if f.degree() < 1 || !f.is_monic() {
            return Err(bad(format!("f = {} is not unitary in {}", self.polynomial.f, self.variables.z)));
        }
        let o = &self.options;
        let mut options = EngineOptions {
            fast_path: o.fast_path,
            declared_unique: o.declared_unique,
            declared_integral: o.declared_integral,
            ..Default::default()
        };
        if let Some(m) = ov.max_iter.or(o.max_iter) {
            options.max_iter = m;
        }
        if let Some(c) = o.equal_degree_cap {
            options.equal_degree_cap = c;
        }
        if let ValuationSpec::Genseq { max_depth: Some(m), .. } = &self.valuation {
            options.max_depth = *m;
        }
        if let Some(d) = ov.depth {
            options.max_depth = options.max_depth.max(d);
        }
        if let Some(t) = ov.threshold.as_ref().or(o.value_threshold.as_ref()) {
            options.value_threshold = Some(GroupElement::parse(base.spec(), t).map_err(bad)?);
        }
        options.branch = match ov.branch.or(o.branch).unwrap_or(BranchKind::First) {
            BranchKind::First => BranchPolicy::First,
            BranchKind::Enumerate => BranchPolicy::Enumerate,
            BranchKind::Select => {
                if o.select.is_empty() {
                    return Err(bad("branch policy select needs options.select"));
                }
                BranchPolicy::Select(o.select.clone())
            }
        };
        Ok(Problem {
            base,
            f,
            zvar: self.variables.z.clone(),
            options,
        })
    }
}

/// Command-line values that take precedence over the spec file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub max_iter: Option<usize>,
    pub threshold: Option<String>,
    pub branch: Option<BranchKind>,
    pub depth: Option<usize>,
}

pub fn exit_code(v: &Verdict) -> i32 {
    match v {
        Verdict::TerminatedPhiEqualsF => EXIT_TERMINATED,
        Verdict::DivergingLimit { .. } => EXIT_DIVERGING,
        Verdict::BoundedInconclusive { .. } | Verdict::MaxIterations { .. } | Verdict::DepthExceeded { .. } => {
            EXIT_BOUNDED
        }
        Verdict::Branched(_) => EXIT_BRANCHED,
        Verdict::ResidueRootsNotInField { .. } => EXIT_RESIDUE,
    }
}

#[derive(Debug, Parser)]
#[command(name = "keypoly", version, about = "Key polynomials and approximant valuations of a unitary polynomial")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the construction on a TOML or JSON problem spec.
    Run {
        spec: PathBuf,
        /// Comma-separated list of json, text, svg.
        #[arg(long)]
        emit: Option<String>,
        #[arg(long)]
        max_iter: Option<usize>,
        /// Value above which the run is declared diverging.
        #[arg(long)]
        threshold: Option<String>,
        #[arg(long, value_enum)]
        branch: Option<BranchKind>,
        /// Generating-sequence depth.
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Result of a successful invocation.
#[derive(Debug)]
pub struct Outcome {
    pub trace: AlgorithmTrace,
    pub files: Vec<PathBuf>,
    pub code: i32,
}

pub fn run_spec(
    spec_path: &Path,
    emit_list: Option<&str>,
    out: Option<&Path>,
    ov: &Overrides,
) -> Result<Outcome, CliError> {
    let spec = ProblemSpec::load(spec_path)?;
    let problem = spec.resolve(ov)?;
    let formats: Vec<Format> = match emit_list {
        Some(s) => parse_formats(s).map_err(bad)?,
        None => match &spec.output.emit {
            Some(v) => parse_formats(&v.join(",")).map_err(bad)?,
            None => vec![Format::Json, Format::Text],
        },
    };
    let trace = run(&problem.base, &problem.f, &problem.options)?;
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| spec.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let stem = spec
        .output
        .stem
        .clone()
        .or_else(|| spec.name.clone())
        .or_else(|| spec_path.file_stem().map(|s| s.to_string_lossy().into_owned()))
        .unwrap_or_else(|| "trace".into());
    let ropts = ReportOptions {
        zvar: problem.zvar.clone(),
        declared_unique: problem.options.declared_unique,
    };
    let files = emit(&trace, &ropts, &formats, &dir, &stem)?;
    let code = exit_code(&trace.verdict);
    Ok(Outcome { trace, files, code })
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => EXIT_BAD_SPEC,
            };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Run {
            spec,
            emit,
            max_iter,
            threshold,
            branch,
            depth,
            out,
        } => {
            let ov = Overrides {
                max_iter,
                threshold,
                branch,
                depth,
            };
            match run_spec(&spec, emit.as_deref(), out.as_deref(), &ov) {
                Ok(o) => {
                    println!("verdict: {}", o.trace.verdict.name());
                    for f in &o.files {
                        println!("wrote {}", f.display());
                    }
                    o.code
                }
                Err(e) => {
                    eprintln!("error[{}]: {e}", e.tag());
                    e.exit_code()
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX52: &str = r#"
[field]
char = "Q"

[variables]
names = ["x"]

[valuation]
kind = "monomial"
weights = ["1"]

[polynomial]
f = "z^2 + 2*x*z + x^2 - x^3"

[options]
fast_path = true
declared_unique = true
"#;

    #[test]
    fn parses_monomial_spec() {
        let s = ProblemSpec::from_toml(EX52).unwrap();
        let p = s.resolve(&Overrides::default()).unwrap();
        assert_eq!(p.f.degree(), 2);
        assert!(p.options.fast_path);
        assert_eq!(p.options.branch, BranchPolicy::First);
    }

    #[test]
    fn rejects_unknown_keys_and_nonmonic() {
        assert!(ProblemSpec::from_toml(&EX52.replace("fast_path", "fastpath")).is_err());
        let s = ProblemSpec::from_toml(&EX52.replace("z^2 + 2*x*z", "2*z^2 + 2*x*z")).unwrap();
        assert!(matches!(s.resolve(&Overrides::default()), Err(CliError::BadSpec(_))));
    }

    #[test]
    fn select_needs_indices() {
        let s = ProblemSpec::from_toml(&EX52.replace("fast_path = true", "branch = \"select\"")).unwrap();
        assert!(s.resolve(&Overrides::default()).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Verdict::TerminatedPhiEqualsF), 0);
        assert_eq!(exit_code(&Verdict::MaxIterations { cap: 1 }), 3);
        assert_eq!(exit_code(&Verdict::Branched(vec![])), 4);
    }
}
