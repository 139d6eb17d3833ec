//! State sources: compact specs, CLI-only mixed-state specs and JSON files.
//!
//! Spec grammar on top of the core grammar:
//!
//! - `rhop:<p>` gives `(1 - p)|0><0| + p|1><1|`
//! - `loss:<eta>:<spec>` sends `<spec>` through a pure-loss channel of
//!   transmissivity `eta`
//!
//! A state file holds either `{"dim": d, "re": [...], "im": [...]}` (a state
//! vector of length `d` or a row-major `d x d` density matrix) or a list of
//! `{"c": .., "alpha": ..}` superposition components. Complex numbers may be
//! strings such as `"1-0.5i"`, `[re, im]` pairs or plain reals.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use nclass_core::{
    loss_channel, parse_complex, prepare_pure, prepare_superposition, rho_p, suggest_dim, CMatrix,
    CoherentSuperposition, DensityMatrix, ModeDims, PureState, StateSpec, Support, TruncatedBasis, C64,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Args)]
pub struct StateArgs {
    /// State spec, e.g. fock:3, coherent:1+0.5i, sqvac:0.5:0, cat:+:1.0, fsup:3, rhop:0.3, loss:0.9:cat:+:1
    #[arg(long, required_unless_present = "state_file", conflicts_with = "state_file")]
    pub state: Option<String>,

    /// JSON state file (dense vector/matrix or superposition component list)
    #[arg(long)]
    pub state_file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateSource {
    Spec(StateSpec),
    RhoP(f64),
    Loss { eta: f64, inner: Box<StateSource> },
}

impl FromStr for StateSource {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let s = s.trim();
        if let Some(p) = s.strip_prefix("rhop:") {
            return Ok(StateSource::RhoP(parse_f64(p)?));
        }
        if let Some(rest) = s.strip_prefix("loss:") {
            let (eta, inner) = rest
                .split_once(':')
                .ok_or_else(|| CliError::Usage(format!("cannot parse state `{s}`: expected loss:<eta>:<spec>")))?;
            return Ok(StateSource::Loss {
                eta: parse_f64(eta)?,
                inner: Box::new(inner.parse()?),
            });
        }
        StateSpec::from_str(s)
            .map(StateSource::Spec)
            .map_err(|e| CliError::Usage(format!("cannot parse state `{s}`: {e}")))
    }
}

fn parse_f64(t: &str) -> CliResult<f64> {
    t.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| CliError::Usage(format!("cannot parse `{t}` as a finite number")))
}

/// A prepared single-mode state.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub label: String,
    pub rho: DensityMatrix,
    pub pure: Option<PureState>,
    pub spec: Option<StateSpec>,
    pub superposition: Option<CoherentSuperposition>,
}

impl Loaded {
    fn from_pure(label: String, psi: PureState) -> Self {
        Self {
            label,
            rho: psi.to_density(),
            pure: Some(psi),
            spec: None,
            superposition: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }
}

pub fn load(args: &StateArgs, dim: Option<usize>) -> CliResult<Loaded> {
    match (&args.state, &args.state_file) {
        (Some(s), _) => load_source(&s.parse()?, s.trim(), dim),
        (None, Some(path)) => load_file(path, dim),
        (None, None) => Err(CliError::Usage("either --state or --state-file is required".into())),
    }
}

pub fn load_source(src: &StateSource, label: &str, dim: Option<usize>) -> CliResult<Loaded> {
    match src {
        StateSource::Spec(spec) => {
            let d = dim.unwrap_or_else(|| suggest_dim(spec));
            let psi = prepare_pure(spec, TruncatedBasis::new(d)?)?;
            let mut out = Loaded::from_pure(label.to_string(), psi);
            out.spec = Some(*spec);
            out.superposition = cat_superposition(spec);
            Ok(out)
        }
        StateSource::RhoP(p) => {
            let d = dim.unwrap_or(4);
            let rho = rho_p(*p, TruncatedBasis::new(d)?)?;
            Ok(Loaded {
                label: label.to_string(),
                rho,
                pure: None,
                spec: None,
                superposition: None,
            })
        }
        StateSource::Loss { eta, inner } => {
            let base = load_source(inner, label, dim)?;
            let rho = loss_channel(&base.rho, *eta)?;
            Ok(Loaded {
                label: label.to_string(),
                pure: pure_part(&rho)?,
                rho,
                spec: None,
                superposition: None,
            })
        }
    }
}

/// Coherent-state superposition equivalent of a cat or coherent spec.
pub fn cat_superposition(spec: &StateSpec) -> Option<CoherentSuperposition> {
    match *spec {
        StateSpec::Coherent(a) => CoherentSuperposition::new(vec![C64::new(1.0, 0.0)], vec![a]).ok(),
        StateSpec::Cat { alpha, parity } => CoherentSuperposition::new(
            vec![C64::new(1.0, 0.0), C64::new(parity.sign(), 0.0)],
            vec![alpha, -alpha],
        )
        .ok(),
        _ => None,
    }
}

/// The state vector when `rho` is pure to numerical precision.
fn pure_part(rho: &DensityMatrix) -> CliResult<Option<PureState>> {
    if rho.purity() < 1.0 - 1e-10 {
        return Ok(None);
    }
    let support = Support::from_density(rho)?;
    if support.rank() != 1 {
        return Ok(None);
    }
    Ok(Some(PureState::from_unnormalized(
        rho.basis()?,
        support.vectors[0].clone(),
    )?))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum StateFile {
    Dense { dim: usize, re: Vec<f64>, im: Vec<f64> },
    Superposition(Vec<Component>),
}

#[derive(Debug, Clone, Deserialize)]
struct Component {
    c: ComplexIn,
    alpha: ComplexIn,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ComplexIn {
    Text(String),
    Pair([f64; 2]),
    Real(f64),
}

impl ComplexIn {
    fn value(&self) -> CliResult<C64> {
        match self {
            ComplexIn::Text(s) => Ok(parse_complex(s)?),
            ComplexIn::Pair([re, im]) => Ok(C64::new(*re, *im)),
            ComplexIn::Real(re) => Ok(C64::new(*re, 0.0)),
        }
    }
}

/// Serialized form of a state vector or operator.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DenseDoc {
    pub dim: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl DenseDoc {
    pub fn from_slice(dim: usize, data: &[C64]) -> Self {
        Self {
            dim,
            re: data.iter().map(|z| z.re).collect(),
            im: data.iter().map(|z| z.im).collect(),
        }
    }
}

fn load_file(path: &Path, dim: Option<usize>) -> CliResult<Loaded> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let file: StateFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: not a recognised state file: {e}", path.display())))?;
    let label = path.display().to_string();
    match file {
        StateFile::Dense { dim: d, re, im } => {
            if re.len() != im.len() {
                return Err(CliError::Usage(format!(
                    "{label}: re and im have different lengths ({} vs {})",
                    re.len(),
                    im.len()
                )));
            }
            let data: Vec<C64> = re.iter().zip(&im).map(|(&a, &b)| C64::new(a, b)).collect();
            let target = dim.unwrap_or(d);
            if target < d {
                return Err(CliError::Usage(format!(
                    "{label}: --dim {target} is smaller than the stored dimension {d}"
                )));
            }
            if data.len() == d {
                let psi = PureState::new(TruncatedBasis::new(d)?, data)?.padded(target)?;
                Ok(Loaded::from_pure(label, psi))
            } else if data.len() == d * d {
                let rho = DensityMatrix::new(ModeDims::One(d), CMatrix::from_row_major(d, d, data))?.padded(target)?;
                rho.check_truncation()?;
                Ok(Loaded {
                    label,
                    pure: pure_part(&rho)?,
                    rho,
                    spec: None,
                    superposition: None,
                })
            } else {
                Err(CliError::Usage(format!(
                    "{label}: expected {d} (vector) or {} (matrix) entries, found {}",
                    d * d,
                    data.len()
                )))
            }
        }
        StateFile::Superposition(components) => {
            let (coefficients, centers): (Vec<C64>, Vec<C64>) = components
                .iter()
                .map(|c| Ok((c.c.value()?, c.alpha.value()?)))
                .collect::<CliResult<Vec<_>>>()?
                .into_iter()
                .unzip();
            let sup = CoherentSuperposition::new(coefficients, centers)?;
            let d = dim.unwrap_or_else(|| sup.suggest_dim());
            let psi = prepare_superposition(&sup, TruncatedBasis::new(d)?)?;
            let mut out = Loaded::from_pure(label, psi);
            out.superposition = Some(sup);
            Ok(out)
        }
    }
}
