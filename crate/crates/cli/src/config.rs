//! Run configuration: command-line flags, optionally overridden key by key
//! from a JSON file, resolved into one [`RunConfig`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use knn_scaling::config::ManifoldSpec;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::UsageError;

pub const DEFAULT_TRIALS: u64 = 100_000;
pub const DEFAULT_ORDER: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Analytic,
    Mc,
    Sweep,
    Curvature,
    Regge,
    Invert,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    #[default]
    Linear,
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SweepEngine {
    #[default]
    Mc,
    Quadrature,
}

/// Everything a run depends on. Two runs with equal configs (streams aside)
/// write identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub manifold: ManifoldSpec,
    pub k: Vec<u32>,
    pub n: Vec<u64>,
    pub trials: u64,
    pub seed: u64,
    pub streams: usize,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub fit: bool,
    #[serde(default)]
    pub model: Model,
    #[serde(default)]
    pub engine: SweepEngine,
    /// Series order for `curvature` and `invert`.
    #[serde(default = "default_order")]
    pub order: usize,
    /// Rational bracket coefficients for `invert`, e.g. `["1", "-1/3"]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<Vec<String>>,
    /// Constant Gaussian curvature for `invert` when no bracket is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curvature: Option<f64>,
}

fn default_order() -> usize {
    DEFAULT_ORDER
}

impl RunConfig {
    /// Sorted-key JSON with absent options omitted.
    pub fn canonical_json(&self) -> String {
        let v = serde_json::to_value(self).expect("config serializes");
        serde_json::to_string(&v).expect("value serializes")
    }

    #[cfg(test)]
    pub fn from_json(text: &str) -> Result<Self, UsageError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| UsageError(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), UsageError> {
        let bad = |m: String| Err(UsageError(m));
        self.manifold.validate().map_err(|e| UsageError(e.to_string()))?;
        if self.streams == 0 {
            return bad("streams must be at least 1".into());
        }
        match self.command {
            Command::Analytic | Command::Mc | Command::Sweep => {
                if self.k.is_empty() || self.n.is_empty() {
                    return bad("k and n lists must be non-empty".into());
                }
                if self.k.contains(&0) {
                    return bad("k must be at least 1".into());
                }
                let (kmax, nmin) = (*self.k.iter().max().unwrap(), *self.n.iter().min().unwrap());
                if u64::from(kmax) > nmin {
                    return bad(format!("bad grid: k = {kmax} exceeds N = {nmin}"));
                }
                if !(self.alpha > 0.0 && self.alpha.is_finite()) {
                    return bad(format!("alpha must be positive, got {}", self.alpha));
                }
                if self.trials == 0 {
                    return bad("trials must be at least 1".into());
                }
                if self.command == Command::Sweep && self.fit {
                    let mut grid = self.n.clone();
                    grid.sort_unstable();
                    grid.dedup();
                    let need = match self.model {
                        Model::Linear => 2,
                        Model::Quadratic => 3,
                    };
                    if grid.len() < need {
                        return bad(format!(
                            "bad grid: a {:?} fit needs {need} distinct N values",
                            self.model
                        ));
                    }
                    if grid[grid.len() - 1] < 10 * grid[0] {
                        return bad("bad grid: fitted N values must span at least a decade".into());
                    }
                }
            }
            Command::Curvature => {
                if !(1..=3).contains(&self.order) {
                    return bad(format!("curvature order must be 1..=3, got {}", self.order));
                }
            }
            Command::Regge => {}
            Command::Invert => {
                if self.bracket.is_some() && self.curvature.is_some() {
                    return bad("give either a bracket or a curvature, not both".into());
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "knn-scaling",
    version,
    about = "k-th nearest neighbor distance statistics on closed manifolds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Mean distance from the series and quadrature engines, side by side.
    Analytic(Common),
    /// Monte Carlo estimates of the distance moments.
    Mc(Common),
    /// Reduced moments over an N grid, optionally fitting the 1/N coefficient.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        fit: bool,
        #[arg(long, value_enum)]
        model: Option<Model>,
        #[arg(long, value_enum)]
        engine: Option<SweepEngine>,
    },
    /// Gauss-Bonnet characteristic and surface-averaged series of a conformal surface.
    Curvature {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        order: Option<usize>,
    },
    /// Vertex deficits and Euler characteristic of a polyhedral surface.
    Regge {
        #[command(flatten)]
        common: Common,
        /// Read the mesh from an OFF file instead of a named polyhedron.
        #[arg(long)]
        off: Option<PathBuf>,
    },
    /// Series reversion of a disc-area bracket.
    Invert {
        #[command(flatten)]
        common: Common,
        /// Comma-separated rationals, starting with 1.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        bracket: Option<Vec<String>>,
        /// Constant Gaussian curvature.
        #[arg(long, allow_hyphen_values = true)]
        curvature: Option<f64>,
        #[arg(long)]
        order: Option<usize>,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// Manifold name, e.g. flat-torus, sphere-geodesic, sphere-chord, cube.
    #[arg(long)]
    pub manifold: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<u64>>,
    /// Monte Carlo trials per N.
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; never changes the output.
    #[arg(long, env = "KNN_WORKERS")]
    pub streams: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Output file, written atomically; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// JSON file whose keys override the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Print the resolved configuration as canonical JSON and exit.
    #[arg(long)]
    pub print_config: bool,
}

fn default_streams() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn default_manifold(cmd: Command) -> &'static str {
    match cmd {
        Command::Curvature => "stereographic-sphere",
        Command::Regge => "cube",
        _ => "flat-torus",
    }
}

/// Resolves parsed arguments into a validated config. Returns the config and
/// whether only `--print-config` was requested.
pub fn resolve(cli: Cli) -> Result<(RunConfig, bool), UsageError> {
    let (command, common, extra): (Command, Common, Map<String, Value>) = match cli.command {
        CommandArgs::Analytic(c) => (Command::Analytic, c, Map::new()),
        CommandArgs::Mc(c) => (Command::Mc, c, Map::new()),
        CommandArgs::Sweep {
            common,
            fit,
            model,
            engine,
        } => {
            let mut m = Map::new();
            if fit {
                m.insert("fit".into(), Value::Bool(true));
            }
            insert(&mut m, "model", model);
            insert(&mut m, "engine", engine);
            (Command::Sweep, common, m)
        }
        CommandArgs::Curvature { common, order } => {
            let mut m = Map::new();
            insert(&mut m, "order", order);
            (Command::Curvature, common, m)
        }
        CommandArgs::Regge { common, off } => {
            let mut m = Map::new();
            if let Some(path) = off {
                m.insert(
                    "manifold".into(),
                    serde_json::json!({"kind": "polyhedron", "params": {"off": path}}),
                );
            }
            (Command::Regge, common, m)
        }
        CommandArgs::Invert {
            common,
            bracket,
            curvature,
            order,
        } => {
            let mut m = Map::new();
            insert(&mut m, "bracket", bracket);
            insert(&mut m, "curvature", curvature);
            insert(&mut m, "order", order);
            (Command::Invert, common, m)
        }
    };

    let mut v = Map::new();
    v.insert("command".into(), serde_json::to_value(command).unwrap());
    let manifold = common.manifold.as_deref().unwrap_or(default_manifold(command));
    v.insert("manifold".into(), Value::String(manifold.into()));
    v.insert(
        "k".into(),
        serde_json::to_value(common.k.unwrap_or_else(|| vec![1])).unwrap(),
    );
    v.insert(
        "n".into(),
        serde_json::to_value(common.n.unwrap_or_else(|| vec![100])).unwrap(),
    );
    v.insert("trials".into(), common.trials.unwrap_or(DEFAULT_TRIALS).into());
    v.insert("seed".into(), common.seed.unwrap_or(0).into());
    v.insert("streams".into(), common.streams.unwrap_or_else(default_streams).into());
    v.insert("alpha".into(), common.alpha.unwrap_or(1.0).into());
    insert(&mut v, "out", common.out);
    insert(&mut v, "format", common.format);
    v.extend(extra);

    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("reading {}: {e}", path.display())))?;
        let file: Value = serde_json::from_str(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
        let Value::Object(file) = file else {
            return Err(UsageError(format!("{}: expected a JSON object", path.display())));
        };
        v.extend(file);
    }
    let cfg: RunConfig = serde_json::from_value(Value::Object(v)).map_err(|e| UsageError(e.to_string()))?;
    cfg.validate()?;
    Ok((cfg, common.print_config))
}

fn insert<S: Serialize>(m: &mut Map<String, Value>, key: &str, value: Option<S>) {
    if let Some(x) = value {
        m.insert(key.into(), serde_json::to_value(x).unwrap());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig, UsageError> {
        let mut argv = vec!["knn-scaling"];
        argv.extend_from_slice(args);
        resolve(Cli::try_parse_from(argv).map_err(|e| UsageError(e.to_string()))?).map(|(c, _)| c)
    }

    #[test]
    fn flags_fill_config() {
        let c = parse(&[
            "mc",
            "--manifold",
            "sphere-chord",
            "--k",
            "1,2",
            "--n",
            "5,20",
            "--seed",
            "7",
            "--streams",
            "3",
        ])
        .unwrap();
        assert_eq!(c.command, Command::Mc);
        assert_eq!(c.k, vec![1, 2]);
        assert_eq!(c.n, vec![5, 20]);
        assert_eq!((c.seed, c.streams, c.trials), (7, 3, DEFAULT_TRIALS));
        assert_eq!(c.manifold.label(), "sphere-chord");
    }

    #[test]
    fn canonical_json_round_trips() {
        let c = parse(&[
            "sweep",
            "--manifold",
            "flat-torus-3d",
            "--n",
            "10,20,400",
            "--fit",
            "--streams",
            "2",
        ])
        .unwrap();
        let text = c.canonical_json();
        let back = RunConfig::from_json(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.canonical_json(), text);
    }

    #[test]
    fn bad_grids_are_usage_errors() {
        assert!(parse(&["mc", "--k", "5", "--n", "3"]).is_err());
        assert!(parse(&["mc", "--k", "0"]).is_err());
        assert!(parse(&["sweep", "--n", "10", "--fit"]).is_err());
        assert!(parse(&["sweep", "--n", "10,50", "--fit"]).is_err());
        assert!(parse(&["sweep", "--n", "10,100", "--fit"]).is_ok());
        assert!(parse(&["analytic", "--manifold", "klein-bottle"]).is_err());
        assert!(parse(&["invert", "--bracket", "1", "--curvature", "1"]).is_err());
    }

    #[test]
    fn negative_values_parse() {
        let c = parse(&["invert", "--bracket", "1,-1/3,2/45"]).unwrap();
        assert_eq!(c.bracket.unwrap(), vec!["1", "-1/3", "2/45"]);
        let c = parse(&["invert", "--curvature", "-2.5"]).unwrap();
        assert_eq!(c.curvature, Some(-2.5));
    }
}
