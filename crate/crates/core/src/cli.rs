//! Command-line surface. Values resolve as flag, then JSON config entry,
//! then built-in default.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::chain::{allowed_spins, chain_hamiltonians, collective_spec, dfs_dimension, sum_dim_su, sum_dim_u};
use crate::channels::gate_error_report;
use crate::error::{Error, Result};
use crate::grape::{gamma_sweep, hadamard, OptimizeOptions};
use crate::lie::{closure_dim, dfs_lie_dimension};
use crate::lindblad::{apply_superprojector, detect_dfs, propagate, steady_superprojector, LindbladSpec, Superoperator};
use crate::models::{build_model, two_qubit_control_problem, ModelName, ModelParams, Objective};
use crate::ops::{linalg, tensor, DensityMatrix, HilbertSpace, Operator};
use crate::zeno::{strong_damping_error, zeno_limit, zeno_product};

#[derive(Parser, Debug)]
#[command(name = "zenoforge", version, about = "Noise-assisted controllability of open quantum systems")]
pub struct Cli {
    /// JSON file whose keys supply defaults for the flags of the same name.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for randomized steps.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the table to this file as CSV instead of printing it.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// two-qubit-amp, two-qubit-dephasing, n-level-atom or ising-chain.
    #[arg(long)]
    pub model: Option<String>,
    /// Level count of the atom or length of the chain.
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated decay rates.
    #[arg(long, value_delimiter = ',')]
    pub gammas: Option<Vec<f64>>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Lie dimensions without noise and after projection by the noise.
    LieDim(ModelArgs),
    /// Decoherence-free subspaces of a model's dissipator.
    Dfs(ModelArgs),
    /// Zeno-product and strong-damping convergence for a model.
    ZenoCheck {
        #[command(flatten)]
        model: ModelArgs,
        /// Total time.
        #[arg(long)]
        time: Option<f64>,
        /// Comma-separated step counts for the Zeno product.
        #[arg(long, value_delimiter = ',')]
        steps: Option<Vec<usize>>,
        /// Comma-separated coupling strengths for the strong-damping error.
        #[arg(long, value_delimiter = ',')]
        couplings: Option<Vec<f64>>,
    },
    /// DFS dimensions and Lie dimensions of the collective-decoherence chain.
    ReproduceTable1 {
        #[arg(long)]
        nmax: Option<usize>,
    },
    /// Optimize a gate at several noise strengths.
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        /// Goal gate on the first qubit.
        #[arg(long)]
        target: Option<String>,
        /// eps1 or eps2.
        #[arg(long)]
        objective: Option<String>,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        slices: Option<usize>,
        #[arg(long)]
        time: Option<f64>,
    },
    /// Gate errors of the channel generated by a JSON spec over a time.
    Fidelity {
        /// Lindblad spec JSON, including the Hamiltonian.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        time: Option<f64>,
        /// Goal gate on the first factor.
        #[arg(long)]
        target: Option<String>,
    },
}

struct Config(Map<String, Value>);

impl Config {
    fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self(Map::new()));
        };
        match serde_json::from_str(&std::fs::read_to_string(path)?)? {
            Value::Object(m) => Ok(Self(m)),
            _ => Err(Error::InvalidParameter("config file must hold a JSON object".into())),
        }
    }

    fn get<T: serde::de::DeserializeOwned>(&self, key: &str) -> Result<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => serde_json::from_value(v.clone())
                .map(Some)
                .map_err(|e| Error::InvalidParameter(format!("config entry {key:?}: {e}"))),
        }
    }

    fn pick<T: serde::de::DeserializeOwned>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        Ok(match flag {
            Some(v) => v,
            None => self.get(key)?.unwrap_or(default),
        })
    }

    fn pick_opt<T: serde::de::DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }
}

fn resolve_model(cfg: &Config, args: &ModelArgs, default: &str) -> Result<(ModelName, ModelParams)> {
    let name: String = cfg.pick(args.model.clone(), "model", default.to_string())?;
    let params = ModelParams { n: cfg.pick_opt(args.n, "n")?, gammas: cfg.pick(args.gammas.clone(), "gammas", Vec::new())? };
    Ok((name.parse()?, params))
}

fn goal_gate(name: &str) -> Result<Operator> {
    match name {
        "hadamard" => Ok(hadamard()),
        other => Err(Error::InvalidParameter(format!("unknown target gate {other:?}"))),
    }
}

/// RFC-4180 CSV with floats at 12 significant digits.
pub fn format_float(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{:.11e}", x);
    let (mantissa, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let fixed = format!("{:.*}", decimals, x);
        if fixed.contains('.') {
            fixed.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            fixed
        }
    } else {
        let m = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{m}e{exp}")
    }
}

fn write_csv(out: &mut dyn Write, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn emit_table(csv_path: Option<&Path>, out: &mut dyn Write, header: &[&str], rows: &[Vec<String>], summary: &impl Serialize) -> Result<()> {
    match csv_path {
        Some(path) => {
            let mut file = std::fs::File::create(path)?;
            write_csv(&mut file, header, rows)?;
            emit_json(out, summary)
        }
        None => write_csv(out, header, rows),
    }
}

fn emit_json(out: &mut dyn Write, value: &impl Serialize) -> Result<()> {
    serde_json::to_writer(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn lie_dim(cfg: &Config, args: &ModelArgs, out: &mut dyn Write) -> Result<()> {
    let (name, params) = resolve_model(cfg, args, "two-qubit-amp")?;
    let model = build_model(name, &params)?;
    let lie = dfs_lie_dimension(&model.spec, &model.controls)?;
    let dim_dfs = lie.unital_dim.or_else(|| lie.block_dims.iter().cloned().max()).unwrap_or(0);
    let dim_nonoise = closure_dim(&model.controls)?;
    emit_json(out, &json!({ "dim_nonoise": dim_nonoise, "dim_dfs": dim_dfs }))
}

fn dfs(cfg: &Config, args: &ModelArgs, out: &mut dyn Write) -> Result<()> {
    let (name, params) = resolve_model(cfg, args, "two-qubit-amp")?;
    let model = build_model(name, &params)?;
    let dec = detect_dfs(&model.spec.dissipative_part());
    let blocks: Vec<Value> = dec
        .blocks()
        .iter()
        .map(|b| {
            let basis: Vec<Vec<[f64; 2]>> =
                (0..b.dim()).map(|k| b.basis.column(k).iter().map(|z| [z.re, z.im]).collect()).collect();
            json!({
                "dim": b.dim(),
                "lambdas": b.lambdas.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                "b": b.b,
                "basis": basis,
            })
        })
        .collect();
    emit_json(out, &json!({ "model": name.as_str(), "blocks": blocks }))
}

fn zeno_check(
    cfg: &Config,
    args: &ModelArgs,
    time: Option<f64>,
    steps: Option<Vec<usize>>,
    couplings: Option<Vec<f64>>,
    out: &mut dyn Write,
) -> Result<()> {
    let (name, params) = resolve_model(cfg, args, "two-qubit-amp")?;
    let t = cfg.pick(time, "time", 1.0)?;
    let steps = cfg.pick(steps, "steps", vec![1, 2, 4, 8, 16, 32, 64, 128, 256])?;
    let couplings = cfg.pick(couplings, "couplings", vec![10.0, 20.0, 40.0, 80.0])?;
    let model = build_model(name, &params)?;
    let dissipative = model.spec.dissipative_part();
    let p = steady_superprojector(&dissipative)?;
    let k = Superoperator::hamiltonian(&model.controls[0]);
    let limit = zeno_limit(&p, &k, t)?;
    let mut zeno = Vec::with_capacity(steps.len());
    for &n in &steps {
        let z = zeno_product(&p, &k, t, n)?;
        zeno.push(json!({ "n": n, "error": linalg::spectral_norm(&(z.matrix() - limit.matrix())) }));
    }
    let driven = dissipative.with_hamiltonian(model.controls[0].clone())?;
    let mut damping = Vec::with_capacity(couplings.len());
    for &g in &couplings {
        let err = strong_damping_error(&driven.scale_rates(g)?, 1.0, t)?;
        damping.push(json!({ "gamma": g, "error": err }));
    }
    emit_json(out, &json!({ "model": name.as_str(), "time": t, "zeno": zeno, "strong_damping": damping }))
}

/// Lie dimension of the superprojected chain controls for any length.
pub fn table_lie_dim(n: usize) -> Result<usize> {
    let spec = collective_spec(n, 1.0, 1.0, 1.0)?;
    let (h0, h1) = chain_hamiltonians(n);
    let mut projected = Vec::with_capacity(2);
    for h in [h0, h1] {
        let op = apply_superprojector(&spec, &h)?;
        let m = (op.matrix() + op.matrix().adjoint()) * crate::ops::c(0.5, 0.0);
        projected.push(Operator::new(op.space().clone(), m)?);
    }
    closure_dim(&projected)
}

/// Rows of the chain table for `N = 1..=nmax`: one per spin, then the Lie
/// dimension and the su and u sums. Empty cells mark spins not allowed.
pub fn chain_table_rows(nmax: usize) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let header: Vec<String> = std::iter::once("row".to_string()).chain((1..=nmax).map(|n| format!("N={n}"))).collect();
    let mut rows = Vec::new();
    for twice_j in 0..=nmax as u32 {
        let label = if twice_j % 2 == 0 { format!("J={}", twice_j / 2) } else { format!("J={}/2", twice_j) };
        let mut row = vec![label];
        for n in 1..=nmax as u32 {
            row.push(if allowed_spins(n).contains(&twice_j) { dfs_dimension(twice_j, n)?.to_string() } else { String::new() });
        }
        rows.push(row);
    }
    let mut lie = vec!["dim_L_DFS".to_string()];
    for n in 1..=nmax {
        lie.push(table_lie_dim(n)?.to_string());
    }
    rows.push(lie);
    rows.push(std::iter::once("sum_dim_su".to_string()).chain((1..=nmax as u32).map(|n| sum_dim_su(n).to_string())).collect());
    rows.push(std::iter::once("sum_dim_u".to_string()).chain((1..=nmax as u32).map(|n| sum_dim_u(n).to_string())).collect());
    Ok((header, rows))
}

fn reproduce_table1(cfg: &Config, nmax: Option<usize>, csv_path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let nmax = cfg.pick(nmax, "nmax", 6)?;
    if nmax == 0 {
        return Err(Error::InvalidParameter("nmax must be positive".into()));
    }
    let (header, rows) = chain_table_rows(nmax)?;
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    emit_table(csv_path, out, &header, &rows, &json!({ "rows": rows }))
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    cfg: &Config,
    args: &ModelArgs,
    target: Option<String>,
    objective: Option<String>,
    restarts: Option<usize>,
    slices: Option<usize>,
    time: Option<f64>,
    seed: Option<u64>,
    csv_path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<()> {
    let name: ModelName = cfg.pick(args.model.clone(), "model", "two-qubit-amp".to_string())?.parse()?;
    let gammas = cfg.pick(args.gammas.clone(), "gammas", vec![0.1, 1.0, 10.0, 100.0])?;
    let goal = goal_gate(&cfg.pick(target, "target", "hadamard".to_string())?)?;
    let objective = match cfg.pick(objective, "objective", "eps2".to_string())?.as_str() {
        "eps1" => Objective::Epsilon1,
        "eps2" => Objective::Epsilon2,
        other => return Err(Error::InvalidParameter(format!("objective must be eps1 or eps2, got {other:?}"))),
    };
    let defaults = OptimizeOptions::default();
    let opts = OptimizeOptions {
        restarts: cfg.pick(restarts, "restarts", defaults.restarts)?,
        slices: cfg.pick(slices, "slices", defaults.slices)?,
        seed: cfg.pick(seed, "seed", defaults.seed)?,
        ..defaults
    };
    let t = cfg.pick(time, "time", 1.0)?;
    let rows = gamma_sweep(|g| two_qubit_control_problem(name, g, &goal, objective, t), &gammas, &goal, &opts)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                format_float(r.gamma),
                format_float(r.best_eps),
                format_float(r.reduced_error),
                r.restarts.to_string(),
                r.iterations.to_string(),
            ]
        })
        .collect();
    emit_table(csv_path, out, &["gamma", "best_eps", "reduced_error", "restarts", "iterations"], &table, &rows)
}

fn fidelity(cfg: &Config, spec_path: Option<PathBuf>, time: Option<f64>, target: Option<String>, out: &mut dyn Write) -> Result<()> {
    let path: PathBuf = cfg
        .pick_opt(spec_path, "spec")?
        .ok_or_else(|| Error::InvalidParameter("fidelity needs --spec".into()))?;
    let spec = LindbladSpec::from_json(&std::fs::read_to_string(path)?)?;
    let t = cfg.pick(time, "time", 1.0)?;
    let goal = goal_gate(&cfg.pick(target, "target", "hadamard".to_string())?)?;
    let d = spec.dim();
    if d % goal.dim() != 0 {
        return Err(Error::DimensionMismatch { expected: goal.dim(), found: d });
    }
    let rest = HilbertSpace::single(d / goal.dim());
    let channel = propagate(&spec, t)?;
    let p = steady_superprojector(&spec.dissipative_part())?;
    let goal_map = Superoperator::from_unitary(&tensor(&goal, &Operator::identity(&rest)).relabel(spec.space().clone())?).compose(&p)?;
    let report = gate_error_report(&channel, &goal_map, &goal, &DensityMatrix::maximally_mixed(&rest))?;
    emit_json(out, &report)
}

/// Run a parsed command, writing results to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let cfg = Config::load(cli.config.as_deref())?;
    let csv_path = cfg.pick_opt(cli.csv.clone(), "csv")?;
    let csv_path = csv_path.as_deref();
    match cli.command {
        Command::LieDim(args) => lie_dim(&cfg, &args, out),
        Command::Dfs(args) => dfs(&cfg, &args, out),
        Command::ZenoCheck { model, time, steps, couplings } => zeno_check(&cfg, &model, time, steps, couplings, out),
        Command::ReproduceTable1 { nmax } => reproduce_table1(&cfg, nmax, csv_path, out),
        Command::Sweep { model, target, objective, restarts, slices, time } => {
            sweep(&cfg, &model, target, objective, restarts, slices, time, cli.seed, csv_path, out)
        }
        Command::Fidelity { spec, time, target } => fidelity(&cfg, spec, time, target, out),
    }
}

/// Parse `argv`, run, and map the outcome to an exit code: 0 on success, 2
/// for malformed flags, 1 for any other failure.
pub fn dispatch<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_use_twelve_significant_digits() {
        assert_eq!(format_float(0.1), "0.1");
        assert_eq!(format_float(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_float(100.0), "100");
        assert_eq!(format_float(1.234e-9), "1.234e-9");
        assert_eq!(format_float(2.0 / 3.0 * 1e-3), "0.000666666666667");
    }

    #[test]
    fn bad_flags_exit_with_two() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(dispatch(["zenoforge", "lie-dim", "--n", "x"], &mut out, &mut err), 2);
        assert_eq!(dispatch(["zenoforge", "no-such-command"], &mut out, &mut err), 2);
    }

    #[test]
    fn unknown_model_is_a_runtime_error() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(dispatch(["zenoforge", "lie-dim", "--model", "qutrit"], &mut out, &mut err), 1);
        assert!(String::from_utf8(err).unwrap().contains("qutrit"));
    }
}
