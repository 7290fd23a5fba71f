use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qdiv::azrenyi::{self, AzParams, RegionContext};
use qdiv::channels::{petz_pair, QuantumChannel};
use qdiv::fdiv::{self, DivergenceFunction};
use qdiv::io;
use qdiv::measured;
use qdiv::paperlab;
use qdiv::reversibility::{self, EqualityReport, DEFAULT_Z_GRID, PETZ_ENTRY};
use qdiv::{Error, PsdOperator, Tolerances};

#[derive(Parser)]
#[command(name = "qdiv", version, about = "Quantum f-divergences, Petz recovery and reversibility checks")]
struct Cli {
    #[command(flatten)]
    cfg: ConfigArgs,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Tolerance for pass/fail verdicts (overrides per-condition defaults).
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 1e-9)]
    hermiticity_tol: f64,
    #[arg(long, global = true, default_value_t = 1e-10)]
    psd_tol: f64,
    #[arg(long, global = true, default_value_t = 1e-8)]
    clustering_gap: f64,
    #[arg(long, global = true, env = "QDIV_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Output::Json)]
    out: Output,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    General,
    FixedSigma,
    FixedRho,
}

#[derive(Subcommand)]
enum Command {
    /// Divergences between two operators.
    Div {
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
        /// Function spec, e.g. eta, power:0.5, gs:1.
        #[arg(long, default_value = "eta")]
        f: String,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        z: Option<f64>,
    },
    /// Petz recovery map of a channel with respect to σ.
    Recover {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
        #[arg(long)]
        rho: Option<PathBuf>,
    },
    /// Standard and maximal preservation batteries.
    Check {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
    },
    /// Measured divergence by optimization over projective measurements.
    Measured {
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
        #[arg(long)]
        f: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = measured::MIN_RESTARTS)]
        restarts: usize,
    },
    /// Grid of α-z monotonicity verdicts with observed violations.
    ScanAz {
        #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,0.75,1.5,2,3")]
        alpha_grid: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,1,1.5,2,3")]
        z_grid: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Mode::General)]
        mode: Mode,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
    /// Reproduce a worked example by id, or all of them.
    Repro { id: String },
}

enum Failure {
    Input(String),
    Assertion(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

struct Outcome {
    json: Value,
    table: String,
    pass: bool,
}

fn tolerances(cfg: &ConfigArgs) -> Result<Tolerances, Failure> {
    for (name, v) in [("hermiticity-tol", cfg.hermiticity_tol), ("psd-tol", cfg.psd_tol), ("clustering-gap", cfg.clustering_gap)] {
        if !(v > 0.0) {
            return Err(Failure::Input(format!("--{name} must be positive")));
        }
    }
    if cfg.tol.is_some_and(|t| !(t > 0.0)) {
        return Err(Failure::Input("--tol must be positive".into()));
    }
    Ok(Tolerances { hermiticity_tol: cfg.hermiticity_tol, psd_tol: cfg.psd_tol, clustering_gap: cfg.clustering_gap })
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_psd(path: &Path, tol: Tolerances) -> Result<PsdOperator, Failure> {
    io::parse_psd(&read(path)?, tol).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_channel(path: &Path) -> Result<QuantumChannel, Failure> {
    io::parse_channel(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn same_dim(a: &PsdOperator, b: &PsdOperator) -> Result<(), Failure> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() }.into());
    }
    Ok(())
}

fn fmt_value(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::Number(n) => format!("{:.12}", n.as_f64().unwrap_or(f64::NAN)),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn div(cfg: &ConfigArgs, rho: &Path, sigma: &Path, f: &str, alpha: Option<f64>, z: Option<f64>) -> Result<Outcome, Failure> {
    let tol = tolerances(cfg)?;
    let (r, s) = (load_psd(rho, tol)?, load_psd(sigma, tol)?);
    same_dim(&r, &s)?;
    let func = DivergenceFunction::parse(f)?;
    let mut out = serde_json::Map::new();
    out.insert("f".into(), json!(func.to_string()));
    out.insert("S_f".into(), json!(fdiv::standard_f_div(&func, &r, &s)?));
    let hat = if func.operator_convex() { json!(fdiv::maximal_f_div(&func, &r, &s)?) } else { Value::Null };
    out.insert("S_hat_f".into(), hat);
    let (mut d_alpha, mut d_star, mut d_az) = (Value::Null, Value::Null, Value::Null);
    if let Some(a) = alpha {
        d_alpha = json!(fdiv::renyi_alpha(a, &r, &s)?);
        if a != 1.0 {
            d_star = json!(azrenyi::sandwiched_normalized(a, &r, &s)?);
            if let Some(zv) = z {
                d_az = json!(azrenyi::d_az(AzParams::new(a, zv)?, &r, &s)?);
            }
        }
    }
    out.insert("D_alpha".into(), d_alpha);
    out.insert("D_star_alpha".into(), d_star);
    out.insert("D_alpha_z".into(), d_az);
    out.insert("D_max".into(), json!(azrenyi::d_max(&r, &s)?));
    let table = out.iter().map(|(k, v)| format!("{k:<14} {}\n", fmt_value(v))).collect();
    Ok(Outcome { json: Value::Object(out), table, pass: true })
}

fn recover(cfg: &ConfigArgs, channel: &Path, sigma: &Path, rho: Option<&Path>) -> Result<Outcome, Failure> {
    let tol = tolerances(cfg)?;
    let phi = load_channel(channel)?;
    let s = load_psd(sigma, tol)?;
    let pm = petz_pair(&phi, &s)?;
    let rec = pm.recovery_channel()?;
    let rec_json: Value = serde_json::from_str(&io::channel_to_json(&rec)?).expect("valid JSON");
    let back_sigma = pm.recover(pm.phi_sigma.matrix());
    let sigma_res = reversibility::rel_trace_dist(&back_sigma, s.matrix());
    let mut out = json!({
        "recovery": rec_json,
        "phi_sigma": serde_json::to_value(io::MatrixJson::from(pm.phi_sigma.matrix())).expect("matrix"),
        "recovered_sigma": serde_json::to_value(io::MatrixJson::from(&back_sigma)).expect("matrix"),
        "sigma_residual": sigma_res,
    });
    let mut table = format!("recovery Kraus operators: {}\nσ residual: {sigma_res:.3e}\n", rec.kraus.len());
    if let Some(path) = rho {
        let r = load_psd(path, tol)?;
        same_dim(&r, &s)?;
        let back = pm.recover(&phi.apply(r.matrix()));
        let res = reversibility::rel_trace_dist(&back, r.matrix());
        out["recovered_rho"] = serde_json::to_value(io::MatrixJson::from(&back)).expect("matrix");
        out["rho_residual"] = json!(res);
        table.push_str(&format!("ϱ residual: {res:.3e}\n"));
    }
    Ok(Outcome { json: out, table, pass: true })
}

fn retol(mut rep: EqualityReport, tol: Option<f64>) -> EqualityReport {
    if let Some(t) = tol {
        for e in &mut rep.entries {
            e.tol = t;
            e.pass = e.residual <= t;
        }
    }
    rep
}

fn check(cfg: &ConfigArgs, channel: &Path, rho: &Path, sigma: &Path) -> Result<Outcome, Failure> {
    let tol = tolerances(cfg)?;
    let phi = load_channel(channel)?;
    let (r, s) = (load_psd(rho, tol)?, load_psd(sigma, tol)?);
    same_dim(&r, &s)?;
    if phi.in_dim != r.dim() {
        return Err(Error::DimensionMismatch { expected: phi.in_dim, found: r.dim() }.into());
    }
    let standard = retol(
        reversibility::standard_preservation_report(&phi, &r, &s, &reversibility::default_f_list(), &DEFAULT_Z_GRID)?,
        cfg.tol,
    );
    let maximal = retol(reversibility::maximal_preservation_report(&phi, &r, &s)?, cfg.tol);
    let std_ok = standard.entries.iter().all(|e| e.pass);
    let max_ok = maximal.entries.iter().filter(|e| e.name != PETZ_ENTRY).all(|e| e.pass);
    let word = |ok: bool| if ok { "preserved" } else { "NOT preserved" };
    let summary = format!("maximal: {}; standard: {}", word(max_ok), word(std_ok));
    let table = format!(
        "standard battery (verdict: {})\n{}\nmaximal battery (verdict: {})\n{}\n{summary}\n",
        standard.verdict,
        standard.table(),
        maximal.verdict,
        maximal.table()
    );
    let consistent = maximal.consistent && standard.consistent;
    let json = json!({ "summary": summary, "standard": standard, "maximal": maximal });
    if !consistent {
        return Err(Failure::Assertion(format!("equivalent conditions disagree numerically\n{table}")));
    }
    Ok(Outcome { json, table, pass: true })
}

fn measured_cmd(cfg: &ConfigArgs, rho: &Path, sigma: &Path, f: Option<&str>, alpha: Option<f64>, restarts: usize) -> Result<Outcome, Failure> {
    let tol = tolerances(cfg)?;
    let (r, s) = (load_psd(rho, tol)?, load_psd(sigma, tol)?);
    same_dim(&r, &s)?;
    let func = match (f, alpha) {
        (Some(spec), _) => DivergenceFunction::parse(spec)?,
        (None, Some(a)) if a == 1.0 => DivergenceFunction::eta(),
        (None, Some(a)) => DivergenceFunction::power(a)?,
        (None, None) => DivergenceFunction::eta(),
    };
    let opt = measured::measured_projective_opt(&func, &r, &s, restarts, measured::DEFAULT_MAX_ITER, cfg.seed)?;
    let measurement = match &opt.argument {
        measured::OptArgument::Measurement(m) => serde_json::to_value(m).expect("measurement"),
        measured::OptArgument::Omega(_) => Value::Null,
    };
    let mut out = json!({
        "f": func.to_string(),
        "value": opt.value,
        "measurement": measurement,
        "stationarity": opt.stationarity,
        "restarts": opt.restarts_used,
    });
    let mut table = format!("f            {}\nvalue        {}\nstationarity {:.3e}\n", func, opt.value, opt.stationarity);
    if let Some(a) = alpha {
        let m = measured::measured_renyi(a, &r, &s, restarts, cfg.seed)?;
        table.push_str(&format!("D_alpha^meas {}\n", m.value));
        out["renyi"] = serde_json::to_value(&m).expect("renyi");
    }
    Ok(Outcome { json: out, table, pass: true })
}

fn scan_az(cfg: &ConfigArgs, alphas: &[f64], zs: &[f64], mode: Mode, dim: usize, samples: usize) -> Result<Outcome, Failure> {
    if dim < 1 {
        return Err(Failure::Input("--dim must be positive".into()));
    }
    let ctx = match mode {
        Mode::General => RegionContext::General,
        Mode::FixedSigma => RegionContext::FixedSigma,
        Mode::FixedRho => RegionContext::FixedRho,
    };
    let cells = azrenyi::region_scan(alphas, zs, ctx, dim, samples, cfg.seed)?;
    let tol = cfg.tol.unwrap_or(1e-8);
    let bad: Vec<_> = cells.iter().filter(|c| c.verdict.monotone_claimed && c.max_violation > tol).collect();
    let mut table = String::from("alpha,z,general,fixed_point,claimed,max_violation\n");
    for c in &cells {
        table.push_str(&format!(
            "{},{},{},{},{},{:.3e}\n",
            c.alpha,
            c.z,
            c.verdict.general_conditions.join("+"),
            c.verdict.fixedpoint_conditions.join("+"),
            c.verdict.monotone_claimed,
            c.max_violation
        ));
    }
    let pass = bad.is_empty();
    Ok(Outcome { json: json!({ "cells": cells, "pass": pass }), table, pass })
}

fn repro(id: &str) -> Result<Outcome, Failure> {
    let reports = paperlab::reproduce(id)?;
    let pass = reports.iter().all(|r| r.pass);
    let table = reports.iter().map(|r| r.table()).collect::<Vec<_>>().join("\n");
    Ok(Outcome { json: json!({ "reports": reports, "pass": pass }), table, pass })
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let cfg = &cli.cfg;
    match &cli.cmd {
        Command::Div { rho, sigma, f, alpha, z } => div(cfg, rho, sigma, f, *alpha, *z),
        Command::Recover { channel, sigma, rho } => recover(cfg, channel, sigma, rho.as_deref()),
        Command::Check { channel, rho, sigma } => check(cfg, channel, rho, sigma),
        Command::Measured { rho, sigma, f, alpha, restarts } => measured_cmd(cfg, rho, sigma, f.as_deref(), *alpha, *restarts),
        Command::ScanAz { alpha_grid, z_grid, mode, dim, samples } => scan_az(cfg, alpha_grid, z_grid, *mode, *dim, *samples),
        Command::Repro { id } => repro(id),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(o) => {
            let text = match cli.cfg.out {
                Output::Json => serde_json::to_string_pretty(&o.json).expect("serializable") + "\n",
                Output::Table => o.table,
            };
            // a closed pipe (e.g. `| head`) is not an error
            let _ = std::io::stdout().write_all(text.as_bytes());
            if o.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Assertion(msg)) => {
            eprintln!("assertion failed: {msg}");
            ExitCode::from(1)
        }
    }
}
