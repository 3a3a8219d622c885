//! `bidopt`: solve, certify and simulate contract-management instances.
//!
//! Exit codes: 0 success, 1 input or other error, 2 inadequate supply,
//! 3 solver did not converge or certification failed.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bidopt::io::SolutionFile;
use bidopt::*;
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(name = "bidopt", version, about = "Bid optimisation for contracts served through ad auctions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance and write prices, bids and the allocation as JSON.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Reduced-cost threshold for edges allowed to carry flow, scaled by
        /// 1 + the largest item price.
        #[arg(long, default_value_t = 1e-6)]
        eps_active: f64,
        /// Capacity margin for the upfront supply check.
        #[arg(long, default_value_t = 1e-6)]
        margin: f64,
    },
    /// Recompute objectives and optimality residuals of a stored solution.
    Certify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Also write the report as a one-row CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Simulate auctions under a solution's bids and routing.
    Simulate {
        #[arg(long)]
        input: PathBuf,
        /// Solution JSON; the instance is solved first when omitted.
        #[arg(long)]
        solution: Option<PathBuf>,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1000.0)]
        horizon: f64,
        #[arg(long, default_value_t = 10)]
        replications: usize,
        /// Use evenly spaced arrivals instead of a Poisson stream.
        #[arg(long)]
        deterministic: bool,
        /// Write cumulative fulfilment per contract to this CSV.
        #[arg(long)]
        series: Option<PathBuf>,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check whether supply can meet every target.
    Feasibility {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        margin: f64,
    },
    /// Spend a fixed budget for maximum value.
    Budget {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        budget: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Mean-variance portfolio with order-book impact, solved both ways.
    Markowitz {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write the valuation graph as CSV.
    Edges {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Regenerate the data behind the standard plots as CSV.
    Figures {
        #[arg(value_enum)]
        name: Figure,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Figure {
    LambdaGrid,
    BifurcationCost,
    BifurcationSupply,
    Sparsity,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BudgetItemJson {
    rate: f64,
    curve: SupplyCurve,
    auction: AuctionKind,
    value: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BudgetJson {
    items: Vec<BudgetItemJson>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MarkowitzJson {
    risk_aversion: f64,
    covariance: Vec<Vec<f64>>,
    alpha: Vec<f64>,
    /// One entry per asset; `null` means no impact cost.
    costs: Vec<Option<SupplyCurve>>,
    #[serde(default)]
    allow_short: bool,
}

#[derive(Serialize)]
struct CertificateJson {
    primal_value: f64,
    dual_value: f64,
    gap: f64,
    relative_gap: f64,
    contract_residual: f64,
    balance_residual: f64,
    capacity_residual: f64,
    min_allocation: f64,
    complementarity: f64,
    mu_consistency: f64,
    rho_consistency: f64,
    passed: bool,
}

impl From<&Certificate> for CertificateJson {
    fn from(c: &Certificate) -> Self {
        CertificateJson {
            primal_value: c.primal_value,
            dual_value: c.dual_value,
            gap: c.gap,
            relative_gap: c.relative_gap,
            contract_residual: c.contract_residual,
            balance_residual: c.balance_residual,
            capacity_residual: c.capacity_residual,
            min_allocation: c.min_allocation,
            complementarity: c.complementarity,
            mu_consistency: c.mu_consistency,
            rho_consistency: c.rho_consistency,
            passed: c.passed,
        }
    }
}

/// Failure that maps to a specific exit code.
#[derive(Debug)]
struct Exit(u8, String);

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.1)
    }
}

impl std::error::Error for Exit {}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    serde_json::from_reader(BufReader::new(file)).with_context(|| format!("cannot parse {}", path.display()))
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut out = sink(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn write_csv<T: Serialize>(path: Option<&Path>, rows: &[T]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(sink(path)?);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

fn solver_failure(err: SolverError) -> anyhow::Error {
    match err {
        SolverError::Infeasible(ref cert) => {
            let detail = serde_json::json!({
                "weights": cert.weights,
                "weighted_demand": cert.weighted_demand,
                "weighted_capacity": cert.weighted_capacity,
            });
            Exit(2, format!("{err}\ncertificate: {detail}")).into()
        }
        SolverError::NotConverged { .. } | SolverError::ActiveEdgeInfeasible { .. } => Exit(3, err.to_string()).into(),
        other => anyhow::Error::new(other),
    }
}

fn solve(instance: &ProblemInstance, tol: f64, margin: f64, eps_active: f64) -> Result<(DualSolution, PrimalSolution)> {
    if !(tol > 0.0 && margin >= 0.0 && eps_active > 0.0) {
        bail!("--tol and --eps-active must be positive and --margin nonnegative");
    }
    let options = SolverOptions { tol, feasibility_margin: margin, ..Default::default() };
    let dual = solve_dual(instance, &options).map_err(solver_failure)?;
    let scale = 1.0 + dual.mu.iter().copied().fold(0.0, f64::max);
    let primal = recover_primal(instance, &dual, Some(eps_active * scale)).map_err(solver_failure)?;
    Ok((dual, primal))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve { input, output, tol, eps_active, margin } => {
            let instance: ProblemInstance = read_json(&input)?;
            let (dual, primal) = solve(&instance, tol, margin, eps_active)?;
            let file = SolutionFile::new(&instance, &dual, &primal);
            write_json(output.as_deref(), &file)?;
            eprintln!(
                "solved: primal {:.10e}, dual {:.10e}, {} iterations",
                primal.primal_value, dual.dual_value, dual.iterations
            );
        }
        Command::Certify { input, solution, tol, csv } => {
            let instance: ProblemInstance = read_json(&input)?;
            let file: SolutionFile = read_json(&solution)?;
            let (dual, primal) = file.restore(&instance)?;
            let cert = certify(&instance, &dual, &primal, tol);
            let report = CertificateJson::from(&cert);
            write_json(None, &report)?;
            if let Some(path) = csv {
                write_csv(Some(&path), &[report])?;
            }
            if !cert.passed {
                return Err(Exit(3, format!("certification failed at tolerance {tol}")).into());
            }
        }
        Command::Simulate { input, solution, seed, horizon, replications, deterministic, series, bins, output } => {
            let instance: ProblemInstance = read_json(&input)?;
            let primal = match solution {
                Some(path) => read_json::<SolutionFile>(&path)?.restore(&instance)?.1,
                None => solve(&instance, 1e-8, 1e-6, 1e-6)?.1,
            };
            let policy = BidPolicy::from_solution(&instance, &primal);
            let config = SimulationConfig {
                horizon,
                replications,
                seed,
                deterministic_arrivals: deterministic,
                series_bins: bins,
            };
            let report = simulate(&instance, &policy, &config)?;
            if let Some(path) = series {
                let mut writer = csv::Writer::from_writer(sink(Some(&path))?);
                writer.write_record(["time", "contract_id", "cumulative_value", "planned_value"])?;
                for (b, row) in report.series.iter().enumerate() {
                    let t = horizon * (b + 1) as f64 / bins.max(1) as f64;
                    for (i, value) in row.iter().enumerate() {
                        let c = &instance.contracts()[i];
                        writer.write_record([
                            t.to_string(),
                            c.id.to_string(),
                            value.to_string(),
                            (c.target * t).to_string(),
                        ])?;
                    }
                }
                writer.flush()?;
            }
            write_json(output.as_deref(), &report)?;
        }
        Command::Feasibility { input, margin } => {
            let instance: ProblemInstance = read_json(&input)?;
            match instance.check_adequate_supply(margin)? {
                SupplyCheck::Adequate { .. } => println!("adequate"),
                SupplyCheck::Inadequate(cert) => {
                    let verified = cert.verify(&instance, margin);
                    let detail = serde_json::json!({
                        "weights": cert.weights,
                        "weighted_demand": cert.weighted_demand,
                        "weighted_capacity": cert.weighted_capacity,
                        "verified": verified,
                    });
                    println!("inadequate\n{detail}");
                    return Err(Exit(2, "supply is inadequate".into()).into());
                }
            }
        }
        Command::Budget { input, budget, output } => {
            let parsed: BudgetJson = read_json(&input)?;
            let items = parsed
                .items
                .into_iter()
                .map(|it| {
                    Ok(BudgetItem { rate: it.rate, cost: AcquisitionCost::new(it.curve, it.auction)?, value: it.value })
                })
                .collect::<Result<Vec<_>, CostError>>()?;
            let sol = solve_budget(&items, budget)?;
            write_json(
                output.as_deref(),
                &serde_json::json!({
                    "multiplier": sol.multiplier,
                    "bids": sol.bids.iter().map(|b| b.is_finite().then_some(*b)).collect::<Vec<_>>(),
                    "won": sol.won,
                    "spend": sol.spend,
                    "value": sol.value,
                }),
            )?;
        }
        Command::Markowitz { input, tol, output } => {
            let parsed: MarkowitzJson = read_json(&input)?;
            let m = parsed.alpha.len();
            if parsed.covariance.len() != m || parsed.covariance.iter().any(|r| r.len() != m) {
                bail!("covariance must be {m}x{m}");
            }
            let covariance = square_matrix(&parsed.covariance);
            let instance = MarkowitzInstance {
                risk_aversion: parsed.risk_aversion,
                covariance,
                alpha: parsed.alpha,
                costs: parsed.costs.into_iter().map(|c| c.map_or(AssetCost::Free, AssetCost::Book)).collect(),
                allow_short: parsed.allow_short,
            };
            let primal = instance.solve_primal(tol)?;
            let dual = instance.solve_dual(tol)?;
            write_json(
                output.as_deref(),
                &serde_json::json!({
                    "positions": primal.positions,
                    "objective": primal.objective,
                    "dual_positions": dual.positions,
                    "dual_objective": dual.objective,
                    "duality_gap": primal.objective + dual.objective,
                }),
            )?;
        }
        Command::Edges { input, output } => {
            let instance: ProblemInstance = read_json(&input)?;
            instance.write_edges_csv(sink(output.as_deref())?)?;
        }
        Command::Figures { name, output, points, seed } => {
            let out = output.as_deref();
            match name {
                Figure::LambdaGrid => write_csv(out, &figures::lambda_grid(points))?,
                Figure::BifurcationCost => write_csv(out, &figures::bifurcation_cost(points).map_err(solver_failure)?)?,
                Figure::BifurcationSupply => {
                    write_csv(out, &figures::bifurcation_supply(points).map_err(solver_failure)?)?
                }
                Figure::Sparsity => {
                    let start = std::time::Instant::now();
                    let row = figures::sparsity(1200, 200, seed).map_err(solver_failure)?;
                    eprintln!("solved in {:.2?}", start.elapsed());
                    write_csv(out, &[row])?
                }
            }
        }
    }
    Ok(())
}

fn square_matrix(rows: &[Vec<f64>]) -> bidopt::DMatrix<f64> {
    let m = rows.len();
    bidopt::DMatrix::from_fn(m, m, |i, j| rows[i][j])
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let code = err.downcast_ref::<Exit>().map_or(1, |e| e.0);
            eprintln!("error: {err:#}");
            ExitCode::from(code)
        }
    }
}
