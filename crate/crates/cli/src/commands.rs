//! Subcommands.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;

use treepark::bounds::{
    self, lower_bound_crude, lower_certificate, percolation_certificate, search_upper, AlphaGrid,
    BoundCertificate, Growth,
};
use treepark::dist::{ArrivalFamily, ArrivalLaw};
use treepark::montecarlo::{self, ArrivalSampler, EstimateConfig, OffspringLaw};
use treepark::numerics::{FixedDec, Fraction, Rational};
use treepark::order::{icx_compare_parking, reports_csv, Verdict};
use treepark::recursion::{self, BackendChoice, ModelConfig, Trajectory};

use crate::output::{replayable_args, Manifest, Output};
use crate::Failure;

#[derive(Parser, Debug)]
#[command(
    name = "treepark",
    version,
    about = "Parking process on trees: exact laws, bound certificates, simulation"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// P(X_n = 0) for every depth up to --depth, over one law or an alpha grid.
    QnTable(TableArgs),
    /// E X_n and E X_n / d^n for every depth, over one law or an alpha grid.
    ExTable(TableArgs),
    /// Certify an upper bound on the critical density at one alpha.
    BoundUpper(UpperArgs),
    /// Smallest alpha on a grid that certifies an upper bound.
    BoundSearch(SearchArgs),
    /// Lower bound on the critical density from counting subtrees.
    BoundLower(LowerArgs),
    /// Upper bound k d^-k on the critical density for atom arrivals.
    BoundPercolation(PercolationArgs),
    /// Monte Carlo estimates on Galton-Watson trees.
    Simulate(SimulateArgs),
    /// Compare the recursive evaluation with literal car movement on random trees.
    OracleCheck(OracleArgs),
    /// Increasing convex order between the laws of X_n under two arrival laws.
    IcxCheck(IcxArgs),
    /// Residuals of the expectation identities along a run.
    VerifyIdentities(IdentityArgs),
    /// Re-derive a certificate from its own fields.
    CheckCertificate(CheckArgs),
    /// Rerun the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Args, Debug, Clone)]
struct OutArgs {
    /// Directory for output files.
    #[arg(long, env = "TREEPARK_OUT", default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug, Clone)]
struct BackendArgs {
    /// Exact rational arithmetic instead of fixed point.
    #[arg(long)]
    exact: bool,
    /// Fractional digits of the fixed-point backend.
    #[arg(long, default_value_t = 200)]
    scale: u32,
    /// Largest tree, in vertices, an exact run may cover.
    #[arg(long)]
    exact_vertex_cap: Option<u128>,
}

impl BackendArgs {
    fn choice(&self) -> BackendChoice {
        if self.exact {
            BackendChoice::Exact
        } else {
            BackendChoice::Fixed { scale: self.scale }
        }
    }

    fn config(&self, d: u32, arrival: ArrivalLaw, depth: usize) -> ModelConfig {
        let mut cfg = ModelConfig {
            backend: self.choice(),
            ..ModelConfig::new(d, arrival, depth)
        };
        if let Some(cap) = self.exact_vertex_cap {
            cfg.exact_vertex_cap = cap;
        }
        cfg
    }

    /// Digits written for values of this backend.
    fn digits(&self, exact_digits: u32) -> u32 {
        if self.exact {
            exact_digits
        } else {
            self.scale
        }
    }
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    /// Arrival family for a grid: two, three or atom:<k>.
    #[arg(long, default_value = "two")]
    family: String,
    #[arg(long)]
    alpha_start: Option<String>,
    #[arg(long)]
    alpha_stop: Option<String>,
    #[arg(long)]
    alpha_step: Option<String>,
}

impl GridArgs {
    fn grid(&self) -> Result<Option<AlphaGrid>, Failure> {
        match (&self.alpha_start, &self.alpha_stop, &self.alpha_step) {
            (None, None, None) => Ok(None),
            (Some(a), Some(b), Some(s)) => Ok(Some(AlphaGrid::new(
                Rational::parse(a)?,
                Rational::parse(b)?,
                Rational::parse(s)?,
            )?)),
            _ => Err(Failure::Config(
                "--alpha-start, --alpha-stop and --alpha-step go together".into(),
            )),
        }
    }

    fn family(&self) -> Result<ArrivalFamily, Failure> {
        Ok(ArrivalFamily::parse(&self.family)?)
    }
}

#[derive(Args, Debug)]
struct TableArgs {
    #[arg(long, default_value_t = 2)]
    d: u32,
    /// A single arrival law, e.g. two:0.05 or pmf:0:0.9,3:0.1.
    #[arg(long, conflicts_with_all = ["alpha_start", "alpha_stop", "alpha_step"])]
    arrival: Option<String>,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    depth: usize,
    #[command(flatten)]
    backend: BackendArgs,
    /// Fractional digits written in exact mode.
    #[arg(long, default_value_t = 60)]
    digits: u32,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct UpperArgs {
    #[arg(long, default_value_t = 2)]
    d: u32,
    #[arg(long)]
    arrival: String,
    #[arg(long)]
    depth: usize,
    #[command(flatten)]
    backend: BackendArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[arg(long, default_value_t = 2)]
    d: u32,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    depth: usize,
    #[command(flatten)]
    backend: BackendArgs,
    /// Fractional digits of the margins in the CSV.
    #[arg(long, default_value_t = 40)]
    digits: u32,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct LowerArgs {
    #[arg(long, default_value_t = 2)]
    d: u32,
    /// catalan, ed, generalized-catalan or a number; defaults to catalan for
    /// d = 2 and ed otherwise.
    #[arg(long)]
    growth: Option<String>,
    #[arg(long, default_value_t = bounds::DEFAULT_SQRT_DIGITS)]
    sqrt_digits: u32,
    /// Also write the cruder 1 / (2 growth^2) bound.
    #[arg(long)]
    crude: bool,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct PercolationArgs {
    #[arg(long, default_value_t = 2)]
    d: u32,
    /// Atom size: k cars arrive with probability alpha / k.
    #[arg(long, default_value_t = 3)]
    k: u32,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Children per vertex when --offspring is not given.
    #[arg(long, default_value_t = 2)]
    d: u32,
    /// det:<d>, poisson:<mean> or pmf:<k>:<w>,...
    #[arg(long)]
    offspring: Option<String>,
    /// Finite arrival law or poisson:<alpha>.
    #[arg(long)]
    arrival: String,
    #[arg(long)]
    depth: usize,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value_t = montecarlo::DEFAULT_NODE_CAP)]
    node_cap: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long, default_value_t = 1000)]
    instances: u64,
    #[arg(long, default_value_t = 5)]
    max_depth: usize,
    /// Tie-break seeds per instance and depth.
    #[arg(long, default_value_t = 3)]
    tie_breaks: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct IcxArgs {
    #[arg(long, default_value_t = 2)]
    d: u32,
    /// The law expected to be smaller.
    #[arg(long)]
    arrival_a: String,
    #[arg(long)]
    arrival_b: String,
    #[arg(long, default_value_t = 10)]
    depth: usize,
    #[arg(long, default_value_t = 60)]
    digits: u32,
    #[arg(long)]
    exact_vertex_cap: Option<u128>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct IdentityArgs {
    #[arg(long, default_value_t = 2)]
    d: u32,
    #[arg(long)]
    arrival: String,
    #[arg(long)]
    depth: usize,
    #[command(flatten)]
    backend: BackendArgs,
    #[arg(long, default_value_t = 60)]
    digits: u32,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long)]
    certificate: PathBuf,
}

#[derive(Args, Debug)]
struct ReplayArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[command(flatten)]
    out: OutArgs,
}

pub fn dispatch(cli: Cli, args: &[String]) -> Result<(), Failure> {
    let replay_args = replayable_args(args);
    let (name, out_dir, seed) = match &cli.command {
        Command::CheckCertificate(a) => return check_certificate(a),
        Command::Replay(a) => return replay(a),
        Command::QnTable(a) => ("qn-table", &a.out.out, None),
        Command::ExTable(a) => ("ex-table", &a.out.out, None),
        Command::BoundUpper(a) => ("bound-upper", &a.out.out, None),
        Command::BoundSearch(a) => ("bound-search", &a.out.out, None),
        Command::BoundLower(a) => ("bound-lower", &a.out.out, None),
        Command::BoundPercolation(a) => ("bound-percolation", &a.out.out, None),
        Command::Simulate(a) => ("simulate", &a.out.out, Some(a.seed)),
        Command::OracleCheck(a) => ("oracle-check", &a.out.out, Some(a.seed)),
        Command::IcxCheck(a) => ("icx-check", &a.out.out, None),
        Command::VerifyIdentities(a) => ("verify-identities", &a.out.out, None),
    };
    let mut out = Output::new(out_dir)?;
    let result = match &cli.command {
        Command::QnTable(a) => table(a, &mut out, Table::Q),
        Command::ExTable(a) => table(a, &mut out, Table::Ex),
        Command::BoundUpper(a) => bound_upper(a, &mut out),
        Command::BoundSearch(a) => bound_search(a, &mut out),
        Command::BoundLower(a) => bound_lower(a, &mut out),
        Command::BoundPercolation(a) => bound_percolation(a, &mut out),
        Command::Simulate(a) => simulate(a, &mut out),
        Command::OracleCheck(a) => oracle_check(a, &mut out),
        Command::IcxCheck(a) => icx_check(a, &mut out),
        Command::VerifyIdentities(a) => verify_identities(a, &mut out),
        Command::CheckCertificate(_) | Command::Replay(_) => unreachable!("handled above"),
    };
    match result {
        // Config errors and tripped guards leave no manifest behind.
        Err(e @ (Failure::Config(_) | Failure::Resource(_))) => Err(e),
        other => {
            let code = other.as_ref().err().map_or(0, Failure::code);
            out.finish(name, replay_args, seed, code)?;
            other
        }
    }
}

fn arrival_laws(single: &Option<String>, grid: &GridArgs) -> Result<Vec<ArrivalLaw>, Failure> {
    match (single, grid.grid()?) {
        (Some(spec), _) => Ok(vec![ArrivalLaw::parse(spec)?]),
        (None, Some(g)) => {
            let family = grid.family()?;
            g.points().into_iter().map(|a| Ok(family.at(a)?)).collect()
        }
        (None, None) => Err(Failure::Config("give --arrival or an alpha grid".into())),
    }
}

/// In fixed mode every alpha must be an exact decimal at the chosen scale.
fn check_representable(laws: &[ArrivalLaw], backend: &BackendArgs) -> Result<(), Failure> {
    if !backend.exact {
        for law in laws {
            FixedDec::exact_of(&law.mean(), backend.scale)?;
        }
    }
    Ok(())
}

fn alpha_label(law: &ArrivalLaw) -> String {
    law.mean().to_canonical_string()
}

enum Table {
    Q,
    Ex,
}

fn table(a: &TableArgs, out: &mut Output, which: Table) -> Result<(), Failure> {
    let laws = arrival_laws(&a.arrival, &a.grid)?;
    check_representable(&laws, &a.backend)?;
    let digits = a.backend.digits(a.digits);
    let runs: Vec<(String, Trajectory)> = laws
        .par_iter()
        .map(|law| -> Result<_, Failure> {
            Ok((
                alpha_label(law),
                recursion::run(&a.backend.config(a.d, law.clone(), a.depth))?,
            ))
        })
        .collect::<Result<_, _>>()?;
    let mut csv = String::from(match which {
        Table::Q => "alpha,n,q_n\n",
        Table::Ex => "alpha,n,ex_n,ratio_lambda_n\n",
    });
    for (alpha, traj) in &runs {
        for n in 0..=traj.depth() {
            match which {
                Table::Q => writeln!(csv, "{alpha},{n},{}", traj.q[n].floor_decimal(digits)),
                Table::Ex => {
                    let ratio =
                        &traj.ex[n] * &Fraction::from(Rational::from_integer(a.d).pow(-(n as i32)));
                    writeln!(
                        csv,
                        "{alpha},{n},{},{}",
                        traj.ex[n].floor_decimal(digits),
                        ratio.floor_decimal(digits)
                    )
                }
            }
            .expect("writing to a string");
        }
    }
    let file = match which {
        Table::Q => "qn_table.csv",
        Table::Ex => "ex_table.csv",
    };
    out.write(file, &csv)?;
    println!(
        "wrote {} rows for {} law(s) to {file}",
        csv.lines().count() - 1,
        runs.len()
    );
    Ok(())
}

fn bound_upper(a: &UpperArgs, out: &mut Output) -> Result<(), Failure> {
    let cfg = a
        .backend
        .config(a.d, ArrivalLaw::parse(&a.arrival)?, a.depth);
    let check = bounds::certify_upper_with(&cfg)?;
    match check.certificate {
        Some(cert) => {
            out.write_json("bound_upper.json", &cert)?;
            println!(
                "certified: alpha_c({}) < {} (margin {})",
                a.d, cert.alpha, cert.margin
            );
            Ok(())
        }
        None => Err(Failure::Refused(format!(
            "not certified: g_n - F = {:.6e} at depth {}; try a larger depth or alpha",
            check.margin.to_f64(),
            a.depth
        ))),
    }
}

fn bound_search(a: &SearchArgs, out: &mut Output) -> Result<(), Failure> {
    let grid = a
        .grid
        .grid()?
        .ok_or_else(|| Failure::Config("bound-search needs an alpha grid".into()))?;
    let result = search_upper(a.d, a.grid.family()?, a.depth, a.backend.choice(), &grid)?;
    let mut csv = String::from("alpha,margin,certified\n");
    for p in &result.evaluated {
        writeln!(
            csv,
            "{},{},{}",
            p.alpha.to_canonical_string(),
            p.margin.floor_decimal(a.digits),
            p.certified
        )
        .expect("writing to a string");
    }
    out.write("bound_search.csv", &csv)?;
    match result.best {
        Some(cert) => {
            out.write_json("bound_search.json", &cert)?;
            println!("smallest certified alpha on the grid: {}", cert.alpha);
            Ok(())
        }
        None => Err(Failure::Refused(format!(
            "no grid point certified ({} evaluated)",
            result.evaluated.len()
        ))),
    }
}

fn bound_lower(a: &LowerArgs, out: &mut Output) -> Result<(), Failure> {
    let growth = match &a.growth {
        Some(g) => Growth::parse(g)?,
        None => Growth::default_for(a.d),
    };
    let cert = lower_certificate(a.d, &growth, a.sqrt_digits)?;
    out.write_json("bound_lower.json", &cert)?;
    println!("alpha_c({}) > {}", a.d, cert.alpha);
    if a.crude {
        let crude = lower_bound_crude(a.d, &growth)?;
        out.write_json(
            "bound_lower_crude.json",
            &json!({ "d": a.d, "growth": growth.to_string(), "alpha": crude.to_canonical_string() }),
        )?;
        println!("crude: alpha_c({}) > {}", a.d, crude.to_canonical_string());
    }
    Ok(())
}

fn bound_percolation(a: &PercolationArgs, out: &mut Output) -> Result<(), Failure> {
    let cert = percolation_certificate(a.d, a.k)?;
    out.write_json("bound_percolation.json", &cert)?;
    println!("atom:{} arrivals: alpha_c({}) <= {}", a.k, a.d, cert.alpha);
    Ok(())
}

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn simulate(a: &SimulateArgs, out: &mut Output) -> Result<(), Failure> {
    let offspring = match &a.offspring {
        Some(s) => OffspringLaw::parse(s)?,
        None => OffspringLaw::Deterministic(a.d),
    };
    let cfg = EstimateConfig {
        offspring,
        arrival: ArrivalSampler::parse(&a.arrival)?,
        depth: a.depth,
        trials: a.trials,
        seed: a.seed,
        node_cap: a.node_cap,
    };
    let report = match a.workers {
        Some(w) => montecarlo::estimate_with_workers(&cfg, w)?,
        None => montecarlo::estimate(&cfg)?,
    };
    out.write("simulate.csv", &report.to_csv())?;
    out.write("simulate_tau.csv", &report.tau_csv())?;
    let (transform, remainder) = report.tau_transform();
    out.write_json(
        "simulate.json",
        &json!({
            "offspring": cfg.offspring.spec(),
            "arrival": cfg.arrival.spec(),
            "depth": a.depth,
            "trials": a.trials,
            "seed": a.seed,
            "lambda": sci(report.lambda()),
            "tau_transform": sci(transform),
            "tau_transform_remainder": sci(remainder),
        }),
    )?;
    let last = report.at(a.depth);
    println!(
        "q_{} ~ {:.6} +- {:.2e}, E X_{} ~ {:.6} +- {:.2e}",
        a.depth, last.q_hat, last.q_se, a.depth, last.ex_hat, last.ex_se
    );
    Ok(())
}

fn oracle_check(a: &OracleArgs, out: &mut Output) -> Result<(), Failure> {
    let report = montecarlo::oracle_check(a.instances, a.max_depth, a.tie_breaks, a.seed)?;
    out.write_json("oracle_check.json", &report)?;
    if report.passed() {
        println!(
            "{} instances, {} comparisons, all equal",
            report.instances, report.comparisons
        );
        Ok(())
    } else {
        Err(Failure::Other(format!(
            "{} of {} comparisons disagree",
            report.mismatches.len(),
            report.comparisons
        )))
    }
}

fn icx_check(a: &IcxArgs, out: &mut Output) -> Result<(), Failure> {
    let mut cfgs = [&a.arrival_a, &a.arrival_b]
        .map(|s| ArrivalLaw::parse(s).map(|law| ModelConfig::new(a.d, law, a.depth).exact()));
    for cfg in cfgs.iter_mut().flatten() {
        if let Some(cap) = a.exact_vertex_cap {
            cfg.exact_vertex_cap = cap;
        }
    }
    let [cfg_a, cfg_b] = cfgs;
    let reports = icx_compare_parking(&cfg_a?, &cfg_b?, a.depth)?;
    out.write("icx_check.csv", &reports_csv(&reports, a.digits))?;
    match reports
        .iter()
        .enumerate()
        .find_map(|(depth, r)| match r.verdict {
            Verdict::ViolatedAt(t) => Some((depth, t)),
            Verdict::Dominated => None,
        }) {
        None => {
            println!("dominated at every depth 0..={}", a.depth);
            Ok(())
        }
        Some((depth, t)) => Err(Failure::Violation(format!(
            "order violated at depth {depth}, t = {t}"
        ))),
    }
}

fn verify_identities(a: &IdentityArgs, out: &mut Output) -> Result<(), Failure> {
    let law = ArrivalLaw::parse(&a.arrival)?;
    let alpha = law.mean();
    let lambda = a.d as u64;
    let mut cfg = a.backend.config(a.d, law.clone(), a.depth);
    check_representable(std::slice::from_ref(&law), &a.backend)?;
    if a.backend.exact {
        cfg = cfg.full_law();
    }
    let traj = recursion::run(&cfg)?;
    let digits = a.backend.digits(a.digits);
    let c_star = recursion::big_c_star(&alpha, lambda)?;
    let c_printed = recursion::big_c(&alpha, lambda)?;

    let mut csv =
        String::from("n,q_n,ex_n,law_mean_residual,closed_form_residual,limit_residual\n");
    let mut worst_mean = Fraction::zero();
    let mut worst_closed = Fraction::zero();
    for n in 0..=traj.depth() {
        let mean_res = a.backend.exact.then(|| &traj.law_mean[n] - &traj.ex[n]);
        let closed_res = match n {
            0 => None,
            _ => Some(
                &traj.ex[n]
                    - &recursion::closed_form_ex(&traj.g[n - 1], n - 1, &alpha, lambda, &c_star)?,
            ),
        };
        let limit_res =
            recursion::limit_identity_residual(&traj.ex[n], &traj.q[n], &alpha, lambda)?;
        if let Some(r) = &mean_res {
            worst_mean = worst_mean.max(r.abs());
        }
        if let Some(r) = &closed_res {
            worst_closed = worst_closed.max(r.abs());
        }
        let show = |r: &Option<Fraction>| {
            r.as_ref()
                .map_or(String::new(), |r| r.floor_decimal(digits))
        };
        writeln!(
            csv,
            "{n},{},{},{},{},{}",
            traj.q[n].floor_decimal(digits),
            traj.ex[n].floor_decimal(digits),
            show(&mean_res),
            show(&closed_res),
            limit_res.floor_decimal(digits)
        )
        .expect("writing to a string");
    }
    out.write("verify_identities.csv", &csv)?;

    let matches_ex1 = |c: &Rational| -> Result<Option<bool>, Failure> {
        if traj.depth() == 0 {
            return Ok(None);
        }
        Ok(Some(
            recursion::closed_form_ex(&traj.g[0], 0, &alpha, lambda, c)? == traj.ex[1],
        ))
    };
    let final_limit = recursion::limit_identity_residual(
        &traj.ex[traj.depth()],
        &traj.q[traj.depth()],
        &alpha,
        lambda,
    )?;
    out.write_json(
        "verify_identities.json",
        &json!({
            "d": a.d,
            "arrival": law.spec(),
            "depth": a.depth,
            "backend": cfg.backend.to_string(),
            "constant_printed_matches_ex1": matches_ex1(&c_printed)?,
            "constant_rederived_matches_ex1": matches_ex1(&c_star)?,
            "max_law_mean_residual": a.backend.exact.then(|| worst_mean.floor_decimal(digits)),
            "max_closed_form_residual": worst_closed.floor_decimal(digits),
            "final_limit_residual": final_limit.floor_decimal(digits),
        }),
    )?;
    println!(
        "final limit residual {:.3e}, max closed-form residual {:.3e}",
        final_limit.to_f64(),
        worst_closed.to_f64()
    );
    if a.backend.exact && !(worst_mean.is_zero() && worst_closed.is_zero()) {
        return Err(Failure::Other("exact identities do not hold".into()));
    }
    Ok(())
}

fn check_certificate(a: &CheckArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&a.certificate)
        .map_err(|e| Failure::Config(format!("{}: {e}", a.certificate.display())))?;
    let cert: BoundCertificate = serde_json::from_str(&text)
        .map_err(|e| Failure::Config(format!("{}: {e}", a.certificate.display())))?;
    if bounds::replay_certificate(&cert)? {
        println!("certificate holds");
        Ok(())
    } else {
        Err(Failure::Refused("certificate does not replay".into()))
    }
}

fn replay(a: &ReplayArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&a.manifest)
        .map_err(|e| Failure::Config(format!("{}: {e}", a.manifest.display())))?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| Failure::Config(format!("{}: {e}", a.manifest.display())))?;
    let out = a
        .out
        .out
        .to_str()
        .ok_or_else(|| Failure::Config("output path is not valid UTF-8".into()))?;
    let mut args = vec![manifest.tool.clone()];
    args.extend(manifest.args.iter().cloned());
    args.extend(["--out".to_string(), out.to_string()]);
    crate::run(args)
}
