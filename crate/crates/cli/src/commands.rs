//! Argument definitions and the handler of each verb.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use pacing_core::dynamics::{
    adaptive_pacing, br_dynamics, trace_regret, AdaptiveConfig, BrConfig, BrInit, DynamicsTrace,
    Schedule,
};
use pacing_core::gen::{
    calibrate_budgets, compress_by_clustering, fixture, fixture_names, gen_3sat_revenue,
    gen_gadget, gen_stylized, parse_dimacs, random_3cnf, scale_instance, GadgetParams, GenConfig,
    InstanceKind, ScaleConfig, ScaledInstance,
};
use pacing_core::market::TieBreak;
use pacing_core::mip::{solve_instance, Objective, SolveStatus, SolverConfig};
use pacing_core::{objectives, verify_equilibrium, PacingInstance, Tolerance};
use serde::Serialize;
use serde_json::json;

use crate::exit::{CliError, CliResult, Exit};
use crate::gap::{run_gap_analysis, NamedInstance};
use crate::misreport::{run_misreport_study, MisreportConfig, MisreportGrid};
use crate::report::{ExperimentReport, Metadata, ReportBody};
use crate::scalability::{run_scalability, ScalabilityConfig};
use crate::store::{
    self, archive_instance, instance_hash, read_instance, read_json, read_outcome, with_pool,
    write_csv, write_json, write_text,
};
use crate::study::{run_empirical_match, run_warm_start, EmpiricalPlan, WarmStartPlan};

#[derive(Debug, Parser)]
#[command(
    name = "pacing",
    version,
    about = "Pacing equilibria in second-price auction markets"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write an instance file.
    #[command(subcommand)]
    Generate(Generate),
    /// Solve an instance with the MIP and write the result with its verdict.
    Solve(SolveArgs),
    /// Check an outcome against an instance; prints the verdict as JSON.
    Verify(VerifyArgs),
    /// Best-response dynamics, adaptive pacing and the studies built on them.
    #[command(subcommand)]
    Dynamics(Dynamics),
    /// Equilibrium gaps in revenue and welfare across objectives.
    Gap(GapArgs),
    /// Misreport incentive study.
    Misreport(MisreportArgs),
    /// Share of generated instances solved within the time limit.
    Scale(ScaleArgs),
    /// Render a report as a long-format CSV table.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Complete,
    Sampled,
    Correlated,
}

impl From<KindArg> for InstanceKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Complete => InstanceKind::Complete,
            KindArg::Sampled => InstanceKind::Sampled,
            KindArg::Correlated => InstanceKind::Correlated,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ObjectiveArg {
    Feasibility,
    RelaxedFeasibility,
    MaxRevenue,
    MinRevenue,
    MaxPacedWelfare,
    MinPacedWelfare,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Feasibility => Objective::Feasibility,
            ObjectiveArg::RelaxedFeasibility => Objective::RelaxedFeasibility,
            ObjectiveArg::MaxRevenue => Objective::MaxRevenue,
            ObjectiveArg::MinRevenue => Objective::MinRevenue,
            ObjectiveArg::MaxPacedWelfare => Objective::MaxPacedWelfare,
            ObjectiveArg::MinPacedWelfare => Objective::MinPacedWelfare,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Seconds per solve.
    #[arg(long, default_value_t = 300.0)]
    pub time_limit: f64,
    /// Stop each solve after this many branch-and-bound nodes.
    #[arg(long)]
    pub node_limit: Option<usize>,
}

impl SolverArgs {
    pub fn config(&self) -> CliResult<SolverConfig> {
        let cfg = SolverConfig {
            node_limit: self.node_limit,
            ..SolverConfig::default().with_time_limit(self.time_limit)
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Subcommand)]
pub enum Generate {
    /// Random complete, sampled or correlated instance.
    Stylized {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// Noise of the correlated family.
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// A hand-built instance with known equilibria.
    Fixture {
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(fixture_names()))]
        name: String,
        #[arg(long)]
        out: PathBuf,
        /// Also write the known equilibria, one file per equilibrium, as `<stem>.eq<k>.json`.
        #[arg(long)]
        equilibria: bool,
    },
    /// Two-bidder gadget with two asymmetric equilibria.
    Gadget {
        #[arg(long, default_value_t = 1.0)]
        k1: f64,
        #[arg(long, default_value_t = 0.125)]
        alpha: f64,
        #[arg(long, default_value_t = 0.125)]
        delta: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Revenue reduction from 3-SAT; prints the revenue threshold.
    Sat {
        /// DIMACS CNF input; a random formula is drawn when absent.
        #[arg(long)]
        dimacs: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        vars: usize,
        #[arg(long, default_value_t = 5)]
        clauses: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Replicate every good of an instance into many auctions.
    Scaled {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        factor: usize,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Merge goods by k-means, optionally calibrating budgets afterwards.
    Cluster {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Target share of budget-constrained bidders.
        #[arg(long)]
        calibrate: Option<f64>,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: PathBuf,
        /// Write the cluster of each original good here.
        #[arg(long)]
        assignment: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value = "feasibility")]
    pub objective: ObjectiveArg,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: PathBuf,
    /// Write wall time and search statistics here.
    #[arg(long)]
    pub timings: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Outcome file, or a report written by `solve`.
    #[arg(long)]
    pub outcome: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    pub eps_feas: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub eps_tie: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TieArg {
    High,
    Low,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScheduleArg {
    Simultaneous,
    Sequential,
}

#[derive(Debug, Subcommand)]
pub enum Dynamics {
    /// Rounds of exact best responses.
    Br {
        #[arg(long)]
        instance: PathBuf,
        /// Starting multipliers, comma separated; random when absent.
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        /// Seed of the random start.
        #[arg(long, default_value_t = 0)]
        init_seed: u64,
        #[arg(long, value_enum, default_value = "high")]
        tie_break: TieArg,
        #[arg(long, value_enum, default_value = "simultaneous")]
        schedule: ScheduleArg,
        #[arg(long, default_value_t = 100)]
        max_iters: usize,
        /// Auction tie-breaking seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON-lines trace.
        #[arg(long)]
        out: PathBuf,
        /// Regret of the final profile as CSV.
        #[arg(long)]
        regret: Option<PathBuf>,
    },
    /// Adaptive pacing over the auctions of a scaled instance.
    Adaptive {
        /// Scaled instance written by `generate scaled`.
        #[arg(long)]
        scaled: PathBuf,
        /// Starting multipliers, comma separated.
        #[arg(long, value_delimiter = ',', conflicts_with = "init")]
        alphas: Option<Vec<f64>>,
        /// Common starting multiplier.
        #[arg(long, default_value_t = 1.0)]
        init: f64,
        #[arg(long, default_value_t = 0.05)]
        alpha_min: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        regret: Option<PathBuf>,
    },
    /// Regret of adaptive pacing started from the MIP or from constants.
    WarmStart {
        #[command(flatten)]
        input: InstanceArgs,
        #[arg(long, default_value_t = 500)]
        factor: usize,
        #[arg(long, value_delimiter = ',', default_value = "0,0.1")]
        sigmas: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0.01,1,2")]
        steps: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0.05,0.1")]
        alpha_mins: Vec<f64>,
        /// Scaling seed of the first instance.
        #[arg(long, default_value_t = 0)]
        scale_seed: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Allocation of MIP-seeded adaptive pacing against the MIP fractions.
    Empirical {
        #[command(flatten)]
        input: InstanceArgs,
        #[arg(long, default_value_t = 50)]
        factor: usize,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0.05)]
        alpha_min: f64,
        #[arg(long, default_value_t = 1e-4)]
        step: f64,
        #[arg(long, default_value_t = 0)]
        scale_seed: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Instance files, or a generated set when none are given.
#[derive(Debug, Clone, Args)]
pub struct InstanceArgs {
    /// Instance files or directories of them.
    #[arg(long = "instance", num_args = 1..)]
    pub files: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "complete")]
    pub gen_kind: KindArg,
    /// Bidder counts of the generated set.
    #[arg(long, value_delimiter = ',', default_value = "4")]
    pub gen_n: Vec<usize>,
    #[arg(long, default_value_t = 6)]
    pub gen_m: usize,
    /// Instances per bidder count.
    #[arg(long, default_value_t = 10)]
    pub gen_count: usize,
    #[arg(long, default_value_t = 0.0)]
    pub gen_sigma: f64,
    /// Seed of the first generated instance; each further one adds one.
    #[arg(long, default_value_t = 0)]
    pub gen_seed: u64,
    /// Copy every instance to `<dir>/instances/<hash>.json`.
    #[arg(long)]
    pub archive: Option<PathBuf>,
}

impl InstanceArgs {
    fn seeds(&self) -> Vec<u64> {
        if self.files.is_empty() {
            (0..(self.gen_n.len() * self.gen_count) as u64)
                .map(|k| self.gen_seed + k)
                .collect()
        } else {
            vec![]
        }
    }

    pub fn load(&self) -> CliResult<Vec<NamedInstance>> {
        let mut out = Vec::new();
        if self.files.is_empty() {
            let mut seed = self.gen_seed;
            for &n in &self.gen_n {
                for _ in 0..self.gen_count {
                    let kind = InstanceKind::from(self.gen_kind);
                    let inst = gen_stylized(
                        &GenConfig::new(kind, n, self.gen_m, seed).with_sigma(self.gen_sigma),
                    )?;
                    out.push(NamedInstance {
                        id: format!("{}-{n}x{}-s{seed}", kind.name(), self.gen_m),
                        instance: inst,
                    });
                    seed += 1;
                }
            }
        } else {
            for path in expand(&self.files)? {
                out.push(NamedInstance {
                    id: path.display().to_string(),
                    instance: read_instance(&path)?,
                });
            }
        }
        if let Some(dir) = &self.archive {
            for it in &out {
                archive_instance(dir, &it.instance)?;
            }
        }
        Ok(out)
    }
}

/// Files as given; directories contribute their `*.json` files in name order.
fn expand(paths: &[PathBuf]) -> CliResult<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut inner: Vec<PathBuf> = std::fs::read_dir(p)?
                .map(|e| e.map(|e| e.path()))
                .collect::<Result<_, _>>()?;
            inner.retain(|f| f.extension().is_some_and(|e| e == "json"));
            inner.sort();
            out.extend(inner);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

#[derive(Debug, Args)]
pub struct GapArgs {
    #[command(flatten)]
    pub input: InstanceArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MisreportArgs {
    #[command(flatten)]
    pub input: InstanceArgs,
    /// Budget scalars in steps of 0.05 instead of 0.2.
    #[arg(long)]
    pub fine: bool,
    /// Index of the misreporting bidder.
    #[arg(long, default_value_t = 0)]
    pub focal: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScaleArgs {
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "complete,sampled,correlated"
    )]
    pub kinds: Vec<KindArg>,
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    pub ns: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "2,4,6")]
    pub ms: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    pub per_cell: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.1)]
    pub sigma: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Report JSON written by gap, misreport, scale or a dynamics study.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

fn instance_file(inst: &PacingInstance, out: &Path) -> CliResult<()> {
    write_text(out, &inst.to_json())
}

fn generate(cmd: Generate) -> CliResult<Exit> {
    match cmd {
        Generate::Stylized {
            kind,
            n,
            m,
            sigma,
            seed,
            out,
        } => {
            let inst = gen_stylized(&GenConfig::new(kind.into(), n, m, seed).with_sigma(sigma))?;
            instance_file(&inst, &out)?;
        }
        Generate::Fixture {
            name,
            out,
            equilibria,
        } => {
            let f = fixture(&name)
                .ok_or_else(|| CliError::parse(format!("unknown fixture `{name}`")))?;
            instance_file(&f.instance, &out)?;
            if equilibria {
                let stem = out.with_extension("");
                for (k, eq) in f.equilibria.iter().enumerate() {
                    write_text(
                        &PathBuf::from(format!("{}.eq{k}.json", stem.display())),
                        &eq.to_json(),
                    )?;
                }
            }
        }
        Generate::Gadget {
            k1,
            alpha,
            delta,
            out,
        } => {
            instance_file(&gen_gadget(&GadgetParams::new(k1, alpha, delta)?)?, &out)?;
        }
        Generate::Sat {
            dimacs,
            vars,
            clauses,
            seed,
            out,
        } => {
            let cnf = match dimacs {
                Some(path) => parse_dimacs(&std::fs::read_to_string(path)?)?,
                None => random_3cnf(vars, clauses, seed)?,
            };
            let red = gen_3sat_revenue(&cnf)?;
            instance_file(&red.instance, &out)?;
            println!(
                "{}",
                json!({ "threshold": red.threshold, "clauses": cnf.clauses })
            );
        }
        Generate::Scaled {
            instance,
            factor,
            sigma,
            seed,
            out,
        } => {
            let scaled = scale_instance(
                &read_instance(&instance)?,
                &ScaleConfig {
                    factor,
                    noise_sigma: sigma,
                    seed,
                },
            )?;
            write_json(&out, &scaled)?;
        }
        Generate::Cluster {
            instance,
            k,
            seed,
            calibrate,
            solver,
            out,
            assignment,
        } => {
            let c = compress_by_clustering(&read_instance(&instance)?, k, seed)?;
            let inst = match calibrate {
                Some(target) => calibrate_budgets(&c.instance, target, &solver.config()?)?.instance,
                None => c.instance,
            };
            instance_file(&inst, &out)?;
            if let Some(path) = assignment {
                write_json(&path, &c.assignment)?;
            }
        }
    }
    Ok(Exit::Ok)
}

#[derive(Serialize)]
struct SolveReport<'a> {
    instance_hash: String,
    objective: &'a str,
    status: SolveStatus,
    verified: bool,
    objective_value: Option<f64>,
    relaxed_slack: Option<f64>,
    values: Option<pacing_core::ObjectiveValues>,
    verdict: Option<pacing_core::market::Verdict>,
    outcome: Option<&'a pacing_core::PacingOutcome>,
    nodes: usize,
}

fn solve(args: SolveArgs) -> CliResult<Exit> {
    let inst = read_instance(&args.instance)?;
    let objective = Objective::from(args.objective);
    let res = solve_instance(&inst, objective, &args.solver.config()?)?;
    let tol = Tolerance::default();
    let verdict = res
        .outcome
        .as_ref()
        .map(|o| verify_equilibrium(&inst, o, &tol))
        .transpose()?;
    let values = res
        .outcome
        .as_ref()
        .map(|o| objectives(&inst, o))
        .transpose()?;
    let report = SolveReport {
        instance_hash: instance_hash(&inst),
        objective: objective.name(),
        status: res.status,
        verified: res.verified,
        objective_value: res.objective_value,
        relaxed_slack: res.relaxed_slack,
        values,
        verdict,
        outcome: res.outcome.as_ref(),
        nodes: res.stats.nodes,
    };
    write_json(&args.out, &report)?;
    if let Some(path) = args.timings {
        write_json(&path, &res.stats)?;
    }
    Ok(match res.status {
        SolveStatus::Timeout => Exit::Timeout,
        _ if res.verified => Exit::Ok,
        _ => Exit::VerifyFailed,
    })
}

fn verify(args: VerifyArgs) -> CliResult<Exit> {
    let inst = read_instance(&args.instance)?;
    let out = read_outcome(&args.outcome)?;
    let tol = Tolerance::new(args.eps_feas, args.eps_tie)?;
    let verdict = verify_equilibrium(&inst, &out, &tol)?;
    println!("{}", serde_json::to_string_pretty(&verdict)?);
    Ok(if verdict.is_accepted() {
        Exit::Ok
    } else {
        Exit::VerifyFailed
    })
}

fn write_trace(
    trace: &DynamicsTrace,
    out: &Path,
    regret: Option<PathBuf>,
    inst: &PacingInstance,
) -> CliResult<()> {
    write_text(out, &trace.to_json_lines())?;
    if let Some(path) = regret {
        write_text(
            &path,
            &trace_regret(inst, trace, &Tolerance::default())?.to_csv(),
        )?;
    }
    Ok(())
}

fn report(
    command: &str,
    seeds: Vec<u64>,
    config: impl Serialize,
    body: ReportBody,
    out: &Path,
) -> CliResult<Exit> {
    write_json(
        out,
        &ExperimentReport::new(Metadata::new(command, seeds, config), body),
    )?;
    Ok(Exit::Ok)
}

fn dynamics(cmd: Dynamics) -> CliResult<Exit> {
    match cmd {
        Dynamics::Br {
            instance,
            alphas,
            init_seed,
            tie_break,
            schedule,
            max_iters,
            seed,
            out,
            regret,
        } => {
            let inst = read_instance(&instance)?;
            let init = match alphas {
                Some(a) => BrInit::Given(a),
                None => BrInit::Random { seed: init_seed },
            };
            let cfg = BrConfig {
                tie_break: match tie_break {
                    TieArg::High => TieBreak::High,
                    TieArg::Low => TieBreak::Low,
                },
                schedule: match schedule {
                    ScheduleArg::Simultaneous => Schedule::Simultaneous,
                    ScheduleArg::Sequential => Schedule::Sequential,
                },
                max_iters,
                seed,
                ..BrConfig::new(init)
            };
            let trace = br_dynamics(&inst, &cfg)?;
            write_trace(&trace, &out, regret, &inst)?;
            eprintln!(
                "steps {} converged {} cycle {:?}",
                trace.summary.steps, trace.summary.converged, trace.summary.cycle
            );
            Ok(Exit::Ok)
        }
        Dynamics::Adaptive {
            scaled,
            alphas,
            init,
            alpha_min,
            step,
            seed,
            out,
            regret,
        } => {
            let scaled: ScaledInstance = read_json(&scaled)?;
            let init_alphas = alphas.unwrap_or_else(|| vec![init; scaled.instance.n()]);
            let trace = adaptive_pacing(
                &scaled,
                &AdaptiveConfig {
                    init_alphas,
                    alpha_min,
                    step,
                    seed,
                },
            )?;
            write_trace(&trace, &out, regret, &scaled.instance)?;
            Ok(Exit::Ok)
        }
        Dynamics::WarmStart {
            input,
            factor,
            sigmas,
            steps,
            alpha_mins,
            scale_seed,
            seed,
            solver,
            out,
        } => {
            let instances = input.load()?;
            let mut plan = WarmStartPlan::standard(factor, scale_seed);
            plan.sigmas = sigmas;
            plan.study.steps = steps;
            plan.study.alpha_mins = alpha_mins;
            plan.study.seed = seed;
            plan.study.solver = solver.config()?;
            let rep = with_pool(|| run_warm_start(&instances, &plan))??;
            report(
                "dynamics warm-start",
                input.seeds(),
                &plan,
                ReportBody::WarmStart(rep),
                &out,
            )
        }
        Dynamics::Empirical {
            input,
            factor,
            sigma,
            alpha_min,
            step,
            scale_seed,
            seed,
            solver,
            out,
        } => {
            let instances = input.load()?;
            let plan = EmpiricalPlan {
                factor,
                sigma,
                alpha_min,
                step,
                objective: Objective::Feasibility,
                solver: solver.config()?,
                scale_seed,
                seed,
            };
            let rep = with_pool(|| run_empirical_match(&instances, &plan))??;
            report(
                "dynamics empirical",
                input.seeds(),
                &plan,
                ReportBody::Empirical(rep),
                &out,
            )
        }
    }
}

fn gap(args: GapArgs) -> CliResult<Exit> {
    let instances = args.input.load()?;
    let solver = args.solver.config()?;
    let rep = with_pool(|| run_gap_analysis(&instances, &solver))??;
    report(
        "gap",
        args.input.seeds(),
        solver,
        ReportBody::Gap(rep),
        &args.out,
    )
}

fn misreport(args: MisreportArgs) -> CliResult<Exit> {
    let instances = args.input.load()?;
    let cfg = MisreportConfig {
        grid: if args.fine {
            MisreportGrid::fine()
        } else {
            MisreportGrid::standard()
        },
        focal: args.focal,
        solver: args.solver.config()?,
    };
    let rep = with_pool(|| run_misreport_study(&instances, &cfg))??;
    report(
        "misreport",
        args.input.seeds(),
        &cfg,
        ReportBody::Misreport(rep),
        &args.out,
    )
}

fn scale(args: ScaleArgs) -> CliResult<Exit> {
    let cfg = ScalabilityConfig {
        kinds: args.kinds.iter().map(|&k| k.into()).collect(),
        ns: args.ns,
        ms: args.ms,
        per_cell: args.per_cell,
        base_seed: args.seed,
        sigma: args.sigma,
        objectives: Objective::ALL.to_vec(),
        solver: args.solver.config()?,
    };
    let rep = with_pool(|| run_scalability(&cfg))??;
    let count = rep.detail.len() / cfg.objectives.len().max(1);
    let seeds = (0..count as u64).map(|k| cfg.base_seed + k).collect();
    report(
        "scale",
        seeds,
        &cfg,
        ReportBody::Scalability(rep),
        &args.out,
    )
}

fn render(args: ReportArgs) -> CliResult<Exit> {
    let rep: ExperimentReport = read_json(&args.input)?;
    write_csv(&args.out, &rep.long_rows())?;
    Ok(Exit::Ok)
}

pub fn execute(cli: Cli) -> CliResult<Exit> {
    store::worker_count()?;
    match cli.command {
        Command::Generate(g) => generate(g),
        Command::Solve(a) => solve(a),
        Command::Verify(a) => verify(a),
        Command::Dynamics(d) => dynamics(d),
        Command::Gap(a) => gap(a),
        Command::Misreport(a) => misreport(a),
        Command::Scale(a) => scale(a),
        Command::Report(a) => render(a),
    }
}
