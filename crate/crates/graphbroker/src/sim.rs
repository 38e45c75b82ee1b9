//! Discrete-event Monte Carlo execution of build plans.
//!
//! A trial owns its network, RNG stream, and clock. Rounds run in order;
//! within a round the fragments broker concurrently in simulated time (the
//! round's brokering span is the maximum over its fragments), then one
//! transfer layer maps every completed fragment onto the clients. Trials
//! are deterministic given (base seed, trial index) and embarrassingly
//! parallel: with the `parallel` feature [`run_monte_carlo`] fans trials
//! out over rayon, and [`run_monte_carlo_serial`] always provides the
//! single-threaded path.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::events::{Event, EventKind, EventLog};
use crate::graph::{AdornedGraph, GraphError};
use crate::plan::{plan_growth, Blueprint, BuildPlan};
use crate::protocol::{Network, ProtocolError, TransferFlavor};
use crate::rng::{trial_seed, SimRng};
use crate::timing::{ParallelMode, StrategyChoice, TimingProfile};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("at least one trial is required")]
    NoTrials,
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub mode: ParallelMode,
    pub flavor: TransferFlavor,
    pub retry_cap: Option<u64>,
    /// Record client-group snapshots after every protocol operation.
    pub track_snapshots: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            mode: ParallelMode::Exact,
            flavor: TransferFlavor::Optimized,
            retry_cap: None,
            track_snapshots: false,
        }
    }
}

/// Per-blueprint statistics of one trial.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FragmentStats {
    pub blueprint: Blueprint,
    pub attempts: u64,
    pub elapsed_ns: f64,
}

/// Aggregate statistics of one trial.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunStats {
    pub total_time_ns: f64,
    pub attempts_total: u64,
    pub failures_total: u64,
    pub per_fragment: Vec<FragmentStats>,
    /// Star builds: lock-step stage-1 rounds per outer iteration.
    pub star_stage1_rounds: Vec<u64>,
    pub verified: bool,
}

pub struct TrialResult {
    pub stats: RunStats,
    pub log: EventLog,
    pub network: Network,
}

/// Execute one seeded trial of a plan.
pub fn run_trial(
    plan: &BuildPlan,
    profile: &TimingProfile,
    seed: u64,
    opts: &SimOptions,
) -> Result<TrialResult, SimError> {
    let mut network = Network::new(plan.n)?;
    if opts.track_snapshots {
        network.enable_snapshot_tracking();
    }
    let mut rng = SimRng::new(seed);
    let mut log = EventLog::default();
    let mut clock = 0.0f64;
    let mut attempts_total = 0u64;
    let mut failures_total = 0u64;
    let mut per_fragment = Vec::with_capacity(plan.num_blueprints());
    let mut star_stage1_rounds = Vec::new();

    for round in &plan.rounds {
        let round_start = clock;
        let mut round_events: Vec<Event> = Vec::new();
        let mut built = Vec::with_capacity(round.len());
        let mut brokering_span = 0.0f64;
        for bp in round {
            let outcome = match *bp {
                Blueprint::Edge { a, b } => {
                    network.build_bell(a, b, profile, &mut rng, opts.retry_cap)?
                }
                Blueprint::Star4 { center, leaves } => network.build_star4(
                    center,
                    leaves,
                    profile,
                    &mut rng,
                    opts.mode,
                    opts.retry_cap,
                )?,
            };
            attempts_total += outcome.attempts;
            failures_total += outcome.failures;
            star_stage1_rounds.extend_from_slice(&outcome.stage1_rounds);
            brokering_span = brokering_span.max(outcome.elapsed_ns);
            round_events.extend(outcome.events.iter().cloned().map(|mut e| {
                e.t_ns += round_start;
                e
            }));
            per_fragment.push(FragmentStats {
                blueprint: bp.clone(),
                attempts: outcome.attempts,
                elapsed_ns: outcome.elapsed_ns,
            });
            built.push((bp.clone(), outcome.fragment));
        }
        round_events.sort_by(|a, b| a.t_ns.total_cmp(&b.t_ns));
        log.extend(round_events);

        // One parallel transfer layer for the whole round.
        let transfer_done = round_start + brokering_span + profile.transfer_cost();
        for (bp, fragment_id) in built {
            network.transfer(fragment_id, opts.flavor, profile, &mut rng)?;
            log.push(Event::new(
                transfer_done,
                EventKind::TransferDone,
                bp.nodes(),
                Some(fragment_id),
            ));
        }
        clock = transfer_done;
    }

    let target = AdornedGraph::from_edges(plan.n, &plan.target_edges)?;
    let verified = network.verify_clients(&target);
    debug_assert!(log.timestamps_nondecreasing());
    Ok(TrialResult {
        stats: RunStats {
            total_time_ns: clock,
            attempts_total,
            failures_total,
            per_fragment,
            star_stage1_rounds,
            verified,
        },
        log,
        network,
    })
}

/// Mean / spread summary of a sampled quantity.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub stddev: f64,
    pub stderr: f64,
    pub min: f64,
    pub max: f64,
}

impl Aggregate {
    fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = if samples.len() > 1 {
            samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let stddev = var.sqrt();
        Self {
            mean,
            stddev,
            stderr: stddev / n.sqrt(),
            min: samples.iter().copied().fold(f64::INFINITY, f64::min),
            max: samples.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub trials: u64,
    pub time_ns: Aggregate,
    pub attempts: Aggregate,
    pub verified_fraction: f64,
}

fn summarize(stats: &[RunStats]) -> McSummary {
    let times: Vec<f64> = stats.iter().map(|s| s.total_time_ns).collect();
    let attempts: Vec<f64> = stats.iter().map(|s| s.attempts_total as f64).collect();
    let verified = stats.iter().filter(|s| s.verified).count() as f64;
    McSummary {
        trials: stats.len() as u64,
        time_ns: Aggregate::from_samples(&times),
        attempts: Aggregate::from_samples(&attempts),
        verified_fraction: verified / stats.len() as f64,
    }
}

/// Run `trials` independent seeded trials and aggregate the statistics.
///
/// Trial `i` uses the stream derived from (base_seed, i), so results do not
/// depend on the worker count or the `parallel` feature.
pub fn run_monte_carlo(
    plan: &BuildPlan,
    profile: &TimingProfile,
    trials: u64,
    base_seed: u64,
    opts: &SimOptions,
) -> Result<McSummary, SimError> {
    if trials == 0 {
        return Err(SimError::NoTrials);
    }
    #[cfg(feature = "parallel")]
    {
        let stats = (0..trials)
            .into_par_iter()
            .map(|i| run_trial(plan, profile, trial_seed(base_seed, i), opts).map(|t| t.stats))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(summarize(&stats))
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_monte_carlo_serial(plan, profile, trials, base_seed, opts)
    }
}

/// Single-threaded [`run_monte_carlo`]; same trial streams, same results.
pub fn run_monte_carlo_serial(
    plan: &BuildPlan,
    profile: &TimingProfile,
    trials: u64,
    base_seed: u64,
    opts: &SimOptions,
) -> Result<McSummary, SimError> {
    if trials == 0 {
        return Err(SimError::NoTrials);
    }
    let mut stats = Vec::with_capacity(trials as usize);
    for i in 0..trials {
        stats.push(run_trial(plan, profile, trial_seed(base_seed, i), opts)?.stats);
    }
    Ok(summarize(&stats))
}

/// Closed-form time prediction for an arbitrary plan, in the same
/// approximation as the 3-node formulas: geometric 1/p expected attempts
/// per link, parallel pair builds costed at 1/p rounds.
pub fn predicted_plan_time(plan: &BuildPlan, profile: &TimingProfile) -> f64 {
    let p = profile.p;
    plan.rounds
        .iter()
        .map(|round| {
            let brokering = round
                .iter()
                .map(|bp| match bp {
                    Blueprint::Edge { .. } => profile.attempt_cost() / p,
                    Blueprint::Star4 { .. } => {
                        (profile.attempt_cost() / p + profile.tau_o) / p
                    }
                })
                .fold(0.0f64, f64::max);
            brokering + profile.transfer_cost()
        })
        .sum()
}

/// One strategy's plan, closed-form prediction, and Monte Carlo summary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StrategyRun {
    pub strategy: StrategyChoice,
    pub plan: BuildPlan,
    pub predicted_ns: f64,
    pub summary: McSummary,
}

/// Side-by-side comparison of both strategies on one target.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StrategyComparison {
    pub sequential: StrategyRun,
    pub star: StrategyRun,
    /// True when the two plans coincide (no degree-3 vertex to exploit).
    pub plans_identical: bool,
    /// Strategy with the smaller Monte Carlo mean time (ties to star).
    pub chosen_mc: StrategyChoice,
    /// Strategy with the smaller closed-form prediction (ties to star).
    pub chosen_formula: StrategyChoice,
}

/// Plan and run both strategies on the target and compare them.
pub fn compare_strategies(
    target: &AdornedGraph,
    profile: &TimingProfile,
    trials: u64,
    base_seed: u64,
    opts: &SimOptions,
) -> Result<StrategyComparison, SimError> {
    let mut runs = Vec::with_capacity(2);
    for strategy in [
        StrategyChoice::SequentialBipartite,
        StrategyChoice::MultipartiteStar,
    ] {
        let plan = plan_growth(target, strategy);
        let predicted_ns = predicted_plan_time(&plan, profile);
        let summary = run_monte_carlo(&plan, profile, trials, base_seed, opts)?;
        runs.push(StrategyRun {
            strategy,
            plan,
            predicted_ns,
            summary,
        });
    }
    let star = runs.pop().expect("two runs");
    let sequential = runs.pop().expect("two runs");
    let plans_identical = sequential.plan == star.plan;
    let chosen_mc = if star.summary.time_ns.mean <= sequential.summary.time_ns.mean {
        StrategyChoice::MultipartiteStar
    } else {
        StrategyChoice::SequentialBipartite
    };
    let chosen_formula = if star.predicted_ns <= sequential.predicted_ns {
        StrategyChoice::MultipartiteStar
    } else {
        StrategyChoice::SequentialBipartite
    };
    Ok(StrategyComparison {
        sequential,
        star,
        plans_identical,
        chosen_mc,
        chosen_formula,
    })
}
