//! Chain-parallel Monte Carlo. Chains are independent ChaCha streams and
//! are reduced in chain order, so results do not depend on the pool size.

use anomaly_core::family::FamilySpec;
use anomaly_core::lyapunov::{check_ladder, ChainResult, CoeffOrder, LyapEstimate, McParams, McPlan, SweepResult};
use anomaly_core::CoreError;
use rayon::prelude::*;

use crate::error::CliError;

pub fn mc_gamma_par(f: &FamilySpec, params: McParams) -> Result<LyapEstimate, CoreError> {
    let plan = McPlan::new(f, params)?;
    let res: Vec<ChainResult> = (0..params.chains).into_par_iter().map(|c| plan.run_chain(c)).collect();
    Ok(plan.finish(&res))
}

/// All (λ, chain) pairs go to the pool at once.
pub fn sweep_par(f: &FamilySpec, ladder: &[f64], base: McParams, order: CoeffOrder) -> Result<SweepResult, CoreError> {
    check_ladder(ladder)?;
    let plans = ladder
        .iter()
        .map(|&l| McPlan::new(f, McParams { lambda: l, ..base }))
        .collect::<Result<Vec<_>, _>>()?;
    let jobs: Vec<(usize, u32)> = (0..plans.len()).flat_map(|i| (0..base.chains).map(move |c| (i, c))).collect();
    let res: Vec<ChainResult> = jobs.par_iter().map(|&(i, c)| plans[i].run_chain(c)).collect();
    let est = plans
        .iter()
        .zip(res.chunks(base.chains as usize))
        .map(|(p, r)| p.finish(r))
        .collect();
    SweepResult::from_estimates(est, order)
}

/// Runs `op` on a pool of `threads` workers, or on the global pool.
pub fn with_threads<R: Send>(threads: Option<usize>, op: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    match threads {
        None => Ok(op()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(op))
            .map_err(|e| CliError::validation(format!("thread pool: {e}"))),
    }
}
