//! Runs protocol blocks on a worker pool and merges them in block order.

use rayon::prelude::*;

use photonkd_core::protocol::{ProtocolOutcome, Simulator};

/// Output is identical for every `workers ≥ 1`.
pub fn run(sim: &Simulator, workers: usize) -> anyhow::Result<ProtocolOutcome> {
    let blocks = sim.block_count();
    if workers <= 1 {
        return Ok(sim.run());
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    let parts: Vec<_> = pool.install(|| (0..blocks).into_par_iter().map(|b| sim.run_block(b)).collect());
    Ok(sim.finish(parts.into_iter().flatten().collect()))
}
