use std::fmt::Write;

use serde::Serialize;

use crate::ledger::Difficulty;

use super::scenario::Topology;
use super::sim::Simulation;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostConfig {
    pub block_counts: Vec<usize>,
    pub difficulty: Difficulty,
    pub nodes: usize,
    pub seeds: Vec<u64>,
}

/// One issuer forging `blocks` single-transaction blocks, then one
/// resolution round across a full mesh.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CostRun {
    pub seed: u64,
    pub blocks: usize,
    pub chain_length: usize,
    pub mining_attempts: u64,
    /// Validation hashes of each non-issuer during the round.
    pub validation_hashes: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostSummary {
    pub blocks: usize,
    pub mean_mining_attempts: f64,
    pub mean_attempts_per_block: f64,
    /// Expected network-wide work if every node raced for every block.
    pub race_baseline_attempts: f64,
    pub min_validation_hashes: u64,
    pub max_validation_hashes: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of `y` on `x`.
pub fn fit_line(points: &[(f64, f64)]) -> LinearFit {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    LinearFit { slope, intercept: mean_y - slope * mean_x, r_squared }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostTable {
    pub difficulty: u8,
    pub nodes: usize,
    pub runs: Vec<CostRun>,
    pub summary: Vec<CostSummary>,
    pub fit: LinearFit,
}

impl CostTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("seed,blocks,chain_length,mining_attempts,validation_hashes_per_non_issuer\n");
        for run in &self.runs {
            let per_node = run.validation_hashes.iter().map(u64::to_string).collect::<Vec<_>>().join(";");
            writeln!(out, "{},{},{},{},{}", run.seed, run.blocks, run.chain_length, run.mining_attempts, per_node)
                .expect("write to String");
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from(
            "blocks,mean_mining_attempts,mean_attempts_per_block,race_baseline_attempts,min_validation_hashes,max_validation_hashes\n",
        );
        for s in &self.summary {
            writeln!(
                out,
                "{},{:.3},{:.3},{:.1},{},{}",
                s.blocks,
                s.mean_mining_attempts,
                s.mean_attempts_per_block,
                s.race_baseline_attempts,
                s.min_validation_hashes,
                s.max_validation_hashes
            )
            .expect("write to String");
        }
        out
    }
}

pub fn cost_run(seed: u64, blocks: usize, difficulty: Difficulty, nodes: usize) -> CostRun {
    let mut sim = Simulation::new(nodes, &Topology::FullMesh, difficulty, seed).expect("nodes > 0");
    for _ in 0..blocks {
        sim.submit_tx(0, None, "allow").expect("generated transaction is valid");
        sim.forge(0).expect("pool holds one transaction");
    }
    sim.resolve_round();
    CostRun {
        seed,
        blocks,
        chain_length: sim.node(0).chain.len(),
        mining_attempts: sim.node(0).mining_attempts,
        validation_hashes: sim.nodes()[1..].iter().map(|n| n.validation.total()).collect(),
    }
}

fn summarize(config: &CostConfig, runs: Vec<CostRun>) -> CostTable {
    let expected = config.difficulty.expected_attempts();
    let summary: Vec<CostSummary> = config
        .block_counts
        .iter()
        .map(|&blocks| {
            let group: Vec<&CostRun> = runs.iter().filter(|r| r.blocks == blocks).collect();
            let mean = group.iter().map(|r| r.mining_attempts as f64).sum::<f64>() / group.len().max(1) as f64;
            let validation = group.iter().flat_map(|r| r.validation_hashes.iter().copied());
            CostSummary {
                blocks,
                mean_mining_attempts: mean,
                mean_attempts_per_block: if blocks == 0 { 0.0 } else { mean / blocks as f64 },
                race_baseline_attempts: config.nodes as f64 * blocks as f64 * expected,
                min_validation_hashes: validation.clone().min().unwrap_or(0),
                max_validation_hashes: validation.max().unwrap_or(0),
            }
        })
        .collect();
    let points: Vec<(f64, f64)> =
        summary.iter().map(|s| (s.blocks as f64, s.mean_mining_attempts)).collect();
    CostTable {
        difficulty: config.difficulty.leading_zero_hex_digits(),
        nodes: config.nodes,
        fit: fit_line(&points),
        runs,
        summary,
    }
}

fn grid(config: &CostConfig) -> Vec<(u64, usize)> {
    config
        .seeds
        .iter()
        .flat_map(|&s| config.block_counts.iter().map(move |&b| (s, b)))
        .collect()
}

pub fn measure_linear_cost_sequential(config: &CostConfig) -> CostTable {
    let runs = grid(config)
        .into_iter()
        .map(|(seed, blocks)| cost_run(seed, blocks, config.difficulty, config.nodes))
        .collect();
    summarize(config, runs)
}

#[cfg(feature = "parallel")]
pub fn measure_linear_cost_parallel(config: &CostConfig) -> CostTable {
    use rayon::prelude::*;

    let runs = grid(config)
        .into_par_iter()
        .map(|(seed, blocks)| cost_run(seed, blocks, config.difficulty, config.nodes))
        .collect();
    summarize(config, runs)
}

/// Sweeps block counts and seeds, recording issuer mining work and
/// per-node validation work.
pub fn measure_linear_cost(config: &CostConfig) -> CostTable {
    #[cfg(feature = "parallel")]
    {
        measure_linear_cost_parallel(config)
    }
    #[cfg(not(feature = "parallel"))]
    {
        measure_linear_cost_sequential(config)
    }
}
