//! Temporary tuning harness (removed before finishing).
#![allow(dead_code)]

use qaoa_lab::bench::{run_benchmark, BenchmarkConfig, OptimizerSpec};
use qaoa_lab::encoding::{IsingHamiltonian, PenaltyPolicy, ScalingPolicy};
use qaoa_lab::optimizers::{Budget, DeConfig, OptimizerConfig, SearchSpace};
use qaoa_lab::problems::{generate_uc_instance, Instance};
use qaoa_lab::simulator::{EvalMode, QaoaObjective};

fn single_qubit_objective() -> QaoaObjective {
    let ham = IsingHamiltonian {
        n: 1,
        h: vec![1.0],
        couplings: vec![],
        dropped_offset: 0.0,
    };
    QaoaObjective::new(&ham, 1, EvalMode::Exact).unwrap()
}

#[test]
#[ignore]
fn de_fs_single_qubit_precision() {
    let space = SearchSpace::qaoa(1);
    for seed in 0..6u64 {
        let de = OptimizerConfig::DifferentialEvolution(DeConfig::default());
        let mut obj = single_qubit_objective();
        let mut f = |x: &[f64]| obj.evaluate_flat(x);
        let run_de = de.run(&mut f, &space, &Budget::evals(1000), seed).unwrap();

        let fs = OptimizerConfig::default_for("fs").unwrap();
        let mut obj = single_qubit_objective();
        let mut f = |x: &[f64]| obj.evaluate_flat(x);
        let run_fs = fs.run(&mut f, &space, &Budget::evals(1000), seed).unwrap();
        println!(
            "seed {seed}: DE err {:.3e} ({} evals), FS err {:.3e} ({} evals)",
            run_de.best_value + 1.0,
            run_de.n_evals,
            run_fs.best_value + 1.0,
            run_fs.n_evals,
        );
    }
}

fn campaign(
    instance_seed: u64,
    n_units: usize,
    optimizers: Vec<OptimizerSpec>,
    restarts: usize,
) -> BenchmarkConfig {
    BenchmarkConfig {
        instance: Instance::Uc(generate_uc_instance(n_units, instance_seed).unwrap()),
        layers: 1,
        mode: EvalMode::Exact,
        penalty: PenaltyPolicy::Auto,
        scaling: ScalingPolicy::Auto,
        optimizers,
        restarts,
        master_seed: 2024,
    }
}

#[test]
#[ignore]
fn table_style_campaign_scan() {
    for instance_seed in 0..8u64 {
        let optimizers = vec![
            OptimizerSpec::new(
                OptimizerConfig::default_for("nm").unwrap(),
                Budget::iters(200),
            ),
            OptimizerSpec::new(
                OptimizerConfig::default_for("powell").unwrap(),
                Budget::iters(200),
            ),
            OptimizerSpec::new(
                OptimizerConfig::default_for("de").unwrap(),
                Budget::evals(2000),
            ),
            OptimizerSpec::new(
                OptimizerConfig::default_for("fs").unwrap(),
                Budget::evals(2000),
            ),
        ];
        let start = std::time::Instant::now();
        let table = run_benchmark(&campaign(instance_seed, 10, optimizers, 25)).unwrap();
        print!("seed {instance_seed} ({:?}): ", start.elapsed());
        for row in &table.aggregates {
            print!(
                "{}: {:.0}±{:.0} evals {:.3}±{:.3} | ",
                row.optimizer,
                row.evals_mean,
                row.evals_std,
                row.norm_cost_mean.unwrap(),
                row.norm_cost_std.unwrap()
            );
        }
        println!();
    }
}

#[test]
#[ignore]
fn separation_campaign_scan() {
    for instance_seed in 0..8u64 {
        let locals = ["nm", "powell", "spsa", "umda"];
        let globals = ["de", "bh", "da", "fs"];
        let mut optimizers = Vec::new();
        for id in locals {
            optimizers.push(OptimizerSpec::new(
                OptimizerConfig::default_for(id).unwrap(),
                Budget::evals_and_iters(5000, 200),
            ));
        }
        for id in globals {
            optimizers.push(OptimizerSpec::new(
                OptimizerConfig::default_for(id).unwrap(),
                Budget::evals(2000),
            ));
        }
        let start = std::time::Instant::now();
        let table = run_benchmark(&campaign(instance_seed, 4, optimizers, 25)).unwrap();
        let mut local_norms: Vec<f64> = table
            .runs
            .iter()
            .filter(|r| locals.contains(&r.optimizer.as_str()))
            .map(|r| r.normalized_cost.unwrap())
            .collect();
        local_norms.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = local_norms[local_norms.len() / 2];
        print!(
            "seed {instance_seed} ({:?}): local median {median:.3} | worst global: ",
            start.elapsed()
        );
        for id in globals {
            let worst = table
                .runs
                .iter()
                .filter(|r| r.optimizer == id)
                .map(|r| r.normalized_cost.unwrap())
                .fold(f64::INFINITY, f64::min);
            print!("{id} {worst:.3} ");
        }
        println!();
    }
}
