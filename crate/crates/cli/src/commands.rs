use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qkp_tn::anneal::{build_schedule, classical_sa, default_epsilon, dense_hamiltonian, evolve, SaParams, Schedule};
use qkp_tn::automata::annealing_mpo;
use qkp_tn::dmrg::{dmrg_ground, gap_scan, DmrgParams, GapScanResult, WPolicy};
use qkp_tn::encoding::{
    decode_spins, qkp_to_qubo, qubits_to_spins, qubo_to_ising, IsingModel, QkpInstance, SpinConvention,
};
use qkp_tn::mps::mpo_to_dense;
use qkp_tn::solvers::{brute_force, compare, dp_solve, gen_instance, instance_id, SolveReport};
use qkp_tn::C64;

use crate::output::{sha256_hex, Run};
use crate::readout::dominant_basis_state;
use crate::{
    Cli, Command, CompareArgs, DmrgArgs, EvolveArgs, GapScanArgs, GenArgs, InstanceArgs, Method, MpoValidateArgs,
    ScheduleArgs, SolveArgs,
};

/// A computed result failed its numerical check; exit code 2.
#[derive(Debug)]
pub struct ValidationFailure(pub String);

impl fmt::Display for ValidationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "numerical validation failed: {}", self.0)
    }
}

impl std::error::Error for ValidationFailure {}

/// Largest MPO/dense deviation `mpo-validate` accepts.
pub const MPO_TOLERANCE: f64 = 1e-11;

/// Allowed gap between the reported DMRG energy and the QUBO cost of the
/// decoded bits.
pub const ENERGY_TOLERANCE: f64 = 1e-6;

pub fn run(cli: &Cli, argv: &[String]) -> Result<()> {
    match &cli.command {
        Command::Gen(a) => gen(cli, argv, a),
        Command::Solve(a) => solve(cli, argv, a),
        Command::GapScan(a) => scan(cli, argv, a),
        Command::Schedule(a) => schedule(cli, argv, a),
        Command::Evolve(a) => run_evolve(cli, argv, a),
        Command::MpoValidate(a) => mpo_validate(cli, argv, a),
        Command::Compare(a) => run_compare(cli, argv, a),
    }
}

fn read_input(path: &Path, inputs: &mut Vec<(String, String)>) -> Result<String> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    inputs.push((path.display().to_string(), sha256_hex(text.as_bytes())));
    Ok(text)
}

fn start(cli: &Cli, argv: &[String], inputs: Vec<(String, String)>) -> Result<Run> {
    Run::new(cli.seed, argv, serde_json::to_value(cli)?, inputs, &cli.out)
}

fn load_instance(args: &InstanceArgs, seed: u64, inputs: &mut Vec<(String, String)>) -> Result<QkpInstance> {
    match &args.instance {
        Some(path) => {
            let text = read_input(path, inputs)?;
            QkpInstance::from_json(&text).with_context(|| format!("parsing instance {}", path.display()))
        }
        None => {
            let n = args.n.context("either --instance or --n is required")?;
            Ok(gen_instance(
                n,
                args.capacity,
                args.value_max,
                args.weight_max,
                args.pair_density,
                seed,
            )?)
        }
    }
}

fn dmrg_params(a: &DmrgArgs, seed: u64) -> DmrgParams {
    DmrgParams {
        chi_max: a.chi,
        max_sweeps: a.sweeps,
        seed,
        ..Default::default()
    }
}

fn gen(cli: &Cli, argv: &[String], a: &GenArgs) -> Result<()> {
    let inst = gen_instance(a.n, a.capacity, a.value_max, a.weight_max, a.pair_density, cli.seed)?;
    let mut run = start(cli, argv, vec![])?;
    let path = run.json("instance.json", &inst.to_json())?;
    run.finish("instance")?;
    println!("instance {} (n={}, capacity {}) -> {}", instance_id(&inst), inst.n, inst.capacity, path.display());
    Ok(())
}

fn solve(cli: &Cli, argv: &[String], a: &SolveArgs) -> Result<()> {
    let mut inputs = vec![];
    let inst = load_instance(&a.instance, cli.seed, &mut inputs)?;
    let lambda = a.encoding.lambda;
    let conv: SpinConvention = a.encoding.convention.into();
    let t = Instant::now();
    let report = match a.method {
        Method::Bf => brute_force(&inst)?,
        Method::Dp => dp_solve(&inst)?,
        Method::Sa => {
            let qubo = qkp_to_qubo(&inst, lambda)?;
            let params = SaParams {
                reads: a.reads,
                sweeps: a.sa_sweeps,
                seed: cli.seed,
                ..Default::default()
            };
            let best = classical_sa(&qubo, &params)?;
            let mut r = SolveReport::new("sa", &inst, best.bits, t.elapsed().as_secs_f64())?;
            r.energy = Some(best.energy);
            r.offset = Some(qubo.offset);
            r.lambda = Some(lambda);
            r
        }
        Method::Dmrg => {
            let qubo = qkp_to_qubo(&inst, lambda)?;
            let ising = qubo_to_ising(&qubo, conv);
            let mpo = annealing_mpo(&ising, 1.0)?;
            let ground = dmrg_ground(&mpo, &dmrg_params(&a.dmrg, cli.seed), None)?;
            if !ground.converged {
                eprintln!("warning: DMRG stopped after {} sweeps without converging", ground.sweeps_used);
            }
            let qubits = dominant_basis_state(&ground.state)?;
            let bits = decode_spins(&qubits_to_spins(&qubits), conv);
            let energy = ising.basis_energy(&qubits);
            let cost = qubo.energy(&bits);
            if (energy - cost).abs() > ENERGY_TOLERANCE {
                return Err(ValidationFailure(format!(
                    "Ising energy {energy} of the readout differs from its QUBO cost {cost}"
                ))
                .into());
            }
            let mut r = SolveReport::new("dmrg", &inst, bits, t.elapsed().as_secs_f64())?;
            r.energy = Some(energy);
            r.offset = Some(ising.offset);
            r.lambda = Some(lambda);
            r.convention = Some(conv);
            r
        }
    };
    let mut run = start(cli, argv, inputs)?;
    let stem = format!("report-{}", report.solver);
    let path = run.json(&format!("{stem}.json"), &report.to_json())?;
    run.finish(&stem)?;
    let energy = report.energy.map_or(String::new(), |e| format!(", energy {e}"));
    println!(
        "{}: value {}, weight {}/{}, feasible {}{energy} -> {}",
        report.solver,
        report.value,
        report.weight,
        inst.capacity,
        report.feasible,
        path.display()
    );
    Ok(())
}

fn encoded(inst: &QkpInstance, a: &crate::EncodingArgs) -> Result<IsingModel> {
    Ok(qubo_to_ising(&qkp_to_qubo(inst, a.lambda)?, a.convention.into()))
}

fn scan(cli: &Cli, argv: &[String], a: &GapScanArgs) -> Result<()> {
    let mut inputs = vec![];
    let inst = load_instance(&a.instance, cli.seed, &mut inputs)?;
    let ising = encoded(&inst, &a.encoding)?;
    let policy = a.w.map_or(WPolicy::Auto, WPolicy::Fixed);
    let result = gap_scan(&ising, a.steps, &dmrg_params(&a.dmrg, cli.seed), policy)?;
    if !result.clamped.is_empty() {
        eprintln!("warning: {} negative gaps clamped to 0", result.clamped.len());
    }
    let mut run = start(cli, argv, inputs)?;
    let path = run.commented("gaps.csv", &result.to_csv())?;
    run.finish("gaps")?;
    println!("g_min {} at s = {} -> {}", result.g_min, result.argmin_s, path.display());
    Ok(())
}

fn schedule(cli: &Cli, argv: &[String], a: &ScheduleArgs) -> Result<()> {
    let mut inputs = vec![];
    let text = read_input(&a.gaps, &mut inputs)?;
    let gaps = GapScanResult::from_csv(&text).with_context(|| format!("parsing {}", a.gaps.display()))?;
    let epsilon = a.epsilon.unwrap_or_else(|| default_epsilon(&gaps));
    let sched = build_schedule(&gaps, epsilon, a.degree)?;
    if sched.eval(0.0) != 0.0 || sched.eval(1.0) != 1.0 || !sched.is_monotone() {
        return Err(ValidationFailure("schedule is not a monotone map from 0 to 1".into()).into());
    }
    let mut run = start(cli, argv, inputs)?;
    let path = run.json("schedule.json", &sched.to_json())?;
    run.finish("schedule")?;
    println!("schedule (epsilon {epsilon}, degree {}) -> {}", a.degree, path.display());
    Ok(())
}

fn run_evolve(cli: &Cli, argv: &[String], a: &EvolveArgs) -> Result<()> {
    let mut inputs = vec![];
    let inst = load_instance(&a.instance, cli.seed, &mut inputs)?;
    let ising = encoded(&inst, &a.encoding)?;
    let sched = match &a.schedule {
        Some(path) => {
            let text = read_input(path, &mut inputs)?;
            Schedule::from_json(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => Schedule::linear(),
    };
    let trace = evolve(&ising, &sched, a.time, a.steps)?;
    let drift = (trace.final_state.norm() - 1.0).abs();
    if drift > 1e-8 {
        return Err(ValidationFailure(format!("state norm drifted by {drift:e}")).into());
    }
    let mut run = start(cli, argv, inputs)?;
    let path = run.commented("trace.csv", &trace.to_csv())?;
    run.finish("trace")?;
    println!("final ground-state overlap {} at T = {} -> {}", trace.final_overlap(), a.time, path.display());
    Ok(())
}

fn mpo_validate(cli: &Cli, argv: &[String], a: &MpoValidateArgs) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let mut lines = String::from("n,max_deviation,bond_dims_ok\n");
    let mut worst: f64 = 0.0;
    let mut dims_ok = true;
    for n in 1..=a.n_max {
        let mut dev: f64 = 0.0;
        let mut ok = true;
        for _ in 0..a.draws {
            let h = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut j = BTreeMap::new();
            for p in 0..n {
                for q in p + 1..n {
                    j.insert((p, q), rng.random_range(-1.0..1.0));
                }
            }
            let ising = IsingModel::new(h, j, 0.0)?;
            for s in [0.0, 0.3, 0.7, 1.0] {
                let mpo = annealing_mpo(&ising, s)?;
                let d = mpo_to_dense(&mpo)?;
                let oracle = dense_hamiltonian(&ising, s)?;
                for (x, y) in d.iter().zip(oracle.iter()) {
                    dev = dev.max((x - C64::new(*y, 0.0)).norm());
                }
                let dims = mpo.left_bond_dims();
                ok &= dims[0] == 1 && (2..=n).all(|k| dims[k - 1] == (k + 2).min(n - k + 3));
            }
        }
        lines.push_str(&format!("{n},{dev:.3e},{ok}\n"));
        worst = worst.max(dev);
        dims_ok &= ok;
    }
    let mut run = start(cli, argv, vec![])?;
    let path = run.commented("mpo-validate.csv", &lines)?;
    run.finish("mpo-validate")?;
    println!(
        "max deviation {worst:.3e} over N=1..{}, {} draws, s in {{0, 0.3, 0.7, 1}}; bond dims ok: {dims_ok} -> {}",
        a.n_max,
        a.draws,
        path.display()
    );
    if worst > MPO_TOLERANCE || !dims_ok {
        return Err(ValidationFailure(format!("max deviation {worst:e} (tolerance {MPO_TOLERANCE:e}), bond dims ok: {dims_ok}")).into());
    }
    Ok(())
}

fn read_report(path: &Path, inputs: &mut Vec<(String, String)>) -> Result<SolveReport> {
    let text = read_input(path, inputs)?;
    SolveReport::from_json(&text).with_context(|| format!("parsing report {}", path.display()))
}

fn run_compare(cli: &Cli, argv: &[String], a: &CompareArgs) -> Result<()> {
    let mut inputs = vec![];
    let reports = a
        .reports
        .iter()
        .map(|p| read_report(p, &mut inputs))
        .collect::<Result<Vec<_>>>()?;
    let reference = a.reference.as_deref().map(|p| read_report(p, &mut inputs)).transpose()?;
    let table = compare(&reports, reference.as_ref())?;
    let mut run = start(cli, argv, inputs)?;
    run.commented("comparison.txt", &table.to_text())?;
    run.commented("comparison.csv", &table.to_csv())?;
    run.finish("comparison")?;
    print!("{}", table.to_text());
    Ok(())
}
