//! The four experiments, each producing flat records plus any violated
//! numerical invariants.

use std::sync::Arc;

use qlink_core::channel::{pm_rate, FiniteMemoryChannel, MultiUseFamily};
use qlink_core::code::{
    build_decoder, build_quantum_code, distinguishability_residual, greedy_classical_code, verify_classical,
    verify_quantum,
};
use qlink_core::link::{LinkModel, LinkSimulator, Schedule};
use qlink_core::mixing::{decay_ratio, ground_state, iterate_convergence, receiver_map, to_spectrum, Superoperator};
use qlink_core::protocol::{
    parity_probabilities, project_parity, recover_yes, resource_accounting, run_on, sample_parity, standard_panel,
    verify_no_branch, Parity, RateMode,
};
use qlink_core::tensor::{max_abs, random_density, random_state, seeded_rng, HilbertFactorization};
use qlink_core::{CVector, DensityOperator, StateVector};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::CliError;
use crate::records::{Record, RecordBuilder};

/// Distances below this are at the floating-point floor.
pub const DISTANCE_FLOOR: f64 = 1e-10;

/// Bob couplings after which the mediator's distance to ground is reported.
pub const GROUND_PROBE_STEPS: usize = 20;

#[derive(Debug, Default)]
pub struct Outcome {
    pub records: Vec<Record>,
    pub violations: Vec<String>,
}

pub fn run_experiment(cfg: &ExperimentConfig, workers: usize) -> Result<Outcome, CliError> {
    match cfg.experiment.expect("resolved config") {
        ExperimentKind::CodeBuild => code_build(cfg),
        ExperimentKind::Protocol => {
            let model = cfg.model(None, None)?;
            let schedule = cfg.schedule(None)?;
            let mut b = echo(cfg);
            let mut violations = Vec::new();
            protocol_metrics(&model, &schedule, cfg, &mut b, &mut violations)?;
            Ok(Outcome { records: vec![b.finish()], violations })
        }
        ExperimentKind::Mixing => mixing(cfg),
        ExperimentKind::Sweep => crate::sweep::sweep(cfg, workers),
    }
}

pub(crate) fn echo(cfg: &ExperimentConfig) -> RecordBuilder {
    let mut b = RecordBuilder::default();
    b.put("experiment", cfg.experiment.map_or("", |k| k.name())).put("seed", cfg.seed).put("config_hash", cfg.hash());
    b
}

pub(crate) fn echo_link(b: &mut RecordBuilder, model: &LinkModel) {
    b.put("link.chains", model.chains()).put("link.sites", model.sites()).num("link.tau", model.tau());
}

fn is_rail_symmetric(model: &LinkModel) -> bool {
    model.couplings().windows(2).all(|w| w[0] == w[1])
}

/// Runs the protocol on the seeded random panel input and fills in every
/// protocol metric.
pub(crate) fn protocol_metrics(
    model: &LinkModel,
    schedule: &Schedule,
    cfg: &ExperimentConfig,
    b: &mut RecordBuilder,
    violations: &mut Vec<String>,
) -> Result<f64, CliError> {
    echo_link(b, model);
    let n = schedule.uses();
    let budgets: Vec<String> = schedule.budgets().iter().map(usize::to_string).collect();
    b.put("schedule.n", n).put("schedule.m_k", budgets.join(","));
    let sim = Arc::new(
        LinkSimulator::from_budgets(model, schedule.budgets(), cfg.budget as u128)
            .map_err(CliError::numerical("building the sector"))?,
    );
    b.put("sector_dim", sim.dim());
    let panel = standard_panel(n, cfg.seed);
    let runs = panel
        .iter()
        .map(|psi| run_on(sim.clone(), psi))
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::numerical("protocol run"))?;
    let run = &runs[3];
    let (p_yes, _) = parity_probabilities(run);
    b.num("pi_n", run.pi_n).num("eta0", run.eta0).num("p_yes", p_yes);
    for (k, p) in run.p_list.iter().enumerate() {
        b.num(format!("p.{}", k + 1), *p);
    }
    let shots = cfg.shots as usize;
    let hits = sample_parity(run, shots, cfg.seed);
    b.put("shots", shots).num("p_yes_sampled", hits as f64 / shots.max(1) as f64);

    let mut spread: f64 = 0.0;
    for r in &runs[1..] {
        for (a, c) in r.p_list.iter().zip(&runs[0].p_list) {
            spread = spread.max((a - c).abs());
        }
        spread = spread.max((r.eta0 - runs[0].eta0).abs());
    }
    b.num("input_spread", spread);
    b.num("schmidt_lambda0_sq", run.schmidt.coefficients.first().map_or(0.0, |c| c * c))
        .num("schmidt_ground_overlap", run.schmidt.ground_overlap());

    let fidelity = if run.pi_n > 1e-12 {
        let yes = project_parity(run, Parity::Yes).map_err(CliError::numerical("parity projection"))?;
        Some(recover_yes(run, &yes).map_err(CliError::numerical("YES recovery"))?.fidelity)
    } else {
        None
    };
    b.opt("fidelity_yes", fidelity);
    let no = verify_no_branch(model, schedule, None).map_err(CliError::numerical("NO-branch check"))?;
    b.num("no_branch_residual", no.residual).num("no_probability", no.no_probability);

    if run.pi_n > 0.0 {
        let d_m = model.mediator_dim();
        let teleport = resource_accounting(n, &[run.pi_n], d_m, RateMode::Teleport)
            .map_err(CliError::numerical("rate accounting"))?;
        b.num("teleport_ebits", teleport.teleport_ebits)
            .num("teleport_cbits", teleport.teleport_cbits)
            .num("n1", teleport.n1)
            .opt("asymptotic_rate", teleport.asymptotic_rate);
        let retry = resource_accounting(n, &[run.pi_n], d_m, RateMode::Retry).ok();
        b.opt("retry_rate_first", retry.and_then(|r| r.retry_rate_sequence.first().copied()));
    }

    let norm = run.final_state.norm();
    if (norm - 1.0).abs() > 1e-10 {
        violations.push(format!("final state norm {norm}"));
    }
    if run.eta0 < run.pi_n - 1e-10 {
        violations.push(format!("eta0 {} below pi_n {}", run.eta0, run.pi_n));
    }
    if (p_yes - run.pi_n).abs() > 1e-10 {
        violations.push(format!("P(YES) {p_yes} differs from pi_n {}", run.pi_n));
    }
    if let Some(f) = fidelity {
        if f < 1.0 - 1e-9 && is_rail_symmetric(model) {
            violations.push(format!("YES-branch fidelity {f}"));
        }
    }
    if spread > 1e-10 && is_rail_symmetric(model) {
        violations.push(format!("input dependence {spread} on a rail-symmetric link"));
    }
    Ok(run.pi_n)
}

fn mixing(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let model = cfg.model(None, None)?;
    let mut b = echo(cfg);
    let mut violations = Vec::new();
    echo_link(&mut b, &model);
    let map = receiver_map(&model).map_err(CliError::numerical("receiver map"))?;
    let report = to_spectrum(&Superoperator::new(map.clone()));
    let dim = map.input_dim();
    b.put("sector_dim", dim)
        .num("gap", report.gap)
        .num("second_modulus", report.second_modulus())
        .num("spectral_radius", report.spectral_radius())
        .opt("fixed_point_purity", report.fixed_point_purity)
        .put("fixed_space_dim", report.fixed_space_dim)
        .put("is_mixing", report.is_mixing)
        .put("is_draining", report.is_draining());
    for (k, z) in report.eigenvalues.iter().enumerate() {
        b.num(format!("eigenvalue.{k}.re"), z.re).num(format!("eigenvalue.{k}.im"), z.im);
    }
    if report.spectral_radius() > 1.0 + 1e-10 {
        violations.push(format!("spectral radius {}", report.spectral_radius()));
    }
    for omega in &report.fixed_points {
        let image = map.apply_matrix(omega.matrix()).map_err(CliError::numerical("fixed point"))?;
        let dev = max_abs(&(image - omega.matrix()));
        if dev > 1e-10 {
            violations.push(format!("fixed point moved by {dev}"));
        }
    }
    if report.is_mixing {
        let steps = cfg.mixing.steps as usize;
        let mut rng = seeded_rng(cfg.seed);
        let omega0 = random_density(&HilbertFactorization::flat(dim), &mut rng);
        let distances = iterate_convergence(&map, &omega0, steps).map_err(CliError::numerical("iteration"))?;
        let ratio = decay_ratio(&distances, cfg.mixing.window as usize, DISTANCE_FLOOR);
        b.num("distance_final", distances[steps])
            .opt("decay_ratio", ratio)
            .opt("decay_ratio_error", ratio.map(|r| (r - report.second_modulus()).abs()));
        b.num("ground_distance", ground_distance(&map, GROUND_PROBE_STEPS)?);
    }
    Ok(Outcome { records: vec![b.finish()], violations })
}

/// Distance to the mediator ground state after `steps` Bob couplings,
/// starting from an excitation freshly injected on rail 0.
pub fn ground_distance(map: &qlink_core::channel::KrausChannel, steps: usize) -> Result<f64, CliError> {
    let dim = map.input_dim();
    let mut rho = StateVector::basis(HilbertFactorization::flat(dim), 1).to_density().into_matrix();
    for _ in 0..steps {
        rho = map.apply_matrix(&rho).map_err(CliError::numerical("receiver iteration"))?;
    }
    let rho = DensityOperator::new(rho, HilbertFactorization::flat(dim)).map_err(CliError::numerical("iterate"))?;
    rho.trace_distance(&ground_state(dim)).map_err(CliError::numerical("trace distance"))
}

fn code_build(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let c = cfg.code.as_ref().expect("validated");
    let (d, dy, n, l) = (c.carrier_dim as usize, c.memory_dim as usize, c.uses as usize, c.logical_dim as usize);
    let family = FiniteMemoryChannel::random(d, dy, cfg.seed);
    let ch = family.channel(n).map_err(CliError::numerical("channel"))?;
    let mut b = echo(cfg);
    let mut violations = Vec::new();
    b.put("code.carrier_dim", d).put("code.memory_dim", dy).put("code.uses", n).put("code.logical_dim", l);
    let pm = pm_rate(&family, n).map_err(CliError::numerical("PM rate"))?;
    b.num("pm_rate", pm[n - 1]).num("kraus_residual", ch.completeness_residual());

    let code = greedy_classical_code(&ch, None).map_err(CliError::numerical("classical code"))?;
    let dim = d.pow(n as u32);
    let kl = verify_classical(&code, &ch, 1e-9).map_err(CliError::numerical("classical check"))?;
    let dist = distinguishability_residual(&code, &ch).map_err(CliError::numerical("distinguishability"))?;
    b.put("classical_size", code.len())
        .put("size_floor_dy2", dim.div_ceil(dy.pow(2)))
        .put("size_floor_dy4", dim.div_ceil(dy.pow(4)))
        .num("classical_rate", code.rate)
        .num("classical_kl_residual", kl.residual)
        .num("distinguishability", dist);
    if !kl.passes {
        violations.push(format!("classical Knill-Laflamme residual {}", kl.residual));
    }

    match build_quantum_code(&code, &ch, l) {
        Ok(qc) => {
            let qkl = verify_quantum(&qc, &ch, 1e-8).map_err(CliError::numerical("quantum check"))?;
            let dec = build_decoder(&qc, &ch).map_err(CliError::numerical("decoder"))?;
            let mut rng = seeded_rng(cfg.seed ^ 0xC0DE);
            let logical_space = HilbertFactorization::flat(l);
            let mut worst: f64 = 1.0;
            for _ in 0..c.trials {
                let psi = random_state(&logical_space, &mut rng);
                let encoded = qc.encode(psi.amplitudes()).map_err(CliError::numerical("encode"))?;
                let images: Vec<CVector> = ch.operators().iter().map(|k| k * encoded.amplitudes()).collect();
                let branches = dec.branches_low_rank(&images, 1e-9).map_err(CliError::numerical("decode"))?;
                for br in branches {
                    let f = (psi.amplitudes().adjoint() * br.logical.matrix() * psi.amplitudes())[(0, 0)].re;
                    worst = worst.min(f);
                }
            }
            b.put("quantum_logical_dim", qc.logical_dim())
                .num("quantum_rate", qc.rate)
                .num("quantum_kl_residual", qkl.residual)
                .num("decoder_min_fidelity", worst)
                .num("eigenvalue_sum_error", dec.eigenvalue_sum_error());
            if !qkl.passes {
                violations.push(format!("quantum Knill-Laflamme residual {}", qkl.residual));
            }
        }
        Err(e) => {
            b.put("quantum_error", e.to_string());
        }
    }
    Ok(Outcome { records: vec![b.finish()], violations })
}
