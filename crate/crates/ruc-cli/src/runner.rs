//! Experiment dispatch: builds the configured worker pool, runs the named
//! experiment, and writes `records.csv` plus `summary.txt` (and any net or
//! channel artifacts) into the output directory.
//!
//! Exit codes: 0 pass/complete, 1 certification fail, 2 configuration error,
//! 3 resource or i/o error. Output bytes are a function of (configuration,
//! seed) only; timing goes to stderr.

use std::path::Path;
use std::time::Instant;

use ruc_core::certify::{
    adversarial_sup_estimate, certify_over_net, concentration_experiment, cramer_tail_experiment,
    entanglement_experiment, lde_experiment, scaling_experiment, CertificationSpec,
    ConcentrationConfig, CramerConfig, EntanglementConfig, LdeConfig, ScalingConfig, Summary,
    TrialRecord, Verdict,
};
use ruc_core::channel::{sample_uniform_ruc, RandomUnitaryChannel};
use ruc_core::io::{read_channel, read_net, write_channel, write_net};
use ruc_core::randgen::{derive_stream, SeededStream};
use ruc_core::spheregeo::{
    build_covering_net, build_net_probabilistic, chernoff_floor_check, empirical_shatter_search,
    verify_net_against_caps, NetKind,
};
use ruc_core::{Error, Result};

use crate::config::{ChannelSpec, ExperimentConfig, Params};
use crate::records::write_records;

pub struct RunOutcome {
    pub exit_code: i32,
    pub summary: Summary,
}

pub fn run(config: &ExperimentConfig) -> i32 {
    let started = Instant::now();
    let result = if config.workers > 0 {
        match rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
        {
            Ok(pool) => pool.install(|| run_inner(config)),
            Err(e) => Err(Error::Resource(format!("worker pool: {e}"))),
        }
    } else {
        run_inner(config)
    };
    match result {
        Ok(outcome) => {
            eprintln!(
                "{}: done in {} ms, exit {}",
                config.experiment,
                started.elapsed().as_millis(),
                outcome.exit_code
            );
            outcome.exit_code
        }
        Err(e) => {
            let code = match e {
                Error::Resource(_) | Error::Io(_) => 3,
                _ => 2,
            };
            eprintln!("{}: error: {e}", config.experiment);
            code
        }
    }
}

fn run_inner(config: &ExperimentConfig) -> Result<RunOutcome> {
    std::fs::create_dir_all(&config.out)?;
    let stream = SeededStream::new(config.seed);
    let (records, summary, exit_code) = dispatch(config, &stream)?;
    write_records(&records, &config.out.join("records.csv"))?;
    std::fs::write(config.out.join("summary.txt"), summary.to_text())?;
    Ok(RunOutcome { exit_code, summary })
}

fn dispatch(
    config: &ExperimentConfig,
    stream: &SeededStream,
) -> Result<(Vec<TrialRecord>, Summary, i32)> {
    match &config.params {
        Params::Certify {
            channel,
            d_a,
            d_e,
            epsilon,
            net_kind,
            net_constant_c,
            adversarial_restarts,
            net_file,
        } => run_certify(
            config,
            stream,
            channel,
            *d_a,
            *d_e,
            *epsilon,
            *net_kind,
            *net_constant_c,
            *adversarial_restarts,
            net_file.as_deref(),
        ),
        Params::NetBuild {
            dim,
            kind,
            epsilon,
            net_constant_c,
        } => {
            let net_stream = derive_stream(stream, 1);
            let net = match kind {
                NetKind::Measure => {
                    build_net_probabilistic(*dim, *epsilon, *net_constant_c, &net_stream)?
                }
                NetKind::Covering => build_covering_net(*dim, *epsilon, &net_stream)?,
            };
            write_net(&net, &net_stream, &config.out.join("net.txt"))?;
            let mut summary = Summary::new("net-build");
            summary.push_u64("seed", config.seed);
            summary.push_u64("dim", *dim as u64);
            summary.push_str("kind", net.kind().name());
            summary.push_f64("epsilon", net.epsilon());
            summary.push_f64("constant_c", net.constant_c());
            summary.push_u64("points", net.len() as u64);
            Ok((Vec::new(), summary, 0))
        }
        Params::NetVerify {
            net_file,
            epsilon,
            trials,
        } => {
            let (net, _) = read_net(net_file)?;
            let misses = verify_net_against_caps(&net, *epsilon, *trials, &derive_stream(stream, 2))?;
            let record = TrialRecord::new(
                "net-verify",
                config.seed,
                net.dim(),
                net.dim(),
                0,
                *epsilon,
                misses as f64,
                1.0,
            );
            let mut summary = Summary::new("net-verify");
            summary.push_u64("seed", config.seed);
            summary.push_u64("dim", net.dim() as u64);
            summary.push_str("kind", net.kind().name());
            summary.push_u64("points", net.len() as u64);
            summary.push_f64("cap_measure", *epsilon);
            summary.push_u64("trials", *trials);
            summary.push_u64("misses", misses);
            summary.push_f64("miss_fraction", misses as f64 / *trials as f64);
            Ok((vec![record], summary, 0))
        }
        Params::Lde {
            d_a,
            d_e,
            p,
            epsilon,
            trials,
        } => {
            let cfg = LdeConfig {
                d_a: *d_a,
                d_e: *d_e,
                p: *p,
                epsilon: *epsilon,
                trials: *trials,
            };
            let (records, summary) = lde_experiment(&cfg, stream)?;
            Ok((records, summary, 0))
        }
        Params::Cramer {
            d_b,
            d_e,
            epsilon,
            trials,
        } => {
            let cfg = CramerConfig {
                d_b: *d_b,
                d_e: *d_e,
                epsilon: *epsilon,
                trials: *trials,
            };
            let (records, summary) = cramer_tail_experiment(&cfg, stream)?;
            Ok((records, summary, 0))
        }
        Params::Concentration {
            d_b,
            d_e,
            epsilon,
            trials,
            net_constant_c,
            adversarial_restarts,
        } => {
            let cfg = ConcentrationConfig {
                d_b: *d_b,
                d_e: *d_e,
                epsilon: *epsilon,
                trials: *trials,
                net_constant_c: *net_constant_c,
                adversarial_restarts: *adversarial_restarts,
            };
            let (records, summary) = concentration_experiment(&cfg, stream)?;
            Ok((records, summary, 0))
        }
        Params::Entanglement {
            d_b,
            d_e,
            subspace_dim,
            samples,
        } => {
            let cfg = EntanglementConfig {
                d_b: *d_b,
                d_e: *d_e,
                subspace_dim: *subspace_dim,
                samples: *samples,
            };
            let (records, summary) = entanglement_experiment(&cfg, stream)?;
            Ok((records, summary, 0))
        }
        Params::Scaling {
            dims,
            epsilon,
            success_target,
            seeds_per_point,
            net_constant_c,
            max_d_e,
        } => {
            let cfg = ScalingConfig {
                dims: dims.clone(),
                epsilon: *epsilon,
                success_target: *success_target,
                seeds_per_point: *seeds_per_point,
                net_constant_c: *net_constant_c,
                max_d_e: *max_d_e,
            };
            let outcome = scaling_experiment(&cfg, stream)?;
            Ok((outcome.records, outcome.summary, 0))
        }
        Params::Chernoff { t, epsilon } => run_chernoff(config, *t, *epsilon),
        Params::ShatterSearch { dim, m, samples } => {
            let found = empirical_shatter_search(*dim, *m, *samples, stream)?;
            let reference = 2 * *dim as u64 + 1;
            let record = TrialRecord::new(
                "shatter-search",
                config.seed,
                *dim,
                *dim,
                0,
                0.0,
                found as f64,
                reference as f64,
            );
            let mut summary = Summary::new("shatter-search");
            summary.push_u64("seed", config.seed);
            summary.push_u64("dim", *dim as u64);
            summary.push_u64("m", *m as u64);
            summary.push_u64("samples", *samples);
            summary.push_u64("largest_shattered", found as u64);
            summary.push_u64("cap_vc_reference_2d_plus_1", reference);
            summary.push_str(
                "note",
                "randomized search reports a lower bound on the true VC dimension",
            );
            Ok((vec![record], summary, 0))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_certify(
    config: &ExperimentConfig,
    stream: &SeededStream,
    channel_spec: &ChannelSpec,
    d_a: usize,
    d_e: usize,
    epsilon: f64,
    net_kind: NetKind,
    net_constant_c: f64,
    adversarial_restarts: usize,
    net_file: Option<&Path>,
) -> Result<(Vec<TrialRecord>, Summary, i32)> {
    let channel_stream = derive_stream(stream, 0);
    let channel = match channel_spec {
        ChannelSpec::File(path) => read_channel(path)?.0,
        ChannelSpec::Pauli => RandomUnitaryChannel::pauli_qubit(),
        ChannelSpec::SingleUnitary => sample_uniform_ruc(d_a, 1, &channel_stream)?,
        ChannelSpec::Haar => sample_uniform_ruc(d_a, d_e, &channel_stream)?,
    };
    if !matches!(channel_spec, ChannelSpec::File(_)) {
        write_channel(&channel, &channel_stream, &config.out.join("channel.txt"))?;
    }
    let d_b = channel.d_a();

    let spec = CertificationSpec::new(epsilon, net_kind, net_constant_c, adversarial_restarts)?;
    let net_stream = derive_stream(stream, 1);
    let net = match net_file {
        Some(path) => read_net(path)?.0,
        None => match net_kind {
            NetKind::Measure => {
                build_net_probabilistic(d_b, epsilon, net_constant_c, &net_stream)?
            }
            NetKind::Covering => {
                // Radius ε/(2 d_B) earns the ε/(4 d_B) correction.
                build_covering_net(d_b, epsilon / (2.0 * d_b as f64), &net_stream)?
            }
        },
    };
    if net_file.is_none() {
        write_net(&net, &net_stream, &config.out.join("net.txt"))?;
    }

    let report = certify_over_net(&channel, &net, &spec)?;
    let (adv_value, _) =
        adversarial_sup_estimate(&channel, adversarial_restarts.max(1), &derive_stream(stream, 2))?;

    let statistic = report.forward_deficit + report.net_correction;
    let threshold = epsilon / report.d_b as f64;
    let record = TrialRecord::new(
        "certify",
        config.seed,
        channel.d_a(),
        report.d_b,
        report.d_e,
        epsilon,
        statistic,
        threshold,
    );

    let mut summary = Summary::new("certify");
    summary.push_u64("seed", config.seed);
    summary.push_u64("d_a", channel.d_a() as u64);
    summary.push_u64("d_b", report.d_b as u64);
    summary.push_u64("d_e", report.d_e as u64);
    summary.push_f64("epsilon", epsilon);
    summary.push_str("net_kind", net.kind().name());
    summary.push_u64("net_points", net.len() as u64);
    summary.push_f64("net_constant_c", net.constant_c());
    summary.push_f64("forward_deficit", report.forward_deficit);
    summary.push_f64("conjugate_deficit", report.conjugate_deficit);
    summary.push_f64("net_correction", report.net_correction);
    summary.push_f64("forward_threshold", threshold);
    summary.push_f64("conjugate_threshold", epsilon / report.d_e as f64);
    summary.push_bool(
        "conjugate_within_threshold",
        report.conjugate_deficit <= epsilon / report.d_e as f64,
    );
    summary.push_f64("adversarial_sup", adv_value);
    summary.push_f64("adversarial_deficit", adv_value - 1.0 / report.d_b as f64);
    summary.push_u64("adversarial_restarts", adversarial_restarts as u64);
    summary.push_str("guarantee", report.guarantee_kind.name());
    summary.push_str("verdict", report.verdict.name());
    let exit = match report.verdict {
        Verdict::Pass => 0,
        Verdict::Fail => 1,
    };
    Ok((vec![record], summary, exit))
}

fn run_chernoff(
    config: &ExperimentConfig,
    t: Option<u64>,
    epsilon: f64,
) -> Result<(Vec<TrialRecord>, Summary, i32)> {
    let mut records = Vec::new();
    let mut summary = Summary::new("chernoff");
    summary.push_u64("seed", config.seed);
    match t {
        Some(t) => {
            let (probability, passes) = chernoff_floor_check(t, epsilon)?;
            records.push(TrialRecord::new(
                "chernoff",
                config.seed,
                0,
                0,
                0,
                epsilon,
                probability,
                0.5,
            ));
            summary.push_u64("t", t);
            summary.push_f64("epsilon", epsilon);
            summary.push_f64("probability", probability);
            summary.push_bool("floor_applies", t as f64 * epsilon >= 8.0);
            summary.push_bool("passes", passes);
        }
        None => {
            // Full grid: t in 8..=128 crossed with the standard ε set,
            // restricted to the tε ≥ 8 floor regime.
            let mut all_pass = true;
            let mut checked = 0u64;
            for t in 8..=128u64 {
                for eps in [0.125, 0.25, 0.5, 1.0] {
                    if t as f64 * eps < 8.0 {
                        continue;
                    }
                    let (probability, passes) = chernoff_floor_check(t, eps)?;
                    all_pass &= passes;
                    checked += 1;
                    records.push(TrialRecord::new(
                        "chernoff",
                        config.seed,
                        0,
                        0,
                        0,
                        eps,
                        probability,
                        0.5,
                    ));
                }
            }
            summary.push_str("mode", "grid");
            summary.push_u64("grid_points", checked);
            summary.push_bool("floor_holds_everywhere", all_pass);
        }
    }
    Ok((records, summary, 0))
}
