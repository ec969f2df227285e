//! Monte Carlo experiments: large-deviation tails for projector statistics,
//! the Cramér-type reduced-state tail, end-to-end concentration with
//! adversarial supremum search, reduced-entropy statistics, and the minimal
//! environment-size scaling scan.
//!
//! Every experiment is a deterministic function of its configuration and the
//! master stream: trial i draws from the i-th derived stream, records are
//! collected in trial order, and aggregation folds sequentially, so worker
//! count never shows in the output.

use rayon::prelude::*;

use crate::channel::sample_uniform_ruc;
use crate::error::{Error, Result};
use crate::io::f64_repr;
use crate::linalg::{von_neumann_entropy, BipartiteShape, Keep, PureState};
use crate::randgen::{
    derive_stream, haar_unitary, random_pure_state, random_subspace_isometry, SeededStream,
};
use crate::spheregeo::{build_net_probabilistic, NetKind};

use super::{adversarial_sup_estimate, certify_over_net, CertificationSpec, Projector, Verdict};

const LN2: f64 = std::f64::consts::LN_2;
/// Derived-stream tag for per-experiment fixed draws (probe states, projectors).
const SETUP_TAG: u64 = u64::MAX;

/// One Monte Carlo trial: configuration echo plus the measured statistic.
///
/// `wall_time_ms` is pinned to zero so that record bytes are a pure function
/// of (configuration, seed); measured timings go to the log, not the data.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub experiment: &'static str,
    pub seed: u64,
    pub d_a: usize,
    pub d_b: usize,
    pub d_e: usize,
    pub epsilon: f64,
    pub statistic: f64,
    pub threshold: f64,
    pub exceeded: bool,
    pub wall_time_ms: u64,
}

impl TrialRecord {
    pub fn new(
        experiment: &'static str,
        seed: u64,
        d_a: usize,
        d_b: usize,
        d_e: usize,
        epsilon: f64,
        statistic: f64,
        threshold: f64,
    ) -> Self {
        Self {
            experiment,
            seed,
            d_a,
            d_b,
            d_e,
            epsilon,
            statistic,
            threshold,
            exceeded: statistic >= threshold,
            wall_time_ms: 0,
        }
    }
}

/// Ordered key-value summary document.
#[derive(Debug, Clone)]
pub struct Summary {
    entries: Vec<(String, String)>,
}

impl Summary {
    pub fn new(experiment: &str) -> Self {
        Self {
            entries: vec![("experiment".into(), experiment.into())],
        }
    }

    pub fn push_str(&mut self, key: &str, value: impl Into<String>) {
        self.entries.push((key.into(), value.into()));
    }

    pub fn push_u64(&mut self, key: &str, value: u64) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn push_f64(&mut self, key: &str, value: f64) {
        self.entries.push((key.into(), f64_repr(value)));
    }

    pub fn push_bool(&mut self, key: &str, value: bool) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }
}

fn exceed_stats(records: &[TrialRecord]) -> (u64, f64, f64) {
    let count = records.iter().filter(|r| r.exceeded).count() as u64;
    let n = records.len() as f64;
    let fraction = count as f64 / n;
    let stderr = (fraction * (1.0 - fraction) / n).sqrt();
    (count, fraction, stderr)
}

#[derive(Debug, Clone, Copy)]
pub struct LdeConfig {
    pub d_a: usize,
    pub d_e: usize,
    pub p: usize,
    pub epsilon: f64,
    pub trials: u64,
}

/// Large-deviation tail of the averaged projector statistic
/// |(1/d_E) Σ_i tr(U_i φ U_i† Π) − p/d_B| against ε p/d_B, with the
/// reference tail 2·exp(−d_E p ε² / (6 ln 2)).
pub fn lde_experiment(
    cfg: &LdeConfig,
    stream: &SeededStream,
) -> Result<(Vec<TrialRecord>, Summary)> {
    let LdeConfig {
        d_a,
        d_e,
        p,
        epsilon,
        trials,
    } = *cfg;
    if d_a == 0 || d_e == 0 || trials == 0 {
        return Err(Error::Domain("lde dimensions and trials must be positive".into()));
    }
    if p == 0 || p > d_a {
        return Err(Error::Domain(format!("projector rank must lie in 1..={d_a}, got {p}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!(
            "lde epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let d_b = d_a;
    let setup = derive_stream(stream, SETUP_TAG);
    let phi = random_pure_state(d_a, &derive_stream(&setup, 0))?;
    let projector = Projector::random(d_a, p, &derive_stream(&setup, 1))?;
    let mean_target = p as f64 / d_b as f64;
    let threshold = epsilon * p as f64 / d_b as f64;
    let seed = stream.master_seed();

    let records: Vec<TrialRecord> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let trial_stream = derive_stream(stream, i);
            let mut acc = 0.0;
            for j in 0..d_e as u64 {
                let u = haar_unitary(d_a, &derive_stream(&trial_stream, j)).expect("d_a > 0");
                let image = u.apply(&phi).expect("dims match");
                acc += projector.expectation(&image).expect("dims match");
            }
            let statistic = (acc / d_e as f64 - mean_target).abs();
            TrialRecord::new("lde", seed, d_a, d_b, d_e, epsilon, statistic, threshold)
        })
        .collect();

    let bound = 2.0 * (-(d_e as f64) * p as f64 * epsilon * epsilon / (6.0 * LN2)).exp();
    let (count, fraction, stderr) = exceed_stats(&records);
    let mut summary = Summary::new("lde");
    summary.push_u64("seed", seed);
    summary.push_u64("d_a", d_a as u64);
    summary.push_u64("d_b", d_b as u64);
    summary.push_u64("d_e", d_e as u64);
    summary.push_u64("p", p as u64);
    summary.push_f64("epsilon", epsilon);
    summary.push_u64("trials", trials);
    summary.push_f64("threshold", threshold);
    summary.push_u64("exceed_count", count);
    summary.push_f64("exceed_fraction", fraction);
    summary.push_f64("mc_stderr", stderr);
    summary.push_f64("tail_bound", bound);
    summary.push_bool("within_bound", fraction <= bound + 3.0 * stderr);
    Ok((records, summary))
}

#[derive(Debug, Clone, Copy)]
pub struct CramerConfig {
    pub d_b: usize,
    pub d_e: usize,
    pub epsilon: f64,
    pub trials: u64,
}

/// Tail of tr(φ_B · tr_E(Uψ U†)) − 1/d_B over random bipartite states,
/// against the reference exp(−d_E ε² / (14 ln 2)).
///
/// Uψ for Haar U and an independent uniform ψ is itself a uniform state, so
/// the trial draws the composed state directly; the reduced expectation is
/// ∥M†φ_B∥² for the d_B × d_E amplitude matrix M.
pub fn cramer_tail_experiment(
    cfg: &CramerConfig,
    stream: &SeededStream,
) -> Result<(Vec<TrialRecord>, Summary)> {
    let CramerConfig {
        d_b,
        d_e,
        epsilon,
        trials,
    } = *cfg;
    if d_b == 0 || d_e == 0 || trials == 0 {
        return Err(Error::Domain("cramer dimensions and trials must be positive".into()));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::Domain(format!(
            "cramer epsilon must lie in (0, 1], got {epsilon}"
        )));
    }
    let shape = BipartiteShape::new(d_b, d_e)?;
    let setup = derive_stream(stream, SETUP_TAG);
    let probe = random_pure_state(d_b, &derive_stream(&setup, 0))?;
    let threshold = epsilon / d_b as f64;
    let seed = stream.master_seed();

    let records: Vec<TrialRecord> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let chi = random_pure_state(d_b * d_e, &derive_stream(stream, i)).expect("dims > 0");
            let m = chi.amplitude_matrix(shape);
            let w = m.adjoint() * probe.as_dvector();
            let statistic = w.norm_squared() - 1.0 / d_b as f64;
            TrialRecord::new("cramer", seed, d_b, d_b, d_e, epsilon, statistic, threshold)
        })
        .collect();

    let bound = (-(d_e as f64) * epsilon * epsilon / (14.0 * LN2)).exp();
    let (count, fraction, stderr) = exceed_stats(&records);
    let mean: f64 = records.iter().map(|r| r.statistic).sum::<f64>() / trials as f64;
    let mut summary = Summary::new("cramer");
    summary.push_u64("seed", seed);
    summary.push_u64("d_b", d_b as u64);
    summary.push_u64("d_e", d_e as u64);
    summary.push_f64("epsilon", epsilon);
    summary.push_u64("trials", trials);
    summary.push_f64("threshold", threshold);
    summary.push_u64("exceed_count", count);
    summary.push_f64("exceed_fraction", fraction);
    summary.push_f64("mc_stderr", stderr);
    summary.push_f64("mean_statistic", mean);
    summary.push_f64("tail_bound", bound);
    summary.push_bool("within_bound", fraction <= bound + 3.0 * stderr);
    summary.push_str(
        "sampling_note",
        "composed state U|psi> drawn directly as a uniform bipartite state (unitary invariance)",
    );
    Ok((records, summary))
}

#[derive(Debug, Clone, Copy)]
pub struct ConcentrationConfig {
    pub d_b: usize,
    pub d_e: usize,
    pub epsilon: f64,
    pub trials: u64,
    pub net_constant_c: f64,
    pub adversarial_restarts: usize,
}

/// End-to-end concentration: fresh channel per trial, supremum deficit
/// estimated adversarially, compared against
/// C · (d_B²/ε) · log₂(d_B/ε) · exp(−d_E ε² / (14 ln 2)).
pub fn concentration_experiment(
    cfg: &ConcentrationConfig,
    stream: &SeededStream,
) -> Result<(Vec<TrialRecord>, Summary)> {
    let ConcentrationConfig {
        d_b,
        d_e,
        epsilon,
        trials,
        net_constant_c,
        adversarial_restarts,
    } = *cfg;
    if d_b == 0 || d_e == 0 || trials == 0 {
        return Err(Error::Domain(
            "concentration dimensions and trials must be positive".into(),
        ));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::Domain(format!(
            "concentration epsilon must lie in (0, 1], got {epsilon}"
        )));
    }
    if adversarial_restarts == 0 {
        return Err(Error::Domain("adversarial restarts must be positive".into()));
    }
    let threshold = epsilon / d_b as f64;
    let seed = stream.master_seed();

    let records: Vec<TrialRecord> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let ch = sample_uniform_ruc(d_b, d_e, &derive_stream(stream, 2 * i))
                .expect("dims > 0");
            let (sup, _) =
                adversarial_sup_estimate(&ch, adversarial_restarts, &derive_stream(stream, 2 * i + 1))
                    .expect("restarts > 0");
            let statistic = sup - 1.0 / d_b as f64;
            TrialRecord::new(
                "concentration",
                seed,
                d_b,
                d_b,
                d_e,
                epsilon,
                statistic,
                threshold,
            )
        })
        .collect();

    let tail = (-(d_e as f64) * epsilon * epsilon / (14.0 * LN2)).exp();
    let prefactor = net_constant_c * (d_b as f64).powi(2) / epsilon * (d_b as f64 / epsilon).log2();
    let rhs = prefactor * tail;
    let vacuous = rhs >= 1.0;
    let (count, fraction, stderr) = exceed_stats(&records);
    let mut summary = Summary::new("concentration");
    summary.push_u64("seed", seed);
    summary.push_u64("d_b", d_b as u64);
    summary.push_u64("d_e", d_e as u64);
    summary.push_f64("epsilon", epsilon);
    summary.push_u64("trials", trials);
    summary.push_f64("net_constant_c", net_constant_c);
    summary.push_u64("adversarial_restarts", adversarial_restarts as u64);
    summary.push_f64("threshold", threshold);
    summary.push_u64("exceed_count", count);
    summary.push_f64("exceed_fraction", fraction);
    summary.push_f64("mc_stderr", stderr);
    summary.push_f64("cramer_tail_factor", tail);
    summary.push_f64("bound_rhs", rhs);
    summary.push_bool("vacuous", vacuous);
    summary.push_bool("within_bound", vacuous || fraction <= rhs + 3.0 * stderr);
    Ok((records, summary))
}

#[derive(Debug, Clone, Copy)]
pub struct EntanglementConfig {
    pub d_b: usize,
    pub d_e: usize,
    pub subspace_dim: usize,
    pub samples: u64,
}

/// Reduced-entropy statistics of random states drawn from one Haar-random
/// subspace; reports min/mean entropy and the implied entanglement slack
/// α = log₂ d_B − min S − (1/ln 2)(d_B/d_E). The sampled minimum bounds the
/// subspace's true minimum from above.
pub fn entanglement_experiment(
    cfg: &EntanglementConfig,
    stream: &SeededStream,
) -> Result<(Vec<TrialRecord>, Summary)> {
    let EntanglementConfig {
        d_b,
        d_e,
        subspace_dim,
        samples,
    } = *cfg;
    if d_b == 0 || d_e == 0 || samples == 0 {
        return Err(Error::Domain(
            "entanglement dimensions and samples must be positive".into(),
        ));
    }
    let total = d_b * d_e;
    if subspace_dim == 0 || subspace_dim > total {
        return Err(Error::Domain(format!(
            "subspace dimension must lie in 1..={total}, got {subspace_dim}"
        )));
    }
    let shape = BipartiteShape::new(d_b, d_e)?;
    let setup = derive_stream(stream, SETUP_TAG);
    let isometry = random_subspace_isometry(total, subspace_dim, &derive_stream(&setup, 0))?;
    let w = isometry.as_dmatrix().clone();
    // Reference level for the records: the asymptotic mean reduced entropy.
    let page_estimate = (d_b as f64).log2() - d_b as f64 / (2.0 * d_e as f64 * LN2);
    let seed = stream.master_seed();

    let records: Vec<TrialRecord> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let coeff =
                random_pure_state(subspace_dim, &derive_stream(stream, i)).expect("dims > 0");
            let state = PureState::from_dvector(&w * coeff.as_dvector());
            let reduced = state.reduced_density(shape, Keep::B).expect("dims match");
            let entropy = von_neumann_entropy(&reduced).expect("reduced state is valid");
            TrialRecord::new(
                "entanglement",
                seed,
                total,
                d_b,
                d_e,
                0.0,
                entropy,
                page_estimate,
            )
        })
        .collect();

    let min_entropy = records.iter().map(|r| r.statistic).fold(f64::INFINITY, f64::min);
    let mean_entropy = records.iter().map(|r| r.statistic).sum::<f64>() / samples as f64;
    let implied_alpha = (d_b as f64).log2() - min_entropy - d_b as f64 / (d_e as f64 * LN2);
    let mut summary = Summary::new("entanglement");
    summary.push_u64("seed", seed);
    summary.push_u64("d_b", d_b as u64);
    summary.push_u64("d_e", d_e as u64);
    summary.push_u64("subspace_dim", subspace_dim as u64);
    summary.push_u64("samples", samples);
    summary.push_f64("min_entropy_bits", min_entropy);
    summary.push_f64("mean_entropy_bits", mean_entropy);
    summary.push_f64("implied_alpha", implied_alpha);
    summary.push_f64("page_mean_estimate_bits", page_estimate);
    summary.push_bool("theorem_regime", d_b >= d_e && d_e >= 3);
    summary.push_str(
        "min_note",
        "sampled minimum is an upper bound on the subspace minimum",
    );
    Ok((records, summary))
}

#[derive(Debug, Clone)]
pub struct ScalingConfig {
    pub dims: Vec<usize>,
    pub epsilon: f64,
    pub success_target: f64,
    pub seeds_per_point: u64,
    pub net_constant_c: f64,
    pub max_d_e: usize,
}

#[derive(Debug, Clone)]
pub struct ScalingOutcome {
    pub records: Vec<TrialRecord>,
    pub summary: Summary,
    /// (channel dimension, minimal certified d_E).
    pub table: Vec<(usize, usize)>,
}

/// Doubling-then-bisection search, per dimension, for the smallest d_E whose
/// certification pass rate over fresh seeds reaches the success target.
/// Certification uses fresh statistical (measure) nets.
pub fn scaling_experiment(cfg: &ScalingConfig, stream: &SeededStream) -> Result<ScalingOutcome> {
    if cfg.dims.is_empty() {
        return Err(Error::Domain("scaling needs at least one dimension".into()));
    }
    if cfg.dims.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("scaling dims must be strictly ascending".into()));
    }
    if cfg.dims[0] == 0 {
        return Err(Error::Domain("scaling dims must be positive".into()));
    }
    if !(cfg.epsilon > 0.0 && cfg.epsilon <= 0.5) {
        return Err(Error::Domain(format!(
            "scaling epsilon must lie in (0, 1/2], got {}",
            cfg.epsilon
        )));
    }
    if !(cfg.success_target > 0.0 && cfg.success_target <= 1.0) {
        return Err(Error::Domain("success target must lie in (0, 1]".into()));
    }
    if cfg.seeds_per_point == 0 || cfg.max_d_e == 0 {
        return Err(Error::Domain("seed count and d_E budget must be positive".into()));
    }
    let needed = (cfg.success_target * cfg.seeds_per_point as f64).ceil() as u64;
    let seed = stream.master_seed();
    let spec = CertificationSpec::new(cfg.epsilon, NetKind::Measure, cfg.net_constant_c, 1)?;

    let mut records = Vec::new();
    let mut table: Vec<(usize, usize)> = Vec::new();

    for (d_idx, &d) in cfg.dims.iter().enumerate() {
        let dim_stream = derive_stream(stream, d_idx as u64);
        let probe = |d_e: usize, records: &mut Vec<TrialRecord>| -> bool {
            let probe_stream = derive_stream(&dim_stream, d_e as u64);
            let results: Vec<(TrialRecord, bool)> = (0..cfg.seeds_per_point)
                .into_par_iter()
                .map(|k| {
                    let sp = derive_stream(&probe_stream, k);
                    let ch = sample_uniform_ruc(d, d_e, &derive_stream(&sp, 0)).expect("dims > 0");
                    let net = build_net_probabilistic(
                        d,
                        cfg.epsilon,
                        cfg.net_constant_c,
                        &derive_stream(&sp, 1),
                    )
                    .expect("validated parameters");
                    let report = certify_over_net(&ch, &net, &spec).expect("matching dimensions");
                    let record = TrialRecord::new(
                        "scaling",
                        seed,
                        d,
                        d,
                        d_e,
                        cfg.epsilon,
                        report.forward_deficit + report.net_correction,
                        cfg.epsilon / d as f64,
                    );
                    (record, report.verdict == Verdict::Pass)
                })
                .collect();
            let passes = results.iter().filter(|(_, p)| *p).count() as u64;
            records.extend(results.into_iter().map(|(r, _)| r));
            passes >= needed
        };

        let minimal = if probe(1, &mut records) {
            1
        } else {
            let mut hi = 1usize;
            loop {
                hi *= 2;
                if hi > cfg.max_d_e {
                    let partial = table
                        .iter()
                        .map(|(d, m)| format!("{d}:{m}"))
                        .collect::<Vec<_>>()
                        .join(", ");
                    return Err(Error::Resource(format!(
                        "scaling search at d={d} exceeded the d_E budget {}; partial table [{partial}]",
                        cfg.max_d_e
                    )));
                }
                if probe(hi, &mut records) {
                    break;
                }
            }
            let mut lo = hi / 2;
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if probe(mid, &mut records) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hi
        };
        table.push((d, minimal));
    }

    let mut summary = Summary::new("scaling");
    summary.push_u64("seed", seed);
    summary.push_f64("epsilon", cfg.epsilon);
    summary.push_f64("success_target", cfg.success_target);
    summary.push_u64("seeds_per_point", cfg.seeds_per_point);
    summary.push_f64("net_constant_c", cfg.net_constant_c);
    for (d, m) in &table {
        summary.push_u64(&format!("minimal_d_e[{d}]"), *m as u64);
    }
    let monotone = table.windows(2).all(|w| w[0].1 <= w[1].1);
    summary.push_bool("monotone_in_d", monotone);
    // Growth measured against the scan's base dimension; consecutive ratios
    // are also reported as data.
    let (d0, m0) = table[0];
    for (d, m) in table.iter().skip(1) {
        summary.push_f64(
            &format!("growth_factor_vs_base[{d}]"),
            *m as f64 / m0 as f64,
        );
        summary.push_f64(&format!("dim_ratio_vs_base[{d}]"), *d as f64 / d0 as f64);
    }
    let sublinear = table
        .iter()
        .skip(1)
        .all(|(d, m)| (*m as f64 / m0 as f64) < (*d as f64 / d0 as f64));
    summary.push_bool("sublinear_growth_vs_base", sublinear);
    if table.len() >= 2 {
        let xs: Vec<f64> = table.iter().map(|(d, _)| (*d as f64).log2()).collect();
        let ys: Vec<f64> = table.iter().map(|(_, m)| *m as f64).collect();
        let xm = xs.iter().sum::<f64>() / xs.len() as f64;
        let ym = ys.iter().sum::<f64>() / ys.len() as f64;
        let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
        let var: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
        summary.push_f64("lsq_slope_vs_log2_d", cov / var);
    }
    Ok(ScalingOutcome {
        records,
        summary,
        table,
    })
}
