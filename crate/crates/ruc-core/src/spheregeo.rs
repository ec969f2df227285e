//! Geometry of the unit sphere S^{2d−1}: caps and their measure, measure
//! ε-nets, covering nets in trace distance, shatter-function bounds, and the
//! binomial floor behind the net-existence argument.
//!
//! Caps use the real Euclidean inner product after the standard
//! identification C^d ≅ R^{2d}: a cap of height h around the unit vector u is
//! {x : Re⟨u|x⟩ ≥ 1 − h}.

use rayon::prelude::*;
use statrs::distribution::{Binomial, DiscreteCDF};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};
use crate::linalg::PureState;
use crate::randgen::{derive_stream, random_pure_state, SeededStream};

/// Spherical cap with center u and height h ∈ (0, 2].
#[derive(Debug, Clone)]
pub struct Cap {
    center: PureState,
    height: f64,
}

impl Cap {
    pub fn new(center: PureState, height: f64) -> Result<Self> {
        if !(height > 0.0 && height <= 2.0) {
            return Err(Error::Domain(format!(
                "cap height must lie in (0, 2], got {height}"
            )));
        }
        Ok(Self { center, height })
    }

    pub fn center(&self) -> &PureState {
        &self.center
    }

    pub fn height(&self) -> f64 {
        self.height
    }
}

/// Closed-cap membership: Re⟨u|x⟩ ≥ 1 − h.
pub fn cap_contains(cap: &Cap, x: &PureState) -> Result<bool> {
    let re = cap.center.real_inner(x)?;
    Ok(re >= 1.0 - cap.height)
}

/// Normalized uniform measure of a height-h cap on S^{2d−1}.
///
/// With n = 2d real dimensions and polar angle θ given by cos θ = 1 − h, the
/// cap fraction is ½ I_{sin²θ}((n−1)/2, ½); heights beyond the hemisphere go
/// through the complement.
pub fn cap_measure(h: f64, d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::Domain("sphere dimension must be positive".into()));
    }
    if !(h > 0.0 && h <= 2.0) {
        return Err(Error::Domain(format!("cap height must lie in (0, 2], got {h}")));
    }
    let a = (2 * d - 1) as f64 / 2.0;
    let measure = if h <= 1.0 {
        0.5 * beta_reg(a, 0.5, h * (2.0 - h))
    } else {
        let hc = 2.0 - h;
        1.0 - 0.5 * beta_reg(a, 0.5, hc * (2.0 - hc))
    };
    Ok(measure.clamp(0.0, 1.0))
}

/// Inverts `cap_measure` in h by bisection to |μ(h) − ε| ≤ 1e-9.
pub fn height_for_measure(eps: f64, d: usize) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain(format!(
            "target measure must lie in (0, 1], got {eps}"
        )));
    }
    let mut lo = 0.0f64;
    let mut hi = 2.0f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let mu = cap_measure(mid, d)?;
        if (mu - eps).abs() <= 1e-9 {
            return Ok(mid);
        }
        if mu < eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Numeric(format!(
        "cap-height bisection did not reach measure {eps} within 200 steps"
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetKind {
    /// Meets every cap of measure ≥ ε with high probability.
    Measure,
    /// Every pure state lies within trace distance δ of some point.
    Covering,
}

impl NetKind {
    pub fn name(&self) -> &'static str {
        match self {
            NetKind::Measure => "measure",
            NetKind::Covering => "covering",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "measure" => Ok(NetKind::Measure),
            "covering" => Ok(NetKind::Covering),
            other => Err(Error::Parse(format!("unknown net kind '{other}'"))),
        }
    }
}

/// Finite point set on the sphere of C^d with its net parameter.
#[derive(Debug, Clone)]
pub struct EpsilonNet {
    dim: usize,
    epsilon: f64,
    kind: NetKind,
    constant_c: f64,
    points: Vec<PureState>,
}

impl EpsilonNet {
    pub fn new(
        dim: usize,
        epsilon: f64,
        kind: NetKind,
        constant_c: f64,
        points: Vec<PureState>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("net dimension must be positive".into()));
        }
        match kind {
            NetKind::Measure => {
                if !(epsilon > 0.0 && epsilon <= 0.5) {
                    return Err(Error::Domain(format!(
                        "measure-net epsilon must lie in (0, 1/2], got {epsilon}"
                    )));
                }
                let expected = measure_net_cardinality(dim, epsilon, constant_c);
                if points.len() != expected {
                    return Err(Error::InvalidState(format!(
                        "measure net must have exactly {expected} points, got {}",
                        points.len()
                    )));
                }
            }
            NetKind::Covering => {
                if !(epsilon > 0.0 && epsilon <= 2.0) {
                    return Err(Error::Domain(format!(
                        "covering radius must lie in (0, 2], got {epsilon}"
                    )));
                }
            }
        }
        if !(constant_c > 0.0) {
            return Err(Error::Domain("net constant must be positive".into()));
        }
        if points.iter().any(|p| p.dim() != dim) {
            return Err(Error::Shape("net points must match the net dimension".into()));
        }
        Ok(Self {
            dim,
            epsilon,
            kind,
            constant_c,
            points,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn kind(&self) -> NetKind {
        self.kind
    }

    pub fn constant_c(&self) -> f64 {
        self.constant_c
    }

    pub fn points(&self) -> &[PureState] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// t = ⌈C · d · (1/ε) · log₂(1/ε)⌉, the measure-net point count.
pub fn measure_net_cardinality(d: usize, eps: f64, c: f64) -> usize {
    (c * d as f64 * (1.0 / eps) * (1.0 / eps).log2()).ceil() as usize
}

/// Draws t i.i.d. uniform sphere points as a measure ε-net.
pub fn build_net_probabilistic(
    d: usize,
    eps: f64,
    c: f64,
    stream: &SeededStream,
) -> Result<EpsilonNet> {
    if d == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::Domain(format!(
            "measure-net epsilon must lie in (0, 1/2], got {eps}"
        )));
    }
    if !(c > 0.0) {
        return Err(Error::Domain("net constant must be positive".into()));
    }
    let t = measure_net_cardinality(d, eps, c);
    let points: Vec<PureState> = (0..t as u64)
        .into_par_iter()
        .map(|i| random_pure_state(d, &derive_stream(stream, i)).expect("d > 0"))
        .collect();
    EpsilonNet::new(d, eps, NetKind::Measure, c, points)
}

/// Samples `trials` caps of measure ε with uniform centers (cap i's center
/// comes from the i-th derived stream) and counts caps missed by the net.
pub fn verify_net_against_caps(
    net: &EpsilonNet,
    eps: f64,
    trials: u64,
    stream: &SeededStream,
) -> Result<u64> {
    let h = height_for_measure(eps, net.dim())?;
    let threshold = 1.0 - h;
    let misses = (0..trials)
        .into_par_iter()
        .map(|i| {
            let center = random_pure_state(net.dim(), &derive_stream(stream, i)).expect("d > 0");
            let hit = net
                .points()
                .iter()
                .any(|p| center.real_inner(p).expect("dims match") >= threshold);
            u64::from(!hit)
        })
        .sum();
    Ok(misses)
}

/// Default point budget for covering-net construction.
pub const COVERING_POINT_BUDGET: usize = 200_000;

const PACKING_STOP_STREAK: usize = 500_000;
const VALIDATION_PROBES: u64 = 100_000;
const MAX_VALIDATION_ROUNDS: usize = 200;
const SAMPLE_BATCH: u64 = 8_192;

/// Fraction of the sphere within trace distance r of a fixed state.
fn trace_ball_measure(r: f64, d: usize) -> f64 {
    if d <= 1 {
        return 1.0;
    }
    let overlap_floor = 1.0 - (r * r / 4.0).min(1.0);
    // |⟨x|y⟩|² ~ Beta(1, d−1) for uniform x, so the tail is (1−c)^{d−1}.
    (1.0 - overlap_floor).powi(d as i32 - 1)
}

/// Membership structure for "is some kept point within trace distance δ".
///
/// For qubits the trace distance equals the Euclidean distance between Bloch
/// vectors, so a δ-sized grid over the Bloch ball answers queries from the
/// 27 neighbouring cells. Higher dimensions fall back to a flat scan over
/// packed amplitudes with early exit.
enum CoverIndex {
    Bloch {
        delta: f64,
        cells: std::collections::HashMap<(i32, i32, i32), Vec<u32>>,
        vectors: Vec<[f64; 3]>,
    },
    Dense {
        dim: usize,
        overlap_floor: f64,
        // Interleaved re/im amplitudes, 2·dim reals per point.
        amps: Vec<f64>,
        count: usize,
    },
}

fn bloch_vector(p: &PureState) -> [f64; 3] {
    let a = p.amplitude(0);
    let b = p.amplitude(1);
    let cross = a.conj() * b;
    [
        2.0 * cross.re,
        2.0 * cross.im,
        a.norm_sqr() - b.norm_sqr(),
    ]
}

impl CoverIndex {
    fn new(d: usize, delta: f64) -> Self {
        if d == 2 {
            CoverIndex::Bloch {
                delta,
                cells: std::collections::HashMap::new(),
                vectors: Vec::new(),
            }
        } else {
            CoverIndex::Dense {
                dim: d,
                overlap_floor: 1.0 - delta * delta / 4.0,
                amps: Vec::new(),
                count: 0,
            }
        }
    }

    fn covers(&self, p: &PureState) -> bool {
        match self {
            CoverIndex::Bloch {
                delta,
                cells,
                vectors,
            } => {
                let r = bloch_vector(p);
                let key = |v: f64| (v / delta).floor() as i32;
                let (cx, cy, cz) = (key(r[0]), key(r[1]), key(r[2]));
                let dd = delta * delta;
                for dx in -1..=1 {
                    for dy in -1..=1 {
                        for dz in -1..=1 {
                            if let Some(ids) = cells.get(&(cx + dx, cy + dy, cz + dz)) {
                                for &id in ids {
                                    let v = &vectors[id as usize];
                                    let dist = (r[0] - v[0]) * (r[0] - v[0])
                                        + (r[1] - v[1]) * (r[1] - v[1])
                                        + (r[2] - v[2]) * (r[2] - v[2]);
                                    if dist <= dd {
                                        return true;
                                    }
                                }
                            }
                        }
                    }
                }
                false
            }
            CoverIndex::Dense {
                dim,
                overlap_floor,
                amps,
                count,
            } => {
                let q = p.amplitudes();
                for k in 0..*count {
                    let base = 2 * dim * k;
                    let mut re = 0.0f64;
                    let mut im = 0.0f64;
                    for (j, a) in q.iter().enumerate() {
                        let pre = amps[base + 2 * j];
                        let pim = amps[base + 2 * j + 1];
                        // conj(point) · probe
                        re += pre * a.re + pim * a.im;
                        im += pre * a.im - pim * a.re;
                    }
                    if re * re + im * im >= *overlap_floor {
                        return true;
                    }
                }
                false
            }
        }
    }

    fn insert(&mut self, p: &PureState) {
        match self {
            CoverIndex::Bloch {
                delta,
                cells,
                vectors,
            } => {
                let r = bloch_vector(p);
                let key = |v: f64| (v / *delta).floor() as i32;
                let id = vectors.len() as u32;
                vectors.push(r);
                cells
                    .entry((key(r[0]), key(r[1]), key(r[2])))
                    .or_default()
                    .push(id);
            }
            CoverIndex::Dense {
                dim, amps, count, ..
            } => {
                debug_assert_eq!(p.dim(), *dim);
                for a in p.amplitudes() {
                    amps.push(a.re);
                    amps.push(a.im);
                }
                *count += 1;
            }
        }
    }
}

pub fn build_covering_net(d: usize, delta: f64, stream: &SeededStream) -> Result<EpsilonNet> {
    build_covering_net_with_budget(d, delta, COVERING_POINT_BUDGET, stream)
}

/// Covering net by maximal packing: uniform samples farther than δ from all
/// kept points are kept, until a long rejection streak; Monte Carlo
/// validation rounds then absorb any probe found outside coverage, and the
/// build ends on a clean 100k-probe round.
pub fn build_covering_net_with_budget(
    d: usize,
    delta: f64,
    budget: usize,
    stream: &SeededStream,
) -> Result<EpsilonNet> {
    if d == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    if !(delta > 0.0 && delta <= 2.0) {
        return Err(Error::Domain(format!(
            "covering radius must lie in (0, 2], got {delta}"
        )));
    }
    // Disjoint δ/2-balls bound the packing size; refuse hopeless requests.
    let ball = trace_ball_measure(delta / 2.0, d);
    let estimate = if ball > 0.0 { 1.0 / ball } else { f64::INFINITY };
    if !(estimate <= budget as f64) {
        return Err(Error::Resource(format!(
            "covering net at d={d}, delta={delta} needs an estimated {estimate:.3e} points, budget is {budget}"
        )));
    }

    let mut kept: Vec<PureState> = Vec::new();
    let mut index = CoverIndex::new(d, delta);
    let keep = |cand: PureState,
                    kept: &mut Vec<PureState>,
                    index: &mut CoverIndex|
     -> Result<()> {
        index.insert(&cand);
        kept.push(cand);
        if kept.len() > budget {
            return Err(Error::Resource(format!(
                "covering net at d={d}, delta={delta} exceeded the {budget}-point budget"
            )));
        }
        Ok(())
    };

    // Phase 1: greedy maximal packing. Candidates are sampled in parallel
    // batches but accepted in batch order, so the result is deterministic.
    let sample_stream = derive_stream(stream, 0);
    let mut streak = 0usize;
    let mut next_sample = 0u64;
    'packing: loop {
        let batch: Vec<PureState> = (0..SAMPLE_BATCH)
            .into_par_iter()
            .map(|k| {
                random_pure_state(d, &derive_stream(&sample_stream, next_sample + k)).expect("d > 0")
            })
            .collect();
        next_sample += SAMPLE_BATCH;
        for cand in batch {
            if index.covers(&cand) {
                streak += 1;
                if streak >= PACKING_STOP_STREAK {
                    break 'packing;
                }
            } else {
                streak = 0;
                keep(cand, &mut kept, &mut index)?;
            }
        }
    }

    // Phase 2: validation rounds; any uncovered probe joins the net. A round
    // with zero additions is the Monte Carlo coverage certificate.
    for round in 1..=MAX_VALIDATION_ROUNDS {
        let probe_stream = derive_stream(stream, round as u64);
        let mut added = 0usize;
        let mut offset = 0u64;
        while offset < VALIDATION_PROBES {
            let batch_len = SAMPLE_BATCH.min(VALIDATION_PROBES - offset);
            let probes: Vec<PureState> = (0..batch_len)
                .into_par_iter()
                .map(|i| {
                    random_pure_state(d, &derive_stream(&probe_stream, offset + i)).expect("d > 0")
                })
                .collect();
            offset += batch_len;
            for probe in probes {
                if !index.covers(&probe) {
                    added += 1;
                    keep(probe, &mut kept, &mut index)?;
                }
            }
        }
        if added == 0 {
            return EpsilonNet::new(d, delta, NetKind::Covering, 1.0, kept);
        }
    }
    Err(Error::Resource(format!(
        "covering net at d={d}, delta={delta} failed to stabilize after {MAX_VALIDATION_ROUNDS} validation rounds"
    )))
}

/// Shatter-function bound Σ_{j=0}^{vc} C(m, j) in exact integer arithmetic.
pub fn shatter_bound(vc_dim: u32, m: u32) -> Result<u128> {
    if vc_dim >= m {
        if m >= 128 {
            return Err(Error::Resource(format!(
                "2^{m} exceeds the 128-bit integer width"
            )));
        }
        return Ok(1u128 << m);
    }
    let mut total: u128 = 1; // j = 0 term
    let mut binom: u128 = 1;
    for j in 1..=vc_dim as u128 {
        binom = binom
            .checked_mul(m as u128 - j + 1)
            .ok_or_else(|| Error::Resource("binomial overflow beyond 128 bits".into()))?
            / j;
        total = total
            .checked_add(binom)
            .ok_or_else(|| Error::Resource("shatter bound overflow beyond 128 bits".into()))?;
    }
    Ok(total)
}

/// VC dimension together with its shatter-function bound table.
#[derive(Debug, Clone)]
pub struct SetSystemStats {
    pub vc_dim: u32,
    pub shatter_bounds: Vec<(u32, u128)>,
}

impl SetSystemStats {
    pub fn new(vc_dim: u32, max_m: u32) -> Result<Self> {
        let mut shatter_bounds = Vec::with_capacity(max_m as usize + 1);
        for m in 0..=max_m {
            shatter_bounds.push((m, shatter_bound(vc_dim, m)?));
        }
        Ok(Self {
            vc_dim,
            shatter_bounds,
        })
    }
}

/// Exact Binomial(t, ε) tail P[X ≥ ⌈tε/2⌉] and the ≥ 1/2 floor verdict.
pub fn chernoff_floor_check(t: u64, eps: f64) -> Result<(f64, bool)> {
    if t == 0 {
        return Err(Error::Domain("trial count must be positive".into()));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain(format!(
            "success probability must lie in (0, 1], got {eps}"
        )));
    }
    let k0 = (t as f64 * eps / 2.0).ceil() as u64;
    let probability = if k0 == 0 {
        1.0
    } else {
        let bin = Binomial::new(eps, t)
            .map_err(|e| Error::Domain(format!("binomial parameters rejected: {e}")))?;
        bin.sf(k0 - 1)
    };
    Ok((probability, probability >= 0.5))
}

const SHATTER_SEARCH_DIRECTIONS: u64 = 20_000;

/// Randomized probe of the cap VC dimension: over `samples` random m-point
/// configurations, the largest k such that some k-subset has every one of its
/// 2^k labelings realized by a cap. Caps are half-space sections, so for a
/// fixed direction u the realizable labelings are exactly the prefixes of the
/// points sorted by Re⟨u|x⟩; sweeping random directions accumulates them.
/// The result is a lower bound on the true VC dimension.
pub fn empirical_shatter_search(
    d: usize,
    m: usize,
    samples: u64,
    stream: &SeededStream,
) -> Result<u32> {
    if !(1..=2).contains(&d) || !(1..=6).contains(&m) {
        return Err(Error::Resource(format!(
            "shatter search budget covers d ≤ 2 and m ≤ 6, got d={d}, m={m}"
        )));
    }
    let best = (0..samples)
        .into_par_iter()
        .map(|k| {
            let config_stream = derive_stream(stream, k);
            let points: Vec<PureState> = (0..m as u64)
                .map(|i| random_pure_state(d, &derive_stream(&config_stream, i)).expect("d > 0"))
                .collect();
            largest_shattered_subset(&points, &derive_stream(&config_stream, m as u64))
        })
        .max()
        .unwrap_or(0);
    Ok(best)
}

fn largest_shattered_subset(points: &[PureState], dir_stream: &SeededStream) -> u32 {
    let m = points.len();
    let full_count = 1u64 << m;
    // Bitset over label masks realized by some cap.
    let mut realized: u64 = 0;
    let mut realized_count = 0u32;
    for j in 0..SHATTER_SEARCH_DIRECTIONS {
        let u = random_pure_state(points[0].dim(), &derive_stream(dir_stream, j)).expect("d > 0");
        let mut scored: Vec<(f64, usize)> = points
            .iter()
            .enumerate()
            .map(|(i, p)| (u.real_inner(p).expect("dims match"), i))
            .collect();
        scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        // Threshold sweep: realizable labelings for this direction are the
        // prefixes of the score order, from the empty set to the full set.
        let mut mask = 0u8;
        let record = |mask: u8, realized: &mut u64, count: &mut u32| {
            if *realized & (1u64 << mask) == 0 {
                *realized |= 1u64 << mask;
                *count += 1;
            }
        };
        record(mask, &mut realized, &mut realized_count);
        for &(_, idx) in &scored {
            mask |= 1 << idx;
            record(mask, &mut realized, &mut realized_count);
        }
        if u64::from(realized_count) == full_count {
            break;
        }
    }
    // Largest subset whose every labeling appears among the realized masks.
    for k in (1..=m as u32).rev() {
        for subset in 0u8..(1 << m) {
            if subset.count_ones() != k {
                continue;
            }
            let mut seen: u64 = 0;
            let mut seen_count = 0u32;
            let mut l = realized;
            while l != 0 {
                let mask = l.trailing_zeros() as u8;
                l &= l - 1;
                let pattern = mask & subset;
                if seen & (1u64 << pattern) == 0 {
                    seen |= 1u64 << pattern;
                    seen_count += 1;
                }
            }
            if seen_count == 1 << k {
                return k;
            }
        }
    }
    0
}
