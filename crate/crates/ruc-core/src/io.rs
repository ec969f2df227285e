//! Net and channel files: line-oriented text with a key-value header and one
//! numeric record per line. Reals are rendered with 17 significant digits so
//! every f64 round-trips exactly.

use std::fs;
use std::path::Path;

use crate::channel::RandomUnitaryChannel;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, PureState, C64};
use crate::randgen::{SeededStream, Unitary};
use crate::spheregeo::{EpsilonNet, NetKind};

/// 17-significant-digit decimal rendering; parses back to the same f64.
pub fn f64_repr(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::Parse(format!("expected a real number, got '{s}'")))
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse::<usize>()
        .map_err(|_| Error::Parse(format!("expected a nonnegative integer, got '{s}'")))
}

fn parse_u64(s: &str) -> Result<u64> {
    s.parse::<u64>()
        .map_err(|_| Error::Parse(format!("expected a 64-bit integer, got '{s}'")))
}

fn expect_kv<'a>(line: Option<&'a str>, key: &str) -> Result<&'a str> {
    let line = line.ok_or_else(|| Error::Parse(format!("missing '{key}' line")))?;
    let (k, v) = line
        .split_once(" = ")
        .ok_or_else(|| Error::Parse(format!("malformed line '{line}'")))?;
    if k != key {
        return Err(Error::Parse(format!("expected key '{key}', got '{k}'")));
    }
    Ok(v)
}

fn amplitudes_line(amps: &[C64]) -> String {
    let mut parts = Vec::with_capacity(2 * amps.len());
    for a in amps {
        parts.push(f64_repr(a.re));
        parts.push(f64_repr(a.im));
    }
    parts.join(" ")
}

fn parse_amplitudes(line: &str, expected: usize) -> Result<Vec<C64>> {
    let values: Result<Vec<f64>> = line.split_whitespace().map(parse_f64).collect();
    let values = values?;
    if values.len() != 2 * expected {
        return Err(Error::Parse(format!(
            "expected {} interleaved reals, got {}",
            2 * expected,
            values.len()
        )));
    }
    Ok(values
        .chunks_exact(2)
        .map(|c| C64::new(c[0], c[1]))
        .collect())
}

/// Writes a net with its generating seed; one point per line as interleaved
/// real pairs.
pub fn write_net(net: &EpsilonNet, stream: &SeededStream, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str("ruc-net v1\n");
    out.push_str(&format!("dim = {}\n", net.dim()));
    out.push_str(&format!("epsilon = {}\n", f64_repr(net.epsilon())));
    out.push_str(&format!("kind = {}\n", net.kind().name()));
    out.push_str(&format!("constant_c = {}\n", f64_repr(net.constant_c())));
    out.push_str(&format!("seed = {}\n", stream.master_seed()));
    out.push_str(&format!("stream = {}\n", stream.stream_index()));
    out.push_str(&format!("points = {}\n", net.len()));
    for p in net.points() {
        out.push_str(&amplitudes_line(p.amplitudes()));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_net(path: &Path) -> Result<(EpsilonNet, SeededStream)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some("ruc-net v1") => {}
        other => {
            return Err(Error::Parse(format!(
                "not a net file: header {other:?}"
            )))
        }
    }
    let dim = parse_usize(expect_kv(lines.next(), "dim")?)?;
    let epsilon = parse_f64(expect_kv(lines.next(), "epsilon")?)?;
    let kind = NetKind::parse(expect_kv(lines.next(), "kind")?)?;
    let constant_c = parse_f64(expect_kv(lines.next(), "constant_c")?)?;
    let seed = parse_u64(expect_kv(lines.next(), "seed")?)?;
    let stream_index = parse_u64(expect_kv(lines.next(), "stream")?)?;
    let count = parse_usize(expect_kv(lines.next(), "points")?)?;
    let mut points = Vec::with_capacity(count);
    for i in 0..count {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("net file truncated at point {i}")))?;
        points.push(PureState::new(parse_amplitudes(line, dim)?)?);
    }
    if lines.next().is_some() {
        return Err(Error::Parse("trailing data after net points".into()));
    }
    let net = EpsilonNet::new(dim, epsilon, kind, constant_c, points)?;
    Ok((net, SeededStream::with_index(seed, stream_index)))
}

/// Writes a channel with its generating seed; one unitary per line in
/// row-major interleaved-real form.
pub fn write_channel(
    ch: &RandomUnitaryChannel,
    stream: &SeededStream,
    path: &Path,
) -> Result<()> {
    let mut out = String::new();
    out.push_str("ruc-channel v1\n");
    out.push_str(&format!("d_a = {}\n", ch.d_a()));
    out.push_str(&format!("d_e = {}\n", ch.d_e()));
    out.push_str(&format!("seed = {}\n", stream.master_seed()));
    out.push_str(&format!("stream = {}\n", stream.stream_index()));
    let weights: Vec<String> = ch.weights().iter().map(|w| f64_repr(*w)).collect();
    out.push_str(&format!("weights = {}\n", weights.join(" ")));
    for u in ch.unitaries() {
        out.push_str(&amplitudes_line(&u.matrix().row_major_entries()));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_channel(path: &Path) -> Result<(RandomUnitaryChannel, SeededStream)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some("ruc-channel v1") => {}
        other => {
            return Err(Error::Parse(format!(
                "not a channel file: header {other:?}"
            )))
        }
    }
    let d_a = parse_usize(expect_kv(lines.next(), "d_a")?)?;
    let d_e = parse_usize(expect_kv(lines.next(), "d_e")?)?;
    let seed = parse_u64(expect_kv(lines.next(), "seed")?)?;
    let stream_index = parse_u64(expect_kv(lines.next(), "stream")?)?;
    let weights: Result<Vec<f64>> = expect_kv(lines.next(), "weights")?
        .split_whitespace()
        .map(parse_f64)
        .collect();
    let weights = weights?;
    if weights.len() != d_e {
        return Err(Error::Parse(format!(
            "expected {d_e} weights, got {}",
            weights.len()
        )));
    }
    let mut unitaries = Vec::with_capacity(d_e);
    for i in 0..d_e {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("channel file truncated at unitary {i}")))?;
        let entries = parse_amplitudes(line, d_a * d_a)?;
        unitaries.push(Unitary::new(ComplexMatrix::from_row_major(d_a, d_a, entries)?)?);
    }
    if lines.next().is_some() {
        return Err(Error::Parse("trailing data after channel unitaries".into()));
    }
    let ch = RandomUnitaryChannel::new(unitaries, weights)?;
    Ok((ch, SeededStream::with_index(seed, stream_index)))
}
