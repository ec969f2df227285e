//! Shared test oracles, kept independent of the library's numeric paths:
//! a cyclic Jacobi eigensolver for Hermitian matrices over plain vectors,
//! Kolmogorov-Smirnov machinery, and small statistics helpers.

use num_complex::Complex64;

pub type C64 = Complex64;

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations, ascending.
/// Operates on a plain row-major table so it shares nothing with the
/// library's eigensolver.
pub fn jacobi_eigenvalues(h: &[Vec<C64>]) -> Vec<f64> {
    let n = h.len();
    let mut a: Vec<Vec<C64>> = h.to_vec();
    for _sweep in 0..200 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p][q].norm_sqr();
            }
        }
        if off.sqrt() < 1e-13 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let g = a[p][q];
                if g.norm() < 1e-300 {
                    continue;
                }
                let alpha = a[p][p].re;
                let beta = a[q][q].re;
                let w = g / g.norm();
                let tau = (beta - alpha) / (2.0 * g.norm());
                let t = if tau == 0.0 {
                    1.0
                } else {
                    tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J differs from the identity in the (p, q) block:
                // J[p][p] = c, J[q][q] = c, J[p][q] = s·w, J[q][p] = −s·w̄.
                let jpq = w * s;
                let jqp = -w.conj() * s;
                // A ← J† A J, applied as column then row updates.
                for r in 0..n {
                    let arp = a[r][p];
                    let arq = a[r][q];
                    a[r][p] = arp * c + arq * jqp;
                    a[r][q] = arp * jpq + arq * c;
                }
                for col in 0..n {
                    let apc = a[p][col];
                    let aqc = a[q][col];
                    a[p][col] = apc * c + aqc * jqp.conj();
                    a[q][col] = apc * jpq.conj() + aqc * c;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i].re).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

/// One-sample KS statistic against U[0, 1].
pub fn ks_statistic_uniform(samples: &mut [f64]) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut d = 0.0f64;
    for (i, x) in samples.iter().enumerate() {
        let cdf = x.clamp(0.0, 1.0);
        let hi = (i as f64 + 1.0) / n - cdf;
        let lo = cdf - i as f64 / n;
        d = d.max(hi).max(lo);
    }
    d
}

/// One-sample KS acceptance threshold at significance 0.01.
pub fn ks_critical_one_sample(n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    1.62762 / (sn + 0.12 + 0.11 / sn)
}

/// Two-sample KS statistic and its 0.01-level critical value.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> (f64, f64) {
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (n, m) = (a.len(), b.len());
    let mut i = 0usize;
    let mut j = 0usize;
    let mut d = 0.0f64;
    while i < n && j < m {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        let fa = i as f64 / n as f64;
        let fb = j as f64 / m as f64;
        d = d.max((fa - fb).abs());
    }
    let critical = 1.62762 * ((n + m) as f64 / (n as f64 * m as f64)).sqrt();
    (d, critical)
}

/// Lag-1 autocorrelation.
pub fn lag1_autocorrelation(xs: &[f64]) -> f64 {
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    let cov: f64 = xs
        .windows(2)
        .map(|w| (w[0] - mean) * (w[1] - mean))
        .sum();
    cov / var
}

/// Sample mean and its standard error.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Exact mean reduced entropy of a uniform bipartite state in bits,
/// Σ_{k=max+1}^{mn} 1/k − (min−1)/(2·max), converted from nats.
pub fn page_average_bits(d_b: usize, d_e: usize) -> f64 {
    let small = d_b.min(d_e);
    let large = d_b.max(d_e);
    let mut nats = 0.0f64;
    for k in (large + 1)..=(small * large) {
        nats += 1.0 / k as f64;
    }
    nats -= (small as f64 - 1.0) / (2.0 * large as f64);
    nats / std::f64::consts::LN_2
}
