#![allow(dead_code)]

use raibfd::{c64, CMat, CVec, ChannelSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> c64 {
    // Box–Muller, CN(0, 1).
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    c64::from_polar((-u1.ln()).sqrt(), 2.0 * std::f64::consts::PI * u2)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| gaussian(rng))
}

pub fn random_phases(rng: &mut ChaCha8Rng, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| {
        c64::from_polar(1.0, rng.random_range(0.0..2.0 * std::f64::consts::PI))
    })
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    let a = random_matrix(rng, n, n);
    (&a + a.adjoint()).scale(0.5)
}

/// Random semi-unitary `n × k` matrix via Gram–Schmidt.
pub fn random_semi_unitary(rng: &mut ChaCha8Rng, n: usize, k: usize) -> CMat {
    let mut q = CMat::zeros(n, k);
    let mut j = 0;
    while j < k {
        let mut v = random_vector(rng, n);
        for i in 0..j {
            let col = q.column(i).clone_owned();
            let proj = col.dotc(&v);
            v -= col * proj;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            q.set_column(j, &(v / c64::new(norm, 0.0)));
            j += 1;
        }
    }
    q
}

/// Unit-variance channels with the given dimensions and pathloss gains.
pub fn random_channels(
    rng: &mut ChaCha8Rng,
    m_t: usize,
    m_r: usize,
    m_ris: usize,
    k_u: usize,
    k_d: usize,
    scale: f64,
) -> ChannelSet {
    let s = c64::new(scale, 0.0);
    ChannelSet {
        h_br_bt: random_matrix(rng, m_r, m_t) * s,
        h_br_r: random_matrix(rng, m_r, m_ris) * s,
        h_r_bt: random_matrix(rng, m_ris, m_t) * s,
        h_ru: random_matrix(rng, m_ris, k_u),
        h_bru: random_matrix(rng, m_r, k_u),
        h_dr: random_matrix(rng, k_d, m_ris),
        h_dbt: random_matrix(rng, k_d, m_t),
        gamma_u: (0..k_u).map(|_| rng.random_range(0.5..2.0)).collect(),
        gamma_d: (0..k_d).map(|_| rng.random_range(0.5..2.0)).collect(),
    }
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}
