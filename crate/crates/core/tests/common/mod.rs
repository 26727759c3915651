//! Scenario builders shared by the integration test targets.

#![allow(dead_code)]

use rand::seq::index::sample;
use rand::Rng;
use satcdma_core::codes::{
    assign_codes, build_signature, generate_gold_family, DEFAULT_PREFERRED_PAIR,
};
use satcdma_core::signal::{frame_len, modulate_user, superpose};
use satcdma_core::{BitFrame, SampledSignal, SpreadingCode, UserProfile};

pub const NC: usize = 32;

/// `k` distinct members of the default Gold family in random order.
pub fn random_codes<R: Rng>(rng: &mut R, k: usize) -> Vec<SpreadingCode> {
    let family = generate_gold_family(DEFAULT_PREFERRED_PAIR).unwrap();
    sample(rng, family.len(), k)
        .into_iter()
        .map(|j| build_signature(&family[j]).unwrap())
        .collect()
}

pub fn default_codes(k: usize) -> Vec<SpreadingCode> {
    assign_codes(DEFAULT_PREFERRED_PAIR, k).unwrap()
}

/// Sorted distinct chip delays in `[0, NC)`; the first is shifted to zero
/// when `anchored`.
pub fn random_delays<R: Rng>(rng: &mut R, k: usize, anchored: bool) -> Vec<usize> {
    let mut d = sample(rng, NC, k).into_vec();
    d.sort_unstable();
    if anchored {
        let first = d[0];
        d.iter_mut().for_each(|x| *x -= first);
    }
    d
}

/// Amplitudes uniform in `[lo, hi]`, strongest first.
pub fn random_amplitudes<R: Rng>(rng: &mut R, k: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut a: Vec<f64> = (0..k).map(|_| rng.random_range(lo..=hi)).collect();
    a.sort_by(|x, y| y.total_cmp(x));
    a
}

/// Uniform `±1` bits with no pilot constraint.
pub fn random_bits<R: Rng>(rng: &mut R, k: usize, n: usize) -> BitFrame {
    let rows = (0..k)
        .map(|_| {
            (0..n)
                .map(|_| if rng.random::<bool>() { 1 } else { -1 })
                .collect()
        })
        .collect();
    BitFrame::unpiloted(rows).unwrap()
}

/// Noiseless superposition of every user's modulated bits.
pub fn synthesize(
    codes: &[SpreadingCode],
    amplitudes: &[f64],
    delays: &[usize],
    frame: &BitFrame,
    ns: usize,
) -> SampledSignal {
    let len = frame_len(frame.n_bits(), NC, ns);
    let parts: Vec<_> = (0..codes.len())
        .map(|k| {
            let p = UserProfile::new(k + 1, amplitudes[k], delays[k], &codes[k]).unwrap();
            modulate_user(&p, frame.row(k), ns, len).unwrap()
        })
        .collect();
    superpose(&parts).unwrap()
}

/// `sum_t s_l(t - tau_l) s_k(t - lag Tb - tau_k)` evaluated chip by chip on
/// an explicit timeline.
pub fn brute_force_correlation(
    codes: &[SpreadingCode],
    delays: &[usize],
    lag: i64,
    k: usize,
    l: usize,
) -> f64 {
    let span = 6 * NC as i64;
    let origin = 2 * NC as i64;
    let place = |code: &SpreadingCode, start: i64| {
        let mut line = vec![0.0; span as usize];
        for (m, &c) in code.chips().iter().enumerate() {
            line[(origin + start + m as i64) as usize] = c;
        }
        line
    };
    let a = place(&codes[l], delays[l] as i64);
    let b = place(&codes[k], lag * NC as i64 + delays[k] as i64);
    a.iter().zip(&b).map(|(x, y)| x * y).sum()
}
