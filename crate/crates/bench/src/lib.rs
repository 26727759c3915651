//! Fixed receiver workloads for the criterion benches.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use satcdma_core::codes::{assign_codes, DEFAULT_PREFERRED_PAIR};
use satcdma_core::signal::{
    add_awgn, frame_len, generate_bit_frame, modulate_user, snr_to_sigma, superpose,
};
use satcdma_core::{ChannelEstimate, ChannelParams, SampledSignal, SpreadingCode, UserProfile};

/// One noisy received frame together with its true channel.
pub struct Scenario {
    pub codes: Vec<SpreadingCode>,
    pub received: SampledSignal,
    pub truth: ChannelEstimate,
    pub n_bits: usize,
}

impl Scenario {
    /// `k` equal-power users with evenly spread delays at 8 dB.
    pub fn new(k: usize, n_bits: usize, ns: usize) -> Self {
        let codes = assign_codes(DEFAULT_PREFERRED_PAIR, k).unwrap();
        let delays: Vec<usize> = (0..k).map(|u| u * 31 / k).collect();
        let amplitudes = vec![1.0; k];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let frame = generate_bit_frame(k, n_bits, &mut rng).unwrap();
        let len = frame_len(n_bits, codes[0].nc(), ns);
        let parts: Vec<_> = (0..k)
            .map(|u| {
                let p = UserProfile::new(u + 1, amplitudes[u], delays[u], &codes[u]).unwrap();
                modulate_user(&p, frame.row(u), ns, len).unwrap()
            })
            .collect();
        let sigma = snr_to_sigma(8.0, 1.0).unwrap();
        let received = add_awgn(
            &superpose(&parts).unwrap(),
            ChannelParams { sigma, seed: 11 },
        )
        .unwrap();
        Self {
            codes,
            received,
            truth: ChannelEstimate::new(amplitudes, delays).unwrap(),
            n_bits,
        }
    }
}
