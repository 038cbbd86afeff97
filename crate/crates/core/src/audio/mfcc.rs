use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::CANONICAL_RATE_HZ;

pub const FFT_SIZE: usize = 512;
pub const MEL_FILTERS: usize = 26;
pub const NUM_COEFFS: usize = 12;
pub const LOG_FLOOR: f64 = 1e-10;

/// Cepstral feature of one frame. `coefficients` are c1..c12.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MfccVector {
    pub coefficients: [f64; NUM_COEFFS],
    /// RMS of the windowed frame, full-scale units.
    pub frame_rms: f64,
    pub t_start_seconds: f64,
}

impl MfccVector {
    pub fn distance(&self, other: &[f64; NUM_COEFFS]) -> f64 {
        self.coefficients
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

struct MelFilter {
    first_bin: usize,
    weights: Vec<f64>,
}

/// Precomputed transform plan, filterbank and DCT basis. Immutable and shareable.
pub struct MfccExtractor {
    fft: Arc<dyn Fft<f64>>,
    filters: Vec<MelFilter>,
    dct: [[f64; MEL_FILTERS]; NUM_COEFFS],
}

impl std::fmt::Debug for MfccExtractor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MfccExtractor").finish_non_exhaustive()
    }
}

impl Default for MfccExtractor {
    fn default() -> Self {
        Self::new()
    }
}

impl MfccExtractor {
    pub fn new() -> Self {
        let fft = FftPlanner::new().plan_fft_forward(FFT_SIZE);

        let sample_rate = CANONICAL_RATE_HZ as f64;
        let top_mel = hz_to_mel(sample_rate / 2.0);
        let edges: Vec<f64> = (0..MEL_FILTERS + 2)
            .map(|i| mel_to_hz(top_mel * i as f64 / (MEL_FILTERS + 1) as f64))
            .collect();
        let bin_hz = sample_rate / FFT_SIZE as f64;
        let filters = (0..MEL_FILTERS)
            .map(|m| {
                let (lo, center, hi) = (edges[m], edges[m + 1], edges[m + 2]);
                let mut first_bin = None;
                let mut weights = Vec::new();
                for k in 0..=FFT_SIZE / 2 {
                    let f = k as f64 * bin_hz;
                    let w = if f > lo && f <= center {
                        (f - lo) / (center - lo)
                    } else if f > center && f < hi {
                        (hi - f) / (hi - center)
                    } else {
                        0.0
                    };
                    if w > 0.0 {
                        first_bin.get_or_insert(k);
                        weights.push(w);
                    } else if first_bin.is_some() {
                        break;
                    }
                }
                MelFilter {
                    first_bin: first_bin.unwrap_or(0),
                    weights,
                }
            })
            .collect();

        let mut dct = [[0.0; MEL_FILTERS]; NUM_COEFFS];
        for (row, k) in dct.iter_mut().zip(1..=NUM_COEFFS) {
            for (m, cell) in row.iter_mut().enumerate() {
                *cell = (PI * k as f64 * (m as f64 + 0.5) / MEL_FILTERS as f64).cos();
            }
        }

        Self { fft, filters, dct }
    }

    /// One-sided power spectrum |X_k|^2, k = 0..=256, of the zero-padded frame.
    pub fn power_spectrum(&self, frame: &[f64]) -> Vec<f64> {
        assert!(frame.len() <= FFT_SIZE, "frame longer than the transform");
        let mut buf: Vec<Complex<f64>> = frame
            .iter()
            .map(|&x| Complex::new(x, 0.0))
            .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
            .take(FFT_SIZE)
            .collect();
        self.fft.process(&mut buf);
        buf[..=FFT_SIZE / 2].iter().map(|c| c.norm_sqr()).collect()
    }

    /// Natural-log mel filter energies, floored at [`LOG_FLOOR`].
    pub fn log_mel_energies(&self, frame: &[f64]) -> [f64; MEL_FILTERS] {
        let power = self.power_spectrum(frame);
        let mut out = [0.0; MEL_FILTERS];
        for (slot, filter) in out.iter_mut().zip(&self.filters) {
            let energy: f64 = filter
                .weights
                .iter()
                .zip(&power[filter.first_bin..])
                .map(|(w, p)| w * p)
                .sum();
            *slot = energy.max(LOG_FLOOR).ln();
        }
        out
    }

    pub fn compute(&self, frame: &[f64], t_start_seconds: f64) -> MfccVector {
        let log_energies = self.log_mel_energies(frame);
        // A constant offset only moves c0, which is discarded. Subtracting
        // one of the energies makes a flat log spectrum map to exact zeros.
        let reference = log_energies[0];
        let centered = log_energies.map(|e| e - reference);
        let mut coefficients = [0.0; NUM_COEFFS];
        for (c, row) in coefficients.iter_mut().zip(&self.dct) {
            *c = row.iter().zip(&centered).map(|(b, e)| b * e).sum();
        }
        let frame_rms = if frame.is_empty() {
            0.0
        } else {
            (frame.iter().map(|x| x * x).sum::<f64>() / frame.len() as f64).sqrt()
        };
        MfccVector {
            coefficients,
            frame_rms,
            t_start_seconds,
        }
    }
}

fn shared() -> &'static Arc<MfccExtractor> {
    static EXTRACTOR: OnceLock<Arc<MfccExtractor>> = OnceLock::new();
    EXTRACTOR.get_or_init(|| Arc::new(MfccExtractor::new()))
}

/// Process-wide extractor; the plan and filterbank are built once.
pub fn shared_extractor() -> Arc<MfccExtractor> {
    shared().clone()
}

/// MFCC of one windowed, pre-emphasized frame using the shared extractor.
pub fn compute_mfcc(frame: &[f64]) -> MfccVector {
    shared().compute(frame, 0.0)
}

pub fn power_spectrum(frame: &[f64]) -> Vec<f64> {
    shared().power_spectrum(frame)
}
