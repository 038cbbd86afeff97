//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Textbook MFCC c1..c12 by direct summation: O(N²) DFT of the frame
/// zero-padded to 512, triangular mel filters evaluated per bin from the
/// mel formula, natural log with floor 1e-10, unnormalized DCT-II.
pub fn oracle_mfcc(frame: &[f64]) -> [f64; 12] {
    const N: usize = 512;
    const FS: f64 = 16_000.0;
    let mut power = vec![0.0; N / 2 + 1];
    for (k, p) in power.iter_mut().enumerate() {
        let (mut re, mut im) = (0.0, 0.0);
        for (n, x) in frame.iter().enumerate() {
            let phase = -2.0 * PI * (k * n) as f64 / N as f64;
            re += x * phase.cos();
            im += x * phase.sin();
        }
        *p = re * re + im * im;
    }
    let mel = |f: f64| 2595.0 * (1.0 + f / 700.0).log10();
    let inv = |m: f64| 700.0 * (10f64.powf(m / 2595.0) - 1.0);
    let top = mel(FS / 2.0);
    let mut log_e = [0.0; 26];
    for (m, slot) in log_e.iter_mut().enumerate() {
        let lo = inv(top * m as f64 / 27.0);
        let c = inv(top * (m + 1) as f64 / 27.0);
        let hi = inv(top * (m + 2) as f64 / 27.0);
        let mut e = 0.0;
        for (k, p) in power.iter().enumerate() {
            let f = k as f64 * FS / N as f64;
            let w = if f > lo && f <= c {
                (f - lo) / (c - lo)
            } else if f > c && f < hi {
                (hi - f) / (hi - c)
            } else {
                0.0
            };
            e += w * p;
        }
        *slot = e.max(1e-10).ln();
    }
    let mut out = [0.0; 12];
    for (i, c) in out.iter_mut().enumerate() {
        let k = (i + 1) as f64;
        *c = (0..26)
            .map(|m| log_e[m] * (PI * k * (m as f64 + 0.5) / 26.0).cos())
            .sum();
    }
    out
}

/// Hamming window from its formula.
pub fn hamming(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.54 - 0.46 * (2.0 * PI * i as f64 / (n - 1) as f64).cos())
        .collect()
}

/// `count` windowed frames of uniform noise, reproducible from `seed`.
pub fn random_frames(seed: u64, count: usize) -> Vec<Vec<f64>> {
    let mut rng = StdRng::seed_from_u64(seed);
    let w = hamming(400);
    (0..count)
        .map(|_| {
            let gain = rng.random_range(0.05..1.0);
            w.iter()
                .map(|wi| wi * gain * rng.random_range(-1.0..1.0))
                .collect()
        })
        .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub mod wire_samples;
pub mod ws;

/// HTTP TTS stand-in that answers every POST with `wav` after `delay`.
pub fn slow_tts_service(wav: Vec<u8>, delay: std::time::Duration) -> String {
    use std::io::{BufRead, BufReader, Read, Write};
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/tts", listener.local_addr().unwrap());
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { break };
            let wav = wav.clone();
            std::thread::spawn(move || {
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut len = 0usize;
                loop {
                    let mut line = String::new();
                    if reader.read_line(&mut line).unwrap_or(0) == 0 {
                        return;
                    }
                    let line = line.trim_end().to_ascii_lowercase();
                    if line.is_empty() {
                        break;
                    }
                    if let Some(v) = line.strip_prefix("content-length:") {
                        len = v.trim().parse().unwrap();
                    }
                }
                let mut body = vec![0; len];
                let _ = reader.read_exact(&mut body);
                std::thread::sleep(delay);
                let head = format!(
                    "HTTP/1.1 200 OK\r\ncontent-type: audio/wav\r\ncontent-length: {}\r\nconnection: close\r\n\r\n",
                    wav.len()
                );
                let _ = stream.write_all(head.as_bytes());
                let _ = stream.write_all(&wav);
            });
        }
    });
    url
}
