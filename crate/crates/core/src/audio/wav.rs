//! RIFF/WAVE reader and 16-bit PCM writer.

use std::path::Path;

use super::{quantize_i16, AudioClip};

const FORMAT_PCM: u16 = 1;
const FORMAT_IEEE_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

#[derive(Debug, thiserror::Error)]
pub enum WavError {
    #[error("malformed WAV header: {0}")]
    MalformedHeader(String),
    #[error("unsupported WAV encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("truncated WAV data: chunk declares {declared} bytes, {available} available")]
    TruncatedData { declared: usize, available: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy)]
struct Format {
    tag: u16,
    channels: u16,
    sample_rate: u32,
    bits_per_sample: u16,
}

fn u16_at(bytes: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([bytes[at], bytes[at + 1]])
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]])
}

fn parse_format(body: &[u8]) -> Result<Format, WavError> {
    if body.len() < 16 {
        return Err(WavError::MalformedHeader(
            "fmt chunk shorter than 16 bytes".into(),
        ));
    }
    let mut tag = u16_at(body, 0);
    if tag == FORMAT_EXTENSIBLE {
        // cbSize(2) validBits(2) channelMask(4) then the subformat GUID,
        // whose first two bytes carry the real format tag.
        if body.len() < 40 {
            return Err(WavError::MalformedHeader(
                "extensible fmt chunk too short".into(),
            ));
        }
        tag = u16_at(body, 24);
    }
    let format = Format {
        tag,
        channels: u16_at(body, 2),
        sample_rate: u32_at(body, 4),
        bits_per_sample: u16_at(body, 14),
    };
    if format.channels == 0 {
        return Err(WavError::MalformedHeader("zero channels".into()));
    }
    if format.sample_rate == 0 {
        return Err(WavError::MalformedHeader("zero sample rate".into()));
    }
    match (format.tag, format.bits_per_sample) {
        (FORMAT_PCM, 16) | (FORMAT_IEEE_FLOAT, 32) => Ok(format),
        (FORMAT_PCM, bits) => Err(WavError::UnsupportedEncoding(format!(
            "{bits}-bit integer PCM"
        ))),
        (FORMAT_IEEE_FLOAT, bits) => {
            Err(WavError::UnsupportedEncoding(format!("{bits}-bit float")))
        }
        (tag, _) => Err(WavError::UnsupportedEncoding(format!(
            "format tag 0x{tag:04x} (compressed)"
        ))),
    }
}

/// Decodes a RIFF/WAVE byte buffer into a mono clip at its original rate.
pub fn decode_wav(bytes: &[u8]) -> Result<AudioClip, WavError> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(WavError::MalformedHeader("missing RIFF/WAVE magic".into()));
    }

    let mut format = None;
    let mut data = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let declared = u32_at(bytes, pos + 4) as usize;
        let body_start = pos + 8;
        let available = bytes.len() - body_start;
        if declared > available {
            return Err(WavError::TruncatedData {
                declared,
                available,
            });
        }
        let body = &bytes[body_start..body_start + declared];
        match id {
            b"fmt " => format = Some(parse_format(body)?),
            b"data" => {
                data = Some(body);
                if format.is_some() {
                    break;
                }
            }
            _ => {}
        }
        // chunks are word aligned
        pos = body_start + declared + (declared & 1);
    }

    let format = format.ok_or_else(|| WavError::MalformedHeader("missing fmt chunk".into()))?;
    let data = data.ok_or_else(|| WavError::MalformedHeader("missing data chunk".into()))?;

    let channels = format.channels as usize;
    let bytes_per_sample = format.bits_per_sample as usize / 8;
    let frame_bytes = channels * bytes_per_sample;
    let frames = data.len() / frame_bytes;

    let mut samples = Vec::with_capacity(frames);
    for frame in data.chunks_exact(frame_bytes) {
        let mut acc = 0.0f64;
        for ch in frame.chunks_exact(bytes_per_sample) {
            acc += match format.tag {
                FORMAT_PCM => i16::from_le_bytes([ch[0], ch[1]]) as f64 / 32768.0,
                _ => f32::from_le_bytes([ch[0], ch[1], ch[2], ch[3]]) as f64,
            };
        }
        samples.push((acc / channels as f64) as f32);
    }
    Ok(AudioClip::new(samples, format.sample_rate))
}

/// Encodes a clip as a canonical 44-byte-header, mono, 16-bit PCM WAV.
pub fn encode_wav(clip: &AudioClip) -> Vec<u8> {
    let data_len = clip.len() * 2;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&clip.sample_rate_hz().to_le_bytes());
    out.extend_from_slice(&(clip.sample_rate_hz() * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in clip.samples() {
        out.extend_from_slice(&quantize_i16(s).to_le_bytes());
    }
    out
}

pub fn read_wav_file(path: impl AsRef<Path>) -> Result<AudioClip, WavError> {
    decode_wav(&std::fs::read(path)?)
}

pub fn write_wav_file(path: impl AsRef<Path>, clip: &AudioClip) -> Result<(), WavError> {
    std::fs::write(path, encode_wav(clip))?;
    Ok(())
}
