use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{PhonemeProfile, Viseme, VisemeError};
use crate::audio::{analysis_frames, AudioClip, FrameSpec, MfccExtractor, MfccVector, NUM_COEFFS};

pub const DEFAULT_SILENCE_RMS_THRESHOLD: f64 = 0.01;

/// Fewest voiced frames a calibration clip must contribute.
pub const MIN_VOICED_FRAMES: usize = 5;

/// One template per vowel viseme plus the silence gate.
///
/// Validated on construction and on load; immutable afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCalibration")]
pub struct CalibrationSet {
    profiles: Vec<PhonemeProfile>,
    silence_rms_threshold: f64,
}

#[derive(Deserialize)]
struct RawCalibration {
    profiles: Vec<PhonemeProfile>,
    silence_rms_threshold: f64,
}

impl TryFrom<RawCalibration> for CalibrationSet {
    type Error = VisemeError;

    fn try_from(raw: RawCalibration) -> Result<Self, Self::Error> {
        CalibrationSet::new(raw.profiles, raw.silence_rms_threshold)
    }
}

impl CalibrationSet {
    pub fn new(
        mut profiles: Vec<PhonemeProfile>,
        silence_rms_threshold: f64,
    ) -> Result<Self, VisemeError> {
        if !(silence_rms_threshold > 0.0 && silence_rms_threshold.is_finite()) {
            return Err(VisemeError::InvalidCalibration(format!(
                "silence threshold must be positive, got {silence_rms_threshold}"
            )));
        }
        profiles.sort_by_key(|p| p.viseme);
        for p in &profiles {
            if !p.viseme.is_vowel() {
                return Err(VisemeError::InvalidCalibration(
                    "SIL cannot have a profile".into(),
                ));
            }
            if p.sample_count == 0 {
                return Err(VisemeError::InvalidCalibration(format!(
                    "profile {} has zero samples",
                    p.viseme
                )));
            }
            if p.mean_mfcc.iter().any(|c| !c.is_finite()) {
                return Err(VisemeError::InvalidCalibration(format!(
                    "profile {} has non-finite coefficients",
                    p.viseme
                )));
            }
        }
        if let Some(pair) = profiles.windows(2).find(|w| w[0].viseme == w[1].viseme) {
            return Err(VisemeError::InvalidCalibration(format!(
                "duplicate profile for {}",
                pair[0].viseme
            )));
        }
        for v in Viseme::VOWELS {
            if !profiles.iter().any(|p| p.viseme == v) {
                return Err(VisemeError::MissingViseme(v));
            }
        }
        Ok(Self {
            profiles,
            silence_rms_threshold,
        })
    }

    /// Profiles in A, E, I, O, U order.
    pub fn profiles(&self) -> &[PhonemeProfile] {
        &self.profiles
    }

    pub fn profile(&self, v: Viseme) -> Option<&PhonemeProfile> {
        self.profiles.iter().find(|p| p.viseme == v)
    }

    pub fn silence_rms_threshold(&self) -> f64 {
        self.silence_rms_threshold
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("calibration is always representable")
    }

    pub fn from_json(text: &str) -> Result<Self, VisemeError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, VisemeError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), VisemeError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// Learns per-vowel mean MFCC templates from one labeled clip each.
///
/// Only frames whose RMS reaches the silence threshold contribute. Entries
/// for [`Viseme::Sil`] are ignored.
pub fn calibrate(
    labeled_clips: &BTreeMap<Viseme, AudioClip>,
    silence_rms_threshold: f64,
) -> Result<CalibrationSet, VisemeError> {
    let extractor = MfccExtractor::new();
    let spec = FrameSpec::default();
    let mut profiles = Vec::with_capacity(Viseme::VOWELS.len());
    for v in Viseme::VOWELS {
        let clip = labeled_clips.get(&v).ok_or(VisemeError::MissingViseme(v))?;
        let clip = clip.to_canonical_rate();
        let features = analysis_frames(&clip, &spec)
            .into_iter()
            .map(|frame| extractor.compute(&frame.samples, 0.0));
        profiles.push(profile_from_features(v, features, silence_rms_threshold)?);
    }
    CalibrationSet::new(profiles, silence_rms_threshold)
}

/// Running mean of the voiced features. Identical inputs average to themselves exactly.
pub fn profile_from_features(
    viseme: Viseme,
    features: impl Iterator<Item = MfccVector>,
    silence_rms_threshold: f64,
) -> Result<PhonemeProfile, VisemeError> {
    let mut mean = [0.0; NUM_COEFFS];
    let mut voiced = 0usize;
    for mfcc in features.filter(|m| m.frame_rms >= silence_rms_threshold) {
        voiced += 1;
        for (m, c) in mean.iter_mut().zip(&mfcc.coefficients) {
            *m += (c - *m) / voiced as f64;
        }
    }
    if voiced < MIN_VOICED_FRAMES {
        return Err(VisemeError::InsufficientVoicedFrames { viseme, voiced });
    }
    Ok(PhonemeProfile {
        viseme,
        mean_mfcc: mean,
        sample_count: voiced,
    })
}
