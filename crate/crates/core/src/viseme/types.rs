use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::audio::NUM_COEFFS;

/// Mouth shape class. Declaration order is the tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Viseme {
    A,
    E,
    I,
    O,
    U,
    #[serde(rename = "SIL")]
    Sil,
}

impl Viseme {
    pub const ALL: [Viseme; 6] = [
        Viseme::A,
        Viseme::E,
        Viseme::I,
        Viseme::O,
        Viseme::U,
        Viseme::Sil,
    ];
    pub const VOWELS: [Viseme; 5] = [Viseme::A, Viseme::E, Viseme::I, Viseme::O, Viseme::U];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Viseme::A => "A",
            Viseme::E => "E",
            Viseme::I => "I",
            Viseme::O => "O",
            Viseme::U => "U",
            Viseme::Sil => "SIL",
        }
    }

    pub fn is_vowel(self) -> bool {
        self != Viseme::Sil
    }

    /// Maps a lowercase vowel letter to its viseme.
    pub fn from_vowel_letter(c: char) -> Option<Viseme> {
        match c {
            'a' => Some(Viseme::A),
            'e' => Some(Viseme::E),
            'i' => Some(Viseme::I),
            'o' => Some(Viseme::O),
            'u' => Some(Viseme::U),
            _ => None,
        }
    }
}

impl fmt::Display for Viseme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown viseme label {0:?}")]
pub struct UnknownViseme(pub String);

impl FromStr for Viseme {
    type Err = UnknownViseme;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Viseme::ALL
            .into_iter()
            .find(|v| v.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownViseme(s.to_string()))
    }
}

/// One weight per viseme, indexed in [`Viseme::ALL`] order.
///
/// Serialized as a JSON object keyed by label.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VisemeWeights(pub [f64; 6]);

impl VisemeWeights {
    pub fn one_hot(v: Viseme) -> Self {
        let mut w = [0.0; 6];
        w[v.index()] = 1.0;
        Self(w)
    }

    pub fn get(&self, v: Viseme) -> f64 {
        self.0[v.index()]
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Rescales to sum 1 and clamps each entry into [0, 1].
    pub fn normalized(&self) -> Self {
        let total = self.sum();
        if total > 0.0 && total.is_finite() {
            Self(self.0.map(|w| (w / total).clamp(0.0, 1.0)))
        } else {
            Self::one_hot(Viseme::Sil)
        }
    }

    /// Largest weight; ties resolve to the earliest label.
    pub fn dominant(&self) -> Viseme {
        let mut best = Viseme::A;
        for v in Viseme::ALL {
            if self.get(v) > self.get(best) {
                best = v;
            }
        }
        best
    }
}

impl Serialize for VisemeWeights {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let map: BTreeMap<Viseme, f64> =
            Viseme::ALL.into_iter().map(|v| (v, self.get(v))).collect();
        map.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for VisemeWeights {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let map = BTreeMap::<Viseme, f64>::deserialize(deserializer)?;
        let mut w = [0.0; 6];
        for (v, x) in map {
            w[v.index()] = x;
        }
        Ok(Self(w))
    }
}

/// Mean MFCC template for one vowel viseme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhonemeProfile {
    pub viseme: Viseme,
    pub mean_mfcc: [f64; NUM_COEFFS],
    pub sample_count: usize,
}

/// Mouth weights at one hop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisemeFrame {
    #[serde(rename = "t")]
    pub t_seconds: f64,
    pub weights: VisemeWeights,
    pub dominant: Viseme,
}

impl VisemeFrame {
    pub fn new(t_seconds: f64, weights: VisemeWeights) -> Self {
        Self {
            t_seconds,
            dominant: weights.dominant(),
            weights,
        }
    }
}

/// Smoothed per-hop viseme weights for a clip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisemeTimeline {
    #[serde(rename = "duration")]
    pub audio_duration_seconds: f64,
    #[serde(rename = "hop")]
    pub hop_seconds: f64,
    pub frames: Vec<VisemeFrame>,
}

impl VisemeTimeline {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("timeline is always representable")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn dominant_sequence(&self) -> Vec<Viseme> {
        self.frames.iter().map(|f| f.dominant).collect()
    }

    /// Dominant visemes as (label, run length) pairs.
    pub fn dominant_runs(&self) -> Vec<(Viseme, usize)> {
        let mut runs: Vec<(Viseme, usize)> = Vec::new();
        for f in &self.frames {
            match runs.last_mut() {
                Some((v, n)) if *v == f.dominant => *n += 1,
                _ => runs.push((f.dominant, 1)),
            }
        }
        runs
    }
}
