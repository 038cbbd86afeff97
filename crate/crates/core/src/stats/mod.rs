//! Recomputes the user-study statistics from raw 1–7 ratings: per-metric
//! independent-samples t-tests with Cohen's d, and the preference
//! chi-square with Cramér's V.

pub mod special;
mod table;

pub use special::{
    chi_square_upper, ln_gamma, regularized_beta, regularized_gamma_q, student_t_two_tailed,
};
pub use table::{read_ratings_csv, reproduce_table, write_ratings_csv, MetricRow, TableReport};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum StatsError {
    #[error("each group needs at least 2 values (got {0} and {1})")]
    TooFewSamples(usize, usize),
    #[error("both groups have zero variance; t is undefined")]
    DegenerateVariance,
    #[error("no ratings for metric {metric} from agent {agent}")]
    MissingMetric { metric: Metric, agent: Agent },
    #[error("score {0} outside 1..=7")]
    ScoreOutOfRange(u8),
    #[error("preference counts must sum to at least 1")]
    EmptyPreference,
    #[error("ratings CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("ratings CSV line {line}: {message}")]
    BadRecord { line: u64, message: String },
}

/// The two rated agents: A is the lightweight avatar, B the video baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Agent {
    A,
    B,
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Agent::A => "A",
            Agent::B => "B",
        })
    }
}

impl FromStr for Agent {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "A" | "a" => Ok(Agent::A),
            "B" | "b" => Ok(Agent::B),
            other => Err(format!("unknown agent {other:?}")),
        }
    }
}

/// The five rated dimensions, in table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    GeneralPreference,
    SyncAccuracy,
    Naturalness,
    EmotionalExpression,
    VisualCoherence,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::GeneralPreference,
        Metric::SyncAccuracy,
        Metric::Naturalness,
        Metric::EmotionalExpression,
        Metric::VisualCoherence,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Metric::GeneralPreference => "general_preference",
            Metric::SyncAccuracy => "sync_accuracy",
            Metric::Naturalness => "naturalness",
            Metric::EmotionalExpression => "emotional_expression",
            Metric::VisualCoherence => "visual_coherence",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Metric::GeneralPreference => "General Preference Score",
            Metric::SyncAccuracy => "Sync Accuracy",
            Metric::Naturalness => "Naturalness",
            Metric::EmotionalExpression => "Emotional Expression",
            Metric::VisualCoherence => "Visual Coherence",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.key() == s.trim())
            .ok_or_else(|| format!("unknown metric {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingSample {
    pub participant_id: String,
    pub agent: Agent,
    pub metric: Metric,
    pub score: u8,
}

impl RatingSample {
    pub fn new(
        participant_id: impl Into<String>,
        agent: Agent,
        metric: Metric,
        score: u8,
    ) -> Result<Self, StatsError> {
        if !(1..=7).contains(&score) {
            return Err(StatsError::ScoreOutOfRange(score));
        }
        Ok(Self {
            participant_id: participant_id.into(),
            agent,
            metric,
            score,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub mean_1: f64,
    pub sd_1: f64,
    pub n_1: usize,
    pub mean_2: f64,
    pub sd_2: f64,
    pub n_2: usize,
    pub t: f64,
    /// Welch–Satterthwaite degrees of freedom used for `p`.
    pub df: f64,
    /// Two-tailed.
    pub p: f64,
    pub cohens_d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub observed: [u64; 2],
    pub chi2: f64,
    pub df: u32,
    pub p: f64,
    pub cramers_v: f64,
    pub n: u64,
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Unequal-variance t statistic with Welch df for the two-tailed p.
///
/// Cohen's d uses the root mean of the two variances for equal group sizes
/// and the (n-1)-weighted pooled SD otherwise.
pub fn independent_t_test(group1: &[f64], group2: &[f64]) -> Result<TTestResult, StatsError> {
    let (n1, n2) = (group1.len(), group2.len());
    if n1 < 2 || n2 < 2 {
        return Err(StatsError::TooFewSamples(n1, n2));
    }
    let (m1, s1) = mean_sd(group1);
    let (m2, s2) = mean_sd(group2);
    if s1 == 0.0 && s2 == 0.0 {
        return Err(StatsError::DegenerateVariance);
    }
    let (v1, v2) = (s1 * s1 / n1 as f64, s2 * s2 / n2 as f64);
    let t = (m1 - m2) / (v1 + v2).sqrt();
    let df = (v1 + v2).powi(2) / (v1 * v1 / (n1 as f64 - 1.0) + v2 * v2 / (n2 as f64 - 1.0));
    let spread = if n1 == n2 {
        ((s1 * s1 + s2 * s2) / 2.0).sqrt()
    } else {
        (((n1 - 1) as f64 * s1 * s1 + (n2 - 1) as f64 * s2 * s2) / (n1 + n2 - 2) as f64).sqrt()
    };
    Ok(TTestResult {
        mean_1: m1,
        sd_1: s1,
        n_1: n1,
        mean_2: m2,
        sd_2: s2,
        n_2: n2,
        t,
        df,
        p: student_t_two_tailed(t, df),
        cohens_d: (m1 - m2) / spread,
    })
}

/// Goodness of fit of two counts against an even split, no continuity correction.
pub fn preference_chi_square(count_a: u64, count_b: u64) -> Result<ChiSquareResult, StatsError> {
    let n = count_a + count_b;
    if n == 0 {
        return Err(StatsError::EmptyPreference);
    }
    // sum over both cells of (o - n/2)^2 / (n/2) reduces to (a - b)^2 / n
    let diff = count_a.abs_diff(count_b) as f64;
    let chi2 = diff * diff / n as f64;
    Ok(ChiSquareResult {
        observed: [count_a, count_b],
        chi2,
        df: 1,
        p: chi_square_upper(chi2, 1.0),
        cramers_v: (chi2 / n as f64).sqrt(),
        n,
    })
}
