//! Constrained search that builds the bundled ratings fixture.
//!
//! For each (metric, agent) group the search finds a 50-value multiset of
//! integer scores 1..=7 whose mean and sample SD round to the published
//! two-decimal targets. Among the admissible sum-of-squares values it picks
//! the pair that brings t closest to the published t. Regenerate with
//! `cargo test --test ratings_fixture -- --ignored`.

use std::path::PathBuf;

use vtutor::stats::{read_ratings_csv, write_ratings_csv, Agent, Metric, RatingSample};

const N: i64 = 50;

/// (metric, mean A, sd A, mean B, sd B, published t)
const TARGETS: [(Metric, f64, f64, f64, f64, f64); 5] = [
    (Metric::GeneralPreference, 5.00, 1.75, 3.62, 1.51, 4.2218),
    (Metric::SyncAccuracy, 4.58, 1.82, 3.66, 1.49, 2.7642),
    (Metric::Naturalness, 4.12, 2.04, 3.10, 1.67, 2.7390),
    (Metric::EmotionalExpression, 4.38, 1.94, 3.30, 1.58, 3.0546),
    (Metric::VisualCoherence, 4.56, 1.64, 3.64, 1.63, 2.8142),
];

fn fixture_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/ratings.csv")
}

fn round2(x: f64) -> f64 {
    (x * 100.0 + 1e-9).round() / 100.0
}

fn sd_from(sum: i64, sumsq: i64) -> f64 {
    ((sumsq as f64 - (sum * sum) as f64 / N as f64) / (N - 1) as f64).sqrt()
}

/// Sum-of-squares values whose SD rounds to `sd`.
fn admissible_sumsq(sum: i64, sd: f64) -> Vec<i64> {
    (sum..=49 * N)
        .filter(|&q| round2(sd_from(sum, q)) == sd)
        .collect()
}

/// Counts of scores 1..=7 with the given size, sum and sum of squares.
fn counts_for(sum: i64, sumsq: i64) -> Option<[i64; 7]> {
    for c1 in 0..=N {
        for c2 in 0..=N - c1 {
            for c3 in 0..=N - c1 - c2 {
                for c4 in 0..=N - c1 - c2 - c3 {
                    for c5 in 0..=N - c1 - c2 - c3 - c4 {
                        let rest = N - c1 - c2 - c3 - c4 - c5;
                        let partial = c1 + 2 * c2 + 3 * c3 + 4 * c4 + 5 * c5;
                        // c6 + c7 = rest, 6 c6 + 7 c7 = sum - partial
                        let c7 = sum - partial - 6 * rest;
                        let c6 = rest - c7;
                        if c7 < 0 || c6 < 0 {
                            continue;
                        }
                        let q = c1 + 4 * c2 + 9 * c3 + 16 * c4 + 25 * c5 + 36 * c6 + 49 * c7;
                        if q == sumsq {
                            return Some([c1, c2, c3, c4, c5, c6, c7]);
                        }
                    }
                }
            }
        }
    }
    None
}

fn expand(counts: [i64; 7]) -> Vec<u8> {
    counts
        .iter()
        .enumerate()
        .flat_map(|(i, &c)| std::iter::repeat_n((i + 1) as u8, c as usize))
        .collect()
}

fn search() -> Vec<RatingSample> {
    let mut out = Vec::new();
    for (metric, ma, sa, mb, sb, t_pub) in TARGETS {
        let (sum_a, sum_b) = (
            (ma * N as f64).round() as i64,
            (mb * N as f64).round() as i64,
        );
        let mut best: Option<(f64, i64, i64)> = None;
        for qa in admissible_sumsq(sum_a, sa) {
            for qb in admissible_sumsq(sum_b, sb) {
                let (va, vb) = (sd_from(sum_a, qa).powi(2), sd_from(sum_b, qb).powi(2));
                let t = (sum_a - sum_b) as f64 / N as f64 / ((va + vb) / N as f64).sqrt();
                let err = (t - t_pub).abs();
                if best.is_none_or(|b| err < b.0) {
                    best = Some((err, qa, qb));
                }
            }
        }
        let (_, qa, qb) = best.expect("some admissible SD pair");
        let a = expand(counts_for(sum_a, qa).expect("multiset for agent A"));
        let b = expand(counts_for(sum_b, qb).expect("multiset for agent B"));
        for (agent, scores) in [(Agent::A, a), (Agent::B, b)] {
            for (i, s) in scores.into_iter().enumerate() {
                out.push(RatingSample::new(format!("P{:02}", i + 1), agent, metric, s).unwrap());
            }
        }
    }
    out
}

#[test]
#[ignore = "rewrites the committed fixture"]
fn regenerate_ratings_fixture() {
    let data = search();
    let file = std::fs::File::create(fixture_path()).unwrap();
    write_ratings_csv(file, &data).unwrap();
}

#[test]
fn committed_fixture_matches_search() {
    let committed = read_ratings_csv(std::fs::File::open(fixture_path()).unwrap()).unwrap();
    assert_eq!(committed, search());
}

#[test]
fn committed_fixture_hits_published_moments() {
    let data = read_ratings_csv(std::fs::File::open(fixture_path()).unwrap()).unwrap();
    for (metric, ma, sa, mb, sb, _) in TARGETS {
        for (agent, m, s) in [(Agent::A, ma, sa), (Agent::B, mb, sb)] {
            let xs: Vec<f64> = data
                .iter()
                .filter(|r| r.metric == metric && r.agent == agent)
                .map(|r| r.score as f64)
                .collect();
            assert_eq!(xs.len(), 50);
            let mean = xs.iter().sum::<f64>() / 50.0;
            let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 49.0).sqrt();
            assert_eq!(round2(mean), m, "{metric} {agent} mean");
            assert_eq!(round2(sd), s, "{metric} {agent} sd");
        }
    }
}
