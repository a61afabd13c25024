//! Ranking statistics reproduced from the published accuracy grid. Pure
//! functions only; nothing is trained here.

use afbench::experiment::{
    baseline_score, emit_report, format_2dp, fractional_rank, markdown_report, mean_rank, relative_improvement, RankReport,
    ResultTable,
};
use proptest::prelude::*;

const MEANS: &str = include_str!("fixtures/accuracy_means.csv");
const RANKS: &str = include_str!("fixtures/expected_ranks.csv");

fn means_table() -> ResultTable {
    ResultTable::from_means_csv(MEANS).unwrap()
}

#[test]
fn ranks_reproduce_published_grid() {
    let t = means_table();
    let published = ResultTable::from_means_csv(RANKS).unwrap();
    for c in 0..t.configs().len() {
        let ranks = fractional_rank(&t.config_means(c));
        assert_eq!(ranks, published.config_means(c), "config {}", t.configs()[c]);
        assert_eq!(ranks.iter().sum::<f64>(), 55.0);
    }
}

#[test]
fn dnn_5c_tie_gets_half_rank() {
    let t = means_table();
    let c = t.configs().iter().position(|c| c == "DNN-5C").unwrap();
    let ranks = fractional_rank(&t.config_means(c));
    assert_eq!(ranks, vec![7.0, 4.5, 10.0, 6.0, 1.0, 9.0, 8.0, 3.0, 4.5, 2.0]);
}

#[test]
fn mean_ranks_and_scores() {
    let t = means_table();
    let report = RankReport::compute(&t, "relu", Some("pfts")).unwrap();
    let shown: Vec<String> = report.mean_ranks.iter().map(|&m| format_2dp(m)).collect();
    assert_eq!(
        shown,
        ["6.88", "4.44", "9.38", "6.75", "2.38", "9.25", "7.13", "2.50", "4.06", "2.25"]
    );
    assert_eq!(report.best(&t), "pfts");
    assert_eq!(
        baseline_score(&t, "relu").unwrap(),
        vec![None, Some(7), Some(1), Some(4), Some(8), Some(0), Some(3), Some(8), Some(8), Some(8)]
    );
    let improvements: Vec<String> = report.improvement.unwrap().values.iter().map(|&v| format_2dp(v)).collect();
    // DNN-5A: (82.52 - 70.19) / 70.19 = 17.5666..%
    assert_eq!(improvements, ["0.31", "0.98", "2.16", "17.57", "1.35", "0.97", "39.99", "71.83"]);
}

#[test]
fn mean_rank_ignores_config_order() {
    let t = means_table();
    let mut ranks: Vec<Vec<f64>> = (0..8).map(|c| fractional_rank(&t.config_means(c))).collect();
    let forward = mean_rank(&ranks).unwrap();
    ranks.reverse();
    ranks.swap(1, 5);
    let shuffled = mean_rank(&ranks).unwrap();
    for (a, b) in forward.iter().zip(&shuffled) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn markdown_score_column() {
    let t = means_table();
    let report = RankReport::compute(&t, "relu", Some("pfts")).unwrap();
    let md = markdown_report(&t, &report);
    let section = md.split("## Fractional ranks").next().unwrap();
    let scores: Vec<&str> = section
        .lines()
        .filter(|l| l.starts_with("| ") && !l.starts_with("| Activation"))
        .map(|l| l.trim_end_matches(" |").rsplit("| ").next().unwrap())
        .collect();
    assert_eq!(scores, ["-", "7", "1", "4", "8", "0", "3", "8", "8", "8"]);
    assert!(md.contains("| PFTS | 3 | 2 | 2 | 3 | 3 | 2 | 1 | 2 | 2.25 |"), "{md}");
    assert!(md.contains("| Swish | 7 | 5 | 5 | 5 | 5 | 4.5 | 3 | 1 | 4.44 |"));
    assert!(md.contains("| 0.31 | 0.98 | 2.16 | 17.57 | 1.35 | 0.97 | 39.99 | 71.83 |"));
}

#[test]
fn emitted_files_are_deterministic() {
    let t = means_table();
    let report = RankReport::compute(&t, "relu", Some("pfts")).unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let pa = emit_report(&t, &report, a.path()).unwrap();
    let pb = emit_report(&t, &report, b.path()).unwrap();
    for (x, y) in [(pa.raw_csv, pb.raw_csv), (pa.summary_csv, pb.summary_csv), (pa.markdown, pb.markdown)] {
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
    }
    // summary.csv feeds back into the ranking input format
    let summary = std::fs::read_to_string(a.path().join("summary.csv")).unwrap();
    assert_eq!(ResultTable::from_means_csv(&summary).unwrap(), t);
}

proptest! {
    #[test]
    fn ranks_sum_to_triangular_number(values in proptest::collection::vec(0u8..20, 1..15)) {
        let v: Vec<f64> = values.iter().map(|&x| f64::from(x)).collect();
        let n = v.len() as f64;
        let ranks = fractional_rank(&v);
        prop_assert!((ranks.iter().sum::<f64>() - n * (n + 1.0) / 2.0).abs() < 1e-9);
        for i in 0..v.len() {
            for j in 0..v.len() {
                if v[i] > v[j] { prop_assert!(ranks[i] < ranks[j]); }
                if v[i] == v[j] { prop_assert_eq!(ranks[i], ranks[j]); }
            }
        }
    }

    #[test]
    fn improvement_sign_tracks_comparison(a in 0.1f64..100.0, b in 0.1f64..100.0) {
        let r = relative_improvement(a, b).unwrap();
        prop_assert_eq!(r > 0.0, a > b);
    }
}
