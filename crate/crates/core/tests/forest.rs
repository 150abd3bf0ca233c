//! Random forest and cross-validation properties on synthetic data.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use studiomap::forest::{
    confusion_csv, cross_validate, predict, train_forest, CvMode, Forest, ForestConfig, Node,
};

type Row = [f64; 4];

fn uniform(rng: &mut ChaCha8Rng, n: usize) -> Vec<Row> {
    (0..n)
        .map(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0)))
        .collect()
}

fn separable(seed: u64, n: usize) -> (Vec<Row>, Vec<&'static str>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = uniform(&mut rng, n);
    let y = x
        .iter()
        .map(|v| if v[1] > 0.1 { "techno" } else { "house" })
        .collect();
    (x, y)
}

fn cfg(trees: usize, folds: usize) -> ForestConfig {
    ForestConfig {
        n_trees: trees,
        cv_folds: folds,
        seed: 7,
        ..ForestConfig::default()
    }
}

#[test]
fn separable_threshold_is_learned() {
    let (x, y) = separable(1, 400);
    let (report, warnings) = cross_validate(&x, &y, &cfg(30, 10)).unwrap();
    assert!(warnings.is_empty());
    assert!(report.accuracy.mean >= 0.98, "{:?}", report.accuracy);
    assert!(report.train_accuracy.mean >= 0.999);
    let forest = train_forest(&x, &y, &cfg(30, 10)).unwrap();
    let train_acc = predict(&forest, &x)
        .iter()
        .zip(&y)
        .filter(|(p, l)| p.label == **l)
        .count() as f64
        / x.len() as f64;
    assert_eq!(train_acc, 1.0);
}

#[test]
fn shuffled_labels_score_at_chance() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let x = uniform(&mut rng, 1800);
    let styles = ["a", "b", "c", "d", "e", "f", "g", "h", "i"];
    let mut y: Vec<&str> = (0..1800).map(|i| styles[i % 9]).collect();
    y.shuffle(&mut rng);
    let (report, _) = cross_validate(&x, &y, &cfg(100, 10)).unwrap();
    let chance = 1.0 / 9.0;
    assert!(
        (report.accuracy.mean - chance).abs() <= 0.04,
        "{:?}",
        report.accuracy
    );
}

#[test]
fn positive_scaling_leaves_predictions_unchanged() {
    let (x, y) = separable(3, 300);
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let test = uniform(&mut rng, 500);
    let base = train_forest(&x, &y, &cfg(25, 10)).unwrap();
    for c in [2.0, 0.25, 3.7] {
        let sx: Vec<Row> = x.iter().map(|v| v.map(|e| e * c)).collect();
        let st: Vec<Row> = test.iter().map(|v| v.map(|e| e * c)).collect();
        let scaled = train_forest(&sx, &y, &cfg(25, 10)).unwrap();
        let a: Vec<String> = predict(&base, &test).into_iter().map(|p| p.label).collect();
        let b: Vec<String> = predict(&scaled, &st).into_iter().map(|p| p.label).collect();
        assert_eq!(a, b, "scale {c}");
    }
}

/// Walks every tree by hand and counts votes per label.
fn recount(forest: &Forest, v: &Row) -> (String, Vec<f64>) {
    let mut votes = vec![0usize; forest.classes.len()];
    for tree in &forest.trees {
        let mut node = &tree.nodes[0];
        let class = loop {
            match node {
                Node::Leaf { class } => break *class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if v[*feature] > *threshold {
                        &tree.nodes[*right]
                    } else {
                        &tree.nodes[*left]
                    }
                }
            }
        };
        votes[class] += 1;
    }
    let top = *votes.iter().max().unwrap();
    // lexicographically first label among the leaders
    let label = forest
        .classes
        .iter()
        .zip(&votes)
        .filter(|(_, &c)| c == top)
        .map(|(l, _)| l.clone())
        .min()
        .unwrap();
    let n = forest.trees.len() as f64;
    (label, votes.iter().map(|&c| c as f64 / n).collect())
}

#[test]
fn predictions_match_vote_recount() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x = uniform(&mut rng, 300);
    let y: Vec<&str> = x
        .iter()
        .map(|v| match (v[0] > 0.0, v[2] > 0.3) {
            (true, true) => "acid",
            (true, false) => "house",
            (false, _) if rng.random_bool(0.3) => "trance",
            _ => "techno",
        })
        .collect();
    // an even number of trees makes vote ties possible
    let forest = train_forest(&x, &y, &cfg(10, 10)).unwrap();
    let queries = uniform(&mut rng, 1000);
    for (q, p) in queries.iter().zip(predict(&forest, &queries)) {
        let (label, votes) = recount(&forest, q);
        assert_eq!(p.label, label);
        assert_eq!(p.votes, votes);
    }
}

#[test]
fn confusion_rows_are_percentages() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = uniform(&mut rng, 450);
    let y: Vec<String> = x
        .iter()
        .map(|v| {
            format!(
                "s{}",
                ((v[0] + 1.0) * 1.5) as usize + usize::from(rng.random_bool(0.2))
            )
        })
        .collect();
    for mode in [CvMode::KFold, CvMode::Repeated] {
        let config = ForestConfig {
            cv_mode: mode,
            ..cfg(20, 10)
        };
        let (r, _) = cross_validate(&x, &y, &config).unwrap();
        let total: usize = r.confusion_counts.iter().flatten().sum();
        if mode == CvMode::KFold {
            assert_eq!(total, x.len());
        }
        for row in &r.confusion_percent {
            assert!((row.iter().sum::<f64>() - 100.0).abs() < 1e-9);
        }
        let trace: usize = (0..r.classes.len()).map(|c| r.confusion_counts[c][c]).sum();
        assert_eq!(r.pooled_accuracy, trace as f64 / total as f64);
        let macro_recall: f64 = (0..r.classes.len())
            .map(|c| r.confusion_counts[c][c] as f64 / r.confusion_counts[c].iter().sum::<usize>() as f64)
            .sum::<f64>()
            / r.classes.len() as f64;
        let mean_recall = r.per_class_recall.iter().sum::<f64>() / r.classes.len() as f64;
        assert!((macro_recall - mean_recall).abs() < 1e-9);

        let csv = confusion_csv(&r).unwrap();
        for line in csv.lines().skip(1) {
            let tenths: i64 = line
                .split(',')
                .skip(1)
                .map(|v| (v.parse::<f64>().unwrap() * 10.0).round() as i64)
                .sum();
            assert_eq!(tenths, 1000, "{line}");
        }
    }
}

#[test]
fn evaluation_is_deterministic_across_thread_counts() {
    let (x, y) = separable(6, 200);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| cross_validate(&x, &y, &cfg(15, 5)).unwrap().0)
    };
    let a = run(1);
    assert_eq!(a, run(4));
    assert_eq!(a, run(1));
}

#[test]
fn small_classes_warn_for_many_folds() {
    let (x, mut y) = separable(8, 200);
    y[0] = "acid";
    y[1] = "acid";
    let (_, w) = cross_validate(&x, &y, &cfg(5, 10)).unwrap();
    assert_eq!(w[0].class, "SparseStratification");
}
