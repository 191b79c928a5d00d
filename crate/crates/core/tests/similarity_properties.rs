use proptest::prelude::*;
use tagscope_core::fixtures;
use tagscope_core::similarity::{
    pair_similarity, rank_similar, similarity_matrix, step_counts, tam, weight, BinaryTagVector,
    MatrixOptions, PairOptions,
};

/// Random monotone path from (1,1) to (n,m).
fn path_strategy() -> impl Strategy<Value = (Vec<(usize, usize)>, usize, usize)> {
    prop::collection::vec(0u8..3, 0..80).prop_map(|steps| {
        let (mut i, mut j) = (1, 1);
        let mut path = vec![(1, 1)];
        for s in steps {
            match s {
                0 => i += 1,
                1 => j += 1,
                _ => {
                    i += 1;
                    j += 1
                }
            }
            path.push((i, j));
        }
        (path, i, j)
    })
}

fn vector(len: usize, ones: usize) -> BinaryTagVector {
    BinaryTagVector::from_bits("t".into(), "g".into(), (0..len).map(|i| i < ones))
}

fn bit_vec(max: usize) -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(prop::bool::weighted(0.3), 1..=max)
}

proptest! {
    #[test]
    fn tam_in_range((path, n, m) in path_strategy()) {
        let s = tam(&path, n, m).unwrap();
        prop_assert!((0.0..=3.0).contains(&s.tam));
        prop_assert!((0.0..=1.0).contains(&s.similarity));
        prop_assert!((s.similarity - (1.0 - s.tam / 3.0)).abs() <= 1e-12);
        let (h, v, d) = step_counts(&path);
        prop_assert_eq!(h + v + d, path.len() - 1);
    }

    #[test]
    fn all_diagonal_tam_is_zero(n in 1usize..200) {
        let path: Vec<_> = (1..=n).map(|i| (i, i)).collect();
        prop_assert_eq!(tam(&path, n, n).unwrap().tam, 0.0);
    }

    #[test]
    fn horizontal_then_vertical_tam_is_three(n in 2usize..100, m in 2usize..100) {
        let mut path: Vec<_> = (1..=n).map(|i| (i, 1)).collect();
        path.extend((2..=m).map(|j| (n, j)));
        let s = tam(&path, n, m).unwrap();
        prop_assert_eq!(s.tam, 3.0);
        prop_assert_eq!(s.similarity, 0.0);
    }

    #[test]
    fn weight_bounds_and_saturation(l1 in 1usize..500, l2 in 1usize..500, f1 in 0.0f64..1.0, f2 in 0.0f64..1.0) {
        let (h1, h2) = ((l1 as f64 * f1) as usize, (l2 as f64 * f2) as usize);
        let w = weight(&vector(l1, h1), &vector(l2, h2));
        prop_assert!((0.0..=1.0).contains(&w));
        if 10 * h1 >= l1 && 10 * h2 >= l2 {
            prop_assert_eq!(w, 1.0);
        }
        if h1 < l1 {
            prop_assert!(weight(&vector(l1, h1 + 1), &vector(l2, h2)) >= w);
        }
    }

    #[test]
    fn skipping_does_not_change_scores(a in bit_vec(80), b in bit_vec(80), radius in 0usize..3) {
        let va = BinaryTagVector::from_bits("a".into(), "g".into(), a);
        let vb = BinaryTagVector::from_bits("b".into(), "g".into(), b);
        let skip = pair_similarity(&va, &vb, PairOptions { radius, skip_zero_weight: true }).unwrap();
        let full = pair_similarity(&va, &vb, PairOptions { radius, skip_zero_weight: false }).unwrap();
        prop_assert_eq!(skip.score, full.score);
        prop_assert!((0.0..=1.0).contains(&skip.score));
        let swapped = pair_similarity(&vb, &va, PairOptions { radius, skip_zero_weight: true }).unwrap();
        prop_assert_eq!(swapped.weight, skip.weight);
    }
}

#[test]
fn identical_dense_vectors_score_one() {
    let v = vector(50, 10);
    let c = pair_similarity(&v, &v, PairOptions::default()).unwrap();
    assert_eq!((c.base_similarity, c.score), (1.0, 1.0));
}

#[test]
fn shifted_pulse_scores_below_one() {
    let len = 200;
    for k in [1, 5, 20, 49] {
        let a = BinaryTagVector::from_bits(
            "a".into(),
            "g".into(),
            (0..len).map(|i| (60..100).contains(&i)),
        );
        let b = BinaryTagVector::from_bits(
            "b".into(),
            "g".into(),
            (0..len).map(|i| (60 + k..100 + k).contains(&i)),
        );
        let c = pair_similarity(&a, &b, PairOptions::default()).unwrap();
        assert_eq!(c.weight, 1.0);
        assert!(c.base_similarity < 1.0, "shift {k}");
        assert_eq!(c.score, c.base_similarity);
    }
}

#[test]
fn matrix_is_symmetric_and_worker_independent() {
    let p = fixtures::gallery_corpus();
    let seq = similarity_matrix(
        &p,
        "metaphor",
        MatrixOptions {
            workers: Some(1),
            ..Default::default()
        },
    )
    .unwrap();
    for workers in [2, 8] {
        let par = similarity_matrix(
            &p,
            "metaphor",
            MatrixOptions {
                workers: Some(workers),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(
            serde_json::to_string(&par).unwrap(),
            serde_json::to_string(&seq).unwrap()
        );
    }
    let n = seq.len();
    assert_eq!(n, 12);
    for i in 0..n {
        assert_eq!(seq.cell(i, i).score, 1.0);
        for j in 0..n {
            let (a, b) = (seq.cell(i, j), seq.cell(j, i));
            assert_eq!(a.score.to_bits(), b.score.to_bits());
            assert!((0.0..=1.0).contains(&a.score));
            assert!((a.score - a.base_similarity * a.weight).abs() == 0.0);
        }
    }
}

#[test]
fn rank_matches_brute_force_sort() {
    let p = fixtures::gallery_corpus();
    let m = similarity_matrix(&p, "metaphor", MatrixOptions::default()).unwrap();
    for target in &m.texts {
        let ranked = rank_similar(&m, target.as_str()).unwrap();
        // Brute force: repeatedly extract the best remaining candidate.
        let mut pool: Vec<_> = m
            .texts
            .iter()
            .filter(|t| *t != target)
            .map(|t| (t.clone(), m.score(target.as_str(), t.as_str()).unwrap()))
            .collect();
        let mut expected = Vec::new();
        while !pool.is_empty() {
            let mut best = 0;
            for k in 1..pool.len() {
                let better = pool[k].1 > pool[best].1
                    || (pool[k].1 == pool[best].1 && pool[k].0 < pool[best].0);
                if better {
                    best = k;
                }
            }
            expected.push(pool.remove(best));
        }
        assert_eq!(ranked, expected);
    }
}

#[test]
fn texts_without_simile_have_zero_rows() {
    let p = fixtures::gallery_corpus();
    let m = similarity_matrix(&p, "simile", MatrixOptions::default()).unwrap();
    let bare = m.index_of("poem-03").unwrap();
    for j in 0..m.len() {
        let expected = if j == bare { 1.0 } else { 0.0 };
        assert_eq!(m.cell(bare, j).score, expected);
    }
}
