use nalgebra::DMatrix;
use percspec::espectrum::eigenvalues;
use percspec::lattice::{complete_graph, MixedRadixIndex};
use percspec::LatticeSpec;
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn lattice(max_rank: usize, max_side: usize) -> impl Strategy<Value = LatticeSpec> {
    prop::collection::vec((2usize..=max_side, 0.01f64..=1.0), 1..=max_rank).prop_map(|v| {
        let (dims, probs) = v.into_iter().unzip();
        LatticeSpec::new(dims, probs).unwrap()
    })
}

fn bounded(max_nodes: usize) -> impl Strategy<Value = LatticeSpec> {
    lattice(4, 8).prop_filter("dense-friendly size", move |s| s.node_count() <= max_nodes)
}

#[test]
fn spec_examples() {
    let s = LatticeSpec::new(vec![30, 50], vec![0.7, 0.5]).unwrap();
    assert!((s.expected_degree() - 44.8).abs() < 1e-12);
    assert_eq!(s.link_count(), 21_750 + 36_750);
    let s = LatticeSpec::new(vec![3, 4], vec![1.0, 1.0]).unwrap();
    assert_eq!(s.decode_index(1).unwrap().digits, vec![0, 0]);
    assert_eq!(s.decode_index(2).unwrap().digits, vec![1, 0]);
    assert_eq!(s.decode_index(4).unwrap().digits, vec![0, 1]);
    assert_eq!(s.decode_index(12).unwrap().digits, vec![2, 3]);
    assert!(s.decode_index(13).is_err());
    assert!(s.decode_index(0).is_err());
    assert!(s.encode_index(&MixedRadixIndex::from(vec![3, 0])).is_err());
    assert!(s.are_adjacent(1, 3).unwrap());
    assert!(!s.are_adjacent(1, 5).unwrap());
    assert!(!s.are_adjacent(2, 2).unwrap());
}

#[test]
fn rejects_bad_specs() {
    assert!(LatticeSpec::new(vec![], vec![]).is_err());
    assert!(LatticeSpec::new(vec![1, 3], vec![0.5, 0.5]).is_err());
    assert!(LatticeSpec::new(vec![3], vec![0.0]).is_err());
    assert!(LatticeSpec::new(vec![3], vec![1.2]).is_err());
    assert!(LatticeSpec::new(vec![3], vec![f64::NAN]).is_err());
    assert!(LatticeSpec::new(vec![usize::MAX, 3], vec![0.5, 0.5]).is_err());
}

#[test]
fn complete_graph_spectrum() {
    let ev = eigenvalues(&complete_graph(5)).unwrap();
    assert!((ev[4] - 4.0).abs() < 1e-12);
    assert!(ev[..4].iter().all(|&x| (x + 1.0).abs() < 1e-12));
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn index_round_trip(s in lattice(4, 9), pick in 0.0f64..1.0) {
        let x = 1 + ((s.node_count() - 1) as f64 * pick) as usize;
        let digits = s.decode_index(x).unwrap();
        prop_assert!(digits.digits.iter().zip(s.dims()).all(|(&d, &m)| d < m));
        prop_assert_eq!(s.encode_index(&digits).unwrap(), x);
    }

    #[test]
    fn expected_degree_and_row_sums(s in bounded(200)) {
        let b = s.expected_matrix().unwrap();
        for i in 0..s.node_count() {
            prop_assert!((b.row(i).sum() - 1.0).abs() < 1e-12);
        }
        let a = s.lattice_adjacency().unwrap();
        let per_node: f64 = s.dims().iter().map(|&m| (m - 1) as f64).sum();
        prop_assert!((0..s.node_count()).all(|i| a.row(i).sum() == per_node));
        prop_assert_eq!(a.sum() as usize, 2 * s.link_count());
    }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn kronecker_form_matches_adjacency_rule(s in bounded(200)) {
        let n = s.node_count();
        let sum: DMatrix<f64> = (0..s.rank())
            .map(|d| s.kronecker_term(d).unwrap())
            .fold(DMatrix::zeros(n, n), |acc, t| acc + t);
        for i in 0..n {
            for j in 0..n {
                let adjacent = s.are_adjacent(i + 1, j + 1).unwrap();
                prop_assert_eq!(sum[(i, j)], if adjacent { 1.0 } else { 0.0 });
            }
        }
        prop_assert_eq!(&sum, &s.lattice_adjacency().unwrap());
    }

    #[test]
    fn expected_spectrum_matches_eigensolve(s in bounded(200)) {
        let dense = eigenvalues(&s.expected_matrix().unwrap()).unwrap();
        let closed = s.expected_spectrum().expanded();
        prop_assert_eq!(closed.len(), dense.len());
        for (a, b) in closed.iter().zip(&dense) {
            prop_assert!((a - b).abs() < 1e-10, "{} vs {}", a, b);
        }
        prop_assert_eq!(s.expected_spectrum().total_multiplicity(), s.node_count());
    }
}
