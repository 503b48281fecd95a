use cubecycles::hypercube::neighbors;
use cubecycles::percolation::delta_for_epsilon;
use cubecycles::{EdgeId, PercolationSample, Subcube, VertexClass, VertexId, VertexModel};

fn edges(d: usize) -> impl Iterator<Item = EdgeId> {
    (0..1u64 << d).flat_map(move |v| {
        (0..d).filter(move |&c| v >> c & 1 == 0).map(move |c| EdgeId::from_base(VertexId(v), c).unwrap())
    })
}

#[test]
fn edge_frequency_matches_p() {
    let d = 14;
    let total = d << (d - 1);
    for p in [0.1, 0.5, 0.9] {
        let s = PercolationSample::bond(11, d, p).unwrap();
        let kept = edges(d).filter(|&e| s.edge_present(e).unwrap()).count();
        let freq = kept as f64 / total as f64;
        let se = (p * (1.0 - p) / total as f64).sqrt();
        assert!((freq - p).abs() < 5.0 * se, "p = {p}: frequency {freq}");
    }
}

#[test]
fn seeds_give_different_graphs() {
    let a = PercolationSample::bond(1, 10, 0.5).unwrap();
    let b = PercolationSample::bond(2, 10, 0.5).unwrap();
    let differ = edges(10).filter(|&e| a.edge_present(e).unwrap() != b.edge_present(e).unwrap()).count();
    let total = 10 << 9;
    // independent fair coins disagree about half the time
    assert!((differ as f64 / total as f64 - 0.5).abs() < 0.05);
}

#[test]
fn coupling_is_monotone_in_p() {
    let base = PercolationSample::bond(5, 10, 0.0).unwrap();
    let ps = [0.0, 0.2, 0.35, 0.5, 0.8, 1.0];
    for e in edges(10) {
        let present: Vec<bool> = ps.iter().map(|&p| base.with_p(p).unwrap().edge_present(e).unwrap()).collect();
        assert!(present.windows(2).all(|w| !w[0] || w[1]));
        assert!(!present[0] && present[ps.len() - 1]);
    }
}

#[test]
fn has_edge_is_symmetric_and_hypercube_only() {
    let s = PercolationSample::bond(3, 8, 0.5).unwrap();
    for v in Subcube::full(8).unwrap().vertices() {
        for w in neighbors(v, 8) {
            assert_eq!(s.has_edge(v, w), s.has_edge(w, v));
        }
        assert!(!s.has_edge(v, v));
        assert!(!s.has_edge(v, VertexId(v.0 ^ 0b11)));
    }
}

#[test]
fn tri_partition_class_frequencies() {
    let delta = delta_for_epsilon(0.5).unwrap();
    let s = PercolationSample::new(9, 14, 0.5, VertexModel::tri_partition(delta)).unwrap();
    let n = 1u64 << 14;
    let mut counts = [0usize; 3];
    for v in 0..n {
        match s.vertex_class(VertexId(v)).unwrap() {
            VertexClass::V1 => counts[0] += 1,
            VertexClass::V2 => counts[1] += 1,
            VertexClass::V3 => counts[2] += 1,
            other => panic!("unexpected class {other:?}"),
        }
    }
    let want = [1.0 - delta / 2.0, delta / 4.0, delta / 4.0];
    for (c, q) in counts.iter().zip(want) {
        let se = (q * (1.0 - q) / n as f64).sqrt();
        assert!((*c as f64 / n as f64 - q).abs() < 5.0 * se);
    }
}

#[test]
fn vertex_randomness_is_independent_of_p() {
    let s = PercolationSample::new(4, 12, 0.3, VertexModel::Keep { q: 0.5 }).unwrap();
    let t = s.with_p(0.9).unwrap();
    for v in 0..1u64 << 12 {
        assert_eq!(s.vertex_class(VertexId(v)).unwrap(), t.vertex_class(VertexId(v)).unwrap());
    }
}

#[test]
fn delta_solves_its_equation() {
    for eps in [0.0, 0.1, 0.5, 0.9, 1.0] {
        let delta = delta_for_epsilon(eps).unwrap();
        assert!((0.0..=1.0).contains(&delta));
        assert!(((1.0 - delta) * (1.0 - delta / 2.0) - (1.0 - eps)).abs() < 1e-12);
    }
    assert!(delta_for_epsilon(1.5).is_err());
}
