use macfb_core::hull::convex_hull;
use macfb_core::region::{corner_points, sample_scheme};
use macfb_core::{
    bounds, check_reductions, point_in_region, search_theorem, Cardinalities, ChannelKernel,
    KernelShape, SearchParams, StateModel, Theorem,
};

#[test]
fn noiseless_mac_reaches_the_unit_corner() {
    // The optimum needs no cloud center, so a degenerate U keeps the search
    // focused on the auxiliary laws that matter.
    let kernel = ChannelKernel::identity(2, 2).unwrap();
    let search = SearchParams {
        samples: 500,
        cards: Cardinalities { u: 1, v1: 2, v2: 2 },
        ..Default::default()
    };
    let cloud = search_theorem(Theorem::FullStrict, &StateModel::null(), &kernel, &search).unwrap();
    assert!(point_in_region((0.95, 0.95), &cloud));
    assert!(!point_in_region((1.0 + 1e-6, 0.0), &cloud));
    for p in &cloud.points {
        assert!(point_in_region((p.r1, p.r2), &cloud));
    }
}

#[test]
fn hull_ignores_emission_order() {
    let kernel = ChannelKernel::binary_symmetric_pair(0.2).unwrap();
    let search = SearchParams { samples: 80, seed: 3, ..Default::default() };
    let cloud = search_theorem(Theorem::PartialCausal, &StateModel::null(), &kernel, &search).unwrap();
    let mut coords: Vec<(f64, f64)> = cloud.points.iter().map(|p| (p.r1, p.r2)).collect();
    coords.reverse();
    assert_eq!(convex_hull(&coords), cloud.hull);
    coords.rotate_left(17);
    assert_eq!(convex_hull(&coords), cloud.hull);
}

#[test]
fn emitted_points_trace_back_to_their_samples() {
    let model = StateModel::new(vec![0.5, 0.5], vec![0.3, 0.7], vec![1.0]).unwrap();
    let kernel = ChannelKernel::from_fn(
        KernelShape { s0: 2, s1: 2, s2: 1, x1: 2, x2: 2, y: 2 },
        |s0, s1, _, x1, x2| {
            let y = (x1 + x2 + s0 * s1) % 2;
            if y == 0 { vec![0.9, 0.1] } else { vec![0.1, 0.9] }
        },
    )
    .unwrap();
    let search = SearchParams { samples: 40, seed: 12, ..Default::default() };
    let cloud = search_theorem(Theorem::FullNonCausal, &model, &kernel, &search).unwrap();
    for i in [0usize, 13, 39] {
        let p = sample_scheme(Theorem::FullNonCausal, &model, &kernel, &search, i).unwrap();
        let want = corner_points(&bounds(Theorem::FullNonCausal, &p).unwrap());
        let got: Vec<(f64, f64)> =
            cloud.points.iter().filter(|q| q.sample == Some(i)).map(|q| (q.r1, q.r2)).collect();
        assert_eq!(got, want.to_vec());
    }
    let report = check_reductions(&model, &kernel, &search).unwrap();
    assert!(report.passed, "{report:?}");
}
