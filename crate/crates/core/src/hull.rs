//! Planar convex hull (Andrew's monotone chain) and point containment.

/// Signed area of the parallelogram spanned by `a -> b` and `a -> c`.
fn cross(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

/// Counter-clockwise hull vertices starting from the lowest-then-leftmost
/// point, collinear points dropped. The result depends only on the set of
/// input points, not their order.
pub fn convex_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() == 2 && lower[0] == lower[1] {
        lower.truncate(1);
    }
    lower
}

/// True iff `pt` lies inside or on the hull, with `tol` slack on every
/// supporting-line test (measured as a Euclidean distance).
pub fn hull_contains(hull: &[(f64, f64)], pt: (f64, f64), tol: f64) -> bool {
    match hull.len() {
        0 => false,
        1 => dist(hull[0], pt) <= tol,
        2 => segment_dist(hull[0], hull[1], pt) <= tol,
        n => (0..n).all(|i| {
            let a = hull[i];
            let b = hull[(i + 1) % n];
            cross(a, b, pt) / dist(a, b) >= -tol
        }),
    }
}

/// Area enclosed by the hull polygon.
pub fn hull_area(hull: &[(f64, f64)]) -> f64 {
    let n = hull.len();
    if n < 3 {
        return 0.0;
    }
    0.5 * (0..n)
        .map(|i| {
            let a = hull[i];
            let b = hull[(i + 1) % n];
            a.0 * b.1 - b.0 * a.1
        })
        .sum::<f64>()
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

fn segment_dist(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0);
    dist((a.0 + t * dx, a.1 + t * dy), p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn square_with_interior_and_collinear_points() {
        let pts = [
            (0.0, 0.0),
            (1.0, 0.0),
            (0.5, 0.0),
            (1.0, 1.0),
            (0.0, 1.0),
            (0.5, 0.5),
            (0.0, 0.5),
        ];
        let hull = convex_hull(&pts);
        assert_eq!(hull, vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        assert!((hull_area(&hull) - 1.0).abs() < 1e-15);
        assert!(hull_contains(&hull, (0.25, 0.75), 1e-9));
        assert!(hull_contains(&hull, (1.0, 0.5), 1e-9));
        assert!(!hull_contains(&hull, (1.1, 0.5), 1e-9));
    }

    #[test]
    fn degenerate_hulls() {
        assert_eq!(convex_hull(&[(0.0, 0.0), (0.0, 0.0)]), vec![(0.0, 0.0)]);
        let seg = convex_hull(&[(0.0, 0.0), (2.0, 0.0), (1.0, 0.0)]);
        assert_eq!(seg, vec![(0.0, 0.0), (2.0, 0.0)]);
        assert!(hull_contains(&seg, (1.5, 0.0), 1e-9));
        assert!(!hull_contains(&seg, (1.5, 0.1), 1e-9));
        assert!(hull_contains(&[(0.0, 0.0)], (0.0, 0.0), 1e-9));
        assert!(!hull_contains(&[], (0.0, 0.0), 1e-9));
    }

    proptest! {
        #[test]
        fn hull_contains_inputs_and_ignores_order(
            pts in prop::collection::vec((0.0f64..4.0, 0.0f64..4.0), 1..40),
            rot in 0usize..40,
        ) {
            let hull = convex_hull(&pts);
            for p in &pts {
                prop_assert!(hull_contains(&hull, *p, 1e-9));
            }
            let mut shuffled = pts.clone();
            let r = rot % shuffled.len();
            shuffled.rotate_left(r);
            shuffled.reverse();
            prop_assert_eq!(convex_hull(&shuffled), hull);
        }
    }
}
