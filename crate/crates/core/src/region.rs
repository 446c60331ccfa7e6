//! Monte Carlo approximation of the closure of the convex hull of the union
//! of per-distribution pentagons.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{InformationTerms, RateBounds, Theorem};
use crate::channel::{
    build_joint_capped, Cardinalities, ChannelKernel, Causality, Feedback, SchemeDistribution,
    SchemeKind, StateModel, DEFAULT_CELL_CAP,
};
use crate::error::{Error, Result};
use crate::hull::{convex_hull, hull_contains};

/// Seed used when the caller does not supply one.
pub const DEFAULT_SEED: u64 = 0x5eed_2013;

/// Tolerance on the supporting-line tests of [`point_in_region`].
pub const CONTAINMENT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct SearchParams {
    pub cards: Cardinalities,
    pub samples: usize,
    pub concentration: f64,
    pub seed: u64,
    pub cell_cap: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            cards: Cardinalities::default(),
            samples: 1000,
            concentration: 1.0,
            seed: DEFAULT_SEED,
            cell_cap: DEFAULT_CELL_CAP,
        }
    }
}

/// One emitted rate pair. `sample` is `None` for the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePoint {
    pub r1: f64,
    pub r2: f64,
    pub sample: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegionCloud {
    pub theorem: Theorem,
    pub points: Vec<RatePoint>,
    /// Counter-clockwise hull vertices.
    pub hull: Vec<(f64, f64)>,
}

impl RegionCloud {
    /// Builds the cloud from emitted points; the origin is always added.
    pub fn from_points(theorem: Theorem, emitted: Vec<RatePoint>) -> Self {
        let mut points = Vec::with_capacity(emitted.len() + 1);
        points.push(RatePoint { r1: 0.0, r2: 0.0, sample: None });
        points.extend(emitted);
        let coords: Vec<(f64, f64)> = points.iter().map(|p| (p.r1, p.r2)).collect();
        let hull = convex_hull(&coords);
        RegionCloud { theorem, points, hull }
    }

    pub fn is_hull_vertex(&self, point: &RatePoint) -> bool {
        self.hull.contains(&(point.r1, point.r2))
    }

    pub fn contains(&self, pt: (f64, f64)) -> bool {
        point_in_region(pt, self)
    }

    pub fn max_r1(&self) -> f64 {
        self.hull.iter().map(|p| p.0).fold(0.0, f64::max)
    }

    pub fn max_r2(&self) -> f64 {
        self.hull.iter().map(|p| p.1).fold(0.0, f64::max)
    }
}

pub fn point_in_region(pt: (f64, f64), cloud: &RegionCloud) -> bool {
    hull_contains(&cloud.hull, pt, CONTAINMENT_TOLERANCE)
}

/// The region that governs a scheme kind.
pub fn theorem_for(kind: &SchemeKind) -> Theorem {
    match (kind.feedback, kind.causality) {
        (Feedback::TwoSided, Causality::NonCausal) => Theorem::FullNonCausal,
        (Feedback::TwoSided, Causality::Causal) => Theorem::FullCausal,
        (Feedback::TwoSided, Causality::StrictlyCausal { .. }) => Theorem::FullStrict,
        (Feedback::Partial, Causality::NonCausal) => Theorem::PartialNonCausal,
        (Feedback::Partial, Causality::Causal) => Theorem::PartialCausal,
        (Feedback::Partial, Causality::StrictlyCausal { .. }) => Theorem::PartialStrict,
        (Feedback::None, _) => Theorem::NoFeedback,
    }
}

/// Vertices of the pentagon `R1 <= a, R2 <= b, R1 + R2 <= c` other than the
/// origin: the two dominant corners followed by the two axis points. The
/// first corner is the one with the larger `R1`.
pub fn corner_points(b: &RateBounds) -> [(f64, f64); 4] {
    let a = b.r1_max.min(b.rsum_max);
    let bb = b.r2_max.min(b.rsum_max);
    let c = b.rsum_max;
    [
        (a, bb.min(c - a).max(0.0)),
        (a.min(c - bb).max(0.0), bb),
        (a, 0.0),
        (0.0, bb),
    ]
}

/// Generator for sample `index`; independent of how samples are scheduled.
pub fn sample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn effective_cards(theorem: Theorem, cards: Cardinalities) -> Cardinalities {
    match theorem {
        Theorem::NoFeedback => Cardinalities { u: 1, ..cards },
        _ => cards,
    }
}

/// Regenerates the scheme distribution behind sample `index` of a search.
pub fn sample_scheme(
    theorem: Theorem,
    model: &StateModel,
    kernel: &ChannelKernel,
    search: &SearchParams,
    index: usize,
) -> Result<SchemeDistribution> {
    let cards = effective_cards(theorem, search.cards);
    SchemeDistribution::sample(
        model,
        kernel,
        cards,
        search.concentration,
        &mut sample_rng(search.seed, index),
    )
}

/// Searches the region of the theorem that governs `kind`.
pub fn region_search(
    kind: &SchemeKind,
    model: &StateModel,
    kernel: &ChannelKernel,
    search: &SearchParams,
) -> Result<RegionCloud> {
    search_theorem(theorem_for(kind), model, kernel, search)
}

pub fn search_theorem(
    theorem: Theorem,
    model: &StateModel,
    kernel: &ChannelKernel,
    search: &SearchParams,
) -> Result<RegionCloud> {
    if search.samples == 0 {
        return Err(Error::config("sample count must be at least 1"));
    }
    let per_sample: Vec<[(f64, f64); 4]> = (0..search.samples)
        .into_par_iter()
        .map(|i| {
            let p = sample_scheme(theorem, model, kernel, search, i)?;
            let joint = build_joint_capped(&p, search.cell_cap)?;
            let terms = InformationTerms::from_joint(&joint)?;
            Ok(corner_points(&terms.bounds(theorem)))
        })
        .collect::<Result<_>>()?;
    let emitted = per_sample
        .into_iter()
        .enumerate()
        .flat_map(|(i, corners)| {
            corners.into_iter().map(move |(r1, r2)| RatePoint { r1, r2, sample: Some(i) })
        })
        .collect();
    Ok(RegionCloud::from_points(theorem, emitted))
}
