//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use macfb_core::bounds::{
    bounds_cover_leung, bounds_thm1, bounds_thm2, bounds_thm3, bounds_thm4, bounds_thm5,
    bounds_thm6,
};
use macfb_core::prob::sample_simplex;
use macfb_core::region::corner_points;
use macfb_core::sim::CodeParams;
use macfb_core::{
    build_joint, point_in_region, run_simulation, search_theorem, Alphabet, Cardinalities,
    Causality, ChannelKernel, CondPmf, DetMap, Feedback, InformationTerms, JointTable,
    KernelShape, SchemeDistribution, SchemeKind, SearchParams, StateModel, Theorem,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_table(rng: &mut ChaCha8Rng) -> JointTable {
    let names = ["a", "b", "c", "d"];
    let k = rng.random_range(1..=4);
    let vars: Vec<Alphabet> =
        (0..k).map(|i| Alphabet::new(names[i], rng.random_range(1..=3)).unwrap()).collect();
    let cells: usize = vars.iter().map(|v| v.size).product();
    let mut probs = sample_simplex(cells, 0.7, rng).unwrap();
    // Exact zeros exercise the 0 log 0 convention.
    for p in probs.iter_mut() {
        if rng.random::<f64>() < 0.2 {
            *p = 0.0;
        }
    }
    let total: f64 = probs.iter().sum();
    if total == 0.0 {
        probs[0] = 1.0;
    } else {
        probs.iter_mut().for_each(|p| *p /= total);
    }
    JointTable::new(vars, probs).unwrap()
}

fn information_measures() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for t in 0..200 {
        let table = random_table(&mut rng);
        let v = table.var_names();
        let mut acc = 0.0;
        for i in 0..v.len() {
            let h = table.entropy(&v[i..=i], &v[..i]).map_err(|e| e.to_string())?;
            check(h >= 0.0, || format!("table {t}: negative conditional entropy {h}"))?;
            acc += h;
        }
        let joint = table.entropy(&v, &[]).unwrap();
        worst = worst.max((acc - joint).abs());
        if v.len() >= 2 {
            let (a, b, g) = (&v[..1], &v[1..2], &v[2..]);
            let i = table.mutual_info(a, b, g).unwrap();
            check(i >= 0.0, || format!("table {t}: negative information {i}"))?;
            let split = table.entropy(a, &[b, g].concat()).unwrap() + i;
            worst = worst.max((table.entropy(a, g).unwrap() - split).abs());
        }
    }
    check(worst <= 1e-10, || format!("identity deviation {worst:.3e}"))?;
    Ok(format!("200 tables, max deviation {worst:.2e}"))
}

fn random_kernel(rng: &mut ChaCha8Rng, states: (usize, usize, usize), binary: bool) -> ChannelKernel {
    let (x1, x2, y) = if binary {
        (2, 2, 2)
    } else {
        (rng.random_range(2..=3), rng.random_range(2..=3), rng.random_range(2..=4))
    };
    let shape = KernelShape { s0: states.0, s1: states.1, s2: states.2, x1, x2, y };
    ChannelKernel::from_fn(shape, |_, _, _, _, _| sample_simplex(y, 1.0, rng).unwrap()).unwrap()
}

fn cover_leung_collapse() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let kernel = random_kernel(&mut rng, (1, 1, 1), false);
        let cards = Cardinalities {
            u: rng.random_range(1..=3),
            v1: rng.random_range(1..=3),
            v2: rng.random_range(1..=3),
        };
        let p = SchemeDistribution::sample(&StateModel::null(), &kernel, cards, 1.0, &mut rng).unwrap();
        let direct = bounds_cover_leung(&p).unwrap().pre_clamp;
        for b in [bounds_thm1(&p), bounds_thm2(&p), bounds_thm3(&p)] {
            worst = worst.max(b.unwrap().pre_clamp.max_abs_diff(&direct));
        }
    }
    check(worst <= 1e-9, || format!("max deviation {worst:.3e}"))?;
    Ok(format!("50 schemes, max deviation {worst:.2e}"))
}

fn penalty_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for k in 0..200 {
        let q = |rng: &mut ChaCha8Rng| sample_simplex(2, 1.0, rng).unwrap();
        let model = StateModel::new(q(&mut rng), q(&mut rng), q(&mut rng)).unwrap();
        let kernel = random_kernel(&mut rng, (2, 2, 2), true);
        let cards = Cardinalities { u: 2, v1: 2, v2: 2 };
        let p = SchemeDistribution::sample(&model, &kernel, cards, 1.0, &mut rng).unwrap();
        let joint = build_joint(&p).unwrap();
        let pen1 = joint.mutual_info(&["v1"], &["s0", "s1"], &["u"]).unwrap();
        let pen2 = joint.mutual_info(&["v2"], &["s0", "s2"], &["u"]).unwrap();
        for (hi, lo) in [
            (bounds_thm2(&p).unwrap(), bounds_thm1(&p).unwrap()),
            (bounds_thm5(&p).unwrap(), bounds_thm4(&p).unwrap()),
        ] {
            let (h, l) = (hi.pre_clamp, lo.pre_clamp);
            worst = worst
                .max((h.r1 - l.r1 - pen1).abs())
                .max((h.r2 - l.r2 - pen2).abs())
                .max((h.rsum - l.rsum - pen1 - pen2).abs());
        }
        let (t3, t6) = (bounds_thm3(&p).unwrap(), bounds_thm6(&p).unwrap());
        check(t3.pre_clamp == t6.pre_clamp && t3.clamped() == t6.clamped(), || {
            format!("scheme {k}: strictly causal regions differ")
        })?;
    }
    check(worst <= 1e-12, || format!("max deviation {worst:.3e}"))?;
    Ok(format!("200 schemes, max deviation {worst:.2e}, strictly causal regions identical"))
}

fn region_search_sanity() -> Outcome {
    let kernel = ChannelKernel::identity(2, 2).unwrap();
    // The optimum uses no cloud center, so the search draws a degenerate U.
    let search = SearchParams {
        samples: 500,
        cards: Cardinalities { u: 1, v1: 2, v2: 2 },
        ..Default::default()
    };
    let cloud = search_theorem(Theorem::FullStrict, &StateModel::null(), &kernel, &search)
        .map_err(|e| e.to_string())?;
    let uncontained = cloud.points.iter().filter(|p| !point_in_region((p.r1, p.r2), &cloud)).count();
    check(uncontained == 0, || format!("{uncontained} emitted points outside the hull"))?;
    check(point_in_region((0.95, 0.95), &cloud), || {
        format!("(0.95, 0.95) outside the hull {:?}", cloud.hull)
    })?;
    Ok(format!("{} points contained, (0.95, 0.95) inside", cloud.points.len()))
}

fn noiseless_simulation() -> Outcome {
    let p = SchemeDistribution::uncoded(&StateModel::null(), &ChannelKernel::identity(2, 2).unwrap())
        .unwrap();
    let params = CodeParams {
        n: 8,
        blocks: 4,
        r1: 0.5,
        r2: 0.5,
        epsilon: 3.0,
        trials: 100,
        distinct_codewords: true,
        ..Default::default()
    };
    let kind = SchemeKind::new(Feedback::TwoSided, Causality::NonCausal).unwrap();
    let r = run_simulation(&p, &params, &kind).map_err(|e| e.to_string())?;
    check(r.error_rate == 0.0, || format!("error rate {} ({r:?})", r.error_rate))?;
    Ok(format!("error rate 0 over {} trials", params.trials))
}

fn achievability_trend() -> Outcome {
    let kernel = ChannelKernel::binary_symmetric_pair(0.05).unwrap();
    let p = SchemeDistribution::uncoded(&StateModel::null(), &kernel).unwrap();
    let corner = corner_points(&bounds_thm3(&p).unwrap())[0];
    let (r1, r2) = (corner.0 / 2.0, corner.1 / 2.0);
    let kind = SchemeKind::strictly_causal(Feedback::TwoSided);
    let error = |n: usize| -> Result<f64, String> {
        let params = CodeParams { n, blocks: 4, r1, r2, epsilon: 6.0, trials: 500, ..Default::default() };
        Ok(run_simulation(&p, &params, &kind).map_err(|e| e.to_string())?.error_rate)
    };
    let (e8, e16) = (error(8)?, error(16)?);
    let detail = format!("rates ({r1:.4}, {r2:.4}), error {e8:.3} at n=8, {e16:.3} at n=16");
    check(e16 <= e8 + 0.02, || detail.clone())?;
    Ok(detail)
}

/// `S1` uniform, `V1` a BSC(0.1) view of it, `x1 = v1 xor s1` sent
/// noiselessly, transmitter 2 silent.
fn binning_fixture() -> SchemeDistribution {
    let model = StateModel::new(vec![1.0], vec![0.5, 0.5], vec![1.0]).unwrap();
    let kernel = ChannelKernel::from_fn(
        KernelShape { s0: 1, s1: 2, s2: 1, x1: 2, x2: 1, y: 2 },
        |_, _, _, x1, _| if x1 == 0 { vec![1.0, 0.0] } else { vec![0.0, 1.0] },
    )
    .unwrap();
    SchemeDistribution {
        states: model,
        kernel,
        pu: vec![1.0],
        pv1: CondPmf::from_fn(vec![1, 1, 2], 2, |c| if c[2] == 0 { vec![0.9, 0.1] } else { vec![0.1, 0.9] })
            .unwrap(),
        pv2: CondPmf::new(vec![1, 1, 1], 1, vec![1.0]).unwrap(),
        f1: DetMap::from_fn([1, 2, 1, 2], 2, |_, v, _, s| v ^ s).unwrap(),
        f2: DetMap::from_fn([1, 1, 1, 1], 1, |_, _, _, _| 0).unwrap(),
    }
}

fn binning_threshold() -> Outcome {
    let p = binning_fixture();
    let threshold = InformationTerms::of(&p).unwrap().v1_state_given_u;
    let kind = SchemeKind::new(Feedback::TwoSided, Causality::NonCausal).unwrap();
    let failures = |rp1: f64| -> Result<f64, String> {
        let params = CodeParams {
            n: 16,
            blocks: 2,
            r1: 0.125,
            rp1,
            epsilon: 0.5,
            trials: 500,
            seed: 7,
            ..Default::default()
        };
        let r = run_simulation(&p, &params, &kind).map_err(|e| e.to_string())?;
        Ok(r.encode_failures as f64 / (params.trials * params.blocks) as f64)
    };
    let above = failures(threshold + 0.2)?;
    let below = failures((threshold - 0.2).max(0.05))?;
    let detail = format!(
        "I(V1;S0S1|U) = {threshold:.4}, encode-failure frequency {above:.3} above vs {below:.3} below"
    );
    check(above < below, || detail.clone())?;
    Ok(detail)
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).display().to_string()
}

/// Runs the binary and returns its exit code, stdout, and the bytes of the
/// listed output files.
fn run_cli(args: &[String], outputs: &[PathBuf]) -> Result<(Option<i32>, Vec<u8>, Vec<Vec<u8>>), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_macfb"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    let files = outputs.iter().map(|f| std::fs::read(f).unwrap_or_default()).collect();
    Ok((out.status.code(), out.stdout, files))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let file = |n: &str| dir.path().join(n);
    let s = |x: &str| x.to_string();
    let p = |f: &PathBuf| f.display().to_string();
    let (csv, svg, sim, red, cmp) =
        (file("r.csv"), file("r.svg"), file("s.json"), file("red.json"), file("c.json"));
    let commands: Vec<(Vec<String>, Vec<PathBuf>)> = vec![
        (
            vec![s("region"), s("--config"), data("stateful.json"), s("--theorem"), s("4"), s("--samples"),
                 s("300"), s("--out"), p(&csv), s("--svg"), p(&svg)],
            vec![csv.clone(), svg.clone()],
        ),
        (
            vec![s("simulate"), s("--config"), data("bsc.json"), s("--kind"), s("partial-causal"), s("--r0"),
                 s("0.125"), s("--r1"), s("0.25"), s("--r2"), s("0.25"), s("--n"), s("8"), s("--epsilon"),
                 s("6"), s("--trials"), s("200"), s("--out"), p(&sim)],
            vec![sim.clone()],
        ),
        (
            vec![s("reduce"), s("--config"), data("stateful.json"), s("--samples"), s("100"), s("--out"), p(&red)],
            vec![red.clone()],
        ),
        (vec![s("info"), s("--config"), data("stateful.json")], vec![]),
        (
            vec![s("compare"), s("--config"), data("bsc.json"), s("--samples"), s("100"), s("--out"), p(&cmp)],
            vec![cmp.clone()],
        ),
    ];
    for (args, outputs) in &commands {
        let first = run_cli(args, outputs)?;
        let second = run_cli(args, outputs)?;
        check(first.0 == Some(0), || format!("`{}` exited with {:?}", args[0], first.0))?;
        check(first == second, || format!("`{}` output differs between runs", args[0]))?;
        check(!first.1.is_empty() && first.2.iter().all(|f| !f.is_empty()), || {
            format!("`{}` produced empty output", args[0])
        })?;
    }
    Ok(format!("{} commands re-run byte-identically", commands.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Duration); 8] = [
        ("information-measure identities", information_measures, Duration::from_secs(10)),
        ("classical feedback region collapse", cover_leung_collapse, Duration::from_secs(30)),
        ("binning penalty identities", penalty_identities, Duration::from_secs(60)),
        ("region search sanity", region_search_sanity, Duration::from_secs(60)),
        ("noiseless simulation", noiseless_simulation, Duration::from_secs(60)),
        ("achievability trend", achievability_trend, Duration::from_secs(600)),
        ("binning threshold direction", binning_threshold, Duration::from_secs(300)),
        ("determinism", determinism, Duration::from_secs(600)),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if took > *limit => Err(format!("{detail}; took {took:.1?}, limit {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS [{}] {name}: {detail} ({took:.2?})", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {name}: {why} ({took:.2?})", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
