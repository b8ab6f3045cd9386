//! Acceptance checks. Runs as a plain binary (`harness = false`) so every
//! criterion prints one PASS/FAIL line; exits non-zero if any fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use ermkit::analysis::{
    erm_mean_layer_error, frontier, prediction_errors, rb_exponential_fit, volumetric_summary,
    CellStats, Statistic, ValueMode, VolumetricGrid, DEFAULT_THRESHOLD,
};
use ermkit::basis::{enumerate_elements, BasisRule, RuleKind};
use ermkit::circuit::{CapabilityKind, Circuit, CircuitRecord, Dataset, GateArities};
use ermkit::encoding::{
    decode, encode_circuit, placement, read_tensors, reshape_to_three_channels, unreshape,
    write_tensors, ClassMap,
};
use ermkit::fit::{
    fit, fit_with_bootstrap, train_test_split, FitConfig, Objective, ObjectiveFunction,
};
use ermkit::model::{fidelity_from_polarization, polarization_from_fidelity, ErmModel};
use ermkit::simgen::{
    analytic_success_probability, exact_dataset, generate_circuits, oracle_simulate,
    sample_dataset, ErrorRates, GeneratedCircuit, GeneratorSpec, GroundTruth,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent fidelity conversion: F = ((4^n - 1) γ + 1) / 4^n computed
/// with integer powers.
fn oracle_fidelity(gamma: f64, n: u32) -> f64 {
    let d2 = 4f64.powi(n as i32);
    ((d2 - 1.0) * gamma + 1.0) / d2
}

fn c1_conversion() -> Outcome {
    let mut r = rng(1);
    let mut worst = 0.0f64;
    let mut oracle_worst = 0.0f64;
    for _ in 0..10_000 {
        let n: usize = r.random_range(1..=10);
        let f: f64 = r.random();
        let g = polarization_from_fidelity(f, n).unwrap();
        worst = worst.max((f - fidelity_from_polarization(g, n).unwrap()).abs());
        oracle_worst = oracle_worst.max((f - oracle_fidelity(g, n as u32)).abs());
    }
    outcome(
        worst < 1e-12 && oracle_worst < 1e-12,
        format!("max |ΔF| = {worst:.2e} (oracle inverse {oracle_worst:.2e})"),
    )
}

fn random_truth(
    rule: &BasisRule,
    circuits: &[&Circuit],
    arities: &GateArities,
    r: &mut ChaCha8Rng,
) -> GroundTruth {
    let mut labels = std::collections::BTreeSet::new();
    for c in circuits {
        labels.extend(
            ermkit::basis::count_basis_elements(c, rule, arities)
                .unwrap()
                .counts
                .into_keys(),
        );
    }
    let params = labels
        .into_iter()
        .map(|l| (l, r.random_range(0.7..=1.0), 1))
        .collect();
    GroundTruth::new(ErmModel::new(*rule, params).unwrap())
}

fn target_index(g: &GeneratedCircuit) -> usize {
    g.target
        .chars()
        .enumerate()
        .map(|(k, ch)| if ch == '1' { 1 << k } else { 0 })
        .sum()
}

fn c2_oracle() -> Outcome {
    let mut r = rng(2);
    let rules = [
        BasisRule::by_arity(true),
        BasisRule::new(RuleKind::ByGateName, false, false),
        BasisRule::new(RuleKind::ByLocation, true, false),
        BasisRule::by_arity(true).width_indexed(),
    ];
    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let spec = GeneratorSpec {
            widths: vec![1 + (i % 3) as usize],
            depths: vec![2 * r.random_range(0..=4usize)],
            circuits_per_shape: 1,
            two_qubit_density: r.random_range(0.0..=1.0),
            two_qubit_gates: if i % 2 == 0 {
                vec!["CX".into()]
            } else {
                vec!["CX".into(), "CZ".into()]
            },
            seed: i,
            ..GeneratorSpec::default()
        };
        let g = &generate_circuits(&spec).unwrap()[0];
        let rule = rules[i as usize % rules.len()];
        let arities = spec.arities();
        let truth = random_truth(&rule, &[&g.circuit], &arities, &mut r);
        let analytic = analytic_success_probability(&g.circuit, &truth, &rule, &arities).unwrap();
        let probs = oracle_simulate(&g.circuit, &truth, &rule, &arities).unwrap();
        worst = worst.max((analytic - probs[target_index(g)]).abs());
    }
    outcome(
        worst < 1e-10,
        format!("100 circuits, max |Δs| = {worst:.2e}"),
    )
}

fn c3_spec() -> GeneratorSpec {
    GeneratorSpec {
        widths: vec![4],
        depths: vec![2, 4, 8, 16, 32],
        circuits_per_shape: 30,
        two_qubit_density: 0.5,
        seed: 3,
        ..GeneratorSpec::default()
    }
}

fn noiseless_fixture(
    spec: &GeneratorSpec,
    rule: BasisRule,
    rates: ErrorRates,
    kind: CapabilityKind,
) -> (Dataset, GroundTruth) {
    let circuits = generate_circuits(spec).unwrap();
    let arities = spec.arities();
    let truth =
        GroundTruth::uniform(&rule, circuits.iter().map(|g| &g.circuit), &arities, rates).unwrap();
    let d = exact_dataset("fixture", &circuits, &truth, &rule, &arities, kind).unwrap();
    (d, truth)
}

fn c3_lsq() -> Outcome {
    let rule = BasisRule::by_arity(false);
    let rates = ErrorRates {
        one_qubit: 0.005,
        two_qubit: 0.02,
        readout: 0.0,
    };
    let (d, truth) =
        noiseless_fixture(&c3_spec(), rule, rates, CapabilityKind::ProcessPolarization);
    let (train, test) = train_test_split(&d, 0.8, 3).unwrap();
    let res = fit(&train, &rule, &FitConfig::default()).unwrap();
    let mut worst = 0.0f64;
    for (l, e) in truth.model.error_rates() {
        worst = worst.max((res.error_rates[&l] - e).abs());
    }
    let delta = prediction_errors(&res.model, &test)
        .unwrap()
        .delta_abs
        .unwrap_or(f64::NAN);
    outcome(
        d.len() == 150 && train.len() == 120 && test.len() == 30 && worst < 1e-6 && delta < 1e-8,
        format!(
            "{}/{} split, max |Δε| = {worst:.2e}, holdout δ_abs = {delta:.2e}",
            train.len(),
            test.len()
        ),
    )
}

fn c4_spec(seed: u64) -> GeneratorSpec {
    GeneratorSpec {
        widths: vec![1, 2, 3, 4, 5],
        depths: vec![2, 16, 32, 64, 128],
        circuits_per_shape: 20,
        two_qubit_density: 0.25,
        seed,
        ..GeneratorSpec::default()
    }
}

const C4_RATES: ErrorRates = ErrorRates {
    one_qubit: 0.001,
    two_qubit: 0.01,
    readout: 0.02,
};

fn c4_data(seed: u64) -> (Dataset, GroundTruth, BasisRule) {
    let rule = BasisRule::by_arity(true).width_indexed();
    let spec = c4_spec(seed);
    let circuits = generate_circuits(&spec).unwrap();
    let arities = spec.arities();
    let truth = GroundTruth::uniform(
        &rule,
        circuits.iter().map(|g| &g.circuit),
        &arities,
        C4_RATES,
    )
    .unwrap();
    let d = sample_dataset("synthetic", &circuits, &truth, &rule, &arities, 1024, seed).unwrap();
    (d, truth, rule)
}

fn c4_mle_and_c6_rb() -> (Outcome, Outcome) {
    let mut covered = 0;
    let mut cases = 0;
    let mut misses = Vec::new();
    let mut rb_worst = 0.0f64;
    let mut rb_detail = Vec::new();
    for seed in 0..20u64 {
        let (d, truth, rule) = c4_data(1000 + seed);
        assert_eq!(d.len(), 500);
        let cfg = FitConfig::default()
            .with_objective(Objective::Mle)
            .with_seed(seed);
        let res = fit_with_bootstrap(&d, &rule, &cfg, 50).unwrap();
        let stderr = res.stderr.as_ref().unwrap();
        for (l, e) in truth.model.error_rates() {
            cases += 1;
            let z = (res.error_rates[&l] - e).abs() / stderr[&l];
            if z <= 3.0 {
                covered += 1;
            } else {
                misses.push(format!("s{seed}:{}(z={z:.1})", l.as_str()));
            }
        }
        for w in d.widths() {
            let erm = erm_mean_layer_error(&res.model, &d, w).unwrap();
            let rb = rb_exponential_fit(&d, w).unwrap().epsilon;
            let rel = (erm - rb).abs() / rb;
            rb_worst = rb_worst.max(rel);
            if seed == 0 {
                rb_detail.push(format!("w{w}: {erm:.5}/{rb:.5}"));
            }
        }
    }
    let frac = covered as f64 / cases as f64;
    let mle = outcome(
        frac >= 0.9,
        format!(
            "{covered}/{cases} = {:.1}% within 3σ{}",
            100.0 * frac,
            if misses.is_empty() {
                String::new()
            } else {
                format!("; misses {}", misses.join(" "))
            }
        ),
    );
    let rb = outcome(
        rb_worst < 0.10,
        format!(
            "seed 0 ERM/RB ε̄_w {}; max rel diff over 20 seeds {:.1}%",
            rb_detail.join(", "),
            100.0 * rb_worst
        ),
    );
    (mle, rb)
}

fn random_dataset(r: &mut ChaCha8Rng, i: u64, kind: CapabilityKind) -> (Dataset, BasisRule) {
    let rules = [
        BasisRule::by_arity(true),
        BasisRule::new(RuleKind::ByGateName, false, false),
        BasisRule::new(RuleKind::ByLocation, true, false),
    ];
    let rule = rules[i as usize % 3];
    let spec = GeneratorSpec {
        widths: {
            let (a, b) = (1 + (i % 4) as usize, 2 + (i % 3) as usize);
            if a == b {
                vec![a]
            } else {
                vec![a.min(b), a.max(b)]
            }
        },
        depths: vec![2, 4, 8],
        circuits_per_shape: 3,
        two_qubit_density: 0.5,
        seed: 500 + i,
        ..GeneratorSpec::default()
    };
    let circuits = generate_circuits(&spec).unwrap();
    let arities = spec.arities();
    let refs: Vec<_> = circuits.iter().map(|g| &g.circuit).collect();
    let mut truth = random_truth(&rule, &refs, &arities, r);
    // keep predicted success well inside (2^-n, 1) so nothing clamps
    let params = truth
        .model
        .params()
        .map(|(l, g, w)| (l.clone(), 0.9 + 0.099 * (g - 0.7) / 0.3, w))
        .collect();
    truth = GroundTruth::new(ErmModel::new(rule, params).unwrap());
    let d = match kind {
        CapabilityKind::SuccessProbability => {
            sample_dataset("g", &circuits, &truth, &rule, &arities, 200, i).unwrap()
        }
        CapabilityKind::ProcessPolarization => {
            let d = exact_dataset("g", &circuits, &truth, &rule, &arities, kind).unwrap();
            let noisy = d
                .records
                .iter()
                .map(|rec| {
                    let e = (rec.estimate + r.random_range(-0.02..0.02)).clamp(-0.05, 1.0);
                    CircuitRecord::new(rec.circuit.clone(), e)
                })
                .collect();
            Dataset::new("g", kind, arities.clone(), noisy).unwrap()
        }
    };
    (d, rule)
}

fn c5_gradient() -> Outcome {
    let mut r = rng(5);
    let h = 1e-6;
    let mut worst = [0.0f64; 2];
    for i in 0..100u64 {
        for (k, (obj, kind)) in [
            (Objective::LeastSquares, CapabilityKind::ProcessPolarization),
            (Objective::Mle, CapabilityKind::SuccessProbability),
        ]
        .into_iter()
        .enumerate()
        {
            let (d, rule) = random_dataset(&mut r, i, kind);
            let elements = enumerate_elements(&d, &rule).unwrap();
            let f = ObjectiveFunction::new(&d, &rule, &elements, obj).unwrap();
            let theta: Vec<f64> = (0..f.dim()).map(|_| r.random_range(2.0..6.0)).collect();
            let g = f.gradient(&theta);
            let mut fd = vec![0.0; theta.len()];
            for j in 0..theta.len() {
                let mut p = theta.clone();
                let mut m = theta.clone();
                p[j] += h;
                m[j] -= h;
                fd[j] = (f.value(&p) - f.value(&m)) / (2.0 * h);
            }
            let scale = fd.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-12);
            let err = g
                .iter()
                .zip(&fd)
                .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()))
                / scale;
            worst[k] = worst[k].max(err);
        }
    }
    outcome(
        worst[0] < 1e-5 && worst[1] < 1e-5,
        format!(
            "max relative error lsq {:.2e}, mle {:.2e}",
            worst[0], worst[1]
        ),
    )
}

fn cell(values: &[f64]) -> CellStats {
    CellStats::from_values(values).unwrap()
}

fn c7_volumetric() -> Outcome {
    // widths 1..3 × depths {1, 4, 16}; estimates chosen by hand
    let table: [(usize, usize, &[f64]); 9] = [
        (1, 1, &[0.99, 0.97]),
        (1, 4, &[0.90, 0.80, 0.70]),
        (1, 16, &[0.50, 0.30]),
        (2, 1, &[0.95, 0.85]),
        (2, 4, &[0.60, 0.40]),
        (2, 16, &[0.35, 0.10]),
        (3, 1, &[0.80]),
        (3, 4, &[0.36, 0.40, 0.20]),
        (3, 16, &[0.05, 0.15]),
    ];
    let arities: GateArities = [("X".to_owned(), 1)].into_iter().collect();
    let mut recs = Vec::new();
    for (w, depth, vals) in table {
        for (k, &v) in vals.iter().enumerate() {
            let c = Circuit::new(
                format!("w{w}d{depth}#{k}"),
                (0..w).collect(),
                vec![vec![]; depth],
            )
            .unwrap();
            recs.push(CircuitRecord::new(c, v));
        }
    }
    let d = Dataset::new("vb", CapabilityKind::SuccessProbability, arities, recs).unwrap();
    let g = volumetric_summary(&d, ValueMode::AsIs).unwrap();
    let mut ok = g.cells.len() == 9;
    for (w, depth, vals) in table {
        let c = g.cells[&(w, depth)];
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let max = vals.iter().cloned().fold(f64::MIN, f64::max);
        let min = vals.iter().cloned().fold(f64::MAX, f64::min);
        ok &=
            c.count == vals.len() && c.max == max && c.min == min && (c.mean - mean).abs() < 1e-15;
    }
    // 1/e ≈ 0.3679. Hand-derived frontiers per width:
    //   max : w1 0.50@16 → 16; w2 0.35@16 <1/e → 4; w3 0.40@4 → 4, 0.15@16 → 4
    //   mean: w1 0.40@16 → 16; w2 0.50@4, 0.225@16 → 4; w3 0.32@4 → 1
    //   min : w1 0.30@16 → 4; w2 0.40@4 → 4; w3 0.20@4 → 1
    let expect: [(Statistic, [Option<usize>; 3]); 3] = [
        (Statistic::Max, [Some(16), Some(4), Some(4)]),
        (Statistic::Mean, [Some(16), Some(4), Some(1)]),
        (Statistic::Min, [Some(4), Some(4), Some(1)]),
    ];
    for (s, want) in expect {
        let f = frontier(&g, s, DEFAULT_THRESHOLD);
        ok &= f.depths.values().copied().collect::<Vec<_>>() == want;
    }

    // monotonicity on random grids
    let mut r = rng(7);
    let mut mono = true;
    for _ in 0..100 {
        let mut cells = BTreeMap::new();
        for w in 1..=r.random_range(1..6usize) {
            for dpt in 0..r.random_range(1..8usize) {
                let vals: Vec<f64> = (0..r.random_range(1..5)).map(|_| r.random()).collect();
                cells.insert((w, 1usize << dpt), cell(&vals));
            }
        }
        let grid = VolumetricGrid { cells };
        let (t1, t2) = {
            let a: f64 = r.random();
            let b: f64 = r.random();
            (a.min(b), a.max(b))
        };
        for s in Statistic::ALL {
            let lo = frontier(&grid, s, t1);
            let hi = frontier(&grid, s, t2);
            mono &= lo.depths.iter().all(|(w, d)| hi.depths[w] <= *d);
        }
        let fmax = frontier(&grid, Statistic::Max, t1);
        let fmean = frontier(&grid, Statistic::Mean, t1);
        let fmin = frontier(&grid, Statistic::Min, t1);
        mono &= fmin
            .depths
            .iter()
            .all(|(w, d)| *d <= fmean.depths[w] && fmean.depths[w] <= fmax.depths[w]);
    }
    outcome(
        ok && mono,
        format!("hand fixture {}, 100 random grids monotone {}", ok, mono),
    )
}

fn c8_optimality() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    let mut fixtures = 0;
    let specs = [
        (c3_spec(), BasisRule::by_arity(false)),
        (
            GeneratorSpec {
                widths: vec![2, 3],
                depths: vec![2, 6, 12],
                circuits_per_shape: 8,
                two_qubit_density: 0.6,
                seed: 8,
                ..GeneratorSpec::default()
            },
            BasisRule::new(RuleKind::ByGateName, true, false),
        ),
        (
            GeneratorSpec {
                widths: vec![3],
                depths: vec![2, 4, 8, 16],
                circuits_per_shape: 10,
                two_qubit_density: 0.7,
                seed: 9,
                ..GeneratorSpec::default()
            },
            BasisRule::new(RuleKind::ByLocation, false, false),
        ),
        (c4_spec(8), BasisRule::by_arity(true).width_indexed()),
    ];
    for (spec, rule) in specs {
        for kind in [
            CapabilityKind::ProcessPolarization,
            CapabilityKind::SuccessProbability,
        ] {
            let (d, truth) = noiseless_fixture(&spec, rule, C4_RATES, kind);
            let res = fit(&d, &rule, &FitConfig::default()).unwrap();
            let elements = enumerate_elements(&d, &rule).unwrap();
            let f = ObjectiveFunction::new(&d, &rule, &elements, Objective::LeastSquares).unwrap();
            let at_truth = f.value_at_model(&truth.model).unwrap();
            worst = worst.max(res.objective_value - at_truth);
            fixtures += 1;
        }
    }
    outcome(
        worst <= 1e-9,
        format!("{fixtures} fixtures, max objective(fit) - objective(truth) = {worst:.2e}"),
    )
}

fn c9_encoding() -> Outcome {
    let spec = GeneratorSpec {
        widths: vec![1, 2, 3, 4, 5],
        depths: vec![0, 2, 4, 8, 16],
        circuits_per_shape: 8,
        two_qubit_density: 0.6,
        two_qubit_gates: vec!["CX".into(), "CZ".into()],
        seed: 9,
        ..GeneratorSpec::default()
    };
    let circuits = generate_circuits(&spec).unwrap();
    let map = ClassMap::default();
    let (n, d_max) = (6, 20);
    let mut tensors = Vec::new();
    let mut placement_ok = true;
    let mut reshape_ok = true;
    for g in &circuits {
        let c = &g.circuit;
        let t = encode_circuit(c, n, d_max, &map).unwrap();
        placement_ok &= decode(&t, c.width(), c.depth()).unwrap() == placement(c, &map).unwrap();
        let r = reshape_to_three_channels(&t, None).unwrap();
        let back = unreshape(&r, t.shape).unwrap();
        reshape_ok &= back
            .values
            .iter()
            .zip(&t.values)
            .all(|(a, b)| a.to_bits() == b.to_bits());
        let mut orig: Vec<u32> = t.values.iter().map(|v| v.to_bits()).collect();
        let mut re: Vec<u32> = r.values[..orig.len()].iter().map(|v| v.to_bits()).collect();
        orig.sort_unstable();
        re.sort_unstable();
        reshape_ok &= orig == re && r.values[t.values.len()..].iter().all(|&v| v == 0.0);
        tensors.push(t);
    }
    let mut buf = Vec::new();
    write_tensors(&mut buf, [n, d_max, 10], &tensors).unwrap();
    let (_, read) = read_tensors(&buf[..], Some([n, d_max, 10])).unwrap();
    let file_ok = read.len() == tensors.len()
        && read.iter().zip(&tensors).all(|(a, b)| {
            a.values
                .iter()
                .zip(&b.values)
                .all(|(x, y)| x.to_bits() == y.to_bits())
        });
    outcome(
        circuits.len() == 200 && placement_ok && reshape_ok && file_ok,
        format!(
            "{} circuits: placement {placement_ok}, reshape {reshape_ok}, file {file_ok}",
            circuits.len()
        ),
    )
}

fn pipeline(dir: &std::path::Path, threads: usize) -> Vec<(String, Vec<u8>)> {
    let p = |f: &str| dir.join(f).to_string_lossy().into_owned();
    let t = threads.to_string();
    let steps: Vec<Vec<String>> = vec![
        vec![
            "generate",
            "--widths",
            "1,2,3",
            "--depths",
            "2,8,16",
            "--per-shape",
            "12",
            "--rule",
            "arity+readout+width",
            "--eps-readout",
            "0.02",
            "--shots",
            "512",
            "--seed",
            "11",
            "--out",
            &p("data.json"),
            "--truth",
            &p("truth.json"),
        ],
        vec![
            "fit",
            "--data",
            &p("data.json"),
            "--rule",
            "arity+readout+width",
            "--objective",
            "mle",
            "--bootstrap",
            "20",
            "--split",
            "0.8",
            "--seed",
            "11",
            "--out",
            &p("fit.json"),
        ],
        vec![
            "evaluate",
            "--model",
            &p("fit.json"),
            "--data",
            &p("data.json"),
            "--holdout",
            &p("fit.json"),
            "--out",
            &p("eval.csv"),
            "--summary",
            &p("summary.json"),
        ],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .collect();
    for s in steps {
        let args = ["ermkit".to_owned(), "--threads".to_owned(), t.clone()]
            .into_iter()
            .chain(s);
        assert_eq!(ermkit::cli::run(args), 0);
    }
    [
        "data.json",
        "truth.json",
        "fit.json",
        "eval.csv",
        "summary.json",
    ]
    .iter()
    .map(|f| (f.to_string(), std::fs::read(dir.join(f)).unwrap()))
    .collect()
}

fn c10_determinism() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let one = pipeline(a.path(), 1);
    let four = pipeline(b.path(), 4);
    let differing: Vec<_> = one
        .iter()
        .zip(&four)
        .filter(|(x, y)| x.1 != y.1)
        .map(|(x, _)| x.0.clone())
        .collect();
    outcome(
        differing.is_empty(),
        if differing.is_empty() {
            format!(
                "{} artifacts byte-identical with 1 and 4 workers",
                one.len()
            )
        } else {
            format!("differ: {}", differing.join(", "))
        },
    )
}

fn report(n: usize, name: &str, limit: Option<Duration>, run: impl FnOnce() -> Outcome) -> bool {
    let t0 = Instant::now();
    let o = run();
    let dt = t0.elapsed();
    let in_time = limit.is_none_or(|l| dt <= l);
    let pass = o.pass && in_time;
    println!(
        "criterion {n:>2} {name:<26} {} ({}; {:.2}s{})",
        if pass { "PASS" } else { "FAIL" },
        o.detail,
        dt.as_secs_f64(),
        if in_time { "" } else { ", over time budget" }
    );
    pass
}

fn main() {
    let secs = |s| Some(Duration::from_secs(s));
    let mut results = vec![
        report(1, "conversion exactness", secs(1), c1_conversion),
        report(2, "oracle equivalence", secs(30), c2_oracle),
        report(3, "noiseless lsq recovery", secs(60), c3_lsq),
    ];
    // criteria 4 and 6 share the same synthetic data
    let t0 = Instant::now();
    let (c4, c6) = c4_mle_and_c6_rb();
    let shared = t0.elapsed();
    let budget = |o: Outcome, limit: u64| {
        let within = shared <= Duration::from_secs(limit);
        outcome(
            o.pass && within,
            format!(
                "{}; shared run {:.2}s of {limit}s budget",
                o.detail,
                shared.as_secs_f64()
            ),
        )
    };
    results.push(report(4, "finite-shot mle recovery", None, || {
        budget(c4, 600)
    }));
    results.push(report(5, "gradient correctness", secs(60), c5_gradient));
    results.push(report(6, "erm vs rb consistency", None, || budget(c6, 600)));
    results.push(report(
        7,
        "volumetric grid/frontier",
        secs(1),
        c7_volumetric,
    ));
    results.push(report(8, "fit optimality", None, c8_optimality));
    results.push(report(9, "encoding round trip", secs(10), c9_encoding));
    results.push(report(10, "determinism", None, c10_determinism));
    let failed = results.iter().filter(|p| !**p).count();
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
