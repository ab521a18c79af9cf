//! The release gate: one test per shipped guarantee, numbered 1-7.
//! Number 6 (byte-identical CLI output) lives in the CLI crate's
//! acceptance suite; everything else is exercised here against the
//! library API alone. Each test prints a single PASS line with its
//! measured margins, and every assert message carries the matching
//! FAIL tag.

use std::time::Instant;

use bbfnn::data::{g2_eval, sample_interleaved, sample_uniform, Dataset};
use bbfnn::evolution::{
    evaluate_population, fitness1, next_generation, random_chromosome, stream_rng, Chromosome,
    GaStats, ValueRange,
};
use bbfnn::{
    compare_runs, gradient_check, run, solve_weights, BetaNetwork, BetaUnit, GaConfig,
    GradientConfig, RunConfig,
};
use rand::seq::SliceRandom;
use rand::Rng;

fn g2_train() -> Dataset {
    sample_uniform(g2_eval, -1.0, 1.0, 201, "g2-train").unwrap()
}

fn random_unit<R: Rng>(rng: &mut R) -> BetaUnit {
    let center = ValueRange { lo: -1.0, hi: 1.0 }.sample(rng);
    let width = ValueRange { lo: 1e-3, hi: 1.0 }.sample(rng);
    let shape = ValueRange { lo: 1e-3, hi: 4.0 };
    BetaUnit::new(center, width, shape.sample(rng), shape.sample(rng)).unwrap()
}

#[test]
fn c1_kernel_identities() {
    let started = Instant::now();
    let mut rng = stream_rng(11, 0, 40);
    let mut worst_product = 0.0f64;
    let mut worst_reciprocal = 0.0f64;
    let cases = 1000;

    for _ in 0..cases {
        let unit = random_unit(&mut rng);
        let (x0, x1) = unit.support();

        assert_eq!(
            unit.eval(unit.center()),
            1.0,
            "FAIL [1/7] kernel identities: center of {unit:?} is not exactly 1"
        );

        let len = x1 - x0;
        for x in [x0, x1, x0 - 0.5 * len, x1 + 0.5 * len, x0 - 10.0, x1 + 10.0] {
            assert_eq!(
                unit.eval(x),
                0.0,
                "FAIL [1/7] kernel identities: {unit:?} is nonzero at {x} outside its support"
            );
        }

        // strictly interior point, clear of the rounding zone at the edges
        let u = ValueRange { lo: 1e-3, hi: 1.0 - 1e-3 }.sample(&mut rng);
        let x = x0 + u * len;
        let direct = unit.eval(x);
        let ab = unit.ab_factors(x).unwrap();
        let (p, q, d) = (unit.shape_p(), unit.shape_q(), unit.width());

        let via_ab = (ab.b * p * d).powf(-p) * (ab.a * q * d).powf(-q);
        let rel = (direct - via_ab).abs() / direct.abs().max(via_ab.abs());
        worst_product = worst_product.max(rel);
        assert!(
            rel <= 1e-12,
            "FAIL [1/7] kernel identities: product form differs by {rel:e} at {unit:?}, x={x}"
        );

        let lhs = 1.0 / ab.a + 1.0 / ab.b;
        let rhs = (p + q) * d;
        let rel = (lhs - rhs).abs() / rhs.abs();
        worst_reciprocal = worst_reciprocal.max(rel);
        assert!(
            rel <= 1e-12,
            "FAIL [1/7] kernel identities: 1/A + 1/B differs from (p+q)d by {rel:e} at {unit:?}"
        );
    }

    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 1.0,
        "FAIL [1/7] kernel identities: took {elapsed:?}, limit is 1s"
    );
    println!(
        "PASS [1/7] kernel identities: {cases} units, worst product-form error {worst_product:e}, \
         worst reciprocal-sum error {worst_reciprocal:e}, {elapsed:?}"
    );
}

#[test]
fn c2_gradient_oracle() {
    let started = Instant::now();
    let mut rng = stream_rng(12, 0, 40);
    let step = 1e-6;
    let cases = 200;
    let mut worst_right = 0.0f64;
    let mut worst_wrong = 0.0f64;

    for _ in 0..cases {
        let center = ValueRange { lo: -1.0, hi: 1.0 }.sample(&mut rng);
        let width = ValueRange { lo: 0.1, hi: 1.0 }.sample(&mut rng);
        let shape = ValueRange { lo: 0.5, hi: 4.0 };
        let unit = BetaUnit::new(center, width, shape.sample(&mut rng), shape.sample(&mut rng))
            .unwrap();
        let (x0, x1) = unit.support();
        // keep x more than 1e-3 from both edges; supports are at least 0.1 wide
        let u = ValueRange { lo: 0.05, hi: 0.95 }.sample(&mut rng);
        let x = x0 + u * (x1 - x0);
        let w = ValueRange { lo: -2.0, hi: 2.0 }.sample(&mut rng);

        worst_right = worst_right.max(gradient_check(&unit, w, x, step).unwrap());

        // the center partial with the pB term's sign flipped, against the
        // same central finite difference
        let (p, q) = (unit.shape_p(), unit.shape_q());
        let ab = unit.ab_factors(x).unwrap();
        let wrong = unit.eval(x) * (p + q) * (q * ab.a + p * ab.b);
        let up = BetaUnit::new(center + step, width, p, q).unwrap().eval(x);
        let down = BetaUnit::new(center - step, width, p, q).unwrap().eval(x);
        let fd = (up - down) / (2.0 * step);
        let rel = (wrong - fd).abs() / wrong.abs().max(fd.abs()).max(1.0);
        worst_wrong = worst_wrong.max(rel);
    }

    assert!(
        worst_right < 1e-5,
        "FAIL [2/7] gradient oracle: worst analytic-vs-FD error {worst_right:e} is not below 1e-5"
    );
    assert!(
        worst_wrong > 0.1,
        "FAIL [2/7] gradient oracle: the sign-flipped center partial still matches FD \
         (worst error {worst_wrong:e}); the derivation check has lost its teeth"
    );
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 2.0,
        "FAIL [2/7] gradient oracle: took {elapsed:?}, limit is 2s"
    );
    println!(
        "PASS [2/7] gradient oracle: {cases} cases, worst error {worst_right:e}, \
         sign-flipped variant off by {worst_wrong:.3}, {elapsed:?}"
    );
}

#[test]
fn c3_ga_structural_invariants() {
    let started = Instant::now();
    let train = g2_train();
    let cfg = GaConfig {
        seed: 1,
        ..GaConfig::default()
    };
    assert_eq!((cfg.population_size, cfg.generations), (50, 100));
    assert_eq!((cfg.n_min, cfg.n_max), (5, 20));

    let mut rng = stream_rng(cfg.seed, 0, 0);
    let mut population: Vec<Chromosome> = (0..cfg.population_size)
        .map(|_| random_chromosome(&cfg, &mut rng))
        .collect();
    let mut stats = GaStats::default();
    let mut previous_best = f64::NEG_INFINITY;

    for generation in 0..cfg.generations {
        assert_eq!(
            population.len(),
            cfg.population_size,
            "FAIL [3/7] GA invariants: population size changed at generation {generation}"
        );
        for (i, chrom) in population.iter().enumerate() {
            let len = chrom.flat_len();
            assert!(
                len % 4 == 0 && (4 * cfg.n_min..=4 * cfg.n_max).contains(&len),
                "FAIL [3/7] GA invariants: member {i} of generation {generation} \
                 has flat length {len}"
            );
            let genes = chrom.genes();
            for a in 0..genes.len() {
                for b in a + 1..genes.len() {
                    assert_ne!(
                        genes[a], genes[b],
                        "FAIL [3/7] GA invariants: member {i} of generation {generation} \
                         repeats a gene"
                    );
                }
            }
        }

        let scores = evaluate_population(&population, &train, &cfg, 1e-10).unwrap();
        let best = scores.iter().map(|s| s.fitness2).fold(f64::MIN, f64::max);
        assert!(
            best >= previous_best,
            "FAIL [3/7] GA invariants: best fitness2 dropped from {previous_best} to {best} \
             at generation {generation}"
        );
        previous_best = best;

        let mut breed_rng = stream_rng(cfg.seed, generation as u64 + 1, 1);
        population =
            next_generation(&population, &train, &cfg, 1e-10, &mut breed_rng, &mut stats).unwrap();
    }

    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "FAIL [3/7] GA invariants: took {elapsed:?}, limit is 60s"
    );
    println!(
        "PASS [3/7] GA invariants: {} generations of {} members, best fitness2 ended at \
         {previous_best:.4}, {elapsed:?}",
        cfg.generations, cfg.population_size
    );
}

#[test]
fn c4_least_squares_oracle() {
    let mut rng = stream_rng(14, 0, 40);
    let mut worst_gap = f64::NEG_INFINITY;

    for instance in 0..20 {
        let n_units = rng.gen_range(1..=5);
        let n_samples = rng.gen_range(1..=10);
        let units: Vec<BetaUnit> = (0..n_units).map(|_| random_unit(&mut rng)).collect();
        let samples: Vec<bbfnn::Sample> = (0..n_samples)
            .map(|_| bbfnn::Sample {
                x: ValueRange { lo: -1.0, hi: 1.0 }.sample(&mut rng),
                target: ValueRange { lo: -2.0, hi: 2.0 }.sample(&mut rng),
            })
            .collect();
        let data = Dataset::new(samples, "oracle");

        let weights = solve_weights(&units, &data, 0.0).unwrap();
        let residual = |w: &[f64]| -> f64 {
            data.iter()
                .map(|s| {
                    let y: f64 = units.iter().zip(w).map(|(u, wi)| wi * u.eval(s.x)).sum();
                    (s.target - y).powi(2)
                })
                .sum()
        };
        let base = residual(&weights);

        for _ in 0..1000 {
            let perturbed: Vec<f64> = weights
                .iter()
                .map(|w| w + ValueRange { lo: -1e-3, hi: 1e-3 }.sample(&mut rng))
                .collect();
            let other = residual(&perturbed);
            worst_gap = worst_gap.max(base - other);
            assert!(
                base <= other + 1e-10 * (1.0 + base),
                "FAIL [4/7] least-squares oracle: instance {instance} found a perturbation \
                 with residual {other} below the solved {base}"
            );
        }
    }

    // a square design: one unit per sample, each centered on its sample
    let xs = [-0.8, -0.4, 0.0, 0.4, 0.8];
    let units: Vec<BetaUnit> = xs
        .iter()
        .map(|&c| BetaUnit::new(c, 1.0, 2.0, 2.0).unwrap())
        .collect();
    let samples: Vec<bbfnn::Sample> = xs
        .iter()
        .map(|&x| bbfnn::Sample {
            x,
            target: ValueRange { lo: -2.0, hi: 2.0 }.sample(&mut rng),
        })
        .collect();
    let data = Dataset::new(samples, "square");
    let weights = solve_weights(&units, &data, 0.0).unwrap();
    let net = BetaNetwork::new(units, weights).unwrap();
    let interpolation: f64 = data
        .iter()
        .map(|s| (s.target - net.forward(s.x)).powi(2))
        .sum();
    assert!(
        interpolation < 1e-9,
        "FAIL [4/7] least-squares oracle: square design left residual {interpolation:e}"
    );

    println!(
        "PASS [4/7] least-squares oracle: 20 instances x 1000 perturbations \
         (best improvement attempt {worst_gap:e}), square-design residual {interpolation:e}"
    );
}

#[test]
fn c5_end_to_end_benchmark() {
    let cfg = RunConfig {
        ga: GaConfig::default(),
        grad: GradientConfig {
            learning_rate: 2e-5,
            max_iterations: 20_000,
            ..GradientConfig::default()
        },
        ridge: 1e-10,
        stop_error: 0.01,
    };
    let train = g2_train();
    let test = sample_interleaved(g2_eval, -1.0, 1.0, 126, "g2-test").unwrap();

    let mut reports = Vec::new();
    for seed in 1..=5u64 {
        let mut run_cfg = cfg.clone();
        run_cfg.ga.seed = seed;
        let started = Instant::now();
        let report = run(&run_cfg, &train, &test).unwrap();
        let elapsed = started.elapsed();
        assert!(
            elapsed.as_secs_f64() < 120.0,
            "FAIL [5/7] benchmark: seed {seed} took {elapsed:?}, limit is 2 minutes"
        );

        assert!(
            (5..=20).contains(&report.n_units),
            "FAIL [5/7] benchmark: seed {seed} ended with {} units",
            report.n_units
        );
        let generalization = report.generalization_error.unwrap();
        assert!(
            generalization <= 2.0 * report.training_error,
            "FAIL [5/7] benchmark: seed {seed} generalizes at {generalization} vs \
             training {}, beyond the 2x budget",
            report.training_error
        );
        println!(
            "  seed {seed}: training {:.6}, generalization {generalization:.6}, {} units, \
             {} generations, {} epochs, {elapsed:.2?}",
            report.training_error, report.n_units, report.generations_run, report.grad_iterations
        );
        reports.push(report);
    }

    let summary = compare_runs(&reports).unwrap();
    assert!(
        summary.training_error.median <= 0.05,
        "FAIL [5/7] benchmark: median training error {} is not within 0.05",
        summary.training_error.median
    );
    assert!(
        summary.training_error.min <= 0.01,
        "FAIL [5/7] benchmark: best training error {} is not within 0.01",
        summary.training_error.min
    );
    println!(
        "PASS [5/7] benchmark: 5 seeds, median training error {:.4}, best {:.4}, \
         units {}..{}",
        summary.training_error.median,
        summary.training_error.min,
        summary.n_units.min,
        summary.n_units.max
    );
}

#[test]
fn c7_permutation_invariance() {
    let train = g2_train();
    let cfg = GaConfig::default();
    let mut rng = stream_rng(17, 0, 40);
    let cases = 100;
    let mut worst_f1 = 0.0f64;
    let mut worst_out = 0.0f64;

    for _ in 0..cases {
        let chrom = random_chromosome(&cfg, &mut rng);
        let mut genes = chrom.genes().to_vec();
        genes.shuffle(&mut rng);
        let permuted = Chromosome::new(genes, cfg.n_min, cfg.n_max).unwrap();

        let f_a = fitness1(&chrom, &train, 1e-10).unwrap();
        let f_b = fitness1(&permuted, &train, 1e-10).unwrap();
        let gap = (f_a - f_b).abs();
        worst_f1 = worst_f1.max(gap / (1.0 + f_a.abs()));
        assert!(
            gap <= 1e-12 * (1.0 + f_a.abs()),
            "FAIL [7/7] permutation invariance: fitness1 moved from {f_a} to {f_b}"
        );

        let units_a = chrom.decode();
        let weights_a = solve_weights(&units_a, &train, 1e-10).unwrap();
        let net_a = BetaNetwork::new(units_a, weights_a).unwrap();
        let units_b = permuted.decode();
        let weights_b = solve_weights(&units_b, &train, 1e-10).unwrap();
        let net_b = BetaNetwork::new(units_b, weights_b).unwrap();
        for s in train.iter() {
            let (a, b) = (net_a.forward(s.x), net_b.forward(s.x));
            let gap = (a - b).abs();
            worst_out = worst_out.max(gap / (1.0 + a.abs()));
            assert!(
                gap <= 1e-12 * (1.0 + a.abs()),
                "FAIL [7/7] permutation invariance: outputs at x={} differ: {a} vs {b}",
                s.x
            );
        }
    }

    println!(
        "PASS [7/7] permutation invariance: {cases} chromosomes, worst fitness1 shift \
         {worst_f1:e}, worst output shift {worst_out:e}"
    );
}
