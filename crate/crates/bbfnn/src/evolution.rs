//! Variable-length chromosome encoding and the genetic operators of the
//! upper-level search: roulette selection, aligned one-point crossover on
//! flat chains, value mutation, and the neuron addition/elimination moves,
//! scored by a residual fitness and a parsimony-weighted fitness.
//!
//! A chromosome is an ordered list of genes, one per hidden unit, each gene
//! holding (center, width, p, q). Flattened, a chromosome of n genes is a
//! chain of 4·n reals; all length rules below are stated on that chain.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::beta::{solve_weights, BetaError, BetaNetwork, BetaUnit};
use crate::data::Dataset;
use crate::ConfigError;

#[derive(Debug, Error, PartialEq)]
pub enum EvolutionError {
    #[error("chromosome must hold between {n_min} and {n_max} genes, got {count}")]
    GeneCount {
        count: usize,
        n_min: usize,
        n_max: usize,
    },
    #[error("genes {first} and {second} are identical")]
    DuplicateGenes { first: usize, second: usize },
    #[error("flat chain length {len} is not a multiple of 4")]
    FlatLength { len: usize },
    #[error("gene {index}: {name} must be strictly positive and finite, got {value}")]
    GeneValue {
        index: usize,
        name: &'static str,
        value: f64,
    },
    #[error(transparent)]
    Beta(#[from] BetaError),
}

/// A closed interval used both for sampling and for clamping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueRange {
    pub lo: f64,
    pub hi: f64,
}

impl ValueRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self, ConfigError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(ConfigError::new(
                "range",
                format!("needs finite lo < hi, got [{lo}, {hi}]"),
            ));
        }
        Ok(ValueRange { lo, hi })
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.lo, self.hi)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        rng.gen_range(self.lo..=self.hi)
    }
}

/// Sampling domains for the four gene parameters. Width and both shape
/// exponents must have strictly positive lower bounds so every sampled gene
/// decodes to a valid unit.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamBounds {
    pub center_range: ValueRange,
    pub width_range: ValueRange,
    pub p_range: ValueRange,
    pub q_range: ValueRange,
}

impl ParamBounds {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let ranges = [
            ("center_range", &self.center_range),
            ("width_range", &self.width_range),
            ("p_range", &self.p_range),
            ("q_range", &self.q_range),
        ];
        for (name, r) in ranges {
            if !(r.lo.is_finite() && r.hi.is_finite() && r.lo < r.hi) {
                return Err(ConfigError::new(
                    name,
                    format!("needs finite lo < hi, got [{}, {}]", r.lo, r.hi),
                ));
            }
        }
        for (name, r) in &ranges[1..] {
            if !(r.lo > 0.0) {
                return Err(ConfigError::new(
                    *name,
                    format!("lower bound must be strictly positive, got {}", r.lo),
                ));
            }
        }
        Ok(())
    }
}

impl Default for ParamBounds {
    /// Centers over [-1, 1]; width capped at 1; shape exponents capped at 4.
    /// Lower floors keep decoded units well defined.
    fn default() -> Self {
        ParamBounds {
            center_range: ValueRange { lo: -1.0, hi: 1.0 },
            width_range: ValueRange { lo: 1e-3, hi: 1.0 },
            p_range: ValueRange { lo: 1e-3, hi: 4.0 },
            q_range: ValueRange { lo: 1e-3, hi: 4.0 },
        }
    }
}

/// One hidden unit's four parameters, in flat-chain order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gene {
    pub center: f64,
    pub width: f64,
    pub shape_p: f64,
    pub shape_q: f64,
}

impl Gene {
    fn sample<R: Rng + ?Sized>(bounds: &ParamBounds, rng: &mut R) -> Gene {
        Gene {
            center: bounds.center_range.sample(rng),
            width: bounds.width_range.sample(rng),
            shape_p: bounds.p_range.sample(rng),
            shape_q: bounds.q_range.sample(rng),
        }
    }
}

/// A variable-length individual: between n_min and n_max pairwise-distinct
/// genes. Distinctness is exact equality on all four fields; duplicates can
/// only arise by copying, so exact comparison suffices.
#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome {
    genes: Vec<Gene>,
}

impl Chromosome {
    pub fn new(genes: Vec<Gene>, n_min: usize, n_max: usize) -> Result<Self, EvolutionError> {
        if genes.len() < n_min || genes.len() > n_max {
            return Err(EvolutionError::GeneCount {
                count: genes.len(),
                n_min,
                n_max,
            });
        }
        for (index, g) in genes.iter().enumerate() {
            if !g.center.is_finite() {
                return Err(EvolutionError::GeneValue {
                    index,
                    name: "center",
                    value: g.center,
                });
            }
            for (name, value) in [
                ("width", g.width),
                ("shape_p", g.shape_p),
                ("shape_q", g.shape_q),
            ] {
                if !(value.is_finite() && value > 0.0) {
                    return Err(EvolutionError::GeneValue { index, name, value });
                }
            }
        }
        for second in 1..genes.len() {
            if let Some(first) = genes[..second].iter().position(|g| *g == genes[second]) {
                return Err(EvolutionError::DuplicateGenes { first, second });
            }
        }
        Ok(Chromosome { genes })
    }

    pub fn from_flat(values: &[f64], n_min: usize, n_max: usize) -> Result<Self, EvolutionError> {
        if values.len() % 4 != 0 {
            return Err(EvolutionError::FlatLength { len: values.len() });
        }
        Chromosome::new(genes_from_flat(values), n_min, n_max)
    }

    pub fn from_units(
        units: &[BetaUnit],
        n_min: usize,
        n_max: usize,
    ) -> Result<Self, EvolutionError> {
        let genes = units
            .iter()
            .map(|u| Gene {
                center: u.center(),
                width: u.width(),
                shape_p: u.shape_p(),
                shape_q: u.shape_q(),
            })
            .collect();
        Chromosome::new(genes, n_min, n_max)
    }

    pub fn genes(&self) -> &[Gene] {
        &self.genes
    }

    pub fn gene_count(&self) -> usize {
        self.genes.len()
    }

    pub fn flat_len(&self) -> usize {
        4 * self.genes.len()
    }

    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.flat_len());
        for g in &self.genes {
            out.extend_from_slice(&[g.center, g.width, g.shape_p, g.shape_q]);
        }
        out
    }

    /// One unit per gene, in order. Total because construction enforces
    /// positive width and shape exponents.
    pub fn decode(&self) -> Vec<BetaUnit> {
        self.genes
            .iter()
            .map(|g| {
                BetaUnit::new(g.center, g.width, g.shape_p, g.shape_q)
                    .expect("chromosome genes decode to valid units")
            })
            .collect()
    }
}

fn genes_from_flat(values: &[f64]) -> Vec<Gene> {
    values
        .chunks_exact(4)
        .map(|c| Gene {
            center: c[0],
            width: c[1],
            shape_p: c[2],
            shape_q: c[3],
        })
        .collect()
}

/// Settings for the GA phase.
#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub p_crossover: f64,
    pub p_mutation: f64,
    pub p_addition: f64,
    pub p_elimination: f64,
    pub crossover_retry_limit: usize,
    pub bounds: ParamBounds,
    pub seed: u64,
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.population_size == 0 {
            return Err(ConfigError::new("population_size", "must be at least 1"));
        }
        if self.generations == 0 {
            return Err(ConfigError::new("generations", "must be at least 1"));
        }
        if self.n_min == 0 {
            return Err(ConfigError::new("n_min", "must be at least 1"));
        }
        if self.n_min > self.n_max {
            return Err(ConfigError::new(
                "n_max",
                format!("must be >= n_min = {}, got {}", self.n_min, self.n_max),
            ));
        }
        let probabilities = [
            ("p_crossover", self.p_crossover),
            ("p_mutation", self.p_mutation),
            ("p_addition", self.p_addition),
            ("p_elimination", self.p_elimination),
        ];
        for (name, p) in probabilities {
            if !(p >= 0.0 && p <= 1.0) {
                return Err(ConfigError::new(
                    name,
                    format!("must be a probability in [0, 1], got {p}"),
                ));
            }
        }
        if self.crossover_retry_limit == 0 {
            return Err(ConfigError::new(
                "crossover_retry_limit",
                "must be at least 1",
            ));
        }
        self.bounds.validate()
    }
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 50,
            generations: 100,
            n_min: 5,
            n_max: 20,
            p_crossover: 0.85,
            p_mutation: 0.03,
            p_addition: 0.2,
            p_elimination: 0.2,
            crossover_retry_limit: 10,
            bounds: ParamBounds::default(),
            seed: 1,
        }
    }
}

/// Per-run operator statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GaStats {
    /// crossovers that fired but returned the parents unchanged after
    /// exhausting cut retries or failing the distinctness minimum
    pub crossover_fallbacks: u64,
}

/// What a crossover call did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossoverOutcome {
    /// children were produced by a valid cut pair
    Applied,
    /// the probability gate did not fire
    Skipped,
    /// the gate fired but no valid children could be built
    Fallback,
}

/// A fixed-key stream RNG. Distinct (seed, stream, tag) triples give
/// independent, platform-stable sequences, which is what makes whole runs
/// reproducible from a single seed.
pub fn stream_rng(seed: u64, stream: u64, tag: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&stream.to_le_bytes());
    key[16..24].copy_from_slice(&tag.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// A fresh individual: gene count uniform in [n_min, n_max], every value
/// uniform in its bounds range, duplicates resampled.
pub fn random_chromosome<R: Rng + ?Sized>(cfg: &GaConfig, rng: &mut R) -> Chromosome {
    let count = rng.gen_range(cfg.n_min..=cfg.n_max);
    let mut genes: Vec<Gene> = Vec::with_capacity(count);
    for _ in 0..count {
        let mut g = Gene::sample(&cfg.bounds, rng);
        while genes.contains(&g) {
            g = Gene::sample(&cfg.bounds, rng);
        }
        genes.push(g);
    }
    Chromosome { genes }
}

/// Sum of squared residuals of the least-squares-fitted network over the
/// training set. Wholly determined by (chromosome, dataset, ridge): gene
/// order does not matter and no randomness is involved.
pub fn fitness1(
    chrom: &Chromosome,
    train: &Dataset,
    ridge: f64,
) -> Result<f64, EvolutionError> {
    let units = chrom.decode();
    let weights = solve_weights(&units, train, ridge)?;
    let net = BetaNetwork { units, weights };
    Ok(train
        .iter()
        .map(|s| {
            let r = s.target - net.forward(s.x);
            r * r
        })
        .sum())
}

/// Parsimony-weighted score: `(ln(n_max − n_c + 1) + ln(n_c − n_min + 1)) /
/// (1 + f1)`. Highest for mid-sized networks with small residuals.
pub fn fitness2(f1: f64, n_c: usize, cfg: &GaConfig) -> Result<f64, EvolutionError> {
    if n_c < cfg.n_min || n_c > cfg.n_max {
        return Err(EvolutionError::GeneCount {
            count: n_c,
            n_min: cfg.n_min,
            n_max: cfg.n_max,
        });
    }
    let above = (cfg.n_max - n_c + 1) as f64;
    let below = (n_c - cfg.n_min + 1) as f64;
    Ok((above.ln() + below.ln()) / (1.0 + f1))
}

/// Both fitness values for one chromosome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub fitness1: f64,
    pub fitness2: f64,
}

/// Scores every member. Evaluation is pure per member, so results are in
/// chromosome-index order whether computed serially or in parallel.
pub fn evaluate_population(
    population: &[Chromosome],
    train: &Dataset,
    cfg: &GaConfig,
    ridge: f64,
) -> Result<Vec<Score>, EvolutionError> {
    population
        .iter()
        .map(|c| {
            let f1 = fitness1(c, train, ridge)?;
            let f2 = fitness2(f1, c.gene_count(), cfg)?;
            Ok(Score {
                fitness1: f1,
                fitness2: f2,
            })
        })
        .collect()
}

/// Fitness-proportional index selection. All-zero scores fall back to a
/// uniform draw.
pub fn roulette_select<R: Rng + ?Sized>(fitness2_values: &[f64], rng: &mut R) -> usize {
    assert!(
        !fitness2_values.is_empty(),
        "selection over an empty population"
    );
    let total: f64 = fitness2_values.iter().sum();
    if !(total > 0.0) {
        return rng.gen_range(0..fitness2_values.len());
    }
    let mut remaining = rng.gen::<f64>() * total;
    for (i, f) in fitness2_values.iter().enumerate() {
        remaining -= f;
        if remaining < 0.0 {
            return i;
        }
    }
    fitness2_values.len() - 1
}

/// Cuts chain a at p1 and chain b at p2 and swaps tails:
/// child1 = b[..p2] ++ a[p1..] (length l1 − p1 + p2),
/// child2 = a[..p1] ++ b[p2..] (length l2 − p2 + p1).
pub(crate) fn splice(fa: &[f64], fb: &[f64], p1: usize, p2: usize) -> (Vec<f64>, Vec<f64>) {
    let child1 = fb[..p2].iter().chain(&fa[p1..]).copied().collect();
    let child2 = fa[..p1].iter().chain(&fb[p2..]).copied().collect();
    (child1, child2)
}

fn dedup_genes(values: &[f64]) -> Vec<Gene> {
    let mut kept: Vec<Gene> = Vec::with_capacity(values.len() / 4);
    for g in genes_from_flat(values) {
        if !kept.contains(&g) {
            kept.push(g);
        }
    }
    kept
}

/// One-point crossover on the flat chains. The cut in b must fall at the
/// same offset within a gene as the cut in a (p2 ≡ p1 mod 4), so children
/// stay well formed. Cut pairs whose children would violate the length
/// bounds are retried with a fresh p2 up to `crossover_retry_limit` times;
/// when no valid children emerge the parents are returned unchanged.
pub fn crossover<R: Rng + ?Sized>(
    a: &Chromosome,
    b: &Chromosome,
    cfg: &GaConfig,
    rng: &mut R,
) -> (Chromosome, Chromosome, CrossoverOutcome) {
    if !(rng.gen::<f64>() < cfg.p_crossover) {
        return (a.clone(), b.clone(), CrossoverOutcome::Skipped);
    }

    let fa = a.flat();
    let fb = b.flat();
    let (l1, l2) = (fa.len(), fb.len());
    let p1 = rng.gen_range(1..l1);
    let r = p1 % 4;

    // positions in b sharing p1's within-gene offset, strictly inside the chain
    let k_min = if r == 0 { 1 } else { 0 };
    let k_max = (l2 - 1 - r) / 4;
    if k_max < k_min {
        return (a.clone(), b.clone(), CrossoverOutcome::Fallback);
    }

    let lo = 4 * cfg.n_min;
    let hi = 4 * cfg.n_max;
    for _ in 0..cfg.crossover_retry_limit {
        let p2 = 4 * rng.gen_range(k_min..=k_max) + r;
        let len1 = l1 - p1 + p2;
        let len2 = l2 - p2 + p1;
        if !(lo..=hi).contains(&len1) || !(lo..=hi).contains(&len2) {
            continue;
        }
        let (flat1, flat2) = splice(&fa, &fb, p1, p2);
        let genes1 = dedup_genes(&flat1);
        let genes2 = dedup_genes(&flat2);
        if genes1.len() < cfg.n_min || genes2.len() < cfg.n_min {
            return (a.clone(), b.clone(), CrossoverOutcome::Fallback);
        }
        return (
            Chromosome { genes: genes1 },
            Chromosome { genes: genes2 },
            CrossoverOutcome::Applied,
        );
    }
    (a.clone(), b.clone(), CrossoverOutcome::Fallback)
}

fn enforce_distinct<R: Rng + ?Sized>(genes: &mut [Gene], bounds: &ParamBounds, rng: &mut R) {
    for j in 1..genes.len() {
        while genes[..j].contains(&genes[j]) {
            genes[j] = Gene::sample(bounds, rng);
        }
    }
}

/// Replaces each flat value, independently with probability p_mutation, by a
/// fresh draw from that parameter's range. Gene count never changes.
pub fn mutate<R: Rng + ?Sized>(chrom: &Chromosome, cfg: &GaConfig, rng: &mut R) -> Chromosome {
    let mut genes = chrom.genes.clone();
    for g in genes.iter_mut() {
        if rng.gen::<f64>() < cfg.p_mutation {
            g.center = cfg.bounds.center_range.sample(rng);
        }
        if rng.gen::<f64>() < cfg.p_mutation {
            g.width = cfg.bounds.width_range.sample(rng);
        }
        if rng.gen::<f64>() < cfg.p_mutation {
            g.shape_p = cfg.bounds.p_range.sample(rng);
        }
        if rng.gen::<f64>() < cfg.p_mutation {
            g.shape_q = cfg.bounds.q_range.sample(rng);
        }
    }
    enforce_distinct(&mut genes, &cfg.bounds, rng);
    Chromosome { genes }
}

/// With probability p_addition, appends one fresh random gene; skipped at
/// n_max so the length bound holds.
pub fn add_gene<R: Rng + ?Sized>(chrom: &Chromosome, cfg: &GaConfig, rng: &mut R) -> Chromosome {
    let fires = rng.gen::<f64>() < cfg.p_addition;
    if !fires || chrom.gene_count() >= cfg.n_max {
        return chrom.clone();
    }
    let mut genes = chrom.genes.clone();
    let mut g = Gene::sample(&cfg.bounds, rng);
    while genes.contains(&g) {
        g = Gene::sample(&cfg.bounds, rng);
    }
    genes.push(g);
    Chromosome { genes }
}

/// With probability p_elimination, removes one uniformly chosen gene;
/// skipped at n_min.
pub fn eliminate_gene<R: Rng + ?Sized>(
    chrom: &Chromosome,
    cfg: &GaConfig,
    rng: &mut R,
) -> Chromosome {
    let fires = rng.gen::<f64>() < cfg.p_elimination;
    if !fires || chrom.gene_count() <= cfg.n_min {
        return chrom.clone();
    }
    let mut genes = chrom.genes.clone();
    let victim = rng.gen_range(0..genes.len());
    genes.remove(victim);
    Chromosome { genes }
}

/// Breeds a full replacement population: the single best-scoring member is
/// carried over unchanged, and the remaining slots are filled by roulette
/// pairs run through crossover, mutation, addition, and elimination, in
/// that order. Output size equals input size.
pub fn next_generation<R: Rng + ?Sized>(
    population: &[Chromosome],
    train: &Dataset,
    cfg: &GaConfig,
    ridge: f64,
    rng: &mut R,
    stats: &mut GaStats,
) -> Result<Vec<Chromosome>, EvolutionError> {
    let scores = evaluate_population(population, train, cfg, ridge)?;
    let mut elite = 0;
    for (i, s) in scores.iter().enumerate() {
        if s.fitness2 > scores[elite].fitness2 {
            elite = i;
        }
    }
    let f2: Vec<f64> = scores.iter().map(|s| s.fitness2).collect();

    let mut next = Vec::with_capacity(population.len());
    next.push(population[elite].clone());
    while next.len() < population.len() {
        let i = roulette_select(&f2, rng);
        let j = roulette_select(&f2, rng);
        let (c1, c2, outcome) = crossover(&population[i], &population[j], cfg, rng);
        if outcome == CrossoverOutcome::Fallback {
            stats.crossover_fallbacks += 1;
        }
        for child in [c1, c2] {
            if next.len() >= population.len() {
                break;
            }
            let child = mutate(&child, cfg, rng);
            let child = add_gene(&child, cfg, rng);
            let child = eliminate_gene(&child, cfg, rng);
            next.push(child);
        }
    }
    Ok(next)
}
