//! Real-coded genetic algorithm: elitism, roulette parents, one-point crossover,
//! per-gene uniform mutation. Randomness is drawn only by the coordinator, so
//! the evaluation order of a generation never changes the result.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::CalibrationError;

/// Fraction of the fitness range added to every roulette weight.
pub const ROULETTE_EPSILON: f64 = 0.01;

/// Something to minimise over a box.
pub trait Objective: Sync {
    fn bounds(&self) -> Vec<(f64, f64)>;
    /// Lower is better; must be finite.
    fn fitness(&self, genome: &[f64]) -> f64;
    /// Fingerprint stored in checkpoints to refuse resuming a different problem.
    fn fingerprint(&self) -> String;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Crossover {
    OnePoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mutation {
    /// Each gene independently redrawn uniformly within its bounds.
    UniformByGene,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    Roulette,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaSettings {
    pub max_iterations: usize,
    pub population_size: usize,
    /// Per-gene probability.
    pub mutation_probability: f64,
    pub elit_ratio: f64,
    pub parents_portion: f64,
    pub crossover: Crossover,
    pub mutation: Mutation,
    pub selection: Selection,
    pub seed: u64,
}

impl GaSettings {
    /// Defaults for a genome of `n` genes.
    pub fn defaults_for(n: usize) -> Self {
        let population_size = 160;
        Self {
            max_iterations: 1500,
            population_size,
            mutation_probability: 0.33 / n as f64,
            elit_ratio: 1.0 / population_size as f64,
            parents_portion: 0.2,
            crossover: Crossover::OnePoint,
            mutation: Mutation::UniformByGene,
            selection: Selection::Roulette,
            seed: 0,
        }
    }

    /// Changes the population size, keeping one elite per population as the default does.
    pub fn with_population(mut self, population_size: usize) -> Self {
        self.population_size = population_size;
        self.elit_ratio = 1.0 / population_size as f64;
        self
    }

    pub fn elite_count(&self) -> usize {
        ((self.elit_ratio * self.population_size as f64).round() as usize).max(1)
    }

    pub fn parent_count(&self) -> usize {
        ((self.parents_portion * self.population_size as f64).round() as usize)
            .max(self.elite_count())
    }

    pub fn validate(&self) -> Result<(), CalibrationError> {
        let bad = |m: &str| Err(CalibrationError::Invalid(m.to_string()));
        if self.population_size < 4 {
            return bad("population size must be at least 4");
        }
        if !(self.parents_portion > 0.0 && self.parents_portion < 1.0) {
            return bad("parents portion must lie in (0, 1)");
        }
        if !(self.mutation_probability >= 0.0 && self.mutation_probability <= 1.0) {
            return bad("mutation probability must lie in [0, 1]");
        }
        if !(self.elit_ratio >= 0.0 && self.elit_ratio < 1.0) {
            return bad("elite ratio must lie in [0, 1)");
        }
        let parents = (self.parents_portion * self.population_size as f64).round() as usize;
        if self.elite_count() > parents {
            return bad("elite count exceeds the parent count");
        }
        if parents >= self.population_size {
            return bad("parent pool leaves no room for offspring");
        }
        Ok(())
    }

    /// Advice when the population size is outside the usual range.
    pub fn population_warning(&self) -> Option<String> {
        (!(100..=200).contains(&self.population_size)).then(|| {
            format!(
                "population size {} is outside the recommended range 100 to 200; \
                 a multiple of the worker count keeps every worker busy",
                self.population_size
            )
        })
    }
}

/// Index drawn by minimisation roulette: weight `(max − f) + ε·(max − min)`.
pub fn roulette_select<R: Rng + ?Sized>(fitnesses: &[f64], rng: &mut R) -> usize {
    assert!(
        !fitnesses.is_empty(),
        "roulette needs at least one candidate"
    );
    let weights = roulette_weights(fitnesses);
    let total: f64 = weights.iter().sum();
    let mut x = rng.random::<f64>() * total;
    for (k, w) in weights.iter().enumerate() {
        if x < *w {
            return k;
        }
        x -= w;
    }
    fitnesses.len() - 1
}

/// Selection weights; all equal when the fitnesses are.
pub fn roulette_weights(fitnesses: &[f64]) -> Vec<f64> {
    let max = fitnesses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = fitnesses.iter().copied().fold(f64::INFINITY, f64::min);
    let range = max - min;
    if !(range > 0.0) {
        return vec![1.0; fitnesses.len()];
    }
    fitnesses
        .iter()
        .map(|f| (max - f) + ROULETTE_EPSILON * range)
        .collect()
}

/// Swaps the tails of two genomes from a uniformly drawn cut in `1..n`.
pub fn one_point_crossover<R: Rng + ?Sized>(
    a: &[f64],
    b: &[f64],
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>) {
    let n = a.len();
    if n < 2 {
        return (a.to_vec(), b.to_vec());
    }
    let cut = rng.random_range(1..n);
    let mut c = a[..cut].to_vec();
    c.extend_from_slice(&b[cut..]);
    let mut d = b[..cut].to_vec();
    d.extend_from_slice(&a[cut..]);
    (c, d)
}

pub fn mutate<R: Rng + ?Sized>(genome: &mut [f64], bounds: &[(f64, f64)], p: f64, rng: &mut R) {
    for (g, &(lo, hi)) in genome.iter_mut().zip(bounds) {
        if rng.random::<f64>() < p {
            *g = rng.random_range(lo..=hi);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub genome: Vec<f64>,
    pub fitness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    /// Best score seen so far.
    pub best_so_far: f64,
}

/// Position of the ChaCha stream, enough to rebuild the generator exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    pub seed: [u8; 32],
    pub stream: u64,
    pub word_pos: u128,
}

impl RngState {
    fn capture(rng: &ChaCha8Rng) -> Self {
        Self {
            seed: rng.get_seed(),
            stream: rng.get_stream(),
            word_pos: rng.get_word_pos(),
        }
    }

    fn restore(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(self.word_pos);
        rng
    }
}

pub const CHECKPOINT_VERSION: u32 = 1;

/// Complete evolution state after a generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub problem_hash: String,
    pub settings: GaSettings,
    /// Last completed generation; 0 is the initial population.
    pub generation: usize,
    /// Sorted, best first.
    pub population: Vec<Individual>,
    pub rng: RngState,
    pub best: Individual,
    pub history: Vec<GenerationRecord>,
}

impl Checkpoint {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("checkpoint serialises")
    }

    pub fn from_json(text: &str) -> Result<Self, CalibrationError> {
        let c: Checkpoint =
            serde_json::from_str(text).map_err(|e| CalibrationError::Checkpoint(e.to_string()))?;
        if c.version != CHECKPOINT_VERSION {
            return Err(CalibrationError::Checkpoint(format!(
                "unsupported checkpoint version {}",
                c.version
            )));
        }
        if c.population.is_empty() {
            return Err(CalibrationError::Checkpoint("empty population".into()));
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaOutcome {
    pub best: Individual,
    pub history: Vec<GenerationRecord>,
    /// Final state; resuming from it continues the run.
    pub checkpoint: Checkpoint,
    /// True when `max_iterations` was reached.
    pub finished: bool,
}

fn evaluate<O: Objective + ?Sized>(objective: &O, genomes: Vec<Vec<f64>>) -> Vec<Individual> {
    crate::parallel::install(|| {
        genomes
            .into_par_iter()
            .map(|genome| {
                let fitness = objective.fitness(&genome);
                Individual { genome, fitness }
            })
            .collect()
    })
}

fn sort(pop: &mut [Individual]) {
    pop.sort_by(|a, b| a.fitness.total_cmp(&b.fitness));
}

fn record(generation: usize, pop: &[Individual], best_so_far: f64) -> GenerationRecord {
    GenerationRecord {
        generation,
        best: pop[0].fitness,
        mean: pop.iter().map(|p| p.fitness).sum::<f64>() / pop.len() as f64,
        best_so_far,
    }
}

/// Runs the GA from scratch or from `resume`. At most `budget` generations are
/// run in this call (all remaining ones when `None`); `on_generation` sees the
/// checkpoint after every generation, including the initial one.
pub fn evolve<O: Objective + ?Sized>(
    objective: &O,
    settings: &GaSettings,
    resume: Option<Checkpoint>,
    budget: Option<usize>,
    on_generation: &mut dyn FnMut(&Checkpoint),
) -> Result<GaOutcome, CalibrationError> {
    settings.validate()?;
    let bounds = objective.bounds();
    if bounds.is_empty()
        || bounds
            .iter()
            .any(|&(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo < hi))
    {
        return Err(CalibrationError::Invalid(
            "bounds must be finite with lo < hi".into(),
        ));
    }
    let hash = objective.fingerprint();

    let mut state = match resume {
        Some(c) => {
            if c.problem_hash != hash {
                return Err(CalibrationError::CheckpointMismatch {
                    expected: hash,
                    found: c.problem_hash,
                });
            }
            if c.settings.seed != settings.seed
                || c.settings.population_size != settings.population_size
                || c.population.len() != settings.population_size
            {
                return Err(CalibrationError::Checkpoint(
                    "checkpoint was written with a different seed or population size".into(),
                ));
            }
            if c.population.iter().any(|p| p.genome.len() != bounds.len()) {
                return Err(CalibrationError::Checkpoint(
                    "genome length differs from the problem".into(),
                ));
            }
            c
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
            let genomes: Vec<Vec<f64>> = (0..settings.population_size)
                .map(|_| {
                    bounds
                        .iter()
                        .map(|&(lo, hi)| rng.random_range(lo..=hi))
                        .collect()
                })
                .collect();
            let mut population = evaluate(objective, genomes);
            sort(&mut population);
            let best = population[0].clone();
            let history = vec![record(0, &population, best.fitness)];
            let c = Checkpoint {
                version: CHECKPOINT_VERSION,
                problem_hash: hash.clone(),
                settings: settings.clone(),
                generation: 0,
                rng: RngState::capture(&rng),
                best,
                history,
                population,
            };
            on_generation(&c);
            c
        }
    };
    state.settings = settings.clone();

    let mut rng = state.rng.restore();
    let parents = settings.parent_count();
    let mut left = budget.unwrap_or(usize::MAX);
    while state.generation < settings.max_iterations && left > 0 {
        let pool: Vec<f64> = state.population[..parents]
            .iter()
            .map(|p| p.fitness)
            .collect();
        let need = settings.population_size - parents;
        let mut children = Vec::with_capacity(need + 1);
        while children.len() < need {
            let a = &state.population[roulette_select(&pool, &mut rng)].genome;
            let b = &state.population[roulette_select(&pool, &mut rng)].genome;
            let (mut c, mut d) = one_point_crossover(a, b, &mut rng);
            mutate(&mut c, &bounds, settings.mutation_probability, &mut rng);
            mutate(&mut d, &bounds, settings.mutation_probability, &mut rng);
            children.push(c);
            children.push(d);
        }
        children.truncate(need);

        // the parent pool, elites included, survives unchanged
        let mut next: Vec<Individual> = state.population[..parents].to_vec();
        next.extend(evaluate(objective, children));
        sort(&mut next);
        state.generation += 1;
        state.population = next;
        if state.population[0].fitness < state.best.fitness {
            state.best = state.population[0].clone();
        }
        state.history.push(record(
            state.generation,
            &state.population,
            state.best.fitness,
        ));
        state.rng = RngState::capture(&rng);
        on_generation(&state);
        left -= 1;
    }

    Ok(GaOutcome {
        best: state.best.clone(),
        history: state.history.clone(),
        finished: state.generation >= settings.max_iterations,
        checkpoint: state,
    })
}
