use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::chain::ChainSpec;

/// The generator for run `run` of an experiment seeded with `seed`.
pub(crate) fn run_rng(seed: u64, run: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run);
    rng
}

/// One `P`-step from any state by inverting cumulative row sums.
#[derive(Debug, Clone)]
pub(crate) struct StepSampler {
    cum: Vec<Vec<(usize, f64)>>,
}

impl StepSampler {
    pub fn new(chain: &ChainSpec) -> Self {
        let cum = chain
            .rows()
            .iter()
            .map(|row| {
                let mut acc = 0.0;
                row.iter()
                    .map(|&(y, p)| {
                        acc += p;
                        (y, acc)
                    })
                    .collect()
            })
            .collect();
        StepSampler { cum }
    }

    pub fn step(&self, x: usize, rng: &mut impl Rng) -> usize {
        let row = &self.cum[x];
        let u = rng.random::<f64>() * row[row.len() - 1].1;
        let i = row.partition_point(|e| e.1 <= u);
        row[i.min(row.len() - 1)].0
    }
}

/// Draw from a finite distribution given as weights.
#[derive(Debug, Clone)]
pub(crate) struct Categorical {
    cum: Vec<f64>,
}

impl Categorical {
    pub fn new(weights: &[f64]) -> Self {
        let mut acc = 0.0;
        Categorical {
            cum: weights
                .iter()
                .map(|w| {
                    acc += w;
                    acc
                })
                .collect(),
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> usize {
        let u = rng.random::<f64>() * self.cum[self.cum.len() - 1];
        let i = self.cum.partition_point(|&c| c <= u);
        if i < self.cum.len() {
            return i;
        }
        // rounding put u at the top; take the last entry with positive weight
        let top = self.cum[self.cum.len() - 1];
        self.cum.partition_point(|&c| c < top)
    }
}

/// Independent walkers driven by one exponential clock at the summed rate;
/// each ring moves one walker chosen in proportion to its speed.
#[derive(Debug, Clone)]
pub(crate) struct Walkers<'a> {
    pub step: &'a StepSampler,
    total: f64,
    pick: Categorical,
}

impl<'a> Walkers<'a> {
    pub fn new(step: &'a StepSampler, speeds: &[f64]) -> Self {
        Walkers { step, total: speeds.iter().sum(), pick: Categorical::new(speeds) }
    }

    pub fn hold(&self, rng: &mut impl Rng) -> f64 {
        let e: f64 = rng.sample(Exp1);
        e / self.total
    }

    /// Moves one walker; returns its index.
    pub fn move_one(&self, pos: &mut [usize], rng: &mut impl Rng) -> usize {
        let i = self.pick.sample(rng);
        pos[i] = self.step.step(pos[i], rng);
        i
    }
}
