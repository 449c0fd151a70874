use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::par::Parallelism;

use super::gp::GaussianProcess;
use super::{objective, CalibrationError, CalibrationResult, RecordSet, SearchBox, TraceEntry};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Latin-hypercube points evaluated before the first acquisition.
    pub initial_design: usize,
    /// Acquisition grid resolution per axis.
    pub grid: usize,
    /// Expected-improvement margin in accuracy units.
    pub xi: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            initial_design: 10,
            grid: 41,
            xi: 1e-3,
        }
    }
}

pub const MIN_BUDGET: usize = 10;

fn latin_hypercube(n: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
    let mut axes: Vec<Vec<usize>> = (0..2).map(|_| (0..n).collect()).collect();
    for a in &mut axes {
        a.shuffle(rng);
    }
    (0..n)
        .map(|i| {
            let u0 = (axes[0][i] as f64 + rng.random::<f64>()) / n as f64;
            let u1 = (axes[1][i] as f64 + rng.random::<f64>()) / n as f64;
            [u0, u1]
        })
        .collect()
}

struct Run<'a> {
    set: &'a RecordSet,
    search: SearchBox,
    exec: Parallelism,
    xs: Vec<[f64; 2]>,
    ys: Vec<f64>,
    trace: Vec<TraceEntry>,
}

impl Run<'_> {
    fn evaluate(&mut self, batch: &[[f64; 2]]) -> Result<(), CalibrationError> {
        for u in batch {
            let model = self.search.from_unit(*u);
            let y = objective(self.set, &model, self.exec)?;
            self.xs.push(*u);
            self.ys.push(y);
            self.trace.push(TraceEntry {
                ring_ratio: model.ring_ratio,
                break_ratio: model.break_ratio,
                objective: y,
            });
        }
        Ok(())
    }

    fn best(&self) -> f64 {
        self.ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn check(budget: usize, search: &SearchBox) -> Result<(), CalibrationError> {
    search.validate()?;
    if budget < MIN_BUDGET {
        return Err(CalibrationError::Budget {
            budget,
            min: MIN_BUDGET,
        });
    }
    Ok(())
}

/// Maximises verdict accuracy over `search` with expected improvement on a
/// GP surrogate.
///
/// Each round refits the GP, scores a dense grid, refines the best grid
/// points by pattern search and evaluates the winner. When no point
/// promises improvement, or the winner repeats a sample, a seeded random
/// point is used instead. The decision sequence depends only on `seed`, so
/// a larger budget extends the trace of a smaller one.
pub fn bayes_optimize(
    set: &RecordSet,
    search: &SearchBox,
    budget: usize,
    seed: u64,
    config: &OptimizerConfig,
    exec: Parallelism,
) -> Result<CalibrationResult, CalibrationError> {
    check(budget, search)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut run = Run {
        set,
        search: *search,
        exec,
        xs: Vec::new(),
        ys: Vec::new(),
        trace: Vec::new(),
    };
    let init = latin_hypercube(config.initial_design.clamp(1, budget), &mut rng);
    run.evaluate(&init)?;
    while run.trace.len() < budget {
        let gp = GaussianProcess::fit(&run.xs, &run.ys);
        let best = run.best();
        let fallback = [rng.random::<f64>(), rng.random::<f64>()];
        let next = match maximise_ei(&gp, best, config, exec) {
            Some((u, ei)) if ei > 1e-9 && !run.xs.iter().any(|x| dist2(x, &u) < 1e-12) => u,
            _ => fallback,
        };
        run.evaluate(&[next])?;
    }
    Ok(CalibrationResult::from_trace(run.trace, *search))
}

/// Uniform random search with the same budget, for comparison.
pub fn random_search(
    set: &RecordSet,
    search: &SearchBox,
    budget: usize,
    seed: u64,
    exec: Parallelism,
) -> Result<CalibrationResult, CalibrationError> {
    check(budget, search)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<[f64; 2]> = (0..budget).map(|_| [rng.random(), rng.random()]).collect();
    let mut run = Run {
        set,
        search: *search,
        exec,
        xs: Vec::new(),
        ys: Vec::new(),
        trace: Vec::new(),
    };
    run.evaluate(&points)?;
    Ok(CalibrationResult::from_trace(run.trace, *search))
}

fn dist2(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

fn maximise_ei(gp: &GaussianProcess, best: f64, config: &OptimizerConfig, exec: Parallelism) -> Option<([f64; 2], f64)> {
    let g = config.grid.max(2);
    let step = 1.0 / (g - 1) as f64;
    let scores = exec.map_range(g * g, |k| {
        let u = [(k % g) as f64 * step, (k / g) as f64 * step];
        (u, gp.expected_improvement(&u, best, config.xi))
    });
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].1.total_cmp(&scores[a].1).then(a.cmp(&b)));
    let ei = |u: &[f64; 2]| gp.expected_improvement(u, best, config.xi);
    let mut winner: Option<([f64; 2], f64)> = None;
    for &k in order.iter().take(3) {
        let (mut u, mut val) = scores[k];
        let mut h = step;
        while h > 1e-4 {
            let mut moved = false;
            for (d, s) in [(0, 1.0), (0, -1.0), (1, 1.0), (1, -1.0)] {
                let mut c = u;
                c[d] = (c[d] + s * h).clamp(0.0, 1.0);
                let v = ei(&c);
                if v > val {
                    u = c;
                    val = v;
                    moved = true;
                }
            }
            if !moved {
                h *= 0.5;
            }
        }
        if winner.is_none_or(|(_, w)| val > w) {
            winner = Some((u, val));
        }
    }
    winner
}
