use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::normalize::{normalized_transition, Normalized};
use super::domain_intersection;
use crate::automata::{Machine, Transitions};
use crate::error::{Error, Result};
use crate::exactmath::FuncExpr;
use crate::runs::Run;

pub const MC_MIN_SAMPLES: u64 = 1_000;
const CHUNK: u64 = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: u64,
}

enum Factor {
    Norm(Normalized),
    Func(FuncExpr),
}

impl Factor {
    fn eval(&self, p: &[f64]) -> f64 {
        match self {
            Factor::Norm(n) => n.eval_f64(p),
            Factor::Func(f) => f.eval_f64(p),
        }
    }
}

/// Uniform-sampling estimate of the shared-clock integral measure of a TAPD or
/// STA run. Samples are drawn in fixed chunks, chunk `i` from a ChaCha8 stream
/// `i` of `seed`, and summed in chunk order, so the result does not depend on
/// the number of worker threads.
pub fn mc_estimate(m: &Machine, run: &Run, samples: u64, seed: u64) -> Result<McEstimate> {
    if samples < MC_MIN_SAMPLES {
        return Err(Error::Usage(format!("Monte-Carlo needs at least {MC_MIN_SAMPLES} samples")));
    }
    let factors: Vec<Factor> = match &m.transitions {
        Transitions::Tapd(_) => run
            .edges
            .iter()
            .map(|&e| normalized_transition(m, e).map(Factor::Norm))
            .collect::<Result<_>>()?,
        Transitions::Sta(edges) => run.edges.iter().map(|&e| Factor::Func(edges[e].func.clone())).collect(),
        _ => return Err(Error::Usage(format!("Monte-Carlo applies to tapd and sta, not {}", m.kind()))),
    };
    let Some(d) = domain_intersection(m, run)? else {
        return Ok(McEstimate { estimate: 0.0, std_error: 0.0, samples });
    };
    let lo: Vec<f64> = d.bounds().iter().map(|(a, _)| a.to_f64()).collect();
    let width: Vec<f64> = d.bounds().iter().map(|(a, b)| b.to_f64() - a.to_f64()).collect();
    let vol = d.volume().to_f64();
    let dim = d.dim();

    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let n = CHUNK.min(samples - i * CHUNK);
            let mut p = vec![0.0; dim];
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..n {
                for k in 0..dim {
                    p[k] = lo[k] + width[k] * rng.gen::<f64>();
                }
                let g: f64 = factors.iter().map(|f| f.eval(&p)).product();
                s += g;
                s2 += g * g;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = partial.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let n = samples as f64;
    let mean = s / n;
    let var = ((s2 - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(McEstimate { estimate: vol * mean, std_error: vol * (var / n).sqrt(), samples })
}
