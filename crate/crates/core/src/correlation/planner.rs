//! Move chains from an arbitrary configuration to a contiguous block that
//! starts at an odd coordinate (a nice support).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exact_value::ExactValue;
use crate::kernels::{even_runs, move_ratio};
use crate::lattice::{translate, DefectConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanStrategy {
    /// Two-unit moves whenever allowed.
    Greedy,
    /// One-unit moves only.
    SingleSteps,
    /// Random target offset and random choice between move sizes.
    Randomized(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MovePlan {
    pub shift: i64,
    /// `(from, step)` in the translated frame.
    pub moves: Vec<(i64, i64)>,
    /// `ω̄(config) / ω̄(nice)`
    pub ratio: ExactValue,
    pub nice: DefectConfig,
}

const MAX_MOVES: usize = 1 << 24;

pub fn plan_moves(config: &DefectConfig, strategy: PlanStrategy) -> Result<MovePlan> {
    let Some(lo) = config.min_pos() else {
        return Ok(MovePlan { shift: 0, moves: Vec::new(), ratio: ExactValue::one(), nice: config.clone() });
    };
    let mut rng = match strategy {
        PlanStrategy::Randomized(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let mut shift = if lo.rem_euclid(2) == 0 { 1 } else { 0 };
    let mut offset = 0;
    if let Some(r) = rng.as_mut() {
        shift += 2 * r.random_range(-2..=2i64);
        offset = 2 * r.random_range(0..=2i64);
    }
    let mut cur = translate(config, shift);
    let start = lo + shift - offset;
    let mut moves = Vec::new();
    let mut ratio = ExactValue::one();
    for idx in 0..cur.len() {
        let target = start + idx as i64;
        loop {
            let p = cur.support()[idx];
            if p == target {
                break;
            }
            if p < target || moves.len() >= MAX_MOVES {
                return Err(Error::Planner(format!("stuck at {cur} moving index {idx} to {target}")));
            }
            let two_ok = p - 2 >= target && even_runs(&cur.support());
            let step = match (&strategy, two_ok) {
                (_, false) | (PlanStrategy::SingleSteps, _) => -1,
                (PlanStrategy::Greedy, true) => -2,
                (PlanStrategy::Randomized(_), true) => {
                    if rng.as_mut().unwrap().random_bool(0.5) {
                        -2
                    } else {
                        -1
                    }
                }
            };
            ratio = ratio * move_ratio(&cur, p, step)?;
            cur = cur.moved(p, p + step)?;
            moves.push((p, step));
        }
    }
    Ok(MovePlan { shift, moves, ratio, nice: cur })
}
