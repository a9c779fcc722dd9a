//! Scalar wave partition: a front-tracking solution viewed as the
//! superposition of elementary waves that are only ever split or cancelled
//! at interactions, never created.

use crate::error::{FtError, Result};
use crate::flux::FluxModel;
use crate::tracking::TrackedRun;

/// One elementary wave: a signed u-interval rides on a front until it is
/// split across outgoing fronts or cancelled against an opposite wave.
#[derive(Clone, Debug)]
pub struct ElementaryWave {
    pub id: usize,
    /// Endpoint values; the signed strength is hi - lo.
    pub lo: f64,
    pub hi: f64,
    pub birth: f64,
    /// Cancellation (or horizon) time.
    pub death: f64,
    /// Wave this one was split off from, if any.
    pub parent: Option<usize>,
    /// Wave that cancelled this one, if any.
    pub cancelled_against: Option<usize>,
    /// (front id, from time) ownership history; the trajectory is the
    /// concatenation of the owning fronts' segments.
    pub rides: Vec<(usize, f64)>,
}

impl ElementaryWave {
    pub fn signed_strength(&self) -> f64 {
        self.hi - self.lo
    }
}

/// The complete partition of a scalar run.
#[derive(Clone, Debug)]
pub struct WavePartitionScalar {
    pub waves: Vec<ElementaryWave>,
    /// Alive wave ids per front, in left-to-right concatenation order.
    pub by_front: Vec<Vec<usize>>,
    pub cancelled_mass: f64,
}

impl WavePartitionScalar {
    /// Alive waves on the given front reproduce its jump exactly.
    pub fn front_jump_residual(&self, run: &TrackedRun, front_id: usize) -> f64 {
        let f = &run.fronts[front_id];
        let ids = &self.by_front[front_id];
        if ids.is_empty() {
            return f.right.as_scalar() - f.left.as_scalar();
        }
        let first = &self.waves[ids[0]];
        let last = &self.waves[*ids.last().unwrap()];
        // Chained intervals: start at the front's left value, end at right.
        let mut res = (first.lo - f.left.as_scalar()).abs()
            + (last.hi - f.right.as_scalar()).abs();
        for w in ids.windows(2) {
            res += (self.waves[w[0]].hi - self.waves[w[1]].lo).abs();
        }
        res
    }
}

/// Build the wave partition of a scalar run. Initial fans seed one wave per
/// front; at every interaction the incoming waves are concatenated,
/// opposite-sign neighbours cancel at the junctions, and survivors split
/// across the outgoing fronts.
pub fn wave_partition_scalar(run: &TrackedRun) -> Result<WavePartitionScalar> {
    if !matches!(*run.model, FluxModel::Scalar(_)) {
        return Err(FtError::Model("wave partition requires a scalar run".into()));
    }
    let mut waves: Vec<ElementaryWave> = Vec::new();
    let mut by_front: Vec<Vec<usize>> = vec![Vec::new(); run.fronts.len()];
    let mut cancelled_mass = 0.0;

    let new_wave =
        |waves: &mut Vec<ElementaryWave>, lo: f64, hi: f64, t: f64, parent: Option<usize>| {
            let id = waves.len();
            waves.push(ElementaryWave {
                id,
                lo,
                hi,
                birth: t,
                death: f64::INFINITY,
                parent,
                cancelled_against: None,
                rides: Vec::new(),
            });
            id
        };

    // Seed waves on fronts born at t = 0.
    for f in run.fronts.iter().filter(|f| f.t_birth == 0.0) {
        let id = new_wave(
            &mut waves,
            f.left.as_scalar(),
            f.right.as_scalar(),
            0.0,
            None,
        );
        waves[id].rides.push((f.id, 0.0));
        by_front[f.id].push(id);
    }

    for ev in &run.events {
        // Concatenate incoming wave lists left to right.
        let mut stack: Vec<usize> = Vec::new();
        for &fid in &ev.incoming {
            for &wid in &by_front[fid] {
                stack.push(wid);
            }
        }
        // Cancel adjacent opposite-sign waves (they only meet at junctions).
        let mut k = 0usize;
        while k + 1 < stack.len() {
            let (a, b) = (stack[k], stack[k + 1]);
            let sa = waves[a].signed_strength();
            let sb = waves[b].signed_strength();
            if sa == 0.0 {
                waves[a].death = ev.t;
                stack.remove(k);
                k = k.saturating_sub(1);
                continue;
            }
            if sb == 0.0 {
                waves[b].death = ev.t;
                stack.remove(k + 1);
                continue;
            }
            if sa * sb < 0.0 {
                let cancel = sa.abs().min(sb.abs());
                cancelled_mass += 2.0 * cancel;
                if sa.abs() <= sb.abs() {
                    // a fully cancelled; b loses |a| at its lo end.
                    waves[a].death = ev.t;
                    waves[a].cancelled_against = Some(b);
                    waves[b].lo = waves[a].lo;
                    stack.remove(k);
                } else {
                    waves[b].death = ev.t;
                    waves[b].cancelled_against = Some(a);
                    waves[a].hi = waves[b].hi;
                    stack.remove(k + 1);
                }
                if waves[stack[k.min(stack.len() - 1)]].signed_strength() == 0.0 {
                    let dead = stack[k.min(stack.len() - 1)];
                    waves[dead].death = ev.t;
                    stack.retain(|&w| w != dead);
                }
                k = k.saturating_sub(1);
                continue;
            }
            k += 1;
        }
        // Distribute survivors across the outgoing fronts by value ranges.
        let mut cursor = 0usize;
        for &fid in &ev.outgoing {
            let f = &run.fronts[fid];
            let (mut need_lo, need_hi) = (f.left.as_scalar(), f.right.as_scalar());
            let dir = (need_hi - need_lo).signum();
            while (need_hi - need_lo) * dir > 1e-15 {
                if cursor >= stack.len() {
                    return Err(FtError::Model(
                        "wave partition ran out of incoming waves".into(),
                    ));
                }
                let wid = stack[cursor];
                let rem = waves[wid].hi - waves[wid].lo;
                let want = need_hi - need_lo;
                if rem.abs() <= want.abs() + 1e-15 {
                    waves[wid].rides.push((fid, ev.t));
                    by_front[fid].push(wid);
                    need_lo += rem;
                    cursor += 1;
                } else {
                    // Split: the leading part keeps the id, the rest is a
                    // new wave continuing on a later front.
                    let split_at = waves[wid].lo + want;
                    let old_hi = waves[wid].hi;
                    let rest = new_wave(&mut waves, split_at, old_hi, ev.t, Some(wid));
                    waves[rest].birth = waves[wid].birth;
                    waves[wid].hi = split_at;
                    waves[wid].rides.push((fid, ev.t));
                    by_front[fid].push(wid);
                    stack[cursor] = rest;
                    need_lo = need_hi;
                }
            }
        }
    }

    // Waves alive at the horizon die there.
    for w in waves.iter_mut() {
        if w.death == f64::INFINITY {
            w.death = run.t_end;
        }
    }
    Ok(WavePartitionScalar { waves, by_front, cancelled_mass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::{FluxModel, ScalarFlux, ScalarModel, State};
    use crate::tracking::{discretize_initial, evolve, EVENT_BUDGET};
    use std::sync::Arc;

    fn run_burgers(xs: &[f64], vals: &[f64], h: f64, t_end: f64, seed: u64) -> TrackedRun {
        let model = Arc::new(FluxModel::Scalar(ScalarModel::new(
            ScalarFlux::Burgers,
            -3.0,
            3.0,
            h,
            seed,
        )));
        let states: Vec<State> = vals.iter().map(|&u| State::scalar(u)).collect();
        let prof = discretize_initial(&model, xs, &states, h, seed).unwrap();
        evolve(model, prof, h, t_end, EVENT_BUDGET).unwrap()
    }

    #[test]
    fn no_interactions_one_wave_per_jump() {
        let run = run_burgers(&[0.0], &[1.0, -1.0], 0.1, 1.0, 2);
        let part = wave_partition_scalar(&run).unwrap();
        assert_eq!(part.waves.len(), 1);
        assert_eq!(part.cancelled_mass, 0.0);
        assert!(part.front_jump_residual(&run, 0) < 1e-14);
    }

    #[test]
    fn merging_shocks_cancel_nothing_and_split_nothing() {
        // 1 | 0 | -1: same-sign decreasing waves merge; no cancellation.
        let run = run_burgers(&[-0.5, 0.5], &[1.0, 0.0, -1.0], 0.1, 3.0, 3);
        let part = wave_partition_scalar(&run).unwrap();
        assert!(part.cancelled_mass < 1e-12);
        // Ancestry of every wave reaches t = 0.
        for w in &part.waves {
            let mut root = w;
            while let Some(p) = root.parent {
                root = &part.waves[p];
            }
            assert_eq!(root.birth, 0.0);
        }
        // Post-merge front carries the concatenation of both waves.
        let merged_front = run.events[0].outgoing[0];
        assert!(part.front_jump_residual(&run, merged_front) < 1e-12);
    }

    #[test]
    fn shock_rarefaction_cancellation() {
        // A shock overtaking a rarefaction cancels part of it.
        let run = run_burgers(&[-1.0, 0.0], &[0.8, -0.6, 0.4], 0.1, 6.0, 4);
        let part = wave_partition_scalar(&run).unwrap();
        assert!(part.cancelled_mass > 0.1, "mass = {}", part.cancelled_mass);
        // Partition stays exact on every front alive at the horizon.
        for f in run.fronts.iter().filter(|f| f.dies_at_end) {
            assert!(
                part.front_jump_residual(&run, f.id) < 1e-12,
                "front {} residual {}",
                f.id,
                part.front_jump_residual(&run, f.id)
            );
        }
    }

    #[test]
    fn linearity_property_over_probes() {
        // abar(u+, u') - abar(u-, u') telescopes over the partition waves of
        // a front, for any probe u'.
        let run = run_burgers(&[-1.0, -0.2, 0.7], &[0.9, -0.5, 0.3, -0.2], 0.08, 4.0, 5);
        let part = wave_partition_scalar(&run).unwrap();
        let model = match &*run.model {
            FluxModel::Scalar(m) => m.clone(),
            _ => unreachable!(),
        };
        let mut rng = crate::scenario::seeded_rng(17);
        use rand::Rng;
        for f in run.fronts.iter().filter(|f| f.dies_at_end) {
            let ids = &part.by_front[f.id];
            if ids.is_empty() {
                continue;
            }
            for _ in 0..25 {
                let probe = rng.gen_range(-2.0..2.0);
                let lhs = model.table.chord(f.right.as_scalar(), probe)
                    - model.table.chord(f.left.as_scalar(), probe);
                let mut rhs = 0.0;
                for &wid in ids {
                    let w = &part.waves[wid];
                    rhs += model.table.chord(w.hi, probe) - model.table.chord(w.lo, probe);
                }
                assert!((lhs - rhs).abs() < 1e-12, "linearity residual {}", lhs - rhs);
            }
        }
    }
}
