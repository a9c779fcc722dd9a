//! Event-driven evolution of piecewise-constant solutions and bookkeeping
//! of the full space-time front arrangement.

use crate::error::{FtError, Result};
use crate::flux::{FluxModel, State};
use crate::riemann::{envelope_riemann_scalar, rh_residual, riemann_psystem, WaveFan, WaveKind};
use rand::Rng;
use std::sync::Arc;

/// Default cap on interaction events per run.
pub const EVENT_BUDGET: usize = 1_000_000;

/// Relative amplitude of the generic-position value perturbation.
pub const JITTER_REL: f64 = 1e-3;

/// Piecewise-constant state function of x at a fixed time.
#[derive(Clone, Debug)]
pub struct Profile {
    pub time: f64,
    /// Strictly increasing jump locations.
    pub xs: Vec<f64>,
    /// One more value than breakpoints.
    pub vals: Vec<State>,
}

impl Profile {
    pub fn constant(time: f64, v: State) -> Self {
        Profile { time, xs: Vec::new(), vals: vec![v] }
    }

    /// Drop zero-strength jumps (exactly equal adjacent values).
    pub fn normalize(&mut self) {
        let mut xs = Vec::with_capacity(self.xs.len());
        let mut vals = vec![self.vals[0]];
        for (i, &x) in self.xs.iter().enumerate() {
            if self.vals[i + 1] != *vals.last().unwrap() {
                xs.push(x);
                vals.push(self.vals[i + 1]);
            }
        }
        self.xs = xs;
        self.vals = vals;
    }

    pub fn value_at(&self, x: f64) -> State {
        let i = self.xs.partition_point(|&b| b <= x);
        self.vals[i]
    }

    pub fn total_variation(&self) -> f64 {
        self.vals.windows(2).map(|w| w[1].dist1(&w[0])).sum()
    }

    /// Exact L1 distance over the merged breakpoint arrangement. The far
    /// fields must agree for the distance to be finite.
    pub fn l1_distance(&self, other: &Profile) -> Result<f64> {
        if (self.time - other.time).abs() > 1e-12 * self.time.abs().max(1.0) {
            return Err(FtError::Mismatch(format!(
                "profiles at different times {} vs {}",
                self.time, other.time
            )));
        }
        let d_left = self.vals[0].dist1(&other.vals[0]);
        let d_right = self.vals.last().unwrap().dist1(other.vals.last().unwrap());
        if d_left != 0.0 || d_right != 0.0 {
            return Err(FtError::Mismatch(
                "far fields differ; L1 distance is infinite".into(),
            ));
        }
        let mut cut: Vec<f64> = self.xs.iter().chain(other.xs.iter()).copied().collect();
        cut.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cut.dedup();
        let mut total = 0.0;
        for w in cut.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            total += self.value_at(mid).dist1(&other.value_at(mid)) * (w[1] - w[0]);
        }
        Ok(total)
    }

    /// Integral of the state over [a, b], componentwise.
    pub fn integrate(&self, a: f64, b: f64) -> [f64; 2] {
        let mut cut = vec![a];
        for &x in &self.xs {
            if x > a && x < b {
                cut.push(x);
            }
        }
        cut.push(b);
        let mut out = [0.0, 0.0];
        for w in cut.windows(2) {
            let v = self.value_at(0.5 * (w[0] + w[1]));
            out[0] += v.comp(0) * (w[1] - w[0]);
            out[1] += v.comp(1) * (w[1] - w[0]);
        }
        out
    }
}

/// One front of the arrangement: a straight discontinuity line carrying an
/// exact Rankine-Hugoniot jump of the governing flux.
#[derive(Clone, Debug)]
pub struct Front {
    pub id: usize,
    pub family: usize,
    pub kind: WaveKind,
    pub left: State,
    pub right: State,
    pub speed: f64,
    pub strength: f64,
    /// Entropy verdict of the jump (shocks pass their criterion; rarefaction
    /// fronts are admissible only up to O(h)).
    pub admissible: bool,
    pub t_birth: f64,
    pub x_birth: f64,
    pub t_death: f64,
    /// Death by reaching the final time rather than an interaction.
    pub dies_at_end: bool,
}

impl Front {
    pub fn x_at(&self, t: f64) -> f64 {
        self.x_birth + self.speed * (t - self.t_birth)
    }

    pub fn alive_at(&self, t: f64) -> bool {
        t >= self.t_birth && (t < self.t_death || (self.dies_at_end && t <= self.t_death))
    }
}

/// An interaction: incoming fronts meet at one point and are replaced by
/// the fan of the Riemann problem between the outermost states.
#[derive(Clone, Debug)]
pub struct Event {
    pub t: f64,
    pub x: f64,
    pub incoming: Vec<usize>,
    pub outgoing: Vec<usize>,
}

/// Complete space-time front arrangement of one evolved solution.
#[derive(Clone, Debug)]
pub struct TrackedRun {
    pub model: Arc<FluxModel>,
    pub h: f64,
    pub initial: Profile,
    pub fronts: Vec<Front>,
    pub events: Vec<Event>,
    pub t_end: f64,
}

impl TrackedRun {
    /// Piecewise-constant restriction at time t; at an event time the right
    /// limit is returned together with a flag.
    pub fn slice_flagged(&self, t: f64) -> Result<(Profile, bool)> {
        if t < 0.0 || t > self.t_end {
            return Err(FtError::TimeRange(t));
        }
        let at_event = self
            .events
            .iter()
            .any(|e| (e.t - t).abs() <= 1e-14 * t.abs().max(1.0));
        let mut alive: Vec<&Front> = self.fronts.iter().filter(|f| f.alive_at(t)).collect();
        alive.sort_by(|a, b| {
            (a.x_at(t), a.speed)
                .partial_cmp(&(b.x_at(t), b.speed))
                .unwrap()
        });
        let mut xs = Vec::with_capacity(alive.len());
        let mut vals = Vec::with_capacity(alive.len() + 1);
        if alive.is_empty() {
            vals.push(self.initial.vals[0]);
        } else {
            vals.push(alive[0].left);
            for f in &alive {
                xs.push(f.x_at(t));
                vals.push(f.right);
            }
        }
        Ok((Profile { time: t, xs, vals }, at_event))
    }

    pub fn slice(&self, t: f64) -> Result<Profile> {
        self.slice_flagged(t).map(|(p, _)| p)
    }

    /// Fronts alive on the open time interval (t0, t1).
    pub fn fronts_alive_between(&self, t0: f64, t1: f64) -> Vec<&Front> {
        self.fronts
            .iter()
            .filter(|f| f.t_birth < t1 && f.t_death > t0)
            .collect()
    }
}

fn solve_riemann(model: &FluxModel, h: f64, l: &State, r: &State) -> Result<WaveFan> {
    match model {
        FluxModel::Scalar(m) => envelope_riemann_scalar(m, l.as_scalar(), r.as_scalar()),
        FluxModel::PSystem(m) => riemann_psystem(m, l, r, h),
        FluxModel::Euler(_) => Err(FtError::Model(
            "time evolution is provided for scalar and p-system models only".into(),
        )),
    }
}

/// Project raw initial data onto the state grid of spacing <= h and apply
/// the seeded generic-position perturbation (at most 1e-3 h^2 per value;
/// the far-field values stay exact so solution pairs remain L1-comparable).
pub fn discretize_initial(
    model: &FluxModel,
    raw_xs: &[f64],
    raw_vals: &[State],
    h: f64,
    value_seed: u64,
) -> Result<Profile> {
    if raw_vals.len() != raw_xs.len() + 1 {
        return Err(FtError::Discretization(
            "need one more value than breakpoints".into(),
        ));
    }
    let mut rng = crate::scenario::seeded_rng(value_seed ^ 0x5bd1_e995);
    let jit = h * h * JITTER_REL;
    let project = |s: &State| -> Result<State> {
        model.check_state(s)?;
        Ok(match model {
            FluxModel::Scalar(m) => State::scalar(m.table.project(s.as_scalar())),
            FluxModel::PSystem(m) => {
                let u = (s.comp(0) / h).round() * h;
                let v = ((s.comp(1) / h).round() * h).clamp(m.v_lo + h, m.v_hi - h);
                State::pair(u, v)
            }
            FluxModel::Euler(_) => *s,
        })
    };
    let mut vals = Vec::with_capacity(raw_vals.len());
    for v in raw_vals {
        vals.push(project(v)?);
    }
    let mut prof = Profile { time: 0.0, xs: raw_xs.to_vec(), vals };
    prof.normalize();
    let n = prof.vals.len();
    for (i, v) in prof.vals.iter_mut().enumerate() {
        if i == 0 || i == n - 1 {
            continue;
        }
        *v = match model {
            FluxModel::Scalar(_) => State::scalar(v.comp(0) + rng.gen_range(-1.0..1.0) * jit),
            _ => State::pair(
                v.comp(0) + rng.gen_range(-1.0..1.0) * jit,
                v.comp(1) + rng.gen_range(-1.0..1.0) * jit,
            ),
        };
    }
    prof.normalize();
    Ok(prof)
}

/// Evolve a profile by event-driven front tracking up to `t_end`. Between
/// events the profile is an exact weak solution of the governing flux; at
/// each interaction the incoming fronts are replaced by a full Riemann
/// re-solve between the outermost states.
pub fn evolve(
    model: Arc<FluxModel>,
    initial: Profile,
    h: f64,
    t_end: f64,
    budget: usize,
) -> Result<TrackedRun> {
    let mut run = TrackedRun {
        model: model.clone(),
        h,
        initial: initial.clone(),
        fronts: Vec::new(),
        events: Vec::new(),
        t_end,
    };
    let mut active: Vec<usize> = Vec::new();
    // Birth the initial fans.
    for (i, &x0) in initial.xs.iter().enumerate() {
        let fan = solve_riemann(&model, h, &initial.vals[i], &initial.vals[i + 1])?;
        for w in &fan.waves {
            debug_assert!(rh_residual(&model, w) <= 1e-11);
            let id = run.fronts.len();
            run.fronts.push(Front {
                id,
                family: w.family,
                kind: w.kind,
                left: w.left,
                right: w.right,
                speed: w.speed,
                strength: w.strength,
                admissible: w.kind == WaveKind::Shock,
                t_birth: 0.0,
                x_birth: x0,
                t_death: t_end,
                dies_at_end: true,
            });
            active.push(id);
        }
    }
    let tv0 = initial.total_variation();
    let scalar = matches!(*model, FluxModel::Scalar(_));

    let sort_active = |active: &mut Vec<usize>, fronts: &Vec<Front>, t: f64| {
        active.sort_by(|&a, &b| {
            (fronts[a].x_at(t), fronts[a].speed)
                .partial_cmp(&(fronts[b].x_at(t), fronts[b].speed))
                .unwrap()
        });
    };

    let mut t_cur = 0.0;
    sort_active(&mut active, &run.fronts, 1e-12);
    let mut n_events = 0usize;
    loop {
        // Earliest adjacent-pair collision after t_cur.
        let mut t_hit = f64::INFINITY;
        let mut hit_at = 0usize;
        for k in 0..active.len().saturating_sub(1) {
            let a = &run.fronts[active[k]];
            let b = &run.fronts[active[k + 1]];
            if a.speed <= b.speed {
                continue;
            }
            let t = (b.x_birth - b.speed * b.t_birth - a.x_birth + a.speed * a.t_birth)
                / (a.speed - b.speed);
            if t > t_cur && t < t_hit {
                t_hit = t;
                hit_at = k;
            }
        }
        if t_hit >= t_end {
            break;
        }
        n_events += 1;
        if n_events > budget {
            return Err(FtError::EventBudget { budget, t: t_hit });
        }
        let x_hit = run.fronts[active[hit_at]].x_at(t_hit);
        let tol_x = 1e-11 * (1.0 + x_hit.abs()) * (1.0 + t_hit);
        // All fronts passing through the collision point join the event.
        let mut lo = hit_at;
        while lo > 0 && (run.fronts[active[lo - 1]].x_at(t_hit) - x_hit).abs() <= tol_x {
            lo -= 1;
        }
        let mut hi = hit_at + 1;
        while hi + 1 < active.len()
            && (run.fronts[active[hi + 1]].x_at(t_hit) - x_hit).abs() <= tol_x
        {
            hi += 1;
        }
        let incoming: Vec<usize> = active[lo..=hi].to_vec();
        let l_state = run.fronts[incoming[0]].left;
        let r_state = run.fronts[*incoming.last().unwrap()].right;
        for &id in &incoming {
            run.fronts[id].t_death = t_hit;
            run.fronts[id].dies_at_end = false;
        }
        let fan = solve_riemann(&model, h, &l_state, &r_state)?;
        let mut outgoing = Vec::with_capacity(fan.waves.len());
        for w in &fan.waves {
            debug_assert!(rh_residual(&model, w) <= 1e-11);
            let id = run.fronts.len();
            run.fronts.push(Front {
                id,
                family: w.family,
                kind: w.kind,
                left: w.left,
                right: w.right,
                speed: w.speed,
                strength: w.strength,
                admissible: w.kind == WaveKind::Shock,
                t_birth: t_hit,
                x_birth: x_hit,
                t_death: t_end,
                dies_at_end: true,
            });
            outgoing.push(id);
        }
        // Conservation across the event: incoming and outgoing telescoping
        // Rankine-Hugoniot sums both equal the flux balance f(R) - f(L).
        debug_assert!({
            let bal = |ids: &[usize]| {
                let mut s = [0.0, 0.0];
                for &id in ids {
                    let f = &run.fronts[id];
                    let du = f.right.sub(&f.left);
                    s[0] += f.speed * du[0];
                    s[1] += f.speed * du[1];
                }
                s
            };
            let (i, o) = (bal(&incoming), bal(&outgoing));
            (i[0] - o[0]).abs() + (i[1] - o[1]).abs() <= 1e-10
        });
        active.splice(lo..=hi, outgoing.iter().copied());
        t_cur = t_hit;
        sort_active(&mut active, &run.fronts, t_cur + 1e-12 * (1.0 + t_cur));
        run.events.push(Event { t: t_hit, x: x_hit, incoming, outgoing });

        if scalar {
            // Scalar total variation is nonincreasing at interactions.
            debug_assert!({
                let tv: f64 = active
                    .iter()
                    .map(|&id| run.fronts[id].right.dist1(&run.fronts[id].left))
                    .sum();
                tv <= tv0 + 1e-9
            });
        }
    }
    Ok(run)
}
