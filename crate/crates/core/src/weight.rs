//! Dissipative weights along backward generalized characteristics, the
//! weighted L1 functional, and the dissipation ledger.
//!
//! The weight w_j is piecewise constant on the arrangement refined by the
//! backward characteristic lines through every branch point of the field
//! (and every record endpoint on the horizon). Its value in a refined cell
//! is fixed by following the forward characteristic until the horizon or
//! absorption into an own-family compressive record: the value there is the
//! anchor constant, minus the prescribed jumps collected at each record
//! crossed on the way.

use crate::error::{FtError, Result};
use crate::field::{AveragedField, RecordAnalysis, RecordSeg, ShockClass};
use crate::flux::State;
use std::sync::Arc;

/// Relative tolerance distinguishing a transversal contact from a ride.
const RIDE_TOL: f64 = 1e-12;

thread_local! {
    #[doc(hidden)]
    pub static WALK_TRACE: std::cell::RefCell<Option<Vec<(usize, f64, f64, Option<usize>, f64)>>> =
        const { std::cell::RefCell::new(None) };
}

/// Probe function of the generalized weight rule.
pub type ProbeFn = Arc<dyn Fn(&State, &State) -> f64 + Send + Sync>;

/// Jump rules defining the weight.
#[derive(Clone)]
pub enum WeightRule {
    /// Conditions on undercompressive records of the averaged speed:
    /// w+ - w- = -K |da| at slow records, +K |da| at fast ones.
    Scalar,
    /// Generalized scalar rule with a probe function pi(u, u'): jump
    /// magnitude K |pi+ - pi-| with the sign keyed to (psi+ - psi-) psi+.
    /// pi = abar reproduces the scalar rule exactly.
    Generalized(ProbeFn),
    /// Per-family system rule: transversal jumps -+K eps at records of the
    /// other family when alpha_j keeps its sign; own-family jumps
    /// -+K (lam_i+ - lam_i-) at undercompressive records keyed to rho_i.
    System,
}

fn sign_prod(am: f64, ap: f64, a: &RecordAnalysis) -> f64 {
    let scale = (a.psi_minus[0].abs()
        + a.psi_minus[1].abs()
        + a.psi_plus[0].abs()
        + a.psi_plus[1].abs())
    .max(1.0);
    if am.abs() <= 1e-13 * scale || ap.abs() <= 1e-13 * scale {
        0.0
    } else {
        am.signum() * ap.signum()
    }
}

/// Signed constrained jump J = w_right - w_left of component `family` at a
/// record; None when the rule leaves the record unconstrained.
pub fn rule_jump(rule: &WeightRule, rec: &RecordSeg, family: usize, k_const: f64) -> Option<f64> {
    let a = &rec.analysis;
    match rule {
        WeightRule::Scalar | WeightRule::Generalized(_) => {
            if !matches!(a.class, ShockClass::SlowUnder | ShockClass::FastUnder) {
                return None;
            }
            let psi_m = a.psi_minus[0];
            let psi_p = a.psi_plus[0];
            if psi_m * psi_p <= 0.0 {
                return None;
            }
            let s = ((psi_p - psi_m) * psi_p).signum();
            let dpi = match rule {
                WeightRule::Scalar => a.lam_plus - a.lam_minus,
                WeightRule::Generalized(pi) => {
                    pi(&a.trace_u_plus, &a.trace_up_plus)
                        - pi(&a.trace_u_minus, &a.trace_up_minus)
                }
                WeightRule::System => unreachable!(),
            };
            Some(k_const * s * dpi)
        }
        WeightRule::System => {
            let i = a.family;
            if family != i {
                if sign_prod(a.alpha_minus[family], a.alpha_plus[family], a) <= 0.0 {
                    return None;
                }
                Some(if family < i {
                    k_const * a.strength
                } else {
                    -k_const * a.strength
                })
            } else {
                if !matches!(a.class, ShockClass::SlowUnder | ShockClass::FastUnder) {
                    return None;
                }
                if sign_prod(a.alpha_minus[i], a.alpha_plus[i], a) <= 0.0 {
                    return None;
                }
                let scale = a.lam_bar.abs().max(1.0);
                if a.rho_owner.abs() <= 1e-14 * scale {
                    return None;
                }
                let dlam = a.lam_plus - a.lam_minus;
                Some(if a.rho_owner < 0.0 {
                    -k_const * dlam
                } else {
                    k_const * dlam
                })
            }
        }
    }
}

/// One straight line of a refined strip.
#[derive(Clone, Debug)]
pub struct Line {
    pub x0: f64,
    pub speed: f64,
    /// Some(record index in the parent slab) or None for a characteristic
    /// separatrix.
    pub rec: Option<usize>,
}

impl Line {
    pub fn x_at(&self, dt: f64) -> f64 {
        self.x0 + self.speed * dt
    }
}

/// Refined sub-slab: lines are straight and non-crossing inside it.
#[derive(Clone, Debug)]
pub struct Strip {
    pub t0: f64,
    pub t1: f64,
    /// Parent slab of the field.
    pub slab: usize,
    pub lines: Vec<Line>,
    /// Parent-cell index of every gap (lines.len() + 1 entries).
    pub parent_cell: Vec<usize>,
    /// Weight value per gap.
    pub values: Vec<f64>,
}

/// Per-family weight sheet.
pub struct Sheet {
    pub family: usize,
    pub strips: Vec<Strip>,
}

/// Piecewise-constant weight field on the refined arrangement.
pub struct WeightField {
    pub k_const: f64,
    pub c0: f64,
    /// Additive shift applied to guarantee positivity.
    pub shift: f64,
    pub w_min: f64,
    pub w_max: f64,
    /// Maximum oscillation before the shift.
    pub oscillation: f64,
    pub sheets: Vec<Sheet>,
    /// Crossings of own-family sign-change undercompressive records,
    /// logged as construction incidents.
    pub incidents: usize,
}

impl WeightField {
    pub fn c2(&self) -> f64 {
        self.w_max.max(1.0 / self.w_min)
    }

    /// Strip index of sheet `j` containing time t.
    fn strip_at(&self, j: usize, t: f64) -> usize {
        let strips = &self.sheets[j].strips;
        let mut lo = 0usize;
        let mut hi = strips.len();
        while lo + 1 < hi {
            let mid = (lo + hi) / 2;
            if strips[mid].t0 <= t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Weight of component j at (t, x).
    pub fn at(&self, j: usize, t: f64, x: f64) -> f64 {
        let s = self.strip_at(j, t);
        let strip = &self.sheets[j].strips[s];
        let dt = t - strip.t0;
        let mut idx = 0;
        for (k, l) in strip.lines.iter().enumerate() {
            if l.x_at(dt) <= x {
                idx = k + 1;
            } else {
                break;
            }
        }
        strip.values[idx]
    }

    /// Left/right weight values of component j flanking record `rec_idx`
    /// of parent slab `slab_idx` at time t.
    pub fn record_flanks(&self, j: usize, t: f64, slab_idx: usize, rec_idx: usize) -> (f64, f64) {
        let s = self.strip_at(j, t);
        let strip = &self.sheets[j].strips[s];
        debug_assert_eq!(strip.slab, slab_idx);
        for (li, l) in strip.lines.iter().enumerate() {
            if l.rec == Some(rec_idx) {
                return (strip.values[li], strip.values[li + 1]);
            }
        }
        // Record not found (should not happen): fall back to a point query.
        let x = self.sheets[j].strips[s]
            .lines
            .first()
            .map(|l| l.x0)
            .unwrap_or(0.0);
        (self.at(j, t, x), self.at(j, t, x))
    }
}

// ---------------------------------------------------------------------------
// Geometry walkers.
// ---------------------------------------------------------------------------

struct FieldGeom<'a> {
    field: &'a AveragedField,
    family: usize,
}

impl<'a> FieldGeom<'a> {
    fn slope(&self, slab: usize, cell: usize) -> f64 {
        self.field.slabs[slab].cells[cell].eig.lam[self.family]
    }

    /// Slab whose half-open interval (t0, t1] contains t.
    fn slab_below(&self, t: f64) -> Option<usize> {
        let slabs = &self.field.slabs;
        if t <= slabs[0].t0 + 1e-15 {
            return None;
        }
        let mut lo = 0usize;
        let mut hi = slabs.len();
        while lo + 1 < hi {
            let mid = (lo + hi) / 2;
            if slabs[mid].t0 < t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(lo)
    }
}

struct SepWalk {
    /// Straight pieces (t_lo, t_hi, x at t_lo, slope).
    pieces: Vec<(f64, f64, f64, f64)>,
    /// Record-contact times.
    contacts: Vec<f64>,
}

/// Cells of slab `s` from which a backward characteristic can leave the
/// point (t_hi, x) going down: the path with the cell's slope must sit
/// inside the cell's wedge slightly below the point. Record positions are
/// compared at an interior time where their order is strict.
fn admissible_launch_cells(geom: &FieldGeom, s: usize, t_hi: f64, x: f64) -> Vec<usize> {
    let field = geom.field;
    let slab = &field.slabs[s];
    let dt = 1e-3 * (t_hi - slab.t0).max(1e-30);
    let te = t_hi - dt;
    let mut out = Vec::new();
    for c in 0..slab.cells.len() {
        let a = geom.slope(s, c);
        let xp = x - a * dt;
        let tol = 1e-12 * (1.0 + x.abs());
        let ok_left = c == 0 || {
            let k = c - 1;
            slab.record_x_at(k, te) <= xp + tol
        };
        let ok_right = c == slab.records.len() || {
            slab.record_x_at(c, te) >= xp - tol
        };
        if ok_left && ok_right {
            out.push(c);
        }
    }
    out
}

/// Backward (downward) generalized characteristic through the parent
/// arrangement, starting at (t_start, x_start) inside wedge cell `c0` of
/// the slab below. Visits cells through the callback.
fn backward_walk(
    geom: &FieldGeom,
    t_start: f64,
    x_start: f64,
    c0: usize,
    visit: &mut dyn FnMut(usize, usize),
) -> SepWalk {
    let field = geom.field;
    let mut pieces = Vec::new();
    let mut contacts = Vec::new();
    let mut t = t_start;
    let mut x = x_start;
    let mut entry_cell: Option<usize> = Some(c0);
    let mut arrive_slope = f64::NAN;
    'outer: while let Some(s) = geom.slab_below(t) {
        let slab = &field.slabs[s];
        // Locate at the boundary itself; exact ties (arriving at a record
        // corner) break by the downward relative drift.
        let mut c = match entry_cell.take() {
            Some(c0) => c0,
            None => {
                let tol = 1e-11 * (1.0 + x.abs());
                let mut idx = 0;
                for k in 0..slab.records.len() {
                    let xr = slab.record_x_at(k, t);
                    if xr < x - tol || ((xr - x).abs() <= tol && slab.records[k].speed > arrive_slope)
                    {
                        idx += 1;
                    }
                }
                idx
            }
        };
        let mut guard = 0usize;
        loop {
            guard += 1;
            if guard > slab.records.len() + 4 {
                // Tolerance corner; abandon this walk.
                break 'outer;
            }
            visit(s, c);
            let a = geom.slope(s, c);
            let gtol = 1e-11 * (1.0 + x.abs());
            // Contact going down: the left boundary catches a slower path,
            // the right boundary a faster one.
            let mut tau = t - slab.t0;
            let mut hit: Option<(usize, bool)> = None; // (record, from_left)
            if c > 0 {
                let r = &slab.records[c - 1];
                let xr = r.x0 + r.speed * (t - slab.t0);
                let g = x - xr;
                if r.speed - a > RIDE_TOL * (1.0 + a.abs()) && g >= -gtol {
                    let tc = (g / (r.speed - a)).max(0.0);
                    if tc < tau {
                        tau = tc;
                        hit = Some((c - 1, false));
                    }
                }
            }
            if c < slab.records.len() {
                let r = &slab.records[c];
                let xr = r.x0 + r.speed * (t - slab.t0);
                let g = xr - x;
                if a - r.speed > RIDE_TOL * (1.0 + a.abs()) && g >= -gtol {
                    let tc = (g / (a - r.speed)).max(0.0);
                    if tc < tau {
                        tau = tc;
                        hit = Some((c, true));
                    }
                }
            }
            let t_next = t - tau;
            if tau > 0.0 {
                pieces.push((t_next, t, x - a * tau, a));
            }
            x -= a * tau;
            t = t_next;
            match hit {
                None => {
                    if t <= field.slabs[0].t0 + 1e-15 {
                        break 'outer;
                    }
                    arrive_slope = a;
                    continue 'outer;
                }
                Some((k, from_left)) => {
                    contacts.push(t);
                    let rec = &slab.records[k];
                    if rec.family == geom.family
                        && matches!(
                            rec.analysis.class,
                            ShockClass::Rarefaction | ShockClass::Degenerate | ShockClass::Lax
                        )
                    {
                        // Backward absorption (or a tolerance graze on a
                        // compressive record).
                        break 'outer;
                    }
                    // Transversal crossing: from the left side the path
                    // continues on the right, and conversely.
                    c = if from_left { k + 1 } else { k };
                }
            }
        }
    }
    SepWalk { pieces, contacts }
}

// ---------------------------------------------------------------------------
// Weight construction.
// ---------------------------------------------------------------------------

fn build_sheet(
    field: &AveragedField,
    family: usize,
    rule: &WeightRule,
    k_const: f64,
    c0: f64,
    incidents: &mut usize,
) -> Result<Sheet> {
    let geom = FieldGeom { field, family };
    // 1. Separatrices: backward characteristics from every branch point and
    //    from every record endpoint on the horizon, on both flanks.
    let mut launches: Vec<(f64, f64)> = field.branch_points.clone();
    if let Some(last) = field.slabs.last() {
        for k in 0..last.records.len() {
            launches.push((last.t1, last.record_x_at(k, last.t1)));
        }
    }
    let mut all_pieces: Vec<(f64, f64, f64, f64)> = Vec::new();
    let mut cuts: Vec<f64> = Vec::new();
    for &(tp, xp) in &launches {
        let Some(s) = geom.slab_below(tp) else { continue };
        for c0 in admissible_launch_cells(&geom, s, tp, xp) {
            let walk = backward_walk(&geom, tp, xp, c0, &mut |_, _| {});
            all_pieces.extend(walk.pieces.iter().copied());
            cuts.extend(walk.contacts.iter().copied());
        }
    }
    // 2. Sub-slab boundaries.
    let mut times: Vec<f64> = Vec::with_capacity(field.slabs.len() + cuts.len() + 1);
    for s in &field.slabs {
        times.push(s.t0);
    }
    times.push(field.t_end);
    times.extend(cuts);
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * (1.0 + b.abs()));

    // 3. Strips with their line sets.
    let mut strips: Vec<Strip> = Vec::with_capacity(times.len());
    let mut slab_idx = 0usize;
    for w in times.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        if t1 - t0 <= 1e-15 * (1.0 + t1) {
            continue;
        }
        while slab_idx + 1 < field.slabs.len() && field.slabs[slab_idx].t1 <= t0 + 1e-13 {
            slab_idx += 1;
        }
        let slab = &field.slabs[slab_idx];
        let tm = 0.5 * (t0 + t1);
        let mut lines: Vec<Line> = Vec::new();
        for (k, r) in slab.records.iter().enumerate() {
            lines.push(Line {
                x0: r.x0 + r.speed * (t0 - slab.t0),
                speed: r.speed,
                rec: Some(k),
            });
        }
        for &(plo, phi, px, pspeed) in &all_pieces {
            if plo <= t0 + 1e-12 && phi >= t1 - 1e-12 {
                lines.push(Line {
                    x0: px + pspeed * (t0 - plo),
                    speed: pspeed,
                    rec: None,
                });
            }
        }
        lines.sort_by(|p, q| {
            (p.x_at(tm - t0), p.speed)
                .partial_cmp(&(q.x_at(tm - t0), q.speed))
                .unwrap()
        });
        // Drop separatrix duplicates and separatrices riding a record.
        let mut dedup: Vec<Line> = Vec::new();
        for l in lines {
            if l.rec.is_none() {
                if let Some(prev) = dedup.last() {
                    let close = (prev.x_at(tm - t0) - l.x_at(tm - t0)).abs()
                        <= 1e-10 * (1.0 + l.x0.abs())
                        && (prev.speed - l.speed).abs() <= 1e-10 * (1.0 + l.speed.abs());
                    if close {
                        continue;
                    }
                }
            } else if let Some(prev) = dedup.last() {
                // A separatrix immediately left of a record at the same
                // position: keep the record, drop the separatrix.
                let close = prev.rec.is_none()
                    && (prev.x_at(tm - t0) - l.x_at(tm - t0)).abs()
                        <= 1e-10 * (1.0 + l.x0.abs())
                    && (prev.speed - l.speed).abs() <= 1e-10 * (1.0 + l.speed.abs());
                if close {
                    dedup.pop();
                }
            }
            dedup.push(l);
        }
        let lines = dedup;
        let mut parent_cell = Vec::with_capacity(lines.len() + 1);
        for g in 0..=lines.len() {
            let xm = if lines.is_empty() {
                0.0
            } else if g == 0 {
                lines[0].x_at(tm - t0) - 1.0
            } else if g == lines.len() {
                lines[g - 1].x_at(tm - t0) + 1.0
            } else {
                0.5 * (lines[g - 1].x_at(tm - t0) + lines[g].x_at(tm - t0))
            };
            parent_cell.push(field.cell_index_at(slab_idx, xm, tm));
        }
        strips.push(Strip {
            t0,
            t1,
            slab: slab_idx,
            lines,
            parent_cell,
            values: Vec::new(),
        });
    }

    // 4. Forward value DP over refined cells.
    let n_strips = strips.len();
    let mut values: Vec<Vec<Option<f64>>> = strips
        .iter()
        .map(|s| vec![None; s.lines.len() + 1])
        .collect();
    let budget: usize = strips.iter().map(|s| s.lines.len() + 1).sum::<usize>() + 16;
    for si in (0..n_strips).rev() {
        for ci in 0..strips[si].lines.len() + 1 {
            if values[si][ci].is_some() {
                continue;
            }
            let mut trail: Vec<(usize, usize, f64)> = Vec::new();
            let (mut s, mut c) = (si, ci);
            let mut delta = 0.0f64; // value(s, c) = value(start) + delta
            let start_value = loop {
                if let Some(v) = values[s][c] {
                    break v - delta;
                }
                trail.push((s, c, delta));
                if trail.len() > budget {
                    return Err(FtError::WeightConstruction(
                        "value walk failed to terminate".into(),
                    ));
                }
                match forward_hop(field, &strips, family, rule, k_const, s, c, incidents)? {
                    Hop::Anchor { change } => break c0 - (delta + change),
                    Hop::Next { strip, cell, change } => {
                        delta += change;
                        s = strip;
                        c = cell;
                    }
                }
            };
            if std::env::var_os("FT_TRACE_WALK").is_some() && si == 0 {
                eprintln!("walk (0, {ci}): start={start_value:.6} trail={trail:?}");
            }
            for &(ts, tc, d) in &trail {
                values[ts][tc] = Some(start_value + d);
            }
        }
    }
    for (s, strip) in strips.iter_mut().enumerate() {
        strip.values = values[s].iter().map(|v| v.unwrap()).collect();
    }
    Ok(Sheet { family, strips })
}

enum Hop {
    /// Horizon reached or path absorbed; `change` holds jumps collected
    /// during this hop before anchoring.
    Anchor { change: f64 },
    /// Continue in the strip above at the given cell.
    Next { strip: usize, cell: usize, change: f64 },
}

/// Advance the forward characteristic from the representative point of
/// (strip s, gap c) to the strip top, crossing record lines on the way.
#[allow(clippy::too_many_arguments)]
fn forward_hop(
    field: &AveragedField,
    strips: &[Strip],
    family: usize,
    rule: &WeightRule,
    k_const: f64,
    s: usize,
    c: usize,
    incidents: &mut usize,
) -> Result<Hop> {
    let strip = &strips[s];
    let slab = &field.slabs[strip.slab];
    let t_rep = 0.5 * (strip.t0 + strip.t1);
    let dt_rep = t_rep - strip.t0;
    let x_left = if c == 0 {
        strip
            .lines
            .first()
            .map(|l| l.x_at(dt_rep) - 2.0)
            .unwrap_or(-1.0)
    } else {
        strip.lines[c - 1].x_at(dt_rep)
    };
    let x_right = if c == strip.lines.len() {
        strip
            .lines
            .last()
            .map(|l| l.x_at(dt_rep) + 2.0)
            .unwrap_or(1.0)
    } else {
        strip.lines[c].x_at(dt_rep)
    };
    let mut t = t_rep;
    let mut x = 0.5 * (x_left + x_right);
    let mut cell = c;
    let mut change = 0.0f64;
    let mut guard = 0usize;
    loop {
        guard += 1;
        if guard > strip.lines.len() + 8 {
            return Err(FtError::WeightConstruction(
                "forward hop failed to leave a strip".into(),
            ));
        }
        let pc = strip.parent_cell[cell];
        let a = field.slabs[strip.slab].cells[pc].eig.lam[family];
        let gtol = 1e-11 * (1.0 + x.abs());
        let mut tau = strip.t1 - t;
        let mut hit: Option<(usize, bool)> = None; // (line, from_left)
        if cell > 0 {
            let l = &strip.lines[cell - 1];
            let g = x - l.x_at(t - strip.t0);
            if l.speed - a > RIDE_TOL * (1.0 + a.abs()) && g >= -gtol {
                let tc = (g / (l.speed - a)).max(0.0);
                if tc < tau {
                    tau = tc;
                    hit = Some((cell - 1, false));
                }
            }
        }
        if cell < strip.lines.len() {
            let l = &strip.lines[cell];
            let g = l.x_at(t - strip.t0) - x;
            if a - l.speed > RIDE_TOL * (1.0 + a.abs()) && g >= -gtol {
                let tc = (g / (a - l.speed)).max(0.0);
                if tc < tau {
                    tau = tc;
                    hit = Some((cell, true));
                }
            }
        }
        t += tau;
        x += a * tau;
        let Some((li, from_left)) = hit else {
            // Strip top (or the horizon). Relocate by comparing at the
            // boundary itself, breaking exact corner ties by the relative
            // slope; then collect the jump of every record whose side of
            // the path flipped across the boundary (records sweep past the
            // path exactly at corners when a corridor pinches out).
            if s + 1 >= strips.len() {
                return Ok(Hop::Anchor { change });
            }
            let above = &strips[s + 1];
            let tol = 1e-11 * (1.0 + x.abs());
            let mut idx = 0;
            for l in above.lines.iter() {
                if l.x0 < x - tol || ((l.x0 - x).abs() <= tol && l.speed < a) {
                    idx += 1;
                }
            }
            let above_slab = &field.slabs[above.slab];
            for (ka, l) in above.lines.iter().enumerate() {
                let Some(rka) = l.rec else { continue };
                let ra = &above_slab.records[rka];
                // Index of the same front's record line in the strip below.
                let below_idx = strip.lines.iter().position(|lb| {
                    lb.rec.is_some_and(|rkb| {
                        let rb = &slab.records[rkb];
                        rb.owner == ra.owner && rb.front == ra.front
                    })
                });
                let Some(kb) = below_idx else { continue };
                let below_left = kb < cell;
                let above_left = ka < idx;
                if below_left != above_left {
                    let jump = rule_jump(rule, ra, family, k_const).unwrap_or(0.0);
                    // The path was on the record's left iff the record was
                    // not left of it.
                    change += if below_left { -jump } else { jump };
                    WALK_TRACE.with(|w| {
                        if let Some(v) = w.borrow_mut().as_mut() {
                            v.push((s + 1, t, x, Some(rka), jump));
                        }
                    });
                }
            }
            WALK_TRACE.with(|w| {
                if let Some(v) = w.borrow_mut().as_mut() {
                    v.push((s + 1, t, x, None, f64::NAN));
                }
            });
            return Ok(Hop::Next { strip: s + 1, cell: idx, change });
        };
        let line = &strip.lines[li];
        WALK_TRACE.with(|w| {
            if let Some(v) = w.borrow_mut().as_mut() {
                v.push((s, t, x, line.rec, 0.0));
            }
        });
        match line.rec {
            None => {
                // Separatrices are parallel to the flow of their own cell;
                // contact can only be a tolerance graze. Pass through.
                cell = if from_left { li + 1 } else { li };
            }
            Some(rk) => {
                let rec = &slab.records[rk];
                let own = rec.family == family;
                if own && rec.analysis.class == ShockClass::Lax {
                    // Forward absorption: the arriving value anchors here.
                    return Ok(Hop::Anchor { change });
                }
                if own
                    && matches!(
                        rec.analysis.class,
                        ShockClass::SlowUnder | ShockClass::FastUnder
                    )
                    && sign_prod(
                        rec.analysis.alpha_minus[family],
                        rec.analysis.alpha_plus[family],
                        &rec.analysis,
                    ) < 0.0
                {
                    // A sign-change boundary of the own family crossed
                    // transversally; unconstrained, but logged.
                    *incidents += 1;
                }
                let jump = rule_jump(rule, rec, family, k_const).unwrap_or(0.0);
                // The constraint fixes w_right - w_left = jump; a crossing
                // from the left raises the carried value by jump.
                change += if from_left { jump } else { -jump };
                cell = if from_left { li + 1 } else { li };
            }
        }
    }
}

/// Scalar weight with the undercompressive jump conditions of the averaged
/// speed.
pub fn build_weight_scalar(field: &AveragedField, k_const: f64, c0: f64) -> Result<WeightField> {
    if field.n != 1 {
        return Err(FtError::Model("scalar weight needs a scalar field".into()));
    }
    build_weight(field, &WeightRule::Scalar, k_const, c0)
}

/// Generalized scalar weight with probe function pi; pi = abar reproduces
/// the scalar builder exactly.
pub fn build_weight_generalized(
    field: &AveragedField,
    pi: ProbeFn,
    k_const: f64,
    c0: f64,
) -> Result<WeightField> {
    if field.n != 1 {
        return Err(FtError::Model("generalized weight is scalar-only".into()));
    }
    build_weight(field, &WeightRule::Generalized(pi), k_const, c0)
}

/// Two-component p-system weight.
pub fn build_weight_system(field: &AveragedField, k_const: f64, c0: f64) -> Result<WeightField> {
    if field.n != 2 {
        return Err(FtError::Model("system weight needs two families".into()));
    }
    build_weight(field, &WeightRule::System, k_const, c0)
}

/// Build the weight for an arbitrary rule.
pub fn build_weight(
    field: &AveragedField,
    rule: &WeightRule,
    k_const: f64,
    c0: f64,
) -> Result<WeightField> {
    let mut incidents = 0usize;
    let mut sheets = Vec::with_capacity(field.n);
    for family in 0..field.n {
        sheets.push(build_sheet(field, family, rule, k_const, c0, &mut incidents)?);
    }
    // Positivity: build at c0, then shift so the field minimum lands at 1.
    // Jump equalities are invariant under the shift.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for sh in &sheets {
        for st in &sh.strips {
            for &v in &st.values {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    let shift = 1.0 - lo;
    for sh in sheets.iter_mut() {
        for st in sh.strips.iter_mut() {
            for v in st.values.iter_mut() {
                *v += shift;
            }
        }
    }
    Ok(WeightField {
        k_const,
        c0,
        shift,
        w_min: 1.0,
        w_max: hi + shift,
        oscillation: hi - lo,
        sheets,
        incidents,
    })
}

// ---------------------------------------------------------------------------
// Norms, ledger, audits.
// ---------------------------------------------------------------------------

/// Weighted norm int sum_j |alpha_j| w_j dx at time t (samplers use strip
/// midpoints; the value is exact there).
pub fn weighted_norm(field: &AveragedField, weight: &WeightField, t: f64) -> f64 {
    let mut total = 0.0;
    for (j, sheet) in weight.sheets.iter().enumerate() {
        let si = weight.strip_at(j, t);
        let strip = &sheet.strips[si];
        let dt = t - strip.t0;
        for g in 1..strip.lines.len() {
            let xl = strip.lines[g - 1].x_at(dt);
            let xr = strip.lines[g].x_at(dt);
            if xr <= xl {
                continue;
            }
            let cell = &field.slabs[strip.slab].cells[strip.parent_cell[g]];
            total += cell.alpha[j].abs() * strip.values[g] * (xr - xl);
        }
    }
    total
}

/// Plain L1 norm of psi = u' - u at time t (componentwise 1-norm).
pub fn l1_norm(field: &AveragedField, t: f64) -> f64 {
    let mut si = 0;
    for (k, s) in field.slabs.iter().enumerate() {
        if s.t0 <= t {
            si = k;
        }
    }
    let slab = &field.slabs[si];
    let mut total = 0.0;
    for k in 1..slab.records.len() {
        let xl = slab.record_x_at(k - 1, t);
        let xr = slab.record_x_at(k, t);
        if xr <= xl {
            continue;
        }
        let c = &slab.cells[k];
        total += (c.psi[0].abs() + c.psi[1].abs()) * (xr - xl);
    }
    total
}

/// Per-interval dissipation accounting.
#[derive(Clone, Debug, Default, serde::Serialize)]
pub struct LedgerInterval {
    pub t0: f64,
    pub t1: f64,
    /// Sum over records of sum_j beta_j^- w_j^- + beta_j^+ w_j^+.
    pub total: f64,
    pub lax_part: f64,
    pub under_part: f64,
    pub rarefaction_part: f64,
    pub degenerate_part: f64,
    /// sup over strongly dominant rarefaction records of |psi+ - psi-|.
    pub rarefaction_sup: f64,
    /// Budget for rarefaction records: sum of (|beta-| + |beta+|) w_max.
    pub rarefaction_budget: f64,
    /// Finite-difference derivative of the weighted norm on the interval.
    pub fd_derivative: f64,
}

#[derive(Clone, Debug, Default, serde::Serialize)]
pub struct DissipationLedger {
    pub intervals: Vec<LedgerInterval>,
    /// Max |ledger - finite difference| over intervals.
    pub max_fd_mismatch: f64,
    /// Cumulative compressive dissipation integral.
    pub lax_dissipation: f64,
    /// Cumulative undercompressive dissipation integral.
    pub under_dissipation: f64,
    /// Cumulative positive overshoot: sum of max(0, total) dt.
    pub overshoot: f64,
    /// Integral of the strongly-dominant-rarefaction supremum term.
    pub rarefaction_integral: f64,
}

/// Evaluate the record sums of the weighted-norm derivative on every
/// refined interval and cross-check against finite differences of the
/// weighted norm.
pub fn norm_derivative_ledger(
    field: &AveragedField,
    weight: &WeightField,
) -> Result<DissipationLedger> {
    if !field.compact_psi {
        return Err(FtError::Mismatch(
            "dissipation ledger needs matching far fields (psi in L1)".into(),
        ));
    }
    let mut times: Vec<f64> = Vec::new();
    for sh in &weight.sheets {
        for st in &sh.strips {
            times.push(st.t0);
            times.push(st.t1);
        }
    }
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * (1.0 + b.abs()));
    let mut ledger = DissipationLedger::default();
    for w in times.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        if t1 - t0 <= 1e-14 * (1.0 + t1) {
            continue;
        }
        let tm = 0.5 * (t0 + t1);
        let mut si = 0;
        for (k, s) in field.slabs.iter().enumerate() {
            if s.t0 <= tm {
                si = k;
            }
        }
        let slab = &field.slabs[si];
        let mut iv = LedgerInterval { t0, t1, ..Default::default() };
        for (k, rec) in slab.records.iter().enumerate() {
            let a = &rec.analysis;
            let mut b = 0.0;
            for j in 0..field.n {
                let (wm, wp) = weight.record_flanks(j, tm, si, k);
                b += a.beta_minus[j] * wm + a.beta_plus[j] * wp;
            }
            iv.total += b;
            match a.class {
                ShockClass::Lax => iv.lax_part += b,
                ShockClass::SlowUnder | ShockClass::FastUnder => iv.under_part += b,
                ShockClass::Degenerate => iv.degenerate_part += b,
                ShockClass::Rarefaction => {
                    iv.rarefaction_part += b;
                    let dpsi = (a.psi_plus[0] - a.psi_minus[0]).abs()
                        + (a.psi_plus[1] - a.psi_minus[1]).abs();
                    if a.strongly_dominant_eigvec(field.kappa2) {
                        iv.rarefaction_sup = iv.rarefaction_sup.max(dpsi);
                    }
                    for j in 0..field.n {
                        iv.rarefaction_budget +=
                            (a.beta_minus[j].abs() + a.beta_plus[j].abs()) * weight.w_max;
                    }
                }
            }
        }
        // The weighted norm is linear in t inside the interval.
        let ta = t0 + 0.25 * (t1 - t0);
        let tb = t0 + 0.75 * (t1 - t0);
        let na = weighted_norm(field, weight, ta);
        let nb = weighted_norm(field, weight, tb);
        iv.fd_derivative = (nb - na) / (tb - ta);
        ledger.max_fd_mismatch = ledger
            .max_fd_mismatch
            .max((iv.fd_derivative - iv.total).abs());
        ledger.lax_dissipation += -iv.lax_part * (t1 - t0);
        ledger.under_dissipation += -iv.under_part * (t1 - t0);
        ledger.overshoot += iv.total.max(0.0) * (t1 - t0);
        ledger.rarefaction_integral += iv.rarefaction_sup * (t1 - t0);
        ledger.intervals.push(iv);
    }
    Ok(ledger)
}

/// Field-wide audit of the weight constraints.
#[derive(Clone, Debug, Default, serde::Serialize)]
pub struct ConstraintAudit {
    /// Worst |dw - J| over records where the rule fixes the jump.
    pub worst_equality_residual: f64,
    pub equality_checks: usize,
    /// Violations of the stability-side inequality constraints.
    pub inequality_violations: usize,
    /// Dominant transversal components with flipped alpha signs.
    pub sign_corollary_violations: usize,
    /// Strongly dominant undercompressive records whose imposed jump
    /// disagrees with the sign the stability constraints require.
    pub bridge_violations: usize,
    /// Max |dr_i| / |dlam_i| observed (eigenvector-eigenvalue coupling).
    pub eigenv_ratio: f64,
}

/// Verify the jump equalities and the stability-side inequalities of the
/// built weight at every record of every refined strip.
pub fn check_weight_constraints(
    field: &AveragedField,
    weight: &WeightField,
    rule: &WeightRule,
    k_const: f64,
) -> ConstraintAudit {
    let mut audit = ConstraintAudit::default();
    for (j, sheet) in weight.sheets.iter().enumerate() {
        for strip in &sheet.strips {
            let slab = &field.slabs[strip.slab];
            for (li, line) in strip.lines.iter().enumerate() {
                let Some(rk) = line.rec else { continue };
                let rec = &slab.records[rk];
                let a = &rec.analysis;
                let dw = strip.values[li + 1] - strip.values[li];
                if let Some(jump) = rule_jump(rule, rec, j, k_const) {
                    audit.equality_checks += 1;
                    audit.worst_equality_residual =
                        audit.worst_equality_residual.max((dw - jump).abs());
                }
                let i = a.family;
                if j != i {
                    if a.dominant(field.kappa1, j) {
                        let sp = sign_prod(a.alpha_minus[j], a.alpha_plus[j], a);
                        if sp > 0.0 {
                            let need = k_const * a.amat_jump;
                            let ok = if j < i {
                                dw >= need - 1e-9
                            } else {
                                dw <= -need + 1e-9
                            };
                            if !ok {
                                audit.inequality_violations += 1;
                            }
                        } else if sp < 0.0 {
                            audit.sign_corollary_violations += 1;
                        }
                    }
                } else if matches!(a.class, ShockClass::SlowUnder | ShockClass::FastUnder) {
                    let dlam = (a.lam_plus - a.lam_minus).abs();
                    if a.strongly_dominant_eigvec(field.kappa2) {
                        let ok = match a.class {
                            ShockClass::SlowUnder => dw <= -k_const * dlam + 1e-9,
                            _ => dw >= k_const * dlam - 1e-9,
                        };
                        if !ok {
                            audit.bridge_violations += 1;
                        }
                    } else if a.dominant(field.kappa1, i)
                        && sign_prod(a.alpha_minus[i], a.alpha_plus[i], a) > 0.0
                        && matches!(rule, WeightRule::System)
                        && (dw.abs() - k_const * dlam).abs() > 1e-9
                    {
                        audit.inequality_violations += 1;
                    }
                }
                let dl = (a.lam_plus - a.lam_minus).abs();
                if dl > 1e-12 {
                    let dr = crate::linalg::norm2(crate::linalg::sub2(
                        a.eig_plus.r[i],
                        a.eig_minus.r[i],
                    ));
                    audit.eigenv_ratio = audit.eigenv_ratio.max(dr / dl);
                }
            }
        }
    }
    audit
}

/// Verdict of the L1 stability estimate.
#[derive(Clone, Debug, serde::Serialize)]
pub struct StabilityVerdict {
    pub l1_initial: f64,
    pub l1_max: f64,
    pub max_ratio: f64,
    /// Constant in |psi(t)| <= C (|psi(0)| + rarefaction integral).
    pub c_estimate: f64,
    pub rarefaction_integral: f64,
    pub weighted_initial: f64,
    pub weighted_final: f64,
    pub overshoot: f64,
}

/// Evaluate the L1 stability estimate along the pair.
pub fn stability_estimate_check(
    field: &AveragedField,
    weight: &WeightField,
    ledger: &DissipationLedger,
) -> StabilityVerdict {
    let mut l1_max = f64::MIN;
    let mut l1_initial = 0.0;
    for (k, slab) in field.slabs.iter().enumerate() {
        let ta = slab.t0 + 1e-3 * (slab.t1 - slab.t0);
        let tb = slab.t1 - 1e-3 * (slab.t1 - slab.t0);
        let na = l1_norm(field, ta);
        let nb = l1_norm(field, tb);
        if k == 0 {
            l1_initial = na;
        }
        l1_max = l1_max.max(na).max(nb);
    }
    let denom = l1_initial + ledger.rarefaction_integral;
    let first = weight.sheets[0]
        .strips
        .first()
        .map(|s| 0.5 * (s.t0 + s.t1))
        .unwrap_or(0.0);
    let last = weight.sheets[0]
        .strips
        .last()
        .map(|s| 0.5 * (s.t0 + s.t1))
        .unwrap_or(0.0);
    StabilityVerdict {
        l1_initial,
        l1_max,
        max_ratio: if l1_initial > 0.0 { l1_max / l1_initial } else { 1.0 },
        c_estimate: if denom > 0.0 { l1_max / denom } else { 1.0 },
        rarefaction_integral: ledger.rarefaction_integral,
        weighted_initial: weighted_norm(field, weight, first),
        weighted_final: weighted_norm(field, weight, last),
        overshoot: ledger.overshoot,
    }
}

// ---------------------------------------------------------------------------
// Backward characteristic cover (diagnostic deliverable).
// ---------------------------------------------------------------------------

pub struct CharacteristicPath {
    pub family: usize,
    /// Polyline (t, x) from the launch point downward.
    pub points: Vec<(f64, f64)>,
    pub contacts: usize,
}

pub struct CharacteristicCover {
    pub paths: Vec<CharacteristicPath>,
    pub visited_cells: usize,
    pub total_cells: usize,
    pub full_coverage: bool,
}

/// Launch backward generalized characteristics from every final-time cell
/// and record endpoint plus every branch point, recording cell coverage.
pub fn backward_characteristics(
    field: &AveragedField,
    family: usize,
) -> Result<CharacteristicCover> {
    let geom = FieldGeom { field, family };
    let mut visited: Vec<Vec<bool>> = field
        .slabs
        .iter()
        .map(|s| vec![false; s.cells.len()])
        .collect();
    let total_cells: usize = visited.iter().map(|v| v.len()).sum();
    // Launch from every record endpoint (both ends of every record segment
    // of every slab), every final-time cell, and every branch point.
    let mut launches: Vec<(f64, f64)> = Vec::new();
    for slab in &field.slabs {
        for k in 0..slab.records.len() {
            launches.push((slab.t1, slab.record_x_at(k, slab.t1)));
        }
    }
    if let Some(last) = field.slabs.last() {
        let t = last.t1;
        if last.records.is_empty() {
            launches.push((t, 0.0));
        } else {
            for c in 0..last.cells.len() {
                let xm = if c == 0 {
                    last.record_x_at(0, t) - 1.0
                } else if c == last.records.len() {
                    last.record_x_at(last.records.len() - 1, t) + 1.0
                } else {
                    0.5 * (last.record_x_at(c - 1, t) + last.record_x_at(c, t))
                };
                launches.push((t, xm));
            }
        }
    }
    launches.extend(field.branch_points.iter().copied());
    let mut paths = Vec::new();
    for &(tp, xp) in &launches {
        let Some(s) = geom.slab_below(tp) else { continue };
        for c0 in admissible_launch_cells(&geom, s, tp, xp) {
            let walk = backward_walk(&geom, tp, xp, c0, &mut |s, c| {
                visited[s][c] = true;
            });
            let mut points: Vec<(f64, f64)> = Vec::new();
            for &(tl, th, xl, sp) in walk.pieces.iter() {
                if points.is_empty() {
                    points.push((th, xl + sp * (th - tl)));
                }
                points.push((tl, xl));
            }
            paths.push(CharacteristicPath { family, points, contacts: walk.contacts.len() });
        }
    }
    let visited_cells: usize = visited
        .iter()
        .map(|v| v.iter().filter(|&&b| b).count())
        .sum();
    Ok(CharacteristicCover {
        paths,
        visited_cells,
        total_cells,
        full_coverage: visited_cells == total_cells,
    })
}


#[doc(hidden)]
pub fn debug_trace_cell(
    field: &AveragedField,
    weight: &WeightField,
    rule: &WeightRule,
    k_const: f64,
    family: usize,
    strip0: usize,
    cell0: usize,
) -> (f64, Vec<(usize, usize, f64)>) {
    let strips: Vec<Strip> = weight.sheets[family].strips.clone();
    let mut incidents = 0usize;
    let mut s = strip0;
    let mut c = cell0;
    let mut delta = 0.0;
    let mut log = Vec::new();
    loop {
        match forward_hop(field, &strips, family, rule, k_const, s, c, &mut incidents).unwrap() {
            Hop::Anchor { change } => return (delta + change, log),
            Hop::Next { strip, cell, change } => {
                delta += change;
                log.push((strip, cell, delta));
                s = strip;
                c = cell;
            }
        }
    }
}
