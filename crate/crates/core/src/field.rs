//! The averaged coefficient field of a pair of tracked runs: the merged
//! space-time arrangement of both runs' fronts, the per-cell averaged
//! eigenstructure, and the classification and algebra of every
//! discontinuity of the field.

use crate::error::{FtError, Result};
use crate::flux::{EigenData, FluxModel, State, BAND_SEPARATION_FLOOR};
use crate::linalg::{dot2, norm2, sub2, Mat2};
use crate::riemann::WaveKind;
use crate::tracking::TrackedRun;
use std::sync::Arc;

/// Nature of a discontinuity of the averaged field (three-way comparison of
/// the one-sided family speeds with the shock speed).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum ShockClass {
    Lax,
    SlowUnder,
    FastUnder,
    Rarefaction,
    /// Some comparison falls inside the tolerance band (characteristic on a
    /// side); excluded from strict census assertions.
    Degenerate,
}

/// Which run owns the discontinuity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum RunTag {
    A,
    B,
}

/// Classification by the three-way comparison with a relative tolerance
/// band; boundary cases are Degenerate.
pub fn classify_shock(lam_minus: f64, lam_bar: f64, lam_plus: f64) -> ShockClass {
    let tol = 1e-12 * lam_bar.abs().max(lam_minus.abs()).max(lam_plus.abs()).max(1.0);
    if (lam_minus - lam_bar).abs() <= tol || (lam_plus - lam_bar).abs() <= tol {
        return ShockClass::Degenerate;
    }
    match (lam_minus > lam_bar, lam_plus > lam_bar) {
        (true, false) => ShockClass::Lax,
        (true, true) => ShockClass::SlowUnder,
        (false, false) => ShockClass::FastUnder,
        (false, true) => ShockClass::Rarefaction,
    }
}

/// Everything computed at one discontinuity of the averaged field.
#[derive(Clone, Debug)]
pub struct RecordAnalysis {
    pub family: usize,
    pub class: ShockClass,
    pub lam_bar: f64,
    /// One-sided family speeds of the record's own family.
    pub lam_minus: f64,
    pub lam_plus: f64,
    pub eig_minus: EigenData,
    pub eig_plus: EigenData,
    pub amat_minus: Mat2,
    pub amat_plus: Mat2,
    /// Frobenius norm of the matrix jump.
    pub amat_jump: f64,
    pub psi_minus: [f64; 2],
    pub psi_plus: [f64; 2],
    /// Flank traces of the two solutions.
    pub trace_u_minus: State,
    pub trace_up_minus: State,
    pub trace_u_plus: State,
    pub trace_up_plus: State,
    pub alpha_minus: [f64; 2],
    pub alpha_plus: [f64; 2],
    pub beta_minus: [f64; 2],
    pub beta_plus: [f64; 2],
    pub gamma_minus: [f64; 2],
    pub gamma_plus: [f64; 2],
    /// mu-strength of the owning front.
    pub strength: f64,
    /// rho_i with the owner-oriented i-component.
    pub rho_owner: f64,
    /// Terms for dominance flags at arbitrary kappa: |beta_j^-|.
    pub dom_lhs: [f64; 2],
    /// |r_{i+} - r_{i-}| |beta_i^-| + |A+ - A-| sum_{k != i} |beta_k^-|.
    pub dom_rhs: f64,
    /// |dlam_i| min(|alpha_i^-|, |alpha_i^+|).
    pub strong_lhs: f64,
    /// Eigenvector-form right side of the strong dominance inequality.
    pub strong_rhs_eigvec: f64,
    /// Matrix-form right side.
    pub strong_rhs_matrix: f64,
}

impl RecordAnalysis {
    pub fn dominant(&self, kappa1: f64, j: usize) -> bool {
        kappa1 * self.dom_lhs[j] >= self.dom_rhs
    }

    pub fn strongly_dominant_eigvec(&self, kappa2: f64) -> bool {
        kappa2 * self.strong_lhs >= self.strong_rhs_eigvec
    }

    pub fn strongly_dominant_matrix(&self, kappa2: f64) -> bool {
        kappa2 * self.strong_lhs >= self.strong_rhs_matrix
    }

    /// Residual of the jump relation
    /// gamma_j^+ = gamma_j^- + sum_k l_{j+} (r_{k-} - r_{k+}) gamma_k^-.
    pub fn jump_relation_residual(&self, n: usize) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..n {
            let mut rhs = self.gamma_minus[j];
            for k in 0..n {
                rhs += dot2(
                    self.eig_plus.l[j],
                    sub2(self.eig_minus.r[k], self.eig_plus.r[k]),
                ) * self.gamma_minus[k];
            }
            worst = worst.max((self.gamma_plus[j] - rhs).abs());
        }
        worst
    }

    /// Residual of the second (projected) form of the jump relation.
    pub fn jump_relation_residual_b(&self, n: usize) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..n {
            let rp = self.eig_plus.r[j];
            let rm = self.eig_minus.r[j];
            let denom = 1.0 + dot2(rp, rm);
            let mut omega = [0.0, 0.0];
            for k in 0..n {
                if k == j {
                    continue;
                }
                let d = sub2(self.eig_minus.r[k], self.eig_plus.r[k]);
                let dg = self.gamma_minus[k] - self.gamma_plus[k];
                omega[0] += self.gamma_minus[k] * d[0] + dg * self.eig_plus.r[k][0];
                omega[1] += self.gamma_minus[k] * d[1] + dg * self.eig_plus.r[k][1];
            }
            let num = [rm[0] + rp[0], rm[1] + rp[1]];
            let rhs = self.gamma_minus[j] + dot2(num, omega) / denom;
            worst = worst.max((self.gamma_plus[j] - rhs).abs());
        }
        worst
    }

    /// Residual of the eigenbasis reconstruction sum_j alpha_j r_j = psi on
    /// both sides.
    pub fn reconstruction_residual(&self, n: usize) -> f64 {
        let mut worst = 0.0f64;
        for (eig, alpha, psi) in [
            (&self.eig_minus, &self.alpha_minus, &self.psi_minus),
            (&self.eig_plus, &self.alpha_plus, &self.psi_plus),
        ] {
            let mut acc = [0.0, 0.0];
            for j in 0..n {
                acc[0] += alpha[j] * eig.r[j][0];
                acc[1] += alpha[j] * eig.r[j][1];
            }
            worst = worst.max((acc[0] - psi[0]).abs() + (acc[1] - psi[1]).abs());
        }
        worst
    }

    /// Worst violation of the characteristic-flux sign table (0 when the
    /// table holds).
    pub fn sign_table_violation(&self, n: usize) -> f64 {
        let i = self.family;
        let mut worst = 0.0f64;
        for j in 0..n {
            if j < i {
                worst = worst.max(self.beta_plus[j]).max(-self.beta_minus[j]);
            } else if j > i {
                worst = worst.max(-self.beta_plus[j]).max(self.beta_minus[j]);
            }
        }
        match self.class {
            ShockClass::Lax => worst.max(self.beta_minus[i]).max(self.beta_plus[i]),
            ShockClass::Rarefaction => worst.max(-self.beta_minus[i]).max(-self.beta_plus[i]),
            ShockClass::SlowUnder => worst.max(self.beta_minus[i]).max(-self.beta_plus[i]),
            ShockClass::FastUnder => worst.max(-self.beta_minus[i]).max(self.beta_plus[i]),
            ShockClass::Degenerate => worst,
        }
    }
}

/// A discontinuity segment of the merged arrangement within one slab.
#[derive(Clone, Debug)]
pub struct RecordSeg {
    pub owner: RunTag,
    pub front: usize,
    pub family: usize,
    /// Positions at the slab's start and end times.
    pub x0: f64,
    pub x1: f64,
    pub speed: f64,
    pub kind: WaveKind,
    /// Entropy admissibility of the owning front.
    pub admissible: bool,
    pub analysis: RecordAnalysis,
}

/// A maximal constant-states region between records within a slab.
#[derive(Clone, Debug)]
pub struct Cell {
    pub u: State,
    pub up: State,
    pub psi: [f64; 2],
    pub eig: EigenData,
    pub alpha: [f64; 2],
}

/// Horizontal slab of the arrangement between consecutive event/crossing
/// times; records are straight and non-crossing inside it.
#[derive(Clone, Debug)]
pub struct Slab {
    pub t0: f64,
    pub t1: f64,
    pub records: Vec<RecordSeg>,
    /// records.len() + 1 cells, left to right.
    pub cells: Vec<Cell>,
}

impl Slab {
    pub fn record_x_at(&self, k: usize, t: f64) -> f64 {
        let r = &self.records[k];
        r.x0 + r.speed * (t - self.t0)
    }
}

/// The averaged coefficient field of a pair of runs.
pub struct AveragedField {
    pub model: Arc<FluxModel>,
    pub n: usize,
    pub h: f64,
    pub t_end: f64,
    pub slabs: Vec<Slab>,
    pub bands: Vec<(f64, f64)>,
    pub kappa1: f64,
    pub kappa2: f64,
    /// Points where the record pattern changes: interactions of either run
    /// and crossings between the two runs' fronts.
    pub branch_points: Vec<(f64, f64)>,
    /// psi vanishes at both far fields (compact support; required by the
    /// L1 and weighted-norm machinery).
    pub compact_psi: bool,
}

fn owner_mu_strength(model: &FluxModel, f: &crate::tracking::Front) -> f64 {
    (model.mu(f.family, &f.right) - model.mu(f.family, &f.left)).abs()
}

/// Build the merged arrangement of two runs over the same horizon and
/// analyse every record. Rejects pairs whose family bands overlap.
pub fn build_averaged_field(
    run_a: &TrackedRun,
    run_b: &TrackedRun,
    kappa1: f64,
    kappa2: f64,
) -> Result<AveragedField> {
    if !Arc::ptr_eq(&run_a.model, &run_b.model) {
        return Err(FtError::Mismatch(
            "runs must share one flux model instance".into(),
        ));
    }
    if (run_a.t_end - run_b.t_end).abs() > 1e-12 {
        return Err(FtError::Mismatch("runs have different horizons".into()));
    }
    let model = run_a.model.clone();
    let n = model.n_families();
    let t_end = run_a.t_end;

    // Slab boundaries: both runs' events plus pairwise crossings of their
    // fronts (interaction points of the coefficient field).
    let mut times: Vec<f64> = vec![0.0, t_end];
    let mut branch_points: Vec<(f64, f64)> = Vec::new();
    for e in run_a.events.iter().chain(run_b.events.iter()) {
        times.push(e.t);
        if e.t > 0.0 && e.t < t_end {
            branch_points.push((e.t, e.x));
        }
    }
    for fa in &run_a.fronts {
        for fb in &run_b.fronts {
            if fa.speed == fb.speed {
                continue;
            }
            let t = (fb.x_birth - fb.speed * fb.t_birth - fa.x_birth + fa.speed * fa.t_birth)
                / (fa.speed - fb.speed);
            let lo = fa.t_birth.max(fb.t_birth);
            let hi = fa.t_death.min(fb.t_death).min(t_end);
            if t > lo && t < hi {
                times.push(t);
                branch_points.push((t, fa.x_at(t)));
            }
        }
    }
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * (1.0 + b.abs()));

    let far_u = run_a.initial.vals[0];
    let far_up = run_b.initial.vals[0];
    let compact_psi = far_u == far_up
        && run_a.initial.vals.last() == run_b.initial.vals.last();

    let mut slabs = Vec::with_capacity(times.len() - 1);
    let mut bands = vec![(f64::INFINITY, f64::NEG_INFINITY); n];
    for w in times.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        if t1 - t0 <= 1e-15 * (1.0 + t1) {
            continue;
        }
        let tm = 0.5 * (t0 + t1);
        struct Seg {
            owner: RunTag,
            front: usize,
            xm: f64,
        }
        let mut segs: Vec<Seg> = Vec::new();
        for (owner, run) in [(RunTag::A, run_a), (RunTag::B, run_b)] {
            for f in run.fronts_alive_between(t0, t1) {
                segs.push(Seg { owner, front: f.id, xm: f.x_at(tm) });
            }
        }
        segs.sort_by(|p, q| {
            (p.xm, p.owner == RunTag::B, p.front)
                .partial_cmp(&(q.xm, q.owner == RunTag::B, q.front))
                .unwrap()
        });
        // Chain the constant states left to right.
        let mut cells_states = Vec::with_capacity(segs.len() + 1);
        let (mut u, mut up) = (far_u, far_up);
        cells_states.push((u, up));
        for s in &segs {
            match s.owner {
                RunTag::A => u = run_a.fronts[s.front].right,
                RunTag::B => up = run_b.fronts[s.front].right,
            }
            cells_states.push((u, up));
        }
        let mut cells = Vec::with_capacity(cells_states.len());
        for (u, up) in cells_states {
            let (_, eig) = model.averaged(&u, &up)?;
            let psi = up.sub(&u);
            let alpha = eig.components(psi);
            for (j, band) in bands.iter_mut().enumerate().take(n) {
                band.0 = band.0.min(eig.lam[j]);
                band.1 = band.1.max(eig.lam[j]);
            }
            cells.push(Cell { u, up, psi, eig, alpha });
        }
        let mut records = Vec::with_capacity(segs.len());
        for (k, s) in segs.iter().enumerate() {
            let run = match s.owner {
                RunTag::A => run_a,
                RunTag::B => run_b,
            };
            let f = &run.fronts[s.front];
            let analysis = analyse_record(&model, s.owner, f, &cells[k], &cells[k + 1])?;
            records.push(RecordSeg {
                owner: s.owner,
                front: s.front,
                family: f.family,
                x0: f.x_at(t0),
                x1: f.x_at(t1),
                speed: f.speed,
                kind: f.kind,
                admissible: f.admissible,
                analysis,
            });
        }
        slabs.push(Slab { t0, t1, records, cells });
    }
    // Uniform band separation across the whole field.
    for j in 1..n {
        if bands[j].0 - bands[j - 1].1 < BAND_SEPARATION_FLOOR {
            return Err(FtError::BandOverlap(format!(
                "field bands overlap: [{:.4}, {:.4}] vs [{:.4}, {:.4}]",
                bands[j - 1].0,
                bands[j - 1].1,
                bands[j].0,
                bands[j].1
            )));
        }
    }
    Ok(AveragedField {
        model,
        n,
        h: run_a.h,
        t_end,
        slabs,
        bands,
        kappa1,
        kappa2,
        branch_points,
        compact_psi,
    })
}

fn analyse_record(
    model: &FluxModel,
    owner: RunTag,
    front: &crate::tracking::Front,
    left: &Cell,
    right: &Cell,
) -> Result<RecordAnalysis> {
    let n = model.n_families();
    let i = front.family;
    let lam_bar = front.speed;
    let (am, em) = model.averaged(&left.u, &left.up)?;
    let (ap, ep) = model.averaged(&right.u, &right.up)?;
    let psi_m = left.psi;
    let psi_p = right.psi;
    let alpha_m = em.components(psi_m);
    let alpha_p = ep.components(psi_p);
    let mut beta_m = [0.0; 2];
    let mut beta_p = [0.0; 2];
    let mut gamma_m = [0.0; 2];
    let mut gamma_p = [0.0; 2];
    for j in 0..n {
        gamma_m[j] = (lam_bar - em.lam[j]) * alpha_m[j];
        gamma_p[j] = (lam_bar - ep.lam[j]) * alpha_p[j];
        beta_m[j] = (lam_bar - em.lam[j]) * alpha_m[j].abs();
        beta_p[j] = (ep.lam[j] - lam_bar) * alpha_p[j].abs();
    }
    let amat_jump = ap.sub(&am).frobenius();
    let class = classify_shock(em.lam[i], lam_bar, ep.lam[i]);

    // Dominance terms (kappa-independent pieces).
    let dr_i = norm2(sub2(ep.r[i], em.r[i]));
    let sum_beta_trans: f64 = (0..n).filter(|&k| k != i).map(|k| beta_m[k].abs()).sum();
    let dom_rhs = dr_i * beta_m[i].abs() + amat_jump * sum_beta_trans;
    let dom_lhs = [beta_m[0].abs(), beta_m[1].abs()];

    let dlam_i = ep.lam[i] - em.lam[i];
    let strong_lhs = dlam_i.abs() * alpha_m[i].abs().min(alpha_p[i].abs());
    let sum_alpha_trans: f64 = (0..n).filter(|&k| k != i).map(|k| alpha_m[k].abs()).sum();
    let owner_jump = front.right.dist1(&front.left);
    let strong_rhs_eigvec =
        dr_i * (em.lam[i] - lam_bar).abs() * alpha_m[i].abs() + owner_jump * sum_alpha_trans;
    let strong_rhs_matrix = amat_jump * sum_alpha_trans;

    // Owner-oriented rho_i: alpha_i(x-, probe) (mu_i(x+) - mu_i(x-)) where
    // x-+ are the owner's traces and the probe is the other solution's
    // local value. The field components are l . (u' - u); for an owner-A
    // record the lemma orientation flips the sign.
    let d_mu = model.mu(i, &front.right) - model.mu(i, &front.left);
    let alpha_lemma_minus = match owner {
        RunTag::A => -alpha_m[i],
        RunTag::B => alpha_m[i],
    };
    let rho_owner = alpha_lemma_minus * d_mu;

    Ok(RecordAnalysis {
        family: i,
        class,
        lam_bar,
        lam_minus: em.lam[i],
        lam_plus: ep.lam[i],
        eig_minus: em,
        eig_plus: ep,
        amat_minus: am,
        amat_plus: ap,
        amat_jump,
        psi_minus: psi_m,
        psi_plus: psi_p,
        trace_u_minus: left.u,
        trace_up_minus: left.up,
        trace_u_plus: right.u,
        trace_up_plus: right.up,
        alpha_minus: alpha_m,
        alpha_plus: alpha_p,
        beta_minus: beta_m,
        beta_plus: beta_p,
        gamma_minus: gamma_m,
        gamma_plus: gamma_p,
        strength: owner_mu_strength(model, front),
        rho_owner,
        dom_lhs,
        dom_rhs,
        strong_lhs,
        strong_rhs_eigvec,
        strong_rhs_matrix,
    })
}

impl AveragedField {
    /// Iterate over every record segment with its slab index.
    pub fn records(&self) -> impl Iterator<Item = (usize, &RecordSeg)> {
        self.slabs
            .iter()
            .enumerate()
            .flat_map(|(s, slab)| slab.records.iter().map(move |r| (s, r)))
    }

    /// Cell containing position x in slab s at time t.
    pub fn cell_index_at(&self, s: usize, x: f64, t: f64) -> usize {
        let slab = &self.slabs[s];
        let mut idx = 0;
        for k in 0..slab.records.len() {
            if slab.record_x_at(k, t) <= x {
                idx = k + 1;
            } else {
                break;
            }
        }
        idx
    }

    /// Merged faces of the front arrangement: cells joined across slab
    /// interfaces wherever their x-intervals overlap with positive length.
    /// Returns the face id of every (slab, cell) and the face count.
    pub fn faces(&self) -> (Vec<Vec<usize>>, usize) {
        let mut parent: Vec<usize> = Vec::new();
        let mut ids: Vec<Vec<usize>> = Vec::with_capacity(self.slabs.len());
        for slab in &self.slabs {
            let row: Vec<usize> = (0..slab.cells.len())
                .map(|_| {
                    let id = parent.len();
                    parent.push(id);
                    id
                })
                .collect();
            ids.push(row);
        }
        fn find(parent: &mut Vec<usize>, mut a: usize) -> usize {
            while parent[a] != a {
                parent[a] = parent[parent[a]];
                a = parent[a];
            }
            a
        }
        for s in 0..self.slabs.len().saturating_sub(1) {
            let t = self.slabs[s].t1;
            let cb = interval_cuts(&self.slabs[s], t);
            let ca = interval_cuts(&self.slabs[s + 1], t);
            for (i, (bl, bh)) in cb.iter().enumerate() {
                for (j, (al, ah)) in ca.iter().enumerate() {
                    let lo = bl.max(*al);
                    let hi = bh.min(*ah);
                    if hi - lo > 1e-11 * (1.0 + hi.abs()) {
                        let ra = find(&mut parent, ids[s][i]);
                        let rb = find(&mut parent, ids[s + 1][j]);
                        if ra != rb {
                            parent[ra] = rb;
                        }
                    }
                }
            }
        }
        let mut remap = std::collections::HashMap::new();
        let mut out = Vec::with_capacity(ids.len());
        for row in &ids {
            let mut orow = Vec::with_capacity(row.len());
            for &id in row {
                let root = find(&mut parent, id);
                let len = remap.len();
                let fid = *remap.entry(root).or_insert(len);
                orow.push(fid);
            }
            out.push(orow);
        }
        let count = remap.len();
        (out, count)
    }

    /// Sign of alpha_family per cell: -1, 0, +1 with a zero band.
    pub fn cell_sign(&self, s: usize, c: usize, family: usize) -> i8 {
        let cell = &self.slabs[s].cells[c];
        let scale = cell.psi[0].abs() + cell.psi[1].abs() + 1.0;
        let a = cell.alpha[family];
        if a.abs() <= 1e-13 * scale {
            0
        } else if a > 0.0 {
            1
        } else {
            -1
        }
    }

    /// Maximal constant-sign regions of alpha_family: region id per
    /// (slab, cell) plus each region's sign.
    pub fn sign_regions(&self, family: usize) -> (Vec<Vec<usize>>, Vec<i8>) {
        let mut parent: Vec<usize> = Vec::new();
        let mut signs: Vec<i8> = Vec::new();
        let mut ids: Vec<Vec<usize>> = Vec::new();
        fn find(parent: &mut Vec<usize>, mut a: usize) -> usize {
            while parent[a] != a {
                parent[a] = parent[parent[a]];
                a = parent[a];
            }
            a
        }
        for (s, slab) in self.slabs.iter().enumerate() {
            let row: Vec<usize> = (0..slab.cells.len())
                .map(|c| {
                    let id = parent.len();
                    parent.push(id);
                    signs.push(self.cell_sign(s, c, family));
                    id
                })
                .collect();
            for c in 0..slab.cells.len() - 1 {
                if signs[row[c]] == signs[row[c + 1]] {
                    let (ra, rb) = (find(&mut parent, row[c]), find(&mut parent, row[c + 1]));
                    if ra != rb {
                        parent[ra] = rb;
                    }
                }
            }
            ids.push(row);
        }
        for s in 0..self.slabs.len().saturating_sub(1) {
            let t = self.slabs[s].t1;
            let cb = interval_cuts(&self.slabs[s], t);
            let ca = interval_cuts(&self.slabs[s + 1], t);
            for (i, (bl, bh)) in cb.iter().enumerate() {
                for (j, (al, ah)) in ca.iter().enumerate() {
                    let lo = bl.max(*al);
                    let hi = bh.min(*ah);
                    if hi - lo > 1e-11 * (1.0 + hi.abs())
                        && signs[ids[s][i]] == signs[ids[s + 1][j]]
                    {
                        let (ra, rb) =
                            (find(&mut parent, ids[s][i]), find(&mut parent, ids[s + 1][j]));
                        if ra != rb {
                            parent[ra] = rb;
                        }
                    }
                }
            }
        }
        let mut remap = std::collections::HashMap::new();
        let mut region_sign = Vec::new();
        let mut out = Vec::with_capacity(ids.len());
        for row in &ids {
            let mut orow = Vec::with_capacity(row.len());
            for &id in row {
                let root = find(&mut parent, id);
                let len = remap.len();
                let rid = *remap.entry(root).or_insert(len);
                if rid == region_sign.len() {
                    region_sign.push(signs[id]);
                }
                orow.push(rid);
            }
            out.push(orow);
        }
        (out, region_sign)
    }
}

/// Cell x-intervals of a slab at time t (clipped to a wide hull).
fn interval_cuts(slab: &Slab, t: f64) -> Vec<(f64, f64)> {
    const HULL: f64 = 1e6;
    let mut xs = Vec::with_capacity(slab.records.len() + 2);
    xs.push(-HULL);
    for k in 0..slab.records.len() {
        xs.push(slab.record_x_at(k, t));
    }
    xs.push(HULL);
    xs.windows(2).map(|w| (w[0], w[1])).collect()
}

// ---------------------------------------------------------------------------
// Classification predictions from signs (scalar, p-system, robust-general).
// ---------------------------------------------------------------------------

/// Scalar prediction from the signs of rho = (u- - u')(u+ - u-) and the
/// averaged-speed jump, plus the residuals of the two chord identities
/// gamma+ = gamma- and (a+ - a-)(u' - u-) = (a+ - lam)(u+ - u-).
pub fn classify_scalar_rho(
    chord: &dyn Fn(f64, f64) -> f64,
    u_minus: f64,
    u_plus: f64,
    u_prime: f64,
) -> (ShockClass, f64, f64) {
    let a_m = chord(u_minus, u_prime);
    let a_p = chord(u_plus, u_prime);
    let lam = chord(u_minus, u_plus);
    let rho = (u_minus - u_prime) * (u_plus - u_minus);
    let jump = a_p - a_m;
    let q = rho * jump;
    let scale = (a_m.abs() + a_p.abs() + lam.abs()).max(1.0);
    let same_sign = (u_minus - u_prime) * (u_plus - u_prime) > 0.0;
    let class = if q.abs() <= 1e-12 * scale * (u_plus - u_minus).abs().max(1e-300) {
        ShockClass::Degenerate
    } else if same_sign {
        if q < 0.0 {
            ShockClass::SlowUnder
        } else {
            ShockClass::FastUnder
        }
    } else if q < 0.0 {
        ShockClass::Rarefaction
    } else {
        ShockClass::Lax
    };
    let res10 = ((lam - a_m) * (u_minus - u_prime) - (lam - a_p) * (u_plus - u_prime)).abs();
    let res11 = ((a_p - a_m) * (u_prime - u_minus) - (a_p - lam) * (u_plus - u_minus)).abs();
    (class, res10, res11)
}

/// The kappa factor of the p-system chord identities.
pub fn psystem_kappa(m: &crate::flux::PSystemModel, x: f64, y: f64, z: f64) -> Result<f64> {
    Ok((m.cbar(x, y)? + m.cbar(y, z)?) / (m.cbar(x, y)? + m.cbar(x, z)?))
}

/// p-system prediction from rho = (v- - v')(v+ - v-) and the jump of
/// cbar(. , v'), with residuals of the two weighted chord identities.
/// Family 1 is handled by mirror symmetry (slow and fast swap).
pub fn classify_psystem_rho(
    m: &crate::flux::PSystemModel,
    v_minus: f64,
    v_plus: f64,
    v_prime: f64,
    family: usize,
) -> Result<(ShockClass, f64, f64)> {
    if family == 0 {
        let (c, r43, r44) = classify_psystem_rho(m, v_plus, v_minus, v_prime, 1)?;
        let sw = match c {
            ShockClass::SlowUnder => ShockClass::FastUnder,
            ShockClass::FastUnder => ShockClass::SlowUnder,
            other => other,
        };
        return Ok((sw, r43, r44));
    }
    let c_mp = m.cbar(v_minus, v_plus)?;
    let c_m = m.cbar(v_minus, v_prime)?;
    let c_p = m.cbar(v_plus, v_prime)?;
    let rho = (v_minus - v_prime) * (v_plus - v_minus);
    let jump = c_p - c_m;
    let q = rho * jump;
    let same_sign = (v_minus - v_prime) * (v_plus - v_prime) > 0.0;
    let scale = (c_mp + c_m + c_p).max(1.0);
    let class = if q.abs() <= 1e-12 * scale * (v_plus - v_minus).abs().max(1e-300) {
        ShockClass::Degenerate
    } else if same_sign {
        if q < 0.0 {
            ShockClass::SlowUnder
        } else {
            ShockClass::FastUnder
        }
    } else if q < 0.0 {
        ShockClass::Rarefaction
    } else {
        ShockClass::Lax
    };
    let kappa43 = psystem_kappa(m, v_minus, v_plus, v_prime)?;
    let res43 =
        ((c_mp - c_m) * (v_prime - v_minus) - kappa43 * (c_mp - c_p) * (v_prime - v_plus)).abs();
    let kappa44 = psystem_kappa(m, v_prime, v_plus, v_minus)?;
    let res44 =
        ((c_p - c_m) * (v_prime - v_minus) - kappa44 * (c_p - c_mp) * (v_plus - v_minus)).abs();
    Ok((class, res43, res44))
}

/// Robust-shock prediction from rho_i and the jump of the i-eigenvalue
/// (applies only to records whose i-component is strongly dominant).
pub fn robust_classification(rec: &RecordAnalysis, kappa2: f64) -> Result<ShockClass> {
    if !rec.strongly_dominant_eigvec(kappa2) {
        return Err(FtError::Model(
            "robust classification applied to a non-robust record".into(),
        ));
    }
    let i = rec.family;
    let dlam = rec.lam_plus - rec.lam_minus;
    let q = rec.rho_owner * dlam;
    let same_sign = rec.alpha_minus[i] * rec.alpha_plus[i] > 0.0;
    let scale = rec.lam_bar.abs().max(1.0);
    Ok(if q.abs() <= 1e-12 * scale {
        ShockClass::Degenerate
    } else if same_sign {
        if q < 0.0 {
            ShockClass::SlowUnder
        } else {
            ShockClass::FastUnder
        }
    } else if q > 0.0 {
        ShockClass::Lax
    } else {
        ShockClass::Rarefaction
    })
}

/// Report of the identities relating the averaged-eigenvalue jump to the
/// shock strength, with their exact remainder vector.
pub struct SystemIdentityReport {
    /// | (dlam_i)(u+ - u') - (lam - lam_i^-)(u+ - u-) - Omega |
    pub relat_residual: f64,
    /// | (lam_i^+ - lam) eps^- + (dlam_i) alpha_i^- - l_i^- . Omega |
    pub residual_minus: f64,
    /// | (lam - lam_i^-) eps^+ - (dlam_i) alpha_i^+ + l_i^+ . Omega |
    pub residual_plus: f64,
    /// Transversal remainder bound.
    pub omega_bound: f64,
    /// 1-norm of the Omega vector.
    pub omega_norm: f64,
}

/// Evaluate the jump identities for an i-shock (u-, u+) of the governing
/// law probed at u'. The remainder is
/// Omega = -(A(u+,u') - lam_i^+)(u+ - u') + (A(u-,u') - lam_i^-)(u- - u'),
/// which vanishes when the transversal components vanish.
pub fn verify_system_identity(
    model: &FluxModel,
    u_minus: &State,
    u_plus: &State,
    u_prime: &State,
    family: usize,
    lam_bar: f64,
) -> Result<SystemIdentityReport> {
    let i = family;
    let n = model.n_families();
    let (am, em) = model.averaged(u_minus, u_prime)?;
    let (ap, ep) = model.averaged(u_plus, u_prime)?;
    let dlam = ep.lam[i] - em.lam[i];
    let dup = u_plus.sub(u_prime);
    let dum = u_minus.sub(u_prime);
    let du = u_plus.sub(u_minus);
    let ap_v = ap.mul_vec(dup);
    let am_v = am.mul_vec(dum);
    let omega = [
        -(ap_v[0] - ep.lam[i] * dup[0]) + (am_v[0] - em.lam[i] * dum[0]),
        -(ap_v[1] - ep.lam[i] * dup[1]) + (am_v[1] - em.lam[i] * dum[1]),
    ];
    let relat = [
        dlam * dup[0] - (lam_bar - em.lam[i]) * du[0] - omega[0],
        dlam * dup[1] - (lam_bar - em.lam[i]) * du[1] - omega[1],
    ];
    let alpha_m = em.components(dum);
    let alpha_p = ep.components(dup);
    let (eps_m, eps_p, l_omega_m, l_omega_p) = if n == 1 {
        (du[0], du[0], omega[0], omega[0])
    } else {
        (
            dot2(em.l[i], du),
            dot2(ep.l[i], du),
            dot2(em.l[i], omega),
            dot2(ep.l[i], omega),
        )
    };
    let residual_minus = ((ep.lam[i] - lam_bar) * eps_m + dlam * alpha_m[i] - l_omega_m).abs();
    let residual_plus = ((lam_bar - em.lam[i]) * eps_p - dlam * alpha_p[i] + l_omega_p).abs();
    let mut omega_bound = 0.0;
    for j in 0..n {
        if j == i {
            continue;
        }
        let gj_p = (lam_bar - ep.lam[j]) * alpha_p[j];
        let gj_m = (lam_bar - em.lam[j]) * alpha_m[j];
        omega_bound += (gj_p - gj_m).abs() + eps_m.abs() * alpha_m[j].abs();
    }
    Ok(SystemIdentityReport {
        relat_residual: relat[0].abs() + relat[1].abs(),
        residual_minus,
        residual_plus,
        omega_bound,
        omega_norm: omega[0].abs() + omega[1].abs(),
    })
}

/// Monotonicity scan of the averaged family speed along a Hugoniot curve.
pub struct MonotonicityReport {
    pub strictly_monotone: bool,
    /// Minimum |consecutive difference| over the scan.
    pub min_gap: f64,
}

/// Sample lam_i(u(mu), u') along the family-i Hugoniot curve from u_minus,
/// parametrized by mu (the state itself for scalar laws, the specific
/// volume for the p-system).
pub fn monotonicity_scan(
    model: &FluxModel,
    u_minus: &State,
    family: usize,
    u_prime: &State,
    span: (f64, f64),
    samples: usize,
) -> Result<MonotonicityReport> {
    let mut lams = Vec::with_capacity(samples + 1);
    for k in 0..=samples {
        let mu = span.0 + (span.1 - span.0) * k as f64 / samples as f64;
        // The scan is about the smooth law, so scalar models use the smooth
        // chord; the p-system averaged speed is exact in closed form.
        let lam = match model {
            FluxModel::Scalar(m) => m.flux.chord(mu, u_prime.as_scalar()),
            FluxModel::PSystem(m) => {
                let w = crate::riemann::hugoniot_psystem(m, u_minus, family, mu)?;
                model.averaged_lambda(family, &w, u_prime)?
            }
            FluxModel::Euler(_) => {
                return Err(FtError::Model("no Hugoniot scan for the Euler algebra".into()))
            }
        };
        lams.push(lam);
    }
    let mut min_gap = f64::INFINITY;
    let mut increasing = true;
    let mut decreasing = true;
    for w in lams.windows(2) {
        let d = w[1] - w[0];
        min_gap = min_gap.min(d.abs());
        if d <= 0.0 {
            increasing = false;
        }
        if d >= 0.0 {
            decreasing = false;
        }
    }
    Ok(MonotonicityReport { strictly_monotone: increasing || decreasing, min_gap })
}

// ---------------------------------------------------------------------------
// Census.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Default, serde::Serialize)]
pub struct Census {
    pub lax: usize,
    pub slow: usize,
    pub fast: usize,
    pub rarefaction: usize,
    pub degenerate: usize,
    /// Records that are admissible-owned, strongly dominant (eigenvector
    /// form), and rarefaction-classified. Must stay empty.
    pub admissible_strong_rarefactions: usize,
    /// Same with the matrix form of strong dominance.
    pub admissible_strong_rarefactions_matrix: usize,
    /// Rarefaction-class records whose owner is not a rarefaction front or
    /// whose strength exceeds 2h.
    pub rarefaction_misowned: usize,
    pub total: usize,
}

impl Census {
    pub fn absorb(&mut self, o: &Census) {
        self.lax += o.lax;
        self.slow += o.slow;
        self.fast += o.fast;
        self.rarefaction += o.rarefaction;
        self.degenerate += o.degenerate;
        self.admissible_strong_rarefactions += o.admissible_strong_rarefactions;
        self.admissible_strong_rarefactions_matrix += o.admissible_strong_rarefactions_matrix;
        self.rarefaction_misowned += o.rarefaction_misowned;
        self.total += o.total;
    }
}

/// Count records by class and check the no-admissible-strongly-dominant-
/// rarefaction property at the given threshold.
pub fn rarefaction_census(field: &AveragedField, kappa2: f64) -> Census {
    let mut c = Census::default();
    for (_, rec) in field.records() {
        let a = &rec.analysis;
        c.total += 1;
        match a.class {
            ShockClass::Lax => c.lax += 1,
            ShockClass::SlowUnder => c.slow += 1,
            ShockClass::FastUnder => c.fast += 1,
            ShockClass::Degenerate => c.degenerate += 1,
            ShockClass::Rarefaction => {
                c.rarefaction += 1;
                if rec.admissible && a.strongly_dominant_eigvec(kappa2) {
                    c.admissible_strong_rarefactions += 1;
                }
                if rec.admissible && a.strongly_dominant_matrix(kappa2) {
                    c.admissible_strong_rarefactions_matrix += 1;
                }
                if rec.kind != WaveKind::RarefactionFront || a.strength > 2.0 * field.h {
                    c.rarefaction_misowned += 1;
                }
            }
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::{PSystemModel, PressureLaw, ScalarFlux, ScalarModel};
    use crate::tracking::{discretize_initial, evolve, EVENT_BUDGET};
    use rand::Rng;

    fn burgers_pair(
        h: f64,
        a: (&[f64], &[f64]),
        b: (&[f64], &[f64]),
        seed: u64,
        t_end: f64,
    ) -> (TrackedRun, TrackedRun) {
        let model = Arc::new(FluxModel::Scalar(ScalarModel::new(
            ScalarFlux::Burgers,
            -3.0,
            3.0,
            h,
            seed,
        )));
        let sa: Vec<State> = a.1.iter().map(|&u| State::scalar(u)).collect();
        let sb: Vec<State> = b.1.iter().map(|&u| State::scalar(u)).collect();
        let pa = discretize_initial(&model, a.0, &sa, h, seed).unwrap();
        let pb = discretize_initial(&model, b.0, &sb, h, seed + 1).unwrap();
        let ra = evolve(model.clone(), pa, h, t_end, EVENT_BUDGET).unwrap();
        let rb = evolve(model, pb, h, t_end, EVENT_BUDGET).unwrap();
        (ra, rb)
    }

    #[test]
    fn classify_examples() {
        // Burgers shock u-+ = -+1 (speed 0), probe 0.5: traces 0.75 / -0.25.
        assert_eq!(classify_shock(0.75, 0.0, -0.25), ShockClass::Lax);
        // Probe 2: traces 1.5 / 0.5: both above the speed.
        assert_eq!(classify_shock(1.5, 0.0, 0.5), ShockClass::SlowUnder);
        // The hand-built non-uniqueness example: -1 | +1.
        assert_eq!(classify_shock(-1.0, 0.0, 1.0), ShockClass::Rarefaction);
        assert_eq!(classify_shock(-1.5, 0.0, -0.5), ShockClass::FastUnder);
        assert_eq!(classify_shock(0.0, 0.0, 1.0), ShockClass::Degenerate);
    }

    #[test]
    fn scalar_rho_tables_match_speed_classification() {
        let flux = ScalarFlux::Burgers;
        let chord = |a: f64, b: f64| flux.chord(a, b);
        // (1, -1), probe 0.5: opposite signs, Lax.
        let (c, r10, r11) = classify_scalar_rho(&chord, 1.0, -1.0, 0.5);
        assert_eq!(c, ShockClass::Lax);
        assert!(r10 < 1e-14 && r11 < 1e-14);
        // (1, -1), probe 2: same sign, slow.
        let (c, _, _) = classify_scalar_rho(&chord, 1.0, -1.0, 2.0);
        assert_eq!(c, ShockClass::SlowUnder);
        // Exhaustive agreement versus the speed triple on random triples.
        let cubic = ScalarFlux::Cubic;
        let chord_c = |a: f64, b: f64| cubic.chord(a, b);
        let mut rng = crate::scenario::seeded_rng(21);
        for _ in 0..10_000 {
            let um: f64 = rng.gen_range(-1.5..1.5);
            let up = rng.gen_range(-1.5..1.5);
            let upr = rng.gen_range(-1.5..1.5);
            if (um - up).abs() < 1e-3 {
                continue;
            }
            let (pred, r10, r11) = classify_scalar_rho(&chord_c, um, up, upr);
            assert!(r10 <= 1e-12, "scalar10 residual {r10}");
            assert!(r11 <= 1e-12, "scalar11 residual {r11}");
            let direct = classify_shock(chord_c(um, upr), chord_c(um, up), chord_c(up, upr));
            if pred != ShockClass::Degenerate && direct != ShockClass::Degenerate {
                assert_eq!(pred, direct, "um={um} up={up} u'={upr}");
            }
        }
    }

    #[test]
    fn psystem_rho_tables_match_speed_classification() {
        let m = PSystemModel::new(PressureLaw::PowerLaw { gamma: 1.0 }, 0.2, 5.0).unwrap();
        // v' = v+ makes both sides of the first identity vanish.
        let (_, r43, _) = classify_psystem_rho(&m, 1.0, 2.0, 2.0, 1).unwrap();
        assert!(r43 < 1e-14);
        // (1, 2, 1.5): opposite signs; the admissible 2-shock is Lax.
        let (c, r43, r44) = classify_psystem_rho(&m, 1.0, 2.0, 1.5, 1).unwrap();
        assert_eq!(c, ShockClass::Lax);
        assert!(r43 < 1e-12 && r44 < 1e-12);
        let mut rng = crate::scenario::seeded_rng(31);
        for _ in 0..10_000 {
            let vm: f64 = rng.gen_range(0.4..3.5);
            let vp = rng.gen_range(0.4..3.5);
            let vpr = rng.gen_range(0.4..3.5);
            if (vm - vp).abs() < 1e-3 {
                continue;
            }
            for fam in [0usize, 1usize] {
                let (pred, r43, r44) = classify_psystem_rho(&m, vm, vp, vpr, fam).unwrap();
                assert!(r43 <= 1e-10, "p43 residual {r43}");
                assert!(r44 <= 1e-10, "p44 residual {r44}");
                let kappa = psystem_kappa(&m, vm, vp, vpr).unwrap();
                assert!(kappa > 0.0);
                let lam_bar = crate::riemann::psystem_shock_speed(&m, fam, vm, vp).unwrap();
                let s = if fam == 0 { -1.0 } else { 1.0 };
                let lm = s * m.cbar(vm, vpr).unwrap();
                let lp = s * m.cbar(vp, vpr).unwrap();
                let direct = classify_shock(lm, lam_bar, lp);
                if pred != ShockClass::Degenerate && direct != ShockClass::Degenerate {
                    assert_eq!(pred, direct, "vm={vm} vp={vp} v'={vpr} fam={fam}");
                }
            }
        }
    }

    #[test]
    fn field_against_constant_probe() {
        // Constant second run: the field is abar(u_h(t,x), const).
        let h = 0.1;
        let (ra, rb) = burgers_pair(h, (&[0.0], &[1.0, -1.0]), (&[], &[0.5]), 5, 1.0);
        let field = build_averaged_field(&ra, &rb, 0.1, 0.1).unwrap();
        let mut n_rec = 0;
        for (_, rec) in field.records() {
            n_rec += 1;
            assert_eq!(rec.owner, RunTag::A);
            assert_eq!(rec.analysis.class, ShockClass::Lax);
            // Scalar records are dominant and strongly dominant.
            assert!(rec.analysis.dominant(0.1, 0));
            assert!(rec.analysis.strongly_dominant_eigvec(0.1));
            assert!(rec.analysis.strongly_dominant_matrix(0.1));
            // Scalar jump identity gamma+ = gamma-.
            assert!(rec.analysis.jump_relation_residual(1) < 1e-12);
            // Sign table.
            assert!(rec.analysis.sign_table_violation(1) <= 1e-13);
        }
        assert!(n_rec > 0);
        // Probe outside the state interval: slow undercompressive.
        let (ra, rb) = burgers_pair(h, (&[0.0], &[1.0, -1.0]), (&[], &[2.0]), 6, 1.0);
        let field = build_averaged_field(&ra, &rb, 0.1, 0.1).unwrap();
        for (_, rec) in field.records() {
            assert_eq!(rec.analysis.class, ShockClass::SlowUnder);
            let pred = robust_classification(&rec.analysis, 0.1).unwrap();
            assert_eq!(pred, ShockClass::SlowUnder);
        }
    }

    #[test]
    fn identical_runs_have_zero_psi() {
        let h = 0.1;
        let model = Arc::new(FluxModel::Scalar(ScalarModel::new(
            ScalarFlux::Burgers,
            -3.0,
            3.0,
            h,
            3,
        )));
        let vals = [State::scalar(0.8), State::scalar(-0.4)];
        let p = discretize_initial(&model, &[0.0], &vals, h, 3).unwrap();
        let ra = evolve(model.clone(), p.clone(), h, 1.0, EVENT_BUDGET).unwrap();
        let rb = evolve(model, p, h, 1.0, EVENT_BUDGET).unwrap();
        let field = build_averaged_field(&ra, &rb, 0.1, 0.1).unwrap();
        // Identical runs superimpose their fronts, so the only cells with
        // psi != 0 are the zero-width corridors between coincident records;
        // every positive-width cell carries psi = 0 and the field equals the
        // pointwise Jacobian there.
        for slab in &field.slabs {
            let tm = 0.5 * (slab.t0 + slab.t1);
            for (c, cell) in slab.cells.iter().enumerate() {
                let lo = if c == 0 {
                    f64::NEG_INFINITY
                } else {
                    slab.record_x_at(c - 1, tm)
                };
                let hi = if c == slab.records.len() {
                    f64::INFINITY
                } else {
                    slab.record_x_at(c, tm)
                };
                if hi - lo > 1e-9 {
                    assert_eq!(cell.psi, [0.0, 0.0]);
                }
            }
        }
        // Superimposed records are exactly characteristic on one side and
        // therefore degenerate: excluded from the strict census.
        let census = rarefaction_census(&field, 0.1);
        assert_eq!(census.admissible_strong_rarefactions, 0);
        assert_eq!(census.total, census.degenerate);
    }

    #[test]
    fn face_count_matches_euler_formula() {
        // Three-front configuration: two shocks of run A that merge plus a
        // slow jump of run B crossing them. Compare the face count against
        // V - E + F = 2 on the closed strip.
        let h = 0.1;
        let (ra, rb) = burgers_pair(
            h,
            (&[-0.5, 0.5], &[1.0, 0.0, -1.0]),
            (&[0.0], &[0.21, 0.2]),
            9,
            3.0,
        );
        assert_eq!(ra.events.len(), 1);
        let field = build_averaged_field(&ra, &rb, 0.1, 0.1).unwrap();
        let (_, count) = field.faces();
        // Collect arrangement vertices (record endpoints) and edges
        // (record segments per slab).
        let mut verts: Vec<(f64, f64)> = Vec::new();
        let push_v = |t: f64, x: f64, verts: &mut Vec<(f64, f64)>| {
            if !verts
                .iter()
                .any(|&(a, b)| (a - t).abs() < 1e-9 && (b - x).abs() < 1e-9)
            {
                verts.push((t, x));
            }
        };
        let mut edges = 0usize;
        for slab in &field.slabs {
            for (k, _) in slab.records.iter().enumerate() {
                push_v(slab.t0, slab.record_x_at(k, slab.t0), &mut verts);
                push_v(slab.t1, slab.record_x_at(k, slab.t1), &mut verts);
                edges += 1;
            }
        }
        let t_end = field.t_end;
        let bottom = verts.iter().filter(|&&(t, _)| t == 0.0).count();
        let top = verts
            .iter()
            .filter(|&&(t, _)| (t - t_end).abs() < 1e-12)
            .count();
        let v_total = verts.len() + 4;
        let e_total = edges + (bottom + 1) + (top + 1) + 2;
        // V - E + F = 2 counts the outer face; interior faces = F - 1.
        let f_inner = 1 + e_total - v_total;
        assert_eq!(count, f_inner, "V={v_total} E={e_total} cells={count}");
    }

    #[test]
    fn sign_regions_of_lax_probe() {
        // Probe between the states: alpha changes sign across the shock.
        let h = 0.1;
        let (ra, rb) = burgers_pair(h, (&[0.0], &[1.0, -1.0]), (&[], &[0.5]), 5, 1.0);
        let field = build_averaged_field(&ra, &rb, 0.1, 0.1).unwrap();
        let (ids, signs) = field.sign_regions(0);
        let distinct: std::collections::HashSet<usize> = ids.iter().flatten().copied().collect();
        assert_eq!(distinct.len(), 2);
        let mut s: Vec<i8> = signs.clone();
        s.sort();
        assert_eq!(s, vec![-1, 1]);
        // Boundary-class audit: scalar sign-region boundaries are Lax,
        // rarefaction, or degenerate records.
        for (si, slab) in field.slabs.iter().enumerate() {
            for (k, rec) in slab.records.iter().enumerate() {
                if ids[si][k] != ids[si][k + 1] {
                    assert!(matches!(
                        rec.analysis.class,
                        ShockClass::Lax | ShockClass::Rarefaction | ShockClass::Degenerate
                    ));
                }
            }
        }
    }

    #[test]
    fn system_identity_exact_on_curve_probes() {
        let m = PSystemModel::new(PressureLaw::PowerLaw { gamma: 1.4 }, 0.3, 4.0).unwrap();
        let fm = FluxModel::PSystem(m.clone());
        let mut rng = crate::scenario::seeded_rng(41);
        for _ in 0..500 {
            let v0 = rng.gen_range(0.6..2.5);
            let u0 = rng.gen_range(-0.5..0.5);
            let from = State::pair(u0, v0);
            let fam = rng.gen_range(0..2usize);
            let v1 = (v0 + rng.gen_range(-0.4..0.4)).clamp(0.5, 3.0);
            if (v1 - v0).abs() < 1e-3 {
                continue;
            }
            let to = crate::riemann::hugoniot_psystem(&m, &from, fam, v1).unwrap();
            let lam = crate::riemann::psystem_shock_speed(&m, fam, v0, v1).unwrap();
            // Probe on the same wave curve: transversal components vanish
            // and the identities become exact with Omega ~ 0.
            let vpr = (v0 + rng.gen_range(-0.3..0.3)).clamp(0.5, 3.0);
            let probe_on_curve = crate::riemann::hugoniot_psystem(&m, &from, fam, vpr).unwrap();
            let rep = verify_system_identity(&fm, &from, &to, &probe_on_curve, fam, lam).unwrap();
            assert!(rep.relat_residual < 1e-10, "relat {}", rep.relat_residual);
            // Generic probe: residuals still close exactly through Omega.
            let generic = State::pair(rng.gen_range(-0.5..0.5), rng.gen_range(0.6..2.5));
            let rep2 = verify_system_identity(&fm, &from, &to, &generic, fam, lam).unwrap();
            assert!(rep2.relat_residual < 1e-10);
            assert!(rep2.residual_minus < 1e-10);
            assert!(rep2.residual_plus < 1e-10);
        }
    }

    #[test]
    fn monotonicity_examples() {
        // Burgers: abar(u+, u') = (u+ + u')/2 strictly increasing.
        let sm = ScalarModel::new(ScalarFlux::Burgers, -3.0, 3.0, 0.05, 1);
        let fm = FluxModel::Scalar(sm);
        let rep = monotonicity_scan(
            &fm,
            &State::scalar(0.5),
            0,
            &State::scalar(-0.3),
            (-1.0, 1.0),
            100,
        )
        .unwrap();
        assert!(rep.strictly_monotone);
        assert!(rep.min_gap > 0.0);
        // p = 1/v: strictly monotone along Hugoniot curves.
        let pm = PSystemModel::new(PressureLaw::PowerLaw { gamma: 1.0 }, 0.2, 5.0).unwrap();
        let fp = FluxModel::PSystem(pm);
        let rep = monotonicity_scan(
            &fp,
            &State::pair(0.0, 1.0),
            1,
            &State::pair(0.2, 1.7),
            (0.5, 3.0),
            100,
        )
        .unwrap();
        assert!(rep.strictly_monotone);
        // Cubic across the inflection: fails (negative control).
        let cm = ScalarModel::new(ScalarFlux::Cubic, -2.0, 2.0, 0.05, 1);
        let fc = FluxModel::Scalar(cm);
        let rep = monotonicity_scan(
            &fc,
            &State::scalar(0.8),
            0,
            &State::scalar(0.0),
            (-0.9, 0.9),
            100,
        )
        .unwrap();
        assert!(!rep.strictly_monotone);
    }

    #[test]
    fn census_probe_sweep_has_no_rarefaction_records() {
        // Admissible Burgers shock against constant probes across a grid:
        // never a rarefaction record.
        let h = 0.1;
        for (i, probe) in [-2.0, -0.6, 0.1, 0.4, 0.9, 1.4, 2.2].iter().enumerate() {
            let (ra, rb) =
                burgers_pair(h, (&[0.0], &[1.0, -1.0]), (&[], &[*probe]), 30 + i as u64, 1.0);
            let field = build_averaged_field(&ra, &rb, 0.1, 0.1).unwrap();
            let census = rarefaction_census(&field, 0.1);
            assert_eq!(census.rarefaction, 0);
            assert_eq!(census.admissible_strong_rarefactions, 0);
            assert!(census.lax + census.slow + census.fast + census.degenerate > 0);
        }
    }
}
