//! Scalar flux laws and their piecewise-linear working approximant.

use crate::error::{FtError, Result};
use rand::Rng;

/// Smooth scalar flux u -> f(u).
#[derive(Clone, Debug)]
pub enum ScalarFlux {
    /// f(u) = u^2 / 2
    Burgers,
    /// f(u) = u^3 (non-convex, inflection at 0)
    Cubic,
    /// Piecewise-cubic coefficient table.
    Spline(CubicSpline),
}

impl ScalarFlux {
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            ScalarFlux::Burgers => 0.5 * u * u,
            ScalarFlux::Cubic => u * u * u,
            ScalarFlux::Spline(s) => s.eval(u),
        }
    }

    pub fn dflux(&self, u: f64) -> f64 {
        match self {
            ScalarFlux::Burgers => u,
            ScalarFlux::Cubic => 3.0 * u * u,
            ScalarFlux::Spline(s) => s.deriv(u),
        }
    }

    /// Averaged speed of the smooth flux: chord slope for distinct
    /// arguments, f'(u) in the coincidence limit. Nearly coincident
    /// arguments take the midpoint derivative, which agrees with the chord
    /// to O(|b-a|^2) and avoids catastrophic cancellation.
    pub fn chord(&self, a: f64, b: f64) -> f64 {
        let scale = a.abs().max(b.abs()).max(1.0);
        if (b - a).abs() <= 1e-7 * scale {
            self.dflux(0.5 * (a + b))
        } else {
            (self.eval(b) - self.eval(a)) / (b - a)
        }
    }

    /// Lipschitz bound of f' over [lo, hi], sampled.
    pub fn lip_dflux(&self, lo: f64, hi: f64) -> f64 {
        let n = 512;
        let mut lip: f64 = 0.0;
        let mut prev = self.dflux(lo);
        for k in 1..=n {
            let x = lo + (hi - lo) * k as f64 / n as f64;
            let d = self.dflux(x);
            lip = lip.max((d - prev).abs() / ((hi - lo) / n as f64));
            prev = d;
        }
        lip
    }
}

/// Piecewise-cubic interpolant given by knots and per-interval coefficients
/// (a, b, c, d) for a + b t + c t^2 + d t^3 with t = u - knot.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct CubicSpline {
    pub knots: Vec<f64>,
    pub coef: Vec<[f64; 4]>,
}

impl CubicSpline {
    fn interval(&self, u: f64) -> usize {
        match self
            .knots
            .binary_search_by(|k| k.partial_cmp(&u).unwrap())
        {
            Ok(i) => i.min(self.coef.len() - 1),
            Err(i) => i.saturating_sub(1).min(self.coef.len() - 1),
        }
    }

    pub fn eval(&self, u: f64) -> f64 {
        let i = self.interval(u);
        let t = u - self.knots[i];
        let [a, b, c, d] = self.coef[i];
        a + t * (b + t * (c + t * d))
    }

    pub fn deriv(&self, u: f64) -> f64 {
        let i = self.interval(u);
        let t = u - self.knots[i];
        let [_, b, c, d] = self.coef[i];
        b + t * (2.0 * c + t * 3.0 * d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.knots.len() < 2 || self.coef.len() + 1 != self.knots.len() {
            return Err(FtError::Scenario {
                field: "flux.table".into(),
                reason: "need n knots and n-1 coefficient rows".into(),
            });
        }
        if !self.knots.windows(2).all(|w| w[0] < w[1]) {
            return Err(FtError::Scenario {
                field: "flux.table.knots".into(),
                reason: "knots must be strictly increasing".into(),
            });
        }
        Ok(())
    }
}

/// Piecewise-linear interpolant of the smooth flux on a near-uniform state
/// grid. Scalar front tracking evolves exact entropy solutions of this
/// approximant, so every averaged quantity along a run is computed from its
/// chords, which keeps the jump identities exact.
#[derive(Clone, Debug)]
pub struct FluxTable {
    pub nodes: Vec<f64>,
    pub vals: Vec<f64>,
    pub spacing: f64,
}

impl FluxTable {
    /// Build over [lo, hi] with spacing `h`. Node positions carry a seeded
    /// jitter of at most 1e-3 h^2 so that no two distinct chords coincide
    /// exactly (generic position); both runs of a pair share the table.
    pub fn build(flux: &ScalarFlux, lo: f64, hi: f64, h: f64, seed: u64) -> Self {
        let mut rng = crate::scenario::seeded_rng(seed ^ 0x9e37_79b9_7f4a_7c15);
        let n = ((hi - lo) / h).ceil() as usize + 1;
        let mut nodes = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let base = lo + k as f64 * h;
            let jit = if k == 0 || k == n {
                0.0
            } else {
                rng.gen_range(-1.0..1.0) * h * h * 1e-3
            };
            nodes.push(base + jit);
        }
        let vals = nodes.iter().map(|&x| flux.eval(x)).collect();
        FluxTable { nodes, vals, spacing: h }
    }

    pub fn lo(&self) -> f64 {
        self.nodes[0]
    }

    pub fn hi(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    fn cell_of(&self, x: f64) -> usize {
        match self
            .nodes
            .binary_search_by(|n| n.partial_cmp(&x).unwrap())
        {
            Ok(i) => i.min(self.nodes.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.nodes.len() - 2),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.cell_of(x);
        let t = (x - self.nodes[i]) / (self.nodes[i + 1] - self.nodes[i]);
        self.vals[i] + t * (self.vals[i + 1] - self.vals[i])
    }

    pub fn cell_slope(&self, i: usize) -> f64 {
        (self.vals[i + 1] - self.vals[i]) / (self.nodes[i + 1] - self.nodes[i])
    }

    /// Chord slope of the interpolant, computed as the width-weighted mean
    /// of the crossed cell slopes. This is exact, stays inside the slope
    /// range, and is stable for nearly coincident arguments; the
    /// coincidence limit takes the slope of the containing cell.
    pub fn chord(&self, a: f64, b: f64) -> f64 {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let ci = self.cell_of(lo);
        let cj = self.cell_of(hi);
        if ci == cj || hi - lo == 0.0 {
            return self.cell_slope(ci);
        }
        let mut acc = self.cell_slope(ci) * (self.nodes[ci + 1] - lo);
        for c in ci + 1..cj {
            acc += self.cell_slope(c) * (self.nodes[c + 1] - self.nodes[c]);
        }
        acc += self.cell_slope(cj) * (hi - self.nodes[cj]);
        acc / (hi - lo)
    }

    /// Indices of nodes strictly inside the open interval (min(a,b), max(a,b)).
    pub fn interior_nodes(&self, a: f64, b: f64) -> std::ops::Range<usize> {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let mut i = self.cell_of(lo) + 1;
        if self.nodes[i - 1] > lo {
            i -= 1;
        }
        while i < self.nodes.len() && self.nodes[i] <= lo {
            i += 1;
        }
        let mut j = i;
        while j < self.nodes.len() && self.nodes[j] < hi {
            j += 1;
        }
        i..j
    }

    /// Nearest node value (state-grid projection).
    pub fn project(&self, u: f64) -> f64 {
        let i = self.cell_of(u.clamp(self.lo(), self.hi()));
        if (u - self.nodes[i]).abs() <= (self.nodes[i + 1] - u).abs() {
            self.nodes[i]
        } else {
            self.nodes[i + 1]
        }
    }
}

/// A scalar law: the smooth flux plus its working approximant.
#[derive(Clone, Debug)]
pub struct ScalarModel {
    pub flux: ScalarFlux,
    pub table: FluxTable,
}

impl ScalarModel {
    pub fn new(flux: ScalarFlux, lo: f64, hi: f64, h: f64, grid_seed: u64) -> Self {
        let table = FluxTable::build(&flux, lo, hi, h, grid_seed);
        ScalarModel { flux, table }
    }

    pub fn check_state(&self, u: f64) -> Result<()> {
        if u < self.table.lo() - 1e-12 || u > self.table.hi() + 1e-12 {
            return Err(FtError::Domain(format!(
                "u = {u} outside [{}, {}]",
                self.table.lo(),
                self.table.hi()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_interpolation_error_bound() {
        // Interpolation error <= Lip(f') h^2 / 8 on the working range.
        let flux = ScalarFlux::Cubic;
        let h = 0.05;
        let t = FluxTable::build(&flux, -1.5, 1.5, h, 3);
        let lip = flux.lip_dflux(-1.5, 1.5);
        let mut worst: f64 = 0.0;
        for k in 0..3000 {
            let x = -1.5 + 3.0 * k as f64 / 2999.0;
            worst = worst.max((t.eval(x) - flux.eval(x)).abs());
        }
        // Allow for the node jitter's tiny enlargement of cells.
        assert!(worst <= lip * h * h / 8.0 * 1.01 + 1e-12, "worst = {worst}");
    }

    #[test]
    fn table_chord_matches_smooth_on_nodes() {
        let flux = ScalarFlux::Burgers;
        let t = FluxTable::build(&flux, -2.0, 2.0, 0.1, 5);
        let a = t.nodes[3];
        let b = t.nodes[17];
        assert!((t.chord(a, b) - flux.chord(a, b)).abs() < 1e-13);
    }

    #[test]
    fn interior_nodes_range() {
        let flux = ScalarFlux::Burgers;
        let t = FluxTable::build(&flux, 0.0, 1.0, 0.25, 0);
        let r = t.interior_nodes(t.nodes[1], t.nodes[3]);
        assert_eq!(r, 2..3);
        let r2 = t.interior_nodes(t.nodes[3], t.nodes[1]);
        assert_eq!(r2, 2..3);
    }

    #[test]
    fn spline_flux_round_trip() {
        // Table for f(u) = u^2/2 as a single cubic piece.
        let s = CubicSpline {
            knots: vec![-2.0, 2.0],
            coef: vec![[2.0, -2.0, 0.5, 0.0]],
        };
        s.validate().unwrap();
        let f = ScalarFlux::Spline(s);
        assert!((f.eval(1.0) - 0.5).abs() < 1e-14);
        assert!((f.dflux(1.0) - 1.0).abs() < 1e-14);
    }
}
