//! Flux models (general-flux scalar, Lagrangian p-system, isentropic Euler
//! algebra), their pointwise eigenstructure, and all averaged quantities.

mod euler;
mod psystem;
mod scalar;

pub use euler::EulerModel;
pub use psystem::{PSystemModel, PressureLaw};
pub use scalar::{CubicSpline, FluxTable, ScalarFlux, ScalarModel};

use crate::error::{FtError, Result};
use crate::linalg::{dot2, gauss_legendre_16, Mat2};

/// Minimal gap tolerated between family bands before a scenario is rejected.
pub const BAND_SEPARATION_FLOOR: f64 = 1e-6;

/// A state of the underlying conservation law: 1 component for scalar laws,
/// 2 for the p-system (u, v) and the Euler algebra (rho, q).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct State {
    dim: u8,
    c: [f64; 2],
}

impl State {
    pub fn scalar(u: f64) -> Self {
        State { dim: 1, c: [u, 0.0] }
    }

    pub fn pair(a: f64, b: f64) -> Self {
        State { dim: 2, c: [a, b] }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn as_scalar(&self) -> f64 {
        debug_assert_eq!(self.dim, 1);
        self.c[0]
    }

    pub fn comps(&self) -> [f64; 2] {
        self.c
    }

    pub fn comp(&self, j: usize) -> f64 {
        self.c[j]
    }

    pub fn sub(&self, o: &State) -> [f64; 2] {
        [self.c[0] - o.c[0], self.c[1] - o.c[1]]
    }

    /// 1-norm of the component vector.
    pub fn norm1(&self) -> f64 {
        self.c[..self.dim()].iter().map(|x| x.abs()).sum()
    }

    pub fn dist1(&self, o: &State) -> f64 {
        self.sub(o)[..self.dim()].iter().map(|x| x.abs()).sum()
    }
}

/// Eigenvalues and dual eigenbases of a (pointwise or averaged) coefficient
/// matrix. `r[j]` has unit Euclidean norm and `l[j] . r[k] = delta_jk`.
#[derive(Clone, Copy, Debug)]
pub struct EigenData {
    pub n: usize,
    pub lam: [f64; 2],
    pub r: [[f64; 2]; 2],
    pub l: [[f64; 2]; 2],
}

impl EigenData {
    pub fn scalar(a: f64) -> Self {
        EigenData {
            n: 1,
            lam: [a, 0.0],
            r: [[1.0, 0.0], [0.0, 0.0]],
            l: [[1.0, 0.0], [0.0, 0.0]],
        }
    }

    /// Components of `psi` in the right eigenbasis: `alpha_j = l_j . psi`.
    pub fn components(&self, psi: [f64; 2]) -> [f64; 2] {
        if self.n == 1 {
            [psi[0], 0.0]
        } else {
            [dot2(self.l[0], psi), dot2(self.l[1], psi)]
        }
    }

    /// Reconstruct `sum_j alpha_j r_j`.
    pub fn reconstruct(&self, alpha: [f64; 2]) -> [f64; 2] {
        let mut out = [0.0, 0.0];
        for j in 0..self.n {
            out[0] += alpha[j] * self.r[j][0];
            out[1] += alpha[j] * self.r[j][1];
        }
        out
    }
}

/// Eigenvector orientation convention. The p-system eigenvectors are
/// proportional to (-+cbar, 1) and are oriented by a positive last component;
/// the Euler eigenvectors (1, ebar -+ cbar) are oriented by a positive first
/// component, which stays smooth when an eigenvalue crosses zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Orient {
    LastPositive,
    FirstPositive,
}

/// Eigen-decomposition of a real 2x2 matrix with distinct real eigenvalues.
pub fn eigen2(m: &Mat2, orient: Orient) -> Result<EigenData> {
    let a = m.0[0][0];
    let b = m.0[0][1];
    let c = m.0[1][0];
    let d = m.0[1][1];
    let tr = a + d;
    let disc = (a - d) * (a - d) + 4.0 * b * c;
    if disc <= 0.0 {
        return Err(FtError::Model(format!(
            "2x2 matrix has non-real or repeated eigenvalues (disc = {disc:e})"
        )));
    }
    let s = disc.sqrt();
    let lam = [(tr - s) / 2.0, (tr + s) / 2.0];
    let mut r = [[0.0; 2]; 2];
    for j in 0..2 {
        // Rows of (M - lam I) are orthogonal to nothing useful; its null
        // vector can be read off either row, pick the better conditioned one.
        let v1 = [b, lam[j] - a];
        let v2 = [lam[j] - d, c];
        let mut v = if v1[0].abs() + v1[1].abs() >= v2[0].abs() + v2[1].abs() {
            v1
        } else {
            v2
        };
        let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
        if n == 0.0 {
            return Err(FtError::Model("degenerate eigenvector".into()));
        }
        v = [v[0] / n, v[1] / n];
        let flip = match orient {
            Orient::LastPositive => {
                if v[1] != 0.0 {
                    v[1] < 0.0
                } else {
                    v[0] < 0.0
                }
            }
            Orient::FirstPositive => {
                if v[0] != 0.0 {
                    v[0] < 0.0
                } else {
                    v[1] < 0.0
                }
            }
        };
        if flip {
            v = [-v[0], -v[1]];
        }
        r[j] = v;
    }
    // Dual basis: rows of the inverse of [r_0 r_1].
    let det = r[0][0] * r[1][1] - r[0][1] * r[1][0];
    if det.abs() < 1e-14 {
        return Err(FtError::Model("eigenbasis nearly singular".into()));
    }
    let l = [
        [r[1][1] / det, -r[1][0] / det],
        [-r[0][1] / det, r[0][0] / det],
    ];
    Ok(EigenData { n: 2, lam, r, l })
}

/// One of the three flux models of the artifact.
#[derive(Clone, Debug)]
pub enum FluxModel {
    Scalar(ScalarModel),
    PSystem(PSystemModel),
    Euler(EulerModel),
}

impl FluxModel {
    pub fn n_families(&self) -> usize {
        match self {
            FluxModel::Scalar(_) => 1,
            _ => 2,
        }
    }

    pub fn check_state(&self, s: &State) -> Result<()> {
        match self {
            FluxModel::Scalar(m) => m.check_state(s.as_scalar()),
            FluxModel::PSystem(m) => m.check_v(s.comp(1)),
            FluxModel::Euler(m) => m.check_rho(s.comp(0)),
        }
    }

    /// Flux value f(u) of the governing law (the piecewise-linear
    /// approximant for scalar models).
    pub fn flux_vec(&self, s: &State) -> [f64; 2] {
        match self {
            FluxModel::Scalar(m) => [m.table.eval(s.as_scalar()), 0.0],
            FluxModel::PSystem(m) => [m.pressure(s.comp(1)), -s.comp(0)],
            FluxModel::Euler(m) => {
                let (rho, q) = (s.comp(0), s.comp(1));
                [q, q * q / rho + m.pressure(rho)]
            }
        }
    }

    /// Jacobian Df(u) of the smooth flux.
    pub fn jacobian(&self, s: &State) -> Mat2 {
        match self {
            FluxModel::Scalar(m) => Mat2([[m.flux.dflux(s.as_scalar()), 0.0], [0.0, 0.0]]),
            FluxModel::PSystem(m) => Mat2([[0.0, m.dpressure(s.comp(1))], [-1.0, 0.0]]),
            FluxModel::Euler(m) => {
                let (rho, q) = (s.comp(0), s.comp(1));
                let u = q / rho;
                Mat2([[0.0, 1.0], [-u * u + m.dpressure(rho), 2.0 * u]])
            }
        }
    }

    fn orient(&self) -> Orient {
        match self {
            FluxModel::Euler(_) => Orient::FirstPositive,
            _ => Orient::LastPositive,
        }
    }

    /// Averaged matrix of a state pair together with its eigen-data, using
    /// the model's closed form (chord slope, matrixp, matrixE).
    pub fn averaged(&self, a: &State, b: &State) -> Result<(Mat2, EigenData)> {
        match self {
            FluxModel::Scalar(m) => {
                let s = m.table.chord(a.as_scalar(), b.as_scalar());
                Ok((Mat2([[s, 0.0], [0.0, 0.0]]), EigenData::scalar(s)))
            }
            FluxModel::PSystem(m) => m.averaged_matrix(a.comp(1), b.comp(1)),
            FluxModel::Euler(m) => m.averaged_matrix(a, b),
        }
    }

    /// Averaged eigenvalue of one family.
    pub fn averaged_lambda(&self, family: usize, a: &State, b: &State) -> Result<f64> {
        Ok(self.averaged(a, b)?.1.lam[family])
    }

    /// Pointwise eigen-data (coincidence limit of the averaged matrix).
    pub fn eigen_at(&self, s: &State) -> Result<EigenData> {
        self.averaged(s, s).map(|(_, e)| e)
    }

    /// Global wave-family parameter `mu_i` with `grad mu_i . r_i > 0` under
    /// the model's eigenvector orientation.
    pub fn mu(&self, family: usize, s: &State) -> f64 {
        match self {
            FluxModel::Scalar(_) => s.as_scalar(),
            FluxModel::PSystem(_) => {
                let _ = family;
                s.comp(1)
            }
            FluxModel::Euler(_) => s.comp(0),
        }
    }

    /// Per-family eigenvalue bands scanned over a sample of states; errors
    /// if the bands of neighbouring families come within the separation
    /// floor of touching.
    pub fn band_scan<'a>(&self, states: impl Iterator<Item = &'a State>) -> Result<Vec<(f64, f64)>> {
        let n = self.n_families();
        let mut bands = vec![(f64::INFINITY, f64::NEG_INFINITY); n];
        for s in states {
            self.check_state(s)?;
            let e = self.eigen_at(s)?;
            for (j, band) in bands.iter_mut().enumerate() {
                band.0 = band.0.min(e.lam[j]);
                band.1 = band.1.max(e.lam[j]);
            }
        }
        for j in 1..n {
            if bands[j].0 - bands[j - 1].1 < BAND_SEPARATION_FLOOR {
                return Err(FtError::BandOverlap(format!(
                    "family {} band [{:.6}, {:.6}] vs family {} band [{:.6}, {:.6}]",
                    j - 1,
                    bands[j - 1].0,
                    bands[j - 1].1,
                    j,
                    bands[j].0,
                    bands[j].1
                )));
            }
        }
        Ok(bands)
    }
}

/// Gauss-Legendre average of Df along the segment between two states; the
/// residual of the Rankine-Hugoniot identity is asserted so the quadrature
/// order is self checking.
pub fn averaged_matrix_generic(model: &FluxModel, a: &State, b: &State) -> Result<Mat2> {
    model.check_state(a)?;
    model.check_state(b)?;
    let mut m = Mat2::zero();
    for (theta, w) in gauss_legendre_16() {
        let mid = match a.dim() {
            1 => State::scalar((1.0 - theta) * a.comp(0) + theta * b.comp(0)),
            _ => State::pair(
                (1.0 - theta) * a.comp(0) + theta * b.comp(0),
                (1.0 - theta) * a.comp(1) + theta * b.comp(1),
            ),
        };
        m = m.add(&model.jacobian(&mid).scale(w));
    }
    Ok(m)
}

/// Residual of `Abar (b - a) - (f(b) - f(a))` in the 1-norm, for the smooth
/// flux of the model.
pub fn matrix_defect(model: &FluxModel, m: &Mat2, a: &State, b: &State) -> f64 {
    let diff = b.sub(a);
    let lhs = m.mul_vec(diff);
    let (fa, fb) = match model {
        FluxModel::Scalar(sm) => (
            [sm.flux.eval(a.as_scalar()), 0.0],
            [sm.flux.eval(b.as_scalar()), 0.0],
        ),
        _ => (model.flux_vec(a), model.flux_vec(b)),
    };
    (lhs[0] - (fb[0] - fa[0])).abs() + (lhs[1] - (fb[1] - fa[1])).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn burgers() -> ScalarModel {
        ScalarModel::new(ScalarFlux::Burgers, -3.0, 3.0, 0.05, 0)
    }

    #[test]
    fn averaged_speed_scalar_matches_chord_and_coincidence() {
        let m = burgers();
        // Chord of u^2/2 over (0, 2) is 1.
        assert!((m.flux.chord(0.0, 2.0) - 1.0).abs() < 1e-14);
        // Coincidence limit is f'(u).
        assert!((m.flux.chord(0.7, 0.7) - 0.7).abs() < 1e-14);
        // Cubic chord over (-1, 1) is 1; cross-check by quadrature of f'.
        let cubic = ScalarFlux::Cubic;
        assert!((cubic.chord(-1.0, 1.0) - 1.0).abs() < 1e-14);
        let quad: f64 = gauss_legendre_16()
            .iter()
            .map(|&(s, w)| w * cubic.dflux(s * -1.0 + (1.0 - s) * 1.0))
            .sum();
        assert!((quad - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scalar_chord_equals_chord_slope_exactly() {
        let m = burgers();
        for (a, b) in [(0.25, 1.75), (-2.0, 0.5), (1.3, 1.31)] {
            let c = m.flux.chord(a, b);
            let direct = (m.flux.eval(b) - m.flux.eval(a)) / (b - a);
            assert!((c - direct).abs() <= 1e-12 * direct.abs().max(1.0));
        }
        // Nearly coincident arguments: the midpoint derivative branch keeps
        // full accuracy where the direct quotient loses digits.
        let c = m.flux.chord(1.3, 1.3 + 1e-8);
        assert!((c - (1.3 + 0.5e-8)).abs() < 1e-14);
    }

    #[test]
    fn psystem_cbar_examples() {
        let m = PSystemModel::new(PressureLaw::PowerLaw { gamma: 1.0 }, 0.2, 5.0).unwrap();
        // p(v) = 1/v: cbar(1, 2) = sqrt(0.5).
        assert!((m.cbar(1.0, 2.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        // Coincidence: cbar(v, v) = sqrt(-p'(v)) = 1/v.
        assert!((m.cbar(2.0, 2.0).unwrap() - 0.5).abs() < 1e-12);
        // Linear pressure p = -v gives cbar = 1 everywhere.
        let lin = PSystemModel::new(PressureLaw::Linear, 0.2, 5.0).unwrap();
        assert!((lin.cbar(0.5, 4.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((lin.cbar(3.0, 3.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn psystem_averaged_matrix_eigen() {
        let m = PSystemModel::new(PressureLaw::PowerLaw { gamma: 1.0 }, 0.2, 5.0).unwrap();
        let (mat, e) = m.averaged_matrix(1.0, 2.0).unwrap();
        let c = 0.5f64.sqrt();
        assert!((e.lam[0] + c).abs() < 1e-12 && (e.lam[1] - c).abs() < 1e-12);
        assert!((mat.0[0][1] + c * c).abs() < 1e-12);
        // Unit norm, duality, orientation.
        for j in 0..2 {
            assert!((crate::linalg::norm2(e.r[j]) - 1.0).abs() < 1e-12);
            assert!(e.r[j][1] > 0.0);
            for k in 0..2 {
                let d = if j == k { 1.0 } else { 0.0 };
                assert!((dot2(e.l[j], e.r[k]) - d).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn euler_ebar_examples() {
        let m = EulerModel::new(2.0, 1e-3).unwrap();
        // rho = rho': mean velocity.
        assert!((m.ebar(1.0, 0.3, 1.0, 0.7) - 0.5).abs() < 1e-14);
        // u = u': that velocity.
        assert!((m.ebar(4.0, 4.0, 1.0, 1.0) - 1.0).abs() < 1e-14);
        // (rho, u) = (4, 1), (rho', u') = (1, 0): first form (4 - 0 - 2)/3.
        let e = m.ebar(4.0, 4.0, 1.0, 0.0);
        assert!((e - 2.0 / 3.0).abs() < 1e-14);
        // First form agrees where rho != rho'.
        let first = (4.0 - 0.0 - (4.0f64 * 1.0).sqrt() * (1.0 - 0.0)) / (4.0 - 1.0);
        assert!((e - first).abs() < 1e-10 * e.abs().max(1.0));
    }

    #[test]
    fn euler_averaged_matrix_example() {
        // p = rho^2, equal states rho = 1, u = 0: eigenvalues -+sqrt(2).
        let m = EulerModel::new(2.0, 1e-3).unwrap();
        let a = State::pair(1.0, 0.0);
        let (_, e) = m.averaged_matrix(&a, &a).unwrap();
        assert!((e.lam[0] + 2f64.sqrt()).abs() < 1e-12);
        assert!((e.lam[1] - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rankine_hugoniot_defect_all_models() {
        let mut rng = crate::scenario::seeded_rng(7);
        use rand::Rng;
        let ps = FluxModel::PSystem(
            PSystemModel::new(PressureLaw::PowerLaw { gamma: 1.4 }, 0.3, 4.0).unwrap(),
        );
        let eu = FluxModel::Euler(EulerModel::new(1.4, 1e-3).unwrap());
        for _ in 0..200 {
            let a = State::pair(rng.gen_range(-1.0..1.0), rng.gen_range(0.5..3.0));
            let b = State::pair(rng.gen_range(-1.0..1.0), rng.gen_range(0.5..3.0));
            let (mp, _) = match &ps {
                FluxModel::PSystem(m) => m.averaged_matrix(a.comp(1), b.comp(1)).unwrap(),
                _ => unreachable!(),
            };
            assert!(matrix_defect(&ps, &mp, &a, &b) < 1e-10);
            let ae = State::pair(rng.gen_range(0.5..3.0), rng.gen_range(-1.0..1.0));
            let be = State::pair(rng.gen_range(0.5..3.0), rng.gen_range(-1.0..1.0));
            let (me, _) = match &eu {
                FluxModel::Euler(m) => m.averaged_matrix(&ae, &be).unwrap(),
                _ => unreachable!(),
            };
            assert!(matrix_defect(&eu, &me, &ae, &be) < 1e-10);
        }
    }

    #[test]
    fn generic_quadrature_matches_closed_forms() {
        let ps = FluxModel::PSystem(
            PSystemModel::new(PressureLaw::PowerLaw { gamma: 1.4 }, 0.3, 4.0).unwrap(),
        );
        let a = State::pair(0.2, 1.0);
        let b = State::pair(-0.4, 2.5);
        let g = averaged_matrix_generic(&ps, &a, &b).unwrap();
        let (cf, _) = match &ps {
            FluxModel::PSystem(m) => m.averaged_matrix(1.0, 2.5).unwrap(),
            _ => unreachable!(),
        };
        assert!(g.sub(&cf).frobenius() < 1e-12);
        // Symmetry.
        let g2 = averaged_matrix_generic(&ps, &b, &a).unwrap();
        assert!(g.sub(&g2).frobenius() < 1e-12);
        // Coincidence: Df(a).
        let gc = averaged_matrix_generic(&ps, &a, &a).unwrap();
        assert!(gc.sub(&ps.jacobian(&a)).frobenius() < 1e-13);
    }

    #[test]
    fn mu_orientation_positive() {
        let mut rng = crate::scenario::seeded_rng(11);
        use rand::Rng;
        let ps = FluxModel::PSystem(
            PSystemModel::new(PressureLaw::PowerLaw { gamma: 1.4 }, 0.3, 4.0).unwrap(),
        );
        let eu = FluxModel::Euler(EulerModel::new(1.4, 1e-3).unwrap());
        let sc = FluxModel::Scalar(burgers());
        for _ in 0..1000 {
            let s2 = State::pair(rng.gen_range(0.5..3.0), rng.gen_range(0.5..3.0));
            for model in [&ps, &eu] {
                let e = model.eigen_at(&s2).unwrap();
                for fam in 0..2 {
                    // grad mu . r via finite difference of mu along r.
                    let eps = 1e-6;
                    let shifted = State::pair(
                        s2.comp(0) + eps * e.r[fam][0],
                        s2.comp(1) + eps * e.r[fam][1],
                    );
                    let dmu = (model.mu(fam, &shifted) - model.mu(fam, &s2)) / eps;
                    assert!(dmu > 0.0, "grad mu . r must be positive");
                }
            }
            let s1 = State::scalar(rng.gen_range(-2.0..2.0));
            assert!((sc.mu(0, &s1) - s1.as_scalar()).abs() == 0.0);
        }
    }

    #[test]
    fn euler_eigenvector_eigenvalue_coupling() {
        // |r_i(u+, u') - r_i(u-, u')| <= C |lam_i(u+, u') - lam_i(u-, u')|
        let m = EulerModel::new(1.4, 1e-3).unwrap();
        let mut rng = crate::scenario::seeded_rng(23);
        use rand::Rng;
        for _ in 0..500 {
            let up = State::pair(rng.gen_range(0.5..2.0), rng.gen_range(-0.5..0.5));
            let um = State::pair(rng.gen_range(0.5..2.0), rng.gen_range(-0.5..0.5));
            let pr = State::pair(rng.gen_range(0.5..2.0), rng.gen_range(-0.5..0.5));
            let (_, ep) = m.averaged_matrix(&up, &pr).unwrap();
            let (_, em) = m.averaged_matrix(&um, &pr).unwrap();
            for j in 0..2 {
                let dr = crate::linalg::norm2(crate::linalg::sub2(ep.r[j], em.r[j]));
                let dl = (ep.lam[j] - em.lam[j]).abs();
                // Eigenvectors are (1, lam)/sqrt(1+lam^2): Lipschitz with
                // constant 1 in lam.
                assert!(dr <= 2.0 * dl + 1e-13, "dr = {dr}, dl = {dl}");
            }
        }
    }

    #[test]
    fn band_scan_rejects_overlap() {
        // A pressure law with tiny |p'| makes the two p-system bands touch
        // near zero.
        let m = PSystemModel::new(PressureLaw::Scaled { factor: 1e-13, gamma: 1.0 }, 0.5, 2.0)
            .unwrap();
        let fm = FluxModel::PSystem(m);
        let states = [State::pair(0.0, 0.6), State::pair(0.0, 1.9)];
        assert!(matches!(
            fm.band_scan(states.iter()),
            Err(FtError::BandOverlap(_))
        ));
    }
}
