//! Averaged-matrix algebra of the isentropic Euler equations in the
//! conservative variables (rho, q = rho u). Euler enters the artifact only
//! through this algebra and classification checks on supplied state pairs.

use super::{EigenData, State};
use crate::error::{FtError, Result};
use crate::linalg::Mat2;

#[derive(Clone, Debug)]
pub struct EulerModel {
    /// p(rho) = rho^gamma, increasing for rho > 0.
    pub gamma: f64,
    /// Vacuum guard: states with rho below this are rejected.
    pub rho_min: f64,
}

impl EulerModel {
    pub fn new(gamma: f64, rho_min: f64) -> Result<Self> {
        if gamma <= 0.0 {
            return Err(FtError::Scenario {
                field: "model.gamma".into(),
                reason: "need gamma > 0 for an increasing pressure law".into(),
            });
        }
        if rho_min <= 0.0 {
            return Err(FtError::Scenario {
                field: "model.rho_min".into(),
                reason: "vacuum guard must be positive".into(),
            });
        }
        Ok(EulerModel { gamma, rho_min })
    }

    pub fn pressure(&self, rho: f64) -> f64 {
        rho.powf(self.gamma)
    }

    pub fn dpressure(&self, rho: f64) -> f64 {
        self.gamma * rho.powf(self.gamma - 1.0)
    }

    pub fn check_rho(&self, rho: f64) -> Result<()> {
        if rho < self.rho_min {
            return Err(FtError::Domain(format!(
                "rho = {rho} below vacuum guard {}",
                self.rho_min
            )));
        }
        Ok(())
    }

    /// Averaged transport speed ebar, computed from the regularized form
    /// (u + u')/2 + (sqrt(rho) - sqrt(rho')) / (2 (sqrt(rho) + sqrt(rho'))) (u - u'),
    /// which coincides with (rho u - rho' u' - sqrt(rho rho')(u - u')) / (rho - rho')
    /// whenever rho != rho'.
    pub fn ebar(&self, rho: f64, q: f64, rho_p: f64, q_p: f64) -> f64 {
        let u = q / rho;
        let u_p = q_p / rho_p;
        let sr = rho.sqrt();
        let sr_p = rho_p.sqrt();
        0.5 * (u + u_p) + 0.5 * (sr - sr_p) / (sr + sr_p) * (u - u_p)
    }

    /// Averaged sound speed squared (p(rho) - p(rho')) / (rho - rho'), with
    /// the coincidence limit p'(rho).
    pub fn cbar2(&self, rho: f64, rho_p: f64) -> Result<f64> {
        let c2 = if rho == rho_p {
            self.dpressure(rho)
        } else {
            (self.pressure(rho) - self.pressure(rho_p)) / (rho - rho_p)
        };
        if c2 <= 0.0 {
            return Err(FtError::Model(format!(
                "nonpositive cbar^2 = {c2} at (rho, rho') = ({rho}, {rho_p})"
            )));
        }
        Ok(c2)
    }

    /// Averaged matrix [[0, 1], [cbar^2 - ebar^2, 2 ebar]] with eigenvalues
    /// ebar -+ cbar and eigenvectors proportional to (1, ebar -+ cbar).
    pub fn averaged_matrix(&self, a: &State, b: &State) -> Result<(Mat2, EigenData)> {
        let (rho, q) = (a.comp(0), a.comp(1));
        let (rho_p, q_p) = (b.comp(0), b.comp(1));
        self.check_rho(rho)?;
        self.check_rho(rho_p)?;
        let e = self.ebar(rho, q, rho_p, q_p);
        let c2 = self.cbar2(rho, rho_p)?;
        let c = c2.sqrt();
        let m = Mat2([[0.0, 1.0], [-e * e + c2, 2.0 * e]]);
        let lam = [e - c, e + c];
        let mut r = [[0.0; 2]; 2];
        let mut l = [[0.0; 2]; 2];
        for j in 0..2 {
            let n = (1.0 + lam[j] * lam[j]).sqrt();
            r[j] = [1.0 / n, lam[j] / n];
        }
        // Dual rows: l_1 = n1 (lam_2, -1) / (lam_2 - lam_1), etc.
        let gap = lam[1] - lam[0];
        let n0 = (1.0 + lam[0] * lam[0]).sqrt();
        let n1 = (1.0 + lam[1] * lam[1]).sqrt();
        l[0] = [n0 * lam[1] / gap, -n0 / gap];
        l[1] = [-n1 * lam[0] / gap, n1 / gap];
        Ok((m, EigenData { n: 2, lam, r, l }))
    }
}
