//! Conventional Galerkin BEM on uniform meshes of discontinuous polynomials, solving
//! for `du/dn` directly. Used as an independent check of the HNA solver at low `k`.

use num_complex::Complex64;

use crate::asymptotics::LeadingOrderTerm;
use crate::galerkin_solver::{self, AssemblyMetadata};
use crate::geometry::{IncidentWave, PolygonModel};
use crate::hna_space::HnaSpace;
use crate::operators::OperatorConfig;
use crate::postprocess::Solution;
use crate::quadrature::QuadConfig;
use crate::{HnaError, Result};

/// Largest wavenumber accepted without `allow_expensive`.
pub const MAX_REFERENCE_K: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ReferenceConfig {
    /// Elements per wavelength.
    pub ppw_dof: f64,
    /// Polynomial degree on each element.
    pub degree: usize,
    pub quad: QuadConfig,
    pub allow_expensive: bool,
}

impl ReferenceConfig {
    /// Piecewise constants; eight Gauss points per element.
    pub fn new(ppw_dof: f64) -> Self {
        ReferenceConfig {
            ppw_dof,
            degree: 0,
            quad: QuadConfig {
                ppw: 10.0,
                order: 8,
                layers: 8,
                near_factor: 1.0,
            },
            allow_expensive: false,
        }
    }
}

/// Uniform-mesh solution; `du/dn = k phi` with `phi` in `space`.
#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    pub space: HnaSpace,
    pub leading: Vec<LeadingOrderTerm>,
    pub coefficients: Vec<Complex64>,
    pub metadata: AssemblyMetadata,
}

impl ReferenceSolution {
    pub fn solution<'a>(&'a self, poly: &'a PolygonModel, wave: IncidentWave) -> Result<Solution<'a>> {
        Solution::new(poly, &self.space, &self.coefficients, &self.leading, wave)
    }
}

pub fn solve_reference(poly: &PolygonModel, wave: IncidentWave, op: OperatorConfig, cfg: &ReferenceConfig) -> Result<ReferenceSolution> {
    if wave.k > MAX_REFERENCE_K && !cfg.allow_expensive {
        return Err(HnaError::CostGuard(format!(
            "reference solve at k = {} exceeds k = {MAX_REFERENCE_K}; pass --allow-expensive to override",
            wave.k
        )));
    }
    let space = HnaSpace::uniform(poly, &wave, cfg.ppw_dof, cfg.degree)?;
    let leading: Vec<LeadingOrderTerm> = poly.sides.iter().map(|s| LeadingOrderTerm::zero(s.index, s.length)).collect();
    let mut sys = galerkin_solver::assemble(poly, &space, wave, &leading, op, cfg.quad)?;
    let coefficients = sys.solve()?.iter().cloned().collect();
    Ok(ReferenceSolution {
        space,
        leading,
        coefficients,
        metadata: sys.metadata,
    })
}
