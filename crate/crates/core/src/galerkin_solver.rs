//! Dense Galerkin system: assembly, LU solve, 2-norm conditioning and binary dump.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::asymptotics::LeadingOrderTerm;
use crate::geometry::{IncidentWave, PolygonModel};
use crate::hna_space::HnaSpace;
use crate::operators::{AssemblyStats, Assembler, OperatorConfig};
use crate::quadrature::QuadConfig;
use crate::{HnaError, Result};

/// Residual bound `|A c - b| <= RESIDUAL_TOL |b|` enforced after every solve.
pub const RESIDUAL_TOL: f64 = 1e-10;

const DUMP_MAGIC: &[u8; 4] = b"HNAS";
const DUMP_VERSION: u32 = 1;

#[derive(Debug, Clone, serde::Serialize)]
pub struct AssemblyMetadata {
    pub quad: QuadConfig,
    pub operator: OperatorConfig,
    pub panels: usize,
    pub nodes: usize,
    pub far_pairs: usize,
    pub near_pairs: usize,
    pub singular_pairs: usize,
    pub assembly_seconds: f64,
    pub solve_seconds: f64,
    pub svd_seconds: f64,
}

/// `A phi = (1/k)(f - A Psi)` projected onto the space.
#[derive(Debug, Clone)]
pub struct GalerkinSystem {
    pub matrix: DMatrix<Complex64>,
    pub rhs: DVector<Complex64>,
    pub coefficients: Option<DVector<Complex64>>,
    pub cond2: Option<f64>,
    pub metadata: AssemblyMetadata,
}

/// Assembles the unsolved system for `space`.
pub fn assemble(
    poly: &PolygonModel,
    space: &HnaSpace,
    wave: IncidentWave,
    leading: &[LeadingOrderTerm],
    op: OperatorConfig,
    quad: QuadConfig,
) -> Result<GalerkinSystem> {
    let t0 = Instant::now();
    let asm = Assembler::new(poly, space, wave, leading, op, quad)?.assemble()?;
    let rhs = (&asm.load - &asm.psi_column).unscale(wave.k);
    let AssemblyStats {
        panels,
        nodes,
        far_pairs,
        near_pairs,
        singular_pairs,
    } = asm.stats;
    Ok(GalerkinSystem {
        matrix: asm.matrix,
        rhs,
        coefficients: None,
        cond2: None,
        metadata: AssemblyMetadata {
            quad,
            operator: op,
            panels,
            nodes,
            far_pairs,
            near_pairs,
            singular_pairs,
            assembly_seconds: t0.elapsed().as_secs_f64(),
            solve_seconds: 0.0,
            svd_seconds: 0.0,
        },
    })
}

impl GalerkinSystem {
    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    /// Solves by LU with partial pivoting and stores the coefficients.
    pub fn solve(&mut self) -> Result<&DVector<Complex64>> {
        let t0 = Instant::now();
        let x = solve_dense(&self.matrix, &self.rhs)?;
        self.metadata.solve_seconds = t0.elapsed().as_secs_f64();
        Ok(self.coefficients.insert(x))
    }

    /// 2-norm condition number, cached.
    pub fn condition_number(&mut self) -> f64 {
        if let Some(c) = self.cond2 {
            return c;
        }
        let t0 = Instant::now();
        let c = condition_number(&self.matrix);
        self.metadata.svd_seconds = t0.elapsed().as_secs_f64();
        self.cond2 = Some(c);
        c
    }

    /// `|A c - b| / |b|` for the stored coefficients.
    pub fn relative_residual(&self) -> Option<f64> {
        self.coefficients.as_ref().map(|c| relative_residual(&self.matrix, c, &self.rhs))
    }

    /// Writes the matrix and right-hand side; see [`write_system`].
    pub fn dump(&self, path: &Path) -> Result<()> {
        write_system(path, &self.matrix, &self.rhs)
    }
}

pub fn relative_residual(a: &DMatrix<Complex64>, x: &DVector<Complex64>, b: &DVector<Complex64>) -> f64 {
    let r = (a * x - b).norm();
    let nb = b.norm();
    if nb == 0.0 {
        r
    } else {
        r / nb
    }
}

/// Dense LU solve with one step of iterative refinement when the residual is above
/// [`RESIDUAL_TOL`]. Fails with the condition number when the matrix is singular or
/// the residual bound cannot be met.
pub fn solve_dense(a: &DMatrix<Complex64>, b: &DVector<Complex64>) -> Result<DVector<Complex64>> {
    if !a.is_square() || a.nrows() != b.len() {
        return Err(HnaError::Config(format!(
            "system is {}x{} with a right-hand side of length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    if a.iter().chain(b.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(HnaError::Solver {
            cond: f64::NAN,
            detail: "non-finite entries in the system".into(),
        });
    }
    let lu = a.clone().lu();
    let singular = || HnaError::Solver {
        cond: condition_number(a),
        detail: "matrix is numerically singular".into(),
    };
    let mut x = lu.solve(b).ok_or_else(singular)?;
    let mut res = relative_residual(a, &x, b);
    if res > RESIDUAL_TOL {
        let r = b - a * &x;
        if let Some(dx) = lu.solve(&r) {
            x += dx;
            res = relative_residual(a, &x, b);
        }
    }
    if !(res <= RESIDUAL_TOL) {
        return Err(HnaError::Solver {
            cond: condition_number(a),
            detail: format!("relative residual {res:.3e} exceeds {RESIDUAL_TOL:e}"),
        });
    }
    Ok(x)
}

/// `sigma_max / sigma_min` from a full SVD; infinite for a singular matrix.
pub fn condition_number(a: &DMatrix<Complex64>) -> f64 {
    if a.is_empty() {
        return 1.0;
    }
    let sv = a.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Binary layout: 32-byte header (`HNAS`, u32 version, u64 N, 16 zero bytes), then
/// the matrix row-major and the right-hand side, each entry as two little-endian f64.
pub fn write_system(path: &Path, a: &DMatrix<Complex64>, b: &DVector<Complex64>) -> Result<()> {
    let n = b.len();
    let mut buf = Vec::with_capacity(32 + 16 * n * (n + 1));
    buf.extend_from_slice(DUMP_MAGIC);
    buf.extend_from_slice(&DUMP_VERSION.to_le_bytes());
    buf.extend_from_slice(&(n as u64).to_le_bytes());
    buf.extend_from_slice(&[0u8; 16]);
    let mut put = |z: &Complex64| {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    };
    for i in 0..n {
        for j in 0..n {
            put(&a[(i, j)]);
        }
    }
    b.iter().for_each(&mut put);
    let mut f = std::fs::File::create(path)?;
    f.write_all(&buf)?;
    Ok(())
}

/// Reads a file produced by [`write_system`].
pub fn read_system(path: &Path) -> Result<(DMatrix<Complex64>, DVector<Complex64>)> {
    let bytes = std::fs::read(path)?;
    let bad = |m: &str| HnaError::Parse(format!("{}: {m}", path.display()));
    if bytes.len() < 32 || &bytes[..4] != DUMP_MAGIC {
        return Err(bad("not a system dump"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != DUMP_VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    if bytes.len() != 32 + 16 * n * (n + 1) {
        return Err(bad("truncated"));
    }
    let at = |idx: usize| {
        let o = 32 + 16 * idx;
        Complex64::new(
            f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap()),
            f64::from_le_bytes(bytes[o + 8..o + 16].try_into().unwrap()),
        )
    };
    let a = DMatrix::from_fn(n, n, |i, j| at(i * n + j));
    let b = DVector::from_fn(n, |i, _| at(n * n + i));
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::leading_order_all;
    use crate::geometry::make_square;
    use crate::hna_space::{build_space, SpaceParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
        DMatrix::from_fn(n, n, |i, j| {
            let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            if i == j {
                z + Complex64::new(2.0 * n as f64, 0.0)
            } else {
                z
            }
        })
    }

    #[test]
    fn identity_solve_and_condition() {
        let a = DMatrix::<Complex64>::identity(5, 5);
        let mut b = DVector::zeros(5);
        b[0] = Complex64::new(1.0, 0.0);
        let x = solve_dense(&a, &b).unwrap();
        assert_eq!(x, b);
        assert!((condition_number(&a) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_system_matches_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_matrix(50, &mut rng);
        let b = DVector::from_fn(50, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let x = solve_dense(&a, &b).unwrap();
        // QR is a different factorisation path
        let y = a.clone().qr().solve(&b).unwrap();
        assert!((&x - &y).norm() <= 1e-10 * y.norm());
    }

    #[test]
    fn condition_is_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_matrix(12, &mut rng);
        let c = condition_number(&a);
        let s = condition_number(&(a * Complex64::new(-0.3, 2.0)));
        assert!((c - s).abs() <= 1e-10 * c);
    }

    #[test]
    fn singular_matrix_reports_condition() {
        let mut a = DMatrix::<Complex64>::identity(3, 3);
        a[(2, 2)] = Complex64::new(0.0, 0.0);
        let b = DVector::from_element(3, Complex64::new(1.0, 0.0));
        match solve_dense(&a, &b) {
            Err(HnaError::Solver { cond, .. }) => assert!(cond > 1e15),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dump_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_matrix(4, &mut rng);
        let b = DVector::from_fn(4, |i, _| Complex64::new(i as f64, -1.0));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sys.bin");
        write_system(&path, &a, &b).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[..4], b"HNAS");
        assert_eq!(bytes.len(), 32 + 16 * 20);
        let (a2, b2) = read_system(&path).unwrap();
        assert_eq!(a, a2);
        assert_eq!(b, b2);
    }

    #[test]
    fn square_degree_zero_system() {
        let poly = make_square();
        let wave = IncidentWave::new(1.0, 0.3).unwrap();
        let space = build_space(&poly, &wave, SpaceParams::new(0)).unwrap();
        let leading = leading_order_all(&poly, &wave).unwrap();
        let mut sys = assemble(&poly, &space, wave, &leading, OperatorConfig::standard(), QuadConfig::for_degree(0)).unwrap();
        assert_eq!(sys.dim(), space.n_dof());
        assert_eq!(sys.matrix.nrows(), sys.dim());
        sys.solve().unwrap();
        assert!(sys.relative_residual().unwrap() <= RESIDUAL_TOL);
        // Galerkin orthogonality
        let c = sys.coefficients.clone().unwrap();
        let r = &sys.matrix * c - &sys.rhs;
        assert!(r.camax() <= 1e-10 * sys.rhs.camax());
        assert!(sys.condition_number() >= 1.0);
    }
}
