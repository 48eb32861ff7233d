//! Interpolation and collocation solves around the fast sums, plus the
//! stability diagnostics of the band-limited interpolation matrix.

use crate::bandlimit::{BandLimitedKernel, BandLimitedTable1d};
use crate::error::{invalid, Error, Result};
use crate::fmm::{domain_span, single_level_leaf, NearField, PairKernel, SingleLevelFmm};
use crate::geometry::{build_tree, mesh_norm, BoxTree, PointSet};
use crate::kernels::{Decay, RadialKernel};
use crate::mlfmm::{multilevel_leaf, LevelGrids, LevelMode, MultilevelFmm};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// Largest `N` accepted by [`assemble_dense`].
pub const DENSE_CAP: usize = 8192;
/// Largest `N` accepted by [`spectral_diagnostics`].
pub const EIGEN_CAP: usize = 2048;

/// Symmetric `A_ij = Phi(x_i - x_j)` (or `Phi_sigma` when `band_limited`).
pub fn assemble_dense(kernel: &RadialKernel, ps: &PointSet, band_limited: bool, sigma: f64) -> Result<DMatrix<f64>> {
    let n = ps.len();
    if n > DENSE_CAP {
        return Err(Error::MemoryCap { n, cap: DENSE_CAP });
    }
    kernel.validate()?;
    let near = if band_limited { NearField::BandLimited } else { NearField::Original };
    let pk = PairKernel::new(*kernel, near, sigma, ps.dim(), domain_span(ps))?;
    let d = ps.dim();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = ps.point(i);
            let mut r = [0.0; 2];
            (i..n)
                .map(|j| {
                    let xj = ps.point(j);
                    for a in 0..d {
                        r[a] = xi[a] - xj[a];
                    }
                    pk.eval(&r[..d])
                })
                .collect()
        })
        .collect();
    let mut a = DMatrix::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        for (k, v) in row.into_iter().enumerate() {
            a[(i, i + k)] = v;
            a[(i + k, i)] = v;
        }
    }
    Ok(a)
}

/// Matrix-vector product source for the Krylov iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Backend {
    #[default]
    Dense,
    SingleFmm,
    Mlfmm,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Dense => "dense",
            Backend::SingleFmm => "single_fmm",
            Backend::Mlfmm => "mlfmm",
        })
    }
}

impl FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "dense" | "direct" => Ok(Backend::Dense),
            "single" | "single_fmm" | "fmm" => Ok(Backend::SingleFmm),
            "mlfmm" | "multilevel" => Ok(Backend::Mlfmm),
            other => invalid(format!("unknown backend '{other}'")),
        }
    }
}

/// Fast-sum parameters shared by the FMM backends.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FmmOptions {
    pub sigma: f64,
    /// Nodes per dimension (leaf level for MLFMM).
    pub m_per_dim: usize,
    pub leaf_level: Option<usize>,
    pub stencil: usize,
    pub level_mode: LevelMode,
    /// Target mean leaf occupancy for MLFMM.
    pub occupancy: usize,
}

impl Default for FmmOptions {
    fn default() -> Self {
        FmmOptions { sigma: PI, m_per_dim: 64, leaf_level: None, stencil: 10, level_mode: LevelMode::default(), occupancy: 32 }
    }
}

#[derive(Clone, Debug)]
pub struct InterpolationProblem<'a> {
    pub kernel: RadialKernel,
    pub ps: &'a PointSet,
    pub rhs: Vec<f64>,
    pub backend: Backend,
    /// Solve with `A_sigma` instead of `A` (dense and near field alike).
    pub band_limited: bool,
    pub tol: f64,
    pub max_iter: usize,
    pub fmm: FmmOptions,
}

impl InterpolationProblem<'_> {
    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if self.rhs.len() != self.ps.len() {
            return invalid(format!("{} right-hand side values for {} points", self.rhs.len(), self.ps.len()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return invalid(format!("tolerance must be positive, got {}", self.tol));
        }
        if self.max_iter == 0 {
            return invalid("max_iter must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Krylov {
    Cg,
    Gmres,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveStats {
    pub method: Krylov,
    pub backend: Backend,
    pub iterations: usize,
    pub matvecs: usize,
    /// `||A lambda - b|| / ||b||`, recomputed with one extra product.
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub lambda: Vec<f64>,
    pub stats: SolveStats,
}

/// A square linear operator.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>>;
}

impl LinearOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok((self * DVector::from_column_slice(x)).as_slice().to_vec())
    }
}

impl LinearOperator for SingleLevelFmm<'_> {
    fn dim(&self) -> usize {
        self.tree().order().len()
    }
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        SingleLevelFmm::apply(self, x).map(|r| r.values)
    }
}

impl LinearOperator for MultilevelFmm<'_> {
    fn dim(&self) -> usize {
        self.len()
    }
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        MultilevelFmm::apply(self, x).map(|r| r.values)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Conjugate gradients from a zero start. Returns `(x, iterations,
/// matvecs)`; on failure the error carries the best relative residual.
pub fn conjugate_gradient(op: &dyn LinearOperator, b: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, usize, usize)> {
    let n = b.len();
    let bn = norm(b);
    let mut x = vec![0.0; n];
    if bn == 0.0 {
        return Ok((x, 0, 0));
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut best = 1.0;
    for it in 1..=max_iter {
        let ap = op.apply(&p)?;
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NonConvergence { iterations: it, residual: best });
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let rel = rr_new.sqrt() / bn;
        best = f64::min(best, rel);
        if rel <= tol {
            return Ok((x, it, it));
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    Err(Error::NonConvergence { iterations: max_iter, residual: best })
}

/// Restarted GMRES with modified Gram-Schmidt and Givens rotations.
pub fn gmres(op: &dyn LinearOperator, b: &[f64], tol: f64, max_iter: usize, restart: usize) -> Result<(Vec<f64>, usize, usize)> {
    let n = b.len();
    let bn = norm(b);
    let mut x = vec![0.0; n];
    if bn == 0.0 {
        return Ok((x, 0, 0));
    }
    let restart = restart.clamp(1, n.max(1));
    let (mut iters, mut matvecs) = (0, 0);
    let mut best = 1.0;
    while iters < max_iter {
        let ax = op.apply(&x)?;
        matvecs += 1;
        let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        let beta = norm(&r);
        best = f64::min(best, beta / bn);
        if beta / bn <= tol {
            return Ok((x, iters, matvecs));
        }
        let mut v = vec![r.iter().map(|t| t / beta).collect::<Vec<f64>>()];
        let mut h = vec![vec![0.0; restart]; restart + 1];
        let (mut cs, mut sn) = (vec![0.0; restart], vec![0.0; restart]);
        let mut g = vec![0.0; restart + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..restart {
            if iters >= max_iter {
                break;
            }
            iters += 1;
            let mut w = op.apply(&v[k])?;
            matvecs += 1;
            for (j, vj) in v.iter().enumerate() {
                h[j][k] = dot(&w, vj);
                for (a, c) in w.iter_mut().zip(vj) {
                    *a -= h[j][k] * c;
                }
            }
            h[k + 1][k] = norm(&w);
            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let den = h[k][k].hypot(h[k + 1][k]);
            if den == 0.0 {
                k_used = k;
                break;
            }
            cs[k] = h[k][k] / den;
            sn[k] = h[k + 1][k] / den;
            h[k][k] = den;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k_used = k + 1;
            let hk = h[k + 1][k].max(norm(&w));
            best = f64::min(best, g[k + 1].abs() / bn);
            if g[k + 1].abs() / bn <= tol || hk == 0.0 {
                break;
            }
            v.push(w.iter().map(|t| t / hk).collect());
        }
        // Back-substitute the triangular least-squares system.
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let s: f64 = (i + 1..k_used).map(|j| h[i][j] * y[j]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (yi, vi) in y.iter().zip(&v) {
            for (a, c) in x.iter_mut().zip(vi) {
                *a += yi * c;
            }
        }
        if k_used == 0 {
            break;
        }
    }
    let ax = op.apply(&x)?;
    let rel = norm(&b.iter().zip(&ax).map(|(p, q)| p - q).collect::<Vec<_>>()) / bn;
    if rel <= tol {
        return Ok((x, iters, matvecs + 1));
    }
    Err(Error::NonConvergence { iterations: iters, residual: best.min(rel) })
}

fn run_krylov(op: &dyn LinearOperator, prob: &InterpolationProblem) -> Result<Solution> {
    if op.dim() != prob.rhs.len() {
        return Err(Error::Config("operator size differs from the right-hand side".into()));
    }
    let method = if prob.kernel.is_positive_definite() { Krylov::Cg } else { Krylov::Gmres };
    let (lambda, iterations, matvecs) = match method {
        Krylov::Cg => conjugate_gradient(op, &prob.rhs, prob.tol, prob.max_iter)?,
        Krylov::Gmres => gmres(op, &prob.rhs, prob.tol, prob.max_iter, 200)?,
    };
    let ax = op.apply(&lambda)?;
    let residual = norm(&prob.rhs.iter().zip(&ax).map(|(p, q)| p - q).collect::<Vec<_>>()) / norm(&prob.rhs).max(f64::MIN_POSITIVE);
    Ok(Solution { lambda, stats: SolveStats { method, backend: prob.backend, iterations, matvecs: matvecs + 1, residual } })
}

/// Interpolation weights `lambda` with `A lambda = rhs`, products from the
/// chosen backend.
pub fn solve_interpolation(prob: &InterpolationProblem) -> Result<Solution> {
    prob.validate()?;
    let near = if prob.band_limited { NearField::BandLimited } else { NearField::Original };
    let o = &prob.fmm;
    let n = prob.ps.len();
    let d = prob.ps.dim();
    match prob.backend {
        Backend::Dense => {
            let a = assemble_dense(&prob.kernel, prob.ps, prob.band_limited, o.sigma)?;
            run_krylov(&a, prob)
        }
        Backend::SingleFmm => {
            let tree = build_tree(prob.ps, o.leaf_level.unwrap_or_else(|| single_level_leaf(n, d)))?;
            let op = SingleLevelFmm::new(prob.kernel, o.sigma, o.m_per_dim, near, prob.ps, &tree)?;
            run_krylov(&op, prob)
        }
        Backend::Mlfmm => {
            let tree: BoxTree = build_tree(prob.ps, o.leaf_level.unwrap_or_else(|| multilevel_leaf(n, d, o.occupancy)))?;
            let grids = LevelGrids::new(&prob.kernel, o.sigma, o.m_per_dim, d, tree.leaf_level(), o.level_mode, o.stencil)?;
            let op = MultilevelFmm::new(grids, near, prob.ps, &tree)?;
            run_krylov(&op, prob)
        }
    }
}

/// Result of the one-dimensional Kansa collocation.
#[derive(Clone, Debug)]
pub struct Collocation {
    pub nodes: Vec<f64>,
    pub lambda: Vec<f64>,
    /// RMS of `u - sin(pi x)` on the evaluation lattice.
    pub rms: f64,
    pub lattice: Vec<f64>,
    pub values: Vec<f64>,
}

/// Points of the RMS lattice.
pub const COLLOCATION_LATTICE: usize = 1001;

/// Kansa collocation of `-u'' + pi^2 u = 2 pi^2 sin(pi x)` on `[a, b]` with
/// homogeneous Dirichlet data, `n` uniform nodes including both ends.
/// `band_limited` replaces the kernel by `Phi_sigma` with the given sigma.
pub fn solve_collocation_1d(n: usize, kernel: &RadialKernel, band_limited: Option<f64>, domain: (f64, f64)) -> Result<Collocation> {
    if n < 5 {
        return invalid(format!("collocation needs at least 5 nodes, got {n}"));
    }
    let (a, b) = domain;
    if !(b > a) {
        return invalid("collocation domain must have positive length");
    }
    kernel.validate()?;
    let tables = match band_limited {
        Some(s) => {
            let bl = BandLimitedKernel::new(*kernel, s, 1, 1024)?;
            Some(BandLimitedTable1d::new(&bl, b - a)?)
        }
        None => None,
    };
    let phi = |r: f64| -> Result<f64> {
        match &tables {
            Some(t) => Ok(t.eval(r)),
            None => Ok(kernel.eval(r)),
        }
    };
    let phi2 = |r: f64| -> Result<f64> {
        match &tables {
            Some(t) => t.second_derivative(r),
            None => kernel.second_derivative_1d(r),
        }
    };
    let nodes: Vec<f64> = (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect();
    let pi2 = PI * PI;
    let mut mat = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    for i in 0..n {
        let boundary = i == 0 || i == n - 1;
        for j in 0..n {
            let r = nodes[i] - nodes[j];
            mat[(i, j)] = if boundary { phi(r)? } else { -phi2(r)? + pi2 * phi(r)? };
        }
        rhs[i] = if boundary { 0.0 } else { 2.0 * pi2 * (PI * nodes[i]).sin() };
    }
    let sv = mat.clone().svd(false, false).singular_values;
    let cond = sv.max() / sv.min();
    let lu = mat.lu();
    let lambda = lu.solve(&rhs).filter(|x| x.iter().all(|v| v.is_finite())).ok_or(Error::Singular(cond))?;
    if !(cond < 1e17) {
        return Err(Error::Singular(cond));
    }
    let lattice: Vec<f64> = (0..COLLOCATION_LATTICE).map(|s| a + (b - a) * s as f64 / (COLLOCATION_LATTICE - 1) as f64).collect();
    let values: Vec<f64> = lattice
        .par_iter()
        .map(|&x| nodes.iter().zip(lambda.iter()).map(|(xj, l)| Ok(l * phi(x - xj)?)).sum::<Result<f64>>())
        .collect::<Result<_>>()?;
    let sq: f64 = lattice.iter().zip(&values).map(|(x, u)| (u - (PI * x).sin()).powi(2)).sum();
    let rms = (sq / lattice.len() as f64).sqrt();
    Ok(Collocation { nodes, lambda: lambda.as_slice().to_vec(), rms, lattice, values })
}

/// How sigma is chosen for the diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SigmaPolicy {
    Pi,
    TwoPiOverQ,
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDiagnostics {
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub cond: f64,
    /// `q^{-1} F(2 pi / q)`.
    pub bound_gamma_min: f64,
    /// `N max |Phi_sigma(x_j - x_k)|`.
    pub bound_gamma_max: f64,
    /// `bound_gamma_max / bound_gamma_min`.
    pub bound_cond: f64,
    /// Smoothness order of the spectral decay, when algebraic (or the
    /// `(d + 1) / 2` proxy for the multiquadrics).
    pub tau: Option<f64>,
    pub sigma: f64,
    pub q: f64,
    pub h: f64,
    pub kappa: f64,
}

impl SpectralDiagnostics {
    pub fn min_bound_holds(&self) -> bool {
        self.gamma_min >= self.bound_gamma_min
    }
    pub fn max_bound_holds(&self) -> bool {
        self.gamma_max <= self.bound_gamma_max
    }
}

pub fn smoothness_order(kernel: &RadialKernel, d: usize) -> Option<f64> {
    match (kernel, kernel.decay(d)) {
        (_, Decay::Algebraic(p)) => Some(p / 2.0),
        (RadialKernel::Multiquadric { .. } | RadialKernel::InverseMultiquadric { .. }, _) => Some((d as f64 + 1.0) / 2.0),
        _ => None,
    }
}

/// Eigenvalue extremes and bounds for `A_sigma` on `ps`.
pub fn spectral_diagnostics(kernel: &RadialKernel, ps: &PointSet, policy: SigmaPolicy) -> Result<SpectralDiagnostics> {
    let n = ps.len();
    if n > EIGEN_CAP {
        return Err(Error::MemoryCap { n, cap: EIGEN_CAP });
    }
    let q = ps.separation_distance()?;
    let sigma = match policy {
        SigmaPolicy::Pi => PI,
        SigmaPolicy::TwoPiOverQ => 2.0 * PI / q,
        SigmaPolicy::Fixed(s) => s,
    };
    let a = assemble_dense(kernel, ps, true, sigma)?;
    let max_entry = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let eig = SymmetricEigen::try_new(a, 1e-14, 10_000).ok_or_else(|| Error::Eigen("symmetric eigensolver did not converge".into()))?;
    let gamma_min = eig.eigenvalues.min();
    let gamma_max = eig.eigenvalues.max();
    let d = ps.dim();
    let bound_gamma_min = kernel.spectrum(2.0 * PI / q, d)? / q;
    let bound_gamma_max = n as f64 * max_entry;
    let h = mesh_norm(ps, 256)?;
    Ok(SpectralDiagnostics {
        gamma_min,
        gamma_max,
        cond: gamma_max / gamma_min,
        bound_gamma_min,
        bound_gamma_max,
        bound_cond: bound_gamma_max / bound_gamma_min,
        tau: smoothness_order(kernel, d),
        sigma,
        q,
        h,
        kappa: sigma * h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fmm::direct_matvec;
    use crate::geometry::{generate_quasiuniform, Domain};

    fn line(xs: &[f64]) -> PointSet {
        PointSet::with_bounding_domain(xs.to_vec(), 1).unwrap()
    }

    #[test]
    fn dense_assembly() {
        let k = RadialKernel::Gaussian { c: 1.0 };
        let a = assemble_dense(&k, &line(&[0.0, 0.7]), false, PI).unwrap();
        assert_eq!(a[(0, 0)], 1.0);
        assert_eq!(a[(1, 0)], a[(0, 1)]);
        assert!((a[(0, 1)] - (-0.49f64).exp()).abs() < 1e-15);
        let ps = generate_quasiuniform(50, Domain::new(&[0.0], &[25.0]).unwrap(), 4, 0.8).unwrap();
        assert!(assemble_dense(&k, &ps, false, PI).unwrap().cholesky().is_some());
        let bl = assemble_dense(&RadialKernel::InverseMultiquadric { c: 1.0 }, &ps, true, PI).unwrap();
        assert!((bl[(3, 3)] - 0.9832504540402708).abs() < 1e-10);
        let big = generate_quasiuniform(DENSE_CAP + 1, Domain::unit(1), 1, 0.0).unwrap();
        assert!(matches!(assemble_dense(&k, &big, false, PI), Err(Error::MemoryCap { .. })));
    }

    fn problem<'a>(kernel: RadialKernel, ps: &'a PointSet, rhs: Vec<f64>) -> InterpolationProblem<'a> {
        InterpolationProblem {
            kernel,
            ps,
            rhs,
            backend: Backend::Dense,
            band_limited: false,
            tol: 1e-12,
            max_iter: 1000,
            fmm: FmmOptions::default(),
        }
    }

    #[test]
    fn recovers_unit_vector_and_residual_contract() {
        let ps = generate_quasiuniform(40, Domain::new(&[0.0], &[40.0]).unwrap(), 2, 0.5).unwrap();
        for k in [RadialKernel::InverseMultiquadric { c: 1.0 }, RadialKernel::Multiquadric { c: 1.0 }] {
            let mut e = vec![0.0; 40];
            e[17] = 1.0;
            let rhs = direct_matvec(&k, &ps, &e, false, PI).unwrap().values;
            let sol = solve_interpolation(&problem(k, &ps, rhs.clone())).unwrap();
            let want = if k.is_positive_definite() { Krylov::Cg } else { Krylov::Gmres };
            assert_eq!(sol.stats.method, want);
            for (i, l) in sol.lambda.iter().enumerate() {
                assert!((l - e[i]).abs() < 1e-8, "{k}: {i} {l}");
            }
            let again = direct_matvec(&k, &ps, &sol.lambda, false, PI).unwrap().values;
            let res = norm(&rhs.iter().zip(&again).map(|(a, b)| a - b).collect::<Vec<_>>()) / norm(&rhs);
            assert!((res - sol.stats.residual).abs() < 1e-12);
            assert!(sol.stats.residual <= 1e-12);
        }
    }

    #[test]
    fn non_convergence_reports_best_residual() {
        let ps = generate_quasiuniform(60, Domain::new(&[0.0], &[30.0]).unwrap(), 3, 0.5).unwrap();
        let mut p = problem(RadialKernel::InverseMultiquadric { c: 1.0 }, &ps, vec![1.0; 60]);
        p.max_iter = 2;
        match solve_interpolation(&p) {
            Err(Error::NonConvergence { iterations, residual }) => {
                assert_eq!(iterations, 2);
                assert!(residual > 0.0 && residual < 1.0);
            }
            other => panic!("{other:?}"),
        }
        p.kernel = RadialKernel::Multiquadric { c: 1.0 };
        assert!(matches!(solve_interpolation(&p), Err(Error::NonConvergence { .. })));
        p.tol = 0.0;
        assert!(solve_interpolation(&p).is_err());
    }

    #[test]
    fn interpolation_error_decreases_with_n() {
        let k = RadialKernel::Wendland { eps: 8.0, form: crate::kernels::WendlandForm::C2 };
        let mut prev = f64::INFINITY;
        for n in [25, 50, 100, 200] {
            let ps = generate_quasiuniform(n, Domain::unit(1), 7, 0.3).unwrap();
            let rhs: Vec<f64> = ps.iter().map(|x| (PI * x[0]).sin()).collect();
            let sol = solve_interpolation(&problem(k, &ps, rhs)).unwrap();
            let sq: f64 = (0..997)
                .map(|s| {
                    let x = (s as f64 + 0.5) / 997.0;
                    let u: f64 = ps.iter().zip(&sol.lambda).map(|(p, l)| l * k.eval(x - p[0])).sum();
                    (u - (PI * x).sin()).powi(2)
                })
                .sum();
            let rms = (sq / 997.0).sqrt();
            assert!(rms < prev, "n={n}: {rms} !< {prev}");
            prev = rms;
        }
    }

    #[test]
    fn collocation_matches_table() {
        let mq = RadialKernel::Multiquadric { c: 1.0 };
        let reference = [1.469348643e-04, 9.414500417e-05, 2.806645307e-05, 1.823679202e-05, 5.348123608e-06, 3.512156051e-06, 1.007928224e-06];
        let mut prev = f64::INFINITY;
        for (n, want) in (9..=15).zip(reference) {
            let c = solve_collocation_1d(n, &mq, None, (0.0, 1.0)).unwrap();
            // Boundary rows hold to the rounding scale of the cancelling sum.
            let scale: f64 = c.lambda.iter().map(|l| l.abs() * 2f64.sqrt()).sum();
            assert!(c.values[0].abs() < 1e-13 * scale.max(1.0));
            assert!(c.values.last().unwrap().abs() < 1e-13 * scale.max(1.0));
            assert!(c.rms < prev && (c.rms / want).max(want / c.rms) < 10.0, "n={n} {}", c.rms);
            prev = c.rms;
        }
        assert!(solve_collocation_1d(4, &mq, None, (0.0, 1.0)).is_err());
    }

    #[test]
    fn band_limited_collocation_tracks_plain() {
        let mq = RadialKernel::Multiquadric { c: 1.0 };
        for n in [9, 12] {
            let q = 0.5 / (n - 1) as f64;
            let plain = solve_collocation_1d(n, &mq, None, (0.0, 1.0)).unwrap().rms;
            let bl = solve_collocation_1d(n, &mq, Some(2.0 * PI / q), (0.0, 1.0)).unwrap().rms;
            assert!((bl - plain).abs() < 1e-3 * plain);
        }
    }

    #[test]
    fn minimum_eigenvalue_bound_three_points() {
        let q = 0.5;
        let ps = line(&[0.0, 2.0 * q, 4.0 * q]);
        let k = RadialKernel::InverseMultiquadric { c: 1.0 };
        let dg = spectral_diagnostics(&k, &ps, SigmaPolicy::TwoPiOverQ).unwrap();
        assert!((dg.q - q).abs() < 1e-15);
        assert!(dg.min_bound_holds() && dg.max_bound_holds());
        assert!((dg.cond - dg.gamma_max / dg.gamma_min).abs() < 1e-9 * dg.cond);
        assert!((dg.kappa - dg.sigma * dg.h).abs() < 1e-12);
        assert_eq!(dg.tau, Some(1.0));
        assert_eq!(smoothness_order(&RadialKernel::Gaussian { c: 1.0 }, 1), None);
    }

    #[test]
    fn condition_grows_with_density() {
        // IMQ: spacings 4, 2, 1; the log-log slope stays under 2 tau (1 + 0.3).
        let k = RadialKernel::InverseMultiquadric { c: 1.0 };
        let conds: Vec<(f64, f64)> = [4.0, 2.0, 1.0]
            .iter()
            .map(|&h: &f64| {
                let xs: Vec<f64> = (0..24).map(|i| i as f64 * h).collect();
                let dg = spectral_diagnostics(&k, &line(&xs), SigmaPolicy::Pi).unwrap();
                (dg.q, dg.cond)
            })
            .collect();
        assert!(conds[1].1 > conds[0].1 && conds[2].1 > conds[1].1);
        let slope = (conds[2].1 / conds[0].1).ln() / (conds[0].0 / conds[2].0).ln();
        assert!(slope <= 2.0 * 1.0 * 1.3, "{slope}");
    }

    #[test]
    fn backend_parsing() {
        for b in [Backend::Dense, Backend::SingleFmm, Backend::Mlfmm] {
            assert_eq!(b.to_string().parse::<Backend>().unwrap(), b);
        }
        assert!("gpu".parse::<Backend>().is_err());
    }
}
