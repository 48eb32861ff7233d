//! Direct summation oracle and the single-level frequency-domain FMM.
//!
//! The far field between well-separated leaf boxes `a` and `b` is
//! `Re sum_m e^{i xi_m.(x_i - x_a)} [w_m C_m e^{i xi_m.(x_a - x_b)}]
//! [sum_j lambda_j e^{i xi_m.(x_b - x_j)}]`: aggregation, translation and
//! disaggregation.

use crate::bandlimit::{
    make_quadrature, translation_coefficients, BandLimitedKernel, ChebyshevTable, CoefficientMode,
    LowRankFactors, QuadratureGrid,
};
use crate::error::{invalid, Error, Result};
use crate::geometry::{BoxTree, PointSet};
use crate::kernels::{RadialKernel, WendlandForm};
use num_complex::Complex64;
use rayon::prelude::*;

/// Kernel used for neighbour-box interactions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum NearField {
    /// The original kernel: the fast sum approximates the true matrix.
    #[default]
    Original,
    /// The band-limited kernel: the fast sum approximates `A_sigma`.
    BandLimited,
}

/// One kernel summation `u_i = sum_j lambda_j Phi(x_i - x_j)`.
#[derive(Clone, Copy, Debug)]
pub struct SumRequest<'a> {
    pub kernel: RadialKernel,
    pub sigma: f64,
    pub points: &'a PointSet,
    pub weights: &'a [f64],
    pub m_per_dim: usize,
    pub near_field: NearField,
}

impl SumRequest<'_> {
    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if self.weights.len() != self.points.len() {
            return invalid(format!(
                "{} weights for {} points",
                self.weights.len(),
                self.points.len()
            ));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return invalid(format!("sigma must be positive, got {}", self.sigma));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SumStats {
    /// Kernel evaluations in the near field.
    pub near_pairs: u64,
    /// Complex multiply-adds in the far field.
    pub far_work: u64,
    /// Largest discarded imaginary part.
    pub max_imag_residual: f64,
}

#[derive(Clone, Debug)]
pub struct SumResult {
    pub values: Vec<f64>,
    pub stats: SumStats,
}

/// Pairwise kernel with a fast path per kernel family.
#[derive(Clone, Debug)]
pub(crate) enum PairKernel {
    Original(RadialKernel),
    Table(ChebyshevTable),
    Reference(BandLimitedKernel),
}

impl PairKernel {
    /// Band-limited pair kernel valid for displacements up to `r_max`.
    pub(crate) fn band_limited(kernel: RadialKernel, sigma: f64, d: usize, r_max: f64) -> Result<Self> {
        let bl = BandLimitedKernel::new(kernel, sigma, d, 1024)?;
        if d == 1 {
            match ChebyshevTable::new(&bl, r_max) {
                Ok(t) => return Ok(PairKernel::Table(t)),
                Err(Error::Unsupported(_)) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(PairKernel::Reference(bl))
    }

    pub(crate) fn new(
        kernel: RadialKernel,
        near: NearField,
        sigma: f64,
        d: usize,
        r_max: f64,
    ) -> Result<Self> {
        match near {
            NearField::Original => Ok(PairKernel::Original(kernel)),
            NearField::BandLimited => PairKernel::band_limited(kernel, sigma, d, r_max),
        }
    }

    pub(crate) fn eval(&self, r: &[f64]) -> f64 {
        match self {
            PairKernel::Original(k) => k.eval_vec(r),
            PairKernel::Table(t) => t.eval(r[0]),
            PairKernel::Reference(b) => b.eval(r).unwrap_or(f64::NAN),
        }
    }

    /// `sum_j w_j Phi(x - x_j)` over flat coordinates `xs`.
    pub(crate) fn sum_row(&self, x: &[f64], xs: &[f64], ws: &[f64]) -> f64 {
        let d = x.len();
        let r2 = |j: usize| -> f64 {
            let p = &xs[j * d..(j + 1) * d];
            if d == 1 {
                (x[0] - p[0]) * (x[0] - p[0])
            } else {
                (x[0] - p[0]).powi(2) + (x[1] - p[1]).powi(2)
            }
        };
        let n = ws.len();
        macro_rules! sum_with {
            ($f:expr) => {{
                let f = $f;
                let mut s = 0.0;
                for j in 0..n {
                    s += ws[j] * f(r2(j));
                }
                s
            }};
        }
        match self {
            PairKernel::Original(k) => match *k {
                RadialKernel::InverseMultiquadric { c } => {
                    let c2 = c * c;
                    sum_with!(|q: f64| 1.0 / (q + c2).sqrt())
                }
                RadialKernel::Multiquadric { c } => {
                    let c2 = c * c;
                    sum_with!(|q: f64| (q + c2).sqrt())
                }
                RadialKernel::Gaussian { c } => sum_with!(|q: f64| (-c * q).exp()),
                RadialKernel::Wendland { eps, form: WendlandForm::Cubic } => sum_with!(|q: f64| {
                    let s = eps * q.sqrt();
                    if s >= 1.0 {
                        0.0
                    } else {
                        (1.0 - s).powi(3) * (3.0 * s + 1.0)
                    }
                }),
                _ => sum_with!(|q: f64| k.eval(q.sqrt())),
            },
            PairKernel::Table(t) => sum_with!(|q: f64| t.eval(q.sqrt())),
            PairKernel::Reference(_) => {
                let mut s = 0.0;
                let mut r = [0.0; 2];
                for j in 0..n {
                    for a in 0..d {
                        r[a] = x[a] - xs[j * d + a];
                    }
                    s += ws[j] * self.eval(&r[..d]);
                }
                s
            }
        }
    }
}

/// Largest pairwise displacement the domain admits.
pub(crate) fn domain_span(ps: &PointSet) -> f64 {
    ps.domain().diameter() * (1.0 + 1e-12)
}

/// Dense `O(N^2)` evaluation of `sum_j lambda_j Phi(x_i - x_j)`, or of
/// `Phi_sigma` when `use_bandlimited` is set.
pub fn direct_matvec(
    kernel: &RadialKernel,
    ps: &PointSet,
    weights: &[f64],
    use_bandlimited: bool,
    sigma: f64,
) -> Result<SumResult> {
    kernel.validate()?;
    if weights.len() != ps.len() {
        return invalid(format!("{} weights for {} points", weights.len(), ps.len()));
    }
    let near = if use_bandlimited { NearField::BandLimited } else { NearField::Original };
    let pk = PairKernel::new(*kernel, near, sigma, ps.dim(), domain_span(ps))?;
    let values: Vec<f64> = (0..ps.len())
        .into_par_iter()
        .map(|i| pk.sum_row(ps.point(i), ps.coords(), weights))
        .collect();
    let n = ps.len() as u64;
    Ok(SumResult { values, stats: SumStats { near_pairs: n * n, far_work: 0, max_imag_residual: 0.0 } })
}

/// `M = ceil(sqrt(n))`, rounded up to an even number.
pub fn choose_truncation(n: usize) -> usize {
    let m = (n as f64).sqrt().ceil() as usize;
    let m = m.max(2);
    m + (m % 2)
}

/// Leaf level giving roughly `sqrt(N)` points per leaf.
pub fn single_level_leaf(n: usize, d: usize) -> usize {
    let boxes = (n as f64).sqrt().max(1.0);
    ((boxes.log2() / d as f64).round() as usize).max(2)
}

/// `e^{i xi.r}` for every node, `scale`d, accumulated into `acc`.
pub(crate) fn accumulate_phases(grid: &QuadratureGrid, r: &[f64], scale: f64, acc: &mut [Complex64], buf: &mut Vec<Complex64>) {
    let nodes = grid.nodes_1d();
    let m = nodes.len();
    if r.len() == 1 {
        for (a, &xi) in acc.iter_mut().zip(nodes) {
            let (s, c) = (xi * r[0]).sin_cos();
            *a += Complex64::new(scale * c, scale * s);
        }
    } else {
        buf.clear();
        buf.extend(nodes.iter().map(|&xi| Complex64::from_polar(1.0, xi * r[1])));
        for (i1, &xi) in nodes.iter().enumerate() {
            let ex = Complex64::from_polar(scale, xi * r[0]);
            for (a, ey) in acc[i1 * m..(i1 + 1) * m].iter_mut().zip(buf.iter()) {
                *a += ex * ey;
            }
        }
    }
}

/// `sum_m e^{i xi_m.r} coeffs[m]`.
pub(crate) fn contract_phases(grid: &QuadratureGrid, r: &[f64], coeffs: &[Complex64], buf: &mut Vec<Complex64>) -> Complex64 {
    let nodes = grid.nodes_1d();
    let m = nodes.len();
    if r.len() == 1 {
        let mut s = Complex64::new(0.0, 0.0);
        for (c, &xi) in coeffs.iter().zip(nodes) {
            let (sn, cs) = (xi * r[0]).sin_cos();
            s += Complex64::new(cs, sn) * c;
        }
        s
    } else {
        buf.clear();
        buf.extend(nodes.iter().map(|&xi| Complex64::from_polar(1.0, xi * r[1])));
        let mut s = Complex64::new(0.0, 0.0);
        for (i1, &xi) in nodes.iter().enumerate() {
            let row: Complex64 =
                coeffs[i1 * m..(i1 + 1) * m].iter().zip(buf.iter()).map(|(c, e)| c * e).sum();
            s += Complex64::from_polar(1.0, xi * r[0]) * row;
        }
        s
    }
}

/// Per-axis tables `e^{i xi_m k h}` for integer box offsets `k` in `-(p-1)..=(p-1)`.
pub(crate) fn offset_phase_tables(grid: &QuadratureGrid, per_axis: usize, side: f64) -> Vec<Vec<Complex64>> {
    let span = 2 * per_axis - 1;
    (0..span)
        .map(|t| {
            let k = t as f64 - (per_axis as f64 - 1.0);
            grid.nodes_1d().iter().map(|&xi| Complex64::from_polar(1.0, xi * k * side)).collect()
        })
        .collect()
}

pub(crate) fn box_coords(code: usize, d: usize) -> (isize, isize) {
    if d == 1 {
        return (code as isize, 0);
    }
    let (mut ix, mut iy) = (0usize, 0usize);
    for bit in 0..(usize::BITS / 2) {
        ix |= ((code >> (2 * bit + 1)) & 1) << bit;
        iy |= ((code >> (2 * bit)) & 1) << bit;
    }
    (ix as isize, iy as isize)
}

/// Near-field sum over neighbour boxes at the leaf level, in tree order.
pub(crate) fn near_field(tree: &BoxTree, ps: &PointSet, sorted_coords: &[f64], sorted_weights: &[f64], pk: &PairKernel) -> (Vec<f64>, u64) {
    let d = ps.dim();
    let leaves = &tree.leaves().boxes;
    let order = tree.order();
    let per_box: Vec<(Vec<f64>, u64)> = leaves
        .par_iter()
        .map(|a| {
            if a.is_empty() {
                return (Vec::new(), 0);
            }
            let mut out = vec![0.0; a.points.len()];
            let mut pairs = 0u64;
            for &nb in &a.neighbors {
                let b = &leaves[nb];
                if b.is_empty() {
                    continue;
                }
                let xs = &sorted_coords[b.points.start * d..b.points.end * d];
                let ws = &sorted_weights[b.points.clone()];
                for (o, i) in out.iter_mut().zip(a.points.clone()) {
                    *o += pk.sum_row(ps.point(order[i]), xs, ws);
                }
                pairs += (a.points.len() * b.points.len()) as u64;
            }
            (out, pairs)
        })
        .collect();
    let mut values = vec![0.0; ps.len()];
    let mut pairs = 0;
    for (a, (vals, p)) in leaves.iter().zip(per_box) {
        pairs += p;
        for (i, v) in a.points.clone().zip(vals) {
            values[order[i]] = v;
        }
    }
    (values, pairs)
}

pub(crate) fn sorted_inputs(tree: &BoxTree, ps: &PointSet, weights: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let d = ps.dim();
    let mut coords = Vec::with_capacity(ps.len() * d);
    let mut ws = Vec::with_capacity(ps.len());
    for &i in tree.order() {
        coords.extend_from_slice(ps.point(i));
        ws.push(weights[i]);
    }
    (coords, ws)
}

/// Precomputed single-level FMM operator for one point set.
#[derive(Clone, Debug)]
pub struct SingleLevelFmm<'t> {
    tree: &'t BoxTree,
    ps: &'t PointSet,
    factors: LowRankFactors,
    /// `w_m C_m` per node.
    wc: Vec<Complex64>,
    phase: [Vec<Vec<Complex64>>; 2],
    pair_kernel: PairKernel,
}

impl<'t> SingleLevelFmm<'t> {
    pub fn new(
        kernel: RadialKernel,
        sigma: f64,
        m_per_dim: usize,
        near: NearField,
        ps: &'t PointSet,
        tree: &'t BoxTree,
    ) -> Result<Self> {
        if tree.dim() != ps.dim() || tree.order().len() != ps.len() {
            return Err(Error::Config("tree was not built over this point set".into()));
        }
        let d = ps.dim();
        let grid = make_quadrature(sigma, m_per_dim, d)?;
        let factors = translation_coefficients(&kernel, &grid, CoefficientMode::Spectral, None)
            .map_err(|e| Error::Config(format!("translation factors unavailable: {e}")))?;
        Self::with_factors(factors, near, ps, tree)
    }

    pub fn with_factors(factors: LowRankFactors, near: NearField, ps: &'t PointSet, tree: &'t BoxTree) -> Result<Self> {
        let d = ps.dim();
        if factors.grid.dim() != d {
            return Err(Error::Config("factor grid dimension differs from the points".into()));
        }
        let grid = &factors.grid;
        let wc: Vec<Complex64> = (0..grid.len()).map(|m| factors.c_vals[m] * grid.weight(m)).collect();
        let lv = tree.leaves();
        let phase = [
            offset_phase_tables(grid, lv.per_axis, lv.side[0]),
            if d == 2 { offset_phase_tables(grid, lv.per_axis, lv.side[1]) } else { Vec::new() },
        ];
        let pair_kernel = PairKernel::new(factors.kernel, near, grid.sigma(), d, domain_span(ps))?;
        Ok(SingleLevelFmm { tree, ps, factors, wc, phase, pair_kernel })
    }

    pub fn factors(&self) -> &LowRankFactors {
        &self.factors
    }

    pub fn tree(&self) -> &BoxTree {
        self.tree
    }

    /// Leaf multipole expansions `V_b(xi_m) = sum_j lambda_j e^{i xi_m.(x_b - x_j)}`.
    pub fn aggregate(&self, weights: &[f64]) -> Vec<Vec<Complex64>> {
        let grid = &self.factors.grid;
        let d = self.ps.dim();
        self.tree
            .leaves()
            .boxes
            .par_iter()
            .enumerate()
            .map(|(b, bx)| {
                if bx.is_empty() {
                    return Vec::new();
                }
                let mut v = vec![Complex64::new(0.0, 0.0); grid.len()];
                let mut buf = Vec::new();
                let mut r = [0.0; 2];
                for &j in self.tree.points_in(self.tree.leaf_level(), b) {
                    let x = self.ps.point(j);
                    for a in 0..d {
                        r[a] = bx.center[a] - x[a];
                    }
                    accumulate_phases(grid, &r[..d], weights[j], &mut v, &mut buf);
                }
                v
            })
            .collect()
    }

    /// Local expansions `L_a = sum_{b far} w C e^{i xi.(x_a - x_b)} V_b`.
    pub fn translate(&self, multipoles: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        let d = self.ps.dim();
        let lv = self.tree.leaves();
        let p = lv.per_axis as isize;
        let mlen = self.factors.grid.len();
        let m1 = self.factors.grid.m_per_dim();
        let nonempty: Vec<usize> = (0..lv.boxes.len()).filter(|&b| !lv.boxes[b].is_empty()).collect();
        lv.boxes
            .par_iter()
            .enumerate()
            .map(|(a, bx)| {
                if bx.is_empty() {
                    return Vec::new();
                }
                let (ax, ay) = box_coords(a, d);
                let mut l = vec![Complex64::new(0.0, 0.0); mlen];
                for &b in &nonempty {
                    let (bxi, byi) = box_coords(b, d);
                    let (kx, ky) = (ax - bxi, ay - byi);
                    if kx.abs() <= 1 && ky.abs() <= 1 {
                        continue;
                    }
                    let v = &multipoles[b];
                    let ex = &self.phase[0][(kx + p - 1) as usize];
                    if d == 1 {
                        for m in 0..mlen {
                            l[m] += self.wc[m] * ex[m] * v[m];
                        }
                    } else {
                        let ey = &self.phase[1][(ky + p - 1) as usize];
                        for i1 in 0..m1 {
                            let row = i1 * m1;
                            for i2 in 0..m1 {
                                let m = row + i2;
                                l[m] += self.wc[m] * (ex[i1] * ey[i2]) * v[m];
                            }
                        }
                    }
                }
                l
            })
            .collect()
    }

    /// Far-field values at every point, with the largest imaginary residual.
    pub fn disaggregate(&self, locals: &[Vec<Complex64>]) -> (Vec<f64>, f64) {
        let grid = &self.factors.grid;
        let d = self.ps.dim();
        let leaf = self.tree.leaf_level();
        let per_box: Vec<Vec<(usize, Complex64)>> = self
            .tree
            .leaves()
            .boxes
            .par_iter()
            .enumerate()
            .map(|(a, bx)| {
                if bx.is_empty() {
                    return Vec::new();
                }
                let mut buf = Vec::new();
                let mut r = [0.0; 2];
                self.tree
                    .points_in(leaf, a)
                    .iter()
                    .map(|&i| {
                        let x = self.ps.point(i);
                        for k in 0..d {
                            r[k] = x[k] - bx.center[k];
                        }
                        (i, contract_phases(grid, &r[..d], &locals[a], &mut buf))
                    })
                    .collect()
            })
            .collect();
        let mut out = vec![0.0; self.ps.len()];
        let mut imag: f64 = 0.0;
        for (i, z) in per_box.into_iter().flatten() {
            out[i] = z.re;
            imag = imag.max(z.im.abs());
        }
        (out, imag)
    }

    pub fn apply(&self, weights: &[f64]) -> Result<SumResult> {
        if weights.len() != self.ps.len() {
            return invalid(format!("{} weights for {} points", weights.len(), self.ps.len()));
        }
        let (sc, sw) = sorted_inputs(self.tree, self.ps, weights);
        let (mut values, near_pairs) = near_field(self.tree, self.ps, &sc, &sw, &self.pair_kernel);
        let v = self.aggregate(weights);
        let l = self.translate(&v);
        let (far, imag) = self.disaggregate(&l);
        for (u, f) in values.iter_mut().zip(&far) {
            *u += f;
        }
        let grid_len = self.factors.grid.len() as u64;
        let lv = self.tree.leaves();
        let nonempty: Vec<(isize, isize)> = (0..lv.boxes.len())
            .filter(|&b| !lv.boxes[b].is_empty())
            .map(|b| box_coords(b, self.ps.dim()))
            .collect();
        let far_pairs = nonempty
            .iter()
            .map(|a| nonempty.iter().filter(|b| (a.0 - b.0).abs() > 1 || (a.1 - b.1).abs() > 1).count() as u64)
            .sum::<u64>();
        let n = self.ps.len() as u64;
        Ok(SumResult {
            values,
            stats: SumStats {
                near_pairs,
                far_work: grid_len * (2 * n + far_pairs),
                max_imag_residual: imag,
            },
        })
    }
}

/// Single-level FMM sum over the leaves of `tree`.
pub fn fmm_matvec_single(req: &SumRequest, tree: &BoxTree) -> Result<SumResult> {
    req.validate()?;
    SingleLevelFmm::new(req.kernel, req.sigma, req.m_per_dim, req.near_field, req.points, tree)?
        .apply(req.weights)
}

/// Reference for the fast sum that evaluates every far pair with the
/// separated form directly (`O(N^2 M^d)`); small problems only.
pub fn lowrank_oracle(
    factors: &LowRankFactors,
    near: NearField,
    ps: &PointSet,
    tree: &BoxTree,
    weights: &[f64],
) -> Result<Vec<f64>> {
    let pk = PairKernel::new(factors.kernel, near, factors.grid.sigma(), ps.dim(), domain_span(ps))?;
    let leaves = &tree.leaves().boxes;
    Ok((0..ps.len())
        .into_par_iter()
        .map(|i| {
            let a = tree.leaf_of(i);
            let xi = ps.point(i);
            (0..ps.len())
                .map(|j| {
                    let b = tree.leaf_of(j);
                    let xj = ps.point(j);
                    if leaves[a].neighbors.contains(&b) {
                        let r: Vec<f64> = xi.iter().zip(xj).map(|(p, q)| p - q).collect();
                        weights[j] * pk.eval(&r)
                    } else {
                        weights[j] * crate::bandlimit::lowrank_eval(factors, xi, xj)
                    }
                })
                .sum()
        })
        .collect())
}

/// `near kernel` for neighbour pairs plus band-limited `Phi_sigma` for all
/// other pairs: the value the single-level FMM converges to as `M` grows.
pub fn hybrid_oracle(
    kernel: &RadialKernel,
    sigma: f64,
    near: NearField,
    ps: &PointSet,
    tree: &BoxTree,
    weights: &[f64],
) -> Result<Vec<f64>> {
    let span = domain_span(ps);
    let near_k = PairKernel::new(*kernel, near, sigma, ps.dim(), span)?;
    let far_k = PairKernel::band_limited(*kernel, sigma, ps.dim(), span)?;
    let leaves = &tree.leaves().boxes;
    Ok((0..ps.len())
        .into_par_iter()
        .map(|i| {
            let a = tree.leaf_of(i);
            let xi = ps.point(i);
            (0..ps.len())
                .map(|j| {
                    let xj = ps.point(j);
                    let r: Vec<f64> = xi.iter().zip(xj).map(|(p, q)| p - q).collect();
                    let k = if leaves[a].neighbors.contains(&tree.leaf_of(j)) { &near_k } else { &far_k };
                    weights[j] * k.eval(&r)
                })
                .sum()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_tree, generate_quasiuniform, Domain};

    #[test]
    fn truncation_rule() {
        assert_eq!(choose_truncation(100), 10);
        assert_eq!(choose_truncation(101), 12);
        assert_eq!(choose_truncation(4), 2);
    }

    #[test]
    fn direct_hand_fixture() {
        let ps = PointSet::new(vec![0.0, 0.5, 2.0], Domain::new(&[0.0], &[2.0]).unwrap()).unwrap();
        let k = RadialKernel::Gaussian { c: 1.0 };
        let r = direct_matvec(&k, &ps, &[1.0, 2.0, -1.0], false, 1.0).unwrap();
        let want = 1.0 + 2.0 * (-0.25f64).exp() - (-4.0f64).exp();
        assert!((r.values[0] - want).abs() < 1e-15);
        let z = direct_matvec(&k, &ps, &[0.0; 3], false, 1.0).unwrap();
        assert!(z.values.iter().all(|&v| v == 0.0));
        let e = direct_matvec(&k, &ps, &[0.0, 1.0, 0.0], false, 1.0).unwrap();
        for i in 0..3 {
            assert_eq!(e.values[i], k.eval((ps.point(i)[0] - 0.5).abs()));
        }
    }

    #[test]
    fn pure_near_field_is_exact() {
        let ps = PointSet::new(vec![0.01, 0.02], Domain::unit(1)).unwrap();
        let tree = build_tree(&ps, 3).unwrap();
        let k = RadialKernel::InverseMultiquadric { c: 1.0 };
        let req = SumRequest { kernel: k, sigma: std::f64::consts::PI, points: &ps, weights: &[1.0, -2.0], m_per_dim: 16, near_field: NearField::Original };
        let a = fmm_matvec_single(&req, &tree).unwrap();
        let b = direct_matvec(&k, &ps, &[1.0, -2.0], false, 1.0).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn matches_lowrank_oracle_2d() {
        let ps = generate_quasiuniform(200, Domain::unit(2), 3, 0.5).unwrap();
        let tree = build_tree(&ps, 3).unwrap();
        let k = RadialKernel::Gaussian { c: 2.0 };
        let w: Vec<f64> = (0..ps.len()).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
        let fmm = SingleLevelFmm::new(k, 8.0, 12, NearField::Original, &ps, &tree).unwrap();
        let got = fmm.apply(&w).unwrap();
        let want = lowrank_oracle(fmm.factors(), NearField::Original, &ps, &tree, &w).unwrap();
        let scale = want.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        for (g, w) in got.values.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12 * scale);
        }
    }
}
