//! Multilevel FMM: P2M/M2M upward with Lagrange interpolation between level
//! grids, diagonal coupling over interaction lists, L2L/L2P downward with the
//! transposed interpolation (anterpolation).

use crate::bandlimit::{make_quadrature, translation_coefficients, CoefficientMode, LowRankFactors, QuadratureGrid};
use crate::error::{invalid, Error, Result};
use crate::fmm::{accumulate_phases, contract_phases, domain_span, near_field, sorted_inputs, NearField, PairKernel, SumRequest, SumResult, SumStats};
use crate::geometry::{BoxTree, PointSet};
use crate::kernels::RadialKernel;
use num_complex::Complex64;
use rayon::prelude::*;

/// Coarsest level that carries expansions.
pub const TOP_LEVEL: usize = 2;

/// Published interpolation error of the default 10-point stencil.
pub const TABLE_K10: f64 = 1.3111e-5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpansionKind {
    Multipole,
    Local,
}

/// Coefficients of one box on its level's grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Expansion {
    pub level: usize,
    pub box_id: usize,
    pub kind: ExpansionKind,
    pub coeffs: Vec<Complex64>,
}

/// Expansions for every level from [`TOP_LEVEL`] to the leaves.
#[derive(Clone, Debug)]
pub struct ExpansionSet {
    pub kind: ExpansionKind,
    /// `levels[l - TOP_LEVEL][box]`; boxes without points hold zeros.
    pub levels: Vec<Vec<Vec<Complex64>>>,
}

impl ExpansionSet {
    fn zeros(kind: ExpansionKind, tree: &BoxTree, grids: &LevelGrids) -> Self {
        let levels = (TOP_LEVEL..=tree.leaf_level())
            .map(|l| {
                let n = grids.level(l).factors.grid.len();
                vec![vec![Complex64::new(0.0, 0.0); n]; tree.level(l).boxes.len()]
            })
            .collect();
        ExpansionSet { kind, levels }
    }

    pub fn coeffs(&self, level: usize, b: usize) -> &[Complex64] {
        &self.levels[level - TOP_LEVEL][b]
    }

    pub fn get(&self, level: usize, b: usize) -> Expansion {
        Expansion { level, box_id: b, kind: self.kind, coeffs: self.coeffs(level, b).to_vec() }
    }
}

/// Sparse interpolation matrix: row `t` holds weights for source nodes
/// `start_t .. start_t + len`.
#[derive(Clone, Debug, PartialEq)]
pub struct InterpMatrix {
    n_src: usize,
    rows: Vec<(usize, Vec<f64>)>,
}

impl InterpMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }
    pub fn n_cols(&self) -> usize {
        self.n_src
    }
    pub fn row(&self, t: usize) -> (usize, &[f64]) {
        (self.rows[t].0, &self.rows[t].1)
    }
    pub fn max_row_nnz(&self) -> usize {
        self.rows.iter().map(|r| r.1.len()).max().unwrap_or(0)
    }

    pub fn apply<T>(&self, u: &[T]) -> Vec<T>
    where
        T: Copy + Default + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
    {
        self.rows
            .iter()
            .map(|(s, w)| w.iter().zip(&u[*s..]).fold(T::default(), |acc, (wk, uk)| acc + *uk * *wk))
            .collect()
    }

    pub fn apply_transpose<T>(&self, v: &[T]) -> Vec<T>
    where
        T: Copy + Default + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
    {
        let mut out = vec![T::default(); self.n_src];
        for ((s, w), vt) in self.rows.iter().zip(v) {
            for (k, wk) in w.iter().enumerate() {
                out[s + k] = out[s + k] + *vt * *wk;
            }
        }
        out
    }

    /// `(P x P) u` for `u` laid out row-major on an `n_cols x n_cols` grid;
    /// plain `P u` when `d = 1`.
    pub fn apply_tensor(&self, u: &[Complex64], d: usize) -> Vec<Complex64> {
        if d == 1 {
            return self.apply(u);
        }
        let (ns, nt) = (self.n_src, self.rows.len());
        let mut tmp = vec![Complex64::default(); ns * nt];
        for i1 in 0..ns {
            let r = self.apply(&u[i1 * ns..(i1 + 1) * ns]);
            tmp[i1 * nt..(i1 + 1) * nt].copy_from_slice(&r);
        }
        let mut out = vec![Complex64::default(); nt * nt];
        for (t1, (s, w)) in self.rows.iter().enumerate() {
            for (k, wk) in w.iter().enumerate() {
                let src = &tmp[(s + k) * nt..(s + k + 1) * nt];
                for (o, x) in out[t1 * nt..(t1 + 1) * nt].iter_mut().zip(src) {
                    *o += x * *wk;
                }
            }
        }
        out
    }

    /// `(P x P)^T v`, the adjoint of [`InterpMatrix::apply_tensor`].
    pub fn apply_tensor_transpose(&self, v: &[Complex64], d: usize) -> Vec<Complex64> {
        if d == 1 {
            return self.apply_transpose(v);
        }
        let (ns, nt) = (self.n_src, self.rows.len());
        let mut tmp = vec![Complex64::default(); ns * nt];
        for (t1, (s, w)) in self.rows.iter().enumerate() {
            for (k, wk) in w.iter().enumerate() {
                let dst = &mut tmp[(s + k) * nt..(s + k + 1) * nt];
                for (o, x) in dst.iter_mut().zip(&v[t1 * nt..(t1 + 1) * nt]) {
                    *o += x * *wk;
                }
            }
        }
        let mut out = vec![Complex64::default(); ns * ns];
        for i1 in 0..ns {
            let r = self.apply_transpose(&tmp[i1 * nt..(i1 + 1) * nt]);
            out[i1 * ns..(i1 + 1) * ns].copy_from_slice(&r);
        }
        out
    }
}

/// Local Lagrange interpolation from `source` nodes to `targets` using the
/// `k` source nodes nearest each target.
pub fn lagrange_matrix(source: &[f64], targets: &[f64], k: usize) -> Result<InterpMatrix> {
    let n = source.len();
    if k == 0 || k > n {
        return invalid(format!("stencil size {k} must lie in 1..={n}"));
    }
    if source.windows(2).any(|w| !(w[1] > w[0])) {
        return invalid("source nodes must be strictly increasing (no coincident nodes)");
    }
    let scale = source[n - 1].abs().max(source[0].abs()).max(1e-300);
    let rows = targets
        .iter()
        .map(|&t| {
            // Index of the first node > t.
            let upper = source.partition_point(|&x| x <= t);
            for cand in [upper.saturating_sub(1), upper.min(n - 1)] {
                if (source[cand] - t).abs() <= 1e-13 * scale {
                    return (cand, vec![1.0]);
                }
            }
            let start = (upper as isize - (k / 2) as isize).clamp(0, (n - k) as isize) as usize;
            let nodes = &source[start..start + k];
            let w = (0..k)
                .map(|a| {
                    (0..k).filter(|&b| b != a).map(|b| (t - nodes[b]) / (nodes[a] - nodes[b])).product()
                })
                .collect();
            (start, w)
        })
        .collect();
    Ok(InterpMatrix { n_src: n, rows })
}

/// How level grids relate across the tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LevelMode {
    /// Equal `M` per level with `sigma` halving toward the root.
    Scaled,
    /// Same band at every level; each coarser level has `growth` times as
    /// many nodes per dimension.
    FixedBand { growth: usize },
}

impl Default for LevelMode {
    fn default() -> Self {
        LevelMode::FixedBand { growth: 2 }
    }
}

#[derive(Clone, Debug)]
pub struct LevelGrid {
    pub level: usize,
    pub factors: LowRankFactors,
    /// Interpolation from this level's grid to the parent level's grid.
    pub to_parent: Option<InterpMatrix>,
}

/// Grids, translation spectra and interpolation operators for levels
/// [`TOP_LEVEL`]`..=leaf_level`.
#[derive(Clone, Debug)]
pub struct LevelGrids {
    pub leaf_level: usize,
    pub mode: LevelMode,
    pub stencil: usize,
    levels: Vec<LevelGrid>,
}

impl LevelGrids {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        kernel: &RadialKernel,
        sigma: f64,
        m_leaf: usize,
        d: usize,
        leaf_level: usize,
        mode: LevelMode,
        stencil: usize,
    ) -> Result<Self> {
        if leaf_level < TOP_LEVEL + 1 {
            return Err(Error::LevelUnderflow { leaf_level, needed: TOP_LEVEL + 1 });
        }
        if let LevelMode::FixedBand { growth } = mode {
            if growth == 0 {
                return invalid("grid growth must be at least 1");
            }
        }
        let grids: Vec<QuadratureGrid> = (TOP_LEVEL..=leaf_level)
            .map(|l| {
                let up = (leaf_level - l) as u32;
                match mode {
                    LevelMode::Scaled => make_quadrature(sigma / 2f64.powi(up as i32), m_leaf, d),
                    LevelMode::FixedBand { growth } => {
                        let m = growth
                            .checked_pow(up)
                            .and_then(|g| g.checked_mul(m_leaf))
                            .filter(|&m| m <= 1 << 20)
                            .ok_or_else(|| Error::Config("level grid grows too large".into()))?;
                        make_quadrature(sigma, m, d)
                    }
                }
            })
            .collect::<Result<_>>()?;
        let mut levels = Vec::with_capacity(grids.len());
        for (i, g) in grids.iter().enumerate() {
            let level = TOP_LEVEL + i;
            let factors = translation_coefficients(kernel, g, CoefficientMode::Spectral, None)?;
            let to_parent = if i == 0 {
                None
            } else {
                let src = g.nodes_1d();
                let k = stencil.min(src.len());
                Some(lagrange_matrix(src, grids[i - 1].nodes_1d(), k)?)
            };
            levels.push(LevelGrid { level, factors, to_parent });
        }
        Ok(LevelGrids { leaf_level, mode, stencil, levels })
    }

    pub fn level(&self, l: usize) -> &LevelGrid {
        &self.levels[l - TOP_LEVEL]
    }

    pub fn levels(&self) -> &[LevelGrid] {
        &self.levels
    }

    pub fn dim(&self) -> usize {
        self.levels[0].factors.grid.dim()
    }
}

/// Rescales a grid by `s`: nodes `xi / s`, weights `w / s` per dimension.
pub fn rescale_grid(grid: &QuadratureGrid, s: f64) -> Result<QuadratureGrid> {
    grid.rescaled(s)
}

fn check_compat(tree: &BoxTree, grids: &LevelGrids) -> Result<()> {
    if tree.leaf_level() != grids.leaf_level || tree.dim() != grids.dim() {
        return Err(Error::Config(format!(
            "tree (leaf {}, d {}) and grids (leaf {}, d {}) disagree",
            tree.leaf_level(),
            tree.dim(),
            grids.leaf_level,
            grids.dim()
        )));
    }
    Ok(())
}

fn shift(grid: &QuadratureGrid, v: &mut [Complex64], r: &[f64]) {
    let nodes = grid.nodes_1d();
    let m = nodes.len();
    if r.len() == 1 {
        for (x, &xi) in v.iter_mut().zip(nodes) {
            *x *= Complex64::from_polar(1.0, xi * r[0]);
        }
    } else {
        let ey: Vec<Complex64> = nodes.iter().map(|&xi| Complex64::from_polar(1.0, xi * r[1])).collect();
        for (i1, &xi) in nodes.iter().enumerate() {
            let ex = Complex64::from_polar(1.0, xi * r[0]);
            for (x, e) in v[i1 * m..(i1 + 1) * m].iter_mut().zip(&ey) {
                *x *= ex * e;
            }
        }
    }
}

fn diff(a: &[f64; 2], b: &[f64; 2], d: usize) -> [f64; 2] {
    [a[0] - b[0], if d == 2 { a[1] - b[1] } else { 0.0 }]
}

/// P2M at the leaves, then M2M up to [`TOP_LEVEL`].
pub fn upsweep(tree: &BoxTree, grids: &LevelGrids, ps: &PointSet, weights: &[f64]) -> Result<ExpansionSet> {
    check_compat(tree, grids)?;
    if weights.len() != ps.len() {
        return invalid(format!("{} weights for {} points", weights.len(), ps.len()));
    }
    let d = tree.dim();
    let mut set = ExpansionSet::zeros(ExpansionKind::Multipole, tree, grids);
    let leaf = tree.leaf_level();
    let lgrid = &grids.level(leaf).factors.grid;
    set.levels[leaf - TOP_LEVEL]
        .par_iter_mut()
        .enumerate()
        .for_each(|(b, v)| {
            let bx = &tree.level(leaf).boxes[b];
            let mut buf = Vec::new();
            let mut r = [0.0; 2];
            for &j in tree.points_in(leaf, b) {
                let x = ps.point(j);
                for a in 0..d {
                    r[a] = bx.center[a] - x[a];
                }
                accumulate_phases(lgrid, &r[..d], weights[j], v, &mut buf);
            }
        });
    for l in (TOP_LEVEL..leaf).rev() {
        let child = l + 1;
        let interp = grids.level(child).to_parent.as_ref().expect("child level has interpolation");
        let pgrid = &grids.level(l).factors.grid;
        let (lower, upper) = set.levels.split_at_mut(child - TOP_LEVEL);
        let children = &upper[0];
        lower[l - TOP_LEVEL].par_iter_mut().enumerate().for_each(|(p, vp)| {
            let pb = &tree.level(l).boxes[p];
            if pb.is_empty() {
                return;
            }
            for c in pb.children.clone() {
                let cb = &tree.level(child).boxes[c];
                if cb.is_empty() {
                    continue;
                }
                let mut moved = interp.apply_tensor(&children[c], d);
                shift(pgrid, &mut moved, &diff(&pb.center, &cb.center, d)[..d]);
                for (a, b) in vp.iter_mut().zip(&moved) {
                    *a += b;
                }
            }
        });
    }
    Ok(set)
}

/// M2L over interaction lists at every level: `L_a += C e^{i xi.(x_a - x_b)} V_b`.
pub fn couple(tree: &BoxTree, grids: &LevelGrids, multipoles: &ExpansionSet) -> Result<ExpansionSet> {
    check_compat(tree, grids)?;
    let d = tree.dim();
    let mut set = ExpansionSet::zeros(ExpansionKind::Local, tree, grids);
    for l in TOP_LEVEL..=tree.leaf_level() {
        let f = &grids.level(l).factors;
        let boxes = &tree.level(l).boxes;
        let mp = &multipoles.levels[l - TOP_LEVEL];
        set.levels[l - TOP_LEVEL].par_iter_mut().enumerate().for_each(|(a, la)| {
            let ab = &boxes[a];
            if ab.is_empty() {
                return;
            }
            let mut buf = Vec::new();
            for &b in &ab.interaction {
                if boxes[b].is_empty() {
                    continue;
                }
                buf.clear();
                buf.extend(f.c_vals.iter().zip(&mp[b]).map(|(c, v)| c * v));
                shift(&f.grid, &mut buf, &diff(&ab.center, &boxes[b].center, d)[..d]);
                for (x, y) in la.iter_mut().zip(&buf) {
                    *x += y;
                }
            }
        });
    }
    Ok(set)
}

/// L2L from [`TOP_LEVEL`] to the leaves (with the weight ratio), then L2P.
/// Returns the far-field values and the largest discarded imaginary part.
pub fn downsweep(tree: &BoxTree, grids: &LevelGrids, locals: &ExpansionSet, ps: &PointSet) -> Result<(Vec<f64>, f64)> {
    check_compat(tree, grids)?;
    let d = tree.dim();
    let mut acc = locals.levels.clone();
    for l in TOP_LEVEL + 1..=tree.leaf_level() {
        let interp = grids.level(l).to_parent.as_ref().expect("child level has interpolation");
        let pgrid = &grids.level(l - 1).factors.grid;
        let ratio = pgrid.weight(0) / grids.level(l).factors.grid.weight(0);
        let (upper, lower) = acc.split_at_mut(l - TOP_LEVEL);
        let parents = &upper[l - 1 - TOP_LEVEL];
        lower[0].par_iter_mut().enumerate().for_each(|(c, lc)| {
            let cb = &tree.level(l).boxes[c];
            if cb.is_empty() {
                return;
            }
            let pidx = cb.parent.expect("level >= 1 has a parent");
            let pb = &tree.level(l - 1).boxes[pidx];
            let mut shifted = parents[pidx].clone();
            shift(pgrid, &mut shifted, &diff(&cb.center, &pb.center, d)[..d]);
            let moved = interp.apply_tensor_transpose(&shifted, d);
            for (x, y) in lc.iter_mut().zip(&moved) {
                *x += y * ratio;
            }
        });
    }
    let leaf = tree.leaf_level();
    let grid = &grids.level(leaf).factors.grid;
    let w = grid.weight(0);
    let leaves = &acc[leaf - TOP_LEVEL];
    let per_box: Vec<Vec<(usize, Complex64)>> = tree
        .level(leaf)
        .boxes
        .par_iter()
        .enumerate()
        .map(|(a, bx)| {
            let mut buf = Vec::new();
            let mut r = [0.0; 2];
            tree.points_in(leaf, a)
                .iter()
                .map(|&i| {
                    let x = ps.point(i);
                    for k in 0..d {
                        r[k] = x[k] - bx.center[k];
                    }
                    (i, contract_phases(grid, &r[..d], &leaves[a], &mut buf) * w)
                })
                .collect()
        })
        .collect();
    let mut out = vec![0.0; ps.len()];
    let mut imag: f64 = 0.0;
    for (i, z) in per_box.into_iter().flatten() {
        out[i] = z.re;
        imag = imag.max(z.im.abs());
    }
    Ok((out, imag))
}

/// Precomputed multilevel operator for one point set.
#[derive(Clone, Debug)]
pub struct MultilevelFmm<'t> {
    tree: &'t BoxTree,
    ps: &'t PointSet,
    grids: LevelGrids,
    pair_kernel: PairKernel,
}

impl<'t> MultilevelFmm<'t> {
    pub fn new(grids: LevelGrids, near: NearField, ps: &'t PointSet, tree: &'t BoxTree) -> Result<Self> {
        check_compat(tree, &grids)?;
        if tree.order().len() != ps.len() {
            return Err(Error::Config("tree was not built over this point set".into()));
        }
        let leaf = grids.level(grids.leaf_level);
        let pair_kernel = PairKernel::new(leaf.factors.kernel, near, leaf.factors.grid.sigma(), ps.dim(), domain_span(ps))?;
        Ok(MultilevelFmm { tree, ps, grids, pair_kernel })
    }

    pub fn len(&self) -> usize {
        self.ps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ps.is_empty()
    }

    pub fn grids(&self) -> &LevelGrids {
        &self.grids
    }

    pub fn apply(&self, weights: &[f64]) -> Result<SumResult> {
        let (sc, sw) = sorted_inputs(self.tree, self.ps, weights);
        let (mut values, near_pairs) = near_field(self.tree, self.ps, &sc, &sw, &self.pair_kernel);
        let mp = upsweep(self.tree, &self.grids, self.ps, weights)?;
        let loc = couple(self.tree, &self.grids, &mp)?;
        let (far, imag) = downsweep(self.tree, &self.grids, &loc, self.ps)?;
        for (u, f) in values.iter_mut().zip(&far) {
            *u += f;
        }
        let mut far_work = 0u64;
        for l in TOP_LEVEL..=self.tree.leaf_level() {
            let m = self.grids.level(l).factors.grid.len() as u64;
            let boxes = &self.tree.level(l).boxes;
            let pairs: u64 = boxes
                .iter()
                .filter(|b| !b.is_empty())
                .map(|b| b.interaction.iter().filter(|&&c| !boxes[c].is_empty()).count() as u64)
                .sum();
            far_work += m * pairs;
        }
        far_work += 2 * self.ps.len() as u64 * self.grids.level(self.tree.leaf_level()).factors.grid.len() as u64;
        Ok(SumResult { values, stats: SumStats { near_pairs, far_work, max_imag_residual: imag } })
    }
}

/// Multilevel FMM sum.
pub fn mlfmm_matvec(req: &SumRequest, tree: &BoxTree, grids: &LevelGrids) -> Result<SumResult> {
    req.validate()?;
    MultilevelFmm::new(grids.clone(), req.near_field, req.points, tree)?.apply(req.weights)
}

/// Leaf level for a target mean occupancy, at least `TOP_LEVEL + 1`.
pub fn multilevel_leaf(n: usize, d: usize, occupancy: usize) -> usize {
    let boxes = (n as f64 / occupancy.max(1) as f64).max(1.0);
    ((boxes.log2() / d as f64).round() as usize).max(TOP_LEVEL + 1)
}

/// Level-aware reference: each far pair evaluated with the separated form of
/// the level at which the tree couples it.
pub fn level_oracle(grids: &LevelGrids, near: NearField, ps: &PointSet, tree: &BoxTree, weights: &[f64]) -> Result<Vec<f64>> {
    check_compat(tree, grids)?;
    let leaf = grids.level(grids.leaf_level);
    let pk = PairKernel::new(leaf.factors.kernel, near, leaf.factors.grid.sigma(), ps.dim(), domain_span(ps))?;
    let lmax = tree.leaf_level();
    Ok((0..ps.len())
        .into_par_iter()
        .map(|i| {
            let a = tree.leaf_of(i);
            let xi = ps.point(i);
            (0..ps.len())
                .map(|j| {
                    let b = tree.leaf_of(j);
                    let xj = ps.point(j);
                    if tree.leaves().boxes[a].neighbors.contains(&b) {
                        let r: Vec<f64> = xi.iter().zip(xj).map(|(p, q)| p - q).collect();
                        return weights[j] * pk.eval(&r);
                    }
                    let l = (TOP_LEVEL..=lmax)
                        .find(|&l| {
                            let (aa, bb) = (tree.ancestor(a, l), tree.ancestor(b, l));
                            tree.level(l).boxes[aa].interaction.contains(&bb)
                        })
                        .expect("far pair is coupled at some level");
                    weights[j] * crate::bandlimit::lowrank_eval(&grids.level(l).factors, xi, xj)
                })
                .sum()
        })
        .collect())
}

/// Sup-norm error of interpolating `xi -> e^{i xi x}` from `k` equispaced
/// nodes spanning `[-sigma, sigma]` to the half-frequency targets
/// `xi / 2`, over `xi in [-sigma, sigma]` and `x in [-a, a]`.
pub fn lagrange_sup_error(k: usize, a: f64, sigma: f64, samples: usize) -> Result<f64> {
    if k < 2 || samples < 2 {
        return invalid("need at least 2 nodes and 2 samples");
    }
    let nodes: Vec<f64> = (0..k).map(|i| -sigma + 2.0 * sigma * i as f64 / (k - 1) as f64).collect();
    let targets: Vec<f64> = (0..samples).map(|s| 0.5 * (-sigma + 2.0 * sigma * s as f64 / (samples - 1) as f64)).collect();
    let p = lagrange_matrix(&nodes, &targets, k)?;
    let xs: Vec<f64> = (0..samples).map(|s| -a + 2.0 * a * s as f64 / (samples - 1) as f64).collect();
    let err = xs
        .par_iter()
        .map(|&x| {
            let basis: Vec<Complex64> = nodes.iter().map(|&n| Complex64::from_polar(1.0, n * x)).collect();
            let approx = p.apply(&basis);
            targets
                .iter()
                .zip(approx)
                .map(|(&t, v)| (Complex64::from_polar(1.0, t * x) - v).norm())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fmm::SingleLevelFmm;
    use crate::geometry::{build_tree, generate_quasiuniform, Domain};
    use std::f64::consts::PI;

    #[test]
    fn lagrange_basics() {
        let src: Vec<f64> = (0..8).map(|i| i as f64 * 0.5).collect();
        let p = lagrange_matrix(&src, &[1.0, 1.3, 3.6], 4).unwrap();
        assert_eq!(p.row(0), (2, &[1.0][..]));
        for t in 0..3 {
            let s: f64 = p.row(t).1.iter().sum();
            assert!((s - 1.0).abs() < 1e-14);
        }
        assert!(p.max_row_nnz() <= 4);
        let cubic: Vec<f64> = src.iter().map(|x| x * x * x - x).collect();
        let v = p.apply(&cubic);
        assert!((v[1] - (1.3f64.powi(3) - 1.3)).abs() < 1e-13);
        assert!(lagrange_matrix(&[0.0, 0.0, 1.0], &[0.5], 2).is_err());
        assert!(lagrange_matrix(&src, &[0.5], 9).is_err());
    }

    #[test]
    fn table5_value_at_k8() {
        let e = lagrange_sup_error(8, 1.0, PI, 401).unwrap();
        assert!((e / 5.7199e-4 - 1.0).abs() < 0.05, "{e}");
    }

    #[test]
    fn underflow() {
        let k = RadialKernel::InverseMultiquadric { c: 1.0 };
        assert!(matches!(LevelGrids::new(&k, PI, 16, 1, 2, LevelMode::default(), 10), Err(Error::LevelUnderflow { .. })));
    }

    #[test]
    fn growth_one_matches_single_level() {
        for d in [1, 2] {
            let n = if d == 1 { 300 } else { 400 };
            let ps = generate_quasiuniform(n, Domain::unit(d), 5, 0.5).unwrap();
            let tree = build_tree(&ps, if d == 1 { 4 } else { 3 }).unwrap();
            let k = RadialKernel::InverseMultiquadric { c: 1.0 };
            let m = if d == 1 { 32 } else { 10 };
            let w: Vec<f64> = (0..n).map(|i| ((i * 13) % 7) as f64 - 3.0).collect();
            let grids = LevelGrids::new(&k, PI, m, d, tree.leaf_level(), LevelMode::FixedBand { growth: 1 }, m).unwrap();
            let ml = MultilevelFmm::new(grids, NearField::Original, &ps, &tree).unwrap().apply(&w).unwrap();
            let sl = SingleLevelFmm::new(k, PI, m, NearField::Original, &ps, &tree).unwrap().apply(&w).unwrap();
            let scale = sl.values.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            for (a, b) in ml.values.iter().zip(&sl.values) {
                assert!((a - b).abs() < 1e-11 * scale, "d={d}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn scaled_mode_matches_level_oracle() {
        let ps = generate_quasiuniform(200, Domain::unit(1), 2, 0.5).unwrap();
        let tree = build_tree(&ps, 4).unwrap();
        let k = RadialKernel::Gaussian { c: 1.0 };
        let w: Vec<f64> = (0..200).map(|i| (i as f64 * 0.37).sin()).collect();
        let grids = LevelGrids::new(&k, 4.0 * PI, 32, 1, 4, LevelMode::Scaled, 10).unwrap();
        let want = level_oracle(&grids, NearField::Original, &ps, &tree, &w).unwrap();
        let got = MultilevelFmm::new(grids, NearField::Original, &ps, &tree).unwrap().apply(&w).unwrap();
        let scale = want.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        for (a, b) in got.values.iter().zip(&want) {
            assert!((a - b).abs() < 1e-8 * scale, "{a} vs {b}");
        }
    }

    #[test]
    fn anterpolation_is_adjoint() {
        let src: Vec<f64> = (0..12).map(|i| -1.0 + i as f64 / 6.0).collect();
        let tgt: Vec<f64> = (0..24).map(|i| -1.0 + i as f64 / 12.0).collect();
        let p = lagrange_matrix(&src, &tgt, 6).unwrap();
        for d in [1, 2] {
            let (ns, nt) = (12usize.pow(d as u32), 24usize.pow(d as u32));
            let u: Vec<Complex64> = (0..ns).map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
            let v: Vec<Complex64> = (0..nt).map(|i| Complex64::new((i as f64 * 0.7).cos(), (i as f64).sin())).collect();
            let pu = p.apply_tensor(&u, d);
            let ptv = p.apply_tensor_transpose(&v, d);
            let lhs: Complex64 = pu.iter().zip(&v).map(|(a, b)| a * b.conj()).sum();
            let rhs: Complex64 = u.iter().zip(&ptv).map(|(a, b)| a * b.conj()).sum();
            assert!((lhs - rhs).norm() < 1e-11 * lhs.norm().max(1.0));
        }
    }

    #[test]
    fn zero_frequency_is_conserved() {
        let ps = generate_quasiuniform(500, Domain::unit(2), 9, 0.5).unwrap();
        let tree = build_tree(&ps, 4).unwrap();
        let k = RadialKernel::InverseMultiquadric { c: 1.0 };
        let grids = LevelGrids::new(&k, PI, 8, 2, 4, LevelMode::default(), 10).unwrap();
        let w: Vec<f64> = (0..500).map(|i| (i as f64 * 1.1).cos()).collect();
        let mp = upsweep(&tree, &grids, &ps, &w).unwrap();
        for l in TOP_LEVEL..=4 {
            let o = grids.level(l).factors.grid.origin_index().unwrap();
            let total: f64 = (0..tree.level(l).boxes.len()).map(|b| mp.coeffs(l, b)[o].re).sum();
            let want: f64 = w.iter().sum();
            assert!((total - want).abs() < 1e-10, "level {l}: {total} vs {want}");
        }
    }

    #[test]
    fn default_mode_close_to_single_level() {
        let n = 256;
        let ps = generate_quasiuniform(n, Domain::unit(1), 3, 0.5).unwrap();
        let tree = build_tree(&ps, 3).unwrap();
        let k = RadialKernel::InverseMultiquadric { c: 1.0 };
        let w: Vec<f64> = (0..n).map(|i| ((i * 7919) % 200) as f64 / 100.0 - 1.0).collect();
        let grids = LevelGrids::new(&k, PI, 64, 1, 3, LevelMode::default(), 10).unwrap();
        let ml = MultilevelFmm::new(grids, NearField::Original, &ps, &tree).unwrap().apply(&w).unwrap();
        let sl = SingleLevelFmm::new(k, PI, 64, NearField::Original, &ps, &tree).unwrap().apply(&w).unwrap();
        let l1: f64 = w.iter().map(|x| x.abs()).sum();
        let err = ml.values.iter().zip(&sl.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1.3111e-5 * l1 * 10.0, "{err}");
    }
}
