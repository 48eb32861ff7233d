//! Point sets, fill and separation statistics, and the uniform box tree.

use crate::error::{invalid, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::ops::Range;

/// Axis-aligned box in one or two dimensions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    d: usize,
    lo: [f64; 2],
    hi: [f64; 2],
}

impl Domain {
    pub fn new(lo: &[f64], hi: &[f64]) -> Result<Self> {
        let d = lo.len();
        if d != hi.len() || !(d == 1 || d == 2) {
            return invalid("domain corners must both have 1 or 2 coordinates");
        }
        let mut l = [0.0; 2];
        let mut h = [0.0; 2];
        for k in 0..d {
            if !(lo[k].is_finite() && hi[k].is_finite() && lo[k] < hi[k]) {
                return invalid(format!("empty or infinite domain extent on axis {k}"));
            }
            l[k] = lo[k];
            h[k] = hi[k];
        }
        Ok(Domain { d, lo: l, hi: h })
    }

    pub fn unit(d: usize) -> Self {
        Domain::new(&vec![0.0; d], &vec![1.0; d]).expect("valid unit box")
    }

    pub fn dim(&self) -> usize {
        self.d
    }
    pub fn lo(&self) -> &[f64] {
        &self.lo[..self.d]
    }
    pub fn hi(&self) -> &[f64] {
        &self.hi[..self.d]
    }
    pub fn extent(&self, k: usize) -> f64 {
        self.hi[k] - self.lo[k]
    }
    pub fn diameter(&self) -> f64 {
        (0..self.d).map(|k| self.extent(k).powi(2)).sum::<f64>().sqrt()
    }
    pub fn contains(&self, x: &[f64]) -> bool {
        (0..self.d).all(|k| x[k] >= self.lo[k] && x[k] <= self.hi[k])
    }
}

/// Data sites with their enclosing domain and separation distance.
#[derive(Clone, Debug)]
pub struct PointSet {
    d: usize,
    coords: Vec<f64>,
    domain: Domain,
    separation: Option<f64>,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

impl PointSet {
    /// Validates the points (inside the domain, pairwise distinct) and caches
    /// the separation distance.
    pub fn new(coords: Vec<f64>, domain: Domain) -> Result<Self> {
        let d = domain.dim();
        if coords.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        if !coords.len().is_multiple_of(d) {
            return invalid(format!("{} coordinates do not form {d}-dimensional points", coords.len()));
        }
        if let Some(i) = coords.chunks(d).position(|p| !domain.contains(p)) {
            return Err(Error::OutsideDomain { index: i });
        }
        let mut ps = PointSet { d, coords, domain, separation: None };
        if ps.len() >= 2 {
            let q = ps.compute_separation()?;
            ps.separation = Some(q);
        }
        Ok(ps)
    }

    /// Smallest box containing the points, padded by a relative margin.
    pub fn with_bounding_domain(coords: Vec<f64>, d: usize) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        if !(d == 1 || d == 2) || !coords.len().is_multiple_of(d) {
            return invalid("points must be 1- or 2-dimensional");
        }
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for p in coords.chunks(d) {
            for k in 0..d {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        // Square domain so boxes are square at every level.
        let side = (0..d).map(|k| hi[k] - lo[k]).fold(0.0, f64::max).max(1e-300);
        let pad = 1e-9 * side + f64::EPSILON * lo.iter().chain(&hi).fold(0.0f64, |a, b| a.max(b.abs()));
        let lo2: Vec<f64> = lo.iter().map(|v| v - pad).collect();
        let hi2: Vec<f64> = lo.iter().map(|v| v + side + pad).collect();
        PointSet::new(coords, Domain::new(&lo2, &hi2)?)
    }

    pub fn dim(&self) -> usize {
        self.d
    }
    pub fn len(&self) -> usize {
        self.coords.len() / self.d
    }
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
    pub fn domain(&self) -> &Domain {
        &self.domain
    }
    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks(self.d)
    }

    /// `q_X = 1/2 min_{j != k} |x_j - x_k|`.
    pub fn separation_distance(&self) -> Result<f64> {
        self.separation
            .ok_or_else(|| Error::InvalidArgument("separation distance needs at least 2 points".into()))
    }

    fn compute_separation(&self) -> Result<f64> {
        let n = self.len();
        let (best, i, j) = if n <= 4096 {
            self.closest_pair_brute()
        } else {
            self.closest_pair_sweep()
        };
        if best == 0.0 {
            return Err(Error::ZeroSeparation(i.min(j), i.max(j)));
        }
        Ok(0.5 * best)
    }

    fn closest_pair_brute(&self) -> (f64, usize, usize) {
        let n = self.len();
        let mut best = (f64::INFINITY, 0, 0);
        for i in 0..n {
            for j in i + 1..n {
                let r = dist(self.point(i), self.point(j));
                if r < best.0 {
                    best = (r, i, j);
                }
            }
        }
        best
    }

    /// Sweep over points sorted by the first coordinate; exact.
    fn closest_pair_sweep(&self) -> (f64, usize, usize) {
        let n = self.len();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| self.point(a)[0].total_cmp(&self.point(b)[0]));
        let mut best = (f64::INFINITY, 0, 0);
        for a in 0..n {
            let pa = self.point(idx[a]);
            for &jb in &idx[a + 1..] {
                let pb = self.point(jb);
                if pb[0] - pa[0] >= best.0 {
                    break;
                }
                let r = dist(pa, pb);
                if r < best.0 {
                    best = (r, idx[a], jb);
                }
            }
        }
        best
    }

    /// `h / q_X`
    pub fn uniformity_ratio(&self, probe_resolution: usize) -> Result<f64> {
        Ok(mesh_norm(self, probe_resolution)? / self.separation_distance()?)
    }
}

/// Bucket grid for nearest-site queries.
struct NearestIndex<'a> {
    ps: &'a PointSet,
    cells: usize,
    cell: [f64; 2],
    start: Vec<usize>,
    items: Vec<usize>,
}

impl<'a> NearestIndex<'a> {
    fn new(ps: &'a PointSet) -> Self {
        let d = ps.dim();
        let n = ps.len();
        let cells = ((n as f64).powf(1.0 / d as f64).ceil() as usize).max(1);
        let dom = ps.domain();
        let cell = [dom.extent(0) / cells as f64, if d == 2 { dom.extent(1) / cells as f64 } else { 1.0 }];
        let total = cells.pow(d as u32);
        let key = |p: &[f64]| -> usize {
            let mut k = 0;
            for ax in 0..d {
                let c = (((p[ax] - dom.lo()[ax]) / cell[ax]) as usize).min(cells - 1);
                k = k * cells + c;
            }
            k
        };
        let mut count = vec![0usize; total + 1];
        for p in ps.iter() {
            count[key(p) + 1] += 1;
        }
        for k in 0..total {
            count[k + 1] += count[k];
        }
        let mut fill = count.clone();
        let mut items = vec![0; n];
        for (i, p) in ps.iter().enumerate() {
            let k = key(p);
            items[fill[k]] = i;
            fill[k] += 1;
        }
        NearestIndex { ps, cells, cell, start: count, items }
    }

    fn nearest_distance(&self, x: &[f64]) -> f64 {
        let d = self.ps.dim();
        let dom = self.ps.domain();
        let home: Vec<isize> = (0..d)
            .map(|ax| (((x[ax] - dom.lo()[ax]) / self.cell[ax]).floor() as isize).clamp(0, self.cells as isize - 1))
            .collect();
        let min_cell = if d == 2 { self.cell[0].min(self.cell[1]) } else { self.cell[0] };
        let lim = self.cells as isize;
        let mut best = f64::INFINITY;
        for ring in 0..=lim {
            let mut visit = |c: &[isize]| {
                if c.iter().all(|ci| (0..lim).contains(ci)) {
                    let k = c.iter().fold(0usize, |k, &ci| k * self.cells + ci as usize);
                    for &i in &self.items[self.start[k]..self.start[k + 1]] {
                        best = best.min(dist(x, self.ps.point(i)));
                    }
                }
            };
            if d == 1 {
                visit(&[home[0] - ring]);
                if ring > 0 {
                    visit(&[home[0] + ring]);
                }
            } else {
                for cx in home[0] - ring..=home[0] + ring {
                    for cy in home[1] - ring..=home[1] + ring {
                        if (cx - home[0]).abs() == ring || (cy - home[1]).abs() == ring {
                            visit(&[cx, cy]);
                        }
                    }
                }
            }
            // Cells in ring k + 1 and beyond are at least k cells away.
            if best <= ring as f64 * min_cell {
                break;
            }
        }
        best
    }
}

/// Mesh norm `sup_{x in domain} min_j |x - x_j|`, estimated on a probe
/// lattice with `probe_resolution` points per dimension (boundary included).
/// The true value lies in `[h, h + half probe-cell diagonal]`.
pub fn mesh_norm(ps: &PointSet, probe_resolution: usize) -> Result<f64> {
    if ps.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    if probe_resolution < 64 {
        return invalid(format!("probe resolution must be at least 64, got {probe_resolution}"));
    }
    let index = NearestIndex::new(ps);
    let dom = ps.domain();
    let step = |ax: usize| dom.extent(ax) / (probe_resolution - 1) as f64;
    let mut h: f64 = 0.0;
    if ps.dim() == 1 {
        for k in 0..probe_resolution {
            let x = dom.lo()[0] + k as f64 * step(0);
            h = h.max(index.nearest_distance(&[x]));
        }
    } else {
        use rayon::prelude::*;
        h = (0..probe_resolution)
            .into_par_iter()
            .map(|a| {
                let x = dom.lo()[0] + a as f64 * step(0);
                (0..probe_resolution)
                    .map(|b| index.nearest_distance(&[x, dom.lo()[1] + b as f64 * step(1)]))
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max);
    }
    Ok(h)
}

/// Half the diagonal of one probe-lattice cell: the bracketing slack of
/// [`mesh_norm`].
pub fn probe_slack(domain: &Domain, probe_resolution: usize) -> f64 {
    let r = (probe_resolution - 1) as f64;
    0.5 * (0..domain.dim()).map(|ax| (domain.extent(ax) / r).powi(2)).sum::<f64>().sqrt()
}

/// Cell-centred lattice with `ceil(n^(1/d))` points per dimension (first `n`
/// in row-major order), each coordinate jittered uniformly by up to
/// `jitter * spacing / 2`.
pub fn generate_quasiuniform(n: usize, domain: Domain, seed: u64, jitter: f64) -> Result<PointSet> {
    if n == 0 {
        return Err(Error::EmptyPointSet);
    }
    if !(0.0..1.0).contains(&jitter) {
        return invalid(format!("jitter must lie in [0, 1), got {jitter}"));
    }
    let d = domain.dim();
    let k = if d == 1 { n } else { ((n as f64).sqrt().ceil() as usize).max(1) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spacing: Vec<f64> = (0..d).map(|ax| domain.extent(ax) / k as f64).collect();
    let mut coords = Vec::with_capacity(n * d);
    for i in 0..n {
        let cell = if d == 1 { [i, 0] } else { [i / k, i % k] };
        for ax in 0..d {
            let centre = domain.lo()[ax] + (cell[ax] as f64 + 0.5) * spacing[ax];
            let offset = if jitter > 0.0 { rng.gen_range(-1.0..1.0) * jitter * 0.5 * spacing[ax] } else { 0.0 };
            coords.push(centre + offset);
        }
    }
    PointSet::new(coords, domain)
}

/// One box of the tree.
#[derive(Clone, Debug)]
pub struct TreeBox {
    pub center: [f64; 2],
    pub parent: Option<usize>,
    pub children: Range<usize>,
    /// Adjacent boxes including the box itself.
    pub neighbors: Vec<usize>,
    /// Children of the parent's neighbors that are not neighbors.
    pub interaction: Vec<usize>,
    /// Range into [`BoxTree::order`] of the points inside this box.
    pub points: Range<usize>,
}

impl TreeBox {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct TreeLevel {
    pub level: usize,
    /// Box side per axis.
    pub side: [f64; 2],
    /// Boxes per axis, `2^level`.
    pub per_axis: usize,
    pub boxes: Vec<TreeBox>,
}

/// Uniform `2^d`-ary subdivision of the domain.
///
/// Boxes are numbered in Morton order at each level, so the children of box
/// `b` are `2^d b .. 2^d (b + 1)` and the points of every box form one
/// contiguous run of [`BoxTree::order`].
#[derive(Clone, Debug)]
pub struct BoxTree {
    d: usize,
    leaf_level: usize,
    levels: Vec<TreeLevel>,
    order: Vec<usize>,
    leaf_of: Vec<usize>,
}

pub const DEFAULT_BOX_CAP: usize = 1 << 22;

fn morton_encode(ix: usize, iy: usize, d: usize) -> usize {
    if d == 1 {
        return ix;
    }
    let mut code = 0;
    for bit in 0..(usize::BITS / 2) {
        code |= ((ix >> bit) & 1) << (2 * bit + 1);
        code |= ((iy >> bit) & 1) << (2 * bit);
    }
    code
}

fn morton_decode(code: usize, d: usize) -> (usize, usize) {
    if d == 1 {
        return (code, 0);
    }
    let (mut ix, mut iy) = (0, 0);
    for bit in 0..(usize::BITS / 2) {
        ix |= ((code >> (2 * bit + 1)) & 1) << bit;
        iy |= ((code >> (2 * bit)) & 1) << bit;
    }
    (ix, iy)
}

pub fn build_tree(ps: &PointSet, leaf_level: usize) -> Result<BoxTree> {
    build_tree_with_cap(ps, leaf_level, DEFAULT_BOX_CAP)
}

pub fn build_tree_with_cap(ps: &PointSet, leaf_level: usize, cap: usize) -> Result<BoxTree> {
    if leaf_level < 2 {
        return Err(Error::LevelUnderflow { leaf_level, needed: 2 });
    }
    let d = ps.dim();
    let fanout = 1usize << d;
    let mut total: usize = 0;
    for l in 0..=leaf_level {
        let count = fanout.checked_pow(l as u32).unwrap_or(usize::MAX);
        total = total.saturating_add(count);
        if total > cap || leaf_level > 30 {
            return Err(Error::TreeTooDeep { boxes: total, cap });
        }
    }
    let dom = *ps.domain();
    let per_leaf = 1usize << leaf_level;
    let leaf_side = [dom.extent(0) / per_leaf as f64, if d == 2 { dom.extent(1) / per_leaf as f64 } else { 0.0 }];

    // Bin points into leaves and counting-sort by Morton code.
    let n = ps.len();
    let leaf_count = fanout.pow(leaf_level as u32);
    let mut leaf_of = vec![0usize; n];
    for (i, p) in ps.iter().enumerate() {
        let cell = |ax: usize| (((p[ax] - dom.lo()[ax]) / leaf_side[ax]) as usize).min(per_leaf - 1);
        leaf_of[i] = morton_encode(cell(0), if d == 2 { cell(1) } else { 0 }, d);
    }
    let mut start = vec![0usize; leaf_count + 1];
    for &b in &leaf_of {
        start[b + 1] += 1;
    }
    for b in 0..leaf_count {
        start[b + 1] += start[b];
    }
    let mut fill = start.clone();
    let mut order = vec![0usize; n];
    for (i, &b) in leaf_of.iter().enumerate() {
        order[fill[b]] = i;
        fill[b] += 1;
    }

    let mut levels = Vec::with_capacity(leaf_level + 1);
    for l in 0..=leaf_level {
        let per_axis = 1usize << l;
        let count = fanout.pow(l as u32);
        let side = [dom.extent(0) / per_axis as f64, if d == 2 { dom.extent(1) / per_axis as f64 } else { 0.0 }];
        // Leaves below box b at level l: Morton codes b * fanout^(L-l) ...
        let span = fanout.pow((leaf_level - l) as u32);
        let boxes = (0..count)
            .map(|b| {
                let (ix, iy) = morton_decode(b, d);
                let center = [
                    dom.lo()[0] + (ix as f64 + 0.5) * side[0],
                    if d == 2 { dom.lo()[1] + (iy as f64 + 0.5) * side[1] } else { 0.0 },
                ];
                let neighbors = neighbor_codes(ix, iy, per_axis, d);
                TreeBox {
                    center,
                    parent: if l == 0 { None } else { Some(b / fanout) },
                    children: if l == leaf_level { 0..0 } else { b * fanout..(b + 1) * fanout },
                    neighbors,
                    interaction: Vec::new(),
                    points: start[b * span]..start[(b + 1) * span],
                }
            })
            .collect();
        levels.push(TreeLevel { level: l, side, per_axis, boxes });
    }
    for l in 1..=leaf_level {
        let (upper, lower) = levels.split_at_mut(l);
        let parents = &upper[l - 1].boxes;
        for b in lower[0].boxes.iter_mut() {
            let p = &parents[b.parent.expect("non-root has parent")];
            let mut list: Vec<usize> = p
                .neighbors
                .iter()
                .flat_map(|&pn| parents[pn].children.clone())
                .filter(|c| !b.neighbors.contains(c))
                .collect();
            list.sort_unstable();
            b.interaction = list;
        }
    }
    Ok(BoxTree { d, leaf_level, levels, order, leaf_of })
}

fn neighbor_codes(ix: usize, iy: usize, per_axis: usize, d: usize) -> Vec<usize> {
    let range = |c: usize| c.saturating_sub(1)..=(c + 1).min(per_axis - 1);
    let mut out = Vec::with_capacity(9);
    if d == 1 {
        out.extend(range(ix));
    } else {
        for x in range(ix) {
            for y in range(iy) {
                out.push(morton_encode(x, y, 2));
            }
        }
    }
    out.sort_unstable();
    out
}

impl BoxTree {
    pub fn dim(&self) -> usize {
        self.d
    }
    pub fn leaf_level(&self) -> usize {
        self.leaf_level
    }
    pub fn level(&self, l: usize) -> &TreeLevel {
        &self.levels[l]
    }
    pub fn levels(&self) -> &[TreeLevel] {
        &self.levels
    }
    pub fn leaves(&self) -> &TreeLevel {
        &self.levels[self.leaf_level]
    }
    /// Point indices sorted by leaf box.
    pub fn order(&self) -> &[usize] {
        &self.order
    }
    /// Indices of the points in box `b` at level `l`.
    pub fn points_in(&self, l: usize, b: usize) -> &[usize] {
        &self.order[self.levels[l].boxes[b].points.clone()]
    }
    /// Leaf box holding point `i`.
    pub fn leaf_of(&self, i: usize) -> usize {
        self.leaf_of[i]
    }
    /// Ancestor of leaf box `b` at level `l`.
    pub fn ancestor(&self, b: usize, l: usize) -> usize {
        b >> (self.d * (self.leaf_level - l))
    }
    /// Mean neighbour count over non-empty leaves (the `e` of the cost model).
    pub fn mean_neighbors(&self) -> f64 {
        let leaves = &self.leaves().boxes;
        let nonempty: Vec<&TreeBox> = leaves.iter().filter(|b| !b.is_empty()).collect();
        let total: usize = nonempty
            .iter()
            .map(|b| b.neighbors.iter().filter(|&&n| !leaves[n].is_empty()).count())
            .sum();
        total as f64 / nonempty.len().max(1) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> PointSet {
        PointSet::new(xs.to_vec(), Domain::new(&[0.0], &[4.0]).unwrap()).unwrap()
    }

    #[test]
    fn separation_examples() {
        assert_eq!(line(&[0.0, 1.0, 3.0]).separation_distance().unwrap(), 0.5);
        let r = PointSet::new(vec![0.5, 0.5], Domain::unit(1));
        assert!(matches!(r, Err(Error::ZeroSeparation(0, 1))));
        let r = PointSet::new(vec![1.5], Domain::unit(1));
        assert!(matches!(r, Err(Error::OutsideDomain { index: 0 })));
    }

    #[test]
    fn sweep_matches_brute_force() {
        let ps = generate_quasiuniform(900, Domain::unit(2), 11, 0.6).unwrap();
        let a = ps.closest_pair_brute().0;
        let b = ps.closest_pair_sweep().0;
        assert_eq!(a, b);
    }

    #[test]
    fn mesh_norm_examples() {
        let single = PointSet::new(vec![0.5], Domain::unit(1)).unwrap();
        assert!((mesh_norm(&single, 101).unwrap() - 0.5).abs() < 1e-12);
        let xs: Vec<f64> = (0..11).map(|i| i as f64 / 10.0).collect();
        let ps = PointSet::new(xs, Domain::unit(1)).unwrap();
        let h = mesh_norm(&ps, 201).unwrap();
        assert!((h - 0.05).abs() <= probe_slack(ps.domain(), 201) + 1e-12);
        assert!(mesh_norm(&ps, 10).is_err());
    }

    #[test]
    fn lattice_ratio_2d() {
        let ps = generate_quasiuniform(100, Domain::unit(2), 0, 0.0).unwrap();
        let ratio = ps.uniformity_ratio(256).unwrap();
        assert!(ratio <= 2.0, "{ratio}");
    }

    #[test]
    fn generator_is_deterministic() {
        let a = generate_quasiuniform(50, Domain::unit(2), 9, 0.4).unwrap();
        let b = generate_quasiuniform(50, Domain::unit(2), 9, 0.4).unwrap();
        assert_eq!(a.coords(), b.coords());
        let c = generate_quasiuniform(50, Domain::unit(2), 10, 0.4).unwrap();
        assert_ne!(a.coords(), c.coords());
    }

    #[test]
    fn morton_round_trip() {
        for ix in 0..16 {
            for iy in 0..16 {
                assert_eq!(morton_decode(morton_encode(ix, iy, 2), 2), (ix, iy));
            }
        }
    }

    #[test]
    fn four_box_line() {
        let ps = generate_quasiuniform(8, Domain::unit(1), 0, 0.0).unwrap();
        let t = build_tree(&ps, 2).unwrap();
        let lv = t.level(2);
        assert_eq!(lv.boxes.len(), 4);
        assert_eq!(lv.boxes[0].neighbors, vec![0, 1]);
        // Box 2 is not adjacent to box 0, and both are children of
        // neighbouring parents.
        assert_eq!(lv.boxes[0].interaction, vec![2, 3]);
        assert_eq!(lv.boxes[1].interaction, vec![3]);
        assert!(build_tree(&ps, 1).is_err());
    }

    #[test]
    fn quadtree_level_two() {
        let ps = generate_quasiuniform(64, Domain::unit(2), 0, 0.0).unwrap();
        let t = build_tree(&ps, 2).unwrap();
        let lv = t.level(2);
        assert_eq!(lv.boxes.len(), 16);
        let interior = morton_encode(1, 1, 2);
        assert_eq!(lv.boxes[interior].neighbors.len(), 9);
        for (a, b) in lv.boxes.iter().enumerate() {
            assert!(b.interaction.len() <= 27);
            for &c in &b.interaction {
                let o = &lv.boxes[c];
                let dist = ((b.center[0] - o.center[0]).powi(2) + (b.center[1] - o.center[1]).powi(2)).sqrt();
                assert!(dist >= 2.0 * lv.side[0] - 1e-12, "{a} {c}");
                assert!(o.interaction.contains(&a));
            }
        }
    }

    #[test]
    fn box_cap() {
        let ps = generate_quasiuniform(16, Domain::unit(2), 0, 0.0).unwrap();
        assert!(matches!(build_tree_with_cap(&ps, 8, 1000), Err(Error::TreeTooDeep { .. })));
    }
}
