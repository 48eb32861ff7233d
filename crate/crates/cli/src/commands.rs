use crate::args::*;
use bandfmm::bandlimit::bandlimited_at_origin;
use bandfmm::experiments::{
    accuracy_sweep, complexity_probe, kernel_dump, random_weights, spectrum_check, table4, table5, Method, REFERENCE_TABLE4,
    TABLE4_AGREEMENT, TABLE4_FACTOR,
};
use bandfmm::fmm::{direct_matvec, single_level_leaf, NearField, SingleLevelFmm};
use bandfmm::geometry::{build_tree, generate_quasiuniform, Domain, PointSet};
use bandfmm::io::{fmt_f64, parse_range, read_points, read_values, write_values, CsvSink};
use bandfmm::mlfmm::{multilevel_leaf, upsweep, LevelGrids, LevelMode, MultilevelFmm, TOP_LEVEL};
use bandfmm::solver::{solve_collocation_1d, solve_interpolation, Backend, FmmOptions, InterpolationProblem};
use bandfmm::{Error, RadialKernel, Result};
use num_complex::Complex64;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

const DEFAULT_M: usize = 64;
const MLFMM_OCCUPANCY: usize = 32;

/// One embedded pass/fail check of a command.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check { name: name.into(), value, limit, pass: value <= limit }
    }
}

/// Shared run context: metadata written at the top of every CSV.
pub struct Ctx {
    pub seed: u64,
    pub command_line: String,
}

impl Ctx {
    fn meta(&self, extra: Vec<(&'static str, String)>) -> Vec<(&'static str, String)> {
        let mut m = vec![
            ("command", self.command_line.clone()),
            ("seed", self.seed.to_string()),
            ("version", env!("CARGO_PKG_VERSION").to_string()),
        ];
        m.extend(extra);
        m
    }

    fn sink(&self, path: &Path, extra: Vec<(&'static str, String)>, header: &[&str]) -> Result<CsvSink<BufWriter<File>>> {
        CsvSink::new(BufWriter::new(File::create(path)?), &self.meta(extra), header)
    }
}

fn parse_kernel(spec: &str) -> Result<RadialKernel> {
    let k: RadialKernel = spec.parse()?;
    k.validate()?;
    Ok(k)
}

fn load_points(a: &PointArgs, seed: u64) -> Result<PointSet> {
    match (&a.points, a.random) {
        (Some(p), _) => read_points(BufReader::new(File::open(p)?)),
        (None, Some(n)) => {
            let d = a.dim as usize;
            generate_quasiuniform(n, Domain::new(&vec![0.0; d], &vec![a.extent; d])?, seed, 0.5)
        }
        (None, None) => Err(Error::Config("either --points or --random is required".into())),
    }
}

fn load_vector(path: Option<&Path>, n: usize, seed: u64, what: &str) -> Result<Vec<f64>> {
    let v = match path {
        Some(p) => read_values(BufReader::new(File::open(p)?))?,
        None => random_weights(n, seed),
    };
    if v.len() != n {
        return Err(Error::InvalidArgument(format!("{} {what} values for {n} points", v.len())));
    }
    Ok(v)
}

fn level_mode(f: &FmmArgs) -> LevelMode {
    if f.scaled_levels {
        LevelMode::Scaled
    } else {
        LevelMode::default()
    }
}

pub fn kernel_dump_cmd(ctx: &Ctx, a: &KernelDumpArgs) -> Result<Vec<Check>> {
    let k = parse_kernel(&a.kernel.kernel)?;
    let sigma = a.kernel.sigma;
    let m = a.m as usize;
    let dump = kernel_dump(&k, sigma, m, a.samples)?;
    fs::create_dir_all(&a.out)?;
    let extra = || vec![("kernel", a.kernel.kernel.clone()), ("sigma", fmt_f64(sigma)), ("m", m.to_string())];

    let mut s = ctx.sink(&a.out.join("kernel.csv"), extra(), &["r", "phi", "phi_fmm"])?;
    for i in 0..dump.r.len() {
        s.row(&[fmt_f64(dump.r[i]), fmt_f64(dump.phi[i]), fmt_f64(dump.phi_fmm[i])])?;
    }
    s.finish()?;

    let mut s = ctx.sink(&a.out.join("spectrum.csv"), extra(), &["node_index", "c_value_re", "c_value_im"])?;
    for (i, c) in dump.factors.c_vals.iter().enumerate() {
        s.row(&[i.to_string(), fmt_f64(c.re), fmt_f64(c.im)])?;
    }
    s.finish()?;

    let grid = &dump.factors.grid;
    let mut s = ctx.sink(&a.out.join("grid.csv"), extra(), &["dim_index", "node", "weight"])?;
    for (i, xi) in grid.nodes_1d().iter().enumerate() {
        s.row(&[i.to_string(), fmt_f64(*xi), fmt_f64(grid.weight_1d())])?;
    }
    s.finish()?;

    let c = spectrum_check(&dump.factors);
    let mut checks = vec![Check { name: format!("spectrum: {}", c.name), value: c.value, limit: c.threshold, pass: c.pass }];
    if !k.is_generalized() {
        let exact = bandlimited_at_origin(&k, sigma, 1)?;
        let rel = (dump.phi_fmm[0] - exact).abs() / exact.abs();
        checks.push(Check::at_most("phi_fmm(0) vs phi_sigma(0)", rel, 0.05));
    }
    Ok(checks)
}

pub fn fmm_matvec(ctx: &Ctx, a: &MatvecArgs) -> Result<Vec<Check>> {
    let k = parse_kernel(&a.kernel.kernel)?;
    let sigma = a.kernel.sigma;
    let ps = load_points(&a.points, ctx.seed)?;
    let w = load_vector(a.weights.as_deref(), ps.len(), ctx.seed, "weight")?;
    let near = match a.near {
        Near::Original => NearField::Original,
        Near::Bandlimited => NearField::BandLimited,
    };
    let (n, d) = (ps.len(), ps.dim());
    let m = a.fmm.m.map_or(DEFAULT_M, |m| m as usize);
    let mut extra = vec![("kernel", a.kernel.kernel.clone()), ("sigma", fmt_f64(sigma)), ("mode", format!("{:?}", a.mode).to_lowercase())];
    let values = match a.mode {
        Mode::Direct => {
            if a.dump_expansions.is_some() {
                return Err(Error::Config("--dump-expansions needs a fast mode".into()));
            }
            direct_matvec(&k, &ps, &w, near == NearField::BandLimited, sigma)?.values
        }
        Mode::Single => {
            let tree = build_tree(&ps, a.fmm.levels.map_or_else(|| single_level_leaf(n, d), |l| l as usize))?;
            let fmm = SingleLevelFmm::new(k, sigma, m, near, &ps, &tree)?;
            if let Some(path) = &a.dump_expansions {
                let levels = [(tree.leaf_level(), fmm.aggregate(&w))];
                dump_expansions(ctx, path, &levels)?;
            }
            extra.push(("m", m.to_string()));
            extra.push(("leaf_level", tree.leaf_level().to_string()));
            fmm.apply(&w)?.values
        }
        Mode::Mlfmm => {
            let tree = build_tree(&ps, a.fmm.levels.map_or_else(|| multilevel_leaf(n, d, MLFMM_OCCUPANCY), |l| l as usize))?;
            let grids = LevelGrids::new(&k, sigma, m, d, tree.leaf_level(), level_mode(&a.fmm), a.fmm.stencil_k as usize)?;
            if let Some(path) = &a.dump_expansions {
                let mp = upsweep(&tree, &grids, &ps, &w)?;
                let levels: Vec<_> = mp.levels.iter().enumerate().map(|(i, l)| (i + TOP_LEVEL, l.clone())).collect();
                dump_expansions(ctx, path, &levels)?;
            }
            extra.push(("m_leaf", m.to_string()));
            extra.push(("leaf_level", tree.leaf_level().to_string()));
            extra.push(("stencil_k", a.fmm.stencil_k.to_string()));
            MultilevelFmm::new(grids, near, &ps, &tree)?.apply(&w)?.values
        }
    };
    write_values(BufWriter::new(File::create(&a.out)?), "value", &values, &ctx.meta(extra))?;
    Ok(Vec::new())
}

fn dump_expansions(ctx: &Ctx, path: &Path, levels: &[(usize, Vec<Vec<Complex64>>)]) -> Result<()> {
    let mut s = ctx.sink(path, Vec::new(), &["level", "box", "node", "coeff_re", "coeff_im"])?;
    for (level, boxes) in levels {
        for (b, coeffs) in boxes.iter().enumerate() {
            for (node, c) in coeffs.iter().enumerate() {
                s.row(&[level.to_string(), b.to_string(), node.to_string(), fmt_f64(c.re), fmt_f64(c.im)])?;
            }
        }
    }
    s.finish()?;
    Ok(())
}

/// Slack of the non-increasing-in-M check.
const SWEEP_SLACK: f64 = 1.1;
/// Errors below this are rounding noise and carry no trend.
const SWEEP_FLOOR: f64 = 1e-12;

pub fn accuracy_sweep_cmd(ctx: &Ctx, a: &SweepArgs) -> Result<Vec<Check>> {
    let k = parse_kernel(&a.kernel.kernel)?;
    let ms: Vec<usize> = a.ms.iter().map(|&m| m as usize).collect();
    let rows = accuracy_sweep(&k, a.kernel.sigma, &a.rs, &ms, a.n, ctx.seed)?;
    let extra = vec![("kernel", a.kernel.kernel.clone()), ("sigma", fmt_f64(a.kernel.sigma)), ("n", a.n.to_string())];
    let mut s = ctx.sink(&a.out, extra, &["R", "M", "error", "error_bandlimited"])?;
    for r in &rows {
        s.row(&[fmt_f64(r.r), r.m.to_string(), fmt_f64(r.error), fmt_f64(r.error_bandlimited)])?;
    }
    s.finish()?.flush()?;

    let mut checks = Vec::new();
    for chunk in rows.chunks(ms.len()) {
        let worst = chunk.windows(2).map(|w| w[1].error / w[0].error).fold(0.0, f64::max);
        if chunk.len() > 1 {
            checks.push(Check::at_most(format!("error non-increasing in M at R={}", chunk[0].r), worst, SWEEP_SLACK));
            let worst_bl = chunk
                .windows(2)
                .filter(|w| w[0].error_bandlimited > SWEEP_FLOOR)
                .map(|w| w[1].error_bandlimited / w[0].error_bandlimited)
                .fold(0.0, f64::max);
            checks.push(Check::at_most(format!("band-limited error non-increasing in M at R={}", chunk[0].r), worst_bl, SWEEP_SLACK));
        }
    }
    if matches!(k, RadialKernel::InverseMultiquadric { .. }) && a.rs.len() > 1 {
        let m_last = *ms.iter().max().unwrap_or(&0);
        let at_m: Vec<_> = rows.iter().filter(|r| r.m == m_last).collect();
        let mut sorted = at_m.clone();
        sorted.sort_by(|x, y| x.r.total_cmp(&y.r));
        let worst = sorted.windows(2).map(|w| w[1].error / w[0].error).fold(0.0, f64::max);
        checks.push(Check::at_most(format!("error non-increasing in R at M={m_last}"), worst, 1.0));
    }
    Ok(checks)
}

/// Exponents used to project the cost of the largest size.
fn cost_exponent(m: Method) -> f64 {
    match m {
        Method::Direct => 2.0,
        Method::Single => 1.5,
        Method::Multilevel => 1.3,
    }
}

fn slope_range(m: Method) -> (f64, f64) {
    match m {
        Method::Direct => (1.85, 2.15),
        Method::Single => (1.3, 1.7),
        Method::Multilevel => (0.0, 1.3),
    }
}

pub fn bench(ctx: &Ctx, a: &BenchArgs) -> Result<Vec<Check>> {
    let k = parse_kernel(&a.kernel)?;
    let exps: Vec<usize> = parse_range(&a.exponents)?.collect();
    if exps.is_empty() || exps[exps.len() - 1] > 30 {
        return Err(Error::InvalidArgument(format!("exponents '{}' out of range", a.exponents)));
    }
    let sizes: Vec<usize> = exps.iter().map(|&e| 1usize << e).collect();
    let methods: Vec<Method> = a
        .methods
        .iter()
        .map(|m| match m {
            BenchMethod::Direct => Method::Direct,
            BenchMethod::Single => Method::Single,
            BenchMethod::Mlfmm => Method::Multilevel,
        })
        .collect();

    if sizes.len() < 2 {
        return Err(Error::InvalidArgument("bench needs at least two sizes".into()));
    }
    // Calibrate on the two smallest sizes and refuse runs that cannot finish.
    let mut projected = 0.0;
    for &m in &methods {
        let t1 = complexity_probe(&k, m, &sizes[..2], 1, ctx.seed)?.rows[1].time.max(1e-6);
        let p = cost_exponent(m);
        projected += a.reps as f64 * sizes.iter().map(|&n| t1 * (n as f64 / sizes[1] as f64).powf(p)).sum::<f64>();
    }
    if projected > a.budget {
        return Err(Error::Config(format!("projected run time {projected:.1} s exceeds the budget of {} s", a.budget)));
    }

    let results = methods.iter().map(|&m| complexity_probe(&k, m, &sizes, a.reps, ctx.seed)).collect::<Result<Vec<_>>>()?;
    let mut extra = vec![("kernel", a.kernel.clone()), ("reps", a.reps.to_string())];
    for r in &results {
        extra.push((slope_key(r.method), fmt_f64(r.slope)));
    }
    let mut s = ctx.sink(&a.out, extra, &["method", "n", "time", "near_pairs", "far_work"])?;
    let mut checks = Vec::new();
    for r in &results {
        for row in &r.rows {
            s.row(&[r.method.name().to_string(), row.n.to_string(), fmt_f64(row.time), row.near_pairs.to_string(), row.far_work.to_string()])?;
        }
        let (lo, hi) = slope_range(r.method);
        println!("{} slope {:.3}", r.method.name(), r.slope);
        if sizes.len() >= 3 {
            checks.push(Check { name: format!("{} slope in [{lo}, {hi}]", r.method.name()), value: r.slope, limit: hi, pass: r.slope >= lo && r.slope <= hi });
        }
    }
    s.finish()?;
    Ok(checks)
}

fn slope_key(m: Method) -> &'static str {
    match m {
        Method::Direct => "slope_direct",
        Method::Single => "slope_single",
        Method::Multilevel => "slope_multilevel",
    }
}

pub fn solve(ctx: &Ctx, a: &SolveArgs) -> Result<Vec<Check>> {
    let k = parse_kernel(&a.kernel.kernel)?;
    let ps = load_points(&a.points, ctx.seed)?;
    let rhs = load_vector(a.rhs.as_deref(), ps.len(), ctx.seed, "right-hand side")?;
    let backend = match a.backend {
        BackendArg::Dense => Backend::Dense,
        BackendArg::Single => Backend::SingleFmm,
        BackendArg::Mlfmm => Backend::Mlfmm,
    };
    let fmm = FmmOptions {
        sigma: a.kernel.sigma,
        m_per_dim: a.fmm.m.map_or(DEFAULT_M, |m| m as usize),
        leaf_level: a.fmm.levels.map(|l| l as usize),
        stencil: a.fmm.stencil_k as usize,
        level_mode: level_mode(&a.fmm),
        ..FmmOptions::default()
    };
    let prob = InterpolationProblem { kernel: k, ps: &ps, rhs, backend, band_limited: a.bandlimited, tol: a.tol, max_iter: a.max_iter, fmm };
    let sol = solve_interpolation(&prob)?;
    let st = &sol.stats;
    let extra = vec![
        ("kernel", a.kernel.kernel.clone()),
        ("backend", backend.to_string()),
        ("method", format!("{:?}", st.method).to_lowercase()),
        ("iterations", st.iterations.to_string()),
        ("matvecs", st.matvecs.to_string()),
        ("residual", fmt_f64(st.residual)),
    ];
    write_values(BufWriter::new(File::create(&a.out)?), "lambda", &sol.lambda, &ctx.meta(extra))?;
    Ok(vec![Check::at_most("relative residual", st.residual, a.tol)])
}

pub fn collocate1d(ctx: &Ctx, a: &CollocateArgs) -> Result<Vec<Check>> {
    let k = parse_kernel(&a.kernel)?;
    let ns: Vec<usize> = parse_range(&a.n)?.collect();
    let mut s = ctx.sink(
        &a.out,
        vec![("kernel", a.kernel.clone()), ("domain", "[0,1]".into())],
        &["N", "rms_plain", "rms_bandlimited", "sigma", "pass"],
    )?;
    let mut checks = Vec::new();
    let mut prev = f64::INFINITY;
    for &n in &ns {
        let plain = solve_collocation_1d(n, &k, None, (0.0, 1.0))?.rms;
        let (bl, sigma) = if a.bandlimited {
            // Default band 2 pi / q with separation radius q = 0.5 / (n - 1).
            let sigma = a.sigma.unwrap_or(4.0 * std::f64::consts::PI * (n - 1) as f64);
            (Some(solve_collocation_1d(n, &k, Some(sigma), (0.0, 1.0))?.rms), Some(sigma))
        } else {
            (None, None)
        };
        if prev.is_finite() {
            checks.push(Check::at_most(format!("N={n} rms below N={}", n - 1), plain / prev, 1.0));
        }
        let mut row_ok = plain < prev;
        prev = plain;
        if let Some(&(_, reference, _)) = REFERENCE_TABLE4.iter().find(|r| r.0 == n) {
            let ratio = (plain / reference).max(reference / plain);
            row_ok &= ratio <= TABLE4_FACTOR;
            checks.push(Check::at_most(format!("N={n} rms within factor of reference"), ratio, TABLE4_FACTOR));
        }
        if let (Some(b), true) = (bl, n <= 14) {
            let gap = (b - plain).abs() / plain;
            row_ok &= gap <= TABLE4_AGREEMENT;
            checks.push(Check::at_most(format!("N={n} band-limited agreement"), gap, TABLE4_AGREEMENT));
        }
        s.row(&[n.to_string(), fmt_f64(plain), bl.map(fmt_f64).unwrap_or_default(), sigma.map(fmt_f64).unwrap_or_default(), row_ok.to_string()])?;
    }
    s.finish()?;
    Ok(checks)
}

pub fn tables(ctx: &Ctx, a: &TablesArgs) -> Result<Vec<Check>> {
    fs::create_dir_all(&a.out)?;
    let mq = RadialKernel::Multiquadric { c: 1.0 };
    let mut checks = Vec::new();

    let t4 = table4(9..=15, &mq)?;
    let mut s = ctx.sink(
        &a.out.join("table4.csv"),
        vec![("kernel", "mq:c=1".into()), ("domain", "[0,1]".into())],
        &["N", "rms_plain", "rms_bandlimited", "sigma", "reference", "pass"],
    )?;
    for r in &t4 {
        s.row(&[r.n.to_string(), fmt_f64(r.rms_plain), fmt_f64(r.rms_bandlimited), fmt_f64(r.sigma), fmt_f64(r.reference), r.pass.to_string()])?;
        checks.push(Check { name: format!("table4 N={}", r.n), value: r.rms_plain, limit: r.reference * TABLE4_FACTOR, pass: r.pass });
    }
    s.finish()?;

    let t5 = table5()?;
    let mut s = ctx.sink(&a.out.join("table5.csv"), vec![("a", "1".into()), ("sigma", fmt_f64(std::f64::consts::PI))], &["K", "sup_error", "reference", "pass"])?;
    for r in &t5 {
        s.row(&[r.k.to_string(), fmt_f64(r.sup_error), fmt_f64(r.reference), r.pass.to_string()])?;
        checks.push(Check { name: format!("table5 K={}", r.k), value: r.sup_error, limit: r.reference * 5.0, pass: r.pass });
    }
    s.finish()?;
    Ok(checks)
}
