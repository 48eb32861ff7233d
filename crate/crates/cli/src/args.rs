use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "bandfmm", version, about = "Band-limited fast multipole summation for radial basis functions")]
pub struct Cli {
    /// Worker threads for the parallel kernels (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,
    /// Seed for every random quantity of the run.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Kernel, band-limited low-rank kernel and its spectrum on [0, 1].
    KernelDump(KernelDumpArgs),
    /// One fast (or direct) matrix-vector product.
    FmmMatvec(MatvecArgs),
    /// Two-cluster error surface over separations and truncations.
    AccuracySweep(SweepArgs),
    /// Timing of the direct, single-level and multilevel sums.
    Bench(BenchArgs),
    /// Interpolation solve with a Krylov method.
    Solve(SolveArgs),
    /// One-dimensional Kansa collocation RMS errors.
    Collocate1d(CollocateArgs),
    /// Reproduce the collocation and Lagrange interpolation tables.
    Tables(TablesArgs),
}

#[derive(Args, Debug, Clone)]
pub struct KernelArgs {
    /// Kernel as `name:param=value`, e.g. `imq:c=1`.
    #[arg(long, default_value = "imq:c=1")]
    pub kernel: String,
    /// Band limit.
    #[arg(long, default_value_t = std::f64::consts::PI)]
    pub sigma: f64,
}

#[derive(Args, Debug, Clone)]
pub struct FmmArgs {
    /// Frequency nodes per dimension (leaf level for the multilevel sum).
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..=1 << 16))]
    pub m: Option<u32>,
    /// Leaf level of the box tree.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=24))]
    pub levels: Option<u32>,
    /// Lagrange stencil width of the level transfers.
    #[arg(long = "stencil-k", default_value_t = 10, value_parser = clap::value_parser!(u32).range(2..=64))]
    pub stencil_k: u32,
    /// Halve sigma per level instead of doubling the node count.
    #[arg(long)]
    pub scaled_levels: bool,
}

#[derive(Args, Debug, Clone)]
pub struct PointArgs {
    /// Point CSV (`x[,y]` per row).
    #[arg(long, conflicts_with = "random")]
    pub points: Option<PathBuf>,
    /// Generate this many quasi-uniform points instead of reading a file.
    #[arg(long)]
    pub random: Option<usize>,
    /// Dimension of generated points.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=2))]
    pub dim: u32,
    /// Upper end of the generated point box `[0, L]^d`.
    #[arg(long, default_value_t = 1.0)]
    pub extent: f64,
}

#[derive(Args, Debug, Clone)]
pub struct KernelDumpArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long, default_value_t = 128, value_parser = clap::value_parser!(u32).range(2..=1 << 16))]
    pub m: u32,
    /// Lattice points on [0, 1].
    #[arg(long, default_value_t = 101)]
    pub samples: usize,
    /// Output directory (kernel.csv, spectrum.csv, grid.csv).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Single,
    Direct,
    Mlfmm,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Near {
    Original,
    Bandlimited,
}

#[derive(Args, Debug, Clone)]
pub struct MatvecArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub fmm: FmmArgs,
    #[command(flatten)]
    pub points: PointArgs,
    /// Weight CSV, one value per point (default: seeded U(-1, 1)).
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::Single)]
    pub mode: Mode,
    /// Kernel used between neighbouring boxes (and by the direct mode).
    #[arg(long, value_enum, default_value_t = Near::Original)]
    pub near: Near,
    /// Write multipole coefficients per level and box to this CSV.
    #[arg(long)]
    pub dump_expansions: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Cluster centre distances.
    #[arg(long = "r", value_delimiter = ',', default_values_t = [2.0, 4.0, 8.0])]
    pub rs: Vec<f64>,
    /// Truncations.
    #[arg(long = "m", value_delimiter = ',', default_values_t = [16u32, 32, 64, 128])]
    pub ms: Vec<u32>,
    /// Points per cluster.
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchMethod {
    Direct,
    Single,
    Mlfmm,
}

#[derive(Args, Debug, Clone)]
pub struct BenchArgs {
    #[arg(long, default_value = "imq:c=1")]
    pub kernel: String,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [BenchMethod::Direct, BenchMethod::Single, BenchMethod::Mlfmm])]
    pub methods: Vec<BenchMethod>,
    /// Sizes `2^a ..= 2^b`, given as `a..b`.
    #[arg(long, default_value = "10..16")]
    pub exponents: String,
    #[arg(long, default_value_t = 2)]
    pub reps: usize,
    /// Refuse to start when the projected run time exceeds this many seconds.
    #[arg(long, default_value_t = 600.0)]
    pub budget: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackendArg {
    Dense,
    Single,
    Mlfmm,
}

#[derive(Args, Debug, Clone)]
pub struct SolveArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub fmm: FmmArgs,
    #[command(flatten)]
    pub points: PointArgs,
    /// Right-hand side CSV (default: seeded U(-1, 1)).
    #[arg(long)]
    pub rhs: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = BackendArg::Dense)]
    pub backend: BackendArg,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
    /// Solve with the band-limited matrix.
    #[arg(long)]
    pub bandlimited: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct CollocateArgs {
    /// Node counts, e.g. `9..15`.
    #[arg(long, default_value = "9..15")]
    pub n: String,
    #[arg(long, default_value = "mq:c=1")]
    pub kernel: String,
    /// Also solve with the band-limited kernel.
    #[arg(long)]
    pub bandlimited: bool,
    /// Band limit of the band-limited column (default: 2 pi / q).
    #[arg(long, requires = "bandlimited")]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct TablesArgs {
    /// Output directory (table4.csv, table5.csv).
    #[arg(long)]
    pub out: PathBuf,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn common_flags_parse() {
        let c = Cli::try_parse_from(["bandfmm", "--threads", "2", "fmm-matvec", "--random", "9", "--mode", "mlfmm", "--stencil-k", "8", "--out", "o.csv"]).unwrap();
        assert_eq!(c.threads, Some(2));
        match c.command {
            Command::FmmMatvec(a) => {
                assert_eq!(a.mode, Mode::Mlfmm);
                assert_eq!(a.fmm.stencil_k, 8);
            }
            other => panic!("{other:?}"),
        }
        assert!(Cli::try_parse_from(["bandfmm", "--threads", "0", "tables", "--out", "t"]).is_err());
        assert!(Cli::try_parse_from(["bandfmm", "fmm-matvec", "--points", "p.csv", "--random", "3", "--out", "o"]).is_err());
    }
}
