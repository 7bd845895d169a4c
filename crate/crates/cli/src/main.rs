use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hint_core::exactlin::{parse_rational, Field};
use hint_core::height::Rational;
use hint_core::verdict::DEFAULT_BUDGET;

mod commands;
mod repro;

#[derive(Parser, Debug)]
#[command(name = "hint", version, about = "Height-interleavings of persistence modules over finite posets")]
struct Cli {
    /// gf2, gf3, gfp:P or rational; overrides the field declared in module files.
    #[arg(long, global = true)]
    field: Option<Field>,
    /// Candidate cap per search.
    #[arg(long, global = true, env = "HINT_BUDGET", default_value_t = DEFAULT_BUDGET,
          value_parser = clap::value_parser!(u64).range(1..))]
    budget: u64,
    /// Seed for randomized subcommands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

#[derive(clap::Args, Debug, Clone)]
pub struct Base {
    /// Poset JSON.
    #[arg(long)]
    pub poset: PathBuf,
    /// Height JSON (phi, rho, diag or strict).
    #[arg(long)]
    pub height: Option<PathBuf>,
}

#[derive(clap::Args, Debug, Clone)]
pub struct Pair {
    #[arg(long)]
    pub m: PathBuf,
    #[arg(long)]
    pub n: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ScanArg {
    Bisect,
    Exhaustive,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FunctorKind {
    #[value(name = "L")]
    L,
    #[value(name = "R")]
    R,
    #[value(name = "E")]
    E,
    #[value(name = "Im")]
    Im,
    #[value(name = "Ker")]
    Ker,
    #[value(name = "TL")]
    TL,
    #[value(name = "TR")]
    TR,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum NatName {
    #[value(name = "e")]
    E,
    #[value(name = "etaL")]
    EtaL,
    #[value(name = "etaR")]
    EtaR,
    #[value(name = "muL")]
    MuL,
    #[value(name = "muR")]
    MuR,
    #[value(name = "kappaL")]
    KappaL,
    #[value(name = "kappaR")]
    KappaR,
    #[value(name = "tauL")]
    TauL,
    #[value(name = "tauR")]
    TauR,
    #[value(name = "thetaL")]
    ThetaL,
    #[value(name = "thetaR")]
    ThetaR,
    #[value(name = "sigmaL")]
    SigmaL,
    #[value(name = "sigmaR")]
    SigmaR,
    #[value(name = "xiL")]
    XiL,
    #[value(name = "xiR")]
    XiR,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and validate a poset, and optionally a height function and modules.
    Validate {
        #[command(flatten)]
        base: Base,
        #[arg(long = "module")]
        modules: Vec<PathBuf>,
    },
    /// Apply L, R, E, Im, Ker or an iterated T functor to a module.
    Functor {
        #[command(flatten)]
        base: Base,
        #[arg(long)]
        module: PathBuf,
        #[arg(long)]
        kind: FunctorKind,
        #[arg(long, value_parser = rational_arg)]
        r: Rational,
        #[arg(long, value_parser = rational_arg)]
        s: Option<Rational>,
    },
    /// Compute a canonical natural transformation at a module.
    Nat {
        #[command(flatten)]
        base: Base,
        #[arg(long)]
        module: PathBuf,
        #[arg(long)]
        name: NatName,
        #[arg(long, value_parser = rational_arg, default_value = "0")]
        r: Rational,
        #[arg(long, value_parser = rational_arg, default_value = "0")]
        s: Rational,
        #[arg(long, value_parser = rational_arg, default_value = "0")]
        c: Rational,
        /// For xiL/xiR: source poset of the order map.
        #[arg(long)]
        source: Option<PathBuf>,
        /// For xiL/xiR: order map JSON into the base poset.
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Search for an r-height-interleaving, or check a supplied one.
    Interleave {
        #[command(flatten)]
        base: Base,
        #[command(flatten)]
        pair: Pair,
        #[arg(long, value_parser = rational_arg)]
        r: Rational,
        /// Morphism JSON for p: M -> R_r N; requires --q.
        #[arg(long, requires = "q")]
        p: Option<PathBuf>,
        /// Morphism JSON for q: N -> R_r M.
        #[arg(long, requires = "p")]
        q: Option<PathBuf>,
    },
    /// Exact height-interleaving distance over the strata.
    Distance {
        #[command(flatten)]
        base: Base,
        #[command(flatten)]
        pair: Pair,
        #[arg(long, value_enum, default_value = "bisect")]
        scan: ScanArg,
    },
    /// Erosion-neighborhood distance.
    EnDistance {
        #[command(flatten)]
        base: Base,
        #[command(flatten)]
        pair: Pair,
        #[arg(long, value_enum, default_value = "bisect")]
        scan: ScanArg,
    },
    /// Connected-intersections check with a witness on failure.
    Cip {
        #[command(flatten)]
        base: Base,
    },
    /// Check the approximate intermediate-value property with tolerance c.
    Ivc {
        #[command(flatten)]
        base: Base,
        #[arg(long, value_parser = rational_arg)]
        c: Rational,
    },
    /// Smallest c with the intermediate-value property.
    CRho {
        #[command(flatten)]
        base: Base,
    },
    /// Supremum distance between two height functions on the same poset.
    Distortion {
        #[command(flatten)]
        base: Base,
        #[arg(long)]
        other: PathBuf,
    },
    /// Compare d along a pullback with d on the base poset.
    Pullback {
        #[command(flatten)]
        base: Base,
        #[command(flatten)]
        pair: Pair,
        /// Source poset of the order map.
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        map: PathBuf,
    },
    /// Transfer bounds along a Galois insertion into a larger poset. The height on
    /// --poset is the restriction of --big-height; --height, if given, must match it.
    Galois {
        #[command(flatten)]
        base: Base,
        #[command(flatten)]
        pair: Pair,
        #[arg(long)]
        big: PathBuf,
        #[arg(long)]
        big_height: PathBuf,
        #[arg(long)]
        iota: PathBuf,
        #[arg(long)]
        pi: PathBuf,
    },
    /// Cross-check the grid distance against the literal shift description.
    OracleGrid {
        /// Grid poset JSON; with --trials, a 3x3 grid is used when omitted.
        #[arg(long)]
        poset: Option<PathBuf>,
        #[arg(long, requires = "n")]
        m: Option<PathBuf>,
        #[arg(long, requires = "m")]
        n: Option<PathBuf>,
        /// Number of random module pairs, drawn from --seed.
        #[arg(long, conflicts_with = "m")]
        trials: Option<usize>,
    },
    /// Recompute a bundled worked example.
    Repro {
        #[command(subcommand)]
        example: repro::Example,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = commands::Ctx { field: cli.field, budget: cli.budget, seed: cli.seed };
    let result = match cli.command {
        Command::Validate { base, modules } => commands::validate(&ctx, &base, &modules),
        Command::Functor { base, module, kind, r, s } => commands::functor(&ctx, &base, &module, kind, &r, s.as_ref()),
        Command::Nat { base, module, name, r, s, c, source, map } => {
            commands::nat(&ctx, &base, &module, name, (&r, &s, &c), source.as_deref().zip(map.as_deref()))
        }
        Command::Interleave { base, pair, r, p, q } => commands::interleave(&ctx, &base, &pair, &r, p.as_deref().zip(q.as_deref())),
        Command::Distance { base, pair, scan } => commands::distance(&ctx, &base, &pair, scan),
        Command::EnDistance { base, pair, scan } => commands::en_distance(&ctx, &base, &pair, scan),
        Command::Cip { base } => commands::cip(&ctx, &base),
        Command::Ivc { base, c } => commands::ivc(&ctx, &base, &c),
        Command::CRho { base } => commands::c_rho(&ctx, &base),
        Command::Distortion { base, other } => commands::distortion(&ctx, &base, &other),
        Command::Pullback { base, pair, source, map } => commands::pullback(&ctx, &base, &pair, &source, &map),
        Command::Galois { base, pair, big, big_height, iota, pi } => {
            commands::galois(&ctx, &base, &pair, &big, &big_height, &iota, &pi)
        }
        Command::OracleGrid { poset, m, n, trials } => {
            commands::oracle_grid(&ctx, poset.as_deref(), m.as_deref().zip(n.as_deref()), trials)
        }
        Command::Repro { example } => repro::run(&ctx, &example),
    };
    match result {
        Ok(outcome) => commands::emit(&outcome, cli.output.as_deref()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
