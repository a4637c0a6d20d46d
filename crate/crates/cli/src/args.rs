use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pbisim_core::game::Role;

#[derive(Parser, Debug)]
#[command(name = "pbisim", version, about = "Probabilistic bisimilarity for pLTSs and probabilistic pushdown automata")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse a model and report which subclasses it belongs to.
    Validate { file: PathBuf },
    /// Print the bisimulation classes of a finite pLTS.
    Classes { file: PathBuf },
    /// Decide or bound bisimilarity of two states or configurations.
    Check {
        file: PathBuf,
        left: String,
        right: String,
        /// Approximant bound for bounded checking and witness search.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
        /// Most states to materialize when exploring a pPDA.
        #[arg(long, default_value_t = 20_000)]
        budget: usize,
    },
    /// Emit the nondeterministic system L′ (plts) or its pPDA encodings.
    Reduce {
        file: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<ReduceMode>,
    },
    /// Generate an instance with a manifest of expected verdicts.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Norm table of a pBPA.
    Norms { file: PathBuf },
    /// Play the bisimulation game in the terminal.
    Play {
        file: PathBuf,
        left: String,
        right: String,
        #[arg(long, value_enum)]
        side: SideArg,
        #[arg(long)]
        horizon: usize,
        #[arg(long, default_value_t = 20_000)]
        budget: usize,
    },
    /// Serve the game-session HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Model files offered to clients, named by file stem.
        models: Vec<PathBuf>,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, Debug, ValueEnum)]
pub enum Method {
    Auto,
    Finite,
    Vpda,
    OcaFilter,
    Bounded,
}

#[derive(Copy, Clone, PartialEq, Eq, Debug, ValueEnum)]
pub enum ReduceMode {
    Plts,
    Stack,
    State,
}

#[derive(Copy, Clone, PartialEq, Eq, Debug, ValueEnum)]
pub enum SideArg {
    Attacker,
    Defender,
}

impl From<SideArg> for Role {
    fn from(s: SideArg) -> Role {
        match s {
            SideArg::Attacker => Role::Attacker,
            SideArg::Defender => Role::Defender,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct OutArgs {
    /// Directory for the generated files.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Base name of the generated files.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum GenKind {
    /// The pOCA of a one-letter alternating automaton.
    Afa {
        /// Reduce this `.afa` file instead of a random automaton.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        states: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest counter value listed in the manifest.
        #[arg(long, default_value_t = 4)]
        max_n: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// The pvPDA of a random pushdown reachability game.
    Game {
        #[arg(long, default_value_t = 3)]
        controls: usize,
        #[arg(long, default_value_t = 2)]
        symbols: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest reachable configuration graph accepted.
        #[arg(long, default_value_t = 60)]
        budget: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// An AND or OR gadget over a random pLTS.
    Gadget {
        #[arg(long, value_enum)]
        kind: GadgetKind,
        #[arg(long, default_value_t = 5)]
        states: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, Debug, ValueEnum)]
pub enum GadgetKind {
    And,
    Or,
}
