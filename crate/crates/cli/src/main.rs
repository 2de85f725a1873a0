use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gi_cli::{
    parse_arity, parse_input, run, Command, InputError, JobSpec, OutputFormat, EXIT_INPUT,
};
use gi_core::SearchBounds;

#[derive(Parser)]
#[command(
    name = "gi",
    version,
    about = "Invariants of products of shift-of-finite-type groupoids"
)]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Largest number of candidates examined by one automorphism or unit search.
    #[arg(long, env = "GI_AUT_BOUND", global = true)]
    aut_bound: Option<u64>,
    /// Largest finite group whose elements or automorphisms are enumerated.
    #[arg(long, env = "GI_GROUP_BOUND", global = true)]
    group_bound: Option<u64>,
    /// Largest generator index instantiated by relations-check.
    #[arg(long, env = "GI_INDEX_BOUND", default_value_t = 5, global = true)]
    index_bound: usize,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check that every factor is a valid adjacency matrix.
    Validate { input: String },
    /// Bowen-Franks group, unit class and determinant of every factor.
    Invariants { input: String },
    /// Homology of the product groupoid.
    Homology { input: String },
    /// K-groups of the product groupoid.
    KGroups { input: String },
    /// Compare even/odd homology with K_0/K_1.
    HkCheck { input: String },
    /// Decide isomorphism of two product groupoids.
    Classify { left: String, right: String },
    /// Decide Morita equivalence of two single factors.
    Morita { left: String, right: String },
    /// Abelianization of the topological full group.
    Abelianization { input: String },
    /// Decide the strong AH property.
    StrongAh { input: String },
    /// Verify the relations of W_{n,k} on table elements.
    RelationsCheck {
        /// Comma-separated arities k(1),...,k(n).
        #[arg(long)]
        k: String,
    },
    /// Find all characters of W_{n,k} into Z/modulus.
    CharacterSearch {
        #[arg(long)]
        k: String,
        #[arg(long)]
        modulus: u64,
    },
    /// Check that two baker's maps compose to the third.
    BakerCheck {
        #[arg(long)]
        k: String,
    },
}

fn job(cli: Cli) -> Result<JobSpec, InputError> {
    let mut bounds = SearchBounds::default();
    if let Some(b) = cli.aut_bound {
        bounds.max_candidates = b;
    }
    if let Some(b) = cli.group_bound {
        bounds.max_group_order = b;
    }
    let format = match cli.format {
        Format::Text => OutputFormat::Text,
        Format::Json => OutputFormat::Json,
    };
    let mut modulus = 0;
    let mut arity = None;
    let (command, inputs) = match cli.command {
        Cmd::Validate { input } => (Command::Validate, vec![input]),
        Cmd::Invariants { input } => (Command::Invariants, vec![input]),
        Cmd::Homology { input } => (Command::Homology, vec![input]),
        Cmd::KGroups { input } => (Command::KGroups, vec![input]),
        Cmd::HkCheck { input } => (Command::HkCheck, vec![input]),
        Cmd::Classify { left, right } => (Command::Classify, vec![left, right]),
        Cmd::Morita { left, right } => (Command::Morita, vec![left, right]),
        Cmd::Abelianization { input } => (Command::Abelianization, vec![input]),
        Cmd::StrongAh { input } => (Command::StrongAh, vec![input]),
        Cmd::RelationsCheck { k } => {
            arity = Some(parse_arity(&k)?);
            (Command::RelationsCheck, vec![])
        }
        Cmd::CharacterSearch { k, modulus: m } => {
            arity = Some(parse_arity(&k)?);
            modulus = m;
            (Command::CharacterSearch, vec![])
        }
        Cmd::BakerCheck { k } => {
            arity = Some(parse_arity(&k)?);
            (Command::BakerCheck, vec![])
        }
    };
    let inputs = inputs
        .iter()
        .map(|s| parse_input(s))
        .collect::<Result<_, _>>()?;
    Ok(JobSpec {
        command,
        inputs,
        arity,
        modulus,
        format,
        bounds,
        index_bound: cli.index_bound,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let job = match job(cli) {
        Ok(j) => j,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT as u8);
        }
    };
    let out = run(&job);
    if let Some(d) = &out.diagnostic {
        eprintln!("error: {d}");
    }
    if let Some(r) = &out.report {
        print!("{}", r.render(job.format));
    }
    ExitCode::from(out.exit_code as u8)
}
