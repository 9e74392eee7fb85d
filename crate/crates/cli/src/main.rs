use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use metaselect::dataset::{load_csv, load_nslkdd, ColumnKind, NSLKDD_POSITIVE, NSLKDD_TARGET};
use metaselect::experiment::{
    execute, parse_seed_override, recommend, write_reports, ExperimentManifest, RunOptions,
    SEED_ENV_VAR,
};
use metaselect::metafeatures::{extract, META_FEATURE_NAMES};
use metaselect::recommend::{clamp_recall, Ranking};
use metaselect::taxonomy::{filter_techniques, MappingRegistry, ProblemCharacterization};
use metaselect::Result;

#[derive(Parser)]
#[command(name = "metaselect", version, about = "Algorithm selection for binary attack detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the candidate techniques for a problem characterization.
    Characterize {
        characterization: PathBuf,
        /// `default` or a registry file.
        #[arg(long, default_value = "default")]
        registry: String,
    },
    /// Print the twelve meta-features of a dataset.
    Metafeatures(MetafeaturesArgs),
    /// Run the full experiment and write report.json, report.txt and report.csv.
    Experiment {
        manifest: PathBuf,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Record failed grid cells and continue.
        #[arg(long)]
        keep_going: bool,
    },
    /// Rank candidates for the manifest's test dataset using an exported meta model.
    Recommend { manifest: PathBuf },
    /// Registry maintenance.
    Taxonomy {
        #[command(subcommand)]
        command: TaxonomyCommand,
    },
}

#[derive(Args)]
struct MetafeaturesArgs {
    dataset: PathBuf,
    #[arg(long)]
    target: Option<String>,
    /// Positive (attack) label; defaults to the first label seen.
    #[arg(long)]
    positive: Option<String>,
    /// Read a headerless NSL-KDD file.
    #[arg(long)]
    nsl_kdd: bool,
    /// Force columns to be categorical.
    #[arg(long, value_delimiter = ',')]
    categorical: Vec<String>,
}

#[derive(Subcommand)]
enum TaxonomyCommand {
    /// Check a registry file and its rule tree.
    Validate { registry: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Characterize {
            characterization,
            registry,
        } => characterize(&characterization, &registry),
        Command::Metafeatures(args) => metafeatures(&args),
        Command::Experiment {
            manifest,
            out,
            keep_going,
        } => experiment(&manifest, &out, keep_going),
        Command::Recommend { manifest } => recommend_cmd(&manifest),
        Command::Taxonomy {
            command: TaxonomyCommand::Validate { registry },
        } => {
            let r = MappingRegistry::load(&registry)?;
            println!(
                "{}: valid ({} techniques, rule tree {})",
                registry.display(),
                r.techniques.len(),
                if r.rule_tree.is_some() { "present" } else { "absent" }
            );
            Ok(())
        }
    }
}

fn characterize(path: &Path, registry: &str) -> Result<()> {
    let registry = MappingRegistry::resolve(registry, None)?;
    let pc = ProblemCharacterization::load(path)?;
    let outcome = filter_techniques(&registry, &pc)?;
    if let Some(w) = &outcome.warning {
        eprintln!("warning: {w}");
    }
    for t in &outcome.candidates {
        println!("{}\t{}", t.id, t.display_name);
    }
    Ok(())
}

fn metafeatures(args: &MetafeaturesArgs) -> Result<()> {
    let table = if args.nsl_kdd {
        load_nslkdd(&args.dataset)?
    } else {
        let target = args.target.as_deref().ok_or_else(|| {
            metaselect::Error::InvalidParameter("--target is required for csv input".into())
        })?;
        let positive = match &args.positive {
            Some(p) => p.clone(),
            None => first_label(&args.dataset, target)?,
        };
        let overrides: BTreeMap<String, ColumnKind> = args
            .categorical
            .iter()
            .map(|c| (c.clone(), ColumnKind::Categorical))
            .collect();
        load_csv(
            &args.dataset,
            target,
            &positive,
            (!overrides.is_empty()).then_some(&overrides),
        )?
    };
    if args.nsl_kdd && args.target.as_deref().is_some_and(|t| t != NSLKDD_TARGET) {
        eprintln!("warning: --target ignored for NSL-KDD input (positive label `{NSLKDD_POSITIVE}`)");
    }
    let mf = extract(&table)?;
    for (name, value) in META_FEATURE_NAMES.iter().zip(mf.to_array()) {
        println!("{name}\t{value}");
    }
    Ok(())
}

/// The first value of the target column, used when no positive label is given.
fn first_label(path: &Path, target: &str) -> Result<String> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let col = headers
        .iter()
        .position(|h| h == target)
        .ok_or_else(|| metaselect::Error::MissingColumn(target.into()))?;
    let record = reader
        .records()
        .next()
        .ok_or_else(|| metaselect::Error::Empty(path.display().to_string()))?
        .map_err(|e| csv_error(path, e))?;
    Ok(record.get(col).unwrap_or_default().to_string())
}

fn csv_error(path: &Path, source: csv::Error) -> metaselect::Error {
    metaselect::Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn experiment(manifest: &Path, out: &Path, keep_going: bool) -> Result<()> {
    let m = ExperimentManifest::load(manifest)?;
    let options = RunOptions {
        keep_going,
        seed_override: parse_seed_override(std::env::var(SEED_ENV_VAR).ok().as_deref())?,
    };
    let run = execute(&m, &options)?;
    for w in &run.report.warnings {
        eprintln!("warning: {w}");
    }
    let written = write_reports(&run.report, out)?;
    if let Some(model) = &run.meta_model {
        let path = out.join("meta_model.json");
        model.save(&path)?;
        eprintln!("wrote {}", path.display());
    }
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    print!("{}", run.report.to_text());
    Ok(())
}

fn print_ranking(title: &str, ranking: &Ranking) {
    println!("{title}");
    for e in &ranking.entries {
        println!("  {}\t{}", e.rank, e.algorithm);
    }
}

fn recommend_cmd(manifest: &Path) -> Result<()> {
    let m = ExperimentManifest::load(manifest)?;
    let rec = recommend(&m)?;
    if let Some(rules) = &rec.rules {
        print_ranking("rules-of-thumb ranking:", rules);
    }
    print_ranking("meta-learner ranking:", &rec.meta);
    println!("predicted recall:");
    for (id, raw) in &rec.predicted_recall {
        println!("  {id}\t{:.6}", clamp_recall(*raw));
    }
    Ok(())
}
