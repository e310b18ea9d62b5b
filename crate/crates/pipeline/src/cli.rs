//! The `i2i` command line: one subcommand per pipeline stage, wired through
//! a TOML config file. Every stage writes its artifacts plus a provenance
//! manifest into the configured output directory.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use i2i_core::augment::{CandidateGenerator, CandidateJudge};
use i2i_core::index::InvertedIndex;
use i2i_core::prompt::PromptTemplate;
use i2i_core::split::chronological_split;
use i2i_core::synth::{planted_clusters, PlantedConfig};

use crate::config::{AggregationKind, LlmMode, PipelineConfig};
use crate::grid::{run_preset, write_grid_csv};
use crate::index_file::{export_index_json, read_index, write_index};
use crate::ingest::{
    read_accepted_jsonl, read_neighbors_jsonl, write_accepted_jsonl, write_interactions_tsv,
    write_neighbors_jsonl,
};
use crate::manifest::ManifestBuilder;
use crate::model_io::{
    load_discriminator, load_generator, save_discriminator, save_generator,
};
use crate::remote::{RemoteEndpoint, RemoteGenerator, RemoteJudge};
use crate::report::{render_table, report_to_json};
use crate::runner::{
    augment_train, backend_neighbors, eval_params, load_configured_dataset, train_discriminator,
    train_generator, train_only_dataset,
};
use crate::server::{run_server, ServeState};

#[derive(Parser)]
#[command(name = "i2i", version, about = "Item-to-item recommendation pipeline")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// Path to the pipeline TOML config.
    #[arg(long, short)]
    config: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Validate and summarize the configured interaction log.
    Ingest(ConfigArg),
    /// Train the next-item generator.
    TrainGen(ConfigArg),
    /// Train the pair discriminator.
    TrainDisc(ConfigArg),
    /// Generate, judge, and filter synthetic pairs.
    Augment(ConfigArg),
    /// Fit the configured similarity backend and write neighbor lists.
    BuildBackend {
        #[command(flatten)]
        config: ConfigArg,
        /// Merge accepted synthetic pairs into the training stream.
        #[arg(long)]
        augmented: bool,
    },
    /// Pack neighbor lists into a binary index file.
    BuildIndex {
        #[command(flatten)]
        config: ConfigArg,
        /// Also write a JSON debug dump of the index.
        #[arg(long)]
        json: bool,
    },
    /// Evaluate neighbor lists against the held-out split.
    Eval {
        #[command(flatten)]
        config: ConfigArg,
        /// Neighbor list file to evaluate; defaults to the one in the
        /// output directory.
        #[arg(long)]
        neighbors: Option<PathBuf>,
    },
    /// Run an experiment preset: ablation, confidence, or recall_number.
    Grid {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        preset: String,
    },
    /// Serve an index file over HTTP.
    Serve {
        /// Index file (.i2idx); defaults to the one in the output directory.
        #[arg(long)]
        index: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArg,
        /// Bind address, e.g. 127.0.0.1:8080. Overrides the config.
        #[arg(long)]
        bind: Option<String>,
        /// Score aggregation across query items: sum or max.
        #[arg(long)]
        aggregation: Option<String>,
        /// Maximum recent items used per request.
        #[arg(long)]
        m: Option<usize>,
    },
    /// Write a seeded synthetic interaction log for smoke tests and demos.
    SynthData {
        /// Output TSV path.
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 5000)]
        users: usize,
        #[arg(long, default_value_t = 500)]
        items: usize,
        #[arg(long, default_value_t = 20)]
        clusters: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

pub fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Ingest(c) => ingest_cmd(&c.config),
        Command::TrainGen(c) => train_gen_cmd(&c.config),
        Command::TrainDisc(c) => train_disc_cmd(&c.config),
        Command::Augment(c) => augment_cmd(&c.config),
        Command::BuildBackend { config, augmented } => {
            build_backend_cmd(&config.config, augmented)
        }
        Command::BuildIndex { config, json } => build_index_cmd(&config.config, json),
        Command::Eval { config, neighbors } => eval_cmd(&config.config, neighbors.as_deref()),
        Command::Grid { config, preset } => grid_cmd(&config.config, &preset),
        Command::Serve {
            index,
            config,
            bind,
            aggregation,
            m,
        } => serve_cmd(&config.config, index.as_deref(), bind, aggregation, m),
        Command::SynthData {
            output,
            users,
            items,
            clusters,
            seed,
        } => synth_cmd(&output, users, items, clusters, seed),
    }
}

fn load(config_path: &Path) -> Result<PipelineConfig> {
    let cfg = PipelineConfig::load(config_path)?;
    std::fs::create_dir_all(&cfg.data.output_dir).with_context(|| {
        format!("creating output directory {}", cfg.data.output_dir.display())
    })?;
    Ok(cfg)
}

fn ingest_cmd(config_path: &Path) -> Result<()> {
    let cfg = load(config_path)?;
    let ds = load_configured_dataset(&cfg)?;
    let s = ds.summary();
    let summary = serde_json::json!({
        "users": s.users,
        "items": s.items,
        "interactions": s.interactions,
        "long_tail_items": s.long_tail_items,
        "duplicates_dropped": s.duplicates_dropped,
    });
    let out = cfg.data.output_dir.join("summary.json");
    std::fs::write(&out, serde_json::to_string_pretty(&summary)?)?;
    let mut m = ManifestBuilder::new("ingest", &cfg.canonical_toml());
    m.input(&cfg.data.interactions);
    m.output(&out)?;
    m.write(&cfg.data.output_dir)?;
    println!("{}", serde_json::to_string(&summary)?);
    Ok(())
}

fn train_gen_cmd(config_path: &Path) -> Result<()> {
    let cfg = load(config_path)?;
    let ds = load_configured_dataset(&cfg)?;
    let split = chronological_split(&ds);
    let (model, losses) = train_generator(&ds, &split, &cfg)?;
    let out = cfg.data.output_dir.join("generator.json");
    save_generator(&out, &model)?;
    let mut m = ManifestBuilder::new("train-gen", &cfg.canonical_toml());
    m.input(&cfg.data.interactions);
    m.output(&out)?;
    m.write(&cfg.data.output_dir)?;
    println!(
        "generator trained: {} items, epoch losses {losses:?}",
        model.item_ids.len()
    );
    Ok(())
}

fn train_disc_cmd(config_path: &Path) -> Result<()> {
    let cfg = load(config_path)?;
    let ds = load_configured_dataset(&cfg)?;
    let split = chronological_split(&ds);
    let (model, losses) = train_discriminator(&ds, &split, &cfg)?;
    let out = cfg.data.output_dir.join("discriminator.json");
    save_discriminator(&out, &model)?;
    let mut m = ManifestBuilder::new("train-disc", &cfg.canonical_toml());
    m.input(&cfg.data.interactions);
    m.output(&out)?;
    m.write(&cfg.data.output_dir)?;
    println!(
        "discriminator trained: {} users x {} items, epoch losses {losses:?}",
        model.user_ids.len(),
        model.item_ids.len()
    );
    Ok(())
}

fn augment_cmd(config_path: &Path) -> Result<()> {
    let cfg = load(config_path)?;
    let ds = load_configured_dataset(&cfg)?;
    let split = chronological_split(&ds);
    let train_ds = train_only_dataset(&split, cfg.long_tail.fraction)?;

    let gen_path = cfg.data.output_dir.join("generator.json");
    let disc_path = cfg.data.output_dir.join("discriminator.json");
    let augmented = match cfg.llm.mode {
        LlmMode::Local => {
            let gen = load_generator(&gen_path)
                .context("run train-gen first, or switch llm.mode to remote")?;
            let disc = load_discriminator(&disc_path)
                .context("run train-disc first, or switch llm.mode to remote")?;
            augment_train(&train_ds, &gen, &disc, &cfg)?
        }
        LlmMode::Remote => {
            let endpoint = RemoteEndpoint::from_config(&cfg.llm);
            let gen_template = match &cfg.llm.generation_template {
                Some(p) => PromptTemplate::new("generation-custom", &std::fs::read_to_string(p)?),
                None => PromptTemplate::default_generation(),
            };
            let disc_template = match &cfg.llm.discrimination_template {
                Some(p) => {
                    PromptTemplate::new("discrimination-custom", &std::fs::read_to_string(p)?)
                }
                None => PromptTemplate::default_discrimination(),
            };
            let gen: Box<dyn CandidateGenerator> = Box::new(RemoteGenerator {
                endpoint: endpoint.clone(),
                template: gen_template,
                dataset: train_ds.clone(),
            });
            let judge: Box<dyn CandidateJudge> = Box::new(RemoteJudge {
                endpoint,
                template: disc_template,
                dataset: train_ds.clone(),
            });
            augment_train(&train_ds, gen.as_ref(), judge.as_ref(), &cfg)?
        }
    };

    let accepted_path = cfg.data.output_dir.join("accepted.jsonl");
    write_accepted_jsonl(&accepted_path, &augmented.accepted)?;
    let r = augmented.report;
    let report = serde_json::json!({
        "users_processed": r.users_processed,
        "candidates_generated": r.candidates_generated,
        "accepted": r.accepted,
        "rejected": r.rejected,
        "skipped_users": r.skipped_users,
        "duplicates_dropped": r.duplicates_dropped,
    });
    let report_path = cfg.data.output_dir.join("augment_report.json");
    std::fs::write(&report_path, serde_json::to_string_pretty(&report)?)?;
    let mut m = ManifestBuilder::new("augment", &cfg.canonical_toml());
    m.input(&cfg.data.interactions);
    if cfg.llm.mode == LlmMode::Local {
        m.input(&gen_path);
        m.input(&disc_path);
    }
    m.output(&accepted_path)?;
    m.output(&report_path)?;
    m.write(&cfg.data.output_dir)?;
    println!("{}", serde_json::to_string(&report)?);
    Ok(())
}

fn build_backend_cmd(config_path: &Path, augmented: bool) -> Result<()> {
    let cfg = load(config_path)?;
    let ds = load_configured_dataset(&cfg)?;
    let split = chronological_split(&ds);
    let mut m = ManifestBuilder::new("build-backend", &cfg.canonical_toml());
    m.input(&cfg.data.interactions);
    let stream = if augmented {
        let accepted_path = cfg.data.output_dir.join("accepted.jsonl");
        let accepted =
            read_accepted_jsonl(&accepted_path).context("run augment first (--augmented)")?;
        m.input(&accepted_path);
        let train_ds = train_only_dataset(&split, cfg.long_tail.fraction)?;
        i2i_core::merge(&train_ds, &accepted).0
    } else {
        split.train_interactions()
    };
    let lists = backend_neighbors(&stream, &cfg.backend, cfg.topk.k)?;
    let out = cfg.data.output_dir.join("neighbors.jsonl");
    write_neighbors_jsonl(&out, &lists)?;
    m.output(&out)?;
    m.write(&cfg.data.output_dir)?;
    println!(
        "{} neighbor lists written ({} backend, augmented={augmented})",
        lists.len(),
        cfg.backend.kind.as_str()
    );
    Ok(())
}

fn build_index_cmd(config_path: &Path, json: bool) -> Result<()> {
    let cfg = load(config_path)?;
    let lists_path = cfg.data.output_dir.join("neighbors.jsonl");
    let lists = read_neighbors_jsonl(&lists_path).context("run build-backend first")?;
    let index = InvertedIndex::build(&lists, cfg.index.k)
        .map_err(|e| anyhow::anyhow!("index build: {e}"))?;
    let out = cfg.data.output_dir.join("index.i2idx");
    write_index(&out, &index)?;
    let mut m = ManifestBuilder::new("build-index", &cfg.canonical_toml());
    m.input(&lists_path);
    m.output(&out)?;
    if json {
        let debug_out = cfg.data.output_dir.join("index.json");
        export_index_json(&debug_out, &index)?;
        m.output(&debug_out)?;
    }
    m.write(&cfg.data.output_dir)?;
    println!("index written: {} entries, k={}", index.item_count(), index.k);
    Ok(())
}

fn eval_cmd(config_path: &Path, neighbors: Option<&Path>) -> Result<()> {
    let cfg = load(config_path)?;
    let ds = load_configured_dataset(&cfg)?;
    let split = chronological_split(&ds);
    let lists_path =
        neighbors.map(Path::to_path_buf).unwrap_or_else(|| cfg.data.output_dir.join("neighbors.jsonl"));
    let lists = read_neighbors_jsonl(&lists_path).context("run build-backend first")?;
    let index = InvertedIndex::build(&lists, cfg.index.k)
        .map_err(|e| anyhow::anyhow!("index build: {e}"))?;
    let report = i2i_core::evaluate(&index, &split, &ds, &eval_params(&cfg))
        .map_err(|e| anyhow::anyhow!("evaluation: {e}"))?;
    let json_path = cfg.data.output_dir.join("eval_report.json");
    std::fs::write(
        &json_path,
        serde_json::to_string_pretty(&report_to_json(&report))?,
    )?;
    let table = render_table(&report);
    let table_path = cfg.data.output_dir.join("eval_report.txt");
    std::fs::write(&table_path, &table)?;
    let mut m = ManifestBuilder::new("eval", &cfg.canonical_toml());
    m.input(&cfg.data.interactions);
    m.input(&lists_path);
    m.output(&json_path)?;
    m.output(&table_path)?;
    m.write(&cfg.data.output_dir)?;
    print!("{table}");
    Ok(())
}

fn grid_cmd(config_path: &Path, preset: &str) -> Result<()> {
    let cfg = load(config_path)?;
    let ds = load_configured_dataset(&cfg)?;
    let cells = run_preset(&cfg, &ds, preset)?;
    let mut m = ManifestBuilder::new("grid", &cfg.canonical_toml());
    m.input(&cfg.data.interactions);
    for cell in &cells {
        let path = cfg
            .data
            .output_dir
            .join(format!("{}_report.json", cell.name));
        std::fs::write(
            &path,
            serde_json::to_string_pretty(&report_to_json(&cell.report))?,
        )?;
        m.output(&path)?;
    }
    let csv_path = cfg.data.output_dir.join(format!("grid_{preset}.csv"));
    write_grid_csv(&csv_path, &cfg, &cells)?;
    m.output(&csv_path)?;
    m.write(&cfg.data.output_dir)?;
    println!("{} cells written to {}", cells.len(), csv_path.display());
    Ok(())
}

fn serve_cmd(
    config_path: &Path,
    index_path: Option<&Path>,
    bind: Option<String>,
    aggregation: Option<String>,
    m: Option<usize>,
) -> Result<()> {
    let cfg = load(config_path)?;
    let index_path = index_path
        .map(Path::to_path_buf)
        .unwrap_or_else(|| cfg.data.output_dir.join("index.i2idx"));
    let index = read_index(&index_path).context("run build-index first")?;
    let aggregation = match aggregation.as_deref() {
        None => cfg.serve.aggregation,
        Some("sum") => AggregationKind::Sum,
        Some("max") => AggregationKind::Max,
        Some(other) => anyhow::bail!("serve.aggregation: unknown value {other:?}"),
    };
    let state = ServeState {
        index,
        aggregation: aggregation.into(),
        m: m.unwrap_or(cfg.serve.m),
    };
    run_server(state, &bind.unwrap_or_else(|| cfg.serve.bind.clone()))
}

fn synth_cmd(output: &Path, users: usize, items: usize, clusters: usize, seed: u64) -> Result<()> {
    let records = planted_clusters(&PlantedConfig {
        users,
        items,
        clusters,
        seed,
        ..Default::default()
    });
    write_interactions_tsv(output, &records)?;
    println!("{} interactions written to {}", records.len(), output.display());
    Ok(())
}
