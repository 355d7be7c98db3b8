use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use fuzzy_liveness::dataset::Dataset;
use fuzzy_liveness::fuzzy::{leaf_grade, LinguisticTerm, EYE, QUALITY};
use fuzzy_liveness::pipeline::{
    decide, generate_corpus, tune_threshold_eer, CorpusSpec, Inference, LivenessEngine,
    PipelineConfig, ScoredSample, Verdict,
};
use fuzzy_liveness::rules::{format_rule, validate_rulebase, RuleParser};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_SPOOF: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "liveness", version, about = "Fuzzy liveness detection for face image sequences")]
struct Cli {
    /// Pipeline configuration (TOML). Built-in defaults when omitted.
    #[arg(long, global = true, env = "LIVENESS_CONFIG")]
    config: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score one sequence of a manifest and show the rule trace.
    Score {
        manifest: PathBuf,
        #[arg(long)]
        sequence: String,
        /// Exit with status 3 when the verdict is spoof.
        #[arg(long)]
        strict: bool,
    },
    /// Score every sequence and print per-class accuracy and error rates.
    Evaluate { manifest: PathBuf },
    /// Pick the equal-error-rate threshold for a labelled manifest.
    Tune { manifest: PathBuf },
    /// Write a seeded synthetic corpus.
    GenSynthetic {
        /// Corpus shape (TOML); defaults when omitted.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Trace inference for raw measurements.
    Explain {
        /// Eye movement counter.
        #[arg(long)]
        eye: u32,
        /// Mouth movement counter.
        #[arg(long)]
        mouth: u32,
        /// Frames in the sequence.
        #[arg(long)]
        frames: u32,
        /// Texture homogeneity.
        #[arg(long)]
        psi: f64,
    },
    /// Check a rule file against the configured variables.
    ValidateRules { file: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_DATA)
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig> {
    match path {
        None => Ok(PipelineConfig::default()),
        Some(p) => PipelineConfig::load(p).with_context(|| format!("loading config {}", p.display())),
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let config = load_config(cli.config.as_deref())?;
    let mut out = String::new();
    let mut code = ExitCode::SUCCESS;
    match cli.command {
        Command::Score { manifest, sequence, strict } => {
            let engine = LivenessEngine::new(config)?;
            let dataset = Dataset::load(&manifest)?;
            let entry = dataset.manifest.sequence(&sequence)?;
            let obs = engine.observe(entry, &dataset.base_dir)?;
            let inference = engine.infer(obs)?;
            let verdict = decide(inference.score.crisp, engine.config().threshold);
            match cli.format {
                Format::Table => {
                    let _ = writeln!(out, "sequence {} ({})", entry.id, entry.label);
                    out.push_str(&render_trace(&engine, &inference));
                }
                Format::Json => {
                    let doc = json!({
                        "id": entry.id,
                        "label": entry.label,
                        "decision": engine.decide(inference.score.clone()),
                    });
                    out = pretty(&doc);
                }
                Format::Csv => out = score_csv(&engine, &inference),
            }
            if strict && verdict == Verdict::Spoof {
                code = ExitCode::from(EXIT_SPOOF);
            }
        }
        Command::Evaluate { manifest } => {
            let engine = LivenessEngine::new(config)?;
            let dataset = Dataset::load(&manifest)?;
            let report = engine.evaluate(&dataset);
            out = match cli.format {
                Format::Table => report.render_table(),
                Format::Json => report.to_json() + "\n",
                Format::Csv => {
                    let mut buf = Vec::new();
                    report.write_csv(&mut buf)?;
                    String::from_utf8(buf)?
                }
            };
        }
        Command::Tune { manifest } => {
            let engine = LivenessEngine::new(config)?;
            let dataset = Dataset::load(&manifest)?;
            let report = engine.evaluate(&dataset);
            let samples: Vec<ScoredSample> = report
                .sequences
                .iter()
                .map(|s| ScoredSample { crisp: s.crisp, live: s.label.is_live() })
                .collect();
            let point = tune_threshold_eer(&samples)?;
            out = match cli.format {
                Format::Table => format!(
                    "threshold  {:.6}\nEER        {:.2}%\nFAR        {:.2}%\nFRR        {:.2}%\n",
                    point.threshold,
                    point.eer * 100.0,
                    point.far * 100.0,
                    point.frr * 100.0
                ),
                Format::Json => pretty(&point),
                Format::Csv => format!(
                    "threshold,far,frr,eer\n{},{},{},{}\n",
                    point.threshold, point.far, point.frr, point.eer
                ),
            };
        }
        Command::GenSynthetic { spec, seed, out: dir } => {
            let spec = match spec {
                None => CorpusSpec::default(),
                Some(p) => {
                    let text = fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
                    CorpusSpec::from_toml(&text).with_context(|| format!("in {}", p.display()))?
                }
            };
            let manifest = generate_corpus(&spec, seed, &config.texture, &dir)?;
            out = match cli.format {
                Format::Table => format!(
                    "wrote {} sequences to {}\n",
                    manifest.sequences.len(),
                    dir.join("manifest.json").display()
                ),
                Format::Json => manifest.to_json() + "\n",
                Format::Csv => {
                    let mut s = String::from("id,label,c_eye,c_mouth,psi_target,psi_measured\n");
                    for e in &manifest.sequences {
                        let gt = e.ground_truth.as_ref().expect("generator records ground truth");
                        let _ = writeln!(
                            s,
                            "{},{},{},{},{},{}",
                            e.id, e.label, gt.c_eye, gt.c_mouth, gt.psi_target, gt.psi_measured
                        );
                    }
                    s
                }
            };
        }
        Command::Explain { eye, mouth, frames, psi } => {
            let engine = LivenessEngine::new(config)?;
            let inference = engine.infer_raw(eye, mouth, frames, psi)?;
            out = match cli.format {
                Format::Table => render_trace(&engine, &inference),
                Format::Json => pretty(&engine.decide(inference.score.clone())),
                Format::Csv => score_csv(&engine, &inference),
            };
        }
        Command::ValidateRules { file } => {
            let bytes = fs::read(&file).with_context(|| format!("reading {}", file.display()))?;
            let rules = RuleParser::with_aliases(&config.aliases)
                .parse_bytes(&bytes)
                .with_context(|| format!("in {}", file.display()))?;
            let engine = LivenessEngine::new(PipelineConfig { rules: None, ..config })?;
            let report = validate_rulebase(&rules, engine.variables());
            out = match cli.format {
                Format::Table => format!("{} rules\n{report}", rules.len()),
                Format::Json => pretty(&report),
                Format::Csv => {
                    let mut s = report.inputs.join(",") + "\n";
                    for combo in &report.uncovered {
                        let row: Vec<&str> = combo.iter().map(|t| t.as_str()).collect();
                        let _ = writeln!(s, "{}", row.join(","));
                    }
                    s
                }
            };
            if report.has_errors() {
                code = ExitCode::from(EXIT_DATA);
            }
        }
    }
    let mut stdout = io::stdout().lock();
    stdout.write_all(out.as_bytes())?;
    stdout.flush()?;
    Ok(code)
}

fn pretty<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn score_csv(engine: &LivenessEngine, inference: &Inference) -> String {
    let s = &inference.score;
    let o = &s.observations;
    let fired: Vec<String> = s.fired.iter().map(|a| a.rule_id.to_string()).collect();
    format!(
        "c_eye,c_mouth,n,psi,crisp,label,verdict,fired\n{},{},{},{},{},{},{},{}\n",
        o.eye.c,
        o.mouth.c,
        o.eye.n,
        o.psi,
        s.crisp,
        s.label,
        decide(s.crisp, engine.config().threshold),
        fired.join(" ")
    )
}

/// Fuzzification, rule firing, aggregation and defuzzification, step by step.
fn render_trace(engine: &LivenessEngine, inference: &Inference) -> String {
    let score = &inference.score;
    let obs = &score.observations;
    let cfg = engine.config();
    let mut out = String::new();

    let _ = writeln!(out, "fuzzification");
    for input in &score.inputs {
        let formula = match input.variable.as_str() {
            QUALITY if obs.psi <= 256.0 => format!("psi = {:.2}, 1 (psi <= 256)", obs.psi),
            QUALITY => format!("psi = {:.2}, 256/{:.2}", obs.psi, obs.psi),
            name => {
                let o = if name == EYE { obs.eye } else { obs.mouth };
                format!("c = {}, n = {}, {}/{}", o.c, o.n, o.c, o.n - 1)
            }
        };
        let _ = writeln!(
            out,
            "  {:<8} {:<28} grade {:.2}  value {:.2}  label {}",
            input.variable,
            formula,
            input.grade.value(),
            input.value,
            input.label
        );
    }

    let inputs: std::collections::BTreeMap<&str, _> =
        score.inputs.iter().map(|i| (i.variable.as_str(), i)).collect();
    let mode = serde_json::to_value(cfg.mode).expect("mode serializes");
    let _ = writeln!(
        out,
        "rule firing ({}, {} of {} rules)",
        mode.as_str().unwrap_or_default(),
        score.fired.len(),
        engine.rules().len()
    );
    for act in &score.fired {
        let rule = engine.rules().get(act.rule_id).expect("fired rule exists");
        let composition = rule.antecedent.render_composition(&|cond| {
            format!("{:.2}", leaf_grade(inputs[cond.variable.as_str()], cond.term, cfg.mode).value())
        });
        let _ = writeln!(out, "  rule {}  {}", rule.id, format_rule(rule));
        let _ = writeln!(out, "          {} = {:.2}", composition, act.level.value());
    }

    let _ = writeln!(out, "aggregation");
    if score.fallback {
        let _ = writeln!(out, "  no positive activation; score falls back to 0");
    } else {
        for term in LinguisticTerm::ALL {
            let level = score
                .fired
                .iter()
                .filter(|a| a.output_term == term)
                .map(|a| a.level.value())
                .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
            if let Some(level) = level {
                let _ = writeln!(out, "  {term} clipped at {level:.2}");
            }
        }
        let _ = writeln!(out, "  union peak {:.2}", inference.aggregated.peak());
    }

    let _ = writeln!(out, "defuzzification");
    let _ = writeln!(out, "  center of gravity {:.4} (step {})", score.crisp, cfg.cog_step);
    let _ = writeln!(out, "  output label {}", score.label);
    let _ = writeln!(
        out,
        "decision\n  {} at threshold {:.2}",
        decide(score.crisp, cfg.threshold),
        cfg.threshold
    );
    out
}
