// SPDX-License-Identifier: MIT OR Apache-2.0

use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Deserialize;
use serde_json::{json, Value};

use whitebox_core::attribution::DEFAULT_IG_STEPS;
use whitebox_core::experiments::{
    ablation_report, run_ablation_suite, run_lrp_saturation, run_qualitative_suite, run_saturation_sweep,
    AblationConfig, ExperimentReport, LrpSaturationConfig, SATURATION_INPUT, SATURATION_U_VALUES,
};
use whitebox_core::heatmap::Format;
use whitebox_core::lrp::DEFAULT_EPSILON;
use whitebox_core::tasks::generate;
use whitebox_core::{schema, AttributionOptions, GeneratorConfig, Heatmap, Method, ModelName, Task, WhiteBoxModel};

use crate::config::Config;
use crate::error::{io_error, CliError, CliResult};
use crate::manifest::RunDir;
use crate::{AttributeArgs, BuildArgs, ExperimentArgs, GenArgs, ModelArgs, RenderArgs, RunArgs, OUT_ROOT_ENV};

fn required<T>(value: Option<T>, flag: &str) -> CliResult<T> {
    value.ok_or_else(|| {
        CliError::Config(format!("missing --{flag} (or `{}` in the config file)", flag.replace('-', "_")))
    })
}

struct ResolvedModel {
    model: WhiteBoxModel,
    settings: Value,
}

fn resolve_model(args: ModelArgs, config: &Config) -> CliResult<ResolvedModel> {
    let file: Option<PathBuf> = config.or(args.model_file, "model_file")?;
    let name: Option<String> = if file.is_some() { args.model } else { config.or(args.model, "model")? };
    let u = config.float(args.u, "u")?;
    let m = config.float(args.m, "m")?;
    let k: Option<usize> = config.or(args.k, "k")?;
    if let Some(path) = file {
        if name.is_some() {
            return Err(CliError::Config("give either --model or --model-file, not both".into()));
        }
        let model = schema::load(&path)?;
        return Ok(ResolvedModel { settings: json!({ "model_file": path }), model });
    }
    let name = required(name, "model")?;
    let model = ModelName::parse(&name)?.build(u, m, k)?;
    Ok(ResolvedModel { settings: json!({ "model": name, "u": u, "m": m, "k": k }), model })
}

/// Writes to stdout with a trailing newline. A closed pipe ends output quietly.
fn emit(text: &str) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    let newline = if text.ends_with('\n') { "" } else { "\n" };
    match write!(out, "{text}{newline}").and_then(|()| out.flush()) {
        Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(CliError::Input(format!("cannot write to stdout: {e}"))),
        _ => Ok(()),
    }
}

fn print_or_write(out: Option<&Path>, name: &str, text: &str) -> CliResult<Option<RunDir>> {
    match out {
        None => {
            emit(text)?;
            Ok(None)
        }
        Some(dir) => {
            let mut run = RunDir::open(dir)?;
            let path = run.write(name, text)?;
            eprintln!("wrote {}", path.display());
            Ok(Some(run))
        }
    }
}

pub fn build(args: BuildArgs, config: &Config) -> CliResult<()> {
    let out: Option<PathBuf> = config.or(args.out, "out")?;
    let resolved = resolve_model(args.model, config)?;
    let name = format!("{}.json", resolved.model.kind);
    if let Some(run) = print_or_write(out.as_deref(), &name, &schema::to_json(&resolved.model))? {
        run.finish("build", resolved.settings, Vec::new())?;
    }
    Ok(())
}

fn parse_task(name: &str) -> CliResult<Task> {
    match name {
        "counting" => Ok(Task::Counting),
        "sp" => Ok(Task::Sp),
        "dyck" | "dyck-prefix" => Ok(Task::DyckPrefix),
        other => Err(CliError::Config(format!("unknown task {other:?}; expected counting, sp or dyck"))),
    }
}

pub fn gen(args: GenArgs, config: &Config) -> CliResult<()> {
    let task = parse_task(&required(config.or(args.task, "task")?, "task")?)?;
    let seed = config.or(args.seed, "seed")?.unwrap_or(0);
    let count = config.or(args.count, "count")?.unwrap_or(10);
    let min_len = config.or(args.min_len, "min_len")?.unwrap_or(1);
    let max_len = config.or(args.max_len, "max_len")?.unwrap_or(12);
    let mut gen = GeneratorConfig::new(task, seed, count, min_len, max_len);
    gen.balanced_prefix = config.switch(args.balanced_prefix, "balanced_prefix")?;
    gen.sp_true = config.switch(args.sp_true, "sp_true")?;
    if let Some(p) = config.float(args.closing_prob, "closing_prob")? {
        gen.closing_prob = p;
    }
    if let Some(d) = config.or(args.max_depth, "max_depth")? {
        gen.max_depth = d;
    }
    let out: Option<PathBuf> = config.or(args.out, "out")?;
    let items = generate(&gen)?;
    let text = items.iter().map(|s| format!("{s}\n")).collect::<String>();
    if let Some(run) = print_or_write(out.as_deref(), "inputs.txt", &text)? {
        let settings = serde_json::to_value(&gen).expect("generator config serialises");
        run.finish("gen", settings, vec![seed])?;
    }
    Ok(())
}

fn read_lines(path: &Path) -> CliResult<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error("read", path, e))?;
    Ok(text.lines().map(str::trim_end).map(String::from).collect())
}

pub fn run(args: RunArgs, config: &Config) -> CliResult<()> {
    let resolved = resolve_model(args.model, config)?;
    let model = &resolved.model;
    let mut inputs = args.input;
    if inputs.is_empty() {
        if let Some(one) = config.or::<String>(None, "input")? {
            inputs.push(one);
        }
    }
    let file: Option<PathBuf> = config.or(args.inputs, "inputs")?;
    if let Some(path) = &file {
        inputs.extend(read_lines(path)?);
    }
    if inputs.is_empty() {
        return Err(CliError::Config("missing --input or --inputs".into()));
    }
    let mut lines = String::new();
    for input in &inputs {
        let trace = model.forward(input)?;
        let logits: serde_json::Map<String, Value> =
            model.labels().iter().zip(trace.logits.iter()).map(|(l, v)| (l.clone(), json!(v))).collect();
        let record = json!({ "input": input, "predicted": model.labels()[trace.predicted], "logits": logits });
        lines.push_str(&record.to_string());
        lines.push('\n');
    }
    let out: Option<PathBuf> = config.or(args.out, "out")?;
    if let Some(run) = print_or_write(out.as_deref(), "predictions.jsonl", &lines)? {
        let mut settings = resolved.settings;
        settings["inputs"] = json!(file);
        settings["count"] = json!(inputs.len());
        run.finish("run", settings, Vec::new())?;
    }
    Ok(())
}

fn parse_format(name: &str) -> CliResult<Format> {
    name.parse().map_err(CliError::from)
}

pub fn attribute(args: AttributeArgs, config: &Config) -> CliResult<()> {
    let resolved = resolve_model(args.model, config)?;
    let model = &resolved.model;
    let input = required(config.or(args.input, "input")?, "input")?;
    let method: Method = required(config.or::<String>(args.method, "method")?, "method")?.parse()?;
    let ig_steps = config.or(args.ig_steps, "ig_steps")?.unwrap_or(DEFAULT_IG_STEPS);
    let epsilon = config.float(args.epsilon, "epsilon")?.unwrap_or(DEFAULT_EPSILON);
    let format: String = config.or(args.format, "format")?.unwrap_or_else(|| "json".into());
    let out: Option<PathBuf> = config.or(args.out, "out")?;

    let tokens = model.encode(&input)?;
    let class = match config.or::<String>(args.class, "class")? {
        Some(label) => model.resolve_class(&label)?,
        None => model.forward_tokens(&tokens)?.predicted,
    };
    let result = whitebox_core::attribute(model, &tokens, method, class, AttributionOptions { ig_steps, epsilon })?;
    let heatmap = Heatmap::from_chars(&input, result.tokens.clone())?;
    let document = json!({
        "model": model.kind,
        "input": input,
        "method": method.as_str(),
        "class": model.labels()[class],
        "class_index": class,
        "tokens": heatmap.tokens,
        "scores": result.tokens,
        "features": result.features,
        "blank": heatmap.blank,
        "meta": result.meta,
    });
    let json_text = serde_json::to_string_pretty(&document).expect("attribution serialises");

    let rendered = match format.as_str() {
        "json" => None,
        other => Some((parse_format(other)?, heatmap_file_name(parse_format(other)?))),
    };
    match out {
        None => match &rendered {
            None => emit(&json_text)?,
            Some((f, _)) => emit(&heatmap.render(*f))?,
        },
        Some(dir) => {
            let mut run = RunDir::open(&dir)?;
            run.write("attribution.json", &json_text)?;
            if let Some((f, name)) = &rendered {
                run.write(name, &heatmap.render(*f))?;
            }
            let mut settings = resolved.settings;
            settings["input"] = json!(input);
            settings["method"] = json!(method.as_str());
            settings["class"] = json!(model.labels()[class]);
            settings["ig_steps"] = json!(ig_steps);
            settings["epsilon"] = json!(epsilon);
            settings["format"] = json!(format);
            let path = run.finish("attribute", settings, Vec::new())?;
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn heatmap_file_name(format: Format) -> String {
    match format {
        Format::Ansi => "heatmap.ansi".into(),
        Format::Html => "heatmap.html".into(),
        Format::Latex => "heatmap.tex".into(),
    }
}

fn default_run_dir(suite: &str) -> PathBuf {
    let root = std::env::var_os(OUT_ROOT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("runs"));
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0);
    root.join(format!("{suite}-{stamp}"))
}

fn record_report(run: &mut RunDir, report: &ExperimentReport) -> CliResult<()> {
    for path in report.write_to(run.path())? {
        run.record(&path);
    }
    if let Some(table) = report.tables.first() {
        emit(&table.to_csv()?)?;
    }
    Ok(())
}

pub fn experiment(args: ExperimentArgs, config: &Config) -> CliResult<()> {
    let suite: String = required(config.or(args.suite, "suite")?, "suite")?;
    let seed = config.or(args.seed, "seed")?.unwrap_or(0);
    let n: Option<usize> = config.or(args.n, "n")?;
    let ig_steps: Option<usize> = config.or(args.ig_steps, "ig_steps")?;
    let out = config.or(args.out, "out")?.unwrap_or_else(|| default_run_dir(&suite));

    let mut run = RunDir::open(&out)?;
    let mut seeds = Vec::new();
    match suite.as_str() {
        "qualitative" => {
            let result = run_qualitative_suite()?;
            record_report(&mut run, &result.report())?;
            run.write("heatmaps.html", &result.to_html())?;
        }
        "saturation" => {
            let result = run_saturation_sweep(&SATURATION_U_VALUES, SATURATION_INPUT)?;
            record_report(&mut run, &result.report())?;
        }
        "lrp-saturation" => {
            let mut cfg = LrpSaturationConfig::new(seed);
            if let Some(n) = n {
                cfg.n = n;
            }
            seeds.push(seed);
            record_report(&mut run, &run_lrp_saturation(&cfg)?.report())?;
        }
        "ablation" => {
            let mut cfg = AblationConfig::new(seed);
            if let Some(n) = n {
                cfg.n = n;
            }
            if let Some(steps) = ig_steps {
                cfg.ig_steps = steps;
            }
            seeds.push(seed);
            let results = run_ablation_suite(&cfg)?;
            record_report(&mut run, &ablation_report(&cfg, &results))?;
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown suite {other:?}; expected qualitative, saturation, lrp-saturation or ablation"
            )))
        }
    }
    let settings = json!({ "suite": suite, "seed": seed, "n": n, "ig_steps": ig_steps });
    let path = run.finish("experiment", settings, seeds)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

#[derive(Deserialize)]
struct ScoreFile {
    tokens: Vec<String>,
    scores: Vec<f64>,
}

pub fn render(args: RenderArgs, config: &Config) -> CliResult<()> {
    let path: PathBuf = required(config.or(args.scores, "scores")?, "scores")?;
    let format = parse_format(&config.or(args.format, "format")?.unwrap_or_else(|| "ansi".to_string()))?;
    let out: Option<PathBuf> = config.or(args.out, "out")?;
    let text = std::fs::read_to_string(&path).map_err(|e| io_error("read", &path, e))?;
    let file: ScoreFile =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let heatmap = Heatmap::new(file.tokens, file.scores)?;
    if let Some(run) = print_or_write(out.as_deref(), &heatmap_file_name(format), &heatmap.render(format))? {
        run.finish("render", json!({ "scores": path, "format": format }), Vec::new())?;
    }
    Ok(())
}
