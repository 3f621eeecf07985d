//! Library side of the `confsel` command-line tool. [`run`] drives a whole
//! invocation against caller-supplied streams so that tests and the golden
//! regeneration tool can execute commands in-process.

pub mod args;
pub mod golden;
pub mod output;

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::Path;

use clap::error::ErrorKind as ClapErrorKind;
use clap::Parser;
use serde_json::{json, Map, Value};

use confsel_core::dataset::standardize;
use confsel_core::eval::{run_sweep, EvaluationReport, ExperimentConfig};
use confsel_core::scoring::{rank, select_top, FeatureRanking, Method, RankOptions};
use confsel_core::{
    parse_delimited, stratified_split, Dataset64, DelimitedOptions, Error, ErrorKind,
};

use args::{
    bandwidth_label, BenchArgs, Cli, Command, EvaluateArgs, Format, InputArgs, OutputArgs,
    ProtocolArgs, RankArgs, ScorerArgs, SelectArgs, VizArgs,
};
use output::{
    exact, fixed, render_delimited, render_json, render_table, yes_no, Fingerprint, Header,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

/// A failed invocation: message plus exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.kind() {
            ErrorKind::Usage => EXIT_USAGE,
            ErrorKind::Data => EXIT_DATA,
            ErrorKind::Numeric => EXIT_NUMERIC,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult<T> = std::result::Result<T, Failure>;

/// Output of a command, plus a failure to report after the output is written
/// (bench keeps going when individual datasets fail).
struct Rendered {
    text: String,
    deferred: Option<Failure>,
}

impl From<String> for Rendered {
    fn from(text: String) -> Self {
        Rendered {
            text,
            deferred: None,
        }
    }
}

/// Runs one invocation and returns the process exit code.
pub fn run<I, A>(
    argv: I,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_USAGE
                }
            };
            return code;
        }
    };

    let (out_args, result) = match &cli.command {
        Command::Rank(a) => (&a.output, cmd_rank(a, stdin).map(Rendered::from)),
        Command::Select(a) => (&a.rank.output, cmd_select(a, stdin).map(Rendered::from)),
        Command::Evaluate(a) => (&a.output, cmd_evaluate(a, stdin).map(Rendered::from)),
        Command::Bench(a) => (&a.output, cmd_bench(a)),
        Command::Viz(a) => (&a.output, cmd_viz(a, stdin).map(Rendered::from)),
    };
    match result.and_then(|r| emit(out_args, &r.text, stdout).map(|_| r)) {
        Ok(Rendered { deferred: None, .. }) => EXIT_OK,
        Ok(Rendered {
            deferred: Some(f), ..
        })
        | Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn emit(out: &OutputArgs, text: &str, stdout: &mut dyn Write) -> CmdResult<()> {
    let res = match &out.output {
        Some(path) => std::fs::write(path, text).map_err(|e| (path.display().to_string(), e)),
        None => stdout
            .write_all(text.as_bytes())
            .and_then(|_| stdout.flush())
            .map_err(|e| ("standard output".to_string(), e)),
    };
    res.map_err(|(what, e)| Failure {
        code: EXIT_DATA,
        message: format!("cannot write {what}: {e}"),
    })
}

fn read_source(path: &Path) -> CmdResult<Vec<u8>> {
    std::fs::read(path).map_err(|source| {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
        .into()
    })
}

fn load_bytes(
    name: String,
    bytes: &[u8],
    options: &DelimitedOptions,
) -> CmdResult<(Dataset64, Fingerprint)> {
    let data: Dataset64 = parse_delimited(bytes, options)?;
    let fp = Fingerprint {
        name,
        rows: data.n_samples(),
        features: data.n_features(),
        classes: data.n_classes(),
        sha256: output::content_hash(bytes),
    };
    Ok((data, fp))
}

fn file_label(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn load_input(input: &InputArgs, stdin: &mut dyn Read) -> CmdResult<(Dataset64, Fingerprint)> {
    let options = input.parse.options();
    if input.stdin {
        let mut bytes = Vec::new();
        stdin.read_to_end(&mut bytes).map_err(|e| Failure {
            code: EXIT_DATA,
            message: format!("cannot read standard input: {e}"),
        })?;
        load_bytes("<stdin>".into(), &bytes, &options)
    } else {
        let path = input.path.as_deref().ok_or_else(|| Failure {
            code: EXIT_USAGE,
            message: "no dataset path given".into(),
        })?;
        let bytes = read_source(path)?;
        load_bytes(file_label(path), &bytes, &options)
    }
}

fn scorer_config(s: &ScorerArgs) -> Vec<(&'static str, String)> {
    vec![
        ("lap_k", s.lap_k.to_string()),
        ("bandwidth", bandwidth_label(s.bandwidth)),
    ]
}

fn input_config(input: &InputArgs) -> Vec<(&'static str, String)> {
    vec![
        ("label", input.parse.label.clone()),
        ("header", (!input.parse.no_header).to_string()),
    ]
}

fn ranking_for(a: &RankArgs, data: &Dataset64) -> CmdResult<FeatureRanking<f64>> {
    let options = RankOptions {
        laplacian: a.scorer.laplacian(),
    };
    let scored = if a.no_standardize {
        data.clone()
    } else {
        standardize(data)?.0
    };
    Ok(rank(a.method.into(), &scored, &options)?)
}

fn rank_config(a: &RankArgs) -> Vec<(&'static str, String)> {
    let method: Method = a.method.into();
    let mut cfg = vec![
        ("method", method.name().to_string()),
        ("standardize", (!a.no_standardize).to_string()),
        ("seed", "none".to_string()),
    ];
    cfg.extend(input_config(&a.input));
    cfg.extend(scorer_config(&a.scorer));
    cfg
}

fn opt(v: Option<f64>, f: fn(f64) -> String) -> String {
    v.map(f).unwrap_or_default()
}

fn ranking_rows(r: &FeatureRanking<f64>, f: fn(f64) -> String) -> (Vec<String>, Vec<Vec<String>>) {
    let cm = r.method == Method::ConfidenceMachine;
    let mut headers: Vec<String> = vec!["rank".into(), "index".into(), "name".into()];
    if cm {
        headers.extend(["relevance", "redundancy", "nonconformity", "p_value"].map(String::from));
    } else {
        headers.push("score".into());
    }
    headers.push("degenerate".into());
    let rows = r
        .ranked_records()
        .enumerate()
        .map(|(pos, rec)| {
            let mut row = vec![
                (pos + 1).to_string(),
                rec.feature_index.to_string(),
                rec.feature_name.clone(),
            ];
            if cm {
                row.push(opt(rec.relevance, f));
                row.push(opt(rec.redundancy, f));
                row.push(opt(rec.nonconformity, f));
                row.push(opt(rec.p_value, f));
            } else {
                row.push(opt(rec.baseline_score, f));
            }
            row.push(yes_no(rec.degenerate).into());
            row
        })
        .collect();
    (headers, rows)
}

fn render_ranking(
    header: &Header,
    format: Format,
    r: &FeatureRanking<f64>,
    top: Option<usize>,
) -> String {
    let mut r = r.clone();
    if let Some(m) = top {
        r.order.truncate(m);
    }
    match format {
        Format::Table => {
            let (h, rows) = ranking_rows(&r, fixed);
            header.comment_block() + &render_table(&h, &rows)
        }
        Format::Delimited => {
            let (h, rows) = ranking_rows(&r, exact);
            header.comment_block() + &render_delimited(&h, &rows)
        }
        Format::Structured => {
            let mut body = Map::new();
            body.insert("method".into(), json!(r.method));
            body.insert("order".into(), json!(r.order));
            let ranked: Vec<_> = r.ranked_records().collect();
            body.insert("features".into(), json!(ranked));
            render_json(header, body)
        }
    }
}

fn cmd_rank(a: &RankArgs, stdin: &mut dyn Read) -> CmdResult<String> {
    let (data, fp) = load_input(&a.input, stdin)?;
    let ranking = ranking_for(a, &data)?;
    let header = Header {
        command: "rank",
        config: rank_config(a),
        datasets: vec![fp],
    };
    Ok(render_ranking(&header, a.output.format, &ranking, None))
}

fn cmd_select(a: &SelectArgs, stdin: &mut dyn Read) -> CmdResult<String> {
    let (data, fp) = load_input(&a.rank.input, stdin)?;
    let ranking = ranking_for(&a.rank, &data)?;
    let chosen = select_top(&ranking, a.count).map_err(|e| Failure {
        code: EXIT_USAGE,
        message: e.to_string(),
    })?;
    let mut config = rank_config(&a.rank);
    config.push(("count", a.count.to_string()));
    let header = Header {
        command: "select",
        config,
        datasets: vec![fp],
    };
    Ok(render_ranking(
        &header,
        a.rank.output.format,
        &ranking,
        Some(chosen.len()),
    ))
}

fn experiment_config(p: &ProtocolArgs, s: &ScorerArgs) -> ExperimentConfig {
    let mut methods: Vec<Method> = p.methods.iter().map(|&m| m.into()).collect();
    methods.dedup();
    ExperimentConfig {
        repetitions: p.repetitions,
        train_fraction: p.train_fraction,
        base_seed: p.seed,
        k_neighbors: p.k,
        sweep_max_fraction: p.sweep_max,
        lowdim_fraction: p.lowdim,
        methods,
        laplacian: s.laplacian(),
    }
}

fn protocol_config(c: &ExperimentConfig) -> Vec<(&'static str, String)> {
    let methods: Vec<&str> = c.methods.iter().map(|m| m.name()).collect();
    vec![
        ("methods", methods.join(",")),
        ("seed", c.base_seed.to_string()),
        ("repetitions", c.repetitions.to_string()),
        ("train_fraction", exact(c.train_fraction)),
        ("classifier", "knn".into()),
        ("k", c.k_neighbors.to_string()),
        ("sweep_max", exact(c.sweep_max_fraction)),
        ("lowdim", exact(c.lowdim_fraction)),
        ("lap_k", c.laplacian.k_neighbors.to_string()),
        ("bandwidth", bandwidth_label(c.laplacian.bandwidth)),
    ]
}

fn checked_config(p: &ProtocolArgs, s: &ScorerArgs) -> CmdResult<ExperimentConfig> {
    let config = experiment_config(p, s);
    config.validate().map_err(|e| Failure {
        code: EXIT_USAGE,
        message: e.to_string(),
    })?;
    Ok(config)
}

fn render_report(header: &Header, format: Format, report: &EvaluationReport) -> String {
    match format {
        Format::Table => {
            let reps = report.seeds.len();
            let mut h: Vec<String> =
                vec!["method".into(), "features".into(), "mean_accuracy".into()];
            h.extend((0..reps).map(|r| format!("rep{}", r + 1)));
            let mut rows = Vec::new();
            for c in &report.methods {
                for p in &c.points {
                    let mut row = vec![
                        c.method.name().to_string(),
                        p.feature_count.to_string(),
                        fixed(p.mean_accuracy),
                    ];
                    row.extend(p.accuracies.iter().map(|&a| fixed(a)));
                    rows.push(row);
                }
            }
            let mut s = header.comment_block();
            s.push_str(&format!(
                "# sweep: features 1..={}; low dimension: features 1..={}; seeds: {}\n",
                report.sweep_max,
                report.lowdim_max,
                report
                    .seeds
                    .iter()
                    .map(u64::to_string)
                    .collect::<Vec<_>>()
                    .join(",")
            ));
            s.push_str(&render_table(&h, &rows));
            s.push('\n');
            let low: Vec<Vec<String>> = report
                .methods
                .iter()
                .map(|c| vec![c.method.name().to_string(), fixed(c.low_dim_mean)])
                .collect();
            s.push_str(&render_table(
                &["method".into(), "lowdim_mean_accuracy".into()],
                &low,
            ));
            s
        }
        Format::Delimited => {
            let mut s = header.comment_block();
            for c in &report.methods {
                s.push_str(&format!(
                    "# lowdim_mean_accuracy {}={} (features 1..={})\n",
                    c.method.name(),
                    exact(c.low_dim_mean),
                    report.lowdim_max
                ));
            }
            let h: Vec<String> = [
                "method",
                "classifier",
                "feature_count",
                "repetition",
                "seed",
                "accuracy",
            ]
            .map(String::from)
            .to_vec();
            let mut rows = Vec::new();
            for c in &report.methods {
                for p in &c.points {
                    for (r, &a) in p.accuracies.iter().enumerate() {
                        rows.push(vec![
                            c.method.name().to_string(),
                            report.classifier.clone(),
                            p.feature_count.to_string(),
                            (r + 1).to_string(),
                            report.seeds[r].to_string(),
                            exact(a),
                        ]);
                    }
                }
            }
            s + &render_delimited(&h, &rows)
        }
        Format::Structured => {
            let mut body = Map::new();
            body.insert("report".into(), json!(report));
            render_json(header, body)
        }
    }
}

fn cmd_evaluate(a: &EvaluateArgs, stdin: &mut dyn Read) -> CmdResult<String> {
    let config = checked_config(&a.protocol, &a.scorer)?;
    let (data, fp) = load_input(&a.input, stdin)?;
    let report = run_sweep(&data, &config)?;
    let mut cfg = protocol_config(&config);
    cfg.extend(input_config(&a.input));
    let header = Header {
        command: "evaluate",
        config: cfg,
        datasets: vec![fp],
    };
    Ok(render_report(&header, a.output.format, &report))
}

struct BenchRow {
    dataset: String,
    outcome: Result<Vec<(Method, f64)>, Failure>,
}

fn cmd_bench(a: &BenchArgs) -> CmdResult<Rendered> {
    let config = checked_config(&a.protocol, &a.scorer)?;
    let options = a.parse.options();
    let mut fingerprints = Vec::new();
    let mut rows = Vec::new();
    for path in &a.paths {
        let name = file_label(path);
        let outcome = read_source(path)
            .and_then(|bytes| load_bytes(name.clone(), &bytes, &options))
            .and_then(|(data, fp)| {
                fingerprints.push(fp);
                let report = run_sweep(&data, &config)?;
                Ok(report
                    .methods
                    .iter()
                    .map(|c| (c.method, 100.0 * c.low_dim_mean))
                    .collect())
            });
        rows.push(BenchRow {
            dataset: name,
            outcome,
        });
    }

    let mut cfg = protocol_config(&config);
    cfg.push(("label", a.parse.label.clone()));
    cfg.push(("header", (!a.parse.no_header).to_string()));
    let header = Header {
        command: "bench",
        config: cfg,
        datasets: fingerprints,
    };
    let best =
        |scores: &[(Method, f64)]| scores.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);

    let text = match a.output.format {
        Format::Table | Format::Delimited => {
            let table = a.output.format == Format::Table;
            let num = if table { fixed } else { exact };
            let mut h: Vec<String> = vec!["dataset".into()];
            h.extend(config.methods.iter().map(|m| m.name().to_string()));
            if !table {
                h.push("best".into());
            }
            let mut body = Vec::new();
            let mut errors = String::new();
            for r in &rows {
                match &r.outcome {
                    Ok(scores) => {
                        let top = best(scores);
                        let mut row = vec![r.dataset.clone()];
                        for &(_, s) in scores {
                            let mark = if table && s == top { "*" } else { "" };
                            row.push(format!("{}{mark}", num(s)));
                        }
                        if !table {
                            let winners: Vec<&str> = scores
                                .iter()
                                .filter(|s| s.1 == top)
                                .map(|s| s.0.name())
                                .collect();
                            row.push(winners.join("|"));
                        }
                        body.push(row);
                    }
                    Err(f) => errors.push_str(&format!("# error: {}: {}\n", r.dataset, f.message)),
                }
            }
            let mut s = header.comment_block();
            s.push_str("# low-dimension mean accuracy (%)");
            s.push_str(if table {
                ", * marks the best method\n"
            } else {
                "\n"
            });
            s.push_str(&if table {
                render_table(&h, &body)
            } else {
                render_delimited(&h, &body)
            });
            s + &errors
        }
        Format::Structured => {
            let results: Vec<Value> = rows
                .iter()
                .map(|r| match &r.outcome {
                    Ok(scores) => {
                        let top = best(scores);
                        json!({
                            "dataset": r.dataset,
                            "methods": scores.iter().map(|&(m, s)| json!({
                                "method": m,
                                "lowdim_mean_accuracy_percent": s,
                                "best": s == top,
                            })).collect::<Vec<_>>(),
                        })
                    }
                    Err(f) => json!({ "dataset": r.dataset, "error": f.message }),
                })
                .collect();
            let mut body = Map::new();
            body.insert("results".into(), Value::Array(results));
            render_json(&header, body)
        }
    };

    let failed: Vec<String> = rows
        .iter()
        .filter_map(|r| r.outcome.as_ref().err().map(|_| r.dataset.clone()))
        .collect();
    let deferred = (!failed.is_empty()).then(|| Failure {
        code: EXIT_DATA,
        message: format!(
            "{} of {} datasets failed: {}",
            failed.len(),
            rows.len(),
            failed.join(", ")
        ),
    });
    Ok(Rendered { text, deferred })
}

fn cmd_viz(a: &VizArgs, stdin: &mut dyn Read) -> CmdResult<String> {
    let (data, fp) = load_input(&a.input, stdin)?;
    if data.n_features() < 2 {
        return Err(Failure {
            code: EXIT_DATA,
            message: format!(
                "viz needs at least 2 features, dataset has {}",
                data.n_features()
            ),
        });
    }
    let split = stratified_split(&data, a.train_fraction, a.seed).map_err(|e| Failure {
        code: EXIT_USAGE,
        message: e.to_string(),
    })?;
    let train = standardize(&split.train)?.0;
    let options = RankOptions {
        laplacian: a.scorer.laplacian(),
    };
    let method: Method = a.method.into();
    let ranking = rank(method, &train, &options)?;
    let top = select_top(&ranking, 2)?;
    let names = data.feature_names();
    let (fx, fy) = (top[0], top[1]);

    let mut cfg = vec![
        ("method", method.name().to_string()),
        ("seed", a.seed.to_string()),
        ("train_fraction", exact(a.train_fraction)),
    ];
    cfg.extend(input_config(&a.input));
    cfg.extend(scorer_config(&a.scorer));
    let header = Header {
        command: "viz",
        config: cfg,
        datasets: vec![fp],
    };
    let test = &split.test;
    let classes = test.class_names();
    Ok(match a.output.format {
        Format::Table | Format::Delimited => {
            let table = a.output.format == Format::Table;
            let num = if table { fixed } else { exact };
            let h = vec![names[fx].clone(), names[fy].clone(), "class".into()];
            let rows: Vec<Vec<String>> = (0..test.n_samples())
                .map(|i| {
                    vec![
                        num(test.value(i, fx)),
                        num(test.value(i, fy)),
                        classes[test.labels()[i]].clone(),
                    ]
                })
                .collect();
            let mut s = header.comment_block();
            s.push_str(&format!(
                "# features: x={} (index {fx}), y={} (index {fy}); {} test samples\n",
                names[fx],
                names[fy],
                test.n_samples()
            ));
            s + &if table {
                render_table(&h, &rows)
            } else {
                render_delimited(&h, &rows)
            }
        }
        Format::Structured => {
            let points: Vec<Value> = (0..test.n_samples())
                .map(|i| {
                    json!({
                        "row": split.test_indices[i],
                        "x": test.value(i, fx),
                        "y": test.value(i, fy),
                        "class": classes[test.labels()[i]],
                    })
                })
                .collect();
            let mut body = Map::new();
            body.insert(
                "x_feature".into(),
                json!({ "index": fx, "name": names[fx] }),
            );
            body.insert(
                "y_feature".into(),
                json!({ "index": fy, "name": names[fy] }),
            );
            body.insert("points".into(), Value::Array(points));
            render_json(&header, body)
        }
    })
}
