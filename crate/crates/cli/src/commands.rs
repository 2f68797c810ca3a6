use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ecoc_core::archive::{self, Archive, KIND_CODING_MATRIX, KIND_PIPELINE};
use ecoc_core::dataset::{load_csv, load_csv_unlabeled, load_image_dir, write_csv};
use ecoc_core::ecoc::{
    correct_classification_bound, min_code_distance, one_vs_all_code, random_code, validate_code,
    CodeViolation, CodingMatrix, Decoding,
};
use ecoc_core::experiment::{
    self, confusion_matrix, emit_report, generate_synthetic, run_experiment, sweep_code_length,
    DataSource, ExperimentConfig, MethodConfig, Pipeline, ReportFormat, SyntheticSpec,
    DEFAULT_CODE_GRID, DEFAULT_FEATURE_GRID, DEFAULT_IMAGE_SIZE,
};
use ecoc_core::learners::{LearnerConfig, SvmSpec};
use ecoc_core::{Dataset, Error, Result};
use serde_json::json;

use crate::{
    BenchArgs, CodeArgs, DecodingArg, EvaluateArgs, Format, Method, Overrides, Pic, PredictArgs,
    SweepArgs, SynthArgs, TrainArgs,
};

fn report_format(f: Format) -> ReportFormat {
    match f {
        Format::Table => ReportFormat::Table,
        Format::Csv => ReportFormat::Csv,
        Format::Json => ReportFormat::Json,
    }
}

fn default_method(m: Method) -> MethodConfig {
    match m {
        Method::Svm => MethodConfig::svm(),
        Method::Dt => MethodConfig::dt(),
        Method::Knn => MethodConfig::knn(),
        Method::Nn => MethodConfig::nn(),
        Method::Bagging => MethodConfig::bagging(),
        Method::Boosting => MethodConfig::boosting(),
        Method::Ecoc => MethodConfig::ecoc(),
    }
}

fn pic_config(p: Pic) -> LearnerConfig {
    match p {
        Pic::Svm => LearnerConfig::Svm(SvmSpec::default()),
        Pic::Knn => LearnerConfig::knn(),
        Pic::Tree => LearnerConfig::tree(),
        Pic::Mlp => LearnerConfig::mlp(),
    }
}

fn tune_svm(learner: &mut LearnerConfig, o: &Overrides) {
    if let LearnerConfig::Svm(spec) = learner {
        tune_spec(spec, o);
    }
}

fn tune_spec(spec: &mut SvmSpec, o: &Overrides) {
    if let Some(c) = o.svm_c {
        spec.c = c;
    }
    if let Some(g) = o.svm_gamma {
        spec.gamma = Some(g);
    }
}

fn read_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let cfg: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    Ok(cfg)
}

fn source_for(path: &Path, image_size: Option<usize>) -> DataSource {
    if path.is_dir() {
        DataSource::Images {
            dir: path.to_path_buf(),
            image_size: image_size.unwrap_or(DEFAULT_IMAGE_SIZE),
        }
    } else {
        DataSource::Csv {
            path: path.to_path_buf(),
        }
    }
}

/// Config file (or defaults), then command-line flags on top.
/// `fallback_methods` applies when neither a config nor `--methods` names any.
pub fn build_config(
    o: &Overrides,
    methods: &[Method],
    fallback_methods: &[Method],
) -> Result<ExperimentConfig> {
    let mut cfg = match &o.config {
        Some(p) => read_config(p)?,
        None => ExperimentConfig::default(),
    };
    let chosen = if !methods.is_empty() {
        methods
    } else if o.config.is_none() && !fallback_methods.is_empty() {
        fallback_methods
    } else {
        &[]
    };
    if !chosen.is_empty() {
        cfg.methods = chosen
            .iter()
            .map(|&m| {
                let wanted = default_method(m);
                cfg.methods
                    .iter()
                    .copied()
                    .find(|c| c.label() == wanted.label())
                    .unwrap_or(wanted)
            })
            .collect();
    }
    if let Some(path) = &o.data {
        cfg.source = source_for(path, o.image_size);
    }
    if let (DataSource::Images { image_size, .. }, Some(s)) = (&mut cfg.source, o.image_size) {
        *image_size = s;
    }
    if let Some(seed) = o.seed {
        cfg.master_seed = seed;
    }
    if let Some(runs) = o.runs {
        cfg.runs = runs;
    }
    if let Some(k) = o.pca_k {
        cfg.pca_k = (k > 0).then_some(k);
    }
    if let Some(f) = o.train_fraction {
        cfg.split.train_fraction = f;
    }
    for m in &mut cfg.methods {
        match m {
            MethodConfig::Ecoc {
                code_length,
                pic,
                decoding,
            } => {
                if let Some(n) = o.code_length {
                    *code_length = n;
                }
                if let Some(p) = o.pic {
                    *pic = pic_config(p);
                }
                if let Some(d) = o.decoding {
                    *decoding = match d {
                        DecodingArg::Hard => Decoding::Hard,
                        DecodingArg::Soft => Decoding::Soft,
                    };
                }
                tune_svm(pic, o);
            }
            MethodConfig::Svm(spec) => tune_spec(spec, o),
            MethodConfig::Bagging { base, .. } | MethodConfig::Boosting { base, .. } => {
                tune_svm(base, o)
            }
            _ => {}
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io {
            path: p.to_path_buf(),
            source: e,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn train(a: TrainArgs) -> Result<()> {
    let cfg = build_config(&a.overrides, &[a.method], &[])?;
    let ds = cfg.source.load()?;
    cfg.validate_for(&ds)?;
    let method = cfg.methods[0];
    let pipeline = Pipeline::fit(&ds, &method, cfg.pca_k, cfg.master_seed)?;
    let predicted = pipeline.predict_all(&ds)?;
    let correct = predicted
        .iter()
        .zip(ds.labels())
        .filter(|(p, l)| p == l)
        .count();
    archive::save(&a.out, KIND_PIPELINE, &pipeline)?;
    eprintln!(
        "trained {} on {} rows ({} classes); training accuracy {:.2}%; wrote {}",
        method.label(),
        ds.len(),
        ds.n_classes(),
        100.0 * correct as f64 / ds.len() as f64,
        a.out.display()
    );
    Ok(())
}

fn load_pipeline(path: &Path) -> Result<Pipeline> {
    archive::load(path, KIND_PIPELINE)
}

fn load_labeled(path: &Path, image_size: Option<usize>) -> Result<Dataset> {
    source_for(path, image_size).load()
}

pub fn predict(a: PredictArgs) -> Result<()> {
    let pipeline = load_pipeline(&a.model)?;
    let predicted = if a.data.is_dir() {
        let ds = load_image_dir(&a.data, a.image_size.unwrap_or(DEFAULT_IMAGE_SIZE))?;
        pipeline.predict_all(&ds)?
    } else {
        match load_csv_unlabeled(&a.data) {
            Ok((features, width)) if width == pipeline.input_dim => {
                pipeline.predict_rows(features, width)?
            }
            _ => pipeline.predict_all(&load_csv(&a.data)?)?,
        }
    };
    let mut text = String::new();
    for p in predicted {
        let _ = writeln!(text, "{}", pipeline.label_names[p]);
    }
    write_text(a.out.as_deref(), &text)
}

pub fn evaluate(a: EvaluateArgs) -> Result<()> {
    let pipeline = load_pipeline(&a.model)?;
    let ds = load_labeled(&a.data, a.image_size)?;
    // Map the file's label tokens onto the model's class indices.
    let mut truth = Vec::with_capacity(ds.len());
    for (row, &l) in ds.labels().iter().enumerate() {
        let name = &ds.label_names()[l];
        let idx = pipeline
            .label_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::Format {
                row: row + 1,
                message: format!("label {name:?} is unknown to the model"),
            })?;
        truth.push(idx);
    }
    let predicted = pipeline.predict_all(&ds)?;
    let m = pipeline.label_names.len();
    let cm = confusion_matrix(&truth, &predicted, m);
    let correct = truth.iter().zip(&predicted).filter(|(t, p)| t == p).count();
    let accuracy = correct as f64 / ds.len().max(1) as f64;
    let text = match a.output.format {
        Format::Json => {
            serde_json::to_string_pretty(&json!({
                "method": pipeline.method.label(),
                "rows": ds.len(),
                "accuracy": accuracy,
                "labels": pipeline.label_names,
                "confusion": cm,
            }))? + "\n"
        }
        Format::Csv => {
            let mut t = String::from("true,predicted,count\n");
            for (i, row) in cm.iter().enumerate() {
                for (j, &c) in row.iter().enumerate() {
                    let _ = writeln!(
                        t,
                        "{},{},{c}",
                        pipeline.label_names[i], pipeline.label_names[j]
                    );
                }
            }
            t
        }
        Format::Table => {
            let w = pipeline
                .label_names
                .iter()
                .map(String::len)
                .max()
                .unwrap_or(1)
                .max(5);
            let mut t = format!(
                "method {}: accuracy {:.2}% ({correct}/{})\n\n{:<w$}",
                pipeline.method.label(),
                100.0 * accuracy,
                ds.len(),
                "true"
            );
            for n in &pipeline.label_names {
                let _ = write!(t, " {n:>w$}");
            }
            t.push('\n');
            for (i, row) in cm.iter().enumerate() {
                let _ = write!(t, "{:<w$}", pipeline.label_names[i]);
                for c in row {
                    let _ = write!(t, " {c:>w$}");
                }
                t.push('\n');
            }
            t
        }
    };
    write_text(a.output.out.as_deref(), &text)
}

pub fn benchmark(a: BenchArgs) -> Result<()> {
    let cfg = build_config(&a.overrides, &a.methods, &[])?;
    let report = run_experiment(&cfg)?;
    emit_report(
        &report,
        report_format(a.output.format),
        a.output.out.as_deref(),
    )
}

pub fn sweep_code(a: SweepArgs) -> Result<()> {
    let cfg = build_config(&a.overrides, &a.methods, &[Method::Ecoc])?;
    let grid = if a.grid.is_empty() {
        DEFAULT_CODE_GRID.to_vec()
    } else {
        a.grid
    };
    let report = sweep_code_length(&cfg, &grid)?;
    emit_report(
        &report,
        report_format(a.output.format),
        a.output.out.as_deref(),
    )
}

pub fn sweep_features(a: SweepArgs) -> Result<()> {
    let cfg = build_config(&a.overrides, &a.methods, &[Method::Svm, Method::Ecoc])?;
    let grid = if a.grid.is_empty() {
        DEFAULT_FEATURE_GRID.to_vec()
    } else {
        a.grid
    };
    let report = experiment::sweep_features(&cfg, &grid)?;
    emit_report(
        &report,
        report_format(a.output.format),
        a.output.out.as_deref(),
    )
}

pub fn synth(a: SynthArgs) -> Result<()> {
    let spec = SyntheticSpec {
        classes: a.classes,
        per_class: a.per_class,
        dim: a.dim,
        center_spread: a.center_spread,
        noise_sigma: a.noise_sigma,
        seed: a.seed,
    };
    let ds = generate_synthetic(&spec)?;
    match &a.out {
        Some(p) => {
            let file = std::fs::File::create(p).map_err(|e| Error::Io {
                path: p.clone(),
                source: e,
            })?;
            write_csv(&ds, std::io::BufWriter::new(file))
        }
        None => write_csv(&ds, std::io::stdout().lock()),
    }
}

fn read_matrix(path: &PathBuf) -> Result<CodingMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })?;
    if text.trim_start().starts_with('{') {
        if let Ok(archive) = Archive::parse(&text) {
            return archive.unwrap(KIND_CODING_MATRIX);
        }
        return Ok(serde_json::from_str(&text)?);
    }
    let rows: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect();
    CodingMatrix::from_rows(&rows)
}

pub fn code(a: CodeArgs) -> Result<()> {
    let code = match &a.input {
        Some(p) => read_matrix(p)?,
        None if a.one_vs_all => one_vs_all_code(a.classes)?,
        None => random_code(a.classes, a.code_length, a.seed)?,
    };
    let delta = min_code_distance(&code);
    let violations: Vec<CodeViolation> = validate_code(&code);
    let bounds = a
        .p_prime
        .iter()
        .map(|&p| correct_classification_bound(code.n(), delta.max(1), p).map(|b| (p, b)))
        .collect::<Result<Vec<_>>>()?;
    if let Some(path) = &a.save {
        archive::save(path, KIND_CODING_MATRIX, &code)?;
    }
    let rows: Vec<String> = (0..code.m()).map(|i| code.row_string(i)).collect();
    let text = match a.output.format {
        Format::Json => {
            serde_json::to_string_pretty(&json!({
                "m": code.m(),
                "n": code.n(),
                "structured": code.is_structured(),
                "rows": rows,
                "min_distance": delta,
                "correctable_errors": delta.saturating_sub(1) / 2,
                "violations": violations,
                "bounds": bounds.iter().map(|(p, b)| json!({"p_prime": p, "bound": b})).collect::<Vec<_>>(),
            }))? + "\n"
        }
        Format::Csv => {
            let mut t = String::from("p_prime,bound\n");
            for (p, b) in &bounds {
                let _ = writeln!(t, "{p},{b}");
            }
            t
        }
        Format::Table => {
            let mut t = String::new();
            for (i, r) in rows.iter().enumerate() {
                let _ = writeln!(t, "{i:>3}  {r}");
            }
            let _ = writeln!(
                t,
                "\n{} x {} code, minimum distance {delta}, corrects up to {} PiC errors",
                code.m(),
                code.n(),
                delta.saturating_sub(1) / 2
            );
            if violations.is_empty() {
                t.push_str("valid\n");
            } else {
                for v in &violations {
                    let _ = writeln!(t, "violation: {v}");
                }
            }
            t.push_str("\np'      P(correct) >=\n");
            for (p, b) in &bounds {
                let _ = writeln!(t, "{p:<7} {b:.6}");
            }
            t
        }
    };
    write_text(a.output.out.as_deref(), &text)
}
