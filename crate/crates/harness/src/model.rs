use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use optbeam::scoring::{load_table_model, parse_model_spec, train_ngram};
use optbeam::ScoringModel;

/// Resolves a `--model` argument:
///
/// - `seeded:...` and `copy:...` spec strings,
/// - `ngram:n=<int>,k=<float>,corpus=<path>`,
/// - otherwise a path to a table-model JSON file.
pub fn load_model(arg: &str) -> Result<Box<dyn ScoringModel>> {
    if arg.starts_with("seeded:") || arg.starts_with("copy:") {
        return parse_model_spec(arg).with_context(|| format!("model spec {arg:?}"));
    }
    if let Some(rest) = arg.strip_prefix("ngram:") {
        return load_ngram(rest).with_context(|| format!("model spec {arg:?}"));
    }
    let text = fs::read_to_string(Path::new(arg))
        .with_context(|| format!("cannot read model file {arg}"))?;
    let model = load_table_model(&text).with_context(|| format!("invalid model file {arg}"))?;
    Ok(Box::new(model))
}

fn load_ngram(fields: &str) -> Result<Box<dyn ScoringModel>> {
    let (mut n, mut k, mut corpus) = (None, None, None);
    // corpus path comes last and may itself contain commas
    let mut rest = fields;
    while !rest.is_empty() {
        if let Some(path) = rest.strip_prefix("corpus=") {
            corpus = Some(path.to_string());
            break;
        }
        let (field, tail) = rest.split_once(',').unwrap_or((rest, ""));
        match field.split_once('=') {
            Some(("n", v)) => n = Some(v.parse::<usize>().context("invalid n")?),
            Some(("k", v)) => k = Some(v.parse::<f64>().context("invalid k")?),
            _ => bail!("unknown n-gram field {field:?}"),
        }
        rest = tail;
    }
    let Some(path) = corpus else {
        bail!("missing corpus=<path>")
    };
    let text = fs::read_to_string(&path).with_context(|| format!("cannot read corpus {path}"))?;
    let lines: Vec<&str> = text.lines().collect();
    Ok(Box::new(train_ngram(
        &lines,
        n.unwrap_or(2),
        k.unwrap_or(1.0),
    )?))
}
