use anyhow::{bail, ensure, Context, Result};
use optbeam::scoring::{parse_model_spec, TableModel};
use optbeam::{ScoringModel, TokenId, Vocab};

const LETTERS: &str = "abcdefghijklmnopqrstuvwxyz";

/// Builds a table model from a spec string.
///
/// - `table:stationary,p1,...,pn`: symbols `a, b, ...` with eos last,
///   the same distribution after every prefix;
/// - `table:uniform,n`: `n` symbols, uniform;
/// - `seeded:...` / `copy:...`: the model's distributions for the empty
///   source, stored for every prefix of up to `depth` tokens; longer
///   prefixes fall back to the empty-prefix distribution.
pub fn cmd_make_model(spec: &str, depth: usize) -> Result<TableModel> {
    if let Some(rest) = spec.strip_prefix("table:") {
        let mut parts = rest.split(',');
        match parts.next() {
            Some("stationary") => {
                let probs = parts
                    .map(|p| {
                        p.trim()
                            .parse::<f64>()
                            .with_context(|| format!("invalid probability {p:?}"))
                    })
                    .collect::<Result<Vec<_>>>()?;
                stationary(probs)
            }
            Some("uniform") => {
                let n: usize = parts
                    .next()
                    .context("missing size")?
                    .parse()
                    .context("invalid size")?;
                ensure!(n >= 1, "uniform table needs at least one symbol");
                stationary(vec![1.0 / n as f64; n])
            }
            other => bail!("unknown table kind {other:?}"),
        }
    } else {
        let model = parse_model_spec(spec)?;
        materialize(model.as_ref(), depth)
    }
}

fn stationary(probs: Vec<f64>) -> Result<TableModel> {
    ensure!(!probs.is_empty(), "no probabilities given");
    ensure!(
        probs.len() <= LETTERS.len() + 1,
        "at most {} symbols",
        LETTERS.len() + 1
    );
    let symbols = LETTERS
        .chars()
        .take(probs.len() - 1)
        .map(String::from)
        .chain(["</s>".to_string()]);
    let vocab = Vocab::new(symbols, "</s>")?;
    Ok(TableModel::stationary(vocab, probs)?)
}

fn materialize(model: &dyn ScoringModel, depth: usize) -> Result<TableModel> {
    let vocab = model.vocab().clone();
    let probs = |prefix: &[TokenId]| -> Result<Vec<f64>> {
        Ok(model
            .next_logprobs(&[], prefix)?
            .into_iter()
            .map(f64::exp)
            .collect())
    };
    let default = probs(&[])?;
    let words: Vec<TokenId> = (0..vocab.len())
        .map(TokenId::from)
        .filter(|&t| t != vocab.eos())
        .collect();
    let mut contexts = Vec::new();
    let mut frontier: Vec<Vec<TokenId>> = vec![Vec::new()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for p in &frontier {
            for &w in &words {
                let mut q = p.clone();
                q.push(w);
                contexts.push((q.clone(), probs(&q)?));
                next.push(q);
            }
        }
        frontier = next;
    }
    Ok(TableModel::new(vocab, default, contexts)?)
}
