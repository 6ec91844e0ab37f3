//! Model spec strings:
//!
//! ```text
//! seeded:v=<int>,seed=<int>[,conc=<float>][,eosg=<float>]
//! copy:base=<spec>,bias=<float>,slack=<int>
//! ```

use super::seeded::{DEFAULT_CONCENTRATION, DEFAULT_EOS_GROWTH};
use super::{CopyChannelModel, ScoringModel, SeededModel};
use crate::error::{Error, Result};

fn err<T>(pos: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        pos,
        msg: msg.into(),
    })
}

pub fn make_seeded_model(spec: &str) -> Result<SeededModel> {
    parse_seeded(spec, 0)
}

/// Parses a seeded or copy-channel spec; `offset` shifts reported positions
/// when the spec is nested.
fn parse_seeded(spec: &str, offset: usize) -> Result<SeededModel> {
    const PREFIX: &str = "seeded:";
    let Some(body) = spec.strip_prefix(PREFIX) else {
        return err(offset, "expected \"seeded:\"");
    };
    let mut pos = offset + PREFIX.len();
    let (mut v, mut seed, mut conc, mut eosg) = (None, None, None, None);
    for field in body.split(',') {
        let Some((key, value)) = field.split_once('=') else {
            return err(pos, format!("expected key=value, found {field:?}"));
        };
        let vpos = pos + key.len() + 1;
        let bad = |what: &str| err(vpos, format!("invalid {what} {value:?}"));
        match key {
            "v" => match value.parse::<usize>() {
                Ok(n) if n >= 1 => v = Some(n),
                _ => return bad("vocabulary size"),
            },
            "seed" => match value.parse::<u64>() {
                Ok(s) => seed = Some(s),
                _ => return bad("seed"),
            },
            "conc" => match value.parse::<f64>() {
                Ok(c) if c > 0.0 && c.is_finite() => conc = Some(c),
                _ => return bad("concentration"),
            },
            "eosg" => match value.parse::<f64>() {
                Ok(g) if g >= 0.0 && g.is_finite() => eosg = Some(g),
                _ => return bad("eos growth"),
            },
            _ => return err(pos, format!("unknown key {key:?}")),
        }
        pos += field.len() + 1;
    }
    let end = offset + spec.len();
    let v = v.map_or_else(|| err(end, "missing v"), Ok)?;
    let seed = seed.map_or_else(|| err(end, "missing seed"), Ok)?;
    Ok(SeededModel::new(
        v,
        seed,
        conc.unwrap_or(DEFAULT_CONCENTRATION),
        eosg.unwrap_or(DEFAULT_EOS_GROWTH),
    ))
}

pub fn parse_copy_spec(spec: &str) -> Result<CopyChannelModel> {
    parse_copy(spec, 0)
}

fn parse_copy(spec: &str, offset: usize) -> Result<CopyChannelModel> {
    const PREFIX: &str = "copy:base=";
    if !spec.starts_with(PREFIX) {
        return err(offset, "expected \"copy:base=\"");
    }
    // base specs contain commas, so peel the fixed trailing fields first
    let Some((rest, slack_field)) = spec.rsplit_once(',') else {
        return err(offset + spec.len(), "missing slack");
    };
    let slack_pos = offset + rest.len() + 1;
    let Some(slack) = slack_field.strip_prefix("slack=") else {
        return err(slack_pos, "expected slack=<int>");
    };
    let slack: usize = slack.parse().map_err(|_| Error::Parse {
        pos: slack_pos + 6,
        msg: format!("invalid slack {slack:?}"),
    })?;
    let Some((base, bias_field)) = rest.rsplit_once(',') else {
        return err(slack_pos, "missing bias");
    };
    let bias_pos = offset + base.len() + 1;
    let Some(bias) = bias_field.strip_prefix("bias=") else {
        return err(bias_pos, "expected bias=<float>");
    };
    let bias: f64 = match bias.parse() {
        Ok(b) if b >= 0.0 && f64::is_finite(b) => b,
        _ => return err(bias_pos + 5, format!("invalid bias {bias:?}")),
    };
    let base_spec = &base[PREFIX.len()..];
    let inner = parse_nested(base_spec, offset + PREFIX.len())?;
    Ok(CopyChannelModel::new(inner, bias, slack))
}

fn parse_nested(spec: &str, offset: usize) -> Result<Box<dyn ScoringModel>> {
    if spec.starts_with("seeded:") {
        Ok(Box::new(parse_seeded(spec, offset)?))
    } else if spec.starts_with("copy:") {
        Ok(Box::new(parse_copy(spec, offset)?))
    } else {
        err(offset, "expected \"seeded:\" or \"copy:\"")
    }
}

/// Parses any model spec string understood by this crate.
pub fn parse_model_spec(spec: &str) -> Result<Box<dyn ScoringModel>> {
    parse_nested(spec.trim(), 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::TokenId;

    #[test]
    fn seeded_defaults_and_options() {
        let m = make_seeded_model("seeded:v=5,seed=42").unwrap();
        assert_eq!(m.vocab().len(), 5);
        assert_eq!(m.seed(), 42);
        assert_eq!(m.concentration(), DEFAULT_CONCENTRATION);
        let m = make_seeded_model("seeded:v=3,seed=1,conc=2.5,eosg=0.5").unwrap();
        assert_eq!((m.concentration(), m.eos_growth()), (2.5, 0.5));
    }

    #[test]
    fn same_spec_same_model() {
        let a = make_seeded_model("seeded:v=5,seed=42").unwrap();
        let b = make_seeded_model("seeded:v=5,seed=42").unwrap();
        let src = [TokenId(0), TokenId(3)];
        assert_eq!(
            a.next_logprobs(&src, &[TokenId(1)]),
            b.next_logprobs(&src, &[TokenId(1)])
        );
    }

    #[test]
    fn error_positions() {
        let cases = [
            ("seedd:v=5", 0),
            ("seeded:v=x,seed=1", 9),
            ("seeded:v=5,sed=1", 11),
            ("seeded:v=5,seed", 11),
            ("seeded:v=5", 10),
            ("seeded:v=0,seed=1", 9),
            ("seeded:v=3,seed=1,conc=-1", 23),
        ];
        for (spec, pos) in cases {
            match make_seeded_model(spec) {
                Err(Error::Parse { pos: p, .. }) => assert_eq!(p, pos, "{spec}"),
                other => panic!("{spec}: {other:?}"),
            }
        }
    }

    #[test]
    fn copy_spec() {
        let m = parse_copy_spec("copy:base=seeded:v=5,seed=42,bias=2.0,slack=1").unwrap();
        assert_eq!((m.copy_bias(), m.slack()), (2.0, 1));
        assert_eq!(m.vocab().len(), 5);
        let nested = parse_model_spec(
            "copy:base=copy:base=seeded:v=4,seed=1,bias=1,slack=0,bias=0.5,slack=2",
        );
        assert!(nested.is_ok());
    }

    #[test]
    fn copy_spec_errors() {
        match parse_copy_spec("copy:base=seeded:v=5,seed=x,bias=2.0,slack=1") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 26),
            other => panic!("{:?}", other.err()),
        }
        match parse_copy_spec("copy:base=seeded:v=5,seed=1,bias=2.0,slack=z") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 43),
            other => panic!("{:?}", other.err()),
        }
        assert!(parse_copy_spec("copy:base=seeded:v=5,seed=1,slack=1").is_err());
        assert!(parse_model_spec("table:x").is_err());
    }
}
