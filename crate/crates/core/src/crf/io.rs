//! Line-based model file.
//!
//! ```text
//! vnner-crf 1
//! layout surface,pos
//! features {"word":true,...}
//! meta <key>\t<value>          (zero or more)
//! labels <L>
//! <label>                      (L lines)
//! attributes <M>
//! <attribute key>              (M lines)
//! transitions
//! <L space-separated floats>   (L lines, row = previous label)
//! state
//! <L space-separated floats>   (M lines, row = attribute)
//! end
//! ```
//!
//! Floats are written in shortest round-trip scientific notation, so a
//! save/load cycle reproduces every weight bit for bit and the same model
//! always serializes to the same bytes.

use std::io::{BufRead, Write};

use super::{AttributeIndex, CrfError, CrfModel, LabelSet, Result};
use crate::corpus::Layout;

pub const MAGIC: &str = "vnner-crf";
pub const VERSION: u32 = 1;

pub fn save_model<W: Write>(model: &CrfModel, mut w: W) -> Result<()> {
    let l = model.num_labels();
    writeln!(w, "{MAGIC} {VERSION}")?;
    writeln!(w, "layout {}", model.layout)?;
    let features = serde_json::to_string(&model.feature_config).expect("feature config serializes");
    writeln!(w, "features {features}")?;
    for (k, v) in &model.metadata {
        if k.is_empty() || k.contains(['\t', '\n', '\r', ' ']) || v.contains(['\n', '\r']) {
            return Err(CrfError::InvalidConfig(format!(
                "metadata `{k}` cannot be stored on one line"
            )));
        }
        writeln!(w, "meta {k}\t{v}")?;
    }
    writeln!(w, "labels {l}")?;
    for tag in model.labels.iter() {
        writeln!(w, "{tag}")?;
    }
    writeln!(w, "attributes {}", model.attributes.len())?;
    for key in model.attributes.iter() {
        writeln!(w, "{key}")?;
    }
    writeln!(w, "transitions")?;
    write_rows(&mut w, &model.transition_weights, l)?;
    writeln!(w, "state")?;
    write_rows(&mut w, &model.state_weights, l)?;
    writeln!(w, "end")?;
    w.flush()?;
    Ok(())
}

fn write_rows<W: Write>(w: &mut W, values: &[f64], width: usize) -> Result<()> {
    for row in values.chunks(width) {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                w.write_all(b" ")?;
            }
            write!(w, "{v:e}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn err(&self, message: impl Into<String>) -> CrfError {
        CrfError::Format {
            line: self.line,
            message: message.into(),
        }
    }

    fn next(&mut self, what: &str) -> Result<String> {
        self.line += 1;
        match self.inner.next() {
            Some(line) => Ok(line?),
            None => Err(self.err(format!("unexpected end of file, expected {what}"))),
        }
    }

    fn peek_prefixed(&mut self, prefix: &str) -> Result<(String, Option<String>)> {
        let line = self.next(prefix)?;
        let rest = line.strip_prefix(prefix).map(|r| r.trim_start_matches(' ').to_owned());
        Ok((line, rest))
    }

    fn field(&mut self, prefix: &str) -> Result<String> {
        let (_, rest) = self.peek_prefixed(prefix)?;
        rest.ok_or_else(|| self.err(format!("expected `{prefix}`")))
    }

    fn count(&mut self, prefix: &str) -> Result<usize> {
        let value = self.field(prefix)?;
        value.parse().map_err(|_| self.err(format!("bad count `{value}`")))
    }

    fn rows(&mut self, count: usize, width: usize, out: &mut Vec<f64>) -> Result<()> {
        for _ in 0..count {
            let line = self.next("weights")?;
            let before = out.len();
            for field in line.split(' ') {
                let v: f64 = field.parse().map_err(|_| self.err(format!("bad weight `{field}`")))?;
                if !v.is_finite() {
                    return Err(self.err("non-finite weight"));
                }
                out.push(v);
            }
            if out.len() - before != width {
                return Err(self.err(format!("expected {width} weights, found {}", out.len() - before)));
            }
        }
        Ok(())
    }
}

pub fn load_model<R: BufRead>(reader: R) -> Result<CrfModel> {
    let mut lines = Lines {
        inner: reader.lines(),
        line: 0,
    };
    let header = lines.next("header")?;
    let version = header
        .strip_prefix(MAGIC)
        .and_then(|r| r.strip_prefix(' '))
        .ok_or_else(|| lines.err("not a vnner-crf model file"))?;
    if version != VERSION.to_string() {
        return Err(CrfError::Version {
            found: version.to_owned(),
            expected: VERSION,
        });
    }

    let layout_text = lines.field("layout")?;
    let layout: Layout = layout_text.parse().map_err(|e| lines.err(format!("bad layout: {e}")))?;
    let features_text = lines.field("features")?;
    let feature_config =
        serde_json::from_str(&features_text).map_err(|e| lines.err(format!("bad feature config: {e}")))?;

    let mut metadata = std::collections::BTreeMap::new();
    let num_labels = loop {
        let (line, meta) = lines.peek_prefixed("meta ")?;
        if let Some(meta) = meta {
            let (k, v) = meta.split_once('\t').ok_or_else(|| lines.err("bad metadata line"))?;
            metadata.insert(k.to_owned(), v.to_owned());
            continue;
        }
        let count = line
            .strip_prefix("labels ")
            .ok_or_else(|| lines.err("expected `labels`"))?;
        break count
            .parse::<usize>()
            .map_err(|_| lines.err(format!("bad count `{count}`")))?;
    };
    if num_labels == 0 {
        return Err(lines.err("model has no labels"));
    }
    let mut labels = LabelSet::new();
    for _ in 0..num_labels {
        let text = lines.next("label")?;
        let tag = text.parse().map_err(|_| lines.err(format!("bad label `{text}`")))?;
        if labels.index(&tag).is_some() {
            return Err(lines.err(format!("duplicate label `{text}`")));
        }
        labels.insert(tag);
    }

    let num_attributes = lines.count("attributes")?;
    let mut attributes = AttributeIndex::new();
    for _ in 0..num_attributes {
        let key = lines.next("attribute")?;
        if attributes.id(&key).is_some() {
            return Err(lines.err(format!("duplicate attribute `{key}`")));
        }
        attributes.insert(key);
    }

    if lines.next("transitions")? != "transitions" {
        return Err(lines.err("expected `transitions`"));
    }
    let mut transition_weights = Vec::with_capacity(num_labels * num_labels);
    lines.rows(num_labels, num_labels, &mut transition_weights)?;
    if lines.next("state")? != "state" {
        return Err(lines.err("expected `state`"));
    }
    let mut state_weights = Vec::with_capacity(num_attributes * num_labels);
    lines.rows(num_attributes, num_labels, &mut state_weights)?;
    if lines.next("end")? != "end" {
        return Err(lines.err("expected `end`"));
    }

    Ok(CrfModel {
        labels,
        attributes,
        state_weights,
        transition_weights,
        feature_config,
        layout,
        metadata,
    })
}
