//! Observation datasets and their plain-text file format:
//!
//! ```text
//! # dimO=6 count=2 length=4
//! 0 3 5 1
//! 2 2 0 4
//! ```
//!
//! One sequence per line, space-separated symbols. `length` is the common
//! sequence length, or `var` when lengths differ.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::random::Rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationDataset {
    pub dim_o: usize,
    pub sequences: Vec<Vec<usize>>,
}

impl ObservationDataset {
    /// Checks that sequences are non-empty and symbols are in range.
    pub fn new(dim_o: usize, sequences: Vec<Vec<usize>>) -> Result<Self> {
        if dim_o == 0 {
            return Err(Error::Input("dimO must be positive".into()));
        }
        for seq in &sequences {
            if seq.is_empty() {
                return Err(Error::Input("sequences must be non-empty".into()));
            }
            if let Some(&y) = seq.iter().find(|&&y| y >= dim_o) {
                return Err(Error::SymbolOutOfRange { symbol: y, dim_o });
            }
        }
        Ok(Self { dim_o, sequences })
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    /// Common sequence length, if all sequences share one.
    pub fn common_length(&self) -> Option<usize> {
        let first = self.sequences.first()?.len();
        self.sequences.iter().all(|s| s.len() == first).then_some(first)
    }

    pub fn header(&self) -> String {
        let length = match self.common_length() {
            Some(l) => l.to_string(),
            None => "var".to_string(),
        };
        format!("# dimO={} count={} length={}", self.dim_o, self.len(), length)
    }

    pub fn to_text(&self) -> String {
        let mut out = self.header();
        out.push('\n');
        for seq in &self.sequences {
            let mut first = true;
            for y in seq {
                if !first {
                    out.push(' ');
                }
                first = false;
                write!(out, "{y}").expect("writing to a String");
            }
            out.push('\n');
        }
        out
    }

    /// Parses the text format; `path` only labels errors.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let parse_err = |line: usize, msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let mut lines = text.lines().enumerate();
        let Some((_, header)) = lines.next() else {
            return Err(Error::EmptyDataset);
        };
        let (dim_o, count, length) = parse_header(header).map_err(|m| parse_err(1, m))?;

        let mut sequences = Vec::with_capacity(count);
        for (idx, line) in lines {
            let lineno = idx + 1;
            if line.trim().is_empty() {
                return Err(parse_err(lineno, "empty sequence".into()));
            }
            let mut seq = Vec::new();
            for tok in line.split_ascii_whitespace() {
                let y: usize = tok
                    .parse()
                    .map_err(|_| parse_err(lineno, format!("invalid symbol `{tok}`")))?;
                if y >= dim_o {
                    return Err(Error::SymbolRange {
                        path: path.to_path_buf(),
                        line: lineno,
                        symbol: y,
                        dim_o,
                    });
                }
                seq.push(y);
            }
            if let Some(l) = length {
                if seq.len() != l {
                    return Err(parse_err(lineno, format!("expected {l} symbols, found {}", seq.len())));
                }
            }
            sequences.push(seq);
        }
        if sequences.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if sequences.len() != count {
            return Err(parse_err(
                1,
                format!("header declares {count} sequences, file has {}", sequences.len()),
            ));
        }
        Ok(Self { dim_o, sequences })
    }
}

fn parse_header(line: &str) -> std::result::Result<(usize, usize, Option<usize>), String> {
    let rest = line
        .strip_prefix('#')
        .ok_or_else(|| format!("expected header `# dimO=<s> count=<W> length=<l>`, got `{line}`"))?;
    let mut dim_o = None;
    let mut count = None;
    let mut length = None;
    for field in rest.split_ascii_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| format!("malformed header field `{field}`"))?;
        let num = || value.parse::<usize>().map_err(|_| format!("invalid value in `{field}`"));
        match key {
            "dimO" => dim_o = Some(num()?),
            "count" => count = Some(num()?),
            "length" if value == "var" => length = Some(None),
            "length" => length = Some(Some(num()?)),
            other => return Err(format!("unknown header field `{other}`")),
        }
    }
    match (dim_o, count, length) {
        (Some(0), _, _) => Err("dimO must be positive".into()),
        (Some(d), Some(c), Some(l)) => Ok((d, c, l)),
        _ => Err("header must set dimO, count and length".into()),
    }
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<ObservationDataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ObservationDataset::parse(&text, path)
}

pub fn write_dataset(ds: &ObservationDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, ds.to_text()).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitTag {
    Train,
    Val,
    Test,
}

/// A dataset partitioned into train, validation and test sequences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitDataset {
    pub train: ObservationDataset,
    pub val: ObservationDataset,
    pub test: ObservationDataset,
    /// Tag of each sequence in the source dataset.
    pub tags: Vec<SplitTag>,
}

/// Seeded shuffled assignment of `(train, val, test)` counts. Sequences keep
/// their source order within each part.
pub fn split_dataset(ds: &ObservationDataset, proportions: (usize, usize, usize), seed: u64) -> Result<SplitDataset> {
    let (a, b, c) = proportions;
    if a + b + c != ds.len() {
        return Err(Error::Input(format!(
            "split {a}/{b}/{c} does not add up to {} sequences",
            ds.len()
        )));
    }
    let mut order: Vec<usize> = (0..ds.len()).collect();
    Rng::seed(seed).shuffle(&mut order);
    let mut tags = vec![SplitTag::Test; ds.len()];
    for &i in &order[..a] {
        tags[i] = SplitTag::Train;
    }
    for &i in &order[a..a + b] {
        tags[i] = SplitTag::Val;
    }
    let part = |tag: SplitTag| ObservationDataset {
        dim_o: ds.dim_o,
        sequences: ds
            .sequences
            .iter()
            .zip(&tags)
            .filter(|(_, &t)| t == tag)
            .map(|(s, _)| s.clone())
            .collect(),
    };
    Ok(SplitDataset {
        train: part(SplitTag::Train),
        val: part(SplitTag::Val),
        test: part(SplitTag::Test),
        tags,
    })
}
