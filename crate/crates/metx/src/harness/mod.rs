//! Differential verification: type and semantics preservation of both
//! translations, checked over a curated corpus and generated programs,
//! and the soundness and mode-theory property suites.

pub mod equiv;
pub mod gen;
pub mod lockstep;
pub mod preserve;
pub mod props;

use crate::syntax::ParseError;
use crate::{feps, met, systemc};
use std::fmt;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub use equiv::{admin_normalise, alpha_label_equiv, alpha_label_equiv_in, LabelCorr};
pub use lockstep::{lockstep_simulate, DiffReport, StepRecord, Verdict, DEFAULT_WINDOW};
pub use preserve::{check_type_preservation, Preservation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Calculus {
    Met,
    Feps,
    SystemC,
}

impl Calculus {
    pub fn name(self) -> &'static str {
        match self {
            Calculus::Met => "met",
            Calculus::Feps => "feps",
            Calculus::SystemC => "systemc",
        }
    }

    pub fn from_name(s: &str) -> Option<Calculus> {
        match s {
            "met" => Some(Calculus::Met),
            "feps" => Some(Calculus::Feps),
            "systemc" => Some(Calculus::SystemC),
            _ => None,
        }
    }

    /// The calculus a file extension denotes.
    pub fn from_path(p: &Path) -> Option<Calculus> {
        match p.extension()?.to_str()? {
            "mex" => Some(Calculus::Met),
            "fe" => Some(Calculus::Feps),
            "sc" => Some(Calculus::SystemC),
            _ => None,
        }
    }
}

impl fmt::Display for Calculus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A parsed program in any of the three calculi.
#[derive(Clone, Debug)]
pub enum Source {
    Met(met::Program),
    Feps(feps::FProgram),
    SystemC(systemc::CProgram),
}

impl Source {
    pub fn parse(calculus: Calculus, text: &str) -> Result<Source, ParseError> {
        Ok(match calculus {
            Calculus::Met => Source::Met(met::parse::parse_program(text)?),
            Calculus::Feps => Source::Feps(feps::parse_program(text)?),
            Calculus::SystemC => Source::SystemC(systemc::parse_program(text)?),
        })
    }

    pub fn calculus(&self) -> Calculus {
        match self {
            Source::Met(_) => Calculus::Met,
            Source::Feps(_) => Calculus::Feps,
            Source::SystemC(_) => Calculus::SystemC,
        }
    }
}

/// What running a corpus program should produce.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expected {
    /// Finishes with this rendered value.
    Value(String),
    /// Stops at an unhandled operation on this label.
    Suspended(String),
    /// Rejected by the checker with this error kind.
    Rejected(String),
    /// Not run: open terms and blocks.
    NotRun,
}

impl Expected {
    pub fn parse(s: &str) -> Option<Expected> {
        let (head, rest) = s.split_once(' ').unwrap_or((s, ""));
        Some(match head {
            "value" => Expected::Value(rest.trim().to_string()),
            "suspended" => Expected::Suspended(rest.trim().to_string()),
            "rejected" => Expected::Rejected(rest.trim().to_string()),
            "none" => Expected::NotRun,
            _ => return None,
        })
    }
}

impl fmt::Display for Expected {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expected::Value(v) => write!(f, "value {v}"),
            Expected::Suspended(l) => write!(f, "suspended {l}"),
            Expected::Rejected(k) => write!(f, "rejected {k}"),
            Expected::NotRun => f.write_str("none"),
        }
    }
}

/// One entry of the corpus manifest, with its source text loaded.
#[derive(Clone, Debug)]
pub struct CorpusProgram {
    pub id: String,
    pub calculus: Calculus,
    pub path: PathBuf,
    pub source: String,
    /// The judgement `check` prints, or `-` for rejected programs.
    pub expected_type: String,
    pub expected: Expected,
    /// The worked example the program reproduces.
    pub anchor: String,
}

impl CorpusProgram {
    pub fn parse(&self) -> Result<Source, ParseError> {
        Source::parse(self.calculus, &self.source)
    }

    /// Build an entry from source text, as generators do.
    pub fn inline(id: impl Into<String>, calculus: Calculus, source: impl Into<String>) -> CorpusProgram {
        CorpusProgram {
            id: id.into(),
            calculus,
            path: PathBuf::new(),
            source: source.into(),
            expected_type: String::new(),
            expected: Expected::NotRun,
            anchor: String::new(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("manifest line {line}: {msg}")]
    Syntax { line: usize, msg: String },
}

/// Parse a manifest. Entries are blocks of `key = value` lines opened
/// by `[id]`; `#` starts a comment line.
///
/// ```text
/// [sum]
/// file = sum.mex
/// calculus = met
/// type = Int @ .
/// outcome = value 79
/// anchor = handler summing yielded integers
/// ```
pub fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>, ManifestError> {
    let mut out: Vec<ManifestEntry> = Vec::new();
    let err = |line: usize, msg: String| ManifestError::Syntax { line, msg };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        if let Some(id) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            out.push(ManifestEntry { id: id.trim().to_string(), line, ..Default::default() });
            continue;
        }
        let (k, v) = s.split_once('=').ok_or_else(|| err(line, format!("expected `key = value`, found `{s}`")))?;
        let e = out.last_mut().ok_or_else(|| err(line, "field before the first `[id]`".into()))?;
        let v = v.trim().to_string();
        match k.trim() {
            "file" => e.file = v,
            "calculus" => e.calculus = v,
            "type" => e.ty = v,
            "outcome" => e.outcome = v,
            "anchor" => e.anchor = v,
            other => return Err(err(line, format!("unknown field `{other}`"))),
        }
    }
    for e in &out {
        for (name, v) in [("file", &e.file), ("calculus", &e.calculus), ("type", &e.ty), ("outcome", &e.outcome)] {
            if v.is_empty() {
                return Err(err(e.line, format!("entry `{}` lacks `{name}`", e.id)));
            }
        }
    }
    Ok(out)
}

/// A manifest entry before its file is read.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ManifestEntry {
    pub id: String,
    pub line: usize,
    pub file: String,
    pub calculus: String,
    pub ty: String,
    pub outcome: String,
    pub anchor: String,
}

/// Read a manifest and every program it lists; paths are relative to
/// the manifest's directory.
pub fn load_corpus(manifest: &Path) -> Result<Vec<CorpusProgram>, ManifestError> {
    let io = |p: &Path, source| ManifestError::Io { path: p.display().to_string(), source };
    let text = std::fs::read_to_string(manifest).map_err(|e| io(manifest, e))?;
    let dir = manifest.parent().unwrap_or(Path::new("."));
    parse_manifest(&text)?
        .into_iter()
        .map(|e| {
            let syntax = |msg: String| ManifestError::Syntax { line: e.line, msg };
            let calculus =
                Calculus::from_name(&e.calculus).ok_or_else(|| syntax(format!("unknown calculus `{}`", e.calculus)))?;
            let expected =
                Expected::parse(&e.outcome).ok_or_else(|| syntax(format!("unknown outcome `{}`", e.outcome)))?;
            let path = dir.join(&e.file);
            if Calculus::from_path(&path) != Some(calculus) {
                return Err(syntax(format!("`{}` does not have the extension of {calculus}", e.file)));
            }
            let source = std::fs::read_to_string(&path).map_err(|err| io(&path, err))?;
            Ok(CorpusProgram { id: e.id, calculus, path, source, expected_type: e.ty, expected, anchor: e.anchor })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_blocks() {
        let m = parse_manifest(
            "# corpus\n[a]\nfile = a.mex\ncalculus = met\ntype = Int @ .\noutcome = value 79\nanchor = sum\n\n[b]\nfile = b.fe\ncalculus = feps\ntype = -\noutcome = rejected RowMismatch\n",
        )
        .unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m[0].ty, "Int @ .");
        assert_eq!(Expected::parse(&m[1].outcome), Some(Expected::Rejected("RowMismatch".into())));
        assert!(parse_manifest("[a]\nfile = x\n").is_err());
        assert!(parse_manifest("file = x\n").is_err());
    }
}
