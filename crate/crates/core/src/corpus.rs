//! Loading whole corpora: a directory tree of `.txt`/`.ann` pairs, or a
//! JSON-lines file of already-typed tweets.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use walkdir::WalkDir;

use crate::scheme::{from_raw, to_raw, AnnotatedTweet, MappingConfig, SchemeError};
use crate::standoff::{
    parse_annotations, parse_document, serialize_annotations, Lang, StandoffError,
};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Standoff {
        path: String,
        #[source]
        source: StandoffError,
    },
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    Json {
        path: String,
        line: usize,
        reason: String,
    },
    #[error("tweet id {0} appears more than once")]
    DuplicateId(String),
    #[error("{0} is not a directory")]
    NotADirectory(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// How a corpus directory is read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusConfig {
    pub mapping: MappingConfig,
    pub default_lang: Lang,
    /// Directory names (lower-cased) that mark everything below them as
    /// being in a given language.
    pub lang_dirs: BTreeMap<String, Lang>,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        let lang_dirs = [
            ("en", Lang::En),
            ("english", Lang::En),
            ("es", Lang::Es),
            ("spanish", Lang::Es),
            ("espanol", Lang::Es),
            ("español", Lang::Es),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_owned(), v))
        .collect();
        CorpusConfig {
            mapping: MappingConfig::default(),
            default_lang: Lang::En,
            lang_dirs,
        }
    }
}

impl CorpusConfig {
    pub fn from_toml(src: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(src)
    }

    fn lang_for(&self, root: &Path, file: &Path) -> Lang {
        let rel = file.strip_prefix(root).unwrap_or(file);
        let mut lang = self.default_lang;
        for comp in rel.parent().into_iter().flat_map(Path::components) {
            let name = comp.as_os_str().to_string_lossy().to_lowercase();
            if let Some(&l) = self.lang_dirs.get(&name) {
                lang = l;
            }
        }
        lang
    }
}

/// Text files under `root` that have a sibling annotation file, in path order.
pub fn document_paths(root: &Path) -> Result<Vec<(PathBuf, PathBuf)>, CorpusError> {
    if !root.is_dir() {
        return Err(CorpusError::NotADirectory(root.display().to_string()));
    }
    let mut out = Vec::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| CorpusError::Io {
            path: root.display().to_string(),
            source: e.into(),
        })?;
        let p = entry.path();
        if p.extension().and_then(|e| e.to_str()) == Some("txt") {
            let ann = p.with_extension("ann");
            if ann.is_file() {
                out.push((p.to_path_buf(), ann));
            } else {
                log::debug!("skipping {} (no annotation file)", p.display());
            }
        }
    }
    Ok(out)
}

/// Reads every document/annotation pair under `root`.
pub fn load_corpus_dir(
    root: &Path,
    cfg: &CorpusConfig,
) -> Result<Vec<AnnotatedTweet>, CorpusError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (txt, ann) in document_paths(root)? {
        let id = txt
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        if !seen.insert(id.clone()) {
            return Err(CorpusError::DuplicateId(id));
        }
        let lang = cfg.lang_for(root, &txt);
        let bytes = fs::read(&txt).map_err(io_err(&txt))?;
        let doc = parse_document(id, &bytes, lang).map_err(|source| CorpusError::Standoff {
            path: txt.display().to_string(),
            source,
        })?;
        let ann_bytes = fs::read(&ann).map_err(io_err(&ann))?;
        let raw = parse_annotations(&ann_bytes, &doc).map_err(|source| CorpusError::Standoff {
            path: ann.display().to_string(),
            source,
        })?;
        out.push(from_raw(doc, &raw, &cfg.mapping)?);
    }
    Ok(out)
}

/// Writes `<lang>/<id>.txt`/`<lang>/<id>.ann` pairs below `root`, with
/// `<lang>` lower-cased so that the default config reads the language back.
pub fn write_corpus_dir(
    root: &Path,
    corpus: &[AnnotatedTweet],
    mapping: &MappingConfig,
) -> Result<(), CorpusError> {
    for t in corpus {
        let dir = root.join(t.doc.lang().code().to_lowercase());
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let txt = dir.join(format!("{}.txt", t.id()));
        fs::write(&txt, t.doc.text()).map_err(io_err(&txt))?;
        let ann = dir.join(format!("{}.ann", t.id()));
        fs::write(&ann, serialize_annotations(&to_raw(t, mapping))).map_err(io_err(&ann))?;
    }
    Ok(())
}

pub fn write_jsonl(path: &Path, corpus: &[AnnotatedTweet]) -> Result<(), CorpusError> {
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    for t in corpus {
        let line = serde_json::to_string(t).expect("tweet serialize");
        writeln!(f, "{line}").map_err(io_err(path))?;
    }
    Ok(())
}

pub fn read_jsonl(path: &Path) -> Result<Vec<AnnotatedTweet>, CorpusError> {
    let f = fs::File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let t: AnnotatedTweet = serde_json::from_str(&line).map_err(|e| CorpusError::Json {
            path: path.display().to_string(),
            line: i + 1,
            reason: e.to_string(),
        })?;
        if !seen.insert(t.id().to_owned()) {
            return Err(CorpusError::DuplicateId(t.id().to_owned()));
        }
        out.push(t);
    }
    Ok(out)
}

/// Loads a corpus from a directory of standoff files or a `.jsonl` file.
pub fn load_corpus(path: &Path, cfg: &CorpusConfig) -> Result<Vec<AnnotatedTweet>, CorpusError> {
    if path.is_dir() {
        load_corpus_dir(path, cfg)
    } else {
        read_jsonl(path)
    }
}

/// SHA-256 over relative paths and contents of the corpus files (or of
/// the single corpus file).
pub fn corpus_hash(path: &Path) -> Result<String, CorpusError> {
    let mut h = Sha256::new();
    if path.is_dir() {
        for (txt, ann) in document_paths(path)? {
            for p in [txt, ann] {
                let rel = p
                    .strip_prefix(path)
                    .unwrap_or(&p)
                    .to_string_lossy()
                    .replace('\\', "/");
                h.update(rel.as_bytes());
                h.update([0u8]);
                h.update(fs::read(&p).map_err(io_err(&p))?);
                h.update([0u8]);
            }
        }
    } else {
        h.update(fs::read(path).map_err(io_err(path))?);
    }
    Ok(hex::encode(h.finalize()))
}
