//! Reading and writing tweet documents and their offset-based standoff
//! annotation files.
//!
//! Offsets are Unicode code-point offsets into the document text. Byte
//! offsets never leave this module.
//!
//! Supported annotation lines:
//!
//! ```text
//! T1<TAB>Conclusion 0 5;12 17<TAB>Build walls
//! A1<TAB>Type T1 Policy
//! #1<TAB>CN-A T1<TAB>counter-narrative text
//! ```
//!
//! Relation, event, normalization and equivalence lines (`R`, `E`, `N`,
//! `*`) are recognised and skipped.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Separator placed between the text slices of a discontinuous span.
pub const FRAGMENT_SEPARATOR: &str = " ";

#[derive(Debug, Error)]
pub enum StandoffError {
    #[error("document {0} is not valid UTF-8")]
    Decode(String),
    #[error("document {0} is empty")]
    EmptyDocument(String),
    #[error("annotation {ann_id}: fragment {start}..{end} is outside the document (length {len})")]
    OffsetOutOfRange {
        ann_id: String,
        start: usize,
        end: usize,
        len: usize,
    },
    #[error(
        "annotation {ann_id}: surface mismatch, document has {expected:?} but file has {found:?}"
    )]
    SurfaceMismatch {
        ann_id: String,
        expected: String,
        found: String,
    },
    #[error("line {line_no}: {reason}")]
    MalformedLine { line_no: usize, reason: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Lang {
    #[serde(rename = "EN")]
    En,
    #[serde(rename = "ES")]
    Es,
}

impl Lang {
    pub fn code(self) -> &'static str {
        match self {
            Lang::En => "EN",
            Lang::Es => "ES",
        }
    }
}

/// Half-open code-point range `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DocumentRepr", into = "DocumentRepr")]
pub struct Document {
    id: String,
    text: String,
    lang: Lang,
    // byte offset of every code point, plus the text length
    char_bytes: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct DocumentRepr {
    id: String,
    text: String,
    lang: Lang,
}

impl TryFrom<DocumentRepr> for Document {
    type Error = StandoffError;

    fn try_from(r: DocumentRepr) -> Result<Self, Self::Error> {
        Document::new(r.id, r.text, r.lang)
    }
}

impl From<Document> for DocumentRepr {
    fn from(d: Document) -> Self {
        DocumentRepr {
            id: d.id,
            text: d.text,
            lang: d.lang,
        }
    }
}

impl Document {
    pub fn new(
        id: impl Into<String>,
        text: impl Into<String>,
        lang: Lang,
    ) -> Result<Self, StandoffError> {
        let id = id.into();
        let text = text.into();
        if text.is_empty() {
            return Err(StandoffError::EmptyDocument(id));
        }
        let char_bytes = char_byte_table(&text);
        Ok(Document {
            id,
            text,
            lang,
            char_bytes,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn lang(&self) -> Lang {
        self.lang
    }

    /// Length of the text in code points.
    pub fn char_len(&self) -> usize {
        self.char_bytes.len() - 1
    }

    /// Text between two code-point offsets. Panics if the range is invalid.
    pub fn slice(&self, start: usize, end: usize) -> &str {
        &self.text[self.char_bytes[start]..self.char_bytes[end]]
    }

    pub fn slice_span(&self, span: Span) -> &str {
        self.slice(span.start, span.end)
    }

    /// Concatenation of the fragment slices, joined by [`FRAGMENT_SEPARATOR`].
    pub fn surface_of(&self, fragments: &[Span]) -> String {
        fragments
            .iter()
            .map(|s| self.slice_span(*s))
            .collect::<Vec<_>>()
            .join(FRAGMENT_SEPARATOR)
    }
}

fn char_byte_table(text: &str) -> Vec<usize> {
    let mut table: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
    table.push(text.len());
    table
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Note {
    pub note_type: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawAnnotation {
    pub ann_id: String,
    pub label: String,
    pub fragments: Vec<Span>,
    pub surface: String,
    pub attributes: BTreeMap<String, String>,
    pub notes: Vec<Note>,
}

/// Value stored for attributes written without a value (binary flags).
pub const FLAG_VALUE: &str = "true";

pub fn parse_document(
    id: impl Into<String>,
    bytes: &[u8],
    lang: Lang,
) -> Result<Document, StandoffError> {
    let id = id.into();
    let text = std::str::from_utf8(bytes).map_err(|_| StandoffError::Decode(id.clone()))?;
    Document::new(id, text, lang)
}

/// Reads a document; its id is the file stem.
pub fn read_document(path: &Path, lang: Lang) -> Result<Document, StandoffError> {
    let bytes = fs::read(path).map_err(|source| StandoffError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_document(id, &bytes, lang)
}

pub fn read_annotations(path: &Path, doc: &Document) -> Result<Vec<RawAnnotation>, StandoffError> {
    let bytes = fs::read(path).map_err(|source| StandoffError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_annotations(&bytes, doc)
}

fn malformed(line_no: usize, reason: impl Into<String>) -> StandoffError {
    StandoffError::MalformedLine {
        line_no,
        reason: reason.into(),
    }
}

pub fn parse_annotations(
    bytes: &[u8],
    doc: &Document,
) -> Result<Vec<RawAnnotation>, StandoffError> {
    let text =
        std::str::from_utf8(bytes).map_err(|_| StandoffError::Decode(format!("{}.ann", doc.id)))?;
    let doc_len = doc.char_len();

    let mut anns: Vec<RawAnnotation> = Vec::new();
    let mut by_id: HashMap<String, usize> = HashMap::new();
    // Attribute and note lines may precede the span they point at.
    let mut pending_attrs: Vec<(usize, String, String, String)> = Vec::new();
    let mut pending_notes: Vec<(usize, String, Note)> = Vec::new();

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            continue;
        }
        match line.chars().next() {
            Some('T') => {
                let ann = parse_span_line(line, line_no, doc, doc_len)?;
                if by_id.insert(ann.ann_id.clone(), anns.len()).is_some() {
                    return Err(malformed(line_no, format!("duplicate id {}", ann.ann_id)));
                }
                anns.push(ann);
            }
            Some('A') | Some('M') => {
                let mut cols = line.split('\t');
                let _id = cols.next();
                let body = cols
                    .next()
                    .ok_or_else(|| malformed(line_no, "attribute line without body"))?;
                let mut parts = body.split_whitespace();
                let name = parts
                    .next()
                    .ok_or_else(|| malformed(line_no, "attribute without name"))?;
                let target = parts
                    .next()
                    .ok_or_else(|| malformed(line_no, "attribute without target"))?;
                let value = parts.next().unwrap_or(FLAG_VALUE);
                if parts.next().is_some() {
                    return Err(malformed(line_no, "attribute has trailing fields"));
                }
                pending_attrs.push((
                    line_no,
                    target.to_owned(),
                    name.to_owned(),
                    value.to_owned(),
                ));
            }
            Some('#') => {
                let mut cols = line.splitn(3, '\t');
                let _id = cols.next();
                let head = cols
                    .next()
                    .ok_or_else(|| malformed(line_no, "note line without body"))?;
                let note_text = cols.next().unwrap_or("");
                let mut parts = head.split_whitespace();
                let note_type = parts
                    .next()
                    .ok_or_else(|| malformed(line_no, "note without type"))?;
                let target = parts
                    .next()
                    .ok_or_else(|| malformed(line_no, "note without target"))?;
                pending_notes.push((
                    line_no,
                    target.to_owned(),
                    Note {
                        note_type: note_type.to_owned(),
                        text: note_text.to_owned(),
                    },
                ));
            }
            Some('R') | Some('E') | Some('N') | Some('*') => {
                log::debug!("{}: skipping line {line_no}", doc.id);
            }
            _ => return Err(malformed(line_no, "unrecognised line type")),
        }
    }

    for (line_no, target, name, value) in pending_attrs {
        let &i = by_id.get(&target).ok_or_else(|| {
            malformed(
                line_no,
                format!("attribute refers to unknown span {target}"),
            )
        })?;
        anns[i].attributes.insert(name, value);
    }
    for (line_no, target, note) in pending_notes {
        let &i = by_id
            .get(&target)
            .ok_or_else(|| malformed(line_no, format!("note refers to unknown span {target}")))?;
        anns[i].notes.push(note);
    }
    Ok(anns)
}

fn parse_span_line(
    line: &str,
    line_no: usize,
    doc: &Document,
    doc_len: usize,
) -> Result<RawAnnotation, StandoffError> {
    let mut cols = line.splitn(3, '\t');
    let ann_id = cols.next().unwrap_or_default().to_owned();
    let body = cols
        .next()
        .ok_or_else(|| malformed(line_no, "span line without label and offsets"))?;
    let surface = cols
        .next()
        .ok_or_else(|| malformed(line_no, "span line without surface text"))?
        .to_owned();

    let (label, offsets) = body
        .split_once(' ')
        .ok_or_else(|| malformed(line_no, "span line without offsets"))?;

    let mut fragments = Vec::new();
    for frag in offsets.split(';') {
        let mut nums = frag.split_whitespace();
        let parse = |s: Option<&str>| -> Result<usize, StandoffError> {
            s.ok_or_else(|| malformed(line_no, "incomplete offset pair"))?
                .parse()
                .map_err(|_| malformed(line_no, format!("bad offset in {frag:?}")))
        };
        let start = parse(nums.next())?;
        let end = parse(nums.next())?;
        if nums.next().is_some() {
            return Err(malformed(
                line_no,
                format!("extra tokens in offset pair {frag:?}"),
            ));
        }
        if end > doc_len || start >= end {
            return Err(StandoffError::OffsetOutOfRange {
                ann_id,
                start,
                end,
                len: doc_len,
            });
        }
        fragments.push(Span { start, end });
    }
    for pair in fragments.windows(2) {
        if pair[1].start < pair[0].end {
            return Err(malformed(
                line_no,
                format!("fragments of {ann_id} are unsorted or overlapping"),
            ));
        }
    }

    let expected = doc.surface_of(&fragments);
    if expected != surface {
        return Err(StandoffError::SurfaceMismatch {
            ann_id,
            expected,
            found: surface,
        });
    }

    Ok(RawAnnotation {
        ann_id,
        label: label.to_owned(),
        fragments,
        surface,
        attributes: BTreeMap::new(),
        notes: Vec::new(),
    })
}

/// Writes annotations in canonical order: all span lines, then attribute
/// lines, then note lines. Attribute and note ids are renumbered.
pub fn serialize_annotations(anns: &[RawAnnotation]) -> String {
    let mut out = String::new();
    for ann in anns {
        let offsets = ann
            .fragments
            .iter()
            .map(|s| format!("{} {}", s.start, s.end))
            .collect::<Vec<_>>()
            .join(";");
        let _ = writeln!(
            out,
            "{}\t{} {}\t{}",
            ann.ann_id, ann.label, offsets, ann.surface
        );
    }
    let mut attr_no = 0;
    for ann in anns {
        for (name, value) in &ann.attributes {
            attr_no += 1;
            if value == FLAG_VALUE {
                let _ = writeln!(out, "A{attr_no}\t{name} {}", ann.ann_id);
            } else {
                let _ = writeln!(out, "A{attr_no}\t{name} {} {value}", ann.ann_id);
            }
        }
    }
    let mut note_no = 0;
    for ann in anns {
        for note in &ann.notes {
            note_no += 1;
            let _ = writeln!(
                out,
                "#{note_no}\t{} {}\t{}",
                note.note_type, ann.ann_id, note.text
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(text: &str) -> Document {
        Document::new("t", text, Lang::En).unwrap()
    }

    #[test]
    fn document_keeps_text_verbatim() {
        let text = "No to #EU migrant camps in Libya, PM al-Serraj https://t.co/hlsSOU73lQ ";
        let d = parse_document("1", text.as_bytes(), Lang::En).unwrap();
        assert_eq!(d.text(), text);
    }

    #[test]
    fn empty_document_is_rejected() {
        assert!(matches!(
            parse_document("x", b"", Lang::En),
            Err(StandoffError::EmptyDocument(_))
        ));
    }

    #[test]
    fn invalid_utf8_is_rejected() {
        assert!(matches!(
            parse_document("x", &[0xff, 0xfe], Lang::En),
            Err(StandoffError::Decode(_))
        ));
    }

    #[test]
    fn offsets_count_code_points() {
        let d = doc("🔥🔥 Send them back 🇺🇸 now");
        // "Send" starts after two emoji and a space.
        let ann = "T1\tConclusion 3 17\tSend them back\nT2\tProperty 18 20\t🇺🇸\n";
        let anns = parse_annotations(ann.as_bytes(), &d).unwrap();
        for a in &anns {
            assert_eq!(d.surface_of(&a.fragments), a.surface);
        }
        assert_eq!(anns[1].fragments, vec![Span::new(18, 20)]);
    }

    #[test]
    fn single_contiguous_span() {
        let d = doc("Build walls");
        let anns = parse_annotations(b"T1\tConclusion 0 5\tBuild", &d).unwrap();
        assert_eq!(anns.len(), 1);
        assert_eq!(anns[0].label, "Conclusion");
        assert_eq!(anns[0].fragments, vec![Span::new(0, 5)]);
        assert_eq!(anns[0].surface, "Build");
    }

    #[test]
    fn discontinuous_span() {
        let d = doc("Build walls, stop crime");
        assert_eq!(d.slice(0, 5), "Build");
        assert_eq!(d.slice(13, 17), "stop");
        let anns = parse_annotations(b"T2\tJustification 0 5;13 17\tBuild stop", &d).unwrap();
        assert_eq!(anns[0].fragments, vec![Span::new(0, 5), Span::new(13, 17)]);
    }

    #[test]
    fn out_of_range_span() {
        let d = doc("Build walls");
        let err = parse_annotations(b"T1\tConclusion 6 40\twalls", &d).unwrap_err();
        assert!(matches!(
            err,
            StandoffError::OffsetOutOfRange { end: 40, .. }
        ));
    }

    #[test]
    fn surface_mismatch_is_not_repaired() {
        let d = doc("Build walls");
        let err = parse_annotations(b"T1\tConclusion 0 5\tbuild", &d).unwrap_err();
        match err {
            StandoffError::SurfaceMismatch {
                ann_id,
                expected,
                found,
            } => {
                assert_eq!(ann_id, "T1");
                assert_eq!(expected, "Build");
                assert_eq!(found, "build");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let d = doc("Build walls");
        let err = parse_annotations(
            b"T1\tConclusion 0 5\tBuild\nT2\tConclusion zero 5\tBuild",
            &d,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            StandoffError::MalformedLine { line_no: 2, .. }
        ));
        let err = parse_annotations(b"X1\twhat", &d).unwrap_err();
        assert!(matches!(
            err,
            StandoffError::MalformedLine { line_no: 1, .. }
        ));
        let err = parse_annotations(b"A1\tType T9 Fact", &d).unwrap_err();
        assert!(matches!(
            err,
            StandoffError::MalformedLine { line_no: 1, .. }
        ));
    }

    #[test]
    fn overlapping_fragments_rejected() {
        let d = doc("Build walls now");
        let err = parse_annotations(b"T1\tConclusion 0 5;3 8\tBuild ld wa", &d).unwrap_err();
        assert!(matches!(err, StandoffError::MalformedLine { .. }));
    }

    #[test]
    fn attributes_and_notes_attach_to_spans() {
        let d = doc("Build walls");
        let src = "A1\tType T1 Policy\nT1\tConclusion 0 11\tBuild walls\n#1\tCN-A T1\tWalls fix nothing.\nA2\tUncertain T1\nR1\tSupports Arg1:T1 Arg2:T1\n";
        let anns = parse_annotations(src.as_bytes(), &d).unwrap();
        assert_eq!(anns[0].attributes["Type"], "Policy");
        assert_eq!(anns[0].attributes["Uncertain"], FLAG_VALUE);
        assert_eq!(
            anns[0].notes,
            vec![Note {
                note_type: "CN-A".into(),
                text: "Walls fix nothing.".into()
            }]
        );
    }

    #[test]
    fn serialize_empty_is_empty() {
        assert_eq!(serialize_annotations(&[]), "");
    }

    #[test]
    fn serialize_single_line() {
        let d = doc("Build walls");
        let anns = parse_annotations(b"T1\tConclusion 0 5\tBuild", &d).unwrap();
        assert_eq!(serialize_annotations(&anns), "T1\tConclusion 0 5\tBuild\n");
    }
}
