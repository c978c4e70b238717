use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use super::types::{DocVersion, Granularity};
use super::ModelError;

pub const SCHEMA_VERSION: u32 = 1;

/// A text element of a document graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextNode {
    pub id: String,
    pub granularity: Granularity,
    pub text: String,
    /// `None` for nodes attached directly to the document root (sections).
    pub parent: Option<String>,
    /// Position among siblings, contiguous from 0.
    pub ordinal: usize,
    /// Titles and list items: never segmented into sentences.
    pub protected: bool,
}

/// On-disk document layout. Paragraphs may carry their segmented `sentences`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentRecord {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub doc_id: String,
    pub version: DocVersion,
    pub sections: Vec<SectionRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default)]
    pub title: String,
    pub paragraphs: Vec<ParagraphRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParagraphRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub text: String,
    #[serde(default)]
    pub protected: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentences: Option<Vec<String>>,
}

fn default_schema_version() -> u32 {
    SCHEMA_VERSION
}

impl ParagraphRecord {
    pub fn new(text: impl Into<String>) -> Self {
        ParagraphRecord { id: None, text: text.into(), protected: false, sentences: None }
    }

    pub fn protected(text: impl Into<String>) -> Self {
        ParagraphRecord { protected: true, ..ParagraphRecord::new(text) }
    }
}

impl SectionRecord {
    pub fn new(title: impl Into<String>, paragraphs: Vec<ParagraphRecord>) -> Self {
        SectionRecord { id: None, title: title.into(), paragraphs }
    }
}

/// An ordered tree of text nodes: sections, their paragraphs and (after segmentation)
/// the paragraphs' sentences.
///
/// Node ids have the form `{doc_id}:{version}:{path}` where the path is `sec{i}` for
/// sections, `p{k}` for the k-th paragraph of the document and `p{k}.s{j}` for sentences.
/// Sections and paragraphs may override their path component with an explicit id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DocumentRecord", into = "DocumentRecord")]
pub struct DocumentGraph {
    doc_id: String,
    version: DocVersion,
    /// Pre-order.
    nodes: Vec<TextNode>,
    /// Path component of each node when it was set explicitly in the input.
    explicit_keys: Vec<Option<String>>,
    index: HashMap<String, usize>,
    children: Vec<Vec<usize>>,
    sections: Vec<usize>,
    paragraphs: Vec<usize>,
    sentences: Vec<usize>,
    paragraph_of: Vec<Option<usize>>,
    section_of: Vec<Option<usize>>,
}

/// Normalize to NFC, the form all similarity measures see.
pub fn normalize_text(text: &str) -> String {
    text.nfc().collect()
}

/// Collapse every whitespace run to a single space and trim.
pub fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

impl DocumentGraph {
    /// Build a graph from a structured record. Text is NFC-normalized.
    pub fn build(record: &DocumentRecord) -> Result<Self, ModelError> {
        if record.sections.iter().all(|s| s.paragraphs.is_empty()) {
            return Err(ModelError::EmptyDocument);
        }
        let prefix = format!("{}:{}:", record.doc_id, record.version);
        let mut b = Builder::default();
        let mut paragraph_counter = 0usize;
        for (si, sec) in record.sections.iter().enumerate() {
            let key = sec.id.clone().unwrap_or_else(|| format!("sec{si}"));
            let sec_id = format!("{prefix}{key}");
            let sec_idx = b.push(
                TextNode {
                    id: sec_id.clone(),
                    granularity: Granularity::Section,
                    text: normalize_text(&sec.title),
                    parent: None,
                    ordinal: si,
                    protected: true,
                },
                sec.id.clone(),
                None,
            )?;
            for (pi, para) in sec.paragraphs.iter().enumerate() {
                let pkey = para.id.clone().unwrap_or_else(|| format!("p{paragraph_counter}"));
                paragraph_counter += 1;
                let text = normalize_text(&para.text);
                if text.trim().is_empty() {
                    return Err(ModelError::EmptyText(format!("{prefix}{pkey}")));
                }
                let para_id = format!("{prefix}{pkey}");
                let para_idx = b.push(
                    TextNode {
                        id: para_id.clone(),
                        granularity: Granularity::Paragraph,
                        text,
                        parent: Some(sec_id.clone()),
                        ordinal: pi,
                        protected: para.protected,
                    },
                    para.id.clone(),
                    Some(sec_idx),
                )?;
                if let Some(sentences) = &para.sentences {
                    if para.protected && !sentences.is_empty() {
                        return Err(ModelError::ProtectedSegmented(para_id));
                    }
                    for (k, s) in sentences.iter().enumerate() {
                        let text = normalize_text(s);
                        if text.trim().is_empty() {
                            return Err(ModelError::EmptyText(format!("{para_id}.s{k}")));
                        }
                        b.push(
                            TextNode {
                                id: format!("{para_id}.s{k}"),
                                granularity: Granularity::Sentence,
                                text,
                                parent: Some(para_id.clone()),
                                ordinal: k,
                                protected: false,
                            },
                            None,
                            Some(para_idx),
                        )?;
                    }
                }
            }
        }
        Ok(b.finish(record.doc_id.clone(), record.version))
    }

    pub fn from_json(json: &str) -> Result<Self, ModelError> {
        let record: DocumentRecord =
            serde_json::from_str(json).map_err(|e| ModelError::Schema(e.to_string()))?;
        Self::build(&record)
    }

    pub fn to_record(&self) -> DocumentRecord {
        let sections = self
            .sections
            .iter()
            .map(|&s| SectionRecord {
                id: self.explicit_keys[s].clone(),
                title: self.nodes[s].text.clone(),
                paragraphs: self.children[s]
                    .iter()
                    .map(|&p| {
                        let node = &self.nodes[p];
                        let sents: Vec<String> =
                            self.children[p].iter().map(|&c| self.nodes[c].text.clone()).collect();
                        ParagraphRecord {
                            id: self.explicit_keys[p].clone(),
                            text: node.text.clone(),
                            protected: node.protected,
                            sentences: if sents.is_empty() { None } else { Some(sents) },
                        }
                    })
                    .collect(),
            })
            .collect();
        DocumentRecord {
            schema_version: SCHEMA_VERSION,
            doc_id: self.doc_id.clone(),
            version: self.version,
            sections,
        }
    }

    pub fn doc_id(&self) -> &str {
        &self.doc_id
    }

    pub fn version(&self) -> DocVersion {
        self.version
    }

    /// All nodes in pre-order.
    pub fn nodes(&self) -> &[TextNode] {
        &self.nodes
    }

    pub fn node(&self, id: &str) -> Option<&TextNode> {
        self.index.get(id).map(|&i| &self.nodes[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn children(&self, id: &str) -> Vec<&TextNode> {
        match self.index.get(id) {
            Some(&i) => self.children[i].iter().map(|&c| &self.nodes[c]).collect(),
            None => Vec::new(),
        }
    }

    pub fn sections(&self) -> impl Iterator<Item = &TextNode> + '_ {
        self.sections.iter().map(|&i| &self.nodes[i])
    }

    /// Paragraphs in document order; the position is the paragraph's linear index.
    pub fn paragraphs(&self) -> impl Iterator<Item = &TextNode> + '_ {
        self.paragraphs.iter().map(|&i| &self.nodes[i])
    }

    /// Sentences in document order.
    pub fn sentences(&self) -> impl Iterator<Item = &TextNode> + '_ {
        self.sentences.iter().map(|&i| &self.nodes[i])
    }

    pub fn paragraph_count(&self) -> usize {
        self.paragraphs.len()
    }

    pub fn section_count(&self) -> usize {
        self.sections.len()
    }

    pub fn sentence_count(&self) -> usize {
        self.sentences.len()
    }

    /// Linear index of the paragraph containing `id` (or of `id` itself if it is one).
    pub fn paragraph_index(&self, id: &str) -> Option<usize> {
        let i = *self.index.get(id)?;
        let p = self.paragraph_of[i]?;
        self.paragraphs.iter().position(|&x| x == p)
    }

    pub fn section_index(&self, id: &str) -> Option<usize> {
        let i = *self.index.get(id)?;
        let s = self.section_of[i]?;
        self.sections.iter().position(|&x| x == s)
    }

    /// Document-wide position of a sentence node.
    pub fn sentence_ordinal(&self, id: &str) -> Option<usize> {
        let i = *self.index.get(id)?;
        self.sentences.iter().position(|&x| x == i)
    }

    /// Ancestor (or self) of `id` at the given container granularity.
    pub fn container(&self, id: &str, granularity: Granularity) -> Option<&TextNode> {
        let i = *self.index.get(id)?;
        let c = match granularity {
            Granularity::Paragraph => self.paragraph_of[i]?,
            Granularity::Section => self.section_of[i]?,
            Granularity::Sentence | Granularity::Subsentence => {
                (self.nodes[i].granularity == granularity).then_some(i)?
            }
        };
        Some(&self.nodes[c])
    }

    /// Title of the section containing `id`.
    pub fn section_title(&self, id: &str) -> Option<&str> {
        self.container(id, Granularity::Section).map(|n| n.text.as_str())
    }

    /// True when every unprotected paragraph has sentence children.
    pub fn is_segmented(&self) -> bool {
        self.paragraphs
            .iter()
            .all(|&p| self.nodes[p].protected || !self.children[p].is_empty())
    }

    /// Replace the sentences of every paragraph listed in `sentences` (keyed by paragraph
    /// id); other paragraphs keep theirs.
    pub fn with_sentences(
        &self,
        sentences: &HashMap<String, Vec<String>>,
    ) -> Result<DocumentGraph, ModelError> {
        let mut record = self.to_record();
        for (s, sec) in record.sections.iter_mut().enumerate() {
            for (p, para) in sec.paragraphs.iter_mut().enumerate() {
                let pid = &self.nodes[self.children[self.sections[s]][p]].id;
                if let Some(new) = sentences.get(pid) {
                    para.sentences = if new.is_empty() { None } else { Some(new.clone()) };
                }
            }
        }
        DocumentGraph::build(&record)
    }
}

impl TryFrom<DocumentRecord> for DocumentGraph {
    type Error = ModelError;

    fn try_from(record: DocumentRecord) -> Result<Self, Self::Error> {
        DocumentGraph::build(&record)
    }
}

impl From<DocumentGraph> for DocumentRecord {
    fn from(g: DocumentGraph) -> Self {
        g.to_record()
    }
}

#[derive(Default)]
struct Builder {
    nodes: Vec<TextNode>,
    keys: Vec<Option<String>>,
    parents: Vec<Option<usize>>,
    seen: HashSet<String>,
}

impl Builder {
    fn push(
        &mut self,
        node: TextNode,
        key: Option<String>,
        parent: Option<usize>,
    ) -> Result<usize, ModelError> {
        if !self.seen.insert(node.id.clone()) {
            return Err(ModelError::DuplicateId(node.id));
        }
        self.nodes.push(node);
        self.keys.push(key);
        self.parents.push(parent);
        Ok(self.nodes.len() - 1)
    }

    fn finish(self, doc_id: String, version: DocVersion) -> DocumentGraph {
        let n = self.nodes.len();
        let mut children = vec![Vec::new(); n];
        let mut sections = Vec::new();
        let mut paragraphs = Vec::new();
        let mut sentences = Vec::new();
        let mut paragraph_of = vec![None; n];
        let mut section_of = vec![None; n];
        for i in 0..n {
            if let Some(p) = self.parents[i] {
                children[p].push(i);
            }
            match self.nodes[i].granularity {
                Granularity::Section => {
                    sections.push(i);
                    section_of[i] = Some(i);
                }
                Granularity::Paragraph => {
                    paragraphs.push(i);
                    paragraph_of[i] = Some(i);
                    section_of[i] = self.parents[i];
                }
                Granularity::Sentence | Granularity::Subsentence => {
                    sentences.push(i);
                    paragraph_of[i] = self.parents[i];
                    section_of[i] = self.parents[i].and_then(|p| self.parents[p]);
                }
            }
        }
        let index = self.nodes.iter().enumerate().map(|(i, n)| (n.id.clone(), i)).collect();
        DocumentGraph {
            doc_id,
            version,
            nodes: self.nodes,
            explicit_keys: self.keys,
            index,
            children,
            sections,
            paragraphs,
            sentences,
            paragraph_of,
            section_of,
        }
    }
}
