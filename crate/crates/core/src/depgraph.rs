//! CoNLL-U reader/writer and an immutable dependency-graph model.
//!
//! Only the first eight columns are interpreted (ID, FORM, LEMMA, UPOS,
//! XPOS, FEATS, HEAD, DEPREL). Multiword-token ranges (`3-4`) and empty
//! nodes (`5.1`) are skipped.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DepGraphError {
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("sentence {sentence}: {reason}")]
    InvalidGraph { sentence: String, reason: String },
    #[error("token index {0} out of range")]
    IndexOutOfRange(usize),
}

/// Universal Dependencies labels accepted as synonyms of the
/// ClearNLP-style labels the extractor is written against.
const DEPREL_ALIASES: &[(&str, &str)] = &[
    ("obj", "dobj"),
    ("nsubj:pass", "nsubjpass"),
    ("csubj:pass", "csubjpass"),
    ("obl:agent", "agent"),
    ("aux:pass", "auxpass"),
    ("nmod:poss", "poss"),
    ("acl:relcl", "relcl"),
    ("dative", "iobj"),
    ("compound:prt", "prt"),
    ("flat:name", "flat"),
    ("nummod:gov", "nummod"),
];

/// Maps a dependency label onto the canonical inventory. Unknown subtyped
/// labels fall back to their base relation (`obl:tmod` -> `obl`).
pub fn normalize_deprel(label: &str) -> &str {
    let lower = label.trim();
    for (alias, canonical) in DEPREL_ALIASES {
        if lower.eq_ignore_ascii_case(alias) {
            return canonical;
        }
    }
    match lower.split_once(':') {
        Some((base, _)) => base,
        None => lower,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    /// 1-based position in the sentence.
    pub index: usize,
    pub form: String,
    pub lemma: String,
    pub upos: String,
    pub xpos: Option<String>,
    pub feats: BTreeMap<String, String>,
    /// Index of the head token, `0` for the root.
    pub head: usize,
    pub deprel: String,
}

impl Token {
    pub fn new(
        index: usize,
        form: impl Into<String>,
        lemma: impl Into<String>,
        upos: impl Into<String>,
        head: usize,
        deprel: impl Into<String>,
    ) -> Self {
        Token {
            index,
            form: form.into(),
            lemma: lemma.into(),
            upos: upos.into(),
            xpos: None,
            feats: BTreeMap::new(),
            head,
            deprel: deprel.into(),
        }
    }

    /// Builder-style helper: parses `Name=Value|...` and merges it in.
    pub fn with_feats(mut self, feats: &str) -> Self {
        self.feats.extend(parse_feats(feats));
        self
    }

    pub fn with_xpos(mut self, xpos: impl Into<String>) -> Self {
        self.xpos = Some(xpos.into());
        self
    }

    /// The dependency label mapped through the alias table.
    pub fn relation(&self) -> &str {
        normalize_deprel(&self.deprel)
    }

    pub fn feat(&self, name: &str) -> Option<&str> {
        self.feats.get(name).map(String::as_str)
    }

    pub fn has_feat(&self, name: &str, value: &str) -> bool {
        self.feat(name) == Some(value)
    }

    pub fn is_root(&self) -> bool {
        self.head == 0
    }

    fn xpos_is(&self, tags: &[&str]) -> bool {
        let tag = self.xpos.as_deref().unwrap_or(self.upos.as_str());
        tags.contains(&tag)
    }

    pub fn is_proper_noun(&self) -> bool {
        self.upos == "PROPN" || self.xpos_is(&["NNP", "NNPS"])
    }

    pub fn is_verb(&self) -> bool {
        self.upos == "VERB" || self.xpos_is(&["VB", "VBD", "VBG", "VBN", "VBP", "VBZ"])
    }

    pub fn is_aux(&self) -> bool {
        self.upos == "AUX" || self.xpos_is(&["MD"])
    }

    pub fn is_punct(&self) -> bool {
        self.upos == "PUNCT" || (!self.form.is_empty() && self.form.chars().all(|c| c.is_ascii_punctuation()))
    }
}

fn parse_feats(raw: &str) -> BTreeMap<String, String> {
    let mut feats = BTreeMap::new();
    if raw.is_empty() || raw == "_" {
        return feats;
    }
    for item in raw.split('|') {
        match item.split_once('=') {
            Some((name, value)) => {
                feats.insert(name.to_string(), value.to_string());
            }
            // Retain bare names verbatim.
            None => {
                feats.insert(item.to_string(), String::new());
            }
        }
    }
    feats
}

fn format_feats(feats: &BTreeMap<String, String>) -> String {
    if feats.is_empty() {
        return "_".to_string();
    }
    feats
        .iter()
        .map(|(k, v)| if v.is_empty() { k.clone() } else { format!("{k}={v}") })
        .collect::<Vec<_>>()
        .join("|")
}

/// A validated dependency parse of one sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepGraph {
    tokens: Vec<Token>,
    sentence_id: String,
}

impl DepGraph {
    /// Validates token numbering, the single root and acyclicity.
    pub fn new(tokens: Vec<Token>, sentence_id: impl Into<String>) -> Result<Self, DepGraphError> {
        let sentence_id = sentence_id.into();
        let invalid = |reason: String| DepGraphError::InvalidGraph {
            sentence: sentence_id.clone(),
            reason,
        };
        if tokens.is_empty() {
            return Err(invalid("no tokens".into()));
        }
        let n = tokens.len();
        for (pos, tok) in tokens.iter().enumerate() {
            if tok.index != pos + 1 {
                return Err(invalid(format!("token {} found at position {}", tok.index, pos + 1)));
            }
            if tok.form.is_empty() || tok.lemma.is_empty() {
                return Err(invalid(format!("token {} has an empty form or lemma", tok.index)));
            }
            if tok.head == tok.index {
                return Err(invalid(format!("token {} is its own head", tok.index)));
            }
            if tok.head > n {
                return Err(invalid(format!("token {} has dangling head {}", tok.index, tok.head)));
            }
        }
        let roots = tokens.iter().filter(|t| t.head == 0).count();
        if roots == 0 {
            return Err(invalid("no root".into()));
        }
        if roots > 1 {
            return Err(invalid(format!("{roots} roots")));
        }
        for tok in &tokens {
            let mut cur = tok.head;
            let mut steps = 0;
            while cur != 0 {
                steps += 1;
                if steps > n {
                    return Err(invalid(format!("cycle through token {}", tok.index)));
                }
                cur = tokens[cur - 1].head;
            }
        }
        Ok(DepGraph { tokens, sentence_id })
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn sentence_id(&self) -> &str {
        &self.sentence_id
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn token(&self, index: usize) -> Result<&Token, DepGraphError> {
        if index == 0 || index > self.tokens.len() {
            return Err(DepGraphError::IndexOutOfRange(index));
        }
        Ok(&self.tokens[index - 1])
    }

    pub fn root(&self) -> &Token {
        self.tokens
            .iter()
            .find(|t| t.head == 0)
            .expect("validated graph has a root")
    }

    /// Dependents of `index` in document order, optionally restricted to one
    /// relation (compared after alias normalization).
    pub fn children(&self, index: usize, deprel_filter: Option<&str>) -> Result<Vec<&Token>, DepGraphError> {
        self.token(index)?;
        let filter = deprel_filter.map(normalize_deprel);
        Ok(self
            .tokens
            .iter()
            .filter(|t| t.head == index)
            .filter(|t| filter.is_none_or(|f| t.relation() == f))
            .collect())
    }

    pub fn forms(&self) -> Vec<String> {
        self.tokens.iter().map(|t| t.form.clone()).collect()
    }

    pub fn text(&self) -> String {
        self.forms().join(" ")
    }

    /// Serializes back to a CoNLL-U block (terminated by a blank line).
    pub fn to_conllu(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# sent_id = {}", self.sentence_id);
        let _ = writeln!(out, "# text = {}", self.text());
        for t in &self.tokens {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t_\t_",
                t.index,
                t.form,
                t.lemma,
                t.upos,
                t.xpos.as_deref().unwrap_or("_"),
                format_feats(&t.feats),
                t.head,
                t.deprel
            );
        }
        out.push('\n');
        out
    }
}

pub fn write_conllu(graphs: &[DepGraph]) -> String {
    graphs.iter().map(DepGraph::to_conllu).collect()
}

/// Parses a CoNLL-U document into one graph per sentence block.
pub fn parse_conllu(text: &str) -> Result<Vec<DepGraph>, DepGraphError> {
    let mut graphs = Vec::new();
    let mut tokens: Vec<Token> = Vec::new();
    let mut sent_id: Option<String> = None;
    let mut block_seen = false;

    let flush = |tokens: &mut Vec<Token>, sent_id: &mut Option<String>, graphs: &mut Vec<DepGraph>| {
        if tokens.is_empty() {
            *sent_id = None;
            return Ok(());
        }
        let id = sent_id.take().unwrap_or_else(|| format!("s{}", graphs.len() + 1));
        graphs.push(DepGraph::new(std::mem::take(tokens), id)?);
        Ok::<(), DepGraphError>(())
    };

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            if block_seen {
                flush(&mut tokens, &mut sent_id, &mut graphs)?;
                block_seen = false;
            }
            continue;
        }
        block_seen = true;
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                if key.trim() == "sent_id" {
                    sent_id = Some(value.trim().to_string());
                }
            }
            continue;
        }
        let malformed = |reason: String| DepGraphError::MalformedLine { line: lineno + 1, reason };
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(malformed(format!("expected 10 columns, found {}", cols.len())));
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let index: usize = cols[0]
            .parse()
            .map_err(|_| malformed(format!("non-numeric ID {:?}", cols[0])))?;
        let head: usize = cols[6]
            .parse()
            .map_err(|_| malformed(format!("non-numeric HEAD {:?}", cols[6])))?;
        tokens.push(Token {
            index,
            form: cols[1].to_string(),
            lemma: cols[2].to_string(),
            upos: cols[3].to_string(),
            xpos: (cols[4] != "_").then(|| cols[4].to_string()),
            feats: parse_feats(cols[5]),
            head,
            deprel: cols[7].to_string(),
        });
    }
    flush(&mut tokens, &mut sent_id, &mut graphs)?;
    Ok(graphs)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const DOG_SEES_CAT: &str = "# sent_id = dog-cat\n\
1\tA\ta\tDET\tDT\t_\t2\tdet\t_\t_\n\
2\tdog\tdog\tNOUN\tNN\tNumber=Sing\t3\tnsubj\t_\t_\n\
3\tsees\tsee\tVERB\tVBZ\tNumber=Sing|Person=3|Tense=Pres|VerbForm=Fin\t0\tROOT\t_\t_\n\
4\ta\ta\tDET\tDT\t_\t5\tdet\t_\t_\n\
5\tcat\tcat\tNOUN\tNN\tNumber=Sing\t3\tdobj\t_\t_\n\n";

    #[test]
    fn empty_input_yields_no_graphs() {
        assert!(parse_conllu("").unwrap().is_empty());
        assert!(parse_conllu("\n\n").unwrap().is_empty());
    }

    #[test]
    fn parses_dog_sees_cat() {
        let graphs = parse_conllu(DOG_SEES_CAT).unwrap();
        assert_eq!(graphs.len(), 1);
        let g = &graphs[0];
        assert_eq!(g.sentence_id(), "dog-cat");
        assert_eq!(g.root().form, "sees");
        assert_eq!(g.root().lemma, "see");
        assert_eq!(g.root().feat("Tense"), Some("Pres"));
        let subj = g.children(3, Some("nsubj")).unwrap();
        assert_eq!(subj.len(), 1);
        assert_eq!(subj[0].form, "dog");
        let obj = g.children(3, Some("dobj")).unwrap();
        assert_eq!(obj[0].form, "cat");
        // UD alias resolves to the same dependent.
        assert_eq!(g.children(3, Some("obj")).unwrap()[0].form, "cat");
        assert_eq!(g.token(2).unwrap().xpos.as_deref(), Some("NN"));
    }

    #[test]
    fn children_edge_cases() {
        let g = &parse_conllu(DOG_SEES_CAT).unwrap()[0];
        assert!(g.children(3, Some("iobj")).unwrap().is_empty());
        assert_eq!(g.children(99, None), Err(DepGraphError::IndexOutOfRange(99)));
        assert_eq!(g.children(0, None), Err(DepGraphError::IndexOutOfRange(0)));
        let all: Vec<_> = g.children(3, None).unwrap().iter().map(|t| t.index).collect();
        assert_eq!(all, vec![2, 5]);
    }

    #[test]
    fn self_loop_is_invalid() {
        let text = "1\tgo\tgo\tVERB\t_\t_\t1\troot\t_\t_\n";
        assert!(matches!(parse_conllu(text), Err(DepGraphError::InvalidGraph { .. })));
    }

    #[test]
    fn structural_errors() {
        let two_roots = "1\ta\ta\tX\t_\t_\t0\troot\t_\t_\n2\tb\tb\tX\t_\t_\t0\troot\t_\t_\n";
        assert!(matches!(parse_conllu(two_roots), Err(DepGraphError::InvalidGraph { .. })));
        let cycle = "1\ta\ta\tX\t_\t_\t2\tdep\t_\t_\n2\tb\tb\tX\t_\t_\t1\tdep\t_\t_\n3\tc\tc\tX\t_\t_\t0\troot\t_\t_\n";
        assert!(matches!(parse_conllu(cycle), Err(DepGraphError::InvalidGraph { .. })));
        let dangling = "1\ta\ta\tX\t_\t_\t7\tdep\t_\t_\n2\tb\tb\tX\t_\t_\t0\troot\t_\t_\n";
        assert!(matches!(parse_conllu(dangling), Err(DepGraphError::InvalidGraph { .. })));
        let no_root = "1\ta\ta\tX\t_\t_\t2\tdep\t_\t_\n2\tb\tb\tX\t_\t_\t1\tdep\t_\t_\n";
        assert!(matches!(parse_conllu(no_root), Err(DepGraphError::InvalidGraph { .. })));
    }

    #[test]
    fn malformed_lines() {
        let short = "1\ta\ta\tX\t_\t_\t0\troot\n";
        assert!(matches!(parse_conllu(short), Err(DepGraphError::MalformedLine { line: 1, .. })));
        let bad_head = "1\ta\ta\tX\t_\t_\tx\troot\t_\t_\n";
        assert!(matches!(parse_conllu(bad_head), Err(DepGraphError::MalformedLine { .. })));
        let bad_id = "# c\nA\ta\ta\tX\t_\t_\t0\troot\t_\t_\n";
        assert!(matches!(parse_conllu(bad_id), Err(DepGraphError::MalformedLine { line: 2, .. })));
    }

    #[test]
    fn skips_ranges_and_empty_nodes() {
        let text = "1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n\
1\tdo\tdo\tAUX\t_\t_\t3\taux\t_\t_\n\
2\tn't\tnot\tPART\t_\t_\t3\tneg\t_\t_\n\
2.1\tx\tx\tX\t_\t_\t_\t_\t_\t_\n\
3\tgo\tgo\tVERB\t_\tVerbForm=Inf\t0\troot\t_\t_\n";
        let g = &parse_conllu(text).unwrap()[0];
        assert_eq!(g.len(), 3);
        assert_eq!(g.sentence_id(), "s1");
    }

    #[test]
    fn feats_keep_unknown_names() {
        let text = "1\tgo\tgo\tVERB\t_\tFoo=Bar|Weird\t0\troot\t_\t_\n";
        let g = &parse_conllu(text).unwrap()[0];
        assert_eq!(g.root().feat("Foo"), Some("Bar"));
        assert_eq!(g.root().feat("Weird"), Some(""));
        let again = &parse_conllu(&g.to_conllu()).unwrap()[0];
        assert_eq!(again, g);
    }

    #[test]
    fn multiple_blocks_and_roundtrip() {
        let text = format!("{DOG_SEES_CAT}{}", DOG_SEES_CAT.replace("dog-cat", "second"));
        let graphs = parse_conllu(&text).unwrap();
        assert_eq!(graphs.len(), 2);
        assert_eq!(graphs[1].sentence_id(), "second");
        let again = parse_conllu(&write_conllu(&graphs)).unwrap();
        assert_eq!(again, graphs);
    }

    #[test]
    fn alias_table() {
        assert_eq!(normalize_deprel("obj"), "dobj");
        assert_eq!(normalize_deprel("nsubj:pass"), "nsubjpass");
        assert_eq!(normalize_deprel("obl:agent"), "agent");
        assert_eq!(normalize_deprel("obl:tmod"), "obl");
        assert_eq!(normalize_deprel("nsubj"), "nsubj");
    }
}
