//! Quantum-native tokenization of QASM text, the line-level reference
//! tokenizer, vocabularies, and corpus compression statistics.
//!
//! The quantum-native rules work line by line:
//!
//! 1. `gate name(params) qubits {` becomes `gate`, the name, each parameter,
//!    each qubit and `{`.
//! 2. `name(params) targets;` becomes the name, optionally `(`, parameters,
//!    `)`, then each target.
//! 3. Register declarations (`qubit[2] q;`) and measurements
//!    (`c[0] = measure q[0];`) become `qubit[2] q` and `c[0] = measure q[0]`.
//! 4. `}` is its own token and blank lines produce nothing.
//!
//! Any other line is a syntax error. Internal names `_gate_q_<k>`,
//! `unitary_<k>` and `mcx_vchain_<k>` lose their numeric suffix unless
//! [`TokenizerOptions::preserve_indices`] is set.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::sync::OnceLock;

use indexmap::IndexSet;
use regex::Regex;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TokenizeError {
    #[error("{}{message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Syntax {
        line: Option<usize>,
        message: String,
    },
    #[error("program produced no quantum-native tokens")]
    EmptyProgram,
    #[error("base counter reported zero length")]
    EmptyBaseline,
    #[error("token {0:?} is not in the vocabulary")]
    UnknownToken(String),
    #[error("id {0} is not in the vocabulary")]
    UnknownId(u32),
    #[error("csv: {0}")]
    Csv(String),
}

/// A quantum-native token: non-empty, no whitespace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Token(String);

impl Token {
    fn new(text: String) -> Option<Self> {
        (!text.is_empty() && !text.chars().any(char::is_whitespace)).then_some(Token(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Token {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TokenizerOptions {
    /// Keep numeric suffixes on internal names (`_gate_q_3` stays whole).
    pub preserve_indices: bool,
}

fn gate_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^gate\s+(\w+)(?:\s*\((.*?)\))?\s+([^{]+)\s*\{").unwrap())
}

fn op_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^(\w+)(?:\((.*?)\))?\s+([^;]+);").unwrap())
}

fn decl_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^(\w+\[\d+\])\s+(\w+)\s*;$").unwrap())
}

fn measure_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^(\w+\[\d+\])\s*=\s*measure\s+(\w+\[\d+\])\s*;$").unwrap())
}

fn suffix_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^(_gate_q_|unitary_|mcx_vchain_)\d+$").unwrap())
}

/// Strips the numeric suffix of the three internal naming prefixes.
pub fn normalize_suffix(token: &str) -> String {
    suffix_re().replace(token, "$1").into_owned()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct QuantumTokenizer {
    options: TokenizerOptions,
}

impl QuantumTokenizer {
    pub fn new(options: TokenizerOptions) -> Self {
        Self { options }
    }

    pub fn tokenize_line(&self, command: &str) -> Result<Vec<Token>, TokenizeError> {
        let command = command.trim();
        if command.is_empty() {
            return Ok(Vec::new());
        }

        let raw: Vec<String> = if command.starts_with("gate") {
            let caps = gate_re()
                .captures(command)
                .ok_or_else(|| syntax(format!("Invalid gate definition: {command}")))?;
            let mut raw = vec!["gate".to_string(), caps[1].to_string()];
            let params = caps.get(2).map_or("", |m| m.as_str());
            raw.extend(split_list(params));
            raw.extend(split_list(&caps[3]));
            raw.push("{".into());
            raw
        } else if let Some(caps) = op_re().captures(command) {
            let mut raw = vec![caps[1].to_string()];
            if let Some(params) = caps.get(2).filter(|m| !m.as_str().is_empty()) {
                raw.push("(".into());
                raw.extend(params.as_str().split(',').map(|p| p.trim().to_string()));
                raw.push(")".into());
            }
            raw.extend(caps[3].split(',').map(|t| t.trim().to_string()));
            raw.retain(|t| !t.is_empty());
            raw
        } else if let Some(caps) = decl_re().captures(command) {
            vec![caps[1].to_string(), caps[2].to_string()]
        } else if let Some(caps) = measure_re().captures(command) {
            vec![
                caps[1].to_string(),
                "=".into(),
                "measure".into(),
                caps[2].to_string(),
            ]
        } else if command == "}" {
            vec!["}".into()]
        } else {
            return Err(syntax(format!("Unrecognized command: {command}")));
        };

        raw.into_iter()
            .map(|t| {
                let t = if self.options.preserve_indices {
                    t
                } else {
                    normalize_suffix(&t)
                };
                Token::new(t).ok_or_else(|| syntax(format!("Unrecognized command: {command}")))
            })
            .collect()
    }

    /// Tokenizes every line; the first failing line aborts with its number.
    pub fn tokenize_program(&self, text: &str) -> Result<Vec<Token>, TokenizeError> {
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            match self.tokenize_line(line) {
                Ok(tokens) => out.extend(tokens),
                Err(TokenizeError::Syntax { message, .. }) => {
                    return Err(TokenizeError::Syntax {
                        line: Some(i + 1),
                        message,
                    })
                }
                Err(other) => return Err(other),
            }
        }
        Ok(out)
    }
}

fn syntax(message: String) -> TokenizeError {
    TokenizeError::Syntax {
        line: None,
        message,
    }
}

fn split_list(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
}

pub fn tokenize_line(text: &str) -> Result<Vec<Token>, TokenizeError> {
    QuantumTokenizer::default().tokenize_line(text)
}

pub fn tokenize_program(text: &str) -> Result<Vec<Token>, TokenizeError> {
    QuantumTokenizer::default().tokenize_program(text)
}

/// Reference tokenizer that treats each non-blank line as one token.
pub fn line_level_tokenize(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

/// Number of non-whitespace characters.
pub fn char_count_baseline(text: &str) -> usize {
    text.chars().filter(|c| !c.is_whitespace()).count()
}

/// Sequence length under a reference tokenizer.
pub trait BaseCounter {
    fn count(&self, text: &str) -> usize;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CharCountBaseline;

impl BaseCounter for CharCountBaseline {
    fn count(&self, text: &str) -> usize {
        char_count_baseline(text)
    }
}

impl<F: Fn(&str) -> usize> BaseCounter for F {
    fn count(&self, text: &str) -> usize {
        self(text)
    }
}

/// Insertion-ordered bijection between token text and dense ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    entries: IndexSet<String>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a token if unseen and returns its id.
    pub fn insert(&mut self, token: &str) -> u32 {
        match self.entries.get_index_of(token) {
            Some(id) => id as u32,
            None => {
                self.entries.insert(token.to_string());
                (self.entries.len() - 1) as u32
            }
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.entries.get_index_of(token).map(|i| i as u32)
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.entries.get_index(id as usize).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.entries
            .iter()
            .enumerate()
            .map(|(i, t)| (t.as_str(), i as u32))
    }

    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Result<Vec<u32>, TokenizeError> {
        tokens
            .iter()
            .map(|t| {
                self.id(t.as_ref())
                    .ok_or_else(|| TokenizeError::UnknownToken(t.as_ref().to_string()))
            })
            .collect()
    }

    pub fn decode(&self, ids: &[u32]) -> Result<Vec<String>, TokenizeError> {
        ids.iter()
            .map(|&id| {
                self.token(id)
                    .map(str::to_string)
                    .ok_or(TokenizeError::UnknownId(id))
            })
            .collect()
    }
}

/// Assigns ids in first-seen order over the corpus.
pub fn build_vocabulary<D, S>(corpus: &[D]) -> Vocabulary
where
    D: AsRef<[S]>,
    S: AsRef<str>,
{
    let mut vocab = Vocabulary::new();
    for doc in corpus {
        for token in doc.as_ref() {
            vocab.insert(token.as_ref());
        }
    }
    vocab
}

impl Serialize for Vocabulary {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_map(self.iter())
    }
}

impl<'de> Deserialize<'de> for Vocabulary {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = BTreeMap::<String, u32>::deserialize(deserializer)?;
        let mut by_id: Vec<Option<String>> = vec![None; raw.len()];
        for (token, id) in raw {
            let slot = by_id
                .get_mut(id as usize)
                .ok_or_else(|| D::Error::custom(format!("id {id} is not dense")))?;
            if slot.replace(token).is_some() {
                return Err(D::Error::custom(format!("id {id} assigned twice")));
            }
        }
        let mut vocab = Vocabulary::new();
        for token in by_id {
            vocab.insert(&token.expect("dense ids fill every slot"));
        }
        Ok(vocab)
    }
}

/// Lengths of one program under both tokenizers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProgramStats {
    pub base_len: usize,
    pub quantum_len: usize,
}

impl ProgramStats {
    pub fn compression_ratio(&self) -> f64 {
        self.base_len as f64 / self.quantum_len as f64
    }

    pub fn sequence_reduction_ratio(&self) -> f64 {
        (self.base_len as f64 - self.quantum_len as f64) / self.base_len as f64
    }
}

pub fn program_stats(
    text: &str,
    base: &dyn BaseCounter,
    tokenizer: &QuantumTokenizer,
) -> Result<ProgramStats, TokenizeError> {
    let quantum_len = tokenizer.tokenize_program(text)?.len();
    let base_len = base.count(text);
    if quantum_len == 0 {
        return Err(TokenizeError::EmptyProgram);
    }
    if base_len == 0 {
        return Err(TokenizeError::EmptyBaseline);
    }
    Ok(ProgramStats {
        base_len,
        quantum_len,
    })
}

/// Per-qubit-count means of the compression statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRow {
    pub n: usize,
    pub compression_ratio: f64,
    pub sequence_reduction_ratio: f64,
    pub vocab_quantum: usize,
    pub vocab_line: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorpusStats {
    pub rows: Vec<CorpusRow>,
}

impl CorpusStats {
    pub fn row(&self, n: usize) -> Option<&CorpusRow> {
        self.rows.iter().find(|r| r.n == n)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), TokenizeError> {
        let mut csv = csv::Writer::from_writer(writer);
        if self.rows.is_empty() {
            csv.write_record([
                "n",
                "compression_ratio",
                "sequence_reduction_ratio",
                "vocab_quantum",
                "vocab_line",
            ])
            .map_err(|e| TokenizeError::Csv(e.to_string()))?;
        }
        for row in &self.rows {
            csv.serialize(row)
                .map_err(|e| TokenizeError::Csv(e.to_string()))?;
        }
        csv.flush().map_err(|e| TokenizeError::Csv(e.to_string()))
    }
}

/// Compression ratio `mean(L_base / L_quantum)` and sequence reduction
/// `mean((L_base − L_quantum) / L_base)` per qubit count, plus the
/// vocabulary sizes of both tokenizers over that count's programs.
pub fn corpus_stats(
    corpus: &BTreeMap<usize, Vec<String>>,
    base: &dyn BaseCounter,
    tokenizer: &QuantumTokenizer,
) -> Result<CorpusStats, TokenizeError> {
    let mut rows = Vec::with_capacity(corpus.len());
    for (&n, programs) in corpus {
        if programs.is_empty() {
            continue;
        }
        let mut quantum = Vocabulary::new();
        let mut line = Vocabulary::new();
        let (mut compression, mut reduction) = (0.0, 0.0);
        for text in programs {
            let stats = program_stats(text, base, tokenizer)?;
            compression += stats.compression_ratio();
            reduction += stats.sequence_reduction_ratio();
            for token in tokenizer.tokenize_program(text)? {
                quantum.insert(token.as_str());
            }
            for token in line_level_tokenize(text) {
                line.insert(&token);
            }
        }
        let count = programs.len() as f64;
        rows.push(CorpusRow {
            n,
            compression_ratio: compression / count,
            sequence_reduction_ratio: reduction / count,
            vocab_quantum: quantum.len(),
            vocab_line: line.len(),
        });
    }
    Ok(CorpusStats { rows })
}
