//! Recursively enumerable presentations ⟨S | ℛ⟩.
//!
//! Relators are pulled lazily and cached, so `relator(i)` is stable across
//! calls even when the source is an external process. A finite inline list is
//! just a source that reports exhaustion after its last entry.
//!
//! File format, one directive per line:
//!
//! ```text
//! generators: a b
//! relator: aa
//! relator: bb
//! stream: ./emit-relators --forever
//! family: powers aa bb
//! ```
//!
//! Inline relators form a prefix; at most one `stream:` or `family:` line may
//! follow them. Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader};
use std::process::{Child, ChildStdout, Command, Stdio};
use std::sync::{Arc, Mutex, MutexGuard};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::freegroup::{Alphabet, Word, WordError};

#[derive(Debug, Error)]
pub enum PresentationError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("line {line}, column {column}: unknown generator symbol '{symbol}'")]
    UnknownGenerator { line: usize, column: usize, symbol: char },
    #[error("line {line}: duplicate generator '{name}'")]
    DuplicateGenerator { line: usize, name: char },
    #[error("relator source exhausted: index {index} requested but only {available} relators exist")]
    Exhausted { index: usize, available: usize },
    #[error("relator stream failed: {0}")]
    Stream(String),
    #[error("failed to start relator stream `{command}`: {source}")]
    Spawn {
        command: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot extend by the empty word: it already equals 1")]
    EmptyExtension,
    #[error("presentation is already extended")]
    AlreadyExtended,
    #[error("unknown relator family `{0}`")]
    UnknownFamily(String),
    #[error(transparent)]
    Word(#[from] WordError),
}

impl PresentationError {
    pub fn is_exhausted(&self) -> bool {
        matches!(self, PresentationError::Exhausted { .. })
    }
}

/// Builtin relator families.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Family {
    /// Conjugates t·w·t⁻¹ of each listed word, for t running over F_k in
    /// enumeration order. Relator i is the conjugate of `words[i % n]` by the
    /// (i / n)-th reduced word, so the first n relators are the words themselves.
    Powers(Vec<Word>),
}

impl Family {
    /// Relator `i` of the family over `alphabet`.
    pub fn relator(&self, alphabet: &Alphabet, i: usize) -> Word {
        match self {
            Family::Powers(words) => {
                let t = alphabet.word_at_index((i / words.len()) as u128);
                words[i % words.len()].conjugate_by(&t)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tail {
    None,
    Stream(Vec<String>),
    Family(Family),
}

struct StreamReader {
    child: Child,
    lines: BufReader<ChildStdout>,
}

impl StreamReader {
    fn spawn(command: &[String]) -> Result<Self, PresentationError> {
        let mut child = Command::new(&command[0])
            .args(&command[1..])
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|source| PresentationError::Spawn { command: command.join(" "), source })?;
        let stdout = child.stdout.take().expect("stdout was piped");
        Ok(Self { child, lines: BufReader::new(stdout) })
    }

    fn next_line(&mut self) -> Result<Option<String>, PresentationError> {
        let mut line = String::new();
        match self.lines.read_line(&mut line) {
            Ok(0) => Ok(None),
            Ok(_) => Ok(Some(line.trim_end_matches(['\n', '\r']).trim().to_string())),
            Err(e) => Err(PresentationError::Stream(e.to_string())),
        }
    }
}

impl Drop for StreamReader {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

struct SourceState {
    cache: Vec<Word>,
    exhausted: bool,
    stream: Option<StreamReader>,
    failure: Option<String>,
}

/// The lazily enumerated relator sequence R_0, R_1, … of a presentation.
pub struct RelatorSource {
    alphabet: Alphabet,
    inline: Vec<Word>,
    tail: Tail,
    state: Mutex<SourceState>,
}

impl std::fmt::Debug for RelatorSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RelatorSource")
            .field("inline", &self.inline.len())
            .field("tail", &self.tail)
            .field("pulled", &self.pulled_count())
            .finish()
    }
}

impl RelatorSource {
    fn new(alphabet: Alphabet, inline: Vec<Word>, tail: Tail) -> Self {
        let exhausted = tail == Tail::None;
        let cache = if exhausted { inline.clone() } else { Vec::new() };
        Self {
            alphabet,
            inline,
            tail,
            state: Mutex::new(SourceState { cache, exhausted, stream: None, failure: None }),
        }
    }

    fn lock(&self) -> MutexGuard<'_, SourceState> {
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn pulled_count(&self) -> usize {
        self.lock().cache.len()
    }

    /// Relator `i`, or `None` once the source has ended before index `i`.
    pub fn fetch(&self, i: usize) -> Result<Option<Word>, PresentationError> {
        let mut state = self.lock();
        while state.cache.len() <= i {
            if state.exhausted {
                return Ok(None);
            }
            if let Some(msg) = &state.failure {
                return Err(PresentationError::Stream(msg.clone()));
            }
            let next = state.cache.len();
            if next < self.inline.len() {
                let w = self.inline[next].clone();
                state.cache.push(w);
                continue;
            }
            match &self.tail {
                Tail::None => state.exhausted = true,
                Tail::Family(family) => {
                    let w = family.relator(&self.alphabet, next - self.inline.len());
                    state.cache.push(w);
                }
                Tail::Stream(command) => {
                    if state.stream.is_none() {
                        state.stream = Some(StreamReader::spawn(command)?);
                    }
                    let read = state.stream.as_mut().expect("stream started").next_line();
                    match read.and_then(|line| match line {
                        None => Ok(None),
                        Some(text) => self
                            .alphabet
                            .parse_word(&text)
                            .map(Some)
                            .map_err(|e| PresentationError::Stream(format!("relator {next}: {e}"))),
                    }) {
                        Ok(Some(w)) => state.cache.push(w),
                        Ok(None) => {
                            state.exhausted = true;
                            state.stream = None;
                        }
                        Err(e) => {
                            state.failure = Some(e.to_string());
                            state.stream = None;
                            return Err(e);
                        }
                    }
                }
            }
        }
        Ok(Some(state.cache[i].clone()))
    }

    /// Number of relators, if the source is known to have ended.
    pub fn known_length(&self) -> Option<usize> {
        let state = self.lock();
        state.exhausted.then_some(state.cache.len())
    }
}

/// A presentation ⟨S | ℛ⟩, optionally extended by an extra relator X placed
/// at index 0 (the base relators then shift up by one).
#[derive(Debug, Clone)]
pub struct Presentation {
    alphabet: Alphabet,
    source: Arc<RelatorSource>,
    extended_by: Option<Word>,
}

impl Presentation {
    pub fn new(alphabet: Alphabet, inline: Vec<Word>, tail: Tail) -> Result<Self, PresentationError> {
        for w in &inline {
            alphabet.check(w)?;
        }
        if let Tail::Family(Family::Powers(words)) = &tail {
            if words.is_empty() {
                return Err(PresentationError::UnknownFamily("powers needs at least one word".into()));
            }
            for w in words {
                alphabet.check(w)?;
            }
        }
        if let Tail::Stream(cmd) = &tail {
            if cmd.is_empty() {
                return Err(PresentationError::Stream("empty stream command".into()));
            }
        }
        let source = Arc::new(RelatorSource::new(alphabet.clone(), inline, tail));
        Ok(Self { alphabet, source, extended_by: None })
    }

    pub fn finite(alphabet: Alphabet, relators: Vec<Word>) -> Result<Self, PresentationError> {
        Self::new(alphabet, relators, Tail::None)
    }

    /// Convenience constructor from compact relator strings.
    pub fn from_words(alphabet: Alphabet, relators: &[&str]) -> Result<Self, PresentationError> {
        let words = relators.iter().map(|r| alphabet.parse_word(r)).collect::<Result<Vec<_>, _>>()?;
        Self::finite(alphabet, words)
    }

    pub fn parse(document: &str) -> Result<Self, PresentationError> {
        parse_document(document)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn extended_by(&self) -> Option<&Word> {
        self.extended_by.as_ref()
    }

    pub fn is_extended(&self) -> bool {
        self.extended_by.is_some()
    }

    /// The presentation with the adjoined relator removed.
    pub fn base(&self) -> Presentation {
        Presentation { alphabet: self.alphabet.clone(), source: self.source.clone(), extended_by: None }
    }

    pub fn source(&self) -> &RelatorSource {
        &self.source
    }

    /// Relator `i` (0-based), `None` once the source has ended before `i`.
    pub fn fetch(&self, i: usize) -> Result<Option<Word>, PresentationError> {
        match &self.extended_by {
            Some(x) if i == 0 => Ok(Some(x.clone())),
            Some(_) => self.source.fetch(i - 1),
            None => self.source.fetch(i),
        }
    }

    /// Relator `i`, with exhaustion reported as an error.
    pub fn relator(&self, i: usize) -> Result<Word, PresentationError> {
        self.fetch(i)?.ok_or_else(|| PresentationError::Exhausted {
            index: i,
            available: self.known_length().unwrap_or(i),
        })
    }

    /// Total relator count when the source is finite and fully read.
    pub fn known_length(&self) -> Option<usize> {
        let offset = usize::from(self.extended_by.is_some());
        self.source.known_length().map(|n| n + offset)
    }

    pub fn pulled_count(&self) -> usize {
        self.source.pulled_count() + usize::from(self.extended_by.is_some())
    }

    /// ⟨S | X ∪ ℛ⟩, with X at index 0. The receiver is left unchanged.
    pub fn extend(&self, x: &Word) -> Result<Presentation, PresentationError> {
        if self.extended_by.is_some() {
            return Err(PresentationError::AlreadyExtended);
        }
        if x.is_empty() {
            return Err(PresentationError::EmptyExtension);
        }
        self.alphabet.check(x)?;
        Ok(Presentation { alphabet: self.alphabet.clone(), source: self.source.clone(), extended_by: Some(x.clone()) })
    }

    /// SHA-256 over the alphabet and the first `count` relators, as hex.
    pub fn prefix_hash(&self, count: usize) -> Result<String, PresentationError> {
        let mut text = String::new();
        let names: Vec<String> = self.alphabet.names().iter().map(|c| c.to_string()).collect();
        writeln!(text, "generators: {}", names.join(" ")).unwrap();
        for i in 0..count {
            let r = self.relator(i)?;
            writeln!(text, "relator: {}", self.alphabet.format_word(&r)).unwrap();
        }
        Ok(hex::encode(Sha256::digest(text.as_bytes())))
    }

    /// Serializes the base presentation in the file format.
    pub fn to_document(&self) -> String {
        let mut out = String::new();
        let names: Vec<String> = self.alphabet.names().iter().map(|c| c.to_string()).collect();
        writeln!(out, "generators: {}", names.join(" ")).unwrap();
        for r in &self.source.inline {
            writeln!(out, "relator: {}", self.alphabet.format_word(r)).unwrap();
        }
        match &self.source.tail {
            Tail::None => {}
            Tail::Stream(cmd) => writeln!(out, "stream: {}", cmd.join(" ")).unwrap(),
            Tail::Family(Family::Powers(words)) => {
                let words: Vec<String> = words.iter().map(|w| self.alphabet.format_word(w)).collect();
                writeln!(out, "family: powers {}", words.join(" ")).unwrap();
            }
        }
        out
    }

    pub fn inline_relators(&self) -> &[Word] {
        &self.source.inline
    }

    pub fn tail(&self) -> &Tail {
        &self.source.tail
    }
}

fn parse_document(document: &str) -> Result<Presentation, PresentationError> {
    let mut alphabet: Option<Alphabet> = None;
    let mut inline = Vec::new();
    let mut tail = Tail::None;

    for (n, raw) in document.lines().enumerate() {
        let line = n + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let indent = raw.len() - raw.trim_start().len();
        let Some(colon) = trimmed.find(':') else {
            return Err(PresentationError::Syntax {
                line,
                column: indent + 1,
                message: "expected `<directive>: <value>`".into(),
            });
        };
        let key = trimmed[..colon].trim();
        let rest = &trimmed[colon + 1..];
        let value = rest.trim();
        let value_column = indent + colon + 2 + (rest.len() - rest.trim_start().len());

        if key != "generators" && alphabet.is_none() {
            return Err(PresentationError::Syntax {
                line,
                column: indent + 1,
                message: "`generators:` must come first".into(),
            });
        }
        if key != "generators" && tail != Tail::None {
            return Err(PresentationError::Syntax {
                line,
                column: indent + 1,
                message: "nothing may follow a `stream:` or `family:` line".into(),
            });
        }

        match key {
            "generators" => {
                if alphabet.is_some() {
                    return Err(PresentationError::Syntax {
                        line,
                        column: indent + 1,
                        message: "generators declared twice".into(),
                    });
                }
                let mut names = Vec::new();
                let mut column = value_column;
                for token in value.split_whitespace() {
                    let offset = value.find(token).unwrap_or(0);
                    column = value_column + offset;
                    let mut chars = token.chars();
                    let c = chars.next().expect("nonempty token");
                    if chars.next().is_some() || !c.is_ascii_lowercase() {
                        return Err(PresentationError::Syntax {
                            line,
                            column,
                            message: format!("generator name `{token}` must be one lowercase letter"),
                        });
                    }
                    if names.contains(&c) {
                        return Err(PresentationError::DuplicateGenerator { line, name: c });
                    }
                    names.push(c);
                }
                if names.is_empty() {
                    return Err(PresentationError::Syntax { line, column, message: "no generators listed".into() });
                }
                alphabet = Some(Alphabet::new(names)?);
            }
            "relator" => {
                let alpha = alphabet.as_ref().expect("checked above");
                inline.push(parse_word_at(alpha, value, line, value_column)?);
            }
            "stream" => {
                let command: Vec<String> = value.split_whitespace().map(str::to_string).collect();
                if command.is_empty() {
                    return Err(PresentationError::Syntax { line, column: value_column, message: "empty stream command".into() });
                }
                tail = Tail::Stream(command);
            }
            "family" => {
                let alpha = alphabet.as_ref().expect("checked above");
                let mut tokens = value.split_whitespace();
                let name = tokens.next().ok_or_else(|| PresentationError::Syntax {
                    line,
                    column: value_column,
                    message: "missing family name".into(),
                })?;
                match name {
                    "powers" => {
                        let mut words = Vec::new();
                        for token in tokens {
                            let column = value_column + value.find(token).unwrap_or(0);
                            words.push(parse_word_at(alpha, token, line, column)?);
                        }
                        if words.is_empty() {
                            return Err(PresentationError::Syntax {
                                line,
                                column: value_column,
                                message: "family `powers` needs at least one word".into(),
                            });
                        }
                        tail = Tail::Family(Family::Powers(words));
                    }
                    other => return Err(PresentationError::UnknownFamily(other.to_string())),
                }
            }
            other => {
                return Err(PresentationError::Syntax {
                    line,
                    column: indent + 1,
                    message: format!("unknown directive `{other}`"),
                })
            }
        }
    }

    let alphabet = alphabet.ok_or(PresentationError::Syntax {
        line: 1,
        column: 1,
        message: "missing `generators:` line".into(),
    })?;
    Presentation::new(alphabet, inline, tail)
}

fn parse_word_at(alphabet: &Alphabet, text: &str, line: usize, column: usize) -> Result<Word, PresentationError> {
    alphabet.parse_word(text).map_err(|e| match e {
        WordError::UnknownSymbol { symbol, offset } => {
            PresentationError::UnknownGenerator { line, column: column + offset, symbol }
        }
        other => PresentationError::Word(other),
    })
}
