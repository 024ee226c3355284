//! Line-oriented text and JSON forms of certificates.
//!
//! Every line is `key: value`. Words are written with the presentation's
//! generator names, capitals for inverses, and the empty word as nothing.
//!
//! ```text
//! certificate: equality
//! presentation: <sha-256 of the relator prefix used>
//! target: abba
//! stage: 2
//! max-relator: 1
//! factors: 2
//! factor: 0 + ab
//! factor: 1 -
//! end
//! ```
//!
//! A finiteness certificate lists `order`, the table `row`s, one `image` per
//! element, one `coverage` per generator, then every `equation` (cell i j and
//! the word its proof establishes) and `coverage-proof` (generator and word),
//! each nonempty word followed by an indented equality body.

use std::fmt::Write;

use serde_json::{json, Value};
use thiserror::Error;

use crate::derivation::{DyckFactor, DyckProduct, EqualityCertificate};
use crate::freegroup::{Alphabet, Sign, Word};
use crate::presentation::{Presentation, PresentationError};
use crate::quotient::{Assignment, FinitenessCertificate};
use crate::tables::MultiplicationTable;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("certificate line {line}: {message}")]
pub struct CertificateParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    Equality(EqualityCertificate),
    Finiteness(FinitenessCertificate),
}

impl Certificate {
    pub fn kind(&self) -> &'static str {
        match self {
            Certificate::Equality(_) => "equality",
            Certificate::Finiteness(_) => "finiteness",
        }
    }

    pub fn target(&self) -> &Word {
        match self {
            Certificate::Equality(c) => &c.target,
            Certificate::Finiteness(c) => &c.target,
        }
    }
}

/// A certificate bound to the presentation prefix it was produced for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateDocument {
    /// Hash over the generators and relators 0..n of the presentation the
    /// proofs live in: the base for equality, ⟨S | X ∪ ℛ⟩ for finiteness.
    pub presentation_hash: String,
    pub certificate: Certificate,
}

impl CertificateDocument {
    pub fn new(certificate: Certificate, base: &Presentation) -> Result<Self, PresentationError> {
        let presentation_hash = match &certificate {
            Certificate::Equality(c) => base.prefix_hash(c.relators_used())?,
            Certificate::Finiteness(c) => base.extend(&c.target)?.prefix_hash(c.relators_used())?,
        };
        Ok(Self { presentation_hash, certificate })
    }

    pub fn to_text(&self, alphabet: &Alphabet) -> String {
        let mut out = String::new();
        line(&mut out, 0, "certificate", self.certificate.kind());
        line(&mut out, 0, "presentation", &self.presentation_hash);
        line(&mut out, 0, "target", &alphabet.format_word(self.certificate.target()));
        match &self.certificate {
            Certificate::Equality(c) => write_equality(&mut out, 0, c, alphabet),
            Certificate::Finiteness(c) => {
                let r = c.table.order().max(1);
                line(&mut out, 0, "order", &c.table.order().to_string());
                for row in c.table.rows() {
                    line(&mut out, 0, "row", &join(row));
                }
                for (i, w) in c.assignment.images.iter().enumerate() {
                    line(&mut out, 0, "image", &join_words(&[i.to_string(), alphabet.format_word(w)]));
                }
                for (g, e) in c.assignment.coverage.iter().enumerate() {
                    line(&mut out, 0, "coverage", &format!("{} {e}", generator_name(alphabet, g)));
                }
                for (cell, proof) in c.equation_proofs.iter().enumerate() {
                    let head = [(cell / r).to_string(), (cell % r).to_string(), proved_word(proof, alphabet)];
                    line(&mut out, 0, "equation", &join_words(&head));
                    if let Some(p) = proof {
                        write_equality(&mut out, 1, p, alphabet);
                    }
                }
                for (g, proof) in c.coverage_proofs.iter().enumerate() {
                    let head = [generator_name(alphabet, g), proved_word(proof, alphabet)];
                    line(&mut out, 0, "coverage-proof", &join_words(&head));
                    if let Some(p) = proof {
                        write_equality(&mut out, 1, p, alphabet);
                    }
                }
            }
        }
        line(&mut out, 0, "end", "");
        out
    }

    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Self, CertificateParseError> {
        let mut r = Reader::new(text, alphabet);
        let kind = r.expect("certificate")?;
        let presentation_hash = r.expect("presentation")?.to_string();
        let target = r.word("target")?;
        let certificate = match kind {
            "equality" => Certificate::Equality(r.equality_body(target)?),
            "finiteness" => Certificate::Finiteness(r.finiteness_body(target)?),
            other => return Err(r.error(format!("unknown certificate kind {other:?}"))),
        };
        r.expect("end")?;
        if let Some((n, l)) = r.peek() {
            return Err(CertificateParseError { line: n, message: format!("unexpected text after end: {l:?}") });
        }
        Ok(Self { presentation_hash, certificate })
    }

    pub fn to_json(&self, alphabet: &Alphabet) -> Value {
        let body = match &self.certificate {
            Certificate::Equality(c) => equality_json(c, alphabet),
            Certificate::Finiteness(c) => {
                let fmt = |w: &Word| alphabet.format_word(w);
                let rows: Vec<&[usize]> = c.table.rows().collect();
                let r = c.table.order().max(1);
                json!({
                    "order": c.table.order(),
                    "rows": rows,
                    "images": c.assignment.images.iter().map(fmt).collect::<Vec<_>>(),
                    "coverage": c.assignment.coverage,
                    "equations": c.equation_proofs.iter().enumerate().map(|(cell, p)| json!({
                        "cell": [cell / r, cell % r],
                        "word": proved_word(p, alphabet),
                        "proof": p.as_ref().map(|p| equality_json(p, alphabet)),
                    })).collect::<Vec<_>>(),
                    "coverage_proofs": c.coverage_proofs.iter().enumerate().map(|(g, p)| json!({
                        "generator": generator_name(alphabet, g),
                        "word": proved_word(p, alphabet),
                        "proof": p.as_ref().map(|p| equality_json(p, alphabet)),
                    })).collect::<Vec<_>>(),
                })
            }
        };
        json!({
            "certificate": self.certificate.kind(),
            "presentation": self.presentation_hash,
            "target": alphabet.format_word(self.certificate.target()),
            "body": body,
        })
    }
}

/// The word a proof establishes; entries without a proof claim the empty word.
fn proved_word(proof: &Option<EqualityCertificate>, alphabet: &Alphabet) -> String {
    proof.as_ref().map_or_else(String::new, |p| alphabet.format_word(&p.target))
}

fn generator_name(alphabet: &Alphabet, g: usize) -> String {
    alphabet.names().get(g).map_or_else(|| format!("#{g}"), char::to_string)
}

fn equality_json(c: &EqualityCertificate, alphabet: &Alphabet) -> Value {
    json!({
        "stage": c.product.stage,
        "max_relator": c.max_relator_index,
        "factors": c.product.factors.iter().map(|f| json!({
            "relator": f.relator_index,
            "sign": f.sign.symbol().to_string(),
            "conjugator": alphabet.format_word(&f.conjugator),
        })).collect::<Vec<_>>(),
    })
}

fn line(out: &mut String, indent: usize, key: &str, value: &str) {
    let pad = "  ".repeat(indent);
    if value.is_empty() {
        writeln!(out, "{pad}{key}:").unwrap();
    } else {
        writeln!(out, "{pad}{key}: {value}").unwrap();
    }
}

fn join(xs: &[usize]) -> String {
    xs.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

fn join_words(parts: &[String]) -> String {
    parts.iter().filter(|p| !p.is_empty()).cloned().collect::<Vec<_>>().join(" ")
}

fn write_equality(out: &mut String, indent: usize, c: &EqualityCertificate, alphabet: &Alphabet) {
    line(out, indent, "stage", &c.product.stage.to_string());
    line(out, indent, "max-relator", &c.max_relator_index.to_string());
    line(out, indent, "factors", &c.product.factors.len().to_string());
    for f in &c.product.factors {
        let parts = [f.relator_index.to_string(), f.sign.symbol().to_string(), alphabet.format_word(&f.conjugator)];
        line(out, indent, "factor", &join_words(&parts));
    }
}

struct Reader<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
    alphabet: &'a Alphabet,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str, alphabet: &'a Alphabet) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        Self { lines, pos: 0, alphabet }
    }

    fn peek(&self) -> Option<(usize, &'a str)> {
        self.lines.get(self.pos).copied()
    }

    fn error(&self, message: String) -> CertificateParseError {
        let line = self.lines.get(self.pos.saturating_sub(1)).or(self.lines.last()).map_or(0, |l| l.0);
        CertificateParseError { line, message }
    }

    fn expect(&mut self, key: &str) -> Result<&'a str, CertificateParseError> {
        let Some((n, l)) = self.peek() else {
            return Err(CertificateParseError {
                line: self.lines.last().map_or(0, |l| l.0),
                message: format!("missing {key:?} line"),
            });
        };
        let (k, v) = l.split_once(':').ok_or_else(|| CertificateParseError { line: n, message: "expected key: value".into() })?;
        if k.trim() != key {
            return Err(CertificateParseError { line: n, message: format!("expected {key:?}, found {:?}", k.trim()) });
        }
        self.pos += 1;
        Ok(v.trim())
    }

    fn parse_word(&self, text: &str) -> Result<Word, CertificateParseError> {
        self.alphabet.parse_word(text).map_err(|e| self.error(e.to_string()))
    }

    fn word(&mut self, key: &str) -> Result<Word, CertificateParseError> {
        let v = self.expect(key)?;
        self.parse_word(v)
    }

    fn number(&mut self, key: &str) -> Result<usize, CertificateParseError> {
        let v = self.expect(key)?;
        v.parse().map_err(|_| self.error(format!("{key}: not a number: {v:?}")))
    }

    fn numbers(&self, v: &str) -> Result<Vec<usize>, CertificateParseError> {
        v.split_whitespace()
            .map(|t| t.parse().map_err(|_| self.error(format!("not a number: {t:?}"))))
            .collect()
    }

    fn generator(&self, name: &str) -> Result<usize, CertificateParseError> {
        let mut chars = name.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => self.alphabet.index_of(c).ok_or_else(|| self.error(format!("unknown generator {name:?}"))),
            _ => Err(self.error(format!("expected a generator name, found {name:?}"))),
        }
    }

    fn equality_body(&mut self, target: Word) -> Result<EqualityCertificate, CertificateParseError> {
        let stage = self.number("stage")?;
        let max_relator_index = self.number("max-relator")?;
        let count = self.number("factors")?;
        let mut factors = Vec::with_capacity(count.min(1 << 16));
        for _ in 0..count {
            let v = self.expect("factor")?;
            let mut parts = v.split_whitespace();
            let index = parts.next().ok_or_else(|| self.error("factor: missing relator index".into()))?;
            let relator_index = index.parse().map_err(|_| self.error(format!("bad relator index {index:?}")))?;
            let sign = parts
                .next()
                .and_then(Sign::from_symbol)
                .ok_or_else(|| self.error("factor: sign must be + or -".into()))?;
            let conjugator = self.parse_word(parts.next().unwrap_or(""))?;
            if parts.next().is_some() {
                return Err(self.error("factor: trailing text".into()));
            }
            factors.push(DyckFactor { conjugator, relator_index, sign });
        }
        Ok(EqualityCertificate { product: DyckProduct { factors, stage }, target, max_relator_index })
    }

    /// Reads `key: <head fields…> [word]` followed by a proof when the word is nonempty.
    fn proof_entry(&mut self, key: &str, fields: usize) -> Result<(Vec<&'a str>, Option<EqualityCertificate>), CertificateParseError> {
        let v = self.expect(key)?;
        let parts: Vec<&str> = v.split_whitespace().collect();
        if parts.len() < fields || parts.len() > fields + 1 {
            return Err(self.error(format!("{key}: expected {fields} fields and an optional word")));
        }
        let word = self.parse_word(parts.get(fields).copied().unwrap_or(""))?;
        let has_body = self.peek().is_some_and(|(_, l)| l.starts_with("stage:"));
        let proof = if has_body { Some(self.equality_body(word)?) } else { None };
        Ok((parts[..fields].to_vec(), proof))
    }

    fn finiteness_body(&mut self, target: Word) -> Result<FinitenessCertificate, CertificateParseError> {
        let r = self.number("order")?;
        if r == 0 || r > crate::tables::MAX_ORDER {
            return Err(self.error(format!("order {r} out of range")));
        }
        let mut rows = Vec::with_capacity(r);
        for _ in 0..r {
            let v = self.expect("row")?;
            rows.push(self.numbers(v)?);
        }
        let cells: Vec<usize> = rows.concat();
        if rows.iter().any(|row| row.len() != r) {
            return Err(self.error("row: wrong number of entries".into()));
        }
        let table = MultiplicationTable::from_cells(r, cells);
        let mut images = Vec::with_capacity(r);
        for i in 0..r {
            let v = self.expect("image")?;
            let (index, word) = v.split_once(' ').unwrap_or((v, ""));
            if index.parse::<usize>().ok() != Some(i) {
                return Err(self.error(format!("image: expected element {i}")));
            }
            images.push(self.parse_word(word.trim())?);
        }
        let k = self.alphabet.rank();
        let mut coverage = Vec::with_capacity(k);
        for g in 0..k {
            let v = self.expect("coverage")?;
            let (name, e) = v.split_once(' ').ok_or_else(|| self.error("coverage: expected generator and element".into()))?;
            if self.generator(name)? != g {
                return Err(self.error(format!("coverage: expected generator {}", self.alphabet.names()[g])));
            }
            coverage.push(e.trim().parse().map_err(|_| self.error(format!("bad element {e:?}")))?);
        }
        let mut equation_proofs = Vec::with_capacity(r * r);
        for cell in 0..r * r {
            let (head, proof) = self.proof_entry("equation", 2)?;
            let (i, j) = (self.numbers(head[0])?, self.numbers(head[1])?);
            if i != [cell / r] || j != [cell % r] {
                return Err(self.error(format!("equation: expected cell {} {}", cell / r, cell % r)));
            }
            equation_proofs.push(proof);
        }
        let mut coverage_proofs = Vec::with_capacity(k);
        for g in 0..k {
            let (head, proof) = self.proof_entry("coverage-proof", 1)?;
            if self.generator(head[0])? != g {
                return Err(self.error(format!("coverage-proof: expected generator {}", self.alphabet.names()[g])));
            }
            coverage_proofs.push(proof);
        }
        Ok(FinitenessCertificate {
            target,
            table,
            assignment: Assignment { images, coverage },
            equation_proofs,
            coverage_proofs,
        })
    }
}
