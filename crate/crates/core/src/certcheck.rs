//! Independent checking of certificates.
//!
//! Only free reduction, relator lookup and table arithmetic are relied on;
//! nothing from the searches that produced the certificate is reused.

use thiserror::Error;

use crate::certificate::{Certificate, CertificateDocument};
use crate::derivation::EqualityCertificate;
use crate::freegroup::{Alphabet, Letter, Sign, Word};
use crate::presentation::{Presentation, PresentationError};
use crate::quotient::FinitenessCertificate;
use crate::tables::{is_group_table, TableViolation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Rejection {
    #[error("presentation hash mismatch: certificate has {claimed}, presentation gives {actual}")]
    HashMismatch { claimed: String, actual: String },
    #[error("certificate is about {found:?}, expected {expected:?}")]
    TargetMismatch { expected: String, found: String },
    #[error("factor {factor}: relator {index} does not exist")]
    RelatorMissing { factor: usize, index: usize },
    #[error("factor {factor}: outside stage {stage}")]
    StageViolation { factor: usize, stage: usize },
    #[error("too many factors ({count}) for stage {stage}")]
    TooManyFactors { count: usize, stage: usize },
    #[error("declared max relator {declared}, factors use {actual}")]
    MaxRelatorMismatch { declared: usize, actual: usize },
    #[error("factor {factor}: conjugator uses a generator outside the alphabet")]
    BadConjugator { factor: usize },
    #[error("product reduces to {found:?}, not {expected:?}")]
    ProductMismatch { expected: String, found: String },
    #[error("not a group table: {0}")]
    Table(TableViolation),
    #[error("malformed assignment: {0}")]
    Shape(String),
    #[error("the identity element must map to the empty word")]
    IdentityImage,
    #[error("equation at cell ({i}, {j}) has word {word:?} but no proof")]
    MissingEquationProof { i: usize, j: usize, word: String },
    #[error("equation at cell ({i}, {j}): {source}")]
    Equation { i: usize, j: usize, source: Box<Rejection> },
    #[error("coverage of generator {generator} has word {word:?} but no proof")]
    MissingCoverageProof { generator: char, word: String },
    #[error("coverage of generator {generator}: {source}")]
    Coverage { generator: char, source: Box<Rejection> },
    #[error("presentation is not extended by the certificate's word {0:?}")]
    ExtensionMismatch(String),
    #[error("presentation: {0}")]
    Presentation(String),
}

impl From<PresentationError> for Rejection {
    fn from(e: PresentationError) -> Self {
        Rejection::Presentation(e.to_string())
    }
}

fn letter(g: usize, inverse: bool) -> Letter {
    Letter::new(g, inverse)
}

/// Free reduction by a stack, written out here rather than borrowed.
fn reduce(letters: impl IntoIterator<Item = Letter>) -> Vec<Letter> {
    let mut stack: Vec<Letter> = Vec::new();
    for l in letters {
        if stack.last() == Some(&l.inverse()) {
            stack.pop();
        } else {
            stack.push(l);
        }
    }
    stack
}

fn inverse(w: &[Letter]) -> impl Iterator<Item = Letter> + '_ {
    w.iter().rev().map(|l| l.inverse())
}

fn show(alphabet: &Alphabet, w: &[Letter]) -> String {
    alphabet.format_word(&Word::reduce(w.iter().copied()))
}

fn in_alphabet(alphabet: &Alphabet, w: &Word) -> bool {
    w.letters().iter().all(|l| l.generator() < alphabet.rank())
}

/// Checks that the certificate's product reduces to `x` in `p`.
pub fn verify_equality(cert: &EqualityCertificate, p: &Presentation, x: &Word) -> Result<(), Rejection> {
    let alphabet = p.alphabet();
    let expected = reduce(x.letters().iter().copied());
    if reduce(cert.target.letters().iter().copied()) != expected {
        return Err(Rejection::TargetMismatch {
            expected: show(alphabet, &expected),
            found: show(alphabet, cert.target.letters()),
        });
    }
    let factors = &cert.product.factors;
    let stage = cert.product.stage;
    if factors.len() > stage {
        return Err(Rejection::TooManyFactors { count: factors.len(), stage });
    }
    let actual = factors.iter().map(|f| f.relator_index).max().unwrap_or(0);
    if actual != cert.max_relator_index {
        return Err(Rejection::MaxRelatorMismatch { declared: cert.max_relator_index, actual });
    }
    let mut product: Vec<Letter> = Vec::new();
    for (n, f) in factors.iter().enumerate() {
        if f.relator_index > stage || f.conjugator.len() > stage {
            return Err(Rejection::StageViolation { factor: n, stage });
        }
        if !in_alphabet(alphabet, &f.conjugator) {
            return Err(Rejection::BadConjugator { factor: n });
        }
        let relator = p
            .fetch(f.relator_index)?
            .ok_or(Rejection::RelatorMissing { factor: n, index: f.relator_index })?;
        let body: Vec<Letter> = match f.sign {
            Sign::Plus => relator.letters().to_vec(),
            Sign::Minus => inverse(relator.letters()).collect(),
        };
        let t = f.conjugator.letters();
        let piece = t.iter().copied().chain(body).chain(inverse(t));
        product = reduce(product.into_iter().chain(piece));
    }
    if product != expected {
        return Err(Rejection::ProductMismatch { expected: show(alphabet, &expected), found: show(alphabet, &product) });
    }
    Ok(())
}

fn check_proof(
    proof: Option<&EqualityCertificate>,
    word: &[Letter],
    g1: &Presentation,
) -> Result<bool, Rejection> {
    match proof {
        None if word.is_empty() => Ok(true),
        None => Ok(false),
        Some(c) => verify_equality(c, g1, &Word::reduce(word.iter().copied())).map(|_| true),
    }
}

/// Checks a finite-quotient certificate against ⟨S | X ∪ ℛ⟩.
pub fn verify_finiteness(cert: &FinitenessCertificate, g1: &Presentation) -> Result<(), Rejection> {
    let alphabet = g1.alphabet();
    if g1.extended_by() != Some(&cert.target) {
        return Err(Rejection::ExtensionMismatch(alphabet.format_word(&cert.target)));
    }
    let t = &cert.table;
    is_group_table(t).map_err(Rejection::Table)?;
    let r = t.order();
    let k = alphabet.rank();
    let images = &cert.assignment.images;
    let coverage = &cert.assignment.coverage;
    if images.len() != r {
        return Err(Rejection::Shape(format!("{} images for {r} elements", images.len())));
    }
    if coverage.len() != k || coverage.iter().any(|&c| c >= r) {
        return Err(Rejection::Shape("coverage must name one element per generator".into()));
    }
    if cert.equation_proofs.len() != r * r || cert.coverage_proofs.len() != k {
        return Err(Rejection::Shape("wrong number of proofs".into()));
    }
    if images.iter().any(|w| !in_alphabet(alphabet, w)) {
        return Err(Rejection::Shape("image outside the alphabet".into()));
    }
    if !images[0].is_empty() {
        return Err(Rejection::IdentityImage);
    }
    let cells = t.cells();
    for i in 0..r {
        for j in 0..r {
            let ij = cells[i * r + j];
            let word = reduce(
                images[i].letters().iter().copied().chain(images[j].letters().iter().copied()).chain(inverse(images[ij].letters())),
            );
            let proof = cert.equation_proofs[i * r + j].as_ref();
            match check_proof(proof, &word, g1) {
                Ok(true) => {}
                Ok(false) => return Err(Rejection::MissingEquationProof { i, j, word: show(alphabet, &word) }),
                Err(e) => return Err(Rejection::Equation { i, j, source: Box::new(e) }),
            }
        }
    }
    for (g, &c) in coverage.iter().enumerate() {
        let word = reduce(std::iter::once(letter(g, false)).chain(inverse(images[c].letters())));
        let generator = alphabet.names()[g];
        match check_proof(cert.coverage_proofs[g].as_ref(), &word, g1) {
            Ok(true) => {}
            Ok(false) => return Err(Rejection::MissingCoverageProof { generator, word: show(alphabet, &word) }),
            Err(e) => return Err(Rejection::Coverage { generator, source: Box::new(e) }),
        }
    }
    Ok(())
}

fn used_relators(c: &EqualityCertificate) -> usize {
    c.product.factors.iter().map(|f| f.relator_index + 1).max().unwrap_or(0)
}

/// Checks a parsed document against the base presentation, hash included.
pub fn verify_document(doc: &CertificateDocument, base: &Presentation) -> Result<(), Rejection> {
    let hashed = |p: &Presentation, count: usize| -> Result<(), Rejection> {
        let actual = p.prefix_hash(count).map_err(|e| match e {
            PresentationError::Exhausted { index, .. } => Rejection::RelatorMissing { factor: 0, index },
            other => other.into(),
        })?;
        if actual != doc.presentation_hash {
            return Err(Rejection::HashMismatch { claimed: doc.presentation_hash.clone(), actual });
        }
        Ok(())
    };
    match &doc.certificate {
        Certificate::Equality(c) => {
            verify_equality(c, base, &c.target)?;
            hashed(base, used_relators(c))
        }
        Certificate::Finiteness(c) => {
            if c.target.is_empty() || !in_alphabet(base.alphabet(), &c.target) {
                return Err(Rejection::ExtensionMismatch(base.alphabet().format_word(&c.target)));
            }
            let g1 = base.extend(&c.target)?;
            verify_finiteness(c, &g1)?;
            let count = c.equation_proofs.iter().chain(&c.coverage_proofs).flatten().map(used_relators).max().unwrap_or(0);
            hashed(&g1, count)
        }
    }
}
