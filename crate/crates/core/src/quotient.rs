//! Certifying X ≠ 1 by exhibiting G₁ = ⟨S | X ∪ ℛ⟩ as a quotient of a finite group.
//!
//! A candidate is a table T from [`crate::tables`], an assignment τ of a word
//! to every element (τ(u_0) = ε), and a coverage map c choosing for each
//! generator a an element with a = τ(u_{c(a)}). The candidate succeeds once every
//! table equation τ(u_i)τ(u_j)τ(u_{ij})⁻¹ and every coverage equation
//! a·τ(u_{c(a)})⁻¹ is derived in G₁. Then u ↦ τ(u) is a homomorphism onto G₁,
//! which is therefore finite.
//!
//! Candidates come in blocks (table, L): the assignments whose longest image
//! has length exactly L. The search runs in epochs. Epoch e admits every block
//! whose size is at most `admission_scale · 2^e` (tables up to cursor e), then
//! derives to depth `initial_budget · 2^e` and revisits every admitted
//! candidate at that depth, so a candidate shelved at depth B comes back at 2B.
//!
//! Derivations share one enumeration of Dyck products of G₁: every scanned
//! product is looked up among the equation words registered so far. A word's
//! proof is the first product in enumeration order that reduces to it, exactly
//! what [`crate::derivation::EqualityTask`] would find for that word alone.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::derivation::{DyckCursor, DyckProduct, EqualityCertificate, FactorCatalog, Progress};
use crate::freegroup::{Alphabet, Letter, Word};
use crate::presentation::{Presentation, PresentationError};
use crate::tables::{MultiplicationTable, TableCatalog, DEFAULT_ORDER_CAP};

#[derive(Debug, Error)]
pub enum QuotientError {
    #[error("the finiteness search needs an extended presentation")]
    NotExtended,
    #[error(transparent)]
    Presentation(#[from] PresentationError),
}

/// How element images are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum AssignmentMode {
    /// Images are arbitrary nonempty reduced words; generators are reached
    /// through coverage equations.
    #[default]
    Words,
    /// Images of the non-identity elements are single generators, covering
    /// every generator. Cannot exhibit quotients such as ℤ/3 = ⟨a | a³⟩, whose
    /// element a² is not a letter.
    Letters,
}

/// τ(u_0), …, τ(u_{r−1}) together with the coverage choice c(a) per generator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    pub images: Vec<Word>,
    pub coverage: Vec<usize>,
}

/// The r² words τ(u_i)·τ(u_j)·τ(u_{ij})⁻¹ in row-major order; empty entries
/// hold trivially.
pub fn equation_words(t: &MultiplicationTable, images: &[Word]) -> Vec<Word> {
    let r = t.order();
    let mut out = Vec::with_capacity(r * r);
    for i in 0..r {
        for j in 0..r {
            let k = t.mul(i, j);
            out.push(images[i].concat(&images[j]).concat(&images[k].invert()));
        }
    }
    out
}

/// Per generator g, the word g·τ(u_{c(g)})⁻¹.
pub fn coverage_words(images: &[Word], coverage: &[usize]) -> Vec<Word> {
    coverage
        .iter()
        .enumerate()
        .map(|(g, &c)| Word::reduce([Letter::new(g, false)]).concat(&images[c].invert()))
        .collect()
}

/// Number of image tuples (ignoring coverage) with every image of length ≤ L.
fn image_tuples(r: usize, alphabet: &Alphabet, length: usize, mode: AssignmentMode) -> u128 {
    match mode {
        AssignmentMode::Words => {
            let per = alphabet.words_up_to(length) - 1;
            (1..r).fold(1u128, |acc, _| acc.saturating_mul(per))
        }
        AssignmentMode::Letters => {
            if length == 0 {
                return u128::from(r == 1);
            }
            surjections(r - 1, alphabet.rank())
        }
    }
}

fn surjections(n: usize, k: usize) -> u128 {
    // Inclusion–exclusion: Σ (−1)^i C(k,i) (k−i)^n.
    let mut total: i128 = 0;
    let mut binom: i128 = 1;
    for i in 0..=k {
        let term = binom * (k - i).pow(n as u32) as i128;
        total += if i % 2 == 0 { term } else { -term };
        binom = binom * (k - i) as i128 / (i + 1) as i128;
    }
    total as u128
}

fn coverage_maps(r: usize, k: usize, mode: AssignmentMode) -> u128 {
    match mode {
        AssignmentMode::Words => (0..k).fold(1u128, |acc, _| acc.saturating_mul(r as u128)),
        AssignmentMode::Letters => 1,
    }
}

/// Size of the (table, L) block: every assignment with images of length ≤ L
/// (for word images) or every letter assignment (L = 1 only).
pub fn block_size(r: usize, alphabet: &Alphabet, length: usize, mode: AssignmentMode) -> u128 {
    if length == 0 || (mode == AssignmentMode::Letters && length > 1) {
        return 0;
    }
    image_tuples(r, alphabet, length, mode).saturating_mul(coverage_maps(r, alphabet.rank(), mode))
}

/// The n-th assignment of the (t, L) block, or `None` past its end.
///
/// Word images: tuples (τ(u_1), …, τ(u_{r−1}), c(a_1), …, c(a_k)) in
/// lexicographic order, images ordered by word enumeration index and each of
/// length 1..=L. Letter images: surjective tuples of generators in
/// lexicographic order, with c(a) the first element mapped to a.
pub fn assignment_at_cursor(
    n: u128,
    t: &MultiplicationTable,
    alphabet: &Alphabet,
    length: usize,
    mode: AssignmentMode,
) -> Option<Assignment> {
    let r = t.order();
    let k = alphabet.rank();
    if n >= block_size(r, alphabet, length, mode) {
        return None;
    }
    match mode {
        AssignmentMode::Words => {
            let maps = coverage_maps(r, k, mode);
            let per = alphabet.words_up_to(length) - 1;
            let (mut img, mut cov) = (n / maps, n % maps);
            let mut images = vec![Word::empty(); r];
            for i in (1..r).rev() {
                images[i] = alphabet.word_at_index(img % per + 1);
                img /= per;
            }
            let mut coverage = vec![0; k];
            for g in (0..k).rev() {
                coverage[g] = (cov % r as u128) as usize;
                cov /= r as u128;
            }
            Some(Assignment { images, coverage })
        }
        AssignmentMode::Letters => {
            let mut seen = 0u128;
            let total = (0..r - 1).fold(1u128, |acc, _| acc * k as u128);
            for code in 0..total {
                let mut digits = vec![0usize; r - 1];
                let mut c = code;
                for d in digits.iter_mut().rev() {
                    *d = (c % k as u128) as usize;
                    c /= k as u128;
                }
                let coverage: Option<Vec<usize>> =
                    (0..k).map(|g| digits.iter().position(|&d| d == g).map(|p| p + 1)).collect();
                let Some(coverage) = coverage else { continue };
                if seen == n {
                    let mut images = vec![Word::empty()];
                    images.extend(digits.iter().map(|&g| alphabet.generator(g)));
                    return Some(Assignment { images, coverage });
                }
                seen += 1;
            }
            None
        }
    }
}

/// Witness that G₁ is a quotient of a finite group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinitenessCertificate {
    /// The word X adjoined to form G₁.
    pub target: Word,
    pub table: MultiplicationTable,
    pub assignment: Assignment,
    /// Row-major, one per table cell; `None` where the equation word is empty.
    pub equation_proofs: Vec<Option<EqualityCertificate>>,
    /// One per generator; `None` where the coverage word is empty.
    pub coverage_proofs: Vec<Option<EqualityCertificate>>,
}

impl FinitenessCertificate {
    /// Number of leading relators of G₁ the embedded proofs depend on.
    pub fn relators_used(&self) -> usize {
        self.equation_proofs
            .iter()
            .chain(&self.coverage_proofs)
            .flatten()
            .map(EqualityCertificate::relators_used)
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FinitenessConfig {
    pub order_cap: usize,
    /// Derivation depth (scanned Dyck products) in epoch 0.
    pub initial_budget: u64,
    /// Largest block admitted in epoch 0.
    pub admission_scale: u64,
    pub mode: AssignmentMode,
    /// Keep a log of every candidate evaluation.
    pub record_visits: bool,
}

impl Default for FinitenessConfig {
    fn default() -> Self {
        Self {
            order_cap: DEFAULT_ORDER_CAP,
            initial_budget: 256,
            admission_scale: 64,
            mode: AssignmentMode::Words,
            record_visits: false,
        }
    }
}

/// One evaluation of one candidate at one derivation depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Visit {
    pub epoch: u32,
    pub table_cursor: usize,
    pub length: usize,
    pub assignment_cursor: u128,
    pub budget: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FinitenessStats {
    pub epochs: u32,
    pub scan_steps: u64,
    pub rescans: u64,
    pub registrations: u64,
    pub evaluations: u64,
    pub words_registered: usize,
    pub words_proved: usize,
}

#[derive(Debug, Clone)]
struct Block {
    table_cursor: usize,
    table: Arc<MultiplicationTable>,
    length: usize,
    size: u128,
    fresh: bool,
}

#[derive(Debug, Clone, Copy)]
enum Phase {
    StartEpoch,
    Register { block: usize, next: u128 },
    Scan,
    Evaluate { block: usize, next: u128 },
}

/// Per image tuple: its equation words and whether they are all proved.
#[derive(Debug)]
struct ImageCache {
    block: usize,
    index: u128,
    images: Vec<Word>,
    equations: Vec<Word>,
}

/// Resumable, deterministic search for a [`FinitenessCertificate`].
#[derive(Debug)]
pub struct FinitenessTask {
    extended: Presentation,
    config: FinitenessConfig,
    derivations: Arc<FactorCatalog>,
    tables: TableCatalog,
    registry: HashMap<Word, Option<DyckProduct>>,
    registry_grew: bool,
    longest_registered: usize,
    scan: DyckCursor,
    epoch: u32,
    blocks: Vec<Block>,
    admitted: HashSet<(usize, usize)>,
    phase: Phase,
    cache: Option<ImageCache>,
    steps: u64,
    stats: FinitenessStats,
    visits: Vec<Visit>,
    found: Option<FinitenessCertificate>,
}

impl FinitenessTask {
    pub fn new(extended: &Presentation, config: FinitenessConfig) -> Result<Self, QuotientError> {
        if !extended.is_extended() {
            return Err(QuotientError::NotExtended);
        }
        let derivations = FactorCatalog::new(extended.clone());
        Ok(Self {
            extended: extended.clone(),
            config,
            scan: DyckCursor::new(derivations.clone()),
            derivations,
            tables: TableCatalog::new(config.order_cap),
            registry: HashMap::new(),
            registry_grew: false,
            longest_registered: 0,
            epoch: 0,
            blocks: Vec::new(),
            admitted: HashSet::new(),
            phase: Phase::StartEpoch,
            cache: None,
            steps: 0,
            stats: FinitenessStats::default(),
            visits: Vec::new(),
            found: None,
        })
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn epoch(&self) -> u32 {
        self.epoch
    }

    pub fn stats(&self) -> FinitenessStats {
        let mut s = self.stats.clone();
        s.words_registered = self.registry.len();
        s.words_proved = self.registry.values().filter(|v| v.is_some()).count();
        s
    }

    pub fn visits(&self) -> &[Visit] {
        &self.visits
    }

    pub fn extended(&self) -> &Presentation {
        &self.extended
    }

    /// Scan depth in the current epoch.
    pub fn budget(&self) -> u64 {
        self.config.initial_budget.saturating_mul(1u64 << self.epoch.min(62))
    }

    fn admission_limit(&self) -> u128 {
        u128::from(self.config.admission_scale).saturating_mul(1u128 << self.epoch.min(100))
    }

    /// One quantum: registers, evaluates or derives for one candidate or product.
    pub fn step(&mut self) -> Result<Progress<FinitenessCertificate>, QuotientError> {
        if let Some(c) = &self.found {
            return Ok(Progress::Found(c.clone()));
        }
        self.steps += 1;
        loop {
            match self.phase {
                Phase::StartEpoch => self.start_epoch(),
                Phase::Register { block, next } => {
                    let Some(b) = self.blocks.get(block) else {
                        self.phase = Phase::Scan;
                        continue;
                    };
                    if !b.fresh || next >= b.size {
                        self.phase = Phase::Register { block: block + 1, next: 0 };
                        continue;
                    }
                    self.phase = Phase::Register { block, next: next + 1 };
                    if !self.is_own(block, next) {
                        continue;
                    }
                    self.register(block, next);
                    self.stats.registrations += 1;
                    return Ok(Progress::Running);
                }
                Phase::Scan => {
                    if self.registry_grew {
                        self.registry_grew = false;
                        self.scan = DyckCursor::new(self.derivations.clone());
                        self.stats.rescans += 1;
                    }
                    if self.scan.position() >= u128::from(self.budget()) || self.scan.is_finished() {
                        self.phase = Phase::Evaluate { block: 0, next: 0 };
                        continue;
                    }
                    self.scan_one()?;
                    self.stats.scan_steps += 1;
                    return Ok(Progress::Running);
                }
                Phase::Evaluate { block, next } => {
                    let Some(b) = self.blocks.get(block) else {
                        self.epoch += 1;
                        self.stats.epochs = self.epoch;
                        self.phase = Phase::StartEpoch;
                        continue;
                    };
                    if next >= b.size {
                        self.phase = Phase::Evaluate { block: block + 1, next: 0 };
                        continue;
                    }
                    self.phase = Phase::Evaluate { block, next: next + 1 };
                    if !self.is_own(block, next) {
                        continue;
                    }
                    self.stats.evaluations += 1;
                    if let Some(cert) = self.evaluate(block, next) {
                        self.found = Some(cert.clone());
                        return Ok(Progress::Found(cert));
                    }
                    return Ok(Progress::Running);
                }
            }
        }
    }

    fn start_epoch(&mut self) {
        let limit = self.admission_limit();
        let alphabet = self.extended.alphabet().clone();
        let mut blocks = Vec::new();
        let mut tc = 0;
        while tc as u32 <= self.epoch {
            let Some(table) = self.tables.at_cursor(tc) else { break };
            let table = Arc::new(table);
            let r = table.order();
            let mut length = 1;
            loop {
                if length > 1 && (r == 1 || self.config.mode == AssignmentMode::Letters) {
                    break;
                }
                let size = block_size(r, &alphabet, length, self.config.mode);
                if size > limit || size == 0 {
                    break;
                }
                let fresh = self.admitted.insert((tc, length));
                blocks.push(Block { table_cursor: tc, table: table.clone(), length, size, fresh });
                length += 1;
            }
            tc += 1;
        }
        self.blocks = blocks;
        self.cache = None;
        self.phase = Phase::Register { block: 0, next: 0 };
    }

    /// Whether assignment `n` of the block belongs to it rather than to the
    /// block with a smaller length bound.
    fn is_own(&mut self, block: usize, n: u128) -> bool {
        let length = self.blocks[block].length;
        if length == 1 {
            return true;
        }
        self.images_for(block, n).iter().any(|w| w.len() == length)
    }

    fn images_for(&mut self, block: usize, n: u128) -> &[Word] {
        let b = &self.blocks[block];
        let alphabet = self.extended.alphabet();
        let maps = coverage_maps(b.table.order(), alphabet.rank(), self.config.mode);
        let index = n / maps;
        let stale = !matches!(&self.cache, Some(c) if c.block == block && c.index == index);
        if stale {
            let a = assignment_at_cursor(n, &b.table, alphabet, b.length, self.config.mode)
                .expect("cursor within block");
            let equations = equation_words(&b.table, &a.images);
            self.cache = Some(ImageCache { block, index, images: a.images, equations });
        }
        &self.cache.as_ref().expect("filled").images
    }

    fn candidate(&mut self, block: usize, n: u128) -> Assignment {
        let b = &self.blocks[block];
        assignment_at_cursor(n, &b.table, self.extended.alphabet(), b.length, self.config.mode)
            .expect("cursor within block")
    }

    fn register(&mut self, block: usize, n: u128) {
        let a = self.candidate(block, n);
        self.images_for(block, n);
        let equations = self.cache.as_ref().expect("filled").equations.clone();
        let coverage = coverage_words(&a.images, &a.coverage);
        for w in equations.into_iter().chain(coverage) {
            if !w.is_empty() && !self.registry.contains_key(&w) {
                self.longest_registered = self.longest_registered.max(w.len());
                self.registry.insert(w, None);
                self.registry_grew = true;
            }
        }
    }

    fn scan_one(&mut self) -> Result<(), PresentationError> {
        let hit = match self.scan.advance()? {
            Some(value) if !value.is_empty() && value.len() <= self.longest_registered => {
                let key = Word::reduce(value.iter().copied());
                matches!(self.registry.get(&key), Some(None)).then_some(key)
            }
            _ => None,
        };
        if let Some(key) = hit {
            self.registry.insert(key, Some(self.scan.current()));
        }
        Ok(())
    }

    fn proof_of(&self, w: &Word) -> Option<Option<EqualityCertificate>> {
        if w.is_empty() {
            return Some(None);
        }
        match self.registry.get(w) {
            Some(Some(product)) => Some(Some(EqualityCertificate::new(product.clone(), w.clone()))),
            _ => None,
        }
    }

    fn evaluate(&mut self, block: usize, n: u128) -> Option<FinitenessCertificate> {
        if self.config.record_visits {
            let b = &self.blocks[block];
            self.visits.push(Visit {
                epoch: self.epoch,
                table_cursor: b.table_cursor,
                length: b.length,
                assignment_cursor: n,
                budget: self.budget(),
            });
        }
        self.images_for(block, n);
        let cache = self.cache.as_ref().expect("filled");
        let mut equation_proofs = Vec::with_capacity(cache.equations.len());
        for w in &cache.equations {
            equation_proofs.push(self.proof_of(w)?);
        }
        let a = self.candidate(block, n);
        let mut coverage_proofs = Vec::with_capacity(a.coverage.len());
        for w in coverage_words(&a.images, &a.coverage) {
            coverage_proofs.push(self.proof_of(&w)?);
        }
        Some(FinitenessCertificate {
            target: self.extended.extended_by().expect("extended").clone(),
            table: (*self.blocks[block].table).clone(),
            assignment: a,
            equation_proofs,
            coverage_proofs,
        })
    }
}

/// Runs the search for at most `budget` steps.
pub fn prove_finite(
    extended: &Presentation,
    budget: u64,
    config: FinitenessConfig,
) -> Result<Option<FinitenessCertificate>, QuotientError> {
    let mut task = FinitenessTask::new(extended, config)?;
    for _ in 0..budget {
        if let Progress::Found(c) = task.step()? {
            return Ok(Some(c));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivation::{assemble_dyck, prove_equal};
    use crate::tables::enumerate_tables;

    fn pres(k: usize, rels: &[&str]) -> Presentation {
        Presentation::from_words(Alphabet::standard(k).unwrap(), rels).unwrap()
    }

    fn words(p: &Presentation, ws: &[&str]) -> Vec<Word> {
        ws.iter().map(|s| p.alphabet().parse_word(s).unwrap()).collect()
    }

    fn klein() -> MultiplicationTable {
        enumerate_tables(4).into_iter().find(|t| (1..4).all(|i| t.mul(i, i) == 0)).unwrap()
    }

    #[test]
    fn equation_word_examples() {
        let z = pres(1, &[]);
        let trivial = equation_words(&MultiplicationTable::trivial(), &[Word::empty()]);
        assert_eq!(trivial, vec![Word::empty()]);

        let z3 = MultiplicationTable::cyclic(3);
        let eq = equation_words(&z3, &words(&z, &["", "a", "aa"]));
        let fmt: Vec<String> = eq.iter().map(|w| z.alphabet().format_word(w)).collect();
        assert_eq!(fmt[4], ""); // a·a·(aa)⁻¹
        assert_eq!(fmt[8], "aaa"); // aa·aa·a⁻¹
        assert_eq!(fmt[5], "aaa"); // a·aa·ε⁻¹

        let d = pres(2, &["aa", "bb"]);
        let k4 = MultiplicationTable::from_rows(&[vec![0, 1, 2, 3], vec![1, 0, 3, 2], vec![2, 3, 0, 1], vec![3, 2, 1, 0]]);
        let eq = equation_words(&k4, &words(&d, &["", "a", "b", "ab"]));
        assert!(eq[4 + 2].is_empty()); // a·b·(ab)⁻¹
        assert_eq!(d.alphabet().format_word(&eq[3 * 4 + 3]), "abab");
    }

    #[test]
    fn coverage_word_examples() {
        let d = pres(2, &["aa", "bb"]);
        let images = words(&d, &["", "a", "b", "ab"]);
        let cov = coverage_words(&images, &[1, 2]);
        assert!(cov.iter().all(Word::is_empty));
        let cov = coverage_words(&images, &[2, 3]);
        let fmt: Vec<String> = cov.iter().map(|w| d.alphabet().format_word(w)).collect();
        assert_eq!(fmt, ["aB", "bBA"].map(|s| d.alphabet().format_word(&d.alphabet().parse_word(s).unwrap())));
    }

    #[test]
    fn assignment_block_examples() {
        let one = Alphabet::standard(1).unwrap();
        let t1 = MultiplicationTable::trivial();
        assert_eq!(block_size(1, &one, 1, AssignmentMode::Words), 1);
        let only = assignment_at_cursor(0, &t1, &one, 1, AssignmentMode::Words).unwrap();
        assert_eq!(only, Assignment { images: vec![Word::empty()], coverage: vec![0] });
        assert_eq!(assignment_at_cursor(1, &t1, &one, 1, AssignmentMode::Words), None);

        let z2 = MultiplicationTable::cyclic(2);
        assert_eq!(block_size(2, &one, 1, AssignmentMode::Words), 4);
        let all: Vec<Assignment> =
            (0..4).map(|n| assignment_at_cursor(n, &z2, &one, 1, AssignmentMode::Words).unwrap()).collect();
        let a = one.parse_word("a").unwrap();
        assert_eq!(all[0], Assignment { images: vec![Word::empty(), a.clone()], coverage: vec![0] });
        assert_eq!(all[1], Assignment { images: vec![Word::empty(), a.clone()], coverage: vec![1] });
        assert_eq!(all[2].images[1], a.invert());
        assert_eq!(assignment_at_cursor(4, &z2, &one, 1, AssignmentMode::Words), None);

        let z3 = MultiplicationTable::cyclic(3);
        let want = words(&pres(1, &[]), &["", "a", "aa"]);
        let size = block_size(3, &one, 2, AssignmentMode::Words);
        let pos = (0..size)
            .find(|&n| assignment_at_cursor(n, &z3, &one, 2, AssignmentMode::Words).unwrap().images == want)
            .expect("[ε, a, aa] lies in the L = 2 block");
        assert_eq!(pos, 6);
    }

    #[test]
    fn letter_assignments_are_surjective() {
        let ab = Alphabet::standard(2).unwrap();
        let k4 = klein();
        let size = block_size(4, &ab, 1, AssignmentMode::Letters);
        assert_eq!(size, 6);
        for n in 0..size {
            let a = assignment_at_cursor(n, &k4, &ab, 1, AssignmentMode::Letters).unwrap();
            assert!(a.images[0].is_empty());
            assert!(a.images[1..].iter().all(|w| w.len() == 1));
            for (g, &c) in a.coverage.iter().enumerate() {
                assert_eq!(a.images[c], ab.generator(g));
            }
        }
        assert_eq!(assignment_at_cursor(size, &k4, &ab, 1, AssignmentMode::Letters), None);
        assert_eq!(block_size(1, &ab, 1, AssignmentMode::Letters), 0);
    }

    fn check_certificate(p: &Presentation, c: &FinitenessCertificate) {
        let eqs = equation_words(&c.table, &c.assignment.images);
        for (w, proof) in eqs.iter().zip(&c.equation_proofs) {
            match proof {
                None => assert!(w.is_empty()),
                Some(cert) => assert_eq!(&assemble_dyck(&cert.product, p).unwrap(), w),
            }
        }
        let cov = coverage_words(&c.assignment.images, &c.assignment.coverage);
        for (w, proof) in cov.iter().zip(&c.coverage_proofs) {
            match proof {
                None => assert!(w.is_empty()),
                Some(cert) => assert_eq!(&assemble_dyck(&cert.product, p).unwrap(), w),
            }
        }
    }

    #[test]
    fn trivial_quotient_is_found_quickly() {
        let z = pres(1, &[]);
        let g1 = z.extend(&z.alphabet().parse_word("a").unwrap()).unwrap();
        let cert = prove_finite(&g1, 10_000, FinitenessConfig::default()).unwrap().unwrap();
        assert_eq!(cert.table.order(), 1);
        assert_eq!(cert.assignment.images, vec![Word::empty()]);
        let proof = cert.coverage_proofs[0].as_ref().unwrap();
        assert_eq!(proof.product.factors.len(), 1);
        check_certificate(&g1, &cert);
    }

    #[test]
    fn cyclic_quotients_of_z() {
        let z = pres(1, &[]);
        for n in 2..=5 {
            let x = z.alphabet().parse_word(&"a".repeat(n)).unwrap();
            let g1 = z.extend(&x).unwrap();
            let cert = prove_finite(&g1, 2_000_000, FinitenessConfig::default()).unwrap().unwrap();
            assert_eq!(cert.table.order(), n, "a^{n}");
            check_certificate(&g1, &cert);
        }
    }

    #[test]
    fn klein_quotient_of_infinite_dihedral() {
        let d = pres(2, &["aa", "bb"]);
        let g1 = d.extend(&d.alphabet().parse_word("abab").unwrap()).unwrap();
        let cert = prove_finite(&g1, 5_000_000, FinitenessConfig::default()).unwrap().unwrap();
        assert_eq!(cert.table.order(), 4);
        assert!((1..4).all(|i| cert.table.mul(i, i) == 0));
        check_certificate(&g1, &cert);
    }

    #[test]
    fn infinite_quotient_never_succeeds() {
        let f2 = pres(2, &[]);
        let g1 = f2.extend(&f2.alphabet().parse_word("a").unwrap()).unwrap();
        assert_eq!(prove_finite(&g1, 200_000, FinitenessConfig::default()).unwrap(), None);
    }

    #[test]
    fn letter_mode_misses_z_mod_three() {
        let z = pres(1, &[]);
        let g1 = z.extend(&z.alphabet().parse_word("aaa").unwrap()).unwrap();
        let strict = FinitenessConfig { mode: AssignmentMode::Letters, ..FinitenessConfig::default() };
        assert_eq!(prove_finite(&g1, 300_000, strict).unwrap(), None);
    }

    #[test]
    fn letter_mode_still_finds_letter_quotients() {
        let z = pres(1, &[]);
        let g1 = z.extend(&z.alphabet().parse_word("aa").unwrap()).unwrap();
        let strict = FinitenessConfig { mode: AssignmentMode::Letters, ..FinitenessConfig::default() };
        let cert = prove_finite(&g1, 1_000_000, strict).unwrap().unwrap();
        assert_eq!(cert.table.order(), 2);
        check_certificate(&g1, &cert);
    }

    #[test]
    fn shared_scan_proofs_match_independent_searches() {
        let d = pres(2, &["aa", "bb"]);
        let g1 = d.extend(&d.alphabet().parse_word("abab").unwrap()).unwrap();
        let cert = prove_finite(&g1, 5_000_000, FinitenessConfig::default()).unwrap().unwrap();
        for proof in cert.equation_proofs.iter().chain(&cert.coverage_proofs).flatten() {
            let alone = prove_equal(&g1, &proof.target, 10_000_000).unwrap().unwrap();
            assert_eq!(&alone, proof);
        }
    }

    #[test]
    fn rejects_unextended_presentations() {
        assert!(matches!(FinitenessTask::new(&pres(1, &[]), FinitenessConfig::default()), Err(QuotientError::NotExtended)));
    }

    #[test]
    fn budgets_double_between_visits() {
        let f2 = pres(2, &[]);
        let g1 = f2.extend(&f2.alphabet().parse_word("a").unwrap()).unwrap();
        let config = FinitenessConfig { record_visits: true, ..FinitenessConfig::default() };
        let mut task = FinitenessTask::new(&g1, config).unwrap();
        for _ in 0..300_000 {
            assert_eq!(task.step().unwrap(), Progress::Running);
        }
        let mut last: HashMap<(usize, usize, u128), (u32, u64)> = HashMap::new();
        let mut revisits = 0;
        for v in task.visits() {
            let key = (v.table_cursor, v.length, v.assignment_cursor);
            if let Some(&(epoch, budget)) = last.get(&key) {
                assert_eq!(v.epoch, epoch + 1);
                assert_eq!(v.budget, 2 * budget);
                revisits += 1;
            }
            last.insert(key, (v.epoch, v.budget));
        }
        assert!(revisits > 0);
    }

    #[test]
    fn dovetail_covers_small_bounds() {
        // Every candidate with table cursor ≤ 2 and L ≤ 2 gets visited at depth ≥ 1024.
        let f2 = pres(2, &[]);
        let g1 = f2.extend(&f2.alphabet().parse_word("a").unwrap()).unwrap();
        let config = FinitenessConfig { record_visits: true, ..FinitenessConfig::default() };
        let mut task = FinitenessTask::new(&g1, config).unwrap();
        while task.epoch() < 8 {
            task.step().unwrap();
        }
        let tables = TableCatalog::new(12);
        let alphabet = g1.alphabet();
        let mut expected = HashSet::new();
        for tc in 0..=2 {
            let t = tables.at_cursor(tc).unwrap();
            for length in 1..=2 {
                for n in 0..block_size(t.order(), alphabet, length, AssignmentMode::Words) {
                    let a = assignment_at_cursor(n, &t, alphabet, length, AssignmentMode::Words).unwrap();
                    if length == 1 || a.images.iter().any(|w| w.len() == length) {
                        expected.insert((tc, length, n));
                    }
                }
            }
        }
        let seen: HashSet<(usize, usize, u128)> = task
            .visits()
            .iter()
            .filter(|v| v.budget >= 1024)
            .map(|v| (v.table_cursor, v.length, v.assignment_cursor))
            .collect();
        assert!(expected.is_subset(&seen), "missing {}", expected.difference(&seen).count());
    }
}
