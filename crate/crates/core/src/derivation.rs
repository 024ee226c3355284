//! Certifying W = 1 by enumerating products of conjugated relators.
//!
//! A Dyck product is ∏ t_j R_{i_j}^{ε_j} t_j⁻¹ with ε_j = ±1. Products are
//! enumerated in stages: stage n holds every product with at most n factors,
//! relator indices at most n and conjugators of length at most n that did not
//! already occur in stage n − 1. Within a stage, products are ordered by factor
//! count and then lexicographically by factor, where factors compare by
//! (relator index, sign, conjugator enumeration index). Stage 0 is the empty
//! product alone.
//!
//! A candidate matches when its free reduction is letter-for-letter the target.

use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::freegroup::{push_reduced, Letter, Sign, Word};
use crate::presentation::{Presentation, PresentationError};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyckFactor {
    pub conjugator: Word,
    pub relator_index: usize,
    pub sign: Sign,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyckProduct {
    pub factors: Vec<DyckFactor>,
    pub stage: usize,
}

impl DyckProduct {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn max_relator_index(&self) -> usize {
        self.factors.iter().map(|f| f.relator_index).max().unwrap_or(0)
    }

    /// Whether factor count, relator indices and conjugator lengths all fit the stage.
    pub fn respects_stage(&self) -> bool {
        let s = self.stage;
        self.factors.len() <= s && self.factors.iter().all(|f| f.relator_index <= s && f.conjugator.len() <= s)
    }
}

/// Witness that `target` equals 1: the product reduces to it graphically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EqualityCertificate {
    pub product: DyckProduct,
    pub target: Word,
    pub max_relator_index: usize,
}

impl EqualityCertificate {
    pub fn new(product: DyckProduct, target: Word) -> Self {
        let max_relator_index = product.max_relator_index();
        Self { product, target, max_relator_index }
    }

    /// Certificate for the empty word: the empty product.
    pub fn trivial() -> Self {
        Self::new(DyckProduct::empty(), Word::empty())
    }

    /// Number of leading relators the certificate depends on.
    pub fn relators_used(&self) -> usize {
        if self.product.factors.is_empty() {
            0
        } else {
            self.max_relator_index + 1
        }
    }
}

/// Free reduction of the product; the empty product gives the empty word.
pub fn assemble_dyck(d: &DyckProduct, p: &Presentation) -> Result<Word, PresentationError> {
    let mut out = Vec::new();
    for f in &d.factors {
        let r = p.relator(f.relator_index)?;
        let piece = r.signed(f.sign).conjugate_by(&f.conjugator);
        for &l in piece.letters() {
            push_reduced(&mut out, l);
        }
    }
    Ok(Word::reduce(out))
}

#[derive(Debug, Clone)]
pub struct StageFactor {
    pub relator_index: usize,
    pub sign: Sign,
    pub conjugator: Word,
    /// t·R^ε·t⁻¹, reduced.
    pub value: Word,
    /// Not available at the previous stage.
    pub is_new: bool,
}

impl StageFactor {
    pub fn to_factor(&self) -> DyckFactor {
        DyckFactor { conjugator: self.conjugator.clone(), relator_index: self.relator_index, sign: self.sign }
    }
}

/// The ordered factor set of one stage.
#[derive(Debug)]
pub struct StageFactors {
    pub stage: usize,
    pub factors: Vec<StageFactor>,
    pub old_count: usize,
}

/// Lazily built factor sets for every stage of one presentation, shared
/// between all tasks that derive in it.
#[derive(Debug)]
pub struct FactorCatalog {
    presentation: Presentation,
    stages: Mutex<Vec<Arc<StageFactors>>>,
}

impl FactorCatalog {
    pub fn new(presentation: Presentation) -> Arc<Self> {
        Arc::new(Self { presentation, stages: Mutex::new(Vec::new()) })
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    /// The factor set of stage `n`. Pulls relators 0..=n on first request.
    pub fn stage(&self, n: usize) -> Result<Arc<StageFactors>, PresentationError> {
        let mut stages = self.stages.lock().unwrap_or_else(|e| e.into_inner());
        while stages.len() <= n {
            let s = stages.len();
            let built = self.build(s)?;
            stages.push(Arc::new(built));
        }
        Ok(stages[n].clone())
    }

    fn build(&self, n: usize) -> Result<StageFactors, PresentationError> {
        let p = &self.presentation;
        let mut relators = Vec::new();
        if n > 0 {
            for i in 0..=n {
                match p.fetch(i)? {
                    Some(r) => relators.push(r),
                    None => break,
                }
            }
        }
        let alphabet = p.alphabet();
        let conj_count = alphabet.words_up_to(n) as usize;
        let conjugators: Vec<Word> = alphabet.words().take(conj_count).collect();
        let mut factors = Vec::new();
        let mut old_count = 0;
        for (i, r) in relators.iter().enumerate() {
            if r.is_empty() {
                continue;
            }
            for sign in [Sign::Plus, Sign::Minus] {
                let base = r.signed(sign);
                for t in &conjugators {
                    let is_new = i == n || t.len() == n;
                    old_count += usize::from(!is_new);
                    factors.push(StageFactor {
                        relator_index: i,
                        sign,
                        conjugator: t.clone(),
                        value: base.conjugate_by(t),
                        is_new,
                    });
                }
            }
        }
        Ok(StageFactors { stage: n, factors, old_count })
    }

    /// Number of products enumerated in stage `n` alone.
    pub fn stage_size(&self, n: usize) -> Result<u128, PresentationError> {
        if n == 0 {
            return Ok(1);
        }
        let st = self.stage(n)?;
        let f = st.factors.len() as u128;
        let old = st.old_count as u128;
        let mut total: u128 = 0;
        for m in 1..=n {
            total = total.saturating_add(count_sequences(f, old, m, m < n));
        }
        Ok(total)
    }

    /// Cursor position one past the last product of stage `n`.
    pub fn stage_end(&self, n: usize) -> Result<u128, PresentationError> {
        let mut end: u128 = 0;
        for s in 0..=n {
            end = end.saturating_add(self.stage_size(s)?);
        }
        Ok(end)
    }

    /// True when stage `n` already sees every relator the source will ever have.
    fn covers_all_relators(&self, n: usize) -> bool {
        self.presentation.known_length().is_some_and(|len| n + 1 >= len)
    }

    /// The product at enumeration position `cursor`; `None` when the
    /// presentation has no nonempty relator and the cursor is past the empty
    /// product.
    pub fn product_at(&self, cursor: u128) -> Result<Option<DyckProduct>, PresentationError> {
        if cursor == 0 {
            return Ok(Some(DyckProduct::empty()));
        }
        let mut rest = cursor - 1;
        let mut n = 1;
        loop {
            let size = self.stage_size(n)?;
            if rest < size {
                break;
            }
            if size == 0 && self.covers_all_relators(n) {
                return Ok(None);
            }
            rest -= size;
            n += 1;
        }
        let st = self.stage(n)?;
        let f = st.factors.len() as u128;
        let old = st.old_count as u128;
        for m in 1..=n {
            let block = count_sequences(f, old, m, m < n);
            if rest >= block {
                rest -= block;
                continue;
            }
            let need_new = m < n;
            let mut digits = Vec::with_capacity(m);
            let mut has_new = false;
            for pos in 0..m {
                let remaining = m - pos - 1;
                for (d, factor) in st.factors.iter().enumerate() {
                    let now_new = has_new || factor.is_new;
                    let completions = count_sequences(f, old, remaining, need_new && !now_new);
                    if rest < completions {
                        digits.push(d);
                        has_new = now_new;
                        break;
                    }
                    rest -= completions;
                }
            }
            let factors = digits.iter().map(|&d| st.factors[d].to_factor()).collect();
            return Ok(Some(DyckProduct { factors, stage: n }));
        }
        unreachable!("rest was bounded by the stage size")
    }
}

/// Sequences of length m over f factors; with `need_new`, only those using at
/// least one factor outside the `old` subset.
fn count_sequences(f: u128, old: u128, m: usize, need_new: bool) -> u128 {
    let all = pow_sat(f, m);
    if need_new {
        all - pow_sat(old, m).min(all)
    } else {
        all
    }
}

fn pow_sat(base: u128, exp: usize) -> u128 {
    (0..exp).fold(1u128, |acc, _| acc.saturating_mul(base))
}

/// The product at position `cursor` of the enumeration for `p`.
pub fn dyck_at_cursor(cursor: u128, p: &Presentation) -> Result<Option<DyckProduct>, PresentationError> {
    FactorCatalog::new(p.clone()).product_at(cursor)
}

/// Incremental walk through the enumeration; yields the same sequence as
/// [`FactorCatalog::product_at`] without re-decoding.
#[derive(Debug)]
pub struct DyckCursor {
    catalog: Arc<FactorCatalog>,
    position: u128,
    stage: usize,
    count: usize,
    digits: Vec<usize>,
    factors: Option<Arc<StageFactors>>,
    prefixes: Vec<Vec<Letter>>,
    finished: bool,
}

impl DyckCursor {
    pub fn new(catalog: Arc<FactorCatalog>) -> Self {
        Self {
            catalog,
            position: 0,
            stage: 0,
            count: 0,
            digits: Vec::new(),
            factors: None,
            prefixes: vec![Vec::new()],
            finished: false,
        }
    }

    /// Position of the next product to be produced.
    pub fn position(&self) -> u128 {
        self.position
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    /// True once no further product can ever be produced.
    pub fn is_finished(&self) -> bool {
        self.finished
    }

    /// Moves to the next product and returns its reduced value, or `None` if
    /// the advance crossed an empty stage without producing one.
    pub fn advance(&mut self) -> Result<Option<&[Letter]>, PresentationError> {
        if self.finished {
            return Ok(None);
        }
        if self.position == 0 {
            self.position = 1;
            self.stage = 0;
            return Ok(Some(&self.prefixes[0]));
        }
        let changed = match self.bump() {
            Some(p) => p,
            None => {
                if !self.enter_stage(self.stage + 1)? {
                    return Ok(None);
                }
                0
            }
        };
        let st = self.factors.as_ref().expect("stage factors loaded");
        for pos in changed..self.count {
            let mut next = self.prefixes[pos].clone();
            for &l in st.factors[self.digits[pos]].value.letters() {
                push_reduced(&mut next, l);
            }
            self.prefixes[pos + 1] = next;
        }
        self.position += 1;
        Ok(Some(&self.prefixes[self.count]))
    }

    /// The product the cursor currently sits on (the last one produced).
    pub fn current(&self) -> DyckProduct {
        match &self.factors {
            None => DyckProduct::empty(),
            Some(st) => DyckProduct {
                factors: self.digits.iter().map(|&d| st.factors[d].to_factor()).collect(),
                stage: self.stage,
            },
        }
    }

    /// Loads stage `n` and positions on its first product. Returns false when
    /// the stage is empty.
    fn enter_stage(&mut self, n: usize) -> Result<bool, PresentationError> {
        let st = self.catalog.stage(n)?;
        self.stage = n;
        let empty = st.factors.is_empty();
        self.factors = Some(st);
        if empty {
            self.count = 0;
            self.digits.clear();
            if self.catalog.covers_all_relators(n) {
                self.finished = true;
            }
            return Ok(false);
        }
        self.start_count(1);
        if !self.is_new_sequence() {
            self.bump_within().expect("a nonempty stage has new sequences of full length");
        }
        Ok(true)
    }

    fn start_count(&mut self, m: usize) {
        self.count = m;
        self.digits.clear();
        self.digits.resize(m, 0);
        self.prefixes.resize(m + 1, Vec::new());
    }

    fn is_new_sequence(&self) -> bool {
        if self.count == self.stage {
            return true;
        }
        let st = self.factors.as_ref().expect("loaded");
        self.digits.iter().any(|&d| st.factors[d].is_new)
    }

    /// Next product within the current stage; returns the lowest changed position.
    fn bump(&mut self) -> Option<usize> {
        match &self.factors {
            Some(st) if !st.factors.is_empty() => self.bump_within(),
            _ => None,
        }
    }

    fn bump_within(&mut self) -> Option<usize> {
        let f = self.factors.as_ref().expect("loaded").factors.len();
        let mut lowest = self.count;
        loop {
            // Lexicographic odometer over count-length sequences.
            let mut pos = self.count;
            let mut carried = true;
            while carried && pos > 0 {
                pos -= 1;
                self.digits[pos] += 1;
                if self.digits[pos] < f {
                    carried = false;
                } else {
                    self.digits[pos] = 0;
                }
            }
            lowest = lowest.min(pos);
            if carried {
                if self.count >= self.stage {
                    return None;
                }
                let m = self.count + 1;
                self.start_count(m);
                lowest = 0;
            }
            if self.is_new_sequence() {
                return Some(lowest);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Progress<T> {
    Running,
    Found(T),
}

/// A resumable search for a Dyck product equal to `target`.
#[derive(Debug)]
pub struct EqualityTask {
    target: Word,
    cursor: DyckCursor,
    steps: u64,
    found: Option<EqualityCertificate>,
}

impl EqualityTask {
    pub fn new(presentation: &Presentation, target: Word) -> Self {
        Self::with_catalog(FactorCatalog::new(presentation.clone()), target)
    }

    pub fn with_catalog(catalog: Arc<FactorCatalog>, target: Word) -> Self {
        Self { target, cursor: DyckCursor::new(catalog), steps: 0, found: None }
    }

    pub fn target(&self) -> &Word {
        &self.target
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn cursor(&self) -> u128 {
        self.cursor.position()
    }

    pub fn stage(&self) -> usize {
        self.cursor.stage()
    }

    pub fn certificate(&self) -> Option<&EqualityCertificate> {
        self.found.as_ref()
    }

    /// Examines one more candidate product.
    pub fn step(&mut self) -> Result<Progress<EqualityCertificate>, PresentationError> {
        if let Some(c) = &self.found {
            return Ok(Progress::Found(c.clone()));
        }
        self.steps += 1;
        let matched = match self.cursor.advance()? {
            Some(value) => value == self.target.letters(),
            None => false,
        };
        if matched {
            let cert = EqualityCertificate::new(self.cursor.current(), self.target.clone());
            self.found = Some(cert.clone());
            return Ok(Progress::Found(cert));
        }
        Ok(Progress::Running)
    }
}

/// Runs the search for at most `budget` steps.
pub fn prove_equal(p: &Presentation, x: &Word, budget: u64) -> Result<Option<EqualityCertificate>, PresentationError> {
    let mut task = EqualityTask::new(p, x.clone());
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
    use crate::freegroup::Alphabet;
    use std::collections::HashSet;

    fn pres(gens: usize, rels: &[&str]) -> Presentation {
        Presentation::from_words(Alphabet::standard(gens).unwrap(), rels).unwrap()
    }

    fn word(p: &Presentation, s: &str) -> Word {
        p.alphabet().parse_word(s).unwrap()
    }

    fn factor(p: &Presentation, t: &str, i: usize, sign: Sign) -> DyckFactor {
        DyckFactor { conjugator: word(p, t), relator_index: i, sign }
    }

    #[test]
    fn assemble_examples() {
        let d = pres(2, &["aa", "bb"]);
        let one = DyckProduct { factors: vec![factor(&d, "", 0, Sign::Plus)], stage: 1 };
        assert_eq!(assemble_dyck(&one, &d).unwrap(), word(&d, "aa"));
        let conj = DyckProduct { factors: vec![factor(&d, "b", 0, Sign::Plus)], stage: 1 };
        assert_eq!(assemble_dyck(&conj, &d).unwrap(), word(&d, "baaB"));
        let cancel = DyckProduct {
            factors: vec![factor(&d, "", 0, Sign::Plus), factor(&d, "", 0, Sign::Minus)],
            stage: 2,
        };
        assert!(assemble_dyck(&cancel, &d).unwrap().is_empty());
        assert!(assemble_dyck(&DyckProduct::empty(), &d).unwrap().is_empty());
        let past = DyckProduct { factors: vec![factor(&d, "", 4, Sign::Plus)], stage: 4 };
        assert!(assemble_dyck(&past, &d).unwrap_err().is_exhausted());
    }

    #[test]
    fn first_products_for_order_three() {
        let z3 = pres(1, &["aaa"]);
        assert_eq!(dyck_at_cursor(0, &z3).unwrap().unwrap(), DyckProduct::empty());
        let first = dyck_at_cursor(1, &z3).unwrap().unwrap();
        assert_eq!(first.factors, vec![factor(&z3, "", 0, Sign::Plus)]);
        assert_eq!(first.stage, 1);
        assert_eq!(assemble_dyck(&first, &z3).unwrap(), word(&z3, "aaa"));
    }

    /// Every product within each stage bound, materialized by brute force.
    fn brute_force_products(p: &Presentation, n: usize) -> HashSet<(Vec<(usize, Sign, Word)>,)> {
        let alphabet = p.alphabet();
        let mut rels = Vec::new();
        for i in 0..=n {
            match p.fetch(i).unwrap() {
                Some(r) if !r.is_empty() => rels.push(i),
                Some(_) => {}
                None => break,
            }
        }
        let conjs: Vec<Word> = alphabet.words().take_while(|w| w.len() <= n).collect();
        let mut single = Vec::new();
        for &i in &rels {
            for s in [Sign::Plus, Sign::Minus] {
                for t in &conjs {
                    single.push((i, s, t.clone()));
                }
            }
        }
        let mut out = HashSet::new();
        out.insert((vec![],));
        let mut layer: Vec<Vec<(usize, Sign, Word)>> = vec![vec![]];
        for _ in 0..n {
            let mut next = Vec::new();
            for seq in &layer {
                for f in &single {
                    let mut s = seq.clone();
                    s.push(f.clone());
                    out.insert((s.clone(),));
                    next.push(s);
                }
            }
            layer = next;
        }
        out
    }

    fn key(d: &DyckProduct) -> (Vec<(usize, Sign, Word)>,) {
        (d.factors.iter().map(|f| (f.relator_index, f.sign, f.conjugator.clone())).collect(),)
    }

    #[test]
    fn stages_zero_to_two_are_exhaustive_and_injective() {
        for p in [pres(1, &["aaa"]), pres(2, &["aa", "bb"]), pres(2, &["abab", "aa", "bb"])] {
            let catalog = FactorCatalog::new(p.clone());
            let end = catalog.stage_end(2).unwrap();
            let expected = brute_force_products(&p, 2);
            assert_eq!(end as usize, expected.len());
            let mut seen = HashSet::new();
            for c in 0..end {
                let d = catalog.product_at(c).unwrap().unwrap();
                assert!(d.respects_stage());
                assert!(expected.contains(&key(&d)));
                assert!(seen.insert(key(&d)), "duplicate at cursor {c}");
            }
            assert_eq!(seen.len(), expected.len());
        }
    }

    #[test]
    fn stage_order_is_count_then_lexicographic() {
        let p = pres(1, &["aaa"]);
        let catalog = FactorCatalog::new(p.clone());
        let start = catalog.stage_end(1).unwrap();
        let end = catalog.stage_end(2).unwrap();
        let st = catalog.stage(2).unwrap();
        let rank = |f: &DyckFactor| {
            st.factors
                .iter()
                .position(|g| g.relator_index == f.relator_index && g.sign == f.sign && g.conjugator == f.conjugator)
                .unwrap()
        };
        let mut prev: Option<(usize, Vec<usize>)> = None;
        for c in start..end {
            let d = catalog.product_at(c).unwrap().unwrap();
            let k = (d.factors.len(), d.factors.iter().map(rank).collect::<Vec<_>>());
            if let Some(pk) = &prev {
                assert!(pk < &k);
            }
            prev = Some(k);
        }
    }

    #[test]
    fn cursor_walk_matches_decoding() {
        for p in [pres(1, &["aaa"]), pres(2, &["aa", "bb"]), pres(2, &["aa", "", "bb"])] {
            let catalog = FactorCatalog::new(p.clone());
            let mut cursor = DyckCursor::new(catalog.clone());
            let limit = catalog.stage_end(2).unwrap() + 3000;
            let mut c = 0u128;
            while c < limit {
                let value = cursor.advance().unwrap().map(|v| v.to_vec());
                let Some(value) = value else { continue };
                let decoded = catalog.product_at(c).unwrap().unwrap();
                assert_eq!(cursor.current(), decoded, "cursor {c}");
                assert_eq!(value, assemble_dyck(&decoded, &p).unwrap().letters());
                c += 1;
            }
        }
    }

    #[test]
    fn stage_blocks_bound_every_triple() {
        // Any product with ≤ m factors, indices ≤ i and conjugators ≤ L lies before
        // the end of stage max(m, i, L).
        let p = pres(2, &["aa", "bb"]);
        let catalog = FactorCatalog::new(p.clone());
        let end = catalog.stage_end(2).unwrap();
        for c in 0..end {
            let d = catalog.product_at(c).unwrap().unwrap();
            let m = d.factors.len();
            let i = d.factors.iter().map(|f| f.relator_index).max().unwrap_or(0);
            let l = d.factors.iter().map(|f| f.conjugator.len()).max().unwrap_or(0);
            assert!(c < catalog.stage_end(m.max(i).max(l)).unwrap());
        }
    }

    #[test]
    fn step_equality_examples() {
        let d = pres(2, &["aa", "bb"]);
        let mut task = EqualityTask::new(&d, word(&d, "aa"));
        let stage1_end = FactorCatalog::new(d.clone()).stage_end(1).unwrap() as u64;
        let mut found = None;
        for _ in 0..stage1_end {
            if let Progress::Found(c) = task.step().unwrap() {
                found = Some(c);
                break;
            }
        }
        let cert = found.expect("aa is found within stage 1");
        assert_eq!(cert.product.stage, 1);
        assert_eq!(cert.max_relator_index, 0);

        let mut trivial = EqualityTask::new(&d, Word::empty());
        assert_eq!(trivial.step().unwrap(), Progress::Found(EqualityCertificate::trivial()));
        assert_eq!(trivial.cursor(), 1);

        let z = pres(1, &[]);
        let mut never = EqualityTask::new(&z, word(&z, "a"));
        for _ in 0..1000 {
            assert_eq!(never.step().unwrap(), Progress::Running);
        }
        assert_eq!(never.steps(), 1000);
    }

    #[test]
    fn prove_equal_examples() {
        let z3 = pres(1, &["aaa"]);
        let cert = prove_equal(&z3, &word(&z3, "aaaaaa"), 10_000).unwrap().unwrap();
        assert_eq!(cert.product.factors.len(), 2);
        assert_eq!(assemble_dyck(&cert.product, &z3).unwrap(), word(&z3, "aaaaaa"));

        let d = pres(2, &["aa", "bb"]);
        let g1 = d.extend(&word(&d, "abab")).unwrap();
        let cert = prove_equal(&g1, &word(&d, "abab"), 10_000).unwrap().unwrap();
        assert_eq!(cert.product.factors.len(), 1);
        assert_eq!(cert.max_relator_index, 0);

        let z = pres(1, &[]);
        assert_eq!(prove_equal(&z, &word(&z, "a"), 100_000).unwrap(), None);
    }

    #[test]
    fn assembled_words_are_trivial_in_z_mod_three() {
        let z3 = pres(1, &["aaa"]);
        let catalog = FactorCatalog::new(z3.clone());
        for c in 0..catalog.stage_end(3).unwrap() {
            let d = catalog.product_at(c).unwrap().unwrap();
            let w = assemble_dyck(&d, &z3).unwrap();
            assert_eq!(w.exponent_sum(0).rem_euclid(3), 0);
        }
    }
}
