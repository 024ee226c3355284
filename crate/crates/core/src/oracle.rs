//! Direct word-problem solvers for a few groups, used to cross-check verdicts.

use thiserror::Error;

use crate::freegroup::{Alphabet, Letter, Word};
use crate::presentation::Presentation;
use crate::tables::{eval_in_table, is_group_table, EvalError, MultiplicationTable, TableViolation};

/// ℤ = ⟨a | ∅⟩: trivial iff the exponent sum vanishes.
pub fn is_identity_z(letters: &[Letter]) -> bool {
    letters.iter().map(|l| i64::from(l.sign())).sum::<i64>() == 0
}

/// ℤ/n = ⟨a | aⁿ⟩.
pub fn is_identity_zn(n: u64, letters: &[Letter]) -> bool {
    let sum: i64 = letters.iter().map(|l| i64::from(l.sign())).sum();
    sum.rem_euclid(n as i64) == 0
}

/// D∞ = ⟨a, b | a², b²⟩: every letter is its own inverse, so a word is
/// trivial iff deleting adjacent equal generators empties it.
pub fn is_identity_dinf(letters: &[Letter]) -> bool {
    dinf_normal_form(letters).is_empty()
}

/// The alternating normal form in D∞, as generator indices.
pub fn dinf_normal_form(letters: &[Letter]) -> Vec<usize> {
    let mut stack: Vec<usize> = Vec::new();
    for l in letters {
        let g = l.generator();
        if stack.last() == Some(&g) {
            stack.pop();
        } else {
            stack.push(g);
        }
    }
    stack
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("not a group table: {0}")]
    Table(#[from] TableViolation),
    #[error("generator images do not generate the table group")]
    NotGenerating,
    #[error("{0}")]
    Eval(#[from] EvalError),
}

/// A finite group together with images of the generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableGroup {
    table: MultiplicationTable,
    images: Vec<usize>,
}

impl TableGroup {
    /// Requires a valid table whose generator images generate it.
    pub fn new(table: MultiplicationTable, images: Vec<usize>) -> Result<Self, OracleError> {
        is_group_table(&table)?;
        let r = table.order();
        if let Some((generator, &image)) = images.iter().enumerate().find(|(_, &g)| g >= r) {
            return Err(OracleError::Eval(EvalError::BadImage { generator, image }));
        }
        let mut reached = vec![false; r];
        reached[0] = true;
        let mut frontier = vec![0];
        while let Some(e) = frontier.pop() {
            for &g in &images {
                let next = table.mul(e, g);
                if !reached[next] {
                    reached[next] = true;
                    frontier.push(next);
                }
            }
        }
        if reached.contains(&false) {
            return Err(OracleError::NotGenerating);
        }
        Ok(Self { table, images })
    }

    pub fn table(&self) -> &MultiplicationTable {
        &self.table
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn evaluate(&self, w: &Word) -> Result<usize, OracleError> {
        Ok(eval_in_table(&self.table, &self.images, w)?)
    }

    pub fn is_identity(&self, w: &Word) -> Result<bool, OracleError> {
        Ok(self.evaluate(w)? == 0)
    }
}

/// Groups with a known presentation and a direct solver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorpusGroup {
    Z,
    Zn(u64),
    Dinf,
    Table { name: String, presentation: Vec<String>, group: TableGroup },
}

impl CorpusGroup {
    pub fn name(&self) -> String {
        match self {
            CorpusGroup::Z => "Z".into(),
            CorpusGroup::Zn(n) => format!("Z/{n}"),
            CorpusGroup::Dinf => "D_inf".into(),
            CorpusGroup::Table { name, .. } => name.clone(),
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            CorpusGroup::Z | CorpusGroup::Zn(_) => 1,
            CorpusGroup::Dinf => 2,
            CorpusGroup::Table { group, .. } => group.images().len(),
        }
    }

    pub fn presentation(&self) -> Presentation {
        let alphabet = Alphabet::standard(self.rank()).expect("small rank");
        let relators: Vec<String> = match self {
            CorpusGroup::Z => vec![],
            CorpusGroup::Zn(n) => vec!["a".repeat(*n as usize)],
            CorpusGroup::Dinf => vec!["aa".into(), "bb".into()],
            CorpusGroup::Table { presentation, .. } => presentation.clone(),
        };
        let refs: Vec<&str> = relators.iter().map(String::as_str).collect();
        Presentation::from_words(alphabet, &refs).expect("corpus presentations parse")
    }

    /// Whether the group is infinite (and just infinite).
    pub fn is_infinite(&self) -> bool {
        matches!(self, CorpusGroup::Z | CorpusGroup::Dinf)
    }

    pub fn is_identity(&self, w: &Word) -> bool {
        match self {
            CorpusGroup::Z => is_identity_z(w.letters()),
            CorpusGroup::Zn(n) => is_identity_zn(*n, w.letters()),
            CorpusGroup::Dinf => is_identity_dinf(w.letters()),
            CorpusGroup::Table { group, .. } => group.is_identity(w).expect("word over the group's alphabet"),
        }
    }

    /// ℤ, D∞, ℤ/2 … ℤ/4 and S₃ = ⟨a, b | a², b², (ab)³⟩.
    pub fn builtin() -> Vec<CorpusGroup> {
        let s3 = MultiplicationTable::from_rows(&[
            vec![0, 1, 2, 3, 4, 5],
            vec![1, 0, 4, 5, 2, 3],
            vec![2, 5, 0, 4, 3, 1],
            vec![3, 4, 5, 0, 1, 2],
            vec![4, 3, 1, 2, 5, 0],
            vec![5, 2, 3, 1, 0, 4],
        ]);
        vec![
            CorpusGroup::Z,
            CorpusGroup::Dinf,
            CorpusGroup::Zn(2),
            CorpusGroup::Zn(3),
            CorpusGroup::Zn(4),
            CorpusGroup::Table {
                name: "S3".into(),
                presentation: vec!["aa".into(), "bb".into(), "ababab".into()],
                group: TableGroup::new(s3, vec![1, 2]).expect("S3 table"),
            },
        ]
    }
}

#[cfg(test)]
mod tests {
    use std::collections::{HashMap, HashSet};

    use super::*;
    use proptest::prelude::*;

    fn parse(k: usize, s: &str) -> Word {
        Alphabet::standard(k).unwrap().parse_word(s).unwrap()
    }

    fn raw(k: usize, s: &str) -> Vec<Letter> {
        let a = Alphabet::standard(k).unwrap();
        s.chars()
            .map(|c| Letter::new(a.index_of(c.to_ascii_lowercase()).unwrap(), c.is_ascii_uppercase()))
            .collect()
    }

    #[test]
    fn z_examples() {
        assert!(is_identity_z(&raw(1, "")));
        assert!(is_identity_z(&raw(1, "aA")));
        assert!(!is_identity_z(&raw(1, "aaA")));
        assert!(is_identity_zn(3, &raw(1, "aaa")));
        assert!(is_identity_zn(3, &raw(1, "AAAAAA")));
        assert!(!is_identity_zn(3, &raw(1, "AA")));
    }

    #[test]
    fn dinf_examples() {
        assert!(is_identity_dinf(&raw(2, "abba")));
        assert!(is_identity_dinf(&raw(2, "aBBa")));
        assert!(!is_identity_dinf(&raw(2, "abab")));
        assert!(!is_identity_dinf(&raw(2, "a")));
        assert_eq!(dinf_normal_form(&raw(2, "abAB")), vec![0, 1, 0, 1]);
    }

    /// Deleting adjacent equal generators in an arbitrary order.
    fn rewrite_anywhere(mut gens: Vec<usize>, mut choose: impl FnMut(usize) -> usize) -> Vec<usize> {
        loop {
            let spots: Vec<usize> = (0..gens.len().saturating_sub(1)).filter(|&i| gens[i] == gens[i + 1]).collect();
            if spots.is_empty() {
                return gens;
            }
            let i = spots[choose(spots.len())];
            gens.drain(i..i + 2);
        }
    }

    /// Every irreducible word reachable from `gens` by any sequence of deletions.
    fn all_normal_forms(gens: &[usize], memo: &mut HashMap<Vec<usize>, HashSet<Vec<usize>>>) -> HashSet<Vec<usize>> {
        if let Some(found) = memo.get(gens) {
            return found.clone();
        }
        let mut out = HashSet::new();
        for i in 0..gens.len().saturating_sub(1) {
            if gens[i] == gens[i + 1] {
                let mut next = gens.to_vec();
                next.drain(i..i + 2);
                out.extend(all_normal_forms(&next, memo));
            }
        }
        if out.is_empty() {
            out.insert(gens.to_vec());
        }
        memo.insert(gens.to_vec(), out.clone());
        out
    }

    #[test]
    fn dinf_rewriting_is_confluent() {
        // After a⁻¹ → a and b⁻¹ → b only deletions remain; each shortens the
        // word, so rewriting terminates. Every order of deletions on every word
        // of length ≤ 12 reaches the stack normal form.
        let mut memo = HashMap::new();
        for length in 0..=12u32 {
            for code in 0..(1u32 << length) {
                let gens: Vec<usize> = (0..length).map(|i| ((code >> i) & 1) as usize).collect();
                let letters: Vec<Letter> = gens.iter().map(|&g| Letter::new(g, false)).collect();
                let forms = all_normal_forms(&gens, &mut memo);
                assert_eq!(forms.len(), 1, "{gens:?}");
                assert!(forms.contains(&dinf_normal_form(&letters)));
                let inverted: Vec<Letter> = letters.iter().map(|l| l.inverse()).collect();
                assert_eq!(dinf_normal_form(&inverted), dinf_normal_form(&letters));
            }
        }
    }

    #[test]
    fn table_oracle_examples() {
        let z3 = TableGroup::new(MultiplicationTable::cyclic(3), vec![1]).unwrap();
        assert!(z3.is_identity(&parse(1, "aaa")).unwrap());
        assert!(!z3.is_identity(&parse(1, "a")).unwrap());
        let klein = MultiplicationTable::from_rows(&[vec![0, 1, 2, 3], vec![1, 0, 3, 2], vec![2, 3, 0, 1], vec![3, 2, 1, 0]]);
        let k4 = TableGroup::new(klein, vec![1, 2]).unwrap();
        assert!(k4.is_identity(&parse(2, "abab")).unwrap());
        let partial = TableGroup::new(MultiplicationTable::cyclic(3), vec![1]).unwrap();
        assert!(partial.is_identity(&parse(2, "ab")).is_err());
    }

    #[test]
    fn table_oracle_agrees_with_residues() {
        let z3 = TableGroup::new(MultiplicationTable::cyclic(3), vec![1]).unwrap();
        let alphabet = Alphabet::standard(1).unwrap();
        for n in 0..alphabet.words_up_to(8) {
            let w = alphabet.word_at_index(n);
            assert_eq!(z3.is_identity(&w).unwrap(), is_identity_zn(3, w.letters()));
        }
    }

    proptest! {
        #[test]
        fn dinf_rewriting_order_is_irrelevant(
            codes in proptest::collection::vec(0u8..4, 0..=12),
            picks in proptest::collection::vec(any::<usize>(), 12),
        ) {
            let letters: Vec<Letter> = codes.iter().map(|&c| Letter::new(usize::from(c / 2), c % 2 == 1)).collect();
            let gens: Vec<usize> = letters.iter().map(|l| l.generator()).collect();
            let mut it = picks.into_iter();
            let nf = rewrite_anywhere(gens, |n| it.next().unwrap_or(0) % n);
            prop_assert_eq!(nf, dinf_normal_form(&letters));
        }
    }

    #[test]
    fn table_groups_require_generation() {
        let z4 = MultiplicationTable::cyclic(4);
        assert!(TableGroup::new(z4.clone(), vec![1]).is_ok());
        assert_eq!(TableGroup::new(z4.clone(), vec![2]), Err(OracleError::NotGenerating));
        let g = TableGroup::new(z4, vec![3]).unwrap();
        assert!(g.is_identity(&parse(1, "aaaa")).unwrap());
        assert!(!g.is_identity(&parse(1, "aa")).unwrap());
    }

    #[test]
    fn builtin_groups_satisfy_their_relators() {
        for g in CorpusGroup::builtin() {
            let p = g.presentation();
            for r in p.inline_relators() {
                assert!(g.is_identity(r), "{} relator", g.name());
            }
        }
        let s3 = &CorpusGroup::builtin()[5];
        assert!(!s3.is_identity(&parse(2, "ab")));
        assert!(!s3.is_identity(&parse(2, "abab")));
        assert!(s3.is_identity(&parse(2, "ababab")));
    }
}
