//! Runs the two semi-deciders in alternation until one of them produces a
//! certificate or the step budget runs out.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;

use thiserror::Error;

use crate::derivation::{EqualityCertificate, EqualityTask, Progress};
use crate::freegroup::Word;
use crate::presentation::{Presentation, PresentationError};
use crate::quotient::{FinitenessCertificate, FinitenessConfig, FinitenessTask, QuotientError};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("the word problem is posed over a base presentation, not an extended one")]
    AlreadyExtended,
    #[error("quantum must be at least 1")]
    ZeroQuantum,
    #[error(transparent)]
    Presentation(#[from] PresentationError),
    #[error(transparent)]
    Quotient(#[from] QuotientError),
}

/// Total step allowance shared by both arms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    Steps(u64),
    Unlimited,
}

impl Budget {
    fn allows(self, used: u64) -> bool {
        match self {
            Budget::Steps(n) => used < n,
            Budget::Unlimited => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverConfig {
    /// Steps granted to an arm before control passes to the other.
    pub quantum: u64,
    pub finiteness: FinitenessConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { quantum: 1, finiteness: FinitenessConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Equal(EqualityCertificate),
    NotEqual(FinitenessCertificate),
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub verdict: Verdict,
    /// Steps spent deriving X = 1 in the base presentation.
    pub equality_steps: u64,
    /// Steps spent searching for a finite quotient of the extension.
    pub finiteness_steps: u64,
}

impl Outcome {
    pub fn total_steps(&self) -> u64 {
        self.equality_steps + self.finiteness_steps
    }
}

/// Decides X = 1 in `p` by alternating quanta, equality search first.
/// Deterministic: equal inputs give equal outcomes.
pub fn solve(p: &Presentation, x: &Word, budget: Budget, config: SolverConfig) -> Result<Outcome, SolveError> {
    if p.is_extended() {
        return Err(SolveError::AlreadyExtended);
    }
    if config.quantum == 0 {
        return Err(SolveError::ZeroQuantum);
    }
    if x.is_empty() {
        return Ok(Outcome {
            verdict: Verdict::Equal(EqualityCertificate::trivial()),
            equality_steps: 0,
            finiteness_steps: 0,
        });
    }
    let mut equality = EqualityTask::new(p, x.clone());
    let mut finiteness = FinitenessTask::new(&p.extend(x)?, config.finiteness)?;
    let outcome = |verdict, eq: &EqualityTask, fin: &FinitenessTask| Outcome {
        verdict,
        equality_steps: eq.steps(),
        finiteness_steps: fin.steps(),
    };
    loop {
        for _ in 0..config.quantum {
            if !budget.allows(equality.steps() + finiteness.steps()) {
                return Ok(outcome(Verdict::Exhausted, &equality, &finiteness));
            }
            if let Progress::Found(c) = equality.step()? {
                return Ok(outcome(Verdict::Equal(c), &equality, &finiteness));
            }
        }
        for _ in 0..config.quantum {
            if !budget.allows(equality.steps() + finiteness.steps()) {
                return Ok(outcome(Verdict::Exhausted, &equality, &finiteness));
            }
            if let Progress::Found(c) = finiteness.step()? {
                return Ok(outcome(Verdict::NotEqual(c), &equality, &finiteness));
            }
        }
    }
}

/// Runs both arms on separate threads with a shared step budget. The winner
/// and the step counts depend on thread timing, so repeated runs may differ.
pub fn solve_racing(p: &Presentation, x: &Word, budget: Budget, config: SolverConfig) -> Result<Outcome, SolveError> {
    if p.is_extended() {
        return Err(SolveError::AlreadyExtended);
    }
    if x.is_empty() {
        return solve(p, x, budget, config);
    }
    let stop = Arc::new(AtomicBool::new(false));
    let used = Arc::new(AtomicU64::new(0));
    let mut equality = EqualityTask::new(p, x.clone());
    let mut finiteness = FinitenessTask::new(&p.extend(x)?, config.finiteness)?;

    let (eq_result, fin_result) = std::thread::scope(|s| {
        let eq = s.spawn(|| -> Result<Option<Verdict>, SolveError> {
            while !stop.load(Ordering::Relaxed) && budget.allows(used.fetch_add(1, Ordering::Relaxed)) {
                if let Progress::Found(c) = equality.step()? {
                    stop.store(true, Ordering::Relaxed);
                    return Ok(Some(Verdict::Equal(c)));
                }
            }
            Ok(None)
        });
        let fin = s.spawn(|| -> Result<Option<Verdict>, SolveError> {
            while !stop.load(Ordering::Relaxed) && budget.allows(used.fetch_add(1, Ordering::Relaxed)) {
                if let Progress::Found(c) = finiteness.step()? {
                    stop.store(true, Ordering::Relaxed);
                    return Ok(Some(Verdict::NotEqual(c)));
                }
            }
            Ok(None)
        });
        let eq_result = eq.join().expect("equality arm panicked");
        if eq_result.is_err() {
            stop.store(true, Ordering::Relaxed);
        }
        (eq_result, fin.join().expect("finiteness arm panicked"))
    });
    let verdict = match (eq_result?, fin_result?) {
        (Some(v), _) | (None, Some(v)) => v,
        (None, None) => Verdict::Exhausted,
    };
    Ok(Outcome { verdict, equality_steps: equality.steps(), finiteness_steps: finiteness.steps() })
}
