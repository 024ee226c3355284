//! Multiplication tables of finite groups, one per isomorphism class.
//!
//! Element 0 is always the identity. Tables are generated by backtracking
//! over cells in shell order — for m = 1, 2, … the cells
//! (m,1), (1,m), (m,2), (2,m), …, (m,m) — with Latin and partial associativity
//! pruning and a growth restriction: each cell value is at most one more than
//! the largest label seen so far (row/column indices included). Backtracking
//! visits tables in lexicographic order of their shell-order cell sequence, and
//! the lexicographically least relabeling of any group table obeys the growth
//! restriction, so the first table found in each isomorphism class is that
//! class's canonical form. Later members of a class are rejected.

use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::freegroup::Word;

/// Largest order the generator accepts.
pub const MAX_ORDER: usize = 32;
pub const DEFAULT_ORDER_CAP: usize = 12;

/// An r×r table with `cells[i·r + j] = k` meaning u_i·u_j = u_k.
///
/// Construction does not validate; use [`is_group_table`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiplicationTable {
    order: usize,
    cells: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableViolation {
    #[error("table must have order ≥ 1 and exactly order² cells")]
    Shape,
    #[error("cell ({row},{col}) holds {value}, outside 0..order")]
    OutOfRange { row: usize, col: usize, value: usize },
    #[error("cell ({row},{col}) breaks the identity row/column")]
    Identity { row: usize, col: usize },
    #[error("row {row} repeats a value at column {col}")]
    RowRepeat { row: usize, col: usize },
    #[error("column {col} repeats a value at row {row}")]
    ColumnRepeat { row: usize, col: usize },
    #[error("(u{i}·u{j})·u{k} ≠ u{i}·(u{j}·u{k})")]
    Associativity { i: usize, j: usize, k: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no image for generator {0}")]
    MissingImage(usize),
    #[error("image {image} of generator {generator} is not an element of the table")]
    BadImage { generator: usize, image: usize },
    #[error("element {0} has no inverse")]
    NoInverse(usize),
}

impl MultiplicationTable {
    pub fn from_cells(order: usize, cells: Vec<usize>) -> Self {
        Self { order, cells }
    }

    pub fn from_rows(rows: &[Vec<usize>]) -> Self {
        Self { order: rows.len(), cells: rows.iter().flatten().copied().collect() }
    }

    pub fn trivial() -> Self {
        Self { order: 1, cells: vec![0] }
    }

    /// The cyclic group ℤ/n with u_i = g^i.
    pub fn cyclic(n: usize) -> Self {
        let cells = (0..n * n).map(|c| (c / n + c % n) % n).collect();
        Self { order: n, cells }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn cells_mut(&mut self) -> &mut [usize] {
        &mut self.cells
    }

    pub fn mul(&self, i: usize, j: usize) -> usize {
        self.cells[i * self.order + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[usize]> {
        self.cells.chunks(self.order.max(1))
    }

    pub fn inverse(&self, i: usize) -> Option<usize> {
        (0..self.order).find(|&j| self.mul(i, j) == 0)
    }

    /// Order of element `i` (smallest n ≥ 1 with iⁿ = 0).
    pub fn element_order(&self, i: usize) -> usize {
        let mut x = i;
        let mut n = 1;
        while x != 0 && n <= self.order {
            x = self.mul(x, i);
            n += 1;
        }
        n
    }

    /// Applies the permutation `perm` (old label → new label); `perm[0]` must be 0.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let r = self.order;
        let mut cells = vec![0; r * r];
        for i in 0..r {
            for j in 0..r {
                cells[perm[i] * r + perm[j]] = perm[self.mul(i, j)];
            }
        }
        Self { order: r, cells }
    }

    /// Cells in shell order, the sequence whose lexicographic order defines
    /// canonical forms.
    pub fn shell_sequence(&self) -> Vec<usize> {
        shell_order(self.order).into_iter().map(|(i, j)| self.mul(i, j)).collect()
    }
}

/// Checks identity row/column, the Latin property and associativity, in that
/// order, reporting the first violation.
pub fn is_group_table(t: &MultiplicationTable) -> Result<(), TableViolation> {
    let r = t.order;
    if r == 0 || t.cells.len() != r * r {
        return Err(TableViolation::Shape);
    }
    for row in 0..r {
        for col in 0..r {
            let value = t.mul(row, col);
            if value >= r {
                return Err(TableViolation::OutOfRange { row, col, value });
            }
        }
    }
    for j in 0..r {
        if t.mul(0, j) != j {
            return Err(TableViolation::Identity { row: 0, col: j });
        }
        if t.mul(j, 0) != j {
            return Err(TableViolation::Identity { row: j, col: 0 });
        }
    }
    for row in 0..r {
        let mut seen = vec![false; r];
        for col in 0..r {
            let v = t.mul(row, col);
            if std::mem::replace(&mut seen[v], true) {
                return Err(TableViolation::RowRepeat { row, col });
            }
        }
    }
    for col in 0..r {
        let mut seen = vec![false; r];
        for row in 0..r {
            let v = t.mul(row, col);
            if std::mem::replace(&mut seen[v], true) {
                return Err(TableViolation::ColumnRepeat { row, col });
            }
        }
    }
    for i in 0..r {
        for j in 0..r {
            let ij = t.mul(i, j);
            for k in 0..r {
                if t.mul(ij, k) != t.mul(i, t.mul(j, k)) {
                    return Err(TableViolation::Associativity { i, j, k });
                }
            }
        }
    }
    Ok(())
}

/// Value of the word under `images[g]` for generator g; the empty word gives 0.
pub fn eval_in_table(t: &MultiplicationTable, images: &[usize], w: &Word) -> Result<usize, EvalError> {
    let mut acc = 0;
    for l in w.letters() {
        let g = l.generator();
        let image = *images.get(g).ok_or(EvalError::MissingImage(g))?;
        if image >= t.order {
            return Err(EvalError::BadImage { generator: g, image });
        }
        let x = if l.is_inverse() { t.inverse(image).ok_or(EvalError::NoInverse(image))? } else { image };
        acc = t.mul(acc, x);
    }
    Ok(acc)
}

fn shell_order(r: usize) -> Vec<(usize, usize)> {
    let mut order = Vec::with_capacity(r.saturating_sub(1).pow(2));
    for m in 1..r {
        for i in 1..m {
            order.push((m, i));
            order.push((i, m));
        }
        order.push((m, m));
    }
    order
}

const EMPTY: usize = usize::MAX;

struct Search {
    r: usize,
    cells: Vec<usize>,
    /// row_pos[a·r + v] = column where row a holds v.
    row_pos: Vec<usize>,
    col_used: Vec<u64>,
    order: Vec<(usize, usize)>,
}

impl Search {
    fn new(r: usize) -> Self {
        let mut s = Search {
            r,
            cells: vec![EMPTY; r * r],
            row_pos: vec![EMPTY; r * r],
            col_used: vec![0; r],
            order: shell_order(r),
        };
        for j in 0..r {
            s.set(0, j, j);
            if j > 0 {
                s.set(j, 0, j);
            }
        }
        s
    }

    fn get(&self, i: usize, j: usize) -> usize {
        self.cells[i * self.r + j]
    }

    fn set(&mut self, i: usize, j: usize, v: usize) {
        self.cells[i * self.r + j] = v;
        self.row_pos[i * self.r + v] = j;
        self.col_used[j] |= 1 << v;
    }

    fn clear(&mut self, i: usize, j: usize) {
        let v = self.cells[i * self.r + j];
        self.cells[i * self.r + j] = EMPTY;
        self.row_pos[i * self.r + v] = EMPTY;
        self.col_used[j] &= !(1 << v);
    }

    /// Checks every associativity triple whose four cells are now filled and
    /// which involves the freshly set cell (i,j) = v.
    fn consistent(&self, i: usize, j: usize, v: usize) -> bool {
        let r = self.r;
        for x in 0..r {
            // (i·j)·x = i·(j·x)
            let (vx, jx) = (self.get(v, x), self.get(j, x));
            if vx != EMPTY && jx != EMPTY {
                let rhs = self.get(i, jx);
                if rhs != EMPTY && rhs != vx {
                    return false;
                }
            }
            // (x·i)·j = x·(i·j)
            let xi = self.get(x, i);
            if xi != EMPTY {
                let (lhs, rhs) = (self.get(xi, j), self.get(x, v));
                if lhs != EMPTY && rhs != EMPTY && lhs != rhs {
                    return false;
                }
            }
            // (x·q)·j with x·q = i, against x·(q·j)
            let q = self.row_pos[x * r + i];
            if q != EMPTY {
                let qj = self.get(q, j);
                if qj != EMPTY {
                    let rhs = self.get(x, qj);
                    if rhs != EMPTY && rhs != v {
                        return false;
                    }
                }
            }
            // (i·x)·s with x·s = j, against i·(x·s)
            let s = self.row_pos[x * r + j];
            if s != EMPTY {
                let ix = self.get(i, x);
                if ix != EMPTY {
                    let lhs = self.get(ix, s);
                    if lhs != EMPTY && lhs != v {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn run(&mut self, mut emit: impl FnMut(MultiplicationTable)) {
        if self.r == 1 {
            emit(MultiplicationTable::trivial());
            return;
        }
        let mut pos = 0;
        // Per position: the value currently placed and the growth bound before it.
        let mut chosen: Vec<usize> = vec![EMPTY; self.order.len()];
        let mut high: Vec<usize> = vec![0; self.order.len() + 1];
        high[0] = 1;
        loop {
            if pos == self.order.len() {
                let table = MultiplicationTable { order: self.r, cells: self.cells.clone() };
                debug_assert_eq!(is_group_table(&table), Ok(()));
                emit(table);
                pos -= 1;
                let (i, j) = self.order[pos];
                self.clear(i, j);
            }
            let (i, j) = self.order[pos];
            let bound = high[pos].max(i).max(j);
            let start = if chosen[pos] == EMPTY { 0 } else { chosen[pos] + 1 };
            let mut placed = false;
            let limit = (bound + 1).min(self.r - 1);
            let mut v = start;
            while v <= limit {
                let row_taken = self.row_pos[i * self.r + v] != EMPTY;
                let col_taken = self.col_used[j] & (1 << v) != 0;
                if !row_taken && !col_taken {
                    self.set(i, j, v);
                    if self.consistent(i, j, v) {
                        placed = true;
                        break;
                    }
                    self.clear(i, j);
                }
                v += 1;
            }
            if placed {
                chosen[pos] = v;
                high[pos + 1] = bound.max(v);
                pos += 1;
                if pos < chosen.len() {
                    chosen[pos] = EMPTY;
                }
            } else {
                chosen[pos] = EMPTY;
                if pos == 0 {
                    return;
                }
                pos -= 1;
                let (pi, pj) = self.order[pos];
                self.clear(pi, pj);
            }
        }
    }
}

/// Every group table of order r obeying the growth restriction, in
/// shell-lexicographic order. Contains every isomorphism class, usually
/// several times.
pub fn normalized_group_tables(r: usize) -> Vec<MultiplicationTable> {
    assert!((1..=MAX_ORDER).contains(&r), "order {r} outside 1..={MAX_ORDER}");
    let mut out = Vec::new();
    Search::new(r).run(|t| out.push(t));
    out
}

/// One table per isomorphism class of groups of order r, each in canonical
/// form, ordered by their shell sequences.
pub fn enumerate_tables(r: usize) -> Vec<MultiplicationTable> {
    assert!((1..=MAX_ORDER).contains(&r), "order {r} outside 1..={MAX_ORDER}");
    let mut reps: Vec<(Signature, MultiplicationTable)> = Vec::new();
    Search::new(r).run(|t| {
        let sig = Signature::of(&t);
        if !reps.iter().any(|(s, rep)| *s == sig && are_isomorphic(rep, &t)) {
            reps.push((sig, t));
        }
    });
    reps.into_iter().map(|(_, t)| t).collect()
}

/// Sorted element orders: an isomorphism invariant used to skip full tests.
#[derive(Debug, PartialEq, Eq)]
struct Signature(Vec<usize>);

impl Signature {
    fn of(t: &MultiplicationTable) -> Self {
        let mut orders: Vec<usize> = (0..t.order()).map(|i| t.element_order(i)).collect();
        orders.sort_unstable();
        Signature(orders)
    }
}

/// Greedy generating set: each generator lies outside the subgroup spanned by
/// the previous ones.
fn generating_set(t: &MultiplicationTable) -> Vec<usize> {
    let r = t.order();
    let mut inside = vec![false; r];
    inside[0] = true;
    let mut gens = Vec::new();
    // Prefer elements of large order so the set stays small.
    let mut candidates: Vec<usize> = (1..r).collect();
    candidates.sort_by_key(|&x| std::cmp::Reverse(t.element_order(x)));
    for x in candidates {
        if inside[x] {
            continue;
        }
        gens.push(x);
        let mut members = vec![0];
        inside.iter_mut().for_each(|b| *b = false);
        inside[0] = true;
        let mut head = 0;
        while head < members.len() {
            let y = members[head];
            head += 1;
            for &g in &gens {
                let z = t.mul(y, g);
                if !inside[z] {
                    inside[z] = true;
                    members.push(z);
                }
            }
        }
    }
    gens
}

/// Decides isomorphism by mapping a generating set of `a` into `b` in every
/// order-preserving way and testing the induced map.
pub fn are_isomorphic(a: &MultiplicationTable, b: &MultiplicationTable) -> bool {
    if a.order() != b.order() {
        return false;
    }
    let r = a.order();
    let gens = generating_set(a);
    let targets: Vec<Vec<usize>> = gens
        .iter()
        .map(|&g| (1..r).filter(|&y| b.element_order(y) == a.element_order(g)).collect())
        .collect();
    let mut choice = vec![0usize; gens.len()];
    if targets.iter().any(|t| t.is_empty()) {
        return r == 1;
    }
    loop {
        let images: Vec<usize> = choice.iter().zip(&targets).map(|(&c, t)| t[c]).collect();
        if induced_isomorphism(a, b, &gens, &images).is_some() {
            return true;
        }
        let mut pos = choice.len();
        loop {
            if pos == 0 {
                return gens.is_empty();
            }
            pos -= 1;
            choice[pos] += 1;
            if choice[pos] < targets[pos].len() {
                break;
            }
            choice[pos] = 0;
        }
    }
}

fn induced_isomorphism(
    a: &MultiplicationTable,
    b: &MultiplicationTable,
    gens: &[usize],
    images: &[usize],
) -> Option<Vec<usize>> {
    let r = a.order();
    let mut map = vec![EMPTY; r];
    let mut used = vec![false; r];
    map[0] = 0;
    used[0] = true;
    let mut queue = vec![0];
    let mut head = 0;
    while head < queue.len() {
        let x = queue[head];
        head += 1;
        for (&g, &h) in gens.iter().zip(images) {
            let y = a.mul(x, g);
            let img = b.mul(map[x], h);
            if map[y] == EMPTY {
                if used[img] {
                    return None;
                }
                map[y] = img;
                used[img] = true;
                queue.push(y);
            } else if map[y] != img {
                return None;
            }
        }
    }
    if queue.len() != r {
        return None;
    }
    for i in 0..r {
        for j in 0..r {
            if map[a.mul(i, j)] != b.mul(map[i], map[j]) {
                return None;
            }
        }
    }
    Some(map)
}

/// The canonical form of a group table: the least shell sequence over all
/// relabelings fixing the identity. Only growth-restricted relabelings can
/// be least, so the search walks those.
pub fn canonical_form(t: &MultiplicationTable) -> MultiplicationTable {
    let r = t.order();
    if r == 1 {
        return t.clone();
    }
    let order = shell_order(r);
    let mut best: Option<Vec<usize>> = None;
    let mut label_of = vec![EMPTY; r];
    let mut elem_of = vec![EMPTY; r];
    label_of[0] = 0;
    elem_of[0] = 0;
    canon_walk(t, &order, 0, 0, &mut label_of, &mut elem_of, &mut Vec::new(), &mut best);
    let seq = best.expect("at least one labeling exists");
    let mut cells = vec![0; r * r];
    for j in 0..r {
        cells[j] = j;
        cells[j * r] = j;
    }
    for (&(i, j), &v) in order.iter().zip(&seq) {
        cells[i * r + j] = v;
    }
    MultiplicationTable { order: r, cells }
}

#[allow(clippy::too_many_arguments)]
fn canon_walk(
    t: &MultiplicationTable,
    order: &[(usize, usize)],
    pos: usize,
    high: usize,
    label_of: &mut Vec<usize>,
    elem_of: &mut Vec<usize>,
    seq: &mut Vec<usize>,
    best: &mut Option<Vec<usize>>,
) {
    if let Some(b) = best {
        if seq.as_slice() > &b[..seq.len()] {
            return;
        }
    }
    if pos == order.len() {
        if best.as_ref().is_none_or(|b| *seq < *b) {
            *best = Some(seq.clone());
        }
        return;
    }
    let (i, j) = order[pos];
    let m = i.max(j);
    if elem_of[m] == EMPTY {
        // Row m opens on a label nothing has produced yet: any unlabeled element can take it.
        for x in 1..t.order() {
            if label_of[x] == EMPTY {
                label_of[x] = m;
                elem_of[m] = x;
                canon_walk(t, order, pos, high.max(m), label_of, elem_of, seq, best);
                label_of[x] = EMPTY;
                elem_of[m] = EMPTY;
            }
        }
        return;
    }
    let product = t.mul(elem_of[i], elem_of[j]);
    let mut fresh = false;
    let value = if label_of[product] != EMPTY {
        label_of[product]
    } else {
        let next = high.max(m) + 1;
        label_of[product] = next;
        elem_of[next] = product;
        fresh = true;
        next
    };
    seq.push(value);
    canon_walk(t, order, pos + 1, high.max(m).max(value), label_of, elem_of, seq, best);
    seq.pop();
    if fresh {
        label_of[product] = EMPTY;
        elem_of[value] = EMPTY;
    }
}

/// Lazily computed, memoized concatenation of `enumerate_tables(1)`,
/// `enumerate_tables(2)`, … up to an order cap.
#[derive(Debug)]
pub struct TableCatalog {
    cap: usize,
    orders: Mutex<Vec<Arc<Vec<MultiplicationTable>>>>,
}

impl TableCatalog {
    pub fn new(cap: usize) -> Self {
        assert!((1..=MAX_ORDER).contains(&cap), "order cap {cap} outside 1..={MAX_ORDER}");
        Self { cap, orders: Mutex::new(Vec::new()) }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Tables of the given order (memoized).
    pub fn of_order(&self, r: usize) -> Arc<Vec<MultiplicationTable>> {
        let mut orders = self.orders.lock().unwrap_or_else(|e| e.into_inner());
        while orders.len() < r {
            let next = orders.len() + 1;
            orders.push(Arc::new(enumerate_tables(next)));
        }
        orders[r - 1].clone()
    }

    /// Table number `cursor` of the global enumeration, or `None` beyond the cap.
    pub fn at_cursor(&self, cursor: usize) -> Option<MultiplicationTable> {
        let mut rest = cursor;
        for r in 1..=self.cap {
            let tables = self.of_order(r);
            if rest < tables.len() {
                return Some(tables[rest].clone());
            }
            rest -= tables.len();
        }
        None
    }

    /// Number of tables at or below the cap.
    pub fn total(&self) -> usize {
        (1..=self.cap).map(|r| self.of_order(r).len()).sum()
    }
}

impl Default for TableCatalog {
    fn default() -> Self {
        Self::new(DEFAULT_ORDER_CAP)
    }
}

/// Table number `cursor` of the uncapped enumeration.
pub fn table_at_cursor(cursor: usize) -> MultiplicationTable {
    let mut rest = cursor;
    for r in 1..=MAX_ORDER {
        let tables = enumerate_tables(r);
        if rest < tables.len() {
            return tables[rest].clone();
        }
        rest -= tables.len();
    }
    panic!("cursor {cursor} lies beyond order {MAX_ORDER}")
}
