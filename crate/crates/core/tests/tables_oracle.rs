//! The table enumerator against an unpruned brute-force search.

use justinf::tables::{enumerate_tables, is_group_table, MultiplicationTable, TableCatalog};

/// All group tables on {0..r-1} with identity 0, by filling cells with any
/// value that keeps rows and columns Latin, then testing associativity.
fn all_group_tables(r: usize) -> Vec<MultiplicationTable> {
    fn fill(r: usize, cell: usize, cells: &mut Vec<usize>, out: &mut Vec<MultiplicationTable>) {
        if cell == r * r {
            let t = MultiplicationTable::from_cells(r, cells.clone());
            if is_associative(&t) {
                out.push(t);
            }
            return;
        }
        let (i, j) = (cell / r, cell % r);
        let forced = if i == 0 { Some(j) } else if j == 0 { Some(i) } else { None };
        for v in 0..r {
            if forced.is_some_and(|f| f != v) {
                continue;
            }
            let clash = (0..j).any(|jj| cells[i * r + jj] == v) || (0..i).any(|ii| cells[ii * r + j] == v);
            if !clash {
                cells[cell] = v;
                fill(r, cell + 1, cells, out);
            }
        }
    }
    let mut out = Vec::new();
    fill(r, 0, &mut vec![0; r * r], &mut out);
    out
}

fn is_associative(t: &MultiplicationTable) -> bool {
    let r = t.order();
    (0..r).all(|i| (0..r).all(|j| (0..r).all(|k| t.mul(t.mul(i, j), k) == t.mul(i, t.mul(j, k)))))
}

fn permutations(r: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, r: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == r {
            out.push(prefix.clone());
            return;
        }
        for v in 1..r {
            if !prefix.contains(&v) {
                prefix.push(v);
                go(prefix, r, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(&mut vec![0], r, &mut out);
    out
}

fn isomorphic(a: &MultiplicationTable, b: &MultiplicationTable, perms: &[Vec<usize>]) -> bool {
    let r = a.order();
    perms.iter().any(|p| (0..r).all(|i| (0..r).all(|j| p[a.mul(i, j)] == b.mul(p[i], p[j]))))
}

fn brute_classes(r: usize) -> Vec<MultiplicationTable> {
    let perms = permutations(r);
    let mut reps: Vec<MultiplicationTable> = Vec::new();
    for t in all_group_tables(r) {
        if !reps.iter().any(|s| isomorphic(s, &t, &perms)) {
            reps.push(t);
        }
    }
    reps
}

#[test]
fn class_counts_match_brute_force() {
    for r in 1..=6 {
        let brute = brute_classes(r);
        let fast = enumerate_tables(r);
        assert_eq!(fast.len(), brute.len(), "order {r}");
        let perms = permutations(r);
        for b in &brute {
            assert_eq!(fast.iter().filter(|f| isomorphic(f, b, &perms)).count(), 1, "order {r}");
        }
    }
}

#[test]
fn brute_force_frozen_counts() {
    let counts: Vec<usize> = (1..=6).map(|r| brute_classes(r).len()).collect();
    assert_eq!(counts, [1, 1, 1, 2, 1, 2]);
}

#[test]
fn every_table_in_the_catalog_is_a_group() {
    let catalog = TableCatalog::new(10);
    for c in 0..catalog.total() {
        let t = catalog.at_cursor(c).unwrap();
        assert_eq!(is_group_table(&t), Ok(()));
        assert!(is_associative(&t));
    }
    assert_eq!(catalog.at_cursor(catalog.total()), None);
}

#[test]
fn catalog_orders_never_decrease() {
    let catalog = TableCatalog::new(12);
    let orders: Vec<usize> = (0..catalog.total()).map(|c| catalog.at_cursor(c).unwrap().order()).collect();
    assert!(orders.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(orders.len(), [1, 1, 1, 2, 1, 2, 1, 5, 2, 2, 1, 5].iter().sum::<usize>());
}
