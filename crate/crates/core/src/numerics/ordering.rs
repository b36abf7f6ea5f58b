//! Reverse Cuthill-McKee ordering for envelope factorisation.

use std::collections::VecDeque;

use super::scalar::Scalar;
use super::sparse::CsrMatrix;

/// Symmetrised adjacency (without the diagonal) of a square sparse matrix.
fn adjacency<T: Scalar>(a: &CsrMatrix<T>) -> Vec<Vec<usize>> {
    let n = a.nrows();
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for &j in a.row(i).0 {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for l in &mut adj {
        l.sort_unstable();
        l.dedup();
    }
    adj
}

/// Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee<T: Scalar>(a: &CsrMatrix<T>) -> Vec<usize> {
    let adj = adjacency(a);
    let n = adj.len();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut level = vec![usize::MAX; n];
    let mut start = 0;
    while order.len() < n {
        while visited[start] {
            start += 1;
        }
        let root = pseudo_peripheral(&adj, start, &mut level);
        let base = order.len();
        visited[root] = true;
        order.push(root);
        let mut head = base;
        while head < order.len() {
            let v = order[head];
            head += 1;
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (adj[w].len(), w));
            for w in next {
                visited[w] = true;
                order.push(w);
            }
        }
    }
    order.reverse();
    order
}

/// George-Liu pseudo-peripheral node search within the component of `start`.
fn pseudo_peripheral(adj: &[Vec<usize>], start: usize, level: &mut [usize]) -> usize {
    let mut root = start;
    let mut depth = bfs_levels(adj, root, level).0;
    loop {
        let (_, last) = bfs_levels(adj, root, level);
        let cand = *last
            .iter()
            .min_by_key(|&&v| (adj[v].len(), v))
            .expect("non-empty level");
        let (d, _) = bfs_levels(adj, cand, level);
        if d > depth {
            depth = d;
            root = cand;
        } else {
            return root;
        }
    }
}

fn bfs_levels(adj: &[Vec<usize>], root: usize, level: &mut [usize]) -> (usize, Vec<usize>) {
    let mut touched = vec![root];
    level[root] = 0;
    let mut queue = VecDeque::from([root]);
    let mut depth = 0;
    while let Some(v) = queue.pop_front() {
        depth = depth.max(level[v]);
        for &w in &adj[v] {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                touched.push(w);
                queue.push_back(w);
            }
        }
    }
    let last = touched.iter().copied().filter(|&v| level[v] == depth).collect();
    for v in touched {
        level[v] = usize::MAX;
    }
    (depth, last)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_is_complete() {
        // path graph 0-2-4-1-3 plus an isolated vertex 5
        let edges = [(0, 2), (2, 4), (4, 1), (1, 3)];
        let mut trip = vec![];
        for &(a, b) in &edges {
            trip.push((a, b, 1.0));
            trip.push((b, a, 1.0));
        }
        for i in 0..6 {
            trip.push((i, i, 4.0));
        }
        let a = CsrMatrix::from_triplets(6, 6, &trip);
        let mut p = reverse_cuthill_mckee(&a);
        let inv: Vec<usize> = {
            let mut inv = vec![0; 6];
            for (new, &old) in p.iter().enumerate() {
                inv[old] = new;
            }
            inv
        };
        // a path must be ordered with bandwidth 1
        for &(x, y) in &edges {
            assert_eq!((inv[x] as i64 - inv[y] as i64).abs(), 1);
        }
        p.sort_unstable();
        assert_eq!(p, (0..6).collect::<Vec<_>>());
    }
}
