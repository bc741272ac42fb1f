//! Directed graphs over the state space: strongly connected components,
//! closed classes and reachability.

/// Adjacency matrix over `n` nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    adj: Vec<Vec<bool>>,
}

impl Digraph {
    pub fn empty(n: usize) -> Self {
        Self {
            adj: vec![vec![false; n]; n],
        }
    }

    /// Edge `s → s'` wherever `matrix[s][s'] > 0`.
    pub fn from_positive(matrix: &[Vec<f64>]) -> Self {
        Self {
            adj: matrix.iter().map(|row| row.iter().map(|&p| p > 0.0).collect()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn add_edge(&mut self, from: usize, to: usize) {
        self.adj[from][to] = true;
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.adj[from][to]
    }

    pub fn union_with(&mut self, other: &Digraph) {
        for (a, b) in self.adj.iter_mut().zip(&other.adj) {
            for (x, y) in a.iter_mut().zip(b) {
                *x |= *y;
            }
        }
    }

    pub fn successors(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[s].iter().enumerate().filter(|(_, &e)| e).map(|(j, _)| j)
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.len()).flat_map(|s| self.successors(s).map(move |t| (s, t))).collect()
    }

    /// States reachable from `start` in zero or more steps.
    pub fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(s) = stack.pop() {
            for t in self.successors(s) {
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        seen
    }

    /// Whether `to` is reachable from `from` in one or more steps.
    pub fn reaches(&self, from: usize, to: usize) -> bool {
        self.successors(from).any(|t| self.reachable_from(t)[to])
    }

    /// Strongly connected components, each sorted, listed by smallest member.
    pub fn sccs(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let reach: Vec<Vec<bool>> = (0..n).map(|s| self.reachable_from(s)).collect();
        let mut assigned = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if assigned[s] {
                continue;
            }
            let comp: Vec<usize> = (0..n).filter(|&t| reach[s][t] && reach[t][s]).collect();
            for &t in &comp {
                assigned[t] = true;
            }
            out.push(comp);
        }
        out
    }

    /// SCCs with no edge leaving them.
    pub fn closed_classes(&self) -> Vec<Vec<usize>> {
        self.sccs()
            .into_iter()
            .filter(|c| c.iter().all(|&s| self.successors(s).all(|t| c.contains(&t))))
            .collect()
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.len() <= 1 || self.sccs().len() == 1
    }

    /// First pair `(s, t)` with `t` not reachable from `s` (zero steps allowed).
    pub fn disconnected_pair(&self) -> Option<(usize, usize)> {
        (0..self.len()).find_map(|s| {
            let r = self.reachable_from(s);
            r.iter().position(|&x| !x).map(|t| (s, t))
        })
    }

    /// Shortest path `from → … → to` by BFS, lowest-index successors first.
    pub fn shortest_path(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let n = self.len();
        let mut prev = vec![usize::MAX; n];
        let mut seen = vec![false; n];
        let mut queue = std::collections::VecDeque::new();
        seen[from] = true;
        queue.push_back(from);
        while let Some(s) = queue.pop_front() {
            if s == to {
                let mut path = vec![to];
                let mut cur = to;
                while cur != from {
                    cur = prev[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for t in self.successors(s) {
                if !seen[t] {
                    seen[t] = true;
                    prev[t] = s;
                    queue.push_back(t);
                }
            }
        }
        None
    }
}

/// Removes cycles from a walk: whenever a state repeats, the segment between
/// its two visits is cut out.
pub fn trim_path(path: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(path.len());
    for &s in path {
        if let Some(pos) = out.iter().position(|&x| x == s) {
            out.truncate(pos + 1);
        } else {
            out.push(s);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_classes_of_absorbing_and_transient() {
        let g = Digraph::from_positive(&[
            vec![0.5, 0.5, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.0, 1.0, 0.0],
        ]);
        assert_eq!(g.sccs(), vec![vec![0], vec![1, 2]]);
        assert_eq!(g.closed_classes(), vec![vec![1, 2]]);
        assert!(!g.is_strongly_connected());
        assert_eq!(g.disconnected_pair(), Some((1, 0)));
    }

    #[test]
    fn bfs_path_and_trimming() {
        let g = Digraph::from_positive(&[vec![0.0, 1.0, 1.0], vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]]);
        assert_eq!(g.shortest_path(0, 2), Some(vec![0, 2]));
        assert_eq!(g.shortest_path(1, 0), Some(vec![1, 2, 0]));
        assert_eq!(trim_path(&[0, 1, 2, 1, 3]), vec![0, 1, 3]);
        assert_eq!(trim_path(&[4, 0, 4, 2, 0, 1]), vec![4, 2, 0, 1]);
        assert!(g.reaches(0, 0));
    }
}
