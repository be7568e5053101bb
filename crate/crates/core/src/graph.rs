//! Coset leader graphs: vertices are the leaders of one stage, with an arc
//! `c -> d` labeled `a` whenever `c = a d` for a generator `a`.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;
use std::hash::Hash;

use serde::Serialize;

use crate::chain::SubgroupChain;
use crate::group::GroupAction;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    /// Index into [`CosetLeaderGraph::labels`].
    pub label: usize,
}

#[derive(Clone, Debug)]
pub struct CosetLeaderGraph<E> {
    vertices: Vec<E>,
    labels: Vec<E>,
    vertex_names: Vec<String>,
    label_names: Vec<String>,
    edges: Vec<Edge>,
}

/// Duplicate generators are dropped, keeping first occurrences.
pub fn build_graph<A: GroupAction>(
    action: &A,
    leaders: &[A::Elem],
    generators: &[A::Elem],
) -> CosetLeaderGraph<A::Elem> {
    let mut labels: Vec<A::Elem> = Vec::with_capacity(generators.len());
    for g in generators {
        if !labels.contains(g) {
            labels.push(g.clone());
        }
    }
    let pos: HashMap<&A::Elem, usize> = leaders.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let mut edges = Vec::new();
    for (from, c) in leaders.iter().enumerate() {
        for (li, a) in labels.iter().enumerate() {
            // c = a d  <=>  d = a^-1 c
            let d = action.compose(&action.inverse(a), c);
            if let Some(&to) = pos.get(&d) {
                edges.push(Edge {
                    from,
                    to,
                    label: li,
                });
            }
        }
    }
    CosetLeaderGraph {
        vertex_names: leaders.iter().map(|e| action.label(e)).collect(),
        label_names: labels.iter().map(|e| action.label(e)).collect(),
        vertices: leaders.to_vec(),
        labels,
        edges,
    }
}

/// One graph per chain stage, using that stage's generators.
pub fn stage_graphs<A: GroupAction>(
    action: &A,
    chain: &SubgroupChain<A::Elem>,
) -> Vec<CosetLeaderGraph<A::Elem>> {
    chain
        .stages()
        .iter()
        .map(|s| build_graph(action, &s.leaders, &s.generators))
        .collect()
}

impl<E: Clone + Eq + Hash> CosetLeaderGraph<E> {
    pub fn vertices(&self) -> &[E] {
        &self.vertices
    }

    pub fn labels(&self) -> &[E] {
        &self.labels
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn position(&self, e: &E) -> Option<usize> {
        self.vertices.iter().position(|v| v == e)
    }

    /// Undirected neighbors of `v`, ordered by label then direction.
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for li in 0..self.labels.len() {
            for e in &self.edges {
                if e.label != li {
                    continue;
                }
                if e.from == v && !out.contains(&e.to) && e.to != v {
                    out.push(e.to);
                }
            }
            for e in &self.edges {
                if e.label == li && e.to == v && !out.contains(&e.from) && e.from != v {
                    out.push(e.from);
                }
            }
        }
        out
    }

    /// Vertices joined by an arc in either direction.
    pub fn adjacent(&self, c: usize, d: usize) -> bool {
        self.edges
            .iter()
            .any(|e| (e.from == c && e.to == d) || (e.from == d && e.to == c))
    }

    pub fn adjacent_elems(&self, c: &E, d: &E) -> bool {
        match (self.position(c), self.position(d)) {
            (Some(i), Some(j)) => self.adjacent(i, j),
            _ => false,
        }
    }

    /// Connectivity ignoring arc direction.
    pub fn is_connected(&self) -> bool {
        self.vertices.is_empty() || self.spanning_tree().is_spanning()
    }

    /// BFS tree rooted at vertex 0, children discovered in label order.
    pub fn spanning_tree(&self) -> SpanningTree {
        let n = self.vertices.len();
        let mut parent = vec![None; n];
        let mut children = vec![Vec::new(); n];
        let mut seen = vec![false; n];
        if n == 0 {
            return SpanningTree {
                parent,
                children,
                reached: 0,
            };
        }
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for v in self.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    reached += 1;
                    parent[v] = Some(u);
                    children[u].push(v);
                    queue.push_back(v);
                }
            }
        }
        SpanningTree {
            parent,
            children,
            reached,
        }
    }

    /// Graphviz text. Vertex and edge order follow construction order.
    pub fn to_dot(&self, name: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "digraph \"{}\" {{", escape(name));
        for (i, v) in self.vertex_names.iter().enumerate() {
            let _ = writeln!(s, "  v{i} [label=\"{}\"];", escape(v));
        }
        for e in &self.edges {
            let _ = writeln!(
                s,
                "  v{} -> v{} [label=\"{}\"];",
                e.from,
                e.to,
                escape(&self.label_names[e.label])
            );
        }
        s.push_str("}\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanningTree {
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
    reached: usize,
}

impl SpanningTree {
    pub fn is_spanning(&self) -> bool {
        self.reached == self.parent.len()
    }

    /// Tree path from the root to `v`, root first.
    pub fn path_to(&self, mut v: usize) -> Vec<usize> {
        let mut p = vec![v];
        while let Some(u) = self.parent[v] {
            p.push(u);
            v = u;
        }
        p.reverse();
        p
    }
}
