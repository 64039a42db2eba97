//! Directed acyclic graphs whose source-to-sink paths form an action family.

use std::collections::VecDeque;
use std::path::Path;

use crate::error::{config_err, Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
}

/// Edge ids are `0..d` after loading; `labels[id]` keeps the id from the input.
#[derive(Debug, Clone, PartialEq)]
pub struct Dag {
    num_nodes: usize,
    edges: Vec<Edge>,
    labels: Vec<usize>,
    source: usize,
    sink: usize,
    /// Nodes in topological order.
    order: Vec<usize>,
}

impl Dag {
    /// Validates acyclicity and strips edges that lie on no source-to-sink path.
    /// `edges` are `(label, from, to)`.
    pub fn new(num_nodes: usize, edges: &[(usize, usize, usize)], source: usize, sink: usize) -> Result<Self> {
        if source >= num_nodes || sink >= num_nodes {
            return Err(config_err!("source or sink outside 0..{num_nodes}"));
        }
        if source == sink {
            return Err(config_err!("source and sink must differ"));
        }
        if let Some(&(l, f, t)) = edges.iter().find(|&&(_, f, t)| f >= num_nodes || t >= num_nodes) {
            return Err(config_err!("edge {l} ({f} -> {t}) references an unknown node"));
        }
        let order = topological_order(num_nodes, edges.iter().map(|&(_, f, t)| (f, t)))?;

        let fwd = reach(num_nodes, source, edges.iter().map(|&(_, f, t)| (f, t)));
        let bwd = reach(num_nodes, sink, edges.iter().map(|&(_, f, t)| (t, f)));
        let mut kept: Vec<(usize, usize, usize)> = edges.iter().copied().filter(|&(_, f, t)| fwd[f] && bwd[t]).collect();
        kept.sort_by_key(|e| e.0);
        if kept.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(config_err!("duplicate edge id"));
        }
        if kept.is_empty() {
            return Err(config_err!("no path from source {source} to sink {sink}"));
        }
        Ok(Self {
            num_nodes,
            labels: kept.iter().map(|e| e.0).collect(),
            edges: kept.iter().map(|&(_, from, to)| Edge { from, to }).collect(),
            source,
            sink,
            order,
        })
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn topological_order(&self) -> &[usize] {
        &self.order
    }

    pub(crate) fn out_edges(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_nodes];
        for (id, e) in self.edges.iter().enumerate() {
            out[e.from].push(id);
        }
        out
    }

    /// Every source-to-sink path as a sorted edge-id set, in lexicographic order.
    pub fn paths(&self) -> Vec<Vec<usize>> {
        let out = self.out_edges();
        let mut paths = Vec::new();
        let mut stack = vec![(self.source, Vec::new())];
        while let Some((node, path)) = stack.pop() {
            if node == self.sink {
                let mut p: Vec<usize> = path;
                p.sort_unstable();
                paths.push(p);
                continue;
            }
            for &e in &out[node] {
                let mut next = path.clone();
                next.push(e);
                stack.push((self.edges[e].to, next));
            }
        }
        paths.sort();
        paths
    }

    /// Parse `edge <id> <from> <to>`, `source <node>`, `sink <node>` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let (mut source, mut sink) = (None, None);
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = || Error::Data(format!("graph line {}: cannot parse `{}`", lineno + 1, raw.trim()));
            let fields: Vec<&str> = line.split_whitespace().collect();
            let num = |s: &str| s.parse::<usize>().map_err(|_| bad());
            match fields.as_slice() {
                ["edge", id, f, t] => edges.push((num(id)?, num(f)?, num(t)?)),
                ["source", n] => source = Some(num(n)?),
                ["sink", n] => sink = Some(num(n)?),
                _ => return Err(bad()),
            }
        }
        let source = source.ok_or_else(|| Error::Data("graph file has no source line".into()))?;
        let sink = sink.ok_or_else(|| Error::Data("graph file has no sink line".into()))?;
        let num_nodes = edges
            .iter()
            .flat_map(|&(_, f, t)| [f, t])
            .chain([source, sink])
            .max()
            .unwrap_or(0)
            + 1;
        Self::new(num_nodes, &edges, source, sink)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Random layered DAG with exactly `d` edges, all on source-to-sink paths.
    /// Edges may skip layers.
    /// Node 0 is the source, node `layers + 1` the sink.
    pub fn random_layered(layers: usize, width: usize, d: usize, rng: &mut RngStream) -> Result<Self> {
        if layers == 0 || width == 0 {
            return Err(config_err!("random DAG needs at least one layer of width >= 1"));
        }
        let node = |layer: usize, i: usize| 1 + (layer - 1) * width + i;
        let sink = 1 + layers * width;
        // a spine guarantees connectivity: source -> (1,0) -> (2,0) -> ... -> sink
        let mut pairs: Vec<(usize, usize)> = vec![(0, node(1, 0))];
        for l in 1..layers {
            pairs.push((node(l, 0), node(l + 1, 0)));
        }
        pairs.push((node(layers, 0), sink));
        if d < pairs.len() {
            return Err(config_err!("random DAG with {layers} layers needs at least {} edges", pairs.len()));
        }
        // any edge from a lower layer to a higher one; the source is layer 0, the sink layer `layers + 1`
        let layer_of = |v: usize| if v == 0 { 0 } else if v == sink { layers + 1 } else { 1 + (v - 1) / width };
        let mut candidates = Vec::new();
        for f in 0..sink {
            for t in 1..=sink {
                if layer_of(f) < layer_of(t) {
                    candidates.push((f, t));
                }
            }
        }
        candidates.retain(|c| !pairs.contains(c));
        let build = |pairs: &[(usize, usize)]| {
            let edges: Vec<(usize, usize, usize)> = pairs.iter().enumerate().map(|(i, &(f, t))| (i, f, t)).collect();
            Self::new(sink + 1, &edges, 0, sink)
        };
        let mut dag = build(&pairs)?;
        // shuffle, then accept a candidate unless it pushes the useful edge count past d
        for i in (1..candidates.len()).rev() {
            candidates.swap(i, rng.index(i + 1));
        }
        for c in candidates {
            if dag.num_edges() == d {
                break;
            }
            pairs.push(c);
            let next = build(&pairs)?;
            if next.num_edges() <= d {
                dag = next;
            } else {
                pairs.pop();
            }
        }
        if dag.num_edges() != d {
            return Err(config_err!("could not place {d} useful edges in a {layers}x{width} layered graph"));
        }
        let relabeled: Vec<(usize, usize, usize)> =
            dag.edges.iter().enumerate().map(|(i, e)| (i, e.from, e.to)).collect();
        Self::new(sink + 1, &relabeled, 0, sink)
    }
}

fn topological_order(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> Result<Vec<usize>> {
    let mut indeg = vec![0usize; n];
    let mut adj = vec![Vec::new(); n];
    for (f, t) in edges {
        adj[f].push(t);
        indeg[t] += 1;
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &w in &adj[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                queue.push_back(w);
            }
        }
    }
    if order.len() != n {
        return Err(config_err!("graph contains a cycle"));
    }
    Ok(order)
}

fn reach(n: usize, start: usize, edges: impl Iterator<Item = (usize, usize)>) -> Vec<bool> {
    let mut adj = vec![Vec::new(); n];
    for (f, t) in edges {
        adj[f].push(t);
    }
    let mut seen = vec![false; n];
    seen[start] = true;
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_strip() {
        let g = Dag::parse(
            "# diamond plus a dangling edge\nsource 0\nsink 3\nedge 10 0 1\nedge 11 1 3\nedge 12 0 2\nedge 13 2 3\nedge 14 2 4\n",
        )
        .unwrap();
        assert_eq!(g.num_edges(), 4);
        assert_eq!(g.labels(), &[10, 11, 12, 13]);
        assert_eq!(g.paths(), vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn cycle_rejected() {
        let err = Dag::parse("source 0\nsink 2\nedge 0 0 1\nedge 1 1 0\nedge 2 1 2\n");
        assert!(matches!(err, Err(Error::Config(_))));
        assert!(matches!(Dag::parse("source 0\nedge 0 0 1\n"), Err(Error::Data(_))));
        assert!(matches!(Dag::parse("source 0\nsink 1\nedge x 0 1\n"), Err(Error::Data(_))));
    }

    #[test]
    fn random_layered_has_d_useful_edges() {
        for seed in 0..20 {
            let g = Dag::random_layered(3, 3, 8, &mut RngStream::new(seed)).unwrap();
            assert_eq!(g.num_edges(), 8);
            let covered: std::collections::BTreeSet<usize> = g.paths().into_iter().flatten().collect();
            assert_eq!(covered.len(), g.num_edges());
        }
    }
}
