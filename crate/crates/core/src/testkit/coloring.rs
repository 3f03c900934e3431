//! Graph coloring as a valuation problem: `k = p^e` colors are the residues
//! modulo `p^e`, and an edge asks that its endpoints differ modulo `p^e`.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use rand::Rng;

use crate::arith::{Prime, Rational};
use crate::error::{Error, Result};
use crate::model::{Instance, ValRel};

/// Simple undirected graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Edges are stored as `(min, max)` without duplicates.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::InvalidInput(format!("self-loop at vertex {u}")));
            }
            if u >= n || v >= n {
                return Err(Error::InvalidInput(format!("edge ({u}, {v}) outside {n} vertices")));
            }
            set.insert((u.min(v), u.max(v)));
        }
        Ok(Graph {
            n,
            edges: set.into_iter().collect(),
        })
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Graph::new(n, edges).expect("valid")
    }

    pub fn cycle(n: usize) -> Self {
        Graph::new(n, (0..n).map(|u| (u, (u + 1) % n))).expect("valid")
    }

    /// Erdos-Renyi graph with edge probability `prob`.
    pub fn random(n: usize, prob: f64, rng: &mut impl Rng) -> Self {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(prob) {
                    edges.push((u, v));
                }
            }
        }
        Graph::new(n, edges).expect("valid")
    }

    pub fn vertices(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
}

/// Satisfiable iff `g` has a proper coloring with `p^e` colors.
///
/// Variables `x_v` with `v_p(x_v) >= 0`; per edge `{u, v}` a variable `w`
/// with `x_v + w - x_u = 0` and `0 <= v_p(w) <= e - 1`.
pub fn encode_coloring(g: &Graph, p: Prime, e: u32) -> Result<Instance> {
    if e == 0 {
        return Err(Error::InvalidInput("e must be positive".into()));
    }
    let mut vars: Vec<String> = (0..g.n).map(|v| format!("x{v}")).collect();
    vars.extend(g.edges.iter().map(|(u, v)| format!("w{u}_{v}")));
    let total = vars.len();
    let mut inst = Instance::new(vars);
    for v in 0..g.n {
        inst.add_valuation(p, v, ValRel::Ge, 0);
    }
    for (k, &(u, v)) in g.edges.iter().enumerate() {
        let w = g.n + k;
        let mut coeffs = vec![Rational::zero(); total];
        coeffs[v] = Rational::one();
        coeffs[w] = Rational::one();
        coeffs[u] = -Rational::one();
        inst.add_equation(coeffs, Rational::zero());
        inst.add_valuation(p, w, ValRel::Le, i64::from(e) - 1);
        inst.add_valuation(p, w, ValRel::Ge, 0);
    }
    Ok(inst)
}

/// Exhaustive `k`-colorability check for graphs with at most 10 vertices.
pub fn brute_color(g: &Graph, k: usize) -> Result<bool> {
    if g.n > 10 {
        return Err(Error::InvalidInput(format!("{} vertices exceed the limit of 10", g.n)));
    }
    let mut adj = vec![Vec::new(); g.n];
    for &(u, v) in &g.edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    fn place(v: usize, colors: &mut [Option<usize>], adj: &[Vec<usize>], k: usize) -> bool {
        if v == colors.len() {
            return true;
        }
        for c in 0..k {
            if adj[v].iter().any(|&u| colors[u] == Some(c)) {
                continue;
            }
            colors[v] = Some(c);
            if place(v + 1, colors, adj, k) {
                return true;
            }
            colors[v] = None;
        }
        false
    }
    let mut colors = vec![None; g.n];
    Ok(place(0, &mut colors, &adj, k))
}
