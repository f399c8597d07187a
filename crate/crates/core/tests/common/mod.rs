//! Independent oracles shared by the integration and acceptance tests:
//! exact rational defect matrices and residuals, a brute-force colored tree
//! generator, and the published Γ₀/Γ₁ listings through order 2.5.

#![allow(dead_code)]

use std::collections::BTreeSet;

use num_rational::Ratio;
use srkqi::trees::{Color, ColoredTree};

pub type Q = Ratio<i64>;

pub fn q(p: i64, d: i64) -> Q {
    Q::new(p, d)
}

pub fn to_f64(x: Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

/// Rational tableau `(A, B, α, β)`.
#[derive(Clone, Debug)]
pub struct ExactTableau {
    pub a: Vec<Vec<Q>>,
    pub b: Vec<Vec<Q>>,
    pub alpha: Vec<Q>,
    pub beta: Vec<Q>,
}

impl ExactTableau {
    fn same_coefficients(a: Vec<Vec<Q>>, w: Vec<Q>) -> Self {
        Self {
            b: a.clone(),
            a,
            beta: w.clone(),
            alpha: w,
        }
    }

    pub fn scheme_2_1() -> Self {
        let z = q(0, 1);
        Self::same_coefficients(
            vec![vec![z, z, z], vec![q(1, 4), z, z], vec![q(-1, 2), q(3, 2), z]],
            vec![z, q(2, 3), q(1, 3)],
        )
    }

    pub fn scheme_2_2() -> Self {
        let z = q(0, 1);
        Self::same_coefficients(
            vec![vec![z, z, z], vec![q(1, 2), z, z], vec![z, q(1, 1), z]],
            vec![q(1, 4), q(1, 2), q(1, 4)],
        )
    }

    pub fn midpoint() -> Self {
        Self::same_coefficients(vec![vec![q(1, 2)]], vec![q(1, 1)])
    }

    pub fn stages(&self) -> usize {
        self.alpha.len()
    }

    /// `(M⁰, M¹, M*)` straight from the defining sums.
    pub fn defects(&self) -> [Vec<Vec<Q>>; 3] {
        let s = self.stages();
        let (a, b, al, be) = (&self.a, &self.b, &self.alpha, &self.beta);
        let build = |f: &dyn Fn(usize, usize) -> Q| -> Vec<Vec<Q>> {
            (0..s).map(|i| (0..s).map(|j| f(i, j)).collect()).collect()
        };
        [
            build(&|i, j| al[i] * a[i][j] + al[j] * a[j][i] - al[i] * al[j]),
            build(&|i, j| be[i] * b[i][j] + be[j] * b[j][i] - be[i] * be[j]),
            build(&|i, j| al[i] * b[i][j] + a[j][i] * be[j] - al[i] * be[j]),
        ]
    }
}

/// Oracle tree: color digit and children, no ordering imposed.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Node {
    pub color: u8,
    pub kids: Vec<Node>,
}

impl Node {
    pub fn order2(&self) -> u32 {
        (2 - u32::from(self.color)) + self.kids.iter().map(Node::order2).sum::<u32>()
    }

    /// Prefix form `c(k₁ k₂ …)` with children sorted; equal iff isomorphic.
    pub fn canon(&self) -> String {
        let mut kids: Vec<String> = self.kids.iter().map(Node::canon).collect();
        kids.sort();
        if kids.is_empty() {
            self.color.to_string()
        } else {
            format!("{}({})", self.color, kids.join(" "))
        }
    }

    pub fn from_tree(t: &ColoredTree) -> Self {
        Node {
            color: match t.root_color() {
                Color::Deterministic => 0,
                Color::Stochastic => 1,
            },
            kids: t.children().iter().map(Node::from_tree).collect(),
        }
    }

    /// Rational elementary weight.
    pub fn weight(&self, tab: &ExactTableau) -> Vec<Q> {
        let s = tab.stages();
        let mut phi = vec![q(1, 1); s];
        for kid in &self.kids {
            let k = if kid.color == 0 { &tab.a } else { &tab.b };
            let w = kid.weight(tab);
            for (i, p) in phi.iter_mut().enumerate() {
                *p *= (0..s).map(|j| k[i][j] * w[j]).sum::<Q>();
            }
        }
        phi
    }
}

pub fn bilinear(m: &[Vec<Q>], u: &[Q], v: &[Q]) -> Q {
    let mut acc = q(0, 1);
    for (i, ui) in u.iter().enumerate() {
        for (j, vj) in v.iter().enumerate() {
            acc += *ui * m[i][j] * *vj;
        }
    }
    acc
}

/// Exact residual of a pairing; the family follows from the root colors.
pub fn exact_residual(tab: &ExactTableau, left: &Node, right: &Node) -> Q {
    let [m0, m1, mstar] = tab.defects();
    let m = match (left.color, right.color) {
        (0, 0) => m0,
        (1, 1) => m1,
        (0, 1) => mstar,
        _ => panic!("diffusion-rooted left with drift-rooted right is not a pairing"),
    };
    bilinear(&m, &left.weight(tab), &right.weight(tab))
}

/// Every ordered child sequence with total doubled order ≤ `budget`.
fn sequences(budget: u32) -> Vec<Vec<Node>> {
    let mut out = vec![vec![]];
    for first in brute_force_ordered(budget) {
        let rest_budget = budget - first.order2();
        for rest in sequences(rest_budget) {
            let mut seq = vec![first.clone()];
            seq.extend(rest);
            out.push(seq);
        }
    }
    out
}

/// All plane trees (children ordered) with doubled order ≤ `budget`.
fn brute_force_ordered(budget: u32) -> Vec<Node> {
    let mut out = Vec::new();
    for color in [0u8, 1] {
        let w = 2 - u32::from(color);
        if w > budget {
            continue;
        }
        for kids in sequences(budget - w) {
            out.push(Node { color, kids });
        }
    }
    out
}

/// Distinct colored trees with doubled order ≤ `budget`, as canonical
/// strings mapped to a representative.
pub fn brute_force_trees(budget: u32) -> Vec<(String, Node)> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for t in brute_force_ordered(budget) {
        let c = t.canon();
        if seen.insert(c.clone()) {
            out.push((c, t));
        }
    }
    out.sort_by(|a, b| a.1.order2().cmp(&b.1.order2()).then(a.0.cmp(&b.0)));
    out
}

/// Drift-rooted trees of order ≤ 2.5 as printed in the worked example.
pub const PRINTED_GAMMA0: [&str; 12] = [
    "t0",
    "[t1]0",
    "[t1,t1]0",
    "[[t1]1]0",
    "[t0]0",
    "[[t1]0]0",
    "[[t0]1]0",
    "[t0,t1]0",
    "[t1,t1,t1]0",
    "[t1,[t1]1]0",
    "[[[t1]1]1]0",
    "[[t1,t1]1]0",
];

/// Diffusion-rooted trees of order ≤ 2.5 as printed in the worked example.
pub const PRINTED_GAMMA1: [&str; 32] = [
    "t1",
    "[t1]1",
    "[t0]1",
    "[[t1]1]1",
    "[t1,t1]1",
    "[t1,[t1]1]1",
    "[[[t1]1]1]1",
    "[[t1,t1]1]1",
    "[t1,t1,t1]1",
    "[[t0]1]1",
    "[t1,t0]1",
    "[[t1]0]1",
    "[t0,t0]1",
    "[[t0]0]1",
    "[[[t0]1]1]1",
    "[[t1,t0]1]1",
    "[t0,[t1]1]1",
    "[t0,t1,t1]1",
    "[t1,[t0]1]1",
    "[[t1]1,[t1]1]1",
    "[t1,[[t1]1]1]1",
    "[t1,t1,[t1]1]1",
    "[t1,[t1,t1]1]1",
    "[[[[t1]1]1]1]1",
    "[[[t1,t1]1]1]1",
    "[[[t1]1,t1]1]1",
    "[[t1,t1,t1]1]1",
    "[t1,t1,t1,t1]1",
    "[[[t1]0]1]1",
    "[t1,[t1]0]1",
    "[[t1,t1]0]1",
    "[[[t1]1]0]1",
];

/// Canonical strings of a printed listing, parsed through the library.
pub fn printed_canon(list: &[&str]) -> Vec<String> {
    list.iter()
        .map(|s| Node::from_tree(&s.parse::<ColoredTree>().expect("printed tree parses")).canon())
        .collect()
}
