//! Two-colored rooted trees and the pairwise conditions for near
//! preservation of quadratic invariants.
//!
//! Nodes have color 0 (drift, `dt`) or 1 (diffusion, `dW`). A tree with `n₀`
//! drift nodes and `n₁` diffusion nodes has order `n₀ + n₁/2`; all orders are
//! carried as doubled integers (`2n₀ + n₁`) so half-integer thresholds are
//! compared exactly.
//!
//! For a tableau, every tree carries an elementary weight vector Φ. A pair of
//! trees contributes the residual `Φ(ι)ᵀ M Φ(ι′)`, with `M` one of the defect
//! matrices chosen by the root colors. A method preserves quadratic invariants
//! to order `γ − ε` when all residuals with `ord(ι) + ord(ι′) ≤ γ + 1/2` vanish.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::tableau::{DefectMatrices, Tableau};

/// Default limit on the number of trees [`enumerate_trees`] may build.
pub const DEFAULT_TREE_CAP: usize = 1_000_000;

/// Largest residual table built before giving up.
pub const DEFAULT_PAIR_CAP: usize = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Color {
    /// Drift node, drawn ∘.
    Deterministic = 0,
    /// Diffusion node, drawn •.
    Stochastic = 1,
}

impl Color {
    pub fn digit(self) -> u8 {
        self as u8
    }

    fn weight(self) -> u32 {
        match self {
            Color::Deterministic => 2,
            Color::Stochastic => 1,
        }
    }

    fn from_digit(d: char) -> Option<Self> {
        match d {
            '0' | '₀' => Some(Color::Deterministic),
            '1' | '₁' => Some(Color::Stochastic),
            _ => None,
        }
    }
}

/// Rooted tree with colored nodes and unordered children.
///
/// Children are kept sorted by canonical encoding, so structural equality
/// coincides with tree equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ColoredTree {
    color: Color,
    children: Vec<ColoredTree>,
    encoding: String,
    order2: u32,
}

impl ColoredTree {
    /// The single-node tree τ_k.
    pub fn leaf(color: Color) -> Self {
        Self::new(color, Vec::new())
    }

    /// `[children…]_color`.
    pub fn new(color: Color, mut children: Vec<ColoredTree>) -> Self {
        children.sort_by(|a, b| a.encoding.cmp(&b.encoding));
        let mut encoding = String::with_capacity(3 + children.iter().map(|c| c.encoding.len()).sum::<usize>());
        encoding.push('(');
        encoding.push(char::from(b'0' + color.digit()));
        for c in &children {
            encoding.push_str(&c.encoding);
        }
        encoding.push(')');
        let order2 = color.weight() + children.iter().map(|c| c.order2).sum::<u32>();
        Self {
            color,
            children,
            encoding,
            order2,
        }
    }

    pub fn root_color(&self) -> Color {
        self.color
    }

    pub fn children(&self) -> &[ColoredTree] {
        &self.children
    }

    /// `2·ord(ι) = 2n₀ + n₁`.
    pub fn order2(&self) -> u32 {
        self.order2
    }

    /// `(<color><sorted child encodings>)`; equal trees have equal encodings.
    pub fn canonical_encoding(&self) -> &[u8] {
        self.encoding.as_bytes()
    }

    pub fn node_counts(&self) -> (usize, usize) {
        let own = match self.color {
            Color::Deterministic => (1, 0),
            Color::Stochastic => (0, 1),
        };
        self.children.iter().fold(own, |(a, b), c| {
            let (x, y) = c.node_counts();
            (a + x, b + y)
        })
    }

    /// Elementary weight vector Φ(ι) for a tableau: `e` for a single node;
    /// otherwise the componentwise product of `K·Φ(child)` over the
    /// children, with `K = A` for drift-rooted and `K = B` for
    /// diffusion-rooted children. The root color does not enter.
    pub fn elementary_weight(&self, tab: &Tableau) -> Vec<f64> {
        let s = tab.stages();
        let mut phi = vec![1.0; s];
        for child in &self.children {
            let k = match child.color {
                Color::Deterministic => tab.a(),
                Color::Stochastic => tab.b(),
            };
            let kv = k.mul_vec(&child.elementary_weight(tab));
            for (p, x) in phi.iter_mut().zip(kv) {
                *p *= x;
            }
        }
        phi
    }
}

impl Ord for ColoredTree {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order2
            .cmp(&other.order2)
            .then_with(|| self.encoding.cmp(&other.encoding))
    }
}

impl PartialOrd for ColoredTree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Bracket notation: `t0`, `t1`, `[t1,[t1]1]0`, … Children are listed
/// lowest order first.
impl fmt::Display for ColoredTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.children.is_empty() {
            return write!(f, "t{}", self.color.digit());
        }
        let mut children: Vec<&ColoredTree> = self.children.iter().collect();
        children.sort();
        f.write_str("[")?;
        for (i, c) in children.into_iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]{}", self.color.digit())
    }
}

impl FromStr for ColoredTree {
    type Err = Error;

    /// Accepts the bracket notation printed by `Display`, with `t`/`τ`
    /// leaves and optional whitespace or subscript digits.
    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pos = 0;
        let tree = parse_tree(&chars, &mut pos)?;
        if pos != chars.len() {
            return Err(tree_syntax(s, pos));
        }
        Ok(tree)
    }
}

fn tree_syntax(s: &str, pos: usize) -> Error {
    Error::Parse {
        line: 1,
        msg: format!("malformed tree `{s}` at character {pos}"),
    }
}

fn parse_tree(chars: &[char], pos: &mut usize) -> Result<ColoredTree> {
    let text: String = chars.iter().collect();
    match chars.get(*pos) {
        Some('t') | Some('τ') => {
            *pos += 1;
            let color = chars
                .get(*pos)
                .and_then(|&c| Color::from_digit(c))
                .ok_or_else(|| tree_syntax(&text, *pos))?;
            *pos += 1;
            Ok(ColoredTree::leaf(color))
        }
        Some('[') => {
            *pos += 1;
            let mut children = vec![parse_tree(chars, pos)?];
            while chars.get(*pos) == Some(&',') {
                *pos += 1;
                children.push(parse_tree(chars, pos)?);
            }
            if chars.get(*pos) != Some(&']') {
                return Err(tree_syntax(&text, *pos));
            }
            *pos += 1;
            let color = chars
                .get(*pos)
                .and_then(|&c| Color::from_digit(c))
                .ok_or_else(|| tree_syntax(&text, *pos))?;
            *pos += 1;
            Ok(ColoredTree::new(color, children))
        }
        _ => Err(tree_syntax(&text, *pos)),
    }
}

/// Trees split by root color, each list sorted by `(order2, encoding)`.
#[derive(Clone, Debug, Default)]
pub struct TreeSets {
    /// Γ₀: drift-rooted trees.
    pub gamma0: Vec<ColoredTree>,
    /// Γ₁: diffusion-rooted trees.
    pub gamma1: Vec<ColoredTree>,
}

impl TreeSets {
    pub fn len(&self) -> usize {
        self.gamma0.len() + self.gamma1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &ColoredTree> {
        self.gamma0.iter().chain(&self.gamma1)
    }
}

/// Every distinct colored tree with `2·ord ≤ max_order2`.
pub fn enumerate_trees(max_order2: u32) -> Result<TreeSets> {
    enumerate_trees_capped(max_order2, DEFAULT_TREE_CAP)
}

pub fn enumerate_trees_capped(max_order2: u32, cap: usize) -> Result<TreeSets> {
    if max_order2 == 0 {
        return Err(Error::Domain("maximum doubled order must be at least 1".into()));
    }
    // by_weight[w] holds all trees of doubled order w.
    let mut by_weight: Vec<Vec<ColoredTree>> = vec![Vec::new(); max_order2 as usize + 1];
    let mut total = 0usize;
    for w in 1..=max_order2 {
        let mut level = Vec::new();
        for color in [Color::Deterministic, Color::Stochastic] {
            let Some(rest) = w.checked_sub(color.weight()) else {
                continue;
            };
            // Candidate children: all trees of weight ≤ rest, in a fixed order;
            // multisets are generated as nondecreasing index sequences.
            let pool: Vec<&ColoredTree> = by_weight[1..=rest as usize].iter().flatten().collect();
            let mut stack = Vec::new();
            forests(&pool, 0, rest, &mut stack, &mut |forest| {
                total += 1;
                if total > cap {
                    return Err(Error::TreeCap { cap });
                }
                level.push(ColoredTree::new(color, forest.iter().map(|t| (*t).clone()).collect()));
                Ok(())
            })?;
        }
        level.sort();
        by_weight[w as usize] = level;
    }
    let mut sets = TreeSets::default();
    for t in by_weight.into_iter().flatten() {
        match t.root_color() {
            Color::Deterministic => sets.gamma0.push(t),
            Color::Stochastic => sets.gamma1.push(t),
        }
    }
    Ok(sets)
}

fn forests<'a>(
    pool: &[&'a ColoredTree],
    start: usize,
    remaining: u32,
    stack: &mut Vec<&'a ColoredTree>,
    emit: &mut dyn FnMut(&[&'a ColoredTree]) -> Result<()>,
) -> Result<()> {
    if remaining == 0 {
        return emit(stack);
    }
    // The pool is sorted by weight, so the first heavy tree ends the scan.
    for i in start..pool.len() {
        let t = pool[i];
        if t.order2 > remaining {
            break;
        }
        stack.push(t);
        forests(pool, i, remaining - t.order2, stack, emit)?;
        stack.pop();
    }
    Ok(())
}

/// Which defect matrix a pairing is tested against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    /// Both roots drift: `M⁰`.
    M0,
    /// Drift root on the left, diffusion root on the right: `M*`.
    MStar,
    /// Both roots diffusion: `M¹`.
    M1,
}

impl Family {
    pub fn of(left: Color, right: Color) -> Option<Self> {
        match (left, right) {
            (Color::Deterministic, Color::Deterministic) => Some(Family::M0),
            (Color::Deterministic, Color::Stochastic) => Some(Family::MStar),
            (Color::Stochastic, Color::Stochastic) => Some(Family::M1),
            (Color::Stochastic, Color::Deterministic) => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Family::M0 => "M0",
            Family::MStar => "MSTAR",
            Family::M1 => "M1",
        }
    }

    fn matrix(self, d: &DefectMatrices) -> &Matrix {
        match self {
            Family::M0 => &d.m0,
            Family::MStar => &d.mstar,
            Family::M1 => &d.m1,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One pairwise condition `Φ(ι)ᵀ M Φ(ι′)` and its value for a tableau.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionResidual {
    pub left: ColoredTree,
    pub right: ColoredTree,
    pub family: Family,
    /// `2·(ord(ι) + ord(ι′))`.
    pub order2_sum: u32,
    pub value: f64,
}

/// All pairings with `order2_sum ≤ max_order2_sum`: unordered pairs within
/// Γ₀ and within Γ₁, ordered pairs Γ₀ × Γ₁. Sorted by order sum, then by the
/// two encodings.
pub fn residual_table(tab: &Tableau, max_order2_sum: u32) -> Result<Vec<ConditionResidual>> {
    residual_table_capped(tab, max_order2_sum, DEFAULT_PAIR_CAP)
}

pub fn residual_table_capped(tab: &Tableau, max_order2_sum: u32, pair_cap: usize) -> Result<Vec<ConditionResidual>> {
    if max_order2_sum < 2 {
        return Err(Error::Domain("maximum doubled order sum must be at least 2".into()));
    }
    let sets = enumerate_trees(max_order2_sum - 1)?;
    if pairing_count(&sets, max_order2_sum) > pair_cap as u64 {
        return Err(Error::TreeCap { cap: pair_cap });
    }
    let defects = tab.defect_matrices();
    let weights = |v: &[ColoredTree]| -> Vec<Vec<f64>> {
        v.par_iter().map(|t| t.elementary_weight(tab)).collect()
    };
    let (phi0, phi1) = (weights(&sets.gamma0), weights(&sets.gamma1));

    let pairs = |left: &[ColoredTree],
                 lphi: &[Vec<f64>],
                 right: &[ColoredTree],
                 rphi: &[Vec<f64>],
                 family: Family,
                 unordered: bool|
     -> Vec<ConditionResidual> {
        let m = family.matrix(&defects);
        (0..left.len())
            .into_par_iter()
            .flat_map_iter(|i| {
                let first = if unordered { i } else { 0 };
                let (li, lp) = (&left[i], &lphi[i]);
                (first..right.len()).filter_map(move |j| {
                    let order2_sum = li.order2 + right[j].order2;
                    (order2_sum <= max_order2_sum).then(|| ConditionResidual {
                        left: li.clone(),
                        right: right[j].clone(),
                        family,
                        order2_sum,
                        value: m.bilinear(lp, &rphi[j]),
                    })
                })
            })
            .collect()
    };

    let mut table = pairs(&sets.gamma0, &phi0, &sets.gamma0, &phi0, Family::M0, true);
    table.extend(pairs(&sets.gamma0, &phi0, &sets.gamma1, &phi1, Family::MStar, false));
    table.extend(pairs(&sets.gamma1, &phi1, &sets.gamma1, &phi1, Family::M1, true));
    debug_assert_eq!(table.len() as u64, pairing_count(&sets, max_order2_sum));
    table.par_sort_by(|a, b| {
        a.order2_sum
            .cmp(&b.order2_sum)
            .then_with(|| a.left.encoding.cmp(&b.left.encoding))
            .then_with(|| a.right.encoding.cmp(&b.right.encoding))
    });
    Ok(table)
}

/// Number of rows `residual_table` would produce.
fn pairing_count(sets: &TreeSets, max_order2_sum: u32) -> u64 {
    let hist = |v: &[ColoredTree]| {
        let mut h = vec![0u64; max_order2_sum as usize + 1];
        for t in v {
            h[t.order2 as usize] += 1;
        }
        h
    };
    let (h0, h1) = (hist(&sets.gamma0), hist(&sets.gamma1));
    let mut total = 0u64;
    for w in 1..=max_order2_sum as usize {
        for v in w..=max_order2_sum as usize - w {
            let same = |h: &[u64]| if v == w { h[w] * (h[w] + 1) / 2 } else { h[w] * h[v] };
            total += same(&h0) + same(&h1);
        }
        total += h0[w] * h1[1..=max_order2_sum as usize - w].iter().sum::<u64>();
    }
    total
}

/// Doubled QI-preservation order `2γ`: the largest value up to `cap_order2`
/// such that every residual with `order2_sum ≤ 2γ + 1` is within `tol`.
pub fn qi_order(tab: &Tableau, cap_order2: u32, tol: f64) -> Result<u32> {
    let table = residual_table(tab, cap_order2 + 1)?;
    Ok(qi_order_from_table(&table, cap_order2, tol))
}

pub fn qi_order_from_table(table: &[ConditionResidual], cap_order2: u32, tol: f64) -> u32 {
    match first_violation(table, tol) {
        Some(r) => r.order2_sum.saturating_sub(2).min(cap_order2),
        None => cap_order2,
    }
}

/// The lowest-order residual exceeding `tol`, if any.
pub fn first_violation(table: &[ConditionResidual], tol: f64) -> Option<&ConditionResidual> {
    // Written as a negated `<=` so NaN counts as a violation.
    table.iter().find(|r| !(r.value.abs() <= tol))
}

/// Format a doubled order as a decimal half-integer (`5` → `2.5`).
pub fn format_order2(order2: u32) -> String {
    if order2.is_multiple_of(2) {
        format!("{}.0", order2 / 2)
    } else {
        format!("{}.5", order2 / 2)
    }
}

/// Output layout for residual tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TableFormat {
    #[default]
    Text,
    Csv,
}

impl FromStr for TableFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "text" => Ok(TableFormat::Text),
            "csv" => Ok(TableFormat::Csv),
            _ => Err(Error::Config(format!("unknown format `{s}` (expected text or csv)"))),
        }
    }
}

pub fn render_residuals(table: &[ConditionResidual], format: TableFormat) -> String {
    let mut out = String::new();
    match format {
        TableFormat::Csv => {
            out.push_str("family,left_tree,right_tree,order_sum,value\n");
            for r in table {
                out.push_str(&format!(
                    "{},\"{}\",\"{}\",{},{:e}\n",
                    r.family,
                    r.left,
                    r.right,
                    format_order2(r.order2_sum),
                    r.value
                ));
            }
        }
        TableFormat::Text => {
            let lw = table.iter().map(|r| r.left.to_string().len()).max().unwrap_or(0).max(9);
            let rw = table.iter().map(|r| r.right.to_string().len()).max().unwrap_or(0).max(10);
            out.push_str(&format!(
                "{:<6} {:<lw$} {:<rw$} {:>9} {:>13}\n",
                "family", "left_tree", "right_tree", "order_sum", "value"
            ));
            for r in table {
                out.push_str(&format!(
                    "{:<6} {:<lw$} {:<rw$} {:>9} {:>13.6e}\n",
                    r.family.label(),
                    r.left.to_string(),
                    r.right.to_string(),
                    format_order2(r.order2_sum),
                    r.value
                ));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tableau::Builtin;

    fn t(s: &str) -> ColoredTree {
        s.parse().unwrap()
    }

    #[test]
    fn doubled_orders() {
        assert_eq!(t("t0").order2(), 2);
        assert_eq!(t("t1").order2(), 1);
        assert_eq!(t("[[t1]1]1").order2(), 3);
        assert_eq!(t("[t0,t1]0").node_counts(), (2, 1));
    }

    #[test]
    fn encodings_ignore_child_order() {
        assert_eq!(t("[t0,t1]0").canonical_encoding(), t("[t1,t0]0").canonical_encoding());
        assert_ne!(t("t0").canonical_encoding(), t("t1").canonical_encoding());
        assert_eq!(t("[[t1]1,t1]1"), t("[t1,[t1]1]1"));
        assert_eq!(t("t0").canonical_encoding(), b"(0)");
    }

    #[test]
    fn display_parses_back() {
        for s in ["t1", "[t1]0", "[t1,[t1]1]1", "[[[t1]1]0]1"] {
            assert_eq!(t(s).to_string(), s);
        }
        assert!("[t1".parse::<ColoredTree>().is_err());
        assert!("t2".parse::<ColoredTree>().is_err());
        assert!("[t1]1x".parse::<ColoredTree>().is_err());
    }

    #[test]
    fn small_enumerations() {
        let sets = enumerate_trees(1).unwrap();
        assert!(sets.gamma0.is_empty());
        assert_eq!(sets.gamma1, vec![t("t1")]);
        let sets = enumerate_trees(2).unwrap();
        assert_eq!(sets.gamma0, vec![t("t0")]);
        assert_eq!(sets.gamma1, vec![t("t1"), t("[t1]1")]);
        let sets = enumerate_trees(5).unwrap();
        assert_eq!((sets.gamma0.len(), sets.gamma1.len()), (12, 32));
    }

    #[test]
    fn enumeration_cap() {
        assert!(matches!(enumerate_trees_capped(8, 100), Err(Error::TreeCap { cap: 100 })));
        assert!(matches!(
            residual_table_capped(&Builtin::Midpoint.tableau(), 8, 100),
            Err(Error::TreeCap { cap: 100 })
        ));
        assert!(enumerate_trees(0).is_err());
    }

    #[test]
    fn elementary_weights_of_scheme_2_1() {
        let tab = Builtin::Scheme21.tableau();
        assert_eq!(t("t1").elementary_weight(&tab), vec![1.0; 3]);
        let be = t("[t1]1").elementary_weight(&tab);
        assert_eq!(be, vec![0.0, 0.25, 1.0]);
        let b2e = t("[[t1]1]1").elementary_weight(&tab);
        assert!((b2e[2] - 0.375).abs() < 1e-15 && b2e[0] == 0.0 && b2e[1] == 0.0);
        let sq = t("[t1,t1]1").elementary_weight(&Builtin::Scheme22.tableau());
        assert_eq!(sq, vec![0.0, 0.25, 1.0]);
    }

    #[test]
    fn midpoint_residuals_vanish() {
        let table = residual_table(&Builtin::Midpoint.tableau(), 6).unwrap();
        assert!(!table.is_empty());
        assert!(table.iter().all(|r| r.value == 0.0));
        assert_eq!(qi_order(&Builtin::Midpoint.tableau(), 10, 1e-12).unwrap(), 10);
    }

    #[test]
    fn scheme_residual_findings() {
        let s1 = Builtin::Scheme21.tableau();
        let table = residual_table(&s1, 6).unwrap();
        assert!(table.iter().filter(|r| r.order2_sum <= 4).all(|r| r.value.abs() <= 1e-12));
        let hit = table
            .iter()
            .find(|r| r.left == t("[t1]1") && r.right == t("[[t1]1]1"))
            .unwrap();
        assert_eq!(hit.family, Family::M1);
        assert_eq!(hit.order2_sum, 5);
        assert!((hit.value + 1.0 / 64.0).abs() < 1e-14);
        assert_eq!(qi_order(&s1, 10, 1e-12).unwrap(), 3);
        assert_eq!(qi_order(&Builtin::Scheme22.tableau(), 10, 1e-12).unwrap(), 4);
    }

    #[test]
    fn table_is_sorted_and_families_consistent() {
        let table = residual_table(&Builtin::Scheme22.tableau(), 5).unwrap();
        for w in table.windows(2) {
            assert!(w[0].order2_sum <= w[1].order2_sum);
        }
        for r in &table {
            assert_eq!(Family::of(r.left.root_color(), r.right.root_color()), Some(r.family));
            assert_eq!(r.order2_sum, r.left.order2() + r.right.order2());
        }
        // Both (τ₀, [τ₁]₁) and ([τ₁]₀, τ₁) appear as distinct M* pairs.
        assert!(table.iter().any(|r| r.left == t("t0") && r.right == t("[t1]1")));
        assert!(table.iter().any(|r| r.left == t("[t1]0") && r.right == t("t1")));
    }

    #[test]
    fn order_formatting() {
        assert_eq!(format_order2(5), "2.5");
        assert_eq!(format_order2(4), "2.0");
    }

    #[test]
    fn render_csv() {
        let table = residual_table(&Builtin::Scheme21.tableau(), 5).unwrap();
        let csv = render_residuals(&table, TableFormat::Csv);
        assert!(csv.starts_with("family,left_tree,right_tree,order_sum,value\n"));
        assert!(csv.contains("M1,\"[t1]1\",\"[[t1]1]1\",2.5,"));
    }
}
