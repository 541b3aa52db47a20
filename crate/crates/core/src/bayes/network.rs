//! Discrete causal networks: the interchange document, structural validation
//! and the validated, immutable [`CausalNetwork`].
//!
//! Every node owns one conditional table indexed by the cartesian product of
//! its parents' states. Parents are always taken in the order the variables
//! are declared in the document, and a row is keyed by the parents' state
//! labels joined with `|` (the empty string for root nodes).

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::BayesError;

/// Maximum allowed deviation of a table row sum from 1.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Row drift above which [`NetworkDocument::renormalize`] emits a warning.
pub const RENORMALIZE_WARN_DRIFT: f64 = 1e-6;

/// Separator between parent state labels in a row key.
pub const KEY_SEPARATOR: char = '|';

/// A discrete random variable with an ordered list of state labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub id: String,
    pub states: Vec<String>,
}

impl Variable {
    pub fn new<I, S>(id: impl Into<String>, states: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            id: id.into(),
            states: states.into_iter().map(Into::into).collect(),
        }
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }
}

/// Conditional table of one variable as it appears in the interchange document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutDocument {
    pub variable: String,
    /// Parent order used for the row keys. Optional on input; always written on output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parents: Option<Vec<String>>,
    pub rows: BTreeMap<String, Vec<f64>>,
}

/// JSON-shaped interchange form of a network. May be invalid; see [`validate_network`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkDocument {
    pub variables: Vec<Variable>,
    #[serde(default)]
    pub edges: Vec<(String, String)>,
    #[serde(default)]
    pub cuts: Vec<CutDocument>,
}

impl NetworkDocument {
    pub fn from_json(text: &str) -> Result<Self, BayesError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Canonical pretty-printed JSON. Identical documents produce identical bytes.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network document serializes")
    }

    /// Divides every row with a positive finite sum by that sum.
    ///
    /// Intended for lenient imports of hand-edited tables. Returns the rows whose
    /// drift exceeded [`RENORMALIZE_WARN_DRIFT`] and logs a warning for each.
    pub fn renormalize(&mut self) -> Vec<RowDrift> {
        let mut drifted = Vec::new();
        for cut in &mut self.cuts {
            for (key, row) in cut.rows.iter_mut() {
                let sum: f64 = row.iter().sum();
                if !(sum.is_finite() && sum > 0.0) {
                    continue;
                }
                let drift = (sum - 1.0).abs();
                if drift > RENORMALIZE_WARN_DRIFT {
                    log::warn!("row `{}` of `{}` summed to {sum}; renormalized", key, cut.variable);
                    drifted.push(RowDrift {
                        variable: cut.variable.clone(),
                        row: key.clone(),
                        sum,
                    });
                }
                if sum != 1.0 {
                    row.iter_mut().for_each(|p| *p /= sum);
                }
            }
        }
        drifted
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowDrift {
    pub variable: String,
    pub row: String,
    pub sum: f64,
}

/// A single invariant violation, attributed to a variable where possible.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub variable: Option<String>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.variable {
            Some(v) => write!(f, "{v}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn mentions(&self, needle: &str) -> bool {
        self.violations.iter().any(|v| v.message.contains(needle))
    }

    fn push(&mut self, variable: Option<&str>, message: impl Into<String>) {
        self.violations.push(Violation {
            variable: variable.map(str::to_owned),
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        let parts: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join("; "))
    }
}

fn pretty(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

/// Checks every structural and numerical invariant of a network document.
///
/// Returns an empty report iff the document describes a valid network.
pub fn validate_network(doc: &NetworkDocument) -> ValidationReport {
    let mut report = ValidationReport::default();

    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, var) in doc.variables.iter().enumerate() {
        let id = var.id.as_str();
        if id.is_empty() {
            report.push(None, format!("variable #{i} has an empty id"));
        }
        if index.insert(id, i).is_some() {
            report.push(Some(id), "duplicate variable id");
        }
        if var.states.len() < 2 {
            report.push(Some(id), format!("needs at least 2 states, has {}", var.states.len()));
        }
        let mut seen = BTreeSet::new();
        for s in &var.states {
            if !seen.insert(s.as_str()) {
                report.push(Some(id), format!("duplicate state label `{s}`"));
            }
            if s.contains(KEY_SEPARATOR) {
                report.push(Some(id), format!("state label `{s}` contains `{KEY_SEPARATOR}`"));
            }
        }
    }

    let n = doc.variables.len();
    let mut parent_sets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (from, to) in &doc.edges {
        let (Some(&p), Some(&c)) = (index.get(from.as_str()), index.get(to.as_str())) else {
            let missing = if index.contains_key(from.as_str()) { to } else { from };
            report.push(
                Some(missing),
                format!("edge {from} -> {to} references an unknown variable"),
            );
            continue;
        };
        if p == c {
            report.push(Some(from), "self loop; cycle detected");
            continue;
        }
        if !parent_sets[c].insert(p) {
            report.push(Some(to), format!("duplicate edge {from} -> {to}"));
        }
    }

    if let Some(cycle) = find_cycle(&parent_sets) {
        let names: Vec<&str> = cycle.iter().map(|&i| doc.variables[i].id.as_str()).collect();
        report.push(Some(names[0]), format!("cycle detected: {}", names.join(" -> ")));
    }

    let mut cut_count = vec![0usize; n];
    for cut in &doc.cuts {
        let Some(&owner) = index.get(cut.variable.as_str()) else {
            report.push(Some(&cut.variable), "table for unknown variable");
            continue;
        };
        cut_count[owner] += 1;
        if cut_count[owner] > 1 {
            report.push(Some(&cut.variable), "more than one table");
            continue;
        }
        check_cut(doc, owner, &parent_sets[owner], cut, &mut report);
    }
    for (i, count) in cut_count.iter().enumerate() {
        if *count == 0 {
            report.push(Some(&doc.variables[i].id), "missing table");
        }
    }
    report
}

fn check_cut(
    doc: &NetworkDocument,
    owner: usize,
    parents: &BTreeSet<usize>,
    cut: &CutDocument,
    report: &mut ValidationReport,
) {
    let id = cut.variable.as_str();
    let parent_ids: Vec<&str> = parents.iter().map(|&p| doc.variables[p].id.as_str()).collect();
    if let Some(declared) = &cut.parents {
        if declared.iter().map(String::as_str).ne(parent_ids.iter().copied()) {
            report.push(
                Some(id),
                format!(
                    "table parents [{}] do not match graph parents in declaration order [{}]",
                    declared.join(", "),
                    parent_ids.join(", ")
                ),
            );
            return;
        }
    }
    // Parent cardinalities may be invalid if a parent variable is itself malformed;
    // row-key checks then become meaningless.
    if parents.iter().any(|&p| doc.variables[p].states.len() < 2) {
        return;
    }
    let parent_vars: Vec<&Variable> = parents.iter().map(|&p| &doc.variables[p]).collect();
    let expected: BTreeSet<String> = row_keys(&parent_vars).into_iter().collect();
    let card = doc.variables[owner].states.len();

    for key in &expected {
        if !cut.rows.contains_key(key) {
            report.push(Some(id), format!("missing row `{key}`"));
        }
    }
    for (key, row) in &cut.rows {
        if !expected.contains(key) {
            report.push(Some(id), format!("unexpected row `{key}`"));
            continue;
        }
        if row.len() != card {
            report.push(
                Some(id),
                format!("row `{key}` has {} entries, expected {card}", row.len()),
            );
            continue;
        }
        if let Some(bad) = row.iter().find(|p| !(p.is_finite() && (0.0..=1.0).contains(*p))) {
            report.push(Some(id), format!("row `{key}` has entry {bad} outside [0, 1]"));
            continue;
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            report.push(Some(id), format!("row `{key}`: row sum {} ≠ 1", pretty(sum)));
        }
    }
}

/// Keys of all parent-state combinations, first parent most significant.
pub(crate) fn row_keys(parents: &[&Variable]) -> Vec<String> {
    let mut keys = vec![String::new()];
    for (depth, p) in parents.iter().enumerate() {
        keys = keys
            .iter()
            .flat_map(|prefix| {
                p.states.iter().map(move |s| {
                    if depth == 0 {
                        s.clone()
                    } else {
                        format!("{prefix}{KEY_SEPARATOR}{s}")
                    }
                })
            })
            .collect();
    }
    keys
}

/// Returns one directed cycle (as a node list closing on its first node) if any exists.
fn find_cycle(parents: &[BTreeSet<usize>]) -> Option<Vec<usize>> {
    let n = parents.len();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (c, ps) in parents.iter().enumerate() {
        for &p in ps {
            children[p].push(c);
        }
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut mark = vec![0u8; n];
    let mut stack_path = Vec::new();
    for start in 0..n {
        if mark[start] != 0 {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        mark[start] = 1;
        stack_path.push(start);
        while let Some((node, next)) = stack.last_mut() {
            if let Some(&child) = children[*node].get(*next) {
                *next += 1;
                match mark[child] {
                    0 => {
                        mark[child] = 1;
                        stack_path.push(child);
                        stack.push((child, 0));
                    }
                    1 => {
                        let pos = stack_path.iter().position(|&x| x == child).unwrap();
                        let mut cycle = stack_path[pos..].to_vec();
                        cycle.push(child);
                        return Some(cycle);
                    }
                    _ => {}
                }
            } else {
                mark[*node] = 2;
                stack_path.pop();
                stack.pop();
            }
        }
    }
    None
}

/// A validated, immutable discrete Bayesian network.
///
/// Tables are stored densely: the row for a parent assignment is found by a
/// mixed-radix index over the parents (first parent most significant).
#[derive(Debug, Clone, PartialEq)]
pub struct CausalNetwork {
    variables: Vec<Variable>,
    index: HashMap<String, usize>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    tables: Vec<Vec<f64>>,
    topo: Vec<usize>,
}

impl CausalNetwork {
    pub fn from_document(doc: &NetworkDocument) -> Result<Self, BayesError> {
        let report = validate_network(doc);
        if !report.is_valid() {
            return Err(BayesError::InvalidNetwork(report));
        }
        let variables = doc.variables.clone();
        let index: HashMap<String, usize> = variables.iter().enumerate().map(|(i, v)| (v.id.clone(), i)).collect();
        let n = variables.len();
        let mut parent_sets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for (from, to) in &doc.edges {
            parent_sets[index[to]].insert(index[from]);
        }
        let parents: Vec<Vec<usize>> = parent_sets.into_iter().map(|s| s.into_iter().collect()).collect();
        let mut children = vec![Vec::new(); n];
        for (c, ps) in parents.iter().enumerate() {
            for &p in ps {
                children[p].push(c);
            }
        }

        let mut tables = vec![Vec::new(); n];
        for cut in &doc.cuts {
            let owner = index[&cut.variable];
            let parent_vars: Vec<&Variable> = parents[owner].iter().map(|&p| &variables[p]).collect();
            tables[owner] = row_keys(&parent_vars)
                .iter()
                .flat_map(|k| cut.rows[k].iter().copied())
                .collect();
        }

        let topo = topological_order(&parents, &children);
        Ok(Self {
            variables,
            index,
            parents,
            children,
            tables,
            topo,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, BayesError> {
        Self::from_document(&NetworkDocument::from_json(text)?)
    }

    pub fn to_document(&self) -> NetworkDocument {
        let mut edges = Vec::new();
        for (c, ps) in self.parents.iter().enumerate() {
            for &p in ps {
                edges.push((self.variables[p].id.clone(), self.variables[c].id.clone()));
            }
        }
        let cuts = (0..self.len())
            .map(|v| {
                let parent_vars: Vec<&Variable> = self.parents[v].iter().map(|&p| &self.variables[p]).collect();
                let card = self.cardinality(v);
                let rows = row_keys(&parent_vars)
                    .into_iter()
                    .zip(self.tables[v].chunks(card))
                    .map(|(k, r)| (k, r.to_vec()))
                    .collect();
                CutDocument {
                    variable: self.variables[v].id.clone(),
                    parents: Some(parent_vars.iter().map(|p| p.id.clone()).collect()),
                    rows,
                }
            })
            .collect();
        NetworkDocument {
            variables: self.variables.clone(),
            edges,
            cuts,
        }
    }

    pub fn to_json(&self) -> String {
        self.to_document().to_json()
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, idx: usize) -> &Variable {
        &self.variables[idx]
    }

    pub fn index_of(&self, id: &str) -> Result<usize, BayesError> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| BayesError::UnknownVariable(id.to_owned()))
    }

    pub fn get(&self, id: &str) -> Option<&Variable> {
        self.index.get(id).map(|&i| &self.variables[i])
    }

    pub fn state_index(&self, var: usize, label: &str) -> Result<usize, BayesError> {
        self.variables[var]
            .state_index(label)
            .ok_or_else(|| BayesError::UnknownState {
                variable: self.variables[var].id.clone(),
                state: label.to_owned(),
            })
    }

    pub fn cardinality(&self, var: usize) -> usize {
        self.variables[var].states.len()
    }

    pub fn parents(&self, var: usize) -> &[usize] {
        &self.parents[var]
    }

    pub fn children(&self, var: usize) -> &[usize] {
        &self.children[var]
    }

    /// Variables in an order where every parent precedes its children.
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    /// Flat table of `var`: rows in parent mixed-radix order, each of length `cardinality(var)`.
    pub fn table(&self, var: usize) -> &[f64] {
        &self.tables[var]
    }

    /// Row index for the given full assignment (only parents of `var` are read).
    pub fn row_index(&self, var: usize, assignment: &[usize]) -> usize {
        self.parents[var]
            .iter()
            .fold(0, |acc, &p| acc * self.cardinality(p) + assignment[p])
    }

    pub fn row(&self, var: usize, row: usize) -> &[f64] {
        let card = self.cardinality(var);
        &self.tables[var][row * card..(row + 1) * card]
    }

    /// Probability of a complete assignment: the product of one table entry per variable.
    pub fn joint_probability<K, V>(&self, assignment: &BTreeMap<K, V>) -> Result<f64, BayesError>
    where
        K: AsRef<str> + Ord,
        V: AsRef<str>,
    {
        let mut dense = vec![usize::MAX; self.len()];
        for (k, v) in assignment {
            let var = self.index_of(k.as_ref())?;
            dense[var] = self.state_index(var, v.as_ref())?;
        }
        if let Some(missing) = dense.iter().position(|&s| s == usize::MAX) {
            return Err(BayesError::MissingAssignment(self.variables[missing].id.clone()));
        }
        Ok(self.joint_probability_dense(&dense))
    }

    /// Same as [`joint_probability`](Self::joint_probability) over state indices.
    pub fn joint_probability_dense(&self, assignment: &[usize]) -> f64 {
        (0..self.len())
            .map(|v| self.row(v, self.row_index(v, assignment))[assignment[v]])
            .product()
    }

    /// Returns a copy with one table row replaced. `parent_states` follows the
    /// canonical parent order (see [`parents`](Self::parents)).
    pub fn with_row(&self, variable: &str, parent_states: &[&str], row: &[f64]) -> Result<Self, BayesError> {
        let var = self.index_of(variable)?;
        let key = parent_states.join(&KEY_SEPARATOR.to_string());
        let mut doc = self.to_document();
        let cut = &mut doc.cuts[var];
        if !cut.rows.contains_key(&key) {
            return Err(BayesError::UnknownRow {
                variable: variable.to_owned(),
                row: key,
            });
        }
        cut.rows.insert(key, row.to_vec());
        Self::from_document(&doc)
    }
}

fn topological_order(parents: &[Vec<usize>], children: &[Vec<usize>]) -> Vec<usize> {
    let mut indegree: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut queue: VecDeque<usize> = (0..parents.len()).filter(|&v| indegree[v] == 0).collect();
    let mut order = Vec::with_capacity(parents.len());
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &c in &children[v] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                queue.push_back(c);
            }
        }
    }
    order
}

/// Incremental construction of a network. Rows are given in canonical order
/// (first parent most significant, parents in declaration order).
#[derive(Debug, Default, Clone)]
pub struct NetworkBuilder {
    variables: Vec<Variable>,
    edges: Vec<(String, String)>,
    rows: HashMap<String, Vec<Vec<f64>>>,
}

impl NetworkBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn variable<I, S>(mut self, id: &str, states: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.variables.push(Variable::new(id, states));
        self
    }

    pub fn edge(mut self, parent: &str, child: &str) -> Self {
        self.edges.push((parent.to_owned(), child.to_owned()));
        self
    }

    pub fn table(mut self, id: &str, rows: Vec<Vec<f64>>) -> Self {
        self.rows.insert(id.to_owned(), rows);
        self
    }

    /// Produces the document without validating it.
    pub fn document(&self) -> NetworkDocument {
        let index: HashMap<&str, usize> = self
            .variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.id.as_str(), i))
            .collect();
        let mut cuts = Vec::new();
        for var in &self.variables {
            let Some(rows) = self.rows.get(&var.id) else {
                continue;
            };
            let mut parent_idx: Vec<usize> = self
                .edges
                .iter()
                .filter(|(_, c)| c == &var.id)
                .filter_map(|(p, _)| index.get(p.as_str()).copied())
                .collect();
            parent_idx.sort_unstable();
            parent_idx.dedup();
            let parent_vars: Vec<&Variable> = parent_idx.iter().map(|&i| &self.variables[i]).collect();
            let keys = row_keys(&parent_vars);
            cuts.push(CutDocument {
                variable: var.id.clone(),
                parents: Some(parent_vars.iter().map(|v| v.id.clone()).collect()),
                rows: keys.into_iter().zip(rows.iter().cloned()).collect(),
            });
        }
        NetworkDocument {
            variables: self.variables.clone(),
            edges: self.edges.clone(),
            cuts,
        }
    }

    pub fn build(&self) -> Result<CausalNetwork, BayesError> {
        CausalNetwork::from_document(&self.document())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coin() -> NetworkBuilder {
        NetworkBuilder::new()
            .variable("a", ["h", "t"])
            .table("a", vec![vec![0.5, 0.5]])
    }

    #[test]
    fn single_binary_node_is_valid() {
        let report = validate_network(&coin().document());
        assert!(report.is_valid(), "{report}");
    }

    #[test]
    fn two_node_cycle_is_reported() {
        let doc = NetworkBuilder::new()
            .variable("a", ["0", "1"])
            .variable("b", ["0", "1"])
            .edge("a", "b")
            .edge("b", "a")
            .table("a", vec![vec![0.5, 0.5]; 2])
            .table("b", vec![vec![0.5, 0.5]; 2])
            .document();
        let report = validate_network(&doc);
        assert!(report.mentions("cycle detected"), "{report}");
        assert!(report.violations.iter().any(|v| v.variable.is_some()));
    }

    #[test]
    fn bad_row_sum_is_reported_with_value() {
        let doc = NetworkBuilder::new()
            .variable("a", ["h", "t"])
            .table("a", vec![vec![0.7, 0.2]])
            .document();
        let report = validate_network(&doc);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].variable.as_deref(), Some("a"));
        assert!(report.mentions("row sum 0.9 ≠ 1"), "{report}");
    }

    #[test]
    fn structural_violations() {
        let doc = NetworkDocument {
            variables: vec![
                Variable::new("a", ["x", "x"]),
                Variable::new("a", ["only"]),
                Variable::new("c", ["p|q", "r"]),
            ],
            edges: vec![("a".into(), "zzz".into())],
            cuts: vec![CutDocument {
                variable: "ghost".into(),
                parents: None,
                rows: BTreeMap::new(),
            }],
        };
        let report = validate_network(&doc);
        for needle in [
            "duplicate variable id",
            "at least 2 states",
            "duplicate state label",
            "contains `|`",
            "unknown variable",
            "missing table",
        ] {
            assert!(report.mentions(needle), "missing `{needle}` in {report}");
        }
    }

    #[test]
    fn missing_and_extra_rows() {
        let mut doc = NetworkBuilder::new()
            .variable("a", ["0", "1"])
            .variable("b", ["0", "1"])
            .edge("a", "b")
            .table("a", vec![vec![0.5, 0.5]])
            .table("b", vec![vec![0.5, 0.5], vec![0.1, 0.9]])
            .document();
        let rows = &mut doc.cuts[1].rows;
        rows.remove("1");
        rows.insert("2".into(), vec![1.0, 0.0]);
        let report = validate_network(&doc);
        assert!(report.mentions("missing row `1`"), "{report}");
        assert!(report.mentions("unexpected row `2`"), "{report}");
    }

    #[test]
    fn entries_outside_unit_interval() {
        let doc = NetworkBuilder::new()
            .variable("a", ["h", "t"])
            .table("a", vec![vec![1.5, -0.5]])
            .document();
        assert!(validate_network(&doc).mentions("outside [0, 1]"));
    }

    #[test]
    fn wrong_parent_order_rejected() {
        let mut doc = NetworkBuilder::new()
            .variable("a", ["0", "1"])
            .variable("b", ["0", "1"])
            .variable("c", ["0", "1"])
            .edge("a", "c")
            .edge("b", "c")
            .table("a", vec![vec![0.5, 0.5]])
            .table("b", vec![vec![0.5, 0.5]])
            .table("c", vec![vec![0.5, 0.5]; 4])
            .document();
        assert!(validate_network(&doc).is_valid());
        doc.cuts[2].parents = Some(vec!["b".into(), "a".into()]);
        assert!(validate_network(&doc).mentions("do not match graph parents"));
    }

    #[test]
    fn independent_coins_joint() {
        let net = NetworkBuilder::new()
            .variable("a", ["h", "t"])
            .variable("b", ["h", "t"])
            .table("a", vec![vec![0.5, 0.5]])
            .table("b", vec![vec![0.5, 0.5]])
            .build()
            .unwrap();
        let asg = BTreeMap::from([("a", "h"), ("b", "h")]);
        assert_eq!(net.joint_probability(&asg).unwrap(), 0.25);
    }

    #[test]
    fn chain_joint() {
        let net = NetworkBuilder::new()
            .variable("a", ["t", "f"])
            .variable("b", ["t", "f"])
            .edge("a", "b")
            .table("a", vec![vec![0.3, 0.7]])
            .table("b", vec![vec![0.9, 0.1], vec![0.2, 0.8]])
            .build()
            .unwrap();
        let asg = BTreeMap::from([("a", "t"), ("b", "t")]);
        assert!((net.joint_probability(&asg).unwrap() - 0.27).abs() < 1e-15);
    }

    #[test]
    fn joint_errors() {
        let net = coin().build().unwrap();
        let missing: BTreeMap<&str, &str> = BTreeMap::new();
        assert!(matches!(
            net.joint_probability(&missing),
            Err(BayesError::MissingAssignment(v)) if v == "a"
        ));
        let bad = BTreeMap::from([("a", "edge")]);
        assert!(matches!(
            net.joint_probability(&bad),
            Err(BayesError::UnknownState { .. })
        ));
    }

    #[test]
    fn document_round_trip_is_value_identical() {
        let net = NetworkBuilder::new()
            .variable("a", ["t", "f"])
            .variable("b", ["t", "f", "u"])
            .edge("a", "b")
            .table("a", vec![vec![0.1 + 0.2, 1.0 - (0.1 + 0.2)]])
            .table("b", vec![vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], vec![0.2, 0.3, 0.5]])
            .build()
            .unwrap();
        let text = net.to_json();
        let again = CausalNetwork::from_json(&text).unwrap();
        assert_eq!(again, net);
        assert_eq!(again.to_json(), text);
    }

    #[test]
    fn renormalize_reports_large_drift_only() {
        let mut doc = NetworkBuilder::new()
            .variable("a", ["h", "t"])
            .variable("b", ["h", "t"])
            .table("a", vec![vec![0.7, 0.2]])
            .table("b", vec![vec![0.5, 0.5 + 1e-8]])
            .document();
        let drift = doc.renormalize();
        assert_eq!(drift.len(), 1);
        assert_eq!(drift[0].variable, "a");
        assert!(validate_network(&doc).is_valid());
    }

    #[test]
    fn with_row_replaces_one_row() {
        let net = NetworkBuilder::new()
            .variable("a", ["t", "f"])
            .variable("b", ["t", "f"])
            .edge("a", "b")
            .table("a", vec![vec![0.3, 0.7]])
            .table("b", vec![vec![0.9, 0.1], vec![0.2, 0.8]])
            .build()
            .unwrap();
        let changed = net.with_row("b", &["f"], &[0.5, 0.5]).unwrap();
        let b = changed.index_of("b").unwrap();
        assert_eq!(changed.row(b, 1), &[0.5, 0.5]);
        assert_eq!(changed.row(b, 0), &[0.9, 0.1]);
        assert!(net.with_row("b", &["x"], &[0.5, 0.5]).is_err());
        assert!(net.with_row("b", &["f"], &[0.5, 0.6]).is_err());
    }
}
