//! Full-joint enumeration over a network document.

use std::collections::BTreeMap;

use epidss_core::bayes::{Evidence, NetworkDocument};

/// Every complete assignment of a network with its joint probability.
pub struct JointTable {
    ids: Vec<String>,
    states: Vec<Vec<String>>,
    /// (state index per variable, probability)
    entries: Vec<(Vec<usize>, f64)>,
}

impl JointTable {
    /// Enumerates the joint distribution. Parents of a node are read off the
    /// edge list and ordered by declaration; each factor is looked up by its
    /// `|`-joined key in the table rows.
    pub fn enumerate(doc: &NetworkDocument) -> Self {
        let ids: Vec<String> = doc.variables.iter().map(|v| v.id.clone()).collect();
        let states: Vec<Vec<String>> = doc.variables.iter().map(|v| v.states.clone()).collect();
        let pos = |id: &str| ids.iter().position(|x| x == id).expect("edge endpoint declared");

        let mut parents: Vec<Vec<usize>> = vec![Vec::new(); ids.len()];
        for (p, c) in &doc.edges {
            parents[pos(c)].push(pos(p));
        }
        for ps in &mut parents {
            ps.sort_unstable();
        }
        let rows: Vec<&BTreeMap<String, Vec<f64>>> = ids
            .iter()
            .map(|id| &doc.cuts.iter().find(|c| &c.variable == id).expect("table present").rows)
            .collect();

        let total: usize = states.iter().map(Vec::len).product();
        let mut entries = Vec::with_capacity(total);
        let mut assign = vec![0usize; ids.len()];
        for _ in 0..total {
            let mut p = 1.0;
            for v in 0..ids.len() {
                let key = parents[v]
                    .iter()
                    .map(|&q| states[q][assign[q]].as_str())
                    .collect::<Vec<_>>()
                    .join("|");
                p *= rows[v][&key][assign[v]];
            }
            entries.push((assign.clone(), p));
            for v in (0..ids.len()).rev() {
                assign[v] += 1;
                if assign[v] < states[v].len() {
                    break;
                }
                assign[v] = 0;
            }
        }
        Self { ids, states, entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn weight(&self, ev: &Evidence, assign: &[usize]) -> f64 {
        let mut w = 1.0;
        for (v, id) in self.ids.iter().enumerate() {
            let s = assign[v];
            if let Some(state) = ev.hard.get(id) {
                if &self.states[v][s] != state {
                    return 0.0;
                }
            }
            if let Some(lik) = ev.soft.get(id) {
                w *= lik[s];
            }
        }
        w
    }

    /// P(evidence), with soft evidence contributing its likelihood factor.
    pub fn evidence_probability(&self, ev: &Evidence) -> f64 {
        self.entries.iter().map(|(a, p)| p * self.weight(ev, a)).sum()
    }

    /// Posterior over `query`, or `None` when the evidence has zero probability.
    pub fn posterior(&self, ev: &Evidence, query: &str) -> Option<Vec<f64>> {
        let q = self.ids.iter().position(|x| x == query)?;
        let mut out = vec![0.0; self.states[q].len()];
        for (a, p) in &self.entries {
            out[a[q]] += p * self.weight(ev, a);
        }
        let z: f64 = out.iter().sum();
        if z <= 0.0 {
            return None;
        }
        Some(out.into_iter().map(|x| x / z).collect())
    }

    pub fn total_mass(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }
}
