//! Dense discrete factors over variable indices. The last variable varies fastest.

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Factor {
    pub vars: Vec<usize>,
    pub cards: Vec<usize>,
    pub values: Vec<f64>,
}

fn strides(cards: &[usize]) -> Vec<usize> {
    let mut s = vec![1; cards.len()];
    for i in (0..cards.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * cards[i + 1];
    }
    s
}

impl Factor {
    pub fn unary(var: usize, values: Vec<f64>) -> Self {
        Self {
            vars: vec![var],
            cards: vec![values.len()],
            values,
        }
    }

    fn position(&self, var: usize) -> Option<usize> {
        self.vars.iter().position(|&v| v == var)
    }

    pub fn contains(&self, var: usize) -> bool {
        self.position(var).is_some()
    }

    pub fn product(&self, other: &Factor) -> Factor {
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        for (&v, &c) in other.vars.iter().zip(&other.cards) {
            if !vars.contains(&v) {
                vars.push(v);
                cards.push(c);
            }
        }
        let sa = strides(&self.cards);
        let sb = strides(&other.cards);
        let step_a: Vec<usize> = vars.iter().map(|&v| self.position(v).map_or(0, |p| sa[p])).collect();
        let step_b: Vec<usize> = vars.iter().map(|&v| other.position(v).map_or(0, |p| sb[p])).collect();
        let size: usize = cards.iter().product();
        let mut values = Vec::with_capacity(size);
        let mut counter = vec![0usize; vars.len()];
        let (mut ia, mut ib) = (0usize, 0usize);
        for _ in 0..size {
            values.push(self.values[ia] * other.values[ib]);
            for j in (0..vars.len()).rev() {
                counter[j] += 1;
                ia += step_a[j];
                ib += step_b[j];
                if counter[j] < cards[j] {
                    break;
                }
                ia -= step_a[j] * cards[j];
                ib -= step_b[j] * cards[j];
                counter[j] = 0;
            }
        }
        Factor { vars, cards, values }
    }

    pub fn sum_out(&self, var: usize) -> Factor {
        let Some(p) = self.position(var) else {
            return self.clone();
        };
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(p);
        cards.remove(p);
        let out_strides = strides(&cards);
        let step: Vec<usize> = self
            .vars
            .iter()
            .map(|&v| vars.iter().position(|&w| w == v).map_or(0, |q| out_strides[q]))
            .collect();
        let mut values = vec![0.0; cards.iter().product()];
        let mut counter = vec![0usize; self.vars.len()];
        let mut io = 0usize;
        for &x in &self.values {
            values[io] += x;
            for j in (0..self.vars.len()).rev() {
                counter[j] += 1;
                io += step[j];
                if counter[j] < self.cards[j] {
                    break;
                }
                io -= step[j] * self.cards[j];
                counter[j] = 0;
            }
        }
        Factor { vars, cards, values }
    }
}
