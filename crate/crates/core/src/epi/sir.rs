use serde::{Deserialize, Serialize};

use super::EpiError;

/// Parameters of a deterministic SIR run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SirParams {
    /// Transmission rate per day.
    pub beta: f64,
    /// Recovery rate per day.
    pub gamma: f64,
    pub population: f64,
    pub initial_infected: f64,
    /// Simulated days.
    pub horizon: f64,
    /// Euler step in days.
    pub dt: f64,
}

impl Default for SirParams {
    fn default() -> Self {
        Self {
            beta: 0.5,
            gamma: 0.25,
            population: 1e6,
            initial_infected: 10.0,
            horizon: 200.0,
            dt: 0.1,
        }
    }
}

impl SirParams {
    pub fn validate(&self) -> Result<(), EpiError> {
        let fail = |msg: &str| Err(EpiError::InvalidParams(msg.to_owned()));
        let all_finite = [
            self.beta,
            self.gamma,
            self.population,
            self.initial_infected,
            self.horizon,
            self.dt,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !all_finite {
            return fail("all parameters must be finite");
        }
        if self.beta < 0.0 {
            return fail("beta must be >= 0");
        }
        if self.gamma <= 0.0 {
            return fail("gamma must be > 0");
        }
        if !(self.initial_infected > 0.0 && self.initial_infected <= self.population) {
            return fail("initial infected must satisfy 0 < I0 <= N");
        }
        if self.dt <= 0.0 {
            return fail("dt must be > 0");
        }
        if self.horizon < self.dt {
            return fail("horizon must be >= dt");
        }
        Ok(())
    }

    pub fn basic_reproduction_number(&self) -> f64 {
        self.beta / self.gamma
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt - 1e-9).ceil() as usize
    }
}

/// Compartment sizes on a uniform time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub dt: f64,
    pub population: f64,
    pub susceptible: Vec<f64>,
    pub infected: Vec<f64>,
    pub recovered: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.infected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.infected.is_empty()
    }

    pub fn time(&self, step: usize) -> f64 {
        step as f64 * self.dt
    }

    pub fn summary(&self) -> TrajectorySummary {
        let mut acc = SummaryAccumulator::default();
        for k in 0..self.len() {
            acc.push(k, self.susceptible[k], self.infected[k]);
        }
        acc.finish(self.dt, self.population)
    }
}

/// Scalar statistics of one trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub peak_infected: f64,
    /// Fraction of the population ever infected by the horizon, `(N - S_end) / N`.
    pub attack_rate: f64,
    /// Time of the first maximum of I.
    pub peak_time: f64,
}

#[derive(Default)]
struct SummaryAccumulator {
    peak: f64,
    peak_step: usize,
    last_s: f64,
}

impl SummaryAccumulator {
    fn push(&mut self, step: usize, s: f64, i: f64) {
        if step == 0 || i > self.peak {
            self.peak = i;
            self.peak_step = step;
        }
        self.last_s = s;
    }

    fn finish(self, dt: f64, n: f64) -> TrajectorySummary {
        TrajectorySummary {
            peak_infected: self.peak,
            attack_rate: (n - self.last_s) / n,
            peak_time: self.peak_step as f64 * dt,
        }
    }
}

/// Runs forward Euler and hands each state `(step, S, I, R)` to `visit`.
fn integrate(p: &SirParams, mut visit: impl FnMut(usize, f64, f64, f64)) -> Result<(), EpiError> {
    p.validate()?;
    let n = p.population;
    let mut s = n - p.initial_infected;
    let mut i = p.initial_infected;
    let mut r = 0.0;
    visit(0, s, i, r);
    for step in 1..=p.steps() {
        let infections = p.beta * s * i / n * p.dt;
        let recoveries = p.gamma * i * p.dt;
        let (s_next, i_next) = (s - infections, i + infections - recoveries);
        if s_next < 0.0 || i_next < 0.0 {
            return Err(EpiError::StepTooLarge { step, dt: p.dt });
        }
        s = s_next;
        i = i_next;
        r += recoveries;
        visit(step, s, i, r);
    }
    Ok(())
}

/// Integrates `dS = -bSI/N, dI = bSI/N - gI, dR = gI` with forward Euler.
pub fn simulate_sir(p: &SirParams) -> Result<Trajectory, EpiError> {
    let cap = p.steps().saturating_add(1).min(1 << 24);
    let mut t = Trajectory {
        dt: p.dt,
        population: p.population,
        susceptible: Vec::with_capacity(cap),
        infected: Vec::with_capacity(cap),
        recovered: Vec::with_capacity(cap),
    };
    integrate(p, |_, s, i, r| {
        t.susceptible.push(s);
        t.infected.push(i);
        t.recovered.push(r);
    })?;
    Ok(t)
}

/// Same statistics as `simulate_sir(p)?.summary()` without storing the trajectory.
pub fn simulate_summary(p: &SirParams) -> Result<TrajectorySummary, EpiError> {
    let mut acc = SummaryAccumulator::default();
    integrate(p, |k, s, i, _| acc.push(k, s, i))?;
    Ok(acc.finish(p.dt, p.population))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_transmission_only_recovers() {
        let p = SirParams {
            beta: 0.0,
            horizon: 50.0,
            ..SirParams::default()
        };
        let t = simulate_sir(&p).unwrap();
        assert!(t.infected.windows(2).all(|w| w[1] < w[0]));
        assert!(t.susceptible.iter().all(|&s| s == t.susceptible[0]));
    }

    #[test]
    fn subcritical_epidemic_dies_out() {
        let p = SirParams {
            beta: 0.3,
            gamma: 2.0,
            horizon: 30.0,
            ..SirParams::default()
        };
        let t = simulate_sir(&p).unwrap();
        assert!(*t.infected.last().unwrap() < p.initial_infected);
        assert!(t.infected.iter().all(|&i| i <= p.initial_infected));
    }

    #[test]
    fn peak_at_herd_immunity_threshold() {
        let p = SirParams {
            beta: 0.5,
            gamma: 0.25,
            population: 1e6,
            initial_infected: 10.0,
            horizon: 200.0,
            dt: 0.1,
        };
        let t = simulate_sir(&p).unwrap();
        let crossing = t
            .susceptible
            .iter()
            .position(|&s| s / p.population <= p.gamma / p.beta)
            .unwrap();
        let peak = t
            .infected
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert!(crossing.abs_diff(peak) <= 1, "crossing {crossing} peak {peak}");
    }

    #[test]
    fn conservation_and_monotone_recovered() {
        let p = SirParams::default();
        let t = simulate_sir(&p).unwrap();
        for k in 0..t.len() {
            let total = t.susceptible[k] + t.infected[k] + t.recovered[k];
            assert!((total - p.population).abs() <= 1e-9 * p.population);
        }
        assert!(t.recovered.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(t.len(), p.steps() + 1);
    }

    #[test]
    fn summary_paths_agree() {
        let p = SirParams::default();
        assert_eq!(simulate_sir(&p).unwrap().summary(), simulate_summary(&p).unwrap());
    }

    #[test]
    fn step_too_large() {
        let p = SirParams {
            gamma: 20.0,
            dt: 0.1,
            ..SirParams::default()
        };
        assert!(matches!(simulate_sir(&p), Err(EpiError::StepTooLarge { step: 1, .. })));
    }

    #[test]
    fn invalid_params() {
        let base = SirParams::default();
        for bad in [
            SirParams { beta: -0.1, ..base },
            SirParams { gamma: 0.0, ..base },
            SirParams {
                initial_infected: 0.0,
                ..base
            },
            SirParams {
                initial_infected: 2e6,
                ..base
            },
            SirParams { dt: 0.0, ..base },
            SirParams { horizon: 0.01, ..base },
            SirParams { beta: f64::NAN, ..base },
        ] {
            assert!(matches!(simulate_sir(&bad), Err(EpiError::InvalidParams(_))), "{bad:?}");
        }
    }
}
