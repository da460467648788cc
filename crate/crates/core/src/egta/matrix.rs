use std::fmt;

/// Running summary of one payoff cell.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CellEstimate {
    pub mean: f64,
    /// Standard error of the mean; zero until two samples exist.
    pub se: f64,
    pub n: u64,
}

impl CellEstimate {
    pub fn exact(value: f64) -> Self {
        CellEstimate {
            mean: value,
            se: 0.0,
            n: 1,
        }
    }

    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return CellEstimate::default();
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let se = if n < 2 {
            0.0
        } else {
            let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        };
        CellEstimate {
            mean,
            se,
            n: n as u64,
        }
    }
}

/// Estimated (R, P, S, T) at the initial state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EmpiricalPayoffMatrix {
    pub r: CellEstimate,
    pub p: CellEstimate,
    pub s: CellEstimate,
    pub t: CellEstimate,
}

impl EmpiricalPayoffMatrix {
    /// A matrix of known values with no sampling error.
    pub fn exact(r: f64, p: f64, s: f64, t: f64) -> Self {
        EmpiricalPayoffMatrix {
            r: CellEstimate::exact(r),
            p: CellEstimate::exact(p),
            s: CellEstimate::exact(s),
            t: CellEstimate::exact(t),
        }
    }

    pub fn fear(&self) -> f64 {
        self.p.mean - self.s.mean
    }

    pub fn greed(&self) -> f64 {
        self.t.mean - self.r.mean
    }

    /// Cells in R, P, S, T order.
    pub fn cells(&self) -> [(&'static str, CellEstimate); 4] {
        [("R", self.r), ("P", self.p), ("S", self.s), ("T", self.t)]
    }
}

/// Verdict on each of the four dilemma conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SsdVerdict {
    /// `R > P`, `R > S`, `2R > T + S`, `T > R or P > S`.
    pub conditions: [bool; 4],
    pub greed: bool,
    pub fear: bool,
}

impl SsdVerdict {
    pub fn holds(&self) -> bool {
        self.conditions.iter().all(|&c| c)
    }

    /// One-based numbers of the conditions that fail.
    pub fn failed(&self) -> Vec<u8> {
        (1..=4u8)
            .filter(|&k| !self.conditions[k as usize - 1])
            .collect()
    }
}

pub fn check_ssd_inequalities(m: &EmpiricalPayoffMatrix) -> SsdVerdict {
    let (r, p, s, t) = (m.r.mean, m.p.mean, m.s.mean, m.t.mean);
    let greed = t > r;
    let fear = p > s;
    SsdVerdict {
        conditions: [r > p, r > s, 2.0 * r > t + s, greed || fear],
        greed,
        fear,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DilemmaClass {
    PrisonersDilemma,
    Chicken,
    StagHunt,
    /// Carries the one-based numbers of the failed conditions.
    NotSocialDilemma(Vec<u8>),
}

impl DilemmaClass {
    pub fn name(&self) -> &'static str {
        match self {
            DilemmaClass::PrisonersDilemma => "PrisonersDilemma",
            DilemmaClass::Chicken => "Chicken",
            DilemmaClass::StagHunt => "StagHunt",
            DilemmaClass::NotSocialDilemma(_) => "NotSocialDilemma",
        }
    }
}

impl fmt::Display for DilemmaClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Total over all inputs: a NaN anywhere fails the conditions it touches.
pub fn classify_matrix(m: &EmpiricalPayoffMatrix) -> DilemmaClass {
    let v = check_ssd_inequalities(m);
    if !v.holds() {
        return DilemmaClass::NotSocialDilemma(v.failed());
    }
    match (v.greed, v.fear) {
        (true, true) => DilemmaClass::PrisonersDilemma,
        (true, false) => DilemmaClass::Chicken,
        _ => DilemmaClass::StagHunt,
    }
}
