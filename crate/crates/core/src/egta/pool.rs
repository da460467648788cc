use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::EgtaError;
use crate::engine::Action;
use crate::learner::{load_policy, Controller, GreedyPolicy, QNetwork, ScriptedController};

/// Which side of the thresholds a policy falls on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyClass {
    Cooperator,
    Defector,
    Neither,
}

impl PolicyClass {
    pub fn letter(self) -> char {
        match self {
            PolicyClass::Cooperator => 'C',
            PolicyClass::Defector => 'D',
            PolicyClass::Neither => '-',
        }
    }
}

/// Cut points on a social behavior metric. Lower values are cooperative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub alpha_c: f64,
    pub alpha_d: f64,
}

impl Thresholds {
    pub fn new(alpha_c: f64, alpha_d: f64) -> Result<Self, EgtaError> {
        if alpha_c.is_nan() || alpha_d.is_nan() || alpha_c > alpha_d {
            return Err(EgtaError::InvalidThresholds { alpha_c, alpha_d });
        }
        Ok(Thresholds { alpha_c, alpha_d })
    }

    /// The lower and upper quartiles of `metrics`.
    pub fn from_quartiles(metrics: &[f64]) -> Result<Self, EgtaError> {
        Self::from_percentiles(metrics, 25.0, 75.0)
    }

    pub fn from_percentiles(metrics: &[f64], lo: f64, hi: f64) -> Result<Self, EgtaError> {
        let mut v: Vec<f64> = metrics.iter().copied().filter(|x| x.is_finite()).collect();
        if v.is_empty() {
            return Err(EgtaError::EmptyPool('C'));
        }
        v.sort_by(f64::total_cmp);
        Self::new(percentile(&v, lo), percentile(&v, hi))
    }

    pub fn classify(&self, metric: f64) -> PolicyClass {
        if metric < self.alpha_c {
            PolicyClass::Cooperator
        } else if metric > self.alpha_d {
            PolicyClass::Defector
        } else {
            PolicyClass::Neither
        }
    }
}

/// Linear interpolation between closest ranks of sorted data.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * (q / 100.0).clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn classify_policy(metric: f64, alpha_c: f64, alpha_d: f64) -> Result<PolicyClass, EgtaError> {
    Ok(Thresholds::new(alpha_c, alpha_d)?.classify(metric))
}

type Factory = dyn Fn() -> Box<dyn Controller + Send> + Send + Sync;

/// A policy that can be instantiated afresh for every playout.
#[derive(Clone)]
pub struct PoolMember {
    pub name: String,
    pub metric: f64,
    make: Arc<Factory>,
}

impl fmt::Debug for PoolMember {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PoolMember")
            .field("name", &self.name)
            .field("metric", &self.metric)
            .finish()
    }
}

impl PoolMember {
    pub fn new(
        name: impl Into<String>,
        metric: f64,
        make: impl Fn() -> Box<dyn Controller + Send> + Send + Sync + 'static,
    ) -> Self {
        PoolMember {
            name: name.into(),
            metric,
            make: Arc::new(make),
        }
    }

    pub fn network(name: impl Into<String>, metric: f64, net: Arc<QNetwork>) -> Self {
        Self::new(name, metric, move || Box::new(GreedyPolicy::new(Arc::clone(&net))))
    }

    /// A fixed action script, restarted from the top in every episode.
    pub fn scripted(name: impl Into<String>, metric: f64, script: Vec<Action>) -> Self {
        assert!(!script.is_empty(), "script must not be empty");
        Self::new(name, metric, move || Box::new(ScriptedController::new(script.clone())))
    }

    pub fn controller(&self) -> Box<dyn Controller + Send> {
        (self.make)()
    }
}

/// Policies sharing one label.
#[derive(Debug, Clone)]
pub struct PolicyPool {
    pub label: PolicyClass,
    pub members: Vec<PoolMember>,
}

impl PolicyPool {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Cooperator and defector pools plus the policies between them.
#[derive(Debug, Clone)]
pub struct Pools {
    pub cooperators: PolicyPool,
    pub defectors: PolicyPool,
    pub excluded: Vec<PoolMember>,
}

/// Splits candidates by their metric. The pools are disjoint by
/// construction since each member is classified once.
pub fn partition(members: Vec<PoolMember>, thresholds: Thresholds) -> Pools {
    let mut pools = Pools {
        cooperators: PolicyPool {
            label: PolicyClass::Cooperator,
            members: Vec::new(),
        },
        defectors: PolicyPool {
            label: PolicyClass::Defector,
            members: Vec::new(),
        },
        excluded: Vec::new(),
    };
    for m in members {
        match thresholds.classify(m.metric) {
            PolicyClass::Cooperator => pools.cooperators.members.push(m),
            PolicyClass::Defector => pools.defectors.members.push(m),
            PolicyClass::Neither => pools.excluded.push(m),
        }
    }
    pools
}

/// One line of a pool manifest: `<C|D|-> <metric> <checkpoint path>`.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub label: PolicyClass,
    pub metric: f64,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub thresholds: Option<Thresholds>,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    /// Labels every entry from its metric.
    pub fn labelled(thresholds: Thresholds, items: Vec<(PathBuf, f64)>) -> Self {
        Manifest {
            thresholds: Some(thresholds),
            entries: items
                .into_iter()
                .map(|(path, metric)| ManifestEntry {
                    label: thresholds.classify(metric),
                    metric,
                    path,
                })
                .collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, EgtaError> {
        let mut thresholds = None;
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: &str| EgtaError::Manifest {
                line: i + 1,
                message: msg.to_string(),
            };
            let mut parts = line.splitn(3, char::is_whitespace);
            let head = parts.next().unwrap_or_default();
            let second = parts.next().ok_or_else(|| bad("expected three fields"))?;
            let rest = parts.next().map(str::trim).ok_or_else(|| bad("expected three fields"))?;
            if head == "thresholds" {
                let c = second.parse().map_err(|_| bad("bad alpha_c"))?;
                let d = rest.parse().map_err(|_| bad("bad alpha_d"))?;
                thresholds = Some(Thresholds::new(c, d)?);
                continue;
            }
            let label = match head {
                "C" => PolicyClass::Cooperator,
                "D" => PolicyClass::Defector,
                "-" => PolicyClass::Neither,
                _ => return Err(bad("label must be C, D or -")),
            };
            let metric: f64 = second.parse().map_err(|_| bad("bad metric value"))?;
            if rest.is_empty() {
                return Err(bad("missing checkpoint path"));
            }
            entries.push(ManifestEntry {
                label,
                metric,
                path: PathBuf::from(rest),
            });
        }
        let m = Manifest {
            thresholds,
            entries,
        };
        m.check()?;
        Ok(m)
    }

    /// Labels must agree with the thresholds when both are given, and no
    /// checkpoint may sit in both pools.
    pub fn check(&self) -> Result<(), EgtaError> {
        for (i, e) in self.entries.iter().enumerate() {
            if let Some(t) = self.thresholds {
                if t.classify(e.metric) != e.label {
                    return Err(EgtaError::Manifest {
                        line: i + 1,
                        message: format!(
                            "{} labelled {} but metric {} classifies as {}",
                            e.path.display(),
                            e.label.letter(),
                            e.metric,
                            t.classify(e.metric).letter()
                        ),
                    });
                }
            }
            let clash = self.entries[..i]
                .iter()
                .any(|o| o.path == e.path && o.label != e.label);
            if clash {
                return Err(EgtaError::OverlappingPools(e.path.display().to_string()));
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# label metric checkpoint\n");
        if let Some(t) = self.thresholds {
            out.push_str(&format!("thresholds {} {}\n", t.alpha_c, t.alpha_d));
        }
        for e in &self.entries {
            out.push_str(&format!("{} {} {}\n", e.label.letter(), e.metric, e.path.display()));
        }
        out
    }

    pub fn load(path: &Path) -> Result<Self, EgtaError> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// Loads the labelled checkpoints, resolving relative paths against
    /// `base_dir`.
    pub fn into_pools(&self, base_dir: &Path) -> Result<Pools, EgtaError> {
        let mut members = [Vec::new(), Vec::new(), Vec::new()];
        for e in &self.entries {
            let path = if e.path.is_absolute() {
                e.path.clone()
            } else {
                base_dir.join(&e.path)
            };
            let net = Arc::new(load_policy(&path)?.net);
            let m = PoolMember::network(e.path.display().to_string(), e.metric, net);
            let slot = match e.label {
                PolicyClass::Cooperator => 0,
                PolicyClass::Defector => 1,
                PolicyClass::Neither => 2,
            };
            members[slot].push(m);
        }
        let [c, d, x] = members;
        Ok(Pools {
            cooperators: PolicyPool {
                label: PolicyClass::Cooperator,
                members: c,
            },
            defectors: PolicyPool {
                label: PolicyClass::Defector,
                members: d,
            },
            excluded: x,
        })
    }
}
