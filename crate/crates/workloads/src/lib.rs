//! Deterministic operation-stream generators for ordered-map benchmarks.
//!
//! A [`WorkloadSpec`] pins the key universe, the access distribution
//! (uniform, hot-set `x/y`, or zipf), the operation mix, and a seed. The
//! seed fully determines the stream: the same spec generates byte-identical
//! operation sequences on every platform, which is why the generator uses
//! its own splitmix64 core instead of an external RNG.
//!
//! Keys are the integers `0..universe` laid out under a seeded permutation,
//! so hot sets are scattered across the key space rather than forming one
//! contiguous run.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

pub type Key = i64;

/// splitmix64: tiny, fast, and stable across platforms.
#[derive(Clone, Debug)]
pub struct Rng64 {
    state: u64,
}

impl Rng64 {
    pub fn new(seed: u64) -> Self {
        Rng64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform draw from `0..n` via the multiply-shift reduction.
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        ((u128::from(self.next_u64()) * u128::from(n)) >> 64) as u64
    }

    /// Uniform draw from `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Distribution {
    Uniform,
    /// `x_pct`% of operations pick uniformly inside a hot set holding
    /// `y_pct`% of the keys; the rest pick uniformly from the cold set.
    Xy {
        x_pct: u8,
        y_pct: u8,
    },
    /// P(rank r) ∝ 1/r^s over the permuted key universe.
    Zipf {
        s: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Mix {
    ReadOnly,
    Mixed {
        insert_pct: u8,
        delete_pct: u8,
        get_pct: u8,
    },
}

impl Mix {
    /// The 10/10/80 update mix.
    pub fn mixed_default() -> Self {
        Mix::Mixed {
            insert_pct: 10,
            delete_pct: 10,
            get_pct: 80,
        }
    }
}

/// Whether the consumer should run trees with standard or lazy deletes.
/// Carried on the spec so a workload file fully describes an experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DeletePolicy {
    #[default]
    Standard,
    LazyDelete,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    pub universe: u64,
    pub distribution: Distribution,
    pub mix: Mix,
    #[serde(default)]
    pub delete_mode: DeletePolicy,
    pub ops: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpecError {
    EmptyUniverse,
    BadPercentages(String),
    DegenerateHotSet,
    DegenerateColdSet,
    BadZipfExponent,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecError::EmptyUniverse => write!(f, "key universe must be non-empty"),
            SpecError::BadPercentages(s) => write!(f, "invalid percentages: {s}"),
            SpecError::DegenerateHotSet => {
                write!(f, "hot set is empty: y_pct too small for this universe")
            }
            SpecError::DegenerateColdSet => {
                write!(
                    f,
                    "cold set is empty but x_pct < 100 sends operations there"
                )
            }
            SpecError::BadZipfExponent => write!(f, "zipf exponent must be positive"),
        }
    }
}

impl std::error::Error for SpecError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Get(Key),
    Insert(Key, i64),
    Delete(Key),
}

impl Op {
    pub fn key(&self) -> Key {
        match *self {
            Op::Get(k) | Op::Insert(k, _) | Op::Delete(k) => k,
        }
    }
}

impl WorkloadSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        if self.universe == 0 {
            return Err(SpecError::EmptyUniverse);
        }
        match self.distribution {
            Distribution::Uniform => {}
            Distribution::Xy { x_pct, y_pct } => {
                if x_pct > 100 || y_pct == 0 || y_pct > 100 {
                    return Err(SpecError::BadPercentages(format!("x={x_pct} y={y_pct}")));
                }
                if hot_size(self.universe, y_pct) == 0 {
                    return Err(SpecError::DegenerateHotSet);
                }
                if y_pct == 100 && x_pct < 100 {
                    return Err(SpecError::DegenerateColdSet);
                }
            }
            Distribution::Zipf { s } => {
                if s <= 0.0 || !s.is_finite() {
                    return Err(SpecError::BadZipfExponent);
                }
            }
        }
        if let Mix::Mixed {
            insert_pct,
            delete_pct,
            get_pct,
        } = self.mix
        {
            let total = u32::from(insert_pct) + u32::from(delete_pct) + u32::from(get_pct);
            if total != 100 {
                return Err(SpecError::BadPercentages(format!("mix sums to {total}")));
            }
        }
        Ok(())
    }

    /// Whether the access density is bounded above and below on its
    /// support — an annotation for reports, never a runtime check.
    pub fn smoothness_note(&self) -> bool {
        match self.distribution {
            Distribution::Uniform => true,
            Distribution::Zipf { .. } => true,
            Distribution::Xy { x_pct, y_pct } => {
                (y_pct > 0 && y_pct < 100 && x_pct > 0 && x_pct < 100)
                    || (x_pct == 100 && y_pct == 100)
            }
        }
    }
}

fn hot_size(universe: u64, y_pct: u8) -> u64 {
    universe * u64::from(y_pct) / 100
}

/// A validated, ready-to-sample workload. Iterating yields the stream.
pub struct Workload {
    spec: WorkloadSpec,
    /// Seeded permutation of `0..universe`.
    keys: Vec<Key>,
    hot: u64,
    /// Cumulative zipf weights, when applicable.
    zipf_cum: Vec<f64>,
    rng: Rng64,
    emitted: u64,
}

impl Workload {
    pub fn new(spec: WorkloadSpec) -> Result<Self, SpecError> {
        spec.validate()?;
        let mut seeder = Rng64::new(spec.seed);
        let perm_seed = seeder.next_u64();
        let stream_seed = seeder.next_u64();

        let mut keys: Vec<Key> = (0..spec.universe as Key).collect();
        let mut perm_rng = Rng64::new(perm_seed);
        for i in (1..keys.len()).rev() {
            let j = perm_rng.below(i as u64 + 1) as usize;
            keys.swap(i, j);
        }
        let hot = match spec.distribution {
            Distribution::Xy { y_pct, .. } => hot_size(spec.universe, y_pct),
            _ => 0,
        };
        let zipf_cum = match spec.distribution {
            Distribution::Zipf { s } => {
                let mut cum = Vec::with_capacity(spec.universe as usize);
                let mut total = 0.0;
                for rank in 1..=spec.universe {
                    total += 1.0 / (rank as f64).powf(s);
                    cum.push(total);
                }
                cum
            }
            _ => Vec::new(),
        };
        Ok(Workload {
            spec,
            keys,
            hot,
            zipf_cum,
            rng: Rng64::new(stream_seed),
            emitted: 0,
        })
    }

    pub fn spec(&self) -> &WorkloadSpec {
        &self.spec
    }

    /// The permuted key universe; consumers pre-populate trees from this.
    pub fn universe_keys(&self) -> &[Key] {
        &self.keys
    }

    fn draw_key(&mut self) -> Key {
        match self.spec.distribution {
            Distribution::Uniform => self.keys[self.rng.below(self.spec.universe) as usize],
            Distribution::Xy { x_pct, .. } => {
                let hot = self.hot;
                let cold = self.spec.universe - hot;
                if self.rng.below(100) < u64::from(x_pct) || cold == 0 {
                    self.keys[self.rng.below(hot) as usize]
                } else {
                    self.keys[(hot + self.rng.below(cold)) as usize]
                }
            }
            Distribution::Zipf { .. } => {
                let total = *self.zipf_cum.last().expect("non-empty universe");
                let u = self.rng.unit() * total;
                let rank = self.zipf_cum.partition_point(|&c| c < u);
                self.keys[rank.min(self.keys.len() - 1)]
            }
        }
    }

    fn draw_op(&mut self) -> Op {
        let (insert_pct, delete_pct) = match self.spec.mix {
            Mix::ReadOnly => (0, 0),
            Mix::Mixed {
                insert_pct,
                delete_pct,
                ..
            } => (u64::from(insert_pct), u64::from(delete_pct)),
        };
        let roll = self.rng.below(100);
        let key = self.draw_key();
        let op = if roll < insert_pct {
            Op::Insert(key, self.emitted as i64)
        } else if roll < insert_pct + delete_pct {
            Op::Delete(key)
        } else {
            Op::Get(key)
        };
        self.emitted += 1;
        op
    }

    /// Materializes the whole stream.
    pub fn generate(spec: WorkloadSpec) -> Result<Vec<Op>, SpecError> {
        let mut w = Workload::new(spec)?;
        let n = w.spec.ops;
        Ok((0..n).map(|_| w.draw_op()).collect())
    }
}

impl Iterator for Workload {
    type Item = Op;

    fn next(&mut self) -> Option<Op> {
        if self.emitted >= self.spec.ops {
            return None;
        }
        Some(self.draw_op())
    }
}

/// `uniform | xy:X/Y | zipf:S`
impl FromStr for Distribution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "uniform" {
            return Ok(Distribution::Uniform);
        }
        if let Some(rest) = s.strip_prefix("xy:") {
            let (x, y) = rest
                .split_once('/')
                .ok_or_else(|| format!("expected xy:X/Y, got {s}"))?;
            let x_pct = x.parse().map_err(|e| format!("bad x in {s}: {e}"))?;
            let y_pct = y.parse().map_err(|e| format!("bad y in {s}: {e}"))?;
            return Ok(Distribution::Xy { x_pct, y_pct });
        }
        if let Some(rest) = s.strip_prefix("zipf:") {
            let s_param: f64 = rest
                .parse()
                .map_err(|e| format!("bad zipf exponent: {e}"))?;
            return Ok(Distribution::Zipf { s: s_param });
        }
        Err(format!("unknown workload distribution: {s}"))
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Uniform => write!(f, "uniform"),
            Distribution::Xy { x_pct, y_pct } => write!(f, "xy:{x_pct:02}/{y_pct:02}"),
            Distribution::Zipf { s } => write!(f, "zipf:{s}"),
        }
    }
}

/// `read-only | mixed`
impl FromStr for Mix {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "read-only" => Ok(Mix::ReadOnly),
            "mixed" => Ok(Mix::mixed_default()),
            other => Err(format!("unknown mix: {other} (expected read-only|mixed)")),
        }
    }
}

impl fmt::Display for Mix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mix::ReadOnly => write!(f, "read-only"),
            Mix::Mixed { .. } => write!(f, "mixed"),
        }
    }
}
