//! Episode-level FIFO replay, UAV-permutation augmentation, and the
//! per-transition sampler used by the conventional-replay baseline.

use crate::env::MdpState;
use crate::layout::{ActionLayout, LayoutError, Permutation, StateLayout};
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::borrow::Cow;
use std::collections::VecDeque;
use std::io::{Read, Write};

#[derive(Debug, thiserror::Error)]
pub enum ReplayError {
    #[error("episode record has {got} transitions, expected {want}")]
    Length { got: usize, want: usize },
    #[error("episode record must end with exactly one terminal transition")]
    Terminal,
    #[error("replay buffer is empty")]
    Empty,
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("replay dump: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experience {
    pub s: MdpState,
    /// Actor-space action as executed.
    pub a: Vec<f64>,
    pub r: f64,
    pub s_next: MdpState,
    pub terminal: bool,
    /// Recurrent state entering this slot, kept only for per-transition replay.
    pub h_in: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub experiences: Vec<Experience>,
}

impl EpisodeRecord {
    pub fn new(experiences: Vec<Experience>) -> Self {
        Self { experiences }
    }

    pub fn len(&self) -> usize {
        self.experiences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.experiences.is_empty()
    }

    pub fn validate(&self, horizon: usize) -> Result<(), ReplayError> {
        if self.len() != horizon {
            return Err(ReplayError::Length { got: self.len(), want: horizon });
        }
        let terminals = self.experiences.iter().filter(|e| e.terminal).count();
        if terminals != 1 || !self.experiences.last().is_some_and(|e| e.terminal) {
            return Err(ReplayError::Terminal);
        }
        Ok(())
    }

    /// States `s_0 .. s_T`, the last being the final next-state.
    pub fn state_sequence(&self) -> Vec<Vec<f64>> {
        let mut v: Vec<Vec<f64>> = self.experiences.iter().map(|e| e.s.features.clone()).collect();
        if let Some(last) = self.experiences.last() {
            v.push(last.s_next.features.clone());
        }
        v
    }
}

/// FIFO store of whole episodes.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeBuffer {
    capacity: usize,
    horizon: usize,
    records: VecDeque<EpisodeRecord>,
}

impl EpisodeBuffer {
    pub fn new(capacity: usize, horizon: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self { capacity, horizon, records: VecDeque::with_capacity(capacity.min(4096)) }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> impl Iterator<Item = &EpisodeRecord> {
        self.records.iter()
    }

    pub fn get(&self, i: usize) -> Option<&EpisodeRecord> {
        self.records.get(i)
    }

    pub fn push(&mut self, rec: EpisodeRecord) -> Result<(), ReplayError> {
        rec.validate(self.horizon)?;
        if self.records.len() == self.capacity {
            self.records.pop_front();
        }
        self.records.push_back(rec);
        Ok(())
    }

    /// `n` records: with replacement while the buffer holds fewer than `n`,
    /// without replacement afterwards.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<&EpisodeRecord>, ReplayError> {
        if self.records.is_empty() {
            return Err(ReplayError::Empty);
        }
        let len = self.records.len();
        Ok(if len < n {
            (0..n).map(|_| &self.records[rng.random_range(0..len)]).collect()
        } else {
            index::sample(rng, len, n).into_iter().map(|i| &self.records[i]).collect()
        })
    }

    /// Uniform single transitions from the union of all stored episodes.
    pub fn cer_sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<&Experience>, ReplayError> {
        let total: usize = self.records.iter().map(|r| r.len()).sum();
        if total == 0 {
            return Err(ReplayError::Empty);
        }
        Ok((0..n)
            .map(|_| {
                let mut k = rng.random_range(0..total);
                for r in &self.records {
                    if k < r.len() {
                        return &r.experiences[k];
                    }
                    k -= r.len();
                }
                unreachable!("index within total")
            })
            .collect())
    }
}

/// Relabels the UAVs of every transition. Rewards and sensing blocks are untouched.
pub fn permute_record(
    rec: &EpisodeRecord,
    perm: &Permutation,
    state: &StateLayout,
    action: &ActionLayout,
) -> Result<EpisodeRecord, ReplayError> {
    let experiences = rec
        .experiences
        .iter()
        .map(|e| {
            Ok(Experience {
                s: MdpState { features: state.permute(&e.s.features, perm)? },
                a: action.permute(&e.a, perm)?,
                r: e.r,
                s_next: MdpState { features: state.permute(&e.s_next.features, perm)? },
                terminal: e.terminal,
                h_in: e.h_in.clone(),
            })
        })
        .collect::<Result<_, ReplayError>>()?;
    Ok(EpisodeRecord { experiences })
}

/// `Λ(ω) = ⌊(M! − 1)·ζ^ω⌋`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentSchedule {
    pub zeta: f64,
    pub m_factorial_minus_1: u64,
    pub omega: u64,
    /// Forces Λ ≡ 0 (the no-augmentation baseline).
    pub disabled: bool,
}

impl AugmentSchedule {
    pub fn new(uavs: usize, zeta: f64) -> Self {
        let fact: u64 = (1..=uavs as u64).product();
        Self { zeta, m_factorial_minus_1: fact - 1, omega: 0, disabled: false }
    }

    pub fn disabled(uavs: usize) -> Self {
        Self { disabled: true, ..Self::new(uavs, 0.0) }
    }

    pub fn lambda_at(&self, omega: u64) -> usize {
        if self.disabled {
            return 0;
        }
        let v = (self.m_factorial_minus_1 as f64 * self.zeta.powf(omega as f64)).floor();
        (v.max(0.0) as u64).min(self.m_factorial_minus_1) as usize
    }

    pub fn lambda(&self) -> usize {
        self.lambda_at(self.omega)
    }
}

/// Samples `n_e` episodes, then appends each of them under `Λ(ω)` distinct
/// non-identity relabelings. Advances `ω`.
pub fn augmented_minibatch<'a, R: Rng + ?Sized>(
    buf: &'a EpisodeBuffer,
    sched: &mut AugmentSchedule,
    n_e: usize,
    state: &StateLayout,
    action: &ActionLayout,
    rng: &mut R,
) -> Result<Vec<Cow<'a, EpisodeRecord>>, ReplayError> {
    let base = buf.sample(n_e, rng)?;
    let lambda = sched.lambda();
    sched.omega += 1;
    let mut out: Vec<Cow<'a, EpisodeRecord>> = base.iter().map(|r| Cow::Borrowed(*r)).collect();
    if lambda == 0 {
        return Ok(out);
    }
    let all = Permutation::all(action.uavs);
    // all[0] is the identity
    let picks = index::sample(rng, all.len() - 1, lambda);
    for p in picks {
        let perm = &all[p + 1];
        for r in &base {
            out.push(Cow::Owned(permute_record(r, perm, state, action)?));
        }
    }
    Ok(out)
}

const DUMP_FORMAT: &str = "lae-isac-replay";
const DUMP_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct DumpHeader {
    format: String,
    version: u32,
    capacity: usize,
    horizon: usize,
    state_dim: usize,
    action_dim: usize,
    /// Length of `h_in`, zero when transitions carry none.
    hidden: usize,
    records: usize,
}

fn put_f64s(buf: &mut Vec<u8>, xs: &[f64]) {
    for x in xs {
        buf.extend_from_slice(&x.to_le_bytes());
    }
}

impl EpisodeBuffer {
    /// `u64` LE header length, JSON header, then per record a `u64` LE byte
    /// length and its transitions as little-endian `f64`.
    pub fn dump<W: Write>(&self, mut w: W) -> Result<(), ReplayError> {
        let first = self.records.front().and_then(|r| r.experiences.first());
        let (state_dim, action_dim, hidden) = first.map_or((0, 0, 0), |e| {
            (e.s.features.len(), e.a.len(), e.h_in.as_ref().map_or(0, |h| h.len()))
        });
        let header = DumpHeader {
            format: DUMP_FORMAT.into(),
            version: DUMP_VERSION,
            capacity: self.capacity,
            horizon: self.horizon,
            state_dim,
            action_dim,
            hidden,
            records: self.records.len(),
        };
        let json = serde_json::to_vec(&header).map_err(|e| ReplayError::Format(e.to_string()))?;
        w.write_all(&(json.len() as u64).to_le_bytes())?;
        w.write_all(&json)?;
        let mut buf = Vec::new();
        for rec in &self.records {
            buf.clear();
            for e in &rec.experiences {
                let h_len = e.h_in.as_ref().map_or(0, |h| h.len());
                if e.s.features.len() != state_dim || e.a.len() != action_dim || h_len != hidden {
                    return Err(ReplayError::Format("transitions of mixed shape".into()));
                }
                put_f64s(&mut buf, &e.s.features);
                put_f64s(&mut buf, &e.a);
                put_f64s(&mut buf, &[e.r]);
                put_f64s(&mut buf, &e.s_next.features);
                put_f64s(&mut buf, &[if e.terminal { 1.0 } else { 0.0 }]);
                if let Some(h) = &e.h_in {
                    put_f64s(&mut buf, h);
                }
            }
            w.write_all(&(buf.len() as u64).to_le_bytes())?;
            w.write_all(&buf)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn restore<R: Read>(mut r: R) -> Result<Self, ReplayError> {
        let mut len = [0u8; 8];
        r.read_exact(&mut len)?;
        let hl = u64::from_le_bytes(len);
        if hl > 1 << 20 {
            return Err(ReplayError::Format(format!("header length {hl} is implausible")));
        }
        let mut json = vec![0u8; hl as usize];
        r.read_exact(&mut json)?;
        let h: DumpHeader = serde_json::from_slice(&json).map_err(|e| ReplayError::Format(e.to_string()))?;
        if h.format != DUMP_FORMAT || h.version != DUMP_VERSION || h.capacity == 0 {
            return Err(ReplayError::Format(format!("unsupported dump {} v{}", h.format, h.version)));
        }
        let per = 2 * h.state_dim + h.action_dim + 2 + h.hidden;
        let mut buf = EpisodeBuffer::new(h.capacity, h.horizon);
        for _ in 0..h.records {
            r.read_exact(&mut len)?;
            let bytes = u64::from_le_bytes(len) as usize;
            if bytes != 8 * per * h.horizon {
                return Err(ReplayError::Format(format!("record of {bytes} bytes, expected {}", 8 * per * h.horizon)));
            }
            let mut raw = vec![0u8; bytes];
            r.read_exact(&mut raw)?;
            let vals: Vec<f64> = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
            let experiences = vals
                .chunks_exact(per)
                .map(|c| {
                    let (s, rest) = c.split_at(h.state_dim);
                    let (a, rest) = rest.split_at(h.action_dim);
                    let (rw, rest) = rest.split_at(1);
                    let (sn, rest) = rest.split_at(h.state_dim);
                    let (term, hid) = rest.split_at(1);
                    Experience {
                        s: MdpState { features: s.to_vec() },
                        a: a.to_vec(),
                        r: rw[0],
                        s_next: MdpState { features: sn.to_vec() },
                        terminal: term[0] != 0.0,
                        h_in: (h.hidden > 0).then(|| hid.to_vec()),
                    }
                })
                .collect();
            buf.push(EpisodeRecord { experiences })?;
        }
        let mut extra = [0u8; 1];
        if r.read(&mut extra)? != 0 {
            return Err(ReplayError::Format("trailing bytes".into()));
        }
        Ok(buf)
    }
}
