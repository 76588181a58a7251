//! Round-based simulation of the decentralized algorithm.
//!
//! Each sensor clusters its own shard roughly, then repeatedly receives the
//! partial sums `(P, Q, Φ̂, V)` of `J` peers, absorbs the components that the
//! fusion test matches with its own, adopts the others as new centroids, and
//! refreshes its partial sums on local data. Slots are synchronous: every
//! sensor reads its peers' state from the end of the previous slot.
//!
//! State is kept in whitened coordinates (see [`crate::centrex`]). `P` is
//! linear in the data, so whitened partial sums are exactly `Ψ P`, and the
//! ledger counts are unaffected.

mod kmeans;
mod ledger;

pub use kmeans::{decentralized_kmeans, DecentralizedKmeans};
pub use ledger::{lambda1, predicted_messages_kmeans, write_trace_csv, MessageLedger, TraceRecord};

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::centrex::{
    estimate_whitened, fuse_by, nearest, weighted_sums, CentrexParams, CentroidEstimate,
    ClusteringResult,
};
use crate::error::{Error, Result};
use crate::mathcore::{CompressionModel, RSquared};
use crate::seed::{self, purpose};
use crate::wald::{fusion_merges, fusion_scale, Thresholds};
use crate::{Matrix, Vector};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    /// Any sensor can reach any other.
    #[default]
    Complete,
}

/// Rule deciding whether a received component matches a local centroid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeerMatching {
    /// Test 4: match when the statistic is at most `λ_{1−α}`.
    #[default]
    FusionTest,
    /// Match when the same statistic is at most `λ_α`, i.e. when a Wald test
    /// does not reject equality. Not part of the published protocol: test 4
    /// matches two independent estimates of one centroid only with
    /// probability about `α`, so peers' components are almost always
    /// adopted as new centroids. This rule lets sensors actually pool their
    /// partial sums.
    WaldTest,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetworkConfig {
    /// `S`.
    pub sensors: usize,
    /// `T`: exchange slots after local initialization.
    pub slots: usize,
    /// `J`: peers heard by each sensor per slot.
    pub peers: usize,
    pub topology: Topology,
    pub matching: PeerMatching,
    pub seed: u64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            sensors: 20,
            slots: 10,
            peers: 2,
            topology: Topology::Complete,
            matching: PeerMatching::FusionTest,
            seed: 0,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sensors == 0 {
            return Err(Error::InvalidArgument("need at least one sensor".into()));
        }
        if self.peers >= self.sensors {
            return Err(Error::InvalidArgument(format!(
                "J = {} peers needs at least {} sensors, have {}",
                self.peers,
                self.peers + 1,
                self.sensors
            )));
        }
        Ok(())
    }
}

/// Local state of one sensor, in whitened coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct SensorState {
    pub sensor_id: usize,
    /// Whitened shard, one datum per column.
    pub data: Matrix,
    pub centroids: Vec<Vector>,
    pub p: Vec<Vector>,
    pub q: Vec<f64>,
    pub v: Vec<usize>,
    /// Local indices rejected by the membership gate.
    pub unassigned: Vec<usize>,
}

impl SensorState {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    /// Centroids mapped back to measurement coordinates.
    pub fn centroids_in(&self, model: &CompressionModel) -> Vec<Vector> {
        self.centroids
            .iter()
            .map(|u| model.unwhiten_vector(u))
            .collect()
    }

    /// Scalars in one transmission of this state: `K·(m + 1 + m + 1)`.
    pub fn message_size(&self) -> u64 {
        2 * (self.k() * (self.data.nrows() + 1)) as u64
    }

    /// Gated nearest-centroid classification (refreshes `V` and the
    /// unassigned list), then partial sums over all local data.
    fn classify_and_sum(&mut self, th: &Thresholds) {
        self.v = vec![0; self.k()];
        self.unassigned.clear();
        for (i, (k, dist)) in nearest(&self.data, &self.centroids).into_iter().enumerate() {
            if dist <= th.wald {
                self.v[k] += 1;
            } else {
                self.unassigned.push(i);
            }
        }
        let (p, q) = self
            .centroids
            .iter()
            .map(|u| weighted_sums(&self.data, u, 1.0))
            .unzip();
        self.p = p;
        self.q = q;
    }

    fn fuse(&mut self, r2: f64, th: &Thresholds) {
        let items = std::mem::take(&mut self.centroids)
            .into_iter()
            .zip(std::mem::take(&mut self.v))
            .collect();
        let fused = fuse_by(
            items,
            |a: &(Vector, usize), b| fusion_merges(pair_statistic(&a.0, a.1, &b.0, b.1, r2), th),
            |a, b| {
                a.0 = (&a.0 + &b.0) * 0.5;
                a.1 += b.1;
            },
        );
        let (centroids, v) = fused.into_iter().unzip();
        self.centroids = centroids;
        self.v = v;
    }

    /// Absorb one received message: each received component joins the first
    /// local centroid that test 4 matches; unmatched components are appended.
    pub fn absorb(&mut self, msg: &SensorState, r2: f64, th: &Thresholds, rule: PeerMatching) {
        let local = self.k();
        let mut adopted = Vec::new();
        for kk in 0..msg.k() {
            let hit = (0..local).find(|&k| {
                let stat = pair_statistic(
                    &self.centroids[k],
                    self.v[k],
                    &msg.centroids[kk],
                    msg.v[kk],
                    r2,
                );
                match rule {
                    PeerMatching::FusionTest => fusion_merges(stat, th),
                    PeerMatching::WaldTest => stat <= th.wald,
                }
            });
            match hit {
                Some(k) => {
                    self.p[k] += &msg.p[kk];
                    self.q[k] += msg.q[kk];
                }
                None => adopted.push(kk),
            }
        }
        for kk in adopted {
            self.centroids.push(msg.centroids[kk].clone());
            self.p.push(msg.p[kk].clone());
            self.q.push(msg.q[kk]);
            self.v.push(msg.v[kk]);
        }
    }

    /// Local phase after the exchanges of a slot: `Φ̂ = P/Q`, fusion, gated
    /// classification, and fresh partial sums.
    pub fn refine(&mut self, r2: f64, th: &Thresholds) {
        for ((u, p), &q) in self.centroids.iter_mut().zip(&self.p).zip(&self.q) {
            let next = p / q;
            // an all-zero Q (every weight underflowed) keeps the old centroid
            if q > 0.0 && next.iter().all(|x| x.is_finite()) {
                *u = next;
            }
        }
        self.fuse(r2, th);
        self.classify_and_sum(th);
    }

    /// Ungated classification of the local shard.
    pub fn final_result(&self, model: &CompressionModel, passes: usize) -> ClusteringResult {
        let labels = nearest(&self.data, &self.centroids);
        let mut counts = vec![0usize; self.k()];
        labels.iter().for_each(|&(k, _)| counts[k] += 1);
        let centroids = self
            .centroids
            .iter()
            .zip(counts)
            .map(|(u, n)| CentroidEstimate {
                phi_hat: model.unwhiten_vector(u),
                n_hat: n,
                iterations: passes,
            })
            .collect::<Vec<_>>();
        ClusteringResult {
            k_found: centroids.len(),
            centroids,
            assignments: labels.into_iter().map(|(k, _)| Some(k)).collect(),
            estimation_passes: passes,
        }
    }
}

/// Test-4 statistic for two centroids with class counts `va`, `vb`
/// (zero counts as one).
fn pair_statistic(a: &Vector, va: usize, b: &Vector, vb: usize, r2: f64) -> f64 {
    let scale = fusion_scale(va.max(1), vb.max(1), 1.0, r2).expect("sizes clamped");
    (a - b).norm() / scale.sqrt()
}

/// Rough clustering of one shard: single-step centroid estimates until
/// every datum is marked, fusion, gated classification, partial sums.
pub fn local_init(
    sensor_id: usize,
    shard: &[Vector],
    model: &CompressionModel,
    params: &CentrexParams,
    r2: &RSquared,
    seed_: u64,
) -> Result<SensorState> {
    if shard.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "sensor {sensor_id} has no data"
        )));
    }
    let th = Thresholds::new(model.m(), params.alpha)?;
    let y = model.whiten_all(shard)?;
    let mut rng = seed::stream(seed_, &[purpose::DECENTREX, sensor_id as u64]);
    let mut marked = vec![false; shard.len()];
    let mut remaining = shard.len();
    let mut estimates = Vec::new();
    while remaining > 0 {
        let e = estimate_whitened(&y, &marked, params, &th, false, &mut rng)?;
        for &i in &e.newly_marked {
            marked[i] = true;
        }
        remaining -= e.newly_marked.len();
        estimates.push((e.u, e.n_hat));
    }
    let fused = fuse_by(
        estimates,
        |a, b| fusion_merges(pair_statistic(&a.0, a.1, &b.0, b.1, r2.value), &th),
        |a, b| {
            a.0 = (&a.0 + &b.0) * 0.5;
            a.1 += b.1;
        },
    );
    let mut state = SensorState {
        sensor_id,
        data: y,
        centroids: fused.into_iter().map(|(u, _)| u).collect(),
        p: Vec::new(),
        q: Vec::new(),
        v: Vec::new(),
        unassigned: Vec::new(),
    };
    state.classify_and_sum(&th);
    Ok(state)
}

/// The `J` senders heard by `receiver` in `slot`, in processing order.
pub fn select_peers(net: &NetworkConfig, slot: usize, receiver: usize) -> Vec<usize> {
    if net.peers == 0 {
        return Vec::new();
    }
    let mut rng = seed::stream(net.seed, &[purpose::PEERS, slot as u64, receiver as u64]);
    index::sample(&mut rng, net.sensors - 1, net.peers)
        .into_iter()
        .map(|i| if i >= receiver { i + 1 } else { i })
        .collect()
}

/// One synchronous exchange slot (`slot ≥ 1`).
pub fn exchange_slot(
    states: &mut [SensorState],
    net: &NetworkConfig,
    r2: &RSquared,
    th: &Thresholds,
    slot: usize,
    ledger: &mut MessageLedger,
) {
    let snapshot = states.to_vec();
    for (s, state) in states.iter_mut().enumerate() {
        for sender in select_peers(net, slot, s) {
            let msg = &snapshot[sender];
            ledger.record(slot - 1, sender, msg.message_size());
            state.absorb(msg, r2.value, th, net.matching);
        }
        state.refine(r2.value, th);
    }
}

/// Output of a decentralized run.
#[derive(Clone, Debug)]
pub struct DecentrexOutput {
    pub sensors: Vec<ClusteringResult>,
    /// Final centroid count of each sensor.
    pub k_found: Vec<usize>,
    pub ledger: MessageLedger,
    pub trace: Vec<TraceRecord>,
    pub states: Vec<SensorState>,
}

impl DecentrexOutput {
    /// True when every sensor ends with the same number of centroids.
    pub fn sensors_agree(&self) -> bool {
        self.k_found.windows(2).all(|w| w[0] == w[1])
    }
}

fn trace_slot(
    trace: &mut Vec<TraceRecord>,
    states: &[SensorState],
    ledger: &MessageLedger,
    slot: usize,
) {
    trace.extend(states.iter().enumerate().map(|(s, st)| TraceRecord {
        slot,
        sensor: s,
        k_found: st.k(),
        scalars_sent_cumulative: ledger.per_sensor[s],
    }));
}

/// Run from already initialized sensor states.
pub fn run_from_states(
    mut states: Vec<SensorState>,
    model: &CompressionModel,
    net: &NetworkConfig,
    params: &CentrexParams,
    r2: &RSquared,
) -> Result<DecentrexOutput> {
    net.validate()?;
    if states.len() != net.sensors {
        return Err(Error::InvalidArgument(format!(
            "network declares {} sensors, got {} states",
            net.sensors,
            states.len()
        )));
    }
    let th = Thresholds::new(model.m(), params.alpha)?;
    let mut ledger = MessageLedger::new(net.sensors);
    let mut trace = Vec::with_capacity(net.sensors * (net.slots + 1));
    trace_slot(&mut trace, &states, &ledger, 0);
    for slot in 1..=net.slots {
        exchange_slot(&mut states, net, r2, &th, slot, &mut ledger);
        trace_slot(&mut trace, &states, &ledger, slot);
    }
    let sensors: Vec<ClusteringResult> = states
        .iter()
        .map(|st| st.final_result(model, net.slots + 1))
        .collect();
    Ok(DecentrexOutput {
        k_found: sensors.iter().map(|r| r.k_found).collect(),
        sensors,
        ledger,
        trace,
        states,
    })
}

/// Local initialization on every shard, `T` exchange slots, and a final
/// ungated classification per sensor.
pub fn decentrex_run(
    shards: &[Vec<Vector>],
    model: &CompressionModel,
    net: &NetworkConfig,
    params: &CentrexParams,
    r2: &RSquared,
    seed_: u64,
) -> Result<DecentrexOutput> {
    params.validate()?;
    net.validate()?;
    if shards.len() != net.sensors {
        return Err(Error::InvalidArgument(format!(
            "network declares {} sensors, got {} shards",
            net.sensors,
            shards.len()
        )));
    }
    let states = shards
        .iter()
        .enumerate()
        .map(|(s, shard)| local_init(s, shard, model, params, r2, seed_))
        .collect::<Result<Vec<_>>>()?;
    run_from_states(states, model, net, params, r2)
}
