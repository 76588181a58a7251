use rand::seq::index;

use super::{MessageLedger, NetworkConfig};
use crate::baselines::{aic, BaselineResult};
use crate::error::{Error, Result};
use crate::seed::{self, purpose};
use crate::Vector;

/// Per-sensor outcome of decentralized K-means with AIC selection of `K`.
#[derive(Clone, Debug)]
pub struct DecentralizedKmeans {
    pub sensors: Vec<BaselineResult>,
    pub ledger: MessageLedger,
}

fn nearest(z: &Vector, cs: &[Vector]) -> (usize, f64) {
    cs.iter()
        .enumerate()
        .map(|(k, c)| (k, (z - c).norm_squared()))
        .fold(
            (0, f64::INFINITY),
            |acc, x| if x.1 < acc.1 { x } else { acc },
        )
}

/// Local means and counts of a shard against centroids `cs`; empty clusters
/// report the current centroid with count zero.
fn local_stats(shard: &[Vector], cs: &[Vector]) -> (Vec<Vector>, Vec<usize>) {
    let mut sums = vec![Vector::zeros(cs[0].len()); cs.len()];
    let mut counts = vec![0usize; cs.len()];
    for z in shard {
        let (k, _) = nearest(z, cs);
        sums[k] += z;
        counts[k] += 1;
    }
    let means = sums
        .into_iter()
        .zip(&counts)
        .zip(cs)
        .map(|((s, &n), c)| if n > 0 { s / n as f64 } else { c.clone() })
        .collect();
    (means, counts)
}

/// Local inertia, centroids and restart index of one K-means run.
type Candidate = (f64, Vec<Vector>, usize);

/// Gossip K-means: each slot, every sensor replaces its centroids by the
/// count-weighted average of its own local means and those of `J` peers.
/// Run for every `K` in `1..=k_max` and `restarts` random initializations
/// (shared by all sensors); each sensor keeps, per `K`, the restart with the
/// lowest local inertia and then picks `K` by AIC on its own data.
///
/// Every transmission carries `K` means and `K` counts, so the ledger totals
/// `R·T·J·S·K̄(K̄+1)/2·(m+1)` scalars.
pub fn decentralized_kmeans(
    shards: &[Vec<Vector>],
    net: &NetworkConfig,
    k_max: usize,
    restarts: usize,
    seed_: u64,
) -> Result<DecentralizedKmeans> {
    net.validate()?;
    if shards.len() != net.sensors || shards.iter().any(Vec::is_empty) {
        return Err(Error::InvalidArgument(format!(
            "need {} nonempty shards",
            net.sensors
        )));
    }
    if k_max == 0 || restarts == 0 {
        return Err(Error::InvalidArgument(
            "need k_max ≥ 1 and restarts ≥ 1".into(),
        ));
    }
    let pooled: Vec<&Vector> = shards.iter().flatten().collect();
    if k_max > pooled.len() {
        return Err(Error::InvalidArgument(format!(
            "k_max = {k_max} exceeds the {} available data",
            pooled.len()
        )));
    }
    let m = pooled[0].len();
    let mut ledger = MessageLedger::new(net.sensors);
    let mut slot_index = 0;
    // best[s][k-1]
    let mut best: Vec<Vec<Option<Candidate>>> = vec![vec![None; k_max]; net.sensors];

    for k in 1..=k_max {
        for r in 0..restarts {
            let mut rng = seed::stream(seed_, &[purpose::KMEANS, k as u64, r as u64]);
            let init: Vec<Vector> = index::sample(&mut rng, pooled.len(), k)
                .into_iter()
                .map(|i| pooled[i].clone())
                .collect();
            let mut cents = vec![init; net.sensors];
            for t in 0..net.slots {
                let stats: Vec<_> = shards
                    .iter()
                    .zip(&cents)
                    .map(|(shard, cs)| local_stats(shard, cs))
                    .collect();
                for (s, cs) in cents.iter_mut().enumerate() {
                    let peers = super::select_peers(
                        &NetworkConfig {
                            seed: seed::derive(net.seed, &[k as u64, r as u64]),
                            ..net.clone()
                        },
                        t + 1,
                        s,
                    );
                    let mut sums: Vec<Vector> = stats[s]
                        .0
                        .iter()
                        .zip(&stats[s].1)
                        .map(|(mu, &n)| mu * n as f64)
                        .collect();
                    let mut counts = stats[s].1.clone();
                    for p in peers {
                        ledger.record(slot_index, p, (k * (m + 1)) as u64);
                        for j in 0..k {
                            sums[j].axpy(stats[p].1[j] as f64, &stats[p].0[j], 1.0);
                            counts[j] += stats[p].1[j];
                        }
                    }
                    for j in 0..k {
                        if counts[j] > 0 {
                            cs[j] = &sums[j] / counts[j] as f64;
                        }
                    }
                }
                slot_index += 1;
            }
            for (s, cs) in cents.into_iter().enumerate() {
                let inertia: f64 = shards[s].iter().map(|z| nearest(z, &cs).1).sum();
                let slot = &mut best[s][k - 1];
                if slot.as_ref().is_none_or(|(b, _, _)| inertia < *b) {
                    *slot = Some((inertia, cs, r));
                }
            }
        }
    }

    let sensors = shards
        .iter()
        .zip(best)
        .map(|(shard, per_k)| {
            let (_, (inertia, cs, replicate_used)) = per_k
                .into_iter()
                .map(|b| b.expect("every K ran"))
                .map(|b| (aic(shard.len(), m, b.0, b.1.len()), b))
                .fold(None, |acc: Option<(f64, Candidate)>, x| match acc {
                    Some(a) if a.0 <= x.0 => Some(a),
                    _ => Some(x),
                })
                .expect("k_max ≥ 1");
            BaselineResult {
                k_found: cs.len(),
                assignments: shard.iter().map(|z| Some(nearest(z, &cs).0)).collect(),
                centroids: cs,
                inertia,
                replicate_used,
            }
        })
        .collect();
    Ok(DecentralizedKmeans { sensors, ledger })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decentrex::predicted_messages_kmeans;

    fn shards() -> Vec<Vec<Vector>> {
        let mut out = vec![Vec::new(); 4];
        for i in 0..40 {
            let c = if i % 2 == 0 { 0.0 } else { 10.0 };
            out[i % 4].push(Vector::from_vec(vec![c, 1.0]));
        }
        out
    }

    #[test]
    fn ledger_matches_closed_form() {
        let net = NetworkConfig {
            sensors: 4,
            slots: 5,
            peers: 2,
            ..Default::default()
        };
        let out = decentralized_kmeans(&shards(), &net, 4, 3, 1).unwrap();
        assert_eq!(
            out.ledger.scalars_sent,
            predicted_messages_kmeans(3, 5, 2, 4, 4, 2)
        );
    }

    #[test]
    fn finds_two_groups_everywhere() {
        let net = NetworkConfig {
            sensors: 4,
            slots: 5,
            peers: 2,
            ..Default::default()
        };
        let out = decentralized_kmeans(&shards(), &net, 4, 3, 1).unwrap();
        assert!(out.sensors.iter().all(|r| r.k_found == 2));
    }
}
