use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar counts of everything transmitted during a simulation.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageLedger {
    pub scalars_sent: u64,
    pub transmissions: u64,
    /// Scalars sent during each exchange slot (index 0 is the first exchange).
    pub per_slot: Vec<u64>,
    /// Scalars sent by each sensor.
    pub per_sensor: Vec<u64>,
}

impl MessageLedger {
    pub fn new(sensors: usize) -> Self {
        Self {
            per_sensor: vec![0; sensors],
            ..Default::default()
        }
    }

    pub fn record(&mut self, slot: usize, sender: usize, scalars: u64) {
        if self.per_slot.len() <= slot {
            self.per_slot.resize(slot + 1, 0);
        }
        if self.per_sensor.len() <= sender {
            self.per_sensor.resize(sender + 1, 0);
        }
        self.per_slot[slot] += scalars;
        self.per_sensor[sender] += scalars;
        self.scalars_sent += scalars;
        self.transmissions += 1;
    }
}

/// Closed-form message count of the decentralized algorithm with a constant
/// centroid count `k` per sensor: `2·T·J·S·K·(m+1)`.
pub fn lambda1(slots: usize, peers: usize, sensors: usize, k: usize, m: usize) -> u64 {
    2 * (slots * peers * sensors * k * (m + 1)) as u64
}

/// Closed-form message count of decentralized K-means run for
/// `K = 1..=k_max` with `restarts` restarts each:
/// `R·T·J·S·K̄(K̄+1)/2·(m+1)`.
pub fn predicted_messages_kmeans(
    restarts: usize,
    slots: usize,
    peers: usize,
    sensors: usize,
    k_max: usize,
    m: usize,
) -> u64 {
    (restarts * slots * peers * sensors * (k_max * (k_max + 1) / 2) * (m + 1)) as u64
}

/// One row of the simulation trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    /// 0 for local initialization, then `1..=T` for exchange slots.
    pub slot: usize,
    pub sensor: usize,
    pub k_found: usize,
    /// Scalars sent by this sensor so far.
    pub scalars_sent_cumulative: u64,
}

pub fn write_trace_csv<W: Write>(records: &[TraceRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r).map_err(|e| Error::Data(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert_eq!(lambda1(10, 2, 20, 3, 50), 2 * 10 * 2 * 20 * 3 * 51);
        assert_eq!(
            predicted_messages_kmeans(1, 10, 2, 20, 1, 50),
            10 * 2 * 20 * 51
        );
        let l1 = lambda1(10, 2, 20, 10, 50) as f64;
        let r1 = predicted_messages_kmeans(1, 10, 2, 20, 10, 50) as f64 / l1;
        let r10 = predicted_messages_kmeans(10, 10, 2, 20, 10, 50) as f64 / l1;
        assert_eq!(r1, 2.75);
        assert_eq!(r10, 27.5);
        assert_eq!(
            predicted_messages_kmeans(7, 3, 2, 5, 4, 9),
            7 * predicted_messages_kmeans(1, 3, 2, 5, 4, 9)
        );
    }

    #[test]
    fn ledger_breakdowns_sum_to_total() {
        let mut l = MessageLedger::new(3);
        l.record(0, 2, 10);
        l.record(1, 0, 4);
        l.record(1, 2, 6);
        assert_eq!(l.scalars_sent, 20);
        assert_eq!(l.per_slot, vec![10, 10]);
        assert_eq!(l.per_sensor, vec![4, 0, 16]);
        assert_eq!(l.transmissions, 3);
    }

    #[test]
    fn trace_header_is_exact() {
        let mut buf = Vec::new();
        let rec = TraceRecord {
            slot: 1,
            sensor: 0,
            k_found: 2,
            scalars_sent_cumulative: 12,
        };
        write_trace_csv(&[rec], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "slot,sensor,k_found,scalars_sent_cumulative\n1,0,2,12\n"
        );
    }
}
