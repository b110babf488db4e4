//! Per-pattern communication accounting.
//!
//! Every rank owns a [`CommTrace`]; the transport updates it on each
//! operation. After a run the per-rank traces are merged in rank order into
//! a [`MergedTrace`], which can answer totals per pattern class and export
//! the JSON document described in the crate docs. Send counters cover
//! remote messages only; a delivery to self is logged as a 0-byte event so
//! local traffic never inflates byte totals.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Communication pattern classes under which traffic is accounted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pattern {
    Halo,
    AllToAll,
    Ring,
    Migrate,
    Reduce,
    PointToPoint,
}

impl Pattern {
    pub const ALL: [Pattern; 6] = [
        Pattern::Halo,
        Pattern::AllToAll,
        Pattern::Ring,
        Pattern::Migrate,
        Pattern::Reduce,
        Pattern::PointToPoint,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pattern::Halo => "halo",
            Pattern::AllToAll => "all_to_all",
            Pattern::Ring => "ring",
            Pattern::Migrate => "migrate",
            Pattern::Reduce => "reduce",
            Pattern::PointToPoint => "point_to_point",
        }
    }

    fn index(self) -> usize {
        match self {
            Pattern::Halo => 0,
            Pattern::AllToAll => 1,
            Pattern::Ring => 2,
            Pattern::Migrate => 3,
            Pattern::Reduce => 4,
            Pattern::PointToPoint => 5,
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Monotone counters for one pattern class on one rank.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternCounters {
    pub messages_sent: u64,
    pub bytes_sent: u64,
    pub messages_received: u64,
    pub bytes_received: u64,
    /// Wall time spent inside transport calls under this pattern. Not part
    /// of the exported trace document (it is not reproducible).
    #[serde(skip)]
    pub wall_nanos: u64,
}

/// One logged send. `bytes` is zero for a delivery to self.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub step: u64,
    pub pattern: Pattern,
    pub peer: usize,
    pub bytes: u64,
}

/// Communication record of a single rank.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CommTrace {
    counters: [PatternCounters; 6],
    events: Vec<TraceEvent>,
    #[serde(skip)]
    record_events: bool,
}

impl CommTrace {
    pub fn new(record_events: bool) -> Self {
        Self {
            record_events,
            ..Self::default()
        }
    }

    pub fn counters(&self, pattern: Pattern) -> PatternCounters {
        self.counters[pattern.index()]
    }

    pub fn all_counters(&self) -> [PatternCounters; 6] {
        self.counters
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub(crate) fn log_send(&mut self, step: u64, pattern: Pattern, peer: usize, is_self: bool, bytes: u64) {
        let c = &mut self.counters[pattern.index()];
        let wire_bytes = if is_self { 0 } else { bytes };
        if !is_self {
            c.messages_sent += 1;
            c.bytes_sent += wire_bytes;
        }
        if self.record_events {
            self.events.push(TraceEvent {
                step,
                pattern,
                peer,
                bytes: wire_bytes,
            });
        }
    }

    pub(crate) fn log_recv(&mut self, pattern: Pattern, is_self: bool, bytes: u64) {
        if !is_self {
            let c = &mut self.counters[pattern.index()];
            c.messages_received += 1;
            c.bytes_received += bytes;
        }
    }

    pub(crate) fn log_wall(&mut self, pattern: Pattern, nanos: u64) {
        self.counters[pattern.index()].wall_nanos += nanos;
    }
}

/// All ranks' traces, in rank order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MergedTrace {
    pub ranks: usize,
    pub per_rank: Vec<CommTrace>,
}

impl MergedTrace {
    /// Summed counters for one pattern class over all ranks.
    pub fn total(&self, pattern: Pattern) -> PatternCounters {
        let mut t = PatternCounters::default();
        for trace in &self.per_rank {
            let c = trace.counters(pattern);
            t.messages_sent += c.messages_sent;
            t.bytes_sent += c.bytes_sent;
            t.messages_received += c.messages_received;
            t.bytes_received += c.bytes_received;
            t.wall_nanos += c.wall_nanos;
        }
        t
    }

    /// True when no pattern class saw any send.
    pub fn is_empty(&self) -> bool {
        Pattern::ALL.iter().all(|&p| {
            let t = self.total(p);
            t.messages_sent == 0 && t.bytes_sent == 0
        })
    }

    /// Message-count signature over all pattern classes, used to compare
    /// schedule shapes between configurations.
    pub fn message_signature(&self) -> [u64; 6] {
        let mut sig = [0u64; 6];
        for (s, p) in sig.iter_mut().zip(Pattern::ALL) {
            *s = self.total(p).messages_sent;
        }
        sig
    }

    /// Export the trace document: `{run_id, ranks, patterns, per_rank}`,
    /// plus per-rank event logs when `include_events` is set.
    pub fn export(&self, run_id: &str, include_events: bool) -> serde_json::Value {
        let patterns = |counters: &dyn Fn(Pattern) -> PatternCounters| {
            let mut map = serde_json::Map::new();
            for p in Pattern::ALL {
                let c = counters(p);
                map.insert(
                    p.name().to_string(),
                    serde_json::json!({ "messages": c.messages_sent, "bytes": c.bytes_sent }),
                );
            }
            serde_json::Value::Object(map)
        };

        let per_rank: Vec<serde_json::Value> = self
            .per_rank
            .iter()
            .enumerate()
            .map(|(rank, trace)| {
                let mut entry = serde_json::json!({
                    "rank": rank,
                    "patterns": patterns(&|p| trace.counters(p)),
                });
                if include_events {
                    entry["events"] = serde_json::to_value(trace.events()).unwrap();
                }
                entry
            })
            .collect();

        serde_json::json!({
            "run_id": run_id,
            "ranks": self.ranks,
            "patterns": patterns(&|p| self.total(p)),
            "per_rank": per_rank,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_sends_count_zero_bytes() {
        let mut t = CommTrace::new(true);
        t.log_send(0, Pattern::Ring, 3, false, 16);
        t.log_send(1, Pattern::Ring, 0, true, 16);
        let c = t.counters(Pattern::Ring);
        assert_eq!(c.messages_sent, 1);
        assert_eq!(c.bytes_sent, 16);
        assert_eq!(t.events().len(), 2);
        assert_eq!(t.events()[1].bytes, 0);
        let event_total: u64 = t.events().iter().map(|e| e.bytes).sum();
        assert_eq!(event_total, c.bytes_sent);
    }

    #[test]
    fn export_schema_has_expected_keys() {
        let merged = MergedTrace {
            ranks: 2,
            per_rank: vec![CommTrace::new(false), CommTrace::new(false)],
        };
        let doc = merged.export("test-run", false);
        assert_eq!(doc["run_id"], "test-run");
        assert_eq!(doc["ranks"], 2);
        assert!(doc["patterns"]["all_to_all"]["messages"].is_u64());
        assert_eq!(doc["per_rank"].as_array().unwrap().len(), 2);
        assert!(doc["per_rank"][0].get("events").is_none());
    }
}
