//! In-process message passing between simulated ranks.
//!
//! A [`RankGroup`] runs R rank bodies to completion and returns their
//! results plus a merged [`CommTrace`]. Ranks share no mutable state; all
//! inter-rank data flow goes through the collective operations on [`Comm`]
//! (`exchange`, `ring_shift`, `all_reduce`, `barrier`). Each operation is a
//! synchronizing collective: every rank contributes, a deterministic
//! combine routes or reduces the contributions, and every rank picks up its
//! result. Results therefore depend only on the contributed values, never
//! on thread scheduling.
//!
//! Two schedulers are available: [`Scheduler::Threaded`] runs one OS thread
//! per rank; [`Scheduler::Sequential`] serializes execution, handing a turn
//! token from rank to rank at every communication point (round-robin), for
//! debugging and reproducible CI baselines. Both produce identical values
//! and traces.
//!
//! Ordering contract: deliveries within one exchange are sorted by source
//! rank, and collectives are totally ordered per rank, which gives FIFO per
//! (source, dest, pattern). A payload sent to self is delivered locally and
//! traced as zero bytes.

pub mod trace;

pub use trace::{CommTrace, MergedTrace, Pattern, PatternCounters, TraceEvent};

use std::collections::BTreeMap;
use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

/// Elementwise reduction applied by [`Comm::all_reduce`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReduceOp {
    Sum,
    Max,
    Min,
}

impl ReduceOp {
    fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            ReduceOp::Sum => a + b,
            ReduceOp::Max => a.max(b),
            ReduceOp::Min => a.min(b),
        }
    }
}

impl fmt::Display for ReduceOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReduceOp::Sum => write!(f, "sum"),
            ReduceOp::Max => write!(f, "max"),
            ReduceOp::Min => write!(f, "min"),
        }
    }
}

/// Direction of a ring shift. `Forward` moves each payload to rank+1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingDirection {
    Forward,
    Backward,
}

impl RingDirection {
    fn offset(self) -> i64 {
        match self {
            RingDirection::Forward => 1,
            RingDirection::Backward => -1,
        }
    }
}

/// How rank bodies are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheduler {
    /// One OS thread per rank, running concurrently.
    #[default]
    Threaded,
    /// Ranks execute one at a time, yielding at communication points.
    Sequential,
}

/// Errors surfaced by [`RankGroup::run`].
#[derive(Debug, Clone, thiserror::Error)]
pub enum TransportError {
    #[error("invalid rank group: {0}")]
    InvalidGroup(String),
    #[error("deadlock suspected after {timeout:?}: {diagnostic}")]
    Deadlock { timeout: Duration, diagnostic: String },
    #[error("collective mismatch: {0}")]
    CollectiveMismatch(String),
    #[error("all_reduce length mismatch: {0}")]
    ReduceLengthMismatch(String),
    #[error("rank {rank} panicked: {message}")]
    RankPanicked { rank: usize, message: String },
}

/// Results of all rank bodies plus the merged communication trace.
#[derive(Debug)]
pub struct RunOutput<T> {
    /// Per-rank return values, in rank order.
    pub results: Vec<T>,
    pub trace: MergedTrace,
}

// ---------------------------------------------------------------------------
// Collective rendezvous board
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum OpSig {
    Exchange(Pattern),
    Ring(i64),
    Reduce(ReduceOp),
}

impl fmt::Display for OpSig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpSig::Exchange(p) => write!(f, "exchange({p})"),
            OpSig::Ring(d) => write!(f, "ring_shift({d:+})"),
            OpSig::Reduce(op) => write!(f, "all_reduce({op})"),
        }
    }
}

enum Contribution {
    Sends(Vec<(usize, Vec<u8>)>),
    Payload(Vec<u8>),
    Values(Vec<f64>),
}

enum Output {
    Received(Vec<(usize, Vec<u8>)>),
    Payload(Vec<u8>),
    Values(Vec<f64>),
}

struct EpochState {
    sig: OpSig,
    joined: usize,
    contribs: Vec<Option<Contribution>>,
    outputs: Vec<Option<Output>>,
    done: bool,
    taken: usize,
}

impl EpochState {
    fn new(sig: OpSig, ranks: usize) -> Self {
        Self {
            sig,
            joined: 0,
            contribs: (0..ranks).map(|_| None).collect(),
            outputs: (0..ranks).map(|_| None).collect(),
            done: false,
            taken: 0,
        }
    }
}

struct PendingOp {
    epoch: u64,
    desc: String,
}

struct BoardState {
    epochs: BTreeMap<u64, EpochState>,
    pending: Vec<Option<PendingOp>>,
    /// Number of collectives each rank has entered.
    rank_epoch: Vec<u64>,
    finished: Vec<bool>,
    failure: Option<TransportError>,
    /// Rank holding the execution token (sequential scheduler only).
    turn: usize,
    /// Bumped on every post/take/turn change; lets waiters distinguish a
    /// stalled system from a slowly progressing one.
    progress: u64,
}

struct Board {
    ranks: usize,
    scheduler: Scheduler,
    timeout: Duration,
    state: Mutex<BoardState>,
    cv: Condvar,
}

impl Board {
    fn new(ranks: usize, scheduler: Scheduler, timeout: Duration) -> Self {
        Self {
            ranks,
            scheduler,
            timeout,
            state: Mutex::new(BoardState {
                epochs: BTreeMap::new(),
                pending: (0..ranks).map(|_| None).collect(),
                rank_epoch: vec![0; ranks],
                finished: vec![false; ranks],
                failure: None,
                turn: 0,
                progress: 0,
            }),
            cv: Condvar::new(),
        }
    }

    fn fail(&self, st: &mut BoardState, err: TransportError) {
        if st.failure.is_none() {
            st.failure = Some(err);
        }
        self.cv.notify_all();
    }

    fn diagnostic(&self, st: &BoardState) -> String {
        let mut parts = Vec::with_capacity(self.ranks);
        for r in 0..self.ranks {
            let status = if st.finished[r] {
                "finished".to_string()
            } else {
                match &st.pending[r] {
                    Some(p) => format!("blocked in {} (collective #{})", p.desc, p.epoch),
                    None => "no pending transport call".to_string(),
                }
            };
            parts.push(format!("rank {r}: {status}"));
        }
        parts.join("; ")
    }

    /// A rank that can make progress right now: running user code, parked at
    /// its start gate, or blocked on a completed collective.
    fn next_runnable(&self, st: &BoardState, from: usize) -> Option<usize> {
        for k in 1..=self.ranks {
            let s = (from + k) % self.ranks;
            if st.finished[s] {
                continue;
            }
            match &st.pending[s] {
                None => return Some(s),
                Some(p) => {
                    if st.epochs.get(&p.epoch).map(|e| e.done).unwrap_or(false) {
                        return Some(s);
                    }
                }
            }
        }
        None
    }

    fn pass_turn(&self, st: &mut BoardState, from: usize) {
        if self.scheduler != Scheduler::Sequential {
            return;
        }
        if let Some(next) = self.next_runnable(st, from) {
            st.turn = next;
        }
        st.progress += 1;
        self.cv.notify_all();
    }

    /// Called when a rank's body returns: any open collective that is still
    /// waiting for this rank can never complete.
    fn finish(&self, rank: usize) {
        let mut st = self.state.lock().unwrap();
        st.finished[rank] = true;
        let my_epoch = st.rank_epoch[rank];
        let impossible: Option<(u64, String)> = st
            .epochs
            .iter()
            .find(|(&e, epoch)| !epoch.done && e >= my_epoch)
            .map(|(&e, epoch)| (e, epoch.sig.to_string()));
        if let Some((e, sig)) = impossible {
            let diag = format!(
                "rank {rank} returned without joining {sig} (collective #{e}); {}",
                self.diagnostic(&st)
            );
            self.fail(&mut st, TransportError::CollectiveMismatch(diag));
        }
        st.progress += 1;
        self.pass_turn(&mut st, rank);
        self.cv.notify_all();
    }

    fn record_panic(&self, rank: usize, message: String) {
        let mut st = self.state.lock().unwrap();
        st.finished[rank] = true;
        self.fail(&mut st, TransportError::RankPanicked { rank, message });
        st.progress += 1;
        if self.scheduler == Scheduler::Sequential {
            if let Some(next) = self.next_runnable(&st, rank) {
                st.turn = next;
            }
        }
        self.cv.notify_all();
    }

    /// Block until this rank holds the execution token (sequential mode).
    fn wait_for_turn(&self, rank: usize) {
        if self.scheduler != Scheduler::Sequential {
            return;
        }
        let mut st = self.state.lock().unwrap();
        loop {
            if st.failure.is_some() || st.turn == rank {
                return;
            }
            st = self.cv.wait(st).unwrap();
        }
    }

    fn combine(&self, epoch: &mut EpochState) -> Result<(), TransportError> {
        let ranks = self.ranks;
        match epoch.sig {
            OpSig::Exchange(_) => {
                let mut received: Vec<Vec<(usize, Vec<u8>)>> = (0..ranks).map(|_| Vec::new()).collect();
                for src in 0..ranks {
                    let Some(Contribution::Sends(sends)) = epoch.contribs[src].take() else {
                        unreachable!("exchange contribution missing");
                    };
                    for (dest, payload) in sends {
                        received[dest].push((src, payload));
                    }
                }
                for (r, inbox) in received.into_iter().enumerate() {
                    epoch.outputs[r] = Some(Output::Received(inbox));
                }
            }
            OpSig::Ring(dir) => {
                for src in 0..ranks {
                    let Some(Contribution::Payload(payload)) = epoch.contribs[src].take() else {
                        unreachable!("ring contribution missing");
                    };
                    let dest = (src as i64 + dir).rem_euclid(ranks as i64) as usize;
                    epoch.outputs[dest] = Some(Output::Payload(payload));
                }
            }
            OpSig::Reduce(op) => {
                let mut values: Vec<Vec<f64>> = Vec::with_capacity(ranks);
                for src in 0..ranks {
                    let Some(Contribution::Values(v)) = epoch.contribs[src].take() else {
                        unreachable!("reduce contribution missing");
                    };
                    values.push(v);
                }
                let len = values[0].len();
                if let Some(bad) = values.iter().position(|v| v.len() != len) {
                    let lens: Vec<String> = values
                        .iter()
                        .enumerate()
                        .map(|(r, v)| format!("rank {r}: {}", v.len()))
                        .collect();
                    return Err(TransportError::ReduceLengthMismatch(format!(
                        "rank {bad} disagrees; vector lengths: {}",
                        lens.join(", ")
                    )));
                }
                let mut acc = values[0].clone();
                for v in &values[1..] {
                    for (a, b) in acc.iter_mut().zip(v) {
                        *a = op.apply(*a, *b);
                    }
                }
                for out in epoch.outputs.iter_mut() {
                    *out = Some(Output::Values(acc.clone()));
                }
            }
        }
        epoch.done = true;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Per-rank handle
// ---------------------------------------------------------------------------

/// Per-rank communicator handed to the rank body.
pub struct Comm<'a> {
    rank: usize,
    ranks: usize,
    grid: (usize, usize),
    board: &'a Board,
    trace: CommTrace,
    epoch: u64,
}

impl<'a> Comm<'a> {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn size(&self) -> usize {
        self.ranks
    }

    /// Logical 2D rank grid `(px, py)` with `px * py == size()`.
    pub fn grid(&self) -> (usize, usize) {
        self.grid
    }

    /// This rank's `(pi, pj)` coordinates in the grid (row-major, pj fastest).
    pub fn grid_coords(&self) -> (usize, usize) {
        (self.rank / self.grid.1, self.rank % self.grid.1)
    }

    pub fn rank_at(&self, pi: usize, pj: usize) -> usize {
        debug_assert!(pi < self.grid.0 && pj < self.grid.1);
        pi * self.grid.1 + pj
    }

    /// Snapshot of this rank's own counters for one pattern class. Useful
    /// for asserting trace deltas around an operation.
    pub fn counters(&self, pattern: Pattern) -> PatternCounters {
        self.trace.counters(pattern)
    }

    pub fn trace(&self) -> &CommTrace {
        &self.trace
    }

    /// Deliver each `(dest, payload)` exactly once and return everything
    /// addressed to this rank as `(source, payload)`, sorted by source.
    /// Collective: all ranks must call with the same pattern class.
    pub fn exchange(&mut self, sends: Vec<(usize, Vec<u8>)>, pattern: Pattern) -> Vec<(usize, Vec<u8>)> {
        for (dest, _) in &sends {
            assert!(
                *dest < self.ranks,
                "exchange on rank {}: dest {dest} out of range (ranks={})",
                self.rank,
                self.ranks
            );
        }
        let step = self.epoch;
        for (dest, payload) in &sends {
            self.trace
                .log_send(step, pattern, *dest, *dest == self.rank, payload.len() as u64);
        }
        let out = self.collective(OpSig::Exchange(pattern), Contribution::Sends(sends));
        let Output::Received(received) = out else {
            unreachable!()
        };
        for (src, payload) in &received {
            self.trace.log_recv(pattern, *src == self.rank, payload.len() as u64);
        }
        received
    }

    /// Pass a payload around the ring; rank i receives the payload of rank
    /// (i - direction) mod R. Collective with a common direction.
    pub fn ring_shift(&mut self, payload: Vec<u8>, direction: RingDirection) -> Vec<u8> {
        let dir = direction.offset();
        let dest = (self.rank as i64 + dir).rem_euclid(self.ranks as i64) as usize;
        let src = (self.rank as i64 - dir).rem_euclid(self.ranks as i64) as usize;
        self.trace
            .log_send(self.epoch, Pattern::Ring, dest, dest == self.rank, payload.len() as u64);
        let out = self.collective(OpSig::Ring(dir), Contribution::Payload(payload));
        let Output::Payload(received) = out else {
            unreachable!()
        };
        self.trace
            .log_recv(Pattern::Ring, src == self.rank, received.len() as u64);
        received
    }

    /// Elementwise reduction; every rank receives the same result vector.
    /// All ranks must contribute the same vector length.
    pub fn all_reduce(&mut self, values: &[f64], op: ReduceOp) -> Vec<f64> {
        // Accounted as a star schedule: contributions to rank 0, result
        // broadcast back, so total bytes sent equal total bytes received.
        let bytes = (values.len() * 8) as u64;
        let step = self.epoch;
        if self.rank == 0 {
            for t in 1..self.ranks {
                self.trace.log_send(step, Pattern::Reduce, t, false, bytes);
            }
            self.trace.log_send(step, Pattern::Reduce, 0, true, bytes);
        } else {
            self.trace.log_send(step, Pattern::Reduce, 0, false, bytes);
        }
        let out = self.collective(OpSig::Reduce(op), Contribution::Values(values.to_vec()));
        let Output::Values(result) = out else {
            unreachable!()
        };
        if self.rank == 0 {
            for _ in 1..self.ranks {
                self.trace.log_recv(Pattern::Reduce, false, bytes);
            }
        } else {
            self.trace.log_recv(Pattern::Reduce, false, bytes);
        }
        result
    }

    /// Synchronize all ranks (a zero-length reduction).
    pub fn barrier(&mut self) {
        self.all_reduce(&[], ReduceOp::Sum);
    }

    fn collective(&mut self, sig: OpSig, contrib: Contribution) -> Output {
        let epoch = self.epoch;
        self.epoch += 1;
        let pattern = match sig {
            OpSig::Exchange(p) => p,
            OpSig::Ring(_) => Pattern::Ring,
            OpSig::Reduce(_) => Pattern::Reduce,
        };
        let started = Instant::now();
        let board = self.board;
        let ranks = board.ranks;
        let rank = self.rank;

        let mut st = board.state.lock().unwrap();
        if let Some(f) = &st.failure {
            let f = f.clone();
            drop(st);
            panic!("transport aborted: {f}");
        }

        let entry = st
            .epochs
            .entry(epoch)
            .or_insert_with(|| EpochState::new(sig.clone(), ranks));
        if entry.sig != sig {
            let expected = entry.sig.to_string();
            let diag = format!(
                "collective #{epoch}: rank {rank} called {sig} but the collective opened as {expected}; {}",
                board.diagnostic(&st)
            );
            board.fail(&mut st, TransportError::CollectiveMismatch(diag));
            drop(st);
            panic!("transport aborted: collective mismatch (rank {rank} called {sig})");
        }
        let entry = st.epochs.get_mut(&epoch).unwrap();
        entry.contribs[rank] = Some(contrib);
        entry.joined += 1;
        let complete = entry.joined == ranks;
        st.rank_epoch[rank] = epoch + 1;
        st.pending[rank] = Some(PendingOp {
            epoch,
            desc: sig.to_string(),
        });
        if complete {
            let mut epoch_state = st.epochs.remove(&epoch).unwrap();
            let combined = board.combine(&mut epoch_state);
            st.epochs.insert(epoch, epoch_state);
            if let Err(e) = combined {
                board.fail(&mut st, e.clone());
                drop(st);
                panic!("transport aborted: {e}");
            }
        } else if let Some(s) =
            (0..ranks).find(|&s| st.finished[s] && st.rank_epoch[s] <= epoch)
        {
            // A rank already returned without ever reaching this collective.
            let diag = format!(
                "rank {s} returned without joining {sig} (collective #{epoch}); {}",
                board.diagnostic(&st)
            );
            board.fail(&mut st, TransportError::CollectiveMismatch(diag));
            drop(st);
            panic!("transport aborted: collective mismatch (rank {s} exited early)");
        }
        st.progress += 1;
        board.pass_turn(&mut st, rank);
        board.cv.notify_all();

        // Wait for the collective to complete (and, in sequential mode, for
        // the turn token to come back around).
        let tick = Duration::from_millis(25).min(board.timeout);
        let mut seen_progress = st.progress;
        let mut stall_start = Instant::now();
        loop {
            if let Some(f) = &st.failure {
                let f = f.clone();
                drop(st);
                panic!("transport aborted: {f}");
            }
            let ready = st.epochs.get(&epoch).map(|e| e.done).unwrap_or(false);
            let my_turn = board.scheduler != Scheduler::Sequential || st.turn == rank;
            if ready && my_turn {
                break;
            }
            if st.progress != seen_progress {
                seen_progress = st.progress;
                stall_start = Instant::now();
            } else if stall_start.elapsed() >= board.timeout {
                let diag = board.diagnostic(&st);
                board.fail(
                    &mut st,
                    TransportError::Deadlock {
                        timeout: board.timeout,
                        diagnostic: diag,
                    },
                );
                continue;
            }
            let (guard, _) = board.cv.wait_timeout(st, tick).unwrap();
            st = guard;
        }

        let entry = st.epochs.get_mut(&epoch).unwrap();
        let out = entry.outputs[rank].take().expect("output already taken");
        entry.taken += 1;
        if entry.taken == ranks {
            st.epochs.remove(&epoch);
        }
        st.pending[rank] = None;
        st.progress += 1;
        board.cv.notify_all();
        drop(st);

        self.trace.log_wall(pattern, started.elapsed().as_nanos() as u64);
        out
    }
}

// ---------------------------------------------------------------------------
// Rank group
// ---------------------------------------------------------------------------

/// Configuration and entry point for running rank bodies.
#[derive(Debug, Clone)]
pub struct RankGroup {
    grid: (usize, usize),
    scheduler: Scheduler,
    deadlock_timeout: Duration,
    record_events: bool,
}

impl RankGroup {
    /// A group with a `(px, py)` logical grid; the rank count is `px * py`.
    pub fn new(grid: (usize, usize)) -> Self {
        Self {
            grid,
            scheduler: Scheduler::default(),
            deadlock_timeout: Duration::from_secs(30),
            record_events: false,
        }
    }

    /// A 1D group of `n` ranks (grid `(n, 1)`).
    pub fn linear(n: usize) -> Self {
        Self::new((n, 1))
    }

    pub fn with_scheduler(mut self, scheduler: Scheduler) -> Self {
        self.scheduler = scheduler;
        self
    }

    pub fn with_deadlock_timeout(mut self, timeout: Duration) -> Self {
        self.deadlock_timeout = timeout;
        self
    }

    /// Record the per-send event log (large; off by default).
    pub fn with_event_log(mut self, record: bool) -> Self {
        self.record_events = record;
        self
    }

    pub fn rank_count(&self) -> usize {
        self.grid.0 * self.grid.1
    }

    pub fn grid(&self) -> (usize, usize) {
        self.grid
    }

    /// Run `body` on every rank and merge results and traces in rank order.
    pub fn run<T, F>(&self, body: F) -> Result<RunOutput<T>, TransportError>
    where
        T: Send,
        F: Fn(&mut Comm) -> T + Sync,
    {
        let ranks = self.rank_count();
        if ranks == 0 {
            return Err(TransportError::InvalidGroup(format!(
                "grid {:?} has no ranks",
                self.grid
            )));
        }
        let board = Board::new(ranks, self.scheduler, self.deadlock_timeout);
        let body = &body;

        let joined: Vec<Result<(T, CommTrace), String>> = std::thread::scope(|scope| {
            let mut handles = Vec::with_capacity(ranks);
            for rank in 0..ranks {
                let board = &board;
                let record_events = self.record_events;
                let grid = self.grid;
                handles.push(scope.spawn(move || {
                    board.wait_for_turn(rank);
                    let mut comm = Comm {
                        rank,
                        ranks,
                        grid,
                        board,
                        trace: CommTrace::new(record_events),
                        epoch: 0,
                    };
                    let result = catch_unwind(AssertUnwindSafe(|| body(&mut comm)));
                    match result {
                        Ok(value) => {
                            board.finish(rank);
                            Ok((value, comm.trace))
                        }
                        Err(payload) => {
                            let message = panic_message(payload.as_ref());
                            board.record_panic(rank, message.clone());
                            Err(message)
                        }
                    }
                }));
            }
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|p| Err(panic_message(p.as_ref()))))
                .collect()
        });

        if let Some(failure) = board.state.lock().unwrap().failure.take() {
            return Err(failure);
        }
        let mut results = Vec::with_capacity(ranks);
        let mut traces = Vec::with_capacity(ranks);
        for (rank, item) in joined.into_iter().enumerate() {
            match item {
                Ok((value, trace)) => {
                    results.push(value);
                    traces.push(trace);
                }
                Err(message) => return Err(TransportError::RankPanicked { rank, message }),
            }
        }
        Ok(RunOutput {
            results,
            trace: MergedTrace {
                ranks,
                per_rank: traces,
            },
        })
    }
}

fn panic_message(payload: &(dyn std::any::Any + Send)) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "unknown panic".to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn group(n: usize, scheduler: Scheduler) -> RankGroup {
        RankGroup::linear(n)
            .with_scheduler(scheduler)
            .with_deadlock_timeout(Duration::from_secs(5))
    }

    #[test]
    fn single_rank_no_traffic() {
        let out = group(1, Scheduler::Sequential).run(|_| 42).unwrap();
        assert_eq!(out.results, vec![42]);
        assert!(out.trace.is_empty());
    }

    #[test]
    fn barrier_only_touches_reduce() {
        let out = group(4, Scheduler::Threaded)
            .run(|comm| comm.barrier())
            .unwrap();
        for p in Pattern::ALL {
            let t = out.trace.total(p);
            assert_eq!(t.bytes_sent, 0, "pattern {p} has bytes");
            if p != Pattern::Reduce {
                assert_eq!(t.messages_sent, 0, "pattern {p} has messages");
            }
        }
        assert!(out.trace.total(Pattern::Reduce).messages_sent > 0);
    }

    #[test]
    fn ring_class_send_counts() {
        // Each rank sends 8 bytes to (rank+1)%4 in the ring class.
        let out = group(4, Scheduler::Threaded)
            .run(|comm| {
                let payload = (comm.rank() as u64).to_le_bytes().to_vec();
                comm.ring_shift(payload, RingDirection::Forward);
            })
            .unwrap();
        let t = out.trace.total(Pattern::Ring);
        assert_eq!(t.messages_sent, 4);
        assert_eq!(t.bytes_sent, 32);
    }

    #[test]
    fn exchange_delivers_pairwise() {
        let out = group(2, Scheduler::Sequential)
            .run(|comm| {
                if comm.rank() == 0 {
                    comm.exchange(vec![(1, b"ab".to_vec())], Pattern::PointToPoint)
                } else {
                    comm.exchange(vec![], Pattern::PointToPoint)
                }
            })
            .unwrap();
        assert!(out.results[0].is_empty());
        assert_eq!(out.results[1], vec![(0usize, b"ab".to_vec())]);
    }

    #[test]
    fn exchange_empty_everywhere() {
        let out = group(3, Scheduler::Threaded)
            .run(|comm| comm.exchange(vec![], Pattern::Halo))
            .unwrap();
        for inbox in &out.results {
            assert!(inbox.is_empty());
        }
        assert_eq!(out.trace.total(Pattern::Halo).bytes_sent, 0);
    }

    #[test]
    fn all_to_all_self_delivery_is_free() {
        // 4-byte payload to every rank including self: 12 wire bytes per rank.
        let out = group(4, Scheduler::Threaded)
            .run(|comm| {
                let sends = (0..comm.size()).map(|d| (d, vec![0u8; 4])).collect();
                let received = comm.exchange(sends, Pattern::AllToAll);
                assert_eq!(received.len(), 4);
                comm.counters(Pattern::AllToAll)
            })
            .unwrap();
        for c in &out.results {
            assert_eq!(c.bytes_sent, 12);
            assert_eq!(c.messages_sent, 3);
            assert_eq!(c.bytes_received, 12);
        }
    }

    #[test]
    fn ring_of_one_receives_own_payload() {
        let out = group(1, Scheduler::Sequential)
            .run(|comm| comm.ring_shift(b"solo".to_vec(), RingDirection::Forward))
            .unwrap();
        assert_eq!(out.results[0], b"solo".to_vec());
        assert_eq!(out.trace.total(Pattern::Ring).bytes_sent, 0);
    }

    #[test]
    fn ring_rotation_by_definition() {
        let out = group(3, Scheduler::Threaded)
            .run(|comm| {
                let names = [b"A", b"B", b"C"];
                comm.ring_shift(names[comm.rank()].to_vec(), RingDirection::Forward)
            })
            .unwrap();
        let got: Vec<&[u8]> = out.results.iter().map(|v| v.as_slice()).collect();
        assert_eq!(got, vec![b"C".as_slice(), b"A".as_slice(), b"B".as_slice()]);
    }

    #[test]
    fn full_circulation_visits_every_payload_once() {
        let out = group(4, Scheduler::Threaded)
            .run(|comm| {
                let mut seen = vec![comm.rank()];
                let mut payload = vec![comm.rank() as u8];
                for _ in 0..comm.size() - 1 {
                    payload = comm.ring_shift(payload, RingDirection::Forward);
                    seen.push(payload[0] as usize);
                }
                seen.sort_unstable();
                seen
            })
            .unwrap();
        for seen in &out.results {
            assert_eq!(*seen, vec![0, 1, 2, 3]);
        }
    }

    #[test]
    fn all_reduce_examples() {
        let out = group(1, Scheduler::Sequential)
            .run(|comm| comm.all_reduce(&[5.0], ReduceOp::Sum))
            .unwrap();
        assert_eq!(out.results[0], vec![5.0]);

        let out = group(4, Scheduler::Threaded)
            .run(|comm| comm.all_reduce(&[comm.rank() as f64 + 1.0], ReduceOp::Sum))
            .unwrap();
        for r in &out.results {
            assert_eq!(*r, vec![10.0]);
        }

        let out = group(3, Scheduler::Threaded)
            .run(|comm| {
                let counts = [250.0, 260.0, 255.0];
                comm.all_reduce(&[counts[comm.rank()]], ReduceOp::Max)
            })
            .unwrap();
        for r in &out.results {
            assert_eq!(*r, vec![260.0]);
        }
    }

    #[test]
    fn reduce_result_independent_of_grouping_for_max() {
        // Same global multiset, different rank counts.
        let values = [3.5, -1.25, 9.0, 2.0, 7.75, 0.5];
        let max4 = group(6, Scheduler::Threaded)
            .run(|comm| comm.all_reduce(&[values[comm.rank()]], ReduceOp::Max))
            .unwrap();
        let max2 = group(2, Scheduler::Threaded)
            .run(|comm| {
                let mine = if comm.rank() == 0 {
                    values[..3].iter().cloned().fold(f64::MIN, f64::max)
                } else {
                    values[3..].iter().cloned().fold(f64::MIN, f64::max)
                };
                comm.all_reduce(&[mine], ReduceOp::Max)
            })
            .unwrap();
        assert_eq!(max4.results[0], max2.results[0]);
    }

    #[test]
    fn schedulers_agree_bitwise() {
        let body = |comm: &mut Comm| {
            let mut acc = vec![comm.rank() as f64 * 0.1 + 0.7];
            acc = comm.all_reduce(&acc, ReduceOp::Sum);
            let payload = acc[0].to_le_bytes().to_vec();
            let got = comm.ring_shift(payload, RingDirection::Backward);
            f64::from_le_bytes(got.try_into().unwrap())
        };
        let a = group(4, Scheduler::Threaded).run(body).unwrap();
        let b = group(4, Scheduler::Sequential).run(body).unwrap();
        assert_eq!(a.results, b.results);
        assert_eq!(
            serde_json::to_string(&a.trace.export("x", true)).unwrap(),
            serde_json::to_string(&b.trace.export("x", true)).unwrap()
        );
    }

    #[test]
    fn repeated_runs_export_identical_traces() {
        let run = || {
            group(4, Scheduler::Sequential)
                .with_event_log(true)
                .run(|comm| {
                    let sends = (0..comm.size())
                        .map(|d| (d, vec![comm.rank() as u8; d + 1]))
                        .collect();
                    comm.exchange(sends, Pattern::AllToAll);
                    comm.barrier();
                })
                .unwrap()
        };
        let a = run().trace.export("same", true);
        let b = run().trace.export("same", true);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn mismatched_collectives_abort_with_diagnostic() {
        let err = group(2, Scheduler::Threaded)
            .run(|comm| {
                if comm.rank() == 0 {
                    comm.barrier();
                } else {
                    comm.ring_shift(vec![1], RingDirection::Forward);
                }
            })
            .unwrap_err();
        match err {
            TransportError::CollectiveMismatch(diag) => {
                assert!(diag.contains("ring_shift") || diag.contains("all_reduce"), "{diag}");
            }
            other => panic!("expected mismatch, got {other}"),
        }
    }

    #[test]
    fn early_return_is_detected() {
        let err = group(2, Scheduler::Threaded)
            .run(|comm| {
                if comm.rank() == 0 {
                    comm.barrier();
                }
            })
            .unwrap_err();
        match err {
            TransportError::CollectiveMismatch(diag) => {
                assert!(diag.contains("rank 1"), "{diag}");
            }
            other => panic!("expected mismatch, got {other}"),
        }
    }

    #[test]
    fn stalled_rank_triggers_deadlock_diagnostic() {
        let err = RankGroup::linear(2)
            .with_deadlock_timeout(Duration::from_millis(60))
            .run(|comm| {
                if comm.rank() == 1 {
                    std::thread::sleep(Duration::from_millis(400));
                }
                comm.barrier();
            })
            .unwrap_err();
        match err {
            TransportError::Deadlock { diagnostic, .. } => {
                assert!(diagnostic.contains("rank 0"), "{diagnostic}");
                assert!(diagnostic.contains("no pending transport call"), "{diagnostic}");
            }
            other => panic!("expected deadlock, got {other}"),
        }
    }

    #[test]
    fn body_panic_is_reported_with_rank() {
        let err = group(3, Scheduler::Threaded)
            .run(|comm| {
                if comm.rank() == 2 {
                    panic!("step 7: NaN in field");
                }
                comm.barrier();
            })
            .unwrap_err();
        match err {
            TransportError::RankPanicked { rank, message } => {
                assert_eq!(rank, 2);
                assert!(message.contains("step 7"));
            }
            other => panic!("expected panic report, got {other}"),
        }
    }

    #[test]
    fn reduce_length_mismatch_aborts() {
        let err = group(2, Scheduler::Threaded)
            .run(|comm| {
                let v = vec![1.0; comm.rank() + 1];
                comm.all_reduce(&v, ReduceOp::Sum);
            })
            .unwrap_err();
        assert!(matches!(err, TransportError::ReduceLengthMismatch(_)), "{err}");
    }

    #[test]
    fn bytes_conserved_per_pattern() {
        // Pseudo-random sends; total bytes sent must equal total received
        // in every pattern class.
        let out = group(5, Scheduler::Threaded)
            .run(|comm| {
                let r = comm.rank() as u64;
                for round in 0..4u64 {
                    let sends = (0..comm.size())
                        .filter(|&d| crate::util::rng::hash3(11, r * 7 + round, d as u64) % 3 != 0)
                        .map(|d| {
                            let len = (crate::util::rng::hash3(13, r + round, d as u64) % 65) as usize;
                            (d, vec![0xabu8; len])
                        })
                        .collect();
                    let pattern = [Pattern::Halo, Pattern::Migrate, Pattern::AllToAll, Pattern::PointToPoint]
                        [round as usize];
                    comm.exchange(sends, pattern);
                }
                comm.all_reduce(&[1.0, 2.0], ReduceOp::Sum);
            })
            .unwrap();
        for p in Pattern::ALL {
            let t = out.trace.total(p);
            assert_eq!(t.bytes_sent, t.bytes_received, "pattern {p}");
            assert_eq!(t.messages_sent, t.messages_received, "pattern {p}");
        }
    }
}
