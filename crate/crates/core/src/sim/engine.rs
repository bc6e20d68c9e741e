//! Event loop of a single replication.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dist::{sample, ServiceDistribution};
use super::{Preemption, Routing, SimConfig};
use crate::Priority;

/// Metrics of one replication. Counts are time averages over
/// `[warmup, horizon]`; requests arriving in that window are followed past
/// the horizon until they depart, so their sojourns are not censored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationMetrics {
    pub mean_read: f64,
    pub mean_write: f64,
    pub mean_total: f64,
    /// Mean sojourn of reads that arrived inside the window.
    pub sojourn_read: f64,
    /// Mean time from arrival at the primary to the last secondary completion.
    pub sojourn_write: f64,
    pub effective_lambda_read: f64,
    pub effective_lambda_write: f64,
    pub events_processed: u64,
    pub trace: Option<ReplicationTrace>,
}

impl ReplicationMetrics {
    /// Relative Little's law gaps `|L - lambda W| / L` for reads and writes.
    pub fn littles_law_gaps(&self) -> (f64, f64) {
        let gap = |l: f64, lambda: f64, w: f64| {
            if l > 0.0 {
                (l - lambda * w).abs() / l
            } else {
                0.0
            }
        };
        (
            gap(
                self.mean_read,
                self.effective_lambda_read,
                self.sojourn_read,
            ),
            gap(
                self.mean_write,
                self.effective_lambda_write,
                self.sojourn_write,
            ),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicationTrace {
    /// Write ids in completion order, one list per secondary.
    pub secondary_completions: Vec<Vec<u64>>,
    /// Digest over every processed event's time, kind and server.
    pub event_digest: u64,
}

impl ReplicationTrace {
    /// Whether every secondary completed writes in arrival order.
    pub fn is_fcfs(&self) -> bool {
        self.secondary_completions
            .iter()
            .all(|ids| ids.windows(2).all(|w| w[0] < w[1]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Read,
    Write,
}

#[derive(Debug, Clone, Copy)]
struct Job {
    id: u64,
    arrival: f64,
    remaining: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
struct InService {
    class: Class,
    job: Job,
    start: f64,
    work: f64,
}

#[derive(Debug, Default)]
struct Server {
    reads: VecDeque<Job>,
    writes: VecDeque<Job>,
    busy: Option<InService>,
    version: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EventKind {
    ReadArrival,
    WriteArrival,
    Completion { server: usize, version: u64 },
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // Reversed so the max-heap pops the earliest event first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct PendingWrite {
    arrival: f64,
    outstanding: usize,
}

struct Sim<'a> {
    cfg: &'a SimConfig,
    n: usize,
    rng: ChaCha8Rng,
    now: f64,
    warmup: f64,
    horizon: f64,
    heap: BinaryHeap<Event>,
    seq: u64,
    servers: Vec<Server>,
    rr_next: usize,
    next_read_id: u64,
    next_write_id: u64,
    /// Writes still in the system, indexed by `id - first_pending`.
    pending: VecDeque<PendingWrite>,
    first_pending: u64,
    reads_in_system: usize,
    writes_in_system: usize,
    area_read: f64,
    area_write: f64,
    last: f64,
    read_arrivals: u64,
    write_arrivals: u64,
    /// Window arrivals still in the system.
    tagged_in_system: u64,
    drain_limit: f64,
    read_sojourn: (f64, u64),
    write_sojourn: (f64, u64),
    events: u64,
    trace: Option<ReplicationTrace>,
}

/// Draining past the horizon stops at this multiple of it, which only
/// matters for overloaded runs.
const DRAIN_FACTOR: f64 = 2.0;

const DIGEST_PRIME: u64 = 0x0000_0100_0000_01b3;

impl<'a> Sim<'a> {
    fn new(cfg: &'a SimConfig, seed: u64) -> Self {
        let n = cfg.params.n;
        let trace = cfg.trace.then(|| ReplicationTrace {
            secondary_completions: vec![Vec::new(); n],
            event_digest: 0xcbf2_9ce4_8422_2325,
        });
        Self {
            cfg,
            n,
            rng: ChaCha8Rng::seed_from_u64(seed),
            now: 0.0,
            warmup: cfg.warmup_fraction * cfg.horizon,
            horizon: cfg.horizon,
            heap: BinaryHeap::new(),
            seq: 0,
            servers: (0..=n).map(|_| Server::default()).collect(),
            rr_next: 0,
            next_read_id: 0,
            next_write_id: 0,
            pending: VecDeque::new(),
            first_pending: 0,
            reads_in_system: 0,
            writes_in_system: 0,
            area_read: 0.0,
            area_write: 0.0,
            last: 0.0,
            read_arrivals: 0,
            write_arrivals: 0,
            tagged_in_system: 0,
            drain_limit: DRAIN_FACTOR * cfg.horizon,
            read_sojourn: (0.0, 0),
            write_sojourn: (0.0, 0),
            events: 0,
            trace,
        }
    }

    fn uniform(&mut self) -> f64 {
        self.rng.sample(Open01)
    }

    fn schedule(&mut self, time: f64, kind: EventKind) {
        self.seq += 1;
        self.heap.push(Event {
            time,
            seq: self.seq,
            kind,
        });
    }

    fn schedule_arrival(&mut self, rate: f64, kind: EventKind) {
        if rate > 0.0 {
            let gap = -self.uniform().ln() / rate;
            self.schedule(self.now + gap, kind);
        }
    }

    fn in_window(&self, arrival: f64) -> bool {
        arrival >= self.warmup && arrival <= self.horizon
    }

    fn advance(&mut self, t: f64) {
        let from = self.last.max(self.warmup);
        let to = t.min(self.horizon);
        if to > from {
            let dt = to - from;
            self.area_read += self.reads_in_system as f64 * dt;
            self.area_write += self.writes_in_system as f64 * dt;
        }
        self.last = t;
        self.now = t;
    }

    fn high_priority(&self) -> Class {
        match self.cfg.policy.priority {
            Priority::ReadPriority => Class::Read,
            Priority::WritePriority => Class::Write,
        }
    }

    fn dist(&self, class: Class) -> &'a ServiceDistribution {
        match class {
            Class::Read => &self.cfg.read_dist,
            Class::Write => &self.cfg.write_dist,
        }
    }

    fn enqueue(&mut self, s: usize, class: Class, job: Job) {
        let server = &mut self.servers[s];
        match class {
            Class::Read => server.reads.push_back(job),
            Class::Write => server.writes.push_back(job),
        }
        let busy = server.busy;
        let high = self.high_priority();
        match busy {
            None => self.start_next(s),
            Some(cur)
                if self.cfg.policy.preemption == Preemption::PreemptiveResume
                    && class == high
                    && cur.class != high =>
            {
                let left = (cur.work - (self.now - cur.start)).max(0.0);
                let resumed = Job {
                    remaining: Some(left),
                    ..cur.job
                };
                let server = &mut self.servers[s];
                match cur.class {
                    Class::Read => server.reads.push_front(resumed),
                    Class::Write => server.writes.push_front(resumed),
                }
                server.busy = None;
                self.start_next(s);
            }
            Some(_) => {}
        }
    }

    fn start_next(&mut self, s: usize) {
        let high = self.high_priority();
        let server = &mut self.servers[s];
        let (first, second) = match high {
            Class::Read => (&mut server.reads, &mut server.writes),
            Class::Write => (&mut server.writes, &mut server.reads),
        };
        let (class, job) = if let Some(job) = first.pop_front() {
            (high, job)
        } else if let Some(job) = second.pop_front() {
            let low = if high == Class::Read {
                Class::Write
            } else {
                Class::Read
            };
            (low, job)
        } else {
            return;
        };
        let work = match job.remaining {
            Some(w) => w,
            None => {
                let u = self.uniform();
                sample(self.dist(class), u)
            }
        };
        let server = &mut self.servers[s];
        server.version += 1;
        let version = server.version;
        server.busy = Some(InService {
            class,
            job,
            start: self.now,
            work,
        });
        self.schedule(
            self.now + work,
            EventKind::Completion { server: s, version },
        );
    }

    fn route_read(&mut self) -> usize {
        let servers = self.n + 1;
        match self.cfg.policy.routing {
            Routing::UniformRandom => self.rng.random_range(0..servers),
            Routing::RoundRobin => {
                let s = self.rr_next;
                self.rr_next = (s + 1) % servers;
                s
            }
        }
    }

    fn depart_write(&mut self, id: u64) {
        let slot = &mut self.pending[(id - self.first_pending) as usize];
        let arrival = slot.arrival;
        if self.in_window(arrival) {
            self.write_sojourn.0 += self.now - arrival;
            self.write_sojourn.1 += 1;
            self.tagged_in_system -= 1;
        }
        self.writes_in_system -= 1;
        while self.pending.front().is_some_and(|p| p.outstanding == 0) {
            self.pending.pop_front();
            self.first_pending += 1;
        }
    }

    fn complete(&mut self, s: usize, version: u64) -> bool {
        let server = &mut self.servers[s];
        match server.busy {
            Some(_) if server.version == version => {}
            _ => return false,
        }
        let done = server.busy.take().expect("checked above");
        match done.class {
            Class::Read => {
                self.reads_in_system -= 1;
                if self.in_window(done.job.arrival) {
                    self.read_sojourn.0 += self.now - done.job.arrival;
                    self.read_sojourn.1 += 1;
                    self.tagged_in_system -= 1;
                }
            }
            Class::Write if s == 0 => {
                if self.n == 0 {
                    self.pending[(done.job.id - self.first_pending) as usize].outstanding = 0;
                    self.depart_write(done.job.id);
                } else {
                    let fork = Job {
                        remaining: None,
                        ..done.job
                    };
                    for j in 1..=self.n {
                        self.enqueue(j, Class::Write, fork);
                    }
                }
            }
            Class::Write => {
                let id = done.job.id;
                if let Some(trace) = &mut self.trace {
                    trace.secondary_completions[s - 1].push(id);
                }
                let slot = &mut self.pending[(id - self.first_pending) as usize];
                slot.outstanding -= 1;
                if slot.outstanding == 0 {
                    self.depart_write(id);
                }
            }
        }
        self.start_next(s);
        true
    }

    fn digest(&mut self, ev: &Event) {
        if let Some(trace) = &mut self.trace {
            let tag = match ev.kind {
                EventKind::ReadArrival => 1,
                EventKind::WriteArrival => 2,
                EventKind::Completion { server, .. } => 3 + server as u64,
            };
            for word in [ev.time.to_bits(), tag] {
                trace.event_digest = (trace.event_digest ^ word).wrapping_mul(DIGEST_PRIME);
            }
        }
    }

    fn run(mut self) -> ReplicationMetrics {
        let p = self.cfg.params;
        self.schedule_arrival(p.lambda_r, EventKind::ReadArrival);
        self.schedule_arrival(p.lambda_w, EventKind::WriteArrival);
        while let Some(ev) = self.heap.pop() {
            if ev.time > self.horizon && (self.tagged_in_system == 0 || ev.time > self.drain_limit)
            {
                break;
            }
            self.advance(ev.time);
            let processed = match ev.kind {
                EventKind::ReadArrival => {
                    let job = Job {
                        id: self.next_read_id,
                        arrival: self.now,
                        remaining: None,
                    };
                    self.next_read_id += 1;
                    self.reads_in_system += 1;
                    if self.in_window(self.now) {
                        self.read_arrivals += 1;
                        self.tagged_in_system += 1;
                    }
                    let s = self.route_read();
                    self.enqueue(s, Class::Read, job);
                    self.schedule_arrival(p.lambda_r, EventKind::ReadArrival);
                    true
                }
                EventKind::WriteArrival => {
                    let job = Job {
                        id: self.next_write_id,
                        arrival: self.now,
                        remaining: None,
                    };
                    self.next_write_id += 1;
                    self.writes_in_system += 1;
                    if self.in_window(self.now) {
                        self.write_arrivals += 1;
                        self.tagged_in_system += 1;
                    }
                    self.pending.push_back(PendingWrite {
                        arrival: self.now,
                        outstanding: self.n.max(1),
                    });
                    self.enqueue(0, Class::Write, job);
                    self.schedule_arrival(p.lambda_w, EventKind::WriteArrival);
                    true
                }
                EventKind::Completion { server, version } => self.complete(server, version),
            };
            if processed {
                self.events += 1;
                self.digest(&ev);
            }
        }
        if self.last < self.horizon {
            self.advance(self.horizon);
        }

        let window = self.horizon - self.warmup;
        let mean_read = self.area_read / window;
        let mean_write = self.area_write / window;
        let avg = |(sum, count): (f64, u64)| if count > 0 { sum / count as f64 } else { 0.0 };
        ReplicationMetrics {
            mean_read,
            mean_write,
            mean_total: mean_read + mean_write,
            sojourn_read: avg(self.read_sojourn),
            sojourn_write: avg(self.write_sojourn),
            effective_lambda_read: self.read_arrivals as f64 / window,
            effective_lambda_write: self.write_arrivals as f64 / window,
            events_processed: self.events,
            trace: self.trace,
        }
    }
}

/// Runs one replication of `config` driven by `seed`.
pub fn run_replication(config: &SimConfig, seed: u64) -> ReplicationMetrics {
    Sim::new(config, seed).run()
}
